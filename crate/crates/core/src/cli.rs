//! Command-line front end. Exit codes: 0 all checks hold, 1 a check is
//! refuted, 2 configuration or I/O error, 3 internal inconsistency.

use crate::classify::{
    check_partition_independence, coprime_minimality_check, find_minimal_pair, lattice_pairs, mapped_level,
    partition_samples, PairOutcome, PairSearch, StrictnessPartition,
};
use crate::error::{invalid, Error, Result};
use crate::fixtures;
use crate::infisometry::{check_minf_isometry, check_renorm_isometry, power_bound, MinfConfig};
use crate::operators::{
    check_mp_isometry, hilbert_residual, spectral_radius, NormKind, OperatorSpec, SampleConfig, StrategyChoice,
};
use crate::report::{envelope, to_json, to_markdown};
use crate::sequences::{classify_rho, is_in_a_mp, RhoClassification, RhoSearch, SequenceFile, DEFAULT_TOL};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use std::path::PathBuf;

pub const SEED_ENV: &str = "MISOMETRY_SEED";

#[derive(Debug, Parser)]
#[command(name = "misometry", version, about = "Check (m,p)- and (m,inf)-isometries of finite-dimensional operators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct OperatorArgs {
    /// Bundled operator: jordan, bayart-shift, rot3, involution.
    #[arg(long, conflicts_with = "operator", required_unless_present = "operator")]
    pub preset: Option<String>,
    /// Operator description in JSON.
    #[arg(long)]
    pub operator: Option<PathBuf>,
    /// Override the norm: a positive exponent or `inf`.
    #[arg(long)]
    pub norm: Option<String>,
    /// Bayart shift parameter.
    #[arg(long, default_value_t = 2.0)]
    pub lambda: f64,
    /// Bayart weight exponent; also the exponent of the shift's space.
    #[arg(long = "weight-p", default_value_t = 2.0)]
    pub weight_p: f64,
    #[arg(long, default_value_t = 1024)]
    pub truncation: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Markdown,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Random sample vectors, in addition to basis probes.
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    /// Overridden by the MISOMETRY_SEED environment variable.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long)]
    pub horizon: Option<usize>,
    /// auto, hilbert, shift or sampled.
    #[arg(long, default_value = "auto")]
    pub strategy: String,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the (m,p)-isometry identity.
    CheckMp {
        #[command(flatten)]
        op: OperatorArgs,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        p: f64,
    },
    /// Check the parity-window (m,inf) condition.
    CheckMinf {
        #[command(flatten)]
        op: OperatorArgs,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        m: usize,
    },
    /// Find the anchoring strict pair and list the lattice.
    Classify {
        #[command(flatten)]
        op: OperatorArgs,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long = "k-max", default_value_t = 3)]
        k_max: usize,
        #[arg(long = "m-max", default_value_t = 8)]
        m_max: usize,
    },
    /// Group samples by the least order of their orbit.
    Partition {
        #[command(flatten)]
        op: OperatorArgs,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        p: f64,
        /// Second exponent for the independence cross-check.
        #[arg(long)]
        q: Option<f64>,
        #[arg(long = "max-order", default_value_t = 8)]
        max_order: usize,
    },
    /// Check the renormed isometry |Tx| = |x| and the norm equivalence.
    RenormCheck {
        #[command(flatten)]
        op: OperatorArgs,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        m: usize,
    },
    /// Classify a positive sequence from a JSON file.
    Sequence {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        /// Membership check at (m, p), together with --p.
        #[arg(long, requires = "p")]
        m: Option<usize>,
        #[arg(long, requires = "m")]
        p: Option<f64>,
        #[arg(long = "m-max", default_value_t = 8)]
        m_max: usize,
    },
}

pub fn parse_norm(s: &str) -> Result<NormKind> {
    match s {
        "inf" | "Inf" | "infinity" => Ok(NormKind::Inf),
        other => match other.parse::<f64>() {
            Ok(p) if p > 0.0 && p.is_finite() => Ok(NormKind::P(p)),
            _ => invalid(format!("norm must be a positive number or `inf`, got `{other}`")),
        },
    }
}

/// Resolve the operator and a label for the report.
pub fn load_operator(args: &OperatorArgs) -> Result<(OperatorSpec, Value)> {
    let norm = args.norm.as_deref().map(parse_norm).transpose()?;
    let (op, source) = match (&args.preset, &args.operator) {
        (Some(name), _) => {
            let op = match name.as_str() {
                "jordan" => fixtures::jordan(),
                "bayart-shift" => fixtures::bayart_shift(args.lambda, args.weight_p, args.truncation)?,
                "rot3" => fixtures::rot3(NormKind::l1()),
                "involution" => fixtures::involution(NormKind::Inf),
                other => return invalid(format!("unknown preset `{other}`; expected one of {:?}", fixtures::PRESETS)),
            };
            (op, json!({"preset": name}))
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)?;
            let op: OperatorSpec = serde_json::from_str(&text)?;
            (op, json!({"path": path.display().to_string()}))
        }
        (None, None) => return invalid("give --preset or --operator"),
    };
    let op = match norm {
        Some(n) => op.with_norm(n),
        None => op,
    };
    let mut source = source;
    source["spec"] = serde_json::to_value(&op)?;
    Ok((op, source))
}

fn seed(run: &RunArgs) -> Result<u64> {
    match std::env::var(SEED_ENV) {
        Ok(s) => {
            s.trim().parse().map_err(|_| Error::InvalidArgument(format!("{SEED_ENV} must be an integer, got `{s}`")))
        }
        Err(_) => Ok(run.seed),
    }
}

fn sampling(run: &RunArgs) -> Result<SampleConfig> {
    if !(run.tol > 0.0) {
        return invalid("tolerance must be positive");
    }
    if run.samples == 0 {
        return invalid("samples must be at least 1");
    }
    Ok(SampleConfig { samples: run.samples, seed: seed(run)?, tol: run.tol, ..SampleConfig::default() })
}

fn params(run: &RunArgs, cfg: &SampleConfig, horizon: usize, strategy: &str, extra: Value) -> Value {
    let mut p = json!({
        "seed": cfg.seed,
        "tol": cfg.tol,
        "samples": run.samples,
        "horizon": horizon,
        "strategy": strategy,
    });
    if let (Value::Object(base), Value::Object(more)) = (&mut p, extra) {
        base.extend(more);
    }
    p
}

fn partition_json(part: &StrictnessPartition) -> Value {
    json!({
        "p": part.p,
        "horizon": part.horizon,
        "samples": part.samples,
        "levels": part.levels.iter().map(|l| json!({"nu": l.nu, "count": l.count, "representatives": l.representatives})).collect::<Vec<_>>(),
        "near_cliff": part.near_cliff,
    })
}

/// Run one command; returns the report and whether everything held.
pub fn execute(command: &Command) -> Result<(Value, bool, RunArgs)> {
    match command {
        Command::CheckMp { op, run, m, p } => {
            let (operator, source) = load_operator(op)?;
            let cfg = sampling(run)?;
            let strategy: StrategyChoice = run.strategy.parse()?;
            let verdict = check_mp_isometry(&operator, *m, *p, strategy, &cfg)?;
            let mut result = json!({"pair": [m, p], "verdict": verdict});
            if let (Some(d), NormKind::P(q)) = (operator.as_dense(), operator.norm_kind()) {
                if q == 2.0 && *p == 2.0 {
                    let (residual, scale, _) = hilbert_residual(d, *m);
                    result["frobenius_residual"] = json!(residual);
                    result["frobenius_scale"] = json!(scale);
                }
            }
            let holds = verdict.holds();
            let params = params(run, &cfg, m + 1, verdict.strategy.name(), json!({"operator": source, "m": m, "p": p}));
            Ok((envelope("check-mp", params, result, holds), holds, run.clone()))
        }
        Command::CheckMinf { op, run, m } => {
            let (operator, source) = load_operator(op)?;
            let cfg = sampling(run)?;
            let mcfg = MinfConfig { sampling: cfg, horizon: run.horizon };
            let verdict = check_minf_isometry(&operator, *m, &mcfg)?;
            let bound = power_bound(&operator, *m, &cfg)?;
            let renorm = check_renorm_isometry(&operator, *m, &cfg)?;
            let mut minf = json!({"m": m, "verdict": verdict, "power_bound": bound, "renorm": renorm});
            if verdict.holds() {
                if let Ok(r) = spectral_radius(&operator) {
                    minf["spectral_radius"] = json!(r);
                }
            }
            let holds = verdict.holds();
            let params = params(run, &cfg, mcfg.horizon_for(*m), "sampled", json!({"operator": source, "m": m}));
            Ok((envelope("check-minf", params, json!({"minf": minf}), holds), holds, run.clone()))
        }
        Command::Classify { op, run, k_max, m_max } => {
            let (operator, source) = load_operator(op)?;
            let cfg = sampling(run)?;
            let search = PairSearch {
                m_max: *m_max,
                strategy: run.strategy.parse()?,
                sampling: cfg,
                roots: RhoSearch { tol: cfg.tol, ..RhoSearch::default() },
            };
            let outcome = find_minimal_pair(&operator, &search)?;
            let mut result = json!({"outcome": outcome});
            let mut horizon = 2 * m_max + 4;
            let holds = match outcome.lattice() {
                Some(lat) => {
                    let pairs: Vec<(usize, f64)> = lattice_pairs(&lat, *k_max);
                    result["lattice"] =
                        json!({"m0": lat.m0, "p0": lat.p0, "p0_rational": lat.p0_rational, "special": lat.special});
                    result["pairs"] = json!(pairs);
                    horizon = run.horizon.unwrap_or(2 * lat.m0 + 6);
                    let part = partition_samples(&operator, lat.m0, lat.p0, &cfg, horizon)?;
                    result["partition"] = partition_json(&part);
                    true
                }
                None => false,
            };
            let strategy = match &outcome {
                PairOutcome::Isometry { verdict } | PairOutcome::Lattice { verdict, .. } => verdict.strategy.name(),
                PairOutcome::NotFound { .. } => "sampled",
            };
            result["strategy"] = json!(strategy);
            result["seed"] = json!(cfg.seed);
            let params =
                params(run, &cfg, horizon, strategy, json!({"operator": source, "k_max": k_max, "m_max": m_max}));
            Ok((envelope("classify", params, result, holds), holds, run.clone()))
        }
        Command::Partition { op, run, p, q, max_order } => {
            let (operator, source) = load_operator(op)?;
            let cfg = sampling(run)?;
            let horizon = run.horizon.unwrap_or(2 * max_order + 2);
            let part = partition_samples(&operator, *max_order, *p, &cfg, horizon)?;
            let mut result = json!({
                "partition": partition_json(&part),
                "minimality": coprime_minimality_check(&part),
            });
            let mut holds = true;
            if let Some(q) = q {
                let order_q = mapped_level(*max_order, *p, *q)
                    .unwrap_or_else(|| 1 + ((*max_order - 1) as f64 * q / p).ceil() as usize);
                let horizon_q = run.horizon.unwrap_or(2 * order_q + 2);
                let part_q = partition_samples(&operator, order_q, *q, &cfg, horizon_q.max(horizon))?;
                let independence = check_partition_independence(&part, &part_q)?;
                holds = independence.holds();
                result["partition_q"] = partition_json(&part_q);
                result["independence"] = json!(independence);
            }
            let params = params(
                run,
                &cfg,
                horizon,
                "sampled",
                json!({"operator": source, "p": p, "q": q, "max_order": max_order}),
            );
            Ok((envelope("partition", params, result, holds), holds, run.clone()))
        }
        Command::RenormCheck { op, run, m } => {
            let (operator, source) = load_operator(op)?;
            let cfg = sampling(run)?;
            let mcfg = MinfConfig { sampling: cfg, horizon: run.horizon };
            let renorm = check_renorm_isometry(&operator, *m, &cfg)?;
            let minf = check_minf_isometry(&operator, *m, &mcfg)?;
            if minf.holds() && !renorm.holds() {
                return Err(Error::Inconsistency(format!(
                    "({m},inf) check holds but the renormed isometry fails; tolerance or horizon too tight"
                )));
            }
            let holds = renorm.holds();
            let result = json!({"renorm": renorm, "minf": minf});
            let params = params(run, &cfg, mcfg.horizon_for(*m), "sampled", json!({"operator": source, "m": m}));
            Ok((envelope("renorm-check", params, result, holds), holds, run.clone()))
        }
        Command::Sequence { input, run, m, p, m_max } => {
            let cfg = sampling(run)?;
            let text = std::fs::read_to_string(input)?;
            let file: SequenceFile = serde_json::from_str(&text)?;
            let horizon = run.horizon.unwrap_or(32);
            let a = file.to_prefix(horizon)?;
            let search = RhoSearch { m_max: *m_max, tol: cfg.tol, ..RhoSearch::default() };
            let rho = classify_rho(&a, &search)?;
            let name = match rho {
                RhoClassification::Empty { .. } => "Empty",
                RhoClassification::ConstantAll => "ConstantAll",
                RhoClassification::Lattice { .. } => "Lattice",
                RhoClassification::Undecidable { .. } => "Undecidable",
            };
            let mut result = json!({"classification": name, "details": rho, "length": a.len()});
            let mut holds = true;
            if let (Some(m), Some(p)) = (m, p) {
                let v = is_in_a_mp(&a, *m, *p, cfg.tol)?;
                holds = v.is_member();
                result["membership"] = json!(v);
            }
            let params = params(
                run,
                &cfg,
                a.len(),
                "exact-or-tolerance",
                json!({"input": input.display().to_string(), "m_max": m_max}),
            );
            Ok((envelope("sequence", params, result, holds), holds, run.clone()))
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Inconsistency(_) => 3,
        _ => 2,
    }
}

fn emit(report: &Value, run: &RunArgs) -> Result<()> {
    let text = match run.format {
        Format::Json => to_json(report),
        Format::Markdown => to_markdown(report),
    };
    match &run.output {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

/// Parse `args`, run, write the report; returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli.command).and_then(|(report, holds, run)| emit(&report, &run).map(|_| holds)) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
