//! Operators described in JSON, checked, and written out as a
//! deterministic report.
//!
//! cargo run -p misometry --example operator_json

use misometry::operators::{check_mp_isometry, OperatorSpec, SampleConfig, StrategyChoice};
use misometry::report::{envelope, to_json};
use serde_json::json;

const SPECS: [&str; 3] = [
    r#"{"kind":"dense","field":"complex","entries":[[[1,0],[1,0]],[[0,0],[1,0]]],"norm_p":2}"#,
    r#"{"kind":"shift","weights":{"form":"bayart","lambda":2,"p":2},"space_p":2,"truncation":512}"#,
    r#"{"kind":"shift","weights":{"form":"list","values":[2,1.5],"tail":1},"space_p":1,"truncation":64}"#,
];

fn main() -> misometry::error::Result<()> {
    let cfg = SampleConfig::default();
    for (src, (m, p)) in SPECS.iter().zip([(3, 2.0), (2, 2.0), (3, 1.0)]) {
        let op: OperatorSpec = serde_json::from_str(src)?;
        let v = check_mp_isometry(&op, m, p, StrategyChoice::Auto, &cfg)?;
        let report = envelope("check-mp", json!({"m": m, "p": p, "seed": cfg.seed}), json!({"verdict": v}), v.holds());
        print!("{}", to_json(&report));
    }
    Ok(())
}
