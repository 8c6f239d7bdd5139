//! Weighted shift whose weights make ||T^n e_k||^p affine in n.
//!
//! cargo run -p misometry --example bayart_shift -- 3

use misometry::classify::{find_minimal_pair, PairSearch};
use misometry::fixtures::bayart_shift;
use misometry::operators::{check_mp_isometry, SampleConfig, ShiftWeights, StrategyChoice};

fn main() -> misometry::error::Result<()> {
    let p: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2.0);
    let lambda = 2.0;
    let t = bayart_shift(lambda, p, 1024)?;

    let w = ShiftWeights::Bayart { lambda, p };
    let worst = (1..=1000)
        .map(|n| ((w.weight(n + 1) * w.weight(n)).powf(p) - 2.0 * w.weight(n).powf(p) + 1.0).abs())
        .fold(0.0, f64::max);
    println!("w_1 = {:.6}, worst |(w_(n+1) w_n)^p - 2 w_n^p + 1| = {worst:.1e}", w.weight(1));

    let v = check_mp_isometry(&t, 2, p, StrategyChoice::Shift, &SampleConfig::default())?;
    println!("(2,{p}) shift check: {:?}", v.status);

    let mut e0 = vec![num_complex::Complex64::new(0.0, 0.0); 1024];
    e0[0] = 1.0.into();
    let norms = t.orbit_norm_values(&e0, 6)?;
    println!("||T^n e0||^p: {:?}", norms.iter().map(|a| a.powf(p)).collect::<Vec<_>>());

    let lat = find_minimal_pair(&t, &PairSearch::default())?.lattice().expect("lattice");
    println!("anchor ({}, {}), rational {:?}", lat.m0, lat.p0, lat.p0_rational);
    Ok(())
}
