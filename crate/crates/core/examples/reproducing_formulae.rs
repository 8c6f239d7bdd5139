//! Orbit polynomial of the Jordan block: Lagrange, Newton and barycentric
//! forms rebuilt from the first three values, and the leading-term limit.
//!
//! cargo run -p misometry --example reproducing_formulae

use misometry::fixtures::jordan;
use misometry::operators::beta;
use misometry::polyfit::{eval_barycentric, eval_lagrange_normal, eval_newton, interpolate, newton_coefficients};
use num_complex::Complex64;

fn main() -> misometry::error::Result<()> {
    let t = jordan();
    let x = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
    let orbit: Vec<f64> = t.orbit_norm_values(&x, 51)?.iter().map(|a| a * a).collect();
    let m = 3;
    let head = &orbit[..m];
    let betas = newton_coefficients(head);
    println!("betas {betas:?}, beta_2 from the operator {}", beta(&t, &x, 2, 2.0)?);
    println!("polynomial {:?}", interpolate(head).coeffs());

    let mut worst: f64 = 0.0;
    for n in m as u64..=50 {
        let direct = orbit[n as usize];
        for v in [eval_lagrange_normal(head, n)?, eval_newton(&betas, n), eval_barycentric(head, n)?] {
            worst = worst.max((v - direct).abs() / direct);
        }
    }
    println!("n = 3 -> {}, worst relative gap on [3, 50]: {worst:.1e}", eval_newton(&betas, 3));

    let n = 10_000;
    let tail = t.orbit_norm_values(&x, n + 1)?[n];
    println!("||T^n x||^2 / n^2 at n = {n}: {:.6}", tail * tail / (n * n) as f64);
    Ok(())
}
