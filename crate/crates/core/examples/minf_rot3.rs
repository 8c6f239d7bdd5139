//! [[0,1],[-1,1]] has T^3 = -I: a (5,inf)-isometry in every l_p norm but not
//! a (4,inf) one. The involution [[4,5],[-3,-4]] is not (m,inf) for any m.
//!
//! cargo run -p misometry --example minf_rot3

use misometry::fixtures::{involution, rot3};
use misometry::infisometry::{check_minf_inverse, check_minf_isometry, construct2_check, MinfConfig};
use misometry::operators::{spectral_radius, NormKind, SampleConfig};

fn main() -> misometry::error::Result<()> {
    let cfg = MinfConfig { sampling: SampleConfig { samples: 1000, ..SampleConfig::default() }, horizon: Some(40) };
    for norm in [NormKind::l1(), NormKind::l2(), NormKind::Inf] {
        let t = rot3(norm);
        let five = check_minf_isometry(&t, 5, &cfg)?;
        let four = check_minf_isometry(&t, 4, &cfg)?;
        println!(
            "{}: (5,inf) {}, (4,inf) {}, r(T) = {:.12}",
            norm.label(),
            five.holds(),
            four.holds(),
            spectral_radius(&t)?
        );
        if let Some(w) = four.witness() {
            println!("    witness {:?} at window {:?}", w.vector.iter().map(|z| z.re).collect::<Vec<_>>(), w.window);
        }
    }
    let s = involution(NormKind::Inf);
    let fails: Vec<bool> =
        (1..=6).map(|m| check_minf_isometry(&s, m, &cfg).map(|v| !v.holds())).collect::<Result<_, _>>()?;
    println!("involution fails m = 1..6: {fails:?}");

    let rep = construct2_check(&rot3(NormKind::l1()), 3, 5, &cfg)?;
    println!("T^3 isometry certifies (5,inf): {}", rep.certified());
    println!("even power refused: {}", construct2_check(&s, 2, 3, &cfg).unwrap_err());

    let inv = check_minf_inverse(&rot3(NormKind::l1()), 5, &cfg)?;
    println!("inverse is (5,inf): {}", inv.inverse_verdict.holds());
    Ok(())
}
