//! Equivalent norm |x| = max_{k<m} ||T^k x|| turns an (m,inf)-isometry into
//! an isometry; the converse fails for the involution.
//!
//! cargo run -p misometry --example renorming

use misometry::fixtures::{involution, jordan, rot3};
use misometry::infisometry::{check_minf_isometry, check_renorm_isometry, equivalent_norm, power_bound, MinfConfig};
use misometry::operators::{NormKind, SampleConfig};
use num_complex::Complex64;

fn main() -> misometry::error::Result<()> {
    let cfg = SampleConfig { samples: 1000, tol: 1e-12, ..SampleConfig::default() };
    let x = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
    for norm in [NormKind::l1(), NormKind::l2(), NormKind::Inf] {
        let t = rot3(norm);
        let c = power_bound(&t, 5, &cfg)?;
        let r = check_renorm_isometry(&t, 5, &cfg)?;
        println!(
            "{}: C = {} ({:?}), |x| for x = (0,1): {}, renorm holds {}",
            norm.label(),
            c.value,
            c.method,
            equivalent_norm(&t, 5, &x)?,
            r.holds()
        );
    }
    println!("Jordan |(0,1)| at m = 3: {}", equivalent_norm(&jordan(), 3, &x)?);

    let s = involution(NormKind::Inf);
    let renorm = check_renorm_isometry(&s, 2, &cfg)?;
    let minf = check_minf_isometry(&s, 2, &MinfConfig::default())?;
    println!("involution: |Sx| = |x| {}, yet (2,inf) {}", renorm.holds(), minf.holds());
    Ok(())
}
