//! The 2x2 Jordan block on (C^2, l2): exact (3,2) check, refutation of
//! neighbouring pairs, and the lattice of strict pairs it anchors.
//!
//! cargo run -p misometry --example jordan_lattice

use misometry::classify::{find_minimal_pair, intersect_strict, lattice_pairs, PairSearch};
use misometry::fixtures::jordan;
use misometry::operators::{check_mp_isometry, SampleConfig, StrategyChoice};

fn main() -> misometry::error::Result<()> {
    let t = jordan();
    let cfg = SampleConfig { samples: 1000, seed: 7, ..SampleConfig::default() };

    for (m, p) in [(3, 2.0), (2, 2.0), (3, 1.0), (3, 3.0)] {
        let v = check_mp_isometry(&t, m, p, StrategyChoice::Auto, &cfg)?;
        println!("({m},{p}): holds={} via {:?}, residual {:.3e}", v.holds(), v.strategy, v.max_relative_residual());
    }

    let outcome = find_minimal_pair(&t, &PairSearch { sampling: cfg, ..PairSearch::default() })?;
    let lat = outcome.lattice().expect("the Jordan block anchors a lattice");
    println!("anchor: ({}, {})", lat.m0, lat.p0);

    // every further pair holds too, by sampling
    for (mu, q) in lattice_pairs(&lat, 4).into_iter().skip(1) {
        let v = check_mp_isometry(&t, mu, q, StrategyChoice::Sampled, &cfg)?;
        println!("  ({mu},{q}): holds={}, max residual {:.2e}", v.holds(), v.max_relative_residual());
    }

    let (d, r) = intersect_strict(5, 4.0, 7, 6.0)?;
    println!("(5,4) and (7,6) meet at ({d},{r})");
    Ok(())
}
