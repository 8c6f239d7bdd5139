use misometry::classify::{find_minimal_pair, lattice_pairs, partition_samples, PairOutcome, PairSearch};
use misometry::fixtures::{bayart_shift, involution, jordan, rot3, rotation};
use misometry::infisometry::{check_minf_isometry, MinfConfig};
use misometry::operators::{check_mp_isometry, spectral_radius, NormKind, OperatorSpec, SampleConfig, StrategyChoice};

fn mp_fixtures() -> Vec<(&'static str, OperatorSpec)> {
    vec![
        ("jordan", jordan()),
        ("bayart p=1", bayart_shift(2.0, 1.0, 256).unwrap()),
        ("bayart p=2", bayart_shift(2.0, 2.0, 256).unwrap()),
        ("bayart p=3", bayart_shift(1.5, 3.0, 256).unwrap()),
    ]
}

#[test]
fn lattices_confirm_pairs_and_refute_below() {
    let cfg = SampleConfig::default();
    for (name, op) in mp_fixtures() {
        let lat = find_minimal_pair(&op, &PairSearch::default()).unwrap().lattice().unwrap();
        for (mu, q) in lattice_pairs(&lat, 4) {
            assert!(
                check_mp_isometry(&op, mu, q, StrategyChoice::Sampled, &cfg).unwrap().holds(),
                "{name}: ({mu},{q})"
            );
        }
        if lat.m0 > 2 {
            let (mu, q) = (lat.m0 - 1, lat.p0 * (lat.m0 - 2) as f64 / (lat.m0 - 1) as f64);
            assert!(
                !check_mp_isometry(&op, mu, q, StrategyChoice::Sampled, &cfg).unwrap().holds(),
                "{name}: ({mu},{q})"
            );
        }
        // same order, other exponent: never
        for q in [lat.p0 * 0.5, lat.p0 * 1.5, lat.p0 + 1.0] {
            assert!(
                !check_mp_isometry(&op, lat.m0, q, StrategyChoice::Sampled, &cfg).unwrap().holds(),
                "{name}: ({},{q})",
                lat.m0
            );
        }
    }
}

#[test]
fn partition_levels_scale_with_exponent() {
    let cfg = SampleConfig { samples: 300, ..SampleConfig::default() };
    for k in 1..=3usize {
        let at_p = partition_samples(&jordan(), 3, 2.0, &cfg, 14).unwrap();
        let at_kp = partition_samples(&jordan(), 2 * k + 1, 2.0 * k as f64, &cfg, 14).unwrap();
        let mapped: Vec<usize> = at_p.assignment.iter().map(|nu| k * (nu - 1) + 1).collect();
        assert_eq!(mapped, at_kp.assignment, "k = {k}");
    }
}

#[test]
fn minf_orders_are_upward_closed() {
    let cfg = MinfConfig { horizon: Some(40), ..MinfConfig::default() };
    let ops = [
        rot3(NormKind::l1()),
        rot3(NormKind::l2()),
        rot3(NormKind::Inf),
        involution(NormKind::Inf),
        rotation(0.9, NormKind::l2()),
    ];
    for op in &ops {
        let holds: Vec<bool> = (1..=8).map(|m| check_minf_isometry(op, m, &cfg).unwrap().holds()).collect();
        for w in holds.windows(2) {
            assert!(!w[0] || w[1], "{holds:?}");
        }
    }
}

#[test]
fn order_one_is_isometry() {
    let cfg = MinfConfig::default();
    let iso = rotation(0.4, NormKind::l2());
    assert!(check_minf_isometry(&iso, 1, &cfg).unwrap().holds());
    assert!(check_mp_isometry(&iso, 1, 2.0, StrategyChoice::Sampled, &cfg.sampling).unwrap().holds());
    for op in [jordan(), rot3(NormKind::l1())] {
        assert!(!check_minf_isometry(&op, 1, &cfg).unwrap().holds());
        assert!(!check_mp_isometry(&op, 1, 1.0, StrategyChoice::Sampled, &cfg.sampling).unwrap().holds());
    }
}

#[test]
fn strict_mp_fixtures_are_never_minf() {
    let cfg = MinfConfig { horizon: Some(60), ..MinfConfig::default() };
    for (name, op) in mp_fixtures() {
        for m in 1..=6 {
            assert!(!check_minf_isometry(&op, m, &cfg).unwrap().holds(), "{name}, m = {m}");
        }
    }
}

#[test]
fn verified_fixtures_have_unit_spectral_radius() {
    let cfg = MinfConfig { horizon: Some(40), ..MinfConfig::default() };
    for op in [rot3(NormKind::l1()), rot3(NormKind::l2()), rot3(NormKind::Inf), rotation(2.0, NormKind::l2())] {
        assert!(check_minf_isometry(&op, 5, &cfg).unwrap().holds());
        assert!((spectral_radius(&op).unwrap() - 1.0).abs() <= 1e-9);
    }
    assert!(matches!(find_minimal_pair(&jordan(), &PairSearch::default()).unwrap(), PairOutcome::Lattice { .. }));
    assert!((spectral_radius(&jordan()).unwrap() - 1.0).abs() <= 1e-9);
}
