mod support;

use kahler_core::catalog::PotentialSpec;
use kahler_core::delta::build_test_family;
use kahler_core::geometry::metric_from_potential;
use kahler_core::laplace::{power_at_origin, Operator};
use kahler_core::Jet;
use support::radial_oracle::{
    hyperbolic_profile, inverse_metric, monomial_power, q, radial_power, spherical_profile,
};

#[test]
fn oracle_disc_inverse_metric() {
    // (1 - t)^2
    let ginv = inverse_metric(&hyperbolic_profile(6), 4);
    assert_eq!(ginv, vec![q(1, 1), q(-2, 1), q(1, 1), q(0, 1), q(0, 1)]);
    let ginv = inverse_metric(&spherical_profile(6), 4);
    assert_eq!(ginv, vec![q(1, 1), q(2, 1), q(1, 1), q(0, 1), q(0, 1)]);
}

#[test]
fn oracle_reference_values() {
    let hyp = hyperbolic_profile(12);
    assert_eq!(radial_power(&hyp, 2, 3), q(-40, 1));
    assert_eq!(radial_power(&hyp, 1, 3), q(8, 1));
    assert_eq!(radial_power(&hyp, 3, 3), q(36, 1));
    assert_eq!(radial_power(&hyp, 2, 2), q(4, 1));
    assert_eq!(radial_power(&hyp, 1, 2), q(-2, 1));
    assert_eq!(radial_power(&spherical_profile(12), 2, 3), q(40, 1));
    // both oracle routes agree on radial monomials
    for m in 1..=4 {
        for k in 1..=4 {
            assert_eq!(radial_power(&hyp, m, k), monomial_power(&hyp, m as u32, m as u32, k));
        }
    }
}

#[test]
fn engine_agrees_with_oracle_on_one_variable_metrics() {
    for (s, profile) in [("hyp:1", hyperbolic_profile(14)), ("fs:1", spherical_profile(14))] {
        let spec: PotentialSpec = s.parse().unwrap();
        let m = metric_from_potential(&spec.potential(10).unwrap()).unwrap();
        for k in 1..=4 {
            for row in build_test_family(1, k).rows {
                let index = &row.function.terms[0].0;
                let phi = Jet::monomial(1, 10, index.clone(), q(1, 1)).unwrap();
                let engine = power_at_origin(Operator::Kahler(&m), &phi, k).unwrap();
                let oracle = monomial_power(&profile, index.hol()[0], index.anti()[0], k as usize);
                assert_eq!(engine, oracle, "{s} k={k} {index:?}");
            }
        }
    }
}
