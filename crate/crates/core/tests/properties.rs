mod common;

use proptest::prelude::*;
use upea_core::counting::{correct_mle, correct_single, m_from_phi, phi_from_m, CountingInstance};
use upea_core::statevector::{grover_pea_pmf, pea_circuit_pmf, StateVector};
use upea_core::{pea_pmf, wrap_phase, PeaParams, ThetaMode};

fn check(r: common::Check) -> Result<(), TestCaseError> {
    r.map_err(TestCaseError::fail)
}

proptest! {
    #[test]
    fn pmf_is_normalized(t in 1u32..=12, phi in -2.0f64..2.0) {
        check(common::pmf_normalization(t, phi))?;
    }

    #[test]
    fn pea_bias_is_odd(t in 1u32..=8, phi in 0.0f64..1.0) {
        check(common::bias_oddness(t, phi))?;
    }

    #[test]
    fn circ_dist_wraps(a in 0.0f64..1.0, b in 0.0f64..1.0, k in -6i32..=6) {
        check(common::circ_dist_wraparound(a, b, k))?;
    }

    #[test]
    fn wrap_is_idempotent(x in -1e6f64..1e6) {
        let w = wrap_phase(x).unwrap().value();
        prop_assert!((0.0..1.0).contains(&w));
        prop_assert_eq!(wrap_phase(w).unwrap().value(), w);
    }

    #[test]
    fn mle_is_shift_equivariant(seed in any::<u64>(), r in 2usize..=8, phi in 0.0f64..1.0, c in -1.0f64..1.0) {
        check(common::mle_shift_equivariance(seed, r, phi, c))?;
    }

    #[test]
    fn count_phase_round_trip(m in 0.0f64..=1.0) {
        let phi = phi_from_m(m).unwrap().value();
        prop_assert!((0.0..=0.5).contains(&phi));
        prop_assert!((m_from_phi(phi) - m).abs() < 1e-12);
    }

    #[test]
    fn corrections_are_affine(m in 0.0f64..=1.0, t in 1u32..=10, b in 0.0f64..0.4) {
        let size = 1u64 << t;
        let forward = m + (1.0 - 2.0 * m) / (2.0 * size as f64);
        prop_assert!((correct_single(forward, size) - m).abs() < 1e-12);
        let biased = m + b * (1.0 - 2.0 * m);
        prop_assert!((correct_mle(biased, b).unwrap() - m).abs() < 1e-12);
    }

    #[test]
    fn gates_preserve_norm(ops in proptest::collection::vec((0usize..4, 0usize..5, 1usize..5, -7.0f64..7.0), 1..60)) {
        let mut s = StateVector::new(5).unwrap();
        for (kind, q, d, angle) in ops {
            let other = (q + d) % 5;
            match kind {
                0 => s.apply_h(q).unwrap(),
                1 => s.apply_rz(q, angle).unwrap(),
                2 => s.apply_controlled_phase(q, other, angle).unwrap(),
                _ => s.apply_swap(q, other).unwrap(),
            }
            prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn pea_circuit_matches_analytic(t in 1u32..=6, phi in 0.0f64..1.0, theta in 0.0f64..1.0) {
        let p = PeaParams::new(t, 1, ThetaMode::PLAIN).unwrap();
        let dev = pea_circuit_pmf(t, phi, theta).unwrap().max_deviation(&pea_pmf(&p, phi + theta).probs);
        prop_assert!(dev < 1e-10, "deviation {dev:e}");
    }

    #[test]
    fn grover_circuit_is_sign_mixture(t in 1u32..=5, n in 1u32..=4, pick in 0.0f64..1.0, theta in 0.0f64..1.0) {
        let count = (pick * ((1u64 << n) + 1) as f64) as u64;
        let inst = CountingInstance::with_count(n, count.min(1 << n)).unwrap();
        let phi = phi_from_m(inst.fraction()).unwrap().value();
        let p = PeaParams::new(t, 1, ThetaMode::PLAIN).unwrap();
        let plus = pea_pmf(&p, phi + theta).probs;
        let minus = pea_pmf(&p, theta - phi).probs;
        let mix: Vec<f64> = plus.iter().zip(&minus).map(|(a, b)| 0.5 * (a + b)).collect();
        let dev = grover_pea_pmf(t, &inst, theta).unwrap().max_deviation(&mix);
        prop_assert!(dev < 1e-10, "deviation {dev:e}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn mle_matches_brute_force(seed in any::<u64>(), r in 1usize..=5, phi in 0.0f64..1.0) {
        check(common::mle_brute_force(seed, r, phi))?;
    }
}

#[test]
fn sweeps_do_not_depend_on_thread_count() {
    for c in common::determinism_configs() {
        common::parallel_determinism(&c).unwrap();
    }
}
