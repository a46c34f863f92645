use proptest::prelude::*;
use robinwave::modematch::ModeExpansion;
use robinwave::*;

const SCAN: usize = 400;
const TOL: f64 = 1e-13;

fn baseline() -> WellConfig {
    WellConfig::new(20.0, 5.0, 0.3, 1.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn matching_matrix_is_checkerboard(
        alpha0 in 5.0f64..200.0,
        ratio in 0.01f64..0.9,
        a in 0.1f64..2.0,
        t in 0.0f64..1.0,
        symmetric in any::<bool>(),
    ) {
        let cfg = WellConfig::new(alpha0, alpha0 * ratio, a, 1.0).unwrap();
        let (lo, hi) = (cfg.floor().unwrap(), cfg.threshold().unwrap());
        let lambda = lo + t * (hi - lo);
        let parity = if symmetric { ParitySector::Symmetric } else { ParitySector::Antisymmetric };
        // A pole of the stiffness is not a valid evaluation point.
        if let Ok(sys) = matching_matrix(&cfg, parity, lambda, 12) {
            let c = sys.matrix();
            for m in 0..12 {
                for n in 0..12 {
                    if (m + n) % 2 == 1 {
                        prop_assert_eq!(c[(m, n)], 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn states_lie_in_window_and_minimax_brackets(
        alpha0 in 10.0f64..100.0,
        ratio in 0.05f64..0.8,
        a in 0.2f64..1.5,
    ) {
        let cfg = WellConfig::new(alpha0, alpha0 * ratio, a, 1.0).unwrap();
        let states = ModeMatcher::new(&cfg, 16).unwrap().all_bound_states(SCAN, TOL).unwrap();
        // A bound state always exists for a genuine well.
        prop_assert!(!states.is_empty());
        for (k, s) in states.iter().enumerate() {
            prop_assert!(s.lambda > cfg.floor().unwrap() && s.lambda < cfg.threshold().unwrap());
            let b = minimax_brackets(&cfg, k + 1).unwrap();
            prop_assert!(s.lambda >= b.lower, "state {} at {} below {}", k + 1, s.lambda, b.lower);
            if !b.is_empty() {
                prop_assert!(s.lambda <= b.upper);
            }
            prop_assert!(s.sigma_min <= 1e-8 * s.matrix_norm);
        }
        // Sectors alternate, starting with the symmetric ground state.
        for (k, s) in states.iter().enumerate() {
            let want = if k % 2 == 0 { ParitySector::Symmetric } else { ParitySector::Antisymmetric };
            prop_assert_eq!(s.parity, want);
        }
    }
}

#[test]
fn baseline_ground_state_is_unique_and_symmetric() {
    let states = ModeMatcher::new(&baseline(), 32)
        .unwrap()
        .all_bound_states(SCAN, TOL)
        .unwrap();
    assert_eq!(states.len(), 1);
    assert_eq!(states[0].parity, ParitySector::Symmetric);
    assert!((states[0].lambda - 7.6796).abs() < 1e-3);
    assert!(states[0].truncation_error.unwrap() < 1e-2);
}

#[test]
fn interface_mismatch_shrinks_with_order() {
    let cfg = baseline();
    let mut last = f64::INFINITY;
    for n in [8, 16, 32] {
        let s = &ModeMatcher::new(&cfg, n).unwrap().all_bound_states(SCAN, TOL).unwrap()[0];
        let (c0, c1) = matching_residual(&cfg, s, 512).unwrap();
        assert!(c0.is_finite() && c1.is_finite());
        assert!(c0 < last, "N={n}: {c0} vs {last}");
        last = c0;
    }
    assert!(last < 1e-2);
}

#[test]
fn wavefunction_symmetry_decay_and_continuity() {
    let cfg = WellConfig::new(1e5, 1e-5, 2.0, 1.0).unwrap();
    let states = ModeMatcher::new(&cfg, 24).unwrap().all_bound_states(SCAN, TOL).unwrap();
    assert_eq!(states.len(), 4);
    let xs: Vec<f64> = (0..=400).map(|i| -8.0 + 16.0 * i as f64 / 400.0).collect();
    let ys: Vec<f64> = (0..=20).map(|j| j as f64 / 20.0).collect();
    for s in &states {
        let w = wavefunction(&cfg, s, &xs, &ys).unwrap();
        assert!((w.l2_norm() - 1.0).abs() < 1e-12);
        let sign = s.parity.sign();
        let peak = w.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..w.nx() {
            for j in 0..w.ny() {
                let mirrored = w.at(w.nx() - 1 - i, j);
                assert!((w.at(i, j) - sign * mirrored).abs() <= 1e-10 * peak);
            }
        }
        let edge = (0..w.ny()).map(|j| w.at(0, j).abs()).fold(0.0, f64::max);
        assert!(edge < 1e-3 * peak, "edge {edge} vs peak {peak}");

        // Values on both sides of the interface agree to the truncation level.
        let e = ModeExpansion::new(&cfg, s).unwrap();
        for y in [0.2, 0.5, 0.8] {
            let jump = (e.inner_value_at_interface(y) - e.outer_value_at_interface(y)).abs();
            assert!(jump < 0.1 * peak, "jump {jump} at y={y}");
        }
    }
}

#[test]
fn binding_weakens_towards_uniform_coupling() {
    let mut last = f64::INFINITY;
    for a1 in [5.0, 10.0, 15.0, 19.0, 19.9] {
        let cfg = WellConfig::new(20.0, a1, 0.3, 1.0).unwrap();
        let states = ModeMatcher::new(&cfg, 32).unwrap().all_bound_states(SCAN, TOL).unwrap();
        assert_eq!(states.len(), 1, "α1 = {a1}");
        let binding = cfg.threshold().unwrap() - states[0].lambda;
        assert!(binding > 0.0 && binding < last, "α1 = {a1}: {binding}");
        last = binding;
    }
    let flat = WellConfig::new(20.0, 20.0, 0.3, 1.0).unwrap();
    assert!(bound_state_energies(&flat, ParitySector::Symmetric, 32, SCAN, TOL)
        .unwrap()
        .is_empty());
}

#[test]
fn energies_are_nonincreasing_in_width() {
    let mut prev: Vec<f64> = Vec::new();
    for k in 1..=8 {
        let cfg = WellConfig::new(20.0, 5.0, 0.25 * k as f64, 1.0).unwrap();
        let e: Vec<f64> = ModeMatcher::new(&cfg, 16)
            .unwrap()
            .all_bound_states(SCAN, TOL)
            .unwrap()
            .iter()
            .map(|s| s.lambda)
            .collect();
        assert!(e.len() >= prev.len());
        for (p, q) in prev.iter().zip(&e) {
            assert!(q <= p);
        }
        prev = e;
    }
}
