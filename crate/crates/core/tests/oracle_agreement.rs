use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use robinwave::fdoracle::solve_level;
use robinwave::*;

const SCAN: usize = 400;
const TOL: f64 = 1e-13;

fn coarse(cfg: &WellConfig) -> OracleSettings {
    OracleSettings {
        l: 4.0 * cfg.a.max(cfg.d),
        refinements: 2,
        h0: cfg.d / 32.0,
        closure: Closure::Dirichlet,
    }
}

#[test]
fn random_wells_agree_with_mode_matching() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..5 {
        let alpha0 = rng.gen_range(10.0..100.0);
        let alpha1 = alpha0 * rng.gen_range(0.05..0.5);
        let a = rng.gen_range(0.2..1.0);
        let cfg = WellConfig::new(alpha0, alpha1, a, 1.0).unwrap();
        let tol = 5e-3 * cfg.energy_unit();
        let threshold = cfg.threshold().unwrap();
        let mm = ModeMatcher::new(&cfg, 32).unwrap().all_bound_states(SCAN, TOL).unwrap();
        let fd = oracle_bound_states(&cfg, &coarse(&cfg)).unwrap();
        let fd_values: Vec<f64> = fd.candidates.iter().map(|s| s.lambda).collect();
        // States deeper than the tolerance must be matched one to one.
        for s in mm.iter().filter(|s| threshold - s.lambda > tol) {
            assert!(
                fd_values.iter().any(|v| (v - s.lambda).abs() <= tol),
                "{cfg:?}: {} not in {fd_values:?}",
                s.lambda
            );
        }
        for s in fd.bound_states().filter(|s| threshold - s.lambda > tol) {
            assert!(
                mm.iter()
                    .any(|m| (m.lambda - s.lambda).abs() <= tol && m.parity == s.parity),
                "{cfg:?}: oracle {} unmatched",
                s.lambda
            );
        }
    }
}

#[test]
fn neumann_closure_bounds_dirichlet_from_below() {
    let cfg = WellConfig::new(1e5, 1e-5, 0.8, 1.0).unwrap();
    let spacing = 1.0 / 32.0;
    let levels: Vec<_> = [Closure::Neumann, Closure::Dirichlet]
        .iter()
        .map(|&c| solve_level(&cfg, &FdGrid::with_spacing(4.0, 1.0, spacing, c).unwrap()).unwrap())
        .collect();
    assert_eq!(levels[0].eigenvalues.len(), 2);
    assert!(levels[0].eigenvalues.len() >= levels[1].eigenvalues.len());
    for (n, d) in levels[0].eigenvalues.iter().zip(&levels[1].eigenvalues) {
        assert!(n <= d);
    }
}

#[test]
fn doubling_the_strip_stays_within_the_margin() {
    let cfg = WellConfig::new(20.0, 5.0, 0.3, 1.0).unwrap();
    let short = oracle_bound_states(&cfg, &coarse(&cfg)).unwrap();
    let mut settings = coarse(&cfg);
    settings.l *= 2.0;
    let long = oracle_bound_states(&cfg, &settings).unwrap();
    let (s, l) = (&short.candidates[0], &long.candidates[0]);
    assert_eq!(short.energies().len(), 1);
    assert_eq!(long.energies().len(), 1);
    // A Dirichlet closure pushes the energy up; the longer strip is lower.
    assert!(l.lambda < s.lambda);
    assert!(s.lambda - l.lambda <= s.margin);
    assert!(l.margin < s.margin);
}

#[test]
fn uniform_coupling_has_no_oracle_states() {
    let cfg = WellConfig::new(20.0, 20.0, 0.3, 1.0).unwrap();
    let res = oracle_bound_states(&cfg, &coarse(&cfg)).unwrap();
    assert_eq!(res.energies().len(), 0);
}
