//! Physics-level checks of the FDTD solver against independent oracles.
//! These use the half-resolution preset where the grid is not pinned; the
//! acceptance suite repeats the slab oracle on the default grid.

use metasurf_core::pattern::{gen_rdn, mirror_x, mirror_y, rot180, ClassTag, Pattern};
use metasurf_core::solver::{analytic_slab_copr, SolverConfig, UnitCellSolver};

#[test]
fn empty_pattern_matches_analytic_slab_coarse() {
    let cfg = SolverConfig::coarse();
    let solver = UnitCellSolver::new(cfg.clone()).unwrap();
    let spec = solver.copr(&Pattern::zeros(ClassTag::Other)).unwrap();
    let mut worst = 0.0f64;
    for (f, v) in spec.freqs.iter().zip(&spec.values) {
        let oracle = analytic_slab_copr(*f, &cfg);
        let dev = (v - oracle).abs();
        worst = worst.max(dev);
        println!("f={:6.2} GHz  fdtd={v:.5}  slab={oracle:.5}  dev={dev:.5}", f / 1e9);
    }
    println!("worst deviation: {worst:.5}");
    assert!(worst < 0.02, "worst deviation {worst}");
}

#[test]
fn all_ones_lossless_reflects_fully() {
    let cfg = SolverConfig::coarse().lossless();
    let solver = UnitCellSolver::new(cfg).unwrap();
    let spec = solver.copr(&Pattern::ones(ClassTag::Other)).unwrap();
    for (f, v) in spec.freqs.iter().zip(&spec.values) {
        assert!((v - 1.0).abs() < 0.01, "f={f} coPR={v}");
    }
}

#[test]
fn lossless_patterns_conserve_energy() {
    let cfg = SolverConfig::coarse().lossless();
    let solver = UnitCellSolver::new(cfg).unwrap();
    for seed in 0..3u64 {
        let p = gen_rdn(seed, 0.5);
        let spec = solver.copr(&p).unwrap();
        for (f, v) in spec.freqs.iter().zip(&spec.values) {
            assert!((v - 1.0).abs() <= 0.02, "seed={seed} f={f} coPR={v}");
        }
    }
}

#[test]
fn mirror_symmetry_of_copr() {
    let cfg = SolverConfig::coarse();
    let solver = UnitCellSolver::new(cfg).unwrap();
    let p = gen_rdn(11, 0.5);
    let base = solver.copr(&p).unwrap();
    for (name, q) in [
        ("mirror_x", mirror_x(&p)),
        ("mirror_y", mirror_y(&p)),
        ("rot180", rot180(&p)),
    ] {
        let s = solver.copr(&q).unwrap();
        for i in 0..base.values.len() {
            let dev = (s.values[i] - base.values[i]).abs();
            assert!(dev < 1e-3, "{name} bin {i}: dev {dev}");
        }
    }
}

#[test]
fn source_amplitude_linearity() {
    let p = gen_rdn(3, 0.5);
    let cfg = SolverConfig::coarse();
    let a = UnitCellSolver::new(cfg.clone()).unwrap().copr(&p).unwrap();
    let mut scaled = cfg;
    scaled.source_amplitude = 10.0;
    let b = UnitCellSolver::new(scaled).unwrap().copr(&p).unwrap();
    for i in 0..a.values.len() {
        let rel = (a.values[i] - b.values[i]).abs() / a.values[i].max(1e-30);
        assert!(rel < 1e-9, "bin {i}: rel {rel}");
    }
}

#[test]
fn solver_is_deterministic() {
    let p = gen_rdn(5, 0.5);
    let cfg = SolverConfig::coarse();
    let a = UnitCellSolver::new(cfg.clone()).unwrap().copr(&p).unwrap();
    let b = UnitCellSolver::new(cfg).unwrap().copr(&p).unwrap();
    assert_eq!(a, b, "identical inputs must give bit-identical spectra");
}
