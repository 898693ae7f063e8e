//! Scratch diagnostics for solver accuracy experiments.

use metasurf_core::pattern::{gen_rdn, ClassTag, Pattern};
use metasurf_core::solver::{SolverConfig, UnitCellSolver};

fn worst_dev(cfg: &SolverConfig, p: &Pattern) -> f64 {
    let solver = UnitCellSolver::new(cfg.clone()).unwrap();
    let spec = solver.copr(p).unwrap();
    spec.values
        .iter()
        .map(|v| (v - 1.0).abs())
        .fold(0.0, f64::max)
}

fn main() {
    let p = gen_rdn(0, 0.5);
    let base = SolverConfig::coarse().lossless();

    let mut c1 = base.clone();
    c1.decay_db = -90.0;
    let mut c2 = base.clone();
    c2.absorber_cells = 16;
    c2.obs_gap = 2.5e-3;
    c2.air_height = 14.0e-3;
    let mut c3 = c2.clone();
    c3.decay_db = -90.0;
    let mut c4 = base.clone();
    c4.decay_db = -100.0;
    c4.max_steps = 200_000;

    println!("baseline (-60dB, 8 cells):   {:.5}", worst_dev(&base, &p));
    println!("-90 dB, 8 cells:             {:.5}", worst_dev(&c1, &p));
    println!("-60 dB, 16 cells:            {:.5}", worst_dev(&c2, &p));
    println!("-90 dB, 16 cells:            {:.5}", worst_dev(&c3, &p));
    println!("-100 dB, 8 cells:            {:.5}", worst_dev(&c4, &p));

    let all = Pattern::ones(ClassTag::Other);
    println!("all-ones lossy coarse dip:");
    let lossy = SolverConfig::coarse();
    let s = UnitCellSolver::new(lossy).unwrap().copr(&all).unwrap();
    let min = s.values.iter().cloned().fold(f64::INFINITY, f64::min);
    println!("  min coPR over band = {min:.4}");
}
