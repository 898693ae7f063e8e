//! Broadband co-polarized reflectance (coPR) of a patterned unit cell.
//!
//! An x-polarized plane-wave pulse hits the metasurface at normal incidence;
//! the reflected field is separated with a two-run normalization (vacuum
//! reference vs. device) and Fourier-transformed at the sample frequencies.
//! coPR(f) = |DFT(reflected)/DFT(incident)|^2.

mod fdtd;

use crate::pattern::Pattern;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use fdtd::{C0, EPS0, ETA0, MU0};

/// Geometry, materials and run controls for the unit-cell simulation.
/// Lengths in meters, frequencies in Hz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    /// Side of one copper patch (one pattern cell).
    pub patch_pitch: f64,
    /// Physical copper thickness; modeled as a zero-thickness PEC sheet.
    pub patch_thickness: f64,
    /// Bare margin around the 16x16 patch area.
    pub pad: f64,
    /// Real part of the substrate relative permittivity.
    pub substrate_eps_re: f64,
    /// Loss tangent; the complex permittivity is eps_re*(1 + i*tan).
    pub substrate_loss_tangent: f64,
    pub substrate_mu_r: f64,
    pub substrate_thickness: f64,
    /// Copper backplate; modeled as a PEC termination.
    pub backplate_thickness: f64,
    pub lateral_step: f64,
    pub vertical_step: f64,
    /// Air region above the patches (includes the absorber).
    pub air_height: f64,
    pub absorber_cells: usize,
    /// Fraction of the 3-D Courant limit.
    pub courant_factor: f64,
    pub band_lo: f64,
    pub band_hi: f64,
    pub n_freq: usize,
    pub max_steps: usize,
    /// Stop once field energy drops this far below its peak.
    pub decay_db: f64,
    /// Height of the source plane above the patches.
    pub source_gap: f64,
    /// Height of the observation plane above the patches.
    pub obs_gap: f64,
    pub source_amplitude: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            patch_pitch: 0.5e-3,
            patch_thickness: 0.018e-3,
            pad: 1.0e-3,
            substrate_eps_re: 2.65,
            substrate_loss_tangent: 0.003,
            substrate_mu_r: 1.0,
            substrate_thickness: 3.0e-3,
            backplate_thickness: 0.18e-3,
            lateral_step: 0.25e-3,
            vertical_step: 0.25e-3,
            air_height: 10.0e-3,
            absorber_cells: 10,
            courant_factor: 0.99,
            band_lo: 2.0e9,
            band_hi: 12.0e9,
            n_freq: 32,
            max_steps: 60_000,
            decay_db: -60.0,
            source_gap: 5.0e-3,
            obs_gap: 2.0e-3,
            source_amplitude: 1.0,
        }
    }
}

impl SolverConfig {
    /// Band preset used for the PLG corpus (resonances live above 9.5 GHz).
    pub fn plg_band(mut self) -> Self {
        self.band_lo = 9.5e9;
        self.band_hi = 12.0e9;
        self
    }

    /// Half-resolution preset for bulk dataset generation. Spectra are
    /// self-consistent but not grid-converged; the default grid is the
    /// reference.
    pub fn coarse() -> Self {
        SolverConfig {
            lateral_step: 0.5e-3,
            vertical_step: 0.5e-3,
            absorber_cells: 8,
            obs_gap: 2.5e-3,
            ..SolverConfig::default()
        }
    }

    /// Lossless variant (for energy-conservation checks).
    pub fn lossless(mut self) -> Self {
        self.substrate_loss_tangent = 0.0;
        self
    }

    /// Full lateral period: 16 patches plus padding on both sides.
    pub fn cell_size(&self) -> f64 {
        16.0 * self.patch_pitch + 2.0 * self.pad
    }

    /// Complex relative permittivity (passive convention).
    pub fn substrate_eps_complex(&self) -> Complex64 {
        Complex64::new(
            self.substrate_eps_re,
            -self.substrate_eps_re * self.substrate_loss_tangent,
        )
    }

    /// Substrate conductivity reproducing the loss tangent at mid-band.
    /// A constant loss tangent cannot be represented exactly by a constant
    /// conductivity; the mismatch over 2-12 GHz stays well under the solver
    /// tolerance for tan(delta) ~ 3e-3.
    pub fn loss_conductivity(&self) -> f64 {
        let f_ref = 0.5 * (self.band_lo + self.band_hi);
        let eps_im = self.substrate_eps_re * self.substrate_loss_tangent;
        std::f64::consts::TAU * f_ref * EPS0 * eps_im
    }

    /// The uniformly spaced sample frequencies (inclusive endpoints).
    pub fn freqs(&self) -> Vec<f64> {
        if self.n_freq == 1 {
            return vec![self.band_lo];
        }
        let step = (self.band_hi - self.band_lo) / (self.n_freq - 1) as f64;
        (0..self.n_freq)
            .map(|i| self.band_lo + step * i as f64)
            .collect()
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |msg: String| Err(SolverError::InvalidConfig(msg));
        let divides = |part: f64, step: f64| {
            let q = part / step;
            (q - q.round()).abs() < 1e-9 * q.round().max(1.0)
        };
        if !divides(self.patch_pitch, self.lateral_step) || !divides(self.pad, self.lateral_step) {
            return bad(format!(
                "lateral_step {} must divide patch_pitch {} and pad {}",
                self.lateral_step, self.patch_pitch, self.pad
            ));
        }
        if !divides(self.substrate_thickness, self.vertical_step)
            || !divides(self.air_height, self.vertical_step)
        {
            return bad(format!(
                "vertical_step {} must divide substrate_thickness {} and air_height {}",
                self.vertical_step, self.substrate_thickness, self.air_height
            ));
        }
        if self.n_freq < 1 {
            return bad("n_freq must be >= 1".into());
        }
        if self.band_lo >= self.band_hi {
            return bad(format!(
                "band_lo {} must be below band_hi {}",
                self.band_lo, self.band_hi
            ));
        }
        if C0 / self.band_hi <= self.cell_size() {
            return bad(format!(
                "band_hi {} admits higher diffraction orders (vacuum wavelength {:.4} m <= period {:.4} m)",
                self.band_hi,
                C0 / self.band_hi,
                self.cell_size()
            ));
        }
        let dz = self.vertical_step;
        let n_air = (self.air_height / dz).round() as usize;
        let n_src = (self.source_gap / dz).round() as usize;
        let n_obs = (self.obs_gap / dz).round() as usize;
        if n_obs >= n_src {
            return bad("obs_gap must lie below source_gap".into());
        }
        if n_src + 2 > n_air - self.absorber_cells {
            return bad("source plane must sit at least 2 cells below the absorber".into());
        }
        // The vacuum reference replaces the substrate with a bottom absorber;
        // the observation plane must clear it.
        let n_sub = (self.substrate_thickness / dz).round() as usize;
        if n_sub + n_obs <= self.absorber_cells + 1 {
            return bad("obs plane too close to the bottom absorber of the reference run".into());
        }
        if !(self.courant_factor > 0.0 && self.courant_factor < 1.0) {
            return bad(format!("courant_factor {} not in (0,1)", self.courant_factor));
        }
        Ok(())
    }
}

/// A 32-point reflectance spectrum on a uniform frequency grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub freqs: Vec<f64>,
    pub values: Vec<f64>,
}

/// Numerical overshoot allowed above exact unity reflectance.
pub const SPECTRUM_TOL: f64 = 0.02;

impl Spectrum {
    pub fn new(freqs: Vec<f64>, values: Vec<f64>) -> Self {
        assert_eq!(freqs.len(), values.len());
        Spectrum { freqs, values }
    }

    /// Checks the type invariants: bounded values on a strictly increasing
    /// uniform grid.
    pub fn validate(&self) -> Result<(), SolverError> {
        for &v in &self.values {
            if !(v >= 0.0 && v <= 1.0 + SPECTRUM_TOL) || !v.is_finite() {
                return Err(SolverError::InvalidSpectrum(format!(
                    "reflectance {v} outside [0, {}]",
                    1.0 + SPECTRUM_TOL
                )));
            }
        }
        if self.freqs.len() > 1 {
            let step = self.freqs[1] - self.freqs[0];
            if step <= 0.0 {
                return Err(SolverError::InvalidSpectrum("non-increasing grid".into()));
            }
            for w in self.freqs.windows(2) {
                if ((w[1] - w[0]) - step).abs() > 1e-6 * step {
                    return Err(SolverError::InvalidSpectrum("non-uniform grid".into()));
                }
            }
        }
        Ok(())
    }

    /// CSV form: header `freq_hz,copr`, one row per point, round-trippable
    /// float formatting.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("freq_hz,copr\n");
        for (f, v) in self.freqs.iter().zip(&self.values) {
            s.push_str(&format!("{f},{v}\n"));
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self, SolverError> {
        let mut lines = text.lines();
        match lines.next() {
            Some("freq_hz,copr") => {}
            other => {
                return Err(SolverError::InvalidSpectrum(format!(
                    "bad CSV header {other:?}"
                )))
            }
        }
        let (mut freqs, mut values) = (Vec::new(), Vec::new());
        for (i, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let (f, v) = line.split_once(',').ok_or_else(|| {
                SolverError::InvalidSpectrum(format!("row {i}: missing comma"))
            })?;
            freqs.push(f.trim().parse::<f64>().map_err(|e| {
                SolverError::InvalidSpectrum(format!("row {i}: {e}"))
            })?);
            values.push(v.trim().parse::<f64>().map_err(|e| {
                SolverError::InvalidSpectrum(format!("row {i}: {e}"))
            })?);
        }
        Ok(Spectrum { freqs, values })
    }
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid solver config: {0}")]
    InvalidConfig(String),
    #[error("fields failed to decay to {target_db} dB within {steps} steps (residual {residual_db:.1} dB)")]
    NonConvergence {
        target_db: f64,
        steps: usize,
        residual_db: f64,
    },
    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),
}

/// Reusable solver handle: validates the config and caches the vacuum
/// reference run so many patterns can be simulated against it.
pub struct UnitCellSolver {
    cfg: SolverConfig,
    freqs: Vec<f64>,
    /// Incident-field DFT at each sample frequency.
    incident: Vec<Complex64>,
    dt: f64,
}

impl UnitCellSolver {
    pub fn new(cfg: SolverConfig) -> Result<Self, SolverError> {
        cfg.validate()?;
        let spec_dt = fdtd::GridSpec::new(&cfg).dt;
        let reference = fdtd::run_reference(&cfg)?;
        let freqs = cfg.freqs();
        let incident = freqs
            .iter()
            .map(|&f| {
                let (re, im) = fdtd::dft_at(&reference, spec_dt, f);
                Complex64::new(re, im)
            })
            .collect();
        Ok(UnitCellSolver {
            cfg,
            freqs,
            incident,
            dt: spec_dt,
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    /// Simulates one pattern and extracts its coPR spectrum.
    pub fn copr(&self, pattern: &Pattern) -> Result<Spectrum, SolverError> {
        let total = fdtd::run_device(&self.cfg, pattern)?;
        let values = self
            .freqs
            .iter()
            .zip(&self.incident)
            .map(|(&f, &inc)| {
                let (re, im) = fdtd::dft_at(&total, self.dt, f);
                let refl = Complex64::new(re, im) - inc;
                (refl / inc).norm_sqr()
            })
            .collect();
        Ok(Spectrum {
            freqs: self.freqs.clone(),
            values,
        })
    }
}

/// One-shot convenience wrapper around [`UnitCellSolver`].
pub fn simulate_copr(pattern: &Pattern, cfg: &SolverConfig) -> Result<Spectrum, SolverError> {
    UnitCellSolver::new(cfg.clone())?.copr(pattern)
}

/// Closed-form coPR of the bare grounded slab (empty pattern): transmission
/// line with input impedance Z_in = j*Z_d*tan(beta*d) terminated by PEC.
pub fn analytic_slab_copr(freq: f64, cfg: &SolverConfig) -> f64 {
    assert!(freq > 0.0, "frequency must be positive");
    let eps = cfg.substrate_eps_complex();
    let sqrt_eps = eps.sqrt();
    let beta = std::f64::consts::TAU * freq * sqrt_eps / C0;
    let z_d = Complex64::new(ETA0, 0.0) / sqrt_eps;
    let z_in = Complex64::i() * z_d * (beta * cfg.substrate_thickness).tan();
    let gamma = (z_in - ETA0) / (z_in + ETA0);
    gamma.norm_sqr()
}

/// Grid-refinement study: reruns the simulation at several step sizes and
/// reports the per-frequency maximum pairwise deviation.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub steps: Vec<f64>,
    pub spectra: Vec<Spectrum>,
    pub max_deviation: Vec<f64>,
}

pub fn convergence_report(
    pattern: &Pattern,
    cfg: &SolverConfig,
    refinements: &[f64],
) -> Result<ConvergenceReport, SolverError> {
    let mut spectra = Vec::with_capacity(refinements.len());
    for &step in refinements {
        let mut c = cfg.clone();
        c.lateral_step = step;
        c.vertical_step = step;
        spectra.push(simulate_copr(pattern, &c)?);
    }
    let n_freq = cfg.n_freq;
    let mut max_deviation = vec![0.0f64; n_freq];
    for a in 0..spectra.len() {
        for b in a + 1..spectra.len() {
            for (i, dev) in max_deviation.iter_mut().enumerate() {
                *dev = dev.max((spectra[a].values[i] - spectra[b].values[i]).abs());
            }
        }
    }
    Ok(ConvergenceReport {
        steps: refinements.to_vec(),
        spectra,
        max_deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn analytic_lossless_is_unity() {
        let cfg = SolverConfig::default().lossless();
        for f in [2.0e9, 5.5e9, 9.0e9, 12.0e9] {
            assert_abs_diff_eq!(analytic_slab_copr(f, &cfg), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn analytic_zero_thickness_is_bare_pec() {
        let mut cfg = SolverConfig::default();
        cfg.substrate_thickness = 0.0;
        assert_abs_diff_eq!(analytic_slab_copr(10.0e9, &cfg), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn analytic_default_at_10ghz() {
        let cfg = SolverConfig::default();
        let v = analytic_slab_copr(10.0e9, &cfg);
        assert!(v > 0.97 && v < 1.0, "got {v}");
    }

    #[test]
    fn analytic_is_passive_across_band() {
        let cfg = SolverConfig::default();
        for &f in &cfg.freqs() {
            let v = analytic_slab_copr(f, &cfg);
            assert!(v > 0.0 && v <= 1.0, "f={f} v={v}");
        }
    }

    #[test]
    fn config_validation_catches_bad_grid() {
        let mut cfg = SolverConfig::default();
        cfg.lateral_step = 0.3e-3;
        assert!(matches!(
            cfg.validate(),
            Err(SolverError::InvalidConfig(_))
        ));

        let mut cfg = SolverConfig::default();
        cfg.band_hi = 40.0e9;
        assert!(cfg.validate().is_err(), "grating-lobe band must be rejected");

        assert!(SolverConfig::default().validate().is_ok());
        assert!(SolverConfig::coarse().validate().is_ok());
        assert!(SolverConfig::default().plg_band().validate().is_ok());
    }

    #[test]
    fn freq_grid_inclusive_endpoints() {
        let cfg = SolverConfig::default();
        let f = cfg.freqs();
        assert_eq!(f.len(), 32);
        assert_abs_diff_eq!(f[0], 2.0e9);
        assert_abs_diff_eq!(f[31], 12.0e9);
    }

    #[test]
    fn spectrum_csv_round_trip() {
        let cfg = SolverConfig::default();
        let s = Spectrum::new(
            cfg.freqs(),
            cfg.freqs().iter().map(|f| (f / 13.0e9).sin().abs()).collect(),
        );
        let t = Spectrum::from_csv(&s.to_csv()).unwrap();
        assert_eq!(s, t);
    }

    #[test]
    fn spectrum_validation() {
        let s = Spectrum::new(vec![1.0, 2.0, 3.0], vec![0.5, 1.01, 0.2]);
        assert!(s.validate().is_ok());
        let s = Spectrum::new(vec![1.0, 2.0], vec![0.5, 1.2]);
        assert!(s.validate().is_err());
        let s = Spectrum::new(vec![1.0, 2.0, 2.5], vec![0.5, 0.5, 0.5]);
        assert!(s.validate().is_err());
    }
}
