//! Yee-grid FDTD engine for one periodic unit cell.
//!
//! Laterally periodic (x, y), PEC backplate at the bottom, CPML absorber at
//! the top (and at the bottom for the vacuum reference run). The substrate is
//! a layered medium, so update coefficients depend on the z-index only; the
//! copper patches enter as a zero-thickness PEC mask on one E-plane.
//!
//! Field layout (Yee): Ex(i+1/2,j,k), Ey(i,j+1/2,k), Ez(i,j,k+1/2),
//! Hx(i,j+1/2,k+1/2), Hy(i+1/2,j,k+1/2), Hz(i+1/2,j+1/2,k). Arrays are flat,
//! index `(k*ny + j)*nx + i`, x innermost.

use super::{SolverConfig, SolverError};
use crate::pattern::{Pattern, GRID};

pub const C0: f64 = 299_792_458.0;
pub const EPS0: f64 = 8.854_187_8128e-12;
pub const MU0: f64 = 1.256_637_062_12e-6;
pub const ETA0: f64 = 376.730_313_668;

/// CPML polynomial grading order.
const PML_ORDER: f64 = 3.0;

/// What occupies the lower half of the grid.
enum RunKind {
    /// All vacuum, absorbers on both z-ends. Records the incident pulse.
    VacuumReference,
    /// Substrate + backplate + patch mask, absorber at the top only.
    Device,
}

/// Geometry resolved to grid indices; shared by both runs.
pub(super) struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub dx: f64,
    pub dz: f64,
    pub dt: f64,
    pub n_sub: usize,
    pub n_abs: usize,
    pub k_obs: usize,
    pub k_src: usize,
    /// Pulse width parameter (differentiated Gaussian).
    pub tau: f64,
    pub t0: f64,
}

impl GridSpec {
    pub fn new(cfg: &SolverConfig) -> GridSpec {
        let dx = cfg.lateral_step;
        let dz = cfg.vertical_step;
        let nx = (cfg.cell_size() / dx).round() as usize;
        let n_sub = (cfg.substrate_thickness / dz).round() as usize;
        let n_air = (cfg.air_height / dz).round() as usize;
        let nz = n_sub + n_air;
        let dt = cfg.courant_factor / (C0 * (2.0 / (dx * dx) + 1.0 / (dz * dz)).sqrt());
        let f_peak = 0.5 * (cfg.band_lo + cfg.band_hi);
        let tau = 1.0 / (std::f64::consts::TAU * f_peak);
        GridSpec {
            nx,
            ny: nx,
            nz,
            dx,
            dz,
            dt,
            n_sub,
            n_abs: cfg.absorber_cells,
            k_obs: n_sub + (cfg.obs_gap / dz).round() as usize,
            k_src: n_sub + (cfg.source_gap / dz).round() as usize,
            tau,
            t0: 6.0 * tau,
        }
    }

    fn plane(&self) -> usize {
        self.nx * self.ny
    }

    /// Differentiated-Gaussian source waveform.
    fn pulse(&self, t: f64) -> f64 {
        let u = t - self.t0;
        -(u / self.tau) * (-u * u / (2.0 * self.tau * self.tau)).exp()
    }
}

/// One-sided CPML along z, recursive-convolution form with kappa=1, alpha=0.
struct Cpml {
    /// First z-plane of the absorber region.
    k_start: usize,
    /// Coefficients per plane inside the region, E locations (integer k).
    b_e: Vec<f64>,
    a_e: Vec<f64>,
    /// H locations (k+1/2).
    b_h: Vec<f64>,
    a_h: Vec<f64>,
    /// psi accumulators, one (ny*nx) plane per absorber layer.
    psi_ex: Vec<f64>,
    psi_ey: Vec<f64>,
    psi_hx: Vec<f64>,
    psi_hy: Vec<f64>,
    /// +1 when depth grows with k (top absorber), -1 for the bottom one.
    upward: bool,
}

impl Cpml {
    fn new(spec: &GridSpec, upward: bool) -> Cpml {
        let n = spec.n_abs;
        let sigma_max = 0.8 * (PML_ORDER + 1.0) / (ETA0 * spec.dz);
        let k_start = if upward { spec.nz - n } else { 0 };
        let mut b_e = vec![0.0; n + 1];
        let mut a_e = vec![0.0; n + 1];
        let mut b_h = vec![0.0; n];
        let mut a_h = vec![0.0; n];
        for d in 0..=n {
            // Depth of the integer plane measured from the inner interface.
            let depth = d as f64 / n as f64;
            let sigma = sigma_max * depth.powf(PML_ORDER);
            b_e[d] = (-sigma * spec.dt / EPS0).exp();
            a_e[d] = b_e[d] - 1.0;
        }
        for d in 0..n {
            let depth = (d as f64 + 0.5) / n as f64;
            let sigma = sigma_max * depth.powf(PML_ORDER);
            b_h[d] = (-sigma * spec.dt / EPS0).exp();
            a_h[d] = b_h[d] - 1.0;
        }
        let plane = spec.plane();
        Cpml {
            k_start,
            b_e,
            a_e,
            b_h,
            a_h,
            psi_ex: vec![0.0; (n + 1) * plane],
            psi_ey: vec![0.0; (n + 1) * plane],
            psi_hx: vec![0.0; n * plane],
            psi_hy: vec![0.0; n * plane],
            upward,
        }
    }

    /// Depth index of integer plane k, or None when outside the region.
    #[inline]
    fn depth_e(&self, k: usize, n: usize) -> Option<usize> {
        if self.upward {
            k.checked_sub(self.k_start)
        } else if k <= n {
            Some(n - k)
        } else {
            None
        }
    }

    #[inline]
    fn depth_h(&self, k: usize, n: usize) -> Option<usize> {
        if self.upward {
            // H plane k+1/2 is inside for k >= k_start.
            k.checked_sub(self.k_start)
        } else if k < n {
            Some(n - 1 - k)
        } else {
            None
        }
    }
}

pub(super) struct Fdtd {
    spec: GridSpec,
    kind: RunKind,
    ex: Vec<f64>,
    ey: Vec<f64>,
    ez: Vec<f64>,
    hx: Vec<f64>,
    hy: Vec<f64>,
    hz: Vec<f64>,
    /// E-update coefficients per integer z-plane (Ex, Ey).
    ca_xy: Vec<f64>,
    cb_xy: Vec<f64>,
    /// E-update coefficients per half z-plane (Ez).
    ca_z: Vec<f64>,
    cb_z: Vec<f64>,
    pmls: Vec<Cpml>,
    /// Flat (j*nx+i) indices of PEC patch nodes on the patch plane.
    pec_ex: Vec<usize>,
    pec_ey: Vec<usize>,
    source_amp: f64,
}

impl Fdtd {
    fn new(cfg: &SolverConfig, kind: RunKind, pattern: Option<&Pattern>) -> Fdtd {
        let spec = GridSpec::new(cfg);
        let (nx, nz) = (spec.nx, spec.nz);
        let plane = spec.plane();

        // Layered-medium coefficients. Vacuum by default.
        let mut eps_xy = vec![EPS0; nz + 1];
        let mut sig_xy = vec![0.0; nz + 1];
        let mut eps_z = vec![EPS0; nz];
        let mut sig_z = vec![0.0; nz];
        if matches!(kind, RunKind::Device) {
            let eps_sub = EPS0 * cfg.substrate_eps_re;
            let sigma_sub = cfg.loss_conductivity();
            for k in 0..spec.n_sub {
                eps_z[k] = eps_sub;
                sig_z[k] = sigma_sub;
            }
            for k in 1..spec.n_sub {
                eps_xy[k] = eps_sub;
                sig_xy[k] = sigma_sub;
            }
            // Tangential nodes on the substrate/air interface see the average.
            eps_xy[spec.n_sub] = 0.5 * (eps_sub + EPS0);
            sig_xy[spec.n_sub] = 0.5 * sigma_sub;
        }
        let coeff = |eps: f64, sig: f64| {
            let denom = 1.0 + sig * spec.dt / (2.0 * eps);
            (
                (1.0 - sig * spec.dt / (2.0 * eps)) / denom,
                (spec.dt / eps) / denom,
            )
        };
        let (mut ca_xy, mut cb_xy) = (vec![0.0; nz + 1], vec![0.0; nz + 1]);
        for k in 0..=nz {
            let (ca, cb) = coeff(eps_xy[k], sig_xy[k]);
            ca_xy[k] = ca;
            cb_xy[k] = cb;
        }
        let (mut ca_z, mut cb_z) = (vec![0.0; nz], vec![0.0; nz]);
        for k in 0..nz {
            let (ca, cb) = coeff(eps_z[k], sig_z[k]);
            ca_z[k] = ca;
            cb_z[k] = cb;
        }

        let pmls = match kind {
            RunKind::Device => vec![Cpml::new(&spec, true)],
            RunKind::VacuumReference => vec![Cpml::new(&spec, true), Cpml::new(&spec, false)],
        };

        let (mut pec_ex, mut pec_ey) = (Vec::new(), Vec::new());
        if let Some(p) = pattern {
            let cells_per_pitch = (cfg.patch_pitch / spec.dx).round() as usize;
            let pad_cells = (cfg.pad / spec.dx).round() as usize;
            for r in 0..GRID {
                for c in 0..GRID {
                    if !p.get(r, c) {
                        continue;
                    }
                    // Footprint in grid cells; x = columns, y = rows.
                    let x0 = pad_cells + c * cells_per_pitch;
                    let x1 = x0 + cells_per_pitch;
                    let y0 = pad_cells + r * cells_per_pitch;
                    let y1 = y0 + cells_per_pitch;
                    // Ex nodes at (i+1/2, j): strictly interior in x,
                    // inclusive of the footprint edge in y.
                    for j in y0..=y1 {
                        for i in x0..x1 {
                            pec_ex.push(j * nx + i);
                        }
                    }
                    // Ey nodes at (i, j+1/2): inclusive in x, interior in y.
                    for j in y0..y1 {
                        for i in x0..=x1 {
                            pec_ey.push(j * nx + i);
                        }
                    }
                }
            }
            pec_ex.sort_unstable();
            pec_ex.dedup();
            pec_ey.sort_unstable();
            pec_ey.dedup();
        }

        Fdtd {
            spec,
            kind,
            ex: vec![0.0; (nz + 1) * plane],
            ey: vec![0.0; (nz + 1) * plane],
            ez: vec![0.0; nz * plane],
            hx: vec![0.0; nz * plane],
            hy: vec![0.0; nz * plane],
            hz: vec![0.0; (nz + 1) * plane],
            ca_xy,
            cb_xy,
            ca_z,
            cb_z,
            pmls,
            pec_ex,
            pec_ey,
            source_amp: cfg.source_amplitude,
        }
    }

    fn update_h(&mut self) {
        let s = &self.spec;
        let (nx, ny, nz) = (s.nx, s.ny, s.nz);
        let plane = s.plane();
        let (inv_dx, inv_dy, inv_dz) = (1.0 / s.dx, 1.0 / s.dx, 1.0 / s.dz);
        let dtm = s.dt / MU0;

        // Hx(i, j+1/2, k+1/2) += dtm * (dEy/dz - dEz/dy)
        for k in 0..nz {
            let psi = self.pml_depth_h(k);
            for j in 0..ny {
                let jp = if j + 1 == ny { 0 } else { j + 1 };
                let o = (k * ny + j) * nx;
                let ey_lo = &self.ey[(k * ny + j) * nx..][..nx];
                let ey_hi = &self.ey[((k + 1) * ny + j) * nx..][..nx];
                let ez_c = &self.ez[(k * ny + j) * nx..][..nx];
                let ez_jp = &self.ez[(k * ny + jp) * nx..][..nx];
                let hx = &mut self.hx[o..o + nx];
                if let Some((pml_idx, d)) = psi {
                    let pml = &mut self.pmls[pml_idx];
                    let (b, a) = (pml.b_h[d], pml.a_h[d]);
                    let psi_row = &mut pml.psi_hx[d * plane + j * nx..][..nx];
                    for i in 0..nx {
                        let dey_dz = (ey_hi[i] - ey_lo[i]) * inv_dz;
                        psi_row[i] = b * psi_row[i] + a * dey_dz;
                        hx[i] += dtm
                            * (dey_dz + psi_row[i] - (ez_jp[i] - ez_c[i]) * inv_dy);
                    }
                } else {
                    for i in 0..nx {
                        hx[i] += dtm
                            * ((ey_hi[i] - ey_lo[i]) * inv_dz - (ez_jp[i] - ez_c[i]) * inv_dy);
                    }
                }
            }
        }

        // Hy(i+1/2, j, k+1/2) += dtm * (dEz/dx - dEx/dz)
        for k in 0..nz {
            let psi = self.pml_depth_h(k);
            for j in 0..ny {
                let o = (k * ny + j) * nx;
                let ex_lo = &self.ex[(k * ny + j) * nx..][..nx];
                let ex_hi = &self.ex[((k + 1) * ny + j) * nx..][..nx];
                let ez_c = &self.ez[(k * ny + j) * nx..][..nx];
                let hy = &mut self.hy[o..o + nx];
                if let Some((pml_idx, d)) = psi {
                    let pml = &mut self.pmls[pml_idx];
                    let (b, a) = (pml.b_h[d], pml.a_h[d]);
                    let psi_row = &mut pml.psi_hy[d * plane + j * nx..][..nx];
                    for i in 0..nx {
                        let ip = if i + 1 == nx { 0 } else { i + 1 };
                        let dex_dz = (ex_hi[i] - ex_lo[i]) * inv_dz;
                        psi_row[i] = b * psi_row[i] + a * dex_dz;
                        hy[i] += dtm
                            * ((ez_c[ip] - ez_c[i]) * inv_dx - dex_dz - psi_row[i]);
                    }
                } else {
                    for i in 0..nx - 1 {
                        hy[i] += dtm
                            * ((ez_c[i + 1] - ez_c[i]) * inv_dx - (ex_hi[i] - ex_lo[i]) * inv_dz);
                    }
                    hy[nx - 1] += dtm
                        * ((ez_c[0] - ez_c[nx - 1]) * inv_dx
                            - (ex_hi[nx - 1] - ex_lo[nx - 1]) * inv_dz);
                }
            }
        }

        // Hz(i+1/2, j+1/2, k) += dtm * (dEx/dy - dEy/dx)
        // The k=0 and k=nz planes stay zero (tangential E is zero there), so
        // skip them.
        for k in 1..nz {
            for j in 0..ny {
                let jp = if j + 1 == ny { 0 } else { j + 1 };
                let o = (k * ny + j) * nx;
                let ex_c = &self.ex[(k * ny + j) * nx..][..nx];
                let ex_jp = &self.ex[(k * ny + jp) * nx..][..nx];
                let ey_c = &self.ey[(k * ny + j) * nx..][..nx];
                let hz = &mut self.hz[o..o + nx];
                for i in 0..nx - 1 {
                    hz[i] += dtm * ((ex_jp[i] - ex_c[i]) * inv_dy - (ey_c[i + 1] - ey_c[i]) * inv_dx);
                }
                hz[nx - 1] += dtm
                    * ((ex_jp[nx - 1] - ex_c[nx - 1]) * inv_dy - (ey_c[0] - ey_c[nx - 1]) * inv_dx);
            }
        }
    }

    #[inline]
    fn pml_depth_h(&self, k: usize) -> Option<(usize, usize)> {
        for (idx, pml) in self.pmls.iter().enumerate() {
            if let Some(d) = pml.depth_h(k, self.spec.n_abs) {
                return Some((idx, d));
            }
        }
        None
    }

    #[inline]
    fn pml_depth_e(&self, k: usize) -> Option<(usize, usize)> {
        for (idx, pml) in self.pmls.iter().enumerate() {
            if let Some(d) = pml.depth_e(k, self.spec.n_abs) {
                return Some((idx, d));
            }
        }
        None
    }

    fn update_e(&mut self) {
        let s = &self.spec;
        let (nx, ny, nz) = (s.nx, s.ny, s.nz);
        let plane = s.plane();
        let (inv_dx, inv_dy, inv_dz) = (1.0 / s.dx, 1.0 / s.dx, 1.0 / s.dz);

        // Ex(i+1/2, j, k) : k = 1..nz-1 (k=0 and k=nz are PEC planes).
        for k in 1..nz {
            let (ca, cb) = (self.ca_xy[k], self.cb_xy[k]);
            let psi = self.pml_depth_e(k);
            for j in 0..ny {
                let jm = if j == 0 { ny - 1 } else { j - 1 };
                let o = (k * ny + j) * nx;
                let hz_c = &self.hz[(k * ny + j) * nx..][..nx];
                let hz_jm = &self.hz[(k * ny + jm) * nx..][..nx];
                let hy_hi = &self.hy[(k * ny + j) * nx..][..nx];
                let hy_lo = &self.hy[((k - 1) * ny + j) * nx..][..nx];
                let ex = &mut self.ex[o..o + nx];
                if let Some((pml_idx, d)) = psi {
                    let pml = &mut self.pmls[pml_idx];
                    let (b, a) = (pml.b_e[d], pml.a_e[d]);
                    let psi_row = &mut pml.psi_ex[d * plane + j * nx..][..nx];
                    for i in 0..nx {
                        let dhy_dz = (hy_hi[i] - hy_lo[i]) * inv_dz;
                        psi_row[i] = b * psi_row[i] + a * dhy_dz;
                        ex[i] = ca * ex[i]
                            + cb * ((hz_c[i] - hz_jm[i]) * inv_dy - dhy_dz - psi_row[i]);
                    }
                } else {
                    for i in 0..nx {
                        ex[i] = ca * ex[i]
                            + cb * ((hz_c[i] - hz_jm[i]) * inv_dy - (hy_hi[i] - hy_lo[i]) * inv_dz);
                    }
                }
            }
        }

        // Ey(i, j+1/2, k) : k = 1..nz-1.
        for k in 1..nz {
            let (ca, cb) = (self.ca_xy[k], self.cb_xy[k]);
            let psi = self.pml_depth_e(k);
            for j in 0..ny {
                let o = (k * ny + j) * nx;
                let hx_hi = &self.hx[(k * ny + j) * nx..][..nx];
                let hx_lo = &self.hx[((k - 1) * ny + j) * nx..][..nx];
                let hz_c = &self.hz[(k * ny + j) * nx..][..nx];
                let ey = &mut self.ey[o..o + nx];
                if let Some((pml_idx, d)) = psi {
                    let pml = &mut self.pmls[pml_idx];
                    let (b, a) = (pml.b_e[d], pml.a_e[d]);
                    let psi_row = &mut pml.psi_ey[d * plane + j * nx..][..nx];
                    for i in 0..nx {
                        let im = if i == 0 { nx - 1 } else { i - 1 };
                        let dhx_dz = (hx_hi[i] - hx_lo[i]) * inv_dz;
                        psi_row[i] = b * psi_row[i] + a * dhx_dz;
                        ey[i] = ca * ey[i]
                            + cb * (dhx_dz + psi_row[i] - (hz_c[i] - hz_c[im]) * inv_dx);
                    }
                } else {
                    ey[0] = ca * ey[0]
                        + cb * ((hx_hi[0] - hx_lo[0]) * inv_dz - (hz_c[0] - hz_c[nx - 1]) * inv_dx);
                    for i in 1..nx {
                        ey[i] = ca * ey[i]
                            + cb * ((hx_hi[i] - hx_lo[i]) * inv_dz - (hz_c[i] - hz_c[i - 1]) * inv_dx);
                    }
                }
            }
        }

        // Ez(i, j, k+1/2) : no z-derivative, no PML correction needed.
        for k in 0..nz {
            let (ca, cb) = (self.ca_z[k], self.cb_z[k]);
            for j in 0..ny {
                let jm = if j == 0 { ny - 1 } else { j - 1 };
                let o = (k * ny + j) * nx;
                let hy_c = &self.hy[(k * ny + j) * nx..][..nx];
                let hx_c = &self.hx[(k * ny + j) * nx..][..nx];
                let hx_jm = &self.hx[(k * ny + jm) * nx..][..nx];
                let ez = &mut self.ez[o..o + nx];
                ez[0] = ca * ez[0]
                    + cb * ((hy_c[0] - hy_c[nx - 1]) * inv_dx - (hx_c[0] - hx_jm[0]) * inv_dy);
                for i in 1..nx {
                    ez[i] = ca * ez[i]
                        + cb * ((hy_c[i] - hy_c[i - 1]) * inv_dx - (hx_c[i] - hx_jm[i]) * inv_dy);
                }
            }
        }

        // Zero-thickness PEC patches on the patch plane.
        if !self.pec_ex.is_empty() {
            let base = self.spec.n_sub * plane;
            for &idx in &self.pec_ex {
                self.ex[base + idx] = 0.0;
            }
            for &idx in &self.pec_ey {
                self.ey[base + idx] = 0.0;
            }
        }
    }

    /// Plane-averaged Ex at the observation plane.
    fn observe(&self) -> f64 {
        let plane = self.spec.plane();
        let o = self.spec.k_obs * plane;
        let sum: f64 = self.ex[o..o + plane].iter().sum();
        sum / plane as f64
    }

    /// E-field energy proxy over the non-absorbing region.
    fn energy(&self) -> f64 {
        let plane = self.spec.plane();
        let lo = match self.kind {
            RunKind::Device => 0,
            RunKind::VacuumReference => self.spec.n_abs + 1,
        };
        let hi = self.spec.nz - self.spec.n_abs;
        let mut e = 0.0;
        for k in lo..hi {
            let o = k * plane;
            e += self.ex[o..o + plane].iter().map(|v| v * v).sum::<f64>();
            e += self.ey[o..o + plane].iter().map(|v| v * v).sum::<f64>();
            e += self.ez[o..o + plane].iter().map(|v| v * v).sum::<f64>();
        }
        e
    }

    /// Runs until the pulse has decayed, returning the recorded time series.
    fn run(&mut self, cfg: &SolverConfig) -> Result<Vec<f64>, SolverError> {
        let plane = self.spec.plane();
        let src_off = self.spec.k_src * plane;
        let src_end = self.spec.t0 + 6.0 * self.spec.tau;
        let decay_ratio = 10f64.powf(cfg.decay_db / 10.0);
        let mut series = Vec::with_capacity(4096);
        let mut peak_energy = 0.0f64;

        for step in 0..cfg.max_steps {
            self.update_h();
            self.update_e();
            let t = (step as f64 + 1.0) * self.spec.dt;
            if t < src_end {
                let v = self.source_amp * self.spec.pulse(t);
                for e in self.ex[src_off..src_off + plane].iter_mut() {
                    *e += v;
                }
            }
            series.push(self.observe());

            if step % 50 == 49 {
                let e = self.energy();
                peak_energy = peak_energy.max(e);
                if t > src_end && e <= peak_energy * decay_ratio {
                    return Ok(series);
                }
            }
        }
        let residual = self.energy() / peak_energy.max(f64::MIN_POSITIVE);
        Err(SolverError::NonConvergence {
            target_db: cfg.decay_db,
            steps: cfg.max_steps,
            residual_db: 10.0 * residual.log10(),
        })
    }
}

/// Runs the vacuum reference simulation.
pub(super) fn run_reference(cfg: &SolverConfig) -> Result<Vec<f64>, SolverError> {
    Fdtd::new(cfg, RunKind::VacuumReference, None).run(cfg)
}

/// Runs the device simulation for one pattern.
pub(super) fn run_device(cfg: &SolverConfig, pattern: &Pattern) -> Result<Vec<f64>, SolverError> {
    Fdtd::new(cfg, RunKind::Device, Some(pattern)).run(cfg)
}

/// Discrete Fourier transform of a recorded series at one frequency.
pub(super) fn dft_at(series: &[f64], dt: f64, freq: f64) -> (f64, f64) {
    let w = -std::f64::consts::TAU * freq * dt;
    let (mut re, mut im) = (0.0, 0.0);
    // The first sample corresponds to t = dt (recording happens after the
    // first update).
    for (n, &x) in series.iter().enumerate() {
        let phase = w * (n as f64 + 1.0);
        re += x * phase.cos();
        im += x * phase.sin();
    }
    (re * dt, im * dt)
}
