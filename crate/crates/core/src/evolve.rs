//! Method-of-lines evolution of `d_t^2 phi = Delta_d phi - V phi - N(phi) + F`
//! on a uniform radial grid with high-order centered differences and classical
//! Runge-Kutta time stepping, generic over the working precision.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{Provenance, TimeSeries};
use crate::error::{Error, Result};
use crate::freewave::FreeWave;
use crate::models::ModelSpec;
use crate::numerics::{centered_weights, fornberg_weights, Precision, Real};

/// Outer boundary treatment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// The grid extends beyond the domain of dependence of every observation.
    #[default]
    Causal,
    /// First-order outgoing-wave condition; approximate.
    Sommerfeld,
}

impl Boundary {
    pub fn as_str(self) -> &'static str {
        match self {
            Boundary::Causal => "causal",
            Boundary::Sommerfeld => "sommerfeld",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveConfig {
    #[serde(default = "default_order")]
    pub stencil_order: usize,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    pub t_final: f64,
    #[serde(default = "default_h")]
    pub h: f64,
    /// Outer radius; by default the smallest causal one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
    #[serde(default)]
    pub boundary: Boundary,
    pub observation_radii: Vec<f64>,
    #[serde(default = "default_sample_interval")]
    pub sample_interval: f64,
    #[serde(default = "default_precision")]
    pub precision: Precision,
    /// Skip grid points outside the domain of dependence of the observers.
    #[serde(default = "default_true")]
    pub trim: bool,
    /// Kreiss-Oliger dissipation strength; zero disables it.
    #[serde(default)]
    pub dissipation: f64,
}

fn default_order() -> usize {
    6
}
fn default_cfl() -> f64 {
    0.25
}
fn default_h() -> f64 {
    0.025
}
fn default_sample_interval() -> f64 {
    0.5
}
fn default_precision() -> Precision {
    Precision::Extended
}
fn default_true() -> bool {
    true
}

impl EvolveConfig {
    pub fn new(t_final: f64, observation_radii: Vec<f64>) -> Self {
        EvolveConfig {
            stencil_order: default_order(),
            cfl: default_cfl(),
            t_final,
            h: default_h(),
            r_max: None,
            boundary: Boundary::Causal,
            observation_radii,
            sample_interval: default_sample_interval(),
            precision: default_precision(),
            trim: true,
            dissipation: 0.0,
        }
    }

    fn r_obs_max(&self) -> f64 {
        self.observation_radii.iter().copied().fold(0.0, f64::max)
    }

    /// Smallest outer radius keeping the boundary out of causal contact with
    /// the observers for a profile of the given support.
    pub fn causal_r_max(&self, support: (f64, f64)) -> f64 {
        let width = support.1 - support.0;
        self.t_final + self.r_obs_max() + 2.0 * width + support.1.max(0.0) + trim_margin(self.h)
    }

    pub fn validate(&self, support: (f64, f64)) -> Result<()> {
        if self.stencil_order != 4 && self.stencil_order != 6 {
            return Err(Error::InvalidArgument(format!("stencil order {} is not 4 or 6", self.stencil_order)));
        }
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return Err(Error::InvalidArgument(format!("cfl = {} must lie in (0, 1)", self.cfl)));
        }
        if !(self.h > 0.0) || !(self.t_final > 0.0) || !(self.sample_interval > 0.0) {
            return Err(Error::InvalidArgument("h, t_final and sample_interval must be positive".into()));
        }
        if self.observation_radii.is_empty() || self.observation_radii.iter().any(|r| !(*r >= 0.0)) {
            return Err(Error::InvalidArgument("need at least one nonnegative observation radius".into()));
        }
        let r_max = self.r_max.unwrap_or_else(|| self.causal_r_max(support));
        if self.r_obs_max() > r_max {
            return Err(Error::InvalidArgument("observation radius beyond r_max".into()));
        }
        let width = support.1 - support.0;
        if self.boundary == Boundary::Causal && r_max < self.t_final + self.r_obs_max() + 2.0 * width - 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "causal boundary needs r_max >= t_final + max(r_obs) + 2 width = {}, got {r_max}",
                self.t_final + self.r_obs_max() + 2.0 * width
            )));
        }
        Ok(())
    }
}

fn trim_margin(h: f64) -> f64 {
    4.0 + 40.0 * h
}

/// Uniform grid `r_i = i h`, `i = 0..n_points`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub h: f64,
    pub n_points: usize,
}

impl Grid {
    pub fn new(h: f64, r_max: f64) -> Result<Self> {
        if !(h > 0.0) || !(r_max > 0.0) {
            return Err(Error::InvalidArgument("grid spacing and extent must be positive".into()));
        }
        let n_points = (r_max / h).ceil() as usize + 1;
        Ok(Grid { h, n_points })
    }

    pub fn r_max(&self) -> f64 {
        self.h * (self.n_points - 1) as f64
    }

    pub fn radii<T: Real>(&self) -> Vec<T> {
        let h = T::from_f64(self.h);
        (0..self.n_points).map(|i| h.mul_f64(i as f64)).collect()
    }

    pub fn nearest_index(&self, r: f64) -> usize {
        ((r / self.h).round() as usize).min(self.n_points - 1)
    }
}

/// `(phi, d_t phi)` on a grid at one time.
#[derive(Debug, Clone)]
pub struct FieldState<T> {
    pub phi: Vec<T>,
    pub pi: Vec<T>,
    pub time: T,
}

impl<T: Real> FieldState<T> {
    pub fn zeros(n: usize) -> Self {
        FieldState { phi: vec![T::zero(); n], pi: vec![T::zero(); n], time: T::zero() }
    }
}

/// `phi'' + (c1/r) phi' - (c2/r^2) phi` with parity `sigma` about the origin.
#[derive(Debug, Clone)]
pub struct RadialOperator<T> {
    order: usize,
    n: usize,
    parity: i32,
    // rows handled by the integer-weight interior formula
    interior: (usize, usize),
    // c1 / (scale1 i h^2) and c2 / (i h)^2 per row
    first_coef: Vec<T>,
    centrifugal: Vec<T>,
    inv_scale2: T,
    // explicit rows near the origin and the outer edge: (start, weights)
    special: Vec<(usize, usize, Vec<T>)>,
    conjugation: Option<Box<Conjugation<T>>>,
}

/// `Delta_d phi = r^{-l} L_l (r^l phi)` away from the origin, with `L_l` the
/// three-dimensional operator for harmonic index `l`. The direct form has
/// complex eigenvalues near the origin once `d >= 7`; this one is similar to
/// `L_l`, whose spectrum is real.
#[derive(Debug, Clone)]
struct Conjugation<T> {
    harmonic: RadialOperator<T>,
    // r_i^l, and its inverse for i >= 1
    scale: Vec<T>,
    inv_scale: Vec<T>,
    // d phi''(0) from even ghosts
    origin_row: Vec<T>,
}

impl<T: Real> RadialOperator<T> {
    /// The `l = 0` radial Laplacian in `d` dimensions.
    pub fn laplacian(d: u32, grid: &Grid, order: usize) -> Self {
        let direct = RadialOperator::new(grid, order, (d - 1) as f64, 0.0, 1);
        if d < 7 {
            return direct;
        }
        let l = (d - 3) / 2;
        let lf = l as f64;
        let harmonic = RadialOperator::new(grid, order, 2.0, lf * (lf + 1.0), if l.is_multiple_of(2) { 1 } else { -1 });
        let radii: Vec<T> = grid.radii();
        let scale: Vec<T> = radii.iter().map(|r| r.powi(l as i32)).collect();
        let inv_scale = scale.iter().map(|s| if *s == T::zero() { T::zero() } else { T::one() / *s }).collect();
        let origin_row = direct.special[0].2.clone();
        RadialOperator { conjugation: Some(Box::new(Conjugation { harmonic, scale, inv_scale, origin_row })), ..direct }
    }

    pub fn new(grid: &Grid, order: usize, c1: f64, c2: f64, parity: i32) -> Self {
        let n = grid.n_points;
        let half = order / 2;
        let h = T::from_f64(grid.h);
        let h2 = h * h;
        let (d1, d2) = centered_weights::<T>(order);
        let scale1 = if order == 6 { 60.0 } else { 12.0 };
        let scale2 = if order == 6 { 180.0 } else { 12.0 };
        let mut first_coef = vec![T::zero(); n];
        let mut centrifugal = vec![T::zero(); n];
        for i in 1..n {
            let fi = T::from_f64(i as f64);
            first_coef[i] = T::from_f64(c1) / (T::from_f64(scale1) * fi * h2);
            centrifugal[i] = T::from_f64(c2) / (fi * fi * h2);
        }
        let lo = half;
        let hi = n.saturating_sub(half);
        let mut special = Vec::new();
        // rows reaching below the origin: fold ghosts with the parity
        for i in 0..lo.min(n) {
            let mut w = vec![T::zero(); i + half + 1];
            if i == 0 {
                if parity == 1 {
                    // (phi'/r)(0) = phi''(0)
                    for k in 0..=2 * half {
                        let j = (k as i64 - half as i64).unsigned_abs() as usize;
                        w[j] += d2[k].mul_f64(1.0 + c1) / h2;
                    }
                }
                special.push((0, w.len(), w));
                continue;
            }
            let r = h.mul_f64(i as f64);
            for k in 0..=2 * half {
                let off = i as i64 + k as i64 - half as i64;
                let (j, s) = if off < 0 { ((-off) as usize, parity as f64) } else { (off as usize, 1.0) };
                let coef = d2[k] / h2 + T::from_f64(c1) * d1[k] / (r * h);
                w[j] += coef.mul_f64(s);
            }
            w[i] -= centrifugal[i];
            special.push((0, w.len(), w));
        }
        // rows reaching past the outer edge: one-sided, same order
        let width = order + 2;
        for i in hi.max(lo)..n {
            let start = n.saturating_sub(width);
            let nodes: Vec<T> = (start..n).map(|j| T::from_f64(j as f64)).collect();
            let fw = fornberg_weights(T::from_f64(i as f64), &nodes, 2);
            let r = h.mul_f64(i as f64);
            let w: Vec<T> = (0..nodes.len())
                .map(|j| {
                    let mut c = fw[2][j] / h2 + T::from_f64(c1) * fw[1][j] / (r * h);
                    if start + j == i {
                        c -= centrifugal[i];
                    }
                    c
                })
                .collect();
            special.push((start, w.len(), w));
        }
        RadialOperator {
            order,
            n,
            parity,
            interior: (lo, hi.max(lo)),
            first_coef,
            centrifugal,
            inv_scale2: T::one() / (T::from_f64(scale2) * h2),
            special,
            conjugation: None,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline(always)]
    fn interior_row(&self, phi: &[T], i: usize) -> T {
        let p = phi;
        let (s2, s1) = if self.order == 6 {
            let a1 = p[i + 1] + p[i - 1];
            let a2 = p[i + 2] + p[i - 2];
            let a3 = p[i + 3] + p[i - 3];
            let b1 = p[i + 1] - p[i - 1];
            let b2 = p[i + 2] - p[i - 2];
            let b3 = p[i + 3] - p[i - 3];
            (
                a3.mul_f64(2.0) - a2.mul_f64(27.0) + a1.mul_f64(270.0) - p[i].mul_f64(490.0),
                b3 - b2.mul_f64(9.0) + b1.mul_f64(45.0),
            )
        } else {
            let a1 = p[i + 1] + p[i - 1];
            let a2 = p[i + 2] + p[i - 2];
            let b1 = p[i + 1] - p[i - 1];
            let b2 = p[i + 2] - p[i - 2];
            (a1.mul_f64(16.0) - a2 - p[i].mul_f64(30.0), b1.mul_f64(8.0) - b2)
        };
        s2 * self.inv_scale2 + s1 * self.first_coef[i] - self.centrifugal[i] * p[i]
    }

    /// Applies the operator to rows `0..active` of `phi`, writing `out`.
    pub fn apply(&self, phi: &[T], out: &mut [T], active: usize) {
        if let Some(c) = &self.conjugation {
            let active = active.min(self.n);
            let reach = (active + self.order + 2).min(self.n);
            let mut psi = vec![T::zero(); self.n];
            for j in 0..reach {
                psi[j] = phi[j] * c.scale[j];
            }
            c.harmonic.apply(&psi, out, active);
            for i in 1..active {
                out[i] *= c.inv_scale[i];
            }
            if active > 0 {
                out[0] = c.origin_row.iter().zip(phi).fold(T::zero(), |a, (w, p)| a + *w * *p);
            }
            return;
        }
        let (lo, hi) = self.interior;
        let active = active.min(self.n);
        for (row, (start, len, w)) in self.special.iter().enumerate() {
            let i = if row < lo { row } else { hi + (row - lo) };
            if i >= active {
                continue;
            }
            let mut acc = T::zero();
            for (k, wk) in w[..*len].iter().enumerate() {
                acc += *wk * phi[start + k];
            }
            out[i] = acc;
        }
        let end = hi.min(active);
        if end > lo {
            const CHUNK: usize = 2048;
            out[lo..end].par_chunks_mut(CHUNK).enumerate().for_each(|(c, chunk)| {
                let base = lo + c * CHUNK;
                for (k, o) in chunk.iter_mut().enumerate() {
                    *o = self.interior_row(phi, base + k);
                }
            });
        }
        if self.parity == -1 && active > 0 {
            out[0] = T::zero();
        }
    }
}

/// Optional external source `F(t, r)` added to the right-hand side.
pub type Forcing<'a, T> = &'a (dyn Fn(T, T) -> T + Sync);

/// Run products: one series per observation radius plus metadata.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub series: Vec<TimeSeries>,
    pub meta: RunMeta,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunMeta {
    pub precision: Precision,
    pub h: f64,
    pub dt: f64,
    pub n_points: usize,
    pub r_max: f64,
    pub stencil_order: usize,
    pub boundary: Boundary,
    pub steps: usize,
    pub wall_seconds: f64,
    pub warnings: Vec<String>,
}

/// Everything one right-hand-side evaluation needs.
struct System<'a, T> {
    op: RadialOperator<T>,
    radii: Vec<T>,
    potential: Option<Vec<T>>,
    terms: Vec<(T, i32, Option<Vec<T>>)>,
    forcing: Option<Forcing<'a, T>>,
    sommerfeld: Option<(T, T)>,
    dissipation: Option<T>,
    d_minus_1_half: f64,
    h: T,
}

impl<T: Real> System<'_, T> {
    fn rhs(&self, t: T, phi: &[T], pi: &[T], dphi: &mut [T], dpi: &mut [T], active: usize) {
        dphi[..active].copy_from_slice(&pi[..active]);
        self.op.apply(phi, dpi, active);
        if let Some(v) = &self.potential {
            for i in 0..active {
                dpi[i] -= v[i] * phi[i];
            }
        }
        for (coeff, p, rw) in &self.terms {
            for i in 0..active {
                let mut n = *coeff * phi[i].powi(*p);
                if let Some(rw) = rw {
                    n *= rw[i];
                }
                dpi[i] -= n;
            }
        }
        if let Some(f) = self.forcing {
            for i in 0..active {
                dpi[i] += f(t, self.radii[i]);
            }
        }
        if let Some(sigma) = self.dissipation {
            self.kreiss_oliger(phi, pi, dphi, dpi, active, sigma);
        }
        if let Some((w1, w2)) = self.sommerfeld {
            let n = self.op.len();
            if active == n && n >= 3 {
                // d_t pi = -(d_r pi + (d-1)/(2r) pi), second-order one-sided
                let i = n - 1;
                let dr = (pi[i].mul_f64(3.0) - pi[i - 1].mul_f64(4.0) + pi[i - 2]) * w1;
                dpi[i] = -(dr + pi[i] * w2.mul_f64(self.d_minus_1_half));
                let drp = (phi[i].mul_f64(3.0) - phi[i - 1].mul_f64(4.0) + phi[i - 2]) * w1;
                dphi[i] = -(drp + phi[i] * w2.mul_f64(self.d_minus_1_half));
            }
        }
    }

    fn kreiss_oliger(&self, phi: &[T], pi: &[T], dphi: &mut [T], dpi: &mut [T], active: usize, sigma: T) {
        // -sigma h^{2q-1} (D+ D-)^q / 2^{2q} with q = order/2 + 1
        let q = self.op.order / 2 + 1;
        let w: Vec<f64> = (0..=2 * q)
            .map(|k| {
                let b = crate::numerics::binomial::<f64>(2 * q as u32, k as u32);
                if k % 2 == 0 {
                    b
                } else {
                    -b
                }
            })
            .collect();
        let sign = if q.is_multiple_of(2) { -1.0 } else { 1.0 };
        let scale = sigma / (self.h * T::from_f64(2f64.powi(2 * q as i32))) * T::from_f64(sign);
        let end = active.min(self.op.len().saturating_sub(q));
        for i in q..end {
            let mut a = T::zero();
            let mut b = T::zero();
            for (k, wk) in w.iter().enumerate() {
                a += phi[i + k - q].mul_f64(*wk);
                b += pi[i + k - q].mul_f64(*wk);
            }
            dphi[i] += a * scale;
            dpi[i] += b * scale;
        }
    }
}

/// Evolves the model from the free-wave data `model.data_amplitude * w` at
/// `t = 0` (or from zero data when `zero_data` is set) and samples `phi` at
/// the observation radii.
pub fn run<T: Real>(model: &ModelSpec, w: &FreeWave<T>, cfg: &EvolveConfig) -> Result<RunOutput> {
    run_with(model, w, cfg, None, false)
}

/// Like [`run`] with an external source and optional zero initial data.
pub fn run_with<T: Real>(
    model: &ModelSpec,
    w: &FreeWave<T>,
    cfg: &EvolveConfig,
    forcing: Option<Forcing<'_, T>>,
    zero_data: bool,
) -> Result<RunOutput> {
    model.validate()?;
    if w.l() != model.l {
        return Err(Error::InvalidArgument(format!("free wave l = {} differs from model l = {}", w.l(), model.l)));
    }
    let (u0, u1) = w.profile().support();
    let support = (u0.to_f64(), u1.to_f64());
    cfg.validate(support)?;
    let r_max = cfg.r_max.unwrap_or_else(|| cfg.causal_r_max(support));
    let grid = Grid::new(cfg.h, r_max)?;
    let radii: Vec<T> = grid.radii();
    let mut state = FieldState::zeros(grid.n_points);
    if !zero_data {
        let (f, g) = w.initial_data(&radii)?;
        let eps = T::from_f64(model.data_amplitude);
        state.phi = f.into_iter().map(|x| x * eps).collect();
        state.pi = g.into_iter().map(|x| x * eps).collect();
    }
    let op = RadialOperator::laplacian(model.dimension(), &grid, cfg.stencil_order);
    evolve_system(model, op, state, &grid, cfg, forcing)
}

/// Stepper for one field on one grid.
pub struct Evolver<'a, T> {
    system: System<'a, T>,
    grid: Grid,
    pub state: FieldState<T>,
    dt: T,
    k_phi: Vec<T>,
    k_pi: Vec<T>,
    acc_phi: Vec<T>,
    acc_pi: Vec<T>,
    tmp_phi: Vec<T>,
    tmp_pi: Vec<T>,
    steps_taken: usize,
}

impl<'a, T: Real> Evolver<'a, T> {
    /// Stepper for `model` in its own dimension.
    pub fn new(model: &ModelSpec, grid: Grid, state: FieldState<T>, cfg: &EvolveConfig) -> Result<Self> {
        let op = RadialOperator::laplacian(model.dimension(), &grid, cfg.stencil_order);
        Self::with_operator(model, op, grid, state, cfg, None)
    }

    pub fn with_operator(
        model: &ModelSpec,
        op: RadialOperator<T>,
        grid: Grid,
        state: FieldState<T>,
        cfg: &EvolveConfig,
        forcing: Option<Forcing<'a, T>>,
    ) -> Result<Self> {
        let n = grid.n_points;
        if state.phi.len() != n || state.pi.len() != n || op.len() != n {
            return Err(Error::InvalidArgument("state, operator and grid sizes differ".into()));
        }
        if n < 2 * op.order + 2 {
            return Err(Error::InvalidArgument(format!("grid of {n} points is too small for order {}", op.order)));
        }
        let radii: Vec<T> = grid.radii();
        let h = T::from_f64(grid.h);
        let potential = model.potential.as_ref().map(|v| radii.iter().map(|&r| v.eval(r)).collect());
        let terms = model
            .terms
            .iter()
            .map(|t| {
                let rw = (t.radial_weight > 0).then(|| radii.iter().map(|r| r.powi(t.radial_weight as i32)).collect());
                (T::from_f64(t.coeff), t.power as i32, rw)
            })
            .collect();
        let sommerfeld = (cfg.boundary == Boundary::Sommerfeld).then(|| {
            let rn = radii[n - 1];
            (T::one() / h.mul_f64(2.0), T::one() / rn)
        });
        let system = System {
            op,
            radii,
            potential,
            terms,
            forcing,
            sommerfeld,
            dissipation: (cfg.dissipation > 0.0).then(|| T::from_f64(cfg.dissipation)),
            d_minus_1_half: (model.dimension() - 1) as f64 / 2.0,
            h,
        };
        Ok(Evolver {
            system,
            grid,
            dt: h.mul_f64(cfg.cfl),
            k_phi: vec![T::zero(); n],
            k_pi: vec![T::zero(); n],
            acc_phi: state.phi.clone(),
            acc_pi: state.pi.clone(),
            tmp_phi: state.phi.clone(),
            tmp_pi: state.pi.clone(),
            state,
            steps_taken: 0,
        })
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// One classical Runge-Kutta step of rows `0..active`; rows beyond keep
    /// their values.
    pub fn step(&mut self, active: usize) -> Result<()> {
        let n = self.grid.n_points;
        let active = active.min(n);
        let dt = self.dt;
        let half_dt = dt.mul_f64(0.5);
        let sixth = dt / T::from_f64(6.0);
        let third = dt / T::from_f64(3.0);
        let t = self.state.time;
        let (phi, pi) = (&self.state.phi, &self.state.pi);
        self.acc_phi[..active].copy_from_slice(&phi[..active]);
        self.acc_pi[..active].copy_from_slice(&pi[..active]);
        self.tmp_phi[active..].copy_from_slice(&phi[active..]);
        self.tmp_pi[active..].copy_from_slice(&pi[active..]);
        let stages: [(T, T, T); 4] =
            [(T::zero(), half_dt, sixth), (half_dt, half_dt, third), (half_dt, dt, third), (dt, T::zero(), sixth)];
        for (stage, (t_off, next, weight)) in stages.iter().enumerate() {
            let (src_phi, src_pi) = if stage == 0 { (phi, pi) } else { (&self.tmp_phi, &self.tmp_pi) };
            self.system.rhs(t + *t_off, src_phi, src_pi, &mut self.k_phi, &mut self.k_pi, active);
            for i in 0..active {
                self.acc_phi[i] += *weight * self.k_phi[i];
                self.acc_pi[i] += *weight * self.k_pi[i];
            }
            if stage < 3 {
                for i in 0..active {
                    self.tmp_phi[i] = phi[i] + *next * self.k_phi[i];
                    self.tmp_pi[i] = pi[i] + *next * self.k_pi[i];
                }
            }
        }
        self.state.phi[..active].copy_from_slice(&self.acc_phi[..active]);
        self.state.pi[..active].copy_from_slice(&self.acc_pi[..active]);
        self.steps_taken += 1;
        self.state.time = dt.mul_f64(self.steps_taken as f64);
        if self.system.op.parity == -1 {
            self.state.phi[0] = T::zero();
            self.state.pi[0] = T::zero();
        }
        let limit = T::from_f64(1e150);
        if self.state.phi[..active].iter().any(|x| !x.is_finite() || x.abs() > limit) {
            return Err(Error::Blowup { time: self.state.time.to_f64() });
        }
        Ok(())
    }
}

fn evolve_system<T: Real>(
    model: &ModelSpec,
    op: RadialOperator<T>,
    state: FieldState<T>,
    grid: &Grid,
    cfg: &EvolveConfig,
    forcing: Option<Forcing<'_, T>>,
) -> Result<RunOutput> {
    let start_clock = Instant::now();
    let n = grid.n_points;
    let mut ev = Evolver::with_operator(model, op, *grid, state, cfg, forcing)?;
    let dt_f = ev.dt().to_f64();
    let steps = (cfg.t_final / dt_f).ceil() as usize;
    let stride = ((cfg.sample_interval / dt_f).round() as usize).max(1);
    let obs: Vec<usize> = cfg.observation_radii.iter().map(|&r| grid.nearest_index(r)).collect();
    let r_obs_max = obs.iter().map(|&i| i as f64 * grid.h).fold(0.0, f64::max);
    let mut samples: Vec<Vec<(f64, f64)>> = vec![Vec::with_capacity(steps / stride + 2); obs.len()];
    let record = |samples: &mut Vec<Vec<(f64, f64)>>, st: &FieldState<T>| {
        for (s, &i) in samples.iter_mut().zip(&obs) {
            s.push((st.time.to_f64(), st.phi[i].to_f64()));
        }
    };
    record(&mut samples, &ev.state);
    let margin = trim_margin(grid.h) + (cfg.stencil_order as f64) * grid.h;
    for step in 1..=steps {
        let active = if cfg.trim && cfg.boundary == Boundary::Causal {
            let reach = r_obs_max + (cfg.t_final - ev.state.time.to_f64()) + margin;
            ((reach / grid.h).ceil() as usize + 1).min(n)
        } else {
            n
        };
        ev.step(active)?;
        if step % stride == 0 || step == steps {
            record(&mut samples, &ev.state);
        }
    }

    let mut warnings = Vec::new();
    if cfg.boundary == Boundary::Sommerfeld {
        warnings.push("sommerfeld boundary is approximate; use tails from it for rates only".to_string());
    }
    let series = samples
        .into_iter()
        .zip(&obs)
        .map(|(s, &i)| TimeSeries::from_samples(s, i as f64 * grid.h, Provenance::Evolver))
        .collect::<Result<Vec<_>>>()?;
    Ok(RunOutput {
        series,
        meta: RunMeta {
            precision: T::PRECISION,
            h: grid.h,
            dt: dt_f,
            n_points: n,
            r_max: grid.r_max(),
            stencil_order: cfg.stencil_order,
            boundary: cfg.boundary,
            steps,
            wall_seconds: start_clock.elapsed().as_secs_f64(),
            warnings,
        },
    })
}

/// Evolves `w` once as an `l = 0` field in `d = 2l + 3` dimensions and once as
/// `psi = r^l phi` in three dimensions with the centrifugal term
/// `l (l+1) / r^2`, returning `max |phi_d - psi / r^l|` over the samples at
/// the observation radii (which must be positive).
pub fn operator_identity_check<T: Real>(w: &FreeWave<T>, cfg: &EvolveConfig) -> Result<f64> {
    let l = w.l();
    if l == 0 {
        return Err(Error::InvalidArgument("the operator identity is trivial for l = 0".into()));
    }
    if cfg.observation_radii.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::InvalidArgument("operator identity check needs positive radii".into()));
    }
    let model = ModelSpec::free(l);
    let (u0, u1) = w.profile().support();
    let support = (u0.to_f64(), u1.to_f64());
    cfg.validate(support)?;
    let r_max = cfg.r_max.unwrap_or_else(|| cfg.causal_r_max(support));
    let grid = Grid::new(cfg.h, r_max)?;
    let radii: Vec<T> = grid.radii();
    let (f, g) = w.initial_data(&radii)?;

    let direct = {
        let op = RadialOperator::laplacian(model.dimension(), &grid, cfg.stencil_order);
        let state = FieldState { phi: f.clone(), pi: g.clone(), time: T::zero() };
        evolve_system(&model, op, state, &grid, cfg, None)?
    };
    let harmonic = {
        let lf = l as f64;
        let parity = if l.is_multiple_of(2) { 1 } else { -1 };
        let op = RadialOperator::new(&grid, cfg.stencil_order, 2.0, lf * (lf + 1.0), parity);
        let rl: Vec<T> = radii.iter().map(|r| r.powi(l as i32)).collect();
        let phi = f.iter().zip(&rl).map(|(a, b)| *a * *b).collect();
        let pi = g.iter().zip(&rl).map(|(a, b)| *a * *b).collect();
        let state = FieldState { phi, pi, time: T::zero() };
        evolve_system(&ModelSpec::free(0), op, state, &grid, cfg, None)?
    };
    let mut worst = 0.0f64;
    for (a, b) in direct.series.iter().zip(&harmonic.series) {
        let rl = a.r_obs.powi(l as i32);
        for ((_, x), (_, y)) in a.samples().iter().zip(b.samples()) {
            worst = worst.max((x - y / rl).abs());
        }
    }
    Ok(worst)
}

/// Discrete energy `int (pi^2 + phi'^2) r^{d-1} dr` of a free field, with a
/// sixth-order `phi'` and even reflection at the origin.
pub fn energy<T: Real>(state: &FieldState<T>, d: u32, h: f64) -> f64 {
    let n = state.phi.len();
    if n < 8 {
        return 0.0;
    }
    let (d1, _) = centered_weights::<f64>(6);
    let phi = |j: i64| state.phi[j.unsigned_abs() as usize].to_f64();
    let mut e = 0.0;
    for i in 1..n - 3 {
        let r = h * i as f64;
        let dphi: f64 = (0..7).map(|k| d1[k] * phi(i as i64 + k as i64 - 3)).sum::<f64>() / h;
        let pi = state.pi[i].to_f64();
        e += (pi * pi + dphi * dphi) * r.powi(d as i32 - 1);
    }
    e * h
}
