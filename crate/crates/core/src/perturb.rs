//! Perturbative iterates from the Duhamel formula in null coordinates:
//!
//! ```text
//! phi(t, r) = 1 / (2^{l+3} r^{l+1}) int_{|t-r|}^{t+r} dv int_{-v}^{t-r} du F(u, v) (v-u)^{l+1} P_l(mu),
//! mu = (r^2 + (v-t)(t-u)) / (r (v-u))
//! ```
//!
//! The double integral is evaluated with composite Gauss-Legendre rules on
//! panels that respect every line where the source is not smooth, and checked
//! by comparing `n`- and `2n`-point results.
//!
//! Iterates carry all their parameters: the first linear iterate is the full
//! `O(lambda)` correction `lambda phi_1`, the nonlinear ones include the data
//! amplitude to the appropriate power.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::freewave::FreeWave;
use crate::models::{InnerForm, ModelSpec};
use crate::numerics::{gauss_legendre, QuadratureRule, Real};

/// Where a source may be nonzero and where it is not smooth.
#[derive(Debug, Clone)]
pub struct SupportHint<T> {
    /// `F = 0` for `u > u_max`.
    pub u_max: Option<T>,
    /// `F = 0` for `v < v_min`.
    pub v_min: Option<T>,
    /// `F = 0` unless `u` or `v` lies in this interval.
    pub strip: Option<(T, T)>,
    pub u_lines: Vec<T>,
    pub v_lines: Vec<T>,
    /// Lines of constant `rho = (v - u) / 2`.
    pub rho_lines: Vec<T>,
    /// Length on which the source varies near its kinks.
    pub scale: T,
}

impl<T: Real> SupportHint<T> {
    pub fn unbounded(scale: T) -> Self {
        SupportHint {
            u_max: None,
            v_min: None,
            strip: None,
            u_lines: vec![],
            v_lines: vec![],
            rho_lines: vec![],
            scale,
        }
    }
}

/// A source `F(u, v)` of the inhomogeneous free wave equation `box phi = F`.
pub struct SourceField<'a, T> {
    eval: Box<dyn Fn(T, T) -> T + Send + Sync + 'a>,
    pub hint: SupportHint<T>,
}

impl<'a, T: Real> SourceField<'a, T> {
    pub fn new(eval: impl Fn(T, T) -> T + Send + Sync + 'a, hint: SupportHint<T>) -> Self {
        SourceField { eval: Box::new(eval), hint }
    }

    pub fn zero(scale: T) -> Self {
        SourceField::new(|_, _| T::zero(), SupportHint::unbounded(scale))
    }

    #[inline]
    pub fn eval(&self, u: T, v: T) -> T {
        (self.eval)(u, v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DuhamelOptions {
    /// Gauss points per panel and dimension.
    pub quad_n: usize,
    /// Allowed `|I_2n - I_n|` relative to the integral of `|integrand|`.
    pub tolerance: f64,
    /// Run the `2n` comparison; without it a single `quad_n` rule is used.
    pub check: bool,
    /// Radii below this are rejected.
    pub r_min: f64,
    /// Ratio of successive panel lengths away from a break line.
    pub growth: f64,
}

impl DuhamelOptions {
    pub fn for_precision<T: Real>() -> Self {
        let tolerance = match T::PRECISION {
            crate::numerics::Precision::Standard => 1e-8,
            crate::numerics::Precision::Extended => 1e-20,
        };
        DuhamelOptions { quad_n: 16, tolerance, check: true, r_min: 1e-6, growth: 3.0 }
    }

    fn unchecked(self, quad_n: usize) -> Self {
        DuhamelOptions { quad_n, check: false, ..self }
    }
}

/// `mu` of the Duhamel kernel at `(u, v)` for the observation point `(t, r)`.
pub fn kernel_mu<T: Real>(t: T, r: T, u: T, v: T) -> T {
    (r * r + (v - t) * (t - u)) / (r * (v - u))
}

/// `(v-u)^{l+1} P_l(mu)` without dividing by `v - u`.
#[inline]
fn kernel<T: Real>(l: u32, t: T, r: T, u: T, v: T) -> T {
    let w = v - u;
    let n_over_r = (r * r + (v - t) * (t - u)) / r;
    let mut q_prev = T::one();
    let mut q = n_over_r;
    if l == 0 {
        return w;
    }
    let w2 = w * w;
    for j in 1..l {
        let jf = j as f64;
        let next = ((n_over_r * q).mul_f64(2.0 * jf + 1.0) - (w2 * q_prev).mul_f64(jf)) / T::from_f64(jf + 1.0);
        q_prev = q;
        q = next;
    }
    w * q
}

/// Splits `[a, b]` into panels that grow geometrically away from both ends,
/// starting at `scale`.
fn graded_panels<T: Real>(a: T, b: T, scale: T, growth: f64, out: &mut Vec<(T, T)>) {
    if !(b > a) {
        return;
    }
    let mut left = a;
    let mut right = b;
    let mut len_l = scale;
    let mut len_r = scale;
    let mut tail = Vec::new();
    loop {
        let gap = right - left;
        if gap <= (len_l + len_r).mul_f64(1.5) {
            if gap > len_l.max(len_r).mul_f64(1.5) {
                let mid = (left + right).mul_f64(0.5);
                out.push((left, mid));
                out.push((mid, right));
            } else {
                out.push((left, right));
            }
            break;
        }
        out.push((left, left + len_l));
        left += len_l;
        len_l = len_l.mul_f64(growth);
        tail.push((right - len_r, right));
        right -= len_r;
        len_r = len_r.mul_f64(growth);
    }
    out.extend(tail.into_iter().rev());
}

/// Panels of `[a, b]` with breaks at every point of `cuts` inside it.
fn panels<T: Real>(a: T, b: T, cuts: &[T], scale: T, growth: f64) -> Vec<(T, T)> {
    let mut pts: Vec<T> = cuts.iter().copied().filter(|c| *c > a && *c < b).collect();
    pts.push(a);
    pts.push(b);
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    pts.dedup();
    let mut out = Vec::new();
    for w in pts.windows(2) {
        graded_panels(w[0], w[1], scale, growth, &mut out);
    }
    out
}

struct Integrator<'s, 'a, T> {
    src: &'s SourceField<'a, T>,
    t: T,
    r: T,
    l: u32,
    growth: f64,
}

impl<T: Real> Integrator<'_, '_, T> {
    fn outer_cuts(&self, v_lo: T, v_hi: T) -> Vec<T> {
        let h = &self.src.hint;
        let tr = self.t - self.r;
        let mut cuts: Vec<T> = h.v_lines.clone();
        for &c in &h.u_lines {
            cuts.push(-c);
        }
        for &b in &h.rho_lines {
            cuts.push(b);
            cuts.push(tr + b.mul_f64(2.0));
        }
        if let Some((s0, s1)) = h.strip {
            cuts.extend([s0, s1, -s0, -s1]);
        }
        if let Some(um) = h.u_max {
            cuts.push(-um);
        }
        cuts.retain(|c| *c > v_lo && *c < v_hi);
        cuts
    }

    fn inner_range(&self, v: T, in_strip: bool) -> Option<(T, T)> {
        let h = &self.src.hint;
        let mut lo = -v;
        let mut hi = self.t - self.r;
        if let Some(um) = h.u_max {
            hi = hi.min(um);
        }
        if let Some((s0, s1)) = h.strip {
            if !in_strip {
                lo = lo.max(s0);
                hi = hi.min(s1);
            }
        }
        (hi > lo).then_some((lo, hi))
    }

    /// `(int f, int |f|)` over the inner `u` range at fixed `v`.
    fn inner(&self, v: T, in_strip: bool, rule: &QuadratureRule<T>) -> (T, T) {
        let Some((lo, hi)) = self.inner_range(v, in_strip) else {
            return (T::zero(), T::zero());
        };
        let h = &self.src.hint;
        let mut cuts: Vec<T> = h.u_lines.clone();
        for &b in &h.rho_lines {
            cuts.push(v - b.mul_f64(2.0));
        }
        if let Some((s0, s1)) = h.strip {
            cuts.push(s0);
            cuts.push(s1);
        }
        let mut sum = T::zero();
        let mut abs = T::zero();
        for (a, b) in panels(lo, hi, &cuts, h.scale, self.growth) {
            for (u, w) in rule.mapped(a, b) {
                let f = self.src.eval(u, v);
                if f == T::zero() {
                    continue;
                }
                let val = f * kernel(self.l, self.t, self.r, u, v) * w;
                sum += val;
                abs += val.abs();
            }
        }
        (sum, abs)
    }

    fn integrate(&self, rule: &QuadratureRule<T>) -> (T, T) {
        let h = &self.src.hint;
        let mut v_lo = (self.t - self.r).abs();
        let v_hi = self.t + self.r;
        if let Some(vm) = h.v_min {
            v_lo = v_lo.max(vm);
        }
        if !(v_hi > v_lo) {
            return (T::zero(), T::zero());
        }
        let cuts = self.outer_cuts(v_lo, v_hi);
        let mut sum = T::zero();
        let mut abs = T::zero();
        for (a, b) in panels(v_lo, v_hi, &cuts, h.scale, self.growth) {
            let mid = (a + b).mul_f64(0.5);
            let in_strip = h.strip.is_none_or(|(s0, s1)| mid > s0 && mid < s1);
            for (v, w) in rule.mapped(a, b) {
                let (s, ab) = self.inner(v, in_strip, rule);
                sum += s * w;
                abs += ab * w;
            }
        }
        (sum, abs)
    }
}

/// `phi(t, r)` solving `box phi = F` with zero data in `d = 2l + 3`.
pub fn duhamel_eval<T: Real>(src: &SourceField<'_, T>, t: T, r: T, l: u32, opts: &DuhamelOptions) -> Result<T> {
    if !(r >= T::from_f64(opts.r_min)) || !(r > T::zero()) {
        return Err(Error::InvalidArgument(format!("Duhamel evaluation at r = {r} below r_min = {}", opts.r_min)));
    }
    if opts.quad_n < 8 {
        return Err(Error::InvalidArgument(format!("quad_n = {} must be at least 8", opts.quad_n)));
    }
    let integ = Integrator { src, t, r, l, growth: opts.growth };
    let pref = T::one() / (T::from_f64(2f64.powi(l as i32 + 3)) * r.powi(l as i32 + 1));
    let coarse_rule = gauss_legendre::<T>(opts.quad_n);
    let (coarse, _) = integ.integrate(&coarse_rule);
    if !opts.check {
        return Ok(coarse * pref);
    }
    let fine_rule = gauss_legendre::<T>(2 * opts.quad_n);
    let (fine, abs) = integ.integrate(&fine_rule);
    let change = (fine - coarse).abs();
    let allowed = abs.mul_f64(opts.tolerance);
    if change > allowed {
        let rel = if abs > T::zero() { (change / abs).to_f64() } else { f64::INFINITY };
        return Err(Error::QuadratureNonConvergence { change: rel, tolerance: opts.tolerance });
    }
    Ok(fine * pref)
}

/// A list of `(t, r)` points with the value of one iterate at each.
#[derive(Debug, Clone)]
pub struct IterateTable<T> {
    /// Power of the small parameter the iterate multiplies.
    pub order: u32,
    pub model: ModelSpec,
    pub points: Vec<(T, T)>,
    pub values: Vec<T>,
}

impl<T: Real> IterateTable<T> {
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# order: {}", self.order);
        let _ = writeln!(s, "# l: {}", self.model.l);
        let _ = writeln!(s, "# precision: {}", T::PRECISION.as_str());
        let _ = writeln!(s, "t,r,phi_{}", self.order);
        for ((t, r), v) in self.points.iter().zip(&self.values) {
            let _ = writeln!(s, "{},{},{}", t.to_full_string(), r.to_full_string(), v.to_full_string());
        }
        s
    }
}

fn free_hint<T: Real>(w: &FreeWave<T>) -> SupportHint<T> {
    let (u0, u1) = w.profile().support();
    SupportHint {
        u_max: Some(u1),
        v_min: Some(u0),
        strip: Some((u0, u1)),
        u_lines: vec![u0, u1],
        v_lines: vec![u0, u1],
        rho_lines: vec![],
        scale: (u1 - u0).mul_f64(0.5),
    }
}

fn potential_rho_lines<T: Real>(model: &ModelSpec) -> Vec<T> {
    match &model.potential {
        Some(v) if v.inner_form == InnerForm::ConstantPlateau => vec![T::from_f64(v.cutoff)],
        _ => vec![],
    }
}

/// Source `-V psi_1` with `psi_1 = eps phi_0` the free wave.
pub fn linear_first_source<'a, T: Real>(model: &'a ModelSpec, w: &'a FreeWave<T>) -> SourceField<'a, T> {
    let eps = T::from_f64(model.data_amplitude);
    let mut hint = free_hint(w);
    hint.rho_lines = potential_rho_lines(model);
    SourceField::new(
        move |u, v| {
            let phi0 = w.eval_null(u, v);
            if phi0 == T::zero() {
                return T::zero();
            }
            let rho = (v - u).mul_f64(0.5);
            -model.potential_at(rho) * eps * phi0
        },
        hint,
    )
}

/// Beyond this retarded time the first linear iterate vanishes identically
/// when the exterior potential is an exact inverse power with odd
/// `alpha <= 2l + 1`.
pub fn anomalous_u_cut<T: Real>(model: &ModelSpec, w: &FreeWave<T>) -> Option<T> {
    let v = model.potential.as_ref()?;
    if v.inner_form != InnerForm::ConstantPlateau || !v.is_anomalous(model.l) {
        return None;
    }
    let (_, u1) = w.profile().support();
    Some(u1 + T::from_f64(2.0 * v.cutoff))
}

fn inner_opts(opts: &DuhamelOptions) -> DuhamelOptions {
    opts.unchecked(opts.quad_n * 3 / 2)
}

/// Source `-V psi` where `psi` is the first linear iterate, evaluated by a
/// nested Duhamel integral at every node.
pub fn linear_second_source<'a, T: Real>(
    model: &'a ModelSpec,
    first: &'a SourceField<'a, T>,
    w: &'a FreeWave<T>,
    opts: &DuhamelOptions,
) -> SourceField<'a, T> {
    let (u0, _) = w.profile().support();
    let inner = inner_opts(opts);
    let l = model.l;
    let u_cut = anomalous_u_cut(model, w);
    let mut hint = SupportHint::unbounded(first.hint.scale);
    hint.v_min = Some(u0);
    hint.u_max = u_cut;
    hint.rho_lines = potential_rho_lines(model);
    hint.u_lines = first.hint.u_lines.clone();
    hint.v_lines = first.hint.v_lines.clone();
    if let Some(c) = u_cut {
        hint.u_lines.push(c);
    }
    SourceField::new(
        move |u, v| {
            let rho = (v - u).mul_f64(0.5);
            if !(rho > T::zero()) {
                return T::zero();
            }
            let tau = (u + v).mul_f64(0.5);
            let r_eval = rho.max(T::from_f64(inner.r_min));
            let psi = duhamel_eval(first, tau, r_eval, l, &inner).unwrap_or(T::zero());
            -model.potential_at(rho) * psi
        },
        hint,
    )
}

/// `-sum coeff rho^w psi_1^p` over the terms of power `p`.
fn power_part<T: Real>(model: &ModelSpec, p: u32, rho: T, psi1: T) -> T {
    model.terms.iter().filter(|t| t.power == p).fold(T::zero(), |acc, t| acc - t.eval(rho, psi1))
}

/// Lowest nonlinear power of the model.
pub fn leading_power(model: &ModelSpec) -> Option<u32> {
    model.terms.iter().map(|t| t.power).min()
}

/// Source of the first nonlinear iterate, `-sum coeff rho^w (eps phi_0)^p`
/// over the terms of lowest power.
pub fn nonlinear_first_source<'a, T: Real>(model: &'a ModelSpec, w: &'a FreeWave<T>) -> Result<SourceField<'a, T>> {
    let p = leading_power(model).ok_or_else(|| {
        Error::UnsupportedModel("nonlinear iterate requested for a model without nonlinear terms".into())
    })?;
    let eps = T::from_f64(model.data_amplitude);
    Ok(SourceField::new(
        move |u, v| {
            let phi0 = w.eval_null(u, v);
            if phi0 == T::zero() {
                return T::zero();
            }
            power_part(model, p, (v - u).mul_f64(0.5), eps * phi0)
        },
        free_hint(w),
    ))
}

/// Source of the `eps^3` iterate when the lowest power is 2:
/// `-2 sum_{p=2} coeff rho^w psi_1 psi_2 - sum_{p=3} coeff rho^w psi_1^3`.
pub fn nonlinear_second_source<'a, T: Real>(
    model: &'a ModelSpec,
    first: &'a SourceField<'a, T>,
    w: &'a FreeWave<T>,
    opts: &DuhamelOptions,
) -> Result<SourceField<'a, T>> {
    if leading_power(model) != Some(2) {
        return Err(Error::UnsupportedModel(
            "the second nonlinear stage is defined only for models whose lowest power is 2".into(),
        ));
    }
    let eps = T::from_f64(model.data_amplitude);
    let inner = inner_opts(opts);
    let l = model.l;
    Ok(SourceField::new(
        move |u, v| {
            let phi0 = w.eval_null(u, v);
            if phi0 == T::zero() {
                return T::zero();
            }
            let psi1 = eps * phi0;
            let rho = (v - u).mul_f64(0.5);
            let tau = (u + v).mul_f64(0.5);
            let r_eval = rho.max(T::from_f64(inner.r_min));
            let psi2 = duhamel_eval(first, tau, r_eval, l, &inner).unwrap_or(T::zero());
            let quad: T = model.terms.iter().filter(|t| t.power == 2).fold(T::zero(), |acc, t| {
                acc - (T::from_f64(2.0 * t.coeff) * rho.powi(t.radial_weight as i32) * psi1 * psi2)
            });
            quad + power_part(model, 3, rho, psi1)
        },
        free_hint(w),
    ))
}

fn evaluate_all<T: Real>(src: &SourceField<'_, T>, l: u32, points: &[(T, T)], opts: &DuhamelOptions) -> Result<Vec<T>> {
    points.par_iter().map(|&(t, r)| duhamel_eval(src, t, r, l, opts)).collect()
}

/// Linear iterates: `k = 1` gives the `O(lambda)` correction, `k = 2` the
/// `O(lambda^2)` one.
pub fn iterate_linear<T: Real>(
    model: &ModelSpec,
    w: &FreeWave<T>,
    k: u32,
    points: &[(T, T)],
    opts: &DuhamelOptions,
) -> Result<IterateTable<T>> {
    check_free_wave(model, w)?;
    if model.potential.is_none() {
        return Err(Error::UnsupportedModel("linear iterates need a potential".into()));
    }
    let first = linear_first_source(model, w);
    let values = match k {
        1 => evaluate_all(&first, model.l, points, opts)?,
        2 => {
            let second = linear_second_source(model, &first, w, opts);
            evaluate_all(&second, model.l, points, opts)?
        }
        _ => return Err(Error::InvalidArgument(format!("linear iterate order {k} is not 1 or 2"))),
    };
    Ok(IterateTable { order: k, model: model.clone(), points: points.to_vec(), values })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    First,
    Second,
}

/// Nonlinear iterates. The first stage is the `eps^p` correction for the
/// lowest power `p`; the second is the `eps^3` correction of models whose
/// lowest power is 2.
pub fn iterate_nonlinear<T: Real>(
    model: &ModelSpec,
    w: &FreeWave<T>,
    stage: Stage,
    points: &[(T, T)],
    opts: &DuhamelOptions,
) -> Result<IterateTable<T>> {
    check_free_wave(model, w)?;
    let first = nonlinear_first_source(model, w)?;
    let p = leading_power(model).unwrap_or(0);
    let (order, values) = match stage {
        Stage::First => (p, evaluate_all(&first, model.l, points, opts)?),
        Stage::Second => {
            let second = nonlinear_second_source(model, &first, w, opts)?;
            (3, evaluate_all(&second, model.l, points, opts)?)
        }
    };
    Ok(IterateTable { order, model: model.clone(), points: points.to_vec(), values })
}

fn check_free_wave<T: Real>(model: &ModelSpec, w: &FreeWave<T>) -> Result<()> {
    if w.l() != model.l {
        return Err(Error::InvalidArgument(format!("free wave has l = {} but the model has l = {}", w.l(), model.l)));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{preset, Preset};
    use crate::numerics::legendre_p;
    use crate::profiles::Profile;
    use std::sync::Mutex;

    fn opts() -> DuhamelOptions {
        DuhamelOptions::for_precision::<f64>()
    }

    #[test]
    fn kernel_matches_legendre() {
        let (t, r) = (3.0, 1.2);
        for l in 0..6 {
            for &(u, v) in &[(0.5, 2.0), (-1.0, 4.1), (1.7, 1.9)] {
                let mu = kernel_mu(t, r, u, v);
                let expect = (v - u).powi(l as i32 + 1) * legendre_p(l, mu);
                let got = kernel(l, t, r, u, v);
                assert!((got - expect).abs() < 1e-12 * (1.0 + expect.abs()), "l={l}");
            }
        }
    }

    #[test]
    fn zero_source_gives_zero() {
        let src = SourceField::<f64>::zero(0.5);
        assert_eq!(duhamel_eval(&src, 3.0, 1.0, 1, &opts()).unwrap(), 0.0);
    }

    #[test]
    fn rejects_small_radius_and_few_points() {
        let src = SourceField::<f64>::zero(0.5);
        assert!(duhamel_eval(&src, 3.0, 0.0, 0, &opts()).is_err());
        let few = DuhamelOptions { quad_n: 4, ..opts() };
        assert!(duhamel_eval(&src, 3.0, 1.0, 0, &few).is_err());
    }

    // int_{v_a}^{v_b} int_{u_a}^{u_b} (v - u) du dv in closed form
    fn rect_moment(ua: f64, ub: f64, va: f64, vb: f64) -> f64 {
        let du = ub - ua;
        let dv = vb - va;
        0.5 * (vb * vb - va * va) * du - 0.5 * (ub * ub - ua * ua) * dv
    }

    #[test]
    fn unit_source_on_null_rectangle_l0() {
        // F = 1 on u in [0.2, 0.7], v in [1.1, 1.9]; the evaluation point sees
        // the rectangle clipped to u <= t - r and |t - r| <= v <= t + r
        let (ua, ub, va, vb) = (0.2, 0.7, 1.1, 1.9);
        let src = SourceField::new(
            move |u: f64, v: f64| if u >= ua && u <= ub && v >= va && v <= vb { 1.0 } else { 0.0 },
            SupportHint {
                u_max: Some(ub),
                v_min: Some(va),
                strip: None,
                u_lines: vec![ua, ub],
                v_lines: vec![va, vb],
                rho_lines: vec![],
                scale: 0.2,
            },
        );
        for &(t, r) in &[(2.0, 1.0), (1.6, 1.1), (1.3, 0.8)] {
            let ub_c = ub.min(t - r);
            let va_c = va.max((t - r).abs());
            let vb_c = vb.min(t + r);
            let expect = if ub_c > ua && vb_c > va_c { rect_moment(ua, ub_c, va_c, vb_c) / (8.0 * r) } else { 0.0 };
            let got = duhamel_eval(&src, t, r, 0, &opts()).unwrap();
            assert!((got - expect).abs() < 1e-13, "t={t} r={r}: {got} vs {expect}");
        }
    }

    #[test]
    fn mu_stays_in_range_at_all_nodes() {
        let mut state = 99u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..20 {
            let t = 0.2 + 8.0 * next();
            let r = 0.05 + 5.0 * next();
            let worst = Mutex::new(0.0f64);
            let src = SourceField::new(
                |u: f64, v: f64| {
                    let mu = kernel_mu(t, r, u, v);
                    let excess = mu.abs() - 1.0;
                    let mut g = worst.lock().unwrap();
                    *g = g.max(excess);
                    1.0
                },
                SupportHint::unbounded(0.5),
            );
            duhamel_eval(&src, t, r, 2, &DuhamelOptions { check: false, ..opts() }).unwrap();
            let worst = *worst.lock().unwrap();
            assert!(worst <= 1e-12, "t={t} r={r}: mu exceeds 1 by {worst}");
        }
    }

    fn linear(l: u32, alpha: f64, lambda: f64) -> ModelSpec {
        preset(Preset::Linear { l, alpha, lambda }).unwrap()
    }

    #[test]
    fn first_linear_iterate_is_linear_in_lambda() {
        let w = FreeWave::new(Profile::standard(), 0).unwrap();
        let pts = [(6.0, 1.5), (12.0, 2.0)];
        let a = iterate_linear(&linear(0, 3.0, 0.1), &w, 1, &pts, &opts()).unwrap();
        let b = iterate_linear(&linear(0, 3.0, 0.3), &w, 1, &pts, &opts()).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((3.0 * x - y).abs() < 1e-14 * y.abs().max(1e-300));
        }
    }

    #[test]
    fn first_nonlinear_iterate_is_homogeneous() {
        let w = FreeWave::new(Profile::standard(), 0).unwrap();
        let pts = [(5.0, 1.0)];
        let m1 = preset(Preset::Power { l: 0, p: 3, epsilon: 0.05 }).unwrap();
        let m2 = preset(Preset::Power { l: 0, p: 3, epsilon: 0.1 }).unwrap();
        let a = iterate_nonlinear(&m1, &w, Stage::First, &pts, &opts()).unwrap();
        let b = iterate_nonlinear(&m2, &w, Stage::First, &pts, &opts()).unwrap();
        assert_eq!(a.order, 3);
        assert!((8.0 * a.values[0] - b.values[0]).abs() < 1e-13 * b.values[0].abs());
    }

    #[test]
    fn unsupported_requests() {
        let w = FreeWave::new(Profile::standard(), 0).unwrap();
        let free = ModelSpec::free(0);
        assert!(iterate_linear(&free, &w, 1, &[(1.0, 1.0)], &opts()).is_err());
        assert!(iterate_nonlinear(&free, &w, Stage::First, &[(1.0, 1.0)], &opts()).is_err());
        assert!(iterate_linear(&linear(0, 3.0, 0.1), &w, 3, &[(1.0, 1.0)], &opts()).is_err());
        let cubic = preset(Preset::Power { l: 0, p: 3, epsilon: 0.05 }).unwrap();
        assert!(iterate_nonlinear(&cubic, &w, Stage::Second, &[(1.0, 1.0)], &opts()).is_err());
        let w1 = FreeWave::new(Profile::standard(), 1).unwrap();
        assert!(iterate_linear(&linear(0, 3.0, 0.1), &w1, 1, &[(1.0, 1.0)], &opts()).is_err());
    }

    #[test]
    fn graded_panels_cover_interval() {
        let mut out = Vec::new();
        graded_panels(0.0, 100.0, 0.5, 2.0, &mut out);
        assert_eq!(out.first().unwrap().0, 0.0);
        assert_eq!(out.last().unwrap().1, 100.0);
        for w in out.windows(2) {
            assert_eq!(w[0].1, w[1].0);
        }
        assert!(out.len() < 20);
    }

    #[test]
    fn csv_layout() {
        let table =
            IterateTable { order: 1, model: ModelSpec::free(0), points: vec![(1.0f64, 2.0)], values: vec![0.5] };
        let csv = table.to_csv();
        assert!(csv.contains("t,r,phi_1\n"));
        assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 2);
    }
}
