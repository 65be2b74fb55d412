//! Decay exponents, amplitudes and closed-form tail predictions.

use std::fmt::{self, Write as _};

use crate::error::{Error, Result};
use crate::models::{InnerForm, ModelSpec};
use crate::numerics::{double_factorial, falling_factorial, rising_factorial, Real};
use crate::perturb::leading_power;
use crate::profiles::Profile;

/// Where a series came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Evolver,
    Duhamel,
    Freewave,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Evolver => "evolver",
            Provenance::Duhamel => "duhamel",
            Provenance::Freewave => "freewave",
        }
    }
}

/// Samples `(t, value)` at a fixed radius, strictly increasing in `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    samples: Vec<(f64, f64)>,
    pub r_obs: f64,
    pub provenance: Provenance,
}

impl TimeSeries {
    pub fn from_samples(samples: Vec<(f64, f64)>, r_obs: f64, provenance: Provenance) -> Result<Self> {
        if let Some(bad) = samples.iter().find(|(t, v)| !t.is_finite() || v.is_nan()) {
            return Err(Error::InvalidArgument(format!("non-finite sample ({}, {})", bad.0, bad.1)));
        }
        if samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::InvalidArgument("sample times must be strictly increasing".into()));
        }
        Ok(TimeSeries { samples, r_obs, provenance })
    }

    /// Samples `f(t)` at the given times.
    pub fn from_fn(times: &[f64], r_obs: f64, provenance: Provenance, f: impl Fn(f64) -> f64) -> Result<Self> {
        TimeSeries::from_samples(times.iter().map(|&t| (t, f(t))).collect(), r_obs, provenance)
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn t_range(&self) -> Option<(f64, f64)> {
        Some((self.samples.first()?.0, self.samples.last()?.0))
    }

    /// Samples with `t_lo <= t <= t_hi`.
    pub fn window(&self, t_lo: f64, t_hi: f64) -> TimeSeries {
        TimeSeries {
            samples: self.samples.iter().copied().filter(|(t, _)| *t >= t_lo && *t <= t_hi).collect(),
            r_obs: self.r_obs,
            provenance: self.provenance,
        }
    }

    /// Largest `|value|`.
    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, (_, v)| m.max(v.abs()))
    }

    /// CSV with `# key: value` comment lines followed by `t,phi` rows.
    pub fn to_csv(&self, meta: &[(String, String)]) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# r_obs: {}", self.r_obs);
        let _ = writeln!(s, "# provenance: {}", self.provenance.as_str());
        for (k, v) in meta {
            let _ = writeln!(s, "# {k}: {v}");
        }
        s.push_str("t,phi\n");
        for (t, v) in &self.samples {
            let _ = writeln!(s, "{t:.17e},{v:.17e}");
        }
        s
    }
}

fn lagrange4(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let mut acc = 0.0;
    for i in 0..xs.len() {
        let mut li = 1.0;
        for j in 0..xs.len() {
            if i != j {
                li *= (x - xs[j]) / (xs[i] - xs[j]);
            }
        }
        acc += li * ys[i];
    }
    acc
}

const SLOPE_HALF_WIDTH: f64 = 0.025;

/// `gamma(t) = -d ln|phi| / d ln t`, by interpolating `ln|phi|` onto a grid
/// uniform in `ln t` and taking local least-squares slopes over a window of
/// `+-0.025` in `ln t`.
///
/// Samples at `t <= 0` are ignored. If the series changes sign, the error
/// carries the trailing sign-definite subwindow.
pub fn local_power_index(s: &TimeSeries) -> Result<TimeSeries> {
    let pts: Vec<(f64, f64)> = s.samples.iter().copied().filter(|(t, _)| *t > 0.0).collect();
    if pts.len() < 8 {
        return Err(Error::InsufficientData(format!("{} positive-time samples; need at least 8", pts.len())));
    }
    let sign = |v: f64| {
        if v > 0.0 {
            1
        } else if v < 0.0 {
            -1
        } else {
            0
        }
    };
    let last_sign = sign(pts[pts.len() - 1].1);
    if let Some(k) = pts.iter().rposition(|(_, v)| sign(*v) != last_sign || last_sign == 0) {
        let t_hi = pts[pts.len() - 1].0;
        let t_lo = pts.get(k + 1).map_or(t_hi, |p| p.0);
        return Err(Error::SignChange { t_lo, t_hi });
    }
    let x: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = pts.iter().map(|p| p.1.abs().ln()).collect();
    let m = pts.len().min(400);
    let (x0, x1) = (x[0], x[x.len() - 1]);
    let dx = (x1 - x0) / (m - 1) as f64;
    let mut cursor = 0usize;
    let resampled: Vec<f64> = (0..m)
        .map(|k| {
            let xk = if k == m - 1 { x1 } else { x0 + dx * k as f64 };
            while cursor + 1 < x.len() && x[cursor + 1] < xk {
                cursor += 1;
            }
            let start = cursor.saturating_sub(1).min(x.len() - 4);
            lagrange4(&x[start..start + 4], &y[start..start + 4], xk)
        })
        .collect();
    // least-squares slope over +-SLOPE_HALF_WIDTH in ln t
    let q = ((SLOPE_HALF_WIDTH / dx).ceil() as usize).max(2);
    let gamma: Vec<(f64, f64)> = (0..m)
        .map(|k| {
            let lo = k.saturating_sub(q);
            let hi = (k + q).min(m - 1);
            let n = (hi - lo + 1) as f64;
            let xm = (lo..=hi).map(|j| j as f64).sum::<f64>() / n;
            let ym = resampled[lo..=hi].iter().sum::<f64>() / n;
            let (mut sxy, mut sxx) = (0.0, 0.0);
            for j in lo..=hi {
                let dxj = j as f64 - xm;
                sxy += dxj * (resampled[j] - ym);
                sxx += dxj * dxj;
            }
            ((x0 + dx * k as f64).exp(), -sxy / (sxx * dx))
        })
        .collect();
    TimeSeries::from_samples(gamma, s.r_obs, s.provenance)
}

/// Constant stretch at the end of a `gamma(t)` series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plateau {
    pub gamma: f64,
    pub half_range: f64,
    pub t_lo: f64,
    pub t_hi: f64,
}

/// Plateau over the final quarter (in `ln t`) of the series, if the relative
/// variation there is below `max_variation`.
pub fn detect_plateau(gamma: &TimeSeries, max_variation: f64) -> Option<Plateau> {
    let (t0, t1) = gamma.t_range()?;
    if !(t0 > 0.0) {
        return None;
    }
    let cut = (t0.ln() + 0.75 * (t1.ln() - t0.ln())).exp();
    let tail: Vec<f64> = gamma.samples.iter().filter(|(t, _)| *t >= cut * (1.0 - 1e-12)).map(|p| p.1).collect();
    if tail.len() < 3 {
        return None;
    }
    let lo = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = tail.iter().sum::<f64>() / tail.len() as f64;
    let variation = (hi - lo) / mean.abs();
    (variation < max_variation).then_some(Plateau { gamma: mean, half_range: 0.5 * (hi - lo), t_lo: cut, t_hi: t1 })
}

/// Whether `gamma(t)` approaches its last value without turning back by more
/// than `noise` (relative) over the given window.
pub fn is_monotone(gamma: &TimeSeries, t_lo: f64, noise: f64) -> bool {
    let g: Vec<f64> = gamma.samples.iter().filter(|(t, _)| *t >= t_lo).map(|p| p.1).collect();
    if g.len() < 3 {
        return true;
    }
    let scale = g[g.len() - 1].abs().max(1e-300);
    let up = g.windows(2).all(|w| w[1] >= w[0] - noise * scale);
    let down = g.windows(2).all(|w| w[1] <= w[0] + noise * scale);
    up || down
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeFit {
    pub amplitude: f64,
    pub uncertainty: f64,
    pub t_lo: f64,
    pub t_hi: f64,
    /// `uncertainty <= 20%` of `|amplitude|`.
    pub conclusive: bool,
}

/// Mean of `t^gamma phi(t)` over the last decade of the series (or the whole
/// series if it spans less), with the half-range as uncertainty.
pub fn fit_amplitude(s: &TimeSeries, gamma: f64) -> Result<AmplitudeFit> {
    let (_, t_hi) = s.t_range().ok_or_else(|| Error::InsufficientData("empty series".into()))?;
    let t_lo = t_hi / 10.0;
    let vals: Vec<(f64, f64)> =
        s.samples.iter().filter(|(t, _)| *t >= t_lo && *t > 0.0).map(|&(t, v)| (t, t.powf(gamma) * v)).collect();
    if vals.len() < 2 {
        return Err(Error::InsufficientData("fewer than two samples in the amplitude window".into()));
    }
    let mean = vals.iter().map(|p| p.1).sum::<f64>() / vals.len() as f64;
    let lo = vals.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let hi = vals.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let uncertainty = 0.5 * (hi - lo);
    Ok(AmplitudeFit {
        amplitude: mean,
        uncertainty,
        t_lo: vals[0].0,
        t_hi,
        conclusive: uncertainty <= 0.2 * mean.abs(),
    })
}

/// `C(l, alpha) = -2^{alpha+2l-1} / (2l+1)!! ((alpha-3)/2)^{falling l} (alpha/2)^{rising l}`.
pub fn linear_tail_coefficient(l: u32, alpha: f64) -> f64 {
    let df: f64 = double_factorial(2 * l as i64 + 1).expect("odd");
    -(2f64.powf(alpha + 2.0 * l as f64 - 1.0)) / df
        * falling_factorial((alpha - 3.0) / 2.0, l)
        * rising_factorial(alpha / 2.0, l)
}

/// `C~(l, p) = (-1)^l 2^{(l+1)(p+1)-1} / (2l+1)!! [(l+1)(p-1)-2]^{falling l}`.
pub fn nonlinear_tail_coefficient(l: u32, p: u32) -> f64 {
    let df: f64 = double_factorial(2 * l as i64 + 1).expect("odd");
    let sign = if l.is_multiple_of(2) { 1.0 } else { -1.0 };
    let x = ((l + 1) * (p - 1)) as f64 - 2.0;
    sign * 2f64.powi(((l + 1) * (p + 1) - 1) as i32) / df * falling_factorial(x, l)
}

/// Leading late-time behaviour `coefficient / t^gamma`.
#[derive(Debug, Clone, PartialEq)]
pub struct TailPrediction {
    pub gamma: f64,
    /// Absent when no closed form is available.
    pub coefficient: Option<f64>,
    /// Power of the small parameter (`lambda` or `epsilon`) the tail carries.
    pub order_in_small_param: u32,
    pub anomalous: bool,
    pub mechanism: String,
}

fn linear_candidate<T: Real>(model: &ModelSpec, prof: &Profile<T>) -> Result<Option<TailPrediction>> {
    let Some(v) = &model.potential else { return Ok(None) };
    let l = model.l;
    if v.is_anomalous(l) {
        if v.inner_form != InnerForm::ConstantPlateau {
            return Err(Error::UnsupportedModel(
                "anomalous alpha needs an exact inverse-power exterior (constant_plateau)".into(),
            ));
        }
        return Ok(Some(TailPrediction {
            gamma: 2.0 * (v.alpha + l as f64 - 1.0),
            coefficient: None,
            order_in_small_param: 2,
            anomalous: true,
            mechanism: "second-order linear (anomalous alpha)".into(),
        }));
    }
    let a = prof.moment_a().to_f64();
    Ok(Some(TailPrediction {
        gamma: v.alpha + 2.0 * l as f64,
        coefficient: Some(model.data_amplitude * v.lambda * linear_tail_coefficient(l, v.alpha) * a),
        order_in_small_param: 1,
        anomalous: false,
        mechanism: "first-order linear".into(),
    }))
}

fn nonlinear_candidate<T: Real>(model: &ModelSpec, prof: &Profile<T>) -> Result<Option<TailPrediction>> {
    if model.terms.is_empty() {
        return Ok(None);
    }
    let l = model.l;
    let eps = model.data_amplitude;
    if model.is_yang_mills() {
        return Ok(Some(TailPrediction {
            gamma: 4.0,
            coefficient: Some(eps.powi(3) * prof.moment_ym()?.to_f64()),
            order_in_small_param: 3,
            anomalous: true,
            mechanism: "Yang-Mills quadratic plus cubic".into(),
        }));
    }
    let p = leading_power(model).expect("nonempty");
    if model.terms.iter().any(|t| t.power != p || t.radial_weight != 0) {
        return Err(Error::UnsupportedModel(
            "tail prediction needs a single power with no radial weight (or the Yang-Mills preset)".into(),
        ));
    }
    let kappa: f64 = model.terms.iter().map(|t| t.coeff).sum();
    if p == 2 && l >= 1 {
        let c = prof.moment_c_anom(l)?.to_f64();
        return Ok(Some(TailPrediction {
            gamma: (3 * l + 1) as f64,
            coefficient: Some(kappa * kappa * eps.powi(3) * c),
            order_in_small_param: 3,
            anomalous: true,
            mechanism: "second-order quadratic (anomalous)".into(),
        }));
    }
    let at = prof.moment_atilde(l, p)?.to_f64();
    Ok(Some(TailPrediction {
        gamma: ((l + 1) * p) as f64 - 1.0,
        coefficient: Some(-kappa * eps.powi(p as i32) * nonlinear_tail_coefficient(l, p) * at),
        order_in_small_param: p,
        anomalous: false,
        mechanism: "first-order nonlinear".into(),
    }))
}

/// Closed-form prediction of the leading tail.
pub fn predict<T: Real>(model: &ModelSpec, prof: &Profile<T>) -> Result<TailPrediction> {
    let lin = linear_candidate(model, prof)?;
    let non = nonlinear_candidate(model, prof)?;
    match (lin, non) {
        (None, None) => Err(Error::UnsupportedModel("the free wave has no tail".into())),
        (Some(a), None) | (None, Some(a)) => Ok(a),
        (Some(a), Some(b)) => {
            if (a.gamma - b.gamma).abs() < 1e-12 {
                let coefficient = match (a.coefficient, b.coefficient) {
                    (Some(x), Some(y)) if a.order_in_small_param == b.order_in_small_param => Some(x + y),
                    _ => None,
                };
                Ok(TailPrediction {
                    gamma: a.gamma,
                    coefficient,
                    order_in_small_param: a.order_in_small_param.min(b.order_in_small_param),
                    anomalous: a.anomalous || b.anomalous,
                    mechanism: format!("{} and {} (equal rates)", a.mechanism, b.mechanism),
                })
            } else if a.gamma < b.gamma {
                Ok(a)
            } else {
                Ok(b)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative tolerance on the exponent.
    pub gamma: f64,
    /// Relative tolerance on the amplitude.
    pub coefficient: f64,
    /// Relative variation that still counts as a plateau.
    pub plateau: f64,
    pub check_coefficient: bool,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { gamma: 0.02, coefficient: 0.10, plateau: 0.01, check_coefficient: true }
    }
}

#[derive(Debug, Clone)]
pub struct TailReport {
    pub fitted_gamma: Option<(f64, f64)>,
    pub fitted_amplitude: Option<AmplitudeFit>,
    pub prediction: TailPrediction,
    pub verdict: Verdict,
    pub fit_window: (f64, f64),
    pub plateau: Option<Plateau>,
    pub monotone: Option<bool>,
    pub recommended_t_final: Option<f64>,
    pub notes: Vec<String>,
    pub gamma_series: Option<TimeSeries>,
}

/// Fits the series on `[t_lo, t_hi]` and checks it against `pred`.
pub fn compare(s: &TimeSeries, pred: &TailPrediction, tol: &Tolerances, window: (f64, f64)) -> TailReport {
    let mut report = TailReport {
        fitted_gamma: None,
        fitted_amplitude: None,
        prediction: pred.clone(),
        verdict: Verdict::Inconclusive,
        fit_window: window,
        plateau: None,
        monotone: None,
        recommended_t_final: None,
        notes: Vec::new(),
        gamma_series: None,
    };
    let win = s.window(window.0, window.1);
    let t_end = win.t_range().map_or(window.1, |r| r.1);
    let gamma = match local_power_index(&win) {
        Ok(g) => g,
        Err(Error::SignChange { t_lo, t_hi }) => {
            report.notes.push(format!("sign change in window; sign-definite tail only on [{t_lo}, {t_hi}]"));
            report.recommended_t_final = Some(2.0 * t_end);
            return report;
        }
        Err(e) => {
            report.notes.push(e.to_string());
            return report;
        }
    };
    let Some(plateau) = detect_plateau(&gamma, tol.plateau) else {
        report.notes.push("no plateau in the local power index".into());
        report.recommended_t_final = Some(2.0 * t_end);
        report.gamma_series = Some(gamma);
        return report;
    };
    report.monotone = Some(is_monotone(&gamma, window.0, 1e-3));
    report.plateau = Some(plateau);
    report.fitted_gamma = Some((plateau.gamma, plateau.half_range));
    report.gamma_series = Some(gamma);
    let gamma_ok = ((plateau.gamma - pred.gamma) / pred.gamma).abs() <= tol.gamma;
    let mut coeff_ok = true;
    if tol.check_coefficient {
        match pred.coefficient {
            Some(c) => match fit_amplitude(&win, pred.gamma) {
                Ok(fit) => {
                    report.fitted_amplitude = Some(fit);
                    if !fit.conclusive {
                        report.notes.push("amplitude not constant over the last decade".into());
                        report.recommended_t_final = Some(2.0 * t_end);
                        return report;
                    }
                    coeff_ok =
                        fit.amplitude.signum() == c.signum() && ((fit.amplitude - c) / c).abs() <= tol.coefficient;
                }
                Err(e) => {
                    report.notes.push(e.to_string());
                    return report;
                }
            },
            None => report.notes.push("no closed-form coefficient; rate checked only".into()),
        }
    }
    report.verdict = if gamma_ok && coeff_ok { Verdict::Pass } else { Verdict::Fail };
    report
}

impl TailReport {
    /// Key-value text, one `key = value` per line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let opt = |x: Option<f64>| x.map_or("none".to_string(), |v| format!("{v:.10e}"));
        let _ = writeln!(s, "verdict = {}", self.verdict);
        let _ = writeln!(s, "predicted_gamma = {}", self.prediction.gamma);
        let _ = writeln!(s, "predicted_coefficient = {}", opt(self.prediction.coefficient));
        let _ = writeln!(s, "order_in_small_param = {}", self.prediction.order_in_small_param);
        let _ = writeln!(s, "anomalous = {}", self.prediction.anomalous);
        let _ = writeln!(s, "mechanism = {}", self.prediction.mechanism);
        let _ = writeln!(s, "fit_window = {} {}", self.fit_window.0, self.fit_window.1);
        let _ = writeln!(s, "fitted_gamma = {}", opt(self.fitted_gamma.map(|g| g.0)));
        let _ = writeln!(s, "fitted_gamma_uncertainty = {}", opt(self.fitted_gamma.map(|g| g.1)));
        if let Some(p) = &self.plateau {
            let _ = writeln!(s, "plateau_window = {} {}", p.t_lo, p.t_hi);
        }
        if let Some(m) = self.monotone {
            let _ = writeln!(s, "monotone = {m}");
        }
        let _ = writeln!(s, "fitted_amplitude = {}", opt(self.fitted_amplitude.map(|a| a.amplitude)));
        let _ = writeln!(s, "fitted_amplitude_uncertainty = {}", opt(self.fitted_amplitude.map(|a| a.uncertainty)));
        if let Some(t) = self.recommended_t_final {
            let _ = writeln!(s, "recommended_t_final = {t}");
        }
        for n in &self.notes {
            let _ = writeln!(s, "note = {n}");
        }
        s
    }

    /// Two columns `ln t  gamma(t)`.
    pub fn gamma_data(&self) -> String {
        let mut s = String::from("# ln_t gamma\n");
        if let Some(g) = &self.gamma_series {
            for (t, v) in g.samples() {
                let _ = writeln!(s, "{:.10e} {:.10e}", t.ln(), v);
            }
        }
        s
    }
}
