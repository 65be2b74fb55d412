//! Evolution equations `d_t^2 phi = Delta_d phi - V phi - sum coeff r^w phi^p`
//! in `d = 2l + 3` dimensions, and the named presets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{pow_real, Real};

pub const DEFAULT_LAMBDA: f64 = 0.1;
pub const DEFAULT_EPSILON: f64 = 0.05;
pub const DEFAULT_CUTOFF: f64 = 1.0;

/// Shape of the potential inside the cutoff radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerForm {
    /// `V = lambda R^{-alpha}` for `r < R`.
    #[default]
    ConstantPlateau,
    /// `V = lambda (r^2 + R^2)^{-alpha/2}` everywhere.
    SmoothBlend,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub lambda: f64,
    pub alpha: f64,
    #[serde(default = "default_cutoff")]
    pub cutoff: f64,
    #[serde(default)]
    pub inner_form: InnerForm,
}

fn default_cutoff() -> f64 {
    DEFAULT_CUTOFF
}

impl PotentialSpec {
    pub fn new(lambda: f64, alpha: f64) -> Self {
        PotentialSpec { lambda, alpha, cutoff: DEFAULT_CUTOFF, inner_form: InnerForm::ConstantPlateau }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 2.0) {
            return Err(Error::InvalidArgument(format!("potential falloff alpha = {} must exceed 2", self.alpha)));
        }
        if !(self.cutoff > 0.0) {
            return Err(Error::InvalidArgument(format!("potential cutoff R = {} must be positive", self.cutoff)));
        }
        if !self.lambda.is_finite() {
            return Err(Error::InvalidArgument("potential coupling lambda is not finite".into()));
        }
        Ok(())
    }

    pub fn eval<T: Real>(&self, r: T) -> T {
        let lambda = T::from_f64(self.lambda);
        let cutoff = T::from_f64(self.cutoff);
        match self.inner_form {
            InnerForm::ConstantPlateau => lambda * pow_real(r.max(cutoff), -self.alpha),
            InnerForm::SmoothBlend => lambda * pow_real(r * r + cutoff * cutoff, -0.5 * self.alpha),
        }
    }

    /// Whether `alpha` is an odd integer not above `2l + 1`, where the
    /// first-order tail coefficient vanishes.
    pub fn is_anomalous(&self, l: u32) -> bool {
        let a = self.alpha;
        a.fract() == 0.0 && (a as i64) % 2 == 1 && a <= (2 * l + 1) as f64
    }
}

/// `coeff r^w phi^p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearTerm {
    pub coeff: f64,
    pub power: u32,
    #[serde(default)]
    pub radial_weight: u32,
}

impl NonlinearTerm {
    pub fn new(coeff: f64, power: u32, radial_weight: u32) -> Self {
        NonlinearTerm { coeff, power, radial_weight }
    }

    #[inline]
    pub fn eval<T: Real>(&self, r: T, phi: T) -> T {
        T::from_f64(self.coeff) * r.powi(self.radial_weight as i32) * phi.powi(self.power as i32)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub l: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub terms: Vec<NonlinearTerm>,
    pub data_amplitude: f64,
}

/// The named equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Preset {
    Free { l: u32 },
    Linear { l: u32, alpha: f64, lambda: f64 },
    Power { l: u32, p: u32, epsilon: f64 },
    Wavemap5 { epsilon: f64 },
    SkyrmePert { lambda: f64, epsilon: f64 },
    YangMills { epsilon: f64 },
    QuadraticAnomalous { l: u32, epsilon: f64 },
}

impl Preset {
    pub fn name(&self) -> &'static str {
        match self {
            Preset::Free { .. } => "free",
            Preset::Linear { .. } => "linear",
            Preset::Power { .. } => "power",
            Preset::Wavemap5 { .. } => "wavemap5",
            Preset::SkyrmePert { .. } => "skyrme_pert",
            Preset::YangMills { .. } => "yang_mills",
            Preset::QuadraticAnomalous { .. } => "quadratic_anomalous",
        }
    }
}

pub fn preset(p: Preset) -> Result<ModelSpec> {
    let spec = match p {
        Preset::Free { l } => ModelSpec::free(l),
        Preset::Linear { l, alpha, lambda } => {
            ModelSpec { l, potential: Some(PotentialSpec::new(lambda, alpha)), terms: vec![], data_amplitude: 1.0 }
        }
        // written so that the equation reads box phi = phi^p
        Preset::Power { l, p, epsilon } => {
            ModelSpec { l, potential: None, terms: vec![NonlinearTerm::new(-1.0, p, 0)], data_amplitude: epsilon }
        }
        Preset::Wavemap5 { epsilon } => ModelSpec {
            l: 1,
            potential: None,
            terms: vec![NonlinearTerm::new(4.0 / 3.0, 3, 0)],
            data_amplitude: epsilon,
        },
        Preset::SkyrmePert { lambda, epsilon } => ModelSpec {
            l: 1,
            potential: Some(PotentialSpec::new(lambda, 6.0)),
            terms: vec![NonlinearTerm::new(4.0 / 3.0, 3, 0)],
            data_amplitude: epsilon,
        },
        Preset::YangMills { epsilon } => ModelSpec {
            l: 1,
            potential: None,
            terms: vec![NonlinearTerm::new(3.0, 2, 0), NonlinearTerm::new(1.0, 3, 2)],
            data_amplitude: epsilon,
        },
        Preset::QuadraticAnomalous { l, epsilon } => {
            if l == 0 {
                return Err(Error::UnsupportedModel(
                    "quadratic_anomalous needs l >= 1; for l = 0 the quadratic tail is generic".into(),
                ));
            }
            ModelSpec { l, potential: None, terms: vec![NonlinearTerm::new(1.0, 2, 0)], data_amplitude: epsilon }
        }
    };
    spec.validate()?;
    Ok(spec)
}

impl ModelSpec {
    pub fn free(l: u32) -> Self {
        ModelSpec { l, potential: None, terms: vec![], data_amplitude: 1.0 }
    }

    pub fn dimension(&self) -> u32 {
        2 * self.l + 3
    }

    pub fn is_free(&self) -> bool {
        self.potential.is_none() && self.terms.is_empty()
    }

    pub fn is_linear(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(v) = &self.potential {
            v.validate()?;
        }
        for t in &self.terms {
            if t.power < 2 {
                return Err(Error::InvalidArgument(format!("nonlinear power {} must be at least 2", t.power)));
            }
            if !t.coeff.is_finite() {
                return Err(Error::InvalidArgument("nonlinear coefficient is not finite".into()));
            }
        }
        if !self.data_amplitude.is_finite() {
            return Err(Error::InvalidArgument("data amplitude is not finite".into()));
        }
        Ok(())
    }

    pub fn potential_at<T: Real>(&self, r: T) -> T {
        self.potential.as_ref().map_or(T::zero(), |v| v.eval(r))
    }

    /// `sum coeff r^w phi^p`.
    #[inline]
    pub fn nonlinearity<T: Real>(&self, r: T, phi: T) -> T {
        self.terms.iter().fold(T::zero(), |acc, t| acc + t.eval(r, phi))
    }

    /// `lap - V(r) phi - sum coeff r^w phi^p`.
    pub fn eval_rhs_pointwise<T: Real>(&self, r: T, phi: T, lap: T) -> T {
        lap - self.potential_at(r) * phi - self.nonlinearity(r, phi)
    }

    /// Whether the term list is exactly the reduced Yang-Mills nonlinearity
    /// `3 phi^2 + r^2 phi^3` in five dimensions.
    pub fn is_yang_mills(&self) -> bool {
        self.l == 1
            && self.potential.is_none()
            && self.terms.len() == 2
            && self.terms.contains(&NonlinearTerm::new(3.0, 2, 0))
            && self.terms.contains(&NonlinearTerm::new(1.0, 3, 2))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::DoubleDouble;
    use proptest::prelude::*;

    #[test]
    fn preset_examples() {
        let s = preset(Preset::SkyrmePert { lambda: DEFAULT_LAMBDA, epsilon: DEFAULT_EPSILON }).unwrap();
        assert_eq!(s.l, 1);
        assert_eq!(s.dimension(), 5);
        assert_eq!(s.potential.unwrap().alpha, 6.0);
        assert_eq!(s.terms[0].power, 3);

        let ym = preset(Preset::YangMills { epsilon: DEFAULT_EPSILON }).unwrap();
        assert!(ym.is_yang_mills());
        assert_eq!(ym.terms.len(), 2);

        let free = preset(Preset::Free { l: 0 }).unwrap();
        assert!(free.is_free());

        let wm = preset(Preset::Wavemap5 { epsilon: 0.1 }).unwrap();
        assert_eq!((wm.l, wm.terms[0]), (1, NonlinearTerm::new(4.0 / 3.0, 3, 0)));

        assert!(preset(Preset::QuadraticAnomalous { l: 0, epsilon: 0.05 }).is_err());
        let q = preset(Preset::QuadraticAnomalous { l: 2, epsilon: 0.05 }).unwrap();
        assert_eq!(q.terms, vec![NonlinearTerm::new(1.0, 2, 0)]);
    }

    #[test]
    fn rhs_examples() {
        let free = ModelSpec::free(0);
        assert_eq!(free.eval_rhs_pointwise(1.3, 0.4, 2.5), 2.5);
        let lin = preset(Preset::Linear { l: 0, alpha: 3.0, lambda: 0.1 }).unwrap();
        assert_eq!(lin.eval_rhs_pointwise(2.0, 0.0, 1.5), 1.5);
        let ym = preset(Preset::YangMills { epsilon: 0.05 }).unwrap();
        assert!((ym.eval_rhs_pointwise(1.0, 0.1, 0.0) + 0.031).abs() < 1e-15);
    }

    #[test]
    fn power_preset_reads_box_phi_equals_phi_p() {
        // d_t^2 phi - lap = phi^3
        let m = preset(Preset::Power { l: 0, p: 3, epsilon: 0.05 }).unwrap();
        assert_eq!(m.eval_rhs_pointwise(1.0, 0.5, 0.0), 0.125);
    }

    #[test]
    fn plateau_is_continuous_and_exact_outside() {
        let v = PotentialSpec { lambda: 0.3, alpha: 4.5, cutoff: 1.7, inner_form: InnerForm::ConstantPlateau };
        let below: f64 = v.eval(1.7 * (1.0 - 1e-15));
        let above: f64 = v.eval(1.7 * (1.0 + 1e-15));
        assert!((below - above).abs() < 1e-14);
        assert_eq!(v.eval(0.0f64), v.eval(1.7f64));
        let vd = v.eval(DoubleDouble::from_f64(0.2));
        assert!(vd.is_finite());
    }

    #[test]
    fn smooth_blend_matches_asymptotically() {
        let v = PotentialSpec { lambda: 0.1, alpha: 3.0, cutoff: 1.0, inner_form: InnerForm::SmoothBlend };
        let r: f64 = 1e3;
        assert!((v.eval(r) * r.powi(3) / 0.1 - 1.0).abs() < 1e-5);
    }

    #[test]
    fn anomalous_alpha_detection() {
        let odd = |a: f64, l: u32| PotentialSpec::new(0.1, a).is_anomalous(l);
        assert!(odd(3.0, 1));
        assert!(!odd(3.0, 0));
        assert!(odd(5.0, 2));
        assert!(!odd(4.0, 2));
        assert!(!odd(7.0, 2));
    }

    #[test]
    fn invalid_models_rejected() {
        let mut m = preset(Preset::Linear { l: 0, alpha: 3.0, lambda: 0.1 }).unwrap();
        m.potential.as_mut().unwrap().alpha = 2.0;
        assert!(m.validate().is_err());
        let bad = ModelSpec { l: 0, potential: None, terms: vec![NonlinearTerm::new(1.0, 1, 0)], data_amplitude: 1.0 };
        assert!(bad.validate().is_err());
    }

    fn all_presets() -> Vec<Preset> {
        vec![
            Preset::Free { l: 2 },
            Preset::Linear { l: 1, alpha: 4.0, lambda: 0.1 },
            Preset::Power { l: 0, p: 3, epsilon: 0.05 },
            Preset::Wavemap5 { epsilon: 0.05 },
            Preset::SkyrmePert { lambda: 0.1, epsilon: 0.05 },
            Preset::YangMills { epsilon: 0.05 },
            Preset::QuadraticAnomalous { l: 1, epsilon: 0.05 },
        ]
    }

    #[test]
    fn presets_round_trip_through_toml() {
        for p in all_presets() {
            let m = preset(p).unwrap();
            let text = toml::to_string(&m).unwrap();
            let back: ModelSpec = toml::from_str(&text).unwrap();
            assert_eq!(m, back, "{}", p.name());
        }
    }

    #[test]
    fn unknown_model_keys_rejected() {
        let err = toml::from_str::<ModelSpec>("l = 0\ndata_amplitude = 1.0\nalpa = 3.0\n").unwrap_err();
        assert!(err.to_string().contains("alpa"));
    }

    proptest! {
        #[test]
        fn exact_power_law_beyond_cutoff(lambda in 0.01f64..1.0, alpha in 2.1f64..9.0, cutoff in 0.2f64..3.0, x in 2.0f64..50.0) {
            let v = PotentialSpec { lambda, alpha, cutoff, inner_form: InnerForm::ConstantPlateau };
            let r = x * cutoff;
            prop_assert!((v.eval(r) * r.powf(alpha) / lambda - 1.0).abs() < 1e-13);
        }

        #[test]
        fn plateau_continuity(lambda in 0.01f64..1.0, alpha in 2.1f64..9.0, cutoff in 0.2f64..3.0) {
            let v = PotentialSpec { lambda, alpha, cutoff, inner_form: InnerForm::ConstantPlateau };
            let inside: f64 = v.eval(cutoff * 0.999_999_999);
            prop_assert!((inside - v.eval(cutoff)).abs() <= 1e-15 * inside.abs());
        }
    }
}
