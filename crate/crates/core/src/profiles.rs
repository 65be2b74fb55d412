//! The generator function `a(u)` of spherically symmetric free waves: a
//! compactly supported polynomial bump with exact derivatives and moments.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{falling_factorial, gauss_legendre, Real};

/// Serializable description of a polynomial bump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    pub u0: f64,
    pub u1: f64,
    pub m: u32,
    /// Raw multiplier in `amplitude (u-u0)^m (u1-u)^m`. When absent the bump
    /// is normalized to a maximum of `peak`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(default = "one")]
    pub peak: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for ProfileSpec {
    fn default() -> Self {
        ProfileSpec { u0: 0.0, u1: 2.0, m: 8, amplitude: None, peak: 1.0 }
    }
}

impl ProfileSpec {
    pub fn build<T: Real>(&self) -> Result<Profile<T>> {
        match self.amplitude {
            Some(a) => Profile::new(T::from_f64(self.u0), T::from_f64(self.u1), self.m, T::from_f64(a)),
            None => Profile::normalized(T::from_f64(self.u0), T::from_f64(self.u1), self.m, T::from_f64(self.peak)),
        }
    }
}

/// `a(u) = amplitude (u-u0)^m (u1-u)^m` on `[u0, u1]`, zero elsewhere.
#[derive(Debug, Clone)]
pub struct Profile<T> {
    u0: T,
    u1: T,
    m: u32,
    amplitude: T,
    // a((u0+u1)/2); the bump is evaluated in half-width units to keep the
    // powers of order one for large m
    peak: T,
    half_width: T,
    // deriv[k][j]: weight of x^{k-j} y^j in the k-th derivative, see
    // `derivative_unchecked`; scaled by half_width^{-k}
    deriv: Vec<Vec<T>>,
}

impl<T: Real> Profile<T> {
    pub fn new(u0: T, u1: T, m: u32, amplitude: T) -> Result<Self> {
        if !(u0 < u1) {
            return Err(Error::InvalidArgument(format!("profile support needs u0 < u1, got [{u0}, {u1}]")));
        }
        if m < 2 {
            return Err(Error::InvalidArgument("profile smoothness m must be at least 2".into()));
        }
        let half_width = (u1 - u0).mul_f64(0.5);
        let peak = amplitude * half_width.powi(2 * m as i32);
        let mf = T::from_f64(m as f64);
        let deriv = (0..=m)
            .map(|k| {
                let scale = T::one() / half_width.powi(k as i32);
                let mut binom = 1.0f64;
                (0..=k)
                    .map(|j| {
                        // C(k,j) D^j[x^m] D^{k-j}[y^m] with dy/du = -dx/du
                        let i = k - j;
                        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                        let c = falling_factorial(mf, j) * falling_factorial(mf, i) * scale;
                        let out = c.mul_f64(sign * binom);
                        binom = binom * (k - j) as f64 / (j + 1) as f64;
                        out
                    })
                    .collect()
            })
            .collect();
        Ok(Profile { u0, u1, m, amplitude, peak, half_width, deriv })
    }

    /// Bump whose maximum (at the midpoint) equals `peak`.
    pub fn normalized(u0: T, u1: T, m: u32, peak: T) -> Result<Self> {
        let mut p = Profile::new(u0, u1, m, T::one())?;
        p.amplitude = peak / p.half_width.powi(2 * m as i32);
        p.peak = peak;
        Ok(p)
    }

    /// `m = 8` on `[0, 2]` with unit maximum.
    pub fn standard() -> Self {
        Profile::normalized(T::zero(), T::from_f64(2.0), 8, T::one()).expect("valid default profile")
    }

    pub fn support(&self) -> (T, T) {
        (self.u0, self.u1)
    }

    pub fn smoothness(&self) -> u32 {
        self.m
    }

    pub fn amplitude(&self) -> T {
        self.amplitude
    }

    pub fn scaled(&self, factor: T) -> Self {
        let mut p = self.clone();
        p.amplitude *= factor;
        p.peak *= factor;
        p
    }

    /// `k`-th derivative of `a` at `u`; exact zero outside the support.
    pub fn eval_derivative(&self, k: u32, u: T) -> Result<T> {
        if k >= self.m {
            return Err(Error::DerivativeOrder { k, m: self.m });
        }
        Ok(self.derivative_unchecked(k, u))
    }

    /// Same as [`Self::eval_derivative`] for `k <= m`, without the order check.
    #[inline]
    pub(crate) fn derivative_unchecked(&self, k: u32, u: T) -> T {
        if !(u > self.u0 && u < self.u1) {
            return T::zero();
        }
        let x = (u - self.u0) / self.half_width;
        let y = (self.u1 - u) / self.half_width;
        let c = &self.deriv[k as usize];
        // (xy)^{m-k} sum_j c_j x^{k-j} y^j, Horner in x
        let mut acc = c[0];
        let mut yj = T::one();
        for cj in &c[1..] {
            yj *= y;
            acc = acc * x + *cj * yj;
        }
        acc * (x * y).powi((self.m - k) as i32) * self.peak
    }

    fn integrate_polynomial<F: Fn(T) -> T>(&self, degree: u32, f: F) -> T {
        let n = (degree as usize + 2) / 2 + 1;
        gauss_legendre::<T>(n).integrate(self.u0, self.u1, f)
    }

    /// `int a(u) du`.
    pub fn moment_a(&self) -> T {
        self.integrate_polynomial(2 * self.m, |u| self.derivative_unchecked(0, u))
    }

    /// `amplitude (u1-u0)^{2m+1} B(m+1, m+1)`, for cross-checking [`Self::moment_a`].
    pub fn moment_a_closed_form(&self) -> T {
        let m = self.m;
        // m! m! / (2m+1)! as a running product so large m does not overflow
        let beta = (1..=m).fold(T::one(), |acc, j| acc * T::from_f64(j as f64) / T::from_f64((m + j) as f64))
            / T::from_f64((2 * m + 1) as f64);
        self.amplitude * (self.u1 - self.u0).powi(2 * m as i32 + 1) * beta
    }

    /// `int [a^{(l)}(u)]^pw du`.
    pub fn moment_atilde(&self, l: u32, pw: u32) -> Result<T> {
        if l >= self.m {
            return Err(Error::DerivativeOrder { k: l, m: self.m });
        }
        if pw < 2 {
            return Err(Error::InvalidArgument(format!("power must be at least 2, got {pw}")));
        }
        let deg = pw * (2 * self.m - l);
        Ok(self.integrate_polynomial(deg, |u| self.derivative_unchecked(l, u).powi(pw as i32)))
    }

    /// Coefficient of the anomalous quadratic tail,
    /// `(-1)^l 2^{3l} / (2l (2l+1)) int a^{(l-1)} [a^{(l)}]^2`.
    pub fn moment_c_anom(&self, l: u32) -> Result<T> {
        if l == 0 {
            return Err(Error::InvalidArgument("the anomalous quadratic coefficient needs l >= 1".into()));
        }
        if l >= self.m {
            return Err(Error::DerivativeOrder { k: l, m: self.m });
        }
        let deg = (2 * self.m - l + 1) + 2 * (2 * self.m - l);
        let integral = self.integrate_polynomial(deg, |u| {
            let d = self.derivative_unchecked(l, u);
            self.derivative_unchecked(l - 1, u) * d * d
        });
        let lf = l as f64;
        let sign = if l.is_multiple_of(2) { 1.0 } else { -1.0 };
        let pref = sign * 2f64.powi(3 * l as i32) / (2.0 * lf * (2.0 * lf + 1.0));
        Ok(integral.mul_f64(pref))
    }

    /// `-8 int a (a')^2`.
    pub fn moment_ym(&self) -> Result<T> {
        if self.m < 2 {
            return Err(Error::DerivativeOrder { k: 1, m: self.m });
        }
        let deg = 2 * self.m + 2 * (2 * self.m - 1);
        let integral = self.integrate_polynomial(deg, |u| {
            let d = self.derivative_unchecked(1, u);
            self.derivative_unchecked(0, u) * d * d
        });
        Ok(integral.mul_f64(-8.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::DoubleDouble;
    use proptest::prelude::*;

    /// Dense trapezoid rule on the support, independent of Gauss-Legendre.
    fn trapezoid(p: &Profile<f64>, f: impl Fn(f64) -> f64) -> f64 {
        let (a, b) = p.support();
        let n = 100_000;
        let h = (b - a) / n as f64;
        let mut s = 0.5 * (f(a) + f(b));
        for i in 1..n {
            s += f(a + i as f64 * h);
        }
        s * h
    }

    fn unit(m: u32, u0: f64, u1: f64) -> Profile<f64> {
        Profile::new(u0, u1, m, 1.0).unwrap()
    }

    #[test]
    fn derivative_examples() {
        let p = unit(4, 0.0, 2.0);
        assert_eq!(p.eval_derivative(0, -0.5).unwrap(), 0.0);
        assert_eq!(p.eval_derivative(0, 2.5).unwrap(), 0.0);
        assert!((p.eval_derivative(0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(p.eval_derivative(1, 1.0).unwrap().abs() < 1e-15);
        assert!(matches!(p.eval_derivative(4, 1.0), Err(Error::DerivativeOrder { .. })));
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let p = unit(6, -0.5, 1.5);
        for k in 0..4 {
            for &u in &[-0.2, 0.3, 0.9, 1.3] {
                let h = 1e-5;
                let fd = (p.eval_derivative(k, u + h).unwrap() - p.eval_derivative(k, u - h).unwrap()) / (2.0 * h);
                let exact = p.eval_derivative(k + 1, u).unwrap();
                assert!((fd - exact).abs() < 1e-6 * (1.0 + exact.abs()), "k={k} u={u}");
            }
        }
    }

    #[test]
    fn moment_a_examples() {
        assert_eq!(Profile::new(0.0, 2.0, 4, 0.0).unwrap().moment_a(), 0.0);
        // int_0^1 u^2 (1-u)^2 = 1/30
        assert!((unit(2, 0.0, 1.0).moment_a() - 1.0 / 30.0).abs() < 1e-15);
        let p = unit(4, 0.0, 2.0);
        // B(5,5) = 4!4!/9! = 1/630, times 2^9
        let beta_closed = 512.0 / 630.0;
        assert!((p.moment_a() - beta_closed).abs() < 1e-12);
        assert!((p.moment_a() - p.moment_a_closed_form()).abs() < 1e-12);
    }

    #[test]
    fn extended_moment_matches_beta_form() {
        let p: Profile<DoubleDouble> = Profile::standard();
        let d = (p.moment_a() - p.moment_a_closed_form()).abs().to_f64();
        assert!(d < 1e-29, "{d:e}");
    }

    #[test]
    fn atilde_examples() {
        // int_0^1 u^4 (1-u)^4 = 1/630
        assert!((unit(2, 0.0, 1.0).moment_atilde(0, 2).unwrap() - 1.0 / 630.0).abs() < 1e-15);
        assert_eq!(Profile::new(0.0, 2.0, 4, 0.0).unwrap().moment_atilde(1, 3).unwrap(), 0.0);
        assert!(unit(4, 0.0, 2.0).moment_atilde(1, 2).unwrap() > 0.0);
        assert!(unit(4, 0.0, 2.0).moment_atilde(4, 2).is_err());
    }

    #[test]
    fn anomalous_coefficients_against_trapezoid_oracle() {
        let p = unit(4, 0.0, 2.0);
        let d0 = |u: f64| p.eval_derivative(0, u).unwrap();
        let d1 = |u: f64| p.eval_derivative(1, u).unwrap();
        let oracle = -(8.0 / 6.0) * trapezoid(&p, |u| d0(u) * d1(u) * d1(u));
        let got = p.moment_c_anom(1).unwrap();
        assert!((got - oracle).abs() < 1e-8, "{got} vs {oracle}");

        let oracle_ym = -8.0 * trapezoid(&p, |u| d0(u) * d1(u) * d1(u));
        let got_ym = p.moment_ym().unwrap();
        assert!((got_ym - oracle_ym).abs() < 1e-8);
        assert!(got_ym < 0.0);

        let doubled = p.scaled(2.0);
        assert!((doubled.moment_c_anom(1).unwrap() - 8.0 * got).abs() < 1e-12 * got.abs().max(1.0));
        assert!(p.moment_c_anom(0).is_err());
        assert_eq!(Profile::new(0.0, 2.0, 4, 0.0).unwrap().moment_ym().unwrap(), 0.0);
        assert_eq!(Profile::new(0.0, 2.0, 4, 0.0).unwrap().moment_c_anom(1).unwrap(), 0.0);
    }

    #[test]
    fn moments_against_trapezoid_oracle() {
        let p = Profile::<f64>::standard();
        assert!((p.moment_a() - trapezoid(&p, |u| p.eval_derivative(0, u).unwrap())).abs() < 1e-8);
        for l in 0..3u32 {
            let t = trapezoid(&p, |u| p.eval_derivative(l, u).unwrap().powi(3));
            assert!((p.moment_atilde(l, 3).unwrap() - t).abs() < 1e-8 * t.abs().max(1.0));
        }
    }

    #[test]
    fn large_m_stays_finite() {
        let p: Profile<f64> = Profile::normalized(-2.0, 2.0, 96, 1.0).unwrap();
        assert!((p.eval_derivative(0, 0.0).unwrap() - 1.0).abs() < 1e-14);
        let d = p.eval_derivative(5, 0.3).unwrap();
        assert!(d.is_finite());
        assert!((p.moment_a() - p.moment_a_closed_form()).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn compact_support(k in 0u32..5, u in prop_oneof![-10.0f64..-0.0, 2.0f64..10.0]) {
            let p = unit(6, 0.0, 2.0);
            prop_assert_eq!(p.eval_derivative(k, u).unwrap(), 0.0);
        }

        #[test]
        fn derivatives_integrate_to_zero(k in 1u32..8, m in 8u32..14) {
            let p: Profile<f64> = Profile::normalized(-1.0, 1.5, m, 1.0).unwrap();
            let n = (2 * m as usize) / 2 + 2;
            let v = gauss_legendre::<f64>(n).integrate(-1.0, 1.5, |u| p.eval_derivative(k, u).unwrap());
            let scale = gauss_legendre::<f64>(n).integrate(-1.0, 1.5, |u| p.eval_derivative(k, u).unwrap().abs());
            prop_assert!(v.abs() < 1e-12 * scale.max(1.0));
        }
    }
}
