//! Closed-form spherically symmetric solutions of the free wave equation in
//! `d = 2l + 3` space dimensions, built from a generator profile `a(u)`:
//!
//! ```text
//! phi(t, r) = r^{-(2l+1)} sum_{k=0}^{l} c_k r^k [a^{(k)}(t-r) - (-1)^k a^{(k)}(t+r)],
//! c_k = 2^{k-l} (2l-k)! / (k! (l-k)!)
//! ```

use crate::error::{Error, Result};
use crate::numerics::{factorial, Real};
use crate::profiles::Profile;

#[derive(Debug, Clone)]
pub struct FreeWave<T> {
    profile: Profile<T>,
    l: u32,
    coeffs: Vec<T>,
    r_floor: T,
    // phi(t, 0) = origin * a^{(2l+1)}(t)
    origin: T,
}

impl<T: Real> FreeWave<T> {
    pub fn new(profile: Profile<T>, l: u32) -> Result<Self> {
        if profile.smoothness() < l + 3 {
            return Err(Error::InvalidArgument(format!(
                "profile smoothness m = {} is below l + 3 = {}",
                profile.smoothness(),
                l + 3
            )));
        }
        let coeffs: Vec<T> = (0..=l)
            .map(|k| {
                factorial::<T>(2 * l - k) / (factorial::<T>(k) * factorial::<T>(l - k))
                    * T::from_f64(2f64.powi(k as i32 - l as i32))
            })
            .collect();
        let (u0, u1) = profile.support();
        // roundoff in the direct sum grows like eps (w/r)^{2l+1}, the
        // extrapolation error like (5r/w)^8; pick r where the two meet
        let frac = (T::epsilon() * 2.56e-6).powf(1.0 / (2.0 * l as f64 + 9.0));
        let r_floor = (u1 - u0).mul_f64(0.5 * frac);
        let origin = coeffs
            .iter()
            .enumerate()
            .map(|(k, c): (usize, &T)| {
                let sign = if k % 2 == 0 { -2.0 } else { 2.0 };
                (*c / factorial::<T>(2 * l + 1 - k as u32)).mul_f64(sign)
            })
            .fold(T::zero(), |a, b| a + b);
        Ok(FreeWave { profile, l, coeffs, r_floor, origin })
    }

    pub fn with_r_floor(mut self, r_floor: T) -> Self {
        self.r_floor = r_floor;
        self
    }

    pub fn profile(&self) -> &Profile<T> {
        &self.profile
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn dimension(&self) -> u32 {
        2 * self.l + 3
    }

    pub fn r_floor(&self) -> T {
        self.r_floor
    }

    /// A copy whose generator is multiplied by `factor`.
    pub fn scaled(&self, factor: T) -> Self {
        FreeWave { profile: self.profile.scaled(factor), ..self.clone() }
    }

    /// `phi(t, r)` for `r > 0`.
    pub fn eval(&self, t: T, r: T) -> Result<T> {
        if !(r > T::zero()) {
            return Err(Error::InvalidArgument(format!("free wave evaluated at r = {r} <= 0")));
        }
        Ok(self.eval_regular(t, r))
    }

    /// `d phi / dt (t, r)` for `r > 0`.
    pub fn eval_dt(&self, t: T, r: T) -> Result<T> {
        if !(r > T::zero()) {
            return Err(Error::InvalidArgument(format!("free wave evaluated at r = {r} <= 0")));
        }
        Ok(self.eval_dt_regular(t, r))
    }

    /// Like [`Self::eval`] but also accepts `r = 0`, where the regular limit is
    /// returned.
    pub fn eval_regular(&self, t: T, r: T) -> T {
        if r == T::zero() {
            if let Some(v) = self.at_origin(t, 0) {
                return v;
            }
        }
        if r < self.r_floor {
            self.extrapolate(r, |rr| self.direct(t, rr, 0))
        } else {
            self.direct(t, r, 0)
        }
    }

    pub fn eval_dt_regular(&self, t: T, r: T) -> T {
        if r == T::zero() {
            if let Some(v) = self.at_origin(t, 1) {
                return v;
            }
        }
        if r < self.r_floor {
            self.extrapolate(r, |rr| self.direct(t, rr, 1))
        } else {
            self.direct(t, r, 1)
        }
    }

    /// `phi` at null coordinates `u = t - r`, `v = t + r` (`v >= u`).
    #[inline]
    pub fn eval_null(&self, u: T, v: T) -> T {
        let rho = (v - u).mul_f64(0.5);
        if rho < self.r_floor {
            return self.eval_regular((u + v).mul_f64(0.5), rho);
        }
        self.null_sum(u, v, rho, 0)
    }

    fn at_origin(&self, t: T, shift: u32) -> Option<T> {
        let k = 2 * self.l + 1 + shift;
        (k <= self.profile.smoothness()).then(|| self.origin * self.profile.derivative_unchecked(k, t))
    }

    #[inline]
    fn direct(&self, t: T, r: T, shift: u32) -> T {
        self.null_sum(t - r, t + r, r, shift)
    }

    #[inline]
    fn null_sum(&self, u: T, v: T, r: T, shift: u32) -> T {
        let mut acc = T::zero();
        let mut rk = T::one();
        for (k, c) in self.coeffs.iter().enumerate() {
            let k = k as u32;
            let out = self.profile.derivative_unchecked(k + shift, u);
            let inc = self.profile.derivative_unchecked(k + shift, v);
            let bracket = if k.is_multiple_of(2) { out - inc } else { out + inc };
            acc += *c * rk * bracket;
            rk *= r;
        }
        acc / r.powi(2 * self.l as i32 + 1)
    }

    // phi is even in r; fit a cubic in r^2 through r = 2..5 floors
    fn extrapolate<F: Fn(T) -> T>(&self, r: T, f: F) -> T {
        let s = r * r;
        let nodes: Vec<T> = (2..=5).map(|j| self.r_floor.mul_f64(j as f64)).collect();
        let vals: Vec<T> = nodes.iter().map(|&x| f(x)).collect();
        let sq: Vec<T> = nodes.iter().map(|&x| x * x).collect();
        let mut acc = T::zero();
        for i in 0..4 {
            let mut li = T::one();
            for j in 0..4 {
                if i != j {
                    li *= (s - sq[j]) / (sq[i] - sq[j]);
                }
            }
            acc += li * vals[i];
        }
        acc
    }

    /// Initial data `(phi(0, r), d_t phi(0, r))` on `grid` (entries `>= 0`;
    /// the origin gets the regular limit).
    pub fn initial_data(&self, grid: &[T]) -> Result<(Vec<T>, Vec<T>)> {
        if let Some(bad) = grid.iter().find(|r| **r < T::zero()) {
            return Err(Error::InvalidArgument(format!("negative radius {bad} in grid")));
        }
        let f = grid.iter().map(|&r| self.eval_regular(T::zero(), r)).collect();
        let g = grid.iter().map(|&r| self.eval_dt_regular(T::zero(), r)).collect();
        Ok((f, g))
    }

    /// `|phi(t_after, r_obs)|` once the outgoing pulse has passed; exactly zero
    /// in odd dimensions.
    pub fn huygens_check(&self, r_obs: T, t_after: T) -> Result<T> {
        let (_, u1) = self.profile.support();
        if !(t_after - r_obs > u1) {
            return Err(Error::InvalidArgument(format!(
                "t = {t_after} is inside the passage window at r = {r_obs} (need t - r > {u1})"
            )));
        }
        Ok(self.eval(t_after, r_obs)?.abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::DoubleDouble;
    use proptest::prelude::*;

    fn wave(l: u32) -> FreeWave<f64> {
        FreeWave::new(Profile::standard(), l).unwrap()
    }

    #[test]
    fn rejects_nonpositive_radius_and_rough_profiles() {
        assert!(wave(0).eval(1.0, 0.0).is_err());
        assert!(wave(0).eval(1.0, -1.0).is_err());
        let rough = Profile::new(0.0, 2.0, 3, 1.0).unwrap();
        assert!(FreeWave::new(rough, 1).is_err());
    }

    #[test]
    fn vanishes_when_both_null_arguments_leave_support() {
        for l in 0..3 {
            assert_eq!(wave(l).eval(10.0, 3.0).unwrap(), 0.0);
            assert_eq!(wave(l).eval(-10.0, 3.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn l0_reduces_to_difference_quotient() {
        let w = wave(0);
        let a = |u: f64| w.profile().eval_derivative(0, u).unwrap();
        for &(t, r) in &[(0.0, 0.7), (0.4, 1.1), (1.3, 0.25), (0.0, 1.5)] {
            let expect = (a(t - r) - a(t + r)) / r;
            assert!((w.eval(t, r).unwrap() - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn l1_matches_hand_expansion() {
        // phi = [a(t-r) - a(t+r)]/r^3 + [a'(t-r) + a'(t+r)]/r^2
        let w = wave(1);
        let p = w.profile().clone();
        let a = |k: u32, u: f64| p.eval_derivative(k, u).unwrap();
        let mut state = 12345u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..20 {
            let t = -1.0 + 5.0 * next();
            let r = 0.3 + 3.0 * next();
            let expect = (a(0, t - r) - a(0, t + r)) / r.powi(3) + (a(1, t - r) + a(1, t + r)) / r.powi(2);
            let got = w.eval(t, r).unwrap();
            assert!((got - expect).abs() < 1e-12 * (1.0 + expect.abs()), "t={t} r={r}");
        }
    }

    #[test]
    fn origin_limit_l1_is_two_thirds_third_derivative() {
        let w = wave(1);
        for &t in &[0.6, 1.0, 1.4] {
            let expect = 2.0 / 3.0 * w.profile().eval_derivative(3, t).unwrap();
            assert!((w.eval_regular(t, 0.0) - expect).abs() < 1e-13 * expect.abs().max(1.0));
        }
        // the support edge has a''' = 0 exactly
        assert_eq!(w.eval_regular(0.0, 0.0), 0.0);
    }

    #[test]
    fn origin_closed_form_matches_extrapolation() {
        for l in 0..3 {
            let w: FreeWave<DoubleDouble> = FreeWave::new(Profile::standard(), l).unwrap();
            let tiny = w.r_floor().mul_f64(1e-9);
            for &t in &[0.5, 0.9, 1.3] {
                let t = DoubleDouble::from_f64(t);
                let exact = w.eval_regular(t, DoubleDouble::ZERO);
                let near = w.eval_regular(t, tiny);
                assert!((exact - near).abs().to_f64() < 1e-16 * exact.abs().to_f64().max(1.0), "l={l}: {exact} {near}");
                let dexact = w.eval_dt_regular(t, DoubleDouble::ZERO);
                let dnear = w.eval_dt_regular(t, tiny);
                assert!((dexact - dnear).abs().to_f64() < 1e-15 * dexact.abs().to_f64().max(1.0), "l={l}");
            }
        }
    }

    #[test]
    fn regular_near_origin() {
        // phi(t, r) - phi(t, 0) = O(r^2): shrinking r by 10 shrinks the gap by ~100
        for l in 0..3 {
            let w: FreeWave<DoubleDouble> = FreeWave::new(Profile::standard(), l).unwrap();
            let t = DoubleDouble::from_f64(0.8);
            let r1 = DoubleDouble::from_f64(2e-3);
            let r2 = DoubleDouble::from_f64(2e-4);
            let p0 = w.eval_regular(t, DoubleDouble::ZERO);
            let d1 = (w.eval(t, r1).unwrap() - p0).abs().to_f64();
            let d2 = (w.eval(t, r2).unwrap() - p0).abs().to_f64();
            let ratio = d1 / d2;
            assert!(ratio > 80.0 && ratio < 120.0, "l={l}: ratio {ratio}");
        }
    }

    #[test]
    fn ingoing_and_outgoing_split() {
        let w = wave(1);
        let p = w.profile().clone();
        // early: only a(t+r) terms; late: only a(t-r) terms
        let t = -3.0;
        let r = 4.0;
        let incoming =
            -(p.eval_derivative(0, t + r).unwrap()) / r.powi(3) + p.eval_derivative(1, t + r).unwrap() / r.powi(2);
        assert!((w.eval(t, r).unwrap() - incoming).abs() < 1e-14);
        let t = 6.0;
        let outgoing =
            p.eval_derivative(0, t - r).unwrap() / r.powi(3) + p.eval_derivative(1, t - r).unwrap() / r.powi(2);
        assert!((w.eval(t, r).unwrap() - outgoing).abs() < 1e-14);
    }

    #[test]
    fn time_derivative_is_analytic() {
        let w = wave(2);
        for &(t, r) in &[(0.0, 0.5), (0.0, 1.7), (1.2, 2.0)] {
            let h = 1e-5;
            let fd = (w.eval(t + h, r).unwrap() - w.eval(t - h, r).unwrap()) / (2.0 * h);
            let exact = w.eval_dt(t, r).unwrap();
            assert!((fd - exact).abs() < 1e-5 * (1.0 + exact.abs()));
        }
    }

    #[test]
    fn initial_data_examples() {
        let zero = FreeWave::new(Profile::new(0.0, 2.0, 8, 0.0).unwrap(), 1).unwrap();
        let grid: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
        let (f, g) = zero.initial_data(&grid).unwrap();
        assert!(f.iter().chain(&g).all(|x| *x == 0.0));

        // support beyond the grid in t - r: only the a(t + r) terms contribute
        let p = Profile::normalized(6.0, 8.0, 8, 1.0).unwrap();
        let w = FreeWave::new(p.clone(), 0).unwrap();
        let (f, _) = w.initial_data(&grid).unwrap();
        for (r, fi) in grid.iter().zip(&f).skip(1) {
            let expect = -p.eval_derivative(0, *r).unwrap() / r;
            assert!((fi - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn huygens_exact_zero() {
        for l in 0..3 {
            let w = wave(l);
            assert_eq!(w.huygens_check(5.0, 5.0 + 2.0 + 1.0).unwrap(), 0.0);
            assert!(w.huygens_check(5.0, 6.0).is_err());
        }
    }

    proptest! {
        #[test]
        fn huygens_property(l in 0u32..4, r in 0.01f64..30.0, gap in 1e-9f64..50.0) {
            let w = wave(l);
            prop_assert_eq!(w.eval(r + 2.0 + gap, r).unwrap(), 0.0);
        }
    }
}
