use super::real::Real;
use crate::error::{Error, Result};

/// Legendre polynomial `P_l(mu)` by the three-term recurrence
/// `(k+1) P_{k+1} = (2k+1) mu P_k - k P_{k-1}`.
pub fn legendre_p<T: Real>(l: u32, mu: T) -> T {
    match l {
        0 => T::one(),
        1 => mu,
        _ => {
            let mut p_prev = T::one();
            let mut p = mu;
            for k in 1..l {
                let kf = k as f64;
                let next = (mu * p).mul_f64(2.0 * kf + 1.0) - p_prev.mul_f64(kf);
                p_prev = p;
                p = next / T::from_f64(kf + 1.0);
            }
            p
        }
    }
}

/// `P_l` and its derivative, used by the Gauss-Legendre Newton iteration.
pub(crate) fn legendre_with_derivative<T: Real>(n: u32, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    if n == 0 {
        return (p0, T::zero());
    }
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((x * p1).mul_f64(2.0 * kf + 1.0) - p0.mul_f64(kf)) / T::from_f64(kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    // (1 - x^2) P_n' = n (P_{n-1} - x P_n)
    let dp = (p0 - x * p1).mul_f64(nf) / (T::one() - x * x);
    (p1, dp)
}

/// `x (x-1) ... (x-k+1)`; the empty product for `k = 0` is 1.
pub fn falling_factorial<T: Real>(x: T, k: u32) -> T {
    (0..k).fold(T::one(), |acc, j| acc * (x - T::from_f64(j as f64)))
}

/// `x (x+1) ... (x+k-1)`; the empty product for `k = 0` is 1.
pub fn rising_factorial<T: Real>(x: T, k: u32) -> T {
    (0..k).fold(T::one(), |acc, j| acc * (x + T::from_f64(j as f64)))
}

/// `n!! = n (n-2) ... 1` for odd positive `n`.
pub fn double_factorial<T: Real>(n: i64) -> Result<T> {
    if n < 1 || n % 2 == 0 {
        return Err(Error::InvalidArgument(format!(
            "double factorial is defined here for odd positive integers, got {n}"
        )));
    }
    Ok((1..=n).step_by(2).fold(T::one(), |acc, j| acc * T::from_i64(j)))
}

pub fn factorial<T: Real>(n: u32) -> T {
    (1..=n).fold(T::one(), |acc, j| acc * T::from_f64(j as f64))
}

pub fn binomial<T: Real>(n: u32, k: u32) -> T {
    if k > n {
        return T::zero();
    }
    let k = k.min(n - k);
    let mut acc = T::one();
    for j in 0..k {
        acc = acc * T::from_f64((n - j) as f64) / T::from_f64((j + 1) as f64);
    }
    acc
}
