use super::real::Real;
use super::special::legendre_with_derivative;

/// An `n`-point Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct QuadratureRule<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
    pub order: usize,
}

/// Nodes are the roots of `P_n`, found by Newton iteration in the working
/// precision of `T` from the usual cosine initial guesses.
pub fn gauss_legendre<T: Real>(n: usize) -> QuadratureRule<T> {
    assert!(n >= 1, "a quadrature rule needs at least one node");
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    let half = n.div_ceil(2);
    let tol = 4.0 * T::epsilon();
    for i in 0..half {
        let guess = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut x = T::from_f64(guess);
        if n % 2 == 1 && i == half - 1 {
            x = T::zero();
        }
        let mut dp = T::one();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n as u32, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs().to_f64() <= tol * x.abs().to_f64().max(1e-3) {
                let (_, d) = legendre_with_derivative(n as u32, x);
                dp = d;
                break;
            }
        }
        let w = T::from_f64(2.0) / ((T::one() - x * x) * dp * dp);
        // x decreases with i; store ascending
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = w;
        nodes[i] = -x;
        weights[i] = w;
    }
    QuadratureRule { nodes, weights, order: n }
}

impl<T: Real> QuadratureRule<T> {
    /// `int_a^b f` with the rule mapped affinely onto `[a, b]`.
    pub fn integrate<F: FnMut(T) -> T>(&self, a: T, b: T, mut f: F) -> T {
        let half = (b - a).mul_f64(0.5);
        let mid = (a + b).mul_f64(0.5);
        let mut acc = T::zero();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += *w * f(mid + half * *x);
        }
        acc * half
    }

    /// Mapped nodes and weights on `[a, b]`.
    pub fn mapped(&self, a: T, b: T) -> impl Iterator<Item = (T, T)> + '_ {
        let half = (b - a).mul_f64(0.5);
        let mid = (a + b).mul_f64(0.5);
        self.nodes.iter().zip(&self.weights).map(move |(x, w)| (mid + half * *x, *w * half))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::DoubleDouble;

    #[test]
    fn small_rules() {
        let r1: QuadratureRule<f64> = gauss_legendre(1);
        assert_eq!(r1.nodes, vec![0.0]);
        assert!((r1.weights[0] - 2.0).abs() < 1e-15);
        let r2: QuadratureRule<f64> = gauss_legendre(2);
        let s = 1.0 / 3f64.sqrt();
        assert!((r2.nodes[0] + s).abs() < 1e-15 && (r2.nodes[1] - s).abs() < 1e-15);
        assert!((r2.weights[0] - 1.0).abs() < 1e-15 && (r2.weights[1] - 1.0).abs() < 1e-15);
        let r3: QuadratureRule<f64> = gauss_legendre(3);
        let v = r3.integrate(-1.0, 1.0, |x| x.powi(4));
        assert!((v - 0.4).abs() < 1e-12);
    }

    #[test]
    fn weights_sum_to_two_and_nodes_are_ordered() {
        for n in [1usize, 2, 5, 16, 33, 64, 150] {
            let r: QuadratureRule<f64> = gauss_legendre(n);
            let s: f64 = r.weights.iter().sum();
            assert!((s - 2.0).abs() <= 10.0 * f64::EPSILON * n as f64, "n = {n}: {s}");
            assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
            assert!(r.nodes.iter().all(|x| x.abs() < 1.0));
            assert!(r.weights.iter().all(|w| *w > 0.0));

            let e: QuadratureRule<DoubleDouble> = gauss_legendre(n);
            let s: DoubleDouble = e.weights.iter().copied().sum();
            let err = (s - DoubleDouble::from_f64(2.0)).abs().to_f64();
            assert!(err <= 10.0 * DoubleDouble::EPSILON * n as f64, "n = {n}: {err:e}");
        }
    }

    #[test]
    fn exact_for_degree_2n_minus_1() {
        let r: QuadratureRule<DoubleDouble> = gauss_legendre(10);
        // int_{-1}^{1} x^18 = 2/19
        let v = r.integrate(DoubleDouble::from_f64(-1.0), DoubleDouble::from_f64(1.0), |x| x.powi(18));
        let exact = DoubleDouble::from_f64(2.0) / DoubleDouble::from_f64(19.0);
        assert!((v - exact).abs().to_f64() < 1e-30);
    }

    #[test]
    fn spectral_convergence_on_smooth_integrand() {
        // int_0^2 e^{-x^2} cos(3x) dx, compare successive doublings
        let f = |x: f64| (-x * x).exp() * (3.0 * x).cos();
        let reference = gauss_legendre::<f64>(80).integrate(0.0, 2.0, f);
        let e4 = (gauss_legendre::<f64>(4).integrate(0.0, 2.0, f) - reference).abs();
        let e8 = (gauss_legendre::<f64>(8).integrate(0.0, 2.0, f) - reference).abs();
        let e16 = (gauss_legendre::<f64>(16).integrate(0.0, 2.0, f) - reference).abs();
        assert!(e8 < e4 * 1e-2, "{e4:e} -> {e8:e}");
        assert!(e16 < e8 * 1e-4 || e16 < 1e-14, "{e8:e} -> {e16:e}");
    }
}
