use super::real::Real;

/// Finite-difference weights on arbitrary nodes (Fornberg's recursion).
///
/// Returns `w[d][j]`: the weight of `f(nodes[j])` in the approximation of the
/// `d`-th derivative at `z`, for `d = 0..=max_deriv`.
pub fn fornberg_weights<T: Real>(z: T, nodes: &[T], max_deriv: usize) -> Vec<Vec<T>> {
    let n = nodes.len();
    let mut c = vec![vec![T::zero(); n]; max_deriv + 1];
    let mut c1 = T::one();
    let mut c4 = nodes[0] - z;
    c[0][0] = T::one();
    for i in 1..n {
        let mn = i.min(max_deriv);
        let mut c2 = T::one();
        let c5 = c4;
        c4 = nodes[i] - z;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (c[k - 1][i - 1].mul_f64(k as f64) - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - c[k - 1][j].mul_f64(k as f64)) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Weights of the centered `order`-accurate first and second derivative on
/// unit spacing, indexed by offset `-half..=half`.
pub fn centered_weights<T: Real>(order: usize) -> (Vec<T>, Vec<T>) {
    assert!(order >= 2 && order.is_multiple_of(2), "centered stencils need an even order");
    let half = order / 2;
    let nodes: Vec<T> = (-(half as i64)..=half as i64).map(T::from_i64).collect();
    let w = fornberg_weights(T::zero(), &nodes, 2);
    (w[1].clone(), w[2].clone())
}
