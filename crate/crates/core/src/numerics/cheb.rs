//! Chebyshev-Gauss-Lobatto nodes and spectral differentiation.

use nalgebra::DMatrix;

/// Nodes `x_j = cos(pi j / n)` mapped to `[a, b]`, in increasing order.
pub fn nodes(n: usize, a: f64, b: f64) -> Vec<f64> {
    (0..=n)
        .rev()
        .map(|j| {
            let t = (std::f64::consts::PI * j as f64 / n as f64).cos();
            0.5 * (a + b) + 0.5 * (b - a) * t
        })
        .collect()
}

/// Differentiation matrix for `nodes(n, a, b)` (Trefethen's construction,
/// negative-sum trick on the diagonal).
pub fn diff_matrix(n: usize, a: f64, b: f64) -> DMatrix<f64> {
    let x: Vec<f64> = (0..=n)
        .rev()
        .map(|j| (std::f64::consts::PI * j as f64 / n as f64).cos())
        .collect();
    let cw: Vec<f64> = (0..=n)
        .map(|i| {
            let base = if i == 0 || i == n { 2.0 } else { 1.0 };
            // Sign of (-1)^j in the reversed ordering.
            base * if (n - i) % 2 == 0 { 1.0 } else { -1.0 }
        })
        .collect();
    let mut d = DMatrix::<f64>::zeros(n + 1, n + 1);
    for i in 0..=n {
        for j in 0..=n {
            if i != j {
                d[(i, j)] = cw[i] / cw[j] / (x[i] - x[j]);
            }
        }
    }
    for i in 0..=n {
        let s: f64 = (0..=n).filter(|&j| j != i).map(|j| d[(i, j)]).sum();
        d[(i, i)] = -s;
    }
    d * (2.0 / (b - a))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn differentiates_smooth_function_spectrally() {
        let n = 24;
        let x = nodes(n, -1.0, 2.0);
        let d = diff_matrix(n, -1.0, 2.0);
        let f = nalgebra::DVector::from_iterator(n + 1, x.iter().map(|x| (2.0 * x).sin()));
        let df = &d * f;
        for (i, xi) in x.iter().enumerate() {
            assert!((df[i] - 2.0 * (2.0 * xi).cos()).abs() < 1e-10);
        }
    }
}
