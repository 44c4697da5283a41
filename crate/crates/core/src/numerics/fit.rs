//! Least-squares polynomial fits.

use nalgebra::{DMatrix, DVector};

/// Coefficients `c_0..c_deg` (ascending powers) of the least-squares fit.
pub fn polyfit(x: &[f64], y: &[f64], deg: usize) -> Option<Vec<f64>> {
    let n = x.len();
    if n <= deg {
        return None;
    }
    let v = DMatrix::from_fn(n, deg + 1, |i, j| x[i].powi(j as i32));
    let rhs = DVector::from_column_slice(y);
    let sol = v.svd(true, true).solve(&rhs, 1e-14).ok()?;
    Some(sol.iter().copied().collect())
}

pub fn polyval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, ci| acc * x + ci)
}

/// Ordinary least squares `y ~ design * beta`; returns `beta` and the
/// residual norm.
pub fn lstsq(design: &DMatrix<f64>, y: &[f64]) -> Option<(Vec<f64>, f64)> {
    let rhs = DVector::from_column_slice(y);
    let sol = design.clone().svd(true, true).solve(&rhs, 1e-14).ok()?;
    let res = (design * &sol - rhs).norm();
    Some((sol.iter().copied().collect(), res))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cubic() {
        let x: Vec<f64> = (0..10).map(|i| i as f64 * 0.3).collect();
        let y: Vec<f64> = x.iter().map(|x| 1.0 - 2.0 * x + 0.5 * x.powi(3)).collect();
        let c = polyfit(&x, &y, 3).unwrap();
        assert!((c[0] - 1.0).abs() < 1e-10 && (c[1] + 2.0).abs() < 1e-10 && (c[3] - 0.5).abs() < 1e-10);
        assert!((polyval(&c, 2.0) - (1.0 - 4.0 + 4.0)).abs() < 1e-10);
    }
}
