/// Thomas algorithm for a tridiagonal system. `lower[0]` and `upper[n-1]` are ignored.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = upper[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - lower[i] * c[i - 1];
        c[i] = if i + 1 < n { upper[i] / m } else { 0.0 };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_poisson_stencil() {
        let n = 9;
        let lower = vec![-1.0; n];
        let upper = vec![-1.0; n];
        let diag = vec![2.0; n];
        let x: Vec<f64> = (0..n).map(|i| (i as f64).powi(2)).collect();
        let rhs: Vec<f64> = (0..n)
            .map(|i| {
                let l = if i > 0 { x[i - 1] } else { 0.0 };
                let u = if i + 1 < n { x[i + 1] } else { 0.0 };
                2.0 * x[i] - l - u
            })
            .collect();
        let y = solve_tridiagonal(&lower, &diag, &upper, &rhs);
        for i in 0..n {
            assert!((x[i] - y[i]).abs() < 1e-10);
        }
    }
}
