//! Small dense symmetric positive-definite solves for the normal equations.

/// Relative pivot threshold below which a column is treated as linearly
/// dependent on the columns before it.
const PIVOT_TOL: f64 = 1e-10;

/// Lower-triangular Cholesky factor of a symmetric matrix.
pub(crate) struct Cholesky {
    l: Vec<Vec<f64>>,
}

impl Cholesky {
    /// Factorizes `a`. On failure returns the indices of every column whose
    /// pivot collapsed (dependent columns are skipped so later ones are still
    /// checked).
    pub(crate) fn new(a: &[Vec<f64>]) -> Result<Self, Vec<usize>> {
        let n = a.len();
        let mut l = vec![vec![0.0; n]; n];
        let mut bad = Vec::new();
        for j in 0..n {
            let mut d = a[j][j];
            for k in 0..j {
                d -= l[j][k] * l[j][k];
            }
            let scale = a[j][j].abs().max(f64::MIN_POSITIVE);
            if !(d > PIVOT_TOL * scale) || a[j][j] <= 0.0 {
                bad.push(j);
                continue;
            }
            let djj = d.sqrt();
            l[j][j] = djj;
            for i in j + 1..n {
                let mut s = a[i][j];
                for k in 0..j {
                    s -= l[i][k] * l[j][k];
                }
                l[i][j] = s / djj;
            }
        }
        if bad.is_empty() {
            Ok(Cholesky { l })
        } else {
            Err(bad)
        }
    }

    pub(crate) fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let mut y = vec![0.0; n];
        for i in 0..n {
            let s: f64 = (0..i).map(|k| self.l[i][k] * y[k]).sum();
            y[i] = (b[i] - s) / self.l[i][i];
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|k| self.l[k][i] * x[k]).sum();
            x[i] = (y[i] - s) / self.l[i][i];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_spd_system() {
        let a = vec![vec![4.0, 2.0, 0.6], vec![2.0, 5.0, 1.0], vec![0.6, 1.0, 3.0]];
        let x_true = [1.0, -2.0, 0.5];
        let b: Vec<f64> = a.iter().map(|r| r.iter().zip(&x_true).map(|(p, q)| p * q).sum()).collect();
        let x = Cholesky::new(&a).unwrap().solve(&b);
        for (u, v) in x.iter().zip(&x_true) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn reports_dependent_columns() {
        // Column 2 = column 0 + column 1 in the underlying design.
        let x = [[1.0, 0.0, 1.0], [0.0, 1.0, 1.0], [1.0, 1.0, 2.0], [2.0, 1.0, 3.0]];
        let mut a = vec![vec![0.0; 3]; 3];
        for r in &x {
            for i in 0..3 {
                for j in 0..3 {
                    a[i][j] += r[i] * r[j];
                }
            }
        }
        assert_eq!(Cholesky::new(&a).err(), Some(vec![2]));
        let zero = vec![vec![1.0, 0.0], vec![0.0, 0.0]];
        assert_eq!(Cholesky::new(&zero).err(), Some(vec![1]));
    }
}
