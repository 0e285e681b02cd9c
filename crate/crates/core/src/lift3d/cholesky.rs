use crate::error::{Error, Result};

/// Lower-triangular factor `L` with `L·Lᵀ = A`, stored row-major as a full
/// `n×n` buffer (upper triangle zero).
#[derive(Debug, Clone, PartialEq)]
pub struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    /// Factorizes a symmetric matrix given row-major; fails on a
    /// non-positive pivot.
    pub fn new(a: &[f64], n: usize) -> Result<Self> {
        if a.len() != n * n {
            return Err(Error::shape(format!("matrix has {} entries, expected {}", a.len(), n * n)));
        }
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let row_j = j * n;
            let mut d = a[row_j + j];
            for k in 0..j {
                d -= l[row_j + k] * l[row_j + k];
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::Numerical(format!("non-positive pivot {d:e} at row {j}")));
            }
            let d = d.sqrt();
            l[row_j + j] = d;
            for i in j + 1..n {
                let row_i = i * n;
                let mut s = a[row_i + j];
                for k in 0..j {
                    s -= l[row_i + k] * l[row_j + k];
                }
                l[row_i + j] = s / d;
            }
        }
        Ok(Self { n, l })
    }

    /// Rebuilds from a packed lower triangle (row by row).
    pub fn from_packed(n: usize, packed: &[f64]) -> Result<Self> {
        if packed.len() != n * (n + 1) / 2 {
            return Err(Error::shape("packed triangle has the wrong length"));
        }
        let mut l = vec![0.0; n * n];
        let mut it = packed.iter();
        for i in 0..n {
            for j in 0..=i {
                l[i * n + j] = *it.next().unwrap();
            }
        }
        Ok(Self { n, l })
    }

    pub fn packed(&self) -> Vec<f64> {
        (0..self.n).flat_map(|i| (0..=i).map(move |j| (i, j))).map(|(i, j)| self.l[i * self.n + j]).collect()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.l[i * self.n + j]
    }

    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.n).map(|i| self.l[i * self.n + i].ln()).sum::<f64>()
    }

    /// Solves `L·x = b` in place.
    pub fn forward(&self, b: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let row = &self.l[i * n..i * n + i];
            let s: f64 = row.iter().zip(&b[..i]).map(|(a, c)| a * c).sum();
            b[i] = (b[i] - s) / self.l[i * n + i];
        }
    }

    /// Solves `Lᵀ·x = b` in place.
    pub fn backward(&self, b: &mut [f64]) {
        let n = self.n;
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in i + 1..n {
                s -= self.l[k * n + i] * b[k];
            }
            b[i] = s / self.l[i * n + i];
        }
    }

    /// `A⁻¹·b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.forward(&mut x);
        self.backward(&mut x);
        x
    }

    /// Full `A⁻¹`, row-major.
    pub fn inverse(&self) -> Vec<f64> {
        let n = self.n;
        // M = L⁻¹ (lower), built row by row
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            let lii = self.l[i * n + i];
            m[i * n + i] = 1.0 / lii;
            for j in 0..i {
                let mut s = 0.0;
                for k in j..i {
                    s += self.l[i * n + k] * m[k * n + j];
                }
                m[i * n + j] = -s / lii;
            }
        }
        // A⁻¹ = Mᵀ·M
        let mut inv = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut s = 0.0;
                for k in i..n {
                    s += m[k * n + i] * m[k * n + j];
                }
                inv[i * n + j] = s;
                inv[j * n + i] = s;
            }
        }
        inv
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spd(n: usize) -> Vec<f64> {
        let b: Vec<f64> = (0..n * n).map(|i| ((i * 37 % 17) as f64 - 8.0) / 7.0).collect();
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = (0..n).map(|k| b[i * n + k] * b[j * n + k]).sum::<f64>() + if i == j { 0.5 } else { 0.0 };
            }
        }
        a
    }

    #[test]
    fn reconstructs_and_inverts() {
        let n = 6;
        let a = spd(n);
        let c = Cholesky::new(&a, n).unwrap();
        for i in 0..n {
            for j in 0..n {
                let r: f64 = (0..n).map(|k| c.get(i, k) * c.get(j, k)).sum();
                assert!((r - a[i * n + j]).abs() < 1e-10);
            }
        }
        let inv = c.inverse();
        for i in 0..n {
            for j in 0..n {
                let r: f64 = (0..n).map(|k| a[i * n + k] * inv[k * n + j]).sum();
                assert!((r - if i == j { 1.0 } else { 0.0 }).abs() < 1e-9);
            }
        }
        let b: Vec<f64> = (0..n).map(|i| i as f64 - 2.0).collect();
        let x = c.solve(&b);
        for i in 0..n {
            let r: f64 = (0..n).map(|k| a[i * n + k] * x[k]).sum();
            assert!((r - b[i]).abs() < 1e-10);
        }
        let lu = nalgebra::DMatrix::from_row_slice(n, n, &a).lu();
        assert!((c.log_det() - lu.determinant().ln()).abs() < 1e-10);
        assert_eq!(Cholesky::from_packed(n, &c.packed()).unwrap(), c);
    }

    #[test]
    fn indefinite_matrix_fails() {
        assert!(matches!(Cholesky::new(&[1.0, 2.0, 2.0, 1.0], 2), Err(Error::Numerical(_))));
    }
}
