use super::{check_len, SymmetricMatrix};
use crate::error::{Error, Result};

/// Lower-triangular factor `L` with `M = LLᵀ`.
#[derive(Clone, Debug)]
pub struct Cholesky {
    dim: usize,
    lower: Vec<f64>,
}

impl Cholesky {
    /// Fails with `NotPositiveDefinite` on the first pivot that is not
    /// strictly positive.
    pub fn factor(m: &SymmetricMatrix) -> Result<Self> {
        Self::factor_slice(m.dim(), m.as_slice())
    }

    pub(crate) fn factor_slice(n: usize, a: &[f64]) -> Result<Self> {
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let row_j = j * n;
            let mut d = a[row_j + j];
            for k in 0..j {
                d -= l[row_j + k] * l[row_j + k];
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::NotPositiveDefinite { pivot: j, value: d });
            }
            let djj = d.sqrt();
            l[row_j + j] = djj;
            for i in (j + 1)..n {
                let row_i = i * n;
                let mut s = a[row_i + j];
                for k in 0..j {
                    s -= l[row_i + k] * l[row_j + k];
                }
                l[row_i + j] = s / djj;
            }
        }
        Ok(Self { dim: n, lower: l })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Squared diagonal of `L`: the Schur-complement pivots of `M`.
    pub fn pivots(&self) -> Vec<f64> {
        (0..self.dim)
            .map(|i| self.lower[i * self.dim + i].powi(2))
            .collect()
    }

    pub fn logdet(&self) -> f64 {
        2.0 * (0..self.dim)
            .map(|i| self.lower[i * self.dim + i].ln())
            .sum::<f64>()
    }

    /// Solves `Ly = b` in place.
    pub fn forward_in_place(&self, y: &mut [f64]) {
        let n = self.dim;
        for i in 0..n {
            let row = &self.lower[i * n..i * n + i];
            let s: f64 = row.iter().zip(&y[..i]).map(|(l, v)| l * v).sum();
            y[i] = (y[i] - s) / self.lower[i * n + i];
        }
    }

    /// Solves `Lᵀx = y` in place.
    pub fn backward_in_place(&self, x: &mut [f64]) {
        let n = self.dim;
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in (i + 1)..n {
                s -= self.lower[k * n + i] * x[k];
            }
            x[i] = s / self.lower[i * n + i];
        }
    }

    pub fn solve(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim, y.len())?;
        let mut x = y.to_vec();
        self.forward_in_place(&mut x);
        self.backward_in_place(&mut x);
        Ok(x)
    }

    pub fn inverse(&self) -> SymmetricMatrix {
        let n = self.dim;
        let mut inv = vec![0.0; n * n];
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            self.forward_in_place(&mut e);
            self.backward_in_place(&mut e);
            for i in 0..n {
                inv[i * n + j] = e[i];
            }
        }
        let mut out = inv;
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (out[i * n + j] + out[j * n + i]);
                out[i * n + j] = avg;
                out[j * n + i] = avg;
            }
        }
        SymmetricMatrix::from_upper(n, out)
    }
}

/// `log det M` via Cholesky.
pub fn logdet(m: &SymmetricMatrix) -> Result<f64> {
    Ok(Cholesky::factor(m)?.logdet())
}

pub fn solve_spd(m: &SymmetricMatrix, y: &[f64]) -> Result<Vec<f64>> {
    Cholesky::factor(m)?.solve(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logdet_of_diagonal() {
        let m = SymmetricMatrix::from_diagonal(&[0.5, 0.5]);
        assert!((logdet(&m).unwrap() - 0.25f64.ln()).abs() < 1e-15);
        assert_eq!(logdet(&SymmetricMatrix::identity(3)).unwrap(), 0.0);
    }

    #[test]
    fn solves_diagonal_systems() {
        assert_eq!(
            solve_spd(&SymmetricMatrix::identity(2), &[1.0, 2.0]).unwrap(),
            vec![1.0, 2.0]
        );
        let x = solve_spd(&SymmetricMatrix::from_diagonal(&[2.0, 4.0]), &[2.0, 4.0]).unwrap();
        assert!(x.iter().all(|v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn rejects_indefinite_and_singular() {
        let indefinite = SymmetricMatrix::from_rows(&[[1.0, 2.0], [2.0, 1.0]]).unwrap();
        assert!(matches!(
            logdet(&indefinite),
            Err(Error::NotPositiveDefinite { pivot: 1, .. })
        ));
        let singular = SymmetricMatrix::from_diagonal(&[1.0, 0.0]);
        assert!(matches!(
            solve_spd(&singular, &[1.0, 1.0]),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn inverse_times_matrix_is_identity() {
        let m = SymmetricMatrix::from_rows(&[[4.0, 1.0, 0.5], [1.0, 3.0, 0.2], [0.5, 0.2, 2.0]])
            .unwrap();
        let inv = Cholesky::factor(&m).unwrap().inverse();
        for i in 0..3 {
            for j in 0..3 {
                let v: f64 = (0..3).map(|k| m.get(i, k) * inv.get(k, j)).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((v - expect).abs() < 1e-14);
            }
        }
    }
}
