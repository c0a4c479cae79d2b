//! LU factorization of a complex tridiagonal matrix with partial pivoting
//! (the LAPACK `gttrf`/`gttrs` scheme). Pivoting matters here: near a
//! lossless resonance the diagonal of the Helmholtz matrix can pass
//! through zero.

use num_complex::Complex64;

#[derive(Debug, Clone)]
pub struct TridiagLu {
    dl: Vec<Complex64>,
    d: Vec<Complex64>,
    du: Vec<Complex64>,
    du2: Vec<Complex64>,
    swapped: Vec<bool>,
}

impl TridiagLu {
    /// Factors the matrix with sub-diagonal `lower`, diagonal `diag` and
    /// super-diagonal `upper`. Returns the first row with a zero pivot on failure.
    pub fn factor(lower: &[Complex64], diag: &[Complex64], upper: &[Complex64]) -> Result<Self, usize> {
        let n = diag.len();
        assert!(n > 0 && lower.len() + 1 == n && upper.len() + 1 == n);
        let mut dl = lower.to_vec();
        let mut d = diag.to_vec();
        let mut du = upper.to_vec();
        let mut du2 = vec![Complex64::new(0.0, 0.0); n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].norm() >= dl[i].norm() {
                if d[i] != Complex64::new(0.0, 0.0) {
                    let fact = dl[i] / d[i];
                    dl[i] = fact;
                    d[i + 1] -= fact * du[i];
                }
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swapped[i] = true;
            }
        }
        if let Some(row) = d.iter().position(|p| *p == Complex64::new(0.0, 0.0) || !p.is_finite()) {
            return Err(row);
        }
        Ok(Self { dl, d, du, du2, swapped })
    }

    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    /// Overwrites `b` with the solution of `A x = b`.
    pub fn solve_in_place(&self, b: &mut [Complex64]) {
        let n = self.d.len();
        assert_eq!(b.len(), n);
        for i in 0..n - 1 {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}
