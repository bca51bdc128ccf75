//! Dense complex matrices and LU determinants.

use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// `self * diag(d)`.
    pub fn scale_columns(&self, d: &[Complex64]) -> Self {
        assert_eq!(d.len(), self.n);
        let mut out = self.clone();
        for row in out.data.chunks_mut(self.n) {
            for (x, s) in row.iter_mut().zip(d) {
                *x *= s;
            }
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

/// Determinant in log-magnitude and phase form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Determinant {
    /// `log|det|`, `-inf` for a singular matrix.
    pub log_abs: f64,
    /// Unit-modulus phase.
    pub phase: Complex64,
    /// Ratio of the largest to the smallest pivot modulus. A cheap
    /// conditioning indicator, not a true condition number.
    pub pivot_ratio: f64,
}

impl Determinant {
    pub fn value(&self) -> Complex64 {
        self.phase * self.log_abs.exp()
    }
}

/// LU factorization with partial pivoting; consumes the matrix.
pub fn determinant(mut a: CMatrix) -> Determinant {
    let n = a.n;
    let mut log_abs = 0.0;
    let mut phase = Complex64::new(1.0, 0.0);
    let (mut pmax, mut pmin) = (0.0f64, f64::INFINITY);
    for col in 0..n {
        let (piv, pnorm) = (col..n)
            .map(|r| (r, a[(r, col)].norm()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pnorm == 0.0 {
            return Determinant {
                log_abs: f64::NEG_INFINITY,
                phase: Complex64::new(0.0, 0.0),
                pivot_ratio: f64::INFINITY,
            };
        }
        if piv != col {
            for j in 0..n {
                a.data.swap(piv * n + j, col * n + j);
            }
            phase = -phase;
        }
        let p = a[(col, col)];
        log_abs += pnorm.ln();
        phase *= p / pnorm;
        pmax = pmax.max(pnorm);
        pmin = pmin.min(pnorm);
        let inv = 1.0 / p;
        for r in col + 1..n {
            let factor = a[(r, col)] * inv;
            if factor == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in col + 1..n {
                let v = a.data[col * n + j];
                a.data[r * n + j] -= factor * v;
            }
        }
    }
    Determinant {
        log_abs,
        phase,
        pivot_ratio: if n == 0 { 1.0 } else { pmax / pmin },
    }
}

/// `det(I - A)`.
pub fn det_one_minus(a: &CMatrix) -> Determinant {
    let n = a.dim();
    let mut m = a.clone();
    for x in m.data.iter_mut() {
        *x = -*x;
    }
    for i in 0..n {
        m[(i, i)] += 1.0;
    }
    determinant(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_matrix_gives_one() {
        let d = det_one_minus(&CMatrix::zeros(7));
        assert!((d.value() - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn small_complex_determinant() {
        let m = CMatrix::from_fn(2, |i, j| [[c(1.0, 1.0), c(2.0, 0.0)], [c(0.0, -1.0), c(3.0, 0.5)]][i][j]);
        // (1+i)(3+0.5i) - 2(-i) = 2.5 + 3.5i + 2i
        let d = determinant(m).value();
        assert!((d - c(2.5, 5.5)).norm() < 1e-14);
    }

    #[test]
    fn pivoting_handles_zero_leading_entry() {
        let m = CMatrix::from_fn(3, |i, j| {
            let p = [[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 2.0]];
            c(p[i][j], 0.0)
        });
        assert!((determinant(m).value() - c(-2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn singular_matrix() {
        let m = CMatrix::from_fn(2, |_, _| c(1.0, 0.0));
        assert_eq!(determinant(m).log_abs, f64::NEG_INFINITY);
    }

    #[test]
    fn multiplicative_on_products() {
        let a = CMatrix::from_fn(4, |i, j| c((i * 3 + j) as f64 * 0.1, (i as f64 - j as f64) * 0.2) + if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) });
        let b = CMatrix::from_fn(4, |i, j| c(((i + 2 * j) % 5) as f64 * 0.3, 0.1));
        let lhs = determinant(a.mul(&b)).value();
        let rhs = determinant(a).value() * determinant(b).value();
        assert!((lhs - rhs).norm() < 1e-12 * rhs.norm().max(1.0));
    }
}
