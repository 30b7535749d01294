//! Symmetric pentadiagonal matrices and a banded LU solver with partial
//! pivoting. The angular Hamiltonian couples basis indices at distance one
//! and two, so everything downstream (spectra, implicit propagation,
//! inverse iteration) reduces to these two primitives.

use nalgebra::{ComplexField, DMatrix};
use num_complex::Complex64 as C64;

/// Real symmetric matrix with two off-diagonals.
#[derive(Clone, Debug)]
pub struct BandedSym {
    pub diag: Vec<f64>,
    /// First off-diagonal, length `dim - 1`.
    pub off1: Vec<f64>,
    /// Second off-diagonal, length `dim - 2`.
    pub off2: Vec<f64>,
}

impl BandedSym {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 3);
        BandedSym {
            diag: vec![0.0; dim],
            off1: vec![0.0; dim - 1],
            off2: vec![0.0; dim - 2],
        }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        match hi - lo {
            0 => self.diag[lo],
            1 => self.off1[lo],
            2 => self.off2[lo],
            _ => 0.0,
        }
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        let n = self.dim();
        for i in 0..n {
            let mut acc = self.diag[i] * x[i];
            if i >= 1 {
                acc += self.off1[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                acc += self.off1[i] * x[i + 1];
            }
            if i >= 2 {
                acc += self.off2[i - 2] * x[i - 2];
            }
            if i + 2 < n {
                acc += self.off2[i] * x[i + 2];
            }
            y[i] = acc;
        }
    }

    pub fn matvec_complex(&self, x: &[C64], y: &mut [C64]) {
        let n = self.dim();
        for i in 0..n {
            let mut acc = x[i] * self.diag[i];
            if i >= 1 {
                acc += x[i - 1] * self.off1[i - 1];
            }
            if i + 1 < n {
                acc += x[i + 1] * self.off1[i];
            }
            if i >= 2 {
                acc += x[i - 2] * self.off2[i - 2];
            }
            if i + 2 < n {
                acc += x[i + 2] * self.off2[i];
            }
            y[i] = acc;
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| self.entry(i, j))
    }

    /// Gershgorin lower bound on the spectrum.
    pub fn gershgorin_min(&self) -> f64 {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut radius = 0.0;
                if i >= 1 {
                    radius += self.off1[i - 1].abs();
                }
                if i + 1 < n {
                    radius += self.off1[i].abs();
                }
                if i >= 2 {
                    radius += self.off2[i - 2].abs();
                }
                if i + 2 < n {
                    radius += self.off2[i].abs();
                }
                self.diag[i] - radius
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Gershgorin upper bound, used as a crude operator-norm scale.
    pub fn gershgorin_max(&self) -> f64 {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut radius = 0.0;
                if i >= 1 {
                    radius += self.off1[i - 1].abs();
                }
                if i + 1 < n {
                    radius += self.off1[i].abs();
                }
                if i >= 2 {
                    radius += self.off2[i - 2].abs();
                }
                if i + 2 < n {
                    radius += self.off2[i].abs();
                }
                self.diag[i] + radius
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// LU factorization of a banded matrix with `kl` sub- and `ku`
/// superdiagonals, with partial pivoting (fill expands the upper bandwidth
/// to `ku + kl`). LAPACK-style column band storage.
pub struct BandedLu<T> {
    n: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    ab: Vec<T>,
    ipiv: Vec<usize>,
}

impl<T> BandedLu<T>
where
    T: ComplexField<RealField = f64> + Copy,
{
    /// Empty factorization workspace for repeated use via [`Self::refactor`].
    pub fn workspace(n: usize, kl: usize, ku: usize) -> Self {
        let ldab = 2 * kl + ku + 1;
        BandedLu { n, kl, ku, ldab, ab: vec![T::zero(); ldab * n], ipiv: vec![0; n] }
    }

    /// Factor the matrix whose entry (i, j) is produced by `entry`.
    /// Returns `None` when an exactly zero pivot appears.
    pub fn factor(n: usize, kl: usize, ku: usize, entry: impl Fn(usize, usize) -> T) -> Option<Self> {
        let mut lu = Self::workspace(n, kl, ku);
        lu.refactor(entry).then_some(lu)
    }

    /// Refill and refactor in place; returns `false` on an exactly zero
    /// pivot.
    pub fn refactor(&mut self, entry: impl Fn(usize, usize) -> T) -> bool {
        let (n, kl, ku, ldab) = (self.n, self.kl, self.ku, self.ldab);
        let ab = &mut self.ab;
        ab.fill(T::zero());
        for j in 0..n {
            let lo = j.saturating_sub(ku);
            let hi = (j + kl).min(n - 1);
            for i in lo..=hi {
                ab[j * ldab + kl + ku + i - j] = entry(i, j);
            }
        }
        let ipiv = &mut self.ipiv;
        let mut ju = 0usize;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let base = j * ldab + kl + ku;
            let mut jp = 0usize;
            let mut best = ab[base].modulus();
            for p in 1..=km {
                let m = ab[base + p].modulus();
                if m > best {
                    best = m;
                    jp = p;
                }
            }
            ipiv[j] = j + jp;
            if best == 0.0 {
                return false;
            }
            ju = ju.max((j + ku + jp).min(n - 1));
            if jp != 0 {
                for k in j..=ju {
                    let idx = k * ldab + kl + ku + j - k;
                    ab.swap(idx, idx + jp);
                }
            }
            if km > 0 {
                let piv = ab[base];
                for p in 1..=km {
                    ab[base + p] /= piv;
                }
                for k in (j + 1)..=ju {
                    let col = k * ldab + kl + ku + j - k;
                    let f = ab[col];
                    if f.modulus() != 0.0 {
                        for p in 1..=km {
                            let upd = ab[base + p] * f;
                            ab[col + p] -= upd;
                        }
                    }
                }
            }
        }
        true
    }

    pub fn solve_in_place(&self, b: &mut [T]) {
        assert_eq!(b.len(), self.n);
        let (n, kl, ku, ldab) = (self.n, self.kl, self.ku, self.ldab);
        for j in 0..n {
            let p = self.ipiv[j];
            if p != j {
                b.swap(j, p);
            }
            let km = kl.min(n - 1 - j);
            let bj = b[j];
            for q in 1..=km {
                let upd = self.ab[j * ldab + kl + ku + q] * bj;
                b[j + q] -= upd;
            }
        }
        for j in (0..n).rev() {
            let mut acc = b[j];
            let hi = (j + ku + kl).min(n - 1);
            for k in (j + 1)..=hi {
                let upd = self.ab[k * ldab + kl + ku + j - k] * b[k];
                acc -= upd;
            }
            b[j] = acc / self.ab[j * ldab + kl + ku];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    fn test_matrix(n: usize, seed: f64) -> BandedSym {
        let mut m = BandedSym::zeros(n);
        for i in 0..n {
            m.diag[i] = 2.0 + (seed * (i as f64 + 1.0)).sin();
        }
        for i in 0..n - 1 {
            m.off1[i] = (seed * (i as f64 + 0.3)).cos();
        }
        for i in 0..n - 2 {
            m.off2[i] = 0.5 * (seed * (i as f64 + 0.7)).sin();
        }
        m
    }

    #[test]
    fn matvec_matches_dense() {
        let m = test_matrix(17, 1.37);
        let x: Vec<f64> = (0..17).map(|i| (i as f64 * 0.21).cos()).collect();
        let mut y = vec![0.0; 17];
        m.matvec(&x, &mut y);
        let dense = m.to_dense() * DVector::from_vec(x);
        for i in 0..17 {
            assert!((y[i] - dense[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn real_banded_solve_matches_dense_lu() {
        let m = test_matrix(40, 0.83);
        let dense = m.to_dense();
        let rhs: Vec<f64> = (0..40).map(|i| (0.11 * i as f64).sin()).collect();
        let lu = BandedLu::<f64>::factor(40, 2, 2, |i, j| m.entry(i, j)).unwrap();
        let mut x = rhs.clone();
        lu.solve_in_place(&mut x);
        let expect = dense.lu().solve(&DVector::from_vec(rhs)).unwrap();
        for i in 0..40 {
            assert!((x[i] - expect[i]).abs() < 1e-10, "i={i}");
        }
    }

    #[test]
    fn complex_banded_solve_matches_dense_lu() {
        let m = test_matrix(33, 2.11);
        let shift = C64::new(0.3, 1.7);
        let entry = |i: usize, j: usize| {
            let mut v = C64::new(m.entry(i, j), 0.0);
            if i == j {
                v += shift;
            }
            v
        };
        let n = 33;
        let dense = DMatrix::from_fn(n, n, entry);
        let rhs: Vec<C64> =
            (0..n).map(|i| C64::new((0.2 * i as f64).cos(), (0.1 * i as f64).sin())).collect();
        let lu = BandedLu::<C64>::factor(n, 2, 2, entry).unwrap();
        let mut x = rhs.clone();
        lu.solve_in_place(&mut x);
        let expect = dense.lu().solve(&DVector::from_vec(rhs)).unwrap();
        for i in 0..n {
            assert!((x[i] - expect[i]).norm() < 1e-10, "i={i}");
        }
    }

    #[test]
    fn pivoting_handles_weak_diagonals() {
        // A matrix whose leading diagonal entry is tiny forces a row swap.
        let n = 12;
        let mut m = BandedSym::zeros(n);
        for i in 0..n {
            m.diag[i] = if i == 0 { 1e-14 } else { 0.1 };
        }
        for i in 0..n - 1 {
            m.off1[i] = 1.0;
        }
        let lu = BandedLu::<f64>::factor(n, 2, 2, |i, j| m.entry(i, j)).unwrap();
        let rhs: Vec<f64> = (0..n).map(|i| i as f64 + 1.0).collect();
        let mut x = rhs.clone();
        lu.solve_in_place(&mut x);
        let dense = m.to_dense();
        let expect = dense.lu().solve(&DVector::from_vec(rhs)).unwrap();
        for i in 0..n {
            assert!((x[i] - expect[i]).abs() < 1e-9, "i={i}: {} vs {}", x[i], expect[i]);
        }
    }
}
