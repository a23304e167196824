//! Banded operators on a truncated Fock space.
//!
//! Entries are stored row-major within the band: row `m` holds the
//! `2b + 1` entries `A[m][m - b] ..= A[m][m + b]`, with out-of-range slots
//! kept at zero. Matrix-vector products therefore cost `O(N (2b + 1))`.

use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub struct BandedOperator {
    cutoff: usize,
    half_bandwidth: usize,
    data: Vec<Complex64>,
    hermitian: bool,
}

impl BandedOperator {
    pub fn zeros(cutoff: usize, half_bandwidth: usize) -> Self {
        Self {
            cutoff,
            half_bandwidth,
            data: vec![ZERO; cutoff * (2 * half_bandwidth + 1)],
            hermitian: false,
        }
    }

    pub fn identity(cutoff: usize) -> Self {
        Self::diagonal(cutoff, |_| ONE).into_hermitian()
    }

    /// Diagonal operator with entries `f(n)`.
    pub fn diagonal(cutoff: usize, f: impl Fn(usize) -> Complex64) -> Self {
        let mut op = Self::zeros(cutoff, 0);
        for n in 0..cutoff {
            op.data[n] = f(n);
        }
        op
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn half_bandwidth(&self) -> usize {
        self.half_bandwidth
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    #[inline]
    fn width(&self) -> usize {
        2 * self.half_bandwidth + 1
    }

    #[inline]
    fn slot(&self, row: usize, col: usize) -> Option<usize> {
        let b = self.half_bandwidth;
        if row >= self.cutoff || col >= self.cutoff || col + b < row || col > row + b {
            return None;
        }
        Some(row * self.width() + (col + b - row))
    }

    /// Matrix element `<row|A|col>`; zero outside the band.
    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.slot(row, col).map_or(ZERO, |i| self.data[i])
    }

    /// Sets an entry inside the band. Clears the hermitian flag.
    pub fn set_entry(&mut self, row: usize, col: usize, value: Complex64) {
        let i = self
            .slot(row, col)
            .unwrap_or_else(|| panic!("entry ({row}, {col}) outside band {}", self.half_bandwidth));
        self.data[i] = value;
        self.hermitian = false;
    }

    /// Symmetrizes the upper triangle onto the lower one so that
    /// `entry(m, n) == conj(entry(n, m))` holds bit-exactly, and marks the
    /// operator hermitian.
    pub fn into_hermitian(mut self) -> Self {
        for m in 0..self.cutoff {
            let i = self.slot(m, m).unwrap();
            self.data[i] = Complex64::new(self.data[i].re, 0.0);
            for n in (m + 1)..(m + 1 + self.half_bandwidth).min(self.cutoff) {
                let upper = self.slot(m, n).unwrap();
                let lower = self.slot(n, m).unwrap();
                let avg = (self.data[upper] + self.data[lower].conj()) * 0.5;
                self.data[upper] = avg;
                self.data[lower] = avg.conj();
            }
        }
        self.hermitian = true;
        self
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cutoff, self.half_bandwidth);
        for m in 0..self.cutoff {
            for n in self.band_cols(m) {
                let i = out.slot(n, m).unwrap();
                out.data[i] = self.entry(m, n).conj();
            }
        }
        out.hermitian = self.hermitian;
        out
    }

    fn band_cols(&self, row: usize) -> std::ops::Range<usize> {
        let lo = row.saturating_sub(self.half_bandwidth);
        let hi = (row + self.half_bandwidth + 1).min(self.cutoff);
        lo..hi
    }

    /// Widens the stored band without changing any entry.
    pub fn widened(&self, half_bandwidth: usize) -> Self {
        if half_bandwidth <= self.half_bandwidth {
            return self.clone();
        }
        let mut out = Self::zeros(self.cutoff, half_bandwidth);
        for m in 0..self.cutoff {
            for n in self.band_cols(m) {
                let i = out.slot(m, n).unwrap();
                out.data[i] = self.entry(m, n);
            }
        }
        out.hermitian = self.hermitian;
        out
    }

    /// Restriction to the first `cutoff` levels (projection `P A P`).
    pub fn truncated(&self, cutoff: usize) -> Self {
        assert!(cutoff <= self.cutoff);
        let mut out = Self::zeros(cutoff, self.half_bandwidth);
        for m in 0..cutoff {
            for n in out.band_cols(m) {
                let i = out.slot(m, n).unwrap();
                out.data[i] = self.entry(m, n);
            }
        }
        out.hermitian = self.hermitian;
        out
    }

    /// Exact banded product `self * rhs`. Bandwidths add.
    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        self.check_cutoff(rhs.cutoff)?;
        let b = self.half_bandwidth + rhs.half_bandwidth;
        let mut out = Self::zeros(self.cutoff, b);
        for m in 0..self.cutoff {
            for k in self.band_cols(m) {
                let a = self.entry(m, k);
                if a == ZERO {
                    continue;
                }
                for n in rhs.band_cols(k) {
                    let i = out.slot(m, n).unwrap();
                    out.data[i] += a * rhs.entry(k, n);
                }
            }
        }
        Ok(out)
    }

    /// Linear combination `x * self + y * rhs`.
    pub fn combine(&self, x: Complex64, rhs: &Self, y: Complex64) -> Result<Self> {
        self.check_cutoff(rhs.cutoff)?;
        let b = self.half_bandwidth.max(rhs.half_bandwidth);
        let mut out = Self::zeros(self.cutoff, b);
        for m in 0..self.cutoff {
            for n in out.band_cols(m) {
                let i = out.slot(m, n).unwrap();
                out.data[i] = x * self.entry(m, n) + y * rhs.entry(m, n);
            }
        }
        Ok(out)
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.combine(ONE, rhs, ONE)
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= factor);
        out.hermitian = self.hermitian && factor.im == 0.0;
        out
    }

    /// `self + c * Identity`.
    pub fn shifted(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        for m in 0..self.cutoff {
            let i = out.slot(m, m).unwrap();
            out.data[i] += c;
        }
        out.hermitian = self.hermitian && c.im == 0.0;
        out
    }

    pub(crate) fn raw(&self) -> &[Complex64] {
        &self.data
    }

    pub(crate) fn raw_mut(&mut self) -> &mut [Complex64] {
        self.hermitian = false;
        &mut self.data
    }

    fn check_cutoff(&self, other: usize) -> Result<()> {
        if other != self.cutoff {
            return Err(Error::CutoffMismatch {
                expected: self.cutoff,
                found: other,
            });
        }
        Ok(())
    }

    /// `out = A x`.
    pub fn apply_into(&self, x: &[Complex64], out: &mut [Complex64]) -> Result<()> {
        self.check_cutoff(x.len())?;
        self.check_cutoff(out.len())?;
        let b = self.half_bandwidth;
        let w = self.width();
        for (m, y) in out.iter_mut().enumerate() {
            let row = &self.data[m * w..(m + 1) * w];
            let lo = m.saturating_sub(b);
            let hi = (m + b + 1).min(self.cutoff);
            let mut acc = ZERO;
            for n in lo..hi {
                acc += row[n + b - m] * x[n];
            }
            *y = acc;
        }
        Ok(())
    }

    /// `out += s * A x`.
    pub fn apply_add(&self, s: Complex64, x: &[Complex64], out: &mut [Complex64]) -> Result<()> {
        self.check_cutoff(x.len())?;
        self.check_cutoff(out.len())?;
        let b = self.half_bandwidth;
        let w = self.width();
        for (m, y) in out.iter_mut().enumerate() {
            let row = &self.data[m * w..(m + 1) * w];
            let lo = m.saturating_sub(b);
            let hi = (m + b + 1).min(self.cutoff);
            let mut acc = ZERO;
            for n in lo..hi {
                acc += row[n + b - m] * x[n];
            }
            *y += s * acc;
        }
        Ok(())
    }

    pub fn apply_vec(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut out = vec![ZERO; self.cutoff];
        self.apply_into(x, &mut out)?;
        Ok(out)
    }

    /// `<x|A|x>` without any normalization check.
    pub fn quadratic_form(&self, x: &[Complex64]) -> Result<Complex64> {
        self.check_cutoff(x.len())?;
        let b = self.half_bandwidth;
        let w = self.width();
        let mut total = ZERO;
        for m in 0..self.cutoff {
            let row = &self.data[m * w..(m + 1) * w];
            let lo = m.saturating_sub(b);
            let hi = (m + b + 1).min(self.cutoff);
            let mut acc = ZERO;
            for n in lo..hi {
                acc += row[n + b - m] * x[n];
            }
            total += x[m].conj() * acc;
        }
        Ok(total)
    }

    /// Dense row-major copy, for oracles and debugging.
    pub fn to_dense(&self) -> Vec<Complex64> {
        let n = self.cutoff;
        let mut out = vec![ZERO; n * n];
        for m in 0..n {
            for k in self.band_cols(m) {
                out[m * n + k] = self.entry(m, k);
            }
        }
        out
    }

    /// Maximum absolute row sum, an upper bound on the spectral norm.
    pub fn norm_bound(&self) -> f64 {
        (0..self.cutoff)
            .map(|m| self.band_cols(m).map(|n| self.entry(m, n).norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// In-place banded LU factorization without pivoting.
///
/// Only used for `I + i s H` with `H` hermitian, whose hermitian part is the
/// identity; such matrices admit a stable LU without row exchanges.
#[derive(Clone, Debug)]
pub struct BandedLu {
    cutoff: usize,
    half_bandwidth: usize,
    data: Vec<Complex64>,
}

impl BandedLu {
    pub fn factor(op: &BandedOperator) -> Result<Self> {
        let mut lu = Self {
            cutoff: op.cutoff,
            half_bandwidth: op.half_bandwidth,
            data: op.data.clone(),
        };
        lu.factor_current()?;
        Ok(lu)
    }

    /// Re-factors `op` reusing this factorization's storage.
    pub fn refactor(&mut self, op: &BandedOperator) -> Result<()> {
        self.cutoff = op.cutoff;
        self.half_bandwidth = op.half_bandwidth;
        self.data.clear();
        self.data.extend_from_slice(&op.data);
        self.factor_current()
    }

    fn factor_current(&mut self) -> Result<()> {
        let n = self.cutoff;
        let b = self.half_bandwidth;
        let w = 2 * b + 1;
        let data = &mut self.data;
        let idx = |row: usize, col: usize| row * w + (col + b - row);
        for k in 0..n {
            let pivot = data[idx(k, k)];
            if pivot.norm() == 0.0 || !pivot.is_finite() {
                return Err(Error::NonFinite(format!("zero pivot at row {k}")));
            }
            let inv = pivot.inv();
            for i in (k + 1)..(k + b + 1).min(n) {
                let l = data[idx(i, k)] * inv;
                data[idx(i, k)] = l;
                if l == ZERO {
                    continue;
                }
                for j in (k + 1)..(k + b + 1).min(n) {
                    let u = data[idx(k, j)];
                    data[idx(i, j)] -= l * u;
                }
            }
        }
        Ok(())
    }

    /// Solves `A x = rhs` in place.
    pub fn solve_in_place(&self, x: &mut [Complex64]) -> Result<()> {
        let n = self.cutoff;
        if x.len() != n {
            return Err(Error::CutoffMismatch {
                expected: n,
                found: x.len(),
            });
        }
        let b = self.half_bandwidth;
        let w = 2 * b + 1;
        let idx = |row: usize, col: usize| row * w + (col + b - row);
        for i in 0..n {
            let mut acc = x[i];
            for k in i.saturating_sub(b)..i {
                acc -= self.data[idx(i, k)] * x[k];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in (i + 1)..(i + b + 1).min(n) {
                acc -= self.data[idx(i, j)] * x[j];
            }
            x[i] = acc / self.data[idx(i, i)];
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn tridiag(n: usize) -> BandedOperator {
        let mut op = BandedOperator::zeros(n, 1);
        for m in 0..n {
            op.set_entry(m, m, c(2.0 + m as f64, 0.5));
            if m + 1 < n {
                op.set_entry(m, m + 1, c(0.3, -0.1 * m as f64));
                op.set_entry(m + 1, m, c(-0.7, 0.2));
            }
        }
        op
    }

    fn dense_mul(a: &[Complex64], b: &[Complex64], n: usize) -> Vec<Complex64> {
        let mut out = vec![ZERO; n * n];
        for i in 0..n {
            for k in 0..n {
                for j in 0..n {
                    out[i * n + j] += a[i * n + k] * b[k * n + j];
                }
            }
        }
        out
    }

    #[test]
    fn product_matches_dense() {
        let a = tridiag(7);
        let b = a.adjoint().mul(&a).unwrap();
        let dense = dense_mul(&a.adjoint().to_dense(), &a.to_dense(), 7);
        for (x, y) in b.to_dense().iter().zip(&dense) {
            assert!((x - y).norm() < 1e-13);
        }
        assert_eq!(b.half_bandwidth(), 2);
    }

    #[test]
    fn hermitian_symmetrization_is_exact() {
        let a = tridiag(6);
        let h = a.adjoint().mul(&a).unwrap().into_hermitian();
        for m in 0..6 {
            for n in 0..6 {
                assert_eq!(h.entry(m, n), h.entry(n, m).conj());
            }
        }
    }

    #[test]
    fn lu_solves_shifted_hermitian_system() {
        let a = tridiag(9);
        let h = a.adjoint().mul(&a).unwrap().into_hermitian();
        let sys = BandedOperator::identity(9).combine(ONE, &h, c(0.0, 0.37)).unwrap();
        let lu = BandedLu::factor(&sys).unwrap();
        let x: Vec<_> = (0..9).map(|k| c(k as f64 * 0.1, 1.0 - k as f64 * 0.05)).collect();
        let mut rhs = sys.apply_vec(&x).unwrap();
        lu.solve_in_place(&mut rhs).unwrap();
        for (u, v) in rhs.iter().zip(&x) {
            assert!((u - v).norm() < 1e-12);
        }
    }

    #[test]
    fn mismatched_cutoff_is_rejected() {
        let a = tridiag(4);
        assert!(matches!(
            a.apply_vec(&[ZERO; 5]),
            Err(Error::CutoffMismatch { expected: 4, found: 5 })
        ));
    }
}
