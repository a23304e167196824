//! Matrix realizations of the ladder and quadrature operators.
//!
//! Convention: `[Q, P] = i`, `Q = (a + a†)/√2`, `P = i(a† − a)/√2`.
//! Polynomials in `Q` and `P` are formed by exact banded products in a space
//! extended by [`EXTENSION`] levels and then projected back, so every stored
//! entry equals the matrix element of the untruncated operator.

use num_complex::Complex64;

use super::banded::BandedOperator;
use crate::error::{Error, Result};

/// Extra levels used while forming products of degree up to four.
pub const EXTENSION: usize = 4;

const I: Complex64 = Complex64::new(0.0, 1.0);

pub(crate) fn check_cutoff(cutoff: usize) -> Result<()> {
    if cutoff < 2 {
        return Err(Error::CutoffTooSmall(cutoff));
    }
    Ok(())
}

pub fn annihilation(cutoff: usize) -> BandedOperator {
    let mut a = BandedOperator::zeros(cutoff, 1);
    for n in 1..cutoff {
        a.set_entry(n - 1, n, Complex64::new((n as f64).sqrt(), 0.0));
    }
    a
}

pub fn number(cutoff: usize) -> BandedOperator {
    BandedOperator::diagonal(cutoff, |n| Complex64::new(n as f64, 0.0)).into_hermitian()
}

/// `Q + dq` and `P + dp` on `cutoff + EXTENSION` levels.
pub fn extended_quadratures(cutoff: usize, dq: f64, dp: f64) -> (BandedOperator, BandedOperator) {
    let n = cutoff + EXTENSION;
    let a = annihilation(n);
    let ad = a.adjoint();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let q = a
        .combine(s.into(), &ad, s.into())
        .expect("same cutoff")
        .shifted(dq.into())
        .into_hermitian();
    let p = ad
        .combine(I * s, &a, -I * s)
        .expect("same cutoff")
        .shifted(dp.into())
        .into_hermitian();
    (q, p)
}

#[derive(Clone, Debug)]
pub struct StandardOps {
    pub a: BandedOperator,
    pub a_dag: BandedOperator,
    pub number: BandedOperator,
    pub q: BandedOperator,
    pub p: BandedOperator,
    pub q2: BandedOperator,
    pub p2: BandedOperator,
    pub q4: BandedOperator,
    /// `QP + PQ`
    pub qp_sym: BandedOperator,
}

impl StandardOps {
    pub fn new(cutoff: usize) -> Result<Self> {
        check_cutoff(cutoff)?;
        let (q, p) = extended_quadratures(cutoff, 0.0, 0.0);
        let q2 = q.mul(&q)?;
        let p2 = p.mul(&p)?;
        let q4 = q2.mul(&q2)?;
        let qp_sym = q.mul(&p)?.add(&p.mul(&q)?)?;
        let a = annihilation(cutoff);
        Ok(Self {
            a_dag: a.adjoint(),
            a,
            number: number(cutoff),
            q: q.truncated(cutoff),
            p: p.truncated(cutoff),
            q2: q2.truncated(cutoff).into_hermitian(),
            p2: p2.truncated(cutoff).into_hermitian(),
            q4: q4.truncated(cutoff).into_hermitian(),
            qp_sym: qp_sym.truncated(cutoff).into_hermitian(),
        })
    }

    pub fn cutoff(&self) -> usize {
        self.a.cutoff()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vacuum_moments() {
        let ops = StandardOps::new(16).unwrap();
        assert!((ops.q2.entry(0, 0).re - 0.5).abs() < 1e-15);
        assert!((ops.p2.entry(0, 0).re - 0.5).abs() < 1e-15);
        assert!((ops.q4.entry(0, 0).re - 0.75).abs() < 1e-15);
    }

    #[test]
    fn ladder_rule() {
        let ops = StandardOps::new(8).unwrap();
        let mut v = vec![Complex64::new(0.0, 0.0); 8];
        v[3] = 1.0.into();
        let out = ops.a.apply_vec(&v).unwrap();
        assert!((out[2].re - 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(out.iter().filter(|z| z.norm() > 0.0).count(), 1);
    }

    #[test]
    fn bandwidths() {
        let ops = StandardOps::new(10).unwrap();
        assert_eq!(ops.q.half_bandwidth(), 1);
        assert_eq!(ops.q2.half_bandwidth(), 2);
        assert_eq!(ops.qp_sym.half_bandwidth(), 2);
        assert_eq!(ops.q4.half_bandwidth(), 4);
    }

    #[test]
    fn projected_entries_are_exact_at_the_top() {
        // <N-1|Q^2|N-1> = (2n + 1)/2 only if the product was formed above the cutoff.
        let ops = StandardOps::new(6).unwrap();
        assert!((ops.q2.entry(5, 5).re - 5.5).abs() < 1e-14);
    }

    #[test]
    fn tiny_cutoff_is_rejected() {
        assert!(matches!(StandardOps::new(1), Err(Error::CutoffTooSmall(1))));
    }
}
