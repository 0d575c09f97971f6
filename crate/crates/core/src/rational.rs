//! Exact-arithmetic similitudes over the rationals.
//!
//! When every coefficient of a system is rational, composition is exact and
//! map equality is decidable, which is what exact-overlap detection needs.
//! The contraction is stored as the ratio r itself (not its log, which is
//! typically irrational).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{FelError, Result};
use crate::similitude::Similitude;

pub type Rat = BigRational;

pub fn rat(num: i64, den: i64) -> Rat {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// x -> r U x + a with rational r, U, a. U must be orthogonal; rational
/// orthogonal matrices exist (signed permutations, Pythagorean rotations).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RatSimilitude {
    pub r: Rat,
    /// Row-major d x d.
    pub u: Vec<Rat>,
    pub a: Vec<Rat>,
}

impl RatSimilitude {
    pub fn new(r: Rat, u: Vec<Rat>, a: Vec<Rat>) -> Result<Self> {
        let d = a.len();
        if u.len() != d * d {
            return Err(FelError::DimensionMismatch(u.len(), d * d));
        }
        // exact orthogonality: U^T U = I
        for i in 0..d {
            for j in 0..d {
                let mut s = Rat::zero();
                for k in 0..d {
                    s += &u[k * d + i] * &u[k * d + j];
                }
                let want = if i == j { Rat::one() } else { Rat::zero() };
                if s != want {
                    return Err(FelError::InvalidParameter("rational linear part not orthogonal".into()));
                }
            }
        }
        Ok(RatSimilitude { r, u, a })
    }

    pub fn homothety(r: Rat, a: Vec<Rat>) -> Self {
        let d = a.len();
        let mut u = vec![Rat::zero(); d * d];
        for i in 0..d {
            u[i * d + i] = Rat::one();
        }
        RatSimilitude { r, u, a }
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn compose(&self, h: &RatSimilitude) -> RatSimilitude {
        let d = self.dim();
        debug_assert_eq!(d, h.dim());
        let mut u = vec![Rat::zero(); d * d];
        for i in 0..d {
            for j in 0..d {
                let mut s = Rat::zero();
                for k in 0..d {
                    s += &self.u[i * d + k] * &h.u[k * d + j];
                }
                u[i * d + j] = s;
            }
        }
        let mut a = self.a.clone();
        for i in 0..d {
            let mut s = Rat::zero();
            for k in 0..d {
                s += &self.u[i * d + k] * &h.a[k];
            }
            a[i] += &self.r * s;
        }
        RatSimilitude { r: &self.r * &h.r, u, a }
    }

    pub fn to_float(&self) -> Similitude {
        let d = self.dim();
        let conv = |x: &Rat| -> f64 {
            let n = x.numer();
            let de = x.denom();
            // go through string only when magnitudes exceed f64-exact ints
            let nf = bigint_to_f64(n);
            let df = bigint_to_f64(de);
            nf / df
        };
        let u = nalgebra::DMatrix::from_fn(d, d, |i, j| conv(&self.u[i * d + j]));
        let a = nalgebra::DVector::from_fn(d, |i, _| conv(&self.a[i]));
        let r = conv(&self.r);
        Similitude { t: -r.log2(), u, a }
    }
}

fn bigint_to_f64(x: &BigInt) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_compose_and_equality() {
        // phi1 = x/2, phi2 = x/2 + 1/2, phi3 = x/2 + 1:
        // phi1 o phi3 = x/4 + 1/2 = phi2 o phi1
        let p1 = RatSimilitude::homothety(rat(1, 2), vec![rat(0, 1)]);
        let p2 = RatSimilitude::homothety(rat(1, 2), vec![rat(1, 2)]);
        let p3 = RatSimilitude::homothety(rat(1, 2), vec![rat(1, 1)]);
        let left = p1.compose(&p3);
        let right = p2.compose(&p1);
        assert_eq!(left, right);
        assert_eq!(left.r, rat(1, 4));
        assert_eq!(left.a[0], rat(1, 2));
    }

    #[test]
    fn signed_permutation_is_orthogonal() {
        let u = vec![rat(0, 1), rat(-1, 1), rat(1, 1), rat(0, 1)];
        let g = RatSimilitude::new(rat(1, 3), u, vec![rat(1, 7), rat(2, 7)]).unwrap();
        let f = g.to_float();
        assert!((f.ratio() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn pythagorean_rotation_accepted() {
        // (3/5, -4/5; 4/5, 3/5) is rational orthogonal
        let u = vec![rat(3, 5), rat(-4, 5), rat(4, 5), rat(3, 5)];
        assert!(RatSimilitude::new(rat(1, 2), u, vec![rat(0, 1), rat(0, 1)]).is_ok());
    }
}
