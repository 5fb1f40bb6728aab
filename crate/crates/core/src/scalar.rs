//! Scalar abstraction for the contact layer.
//!
//! The cotangent-space correspondences are rational maps plus one square root
//! (the norm of the fiber covector).  Running them generically over [`Scalar`]
//! lets the same code serve two regimes:
//!
//! * `f64` — float mode, used for finite-difference symplectic checks and the
//!   knot harness, where the square root always exists;
//! * [`crate::Rat`] — exact mode, where the square root is demanded exactly
//!   and callers are expected to feed Pythagorean inputs (rational vectors
//!   whose squared norm is a perfect square of a rational).
//!
//! Small vector helpers over `&[S]` live here too; the contact maps work in
//! any ambient dimension.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::Rng;

use crate::Rat;

/// Field operations plus an optional exact square root.
pub trait Scalar:
    Clone
    + PartialEq
    + PartialOrd
    + std::fmt::Debug
    + std::fmt::Display
    + Zero
    + One
    + num_traits::Num
    + std::ops::Neg<Output = Self>
{
    /// Whether arithmetic in this scalar is exact (no rounding).
    const EXACT: bool;

    /// Square root, if representable.  For `f64` this is `f64::sqrt` on
    /// non-negative inputs; for rationals it succeeds only on perfect squares.
    fn try_sqrt(&self) -> Option<Self>;

    /// Embed a rational constant.
    fn from_rat(r: &Rat) -> Self;

    /// Absolute value.
    fn abs(&self) -> Self;

    /// Tolerance for validating structural invariants (unit norms,
    /// orthogonality) at construction time: zero in exact mode, a fixed
    /// small slack in float mode.  Residual *measurements* never use this;
    /// it only guards against constructing nonsense points.
    fn tol() -> Self;
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn try_sqrt(&self) -> Option<Self> {
        if *self < 0.0 {
            None
        } else {
            Some(f64::sqrt(*self))
        }
    }

    fn from_rat(r: &Rat) -> Self {
        let n: f64 = bigint_to_f64(r.numer());
        let d: f64 = bigint_to_f64(r.denom());
        n / d
    }

    fn abs(&self) -> Self {
        f64::abs(*self)
    }

    fn tol() -> Self {
        1e-9
    }
}

fn bigint_to_f64(n: &BigInt) -> f64 {
    // Good enough for the magnitudes this lab produces.
    n.to_string().parse::<f64>().unwrap_or(f64::NAN)
}

impl Scalar for Rat {
    const EXACT: bool = true;

    fn try_sqrt(&self) -> Option<Self> {
        if self.is_negative() {
            return None;
        }
        if self.is_zero() {
            return Some(Rat::zero());
        }
        let n = self.numer().sqrt();
        let d = self.denom().sqrt();
        if &(&n * &n) == self.numer() && &(&d * &d) == self.denom() {
            Some(Rat::new(n, d))
        } else {
            None
        }
    }

    fn from_rat(r: &Rat) -> Self {
        r.clone()
    }

    fn abs(&self) -> Self {
        Signed::abs(self)
    }

    fn tol() -> Self {
        Rat::zero()
    }
}

/// Dot product of equal-length vectors.
pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    assert_eq!(a.len(), b.len(), "dot: length mismatch");
    a.iter()
        .zip(b)
        .fold(S::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

/// Componentwise sum.
pub fn add<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    a.iter().zip(b).map(|(x, y)| x.clone() + y.clone()).collect()
}

/// Componentwise difference.
pub fn sub<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    a.iter().zip(b).map(|(x, y)| x.clone() - y.clone()).collect()
}

/// Scale a vector.
pub fn scale<S: Scalar>(a: &[S], t: &S) -> Vec<S> {
    a.iter().map(|x| x.clone() * t.clone()).collect()
}

/// Negate a vector.
pub fn neg<S: Scalar>(a: &[S]) -> Vec<S> {
    a.iter().map(|x| -x.clone()).collect()
}

/// A rational point on the unit sphere in `dim` coordinates, built by the
/// inverse stereographic projection of a random rational vector.  Always has
/// exactly unit norm, so norms stay rational after any rational rescaling.
pub fn unit_sphere_point<R: Rng>(rng: &mut R, dim: usize) -> Vec<Rat> {
    assert!(dim >= 1);
    loop {
        // u in Q^{dim-1} with small entries; the map u -> (2u, |u|^2 - 1)/(|u|^2 + 1)
        // lands on the unit sphere.
        let u: Vec<Rat> = (0..dim - 1)
            .map(|_| {
                Rat::new(
                    BigInt::from(rng.gen_range(-12i64..=12)),
                    BigInt::from(rng.gen_range(1i64..=12)),
                )
            })
            .collect();
        let s: Rat = u.iter().map(|x| x * x).sum();
        let denom = &s + Rat::one();
        let mut v: Vec<Rat> = u
            .iter()
            .map(|x| Rat::from_integer(2.into()) * x / &denom)
            .collect();
        v.push((&s - Rat::one()) / &denom);
        // Avoid the south pole exactly at (0,...,0,-1) only when it would make
        // downstream samples degenerate; callers filter zeros themselves.
        if dim == 1 || !v.iter().take(dim - 1).all(|x| x.is_zero()) {
            return v;
        }
    }
}

/// A random rational vector with exactly rational Euclidean norm: a rational
/// multiple of a unit-sphere point.  Never the zero vector.
pub fn pythagorean_vector<R: Rng>(rng: &mut R, dim: usize) -> Vec<Rat> {
    let p = unit_sphere_point(rng, dim);
    let lambda = Rat::new(
        BigInt::from(rng.gen_range(1i64..=9) * if rng.gen_bool(0.5) { 1 } else { -1 }),
        BigInt::from(rng.gen_range(1i64..=4)),
    );
    scale(&p, &lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{rat, ratq};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exact_sqrt_on_perfect_squares_only() {
        assert_eq!(ratq(9, 4).try_sqrt(), Some(ratq(3, 2)));
        assert_eq!(rat(0).try_sqrt(), Some(rat(0)));
        assert_eq!(rat(2).try_sqrt(), None);
        assert_eq!(rat(-4).try_sqrt(), None);
    }

    #[test]
    fn sphere_points_are_unit_and_norms_rational() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for dim in [2usize, 3, 4] {
            for _ in 0..50 {
                let p = unit_sphere_point(&mut rng, dim);
                assert_eq!(dot(&p, &p), rat(1));
                let v = pythagorean_vector(&mut rng, dim);
                let n2 = dot(&v, &v);
                assert!(n2.try_sqrt().is_some(), "norm^2 {n2} not a perfect square");
                assert!(!v.iter().all(|x| x.is_zero()));
            }
        }
    }
}
