//! A desk-scale laboratory for the sheaf-theoretic Radon transform.
//!
//! Everything on the sheaf/geometry side runs over exact rational arithmetic:
//! plane line arrangements with their face posets, cellular sheaves and their
//! (compactly supported) cohomology, microstalk and singular-support probes,
//! pointwise Radon stalks with direction barcodes, and the decategorified
//! Euler-calculus transforms with the exact inversion identity.  The contact
//! layer (the cotangent-space correspondences the transform quantizes) runs
//! generically over a scalar type so the same formulas can be driven in exact
//! rational mode or in floating point for finite-difference symplectic checks.
//!
//! Module map:
//! * [`exactlin`] — dense linear algebra over a field, graded dimensions,
//!   cochain complexes, mapping cones, persistence-style interval splitting.
//! * [`plgeom`] — exact rational line arrangements in the plane (and on the
//!   line), with sign-vector cells, incidence signs, and a circle at infinity.
//! * [`cellsheaf`] — cellular sheaves on arrangements: compilation from
//!   half-plane indicator data, sections, compactly supported cohomology,
//!   microstalks, singular support, mapping cones; 1-d sheaves and the
//!   positive-ray projector live in [`cellsheaf::line`].
//! * [`radon`] — the transform probed pointwise: stalks, wall sets, direction
//!   barcodes, singular-support image checks, simpleness transfer.
//! * [`euler`] — constructible functions, the Euler-calculus transform and its
//!   dual, the inversion identity, and the sphere (circle) dualities.
//! * [`contact`] — the cotangent correspondences, kernel predicates, kernel
//!   restriction embeddings, and float-mode symplectic checks.
//! * [`knot`] — piecewise-linear knot conormals pushed through the contact
//!   correspondence.

pub mod cellsheaf;
pub mod contact;
pub mod euler;
pub mod exactlin;
pub mod knot;
pub mod plgeom;
pub mod radon;
pub mod ratio;
pub mod scalar;

/// The exact scalar used throughout the geometry and sheaf layers.
pub type Rat = num_rational::BigRational;

/// Dense matrix over the exact rationals.
pub type QMat = exactlin::Mat<Rat>;

/// Cochain complex over the exact rationals.
pub type QComplex = exactlin::ChainComplex<Rat>;

/// Chain map between rational cochain complexes.
pub type QChainMap = exactlin::ChainMap<Rat>;

/// Convenience constructor for an exact rational from an integer.
pub fn rat(n: i64) -> Rat {
    Rat::from_integer(n.into())
}

/// Convenience constructor for an exact rational fraction `n/d`.
pub fn ratq(n: i64, d: i64) -> Rat {
    Rat::new(n.into(), d.into())
}
