//! Conormal sampling of piecewise-linear knots in `ℝ³`.
//!
//! The unit conormal of a knot — covectors based on the knot and
//! annihilating its tangent — is a Legendrian torus in the unit cosphere
//! bundle.  This module samples that torus on a deterministic grid
//! (midpoints along each segment × uniform angles on the normal circle),
//! pushes the samples through the line-to-cylinder correspondence, and
//! measures how well the images satisfy what they should:
//!
//! * the cylinder constraints `‖n̂‖ = 1`, `η·n̂ = 0`, `η_r = 1`;
//! * agreement between the direct correspondence and the jet route,
//!   which coincide on unit covectors;
//! * the Legendrian condition — the canonical one-form `η·dn̂ + η_r·dr`
//!   vanishes along curves inside the conormal, measured by centered
//!   differences along the two in-surface directions through each sample
//!   (slide the base along the segment; rotate the fiber).
//!
//! This is a demonstration/regression harness, not a symbolic proof:
//! sampling is in floats, and the residual thresholds come from the
//! acceptance gates.  The grid core is generic over the scalar, so the
//! same code path runs exactly over the rationals whenever the segment
//! lengths and the fiber table are rational (axis-aligned knots with
//! quarter-turn fibers), which the tests use to pin the constraint
//! `p·t = 0` at zero on the nose.

use crate::contact::{chi, iota_phi, CotPoint, CylCotPoint};
use crate::scalar::{add, dot, scale, sub, Scalar};

#[derive(Debug, thiserror::Error)]
pub enum KnotError {
    #[error("a knot needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("vertex {0} must have 3 coordinates")]
    BadVertex(usize),
    #[error("segment {0} is degenerate")]
    DegenerateSegment(usize),
    #[error("sampling counts must be ≥ 1")]
    BadCounts,
    #[error("exact mode needs rational norms: {0}")]
    NotRepresentable(String),
    #[error("circle table entry {0} is not on the unit circle")]
    BadCircleEntry(usize),
    #[error("conormal constraint violated: {0}")]
    BadSample(String),
}

/// A closed polyline knot in `ℝ³`: vertex `i` connects to vertex
/// `i + 1`, and the last connects back to the first.
#[derive(Clone, Debug)]
pub struct PlKnot<S> {
    verts: Vec<Vec<S>>,
}

impl<S: Scalar> PlKnot<S> {
    pub fn new(verts: Vec<Vec<S>>) -> Result<Self, KnotError> {
        if verts.len() < 3 {
            return Err(KnotError::TooFewVertices(verts.len()));
        }
        for (i, v) in verts.iter().enumerate() {
            if v.len() != 3 {
                return Err(KnotError::BadVertex(i));
            }
        }
        for i in 0..verts.len() {
            let d = sub(&verts[(i + 1) % verts.len()], &verts[i]);
            if dot(&d, &d) <= S::tol() {
                return Err(KnotError::DegenerateSegment(i));
            }
        }
        Ok(PlKnot { verts })
    }

    pub fn vertices(&self) -> &[Vec<S>] {
        &self.verts
    }

    pub fn num_segments(&self) -> usize {
        self.verts.len()
    }

    /// Endpoints of segment `i`.
    pub fn segment(&self, i: usize) -> (&[S], &[S]) {
        (
            &self.verts[i],
            &self.verts[(i + 1) % self.verts.len()],
        )
    }
}

/// One point of the unit conormal: base `q` on segment `seg`, unit
/// covector `p` orthogonal to the unit tangent `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConormalSample<S> {
    pub q: Vec<S>,
    pub p: Vec<S>,
    pub t: Vec<S>,
    pub seg: usize,
}

impl<S: Scalar> ConormalSample<S> {
    pub fn new(q: Vec<S>, p: Vec<S>, t: Vec<S>, seg: usize) -> Result<Self, KnotError> {
        if q.len() != 3 || p.len() != 3 || t.len() != 3 {
            return Err(KnotError::BadSample("points live in ℝ³".into()));
        }
        if (dot(&p, &p) - S::one()).abs() > S::tol() {
            return Err(KnotError::BadSample(format!("‖p‖² = {}", dot(&p, &p))));
        }
        if (dot(&t, &t) - S::one()).abs() > S::tol() {
            return Err(KnotError::BadSample(format!("‖t‖² = {}", dot(&t, &t))));
        }
        let pairing = dot(&p, &t);
        if pairing.abs() > S::tol() {
            return Err(KnotError::BadSample(format!("p·t = {pairing}")));
        }
        Ok(ConormalSample { q, p, t, seg })
    }
}

fn cross<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    vec![
        a[1].clone() * b[2].clone() - a[2].clone() * b[1].clone(),
        a[2].clone() * b[0].clone() - a[0].clone() * b[2].clone(),
        a[0].clone() * b[1].clone() - a[1].clone() * b[0].clone(),
    ]
}

/// Deterministic conormal grid with an explicit fiber table.
///
/// `circle` lists `(cos θ, sin θ)` pairs; each base point gets the
/// covectors `cos θ·u + sin θ·v` in the orthonormal normal frame `(u, v)`
/// built from the coordinate axis least aligned with the tangent.  Base
/// points sit at the per-segment midpoint offsets `(j + ½)/per_seg`.
/// Everything stays in the scalar `S`; over the rationals this fails
/// loudly (rather than approximating) if a segment length or frame norm
/// is irrational.
pub fn sample_conormal_with<S: Scalar>(
    k: &PlKnot<S>,
    per_seg: usize,
    circle: &[(S, S)],
) -> Result<Vec<ConormalSample<S>>, KnotError> {
    if per_seg < 1 || circle.is_empty() {
        return Err(KnotError::BadCounts);
    }
    for (i, (c, s)) in circle.iter().enumerate() {
        let n2 = c.clone() * c.clone() + s.clone() * s.clone();
        if (n2 - S::one()).abs() > S::tol() {
            return Err(KnotError::BadCircleEntry(i));
        }
    }
    let sqrt = |v: &[S]| -> Result<S, KnotError> {
        let n2 = dot(v, v);
        n2.clone()
            .try_sqrt()
            .ok_or_else(|| KnotError::NotRepresentable(format!("‖·‖² = {n2}")))
    };
    let mut out = Vec::with_capacity(k.num_segments() * per_seg * circle.len());
    for i in 0..k.num_segments() {
        let (a, b) = k.segment(i);
        let d = sub(b, a);
        let len = sqrt(&d)?;
        let t = scale(&d, &(S::one() / len));
        // Normal frame: project away the tangent component of the least
        // aligned axis, then complete with the cross product.
        let mut axis = 0usize;
        for j in 1..3 {
            if t[j].abs() < t[axis].abs() {
                axis = j;
            }
        }
        let mut e = vec![S::zero(), S::zero(), S::zero()];
        e[axis] = S::one();
        let u_raw = sub(&e, &scale(&t, &dot(&e, &t)));
        let u = scale(&u_raw, &(S::one() / sqrt(&u_raw)?));
        let v = cross(&t, &u);
        for j in 0..per_seg {
            let frac = S::from_rat(&crate::Rat::new(
                (2 * j as i64 + 1).into(),
                (2 * per_seg as i64).into(),
            ));
            let q = add(a, &scale(&d, &frac));
            for (c, s) in circle {
                let p = add(&scale(&u, c), &scale(&v, s));
                out.push(ConormalSample {
                    q: q.clone(),
                    p,
                    t: t.clone(),
                    seg: i,
                });
            }
        }
    }
    Ok(out)
}

/// Deterministic conormal grid in floats: `per_fiber` uniform angles on
/// each normal circle.
pub fn sample_conormal(
    k: &PlKnot<f64>,
    per_seg: usize,
    per_fiber: usize,
) -> Result<Vec<ConormalSample<f64>>, KnotError> {
    if per_fiber < 1 {
        return Err(KnotError::BadCounts);
    }
    let circle: Vec<(f64, f64)> = (0..per_fiber)
        .map(|f| {
            let th = 2.0 * std::f64::consts::PI * f as f64 / per_fiber as f64;
            (th.cos(), th.sin())
        })
        .collect();
    sample_conormal_with(k, per_seg, &circle)
}

/// The documented 12-vertex trefoil: vertices at `t_k = 2πk/12` of the
/// curve `((2 + cos 3t)·cos 2t, (2 + cos 3t)·sin 2t, sin 3t)`.
///
/// The coordinates are frozen literals rather than live `cos`/`sin`
/// calls: trig evaluation is not bit-stable across optimization levels
/// (vectorized math libraries may differ from the scalar ones by an
/// ulp), and the sampling pipeline promises bit-identical geometry for
/// identical inputs in every build.
pub fn trefoil12() -> PlKnot<f64> {
    let verts = vec![
        vec![3.0, 0.0, 0.0],
        vec![1.0000000000000002, 1.7320508075688772, 1.0],
        vec![-0.4999999999999998, 0.8660254037844387, 1.2246467991473532e-16],
        vec![-1.9999999999999998, 2.449293598294706e-16, -1.0],
        vec![-1.5000000000000013, -2.598076211353315, -2.4492935982947064e-16],
        vec![1.0000000000000004, -1.7320508075688776, 1.0],
        vec![1.0, -2.4492935982947064e-16, 3.6739403974420594e-16],
        vec![1.0000000000000009, 1.7320508075688763, -1.0],
        vec![-1.4999999999999978, 2.5980762113533173, -4.898587196589413e-16],
        vec![-2.0000000000000004, 7.347880794884121e-16, 1.0],
        vec![-0.49999999999999983, -0.8660254037844387, 6.123233995736766e-16],
        vec![0.999999999999997, -1.732050807568876, -1.0],
    ];
    PlKnot::new(verts).expect("the documented model is non-degenerate")
}

/// One mapped sample with its measured residuals.
#[derive(Clone, Debug)]
pub struct MappedSample {
    pub image: CylCotPoint<f64>,
    /// Worst violation of `‖n̂‖ = 1`, `η·n̂ = 0`, `η_r = 1`.
    pub constraint_residual: f64,
    /// Componentwise gap between the correspondence and the jet route.
    pub route_residual: f64,
    /// Worst `|η·dn̂ + η_r·dr|` over the two in-conormal curves.
    pub legendrian_residual: f64,
}

/// Worst-case summary over a batch of mapped samples.
#[derive(Clone, Debug, serde::Serialize)]
pub struct ConormalReport {
    pub samples: usize,
    pub step: f64,
    pub max_constraint_residual: f64,
    pub max_route_residual: f64,
    pub max_legendrian_residual: f64,
    /// Distinct fiber angles over one base point map to distinct
    /// cylinder points, checked pairwise.
    pub fiber_injective: bool,
}

impl ConormalReport {
    pub fn pass(&self) -> bool {
        self.max_constraint_residual < 1e-10
            && self.max_route_residual < 1e-12
            && self.max_legendrian_residual < 1e-6
            && self.fiber_injective
    }
}

fn chi_of(q: &[f64], p: &[f64]) -> CylCotPoint<f64> {
    chi(&CotPoint {
        x: q.to_vec(),
        xi: p.to_vec(),
    })
    .expect("float norms always exist")
}

/// Push conormal samples through the correspondence and measure the
/// residuals; `step` is the centered-difference step for the Legendrian
/// check.
pub fn map_conormal(
    samples: &[ConormalSample<f64>],
    step: f64,
) -> (Vec<MappedSample>, ConormalReport) {
    let inv2h = 1.0 / (2.0 * step);
    let mut mapped = Vec::with_capacity(samples.len());
    let mut rep = ConormalReport {
        samples: samples.len(),
        step,
        max_constraint_residual: 0.0,
        max_route_residual: 0.0,
        max_legendrian_residual: 0.0,
        fiber_injective: true,
    };
    for s in samples {
        let image = chi_of(&s.q, &s.p);
        let (unit, orth) = image.residuals();
        let constraint = unit.max(orth).max((image.etar - 1.0).abs());

        let jet = iota_phi(&s.q, &s.p).expect("samples carry unit covectors");
        let mut route = (image.r - jet.r).abs().max((image.etar - jet.etar).abs());
        for i in 0..3 {
            route = route
                .max((image.nhat[i] - jet.nhat[i]).abs())
                .max((image.eta[i] - jet.eta[i]).abs());
        }

        // The one-form η·dn̂ + η_r·dr must vanish along curves inside the
        // conormal.  Curve 1 slides the base along the segment with the
        // covector fixed; curve 2 rotates the covector in the normal
        // circle with the base fixed.
        let alpha = |plus: &CylCotPoint<f64>, minus: &CylCotPoint<f64>| -> f64 {
            let mut a = image.etar * (plus.r - minus.r) * inv2h;
            for i in 0..3 {
                a += image.eta[i] * (plus.nhat[i] - minus.nhat[i]) * inv2h;
            }
            a.abs()
        };
        let slide = alpha(
            &chi_of(&add(&s.q, &scale(&s.t, &step)), &s.p),
            &chi_of(&sub(&s.q, &scale(&s.t, &step)), &s.p),
        );
        let perp = cross(&s.t, &s.p);
        let rotate = |ang: f64| add(&scale(&s.p, &ang.cos()), &scale(&perp, &ang.sin()));
        let turn = alpha(&chi_of(&s.q, &rotate(step)), &chi_of(&s.q, &rotate(-step)));
        let legendrian = slide.max(turn);

        rep.max_constraint_residual = rep.max_constraint_residual.max(constraint);
        rep.max_route_residual = rep.max_route_residual.max(route);
        rep.max_legendrian_residual = rep.max_legendrian_residual.max(legendrian);
        mapped.push(MappedSample {
            image,
            constraint_residual: constraint,
            route_residual: route,
            legendrian_residual: legendrian,
        });
    }

    // Fiber injectivity: samples sharing a base point (bitwise, as the
    // grid clones each base) must land on pairwise distinct images.
    let mut start = 0;
    while start < samples.len() {
        let mut end = start + 1;
        while end < samples.len()
            && samples[end].seg == samples[start].seg
            && samples[end].q == samples[start].q
        {
            end += 1;
        }
        for i in start..end {
            for j in (i + 1)..end {
                let a = &mapped[i].image;
                let b = &mapped[j].image;
                let mut gap = (a.r - b.r).abs().max((a.etar - b.etar).abs());
                for c in 0..3 {
                    gap = gap
                        .max((a.nhat[c] - b.nhat[c]).abs())
                        .max((a.eta[c] - b.eta[c]).abs());
                }
                if gap <= 1e-9 {
                    rep.fiber_injective = false;
                }
            }
        }
        start = end;
    }
    (mapped, rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::neg;
    use crate::{rat, Rat};

    fn rv(v: &[i64]) -> Vec<Rat> {
        v.iter().map(|&c| rat(c)).collect()
    }

    fn square_unknot() -> PlKnot<Rat> {
        PlKnot::new(vec![
            rv(&[1, 1, 0]),
            rv(&[-1, 1, 0]),
            rv(&[-1, -1, 0]),
            rv(&[1, -1, 0]),
        ])
        .unwrap()
    }

    #[test]
    fn knot_validation() {
        assert!(matches!(
            PlKnot::<f64>::new(vec![vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0]]),
            Err(KnotError::TooFewVertices(2))
        ));
        assert!(matches!(
            PlKnot::new(vec![
                vec![0.0, 0.0, 0.0],
                vec![0.0, 0.0, 0.0],
                vec![1.0, 0.0, 0.0]
            ]),
            Err(KnotError::DegenerateSegment(0))
        ));
        // Closing segment degenerate: last equals first.
        assert!(matches!(
            PlKnot::new(vec![
                vec![0.0, 0.0, 0.0],
                vec![1.0, 0.0, 0.0],
                vec![0.0, 1.0, 0.0],
                vec![0.0, 0.0, 0.0]
            ]),
            Err(KnotError::DegenerateSegment(3))
        ));
        assert!(matches!(
            PlKnot::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]),
            Err(KnotError::BadVertex(0))
        ));
    }

    #[test]
    fn exact_grid_on_the_square_unknot() {
        let k = square_unknot();
        let circle = vec![
            (rat(1), rat(0)),
            (rat(0), rat(1)),
            (rat(-1), rat(0)),
            (rat(0), rat(-1)),
        ];
        let samples = sample_conormal_with(&k, 1, &circle).unwrap();
        assert_eq!(samples.len(), 16);
        for s in &samples {
            assert_eq!(dot(&s.p, &s.p), rat(1));
            assert_eq!(dot(&s.t, &s.t), rat(1));
            assert_eq!(dot(&s.p, &s.t), rat(0));
        }
        // Unit covectors make the correspondence affine: every image is
        // exactly (p, q·p, −q + p(q·p), 1).
        for s in &samples {
            let img = chi(&CotPoint {
                x: s.q.clone(),
                xi: s.p.clone(),
            })
            .unwrap();
            let qp = dot(&s.q, &s.p);
            assert_eq!(img.nhat, s.p);
            assert_eq!(img.r, qp);
            assert_eq!(img.eta, add(&neg(&s.q), &scale(&s.p, &qp)));
            assert_eq!(img.etar, rat(1));
        }
        // Each quarter-turn fiber circle of an in-plane segment contains
        // p = (0,0,1), whose image is (n̂ = (0,0,1), r = 0, η = −q, 1).
        for base in samples.chunks(4) {
            let s = base
                .iter()
                .find(|s| s.p == rv(&[0, 0, 1]))
                .expect("vertical covector in every fiber circle");
            let img = chi(&CotPoint {
                x: s.q.clone(),
                xi: s.p.clone(),
            })
            .unwrap();
            assert_eq!(img.nhat, rv(&[0, 0, 1]));
            assert_eq!(img.r, rat(0));
            assert_eq!(img.eta, neg(&s.q));
            assert_eq!(img.etar, rat(1));
        }
    }

    #[test]
    fn exact_mode_rejects_irrational_frames() {
        let k = PlKnot::new(vec![
            rv(&[0, 0, 0]),
            rv(&[1, 1, 0]),
            rv(&[0, 2, 0]),
        ])
        .unwrap();
        let circle = vec![(rat(1), rat(0))];
        assert!(matches!(
            sample_conormal_with(&k, 1, &circle),
            Err(KnotError::NotRepresentable(_))
        ));
    }

    #[test]
    fn trefoil_literals_match_the_documented_formula() {
        for (k, v) in trefoil12().vertices().iter().enumerate() {
            let t = 2.0 * std::f64::consts::PI * k as f64 / 12.0;
            let rad = 2.0 + (3.0 * t).cos();
            let formula = [rad * (2.0 * t).cos(), rad * (2.0 * t).sin(), (3.0 * t).sin()];
            for (a, b) in v.iter().zip(formula) {
                assert!((a - b).abs() < 1e-13, "vertex {k}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn float_grid_counts_and_constraints() {
        let k = trefoil12();
        assert_eq!(k.vertices().len(), 12);
        let samples = sample_conormal(&k, 10, 16).unwrap();
        assert_eq!(samples.len(), 1920);
        for s in &samples {
            assert!((dot(&s.p, &s.p) - 1.0).abs() < 1e-12);
            assert!(dot(&s.p, &s.t).abs() < 1e-12);
        }
        assert!(matches!(
            sample_conormal(&k, 0, 16),
            Err(KnotError::BadCounts)
        ));
        assert!(matches!(
            sample_conormal(&k, 10, 0),
            Err(KnotError::BadCounts)
        ));
    }

    #[test]
    fn single_sample_matches_the_worked_image() {
        let s = ConormalSample::new(
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
            0,
        )
        .unwrap();
        let (mapped, rep) = map_conormal(std::slice::from_ref(&s), 1e-4);
        let img = &mapped[0].image;
        assert!((img.nhat[0]).abs() < 1e-15 && (img.nhat[1] - 1.0).abs() < 1e-15);
        assert!(img.r.abs() < 1e-15);
        assert!((img.eta[0] + 1.0).abs() < 1e-15 && img.eta[1].abs() < 1e-15);
        assert!((img.etar - 1.0).abs() < 1e-15);
        assert!(rep.pass(), "{rep:?}");
    }

    #[test]
    fn conormal_samples_reject_bad_data() {
        assert!(ConormalSample::new(
            vec![0.0, 0.0, 0.0],
            vec![0.0, 2.0, 0.0],
            vec![1.0, 0.0, 0.0],
            0
        )
        .is_err());
        assert!(ConormalSample::new(
            vec![0.0, 0.0, 0.0],
            vec![0.5, 0.5, 0.5],
            vec![1.0, 0.0, 0.0],
            0
        )
        .is_err());
    }

    #[test]
    fn trefoil_batch_passes_all_residuals() {
        let samples = sample_conormal(&trefoil12(), 10, 16).unwrap();
        let (mapped, rep) = map_conormal(&samples, 1e-4);
        assert_eq!(mapped.len(), 1920);
        assert!(rep.pass(), "{rep:?}");
        for m in &mapped {
            assert!(m.image.in_positive_part());
            assert!((m.image.etar - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn fiber_injectivity_detects_duplicates() {
        let s = ConormalSample::new(
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
            0,
        )
        .unwrap();
        let (_, rep) = map_conormal(&[s.clone(), s], 1e-4);
        assert!(!rep.fiber_injective);
    }
}
