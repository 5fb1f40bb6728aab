//! Constructible functions on the rational unit circle and the
//! direction-space dualities of the transform: the two closed half-circle
//! kernels `R₊`, `R₋`, the boundary-pair pushforward `R_{P̂}`, the
//! antipodal pullback `τ*`, and the exact linear relations between them.
//!
//! Points are stored as primitive integer directions whose squared length
//! is a perfect square (Pythagorean directions), so unit coordinates stay
//! rational and every evaluation is scale-invariant exact arithmetic.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::plgeom::{ccw_cmp, primitive_dir, rot90};
use crate::Rat;

use super::{antipode, arc_samples, dot_int, EulerError};

/// A point of the unit circle with rational coordinates, stored as the
/// primitive integer direction together with its (integer) length.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CirclePoint {
    dir: (BigInt, BigInt),
    hyp: BigInt,
}

impl CirclePoint {
    /// From any nonzero rational vector pointing at a rational circle
    /// point; fails unless the primitive direction's squared length is a
    /// perfect square.
    pub fn from_dir(x: &Rat, y: &Rat) -> Result<CirclePoint, EulerError> {
        if x.is_zero() && y.is_zero() {
            return Err(EulerError::NotOnCircle("zero vector".into()));
        }
        let dir = primitive_dir(x, y);
        let n2 = &dir.0 * &dir.0 + &dir.1 * &dir.1;
        let hyp = n2.sqrt();
        if &hyp * &hyp != n2 {
            return Err(EulerError::NotOnCircle(format!(
                "({x}, {y}) does not point at a rational circle point"
            )));
        }
        Ok(CirclePoint { dir, hyp })
    }

    pub fn from_ints(x: i64, y: i64) -> Result<CirclePoint, EulerError> {
        CirclePoint::from_dir(&crate::rat(x), &crate::rat(y))
    }

    /// Rational parametrization `t ↦ ((1−t²)/(1+t²), 2t/(1+t²))`, hitting
    /// every rational circle point except `(−1, 0)`.
    pub fn from_param(t: &Rat) -> CirclePoint {
        let one = crate::rat(1);
        let t2 = t * t;
        let denom = &one + &t2;
        let x = (&one - &t2) / &denom;
        let y = (t + t) / &denom;
        CirclePoint::from_dir(&x, &y).expect("parametrized point is rational")
    }

    pub fn dir(&self) -> &(BigInt, BigInt) {
        &self.dir
    }

    /// Exact unit coordinates.
    pub fn unit(&self) -> (Rat, Rat) {
        (
            Rat::new(self.dir.0.clone(), self.hyp.clone()),
            Rat::new(self.dir.1.clone(), self.hyp.clone()),
        )
    }

    pub fn antipode(&self) -> CirclePoint {
        CirclePoint {
            dir: antipode(&self.dir),
            hyp: self.hyp.clone(),
        }
    }

    /// Counterclockwise quarter turn (stays Pythagorean).
    pub fn rotated90(&self) -> CirclePoint {
        CirclePoint {
            dir: rot90(&self.dir),
            hyp: self.hyp.clone(),
        }
    }
}

/// An integer constructible function on the circle: finitely many
/// rational points carrying values, constant on the open arcs between
/// consecutive points.  With no points it is a global constant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CFunCircle {
    /// Strictly increasing in the circular order anchored at `(1, 0)`.
    points: Vec<CirclePoint>,
    point_vals: Vec<i64>,
    /// `arc_vals[i]` lives on the open arc from `points[i]`
    /// counterclockwise to the next point; with no points the single
    /// entry is the constant value.
    arc_vals: Vec<i64>,
}

impl CFunCircle {
    pub fn constant(v: i64) -> CFunCircle {
        CFunCircle {
            points: Vec::new(),
            point_vals: Vec::new(),
            arc_vals: vec![v],
        }
    }

    /// Build from a breakpoint set (any order, duplicates collapse) and
    /// an evaluator defined on primitive directions.
    pub fn from_fn(points: Vec<CirclePoint>, f: &dyn Fn(&(BigInt, BigInt)) -> i64) -> CFunCircle {
        let mut pts = points;
        pts.sort_by(|p, q| ccw_cmp(&p.dir, &q.dir));
        pts.dedup_by(|p, q| p.dir == q.dir);
        if pts.is_empty() {
            return CFunCircle::constant(f(&(BigInt::from(1), BigInt::from(0))));
        }
        let m = pts.len();
        let point_vals = pts.iter().map(|p| f(&p.dir)).collect();
        let arc_vals = (0..m)
            .map(|i| {
                let (s, _) = arc_samples(&pts[i].dir, &pts[(i + 1) % m].dir);
                f(&s)
            })
            .collect();
        CFunCircle {
            points: pts,
            point_vals,
            arc_vals,
        }
    }

    pub fn points(&self) -> &[CirclePoint] {
        &self.points
    }

    /// Value at the circle point in direction `d` (any nonzero integer
    /// vector; only the ray matters).
    pub fn eval(&self, d: &(BigInt, BigInt)) -> i64 {
        if self.points.is_empty() {
            return self.arc_vals[0];
        }
        match self.points.binary_search_by(|p| ccw_cmp(&p.dir, d)) {
            Ok(i) => self.point_vals[i],
            Err(i) => {
                let m = self.points.len();
                self.arc_vals[(i + m - 1) % m]
            }
        }
    }

    /// `∫ φ dχ_c` over the circle: points count once, open arcs once
    /// negatively; a global constant integrates to `χ(S¹) = 0` times it.
    pub fn integral(&self) -> i64 {
        if self.points.is_empty() {
            return 0;
        }
        self.point_vals.iter().sum::<i64>() - self.arc_vals.iter().sum::<i64>()
    }

    /// Semantic equality: agreement at every breakpoint of either side
    /// and inside every arc of the common refinement.
    pub fn agrees_with(&self, other: &CFunCircle) -> bool {
        let mut union: Vec<&CirclePoint> = self.points.iter().chain(&other.points).collect();
        union.sort_by(|p, q| ccw_cmp(&p.dir, &q.dir));
        union.dedup_by(|p, q| p.dir == q.dir);
        if union.is_empty() {
            return self.arc_vals[0] == other.arc_vals[0];
        }
        let m = union.len();
        for i in 0..m {
            let d = &union[i].dir;
            if self.eval(d) != other.eval(d) {
                return false;
            }
            let (s, _) = arc_samples(d, &union[(i + 1) % m].dir);
            if self.eval(&s) != other.eval(&s) {
                return false;
            }
        }
        true
    }
}

/// Breakpoint candidates for the half-circle transforms of `phi`: as the
/// co-direction rotates, values change only when a boundary point
/// `±rot90` of the half-circle crosses a breakpoint of `phi`.
fn transform_points(phi: &CFunCircle) -> Vec<CirclePoint> {
    phi.points
        .iter()
        .flat_map(|p| {
            let b = p.rotated90();
            [b.antipode(), b]
        })
        .collect()
}

/// Integral of `phi` over the closed half-circle `{x : side·(x·y) ≥ 0}`.
fn half_integral(phi: &CFunCircle, y: &(BigInt, BigInt), side: i64) -> i64 {
    let b = rot90(y);
    let mut cuts: Vec<(BigInt, BigInt)> = phi.points.iter().map(|p| p.dir.clone()).collect();
    cuts.push(antipode(&b));
    cuts.push(b);
    cuts.sort_by(ccw_cmp);
    cuts.dedup();
    let in_side = |v: &BigInt| {
        if side > 0 {
            !v.is_negative()
        } else {
            !v.is_positive()
        }
    };
    let m = cuts.len();
    let mut total = 0i64;
    for i in 0..m {
        let d = &cuts[i];
        if in_side(&dot_int(d, y)) {
            total += phi.eval(d);
        }
        // Open arcs never straddle the boundary: both boundary points are
        // cuts, so one interior sample decides the whole arc.
        let (s, _) = arc_samples(d, &cuts[(i + 1) % m]);
        let pairing = dot_int(&s, y);
        debug_assert!(!pairing.is_zero());
        if in_side(&pairing) {
            total -= phi.eval(&s);
        }
    }
    total
}

/// `(R₊φ)(y) = ∫ φ · 1_{x·y ≥ 0} dχ`.
pub fn radon_plus(phi: &CFunCircle) -> CFunCircle {
    CFunCircle::from_fn(transform_points(phi), &|y| half_integral(phi, y, 1))
}

/// `(R₋φ)(y) = ∫ φ · 1_{x·y ≤ 0} dχ`, computed independently of `R₊` so
/// the antipodal relation between them remains a genuine check.
pub fn radon_minus(phi: &CFunCircle) -> CFunCircle {
    CFunCircle::from_fn(transform_points(phi), &|y| half_integral(phi, y, -1))
}

/// Boundary-pair pushforward `(R_{P̂}φ)(y) = φ(b₊) + φ(b₋)` over the two
/// points where the half-circle's boundary meets the circle.
pub fn radon_proj(phi: &CFunCircle) -> CFunCircle {
    CFunCircle::from_fn(transform_points(phi), &|y| {
        let b = rot90(y);
        phi.eval(&b) + phi.eval(&antipode(&b))
    })
}

/// Antipodal pullback `(τ*ψ)(y) = ψ(−y)`.
pub fn tau_pullback(psi: &CFunCircle) -> CFunCircle {
    CFunCircle::from_fn(
        psi.points.iter().map(CirclePoint::antipode).collect(),
        &|y| psi.eval(&antipode(y)),
    )
}

pub fn add(a: &CFunCircle, b: &CFunCircle) -> CFunCircle {
    let pts = a.points.iter().chain(&b.points).cloned().collect();
    CFunCircle::from_fn(pts, &|d| a.eval(d) + b.eval(d))
}

pub fn scale(a: &CFunCircle, k: i64) -> CFunCircle {
    CFunCircle::from_fn(a.points.clone(), &|d| k * a.eval(d))
}

pub fn add_constant(a: &CFunCircle, k: i64) -> CFunCircle {
    CFunCircle::from_fn(a.points.clone(), &|d| a.eval(d) + k)
}

/// Polarization `φ + τ*φ`.
pub fn polarized(a: &CFunCircle) -> CFunCircle {
    add(a, &tau_pullback(a))
}

/// Joint verdict on the three exact relations tying the half-circle
/// transforms together.
#[derive(Clone, Debug)]
pub struct CircleDualityReport {
    pub integral: i64,
    /// `R₊φ + R₋φ = (∫φ) + R_{P̂}φ`.
    pub sum_rule: bool,
    /// `τ*(R₊φ) = R₋φ`.
    pub antipodal_rule: bool,
    /// `R₊φ + τ*(R₊φ) = (∫φ) + R_{P̂}φ`.
    pub polarization_rule: bool,
}

impl CircleDualityReport {
    pub fn pass(&self) -> bool {
        self.sum_rule && self.antipodal_rule && self.polarization_rule
    }
}

pub fn circle_dualities(phi: &CFunCircle) -> CircleDualityReport {
    let plus = radon_plus(phi);
    let minus = radon_minus(phi);
    let proj = radon_proj(phi);
    let integral = phi.integral();
    let rhs = add_constant(&proj, integral);
    CircleDualityReport {
        integral,
        sum_rule: add(&plus, &minus).agrees_with(&rhs),
        antipodal_rule: tau_pullback(&plus).agrees_with(&minus),
        polarization_rule: polarized(&plus).agrees_with(&rhs),
    }
}

/// Deterministic random function over a pool of Pythagorean directions,
/// for the duality soak tests.
pub fn random_cfun_circle<R: Rng>(rng: &mut R, max_points: usize) -> CFunCircle {
    let pool: Vec<CirclePoint> = [
        (1, 0),
        (0, 1),
        (-1, 0),
        (0, -1),
        (3, 4),
        (-3, 4),
        (3, -4),
        (-3, -4),
        (4, 3),
        (-4, -3),
        (5, 12),
        (-12, 5),
    ]
    .iter()
    .map(|&(x, y)| CirclePoint::from_ints(x, y).unwrap())
    .collect();
    let mut idx: Vec<usize> = (0..pool.len()).collect();
    idx.shuffle(rng);
    let k = rng.gen_range(0..=max_points.min(pool.len()));
    if k == 0 {
        return CFunCircle::constant(rng.gen_range(-3..=3));
    }
    let mut pts: Vec<CirclePoint> = idx[..k].iter().map(|&i| pool[i].clone()).collect();
    pts.sort_by(|p, q| ccw_cmp(&p.dir, &q.dir));
    let point_vals = (0..k).map(|_| rng.gen_range(-3..=3)).collect();
    let arc_vals = (0..k).map(|_| rng.gen_range(-3..=3)).collect();
    CFunCircle {
        points: pts,
        point_vals,
        arc_vals,
    }
}

/// The distinct primitive Pythagorean directions present in a set of
/// points (used by callers assembling breakpoint pools).
pub fn distinct_dirs(points: &[CirclePoint]) -> Vec<(BigInt, BigInt)> {
    points
        .iter()
        .map(|p| p.dir.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{rat, ratq};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cp(x: i64, y: i64) -> CirclePoint {
        CirclePoint::from_ints(x, y).unwrap()
    }

    fn bigs(x: i64, y: i64) -> (BigInt, BigInt) {
        (BigInt::from(x), BigInt::from(y))
    }

    fn indicator_point(p: &CirclePoint) -> CFunCircle {
        let d = p.dir().clone();
        CFunCircle::from_fn(vec![p.clone()], &|u| i64::from(*u == d))
    }

    #[test]
    fn rational_points() {
        let p = CirclePoint::from_param(&ratq(1, 2));
        assert_eq!(p.dir(), &bigs(3, 4));
        assert_eq!(p.unit(), (ratq(3, 5), ratq(4, 5)));
        assert_eq!(CirclePoint::from_param(&rat(0)).dir(), &bigs(1, 0));
        assert!(CirclePoint::from_ints(1, 1).is_err());
        assert!(CirclePoint::from_ints(0, 0).is_err());
        assert_eq!(cp(10, 0).unit(), (rat(1), rat(0)));
        assert_eq!(cp(5, 12).unit(), (ratq(5, 13), ratq(12, 13)));
        assert_eq!(cp(3, 4).antipode().dir(), &bigs(-3, -4));
        assert_eq!(cp(3, 4).rotated90().dir(), &bigs(-4, 3));
    }

    #[test]
    fn evaluation_and_integral() {
        assert_eq!(CFunCircle::constant(5).integral(), 0);
        let point = indicator_point(&cp(1, 0));
        assert_eq!(point.eval(&bigs(1, 0)), 1);
        assert_eq!(point.eval(&bigs(2, 0)), 1);
        assert_eq!(point.eval(&bigs(0, 1)), 0);
        assert_eq!(point.integral(), 1);
        // A closed half-circle: two endpoints, one arc.
        let half = CFunCircle::from_fn(vec![cp(0, 1), cp(0, -1)], &|d| {
            i64::from(!d.0.is_negative())
        });
        assert_eq!(half.eval(&bigs(1, 0)), 1);
        assert_eq!(half.eval(&bigs(0, 1)), 1);
        assert_eq!(half.eval(&bigs(-1, 0)), 0);
        assert_eq!(half.integral(), 2 - 1);
    }

    #[test]
    fn whole_circle_dualities() {
        let one = CFunCircle::constant(1);
        assert_eq!(one.integral(), 0);
        let plus = radon_plus(&one);
        let proj = radon_proj(&one);
        for d in [bigs(1, 0), bigs(0, 1), bigs(-3, 4)] {
            assert_eq!(plus.eval(&d), 1, "closed half-circle has χ = 1");
            assert_eq!(proj.eval(&d), 2);
        }
        assert!(circle_dualities(&one).pass());
    }

    #[test]
    fn point_mass_dualities() {
        let phi = indicator_point(&cp(1, 0));
        let plus = radon_plus(&phi);
        assert_eq!(plus.eval(&bigs(0, 1)), 1, "boundary point still counts");
        assert_eq!(plus.eval(&bigs(1, 0)), 1);
        assert_eq!(plus.eval(&bigs(-1, 0)), 0);
        assert!(circle_dualities(&phi).pass());
    }

    #[test]
    fn pullback_involution_and_polarization() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let phi = random_cfun_circle(&mut rng, 6);
            assert!(tau_pullback(&tau_pullback(&phi)).agrees_with(&phi));
            let pol = polarized(&phi);
            assert!(tau_pullback(&pol).agrees_with(&pol));
        }
    }

    #[test]
    fn dualities_on_random_functions() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for round in 0..20 {
            let phi = random_cfun_circle(&mut rng, 6);
            let report = circle_dualities(&phi);
            assert!(report.pass(), "round {round}: {report:?}");
        }
    }

    #[test]
    fn transform_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let a = random_cfun_circle(&mut rng, 5);
        let b = random_cfun_circle(&mut rng, 5);
        let lhs = radon_plus(&add(&scale(&a, 2), &b));
        let rhs = add(&scale(&radon_plus(&a), 2), &radon_plus(&b));
        assert!(lhs.agrees_with(&rhs));
    }
}
