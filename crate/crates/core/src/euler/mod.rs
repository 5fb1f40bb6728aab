//! The decategorified layer: integer-valued constructible functions on
//! line arrangements, integration against compactly supported Euler
//! characteristic, the Euler-calculus shadow of the transform, its dual,
//! and the exact inversion identity `φ = (∫φ dχ) − R′Rφ`.
//!
//! Everything here is exact.  Offsets follow the scaled convention of
//! [`crate::radon`]: a query along a primitive integer direction `d` at
//! scaled offset `ρ` means the closed half-plane `{x : x·d ≤ ρ}`.
//!
//! The circle-level dualities (half-circle transforms on direction space
//! and their linear relations) live in [`circle`].

pub mod circle;

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{Signed, Zero};
use rand::Rng;
use serde::Deserialize;

use crate::cellsheaf::spec::ConstraintRepr;
use crate::cellsheaf::{CellSheaf, CsError};
use crate::plgeom::{ccw_cmp, primitive_dir, rot90, Arrangement2D, Constraint, LCSet, Line};
use crate::radon::{scaled_offset, wall_set, LineQuery, RadonError};
use crate::{rat, ratq, Rat};

#[derive(Debug, thiserror::Error)]
pub enum EulerError {
    #[error("the function must be compactly supported here")]
    UnboundedSupport,
    #[error("oracle is not constructible over the supplied data: {0}")]
    NonConstructible(String),
    #[error("not a rational circle point: {0}")]
    NotOnCircle(String),
    #[error(transparent)]
    Radon(#[from] RadonError),
    #[error(transparent)]
    Sheaf(#[from] CsError),
}

/// An integer-valued constructible function on the plane, stored as one
/// value per cell of a rational line arrangement.
#[derive(Clone, Debug)]
pub struct CFun {
    arr: Arc<Arrangement2D>,
    vals: Vec<i64>,
}

/// A formal integer combination of indicators of locally closed sets.
#[derive(Clone, Debug, Default)]
pub struct CFunSpec {
    pub indicators: Vec<(LCSet, i64)>,
}

impl CFunSpec {
    pub fn lines(&self) -> Vec<Line> {
        self.indicators
            .iter()
            .flat_map(|(s, _)| s.required_lines())
            .collect()
    }
}

impl CFun {
    pub fn zero(arr: Arc<Arrangement2D>) -> CFun {
        let n = arr.cells().len();
        CFun {
            arr,
            vals: vec![0; n],
        }
    }

    pub fn from_values(arr: Arc<Arrangement2D>, vals: Vec<i64>) -> Result<CFun, CsError> {
        if vals.len() != arr.cells().len() {
            return Err(CsError::BadData(format!(
                "expected {} cell values, got {}",
                arr.cells().len(),
                vals.len()
            )));
        }
        Ok(CFun { arr, vals })
    }

    pub fn compile(spec: &CFunSpec) -> Result<CFun, CsError> {
        CFun::compile_on(Arc::new(Arrangement2D::build(&spec.lines())), spec)
    }

    /// Compile on a fixed arrangement, which must carry every line the
    /// indicators constrain against.
    pub fn compile_on(arr: Arc<Arrangement2D>, spec: &CFunSpec) -> Result<CFun, CsError> {
        let mut out = CFun::zero(arr.clone());
        for (set, value) in &spec.indicators {
            for c in set.compile(&arr).map_err(CsError::Geometry)? {
                out.vals[c] += value;
            }
        }
        Ok(out)
    }

    pub fn arrangement(&self) -> &Arc<Arrangement2D> {
        &self.arr
    }

    pub fn values(&self) -> &[i64] {
        &self.vals
    }

    pub fn value(&self, cell: usize) -> i64 {
        self.vals[cell]
    }

    pub fn value_at(&self, p: &(Rat, Rat)) -> i64 {
        self.vals[self.arr.locate(p)]
    }

    pub fn set_value(&mut self, cell: usize, v: i64) {
        self.vals[cell] = v;
    }

    /// The same function on the arrangement refined by `extra` lines.
    pub fn refined(&self, extra: &[Line]) -> CFun {
        let (fine, map) = self.arr.with_lines(extra);
        CFun {
            arr: Arc::new(fine),
            vals: map.iter().map(|&old| self.vals[old]).collect(),
        }
    }

    /// Pointwise sum, on the union arrangement.
    pub fn plus(&self, other: &CFun) -> CFun {
        let mut lines = self.arr.lines().to_vec();
        lines.extend(other.arr.lines().iter().cloned());
        let arr = Arc::new(Arrangement2D::build(&lines));
        let vals = arr
            .cells()
            .iter()
            .map(|c| self.value_at(&c.sample) + other.value_at(&c.sample))
            .collect();
        CFun { arr, vals }
    }

    pub fn scaled(&self, k: i64) -> CFun {
        CFun {
            arr: self.arr.clone(),
            vals: self.vals.iter().map(|v| k * v).collect(),
        }
    }

    pub fn is_compactly_supported(&self) -> bool {
        self.vals
            .iter()
            .zip(self.arr.cells())
            .all(|(&v, c)| v == 0 || c.bounded)
    }
}

#[derive(Deserialize)]
struct CFunIndicatorRepr {
    #[serde(default)]
    constraints: Vec<ConstraintRepr>,
    #[serde(default = "one_i64")]
    value: i64,
}

fn one_i64() -> i64 {
    1
}

#[derive(Deserialize)]
struct CFunRepr {
    #[serde(default)]
    indicators: Vec<CFunIndicatorRepr>,
}

/// Parse a constructible function from JSON:
///
/// ```json
/// { "indicators": [
///     { "constraints": [ {"a":"1","b":"0","c":"0","rel":">="} ], "value": 2 }
/// ] }
/// ```
///
/// Each indicator is the characteristic function of the locally closed
/// set cut out by its constraints (`value` defaults to 1; an empty
/// constraint list means the whole plane).
pub fn cfun_from_json(json: &str) -> Result<CFun, CsError> {
    let repr: CFunRepr = serde_json::from_str(json)?;
    let mut spec = CFunSpec::default();
    for ind in &repr.indicators {
        let constraints: Vec<Constraint> = ind
            .constraints
            .iter()
            .map(|c| c.build())
            .collect::<Result<_, _>>()?;
        spec.indicators.push((LCSet::new(constraints), ind.value));
    }
    CFun::compile(&spec)
}

/// Pointwise Euler characteristic of the stalks of a sheaf.
pub fn local_euler(f: &CellSheaf) -> CFun {
    let arr = f.arrangement().clone();
    let vals = (0..arr.cells().len())
        .map(|c| f.stalk_complex(c).euler())
        .collect();
    CFun { arr, vals }
}

/// Compactly supported Euler characteristic of one open cell.  Bounded
/// cells contribute `(−1)^dim` directly; unbounded cells are counted
/// relative to the circle at infinity, `χ(c̄) − χ(c̄ ∖ c)` with the closure
/// taken in the disk compactification.  The two recipes agree, which the
/// tests assert rather than assume.
pub fn chi_c_cell(arr: &Arrangement2D, i: usize) -> i64 {
    let sign = |dim: u8| if dim % 2 == 0 { 1i64 } else { -1 };
    let cell = arr.cell(i);
    if cell.bounded {
        return sign(cell.dim);
    }
    let finite_rim: i64 = arr
        .closure(i)
        .iter()
        .filter(|&&j| j != i)
        .map(|&j| sign(arr.cell(j).dim))
        .sum();
    let mut rim = finite_rim + cell.inf_ends.len() as i64;
    if cell.dim == 2 {
        rim -= arr.inf_arcs().iter().filter(|a| a.owner == i).count() as i64;
    }
    arr.closure_disk_euler(i) - rim
}

/// `∫ φ dχ_c`, cell by cell.
pub fn euler_integral(phi: &CFun) -> i64 {
    phi.vals
        .iter()
        .enumerate()
        .map(|(c, &v)| v * chi_c_cell(&phi.arr, c))
        .sum()
}

fn dot(p: &(Rat, Rat), d: &(BigInt, BigInt)) -> Rat {
    &p.0 * Rat::from(d.0.clone()) + &p.1 * Rat::from(d.1.clone())
}

fn dot_int(u: &(BigInt, BigInt), v: &(BigInt, BigInt)) -> BigInt {
    &u.0 * &v.0 + &u.1 * &v.1
}

pub(crate) fn antipode(u: &(BigInt, BigInt)) -> (BigInt, BigInt) {
    (-u.0.clone(), -u.1.clone())
}

fn prim_int(x: BigInt, y: BigInt) -> (BigInt, BigInt) {
    let g = x.gcd(&y);
    assert!(!g.is_zero(), "zero direction");
    (x / &g, y / &g)
}

/// Transform of `phi` over the closed half-plane `{x·d ≤ rho}`, computed
/// by cutting the arrangement along the boundary line and summing `χ_c`
/// of the covered cells.
pub fn euler_radon_scaled(phi: &CFun, d: &(BigInt, BigInt), rho: &Rat) -> i64 {
    let cut = Line::new(Rat::from(d.0.clone()), Rat::from(d.1.clone()), rho.clone())
        .expect("primitive direction is nonzero");
    let fine = phi.refined(&[cut]);
    (0..fine.vals.len())
        .filter(|&c| dot(&fine.arr.cell(c).sample, d) <= *rho)
        .map(|c| fine.vals[c] * chi_c_cell(&fine.arr, c))
        .sum()
}

/// Transform at a co-oriented-line query.  Exact for any rational normal:
/// the (possibly irrational) scaled offset is replaced by a rational
/// representative of its wall chamber, where the transform is constant.
pub fn euler_radon(phi: &CFun, q: &LineQuery) -> Result<i64, RadonError> {
    let d = q.dir()?;
    let rho = scaled_offset(&phi.arr, q)?;
    Ok(euler_radon_scaled(phi, &d, &rho))
}

/// Whether `d` lies strictly inside the open counterclockwise arc from
/// `from` to `to` on the circle of directions.
fn arc_contains(from: &(BigInt, BigInt), to: &(BigInt, BigInt), d: &(BigInt, BigInt)) -> bool {
    use std::cmp::Ordering::*;
    if d == from || d == to {
        return false;
    }
    match ccw_cmp(from, to) {
        Less => ccw_cmp(from, d) == Less && ccw_cmp(d, to) == Less,
        Greater => ccw_cmp(from, d) == Less || ccw_cmp(d, to) == Less,
        Equal => true,
    }
}

/// Supremum of `x ↦ x·d` over cell `i` (equivalently over its closure);
/// `None` means `+∞`.  Finite suprema are witnessed by a closure vertex
/// or by a closure edge parallel to the level lines of `d`.
fn sup_scaled(arr: &Arrangement2D, i: usize, d: &(BigInt, BigInt)) -> Option<Rat> {
    let cell = arr.cell(i);
    if !cell.bounded {
        if arr.lines().is_empty() {
            return None;
        }
        for &k in &cell.inf_ends {
            if dot_int(&arr.inf_vertices()[k], d).is_positive() {
                return None;
            }
        }
        if cell.dim == 2 {
            for a in arr.inf_arcs() {
                if a.owner == i
                    && arc_contains(&arr.inf_vertices()[a.from], &arr.inf_vertices()[a.to], d)
                {
                    return None;
                }
            }
        }
    }
    let mut best: Option<Rat> = None;
    for j in arr.closure(i) {
        let cj = arr.cell(j);
        let cand = if let Some(p) = &cj.point {
            Some(dot(p, d))
        } else if cj.dim == 1 {
            let line = &arr.lines()[cj.line.expect("edges carry their line")];
            let (n, rho) = line.scaled_normal_form();
            if &n == d {
                Some(rho)
            } else if n.0 == -&d.0 && n.1 == -&d.1 {
                Some(-rho)
            } else {
                None
            }
        } else {
            None
        };
        if let Some(v) = cand {
            best = Some(match best {
                None => v,
                Some(b) => b.max(v),
            });
        }
    }
    Some(best.expect("cell with a bounded sweep has a closure witness"))
}

/// One direction's collapse of the sweep: a half-plane `{x·d ≤ ρ}` picks
/// up `(−1)^dim · φ(c)` from each cell exactly once `ρ` passes the cell's
/// supremum, so the transform along `d` is a pure step function.
struct DirTable {
    sups: Vec<Rat>,
    /// `prefix[k]` is the value once the first `k` jump positions are passed.
    prefix: Vec<i64>,
}

impl DirTable {
    fn eval(&self, rho: &Rat) -> i64 {
        let k = self.sups.partition_point(|s| s <= rho);
        self.prefix[k]
    }
}

fn dir_table(phi: &CFun, d: &(BigInt, BigInt)) -> DirTable {
    let mut steps: BTreeMap<Rat, i64> = BTreeMap::new();
    for (c, &v) in phi.vals.iter().enumerate() {
        if v == 0 {
            continue;
        }
        if let Some(sup) = sup_scaled(&phi.arr, c, d) {
            let signed = if phi.arr.cell(c).dim % 2 == 0 { v } else { -v };
            *steps.entry(sup).or_insert(0) += signed;
        }
    }
    let mut sups = Vec::with_capacity(steps.len());
    let mut prefix = Vec::with_capacity(steps.len() + 1);
    prefix.push(0);
    let mut acc = 0i64;
    for (s, v) in steps {
        acc += v;
        sups.push(s);
        prefix.push(acc);
    }
    DirTable { sups, prefix }
}

/// Memoizing evaluator of `(d, ρ) ↦ euler_radon_scaled(φ, d, ρ)` that
/// builds each direction's step table once.  Used as the ψ oracle when
/// composing the transform with its dual; a test pins it against the
/// refinement route.
pub struct RadonOracle<'a> {
    phi: &'a CFun,
    memo: RefCell<BTreeMap<(BigInt, BigInt), DirTable>>,
}

impl<'a> RadonOracle<'a> {
    pub fn new(phi: &'a CFun) -> RadonOracle<'a> {
        RadonOracle {
            phi,
            memo: RefCell::new(BTreeMap::new()),
        }
    }

    /// Value of the transform of `φ` at scaled offset `rho` along the
    /// primitive direction `d`.
    pub fn eval(&self, d: &(BigInt, BigInt), rho: &Rat) -> i64 {
        let mut memo = self.memo.borrow_mut();
        let table = memo
            .entry(d.clone())
            .or_insert_with(|| dir_table(self.phi, d));
        table.eval(rho)
    }

    /// Dual transform of the memoized function's transform, at `x`.
    pub fn dual_at(&self, x: &(Rat, Rat)) -> Result<i64, EulerError> {
        euler_radon_dual(
            &|d, rho| self.eval(d, rho),
            &|d| wall_set(&self.phi.arr, d),
            &dual_break_dirs(&self.phi.arr, x),
            x,
        )
    }
}

/// Two primitive directions strictly inside the open counterclockwise arc
/// from `u` to `v` (`u == v` reads as the full circle minus the point).
pub(crate) fn arc_samples(
    u: &(BigInt, BigInt),
    v: &(BigInt, BigInt),
) -> ((BigInt, BigInt), (BigInt, BigInt)) {
    if u == v {
        return (antipode(u), rot90(u));
    }
    let cross = &u.0 * &v.1 - &u.1 * &v.0;
    match cross.sign() {
        Sign::Plus => {
            let s1 = prim_int(&u.0 + &v.0, &u.1 + &v.1);
            let s2 = prim_int(&u.0 + &s1.0, &u.1 + &s1.1);
            (s1, s2)
        }
        Sign::Minus => (rot90(u), antipode(u)),
        Sign::NoSign => {
            // Antipodal endpoints: an open half-circle.
            let s1 = rot90(u);
            let s2 = prim_int(&u.0 + &s1.0, &u.1 + &s1.1);
            (s1, s2)
        }
    }
}

/// Dual transform `R′ψ(x) = ∫_{lines} ψ · 1_{x·n̂ ≥ r} dχ`, evaluated by
/// Fubini: an exact `χ_c`-integral over offsets `ρ ∈ (−∞, x·d]` for each
/// direction, then an exact integral over the circle of directions.
///
/// `psi` is an oracle taking a primitive direction and a scaled offset;
/// `walls_of` must return a superset of the offsets where `ψ(d, ·)`
/// jumps, and `break_dirs` a superset of the directions where the fiber
/// integral jumps.  Both contracts are probed: a jump detected off the
/// supplied sets, or a fiber that fails to vanish toward `r = −∞`, is a
/// [`EulerError::NonConstructible`] error instead of a wrong number.
pub fn euler_radon_dual(
    psi: &dyn Fn(&(BigInt, BigInt), &Rat) -> i64,
    walls_of: &dyn Fn(&(BigInt, BigInt)) -> Vec<Rat>,
    break_dirs: &[(BigInt, BigInt)],
    x: &(Rat, Rat),
) -> Result<i64, EulerError> {
    let fiber = |d: &(BigInt, BigInt)| -> Result<i64, EulerError> {
        let t = dot(x, d);
        let mut walls = walls_of(d);
        walls.sort();
        walls.dedup();
        let floor = match walls.first() {
            Some(w) if *w < t => w.clone(),
            _ => t.clone(),
        };
        let lead = psi(d, &(&floor - rat(1)));
        if lead != psi(d, &(&floor - rat(2))) {
            return Err(EulerError::NonConstructible(format!(
                "fiber along ({}, {}) jumps below the first supplied wall",
                d.0, d.1
            )));
        }
        if lead != 0 {
            return Err(EulerError::NonConstructible(format!(
                "fiber along ({}, {}) does not vanish toward -infinity",
                d.0, d.1
            )));
        }
        let below: Vec<&Rat> = walls.iter().filter(|w| **w <= t).collect();
        let off_wall_jump = || {
            EulerError::NonConstructible(format!(
                "fiber along ({}, {}) jumps off the supplied walls",
                d.0, d.1
            ))
        };
        let Some(&last) = below.last() else {
            if psi(d, &t) != 0 {
                return Err(off_wall_jump());
            }
            return Ok(0);
        };
        // χ_c of ψ over (−∞, t]: each covered wall point counts once,
        // each open gap between consecutive covered walls counts once
        // negatively, and the trailing half-open piece (last, t] cancels.
        let mut total = 0i64;
        for w in &below {
            total += psi(d, w);
        }
        for pair in below.windows(2) {
            let mid = (pair[0] + pair[1]) * ratq(1, 2);
            let third = (pair[0] + pair[0] + pair[1]) / rat(3);
            let gap = psi(d, &mid);
            if gap != psi(d, &third) {
                return Err(off_wall_jump());
            }
            total -= gap;
        }
        if *last < t && psi(d, &((last + &t) * ratq(1, 2))) != psi(d, &t) {
            return Err(off_wall_jump());
        }
        Ok(total)
    };

    let mut dirs: Vec<(BigInt, BigInt)> = break_dirs.to_vec();
    dirs.sort_by(ccw_cmp);
    dirs.dedup();
    if dirs.is_empty() {
        // Constant over the circle, so the integral is χ_c(S¹)·value = 0;
        // probe a few directions to honor the constancy claim.
        let a = fiber(&(BigInt::from(1), BigInt::from(0)))?;
        for probe in [(BigInt::from(0), BigInt::from(1)), (BigInt::from(-1), BigInt::from(-1))] {
            if fiber(&probe)? != a {
                return Err(EulerError::NonConstructible(
                    "the fiber integral jumps but no direction breakpoints were supplied".into(),
                ));
            }
        }
        return Ok(0);
    }
    let mut total = 0i64;
    for (k, u) in dirs.iter().enumerate() {
        total += fiber(u)?;
        let v = &dirs[(k + 1) % dirs.len()];
        let (s1, s2) = arc_samples(u, v);
        let a = fiber(&s1)?;
        if a != fiber(&s2)? {
            return Err(EulerError::NonConstructible(format!(
                "the fiber integral jumps strictly between directions ({}, {}) and ({}, {})",
                u.0, u.1, v.0, v.1
            )));
        }
        total -= a;
    }
    Ok(total)
}

/// A superset of the directions where the dual transform's fiber integral
/// at `x` can jump, for any function carried by `arr`: normals to all
/// differences among arrangement vertices and `x`, plus every line's
/// normals and directions (the latter bound the recession cones).
pub fn dual_break_dirs(arr: &Arrangement2D, x: &(Rat, Rat)) -> Vec<(BigInt, BigInt)> {
    let mut pts: Vec<(Rat, Rat)> = arr
        .cells()
        .iter()
        .filter_map(|c| c.point.clone())
        .collect();
    pts.push(x.clone());
    let mut dirs: BTreeSet<(BigInt, BigInt)> = BTreeSet::new();
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            let dx = &pts[i].0 - &pts[j].0;
            let dy = &pts[i].1 - &pts[j].1;
            if dx.is_zero() && dy.is_zero() {
                continue;
            }
            let neg_dy = -dy;
            let n = primitive_dir(&neg_dy, &dx);
            dirs.insert(antipode(&n));
            dirs.insert(n);
        }
    }
    for line in arr.lines() {
        let n = primitive_dir(line.a(), line.b());
        let u = rot90(&n);
        dirs.insert(antipode(&n));
        dirs.insert(antipode(&u));
        dirs.insert(n);
        dirs.insert(u);
    }
    dirs.into_iter().collect()
}

/// The composed kernel `K(x, y) = R′[R 1_{x}](y)`, evaluated through the
/// full transform/dual machinery on a point mass.  The inversion identity
/// rests on `K` being `1` off the diagonal and `0` on it.
pub fn composed_kernel(x: &(Rat, Rat), y: &(Rat, Rat)) -> Result<i64, EulerError> {
    let lines = vec![
        Line::new(rat(1), rat(0), x.0.clone()).expect("vertical line"),
        Line::new(rat(0), rat(1), x.1.clone()).expect("horizontal line"),
    ];
    let arr = Arc::new(Arrangement2D::build(&lines));
    let mut delta = CFun::zero(arr.clone());
    let v = arr.locate(x);
    delta.vals[v] = 1;
    let oracle = RadonOracle::new(&delta);
    oracle.dual_at(y)
}

/// One reconstruction probe of the inversion identity.
#[derive(Clone, Debug)]
pub struct InversionSample {
    pub point: (Rat, Rat),
    pub value: i64,
    pub reconstructed: i64,
}

/// Outcome of checking `φ = (∫φ dχ) − R′Rφ` at one sample point per cell,
/// with the composed kernel's two constants re-derived through the engine
/// rather than assumed.
#[derive(Clone, Debug)]
pub struct InversionReport {
    pub integral: i64,
    pub kernel_off_diagonal: Vec<i64>,
    pub kernel_diagonal: Vec<i64>,
    pub samples: Vec<InversionSample>,
}

impl InversionReport {
    pub fn pass(&self) -> bool {
        self.kernel_off_diagonal.iter().all(|&k| k == 1)
            && self.kernel_diagonal.iter().all(|&k| k == 0)
            && self.samples.iter().all(|s| s.value == s.reconstructed)
    }
}

/// Verify the inversion identity for a compactly supported function.
pub fn inversion_check(phi: &CFun) -> Result<InversionReport, EulerError> {
    if !phi.is_compactly_supported() {
        return Err(EulerError::UnboundedSupport);
    }
    let kernel_off_diagonal = vec![
        composed_kernel(&(rat(0), rat(0)), &(rat(1), rat(0)))?,
        composed_kernel(&(rat(0), rat(0)), &(rat(2), rat(3)))?,
        composed_kernel(&(rat(1), rat(2)), &(ratq(1, 2), rat(-1)))?,
    ];
    let kernel_diagonal = vec![
        composed_kernel(&(rat(0), rat(0)), &(rat(0), rat(0)))?,
        composed_kernel(&(ratq(-3, 2), ratq(5, 7)), &(ratq(-3, 2), ratq(5, 7)))?,
    ];
    let integral = euler_integral(phi);
    let oracle = RadonOracle::new(phi);
    let mut samples = Vec::new();
    for c in 0..phi.arr.cells().len() {
        let point = phi.arr.cell(c).sample.clone();
        let reconstructed = integral - oracle.dual_at(&point)?;
        samples.push(InversionSample {
            point,
            value: phi.vals[c],
            reconstructed,
        });
    }
    Ok(InversionReport {
        integral,
        kernel_off_diagonal,
        kernel_diagonal,
        samples,
    })
}

/// Deterministic random compactly supported function on a small random
/// arrangement: values in `[-3, 3]` on bounded cells, at least one
/// nonzero.  Used by the inversion soak tests.
pub fn random_compact_cfun<R: Rng>(rng: &mut R, max_lines: usize) -> CFun {
    let max_lines = max_lines.max(3);
    loop {
        let nlines = rng.gen_range(3..=max_lines);
        let mut lines = Vec::new();
        for _ in 0..nlines {
            let a = rng.gen_range(-3i64..=3);
            let b = rng.gen_range(-3i64..=3);
            let c = rng.gen_range(-3i64..=3);
            if let Ok(l) = Line::new(rat(a), rat(b), rat(c)) {
                lines.push(l);
            }
        }
        let arr = Arrangement2D::build(&lines);
        let bounded: Vec<usize> = (0..arr.cells().len())
            .filter(|&i| arr.cell(i).bounded)
            .collect();
        if bounded.is_empty() {
            continue;
        }
        let mut f = CFun::zero(Arc::new(arr));
        let mut any = false;
        for i in bounded {
            let v = rng.gen_range(-3i64..=3);
            any |= v != 0;
            f.vals[i] = v;
        }
        if any {
            return f;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cellsheaf::{GradedMat, IndicatorSpec, SheafMap, SheafSpec};
    use crate::plgeom::Rel;
    use crate::radon::radon_stalk;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn halfplane_ge(a: i64, b: i64, c: i64) -> LCSet {
        LCSet::new(vec![
            Constraint::new(rat(a), rat(b), rat(c), Rel::Ge).unwrap()
        ])
    }

    fn unit_square() -> LCSet {
        LCSet::new(vec![
            Constraint::new(rat(1), rat(0), rat(0), Rel::Ge).unwrap(),
            Constraint::new(rat(1), rat(0), rat(1), Rel::Le).unwrap(),
            Constraint::new(rat(0), rat(1), rat(0), Rel::Ge).unwrap(),
            Constraint::new(rat(0), rat(1), rat(1), Rel::Le).unwrap(),
        ])
    }

    fn open_unit_square() -> LCSet {
        LCSet::new(vec![
            Constraint::new(rat(1), rat(0), rat(0), Rel::Gt).unwrap(),
            Constraint::new(rat(1), rat(0), rat(1), Rel::Lt).unwrap(),
            Constraint::new(rat(0), rat(1), rat(0), Rel::Gt).unwrap(),
            Constraint::new(rat(0), rat(1), rat(1), Rel::Lt).unwrap(),
        ])
    }

    fn origin() -> LCSet {
        LCSet::new(vec![
            Constraint::new(rat(1), rat(0), rat(0), Rel::Eq).unwrap(),
            Constraint::new(rat(0), rat(1), rat(0), Rel::Eq).unwrap(),
        ])
    }

    fn cf(sets: &[(LCSet, i64)]) -> CFun {
        CFun::compile(&CFunSpec {
            indicators: sets.iter().map(|(s, v)| (s.clone(), *v)).collect(),
        })
        .unwrap()
    }

    fn bigs(x: i64, y: i64) -> (BigInt, BigInt) {
        (BigInt::from(x), BigInt::from(y))
    }

    fn q(nx: i64, ny: i64, r: Rat) -> LineQuery {
        LineQuery::new((rat(nx), rat(ny)), r).unwrap()
    }

    fn pt(x: i64, y: i64) -> (Rat, Rat) {
        (rat(x), rat(y))
    }

    #[test]
    fn chi_c_cell_is_the_parity_sign() {
        let arrs = [
            Arrangement2D::build(&[]),
            Arrangement2D::build(&[Line::new(rat(0), rat(1), rat(0)).unwrap()]),
            Arrangement2D::build(&[
                Line::new(rat(1), rat(0), rat(0)).unwrap(),
                Line::new(rat(0), rat(1), rat(0)).unwrap(),
            ]),
            Arrangement2D::build(&[
                Line::new(rat(1), rat(0), rat(0)).unwrap(),
                Line::new(rat(0), rat(1), rat(0)).unwrap(),
                Line::new(rat(1), rat(1), rat(1)).unwrap(),
            ]),
            // A parallel pair: unbounded strip between full-line edges.
            Arrangement2D::build(&[
                Line::new(rat(0), rat(1), rat(0)).unwrap(),
                Line::new(rat(0), rat(1), rat(1)).unwrap(),
            ]),
        ];
        for arr in &arrs {
            let mut total = 0;
            for i in 0..arr.cells().len() {
                let expect = if arr.cell(i).dim % 2 == 0 { 1 } else { -1 };
                assert_eq!(chi_c_cell(arr, i), expect, "cell {i}");
                total += chi_c_cell(arr, i);
            }
            // The signs over any stratification add up to χ_c(R²) = 1.
            assert_eq!(total, 1);
        }
    }

    #[test]
    fn local_euler_of_indicator_sheaves() {
        let upper = CellSheaf::compile(&SheafSpec {
            indicators: vec![IndicatorSpec {
                support: halfplane_ge(0, 1, 0),
                shift: 0,
                mult: 1,
            }],
        })
        .unwrap();
        let le = local_euler(&upper);
        assert_eq!(le.value_at(&pt(0, 5)), 1);
        assert_eq!(le.value_at(&pt(0, 0)), 1);
        assert_eq!(le.value_at(&pt(0, -5)), 0);

        // A shift by one flips the sign of every stalk's Euler number.
        let shifted = CellSheaf::compile(&SheafSpec {
            indicators: vec![IndicatorSpec {
                support: unit_square(),
                shift: 1,
                mult: 1,
            }],
        })
        .unwrap();
        let le = local_euler(&shifted);
        assert_eq!(le.value_at(&(ratq(1, 2), ratq(1, 2))), -1);
        assert_eq!(le.value_at(&pt(0, 0)), -1);
        assert_eq!(le.value_at(&pt(5, 5)), 0);
    }

    #[test]
    fn local_euler_of_a_cone() {
        // cone(k_{x2>0} -> k_plane) has the stalks of k_{x2<=0}.
        let f = CellSheaf::compile(&SheafSpec {
            indicators: vec![IndicatorSpec {
                support: LCSet::new(vec![
                    Constraint::new(rat(0), rat(1), rat(0), Rel::Gt).unwrap()
                ]),
                shift: 0,
                mult: 1,
            }],
        })
        .unwrap();
        let arr = f.arrangement().clone();
        let k = CellSheaf::constant(arr.clone());
        let comps: Vec<GradedMat> = (0..arr.cells().len())
            .map(|c| {
                if f.stalk_dims(c).is_zero() {
                    GradedMat::zero()
                } else {
                    GradedMat::identity(&f.stalk_dims(c))
                }
            })
            .collect();
        let map = SheafMap::new(f, k, comps).unwrap();
        let cone = CellSheaf::cone_of(&map).unwrap();
        let le = local_euler(&cone);
        assert_eq!(le.value_at(&pt(0, -3)), 1);
        assert_eq!(le.value_at(&pt(0, 0)), 1);
        assert_eq!(le.value_at(&pt(0, 3)), 0);
    }

    #[test]
    fn integral_examples() {
        assert_eq!(euler_integral(&cf(&[(unit_square(), 1)])), 1);
        assert_eq!(euler_integral(&cf(&[(open_unit_square(), 1)])), 1);
        assert_eq!(euler_integral(&cf(&[(halfplane_ge(0, 1, 0), 1)])), 0);
        // A combination with a point mass, and linearity.
        let combo = cf(&[(unit_square(), 1), (origin(), -2)]);
        assert_eq!(euler_integral(&combo), -1);
        let a = cf(&[(unit_square(), 2)]);
        let b = cf(&[(halfplane_ge(1, 1, 0), 3)]);
        assert_eq!(
            euler_integral(&a.plus(&b)),
            euler_integral(&a) + euler_integral(&b)
        );
    }

    #[test]
    fn transform_examples() {
        let square = cf(&[(unit_square(), 1)]);
        assert_eq!(euler_radon(&square, &q(1, 0, ratq(1, 2))).unwrap(), 1);
        let upper = cf(&[(halfplane_ge(0, 1, 0), 1)]);
        assert_eq!(euler_radon(&upper, &q(0, 1, rat(0))).unwrap(), -1);
        let zero = CFun::zero(square.arrangement().clone());
        assert_eq!(euler_radon(&zero, &q(1, 1, ratq(1, 3))).unwrap(), 0);
        // Once the half-plane swallows the square the value settles at
        // χ(square) = 1; before it touches, 0.
        assert_eq!(euler_radon(&square, &q(1, 0, rat(7))).unwrap(), 1);
        assert_eq!(euler_radon(&square, &q(1, 0, rat(-7))).unwrap(), 0);
    }

    #[test]
    fn oracle_matches_the_refinement_route() {
        let phi = cf(&[
            (unit_square(), 2),
            (halfplane_ge(0, 1, 0), -1),
            (origin(), 3),
        ]);
        let oracle = RadonOracle::new(&phi);
        let dirs = [
            bigs(1, 0),
            bigs(0, 1),
            bigs(1, 1),
            bigs(-2, 3),
            bigs(0, -1),
            bigs(3, -5),
        ];
        let rhos = [
            rat(-2),
            ratq(-1, 2),
            rat(0),
            ratq(1, 3),
            ratq(1, 2),
            rat(1),
            ratq(3, 2),
            rat(7),
        ];
        for d in &dirs {
            for rho in &rhos {
                assert_eq!(
                    oracle.eval(d, rho),
                    euler_radon_scaled(&phi, d, rho),
                    "direction ({}, {}) offset {rho}",
                    d.0,
                    d.1
                );
            }
        }
    }

    #[test]
    fn transform_is_linear() {
        let a = cf(&[(unit_square(), 1)]);
        let b = cf(&[(halfplane_ge(1, -1, 0), 1)]);
        let combo = a.scaled(2).plus(&b.scaled(-3));
        for (nx, ny) in [(1, 0), (2, 1), (-1, 3)] {
            for r in [rat(-1), ratq(1, 4), rat(1)] {
                let query = q(nx, ny, r);
                assert_eq!(
                    euler_radon(&combo, &query).unwrap(),
                    2 * euler_radon(&a, &query).unwrap() - 3 * euler_radon(&b, &query).unwrap()
                );
            }
        }
    }

    #[test]
    fn transform_descends_from_the_sheaf_level() {
        // The Euler number of the sheaf-level transform stalk equals the
        // transform of the local Euler function.
        let f = CellSheaf::compile(&SheafSpec {
            indicators: vec![
                IndicatorSpec {
                    support: unit_square(),
                    shift: 0,
                    mult: 1,
                },
                IndicatorSpec {
                    support: halfplane_ge(0, 1, 0),
                    shift: 1,
                    mult: 2,
                },
            ],
        })
        .unwrap();
        let phi = local_euler(&f);
        for (nx, ny) in [(1, 0), (0, 1), (1, 1), (-2, 3)] {
            for r in [rat(-2), ratq(-1, 3), rat(0), ratq(1, 2), rat(2)] {
                let query = q(nx, ny, r.clone());
                assert_eq!(
                    radon_stalk(&f, &query).unwrap().euler(),
                    euler_radon(&phi, &query).unwrap(),
                    "query ({nx}, {ny}; {r})"
                );
            }
        }
    }

    #[test]
    fn dual_transform_examples() {
        let square = cf(&[(unit_square(), 1)]);
        let arr = square.arrangement().clone();
        let oracle = RadonOracle::new(&square);
        let dual_at = |y: &(Rat, Rat)| {
            euler_radon_dual(
                &|d, rho| oracle.eval(d, rho),
                &|d| wall_set(&arr, d),
                &dual_break_dirs(&arr, y),
                y,
            )
        };
        assert_eq!(dual_at(&pt(2, 2)).unwrap(), 1);
        assert_eq!(dual_at(&(ratq(1, 2), ratq(1, 2))).unwrap(), 0);

        // A fiber that never vanishes toward -infinity is rejected.
        let err = euler_radon_dual(
            &|_, _| 1,
            &|_| Vec::new(),
            &dual_break_dirs(&arr, &pt(0, 0)),
            &pt(0, 0),
        )
        .unwrap_err();
        assert!(matches!(err, EulerError::NonConstructible(_)));

        // A wall the caller forgot is detected, not silently missed.
        let err = euler_radon_dual(
            &|d, rho| oracle.eval(d, rho),
            &|_| Vec::new(),
            &dual_break_dirs(&arr, &pt(5, 5)),
            &pt(5, 5),
        )
        .unwrap_err();
        assert!(matches!(err, EulerError::NonConstructible(_)));

        // Missing direction breakpoints are detected by the arc probes.
        let err = euler_radon_dual(
            &|d, rho| oracle.eval(d, rho),
            &|d| wall_set(&arr, d),
            &[],
            &pt(5, 5),
        )
        .unwrap_err();
        assert!(matches!(err, EulerError::NonConstructible(_)));
    }

    #[test]
    fn composed_kernel_constants() {
        for (x, y) in [
            (pt(0, 0), pt(1, 0)),
            (pt(0, 0), pt(2, 3)),
            (pt(1, 2), (ratq(1, 2), rat(-1))),
            ((ratq(-2, 3), rat(5)), pt(0, 0)),
        ] {
            assert_eq!(composed_kernel(&x, &y).unwrap(), 1, "off-diagonal");
        }
        for x in [pt(0, 0), pt(3, -4), (ratq(1, 7), ratq(-2, 5))] {
            assert_eq!(composed_kernel(&x, &x).unwrap(), 0, "diagonal");
        }
    }

    #[test]
    fn inversion_examples() {
        let square = cf(&[(unit_square(), 1)]);
        let report = inversion_check(&square).unwrap();
        assert!(report.pass());
        assert_eq!(report.integral, 1);

        let zero = CFun::zero(square.arrangement().clone());
        assert!(inversion_check(&zero).unwrap().pass());

        let combo = cf(&[(unit_square(), 1), (origin(), -2)]);
        let report = inversion_check(&combo).unwrap();
        assert!(report.pass());
        assert_eq!(report.integral, -1);

        // Non-compact support is refused up front.
        let upper = cf(&[(halfplane_ge(0, 1, 0), 1)]);
        assert!(matches!(
            inversion_check(&upper),
            Err(EulerError::UnboundedSupport)
        ));
    }

    #[test]
    fn inversion_on_random_functions() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for round in 0..6 {
            let phi = random_compact_cfun(&mut rng, 5);
            let report = inversion_check(&phi).unwrap();
            assert!(
                report.pass(),
                "round {round}: lines {:?}, values {:?}",
                phi.arrangement().lines(),
                phi.values()
            );
        }
    }

    #[test]
    fn json_loading() {
        let phi = cfun_from_json(
            r#"{ "indicators": [
                { "constraints": [
                    { "a": "0", "b": "1", "c": "0", "rel": ">=" }
                  ], "value": 2 },
                { "constraints": [
                    { "a": "1", "b": "0", "c": "0", "rel": "=" },
                    { "a": "0", "b": "1", "c": "0", "rel": "=" }
                  ] }
            ] }"#,
        )
        .unwrap();
        assert_eq!(phi.value_at(&pt(0, 1)), 2);
        assert_eq!(phi.value_at(&pt(0, 0)), 3);
        assert_eq!(phi.value_at(&pt(0, -1)), 0);

        assert!(matches!(
            cfun_from_json("{ not json"),
            Err(CsError::Json(_))
        ));
        assert!(matches!(
            cfun_from_json(r#"{ "indicators": [ { "constraints": [
                { "a": "x", "b": "1", "c": "0", "rel": ">=" } ] } ] }"#),
            Err(CsError::BadData(_))
        ));
    }
}
