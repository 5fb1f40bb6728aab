//! Exact line arrangements in the rational plane.
//!
//! An [`Arrangement2D`] carries the stratification of the plane induced by a
//! finite set of rational lines: vertices, open edges, and open faces, each
//! identified by its sign vector against the (deduplicated, sorted) line
//! list.  Cells are convex and relatively open, so a sign vector determines
//! its cell; every cell stores an exact rational sample point.
//!
//! The face poset is exposed through `leq` (closure order on sign vectors)
//! plus covering pairs with incidence signs chosen so that the induced
//! cochain differentials square to zero: edges are oriented along their
//! line's direction `(-b, a)`, `[v:e]` is `+1` at the head and `-1` at the
//! tail, and `[e:f]` is minus the side of `f` against `e`'s line.
//!
//! For compactly-supported Euler characteristics the plane is compactified
//! to a closed disk by a circle at infinity: one vertex per primitive ray
//! direction of the lines, and one open arc per gap between consecutive
//! directions, owned by the unique unbounded face whose recession sector
//! contains that gap (strips and half-strips own no arc).

pub mod line1d;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{rat, Rat};

#[derive(Debug, thiserror::Error)]
pub enum PlGeomError {
    #[error("degenerate line: a and b are both zero")]
    DegenerateLine,
    #[error("line {0} is not part of the arrangement; refine first")]
    MissingLine(String),
}

/// Sign of an exact rational.
pub fn sgn(x: &Rat) -> i8 {
    if x.is_zero() {
        0
    } else if x.is_positive() {
        1
    } else {
        -1
    }
}

/// Primitive integer vector positively parallel to the rational vector `(x, y)`.
pub fn primitive_dir(x: &Rat, y: &Rat) -> (BigInt, BigInt) {
    assert!(!(x.is_zero() && y.is_zero()), "zero direction");
    let scale = x.denom().lcm(y.denom());
    let xi = x.numer() * (&scale / x.denom());
    let yi = y.numer() * (&scale / y.denom());
    let g = xi.gcd(&yi);
    (xi / &g, yi / &g)
}

/// Counterclockwise rotation by a quarter turn.
pub fn rot90(u: &(BigInt, BigInt)) -> (BigInt, BigInt) {
    (-u.1.clone(), u.0.clone())
}

fn cross_int(u: &(BigInt, BigInt), v: &(BigInt, BigInt)) -> BigInt {
    &u.0 * &v.1 - &u.1 * &v.0
}

/// Total circular order on nonzero directions, counterclockwise from `(1, 0)`.
pub fn ccw_cmp(u: &(BigInt, BigInt), v: &(BigInt, BigInt)) -> std::cmp::Ordering {
    let half = |w: &(BigInt, BigInt)| -> u8 {
        if w.1.is_positive() || (w.1.is_zero() && w.0.is_positive()) {
            0
        } else {
            1
        }
    };
    half(u).cmp(&half(v)).then_with(|| {
        let c = cross_int(u, v);
        if c.is_positive() {
            std::cmp::Ordering::Less
        } else if c.is_negative() {
            std::cmp::Ordering::Greater
        } else {
            std::cmp::Ordering::Equal
        }
    })
}

/// A rational line `a·x + b·y = c`, stored with primitive integer
/// coefficients whose first nonzero entry among `(a, b)` is positive.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Line {
    a: Rat,
    b: Rat,
    c: Rat,
}

impl fmt::Debug for Line {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x + {}y = {}", self.a, self.b, self.c)
    }
}

impl Line {
    /// Normalize; the boolean reports whether the defining equation was
    /// negated (callers tracking inequality sides must mirror them).
    pub fn normalize(a: Rat, b: Rat, c: Rat) -> Result<(Line, bool), PlGeomError> {
        if a.is_zero() && b.is_zero() {
            return Err(PlGeomError::DegenerateLine);
        }
        let scale = a.denom().lcm(b.denom()).lcm(c.denom());
        let scale = Rat::from_integer(scale);
        let (ai, bi, ci) = (&a * &scale, &b * &scale, &c * &scale);
        let g = ai.numer().gcd(bi.numer()).gcd(ci.numer());
        let lead = if ai.is_zero() { &bi } else { &ai };
        let flip = lead.is_negative();
        let g = Rat::from_integer(if flip { -g } else { g });
        Ok((
            Line {
                a: ai / &g,
                b: bi / &g,
                c: ci / &g,
            },
            flip,
        ))
    }

    pub fn new(a: Rat, b: Rat, c: Rat) -> Result<Line, PlGeomError> {
        Self::normalize(a, b, c).map(|(l, _)| l)
    }

    pub fn from_ints(a: i64, b: i64, c: i64) -> Line {
        Line::new(rat(a), rat(b), rat(c)).expect("degenerate line")
    }

    pub fn a(&self) -> &Rat {
        &self.a
    }

    pub fn b(&self) -> &Rat {
        &self.b
    }

    pub fn c(&self) -> &Rat {
        &self.c
    }

    /// Normal vector `(a, b)`.
    pub fn normal(&self) -> (Rat, Rat) {
        (self.a.clone(), self.b.clone())
    }

    /// The primitive integer normal `n` together with the line's offset in
    /// scaled units: points of the line satisfy `x·n = offset` exactly.
    /// Not the same as `c()` when the stored `(a, b)` pair shares a factor
    /// (normalization makes `(a, b, c)` jointly primitive, not `(a, b)`).
    pub fn scaled_normal_form(&self) -> ((BigInt, BigInt), Rat) {
        let n = primitive_dir(&self.a, &self.b);
        let g = if n.0.is_zero() {
            &self.b / Rat::from(n.1.clone())
        } else {
            &self.a / Rat::from(n.0.clone())
        };
        (n, &self.c / g)
    }

    /// Direction `(-b, a)` orienting the line.
    pub fn direction(&self) -> (Rat, Rat) {
        (-self.b.clone(), self.a.clone())
    }

    /// `a·x + b·y - c`; its sign tells the side.
    pub fn eval(&self, p: &(Rat, Rat)) -> Rat {
        &self.a * &p.0 + &self.b * &p.1 - &self.c
    }

    pub fn side(&self, p: &(Rat, Rat)) -> i8 {
        sgn(&self.eval(p))
    }

    /// The point of the line closest to the origin.
    pub fn base_point(&self) -> (Rat, Rat) {
        let n2 = &self.a * &self.a + &self.b * &self.b;
        (&self.a * &self.c / &n2, &self.b * &self.c / &n2)
    }

    /// Intersection point of two non-parallel lines.
    pub fn intersect(&self, other: &Line) -> Option<(Rat, Rat)> {
        let det = &self.a * &other.b - &other.a * &self.b;
        if det.is_zero() {
            return None;
        }
        let x = (&self.c * &other.b - &other.c * &self.b) / &det;
        let y = (&self.a * &other.c - &other.a * &self.c) / &det;
        Some((x, y))
    }
}

#[derive(Serialize, Deserialize)]
struct LineRepr {
    a: String,
    b: String,
    c: String,
}

impl Serialize for Line {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        LineRepr {
            a: crate::ratio::fmt_rat(&self.a),
            b: crate::ratio::fmt_rat(&self.b),
            c: crate::ratio::fmt_rat(&self.c),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for Line {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let r = LineRepr::deserialize(de)?;
        let p = |s: &str| crate::ratio::parse_rat(s).map_err(D::Error::custom);
        Line::new(p(&r.a)?, p(&r.b)?, p(&r.c)?).map_err(D::Error::custom)
    }
}

/// One stratum of the arrangement: a vertex, open edge, or open face.
#[derive(Clone, Debug)]
pub struct Cell {
    pub dim: u8,
    /// Sign against each arrangement line, in line order.
    pub signs: Vec<i8>,
    /// Exact point in the relative interior.
    pub sample: (Rat, Rat),
    /// Exact coordinates for vertices.
    pub point: Option<(Rat, Rat)>,
    /// Index of the supporting line for edges.
    pub line: Option<usize>,
    pub bounded: bool,
    /// Infinity vertices in the disk closure of this cell.
    pub inf_ends: Vec<usize>,
}

/// Open arc of the circle at infinity between consecutive infinity vertices
/// (counterclockwise `from -> to`), lying in the closure of face `owner`.
#[derive(Clone, Debug)]
pub struct InfArc {
    pub from: usize,
    pub to: usize,
    pub owner: usize,
}

/// The stratification of the plane by a finite set of rational lines,
/// together with its circle-at-infinity bookkeeping.
#[derive(Clone, Debug)]
pub struct Arrangement2D {
    lines: Vec<Line>,
    cells: Vec<Cell>,
    covers: Vec<(usize, usize, i8)>,
    up: Vec<Vec<(usize, i8)>>,
    down: Vec<Vec<(usize, i8)>>,
    sign_index: BTreeMap<Vec<i8>, usize>,
    inf_vertices: Vec<(BigInt, BigInt)>,
    inf_arcs: Vec<InfArc>,
}

struct RawCell {
    dim: u8,
    signs: Vec<i8>,
    sample: (Rat, Rat),
    point: Option<(Rat, Rat)>,
    line: Option<usize>,
    ray_dirs: Vec<(BigInt, BigInt)>,
}

impl Arrangement2D {
    /// Build the arrangement of the given lines (deduplicated and sorted).
    pub fn build(lines_in: &[Line]) -> Arrangement2D {
        let lines: Vec<Line> = lines_in
            .iter()
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let n = lines.len();
        let signs_of = |p: &(Rat, Rat)| -> Vec<i8> { lines.iter().map(|l| l.side(p)).collect() };

        // Vertices: pairwise intersections, deduplicated and ordered.
        let mut vset: BTreeSet<(Rat, Rat)> = BTreeSet::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if let Some(p) = lines[i].intersect(&lines[j]) {
                    vset.insert(p);
                }
            }
        }
        let vertices: Vec<(Rat, Rat)> = vset.into_iter().collect();

        let mut raw: Vec<RawCell> = Vec::new();
        for v in &vertices {
            raw.push(RawCell {
                dim: 0,
                signs: signs_of(v),
                sample: v.clone(),
                point: Some(v.clone()),
                line: None,
                ray_dirs: Vec::new(),
            });
        }

        // Edges: split each line at the vertices lying on it.
        let mut edge_samples: Vec<((Rat, Rat), usize)> = Vec::new();
        for (i, l) in lines.iter().enumerate() {
            let d = l.direction();
            let dir_pos = primitive_dir(&d.0, &d.1);
            let dir_neg = (-dir_pos.0.clone(), -dir_pos.1.clone());
            let mut on_line: Vec<(Rat, (Rat, Rat))> = vertices
                .iter()
                .filter(|v| l.eval(v).is_zero())
                .map(|v| (&d.0 * &v.0 + &d.1 * &v.1, v.clone()))
                .collect();
            on_line.sort_by(|x, y| x.0.cmp(&y.0));
            let mut push = |sample: (Rat, Rat), rays: Vec<(BigInt, BigInt)>| {
                raw.push(RawCell {
                    dim: 1,
                    signs: signs_of(&sample),
                    sample: sample.clone(),
                    point: None,
                    line: Some(i),
                    ray_dirs: rays,
                });
                edge_samples.push((sample, i));
            };
            if on_line.is_empty() {
                push(l.base_point(), vec![dir_neg, dir_pos]);
            } else {
                let first = &on_line[0].1;
                push(
                    (&first.0 - &d.0, &first.1 - &d.1),
                    vec![dir_neg],
                );
                for w in on_line.windows(2) {
                    let (p, q) = (&w[0].1, &w[1].1);
                    let half = crate::ratq(1, 2);
                    push(((&p.0 + &q.0) * &half, (&p.1 + &q.1) * &half), vec![]);
                }
                let last = &on_line[on_line.len() - 1].1;
                push((&last.0 + &d.0, &last.1 + &d.1), vec![dir_pos]);
            }
        }

        // Faces: offset each edge sample to both sides by a safe distance.
        let mut face_seen: BTreeSet<Vec<i8>> = BTreeSet::new();
        if n == 0 {
            raw.push(RawCell {
                dim: 2,
                signs: vec![],
                sample: (rat(0), rat(0)),
                point: None,
                line: None,
                ray_dirs: Vec::new(),
            });
        }
        for (s, i) in &edge_samples {
            let ni = lines[*i].normal();
            let mut delta = rat(1);
            for (j, l) in lines.iter().enumerate() {
                if j == *i {
                    continue;
                }
                let e = l.eval(s);
                debug_assert!(!e.is_zero(), "edge sample on foreign line");
                let nj = l.normal();
                let dot = (&ni.0 * &nj.0 + &ni.1 * &nj.1).abs();
                let bound = e.abs() / ((dot + rat(1)) * rat(2));
                if bound < delta {
                    delta = bound;
                }
            }
            for side in [rat(1), rat(-1)] {
                let q = (&s.0 + &side * &delta * &ni.0, &s.1 + &side * &delta * &ni.1);
                let sv = signs_of(&q);
                debug_assert!(sv.iter().all(|&x| x != 0));
                if face_seen.insert(sv.clone()) {
                    raw.push(RawCell {
                        dim: 2,
                        signs: sv,
                        sample: q,
                        point: None,
                        line: None,
                        ray_dirs: Vec::new(),
                    });
                }
            }
        }

        raw.sort_by(|x, y| (x.dim, &x.signs).cmp(&(y.dim, &y.signs)));
        let sign_index: BTreeMap<Vec<i8>, usize> = raw
            .iter()
            .enumerate()
            .map(|(k, c)| (c.signs.clone(), k))
            .collect();
        assert_eq!(sign_index.len(), raw.len(), "sign vectors must be unique");

        // Circle at infinity: primitive directions of the lines, CCW.
        let mut dir_set: BTreeSet<(BigInt, BigInt)> = BTreeSet::new();
        for l in &lines {
            let d = l.direction();
            let u = primitive_dir(&d.0, &d.1);
            dir_set.insert((-u.0.clone(), -u.1.clone()));
            dir_set.insert(u);
        }
        let mut inf_vertices: Vec<(BigInt, BigInt)> = dir_set.into_iter().collect();
        inf_vertices.sort_by(ccw_cmp);
        let inf_index: BTreeMap<(BigInt, BigInt), usize> = inf_vertices
            .iter()
            .cloned()
            .enumerate()
            .map(|(k, d)| (d, k))
            .collect();

        // Sign of n_j · u decides the side of line j seen from far out in
        // direction u (u never parallel to a line here unless the dot is 0).
        let side_at_infinity = |l: &Line, u: &(BigInt, BigInt)| -> i8 {
            let d = Rat::from_integer(u.0.clone()) * l.a() + Rat::from_integer(u.1.clone()) * l.b();
            sgn(&d)
        };

        let mut cells: Vec<Cell> = raw
            .into_iter()
            .map(|r| {
                let mut inf_ends: Vec<usize> = match r.dim {
                    0 => vec![],
                    1 => r.ray_dirs.iter().map(|d| inf_index[d]).collect(),
                    _ => inf_vertices
                        .iter()
                        .enumerate()
                        .filter(|(_, u)| {
                            lines.iter().zip(&r.signs).all(|(l, &s)| {
                                let d = side_at_infinity(l, u);
                                d == 0 || d == s
                            })
                        })
                        .map(|(k, _)| k)
                        .collect(),
                    };
                inf_ends.sort_unstable();
                let bounded = if r.dim == 2 && n == 0 {
                    false
                } else {
                    inf_ends.is_empty()
                };
                Cell {
                    dim: r.dim,
                    signs: r.signs,
                    sample: r.sample,
                    point: r.point,
                    line: r.line,
                    bounded,
                    inf_ends,
                }
            })
            .collect();
        // Vertices are trivially bounded.
        for c in cells.iter_mut().filter(|c| c.dim == 0) {
            c.bounded = true;
        }

        // Arcs between consecutive infinity directions, owned by the face
        // whose sign vector matches a direction strictly inside the gap.
        let m = inf_vertices.len();
        let mut inf_arcs = Vec::new();
        for k in 0..m {
            let from = k;
            let to = (k + 1) % m;
            let (u1, u2) = (&inf_vertices[from], &inf_vertices[to]);
            let mid = if u2.0 == -(&u1.0) && u2.1 == -(&u1.1) {
                rot90(u1)
            } else {
                (&u1.0 + &u2.0, &u1.1 + &u2.1)
            };
            let sv: Vec<i8> = lines.iter().map(|l| side_at_infinity(l, &mid)).collect();
            debug_assert!(sv.iter().all(|&x| x != 0));
            let owner = *sign_index
                .get(&sv)
                .expect("every infinity gap lies over a face");
            inf_arcs.push(InfArc { from, to, owner });
        }

        // Face poset covering relations with incidence signs.
        let mut covers = Vec::new();
        let leq = |x: &[i8], y: &[i8]| x.iter().zip(y).all(|(&a, &b)| a == 0 || a == b);
        for lo in 0..cells.len() {
            for hi in 0..cells.len() {
                if cells[hi].dim != cells[lo].dim + 1 || !leq(&cells[lo].signs, &cells[hi].signs) {
                    continue;
                }
                let sign = match cells[hi].dim {
                    1 => {
                        let li = &lines[cells[hi].line.unwrap()];
                        let d = li.direction();
                        let t = |p: &(Rat, Rat)| &d.0 * &p.0 + &d.1 * &p.1;
                        if t(&cells[lo].sample) < t(&cells[hi].sample) {
                            -1
                        } else {
                            1
                        }
                    }
                    _ => {
                        let i = cells[lo].line.unwrap();
                        -cells[hi].signs[i]
                    }
                };
                covers.push((lo, hi, sign));
            }
        }
        let mut up = vec![Vec::new(); cells.len()];
        let mut down = vec![Vec::new(); cells.len()];
        for &(lo, hi, s) in &covers {
            up[lo].push((hi, s));
            down[hi].push((lo, s));
        }

        Arrangement2D {
            lines,
            cells,
            covers,
            up,
            down,
            sign_index,
            inf_vertices,
            inf_arcs,
        }
    }

    pub fn lines(&self) -> &[Line] {
        &self.lines
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cell(&self, i: usize) -> &Cell {
        &self.cells[i]
    }

    pub fn covers(&self) -> &[(usize, usize, i8)] {
        &self.covers
    }

    /// Cells covering `i` (one dimension up), with incidence signs.
    pub fn covers_up(&self, i: usize) -> &[(usize, i8)] {
        &self.up[i]
    }

    pub fn covers_down(&self, i: usize) -> &[(usize, i8)] {
        &self.down[i]
    }

    pub fn inf_vertices(&self) -> &[(BigInt, BigInt)] {
        &self.inf_vertices
    }

    pub fn inf_arcs(&self) -> &[InfArc] {
        &self.inf_arcs
    }

    /// Closure order: `x <= y` iff `x` lies in the closure of `y`.
    pub fn leq(&self, x: usize, y: usize) -> bool {
        self.cells[x]
            .signs
            .iter()
            .zip(&self.cells[y].signs)
            .all(|(&a, &b)| a == 0 || a == b)
    }

    /// Index of the cell containing an exact point.
    pub fn locate(&self, p: &(Rat, Rat)) -> usize {
        let sv: Vec<i8> = self.lines.iter().map(|l| l.side(p)).collect();
        *self
            .sign_index
            .get(&sv)
            .expect("every point lies in some cell")
    }

    /// Open star: all cells whose closure contains `i` (including `i`).
    pub fn star(&self, i: usize) -> Vec<usize> {
        (0..self.cells.len()).filter(|&j| self.leq(i, j)).collect()
    }

    /// All cells in the closure of `i` (including `i`).
    pub fn closure(&self, i: usize) -> Vec<usize> {
        (0..self.cells.len()).filter(|&j| self.leq(j, i)).collect()
    }

    pub fn is_open(&self, set: &BTreeSet<usize>) -> bool {
        set.iter().all(|&c| self.star(c).iter().all(|j| set.contains(j)))
    }

    pub fn is_closed(&self, set: &BTreeSet<usize>) -> bool {
        set.iter()
            .all(|&c| self.closure(c).iter().all(|j| set.contains(j)))
    }

    /// Order-convexity in the face poset: for cell unions this is exactly
    /// local closedness of the underlying set.
    pub fn is_order_convex(&self, set: &BTreeSet<usize>) -> bool {
        for &x in set {
            for &z in set {
                for y in 0..self.cells.len() {
                    if self.leq(x, y) && self.leq(y, z) && !set.contains(&y) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Whether direction `w` lies in the recession cone of the closure of
    /// cell `i`.
    pub fn recession_contains(&self, i: usize, w: &(Rat, Rat)) -> bool {
        self.lines.iter().zip(&self.cells[i].signs).all(|(l, &s)| {
            let d = sgn(&(l.a() * &w.0 + l.b() * &w.1));
            if s == 0 {
                d == 0
            } else {
                d == 0 || d == s
            }
        })
    }

    /// Euler characteristic of the closed-disk compactification, counted
    /// cell by cell.  Always `1` — asserted by the test suite, relied on by
    /// the Euler-calculus layer.
    pub fn euler_disk(&self) -> i64 {
        let affine: i64 = self
            .cells
            .iter()
            .map(|c| if c.dim % 2 == 0 { 1 } else { -1 })
            .sum();
        affine + self.inf_vertices.len() as i64 - self.inf_arcs.len() as i64
    }

    /// Euler characteristic of the closure of cell `i` inside the disk.
    /// For honest regular closures this is `1` (a closed cell is a disk).
    pub fn closure_disk_euler(&self, i: usize) -> i64 {
        let mut chi: i64 = 0;
        for &j in &self.closure(i) {
            chi += if self.cells[j].dim % 2 == 0 { 1 } else { -1 };
        }
        chi += self.cells[i].inf_ends.len() as i64;
        if self.cells[i].dim == 2 {
            chi -= self
                .inf_arcs
                .iter()
                .filter(|a| a.owner == i)
                .count() as i64;
        }
        chi
    }

    /// Compactly-supported Euler characteristic of a union of cells.
    pub fn chi_c_cells(&self, set: &BTreeSet<usize>) -> i64 {
        set.iter()
            .map(|&c| if self.cells[c].dim % 2 == 0 { 1 } else { -1 })
            .sum()
    }

    /// Refine by additional lines; returns the refined arrangement and the
    /// map sending each new cell to the old cell containing it.
    pub fn with_lines(&self, extra: &[Line]) -> (Arrangement2D, Vec<usize>) {
        let mut all = self.lines.clone();
        all.extend(extra.iter().cloned());
        let fine = Arrangement2D::build(&all);
        let map = fine
            .cells
            .iter()
            .map(|c| self.locate(&c.sample))
            .collect();
        (fine, map)
    }
}

/// Comparison relation for a half-plane or line constraint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rel {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = ">")]
    Gt,
}

impl Rel {
    pub fn mirrored(self) -> Rel {
        match self {
            Rel::Lt => Rel::Gt,
            Rel::Le => Rel::Ge,
            Rel::Eq => Rel::Eq,
            Rel::Ge => Rel::Le,
            Rel::Gt => Rel::Lt,
        }
    }

    pub fn admits(self, sign: i8) -> bool {
        match self {
            Rel::Lt => sign < 0,
            Rel::Le => sign <= 0,
            Rel::Eq => sign == 0,
            Rel::Ge => sign >= 0,
            Rel::Gt => sign > 0,
        }
    }
}

/// One constraint `a·x + b·y - c  REL  0`, in normalized form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub line: Line,
    pub rel: Rel,
}

impl Constraint {
    pub fn new(a: Rat, b: Rat, c: Rat, rel: Rel) -> Result<Constraint, PlGeomError> {
        let (line, flipped) = Line::normalize(a, b, c)?;
        Ok(Constraint {
            line,
            rel: if flipped { rel.mirrored() } else { rel },
        })
    }

    pub fn admits_point(&self, p: &(Rat, Rat)) -> bool {
        self.rel.admits(self.line.side(p))
    }
}

/// A locally closed convex polyhedron: a finite conjunction of open/closed
/// half-plane and line constraints.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LCSet {
    pub constraints: Vec<Constraint>,
}

impl LCSet {
    pub fn new(constraints: Vec<Constraint>) -> LCSet {
        LCSet { constraints }
    }

    /// Lines that an arrangement must contain before compiling this set.
    pub fn required_lines(&self) -> Vec<Line> {
        self.constraints.iter().map(|c| c.line.clone()).collect()
    }

    /// The set of arrangement cells contained in this set.  Every
    /// constraint line must already be a line of the arrangement, so each
    /// cell is entirely inside or outside.
    pub fn compile(&self, arr: &Arrangement2D) -> Result<BTreeSet<usize>, PlGeomError> {
        for c in &self.constraints {
            if !arr.lines().contains(&c.line) {
                return Err(PlGeomError::MissingLine(format!("{:?}", c.line)));
            }
        }
        Ok((0..arr.cells().len())
            .filter(|&i| {
                self.constraints
                    .iter()
                    .all(|c| c.admits_point(&arr.cell(i).sample))
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratq;
    use proptest::prelude::*;

    fn cross() -> Vec<Line> {
        vec![Line::from_ints(1, 0, 0), Line::from_ints(0, 1, 0)]
    }

    #[test]
    fn line_normalization() {
        let l = Line::new(ratq(-2, 3), rat(0), rat(4)).unwrap();
        assert_eq!((l.a(), l.b(), l.c()), (&rat(1), &rat(0), &rat(-6)));
        let (l2, flipped) = Line::normalize(rat(0), rat(-2), rat(2)).unwrap();
        assert!(flipped);
        assert_eq!((l2.a(), l2.b(), l2.c()), (&rat(0), &rat(1), &rat(-1)));
        assert!(Line::new(rat(0), rat(0), rat(1)).is_err());
        // Same line, different scale, same normal form.
        assert_eq!(
            Line::new(rat(2), rat(4), rat(6)).unwrap(),
            Line::new(rat(3), rat(6), rat(9)).unwrap()
        );
    }

    #[test]
    fn scaled_normal_form_divides_out_the_pair_factor() {
        // (a, b, c) is jointly primitive but (a, b) shares a factor: the
        // offset along the primitive normal picks it up.
        let l = Line::new(rat(2), rat(-2), rat(-1)).unwrap();
        let (n, rho) = l.scaled_normal_form();
        assert_eq!(n, (BigInt::from(1), BigInt::from(-1)));
        assert_eq!(rho, ratq(-1, 2));
        // A fractional constant scales the pair up.
        let l = Line::new(rat(0), rat(1), ratq(1, 2)).unwrap();
        assert_eq!((l.a(), l.b(), l.c()), (&rat(0), &rat(2), &rat(1)));
        let (n, rho) = l.scaled_normal_form();
        assert_eq!(n, (BigInt::from(0), BigInt::from(1)));
        assert_eq!(rho, ratq(1, 2));
        let l = Line::new(rat(1), rat(0), rat(3)).unwrap();
        assert_eq!(l.scaled_normal_form().1, rat(3));
    }

    #[test]
    fn cross_arrangement_counts() {
        // Two crossing lines: 1 vertex, 4 edges, 4 faces.
        let arr = Arrangement2D::build(&cross());
        let counts = |d: u8| arr.cells().iter().filter(|c| c.dim == d).count();
        assert_eq!((counts(0), counts(1), counts(2)), (1, 4, 4));
        assert_eq!(arr.inf_vertices().len(), 4);
        assert_eq!(arr.inf_arcs().len(), 4);
        assert_eq!(arr.euler_disk(), 1);
    }

    #[test]
    fn generic_triangle_counts() {
        // Three lines in general position: V=3, E=9, F=7.
        let arr = Arrangement2D::build(&[
            Line::from_ints(1, 0, 0),
            Line::from_ints(0, 1, 0),
            Line::from_ints(1, 1, 1),
        ]);
        let counts = |d: u8| arr.cells().iter().filter(|c| c.dim == d).count();
        assert_eq!((counts(0), counts(1), counts(2)), (3, 9, 7));
        // Exactly one bounded face (the triangle).
        assert_eq!(
            arr.cells()
                .iter()
                .filter(|c| c.dim == 2 && c.bounded)
                .count(),
            1
        );
        assert_eq!(arr.euler_disk(), 1);
    }

    #[test]
    fn parallel_strip_owns_no_arc() {
        let arr = Arrangement2D::build(&[Line::from_ints(1, 0, 0), Line::from_ints(1, 0, 1)]);
        let counts = |d: u8| arr.cells().iter().filter(|c| c.dim == d).count();
        assert_eq!((counts(0), counts(1), counts(2)), (0, 2, 3));
        assert_eq!(arr.inf_vertices().len(), 2);
        assert_eq!(arr.inf_arcs().len(), 2);
        let strip = arr.locate(&(ratq(1, 2), rat(0)));
        assert!(arr.inf_arcs().iter().all(|a| a.owner != strip));
        // The strip is unbounded: both infinity vertices sit in its closure.
        assert_eq!(arr.cell(strip).inf_ends.len(), 2);
        assert_eq!(arr.euler_disk(), 1);
        assert_eq!(arr.closure_disk_euler(strip), 1);
    }

    #[test]
    fn empty_arrangement() {
        let arr = Arrangement2D::build(&[]);
        assert_eq!(arr.cells().len(), 1);
        assert_eq!(arr.euler_disk(), 1);
        assert_eq!(arr.locate(&(rat(7), rat(-3))), 0);
        assert!(!arr.cell(0).bounded);
    }

    #[test]
    fn incidence_signs_square_to_zero() {
        // Raw incidence matrices of the constant sheaf must satisfy
        // D1 * D0 = 0.
        let arr = Arrangement2D::build(&[
            Line::from_ints(1, 0, 0),
            Line::from_ints(0, 1, 0),
            Line::from_ints(1, 1, 1),
            Line::from_ints(1, -2, 3),
        ]);
        let idx_of_dim = |d: u8| -> Vec<usize> {
            (0..arr.cells().len())
                .filter(|&i| arr.cell(i).dim == d)
                .collect()
        };
        let (vs, es, fs) = (idx_of_dim(0), idx_of_dim(1), idx_of_dim(2));
        let pos = |list: &[usize], i: usize| list.iter().position(|&x| x == i).unwrap();
        let mut d0 = vec![vec![0i64; vs.len()]; es.len()];
        let mut d1 = vec![vec![0i64; es.len()]; fs.len()];
        for &(lo, hi, s) in arr.covers() {
            if arr.cell(hi).dim == 1 {
                d0[pos(&es, hi)][pos(&vs, lo)] = s as i64;
            } else {
                d1[pos(&fs, hi)][pos(&es, lo)] = s as i64;
            }
        }
        for f in 0..fs.len() {
            for v in 0..vs.len() {
                let sum: i64 = (0..es.len()).map(|e| d1[f][e] * d0[e][v]).sum();
                assert_eq!(sum, 0, "face {f}, vertex {v}");
            }
        }
    }

    #[test]
    fn lcset_compile_quadrant() {
        let arr = Arrangement2D::build(&cross());
        // {x >= 0, y > 0}
        let set = LCSet::new(vec![
            Constraint::new(rat(1), rat(0), rat(0), Rel::Ge).unwrap(),
            Constraint::new(rat(0), rat(1), rat(0), Rel::Gt).unwrap(),
        ]);
        let cells = set.compile(&arr).unwrap();
        // Open quadrant, plus the open positive y-axis edge.
        assert_eq!(cells.len(), 2);
        assert!(arr.is_order_convex(&cells));
        let dims: Vec<u8> = cells.iter().map(|&c| arr.cell(c).dim).collect();
        assert_eq!(dims, vec![1, 2]);
        // Constraint normalization mirrors the relation: -x >= 0 is x <= 0.
        let flipped = Constraint::new(rat(-1), rat(0), rat(0), Rel::Ge).unwrap();
        assert_eq!(flipped.rel, Rel::Le);
        assert!(flipped.admits_point(&(rat(-2), rat(5))));
        assert!(!flipped.admits_point(&(rat(2), rat(5))));
    }

    #[test]
    fn refinement_maps_cells_into_old_cells() {
        let arr = Arrangement2D::build(&cross());
        let (fine, map) = arr.with_lines(&[Line::from_ints(1, 1, 1)]);
        assert_eq!(map.len(), fine.cells().len());
        for (new_idx, &old_idx) in map.iter().enumerate() {
            // The sample of the new cell must lie in the old cell.
            assert_eq!(arr.locate(&fine.cell(new_idx).sample), old_idx);
        }
    }

    #[test]
    fn star_is_open_and_closure_is_closed() {
        let arr = Arrangement2D::build(&cross());
        let v = (0..arr.cells().len())
            .find(|&i| arr.cell(i).dim == 0)
            .unwrap();
        let star: BTreeSet<usize> = arr.star(v).into_iter().collect();
        assert!(arr.is_open(&star));
        assert_eq!(star.len(), 9);
        let f = (0..arr.cells().len())
            .find(|&i| arr.cell(i).dim == 2)
            .unwrap();
        let cl: BTreeSet<usize> = arr.closure(f).into_iter().collect();
        assert!(arr.is_closed(&cl));
    }

    #[test]
    fn half_open_square_is_order_convex() {
        // [0,1) x [0,1): locally closed, hence order-convex.
        let lines = vec![
            Line::from_ints(1, 0, 0),
            Line::from_ints(1, 0, 1),
            Line::from_ints(0, 1, 0),
            Line::from_ints(0, 1, 1),
        ];
        let arr = Arrangement2D::build(&lines);
        let set = LCSet::new(vec![
            Constraint::new(rat(1), rat(0), rat(0), Rel::Ge).unwrap(),
            Constraint::new(rat(1), rat(0), rat(1), Rel::Lt).unwrap(),
            Constraint::new(rat(0), rat(1), rat(0), Rel::Ge).unwrap(),
            Constraint::new(rat(0), rat(1), rat(1), Rel::Lt).unwrap(),
        ]);
        let cells = set.compile(&arr).unwrap();
        assert!(arr.is_order_convex(&cells));
        // 1 vertex + 2 edges + 1 face.
        assert_eq!(cells.len(), 4);
        // A closed square minus an open boundary edge (corners kept) is not
        // locally closed: corner <= edge <= face escapes the set.
        let sq = LCSet::new(vec![
            Constraint::new(rat(1), rat(0), rat(0), Rel::Ge).unwrap(),
            Constraint::new(rat(1), rat(0), rat(1), Rel::Le).unwrap(),
            Constraint::new(rat(0), rat(1), rat(0), Rel::Ge).unwrap(),
            Constraint::new(rat(0), rat(1), rat(1), Rel::Le).unwrap(),
        ]);
        let mut broken = sq.compile(&arr).unwrap();
        let bottom_edge = arr.locate(&(ratq(1, 2), rat(0)));
        assert!(broken.remove(&bottom_edge));
        assert!(!arr.is_order_convex(&broken));
    }

    #[test]
    fn recession_cone_membership() {
        let arr = Arrangement2D::build(&cross());
        let quad = arr.locate(&(rat(1), rat(1)));
        assert!(arr.recession_contains(quad, &(rat(1), rat(0))));
        assert!(arr.recession_contains(quad, &(rat(2), rat(3))));
        assert!(!arr.recession_contains(quad, &(rat(-1), rat(0))));
        let v = arr.locate(&(rat(0), rat(0)));
        assert!(!arr.recession_contains(v, &(rat(1), rat(0))));
    }

    #[test]
    fn ccw_order_of_directions() {
        let mk = |x: i64, y: i64| (BigInt::from(x), BigInt::from(y));
        let mut dirs = vec![mk(0, -1), mk(-1, 0), mk(1, 0), mk(0, 1)];
        dirs.sort_by(ccw_cmp);
        assert_eq!(dirs, vec![mk(1, 0), mk(0, 1), mk(-1, 0), mk(0, -1)]);
    }

    #[test]
    fn line_serde_round_trip() {
        let l = Line::new(ratq(1, 2), rat(-3), ratq(7, 5)).unwrap();
        let s = serde_json::to_string(&l).unwrap();
        let back: Line = serde_json::from_str(&s).unwrap();
        assert_eq!(l, back);
    }

    fn arb_lines() -> impl Strategy<Value = Vec<Line>> {
        prop::collection::vec((-3i64..=3, -3i64..=3, -3i64..=3), 0..5).prop_map(|raw| {
            raw.into_iter()
                .filter(|&(a, b, _)| a != 0 || b != 0)
                .map(|(a, b, c)| Line::from_ints(a, b, c))
                .collect()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        /// The compactified plane is a disk, whatever the lines.
        #[test]
        fn prop_disk_euler_is_one(lines in arb_lines()) {
            let arr = Arrangement2D::build(&lines);
            prop_assert_eq!(arr.euler_disk(), 1);
        }

        /// Every cell closure in the disk is a closed cell: chi = 1.
        #[test]
        fn prop_cell_closures_are_disks(lines in arb_lines()) {
            let arr = Arrangement2D::build(&lines);
            for i in 0..arr.cells().len() {
                prop_assert_eq!(arr.closure_disk_euler(i), 1);
            }
        }

        /// Locating a cell's own sample point returns the cell.
        #[test]
        fn prop_locate_round_trip(lines in arb_lines()) {
            let arr = Arrangement2D::build(&lines);
            for i in 0..arr.cells().len() {
                prop_assert_eq!(arr.locate(&arr.cell(i).sample), i);
            }
        }

        /// chi_c of the affine plane, counted cell by cell, is 1.
        #[test]
        fn prop_affine_chi_c(lines in arb_lines()) {
            let arr = Arrangement2D::build(&lines);
            let all: BTreeSet<usize> = (0..arr.cells().len()).collect();
            prop_assert_eq!(arr.chi_c_cells(&all), 1);
        }

        /// Unbounded edges end at exactly one or two infinity vertices, and
        /// every bounded cell ends at none.
        #[test]
        fn prop_inf_ends_consistent(lines in arb_lines()) {
            let arr = Arrangement2D::build(&lines);
            for c in arr.cells() {
                if c.dim == 1 {
                    prop_assert_eq!(c.bounded, c.inf_ends.is_empty());
                }
            }
        }
    }
}
