//! The Radon transform of a planar sheaf, evaluated on the space of
//! co-oriented lines.
//!
//! A line query `(n̂, r)` names the closed half-plane `{x·n̂ ≤ r·‖n̂‖}`;
//! the transform's stalk there is the compactly supported cohomology of
//! the input sheaf over that half-plane.  The transform is never built
//! as a sheaf on the whole cylinder of lines (its walls are curved);
//! instead this module offers the two views every check factors through:
//! pointwise stalks anywhere, and a full interval decomposition along one
//! direction.
//!
//! Offsets are reported in *scaled* units throughout: for a query
//! direction with primitive integer representative `n`, the offset of the
//! half-plane `{x·n ≤ ρ}` is `ρ = r·‖n‖`.  For unit directions the two
//! conventions agree; scaling keeps every wall rational.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::cellsheaf::line::{bars_from_samples, sample_grid, Bar, BarEnd, CellSheaf1D};
use crate::cellsheaf::{CellSheaf, CsError, SectorDesc};
use crate::exactlin::{interval_decompose, GradedDims};
use crate::plgeom::{ccw_cmp, primitive_dir, sgn, Arrangement2D, Line};
use crate::{rat, QChainMap, QComplex, Rat};

#[derive(Debug, thiserror::Error)]
pub enum RadonError {
    #[error("query direction must be nonzero")]
    ZeroDirection,
    #[error("unsupported covector: the base point must be parallel to the direction")]
    UnsupportedCovector,
    #[error(transparent)]
    Sheaf(#[from] CsError),
}

/// A co-oriented line `{x·n̂ = r}`, named by any positive multiple of its
/// unit normal: the associated half-plane is `{x·nhat ≤ r·‖nhat‖}`, so
/// that `r` is measured against the normalized direction while every
/// predicate below stays rational.
#[derive(Clone, Debug, PartialEq)]
pub struct LineQuery {
    pub nhat: (Rat, Rat),
    pub r: Rat,
}

impl LineQuery {
    pub fn new(nhat: (Rat, Rat), r: Rat) -> Result<LineQuery, RadonError> {
        if nhat.0.is_zero() && nhat.1.is_zero() {
            return Err(RadonError::ZeroDirection);
        }
        Ok(LineQuery { nhat, r })
    }

    /// Primitive integer representative of the direction.
    pub fn dir(&self) -> Result<(BigInt, BigInt), RadonError> {
        primitive(&self.nhat)
    }
}

fn primitive(v: &(Rat, Rat)) -> Result<(BigInt, BigInt), RadonError> {
    if v.0.is_zero() && v.1.is_zero() {
        return Err(RadonError::ZeroDirection);
    }
    Ok(primitive_dir(&v.0, &v.1))
}

fn norm2(d: &(BigInt, BigInt)) -> BigInt {
    &d.0 * &d.0 + &d.1 * &d.1
}

fn dot(p: &(Rat, Rat), d: &(BigInt, BigInt)) -> Rat {
    &p.0 * Rat::from(d.0.clone()) + &p.1 * Rat::from(d.1.clone())
}

/// Compare a rational `a` against `r·√N` without leaving the rationals.
fn cmp_scaled(a: &Rat, r: &Rat, n2: &BigInt) -> std::cmp::Ordering {
    use std::cmp::Ordering::*;
    let zero = rat(0);
    match sgn(r) {
        0 => a.cmp(&zero),
        1 => {
            if sgn(a) <= 0 {
                Less
            } else {
                (a * a).cmp(&(r * r * Rat::from(n2.clone())))
            }
        }
        _ => {
            if sgn(a) >= 0 {
                Greater
            } else {
                (a * a).cmp(&(r * r * Rat::from(n2.clone()))).reverse()
            }
        }
    }
}

/// Candidate walls of the transform along one direction, in scaled units:
/// projections of the arrangement's vertices, plus the offsets of
/// arrangement lines parallel to the query line.  The transform's stalk
/// is constant on each open interval between consecutive walls (a tested
/// property, not an assumption).
pub fn wall_set(arr: &Arrangement2D, d: &(BigInt, BigInt)) -> Vec<Rat> {
    let mut walls = BTreeSet::new();
    for c in arr.cells() {
        if let Some(p) = &c.point {
            walls.insert(dot(p, d));
        }
    }
    for line in arr.lines() {
        let (n, rho) = line.scaled_normal_form();
        if n == *d {
            walls.insert(rho);
        } else if n.0 == -&d.0 && n.1 == -&d.1 {
            walls.insert(-rho);
        }
    }
    walls.into_iter().collect()
}

/// A rational offset in the same wall chamber as `r·√N` (the wall itself
/// when equal, which requires `r·√N` rational).
fn chamber_rep(walls: &[Rat], r: &Rat, n2: &BigInt) -> Rat {
    use std::cmp::Ordering::*;
    if walls.is_empty() {
        return rat(0);
    }
    let mut above = walls.len();
    for (i, w) in walls.iter().enumerate() {
        match cmp_scaled(w, r, n2) {
            Equal => return w.clone(),
            Greater => {
                above = i;
                break;
            }
            Less => {}
        }
    }
    if above == 0 {
        &walls[0] - rat(1)
    } else if above == walls.len() {
        walls.last().unwrap() + rat(1)
    } else {
        (&walls[above - 1] + &walls[above]) * crate::ratq(1, 2)
    }
}

/// Stalk of the transform at scaled offset `rho` along `d`: compactly
/// supported cohomology over the closed half-plane `{x·d ≤ rho}`.
pub fn stalk_at_scaled(
    f: &CellSheaf,
    d: &(BigInt, BigInt),
    rho: &Rat,
) -> Result<GradedDims, RadonError> {
    let cut = Line::new(Rat::from(d.0.clone()), Rat::from(d.1.clone()), rho.clone())
        .expect("primitive direction is nonzero");
    let fine = f.refined(&[cut]);
    let farr = fine.arrangement().clone();
    let z: BTreeSet<usize> = (0..farr.cells().len())
        .filter(|&c| dot(&farr.cell(c).sample, d) <= *rho)
        .collect();
    Ok(fine.compact_cohomology(&z)?)
}

/// A rational scaled offset in the same wall chamber of `arr` as the
/// query's `r·‖n̂‖` (the wall itself when they coincide).  Any sweep whose
/// jumps lie on walls of `arr` takes the same value at the query and at
/// this representative.
pub fn scaled_offset(arr: &Arrangement2D, q: &LineQuery) -> Result<Rat, RadonError> {
    let d = q.dir()?;
    let walls = wall_set(arr, &d);
    Ok(chamber_rep(&walls, &q.r, &norm2(&d)))
}

/// Stalk of the transform at a line query.
pub fn radon_stalk(f: &CellSheaf, q: &LineQuery) -> Result<GradedDims, RadonError> {
    let d = q.dir()?;
    let rho = scaled_offset(f.arrangement(), q)?;
    stalk_at_scaled(f, &d, &rho)
}

/// Interval decomposition of the transform along one direction, from the
/// ranks of the restriction maps between half-plane compact cochain
/// complexes over the wall/chamber sample grid.  Bar positions are scaled
/// offsets.
pub fn direction_barcode(f: &CellSheaf, dir: &(Rat, Rat)) -> Result<Vec<Bar>, RadonError> {
    let d = primitive(dir)?;
    let walls = wall_set(f.arrangement(), &d);
    if walls.is_empty() {
        return Ok(Vec::new());
    }
    let samples = sample_grid(&walls);
    let cuts: Vec<Line> = samples
        .iter()
        .map(|t| {
            Line::new(Rat::from(d.0.clone()), Rat::from(d.1.clone()), t.clone())
                .expect("primitive direction is nonzero")
        })
        .collect();
    let fine = f.refined(&cuts);
    let farr = fine.arrangement().clone();
    let zsets: Vec<BTreeSet<usize>> = samples
        .iter()
        .map(|t| {
            (0..farr.cells().len())
                .filter(|&c| dot(&farr.cell(c).sample, &d) <= *t)
                .collect()
        })
        .collect();
    let complexes: Vec<QComplex> = zsets
        .iter()
        .map(|z| fine.compact_complex(z))
        .collect::<Result<Vec<_>, CsError>>()?;
    let maps: Vec<QChainMap> = (0..zsets.len() - 1)
        .map(|i| fine.restriction_to_closed(&zsets[i + 1], &zsets[i]))
        .collect::<Result<Vec<_>, CsError>>()?;
    let summands = interval_decompose(&complexes, &maps);
    Ok(bars_from_samples(&walls, &summands))
}

/// Finite endpoints of the bars along one direction: the detected walls.
pub fn detected_walls(bars: &[Bar]) -> BTreeSet<Rat> {
    let mut out = BTreeSet::new();
    for b in bars {
        if let BarEnd::At { t, .. } = &b.birth {
            out.insert(t.clone());
        }
        if let BarEnd::At { t, .. } = &b.death {
            out.insert(t.clone());
        }
    }
    out
}

fn antipode(d: &(BigInt, BigInt)) -> (BigInt, BigInt) {
    (-&d.0, -&d.1)
}

/// Whether `d` lies in the (closed ray / open arc) sector.  Rays are
/// compared exactly, so `d` should be primitive like the stored rays;
/// the open-arc test is scale-invariant.
pub fn sector_contains(sector: &SectorDesc, d: &(BigInt, BigInt)) -> bool {
    use std::cmp::Ordering::*;
    match sector {
        SectorDesc::Ray { dir } => dir == d,
        SectorDesc::Open { from, to } => {
            if d == from || d == to {
                return false;
            }
            match ccw_cmp(from, to) {
                Less => ccw_cmp(from, d) == Less && ccw_cmp(d, to) == Less,
                Greater => ccw_cmp(from, d) == Less || ccw_cmp(d, to) == Less,
                Equal => false,
            }
        }
    }
}

/// One direction's worth of the microlocal-image comparison.
#[derive(Clone, Debug)]
pub struct DirectionWalls {
    pub dir: (BigInt, BigInt),
    pub predicted: BTreeSet<Rat>,
    pub detected: BTreeSet<Rat>,
}

/// Comparison of the transform's wall structure against the singular
/// support of the input, direction by direction.
#[derive(Clone, Debug, Default)]
pub struct SSImageReport {
    pub directions: Vec<DirectionWalls>,
    /// Predicted walls with no detected bar endpoint.
    pub missing: Vec<((BigInt, BigInt), Rat)>,
    /// Detected bar endpoints not predicted by any covector.
    pub spurious: Vec<((BigInt, BigInt), Rat)>,
}

impl SSImageReport {
    pub fn pass(&self) -> bool {
        self.missing.is_empty() && self.spurious.is_empty()
    }
}

/// The fixed direction grid used for the converse (no-spurious-walls)
/// scan: sixteen primitive directions around the circle.
pub fn probe_grid() -> Vec<(BigInt, BigInt)> {
    let mut out = Vec::new();
    for (x, y) in [
        (1, 0),
        (2, 1),
        (1, 1),
        (1, 2),
        (0, 1),
        (-1, 2),
        (-1, 1),
        (-2, 1),
    ] {
        out.push((BigInt::from(x), BigInt::from(y)));
        out.push((BigInt::from(-x), BigInt::from(-y)));
    }
    out
}

/// Check that walls of the transform appear exactly at the images of the
/// input's covectors: each covector `(x, ξ)` of the singular support
/// predicts a wall at scaled offset `x·ξ` in direction `ξ`, and no bar
/// endpoint may appear off the predicted set.  Directions probed: the
/// fixed grid, every sector ray, every open sector's sample, and both
/// normals of every arrangement line.
pub fn ss_image_check(f: &CellSheaf) -> Result<SSImageReport, RadonError> {
    let arr = f.arrangement().clone();
    let ss = f.singular_support();
    let mut dirs: BTreeSet<(BigInt, BigInt)> = probe_grid().into_iter().collect();
    for entry in &ss.entries {
        match &entry.sector {
            SectorDesc::Ray { dir } => {
                dirs.insert(dir.clone());
            }
            open => {
                dirs.insert(open.sample_dir());
            }
        }
    }
    for line in arr.lines() {
        let n = primitive_dir(line.a(), line.b());
        dirs.insert(antipode(&n));
        dirs.insert(n);
    }
    let mut report = SSImageReport::default();
    for d in dirs {
        let mut predicted = BTreeSet::new();
        for entry in &ss.entries {
            if sector_contains(&entry.sector, &d) {
                predicted.insert(dot(&arr.cell(entry.cell).sample, &d));
            }
        }
        let detected = detected_walls(&direction_barcode(f, &(Rat::from(d.0.clone()), Rat::from(d.1.clone())))?);
        for w in predicted.difference(&detected) {
            report.missing.push((d.clone(), w.clone()));
        }
        for w in detected.difference(&predicted) {
            report.spurious.push((d.clone(), w.clone()));
        }
        report.directions.push(DirectionWalls {
            dir: d,
            predicted,
            detected,
        });
    }
    Ok(report)
}

/// Two sides of the simpleness comparison at one covector.
#[derive(Clone, Debug)]
pub struct SimpleReport {
    pub source: GradedDims,
    pub endpoint: GradedDims,
}

impl SimpleReport {
    pub fn pass(&self) -> bool {
        self.source.total() == self.endpoint.total()
    }
}

/// Compare the microstalk of `f` at a covector `(x, ξ)` with the bar
/// endpoint multiplicity of the transform at the image line, measured as
/// the microstalk of the bar sheaf at `(x·ξ, +1)`.  Only covectors whose
/// image is transverse to the direction sphere are supported: `x ∥ ξ`.
/// Dimensions are compared in total (the transform shifts degrees).
pub fn simpleness_transfer(
    f: &CellSheaf,
    x: &(Rat, Rat),
    xi: &(Rat, Rat),
) -> Result<SimpleReport, RadonError> {
    let d = primitive(xi)?;
    if &x.0 * &xi.1 != &x.1 * &xi.0 {
        return Err(RadonError::UnsupportedCovector);
    }
    let source = f.microstalk(x, xi);
    let bars = direction_barcode(f, xi)?;
    let endpoint = if bars.is_empty() {
        GradedDims::new()
    } else {
        CellSheaf1D::compile_from_bars(&bars)?.microstalk(&dot(x, &d), 1)
    };
    Ok(SimpleReport { source, endpoint })
}

/// Stalk tables of both materializations along one direction agree on a
/// set of scaled offsets; used by tests and the consistency invariants.
pub fn barcode_matches_stalks(
    f: &CellSheaf,
    dir: &(Rat, Rat),
    offsets: &[Rat],
) -> Result<bool, RadonError> {
    let d = primitive(dir)?;
    let bars = direction_barcode(f, dir)?;
    let bar_sheaf = if bars.is_empty() {
        None
    } else {
        Some(CellSheaf1D::compile_from_bars(&bars)?)
    };
    for rho in offsets {
        let direct = stalk_at_scaled(f, &d, rho)?;
        let from_bars = match &bar_sheaf {
            None => GradedDims::new(),
            Some(p) => p.stalk_at(rho),
        };
        if direct != from_bars {
            return Ok(false);
        }
    }
    Ok(true)
}
