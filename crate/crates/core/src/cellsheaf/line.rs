//! Cellular sheaf complexes on the line, and the projector onto sheaves
//! with no negative covectors in their singular support.
//!
//! The projector sends `F` (with bounded support) to the persistence of
//! `t ↦ RΓ_c((-∞, t], F)`: restriction along closed inclusions gives an
//! interval-decomposable one-parameter family whose bars, re-read as
//! half-open/closed intervals, recompile into the projected sheaf `P(F)`.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use super::{BlockLayout, CsError, GradedMat};
use crate::exactlin::{
    interval_decompose, ChainComplex, ChainMap, GradedDims, IntervalSummand, Mat,
};
use crate::plgeom::line1d::Arrangement1D;
use crate::{rat, ratq, QChainMap, QComplex, QMat, Rat};

/// An interval on the line: `None` ends are infinite, finite ends carry a
/// closedness flag.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Interval1D {
    pub lo: Option<(Rat, bool)>,
    pub hi: Option<(Rat, bool)>,
}

impl Interval1D {
    pub fn closed(a: Rat, b: Rat) -> Interval1D {
        Interval1D {
            lo: Some((a, true)),
            hi: Some((b, true)),
        }
    }

    pub fn open(a: Rat, b: Rat) -> Interval1D {
        Interval1D {
            lo: Some((a, false)),
            hi: Some((b, false)),
        }
    }

    pub fn point(a: Rat) -> Interval1D {
        Interval1D {
            lo: Some((a.clone(), true)),
            hi: Some((a, true)),
        }
    }

    pub fn contains(&self, t: &Rat) -> bool {
        let lo_ok = match &self.lo {
            None => true,
            Some((a, true)) => t >= a,
            Some((a, false)) => t > a,
        };
        let hi_ok = match &self.hi {
            None => true,
            Some((b, true)) => t <= b,
            Some((b, false)) => t < b,
        };
        lo_ok && hi_ok
    }

    pub fn endpoints(&self) -> Vec<Rat> {
        self.lo
            .iter()
            .chain(self.hi.iter())
            .map(|(t, _)| t.clone())
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct IndicatorSpec1D {
    pub support: Interval1D,
    pub shift: i32,
    pub mult: usize,
}

#[derive(Clone, Debug, Default)]
pub struct SheafSpec1D {
    pub indicators: Vec<IndicatorSpec1D>,
}

impl SheafSpec1D {
    pub fn breaks(&self) -> Vec<Rat> {
        self.indicators
            .iter()
            .flat_map(|i| i.support.endpoints())
            .collect()
    }
}

/// One end of a persistence bar.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum BarEnd {
    NegInf,
    At { t: Rat, closed: bool },
    PosInf,
}

/// An interval summand of a one-parameter persistence family, with the
/// sample grid translated back to positions on the line.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Bar {
    pub degree: i32,
    pub birth: BarEnd,
    pub death: BarEnd,
    pub mult: usize,
}

impl Bar {
    /// The bar as a subset of the line (birth end on the left).
    pub fn interval(&self) -> Interval1D {
        let lo = match &self.birth {
            BarEnd::NegInf => None,
            BarEnd::At { t, closed } => Some((t.clone(), *closed)),
            BarEnd::PosInf => unreachable!("birth cannot be +infinity"),
        };
        let hi = match &self.death {
            BarEnd::PosInf => None,
            BarEnd::At { t, closed } => Some((t.clone(), *closed)),
            BarEnd::NegInf => unreachable!("death cannot be -infinity"),
        };
        Interval1D { lo, hi }
    }
}

/// Translate interval summands over the standard sample grid
/// `chamber, wall_0, chamber, wall_1, ..., wall_last, chamber`
/// (even indices are chambers, odd indices are walls) into bars with
/// closed/open ends at the wall positions.
pub fn bars_from_samples(walls: &[Rat], summands: &[IntervalSummand]) -> Vec<Bar> {
    let last = 2 * walls.len();
    let mut bars: Vec<Bar> = summands
        .iter()
        .map(|s| {
            let birth = if s.start == 0 {
                BarEnd::NegInf
            } else if s.start % 2 == 1 {
                BarEnd::At {
                    t: walls[(s.start - 1) / 2].clone(),
                    closed: true,
                }
            } else {
                BarEnd::At {
                    t: walls[s.start / 2 - 1].clone(),
                    closed: false,
                }
            };
            let death = if s.end == last {
                BarEnd::PosInf
            } else if s.end % 2 == 1 {
                BarEnd::At {
                    t: walls[(s.end - 1) / 2].clone(),
                    closed: true,
                }
            } else {
                BarEnd::At {
                    t: walls[s.end / 2].clone(),
                    closed: false,
                }
            };
            Bar {
                degree: s.degree,
                birth,
                death,
                mult: s.mult,
            }
        })
        .collect();
    bars.sort();
    bars
}

/// The standard sample grid itself: one point per chamber and wall.
pub fn sample_grid(walls: &[Rat]) -> Vec<Rat> {
    if walls.is_empty() {
        return vec![rat(0)];
    }
    let mut out = vec![&walls[0] - rat(1)];
    for (j, w) in walls.iter().enumerate() {
        out.push(w.clone());
        if j + 1 < walls.len() {
            out.push((w + &walls[j + 1]) * ratq(1, 2));
        }
    }
    out.push(walls.last().unwrap() + rat(1));
    out
}

/// Nonzero microstalk entries on the line; covectors are ±1.
#[derive(Clone, Debug)]
pub struct SS1DEntry {
    pub cell: usize,
    pub sign: i8,
    pub micro: GradedDims,
}

/// A complex of cellular sheaves on a point arrangement on the line.
#[derive(Clone, Debug)]
pub struct CellSheaf1D {
    arr: Arc<Arrangement1D>,
    stalks: Vec<QComplex>,
    gens: BTreeMap<(usize, usize), GradedMat>,
}

impl CellSheaf1D {
    pub fn zero(arr: Arc<Arrangement1D>) -> CellSheaf1D {
        let n = arr.cells().len();
        CellSheaf1D {
            arr,
            stalks: vec![ChainComplex::zero(); n],
            gens: BTreeMap::new(),
        }
    }

    pub fn compile(spec: &SheafSpec1D) -> Result<CellSheaf1D, CsError> {
        let arr = Arc::new(Arrangement1D::build(&spec.breaks()));
        CellSheaf1D::compile_on(arr, spec)
    }

    /// Compile on an arrangement whose breaks include every finite endpoint.
    pub fn compile_on(
        arr: Arc<Arrangement1D>,
        spec: &SheafSpec1D,
    ) -> Result<CellSheaf1D, CsError> {
        for ind in &spec.indicators {
            if ind.mult == 0 {
                return Err(CsError::BadData("multiplicity must be >= 1".into()));
            }
            for e in ind.support.endpoints() {
                if arr.breaks().binary_search(&e).is_err() {
                    return Err(CsError::BadData(format!(
                        "interval endpoint {e} is not a breakpoint"
                    )));
                }
            }
            if let (Some((a, _)), Some((b, _))) = (&ind.support.lo, &ind.support.hi) {
                if a > b {
                    return Err(CsError::BadData("empty interval".into()));
                }
            }
        }
        let n = arr.cells().len();
        let mut stalks = Vec::with_capacity(n);
        let mut offsets: Vec<Vec<Option<usize>>> = vec![vec![None; spec.indicators.len()]; n];
        for c in 0..n {
            let mut dims = GradedDims::new();
            for (i, ind) in spec.indicators.iter().enumerate() {
                if ind.support.contains(&arr.cell(c).sample) {
                    offsets[c][i] = Some(dims.dim(-ind.shift));
                    dims.add(-ind.shift, ind.mult);
                }
            }
            stalks.push(ChainComplex::from_graded(&dims));
        }
        let mut gens = BTreeMap::new();
        for (lo, hi, _) in arr.covers() {
            let mut comps: BTreeMap<i32, QMat> = BTreeMap::new();
            for (i, ind) in spec.indicators.iter().enumerate() {
                let (Some(off_lo), Some(off_hi)) = (offsets[lo][i], offsets[hi][i]) else {
                    continue;
                };
                let deg = -ind.shift;
                let m = comps
                    .entry(deg)
                    .or_insert_with(|| Mat::zero(stalks[hi].dim(deg), stalks[lo].dim(deg)));
                m.add_block(off_hi, off_lo, &Mat::identity(ind.mult));
            }
            if !comps.is_empty() {
                gens.insert((lo, hi), GradedMat::from_comps(comps));
            }
        }
        Ok(CellSheaf1D { arr, stalks, gens })
    }

    pub fn arrangement(&self) -> &Arc<Arrangement1D> {
        &self.arr
    }

    pub fn stalk_complex(&self, c: usize) -> &QComplex {
        &self.stalks[c]
    }

    pub fn stalk_dims(&self, c: usize) -> GradedDims {
        self.stalks[c].graded_dims()
    }

    pub fn stalk_at(&self, t: &Rat) -> GradedDims {
        self.stalks[self.arr.locate(t)].cohomology()
    }

    pub fn support(&self) -> BTreeSet<usize> {
        (0..self.stalks.len())
            .filter(|&c| !self.stalks[c].graded_dims().is_zero())
            .collect()
    }

    pub fn gen_at(&self, lo: usize, hi: usize) -> GradedMat {
        self.gens.get(&(lo, hi)).cloned().unwrap_or_default()
    }

    pub fn validate(&self) -> Result<(), CsError> {
        for ((lo, hi), g) in &self.gens {
            let src = self.stalks[*lo].clone();
            let tgt = self.stalks[*hi].clone();
            let mut comps = BTreeMap::new();
            for (k, _) in src.graded_dims().iter() {
                comps.insert(k, g.comp_at(k, tgt.dim(k), src.dim(k)));
            }
            ChainMap::new(src, tgt, comps)?;
        }
        Ok(())
    }

    pub fn direct_sum(&self, other: &CellSheaf1D) -> Result<CellSheaf1D, CsError> {
        if self.arr.breaks() != other.arr.breaks() {
            return Err(CsError::ArrangementMismatch);
        }
        let stalks: Vec<QComplex> = self
            .stalks
            .iter()
            .zip(&other.stalks)
            .map(|(a, b)| a.direct_sum(b))
            .collect();
        let mut gens = BTreeMap::new();
        for (lo, hi, _) in self.arr.covers() {
            let ga = self.gen_at(lo, hi);
            let gb = other.gen_at(lo, hi);
            let mut comps = BTreeMap::new();
            for (k, _) in stalks[lo].graded_dims().iter() {
                let mut m = Mat::zero(stalks[hi].dim(k), stalks[lo].dim(k));
                m.add_block(
                    0,
                    0,
                    &ga.comp_at(k, self.stalks[hi].dim(k), self.stalks[lo].dim(k)),
                );
                m.add_block(
                    self.stalks[hi].dim(k),
                    self.stalks[lo].dim(k),
                    &gb.comp_at(k, other.stalks[hi].dim(k), other.stalks[lo].dim(k)),
                );
                comps.insert(k, m);
            }
            let g = GradedMat::from_comps(comps);
            if !g.comps().is_empty() {
                gens.insert((lo, hi), g);
            }
        }
        Ok(CellSheaf1D {
            arr: self.arr.clone(),
            stalks,
            gens,
        })
    }

    pub fn shifted(&self, s: i32) -> CellSheaf1D {
        CellSheaf1D {
            arr: self.arr.clone(),
            stalks: self.stalks.iter().map(|c| c.shifted(s)).collect(),
            gens: self.gens.iter().map(|(&k, g)| (k, g.shifted(s))).collect(),
        }
    }

    /// Transport along a break refinement: `map[new] = old`.
    pub fn transported(&self, fine: Arc<Arrangement1D>, map: &[usize]) -> CellSheaf1D {
        let stalks: Vec<QComplex> = map.iter().map(|&o| self.stalks[o].clone()).collect();
        let mut gens = BTreeMap::new();
        for (lo, hi, _) in fine.covers() {
            let (olo, ohi) = (map[lo], map[hi]);
            let g = if olo == ohi {
                GradedMat::identity(&self.stalks[olo].graded_dims())
            } else {
                self.gen_at(olo, ohi)
            };
            if !g.comps().is_empty() {
                gens.insert((lo, hi), g);
            }
        }
        CellSheaf1D {
            arr: fine,
            stalks,
            gens,
        }
    }

    pub fn refined(&self, extra: &[Rat]) -> CellSheaf1D {
        let (fine, map) = self.arr.with_breaks(extra);
        self.transported(Arc::new(fine), &map)
    }

    /// Compactly supported cochain complex of a union of cells (any union
    /// is locally closed on the line).
    pub fn compact_complex(&self, z: &BTreeSet<usize>) -> Result<QComplex, CsError> {
        let layout = self.layout_for(z);
        let mut diffs = layout.zero_diffs();
        for &c in z {
            let p = self.arr.cell(c).dim as i32;
            let st = &self.stalks[c];
            for (q, _) in st.graded_dims().iter() {
                if st.dim(q + 1) == 0 {
                    continue;
                }
                let mut d = st.d_at(q);
                if p.rem_euclid(2) == 1 {
                    d = d.neg();
                }
                layout.add(&mut diffs, (c, q + 1), (c, q), &d);
            }
        }
        for (lo, hi, sign) in self.arr.covers() {
            if !z.contains(&lo) || !z.contains(&hi) {
                continue;
            }
            let g = self.gen_at(lo, hi);
            for (q, _) in self.stalks[lo].graded_dims().iter() {
                if self.stalks[hi].dim(q) == 0 {
                    continue;
                }
                let mut m = g.comp_at(q, self.stalks[hi].dim(q), self.stalks[lo].dim(q));
                if sign < 0 {
                    m = m.neg();
                }
                layout.add(&mut diffs, (hi, q), (lo, q), &m);
            }
        }
        Ok(ChainComplex::new(layout.dims.clone(), diffs)?)
    }

    pub fn compact_cohomology(&self, z: &BTreeSet<usize>) -> Result<GradedDims, CsError> {
        Ok(self.compact_complex(z)?.cohomology())
    }

    fn layout_for(&self, z: &BTreeSet<usize>) -> BlockLayout {
        BlockLayout::new(
            z.iter()
                .map(|&c| (c, self.arr.cell(c).dim as i32, self.stalks[c].graded_dims()))
                .collect(),
        )
    }

    /// Coordinate-projection chain map `RΓ_c(Z) -> RΓ_c(Z')` for `Z'`
    /// closed in `Z`.
    pub fn restriction_to_closed(
        &self,
        z: &BTreeSet<usize>,
        z_sub: &BTreeSet<usize>,
    ) -> Result<QChainMap, CsError> {
        let big = self.compact_complex(z)?;
        let small = self.compact_complex(z_sub)?;
        let lay_big = self.layout_for(z);
        let lay_small = self.layout_for(z_sub);
        let mut comps: BTreeMap<i32, QMat> = BTreeMap::new();
        for (n, &dim_small) in &lay_small.dims {
            let mut m = Mat::zero(dim_small, big.dim(*n));
            for (&(c, q), &(deg, off_small)) in &lay_small.pos {
                if deg != *n {
                    continue;
                }
                let &(_, off_big) = lay_big.pos.get(&(c, q)).expect("subset cell present");
                m.add_block(off_small, off_big, &Mat::identity(self.stalks[c].dim(q)));
            }
            comps.insert(*n, m);
        }
        Ok(ChainMap::new(big, small, comps)?)
    }

    /// Microstalk at `(p, ξ)`, ξ = ±1: the fiber of
    /// `stalk(p) -> RΓ(side of the punctured star where ξ·(y-p) < 0)`.
    pub fn microstalk(&self, p: &Rat, xi: i8) -> GradedDims {
        assert!(xi != 0, "covector must be nonzero");
        let fine_sheaf = self.refined(std::slice::from_ref(p));
        let farr = fine_sheaf.arrangement().clone();
        let v = farr.locate(p);
        debug_assert_eq!(farr.cell(v).dim, 0);
        let side = if xi > 0 { v - 1 } else { v + 1 };
        let stalk = fine_sheaf.stalks[v].clone();
        let tgt = fine_sheaf.stalks[side].clone();
        let g = fine_sheaf.gen_at(v, side);
        let mut comps = BTreeMap::new();
        for (k, _) in stalk.graded_dims().iter() {
            comps.insert(k, g.comp_at(k, tgt.dim(k), stalk.dim(k)));
        }
        let aug = ChainMap::new(stalk, tgt, comps).expect("generization is a chain map");
        aug.fiber().cohomology()
    }

    /// Probe every cell against both covectors; report nonzero microstalks.
    pub fn singular_support(&self) -> Vec<SS1DEntry> {
        let mut out = Vec::new();
        for c in 0..self.arr.cells().len() {
            let p = self.arr.cell(c).sample.clone();
            for sign in [1i8, -1] {
                let micro = self.microstalk(&p, sign);
                if !micro.is_zero() {
                    out.push(SS1DEntry {
                        cell: c,
                        sign,
                        micro,
                    });
                }
            }
        }
        out
    }

    /// Human-readable stalk table: one `(description, stalk cohomology)`
    /// row per cell.
    pub fn stalk_table(&self) -> Vec<(String, GradedDims)> {
        (0..self.arr.cells().len())
            .map(|c| {
                let cell = self.arr.cell(c);
                let desc = if cell.dim == 0 {
                    format!("{{{}}}", cell.point.as_ref().unwrap())
                } else {
                    let j = c / 2;
                    let lo = if j == 0 {
                        "-inf".to_string()
                    } else {
                        self.arr.breaks()[j - 1].to_string()
                    };
                    let hi = if j == self.arr.num_breaks() {
                        "+inf".to_string()
                    } else {
                        self.arr.breaks()[j].to_string()
                    };
                    format!("({lo}, {hi})")
                };
                (desc, self.stalks[c].cohomology())
            })
            .collect()
    }

    /// Persistence bars of `t ↦ RΓ_c((-∞, t], F)`, decomposed over the
    /// wall/chamber sample grid.  Defined for any piecewise-constant sheaf:
    /// the family only changes at breakpoints.
    pub fn persistence_bars(&self) -> Result<Vec<Bar>, CsError> {
        let walls = self.arr.breaks().to_vec();
        if walls.is_empty() || self.support().is_empty() {
            return Ok(Vec::new());
        }
        let samples = sample_grid(&walls);
        let fine = self.refined(&samples);
        let farr = fine.arrangement().clone();
        let zsets: Vec<BTreeSet<usize>> = samples
            .iter()
            .map(|t| {
                (0..farr.cells().len())
                    .filter(|&c| farr.cell(c).sample <= *t)
                    .collect()
            })
            .collect();
        let complexes: Vec<QComplex> = zsets
            .iter()
            .map(|z| fine.compact_complex(z))
            .collect::<Result<_, _>>()?;
        let maps: Vec<QChainMap> = (0..zsets.len() - 1)
            .map(|i| fine.restriction_to_closed(&zsets[i + 1], &zsets[i]))
            .collect::<Result<_, _>>()?;
        let summands = interval_decompose(&complexes, &maps);
        Ok(bars_from_samples(&walls, &summands))
    }

    /// The projection of `F` onto the subcategory of sheaves with no
    /// negative covectors: recompile the persistence bars as indicator
    /// summands (`k_I` in degree `d` for a degree-`d` bar on `I`).
    /// Rejects unbounded support; note the projected sheaf itself may be
    /// unbounded (bars of the form `[a, ∞)`), and its bars can still be
    /// read off with [`CellSheaf1D::persistence_bars`].
    pub fn tamarkin_project(&self) -> Result<CellSheaf1D, CsError> {
        for c in self.support() {
            if !self.arr.cell(c).bounded {
                return Err(CsError::UnboundedSupport);
            }
        }
        CellSheaf1D::compile_from_bars(&self.persistence_bars()?)
    }

    /// Compile a direct sum of interval sheaves, one `k_I` in degree `d`
    /// per degree-`d` bar.
    pub fn compile_from_bars(bars: &[Bar]) -> Result<CellSheaf1D, CsError> {
        let spec = SheafSpec1D {
            indicators: bars
                .iter()
                .map(|b| IndicatorSpec1D {
                    support: b.interval(),
                    shift: -b.degree,
                    mult: b.mult,
                })
                .collect(),
        };
        CellSheaf1D::compile(&spec)
    }
}

/// Deterministic random compactly supported sheaf: a direct sum of up to
/// `max_summands` shifted interval indicators with half-integer endpoints
/// in `[-4, 7]` and random open/closed ends.  Used by the projector soak
/// tests and the command-line soak mode.
pub fn random_compact_sheaf1d<R: rand::Rng>(rng: &mut R, max_summands: usize) -> CellSheaf1D {
    let n = rng.gen_range(1..=max_summands.max(1));
    let mut spec = SheafSpec1D::default();
    for _ in 0..n {
        let a = ratq(rng.gen_range(-8i64..=8), 2);
        let support = if rng.gen_bool(0.15) {
            Interval1D::point(a)
        } else {
            let b = &a + ratq(rng.gen_range(1i64..=6), 2);
            Interval1D {
                lo: Some((a, rng.gen_bool(0.5))),
                hi: Some((b, rng.gen_bool(0.5))),
            }
        };
        spec.indicators.push(IndicatorSpec1D {
            support,
            shift: rng.gen_range(-1i32..=1),
            mult: rng.gen_range(1usize..=2),
        });
    }
    CellSheaf1D::compile(&spec).expect("interval indicator specs always compile")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ind(support: Interval1D, shift: i32, mult: usize) -> IndicatorSpec1D {
        IndicatorSpec1D {
            support,
            shift,
            mult,
        }
    }

    fn sheaf_on(support: Interval1D) -> CellSheaf1D {
        CellSheaf1D::compile(&SheafSpec1D {
            indicators: vec![ind(support, 0, 1)],
        })
        .unwrap()
    }

    fn bar(degree: i32, birth: BarEnd, death: BarEnd, mult: usize) -> Bar {
        Bar {
            degree,
            birth,
            death,
            mult,
        }
    }

    fn at(t: i64, closed: bool) -> BarEnd {
        BarEnd::At {
            t: rat(t),
            closed,
        }
    }

    #[test]
    fn compile_and_stalks() {
        let f = sheaf_on(Interval1D::closed(rat(0), rat(1)));
        f.validate().unwrap();
        assert_eq!(f.stalk_at(&ratq(1, 2)), GradedDims::of(&[(0, 1)]));
        assert_eq!(f.stalk_at(&rat(0)), GradedDims::of(&[(0, 1)]));
        assert_eq!(f.stalk_at(&rat(2)), GradedDims::new());
        let g = sheaf_on(Interval1D::open(rat(0), rat(1)));
        assert_eq!(g.stalk_at(&rat(0)), GradedDims::new());
        assert_eq!(g.stalk_at(&ratq(1, 2)), GradedDims::of(&[(0, 1)]));
    }

    #[test]
    fn compact_cohomology_intervals() {
        let f = sheaf_on(Interval1D::closed(rat(0), rat(1)));
        let all: BTreeSet<usize> = (0..f.arrangement().cells().len()).collect();
        assert_eq!(
            f.compact_cohomology(&all).unwrap(),
            GradedDims::of(&[(0, 1)])
        );
        let g = sheaf_on(Interval1D::open(rat(0), rat(1)));
        let all_g: BTreeSet<usize> = (0..g.arrangement().cells().len()).collect();
        assert_eq!(
            g.compact_cohomology(&all_g).unwrap(),
            GradedDims::of(&[(1, 1)])
        );
        // Half-open: compactly supported cohomology vanishes.
        let h = sheaf_on(Interval1D {
            lo: Some((rat(0), false)),
            hi: Some((rat(1), true)),
        });
        let all_h: BTreeSet<usize> = (0..h.arrangement().cells().len()).collect();
        assert_eq!(h.compact_cohomology(&all_h).unwrap(), GradedDims::new());
    }

    #[test]
    fn microstalk_interval_ends() {
        // k_{[0,1)}: positive covectors at both ends.
        let f = sheaf_on(Interval1D {
            lo: Some((rat(0), true)),
            hi: Some((rat(1), false)),
        });
        assert_eq!(f.microstalk(&rat(0), 1), GradedDims::of(&[(0, 1)]));
        assert!(f.microstalk(&rat(0), -1).is_zero());
        assert_eq!(f.microstalk(&rat(1), 1), GradedDims::of(&[(1, 1)]));
        assert!(f.microstalk(&rat(1), -1).is_zero());
        // Interior points are smooth.
        assert!(f.microstalk(&ratq(1, 2), 1).is_zero());
        assert!(f.microstalk(&ratq(1, 2), -1).is_zero());
        // k_{(0,1]}: negative covectors at both ends.
        let g = sheaf_on(Interval1D {
            lo: Some((rat(0), false)),
            hi: Some((rat(1), true)),
        });
        assert!(g.microstalk(&rat(0), 1).is_zero());
        assert_eq!(g.microstalk(&rat(0), -1), GradedDims::of(&[(1, 1)]));
        assert!(g.microstalk(&rat(1), 1).is_zero());
        assert_eq!(g.microstalk(&rat(1), -1), GradedDims::of(&[(0, 1)]));
    }

    #[test]
    fn project_closed_interval() {
        let f = sheaf_on(Interval1D::closed(rat(0), rat(1)));
        let bars = f.persistence_bars().unwrap();
        assert_eq!(bars, vec![bar(0, at(0, true), BarEnd::PosInf, 1)]);
        let p = f.tamarkin_project().unwrap();
        assert_eq!(p.stalk_at(&rat(0)), GradedDims::of(&[(0, 1)]));
        assert_eq!(p.stalk_at(&rat(100)), GradedDims::of(&[(0, 1)]));
        assert_eq!(p.stalk_at(&rat(-1)), GradedDims::new());
        // No negative covectors in the singular support.
        assert!(p.singular_support().iter().all(|e| e.sign > 0));
    }

    #[test]
    fn project_open_interval() {
        // P(k_{(0,1)}) = k_{[1,∞)}[-1].
        let f = sheaf_on(Interval1D::open(rat(0), rat(1)));
        let bars = f.persistence_bars().unwrap();
        assert_eq!(bars, vec![bar(1, at(1, true), BarEnd::PosInf, 1)]);
        let p = f.tamarkin_project().unwrap();
        assert_eq!(p.stalk_at(&rat(2)), GradedDims::of(&[(1, 1)]));
        assert_eq!(p.stalk_at(&ratq(1, 2)), GradedDims::new());
        assert!(p.singular_support().iter().all(|e| e.sign > 0));
    }

    #[test]
    fn project_half_open_kills() {
        // P(k_{(0,1]}) = 0.
        let f = sheaf_on(Interval1D {
            lo: Some((rat(0), false)),
            hi: Some((rat(1), true)),
        });
        assert!(f.persistence_bars().unwrap().is_empty());
        let p = f.tamarkin_project().unwrap();
        assert!(p.support().is_empty());
        // P(k_{[0,1)}) = k_{[0,1)}: already projected.
        let g = sheaf_on(Interval1D {
            lo: Some((rat(0), true)),
            hi: Some((rat(1), false)),
        });
        let bars = g.persistence_bars().unwrap();
        assert_eq!(bars, vec![bar(0, at(0, true), at(1, false), 1)]);
    }

    #[test]
    fn project_point_and_zero() {
        let f = sheaf_on(Interval1D::point(rat(3)));
        let bars = f.persistence_bars().unwrap();
        assert_eq!(bars, vec![bar(0, at(3, true), BarEnd::PosInf, 1)]);
        let z = CellSheaf1D::zero(Arc::new(Arrangement1D::build(&[])));
        assert!(z.persistence_bars().unwrap().is_empty());
        assert!(z.tamarkin_project().unwrap().support().is_empty());
    }

    #[test]
    fn project_rejects_unbounded() {
        let f = sheaf_on(Interval1D {
            lo: Some((rat(0), true)),
            hi: None,
        });
        assert!(matches!(
            f.tamarkin_project(),
            Err(CsError::UnboundedSupport)
        ));
        // The persistence engine itself still runs on such sheaves
        // (needed to take bars of the projector's own outputs).
        assert_eq!(
            f.persistence_bars().unwrap(),
            vec![bar(0, at(0, true), BarEnd::PosInf, 1)]
        );
    }

    #[test]
    fn projection_is_idempotent() {
        let cases = vec![
            Interval1D::closed(rat(0), rat(1)),
            Interval1D::open(rat(0), rat(1)),
            Interval1D {
                lo: Some((rat(0), true)),
                hi: Some((rat(1), false)),
            },
            Interval1D::point(rat(-2)),
        ];
        for support in cases {
            let f = sheaf_on(support.clone());
            let p = f.tamarkin_project().unwrap();
            // Bars of P(F) equal bars of F, so P(P(F)) = P(F) on the nose.
            assert_eq!(
                p.persistence_bars().unwrap(),
                f.persistence_bars().unwrap(),
                "support {support:?}"
            );
            let pp = CellSheaf1D::compile_from_bars(&p.persistence_bars().unwrap()).unwrap();
            assert_eq!(pp.stalk_table(), p.stalk_table(), "support {support:?}");
        }
        // A shifted multi-summand example.
        let spec = SheafSpec1D {
            indicators: vec![
                ind(Interval1D::closed(rat(0), rat(2)), 0, 2),
                ind(Interval1D::open(rat(1), rat(3)), 1, 1),
            ],
        };
        let f = CellSheaf1D::compile(&spec).unwrap();
        let p = f.tamarkin_project().unwrap();
        assert_eq!(p.persistence_bars().unwrap(), f.persistence_bars().unwrap());
        assert!(p.singular_support().iter().all(|e| e.sign > 0));
    }

    #[test]
    fn direct_sum_additive_on_bars() {
        let spec = SheafSpec1D {
            indicators: vec![
                ind(Interval1D::closed(rat(0), rat(1)), 0, 1),
                ind(Interval1D::closed(rat(0), rat(1)), 0, 1),
            ],
        };
        let two = CellSheaf1D::compile(&spec).unwrap();
        let bars = two.persistence_bars().unwrap();
        assert_eq!(bars, vec![bar(0, at(0, true), BarEnd::PosInf, 2)]);
    }

    #[test]
    fn random_generator_is_seeded_and_projectable() {
        use rand::SeedableRng;
        let mut a = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let mut b = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let f = random_compact_sheaf1d(&mut a, 4);
            let g = random_compact_sheaf1d(&mut b, 4);
            assert_eq!(f.stalk_table(), g.stalk_table());
            assert!(!f.support().is_empty());
            assert!(f.support().iter().all(|&c| f.arrangement().cell(c).bounded));
            let p = f.tamarkin_project().unwrap();
            assert!(p.singular_support().iter().all(|e| e.sign > 0));
        }
    }
}
