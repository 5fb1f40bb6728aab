//! Cellular sheaves (complexes of them) on plane arrangements.
//!
//! A [`CellSheaf`] assigns to every cell of an [`Arrangement2D`] a cochain
//! complex (its stalk) and to every covering pair `c ⋖ c'` a degreewise
//! generization map `stalk(c) -> stalk(c')` commuting with the internal
//! differentials; functoriality across square faces of the poset is a
//! validated invariant, so composite generization maps are path-independent.
//!
//! Sheaves are usually compiled from indicator data (`k_Z[d]` summands on
//! locally closed convex sets), which produces stalks with zero internal
//! differential; mapping cones introduce honest internal differentials.
//!
//! Derived functors are computed cellularly:
//! * compactly supported cohomology of a locally closed union of cells is
//!   the total complex of `⊕_c stalk(c)[-dim c]` with signed generization
//!   differentials (the zero-extension to the disk compactification makes
//!   this literal),
//! * sections over an open union of cells form the order-complex (nerve)
//!   cochain complex of the face poset, which collapses to the stalk on a
//!   star,
//! * the microstalk at `(p, ξ)` is the fiber of the restriction
//!   `RΓ(B) -> RΓ(B ∩ {φ < 0})` for the linear test `φ(y) = ξ·(y - p)`,
//!   with `B` the open star of `p` after refining by `{φ = 0}` and one
//!   auxiliary transverse line.

pub mod line;
pub mod spec;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::exactlin::{ChainComplex, ChainMap, ComplexError, GradedDims, Mat};
use crate::plgeom::{ccw_cmp, primitive_dir, rot90, Arrangement2D, LCSet, Line, PlGeomError};
use crate::{QChainMap, QComplex, QMat, Rat};

#[derive(Debug, thiserror::Error)]
pub enum CsError {
    #[error("cell set is not open")]
    NotOpen,
    #[error("cell set is not locally closed (not order-convex)")]
    NotLocallyClosed,
    #[error("sheaves live on different arrangements")]
    ArrangementMismatch,
    #[error("morphism is not a natural transformation at covering pair ({0}, {1})")]
    NotNatural(usize, usize),
    #[error("sheaf has unbounded support")]
    UnboundedSupport,
    #[error("bad sheaf data: {0}")]
    BadData(String),
    #[error(transparent)]
    Geometry(#[from] PlGeomError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
}

/// A degreewise matrix between graded stalks; absent degrees are zero.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GradedMat {
    comps: BTreeMap<i32, QMat>,
}

impl GradedMat {
    pub fn zero() -> GradedMat {
        GradedMat::default()
    }

    pub fn identity(dims: &GradedDims) -> GradedMat {
        let comps = dims.iter().map(|(k, d)| (k, Mat::identity(d))).collect();
        GradedMat { comps }
    }

    pub fn from_comps(comps: BTreeMap<i32, QMat>) -> GradedMat {
        GradedMat {
            comps: comps.into_iter().filter(|(_, m)| !m.is_zero_mat()).collect(),
        }
    }

    pub fn comp_at(&self, k: i32, rows: usize, cols: usize) -> QMat {
        self.comps
            .get(&k)
            .cloned()
            .unwrap_or_else(|| Mat::zero(rows, cols))
    }

    pub fn comps(&self) -> &BTreeMap<i32, QMat> {
        &self.comps
    }

    /// Shift the degree indexing: content at degree `n + s` moves to `n`.
    pub fn shifted(&self, s: i32) -> GradedMat {
        GradedMat {
            comps: self.comps.iter().map(|(&k, m)| (k - s, m.clone())).collect(),
        }
    }
}

/// The indicator building block `k_Z^{mult}` placed in cohomological degree
/// `-shift` on a locally closed convex polyhedral set `Z`.
#[derive(Clone, Debug)]
pub struct IndicatorSpec {
    pub support: LCSet,
    pub shift: i32,
    pub mult: usize,
}

/// A formal direct sum of shifted indicators.
#[derive(Clone, Debug, Default)]
pub struct SheafSpec {
    pub indicators: Vec<IndicatorSpec>,
}

impl SheafSpec {
    pub fn lines(&self) -> Vec<Line> {
        self.indicators
            .iter()
            .flat_map(|i| i.support.required_lines())
            .collect()
    }
}

/// Description of one covector sector at a cell: either a single ray
/// direction or the open sector between two consecutive rays
/// (counterclockwise `from -> to`).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum SectorDesc {
    Ray { dir: (BigInt, BigInt) },
    Open {
        from: (BigInt, BigInt),
        to: (BigInt, BigInt),
    },
}

impl SectorDesc {
    /// A covector in (the relative interior of) the sector.
    pub fn sample_dir(&self) -> (BigInt, BigInt) {
        match self {
            SectorDesc::Ray { dir } => dir.clone(),
            SectorDesc::Open { from, to } => {
                if to.0 == -(&from.0) && to.1 == -(&from.1) {
                    rot90(from)
                } else {
                    (&from.0 + &to.0, &from.1 + &to.1)
                }
            }
        }
    }
}

/// Nonzero-microstalk entries of the singular support scan.
#[derive(Clone, Debug)]
pub struct SSEntry {
    pub cell: usize,
    pub sector: SectorDesc,
    pub micro: GradedDims,
}

#[derive(Clone, Debug, Default)]
pub struct SSReport {
    pub entries: Vec<SSEntry>,
}

impl SSReport {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn cells(&self) -> BTreeSet<usize> {
        self.entries.iter().map(|e| e.cell).collect()
    }

    pub fn sectors_at(&self, cell: usize) -> Vec<&SectorDesc> {
        self.entries
            .iter()
            .filter(|e| e.cell == cell)
            .map(|e| &e.sector)
            .collect()
    }

    /// Whether every entry of `self` appears (same cell, same sector) in one
    /// of the given reports; microstalk dimensions are not compared.
    pub fn within(&self, others: &[&SSReport]) -> bool {
        self.entries.iter().all(|e| {
            others.iter().any(|r| {
                r.entries
                    .iter()
                    .any(|o| o.cell == e.cell && o.sector == e.sector)
            })
        })
    }
}

/// A complex of cellular sheaves on a plane arrangement.
#[derive(Clone, Debug)]
pub struct CellSheaf {
    arr: Arc<Arrangement2D>,
    stalks: Vec<QComplex>,
    gens: BTreeMap<(usize, usize), GradedMat>,
}

impl CellSheaf {
    // ------------------------------------------------------------------
    // Construction
    // ------------------------------------------------------------------

    pub fn zero(arr: Arc<Arrangement2D>) -> CellSheaf {
        let n = arr.cells().len();
        CellSheaf {
            arr,
            stalks: vec![ChainComplex::zero(); n],
            gens: BTreeMap::new(),
        }
    }

    /// The constant sheaf `k` on the plane.
    pub fn constant(arr: Arc<Arrangement2D>) -> CellSheaf {
        let spec = SheafSpec {
            indicators: vec![IndicatorSpec {
                support: LCSet::default(),
                shift: 0,
                mult: 1,
            }],
        };
        CellSheaf::compile_on(arr, &spec).expect("constant sheaf always compiles")
    }

    /// Compile on the arrangement generated by the spec's own lines.
    pub fn compile(spec: &SheafSpec) -> Result<CellSheaf, CsError> {
        let arr = Arc::new(Arrangement2D::build(&spec.lines()));
        CellSheaf::compile_on(arr, spec)
    }

    /// Compile on a given arrangement, which must contain every constraint
    /// line of the spec (refinements of the minimal arrangement are fine).
    pub fn compile_on(arr: Arc<Arrangement2D>, spec: &SheafSpec) -> Result<CellSheaf, CsError> {
        let n = arr.cells().len();
        // Which cells each indicator covers.
        let mut supports: Vec<BTreeSet<usize>> = Vec::new();
        for ind in &spec.indicators {
            if ind.mult == 0 {
                return Err(CsError::BadData("multiplicity must be >= 1".into()));
            }
            supports.push(ind.support.compile(&arr)?);
        }
        // Per-cell block offsets: offsets[cell][indicator] = Some(start) in
        // degree -shift.
        let mut stalks = Vec::with_capacity(n);
        let mut offsets: Vec<Vec<Option<usize>>> = vec![vec![None; spec.indicators.len()]; n];
        for c in 0..n {
            let mut dims = GradedDims::new();
            for (i, ind) in spec.indicators.iter().enumerate() {
                if supports[i].contains(&c) {
                    offsets[c][i] = Some(dims.dim(-ind.shift));
                    dims.add(-ind.shift, ind.mult);
                }
            }
            stalks.push(ChainComplex::from_graded(&dims));
        }
        let mut gens = BTreeMap::new();
        for &(lo, hi, _) in arr.covers() {
            let mut comps: BTreeMap<i32, QMat> = BTreeMap::new();
            for (i, ind) in spec.indicators.iter().enumerate() {
                let (Some(off_lo), Some(off_hi)) = (offsets[lo][i], offsets[hi][i]) else {
                    continue;
                };
                let deg = -ind.shift;
                let m = comps.entry(deg).or_insert_with(|| {
                    Mat::zero(stalks[hi].dim(deg), stalks[lo].dim(deg))
                });
                m.add_block(off_hi, off_lo, &Mat::identity(ind.mult));
            }
            if !comps.is_empty() {
                gens.insert((lo, hi), GradedMat::from_comps(comps));
            }
        }
        Ok(CellSheaf { arr, stalks, gens })
    }

    /// Assemble from explicit parts; validates everything.
    pub fn from_parts(
        arr: Arc<Arrangement2D>,
        stalks: Vec<QComplex>,
        gens: BTreeMap<(usize, usize), GradedMat>,
    ) -> Result<CellSheaf, CsError> {
        if stalks.len() != arr.cells().len() {
            return Err(CsError::BadData(format!(
                "{} stalks for {} cells",
                stalks.len(),
                arr.cells().len()
            )));
        }
        let covers: BTreeSet<(usize, usize)> =
            arr.covers().iter().map(|&(lo, hi, _)| (lo, hi)).collect();
        for pair in gens.keys() {
            if !covers.contains(pair) {
                return Err(CsError::BadData(format!(
                    "generization on non-covering pair {pair:?}"
                )));
            }
        }
        let sheaf = CellSheaf { arr, stalks, gens };
        sheaf.validate()?;
        Ok(sheaf)
    }

    /// Check chain-map and functoriality invariants of the generization data.
    pub fn validate(&self) -> Result<(), CsError> {
        // Each generization is a chain map between stalk complexes.
        for (&(lo, hi), g) in &self.gens {
            self.as_chain_map(lo, hi, g)?;
        }
        // Functoriality: both square paths v < e < f agree.
        let n = self.arr.cells().len();
        for v in 0..n {
            if self.arr.cell(v).dim != 0 {
                continue;
            }
            let mut faces: BTreeSet<usize> = BTreeSet::new();
            for &(e, _) in self.arr.covers_up(v) {
                for &(f, _) in self.arr.covers_up(e) {
                    faces.insert(f);
                }
            }
            for f in faces {
                let mut composite: Option<(usize, GradedMat)> = None;
                for &(e, _) in self.arr.covers_up(v) {
                    if !self.arr.leq(e, f) {
                        continue;
                    }
                    let comp = self.compose_gens(v, e, f);
                    if let Some((e0, prev)) = &composite {
                        if *prev != comp {
                            return Err(CsError::BadData(format!(
                                "functoriality fails from cell {v} to {f} via edges {e0} and {e}"
                            )));
                        }
                    } else {
                        composite = Some((e, comp));
                    }
                }
            }
        }
        Ok(())
    }

    fn as_chain_map(&self, lo: usize, hi: usize, g: &GradedMat) -> Result<QChainMap, CsError> {
        let src = self.stalks[lo].clone();
        let tgt = self.stalks[hi].clone();
        let mut comps = BTreeMap::new();
        for (k, _) in src.graded_dims().iter() {
            comps.insert(k, g.comp_at(k, tgt.dim(k), src.dim(k)));
        }
        Ok(ChainMap::new(src, tgt, comps)?)
    }

    // ------------------------------------------------------------------
    // Accessors
    // ------------------------------------------------------------------

    pub fn arrangement(&self) -> &Arc<Arrangement2D> {
        &self.arr
    }

    pub fn stalk_complex(&self, c: usize) -> &QComplex {
        &self.stalks[c]
    }

    /// Raw graded dimensions of the stalk complex at a cell.
    pub fn stalk_dims(&self, c: usize) -> GradedDims {
        self.stalks[c].graded_dims()
    }

    /// Cohomology of the stalk complex at the cell containing `p` — the
    /// quasi-isomorphism-invariant stalk.
    pub fn stalk_at(&self, p: &(Rat, Rat)) -> GradedDims {
        self.stalks[self.arr.locate(p)].cohomology()
    }

    /// Cells with nonzero stalk.
    pub fn support(&self) -> BTreeSet<usize> {
        (0..self.stalks.len())
            .filter(|&c| !self.stalks[c].graded_dims().is_zero())
            .collect()
    }

    /// Generization matrix on a covering pair.
    pub fn gen_at(&self, lo: usize, hi: usize) -> GradedMat {
        self.gens.get(&(lo, hi)).cloned().unwrap_or_default()
    }

    fn compose_mats(&self, outer: &GradedMat, inner: &GradedMat, x: usize, z: usize, y: usize) -> GradedMat {
        // inner: stalk(x) -> stalk(z), outer: stalk(z) -> stalk(y)
        let mut comps = BTreeMap::new();
        for (k, _) in self.stalks[x].graded_dims().iter() {
            let a = inner.comp_at(k, self.stalks[z].dim(k), self.stalks[x].dim(k));
            let b = outer.comp_at(k, self.stalks[y].dim(k), self.stalks[z].dim(k));
            comps.insert(k, b.mul(&a));
        }
        GradedMat::from_comps(comps)
    }

    fn compose_gens(&self, x: usize, z: usize, y: usize) -> GradedMat {
        self.compose_mats(&self.gen_at(z, y), &self.gen_at(x, z), x, z, y)
    }

    /// Generization map between any comparable pair `x <= y` (composite
    /// along a covering chain; path-independent by functoriality).
    pub fn gen_between(&self, x: usize, y: usize) -> GradedMat {
        if x == y {
            return GradedMat::identity(&self.stalks[x].graded_dims());
        }
        let (dx, dy) = (self.arr.cell(x).dim, self.arr.cell(y).dim);
        debug_assert!(self.arr.leq(x, y));
        if dy == dx + 1 {
            return self.gen_at(x, y);
        }
        // Gap of two: go through any intermediate edge.
        for &(z, _) in self.arr.covers_up(x) {
            if self.arr.leq(z, y) {
                return self.compose_gens(x, z, y);
            }
        }
        unreachable!("no covering chain between comparable cells");
    }

    // ------------------------------------------------------------------
    // Structural operations
    // ------------------------------------------------------------------

    fn same_arr(&self, other: &CellSheaf) -> Result<(), CsError> {
        if self.arr.lines() != other.arr.lines() {
            return Err(CsError::ArrangementMismatch);
        }
        Ok(())
    }

    pub fn direct_sum(&self, other: &CellSheaf) -> Result<CellSheaf, CsError> {
        self.same_arr(other)?;
        let stalks: Vec<QComplex> = self
            .stalks
            .iter()
            .zip(&other.stalks)
            .map(|(a, b)| a.direct_sum(b))
            .collect();
        let mut gens = BTreeMap::new();
        for &(lo, hi, _) in self.arr.covers() {
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
            if !g.comps.is_empty() {
                gens.insert((lo, hi), g);
            }
        }
        Ok(CellSheaf {
            arr: self.arr.clone(),
            stalks,
            gens,
        })
    }

    pub fn shifted(&self, s: i32) -> CellSheaf {
        CellSheaf {
            arr: self.arr.clone(),
            stalks: self.stalks.iter().map(|c| c.shifted(s)).collect(),
            gens: self
                .gens
                .iter()
                .map(|(&k, g)| (k, g.shifted(s)))
                .collect(),
        }
    }

    /// Transport along a refinement: `map[new_cell] = old_cell`.
    pub fn transported(&self, fine: Arc<Arrangement2D>, map: &[usize]) -> CellSheaf {
        let stalks: Vec<QComplex> = map.iter().map(|&o| self.stalks[o].clone()).collect();
        let mut gens = BTreeMap::new();
        for &(lo, hi, _) in fine.covers() {
            let (olo, ohi) = (map[lo], map[hi]);
            let g = if olo == ohi {
                GradedMat::identity(&self.stalks[olo].graded_dims())
            } else {
                self.gen_between(olo, ohi)
            };
            if !g.comps.is_empty() {
                gens.insert((lo, hi), g);
            }
        }
        CellSheaf {
            arr: fine,
            stalks,
            gens,
        }
    }

    /// Convenience: refine the base arrangement by extra lines and transport.
    pub fn refined(&self, extra: &[Line]) -> CellSheaf {
        let (fine, map) = self.arr.with_lines(extra);
        self.transported(Arc::new(fine), &map)
    }

    /// Cellwise mapping cone of a sheaf morphism.
    pub fn cone_of(f: &SheafMap) -> Result<CellSheaf, CsError> {
        f.validate()?;
        let src = &f.src;
        let tgt = &f.tgt;
        let n = src.arr.cells().len();
        let mut stalks = Vec::with_capacity(n);
        for c in 0..n {
            stalks.push(f.component_chain_map(c)?.cone());
        }
        let mut gens = BTreeMap::new();
        for &(lo, hi, _) in src.arr.covers() {
            let gs = src.gen_at(lo, hi);
            let gt = tgt.gen_at(lo, hi);
            let mut comps = BTreeMap::new();
            for (k, _) in stalks[lo].graded_dims().iter() {
                // Cone^k = Src^{k+1} ⊕ Tgt^k, generizations act blockwise.
                let mut m = Mat::zero(stalks[hi].dim(k), stalks[lo].dim(k));
                m.add_block(
                    0,
                    0,
                    &gs.comp_at(k + 1, tgt_dim(src, hi, k + 1), tgt_dim(src, lo, k + 1)),
                );
                m.add_block(
                    tgt_dim(src, hi, k + 1),
                    tgt_dim(src, lo, k + 1),
                    &gt.comp_at(k, tgt_dim(tgt, hi, k), tgt_dim(tgt, lo, k)),
                );
                comps.insert(k, m);
            }
            let g = GradedMat::from_comps(comps);
            if !g.comps.is_empty() {
                gens.insert((lo, hi), g);
            }
        }
        Ok(CellSheaf {
            arr: src.arr.clone(),
            stalks,
            gens,
        })
    }

    // ------------------------------------------------------------------
    // Cohomology
    // ------------------------------------------------------------------

    /// The compactly supported cellular cochain complex of a union of cells:
    /// `⊕_c stalk(c)[-dim c]` with signed generization differentials.
    /// Callers must ensure `z` is locally closed for this to compute
    /// `RΓ_c`; see [`CellSheaf::compact_cohomology`].
    pub fn compact_complex(&self, z: &BTreeSet<usize>) -> Result<QComplex, CsError> {
        let order: Vec<usize> = z.iter().copied().collect();
        let layout = BlockLayout::new(
            order
                .iter()
                .map(|&c| (c, self.arr.cell(c).dim as i32, self.stalks[c].graded_dims()))
                .collect(),
        );
        let mut diffs: BTreeMap<i32, QMat> = layout.zero_diffs();
        // Internal differentials with the double-complex sign (-1)^dim.
        for &c in &order {
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
        // Generization differentials with incidence signs.
        for &(lo, hi, sign) in self.arr.covers() {
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

    /// Graded dimensions of `RΓ_c(Z, F|_Z)` for locally closed `Z`.
    pub fn compact_cohomology(&self, z: &BTreeSet<usize>) -> Result<GradedDims, CsError> {
        if !self.arr.is_order_convex(z) {
            return Err(CsError::NotLocallyClosed);
        }
        Ok(self.compact_complex(z)?.cohomology())
    }

    /// The restriction (proper pushforward) chain map
    /// `RΓ_c(Z) -> RΓ_c(Z')` for `Z'` closed in `Z`: coordinate projection.
    pub fn restriction_to_closed(
        &self,
        z: &BTreeSet<usize>,
        z_sub: &BTreeSet<usize>,
    ) -> Result<QChainMap, CsError> {
        debug_assert!(z_sub.is_subset(z));
        let big = self.compact_complex(z)?;
        let small = self.compact_complex(z_sub)?;
        let lay_big = self.layout_for(z);
        let lay_small = self.layout_for(z_sub);
        let mut comps: BTreeMap<i32, QMat> = BTreeMap::new();
        for (n, &dim_small) in &lay_small.dims {
            let dim_big = big.dim(*n);
            let mut m = Mat::zero(dim_small, dim_big);
            for (&(c, q), &(deg, off_small)) in &lay_small.pos {
                if deg != *n {
                    continue;
                }
                let &(_, off_big) = lay_big.pos.get(&(c, q)).expect("subset cell present");
                let d = self.stalks[c].dim(q);
                m.add_block(off_small, off_big, &Mat::identity(d));
            }
            comps.insert(*n, m);
        }
        Ok(ChainMap::new(big, small, comps)?)
    }

    fn layout_for(&self, z: &BTreeSet<usize>) -> BlockLayout {
        BlockLayout::new(
            z.iter()
                .map(|&c| (c, self.arr.cell(c).dim as i32, self.stalks[c].graded_dims()))
                .collect(),
        )
    }

    /// Cohomology of `RΓ(U, F)` for an open union of cells, via the
    /// order-complex cochain complex of the face poset of `U`.
    pub fn sections(&self, u: &BTreeSet<usize>) -> Result<GradedDims, CsError> {
        if !self.arr.is_open(u) {
            return Err(CsError::NotOpen);
        }
        // Star shortcut: a minimum cell's stalk computes RΓ.
        if let Some(&m) = u.iter().find(|&&m| u.iter().all(|&c| self.arr.leq(m, c))) {
            if u.len() == self.arr.star(m).len() {
                return Ok(self.stalks[m].cohomology());
            }
        }
        Ok(self.nerve_total(u)?.0.cohomology())
    }

    /// Order-complex (nerve) total complex over a cell set, plus the chain
    /// layout used (for augmentation maps).
    fn nerve_total(&self, u: &BTreeSet<usize>) -> Result<(QComplex, NerveLayout), CsError> {
        let cells: Vec<usize> = u.iter().copied().collect();
        // Enumerate strictly increasing chains (max length 3 in the plane).
        let mut chains: Vec<Vec<usize>> = Vec::new();
        for &a in &cells {
            chains.push(vec![a]);
        }
        for &a in &cells {
            for &b in &cells {
                if a != b && self.arr.leq(a, b) {
                    chains.push(vec![a, b]);
                }
            }
        }
        for &a in &cells {
            for &b in &cells {
                if a == b || !self.arr.leq(a, b) {
                    continue;
                }
                for &c in &cells {
                    if c != b && self.arr.leq(b, c) {
                        chains.push(vec![a, b, c]);
                    }
                }
            }
        }
        chains.sort_by(|x, y| (x.len(), x.as_slice()).cmp(&(y.len(), y.as_slice())));
        let index: BTreeMap<Vec<usize>, usize> =
            chains.iter().cloned().enumerate().map(|(i, c)| (c, i)).collect();

        let layout = BlockLayout::new(
            chains
                .iter()
                .enumerate()
                .map(|(i, ch)| {
                    let last = *ch.last().unwrap();
                    (i, ch.len() as i32 - 1, self.stalks[last].graded_dims())
                })
                .collect(),
        );
        let mut diffs = layout.zero_diffs();
        // Internal differential with sign (-1)^p.
        for (i, ch) in chains.iter().enumerate() {
            let p = ch.len() as i32 - 1;
            let st = &self.stalks[*ch.last().unwrap()];
            for (q, _) in st.graded_dims().iter() {
                if st.dim(q + 1) == 0 {
                    continue;
                }
                let mut d = st.d_at(q);
                if p.rem_euclid(2) == 1 {
                    d = d.neg();
                }
                layout.add(&mut diffs, (i, q + 1), (i, q), &d);
            }
        }
        // Nerve differential: for a target chain K' of length m+1, facets.
        for (ti, ch) in chains.iter().enumerate() {
            let m = ch.len();
            if m < 2 {
                continue;
            }
            let last = ch[m - 1];
            let prev = ch[m - 2];
            for omit in 0..m {
                let facet: Vec<usize> = ch
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != omit)
                    .map(|(_, &c)| c)
                    .collect();
                let si = index[&facet];
                let sign_neg = omit % 2 == 1;
                if omit < m - 1 {
                    // Reindexing: identity on stalk(last).
                    let st = &self.stalks[last];
                    for (q, d) in st.graded_dims().iter() {
                        let mut mat: QMat = Mat::identity(d);
                        if sign_neg {
                            mat = mat.neg();
                        }
                        layout.add(&mut diffs, (ti, q), (si, q), &mat);
                    }
                } else {
                    // Omit the last cell: generization from stalk(prev).
                    let g = self.gen_between(prev, last);
                    for (q, _) in self.stalks[prev].graded_dims().iter() {
                        if self.stalks[last].dim(q) == 0 {
                            continue;
                        }
                        let mut mat =
                            g.comp_at(q, self.stalks[last].dim(q), self.stalks[prev].dim(q));
                        if sign_neg {
                            mat = mat.neg();
                        }
                        layout.add(&mut diffs, (ti, q), (si, q), &mat);
                    }
                }
            }
        }
        let complex = ChainComplex::new(layout.dims.clone(), diffs)?;
        Ok((
            complex,
            NerveLayout {
                chains,
                layout,
            },
        ))
    }

    // ------------------------------------------------------------------
    // Microlocal probes
    // ------------------------------------------------------------------

    /// Microstalk at `(p, ξ)` with the default auxiliary line (normal
    /// rotated a quarter turn from ξ).
    pub fn microstalk(&self, p: &(Rat, Rat), xi: &(Rat, Rat)) -> GradedDims {
        let aux = (-xi.1.clone(), xi.0.clone());
        self.microstalk_with_aux(p, xi, &aux)
    }

    /// Microstalk with an explicit auxiliary line normal (must not be
    /// parallel to ξ); the result is independent of the choice.
    pub fn microstalk_with_aux(
        &self,
        p: &(Rat, Rat),
        xi: &(Rat, Rat),
        aux_normal: &(Rat, Rat),
    ) -> GradedDims {
        assert!(
            !(xi.0.is_zero() && xi.1.is_zero()),
            "covector must be nonzero"
        );
        let cross = &xi.0 * &aux_normal.1 - &xi.1 * &aux_normal.0;
        assert!(!cross.is_zero(), "auxiliary line must be transverse");
        let phi_line = Line::new(
            xi.0.clone(),
            xi.1.clone(),
            &xi.0 * &p.0 + &xi.1 * &p.1,
        )
        .expect("nonzero covector");
        let aux_line = Line::new(
            aux_normal.0.clone(),
            aux_normal.1.clone(),
            &aux_normal.0 * &p.0 + &aux_normal.1 * &p.1,
        )
        .expect("nonzero auxiliary normal");
        let fine_sheaf = self.refined(&[phi_line, aux_line]);
        let farr = fine_sheaf.arrangement().clone();
        let v = farr.locate(p);
        debug_assert_eq!(farr.cell(v).dim, 0, "p must be a vertex after refining");
        // B ∩ {φ < 0} inside the open star of v.
        let below: BTreeSet<usize> = farr
            .star(v)
            .into_iter()
            .filter(|&c| {
                let s = &farr.cell(c).sample;
                let phi = &xi.0 * (&s.0 - &p.0) + &xi.1 * (&s.1 - &p.1);
                crate::plgeom::sgn(&phi) < 0
            })
            .collect();
        let (nerve, nl) = fine_sheaf
            .nerve_total(&below)
            .expect("nerve of open subset");
        // Augmentation stalk(v) -> nerve via generizations to singletons.
        let stalk = fine_sheaf.stalks[v].clone();
        let mut comps: BTreeMap<i32, QMat> = BTreeMap::new();
        for (q, _) in stalk.graded_dims().iter() {
            if nerve.dim(q) == 0 {
                continue;
            }
            let mut m = Mat::zero(nerve.dim(q), stalk.dim(q));
            for (i, ch) in nl.chains.iter().enumerate() {
                if ch.len() != 1 {
                    continue;
                }
                let c = ch[0];
                if fine_sheaf.stalks[c].dim(q) == 0 {
                    continue;
                }
                let g = fine_sheaf.gen_between(v, c);
                let block = g.comp_at(q, fine_sheaf.stalks[c].dim(q), stalk.dim(q));
                let &(_, off) = nl.layout.pos.get(&(i, q)).unwrap();
                m.add_block(off, 0, &block);
            }
            comps.insert(q, m);
        }
        let aug = ChainMap::new(stalk, nerve, comps).expect("augmentation is a chain map");
        aug.fiber().cohomology()
    }

    /// Scan every cell against one covector per sector of the direction
    /// circle cut by the arrangement's edge normals (each normal ray, plus
    /// one sample inside each open gap); report all nonzero microstalks.
    pub fn singular_support(&self) -> SSReport {
        let sectors = normal_sectors(&self.arr);
        let mut entries = Vec::new();
        for c in 0..self.arr.cells().len() {
            let p = self.arr.cell(c).sample.clone();
            for sector in &sectors {
                let d = sector.sample_dir();
                let xi = (
                    Rat::from_integer(d.0.clone()),
                    Rat::from_integer(d.1.clone()),
                );
                let micro = self.microstalk(&p, &xi);
                if !micro.is_zero() {
                    entries.push(SSEntry {
                        cell: c,
                        sector: sector.clone(),
                        micro,
                    });
                }
            }
        }
        SSReport { entries }
    }
}

fn tgt_dim(sheaf: &CellSheaf, cell: usize, k: i32) -> usize {
    sheaf.stalks[cell].dim(k)
}

/// The sector decomposition of the direction circle cut by all ± line
/// normals: one `Ray` per normal direction and one `Open` per gap.  With no
/// lines there are no rays; four axis directions are probed as degenerate
/// "rays" so constant sheaves still get scanned.
pub fn normal_sectors(arr: &Arrangement2D) -> Vec<SectorDesc> {
    let mut dirs: BTreeSet<(BigInt, BigInt)> = BTreeSet::new();
    for l in arr.lines() {
        let n = l.normal();
        let u = primitive_dir(&n.0, &n.1);
        dirs.insert((-u.0.clone(), -u.1.clone()));
        dirs.insert(u);
    }
    if dirs.is_empty() {
        return [(1, 0), (0, 1), (-1, 0), (0, -1)]
            .into_iter()
            .map(|(x, y)| SectorDesc::Ray {
                dir: (BigInt::from(x), BigInt::from(y)),
            })
            .collect();
    }
    let mut rays: Vec<(BigInt, BigInt)> = dirs.into_iter().collect();
    rays.sort_by(ccw_cmp);
    let mut out = Vec::new();
    let m = rays.len();
    for k in 0..m {
        out.push(SectorDesc::Ray {
            dir: rays[k].clone(),
        });
        out.push(SectorDesc::Open {
            from: rays[k].clone(),
            to: rays[(k + 1) % m].clone(),
        });
    }
    out
}

/// A morphism of cell sheaves on a shared arrangement: degreewise matrices
/// per cell, commuting with internal differentials and generizations.
#[derive(Clone, Debug)]
pub struct SheafMap {
    pub src: CellSheaf,
    pub tgt: CellSheaf,
    pub comps: Vec<GradedMat>,
}

impl SheafMap {
    pub fn new(src: CellSheaf, tgt: CellSheaf, comps: Vec<GradedMat>) -> Result<SheafMap, CsError> {
        let f = SheafMap { src, tgt, comps };
        f.validate()?;
        Ok(f)
    }

    /// The zero morphism.
    pub fn zero(src: CellSheaf, tgt: CellSheaf) -> Result<SheafMap, CsError> {
        let n = src.arr.cells().len();
        SheafMap::new(src, tgt, vec![GradedMat::zero(); n])
    }

    fn component_chain_map(&self, c: usize) -> Result<QChainMap, CsError> {
        let src = self.src.stalks[c].clone();
        let tgt = self.tgt.stalks[c].clone();
        let mut comps = BTreeMap::new();
        for (k, _) in src.graded_dims().iter() {
            comps.insert(k, self.comps[c].comp_at(k, tgt.dim(k), src.dim(k)));
        }
        Ok(ChainMap::new(src, tgt, comps)?)
    }

    pub fn validate(&self) -> Result<(), CsError> {
        self.src.same_arr(&self.tgt)?;
        if self.comps.len() != self.src.arr.cells().len() {
            return Err(CsError::BadData("one component per cell required".into()));
        }
        for c in 0..self.comps.len() {
            self.component_chain_map(c)?;
        }
        // Naturality over covering pairs: f_hi ∘ gen_src = gen_tgt ∘ f_lo.
        for &(lo, hi, _) in self.src.arr.covers() {
            for (q, _) in self.src.stalks[lo].graded_dims().iter() {
                let lhs = self.comps[hi]
                    .comp_at(q, self.tgt.stalks[hi].dim(q), self.src.stalks[hi].dim(q))
                    .mul(&self.src.gen_at(lo, hi).comp_at(
                        q,
                        self.src.stalks[hi].dim(q),
                        self.src.stalks[lo].dim(q),
                    ));
                let rhs = self
                    .tgt
                    .gen_at(lo, hi)
                    .comp_at(q, self.tgt.stalks[hi].dim(q), self.tgt.stalks[lo].dim(q))
                    .mul(&self.comps[lo].comp_at(
                        q,
                        self.tgt.stalks[lo].dim(q),
                        self.src.stalks[lo].dim(q),
                    ));
                if lhs != rhs {
                    return Err(CsError::NotNatural(lo, hi));
                }
            }
        }
        Ok(())
    }
}

/// Deterministic block layout for total complexes: blocks are keyed by
/// `(unit, internal degree)` where a unit (cell or chain) contributes its
/// stalk at total degree `unit_degree + internal degree`.
struct BlockLayout {
    dims: BTreeMap<i32, usize>,
    pos: BTreeMap<(usize, i32), (i32, usize)>,
}

impl BlockLayout {
    fn new(units: Vec<(usize, i32, GradedDims)>) -> BlockLayout {
        let mut dims: BTreeMap<i32, usize> = BTreeMap::new();
        let mut pos = BTreeMap::new();
        // Sort blocks by (total degree, unit id, internal degree).
        let mut blocks: Vec<(i32, usize, i32, usize)> = Vec::new();
        for (unit, base, gd) in &units {
            for (q, d) in gd.iter() {
                blocks.push((base + q, *unit, q, d));
            }
        }
        blocks.sort();
        for (n, unit, q, d) in blocks {
            let off = dims.entry(n).or_insert(0);
            pos.insert((unit, q), (n, *off));
            *off += d;
        }
        BlockLayout { dims, pos }
    }

    fn zero_diffs(&self) -> BTreeMap<i32, QMat> {
        let mut out = BTreeMap::new();
        for (&n, &d) in &self.dims {
            let rows = self.dims.get(&(n + 1)).copied().unwrap_or(0);
            if rows > 0 && d > 0 {
                out.insert(n, Mat::zero(rows, d));
            }
        }
        out
    }

    /// Accumulate `block` into the differential component
    /// from `(src_unit, src_q)` (degree n) to `(tgt_unit, tgt_q)` (degree n+1).
    fn add(
        &self,
        diffs: &mut BTreeMap<i32, QMat>,
        tgt: (usize, i32),
        src: (usize, i32),
        block: &QMat,
    ) {
        let &(n_src, off_src) = self.pos.get(&src).expect("source block");
        let &(n_tgt, off_tgt) = self.pos.get(&tgt).expect("target block");
        debug_assert_eq!(n_tgt, n_src + 1);
        let m = diffs.get_mut(&n_src).expect("differential slot");
        m.add_block(off_tgt, off_src, block);
    }
}

struct NerveLayout {
    chains: Vec<Vec<usize>>,
    layout: BlockLayout,
}
