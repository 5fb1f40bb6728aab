//! Dense exact linear algebra, graded dimensions, cochain complexes, cones,
//! and interval decomposition of one-directional persistence diagrams.
//!
//! Everything is generic over a [`Field`]; the lab instantiates it at the
//! exact rationals (see [`crate::Rat`] and the aliases at the crate root).
//! Matrices are dense — cell complexes here stay in the hundreds of cells.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Neg;

use num_traits::Num;
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

mod persist;
pub use persist::{interval_decompose, IntervalSummand};

/// Scalars that support exact field arithmetic.
pub trait Field: Clone + fmt::Debug + Num + Neg<Output = Self> {}
impl<T: Clone + fmt::Debug + Num + Neg<Output = T>> Field for T {}

/// Dense row-major matrix.  `rows` or `cols` may be zero.
#[derive(Clone, PartialEq, Eq)]
pub struct Mat<K> {
    rows: usize,
    cols: usize,
    data: Vec<K>,
}

impl<K: fmt::Debug> fmt::Debug for Mat<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                write!(f, "{:?} ", &self.data[r * self.cols + c])?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl<K: Field> Mat<K> {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![K::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zero(n, n);
        for i in 0..n {
            *m.at_mut(i, i) = K::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<K>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Mat {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, r: usize, c: usize) -> &K {
        &self.data[r * self.cols + c]
    }

    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut K {
        &mut self.data[r * self.cols + c]
    }

    pub fn is_zero_mat(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn neg(&self) -> Self {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| -x.clone()).collect(),
        }
    }

    pub fn mul(&self, other: &Mat<K>) -> Mat<K> {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out: Mat<K> = Mat::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k).clone();
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let cur = out.at(i, j).clone();
                    *out.at_mut(i, j) = cur + a.clone() * other.at(k, j).clone();
                }
            }
        }
        out
    }

    /// Paste `block` with its top-left corner at `(r0, c0)`, accumulating.
    pub fn add_block(&mut self, r0: usize, c0: usize, block: &Mat<K>) {
        assert!(r0 + block.rows <= self.rows && c0 + block.cols <= self.cols);
        for r in 0..block.rows {
            for c in 0..block.cols {
                let cur = self.at(r0 + r, c0 + c).clone();
                *self.at_mut(r0 + r, c0 + c) = cur + block.at(r, c).clone();
            }
        }
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hconcat(&self, other: &Mat<K>) -> Mat<K> {
        assert_eq!(self.rows, other.rows, "hconcat row mismatch");
        let mut out = Mat::zero(self.rows, self.cols + other.cols);
        out.add_block(0, 0, self);
        out.add_block(0, self.cols, other);
        out
    }

    /// Row-echelon reduction in place; returns the pivot columns.
    fn echelonize(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let Some(p) = (row..self.rows).find(|&r| !self.at(r, col).is_zero()) else {
                continue;
            };
            if p != row {
                for c in 0..self.cols {
                    self.data.swap(row * self.cols + c, p * self.cols + c);
                }
            }
            let inv = K::one() / self.at(row, col).clone();
            for c in col..self.cols {
                let v = self.at(row, c).clone() * inv.clone();
                *self.at_mut(row, c) = v;
            }
            for r in 0..self.rows {
                if r != row && !self.at(r, col).is_zero() {
                    let factor = self.at(r, col).clone();
                    for c in col..self.cols {
                        let v = self.at(r, c).clone() - factor.clone() * self.at(row, c).clone();
                        *self.at_mut(r, c) = v;
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        let mut work = self.clone();
        work.echelonize().len()
    }

    /// Columns of the returned matrix form a basis of `ker(self)`.
    pub fn kernel_basis(&self) -> Mat<K> {
        let mut work = self.clone();
        let pivots = work.echelonize();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut out = Mat::zero(self.cols, free.len());
        for (j, &fc) in free.iter().enumerate() {
            *out.at_mut(fc, j) = K::one();
            for (pr, &pc) in pivots.iter().enumerate() {
                *out.at_mut(pc, j) = -work.at(pr, fc).clone();
            }
        }
        out
    }
}

/// Finitely supported map `degree -> dimension`, dimensions strictly positive.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct GradedDims {
    dims: BTreeMap<i32, usize>,
}

impl fmt::Debug for GradedDims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (k, v)) in self.dims.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{k}:{v}")?;
        }
        write!(f, "}}")
    }
}

impl GradedDims {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn of(pairs: &[(i32, usize)]) -> Self {
        let mut g = Self::new();
        for &(k, d) in pairs {
            g.set(k, d);
        }
        g
    }

    pub fn set(&mut self, degree: i32, dim: usize) {
        if dim == 0 {
            self.dims.remove(&degree);
        } else {
            self.dims.insert(degree, dim);
        }
    }

    pub fn add(&mut self, degree: i32, dim: usize) {
        if dim > 0 {
            *self.dims.entry(degree).or_insert(0) += dim;
        }
    }

    pub fn dim(&self, degree: i32) -> usize {
        self.dims.get(&degree).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn total(&self) -> usize {
        self.dims.values().sum()
    }

    /// Alternating sum of dimensions.
    pub fn euler(&self) -> i64 {
        self.dims
            .iter()
            .map(|(&k, &d)| if k.rem_euclid(2) == 0 { d as i64 } else { -(d as i64) })
            .sum()
    }

    /// Shift: `self[s]` places content of degree `n + s` at degree `n`.
    pub fn shifted(&self, s: i32) -> GradedDims {
        let mut g = GradedDims::new();
        for (&k, &d) in &self.dims {
            g.set(k - s, d);
        }
        g
    }

    pub fn merged(&self, other: &GradedDims) -> GradedDims {
        let mut g = self.clone();
        for (&k, &d) in &other.dims {
            g.add(k, d);
        }
        g
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, usize)> + '_ {
        self.dims.iter().map(|(&k, &d)| (k, d))
    }
}

impl Serialize for GradedDims {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        let mut m = ser.serialize_map(Some(self.dims.len()))?;
        for (k, v) in &self.dims {
            m.serialize_entry(&k.to_string(), v)?;
        }
        m.end()
    }
}

impl<'de> Deserialize<'de> for GradedDims {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let raw = BTreeMap::<String, usize>::deserialize(de)?;
        let mut g = GradedDims::new();
        for (k, v) in raw {
            let deg: i32 = k.parse().map_err(serde::de::Error::custom)?;
            g.set(deg, v);
        }
        Ok(g)
    }
}

/// A bounded cochain complex: graded dimensions plus differentials
/// `d_k : C^k -> C^{k+1}` stored as matrices with `dim C^{k+1}` rows.
#[derive(Clone, Debug)]
pub struct ChainComplex<K> {
    dims: BTreeMap<i32, usize>,
    diffs: BTreeMap<i32, Mat<K>>,
}

/// Validation failures for complexes and chain maps.
#[derive(Debug, thiserror::Error)]
pub enum ComplexError {
    #[error("differential at degree {0} has shape {1}x{2}, expected {3}x{4}")]
    Shape(i32, usize, usize, usize, usize),
    #[error("d∘d is nonzero from degree {0}")]
    NotComplex(i32),
    #[error("chain map does not commute with differentials at degree {0}")]
    NotChainMap(i32),
    #[error("chain map component at degree {0} has wrong shape")]
    MapShape(i32),
}

impl<K: Field> ChainComplex<K> {
    /// Build and validate.  Zero-dimensional degrees may be omitted.
    pub fn new(
        dims: BTreeMap<i32, usize>,
        diffs: BTreeMap<i32, Mat<K>>,
    ) -> Result<Self, ComplexError> {
        let dims: BTreeMap<i32, usize> = dims.into_iter().filter(|&(_, d)| d > 0).collect();
        let c = ChainComplex { dims, diffs };
        for (&k, m) in &c.diffs {
            let (rows, cols) = (c.dim(k + 1), c.dim(k));
            if m.rows() != rows || m.cols() != cols {
                return Err(ComplexError::Shape(k, m.rows(), m.cols(), rows, cols));
            }
        }
        for &k in c.diffs.keys() {
            if c.dim(k + 2) > 0 && c.dim(k) > 0 {
                let dd = c.d_at(k + 1).mul(&c.d_at(k));
                if !dd.is_zero_mat() {
                    return Err(ComplexError::NotComplex(k));
                }
            }
        }
        Ok(c)
    }

    pub fn zero() -> Self {
        ChainComplex {
            dims: BTreeMap::new(),
            diffs: BTreeMap::new(),
        }
    }

    /// Complex concentrated in one degree with zero differential.
    pub fn concentrated(degree: i32, dim: usize) -> Self {
        let mut dims = BTreeMap::new();
        if dim > 0 {
            dims.insert(degree, dim);
        }
        ChainComplex {
            dims,
            diffs: BTreeMap::new(),
        }
    }

    pub fn from_graded(g: &GradedDims) -> Self {
        let mut dims = BTreeMap::new();
        for (k, d) in g.iter() {
            dims.insert(k, d);
        }
        ChainComplex {
            dims,
            diffs: BTreeMap::new(),
        }
    }

    pub fn dim(&self, k: i32) -> usize {
        self.dims.get(&k).copied().unwrap_or(0)
    }

    pub fn dims(&self) -> &BTreeMap<i32, usize> {
        &self.dims
    }

    pub fn graded_dims(&self) -> GradedDims {
        let mut g = GradedDims::new();
        for (&k, &d) in &self.dims {
            g.set(k, d);
        }
        g
    }

    /// The differential leaving degree `k`, materialized with correct shape.
    pub fn d_at(&self, k: i32) -> Mat<K> {
        self.diffs
            .get(&k)
            .cloned()
            .unwrap_or_else(|| Mat::zero(self.dim(k + 1), self.dim(k)))
    }

    pub fn degrees(&self) -> Vec<i32> {
        self.dims.keys().copied().collect()
    }

    /// dim H^k = dim C^k - rank d_k - rank d_{k-1}.
    pub fn cohomology(&self) -> GradedDims {
        let mut out = GradedDims::new();
        for (&k, &d) in &self.dims {
            let rk = if self.dim(k + 1) > 0 { self.d_at(k).rank() } else { 0 };
            let rkm1 = if self.dim(k - 1) > 0 {
                self.d_at(k - 1).rank()
            } else {
                0
            };
            out.set(k, d - rk - rkm1);
        }
        out
    }

    pub fn euler(&self) -> i64 {
        self.graded_dims().euler()
    }

    /// Shift: `self.shifted(s)` is `C[s]`, with `C[s]^n = C^{n+s}` and the
    /// differential rescaled by `(-1)^s`.
    pub fn shifted(&self, s: i32) -> ChainComplex<K> {
        let dims = self.dims.iter().map(|(&k, &d)| (k - s, d)).collect();
        let flip = s.rem_euclid(2) == 1;
        let diffs = self
            .diffs
            .iter()
            .map(|(&k, m)| (k - s, if flip { m.neg() } else { m.clone() }))
            .collect();
        ChainComplex { dims, diffs }
    }

    pub fn direct_sum(&self, other: &ChainComplex<K>) -> ChainComplex<K> {
        let mut dims = BTreeMap::new();
        for &k in self.dims.keys().chain(other.dims.keys()) {
            dims.insert(k, self.dim(k) + other.dim(k));
        }
        let mut diffs = BTreeMap::new();
        for &k in dims.keys() {
            let (rows, cols) = (
                dims.get(&(k + 1)).copied().unwrap_or(0),
                dims[&k],
            );
            if rows == 0 || cols == 0 {
                continue;
            }
            let mut m = Mat::zero(rows, cols);
            m.add_block(0, 0, &self.d_at(k));
            m.add_block(self.dim(k + 1), self.dim(k), &other.d_at(k));
            diffs.insert(k, m);
        }
        ChainComplex { dims, diffs }
    }
}

/// A degreewise map of cochain complexes commuting with differentials.
#[derive(Clone, Debug)]
pub struct ChainMap<K> {
    pub src: ChainComplex<K>,
    pub tgt: ChainComplex<K>,
    comps: BTreeMap<i32, Mat<K>>,
}

impl<K: Field> ChainMap<K> {
    pub fn new(
        src: ChainComplex<K>,
        tgt: ChainComplex<K>,
        comps: BTreeMap<i32, Mat<K>>,
    ) -> Result<Self, ComplexError> {
        let f = ChainMap { src, tgt, comps };
        for (&k, m) in &f.comps {
            if m.rows() != f.tgt.dim(k) || m.cols() != f.src.dim(k) {
                return Err(ComplexError::MapShape(k));
            }
        }
        let degrees: Vec<i32> = f.src.degrees();
        for k in degrees {
            if f.tgt.dim(k + 1) == 0 {
                continue;
            }
            let lhs = f.tgt.d_at(k).mul(&f.comp_at(k));
            let rhs = f.comp_at(k + 1).mul(&f.src.d_at(k));
            if lhs != rhs {
                return Err(ComplexError::NotChainMap(k));
            }
        }
        Ok(f)
    }

    pub fn comp_at(&self, k: i32) -> Mat<K> {
        self.comps
            .get(&k)
            .cloned()
            .unwrap_or_else(|| Mat::zero(self.tgt.dim(k), self.src.dim(k)))
    }

    /// Composite `self ∘ inner`.
    pub fn compose(&self, inner: &ChainMap<K>) -> ChainMap<K> {
        let mut comps = BTreeMap::new();
        for &k in inner.src.dims().keys() {
            if self.tgt.dim(k) > 0 {
                comps.insert(k, self.comp_at(k).mul(&inner.comp_at(k)));
            }
        }
        ChainMap {
            src: inner.src.clone(),
            tgt: self.tgt.clone(),
            comps,
        }
    }

    /// Mapping cone: `Cone(f)^k = A^{k+1} ⊕ B^k`, `d(a,b) = (-d a, f a + d b)`.
    pub fn cone(&self) -> ChainComplex<K> {
        let a = &self.src;
        let b = &self.tgt;
        let mut dims = BTreeMap::new();
        let lo = a
            .dims()
            .keys()
            .map(|k| k - 1)
            .chain(b.dims().keys().copied())
            .min();
        let hi = a
            .dims()
            .keys()
            .map(|k| k - 1)
            .chain(b.dims().keys().copied())
            .max();
        let (Some(lo), Some(hi)) = (lo, hi) else {
            return ChainComplex::zero();
        };
        for k in lo..=hi {
            let d = a.dim(k + 1) + b.dim(k);
            if d > 0 {
                dims.insert(k, d);
            }
        }
        let mut diffs = BTreeMap::new();
        for k in lo..hi {
            let rows = a.dim(k + 2) + b.dim(k + 1);
            let cols = a.dim(k + 1) + b.dim(k);
            if rows == 0 || cols == 0 {
                continue;
            }
            let mut m = Mat::zero(rows, cols);
            m.add_block(0, 0, &a.d_at(k + 1).neg());
            m.add_block(a.dim(k + 2), 0, &self.comp_at(k + 1));
            m.add_block(a.dim(k + 2), a.dim(k + 1), &b.d_at(k));
            diffs.insert(k, m);
        }
        ChainComplex { dims, diffs }
    }

    /// Fiber: the cone shifted down one degree, so that
    /// `fiber(A -> 0) ≅ A` and `fiber(0 -> B) ≅ B[-1]`.
    pub fn fiber(&self) -> ChainComplex<K> {
        self.cone().shifted(-1)
    }

    /// Rank of the induced map on degree-`k` cohomology.
    pub fn cohomology_rank(&self, k: i32) -> usize {
        if self.src.dim(k) == 0 || self.tgt.dim(k) == 0 {
            return 0;
        }
        let cocycles = self.src.d_at(k).kernel_basis();
        let mapped = self.comp_at(k).mul(&cocycles);
        let coboundaries = self.tgt.d_at(k - 1);
        if coboundaries.cols() == 0 {
            return mapped.rank();
        }
        mapped.hconcat(&coboundaries).rank() - coboundaries.rank()
    }
}
