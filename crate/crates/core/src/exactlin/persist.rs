//! Interval decomposition of a finite one-directional diagram of complexes
//!
//! ```text
//! V_0 <- V_1 <- ... <- V_{n-1}
//! ```
//!
//! On each cohomological degree the diagram of vector spaces decomposes into
//! interval summands; multiplicities are recovered from ranks of composite
//! maps by inclusion–exclusion:
//!
//! ```text
//! mult([i, j]) = r(i,j) - r(i-1,j) - r(i,j+1) + r(i-1,j+1)
//! ```
//!
//! where `r(i,j)` is the rank of `H(V_j) -> H(V_i)` (and `r(i,i) = dim H(V_i)`,
//! out-of-range entries zero).

use std::collections::BTreeSet;

use super::{ChainComplex, ChainMap, Field};

/// An interval summand `[start, end]` (inclusive sample indices) in one
/// cohomological degree, with multiplicity.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct IntervalSummand {
    pub degree: i32,
    pub start: usize,
    pub end: usize,
    pub mult: usize,
}

/// Decompose the diagram `complexes[0] <- complexes[1] <- ...` where
/// `maps[i] : complexes[i+1] -> complexes[i]`.  Returns summands sorted by
/// `(degree, start, end)`.
pub fn interval_decompose<K: Field>(
    complexes: &[ChainComplex<K>],
    maps: &[ChainMap<K>],
) -> Vec<IntervalSummand> {
    let n = complexes.len();
    assert_eq!(maps.len() + 1, n, "need one map per adjacent pair");
    if n == 0 {
        return Vec::new();
    }

    // Composites: comp[i][j] = map from complexes[j] down to complexes[i], i < j.
    // comp[i][j] = maps[i] ∘ maps[i+1] ∘ ... ∘ maps[j-1].
    let mut composites: Vec<Vec<Option<ChainMap<K>>>> = vec![vec![None; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let m = if j == i + 1 {
                maps[i].clone()
            } else {
                composites[i][j - 1].as_ref().unwrap().compose(&maps[j - 1])
            };
            composites[i][j] = Some(m);
        }
    }

    let degrees: BTreeSet<i32> = complexes
        .iter()
        .flat_map(|c| c.degrees())
        .collect();

    let mut out = Vec::new();
    for &deg in &degrees {
        let h: Vec<usize> = complexes.iter().map(|c| c.cohomology().dim(deg)).collect();
        // r(i, j) with sentinel handling via closure.
        let r = |i: isize, j: usize| -> usize {
            if i < 0 || j >= n {
                return 0;
            }
            let i = i as usize;
            if i == j {
                h[i]
            } else {
                composites[i][j].as_ref().unwrap().cohomology_rank(deg)
            }
        };
        for i in 0..n {
            for j in i..n {
                let m = r(i as isize, j) + r(i as isize - 1, j + 1);
                let s = r(i as isize - 1, j) + r(i as isize, j + 1);
                if m > s {
                    out.push(IntervalSummand {
                        degree: deg,
                        start: i,
                        end: j,
                        mult: m - s,
                    });
                }
            }
        }
    }
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactlin::Mat;
    use crate::Rat;

    fn pt(dim: usize) -> ChainComplex<Rat> {
        ChainComplex::concentrated(0, dim)
    }

    fn map0(src: &ChainComplex<Rat>, tgt: &ChainComplex<Rat>, m: Mat<Rat>) -> ChainMap<Rat> {
        ChainMap::new(src.clone(), tgt.clone(), [(0, m)].into_iter().collect()).unwrap()
    }

    /// Diagram k <-id- k <-0- k decomposes as [0,1] + [2,2].
    #[test]
    fn two_intervals() {
        let cs = vec![pt(1), pt(1), pt(1)];
        let maps = vec![
            map0(&cs[1], &cs[0], Mat::identity(1)),
            map0(&cs[2], &cs[1], Mat::zero(1, 1)),
        ];
        let got = interval_decompose(&cs, &maps);
        assert_eq!(
            got,
            vec![
                IntervalSummand { degree: 0, start: 0, end: 1, mult: 1 },
                IntervalSummand { degree: 0, start: 2, end: 2, mult: 1 },
            ]
        );
    }

    /// k^2 <-[1 1]- k^2 <-diag- k^2 : by hand this is [0,2] + [1,2] ... check
    /// via ranks: r(0,1)=1, r(1,2)=2, r(0,2)=rank([1 1]·I)=1.
    /// mult[0,0]= h0 - r(0,1) = 1; mult[0,1]=r(0,1)-r(0,2)... inclusion-
    /// exclusion: [0,2]:1, [1,2]:1, [0,0]:1.
    #[test]
    fn rank_one_then_iso() {
        let cs = vec![pt(2), pt(2), pt(2)];
        let m01 = Mat::from_rows(vec![
            vec![crate::rat(1), crate::rat(1)],
            vec![crate::rat(0), crate::rat(0)],
        ]);
        let maps = vec![
            map0(&cs[1], &cs[0], m01),
            map0(&cs[2], &cs[1], Mat::identity(2)),
        ];
        let got = interval_decompose(&cs, &maps);
        assert_eq!(
            got,
            vec![
                IntervalSummand { degree: 0, start: 0, end: 0, mult: 1 },
                IntervalSummand { degree: 0, start: 0, end: 2, mult: 1 },
                IntervalSummand { degree: 0, start: 1, end: 2, mult: 1 },
            ]
        );
    }

    /// Total multiplicity through each index equals dim H there.
    #[test]
    fn multiplicities_cover_dims() {
        let cs = vec![pt(3), pt(2), pt(2), pt(1)];
        let m10 = Mat::from_rows(vec![
            vec![crate::rat(1), crate::rat(0)],
            vec![crate::rat(0), crate::rat(1)],
            vec![crate::rat(0), crate::rat(0)],
        ]);
        let m21 = Mat::from_rows(vec![
            vec![crate::rat(1), crate::rat(1)],
            vec![crate::rat(0), crate::rat(0)],
        ]);
        let m32 = Mat::from_rows(vec![vec![crate::rat(2)], vec![crate::rat(3)]]);
        let maps = vec![
            map0(&cs[1], &cs[0], m10),
            map0(&cs[2], &cs[1], m21),
            map0(&cs[3], &cs[2], m32),
        ];
        let got = interval_decompose(&cs, &maps);
        for idx in 0..cs.len() {
            let total: usize = got
                .iter()
                .filter(|s| s.degree == 0 && s.start <= idx && idx <= s.end)
                .map(|s| s.mult)
                .sum();
            assert_eq!(total, cs[idx].cohomology().dim(0), "at index {idx}");
        }
    }

    /// A diagram living in two degrees keeps the degrees separate.
    #[test]
    fn degreewise_separation() {
        let a = pt(1).direct_sum(&ChainComplex::concentrated(1, 1));
        let b = pt(1);
        let f = ChainMap::new(
            b.clone(),
            a.clone(),
            [(0, Mat::identity(1))].into_iter().collect(),
        )
        .unwrap();
        let got = interval_decompose(&[a, b], &[f]);
        assert_eq!(
            got,
            vec![
                IntervalSummand { degree: 0, start: 0, end: 1, mult: 1 },
                IntervalSummand { degree: 1, start: 0, end: 0, mult: 1 },
            ]
        );
    }
}
