//! Arrangements of finitely many points on the rational line.
//!
//! Cells are laid out left to right and interleaved: interval, vertex,
//! interval, ..., vertex, interval.  With `n` breakpoints, cell `2j` is the
//! open interval between breakpoints `j-1` and `j` (unbounded at the outer
//! ends) and cell `2j+1` is breakpoint `j`.  Incidence signs orient the line
//! rightward: a vertex enters its left interval with `+1` (head) and its
//! right interval with `-1` (tail).

use crate::{rat, ratq, Rat};

#[derive(Clone, Debug)]
pub struct Cell1D {
    pub dim: u8,
    pub sample: Rat,
    /// Exact coordinate for vertices.
    pub point: Option<Rat>,
    pub bounded: bool,
}

#[derive(Clone, Debug)]
pub struct Arrangement1D {
    breaks: Vec<Rat>,
    cells: Vec<Cell1D>,
}

impl Arrangement1D {
    pub fn build(breaks_in: &[Rat]) -> Arrangement1D {
        let mut breaks = breaks_in.to_vec();
        breaks.sort();
        breaks.dedup();
        let n = breaks.len();
        let mut cells = Vec::with_capacity(2 * n + 1);
        for j in 0..=n {
            let (sample, bounded) = if n == 0 {
                (rat(0), false)
            } else if j == 0 {
                (&breaks[0] - rat(1), false)
            } else if j == n {
                (&breaks[n - 1] + rat(1), false)
            } else {
                ((&breaks[j - 1] + &breaks[j]) * ratq(1, 2), true)
            };
            cells.push(Cell1D {
                dim: 1,
                sample,
                point: None,
                bounded,
            });
            if j < n {
                cells.push(Cell1D {
                    dim: 0,
                    sample: breaks[j].clone(),
                    point: Some(breaks[j].clone()),
                    bounded: true,
                });
            }
        }
        Arrangement1D { breaks, cells }
    }

    pub fn breaks(&self) -> &[Rat] {
        &self.breaks
    }

    pub fn cells(&self) -> &[Cell1D] {
        &self.cells
    }

    pub fn cell(&self, i: usize) -> &Cell1D {
        &self.cells[i]
    }

    pub fn num_breaks(&self) -> usize {
        self.breaks.len()
    }

    /// Covering pairs `(vertex, interval, sign)`.
    pub fn covers(&self) -> Vec<(usize, usize, i8)> {
        let mut out = Vec::new();
        for j in 0..self.breaks.len() {
            out.push((2 * j + 1, 2 * j, 1));
            out.push((2 * j + 1, 2 * j + 2, -1));
        }
        out
    }

    pub fn leq(&self, x: usize, y: usize) -> bool {
        x == y || (x % 2 == 1 && (y + 1 == x || y == x + 1))
    }

    pub fn star(&self, i: usize) -> Vec<usize> {
        (0..self.cells.len()).filter(|&j| self.leq(i, j)).collect()
    }

    pub fn closure(&self, i: usize) -> Vec<usize> {
        (0..self.cells.len()).filter(|&j| self.leq(j, i)).collect()
    }

    pub fn locate(&self, t: &Rat) -> usize {
        match self.breaks.binary_search(t) {
            Ok(j) => 2 * j + 1,
            Err(j) => 2 * j,
        }
    }

    pub fn is_order_convex(&self, set: &std::collections::BTreeSet<usize>) -> bool {
        // Only nontrivial chains are vertex < interval, so order-convexity
        // can only fail on... x <= y <= z forces y = x or y = z; always holds.
        let _ = set;
        true
    }

    /// Refine by extra breakpoints; returns the map new cell -> old cell.
    pub fn with_breaks(&self, extra: &[Rat]) -> (Arrangement1D, Vec<usize>) {
        let mut all = self.breaks.clone();
        all.extend_from_slice(extra);
        let fine = Arrangement1D::build(&all);
        let map = fine
            .cells
            .iter()
            .map(|c| self.locate(&c.sample))
            .collect();
        (fine, map)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_and_locate() {
        let arr = Arrangement1D::build(&[rat(1), rat(0), rat(1)]);
        assert_eq!(arr.num_breaks(), 2);
        assert_eq!(arr.cells().len(), 5);
        assert_eq!(arr.locate(&rat(0)), 1);
        assert_eq!(arr.locate(&rat(1)), 3);
        assert_eq!(arr.locate(&ratq(1, 2)), 2);
        assert_eq!(arr.locate(&rat(-5)), 0);
        assert_eq!(arr.locate(&rat(5)), 4);
        for (i, c) in arr.cells().iter().enumerate() {
            assert_eq!(arr.locate(&c.sample), i);
        }
    }

    #[test]
    fn empty_line() {
        let arr = Arrangement1D::build(&[]);
        assert_eq!(arr.cells().len(), 1);
        assert_eq!(arr.locate(&rat(42)), 0);
        assert!(!arr.cell(0).bounded);
    }

    #[test]
    fn covers_orientation() {
        let arr = Arrangement1D::build(&[rat(0)]);
        // v_0 is the head (+1) of the left interval and tail (-1) of the right.
        assert_eq!(arr.covers(), vec![(1, 0, 1), (1, 2, -1)]);
    }

    #[test]
    fn refinement() {
        let arr = Arrangement1D::build(&[rat(0), rat(2)]);
        let (fine, map) = arr.with_breaks(&[rat(1)]);
        assert_eq!(fine.cells().len(), 7);
        for (new_idx, &old_idx) in map.iter().enumerate() {
            assert_eq!(arr.locate(&fine.cell(new_idx).sample), old_idx);
        }
    }
}
