//! Hypercube arrangements of variable indices and their axis-parallel lines.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::ReductionError;
use crate::rng::{purpose, substream};

/// Smallest `side` with `side^dim >= m`.
pub fn side_length(m: usize, dim: usize) -> usize {
    if m <= 1 {
        return m;
    }
    let mut side = (m as f64).powf(1.0 / dim as f64).ceil() as usize;
    while side > 1 && pow(side - 1, dim) >= m {
        side -= 1;
    }
    while pow(side, dim) < m {
        side += 1;
    }
    side
}

fn pow(base: usize, exp: usize) -> usize {
    base.checked_pow(exp as u32).unwrap_or(usize::MAX)
}

/// Smallest dimension (at least 2) whose hypercube holding `d` indices has
/// side no greater than `max_side`.
pub fn initial_dimension(d: usize, max_side: usize) -> usize {
    let max_side = max_side.max(2);
    let mut dim = 2;
    while side_length(d, dim) > max_side {
        dim += 1;
    }
    dim
}

/// Variable indices placed in the cells of a `dim`-dimensional hypercube.
/// Cells are stored in row-major order (last coordinate fastest).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypercubeArrangement {
    pub dim: usize,
    pub side: usize,
    pub cells: Vec<Option<usize>>,
    pub seed: u64,
}

impl HypercubeArrangement {
    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_empty(&self) -> usize {
        self.cells.iter().filter(|c| c.is_none()).count()
    }

    pub fn coords(&self, cell: usize) -> Vec<usize> {
        let mut c = vec![0; self.dim];
        let mut rest = cell;
        for k in (0..self.dim).rev() {
            c[k] = rest % self.side;
            rest /= self.side;
        }
        c
    }

    fn stride(&self, axis: usize) -> usize {
        pow(self.side, self.dim - 1 - axis)
    }

    /// Every non-empty axis-parallel fiber, axis by axis; within an axis,
    /// fibers are ordered by their starting cell. Singleton fibers included.
    pub fn fibers(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        for axis in 0..self.dim {
            let stride = self.stride(axis);
            for start in 0..self.n_cells() {
                if !(start / stride).is_multiple_of(self.side) {
                    continue;
                }
                let line: Vec<usize> =
                    (0..self.side).filter_map(|step| self.cells[start + step * stride]).collect();
                if !line.is_empty() {
                    out.push(line);
                }
            }
        }
        out
    }
}

/// Place `indices` in a hypercube of dimension `dim` by a seeded uniform
/// permutation, filling cells in row-major order; trailing cells stay empty.
pub fn arrange_hypercube(indices: &[usize], dim: usize, seed: u64) -> Result<HypercubeArrangement, ReductionError> {
    if indices.len() < 2 {
        return Err(ReductionError::TooFewIndices(indices.len()));
    }
    if dim < 2 {
        return Err(ReductionError::InvalidDimension(dim));
    }
    let side = side_length(indices.len(), dim);
    let mut shuffled = indices.to_vec();
    shuffled.shuffle(&mut substream(seed, &[purpose::ARRANGEMENT]));
    let mut cells: Vec<Option<usize>> = shuffled.into_iter().map(Some).collect();
    cells.resize(pow(side, dim), None);
    Ok(HypercubeArrangement { dim, side, cells, seed })
}

/// The lines of variables analysed together: axis-parallel fibers holding at
/// least two variables.
pub fn traversal_lines(arr: &HypercubeArrangement) -> Vec<Vec<usize>> {
    arr.fibers().into_iter().filter(|l| l.len() >= 2).collect()
}
