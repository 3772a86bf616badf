//! Dyadic time grids and addressing of interior nodes.
//!
//! Node `j` of the depth-`n` grid on `[r, s]` sits at `r + (j / 2^n)(s - r)`.
//! Every interior node first appears at a unique level `m` with an odd index
//! `k`; that `(m, k)` pair is its [`NodeId`]. Noise vectors are laid out level
//! by level, so a depth-`n` vector is a prefix of every deeper one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_DEPTH: u32 = 30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DyadicGrid {
    pub r: f64,
    pub s: f64,
    pub depth: u32,
}

impl DyadicGrid {
    pub fn new(r: f64, s: f64, depth: u32) -> Result<Self> {
        if !(r.is_finite() && s.is_finite()) || r >= s {
            return Err(Error::InvalidDomain(format!("need r < s, got r = {r}, s = {s}")));
        }
        check_depth(depth)?;
        Ok(Self { r, s, depth })
    }

    /// Number of cells, `2^depth`.
    pub fn cells(&self) -> usize {
        1usize << self.depth
    }

    pub fn len(&self) -> usize {
        self.cells() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn time(&self, j: usize) -> f64 {
        dyadic_time(self.r, self.s, j, self.depth)
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.time(j)).collect()
    }

    /// Index of `t` on this grid, if `t` is a grid time up to a relative
    /// tolerance of `1e-12 (s - r)`.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        if !t.is_finite() {
            return None;
        }
        let span = self.s - self.r;
        let x = (t - self.r) / span * self.cells() as f64;
        let j = x.round();
        if j < 0.0 || j > self.cells() as f64 {
            return None;
        }
        let j = j as usize;
        ((self.time(j) - t).abs() <= 1e-12 * span.max(1.0)).then_some(j)
    }

    /// Grid position of `node` at this depth.
    pub fn position(&self, node: NodeId) -> usize {
        debug_assert!(node.level <= self.depth);
        (node.odd_index as usize) << (self.depth - node.level)
    }
}

pub(crate) fn check_depth(depth: u32) -> Result<()> {
    if depth > MAX_DEPTH {
        return Err(Error::DepthOverflow(depth));
    }
    Ok(())
}

/// `r + (j / 2^n)(s - r)`, always in this closed form so that
/// `dyadic_time(r, s, 2j, n + 1) == dyadic_time(r, s, j, n)` bit for bit.
pub fn dyadic_time(r: f64, s: f64, j: usize, depth: u32) -> f64 {
    r + (j as f64 / (1u64 << depth) as f64) * (s - r)
}

pub fn times(grid: &DyadicGrid) -> Vec<f64> {
    grid.times()
}

/// `2^depth - 1`: the dimension of the noise cube at this depth.
pub fn interior_node_count(depth: u32) -> usize {
    (1usize << depth) - 1
}

/// Address of an interior dyadic time: the first level at which it appears,
/// and its (odd) index on that level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId {
    pub level: u32,
    pub odd_index: u64,
}

impl NodeId {
    pub fn new(level: u32, odd_index: u64) -> Result<Self> {
        if level == 0 || level > MAX_DEPTH {
            return Err(Error::InvalidDomain(format!("node level {level} out of range")));
        }
        if odd_index.is_multiple_of(2) || odd_index >= (1u64 << level) {
            return Err(Error::InvalidDomain(format!(
                "node index {odd_index} must be odd and below 2^{level}"
            )));
        }
        Ok(Self { level, odd_index })
    }

    /// The level-1 node at the midpoint of `[r, s]`.
    pub const ROOT: NodeId = NodeId {
        level: 1,
        odd_index: 1,
    };

    pub fn time(&self, r: f64, s: f64) -> f64 {
        dyadic_time(r, s, self.odd_index as usize, self.level)
    }

    /// Position in a level-ordered noise vector.
    pub fn flat_index(&self) -> usize {
        ((1usize << (self.level - 1)) - 1) + (self.odd_index as usize - 1) / 2
    }

    pub fn from_flat_index(i: usize) -> Self {
        let level = usize::BITS - (i + 1).leading_zeros();
        let first = (1usize << (level - 1)) - 1;
        NodeId {
            level,
            odd_index: (2 * (i - first) + 1) as u64,
        }
    }

    /// Node with the same level whose time is mirrored about the midpoint.
    pub fn mirrored(&self) -> Self {
        NodeId {
            level: self.level,
            odd_index: (1u64 << self.level) - self.odd_index,
        }
    }
}

/// Endpoint of the bracketing cell of a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bracket {
    Left,
    Right,
    Node(NodeId),
}

/// Level-`(m-1)` grid points bracketing `node`, reduced to their own first
/// appearance (or to the boundary markers for `r` and `s`).
pub fn parent_endpoints(node: NodeId) -> (Bracket, Bracket) {
    let level = node.level;
    let resolve = |j: u64| -> Bracket {
        if j == 0 {
            return Bracket::Left;
        }
        if j == 1u64 << level {
            return Bracket::Right;
        }
        let tz = j.trailing_zeros();
        Bracket::Node(NodeId {
            level: level - tz,
            odd_index: j >> tz,
        })
    };
    (resolve(node.odd_index - 1), resolve(node.odd_index + 1))
}

/// All interior nodes up to `depth`, in noise-vector order.
pub fn nodes(depth: u32) -> impl Iterator<Item = NodeId> {
    (0..interior_node_count(depth)).map(NodeId::from_flat_index)
}
