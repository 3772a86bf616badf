//! Recursive midpoint construction of pinned Lipschitz paths.
//!
//! Starting from the pinned endpoints, each level fills the odd grid nodes:
//! the value at a new node is chosen by the selector from the admissible
//! interval of the cell formed by its two already-known neighbours. Values at
//! even nodes are inherited unchanged, so a deeper build always restricts to
//! the shallower one exactly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{midpoint_interval_raw, BridgeSpec};
use crate::grid::{check_depth, dyadic_time, interior_node_count, DyadicGrid, NodeId};
use crate::selectors::{BridgeSelector, INVERSION_RTOL};

/// Point of the noise cube `[0, 1]^(2^depth - 1)`, ordered level by level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseVector {
    depth: u32,
    values: Vec<f64>,
}

impl NoiseVector {
    pub fn new(depth: u32, values: Vec<f64>) -> Result<Self> {
        check_depth(depth)?;
        let expected = interior_node_count(depth);
        if values.len() != expected {
            return Err(Error::InvalidDomain(format!(
                "depth-{depth} noise needs {expected} components, got {}",
                values.len()
            )));
        }
        if let Some(&bad) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::NoiseOutOfRange(bad));
        }
        Ok(Self { depth, values })
    }

    pub fn constant(depth: u32, value: f64) -> Result<Self> {
        check_depth(depth)?;
        Self::new(depth, vec![value; interior_node_count(depth)])
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, node: NodeId) -> f64 {
        self.values[node.flat_index()]
    }

    /// Components introduced at `level` (`2^(level-1)` of them, by odd index).
    pub fn level(&self, level: u32) -> &[f64] {
        let start = (1usize << (level - 1)) - 1;
        &self.values[start..start + (1usize << (level - 1))]
    }

    /// Appends one more level of components.
    pub fn extended(&self, extension: &[f64]) -> Result<Self> {
        let mut values = self.values.clone();
        values.extend_from_slice(extension);
        Self::new(self.depth + 1, values)
    }

    /// Restriction to the first `depth` levels.
    pub fn truncated(&self, depth: u32) -> Result<Self> {
        if depth > self.depth {
            return Err(Error::DepthMismatch {
                expected: self.depth,
                actual: depth,
            });
        }
        Ok(Self {
            depth,
            values: self.values[..interior_node_count(depth)].to_vec(),
        })
    }

    /// Noise for the time-reversed path: node `(m, k)` swaps with `(m, 2^m - k)`.
    pub fn mirrored(&self) -> Self {
        let values = (0..self.values.len())
            .map(|i| self.values[NodeId::from_flat_index(i).mirrored().flat_index()])
            .collect();
        Self {
            depth: self.depth,
            values,
        }
    }
}

/// Path values on the depth-`n` dyadic grid of `[r, s]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPath {
    pub r: f64,
    pub s: f64,
    pub c: f64,
    pub depth: u32,
    pub values: Vec<f64>,
}

impl GridPath {
    pub fn grid(&self) -> DyadicGrid {
        DyadicGrid {
            r: self.r,
            s: self.s,
            depth: self.depth,
        }
    }

    pub fn time(&self, j: usize) -> f64 {
        dyadic_time(self.r, self.s, j, self.depth)
    }

    pub fn times(&self) -> Vec<f64> {
        self.grid().times()
    }

    pub fn first(&self) -> f64 {
        self.values[0]
    }

    pub fn last(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Value at a grid time, if `t` is on this grid.
    pub fn value_at(&self, t: f64) -> Option<f64> {
        self.grid().index_of(t).map(|j| self.values[j])
    }

    /// Restriction to the coarser depth-`depth` grid.
    pub fn restricted(&self, depth: u32) -> Result<GridPath> {
        if depth > self.depth {
            return Err(Error::DepthMismatch {
                expected: self.depth,
                actual: depth,
            });
        }
        let stride = 1usize << (self.depth - depth);
        Ok(GridPath {
            depth,
            values: self.values.iter().step_by(stride).copied().collect(),
            ..*self
        })
    }

    /// Largest value of `|x(v) - x(u)| - c|v - u|` over all pairs of grid
    /// points. Nonpositive for a Lipschitz path. Linear time: the maximum of
    /// `g(v) - g(u)` over `u < v` for `g = x - c t` (and `x + c t` for the
    /// other sign) is found with a running extremum.
    pub fn max_lipschitz_violation(&self) -> f64 {
        max_lipschitz_violation(&self.times(), &self.values, self.c)
    }

    pub(crate) fn check_shape(&self) -> Result<()> {
        DyadicGrid::new(self.r, self.s, self.depth)?;
        if self.values.len() != (1usize << self.depth) + 1 {
            return Err(Error::InvalidDomain(format!(
                "depth-{} path needs {} values, got {}",
                self.depth,
                (1usize << self.depth) + 1,
                self.values.len()
            )));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidDomain(format!("c = {} must be > 0", self.c)));
        }
        Ok(())
    }
}

/// See [`GridPath::max_lipschitz_violation`]; `times` must be increasing.
pub fn max_lipschitz_violation(times: &[f64], values: &[f64], c: f64) -> f64 {
    debug_assert_eq!(times.len(), values.len());
    let Some(&origin) = times.first() else {
        return f64::NEG_INFINITY;
    };
    let mut worst = f64::NEG_INFINITY;
    let mut min_down = f64::INFINITY;
    let mut max_up = f64::NEG_INFINITY;
    for (&t, &x) in times.iter().zip(values) {
        let ct = c * (t - origin);
        let down = x - ct;
        let up = x + ct;
        worst = worst.max(down - min_down).max(max_up - up);
        min_down = min_down.min(down);
        max_up = max_up.max(up);
    }
    worst
}

/// Cone bounds for any Lipschitz extension of a grid path at an off-grid time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Enclosure {
    pub lower: f64,
    pub upper: f64,
}

impl Enclosure {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains_within(&self, x: f64, tol: f64) -> bool {
        self.lower - tol <= x && x <= self.upper + tol
    }
}

#[allow(clippy::too_many_arguments)]
fn fill_level<S: BridgeSelector + ?Sized>(
    values: &mut [f64],
    r: f64,
    s: f64,
    c: f64,
    depth: u32,
    level: u32,
    noise: &[f64],
    selector: &S,
) {
    let step = 1usize << (depth - level);
    for (i, &xi) in noise.iter().enumerate() {
        let pos = (2 * i + 1) * step;
        let (left, right) = (pos - step, pos + step);
        let sub = BridgeSpec::unchecked(
            dyadic_time(r, s, left, depth),
            dyadic_time(r, s, right, depth),
            values[left],
            values[right],
            c,
        );
        values[pos] = selector.select(&sub, xi);
    }
}

/// Writes the depth-`depth` grid values into `out` from level-ordered noise.
/// No validation; `spec` must be feasible and the slices correctly sized.
pub(crate) fn build_values_into<S: BridgeSelector + ?Sized>(
    spec: &BridgeSpec,
    noise: &[f64],
    depth: u32,
    selector: &S,
    out: &mut [f64],
) {
    let cells = 1usize << depth;
    out[0] = spec.a;
    out[cells] = spec.b;
    for level in 1..=depth {
        let start = (1usize << (level - 1)) - 1;
        let count = 1usize << (level - 1);
        fill_level(
            out,
            spec.r,
            spec.s,
            spec.c,
            depth,
            level,
            &noise[start..start + count],
            selector,
        );
    }
}

/// Builds the depth-`n` grid path determined by `spec` and `noise` (where
/// `n = noise.depth()`).
pub fn build_bridge<S: BridgeSelector + ?Sized>(
    spec: &BridgeSpec,
    noise: &NoiseVector,
    selector: &S,
) -> Result<GridPath> {
    spec.validate()?;
    let depth = noise.depth();
    let mut values = vec![0.0; (1usize << depth) + 1];
    build_values_into(spec, noise.values(), depth, selector, &mut values);
    Ok(GridPath {
        r: spec.r,
        s: spec.s,
        c: spec.c,
        depth,
        values,
    })
}

/// One more level of refinement: copies the existing values to the even
/// nodes of the finer grid and fills the new odd nodes from `extension`.
pub fn refine<S: BridgeSelector + ?Sized>(
    spec: &BridgeSpec,
    path: &GridPath,
    extension: &[f64],
    selector: &S,
) -> Result<GridPath> {
    path.check_shape()?;
    check_matches(spec, path)?;
    let depth = path.depth + 1;
    check_depth(depth)?;
    let fresh = 1usize << path.depth;
    if extension.len() != fresh {
        return Err(Error::DepthMismatch {
            expected: path.depth,
            actual: depth_of_len(extension.len()),
        });
    }
    if let Some(&bad) = extension.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::NoiseOutOfRange(bad));
    }
    let mut values = vec![0.0; 2 * fresh + 1];
    for (j, &v) in path.values.iter().enumerate() {
        values[2 * j] = v;
    }
    fill_level(
        &mut values,
        spec.r,
        spec.s,
        spec.c,
        depth,
        depth,
        extension,
        selector,
    );
    Ok(GridPath {
        depth,
        values,
        ..*path
    })
}

fn depth_of_len(len: usize) -> u32 {
    len.checked_ilog2().unwrap_or(0)
}

fn check_matches(spec: &BridgeSpec, path: &GridPath) -> Result<()> {
    if path.r != spec.r || path.s != spec.s || path.c != spec.c {
        return Err(Error::InvalidDomain(format!(
            "path on [{}, {}] with c = {} does not match spec on [{}, {}] with c = {}",
            path.r, path.s, path.c, spec.r, spec.s, spec.c
        )));
    }
    Ok(())
}

/// Recovers noise that rebuilds `path` under `selector`.
///
/// Each odd node's value is mapped back through the selector for the cell of
/// its two neighbours. Values outside their admissible interval by at most
/// `1e-9 max(1, c(s - r))` are snapped onto it; anything further is rejected.
pub fn invert_bridge<S: BridgeSelector + ?Sized>(
    path: &GridPath,
    spec: &BridgeSpec,
    selector: &S,
) -> Result<NoiseVector> {
    spec.validate()?;
    path.check_shape()?;
    check_matches(spec, path)?;
    let tol = INVERSION_RTOL * spec.reach().max(1.0);
    for (j, expected) in [(0, spec.a), (path.values.len() - 1, spec.b)] {
        if (path.values[j] - expected).abs() > tol {
            return Err(Error::PathViolatesLipschitz {
                t: path.time(j),
                value: path.values[j],
                lo: expected,
                hi: expected,
            });
        }
    }
    let depth = path.depth;
    let mut noise = Vec::with_capacity(interior_node_count(depth));
    for level in 1..=depth {
        let step = 1usize << (depth - level);
        for k in (1..(1usize << level)).step_by(2) {
            let pos = k * step;
            let (left, right) = (pos - step, pos + step);
            let lv = if left == 0 { spec.a } else { path.values[left] };
            let rv = if right == path.values.len() - 1 {
                spec.b
            } else {
                path.values[right]
            };
            let sub = BridgeSpec::unchecked(path.time(left), path.time(right), lv, rv, spec.c);
            let interval = midpoint_interval_raw(&sub);
            let d = path.values[pos];
            if !interval.contains_within(d, tol) {
                return Err(Error::PathViolatesLipschitz {
                    t: path.time(pos),
                    value: d,
                    lo: interval.lo,
                    hi: interval.hi,
                });
            }
            noise.push(selector.preimage(&sub, interval.clamp(d)).clamp(0.0, 1.0));
        }
    }
    NoiseVector::new(depth, noise)
}

/// Bounds on the value at `t` of every Lipschitz path through the grid values.
pub fn enclosure_at(path: &GridPath, t: f64) -> Result<Enclosure> {
    path.check_shape()?;
    if !(path.r <= t && t <= path.s) {
        return Err(Error::TimeOutOfRange {
            t,
            lo: path.r,
            hi: path.s,
        });
    }
    if let Some(j) = path.grid().index_of(t) {
        let v = path.values[j];
        return Ok(Enclosure { lower: v, upper: v });
    }
    let cells = 1usize << path.depth;
    let cell = ((t - path.r) / (path.s - path.r) * cells as f64).floor() as usize;
    let j = cell.min(cells - 1);
    let (t0, t1) = (path.time(j), path.time(j + 1));
    let (x0, x1) = (path.values[j], path.values[j + 1]);
    let c = path.c;
    let lower = (x0 - c * (t - t0)).max(x1 - c * (t1 - t));
    let upper = (x0 + c * (t - t0)).min(x1 + c * (t1 - t));
    Ok(Enclosure {
        lower: lower.min(upper),
        upper: upper.max(lower),
    })
}
