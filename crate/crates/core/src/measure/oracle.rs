//! Brute-force quadrature of cylinder probabilities over the noise cube.
//!
//! The probability of an event is the volume of its preimage in
//! `[0, 1]^(2^depth - 1)`. This module integrates that indicator with the
//! tensor midpoint rule, at `m` and `m / 2` points per axis, and reports the
//! difference as an error indicator. It uses no random numbers.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bridge::build_values_into;
use crate::error::{Error, Result};
use crate::geometry::BridgeSpec;
use crate::grid::interior_node_count;
use crate::measure::event::{CylinderEvent, Domain};
use crate::selectors::AffineBridge;

pub const MAX_ORACLE_DEPTH: u32 = 4;

/// Upper bound on integrand evaluations per refinement level.
pub const MAX_ORACLE_POINTS: u128 = 1 << 31;

/// `error_indicator` is `|Q_m - Q_{m/2}|`. The integrand is an indicator, so
/// the rule converges roughly like `1/m` with grid-dependent oscillation and
/// the two levels can agree by accident; treat it as a heuristic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub value: f64,
    pub grid_points_per_dim: usize,
    pub error_indicator: f64,
}

/// Midpoint-rule volume of the event's preimage under the affine bridge map.
pub fn oracle_probability(
    spec: &BridgeSpec,
    event: &CylinderEvent,
    depth: u32,
    grid_points_per_dim: usize,
) -> Result<OracleResult> {
    spec.validate()?;
    let dim = interior_node_count(depth);
    let points = grid_points_per_dim.max(1);
    if depth > MAX_ORACLE_DEPTH || (points as u128).saturating_pow(dim as u32) > MAX_ORACLE_POINTS {
        return Err(Error::DimensionTooLarge { dim, points });
    }
    let resolved = event.resolve(&Domain::Bridge(*spec), depth)?;
    if event.is_empty_set() {
        return Ok(OracleResult {
            value: 0.0,
            grid_points_per_dim: points,
            error_indicator: 0.0,
        });
    }
    let integrate = |m: usize| -> f64 {
        if dim == 0 {
            return if resolved.holds_on_values(&[spec.a, spec.b]) { 1.0 } else { 0.0 };
        }
        let hits: u64 = (0..m)
            .into_par_iter()
            .map(|outer| {
                let mut idx = vec![0usize; dim];
                idx[0] = outer;
                let mut noise = vec![0.0; dim];
                let mut values = vec![0.0; (1usize << depth) + 1];
                let mut hits = 0u64;
                loop {
                    for (w, &i) in noise.iter_mut().zip(&idx) {
                        *w = (i as f64 + 0.5) / m as f64;
                    }
                    build_values_into(spec, &noise, depth, &AffineBridge, &mut values);
                    hits += u64::from(resolved.holds_on_values(&values));
                    // odometer over axes 1..dim
                    let mut axis = dim - 1;
                    loop {
                        if axis == 0 {
                            return hits;
                        }
                        idx[axis] += 1;
                        if idx[axis] < m {
                            break;
                        }
                        idx[axis] = 0;
                        axis -= 1;
                    }
                }
            })
            .sum();
        hits as f64 / (m as f64).powi(dim as i32)
    };
    let fine = integrate(points);
    let coarse = integrate((points / 2).max(1));
    Ok(OracleResult {
        value: fine,
        grid_points_per_dim: points,
        error_indicator: (fine - coarse).abs(),
    })
}
