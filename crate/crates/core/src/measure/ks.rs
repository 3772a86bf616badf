//! Kolmogorov-Smirnov checks that the affine selectors realise uniform laws.

use rayon::prelude::*;

use crate::bridge::{build_bridge, invert_bridge};
use crate::error::{Error, Result};
use crate::geometry::{midpoint_interval, midpoint_interval_raw, BridgeSpec};
use crate::grid::{parent_endpoints, Bracket, DyadicGrid, NodeId};
use crate::measure::sampling::{draw_rng, sample_noise};
use crate::selectors::AffineBridge;

/// One-sample KS distance `sup |F_n - F|` of `samples` against `cdf`.
pub fn ks_distance<F: Fn(f64) -> f64>(mut samples: Vec<f64>, cdf: F) -> f64 {
    samples.sort_unstable_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples.iter().enumerate().fold(0.0, |acc: f64, (i, &x)| {
        let f = cdf(x);
        acc.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n)
    })
}

/// Asymptotic 1% critical value of the one-sample KS distance.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.63 / (n as f64).sqrt()
}

pub fn uniform_cdf(lo: f64, hi: f64) -> impl Fn(f64) -> f64 {
    move |x| ((x - lo) / (hi - lo)).clamp(0.0, 1.0)
}

/// KS distance between the sampled midpoint value `x((r + s) / 2)` and the
/// uniform law on the midpoint interval.
///
/// Only the level-1 node has a fixed interval; deeper nodes have random
/// parents and are covered by [`recovered_noise_ks`].
pub fn marginal_ks_check(spec: &BridgeSpec, node: NodeId, n_samples: u64, seed: u64) -> Result<f64> {
    if node != NodeId::ROOT {
        return Err(Error::InvalidDomain(format!(
            "the unconditional marginal is uniform only at the level-1 node, not {node:?}"
        )));
    }
    let interval = midpoint_interval(spec)?;
    if interval.is_degenerate() {
        return Err(Error::DegenerateInterval);
    }
    let samples = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let noise = sample_noise(1, &mut draw_rng(seed, i))?;
            Ok(build_bridge(spec, &noise, &AffineBridge)?.values[1])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ks_distance(samples, uniform_cdf(interval.lo, interval.hi)))
}

/// KS distance of the noise component recovered at `node` by inverting
/// sampled depth-`depth` paths, against Uniform[0, 1]. Draws where the node's
/// interval is degenerate (noise not recoverable) are skipped. Returns the
/// distance and the number of draws used.
pub fn recovered_noise_ks(
    spec: &BridgeSpec,
    node: NodeId,
    depth: u32,
    n_samples: u64,
    seed: u64,
) -> Result<(f64, usize)> {
    spec.validate()?;
    if node.level > depth {
        return Err(Error::DepthMismatch {
            expected: depth,
            actual: node.level,
        });
    }
    let grid = DyadicGrid::new(spec.r, spec.s, depth)?;
    let pos = grid.position(node);
    let locate = |b: Bracket| match b {
        Bracket::Left => 0,
        Bracket::Right => grid.cells(),
        Bracket::Node(n) => grid.position(n),
    };
    let (left, right) = parent_endpoints(node);
    let (left, right) = (locate(left), locate(right));
    let recovered = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let path = build_bridge(spec, &sample_noise(depth, &mut draw_rng(seed, i))?, &AffineBridge)?;
            let sub = BridgeSpec::unchecked(
                grid.time(left),
                grid.time(right),
                path.values[left],
                path.values[right],
                spec.c,
            );
            if midpoint_interval_raw(&sub).is_degenerate() {
                return Ok(None);
            }
            debug_assert!(pos > left && pos < right);
            Ok(Some(invert_bridge(&path, spec, &AffineBridge)?.get(node)))
        })
        .collect::<Result<Vec<_>>>()?;
    let used: Vec<f64> = recovered.into_iter().flatten().collect();
    let n = used.len();
    if n == 0 {
        return Err(Error::DegenerateInterval);
    }
    Ok((ks_distance(used, uniform_cdf(0.0, 1.0)), n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_distance_small_cases() {
        // one sample at the median: F_n jumps 0 -> 1 where F = 0.5
        assert!((ks_distance(vec![0.5], uniform_cdf(0.0, 1.0)) - 0.5).abs() < 1e-15);
        let d = ks_distance(vec![0.1, 0.4, 0.9], uniform_cdf(0.0, 1.0));
        // max over i of (i+1)/n - x_i and x_i - i/n
        let expected: f64 = [1.0 / 3.0 - 0.1, 2.0 / 3.0 - 0.4, 1.0 - 0.9, 0.1, 0.4 - 1.0 / 3.0, 0.9 - 2.0 / 3.0]
            .into_iter()
            .fold(0.0, f64::max);
        assert!((d - expected).abs() < 1e-15);
    }

    #[test]
    fn symmetric_midpoint_is_uniform() {
        let n = 100_000;
        let sp = BridgeSpec::new(0.0, 1.0, 0.0, 0.0, 1.0).unwrap();
        let d = marginal_ks_check(&sp, NodeId::ROOT, n, 17).unwrap();
        assert!(d < ks_critical_1pct(n as usize), "KS {d}");
    }

    #[test]
    fn shifted_bridge_is_uniform_on_shifted_interval() {
        let n = 20_000;
        let sp = BridgeSpec::new(0.0, 1.0, 3.0, 3.0, 1.0).unwrap();
        let d = marginal_ks_check(&sp, NodeId::ROOT, n, 3).unwrap();
        assert!(d < ks_critical_1pct(n as usize));
        // against the unshifted interval it must fail badly
        let samples: Vec<f64> = (0..1000)
            .map(|i| build_bridge(&sp, &sample_noise(1, &mut draw_rng(3, i)).unwrap(), &AffineBridge).unwrap().values[1])
            .collect();
        assert!(ks_distance(samples, uniform_cdf(-0.5, 0.5)) > 0.9);
    }

    #[test]
    fn degenerate_and_deep_nodes_rejected() {
        let line = BridgeSpec::new(0.0, 1.0, 0.0, 1.0, 1.0).unwrap();
        assert!(matches!(
            marginal_ks_check(&line, NodeId::ROOT, 10, 0),
            Err(Error::DegenerateInterval)
        ));
        let sym = BridgeSpec::new(0.0, 1.0, 0.0, 0.0, 1.0).unwrap();
        assert!(marginal_ks_check(&sym, NodeId::new(2, 1).unwrap(), 10, 0).is_err());
    }

    #[test]
    fn recovered_noise_uniform_at_deep_node() {
        let sp = BridgeSpec::new(0.0, 2.0, 0.0, 0.7, 1.0).unwrap();
        let (d, n) = recovered_noise_ks(&sp, NodeId::new(3, 5).unwrap(), 4, 20_000, 8).unwrap();
        assert!(n > 10_000);
        assert!(d < ks_critical_1pct(n), "KS {d} with {n} draws");
    }
}
