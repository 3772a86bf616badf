//! Constructions with fewer pinned values.
//!
//! * One free endpoint: an extra noise coordinate picks the far endpoint
//!   from the free interval, then the pinned construction runs as usual.
//! * Half line: a first segment `[r, m]` (with `m` the least integer above
//!   `r`) followed by unit segments `[j, j + 1]`, each pinned on the left to
//!   where the previous one ended.
//! * Free start: an unrestricted real coordinate fixes `x(r)` through an
//!   initial selector.

use serde::{Deserialize, Serialize};

use crate::bridge::{build_bridge, invert_bridge, max_lipschitz_violation, GridPath, NoiseVector};
use crate::error::{Error, Result};
use crate::geometry::{free_interval, BridgeSpec};
use crate::selectors::{
    AffineBridge, AffineFree, BridgeSelector, FreeEndpointSelector, IdentityInitial, InitialSelector,
    INVERSION_RTOL,
};

/// The selectors a lifted construction needs.
#[derive(Clone, Copy)]
pub struct Selectors<'a> {
    pub bridge: &'a dyn BridgeSelector,
    pub free: &'a dyn FreeEndpointSelector,
    pub initial: &'a dyn InitialSelector,
}

impl Selectors<'static> {
    /// Affine bridge and endpoint selectors with the identity initial map.
    pub const AFFINE: Selectors<'static> = Selectors {
        bridge: &AffineBridge,
        free: &AffineFree,
        initial: &IdentityInitial,
    };
}

impl Default for Selectors<'static> {
    fn default() -> Self {
        Self::AFFINE
    }
}

/// Interior noise plus one coordinate for the unpinned endpoint. For
/// pinned-left paths the extra coordinate belongs to `s`; for pinned-right
/// paths it belongs to `r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PinnedNoise {
    pub endpoint: f64,
    pub interior: NoiseVector,
}

pub type PinnedLeftNoise = PinnedNoise;
pub type PinnedRightNoise = PinnedNoise;

impl PinnedNoise {
    pub fn new(endpoint: f64, interior: NoiseVector) -> Result<Self> {
        if !(0.0..=1.0).contains(&endpoint) {
            return Err(Error::NoiseOutOfRange(endpoint));
        }
        Ok(Self { endpoint, interior })
    }

    pub fn constant(depth: u32, value: f64) -> Result<Self> {
        Self::new(value, NoiseVector::constant(depth, value)?)
    }

    pub fn depth(&self) -> u32 {
        self.interior.depth()
    }
}

/// Noise for a half-line path truncated at an integer horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfLineNoise {
    /// Segment `[r, m]`.
    pub first: PinnedNoise,
    /// Segments `[m, m + 1], ..., [K - 1, K]`.
    pub unit: Vec<PinnedNoise>,
}

impl HalfLineNoise {
    pub fn constant(segments: usize, depth: u32, value: f64) -> Result<Self> {
        let seg = PinnedNoise::constant(depth, value)?;
        Ok(Self {
            first: seg.clone(),
            unit: vec![seg; segments.saturating_sub(1)],
        })
    }

    pub fn segments(&self) -> impl Iterator<Item = &PinnedNoise> {
        std::iter::once(&self.first).chain(&self.unit)
    }

    pub fn segment_count(&self) -> usize {
        1 + self.unit.len()
    }
}

/// An unrestricted initial coordinate together with the remaining noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreeNoise<N> {
    pub initial: f64,
    pub rest: N,
}

/// Half-line path as consecutive grid segments sharing junction values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfLinePath {
    pub r: f64,
    pub c: f64,
    pub horizon: u32,
    pub depth: u32,
    pub segments: Vec<GridPath>,
}

impl HalfLinePath {
    pub fn first(&self) -> f64 {
        self.segments[0].first()
    }

    /// All grid times and values in order, each junction listed once.
    pub fn points(&self) -> (Vec<f64>, Vec<f64>) {
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (i, seg) in self.segments.iter().enumerate() {
            let skip = usize::from(i > 0);
            times.extend(seg.times().into_iter().skip(skip));
            values.extend(seg.values.iter().skip(skip));
        }
        (times, values)
    }

    pub fn max_lipschitz_violation(&self) -> f64 {
        let (times, values) = self.points();
        max_lipschitz_violation(&times, &values, self.c)
    }

    /// Value at a grid time of some segment.
    pub fn value_at(&self, t: f64) -> Option<f64> {
        self.segment_for(t).and_then(|seg| seg.value_at(t))
    }

    fn segment_for(&self, t: f64) -> Option<&GridPath> {
        if !(self.r <= t && t <= self.horizon as f64) {
            return None;
        }
        self.segments.iter().find(|seg| t <= seg.s)
    }
}

/// Least integer strictly greater than `r`: the end of the first half-line segment.
pub fn first_junction(r: f64) -> f64 {
    r.floor() + 1.0
}

fn check_horizon(r: f64, horizon: u32) -> Result<usize> {
    if !(r.is_finite() && r >= 0.0) {
        return Err(Error::InvalidDomain(format!("r = {r} must be >= 0")));
    }
    let m = first_junction(r);
    if (horizon as f64) < m {
        return Err(Error::InvalidHorizon(format!(
            "horizon {horizon} must be an integer >= {m} (the first integer above r = {r})"
        )));
    }
    Ok(1 + (horizon as f64 - m) as usize)
}

/// Pinned at `x(r) = a`; `x(s)` is chosen from the free interval by `noise.endpoint`.
pub fn build_pinned_left(
    a: f64,
    r: f64,
    s: f64,
    c: f64,
    noise: &PinnedNoise,
    selectors: Selectors<'_>,
) -> Result<GridPath> {
    let interval = free_interval(r, s, a, c)?;
    let b = interval.clamp(selectors.free.select(a, r, s, c, noise.endpoint));
    build_bridge(&BridgeSpec::new(r, s, a, b, c)?, &noise.interior, selectors.bridge)
}

/// Pinned at `x(s) = b`; `x(r)` is drawn from the interval of half-width
/// `c(s - r)` centred at `b` by `noise.endpoint`.
pub fn build_pinned_right(
    b: f64,
    r: f64,
    s: f64,
    c: f64,
    noise: &PinnedNoise,
    selectors: Selectors<'_>,
) -> Result<GridPath> {
    let interval = free_interval(r, s, b, c)?;
    let a = interval.clamp(selectors.free.select(b, r, s, c, noise.endpoint));
    build_bridge(&BridgeSpec::new(r, s, a, b, c)?, &noise.interior, selectors.bridge)
}

/// Chains pinned-left segments from `x(r) = a` out to the integer `horizon`.
pub fn build_halfline(
    a: f64,
    r: f64,
    c: f64,
    noise: &HalfLineNoise,
    horizon: u32,
    selectors: Selectors<'_>,
) -> Result<HalfLinePath> {
    let count = check_horizon(r, horizon)?;
    if noise.segment_count() != count {
        return Err(Error::InvalidHorizon(format!(
            "horizon {horizon} from r = {r} needs {count} noise segments, got {}",
            noise.segment_count()
        )));
    }
    let depth = noise.first.depth();
    if let Some(seg) = noise.unit.iter().find(|n| n.depth() != depth) {
        return Err(Error::DepthMismatch {
            expected: depth,
            actual: seg.depth(),
        });
    }
    let m = first_junction(r);
    let mut segments = Vec::with_capacity(count);
    let mut start = a;
    for (i, seg_noise) in noise.segments().enumerate() {
        let (left, right) = if i == 0 {
            (r, m)
        } else {
            (m + (i - 1) as f64, m + i as f64)
        };
        let seg = build_pinned_left(start, left, right, c, seg_noise, selectors)?;
        start = seg.last();
        segments.push(seg);
    }
    Ok(HalfLinePath {
        r,
        c,
        horizon,
        depth,
        segments,
    })
}

/// Free start on `[r, s]`: `x(r) = initial(noise.initial)`, then pinned-left.
pub fn build_free_segment(
    noise: &FreeNoise<PinnedNoise>,
    r: f64,
    s: f64,
    c: f64,
    selectors: Selectors<'_>,
) -> Result<GridPath> {
    let a = initial_value(noise.initial, selectors)?;
    build_pinned_left(a, r, s, c, &noise.rest, selectors)
}

/// Free start on the half line.
pub fn build_free_halfline(
    noise: &FreeNoise<HalfLineNoise>,
    r: f64,
    c: f64,
    horizon: u32,
    selectors: Selectors<'_>,
) -> Result<HalfLinePath> {
    let a = initial_value(noise.initial, selectors)?;
    build_halfline(a, r, c, &noise.rest, horizon, selectors)
}

fn initial_value(xi: f64, selectors: Selectors<'_>) -> Result<f64> {
    if !xi.is_finite() {
        return Err(Error::InvalidDomain(format!("initial coordinate {xi} must be finite")));
    }
    Ok(selectors.initial.select(xi))
}

fn endpoint_preimage(
    pinned: f64,
    free_value: f64,
    path: &GridPath,
    free_time: f64,
    selectors: Selectors<'_>,
) -> Result<(f64, f64)> {
    let interval = free_interval(path.r, path.s, pinned, path.c)?;
    let tol = INVERSION_RTOL * (path.c * (path.s - path.r)).max(1.0);
    if !interval.contains_within(free_value, tol) {
        return Err(Error::PathViolatesLipschitz {
            t: free_time,
            value: free_value,
            lo: interval.lo,
            hi: interval.hi,
        });
    }
    let snapped = interval.clamp(free_value);
    let xi = selectors
        .free
        .preimage(pinned, path.r, path.s, path.c, snapped)
        .clamp(0.0, 1.0);
    Ok((xi, snapped))
}

/// Noise that rebuilds `path` with [`build_pinned_left`] from `a = path.first()`.
pub fn invert_pinned_left(path: &GridPath, selectors: Selectors<'_>) -> Result<PinnedNoise> {
    path.check_shape()?;
    let a = path.first();
    let (endpoint, b) = endpoint_preimage(a, path.last(), path, path.s, selectors)?;
    let spec = BridgeSpec::new(path.r, path.s, a, b, path.c)?;
    let interior = invert_bridge(path, &spec, selectors.bridge)?;
    PinnedNoise::new(endpoint, interior)
}

/// Noise that rebuilds `path` with [`build_pinned_right`] from `b = path.last()`.
pub fn invert_pinned_right(path: &GridPath, selectors: Selectors<'_>) -> Result<PinnedNoise> {
    path.check_shape()?;
    let b = path.last();
    let (endpoint, a) = endpoint_preimage(b, path.first(), path, path.r, selectors)?;
    let spec = BridgeSpec::new(path.r, path.s, a, b, path.c)?;
    let interior = invert_bridge(path, &spec, selectors.bridge)?;
    PinnedNoise::new(endpoint, interior)
}

/// Segment-by-segment inversion of a half-line path.
pub fn invert_halfline(path: &HalfLinePath, selectors: Selectors<'_>) -> Result<HalfLineNoise> {
    let count = check_horizon(path.r, path.horizon)?;
    if path.segments.len() != count {
        return Err(Error::InvalidHorizon(format!(
            "horizon {} from r = {} needs {count} segments, got {}",
            path.horizon,
            path.r,
            path.segments.len()
        )));
    }
    let m = first_junction(path.r);
    let tol = INVERSION_RTOL * path.c.max(1.0);
    let mut noises = Vec::with_capacity(count);
    for (i, seg) in path.segments.iter().enumerate() {
        let (left, right) = if i == 0 {
            (path.r, m)
        } else {
            (m + (i - 1) as f64, m + i as f64)
        };
        if seg.r != left || seg.s != right || seg.c != path.c || seg.depth != path.depth {
            return Err(Error::InvalidDomain(format!(
                "segment {i} covers [{}, {}] (c = {}, depth {}), expected [{left}, {right}] (c = {}, depth {})",
                seg.r, seg.s, seg.c, seg.depth, path.c, path.depth
            )));
        }
        if i > 0 {
            let expected = path.segments[i - 1].last();
            if (seg.first() - expected).abs() > tol {
                return Err(Error::JunctionMismatch {
                    segment: i,
                    expected,
                    found: seg.first(),
                });
            }
        }
        noises.push(invert_pinned_left(seg, selectors)?);
    }
    let mut it = noises.into_iter();
    let first = it.next().expect("at least one segment");
    Ok(HalfLineNoise {
        first,
        unit: it.collect(),
    })
}

pub fn invert_free_segment(
    path: &GridPath,
    selectors: Selectors<'_>,
) -> Result<FreeNoise<PinnedNoise>> {
    Ok(FreeNoise {
        initial: selectors.initial.preimage(path.first()),
        rest: invert_pinned_left(path, selectors)?,
    })
}

pub fn invert_free_halfline(
    path: &HalfLinePath,
    selectors: Selectors<'_>,
) -> Result<FreeNoise<HalfLineNoise>> {
    Ok(FreeNoise {
        initial: selectors.initial.preimage(path.first()),
        rest: invert_halfline(path, selectors)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::selectors::CubicInitial;

    const AFF: Selectors<'static> = Selectors::AFFINE;

    #[test]
    fn pinned_left_examples() {
        let noise = PinnedNoise::new(0.75, NoiseVector::constant(2, 0.5).unwrap()).unwrap();
        let p = build_pinned_left(0.0, 0.0, 1.0, 1.0, &noise, AFF).unwrap();
        assert_eq!(p.last(), 0.5);
        assert_eq!(p.values[2], 0.25);

        let p = build_pinned_left(0.0, 0.0, 1.0, 1.0, &PinnedNoise::constant(3, 0.5).unwrap(), AFF)
            .unwrap();
        assert_eq!(p.values, vec![0.0; 9]);

        let noise = PinnedNoise::new(1.0, NoiseVector::constant(2, 0.1).unwrap()).unwrap();
        let p = build_pinned_left(0.0, 0.0, 1.0, 1.0, &noise, AFF).unwrap();
        assert_eq!(p.values, vec![0.0, 0.25, 0.5, 0.75, 1.0]);

        assert!(build_pinned_left(0.0, 1.0, 0.0, 1.0, &noise, AFF).is_err());
    }

    #[test]
    fn pinned_right_examples() {
        let p = build_pinned_right(0.0, 0.0, 1.0, 1.0, &PinnedNoise::constant(2, 0.5).unwrap(), AFF)
            .unwrap();
        assert_eq!(p.values, vec![0.0; 5]);

        let noise = PinnedNoise::new(0.75, NoiseVector::constant(1, 0.5).unwrap()).unwrap();
        let p = build_pinned_right(0.5, 0.0, 1.0, 1.0, &noise, AFF).unwrap();
        assert_eq!(p.first(), 1.0);
        assert_eq!(p.last(), 0.5);
        // bridge 1.0 -> 0.5 at xi = 0.5: middle of [0.5, 1.0]
        assert_eq!(p.values[1], 0.75);
    }

    #[test]
    fn pinned_right_is_time_reversed_pinned_left() {
        let interior: Vec<f64> = (0..15).map(|i| ((i * 29 % 17) as f64) / 16.0).collect();
        let noise = PinnedNoise::new(0.3, NoiseVector::new(4, interior).unwrap()).unwrap();
        let right = build_pinned_right(0.2, 0.5, 2.0, 1.5, &noise, AFF).unwrap();
        let mirrored = PinnedNoise::new(0.3, noise.interior.mirrored()).unwrap();
        let left = build_pinned_left(0.2, 0.5, 2.0, 1.5, &mirrored, AFF).unwrap();
        for (x, y) in right.values.iter().zip(left.values.iter().rev()) {
            assert!((x - y).abs() <= 1e-12, "{x} vs {y}");
        }
    }

    #[test]
    fn halfline_examples() {
        let noise = HalfLineNoise::constant(3, 2, 0.5).unwrap();
        let path = build_halfline(0.0, 0.5, 1.0, &noise, 3, AFF).unwrap();
        assert_eq!(path.segments.len(), 3);
        assert_eq!((path.segments[0].r, path.segments[0].s), (0.5, 1.0));
        assert_eq!((path.segments[2].r, path.segments[2].s), (2.0, 3.0));
        assert!(path.points().1.iter().all(|&v| v == 0.0));

        let noise = HalfLineNoise {
            first: PinnedNoise::new(0.9, NoiseVector::constant(2, 0.2).unwrap()).unwrap(),
            unit: vec![PinnedNoise::new(0.1, NoiseVector::constant(2, 0.7).unwrap()).unwrap(); 2],
        };
        let path = build_halfline(0.3, 0.5, 1.0, &noise, 3, AFF).unwrap();
        assert_eq!(path.value_at(1.0), Some(path.segments[1].first()));
        assert_eq!(path.segments[0].last(), path.segments[1].first());
        assert_eq!(path.segments[1].last(), path.segments[2].first());
    }

    #[test]
    fn halfline_first_segment_on_integer_start() {
        let noise = HalfLineNoise::constant(2, 1, 0.5).unwrap();
        let path = build_halfline(1.0, 1.0, 1.0, &noise, 3, AFF).unwrap();
        assert_eq!((path.segments[0].r, path.segments[0].s), (1.0, 2.0));
        assert_eq!(first_junction(0.0), 1.0);
        assert_eq!(first_junction(2.5), 3.0);
    }

    #[test]
    fn halfline_horizon_errors() {
        let noise = HalfLineNoise::constant(3, 1, 0.5).unwrap();
        assert!(matches!(
            build_halfline(0.0, 0.5, 1.0, &noise, 0, AFF),
            Err(Error::InvalidHorizon(_))
        ));
        assert!(matches!(
            build_halfline(0.0, 0.5, 1.0, &noise, 2, AFF),
            Err(Error::InvalidHorizon(_))
        ));
    }

    #[test]
    fn free_segment_examples() {
        let noise = FreeNoise {
            initial: 2.0,
            rest: PinnedNoise::constant(2, 0.5).unwrap(),
        };
        let p = build_free_segment(&noise, 0.0, 1.0, 1.0, AFF).unwrap();
        assert_eq!(p.values, vec![2.0; 5]);

        let cubic = Selectors {
            initial: &CubicInitial,
            ..AFF
        };
        let noise = FreeNoise {
            initial: -1.5,
            rest: PinnedNoise::constant(2, 0.3).unwrap(),
        };
        let p = build_free_segment(&noise, 0.0, 1.0, 1.0, cubic).unwrap();
        assert_eq!(p.first(), -3.375);
        let back = invert_free_segment(&p, cubic).unwrap();
        assert!((back.initial + 1.5).abs() < 1e-12);
    }

    #[test]
    fn invert_pinned_left_examples() {
        let zero = GridPath { r: 0.0, s: 1.0, c: 1.0, depth: 2, values: vec![0.0; 5] };
        let n = invert_pinned_left(&zero, AFF).unwrap();
        assert_eq!(n.endpoint, 0.5);
        assert_eq!(n.interior.values(), &[0.5; 3]);

        let line = GridPath { values: vec![0.0, 0.25, 0.5, 0.75, 1.0], ..zero.clone() };
        let n = invert_pinned_left(&line, AFF).unwrap();
        assert_eq!(n.endpoint, 1.0);
        assert_eq!(n.interior.values(), &[0.0; 3]);

        let steep = GridPath { values: vec![0.0, 0.3, 0.6, 0.9, 1.2], ..zero };
        assert!(matches!(
            invert_pinned_left(&steep, AFF),
            Err(Error::PathViolatesLipschitz { .. })
        ));
    }

    #[test]
    fn invert_pinned_right_round_trip() {
        let interior: Vec<f64> = (0..7).map(|i| ((i * 5 % 7) as f64) / 6.0).collect();
        let noise = PinnedNoise::new(0.85, NoiseVector::new(3, interior).unwrap()).unwrap();
        let p = build_pinned_right(-0.4, 1.0, 2.5, 0.8, &noise, AFF).unwrap();
        let back = invert_pinned_right(&p, AFF).unwrap();
        let q = build_pinned_right(-0.4, 1.0, 2.5, 0.8, &back, AFF).unwrap();
        for (x, y) in p.values.iter().zip(&q.values) {
            assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn invert_halfline_examples() {
        let noise = HalfLineNoise::constant(3, 2, 0.5).unwrap();
        let path = build_halfline(0.0, 0.5, 1.0, &noise, 3, AFF).unwrap();
        assert_eq!(invert_halfline(&path, AFF).unwrap(), noise);

        let mut broken = path.clone();
        broken.segments[1].values[0] = 0.2;
        assert!(matches!(
            invert_halfline(&broken, AFF),
            Err(Error::JunctionMismatch { segment: 1, .. })
        ));

        let mut short = path;
        short.segments.pop();
        assert!(matches!(invert_halfline(&short, AFF), Err(Error::InvalidHorizon(_))));
    }

    #[test]
    fn halfline_json_shape() {
        let noise = HalfLineNoise::constant(1, 0, 0.5).unwrap();
        let path = build_halfline(0.0, 0.0, 1.0, &noise, 1, AFF).unwrap();
        let json = serde_json::to_value(&path).unwrap();
        assert_eq!(
            json,
            serde_json::json!({
                "r": 0.0, "c": 1.0, "horizon": 1, "depth": 0,
                "segments": [{"r": 0.0, "s": 1.0, "c": 1.0, "depth": 0, "values": [0.0, 0.0]}]
            })
        );
    }
}
