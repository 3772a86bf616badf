//! Path domains, cylinder events, and how events are evaluated on sampled paths.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bridge::{build_bridge, GridPath};
use crate::error::{Error, Result};
use crate::extensions::{
    build_free_halfline, build_free_segment, build_halfline, build_pinned_left, build_pinned_right,
    first_junction, FreeNoise, HalfLinePath, Selectors,
};
use crate::geometry::BridgeSpec;
use crate::grid::DyadicGrid;
use crate::measure::sampling::{sample_halfline_noise, sample_noise, sample_pinned_noise};

/// Which path space a measure lives on, with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "domain", content = "params", rename_all = "snake_case")]
pub enum Domain {
    Bridge(BridgeSpec),
    PinnedLeft { r: f64, s: f64, a: f64, c: f64 },
    PinnedRight { r: f64, s: f64, b: f64, c: f64 },
    #[serde(rename = "halfline")]
    HalfLine { r: f64, a: f64, c: f64, horizon: u32 },
    FreeSegment { r: f64, s: f64, c: f64 },
    #[serde(rename = "free_halfline")]
    FreeHalfLine { r: f64, c: f64, horizon: u32 },
}

impl Domain {
    pub fn name(&self) -> &'static str {
        match self {
            Domain::Bridge(_) => "bridge",
            Domain::PinnedLeft { .. } => "pinned_left",
            Domain::PinnedRight { .. } => "pinned_right",
            Domain::HalfLine { .. } => "halfline",
            Domain::FreeSegment { .. } => "free_segment",
            Domain::FreeHalfLine { .. } => "free_halfline",
        }
    }

    /// The uniform measures are probabilities; the free-start ones are not.
    pub fn is_probability(&self) -> bool {
        !matches!(self, Domain::FreeSegment { .. } | Domain::FreeHalfLine { .. })
    }

    pub fn start(&self) -> f64 {
        match *self {
            Domain::Bridge(spec) => spec.r,
            Domain::PinnedLeft { r, .. }
            | Domain::PinnedRight { r, .. }
            | Domain::HalfLine { r, .. }
            | Domain::FreeSegment { r, .. }
            | Domain::FreeHalfLine { r, .. } => r,
        }
    }

    /// Checks the parameters by building one path from constant noise.
    pub fn validate(&self) -> Result<()> {
        let mut half = ConstantHalf;
        self.sample(0, &mut half, 0.0).map(|_| ())
    }

    fn horizon_segments(r: f64, horizon: u32) -> usize {
        (1.0 + horizon as f64 - first_junction(r)).max(0.0) as usize
    }

    /// One path at `depth`. For free-start domains `initial` is the real
    /// coordinate; other domains ignore it.
    pub fn sample<R: Rng + ?Sized>(&self, depth: u32, rng: &mut R, initial: f64) -> Result<SampledPath> {
        let sel = Selectors::AFFINE;
        Ok(match *self {
            Domain::Bridge(spec) => {
                SampledPath::Segment(build_bridge(&spec, &sample_noise(depth, rng)?, sel.bridge)?)
            }
            Domain::PinnedLeft { r, s, a, c } => {
                SampledPath::Segment(build_pinned_left(a, r, s, c, &sample_pinned_noise(depth, rng)?, sel)?)
            }
            Domain::PinnedRight { r, s, b, c } => SampledPath::Segment(build_pinned_right(
                b,
                r,
                s,
                c,
                &sample_pinned_noise(depth, rng)?,
                sel,
            )?),
            Domain::HalfLine { r, a, c, horizon } => {
                let noise = sample_halfline_noise(Self::horizon_segments(r, horizon), depth, rng)?;
                SampledPath::HalfLine(build_halfline(a, r, c, &noise, horizon, sel)?)
            }
            Domain::FreeSegment { r, s, c } => {
                let noise = FreeNoise {
                    initial,
                    rest: sample_pinned_noise(depth, rng)?,
                };
                SampledPath::Segment(build_free_segment(&noise, r, s, c, sel)?)
            }
            Domain::FreeHalfLine { r, c, horizon } => {
                let noise = FreeNoise {
                    initial,
                    rest: sample_halfline_noise(Self::horizon_segments(r, horizon), depth, rng)?,
                };
                SampledPath::HalfLine(build_free_halfline(&noise, r, c, horizon, sel)?)
            }
        })
    }

    /// Locates `t` on the depth-`depth` grids of this domain.
    pub(crate) fn locate(&self, t: f64, depth: u32) -> Result<(usize, usize)> {
        let segment_grid = |r: f64, s: f64| -> Result<(usize, usize)> {
            if !(r <= t && t <= s) {
                return Err(Error::TimeOutOfRange { t, lo: r, hi: s });
            }
            let grid = DyadicGrid::new(r, s, depth)?;
            grid.index_of(t)
                .map(|j| (0, j))
                .ok_or(Error::TimeNotOnGrid { t, depth })
        };
        match *self {
            Domain::Bridge(spec) => segment_grid(spec.r, spec.s),
            Domain::PinnedLeft { r, s, .. }
            | Domain::PinnedRight { r, s, .. }
            | Domain::FreeSegment { r, s, .. } => segment_grid(r, s),
            Domain::HalfLine { r, horizon, .. } | Domain::FreeHalfLine { r, horizon, .. } => {
                let end = horizon as f64;
                if !(r <= t && t <= end) {
                    return Err(Error::TimeOutOfRange { t, lo: r, hi: end });
                }
                let m = first_junction(r);
                let (seg, left, right) = if t <= m {
                    (0, r, m)
                } else {
                    let j = (t - 1.0).ceil().max(m);
                    (1 + (j - m) as usize, j, j + 1.0)
                };
                let grid = DyadicGrid::new(left, right, depth)?;
                grid.index_of(t)
                    .map(|j| (seg, j))
                    .ok_or(Error::TimeNotOnGrid { t, depth })
            }
        }
    }
}

/// "Random" source that always yields one half; used only for validation.
struct ConstantHalf;

impl rand::RngCore for ConstantHalf {
    fn next_u32(&mut self) -> u32 {
        1 << 31
    }
    fn next_u64(&mut self) -> u64 {
        1 << 63
    }
    fn fill_bytes(&mut self, dst: &mut [u8]) {
        dst.fill(0x80);
    }
}

/// A path drawn from one of the domains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SampledPath {
    Segment(GridPath),
    HalfLine(HalfLinePath),
}

impl SampledPath {
    pub fn points(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            SampledPath::Segment(p) => (p.times(), p.values.clone()),
            SampledPath::HalfLine(p) => p.points(),
        }
    }

    pub fn max_lipschitz_violation(&self) -> f64 {
        match self {
            SampledPath::Segment(p) => p.max_lipschitz_violation(),
            SampledPath::HalfLine(p) => p.max_lipschitz_violation(),
        }
    }

    fn value(&self, segment: usize, index: usize) -> f64 {
        match self {
            SampledPath::Segment(p) => p.values[index],
            SampledPath::HalfLine(p) => p.segments[segment].values[index],
        }
    }
}

/// `x(t)` must lie in `[lo, hi]`; a missing bound is unbounded. `lo > hi`
/// denotes the empty set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub t: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lo: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hi: Option<f64>,
}

impl Constraint {
    pub fn new(t: f64, lo: f64, hi: f64) -> Self {
        Self {
            t,
            lo: Some(lo),
            hi: Some(hi),
        }
    }

    pub fn lower(&self) -> f64 {
        self.lo.unwrap_or(f64::NEG_INFINITY)
    }

    pub fn upper(&self) -> f64 {
        self.hi.unwrap_or(f64::INFINITY)
    }

    pub fn is_empty(&self) -> bool {
        self.lower() > self.upper()
    }

    pub fn admits(&self, x: f64) -> bool {
        self.lower() <= x && x <= self.upper()
    }
}

/// Finitely many `(time, interval)` constraints, all of which must hold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CylinderEvent {
    pub constraints: Vec<Constraint>,
}

impl CylinderEvent {
    pub fn new(constraints: Vec<Constraint>) -> Result<Self> {
        let event = Self { constraints };
        event.check()?;
        Ok(event)
    }

    pub(crate) fn check(&self) -> Result<()> {
        for (i, c) in self.constraints.iter().enumerate() {
            if !c.t.is_finite() || c.lo.is_some_and(f64::is_nan) || c.hi.is_some_and(f64::is_nan) {
                return Err(Error::InvalidEvent(format!("constraint {i} has a non-numeric field")));
            }
            if self.constraints[..i].iter().any(|d| d.t == c.t) {
                return Err(Error::InvalidEvent(format!("time {} constrained twice", c.t)));
            }
        }
        Ok(())
    }

    pub fn is_empty_set(&self) -> bool {
        self.constraints.iter().any(Constraint::is_empty)
    }

    /// Binds each constraint to a grid location of `domain` at `depth`.
    pub fn resolve(&self, domain: &Domain, depth: u32) -> Result<ResolvedEvent> {
        self.check()?;
        let checks = self
            .constraints
            .iter()
            .map(|c| {
                let (segment, index) = domain.locate(c.t, depth)?;
                Ok(ResolvedConstraint {
                    segment,
                    index,
                    lo: c.lower(),
                    hi: c.upper(),
                })
            })
            .collect::<Result<_>>()?;
        Ok(ResolvedEvent { checks })
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct ResolvedConstraint {
    segment: usize,
    index: usize,
    lo: f64,
    hi: f64,
}

/// An event bound to grid positions; evaluation is a handful of lookups.
#[derive(Debug, Clone)]
pub struct ResolvedEvent {
    checks: Vec<ResolvedConstraint>,
}

impl ResolvedEvent {
    pub fn holds(&self, path: &SampledPath) -> bool {
        self.checks.iter().all(|c| {
            let x = path.value(c.segment, c.index);
            c.lo <= x && x <= c.hi
        })
    }

    /// Test on bare depth-`n` segment values.
    pub fn holds_on_values(&self, values: &[f64]) -> bool {
        self.checks.iter().all(|c| {
            let x = values[c.index];
            c.lo <= x && x <= c.hi
        })
    }
}

/// Event file: a domain together with the constraints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventFile {
    #[serde(flatten)]
    pub domain: Domain,
    pub constraints: Vec<Constraint>,
}

impl EventFile {
    pub fn event(&self) -> Result<CylinderEvent> {
        CylinderEvent::new(self.constraints.clone())
    }
}
