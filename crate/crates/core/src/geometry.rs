//! Admissible values for constrained Lipschitz segments.
//!
//! A segment pinned at `(r, a)` and `(s, b)` with Lipschitz constant `c`
//! lives inside the intersection of the forward cone from `(r, a)` and the
//! backward cone from `(s, b)`. Only two derived quantities of that region
//! are ever needed: whether it is nonempty, and its vertical slice at the
//! midpoint time. Both are computed here in closed form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative slack used when comparing against the cone boundary.
pub const FEASIBILITY_RTOL: f64 = 1e-12;

/// Absolute tolerance for boundary comparisons on a segment of reach `c * (s - r)`.
pub fn feasibility_tol(reach: f64) -> f64 {
    FEASIBILITY_RTOL * reach.max(1.0)
}

fn check_domain(r: f64, s: f64, c: f64) -> Result<()> {
    if !(r.is_finite() && s.is_finite() && c.is_finite()) {
        return Err(Error::InvalidDomain(format!(
            "non-finite parameter (r = {r}, s = {s}, c = {c})"
        )));
    }
    if r < 0.0 {
        return Err(Error::InvalidDomain(format!("r = {r} must be >= 0")));
    }
    if r >= s {
        return Err(Error::InvalidDomain(format!("need r < s, got r = {r}, s = {s}")));
    }
    if c <= 0.0 {
        return Err(Error::InvalidDomain(format!("Lipschitz constant c = {c} must be > 0")));
    }
    Ok(())
}

/// Closed interval `[lo, hi]`; `lo == hi` is a single point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(Error::InvalidDomain(format!("interval [{lo}, {hi}] has lo > hi")));
        }
        Ok(Self { lo, hi })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_within(&self, x: f64, tol: f64) -> bool {
        self.lo - tol <= x && x <= self.hi + tol
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.lo, self.hi)
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }
}

/// One constrained segment: Lipschitz paths on `[r, s]` with `x(r) = a`, `x(s) = b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BridgeSpec {
    pub r: f64,
    pub s: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl BridgeSpec {
    /// Validated constructor; rejects infeasible endpoint pairs.
    pub fn new(r: f64, s: f64, a: f64, b: f64, c: f64) -> Result<Self> {
        if !feasible(r, s, a, b, c)? {
            return Err(Error::InfeasibleSpec {
                gap: (b - a).abs(),
                reach: c * (s - r),
            });
        }
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::InvalidDomain("endpoint values must be finite".into()));
        }
        Ok(Self { r, s, a, b, c })
    }

    /// Builds a spec without validation. Used inside the recursion where
    /// feasibility holds by construction up to rounding.
    pub(crate) fn unchecked(r: f64, s: f64, a: f64, b: f64, c: f64) -> Self {
        Self { r, s, a, b, c }
    }

    /// `c * (s - r)`: the largest rise a path may make across the segment.
    pub fn reach(&self) -> f64 {
        self.c * (self.s - self.r)
    }

    pub fn midpoint_time(&self) -> f64 {
        0.5 * (self.r + self.s)
    }

    /// True when `|b - a| = c(s - r)` up to tolerance: the only admissible
    /// path is the straight segment.
    pub fn is_forced(&self) -> bool {
        let reach = self.reach();
        reach - (self.b - self.a).abs() <= feasibility_tol(reach)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        BridgeSpec::new(self.r, self.s, self.a, self.b, self.c).map(|_| ())
    }
}

/// Whether the cone intersection for `(r, a)` and `(s, b)` is nonempty,
/// i.e. `|b - a| <= c (s - r)`.
pub fn feasible(r: f64, s: f64, a: f64, b: f64, c: f64) -> Result<bool> {
    check_domain(r, s, c)?;
    let reach = c * (s - r);
    Ok((b - a).abs() <= reach + feasibility_tol(reach))
}

/// Admissible values at the midpoint time, unvalidated. When rounding makes
/// the endpoints pull slightly past the cone boundary the result collapses
/// to the endpoint average.
pub(crate) fn midpoint_interval_raw(spec: &BridgeSpec) -> Interval {
    let half = 0.5 * spec.reach();
    let (lo, hi) = if spec.a <= spec.b {
        (spec.b - half, spec.a + half)
    } else {
        (spec.a - half, spec.b + half)
    };
    if lo > hi || hi - lo <= feasibility_tol(spec.reach()) {
        let mid = 0.5 * (spec.a + spec.b);
        Interval { lo: mid, hi: mid }
    } else {
        Interval { lo, hi }
    }
}

/// The vertical slice of the cone intersection at `u = (r + s) / 2`.
pub fn midpoint_interval(spec: &BridgeSpec) -> Result<Interval> {
    spec.validate()?;
    Ok(midpoint_interval_raw(spec))
}

/// Whether `d` is an admissible value at the midpoint: reachable from `(r, a)`
/// and able to reach `(s, b)`.
pub fn midpoint_feasible(spec: &BridgeSpec, d: f64) -> Result<bool> {
    spec.validate()?;
    let u = spec.midpoint_time();
    let tol = feasibility_tol(spec.reach());
    Ok((d - spec.a).abs() <= spec.c * (u - spec.r) + tol
        && (d - spec.b).abs() <= spec.c * (spec.s - u) + tol)
}

/// Values reachable at time `s` from `(r, a)`: `[a - c(s - r), a + c(s - r)]`.
pub fn free_interval(r: f64, s: f64, a: f64, c: f64) -> Result<Interval> {
    check_domain(r, s, c)?;
    if !a.is_finite() {
        return Err(Error::InvalidDomain(format!("a = {a} must be finite")));
    }
    let reach = c * (s - r);
    Ok(Interval {
        lo: a - reach,
        hi: a + reach,
    })
}
