//! Selector families: continuous surjections from noise onto admissible values.
//!
//! The construction only relies on the traits below. The affine instances
//! push the uniform law on `[0, 1]` forward to the uniform law on each
//! admissible interval, which is what makes the resulting path measure the
//! uniform one. Alternative surjections can be plugged in; each must also
//! provide a preimage so paths can be inverted back to noise.

use crate::error::{Error, Result};
use crate::geometry::{self, midpoint_interval_raw, BridgeSpec, Interval};

/// Chooses the midpoint value of a pinned segment from one noise coordinate.
pub trait BridgeSelector: Send + Sync {
    /// Maps `xi` in `[0, 1]` onto the midpoint interval of `spec`. Callers
    /// guarantee `spec` is feasible up to rounding.
    fn select(&self, spec: &BridgeSpec, xi: f64) -> f64;

    /// Some `xi` in `[0, 1]` with `select(spec, xi) == d`, for `d` inside the
    /// midpoint interval.
    fn preimage(&self, spec: &BridgeSpec, d: f64) -> f64;
}

/// Chooses the free right-endpoint value from the left value `a`.
pub trait FreeEndpointSelector: Send + Sync {
    /// Maps `xi` in `[0, 1]` onto `[a - c(s - r), a + c(s - r)]`.
    fn select(&self, a: f64, r: f64, s: f64, c: f64, xi: f64) -> f64;

    fn preimage(&self, a: f64, r: f64, s: f64, c: f64, d: f64) -> f64;
}

/// Continuous surjection of the reals used for an unpinned starting value.
pub trait InitialSelector: Send + Sync {
    fn select(&self, xi: f64) -> f64;

    fn preimage(&self, x: f64) -> f64;
}

/// The unique increasing affine map of `[0, 1]` onto the midpoint interval.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AffineBridge;

impl BridgeSelector for AffineBridge {
    fn select(&self, spec: &BridgeSpec, xi: f64) -> f64 {
        let interval = midpoint_interval_raw(spec);
        if interval.is_degenerate() {
            return interval.lo;
        }
        let reach = spec.reach();
        let half = 0.5 * reach;
        let value = if spec.a <= spec.b {
            ((spec.a - spec.b) + reach) * xi + spec.b - half
        } else {
            ((spec.b - spec.a) + reach) * xi + spec.a - half
        };
        interval.clamp(value)
    }

    fn preimage(&self, spec: &BridgeSpec, d: f64) -> f64 {
        let interval = midpoint_interval_raw(spec);
        if interval.is_degenerate() {
            return 0.0;
        }
        ((d - interval.lo) / interval.width()).clamp(0.0, 1.0)
    }
}

/// `2c(s - r) xi + a - c(s - r)`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AffineFree;

impl FreeEndpointSelector for AffineFree {
    fn select(&self, a: f64, r: f64, s: f64, c: f64, xi: f64) -> f64 {
        let reach = c * (s - r);
        2.0 * reach * xi + a - reach
    }

    fn preimage(&self, a: f64, r: f64, s: f64, c: f64, d: f64) -> f64 {
        let reach = c * (s - r);
        ((d - a + reach) / (2.0 * reach)).clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IdentityInitial;

impl InitialSelector for IdentityInitial {
    fn select(&self, xi: f64) -> f64 {
        xi
    }

    fn preimage(&self, x: f64) -> f64 {
        x
    }
}

/// `xi^3`: continuous, onto, and proper, but not measure preserving.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CubicInitial;

impl InitialSelector for CubicInitial {
    fn select(&self, xi: f64) -> f64 {
        xi * xi * xi
    }

    fn preimage(&self, x: f64) -> f64 {
        x.cbrt()
    }
}

/// Smoothstep reparametrisation of the affine selector. Still a continuous
/// surjection onto the midpoint interval, but the induced law is not uniform.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SmoothstepBridge;

fn smoothstep(x: f64) -> f64 {
    x * x * (3.0 - 2.0 * x)
}

impl BridgeSelector for SmoothstepBridge {
    fn select(&self, spec: &BridgeSpec, xi: f64) -> f64 {
        let interval = midpoint_interval_raw(spec);
        interval.clamp(interval.lo + interval.width() * smoothstep(xi))
    }

    fn preimage(&self, spec: &BridgeSpec, d: f64) -> f64 {
        let interval = midpoint_interval_raw(spec);
        if interval.is_degenerate() {
            return 0.0;
        }
        let target = ((d - interval.lo) / interval.width()).clamp(0.0, 1.0);
        // smoothstep is strictly increasing on [0, 1]
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if smoothstep(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Inversion slack: values may sit this far outside their interval (relative
/// to `max(1, c(s - r))`) and still be snapped onto it.
pub const INVERSION_RTOL: f64 = 1e-9;

fn check_unit(xi: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&xi) {
        return Err(Error::NoiseOutOfRange(xi));
    }
    Ok(())
}

pub fn affine_bridge_eval(spec: &BridgeSpec, xi: f64) -> Result<f64> {
    spec.validate()?;
    check_unit(xi)?;
    Ok(AffineBridge.select(spec, xi))
}

pub fn affine_bridge_invert(spec: &BridgeSpec, d: f64) -> Result<f64> {
    let interval = geometry::midpoint_interval(spec)?;
    check_membership(&interval, d, spec.reach())?;
    Ok(AffineBridge.preimage(spec, interval.clamp(d)))
}

pub fn affine_free_eval(a: f64, r: f64, s: f64, c: f64, xi: f64) -> Result<f64> {
    geometry::free_interval(r, s, a, c)?;
    check_unit(xi)?;
    Ok(AffineFree.select(a, r, s, c, xi))
}

pub fn affine_free_invert(a: f64, r: f64, s: f64, c: f64, d: f64) -> Result<f64> {
    let interval = geometry::free_interval(r, s, a, c)?;
    check_membership(&interval, d, c * (s - r))?;
    Ok(AffineFree.preimage(a, r, s, c, interval.clamp(d)))
}

pub fn identity_initial_eval(xi: f64) -> f64 {
    IdentityInitial.select(xi)
}

fn check_membership(interval: &Interval, d: f64, reach: f64) -> Result<()> {
    if !interval.contains_within(d, INVERSION_RTOL * reach.max(1.0)) {
        return Err(Error::ValueOutsideInterval {
            value: d,
            lo: interval.lo,
            hi: interval.hi,
        });
    }
    Ok(())
}
