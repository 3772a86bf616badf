//! Plain Monte Carlo for image measures of cylinder events.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::event::{CylinderEvent, Domain, ResolvedEvent};
use crate::measure::sampling::{draw_rng, unit};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub seed: u64,
    pub depth: u32,
}

/// Whether draw `i` of the batch lands in the event, for `i in 0..n_samples`.
///
/// Draw `i` uses stream `i` of `seed` regardless of thread scheduling, so two
/// events evaluated with the same seed see identical paths.
pub fn indicators(
    domain: &Domain,
    event: &CylinderEvent,
    n_samples: u64,
    depth: u32,
    seed: u64,
) -> Result<Vec<bool>> {
    if !domain.is_probability() {
        return Err(Error::NonProbabilityMeasure);
    }
    domain.validate()?;
    let resolved = event.resolve(domain, depth)?;
    (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = draw_rng(seed, i);
            Ok(resolved.holds(&domain.sample(depth, &mut rng, 0.0)?))
        })
        .collect()
}

fn binomial(hits: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 0.0);
    }
    let p = hits as f64 / n as f64;
    (p, (p * (1.0 - p) / n as f64).sqrt())
}

/// Fraction of sampled paths satisfying every constraint, with its binomial
/// standard error.
pub fn mc_probability(
    domain: &Domain,
    event: &CylinderEvent,
    n_samples: u64,
    depth: u32,
    seed: u64,
) -> Result<Estimate> {
    let hits = indicators(domain, event, n_samples, depth, seed)?
        .into_iter()
        .filter(|&b| b)
        .count() as u64;
    let (mean, std_error) = binomial(hits, n_samples);
    Ok(Estimate {
        mean,
        std_error,
        n_samples,
        seed,
        depth,
    })
}

/// Measure of a free-start cylinder event whose `x(r)` constraint is a
/// finite window `J`.
///
/// The initial selector is the identity, so `x(r)` is the real coordinate
/// itself and the measure factorises as `|J|` times the probability of the
/// remaining constraints when `x(r)` is uniform on `J`.
pub fn lebesgue_cylinder(
    domain: &Domain,
    event: &CylinderEvent,
    n_samples: u64,
    depth: u32,
    seed: u64,
) -> Result<Estimate> {
    if domain.is_probability() {
        return Err(Error::InvalidDomain(format!(
            "{} carries a probability measure; use the Monte Carlo probability estimator",
            domain.name()
        )));
    }
    domain.validate()?;
    let start = domain.start();
    let window = event
        .constraints
        .iter()
        .find(|c| c.t == start)
        .ok_or(Error::UnboundedInitialConstraint)?;
    let (lo, hi) = (window.lower(), window.upper());
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::UnboundedInitialConstraint);
    }
    let zero = Estimate {
        mean: 0.0,
        std_error: 0.0,
        n_samples,
        seed,
        depth,
    };
    if hi <= lo || event.is_empty_set() {
        return Ok(zero);
    }
    let length = hi - lo;
    let rest = CylinderEvent::new(
        event
            .constraints
            .iter()
            .filter(|c| c.t != start)
            .copied()
            .collect(),
    )?;
    let resolved: ResolvedEvent = rest.resolve(domain, depth)?;
    let hits = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = draw_rng(seed, i);
            let a = lo + length * unit(&mut rng);
            let path = domain.sample(depth, &mut rng, a.min(hi))?;
            Ok(u64::from(resolved.holds(&path)))
        })
        .sum::<Result<u64>>()?;
    let (p, se) = binomial(hits, n_samples);
    Ok(Estimate {
        mean: length * p,
        std_error: length * se,
        ..zero
    })
}
