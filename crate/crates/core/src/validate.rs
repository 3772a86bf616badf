//! Self-check suite run by `lipmeasure validate`.
//!
//! Each check carries the identifier of the acceptance criterion it mirrors
//! (`AC1` to `AC9`; `AC10`, byte-identical CLI output, is checked by the
//! CLI itself). A check may be deliberately corrupted through
//! [`ValidateOptions::inject_fault`] to confirm that it can fail.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bridge::{build_bridge, invert_bridge, refine, NoiseVector};
use crate::error::Result;
use crate::extensions::{build_halfline, build_pinned_left, invert_halfline, invert_pinned_left, Selectors};
use crate::geometry::{midpoint_interval, BridgeSpec};
use crate::grid::{nodes, NodeId};
use crate::measure::{
    draw_rng, ks_critical_1pct, ks_distance, uniform_cdf, lebesgue_cylinder, marginal_ks_check, mc_probability, oracle_probability,
    recovered_noise_ks, sample_halfline_noise, sample_noise, sample_pinned_noise, Constraint, CylinderEvent,
    Domain,
};
use crate::selectors::{AffineBridge, SmoothstepBridge};

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub id: &'static str,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub seed: u64,
    pub checks: Vec<CheckResult>,
    pub passed: usize,
    pub failed: usize,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }
}

#[derive(Debug, Clone)]
pub struct ValidateOptions {
    pub seed: u64,
    /// Divides every sample count (1 = full size).
    pub shrink: u64,
    /// Check id whose input is corrupted before the check runs.
    pub inject_fault: Option<String>,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self {
            seed: 20_240_601,
            shrink: 1,
            inject_fault: None,
        }
    }
}

/// Oracle grid for the pushforward check. At 256 points per axis the 128/256
/// levels agree to about 7e-5, well inside the 1e-3 requirement.
pub const ORACLE_POINTS: usize = 256;

/// Random feasible spec with `|b - a| <= c (s - r)`.
pub fn random_spec<R: Rng + ?Sized>(rng: &mut R) -> BridgeSpec {
    let r = rng.random_range(0.0..5.0);
    let s = r + rng.random_range(0.1..5.0);
    let c = rng.random_range(0.1..4.0);
    let a = rng.random_range(-5.0..5.0);
    let frac: f64 = rng.random_range(-1.0..=1.0);
    BridgeSpec::new(r, s, a, a + frac * c * (s - r), c).expect("feasible by construction")
}

/// Same, but pinned on the cone boundary `|b - a| = c (s - r)`.
pub fn random_forced_spec<R: Rng + ?Sized>(rng: &mut R) -> BridgeSpec {
    let sp = random_spec(rng);
    let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    BridgeSpec::new(sp.r, sp.s, sp.a, sp.a + sign * sp.c * (sp.s - sp.r), sp.c).expect("boundary is feasible")
}

struct Ctx<'a> {
    opts: &'a ValidateOptions,
}

impl Ctx<'_> {
    fn n(&self, full: u64) -> u64 {
        (full / self.opts.shrink.max(1)).max(1)
    }

    fn faulty(&self, id: &str) -> bool {
        self.opts.inject_fault.as_deref() == Some(id)
    }

    fn seed(&self, salt: u64) -> u64 {
        self.opts.seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15)
    }
}

fn check(id: &'static str, name: &'static str, outcome: Result<(bool, String)>) -> CheckResult {
    let (passed, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
    CheckResult {
        id,
        name,
        passed,
        detail,
    }
}

pub fn run(opts: &ValidateOptions) -> Report {
    let ctx = Ctx { opts };
    let checks = vec![
        check("AC1", "lipschitz_all_pairs", lipschitz(&ctx)),
        check("AC2", "refinement_consistency", refinement(&ctx)),
        check("AC3", "inversion_round_trips", round_trips(&ctx)),
        check("AC4", "forced_line", forced_line(&ctx)),
        check("AC5", "uniform_marginals", uniform_marginals(&ctx)),
        check("AC6", "pushforward_vs_oracle", pushforward(&ctx)),
        check("AC7", "analytic_half", analytic_half(&ctx)),
        check("AC8", "halfline_gluing", halfline_gluing(&ctx)),
        check("AC9", "lebesgue_window", lebesgue_window(&ctx)),
    ];
    let passed = checks.iter().filter(|c| c.passed).count();
    Report {
        seed: opts.seed,
        failed: checks.len() - passed,
        passed,
        checks,
    }
}

fn lipschitz(ctx: &Ctx) -> Result<(bool, String)> {
    let n = ctx.n(10_000);
    let seed = ctx.seed(1);
    let worst = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = draw_rng(seed, i);
            let spec = random_spec(&mut rng);
            let mut path = build_bridge(&spec, &sample_noise(10, &mut rng)?, &AffineBridge)?;
            if ctx.faulty("AC1") && i == 0 {
                path.values[1] += 2.0 * spec.c * (spec.s - spec.r);
            }
            Ok(path.max_lipschitz_violation() / spec.reach())
        })
        .try_reduce(|| f64::NEG_INFINITY, |x, y| Ok(x.max(y)))?;
    Ok((worst <= 1e-9, format!("{n} paths at depth 10, worst relative violation {worst:.3e}")))
}

fn refinement(ctx: &Ctx) -> Result<(bool, String)> {
    let n = ctx.n(1_000);
    let seed = ctx.seed(2);
    let bad = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = draw_rng(seed, i);
            let spec = random_spec(&mut rng);
            let depth = rng.random_range(0..=8u32);
            let deep = sample_noise(depth + 1, &mut rng)?;
            let coarse = build_bridge(&spec, &deep.truncated(depth)?, &AffineBridge)?;
            let mut fine = build_bridge(&spec, &deep, &AffineBridge)?;
            if ctx.faulty("AC2") && i == 0 {
                fine.values[0] = f64::from_bits(fine.values[0].to_bits() ^ 1);
            }
            let refined = refine(&spec, &coarse, deep.level(depth + 1), &AffineBridge)?;
            let restricted = fine.restricted(depth)?;
            let same = restricted.values.iter().zip(&coarse.values).all(|(x, y)| x.to_bits() == y.to_bits())
                && refined == fine;
            Ok(u64::from(!same))
        })
        .sum::<Result<u64>>()?;
    Ok((bad == 0, format!("{n} cases, {bad} mismatches")))
}

fn round_trips(ctx: &Ctx) -> Result<(bool, String)> {
    let n = ctx.n(1_000);
    let seed = ctx.seed(3);
    let sel = Selectors::AFFINE;
    let errs: Vec<[f64; 3]> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = draw_rng(seed, i);
            let spec = random_spec(&mut rng);
            let path = build_bridge(&spec, &sample_noise(6, &mut rng)?, &AffineBridge)?;
            let mut recovered = invert_bridge(&path, &spec, &AffineBridge)?;
            if ctx.faulty("AC3") && i == 0 {
                let mut values = recovered.values().to_vec();
                values[0] = (values[0] + 0.5) % 1.0;
                recovered = NoiseVector::new(6, values)?;
            }
            let rebuilt = build_bridge(&spec, &recovered, &AffineBridge)?;
            let e1 = max_abs_diff(&path.values, &rebuilt.values);

            let a = spec.a;
            let pl = build_pinned_left(a, spec.r, spec.s, spec.c, &sample_pinned_noise(6, &mut rng)?, sel)?;
            let back = build_pinned_left(a, spec.r, spec.s, spec.c, &invert_pinned_left(&pl, sel)?, sel)?;
            let e2 = max_abs_diff(&pl.values, &back.values);

            let r: f64 = rng.random_range(0.0..2.0);
            let segs = 1 + (3.0 - (r.floor() + 1.0)) as usize;
            let hl = build_halfline(a, r, spec.c, &sample_halfline_noise(segs, 4, &mut rng)?, 3, sel)?;
            let back = build_halfline(a, r, spec.c, &invert_halfline(&hl, sel)?, 3, sel)?;
            let e3 = max_abs_diff(&hl.points().1, &back.points().1);
            Ok([e1, e2, e3])
        })
        .collect::<Result<_>>()?;
    let worst = errs.iter().fold([0.0f64; 3], |acc, e| [acc[0].max(e[0]), acc[1].max(e[1]), acc[2].max(e[2])]);
    let ok = worst.iter().all(|&e| e <= 1e-12);
    Ok((
        ok,
        format!(
            "{n} paths each; max error bridge {:.2e}, pinned-left {:.2e}, half-line {:.2e}",
            worst[0], worst[1], worst[2]
        ),
    ))
}

fn max_abs_diff(x: &[f64], y: &[f64]) -> f64 {
    if x.len() != y.len() {
        return f64::INFINITY;
    }
    x.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

/// Tolerance for "exactly the straight line": a few thousand ulps of the
/// largest magnitude involved.
pub fn forced_line_tol(spec: &BridgeSpec) -> f64 {
    1e-12 * spec.a.abs().max(spec.b.abs()).max(spec.reach()).max(1.0)
}

fn forced_line(ctx: &Ctx) -> Result<(bool, String)> {
    let n = ctx.n(100);
    let seed = ctx.seed(4);
    let mut worst = 0.0f64;
    for i in 0..n {
        let mut rng = draw_rng(seed, i);
        let spec = random_forced_spec(&mut rng);
        let depth = rng.random_range(1..=10u32);
        let mut path = build_bridge(&spec, &sample_noise(depth, &mut rng)?, &AffineBridge)?;
        if ctx.faulty("AC4") && i == 0 {
            path.values[1] += 1e-3;
        }
        let cells = (1u64 << depth) as f64;
        for (j, &x) in path.values.iter().enumerate() {
            let line = spec.a + (j as f64 / cells) * (spec.b - spec.a);
            worst = worst.max((x - line).abs() / forced_line_tol(&spec));
        }
    }
    Ok((worst <= 1.0, format!("{n} boundary specs, worst deviation {worst:.3} x tolerance")))
}

fn uniform_marginals(ctx: &Ctx) -> Result<(bool, String)> {
    let n = ctx.n(100_000);
    let seed = ctx.seed(5);
    let crit = ks_critical_1pct(n as usize);
    let mut worst_direct = 0.0f64;
    let mut worst_recovered = 0.0f64;
    for i in 0..10 {
        let mut rng = draw_rng(seed, 1_000_000 + i);
        let mut spec = random_spec(&mut rng);
        while spec.reach() - (spec.b - spec.a).abs() < 1e-3 * spec.reach() {
            spec = random_spec(&mut rng);
        }
        if ctx.faulty("AC5") && i == 0 {
            // midpoints drawn through the smoothstep selector are not uniform
            let interval = midpoint_interval(&spec)?;
            let samples = (0..n)
                .map(|k| Ok(build_bridge(&spec, &sample_noise(1, &mut draw_rng(seed + i, k))?, &SmoothstepBridge)?.values[1]))
                .collect::<Result<Vec<_>>>()?;
            worst_direct = worst_direct.max(ks_distance(samples, uniform_cdf(interval.lo, interval.hi)));
        }
        worst_direct = worst_direct.max(marginal_ks_check(&spec, NodeId::ROOT, n, seed + i)?);
        let node = nodes(3).nth(1 + (i as usize % 6)).expect("depth-3 node");
        let (d, used) = recovered_noise_ks(&spec, node, 3, n, seed + 100 + i)?;
        worst_recovered = worst_recovered.max(d * (used as f64).sqrt() / (n as f64).sqrt());
    }
    Ok((
        worst_direct < crit && worst_recovered < crit,
        format!(
            "n = {n}, critical {crit:.5}; worst midpoint KS {worst_direct:.5}, worst recovered-noise KS (scaled) {worst_recovered:.5}"
        ),
    ))
}

/// `x >= 0` at 1/4, 1/2, 3/4 on the bridge 0 -> 0 over [0, 1] with c = 1.
pub fn fixture_event() -> (BridgeSpec, CylinderEvent) {
    let spec = BridgeSpec::new(0.0, 1.0, 0.0, 0.0, 1.0).expect("feasible");
    let constraints = [0.25, 0.5, 0.75]
        .into_iter()
        .map(|t| Constraint {
            t,
            lo: Some(0.0),
            hi: None,
        })
        .collect();
    (spec, CylinderEvent { constraints })
}

fn pushforward(ctx: &Ctx) -> Result<(bool, String)> {
    let (spec, event) = fixture_event();
    let oracle = oracle_probability(&spec, &event, 2, ORACLE_POINTS)?;
    let mut est = mc_probability(&Domain::Bridge(spec), &event, ctx.n(1_000_000), 2, ctx.seed(6))?;
    if ctx.faulty("AC6") {
        est.mean += 0.1;
    }
    let gap = (est.mean - oracle.value).abs();
    let allowed = 3.0 * est.std_error + oracle.error_indicator;
    Ok((
        gap <= allowed && oracle.error_indicator <= 1e-3,
        format!(
            "MC {:.6} ± {:.6}, oracle {:.6} (indicator {:.2e}), gap {gap:.2e} vs allowed {allowed:.2e}",
            est.mean, est.std_error, oracle.value, oracle.error_indicator
        ),
    ))
}

fn analytic_half(ctx: &Ctx) -> Result<(bool, String)> {
    let spec = BridgeSpec::new(0.0, 1.0, 0.0, 0.0, 1.0)?;
    let event = CylinderEvent::new(vec![Constraint::new(0.5, 0.0, 0.5)])?;
    let mut est = mc_probability(&Domain::Bridge(spec), &event, ctx.n(1_000_000), 1, ctx.seed(7))?;
    if ctx.faulty("AC7") {
        est.mean = 0.6;
    }
    let gap = (est.mean - 0.5).abs();
    Ok((
        gap <= 3.0 * est.std_error,
        format!("MC {:.6} ± {:.6}, gap {gap:.2e}", est.mean, est.std_error),
    ))
}

fn halfline_gluing(ctx: &Ctx) -> Result<(bool, String)> {
    let n = ctx.n(1_000);
    let seed = ctx.seed(8);
    let sel = Selectors::AFFINE;
    let (bad_junctions, worst) = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = draw_rng(seed, i);
            let r: f64 = rng.random_range(0.0..2.0);
            let c = rng.random_range(0.1..4.0);
            let a = rng.random_range(-5.0..5.0);
            let segs = 1 + (3.0 - (r.floor() + 1.0)) as usize;
            let depth = rng.random_range(0..=6u32);
            let mut path = build_halfline(a, r, c, &sample_halfline_noise(segs, depth, &mut rng)?, 3, sel)?;
            if ctx.faulty("AC8") && i == 0 {
                let last = path.segments.len() - 1;
                path.segments[last].values[0] += 1e-6;
            }
            let bad = path.segments.windows(2).filter(|w| w[0].last() != w[1].first()).count() as u64;
            Ok((bad, path.max_lipschitz_violation() / c))
        })
        .try_reduce(|| (0, f64::NEG_INFINITY), |x, y| Ok((x.0 + y.0, x.1.max(y.1))))?;
    Ok((
        bad_junctions == 0 && worst <= 1e-9,
        format!("{n} half-line paths to horizon 3; {bad_junctions} junction mismatches, worst violation / c {worst:.3e}"),
    ))
}

fn lebesgue_window(ctx: &Ctx) -> Result<(bool, String)> {
    let domain = Domain::FreeSegment { r: 0.0, s: 1.0, c: 1.0 };
    let mut details = Vec::new();
    let mut ok = true;
    for length in [0.5, 1.0, 2.0] {
        let event = CylinderEvent::new(vec![Constraint::new(0.0, 0.0, length)])?;
        let mut est = lebesgue_cylinder(&domain, &event, ctx.n(10_000), 4, ctx.seed(9))?;
        if ctx.faulty("AC9") {
            est.mean *= 0.5;
        }
        ok &= est.mean == length;
        details.push(format!("L = {length} -> {}", est.mean));
    }
    Ok((ok, details.join(", ")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_run_passes_and_faults_fail() {
        let opts = ValidateOptions {
            shrink: 100,
            ..Default::default()
        };
        let report = run(&opts);
        for c in &report.checks {
            assert!(c.passed, "{} failed: {}", c.id, c.detail);
        }
        for id in ["AC1", "AC2", "AC3", "AC4", "AC5", "AC6", "AC7", "AC8", "AC9"] {
            let report = run(&ValidateOptions {
                inject_fault: Some(id.to_string()),
                ..opts.clone()
            });
            let hit = report.checks.iter().find(|c| c.id == id).unwrap();
            assert!(!hit.passed, "fault in {id} went unnoticed: {}", hit.detail);
        }
    }
}
