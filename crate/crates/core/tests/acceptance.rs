//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the process exits non-zero if any fails.

use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;

use lipschitz_measure::measure::{
    draw_rng, ks_critical_1pct, lebesgue_cylinder, marginal_ks_check, mc_probability, oracle_probability,
    recovered_noise_ks, sample_halfline_noise, sample_noise, sample_pinned_noise, Constraint, CylinderEvent,
    Domain,
};
use lipschitz_measure::selectors::AffineBridge;
use lipschitz_measure::{
    build_bridge, build_halfline, build_pinned_left, invert_bridge, invert_halfline, invert_pinned_left,
    midpoint_interval, BridgeSpec, NodeId, Result, Selectors,
};

const SEED: u64 = 0x00AC_CE97;

type Criterion = fn() -> Result<(bool, String)>;

fn spec<R: Rng>(rng: &mut R) -> BridgeSpec {
    let r = rng.random_range(0.0..6.0);
    let s = r + rng.random_range(0.05..6.0);
    let c = rng.random_range(0.05..5.0);
    let a = rng.random_range(-10.0..10.0);
    let b = a + rng.random_range(-1.0..=1.0) * c * (s - r);
    BridgeSpec::new(r, s, a, b, c).unwrap()
}

fn max_abs_diff(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)
}

/// Largest `|x_i - x_j| - c |t_i - t_j|` over all pairs, by direct enumeration.
fn pairwise_violation(times: &[f64], values: &[f64], c: f64) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    for i in 0..times.len() {
        for j in i + 1..times.len() {
            worst = worst.max((values[j] - values[i]).abs() - c * (times[j] - times[i]));
        }
    }
    worst
}

fn ac1() -> Result<(bool, String)> {
    let n = 10_000u64;
    let worst = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = draw_rng(SEED ^ 1, i);
            let sp = spec(&mut rng);
            let path = build_bridge(&sp, &sample_noise(10, &mut rng)?, &AffineBridge)?;
            // exact O(N) scan for every path, full O(N^2) enumeration on a subset
            let mut v = path.max_lipschitz_violation();
            if i % 50 == 0 {
                v = v.max(pairwise_violation(&path.times(), &path.values, sp.c));
            }
            Ok(v / (1e-9 * sp.reach()))
        })
        .try_reduce(|| f64::NEG_INFINITY, |x, y| Ok(x.max(y)))?;
    Ok((
        worst <= 1.0,
        format!("{n} paths at depth 10, worst violation {worst:.2e} x 1e-9 c(s-r)"),
    ))
}

fn ac2() -> Result<(bool, String)> {
    let n = 1_000u64;
    let mismatches = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = draw_rng(SEED ^ 2, i);
            let sp = spec(&mut rng);
            let depth = (i % 9) as u32;
            let deep = sample_noise(depth + 1, &mut rng)?;
            let coarse = build_bridge(&sp, &deep.truncated(depth)?, &AffineBridge)?;
            let fine = build_bridge(&sp, &deep, &AffineBridge)?;
            let same = (0..coarse.values.len())
                .all(|j| fine.values[2 * j].to_bits() == coarse.values[j].to_bits());
            Ok(u64::from(!same))
        })
        .sum::<Result<u64>>()?;
    Ok((mismatches == 0, format!("{n} cases with n in 0..=8, {mismatches} bitwise mismatches")))
}

fn ac3() -> Result<(bool, String)> {
    let n = 1_000u64;
    let sel = Selectors::AFFINE;
    let errs = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = draw_rng(SEED ^ 3, i);
            let sp = spec(&mut rng);
            let path = build_bridge(&sp, &sample_noise(6, &mut rng)?, &AffineBridge)?;
            let rebuilt = build_bridge(&sp, &invert_bridge(&path, &sp, &AffineBridge)?, &AffineBridge)?;
            let e_bridge = max_abs_diff(&path.values, &rebuilt.values);

            let pl = build_pinned_left(sp.a, sp.r, sp.s, sp.c, &sample_pinned_noise(6, &mut rng)?, sel)?;
            let back = build_pinned_left(sp.a, sp.r, sp.s, sp.c, &invert_pinned_left(&pl, sel)?, sel)?;
            let e_left = max_abs_diff(&pl.values, &back.values);

            let r: f64 = rng.random_range(0.0..2.9);
            let segments = (3.0 - (r.floor() + 1.0)) as usize + 1;
            let hl = build_halfline(sp.a, r, sp.c, &sample_halfline_noise(segments, 4, &mut rng)?, 3, sel)?;
            let back = build_halfline(sp.a, r, sp.c, &invert_halfline(&hl, sel)?, 3, sel)?;
            let e_half = max_abs_diff(&hl.points().1, &back.points().1);
            Ok([e_bridge, e_left, e_half])
        })
        .try_reduce(|| [0.0; 3], |x, y| Ok([x[0].max(y[0]), x[1].max(y[1]), x[2].max(y[2])]))?;
    Ok((
        errs.iter().all(|&e| e <= 1e-12),
        format!(
            "{n} paths each, max |rebuilt - original|: bridge {:.1e}, pinned-left {:.1e}, half-line {:.1e}",
            errs[0], errs[1], errs[2]
        ),
    ))
}

fn ac4() -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    let mut bitwise = 0usize;
    let mut total = 0usize;
    for i in 0..100u64 {
        let mut rng = draw_rng(SEED ^ 4, i);
        let base = spec(&mut rng);
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        let sp = BridgeSpec::new(base.r, base.s, base.a, base.a + sign * base.reach(), base.c)?;
        let depth = 1 + (i % 10) as u32;
        let path = build_bridge(&sp, &sample_noise(depth, &mut rng)?, &AffineBridge)?;
        let scale = sp.a.abs().max(sp.b.abs()).max(sp.reach()).max(1.0);
        for (j, &x) in path.values.iter().enumerate() {
            let line = sp.a + (j as f64 / (1u64 << depth) as f64) * (sp.b - sp.a);
            worst = worst.max((x - line).abs() / scale);
            bitwise += usize::from(x == line);
            total += 1;
        }
    }
    Ok((
        worst <= 1e-12,
        format!("100 boundary specs, {bitwise}/{total} grid values bitwise on the line, worst relative gap {worst:.1e}"),
    ))
}

fn ac5() -> Result<(bool, String)> {
    let n = 100_000u64;
    let crit = ks_critical_1pct(n as usize);
    let mut worst_mid = 0.0f64;
    let mut worst_rec = 0.0f64;
    let mut i = 0u64;
    let mut specs = 0u64;
    while specs < 10 {
        let sp = spec(&mut draw_rng(SEED ^ 5, i));
        i += 1;
        if midpoint_interval(&sp)?.width() < 1e-3 * sp.reach() {
            continue;
        }
        worst_mid = worst_mid.max(marginal_ks_check(&sp, NodeId::ROOT, n, SEED + specs)? / crit);
        let level = 1 + (specs % 3) as u32;
        let node = NodeId::new(level, 2 * (specs % (1 << (level - 1))) + 1)?;
        let (d, used) = recovered_noise_ks(&sp, node, 3, n, SEED + 100 + specs)?;
        worst_rec = worst_rec.max(d / ks_critical_1pct(used));
        specs += 1;
    }
    Ok((
        worst_mid < 1.0 && worst_rec < 1.0,
        format!(
            "10 specs, n = {n}; worst midpoint KS {:.3} x critical, worst recovered-noise KS {:.3} x critical",
            worst_mid, worst_rec
        ),
    ))
}

fn fixture() -> (BridgeSpec, CylinderEvent) {
    let sp = BridgeSpec::new(0.0, 1.0, 0.0, 0.0, 1.0).unwrap();
    let event = CylinderEvent::new(
        [0.25, 0.5, 0.75]
            .into_iter()
            .map(|t| Constraint { t, lo: Some(0.0), hi: None })
            .collect(),
    )
    .unwrap();
    (sp, event)
}

fn ac6() -> Result<(bool, String)> {
    let (sp, event) = fixture();
    let mc = mc_probability(&Domain::Bridge(sp), &event, 1_000_000, 2, SEED ^ 6)?;
    let oracle = oracle_probability(&sp, &event, 2, 256)?;
    let gap = (mc.mean - oracle.value).abs();
    let allowed = 3.0 * mc.std_error + oracle.error_indicator;
    Ok((
        oracle.error_indicator <= 1e-3 && gap <= allowed,
        format!(
            "MC {:.5} +- {:.5}, oracle {:.6} (refinement gap {:.1e}); |diff| {:.2e} <= {:.2e}",
            mc.mean, mc.std_error, oracle.value, oracle.error_indicator, gap, allowed
        ),
    ))
}

fn ac7() -> Result<(bool, String)> {
    let sp = BridgeSpec::new(0.0, 1.0, 0.0, 0.0, 1.0)?;
    let event = CylinderEvent::new(vec![Constraint::new(0.5, 0.0, 0.5)])?;
    let mc = mc_probability(&Domain::Bridge(sp), &event, 1_000_000, 1, SEED ^ 7)?;
    let gap = (mc.mean - 0.5).abs();
    Ok((
        gap <= 3.0 * mc.std_error,
        format!("MC {:.5} +- {:.5} vs 0.5, |diff| {:.2e}", mc.mean, mc.std_error, gap),
    ))
}

fn ac8() -> Result<(bool, String)> {
    let n = 1_000u64;
    let sel = Selectors::AFFINE;
    let stats = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = draw_rng(SEED ^ 8, i);
            let r: f64 = rng.random_range(0.0..2.9);
            let c = rng.random_range(0.05..5.0);
            let a = rng.random_range(-10.0..10.0);
            let depth = rng.random_range(1..=6u32);
            let segments = (3.0 - (r.floor() + 1.0)) as usize + 1;
            let path = build_halfline(a, r, c, &sample_halfline_noise(segments, depth, &mut rng)?, 3, sel)?;
            let broken = path
                .segments
                .windows(2)
                .filter(|w| w[0].last().to_bits() != w[1].first().to_bits() || w[0].s != w[1].r)
                .count();
            let (t, x) = path.points();
            let violation = pairwise_violation(&t, &x, c) / (1e-9 * c * (3.0 - r));
            Ok((broken, violation))
        })
        .try_reduce(|| (0, f64::NEG_INFINITY), |x, y| Ok((x.0 + y.0, x.1.max(y.1))))?;
    Ok((
        stats.0 == 0 && stats.1 <= 1.0,
        format!(
            "{n} draws to horizon 3, {} junction mismatches, worst all-pairs violation {:.2e} x 1e-9 c span",
            stats.0, stats.1
        ),
    ))
}

fn ac9() -> Result<(bool, String)> {
    let mut results = Vec::new();
    for domain in [
        Domain::FreeSegment { r: 0.5, s: 2.0, c: 1.5 },
        Domain::FreeHalfLine { r: 0.5, c: 1.5, horizon: 3 },
    ] {
        for l in [0.5, 1.0, 2.0] {
            let event = CylinderEvent::new(vec![Constraint::new(0.5, 0.0, l)])?;
            let est = lebesgue_cylinder(&domain, &event, 1_000, 4, SEED ^ 9)?;
            results.push((domain.name(), l, est.mean));
        }
    }
    let ok = results.iter().all(|&(_, l, m)| m == l);
    let detail = results
        .iter()
        .map(|(d, l, m)| format!("{d} L={l}: {m}"))
        .collect::<Vec<_>>()
        .join(", ");
    Ok((ok, detail))
}

fn ac10() -> Result<(bool, String)> {
    let dir = tempfile::tempdir().expect("temp dir");
    let event = dir.path().join("event.json");
    std::fs::write(
        &event,
        r#"{"domain":"bridge","params":{"r":0,"s":1,"a":0,"b":0,"c":1},
            "constraints":[{"t":0.25,"lo":0},{"t":0.5,"lo":0},{"t":0.75,"lo":0}]}"#,
    )
    .expect("write event");
    let event = event.to_str().unwrap().to_string();
    let commands: Vec<Vec<&str>> = vec![
        vec!["sample", "--n", "200", "--depth", "6", "--seed", "11", "--a", "0.3", "--b", "-0.2"],
        vec!["sample", "--domain", "halfline", "--r", "0.4", "--horizon", "3", "--n", "50", "--depth", "4", "--format", "jsonl"],
        vec!["estimate", "--event", &event, "--n", "20000", "--depth", "3", "--seed", "5"],
        vec!["oracle", "--event", &event, "--points", "32"],
    ];
    let run = |args: &[&str]| {
        let out = Command::new(env!("CARGO_BIN_EXE_lipmeasure")).args(args).output().expect("run lipmeasure");
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        out.stdout
    };
    let mut identical = 0;
    let mut bytes = 0;
    for args in &commands {
        let (first, second) = (run(args), run(args));
        bytes += first.len();
        identical += usize::from(first == second && !first.is_empty());
    }
    Ok((
        identical == commands.len(),
        format!("{identical}/{} commands byte-identical across two runs ({bytes} bytes)", commands.len()),
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 10] = [
        ("lipschitz invariant", ac1),
        ("refinement consistency", ac2),
        ("inversion round trips", ac3),
        ("forced-line degeneracy", ac4),
        ("uniform marginals", ac5),
        ("pushforward vs oracle", ac6),
        ("1-d analytic check", ac7),
        ("half-line gluing", ac8),
        ("lebesgue window", ac9),
        ("determinism", ac10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
        failed += usize::from(!ok);
        println!(
            "{} AC{} {name}: {detail} [{:.1}s]",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            start.elapsed().as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
