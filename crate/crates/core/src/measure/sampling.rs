//! Seeded i.i.d. uniform noise.
//!
//! Every draw gets its own ChaCha8 stream selected by the draw index, so a
//! batch is reproducible from the seed alone and independent of how draws
//! are spread over threads.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bridge::NoiseVector;
use crate::error::Result;
use crate::extensions::{HalfLineNoise, PinnedNoise};
use crate::grid::{check_depth, interior_node_count};

/// Generator for draw `index` of the batch seeded by `seed`.
pub fn draw_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// A uniform variate on `[0, 1]`.
pub fn unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random::<f64>()
}

pub fn sample_noise<R: Rng + ?Sized>(depth: u32, rng: &mut R) -> Result<NoiseVector> {
    check_depth(depth)?;
    let values = (0..interior_node_count(depth)).map(|_| unit(rng)).collect();
    NoiseVector::new(depth, values)
}

/// Endpoint coordinate first, then the interior.
pub fn sample_pinned_noise<R: Rng + ?Sized>(depth: u32, rng: &mut R) -> Result<PinnedNoise> {
    let endpoint = unit(rng);
    PinnedNoise::new(endpoint, sample_noise(depth, rng)?)
}

pub fn sample_halfline_noise<R: Rng + ?Sized>(
    segments: usize,
    depth: u32,
    rng: &mut R,
) -> Result<HalfLineNoise> {
    let first = sample_pinned_noise(depth, rng)?;
    let unit = (1..segments)
        .map(|_| sample_pinned_noise(depth, rng))
        .collect::<Result<_>>()?;
    Ok(HalfLineNoise { first, unit })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_noise() {
        let a = sample_noise(6, &mut draw_rng(7, 3)).unwrap();
        let b = sample_noise(6, &mut draw_rng(7, 3)).unwrap();
        assert_eq!(a, b);
        let c = sample_noise(6, &mut draw_rng(7, 4)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn uniform_moments_and_independence() {
        let n = 100_000;
        let draws: Vec<NoiseVector> = (0..n).map(|i| sample_noise(2, &mut draw_rng(11, i)).unwrap()).collect();
        let col = |k: usize| draws.iter().map(|d| d.values()[k]).collect::<Vec<_>>();
        let (x, y) = (col(0), col(2));
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let (mx, my) = (mean(&x), mean(&y));
        let bound = 3.0 * (1.0 / 12f64.sqrt()) / (n as f64).sqrt();
        assert!((mx - 0.5).abs() < bound, "mean {mx}");
        assert!((my - 0.5).abs() < bound, "mean {my}");
        let cov: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / n as f64;
        let var = |v: &[f64], m: f64| v.iter().map(|a| (a - m).powi(2)).sum::<f64>() / n as f64;
        let rho = cov / (var(&x, mx) * var(&y, my)).sqrt();
        assert!(rho.abs() < 0.01, "rho {rho}");
        assert!(x.iter().all(|v| (0.0..=1.0).contains(v)));
    }
}
