use std::f64::consts::TAU;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Rng;

/// Noise amplitude of trend and seasonal shapes, as a fraction of the range.
pub const NOISE_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeriesShape {
    LinearTrend,
    Seasonal,
    RandomWalk,
    /// Positive parts of a whole, summing to 100.
    CategoricalShares,
}

/// Draws `n_points` values of the given shape inside `[lo, hi]`.
pub fn procedural_series(
    shape: SeriesShape,
    n_points: usize,
    (lo, hi): (f64, f64),
    rng: &mut Rng,
) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidArgument(format!("value range ({lo}, {hi}) is empty")));
    }
    let min_points = if shape == SeriesShape::CategoricalShares { 3 } else { 2 };
    if n_points < min_points {
        return Err(Error::InvalidArgument(format!(
            "{shape:?} needs at least {min_points} points, got {n_points}"
        )));
    }
    let span = hi - lo;
    let noise = NOISE_FRACTION * span;
    let clamp = |v: f64| v.clamp(lo, hi);
    let values = match shape {
        SeriesShape::LinearTrend => {
            let a = lo + span * rng.gen_range(0.1..0.4);
            let b = lo + span * rng.gen_range(0.6..0.9);
            let (start, end) = if rng.gen_bool(0.5) { (a, b) } else { (b, a) };
            (0..n_points)
                .map(|i| {
                    let t = i as f64 / (n_points - 1) as f64;
                    clamp(start + (end - start) * t + rng.gen_range(-noise..=noise))
                })
                .collect()
        }
        SeriesShape::Seasonal => {
            let mid = lo + span * rng.gen_range(0.4..0.6);
            let amp = span * rng.gen_range(0.15..0.35);
            let period = rng.gen_range(4..=8) as f64;
            let phase = rng.gen_range(0.0..TAU);
            (0..n_points)
                .map(|i| {
                    let wave = (TAU * i as f64 / period + phase).sin();
                    clamp(mid + amp * wave + rng.gen_range(-noise..=noise))
                })
                .collect()
        }
        SeriesShape::RandomWalk => {
            let mut v = lo + span * rng.gen_range(0.2..0.8);
            let mut out = Vec::with_capacity(n_points);
            for _ in 0..n_points {
                out.push(v);
                v = clamp(v + span * rng.gen_range(-0.15..=0.15));
            }
            out
        }
        SeriesShape::CategoricalShares => {
            if lo > 0.0 || hi < 100.0 {
                return Err(Error::InvalidArgument(format!(
                    "shares lie in [0, 100] but the range is ({lo}, {hi})"
                )));
            }
            let weights: Vec<f64> = (0..n_points).map(|_| rng.gen_range(0.5..3.0)).collect();
            let total: f64 = weights.iter().sum();
            let mut shares: Vec<f64> = weights.iter().map(|w| 100.0 * w / total).collect();
            // put the rounding residue on the largest share
            let residue = 100.0 - shares.iter().sum::<f64>();
            let largest = argmax(&shares);
            shares[largest] += residue;
            shares
        }
    };
    Ok(values)
}

fn argmax(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0)
}

pub fn round_to(value: f64, decimals: u32) -> f64 {
    let scale = 10f64.powi(decimals as i32);
    (value * scale).round() / scale
}

/// Rounds shares to one decimal so that they still sum to exactly 100
/// (largest remainder method over tenths).
pub fn round_shares(shares: &[f64]) -> Vec<f64> {
    let scaled: Vec<f64> = shares.iter().map(|s| s * 10.0).collect();
    let mut tenths: Vec<i64> = scaled.iter().map(|s| s.floor() as i64).collect();
    let missing = 1000 - tenths.iter().sum::<i64>();
    let mut order: Vec<usize> = (0..shares.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = scaled[a] - scaled[a].floor();
        let rb = scaled[b] - scaled[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().cycle().take(missing.max(0) as usize) {
        tenths[i] += 1;
    }
    tenths.iter().map(|&t| t as f64 / 10.0).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use proptest::prelude::*;

    #[test]
    fn shares_sum_to_one_hundred() {
        let v = procedural_series(SeriesShape::CategoricalShares, 4, (0.0, 100.0), &mut stream(3)).unwrap();
        assert_eq!(v.len(), 4);
        assert!((v.iter().sum::<f64>() - 100.0).abs() <= 1e-9);
        assert!(v.iter().all(|x| (0.0..=100.0).contains(x)));
    }

    #[test]
    fn linear_trend_is_monotone_up_to_noise() {
        for seed in 0..200 {
            let v = procedural_series(SeriesShape::LinearTrend, 5, (0.0, 10.0), &mut stream(seed)).unwrap();
            let slack = 2.0 * NOISE_FRACTION * 10.0;
            let up = v.windows(2).all(|w| w[1] - w[0] >= -slack);
            let down = v.windows(2).all(|w| w[0] - w[1] >= -slack);
            assert!(up || down, "seed {seed}: {v:?}");
            // same stream, same values
            let again = procedural_series(SeriesShape::LinearTrend, 5, (0.0, 10.0), &mut stream(seed)).unwrap();
            assert_eq!(v, again);
        }
    }

    #[test]
    fn two_point_random_walk_stays_in_range() {
        let v = procedural_series(SeriesShape::RandomWalk, 2, (0.0, 1.0), &mut stream(11)).unwrap();
        assert_eq!(v.len(), 2);
        assert!(v.iter().all(|x| (0.0..=1.0).contains(x)));
    }

    #[test]
    fn bad_arguments_are_rejected() {
        let mut rng = stream(0);
        assert!(procedural_series(SeriesShape::Seasonal, 5, (3.0, 3.0), &mut rng).is_err());
        assert!(procedural_series(SeriesShape::Seasonal, 1, (0.0, 1.0), &mut rng).is_err());
        assert!(procedural_series(SeriesShape::CategoricalShares, 2, (0.0, 100.0), &mut rng).is_err());
        assert!(procedural_series(SeriesShape::CategoricalShares, 4, (10.0, 100.0), &mut rng).is_err());
    }

    #[test]
    fn rounded_shares_keep_the_total() {
        let r = round_shares(&[33.333333, 33.333333, 33.333334]);
        assert_eq!(r.iter().map(|x| (x * 10.0).round() as i64).sum::<i64>(), 1000);
    }

    proptest! {
        #[test]
        fn values_stay_in_range(seed: u64, n in 3usize..40, lo in -1e3f64..1e3, width in 0.1f64..1e3, pick in 0usize..3) {
            let shape = [SeriesShape::LinearTrend, SeriesShape::Seasonal, SeriesShape::RandomWalk][pick];
            let hi = lo + width;
            let v = procedural_series(shape, n, (lo, hi), &mut stream(seed)).unwrap();
            prop_assert_eq!(v.len(), n);
            prop_assert!(v.iter().all(|x| *x >= lo && *x <= hi));
        }

        #[test]
        fn shares_always_total_one_hundred(seed: u64, n in 3usize..12) {
            let v = procedural_series(SeriesShape::CategoricalShares, n, (0.0, 100.0), &mut stream(seed)).unwrap();
            prop_assert!((v.iter().sum::<f64>() - 100.0).abs() <= 1e-9);
            let r = round_shares(&v);
            prop_assert_eq!(r.iter().map(|x| (x * 10.0).round() as i64).sum::<i64>(), 1000);
        }
    }
}
