//! Poisson step budgets, drawn with `rand_distr`.

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};

pub fn sample_poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> Result<u64> {
    if !mean.is_finite() || mean < 0.0 {
        return Err(Error::InvalidParameter(format!("Poisson mean {mean} must be finite and >= 0")));
    }
    if mean == 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(mean).map_err(|e| Error::InvalidParameter(format!("Poisson mean {mean}: {e}")))?;
    Ok(dist.sample(rng) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samplers::RandomSource;
    use statrs::function::gamma::ln_gamma;

    fn moments(mean: f64, draws: usize, seed: u64) -> (f64, f64) {
        let mut rng = RandomSource::new(seed, 0);
        let xs: Vec<f64> = (0..draws).map(|_| sample_poisson(mean, &mut rng).unwrap() as f64).collect();
        let m = xs.iter().sum::<f64>() / draws as f64;
        let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (draws - 1) as f64;
        (m, v)
    }

    #[test]
    fn degenerate_and_invalid() {
        let mut rng = RandomSource::new(1, 0);
        assert_eq!(sample_poisson(0.0, &mut rng).unwrap(), 0);
        assert!(sample_poisson(-1.0, &mut rng).is_err());
        assert!(sample_poisson(f64::NAN, &mut rng).is_err());
    }

    #[test]
    fn small_mean_moments() {
        let (m, v) = moments(4.0, 1_000_000, 11);
        assert!((m - 4.0).abs() < 0.006, "mean {m}");
        // sd of the sample variance is sqrt((mu + 2 mu^2)/N) ~ 0.006 at mu = 4
        assert!((v - 4.0).abs() < 0.02, "var {v}");
    }

    #[test]
    fn large_mean_moments() {
        let (m, v) = moments(3000.0, 1_000_000, 12);
        let band = 3.0 * (3000.0f64 / 1e6).sqrt();
        assert!((m - 3000.0).abs() < band, "mean {m}");
        assert!((v / 3000.0 - 1.0).abs() < 0.01, "var {v}");
    }

    #[test]
    fn pmf_near_switchover_matches() {
        // per-cell z check against the exact pmf at a moderate mean
        let mean = 30.0;
        let n = 200_000;
        let mut rng = RandomSource::new(3, 0);
        let mut counts = vec![0u64; 80];
        for _ in 0..n {
            let k = sample_poisson(mean, &mut rng).unwrap() as usize;
            counts[k.min(79)] += 1;
        }
        let mut worst = 0.0f64;
        for k in 15..50 {
            let p = (-(mean) + k as f64 * mean.ln() - ln_gamma(k as f64 + 1.0)).exp();
            let z = (counts[k] as f64 - n as f64 * p) / (n as f64 * p * (1.0 - p)).sqrt();
            worst = worst.max(z.abs());
        }
        assert!(worst < 4.5, "worst z {worst}");
    }
}
