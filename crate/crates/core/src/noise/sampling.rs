use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::{seed, Error, Result, Tolerances};

/// Multinomial draw of `shots` outcomes from `probs`, seeded.
pub fn sample_counts(probs: &[f64], shots: u64, seed: u64) -> Result<Vec<u64>> {
    sample_counts_with(probs, shots, &mut seed::rng(seed, 0))
}

/// Multinomial draw using the caller's generator, as a chain of
/// conditional binomials.
pub fn sample_counts_with<R: Rng + ?Sized>(probs: &[f64], shots: u64, rng: &mut R) -> Result<Vec<u64>> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be positive".into()));
    }
    if let Some(&p) = probs.iter().find(|p| !(**p >= 0.0 && **p <= 1.0 + 1e-12)) {
        return Err(Error::Probability(p));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > Tolerances::get().row_sum {
        return Err(Error::InvalidArgument(format!("probabilities sum to {total}")));
    }
    let mut counts = vec![0u64; probs.len()];
    let mut left = shots;
    let mut mass = 1.0f64;
    for (i, &p) in probs.iter().enumerate() {
        if left == 0 {
            break;
        }
        if i + 1 == probs.len() || mass <= p {
            counts[i] = left;
            break;
        }
        let q = (p / mass).clamp(0.0, 1.0);
        let k = if q == 0.0 {
            0
        } else {
            Binomial::new(left, q).expect("valid binomial").sample(rng)
        };
        counts[i] = k;
        left -= k;
        mass -= p;
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_mass() {
        let c = sample_counts(&[1.0, 0.0, 0.0, 0.0], 500, 3).unwrap();
        assert_eq!(c, vec![500, 0, 0, 0]);
    }

    #[test]
    fn deterministic_and_conserving() {
        let p = [0.1, 0.2, 0.3, 0.4];
        let a = sample_counts(&p, 1000, 17).unwrap();
        assert_eq!(a, sample_counts(&p, 1000, 17).unwrap());
        assert_eq!(a.iter().sum::<u64>(), 1000);
    }

    #[test]
    fn rejects_zero_shots() {
        assert!(sample_counts(&[1.0], 0, 0).is_err());
    }

    #[test]
    fn large_sample_within_three_sigma() {
        let p = [0.05, 0.25, 0.0, 0.4, 0.3];
        let n = 1_000_000u64;
        let c = sample_counts(&p, n, 99).unwrap();
        for (pi, ci) in p.iter().zip(&c) {
            let sd = (n as f64 * pi * (1.0 - pi)).sqrt();
            assert!((*ci as f64 - n as f64 * pi).abs() <= 3.0 * sd + 1e-9, "{ci} vs {pi}");
        }
    }
}
