//! Normal + uniform mixture fitted by EM.
//!
//! The uniform component lives on `[min, max]` of the samples and is not
//! re-estimated. The normal component starts at the histogram mode with
//! Freedman–Diaconis bins, weight 0.9 and the sample standard deviation.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const MIN_SAMPLES: usize = 100;
const MAX_ITER: usize = 200;
const REL_TOL: f64 = 1e-8;
const INIT_WEIGHT: f64 = 0.9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureFit {
    pub weight_normal: f64,
    pub mean: f64,
    pub stddev: f64,
    pub uniform_lo: f64,
    pub uniform_hi: f64,
    /// Estimated bias.
    pub b_hat: f64,
    /// Center of the most populated histogram bin.
    pub mode: f64,
    pub sample_mean: f64,
    pub n_samples: usize,
    pub iterations: usize,
    pub log_likelihood: f64,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Histogram mode with Freedman–Diaconis bin width (falls back to √n bins
/// when the interquartile range vanishes).
pub fn histogram_mode(samples: &[f64]) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let (lo, hi) = (s[0], s[s.len() - 1]);
    if hi == lo {
        return lo;
    }
    let n = s.len() as f64;
    let iqr = quantile(&s, 0.75) - quantile(&s, 0.25);
    let bins = if iqr > 0.0 {
        let h = 2.0 * iqr / n.cbrt();
        ((hi - lo) / h).ceil().clamp(1.0, 10_000.0) as usize
    } else {
        n.sqrt().ceil() as usize
    };
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &x in &s {
        let b = (((x - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let best = counts
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
        .map(|(i, _)| i)
        .unwrap_or(0);
    lo + (best as f64 + 0.5) * width
}

fn normal_pdf(x: f64, mu: f64, sd: f64) -> f64 {
    let z = (x - mu) / sd;
    (-0.5 * z * z).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt())
}

/// Fits the mixture and reports the bias estimate.
///
/// `b_hat = |sample mean − fitted normal mean|`, or
/// `|sample mean − reference_mean|` when a reference is supplied.
pub fn estimate_bias(samples: &[f64], reference_mean: Option<f64>) -> Result<MixtureFit> {
    if samples.len() < MIN_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "mixture fit needs at least {MIN_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("samples contain non-finite values".into()));
    }
    let n = samples.len() as f64;
    let lo = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi == lo {
        return Err(Error::ZeroVariance);
    }
    let sample_mean = samples.iter().sum::<f64>() / n;
    let sample_sd = (samples.iter().map(|x| (x - sample_mean).powi(2)).sum::<f64>() / n).sqrt();
    let sd_floor = 1e-6 * (hi - lo);
    let u = 1.0 / (hi - lo);

    let mode = histogram_mode(samples);
    let mut w = INIT_WEIGHT;
    let mut mu = mode;
    let mut sd = sample_sd.max(sd_floor);
    let mut resp = vec![0.0; samples.len()];
    let mut ll_prev = f64::NEG_INFINITY;
    let mut ll = ll_prev;
    let mut iterations = 0;

    for it in 1..=MAX_ITER {
        iterations = it;
        ll = 0.0;
        for (r, &x) in resp.iter_mut().zip(samples) {
            let a = w * normal_pdf(x, mu, sd);
            let b = (1.0 - w) * u;
            let tot = a + b;
            *r = if tot > 0.0 { a / tot } else { 0.0 };
            ll += tot.max(f64::MIN_POSITIVE).ln();
        }
        let rs: f64 = resp.iter().sum();
        w = (rs / n).clamp(0.0, 1.0);
        if rs > 0.0 {
            mu = resp.iter().zip(samples).map(|(r, x)| r * x).sum::<f64>() / rs;
            let var = resp.iter().zip(samples).map(|(r, x)| r * (x - mu).powi(2)).sum::<f64>() / rs;
            sd = var.sqrt().max(sd_floor);
        }
        if ll_prev.is_finite() && ((ll - ll_prev) / ll_prev.abs().max(1e-300)).abs() < REL_TOL {
            break;
        }
        ll_prev = ll;
    }

    let b_hat = match reference_mean {
        Some(r) => (sample_mean - r).abs(),
        None => (sample_mean - mu).abs(),
    };
    Ok(MixtureFit {
        weight_normal: w,
        mean: mu,
        stddev: sd,
        uniform_lo: lo,
        uniform_hi: hi,
        b_hat,
        mode,
        sample_mean,
        n_samples: samples.len(),
        iterations,
        log_likelihood: ll,
    })
}
