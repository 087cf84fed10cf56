use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::perturbation::{PerturbationDist, PerturbationKind};
use super::Objective;
use crate::{Error, Result};

/// `|sin s|` below this counts as a multiple of π.
const SHIFT_EPS: f64 = 1e-12;

/// How the SPSA perturbation size evolves with the iteration count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CSchedule {
    /// `c_k = c`.
    #[default]
    Constant,
    /// `c_k = c / k^{1/6}`.
    Decaying,
}

/// A gradient estimator together with its perturbation settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GradEstimator {
    Spsa {
        c: f64,
        #[serde(default)]
        c_schedule: CSchedule,
        #[serde(default)]
        perturbation: PerturbationKind,
    },
    TwoPoint {
        c: f64,
    },
    ParamShift {
        #[serde(default = "half_pi")]
        s: f64,
    },
}

fn half_pi() -> f64 {
    FRAC_PI_2
}

/// One gradient estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub grad: Vec<f64>,
    pub evals: u64,
    /// `c_k` for SPSA and two-point, `s` for the shift rule.
    pub size: f64,
}

fn check_c(c: f64) -> Result<()> {
    if c > 0.0 && c.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("perturbation size c = {c} must be positive")))
    }
}

fn check_shift(s: f64) -> Result<()> {
    if !s.is_finite() || s.sin().abs() < SHIFT_EPS {
        Err(Error::DegenerateShift(s))
    } else {
        Ok(())
    }
}

fn check_dim<O: Objective + ?Sized>(f: &O, theta: &[f64]) -> Result<()> {
    if theta.len() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: theta.len(),
        });
    }
    Ok(())
}

fn axpy(theta: &[f64], a: f64, d: &[f64]) -> Vec<f64> {
    theta.iter().zip(d).map(|(t, x)| t + a * x).collect()
}

/// SPSA: `g_i = [F(θ + cΔ) − F(θ − cΔ)] / (2 c Δ_i)`, two evaluations with
/// indices `eval_base` and `eval_base + 1`.
pub fn spsa_gradient<O: Objective + ?Sized, R: Rng + ?Sized>(
    f: &O,
    theta: &[f64],
    c: f64,
    dist: &PerturbationDist,
    rng: &mut R,
    eval_base: u64,
) -> Result<Vec<f64>> {
    check_c(c)?;
    check_dim(f, theta)?;
    let delta = dist.sample(theta.len(), rng);
    let plus = f.eval(&axpy(theta, c, &delta), eval_base)?;
    let minus = f.eval(&axpy(theta, -c, &delta), eval_base + 1)?;
    let diff = (plus - minus) / (2.0 * c);
    Ok(delta.iter().map(|d| diff / d).collect())
}

/// Two-point Gaussian smoothing: `[F(θ + cΔ) − F(θ)] / c · Δ` with
/// `Δ ~ N(0, I)`.
pub fn two_point_gradient<O: Objective + ?Sized, R: Rng + ?Sized>(
    f: &O,
    theta: &[f64],
    c: f64,
    rng: &mut R,
    eval_base: u64,
) -> Result<Vec<f64>> {
    check_c(c)?;
    check_dim(f, theta)?;
    let delta: Vec<f64> = (0..theta.len()).map(|_| StandardNormal.sample(rng)).collect();
    let plus = f.eval(&axpy(theta, c, &delta), eval_base)?;
    let base = f.eval(theta, eval_base + 1)?;
    let diff = (plus - base) / c;
    Ok(delta.iter().map(|d| diff * d).collect())
}

/// Parameter-shift rule:
/// `g_slot = Σ_sites scale · [F(angle + s) − F(angle − s)] / (2 sin s)`.
///
/// Each site is one angle reading `scale · θ_slot`. When every parameter
/// enters once with unit scale this is the textbook `2p`-evaluation rule;
/// parameters shared by several gates cost two evaluations per gate.
pub fn psr_gradient<O: Objective + ?Sized>(f: &O, theta: &[f64], s: f64, eval_base: u64) -> Result<Vec<f64>> {
    check_shift(s)?;
    check_dim(f, theta)?;
    let sites = f.shift_sites()?;
    let denom = 2.0 * s.sin();
    let mut g = vec![0.0; theta.len()];
    for (j, site) in sites.iter().enumerate() {
        let idx = eval_base + 2 * j as u64;
        let plus = f.eval_shifted(theta, j, s, idx)?;
        let minus = f.eval_shifted(theta, j, -s, idx + 1)?;
        g[site.slot] += site.scale * (plus - minus) / denom;
    }
    Ok(g)
}

impl GradEstimator {
    pub fn spsa(c: f64) -> Self {
        GradEstimator::Spsa {
            c,
            c_schedule: CSchedule::Constant,
            perturbation: PerturbationKind::Rademacher,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            GradEstimator::Spsa { c, .. } | GradEstimator::TwoPoint { c } => check_c(c),
            GradEstimator::ParamShift { s } => check_shift(s),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GradEstimator::Spsa { .. } => "spsa",
            GradEstimator::TwoPoint { .. } => "two_point",
            GradEstimator::ParamShift { .. } => "param_shift",
        }
    }

    /// `c_k` at iteration `k ≥ 1` (or the shift `s`).
    pub fn size_at(&self, k: usize) -> f64 {
        match *self {
            GradEstimator::Spsa { c, c_schedule, .. } => match c_schedule {
                CSchedule::Constant => c,
                CSchedule::Decaying => c / (k.max(1) as f64).powf(1.0 / 6.0),
            },
            GradEstimator::TwoPoint { c } => c,
            GradEstimator::ParamShift { s } => s,
        }
    }

    /// Objective evaluations spent per estimate.
    pub fn evals_per_estimate<O: Objective + ?Sized>(&self, f: &O) -> Result<u64> {
        Ok(match self {
            GradEstimator::Spsa { .. } | GradEstimator::TwoPoint { .. } => 2,
            GradEstimator::ParamShift { .. } => 2 * f.shift_sites()?.len() as u64,
        })
    }

    /// Estimate at iteration `k`; evaluation indices start at `eval_base`
    /// and are consecutive.
    pub fn estimate<O: Objective + ?Sized, R: Rng + ?Sized>(
        &self,
        f: &O,
        theta: &[f64],
        k: usize,
        rng: &mut R,
        eval_base: u64,
    ) -> Result<Estimate> {
        let size = self.size_at(k);
        let grad = match *self {
            GradEstimator::Spsa { perturbation, .. } => {
                spsa_gradient(f, theta, size, &PerturbationDist { kind: perturbation }, rng, eval_base)?
            }
            GradEstimator::TwoPoint { .. } => two_point_gradient(f, theta, size, rng, eval_base)?,
            GradEstimator::ParamShift { s } => psr_gradient(f, theta, s, eval_base)?,
        };
        Ok(Estimate {
            grad,
            evals: self.evals_per_estimate(f)?,
            size,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optim::FnObjective;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn spsa_on_linear() {
        let a = [1.5, -2.0, 0.25];
        let f = FnObjective::new(3, move |t| a.iter().zip(t).map(|(x, y)| x * y).sum());
        let d = PerturbationDist::rademacher();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for c in [1.0, 0.1, 1e-3] {
            // one draw per sign pattern; the pattern average removes the
            // cross terms a_j Δ_j / Δ_i exactly
            let mut by_pattern = std::collections::BTreeMap::new();
            while by_pattern.len() < 8 {
                let delta = d.sample(3, &mut rng.clone());
                let g = spsa_gradient(&f, &[0.3, 0.1, -0.7], c, &d, &mut rng, 0).unwrap();
                let dot: f64 = a.iter().zip(&delta).map(|(x, y)| x * y).sum();
                for i in 0..3 {
                    assert!((g[i] - dot / delta[i]).abs() < 1e-9);
                }
                let key: Vec<i8> = delta.iter().map(|x| *x as i8).collect();
                by_pattern.entry(key).or_insert(g);
            }
            for i in 0..3 {
                let mean: f64 = by_pattern.values().map(|g| g[i]).sum::<f64>() / 8.0;
                assert!((mean - a[i]).abs() < 1e-9, "{mean} vs {}", a[i]);
            }
        }
        // in one dimension every single draw is exact
        let f1 = FnObjective::new(1, |t| 4.0 * t[0]);
        for _ in 0..10 {
            let g = spsa_gradient(&f1, &[0.2], 0.05, &d, &mut rng, 0).unwrap();
            assert!((g[0] - 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn spsa_and_psr_cancel_constant_bias() {
        let f0 = FnObjective::new(2, |t| t[0].cos() + t[0] * t[1]);
        let fb = FnObjective::new(2, |t| t[0].cos() + t[0] * t[1]).with_bias(0.7);
        let th = [0.4, -0.2];
        let d = PerturbationDist::rademacher();
        let g0 = spsa_gradient(&f0, &th, 0.1, &d, &mut ChaCha8Rng::seed_from_u64(5), 0).unwrap();
        let gb = spsa_gradient(&fb, &th, 0.1, &d, &mut ChaCha8Rng::seed_from_u64(5), 0).unwrap();
        for (a, b) in g0.iter().zip(&gb) {
            assert!((a - b).abs() < 1e-12);
        }
        let p0 = psr_gradient(&f0, &th, FRAC_PI_2, 0).unwrap();
        let pb = psr_gradient(&fb, &th, FRAC_PI_2, 0).unwrap();
        for (a, b) in p0.iter().zip(&pb) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn two_point_zero_on_constant() {
        let f = FnObjective::new(4, |_| 3.0);
        let g = two_point_gradient(&f, &[0.0; 4], 0.2, &mut ChaCha8Rng::seed_from_u64(1), 0).unwrap();
        assert!(g.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn psr_on_cosine_is_exact() {
        let f = FnObjective::new(1, |t| t[0].cos());
        for &s in &[FRAC_PI_2, 1.0, 0.3, 2.5] {
            for &t in &[0.0, 0.7, -2.1] {
                let g = psr_gradient(&f, &[t], s, 0).unwrap();
                assert!((g[0] + t.sin()).abs() < 1e-12, "s={s} t={t}");
            }
        }
    }

    #[test]
    fn degenerate_shift_and_size_rejected() {
        let f = FnObjective::new(1, |t| t[0]);
        assert!(matches!(psr_gradient(&f, &[0.0], std::f64::consts::PI, 0), Err(Error::DegenerateShift(_))));
        assert!(matches!(psr_gradient(&f, &[0.0], 0.0, 0), Err(Error::DegenerateShift(_))));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(spsa_gradient(&f, &[0.0], 0.0, &PerturbationDist::rademacher(), &mut rng, 0).is_err());
        assert!(two_point_gradient(&f, &[0.0], -1.0, &mut rng, 0).is_err());
    }

    #[test]
    fn evaluation_counts() {
        let f = FnObjective::new(5, |t| t.iter().sum());
        assert_eq!(GradEstimator::spsa(0.1).evals_per_estimate(&f).unwrap(), 2);
        assert_eq!(GradEstimator::TwoPoint { c: 0.1 }.evals_per_estimate(&f).unwrap(), 2);
        assert_eq!(GradEstimator::ParamShift { s: FRAC_PI_2 }.evals_per_estimate(&f).unwrap(), 10);
    }

    #[test]
    fn decaying_c() {
        let e = GradEstimator::Spsa {
            c: 0.2,
            c_schedule: CSchedule::Decaying,
            perturbation: PerturbationKind::Rademacher,
        };
        assert_eq!(e.size_at(1), 0.2);
        assert!((e.size_at(64) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn config_shape() {
        let e: GradEstimator = serde_json::from_str(r#"{"kind": "spsa", "c": 0.2}"#).unwrap();
        assert_eq!(e, GradEstimator::spsa(0.2));
        let e: GradEstimator = serde_json::from_str(r#"{"kind": "param_shift"}"#).unwrap();
        assert_eq!(e, GradEstimator::ParamShift { s: FRAC_PI_2 });
        assert!(serde_json::from_str::<GradEstimator>(r#"{"kind": "two_point", "c": 0.1, "x": 1}"#).is_err());
    }
}
