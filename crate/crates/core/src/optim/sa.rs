use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{GradEstimator, Objective, StepSchedule};
use crate::{seed, Error, Result};

/// Iterates whose norm exceeds this are treated as divergent.
pub const DIVERGENCE_NORM: f64 = 1e6;

// Sub-stream tags so that perturbations, estimator evaluations and the
// per-iterate monitor draw from disjoint seed spaces.
const STREAM_PERTURB: u64 = 1;
const STREAM_EVAL: u64 = 2;
const STREAM_MONITOR: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunOptions {
    /// Probe `∥∇f(θ_k)∥²` when `(k − 1) % probe_every == 0`; zero disables.
    pub probe_every: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { probe_every: 5 }
    }
}

/// One stochastic-approximation run. Row `k` (1-based) holds the iterate
/// `θ_k` before the update, so `thetas[0] = θ_0` as supplied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub thetas: Vec<Vec<f64>>,
    /// `F(θ_k, ξ)` from a dedicated monitor evaluation.
    pub fvals: Vec<f64>,
    pub grad_norm_sq: Vec<Option<f64>>,
    pub alphas: Vec<f64>,
    /// `c_k` (or the shift `s`).
    pub sizes: Vec<f64>,
    /// Estimator evaluations spent up to and including iteration `k`;
    /// monitor and probe evaluations are not counted.
    pub evals_cumulative: Vec<u64>,
    /// The iterate after the last update.
    pub theta_final: Vec<f64>,
    pub seed: u64,
    pub estimator: GradEstimator,
    pub schedule: StepSchedule,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.fvals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fvals.is_empty()
    }

    pub fn p(&self) -> usize {
        self.theta_final.len()
    }

    pub fn probes(&self) -> impl Iterator<Item = f64> + '_ {
        self.grad_norm_sq.iter().flatten().copied()
    }

    pub fn min_grad_norm_sq(&self) -> Option<f64> {
        self.probes().reduce(f64::min)
    }

    pub fn mean_grad_norm_sq(&self) -> Option<f64> {
        let (s, n) = self.probes().fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
        (n > 0).then(|| s / n as f64)
    }

    pub fn total_evals(&self) -> u64 {
        self.evals_cumulative.last().copied().unwrap_or(0)
    }

    pub fn csv_header(p: usize) -> String {
        let mut h = String::from("k");
        for i in 0..p {
            let _ = write!(h, ",theta_{i}");
        }
        h.push_str(",fval,grad_norm_sq,alpha_k,c_k,evals_cumulative");
        h
    }

    pub fn to_csv(&self) -> String {
        let mut s = Trajectory::csv_header(self.p());
        s.push('\n');
        for k in 0..self.len() {
            let _ = write!(s, "{}", k + 1);
            for t in &self.thetas[k] {
                let _ = write!(s, ",{}", fmt_f64(*t));
            }
            let probe = self.grad_norm_sq[k].map(fmt_f64).unwrap_or_default();
            let _ = writeln!(
                s,
                ",{},{},{},{},{}",
                fmt_f64(self.fvals[k]),
                probe,
                fmt_f64(self.alphas[k]),
                fmt_f64(self.sizes[k]),
                self.evals_cumulative[k]
            );
        }
        s
    }
}

/// Shortest round-trip representation.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

fn check_iterate(theta: &[f64], k: usize) -> Result<()> {
    if let Some(i) = theta.iter().position(|x| !x.is_finite()) {
        return Err(Error::Diverged {
            k,
            reason: format!("theta[{i}] = {}", theta[i]),
        });
    }
    let norm = theta.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > DIVERGENCE_NORM {
        return Err(Error::Diverged {
            k,
            reason: format!("|theta| = {norm:.3e} exceeds {DIVERGENCE_NORM:.0e}"),
        });
    }
    Ok(())
}

/// `θ_{k+1} = θ_k − α_k g_k` for `k = 1..K`.
///
/// Every random quantity is derived from `seed`: perturbation draws from
/// `(seed, k)`, estimator and monitor evaluation indices from a running
/// counter hashed with `seed`.
pub fn sa_run<O: Objective + ?Sized>(
    obj: &O,
    est: &GradEstimator,
    sched: &StepSchedule,
    theta0: &[f64],
    k_max: usize,
    seed: u64,
    opts: RunOptions,
) -> Result<Trajectory> {
    if k_max == 0 {
        return Err(Error::InvalidArgument("K must be at least 1".into()));
    }
    if theta0.len() != obj.dim() {
        return Err(Error::DimensionMismatch {
            expected: obj.dim(),
            got: theta0.len(),
        });
    }
    est.validate()?;
    sched.validate()?;
    if let StepSchedule::FixedBudget { budget, .. } = *sched {
        if budget != k_max {
            return Err(Error::InvalidArgument(format!(
                "fixed-budget schedule is sized for {budget} iterations but K = {k_max}"
            )));
        }
    }
    est.evals_per_estimate(obj)?;
    let perturb_stream = seed::derive(seed, STREAM_PERTURB);
    let eval_stream = seed::derive(seed, STREAM_EVAL);
    let monitor_stream = seed::derive(seed, STREAM_MONITOR);

    let mut traj = Trajectory {
        thetas: Vec::with_capacity(k_max),
        fvals: Vec::with_capacity(k_max),
        grad_norm_sq: Vec::with_capacity(k_max),
        alphas: Vec::with_capacity(k_max),
        sizes: Vec::with_capacity(k_max),
        evals_cumulative: Vec::with_capacity(k_max),
        theta_final: Vec::new(),
        seed,
        estimator: *est,
        schedule: *sched,
    };
    let mut theta = theta0.to_vec();
    let mut evals = 0u64;
    for k in 1..=k_max {
        check_iterate(&theta, k)?;
        let fval = obj.eval(&theta, seed::derive(monitor_stream, k as u64))?;
        let probe = if opts.probe_every > 0 && (k - 1) % opts.probe_every == 0 {
            obj.exact_gradient(&theta)
                .transpose()?
                .map(|g| g.iter().map(|x| x * x).sum::<f64>())
        } else {
            None
        };
        let mut rng = seed::rng(perturb_stream, k as u64);
        // Estimator evaluations use consecutive hashed indices so noise
        // across ξ¹, ξ² and across iterations is independent.
        let base = seed::derive(eval_stream, k as u64);
        let e = est.estimate(obj, &theta, k, &mut rng, base)?;
        let a = sched.alpha_k(k);
        evals += e.evals;

        traj.thetas.push(theta.clone());
        traj.fvals.push(fval);
        traj.grad_norm_sq.push(probe);
        traj.alphas.push(a);
        traj.sizes.push(e.size);
        traj.evals_cumulative.push(evals);

        for (t, g) in theta.iter_mut().zip(&e.grad) {
            *t -= a * g;
        }
    }
    check_iterate(&theta, k_max + 1)?;
    traj.theta_final = theta;
    Ok(traj)
}

/// Draws `θ_R` with `P(R = k) = α_k / Σ α_l`; defined for diminishing
/// schedules only.
pub fn select_random_iterate(traj: &Trajectory, sched: &StepSchedule, seed: u64) -> Result<Vec<f64>> {
    let idx = select_random_index(traj.len(), sched, &mut seed::rng(seed, 0))?;
    Ok(traj.thetas[idx].clone())
}

/// Zero-based index drawn with weights `α_1..α_K`.
pub fn select_random_index<R: Rng + ?Sized>(k_max: usize, sched: &StepSchedule, rng: &mut R) -> Result<usize> {
    if !matches!(sched, StepSchedule::Diminishing { .. }) {
        return Err(Error::InvalidArgument(
            "random-iterate selection is defined for diminishing step sizes only".into(),
        ));
    }
    if k_max == 0 {
        return Err(Error::InvalidArgument("empty trajectory".into()));
    }
    let w: Vec<f64> = (1..=k_max).map(|k| sched.alpha_k(k)).collect();
    let total: f64 = w.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, wi) in w.iter().enumerate() {
        if u < *wi {
            return Ok(i);
        }
        u -= wi;
    }
    Ok(k_max - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optim::FnObjective;

    fn quad() -> FnObjective {
        FnObjective::new(3, |t| 0.5 * t.iter().map(|x| x * x).sum::<f64>()).with_gradient(|t| t.to_vec())
    }

    #[test]
    fn constant_objective_leaves_theta_fixed() {
        let f = FnObjective::new(2, |_| 1.0);
        let sched = StepSchedule::FixedBudget { alpha: 0.5, budget: 20 };
        let tr = sa_run(&f, &GradEstimator::spsa(0.1), &sched, &[0.3, -0.2], 20, 1, RunOptions::default()).unwrap();
        assert!(tr.thetas.iter().all(|t| t == &vec![0.3, -0.2]));
        assert_eq!(tr.theta_final, vec![0.3, -0.2]);
    }

    #[test]
    fn quadratic_descends() {
        let sched = StepSchedule::FixedBudget { alpha: 1.0, budget: 200 };
        let tr = sa_run(&quad(), &GradEstimator::spsa(0.1), &sched, &[1.0, -1.0, 0.5], 200, 9, RunOptions { probe_every: 1 }).unwrap();
        let first = tr.grad_norm_sq[0].unwrap();
        let last = tr.grad_norm_sq[199].unwrap();
        assert!(last < first, "{last} !< {first}");
        assert_eq!(tr.total_evals(), 400);
    }

    #[test]
    fn reproducible() {
        let f = quad().with_noise(0.1, 4);
        let sched = StepSchedule::Diminishing { alpha: 0.5, gamma: 0.75 };
        let run = |s| sa_run(&f, &GradEstimator::TwoPoint { c: 0.1 }, &sched, &[1.0, 1.0, 1.0], 50, s, RunOptions::default()).unwrap();
        assert_eq!(run(3), run(3));
        assert_ne!(run(3).theta_final, run(4).theta_final);
    }

    #[test]
    fn divergence_is_reported() {
        let f = FnObjective::new(1, |t| -1e9 * t[0] * t[0]);
        let sched = StepSchedule::Diminishing { alpha: 10.0, gamma: 1.0 };
        let err = sa_run(&f, &GradEstimator::ParamShift { s: 0.5 }, &sched, &[1.0], 100, 0, RunOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Diverged { .. }), "{err}");
    }

    #[test]
    fn fixed_budget_must_match_k() {
        let sched = StepSchedule::FixedBudget { alpha: 1.0, budget: 10 };
        assert!(sa_run(&quad(), &GradEstimator::spsa(0.1), &sched, &[0.0; 3], 11, 0, RunOptions::default()).is_err());
    }

    #[test]
    fn csv_layout() {
        let sched = StepSchedule::FixedBudget { alpha: 1.0, budget: 6 };
        let tr = sa_run(&quad(), &GradEstimator::spsa(0.1), &sched, &[0.1, 0.2, 0.3], 6, 0, RunOptions::default()).unwrap();
        let csv = tr.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "k,theta_0,theta_1,theta_2,fval,grad_norm_sq,alpha_k,c_k,evals_cumulative");
        assert_eq!(lines.len(), 7);
        // probes at k = 1 and k = 6 only
        assert!(!lines[1].split(',').nth(5).unwrap().is_empty());
        assert!(lines[2].split(',').nth(5).unwrap().is_empty());
        assert!(!lines[6].split(',').nth(5).unwrap().is_empty());
        assert!(lines[6].ends_with(",12"));
    }

    #[test]
    fn selection_weights() {
        let sched = StepSchedule::Diminishing { alpha: 1.0, gamma: 1.0 };
        let mut rng = seed::rng(0, 0);
        assert_eq!(select_random_index(1, &sched, &mut rng).unwrap(), 0);
        let n = 100_000;
        let ones = (0..n).filter(|_| select_random_index(2, &sched, &mut rng).unwrap() == 0).count();
        // P(k=1) = 2/3
        let p = 2.0 / 3.0;
        let sd = (n as f64 * p * (1.0 - p)).sqrt();
        assert!((ones as f64 - n as f64 * p).abs() < 3.0 * sd);
        let fixed = StepSchedule::FixedBudget { alpha: 1.0, budget: 2 };
        assert!(select_random_index(2, &fixed, &mut rng).is_err());
    }
}
