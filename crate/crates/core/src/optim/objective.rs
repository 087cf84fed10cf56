use rand_distr::{Distribution, StandardNormal};

use crate::{seed, Error, Result};

/// A parameter site for the shift rule: the angle read by the circuit is
/// `scale * theta[slot]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftSite {
    pub slot: usize,
    pub scale: f64,
}

/// A stochastic objective `F(θ, ξ)`; the noise realization of each call is
/// determined by `index`.
pub trait Objective: Sync {
    fn dim(&self) -> usize;

    fn eval(&self, theta: &[f64], index: u64) -> Result<f64>;

    /// Sites the shift rule differentiates through. By default each
    /// parameter enters once with unit scale.
    fn shift_sites(&self) -> Result<Vec<ShiftSite>> {
        Ok((0..self.dim()).map(|slot| ShiftSite { slot, scale: 1.0 }).collect())
    }

    /// Evaluation with site `site` displaced by `delta` angle units.
    fn eval_shifted(&self, theta: &[f64], site: usize, delta: f64, index: u64) -> Result<f64> {
        let sites = self.shift_sites()?;
        let s = sites
            .get(site)
            .ok_or_else(|| Error::InvalidArgument(format!("no shift site {site}")))?;
        let mut t = theta.to_vec();
        t[s.slot] += delta / s.scale;
        self.eval(&t, index)
    }

    /// Exact gradient of the ideal objective, when one is available. Used
    /// for stationarity probes, never by the estimators.
    fn exact_gradient(&self, _theta: &[f64]) -> Option<Result<Vec<f64>>> {
        None
    }
}

type ValueFn = Box<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type GradFn = Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// A closure objective with optional constant bias and additive Gaussian
/// noise, for analytic test functions.
pub struct FnObjective {
    dim: usize,
    f: ValueFn,
    grad: Option<GradFn>,
    bias: f64,
    noise_sd: f64,
    seed: u64,
}

impl FnObjective {
    pub fn new(dim: usize, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        FnObjective {
            dim,
            f: Box::new(f),
            grad: None,
            bias: 0.0,
            noise_sd: 0.0,
            seed: 0,
        }
    }

    pub fn with_gradient(mut self, g: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        self.grad = Some(Box::new(g));
        self
    }

    /// Adds `bias` to every evaluation.
    pub fn with_bias(mut self, bias: f64) -> Self {
        self.bias = bias;
        self
    }

    /// Adds `N(0, sd²)` noise keyed by `(seed, index)`.
    pub fn with_noise(mut self, sd: f64, seed: u64) -> Self {
        self.noise_sd = sd;
        self.seed = seed;
        self
    }

    pub fn value(&self, theta: &[f64]) -> f64 {
        (self.f)(theta)
    }

    pub fn gradient(&self, theta: &[f64]) -> Option<Vec<f64>> {
        self.grad.as_ref().map(|g| g(theta))
    }
}

impl Objective for FnObjective {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, theta: &[f64], index: u64) -> Result<f64> {
        if theta.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: theta.len(),
            });
        }
        let mut v = (self.f)(theta) + self.bias;
        if self.noise_sd > 0.0 {
            let z: f64 = StandardNormal.sample(&mut seed::rng(self.seed, index));
            v += self.noise_sd * z;
        }
        Ok(v)
    }

    fn exact_gradient(&self, theta: &[f64]) -> Option<Result<Vec<f64>>> {
        self.gradient(theta).map(Ok)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_shift_moves_one_slot() {
        let f = FnObjective::new(2, |t| t[0] + 10.0 * t[1]);
        assert_eq!(f.eval_shifted(&[0.0, 0.0], 1, 0.5, 0).unwrap(), 5.0);
    }

    #[test]
    fn noise_is_keyed_by_index() {
        let f = FnObjective::new(1, |_| 0.0).with_noise(1.0, 3);
        assert_eq!(f.eval(&[0.0], 1).unwrap(), f.eval(&[0.0], 1).unwrap());
        assert_ne!(f.eval(&[0.0], 1).unwrap(), f.eval(&[0.0], 2).unwrap());
    }
}
