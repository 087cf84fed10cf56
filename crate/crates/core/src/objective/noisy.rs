use std::fmt;
use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::noise::{sample_counts_with, ReadoutModel};
use crate::optim::{Objective, ShiftSite};
use crate::sim::{DensityMatrix, ParamCircuit};
use crate::{seed, Error, Observable, Result};

/// Number of measurement shots per evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shots {
    /// Return the exact (possibly corrupted) expectation.
    Exact,
    Finite(u64),
}

impl fmt::Display for Shots {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shots::Exact => f.write_str("exact"),
            Shots::Finite(n) => write!(f, "{n}"),
        }
    }
}

impl Serialize for Shots {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Shots::Exact => s.serialize_str("exact"),
            Shots::Finite(n) => s.serialize_u64(*n),
        }
    }
}

impl<'de> Deserialize<'de> for Shots {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(u64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(0) => Err(serde::de::Error::custom("shots must be positive")),
            Raw::Num(n) => Ok(Shots::Finite(n)),
            Raw::Str(s) if s.eq_ignore_ascii_case("exact") => Ok(Shots::Exact),
            Raw::Str(s) => Err(serde::de::Error::custom(format!("shots must be a positive integer or \"exact\", got {s:?}"))),
        }
    }
}

/// Physical noise applied on top of the ideal circuit.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NoiseConfig {
    /// Depolarizing strength after each one-qubit gate.
    pub p1: f64,
    /// Depolarizing strength after each two-qubit gate.
    pub p2: f64,
    pub readout: Option<ReadoutModel>,
    /// Constant offset added to every evaluation.
    pub extra_bias: f64,
}

impl NoiseConfig {
    pub fn none() -> Self {
        NoiseConfig::default()
    }

    /// Gate fidelities 0.999 (one-qubit) and 0.99 (two-qubit).
    pub fn gate_defaults() -> Self {
        NoiseConfig {
            p1: 0.001,
            p2: 0.01,
            ..NoiseConfig::default()
        }
    }

    pub fn is_ideal(&self) -> bool {
        self.p1 == 0.0 && self.p2 == 0.0 && self.readout.is_none() && self.extra_bias == 0.0
    }
}

/// The noisy objective `F(θ, ξ)`.
///
/// Each evaluation simulates the circuit with the configured gate noise,
/// corrupts the outcome distribution with the read-out model, then either
/// returns the exact expectation or the mean over `shots` sampled outcomes
/// seeded by `(seed_stream, eval_index)`, plus `extra_bias`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisyObjective {
    ideal: ParamCircuit,
    noisy: ParamCircuit,
    observable: Observable,
    noise: NoiseConfig,
    shots: Shots,
    seed_stream: u64,
}

impl NoisyObjective {
    pub fn new(
        circuit: ParamCircuit,
        observable: Observable,
        noise: NoiseConfig,
        shots: Shots,
        seed_stream: u64,
    ) -> Result<Self> {
        if observable.n() != circuit.n() {
            return Err(Error::DimensionMismatch {
                expected: circuit.n(),
                got: observable.n(),
            });
        }
        if let Some(r) = &noise.readout {
            if r.n() != circuit.n() {
                return Err(Error::DimensionMismatch {
                    expected: circuit.n(),
                    got: r.n(),
                });
            }
        }
        let needs_diag = noise.readout.is_some() || matches!(shots, Shots::Finite(_));
        if needs_diag && observable.diag().is_none() {
            return Err(Error::NonDiagonalObservable);
        }
        if !noise.extra_bias.is_finite() {
            return Err(Error::InvalidArgument("extra_bias must be finite".into()));
        }
        let ideal = circuit.without_channels();
        let noisy = circuit.with_depolarizing(noise.p1, noise.p2)?;
        Ok(NoisyObjective {
            ideal,
            noisy,
            observable,
            noise,
            shots,
            seed_stream,
        })
    }

    /// Ideal, exact objective `f(θ)`.
    pub fn ideal(circuit: ParamCircuit, observable: Observable) -> Result<Self> {
        NoisyObjective::new(circuit, observable, NoiseConfig::none(), Shots::Exact, 0)
    }

    /// The noise-free, read-out-free, exact counterpart (`Ξ`).
    pub fn to_ideal(&self) -> NoisyObjective {
        NoisyObjective {
            ideal: self.ideal.clone(),
            noisy: self.ideal.clone(),
            observable: self.observable.clone(),
            noise: NoiseConfig::none(),
            shots: Shots::Exact,
            seed_stream: self.seed_stream,
        }
    }

    pub fn with_shots(&self, shots: Shots) -> Result<NoisyObjective> {
        NoisyObjective::new(self.ideal.clone(), self.observable.clone(), self.noise.clone(), shots, self.seed_stream)
    }

    pub fn with_noise(&self, noise: NoiseConfig) -> Result<NoisyObjective> {
        NoisyObjective::new(self.ideal.clone(), self.observable.clone(), noise, self.shots, self.seed_stream)
    }

    pub fn with_seed_stream(&self, seed_stream: u64) -> NoisyObjective {
        NoisyObjective {
            seed_stream,
            ..self.clone()
        }
    }

    pub fn circuit(&self) -> &ParamCircuit {
        &self.ideal
    }

    pub fn noisy_circuit(&self) -> &ParamCircuit {
        &self.noisy
    }

    pub fn observable(&self) -> &Observable {
        &self.observable
    }

    pub fn noise(&self) -> &NoiseConfig {
        &self.noise
    }

    pub fn shots(&self) -> Shots {
        self.shots
    }

    pub fn seed_stream(&self) -> u64 {
        self.seed_stream
    }

    pub fn p(&self) -> usize {
        self.ideal.p()
    }

    /// State after the noisy circuit.
    pub fn state(&self, theta: &[f64], shift: Option<(usize, f64)>) -> Result<DensityMatrix> {
        self.noisy.run_shifted(theta, shift)
    }

    /// Recorded-outcome distribution (after read-out corruption).
    pub fn distribution(&self, theta: &[f64], shift: Option<(usize, f64)>) -> Result<Vec<f64>> {
        let probs = self.noisy.probabilities(theta, shift)?;
        match &self.noise.readout {
            Some(r) => r.corrupt(&probs),
            None => Ok(probs),
        }
    }

    /// Exact expectation of one evaluation, `E_ξ F(θ, ξ)`.
    pub fn exact_value(&self, theta: &[f64], shift: Option<(usize, f64)>) -> Result<f64> {
        let v = match (&self.noise.readout, self.observable.diag()) {
            (_, Some(_)) => self.observable.mean_over(&self.distribution(theta, shift)?)?,
            (None, None) => self.observable.expectation(&self.state(theta, shift)?)?,
            (Some(_), None) => return Err(Error::NonDiagonalObservable),
        };
        Ok(v + self.noise.extra_bias)
    }

    /// Variance of one evaluation: single-outcome variance over `shots`,
    /// or zero for exact evaluation.
    pub fn eval_variance(&self, theta: &[f64], shift: Option<(usize, f64)>) -> Result<f64> {
        match self.shots {
            Shots::Exact => Ok(0.0),
            Shots::Finite(n) => {
                let q = self.distribution(theta, shift)?;
                let d = self.observable.diag().ok_or(Error::NonDiagonalObservable)?;
                let m: f64 = q.iter().zip(d).map(|(p, x)| p * x).sum();
                let v: f64 = q.iter().zip(d).map(|(p, x)| p * (x - m).powi(2)).sum();
                Ok(v / n as f64)
            }
        }
    }

    /// One evaluation with an optional angle shift.
    pub fn evaluate_at(&self, theta: &[f64], shift: Option<(usize, f64)>, eval_index: u64) -> Result<f64> {
        match self.shots {
            Shots::Exact => self.exact_value(theta, shift),
            Shots::Finite(n) => {
                let q = self.distribution(theta, shift)?;
                let d = self.observable.diag().ok_or(Error::NonDiagonalObservable)?;
                let mut rng = seed::rng(self.seed_stream, eval_index);
                let counts = sample_counts_with(&q, n, &mut rng)?;
                let total: f64 = counts.iter().zip(d).map(|(&c, x)| c as f64 * x).sum();
                Ok(total / n as f64 + self.noise.extra_bias)
            }
        }
    }

    /// Unshifted evaluations at the given indices; equal to calling
    /// [`evaluate`](Self::evaluate) per index, with the outcome
    /// distribution computed once.
    pub fn evaluate_batch(&self, theta: &[f64], indices: impl IntoIterator<Item = u64>) -> Result<Vec<f64>> {
        match self.shots {
            Shots::Exact => {
                let v = self.exact_value(theta, None)?;
                Ok(indices.into_iter().map(|_| v).collect())
            }
            Shots::Finite(n) => {
                let q = self.distribution(theta, None)?;
                let d = self.observable.diag().ok_or(Error::NonDiagonalObservable)?;
                indices
                    .into_iter()
                    .map(|i| {
                        let counts = sample_counts_with(&q, n, &mut seed::rng(self.seed_stream, i))?;
                        let total: f64 = counts.iter().zip(d).map(|(&c, x)| c as f64 * x).sum();
                        Ok(total / n as f64 + self.noise.extra_bias)
                    })
                    .collect()
            }
        }
    }

    /// `F(θ, ξ)` for the evaluation numbered `eval_index`.
    pub fn evaluate(&self, theta: &[f64], eval_index: u64) -> Result<f64> {
        self.evaluate_at(theta, None, eval_index)
    }

    /// `f(θ)`: the noise-free, exact expectation.
    pub fn ideal_value(&self, theta: &[f64]) -> Result<f64> {
        self.ideal_value_at(theta, None)
    }

    /// Ideal value with an optional angle shift.
    pub fn ideal_value_at(&self, theta: &[f64], shift: Option<(usize, f64)>) -> Result<f64> {
        match self.observable.diag() {
            Some(_) => self.observable.mean_over(&self.ideal.probabilities(theta, shift)?),
            None => self.observable.expectation(&self.ideal.run_shifted(theta, shift)?),
        }
    }

    /// Exact per-point bias `b(θ) = E_χ F − E_Ξ F`.
    pub fn bias_of(&self, theta: &[f64]) -> Result<f64> {
        Ok(self.exact_value(theta, None)? - self.ideal_value(theta)?)
    }

    /// Ideal gradient by the shift rule at `s = π/2`.
    pub fn ideal_gradient(&self, theta: &[f64]) -> Result<Vec<f64>> {
        let sites = self.shift_sites()?;
        let mut g = vec![0.0; self.p()];
        let ideal = |occ: usize, d: f64| self.ideal_value_at(theta, Some((occ, d)));
        for (occ, site) in sites.iter().enumerate() {
            let plus = ideal(occ, FRAC_PI_2)?;
            let minus = ideal(occ, -FRAC_PI_2)?;
            g[site.slot] += site.scale * (plus - minus) / 2.0;
        }
        Ok(g)
    }
}

impl Objective for NoisyObjective {
    fn dim(&self) -> usize {
        self.p()
    }

    fn eval(&self, theta: &[f64], index: u64) -> Result<f64> {
        self.evaluate(theta, index)
    }

    fn shift_sites(&self) -> Result<Vec<ShiftSite>> {
        self.ideal
            .occurrences()
            .into_iter()
            .map(|o| {
                if o.param.shift_rule_valid {
                    Ok(ShiftSite {
                        slot: o.param.slot,
                        scale: o.param.scale,
                    })
                } else {
                    Err(Error::NotShiftable(o.param.slot))
                }
            })
            .collect()
    }

    fn eval_shifted(&self, theta: &[f64], site: usize, delta: f64, index: u64) -> Result<f64> {
        self.evaluate_at(theta, Some((site, delta)), index)
    }

    fn exact_gradient(&self, theta: &[f64]) -> Option<Result<Vec<f64>>> {
        Some(self.ideal_gradient(theta))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::{bell_circuit, qaoa_circuit};
    use crate::Graph;

    fn qaoa(noise: NoiseConfig, shots: Shots) -> NoisyObjective {
        let g = Graph::cycle(4).unwrap();
        NoisyObjective::new(qaoa_circuit(&g, 1).unwrap(), Observable::maxcut(&g).unwrap(), noise, shots, 7).unwrap()
    }

    #[test]
    fn ideal_exact_matches_expectation() {
        let obj = qaoa(NoiseConfig::none(), Shots::Exact);
        let th = [0.4, -0.9];
        let rho = obj.circuit().run(&th).unwrap();
        let e = obj.observable().expectation(&rho).unwrap();
        assert!((obj.evaluate(&th, 0).unwrap() - e).abs() < 1e-12);
    }

    #[test]
    fn extra_bias_is_additive() {
        let th = [0.4, -0.9];
        let base = qaoa(NoiseConfig::none(), Shots::Exact).evaluate(&th, 0).unwrap();
        let noise = NoiseConfig {
            extra_bias: 0.5,
            ..NoiseConfig::none()
        };
        let obj = qaoa(noise, Shots::Exact);
        assert_eq!(obj.evaluate(&th, 3).unwrap(), base + 0.5);
        assert!((obj.bias_of(&th).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn bell_projector_bias() {
        let noise = NoiseConfig {
            readout: Some(ReadoutModel::symmetric_flip(0.02, 2).unwrap()),
            ..NoiseConfig::none()
        };
        let obj = NoisyObjective::new(bell_circuit(), Observable::projector(2, 1).unwrap(), noise, Shots::Exact, 0).unwrap();
        assert!((obj.evaluate(&[], 0).unwrap() - 0.02).abs() < 1e-12);
        assert!((obj.bias_of(&[]).unwrap() - 0.02).abs() < 1e-12);
    }

    #[test]
    fn no_noise_means_no_bias() {
        let obj = qaoa(NoiseConfig::none(), Shots::Exact);
        assert_eq!(obj.bias_of(&[1.0, 2.0]).unwrap(), 0.0);
    }

    #[test]
    fn bias_grows_with_flip_probability() {
        let th = [0.6, 0.3];
        let mut prev = 0.0;
        for q in [0.0, 0.01, 0.02, 0.05, 0.1, 0.2] {
            let noise = NoiseConfig {
                readout: Some(ReadoutModel::symmetric_flip(q, 4).unwrap()),
                ..NoiseConfig::none()
            };
            let b = qaoa(noise, Shots::Exact).bias_of(&th).unwrap().abs();
            assert!(b >= prev, "q={q}: {b} < {prev}");
            prev = b;
        }
        assert!(prev > 0.0);
    }

    #[test]
    fn periodic_in_two_pi() {
        let obj = qaoa(NoiseConfig::none(), Shots::Exact);
        let th = [0.35, 1.2];
        let f0 = obj.ideal_value(&th).unwrap();
        for i in 0..2 {
            let mut t = th;
            t[i] += 2.0 * std::f64::consts::PI;
            assert!((obj.ideal_value(&t).unwrap() - f0).abs() < 1e-9);
        }
    }

    #[test]
    fn finite_shots_are_seeded() {
        let obj = qaoa(NoiseConfig::gate_defaults(), Shots::Finite(1024));
        let th = [0.2, 0.5];
        assert_eq!(obj.evaluate(&th, 4).unwrap(), obj.evaluate(&th, 4).unwrap());
        assert_ne!(obj.evaluate(&th, 4).unwrap(), obj.evaluate(&th, 5).unwrap());
    }

    #[test]
    fn batch_matches_single_evaluations() {
        let th = [0.3, -0.8];
        for shots in [Shots::Finite(64), Shots::Exact] {
            let obj = qaoa(NoiseConfig::gate_defaults(), shots);
            let batch = obj.evaluate_batch(&th, [3, 9, 4]).unwrap();
            let single: Vec<f64> = [3, 9, 4].iter().map(|&i| obj.evaluate(&th, i).unwrap()).collect();
            assert_eq!(batch, single);
        }
    }

    #[test]
    fn shot_mean_concentrates() {
        let noise = NoiseConfig {
            readout: Some(ReadoutModel::reference_random()),
            ..NoiseConfig::gate_defaults()
        };
        let obj = qaoa(noise, Shots::Finite(1_000_000));
        let th = [0.7, -0.4];
        let exact = obj.exact_value(&th, None).unwrap();
        let xs: Vec<f64> = (0..30).map(|i| obj.evaluate(&th, i).unwrap()).collect();
        let m = xs.iter().sum::<f64>() / 30.0;
        let sd = (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / 29.0).sqrt();
        assert!((m - exact).abs() < 4.0 * sd / 30f64.sqrt(), "{m} vs {exact}");
    }

    #[test]
    fn shots_serde() {
        let s: Shots = serde_json::from_str("\"exact\"").unwrap();
        assert_eq!(s, Shots::Exact);
        let s: Shots = serde_json::from_str("1024").unwrap();
        assert_eq!(s, Shots::Finite(1024));
        assert!(serde_json::from_str::<Shots>("0").is_err());
        assert_eq!(serde_json::to_string(&Shots::Exact).unwrap(), "\"exact\"");
    }

    #[test]
    fn mismatched_readout_rejected() {
        let noise = NoiseConfig {
            readout: Some(ReadoutModel::identity(2).unwrap()),
            ..NoiseConfig::none()
        };
        let g = Graph::cycle(4).unwrap();
        assert!(NoisyObjective::new(qaoa_circuit(&g, 1).unwrap(), Observable::maxcut(&g).unwrap(), noise, Shots::Exact, 0).is_err());
    }
}
