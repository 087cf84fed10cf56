use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::Serialize;

use crate::sim::MAX_QUBITS;
use crate::{seed, Error, Result, Tolerances};

/// Row-stochastic assignment matrix. Row `β` is the true outcome, column
/// `α` the recorded one: `P[β, α] = Pr(record α | true β)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReadoutModel {
    n: usize,
    p: Vec<f64>,
}

fn check_n(n: usize) -> Result<usize> {
    if n > MAX_QUBITS {
        return Err(Error::TooManyQubits(n));
    }
    Ok(1usize << n)
}

impl ReadoutModel {
    /// Validates entries in `[0, 1]` and unit row sums.
    pub fn from_rows(n: usize, p: Vec<f64>) -> Result<Self> {
        let dim = check_n(n)?;
        if p.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: p.len(),
            });
        }
        let tol = Tolerances::get().row_sum;
        for (r, row) in p.chunks(dim).enumerate() {
            if let Some(x) = row.iter().find(|x| !(0.0..=1.0).contains(*x)) {
                return Err(Error::Readout(format!("entry {x} in row {r} outside [0, 1]")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > tol {
                return Err(Error::Readout(format!("row {r} sums to {s}, not 1")));
            }
        }
        Ok(ReadoutModel { n, p })
    }

    /// Normalizes each row of a nonnegative matrix, then validates.
    pub fn from_weights(n: usize, mut w: Vec<f64>) -> Result<Self> {
        let dim = check_n(n)?;
        if w.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: w.len(),
            });
        }
        for (r, row) in w.chunks_mut(dim).enumerate() {
            let s: f64 = row.iter().sum();
            if !(s > 0.0) || row.iter().any(|x| *x < 0.0) {
                return Err(Error::Readout(format!("row {r} has no admissible mass")));
            }
            for x in row {
                *x /= s;
            }
        }
        ReadoutModel::from_rows(n, w)
    }

    pub fn identity(n: usize) -> Result<Self> {
        let dim = check_n(n)?;
        let mut p = vec![0.0; dim * dim];
        for i in 0..dim {
            p[i * dim + i] = 1.0;
        }
        Ok(ReadoutModel { n, p })
    }

    /// Single-bit-flip model: the diagonal is `x` on the all-zeros row and
    /// `y` elsewhere; each row's residue is split equally over its
    /// Hamming-distance-1 neighbors.
    pub fn realistic(x: f64, y: f64, n: usize) -> Result<Self> {
        for v in [x, y] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::Probability(v));
            }
        }
        let diag: Vec<f64> = (0..check_n(n)?).map(|b| if b == 0 { x } else { y }).collect();
        ReadoutModel::single_flip_with_diagonal(n, &diag)
    }

    /// Symmetric single-bit-flip leakage: every Hamming-1 neighbor receives
    /// `q`, the diagonal keeps `1 − n q`.
    pub fn symmetric_flip(q: f64, n: usize) -> Result<Self> {
        let d = 1.0 - n as f64 * q;
        if !(0.0..=1.0).contains(&q) || d < 0.0 {
            return Err(Error::Probability(q));
        }
        let diag = vec![d; check_n(n)?];
        ReadoutModel::single_flip_with_diagonal(n, &diag)
    }

    fn single_flip_with_diagonal(n: usize, diag: &[f64]) -> Result<Self> {
        let dim = check_n(n)?;
        let mut w = vec![0.0; dim * dim];
        for b in 0..dim {
            w[b * dim + b] = diag[b];
            if n > 0 {
                let share = (1.0 - diag[b]) / n as f64;
                for q in 0..n {
                    w[b * dim + (b ^ (1 << q))] = share;
                }
            }
        }
        ReadoutModel::from_weights(n, w)
    }

    /// Lowers every diagonal entry by `c` (clamped at zero), spreads the
    /// removed mass equally over the Hamming-1 neighbors, and renormalizes.
    pub fn perturb_diagonal(&self, c: f64) -> Result<Self> {
        if !(c >= 0.0) {
            return Err(Error::InvalidArgument(format!("diagonal perturbation {c} must be nonnegative")));
        }
        let dim = self.dim();
        let mut w = self.p.clone();
        for b in 0..dim {
            let take = c.min(w[b * dim + b]);
            w[b * dim + b] -= take;
            if self.n > 0 {
                for q in 0..self.n {
                    w[b * dim + (b ^ (1 << q))] += take / self.n as f64;
                }
            } else {
                w[b * dim + b] += take;
            }
        }
        ReadoutModel::from_weights(self.n, w)
    }

    /// Random sparse row-stochastic matrix. Each entry survives with
    /// probability `1 − sparsity` and carries an exponential weight damped
    /// toward high column indices; every row keeps at least one entry.
    pub fn random(n: usize, sparsity: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&sparsity) {
            return Err(Error::Probability(sparsity));
        }
        let dim = check_n(n)?;
        let mut rng = seed::rng(seed, 0);
        let mut w = vec![0.0; dim * dim];
        for r in 0..dim {
            let row = &mut w[r * dim..(r + 1) * dim];
            for (c, x) in row.iter_mut().enumerate() {
                let keep = sparsity == 0.0 || rng.random::<f64>() >= sparsity;
                let e: f64 = Exp1.sample(&mut rng);
                if keep {
                    *x = (e + 1e-3) * (-3.0 * c as f64 / dim as f64).exp();
                }
            }
            if row.iter().all(|x| *x == 0.0) {
                let c = rng.random_range(0..dim);
                row[c] = 1.0;
            }
        }
        ReadoutModel::from_weights(n, w)
    }

    /// A fixed 16×16 random assignment matrix with each row renormalized
    /// (the tabulated rows sum to between 0.99 and 1.01 because of
    /// rounding).
    pub fn reference_random() -> Self {
        ReadoutModel::from_weights(4, P_RAND.iter().flatten().copied().collect())
            .expect("reference matrix is admissible")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn get(&self, truth: usize, recorded: usize) -> f64 {
        self.p[truth * self.dim() + recorded]
    }

    pub fn row(&self, truth: usize) -> &[f64] {
        let d = self.dim();
        &self.p[truth * d..(truth + 1) * d]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.p
    }

    /// Fraction of exactly-zero entries.
    pub fn zero_fraction(&self) -> f64 {
        self.p.iter().filter(|x| **x == 0.0).count() as f64 / self.p.len() as f64
    }

    /// `q[α] = Σ_β probs[β] P[β, α]`.
    pub fn corrupt(&self, probs: &[f64]) -> Result<Vec<f64>> {
        let dim = self.dim();
        if probs.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: probs.len(),
            });
        }
        let mut q = vec![0.0; dim];
        for (b, &pb) in probs.iter().enumerate() {
            if pb == 0.0 {
                continue;
            }
            for (qa, &pba) in q.iter_mut().zip(self.row(b)) {
                *qa += pb * pba;
            }
        }
        Ok(q)
    }

    /// Row-major CSV, one true-outcome row per line, no header.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for r in 0..self.dim() {
            let row: Vec<String> = self.row(r).iter().map(|x| format!("{x:?}")).collect();
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let rows: Vec<Vec<f64>> = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                l.split(',')
                    .map(|f| {
                        f.trim()
                            .parse::<f64>()
                            .map_err(|e| Error::Readout(format!("bad entry {f:?}: {e}")))
                    })
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<_>>()?;
        let dim = rows.len();
        if !dim.is_power_of_two() {
            return Err(Error::Readout(format!("{dim} rows is not a power of two")));
        }
        if let Some(r) = rows.iter().position(|r| r.len() != dim) {
            return Err(Error::Readout(format!("row {r} has {} columns, expected {dim}", rows[r].len())));
        }
        ReadoutModel::from_rows(dim.trailing_zeros() as usize, rows.concat())
    }
}

/// `|c − x|`: the offset between an SPSA perturbation size and a diagonal
/// assignment probability.
pub fn btilde(c: f64, x: f64) -> f64 {
    (c - x).abs()
}

/// Single-qubit assignment probabilities of a public device.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeviceReadout {
    pub name: &'static str,
    pub qubits: usize,
    /// `p(1|0)`.
    pub p10: f64,
    /// `p(0|1)`.
    pub p01: f64,
    /// The tabulated bias value, kept verbatim.
    pub btilde: f64,
}

impl DeviceReadout {
    /// `|p(0|1) − p(1|0)|`, which can differ from the tabulated `btilde`
    /// in the last digit.
    pub fn asymmetry(&self) -> f64 {
        (self.p01 - self.p10).abs()
    }

    /// The single-flip model with `x = 1 − p(1|0)` and `y = 1 − p(0|1)`.
    pub fn model(&self, n: usize) -> Result<ReadoutModel> {
        ReadoutModel::realistic(1.0 - self.p10, 1.0 - self.p01, n)
    }

    pub fn by_name(name: &str) -> Option<DeviceReadout> {
        let key = name.trim().to_ascii_lowercase();
        let key = key.strip_prefix("ibmq_").unwrap_or(&key);
        DEVICES.iter().copied().find(|d| d.name == key)
    }
}

pub const DEVICES: [DeviceReadout; 7] = [
    DeviceReadout { name: "armonk", qubits: 1, p10: 0.0322, p01: 0.0358, btilde: 0.00359 },
    DeviceReadout { name: "lima", qubits: 5, p10: 0.0078, p01: 0.0260, btilde: 0.0182 },
    DeviceReadout { name: "santiago", qubits: 5, p10: 0.0274, p01: 0.0448, btilde: 0.0174 },
    DeviceReadout { name: "bogota", qubits: 5, p10: 0.0496, p01: 0.1916, btilde: 0.1402 },
    DeviceReadout { name: "belem", qubits: 5, p10: 0.0052, p01: 0.0352, btilde: 0.0300 },
    DeviceReadout { name: "quito", qubits: 5, p10: 0.0186, p01: 0.0548, btilde: 0.0362 },
    DeviceReadout { name: "manila", qubits: 5, p10: 0.0114, p01: 0.034, btilde: 0.0226 },
];

#[rustfmt::skip]
const P_RAND: [[f64; 16]; 16] = [
    [0.55, 0.27, 0.17, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00],
    [0.58, 0.14, 0.16, 0.04, 0.00, 0.02, 0.04, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00],
    [0.10, 0.10, 0.60, 0.13, 0.01, 0.01, 0.02, 0.00, 0.00, 0.01, 0.01, 0.00, 0.00, 0.00, 0.00, 0.00],
    [0.32, 0.64, 0.01, 0.01, 0.02, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00],
    [0.30, 0.68, 0.01, 0.00, 0.01, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00],
    [0.02, 0.52, 0.44, 0.00, 0.00, 0.01, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00],
    [0.90, 0.06, 0.01, 0.01, 0.00, 0.02, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00],
    [0.94, 0.02, 0.02, 0.01, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00],
    [0.25, 0.29, 0.13, 0.28, 0.00, 0.00, 0.00, 0.02, 0.02, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00],
    [0.35, 0.05, 0.38, 0.19, 0.01, 0.01, 0.01, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00],
    [0.32, 0.27, 0.09, 0.07, 0.19, 0.03, 0.03, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00],
    [0.81, 0.10, 0.06, 0.01, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00],
    [0.41, 0.02, 0.24, 0.01, 0.30, 0.01, 0.00, 0.01, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00],
    [0.42, 0.46, 0.07, 0.02, 0.01, 0.00, 0.02, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00],
    [0.15, 0.18, 0.64, 0.03, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00],
    [0.10, 0.75, 0.08, 0.03, 0.01, 0.00, 0.01, 0.01, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00, 0.00],
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_readout_is_identity() {
        assert_eq!(ReadoutModel::realistic(1.0, 1.0, 4).unwrap(), ReadoutModel::identity(4).unwrap());
    }

    #[test]
    fn realistic_rows_and_support() {
        let m = ReadoutModel::realistic(0.9678, 0.9642, 4).unwrap();
        assert!((m.get(0, 0) - 0.9678).abs() < 1e-15);
        for b in 0..16 {
            let s: f64 = m.row(b).iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
            for a in 0..16usize {
                if (a ^ b).count_ones() >= 2 {
                    assert_eq!(m.get(b, a), 0.0);
                }
            }
            if b > 0 {
                assert!((m.get(b, b) - 0.9642).abs() < 1e-15);
            }
        }
        // the residue of row 0 is split over its four neighbors
        assert!((m.get(0, 4) - 0.0322 / 4.0).abs() < 1e-15);
    }

    #[test]
    fn realistic_rejects_out_of_range() {
        assert!(ReadoutModel::realistic(0.0, 0.5, 2).is_err());
        assert!(ReadoutModel::realistic(0.5, 1.2, 2).is_err());
    }

    #[test]
    fn random_is_deterministic_and_stochastic() {
        let a = ReadoutModel::random(4, 0.6, 42).unwrap();
        let b = ReadoutModel::random(4, 0.6, 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, ReadoutModel::random(4, 0.6, 43).unwrap());
        let dense = ReadoutModel::random(3, 0.0, 1).unwrap();
        assert_eq!(dense.zero_fraction(), 0.0);
        let z = a.zero_fraction();
        assert!(z > 0.45 && z < 0.75, "zero fraction {z}");
        // low columns carry more mass than high columns
        let low: f64 = (0..16).map(|r| a.row(r)[..4].iter().sum::<f64>()).sum();
        let high: f64 = (0..16).map(|r| a.row(r)[12..].iter().sum::<f64>()).sum();
        assert!(low > high);
    }

    #[test]
    fn reference_random_is_row_stochastic() {
        let m = ReadoutModel::reference_random();
        for r in 0..16 {
            assert!((m.row(r).iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        assert!(m.zero_fraction() > 0.6);
    }

    #[test]
    fn corrupt_point_mass_returns_row() {
        let m = ReadoutModel::random(2, 0.3, 9).unwrap();
        let mut p = vec![0.0; 4];
        p[2] = 1.0;
        assert_eq!(m.corrupt(&p).unwrap(), m.row(2).to_vec());
        assert!(m.corrupt(&[1.0]).is_err());
    }

    #[test]
    fn bell_leakage() {
        let m = ReadoutModel::symmetric_flip(0.02, 2).unwrap();
        let q = m.corrupt(&[0.5, 0.0, 0.0, 0.5]).unwrap();
        assert!((q[1] - 0.02).abs() < 1e-15);
        assert!((q[2] - 0.02).abs() < 1e-15);
    }

    #[test]
    fn csv_roundtrip_and_rejection() {
        let m = ReadoutModel::random(2, 0.2, 5).unwrap();
        assert_eq!(ReadoutModel::from_csv(&m.to_csv()).unwrap(), m);
        let bad = "0.6,0.5\n0.0,1.0\n";
        let err = ReadoutModel::from_csv(bad).unwrap_err().to_string();
        assert!(err.contains("sums to"), "{err}");
    }

    #[test]
    fn device_table() {
        let armonk = DeviceReadout::by_name("ibmq_armonk").unwrap();
        assert_eq!(armonk.btilde, 0.00359);
        assert!((armonk.asymmetry() - 0.0036).abs() < 1e-12);
        let m = armonk.model(4).unwrap();
        assert!((m.get(0, 0) - 0.9678).abs() < 1e-15);
        assert!(DeviceReadout::by_name("nowhere").is_none());
    }

    #[test]
    fn perturbed_diagonal() {
        let m = ReadoutModel::identity(2).unwrap().perturb_diagonal(0.04).unwrap();
        assert!((m.get(3, 3) - 0.96).abs() < 1e-15);
        assert!((m.get(3, 1) - 0.02).abs() < 1e-15);
        assert_eq!(m.get(3, 0), 0.0);
        assert_eq!(btilde(0.2, 0.17), (0.2f64 - 0.17).abs());
    }
}
