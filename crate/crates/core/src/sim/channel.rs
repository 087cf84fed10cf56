use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::{pauli, CMatrix};
use crate::{Error, Result, Tolerances};

/// Standard noise channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    BitFlip,
    Dephasing,
    Depolarizing,
}

/// A set of Kraus operators acting on `targets`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    operators: Vec<CMatrix>,
    targets: Vec<usize>,
}

impl KrausChannel {
    /// Validates shape and completeness `Σ E†E = I`.
    pub fn new(operators: Vec<CMatrix>, targets: Vec<usize>) -> Result<Self> {
        let dim = 1usize << targets.len();
        if operators.is_empty() {
            return Err(Error::InvalidArgument("channel needs at least one Kraus operator".into()));
        }
        for e in &operators {
            if e.rows() != dim || e.cols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: e.rows(),
                });
            }
        }
        let mut sum = CMatrix::zeros(dim, dim);
        for e in &operators {
            sum = &sum + &e.adjoint().matmul(e);
        }
        let defect = sum.max_abs_diff(&CMatrix::identity(dim));
        if defect > Tolerances::get().completeness {
            return Err(Error::Incomplete(defect));
        }
        Ok(KrausChannel { operators, targets })
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.operators
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn arity(&self) -> usize {
        self.targets.len()
    }
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Probability(p))
    }
}

fn single_qubit_kraus(kind: ChannelKind, p: f64) -> Vec<CMatrix> {
    let s = |x: f64| Complex64::new(x.sqrt(), 0.0);
    match kind {
        ChannelKind::BitFlip => vec![pauli::i2().scale(s(1.0 - p)), pauli::x().scale(s(p))],
        ChannelKind::Dephasing => vec![pauli::i2().scale(s(1.0 - p)), pauli::z().scale(s(p))],
        ChannelKind::Depolarizing => {
            let [i, x, y, z] = pauli::basis();
            vec![
                i.scale(s(1.0 - 0.75 * p)),
                x.scale(s(p / 4.0)),
                y.scale(s(p / 4.0)),
                z.scale(s(p / 4.0)),
            ]
        }
    }
}

/// Builds a standard channel on `targets` (arity 1 or 2).
///
/// Depolarizing realizes `ρ ↦ (1−p)ρ + p Tr(ρ) I/2^k` through the Pauli
/// twirl over the `k`-qubit Pauli group. Two-qubit bit-flip and dephasing
/// apply the single-qubit channel independently to both targets. Kraus
/// operators with zero weight are dropped, so `p = 0` yields `{I}`.
pub fn make_channel(kind: ChannelKind, p: f64, targets: &[usize]) -> Result<KrausChannel> {
    check_probability(p)?;
    let ops = match targets.len() {
        1 => single_qubit_kraus(kind, p),
        2 => match kind {
            ChannelKind::Depolarizing => {
                let paulis = pauli::basis();
                let mut ops = Vec::with_capacity(16);
                for (a, pa) in paulis.iter().enumerate() {
                    for (b, pb) in paulis.iter().enumerate() {
                        let w = if a == 0 && b == 0 { 1.0 - 15.0 * p / 16.0 } else { p / 16.0 };
                        ops.push(pa.kron(pb).scale(Complex64::new(w.sqrt(), 0.0)));
                    }
                }
                ops
            }
            _ => {
                let one = single_qubit_kraus(kind, p);
                let mut ops = Vec::with_capacity(4);
                for hi in &one {
                    for lo in &one {
                        ops.push(hi.kron(lo));
                    }
                }
                ops
            }
        },
        k => {
            return Err(Error::InvalidArgument(format!(
                "channel arity must be 1 or 2, got {k}"
            )))
        }
    };
    let ops: Vec<CMatrix> = ops
        .into_iter()
        .filter(|e| e.as_slice().iter().any(|z| z.norm() > 0.0))
        .collect();
    KrausChannel::new(ops, targets.to_vec())
}
