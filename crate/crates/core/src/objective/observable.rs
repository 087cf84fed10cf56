use num_complex::Complex64;

use crate::linalg::CMatrix;
use crate::sim::{DensityMatrix, MAX_QUBITS};
use crate::{Error, Graph, Result, Tolerances};

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    Diagonal(Vec<f64>),
    Dense(CMatrix),
}

/// A Hermitian observable. Diagonal observables are stored as their
/// diagonal only.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    n: usize,
    label: String,
    repr: Repr,
}

impl Observable {
    pub fn diagonal(diag: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        let dim = diag.len();
        if !dim.is_power_of_two() {
            return Err(Error::InvalidArgument(format!("diagonal length {dim} is not a power of two")));
        }
        let n = dim.trailing_zeros() as usize;
        if n > MAX_QUBITS {
            return Err(Error::TooManyQubits(n));
        }
        Ok(Observable {
            n,
            label: label.into(),
            repr: Repr::Diagonal(diag),
        })
    }

    /// Validates Hermiticity. Matrices with no off-diagonal entries and a
    /// real diagonal are stored diagonally.
    pub fn from_matrix(m: CMatrix, label: impl Into<String>) -> Result<Self> {
        let dim = m.rows();
        if !m.is_square() || !dim.is_power_of_two() {
            return Err(Error::InvalidArgument("observable must be 2^n x 2^n".into()));
        }
        let h = m.hermitian_defect();
        if h > Tolerances::get().hermitian {
            return Err(Error::NonHermitian(h));
        }
        if m.is_diagonal() && (0..dim).all(|i| m[(i, i)].im == 0.0) {
            return Observable::diagonal((0..dim).map(|i| m[(i, i)].re).collect(), label);
        }
        let n = dim.trailing_zeros() as usize;
        if n > MAX_QUBITS {
            return Err(Error::TooManyQubits(n));
        }
        Ok(Observable {
            n,
            label: label.into(),
            repr: Repr::Dense(m),
        })
    }

    /// `|index⟩⟨index|`.
    pub fn projector(n: usize, index: usize) -> Result<Self> {
        let dim = 1usize << n;
        if index >= dim {
            return Err(Error::DimensionMismatch { expected: dim, got: index });
        }
        let mut d = vec![0.0; dim];
        d[index] = 1.0;
        Observable::diagonal(d, format!("projector |{index}>"))
    }

    /// `C = Σ w_ij (Z_i Z_j − I)/2`, whose eigenvalue on a basis state is
    /// minus its cut value.
    pub fn maxcut(g: &Graph) -> Result<Self> {
        if g.n() > MAX_QUBITS {
            return Err(Error::TooManyQubits(g.n()));
        }
        let diag = (0..1usize << g.n()).map(|x| -g.cut_value(x)).collect();
        Observable::diagonal(diag, "maxcut")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn diag(&self) -> Option<&[f64]> {
        match &self.repr {
            Repr::Diagonal(d) => Some(d),
            Repr::Dense(_) => None,
        }
    }

    pub fn matrix(&self) -> CMatrix {
        match &self.repr {
            Repr::Diagonal(d) => CMatrix::diagonal(&d.iter().map(|&x| Complex64::new(x, 0.0)).collect::<Vec<_>>()),
            Repr::Dense(m) => m.clone(),
        }
    }

    /// `Tr(ρO)`.
    pub fn expectation(&self, rho: &DensityMatrix) -> Result<f64> {
        if rho.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: rho.dim(),
            });
        }
        match &self.repr {
            Repr::Diagonal(d) => {
                let m = rho.matrix();
                Ok(d.iter().enumerate().map(|(i, x)| x * m[(i, i)].re).sum())
            }
            Repr::Dense(o) => rho.expectation(o),
        }
    }

    /// `Σ_α probs[α] diag[α]`; requires a diagonal observable.
    pub fn mean_over(&self, probs: &[f64]) -> Result<f64> {
        let d = self.diag().ok_or(Error::NonDiagonalObservable)?;
        if probs.len() != d.len() {
            return Err(Error::DimensionMismatch {
                expected: d.len(),
                got: probs.len(),
            });
        }
        Ok(probs.iter().zip(d).map(|(p, x)| p * x).sum())
    }
}

/// `Tr(ρO)` (free-function form).
pub fn expectation(rho: &DensityMatrix, obs: &Observable) -> Result<f64> {
    obs.expectation(rho)
}
