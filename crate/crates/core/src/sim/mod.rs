//! Dense statevector and density-matrix simulation.
//!
//! Basis index bit `q` holds qubit `q` (little-endian). All operations are
//! pure: they take a state by reference and return a new one.

mod channel;
mod circuit;
mod gate;
pub mod kernel;

pub use channel::{make_channel, ChannelKind, KrausChannel};
pub use circuit::{Op, ParamCircuit, ParamOccurrence};
pub use gate::{Angle, Gate, GateKind, ParamRef};

use num_complex::Complex64;

use crate::linalg::{CMatrix, ONE, ZERO};
use crate::{Error, Result, Tolerances};

/// Hard cap on register size for dense simulation.
pub const MAX_QUBITS: usize = 10;

fn check_register(n: usize) -> Result<usize> {
    if n > MAX_QUBITS {
        return Err(Error::TooManyQubits(n));
    }
    Ok(1usize << n)
}

fn check_targets(targets: &[usize], n: usize) -> Result<()> {
    for &t in targets {
        if t >= n {
            return Err(Error::QubitOutOfRange { index: t, n });
        }
    }
    Ok(())
}

/// A normalized pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩`.
    pub fn zero(n: usize) -> Result<Self> {
        let dim = check_register(n)?;
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[0] = ONE;
        Ok(StateVector { n, amplitudes })
    }

    pub fn basis(n: usize, index: usize) -> Result<Self> {
        let dim = check_register(n)?;
        if index >= dim {
            return Err(Error::DimensionMismatch { expected: dim, got: index });
        }
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = ONE;
        Ok(StateVector { n, amplitudes })
    }

    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = amplitudes.len();
        if !dim.is_power_of_two() {
            return Err(Error::InvalidState(format!("length {dim} is not a power of two")));
        }
        let n = dim.trailing_zeros() as usize;
        check_register(n)?;
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > Tolerances::get().norm {
            return Err(Error::InvalidState(format!("squared norm {norm}")));
        }
        Ok(StateVector { n, amplitudes })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn apply_gate(&self, gate: &Gate, theta: &[f64]) -> Result<StateVector> {
        check_targets(&gate.targets, self.n)?;
        let u = gate.matrix(theta)?;
        check_unitary(&u)?;
        let mut out = self.clone();
        kernel::apply_vec(&mut out.amplitudes, &u, &gate.targets);
        Ok(out)
    }

    pub fn to_density(&self) -> DensityMatrix {
        let dim = self.amplitudes.len();
        let mut m = CMatrix::zeros(dim, dim);
        for r in 0..dim {
            for c in 0..dim {
                m[(r, c)] = self.amplitudes[r] * self.amplitudes[c].conj();
            }
        }
        DensityMatrix { n: self.n, rho: m }
    }
}

fn check_unitary(u: &CMatrix) -> Result<()> {
    let d = u.unitary_defect();
    if d > Tolerances::get().unitary {
        return Err(Error::NonUnitary(d));
    }
    Ok(())
}

/// A density matrix `ρ` on `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    rho: CMatrix,
}

impl DensityMatrix {
    /// `|0…0⟩⟨0…0|`.
    pub fn zero(n: usize) -> Result<Self> {
        Ok(StateVector::zero(n)?.to_density())
    }

    /// `I / 2^n`.
    pub fn maximally_mixed(n: usize) -> Result<Self> {
        let dim = check_register(n)?;
        Ok(DensityMatrix {
            n,
            rho: CMatrix::identity(dim).scale(Complex64::new(1.0 / dim as f64, 0.0)),
        })
    }

    /// Validates Hermiticity and unit trace.
    pub fn from_matrix(rho: CMatrix) -> Result<Self> {
        let dim = rho.rows();
        if !rho.is_square() || !dim.is_power_of_two() {
            return Err(Error::InvalidState("matrix must be 2^n x 2^n".into()));
        }
        let n = dim.trailing_zeros() as usize;
        check_register(n)?;
        let tol = Tolerances::get();
        let h = rho.hermitian_defect();
        if h > tol.hermitian {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {h:.3e})")));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > tol.trace || tr.im.abs() > tol.trace {
            return Err(Error::InvalidState(format!("trace {tr}")));
        }
        Ok(DensityMatrix { n, rho })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.rho.rows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.rho
    }

    pub fn trace(&self) -> Complex64 {
        self.rho.trace()
    }

    /// `Tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        self.rho.trace_product(&self.rho).re
    }

    /// `UρU†` for the gate at `theta`.
    pub fn apply_gate(&self, gate: &Gate, theta: &[f64]) -> Result<DensityMatrix> {
        let u = gate.matrix(theta)?;
        self.apply_unitary(&u, &gate.targets)
    }

    /// `UρU†` for a local unitary on `targets`.
    pub fn apply_unitary(&self, u: &CMatrix, targets: &[usize]) -> Result<DensityMatrix> {
        check_targets(targets, self.n)?;
        if u.rows() != 1 << targets.len() || !u.is_square() {
            return Err(Error::DimensionMismatch {
                expected: 1 << targets.len(),
                got: u.rows(),
            });
        }
        check_unitary(u)?;
        let mut out = self.clone();
        let dim = out.dim();
        kernel::conjugate(out.rho.as_mut_slice(), dim, u, targets);
        Ok(out)
    }

    /// `Σ_k E_k ρ E_k†`.
    pub fn apply_channel(&self, ch: &KrausChannel) -> Result<DensityMatrix> {
        check_targets(ch.targets(), self.n)?;
        let dim = self.dim();
        let mut acc = vec![ZERO; dim * dim];
        let mut work = vec![ZERO; dim * dim];
        for e in ch.operators() {
            work.copy_from_slice(self.rho.as_slice());
            kernel::conjugate(&mut work, dim, e, ch.targets());
            for (a, w) in acc.iter_mut().zip(&work) {
                *a += w;
            }
        }
        Ok(DensityMatrix {
            n: self.n,
            rho: CMatrix::from_rows(dim, dim, acc),
        })
    }

    /// `Tr(ρO)` for a Hermitian `O`; fails if the imaginary residue exceeds
    /// the tolerance.
    pub fn expectation(&self, obs: &CMatrix) -> Result<f64> {
        if obs.rows() != self.dim() || obs.cols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: obs.rows(),
            });
        }
        let tol = Tolerances::get();
        let h = obs.hermitian_defect();
        if h > tol.hermitian {
            return Err(Error::NonHermitian(h));
        }
        let v = self.rho.trace_product(obs);
        if v.im.abs() > tol.expectation_imag {
            return Err(Error::InvalidState(format!("Tr(ρO) has imaginary part {:.3e}", v.im)));
        }
        Ok(v.re)
    }

    /// Real diagonal of `ρ`, with small negative round-off clamped to zero
    /// and the result renormalized.
    pub fn basis_probabilities(&self) -> Vec<f64> {
        let mut p: Vec<f64> = (0..self.dim()).map(|i| self.rho[(i, i)].re.max(0.0)).collect();
        let s: f64 = p.iter().sum();
        if s > 0.0 {
            for x in &mut p {
                *x /= s;
            }
        }
        p
    }

    /// Checks `ρ + tol·I ⪰ 0` by attempting a Cholesky factorization.
    pub fn is_psd(&self, tol: f64) -> bool {
        let dim = self.dim();
        let mut a = self.rho.clone();
        for i in 0..dim {
            a[(i, i)] += tol;
        }
        let mut l = CMatrix::zeros(dim, dim);
        for j in 0..dim {
            let mut d = a[(j, j)].re;
            for k in 0..j {
                d -= l[(j, k)].norm_sqr();
            }
            if d <= 0.0 {
                return false;
            }
            let djj = d.sqrt();
            l[(j, j)] = Complex64::new(djj, 0.0);
            for i in j + 1..dim {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)].conj();
                }
                l[(i, j)] = s / djj;
            }
        }
        true
    }
}
