use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::{CMatrix, I, ONE, ZERO};
use crate::{Error, Result};

/// A reference from a gate angle to the parameter vector:
/// `angle = scale * theta[slot]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamRef {
    pub slot: usize,
    pub scale: f64,
    /// Whether the angle enters as `exp(-i angle P / 2)` for a Pauli-like
    /// generator `P`, so that the shift rule is exact for it.
    pub shift_rule_valid: bool,
}

impl ParamRef {
    pub fn new(slot: usize, scale: f64) -> Self {
        ParamRef {
            slot,
            scale,
            shift_rule_valid: true,
        }
    }
}

/// A gate angle: either a constant or a scaled parameter slot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Angle {
    Fixed(f64),
    Param(ParamRef),
}

impl Angle {
    pub fn resolve(&self, theta: &[f64]) -> Result<f64> {
        match *self {
            Angle::Fixed(v) => Ok(v),
            Angle::Param(r) => theta
                .get(r.slot)
                .map(|t| r.scale * t)
                .ok_or(Error::ParamOutOfRange {
                    slot: r.slot,
                    p: theta.len(),
                }),
        }
    }

    pub fn param(&self) -> Option<ParamRef> {
        match *self {
            Angle::Param(r) => Some(r),
            Angle::Fixed(_) => None,
        }
    }
}

impl From<f64> for Angle {
    fn from(v: f64) -> Self {
        Angle::Fixed(v)
    }
}

impl From<ParamRef> for Angle {
    fn from(r: ParamRef) -> Self {
        Angle::Param(r)
    }
}

/// Gate label together with its angles.
#[derive(Debug, Clone, PartialEq)]
pub enum GateKind {
    Identity,
    H,
    X,
    Y,
    Z,
    SqrtX,
    /// `diag(e^{-iλ/2}, e^{iλ/2})`.
    Rz(Angle),
    /// `1/√2 [[1, -e^{iλ}], [e^{iφ}, e^{i(φ+λ)}]]`, angles `(φ, λ)`.
    U2(Angle, Angle),
    /// `[[cos θ/2, -i e^{-iφ} sin θ/2], [-i e^{iφ} sin θ/2, cos θ/2]]`,
    /// angles `(θ, φ)`.
    R(Angle, Angle),
    /// Targets are `[control, target]`.
    Cnot,
    /// An arbitrary fixed matrix; unitarity is checked when applied.
    Matrix(CMatrix),
}

impl GateKind {
    pub fn arity(&self) -> usize {
        match self {
            GateKind::Cnot => 2,
            GateKind::Matrix(m) => m.rows().trailing_zeros() as usize,
            _ => 1,
        }
    }

    pub fn angles(&self) -> Vec<Angle> {
        match self {
            GateKind::Rz(a) => vec![*a],
            GateKind::U2(a, b) | GateKind::R(a, b) => vec![*a, *b],
            _ => Vec::new(),
        }
    }

    /// The matrix with every angle already resolved to `angles`.
    pub fn matrix_at(&self, angles: &[f64]) -> CMatrix {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        match self {
            GateKind::Identity => CMatrix::identity(2),
            GateKind::H => CMatrix::from_real(&[
                &[FRAC_1_SQRT_2, FRAC_1_SQRT_2],
                &[FRAC_1_SQRT_2, -FRAC_1_SQRT_2],
            ]),
            GateKind::X => CMatrix::from_rows(2, 2, vec![ZERO, ONE, ONE, ZERO]),
            GateKind::Y => CMatrix::from_rows(2, 2, vec![ZERO, -I, I, ZERO]),
            GateKind::Z => CMatrix::from_rows(2, 2, vec![ONE, ZERO, ZERO, -ONE]),
            GateKind::SqrtX => CMatrix::from_rows(
                2,
                2,
                vec![c(0.5, 0.5), c(0.5, -0.5), c(0.5, -0.5), c(0.5, 0.5)],
            ),
            GateKind::Rz(_) => {
                let l = angles[0];
                CMatrix::diagonal(&[Complex64::from_polar(1.0, -l / 2.0), Complex64::from_polar(1.0, l / 2.0)])
            }
            GateKind::U2(_, _) => {
                let (phi, lam) = (angles[0], angles[1]);
                CMatrix::from_rows(
                    2,
                    2,
                    vec![
                        ONE,
                        -Complex64::from_polar(1.0, lam),
                        Complex64::from_polar(1.0, phi),
                        Complex64::from_polar(1.0, phi + lam),
                    ],
                )
                .scale(c(FRAC_1_SQRT_2, 0.0))
            }
            GateKind::R(_, _) => {
                let (th, phi) = (angles[0], angles[1]);
                let (s, co) = (th / 2.0).sin_cos();
                CMatrix::from_rows(
                    2,
                    2,
                    vec![
                        c(co, 0.0),
                        -I * Complex64::from_polar(s, -phi),
                        -I * Complex64::from_polar(s, phi),
                        c(co, 0.0),
                    ],
                )
            }
            GateKind::Cnot => CMatrix::from_real(&[
                &[1.0, 0.0, 0.0, 0.0],
                &[0.0, 0.0, 0.0, 1.0],
                &[0.0, 0.0, 1.0, 0.0],
                &[0.0, 1.0, 0.0, 0.0],
            ]),
            GateKind::Matrix(m) => m.clone(),
        }
    }
}

/// A gate placed on specific qubits.
///
/// For multi-qubit gates `targets[0]` is the least significant bit of the
/// gate's local index.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub targets: Vec<usize>,
}

impl Gate {
    pub fn new(kind: GateKind, targets: Vec<usize>) -> Result<Self> {
        if targets.len() != kind.arity() {
            return Err(Error::DimensionMismatch {
                expected: kind.arity(),
                got: targets.len(),
            });
        }
        for (i, t) in targets.iter().enumerate() {
            if targets[..i].contains(t) {
                return Err(Error::InvalidArgument(format!("repeated target qubit {t}")));
            }
        }
        if let GateKind::Matrix(m) = &kind {
            if !m.is_square() || !m.rows().is_power_of_two() || m.rows() < 2 {
                return Err(Error::InvalidArgument("gate matrix must be 2^k x 2^k".into()));
            }
        }
        Ok(Gate { kind, targets })
    }

    pub fn single(kind: GateKind, q: usize) -> Self {
        Gate::new(kind, vec![q]).expect("single-qubit gate")
    }

    pub fn h(q: usize) -> Self {
        Gate::single(GateKind::H, q)
    }

    pub fn x(q: usize) -> Self {
        Gate::single(GateKind::X, q)
    }

    pub fn rz(q: usize, angle: impl Into<Angle>) -> Self {
        Gate::single(GateKind::Rz(angle.into()), q)
    }

    pub fn r(q: usize, theta: impl Into<Angle>, phi: impl Into<Angle>) -> Self {
        Gate::single(GateKind::R(theta.into(), phi.into()), q)
    }

    pub fn u2(q: usize, phi: impl Into<Angle>, lambda: impl Into<Angle>) -> Self {
        Gate::single(GateKind::U2(phi.into(), lambda.into()), q)
    }

    pub fn cnot(control: usize, target: usize) -> Result<Self> {
        Gate::new(GateKind::Cnot, vec![control, target])
    }

    pub fn arity(&self) -> usize {
        self.targets.len()
    }

    pub fn angles(&self) -> Vec<Angle> {
        self.kind.angles()
    }

    pub fn resolve_angles(&self, theta: &[f64]) -> Result<Vec<f64>> {
        self.angles().iter().map(|a| a.resolve(theta)).collect()
    }

    /// The local `2^k x 2^k` matrix at `theta`.
    pub fn matrix(&self, theta: &[f64]) -> Result<CMatrix> {
        Ok(self.kind.matrix_at(&self.resolve_angles(theta)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn fixed_gates_are_unitary() {
        for kind in [
            GateKind::Identity,
            GateKind::H,
            GateKind::X,
            GateKind::Y,
            GateKind::Z,
            GateKind::SqrtX,
            GateKind::Cnot,
        ] {
            assert!(kind.matrix_at(&[]).unitary_defect() < 1e-12, "{kind:?}");
        }
    }

    #[test]
    fn parameterized_gates_are_unitary() {
        for &(a, b) in &[(0.3, -1.2), (PI, 0.5), (-2.0, 4.0)] {
            assert!(GateKind::Rz(0.0.into()).matrix_at(&[a]).unitary_defect() < 1e-12);
            assert!(GateKind::U2(0.0.into(), 0.0.into()).matrix_at(&[a, b]).unitary_defect() < 1e-12);
            assert!(GateKind::R(0.0.into(), 0.0.into()).matrix_at(&[a, b]).unitary_defect() < 1e-12);
        }
    }

    #[test]
    fn sqrt_x_squares_to_x() {
        let s = GateKind::SqrtX.matrix_at(&[]);
        let x = GateKind::X.matrix_at(&[]);
        assert!(s.matmul(&s).max_abs_diff(&x) < 1e-15);
    }

    #[test]
    fn r_with_zero_phase_is_rx() {
        // R(θ, 0) = exp(-iθX/2)
        let t = 0.77;
        let r = GateKind::R(0.0.into(), 0.0.into()).matrix_at(&[t, 0.0]);
        let expect = CMatrix::from_rows(
            2,
            2,
            vec![
                Complex64::new((t / 2.0).cos(), 0.0),
                Complex64::new(0.0, -(t / 2.0).sin()),
                Complex64::new(0.0, -(t / 2.0).sin()),
                Complex64::new((t / 2.0).cos(), 0.0),
            ],
        );
        assert!(r.max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn u2_matches_rz_ry_rz_up_to_phase() {
        // U2(φ,λ) = e^{i(φ+λ)/2} Rz(φ) Ry(π/2) Rz(λ)
        let (phi, lam) = (0.4, -1.3);
        let u2 = GateKind::U2(0.0.into(), 0.0.into()).matrix_at(&[phi, lam]);
        let rz = |a: f64| GateKind::Rz(0.0.into()).matrix_at(&[a]);
        let ry = GateKind::R(0.0.into(), 0.0.into()).matrix_at(&[PI / 2.0, PI / 2.0]);
        let prod = rz(phi).matmul(&ry).matmul(&rz(lam));
        let phase = Complex64::from_polar(1.0, (phi + lam) / 2.0);
        assert!(u2.max_abs_diff(&prod.scale(phase)) < 1e-14);
    }

    #[test]
    fn param_resolution() {
        let g = Gate::rz(0, ParamRef::new(1, 2.0));
        assert_eq!(g.resolve_angles(&[0.0, 0.25]).unwrap(), vec![0.5]);
        assert!(matches!(
            g.resolve_angles(&[0.0]),
            Err(Error::ParamOutOfRange { slot: 1, p: 1 })
        ));
    }

    #[test]
    fn rejects_bad_targets() {
        assert!(Gate::cnot(1, 1).is_err());
        assert!(Gate::new(GateKind::H, vec![0, 1]).is_err());
    }
}
