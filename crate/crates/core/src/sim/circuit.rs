use crate::linalg::CMatrix;
use crate::{Error, Result};

use super::{
    check_register, check_targets, check_unitary, kernel, make_channel, ChannelKind, DensityMatrix, Gate, KrausChannel, ParamRef,
    StateVector,
};

/// One circuit step.
#[derive(Debug, Clone, PartialEq)]
pub enum Op {
    Gate(Gate),
    Channel(KrausChannel),
}

/// An op with its matrix resolved at a given `θ`.
enum Resolved<'a> {
    Gate(CMatrix, &'a [usize]),
    Channel(&'a KrausChannel),
}

/// A parameterized angle inside a circuit: gate `op` angle `arg` reads
/// `scale * theta[slot]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamOccurrence {
    pub op: usize,
    pub arg: usize,
    pub param: ParamRef,
}

/// An ordered list of gates and channels on `n` qubits with `p` parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamCircuit {
    n: usize,
    p: usize,
    ops: Vec<Op>,
}

impl ParamCircuit {
    pub fn new(n: usize, p: usize) -> Result<Self> {
        check_register(n)?;
        Ok(ParamCircuit { n, p, ops: Vec::new() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn ops(&self) -> &[Op] {
        &self.ops
    }

    pub fn push_gate(&mut self, gate: Gate) -> Result<()> {
        check_targets(&gate.targets, self.n)?;
        for a in gate.angles() {
            if let Some(r) = a.param() {
                if r.slot >= self.p {
                    return Err(Error::ParamOutOfRange { slot: r.slot, p: self.p });
                }
            }
        }
        self.ops.push(Op::Gate(gate));
        Ok(())
    }

    pub fn push_channel(&mut self, ch: KrausChannel) -> Result<()> {
        check_targets(ch.targets(), self.n)?;
        self.ops.push(Op::Channel(ch));
        Ok(())
    }

    pub fn gate_count(&self) -> usize {
        self.ops.iter().filter(|o| matches!(o, Op::Gate(_))).count()
    }

    pub fn has_channels(&self) -> bool {
        self.ops.iter().any(|o| matches!(o, Op::Channel(_)))
    }

    /// A copy with a depolarizing channel after every gate: strength `p1`
    /// after one-qubit gates and `p2` after two-qubit gates. Zero strengths
    /// insert nothing. Existing channels are kept.
    pub fn with_depolarizing(&self, p1: f64, p2: f64) -> Result<ParamCircuit> {
        let mut out = ParamCircuit::new(self.n, self.p)?;
        for op in &self.ops {
            out.ops.push(op.clone());
            if let Op::Gate(g) = op {
                let p = if g.arity() == 1 { p1 } else { p2 };
                if p > 0.0 {
                    out.ops.push(Op::Channel(make_channel(ChannelKind::Depolarizing, p, &g.targets)?));
                } else if !(0.0..=1.0).contains(&p) {
                    return Err(Error::Probability(p));
                }
            }
        }
        Ok(out)
    }

    /// The same circuit with every channel removed.
    pub fn without_channels(&self) -> ParamCircuit {
        ParamCircuit {
            n: self.n,
            p: self.p,
            ops: self.ops.iter().filter(|o| matches!(o, Op::Gate(_))).cloned().collect(),
        }
    }

    /// Every parameter-bound angle, in circuit order.
    pub fn occurrences(&self) -> Vec<ParamOccurrence> {
        let mut out = Vec::new();
        for (i, op) in self.ops.iter().enumerate() {
            if let Op::Gate(g) = op {
                for (arg, a) in g.angles().iter().enumerate() {
                    if let Some(param) = a.param() {
                        out.push(ParamOccurrence { op: i, arg, param });
                    }
                }
            }
        }
        out
    }

    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.p {
            return Err(Error::DimensionMismatch {
                expected: self.p,
                got: theta.len(),
            });
        }
        Ok(())
    }

    /// Final state from `|0…0⟩`.
    pub fn run(&self, theta: &[f64]) -> Result<DensityMatrix> {
        self.run_shifted(theta, None)
    }

    /// Final state with the `shift.0`-th parameter-bound angle (in
    /// [`occurrences`](Self::occurrences) order) displaced by `shift.1`.
    /// Channels carry no angles, so the numbering agrees between a circuit
    /// and its noisy copy.
    pub fn run_shifted(&self, theta: &[f64], shift: Option<(usize, f64)>) -> Result<DensityMatrix> {
        self.check_theta(theta)?;
        let mut rho = DensityMatrix::zero(self.n)?;
        self.walk(theta, shift, |op| {
            rho = match op {
                Resolved::Gate(u, targets) => rho.apply_unitary(&u, targets)?,
                Resolved::Channel(ch) => rho.apply_channel(ch)?,
            };
            Ok(())
        })?;
        Ok(rho)
    }

    /// Computational-basis probabilities of the final state. Circuits
    /// without channels are simulated as state vectors.
    pub fn probabilities(&self, theta: &[f64], shift: Option<(usize, f64)>) -> Result<Vec<f64>> {
        if self.has_channels() {
            return Ok(self.run_shifted(theta, shift)?.basis_probabilities());
        }
        self.check_theta(theta)?;
        let mut psi = StateVector::zero(self.n)?.amplitudes().to_vec();
        self.walk(theta, shift, |op| {
            if let Resolved::Gate(u, targets) = op {
                check_unitary(&u)?;
                kernel::apply_vec(&mut psi, &u, targets);
            }
            Ok(())
        })?;
        // renormalized like the density path, so exact states stay exact
        let mut p: Vec<f64> = psi.iter().map(|a| a.norm_sqr()).collect();
        let total: f64 = p.iter().sum();
        for x in &mut p {
            *x /= total;
        }
        Ok(p)
    }

    /// Visits every op with angles resolved and the shift applied.
    fn walk<F>(&self, theta: &[f64], shift: Option<(usize, f64)>, mut visit: F) -> Result<()>
    where
        F: FnMut(Resolved<'_>) -> Result<()>,
    {
        let mut seen = 0usize;
        for op in &self.ops {
            match op {
                Op::Gate(g) => {
                    let mut angles = g.resolve_angles(theta)?;
                    for (arg, a) in g.angles().iter().enumerate() {
                        if a.param().is_some() {
                            if let Some((occ, d)) = shift {
                                if occ == seen {
                                    angles[arg] += d;
                                }
                            }
                            seen += 1;
                        }
                    }
                    visit(Resolved::Gate(g.kind.matrix_at(&angles), &g.targets))?;
                }
                Op::Channel(ch) => visit(Resolved::Channel(ch))?,
            }
        }
        if let Some((occ, _)) = shift {
            if occ >= seen {
                return Err(Error::InvalidArgument(format!("shift site {occ} but only {seen} parameter sites")));
            }
        }
        Ok(())
    }

    /// The full `2^n x 2^n` unitary at `theta`. Fails if the circuit holds
    /// channels.
    pub fn unitary(&self, theta: &[f64]) -> Result<CMatrix> {
        self.check_theta(theta)?;
        if self.has_channels() {
            return Err(Error::InvalidArgument("circuit contains noise channels".into()));
        }
        let dim = 1usize << self.n;
        let mut u = CMatrix::zeros(dim, dim);
        for col in 0..dim {
            let mut psi = StateVector::basis(self.n, col)?;
            for op in &self.ops {
                if let Op::Gate(g) = op {
                    psi = psi.apply_gate(g, theta)?;
                }
            }
            for (row, a) in psi.amplitudes().iter().enumerate() {
                u[(row, col)] = *a;
            }
        }
        Ok(u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::Gate;

    #[test]
    fn rejects_out_of_range_slots_and_targets() {
        let mut c = ParamCircuit::new(2, 1).unwrap();
        assert!(c.push_gate(Gate::rz(0, ParamRef::new(1, 1.0))).is_err());
        assert!(c.push_gate(Gate::h(2)).is_err());
        assert!(c.push_gate(Gate::rz(1, ParamRef::new(0, 1.0))).is_ok());
    }

    #[test]
    fn depolarizing_insertion_counts() {
        let mut c = ParamCircuit::new(2, 0).unwrap();
        c.push_gate(Gate::h(0)).unwrap();
        c.push_gate(Gate::cnot(0, 1).unwrap()).unwrap();
        let noisy = c.with_depolarizing(0.001, 0.01).unwrap();
        assert_eq!(noisy.ops().len(), 4);
        assert_eq!(c.with_depolarizing(0.0, 0.01).unwrap().ops().len(), 3);
        assert_eq!(noisy.without_channels(), c);
    }

    #[test]
    fn shifted_run_moves_one_angle() {
        let mut c = ParamCircuit::new(1, 1).unwrap();
        c.push_gate(Gate::r(0, ParamRef::new(0, 2.0), 0.0)).unwrap();
        let a = c.run_shifted(&[0.1], Some((0, 0.3))).unwrap();
        assert!(c.run_shifted(&[0.1], Some((1, 0.3))).is_err());
        let b = c.run(&[0.25]).unwrap();
        assert!(a.matrix().max_abs_diff(b.matrix()) < 1e-15);
    }

    #[test]
    fn state_vector_probabilities_match_density_diagonal() {
        let g = crate::Graph::cycle(4).unwrap();
        let c = crate::objective::qaoa_circuit(&g, 2).unwrap();
        let th = [0.3, -0.8, 1.1, 0.45];
        for shift in [None, Some((3, 0.7)), Some((15, -1.2))] {
            let a = c.probabilities(&th, shift).unwrap();
            let b = c.run_shifted(&th, shift).unwrap().basis_probabilities();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-13);
            }
        }
        assert!(c.probabilities(&th, Some((16, 0.1))).is_err());
        let noisy = c.with_depolarizing(0.01, 0.02).unwrap();
        assert_eq!(noisy.probabilities(&th, None).unwrap(), noisy.run(&th).unwrap().basis_probabilities());
    }
}
