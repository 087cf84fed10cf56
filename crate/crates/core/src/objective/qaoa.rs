use crate::sim::{Gate, ParamCircuit, ParamRef};
use crate::{Error, Graph, Result};

/// The QAOA MAX-CUT ansatz.
///
/// `H` on every qubit, then per layer `ℓ`: for each edge `(i, j)` the
/// block `CNOT(i,j) · Rz_j(2 w γ_ℓ) · CNOT(i,j) = exp(−i w γ_ℓ Z_i Z_j)`,
/// followed by the mixer `R(2β_ℓ, 0)` on every qubit. Parameters are
/// ordered `(γ_1, β_1, γ_2, β_2, …)`.
pub fn qaoa_circuit(g: &Graph, layers: usize) -> Result<ParamCircuit> {
    if layers == 0 {
        return Err(Error::InvalidArgument("QAOA needs at least one layer".into()));
    }
    let n = g.n();
    let mut c = ParamCircuit::new(n, 2 * layers)?;
    for q in 0..n {
        c.push_gate(Gate::h(q))?;
    }
    for l in 0..layers {
        for (&(i, j), &w) in g.edges().iter().zip(g.weights()) {
            c.push_gate(Gate::cnot(i, j)?)?;
            c.push_gate(Gate::rz(j, ParamRef::new(2 * l, 2.0 * w)))?;
            c.push_gate(Gate::cnot(i, j)?)?;
        }
        for q in 0..n {
            c.push_gate(Gate::r(q, ParamRef::new(2 * l + 1, 2.0), 0.0))?;
        }
    }
    Ok(c)
}

/// `H` on qubit 0, then `CNOT(0, 1)`: prepares `(|00⟩ + |11⟩)/√2`.
pub fn bell_circuit() -> ParamCircuit {
    let mut c = ParamCircuit::new(2, 0).expect("two qubits");
    c.push_gate(Gate::h(0)).expect("valid target");
    c.push_gate(Gate::cnot(0, 1).expect("distinct targets")).expect("valid targets");
    c
}
