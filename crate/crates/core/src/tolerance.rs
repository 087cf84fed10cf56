use std::sync::OnceLock;

/// Numerical tolerances shared by every validity check in the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Entrywise Hermiticity of states and observables.
    pub hermitian: f64,
    /// |Tr ρ − 1|.
    pub trace: f64,
    /// Smallest admissible eigenvalue (debug and property checks only).
    pub psd: f64,
    /// Entrywise deviation of U†U from I.
    pub unitary: f64,
    /// Entrywise deviation of Σ E†E from I before a channel is rejected.
    pub completeness: f64,
    /// Imaginary residue of Tr(ρO) tolerated before it is discarded.
    pub expectation_imag: f64,
    /// Row-sum deviation of an assignment matrix.
    pub row_sum: f64,
    /// Squared-norm deviation of a state vector.
    pub norm: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        hermitian: 1e-12,
        trace: 1e-10,
        psd: 1e-9,
        unitary: 1e-12,
        completeness: 1e-10,
        expectation_imag: 1e-10,
        row_sum: 1e-9,
        norm: 1e-10,
    };

    /// Installs process-wide tolerances. Only the first call has effect;
    /// returns `false` if tolerances were already fixed.
    pub fn install(tol: Tolerances) -> bool {
        GLOBAL.set(tol).is_ok()
    }

    /// The active tolerances.
    pub fn get() -> &'static Tolerances {
        GLOBAL.get_or_init(|| Tolerances::DEFAULT)
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances::DEFAULT
    }
}

static GLOBAL: OnceLock<Tolerances> = OnceLock::new();
