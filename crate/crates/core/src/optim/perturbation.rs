use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

/// Gaussian draws smaller than this in magnitude are redrawn.
pub const MIN_GAUSSIAN_COMPONENT: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationKind {
    #[default]
    Rademacher,
    Gaussian,
}

/// Distribution of the SPSA direction `Δ` and the constants the SPSA
/// bound needs: `B0 ≥ |Δ_i|`, `B1 ≥ E|Δ_i|⁻¹`, `B3 ≥ |Δ_i|⁻¹` a.s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationDist {
    pub kind: PerturbationKind,
}

impl Default for PerturbationDist {
    fn default() -> Self {
        PerturbationDist::rademacher()
    }
}

impl PerturbationDist {
    pub fn rademacher() -> Self {
        PerturbationDist {
            kind: PerturbationKind::Rademacher,
        }
    }

    pub fn gaussian() -> Self {
        PerturbationDist {
            kind: PerturbationKind::Gaussian,
        }
    }

    /// `None` when `|Δ_i|` is unbounded.
    pub fn b0(&self) -> Option<f64> {
        match self.kind {
            PerturbationKind::Rademacher => Some(1.0),
            PerturbationKind::Gaussian => None,
        }
    }

    /// `E|Δ_i|⁻¹`, infinite for the standard normal.
    pub fn b1(&self) -> Option<f64> {
        match self.kind {
            PerturbationKind::Rademacher => Some(1.0),
            PerturbationKind::Gaussian => None,
        }
    }

    /// The almost-sure bound on `|Δ_i|⁻¹`; Gaussian directions have none,
    /// so SPSA bounds cannot be reported for them.
    pub fn b3(&self) -> Option<f64> {
        match self.kind {
            PerturbationKind::Rademacher => Some(1.0),
            PerturbationKind::Gaussian => None,
        }
    }

    /// Symmetric around zero with finite `B0`, `B1` and `B3`.
    pub fn satisfies_bound_assumptions(&self) -> bool {
        self.b0().is_some() && self.b1().is_some() && self.b3().is_some()
    }

    pub fn sample<R: Rng + ?Sized>(&self, p: usize, rng: &mut R) -> Vec<f64> {
        match self.kind {
            PerturbationKind::Rademacher => (0..p).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect(),
            PerturbationKind::Gaussian => (0..p)
                .map(|_| loop {
                    let z: f64 = StandardNormal.sample(rng);
                    if z.abs() >= MIN_GAUSSIAN_COMPONENT {
                        break z;
                    }
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rademacher_constants() {
        let d = PerturbationDist::rademacher();
        assert_eq!((d.b0(), d.b1(), d.b3()), (Some(1.0), Some(1.0), Some(1.0)));
        assert!(d.satisfies_bound_assumptions());
        assert!(!PerturbationDist::gaussian().satisfies_bound_assumptions());
    }

    #[test]
    fn rademacher_entries_are_signs_and_balanced() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let v = PerturbationDist::rademacher().sample(10_000, &mut rng);
        assert!(v.iter().all(|x| x.abs() == 1.0));
        let s: f64 = v.iter().sum();
        assert!(s.abs() < 4.0 * 100.0);
    }

    #[test]
    fn gaussian_entries_are_bounded_away_from_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v = PerturbationDist::gaussian().sample(10_000, &mut rng);
        assert!(v.iter().all(|x| x.abs() >= MIN_GAUSSIAN_COMPONENT));
    }
}
