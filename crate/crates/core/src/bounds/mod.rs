//! Convergence bounds of biased zeroth-order and shift-rule descent, and
//! the constants they need measured on an objective.

mod empirical;
mod formulas;
mod surface;

pub use empirical::{
    bias_sup, estimate_lipschitz, eval_variance_sup, f_gap, grid_argmin, product_grid, psr_bias_bound, psr_variance_sup,
};
pub use formulas::{
    biased_sgd_bound, biased_sgd_schedule, effect_of_bias, optimal_c, psr_bound, spsa_bound, spsa_bound_variant, spsa_floor,
    spsa_optimal_c, two_point_bound, BoundParams, BoundValue, Regime, SpsaVariant,
};
pub use surface::{surface, Axis, Surface, SurfaceKind, SurfacePoint};
