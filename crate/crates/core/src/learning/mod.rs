//! Perturbed dual learning: empirical distribution, dual function, the
//! projected-subgradient solver, and the independent reference oracles.

pub mod dual;
pub mod empirical;
pub mod reference;
pub mod solver;

pub use dual::{dual_eval, dual_state_value, dual_subgradient, dual_value, DualEval, Multipliers};
pub use empirical::{full_support, EmpiricalDistribution};
pub use reference::{brute_force_primal, GridSearch};
pub use solver::{
    make_augmentation, oracle_multipliers, oracle_multipliers_for, solve_perturbed_dual,
    solve_perturbed_dual_support, SolverOptions, SolverReport, StopReason,
};
