//! Exact Shapley-value attributions for tabulated set-function models,
//! executable verifiers for the axioms that characterize them, and the
//! equivalent constrained weighted linear regression — with each route
//! cross-checkable against the others by brute force.
//!
//! # Conventions
//!
//! * Players/indices are numbered **from 1**. A [`SubsetMask`] stores bit
//!   `i - 1` for player `i`, and its numeric value doubles as the position
//!   of the subset in a dense value table.
//! * Vectors are positional: `phi[i - 1]` is the attribution of index `i`.
//! * All containers are immutable after construction and every operation is
//!   a pure function, so everything is safe to share across threads. The
//!   exact attribution sums switch to the rayon pool for large active sets;
//!   each per-player sum stays sequential, so results never depend on the
//!   thread count.

pub mod axioms;
mod comb;
pub mod error;
pub mod fixtures;
pub mod gen;
pub mod model;
pub mod regression;
pub mod shapley;
pub mod subset;

pub use error::{Error, Result};
pub use model::{induced_model, Attribution, CooperativeGame, SimplifiedModel};
pub use shapley::{
    claim1_explanation, greedy_path_explanation, marginal_contribution, shapley_explanation,
    shapley_values, shapley_weight,
};
pub use subset::{indicator_vector, proper_subsets, submasks, SubsetMask, MAX_DIMENSION};

pub use axioms::{
    all_permutations, check_constant_on_inducing, check_efficiency, check_local_accuracy,
    check_missingness, check_new_symmetry, check_restricted_consistency, check_restricted_symmetry,
    check_strong_monotonicity, check_symmetry, check_symmetry_sampled, check_unrestricted_symmetry,
    decompose_transpositions, permute_game, symmetrizing_game, AxiomReport, Permutation, Verdict,
    Witness,
};
pub use regression::{
    build_system, gram_inverse, gram_matrix, identity_suite, kernel_weight, sampled_wls,
    sherman_morrison_inverse, solve_constrained, solve_constrained_with, IdentityCheck,
    IdentityReport, KernelSystem, KernelWeight, RegressionSolution, Solver,
};
