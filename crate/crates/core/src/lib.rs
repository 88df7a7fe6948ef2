//! Exact cut-norms, sup-norms of multiple Rademacher sums and Rademacher chaos,
//! and discrepancy of edge-weighted uniform hypergraphs.
//!
//! Every quantity is computed by exhaustive enumeration over subsets or sign
//! vectors in Gray-code order, split into fixed chunks for parallel workers.
//! Results, including witnesses, do not depend on the number of workers.

pub mod cli;
pub mod discrepancy;
pub mod enumerate;
pub mod error;
pub mod io;
pub mod model;
pub mod norms;
pub mod verify;

pub use discrepancy::{
    balance, disc_exact, disc_for_coloring, disc_monte_carlo, expected_disc_exact, DiscResult,
};
pub use enumerate::{Budget, DEFAULT_BUDGET};
pub use error::{Error, Result};
pub use model::{
    build_bipartite, build_complete, chaos_coeffs, CoeffTensor, Coloring, Edge, SignPattern,
    SimplexCoeffs, WeightedHypergraph,
};
pub use norms::{
    cut_norm, cut_norm_star, decouple, linf_chaos, linf_multiple, lp_rademacher_exact,
    mixed_norm_profile, mixed_norm_profile_simplex, opnorm_inf_to_1, NormResult, Witness,
};
