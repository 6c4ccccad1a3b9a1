//! Self-contained numerical kernel: special functions, seeded random
//! distributions, a symmetric eigensolver, and stable scalar helpers.

mod linalg;
mod rng;
mod special;
mod stable;

pub use linalg::{sym_eigenvalues, LinalgError};
pub use rng::{Rng, RngError};
pub use special::{digamma, log_gamma, trigamma, DomainError};
pub use stable::{log_expm1_exp, log_sum_exp};
