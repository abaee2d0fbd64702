//! Numerical laboratory for sum-type Hessian operators.
//!
//! The crate evaluates elementary symmetric functions and their directional
//! deletions, tests membership in the positivity cones Γ_k and their lifted
//! counterparts, builds the operator F(λ) = σ_k(λ) + Σ_r a_r σ_{k−r}(λ)
//! together with its derivatives in both spectral and matrix variables,
//! assembles the concavity quadratic forms that drive interior curvature
//! estimates, and solves the associated Dirichlet problem F(D²u) = ψ with a
//! damped Newton iteration on finite-difference grids.
//!
//! Every analytic quantity with an independent derivation is cross-checked
//! against a second route (brute-force enumeration, finite differences, or a
//! lifted/reduced evaluation pair), and the checks run in the ordinary test
//! suite.

// Index loops deliberately mirror the summation indices of the formulas they
// implement, and negated comparisons (`!(x > 0)`) deliberately reject NaN.
#![allow(
    clippy::needless_range_loop,
    clippy::neg_cmp_op_on_partial_ord,
    clippy::too_many_arguments,
    clippy::type_complexity
)]

pub mod cli;
pub mod concavity;
pub mod cone;
pub mod linalg;
pub mod operator;
pub mod report;
pub mod solver;
pub mod symfun;
