//! Numerical laboratory for a stochastically forced Allen-Cahn interface
//! confined between ±1 Dirichlet walls.
//!
//! The crate simulates the SPDE
//!
//! ```text
//! dm = [ ½ Δm − V'(m) ] dt + √ε dW,   m(−a) = −1,  m(b) = +1,
//! ```
//!
//! with the quartic double well `V(m) = ¼ (m²−1)²`, extracts the interface
//! center along trajectories, and checks the spectral asymptotics of the
//! linearization `H_ζ = −½Δ + V''(m̄_ζ)` as well as the limiting wall laws of
//! the center (soft exponential repulsion, sharp reflection after diffusive
//! rescaling).
//!
//! Module map:
//! - [`profiles`]: closed forms (potential, tanh wave, `h`, boundary layer).
//! - [`spectral`]: tridiagonal operator, eigenpairs, Green kernels, Kellogg
//!   iteration, eigenvalue asymptotics.
//! - [`spde`]: semi-implicit finite difference integrator for the SPDE.
//! - [`interface`]: center extraction and path rescalings.
//! - [`sdelab`]: one-dimensional limit SDEs and wall constructions.
//! - [`stats`]: drift/diffusion estimators, KS tests, path functionals.
//! - [`cli`]: experiment configs, orchestration and file emission.

pub mod cli;
pub mod interface;
pub mod profiles;
pub mod rng;
pub mod sdelab;
pub mod spde;
pub mod spectral;
pub mod stats;
