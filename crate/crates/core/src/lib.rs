//! Explicit finite-dimensional Dirichlet boundary feedback for Fisher's equation
//!
//! ```text
//! u_t = u_xx + αu − βu²,   x ∈ (0,1),   u(0,t) = 0,   u(1,t) = U(t)
//! ```
//!
//! The crate is organised bottom-up:
//!
//! * [`spectral`]: eigenpairs of `−∂xx − α` with Dirichlet conditions, grids,
//!   sampled fields and trapezoid modal projections.
//! * [`gains`]: Gram matrix, shift scalings, the inverted sum `B`, the
//!   collapsed gain vector and the feedback law `U = ⟨g, m(u)⟩`.
//! * [`lifting`]: the nonlocal lifting problem `D_γ`, the modal identities it
//!   satisfies, the reduced closed-loop ODE and its Lyapunov certificate.
//! * [`pde_sim`]: Crank–Nicolson / explicit IMEX integration of the open- and
//!   closed-loop equation.
//! * [`analysis`]: norms, exponential fits, stability verdicts, window sweeps
//!   and the PDE-versus-reduced-ODE cross-check.

pub mod analysis;
pub mod error;
pub mod gains;
pub mod lifting;
pub mod linalg;
pub mod pde_sim;
pub mod spectral;

pub use error::{Error, Result};
