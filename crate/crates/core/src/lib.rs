//! Hamiltonian and Lagrangian mechanics on almost-Lie algebroids.
//!
//! Two formulations of the dynamics are implemented side by side:
//!
//! * [`tulczyjew`]: the bi-vector `Λ` on `E*`, the canonical isomorphism
//!   `R_E: T*E → T*E*`, and `ε_E = Λ̃ ∘ R_E`;
//! * [`prolongation`]: the prolongation bundles `T^E E`, `T^{E*} E`, the
//!   canonical 2-form `Ω_E`, the pulled-back `ω_L` and the energy `E_L`.
//!
//! [`verify`] checks numerically that the two produce the same equations of
//! motion, and [`dynamics`] integrates them. The crate is `no_std` and only
//! needs `alloc`.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod algebroid;
pub mod dynamics;
pub mod error;
pub mod expr;
pub mod jet;
pub mod linalg;
pub mod prolongation;
pub mod tulczyjew;
pub mod verify;

pub use algebroid::{builtin, AlgebroidModel, PhasePoint, SectionE, SectionEstar, Side};
pub use error::{DomainError, Error, Result};
pub use expr::{parse, Expr};
pub use jet::{finite_diff_check, jet_eval, Jet2, Scalar, ScalarFn};
