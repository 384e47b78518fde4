//! Numerical engine for generalized Hamiltonian mechanics in phase space.
//!
//! Quasi-probability states live on discretized periodic grids; evolution is
//! generated by a kernel-parameterized equation of motion that contains
//! quantum (`K = delta(k - hbar)`), classical (`K = delta(k)`) and hybrid
//! non-associative dynamics as special cases. On top of the dynamics sit the
//! generalized measurement quantities: state and effect volumes, state-dual
//! probabilities, reconstructed Hamiltonians and energy spectra, plus a
//! discrete toy-theory module and a perturbation-overlap analysis.

pub mod chaos;
pub mod checks;
pub mod dynamics;
pub mod error;
pub mod fourier;
pub mod gpt;
pub mod grid;
pub mod hamiltonians;
pub mod kernels;
pub mod spekkens;
pub mod states;
pub mod transforms;

pub use error::{Error, Result};
pub use grid::{inner_product, translate, FieldKind, PhaseField, PhaseGrid};
pub use kernels::{Kernel, KernelComponent};
pub use states::{build_state, product_state, Field4, StateSpec};
