//! Dynamics of a degenerate donor-acceptor (DA) complex weakly coupled to a
//! thermal bosonic bath.
//!
//! The donor consists of `N_D` sites at energy `E_D`, the acceptor of `N_A`
//! sites at energy `E_A`, every donor site is coupled to every acceptor site
//! by the same matrix element `V`, and the whole complex couples to a
//! continuous-mode oscillator bath at inverse temperature `beta`. The high
//! symmetry of the complex confines the nontrivial dynamics to the
//! two-dimensional span of the uniformly populated donor and acceptor states;
//! everything else either stays frozen or dephases.
//!
//! Crate layout:
//! - [`model`] — Hamiltonian and coupling assembly, effective two-level
//!   reduction, projectors, Gibbs state.
//! - [`spectral`] — bath spectral densities and the quadratures feeding the
//!   decay rates and Lamb shifts.
//! - [`resonances`] — the complex resonance energies driving every
//!   density-matrix sector.
//! - [`dynamics`] — the density-matrix propagator, its asymptotic state, and
//!   element-wise donor formulas.
//! - [`observables`] — transfer efficiency, initial-state factories,
//!   population fluctuation statistics.
//! - [`oracle`] — independent reference computations (unitary propagation,
//!   Redfield generator, independent-boson sector, truncated-bath brute
//!   force) used to validate the resonance results.

// negated comparisons are used deliberately so NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod model;
pub mod observables;
pub mod oracle;
pub mod quad;
pub mod resonances;
pub mod spectral;

pub use dynamics::PropagatorContext;
pub use error::{Error, Result};
pub use model::{DAState, EffectiveSystem, ProjectionSet, SystemParams};
pub use resonances::ResonanceSet;
pub use spectral::SpectralModel;
