//! Equilibrium energies and elastic stress forms.

mod eight_chain;
mod elastic_stress;
mod hill;
mod isochoric;
mod langevin;

pub use eight_chain::{eightchain_equilibrium, EightChainResponse, EightChainSpec};
pub use elastic_stress::{se_invariant_based, se_valanis_landel, InvariantDerivatives};
pub(crate) use hill::accumulate_quadratic;
pub use hill::{hill_stress_tangent, HillClassSpec, HillResponse, HillTerm};
pub use isochoric::{isochoric_stress, isochoric_stress_tangent, pressure_stress_tangent};
pub use langevin::{inv_langevin, inv_langevin_with_derivative};
