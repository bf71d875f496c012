//! Heston and Bates models: simulation, variance-swap rates and static replication.

mod rates;
mod replication;
mod simulate;
mod spec;

pub use rates::{
    affine_psi_phi, bates_vs_rate, epsilon_jump, epsilon_jump_closed_form, heston_vs_rate,
    heston_weight, PsiPhi, ODE_STEPS,
};
pub use replication::{vs_static_replication, OptionChain};
pub use simulate::{simulate, simulate_stream, simulated_date, SimulatedPath};
pub use spec::{Drift, ModelKind, ModelSpec, NormalJumps};
