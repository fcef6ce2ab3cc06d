//! Monte Carlo network simulator: placement, traffic, collisions and the
//! trial engine.

pub mod collision;
pub mod engine;
pub mod placement;
pub mod rng;
pub mod scenario;
pub mod traffic;

pub use collision::{brute_force_oracle, resolve_collisions};
pub use engine::{simulate, PreparedSim, SimResult};
pub use placement::place_devices;
pub use rng::TrialStreams;
pub use scenario::{InterferenceMode, Placement, Scenario};
pub use traffic::{generate_traffic, PacketAttempt};
