//! Stroboscopic preparation of collective W states in Rydberg ensembles.
//!
//! Two drive stages alternate every cycle: a weak g↔e pulse of length
//! t_a = π/(√ℕ·N·ω) and an e↔r 4π pulse of length t_b = 4π/Ω. The strong
//! stage acts as a frequent measurement that freezes everything except the
//! g↔W rotation, so after N cycles the ensemble sits in the W state.
//!
//! Angular frequencies are in rad/µs and times in µs throughout.

pub mod error;
pub mod experiments;
pub mod floquet;
pub mod hamiltonians;
pub mod hilbert;
pub mod linalg;
pub mod model;
pub mod noise;
pub mod observables;
pub mod open_system;
pub mod propagation;
pub mod record;

pub use error::{Error, Result};
pub use hamiltonians::{PhysParams, Protocol};
pub use hilbert::{Basis, Collective, Level, OperatorMatrix, StateVector};
pub use model::{Emission, Model, ModelKind};
pub use record::TrajectoryRecord;
