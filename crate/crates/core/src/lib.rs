//! Anisotropic harmonic oscillator with rational frequency ratios, its
//! multipolar (radial) reduction, and numerical checks of the extra
//! conserved quantities that make both systems superintegrable.

pub mod analysis;
pub mod dual;
pub mod dynamics;
pub mod error;
pub mod invariants;
pub mod model;
pub mod poisson;
pub mod reduction;
pub mod sampling;

pub use dynamics::{integrate, Method, PhasePoint, SystemKind, Trajectory};
pub use error::{Error, Result};
pub use invariants::{evaluate, EvalOptions, IntegralId, IntegralValue};
pub use model::{ComplexPhase, FullState, ReducedState, SystemParams};
