//! Lower bounds on the error of approximate teleportation and approximate
//! error correction from two-PPT-extendible relaxations of the allowed
//! simulation channels.

pub mod bounds;
pub mod error;
pub mod quantum;
pub mod resources;
pub mod sdp;
pub mod solver;
pub mod symmetry;
pub mod tensor;

pub use error::{Error, Result};
pub use quantum::{ChoiChannel, DensityState, KrausChannel};
pub use symmetry::SymBasis;
pub use tensor::{LabeledOperator, TraceMode};

/// Library version recorded in run metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
