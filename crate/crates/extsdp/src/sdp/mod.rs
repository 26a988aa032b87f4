//! Problem representation, lowering to real form, and interchange.

pub mod embed;
pub mod model;
pub mod presolve;
pub mod sdpa;

pub use embed::{embed_real, RealBlock, RealSdp, SparseSym};
pub use model::{Assignment, Framing, MatrixExpr, NamedExpr, SdpProblem, SdpVariable, Sense, SwapSymmetry, Term, VarId};
pub use presolve::{presolve, LmiProblem, Presolved, Recovery};
