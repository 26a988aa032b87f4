//! Batch front end for the bound library: parameter sweeps, run records in
//! CSV or JSON, SVG plots and SDPA export.

pub mod plot;
pub mod record;
pub mod sweep;
