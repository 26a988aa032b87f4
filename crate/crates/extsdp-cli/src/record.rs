use std::io::Write;

use serde::{Deserialize, Serialize};

/// One swept parameter and its value at a grid point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Param {
    pub name: String,
    pub value: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Optimal,
    MaxIters,
    InfeasibleSuspected,
    /// The bound could not be computed; `error` says why.
    Failed,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Optimal => "optimal",
            Status::MaxIters => "max-iters",
            Status::InfeasibleSuspected => "infeasible-suspected",
            Status::Failed => "failed",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    /// Relative duality gap at the returned iterate.
    pub gap: Option<f64>,
    pub iters: usize,
    pub max_residual: Option<f64>,
    /// Real parameters before and after equality elimination.
    pub n_params: usize,
    pub n_free: usize,
}

/// Result of one bound at one grid point. Non-finite floats are stored as
/// `None`, so a record survives a JSON round trip unchanged.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    /// Position in the sweep; records are emitted in this order.
    pub index: usize,
    /// `teleport` or `qec`.
    pub task: String,
    /// Bound kind, e.g. `2pe-reduced` or `cpptp`.
    pub kind: String,
    /// Resource family: `mixed`, `tmsv` or `amp-damp`.
    pub resource: String,
    pub params: Vec<Param>,
    /// Target dimension.
    pub d: usize,
    /// Local dimension of the random states in `mixed` resources.
    pub local_dim: Option<usize>,
    pub value: Option<f64>,
    pub status: Status,
    pub error: Option<String>,
    pub solver: Option<SolverStats>,
    /// Wall time of build and solve.
    pub seconds: f64,
    pub version: String,
    pub seed: u64,
    pub prng: String,
}

pub(crate) fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// Shortest round-trip text, in exponent form for small magnitudes.
fn num(x: f64) -> String {
    if x != 0.0 && x.abs() < 1e-4 {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Writes `kind,<params>,value,status,gap,iters,seconds`, taking the
/// parameter columns from the first record.
pub fn write_csv<W: Write>(records: &[RunRecord], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let names: Vec<&str> = records.first().map(|r| r.params.iter().map(|p| p.name.as_str()).collect()).unwrap_or_default();
    let mut header = vec!["kind"];
    header.extend(&names);
    header.extend(["value", "status", "gap", "iters", "seconds"]);
    w.write_record(&header)?;
    for r in records {
        let mut row = vec![r.kind.clone()];
        row.extend(r.params.iter().map(|p| num(p.value)));
        row.push(opt(r.value));
        row.push(r.status.as_str().to_string());
        row.push(opt(r.solver.as_ref().and_then(|s| s.gap)));
        row.push(r.solver.as_ref().map(|s| s.iters.to_string()).unwrap_or_default());
        row.push(num(r.seconds));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_csv_string(records: &[RunRecord]) -> String {
    let mut buf = Vec::new();
    write_csv(records, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("CSV fields are UTF-8")
}
