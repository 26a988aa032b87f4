use std::time::Instant;

use extsdp::bounds::{
    build_cpptp_general, build_e2pe_general, build_e2pe_qec_reduced, build_e2pe_superchannel_general,
    build_e2pe_teleport_reduced, cpptp_general, e2pe_general, e2pe_qec_reduced, e2pe_superchannel_general,
    e2pe_teleport_reduced, BoundResult,
};
use extsdp::quantum::choi_from_kraus;
use extsdp::resources::{amp_damp3, mixed_resource, random_density, tmsv_truncated, SweepKind, SweepSpec, PRNG_ID};
use extsdp::sdp::SdpProblem;
use extsdp::solver::{SolverConfig, SolverStatus};
use extsdp::{ChoiChannel, DensityState, Error, Result};
use rayon::prelude::*;

use crate::record::{finite, Param, RunRecord, SolverStats, Status};

/// Environment variable holding the worker count for sweeps.
pub const WORKERS_ENV: &str = "EXTSDP_WORKERS";

/// Photon-number cutoff of the TMSV resource, giving qutrit modes.
pub const TMSV_CUTOFF: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    TwoPeReduced,
    TwoPeGeneral,
    Cpptp,
    QecReduced,
    QecGeneral,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::TwoPeReduced => "2pe-reduced",
            Method::TwoPeGeneral => "2pe-general",
            Method::Cpptp => "cpptp",
            Method::QecReduced => "qec-reduced",
            Method::QecGeneral => "qec-general",
        }
    }

    fn is_qec(self) -> bool {
        matches!(self, Method::QecReduced | Method::QecGeneral)
    }
}

/// A sweep plus the bounds to evaluate at every point.
#[derive(Clone, Debug)]
pub struct Plan {
    pub spec: SweepSpec,
    pub methods: Vec<Method>,
    /// Dimension of the random local states of `mixed` resources.
    pub local_dim: usize,
}

/// One bound at one grid point.
#[derive(Clone, Debug)]
pub struct Job {
    pub index: usize,
    pub point: Vec<f64>,
    pub method: Method,
}

pub enum Instance {
    Teleport(DensityState),
    Qec(ChoiChannel),
}

impl Plan {
    pub fn new(spec: SweepSpec, methods: Vec<Method>, local_dim: usize) -> Result<Self> {
        let qec = spec.kind == SweepKind::AmpDamp;
        if methods.is_empty() || methods.iter().any(|m| m.is_qec() != qec) {
            return Err(Error::Domain(format!("methods {methods:?} do not apply to {:?} sweeps", spec.kind)));
        }
        if local_dim == 0 {
            return Err(Error::Domain("local dimension must be positive".into()));
        }
        Ok(Self { spec, methods, local_dim })
    }

    /// Jobs in output order: grid points in sweep order, methods in the order
    /// given within each point.
    pub fn jobs(&self) -> Result<Vec<Job>> {
        let points = self.spec.points();
        if points.is_empty() {
            return Err(Error::Domain("no instances".into()));
        }
        let jobs = points
            .into_iter()
            .flat_map(|point| self.methods.iter().map(move |&method| (point.clone(), method)))
            .enumerate()
            .map(|(index, (point, method))| Job { index, point, method })
            .collect();
        Ok(jobs)
    }

    pub fn task(&self) -> &'static str {
        if self.spec.kind == SweepKind::AmpDamp {
            "qec"
        } else {
            "teleport"
        }
    }

    pub fn resource_name(&self) -> &'static str {
        match self.spec.kind {
            SweepKind::MixedState => "mixed",
            SweepKind::Tmsv => "tmsv",
            SweepKind::AmpDamp => "amp-damp",
        }
    }

    /// Resource at `point`. Mixed resources draw `σ_Â` from `seed` and `σ_B̂`
    /// from `seed + 1`.
    pub fn instance(&self, point: &[f64]) -> Result<Instance> {
        let seed = self.spec.seed;
        Ok(match self.spec.kind {
            SweepKind::MixedState => {
                let sa = random_density(self.local_dim, seed)?;
                let sb = random_density(self.local_dim, seed.wrapping_add(1))?;
                Instance::Teleport(mixed_resource(point[0], &sa, &sb)?)
            }
            SweepKind::Tmsv => Instance::Teleport(tmsv_truncated(point[0], TMSV_CUTOFF)?),
            SweepKind::AmpDamp => {
                let k = amp_damp3(point[0], point[1], point[2])?;
                Instance::Qec(choi_from_kraus(&k, &[3], &[3])?)
            }
        })
    }

    pub fn build(&self, job: &Job) -> Result<SdpProblem> {
        let d = self.spec.d;
        let target = ChoiChannel::identity(d);
        match (self.instance(&job.point)?, job.method) {
            (Instance::Teleport(rho), Method::TwoPeReduced) => build_e2pe_teleport_reduced(&rho, d),
            (Instance::Teleport(rho), Method::TwoPeGeneral) => build_e2pe_general(&target, &rho),
            (Instance::Teleport(rho), Method::Cpptp) => build_cpptp_general(&target, &rho),
            (Instance::Qec(ch), Method::QecReduced) => build_e2pe_qec_reduced(&ch, d),
            (Instance::Qec(ch), Method::QecGeneral) => build_e2pe_superchannel_general(&target, &ch),
            _ => unreachable!("plan methods are checked against the sweep kind"),
        }
    }

    fn bound(&self, job: &Job, cfg: &SolverConfig) -> Result<BoundResult> {
        let d = self.spec.d;
        let target = ChoiChannel::identity(d);
        match (self.instance(&job.point)?, job.method) {
            (Instance::Teleport(rho), Method::TwoPeReduced) => e2pe_teleport_reduced(&rho, d, cfg),
            (Instance::Teleport(rho), Method::TwoPeGeneral) => e2pe_general(&target, &rho, cfg),
            (Instance::Teleport(rho), Method::Cpptp) => cpptp_general(&target, &rho, cfg),
            (Instance::Qec(ch), Method::QecReduced) => e2pe_qec_reduced(&ch, d, cfg),
            (Instance::Qec(ch), Method::QecGeneral) => e2pe_superchannel_general(&target, &ch, cfg),
            _ => unreachable!("plan methods are checked against the sweep kind"),
        }
    }

    /// Evaluates one job. Failures become records with status `failed`.
    pub fn run_job(&self, job: &Job, cfg: &SolverConfig) -> RunRecord {
        let start = Instant::now();
        let outcome = self.bound(job, cfg);
        let seconds = start.elapsed().as_secs_f64();
        let names = self.spec.kind.axis_names();
        let mut rec = RunRecord {
            index: job.index,
            task: self.task().into(),
            kind: job.method.label().into(),
            resource: self.resource_name().into(),
            params: names.iter().zip(&job.point).map(|(n, &v)| Param { name: (*n).into(), value: v }).collect(),
            d: self.spec.d,
            local_dim: (self.spec.kind == SweepKind::MixedState).then_some(self.local_dim),
            value: None,
            status: Status::Failed,
            error: None,
            solver: None,
            seconds,
            version: extsdp::VERSION.into(),
            seed: self.spec.seed,
            prng: PRNG_ID.into(),
        };
        match outcome {
            Ok(b) => {
                rec.value = finite(b.value);
                rec.status = match b.solver.status {
                    SolverStatus::Optimal => Status::Optimal,
                    SolverStatus::MaxIters => Status::MaxIters,
                    SolverStatus::InfeasibleSuspected => Status::InfeasibleSuspected,
                };
                rec.solver = Some(SolverStats {
                    gap: finite(b.solver.gap),
                    iters: b.solver.iters,
                    max_residual: finite(b.solver.max_residual),
                    n_params: b.solver.n_params,
                    n_free: b.solver.n_free,
                });
            }
            Err(e) => rec.error = Some(e.to_string()),
        }
        rec
    }

    /// Runs every job on `workers` threads and returns the records in job
    /// order. `progress` is called from the workers as jobs finish.
    pub fn run(
        &self,
        cfg: &SolverConfig,
        workers: usize,
        progress: impl Fn(&RunRecord) + Sync,
    ) -> Result<Vec<RunRecord>> {
        let jobs = self.jobs()?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .build()
            .map_err(|e| Error::Domain(format!("cannot start worker pool: {e}")))?;
        Ok(pool.install(|| {
            jobs.par_iter()
                .map(|job| {
                    let rec = self.run_job(job, cfg);
                    progress(&rec);
                    rec
                })
                .collect()
        }))
    }
}

/// Worker count from [`WORKERS_ENV`], defaulting to the available cores.
pub fn workers_from_env() -> Result<usize> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(Error::Domain(format!("{WORKERS_ENV}={v:?} is not a positive integer"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)),
    }
}
