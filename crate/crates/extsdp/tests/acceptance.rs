//! Acceptance suite: one PASS/FAIL/SKIP line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the report reads top to
//! bottom; exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use extsdp::bounds::{
    cpptp_general, diamond_distance_half, e2pe_general, e2pe_qec_reduced, e2pe_superchannel_general,
    e2pe_teleport_reduced, root_fidelity, BoundResult,
};
use extsdp::quantum::{bilateral_twirl, choi_from_kraus, ginibre, haar_unitary, ChoiChannel, DensityState, KrausChannel};
use extsdp::resources::{amp_damp3, amplitude_damping, dephasing, mixed_resource, random_density, tmsv_truncated};
use extsdp::sdp::model::{MatrixExpr, SdpProblem, Sense};
use extsdp::sdp::sdpa::{external_to_internal, parse_sdpa, solve_external, to_sdpa_string};
use extsdp::sdp::{embed_real, presolve};
use extsdp::solver::{solve, solve_lmi, SolverConfig, SolverStatus};
use extsdp::symmetry::{g, transfer_matrices_check, tripartite_twirl, SymBasis, MINUS, PLUS, ZERO_IDX};
use extsdp::tensor::{CMatrix, LabeledOperator, C64};
use extsdp::Result;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

enum Verdict {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn verdict(ok: bool, detail: String) -> Verdict {
    if ok {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

fn cfg() -> SolverConfig {
    SolverConfig::default()
}

fn kraus_choi(k: &KrausChannel) -> ChoiChannel {
    choi_from_kraus(k, &[k.in_dim()], &[k.out_dim()]).unwrap()
}

/// Mixed resources over `p ∈ {0.1, …, 0.9}` plus two Ginibre states, all on
/// two qubits.
fn teleport_instances() -> Vec<(String, DensityState)> {
    let sa = random_density(2, 11).unwrap();
    let sb = random_density(2, 12).unwrap();
    let mut out: Vec<_> = (1..=9)
        .map(|k| {
            let p = k as f64 / 10.0;
            (format!("mixed p={p}"), mixed_resource(p, &sa, &sb).unwrap())
        })
        .collect();
    for seed in [21, 22] {
        let op = random_density(4, seed).unwrap().op().clone().relabel(vec![2, 2]).unwrap();
        out.push((format!("ginibre seed={seed}"), DensityState::new(op).unwrap()));
    }
    out
}

fn qec_instances() -> Vec<(String, ChoiChannel)> {
    let mut out = Vec::new();
    for gamma in [0.0, 0.2, 0.5] {
        out.push((format!("amplitude damping γ={gamma}"), kraus_choi(&amplitude_damping(gamma).unwrap())));
    }
    for p in [0.2, 0.6] {
        out.push((format!("dephasing p={p}"), kraus_choi(&dephasing(p).unwrap())));
    }
    out.push(("replacer to π".into(), ChoiChannel::replacer(2, &DensityState::maximally_mixed(&[2]))));
    out
}

fn oracle_teleport() -> Result<Verdict> {
    let start = Instant::now();
    let id = ChoiChannel::identity(2);
    let mut worst: f64 = 0.0;
    for (_, rho) in teleport_instances() {
        let reduced = e2pe_teleport_reduced(&rho, 2, &cfg())?.value;
        let general = e2pe_general(&id, &rho, &cfg())?.value;
        worst = worst.max((reduced - general).abs());
    }
    let t = start.elapsed();
    Ok(verdict(
        worst <= 1e-5 && t <= Duration::from_secs(120),
        format!("11 qubit resources, max |reduced − general| = {worst:.1e}, {:.1}s", t.as_secs_f64()),
    ))
}

fn oracle_qec() -> Result<Verdict> {
    let start = Instant::now();
    let id = ChoiChannel::identity(2);
    let mut worst: f64 = 0.0;
    for (_, ch) in qec_instances() {
        let reduced = e2pe_qec_reduced(&ch, 2, &cfg())?.value;
        let general = e2pe_superchannel_general(&id, &ch, &cfg())?.value;
        worst = worst.max((reduced - general).abs());
    }
    let t = start.elapsed();
    Ok(verdict(
        worst <= 1e-5 && t <= Duration::from_secs(120),
        format!("6 qubit channels, max |reduced − general| = {worst:.1e}, {:.1}s", t.as_secs_f64()),
    ))
}

fn exact_zeros() -> Result<Verdict> {
    let mut values = Vec::new();
    for d in [2, 3] {
        values.push(e2pe_teleport_reduced(&DensityState::max_entangled(d), d, &cfg())?.value);
        values.push(e2pe_qec_reduced(&ChoiChannel::identity(d), d, &cfg())?.value);
    }
    let worst = values.iter().copied().map(f64::abs).fold(0.0, f64::max);
    Ok(verdict(worst <= 1e-6, format!("Φ₂, Φ₃, id₂, id₃: max |bound| = {worst:.1e}")))
}

fn hierarchy() -> Result<Verdict> {
    let id2 = ChoiChannel::identity(2);
    let mut worst_order = f64::NEG_INFINITY;
    for (_, rho) in teleport_instances() {
        let two_pe = e2pe_teleport_reduced(&rho, 2, &cfg())?.value;
        let cpptp = cpptp_general(&id2, &rho, &cfg())?.value;
        worst_order = worst_order.max(cpptp - two_pe);
    }
    // Qubit resources leave no room between the two relaxations; the strict
    // gap shows up once the local resource dimension is 3.
    let mut qubit_gap: f64 = 0.0;
    for seed in 0..5 {
        let rho = mixed_resource(0.25, &random_density(2, 2 * seed).unwrap(), &random_density(2, 2 * seed + 1).unwrap())?;
        qubit_gap = qubit_gap.max(e2pe_teleport_reduced(&rho, 2, &cfg())?.value - cpptp_general(&id2, &rho, &cfg())?.value);
    }
    let rho = mixed_resource(0.25, &random_density(3, 0).unwrap(), &random_density(3, 1).unwrap())?;
    let two_pe = e2pe_teleport_reduced(&rho, 2, &cfg())?.value;
    let cpptp = cpptp_general(&id2, &rho, &cfg())?.value;
    let gap = two_pe - cpptp;
    Ok(verdict(
        worst_order <= 1e-6 && gap >= 1e-4,
        format!(
            "max(e_CPPTP − e_2PE) = {worst_order:.1e} on criterion-1 set; qutrit-resource p=0.25 gap {gap:.2e} (qubit seeds: {qubit_gap:.1e})"
        ),
    ))
}

fn measure_equality() -> Result<Verdict> {
    let sa = random_density(2, 11).unwrap();
    let sb = random_density(2, 12).unwrap();
    let instances: Vec<(usize, BoundResult)> = vec![
        (2, e2pe_teleport_reduced(&mixed_resource(0.25, &sa, &sb)?, 2, &cfg())?),
        (2, e2pe_teleport_reduced(&mixed_resource(0.7, &sa, &sb)?, 2, &cfg())?),
        (2, e2pe_teleport_reduced(&tmsv_truncated(0.5, 2)?, 2, &cfg())?),
        (2, e2pe_qec_reduced(&kraus_choi(&amplitude_damping(0.3)?), 2, &cfg())?),
        (3, e2pe_qec_reduced(&kraus_choi(&amp_damp3(0.3, 0.1, 0.1)?), 3, &cfg())?),
    ];
    let mut worst: f64 = 0.0;
    for (d, r) in &instances {
        let recon = r.reconstruction.as_ref().expect("reduced bounds reconstruct");
        let e_f = r.fidelity_weight.expect("reduced bounds report E_F");
        let id = ChoiChannel::identity(*d);
        let diamond = diamond_distance_half(&id, recon, &cfg())?;
        let infidelity = 1.0 - root_fidelity(&id, recon, &cfg())?.powi(2);
        worst = worst.max((diamond - infidelity).abs()).max((diamond - (1.0 - e_f)).abs()).max((r.value - (1.0 - e_f)).abs());
    }
    Ok(verdict(worst <= 1e-6, format!("5 reconstructions, max deviation among ½‖·‖⋄, 1 − F, 1 − E_F: {worst:.1e}")))
}

fn basis_identities() -> Result<Verdict> {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for d in 2..=4 {
        let b = SymBasis::new(d)?;
        let df = d as f64;
        let expected = [df * (df + 2.0) * (df - 1.0) / 2.0, df * (df - 2.0) * (df + 1.0) / 2.0, 2.0 * df];
        for (label, want) in [PLUS, MINUS, ZERO_IDX].into_iter().zip(expected) {
            worst = worst.max((b.s[label].trace().re - want).abs());
        }
        let r_expected = [df * (df + 1.0) * (df + 2.0) / 6.0, df * (df - 1.0) * (df - 2.0) / 6.0, 2.0 * df * (df * df - 1.0) / 3.0];
        for (label, want) in [PLUS, MINUS, ZERO_IDX].into_iter().zip(r_expected) {
            worst = worst.max((b.r[label].trace().re - want).abs());
        }
        let id = LabeledOperator::identity(&[d, d, d]);
        for family in [&b.s, &b.r] {
            let sum = family[PLUS].add(&family[MINUS])?.add(&family[ZERO_IDX])?;
            worst = worst.max(sum.max_abs_diff(&id)?);
        }
        for i in b.active() {
            for j in b.active() {
                let want = if i == j { b.s[g(i)].trace().re } else { 0.0 };
                worst = worst.max((b.s[i].inner(&b.s[j])? - C64::new(want, 0.0)).norm());
            }
        }
        worst = worst.max(transfer_matrices_check(&b)?.max());
    }
    let t = start.elapsed();
    Ok(verdict(
        worst <= 1e-10 && t <= Duration::from_secs(5),
        format!("d = 2, 3, 4: max residual {worst:.1e}, {:.2}s", t.as_secs_f64()),
    ))
}

fn unit_hermitian(side: usize, rng: &mut ChaCha20Rng) -> CMatrix {
    let g = ginibre(side, side, rng);
    let h = (&g + g.adjoint()) * C64::new(0.5, 0.0);
    let norm = h.norm();
    h / C64::new(norm, 0.0)
}

fn twirl_monte_carlo() -> Result<Verdict> {
    const SAMPLES: usize = 10_000;
    let mut rng = ChaCha20Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for d in [2, 3] {
        let x = LabeledOperator::new(vec![d, d], unit_hermitian(d * d, &mut rng))?;
        let mut acc = CMatrix::zeros(d * d, d * d);
        for _ in 0..SAMPLES {
            let u = haar_unitary(d, &mut rng);
            let w = u.kronecker(&u.conjugate());
            acc += &w * x.data() * w.adjoint();
        }
        let mc = acc / C64::new(SAMPLES as f64, 0.0);
        worst = worst.max((mc - bilateral_twirl(&x, d)?.data()).norm());

        let basis = SymBasis::new(d)?;
        let x = LabeledOperator::new(vec![d, d, d], unit_hermitian(d * d * d, &mut rng))?;
        let mut acc = CMatrix::zeros(d * d * d, d * d * d);
        for _ in 0..SAMPLES {
            let u = haar_unitary(d, &mut rng);
            let w = u.conjugate().kronecker(&u).kronecker(&u);
            acc += &w * x.data() * w.adjoint();
        }
        let mc = acc / C64::new(SAMPLES as f64, 0.0);
        worst = worst.max((mc - tripartite_twirl(&x, &basis)?.data()).norm());
    }
    Ok(verdict(worst <= 5e-2, format!("bilateral and tripartite, d = 2, 3, 10⁴ samples: max Frobenius {worst:.1e}")))
}

fn is_monotone(values: &[f64], increasing: bool, tol: f64) -> bool {
    values.windows(2).all(|w| if increasing { w[1] >= w[0] - tol } else { w[1] <= w[0] + tol })
}

fn figure_shapes() -> Result<Verdict> {
    let start = Instant::now();
    let tmsv: Vec<f64> = (0..10)
        .map(|k| e2pe_teleport_reduced(&tmsv_truncated(0.1 * k as f64, 2)?, 2, &cfg()).map(|r| r.value))
        .collect::<Result<_>>()?;
    let t_tmsv = start.elapsed();
    let start = Instant::now();
    let damp: Vec<f64> = (0..7)
        .map(|k| {
            let ch = kraus_choi(&amp_damp3(0.1 * k as f64, 0.1, 0.1)?);
            e2pe_qec_reduced(&ch, 3, &cfg()).map(|r| r.value)
        })
        .collect::<Result<_>>()?;
    let corner = e2pe_qec_reduced(&kraus_choi(&amp_damp3(0.0, 0.0, 0.0)?), 3, &cfg())?.value;
    let t_damp = start.elapsed();

    // qutrit-resource oracle spot checks; a qutrit target would need 729-side blocks
    let start = Instant::now();
    let id2 = ChoiChannel::identity(2);
    let rho = tmsv_truncated(0.5, 2)?;
    let mut spot = (e2pe_teleport_reduced(&rho, 2, &cfg())?.value - e2pe_general(&id2, &rho, &cfg())?.value).abs();
    let ch = kraus_choi(&amp_damp3(0.3, 0.1, 0.1)?);
    spot = spot.max((e2pe_qec_reduced(&ch, 2, &cfg())?.value - e2pe_superchannel_general(&id2, &ch, &cfg())?.value).abs());
    let t_spot = start.elapsed();

    let ok = is_monotone(&tmsv, false, 1e-6)
        && is_monotone(&damp, true, 1e-6)
        && corner <= 1e-4
        && t_tmsv <= Duration::from_secs(600)
        && t_damp <= Duration::from_secs(600)
        && spot <= 1e-5
        && t_spot <= Duration::from_secs(600);
    Ok(verdict(
        ok,
        format!(
            "TMSV λ∈[0,0.9] {:.4}→{:.4} non-increasing ({:.0}s); amp-damp γ10∈[0,0.6] {:.4}→{:.4} non-decreasing ({:.0}s); zero corner {corner:.1e}; qutrit-resource general vs reduced {spot:.1e} ({:.0}s)",
            tmsv[0],
            tmsv[9],
            t_tmsv.as_secs_f64(),
            damp[0],
            damp[6],
            t_damp.as_secs_f64(),
            t_spot.as_secs_f64()
        ),
    ))
}

fn scalar(expr: MatrixExpr, op: &LabeledOperator) -> Result<MatrixExpr> {
    let subsystems: Vec<usize> = (0..op.dims().len()).collect();
    expr.contract(&subsystems, op.data())
}

/// Five SDPs with known optima.
fn toy_library() -> Result<Vec<(&'static str, SdpProblem, f64)>> {
    let mut out = Vec::new();

    let mut p = SdpProblem::new();
    let t = p.add_variable("t", &[1], None)?;
    let t_id = p.var(t).kron_identity(1, 2)?.relabel(vec![2])?;
    p.add_psd("I − tI", MatrixExpr::scalar_identity(2, 1.0).sub(t_id)?)?;
    p.set_objective(Sense::Maximize, p.var(t))?;
    out.push(("max t : I − tI ⪰ 0", p, 1.0));

    let mut p = SdpProblem::new();
    let x = p.add_variable("X", &[2], None)?;
    p.add_psd("X", p.var(x))?;
    p.add_eq("Tr X = 1", p.var(x).ptrace(&[0])?.sub(MatrixExpr::scalar_identity(1, 1.0))?)?;
    let obj = scalar(p.var(x), &LabeledOperator::diag(&[1.0, -1.0]))?;
    p.set_objective(Sense::Maximize, obj)?;
    out.push(("top eigenvalue of diag(1, −1)", p, 1.0));

    // min ⟨C, X⟩ over density matrices with C = [[2, i], [−i, 2]], spectrum {1, 3}
    let mut p = SdpProblem::new();
    let x = p.add_variable("X", &[2], None)?;
    p.add_psd("X", p.var(x))?;
    p.add_eq("Tr X = 1", p.var(x).ptrace(&[0])?.sub(MatrixExpr::scalar_identity(1, 1.0))?)?;
    let c = LabeledOperator::from_rows(2, &[C64::new(2.0, 0.0), C64::new(0.0, 1.0), C64::new(0.0, -1.0), C64::new(2.0, 0.0)])?;
    let obj = scalar(p.var(x), &c)?;
    p.set_objective(Sense::Minimize, obj)?;
    out.push(("complex bottom eigenvalue", p, 1.0));

    // Lovász theta of the 5-cycle
    let mut p = SdpProblem::new();
    let x = p.add_variable("X", &[5], None)?;
    p.add_psd("X", p.var(x))?;
    p.add_eq("Tr X = 1", p.var(x).ptrace(&[0])?.sub(MatrixExpr::scalar_identity(1, 1.0))?)?;
    for i in 0..5 {
        let j = (i + 1) % 5;
        let mut e = CMatrix::zeros(5, 5);
        e[(i, j)] = C64::new(1.0, 0.0);
        e[(j, i)] = C64::new(1.0, 0.0);
        let edge = scalar(p.var(x), &LabeledOperator::new(vec![5], e)?)?;
        p.add_eq(&format!("X_{i}{j} = 0"), edge)?;
    }
    let ones = LabeledOperator::new(vec![5], CMatrix::from_element(5, 5, C64::new(1.0, 0.0)))?;
    let obj = scalar(p.var(x), &ones)?;
    p.set_objective(Sense::Maximize, obj)?;
    out.push(("Lovász theta of C₅", p, 5f64.sqrt()));

    out.push((
        "½‖id₂ − D₂‖⋄",
        extsdp::bounds::build_diamond(&ChoiChannel::identity(2), &extsdp::quantum::randomizing_channel_choi(2)?)?,
        1.0,
    ));
    Ok(out)
}

fn solver_toys() -> Result<Verdict> {
    let mut worst: f64 = 0.0;
    for (_, p, truth) in toy_library()? {
        let r = solve(&p, &cfg())?;
        let err = if r.status == SolverStatus::Optimal { (r.value - truth).abs() } else { f64::INFINITY };
        worst = worst.max(err);
    }
    let instance = extsdp::bounds::build_e2pe_teleport_reduced(&DensityState::max_entangled(2), 2)?;
    let lmi = presolve(&embed_real(&instance)?)?.lmi;
    let text = to_sdpa_string(&lmi);
    let parsed = parse_sdpa(&text)?;
    let round_trip = parsed == lmi && to_sdpa_string(&parsed) == text;
    let toys_ok = worst <= 1e-7 && round_trip;
    let detail = format!("5 toys max error {worst:.1e}; SDPA round trip {}", if round_trip { "bit-exact" } else { "differs" });
    match solve_external(&lmi) {
        None => Ok(if toys_ok {
            Verdict::Skip(format!("{detail}; no csdp/sdpa on PATH, external comparison skipped"))
        } else {
            Verdict::Fail(detail)
        }),
        Some(ext) => {
            let internal = solve_lmi(&lmi, &cfg())?.lower;
            let external = external_to_internal(&lmi, ext?);
            let diff = (internal - external).abs();
            Ok(verdict(toys_ok && diff <= 1e-6, format!("{detail}; internal vs external {diff:.1e}")))
        }
    }
}

type Criterion = (&'static str, fn() -> Result<Verdict>);

fn main() -> ExitCode {
    let criteria: Vec<Criterion> = vec![
        ("oracle equivalence, teleportation", oracle_teleport),
        ("oracle equivalence, QEC", oracle_qec),
        ("exact zeros", exact_zeros),
        ("hierarchy ordering", hierarchy),
        ("error-measure equality", measure_equality),
        ("symmetry-basis identities", basis_identities),
        ("twirl Monte Carlo", twirl_monte_carlo),
        ("figure shapes", figure_shapes),
        ("solver toys and SDPA", solver_toys),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = false;
    for (k, (name, run)) in criteria.into_iter().enumerate() {
        let n = k + 1;
        if !filter.is_empty() && !filter.iter().any(|f| f == &n.to_string()) {
            continue;
        }
        let line = match run() {
            Ok(Verdict::Pass(d)) => format!("criterion {n} PASS  {name}: {d}"),
            Ok(Verdict::Skip(d)) => format!("criterion {n} PASS  {name}: {d} [external part SKIPPED]"),
            Ok(Verdict::Fail(d)) => {
                failed = true;
                format!("criterion {n} FAIL  {name}: {d}")
            }
            Err(e) => {
                failed = true;
                format!("criterion {n} FAIL  {name}: error {e}")
            }
        };
        println!("{line}");
    }
    if failed {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
