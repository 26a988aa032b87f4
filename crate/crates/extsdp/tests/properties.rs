use extsdp::bounds::{cpptp_general, e2pe_teleport_reduced};
use extsdp::quantum::{bilateral_twirl, ginibre, heisenberg_weyl, ChoiChannel, DensityState};
use extsdp::sdp::embed::SparseSym;
use extsdp::sdp::presolve::LmiProblem;
use extsdp::sdp::sdpa::{parse_sdpa, to_sdpa_string};
use extsdp::solver::SolverConfig;
use extsdp::symmetry::{tripartite_twirl, SymBasis};
use extsdp::tensor::{kron_compose, CMatrix, LabeledOperator, TraceMode, C64};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn random_op(dims: &[usize], seed: u64) -> LabeledOperator {
    let side = dims.iter().product();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    LabeledOperator::new(dims.to_vec(), ginibre(side, side, &mut rng)).unwrap()
}

fn random_hermitian(dims: &[usize], seed: u64) -> LabeledOperator {
    let x = random_op(dims, seed);
    x.add(&x.adjoint()).unwrap().scale(0.5).into_hermitian().unwrap()
}

fn random_state(dims: &[usize], seed: u64) -> DensityState {
    let g = random_op(dims, seed);
    let gg = g.matmul(&g.adjoint()).unwrap();
    let tr = gg.trace().re;
    DensityState::new(gg.scale(1.0 / tr)).unwrap()
}

fn dims_strategy() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1usize..=3, 1..=3)
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn trace_is_multiplicative_over_kron(da in 1usize..=3, db in 1usize..=3, seed in any::<u64>()) {
        let a = random_op(&[da], seed);
        let b = random_op(&[db], seed ^ 1);
        let ab = kron_compose(&[a.clone(), b.clone()]).unwrap();
        prop_assert!((ab.trace() - a.trace() * b.trace()).norm() < 1e-10);
        prop_assert_eq!(ab.dims(), &[da, db]);
    }

    #[test]
    fn partial_trace_factors_products(da in 1usize..=3, db in 2usize..=3, seed in any::<u64>()) {
        let a = random_op(&[da], seed);
        let b = random_op(&[db], seed ^ 7);
        let ab = a.kron(&b);
        let out = ab.partial_trace(&[1], TraceMode::Drop).unwrap();
        prop_assert!(out.max_abs_diff(&a.scale_complex(b.trace())).unwrap() < 1e-12);
        let all = ab.partial_trace(&[0, 1], TraceMode::Drop).unwrap();
        prop_assert!((all.trace() - ab.trace()).norm() < 1e-10);
    }

    #[test]
    fn kron_is_associative(seed in any::<u64>()) {
        let (a, b, c) = (random_op(&[2], seed), random_op(&[3], seed ^ 3), random_op(&[2], seed ^ 5));
        let left = a.kron(&b).kron(&c);
        let right = a.kron(&b.kron(&c));
        prop_assert_eq!(left.dims(), right.dims());
        prop_assert!(left.max_abs_diff(&right).unwrap() < 1e-12);
    }

    #[test]
    fn partial_transpose_is_involutive(dims in dims_strategy(), seed in any::<u64>(), mask in 0u8..8) {
        let x = random_op(&dims, seed);
        let subs: Vec<usize> = (0..dims.len()).filter(|k| mask & (1 << k) != 0).collect();
        let back = x.partial_transpose(&subs).unwrap().partial_transpose(&subs).unwrap();
        prop_assert!(back.max_abs_diff(&x).unwrap() == 0.0);
    }

    #[test]
    fn transpose_commutes_with_disjoint_trace(seed in any::<u64>()) {
        let x = random_op(&[2, 3, 2], seed);
        let a = x.partial_transpose(&[0]).unwrap().partial_trace(&[2], TraceMode::Drop).unwrap();
        let b = x.partial_trace(&[2], TraceMode::Drop).unwrap().partial_transpose(&[0]).unwrap();
        prop_assert!(a.max_abs_diff(&b).unwrap() < 1e-12);
    }

    #[test]
    fn permutation_preserves_spectrum(seed in any::<u64>(), which in 0usize..6) {
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let x = random_hermitian(&[2, 3, 2], seed);
        let y = x.permute_subsystems(&perms[which]).unwrap();
        let (ex, ey) = (sorted(x.eigenvalues().unwrap()), sorted(y.eigenvalues().unwrap()));
        for (a, b) in ex.iter().zip(&ey) {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn weyl_operators_depolarize(d in 2usize..=4, seed in any::<u64>()) {
        let rho = random_hermitian(&[d], seed);
        let mut acc = CMatrix::zeros(d, d);
        for z in 0..d {
            for x in 0..d {
                let w = heisenberg_weyl(d, z, x).unwrap();
                acc += &w * rho.data() * w.adjoint();
            }
        }
        let expected = CMatrix::identity(d, d) * (rho.trace() / C64::new(d as f64, 0.0));
        let dev = (acc / C64::new((d * d) as f64, 0.0) - expected).iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(dev < 1e-10);
    }

    #[test]
    fn bilateral_twirl_is_idempotent_and_trace_preserving(d in 2usize..=3, seed in any::<u64>()) {
        let x = random_hermitian(&[d, d], seed);
        let once = bilateral_twirl(&x, d).unwrap();
        let twice = bilateral_twirl(&once, d).unwrap();
        prop_assert!(twice.max_abs_diff(&once).unwrap() < 1e-12);
        prop_assert!((once.trace() - x.trace()).norm() < 1e-12);
    }

    #[test]
    fn tripartite_twirl_is_idempotent_and_trace_preserving(d in 2usize..=3, seed in any::<u64>()) {
        let basis = SymBasis::new(d).unwrap();
        let x = random_hermitian(&[d, d, d], seed);
        let once = tripartite_twirl(&x, &basis).unwrap();
        let twice = tripartite_twirl(&once, &basis).unwrap();
        prop_assert!(twice.max_abs_diff(&once).unwrap() < 1e-10);
        prop_assert!((once.trace() - x.trace()).norm() < 1e-10);
    }

    #[test]
    fn sdpa_text_round_trips(
        sizes in prop::collection::vec(1usize..=3, 1..=3),
        raw in prop::collection::vec((any::<f64>(), 0usize..3, 0usize..3), 1..=12),
        objective in prop::collection::vec(-1e6f64..1e6, 1..=4),
    ) {
        let finite = |v: f64| if v.is_finite() { v } else { 1.0 };
        let entries = |shift: usize| {
            let block: Vec<(usize, usize, f64)> = raw
                .iter()
                .enumerate()
                .filter(|(k, _)| k % 2 == shift)
                .map(|(_, &(v, i, j))| (i, j, finite(v)))
                .collect();
            block
        };
        let clip = |n: usize, e: Vec<(usize, usize, f64)>| {
            SparseSym::from_unsorted(e.into_iter().filter(|&(i, j, v)| i < n && j < n && v != 0.0).collect())
        };
        let constant: Vec<SparseSym> = sizes.iter().map(|&n| clip(n, entries(0))).collect();
        let coeffs: Vec<Vec<(usize, SparseSym)>> = objective
            .iter()
            .map(|_| vec![(0, clip(sizes[0], entries(1)))].into_iter().filter(|(_, m)| !m.is_empty()).collect())
            .collect();
        let lmi = LmiProblem { block_sizes: sizes.clone(), constant, coeffs, objective: objective.clone(), offset: 0.0 };
        let text = to_sdpa_string(&lmi);
        let back = parse_sdpa(&text).unwrap();
        prop_assert_eq!(&back, &lmi);
        prop_assert_eq!(to_sdpa_string(&back), text);
    }
}

proptest! {
    // each case runs two small SDPs
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn bounds_are_nested_and_in_range(seed in any::<u64>()) {
        let rho = random_state(&[2, 2], seed);
        let cfg = SolverConfig::default();
        let two_pe = e2pe_teleport_reduced(&rho, 2, &cfg).unwrap();
        let cpptp = cpptp_general(&ChoiChannel::identity(2), &rho, &cfg).unwrap();
        for v in [two_pe.value, cpptp.value] {
            prop_assert!((-1e-7..=1.0 + 1e-7).contains(&v), "{}", v);
        }
        prop_assert!(cpptp.value <= two_pe.value + 1e-6);
        for (name, r) in two_pe.residuals.iter().chain(&cpptp.residuals) {
            prop_assert!(*r <= 1e-7, "{} residual {:e}", name, r);
        }
        let recon = two_pe.reconstruction.unwrap();
        prop_assert!(recon.is_valid(1e-7).unwrap());
    }
}
