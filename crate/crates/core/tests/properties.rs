use gaussdistill::fock::{
    distill_branch, distill_round, duan_round, fidelity_phi_plus, gaussian_to_fock, truncate_project, twirl_isotropic,
};
use gaussdistill::gaussian::{
    bring_to_standard_form, invariants, is_inseparable, is_physical, random_physical_state, standard_form_params,
    symmetric_rc_holds, ParamBox, RandomStateSpec,
};
use gaussdistill::phase_space::{symmetrize_pipeline, wigner_correlation};
use gaussdistill::pipeline::{check_distillable, run_protocol, sweep_grid, GridSpec, ProtocolConfig, Verdict};
use gaussdistill::{CorrelationMatrix, Decision, FockDensity, FockVector, GaussianState, LocalSymplectic};
use proptest::prelude::*;

fn scrambled() -> RandomStateSpec {
    RandomStateSpec { scramble: Some(1.0), ..Default::default() }
}

fn modest() -> ParamBox {
    ParamBox { n_a: (1.0, 2.5), n_b: (1.0, 2.5), k_x: (0.0, 2.0), k_p: (-2.0, 2.0) }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn invariants_survive_local_symplectics(
        seed in any::<u64>(),
        phi in prop::array::uniform4(-3.0..3.0f64),
        z in prop::array::uniform2(-1.5..1.5f64),
    ) {
        let m = random_physical_state(seed, &scrambled()).unwrap();
        let s = LocalSymplectic::rotation(phi[0], phi[1])
            .then(&LocalSymplectic::squeeze(z[0], z[1]))
            .then(&LocalSymplectic::rotation(phi[2], phi[3]));
        let (a, b) = (invariants(&m), invariants(&s.apply(&m)));
        prop_assert!(rel(a.det_a, b.det_a) < 1e-9);
        prop_assert!(rel(a.det_b, b.det_b) < 1e-9);
        prop_assert!(rel(a.det_ab, b.det_ab) < 1e-9);
        prop_assert!(rel(a.det, b.det) < 1e-9);
    }

    #[test]
    fn standard_form_is_idempotent(seed in any::<u64>()) {
        let m = random_physical_state(seed, &scrambled()).unwrap();
        let (s, std) = bring_to_standard_form(&m).unwrap();
        let (p, q) = (standard_form_params(&m).unwrap(), standard_form_params(&std).unwrap());
        prop_assert!((p.n_a - q.n_a).abs() < 1e-8 && (p.n_b - q.n_b).abs() < 1e-8);
        prop_assert!((p.k_x - q.k_x).abs() < 1e-8 && (p.k_p - q.k_p).abs() < 1e-8);
        prop_assert!((s.apply(&m).matrix() - std.matrix()).amax() < 1e-9 * m.matrix().amax());
        prop_assert!(std.standard_form_defect() < 1e-9 * m.matrix().amax());
    }

    #[test]
    fn physicality_agrees_with_parameter_inequalities(
        n_a in 0.5..3.0f64, n_b in 0.5..3.0f64, k_x in 0.0..3.0f64, k_p in -3.0..3.0f64,
    ) {
        let p = gaussdistill::StandardFormParams { n_a, n_b, k_x, k_p };
        let (d, c) = p.physicality_margins();
        prop_assume!(d.abs() > 1e-6 && c.abs() > 1e-6);
        let m = CorrelationMatrix::standard_form(&p);
        let params_say = d > 0.0 && c > 0.0 && n_a > 0.0 && n_a * n_b > k_x * k_x;
        let matrix_says = is_physical(&m).map(|ph| ph.physical).unwrap_or(false);
        prop_assert_eq!(params_say, matrix_says);
    }

    #[test]
    fn wigner_map_is_an_involution(seed in any::<u64>()) {
        let m = random_physical_state(seed, &scrambled()).unwrap();
        let back = wigner_correlation(&wigner_correlation(&m).unwrap()).unwrap();
        prop_assert!((back.matrix() - m.matrix()).amax() < 1e-10 * m.matrix().amax());
    }

    #[test]
    fn symmetric_inseparability_implies_condition(n in 1.0..4.0f64, k_x in 0.0..4.0f64, k_p in -4.0..4.0f64) {
        let p = gaussdistill::StandardFormParams::symmetric(n, k_x, k_p);
        let (d, c) = p.physicality_margins();
        prop_assume!(d >= 0.0 && c >= 0.0);
        let insep = is_inseparable(&CorrelationMatrix::standard_form(&p)).unwrap().decide(1e-10);
        let rc = symmetric_rc_holds(&p).unwrap().decide(1e-10);
        if insep == Decision::Holds {
            prop_assert_ne!(rc, Decision::Fails);
        }
    }

    #[test]
    fn symmetrization_preserves_verdict(seed in any::<u64>()) {
        let m = random_physical_state(seed, &scrambled()).unwrap();
        let sym = symmetrize_pipeline(&m).unwrap();
        prop_assert!((sym.params.n_a - sym.params.n_b).abs() < 1e-8 * sym.params.n_a);
        let before = is_inseparable(&m).unwrap().decide(1e-10);
        let after = is_inseparable(&sym.matrix).unwrap().decide(1e-10);
        if before != Decision::Boundary && after != Decision::Boundary {
            prop_assert_eq!(before, after);
        }
        if before == Decision::Holds {
            let a = check_distillable(&m).unwrap();
            prop_assert_eq!(a.verdict, Verdict::InseparableDistillable);
            prop_assert!(a.margins.symmetric_rc > 0.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fock_outputs_are_states(seed in any::<u64>(), n in 2usize..=4) {
        let spec = RandomStateSpec { bounds: modest(), scramble: Some(1.0), ..Default::default() };
        let m = random_physical_state(seed, &spec).unwrap();
        let rho = gaussian_to_fock(&GaussianState::centered(m).unwrap(), 6).unwrap();
        let (proj, kept) = truncate_project(&rho, n - 1).unwrap();
        prop_assert!(kept <= rho.trace() + 1e-12);
        let tw = twirl_isotropic(&proj, n).unwrap();
        prop_assert!((fidelity_phi_plus(&tw, n).unwrap() - fidelity_phi_plus(&proj, n).unwrap()).abs() < 1e-12);
        let iso = FockDensity::isotropic(n, fidelity_phi_plus(&proj, n).unwrap());
        prop_assert!(tw.max_abs_diff(&iso) < 1e-10);
        let (out, p) = distill_round(&proj, n).unwrap();
        prop_assert!(p > 0.0 && p <= 1.0 + 1e-12);
        for d in [&rho, &proj, &tw, &out] {
            prop_assert!(d.hermiticity_defect() <= 1e-12);
            prop_assert!(d.min_eigenvalue() >= -1e-10);
            prop_assert!(d.trace() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn isotropic_fidelity_grows(n in 2usize..=5, t in 0.02..0.98f64) {
        let f = 1.0 / n as f64 + t * (1.0 - 1.0 / n as f64);
        let (out, _) = distill_round(&FockDensity::isotropic(n, f), n).unwrap();
        prop_assert!(fidelity_phi_plus(&out, n).unwrap() > f);
    }

    #[test]
    fn duan_outcomes_match_xor_branches(r in 0.05..1.2f64) {
        let c = 3;
        let rho = FockVector::two_mode_squeezed(r, c).density();
        let duan = duan_round(&rho).unwrap();
        for o in &duan.outcomes {
            let k = o.total + 1;
            let sigma = if k <= c + 1 { rho.crop(o.total) } else { rho.embed(o.total) };
            let (branch, p) = distill_branch(&sigma, k, o.total).unwrap();
            prop_assert!((p - o.probability).abs() < 1e-12);
            if let Some(state) = &o.state {
                prop_assert!(state.max_abs_diff(&branch) < 1e-10);
            }
        }
    }
}

#[test]
fn protocol_is_deterministic() {
    let m =
        random_physical_state(5, &RandomStateSpec { inseparable: Some(true), bounds: modest(), ..Default::default() })
            .unwrap();
    let cfg = ProtocolConfig { cutoff: 10, ..Default::default() };
    let a = run_protocol(&m, &cfg);
    let b = run_protocol(&m, &cfg);
    assert_eq!(format!("{a:?}"), format!("{b:?}"));
}

#[test]
fn tmss_protocol_trajectory() {
    let report = run_protocol(&CorrelationMatrix::two_mode_squeezed(1.6), &ProtocolConfig::default()).unwrap();
    let f = report.fidelities();
    assert!(f.windows(2).all(|w| w[1] > w[0]), "{f:?}");
    assert!(report.reached_target && report.final_fidelity >= 0.99);
    let product: f64 = report.rounds.iter().map(|r| r.success_probability).product();
    assert!((product - report.cumulative_yield()).abs() < 1e-14);
    assert_eq!(report.rounds.last().unwrap().pairs_consumed, 1 << report.rounds.len());
}

#[test]
fn symmetric_grid_inseparable_points_satisfy_condition() {
    let grid: GridSpec = "n_a=1:3:7,n_b=n_a,k_x=0:2.5:7,k_p=-0.5:-2.5:5".parse().unwrap();
    let rows = sweep_grid(&grid, &ProtocolConfig::default(), false).unwrap();
    assert_eq!(rows.len(), 245);
    let (mut seen, mut separable_with_rc) = (0, 0);
    for row in rows.iter().filter(|r| r.physical) {
        let canonical = standard_form_params(&CorrelationMatrix::standard_form(&row.params)).unwrap();
        let rc = symmetric_rc_holds(&canonical).unwrap().decide(1e-10);
        match row.verdict.unwrap() {
            Verdict::InseparableDistillable => assert_eq!(rc, Decision::Holds, "{:?}", row.params),
            Verdict::Separable if rc == Decision::Holds => separable_with_rc += 1,
            _ => {}
        }
        seen += 1;
    }
    // The symmetric condition is necessary, not sufficient: separable points satisfy it too.
    eprintln!("{seen} physical points, {separable_with_rc} separable ones with the symmetric condition");
    assert!(seen > 50);
}

#[test]
fn conversion_trace_grows_with_cutoff() {
    let m = random_physical_state(9, &RandomStateSpec { bounds: modest(), scramble: Some(0.5), ..Default::default() })
        .unwrap();
    let st = GaussianState::centered(m).unwrap();
    let traces: Vec<f64> = (2..=12).step_by(2).map(|c| gaussian_to_fock(&st, c).unwrap().trace()).collect();
    assert!(traces.windows(2).all(|w| w[1] >= w[0] - 1e-12), "{traces:?}");
    assert!(*traces.last().unwrap() > 0.9);
}
