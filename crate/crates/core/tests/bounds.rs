use mixbound::bounds::{check, check_gradient_growth, check_mixing_bmo, check_mixing_sup, GradientOf};
use mixbound::dynamics::run;
use mixbound::scenarios::build;
use mixbound::{BmoConfig, BoundKind, DiagnosticRecord, ScenarioSpec, StepControl};

fn shear_records(n: usize, t_end: f64) -> Vec<DiagnosticRecord> {
    let mut spec = ScenarioSpec::preset("shear", n).unwrap();
    spec.t_end = t_end;
    spec.sample_every = 0.1;
    let state = build(&spec).unwrap();
    let ctl = StepControl::new(spec.cfl, 0.05, 1e-9).unwrap();
    let mut recs = Vec::new();
    run(&state, &ctl, t_end, spec.sample_every, &BmoConfig::doubling(state.grid()), &mut recs).unwrap();
    recs
}

/// Instantaneous growth rate `ln(g(t)²/g(0)²) / (t |ω(0)|_∞)` at the sample nearest `t`.
fn gradient_rate(recs: &[DiagnosticRecord], t: f64) -> f64 {
    let r = recs.iter().min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs())).unwrap();
    let g0 = recs[0].grad_l2_theta;
    (r.grad_l2_theta / g0).powi(2).ln() / ((r.t - recs[0].t) * recs[0].linf_omega)
}

#[test]
fn shear_gradient_rate_decays_with_horizon() {
    let recs = shear_records(128, 10.0);
    assert!(recs.iter().all(|r| !r.is_under_resolved()));
    let upto = |t: f64| -> Vec<DiagnosticRecord> { recs.iter().filter(|r| r.t <= t + 1e-12).cloned().collect() };
    let short = check_gradient_growth(&upto(2.0), GradientOf::Theta).unwrap();
    let long = check_gradient_growth(&recs, GradientOf::Theta).unwrap();
    assert!(short.holds && long.holds);

    // linear filamentation: the rate falls off like ln(t)/t
    let (r2, r10) = (gradient_rate(&recs, 2.0), gradient_rate(&recs, 10.0));
    let exact = |t: f64| (1.0f64 + 0.5 * t * t).ln() / t;
    assert!(r10 < r2, "{r10} vs {r2}");
    assert!((r10 / r2 - exact(10.0) / exact(2.0)).abs() < 1e-2);

    // the fit is a running maximum, attained before the end of the long run
    assert!(long.lambda_fit >= short.lambda_fit);
    assert!(long.binding_time.unwrap() < 5.0);
}

#[test]
fn shear_reports_are_consistent() {
    let recs = shear_records(64, 2.0);
    let bmo = check_mixing_bmo(&recs).unwrap();
    let sup = check_mixing_sup(&recs).unwrap();
    assert!(bmo.holds && sup.holds);
    // bmo ≤ sup pointwise, so the BMO budget is smaller and its rate larger
    assert!(bmo.lambda_fit >= sup.lambda_fit);
    let t = bmo.binding_time.unwrap();
    let m = bmo.margin_series.iter().find(|m| m.t == t).unwrap();
    assert!(m.margin.abs() <= 1e-8);
    for kind in BoundKind::ALL {
        let r = check(&recs, kind).unwrap();
        assert_eq!(r.kind, kind);
        assert_eq!(r.margin_series.len(), recs.len());
        assert!(r.margin_series.iter().all(|m| m.margin >= 0.0));
    }
    // vorticity is steady, so its gradient never grows
    let w = check_gradient_growth(&recs, GradientOf::Omega).unwrap();
    assert!(w.lambda_fit < 1e-10);
}

#[test]
fn records_respect_norm_ordering() {
    let mut spec = ScenarioSpec::preset("random", 64).unwrap();
    spec.t_end = 0.5;
    spec.sample_every = 0.1;
    let state = build(&spec).unwrap();
    let mut recs = Vec::new();
    run(&state, &StepControl::default(), 0.5, 0.1, &BmoConfig::doubling(state.grid()), &mut recs).unwrap();
    assert_eq!(recs.len(), 6);
    for r in &recs {
        assert!(r.hm1_theta <= r.hm12_theta && r.hm12_theta <= r.l2_theta);
        assert!(r.bmo_omega <= r.linf_omega);
        assert!(r.hm1_theta > 0.0);
    }
}

#[test]
fn execution_modes_agree() {
    use mixbound::{Execution, FlowState, SpectralField};
    let spec = ScenarioSpec::preset("taylor_green_perturbed", 64).unwrap();
    let s0 = build(&spec).unwrap();
    let records = |exec: Execution| {
        let g = s0.grid().clone().with_execution(exec);
        let move_to = |w: &SpectralField| SpectralField::from_coeffs(&g, w.coeffs().to_vec()).unwrap();
        let s = FlowState::new(move_to(&s0.omega), move_to(&s0.theta), 0.0).unwrap();
        let mut recs = Vec::new();
        run(&s, &StepControl::default(), 0.2, 0.05, &BmoConfig::doubling(&g), &mut recs).unwrap();
        recs
    };
    assert_eq!(records(Execution::Sequential), records(Execution::Parallel));
}
