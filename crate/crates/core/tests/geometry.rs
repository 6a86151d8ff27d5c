use num_complex::Complex64;

use spinc::frames::{connection_forms, second_fundamental_form};
use spinc::pipeline::{verify_scenario, ScenarioConfig, ScenarioRun};
use spinc::scenarios::{catalog, Scenario};
use spinc::spinfield::{adapted_covariant_derivative, ambient_covariant_derivative, gauss_term};

fn run(scenario: &Scenario, n: usize) -> (ScenarioRun, f64) {
    let config = ScenarioConfig::new(scenario.clone(), &vec![n; scenario.chart_dim()]).unwrap();
    let h = config.grid.max_spacing();
    (verify_scenario(&config).unwrap(), h)
}

fn sizes(scenario: &Scenario) -> [usize; 2] {
    if scenario.chart_dim() == 3 {
        [17, 33]
    } else {
        [33, 65]
    }
}

/// Largest `|<d_k E_a, E_b> + <d_k E_b, E_a>|`, which vanishes for an orthonormal frame.
fn compatibility_defect(run: &ScenarioRun) -> f64 {
    let frame = &run.frame;
    let grid = frame.grid();
    let d = frame.signature().dim();
    let mut worst = 0.0f64;
    for node in 0..grid.node_count() {
        for k in 0..grid.dim() {
            let deriv = grid.derivative_block(frame.raw(), d * d, node, k);
            let pair = |a: usize, b: usize| -> f64 {
                deriv[a * d..(a + 1) * d].iter().zip(frame.vector(node, b)).map(|(x, y)| x * y).sum()
            };
            for a in 0..d {
                for b in a..d {
                    worst = worst.max((pair(a, b) + pair(b, a)).abs());
                }
            }
        }
    }
    worst
}

/// Largest `|ambient - adapted - gauss term|` over nodes and directions.
fn gauss_defect(run: &ScenarioRun) -> f64 {
    let sff = second_fundamental_form(&run.patch, &run.frame).unwrap();
    let omega = connection_forms(&run.frame).unwrap();
    let grid = run.spinor.grid();
    let mut worst = 0.0f64;
    for k in 0..grid.dim() {
        let ambient = ambient_covariant_derivative(&run.spinor, &omega, &run.connection, k).unwrap();
        let adapted = adapted_covariant_derivative(&run.spinor, &omega, &run.connection, k).unwrap();
        for node in 0..grid.node_count() {
            let mut diff = &ambient[node] - &adapted[node];
            let g = gauss_term(run.spinor.at(node), &sff, &run.coframe, node, k);
            diff.add_scaled(Complex64::new(-1.0, 0.0), &g);
            worst = worst.max(diff.norm());
        }
    }
    worst
}

#[test]
fn frames_are_metric_compatible() {
    for scenario in catalog() {
        let [coarse, fine] = sizes(&scenario);
        let (a, ha) = run(&scenario, coarse);
        let (b, hb) = run(&scenario, fine);
        let (ea, eb) = (compatibility_defect(&a), compatibility_defect(&b));
        assert!(a.frame.orthonormality_error() < 1e-12, "{}", scenario.name);
        assert!(ea <= 1e-12 + 2.0 * ha * ha, "{}: {ea:.3e} at h = {ha}", scenario.name);
        assert!(eb <= 1e-12 + 2.0 * hb * hb, "{}: {eb:.3e} at h = {hb}", scenario.name);
    }
}

#[test]
fn gauss_formula_links_ambient_and_adapted_derivatives() {
    for scenario in catalog() {
        let [coarse, fine] = sizes(&scenario);
        let (a, ha) = run(&scenario, coarse);
        let (b, hb) = run(&scenario, fine);
        let (ea, eb) = (gauss_defect(&a), gauss_defect(&b));
        assert!(ea <= 1e-12 + 0.5 * ha * ha, "{}: {ea:.3e} at h = {ha}", scenario.name);
        assert!(eb <= 1e-12 + 0.5 * hb * hb, "{}: {eb:.3e} at h = {hb}", scenario.name);
        if ea > 1e-11 {
            assert!(eb < ea / 3.0, "{}: no convergence ({ea:.3e} -> {eb:.3e})", scenario.name);
        }
    }
}
