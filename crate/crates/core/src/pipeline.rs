//! End-to-end runs: immersion, spinor, Killing residual, 1-form,
//! integration and validation, plus the algebra property suite and
//! convergence studies. The CLI and the FFI layer are thin wrappers over this.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::clifford::{
    grade, tau, vector_embed, AlgebraSignature, Multivector, RealVector, SpinCElement,
};
use crate::export;
use crate::frames::{
    build_adapted_frame, chart_coframe, connection_forms, induced_metric, second_fundamental_form,
    AdaptedFrame, ChartCoframe, ImmersionPatch,
};
use crate::grid::ChartGrid;
use crate::scenarios::{self, Scenario};
use crate::spinfield::{
    gauge_transform, killing_residual, restricted_parallel_spinor, KillingResidual, SpinorField,
    U1ConnectionField,
};
use crate::weierstrass::{
    build_one_form, closedness_residual, integrate_one_form, rigid_align, verify_isometry,
    verify_normal_connection, verify_second_fundamental_form, FieldReport, IntegrationOptions,
    OneFormField, ReconstructedImmersion,
};
use crate::Error;

/// Phase applied to the spinor before the residual is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Gauge {
    None,
    Constant(f64),
    /// `theta = x_0 x_1`
    Product,
}

impl Gauge {
    pub fn theta(&self, p: &[f64]) -> f64 {
        match *self {
            Gauge::None => 0.0,
            Gauge::Constant(t) => t,
            Gauge::Product => p[0] * p[1],
        }
    }
}

impl FromStr for Gauge {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "none" => Ok(Gauge::None),
            "uv" => Ok(Gauge::Product),
            _ => s
                .strip_prefix("const:")
                .and_then(|t| t.parse::<f64>().ok())
                .filter(|t| t.is_finite())
                .map(Gauge::Constant)
                .ok_or_else(|| Error::Input(format!("unknown gauge '{s}' (expected none, const:THETA or uv)"))),
        }
    }
}

impl fmt::Display for Gauge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gauge::None => write!(f, "none"),
            Gauge::Constant(t) => write!(f, "const:{t}"),
            Gauge::Product => write!(f, "uv"),
        }
    }
}

/// Check thresholds. Discretized quantities are accepted below
/// `floor + C h^p` with `h` the largest grid spacing; `p = 2` except for the
/// doubly differentiated validators (`sff`, `normconn`) where `p = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub algebra: f64,
    pub identity: f64,
    pub floor: f64,
    pub closedness_threshold: f64,
    pub killing: f64,
    pub dxi: f64,
    pub metric: f64,
    pub sff: f64,
    pub normconn: f64,
    pub roundtrip: f64,
    pub path: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            algebra: 1e-12,
            identity: 1e-9,
            floor: 1e-12,
            closedness_threshold: crate::weierstrass::DEFAULT_CLOSEDNESS_THRESHOLD,
            killing: 0.5,
            dxi: 1.0,
            metric: 1.5,
            sff: 1.0,
            normconn: 1.0,
            roundtrip: 0.5,
            path: 0.25,
        }
    }
}

impl Tolerances {
    /// Constants calibrated on the built-in scenarios with a safety factor.
    pub fn for_scenario(scenario: &Scenario) -> Self {
        let mut t = Self::default();
        if let crate::scenarios::Shape::Torus { major, minor } = scenario.shape {
            // Pullback error scales with the third derivative, i.e. the outer radius.
            t.metric = 3.5 * (major + minor);
        }
        t
    }

    pub fn set(&mut self, key: &str, value: f64) -> Result<(), Error> {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::Input(format!("tolerance {key} must be positive, got {value}")));
        }
        let slot = match key {
            "algebra" => &mut self.algebra,
            "identity" => &mut self.identity,
            "floor" => &mut self.floor,
            "closedness" => &mut self.closedness_threshold,
            "killing" => &mut self.killing,
            "dxi" => &mut self.dxi,
            "metric" => &mut self.metric,
            "sff" => &mut self.sff,
            "normconn" => &mut self.normconn,
            "roundtrip" => &mut self.roundtrip,
            "path" => &mut self.path,
            _ => return Err(Error::Input(format!("unknown tolerance '{key}'"))),
        };
        *slot = value;
        Ok(())
    }

    fn bound(&self, constant: f64, h: f64, order: i32) -> f64 {
        self.floor + constant * h.powi(order)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn new(name: &str, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            passed: value <= tolerance,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub scenario: String,
    pub n: usize,
    pub m: usize,
    pub grid: Vec<usize>,
    pub spacing: Vec<f64>,
    pub gauge: String,
    pub normal_twist: f64,
    pub max_killing_residual: f64,
    pub killing_argmax_node: usize,
    pub max_dxi: f64,
    pub metric_err: f64,
    #[serde(rename = "B_err")]
    pub b_err: f64,
    pub normconn_err: Option<f64>,
    pub roundtrip_rms: f64,
    pub path_discrepancy: f64,
    pub unit_defect: f64,
    pub orders: BTreeMap<String, Order>,
    pub tolerances: Tolerances,
    pub checks: Vec<Check>,
    pub passed: bool,
    pub first_failure: Option<String>,
}

#[derive(Clone, Debug)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub grid: ChartGrid,
    pub gauge: Gauge,
    /// Amplitude of the normal-pair rotation `twist * sin(x_0) cos(x_1)`;
    /// only meaningful in codimension at least 2.
    pub normal_twist: f64,
    pub tolerances: Tolerances,
}

impl ScenarioConfig {
    /// Default bounds of `scenario` sampled with `extents` nodes per axis.
    pub fn new(scenario: Scenario, extents: &[usize]) -> Result<Self, Error> {
        let grid = scenario.default_grid(extents)?;
        let tolerances = Tolerances::for_scenario(&scenario);
        Ok(Self {
            scenario,
            grid,
            gauge: Gauge::None,
            normal_twist: 0.0,
            tolerances,
        })
    }

    pub fn with_gauge(mut self, gauge: Gauge) -> Self {
        self.gauge = gauge;
        self
    }

    pub fn with_normal_twist(mut self, twist: f64) -> Self {
        self.normal_twist = twist;
        self
    }
}

/// Every intermediate field of a scenario run.
#[derive(Clone, Debug)]
pub struct ScenarioRun {
    pub summary: RunSummary,
    pub patch: ImmersionPatch,
    pub frame: AdaptedFrame,
    pub coframe: ChartCoframe,
    pub spinor: SpinorField,
    pub connection: U1ConnectionField,
    pub residual: KillingResidual,
    pub one_form: OneFormField,
    pub closedness: Vec<f64>,
    pub reconstruction: ReconstructedImmersion,
    pub metric_report: FieldReport,
    pub sff_report: FieldReport,
    pub normconn_report: Option<FieldReport>,
}

pub fn verify_scenario(config: &ScenarioConfig) -> Result<ScenarioRun, Error> {
    let scenario = &config.scenario;
    let grid = &config.grid;
    let tol = &config.tolerances;
    let patch = scenarios::sample(scenario, grid)?;
    let mut frame = build_adapted_frame(&patch)?;
    if config.normal_twist != 0.0 {
        let angles: Vec<f64> = (0..grid.node_count())
            .map(|i| {
                let p = grid.point(i);
                config.normal_twist * p[0].sin() * p[1].cos()
            })
            .collect();
        frame = frame.rotate_normal_pair(&angles)?;
    }
    let sig = frame.signature();
    let coframe = chart_coframe(&patch, &frame)?;
    let metric = induced_metric(&patch);
    let sff = second_fundamental_form(&patch, &frame)?;
    let omega = connection_forms(&frame)?;

    let (mut spinor, mut connection) = restricted_parallel_spinor(&frame, &SpinCElement::identity(sig))?;
    if config.gauge != Gauge::None {
        let theta: Vec<f64> = (0..grid.node_count()).map(|i| config.gauge.theta(&grid.point(i))).collect();
        (spinor, connection) = gauge_transform(&spinor, &connection, &theta)?;
    }
    let (_, unit_defect) = spinor.max_unit_defect();
    let residual = killing_residual(&spinor, &sff, &omega, &connection, &coframe)?;
    let (killing_argmax_node, max_killing_residual) = residual.max();

    let one_form = build_one_form(&spinor, &coframe)?;
    let closedness = closedness_residual(&one_form);
    let max_dxi = closedness.iter().copied().fold(0.0, f64::max);
    let base = grid.center();
    let options = IntegrationOptions {
        closedness_threshold: tol.closedness_threshold,
        strict: false,
    };
    let reconstruction = integrate_one_form(&one_form, base, patch.position(base), options)?;
    let metric_report = verify_isometry(&reconstruction, &metric)?;
    let sff_report = verify_second_fundamental_form(&reconstruction, &one_form, &sff, &coframe)?;
    let normconn_report = match sig.m() {
        0 => None,
        _ => Some(verify_normal_connection(&reconstruction, &one_form, &omega)?),
    };
    let alignment = rigid_align(&reconstruction.positions, patch.positions(), sig.dim())?;

    let h = grid.max_spacing();
    let mut checks = vec![
        Check::new("unit invariant", unit_defect, tol.identity),
        Check::new("killing residual", max_killing_residual, tol.bound(tol.killing, h, 2)),
        Check::new("closedness pre-check", max_dxi, tol.closedness_threshold),
        Check::new("closedness", max_dxi, tol.bound(tol.dxi, h, 2)),
        Check::new("path discrepancy", reconstruction.path_discrepancy, tol.bound(tol.path, h, 2)),
        Check::new("isometry", metric_report.max_error, tol.bound(tol.metric, h, 2)),
        Check::new("second fundamental form", sff_report.max_error, tol.bound(tol.sff, h, 1)),
    ];
    if let Some(r) = &normconn_report {
        checks.push(Check::new("normal connection", r.max_error, tol.bound(tol.normconn, h, 1)));
    }
    checks.push(Check::new("round trip", alignment.rms, tol.bound(tol.roundtrip, h, 2)));
    let first_failure = checks.iter().find(|c| !c.passed).map(|c| c.name.clone());

    let summary = RunSummary {
        scenario: scenario.name.clone(),
        n: sig.n(),
        m: sig.m(),
        grid: grid.extents().to_vec(),
        spacing: grid.spacing().to_vec(),
        gauge: config.gauge.to_string(),
        normal_twist: config.normal_twist,
        max_killing_residual,
        killing_argmax_node,
        max_dxi,
        metric_err: metric_report.max_error,
        b_err: sff_report.max_error,
        normconn_err: normconn_report.as_ref().map(|r| r.max_error),
        roundtrip_rms: alignment.rms,
        path_discrepancy: reconstruction.path_discrepancy,
        unit_defect,
        orders: BTreeMap::new(),
        tolerances: tol.clone(),
        passed: first_failure.is_none(),
        first_failure,
        checks,
    };
    Ok(ScenarioRun {
        summary,
        patch,
        frame,
        coframe,
        spinor,
        connection,
        residual,
        one_form,
        closedness,
        reconstruction,
        metric_report,
        sff_report,
        normconn_report,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Obj,
    Ply,
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "obj" => Ok(Format::Obj),
            "ply" => Ok(Format::Ply),
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(Error::Input(format!("unknown format '{s}' (expected obj, ply, json or csv)"))),
        }
    }
}

/// Spinor-independent chart data needed to rebuild the 1-form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConnectionDump {
    pub coframe: ChartCoframe,
    pub u1: U1ConnectionField,
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), Error> {
    fs::write(dir.join(name), contents).map_err(|e| Error::Input(format!("cannot write {}: {e}", dir.join(name).display())))
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("plain data serializes")
}

/// Writes `summary.json` plus the artifacts selected by `formats`.
pub fn write_artifacts(run: &ScenarioRun, dir: &Path, formats: &[Format]) -> Result<(), Error> {
    fs::create_dir_all(dir).map_err(|e| Error::Input(format!("cannot create {}: {e}", dir.display())))?;
    write(dir, "summary.json", &json(&run.summary))?;
    let rec = &run.reconstruction;
    for format in formats {
        match format {
            Format::Obj => write(dir, "reconstruction.obj", &export::to_obj(&rec.grid, rec.ambient_dim, &rec.positions))?,
            Format::Ply => write(dir, "reconstruction.ply", &export::to_ply(&rec.grid, rec.ambient_dim, &rec.positions))?,
            Format::Json => {
                write(dir, "spinor.json", &json(&run.spinor))?;
                let dump = ConnectionDump {
                    coframe: run.coframe.clone(),
                    u1: run.connection.clone(),
                };
                write(dir, "connection.json", &json(&dump))?;
            }
            Format::Csv => {
                write(dir, "killing_residual.csv", &run.residual.to_csv())?;
                write(dir, "metric_error.csv", &run.metric_report.to_csv("metric_error"))?;
                write(dir, "sff_error.csv", &run.sff_report.to_csv("sff_error"))?;
                if let Some(r) = &run.normconn_report {
                    write(dir, "normconn_error.csv", &r.to_csv("normconn_error"))?;
                }
            }
        }
    }
    Ok(())
}

/// Measured convergence order; `Exact` when every sample sits at the
/// rounding floor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Order {
    Measured(f64),
    Exact(ExactTag),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExactTag {
    Exact,
}

impl Order {
    pub fn value(&self) -> Option<f64> {
        match self {
            Order::Measured(p) => Some(*p),
            Order::Exact(_) => None,
        }
    }
}

/// Least-squares slope of `log err` against `log h`.
pub fn fit_order(spacings: &[f64], errors: &[f64], floor: f64) -> Order {
    if errors.iter().all(|&e| e <= floor) {
        return Order::Exact(ExactTag::Exact);
    }
    let pts: Vec<(f64, f64)> = spacings
        .iter()
        .zip(errors)
        .map(|(h, e)| (h.ln(), e.max(f64::MIN_POSITIVE).ln()))
        .collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Order::Measured(sxy / sxx)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceSeries {
    pub values: Vec<f64>,
    pub order: Order,
    pub floor: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub scenario: String,
    pub grids: Vec<Vec<usize>>,
    pub spacings: Vec<f64>,
    pub series: BTreeMap<String, ConvergenceSeries>,
    pub passed: bool,
    pub first_failure: Option<String>,
}

/// Order floors for single and double finite differentiation.
pub const ORDER_FLOOR: f64 = 1.5;
pub const DOUBLE_ORDER_FLOOR: f64 = 1.0;
/// Errors below this are treated as rounding noise by [`fit_order`].
pub const ROUNDING_FLOOR: f64 = 1e-11;

pub fn convergence(
    base: &ScenarioConfig,
    extents: &[Vec<usize>],
) -> Result<(ConvergenceReport, Vec<RunSummary>), Error> {
    if extents.len() < 3 {
        return Err(Error::Input("convergence needs at least 3 grids".into()));
    }
    let mut summaries = Vec::with_capacity(extents.len());
    for e in extents {
        let mut config = base.clone();
        config.grid = base.scenario.default_grid(e)?;
        summaries.push(verify_scenario(&config)?.summary);
    }
    let spacings: Vec<f64> = summaries.iter().map(|s| s.spacing.iter().copied().fold(0.0, f64::max)).collect();
    let mut series = BTreeMap::new();
    let mut add = |name: &str, floor: f64, values: Vec<f64>| {
        let order = fit_order(&spacings, &values, ROUNDING_FLOOR);
        let passed = order.value().is_none_or(|p| p >= floor);
        series.insert(
            name.to_string(),
            ConvergenceSeries {
                values,
                order,
                floor,
                passed,
            },
        );
    };
    add("killing", ORDER_FLOOR, summaries.iter().map(|s| s.max_killing_residual).collect());
    add("dxi", ORDER_FLOOR, summaries.iter().map(|s| s.max_dxi).collect());
    add("metric", ORDER_FLOOR, summaries.iter().map(|s| s.metric_err).collect());
    add("roundtrip", ORDER_FLOOR, summaries.iter().map(|s| s.roundtrip_rms).collect());
    add("sff", DOUBLE_ORDER_FLOOR, summaries.iter().map(|s| s.b_err).collect());
    if summaries[0].normconn_err.is_some() {
        add(
            "normconn",
            DOUBLE_ORDER_FLOOR,
            summaries.iter().map(|s| s.normconn_err.unwrap_or(0.0)).collect(),
        );
    }
    let first_failure = series.iter().find(|(_, s)| !s.passed).map(|(k, _)| k.clone());
    for s in summaries.iter_mut() {
        s.orders = series.iter().map(|(k, v)| (k.clone(), v.order)).collect();
    }
    let report = ConvergenceReport {
        scenario: base.scenario.name.clone(),
        grids: extents.to_vec(),
        spacings,
        passed: first_failure.is_none(),
        first_failure,
        series,
    };
    Ok((report, summaries))
}

/// Deliberate defects used to prove the algebra suite can fail.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlgebraFault {
    /// Replaces `tau` by the grade involution composed with conjugation,
    /// which is an automorphism rather than an anti-automorphism.
    BrokenTau,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityResult {
    pub name: String,
    pub max_error: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgebraReport {
    pub seed: u64,
    pub trials: usize,
    pub dims: Vec<usize>,
    pub tolerance: f64,
    pub identities: Vec<IdentityResult>,
    pub passed: bool,
    pub first_failure: Option<String>,
}

pub const ALGEBRA_IDENTITIES: [&str; 6] = [
    "associativity",
    "generator relations",
    "tau anti-automorphism",
    "vector adjointness",
    "pairing symmetry",
    "spin-c invariance",
];

/// Random multivector with unit coefficient norm.
pub fn random_multivector(sig: AlgebraSignature, rng: &mut impl Rng) -> Multivector {
    let coeffs: Vec<Complex64> = (0..sig.blade_count())
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let x = Multivector::from_coeffs(sig, coeffs).expect("finite coefficients");
    let norm = x.norm();
    x.scale_real(1.0 / norm)
}

fn broken_tau(x: &Multivector) -> Multivector {
    let mut out = x.conj();
    for mask in 0..x.coeffs().len() {
        if grade(mask) % 2 == 1 {
            out.set_coeff(mask, -out.coeff(mask));
        }
    }
    out
}

/// Runs the Clifford identities on `trials` random inputs per dimension.
pub fn algebra_suite(seed: u64, trials: usize, dims: &[usize], fault: Option<AlgebraFault>) -> Result<AlgebraReport, Error> {
    if trials == 0 {
        return Err(Error::Input("trials must be at least 1".into()));
    }
    let tau_op = |x: &Multivector| match fault {
        Some(AlgebraFault::BrokenTau) => broken_tau(x),
        None => tau(x),
    };
    let mut worst = [0.0f64; ALGEBRA_IDENTITIES.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for &d in dims {
        let sig = AlgebraSignature::new(1, d - 1)?;
        for i in 0..d {
            for j in 0..d {
                let (ei, ej) = (Multivector::generator(sig, i), Multivector::generator(sig, j));
                let mut anti = &(&ei * &ej) + &(&ej * &ei);
                if i == j {
                    anti.add_scaled(Complex64::new(2.0, 0.0), &Multivector::one(sig));
                }
                worst[1] = worst[1].max(anti.max_abs());
            }
        }
        for _ in 0..trials {
            let x = random_multivector(sig, &mut rng);
            let y = random_multivector(sig, &mut rng);
            let z = random_multivector(sig, &mut rng);
            worst[0] = worst[0].max((&x * &y).product(&z)?.distance(&x.product(&(&y * &z))?));
            worst[2] = worst[2].max(tau_op(&(&x * &y)).distance(&(&tau_op(&y) * &tau_op(&x))));
            let pair = |a: &Multivector, b: &Multivector| &tau_op(b) * a;
            let v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            let v = vector_embed(sig, &RealVector::new(v))?;
            worst[3] = worst[3].max(pair(&(&v * &x), &y).distance(&(-&pair(&x, &(&v * &y)))));
            worst[4] = worst[4].max(tau_op(&pair(&x, &y)).distance(&pair(&y, &x)));
            let g = SpinCElement::random(sig, &mut rng);
            let (gx, gy) = (g.value() * &x, g.value() * &y);
            worst[5] = worst[5].max(pair(&gx, &gy).distance(&pair(&x, &y)));
        }
    }
    let tolerance = 1e-12;
    let identities: Vec<IdentityResult> = ALGEBRA_IDENTITIES
        .iter()
        .zip(worst)
        .map(|(name, max_error)| IdentityResult {
            name: name.to_string(),
            max_error,
            passed: max_error <= tolerance,
        })
        .collect();
    let first_failure = identities.iter().find(|r| !r.passed).map(|r| r.name.clone());
    Ok(AlgebraReport {
        seed,
        trials,
        dims: dims.to_vec(),
        tolerance,
        identities,
        passed: first_failure.is_none(),
        first_failure,
    })
}

fn parse_json<T: serde::de::DeserializeOwned>(what: &str, text: &str) -> Result<T, Error> {
    serde_json::from_str(text).map_err(|e| {
        Error::Input(format!(
            "{what}: parse error at line {}, column {}: {e}",
            e.line(),
            e.column()
        ))
    })
}

/// Loads a spinor dump, re-validating everything the derived decoder skips.
pub fn parse_spinor(text: &str) -> Result<SpinorField, Error> {
    let raw: SpinorField = parse_json("spinor", text)?;
    raw.grid().validate()?;
    for v in raw.values() {
        if v.signature() != raw.signature() || v.coeffs().len() != raw.signature().blade_count() {
            return Err(Error::Input("spinor: values do not match the declared signature".into()));
        }
    }
    Ok(SpinorField::new(raw.grid().clone(), raw.signature(), raw.values().to_vec())?)
}

pub fn parse_connection(text: &str) -> Result<ConnectionDump, Error> {
    let raw: ConnectionDump = parse_json("connection", text)?;
    let grid = raw.coframe.grid().clone();
    grid.validate()?;
    let coframe = ChartCoframe::new(grid.clone(), raw.coframe.raw().to_vec())?;
    let u1 = U1ConnectionField::new(raw.u1.grid().clone(), raw.u1.values().to_vec())?;
    grid.check_same(u1.grid())?;
    Ok(ConnectionDump { coframe, u1 })
}

/// 1-form and integration from dumped fields. Without a connection dump the
/// chart is taken to be orthonormal.
pub fn reconstruct(
    spinor: &SpinorField,
    connection: Option<&ConnectionDump>,
    closedness_threshold: f64,
) -> Result<ReconstructedImmersion, Error> {
    let coframe = match connection {
        Some(c) => c.coframe.clone(),
        None => ChartCoframe::identity(spinor.grid().clone()),
    };
    let xi = build_one_form(spinor, &coframe)?;
    let grid = spinor.grid();
    let options = IntegrationOptions {
        closedness_threshold,
        strict: true,
    };
    Ok(integrate_one_form(&xi, grid.center(), &vec![0.0; xi.ambient_dim()], options)?)
}

/// `N`, `NxM` or `NxMxK`.
pub fn parse_extents(text: &str, dim: usize) -> Result<Vec<usize>, Error> {
    let parts: Result<Vec<usize>, _> = text.split(['x', 'X']).map(|p| p.trim().parse::<usize>()).collect();
    let parts = parts.map_err(|_| Error::Input(format!("invalid grid '{text}'")))?;
    match parts.len() {
        1 => Ok(vec![parts[0]; dim]),
        k if k == dim => Ok(parts),
        k => Err(Error::Input(format!("grid '{text}' has {k} axes, scenario needs {dim}"))),
    }
}
