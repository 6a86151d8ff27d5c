//! Built-in analytic immersions with exact jets and closed-form metric and
//! second fundamental form where available.
//!
//! Analytic `B` values are expressed in the adapted frame produced by
//! [`crate::frames::build_adapted_frame`]: tangent vectors by Gram-Schmidt on
//! the chart derivatives, normal completing a positively oriented basis.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::frames::ImmersionPatch;
use crate::grid::ChartGrid;
use crate::ScenarioError;

/// Slack when comparing grid bounds with the domain.
const DOMAIN_SLACK: f64 = 1e-12;
const UNBOUNDED: f64 = 1e6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Shape {
    Plane,
    Sphere { radius: f64 },
    Cylinder { radius: f64 },
    Torus { major: f64, minor: f64 },
    Helicoid { pitch: f64 },
    CliffordTorus,
    ThreeSphere { radius: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub shape: Shape,
    /// Chart region on which the immersion is regular.
    pub domain: Vec<(f64, f64)>,
    /// Chart region used when no bounds are supplied.
    pub default_bounds: Vec<(f64, f64)>,
    pub normal_orientation: String,
}

/// Position and exact derivatives at one chart point.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    pub position: Vec<f64>,
    /// `first[k * d + c]`
    pub first: Vec<f64>,
    /// `second[(k * n + l) * d + c]`
    pub second: Vec<f64>,
}

fn square(lo: f64, hi: f64, n: usize) -> Vec<(f64, f64)> {
    vec![(lo, hi); n]
}

impl Scenario {
    fn build(name: &str, shape: Shape, domain: Vec<(f64, f64)>, orientation: &str) -> Self {
        let n = domain.len();
        Self {
            name: name.into(),
            shape,
            domain,
            default_bounds: square(-1.0, 1.0, n),
            normal_orientation: orientation.into(),
        }
    }

    pub fn plane() -> Self {
        Self::build("plane", Shape::Plane, square(-UNBOUNDED, UNBOUNDED, 2), "E3 = +z")
    }

    pub fn sphere() -> Self {
        Self::build(
            "sphere",
            Shape::Sphere { radius: 1.0 },
            vec![(-PI, PI), (-1.2, 1.2)],
            "outward radial; B = -delta / radius",
        )
    }

    pub fn cylinder() -> Self {
        Self::build(
            "cylinder",
            Shape::Cylinder { radius: 1.0 },
            vec![(-PI, PI), (-UNBOUNDED, UNBOUNDED)],
            "outward radial; B = diag(-1 / radius, 0)",
        )
    }

    pub fn torus() -> Self {
        Self::build(
            "torus",
            Shape::Torus { major: 2.0, minor: 1.0 },
            square(-PI, PI, 2),
            "outward from the core circle",
        )
    }

    pub fn helicoid() -> Self {
        Self::build(
            "helicoid",
            Shape::Helicoid { pitch: 1.0 },
            vec![(-UNBOUNDED, UNBOUNDED), (-PI, PI)],
            "E1 x E2 = (c sin v, -c cos v, u) / sqrt(u^2 + c^2)",
        )
    }

    pub fn clifford_torus() -> Self {
        Self::build(
            "clifford-torus",
            Shape::CliffordTorus,
            square(-PI, PI, 2),
            "normal pair aligned with the standard basis at node 0 and carried continuously",
        )
    }

    pub fn three_sphere() -> Self {
        let mut s = Self::build(
            "three-sphere",
            Shape::ThreeSphere { radius: 1.0 },
            vec![(-PI, PI), (-1.2, 1.2), (-1.2, 1.2)],
            "inward radial; B = +delta / radius",
        );
        s.default_bounds = square(-0.8, 0.8, 3);
        s
    }

    pub fn chart_dim(&self) -> usize {
        self.domain.len()
    }

    pub fn ambient_dim(&self) -> usize {
        match self.shape {
            Shape::CliffordTorus | Shape::ThreeSphere { .. } => 4,
            _ => 3,
        }
    }

    pub fn codim(&self) -> usize {
        self.ambient_dim() - self.chart_dim()
    }

    /// Overrides a numeric parameter (`radius`, `major`, `minor`, `pitch`).
    pub fn set_param(&mut self, key: &str, value: f64) -> Result<(), ScenarioError> {
        if !(value.is_finite() && value > 0.0) {
            return Err(ScenarioError::Parameter(format!("{key} must be positive, got {value}")));
        }
        let slot = match (&mut self.shape, key) {
            (Shape::Sphere { radius }, "radius")
            | (Shape::Cylinder { radius }, "radius")
            | (Shape::ThreeSphere { radius }, "radius") => radius,
            (Shape::Torus { major, .. }, "major") => major,
            (Shape::Torus { minor, .. }, "minor") => minor,
            (Shape::Helicoid { pitch }, "pitch") => pitch,
            _ => {
                return Err(ScenarioError::Parameter(format!(
                    "scenario '{}' has no parameter '{key}'",
                    self.name
                )))
            }
        };
        *slot = value;
        if let Shape::Torus { major, minor } = self.shape {
            if minor >= major {
                return Err(ScenarioError::Parameter("torus needs minor < major".into()));
            }
        }
        Ok(())
    }

    /// Grid with `extents` nodes spanning the default bounds.
    pub fn default_grid(&self, extents: &[usize]) -> Result<ChartGrid, ScenarioError> {
        Ok(ChartGrid::spanning(&self.default_bounds, extents)?)
    }

    /// Exact position, first and second derivatives at chart point `p`.
    pub fn jet(&self, p: &[f64]) -> Jet {
        match self.shape {
            Shape::Plane => Jet {
                position: vec![p[0], p[1], 0.0],
                first: vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0],
                second: vec![0.0; 12],
            },
            Shape::Sphere { radius: r } => {
                let (su, cu) = p[0].sin_cos();
                let (sv, cv) = p[1].sin_cos();
                let uv = [r * su * sv, -r * cu * sv, 0.0];
                Jet {
                    position: vec![r * cu * cv, r * su * cv, r * sv],
                    first: vec![-r * su * cv, r * cu * cv, 0.0, -r * cu * sv, -r * su * sv, r * cv],
                    second: [
                        [-r * cu * cv, -r * su * cv, 0.0],
                        uv,
                        uv,
                        [-r * cu * cv, -r * su * cv, -r * sv],
                    ]
                    .concat(),
                }
            }
            Shape::Cylinder { radius: r } => {
                let (su, cu) = p[0].sin_cos();
                let mut second = vec![0.0; 12];
                second[0] = -r * cu;
                second[1] = -r * su;
                Jet {
                    position: vec![r * cu, r * su, p[1]],
                    first: vec![-r * su, r * cu, 0.0, 0.0, 0.0, 1.0],
                    second,
                }
            }
            Shape::Torus { major, minor: r } => {
                let (su, cu) = p[0].sin_cos();
                let (sv, cv) = p[1].sin_cos();
                let rho = major + r * cv;
                let uv = [r * sv * su, -r * sv * cu, 0.0];
                Jet {
                    position: vec![rho * cu, rho * su, r * sv],
                    first: vec![-rho * su, rho * cu, 0.0, -r * sv * cu, -r * sv * su, r * cv],
                    second: [
                        [-rho * cu, -rho * su, 0.0],
                        uv,
                        uv,
                        [-r * cv * cu, -r * cv * su, -r * sv],
                    ]
                    .concat(),
                }
            }
            Shape::Helicoid { pitch: c } => {
                let u = p[0];
                let (sv, cv) = p[1].sin_cos();
                let uv = [-sv, cv, 0.0];
                Jet {
                    position: vec![u * cv, u * sv, c * p[1]],
                    first: vec![cv, sv, 0.0, -u * sv, u * cv, c],
                    second: [[0.0; 3], uv, uv, [-u * cv, -u * sv, 0.0]].concat(),
                }
            }
            Shape::CliffordTorus => {
                let s = FRAC_1_SQRT_2;
                let (su, cu) = p[0].sin_cos();
                let (sv, cv) = p[1].sin_cos();
                Jet {
                    position: vec![s * cu, s * su, s * cv, s * sv],
                    first: vec![-s * su, s * cu, 0.0, 0.0, 0.0, 0.0, -s * sv, s * cv],
                    second: [
                        [-s * cu, -s * su, 0.0, 0.0],
                        [0.0; 4],
                        [0.0; 4],
                        [0.0, 0.0, -s * cv, -s * sv],
                    ]
                    .concat(),
                }
            }
            Shape::ThreeSphere { radius: r } => {
                let (sa, ca) = p[0].sin_cos();
                let (sb, cb) = p[1].sin_cos();
                let (sc, cc) = p[2].sin_cos();
                let aa = [-ca * cb * cc, -sa * cb * cc, 0.0, 0.0];
                let ab = [sa * sb * cc, -ca * sb * cc, 0.0, 0.0];
                let ac = [sa * cb * sc, -ca * cb * sc, 0.0, 0.0];
                let bb = [-ca * cb * cc, -sa * cb * cc, -sb * cc, 0.0];
                let bc = [ca * sb * sc, sa * sb * sc, -cb * sc, 0.0];
                let cc2 = [-ca * cb * cc, -sa * cb * cc, -sb * cc, -sc];
                let scale = |v: Vec<f64>| v.into_iter().map(|x| r * x).collect::<Vec<_>>();
                Jet {
                    position: scale(vec![ca * cb * cc, sa * cb * cc, sb * cc, sc]),
                    first: scale(
                        [
                            [-sa * cb * cc, ca * cb * cc, 0.0, 0.0],
                            [-ca * sb * cc, -sa * sb * cc, cb * cc, 0.0],
                            [-ca * cb * sc, -sa * cb * sc, -sb * sc, cc],
                        ]
                        .concat(),
                    ),
                    second: scale([aa, ab, ac, ab, bb, bc, ac, bc, cc2].concat()),
                }
            }
        }
    }

    /// Exact induced metric `g[k * n + l]` at `p`.
    pub fn analytic_metric(&self, p: &[f64]) -> Vec<f64> {
        let diag = |d: &[f64]| {
            let n = d.len();
            let mut g = vec![0.0; n * n];
            for (k, v) in d.iter().enumerate() {
                g[k * n + k] = *v;
            }
            g
        };
        match self.shape {
            Shape::Plane => diag(&[1.0, 1.0]),
            Shape::Sphere { radius: r } => diag(&[(r * p[1].cos()).powi(2), r * r]),
            Shape::Cylinder { radius: r } => diag(&[r * r, 1.0]),
            Shape::Torus { major, minor } => diag(&[(major + minor * p[1].cos()).powi(2), minor * minor]),
            Shape::Helicoid { pitch } => diag(&[1.0, p[0] * p[0] + pitch * pitch]),
            Shape::CliffordTorus => diag(&[0.5, 0.5]),
            Shape::ThreeSphere { radius: r } => {
                let (cb, cc) = (p[1].cos(), p[2].cos());
                diag(&[(r * cb * cc).powi(2), (r * cc).powi(2), r * r])
            }
        }
    }

    /// Exact `B^a_{ij}` at `p` in the adapted frame, flattened `[a][i][j]`,
    /// for scenarios whose normal frame is determined by orientation alone.
    pub fn analytic_second_fundamental_form(&self, p: &[f64]) -> Option<Vec<f64>> {
        let n = self.chart_dim();
        let scaled_identity = |s: f64| {
            let mut b = vec![0.0; n * n];
            (0..n).for_each(|i| b[i * n + i] = s);
            b
        };
        match self.shape {
            Shape::Plane => Some(vec![0.0; 4]),
            Shape::Sphere { radius } => Some(scaled_identity(-1.0 / radius)),
            Shape::Cylinder { radius } => Some(vec![-1.0 / radius, 0.0, 0.0, 0.0]),
            Shape::Torus { major, minor } => {
                let cv = p[1].cos();
                Some(vec![-cv / (major + minor * cv), 0.0, 0.0, -1.0 / minor])
            }
            Shape::Helicoid { pitch } => {
                let off = -pitch / (p[0] * p[0] + pitch * pitch);
                Some(vec![0.0, off, off, 0.0])
            }
            Shape::CliffordTorus => None,
            Shape::ThreeSphere { radius } => Some(scaled_identity(1.0 / radius)),
        }
    }

    pub fn check_grid(&self, grid: &ChartGrid) -> Result<(), ScenarioError> {
        if grid.dim() != self.chart_dim() {
            return Err(crate::GridError::AxisCount {
                expected: self.chart_dim(),
                found: grid.dim(),
            }
            .into());
        }
        for (axis, (&(lo, hi), &(dlo, dhi))) in grid.bounds().iter().zip(&self.domain).enumerate() {
            if lo < dlo - DOMAIN_SLACK || hi > dhi + DOMAIN_SLACK {
                return Err(ScenarioError::DomainExceeded {
                    axis,
                    lo,
                    hi,
                    domain_lo: dlo,
                    domain_hi: dhi,
                });
            }
        }
        Ok(())
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (n={}, m={})", self.name, self.chart_dim(), self.codim())
    }
}

pub fn catalog() -> Vec<Scenario> {
    vec![
        Scenario::plane(),
        Scenario::sphere(),
        Scenario::cylinder(),
        Scenario::torus(),
        Scenario::helicoid(),
        Scenario::clifford_torus(),
        Scenario::three_sphere(),
    ]
}

pub fn by_name(name: &str) -> Result<Scenario, ScenarioError> {
    catalog()
        .into_iter()
        .find(|s| s.name == name)
        .ok_or_else(|| ScenarioError::Unknown(name.into()))
}

/// Evaluates the scenario and its exact jets on every node of `grid`.
pub fn sample(scenario: &Scenario, grid: &ChartGrid) -> Result<ImmersionPatch, ScenarioError> {
    scenario.check_grid(grid)?;
    let jets: Vec<Jet> = (0..grid.node_count()).map(|i| scenario.jet(&grid.point(i))).collect();
    let positions = jets.iter().flat_map(|j| j.position.iter().copied()).collect();
    let first = jets.iter().flat_map(|j| j.first.iter().copied()).collect();
    let second = jets.iter().flat_map(|j| j.second.iter().copied()).collect();
    let patch = ImmersionPatch::sampled(grid.clone(), scenario.ambient_dim(), positions)
        .and_then(|p| p.with_jets(first, Some(second)))
        .map_err(|e| ScenarioError::Parameter(e.to_string()))?;
    Ok(patch)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::{build_adapted_frame, induced_metric, second_fundamental_form};

    #[test]
    fn jets_match_finite_differences() {
        let h = 1e-5;
        for s in catalog() {
            let n = s.chart_dim();
            let d = s.ambient_dim();
            let p: Vec<f64> = (0..n).map(|k| 0.3 - 0.2 * k as f64).collect();
            let jet = s.jet(&p);
            for k in 0..n {
                let mut plus = p.clone();
                let mut minus = p.clone();
                plus[k] += h;
                minus[k] -= h;
                let (jp, jm) = (s.jet(&plus), s.jet(&minus));
                for c in 0..d {
                    let fd = (jp.position[c] - jm.position[c]) / (2.0 * h);
                    assert!((fd - jet.first[k * d + c]).abs() < 1e-8, "{} first {k} {c}", s.name);
                    for l in 0..n {
                        let fd2 = (jp.first[l * d + c] - jm.first[l * d + c]) / (2.0 * h);
                        assert!((fd2 - jet.second[(k * n + l) * d + c]).abs() < 1e-8, "{} second", s.name);
                    }
                }
            }
        }
    }

    #[test]
    fn analytic_oracles_agree_with_frames() {
        for s in catalog() {
            let extents = vec![9; s.chart_dim()];
            let grid = s.default_grid(&extents).unwrap();
            let patch = sample(&s, &grid).unwrap();
            let metric = induced_metric(&patch);
            let frame = build_adapted_frame(&patch).unwrap();
            let sff = second_fundamental_form(&patch, &frame).unwrap();
            let n = s.chart_dim();
            for node in 0..grid.node_count() {
                let p = grid.point(node);
                for (a, b) in metric.node_block(node).iter().zip(s.analytic_metric(&p)) {
                    assert!((a - b).abs() < 1e-12, "{} metric", s.name);
                }
                if let Some(b) = s.analytic_second_fundamental_form(&p) {
                    for a in 0..s.codim() {
                        for i in 0..n {
                            for j in 0..n {
                                let got = sff.at(node, a, i, j);
                                assert!((got - b[(a * n + i) * n + j]).abs() < 1e-12, "{} B", s.name);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn sample_points() {
        let s = Scenario::sphere();
        let g = ChartGrid::new(vec![5, 5], vec![0.1, 0.1], vec![0.0, 0.0]).unwrap();
        let p = sample(&s, &g).unwrap();
        assert_eq!(p.position(0), &[1.0, 0.0, 0.0]);
        let t = sample(&Scenario::torus(), &g).unwrap();
        assert_eq!(t.position(0), &[3.0, 0.0, 0.0]);
    }

    #[test]
    fn domain_and_parameters() {
        let s = Scenario::sphere();
        let g = ChartGrid::spanning(&[(-1.0, 1.0), (-1.0, 1.5)], &[5, 5]).unwrap();
        assert!(matches!(sample(&s, &g), Err(ScenarioError::DomainExceeded { axis: 1, .. })));
        assert!(matches!(by_name("klein"), Err(ScenarioError::Unknown(_))));
        let mut t = Scenario::torus();
        assert!(t.set_param("minor", 3.0).is_err());
        let mut c = Scenario::cylinder();
        c.set_param("radius", 2.0).unwrap();
        assert_eq!(c.jet(&[0.0, 0.0]).position, vec![2.0, 0.0, 0.0]);
        assert!(c.set_param("pitch", 1.0).is_err());
    }
}
