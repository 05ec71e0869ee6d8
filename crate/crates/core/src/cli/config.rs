//! Scenario files. Everything is parsed and validated here, before any
//! computation or output.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::calculus::{parse_field, Params, ScalarField, VectorFieldExpr};
use crate::chart::{DarbouxChart, Point};
use crate::dynamics::{ContactSystem, IntegratorSpec};
use crate::submanifolds::{LevelSetSubmanifold, ParamSubmanifold};
use crate::symmetry::{GroupAction, Quadrature};
use crate::tolerances;

use super::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub initial_conditions: Vec<Vec<f64>>,
    pub chart: ChartConfig,
    #[serde(default)]
    pub parameters: BTreeMap<String, f64>,
    #[serde(default)]
    pub hamiltonian: Option<HamiltonianConfig>,
    #[serde(default)]
    pub integrator: Option<IntegratorConfig>,
    #[serde(default)]
    pub action: Option<ActionConfig>,
    #[serde(default)]
    pub check: CheckConfig,
    #[serde(default)]
    pub submanifold: Option<SubmanifoldConfig>,
    #[serde(default)]
    pub lift: Option<LiftConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartConfig {
    pub n: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianConfig {
    pub expr: String,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum MethodName {
    Rk4,
    Rkf45,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    pub method: MethodName,
    #[serde(default)]
    pub t0: f64,
    pub t1: f64,
    #[serde(default)]
    pub step: Option<f64>,
    #[serde(default)]
    pub abs_tol: Option<f64>,
    #[serde(default)]
    pub rel_tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum QuadratureName {
    Trapezoid,
    Simpson,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionConfig {
    /// One-based indices `a` of translated coordinates `x^a`.
    #[serde(default)]
    pub translations: Vec<usize>,
    /// Generators as component expressions; reduction requires `adapted` to name their axes.
    #[serde(default)]
    pub generators: Vec<Vec<String>>,
    #[serde(default)]
    pub adapted: Option<Vec<usize>>,
    #[serde(default = "yes")]
    pub abelian: bool,
    #[serde(default)]
    pub mu: Option<Vec<f64>>,
    #[serde(default)]
    pub reconstruct: bool,
    #[serde(default = "simpson")]
    pub quadrature: QuadratureName,
}

fn yes() -> bool {
    true
}

fn simpson() -> QuadratureName {
    QuadratureName::Simpson
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "lowercase")]
pub enum StructureName {
    #[default]
    Contact,
    Cosymplectic,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckConfig {
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_radius")]
    pub radius: f64,
    #[serde(default)]
    pub structure: StructureName,
    /// Test functions for the bracket identities.
    #[serde(default)]
    pub functions: Vec<String>,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            samples: default_samples(),
            radius: default_radius(),
            structure: StructureName::Contact,
            functions: Vec::new(),
        }
    }
}

fn default_samples() -> usize {
    100
}

fn default_radius() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubmanifoldConfig {
    #[serde(default)]
    pub constraints: Vec<String>,
    /// Number of parameters `k` of an embedding written in `s1..sk`.
    #[serde(default)]
    pub parameters: Option<usize>,
    #[serde(default)]
    pub embedding: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LiftConfig {
    /// Vector field components; the Hamiltonian field of `hamiltonian` when absent.
    #[serde(default)]
    pub field: Option<Vec<String>>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub dir: Option<PathBuf>,
}

pub enum SubmanifoldSpec {
    LevelSet(LevelSetSubmanifold),
    Param(ParamSubmanifold),
}

pub struct ActionSpec {
    pub action: GroupAction,
    pub mu: Vec<f64>,
    pub reconstruct: bool,
    pub quadrature: Quadrature,
}

/// A fully parsed scenario.
pub struct Scenario {
    pub raw: ScenarioConfig,
    pub sha256: String,
    pub chart: DarbouxChart,
    pub params: Params,
    pub system: Option<ContactSystem>,
    pub integrator: IntegratorSpec,
    pub initial: Vec<Point>,
    pub action: Option<ActionSpec>,
    pub functions: Vec<ScalarField>,
    pub submanifold: Option<SubmanifoldSpec>,
    pub lift_field: Option<VectorFieldExpr>,
    pub seed: u64,
}

fn config_err(section: &str, e: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{section}: {e}"))
}

impl Scenario {
    pub fn from_str(text: &str, seed_override: Option<u64>) -> Result<Self, CliError> {
        let raw: ScenarioConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        let sha256 = hex::encode(Sha256::digest(text.as_bytes()));
        let chart = DarbouxChart::new(raw.chart.n).map_err(|e| config_err("chart", e))?;
        let params: Params = raw.parameters.clone();
        let field = |section: &str, src: &str| parse_field(src, &chart, &params).map_err(|e| config_err(section, e));

        let system = match &raw.hamiltonian {
            Some(h) => Some(ContactSystem::new(chart, field("hamiltonian", &h.expr)?).map_err(|e| config_err("hamiltonian", e))?),
            None => None,
        };
        let integrator = match &raw.integrator {
            None => IntegratorSpec::rk4(0.0, 1.0, tolerances::DEFAULT_STEP),
            Some(c) => match c.method {
                MethodName::Rk4 => IntegratorSpec::rk4(c.t0, c.t1, c.step.unwrap_or(tolerances::DEFAULT_STEP)),
                MethodName::Rkf45 => IntegratorSpec::rkf45(
                    c.t0,
                    c.t1,
                    c.abs_tol.unwrap_or(tolerances::DEFAULT_ABS_TOL),
                    c.rel_tol.unwrap_or(tolerances::DEFAULT_REL_TOL),
                ),
            },
        }
        .map_err(|e| config_err("integrator", e))?;
        let initial = raw
            .initial_conditions
            .iter()
            .map(|c| chart.point(c.clone()))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| config_err("initial_conditions", e))?;

        let action = match &raw.action {
            None => None,
            Some(a) => Some(parse_action(a, chart, &params)?),
        };
        let functions = raw
            .check
            .functions
            .iter()
            .map(|s| field("check.functions", s))
            .collect::<Result<Vec<_>, _>>()?;
        if !(raw.check.radius > 0.0 && raw.check.radius.is_finite()) {
            return Err(config_err("check.radius", "must be positive"));
        }
        if raw.check.samples == 0 {
            return Err(config_err("check.samples", "must be at least 1"));
        }
        let submanifold = match &raw.submanifold {
            None => None,
            Some(s) => Some(parse_submanifold(s, chart, &params)?),
        };
        let lift_field = match raw.lift.as_ref().and_then(|l| l.field.as_ref()) {
            Some(f) => Some(VectorFieldExpr::parse(f, &chart, &params).map_err(|e| config_err("lift.field", e))?),
            None => None,
        };
        let seed = seed_override.or(raw.seed).unwrap_or(0);
        Ok(Scenario {
            raw,
            sha256,
            chart,
            params,
            system,
            integrator,
            initial,
            action,
            functions,
            submanifold,
            lift_field,
            seed,
        })
    }

    pub fn require_system(&self) -> Result<&ContactSystem, CliError> {
        self.system
            .as_ref()
            .ok_or_else(|| CliError::Config("a [hamiltonian] section is required".into()))
    }

    pub fn require_initial(&self) -> Result<&[Point], CliError> {
        if self.initial.is_empty() {
            return Err(CliError::Config("initial_conditions must list at least one point".into()));
        }
        Ok(&self.initial)
    }
}

fn parse_action(a: &ActionConfig, chart: DarbouxChart, params: &Params) -> Result<ActionSpec, CliError> {
    let action = if !a.translations.is_empty() {
        if !a.generators.is_empty() {
            return Err(config_err("action", "give either translations or generators, not both"));
        }
        if a.translations.contains(&0) {
            return Err(config_err("action.translations", "indices are one-based"));
        }
        let axes: Vec<usize> = a.translations.iter().map(|&i| i - 1).collect();
        GroupAction::translations(chart, &axes).map_err(|e| config_err("action", e))?
    } else {
        let gens = a
            .generators
            .iter()
            .map(|g| VectorFieldExpr::parse(g, &chart, params))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| config_err("action.generators", e))?;
        let act = GroupAction::new(chart, gens, a.abelian).map_err(|e| config_err("action", e))?;
        match &a.adapted {
            Some(axes) if axes.contains(&0) => return Err(config_err("action.adapted", "indices are one-based")),
            Some(axes) => act.with_adapted(axes.iter().map(|&i| i - 1).collect()),
            None => act,
        }
    };
    let mu = a.mu.clone().unwrap_or_else(|| vec![0.0; action.len()]);
    if mu.len() != action.len() {
        return Err(config_err("action.mu", format!("expected {} components, got {}", action.len(), mu.len())));
    }
    Ok(ActionSpec {
        action,
        mu,
        reconstruct: a.reconstruct,
        quadrature: match a.quadrature {
            QuadratureName::Trapezoid => Quadrature::Trapezoid,
            QuadratureName::Simpson => Quadrature::Simpson,
        },
    })
}

fn parse_submanifold(s: &SubmanifoldConfig, chart: DarbouxChart, params: &Params) -> Result<SubmanifoldSpec, CliError> {
    match (s.constraints.is_empty(), s.embedding.is_empty()) {
        (false, true) => LevelSetSubmanifold::parse(chart, &s.constraints, params)
            .map(SubmanifoldSpec::LevelSet)
            .map_err(|e| config_err("submanifold.constraints", e)),
        (true, false) => {
            let k = s
                .parameters
                .ok_or_else(|| config_err("submanifold", "embedding needs `parameters`"))?;
            ParamSubmanifold::parse(chart, k, &s.embedding, params)
                .map(SubmanifoldSpec::Param)
                .map_err(|e| config_err("submanifold.embedding", e))
        }
        _ => Err(config_err("submanifold", "give exactly one of constraints or embedding")),
    }
}
