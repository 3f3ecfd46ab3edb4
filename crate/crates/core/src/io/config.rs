//! Run configuration: JSON parsing, defaults and key-level validation.
//!
//! Every validation failure names the configuration key it concerns, using
//! dotted camelCase paths such as `geometry.radius` or `solver.tolerance`.

use std::path::{Path, PathBuf};

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::cell::PhaseCoefficients;
use crate::error::{Error, Result};
use crate::fem::solver::SolverConfig;
use crate::loading::Loading;
use crate::mesh::{PhaseMap, UnitCellGeometry, MIN_CELLS};
use crate::tensor::{check_spd, Electrostriction, Lame};
use crate::tensors::{CHomMode, TensorDomain};
use crate::verification::StudyConfig;

pub const DEFAULT_CELL_RESOLUTION: usize = 64;
pub const DEFAULT_MACRO_RESOLUTION: usize = 64;
pub const DEFAULT_CELLS_PER_PERIOD: usize = 8;
pub const DEFAULT_OUTPUT_DIR: &str = "hichom-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Command {
    Cell,
    Tensors,
    Macro,
    Dns,
    Converge,
    Selftest,
}

impl Command {
    pub const ALL: [Command; 6] =
        [Command::Cell, Command::Tensors, Command::Macro, Command::Dns, Command::Converge, Command::Selftest];

    pub fn name(self) -> &'static str {
        match self {
            Command::Cell => "cell",
            Command::Tensors => "tensors",
            Command::Macro => "macro",
            Command::Dns => "dns",
            Command::Converge => "converge",
            Command::Selftest => "selftest",
        }
    }

    pub fn from_name(name: &str) -> Option<Command> {
        Command::ALL.into_iter().find(|c| c.name() == name)
    }
}

/// Permittivity of one phase: a number `s` means `s I`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PermittivitySpec {
    Isotropic(f64),
    Matrix([[f64; 2]; 2]),
}

impl PermittivitySpec {
    pub fn matrix(&self) -> Matrix2<f64> {
        match *self {
            PermittivitySpec::Isotropic(s) => Matrix2::identity() * s,
            PermittivitySpec::Matrix(m) => Matrix2::new(m[0][0], m[0][1], m[1][0], m[1][1]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct PhasePair<T> {
    pub matrix: T,
    pub inclusion: T,
}

/// Material section of the configuration file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default, deny_unknown_fields)]
pub struct CoefficientsSpec {
    pub a: PhasePair<PermittivitySpec>,
    pub b: PhasePair<Lame>,
    pub r: Lame,
    pub c: PhasePair<Electrostriction>,
    pub gamma: f64,
}

impl Default for CoefficientsSpec {
    fn default() -> Self {
        let d = PhaseCoefficients::default();
        CoefficientsSpec {
            a: PhasePair {
                matrix: PermittivitySpec::Isotropic(d.a.matrix[(0, 0)]),
                inclusion: PermittivitySpec::Isotropic(d.a.inclusion[(0, 0)]),
            },
            b: PhasePair { matrix: d.b.matrix, inclusion: d.b.inclusion },
            r: d.r,
            c: PhasePair { matrix: d.c.matrix, inclusion: d.c.inclusion },
            gamma: d.gamma,
        }
    }
}

impl CoefficientsSpec {
    pub fn resolve(&self) -> Result<PhaseCoefficients> {
        let keyed = |key: &str, r: Result<()>| r.map_err(|e| Error::validation(key, e.to_string()));
        let a = PhaseMap::new(self.a.matrix.matrix(), self.a.inclusion.matrix());
        keyed("coefficients.a.matrix", check_spd(&a.matrix, "a"))?;
        keyed("coefficients.a.inclusion", check_spd(&a.inclusion, "a"))?;
        keyed("coefficients.b.matrix", self.b.matrix.validate("B"))?;
        keyed("coefficients.b.inclusion", self.b.inclusion.validate("B"))?;
        if !(self.r.lambda == 0.0 && self.r.mu == 0.0) {
            keyed("coefficients.r", self.r.validate("R"))?;
        }
        let coeffs = PhaseCoefficients {
            a,
            b: PhaseMap::new(self.b.matrix, self.b.inclusion),
            r: self.r,
            c: PhaseMap::new(self.c.matrix, self.c.inclusion),
            gamma: self.gamma,
        };
        coeffs.validate()?;
        Ok(coeffs)
    }
}

/// The on-disk schema, before validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct RawConfig {
    command: Option<String>,
    #[serde(default = "default_geometry")]
    geometry: UnitCellGeometry,
    #[serde(default)]
    coefficients: CoefficientsSpec,
    #[serde(default = "default_cell_resolution")]
    cell_resolution: usize,
    #[serde(default)]
    macro_resolution: Option<usize>,
    #[serde(default = "default_cells_per_period")]
    cells_per_period: usize,
    #[serde(default = "default_epsilons")]
    epsilons: Vec<f64>,
    #[serde(default)]
    study_cell_resolution: Option<usize>,
    #[serde(default)]
    solver: SolverConfig,
    #[serde(default)]
    c_hom_mode: CHomMode,
    #[serde(default)]
    r_hom_domain: TensorDomain,
    #[serde(default)]
    loading: Loading,
    #[serde(default)]
    output_dir: Option<PathBuf>,
    #[serde(default)]
    contrast_multiplier: Option<f64>,
}

fn default_geometry() -> UnitCellGeometry {
    UnitCellGeometry::disk(0.25)
}

fn default_cell_resolution() -> usize {
    DEFAULT_CELL_RESOLUTION
}

fn default_cells_per_period() -> usize {
    DEFAULT_CELLS_PER_PERIOD
}

fn default_epsilons() -> Vec<f64> {
    vec![0.5, 0.25, 0.125]
}

/// A validated run configuration with every default filled in.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RunConfig {
    pub command: Command,
    pub geometry: UnitCellGeometry,
    pub coefficients: CoefficientsSpec,
    pub cell_resolution: usize,
    pub macro_resolution: Option<usize>,
    pub cells_per_period: usize,
    pub epsilons: Vec<f64>,
    pub study_cell_resolution: Option<usize>,
    pub solver: SolverConfig,
    pub c_hom_mode: CHomMode,
    pub r_hom_domain: TensorDomain,
    pub loading: Loading,
    pub output_dir: PathBuf,
    pub contrast_multiplier: Option<f64>,
    /// The document as read, reproduced in every report.
    #[serde(skip)]
    pub echo: Value,
    #[serde(skip)]
    pub coeffs: PhaseCoefficients,
}

fn geometry_key(g: &UnitCellGeometry) -> &'static str {
    match g {
        UnitCellGeometry::DiskInclusion { .. } => "geometry.radius",
        UnitCellGeometry::Laminate { .. } => "geometry.layerFraction",
        UnitCellGeometry::IndicatorGrid { .. } => "geometry.grid",
    }
}

impl RunConfig {
    /// Parses and validates a JSON document.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let echo: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_value(echo)
    }

    pub fn from_value(echo: Value) -> Result<Self> {
        if !echo.is_object() {
            return Err(Error::Parse("configuration must be a JSON object".into()));
        }
        let raw: RawConfig = serde_json::from_value(echo.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        let command = match raw.command.as_deref() {
            None => return Err(Error::validation("command", "is required")),
            Some(name) => Command::from_name(name).ok_or_else(|| {
                let known: Vec<_> = Command::ALL.iter().map(|c| c.name()).collect();
                Error::validation("command", format!("unknown command `{name}`, expected one of {known:?}"))
            })?,
        };
        raw.geometry.validate().map_err(|e| Error::validation(geometry_key(&raw.geometry), e.to_string()))?;
        let coeffs = raw.coefficients.resolve()?;
        if raw.cell_resolution < MIN_CELLS {
            return Err(Error::validation("cellResolution", format!("must be at least {MIN_CELLS}")));
        }
        if raw.cells_per_period < MIN_CELLS {
            return Err(Error::validation("cellsPerPeriod", format!("must be at least {MIN_CELLS}")));
        }
        if let Some(n) = raw.study_cell_resolution.filter(|&n| n < MIN_CELLS) {
            return Err(Error::validation("studyCellResolution", format!("{n} is below {MIN_CELLS}")));
        }
        if let Some(n) = raw.macro_resolution.filter(|&n| n < MIN_CELLS) {
            return Err(Error::validation("macroResolution", format!("{n} is below {MIN_CELLS}")));
        }
        if raw.epsilons.is_empty() || raw.epsilons.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return Err(Error::validation("epsilons", "must be a non-empty list of positive numbers"));
        }
        raw.solver.validate()?;
        if !(raw.loading.f.is_finite() && raw.loading.g.is_finite() && raw.loading.h.is_finite()) {
            return Err(Error::validation("loading", "entries must be finite"));
        }
        if let Some(m) = raw.contrast_multiplier.filter(|m| !(m.is_finite() && *m > 0.0)) {
            return Err(Error::validation("contrastMultiplier", format!("{m} must be positive")));
        }
        Ok(RunConfig {
            command,
            geometry: raw.geometry,
            coefficients: raw.coefficients,
            cell_resolution: raw.cell_resolution,
            macro_resolution: raw.macro_resolution,
            cells_per_period: raw.cells_per_period,
            epsilons: raw.epsilons,
            study_cell_resolution: raw.study_cell_resolution,
            solver: raw.solver,
            c_hom_mode: raw.c_hom_mode,
            r_hom_domain: raw.r_hom_domain,
            loading: raw.loading,
            output_dir: raw.output_dir.unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR)),
            contrast_multiplier: raw.contrast_multiplier,
            echo,
            coeffs,
        })
    }

    /// Configuration for `command` with every default.
    pub fn defaults(command: Command) -> Self {
        let echo = serde_json::json!({ "command": command.name() });
        Self::from_value(echo).expect("default configuration is valid")
    }

    pub fn study(&self) -> StudyConfig {
        StudyConfig {
            geometry: self.geometry.clone(),
            coeffs: self.coeffs.clone(),
            loading: self.loading,
            epsilons: self.epsilons.clone(),
            cells_per_period: self.cells_per_period,
            cell_resolution: self.study_cell_resolution,
            macro_resolution: self.macro_resolution,
            solver: self.solver,
            c_mode: self.c_hom_mode,
            domain: self.r_hom_domain,
        }
    }

    pub fn macro_n(&self) -> usize {
        self.macro_resolution.unwrap_or(DEFAULT_MACRO_RESOLUTION)
    }
}

/// Reads and validates a configuration file.
pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
    RunConfig::from_json_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn key_of(e: Error) -> String {
        match e {
            Error::Validation { key, .. } => key,
            other => panic!("expected a validation error, got {other:?}"),
        }
    }

    #[test]
    fn command_is_required() {
        let e = RunConfig::from_value(json!({"geometry": {"kind": "diskInclusion", "radius": 0.25}})).unwrap_err();
        assert_eq!(e.kind(), "ValidationError");
        assert_eq!(key_of(e), "command");
    }

    #[test]
    fn defaults_are_filled() {
        let c = RunConfig::from_value(json!({"command": "tensors"})).unwrap();
        assert_eq!(c.command, Command::Tensors);
        assert_eq!(c.cell_resolution, 64);
        assert_eq!(c.cells_per_period, 8);
        assert_eq!(c.coeffs.gamma, 1.0);
        assert_eq!(c.solver.tolerance, 1e-10);
        assert_eq!(c.c_hom_mode, CHomMode::WeakFormConsistent);
        assert_eq!(c.r_hom_domain, TensorDomain::InclusionOnly);
        assert_eq!(c.coeffs, PhaseCoefficients::default());
        assert_eq!(c.geometry, UnitCellGeometry::disk(0.25));
    }

    #[test]
    fn radius_out_of_range_names_radius() {
        let e = RunConfig::from_value(json!({"command": "cell", "geometry": {"kind": "diskInclusion", "radius": 0.6}}))
            .unwrap_err();
        assert_eq!(key_of(e), "geometry.radius");
    }

    #[test]
    fn bad_keys_are_named() {
        let cases = [
            (json!({"command": "fly"}), "command"),
            (json!({"command": "cell", "cellResolution": 2}), "cellResolution"),
            (json!({"command": "cell", "solver": {"tolerance": 0.5}}), "solver.tolerance"),
            (
                json!({"command": "cell", "coefficients": {"a": {"matrix": -1.0, "inclusion": 1.0}}}),
                "coefficients.a.matrix",
            ),
            (json!({"command": "cell", "coefficients": {"gamma": 0.0}}), "coefficients.gamma"),
            (json!({"command": "dns", "epsilons": []}), "epsilons"),
            (json!({"command": "dns", "contrastMultiplier": -3.0}), "contrastMultiplier"),
        ];
        for (doc, key) in cases {
            assert_eq!(key_of(RunConfig::from_value(doc).unwrap_err()), key);
        }
    }

    #[test]
    fn malformed_documents_are_parse_errors() {
        assert_eq!(RunConfig::from_json_str("{").unwrap_err().kind(), "ParseError");
        assert_eq!(RunConfig::from_json_str("[1]").unwrap_err().kind(), "ParseError");
        let e = RunConfig::from_value(json!({"command": "cell", "unknownKey": 1})).unwrap_err();
        assert_eq!(e.kind(), "ParseError");
    }

    #[test]
    fn full_config_round_trips_and_echoes() {
        let doc = json!({
            "command": "converge",
            "geometry": {"kind": "laminate", "layerFraction": 0.5},
            "coefficients": {
                "a": {"matrix": [[1.0, 0.0], [0.0, 2.0]], "inclusion": 4.0},
                "b": {"matrix": {"lambda": 1.0, "mu": 1.0}, "inclusion": {"lambda": 2.0, "mu": 2.0}},
                "r": {"lambda": 10.0, "mu": 10.0},
                "c": {"matrix": {"alpha": 0.0, "beta": 0.0}, "inclusion": {"alpha": 0.0, "beta": 0.0}},
                "gamma": 0.5
            },
            "cellResolution": 32,
            "macroResolution": 64,
            "cellsPerPeriod": 8,
            "epsilons": [0.5, 0.25],
            "studyCellResolution": 16,
            "solver": {"method": "conjugateGradient", "tolerance": 1e-9, "maxIterations": 500, "quadratureOrder": 3},
            "cHomMode": "stressProduct",
            "rHomDomain": "fullCell",
            "loading": {"f": {"kind": "constant", "value": 2.0}},
            "outputDir": "results",
            "contrastMultiplier": 100.0
        });
        let c = RunConfig::from_value(doc.clone()).unwrap();
        assert_eq!(c.echo, doc);
        assert_eq!(c.coeffs.a.matrix, Matrix2::new(1.0, 0.0, 0.0, 2.0));
        assert_eq!(c.coeffs.gamma, 0.5);
        assert_eq!(c.c_hom_mode, CHomMode::StressProduct);
        let study = c.study();
        assert_eq!(study.cell_n(), 16);
        assert_eq!(study.macro_n().unwrap(), 64);
        let resolved = serde_json::to_value(&c).unwrap();
        let again = RunConfig::from_value(resolved.clone()).unwrap();
        assert_eq!(serde_json::to_value(&again).unwrap(), resolved);
    }
}
