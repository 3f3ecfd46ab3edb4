//! Command runners: each one solves, then writes its JSON report and its
//! CSV and VTK artifacts into the output directory.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use nalgebra::Matrix2;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};

use super::config::{Command, RunConfig};
use super::tables::Table;
use super::vtk::VtkDocument;
use crate::cell::CorrectorSet;
use crate::dns::{inclusion_strain_fraction, solve_dns, DnsProblem, DnsSolution};
use crate::error::{Error, Result};
use crate::fem::field::FeField;
use crate::macro_solver::{solve_macro, MacroProblem};
use crate::mesh::{build_macro_mesh, Phase};
use crate::selftest::{determinism, run_suite, CriterionOutcome};
use crate::tensor::Voigt4;
use crate::tensors::{voigt_reuss_bounds, EffectiveTensors};
use crate::verification::{
    homogenize, run_convergence_study, spread_ratio, strictly_decreasing, tensor_cross_check, ConvergenceReport,
};

/// Version tag carried by every report.
pub const REPORT_FORMAT: &str = "hichom-report/1";

/// What a command produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub command: Command,
    /// False only when the self-test found a failing criterion.
    pub success: bool,
    pub artifacts: Vec<PathBuf>,
    /// Human-readable lines for the console.
    pub summary: Vec<String>,
}

/// Collects artifacts written into one directory.
struct Output {
    dir: PathBuf,
    artifacts: Vec<PathBuf>,
}

impl Output {
    fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)
            .map_err(|e| Error::validation("outputDir", format!("cannot create {}: {e}", dir.display())))?;
        Ok(Output { dir: dir.to_path_buf(), artifacts: Vec::new() })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.artifacts.push(p.clone());
        p
    }

    fn json(&mut self, name: &str, value: &Value) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(std::io::Error::other(e)))?;
        text.push('\n');
        std::fs::write(self.path(name), text)?;
        Ok(())
    }

    fn csv(&mut self, name: &str, table: &Table) -> Result<()> {
        let p = self.path(name);
        table.write(&p)
    }

    fn vtk(&mut self, name: &str, doc: &VtkDocument<'_>, field: &FeField) -> Result<()> {
        let p = self.path(name);
        doc.write(field.mesh(), &p)
    }

    fn finish(self, command: Command, success: bool, summary: Vec<String>) -> RunOutcome {
        RunOutcome { command, success, artifacts: self.artifacts, summary }
    }
}

/// Report skeleton: format tag, command, configuration as read and as
/// resolved, followed by `body`.
pub fn report(cfg: &RunConfig, body: Value) -> Value {
    let mut m = Map::new();
    m.insert("format".into(), json!(REPORT_FORMAT));
    m.insert("command".into(), json!(cfg.command.name()));
    m.insert("configEcho".into(), cfg.echo.clone());
    m.insert("resolvedConfig".into(), serde_json::to_value(cfg).unwrap_or(Value::Null));
    if let Value::Object(body) = body {
        m.extend(body);
    }
    Value::Object(m)
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

/// Executes the configured command.
pub fn run(cfg: &RunConfig) -> Result<RunOutcome> {
    match cfg.command {
        Command::Cell => run_cell(cfg),
        Command::Tensors => run_tensors(cfg),
        Command::Macro => run_macro(cfg),
        Command::Dns => run_dns(cfg),
        Command::Converge => run_converge(cfg),
        Command::Selftest => run_selftest(cfg),
    }
}

fn cell_tensors(cfg: &RunConfig) -> Result<(CorrectorSet, EffectiveTensors)> {
    let mut study = cfg.study();
    study.cell_resolution = Some(cfg.cell_resolution);
    homogenize(&study)
}

const CORRECTOR_NAMES: [&str; 3] = ["11", "22", "12"];

fn corrector_fields(set: &CorrectorSet) -> Vec<(String, &FeField)> {
    let mut out: Vec<(String, &FeField)> =
        set.chi.iter().enumerate().map(|(i, f)| (format!("chi{}", i + 1), f)).collect();
    for (family, fields) in [("V", &set.v), ("p", &set.p), ("W", &set.w)] {
        for (name, f) in CORRECTOR_NAMES.iter().zip(fields.iter()) {
            out.push((format!("{family}{name}"), f));
        }
    }
    out
}

pub fn run_cell(cfg: &RunConfig) -> Result<RunOutcome> {
    let (set, tensors) = cell_tensors(cfg)?;
    let mut out = Output::create(&cfg.output_dir)?;
    let fields = corrector_fields(&set);
    let mut doc = VtkDocument::new(format!("cell correctors, n = {}", cfg.cell_resolution));
    for (name, f) in &fields {
        doc = doc.field(name.clone(), f);
    }
    out.vtk("correctors.vtk", &doc, &set.chi[0])?;
    let mut table = Table::new(["corrector", "l2Norm", "h1Seminorm", "dirichletEnergy", "maxAbs"]);
    let mut norms = Map::new();
    for (name, f) in &fields {
        let semi = f.h1_seminorm();
        table.push([
            name.clone(),
            f.l2_norm().to_string(),
            semi.to_string(),
            (semi * semi).to_string(),
            f.max_abs().to_string(),
        ]);
        norms.insert(name.clone(), json!({"l2Norm": f.l2_norm(), "h1Seminorm": semi}));
    }
    out.csv("cell_energies.csv", &table)?;
    let mesh = set.mesh();
    let body = json!({
        "mesh": {
            "cellsPerSide": mesh.cells_per_side(),
            "meshInclusionFraction": mesh.phase_area(Phase::Inclusion),
            "exactInclusionFraction": cfg.geometry.inclusion_fraction(),
        },
        "correctorNorms": norms,
        "aHom": m2(&tensors.a()),
    });
    out.json("cell_report.json", &report(cfg, body))?;
    let summary = vec![format!("solved {} cell problems at n = {}", fields.len(), cfg.cell_resolution)];
    Ok(out.finish(cfg.command, true, summary))
}

fn m2(m: &Matrix2<f64>) -> Value {
    json!([[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]])
}

fn tensor_rows(table: &mut Table, name: &str, variant: &str, rows: Vec<Vec<f64>>) {
    for (i, r) in rows.iter().enumerate() {
        for (j, v) in r.iter().enumerate() {
            table.push([name.to_string(), variant.to_string(), i.to_string(), j.to_string(), v.to_string()]);
        }
    }
}

fn voigt_rows(m: &Voigt4) -> Vec<Vec<f64>> {
    m.as_rows().iter().map(|r| r.to_vec()).collect()
}

/// Long-format CSV of every tensor variant.
pub fn tensors_table(t: &EffectiveTensors) -> Table {
    let mut table = Table::new(["tensor", "variant", "row", "col", "value"]);
    let a2 = |m: &Matrix2<f64>| (0..2).map(|i| vec![m[(i, 0)], m[(i, 1)]]).collect();
    tensor_rows(&mut table, "aHom", "energyForm", a2(&t.a_hom.energy));
    tensor_rows(&mut table, "aHom", "averagingForm", a2(&t.a_hom.averaging));
    tensor_rows(&mut table, "bHom", "energyForm", voigt_rows(&t.b_hom.energy));
    tensor_rows(&mut table, "bHom", "averagingForm", voigt_rows(&t.b_hom.averaging));
    tensor_rows(&mut table, "cHom", "weakFormConsistent", voigt_rows(&t.c_hom.weak_form));
    tensor_rows(&mut table, "cHom", "stressProduct", voigt_rows(&t.c_hom.stress_product));
    tensor_rows(&mut table, "rHom", "inclusionOnly", voigt_rows(&t.r_hom.inclusion_only));
    tensor_rows(&mut table, "rHom", "fullCell", voigt_rows(&t.r_hom.full_cell));
    tensor_rows(&mut table, "tHom", "inclusionOnly", voigt_rows(&t.t_hom.inclusion_only));
    tensor_rows(&mut table, "tHom", "fullCell", voigt_rows(&t.t_hom.full_cell));
    table
}

pub fn run_tensors(cfg: &RunConfig) -> Result<RunOutcome> {
    let (set, tensors) = cell_tensors(cfg)?;
    let fraction = set.mesh().phase_area(Phase::Inclusion);
    let bounds = voigt_reuss_bounds(&cfg.coeffs, fraction)?;
    let satisfied = bounds.check(&tensors);
    let mut out = Output::create(&cfg.output_dir)?;
    out.csv("tensors.csv", &tensors_table(&tensors))?;
    let body = json!({
        "cellResolution": cfg.cell_resolution,
        "meshInclusionFraction": fraction,
        "tensors": tensors.to_json(),
        "crossChecks": tensor_cross_check(&tensors),
        "bounds": {"values": to_json(&bounds), "satisfied": satisfied},
    });
    out.json("tensors.json", &report(cfg, body))?;
    let a = tensors.a();
    let summary = vec![
        format!("a_hom = [[{}, {}], [{}, {}]]", a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]),
        format!("Reuss-Voigt bounds satisfied: {satisfied}"),
    ];
    Ok(out.finish(cfg.command, true, summary))
}

fn norm_row(table: &mut Table, norms: &mut Map<String, Value>, name: &str, f: &FeField) {
    let (l2, semi, h1) = (f.l2_norm(), f.h1_seminorm(), f.h1_norm());
    table.push([name.to_string(), l2.to_string(), semi.to_string(), h1.to_string()]);
    norms.insert(name.into(), json!({"l2Norm": l2, "h1Seminorm": semi, "h1Norm": h1}));
}

pub fn run_macro(cfg: &RunConfig) -> Result<RunOutcome> {
    let (_, tensors) = cell_tensors(cfg)?;
    let mesh = Arc::new(build_macro_mesh(1.0, cfg.macro_n())?);
    let problem = MacroProblem::new(mesh, tensors.clone(), &cfg.loading);
    let sol = solve_macro(&problem, &cfg.solver)?;
    let mut out = Output::create(&cfg.output_dir)?;
    let doc = VtkDocument::new(format!("homogenized solution, n = {}", cfg.macro_n()))
        .field("phi0", &sol.phi0)
        .field("v0", &sol.v0)
        .field("w0", &sol.w0)
        .field("u0", &sol.u0);
    out.vtk("macro.vtk", &doc, &sol.phi0)?;
    let mut table = Table::new(["field", "l2Norm", "h1Seminorm", "h1Norm"]);
    let mut norms = Map::new();
    for (name, f) in [("phi0", &sol.phi0), ("v0", &sol.v0), ("w0", &sol.w0), ("u0", &sol.u0)] {
        norm_row(&mut table, &mut norms, name, f);
    }
    out.csv("macro_norms.csv", &table)?;
    let body = json!({"macroResolution": cfg.macro_n(), "tensors": tensors.to_json(), "norms": norms});
    out.json("macro_report.json", &report(cfg, body))?;
    let summary = vec![format!("||phi0||_H1 = {}, ||u0||_H1 = {}", sol.phi0.h1_norm(), sol.u0.h1_norm())];
    Ok(out.finish(cfg.command, true, summary))
}

fn dns_problem(cfg: &RunConfig, epsilon: f64) -> Result<DnsProblem> {
    let mut p = DnsProblem::new(epsilon, cfg.cells_per_period, cfg.geometry.clone(), cfg.coeffs.clone(), &cfg.loading)?;
    p.multiplier_override = cfg.contrast_multiplier;
    Ok(p)
}

fn dns_summary(d: &DnsSolution) -> Value {
    json!({
        "epsilon": d.epsilon,
        "fineCells": d.phi.mesh().cells_per_side(),
        "multiplier": d.multiplier,
        "phiH1Norm": d.phi.h1_norm(),
        "uH1Norm": d.u.h1_norm(),
        "vH1Norm": d.v.h1_norm(),
        "scaledWH1Norm": d.scaled_w_norm(),
        "splittingDefect": d.splitting_defect(),
        "inclusionStrainFraction": inclusion_strain_fraction(&d.u),
    })
}

pub fn run_dns(cfg: &RunConfig) -> Result<RunOutcome> {
    let problems = cfg.epsilons.iter().map(|&e| dns_problem(cfg, e)).collect::<Result<Vec<_>>>()?;
    let solutions = problems.par_iter().map(|p| solve_dns(p, &cfg.solver)).collect::<Result<Vec<_>>>()?;
    let mut out = Output::create(&cfg.output_dir)?;
    let summaries: Vec<Value> = solutions.iter().map(dns_summary).collect();
    let columns = [
        "epsilon",
        "fineCells",
        "multiplier",
        "phiH1Norm",
        "uH1Norm",
        "vH1Norm",
        "scaledWH1Norm",
        "splittingDefect",
        "inclusionStrainFraction",
    ];
    let mut table = Table::new(columns);
    for s in &summaries {
        table.push(columns.map(|c| s[c].to_string()));
    }
    for (p, d) in problems.iter().zip(&solutions) {
        let doc = VtkDocument::new(format!("fine-scale solution, epsilon = 1/{}", p.periods))
            .field("phi", &d.phi)
            .field("u", &d.u)
            .field("v", &d.v)
            .field("w", &d.w);
        out.vtk(&format!("dns_eps_1_{}.vtk", p.periods), &doc, &d.phi)?;
    }
    out.csv("dns_summary.csv", &table)?;
    out.json("dns_report.json", &report(cfg, json!({"runs": summaries})))?;
    let summary = solutions
        .iter()
        .map(|d| {
            format!(
                "epsilon = {}: ||u||_H1 = {}, splitting defect = {:e}",
                d.epsilon,
                d.u.h1_norm(),
                d.splitting_defect()
            )
        })
        .collect();
    Ok(out.finish(cfg.command, true, summary))
}

/// Per-rung CSV of a convergence study.
pub fn convergence_table(r: &ConvergenceReport) -> Table {
    let mut table = Table::new([
        "epsilon",
        "fineCells",
        "multiplier",
        "phiL2Error",
        "uL2Error",
        "phiH1Distance",
        "uH1Distance",
        "correctorH1Residual",
        "phiH1Norm",
        "uH1Norm",
        "scaledWH1Norm",
        "splittingDefect",
    ]);
    for row in &r.rows {
        table.push([
            row.epsilon.to_string(),
            row.fine_cells.to_string(),
            row.multiplier.to_string(),
            row.phi_l2_error.to_string(),
            row.u_l2_error.to_string(),
            row.phi_h1_distance.to_string(),
            row.u_h1_distance.to_string(),
            row.corrector_residual.to_string(),
            row.phi_h1_norm.to_string(),
            row.u_h1_norm.to_string(),
            row.scaled_w_h1_norm.to_string(),
            row.splitting_defect.to_string(),
        ]);
    }
    table
}

/// JSON body of a convergence report.
pub fn convergence_json(r: &ConvergenceReport) -> Value {
    let a_priori = r.column(|row| row.a_priori_norm());
    let w = r.column(|row| row.scaled_w_h1_norm);
    json!({
        "epsilons": r.epsilons(),
        "phiL2Errors": r.phi_l2_errors(),
        "uL2Errors": r.u_l2_errors(),
        "correctorH1Residuals": r.corrector_residuals(),
        "norms": {
            "phiH1": r.column(|row| row.phi_h1_norm),
            "uH1": r.column(|row| row.u_h1_norm),
            "scaledWH1": w,
        },
        "monitors": {
            "phiL2ErrorsDecreasing": strictly_decreasing(&r.phi_l2_errors()),
            "uL2ErrorsDecreasing": strictly_decreasing(&r.u_l2_errors()),
            "aPrioriSpreadRatio": spread_ratio(&a_priori),
            "scaledWSpreadRatio": spread_ratio(&w),
        },
        "rows": to_json(&r.rows),
        "tensorCrossChecks": to_json(&r.tensor_cross_checks),
        "tensors": r.tensors.to_json(),
        "macroCells": r.macro_cells,
        "cellCells": r.cell_cells,
    })
}

pub fn run_converge(cfg: &RunConfig) -> Result<RunOutcome> {
    let study = cfg.study();
    study.ladder()?;
    let r = run_convergence_study(&study)?;
    let mut out = Output::create(&cfg.output_dir)?;
    out.csv("convergence.csv", &convergence_table(&r))?;
    out.json("convergence_report.json", &report(cfg, convergence_json(&r)))?;
    let summary = r
        .rows
        .iter()
        .map(|row| {
            format!(
                "epsilon = {}: |phi_eps - phi0|_L2 = {:e}, |u_eps - u0|_L2 = {:e}",
                row.epsilon, row.phi_l2_error, row.u_l2_error
            )
        })
        .collect();
    Ok(out.finish(cfg.command, true, summary))
}

fn suite_json(cfg: &RunConfig, outcomes: &[CriterionOutcome]) -> Result<String> {
    let body = json!({
        "passed": outcomes.iter().all(|o| o.passed),
        "criteria": to_json(&outcomes),
    });
    serde_json::to_string_pretty(&report(cfg, body)).map_err(|e| Error::Io(std::io::Error::other(e)))
}

/// Runs criteria 1 to 10 twice and compares the serialized reports, which
/// supplies criterion 11. Returns all eleven outcomes and the final report.
pub fn selftest(cfg: &RunConfig) -> Result<(Vec<CriterionOutcome>, String)> {
    let first = suite_json(cfg, &run_suite(&cfg.solver)?)?;
    let mut outcomes = run_suite(&cfg.solver)?;
    let second = suite_json(cfg, &outcomes)?;
    outcomes.push(determinism(&first, &second));
    Ok((outcomes.clone(), suite_json(cfg, &outcomes)? + "\n"))
}

pub fn run_selftest(cfg: &RunConfig) -> Result<RunOutcome> {
    let (outcomes, text) = selftest(cfg)?;
    let mut out = Output::create(&cfg.output_dir)?;
    std::fs::write(out.path("selftest_report.json"), text)?;
    let mut table = Table::new(["id", "criterion", "passed"]);
    for o in &outcomes {
        table.push([o.id.to_string(), o.name.to_string(), o.passed.to_string()]);
    }
    out.csv("selftest.csv", &table)?;
    let success = outcomes.iter().all(|o| o.passed);
    let summary = outcomes.iter().map(CriterionOutcome::summary).collect();
    Ok(out.finish(cfg.command, success, summary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn config(doc: Value, dir: &Path) -> RunConfig {
        let mut c = RunConfig::from_value(doc).unwrap();
        c.output_dir = dir.to_path_buf();
        c
    }

    fn read_json(p: &Path) -> Value {
        serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
    }

    #[test]
    fn tensors_with_constant_coefficients() {
        let dir = tempfile::tempdir().unwrap();
        let doc = json!({
            "command": "tensors",
            "cellResolution": 16,
            "coefficients": {
                "a": {"matrix": [[2.0, 0.0], [0.0, 3.0]], "inclusion": [[2.0, 0.0], [0.0, 3.0]]},
                "b": {"matrix": {"lambda": 1.5, "mu": 0.75}, "inclusion": {"lambda": 1.5, "mu": 0.75}}
            }
        });
        let c = config(doc.clone(), dir.path());
        let outcome = run(&c).unwrap();
        assert!(outcome.success);
        let r = read_json(&dir.path().join("tensors.json"));
        assert_eq!(r["format"], REPORT_FORMAT);
        assert_eq!(r["configEcho"], doc);
        let a = &r["tensors"]["aHom"]["energyForm"];
        for (i, j, expect) in [(0, 0, 2.0), (0, 1, 0.0), (1, 0, 0.0), (1, 1, 3.0)] {
            assert!((a[i][j].as_f64().unwrap() - expect).abs() < 1e-10);
        }
        let b = &r["tensors"]["bHom"]["energyForm"];
        let expect = crate::tensor::Lame::new(1.5, 0.75).voigt().as_rows();
        for i in 0..3 {
            for j in 0..3 {
                assert!((b[i][j].as_f64().unwrap() - expect[i][j]).abs() < 1e-10);
            }
        }
        let csv = std::fs::read_to_string(dir.path().join("tensors.csv")).unwrap();
        assert!(csv.starts_with("tensor,variant,row,col,value\n"));
        assert_eq!(csv.lines().count(), 1 + 2 * 4 + 8 * 9);
    }

    #[test]
    fn cell_and_macro_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let c = config(json!({"command": "cell", "cellResolution": 8}), dir.path());
        let o = run(&c).unwrap();
        let names: Vec<_> = o.artifacts.iter().map(|p| p.file_name().unwrap().to_str().unwrap().to_string()).collect();
        assert_eq!(names, ["correctors.vtk", "cell_energies.csv", "cell_report.json"]);
        let vtk = std::fs::read_to_string(dir.path().join("correctors.vtk")).unwrap();
        assert!(vtk.contains("SCALARS chi1 double 1") && vtk.contains("VECTORS W12 double"));

        let c = config(json!({"command": "macro", "cellResolution": 8, "macroResolution": 8}), dir.path());
        run(&c).unwrap();
        let r = read_json(&dir.path().join("macro_report.json"));
        assert!(r["norms"]["u0"]["h1Norm"].as_f64().unwrap() > 0.0);
        assert!(std::fs::read_to_string(dir.path().join("macro.vtk")).unwrap().contains("VECTORS u0 double"));
    }

    #[test]
    fn dns_writes_one_snapshot_per_epsilon() {
        let dir = tempfile::tempdir().unwrap();
        let c = config(json!({"command": "dns", "epsilons": [0.5, 0.25]}), dir.path());
        run(&c).unwrap();
        for name in ["dns_eps_1_2.vtk", "dns_eps_1_4.vtk", "dns_summary.csv", "dns_report.json"] {
            assert!(dir.path().join(name).exists(), "{name}");
        }
        let csv = std::fs::read_to_string(dir.path().join("dns_summary.csv")).unwrap();
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    fn converge_rejects_non_tiling_ladder() {
        let dir = tempfile::tempdir().unwrap();
        let c = config(json!({"command": "converge", "epsilons": [0.5, 0.3]}), dir.path());
        let e = run(&c).unwrap_err();
        assert_eq!(e.kind(), "LadderMismatch");
        assert_ne!(e.exit_code(), 0);
        assert!(!dir.path().join("convergence_report.json").exists());
    }

    #[test]
    fn converge_report_is_reproducible() {
        let dir = tempfile::tempdir().unwrap();
        let doc = json!({"command": "converge", "epsilons": [0.5, 0.25], "cellsPerPeriod": 4});
        let c = config(doc, dir.path());
        run(&c).unwrap();
        let path = dir.path().join("convergence_report.json");
        let first = std::fs::read(&path).unwrap();
        run(&c).unwrap();
        assert_eq!(first, std::fs::read(&path).unwrap());
        let r = read_json(&path);
        assert_eq!(r["epsilons"], json!([0.5, 0.25]));
        assert_eq!(r["phiL2Errors"].as_array().unwrap().len(), 2);
    }
}
