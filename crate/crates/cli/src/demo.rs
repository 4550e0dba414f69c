//! The headline pipeline: geometry, Y sample, certificate suite, dynamics,
//! shrink search, membership in the pulled-back basin, and slice topology.

use std::fmt;
use std::path::Path;

use hullab_core::autom::{
    basin_inradius, default_attracting_map, fixed_point_report, omega_membership, shrink_search, AutomError,
    AutomorphismChain, BasinCaps, BasinVerdict,
};
use hullab_core::geometry::{
    build_default_geometry, sample_set, validate_geometry, SceneGeometry, SetLabel, DEFAULT_H_GRID,
};
use hullab_core::hull::stolzenberg_suite;
use hullab_core::{ComplexPoint, C64};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::Config;
use crate::error::CliError;
use crate::plot::{emit_plot, write_atomic, write_json, PlotDoc, PlotKind};
use crate::topology::{grid_coordinate, slice_topology, CellState, SliceLine, TopologyReport};

/// Spacing of the curve samples drawn in the geometry plot.
const PLOT_CURVE_H: f64 = 0.02;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageRow {
    pub stage: String,
    pub pass: bool,
    pub summary: String,
    /// Paths relative to the output directory.
    pub artifacts: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DemoReport {
    pub stages: Vec<StageRow>,
    pub pass: bool,
    /// The stage that stopped the run, if any.
    pub aborted_at: Option<String>,
}

impl fmt::Display for DemoReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<12} {:<5} summary", "stage", "ok")?;
        for s in &self.stages {
            writeln!(f, "{:<12} {:<5} {}", s.stage, if s.pass { "pass" } else { "FAIL" }, s.summary)?;
            if !s.artifacts.is_empty() {
                writeln!(f, "{:<12} {:<5} -> {}", "", "", s.artifacts.join(", "))?;
            }
        }
        match &self.aborted_at {
            Some(s) => write!(f, "aborted at stage {s}"),
            None => write!(f, "all stages {}", if self.pass { "passed" } else { "ran, some failed" }),
        }
    }
}

/// Point cloud of both curves with the anchors `+i` and `-i` marked.
pub fn geometry_plot(geom: &SceneGeometry) -> PlotDoc {
    let mut rows = Vec::new();
    for (k, c) in [&geom.curve1, &geom.curve2].into_iter().enumerate() {
        for s in c.arclength_samples(PLOT_CURVE_H) {
            rows.push(vec![s.z.re, s.z.im, k as f64]);
        }
    }
    rows.push(vec![0.0, 1.0, 2.0]);
    rows.push(vec![0.0, -1.0, 2.0]);
    PlotDoc {
        kind: PlotKind::PointCloud,
        columns: vec!["re_z".into(), "im_z".into(), "series".into()],
        rows,
        x_label: "Re z".into(),
        y_label: "Im z".into(),
        caption: "boundary curves".into(),
        legend: vec!["curve 1".into(), "curve 2".into(), "anchors +i, -i".into()],
    }
}

/// Heatmap of a cell grid over a window, row `iy` major.
pub fn cell_plot(cells: &[usize], window: &[f64; 4], n: usize, legend: &[&str], caption: String, axes: (&str, &str)) -> PlotDoc {
    let rows = cells
        .iter()
        .enumerate()
        .map(|(c, &v)| {
            let x = grid_coordinate(window, n, c % n, c / n);
            vec![x.re, x.im, v as f64]
        })
        .collect();
    PlotDoc {
        kind: PlotKind::Heatmap,
        columns: vec!["x".into(), "y".into(), "value".into()],
        rows,
        x_label: axes.0.into(),
        y_label: axes.1.into(),
        caption,
        legend: legend.iter().map(|s| s.to_string()).collect(),
    }
}

/// Best-so-far radius against the evaluation count.
pub fn trace_plot(trace: &[f64]) -> PlotDoc {
    PlotDoc {
        kind: PlotKind::TraceLine,
        columns: vec!["evaluation".into(), "radius".into()],
        rows: trace.iter().enumerate().map(|(i, r)| vec![i as f64, *r]).collect(),
        x_label: "objective evaluations".into(),
        y_label: "max |psi(x) - p|".into(),
        caption: "shrink search".into(),
        legend: Vec::new(),
    }
}

/// Membership in `psi^-1(basin of G)` as a slice oracle.
pub fn omega_cell(psi: &AutomorphismChain, g: &AutomorphismChain, p: &ComplexPoint, caps: &BasinCaps, q: &ComplexPoint) -> CellState {
    match omega_membership(psi, g, p, q, caps) {
        Ok(BasinVerdict::Converged(_)) => CellState::Inside,
        Ok(BasinVerdict::Escaped(_)) => CellState::Outside,
        Ok(BasinVerdict::Undecided(_)) => CellState::Undecided,
        Err(_) => CellState::DomainError,
    }
}

/// Writes a slice report and its heatmap under `stem`; returns the file names.
pub fn write_slice(out: &Path, stem: &str, report: &TopologyReport, cells: &[CellState]) -> Result<Vec<String>, CliError> {
    write_json(&out.join(format!("{stem}.json")), report)?;
    let codes: Vec<usize> = cells.iter().map(|c| c.code()).collect();
    let caption = format!("{} components, holes {:?}", report.components, report.holes_per_component);
    let doc = cell_plot(&codes, &report.window, report.n, &CellState::LEGEND, caption, ("Re", "Im"));
    emit_plot(&doc, &out.join(format!("{stem}_map")))?;
    Ok(vec![format!("{stem}.json"), format!("{stem}_map.svg"), format!("{stem}_map.csv")])
}

struct Run<'a> {
    out: &'a Path,
    stages: Vec<StageRow>,
}

impl Run<'_> {
    fn push(&mut self, stage: &str, pass: bool, summary: String, artifacts: Vec<String>) -> bool {
        self.stages.push(StageRow { stage: stage.into(), pass, summary, artifacts });
        pass
    }

    /// Records a stage that could not complete.
    fn fail(&mut self, stage: &str, e: impl fmt::Display) -> bool {
        self.push(stage, false, e.to_string(), Vec::new())
    }

    fn finish(self) -> Result<DemoReport, CliError> {
        let aborted_at = self.stages.iter().find(|s| !s.pass).map(|s| s.stage.clone());
        let report = DemoReport { pass: aborted_at.is_none(), stages: self.stages, aborted_at };
        write_json(&self.out.join("demo.json"), &report)?;
        Ok(report)
    }
}

/// Runs every stage in order, stopping at the first failure. Artifacts go
/// to `out`; I/O failures are returned as errors, stage failures as rows.
pub fn demo_pipeline(cfg: &Config, out: &Path) -> Result<DemoReport, CliError> {
    cfg.validate()?;
    std::fs::create_dir_all(out).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    let mut run = Run { out, stages: Vec::new() };

    // geometry
    let geom = match build_default_geometry(cfg.geometry.as_ref()).and_then(|g| validate_geometry(&g, DEFAULT_H_GRID).map(|v| (g, v))) {
        Ok((g, v)) => {
            write_json(&out.join("geometry.json"), &json!({ "validation": v, "scene": serde_json::from_str::<serde_json::Value>(&g.to_json()).expect("scene json") }))?;
            emit_plot(&geometry_plot(&g), &out.join("geometry"))?;
            let failed: Vec<&str> = v.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
            let summary = if failed.is_empty() {
                format!("{} checks pass", v.checks.len())
            } else {
                format!("failed checks: {}", failed.join(", "))
            };
            let arts = vec!["geometry.json".into(), "geometry.svg".into(), "geometry.csv".into()];
            if !run.push("geometry", v.overall, summary, arts) {
                return run.finish();
            }
            g
        }
        Err(e) => {
            run.fail("geometry", e);
            return run.finish();
        }
    };

    // Y sample
    let h = cfg.sampling.h;
    let y = match sample_set(&geom, SetLabel::Y, h) {
        Ok(y) => y,
        Err(e) => {
            run.fail("sampling", format!("Y at h = {h}: {e}"));
            return run.finish();
        }
    };
    write_atomic(&out.join("y_sample.csv"), y.to_csv().as_bytes())?;
    run.push("sampling", true, format!("Y at h = {h}: {} points", y.len()), vec!["y_sample.csv".into()]);

    // certificate suite
    match stolzenberg_suite(&geom, &cfg.suite_params()) {
        Ok(r) => {
            write_json(&out.join("suite.json"), &r)?;
            let parts: Vec<String> = r.groups.iter().map(|g| format!("{} {}/{}", g.name, g.passed, g.total)).collect();
            if !run.push("suite", r.pass, parts.join("; "), vec!["suite.json".into()]) {
                return run.finish();
            }
        }
        Err(e) => {
            run.fail("suite", e);
            return run.finish();
        }
    }

    // dynamics of the default attracting map
    let (g, p) = default_attracting_map();
    let caps = cfg.basin;
    let inr = &cfg.inradius;
    let dynamics = fixed_point_report(&g, &p).and_then(|fp| basin_inradius(&g, &p, &caps, inr.directions, inr.r_max, inr.steps, cfg.seed).map(|r| (fp, r)));
    let inradius = match dynamics {
        Ok((fp, r)) => {
            write_json(&out.join("dynamics.json"), &json!({ "map": g, "fixedPoint": p, "report": fp, "inradius": r }))?;
            let pass = fp.residual == 0.0 && fp.spectral_radius < 1.0 && r > 0.0;
            let summary = format!("residual {:e}, spectral radius {:.6}, basin inradius {:.4}", fp.residual, fp.spectral_radius, r);
            if !run.push("dynamics", pass, summary, vec!["dynamics.json".into()]) {
                return run.finish();
            }
            r
        }
        Err(e) => {
            run.fail("dynamics", e);
            return run.finish();
        }
    };

    // shrink search
    let s = &cfg.search;
    let shrink_sample = match sample_set(&geom, SetLabel::Y, cfg.sampling.shrink_h) {
        Ok(x) => x,
        Err(e) => {
            run.fail("shrink", format!("Y at h = {}: {e}", cfg.sampling.shrink_h));
            return run.finish();
        }
    };
    let shrink = match shrink_search(&shrink_sample, &p, s.eps_target, &s.family, s.budget, s.seed) {
        Ok(r) => r,
        Err(e) => {
            run.fail("shrink", e);
            return run.finish();
        }
    };
    write_json(
        &out.join("shrink.json"),
        &json!({
            "psi": shrink.psi,
            "baseline": shrink.baseline,
            "radius": shrink.radius,
            "ratio": shrink.radius / shrink.baseline,
            "epsTarget": s.eps_target,
            "success": shrink.success,
            "evaluations": shrink.evaluations,
            "sampleH": cfg.sampling.shrink_h,
            "samplePoints": shrink_sample.len(),
        }),
    )?;
    emit_plot(&trace_plot(&shrink.radius_trace), &out.join("shrink_trace"))?;
    let ratio = shrink.radius / shrink.baseline;
    let summary = format!(
        "R {:.4} from baseline {:.4} (ratio {:.3}); eps target {} {}",
        shrink.radius,
        shrink.baseline,
        ratio,
        s.eps_target,
        if shrink.success { "reached" } else { "not reached" }
    );
    let arts = vec!["shrink.json".into(), "shrink_trace.svg".into(), "shrink_trace.csv".into()];
    if !run.push("shrink", ratio <= 0.5, summary, arts) {
        return run.finish();
    }

    // membership of the shrink sample in psi^-1(basin)
    let verdicts: Vec<Result<BasinVerdict, AutomError>> =
        shrink_sample.points.par_iter().map(|q| omega_membership(&shrink.psi, &g, &p, q, &caps)).collect();
    let mut tally = [0usize; 4];
    for v in &verdicts {
        let i = match v {
            Ok(BasinVerdict::Converged(_)) => 0,
            Ok(BasinVerdict::Escaped(_)) => 1,
            Ok(BasinVerdict::Undecided(_)) => 2,
            Err(_) => 3,
        };
        tally[i] += 1;
    }
    let origin = omega_membership(&shrink.psi, &g, &p, &ComplexPoint::default(), &caps);
    let origin_rejected = matches!(origin, Err(AutomError::Domain(_)));
    let covered = shrink.radius < inradius;
    write_json(
        &out.join("omega.json"),
        &json!({
            "converged": tally[0],
            "escaped": tally[1],
            "undecided": tally[2],
            "domainErrors": tally[3],
            "radius": shrink.radius,
            "inradius": inradius,
            "radiusBelowInradius": covered,
            "originRejected": origin_rejected,
        }),
    )?;
    let all_in = tally[0] == shrink_sample.len();
    let summary = format!(
        "{}/{} sample points converge ({} escape, {} undecided); R {} inradius; origin {}",
        tally[0],
        shrink_sample.len(),
        tally[1],
        tally[2],
        if covered { "<" } else { ">=" },
        if origin_rejected { "rejected (not in C* x C)" } else { "accepted" }
    );
    if !run.push("omega", origin_rejected && tally[3] == 0 && (all_in || !covered), summary, vec!["omega.json".into()]) {
        return run.finish();
    }

    // slice topology of Omega on fixed-z lines
    let sl = &cfg.slice;
    let mut arts = Vec::new();
    let mut parts = Vec::new();
    let mut pass = true;
    for (k, z) in sl.lines.iter().enumerate() {
        let line = SliceLine::FixedZ(C64::new(z[0], z[1]));
        let oracle = |q: &ComplexPoint| omega_cell(&shrink.psi, &g, &p, &caps, q);
        let (report, cells) = slice_topology(oracle, line, sl.window, sl.n)?;
        arts.extend(write_slice(out, &format!("slice_{k}"), &report, &cells)?);
        pass &= report.hole_free() && report.components > 0;
        parts.push(format!(
            "z = {}{:+}i: {} components, holes {:?}, {} undecided",
            z[0], z[1], report.components, report.holes_per_component, report.undecided
        ));
    }
    run.push("slices", pass, parts.join("; "), arts);
    run.finish()
}
