//! Argument parsing and subcommand dispatch.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hullab_core::autom::{
    basin_membership, default_attracting_map, fixed_point_report, shrink_search, AutomorphismChain, BasinVerdict,
};
use hullab_core::geometry::{build_default_geometry, sample_set, validate_geometry, SceneGeometry, SetLabel, SetSample, DEFAULT_H_GRID};
use hullab_core::hull::{
    hull_scan_with, inner_certificate, outer_certificate, refine_outer, verify_inner, HullMode, InnerOutcome, ScanGrid,
    ScanVerdict, SliceFixed,
};
use hullab_core::polybasis::{make_basis, BasisMode};
use hullab_core::{ComplexPoint, C64};
use serde_json::json;

use crate::config::{load_config, Config};
use crate::demo::{cell_plot, demo_pipeline, geometry_plot, omega_cell, trace_plot, write_slice};
use crate::error::CliError;
use crate::plot::{emit_plot, write_atomic, write_json};
use crate::topology::{grid_coordinate, slice_topology, SliceLine, MAX_SLICE_N};

/// Random polynomials used to re-check an inner certificate.
const VERIFY_TRIALS: usize = 500;
const DEFAULT_SCAN_GRID: usize = 32;
const DEFAULT_SCAN_WINDOW: [f64; 4] = [-2.0, 2.0, -2.0, 2.0];

#[derive(Debug, Parser)]
#[command(name = "hullab", version, about = "Hull certificates and basin dynamics for a Stolzenberg-type set in C* x C")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// JSON configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory for artifacts.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Sample spacing.
    #[arg(long, global = true)]
    pub h: Option<f64>,
    /// Polynomial degree, or the ladder degree in Laurent mode.
    #[arg(long, global = true)]
    pub degree: Option<u32>,
    /// Laurent degrees dNeg,dPos,dW.
    #[arg(long, global = true, value_parser = parse_laurent)]
    pub laurent: Option<LaurentDegrees>,
    /// re_z,im_z,re_w,im_w.
    #[arg(long, global = true, value_parser = parse_point, allow_hyphen_values = true)]
    pub point: Option<PointArg>,
    #[arg(long, global = true, value_parser = parse_set)]
    pub set: Option<SetLabel>,
    /// poly or laurent.
    #[arg(long, global = true, value_parser = parse_mode)]
    pub mode: Option<HullMode>,
    /// Nodes per side of a scan or slice grid.
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// x0,x1,y0,y1 in the free coordinate.
    #[arg(long, global = true, value_parser = parse_window, allow_hyphen_values = true)]
    pub window: Option<Window>,
    /// Objective evaluations of the shrink search.
    #[arg(long, global = true)]
    pub budget: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Scene geometry.
    Geom {
        #[command(subcommand)]
        action: GeomAction,
    },
    /// Writes a set sample as CSV.
    Sample,
    /// Searches for a hull certificate.
    Certify {
        #[command(subcommand)]
        action: CertifyAction,
    },
    /// Classifies a grid of a complex line at one degree.
    Scan {
        /// The coordinate that varies; the other is taken from --point.
        #[arg(long, value_enum, default_value_t = Free::W)]
        vary: Free,
    },
    /// Basin membership for the default attracting map.
    Basin,
    /// Searches for an automorphism squeezing a sample towards the fixed point.
    Shrink,
    /// Components and holes of the pulled-back basin on the line z = const.
    Slice {
        /// Chain JSON for psi; the identity when absent.
        #[arg(long)]
        psi: Option<PathBuf>,
    },
    /// Runs the full pipeline.
    Demo,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum GeomAction {
    Validate,
    Plot,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum CertifyAction {
    /// Representing measure (membership).
    Inner,
    /// Separating function (non-membership).
    Outer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Free {
    Z,
    W,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaurentDegrees(pub u32, pub u32, pub u32);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointArg(pub ComplexPoint);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window(pub [f64; 4]);

fn reals<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| f64::from_str(t.trim()).map_err(|e| format!("'{t}': {e}")))
        .collect::<Result<_, _>>()?;
    let arr: [f64; N] = v.try_into().map_err(|v: Vec<f64>| format!("expected {N} comma-separated numbers, got {}", v.len()))?;
    if arr.iter().any(|x| !x.is_finite()) {
        return Err("values must be finite".into());
    }
    Ok(arr)
}

fn parse_point(s: &str) -> Result<PointArg, String> {
    let [a, b, c, d] = reals::<4>(s)?;
    Ok(PointArg(ComplexPoint::from_reals(a, b, c, d)))
}

fn parse_window(s: &str) -> Result<Window, String> {
    let w = reals::<4>(s)?;
    if !(w[0] < w[1] && w[2] < w[3]) {
        return Err("window needs x0 < x1 and y0 < y1".into());
    }
    Ok(Window(w))
}

fn parse_laurent(s: &str) -> Result<LaurentDegrees, String> {
    let v: Vec<u32> = s.split(',').map(|t| t.trim().parse::<u32>().map_err(|e| format!("'{t}': {e}"))).collect::<Result<_, _>>()?;
    match v.as_slice() {
        [a, b, c] => Ok(LaurentDegrees(*a, *b, *c)),
        _ => Err(format!("expected dNeg,dPos,dW, got {} numbers", v.len())),
    }
}

fn parse_set(s: &str) -> Result<SetLabel, String> {
    s.parse().map_err(|e: hullab_core::geometry::GeometryError| e.to_string())
}

fn parse_mode(s: &str) -> Result<HullMode, String> {
    s.parse().map_err(|e: hullab_core::hull::HullError| e.to_string())
}

/// Everything a subcommand needs: configuration with flags applied.
struct Ctx {
    cfg: Config,
    args: GlobalArgs,
    out: PathBuf,
}

impl Ctx {
    fn new(args: GlobalArgs) -> Result<Self, CliError> {
        let mut cfg = match &args.config {
            Some(p) => load_config(p)?,
            None => Config::default(),
        };
        if let Some(s) = args.seed {
            cfg.seed = s;
            cfg.search.seed = s;
        }
        if let Some(b) = args.budget {
            cfg.search.budget = b;
        }
        if let Some(o) = &args.out {
            cfg.output.dir = o.clone();
        }
        cfg.validate()?;
        let out = cfg.output.dir.clone();
        Ok(Ctx { cfg, args, out })
    }

    fn geometry(&self) -> Result<SceneGeometry, CliError> {
        Ok(build_default_geometry(self.cfg.geometry.as_ref())?)
    }

    fn h(&self, default: f64) -> Result<f64, CliError> {
        match self.args.h {
            Some(h) if !(h.is_finite() && h > 0.0) => Err(CliError::Usage(format!("--h must be positive, got {h}"))),
            Some(h) => Ok(h),
            None => Ok(default),
        }
    }

    fn sample(&self, geom: &SceneGeometry, default_set: SetLabel, default_h: f64) -> Result<SetSample, CliError> {
        let label = self.args.set.unwrap_or(default_set);
        Ok(sample_set(geom, label, self.h(default_h)?)?)
    }

    fn point(&self) -> Result<ComplexPoint, CliError> {
        self.args.point.map(|p| p.0).ok_or_else(|| CliError::Usage("--point re_z,im_z,re_w,im_w is required".into()))
    }

    fn mode(&self) -> HullMode {
        self.args.mode.unwrap_or(HullMode::Polynomial)
    }

    /// Basis from `--laurent`, else `--degree` in the chosen mode.
    fn basis_mode(&self) -> BasisMode {
        match (self.args.laurent, self.args.degree) {
            (Some(LaurentDegrees(a, b, c)), _) => BasisMode::Laurent(a, b, c),
            (None, d) => self.mode().basis_mode(d.unwrap_or(self.cfg.degrees.inner_degree)),
        }
    }

    fn grid(&self, default: usize) -> Result<usize, CliError> {
        let n = self.args.grid.unwrap_or(default);
        if n == 0 || n > MAX_SLICE_N {
            return Err(CliError::Usage(format!("--grid must lie in 1..={MAX_SLICE_N}, got {n}")));
        }
        Ok(n)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

fn mode_json(m: &BasisMode) -> serde_json::Value {
    json!({ "mode": m.name(), "degrees": m.degrees() })
}

fn geom_validate(ctx: &Ctx) -> Result<(), CliError> {
    let geom = ctx.geometry()?;
    let report = validate_geometry(&geom, DEFAULT_H_GRID)?;
    println!("{report}");
    write_json(&ctx.path("geom_validate.json"), &report)?;
    if report.overall {
        Ok(())
    } else {
        Err(CliError::Negative("geometry validation failed".into()))
    }
}

fn geom_plot(ctx: &Ctx) -> Result<(), CliError> {
    let geom = ctx.geometry()?;
    for p in emit_plot(&geometry_plot(&geom), &ctx.path("geometry"))? {
        println!("wrote {}", p.display());
    }
    write_atomic(&ctx.path("scene.json"), format!("{}\n", geom.to_json()).as_bytes())?;
    Ok(())
}

fn sample(ctx: &Ctx) -> Result<(), CliError> {
    let geom = ctx.geometry()?;
    let s = ctx.sample(&geom, SetLabel::Y, ctx.cfg.sampling.h)?;
    let path = ctx.path(&format!("sample_{}.csv", s.id.label));
    write_atomic(&path, s.to_csv().as_bytes())?;
    println!("{} at h = {}: {} points, total weight {:.6} -> {}", s.id.label, s.id.h(), s.len(), s.total_weight(), path.display());
    Ok(())
}

fn certify_inner(ctx: &Ctx) -> Result<(), CliError> {
    let q = ctx.point()?;
    let geom = ctx.geometry()?;
    let s = ctx.sample(&geom, SetLabel::Y, ctx.cfg.sampling.h)?;
    let bm = ctx.basis_mode();
    let basis = make_basis(bm, Some(&s))?;
    let path = ctx.path("certify_inner.json");
    match inner_certificate(&q, &s, &basis, ctx.cfg.lp.feas_tol)? {
        InnerOutcome::Feasible(cert) => {
            let report = verify_inner(&cert, &s, VERIFY_TRIALS, ctx.cfg.seed)?;
            let ok = report.ok && cert.residual <= ctx.cfg.lp.residual_tol;
            write_json(
                &path,
                &json!({ "status": if ok { "certified" } else { "unverified" }, "set": s.id.label, "certificate": cert.to_json_value(), "verification": report }),
            )?;
            println!(
                "inner {}: {} weights, residual {:.3e}, {} violations in {} trials -> {}",
                if ok { "certified" } else { "UNVERIFIED" },
                cert.weights.len(),
                cert.residual,
                report.violations,
                report.trials,
                path.display()
            );
            if ok {
                Ok(())
            } else {
                Err(CliError::Negative("inner certificate failed verification".into()))
            }
        }
        InnerOutcome::Infeasible(w) => {
            write_json(
                &path,
                &json!({
                    "status": "infeasible",
                    "set": s.id.label,
                    "point": q,
                    "basis": mode_json(&bm),
                    "witness": { "poly": w.poly.to_json_value(), "reAtQ": w.re_at_q, "maxReOnSample": w.max_re_on_sample },
                }),
            )?;
            println!("no representing measure at {}: Re P(q) = {:.6} > max Re P = {:.6}", bm.name(), w.re_at_q, w.max_re_on_sample);
            Err(CliError::Negative("inner certificate not found".into()))
        }
    }
}

fn certify_outer(ctx: &Ctx) -> Result<(), CliError> {
    let q = ctx.point()?;
    let geom = ctx.geometry()?;
    let s = ctx.sample(&geom, SetLabel::Y, ctx.cfg.sampling.h)?;
    let bm = ctx.basis_mode();
    let basis = make_basis(bm, Some(&s))?;
    let path = ctx.path("certify_outer.json");
    match outer_certificate(&q, &s, &basis, ctx.cfg.lp.m_gon, ctx.cfg.lp.min_margin)? {
        Some(mut cert) => {
            let refined = sample_set(&geom, s.id.label, s.id.h() / 4.0)?;
            let report = refine_outer(&mut cert, &refined)?;
            write_json(&path, &json!({ "status": "separated", "set": s.id.label, "certificate": cert.to_json_value(), "refinement": report }))?;
            println!(
                "separated: margin {:.6}, refined margin {:.6} (retained {:.3}) -> {}",
                cert.margin,
                report.refined_margin,
                report.retained,
                path.display()
            );
            Ok(())
        }
        None => {
            write_json(&path, &json!({ "status": "notFound", "set": s.id.label, "point": q, "basis": mode_json(&bm) }))?;
            println!("no separating function at {}", bm.name());
            Err(CliError::Negative("outer certificate not found".into()))
        }
    }
}

fn scan(ctx: &Ctx, vary: Free) -> Result<(), CliError> {
    let fixed_point = ctx.args.point.map(|p| p.0).unwrap_or_default();
    let fixed = match vary {
        Free::W => SliceFixed::Z(fixed_point.z),
        Free::Z => SliceFixed::W(fixed_point.w),
    };
    let geom = ctx.geometry()?;
    let s = ctx.sample(&geom, SetLabel::Y, ctx.cfg.sampling.h)?;
    let n = ctx.grid(DEFAULT_SCAN_GRID)?;
    let window = ctx.args.window.map(|w| w.0).unwrap_or(DEFAULT_SCAN_WINDOW);
    let grid = ScanGrid { fixed, window, n };
    let bm = ctx.basis_mode();
    let rows = hull_scan_with(&grid, &s, bm, &ctx.cfg.lp)?;
    let code = |v: ScanVerdict| match v {
        ScanVerdict::Out => 0,
        ScanVerdict::In => 1,
        ScanVerdict::Ambiguous => 2,
    };
    let cells: Vec<usize> = rows.iter().flatten().map(|&v| code(v)).collect();
    let count = |c: usize| cells.iter().filter(|&&x| x == c).count();
    let axis = match vary {
        Free::W => ("Re w", "Im w"),
        Free::Z => ("Re z", "Im z"),
    };
    let caption = format!("{} hull of {} at {}", bm.name(), s.id.label, bm.degrees().iter().map(|d| d.to_string()).collect::<Vec<_>>().join(","));
    emit_plot(&cell_plot(&cells, &window, n, &["out", "in", "ambiguous"], caption, axis), &ctx.path("scan"))?;
    write_json(
        &ctx.path("scan.json"),
        &json!({ "grid": grid, "basis": mode_json(&bm), "set": s.id.label, "in": count(1), "out": count(0), "ambiguous": count(2) }),
    )?;
    println!("scan {n}x{n}: {} in, {} out, {} ambiguous -> {}", count(1), count(0), count(2), ctx.path("scan.svg").display());
    Ok(())
}

fn basin(ctx: &Ctx) -> Result<(), CliError> {
    let q = ctx.point()?;
    let (g, p) = default_attracting_map();
    let caps = ctx.cfg.basin;
    let fp = fixed_point_report(&g, &p)?;
    let verdict = basin_membership(&g, &p, &q, &caps)?;
    let (name, steps) = verdict.parts();
    let mut doc = json!({ "point": q, "fixedPoint": p, "report": fp, "verdict": name, "steps": steps });
    if let Some(n) = ctx.args.grid {
        let n = ctx.grid(n)?;
        let window = ctx.args.window.map(|w| w.0).unwrap_or(DEFAULT_SCAN_WINDOW);
        let verdicts: Vec<(C64, BasinVerdict)> = (0..n * n)
            .map(|c| {
                let w = grid_coordinate(&window, n, c % n, c / n);
                basin_membership(&g, &p, &ComplexPoint::new(q.z, w), &caps).map(|v| (w, v))
            })
            .collect::<Result<_, _>>()?;
        let mut csv = String::from("re,im,verdict,steps\n");
        for (w, v) in &verdicts {
            let (name, steps) = v.parts();
            csv.push_str(&format!("{},{},{},{}\n", w.re, w.im, name, steps));
        }
        write_atomic(&ctx.path("basin_scan.csv"), csv.as_bytes())?;
        let codes: Vec<usize> = verdicts
            .iter()
            .map(|(_, v)| match v {
                BasinVerdict::Escaped(_) => 0,
                BasinVerdict::Converged(_) => 1,
                BasinVerdict::Undecided(_) => 2,
            })
            .collect();
        let caption = format!("basin slice at z = {}", q.z);
        emit_plot(&cell_plot(&codes, &window, n, &["escaped", "converged", "undecided"], caption, ("Re w", "Im w")), &ctx.path("basin_map"))?;
        doc["scan"] = json!({ "n": n, "window": window, "converged": codes.iter().filter(|&&c| c == 1).count() });
    }
    write_json(&ctx.path("basin.json"), &doc)?;
    println!("{q}: {name} ({steps} steps); spectral radius at p {:.6}", fp.spectral_radius);
    if verdict.is_converged() {
        Ok(())
    } else {
        Err(CliError::Negative(format!("{q} is not certified in the basin: {name}")))
    }
}

fn shrink(ctx: &Ctx) -> Result<(), CliError> {
    let geom = ctx.geometry()?;
    let s = ctx.sample(&geom, SetLabel::Y, ctx.cfg.sampling.shrink_h)?;
    let (_, p) = default_attracting_map();
    let sc = &ctx.cfg.search;
    let r = shrink_search(&s, &p, sc.eps_target, &sc.family, sc.budget, sc.seed)?;
    write_json(
        &ctx.path("shrink.json"),
        &json!({
            "psi": r.psi,
            "baseline": r.baseline,
            "radius": r.radius,
            "ratio": r.radius / r.baseline,
            "epsTarget": sc.eps_target,
            "success": r.success,
            "evaluations": r.evaluations,
            "seed": sc.seed,
        }),
    )?;
    emit_plot(&trace_plot(&r.radius_trace), &ctx.path("shrink_trace"))?;
    println!(
        "R(psi) = {:.6} from R(identity) = {:.6} (ratio {:.4}) after {} evaluations; eps {} {}",
        r.radius,
        r.baseline,
        r.radius / r.baseline,
        r.evaluations,
        sc.eps_target,
        if r.success { "reached" } else { "not reached" }
    );
    Ok(())
}

fn slice(ctx: &Ctx, psi_path: Option<&Path>) -> Result<(), CliError> {
    let psi = match psi_path {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            // Accept a bare chain or a shrink report carrying one.
            let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            let chain = v.get("psi").cloned().unwrap_or(v);
            AutomorphismChain::from_json(&chain.to_string())?
        }
        None => AutomorphismChain::identity(),
    };
    let z = ctx.args.point.map(|p| p.0.z).unwrap_or_else(|| {
        let [re, im] = ctx.cfg.slice.lines[0];
        C64::new(re, im)
    });
    let n = ctx.grid(ctx.cfg.slice.n)?;
    let window = ctx.args.window.map(|w| w.0).unwrap_or(ctx.cfg.slice.window);
    let (g, p) = default_attracting_map();
    let caps = ctx.cfg.basin;
    let (report, cells) = slice_topology(|q| omega_cell(&psi, &g, &p, &caps, q), SliceLine::FixedZ(z), window, n)?;
    write_slice(&ctx.out, "slice", &report, &cells)?;
    println!(
        "z = {z}: {} components, holes {:?}; {} undecided and {} rejected cells counted as outside",
        report.components, report.holes_per_component, report.undecided, report.domain_errors
    );
    if report.hole_free() {
        Ok(())
    } else {
        Err(CliError::Negative("a component of the slice has a hole".into()))
    }
}

fn demo(ctx: &Ctx) -> Result<(), CliError> {
    let mut cfg = ctx.cfg.clone();
    if let Some(h) = ctx.args.h {
        cfg.sampling.h = h;
    }
    cfg.validate()?;
    let report = demo_pipeline(&cfg, &ctx.out)?;
    println!("{report}");
    if report.pass {
        Ok(())
    } else {
        Err(CliError::Negative(format!("demo stopped at stage {}", report.aborted_at.as_deref().unwrap_or("?"))))
    }
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("HULLAB_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| CliError::Usage(format!("HULLAB_THREADS must be a positive integer, got '{v}'")))?;
        if n == 0 {
            return Err(CliError::Usage("HULLAB_THREADS must be at least 1".into()));
        }
        // A pool built earlier in the same process stays in place.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Runs one parsed command.
pub fn execute(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let ctx = Ctx::new(cli.global)?;
    match cli.command {
        Command::Geom { action: GeomAction::Validate } => geom_validate(&ctx),
        Command::Geom { action: GeomAction::Plot } => geom_plot(&ctx),
        Command::Sample => sample(&ctx),
        Command::Certify { action: CertifyAction::Inner } => certify_inner(&ctx),
        Command::Certify { action: CertifyAction::Outer } => certify_outer(&ctx),
        Command::Scan { vary } => scan(&ctx, vary),
        Command::Basin => basin(&ctx),
        Command::Shrink => shrink(&ctx),
        Command::Slice { psi } => slice(&ctx, psi.as_deref()),
        Command::Demo => demo(&ctx),
    }
}

/// Parses `argv` (program name first), runs it and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = argv.into_iter().map(Into::into).collect();
    if argv.is_empty() {
        eprintln!("usage: hullab <COMMAND>");
        return 2;
    }
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
