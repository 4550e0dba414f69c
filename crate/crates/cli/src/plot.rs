//! Plot documents rendered to SVG, always with a CSV of the data table.
//!
//! Output carries no timestamps and numbers are printed with fixed
//! precision, so equal documents give equal bytes.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum PlotKind {
    /// Columns `x, y, series`; `series` indexes `legend`.
    PointCloud,
    /// Columns `x, y, value` on a regular grid; `value` indexes `legend`.
    Heatmap,
    /// Columns `x, y`, drawn as one polyline in row order.
    TraceLine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PlotDoc {
    pub kind: PlotKind,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub x_label: String,
    pub y_label: String,
    pub caption: String,
    /// Names of the series or heatmap categories.
    pub legend: Vec<String>,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 56.0;
const LEGEND_W: f64 = 120.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];

impl PlotDoc {
    pub fn validate(&self) -> Result<(), CliError> {
        let need = match self.kind {
            PlotKind::PointCloud | PlotKind::Heatmap => 3,
            PlotKind::TraceLine => 2,
        };
        if self.columns.len() != need {
            return Err(CliError::Usage(format!("{:?} plot needs {need} columns, got {}", self.kind, self.columns.len())));
        }
        if self.rows.is_empty() {
            return Err(CliError::Usage(format!("plot '{}' has no data", self.caption)));
        }
        for (i, r) in self.rows.iter().enumerate() {
            if r.len() != need {
                return Err(CliError::Usage(format!("row {i} has {} entries, expected {need}", r.len())));
            }
            if r.iter().any(|v| !v.is_finite()) {
                return Err(CliError::Usage(format!("row {i} has a non-finite entry")));
            }
        }
        if self.kind != PlotKind::TraceLine {
            for r in &self.rows {
                let c = r[2];
                if c < 0.0 || c.fract() != 0.0 || c as usize >= self.legend.len().max(1) {
                    return Err(CliError::Usage(format!("category {c} has no legend entry")));
                }
            }
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|v| v.to_string()).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    fn bounds(&self) -> [f64; 4] {
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for r in &self.rows {
            x0 = x0.min(r[0]);
            x1 = x1.max(r[0]);
            y0 = y0.min(r[1]);
            y1 = y1.max(r[1]);
        }
        let pad = |a: f64, b: f64| if b - a > 0.0 { (a, b) } else { (a - 0.5, b + 0.5) };
        let (x0, x1) = pad(x0, x1);
        let (y0, y1) = pad(y0, y1);
        [x0, x1, y0, y1]
    }

    pub fn to_svg(&self) -> String {
        let [x0, x1, y0, y1] = self.bounds();
        let plot_w = WIDTH - 2.0 * MARGIN - LEGEND_W;
        let plot_h = HEIGHT - 2.0 * MARGIN;
        let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * plot_w;
        let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * plot_h;
        let mut s = String::new();
        let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#);
        let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let _ = writeln!(s, r#"<text x="{:.2}" y="24" font-size="14" text-anchor="middle">{}</text>"#, WIDTH / 2.0, escape(&self.caption));
        match self.kind {
            PlotKind::PointCloud => {
                for r in &self.rows {
                    let _ = writeln!(
                        s,
                        r#"<circle cx="{:.2}" cy="{:.2}" r="1.5" fill="{}"/>"#,
                        sx(r[0]),
                        sy(r[1]),
                        PALETTE[r[2] as usize % PALETTE.len()]
                    );
                }
            }
            PlotKind::Heatmap => {
                let nx = distinct(self.rows.iter().map(|r| r[0]));
                let ny = distinct(self.rows.iter().map(|r| r[1]));
                let cw = plot_w / nx.len() as f64;
                let ch = plot_h / ny.len() as f64;
                for r in &self.rows {
                    let ix = nx.partition_point(|&v| v < r[0]);
                    let iy = ny.partition_point(|&v| v < r[1]);
                    let _ = writeln!(
                        s,
                        r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                        MARGIN + ix as f64 * cw,
                        HEIGHT - MARGIN - (iy + 1) as f64 * ch,
                        cw,
                        ch,
                        PALETTE[r[2] as usize % PALETTE.len()]
                    );
                }
            }
            PlotKind::TraceLine => {
                let pts: Vec<String> = self.rows.iter().map(|r| format!("{:.2},{:.2}", sx(r[0]), sy(r[1]))).collect();
                let _ = writeln!(s, r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#, PALETTE[0], pts.join(" "));
            }
        }
        let (bx, by) = (MARGIN, HEIGHT - MARGIN);
        let _ = writeln!(s, r#"<rect x="{bx:.2}" y="{MARGIN:.2}" width="{plot_w:.2}" height="{plot_h:.2}" fill="none" stroke="black"/>"#);
        let _ = writeln!(s, r#"<text x="{bx:.2}" y="{:.2}" font-size="11">{}</text>"#, by + 16.0, fmt_tick(x0));
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{}</text>"#, bx + plot_w, by + 16.0, fmt_tick(x1));
        let _ = writeln!(s, r#"<text x="{:.2}" y="{by:.2}" font-size="11" text-anchor="end">{}</text>"#, bx - 4.0, fmt_tick(y0));
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{}</text>"#, bx - 4.0, MARGIN + 10.0, fmt_tick(y1));
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle">{}</text>"#,
            bx + plot_w / 2.0,
            by + 32.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="16" y="{:.2}" font-size="12" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
            MARGIN + plot_h / 2.0,
            MARGIN + plot_h / 2.0,
            escape(&self.y_label)
        );
        let lx = WIDTH - LEGEND_W - MARGIN / 2.0;
        for (i, name) in self.legend.iter().enumerate() {
            let y = MARGIN + 18.0 * i as f64;
            let _ = writeln!(s, r#"<rect x="{lx:.2}" y="{y:.2}" width="10" height="10" fill="{}"/>"#, PALETTE[i % PALETTE.len()]);
            let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-size="11">{}</text>"#, lx + 14.0, y + 9.0, escape(name));
        }
        s.push_str("</svg>\n");
        s
    }
}

fn distinct(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

fn fmt_tick(v: f64) -> String {
    format!("{v:.3}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Writes `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents).map_err(io)?;
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        tmp.as_file().set_permissions(std::fs::Permissions::from_mode(0o644)).map_err(io)?;
    }
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// Pretty JSON with a trailing newline.
pub fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Failed(e.to_string()))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// Writes `<stem>.svg` and `<stem>.csv` and returns both paths.
pub fn emit_plot(doc: &PlotDoc, stem: &Path) -> Result<Vec<PathBuf>, CliError> {
    doc.validate()?;
    let svg = stem.with_extension("svg");
    let csv = stem.with_extension("csv");
    write_atomic(&svg, doc.to_svg().as_bytes())?;
    write_atomic(&csv, doc.to_csv().as_bytes())?;
    Ok(vec![svg, csv])
}
