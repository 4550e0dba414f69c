//! Connected components and holes of a membership oracle restricted to a
//! complex line, counted on a square grid.

use hullab_core::{ComplexPoint, C64};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::CliError;

pub const MAX_SLICE_N: usize = 512;

/// A complex line in `C^2` with a coordinate `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum SliceLine {
    /// `{(z0, c)}`.
    FixedZ(C64),
    /// `{(c, w0)}`.
    FixedW(C64),
    /// `{base + c dir}`.
    Affine { base: ComplexPoint, dir: ComplexPoint },
}

impl SliceLine {
    pub fn point(&self, c: C64) -> ComplexPoint {
        match *self {
            SliceLine::FixedZ(z) => ComplexPoint::new(z, c),
            SliceLine::FixedW(w) => ComplexPoint::new(c, w),
            SliceLine::Affine { base, dir } => base + dir * c,
        }
    }
}

/// Oracle answer for one cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CellState {
    Inside,
    Outside,
    /// Counted as outside.
    Undecided,
    /// The oracle refused the point; counted as outside.
    DomainError,
}

impl CellState {
    fn inside(self) -> bool {
        self == CellState::Inside
    }

    /// Heatmap category.
    pub fn code(self) -> usize {
        match self {
            CellState::Outside => 0,
            CellState::Inside => 1,
            CellState::Undecided => 2,
            CellState::DomainError => 3,
        }
    }

    pub const LEGEND: [&'static str; 4] = ["outside", "inside", "undecided", "domain error"];
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TopologyReport {
    pub line: SliceLine,
    pub window: [f64; 4],
    pub n: usize,
    pub components: usize,
    /// Holes of each inside component, in scan order of their first cell.
    pub holes_per_component: Vec<usize>,
    pub inside_cells: usize,
    /// Undecided cells, treated as outside.
    pub undecided: usize,
    /// Cells the oracle rejected, treated as outside.
    pub domain_errors: usize,
    /// Bounded outside components touching more than one inside component.
    pub shared_bounded_gaps: usize,
}

impl TopologyReport {
    pub fn hole_free(&self) -> bool {
        self.holes_per_component.iter().all(|&h| h == 0)
    }
}

/// Node `(ix, iy)` of the window, row `iy` major.
pub fn grid_coordinate(window: &[f64; 4], n: usize, ix: usize, iy: usize) -> C64 {
    let [x0, x1, y0, y1] = *window;
    let d = (n.max(2) - 1) as f64;
    C64::new(x0 + (x1 - x0) * ix as f64 / d, y0 + (y1 - y0) * iy as f64 / d)
}

/// 4-connected labelling of the cells where `keep` holds; `usize::MAX` elsewhere.
fn label(n: usize, keep: &dyn Fn(usize) -> bool) -> (Vec<usize>, usize) {
    let mut lab = vec![usize::MAX; n * n];
    let mut count = 0;
    let mut stack = Vec::new();
    for start in 0..n * n {
        if lab[start] != usize::MAX || !keep(start) {
            continue;
        }
        lab[start] = count;
        stack.push(start);
        while let Some(c) = stack.pop() {
            let (ix, iy) = (c % n, c / n);
            let mut visit = |nb: usize| {
                if lab[nb] == usize::MAX && keep(nb) {
                    lab[nb] = count;
                    stack.push(nb);
                }
            };
            if ix > 0 {
                visit(c - 1);
            }
            if ix + 1 < n {
                visit(c + 1);
            }
            if iy > 0 {
                visit(c - n);
            }
            if iy + 1 < n {
                visit(c + n);
            }
        }
        count += 1;
    }
    (lab, count)
}

/// Components and holes of a precomputed cell grid.
pub fn topology_of_cells(cells: &[CellState], n: usize) -> (usize, Vec<usize>, usize) {
    let (inside, ncomp) = label(n, &|c| cells[c].inside());
    let (outside, nout) = label(n, &|c| !cells[c].inside());
    let mut touches_border = vec![false; nout];
    let mut neighbours: Vec<Vec<usize>> = vec![Vec::new(); nout];
    for c in 0..n * n {
        let o = outside[c];
        if o == usize::MAX {
            continue;
        }
        let (ix, iy) = (c % n, c / n);
        if ix == 0 || iy == 0 || ix + 1 == n || iy + 1 == n {
            touches_border[o] = true;
        }
        let mut nbs = Vec::with_capacity(4);
        if ix > 0 {
            nbs.push(c - 1);
        }
        if ix + 1 < n {
            nbs.push(c + 1);
        }
        if iy > 0 {
            nbs.push(c - n);
        }
        if iy + 1 < n {
            nbs.push(c + n);
        }
        for nb in nbs {
            let i = inside[nb];
            if i != usize::MAX && !neighbours[o].contains(&i) {
                neighbours[o].push(i);
            }
        }
    }
    let mut holes = vec![0; ncomp];
    let mut shared = 0;
    for o in 0..nout {
        if touches_border[o] {
            continue;
        }
        match neighbours[o].as_slice() {
            [i] => holes[*i] += 1,
            _ => shared += 1,
        }
    }
    (ncomp, holes, shared)
}

/// Evaluates `oracle` on an `n x n` grid of the window in the line coordinate
/// and counts inside components and their holes.
pub fn slice_topology<F>(oracle: F, line: SliceLine, window: [f64; 4], n: usize) -> Result<(TopologyReport, Vec<CellState>), CliError>
where
    F: Fn(&ComplexPoint) -> CellState + Sync,
{
    if n == 0 || n > MAX_SLICE_N {
        return Err(CliError::Usage(format!("slice grid must have 1..={MAX_SLICE_N} nodes per side, got {n}")));
    }
    let [x0, x1, y0, y1] = window;
    if !(x0 < x1 && y0 < y1) || window.iter().any(|v| !v.is_finite()) {
        return Err(CliError::Usage(format!("window must satisfy x0 < x1 and y0 < y1, got {window:?}")));
    }
    let cells: Vec<CellState> = (0..n * n)
        .into_par_iter()
        .map(|c| oracle(&line.point(grid_coordinate(&window, n, c % n, c / n))))
        .collect();
    let (components, holes_per_component, shared_bounded_gaps) = topology_of_cells(&cells, n);
    let report = TopologyReport {
        line,
        window,
        n,
        components,
        holes_per_component,
        inside_cells: cells.iter().filter(|c| c.inside()).count(),
        undecided: cells.iter().filter(|&&c| c == CellState::Undecided).count(),
        domain_errors: cells.iter().filter(|&&c| c == CellState::DomainError).count(),
        shared_bounded_gaps,
    };
    Ok((report, cells))
}
