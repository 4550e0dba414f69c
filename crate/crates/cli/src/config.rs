//! JSON run configuration. Absent keys take the documented defaults and
//! unknown keys are rejected with their path.

use std::path::{Path, PathBuf};

use hullab_core::autom::{BasinCaps, ShrinkFamily};
use hullab_core::geometry::GeometryOverrides;
use hullab_core::hull::{CertOptions, SuiteParams};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, rename_all = "camelCase")]
pub struct Config {
    /// Replacement control points; the built-in scene when absent.
    pub geometry: Option<GeometryOverrides>,
    pub sampling: Sampling,
    pub degrees: Degrees,
    pub lp: CertOptions,
    pub suite: SuiteOptions,
    pub basin: BasinCaps,
    pub inradius: Inradius,
    pub search: Search,
    pub slice: SliceOptions,
    /// Seed of the certificate suite and all probe batteries.
    pub seed: u64,
    pub output: Output,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            geometry: None,
            sampling: Sampling::default(),
            degrees: Degrees::default(),
            lp: CertOptions::default(),
            suite: SuiteOptions::default(),
            basin: BasinCaps::default(),
            inradius: Inradius::default(),
            search: Search::default(),
            slice: SliceOptions::default(),
            seed: 7,
            output: Output::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, rename_all = "camelCase")]
pub struct Sampling {
    /// Parameter spacing of the certificate samples.
    pub h: f64,
    /// Spacing of the sample handed to the shrink search.
    pub shrink_h: f64,
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling { h: 0.02, shrink_h: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, rename_all = "camelCase")]
pub struct Degrees {
    pub poly_ladder: Vec<u32>,
    pub laurent_ladder: Vec<u32>,
    pub inner_degree: u32,
    pub probe_ladder: Vec<u32>,
}

impl Default for Degrees {
    fn default() -> Self {
        let s = SuiteParams::default();
        Degrees {
            poly_ladder: s.poly_ladder,
            laurent_ladder: s.laurent_ladder,
            inner_degree: s.inner_degree,
            probe_ladder: s.probe_ladder,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, rename_all = "camelCase")]
pub struct SuiteOptions {
    pub probes_per_set: usize,
    pub vt_points: usize,
    pub probe_delta: f64,
    pub min_margin: f64,
    pub refine: bool,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        let s = SuiteParams::default();
        SuiteOptions {
            probes_per_set: s.probes_per_set,
            vt_points: s.vt_points,
            probe_delta: s.probe_delta,
            min_margin: s.min_margin,
            refine: s.refine,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, rename_all = "camelCase")]
pub struct Inradius {
    pub directions: usize,
    pub r_max: f64,
    pub steps: usize,
}

impl Default for Inradius {
    fn default() -> Self {
        Inradius { directions: 64, r_max: 2.0, steps: 40 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, rename_all = "camelCase")]
pub struct Search {
    pub budget: usize,
    pub seed: u64,
    pub eps_target: f64,
    pub family: ShrinkFamily,
}

impl Default for Search {
    fn default() -> Self {
        Search { budget: 20000, seed: 11, eps_target: 0.05, family: ShrinkFamily::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, rename_all = "camelCase")]
pub struct SliceOptions {
    /// Fixed `z` values `[re, im]` of the slice lines.
    pub lines: Vec<[f64; 2]>,
    /// `[x0, x1, y0, y1]` in the `w`-plane.
    pub window: [f64; 4],
    pub n: usize,
}

impl Default for SliceOptions {
    fn default() -> Self {
        SliceOptions { lines: vec![[0.9, 0.0], [1.1, 0.2]], window: [-3.0, 3.0, -3.0, 3.0], n: 128 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, rename_all = "camelCase")]
pub struct Output {
    pub dir: PathBuf,
}

impl Default for Output {
    fn default() -> Self {
        Output { dir: PathBuf::from("out") }
    }
}

impl Config {
    /// Suite parameters at the configured spacing, ladders and seed.
    pub fn suite_params(&self) -> SuiteParams {
        SuiteParams {
            h: self.sampling.h,
            poly_ladder: self.degrees.poly_ladder.clone(),
            laurent_ladder: self.degrees.laurent_ladder.clone(),
            inner_degree: self.degrees.inner_degree,
            probe_ladder: self.degrees.probe_ladder.clone(),
            probes_per_set: self.suite.probes_per_set,
            vt_points: self.suite.vt_points,
            probe_delta: self.suite.probe_delta,
            min_margin: self.suite.min_margin,
            refine: self.suite.refine,
            seed: self.seed,
            cert: self.lp,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let positive = [
            ("sampling.h", self.sampling.h),
            ("sampling.shrinkH", self.sampling.shrink_h),
            ("lp.feasTol", self.lp.feas_tol),
            ("lp.residualTol", self.lp.residual_tol),
            ("lp.minMargin", self.lp.min_margin),
            ("suite.probeDelta", self.suite.probe_delta),
            ("suite.minMargin", self.suite.min_margin),
            ("basin.convTol", self.basin.conv_tol),
            ("basin.zLo", self.basin.z_lo),
            ("basin.hi", self.basin.hi),
            ("inradius.rMax", self.inradius.r_max),
            ("search.epsTarget", self.search.eps_target),
        ];
        for (key, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(CliError::Usage(format!("{key} must be positive and finite, got {v}")));
            }
        }
        if self.basin.max_iter == 0 {
            return Err(CliError::Usage("basin.maxIter must be at least 1".into()));
        }
        if self.inradius.directions == 0 || self.inradius.steps == 0 {
            return Err(CliError::Usage("inradius.directions and inradius.steps must be at least 1".into()));
        }
        let [x0, x1, y0, y1] = self.slice.window;
        if !(x0 < x1 && y0 < y1) || self.slice.window.iter().any(|v| !v.is_finite()) {
            return Err(CliError::Usage(format!("slice.window must satisfy x0 < x1 and y0 < y1, got {:?}", self.slice.window)));
        }
        if self.slice.n == 0 || self.slice.n > crate::topology::MAX_SLICE_N {
            return Err(CliError::Usage(format!("slice.n must lie in 1..={}, got {}", crate::topology::MAX_SLICE_N, self.slice.n)));
        }
        self.search.family.validate()?;
        self.lp.validate()?;
        Ok(())
    }
}

/// Parses a configuration document; errors name the offending key path.
pub fn parse_config(text: &str) -> Result<Config, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: Config = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." {
            CliError::Usage(format!("config: {inner}"))
        } else {
            CliError::Usage(format!("config at {path}: {inner}"))
        }
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<Config, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_is_default() {
        assert_eq!(parse_config("{}").unwrap(), Config::default());
    }

    #[test]
    fn partial_section_keeps_other_defaults() {
        let c = parse_config(r#"{"sampling":{"h":0.05}}"#).unwrap();
        assert_eq!(c.sampling.h, 0.05);
        assert_eq!(c.sampling.shrink_h, 0.1);
        assert_eq!(c.search, Search::default());
    }

    #[test]
    fn unknown_key_is_named() {
        let e = parse_config(r#"{"typo_key":1}"#).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("typo_key"), "{e}");
    }

    #[test]
    fn nested_unknown_key_reports_path() {
        let e = parse_config(r#"{"basin":{"maxIters":3}}"#).unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("basin") && msg.contains("maxIters"), "{msg}");
    }

    #[test]
    fn nonpositive_tolerance_rejected() {
        let e = parse_config(r#"{"lp":{"feasTol":0}}"#).unwrap_err();
        assert!(e.to_string().contains("lp.feasTol"), "{e}");
    }

    #[test]
    fn negative_seed_rejected() {
        assert!(parse_config(r#"{"seed":-1}"#).is_err());
        assert_eq!(parse_config(r#"{"seed":18446744073709551615}"#).unwrap().seed, u64::MAX);
    }

    #[test]
    fn malformed_document() {
        assert_eq!(parse_config("{").unwrap_err().exit_code(), 2);
    }

    #[test]
    fn suite_params_follow_config() {
        let c = parse_config(r#"{"degrees":{"polyLadder":[0]},"seed":3}"#).unwrap();
        let p = c.suite_params();
        assert_eq!(p.poly_ladder, vec![0]);
        assert_eq!(p.seed, 3);
        assert_eq!(p.h, 0.02);
    }
}
