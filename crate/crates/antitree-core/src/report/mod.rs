//! Run configuration, orchestration and machine-readable outputs.
//!
//! A run is described by one JSON document ([`RunConfig`]). Each analysis
//! renders to a string first; files are then written one at a time with
//! [`format::write_atomic`]. Identical configs give byte-identical files.

pub mod format;

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::criteria::{classify, gap_constant, CriteriaError, DiagnosticsReport};
use crate::graph_oracle::{verify_decomposition, OracleError, OracleSolver};
use crate::model::{build_profile, AntitreeSpec, ModelError};
use crate::spectra::{decomposed_spectrum, lambda0_estimate, weyl_target, BoundaryCondition, SpectraError};

use format::{fmt_float, to_json, write_atomic, Csv};

pub const SCHEMA_VERSION: &str = "antitree-report/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Analysis {
    Classify,
    Spectrum,
    Verify,
    Weyl,
    Gap,
}

impl Analysis {
    pub const ALL: [Analysis; 5] = [
        Analysis::Classify,
        Analysis::Spectrum,
        Analysis::Verify,
        Analysis::Weyl,
        Analysis::Gap,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Analysis::Classify => "classify",
            Analysis::Spectrum => "spectrum",
            Analysis::Verify => "verify",
            Analysis::Weyl => "weyl",
            Analysis::Gap => "gap",
        }
    }
}

fn default_analyses() -> Vec<Analysis> {
    vec![Analysis::Classify]
}

/// Solver and tolerance settings. Every field may be omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Knobs {
    /// Largest element size of the reference mesh (`verify`). Default `0.005`.
    pub h: f64,
    /// Number of lowest eigenvalues compared by `verify`. Default `10`.
    pub k_max: usize,
    /// Spectral cutoff for `spectrum`. Default `100`.
    pub lambda_max: f64,
    /// Relative tolerance of `verify`, before the mesh allowance. Default `1e-3`.
    pub tol: f64,
    /// Condition at the outer end for `spectrum` and `weyl`. Default Dirichlet.
    pub boundary: BoundaryCondition,
    /// Reference solver for `verify`. Default `auto`.
    pub solver: OracleSolver,
    /// Spectral parameters at which `weyl` evaluates the counting function.
    /// Default `[1e1, 1e2, 1e3, 1e4]`.
    pub weyl_lambdas: Vec<f64>,
    /// `gap` tabulates depths `gap_min_depth..=depth`. Default `1`.
    pub gap_min_depth: usize,
}

impl Default for Knobs {
    fn default() -> Self {
        Knobs {
            h: 0.005,
            k_max: 10,
            lambda_max: 100.0,
            tol: 1e-3,
            boundary: BoundaryCondition::Dirichlet,
            solver: OracleSolver::Auto,
            weyl_lambdas: vec![1e1, 1e2, 1e3, 1e4],
            gap_min_depth: 1,
        }
    }
}

/// Output file names, relative to the output directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Outputs {
    pub classify: PathBuf,
    pub spectrum: PathBuf,
    pub verify: PathBuf,
    pub weyl: PathBuf,
    pub gap: PathBuf,
}

impl Default for Outputs {
    fn default() -> Self {
        Outputs {
            classify: "classify.json".into(),
            spectrum: "spectrum.csv".into(),
            verify: "verify.csv".into(),
            weyl: "weyl.csv".into(),
            gap: "gap.csv".into(),
        }
    }
}

impl Outputs {
    pub fn path(&self, a: Analysis) -> &Path {
        match a {
            Analysis::Classify => &self.classify,
            Analysis::Spectrum => &self.spectrum,
            Analysis::Verify => &self.verify,
            Analysis::Weyl => &self.weyl,
            Analysis::Gap => &self.gap,
        }
    }
}

/// One run. Unknown keys anywhere are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub spec: AntitreeSpec,
    /// Truncation depth `N`.
    pub depth: usize,
    /// Analyses performed by a full run. Default `["classify"]`.
    #[serde(default = "default_analyses")]
    pub analyses: Vec<Analysis>,
    #[serde(default)]
    pub knobs: Knobs,
    #[serde(default)]
    pub outputs: Outputs,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("{line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{0}")]
    Invalid(String),
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<RunConfig, ConfigError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
            line: e.line(),
            column: e.column(),
            message: strip_position(&e.to_string()),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        let k = &self.knobs;
        if self.depth == 0 {
            return bad("depth must be at least 1".into());
        }
        if !(k.h.is_finite() && k.h > 0.0) {
            return bad(format!("knobs.h must be positive, got {}", k.h));
        }
        if k.k_max == 0 {
            return bad("knobs.k_max must be at least 1".into());
        }
        if !(k.lambda_max.is_finite() && k.lambda_max > 0.0) {
            return bad(format!("knobs.lambda_max must be positive, got {}", k.lambda_max));
        }
        if !(k.tol.is_finite() && k.tol > 0.0) {
            return bad(format!("knobs.tol must be positive, got {}", k.tol));
        }
        if k.weyl_lambdas.is_empty() || k.weyl_lambdas.iter().any(|&x| !(x.is_finite() && x > 0.0)) {
            return bad("knobs.weyl_lambdas must be a nonempty list of positive numbers".into());
        }
        if k.gap_min_depth == 0 || k.gap_min_depth > self.depth {
            return bad(format!("knobs.gap_min_depth must lie in 1..={}", self.depth));
        }
        if let Err(e) = k.boundary.validate() {
            return bad(format!("knobs.boundary: {e}"));
        }
        let mut seen = Vec::new();
        for a in Analysis::ALL {
            let p = self.outputs.path(a);
            if p.as_os_str().is_empty() || p.is_absolute() {
                return bad(format!("outputs.{} must be a nonempty relative path", a.name()));
            }
            if seen.contains(&p) {
                return bad(format!("outputs.{} repeats another output path", a.name()));
            }
            seen.push(p);
        }
        Ok(())
    }
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Spectra(#[from] SpectraError),
    #[error(transparent)]
    Criteria(#[from] CriteriaError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),
}

impl ReportError {
    /// 3 for violated internal invariants, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            ReportError::Spectra(SpectraError::InternalConsistency(_))
            | ReportError::Oracle(OracleError::Spectra(SpectraError::InternalConsistency(_)))
            | ReportError::Criteria(CriteriaError::Implication(_))
            | ReportError::Json(_) => 3,
            _ => 1,
        }
    }
}

#[derive(Serialize)]
struct ClassifyDocument<'a> {
    schema_version: &'static str,
    config: &'a RunConfig,
    report: &'a DiagnosticsReport,
}

/// Output of one analysis, not yet written.
#[derive(Debug, Clone, PartialEq)]
pub struct Rendered {
    pub analysis: Analysis,
    pub text: String,
    /// `Some` for `verify` only.
    pub verify_pass: Option<bool>,
}

pub fn render(config: &RunConfig, analysis: Analysis) -> Result<Rendered, ReportError> {
    config.validate()?;
    let mut verify_pass = None;
    let text = match analysis {
        Analysis::Classify => render_classify(config)?,
        Analysis::Spectrum => render_spectrum(config)?,
        Analysis::Verify => {
            let (text, pass) = render_verify(config)?;
            verify_pass = Some(pass);
            text
        }
        Analysis::Weyl => render_weyl(config)?,
        Analysis::Gap => render_gap(config)?,
    };
    Ok(Rendered {
        analysis,
        text,
        verify_pass,
    })
}

fn render_classify(config: &RunConfig) -> Result<String, ReportError> {
    let report = classify(&config.spec, config.depth)?;
    Ok(to_json(&ClassifyDocument {
        schema_version: SCHEMA_VERSION,
        config,
        report: &report,
    })?)
}

fn generation_field(g: Option<usize>) -> String {
    g.map(|n| n.to_string()).unwrap_or_default()
}

fn render_spectrum(config: &RunConfig) -> Result<String, ReportError> {
    let profile = build_profile(&config.spec, config.depth)?;
    let spectrum = decomposed_spectrum(&profile, config.knobs.boundary, config.knobs.lambda_max)?;
    let mut csv = Csv::new(&["lambda", "multiplicity", "block", "generation"]);
    for e in &spectrum.entries {
        csv.row([
            fmt_float(e.lambda),
            e.multiplicity.to_string(),
            e.block.label().to_string(),
            generation_field(e.block.generation()),
        ]);
    }
    Ok(csv.as_str().to_string())
}

fn render_verify(config: &RunConfig) -> Result<(String, bool), ReportError> {
    let k = &config.knobs;
    let profile = build_profile(&config.spec, config.depth)?;
    let report = verify_decomposition(&profile, k.h, k.k_max, k.tol, k.solver)?;
    let mut csv = Csv::new(&[
        "index",
        "oracle",
        "decomposed",
        "block",
        "generation",
        "rel_error",
        "allowed",
        "cluster_size",
        "oracle_cluster_size",
        "status",
    ]);
    for r in &report.rows {
        let cluster = report
            .clusters
            .iter()
            .find(|c| (c.lambda - r.decomposed).abs() <= k.tol * c.lambda)
            .expect("every row lies in a cluster");
        let ok = r.ok && cluster.ok;
        csv.row([
            r.index.to_string(),
            fmt_float(r.oracle),
            fmt_float(r.decomposed),
            r.block.label().to_string(),
            generation_field(r.block.generation()),
            fmt_float(r.rel_error),
            fmt_float(r.allowed),
            cluster.expected_size.to_string(),
            cluster.oracle_size.to_string(),
            if ok { "pass" } else { "fail" }.to_string(),
        ]);
    }
    Ok((csv.as_str().to_string(), report.pass))
}

fn render_weyl(config: &RunConfig) -> Result<String, ReportError> {
    let profile = build_profile(&config.spec, config.depth)?;
    let top = config.knobs.weyl_lambdas.iter().copied().fold(0.0, f64::max);
    let spectrum = decomposed_spectrum(&profile, config.knobs.boundary, top)?;
    let target = match weyl_target(&config.spec) {
        Ok(t) => fmt_float(t),
        Err(SpectraError::VolumeDiverges | SpectraError::NoClosedFormVolume) => String::new(),
        Err(e) => return Err(e.into()),
    };
    let mut csv = Csv::new(&["lambda", "N", "ratio", "target"]);
    for &lambda in &config.knobs.weyl_lambdas {
        let count = spectrum.counting_function(lambda)?;
        csv.row([
            fmt_float(lambda),
            count.to_string(),
            fmt_float(count as f64 / lambda.sqrt()),
            target.clone(),
        ]);
    }
    Ok(csv.as_str().to_string())
}

fn render_gap(config: &RunConfig) -> Result<String, ReportError> {
    let depths: Vec<usize> = (config.knobs.gap_min_depth..=config.depth).collect();
    let upper = lambda0_estimate(&config.spec, &depths)?;
    let brackets = depths
        .par_iter()
        .map(|&n| Ok(gap_constant(&build_profile(&config.spec, n)?, &config.spec).lambda0_bounds))
        .collect::<Result<Vec<_>, ModelError>>()?;
    let mut csv = Csv::new(&["N", "lambda0_upper", "sandwich_lo", "sandwich_hi"]);
    for ((n, u), b) in depths.iter().zip(&upper).zip(&brackets) {
        csv.row([n.to_string(), fmt_float(*u), fmt_float(b.lo), fmt_float(b.hi)]);
    }
    Ok(csv.as_str().to_string())
}

/// Files written by [`run`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub written: Vec<(Analysis, PathBuf)>,
    /// `Some(false)` when a verification failed.
    pub verify_pass: Option<bool>,
}

impl RunOutcome {
    /// 2 when a verification failed, else 0.
    pub fn exit_code(&self) -> i32 {
        if self.verify_pass == Some(false) {
            2
        } else {
            0
        }
    }
}

/// Renders the requested analyses in parallel and writes them one by one
/// under `out_dir`. Nothing is written if any analysis errors.
pub fn run(config: &RunConfig, analyses: &[Analysis], out_dir: &Path) -> Result<RunOutcome, ReportError> {
    config.validate()?;
    let mut list = analyses.to_vec();
    list.sort();
    list.dedup();
    let rendered = list
        .par_iter()
        .map(|&a| render(config, a))
        .collect::<Result<Vec<_>, _>>()?;
    let mut written = Vec::new();
    let mut verify_pass = None;
    for r in rendered {
        let path = out_dir.join(config.outputs.path(r.analysis));
        write_atomic(&path, &r.text).map_err(|source| ReportError::Io {
            path: path.clone(),
            source,
        })?;
        if let Some(p) = r.verify_pass {
            verify_pass = Some(p);
        }
        written.push((r.analysis, path));
    }
    Ok(RunOutcome { written, verify_pass })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(text: &str) -> RunConfig {
        RunConfig::from_json(text).unwrap()
    }

    const EXP2: &str = r#"{"spec": {"spheres": {"kind": "exponential", "beta": 2},
                                     "lengths": {"kind": "constant", "length": 1.0}},
                           "depth": 8}"#;

    #[test]
    fn defaults_fill_in() {
        let c = config(EXP2);
        assert_eq!(c.analyses, vec![Analysis::Classify]);
        assert_eq!(c.knobs, Knobs::default());
        assert_eq!(c.outputs.path(Analysis::Gap), Path::new("gap.csv"));
    }

    #[test]
    fn unknown_keys_are_rejected_with_position() {
        let text = "{\n  \"spec\": {\"spheres\": {\"kind\": \"exponential\", \"beta\": 2},\n  \"lengths\": {\"kind\": \"constant\", \"length\": 1.0}},\n  \"depth\": 8,\n  \"knobs\": {\"hh\": 0.1}\n}";
        match RunConfig::from_json(text) {
            Err(ConfigError::Parse { line, message, .. }) => {
                assert_eq!(line, 5);
                assert!(message.contains("unknown field `hh`"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn invalid_knobs_are_rejected() {
        let text = EXP2.replace("\"depth\": 8", "\"depth\": 8, \"knobs\": {\"gap_min_depth\": 9}");
        assert!(matches!(RunConfig::from_json(&text), Err(ConfigError::Invalid(_))));
    }

    #[test]
    fn config_round_trips() {
        let c = config(EXP2);
        let back = RunConfig::from_json(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(c, back);
    }

    #[test]
    fn path_graph_spectrum_is_sym_only() {
        let c = config(
            r#"{"spec": {"spheres": {"kind": "explicit", "values": [1, 1, 1, 1]},
                         "lengths": {"kind": "constant", "length": 1.0}},
                "depth": 2, "knobs": {"lambda_max": 50.0}}"#,
        );
        let r = render(&c, Analysis::Spectrum).unwrap();
        let mut lines = r.text.lines();
        assert_eq!(lines.next(), Some("lambda,multiplicity,block,generation"));
        let rows: Vec<&str> = lines.collect();
        assert!(!rows.is_empty());
        assert!(rows.iter().all(|l| l.ends_with(",1,sym,")));
    }

    #[test]
    fn gap_table_shape() {
        let mut c = config(EXP2);
        c.knobs.gap_min_depth = 5;
        let r = render(&c, Analysis::Gap).unwrap();
        assert_eq!(r.text.lines().count(), 1 + 4);
        assert!(r.text.starts_with("N,lambda0_upper,sandwich_lo,sandwich_hi\n5,"));
    }

    #[test]
    fn classify_document_echoes_config() {
        let r = render(&config(EXP2), Analysis::Classify).unwrap();
        let v: serde_json::Value = serde_json::from_str(&r.text).unwrap();
        assert_eq!(v["schema_version"], SCHEMA_VERSION);
        assert_eq!(v["config"]["depth"], 8);
        assert_eq!(v["report"]["self_adjoint"], "holds");
    }
}
