//! Experiment registry, orchestration and CSV/summary output.

pub mod config;
mod output;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::LabError;
use crate::limits::{
    verify_asymptotics, verify_corollary, verify_flux, verify_identity, verify_remainder_decay, verify_sandwich,
    verify_smoothing_bound, verify_theorem_main, LimitTolerances, SandwichTolerances,
};
use crate::model::{QuadraturePlan, VerificationReport};

pub use config::{default_config, Config, ConfigError, Experiment};
pub use output::{write_csv, CSV_HEADER};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Identity,
    TheoremLimit,
    CorollaryLimit,
    FluxLimit,
    Sandwich,
    RemainderDecay,
    Asymptotics,
    SmoothingBound,
}

/// Registry entry: name, the relation being checked, and what `tolerance` means.
pub struct KindInfo {
    pub kind: ExperimentKind,
    pub relation: &'static str,
    pub tolerance: &'static str,
}

pub const REGISTRY: [KindInfo; 8] = [
    KindInfo {
        kind: ExperimentKind::Identity,
        relation: "∫_{-T}^{T}∫ [ψ''|∂_r u|² + (ψ'/r)|∇_τ u|² - ¼|u|²Δ²ψ] dx dt = ½[Im∫ ū ψ' ∂_r u]_{t=-T}^{t=T}",
        tolerance: "relative residual per (weight, T)",
    },
    KindInfo {
        kind: ExperimentKind::TheoremLimit,
        relation: "lim_{T→∞} ∫_{-T}^{T}∫ [ψ''|∂_r u|² + (ψ'/r)|∇_τ u|² - ¼|u|²Δ²ψ] = 2π ψ'(∞) ‖f‖²_{Ḣ^{1/2}}",
        tolerance: "relative error of the extrapolated limit",
    },
    KindInfo {
        kind: ExperimentKind::CorollaryLimit,
        relation: "lim_{R→∞} (1/R)∫∫_{B_R} |∂_r u|² = 2π ‖f‖²_{Ḣ^{1/2}} ≤ sup_R (1/R)∫∫_{B_R} |∇u|²",
        tolerance: "relative error of the extrapolated limit",
    },
    KindInfo {
        kind: ExperimentKind::FluxLimit,
        relation: "lim_{t→±∞} Im∫ ū ψ'(|x|) ∂_r u dx = ±2π ψ'(∞) ‖f‖²_{Ḣ^{1/2}}",
        tolerance: "relative error of each extrapolated limit",
    },
    KindInfo {
        kind: ExperimentKind::Sandwich,
        relation:
            "(1/R)∫∫_{B_R}|∂_r u|² ≤ ∫∫ ψ''_{k,R}|∂_r u|² ≤ (1/R)∫∫_{B_{(k+1)R/k}}|∂_r u|², limit ratio ≤ (k+1)/k",
        tolerance: "allowed excess of the limit ratio over (k+1)/k",
    },
    KindInfo {
        kind: ExperimentKind::RemainderDecay,
        relation: "∫∫ (ψ'_R/r)|∇_τ u|² → 0 and ∫∫ |u|²|Δ²ψ_R| → 0 as R → ∞, with ψ_R(r) = Rψ(r/R)",
        tolerance: "bound on last/first remainder ratio",
    },
    KindInfo {
        kind: ExperimentKind::Asymptotics,
        relation: "‖u(t) - e^{-inπ/4} e^{i|x|²/(4t)} (4πt)^{-n/2} f̂(x/(4πt))‖_{L²} → 0 as t → ∞",
        tolerance: "bound on last/first error ratio",
    },
    KindInfo {
        kind: ExperimentKind::SmoothingBound,
        relation: "liminf_{R→∞} (1/R)∫∫_{B_R}|∇u|² ≥ 2π ‖f‖²_{Ḣ^{1/2}} > 0 for f ≠ 0",
        tolerance: "required fraction of 2π‖f‖²_{Ḣ^{1/2}} beyond the threshold radius",
    },
];

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Identity => "identity",
            ExperimentKind::TheoremLimit => "theorem-limit",
            ExperimentKind::CorollaryLimit => "corollary-limit",
            ExperimentKind::FluxLimit => "flux-limit",
            ExperimentKind::Sandwich => "sandwich",
            ExperimentKind::RemainderDecay => "remainder-decay",
            ExperimentKind::Asymptotics => "asymptotics",
            ExperimentKind::SmoothingBound => "smoothing-bound",
        }
    }

    pub fn info(self) -> &'static KindInfo {
        REGISTRY
            .iter()
            .find(|i| i.kind == self)
            .expect("every kind is registered")
    }

    pub(crate) fn needs_weights(self) -> bool {
        matches!(
            self,
            ExperimentKind::Identity
                | ExperimentKind::TheoremLimit
                | ExperimentKind::FluxLimit
                | ExperimentKind::Sandwich
                | ExperimentKind::RemainderDecay
        )
    }

    pub(crate) fn min_schedule(self) -> usize {
        match self {
            ExperimentKind::Identity | ExperimentKind::SmoothingBound => 1,
            ExperimentKind::RemainderDecay | ExperimentKind::Asymptotics => 2,
            _ => 3,
        }
    }

    pub(crate) fn default_tolerance(self) -> f64 {
        match self {
            ExperimentKind::Identity => 1e-6,
            ExperimentKind::Sandwich => 1e-3,
            ExperimentKind::RemainderDecay => 0.25,
            ExperimentKind::Asymptotics => 0.1,
            ExperimentKind::SmoothingBound => 0.9,
            _ => 0.02,
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Registry listing for `list-experiments`.
pub fn registry_listing() -> String {
    let mut out = String::new();
    for info in &REGISTRY {
        out.push_str(&format!(
            "{}\n    {}\n    tolerance: {}\n",
            info.kind.name(),
            info.relation,
            info.tolerance
        ));
    }
    out
}

/// Runs one validated experiment.
pub fn run_experiment(plan: &QuadraturePlan, e: &Experiment) -> crate::Result<Vec<VerificationReport>> {
    let f = &e.datum;
    let label = e.datum_id.as_str();
    let s = e.schedule.as_slice();
    let limit_tol = LimitTolerances {
        identity: e.identity_tolerance,
        limit: e.tolerance,
    };
    match e.kind {
        ExperimentKind::Identity => verify_identity(f, label, &e.weights, s, plan, e.tolerance),
        ExperimentKind::TheoremLimit => e
            .weights
            .iter()
            .map(|w| verify_theorem_main(f, label, w, s, plan, limit_tol, e.limit_model))
            .collect(),
        ExperimentKind::CorollaryLimit => {
            verify_corollary(f, label, s, plan, e.tolerance, e.limit_model).map(|r| vec![r])
        }
        ExperimentKind::FluxLimit => e
            .weights
            .iter()
            .map(|w| verify_flux(f, label, w, s, plan, e.tolerance, e.limit_model))
            .collect(),
        ExperimentKind::Sandwich => {
            let tol = SandwichTolerances {
                identity: e.identity_tolerance,
                ratio: e.tolerance,
                ..SandwichTolerances::default()
            };
            e.sandwich_k
                .iter()
                .map(|&k| verify_sandwich(f, label, k, s, plan, tol, e.limit_model))
                .collect()
        }
        ExperimentKind::RemainderDecay => {
            let mut out = Vec::new();
            for w in &e.weights {
                out.extend(verify_remainder_decay(f, label, w, s, plan, e.tolerance)?);
            }
            Ok(out)
        }
        ExperimentKind::Asymptotics => verify_asymptotics(f, label, s, e.tolerance).map(|r| vec![r]),
        ExperimentKind::SmoothingBound => {
            verify_smoothing_bound(f, label, s, plan, e.tolerance, e.threshold_factor).map(|r| vec![r])
        }
    }
}

/// Result of one experiment in a run.
#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub name: String,
    pub kind: ExperimentKind,
    pub csv: PathBuf,
    /// Reports, or the computation error that stopped the experiment.
    pub result: Result<Vec<VerificationReport>, LabError>,
}

impl ExperimentOutcome {
    pub fn pass(&self) -> bool {
        matches!(&self.result, Ok(reports) if reports.iter().all(|r| r.pass))
    }
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub outcomes: Vec<ExperimentOutcome>,
    pub summary_path: PathBuf,
}

impl RunSummary {
    pub fn pass(&self) -> bool {
        self.outcomes.iter().all(ExperimentOutcome::pass)
    }

    pub fn exit_code(&self) -> i32 {
        if self.pass() {
            0
        } else {
            1
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        2
    }

    fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Loads, validates and runs a config file. `output_dir` overrides the
/// config's own; a relative config value is taken relative to the config file.
pub fn run_file(path: &Path, output_dir: Option<&Path>) -> Result<RunSummary, RunError> {
    let text = fs::read_to_string(path).map_err(|e| RunError::io(path, e))?;
    let config = Config::parse(&text)?;
    let dir = match output_dir {
        Some(d) => d.to_path_buf(),
        None if config.output_dir.is_relative() => {
            path.parent().unwrap_or_else(|| Path::new(".")).join(&config.output_dir)
        }
        None => config.output_dir.clone(),
    };
    run_config(&config, &dir)
}

/// Runs every experiment of `config`, writing `<name>.csv` per experiment
/// and `summary.txt` into `dir`.
pub fn run_config(config: &Config, dir: &Path) -> Result<RunSummary, RunError> {
    let (plan, experiments) = config.build()?;
    fs::create_dir_all(dir).map_err(|e| RunError::io(dir, e))?;
    let mut outcomes = Vec::with_capacity(experiments.len());
    for e in &experiments {
        let result = run_experiment(&plan, e);
        let csv = dir.join(format!("{}.csv", e.name));
        let reports: &[VerificationReport] = result.as_deref().unwrap_or(&[]);
        output::write_csv_file(&csv, &e.name, reports).map_err(|err| RunError::io(&csv, err))?;
        outcomes.push(ExperimentOutcome {
            name: e.name.clone(),
            kind: e.kind,
            csv,
            result,
        });
    }
    let summary_path = dir.join("summary.txt");
    fs::write(&summary_path, output::summary(&outcomes)).map_err(|e| RunError::io(&summary_path, e))?;
    Ok(RunSummary { outcomes, summary_path })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_is_complete() {
        assert_eq!(REGISTRY.len(), 8);
        for (i, a) in REGISTRY.iter().enumerate() {
            assert!(!a.relation.is_empty());
            for b in &REGISTRY[i + 1..] {
                assert_ne!(a.kind, b.kind);
            }
            assert_eq!(a.kind.info().kind, a.kind);
        }
        let text = registry_listing();
        assert!(text.contains("smoothing-bound"));
    }

    #[test]
    fn empty_config_passes_with_empty_summary() {
        let dir = std::env::temp_dir().join(format!("smoothing-lab-empty-{}", std::process::id()));
        let config = Config::parse("").unwrap();
        let run = run_config(&config, &dir).unwrap();
        assert!(run.outcomes.is_empty());
        assert_eq!(run.exit_code(), 0);
        assert_eq!(fs::read_to_string(&run.summary_path).unwrap(), "");
        fs::remove_dir_all(&dir).unwrap();
    }
}
