//! Experiment configuration files.
//!
//! TOML with one `[[experiment]]` table per experiment:
//!
//! ```toml
//! output_dir = "out"
//!
//! [[experiment]]
//! name = "quick"
//! kind = "identity"
//! dimension = 1
//! tolerance = 1e-6
//! packets = [{ amplitude_re = 1.0, width = 1.0, center = [0.0], momentum = [0.0] }]
//! weights = [{ kind = "psi-eps", eps = 1.0 }]
//! schedule = { kind = "geometric", start = 0.5, factor = 2.0, count = 2 }
//! ```

use std::collections::HashSet;
use std::path::PathBuf;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::LabError;
use crate::limits::LimitModel;
use crate::model::{QuadraturePlan, SpatialTruncation, SummationMode, WavePacket, WavePacketSum};
use crate::weights::{constant_weight, make_psi_eps, make_psi_k, RadialWeight};

use super::ExperimentKind;

/// Parse or validation failure, with the offending field path.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{field}: {message}")]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }

    fn from_lab(field: impl Into<String>, e: LabError) -> Self {
        Self::new(field, e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub plan: PlanConfig,
    #[serde(default, rename = "experiment")]
    pub experiments: Vec<ExperimentConfig>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("smoothing-lab-out")
}

/// Overrides of the default quadrature plan.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_mass: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation_radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time_panels: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nodes_per_panel: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub space_rel: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time_rel: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_panels: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summation: Option<SummationMode>,
}

impl PlanConfig {
    pub fn build(&self) -> Result<QuadraturePlan, ConfigError> {
        let mut plan = QuadraturePlan::default();
        match (self.tail_mass, self.truncation_radius) {
            (Some(_), Some(_)) => {
                return Err(ConfigError::new(
                    "plan.truncation_radius",
                    "set either tail_mass or truncation_radius, not both",
                ))
            }
            (Some(t), None) => plan.truncation = SpatialTruncation::TailMass(t),
            (None, Some(r)) => plan.truncation = SpatialTruncation::FixedRadius(r),
            (None, None) => {}
        }
        if let Some(v) = self.horizon {
            plan.horizon = v;
        }
        if let Some(v) = self.time_panels {
            plan.time_panels = v;
        }
        if let Some(v) = self.nodes_per_panel {
            plan.nodes_per_panel = v;
        }
        if let Some(v) = self.space_rel {
            plan.space_rel = v;
        }
        if let Some(v) = self.time_rel {
            plan.time_rel = v;
        }
        if let Some(v) = self.max_panels {
            plan.max_panels = v;
        }
        if let Some(v) = self.summation {
            plan.summation = v;
        }
        plan.validate().map_err(|e| match e {
            LabError::InvalidParameter { name, reason } => ConfigError::new(format!("plan.{name}"), reason),
            other => ConfigError::from_lab("plan", other),
        })?;
        Ok(plan)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketConfig {
    pub amplitude_re: f64,
    #[serde(default)]
    pub amplitude_im: f64,
    pub width: f64,
    pub center: Vec<f64>,
    pub momentum: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightKind {
    PsiEps,
    PsiK,
    Constant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightConfig {
    pub kind: WeightKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[serde(rename = "rescale_R", skip_serializing_if = "Option::is_none")]
    pub rescale_r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constant: Option<f64>,
}

impl WeightConfig {
    fn build(&self, field: &str) -> Result<RadialWeight, ConfigError> {
        let base = match self.kind {
            WeightKind::PsiEps => {
                let eps = self
                    .eps
                    .ok_or_else(|| ConfigError::new(format!("{field}.eps"), "psi-eps weights need `eps`"))?;
                make_psi_eps(eps).map_err(|e| ConfigError::from_lab(format!("{field}.eps"), e))?
            }
            WeightKind::PsiK => {
                let k = self
                    .k
                    .ok_or_else(|| ConfigError::new(format!("{field}.k"), "psi-k weights need `k`"))?;
                make_psi_k(k).map_err(|e| ConfigError::from_lab(format!("{field}.k"), e))?
            }
            WeightKind::Constant => {
                let c = self
                    .constant
                    .ok_or_else(|| ConfigError::new(format!("{field}.constant"), "constant weights need `constant`"))?;
                if !c.is_finite() {
                    return Err(ConfigError::new(format!("{field}.constant"), "must be finite"));
                }
                constant_weight(c)
            }
        };
        match self.rescale_r {
            Some(r) => base
                .rescale(r)
                .map_err(|e| ConfigError::from_lab(format!("{field}.rescale_R"), e)),
            None => Ok(base),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleKind {
    Geometric,
    List,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub kind: ScheduleKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub factor: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

impl ScheduleConfig {
    pub fn geometric(start: f64, factor: f64, count: usize) -> Self {
        Self {
            kind: ScheduleKind::Geometric,
            start: Some(start),
            factor: Some(factor),
            count: Some(count),
            values: None,
        }
    }

    fn build(&self, field: &str) -> Result<Vec<f64>, ConfigError> {
        let values = match self.kind {
            ScheduleKind::Geometric => {
                let need = |v: Option<f64>, key: &str| {
                    v.ok_or_else(|| ConfigError::new(format!("{field}.{key}"), "required for geometric schedules"))
                };
                let start = need(self.start, "start")?;
                let factor = need(self.factor, "factor")?;
                let count = self
                    .count
                    .ok_or_else(|| ConfigError::new(format!("{field}.count"), "required for geometric schedules"))?;
                if !(start > 0.0 && start.is_finite()) {
                    return Err(ConfigError::new(
                        format!("{field}.start"),
                        format!("must be positive, got {start}"),
                    ));
                }
                if !(factor > 1.0 && factor.is_finite()) {
                    return Err(ConfigError::new(
                        format!("{field}.factor"),
                        format!("must exceed 1, got {factor}"),
                    ));
                }
                if count == 0 {
                    return Err(ConfigError::new(format!("{field}.count"), "must be at least 1"));
                }
                (0..count).map(|i| start * factor.powi(i as i32)).collect()
            }
            ScheduleKind::List => self
                .values
                .clone()
                .ok_or_else(|| ConfigError::new(format!("{field}.values"), "required for list schedules"))?,
        };
        if values.is_empty() {
            return Err(ConfigError::new(format!("{field}.values"), "schedule is empty"));
        }
        if values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(ConfigError::new(
                format!("{field}.values"),
                "entries must be positive and finite",
            ));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ConfigError::new(
                format!("{field}.values"),
                "entries must be strictly increasing",
            ));
        }
        Ok(values)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// CSV file stem; defaults to `<index>-<kind>`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub kind: ExperimentKind,
    #[serde(default = "default_datum")]
    pub datum: String,
    pub dimension: usize,
    #[serde(default)]
    pub packets: Vec<PacketConfig>,
    #[serde(default)]
    pub weights: Vec<WeightConfig>,
    pub schedule: ScheduleConfig,
    /// Main tolerance; its meaning depends on the experiment kind.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    /// Tolerance of finite-schedule identities inside limit experiments.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub identity_tolerance: Option<f64>,
    /// Multiple of the datum extent beyond which the lower bound is asserted.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold_factor: Option<f64>,
    #[serde(default)]
    pub limit_model: LimitModel,
}

fn default_datum() -> String {
    "datum".into()
}

/// A validated experiment, ready to run.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub name: String,
    pub kind: ExperimentKind,
    pub datum_id: String,
    pub datum: WavePacketSum,
    pub weights: Vec<RadialWeight>,
    /// `k` of each weight, for sandwich experiments.
    pub sandwich_k: Vec<u32>,
    pub schedule: Vec<f64>,
    pub tolerance: f64,
    pub identity_tolerance: f64,
    pub threshold_factor: f64,
    pub limit_model: LimitModel,
}

impl ExperimentConfig {
    fn build(&self, index: usize) -> Result<Experiment, ConfigError> {
        let field = format!("experiment[{index}]");
        let n = self.dimension;
        if !(1..=3).contains(&n) {
            return Err(ConfigError::new(
                format!("{field}.dimension"),
                format!("must be 1, 2 or 3, got {n}"),
            ));
        }
        let mut packets = Vec::with_capacity(self.packets.len());
        for (j, p) in self.packets.iter().enumerate() {
            let pf = format!("{field}.packets[{j}]");
            if p.center.len() != n || p.momentum.len() != n {
                return Err(ConfigError::new(pf, format!("center and momentum need {n} components")));
            }
            let packet = WavePacket::new(
                Complex64::new(p.amplitude_re, p.amplitude_im),
                p.width,
                p.center.clone(),
                p.momentum.clone(),
            )
            .map_err(|e| match e {
                LabError::InvalidParameter { name, reason } => ConfigError::new(format!("{pf}.{name}"), reason),
                other => ConfigError::from_lab(pf.clone(), other),
            })?;
            packets.push(packet);
        }
        let datum = WavePacketSum::new(n, packets).map_err(|e| ConfigError::from_lab(format!("{field}.packets"), e))?;
        let weights = self
            .weights
            .iter()
            .enumerate()
            .map(|(j, w)| w.build(&format!("{field}.weights[{j}]")))
            .collect::<Result<Vec<_>, _>>()?;
        let schedule = self.schedule.build(&format!("{field}.schedule"))?;

        let kind = self.kind;
        if kind.needs_weights() && weights.is_empty() {
            return Err(ConfigError::new(
                format!("{field}.weights"),
                format!("{} needs at least one weight", kind.name()),
            ));
        }
        if kind == ExperimentKind::Sandwich {
            for (j, w) in self.weights.iter().enumerate() {
                if w.kind != WeightKind::PsiK || w.rescale_r.is_some() {
                    return Err(ConfigError::new(
                        format!("{field}.weights[{j}]"),
                        "sandwich experiments take unscaled psi-k weights",
                    ));
                }
            }
        }
        if schedule.len() < kind.min_schedule() {
            return Err(ConfigError::new(
                format!("{field}.schedule"),
                format!("{} needs at least {} schedule points", kind.name(), kind.min_schedule()),
            ));
        }
        let tolerance = self.tolerance.unwrap_or(kind.default_tolerance());
        let positive = |key: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(ConfigError::new(
                    format!("{field}.{key}"),
                    format!("must be positive, got {v}"),
                ))
            }
        };
        Ok(Experiment {
            name: self
                .name
                .clone()
                .unwrap_or_else(|| format!("{index:02}-{}", kind.name())),
            kind,
            datum_id: self.datum.clone(),
            datum,
            weights,
            sandwich_k: self.weights.iter().filter_map(|w| w.k).collect(),
            schedule,
            tolerance: positive("tolerance", tolerance)?,
            identity_tolerance: positive("identity_tolerance", self.identity_tolerance.unwrap_or(1e-6))?,
            threshold_factor: positive("threshold_factor", self.threshold_factor.unwrap_or(4.0))?,
            limit_model: self.limit_model,
        })
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| {
            let field = e
                .span()
                .map(|s| {
                    let line = text[..s.start.min(text.len())].matches('\n').count() + 1;
                    format!("line {line}")
                })
                .unwrap_or_else(|| "config".into());
            ConfigError::new(field, e.message().to_string())
        })
    }

    /// Validated plan and experiments.
    pub fn build(&self) -> Result<(QuadraturePlan, Vec<Experiment>), ConfigError> {
        let plan = self.plan.build()?;
        let experiments = self
            .experiments
            .iter()
            .enumerate()
            .map(|(i, e)| e.build(i))
            .collect::<Result<Vec<_>, _>>()?;
        let mut names = HashSet::new();
        for (i, e) in experiments.iter().enumerate() {
            let valid = !e.name.is_empty()
                && e.name
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'));
            if !valid {
                return Err(ConfigError::new(
                    format!("experiment[{i}].name"),
                    "names may only use ASCII letters, digits, '-', '_' and '.'",
                ));
            }
            if !names.insert(e.name.clone()) {
                return Err(ConfigError::new(
                    format!("experiment[{i}].name"),
                    format!("duplicate name `{}`", e.name),
                ));
            }
        }
        Ok((plan, experiments))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("configuration serializes")
    }
}

fn unit_packet(n: usize) -> PacketConfig {
    PacketConfig {
        amplitude_re: 1.0,
        amplitude_im: 0.0,
        width: 1.0,
        center: vec![0.0; n],
        momentum: vec![0.0; n],
    }
}

fn weight(kind: WeightKind) -> WeightConfig {
    WeightConfig {
        kind,
        eps: None,
        k: None,
        rescale_r: None,
        constant: None,
    }
}

/// One experiment of every kind on the one-dimensional unit Gaussian, with
/// the default geometric schedules.
pub fn default_config() -> Config {
    let eps = WeightConfig {
        eps: Some(1.0),
        ..weight(WeightKind::PsiEps)
    };
    let psi_k = |k: u32| WeightConfig {
        k: Some(k),
        ..weight(WeightKind::PsiK)
    };
    let two_packets = vec![
        PacketConfig {
            amplitude_re: 1.0,
            amplitude_im: 0.3,
            width: 1.0,
            center: vec![0.5, -0.2],
            momentum: vec![0.1, 0.05],
        },
        PacketConfig {
            amplitude_re: -0.4,
            amplitude_im: 0.2,
            width: 1.5,
            center: vec![-0.6, 0.4],
            momentum: vec![-0.1, 0.0],
        },
    ];
    let base = |kind: ExperimentKind, schedule: ScheduleConfig| ExperimentConfig {
        name: Some(kind.name().to_string()),
        kind,
        datum: "gauss-1d".into(),
        dimension: 1,
        packets: vec![unit_packet(1)],
        weights: vec![],
        schedule,
        tolerance: None,
        identity_tolerance: None,
        threshold_factor: None,
        limit_model: LimitModel::ConstantPlusPower,
    };
    let t_schedule = ScheduleConfig::geometric(2.0, 2.0, 6);
    let r_schedule = ScheduleConfig::geometric(4.0, 2.0, 6);
    Config {
        output_dir: default_output_dir(),
        plan: PlanConfig::default(),
        experiments: vec![
            ExperimentConfig {
                weights: vec![
                    eps.clone(),
                    psi_k(2),
                    WeightConfig {
                        rescale_r: Some(4.0),
                        ..psi_k(2)
                    },
                ],
                ..base(ExperimentKind::Identity, ScheduleConfig::geometric(0.5, 4.0, 2))
            },
            ExperimentConfig {
                weights: vec![eps.clone()],
                ..base(ExperimentKind::TheoremLimit, t_schedule.clone())
            },
            base(ExperimentKind::CorollaryLimit, r_schedule.clone()),
            ExperimentConfig {
                weights: vec![eps],
                ..base(ExperimentKind::FluxLimit, t_schedule)
            },
            ExperimentConfig {
                weights: vec![psi_k(1), psi_k(4)],
                ..base(ExperimentKind::Sandwich, r_schedule.clone())
            },
            ExperimentConfig {
                datum: "two-packets-2d".into(),
                dimension: 2,
                packets: two_packets.clone(),
                weights: vec![psi_k(2)],
                ..base(ExperimentKind::RemainderDecay, ScheduleConfig::geometric(4.0, 4.0, 3))
            },
            ExperimentConfig {
                datum: "two-packets-2d".into(),
                dimension: 2,
                packets: two_packets,
                ..base(ExperimentKind::Asymptotics, ScheduleConfig::geometric(1.0, 2.0, 7))
            },
            base(ExperimentKind::SmoothingBound, r_schedule),
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_roundtrips_and_validates() {
        let c = default_config();
        let text = c.to_toml();
        let back = Config::parse(&text).unwrap();
        assert_eq!(back, c);
        let (_, exps) = back.build().unwrap();
        assert_eq!(exps.len(), 8);
    }

    #[test]
    fn negative_eps_names_the_parameter() {
        let text = r#"
[[experiment]]
kind = "identity"
dimension = 1
packets = [{ amplitude_re = 1.0, width = 1.0, center = [0.0], momentum = [0.0] }]
weights = [{ kind = "psi-eps", eps = -1.0 }]
schedule = { kind = "list", values = [0.5] }
"#;
        let err = Config::parse(text).unwrap().build().unwrap_err();
        assert_eq!(err.field, "experiment[0].weights[0].eps");
    }

    #[test]
    fn unknown_keys_report_a_line() {
        let err = Config::parse("output_dir = \"x\"\nbogus = 1\n").unwrap_err();
        assert_eq!(err.field, "line 2");
        assert!(err.message.contains("bogus"));
    }

    #[test]
    fn schedule_validation() {
        let s = ScheduleConfig::geometric(1.0, 1.0, 3);
        assert_eq!(s.build("s").unwrap_err().field, "s.factor");
        let l = ScheduleConfig {
            kind: ScheduleKind::List,
            start: None,
            factor: None,
            count: None,
            values: Some(vec![2.0, 1.0]),
        };
        assert!(l.build("s").is_err());
        assert_eq!(
            ScheduleConfig::geometric(4.0, 2.0, 3).build("s").unwrap(),
            vec![4.0, 8.0, 16.0]
        );
    }

    #[test]
    fn packet_dimension_mismatch() {
        let mut c = default_config();
        c.experiments[0].packets[0].center = vec![0.0, 0.0];
        assert_eq!(c.build().unwrap_err().field, "experiment[0].packets[0]");
    }
}
