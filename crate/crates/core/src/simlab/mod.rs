//! Seeded Monte Carlo experiments for the estimators' bias, variance,
//! asymptotic normality, tail behaviour and bandwidth optimum.
//!
//! Every experiment is a pure function of its resolved [`ExperimentConfig`]:
//! replicate `i` draws from [`crate::rng::replicate_stream`]`(seed, i)` and
//! records are merged in replicate order. Aggregates are computed from the
//! stored records by the same code that [`ExperimentResult::verify`] reruns.

mod bias;
mod clt;
mod figure1;
pub mod stats;
mod sweep;
mod variance;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::clipping::ClippingSpec;
use crate::densities::DensityModel;
use crate::error::{Error, Result};
use crate::estimators::{EstimatorKind, PilotMode};
use crate::exec::Exec;
use crate::kernel::Kernel;

/// A numeric setting that may be left as `"auto"`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Setting {
    #[default]
    Auto,
    Value(f64),
}

impl Setting {
    pub fn or(self, auto: f64) -> f64 {
        match self {
            Setting::Auto => auto,
            Setting::Value(v) => v,
        }
    }

    pub fn or_else(self, auto: impl FnOnce() -> Result<f64>) -> Result<f64> {
        match self {
            Setting::Auto => auto(),
            Setting::Value(v) => Ok(v),
        }
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Setting::Auto => f.write_str("auto"),
            Setting::Value(v) => write!(f, "{v}"),
        }
    }
}

impl FromStr for Setting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Setting::Auto);
        }
        s.parse::<f64>()
            .map(Setting::Value)
            .map_err(|_| Error::arg(format!("expected a number or `auto`, got `{s}`")))
    }
}

impl Serialize for Setting {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Setting::Auto => s.serialize_str("auto"),
            Setting::Value(v) => s.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for Setting {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Setting;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or \"auto\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Setting, E> {
                Ok(Setting::Value(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Setting, E> {
                Ok(Setting::Value(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Setting, E> {
                Ok(Setting::Value(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Setting, E> {
                v.parse().map_err(|_| E::custom(format!("expected a number or \"auto\", got \"{v}\"")))
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Bias,
    Variance,
    Clt,
    Figure1,
    Sweep,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 5] = [
        ExperimentKind::Bias,
        ExperimentKind::Variance,
        ExperimentKind::Clt,
        ExperimentKind::Figure1,
        ExperimentKind::Sweep,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Bias => "bias",
            Self::Variance => "variance",
            Self::Clt => "clt",
            Self::Figure1 => "figure1",
            Self::Sweep => "sweep",
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Lookup {
                what: "experiment",
                name: s.to_string(),
            })
    }
}

/// Experiment parameters. `None` fields take experiment-specific defaults
/// in [`ExperimentConfig::resolve`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub model: Option<String>,
    /// Models for the tail comparison.
    pub models: Option<Vec<String>>,
    pub kernel: String,
    pub clip: String,
    pub t0: f64,
    /// Clipping constant; `auto` takes `√(q/t₀)` with `q` the
    /// `c_quantile` of the pilot values.
    pub c: Option<Setting>,
    pub c_quantile: Option<f64>,
    pub n: Option<usize>,
    pub replications: Option<usize>,
    /// Evaluation point `t`.
    pub point: Option<Vec<f64>>,
    /// Main bandwidths for the bias experiment.
    pub h_grid: Option<Vec<f64>>,
    /// Ideal-estimator bandwidth; `auto` is `n^{-1/(8+d)}`.
    pub h: Setting,
    /// Pilot bandwidth; `auto` is `n^{-1/(4+d)}`.
    pub h1: Setting,
    /// Main bandwidth; `auto` is `c2·n^{-1/(8+d)}`.
    pub h2: Setting,
    pub c2: f64,
    /// Estimator under study in the variance experiment.
    pub estimator: Option<EstimatorKind>,
    pub pilot: PilotMode,
    pub levels: Vec<f64>,
    /// Control-variate adjustment of the ideal estimator's bias.
    pub control_variate: bool,
    /// Grid points per region for ISE quadrature.
    pub region_points: usize,
    /// Classical baseline bandwidth; `auto` is the normal-reference rule.
    pub baseline_h: Setting,
    /// Level `r` of the evaluation region; `auto` is `1.25·t₀c²`.
    pub r: Setting,
    pub sweep_points: usize,
    /// The sweep spans `[h*/span, h*·span]` around the IMSE-optimal `h*`.
    pub sweep_span: f64,
    /// Single replicate at n = 50,000 for the tail comparison.
    pub full_scale: bool,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: ExperimentKind::Bias,
            model: None,
            models: None,
            kernel: "tricube".into(),
            clip: crate::clipping::QuinticClip::NAME.into(),
            t0: 2.0,
            c: None,
            c_quantile: None,
            n: None,
            replications: None,
            point: None,
            h_grid: None,
            h: Setting::Auto,
            h1: Setting::Auto,
            h2: Setting::Auto,
            c2: 1.0,
            estimator: None,
            pilot: PilotMode::LeaveSelfIn,
            levels: vec![0.90, 0.95, 0.99],
            control_variate: true,
            region_points: 201,
            baseline_h: Setting::Auto,
            r: Setting::Auto,
            sweep_points: 12,
            sweep_span: 4.0,
            full_scale: false,
            seed: 42,
        }
    }
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind) -> Self {
        Self {
            experiment: kind,
            ..Self::default()
        }
    }

    /// Fills experiment defaults and validates every field.
    pub fn resolve(&self) -> Result<Self> {
        use ExperimentKind::*;
        let mut c = self.clone();
        let kind = c.experiment;
        let (model, n, m, cc) = match kind {
            Bias => ("normal", 2_000, 20_000, Setting::Value(0.3)),
            Variance => ("normal", 50_000, 1_000, Setting::Value(0.3)),
            Clt => ("t4", 5_000, 1_000, Setting::Value(0.3)),
            // The clipping threshold t₀c² sits below the density at the
            // tail region's upper end, so the square-root law covers it.
            Figure1 => ("t4", 10_000, 200, Setting::Auto),
            Sweep => ("normal", 5_000, 200, Setting::Value(0.3)),
        };
        c.model.get_or_insert_with(|| model.to_string());
        c.c.get_or_insert(cc);
        c.c_quantile
            .get_or_insert(if kind == Figure1 { 0.001 } else { 0.05 });
        c.point.get_or_insert_with(|| vec![0.0]);
        if kind == Figure1 {
            c.models
                .get_or_insert_with(|| vec!["t4".into(), "cauchy".into(), "pareto".into()]);
            if c.full_scale {
                c.n = Some(50_000);
                c.replications = Some(1);
            }
        }
        c.n.get_or_insert(n);
        c.replications.get_or_insert(m);
        if kind == Bias {
            c.h_grid
                .get_or_insert_with(|| vec![0.9, 0.68, 0.51, 0.38, 0.29]);
        }
        if kind == Variance {
            c.estimator.get_or_insert(EstimatorKind::IdealVkde);
        }
        c.validate()?;
        Ok(c)
    }

    fn validate(&self) -> Result<()> {
        let m = self.replications.unwrap_or(1);
        if m == 0 {
            return Err(Error::arg("replications must be at least 1"));
        }
        if self.n.unwrap_or(1) < 2 {
            return Err(Error::arg("n must be at least 2"));
        }
        let model = self.model()?;
        self.kernel(model.dim())?;
        self.clipping(1.0)?;
        if let Some(Setting::Value(c)) = self.c {
            self.clipping(c)?;
        }
        if let Some(p) = &self.point {
            if p.len() != model.dim() {
                return Err(Error::arg(format!(
                    "point has dimension {}, model `{}` has {}",
                    p.len(),
                    model.name(),
                    model.dim()
                )));
            }
        }
        for name in self.models.iter().flatten() {
            let m = DensityModel::by_name(name)?;
            if m.dim() != 1 {
                return Err(Error::Unsupported(format!(
                    "tail comparison needs one-dimensional models, `{name}` is not"
                )));
            }
        }
        if let Some(g) = &self.h_grid {
            if g.len() < 4 && self.experiment == ExperimentKind::Bias {
                return Err(Error::arg("bias experiment needs at least four bandwidths"));
            }
            if g.iter().any(|h| !(*h > 0.0 && h.is_finite())) {
                return Err(Error::arg("bandwidths must be positive"));
            }
        }
        for (name, s) in [("h", self.h), ("h1", self.h1), ("h2", self.h2), ("baseline_h", self.baseline_h)] {
            if let Setting::Value(v) = s {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::arg(format!("{name} must be positive, got {v}")));
                }
            }
        }
        if !(self.c2 > 0.0) {
            return Err(Error::arg("c2 must be positive"));
        }
        if !self.c_quantile.is_none_or(|q| (0.0..=1.0).contains(&q)) {
            return Err(Error::arg("c_quantile must lie in [0, 1]"));
        }
        if self.levels.iter().any(|l| !(*l > 0.0 && *l < 1.0)) {
            return Err(Error::arg("confidence levels must lie in (0, 1)"));
        }
        if self.region_points < 2 || self.sweep_points < 2 || !(self.sweep_span > 1.0) {
            return Err(Error::arg("region_points and sweep_points must be ≥ 2, sweep_span > 1"));
        }
        if let Some(e) = self.estimator {
            if !matches!(e, EstimatorKind::IdealVkde | EstimatorKind::PluginVkde) {
                return Err(Error::Unsupported(format!(
                    "variance experiment supports ideal-vkde and plugin-vkde, not {e}"
                )));
            }
        }
        Ok(())
    }

    pub fn model(&self) -> Result<DensityModel> {
        DensityModel::by_name(self.model.as_deref().unwrap_or("normal"))
    }

    pub fn kernel(&self, dim: usize) -> Result<Kernel> {
        Kernel::by_name(&self.kernel, dim)
    }

    pub fn clipping(&self, c: f64) -> Result<ClippingSpec> {
        ClippingSpec::by_name(&self.clip, c, self.t0)
    }

    pub(crate) fn n_(&self) -> usize {
        self.n.expect("resolved config")
    }

    pub(crate) fn m_(&self) -> usize {
        self.replications.expect("resolved config")
    }

    pub(crate) fn point_(&self) -> &[f64] {
        self.point.as_deref().expect("resolved config")
    }

    /// Fixed clipping constant; `auto` is only meaningful per sample.
    pub(crate) fn fixed_c(&self) -> Result<f64> {
        match self.c.expect("resolved config") {
            Setting::Value(c) => Ok(c),
            Setting::Auto => Err(Error::Unsupported(format!(
                "the {} experiment needs a fixed clipping constant",
                self.experiment.name()
            ))),
        }
    }

    pub(crate) fn rate_h1(&self, n: usize, dim: usize) -> f64 {
        self.h1.or((n as f64).powf(-1.0 / (4.0 + dim as f64)))
    }

    pub(crate) fn rate_h2(&self, n: usize, dim: usize) -> f64 {
        self.h2.or(self.c2 * (n as f64).powf(-1.0 / (8.0 + dim as f64)))
    }
}

/// One replicate's output at one design point (bandwidth, region, ...).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub replicate: usize,
    pub label: String,
    pub x: f64,
    pub values: BTreeMap<String, f64>,
}

impl Record {
    pub(crate) fn new(replicate: usize, label: impl Into<String>, x: f64) -> Self {
        Self {
            replicate,
            label: label.into(),
            x,
            values: BTreeMap::new(),
        }
    }

    pub(crate) fn with(mut self, key: &str, v: f64) -> Self {
        self.values.insert(key.to_string(), v);
        self
    }

    pub(crate) fn get(&self, key: &str) -> f64 {
        self.values[key]
    }
}

/// Mean curves over replicates for one (model, region) panel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlotPanel {
    pub name: String,
    pub t: Vec<f64>,
    pub f_true: Vec<f64>,
    pub kde: Vec<f64>,
    pub vkde: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Aggregates {
    pub values: BTreeMap<String, f64>,
    pub flags: BTreeMap<String, bool>,
    pub notes: Vec<String>,
}

impl Aggregates {
    pub(crate) fn set(&mut self, key: impl Into<String>, v: f64) {
        self.values.insert(key.into(), v);
    }

    pub(crate) fn flag(&mut self, key: impl Into<String>, v: bool) {
        self.flags.insert(key.into(), v);
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.values.get(key).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub experiment: ExperimentKind,
    pub config: ExperimentConfig,
    pub records: Vec<Record>,
    pub aggregates: Aggregates,
    #[serde(skip)]
    pub panels: Vec<PlotPanel>,
    /// Excluded from serialized summaries so reruns stay byte-identical.
    #[serde(skip)]
    pub wall_time_secs: f64,
}

impl ExperimentResult {
    /// Recomputes the aggregates from the stored records and checks them
    /// against the stored values.
    pub fn verify(&self) -> Result<()> {
        let again = aggregate(&self.config, &self.records)?;
        for (k, v) in &self.aggregates.values {
            let w = again.values.get(k).copied().unwrap_or(f64::NAN);
            let same = (v.is_nan() && w.is_nan()) || (v - w).abs() <= 1e-12 * v.abs().max(1.0);
            if !same {
                return Err(Error::Numeric(format!(
                    "aggregate `{k}` is {v} but recomputes to {w}"
                )));
            }
        }
        if again.values.len() != self.aggregates.values.len() || again.flags != self.aggregates.flags {
            return Err(Error::Numeric("aggregate keys or flags differ on recompute".into()));
        }
        Ok(())
    }
}

fn aggregate(cfg: &ExperimentConfig, records: &[Record]) -> Result<Aggregates> {
    match cfg.experiment {
        ExperimentKind::Bias => bias::aggregate(cfg, records),
        ExperimentKind::Variance => variance::aggregate(cfg, records),
        ExperimentKind::Clt => clt::aggregate(cfg, records),
        ExperimentKind::Figure1 => figure1::aggregate(cfg, records),
        ExperimentKind::Sweep => sweep::aggregate(cfg, records),
    }
}

/// Runs the configured experiment.
pub fn run(cfg: &ExperimentConfig, exec: Exec) -> Result<ExperimentResult> {
    let cfg = cfg.resolve()?;
    let start = Instant::now();
    let (records, panels) = match cfg.experiment {
        ExperimentKind::Bias => (bias::records(&cfg, exec)?, Vec::new()),
        ExperimentKind::Variance => (variance::records(&cfg, exec)?, Vec::new()),
        ExperimentKind::Clt => (clt::records(&cfg, exec)?, Vec::new()),
        ExperimentKind::Figure1 => figure1::records(&cfg, exec)?,
        ExperimentKind::Sweep => (sweep::records(&cfg, exec)?, Vec::new()),
    };
    let aggregates = aggregate(&cfg, &records)?;
    Ok(ExperimentResult {
        experiment: cfg.experiment,
        config: cfg,
        records,
        aggregates,
        panels,
        wall_time_secs: start.elapsed().as_secs_f64(),
    })
}

pub fn run_bias_experiment(cfg: &ExperimentConfig, exec: Exec) -> Result<ExperimentResult> {
    run(&with_kind(cfg, ExperimentKind::Bias)?, exec)
}

pub fn run_variance_experiment(cfg: &ExperimentConfig, exec: Exec) -> Result<ExperimentResult> {
    run(&with_kind(cfg, ExperimentKind::Variance)?, exec)
}

pub fn run_clt_experiment(cfg: &ExperimentConfig, exec: Exec) -> Result<ExperimentResult> {
    run(&with_kind(cfg, ExperimentKind::Clt)?, exec)
}

pub fn run_figure1_experiment(cfg: &ExperimentConfig, exec: Exec) -> Result<ExperimentResult> {
    run(&with_kind(cfg, ExperimentKind::Figure1)?, exec)
}

pub fn run_bandwidth_sweep(cfg: &ExperimentConfig, exec: Exec) -> Result<ExperimentResult> {
    run(&with_kind(cfg, ExperimentKind::Sweep)?, exec)
}

fn with_kind(cfg: &ExperimentConfig, kind: ExperimentKind) -> Result<ExperimentConfig> {
    if cfg.experiment != kind {
        return Err(Error::arg(format!(
            "config is for the {} experiment, not {}",
            cfg.experiment.name(),
            kind.name()
        )));
    }
    Ok(cfg.clone())
}

/// Values of `key` across records with `label`, in replicate order.
pub(crate) fn column(records: &[Record], label: &str, key: &str) -> Vec<f64> {
    records
        .iter()
        .filter(|r| r.label == label)
        .map(|r| r.get(key))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn setting_parses_and_serializes() {
        let s: Setting = serde_json::from_str("\"auto\"").unwrap();
        assert_eq!(s, Setting::Auto);
        let v: Setting = serde_json::from_str("0.25").unwrap();
        assert_eq!(v, Setting::Value(0.25));
        assert_eq!(serde_json::to_string(&v).unwrap(), "0.25");
        assert!(serde_json::from_str::<Setting>("\"fast\"").is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        let bad = r#"{"experiment": "bias", "bogus": 1}"#;
        assert!(serde_json::from_str::<ExperimentConfig>(bad).is_err());
        let ok = r#"{"experiment": "clt", "n": 500, "h2": "auto", "c": 0.4}"#;
        let cfg: ExperimentConfig = serde_json::from_str(ok).unwrap();
        let r = cfg.resolve().unwrap();
        assert_eq!(r.n, Some(500));
        assert_eq!(r.model.as_deref(), Some("t4"));
    }

    #[test]
    fn validation() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::Bias);
        cfg.replications = Some(0);
        assert!(cfg.resolve().is_err());
        let mut cfg = ExperimentConfig::new(ExperimentKind::Bias);
        cfg.h_grid = Some(vec![0.5, 0.4]);
        assert!(cfg.resolve().is_err());
        let mut cfg = ExperimentConfig::new(ExperimentKind::Variance);
        cfg.kernel = "nope".into();
        assert!(matches!(cfg.resolve(), Err(Error::Lookup { .. })));
    }
}
