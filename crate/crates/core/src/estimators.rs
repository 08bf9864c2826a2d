//! Classical, ideal and plug-in variable-bandwidth kernel density estimators.
//!
//! Every estimator here is a sum of scaled kernels
//! `(1/(n h^d)) Σ aᵢ^d K(aᵢ (t − Xᵢ)/h)` where the per-observation factor
//! `aᵢ` is 1 (classical), `α(f(Xᵢ))` (ideal), `α(f̂(Xᵢ; h₁))` (plug-in),
//! `√f(Xᵢ)` (Hall–Marron, Hall–Hu–Marron) or `γ(t, Xᵢ)` (Abramson).
//!
//! In one dimension evaluation only visits observations whose kernel support
//! can reach `t`, found by binary search over the sorted sample.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Range;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::clipping::ClippingSpec;
use crate::densities::DensityModel;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::kernel::{compute_moments, Kernel};
use crate::quadrature::{pairwise_sum, pairwise_sum_by, GaussLegendre};
use crate::sample::{Grid, Sample};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    Classical,
    IdealVkde,
    PluginVkde,
    Abramson,
    HallMarron,
    Hhm,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 6] = [
        EstimatorKind::Classical,
        EstimatorKind::IdealVkde,
        EstimatorKind::PluginVkde,
        EstimatorKind::Abramson,
        EstimatorKind::HallMarron,
        EstimatorKind::Hhm,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Classical => "classical",
            Self::IdealVkde => "ideal-vkde",
            Self::PluginVkde => "plugin-vkde",
            Self::Abramson => "abramson",
            Self::HallMarron => "hall-marron",
            Self::Hhm => "hhm",
        }
    }

    /// Whether the estimator needs the true density.
    pub fn needs_oracle(&self) -> bool {
        !matches!(self, Self::Classical | Self::PluginVkde)
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Lookup {
                what: "estimator kind",
                name: s.to_string(),
            })
    }
}

/// Pilot bandwidth `h₁` and main bandwidth `h₂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandwidthPair {
    pub h1: f64,
    pub h2: f64,
}

impl BandwidthPair {
    pub fn new(h1: f64, h2: f64) -> Result<Self> {
        check_bandwidth(h1)?;
        check_bandwidth(h2)?;
        Ok(Self { h1, h2 })
    }

    /// `h₁ = n^{-1/(4+d)}`, `h₂ = n^{-1/(8+d)}`; for `d = 1` these are
    /// `n^{-1/5}` and `n^{-1/9}`.
    pub fn default_rates(n: usize, dim: usize) -> Self {
        let n = n as f64;
        let d = dim as f64;
        Self {
            h1: n.powf(-1.0 / (4.0 + d)),
            h2: n.powf(-1.0 / (8.0 + d)),
        }
    }
}

fn check_bandwidth(h: f64) -> Result<()> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::arg(format!("bandwidth must be positive and finite, got {h}")));
    }
    Ok(())
}

/// How the pilot estimate treats the observation it is evaluated at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PilotMode {
    /// The i-th point contributes `K(0)/(n h₁^d)` to its own pilot value.
    #[default]
    LeaveSelfIn,
    LeaveOneOut,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityEstimate {
    #[serde(skip)]
    pub grid: Grid,
    pub values: Vec<f64>,
    pub kind: EstimatorKind,
    /// Main bandwidth (`h`, or `h₂` for the plug-in estimator).
    pub h: f64,
    /// Pilot bandwidth, plug-in estimator only.
    pub h1: Option<f64>,
    /// Clipping constant, when the estimator clips.
    pub c: Option<f64>,
    pub kernel: String,
    pub n: usize,
}

/// Per-observation factor rule.
#[derive(Debug, Clone)]
enum Scales {
    Unit,
    PerPoint(Vec<f64>),
    /// `γ(t, Xᵢ) = max(f(Xᵢ), f(t)/10)^{1/2}`; stores `f(Xᵢ)`.
    Abramson {
        density_at_obs: Vec<f64>,
        model: DensityModel,
    },
}

/// Observations grouped by support radius (powers of two) so that a query
/// only scans observations whose support can reach it.
#[derive(Debug, Clone)]
struct WindowIndex {
    buckets: Vec<Bucket>,
}

#[derive(Debug, Clone)]
struct Bucket {
    xs: Vec<f64>,
    idx: Vec<usize>,
    radius: f64,
}

impl WindowIndex {
    /// `radius(i)` is `None` for observations that never contribute.
    fn build(sample: &Sample, radius: impl Fn(usize) -> Option<f64>) -> Self {
        let mut map: BTreeMap<i32, Bucket> = BTreeMap::new();
        for i in 0..sample.n() {
            let Some(r) = radius(i) else { continue };
            let key = if r.is_finite() && r > 0.0 {
                r.log2().floor() as i32
            } else if r.is_finite() {
                i32::MIN
            } else {
                i32::MAX
            };
            let b = map.entry(key).or_insert_with(|| Bucket {
                xs: Vec::new(),
                idx: Vec::new(),
                radius: 0.0,
            });
            b.xs.push(sample.first(i));
            b.idx.push(i);
            b.radius = b.radius.max(r);
        }
        Self {
            buckets: map.into_values().collect(),
        }
    }

    fn sum<F: Fn(usize) -> f64>(&self, t: f64, cap: f64, term: F) -> f64 {
        let mut total = 0.0;
        for b in &self.buckets {
            let r = b.radius.min(cap);
            // Pad so that rounding in `R·h/a` never drops a boundary term.
            let r = r + r.abs() * 1e-12;
            let range = window_range(&b.xs, t, r);
            total += pairwise_sum_by(range.start, range.end, &|j| term(b.idx[j]));
        }
        total
    }
}

/// Index range of sorted `xs` with `|t − x| ≤ radius`.
pub fn window_range(xs: &[f64], t: f64, radius: f64) -> Range<usize> {
    let lo = xs.partition_point(|&x| x < t - radius);
    let hi = xs.partition_point(|&x| x <= t + radius);
    lo..hi.max(lo)
}

/// Contiguous range of sorted observations within `radius` of `t` (d = 1).
pub fn fast_eval_window(sample: &Sample, t: f64, radius: f64) -> Result<Range<usize>> {
    if sample.dim() != 1 {
        return Err(Error::Unsupported("windowed evaluation needs d = 1".into()));
    }
    Ok(window_range(sample.values(), t, radius))
}

/// A scaled kernel sum over a sample, evaluable at arbitrary points.
#[derive(Debug, Clone)]
pub struct KernelSum<'a> {
    sample: &'a Sample,
    kernel: &'a Kernel,
    h: f64,
    scales: Scales,
    /// Hall–Hu–Marron indicator `|t − Xᵢ| < cutoff`.
    cutoff: Option<f64>,
    index: Option<WindowIndex>,
    norm: f64,
}

impl<'a> KernelSum<'a> {
    fn new(
        sample: &'a Sample,
        kernel: &'a Kernel,
        h: f64,
        scales: Scales,
        cutoff: Option<f64>,
    ) -> Result<Self> {
        check_bandwidth(h)?;
        if kernel.dim() != sample.dim() {
            return Err(Error::arg(format!(
                "kernel dimension {} does not match sample dimension {}",
                kernel.dim(),
                sample.dim()
            )));
        }
        let d = sample.dim();
        let norm = 1.0 / (sample.n() as f64 * h.powi(d as i32));
        let mut sum = Self {
            sample,
            kernel,
            h,
            scales,
            cutoff,
            index: None,
            norm,
        };
        if d == 1 {
            let reach = kernel.support_radius() * h;
            let index = match &sum.scales {
                Scales::Unit => WindowIndex::build(sample, |_| Some(reach)),
                Scales::PerPoint(a) => {
                    WindowIndex::build(sample, |i| (a[i] > 0.0).then(|| reach / a[i]))
                }
                Scales::Abramson { density_at_obs, .. } => WindowIndex::build(sample, |i| {
                    let f = density_at_obs[i];
                    Some(if f > 0.0 { reach / f.sqrt() } else { f64::INFINITY })
                }),
            };
            sum.index = Some(index);
        }
        Ok(sum)
    }

    pub fn unit(sample: &'a Sample, kernel: &'a Kernel, h: f64) -> Result<Self> {
        Self::new(sample, kernel, h, Scales::Unit, None)
    }

    /// Sum with per-observation factors `aᵢ` (aligned with the sorted sample).
    pub fn scaled(sample: &'a Sample, kernel: &'a Kernel, h: f64, factors: Vec<f64>) -> Result<Self> {
        if factors.len() != sample.n() {
            return Err(Error::arg("one factor per observation required"));
        }
        if factors.iter().any(|a| !(*a >= 0.0 && a.is_finite())) {
            return Err(Error::arg("scale factors must be finite and nonnegative"));
        }
        Self::new(sample, kernel, h, Scales::PerPoint(factors), None)
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Per-observation factors, if any.
    pub fn factors(&self) -> Option<&[f64]> {
        match &self.scales {
            Scales::PerPoint(a) => Some(a),
            _ => None,
        }
    }

    /// Query-dependent state: Abramson's floor `f(t)/10`, and the search cap.
    #[inline]
    fn context(&self, t: &[f64]) -> (f64, f64) {
        let mut cap = self.cutoff.unwrap_or(f64::INFINITY);
        let mut floor = 0.0;
        if let Scales::Abramson { model, .. } = &self.scales {
            floor = model.pdf(t) / 10.0;
            if floor > 0.0 {
                cap = cap.min(self.kernel.support_radius() * self.h / floor.sqrt());
            }
        }
        (floor, cap)
    }

    #[inline]
    fn term(&self, i: usize, t: &[f64], floor: f64) -> f64 {
        let a = match &self.scales {
            Scales::Unit => 1.0,
            Scales::PerPoint(a) => a[i],
            Scales::Abramson { density_at_obs, .. } => density_at_obs[i].max(floor).sqrt(),
        };
        if a == 0.0 {
            return 0.0;
        }
        let x = self.sample.point(i);
        if let Some(b) = self.cutoff {
            if !((t[0] - x[0]).abs() < b) {
                return 0.0;
            }
        }
        let scale = a / self.h;
        let s: f64 = t
            .iter()
            .zip(x)
            .map(|(ti, xi)| {
                let u = scale * (ti - xi);
                u * u
            })
            .sum();
        let k = self.kernel.phi(s);
        if k == 0.0 {
            return 0.0;
        }
        a.powi(t.len() as i32) * k
    }

    /// Estimate at `t`; windowed for `d = 1`.
    pub fn eval(&self, t: &[f64]) -> f64 {
        debug_assert_eq!(t.len(), self.sample.dim());
        let (floor, cap) = self.context(t);
        let raw = match &self.index {
            Some(index) => index.sum(t[0], cap, |i| self.term(i, t, floor)),
            None => pairwise_sum_by(0, self.sample.n(), &|i| self.term(i, t, floor)),
        };
        raw * self.norm
    }

    /// Estimate at `t` summing over every observation.
    pub fn eval_brute(&self, t: &[f64]) -> f64 {
        let (floor, _) = self.context(t);
        pairwise_sum_by(0, self.sample.n(), &|i| self.term(i, t, floor)) * self.norm
    }

    /// Estimate at observation `i` (used for pilot values).
    pub fn eval_at_observation(&self, i: usize) -> f64 {
        self.eval(self.sample.point(i))
    }

    pub fn eval_grid(&self, grid: &Grid, exec: Exec, windowed: bool) -> Vec<f64> {
        exec.map(grid.len(), |j| {
            if windowed {
                self.eval(grid.point(j))
            } else {
                self.eval_brute(grid.point(j))
            }
        })
    }

    /// `∫ f̂(t) dt` over the real line (d = 1). With fixed per-point factors
    /// each term is integrated on its own polynomial pieces, which is exact up
    /// to rounding for the builtin kernels. Abramson's factor moves with `t`,
    /// so that estimate is integrated as a whole between support breakpoints.
    pub fn total_mass(&self, exec: Exec) -> Result<f64> {
        if self.sample.dim() != 1 {
            return Err(Error::Unsupported("total_mass needs d = 1".into()));
        }
        let rule = mass_rule();
        let reach = self.kernel.support_radius() * self.h;
        if let Scales::Abramson { density_at_obs, .. } = &self.scales {
            if density_at_obs.iter().any(|&f| !(f > 0.0)) {
                return Err(Error::Unsupported(
                    "mass of Abramson estimate with zero-density observations".into(),
                ));
            }
            let mut breaks = Vec::with_capacity(3 * self.sample.n());
            for (i, &f) in density_at_obs.iter().enumerate() {
                let (x, r) = (self.sample.first(i), reach / f.sqrt());
                breaks.extend([x - r, x, x + r]);
            }
            breaks.sort_unstable_by(f64::total_cmp);
            breaks.dedup();
            let parts = exec.map(breaks.len().saturating_sub(1), |k| {
                rule.integrate(breaks[k], breaks[k + 1], |t| self.eval(&[t]))
            });
            return Ok(pairwise_sum(&parts));
        }
        let parts = exec.map(self.sample.n(), |i| {
            let r = match &self.scales {
                Scales::PerPoint(a) if a[i] > 0.0 => reach / a[i],
                Scales::PerPoint(_) => return 0.0,
                _ => reach,
            };
            let x = self.sample.first(i);
            let mut knots = vec![x - r, x, x + r];
            if let Some(b) = self.cutoff.filter(|b| *b < r) {
                knots.extend([x - b, x + b]);
            }
            knots.sort_unstable_by(f64::total_cmp);
            knots
                .windows(2)
                .map(|w| rule.integrate(w[0], w[1], |t| self.term(i, &[t], 0.0)))
                .sum::<f64>()
        });
        Ok(pairwise_sum(&parts) * self.norm)
    }
}

fn mass_rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(8))
}

/// Pilot values `f̂(Xᵢ; h₁)` at every observation.
pub fn pilot_values(
    sample: &Sample,
    kernel: &Kernel,
    h1: f64,
    mode: PilotMode,
    exec: Exec,
) -> Result<Vec<f64>> {
    let pilot = KernelSum::unit(sample, kernel, h1)?;
    let n = sample.n();
    if mode == PilotMode::LeaveOneOut && n < 2 {
        return Err(Error::arg("leave-one-out pilot needs at least two observations"));
    }
    let self_term = kernel.phi(0.0) / (n as f64 * h1.powi(sample.dim() as i32));
    Ok(exec.map(n, |i| {
        let v = pilot.eval_at_observation(i);
        match mode {
            PilotMode::LeaveSelfIn => v,
            PilotMode::LeaveOneOut => ((v - self_term) * n as f64 / (n - 1) as f64).max(0.0),
        }
    }))
}

/// Evaluation policy: threading and windowing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Evaluator {
    pub exec: Exec,
    pub windowed: bool,
    pub pilot: PilotMode,
}

impl Default for Evaluator {
    fn default() -> Self {
        Self {
            exec: Exec::Parallel,
            windowed: true,
            pilot: PilotMode::LeaveSelfIn,
        }
    }
}

fn check_oracle(model: DensityModel, sample: &Sample) -> Result<()> {
    if model.dim() != sample.dim() {
        return Err(Error::arg(format!(
            "model `{}` has dimension {}, sample has {}",
            model.name(),
            model.dim(),
            sample.dim()
        )));
    }
    Ok(())
}

fn check_grid(grid: &Grid, sample: &Sample) -> Result<()> {
    if grid.dim() != sample.dim() {
        return Err(Error::arg(format!(
            "grid dimension {} does not match sample dimension {}",
            grid.dim(),
            sample.dim()
        )));
    }
    Ok(())
}

impl Evaluator {
    pub fn sequential() -> Self {
        Self {
            exec: Exec::Sequential,
            ..Self::default()
        }
    }

    pub fn brute_force() -> Self {
        Self {
            windowed: false,
            ..Self::default()
        }
    }

    fn finish(
        &self,
        sum: &KernelSum<'_>,
        grid: &Grid,
        kind: EstimatorKind,
        h1: Option<f64>,
        c: Option<f64>,
    ) -> Result<DensityEstimate> {
        check_grid(grid, sum.sample)?;
        let values = sum.eval_grid(grid, self.exec, self.windowed);
        Ok(DensityEstimate {
            grid: grid.clone(),
            values,
            kind,
            h: sum.h,
            h1,
            c,
            kernel: sum.kernel.name().to_string(),
            n: sum.sample.n(),
        })
    }

    pub fn classical_kde(&self, sample: &Sample, kernel: &Kernel, h: f64, grid: &Grid) -> Result<DensityEstimate> {
        let sum = KernelSum::unit(sample, kernel, h)?;
        self.finish(&sum, grid, EstimatorKind::Classical, None, None)
    }

    pub fn ideal_vkde(
        &self,
        sample: &Sample,
        kernel: &Kernel,
        h: f64,
        clipping: &ClippingSpec,
        model: DensityModel,
        grid: &Grid,
    ) -> Result<DensityEstimate> {
        let sum = ideal_sum(sample, kernel, h, clipping, model)?;
        self.finish(&sum, grid, EstimatorKind::IdealVkde, None, Some(clipping.c()))
    }

    pub fn plugin_vkde(
        &self,
        sample: &Sample,
        kernel: &Kernel,
        bw: BandwidthPair,
        clipping: &ClippingSpec,
        grid: &Grid,
    ) -> Result<DensityEstimate> {
        let sum = plugin_sum(sample, kernel, bw, clipping, self.pilot, self.exec)?;
        self.finish(&sum, grid, EstimatorKind::PluginVkde, Some(bw.h1), Some(clipping.c()))
    }

    pub fn abramson(
        &self,
        sample: &Sample,
        kernel: &Kernel,
        h: f64,
        model: DensityModel,
        grid: &Grid,
    ) -> Result<DensityEstimate> {
        let sum = abramson_sum(sample, kernel, h, model)?;
        self.finish(&sum, grid, EstimatorKind::Abramson, None, None)
    }

    pub fn hall_marron(
        &self,
        sample: &Sample,
        kernel: &Kernel,
        h: f64,
        model: DensityModel,
        grid: &Grid,
    ) -> Result<DensityEstimate> {
        let sum = hall_marron_sum(sample, kernel, h, model)?;
        self.finish(&sum, grid, EstimatorKind::HallMarron, None, None)
    }

    /// `b = f64::INFINITY` disables the indicator.
    pub fn hhm(
        &self,
        sample: &Sample,
        kernel: &Kernel,
        h: f64,
        model: DensityModel,
        b: f64,
        grid: &Grid,
    ) -> Result<DensityEstimate> {
        let sum = hhm_sum(sample, kernel, h, model, b)?;
        self.finish(&sum, grid, EstimatorKind::Hhm, None, None)
    }
}

/// Ideal estimator with factors `α(f(Xᵢ))`.
pub fn ideal_sum<'a>(
    sample: &'a Sample,
    kernel: &'a Kernel,
    h: f64,
    clipping: &ClippingSpec,
    model: DensityModel,
) -> Result<KernelSum<'a>> {
    check_oracle(model, sample)?;
    let a = sample.rows().map(|x| clipping.alpha(model.pdf(x))).collect();
    KernelSum::scaled(sample, kernel, h, a)
}

/// Plug-in estimator with factors `α(f̂(Xᵢ; h₁))`.
pub fn plugin_sum<'a>(
    sample: &'a Sample,
    kernel: &'a Kernel,
    bw: BandwidthPair,
    clipping: &ClippingSpec,
    mode: PilotMode,
    exec: Exec,
) -> Result<KernelSum<'a>> {
    let pilot = pilot_values(sample, kernel, bw.h1, mode, exec)?;
    let a = pilot.iter().map(|&f| clipping.alpha(f)).collect();
    KernelSum::scaled(sample, kernel, bw.h2, a)
}

pub fn hall_marron_sum<'a>(
    sample: &'a Sample,
    kernel: &'a Kernel,
    h: f64,
    model: DensityModel,
) -> Result<KernelSum<'a>> {
    check_oracle(model, sample)?;
    let a = sample.rows().map(|x| model.pdf(x).sqrt()).collect();
    KernelSum::scaled(sample, kernel, h, a)
}

pub fn abramson_sum<'a>(
    sample: &'a Sample,
    kernel: &'a Kernel,
    h: f64,
    model: DensityModel,
) -> Result<KernelSum<'a>> {
    check_oracle(model, sample)?;
    let density_at_obs = sample.rows().map(|x| model.pdf(x)).collect();
    KernelSum::new(
        sample,
        kernel,
        h,
        Scales::Abramson {
            density_at_obs,
            model,
        },
        None,
    )
}

pub fn hhm_sum<'a>(
    sample: &'a Sample,
    kernel: &'a Kernel,
    h: f64,
    model: DensityModel,
    b: f64,
) -> Result<KernelSum<'a>> {
    if sample.dim() != 1 {
        return Err(Error::Unsupported(
            "the Hall-Hu-Marron estimator is one-dimensional".into(),
        ));
    }
    if !(b >= 0.0) {
        return Err(Error::arg(format!("HHM constant B must be nonnegative, got {b}")));
    }
    check_oracle(model, sample)?;
    check_bandwidth(h)?;
    let a = sample.rows().map(|x| model.pdf(x).sqrt()).collect();
    let cutoff = b.is_finite().then_some(h * b);
    KernelSum::new(sample, kernel, h, Scales::PerPoint(a), cutoff)
}

/// Plug-in estimate at a single point, computing pilot values only for the
/// observations that can reach `t`.
pub fn plugin_vkde_at(
    sample: &Sample,
    kernel: &Kernel,
    bw: BandwidthPair,
    clipping: &ClippingSpec,
    mode: PilotMode,
    t: &[f64],
) -> Result<f64> {
    let pilot = KernelSum::unit(sample, kernel, bw.h1)?;
    check_bandwidth(bw.h2)?;
    let n = sample.n();
    if mode == PilotMode::LeaveOneOut && n < 2 {
        return Err(Error::arg("leave-one-out pilot needs at least two observations"));
    }
    let d = sample.dim() as i32;
    let self_term = kernel.phi(0.0) / (n as f64 * bw.h1.powi(d));
    let range = if sample.dim() == 1 {
        window_range(sample.values(), t[0], kernel.support_radius() * bw.h2 / clipping.c() * (1.0 + 1e-12))
    } else {
        0..n
    };
    let term = |i: usize| {
        let x = sample.point(i);
        let scale_h = 1.0 / bw.h2;
        let s0: f64 = t
            .iter()
            .zip(x)
            .map(|(a, b)| (scale_h * (a - b)).powi(2))
            .sum();
        // Cheap rejection before the pilot: α ≥ c.
        if s0 * clipping.c() * clipping.c() > kernel.support_radius().powi(2) {
            return 0.0;
        }
        let mut f = pilot.eval_at_observation(i);
        if mode == PilotMode::LeaveOneOut {
            f = ((f - self_term) * n as f64 / (n - 1) as f64).max(0.0);
        }
        let a = clipping.alpha(f);
        a.powi(d) * kernel.phi(s0 * a * a)
    };
    let raw = pairwise_sum_by(range.start, range.end, &term);
    Ok(raw / (n as f64 * bw.h2.powi(d)))
}

/// Normal-reference bandwidth `0.9·min(sd, IQR/1.34)·n^{-1/5}`, taken as
/// the kernel's standard deviation and converted to the kernel's own
/// scale by dividing by `√τ₂`.
pub fn silverman_bandwidth(sample: &Sample, kernel: &Kernel) -> Result<f64> {
    if sample.dim() != 1 || kernel.dim() != 1 {
        return Err(Error::Unsupported("Silverman bandwidth needs d = 1".into()));
    }
    let xs = sample.values();
    let n = xs.len();
    if n < 2 {
        return Err(Error::arg("Silverman bandwidth needs at least two observations"));
    }
    let mean = pairwise_sum(xs) / n as f64;
    let var = pairwise_sum(&xs.iter().map(|x| (x - mean).powi(2)).collect::<Vec<_>>())
        / (n - 1) as f64;
    let iqr = crate::clipping::lower_quantile(xs, 0.75) - crate::clipping::lower_quantile(xs, 0.25);
    let mut spread = var.sqrt().min(iqr / 1.34);
    if !(spread > 0.0) {
        spread = var.sqrt();
    }
    if !(spread > 0.0) {
        return Err(Error::domain("sample has zero spread"));
    }
    let bw = 0.9 * spread * (n as f64).powf(-0.2);
    let tau2 = compute_moments(kernel, 4)?
        .tau_1d(2)
        .expect("second moment is computed");
    Ok(bw / tau2.sqrt())
}

/// `m` equispaced points over the data range padded by `pad` (d = 1), or an
/// `⌈√m⌉²` tensor grid (d = 2).
pub fn default_grid(sample: &Sample, pad: f64, m: usize) -> Result<Grid> {
    let bounds = sample.bounds();
    match sample.dim() {
        1 => {
            let (lo, hi) = bounds[0];
            Ok(Grid::linspace(lo - pad, hi + pad, m))
        }
        2 => {
            let k = (m as f64).sqrt().ceil() as usize;
            let ax: Vec<Vec<f64>> = bounds
                .iter()
                .map(|&(lo, hi)| Grid::linspace(lo - pad, hi + pad, k).values().to_vec())
                .collect();
            let mut pts = Vec::with_capacity(2 * k * k);
            for &x in &ax[0] {
                for &y in &ax[1] {
                    pts.extend([x, y]);
                }
            }
            Grid::new(pts, 2)
        }
        d => Err(Error::Unsupported(format!("default grid for d = {d}"))),
    }
}

pub fn classical_kde(sample: &Sample, kernel: &Kernel, h: f64, grid: &Grid) -> Result<DensityEstimate> {
    Evaluator::default().classical_kde(sample, kernel, h, grid)
}

pub fn ideal_vkde(
    sample: &Sample,
    kernel: &Kernel,
    h: f64,
    clipping: &ClippingSpec,
    model: DensityModel,
    grid: &Grid,
) -> Result<DensityEstimate> {
    Evaluator::default().ideal_vkde(sample, kernel, h, clipping, model, grid)
}

pub fn plugin_vkde(
    sample: &Sample,
    kernel: &Kernel,
    bw: BandwidthPair,
    clipping: &ClippingSpec,
    grid: &Grid,
) -> Result<DensityEstimate> {
    Evaluator::default().plugin_vkde(sample, kernel, bw, clipping, grid)
}

pub fn abramson(sample: &Sample, kernel: &Kernel, h: f64, model: DensityModel, grid: &Grid) -> Result<DensityEstimate> {
    Evaluator::default().abramson(sample, kernel, h, model, grid)
}

pub fn hall_marron(sample: &Sample, kernel: &Kernel, h: f64, model: DensityModel, grid: &Grid) -> Result<DensityEstimate> {
    Evaluator::default().hall_marron(sample, kernel, h, model, grid)
}

pub fn hhm(
    sample: &Sample,
    kernel: &Kernel,
    h: f64,
    model: DensityModel,
    b: f64,
    grid: &Grid,
) -> Result<DensityEstimate> {
    Evaluator::default().hhm(sample, kernel, h, model, b, grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tricube() -> Kernel {
        Kernel::tricube()
    }

    #[test]
    fn single_point_classical() {
        let s = Sample::from_1d(vec![0.0]).unwrap();
        let g = Grid::from_1d(vec![0.0]);
        let e = classical_kde(&s, &tricube(), 1.0, &g).unwrap();
        assert!((e.values[0] - 70.0 / 81.0).abs() < 1e-15);
    }

    #[test]
    fn support_edges_contribute_nothing() {
        let s = Sample::from_1d(vec![-1.0, 1.0]).unwrap();
        let e = classical_kde(&s, &tricube(), 1.0, &Grid::from_1d(vec![0.0])).unwrap();
        assert_eq!(e.values[0], 0.0);
    }

    #[test]
    fn ideal_single_point() {
        // c = 1, f(X₁) = 4 ⇒ α = 2; value at 0 is 2·K(0)/h.
        struct Flat;
        let _ = Flat;
        let s = Sample::from_1d(vec![0.0]).unwrap();
        let clipping = ClippingSpec::quintic(1.0).unwrap();
        let k = tricube();
        let a = clipping.alpha(4.0);
        assert_eq!(a, 2.0);
        let h = 0.5;
        let sum = KernelSum::scaled(&s, &k, h, vec![a]).unwrap();
        let v = sum.eval(&[0.0]);
        assert!((v - 2.0 * k.phi(0.0) / h).abs() < 1e-14);
    }

    #[test]
    fn empty_and_bad_inputs() {
        let s = Sample::from_1d(vec![0.0, 1.0]).unwrap();
        let g = Grid::from_1d(vec![0.0]);
        assert!(classical_kde(&s, &tricube(), 0.0, &g).is_err());
        assert!(classical_kde(&s, &Kernel::biweight(2), 1.0, &g).is_err());
        assert!(hhm(&s, &tricube(), 1.0, DensityModel::Normal, -1.0, &g).is_err());
        let s2 = Sample::new(vec![0.0, 0.0], 2).unwrap();
        let g2 = Grid::new(vec![0.0, 0.0], 2).unwrap();
        assert!(matches!(
            hhm(&s2, &Kernel::biweight(2), 1.0, DensityModel::Normal2d, 1.0, &g2),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn window_edge_cases() {
        let s = Sample::from_1d(vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(fast_eval_window(&s, -10.0, 1.0).unwrap(), 0..0);
        assert_eq!(fast_eval_window(&s, 2.0, 100.0).unwrap(), 0..3);
        assert_eq!(fast_eval_window(&s, 2.0, 1.0).unwrap(), 0..3);
        assert_eq!(fast_eval_window(&s, 2.0, 0.5).unwrap(), 1..2);
        assert_eq!(fast_eval_window(&s, 10.0, 1.0).unwrap(), 3..3);
    }

    #[test]
    fn hhm_limits() {
        let model = DensityModel::Normal;
        let s = Sample::from_1d(model.sample(3, 200)).unwrap();
        let g = Grid::linspace(-3.0, 3.0, 61);
        let k = tricube();
        let inf = hhm(&s, &k, 0.4, model, f64::INFINITY, &g).unwrap();
        let hm = hall_marron(&s, &k, 0.4, model, &g).unwrap();
        for (a, b) in inf.values.iter().zip(&hm.values) {
            assert!((a - b).abs() < 1e-14);
        }
        let zero = hhm(&s, &k, 0.4, model, 0.0, &g).unwrap();
        assert!(zero.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn hall_marron_with_unit_density_is_classical() {
        // Pareto (Lomax) has f(0) = 1; put every observation at 0.
        let s = Sample::from_1d(vec![0.0; 5]).unwrap();
        let g = Grid::linspace(-1.0, 1.0, 21);
        let k = tricube();
        let hm = hall_marron(&s, &k, 0.7, DensityModel::Pareto, &g).unwrap();
        let cl = classical_kde(&s, &k, 0.7, &g).unwrap();
        assert_eq!(hm.values, cl.values);
    }

    #[test]
    fn abramson_equals_hall_marron_when_floor_inactive() {
        // All observations in a region where f(Xᵢ) ≥ f(t)/10 for every grid t.
        let model = DensityModel::Normal;
        let s = Sample::from_1d(vec![-0.3, -0.1, 0.0, 0.2, 0.4]).unwrap();
        let g = Grid::linspace(-1.0, 1.0, 41);
        let k = tricube();
        let ab = abramson(&s, &k, 0.8, model, &g).unwrap();
        let hm = hall_marron(&s, &k, 0.8, model, &g).unwrap();
        for (a, b) in ab.values.iter().zip(&hm.values) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn abramson_zero_density_point_is_finite() {
        let s = Sample::from_1d(vec![0.1, 0.5, 2.0]).unwrap();
        let e = abramson(&s, &tricube(), 1.0, DensityModel::Pareto, &Grid::from_1d(vec![-0.5])).unwrap();
        assert!(e.values[0].is_finite() && e.values[0] >= 0.0);
    }

    #[test]
    fn abramson_mass_differs_from_one() {
        // Bimodal sample under a unimodal oracle: observations far in the
        // tails get tiny f(Xᵢ) and the t-dependent floor breaks unit mass.
        let model = DensityModel::Normal;
        let mut xs: Vec<f64> = (0..40).map(|i| -3.0 + 0.01 * i as f64).collect();
        xs.extend((0..40).map(|i| 3.0 + 0.01 * i as f64));
        let s = Sample::from_1d(xs).unwrap();
        let k = tricube();
        let sum = abramson_sum(&s, &k, 0.5, model).unwrap();
        let g = Grid::linspace(-40.0, 40.0, 200_001);
        let vals = sum.eval_grid(&g, Exec::Parallel, true);
        let mass = crate::quadrature::trapezoid(g.values(), &vals);
        assert!((mass - 1.0).abs() > 1e-3, "mass {mass}");
    }

    #[test]
    fn plugin_point_matches_grid() {
        let model = DensityModel::StudentT4;
        let s = Sample::from_1d(model.sample(17, 3000)).unwrap();
        let k = tricube();
        let bw = BandwidthPair::default_rates(s.n(), 1);
        let clipping = ClippingSpec::quintic(0.3).unwrap();
        let pts = [-2.0, -0.3, 0.0, 0.8, 4.0];
        let grid = Grid::from_1d(pts.to_vec());
        for mode in [PilotMode::LeaveSelfIn, PilotMode::LeaveOneOut] {
            let ev = Evaluator {
                pilot: mode,
                ..Evaluator::default()
            };
            let est = ev.plugin_vkde(&s, &k, bw, &clipping, &grid).unwrap();
            for (t, v) in pts.iter().zip(&est.values) {
                let p = plugin_vkde_at(&s, &k, bw, &clipping, mode, &[*t]).unwrap();
                assert!((p - v).abs() < 1e-12, "{mode:?} at {t}: {p} vs {v}");
            }
        }
    }

    #[test]
    fn leave_one_out_removes_self_term() {
        let s = Sample::from_1d(vec![0.0, 10.0]).unwrap();
        let k = tricube();
        let loo = pilot_values(&s, &k, 1.0, PilotMode::LeaveOneOut, Exec::Sequential).unwrap();
        assert_eq!(loo, vec![0.0, 0.0]);
        let lsi = pilot_values(&s, &k, 1.0, PilotMode::LeaveSelfIn, Exec::Sequential).unwrap();
        assert!((lsi[0] - k.phi(0.0) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn silverman_positive_and_scaled() {
        let s = Sample::from_1d(DensityModel::Normal.sample(1, 1000)).unwrap();
        let h = silverman_bandwidth(&s, &tricube()).unwrap();
        // sd-scale ≈ 0.9·1000^{-1/5} ≈ 0.226; tricube √τ₂ ≈ 0.3795.
        assert!(h > 0.45 && h < 0.75, "{h}");
    }

    #[test]
    fn kind_names_round_trip() {
        for k in EstimatorKind::ALL {
            assert_eq!(k.name().parse::<EstimatorKind>().unwrap(), k);
        }
        assert!("bogus".parse::<EstimatorKind>().is_err());
    }

    #[test]
    fn two_dimensional_classical_mass() {
        let model = DensityModel::Normal2d;
        let s = Sample::new(model.sample(5, 50), 2).unwrap();
        let k = Kernel::biweight(2);
        let sum = KernelSum::unit(&s, &k, 0.6).unwrap();
        let (bx, by) = (s.bounds()[0], s.bounds()[1]);
        let gl = GaussLegendre::new(16);
        let lo = bx.0.min(by.0) - 0.7;
        let hi = bx.1.max(by.1) + 0.7;
        let mass = gl.integrate_box(lo, hi, 2, 40, |p| sum.eval(p));
        assert!((mass - 1.0).abs() < 1e-3, "{mass}");
    }
}
