//! Asymptotic bias and variance constants, confidence intervals, IMSE and
//! the optimal main bandwidth, plus the pilot rate diagnostic `U(h₁)`.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::clipping::ClippingSpec;
use crate::densities::{DensityModel, DENSITY_FLOOR};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::kernel::{Kernel, KernelMoments, MultiIndex};
use crate::numdiff::{partial, scaled_steps, Stencil};
use crate::quadrature::{pairwise_sum, GaussLegendre};

/// `D_r = {t : f(t) > r > t₀c², ‖t‖ < 1/r}`.
#[derive(Debug, Clone)]
pub struct EvaluationRegion {
    r: f64,
    model: DensityModel,
}

impl EvaluationRegion {
    pub fn new(r: f64, model: DensityModel, clipping: &ClippingSpec) -> Result<Self> {
        if !(r.is_finite() && r > clipping.threshold()) {
            return Err(Error::arg(format!(
                "region level r = {r} must exceed t0·c² = {}",
                clipping.threshold()
            )));
        }
        Ok(Self { r, model })
    }

    /// `r = 1.25·t₀c²`.
    pub fn auto(model: DensityModel, clipping: &ClippingSpec) -> Result<Self> {
        Self::new(1.25 * clipping.threshold(), model, clipping)
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn model(&self) -> DensityModel {
        self.model
    }

    pub fn contains(&self, t: &[f64]) -> bool {
        let norm = t.iter().map(|x| x * x).sum::<f64>().sqrt();
        norm < 1.0 / self.r && self.model.pdf(t) > self.r
    }

    /// Cells of a `cells_per_axis`-per-axis grid over `[−1/r, 1/r]^d` whose
    /// corners and centre all lie in the region, as `(lo, hi)` corner pairs.
    pub fn inner_cells(&self, cells_per_axis: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
        let d = self.model.dim();
        let a = 1.0 / self.r;
        let w = 2.0 * a / cells_per_axis as f64;
        let total = cells_per_axis.pow(d as u32);
        let mut out = Vec::new();
        for flat in 0..total {
            let mut rem = flat;
            let mut lo = vec![0.0; d];
            for x in lo.iter_mut() {
                *x = -a + (rem % cells_per_axis) as f64 * w;
                rem /= cells_per_axis;
            }
            let hi: Vec<f64> = lo.iter().map(|x| x + w).collect();
            let centre: Vec<f64> = lo.iter().map(|x| x + 0.5 * w).collect();
            let inside = self.contains(&centre)
                && (0..1usize << d).all(|mask| {
                    let corner: Vec<f64> = (0..d)
                        .map(|j| if mask >> j & 1 == 1 { hi[j] } else { lo[j] })
                        .collect();
                    self.contains(&corner)
                });
            if inside {
                out.push((lo, hi));
            }
        }
        out
    }
}

fn check_density(model: DensityModel, t: &[f64]) -> Result<f64> {
    if t.len() != model.dim() {
        return Err(Error::arg(format!(
            "point has dimension {}, model `{}` has {}",
            t.len(),
            model.name(),
            model.dim()
        )));
    }
    let f = model.pdf(t);
    if !(f > DENSITY_FLOOR) {
        return Err(Error::domain(format!(
            "density of `{}` at {t:?} is {f}, below floor {DENSITY_FLOOR}",
            model.name()
        )));
    }
    Ok(f)
}

/// `B(t) = Σ_{|v|=4} τ_v D_v(1/f)(t) / v!`, the coefficient of `h⁴` in the
/// bias of the variable-bandwidth estimators.
pub fn bias_constant(model: DensityModel, moments: &KernelMoments, t: &[f64]) -> Result<f64> {
    if moments.dim != model.dim() {
        return Err(Error::arg("kernel moments and model differ in dimension"));
    }
    let d4 = model.inv_f_d4(t)?;
    let mut total = 0.0;
    for (v, dv) in &d4 {
        let tau = moments
            .tau(v)
            .ok_or_else(|| Error::arg(format!("fourth moment τ_{v} not computed")))?;
        total += tau * dv / v.factorial();
    }
    Ok(total)
}

/// Coefficient `a_order(t)` in the variance expansion of the ideal
/// estimator: `a₀ = α^d f μ₀`, `a₂ = Σ_{|v|=2} (μ_v/v!) D_v(f·α^{d−2})`,
/// and zero for odd orders.
pub fn ideal_variance_coeffs(
    model: DensityModel,
    moments: &KernelMoments,
    clipping: &ClippingSpec,
    t: &[f64],
    order: u32,
) -> Result<f64> {
    let f = check_density(model, t)?;
    let d = model.dim() as i32;
    match order {
        o if o % 2 == 1 => Ok(0.0),
        0 => Ok(clipping.alpha(f).powi(d) * f * moments.mu0),
        2 => {
            let g = |x: &[f64]| {
                let fx = model.pdf(x);
                fx * clipping.alpha(fx).powi(d - 2)
            };
            let steps = scaled_steps(t, 1e-2);
            let mut total = 0.0;
            for v in MultiIndex::all_of_order(model.dim(), 2) {
                let mu = moments
                    .mu(&v)
                    .ok_or_else(|| Error::arg(format!("moment μ_{v} not computed")))?;
                total += mu / v.factorial() * partial(g, t, &v, &steps, Stencil::Three);
            }
            Ok(total)
        }
        o => Err(Error::Unsupported(format!("variance coefficient a_{o}"))),
    }
}

/// CLT variance of the plug-in estimator at a point where the density
/// (true or estimated) equals `density`:
/// `α^d f μ₀ + f³[(α^d)′]²/(d² α^d) ∫L² + f²(α^d)′ μ₀`.
pub fn sigma_t2(density: f64, moments: &KernelMoments, clipping: &ClippingSpec) -> Result<f64> {
    if !(density > 0.0 && density.is_finite()) {
        return Err(Error::domain(format!(
            "density value must be positive, got {density}"
        )));
    }
    let d = moments.dim;
    let f = density;
    let ad = clipping.alpha(f).powi(d as i32);
    let adp = clipping.alpha_pow_d_prime(f, d);
    let dd = (d * d) as f64;
    Ok(ad * f * moments.mu0 + f.powi(3) * adp * adp / (dd * ad) * moments.r_of_l + f * f * adp * moments.mu0)
}

/// `σ_t²` with the true density at `t`.
pub fn sigma_t2_at(model: DensityModel, moments: &KernelMoments, clipping: &ClippingSpec, t: &[f64]) -> Result<f64> {
    let f = check_density(model, t)?;
    sigma_t2(f, moments, clipping)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConfidenceInterval {
    pub center: f64,
    pub lo: f64,
    pub hi: f64,
    pub half_width: f64,
    pub level: f64,
}

impl ConfidenceInterval {
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// `z_{(1+level)/2}`.
pub fn normal_quantile_two_sided(level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::arg(format!("confidence level {level} outside (0, 1)")));
    }
    let std = Normal::standard();
    Ok(std.inverse_cdf(0.5 * (1.0 + level)))
}

/// `estimate ± z·√(σ²/(n h₂^d))`, centred on the estimate.
pub fn confidence_interval(
    estimate: f64,
    n: usize,
    h2: f64,
    dim: usize,
    sigma2: f64,
    level: f64,
) -> Result<ConfidenceInterval> {
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(Error::domain(format!("σ² must be positive, got {sigma2}")));
    }
    if !(h2 > 0.0) || n == 0 {
        return Err(Error::arg("n and h2 must be positive"));
    }
    let z = normal_quantile_two_sided(level)?;
    let half_width = z * (sigma2 / (n as f64 * h2.powi(dim as i32))).sqrt();
    Ok(ConfidenceInterval {
        center: estimate,
        lo: estimate - half_width,
        hi: estimate + half_width,
        half_width,
        level,
    })
}

/// Interval re-centred at `estimate − B(t)·h₂⁴`; needs the oracle bias constant.
pub fn confidence_interval_bias_corrected(
    estimate: f64,
    n: usize,
    h2: f64,
    dim: usize,
    sigma2: f64,
    level: f64,
    bias_const: f64,
) -> Result<ConfidenceInterval> {
    confidence_interval(estimate - bias_const * h2.powi(4), n, h2, dim, sigma2, level)
}

/// `∫_{D_r} B²` and `∫_{D_r} σ_t²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionIntegrals {
    pub int_bias_sq: f64,
    pub int_sigma2: f64,
    /// Lebesgue measure of the cell approximation to `D_r`.
    pub measure: f64,
    pub dim: usize,
}

/// Cells per axis for region quadrature.
fn region_cells(dim: usize) -> usize {
    match dim {
        1 => 2048,
        2 => 256,
        _ => 32,
    }
}

pub fn region_integrals(
    moments: &KernelMoments,
    clipping: &ClippingSpec,
    region: &EvaluationRegion,
    exec: Exec,
) -> Result<RegionIntegrals> {
    let model = region.model();
    let dim = model.dim();
    if moments.dim != dim {
        return Err(Error::arg("kernel moments and model differ in dimension"));
    }
    let cells = region.inner_cells(region_cells(dim));
    if cells.is_empty() {
        return Err(Error::domain(format!(
            "evaluation region for `{}` with r = {} is empty",
            model.name(),
            region.r()
        )));
    }
    let rule = GaussLegendre::new(4);
    let parts: Vec<Result<(f64, f64, f64)>> = exec.map(cells.len(), |k| {
        let (lo, hi) = &cells[k];
        let mut b2 = Vec::new();
        let mut s2 = Vec::new();
        let mut vol = 0.0;
        // Tensor Gauss rule on the cell.
        let nodes: Vec<Vec<(f64, f64)>> = (0..dim).map(|j| rule.mapped(lo[j], hi[j]).collect()).collect();
        let m = rule.len();
        let mut point = vec![0.0; dim];
        for flat in 0..m.pow(dim as u32) {
            let mut rem = flat;
            let mut w = 1.0;
            for j in 0..dim {
                let (x, wx) = nodes[j][rem % m];
                rem /= m;
                point[j] = x;
                w *= wx;
            }
            let b = bias_constant(model, moments, &point)?;
            let s = sigma_t2_at(model, moments, clipping, &point)?;
            b2.push(w * b * b);
            s2.push(w * s);
            vol += w;
        }
        Ok((pairwise_sum(&b2), pairwise_sum(&s2), vol))
    });
    let mut b2 = Vec::with_capacity(parts.len());
    let mut s2 = Vec::with_capacity(parts.len());
    let mut vol = Vec::with_capacity(parts.len());
    for p in parts {
        let (b, s, v) = p?;
        b2.push(b);
        s2.push(s);
        vol.push(v);
    }
    Ok(RegionIntegrals {
        int_bias_sq: pairwise_sum(&b2),
        int_sigma2: pairwise_sum(&s2),
        measure: pairwise_sum(&vol),
        dim,
    })
}

impl RegionIntegrals {
    /// `h⁸ ∫B² + ∫σ²/(n h^d)`.
    pub fn imse(&self, h2: f64, n: usize) -> f64 {
        h2.powi(8) * self.int_bias_sq + self.int_sigma2 / (n as f64 * h2.powi(self.dim as i32))
    }

    pub fn optimal_bandwidth(&self, n: usize) -> Result<OptimalBandwidth> {
        if !(self.int_bias_sq > 0.0) {
            return Err(Error::domain(
                "integrated squared bias constant is zero: no interior optimum",
            ));
        }
        let d = self.dim as f64;
        let n = n as f64;
        let h_rate = (n * self.int_bias_sq / self.int_sigma2).powf(-1.0 / (8.0 + d));
        let h_exact = (d * self.int_sigma2 / (8.0 * n * self.int_bias_sq)).powf(1.0 / (8.0 + d));
        Ok(OptimalBandwidth {
            h_rate,
            h_exact,
            ratio: h_exact / h_rate,
        })
    }
}

pub fn imse(
    moments: &KernelMoments,
    clipping: &ClippingSpec,
    region: &EvaluationRegion,
    h2: f64,
    n: usize,
) -> Result<f64> {
    if !(h2 > 0.0) {
        return Err(Error::arg("h2 must be positive"));
    }
    Ok(region_integrals(moments, clipping, region, Exec::default())?.imse(h2, n))
}

/// Minimizers of the two-term IMSE.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimalBandwidth {
    /// `[n ∫B² / ∫σ²]^{−1/(8+d)}`, as the optimum is usually stated.
    pub h_rate: f64,
    /// `(d ∫σ² / (8n ∫B²))^{1/(8+d)}`, the true argmin; equals
    /// `h_rate·(d/8)^{1/(8+d)}`.
    pub h_exact: f64,
    pub ratio: f64,
}

pub fn optimal_bandwidth(
    moments: &KernelMoments,
    clipping: &ClippingSpec,
    region: &EvaluationRegion,
    n: usize,
) -> Result<OptimalBandwidth> {
    region_integrals(moments, clipping, region, Exec::default())?.optimal_bandwidth(n)
}

/// `U(h₁) = √(log(1/h₁)/(n h₁^d)) + h₁²`.
#[allow(non_snake_case)]
pub fn rate_diagnostic_U(h1: f64, n: usize, dim: usize) -> Result<f64> {
    if !(h1 > 0.0 && h1 < 1.0) {
        return Err(Error::arg(format!("h1 must lie in (0, 1), got {h1}")));
    }
    if n == 0 {
        return Err(Error::arg("n must be positive"));
    }
    Ok(((1.0 / h1).ln() / (n as f64 * h1.powi(dim as i32))).sqrt() + h1 * h1)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateCheck {
    pub u: f64,
    /// `U(h₁)/h₂²`; the asymptotics need this to vanish.
    pub ratio: f64,
    pub warning: Option<String>,
}

pub fn rate_check(h1: f64, h2: f64, n: usize, dim: usize) -> Result<RateCheck> {
    if !(h2 > 0.0) {
        return Err(Error::arg("h2 must be positive"));
    }
    let u = rate_diagnostic_U(h1, n, dim)?;
    let ratio = u / (h2 * h2);
    let warning = (ratio >= 1.0).then(|| {
        format!("U(h1)/h2^2 = {ratio:.4} is not small; pilot error may dominate the h2^4 bias")
    });
    Ok(RateCheck { u, ratio, warning })
}

/// Pointwise constants at `t` with the inputs that produced them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticSummary {
    pub at: Vec<f64>,
    pub model: String,
    pub kernel: String,
    pub c: f64,
    pub t0: f64,
    pub clip: String,
    pub density: f64,
    pub bias_constant: f64,
    pub ideal_variance_coeff: f64,
    pub sigma_t2: f64,
    pub warnings: Vec<String>,
}

/// Warning for kernels whose profile lacks a bounded second derivative, which
/// the asymptotic expansions assume.
pub fn kernel_warning(kernel: &Kernel) -> Option<String> {
    (!kernel.has_bounded_second_derivative()).then(|| {
        format!(
            "kernel `{}` does not have a uniformly bounded second derivative; asymptotic constants are indicative only",
            kernel.name()
        )
    })
}

pub fn summarize(
    model: DensityModel,
    kernel: &Kernel,
    moments: &KernelMoments,
    clipping: &ClippingSpec,
    t: &[f64],
) -> Result<AsymptoticSummary> {
    let density = check_density(model, t)?;
    let mut warnings: Vec<String> = kernel_warning(kernel).into_iter().collect();
    if density <= clipping.threshold() {
        warnings.push(format!(
            "f(t) = {density:.6} is at or below t0·c² = {:.6}; the point lies outside every D_r",
            clipping.threshold()
        ));
    }
    Ok(AsymptoticSummary {
        at: t.to_vec(),
        model: model.name().to_string(),
        kernel: moments.kernel.clone(),
        c: clipping.c(),
        t0: clipping.t0(),
        clip: clipping.kind().to_string(),
        density,
        bias_constant: bias_constant(model, moments, t)?,
        ideal_variance_coeff: ideal_variance_coeffs(model, moments, clipping, t, 0)?,
        sigma_t2: sigma_t2(density, moments, clipping)?,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::compute_moments;

    fn tricube_moments() -> KernelMoments {
        compute_moments(&Kernel::tricube(), 4).unwrap()
    }

    #[test]
    fn bias_constant_examples() {
        let m = tricube_moments();
        assert_eq!(bias_constant(DensityModel::Cauchy, &m, &[0.7]).unwrap(), 0.0);
        let b = bias_constant(DensityModel::Normal, &m, &[0.0]).unwrap();
        let expect = (1.0 / 22.0) * 3.0 * (2.0 * std::f64::consts::PI).sqrt() / 24.0;
        assert!((b - expect).abs() < 1e-12, "{b} vs {expect}");
        for t in [0.3, 1.1, 2.5] {
            let p = bias_constant(DensityModel::StudentT4, &m, &[t]).unwrap();
            let q = bias_constant(DensityModel::StudentT4, &m, &[-t]).unwrap();
            assert!((p - q).abs() < 1e-10 * p.abs().max(1.0));
        }
        assert!(matches!(
            bias_constant(DensityModel::Pareto, &m, &[-1.0]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn bias_constant_linear_in_tau4() {
        let mut m = tricube_moments();
        let b = bias_constant(DensityModel::Normal, &m, &[0.4]).unwrap();
        *m.tau.get_mut(&MultiIndex(vec![4])).unwrap() *= 2.0;
        let b2 = bias_constant(DensityModel::Normal, &m, &[0.4]).unwrap();
        assert!((b2 - 2.0 * b).abs() < 1e-14);
    }

    #[test]
    fn variance_coeffs() {
        let m = tricube_moments();
        let clipping = ClippingSpec::quintic(0.3).unwrap();
        let f0 = DensityModel::Normal.pdf1(0.0);
        let a0 = ideal_variance_coeffs(DensityModel::Normal, &m, &clipping, &[0.0], 0).unwrap();
        assert!((a0 - f0.powf(1.5) * m.mu0).abs() < 1e-14);
        assert_eq!(ideal_variance_coeffs(DensityModel::Normal, &m, &clipping, &[0.0], 1).unwrap(), 0.0);
        assert!(matches!(
            ideal_variance_coeffs(DensityModel::Normal, &m, &clipping, &[0.0], 4),
            Err(Error::Unsupported(_))
        ));
        // d = 1, unclipped: a₂ = (μ₂/2)(√f)″; for the standard normal at 0,
        // (√f)″(0) = −f(0)^{1/2}/2.
        let a2 = ideal_variance_coeffs(DensityModel::Normal, &m, &clipping, &[0.0], 2).unwrap();
        let mu2 = m.mu(&MultiIndex(vec![2])).unwrap();
        let expect = mu2 / 2.0 * (-0.5 * f0.sqrt());
        assert!(((a2 - expect) / expect).abs() < 1e-3, "{a2} vs {expect}");
        let s = sigma_t2_at(DensityModel::Normal, &m, &clipping, &[0.0]).unwrap();
        let first = clipping.alpha(f0) * f0 * m.mu0;
        assert!((first - a0).abs() < 1e-14);
        assert!(s > a0);
    }

    #[test]
    fn sigma_identities() {
        let m = tricube_moments();
        let clipping = ClippingSpec::quintic(0.3).unwrap();
        for i in 0..100 {
            let f = clipping.threshold() * (1.0 + i as f64 * 0.37);
            let s = sigma_t2(f, &m, &clipping).unwrap();
            let simple = f.powf(1.5) * (1.5 * m.mu0 + 0.25 * m.r_of_l);
            assert!(((s - simple) / simple).abs() < 1e-12);
        }
        // Fully clipped: the quintic floor is flat at 0, so f → 0⁺.
        let f = 1e-9;
        let s = sigma_t2(f, &m, &clipping).unwrap();
        assert!(((s - 0.3 * f * m.mu0) / s).abs() < 1e-9);
        assert!(sigma_t2(0.0, &m, &clipping).is_err());
    }

    #[test]
    fn interval_width() {
        let ci = confidence_interval(2.0, 1, 1.0, 1, 1.0, 0.95).unwrap();
        assert!((ci.half_width - 1.959_963_984_540_054).abs() < 1e-9);
        let narrow = confidence_interval(2.0, 1, 1.0, 1, 1.0, 1e-12).unwrap();
        assert!(narrow.half_width < 1e-11);
        assert!(confidence_interval(2.0, 1, 1.0, 1, 1.0, 1.0).is_err());
        assert!(confidence_interval(2.0, 1, 1.0, 1, 1.0, 0.0).is_err());
        let bc = confidence_interval_bias_corrected(2.0, 1, 0.5, 1, 1.0, 0.9, 16.0).unwrap();
        assert!((bc.center - 1.0).abs() < 1e-15);
    }

    #[test]
    fn region_membership() {
        let clipping = ClippingSpec::quintic(0.3).unwrap();
        assert!(EvaluationRegion::new(0.1, DensityModel::Normal, &clipping).is_err());
        let reg = EvaluationRegion::auto(DensityModel::Normal, &clipping).unwrap();
        assert!(reg.contains(&[0.0]));
        assert!(!reg.contains(&[3.0]));
        for (lo, hi) in reg.inner_cells(200) {
            for t in [lo[0], hi[0]] {
                let f = DensityModel::Normal.pdf1(t);
                assert!(f > clipping.threshold());
                assert_eq!(clipping.alpha(f), f.sqrt());
            }
        }
    }

    #[test]
    fn imse_and_optimum() {
        let m = tricube_moments();
        let clipping = ClippingSpec::quintic(0.3).unwrap();
        let reg = EvaluationRegion::auto(DensityModel::Normal, &clipping).unwrap();
        let ints = region_integrals(&m, &clipping, &reg, Exec::Parallel).unwrap();
        let n = 5000;
        let opt = ints.optimal_bandwidth(n).unwrap();
        assert!((opt.ratio - (1.0f64 / 8.0).powf(1.0 / 9.0)).abs() < 1e-12);
        let best = ints.imse(opt.h_exact, n);
        for k in 0..50 {
            let h = opt.h_exact * 2f64.powf(-2.0 + 4.0 * k as f64 / 49.0);
            assert!(ints.imse(h, n) >= best * (1.0 - 1e-14));
        }
        let opt2 = ints.optimal_bandwidth(2 * n).unwrap();
        assert!((opt2.h_exact / opt.h_exact - 2f64.powf(-1.0 / 9.0)).abs() < 1e-12);
        // Bias term scales by 2⁸ when h doubles.
        let b1 = ints.imse(0.3, n) - ints.int_sigma2 / (n as f64 * 0.3);
        let b2 = ints.imse(0.6, n) - ints.int_sigma2 / (n as f64 * 0.6);
        assert!((b2 / b1 - 256.0).abs() < 1e-8);

        let cauchy = EvaluationRegion::new(0.2, DensityModel::Cauchy, &clipping).unwrap();
        let ci = region_integrals(&m, &clipping, &cauchy, Exec::Parallel).unwrap();
        assert_eq!(ci.int_bias_sq, 0.0);
        assert!(ci.optimal_bandwidth(n).is_err());
        assert!(ci.imse(0.2, n) > ci.imse(0.4, n));
    }

    #[test]
    fn summary_warns_for_tricube() {
        let k = Kernel::tricube();
        let m = tricube_moments();
        let clipping = ClippingSpec::quintic(0.3).unwrap();
        let s = summarize(DensityModel::Normal, &k, &m, &clipping, &[0.0]).unwrap();
        assert_eq!(s.warnings.len(), 1);
        assert!(s.sigma_t2 > 0.0 && s.ideal_variance_coeff > 0.0);
        let b = Kernel::biweight(1);
        let mb = compute_moments(&b, 4).unwrap();
        let s = summarize(DensityModel::Normal, &b, &mb, &clipping, &[3.0]).unwrap();
        // Outside every D_r but no kernel warning.
        assert_eq!(s.warnings.len(), 1);
    }

    #[test]
    fn rate_diagnostic() {
        let n = 50_000usize;
        let h1 = (n as f64).powf(-0.2);
        let u = rate_diagnostic_U(h1, n, 1).unwrap();
        let direct = ((n as f64).powf(0.2).ln() / (n as f64 * h1)).sqrt() + (n as f64).powf(-0.4);
        assert!((u - direct).abs() < 1e-15);
        assert!(rate_diagnostic_U(1.0, n, 1).is_err());
        let mut last = f64::INFINITY;
        for e in 3..=7 {
            let n = 10usize.pow(e);
            let c = rate_check((n as f64).powf(-0.2), (n as f64).powf(-1.0 / 9.0), n, 1).unwrap();
            assert!(c.ratio < last);
            last = c.ratio;
        }
    }
}
