//! Radial kernels `K(t) = Φ(‖t‖²)` with compact support, their gradients, the
//! derived second-order kernel `L = d·K + Σ tᵢ ∂ᵢK`, and moment functionals.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;

const TRICUBE_SCALE: f64 = 70.0 / 81.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    /// `(70/81)(1 − s^{3/2})³`, i.e. `(70/81)(1 − |u|³)³` in one dimension.
    Tricube,
    /// `c_d (1 − s)₊`
    Epanechnikov,
    /// `c_d (1 − s)₊²`
    Biweight,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    name: &'static str,
    dim: usize,
    profile: Profile,
    /// Normalizing constant multiplying the unit profile.
    scale: f64,
    /// `T`: the profile vanishes for `s > T`.
    support_sq: f64,
    /// Whether Φ has a uniformly bounded second derivative.
    smooth: bool,
}

impl Kernel {
    pub fn tricube() -> Self {
        Self {
            name: "tricube",
            dim: 1,
            profile: Profile::Tricube,
            scale: TRICUBE_SCALE,
            support_sq: 1.0,
            smooth: false,
        }
    }

    pub fn epanechnikov(dim: usize) -> Self {
        Self {
            name: "epanechnikov",
            dim,
            profile: Profile::Epanechnikov,
            scale: ball_polynomial_normalizer(dim, 1),
            support_sq: 1.0,
            smooth: false,
        }
    }

    pub fn biweight(dim: usize) -> Self {
        Self {
            name: "biweight",
            dim,
            profile: Profile::Biweight,
            scale: ball_polynomial_normalizer(dim, 2),
            support_sq: 1.0,
            smooth: true,
        }
    }

    /// Looks a builtin kernel up by name for dimension `dim`.
    pub fn by_name(name: &str, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::arg("kernel dimension must be positive"));
        }
        match name.to_ascii_lowercase().as_str() {
            "tricube" if dim == 1 => Ok(Self::tricube()),
            "tricube" => Err(Error::Unsupported(format!(
                "tricube kernel is one-dimensional, requested d={dim}"
            ))),
            "epanechnikov" => Ok(Self::epanechnikov(dim)),
            "biweight" => Ok(Self::biweight(dim)),
            _ => Err(Error::Lookup {
                what: "kernel",
                name: name.to_string(),
            }),
        }
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn profile(&self) -> Profile {
        self.profile
    }

    pub fn support_radius(&self) -> f64 {
        self.support_sq.sqrt()
    }

    /// `false` when Φ″ is unbounded or discontinuous (Tricube, Epanechnikov).
    pub fn has_bounded_second_derivative(&self) -> bool {
        self.smooth
    }

    /// Φ(s), zero outside the support.
    #[inline]
    pub fn phi(&self, s: f64) -> f64 {
        if !(s <= self.support_sq) {
            return 0.0;
        }
        let s = s.max(0.0);
        let v = match self.profile {
            Profile::Tricube => {
                let a = 1.0 - s * s.sqrt();
                a * a * a
            }
            Profile::Epanechnikov => 1.0 - s,
            Profile::Biweight => {
                let a = 1.0 - s;
                a * a
            }
        };
        self.scale * v
    }

    /// Φ′(s); at the support boundary the one-sided inside limit.
    #[inline]
    pub fn phi_prime(&self, s: f64) -> f64 {
        if !(s <= self.support_sq) {
            return 0.0;
        }
        let s = s.max(0.0);
        let v = match self.profile {
            Profile::Tricube => {
                let r = s.sqrt();
                let a = 1.0 - s * r;
                -4.5 * a * a * r
            }
            Profile::Epanechnikov => -1.0,
            Profile::Biweight => -2.0 * (1.0 - s),
        };
        self.scale * v
    }

    /// The radial form of `L`: `d·Φ(s) + 2 s Φ′(s)` with `s = ‖t‖²`.
    #[inline]
    pub fn l_radial(&self, s: f64) -> f64 {
        self.dim as f64 * self.phi(s) + 2.0 * s * self.phi_prime(s)
    }

    fn check_dim(&self, t: &[f64]) -> Result<()> {
        if t.len() != self.dim {
            return Err(Error::arg(format!(
                "point has dimension {}, kernel `{}` expects {}",
                t.len(),
                self.name,
                self.dim
            )));
        }
        Ok(())
    }

    /// `K(t)`.
    pub fn eval(&self, t: &[f64]) -> Result<f64> {
        self.check_dim(t)?;
        Ok(self.phi(norm_sq(t)))
    }

    /// `∇K(t) = 2 Φ′(‖t‖²) t`.
    pub fn grad(&self, t: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(t)?;
        let g = 2.0 * self.phi_prime(norm_sq(t));
        Ok(t.iter().map(|x| g * x).collect())
    }

    /// `L(t) = d·K(t) + Σ tᵢ K′ᵢ(t)`.
    pub fn eval_l(&self, t: &[f64]) -> Result<f64> {
        self.check_dim(t)?;
        Ok(self.l_radial(norm_sq(t)))
    }
}

/// Normalizer of `(1 − ‖u‖²)₊^k` on the unit ball in `R^d`:
/// `Γ(d/2 + k + 1) / (π^{d/2} k!)`.
fn ball_polynomial_normalizer(dim: usize, k: u32) -> f64 {
    let half_d = dim as f64 / 2.0;
    let k_fact: f64 = (1..=k).map(f64::from).product();
    gamma(half_d + k as f64 + 1.0) / (std::f64::consts::PI.powf(half_d) * k_fact)
}

#[inline]
pub(crate) fn norm_sq(t: &[f64]) -> f64 {
    t.iter().map(|x| x * x).sum()
}

/// All builtin kernels available in dimension `dim`.
pub fn builtin_kernels(dim: usize) -> Vec<Kernel> {
    let mut out = Vec::new();
    if dim == 1 {
        out.push(Kernel::tricube());
    }
    if dim >= 1 {
        out.push(Kernel::epanechnikov(dim));
        out.push(Kernel::biweight(dim));
    }
    out
}

/// Exponent tuple `v = (v₁, …, v_d)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    /// `v! = v₁!⋯v_d!`
    pub fn factorial(&self) -> f64 {
        self.0
            .iter()
            .map(|&k| (1..=k).map(f64::from).product::<f64>())
            .product()
    }

    /// `u^v`
    pub fn monomial(&self, u: &[f64]) -> f64 {
        self.0.iter().zip(u).map(|(&k, x)| x.powi(k as i32)).product()
    }

    /// Every multi-index of dimension `dim` with `|v| = order`, in lexicographic order.
    pub fn all_of_order(dim: usize, order: u32) -> Vec<MultiIndex> {
        fn rec(dim: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            if cur.len() + 1 == dim {
                cur.push(left);
                out.push(MultiIndex(cur.clone()));
                cur.pop();
                return;
            }
            for k in (0..=left).rev() {
                cur.push(k);
                rec(dim, left - k, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        if dim > 0 {
            rec(dim, order, &mut Vec::with_capacity(dim), &mut out);
        }
        out
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|k| k.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for MultiIndex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.split(',')
            .map(|p| {
                p.trim()
                    .parse::<u32>()
                    .map_err(|_| Error::arg(format!("bad multi-index `{s}`")))
            })
            .collect::<Result<Vec<_>>>()
            .map(MultiIndex)
    }
}

impl Serialize for MultiIndex {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for MultiIndex {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Moment functionals of a kernel. Odd-order entries are identically zero
/// and not stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelMoments {
    pub kernel: String,
    pub dim: usize,
    /// `∫K²`
    pub mu0: f64,
    /// `∫L²`
    #[serde(rename = "r_of_L")]
    pub r_of_l: f64,
    /// `τ_v = ∫u^v K(u) du` for even `|v| ≤ max_order`.
    pub tau: BTreeMap<MultiIndex, f64>,
    /// `μ_v = ∫u^v K²(u) du` for even `|v| ≤ 2`.
    pub mu: BTreeMap<MultiIndex, f64>,
}

impl KernelMoments {
    /// `τ_v`; zero for odd `|v|`.
    pub fn tau(&self, v: &MultiIndex) -> Option<f64> {
        if v.order() % 2 == 1 {
            return Some(0.0);
        }
        self.tau.get(v).copied()
    }

    pub fn mu(&self, v: &MultiIndex) -> Option<f64> {
        if v.order() % 2 == 1 {
            return Some(0.0);
        }
        self.mu.get(v).copied()
    }

    /// One-dimensional shorthand for `τ_k`.
    pub fn tau_1d(&self, k: u32) -> Option<f64> {
        self.tau(&MultiIndex(vec![k]))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("moments serialize")
    }
}

/// Panels per axis for the tensor-product rule in `d ≥ 2`.
fn box_panels(dim: usize) -> usize {
    match dim {
        2 => 16,
        3 => 4,
        _ => 1,
    }
}

/// Computes `τ_v` (`|v| ≤ max_order`), `μ_v` (`|v| ≤ 2`), `μ₀` and `∫L²` by
/// composite 64-point Gauss–Legendre quadrature over the support box.
pub fn compute_moments(kernel: &Kernel, max_order: u32) -> Result<KernelMoments> {
    if max_order < 4 {
        return Err(Error::arg(format!(
            "max_order must be at least 4, got {max_order}"
        )));
    }
    let dim = kernel.dim();
    let tau_idx: Vec<MultiIndex> = (0..=max_order)
        .step_by(2)
        .flat_map(|k| MultiIndex::all_of_order(dim, k))
        .collect();
    let mu_idx: Vec<MultiIndex> = [0, 2]
        .iter()
        .flat_map(|&k| MultiIndex::all_of_order(dim, k))
        .collect();

    // One accumulator per functional: tau..., mu..., ∫L².
    let n_acc = tau_idx.len() + mu_idx.len() + 1;
    let rule = GaussLegendre::standard();
    let r = kernel.support_radius();
    let mut acc = vec![Neumaier::default(); n_acc];
    let mut add_node = |u: &[f64], w: f64| {
        let s = norm_sq(u);
        let k = kernel.phi(s);
        let l = kernel.l_radial(s);
        if k == 0.0 && l == 0.0 {
            return;
        }
        let mut j = 0;
        for v in &tau_idx {
            acc[j].add(w * v.monomial(u) * k);
            j += 1;
        }
        for v in &mu_idx {
            acc[j].add(w * v.monomial(u) * k * k);
            j += 1;
        }
        acc[j].add(w * l * l);
    };

    if dim == 1 {
        // The profiles are polynomials in |u|: split at 0 so every panel is exact.
        let breaks = [-r, -0.5 * r, 0.0, 0.5 * r, r];
        for p in breaks.windows(2) {
            for (x, w) in rule.mapped(p[0], p[1]) {
                add_node(&[x], w);
            }
        }
    } else {
        let panels = box_panels(dim);
        let step = 2.0 * r / panels as f64;
        let axis: Vec<(f64, f64)> = (0..panels)
            .flat_map(|p| {
                let a = -r + p as f64 * step;
                rule.mapped(a, a + step).collect::<Vec<_>>()
            })
            .collect();
        let m = axis.len();
        let mut u = vec![0.0; dim];
        for flat in 0..m.pow(dim as u32) {
            let mut rem = flat;
            let mut w = 1.0;
            for coord in u.iter_mut() {
                let (x, wx) = axis[rem % m];
                rem /= m;
                *coord = x;
                w *= wx;
            }
            add_node(&u, w);
        }
    }

    let values: Vec<f64> = acc.iter().map(Neumaier::value).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric(format!(
            "non-finite moment for kernel `{}`",
            kernel.name()
        )));
    }
    let tau: BTreeMap<MultiIndex, f64> = tau_idx
        .iter()
        .cloned()
        .zip(values.iter().copied())
        .collect();
    let mu: BTreeMap<MultiIndex, f64> = mu_idx
        .iter()
        .cloned()
        .zip(values[tau_idx.len()..].iter().copied())
        .collect();
    let mu0 = mu[&MultiIndex(vec![0; dim])];
    Ok(KernelMoments {
        kernel: kernel.name().to_string(),
        dim,
        mu0,
        r_of_l: values[n_acc - 1],
        tau,
        mu,
    })
}

#[derive(Debug, Clone, Copy, Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}
