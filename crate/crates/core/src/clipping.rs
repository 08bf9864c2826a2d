//! Clipping function `p` and the bandwidth factor `α(s) = c·√p(s/c²)`.
//!
//! `α ≥ c` everywhere, so per-observation bandwidths `h/α` never exceed `h/c`;
//! above `t₀c²` the factor follows the square-root law `α(s) = √s`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// A clipping function: `p ≥ 1` everywhere and `p(x) = x` for `x ≥ t₀`.
pub trait ClipFunction: Send + Sync {
    fn name(&self) -> &str;
    fn t0(&self) -> f64;
    fn p(&self, x: f64) -> f64;
    fn p_prime(&self, x: f64) -> f64;
    fn p_second(&self, x: f64) -> f64;
}

/// Five-times differentiable quintic-smooth clip with `t₀ = 2`:
/// `1 + (x⁶/64)(1 − 2u + 9/4 u² − 7/4 u³ + 7/8 u⁴)` with `u = x − 2` on `[0, 2]`.
#[derive(Debug, Clone, Copy, Default)]
pub struct QuinticClip;

impl QuinticClip {
    pub const NAME: &'static str = "gine-sang-quintic";
    pub const T0: f64 = 2.0;

    #[inline]
    fn q(u: f64) -> (f64, f64, f64) {
        let q = 1.0 + u * (-2.0 + u * (2.25 + u * (-1.75 + u * 0.875)));
        let dq = -2.0 + u * (4.5 + u * (-5.25 + u * 3.5));
        let ddq = 4.5 + u * (-10.5 + u * 10.5);
        (q, dq, ddq)
    }
}

impl ClipFunction for QuinticClip {
    fn name(&self) -> &str {
        Self::NAME
    }

    fn t0(&self) -> f64 {
        Self::T0
    }

    #[inline]
    fn p(&self, x: f64) -> f64 {
        if x >= Self::T0 {
            x
        } else if x <= 0.0 || x.is_nan() {
            1.0
        } else {
            let (q, _, _) = Self::q(x - 2.0);
            1.0 + x.powi(6) / 64.0 * q
        }
    }

    #[inline]
    fn p_prime(&self, x: f64) -> f64 {
        if x >= Self::T0 {
            1.0
        } else if x <= 0.0 || x.is_nan() {
            0.0
        } else {
            let (q, dq, _) = Self::q(x - 2.0);
            (6.0 * x.powi(5) * q + x.powi(6) * dq) / 64.0
        }
    }

    #[inline]
    fn p_second(&self, x: f64) -> f64 {
        if x >= Self::T0 || x <= 0.0 || x.is_nan() {
            0.0
        } else {
            let (q, dq, ddq) = Self::q(x - 2.0);
            (30.0 * x.powi(4) * q + 12.0 * x.powi(5) * dq + x.powi(6) * ddq) / 64.0
        }
    }
}

/// Clipping constant `c` together with a clipping function.
#[derive(Clone)]
pub struct ClippingSpec {
    c: f64,
    func: Arc<dyn ClipFunction>,
}

impl fmt::Debug for ClippingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ClippingSpec")
            .field("c", &self.c)
            .field("t0", &self.t0())
            .field("kind", &self.func.name())
            .finish()
    }
}

impl ClippingSpec {
    /// The builtin quintic clip with constant `c`.
    pub fn quintic(c: f64) -> Result<Self> {
        Self::with_function(c, Arc::new(QuinticClip))
    }

    pub fn with_function(c: f64, func: Arc<dyn ClipFunction>) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::arg(format!("clipping constant must be positive, got {c}")));
        }
        if !(func.t0() >= 1.0) {
            return Err(Error::arg(format!(
                "clipping threshold t0 must be at least 1, got {}",
                func.t0()
            )));
        }
        Ok(Self { c, func })
    }

    /// Resolves a builtin clip by name and threshold.
    pub fn by_name(kind: &str, c: f64, t0: f64) -> Result<Self> {
        match kind {
            QuinticClip::NAME => {
                if t0 != QuinticClip::T0 {
                    return Err(Error::Unsupported(format!(
                        "{} has t0 = 2, requested t0 = {t0}",
                        QuinticClip::NAME
                    )));
                }
                Self::quintic(c)
            }
            other => Err(Error::Lookup {
                what: "clipping kind",
                name: other.to_string(),
            }),
        }
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn t0(&self) -> f64 {
        self.func.t0()
    }

    pub fn kind(&self) -> &str {
        self.func.name()
    }

    /// Density level `t₀c²` above which `α(s) = √s`.
    pub fn threshold(&self) -> f64 {
        self.t0() * self.c * self.c
    }

    pub fn with_c(&self, c: f64) -> Result<Self> {
        Self::with_function(c, Arc::clone(&self.func))
    }

    pub fn p(&self, x: f64) -> f64 {
        self.func.p(x)
    }

    pub fn p_prime(&self, x: f64) -> f64 {
        self.func.p_prime(x)
    }

    pub fn p_second(&self, x: f64) -> f64 {
        self.func.p_second(x)
    }

    /// `α(s) = c·√p(s/c²)`, returned as exactly `√s` in the unclipped region.
    #[inline]
    pub fn alpha(&self, s: f64) -> f64 {
        let x = s / (self.c * self.c);
        if x >= self.t0() {
            return s.sqrt();
        }
        self.c * self.func.p(x).sqrt()
    }

    /// `α′(s) = p′(s/c²) / (2c·√p(s/c²))`.
    pub fn alpha_prime(&self, s: f64) -> f64 {
        let x = s / (self.c * self.c);
        if x >= self.t0() {
            return 0.5 / s.sqrt();
        }
        self.func.p_prime(x) / (2.0 * self.c * self.func.p(x).sqrt())
    }

    /// `α″(s)`.
    pub fn alpha_second(&self, s: f64) -> f64 {
        let c = self.c;
        let x = s / (c * c);
        let p = self.func.p(x);
        let dp = self.func.p_prime(x);
        let ddp = self.func.p_second(x);
        (ddp / (2.0 * c * p.sqrt()) - dp * dp / (4.0 * c * p.powf(1.5))) / (c * c)
    }

    /// `(α^d)′(s) = d·α^{d−1}(s)·α′(s)`.
    pub fn alpha_pow_d_prime(&self, s: f64, d: usize) -> f64 {
        assert!(d >= 1, "dimension must be positive");
        d as f64 * self.alpha(s).powi(d as i32 - 1) * self.alpha_prime(s)
    }
}

/// Data-driven clipping constant `c = √(r̂/t₀)` where `r̂` is the `quantile`
/// of the pilot density values at the observations.
pub fn auto_c(pilot_values: &[f64], t0: f64, quantile: f64) -> Result<f64> {
    if pilot_values.is_empty() {
        return Err(Error::arg("auto c needs at least one pilot value"));
    }
    if !(0.0..=1.0).contains(&quantile) {
        return Err(Error::arg(format!("quantile {quantile} outside [0, 1]")));
    }
    let mut v = pilot_values.to_vec();
    v.sort_by(f64::total_cmp);
    let r = lower_quantile(&v, quantile);
    if !(r > 0.0) {
        return Err(Error::domain(format!(
            "pilot density quantile {quantile} is {r}; cannot derive c"
        )));
    }
    Ok((r / t0).sqrt())
}

/// Type-7 (linear interpolation) quantile of sorted data.
pub fn lower_quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}
