//! Oracle density models: exact pdf, cdf/quantile, seeded samplers, and
//! fourth derivatives of `1/f`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::kernel::MultiIndex;
use crate::numdiff::{partial, scaled_steps, Stencil};
use crate::rng;

/// Below this density `1/f` and its derivatives are treated as undefined.
pub const DENSITY_FLOOR: f64 = 1e-12;

const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DensityModel {
    /// Standard normal.
    Normal,
    /// Student t with four degrees of freedom.
    StudentT4,
    /// Standard Cauchy.
    Cauchy,
    /// Lomax form `1/(1+x)²` on `x ≥ 0` (location 0, scale 1, shape 1).
    Pareto,
    /// Classical Pareto `1/x²` on `x ≥ 1`.
    ParetoClassical,
    /// Standard bivariate normal.
    Normal2d,
}

impl DensityModel {
    pub fn by_name(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "normal" | "gaussian" => Ok(Self::Normal),
            "t4" | "student-t4" | "t" => Ok(Self::StudentT4),
            "cauchy" => Ok(Self::Cauchy),
            "pareto" | "lomax" => Ok(Self::Pareto),
            "pareto-classical" => Ok(Self::ParetoClassical),
            "normal2d" => Ok(Self::Normal2d),
            _ => Err(Error::Lookup {
                what: "density model",
                name: name.to_string(),
            }),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Normal => "normal",
            Self::StudentT4 => "t4",
            Self::Cauchy => "cauchy",
            Self::Pareto => "pareto",
            Self::ParetoClassical => "pareto-classical",
            Self::Normal2d => "normal2d",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Normal2d => 2,
            _ => 1,
        }
    }

    /// Univariate density; for `Normal2d` the argument is taken as `(x, 0)`.
    #[inline]
    pub fn pdf1(&self, x: f64) -> f64 {
        match self {
            Self::Normal => (-0.5 * x * x).exp() / SQRT_2PI,
            Self::StudentT4 => {
                let a = 1.0 + 0.25 * x * x;
                0.375 / (a * a * a.sqrt())
            }
            Self::Cauchy => 1.0 / (PI * (1.0 + x * x)),
            Self::Pareto => {
                if x < 0.0 {
                    0.0
                } else {
                    1.0 / ((1.0 + x) * (1.0 + x))
                }
            }
            Self::ParetoClassical => {
                if x < 1.0 {
                    0.0
                } else {
                    1.0 / (x * x)
                }
            }
            Self::Normal2d => (-0.5 * x * x).exp() / (2.0 * PI),
        }
    }

    pub fn pdf(&self, t: &[f64]) -> f64 {
        match self {
            Self::Normal2d => (-0.5 * (t[0] * t[0] + t[1] * t[1])).exp() / (2.0 * PI),
            _ => self.pdf1(t[0]),
        }
    }

    fn require_1d(&self, what: &str) -> Result<()> {
        if self.dim() != 1 {
            return Err(Error::Unsupported(format!(
                "{what} is only defined for one-dimensional models, `{}` has d={}",
                self.name(),
                self.dim()
            )));
        }
        Ok(())
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        self.require_1d("cdf")?;
        Ok(match self {
            Self::Normal => std_normal().cdf(x),
            Self::StudentT4 => 0.5 + x * (x * x + 6.0) / (2.0 * (x * x + 4.0).powf(1.5)),
            Self::Cauchy => 0.5 + x.atan() / PI,
            Self::Pareto => {
                if x <= 0.0 {
                    0.0
                } else {
                    1.0 - 1.0 / (1.0 + x)
                }
            }
            Self::ParetoClassical => {
                if x <= 1.0 {
                    0.0
                } else {
                    1.0 - 1.0 / x
                }
            }
            Self::Normal2d => unreachable!(),
        })
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        self.require_1d("quantile")?;
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::arg(format!("probability {p} outside [0, 1]")));
        }
        Ok(match self {
            Self::Normal => std_normal().inverse_cdf(p),
            Self::StudentT4 => t4_quantile(p),
            Self::Cauchy => (PI * (p - 0.5)).tan(),
            Self::Pareto => p / (1.0 - p),
            Self::ParetoClassical => 1.0 / (1.0 - p),
            Self::Normal2d => unreachable!(),
        })
    }

    /// Support interval (d=1) used for truncation and grid placement.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Self::Pareto => (0.0, f64::INFINITY),
            Self::ParetoClassical => (1.0, f64::INFINITY),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// Draws `n` points (row-major, `n·d` values) from `rng`.
    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(n * self.dim());
        match self {
            Self::Normal | Self::Normal2d => {
                let total = n * self.dim();
                while out.len() < total {
                    let (a, b) = box_muller(rng);
                    out.push(a);
                    if out.len() < total {
                        out.push(b);
                    }
                }
            }
            Self::StudentT4 => {
                for _ in 0..n {
                    let (z, _) = box_muller(rng);
                    // χ²₄ = −2 ln(U₁U₂)
                    let chi = -2.0 * (open_unit(rng).ln() + open_unit(rng).ln());
                    out.push(z / (chi / 4.0).sqrt());
                }
            }
            Self::Cauchy => {
                for _ in 0..n {
                    let u: f64 = rng.random();
                    out.push((PI * (u - 0.5)).tan());
                }
            }
            Self::Pareto => {
                for _ in 0..n {
                    let u: f64 = rng.random();
                    out.push(u / (1.0 - u));
                }
            }
            Self::ParetoClassical => {
                for _ in 0..n {
                    let u: f64 = rng.random();
                    out.push(1.0 / (1.0 - u));
                }
            }
        }
        out
    }

    pub fn sample(&self, seed: u64, n: usize) -> Vec<f64> {
        self.sample_with(&mut rng::stream(seed), n)
    }

    /// Whether `inv_f_d4` has a closed form for this model.
    pub fn has_analytic_d4(&self) -> bool {
        !matches!(self, Self::StudentT4)
    }

    fn check_floor(&self, t: &[f64]) -> Result<f64> {
        let f = self.pdf(t);
        if !(f > DENSITY_FLOOR) {
            return Err(Error::domain(format!(
                "density of `{}` at {t:?} is {f}, below floor {DENSITY_FLOOR}",
                self.name()
            )));
        }
        Ok(f)
    }

    /// `D_v(1/f)(t)` for every `|v| = 4`.
    pub fn inv_f_d4(&self, t: &[f64]) -> Result<BTreeMap<MultiIndex, f64>> {
        if t.len() != self.dim() {
            return Err(Error::arg(format!(
                "point has dimension {}, model `{}` has {}",
                t.len(),
                self.name(),
                self.dim()
            )));
        }
        self.check_floor(t)?;
        let idx = MultiIndex::all_of_order(self.dim(), 4);
        match self {
            Self::Normal => {
                let x = t[0];
                let v = SQRT_2PI * (0.5 * x * x).exp() * (x.powi(4) + 6.0 * x * x + 3.0);
                Ok(idx.into_iter().map(|i| (i, v)).collect())
            }
            Self::Normal2d => Ok(idx
                .into_iter()
                .map(|i| {
                    let v = 2.0 * PI * gauss_inverse_deriv(i.0[0], t[0]) * gauss_inverse_deriv(i.0[1], t[1]);
                    (i, v)
                })
                .collect()),
            // 1/f is a quadratic polynomial on the support.
            Self::Cauchy | Self::Pareto | Self::ParetoClassical => {
                Ok(idx.into_iter().map(|i| (i, 0.0)).collect())
            }
            Self::StudentT4 => self.inv_f_d4_numeric(t),
        }
    }

    /// One-dimensional shorthand for `(1/f)⁗(t)`.
    pub fn inv_f_d4_1d(&self, t: f64) -> Result<f64> {
        self.require_1d("inv_f_d4_1d")?;
        Ok(self.inv_f_d4(&[t])?[&MultiIndex(vec![4])])
    }

    /// Five-point central differences of `1/f` per axis with step
    /// `0.01·max(1, |tᵢ|)`, Richardson-extrapolated against half that step.
    pub fn inv_f_d4_numeric(&self, t: &[f64]) -> Result<BTreeMap<MultiIndex, f64>> {
        self.check_floor(t)?;
        let steps = scaled_steps(t, 1e-2);
        let inv = |p: &[f64]| 1.0 / self.pdf(p);
        let out: BTreeMap<MultiIndex, f64> = MultiIndex::all_of_order(self.dim(), 4)
            .into_iter()
            .map(|v| {
                // Richardson step: combine h and h/2 to cancel the O(h²) term.
                let half: Vec<f64> = steps.iter().map(|h| 0.5 * h).collect();
                let coarse = partial(inv, t, &v, &steps, Stencil::Five);
                let fine = partial(inv, t, &v, &half, Stencil::Five);
                let d = (4.0 * fine - coarse) / 3.0;
                (v, d)
            })
            .collect();
        if out.values().any(|v| !v.is_finite()) {
            return Err(Error::domain(format!(
                "finite-difference stencil for `{}` at {t:?} leaves the support",
                self.name()
            )));
        }
        Ok(out)
    }
}

/// k-th derivative of `e^{x²/2}`.
fn gauss_inverse_deriv(k: u32, x: f64) -> f64 {
    let e = (0.5 * x * x).exp();
    let poly = match k {
        0 => 1.0,
        1 => x,
        2 => 1.0 + x * x,
        3 => x * x * x + 3.0 * x,
        4 => x.powi(4) + 6.0 * x * x + 3.0,
        _ => unreachable!("only orders up to 4 are needed"),
    };
    poly * e
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("standard normal")
}

/// Closed-form quantile of Student t with four degrees of freedom.
fn t4_quantile(p: f64) -> f64 {
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    if p == 1.0 {
        return f64::INFINITY;
    }
    let a = 4.0 * p * (1.0 - p);
    let sa = a.sqrt();
    let q = ((sa.acos() / 3.0).cos() / sa - 1.0).max(0.0).sqrt();
    2.0 * q * (p - 0.5).signum()
}

/// Uniform on (0, 1].
#[inline]
fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

#[inline]
fn box_muller<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    let r = (-2.0 * open_unit(rng).ln()).sqrt();
    let theta = 2.0 * PI * rng.random::<f64>();
    (r * theta.cos(), r * theta.sin())
}

/// Every builtin model.
pub fn builtin_models() -> Vec<DensityModel> {
    vec![
        DensityModel::Normal,
        DensityModel::StudentT4,
        DensityModel::Cauchy,
        DensityModel::Pareto,
        DensityModel::ParetoClassical,
        DensityModel::Normal2d,
    ]
}
