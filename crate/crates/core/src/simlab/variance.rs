//! Empirical variance of a variable-bandwidth estimate at a fixed point,
//! scaled by `n h^d` and compared with `a₀(t)` (ideal) or `σ_t²` (plug-in).

use crate::asymptotics::{ideal_variance_coeffs, sigma_t2};
use crate::error::Result;
use crate::estimators::{plugin_vkde_at, BandwidthPair, EstimatorKind, KernelSum};
use crate::exec::Exec;
use crate::kernel::compute_moments;
use crate::rng::replicate_stream;
use crate::sample::Sample;

use super::stats::{mean, variance};
use super::{column, Aggregates, ExperimentConfig, Record};

const LABEL: &str = "t";

fn bandwidths(cfg: &ExperimentConfig, dim: usize) -> (f64, f64) {
    let n = cfg.n_();
    let h = cfg.h.or((n as f64).powf(-1.0 / (8.0 + dim as f64)));
    (cfg.rate_h1(n, dim), h)
}

pub(super) fn records(cfg: &ExperimentConfig, exec: Exec) -> Result<Vec<Record>> {
    let model = cfg.model()?;
    let dim = model.dim();
    let kernel = cfg.kernel(dim)?;
    let clipping = cfg.clipping(cfg.fixed_c()?)?;
    let t = cfg.point_().to_vec();
    let n = cfg.n_();
    let (h1, h) = bandwidths(cfg, dim);
    let kind = cfg.estimator.expect("resolved config");
    let bw = BandwidthPair::new(h1, h)?;
    exec.map(cfg.m_(), |i| {
        let data = model.sample_with(&mut replicate_stream(cfg.seed, i as u64), n);
        let sample = Sample::new(data, dim)?;
        let v = match kind {
            EstimatorKind::PluginVkde => plugin_vkde_at(&sample, &kernel, bw, &clipping, cfg.pilot, &t)?,
            _ => {
                let a = sample.rows().map(|x| clipping.alpha(model.pdf(x))).collect();
                KernelSum::scaled(&sample, &kernel, h, a)?.eval(&t)
            }
        };
        Ok(Record::new(i, LABEL, t[0]).with("estimate", v))
    })
    .into_iter()
    .collect()
}

pub(super) fn aggregate(cfg: &ExperimentConfig, records: &[Record]) -> Result<Aggregates> {
    let model = cfg.model()?;
    let dim = model.dim();
    let kernel = cfg.kernel(dim)?;
    let clipping = cfg.clipping(cfg.fixed_c()?)?;
    let moments = compute_moments(&kernel, 4)?;
    let t = cfg.point_();
    let f = model.pdf(t);
    let n = cfg.n_();
    let (h1, h) = bandwidths(cfg, dim);
    let est = column(records, LABEL, "estimate");
    let var = variance(&est);
    let scaled = n as f64 * h.powi(dim as i32) * var;

    let mut agg = Aggregates::default();
    agg.set("f_true", f);
    agg.set("h", h);
    agg.set("mean", mean(&est));
    agg.set("var_emp", var);
    agg.set("n_h_var", scaled);
    let a0 = ideal_variance_coeffs(model, &moments, &clipping, t, 0)?;
    agg.set("a0", a0);
    agg.set("ratio_a0", scaled / a0);
    if cfg.estimator == Some(EstimatorKind::PluginVkde) {
        let s2 = sigma_t2(f, &moments, &clipping)?;
        agg.set("h1", h1);
        agg.set("sigma_t2", s2);
        agg.set("ratio_sigma_t2", scaled / s2);
    }
    // O(1/n) part of n h Var for the ideal estimator: −h^d·(E f̄)².
    agg.set("finite_n_correction", -h.powi(dim as i32) * mean(&est).powi(2));
    Ok(agg)
}

#[cfg(test)]
mod tests {
    use crate::exec::Exec;
    use crate::simlab::{run, ExperimentConfig, ExperimentKind};

    #[test]
    fn doubling_n_halves_variance() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::Variance);
        cfg.replications = Some(400);
        cfg.h = super::super::Setting::Value(0.4);
        cfg.n = Some(1000);
        let a = run(&cfg, Exec::Parallel).unwrap();
        cfg.n = Some(2000);
        cfg.seed = 7;
        let b = run(&cfg, Exec::Parallel).unwrap();
        let ratio = a.aggregates.get("var_emp").unwrap() / b.aggregates.get("var_emp").unwrap();
        // Each variance has relative sd ≈ √(2/399) ≈ 0.07.
        assert!((ratio - 2.0).abs() < 0.6, "{ratio}");
        a.verify().unwrap();
    }
}
