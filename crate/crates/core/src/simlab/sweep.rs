//! Empirical IMSE of the plug-in estimator over a log-grid of main
//! bandwidths, restricted to the evaluation region `D_r`.

use crate::asymptotics::{region_integrals, EvaluationRegion, RegionIntegrals};
use crate::error::{Error, Result};
use crate::estimators::{pilot_values, KernelSum};
use crate::exec::Exec;
use crate::kernel::compute_moments;
use crate::quadrature::trapezoid;
use crate::rng::replicate_stream;
use crate::sample::Sample;

use super::stats::mean;
use super::{column, Aggregates, ExperimentConfig, Record};

struct Plan {
    region: EvaluationRegion,
    integrals: RegionIntegrals,
    /// `(h_rate, h_exact)`, absent when the bias integral vanishes.
    optimum: Option<(f64, f64)>,
    h_grid: Vec<f64>,
    /// Quadrature grids, one per connected piece of the region.
    pieces: Vec<Vec<f64>>,
}

fn label(h: f64) -> String {
    format!("h2={h}")
}

fn plan(cfg: &ExperimentConfig) -> Result<Plan> {
    let model = cfg.model()?;
    if model.dim() != 1 {
        return Err(Error::Unsupported("the bandwidth sweep is one-dimensional".into()));
    }
    let kernel = cfg.kernel(1)?;
    let clipping = cfg.clipping(cfg.fixed_c()?)?;
    let moments = compute_moments(&kernel, 4)?;
    let region = match cfg.r {
        super::Setting::Auto => EvaluationRegion::auto(model, &clipping)?,
        super::Setting::Value(r) => EvaluationRegion::new(r, model, &clipping)?,
    };
    let integrals = region_integrals(&moments, &clipping, &region, Exec::Sequential)?;
    let n = cfg.n_();
    let optimum = integrals
        .optimal_bandwidth(n)
        .ok()
        .map(|o| (o.h_rate, o.h_exact));
    let centre = optimum.map(|o| o.1).unwrap_or_else(|| cfg.rate_h2(n, 1));
    let k = cfg.sweep_points;
    let span = cfg.sweep_span.ln();
    let h_grid = (0..k)
        .map(|i| centre * (-span + 2.0 * span * i as f64 / (k - 1) as f64).exp())
        .collect();

    // Merge adjacent inner cells into intervals.
    let mut intervals: Vec<(f64, f64)> = Vec::new();
    for (lo, hi) in region.inner_cells(2048) {
        match intervals.last_mut() {
            Some(last) if (lo[0] - last.1).abs() <= 1e-9 * (1.0 + lo[0].abs()) => last.1 = hi[0],
            _ => intervals.push((lo[0], hi[0])),
        }
    }
    let total: f64 = intervals.iter().map(|(a, b)| b - a).sum();
    let pieces = intervals
        .iter()
        .map(|&(a, b)| {
            let m = ((cfg.region_points as f64 * (b - a) / total).round() as usize).max(2);
            (0..m).map(|j| a + (b - a) * j as f64 / (m - 1) as f64).collect()
        })
        .collect();
    Ok(Plan {
        region,
        integrals,
        optimum,
        h_grid,
        pieces,
    })
}

pub(super) fn records(cfg: &ExperimentConfig, exec: Exec) -> Result<Vec<Record>> {
    let model = cfg.model()?;
    let kernel = cfg.kernel(1)?;
    let clipping = cfg.clipping(cfg.fixed_c()?)?;
    let plan = plan(cfg)?;
    let n = cfg.n_();
    let h1 = cfg.rate_h1(n, 1);
    let truth: Vec<Vec<f64>> = plan
        .pieces
        .iter()
        .map(|p| p.iter().map(|&t| model.pdf1(t)).collect())
        .collect();
    let per_rep: Vec<Result<Vec<Record>>> = exec.map(cfg.m_(), |i| {
        let data = model.sample_with(&mut replicate_stream(cfg.seed, i as u64), n);
        let sample = Sample::new(data, 1)?;
        let pilot = pilot_values(&sample, &kernel, h1, cfg.pilot, Exec::Sequential)?;
        let factors: Vec<f64> = pilot.iter().map(|&f| clipping.alpha(f)).collect();
        plan.h_grid
            .iter()
            .map(|&h2| {
                let est = KernelSum::scaled(&sample, &kernel, h2, factors.clone())?;
                let ise: f64 = plan
                    .pieces
                    .iter()
                    .zip(&truth)
                    .map(|(grid, f)| {
                        let sq: Vec<f64> = grid
                            .iter()
                            .zip(f)
                            .map(|(&t, &ft)| (est.eval(&[t]) - ft).powi(2))
                            .collect();
                        trapezoid(grid, &sq)
                    })
                    .sum();
                Ok(Record::new(i, label(h2), h2).with("ise", ise))
            })
            .collect()
    });
    let mut out = Vec::new();
    for r in per_rep {
        out.extend(r?);
    }
    Ok(out)
}

pub(super) fn aggregate(cfg: &ExperimentConfig, records: &[Record]) -> Result<Aggregates> {
    let plan = plan(cfg)?;
    let n = cfg.n_();
    let mut agg = Aggregates::default();
    agg.set("r", plan.region.r());
    agg.set("int_bias_sq", plan.integrals.int_bias_sq);
    agg.set("int_sigma2", plan.integrals.int_sigma2);
    agg.set("h1", cfg.rate_h1(n, 1));
    let mut imse = Vec::with_capacity(plan.h_grid.len());
    for &h in &plan.h_grid {
        let lab = label(h);
        let v = mean(&column(records, &lab, "ise"));
        agg.set(format!("imse_emp[{lab}]"), v);
        agg.set(format!("imse_theory[{lab}]"), plan.integrals.imse(h, n));
        imse.push(v);
    }
    let (best, _) = imse
        .iter()
        .enumerate()
        .fold((0usize, f64::INFINITY), |(bi, bv), (i, &v)| if v < bv { (i, v) } else { (bi, bv) });
    let h_min = plan.h_grid[best];
    agg.set("h_emp_min", h_min);
    let last = imse.len() - 1;
    agg.flag("u_shaped", imse[0] > imse[best] && imse[last] > imse[best]);
    agg.flag("monotone_decreasing", imse.windows(2).all(|w| w[1] < w[0]));
    match plan.optimum {
        Some((h_rate, h_exact)) => {
            agg.set("h_rate", h_rate);
            agg.set("h_exact", h_exact);
            agg.set("h_exact_over_h_rate", h_exact / h_rate);
            agg.set("h_emp_over_h_exact", h_min / h_exact);
        }
        None => agg
            .notes
            .push("integrated squared bias is zero: no interior optimum; grid centred on the rate bandwidth".into()),
    }
    Ok(agg)
}
