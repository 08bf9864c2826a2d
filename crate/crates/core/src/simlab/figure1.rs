//! Classical versus plug-in variable-bandwidth estimates on heavy-tailed
//! models, scored by ISE on a mode region `[q(0.05), q(0.95)]` and a tail
//! region `[q(0.95), q(0.999)]`.

use crate::clipping::auto_c;
use crate::densities::DensityModel;
use crate::error::Result;
use crate::estimators::{pilot_values, silverman_bandwidth, KernelSum};
use crate::exec::Exec;
use crate::quadrature::{pairwise_sum, trapezoid};
use crate::rng::replicate_stream;
use crate::sample::{Grid, Sample};

use super::stats::{fraction, mean};
use super::{column, Aggregates, ExperimentConfig, PlotPanel, Record, Setting};

pub(super) const REGIONS: [(&str, f64, f64); 2] = [("mode", 0.05, 0.95), ("tail", 0.95, 0.999)];

pub(super) fn label(model: &str, region: &str) -> String {
    format!("{model}/{region}")
}

fn region_grid(model: DensityModel, lo: f64, hi: f64, m: usize) -> Result<Grid> {
    Ok(Grid::linspace(model.quantile(lo)?, model.quantile(hi)?, m))
}

struct Replicate {
    records: Vec<Record>,
    /// Per region: (kde, vkde) curves.
    curves: Vec<(Vec<f64>, Vec<f64>)>,
}

fn replicate(cfg: &ExperimentConfig, model: DensityModel, stream: u64, i: usize, grids: &[Grid]) -> Result<Replicate> {
    let kernel = cfg.kernel(1)?;
    let n = cfg.n_();
    let data = model.sample_with(&mut replicate_stream(stream, i as u64), n);
    let sample = Sample::new(data, 1)?;
    let h1 = cfg.rate_h1(n, 1);
    let h2 = cfg.rate_h2(n, 1);
    let h_kde = cfg.baseline_h.or_else(|| silverman_bandwidth(&sample, &kernel))?;
    let pilot = pilot_values(&sample, &kernel, h1, cfg.pilot, Exec::Sequential)?;
    let c = match cfg.c.expect("resolved config") {
        Setting::Value(c) => c,
        Setting::Auto => auto_c(&pilot, cfg.t0, cfg.c_quantile.expect("resolved config"))?,
    };
    let clipping = cfg.clipping(c)?;
    let factors = pilot.iter().map(|&f| clipping.alpha(f)).collect();
    let vkde = KernelSum::scaled(&sample, &kernel, h2, factors)?;
    let kde = KernelSum::unit(&sample, &kernel, h_kde)?;
    let mut records = Vec::new();
    let mut curves = Vec::new();
    for ((region, _, _), grid) in REGIONS.iter().zip(grids) {
        let truth: Vec<f64> = grid.values().iter().map(|&t| model.pdf1(t)).collect();
        let k: Vec<f64> = grid.values().iter().map(|&t| kde.eval(&[t])).collect();
        let v: Vec<f64> = grid.values().iter().map(|&t| vkde.eval(&[t])).collect();
        let ise = |est: &[f64]| {
            let sq: Vec<f64> = est.iter().zip(&truth).map(|(e, f)| (e - f).powi(2)).collect();
            trapezoid(grid.values(), &sq)
        };
        records.push(
            Record::new(i, label(model.name(), region), 0.0)
                .with("ise_kde", ise(&k))
                .with("ise_vkde", ise(&v))
                .with("h_kde", h_kde)
                .with("h1", h1)
                .with("h2", h2)
                .with("c", c),
        );
        curves.push((k, v));
    }
    Ok(Replicate { records, curves })
}

fn models(cfg: &ExperimentConfig) -> Result<Vec<DensityModel>> {
    cfg.models
        .as_ref()
        .expect("resolved config")
        .iter()
        .map(|m| DensityModel::by_name(m))
        .collect()
}

pub(super) fn records(cfg: &ExperimentConfig, exec: Exec) -> Result<(Vec<Record>, Vec<PlotPanel>)> {
    let mut records = Vec::new();
    let mut panels = Vec::new();
    for (k, model) in models(cfg)?.into_iter().enumerate() {
        let grids: Vec<Grid> = REGIONS
            .iter()
            .map(|(_, lo, hi)| region_grid(model, *lo, *hi, cfg.region_points))
            .collect::<Result<_>>()?;
        // Each model gets its own replicate streams.
        let stream = crate::rng::replicate_seed(cfg.seed, 1_000_000 + k as u64);
        let reps: Vec<Replicate> = exec
            .map(cfg.m_(), |i| replicate(cfg, model, stream, i, &grids))
            .into_iter()
            .collect::<Result<_>>()?;
        for r in &reps {
            records.extend(r.records.iter().cloned());
        }
        for (j, (region, _, _)) in REGIONS.iter().enumerate() {
            let grid = &grids[j];
            let avg = |pick: &dyn Fn(&Replicate) -> &Vec<f64>| -> Vec<f64> {
                (0..grid.len())
                    .map(|g| {
                        let col: Vec<f64> = reps.iter().map(|r| pick(r)[g]).collect();
                        pairwise_sum(&col) / reps.len() as f64
                    })
                    .collect()
            };
            panels.push(PlotPanel {
                name: format!("{}_{}", model.name(), region),
                t: grid.values().to_vec(),
                f_true: grid.values().iter().map(|&t| model.pdf1(t)).collect(),
                kde: avg(&|r| &r.curves[j].0),
                vkde: avg(&|r| &r.curves[j].1),
            });
        }
    }
    Ok((records, panels))
}

pub(super) fn aggregate(cfg: &ExperimentConfig, records: &[Record]) -> Result<Aggregates> {
    let mut agg = Aggregates::default();
    for model in models(cfg)? {
        for (region, _, _) in REGIONS {
            let lab = label(model.name(), region);
            let kde = column(records, &lab, "ise_kde");
            let vkde = column(records, &lab, "ise_vkde");
            let wins = fraction(vkde.iter().zip(&kde).map(|(v, k)| v < k));
            agg.set(format!("mean_ise_kde[{lab}]"), mean(&kde));
            agg.set(format!("mean_ise_vkde[{lab}]"), mean(&vkde));
            agg.set(format!("vkde_win_rate[{lab}]"), wins);
            agg.set(format!("mean_h_kde[{lab}]"), mean(&column(records, &lab, "h_kde")));
            agg.set(format!("mean_c[{lab}]"), mean(&column(records, &lab, "c")));
            agg.flag(format!("vkde_majority[{lab}]"), wins > 0.5);
        }
    }
    Ok(agg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simlab::{run, ExperimentKind};

    #[test]
    fn small_run_shapes_and_determinism() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::Figure1);
        cfg.n = Some(800);
        cfg.replications = Some(3);
        cfg.region_points = 41;
        let a = run(&cfg, Exec::Parallel).unwrap();
        assert_eq!(a.records.len(), 3 * 3 * 2);
        assert_eq!(a.panels.len(), 6);
        assert!(a.panels.iter().all(|p| p.t.len() == 41 && p.kde.len() == 41));
        let b = run(&cfg, Exec::Sequential).unwrap();
        assert_eq!(a.records, b.records);
        assert_eq!(a.panels, b.panels);
        a.verify().unwrap();
    }
}
