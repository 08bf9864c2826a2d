use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;
use vkde::asymptotics::{kernel_warning, rate_check, region_integrals, EvaluationRegion};
use vkde::clipping::{auto_c, ClippingSpec, QuinticClip};
use vkde::densities::DensityModel;
use vkde::estimators::{
    default_grid, pilot_values, silverman_bandwidth, BandwidthPair, DensityEstimate, EstimatorKind, Evaluator,
    PilotMode,
};
use vkde::exec::Exec;
use vkde::kernel::{compute_moments, Kernel};
use vkde::sample::{Grid, Sample};
use vkde::simlab::{self, ExperimentConfig, Setting};

use crate::config::{read_config, BandwidthArgs, DiagnoseArgs, EstimateArgs, MomentsArgs, SimulateArgs};
use crate::error::CliError;
use crate::io::{csv_string, load_sample, parse_rows, write_csv, write_json, write_text};
use crate::svg::line_plot;

const DEFAULT_GRID: usize = 512;
const DEFAULT_C: f64 = 0.3;

fn warn(msg: &str) {
    eprintln!("warning: {msg}");
}

/// Everything an `estimate` run resolved, written next to the output.
#[derive(Debug, Serialize)]
pub struct EstimateManifest {
    pub command: &'static str,
    pub kind: EstimatorKind,
    pub kernel: String,
    pub model: Option<String>,
    pub data: PathBuf,
    pub n: usize,
    pub dim: usize,
    pub h: f64,
    pub h1: Option<f64>,
    pub c: Option<f64>,
    pub c_quantile: f64,
    pub clip: String,
    pub t0: f64,
    pub b: Option<f64>,
    pub pilot: PilotMode,
    pub grid_points: usize,
    pub grid_file: Option<PathBuf>,
    pub out: PathBuf,
    pub warnings: Vec<String>,
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}

pub fn estimate(args: &EstimateArgs) -> Result<(), CliError> {
    let cfg = args.merged()?;
    let data = cfg
        .data
        .clone()
        .ok_or_else(|| CliError::Usage("estimate requires --data".into()))?;
    let out = cfg
        .out
        .clone()
        .ok_or_else(|| CliError::Usage("estimate requires --out".into()))?;
    let sample = load_sample(&data)?;
    let n = sample.n();
    let dim = sample.dim();
    let kind = cfg.kind.unwrap_or(EstimatorKind::PluginVkde);
    let kernel = Kernel::by_name(cfg.kernel.as_deref().unwrap_or("tricube"), dim)?;
    let model = match (&cfg.model, kind.needs_oracle()) {
        (Some(m), _) => Some(DensityModel::by_name(m)?),
        (None, true) => return Err(CliError::Usage(format!("--kind {kind} requires --model"))),
        (None, false) => None,
    };
    let clip = cfg.clip.clone().unwrap_or_else(|| QuinticClip::NAME.to_string());
    let t0 = cfg.t0.unwrap_or(QuinticClip::T0);
    let c_quantile = cfg.c_quantile.unwrap_or(0.05);
    let pilot = cfg.pilot.map(PilotMode::from).unwrap_or_default();
    let mut warnings = Vec::new();

    let rate = |k: f64| (n as f64).powf(-1.0 / (k + dim as f64));
    let (h, h1) = match kind {
        EstimatorKind::PluginVkde => {
            if cfg.h.is_some() {
                return Err(CliError::Usage("plugin-vkde takes --h1/--h2, not --h".into()));
            }
            (cfg.h2.unwrap_or_default().or(rate(8.0)), Some(cfg.h1.unwrap_or_default().or(rate(4.0))))
        }
        EstimatorKind::Classical => {
            let h = match cfg.h.unwrap_or_default() {
                Setting::Value(h) => h,
                Setting::Auto if dim == 1 => silverman_bandwidth(&sample, &kernel)?,
                Setting::Auto => rate(4.0),
            };
            (h, None)
        }
        _ => (cfg.h.unwrap_or_default().or(rate(8.0)), None),
    };
    let bw = BandwidthPair::new(h1.unwrap_or(h), h)?;

    let uses_c = matches!(kind, EstimatorKind::PluginVkde | EstimatorKind::IdealVkde);
    let c = if uses_c {
        Some(match cfg.c.unwrap_or_default() {
            Setting::Value(c) => c,
            Setting::Auto => {
                let values = match kind {
                    EstimatorKind::PluginVkde => pilot_values(&sample, &kernel, bw.h1, pilot, Exec::Parallel)?,
                    _ => {
                        let m = model.expect("oracle checked above");
                        sample.rows().map(|x| m.pdf(x)).collect()
                    }
                };
                auto_c(&values, t0, c_quantile)?
            }
        })
    } else {
        None
    };
    let clipping = ClippingSpec::by_name(&clip, c.unwrap_or(DEFAULT_C), t0)?;

    let grid = match &cfg.grid_file {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Data(format!("cannot read {}: {e}", p.display())))?;
            let (pts, d) = parse_rows(&text)?;
            if d != dim {
                return Err(CliError::Data(format!(
                    "grid file has {d} columns, data has {dim}"
                )));
            }
            Grid::new(pts, dim)?
        }
        None => {
            let pad = h * kernel.support_radius() / c.unwrap_or(1.0);
            default_grid(&sample, pad, cfg.grid.unwrap_or(DEFAULT_GRID))?
        }
    };

    let ev = Evaluator {
        pilot,
        ..Evaluator::default()
    };
    let b = cfg.b.unwrap_or(1.0);
    let est: DensityEstimate = match kind {
        EstimatorKind::Classical => ev.classical_kde(&sample, &kernel, h, &grid)?,
        EstimatorKind::IdealVkde => ev.ideal_vkde(&sample, &kernel, h, &clipping, model.unwrap(), &grid)?,
        EstimatorKind::PluginVkde => ev.plugin_vkde(&sample, &kernel, bw, &clipping, &grid)?,
        EstimatorKind::Abramson => ev.abramson(&sample, &kernel, h, model.unwrap(), &grid)?,
        EstimatorKind::HallMarron => ev.hall_marron(&sample, &kernel, h, model.unwrap(), &grid)?,
        EstimatorKind::Hhm => ev.hhm(&sample, &kernel, h, model.unwrap(), b, &grid)?,
    };
    if kind == EstimatorKind::PluginVkde {
        let check = rate_check(bw.h1.min(0.999_999), bw.h2, n, dim)?;
        if let Some(w) = check.warning {
            warnings.push(w);
        }
    }

    write_estimate(&out, &est, dim)?;
    if cfg.svg == Some(true) && dim == 1 {
        let svg = line_plot(&format!("{kind} estimate"), est.grid.values(), &[("fhat", &est.values)]);
        write_text(&out.with_extension("svg"), &svg)?;
    }
    for w in &warnings {
        warn(w);
    }
    let manifest = EstimateManifest {
        command: "estimate",
        kind,
        kernel: kernel.name().to_string(),
        model: model.map(|m| m.name().to_string()),
        data,
        n,
        dim,
        h,
        h1,
        c,
        c_quantile,
        clip,
        t0,
        b: (kind == EstimatorKind::Hhm).then_some(b),
        pilot,
        grid_points: grid.len(),
        grid_file: cfg.grid_file.clone(),
        out: out.clone(),
        warnings,
    };
    write_json(&manifest_path(&out), &manifest)?;
    println!(
        "wrote {} ({} points, n = {n}, h = {h:.6}{})",
        out.display(),
        grid.len(),
        c.map(|c| format!(", c = {c:.6}")).unwrap_or_default()
    );
    Ok(())
}

fn write_estimate(out: &Path, est: &DensityEstimate, dim: usize) -> Result<(), CliError> {
    let cols: Vec<Vec<f64>> = (0..dim)
        .map(|j| (0..est.grid.len()).map(|i| est.grid.point(i)[j]).collect())
        .collect();
    let mut header: Vec<String> = if dim == 1 {
        vec!["t".into()]
    } else {
        (1..=dim).map(|j| format!("t{j}")).collect()
    };
    header.push("fhat".into());
    let mut columns: Vec<&[f64]> = cols.iter().map(|c| c.as_slice()).collect();
    columns.push(&est.values);
    let header: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    write_csv(out, &header, &columns)
}

pub fn simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let mut cfg: ExperimentConfig = match (&args.config, args.experiment) {
        (Some(p), _) => read_config(p)?,
        (None, Some(kind)) => ExperimentConfig::new(kind),
        (None, None) => return Err(CliError::Usage("simulate requires --experiment or --config".into())),
    };
    if let Some(kind) = args.experiment {
        cfg.experiment = kind;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(m) = &args.model {
        cfg.model = Some(m.clone());
    }
    if let Some(k) = &args.kernel {
        cfg.kernel = k.clone();
    }
    if let Some(n) = args.n {
        cfg.n = Some(n);
    }
    if let Some(m) = args.replications {
        cfg.replications = Some(m);
    }
    if let Some(c) = args.c {
        cfg.c = Some(c);
    }
    if args.full_scale {
        cfg.full_scale = true;
    }
    let exec = if args.sequential { Exec::Sequential } else { Exec::Parallel };
    let res = simlab::run(&cfg, exec)?;
    res.verify()?;

    let dir = &args.out;
    write_text(&dir.join("records.csv"), &records_csv(&res.records))?;
    write_json(
        &dir.join("summary.json"),
        &json!({
            "experiment": res.experiment,
            "aggregates": res.aggregates,
            "record_count": res.records.len(),
        }),
    )?;
    write_json(&dir.join("manifest.json"), &json!({ "command": "simulate", "config": res.config }))?;
    write_json(&dir.join("timing.json"), &json!({ "wall_time_secs": res.wall_time_secs }))?;
    for p in &res.panels {
        let csv = csv_string(&["t", "f_true", "kde", "vkde"], &[&p.t, &p.f_true, &p.kde, &p.vkde]);
        write_text(&dir.join(format!("plot_{}.csv", p.name)), &csv)?;
        if args.svg {
            let svg = line_plot(&p.name, &p.t, &[("f", &p.f_true), ("KDE", &p.kde), ("VKDE", &p.vkde)]);
            write_text(&dir.join(format!("plot_{}.svg", p.name)), &svg)?;
        }
    }
    for note in &res.aggregates.notes {
        warn(note);
    }
    println!("{}", serde_json::to_string_pretty(&res.aggregates.values).unwrap_or_default());
    Ok(())
}

fn records_csv(records: &[simlab::Record]) -> String {
    let keys: Vec<&String> = records.first().map(|r| r.values.keys().collect()).unwrap_or_default();
    let mut out = String::from("replicate,label,x");
    for k in &keys {
        out.push(',');
        out.push_str(k);
    }
    out.push('\n');
    for r in records {
        out.push_str(&format!("{},{},{}", r.replicate, r.label, crate::io::fmt_f64(r.x)));
        for k in &keys {
            out.push(',');
            out.push_str(&crate::io::fmt_f64(r.values.get(*k).copied().unwrap_or(f64::NAN)));
        }
        out.push('\n');
    }
    out
}

pub fn bandwidth(args: &BandwidthArgs) -> Result<(), CliError> {
    let model = DensityModel::by_name(&args.model)?;
    let kernel = Kernel::by_name(&args.kernel, model.dim())?;
    let c = args.c.or(DEFAULT_C);
    let clip = args.clip.clone().unwrap_or_else(|| QuinticClip::NAME.to_string());
    let clipping = ClippingSpec::by_name(&clip, c, args.t0)?;
    let moments = compute_moments(&kernel, 4)?;
    let region = match args.r {
        Setting::Auto => EvaluationRegion::auto(model, &clipping)?,
        Setting::Value(r) => EvaluationRegion::new(r, model, &clipping)?,
    };
    if args.n == 0 || args.points < 2 {
        return Err(CliError::Usage("--n must be positive and --points at least 2".into()));
    }
    let ints = region_integrals(&moments, &clipping, &region, Exec::Parallel)?;
    let opt = ints.optimal_bandwidth(args.n)?;
    if let Some(w) = kernel_warning(&kernel) {
        warn(&w);
    }
    let hs: Vec<f64> = (0..args.points)
        .map(|i| opt.h_exact * 4f64.powf(-1.0 + 2.0 * i as f64 / (args.points - 1) as f64))
        .collect();
    let imse: Vec<f64> = hs.iter().map(|&h| ints.imse(h, args.n)).collect();
    let curve = csv_string(&["h", "imse"], &[&hs, &imse]);
    println!(
        "{}",
        serde_json::to_string_pretty(&json!({
            "model": model.name(),
            "kernel": kernel.name(),
            "c": c,
            "r": region.r(),
            "n": args.n,
            "int_bias_sq": ints.int_bias_sq,
            "int_sigma2": ints.int_sigma2,
            "h_rate": opt.h_rate,
            "h_exact": opt.h_exact,
            "h_exact_over_h_rate": opt.ratio,
            "recommended": opt.h_exact,
            "note": "h_exact minimizes the two-term IMSE; h_rate omits the factor (d/8)^(1/(8+d))",
        }))
        .unwrap_or_default()
    );
    match &args.out {
        Some(p) => write_text(p, &curve)?,
        None => print!("{curve}"),
    }
    Ok(())
}

pub fn diagnose(args: &DiagnoseArgs) -> Result<(), CliError> {
    if args.n == 0 || args.d == 0 {
        return Err(CliError::Usage("--n and --d must be positive".into()));
    }
    let n = args.n as f64;
    let d = args.d as f64;
    let h1 = args.h1.or(n.powf(-1.0 / (4.0 + d)));
    let h2 = args.h2.or(n.powf(-1.0 / (8.0 + d)));
    let check = rate_check(h1, h2, args.n, args.d)?;
    if let Some(w) = &check.warning {
        warn(w);
    }
    println!(
        "{}",
        serde_json::to_string_pretty(&json!({ "h1": h1, "h2": h2, "n": args.n, "d": args.d, "u": check.u, "ratio": check.ratio }))
            .unwrap_or_default()
    );
    Ok(())
}

pub fn moments(args: &MomentsArgs) -> Result<(), CliError> {
    let kernel = Kernel::by_name(&args.kernel, args.dim)?;
    let m = compute_moments(&kernel, args.order)?;
    println!("{}", serde_json::to_string_pretty(&m.to_json()).unwrap_or_default());
    Ok(())
}

/// Reads a sample for tests and tooling.
pub fn read_sample(path: &Path) -> Result<Sample, CliError> {
    load_sample(path)
}
