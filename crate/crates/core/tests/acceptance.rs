//! Acceptance criteria, one test each. Every test prints a single
//! `criterion N: PASS|FAIL ...` line before asserting.
//!
//! Run with `cargo test -p vkde --test acceptance -- --test-threads 1`.

use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vkde::asymptotics::sigma_t2;
use vkde::clipping::ClippingSpec;
use vkde::densities::DensityModel;
use vkde::estimators::{
    abramson_sum, hall_marron_sum, hhm_sum, ideal_sum, plugin_sum, BandwidthPair, Evaluator, KernelSum,
    PilotMode,
};
use vkde::exec::Exec;
use vkde::kernel::{compute_moments, Kernel};
use vkde::quadrature::GaussLegendre;
use vkde::sample::{Grid, Sample};
use vkde::simlab::{self, ExperimentConfig, ExperimentKind};

/// Writes to the stdout handle directly, so the line shows up even when the
/// harness captures output of passing tests.
fn report(id: u32, pass: bool, detail: String, start: Instant) {
    let line = format!(
        "criterion {id}: {} {detail} ({:.1}s)\n",
        if pass { "PASS" } else { "FAIL" },
        start.elapsed().as_secs_f64()
    );
    let _ = std::io::stdout().lock().write_all(line.as_bytes());
    assert!(pass, "criterion {id} failed: {detail}");
}

const MODELS_1D: [DensityModel; 5] = [
    DensityModel::Normal,
    DensityModel::StudentT4,
    DensityModel::Cauchy,
    DensityModel::Pareto,
    DensityModel::ParetoClassical,
];

#[test]
fn criterion_1_unit_mass() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let kernels = ["tricube", "epanechnikov", "biweight"];
    let mut worst = 0.0f64;
    let mut worst_case = String::new();
    for case in 0..50 {
        let model = MODELS_1D[rng.random_range(0..MODELS_1D.len())];
        let kernel = Kernel::by_name(kernels[rng.random_range(0..kernels.len())], 1).unwrap();
        let n = [100, 1_000, 10_000][rng.random_range(0..3)];
        let h = rng.random_range(0.1..1.0);
        let c = rng.random_range(0.1..1.0);
        let sample = Sample::from_1d(model.sample(1000 + case, n)).unwrap();
        let clipping = ClippingSpec::quintic(c).unwrap();
        let bw = BandwidthPair::new((n as f64).powf(-0.2), h).unwrap();
        let sums = [
            ("classical", KernelSum::unit(&sample, &kernel, h).unwrap()),
            ("ideal-vkde", ideal_sum(&sample, &kernel, h, &clipping, model).unwrap()),
            ("hall-marron", hall_marron_sum(&sample, &kernel, h, model).unwrap()),
            (
                "plugin-vkde",
                plugin_sum(&sample, &kernel, bw, &clipping, PilotMode::LeaveSelfIn, Exec::Parallel).unwrap(),
            ),
        ];
        for (name, sum) in &sums {
            let err = (sum.total_mass(Exec::Parallel).unwrap() - 1.0).abs();
            if err > worst {
                worst = err;
                worst_case = format!("{name} on {} n={n} {}", model.name(), kernel.name());
            }
        }
    }
    report(
        1,
        worst <= 1e-3,
        format!("max |mass - 1| = {worst:.3e} over 50 configurations x 4 estimators (worst: {worst_case})"),
        start,
    );
}

#[test]
fn criterion_2_bias_order() {
    let start = Instant::now();
    let cfg = ExperimentConfig::new(ExperimentKind::Bias);
    let res = simlab::run_bias_experiment(&cfg, Exec::Parallel).unwrap();
    res.verify().unwrap();
    let a = &res.aggregates;
    let sc = a.get("slope.classical").unwrap();
    let si = a.get("slope.ideal").unwrap();
    let r1 = a.get("ratio.ideal[h=0.38]").unwrap();
    let r2 = a.get("ratio.ideal[h=0.29]").unwrap();
    let pass = (1.6..=2.4).contains(&sc)
        && (3.2..=4.8).contains(&si)
        && (r1 - 1.0).abs() <= 0.35
        && (r2 - 1.0).abs() <= 0.35;
    report(
        2,
        pass,
        format!(
            "slope classical {sc:.3} (need [1.6, 2.4]), slope ideal {si:.3} (need [3.2, 4.8]), \
             bias/(B h^4) at h=0.38: {r1:.3} +/- {:.3}, at h=0.29: {r2:.3} +/- {:.3} (need within 0.35 of 1)",
            a.get("se.ideal[h=0.38]").unwrap() / (a.get("bias_constant").unwrap() * 0.38f64.powi(4)),
            a.get("se.ideal[h=0.29]").unwrap() / (a.get("bias_constant").unwrap() * 0.29f64.powi(4)),
        ),
        start,
    );
}

#[test]
fn criterion_3_variance_constant() {
    let start = Instant::now();
    let cfg = ExperimentConfig::new(ExperimentKind::Variance);
    let res = simlab::run_variance_experiment(&cfg, Exec::Parallel).unwrap();
    res.verify().unwrap();
    let a = &res.aggregates;
    let ratio = a.get("ratio_a0").unwrap();
    report(
        3,
        (ratio - 1.0).abs() <= 0.10,
        format!(
            "n h Var = {:.5}, a0 = {:.5}, ratio {ratio:.4} (need within 0.10 of 1); finite-n term -h f^2 = {:.5}",
            a.get("n_h_var").unwrap(),
            a.get("a0").unwrap(),
            a.get("finite_n_correction").unwrap()
        ),
        start,
    );
}

#[test]
fn criterion_4_clt() {
    let start = Instant::now();
    let cfg = ExperimentConfig::new(ExperimentKind::Clt);
    let res = simlab::run_clt_experiment(&cfg, Exec::Parallel).unwrap();
    res.verify().unwrap();
    let a = &res.aggregates;
    let ks = a.get("ks").unwrap();
    let band = a.get("ks_band_01").unwrap();
    let cov = a.get("coverage[95]").unwrap();
    report(
        4,
        ks <= band && (0.92..=0.975).contains(&cov),
        format!(
            "KS {ks:.4} (band {band:.4}), 95% coverage {cov:.3} (need [0.92, 0.975]), sd(Z) {:.3}",
            a.get("sd_z").unwrap()
        ),
        start,
    );
}

#[test]
fn criterion_5_tail_comparison() {
    let start = Instant::now();
    let mut cfg = ExperimentConfig::new(ExperimentKind::Figure1);
    cfg.replications = Some(100);
    let res = simlab::run_figure1_experiment(&cfg, Exec::Parallel).unwrap();
    res.verify().unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for m in ["t4", "cauchy", "pareto"] {
        let a = &res.aggregates;
        let w = a.get(&format!("vkde_win_rate[{m}/tail]")).unwrap();
        let ratio = a.get(&format!("mean_ise_vkde[{m}/tail]")).unwrap() / a.get(&format!("mean_ise_kde[{m}/tail]")).unwrap();
        pass &= w >= 0.75;
        parts.push(format!("{m} {w:.2} (mean ISE ratio {ratio:.2})"));
    }
    report(
        5,
        pass,
        format!("tail-region VKDE win rate: {} (need >= 0.75 each)", parts.join(", ")),
        start,
    );
}

fn tricube_oracle(m: u32, power: u32) -> f64 {
    // ∫_{-1}^{1} u^m ((70/81)(1 − |u|³)³)^power du, expanded binomially.
    let n = 3 * power;
    let mut binom = 1.0;
    let mut s = 0.0;
    for k in 0..=n {
        if k > 0 {
            binom = binom * f64::from(n - k + 1) / f64::from(k);
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        s += sign * binom / f64::from(3 * k + m + 1);
    }
    2.0 * (70.0f64 / 81.0).powi(power as i32) * s
}

#[test]
fn criterion_6_moment_oracle() {
    let start = Instant::now();
    let k = Kernel::tricube();
    let m = compute_moments(&k, 4).unwrap();
    let errs = [
        (m.mu0 - tricube_oracle(0, 2)).abs(),
        (m.tau_1d(2).unwrap() - tricube_oracle(2, 1)).abs(),
        (m.tau_1d(4).unwrap() - tricube_oracle(4, 1)).abs(),
    ];
    let gl = GaussLegendre::standard();
    let breaks = [-1.0, -0.5, 0.0, 0.5, 1.0];
    let int_l = gl.integrate_panels(&breaks, |u| k.eval_l(&[u]).unwrap());
    let int_ul = gl.integrate_panels(&breaks, |u| u * k.eval_l(&[u]).unwrap());
    let worst = errs.iter().cloned().fold(0.0, f64::max);
    report(
        6,
        worst <= 1e-10 && int_l.abs() <= 1e-8 && int_ul.abs() <= 1e-8,
        format!(
            "max moment error {worst:.2e}, integral of L {int_l:.2e}, of uL {int_ul:.2e} \
             (mu0 {:.12}, tau2 {:.12}, tau4 {:.12})",
            m.mu0,
            m.tau_1d(2).unwrap(),
            m.tau_1d(4).unwrap()
        ),
        start,
    );
}

#[test]
fn criterion_7_sigma_identities() {
    let start = Instant::now();
    let m = compute_moments(&Kernel::tricube(), 4).unwrap();
    let clipping = ClippingSpec::quintic(0.3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let f = clipping.threshold() * rng.random_range(1.0..20.0);
        let general = sigma_t2(f, &m, &clipping).unwrap();
        let simple = f.powf(1.5) * (1.5 * m.mu0 + 0.25 * m.r_of_l);
        worst = worst.max(((general - simple) / simple).abs());
    }
    // Fully clipped: p′ vanishes at 0, so take f → 0⁺ where α = c.
    let mut clipped = 0.0f64;
    for f in [1e-12, 1e-10, 1e-8] {
        let s = sigma_t2(f, &m, &clipping).unwrap();
        clipped = clipped.max(((s - 0.3 * f * m.mu0) / s).abs());
    }
    report(
        7,
        worst <= 1e-12 && clipped <= 1e-12,
        format!("unclipped max rel. error {worst:.2e}, clipped max rel. error {clipped:.2e}"),
        start,
    );
}

#[test]
fn criterion_8_optimal_bandwidth() {
    let start = Instant::now();
    let cfg = ExperimentConfig::new(ExperimentKind::Sweep);
    let res = simlab::run_bandwidth_sweep(&cfg, Exec::Parallel).unwrap();
    res.verify().unwrap();
    let a = &res.aggregates;
    let rel = a.get("h_emp_over_h_exact").unwrap();
    let ratio = a.get("h_exact_over_h_rate").unwrap();
    let expect = (1.0f64 / 8.0).powf(1.0 / 9.0);
    report(
        8,
        (0.5..=2.0).contains(&rel) && (ratio - expect).abs() <= 1e-12,
        format!(
            "empirical minimizer {:.4} = {rel:.3} x h_exact {:.4} (need [0.5, 2]); h_exact/h_rate {ratio:.15}",
            a.get("h_emp_min").unwrap(),
            a.get("h_exact").unwrap()
        ),
        start,
    );
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

#[test]
fn criterion_9_oracle_equivalences() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let kernels = ["tricube", "epanechnikov", "biweight"];
    let mut mismatches = 0usize;
    for case in 0..100 {
        let model = MODELS_1D[rng.random_range(0..MODELS_1D.len())];
        let kernel = Kernel::by_name(kernels[rng.random_range(0..3)], 1).unwrap();
        let n = rng.random_range(1..400);
        let h = rng.random_range(0.05..2.0);
        let c = rng.random_range(0.05..1.5);
        let clipping = ClippingSpec::quintic(c).unwrap();
        let sample = Sample::from_1d(model.sample(5000 + case, n)).unwrap();
        let bw = BandwidthPair::new(rng.random_range(0.05..1.0), h).unwrap();
        let sums = [
            KernelSum::unit(&sample, &kernel, h).unwrap(),
            ideal_sum(&sample, &kernel, h, &clipping, model).unwrap(),
            plugin_sum(&sample, &kernel, bw, &clipping, PilotMode::LeaveSelfIn, Exec::Sequential).unwrap(),
            abramson_sum(&sample, &kernel, h, model).unwrap(),
            hall_marron_sum(&sample, &kernel, h, model).unwrap(),
            hhm_sum(&sample, &kernel, h, model, rng.random_range(0.1..3.0)).unwrap(),
        ];
        let (lo, hi) = sample.bounds()[0];
        for _ in 0..20 {
            let t = rng.random_range(lo - 2.0..hi + 2.0);
            for s in &sums {
                if !close(s.eval(&[t]), s.eval_brute(&[t])) {
                    mismatches += 1;
                }
            }
        }
    }

    // Every observation in the square-root region of the oracle.
    let model = DensityModel::Normal;
    let clipping = ClippingSpec::quintic(0.3).unwrap();
    let xs: Vec<f64> = (0..200).map(|i| -0.9 + 1.8 * i as f64 / 199.0).collect();
    let sample = Sample::from_1d(xs).unwrap();
    assert!(sample.rows().all(|x| model.pdf(x) >= clipping.threshold()));
    let k = Kernel::tricube();
    let grid = Grid::linspace(-2.0, 2.0, 401);
    let ev = Evaluator::default();
    let ideal = ev.ideal_vkde(&sample, &k, 0.4, &clipping, model, &grid).unwrap();
    let hm = ev.hall_marron(&sample, &k, 0.4, model, &grid).unwrap();
    let hm_ok = ideal.values.iter().zip(&hm.values).all(|(a, b)| close(*a, *b));

    // Saturated clipping: c large enough that f̂/c² makes p − 1 vanish.
    let sample = Sample::from_1d(DensityModel::StudentT4.sample(3, 2000)).unwrap();
    let c = 1e3;
    let clipping = ClippingSpec::quintic(c).unwrap();
    let bw = BandwidthPair::new(0.2, 0.35 * c).unwrap();
    let grid = Grid::linspace(-5.0, 5.0, 401);
    let plug = ev.plugin_vkde(&sample, &k, bw, &clipping, &grid).unwrap();
    let classical = ev.classical_kde(&sample, &k, 0.35, &grid).unwrap();
    let sat_ok = plug.values.iter().zip(&classical.values).all(|(a, b)| close(*a, *b));

    report(
        9,
        mismatches == 0 && hm_ok && sat_ok,
        format!(
            "windowed vs brute mismatches {mismatches}/12000; ideal = Hall-Marron: {hm_ok}; \
             saturated plug-in = classical(h2/c): {sat_ok}"
        ),
        start,
    );
}
