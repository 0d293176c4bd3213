//! End-to-end simulation experiments. Every report is a pure function of the config.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::design::{EnsembleConfig, Scheme};
use crate::ensemble::{complete_u, generalized_incomplete_u, EnsembleOptions};
use crate::error::{Error, Result};
use crate::inference::{
    be_bound_complete, be_bound_convolution, be_bound_incomplete_linear, build_ci, limit_variance, BeInputs,
};
use crate::learners::{KernelKind, KernelSpec};
use crate::rng::SeedPath;
use crate::simlab::generators::{GeneratorSpec, ResponseMoments};
use crate::simlab::ks::{ks_se, ks_to_standard_normal};
use crate::simlab::report::ExperimentReport;
use crate::stats::{binomial_f64, mean, sample_variance, Count, NeumaierSum};
use crate::variance::{
    c_of_k, closed_form_ratio, estimate_components, independent_draws, variance_ratio, ClosedFormExample,
    ClosedFormParams, McPlan,
};

const NORMAL_ABS3: f64 = 1.595_769_121_605_730_7;
const THETA_STREAM: u64 = 0x7E7A_0000_0000_0001;
const ZETA_STREAM: u64 = 0x7E7A_0000_0000_0002;
const REPLICATE_STREAM: u64 = 0x7E7A_0000_0000_0003;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSizes {
    #[serde(default = "d_outer")]
    pub m_outer: usize,
    #[serde(default = "d_inner")]
    pub m_inner: usize,
    #[serde(default = "d_s")]
    pub m_s: usize,
}

fn d_outer() -> usize {
    McPlan::default().m_outer
}
fn d_inner() -> usize {
    McPlan::default().m_inner
}
fn d_s() -> usize {
    McPlan::default().m_s
}

impl Default for McSizes {
    fn default() -> Self {
        McSizes { m_outer: d_outer(), m_inner: d_inner(), m_s: d_s() }
    }
}

impl From<&McSizes> for McPlan {
    fn from(m: &McSizes) -> Self {
        McPlan { m_outer: m.m_outer, m_inner: m.m_inner, m_s: m.m_s }
    }
}

/// Kernel, generator, grids and Monte-Carlo sizes for one experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kernel: KernelSpec,
    pub generator: GeneratorSpec,
    #[serde(default)]
    pub n_grid: Vec<usize>,
    #[serde(default)]
    pub s_grid: Vec<usize>,
    /// Schedule `s = ceil(n^beta)`; overrides `s_grid` for n-indexed experiments.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_exponent: Option<f64>,
    /// Subsample budget N (ignored by the complete scheme).
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub n_sub: Option<u64>,
    #[serde(default = "default_scheme")]
    pub scheme: Scheme,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default = "default_level")]
    pub level: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub mc: McSizes,
    /// Draws for the Monte-Carlo `theta` oracle.
    #[serde(default = "default_m_theta")]
    pub m_theta: usize,
    /// Known components; when absent they are analytic (mean kernel) or estimated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta_s: Option<f64>,
}

fn default_scheme() -> Scheme {
    Scheme::Bernoulli
}
fn default_replications() -> usize {
    500
}
fn default_level() -> f64 {
    0.95
}
fn default_m_theta() -> usize {
    1_000_000
}

impl ExperimentConfig {
    pub fn new(kernel: KernelSpec, generator: GeneratorSpec) -> Self {
        ExperimentConfig {
            kernel,
            generator,
            n_grid: Vec::new(),
            s_grid: Vec::new(),
            s_exponent: None,
            n_sub: None,
            scheme: default_scheme(),
            replications: default_replications(),
            level: default_level(),
            seed: 0,
            mc: McSizes::default(),
            m_theta: default_m_theta(),
            theta: None,
            zeta1: None,
            zeta_s: None,
        }
    }

    fn validate(&self) -> Result<()> {
        self.generator.validate()?;
        self.kernel.validate(self.generator.p())?;
        if self.replications < 2 {
            return Err(Error::invalid("replications must be at least 2"));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::invalid("level must lie strictly between 0 and 1"));
        }
        if let Some(b) = self.s_exponent {
            if !(b > 0.0 && b <= 1.0) {
                return Err(Error::invalid("s_exponent must lie in (0, 1]"));
            }
        }
        Ok(())
    }

    /// `(n, s)` grid points in config order.
    fn n_s_points(&self) -> Result<Vec<(usize, usize)>> {
        if self.n_grid.is_empty() {
            return Err(Error::invalid("n_grid must be nonempty"));
        }
        let mut out = Vec::new();
        for &n in &self.n_grid {
            if let Some(b) = self.s_exponent {
                out.push((n, ((n as f64).powf(b).ceil() as usize).clamp(1, n)));
            } else if self.s_grid.is_empty() {
                return Err(Error::invalid("either s_grid or s_exponent is required"));
            } else {
                out.extend(self.s_grid.iter().map(|&s| (n, s)));
            }
        }
        for &(n, s) in &out {
            if s == 0 || s > n {
                return Err(Error::invalid(format!("need 1 <= s <= n at grid point n = {n}, s = {s}")));
            }
        }
        Ok(out)
    }

    fn json(&self) -> serde_json::Value {
        serde_json::to_value(self).unwrap_or(serde_json::Value::Null)
    }
}

/// Where the standardizing quantities came from.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Truth {
    theta: f64,
    theta_se: f64,
    zeta1: f64,
    zeta_s: f64,
    zeta1_se: f64,
    zeta_s_se: f64,
    source: &'static str,
}

fn analytic_mean_truth(cfg: &ExperimentConfig, s: usize) -> Option<(Truth, ResponseMoments)> {
    if cfg.kernel.kind != KernelKind::Mean {
        return None;
    }
    let m = cfg.generator.response_moments()?;
    let sf = s as f64;
    Some((
        Truth {
            theta: m.mean,
            theta_se: 0.0,
            zeta1: m.variance / (sf * sf),
            zeta_s: m.variance / sf,
            zeta1_se: 0.0,
            zeta_s_se: 0.0,
            source: "analytic",
        },
        m,
    ))
}

/// Analytic, provided or Monte-Carlo standardization at subsample size `s`.
fn truth_for(cfg: &ExperimentConfig, s: usize, report: &mut ExperimentReport) -> Result<Truth> {
    if let (Some(theta), Some(zeta1), Some(zeta_s)) = (cfg.theta, cfg.zeta1, cfg.zeta_s) {
        report.note("standardization: provided theta and zeta components");
        return Ok(Truth { theta, theta_se: 0.0, zeta1, zeta_s, zeta1_se: 0.0, zeta_s_se: 0.0, source: "provided" });
    }
    if let Some((t, _)) = analytic_mean_truth(cfg, s) {
        report.note("standardization: analytic zeta components of the mean kernel");
        return Ok(t);
    }
    let path = SeedPath::new(cfg.seed).child(s as u64);
    let vc = estimate_components(&cfg.kernel, &cfg.generator, s, (&cfg.mc).into(), path.child(ZETA_STREAM).seed())?;
    let (theta, theta_se) = match cfg.theta {
        Some(t) => (t, 0.0),
        None => {
            let m = cfg.m_theta.max(2);
            let draws = independent_draws(&cfg.kernel, &cfg.generator, s, m, path.child(THETA_STREAM))?;
            let v = &draws.values;
            (mean(v), (sample_variance(v) / v.len() as f64).sqrt())
        }
    };
    report.note("standardization: Monte-Carlo zeta components and theta oracle (see zeta1/zeta_s/theta rows)");
    Ok(Truth {
        theta,
        theta_se,
        zeta1: cfg.zeta1.unwrap_or(vc.zeta1_omega.value),
        zeta_s: cfg.zeta_s.unwrap_or(vc.zeta_s.value),
        zeta1_se: vc.zeta1_omega.se,
        zeta_s_se: vc.zeta_s.se,
        source: "estimated",
    })
}

/// One replicate: a fresh dataset and one ensemble estimate.
fn replicate(cfg: &ExperimentConfig, n: usize, s: usize, path: SeedPath) -> Result<(f64, u64)> {
    let data = cfg.generator.generate(n, path.child(0).seed())?;
    let master = path.child(1).seed();
    if cfg.scheme == Scheme::Complete {
        return complete_value(&data, &cfg.kernel, s, master);
    }
    let n_sub = cfg.n_sub.ok_or_else(|| Error::invalid("N is required for incomplete schemes"))?;
    let ec = EnsembleConfig::new(s, n_sub, cfg.scheme, master);
    let r = generalized_incomplete_u(&data, &cfg.kernel, &ec, EnsembleOptions::default())?;
    Ok((r.theta_hat, r.realized_n))
}

/// Complete U-statistic; for the mean kernel this is the grand mean for every `s`, which
/// avoids enumerating `C(n, s)` subsamples.
fn complete_value(data: &Dataset, kernel: &KernelSpec, s: usize, master: u64) -> Result<(f64, u64)> {
    if kernel.kind == KernelKind::Mean {
        let mut acc = NeumaierSum::new();
        data.responses().for_each(|y| acc.add(y));
        let count = match Count::of_binomial(data.n() as u64, s as u64) {
            Count::Exact(c) => u64::try_from(c).unwrap_or(u64::MAX),
            Count::Huge => u64::MAX,
        };
        return Ok((acc.value() / data.n() as f64, count));
    }
    let r = complete_u(data, kernel, s, master, EnsembleOptions::default())?;
    Ok((r.theta_hat, r.realized_n))
}

fn effective_budget(cfg: &ExperimentConfig) -> u64 {
    match cfg.scheme {
        Scheme::Complete => u64::MAX,
        _ => cfg.n_sub.unwrap_or(u64::MAX),
    }
}

fn replicates(cfg: &ExperimentConfig, n: usize, s: usize, point: u64) -> Result<Vec<(f64, u64)>> {
    let base = SeedPath::new(cfg.seed).child(REPLICATE_STREAM).child(point);
    (0..cfg.replications).into_par_iter().map(|r| replicate(cfg, n, s, base.child(r as u64))).collect()
}

fn grid_label(n: usize, s: usize) -> String {
    format!("{n};{s}")
}

fn push_truth(report: &mut ExperimentReport, key: &str, label: &str, t: &Truth) {
    let se = |v: f64| if t.source == "estimated" { Some(v) } else { None };
    report.push(key, label, "theta", t.theta, se(t.theta_se));
    report.push(key, label, "zeta1", t.zeta1, se(t.zeta1_se));
    report.push(key, label, "zeta_s", t.zeta_s, se(t.zeta_s_se));
}

/// Berry-Esseen inputs when the mean kernel's moments are known analytically.
fn analytic_bound_inputs(cfg: &ExperimentConfig, n: usize, s: usize) -> Option<(BeInputs, bool)> {
    let (t, m) = analytic_mean_truth(cfg, s)?;
    let abs3 = m.abs3?;
    let sf = s as f64;
    let gaussian = m.mu4.is_some_and(|mu4| (mu4 - 3.0 * m.variance * m.variance).abs() <= 1e-12 * mu4.abs().max(1e-300))
        && (abs3 - NORMAL_ABS3 * m.variance.powf(1.5)).abs() <= 1e-12 * abs3.max(1e-300);
    let n_sub = effective_budget(cfg);
    let total = binomial_f64(n as u64, s as u64);
    let p = if cfg.scheme == Scheme::Complete { 1.0 } else { (n_sub as f64 / total).min(1.0) };
    let mut inputs = BeInputs {
        n: n as u64,
        s: s as u64,
        n_sub,
        zeta1: t.zeta1,
        zeta_s: t.zeta_s,
        eg2: t.zeta1,
        eg3: abs3 / (sf * sf * sf),
        eh2: t.zeta_s,
        eh3: 0.0,
        kur1: None,
        kur2: None,
        p,
    };
    if gaussian {
        inputs.eh3 = NORMAL_ABS3 * t.zeta_s.powf(1.5);
        inputs.kur1 = Some(3.0);
        inputs.kur2 = Some(15.0 * std::f64::consts::PI / 8.0);
    }
    Some((inputs, gaussian))
}

/// Replicated estimates standardized by the normal-limit variance; reports KS distances
/// under both the full (`s^2 zeta1/n + zeta_s/N`) and linear (`s^2 zeta1/n`) normalizations.
pub fn run_clt_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let started = Instant::now();
    cfg.validate()?;
    let points = cfg.n_s_points()?;
    let mut report = ExperimentReport::new("clt", cfg.seed, cfg.json());
    let mut truths: BTreeMap<usize, Truth> = BTreeMap::new();
    let key = "n;s";
    for (point, &(n, s)) in points.iter().enumerate() {
        let truth = match truths.get(&s) {
            Some(t) => *t,
            None => {
                let t = truth_for(cfg, s, &mut report)?;
                truths.insert(s, t);
                t
            }
        };
        let label = grid_label(n, s);
        let reps = replicates(cfg, n, s, point as u64)?;
        let budget = effective_budget(cfg);
        let full_var = limit_variance(truth.zeta1, truth.zeta_s, n as u64, s as u64, budget);
        let lin_var = limit_variance(truth.zeta1, 0.0, n as u64, s as u64, 1);
        if !(full_var > 0.0) {
            return Err(Error::Degenerate(format!("normal-limit variance is zero at n = {n}, s = {s}")));
        }
        let std_full: Vec<f64> = reps.iter().map(|(t, _)| (t - truth.theta) / full_var.sqrt()).collect();
        let std_lin: Vec<f64> = reps.iter().map(|(t, _)| (t - truth.theta) / lin_var.sqrt()).collect();
        let r = cfg.replications;
        let v = sample_variance(&std_full);
        report.push(key, &label, "ks", ks_to_standard_normal(&std_full), Some(ks_se(r)));
        report.push(key, &label, "ks_linear", ks_to_standard_normal(&std_lin), Some(ks_se(r)));
        report.push(key, &label, "mean_std", mean(&std_full), Some((v / r as f64).sqrt()));
        report.push(key, &label, "var_std", v, Some(v * (2.0 / (r - 1) as f64).sqrt()));
        let realized: Vec<f64> = reps.iter().map(|(_, m)| *m as f64).collect();
        report.push(key, &label, "realized_N_mean", mean(&realized), None);
        push_truth(&mut report, key, &label, &truth);
        if let Some((inputs, gaussian)) = analytic_bound_inputs(cfg, n, s) {
            report.push(key, &label, "be_complete", be_bound_complete(&inputs)?.total, None);
            if cfg.scheme != Scheme::Complete {
                report.push(key, &label, "be_incomplete", be_bound_incomplete_linear(&inputs)?.total, None);
            }
            if gaussian {
                report.push(key, &label, "be_convolution_c1", be_bound_convolution(&inputs, 1.0)?.total, None);
                report.note("be_convolution_c1 holds only up to an unspecified universal constant C (reported with C = 1)");
            }
        }
    }
    report.metadata.wall_time_secs = started.elapsed().as_secs_f64();
    Ok(report)
}

/// Fraction of replications whose normal-limit interval covers `theta`.
pub fn run_coverage_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let started = Instant::now();
    cfg.validate()?;
    let points = cfg.n_s_points()?;
    let mut report = ExperimentReport::new("coverage", cfg.seed, cfg.json());
    let key = "n;s";
    for (point, &(n, s)) in points.iter().enumerate() {
        let truth = truth_for(cfg, s, &mut report)?;
        let label = grid_label(n, s);
        let reps = replicates(cfg, n, s, point as u64)?;
        let budget = effective_budget(cfg);
        let variance = limit_variance(truth.zeta1, truth.zeta_s, n as u64, s as u64, budget);
        let degenerate = !(variance > 0.0);
        let mut covered = 0usize;
        let mut width = 0.0;
        for (theta_hat, _) in &reps {
            if degenerate {
                covered += usize::from(*theta_hat == truth.theta);
            } else {
                let ci = build_ci(*theta_hat, truth.zeta1, truth.zeta_s, n as u64, s as u64, budget, cfg.level)?;
                covered += usize::from(ci.covers(truth.theta));
                width = ci.half_width;
            }
        }
        let r = reps.len() as f64;
        let c = covered as f64 / r;
        report.push(key, &label, "coverage", c, Some((c * (1.0 - c) / r).sqrt()));
        report.push(key, &label, "nominal", cfg.level, None);
        report.push(key, &label, "half_width", width, None);
        report.push(key, &label, "degenerate", f64::from(u8::from(degenerate)), None);
        if degenerate {
            report.note("degenerate: zero normal-limit variance, intervals have zero width");
        }
        push_truth(&mut report, key, &label, &truth);
    }
    report.metadata.wall_time_secs = started.elapsed().as_secs_f64();
    Ok(report)
}

/// Closed-form overlay for the kernel / generator pair, when one exists.
fn closed_form_for(cfg: &ExperimentConfig, s: usize) -> Option<f64> {
    let moments = cfg.generator.response_moments();
    let (example, params) = match cfg.kernel.kind {
        KernelKind::Mean => (ClosedFormExample::Mean, ClosedFormParams { s, ..Default::default() }),
        KernelKind::Variance => {
            let m = moments?;
            (ClosedFormExample::Variance, ClosedFormParams { s, k: 0, sigma2: m.variance, mu4: m.mu4? })
        }
        KernelKind::RandomK => (ClosedFormExample::RandomK, ClosedFormParams { s, k: cfg.kernel.k, ..Default::default() }),
        KernelKind::OlsPredict => (ClosedFormExample::Ols, ClosedFormParams { s, ..Default::default() }),
        KernelKind::Knn => match cfg.generator {
            GeneratorSpec::OneMinusX { sigma } if cfg.kernel.k == 1 && cfg.kernel.target_x == [0.0] => {
                (ClosedFormExample::OneNn, ClosedFormParams { s, k: 1, sigma2: sigma * sigma, mu4: 0.0 })
            }
            _ => return None,
        },
        _ => return None,
    };
    closed_form_ratio(example, params).ok().map(|r| r.value())
}

/// Monte-Carlo variance ratio across `s_grid`, with closed-form and `c(k)` overlays.
pub fn run_ratio_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let started = Instant::now();
    cfg.validate()?;
    if cfg.s_grid.is_empty() {
        return Err(Error::invalid("s_grid must be nonempty"));
    }
    let mut report = ExperimentReport::new("ratio", cfg.seed, cfg.json());
    let key = "s";
    for &s in &cfg.s_grid {
        let label = s.to_string();
        let vc = estimate_components(&cfg.kernel, &cfg.generator, s, (&cfg.mc).into(), SeedPath::new(cfg.seed).child(s as u64).seed())?;
        report.push(key, &label, "zeta1_omega", vc.zeta1_omega.value, Some(vc.zeta1_omega.se));
        report.push(key, &label, "zeta_s_omega", vc.zeta_s_omega.value, Some(vc.zeta_s_omega.se));
        report.push(key, &label, "zeta_s", vc.zeta_s.value, Some(vc.zeta_s.se));
        let failures = vc.zeta1_omega.failures + vc.zeta_s.failures;
        if failures > 0 {
            report.push(key, &label, "numerical_failures", failures as f64, None);
            report.note("some kernel evaluations failed numerically and were dropped (numerical_failures rows)");
        }
        let flagged = vc.zeta1_omega.flagged + vc.zeta_s.flagged;
        if flagged > 0 {
            report.push(key, &label, "flagged_evaluations", flagged as f64, None);
        }
        match variance_ratio(&vc, s) {
            Ok(r) => {
                report.push(key, &label, "ratio", r.value, Some(r.se));
                if cfg.kernel.kind == KernelKind::RpTree {
                    let d = cfg.generator.p() as i32;
                    let scale = (s as f64).ln().powi(2 * d - 2);
                    report.push(key, &label, "ratio_over_log_power", r.value / scale, Some(r.se / scale));
                    report.note("ratio_over_log_power divides by (log s)^(2d-2); diagnostic only");
                }
            }
            Err(Error::DegenerateProjection { .. }) => {
                report.push(key, &label, "ratio", f64::NAN, None);
                report.note("zeta1 not distinguishable from zero at some grid points; ratio reported as NaN");
            }
            Err(e) => return Err(e),
        }
        if let Some(cf) = closed_form_for(cfg, s) {
            report.push(key, &label, "closed_form", cf, None);
        }
        if cfg.kernel.kind == KernelKind::Knn && 2 * cfg.kernel.k <= 2000 {
            report.push(key, &label, "c_k", c_of_k(cfg.kernel.k, 2000)?, None);
        }
    }
    report.metadata.wall_time_secs = started.elapsed().as_secs_f64();
    Ok(report)
}

/// `c(k)` for `k = 1..=k_max` at a fixed approximation size.
pub fn run_ck_experiment(k_max: usize, s_approx: usize) -> Result<ExperimentReport> {
    let started = Instant::now();
    if k_max == 0 {
        return Err(Error::invalid("k_max must be at least 1"));
    }
    let mut report = ExperimentReport::new("ck", 0, serde_json::json!({ "k_max": k_max, "s_approx": s_approx }));
    for k in 1..=k_max {
        report.push("k", &k.to_string(), "c_k", c_of_k(k, s_approx)?, None);
    }
    report.metadata.wall_time_secs = started.elapsed().as_secs_f64();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn normal_mean() -> ExperimentConfig {
        ExperimentConfig::new(
            KernelSpec::mean(),
            GeneratorSpec::LinearGaussian { beta: vec![0.0], sigma: 1.0, covariates: Default::default() },
        )
    }

    #[test]
    fn ck_has_one_row_per_k() {
        let r = run_ck_experiment(50, 2000).unwrap();
        assert_eq!(r.rows.len(), 50);
        assert_eq!(r.rows[0].value, 2.0);
    }

    #[test]
    fn clt_small_is_reproducible() {
        let mut cfg = normal_mean();
        cfg.n_grid = vec![50, 200];
        cfg.s_grid = vec![5];
        cfg.n_sub = Some(100);
        cfg.replications = 200;
        cfg.seed = 11;
        let a = run_clt_experiment(&cfg).unwrap();
        let b = run_clt_experiment(&cfg).unwrap();
        assert_eq!(a.to_csv_string().unwrap(), b.to_csv_string().unwrap());
        for row in a.stat("var_std") {
            assert!((row.value - 1.0).abs() < 0.3, "{row:?}");
        }
    }

    #[test]
    fn degenerate_coverage() {
        let mut cfg = ExperimentConfig::new(
            KernelSpec::mean(),
            GeneratorSpec::LinearGaussian { beta: vec![0.0], sigma: 0.0, covariates: Default::default() },
        );
        cfg.n_grid = vec![20];
        cfg.s_grid = vec![4];
        cfg.n_sub = Some(30);
        cfg.replications = 10;
        let r = run_coverage_experiment(&cfg).unwrap();
        assert_eq!(r.stat("coverage")[0].value, 1.0);
        assert_eq!(r.stat("degenerate")[0].value, 1.0);
    }

    #[test]
    fn schedule_points() {
        let mut cfg = normal_mean();
        cfg.n_grid = vec![500, 2000];
        cfg.s_exponent = Some(0.4);
        assert_eq!(cfg.n_s_points().unwrap(), vec![(500, 13), (2000, 21)]);
    }

    #[test]
    fn config_json() {
        let cfg: ExperimentConfig = serde_json::from_str(
            r#"{"kernel":{"kind":"mean"},"generator":{"family":"one_minus_x","sigma":1.0},"n_grid":[100],"s_grid":[10],"N":50}"#,
        )
        .unwrap();
        assert_eq!(cfg.n_sub, Some(50));
        assert_eq!(cfg.scheme, Scheme::Bernoulli);
    }
}
