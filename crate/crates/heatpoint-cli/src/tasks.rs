//! The four experiment tasks. Each writes its own files and reports the
//! failures it met; a single failing point never stops a sweep.

use std::io;

use heatpoint_core::control::{
    biorthogonal_family_with, blowup_diagnostic, hum_optimal_control_with, moment_control_interval, moment_control_point,
    rescale_and_average, simulated_residual, BlowupRow, FamilyConfig, FamilyMeta,
};
use heatpoint_core::minimal_time::{estimate_t0, exponent, liouville_scales, series_test, SeriesVerdict};
use heatpoint_core::observability::{obs_constant_doubling, rate_fit};
use heatpoint_core::sequences::{check_ineqsin, construct_eps_sequence, IneqsinCheck, SequenceConfig};
use heatpoint_core::{
    AnchorPoint, ControlReport, EpsSequence, Error, FourierState, MinimalTimeEstimate, ObsConfig, RateFit, Signal, SpatialProfile,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{AnchorInput, ExperimentConfig};
use crate::output::{num, opt, Failure, OutputDir, Status, TaskStatus};

pub struct Context<'a> {
    pub cfg: &'a ExperimentConfig,
    pub anchor: Result<AnchorPoint, Error>,
    pub pool: &'a rayon::ThreadPool,
    pub out: &'a OutputDir,
}

impl Context<'_> {
    fn top_bits(&self) -> u32 {
        *self.cfg.bits.last().expect("validated ladder")
    }

    fn anchor_or_fail(&self, task: &str) -> Result<&AnchorPoint, TaskStatus> {
        self.anchor.as_ref().map_err(|e| TaskStatus {
            task: task.to_string(),
            status: Status::Failed,
            failures: vec![Failure::new("anchor", e)],
        })
    }
}

fn custom(item: impl Into<String>, kind: &str, error: impl Into<String>) -> Failure {
    Failure { item: item.into(), kind: kind.to_string(), error: error.into() }
}

#[derive(Serialize)]
struct ScaleExponent {
    q: String,
    exponent: Option<f64>,
}

#[derive(Serialize)]
struct ClassifyReport<'a> {
    anchor: &'a AnchorInput,
    point: Option<&'a AnchorPoint>,
    point_text: Option<String>,
    horizon: f64,
    estimate: Option<MinimalTimeEstimate>,
    series_at_horizon: Option<SeriesVerdict>,
    scales: Vec<ScaleExponent>,
}

pub fn classify(ctx: &Context) -> io::Result<TaskStatus> {
    const TASK: &str = "classify";
    let cfg = ctx.cfg;
    let x = match ctx.anchor_or_fail(TASK) {
        Ok(x) => x,
        Err(s) => {
            let r = ClassifyReport {
                anchor: &cfg.anchor,
                point: None,
                point_text: None,
                horizon: cfg.horizon,
                estimate: None,
                series_at_horizon: None,
                scales: vec![],
            };
            ctx.out.json("classify.json", &r)?;
            return Ok(s);
        }
    };
    let bits = ctx.top_bits();
    let mut failures = Vec::new();
    let estimate = estimate_t0(x, cfg.classify_n_max, bits).map_err(|e| failures.push(Failure::new("estimate", &e))).ok();
    let series = series_test(x, cfg.horizon, cfg.classify_n_max / 2, cfg.obs_tol, bits)
        .map_err(|e| failures.push(Failure::new("series", &e)))
        .ok();
    let scales = liouville_scales(x)
        .unwrap_or_default()
        .into_iter()
        .map(|q| {
            let exponent = match q.to_u64() {
                Some(n) => exponent(x, n, bits).map_err(|e| failures.push(Failure::new(format!("scale {q}"), &e))).ok(),
                None => {
                    failures.push(custom(format!("scale {q}"), "scale-too-large", "scale does not fit in u64"));
                    None
                }
            };
            ScaleExponent { q: q.to_string(), exponent }
        })
        .collect();
    if let Some(e) = &estimate {
        let rows: Vec<Vec<String>> =
            e.per_n_exponents.iter().enumerate().map(|(i, p)| vec![(i + 1).to_string(), num(*p)]).collect();
        ctx.out.csv("exponents.csv", &["n", "exponent"], &rows)?;
    }
    let r = ClassifyReport {
        anchor: &cfg.anchor,
        point: Some(x),
        point_text: Some(x.to_string()),
        horizon: cfg.horizon,
        estimate,
        series_at_horizon: series,
        scales,
    };
    ctx.out.json("classify.json", &r)?;
    Ok(TaskStatus::from_failures(TASK, failures, 2))
}

#[derive(Serialize)]
struct SweepPoint {
    eps: f64,
    sqrt_scale: f64,
}

#[derive(Serialize)]
struct FitReport {
    horizon: f64,
    fit: Option<RateFit>,
    fit_error: Option<String>,
    used: Vec<SweepPoint>,
    excluded: Vec<Failure>,
}

const GNUPLOT: &str = "\
set logscale xy
set xlabel 'eps'
set ylabel 'sqrt-scale constant'
set key left top
f(x) = c * x**p
c = 1; p = 0.5
fit log(f(x)) 'plot.dat' using 1:(log($2)) via c, p
plot 'plot.dat' using 1:2 with points pt 7 title 'converged', f(x) title sprintf('slope %.3f', p)
";

pub fn obs_sweep(ctx: &Context) -> io::Result<TaskStatus> {
    const TASK: &str = "obs-sweep";
    let cfg = ctx.cfg;
    let x = match ctx.anchor_or_fail(TASK) {
        Ok(x) => x,
        Err(s) => return Ok(s),
    };
    let obs = ObsConfig { tol: cfg.obs_tol, ladder: cfg.bits.clone(), ..ObsConfig::default() };
    let grid = cfg.eps_grid();
    let results: Vec<_> = ctx.pool.install(|| {
        grid.par_iter()
            .map(|&eps| {
                SpatialProfile::interval(x.clone(), eps)
                    .and_then(|p| obs_constant_doubling(cfg.horizon, &p, cfg.n_start, cfg.n_max, &obs))
            })
            .collect()
    });
    let mut rows = Vec::new();
    let mut used = Vec::new();
    let mut excluded = Vec::new();
    for (&eps, r) in grid.iter().zip(&results) {
        match r {
            Ok(r) => {
                let s = r.sqrt_scale.to_f64();
                rows.push(vec![
                    num(eps),
                    num(s),
                    num(r.lambda_min.to_f64()),
                    r.n_used.to_string(),
                    r.converged.to_string(),
                    num(r.relative_change),
                    r.precision_bits.to_string(),
                    r.precision_verified.to_string(),
                    String::new(),
                ]);
                if r.converged {
                    used.push(SweepPoint { eps, sqrt_scale: s });
                } else {
                    excluded.push(custom(
                        format!("eps={eps}"),
                        "unconverged",
                        format!("relative change {} at N={} against 2N", r.relative_change, r.n_used),
                    ));
                }
            }
            Err(e) => {
                let mut row = vec![num(eps)];
                row.extend(std::iter::repeat_n(String::new(), 7));
                row.push(e.kind().to_string());
                rows.push(row);
                excluded.push(Failure::new(format!("eps={eps}"), e));
            }
        }
    }
    ctx.out.csv(
        "sweep.csv",
        &["eps", "sqrt_scale", "lambda_min", "n_used", "converged", "relative_change", "precision_bits", "precision_verified", "error"],
        &rows,
    )?;
    let pts: Vec<(f64, f64)> = used.iter().map(|p| (p.eps, p.sqrt_scale)).collect();
    let (fit, fit_error) = match rate_fit(&pts) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let mut plot = String::from("# eps sqrt_scale\n");
    for p in &used {
        plot.push_str(&format!("{} {}\n", num(p.eps), num(p.sqrt_scale)));
    }
    ctx.out.text("plot.dat", &plot)?;
    ctx.out.text("plot.gp", GNUPLOT)?;
    let mut failures = excluded.clone();
    if let Some(e) = &fit_error {
        failures.push(custom("fit", "fit-unavailable", e.clone()));
    }
    ctx.out.json("fit.json", &FitReport { horizon: cfg.horizon, fit, fit_error, used, excluded })?;
    Ok(TaskStatus::from_failures(TASK, failures, grid.len() + 1))
}

#[derive(Serialize)]
struct NamedControl {
    name: &'static str,
    report: Option<ControlReport>,
    error: Option<Failure>,
}

#[derive(Serialize)]
struct ControlSummary<'a> {
    datum: &'a [f64],
    horizon: f64,
    modes: usize,
    eps: f64,
    family: Option<FamilyMeta>,
    controls: Vec<NamedControl>,
}

struct BlowupLine {
    row: BlowupRow,
    averaged_residual: Option<f64>,
    averaged_error: Option<Error>,
}

pub fn control(ctx: &Context) -> io::Result<TaskStatus> {
    const TASK: &str = "control";
    let cfg = ctx.cfg;
    let x = match ctx.anchor_or_fail(TASK) {
        Ok(x) => x,
        Err(s) => return Ok(s),
    };
    let bits = ctx.top_bits();
    let (t, n) = (cfg.horizon, cfg.control_modes);
    let u0 = FourierState::from_f64(&cfg.datum, bits).and_then(|u| u.resized(n));
    let u0 = match u0 {
        Ok(u) => u,
        Err(e) => return Ok(TaskStatus { task: TASK.into(), status: Status::Failed, failures: vec![Failure::new("datum", &e)] }),
    };
    let mut failures = Vec::new();
    let family = biorthogonal_family_with(t, n, &FamilyConfig { ladder: cfg.bits.clone(), ..FamilyConfig::default() });
    let mut controls = Vec::new();
    let mut push = |name: &'static str, r: heatpoint_core::Result<ControlReport>| {
        let entry = match r {
            Ok(rep) if rep.residual_norm <= cfg.residual_tol => NamedControl { name, report: Some(rep), error: None },
            Ok(rep) => {
                let f = custom(name, "residual-above-tolerance", format!("residual {} > {}", rep.residual_norm, cfg.residual_tol));
                failures.push(f.clone());
                NamedControl { name, report: Some(rep), error: Some(f) }
            }
            Err(e) => {
                let f = Failure::new(name, &e);
                failures.push(f.clone());
                NamedControl { name, report: None, error: Some(f) }
            }
        };
        controls.push(entry);
    };
    match &family {
        Ok(fam) => {
            push("moment-interval", moment_control_interval(&u0, t, x, cfg.eps_start, fam));
            push("moment-point", moment_control_point(&u0, t, x, fam));
        }
        Err(e) => {
            push("moment-interval", Err(e.clone()));
            push("moment-point", Err(e.clone()));
        }
    }
    let interval = SpatialProfile::interval(x.clone(), cfg.eps_start);
    push("hum-interval", interval.and_then(|p| hum_optimal_control_with(&u0, t, &p, n, &cfg.bits)));
    push("hum-point", hum_optimal_control_with(&u0, t, &SpatialProfile::dirac(x.clone()), n, &cfg.bits));

    // sampled signals of every control that exists
    let mut header = vec!["t".to_string()];
    let mut columns = Vec::new();
    for c in &controls {
        let Some(rep) = &c.report else { continue };
        // per-mode controls act in space and time; their averaged pointwise form is tabulated
        let (name, sampled) = if matches!(rep.control.signal, Signal::PerMode { .. }) {
            let name = format!("{}-averaged", c.name);
            (name, rescale_and_average(&rep.control, cfg.average_delta).and_then(|a| a.sample(cfg.signal_samples, bits)))
        } else {
            (c.name.to_string(), rep.control.sample(cfg.signal_samples, bits))
        };
        match sampled {
            Ok(s) => {
                header.push(name);
                columns.push(s);
            }
            Err(e) => failures.push(Failure::new(format!("{name} samples"), &e)),
        }
    }
    let rows: Vec<Vec<String>> = (0..cfg.signal_samples)
        .map(|i| {
            let t_i = i as f64 * t / (cfg.signal_samples - 1) as f64;
            std::iter::once(num(t_i)).chain(columns.iter().map(|c| num(c[i].1))).collect()
        })
        .collect();
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    ctx.out.csv("signals.csv", &header_refs, &rows)?;

    let grid = cfg.eps_grid();
    let lines: Vec<BlowupLine> = ctx.pool.install(|| {
        grid.par_iter()
            .map(|&eps| {
                let row = match blowup_diagnostic(&u0, t, x, &[eps], n, bits) {
                    Ok(mut r) => r.remove(0),
                    Err(e) => BlowupRow { eps, norm: None, scaled_norm: None, residual: None, error: Some(e.to_string()) },
                };
                let averaged = SpatialProfile::interval(x.clone(), eps)
                    .and_then(|p| hum_optimal_control_with(&u0, t, &p, n, &cfg.bits))
                    .and_then(|r| rescale_and_average(&r.control, cfg.average_delta))
                    .and_then(|c| simulated_residual(&u0, &c));
                let (averaged_residual, averaged_error) = match averaged {
                    Ok(v) => (Some(v), None),
                    Err(e) => (None, Some(e)),
                };
                BlowupLine { row, averaged_residual, averaged_error }
            })
            .collect()
    });
    let mut rows = Vec::new();
    for l in &lines {
        if let Some(e) = &l.row.error {
            failures.push(custom(format!("blowup eps={}", l.row.eps), "blowup", e.clone()));
        }
        if let Some(e) = &l.averaged_error {
            failures.push(Failure::new(format!("averaged eps={}", l.row.eps), e));
        }
        rows.push(vec![
            num(l.row.eps),
            opt(l.row.norm),
            opt(l.row.scaled_norm),
            opt(l.row.residual),
            opt(l.averaged_residual),
            l.row.error.clone().unwrap_or_default(),
            l.averaged_error.as_ref().map(|e| e.kind().to_string()).unwrap_or_default(),
        ]);
    }
    ctx.out.csv("blowup.csv", &["eps", "norm", "scaled_norm", "residual", "averaged_residual", "error", "averaged_error"], &rows)?;

    let summary = ControlSummary {
        datum: &cfg.datum,
        horizon: t,
        modes: n,
        eps: cfg.eps_start,
        family: family.as_ref().ok().map(|f| f.meta()),
        controls,
    };
    ctx.out.json("control.json", &summary)?;
    Ok(TaskStatus::from_failures(TASK, failures, 4 + 2 * grid.len()))
}

#[derive(Serialize)]
struct FamilyGrowth {
    meta: FamilyMeta,
    norms: Vec<f64>,
    growth: Option<RateFit>,
}

#[derive(Serialize)]
struct LemmaReport {
    sequence_config: SequenceConfig,
    sequence: Option<EpsSequence>,
    ineqsin: Option<IneqsinCheck>,
    family: Option<FamilyGrowth>,
    failures: Vec<Failure>,
}

pub fn lemmas(ctx: &Context) -> io::Result<TaskStatus> {
    const TASK: &str = "lemmas";
    let cfg = ctx.cfg;
    let mut failures = Vec::new();
    let scfg = SequenceConfig {
        delta: cfg.lemma_delta,
        levels: cfg.lemma_levels,
        n_check: cfg.lemma_n_check,
        seed: cfg.seed,
        eps0_max: cfg.lemma_eps0_max,
    };
    let sequence = construct_eps_sequence(&scfg).map_err(|e| failures.push(Failure::new("sequence", &e))).ok();
    let ineqsin = match (&ctx.anchor, &sequence) {
        (Ok(x), Some(seq)) => {
            check_ineqsin(x, seq, 1..=cfg.lemma_n_check).map_err(|e| failures.push(Failure::new("ineqsin", &e))).ok()
        }
        (Err(e), _) => {
            failures.push(Failure::new("ineqsin", e));
            None
        }
        (_, None) => None,
    };
    let fam_cfg = FamilyConfig { ladder: cfg.bits.clone(), ..FamilyConfig::default() };
    let family = match biorthogonal_family_with(cfg.family_horizon, cfg.family_size, &fam_cfg) {
        Ok(f) => {
            let growth = f.norm_growth().map_err(|e| failures.push(Failure::new("family growth", &e))).ok();
            Some(FamilyGrowth { meta: f.meta(), norms: f.norms.iter().map(|v| v.to_f64()).collect(), growth })
        }
        Err(e) => {
            failures.push(Failure::new("family", &e));
            None
        }
    };
    if let Some(s) = &sequence {
        if s.margins < 1.0 {
            failures.push(custom("sequence", "margin-below-one", format!("margins {}", s.margins)));
        }
    }
    if let Some(c) = &ineqsin {
        if !(c.min_ratio > 0.0) {
            failures.push(custom("ineqsin", "nonpositive-ratio", format!("min ratio {}", c.min_ratio)));
        }
    }
    let status = TaskStatus::from_failures(TASK, failures.clone(), 4);
    ctx.out.json("lemmas.json", &LemmaReport { sequence_config: scfg, sequence, ineqsin, family, failures })?;
    Ok(status)
}
