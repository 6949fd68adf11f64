//! The subcommands: each runs its experiment, writes its files under the
//! output directory and returns an exit status with a short summary.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::config::RunConfig;
use super::outputs::{duct_csv, ensure_dir, level_dir, snapshots_csv, write_file, write_json, write_traces};
use super::verify::verify;
use crate::duct::{alpha_residuals, metric_identities_residual, DuctHistory, GradientResiduals, MetricResiduals};
use crate::error::Result;
use crate::gradients::compute_field;
use crate::riccati::{coefficients_at, threshold_n, CoefficientBounds};
use crate::solver::blowup::BlowupReport;
use crate::solver::initial::{build, GridSpec};
use crate::solver::run::{evolve, run, StopReason};
use crate::solver::trace::trace_many;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Trace,
    Threshold,
    Verify,
    Duct,
}

#[derive(Debug, Clone)]
pub struct Options {
    pub out: PathBuf,
    /// Also run at 2n, 4n, …, 2^refine·n.
    pub refine: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    /// 0 on success, 1 when a check failed.
    pub code: i32,
    pub summary: String,
}

impl Outcome {
    fn ok(summary: String) -> Self {
        Outcome { code: 0, summary }
    }
}

pub fn execute(command: Command, cfg: &RunConfig, opts: &Options) -> Result<Outcome> {
    let mut cfg = cfg.clone();
    cfg.output.dir = opts.out.display().to_string();
    ensure_dir(&opts.out)?;
    write_file(&opts.out.join("config_echo.toml"), &cfg.echo())?;
    match command {
        Command::Simulate => simulate(&cfg, opts),
        Command::Trace => trace(&cfg, opts),
        Command::Threshold => threshold(&cfg, &opts.out),
        Command::Verify => verify_command(&cfg, &opts.out),
        Command::Duct => duct(&cfg, opts),
    }
}

/// Grids n, 2n, …, refined so that coarse nodes stay grid nodes.
fn grids(cfg: &RunConfig, refine: u32) -> Vec<GridSpec> {
    (0..=refine).map(|k| cfg.grid.refined(1 << k)).collect()
}

/// Directory for one level: the output root itself unless refining.
fn dir_for(opts: &Options, n: usize) -> Result<PathBuf> {
    let dir = if opts.refine == 0 {
        opts.out.clone()
    } else {
        level_dir(&opts.out, n)
    };
    ensure_dir(&dir)?;
    Ok(dir)
}

#[derive(Debug, Serialize)]
struct SimulateLevel {
    n: usize,
    #[serde(rename = "T_obs")]
    t_obs: Option<f64>,
    #[serde(rename = "T_pred")]
    t_pred: Option<f64>,
    #[serde(rename = "N")]
    threshold: f64,
    y0_min: f64,
    q0_min: f64,
    final_max_gradient: f64,
    steps: usize,
}

fn simulate(cfg: &RunConfig, opts: &Options) -> Result<Outcome> {
    let chart = cfg.chart()?;
    let data = cfg.initial_data();
    let outcomes: Vec<_> = grids(cfg, opts.refine)
        .into_par_iter()
        .map(|g| run(&chart, &g, &data, &cfg.run).map(|o| (g, o)))
        .collect::<Result<_>>()?;
    let mut levels = Vec::new();
    for (g, o) in &outcomes {
        let dir = dir_for(opts, g.n)?;
        write_file(&dir.join("snapshots.csv"), &snapshots_csv(&chart, &o.record.levels)?)?;
        write_traces(&dir, std::slice::from_ref(&o.critical))?;
        write_json(&dir.join("blowup_report.json"), &o.report)?;
        levels.push(SimulateLevel {
            n: g.n,
            t_obs: o.report.t_obs,
            t_pred: o.report.t_pred,
            threshold: o.report.n,
            y0_min: o.report.y0_min,
            q0_min: o.report.q0_min,
            final_max_gradient: o.record.gradients.last().map_or(f64::NAN, |g| g.max_gradient),
            steps: o.report.steps,
        });
    }
    if opts.refine > 0 {
        write_json(&opts.out.join("refinement.json"), &levels)?;
    }
    let r: &BlowupReport = &outcomes[0].1.report;
    Ok(Outcome::ok(format!(
        "n = {}: y0_min = {:.6e}, q0_min = {:.6e}, N = {:.6e}, T_obs = {}, T_pred = {}, blowup bracket = {}, final max gradient = {:.6e}, refinement confirmed = {}",
        outcomes[0].0.n,
        r.y0_min,
        r.q0_min,
        r.n,
        show(r.t_obs),
        show(r.t_pred),
        r.bracket.map_or("none".into(), |(lo, hi)| format!("[{lo:.6e}, {hi:.6e}]")),
        levels[0].final_max_gradient,
        r.refinement_confirmed.map_or("n/a".into(), |b| b.to_string()),
    )))
}

fn show(x: Option<f64>) -> String {
    x.map_or("none".into(), |t| format!("{t:.6e}"))
}

#[derive(Debug, Serialize)]
struct TraceLevel {
    n: usize,
    max_residual: Vec<f64>,
    max_alpha_residual: Vec<f64>,
}

#[derive(Debug, Serialize)]
struct TraceConvergence {
    seeds: Vec<f64>,
    levels: Vec<TraceLevel>,
    /// log₂ of successive residual ratios, worst seed first.
    residual_orders: Vec<f64>,
    alpha_residual_orders: Vec<f64>,
}

fn trace(cfg: &RunConfig, opts: &Options) -> Result<Outcome> {
    let chart = cfg.chart()?;
    let data = cfg.initial_data();
    let seeds = cfg.trace_seeds();
    let starts: Vec<_> = seeds.iter().map(|&x| (x, cfg.trace.family)).collect();
    let settings = crate::solver::run::RunSettings {
        confirm_refinement: false,
        ..cfg.run
    };
    let results: Vec<_> = grids(cfg, opts.refine)
        .into_par_iter()
        .map(|g| {
            let (s, _) = build(&chart, &g, &data)?;
            let rec = evolve(&chart, s, &settings)?;
            let traces = trace_many(&chart, &rec.levels, &starts)?;
            Ok((g, traces))
        })
        .collect::<Result<_>>()?;
    let mut levels = Vec::new();
    for (g, traces) in &results {
        write_traces(&dir_for(opts, g.n)?, traces)?;
        levels.push(TraceLevel {
            n: g.n,
            max_residual: traces.iter().map(|t| t.max_residual()).collect(),
            max_alpha_residual: traces.iter().map(|t| t.max_alpha_residual()).collect(),
        });
    }
    let orders = |pick: fn(&TraceLevel) -> &Vec<f64>| -> Vec<f64> {
        levels
            .windows(2)
            .map(|w| {
                pick(&w[0])
                    .iter()
                    .zip(pick(&w[1]))
                    .map(|(a, b)| (a / b).log2())
                    .fold(f64::INFINITY, f64::min)
            })
            .collect()
    };
    let conv = TraceConvergence {
        seeds,
        residual_orders: orders(|l| &l.max_residual),
        alpha_residual_orders: orders(|l| &l.max_alpha_residual),
        levels,
    };
    let worst = conv.levels[0].max_residual.iter().copied().fold(0.0, f64::max);
    let mut summary = format!("{} traces at n = {}: max residual {worst:.3e}", starts.len(), conv.levels[0].n);
    if opts.refine > 0 {
        write_json(&opts.out.join("refinement.json"), &conv)?;
        summary.push_str(&format!("; observed orders {:?}", conv.residual_orders));
    }
    Ok(Outcome::ok(summary))
}

#[derive(Debug, Serialize)]
pub struct ThresholdSummary {
    #[serde(rename = "N")]
    pub n: f64,
    pub nu: f64,
    pub sup_a1: f64,
    pub sup_a0_plus: f64,
    pub sup_a2: f64,
    pub inf_a2: f64,
}

/// Coefficient bounds over the nodes of the initial state and the
/// resulting threshold.
pub fn threshold_summary(cfg: &RunConfig) -> Result<ThresholdSummary> {
    let chart = cfg.chart()?;
    let (s, _) = build(&chart, &cfg.grid, &cfg.initial_data())?;
    let f = compute_field(&chart, &s)?;
    let coeffs = f
        .points
        .iter()
        .zip(&f.factors)
        .map(|(p, fac)| coefficients_at(p, fac, chart.h0()))
        .collect::<Result<Vec<_>>>()?;
    let b = CoefficientBounds::from_coefficients(&coeffs);
    Ok(ThresholdSummary {
        n: threshold_n(&b, cfg.run.nu)?,
        nu: cfg.run.nu,
        sup_a1: b.sup_abs_a1,
        sup_a0_plus: b.sup_a0_plus,
        sup_a2: b.sup_a2,
        inf_a2: b.inf_a2,
    })
}

fn threshold(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let t = threshold_summary(cfg)?;
    write_json(&out.join("threshold.json"), &t)?;
    Ok(Outcome::ok(serde_json::to_string(&t).expect("plain numbers serialize")))
}

fn verify_command(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let report = verify(cfg);
    write_json(&out.join("verify_report.json"), &report)?;
    let lines: Vec<String> = report
        .checks
        .iter()
        .map(|c| {
            format!(
                "{} {}: {:.3e} (tol {:.1e}){}{}",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.max_error,
                c.tolerance,
                c.order.map_or(String::new(), |o| format!(" order {o:.2}")),
                c.error.as_deref().map_or(String::new(), |e| format!(" [{e}]"))
            )
        })
        .collect();
    let mut summary = lines.join("\n");
    if !report.pass {
        summary.push_str(&format!("\nfailed: {}", report.failures().join(", ")));
    }
    Ok(Outcome {
        code: if report.pass { 0 } else { 1 },
        summary,
    })
}

#[derive(Debug, Serialize)]
struct DuctReport {
    n: usize,
    t_end: f64,
    steps: usize,
    #[serde(rename = "T_obs")]
    t_obs: Option<f64>,
    stopped: StopReason,
    final_max_gradient: f64,
    metric_residuals: Option<MetricResiduals>,
    gradient_residuals: Option<GradientResiduals>,
}

fn duct_report(h: &DuctHistory) -> DuctReport {
    let last = h.last();
    DuctReport {
        n: last.n(),
        t_end: last.t,
        steps: last.steps,
        t_obs: h.t_obs,
        stopped: h.stopped,
        final_max_gradient: h.gradients.last().map_or(f64::NAN, |g| g.max_gradient),
        metric_residuals: metric_identities_residual(h).ok(),
        gradient_residuals: alpha_residuals(h, h.levels.len() / 2).ok(),
    }
}

fn duct(cfg: &RunConfig, opts: &Options) -> Result<Outcome> {
    let base = cfg.duct_run()?;
    let settings = cfg.duct_settings();
    let histories: Vec<DuctHistory> = (0..=opts.refine)
        .into_par_iter()
        .map(|k| {
            let mut run = base.clone();
            run.n = (base.n - 1) * (1 << k) + 1;
            run.evolve(&settings)
        })
        .collect::<Result<_>>()?;
    let mut reports = Vec::new();
    for h in &histories {
        let dir = dir_for(opts, h.last().n())?;
        write_file(&dir.join("duct_snapshots.csv"), &duct_csv(h)?)?;
        let r = duct_report(h);
        write_json(&dir.join("duct_report.json"), &r)?;
        reports.push(r);
    }
    if opts.refine > 0 {
        write_json(&opts.out.join("refinement.json"), &reports)?;
    }
    let r = &reports[0];
    Ok(Outcome::ok(format!(
        "duct n = {}: t = {:.6e} after {} steps, T_obs = {}, metric residual {}",
        r.n,
        r.t_end,
        r.steps,
        show(r.t_obs),
        r.metric_residuals.map_or("n/a".into(), |m| format!("{:.3e}", m.max())),
    )))
}
