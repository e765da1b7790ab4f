use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use ymk::deform::{harmonicity_report, taubes_deform, ym_gradient_flow};
use ymk::diagnostics::{dot_bracket_map, identity_suite, rank_one_check, SuiteOptions};
use ymk::gauge::{curvature, curvature_split, random_connection, random_field, Connection};
use ymk::lattice::cutoff::{cutoff_beta, CutoffProfile};
use ymk::lattice::snapshot::save_form;
use ymk::lattice::{sd_asd_project, Torus4};
use ymk::spectral::{continuity_sweep, lambda_a, mu_a, Witness};

use crate::config::RunConfig;
use crate::record::{run_id, ExperimentRecord, Sink, Status};
use crate::CliError;

fn connection(cfg: &RunConfig, seed: u64, amplitude: f64) -> Result<Connection, CliError> {
    Ok(random_connection(Torus4::new(cfg.n)?, cfg.group, seed, amplitude, cfg.bandwidth)?)
}

fn snapshot(sink: &Sink, cfg: &RunConfig, command: &str, what: &str, form: &ymk::Form) -> Result<(), CliError> {
    if cfg.snapshots {
        let name = format!("{command}_{}_{what}.ymk", run_id(command, "", cfg));
        save_form(&sink.path(&name), form)?;
    }
    Ok(())
}

fn ok_record(sink: &Sink, cfg: &RunConfig, command: &str, label: &str, payload: Value) -> Result<(), CliError> {
    sink.append(&ExperimentRecord::new(command, label, cfg, Status::Ok, payload))
}

#[derive(Serialize)]
struct IdentityRow<'a> {
    name: &'a str,
    n: usize,
    residual: f64,
    norm_scale: f64,
    order_estimate: Option<f64>,
    inputs_digest: &'a str,
}

pub fn cmd_check(cfg: &RunConfig, sink: &Sink) -> Result<(), CliError> {
    let opts = SuiteOptions {
        n: cfg.n,
        group: cfg.group,
        seed: cfg.seed,
        amplitude: cfg.check.amplitude,
        smooth_amplitude: cfg.check.smooth_amplitude,
        corrupt: cfg.corrupt,
    };
    let report = identity_suite(&opts)?;
    let failures: Vec<String> = report
        .failures(cfg.check.tol, cfg.check.min_order)
        .iter()
        .map(|r| format!("{}@{}", r.name, r.n))
        .collect();
    let rows: Vec<IdentityRow> = report
        .all()
        .map(|r| IdentityRow {
            name: &r.name,
            n: r.n,
            residual: r.residual,
            norm_scale: r.norm_scale,
            order_estimate: r.order_estimate,
            inputs_digest: &r.inputs_digest,
        })
        .collect();
    sink.write_csv("identities.csv", &rows)?;
    let payload = json!({ "reports": report.all().collect::<Vec<_>>(), "failures": failures });
    let status = if failures.is_empty() { Status::Ok } else { Status::Failed };
    sink.append(&ExperimentRecord::new("check", "", cfg, status, payload))?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::CheckFailed(failures))
    }
}

pub fn cmd_spectrum(cfg: &RunConfig, sink: &Sink) -> Result<(), CliError> {
    let a = connection(cfg, cfg.seed, cfg.amplitude)?;
    let lam = lambda_a(&a, &cfg.spectral)?;
    let mu = mu_a(&a, &cfg.spectral)?;
    snapshot(sink, cfg, "spectrum", "connection", a.form())?;
    if let Witness::Section(v) = &lam.witness {
        snapshot(sink, cfg, "spectrum", "lambda_witness", v)?;
    }
    #[derive(Serialize)]
    struct Row {
        lambda: f64,
        mu: f64,
        mu_unconstrained: f64,
        reducible: bool,
    }
    let row = Row {
        lambda: lam.value,
        mu: mu.constrained.value,
        mu_unconstrained: mu.unconstrained.value,
        reducible: lam.value < cfg.spectral.lambda_floor,
    };
    sink.write_csv("spectrum.csv", &[&row])?;
    let payload = json!({
        "lambda": lam.value,
        "lambda_iterations": lam.iterations,
        "lambda_residual": lam.residual,
        "mu": mu.constrained.value,
        "mu_iterations": mu.constrained.iterations,
        "mu_residual": mu.constrained.residual,
        "mu_unconstrained": mu.unconstrained.value,
        "restart_values": mu.restart_values,
        "reducible": row.reducible,
    });
    ok_record(sink, cfg, "spectrum", "", payload)
}

pub fn cmd_deform(cfg: &RunConfig, sink: &Sink) -> Result<(), CliError> {
    let a = connection(cfg, cfg.seed, cfg.amplitude)?;
    let res = taubes_deform(&a, &cfg.deform)?;
    snapshot(sink, cfg, "deform", "s", &res.s)?;
    snapshot(sink, cfg, "deform", "a_inf", res.a_inf.form())?;
    #[derive(Serialize)]
    struct Row {
        k: usize,
        trace_norm: f64,
    }
    let rows: Vec<Row> = res.trace_norms.iter().enumerate().map(|(k, &t)| Row { k, trace_norm: t }).collect();
    sink.write_csv("deform.csv", &rows)?;
    let payload = json!({
        "mode": cfg.deform.mode,
        "rho": res.rho,
        "lambda": res.lambda,
        "trace_norms": res.trace_norms,
        "final_residual": res.final_residual,
        "s_norm_ratio": res.s_norm_ratio,
        "outer_iterations": res.outer_iterations,
    });
    ok_record(sink, cfg, "deform", "", payload)
}

pub fn cmd_flow(cfg: &RunConfig, sink: &Sink) -> Result<(), CliError> {
    let a0 = connection(cfg, cfg.seed, cfg.amplitude)?;
    let res = ym_gradient_flow(&a0, &cfg.flow)?;
    let a = &res.connection;
    let harm = harmonicity_report(a)?;
    let rank = rank_one_check(&curvature_split(a).f02)?;
    let (plus, _) = sd_asd_project(&curvature(a))?;
    let bracket = dot_bracket_map(&plus)?.l2_norm();
    snapshot(sink, cfg, "flow", "connection", a.form())?;
    #[derive(Serialize)]
    struct Row {
        step: usize,
        energy: f64,
        grad_norm: f64,
    }
    let rows: Vec<Row> = res
        .energies
        .iter()
        .zip(&res.grad_norms)
        .enumerate()
        .map(|(step, (&energy, &grad_norm))| Row { step, energy, grad_norm })
        .collect();
    sink.write_csv("flow.csv", &rows)?;
    let monotone = res.energies.windows(2).all(|w| w[1] <= w[0]);
    let payload = json!({
        "steps": res.steps,
        "rejections": res.rejections,
        "converged": res.converged,
        "monotone": monotone,
        "energy_initial": res.energies[0],
        "energy_final": res.energies.last(),
        "grad_final": res.grad_norms.last(),
        "harmonicity": harm,
        "rank_one": rank,
        "fplus_bracket": bracket,
    });
    ok_record(sink, cfg, "flow", "", payload)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutoffRow {
    pub ratio: f64,
    pub grad_l4: f64,
    pub hess_l2: f64,
    pub sum: f64,
    /// `sum * sqrt(log N)`.
    pub scaled: f64,
    /// Same norms measured on the `n` grid, when its spacing resolves `R/N`.
    pub lattice_sum: Option<f64>,
}

pub fn cmd_cutoff(cfg: &RunConfig, sink: &Sink) -> Result<(), CliError> {
    let grid = Torus4::new(cfg.n)?;
    let mut rows = Vec::new();
    for &ratio in &cfg.cutoff.ratios {
        let profile = CutoffProfile::new(ratio, cfg.cutoff.radius)?.with_width(cfg.cutoff.width)?;
        let norms = profile.radial_norms();
        let lattice = match cutoff_beta(&profile, grid, 0) {
            Ok((_, m)) => Some(m),
            Err(ymk::Error::InvalidArgument(_)) => None,
            Err(e) => return Err(e.into()),
        };
        let row = CutoffRow {
            ratio,
            grad_l4: norms.grad_l4,
            hess_l2: norms.hess_l2,
            sum: norms.sum(),
            scaled: norms.sum() * ratio.ln().sqrt(),
            lattice_sum: lattice.map(|m| m.sum()),
        };
        let payload = json!({ "profile": profile, "radial": norms, "lattice": lattice, "row": row });
        ok_record(sink, cfg, "cutoff", &format!("N={ratio}"), payload)?;
        rows.push(row);
    }
    sink.write_csv("cutoff.csv", &rows)
}

pub fn cmd_continuity(cfg: &RunConfig, sink: &Sink) -> Result<(), CliError> {
    let a0 = connection(cfg, cfg.seed, cfg.amplitude)?;
    let dir = random_field(
        a0.grid(),
        cfg.group,
        1,
        cfg.seed.wrapping_add(100),
        cfg.continuity.direction_amplitude,
        cfg.bandwidth,
    )?;
    let rows = continuity_sweep(&a0, &dir, &cfg.continuity.ladder, &cfg.spectral)?;
    sink.write_csv("continuity.csv", &rows)?;
    let base = rows.first().copied();
    let deltas: Vec<Value> = rows
        .iter()
        .map(|r| {
            let b = base.unwrap_or(*r);
            json!({ "t": r.t, "d_lambda": (r.lambda - b.lambda).abs(), "d_mu": (r.mu - b.mu).abs() })
        })
        .collect();
    ok_record(sink, cfg, "continuity", "", json!({ "rows": rows, "deltas": deltas }))
}

/// One cell of the gap table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapRow {
    pub seed: u64,
    pub amplitude: f64,
    pub status: Status,
    pub error: Option<String>,
    pub flow_steps: Option<usize>,
    pub ym_residual: Option<f64>,
    pub fplus_norm: Option<f64>,
    pub trace_before: Option<f64>,
    pub trace_after: Option<f64>,
    pub delbar_star_f02: Option<f64>,
    pub commutator_l2: Option<f64>,
    pub lambda: Option<f64>,
    pub reducible: Option<bool>,
    pub mu: Option<f64>,
}

impl GapRow {
    fn empty(seed: u64, amplitude: f64) -> Self {
        Self {
            seed,
            amplitude,
            status: Status::Ok,
            error: None,
            flow_steps: None,
            ym_residual: None,
            fplus_norm: None,
            trace_before: None,
            trace_after: None,
            delbar_star_f02: None,
            commutator_l2: None,
            lambda: None,
            reducible: None,
            mu: None,
        }
    }
}

fn gap_cell(cfg: &RunConfig, row: &mut GapRow) -> Result<(), CliError> {
    let a0 = connection(cfg, row.seed, row.amplitude)?;
    let flow = ym_gradient_flow(&a0, &cfg.flow)?;
    let a = &flow.connection;
    row.flow_steps = Some(flow.steps);
    let harm = harmonicity_report(a)?;
    row.ym_residual = Some(harm.ym_residual);
    row.fplus_norm = Some(harm.fplus_norm);
    row.trace_before = Some(harm.trace_norm);
    row.delbar_star_f02 = Some(harm.delbar_star_f02);
    row.commutator_l2 = Some(rank_one_check(&curvature_split(a).f02)?.commutator_l2);
    let lam = lambda_a(a, &cfg.spectral)?.value;
    let reducible = lam < cfg.deform.lambda_floor;
    row.lambda = Some(lam);
    row.reducible = Some(reducible);
    if cfg.gap.mu {
        row.mu = Some(mu_a(a, &cfg.spectral)?.constrained.value);
    }
    if harm.trace_norm == 0.0 || !reducible {
        row.trace_after = Some(taubes_deform(a, &cfg.deform)?.final_residual);
    }
    Ok(())
}

fn worker_pool() -> Result<rayon::ThreadPool, CliError> {
    let threads = match std::env::var("YMK_THREADS") {
        Ok(v) => v.trim().parse::<usize>().map_err(|_| CliError::Config(format!("YMK_THREADS={v:?} is not a count")))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(format!("worker pool: {e}")))
}

pub fn cmd_gap(cfg: &RunConfig, sink: &Sink) -> Result<(), CliError> {
    let cells: Vec<(u64, f64)> =
        cfg.gap.seeds.iter().flat_map(|&s| cfg.gap.amplitudes.iter().map(move |&a| (s, a))).collect();
    let rows: Vec<GapRow> = worker_pool()?.install(|| {
        cells
            .par_iter()
            .map(|&(seed, amplitude)| {
                let mut row = GapRow::empty(seed, amplitude);
                if let Err(e) = gap_cell(cfg, &mut row) {
                    row.status = Status::Error;
                    row.error = Some(e.to_string());
                }
                row
            })
            .collect()
    });
    for row in &rows {
        let label = format!("seed={},amplitude={}", row.seed, row.amplitude);
        let rec = ExperimentRecord::new("gap", &label, cfg, row.status, serde_json::to_value(row)?);
        sink.append(&rec)?;
    }
    sink.write_csv("gap.csv", &rows)?;
    let done = rows.iter().filter(|r| r.status == Status::Ok).count();
    let total = rows.len();
    let complete = total == 0 || done as f64 >= cfg.gap.min_complete * total as f64;
    let status = if complete { Status::Ok } else { Status::Failed };
    sink.append(&ExperimentRecord::new("gap", "summary", cfg, status, json!({ "completed": done, "cells": total })))?;
    if complete {
        Ok(())
    } else {
        Err(CliError::Incomplete { done, total })
    }
}
