//! Experiment orchestration behind the `qtm` binary.

use std::f64::consts::LN_2;

use rayon::prelude::*;

use crate::accounting::{cycle_average, CycleParams};
use crate::config::{EngineConfig, RunMode};
use crate::engine::{reference_splitting, ThermalQubit, Thermalization};
use crate::error::{Error, Result};
use crate::mixed_fuel::{mixed_cycle_stats, mixed_cycle_stats_classical, MixedFuelReport};
use crate::output::{Cell, Table};
use crate::spin_algebra::MachineSpec;
use crate::zeno::zeno_work_window;

pub const RESULT_HEADER: [&str; 16] = [
    "l",
    "dt",
    "beta",
    "mode",
    "therm_model",
    "n_steps",
    "w_ideal",
    "w_avg",
    "w_zeno",
    "reset_cost",
    "heat_in",
    "w_ideal_norm",
    "w_avg_norm",
    "w_zeno_norm",
    "reset_cost_norm",
    "heat_in_norm",
];

#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub l: f64,
    /// Step actually used after snapping to the grid.
    pub dt: f64,
    pub beta: f64,
    pub mode: RunMode,
    pub therm_model: &'static str,
    pub n_steps: usize,
    pub w_ideal: f64,
    pub w_avg: f64,
    pub w_zeno: f64,
    pub reset_cost: f64,
    pub heat_in: f64,
}

impl ResultRow {
    /// `kT ln 2`.
    pub fn unit(&self) -> f64 {
        LN_2 / self.beta
    }

    pub fn cells(&self) -> Vec<Cell> {
        let u = self.unit();
        vec![
            Cell::Num(self.l),
            Cell::Num(self.dt),
            Cell::Num(self.beta),
            self.mode.label().into(),
            self.therm_model.into(),
            self.n_steps.into(),
            Cell::Num(self.w_ideal),
            Cell::Num(self.w_avg),
            Cell::Num(self.w_zeno),
            Cell::Num(self.reset_cost),
            Cell::Num(self.heat_in),
            Cell::Num(self.w_ideal / u),
            Cell::Num(self.w_avg / u),
            Cell::Num(self.w_zeno / u),
            Cell::Num(self.reset_cost / u),
            Cell::Num(self.heat_in / u),
        ]
    }
}

pub fn cycle_params(cfg: &EngineConfig) -> CycleParams {
    CycleParams::new(cfg.beta, cfg.dt)
        .with_window(cfg.tau_tilde, cfg.tau_prime)
        .with_therm(cfg.thermalization())
        .with_flip(cfg.flip)
}

/// One configuration to one result row.
pub fn run_single(cfg: &EngineConfig) -> Result<ResultRow> {
    cfg.validate()?;
    let spec = MachineSpec::spin(cfg.spin()?);
    let w_zeno = zeno_work_window(&spec, cfg.beta, cfg.tau_tilde, cfg.tau_prime);
    let therm = cfg.thermalization();
    let Some(mode) = cfg.mode.cycle_mode() else {
        // Quasi-static heat: W plus the qubit energy left at the end of the window.
        let delta_end = reference_splitting(&spec, cfg.tau_prime);
        let end_energy = ThermalQubit::gibbs(delta_end, cfg.beta).p1 * delta_end;
        return Ok(ResultRow {
            l: cfg.l,
            dt: 0.0,
            beta: cfg.beta,
            mode: cfg.mode,
            therm_model: Thermalization::Instant.label(),
            n_steps: 0,
            w_ideal: w_zeno,
            w_avg: w_zeno,
            w_zeno,
            reset_cost: 0.0,
            heat_in: w_zeno + end_energy,
        });
    };
    let ledger = cycle_average(&spec, &cycle_params(cfg), mode)?;
    Ok(ResultRow {
        l: cfg.l,
        dt: ledger.dt,
        beta: cfg.beta,
        mode: cfg.mode,
        therm_model: therm.label(),
        n_steps: ledger.n_steps,
        w_ideal: ledger.w_ideal,
        w_avg: ledger.net_work,
        w_zeno,
        reset_cost: ledger.reset_cost,
        heat_in: ledger.heat_in,
    })
}

#[derive(Debug)]
pub struct SweepOutcome {
    pub table: Table,
    pub failures: Vec<(f64, f64, Error)>,
}

/// Cross product of the configured `l` and `dt` lists, evaluated in parallel
/// and reported in l-major order. Failed rows are collected, not fatal.
pub fn run_sweep(cfg: &EngineConfig) -> SweepOutcome {
    let points = cfg.sweep_points();
    let results: Vec<Result<ResultRow>> = points.par_iter().map(|&(l, dt)| run_single(&cfg.with_point(l, dt))).collect();
    let mut table = Table::new(&RESULT_HEADER);
    let mut failures = Vec::new();
    for (&(l, dt), res) in points.iter().zip(results) {
        match res {
            Ok(row) => table.push(row.cells()),
            Err(e) => failures.push((l, dt, e)),
        }
    }
    SweepOutcome { table, failures }
}

/// Zeno work for every configured `l`.
pub fn zeno_table(cfg: &EngineConfig) -> Result<Table> {
    let mut table = Table::new(&["l", "beta", "w_zeno", "w_zeno_norm"]);
    let ls = if cfg.l_values.is_empty() { vec![cfg.l] } else { cfg.l_values.clone() };
    for l in ls {
        let row = run_single(&EngineConfig { l, mode: RunMode::Zeno, ..cfg.clone() })?;
        table.push(vec![Cell::Num(l), Cell::Num(cfg.beta), Cell::Num(row.w_zeno), Cell::Num(row.w_zeno / row.unit())]);
    }
    Ok(table)
}

/// Selective cycles under finite thermalisation for every `(l, n_beta, tau_beta)`.
/// A `tau_beta` of `None` selects instant Gibbs resets.
pub fn therm_table(cfg: &EngineConfig, n_betas: &[usize], tau_betas: &[Option<f64>]) -> Result<Table> {
    let mut table = Table::new(&[
        "l",
        "dt",
        "beta",
        "therm_model",
        "n_beta",
        "tau_beta",
        "w_ideal",
        "w_avg",
        "w_ideal_norm",
        "w_avg_norm",
    ]);
    let ls = if cfg.l_values.is_empty() { vec![cfg.l] } else { cfg.l_values.clone() };
    let mut jobs = Vec::new();
    for &l in &ls {
        for &n_beta in n_betas {
            for &tau in tau_betas {
                jobs.push((l, n_beta, tau));
            }
        }
    }
    let rows: Vec<Result<Vec<Cell>>> = jobs
        .par_iter()
        .map(|&(l, n_beta, tau)| {
            let mut c = cfg.with_point(l, cfg.dt);
            c.mode = RunMode::Selective;
            c.n_beta = n_beta;
            match tau {
                None => c.therm_model = crate::config::ThermKind::Subunit,
                Some(t) => {
                    c.therm_model = crate::config::ThermKind::Bosonic;
                    c.tau_beta = t;
                }
            }
            let row = run_single(&c)?;
            Ok(vec![
                Cell::Num(l),
                Cell::Num(row.dt),
                Cell::Num(c.beta),
                row.therm_model.into(),
                n_beta.into(),
                tau.map(Cell::Num).unwrap_or_else(|| "inf".into()),
                Cell::Num(row.w_ideal),
                Cell::Num(row.w_avg),
                Cell::Num(row.w_ideal / row.unit()),
                Cell::Num(row.w_avg / row.unit()),
            ])
        })
        .collect();
    for r in rows {
        table.push(r?);
    }
    Ok(table)
}

fn mixed_cells(path: &str, r: &MixedFuelReport) -> Vec<Cell> {
    vec![
        path.into(),
        Cell::Num(r.q),
        Cell::Num(r.p_fail_first),
        Cell::Num(r.p_fail_rest),
        Cell::Num(r.p_out_pure),
        Cell::Num(r.p_out_mixed),
        Cell::Num(r.q_star),
        Cell::Num(r.energy_to_apparatus),
        Cell::Num(r.reset_cost),
        Cell::Num(r.net_work),
        if r.net_work_is_upper_bound { "upper" } else { "exact" }.into(),
    ]
}

/// Finite-machine and classical-limit mixed-fuel statistics for each `q`.
pub fn mixed_fuel_table(cfg: &EngineConfig, qs: &[f64]) -> Result<Table> {
    cfg.validate()?;
    let spec = MachineSpec::spin(cfg.spin()?);
    let params = cycle_params(cfg);
    let mut table = Table::new(&[
        "path",
        "q",
        "p_fail_first",
        "p_fail_rest",
        "p_out_pure",
        "p_out_mixed",
        "q_star",
        "energy_to_apparatus",
        "reset_cost",
        "net_work",
        "net_work_kind",
    ]);
    for &q in qs {
        table.push(mixed_cells("finite", &mixed_cycle_stats(&spec, &params, q)?));
        table.push(mixed_cells("classical", &mixed_cycle_stats_classical(cfg.beta, q)?));
    }
    Ok(table)
}
