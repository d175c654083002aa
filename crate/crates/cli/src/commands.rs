//! The five commands: simulate, limit-cycle, sweep, optimize, validate.

use anyhow::Context;

use otto_core::cycle::{
    find_limit_cycle, optimize_time_allocation, reference_cycle, run_cycle, sweep_linked,
    CycleSummary, ThermoSample,
};
use otto_core::validate::run_battery;

use crate::config::{RunConfig, SimulateMode};
use crate::output::{Cell, Table};

/// Column order of trajectory files.
pub const TRAJECTORY_COLUMNS: [&str; 17] = [
    "t",
    "branch",
    "omega",
    "b1",
    "b2",
    "b3",
    "b4",
    "b5",
    "E",
    "S_E",
    "S_VN",
    "T_dyn",
    "phase_modulus",
    "phi",
    "phi_B",
    "W_cum",
    "Q_cum",
];

fn opt(x: Option<f64>) -> Cell {
    Cell::Num(x.unwrap_or(f64::NAN))
}

fn trajectory_row(s: &ThermoSample) -> Vec<Cell> {
    vec![
        Cell::Num(s.t),
        Cell::Text(s.branch.label().to_string()),
        Cell::Num(s.omega),
        Cell::Num(s.b.b1),
        Cell::Num(s.b.b2),
        Cell::Num(s.b.b3),
        Cell::Num(s.b.b4),
        Cell::Num(s.b.b5),
        Cell::Num(s.energy),
        Cell::Num(s.entropy_energy),
        Cell::Num(s.entropy_vn),
        opt(s.t_dyn),
        Cell::Num(s.phase_modulus),
        opt(s.phi),
        opt(s.phi_b),
        Cell::Num(s.work_cum),
        Cell::Num(s.heat_cum),
    ]
}

/// Emit per-sample rows of a limit cycle, the reference cycle, or a
/// transient run of one or more periods.
pub fn cmd_simulate(cfg: &RunConfig) -> anyhow::Result<Table> {
    let spec = cfg.cycle_spec()?;
    let mut table = Table::new(TRAJECTORY_COLUMNS.to_vec());
    match cfg.simulate_mode()? {
        SimulateMode::LimitCycle => {
            let result = find_limit_cycle(&spec)?;
            for s in &result.trajectory {
                table.push(trajectory_row(s));
            }
        }
        SimulateMode::Reference => {
            let result = reference_cycle(&spec)?;
            for s in &result.trajectory {
                table.push(trajectory_row(s));
            }
        }
        SimulateMode::Transient => {
            let periods = cfg.simulate.periods.unwrap_or(1);
            let mut b = cfg.start_state(&spec)?;
            let (mut t_off, mut w_off, mut q_off) = (0.0, 0.0, 0.0);
            for _ in 0..periods {
                let run = run_cycle(&spec, &b)?;
                for s in &run.trajectory {
                    let mut shifted = *s;
                    shifted.t += t_off;
                    shifted.work_cum += w_off;
                    shifted.heat_cum += q_off;
                    table.push(trajectory_row(&shifted));
                }
                t_off += run.total_time;
                w_off += run.branches[1].work + run.branches[3].work;
                q_off += run.branches[0].heat + run.branches[2].heat;
                b = run.corners[4];
            }
        }
    }
    Ok(table)
}

/// Columns shared by the limit-cycle summary and sweep tables.
fn summary_columns() -> Vec<&'static str> {
    let mut cols = vec![
        "w_net",
        "q_hot",
        "q_cold",
        "eta",
        "power",
        "ds_cycle",
        "first_law_residual",
        "closure_residual",
        "engine_mode",
    ];
    for corner in ["a", "b", "c", "d"] {
        for k in 1..=5 {
            cols.push(match (corner, k) {
                ("a", 1) => "a_b1",
                ("a", 2) => "a_b2",
                ("a", 3) => "a_b3",
                ("a", 4) => "a_b4",
                ("a", 5) => "a_b5",
                ("b", 1) => "b_b1",
                ("b", 2) => "b_b2",
                ("b", 3) => "b_b3",
                ("b", 4) => "b_b4",
                ("b", 5) => "b_b5",
                ("c", 1) => "c_b1",
                ("c", 2) => "c_b2",
                ("c", 3) => "c_b3",
                ("c", 4) => "c_b4",
                ("c", 5) => "c_b5",
                ("d", 1) => "d_b1",
                ("d", 2) => "d_b2",
                ("d", 3) => "d_b3",
                ("d", 4) => "d_b4",
                (_, _) => "d_b5",
            });
        }
    }
    cols.push("status");
    cols
}

fn summary_cells(summary: &CycleSummary) -> Vec<Cell> {
    let acc = &summary.accounting;
    let mut row = vec![
        Cell::Num(acc.work_output),
        Cell::Num(acc.heat_hot),
        Cell::Num(acc.heat_cold),
        Cell::Num(acc.efficiency),
        Cell::Num(acc.power),
        Cell::Num(acc.entropy_production),
        Cell::Num(acc.first_law_residual),
        Cell::Num(summary.closure_residual),
        Cell::Int(u64::from(acc.engine_mode)),
    ];
    for corner in &summary.corners {
        for v in corner.as_array() {
            row.push(Cell::Num(v));
        }
    }
    row.push(Cell::Text("ok".to_string()));
    row
}

fn failed_summary_cells(message: &str) -> Vec<Cell> {
    let mut row: Vec<Cell> = std::iter::repeat_n(f64::NAN, 8).map(Cell::Num).collect();
    row.push(Cell::Int(0));
    row.extend(std::iter::repeat_n(f64::NAN, 20).map(Cell::Num));
    // commas would break the CSV shape
    row.push(Cell::Text(format!("error: {}", message.replace(',', ";"))));
    row
}

/// Solve the limit cycle and emit the one-row summary.
pub fn cmd_limit_cycle(cfg: &RunConfig) -> anyhow::Result<Table> {
    let spec = cfg.cycle_spec()?;
    let result = if cfg.simulate_mode()? == SimulateMode::Reference {
        reference_cycle(&spec)?
    } else {
        find_limit_cycle(&spec)?
    };
    let mut table = Table::new(summary_columns());
    table.push(summary_cells(&CycleSummary::from(&result)));
    Ok(table)
}

/// Limit-cycle summaries over a parameter grid. Per-point failures become
/// error rows; the second return value says whether any point succeeded.
pub fn cmd_sweep(cfg: &RunConfig) -> anyhow::Result<(Table, bool)> {
    let spec = cfg.cycle_spec()?;
    let (parameter, grid, link) = cfg.sweep_plan()?;
    let points = sweep_linked(&spec, parameter, &grid, link);
    let mut cols = vec!["parameter", "value"];
    cols.extend(summary_columns());
    let mut table = Table::new(cols);
    let mut any_ok = grid.is_empty();
    for point in &points {
        let mut row = vec![
            Cell::Text(parameter.name().to_string()),
            Cell::Num(point.value),
        ];
        match &point.outcome {
            Ok(summary) => {
                any_ok = true;
                row.extend(summary_cells(summary));
            }
            Err(e) => row.extend(failed_summary_cells(&e.to_string())),
        }
        table.push(row);
    }
    Ok((table, any_ok))
}

/// Search the branch time allocation for maximum power; emits every probe
/// and the final row.
pub fn cmd_optimize(cfg: &RunConfig) -> anyhow::Result<Table> {
    let spec = cfg.cycle_spec()?;
    let plan = cfg.optimize_plan()?;
    let result = optimize_time_allocation(&spec, plan.total_budget, plan.min_adiabat)?;
    let mut table = Table::new(vec!["kind", "tau_h", "tau_ba", "tau_c", "tau_ab", "power"]);
    for probe in &result.probes {
        table.push(vec![
            Cell::Text("probe".to_string()),
            Cell::Num(probe.tau_h),
            Cell::Num(probe.tau_ba),
            Cell::Num(probe.tau_c),
            Cell::Num(probe.tau_ab),
            Cell::Num(probe.power),
        ]);
    }
    let best = &result.best;
    table.push(vec![
        Cell::Text("best".to_string()),
        Cell::Num(best.tau_h),
        Cell::Num(best.tau_ba),
        Cell::Num(best.tau_c),
        Cell::Num(best.tau_ab),
        Cell::Num(best.power),
    ]);
    Ok(table)
}

/// Run the invariant battery; returns the table, a human-readable report and
/// the overall verdict.
pub fn cmd_validate(seed: u64) -> anyhow::Result<(Table, String, bool)> {
    let report = run_battery(seed).context("validation battery failed to run")?;
    let mut table = Table::new(vec!["check", "residual", "threshold", "status"]);
    let mut text = String::new();
    for check in &report.checks {
        let status = if check.passed { "PASS" } else { "FAIL" };
        text.push_str(&format!(
            "{status}  {:<38} residual {:>12.3e}  (threshold {:.1e})\n",
            check.name, check.residual, check.threshold
        ));
        table.push(vec![
            Cell::Text(check.name.to_string()),
            Cell::Num(check.residual),
            Cell::Num(check.threshold),
            Cell::Text(status.to_string()),
        ]);
    }
    let passed = report.all_passed();
    text.push_str(&format!(
        "{} of {} checks passed (seed {})\n",
        report.checks.iter().filter(|c| c.passed).count(),
        report.checks.len(),
        report.seed
    ));
    Ok((table, text, passed))
}
