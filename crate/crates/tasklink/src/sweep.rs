//! Parallel BER sweep. Every cell seeds its own generator, so the result is
//! identical to the serial `run_sweep`.

use rayon::prelude::*;
use serde::Serialize;

use tasklink_core::bch::BchCode;
use tasklink_core::channel::{efficiency_curve, run_cell, EfficiencyRow, SweepCell, SweepConfig, SweepResult, RNG_ALGORITHM};
use tasklink_core::error::BchError;

pub fn run_sweep_parallel(config: &SweepConfig) -> Result<SweepResult, BchError> {
    let codes = config.t_values.iter().map(|&t| BchCode::build(t, config.k, config.m)).collect::<Result<Vec<_>, _>>()?;
    let jobs: Vec<(&BchCode, f64)> = codes.iter().flat_map(|c| config.ber_values.iter().map(move |&b| (c, b))).collect();
    let cells = jobs
        .into_par_iter()
        .map(|(code, ber)| run_cell(code, ber, config.trials, config.cell_seed(code.t(), ber), config.scope))
        .collect();
    Ok(SweepResult {
        rng: RNG_ALGORITHM.into(),
        config: config.clone(),
        cells,
        efficiency: efficiency_curve(config.k, config.m, &config.t_values),
    })
}

/// Tab-separated table, one row per cell.
pub fn sweep_table(result: &SweepResult) -> String {
    let mut out = String::from("t\tn\tber\ttrials\tsuccesses\trate\tstd_error\n");
    for c in &result.cells {
        out.push_str(&format!("{}\t{}\t{}\t{}\t{}\t{:.6}\t{:.6}\n", c.t, c.n, c.ber, c.trials, c.successes, c.success_rate, c.std_error()));
    }
    out
}

pub fn efficiency_table(rows: &[EfficiencyRow]) -> String {
    let mut out = String::from("t\tformula_efficiency\trealized_rate\tparity_bits\n");
    for r in rows {
        let rate = r.realized_rate.map_or("-".to_string(), |v| format!("{v:.6}"));
        let parity = r.parity_bits.map_or("-".to_string(), |v| v.to_string());
        out.push_str(&format!("{}\t{:.6}\t{}\t{}\n", r.t, r.formula_efficiency, rate, parity));
    }
    out
}

#[derive(Serialize)]
struct Summary<'a> {
    rng: &'a str,
    config: &'a SweepConfig,
    cells: Vec<CellSummary<'a>>,
    efficiency: &'a [EfficiencyRow],
}

#[derive(Serialize)]
struct CellSummary<'a> {
    #[serde(flatten)]
    cell: &'a SweepCell,
    std_error: f64,
}

/// Machine-readable summary (pretty JSON).
pub fn sweep_summary_json(result: &SweepResult) -> String {
    let s = Summary {
        rng: &result.rng,
        config: &result.config,
        cells: result.cells.iter().map(|cell| CellSummary { cell, std_error: cell.std_error() }).collect(),
        efficiency: &result.efficiency,
    };
    serde_json::to_string_pretty(&s).expect("summary serializes") + "\n"
}
