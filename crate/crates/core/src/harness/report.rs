//! Per-solver statistics and pairwise gains over CSV rows.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::optimize::SolverKind;

use super::{ExperimentKind, ResultRow};

/// Mean and sample standard deviation of `avg_rate_bps` over the seeds of
/// one (experiment, sweep value, b0, solver) group. Error rows are counted
/// but left out of the statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub experiment: ExperimentKind,
    pub sweep_value: f64,
    pub b0_hz: f64,
    pub solver: SolverKind,
    pub n: usize,
    pub errors: usize,
    pub mean: f64,
    pub std: f64,
}

/// Relative gain of solver `a` over solver `b`, in percent:
/// `100 * (mean_a - mean_b) / mean_b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gain {
    pub experiment: ExperimentKind,
    pub sweep_value: f64,
    pub b0_hz: f64,
    pub a: SolverKind,
    pub b: SolverKind,
    pub percent: f64,
}

type GroupKey = (ExperimentKind, u64, u64, SolverKind);

pub fn summarize(rows: &[ResultRow]) -> Vec<Summary> {
    // f64 keys as ordered bit patterns; sweep values and bandwidths are positive
    let mut groups: BTreeMap<GroupKey, Vec<&ResultRow>> = BTreeMap::new();
    for r in rows {
        groups.entry((r.experiment, r.sweep_value.to_bits(), r.b0_hz.to_bits(), r.solver)).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((experiment, v, b0, solver), rs)| {
            let ok: Vec<f64> = rs.iter().filter(|r| !r.is_error()).map(|r| r.avg_rate_bps).collect();
            let n = ok.len();
            let mean = if n == 0 { f64::NAN } else { ok.iter().sum::<f64>() / n as f64 };
            let std = if n < 2 {
                0.0
            } else {
                (ok.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
            };
            Summary {
                experiment,
                sweep_value: f64::from_bits(v),
                b0_hz: f64::from_bits(b0),
                solver,
                n,
                errors: rs.len() - n,
                mean,
                std,
            }
        })
        .collect()
}

/// Gains for every pair of solvers present at a point, earlier solver (in
/// `SolverKind` order) first.
pub fn gains(summaries: &[Summary]) -> Vec<Gain> {
    let mut out = Vec::new();
    for (i, a) in summaries.iter().enumerate() {
        for b in &summaries[i + 1..] {
            let same_point = a.experiment == b.experiment && a.sweep_value == b.sweep_value && a.b0_hz == b.b0_hz;
            if same_point && a.solver < b.solver {
                out.push(Gain {
                    experiment: a.experiment,
                    sweep_value: a.sweep_value,
                    b0_hz: a.b0_hz,
                    a: a.solver,
                    b: b.solver,
                    percent: 100.0 * (a.mean - b.mean) / b.mean,
                });
            }
        }
    }
    out
}

/// Human-readable report: a statistics table followed by the gains.
pub fn render_report(rows: &[ResultRow]) -> String {
    let summaries = summarize(rows);
    let mut out = String::new();
    let _ = writeln!(out, "{:<9} {:>12} {:>12} {:<14} {:>4} {:>4} {:>14} {:>14}", "experiment", "sweep", "b0_hz", "solver", "n", "err", "mean_bps", "std_bps");
    for s in &summaries {
        let _ = writeln!(
            out,
            "{:<9} {:>12} {:>12} {:<14} {:>4} {:>4} {:>14.6e} {:>14.6e}",
            s.experiment.name(),
            s.sweep_value,
            s.b0_hz,
            s.solver.name(),
            s.n,
            s.errors,
            s.mean,
            s.std
        );
    }
    let _ = writeln!(out, "\ngains in percent, (mean_a - mean_b) / mean_b");
    for g in gains(&summaries) {
        let _ = writeln!(
            out,
            "gain {} sweep={} b0={} {} vs {}: {}%",
            g.experiment.name(),
            g.sweep_value,
            g.b0_hz,
            g.a.name(),
            g.b.name(),
            g.percent
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(v: f64, seed: u64, solver: SolverKind, rate: f64) -> ResultRow {
        ResultRow {
            experiment: ExperimentKind::UsersSweep,
            sweep_value: v,
            b0_hz: 2e7,
            seed,
            solver,
            utility: rate * v,
            avg_rate_bps: rate,
            unserved: 0,
            iterations: 1,
            wall_ms: 0.0,
        }
    }

    #[test]
    fn statistics_by_hand() {
        let rows = [
            row(50.0, 1, SolverKind::Approx, 2.0),
            row(50.0, 2, SolverKind::Approx, 4.0),
            row(50.0, 1, SolverKind::Bench2, 1.0),
            row(50.0, 2, SolverKind::Bench2, 2.0),
            ResultRow { utility: f64::NAN, avg_rate_bps: f64::NAN, ..row(50.0, 3, SolverKind::Bench2, 0.0) },
        ];
        let s = summarize(&rows);
        assert_eq!(s.len(), 2);
        assert_eq!((s[0].mean, s[0].std, s[0].n), (3.0, 2f64.sqrt(), 2));
        assert_eq!((s[1].mean, s[1].errors), (1.5, 1));
        let g = gains(&s);
        assert_eq!(g.len(), 1);
        assert_eq!((g[0].a, g[0].b, g[0].percent), (SolverKind::Approx, SolverKind::Bench2, 100.0));
        assert!(render_report(&rows).contains("gain users sweep=50 b0=20000000 approx vs bench2: 100%"));
    }
}
