//! Convergence diagnostics over learning traces: distance to a reference
//! optimum, the Lyapunov step-size calculator, contraction ratios and work
//! accounting, plus the CSV schemas the command line emits.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learning::LearningTrace;
use crate::math::l2_distance;

/// `‖θ_t − θ*‖₂` for every recorded iteration.
pub fn distance_trace(trace: &LearningTrace, theta_star: &[f64]) -> Result<Vec<f64>> {
    trace
        .records
        .iter()
        .map(|r| {
            let theta = r.theta.as_ref().ok_or(Error::MissingSnapshots)?;
            if theta.len() != theta_star.len() {
                return Err(Error::Shape(format!(
                    "snapshot has length {}, reference has {}",
                    theta.len(),
                    theta_star.len()
                )));
            }
            Ok(l2_distance(theta, theta_star))
        })
        .collect()
}

/// Strong convexity `β`, smoothness `η` and contraction `c` estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovConfig {
    pub beta: f64,
    pub eta: f64,
    pub c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovParams {
    /// Weight of the inference error in `P_t = ‖θ_t − θ*‖ + γ‖τ_t − τ*_t‖`.
    pub gamma: f64,
    /// Largest admissible constant step size.
    pub alpha_max: f64,
    beta: f64,
}

impl LyapunovParams {
    /// Per-iteration decrease rate `δ = βα/2` of `P_t` at step size `alpha`.
    pub fn delta(&self, alpha: f64) -> f64 {
        self.beta * alpha / 2.0
    }
}

impl LyapunovConfig {
    pub fn validate(&self) -> Result<()> {
        let finite = self.beta.is_finite() && self.eta.is_finite() && self.c.is_finite();
        if !finite || self.beta.is_nan() || self.beta <= 0.0 || self.beta > self.eta {
            return Err(Error::Config(format!(
                "need 0 < β ≤ η, got β = {}, η = {}",
                self.beta, self.eta
            )));
        }
        if !(self.c > 0.0 && self.c < 1.0) {
            return Err(Error::Config(format!("need 0 < c < 1, got {}", self.c)));
        }
        Ok(())
    }
}

/// `γ = β / (2(1−c)η²)` and `α_max = min{cβ / (2η² + ηβ + β²), 2/(η+β)}`.
pub fn lyapunov_params(cfg: &LyapunovConfig) -> Result<LyapunovParams> {
    cfg.validate()?;
    let LyapunovConfig { beta, eta, c } = *cfg;
    let gamma = beta / (2.0 * (1.0 - c) * eta * eta);
    if !gamma.is_finite() {
        return Err(Error::NonFinite("γ (contraction constant too close to 1)"));
    }
    let alpha_max = (c * beta / (2.0 * eta * eta + eta * beta + beta * beta)).min(2.0 / (eta + beta));
    Ok(LyapunovParams { gamma, alpha_max, beta })
}

/// Per-iteration `r_t`; `None` where the trace was not instrumented or the
/// denominator was below 1e-12.
pub fn contraction_ratios(trace: &LearningTrace) -> Vec<Option<f64>> {
    trace
        .records
        .iter()
        .map(|r| r.contraction.and_then(|c| c.ratio()))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractionSummary {
    pub iterations: usize,
    pub defined: usize,
    pub below_one: usize,
}

impl ContractionSummary {
    pub fn from_ratios(ratios: &[Option<f64>]) -> Self {
        let defined: Vec<f64> = ratios.iter().flatten().copied().collect();
        Self {
            iterations: ratios.len(),
            defined: defined.len(),
            below_one: defined.iter().filter(|&&r| r < 1.0).count(),
        }
    }

    /// Share of defined ratios below one.
    pub fn fraction_below_one(&self) -> Option<f64> {
        (self.defined > 0).then(|| self.below_one as f64 / self.defined as f64)
    }
}

/// One row of the per-iteration trace CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: usize,
    pub method: String,
    pub objective: f64,
    pub grad_inf_norm: f64,
    pub msg_updates_cum: u64,
    pub wall_ms: f64,
    pub dist_to_opt: Option<f64>,
    pub block_id: Option<usize>,
    pub contraction_ratio: Option<f64>,
}

pub const TRACE_COLUMNS: [&str; 9] = [
    "t",
    "method",
    "objective",
    "grad_inf_norm",
    "msg_updates_cum",
    "wall_ms",
    "dist_to_opt",
    "block_id",
    "contraction_ratio",
];

/// Rows for `trace`; `distances` (from [`distance_trace`]) fills
/// `dist_to_opt` when given.
pub fn trace_rows(trace: &LearningTrace, distances: Option<&[f64]>) -> Vec<TraceRow> {
    let method = trace.method.to_string();
    trace
        .records
        .iter()
        .enumerate()
        .map(|(i, r)| TraceRow {
            t: r.t,
            method: method.clone(),
            objective: r.objective,
            grad_inf_norm: r.grad_inf_norm,
            msg_updates_cum: r.msg_updates_cum,
            wall_ms: r.wall_ms,
            dist_to_opt: distances.and_then(|d| d.get(i).copied()),
            block_id: r.block_id,
            contraction_ratio: r.contraction.and_then(|c| c.ratio()),
        })
        .collect()
}

fn write_comment<W: Write>(writer: &mut W, comment: &str) -> Result<()> {
    for line in comment.lines() {
        writeln!(writer, "# {line}")?;
    }
    Ok(())
}

fn write_rows<W: Write, T: Serialize>(mut writer: W, rows: &[T], header: &[&str], comment: &str) -> Result<()> {
    write_comment(&mut writer, comment)?;
    let mut csv = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    csv.write_record(header)?;
    for row in rows {
        csv.serialize(row)?;
    }
    csv.flush()?;
    Ok(())
}

fn read_rows<R: Read, T: for<'de> Deserialize<'de>>(reader: R, header: &[&str], what: &str) -> Result<Vec<T>> {
    let mut csv = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(reader);
    let found: Vec<String> = csv.headers()?.iter().map(str::to_owned).collect();
    if found != header {
        return Err(Error::Parse(format!(
            "{what} header mismatch: expected `{}`, found `{}`",
            header.join(","),
            found.join(",")
        )));
    }
    csv.deserialize()
        .map(|r| r.map_err(|e| Error::Parse(format!("{what}: {e}"))))
        .collect()
}

/// Writes `comment` as `# ` lines followed by the trace CSV.
pub fn write_trace_csv<W: Write>(writer: W, rows: &[TraceRow], comment: &str) -> Result<()> {
    write_rows(writer, rows, &TRACE_COLUMNS, comment)
}

pub fn read_trace_csv<R: Read>(reader: R) -> Result<Vec<TraceRow>> {
    read_rows(reader, &TRACE_COLUMNS, "trace")
}

pub fn load_trace_csv(path: &Path) -> Result<Vec<TraceRow>> {
    read_trace_csv(std::fs::File::open(path)?)
}

/// Per-run totals of a comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkRow {
    pub label: String,
    pub method: String,
    pub iterations: usize,
    pub msg_updates_cum: u64,
    pub wall_ms: f64,
    pub final_objective: f64,
    pub final_grad_inf_norm: f64,
    /// First iteration count at which `‖g‖_∞` fell below the tolerance.
    pub iters_to_tol: Option<usize>,
    /// Cumulative message updates at that iteration.
    pub msg_updates_to_tol: Option<u64>,
}

pub const WORK_COLUMNS: [&str; 9] = [
    "label",
    "method",
    "iterations",
    "msg_updates_cum",
    "wall_ms",
    "final_objective",
    "final_grad_inf_norm",
    "iters_to_tol",
    "msg_updates_to_tol",
];

impl WorkRow {
    pub fn from_rows(label: &str, rows: &[TraceRow], grad_tol: f64) -> Result<Self> {
        let last = rows
            .last()
            .ok_or_else(|| Error::Parse(format!("trace `{label}` has no rows")))?;
        let hit = rows.iter().position(|r| r.grad_inf_norm < grad_tol);
        Ok(Self {
            label: label.to_owned(),
            method: last.method.clone(),
            iterations: rows.len(),
            msg_updates_cum: last.msg_updates_cum,
            wall_ms: last.wall_ms,
            final_objective: last.objective,
            final_grad_inf_norm: last.grad_inf_norm,
            iters_to_tol: hit.map(|i| i + 1),
            msg_updates_to_tol: hit.map(|i| rows[i].msg_updates_cum),
        })
    }
}

/// Comparison table for labelled traces of the same problem.
pub fn work_report(traces: &[(&str, &LearningTrace)], grad_tol: f64) -> Result<Vec<WorkRow>> {
    traces
        .iter()
        .map(|(label, trace)| WorkRow::from_rows(label, &trace_rows(trace, None), grad_tol))
        .collect()
}

pub fn write_work_csv<W: Write>(writer: W, rows: &[WorkRow], comment: &str) -> Result<()> {
    write_rows(writer, rows, &WORK_COLUMNS, comment)
}

pub fn read_work_csv<R: Read>(reader: R) -> Result<Vec<WorkRow>> {
    read_rows(reader, &WORK_COLUMNS, "work report")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learning::{ContractionSample, IterationRecord, Method};

    fn record(t: usize, theta: Option<Vec<f64>>, cum: u64) -> IterationRecord {
        IterationRecord {
            t,
            objective: 1.0 / (t + 1) as f64,
            grad_inf_norm: 10f64.powi(-(t as i32)),
            msg_updates: 4,
            msg_updates_cum: cum,
            inner_sweeps: 2,
            inner_converged: true,
            wall_ms: t as f64,
            block_id: Some(t % 2),
            step_size: 0.1,
            theta,
            incremental_error: None,
            contraction: Some(ContractionSample {
                after: 0.5,
                before: if t == 0 { 0.0 } else { 1.0 },
            }),
        }
    }

    fn trace(with_theta: bool) -> LearningTrace {
        LearningTrace {
            method: Method::Bbpl,
            records: (0..4)
                .map(|t| record(t, with_theta.then(|| vec![t as f64, 0.0]), 4 * (t as u64 + 1)))
                .collect(),
            theta: vec![3.0, 0.0],
            converged: true,
            inner_failures: 0,
        }
    }

    #[test]
    fn lyapunov_reference_values() {
        let p = lyapunov_params(&LyapunovConfig {
            beta: 1.0,
            eta: 2.0,
            c: 0.5,
        })
        .unwrap();
        assert_eq!(p.gamma, 0.25);
        assert_eq!(p.alpha_max, 0.5 / 11.0);
        assert!((p.alpha_max - 1.0 / 22.0).abs() < 1e-17);
        assert_eq!(p.delta(0.5), 0.25);
    }

    #[test]
    fn lyapunov_rejects_bad_constants() {
        for (beta, eta, c) in [(0.0, 1.0, 0.5), (2.0, 1.0, 0.5), (1.0, 1.0, 1.0), (1.0, 1.0, 0.0)] {
            assert!(lyapunov_params(&LyapunovConfig { beta, eta, c }).is_err());
        }
        let err = lyapunov_params(&LyapunovConfig {
            beta: 1e-200,
            eta: 1e-200,
            c: 0.5,
        });
        assert!(err.is_err());
    }

    #[test]
    fn distances_and_missing_snapshots() {
        assert_eq!(
            distance_trace(&trace(true), &[0.0, 0.0]).unwrap(),
            vec![0.0, 1.0, 2.0, 3.0]
        );
        assert!(matches!(
            distance_trace(&trace(false), &[0.0, 0.0]),
            Err(Error::MissingSnapshots)
        ));
        let self_dist = distance_trace(&trace(true), &[2.0, 0.0]).unwrap();
        assert_eq!(self_dist[2], 0.0);
    }

    #[test]
    fn contraction_summary() {
        let r = contraction_ratios(&trace(false));
        assert_eq!(r, vec![None, Some(0.5), Some(0.5), Some(0.5)]);
        let s = ContractionSummary::from_ratios(&r);
        assert_eq!((s.defined, s.below_one), (3, 3));
        assert_eq!(s.fraction_below_one(), Some(1.0));
        assert_eq!(ContractionSummary::from_ratios(&[None]).fraction_below_one(), None);
    }

    #[test]
    fn work_report_totals() {
        let t = trace(false);
        let rows = work_report(&[("a", &t), ("b", &t)], 0.05).unwrap();
        assert_eq!(rows[0].iterations, 4);
        assert_eq!(
            rows[0].msg_updates_cum,
            t.records.iter().map(|r| r.msg_updates).sum::<u64>()
        );
        assert_eq!(rows[0].iters_to_tol, Some(3));
        assert_eq!(rows[0].msg_updates_to_tol, Some(12));
        assert_eq!(rows[0].method, rows[1].method);
    }

    #[test]
    fn csv_round_trip_and_schema_check() {
        let rows = trace_rows(&trace(true), Some(&[3.0, 2.0, 1.0, 0.0]));
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &rows, "seed = 1\nmethod = bbpl").unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# seed = 1\n# method = bbpl\nt,method,objective,"));
        assert_eq!(read_trace_csv(buf.as_slice()).unwrap(), rows);
        assert_eq!(rows[0].contraction_ratio, None);

        let work = work_report(&[("x", &trace(false))], 1e-9).unwrap();
        let mut buf = Vec::new();
        write_work_csv(&mut buf, &work, "").unwrap();
        assert_eq!(read_work_csv(buf.as_slice()).unwrap(), work);
        assert!(read_trace_csv(buf.as_slice()).is_err());
    }
}
