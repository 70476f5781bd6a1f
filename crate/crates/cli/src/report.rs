//! Per-run result rows and the aggregated success tables.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{CliError, CliResult};
use crate::pipeline::Episode;

pub const RESULTS_HEADER: &str = "scenario,seed,policy,success,ticks,final_err_mm,final_err_deg";
pub const SUMMARY_HEADER: &str = "scenario,policy,runs,successes,success_rate,mean_ticks,mean_final_err_mm";

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub scenario: String,
    pub seed: u64,
    pub policy: String,
    pub success: bool,
    pub ticks: usize,
    pub final_err_mm: f64,
    pub final_err_deg: f64,
}

impl ResultRow {
    pub fn from_episode(scenario: &str, e: &Episode) -> Self {
        let (t, r) = e.final_error();
        ResultRow {
            scenario: scenario.to_string(),
            seed: e.seed,
            policy: e.policy.name().to_string(),
            success: e.success(),
            ticks: e.ticks(),
            final_err_mm: t * 1e3,
            final_err_deg: r.to_degrees(),
        }
    }
}

/// Rows sorted by (scenario, seed), then policy so paired runs stay adjacent.
pub fn sort_rows(rows: &mut [ResultRow]) {
    rows.sort_by(|a, b| (&a.scenario, a.seed, &a.policy).cmp(&(&b.scenario, b.seed, &b.policy)));
}

pub fn write_results_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from(RESULTS_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{:.6},{:.6}",
            r.scenario, r.seed, r.policy, r.success as u8, r.ticks, r.final_err_mm, r.final_err_deg
        );
    }
    out
}

pub fn parse_results_csv(text: &str, path: &Path) -> CliResult<Vec<ResultRow>> {
    let bad = |line: usize, m: &str| CliError::Results { path: path.to_path_buf(), message: format!("line {line}: {m}") };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == RESULTS_HEADER => {}
        _ => return Err(bad(1, "unexpected header")),
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 7 {
            return Err(bad(i + 1, "expected 7 fields"));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(i + 1, "bad number"));
        rows.push(ResultRow {
            scenario: f[0].to_string(),
            seed: f[1].parse().map_err(|_| bad(i + 1, "bad seed"))?,
            policy: f[2].to_string(),
            success: match f[3] {
                "1" => true,
                "0" => false,
                _ => return Err(bad(i + 1, "success must be 0 or 1")),
            },
            ticks: f[4].parse().map_err(|_| bad(i + 1, "bad ticks"))?,
            final_err_mm: num(f[5])?,
            final_err_deg: num(f[6])?,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub scenario: String,
    pub policy: String,
    pub runs: usize,
    pub successes: usize,
    pub mean_ticks: f64,
    pub mean_final_err_mm: f64,
}

impl SummaryRow {
    pub fn rate(&self) -> String {
        format!("{:.1}%", 100.0 * self.successes as f64 / self.runs as f64)
    }
}

pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(&str, &str), Vec<&ResultRow>> = BTreeMap::new();
    for r in rows {
        groups.entry((&r.scenario, &r.policy)).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((scenario, policy), rs)| {
            let n = rs.len() as f64;
            let finite: Vec<f64> = rs.iter().map(|r| r.final_err_mm).filter(|e| e.is_finite()).collect();
            SummaryRow {
                scenario: scenario.to_string(),
                policy: policy.to_string(),
                runs: rs.len(),
                successes: rs.iter().filter(|r| r.success).count(),
                mean_ticks: rs.iter().map(|r| r.ticks as f64).sum::<f64>() / n,
                mean_final_err_mm: if finite.is_empty() {
                    f64::NAN
                } else {
                    finite.iter().sum::<f64>() / finite.len() as f64
                },
            }
        })
        .collect()
}

pub fn summary_csv(summary: &[SummaryRow]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for s in summary {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{:.1},{:.3}",
            s.scenario,
            s.policy,
            s.runs,
            s.successes,
            s.rate(),
            s.mean_ticks,
            s.mean_final_err_mm
        );
    }
    out
}

/// Aligned text table for people.
pub fn summary_table(summary: &[SummaryRow]) -> String {
    let header = ["scenario", "policy", "success", "rate", "ticks", "err_mm"];
    let body: Vec<[String; 6]> = summary
        .iter()
        .map(|s| {
            [
                s.scenario.clone(),
                s.policy.clone(),
                format!("{}/{}", s.successes, s.runs),
                s.rate(),
                format!("{:.1}", s.mean_ticks),
                format!("{:.3}", s.mean_final_err_mm),
            ]
        })
        .collect();
    let mut width = header.map(str::len);
    for row in &body {
        for (w, cell) in width.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let mut line = |cells: &[&str]| {
        let parts: Vec<String> = cells
            .iter()
            .zip(width)
            .enumerate()
            .map(|(i, (c, w))| if i < 2 { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect();
        out.push_str(parts.join("  ").trim_end());
        out.push('\n');
    };
    line(&header);
    let rule: Vec<String> = width.iter().map(|w| "-".repeat(*w)).collect();
    line(&rule.iter().map(String::as_str).collect::<Vec<_>>());
    for row in &body {
        line(&row.iter().map(String::as_str).collect::<Vec<_>>());
    }
    out
}
