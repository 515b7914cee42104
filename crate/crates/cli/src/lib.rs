//! File formats and drivers for the `syncscape` CLI.
//!
//! JSON interchange (graphs, forests, states, reports, certificates) is the
//! serde encoding of the core types; this crate adds file plumbing, the CSV
//! renderings, and a deterministic multi-worker survey driver. Reports are
//! byte-identical for a fixed `(input, seed)` regardless of worker count,
//! because starts are seeded individually and merged in start order.

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;
use syncscape_core::dynamics::Trajectory;
use syncscape_core::graph::Graph;
use syncscape_core::landscape::{
    aggregate_outcomes, survey_single_start, StartOutcome, SurveyOptions, SurveyReport,
};
use syncscape_core::skeleton::rooted_trees;

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("cannot parse {}", path.display()))
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

/// Writes to the file when a path is given, to stdout otherwise.
pub fn write_output(out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, content)
            .with_context(|| format!("cannot write {}", path.display())),
        None => {
            std::io::stdout()
                .write_all(content.as_bytes())
                .context("cannot write to stdout")
        }
    }
}

/// Parses a parent array like "null,0,0,1" (accepts "none" and "-" too).
pub fn parse_parents(text: &str) -> Result<Vec<Option<usize>>> {
    text.split(',')
        .map(|tok| {
            let tok = tok.trim();
            match tok {
                "null" | "none" | "-" => Ok(None),
                _ => tok
                    .parse::<usize>()
                    .map(Some)
                    .with_context(|| format!("invalid parent entry {tok:?}")),
            }
        })
        .collect()
}

/// Parses an edge list like "0-1,1-2,2-0".
pub fn parse_edges(text: &str) -> Result<Vec<(usize, usize)>> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|tok| {
            let tok = tok.trim();
            let (a, b) = tok
                .split_once('-')
                .with_context(|| format!("edge {tok:?} is not of the form i-j"))?;
            Ok((
                a.trim().parse::<usize>().context("invalid edge endpoint")?,
                b.trim().parse::<usize>().context("invalid edge endpoint")?,
            ))
        })
        .collect()
}

/// CSV rendering of a trajectory: t, theta_0..theta_{n-1}, energy.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let n = traj.terminal.len();
    let mut out = String::from("t");
    for i in 0..n {
        out.push_str(&format!(",theta_{i}"));
    }
    out.push_str(",energy\n");
    for sample in &traj.samples {
        out.push_str(&format!("{}", sample.t));
        for &x in &sample.state.theta {
            out.push_str(&format!(",{x}"));
        }
        out.push_str(&format!(",{}\n", sample.energy));
    }
    out
}

/// CSV summary of survey reports:
/// graph_id, n, n_starts, pct_sync, n_nonsync, n_undecided.
pub fn survey_csv(reports: &[SurveyReport]) -> String {
    let mut out = String::from("graph_id,n,n_starts,pct_sync,n_nonsync,n_undecided\n");
    for r in reports {
        let pct = if r.n_starts == 0 {
            0.0
        } else {
            100.0 * r.counts.sosp_sync as f64 / r.n_starts as f64
        };
        out.push_str(&format!(
            "{},{},{},{:.2},{},{}\n",
            r.graph_id,
            r.n,
            r.n_starts,
            pct,
            r.counts.sosp_nonsync,
            r.counts.undecided + r.counts.strict_saddle + r.counts.failed
        ));
    }
    out
}

/// Multistart survey across `workers` threads. Outcomes are merged in start
/// order, so the report does not depend on the schedule.
pub fn parallel_survey(
    g: &Graph,
    graph_id: &str,
    n_starts: usize,
    seed: u64,
    opts: &SurveyOptions,
    workers: usize,
) -> Result<SurveyReport> {
    if n_starts == 0 {
        bail!("--starts must be at least 1");
    }
    if workers == 0 {
        bail!("--workers must be at least 1");
    }
    let started = Instant::now();
    let outcomes: Vec<StartOutcome> = if workers == 1 {
        (0..n_starts)
            .map(|k| survey_single_start(g, seed, k, opts))
            .collect()
    } else {
        let mut collected: Vec<Vec<StartOutcome>> = Vec::new();
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers)
                .map(|w| {
                    scope.spawn(move || {
                        (w..n_starts)
                            .step_by(workers)
                            .map(|k| survey_single_start(g, seed, k, opts))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            for h in handles {
                collected.push(h.join().expect("survey worker panicked"));
            }
        });
        collected.into_iter().flatten().collect()
    };
    let mut report = aggregate_outcomes(graph_id, g.n(), seed, outcomes);
    report.wall_time_secs = started.elapsed().as_secs_f64();
    Ok(report)
}

/// Surveys every rooted tree on 1..=`max_nodes` nodes (their comparability
/// closures), labeled `tree-n{n}-i{index}`.
pub fn survey_enumerated_trees(
    max_nodes: usize,
    n_starts: usize,
    seed: u64,
    opts: &SurveyOptions,
    workers: usize,
) -> Result<Vec<SurveyReport>> {
    if max_nodes == 0 {
        bail!("--enumerate-trees must be at least 1");
    }
    let mut reports = Vec::new();
    for n in 1..=max_nodes {
        for (idx, tree) in rooted_trees(n).enumerate() {
            let g = tree.comparability_closure();
            let label = format!("tree-n{n}-i{idx}");
            reports.push(parallel_survey(&g, &label, n_starts, seed, opts, workers)?);
        }
    }
    Ok(reports)
}
