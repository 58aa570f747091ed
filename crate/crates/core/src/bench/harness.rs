use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::snapshot::{compare_snapshots, Snapshot, Tolerances};
use crate::engines::EngineConfig;
use crate::error::{Error, Result};
use crate::model::SimParams;
use crate::sim::{build_dam_break, Scenario, Simulation};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub tag: String,
    pub particles: usize,
    /// Measured steps (warmup excluded).
    pub steps: u64,
    pub wall_seconds: f64,
    pub steps_per_second: f64,
    pub speedup: f64,
    pub candidate_pairs: u64,
    pub true_pairs: u64,
    pub force_evals: u64,
    /// Share of wall time spent in particle interaction.
    pub pi_fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub baseline: String,
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    /// Fills `steps_per_second` and `speedup` against the row tagged
    /// `baseline`.
    pub fn new(baseline: &str, mut rows: Vec<BenchRow>) -> Result<Self> {
        for r in &mut rows {
            r.steps_per_second = if r.wall_seconds > 0.0 {
                r.steps as f64 / r.wall_seconds
            } else {
                f64::INFINITY
            };
        }
        let Some(base) = rows.iter().find(|r| r.tag == baseline).map(|r| r.steps_per_second) else {
            return Err(Error::InvalidConfig(format!("baseline `{baseline}` is not in the matrix")));
        };
        for r in &mut rows {
            r.speedup = r.steps_per_second / base;
        }
        Ok(Self {
            baseline: baseline.to_string(),
            rows,
        })
    }

    pub fn row(&self, tag: &str) -> Option<&BenchRow> {
        self.rows.iter().find(|r| r.tag == tag)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "tag,particles,steps,wall_s,steps_per_s,speedup,candidate_pairs,true_pairs,force_evals,pi_fraction\n",
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{}",
                r.tag,
                r.particles,
                r.steps,
                r.wall_seconds,
                r.steps_per_second,
                r.speedup,
                r.candidate_pairs,
                r.true_pairs,
                r.force_evals,
                r.pi_fraction
            );
        }
        s
    }

    pub fn to_table(&self) -> String {
        let w = self.rows.iter().map(|r| r.tag.len()).max().unwrap_or(3).max(3);
        let mut s = format!(
            "{:<w$}  {:>9}  {:>6}  {:>10}  {:>9}  {:>8}  {:>14}  {:>5}\n",
            "tag", "particles", "steps", "wall s", "steps/s", "speedup", "force evals", "PI %"
        );
        for r in &self.rows {
            let mark = if r.tag == self.baseline { "*" } else { "" };
            let _ = writeln!(
                s,
                "{:<w$}  {:>9}  {:>6}  {:>10.3}  {:>9.2}  {:>7.2}{:1}  {:>14}  {:>5.1}",
                r.tag,
                r.particles,
                r.steps,
                r.wall_seconds,
                r.steps_per_second,
                r.speedup,
                mark,
                r.force_evals,
                100.0 * r.pi_fraction
            );
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BenchOptions {
    pub steps: u64,
    pub warmup: u64,
    /// Compare every configuration's final state with the baseline's.
    pub verify: Option<Tolerances>,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self {
            steps: 20,
            warmup: 2,
            verify: Some(Tolerances { rel: 1e-4, abs: 0.0 }),
        }
    }
}

/// Runs every configuration, one after another, from the same initial
/// state and reports steps per second against `baseline`.
pub fn run_benchmark(
    configs: &[EngineConfig],
    scenario: &Scenario,
    params: &SimParams,
    options: BenchOptions,
    baseline: &str,
) -> Result<BenchReport> {
    let tags: Vec<String> = configs.iter().map(|c| c.tag()).collect();
    if !tags.iter().any(|t| t == baseline) {
        return Err(Error::InvalidConfig(format!("baseline `{baseline}` is not in the matrix")));
    }
    for c in configs {
        c.clone().validate()?;
    }
    let initial = build_dam_break(scenario, params)?;
    let mut rows = Vec::with_capacity(configs.len());
    let mut finals = Vec::with_capacity(configs.len());
    for (config, tag) in configs.iter().zip(&tags) {
        let mut sim = Simulation::new(initial.clone(), params.clone(), config.clone())?;
        for _ in 0..options.warmup {
            sim.step()?;
        }
        let mut row = BenchRow {
            tag: tag.clone(),
            particles: initial.len(),
            steps: options.steps,
            wall_seconds: 0.0,
            steps_per_second: 0.0,
            speedup: 0.0,
            candidate_pairs: 0,
            true_pairs: 0,
            force_evals: 0,
            pi_fraction: 0.0,
        };
        let mut pi = 0.0;
        for _ in 0..options.steps {
            let s = sim.step()?;
            row.wall_seconds += s.wall_seconds;
            pi += s.stages.pi;
            row.candidate_pairs += s.candidate_pairs();
            row.true_pairs += s.true_pairs();
            row.force_evals += s.force_evals();
        }
        row.pi_fraction = if row.wall_seconds > 0.0 { pi / row.wall_seconds } else { 0.0 };
        rows.push(row);
        finals.push(Snapshot::from_system(sim.system(), sim.consts()));
    }
    if let Some(tol) = options.verify {
        let b = tags.iter().position(|t| t == baseline).expect("baseline checked above");
        for (k, tag) in tags.iter().enumerate() {
            if k == b {
                continue;
            }
            let report = compare_snapshots(&finals[b], &finals[k], tol)?;
            if !report.pass {
                return Err(Error::Equivalence {
                    tag: tag.clone(),
                    detail: report.to_string(),
                });
            }
        }
    }
    BenchReport::new(baseline, rows)
}
