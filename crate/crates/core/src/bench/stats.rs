use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::StepStats;

/// One line of the stats stream.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatsLine {
    pub step: u64,
    pub dt: f64,
    pub wall_s: f64,
    pub candidate_pairs: u64,
    pub true_pairs: u64,
    pub force_evals: u64,
    pub stage_nl_s: f64,
    pub stage_pi_s: f64,
    pub stage_su_s: f64,
}

impl From<&StepStats> for StatsLine {
    fn from(s: &StepStats) -> Self {
        Self {
            step: s.step,
            dt: s.dt,
            wall_s: s.wall_seconds,
            candidate_pairs: s.candidate_pairs(),
            true_pairs: s.true_pairs(),
            force_evals: s.force_evals(),
            stage_nl_s: s.stages.nl,
            stage_pi_s: s.stages.pi,
            stage_su_s: s.stages.su,
        }
    }
}

pub fn write_stats<W: Write>(mut w: W, stats: &[StepStats]) -> Result<()> {
    for s in stats {
        let line = serde_json::to_string(&StatsLine::from(s)).map_err(|e| Error::Parse {
            what: "stats line",
            detail: e.to_string(),
        })?;
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_stats<R: BufRead>(r: R) -> Result<Vec<StatsLine>> {
    let mut out = Vec::new();
    for (k, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::Parse {
            what: "stats line",
            detail: format!("line {}: {e}", k + 1),
        })?);
    }
    Ok(out)
}
