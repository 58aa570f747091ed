//! Simulation flags shared by `run` and `bench`, plus the key-value config
//! file that mirrors them.

use std::collections::HashMap;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context};
use clap::Args;
use wcsph::engines::{EngineConfig, EngineKind, GatherVariant, Threading};
use wcsph::model::SimParams;
use wcsph::sim::{RunLimits, Scenario};

#[derive(Args, Debug, Default)]
pub struct SimArgs {
    /// Initial particle spacing in metres [default: 0.01].
    #[arg(long)]
    pub dp: Option<f32>,
    /// Smoothing length over particle spacing [default: 2.0].
    #[arg(long)]
    pub hdp: Option<f32>,
    /// `cellpairs`, `gather`, or a full engine tag such as `cp-sym-l4-symm-t4`.
    #[arg(long)]
    pub engine: Option<String>,
    /// Compute each pair once (`on`) or from both sides (`off`).
    #[arg(long)]
    pub symmetry: Option<String>,
    /// Pairs evaluated per batch: 1 or 4.
    #[arg(long)]
    pub lanes: Option<usize>,
    #[arg(long)]
    pub threads: Option<usize>,
    /// single, asymmetric, symmetric or slices.
    #[arg(long)]
    pub threading: Option<String>,
    /// Cell size: `h` (one cell per interaction radius) or `h/2`.
    #[arg(long)]
    pub cells: Option<String>,
    /// fast-half, slow-half or slow-h.
    #[arg(long)]
    pub gather_variant: Option<String>,
    #[arg(long)]
    pub steps: Option<u64>,
    /// Simulated end time in seconds.
    #[arg(long)]
    pub tend: Option<f64>,
    /// Directory for snapshots, stats and reports.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Engine tag the speedups are relative to.
    #[arg(long)]
    pub baseline: Option<String>,
    /// Check the result against the single-threaded reference engine.
    #[arg(long)]
    pub verify: bool,
    /// `key = value` file with any of the flags above; flags win.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

pub struct RunOptions {
    pub scenario: Scenario,
    pub params: SimParams,
    pub config: EngineConfig,
    /// Whether any engine flag was given.
    pub engine_given: bool,
    pub limits: RunLimits,
    pub out: Option<PathBuf>,
    pub baseline: Option<String>,
    pub verify: bool,
    pub tolerance: f64,
}

const KEYS: [&str; 14] = [
    "dp",
    "hdp",
    "engine",
    "symmetry",
    "lanes",
    "threads",
    "threading",
    "cells",
    "gather-variant",
    "steps",
    "tend",
    "out",
    "baseline",
    "verify",
];

pub fn parse_config_file(text: &str) -> anyhow::Result<HashMap<String, String>> {
    let mut map = HashMap::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("line {}: expected `key = value`", k + 1))?;
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            bail!("line {}: unknown key `{key}`", k + 1);
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

fn pick<T: FromStr>(flag: Option<T>, file: &HashMap<String, String>, key: &str) -> anyhow::Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    if flag.is_some() {
        return Ok(flag);
    }
    match file.get(key) {
        Some(v) => v
            .parse()
            .map(Some)
            .map_err(|e| anyhow!("config `{key}`: cannot parse `{v}`: {e}")),
        None => Ok(None),
    }
}

fn parse_bool(s: &str) -> anyhow::Result<bool> {
    match s.to_ascii_lowercase().as_str() {
        "on" | "true" | "yes" | "1" => Ok(true),
        "off" | "false" | "no" | "0" => Ok(false),
        _ => bail!("expected on/off, got `{s}`"),
    }
}

fn parse_threading(s: &str) -> anyhow::Result<Threading> {
    Ok(match s.to_ascii_lowercase().as_str() {
        "single" => Threading::Single,
        "asymmetric" | "asym" => Threading::Asymmetric,
        "symmetric" | "symm" => Threading::Symmetric,
        "slices" => Threading::Slices,
        _ => bail!("unknown threading `{s}` (single, asymmetric, symmetric, slices)"),
    })
}

fn parse_variant(s: &str) -> anyhow::Result<GatherVariant> {
    Ok(match s.to_ascii_lowercase().replace('_', "-").as_str() {
        "fast-half" | "fasthalf" | "fastcellshalf" => GatherVariant::FastCellsHalf,
        "slow-half" | "slowhalf" | "slowcellshalf" => GatherVariant::SlowCellsHalf,
        "slow-h" | "slowh" | "slowcellsh" => GatherVariant::SlowCellsH,
        _ => bail!("unknown gather variant `{s}` (fast-half, slow-half, slow-h)"),
    })
}

fn parse_cells(s: &str) -> anyhow::Result<u32> {
    match s {
        "h" => Ok(1),
        "h/2" => Ok(2),
        _ => bail!("cells must be `h` or `h/2`, got `{s}`"),
    }
}

fn default_threads() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

impl SimArgs {
    /// Merges the config file under the flags and builds everything a run
    /// needs.
    pub fn resolve(self) -> anyhow::Result<RunOptions> {
        let file = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                parse_config_file(&text).with_context(|| format!("in {}", path.display()))?
            }
            None => HashMap::new(),
        };
        let dp = pick(self.dp, &file, "dp")?.unwrap_or(0.01);
        let hdp = pick(self.hdp, &file, "hdp")?.unwrap_or(2.0);
        let engine = pick(self.engine, &file, "engine")?;
        let symmetry = pick(self.symmetry, &file, "symmetry")?;
        let lanes = pick(self.lanes, &file, "lanes")?;
        let threads = pick(self.threads, &file, "threads")?;
        let threading = pick(self.threading, &file, "threading")?;
        let cells = pick(self.cells, &file, "cells")?;
        let variant = pick(self.gather_variant, &file, "gather-variant")?;
        let steps = pick(self.steps, &file, "steps")?;
        let tend = pick(self.tend, &file, "tend")?;
        let out = pick(self.out, &file, "out")?;
        let baseline = pick(self.baseline, &file, "baseline")?;
        let verify = self.verify || file.get("verify").map(|v| parse_bool(v)).transpose()?.unwrap_or(false);

        let engine_given = engine.is_some()
            || symmetry.is_some()
            || lanes.is_some()
            || threads.is_some()
            || threading.is_some()
            || cells.is_some()
            || variant.is_some();

        let mut cfg = match engine.as_deref() {
            None | Some("cellpairs") | Some("cp") => EngineConfig::default(),
            Some("gather") => EngineConfig::gather(GatherVariant::FastCellsHalf, 1),
            Some(tag) => tag.parse::<EngineConfig>()?,
        };
        if let Some(s) = &symmetry {
            cfg.symmetry = parse_bool(s).context("--symmetry")?;
        }
        if let Some(l) = lanes {
            cfg.lane_batch = l;
        }
        if let Some(t) = &threading {
            if cfg.engine == EngineKind::Gather {
                bail!("--threading applies to the cell-pairs engine");
            }
            cfg.threading = parse_threading(t)?;
            if cfg.threading == Threading::Single {
                cfg.thread_count = 1;
            } else if threads.is_none() && cfg.thread_count == 1 {
                cfg.thread_count = default_threads();
            }
        }
        if let Some(k) = threads {
            cfg.thread_count = k;
            if cfg.engine == EngineKind::CellPairs && threading.is_none() && k > 1 && cfg.threading == Threading::Single {
                cfg.threading = if cfg.symmetry { Threading::Symmetric } else { Threading::Asymmetric };
            }
        }
        if let Some(v) = &variant {
            if cfg.engine != EngineKind::Gather {
                bail!("--gather-variant needs --engine gather");
            }
            cfg.gather_variant = parse_variant(v)?;
        }
        if let Some(c) = &cells {
            let n = parse_cells(c)?;
            match cfg.engine {
                EngineKind::CellPairs => cfg.cell_subdiv = Some(n),
                EngineKind::Gather => {
                    if variant.is_none() {
                        cfg.gather_variant = if n == 1 {
                            GatherVariant::SlowCellsH
                        } else {
                            GatherVariant::FastCellsHalf
                        };
                    } else if cfg.gather_variant.n_subdiv() != n {
                        bail!("--cells {c} conflicts with the gather variant");
                    }
                }
            }
        }
        if cfg.engine == EngineKind::Gather && symmetry.is_none() {
            cfg.symmetry = false;
        }
        let config = cfg.validate()?;

        let scenario = Scenario::dam_break(dp);
        scenario.validate()?;
        let params = scenario.params(hdp).validate()?;
        let limits = RunLimits {
            max_steps: if steps.is_none() && tend.is_none() { Some(100) } else { steps },
            t_end: tend,
        };
        Ok(RunOptions {
            scenario,
            params,
            config,
            engine_given,
            limits,
            out,
            baseline,
            verify,
            tolerance: 1e-4,
        })
    }
}
