//! `wcsph`: run the dam break, benchmark engine configurations, and query
//! the occupancy and memory models.

mod options;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use wcsph::bench::{
    best_block_size, compare_snapshots, device_memory_limit, estimate_range_memory, occupancy, run_benchmark,
    subdivided_cells, write_stats, BenchOptions, Capability, DeviceSpec, Snapshot, Tolerances,
};
use wcsph::engines::{EngineConfig, Threading};
use wcsph::grid::CellGrid;
use wcsph::model::ParticleSystem;
use wcsph::physics::PhysicsConsts;
use wcsph::sim::{run_simulation, SnapshotSink};
use wcsph::Error;

use options::{RunOptions, SimArgs};

#[derive(Parser, Debug)]
#[command(name = "wcsph", version, about = "Weakly-compressible SPH dam break with instrumented force engines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one simulation.
    Run(RunArgs),
    /// Time a matrix of engine configurations on the same initial state.
    Bench(BenchArgs),
    /// Occupancy of a kernel for each block size.
    Occupancy(OccupancyArgs),
    /// Memory taken by precomputed interaction ranges.
    Mem(MemArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    sim: SimArgs,
    /// Write a snapshot every N steps (the initial and final state are always written).
    #[arg(long, value_name = "N")]
    snapshot_every: Option<u64>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[command(flatten)]
    sim: SimArgs,
    /// Engine tags to compare, e.g. `cp-sym-l4-symm-t4` (repeatable). Defaults to a standard matrix.
    #[arg(long = "config-tag", value_name = "TAG")]
    tags: Vec<String>,
    /// Steps run before timing starts.
    #[arg(long, default_value_t = 2)]
    warmup: u64,
    /// Relative tolerance for the final-state agreement check.
    #[arg(long, default_value_t = 1e-4)]
    tolerance: f64,
}

#[derive(Args, Debug)]
struct OccupancyArgs {
    /// Registers per thread.
    #[arg(long)]
    regs: u32,
    /// Threads per block; all valid sizes when omitted.
    #[arg(long)]
    block: Option<u32>,
    /// Compute capability (1.0, 1.1, 1.2, 1.3, 2.x); all when omitted.
    #[arg(long)]
    capability: Option<Capability>,
}

#[derive(Args, Debug)]
struct MemArgs {
    /// Cells at full cell size. Derived from the dam-break domain at `--dp` when omitted.
    #[arg(long)]
    ncells: Option<u64>,
    #[arg(long, default_value_t = 0.01)]
    dp: f32,
    #[arg(long, default_value_t = 2.0)]
    hdp: f32,
    /// Annotate against a card's memory (gtx480, tesla1060).
    #[arg(long)]
    device: Option<String>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(err) if err.is_divergence() => 2,
        Some(Error::Equivalence { .. }) => 3,
        _ => 1,
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Run(a) => run(a),
        Command::Bench(a) => bench(a),
        Command::Occupancy(a) => occupancy_table(a),
        Command::Mem(a) => mem(a),
    }
}

struct DirSink {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl SnapshotSink for DirSink {
    fn emit(&mut self, step: u64, _time: f64, system: &ParticleSystem, consts: &PhysicsConsts) -> wcsph::Result<()> {
        let path = self.dir.join(format!("snapshot_{step:06}.csv"));
        Snapshot::from_system(system, consts).write_file(&path)?;
        self.written.push(path);
        Ok(())
    }
}

fn create_dir(dir: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn run(a: RunArgs) -> anyhow::Result<()> {
    let opts = a.sim.resolve()?;
    let RunOptions {
        scenario,
        params,
        config,
        limits,
        out,
        verify,
        ..
    } = &opts;
    println!(
        "dam break: dp {} h {} c0 {:.3}, {} fluid + {} boundary particles, engine {}",
        scenario.dp,
        params.h,
        params.c0,
        scenario.fluid_count(),
        scenario.boundary_count(),
        config.tag()
    );
    let mut sink = match out {
        Some(dir) => {
            create_dir(dir)?;
            Some(DirSink {
                dir: dir.clone(),
                written: vec![],
            })
        }
        None => None,
    };
    let every = a.snapshot_every.unwrap_or(0);
    let result = run_simulation(
        scenario,
        params,
        config,
        *limits,
        sink.as_mut().map(|s| s as &mut dyn SnapshotSink),
        every,
    )?;
    if let (Some(dir), Some(sink)) = (out, sink.as_mut()) {
        let last = result.stats.len() as u64;
        if every == 0 || last % every != 0 {
            sink.emit(last, result.time, &result.system, &PhysicsConsts::new(params))?;
        }
        let path = dir.join("stats.jsonl");
        let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        write_stats(BufWriter::new(file), &result.stats)?;
        println!("wrote {} snapshots and {}", sink.written.len(), path.display());
    }
    let wall: f64 = result.stats.iter().map(|s| s.wall_seconds).sum();
    let pi: f64 = result.stats.iter().map(|s| s.stages.pi).sum();
    let evals: u64 = result.stats.iter().map(|s| s.force_evals()).sum();
    println!(
        "{} steps to t = {:.6} s in {:.3} s ({:.2} steps/s), PI {:.1}%, {} force evaluations",
        result.stats.len(),
        result.time,
        wall,
        result.stats.len() as f64 / wall.max(f64::MIN_POSITIVE),
        100.0 * pi / wall.max(f64::MIN_POSITIVE),
        evals
    );
    if *verify {
        let reference = EngineConfig::cellpairs(false, 1, Threading::Single, 1);
        let check = run_simulation(scenario, params, &reference, *limits, None, 0)?;
        let consts = PhysicsConsts::new(params);
        let report = compare_snapshots(
            &Snapshot::from_system(&check.system, &consts),
            &Snapshot::from_system(&result.system, &consts),
            Tolerances {
                rel: opts.tolerance,
                abs: 0.0,
            },
        )?;
        println!("verify against {}: {report}", reference.tag());
        if !report.pass {
            return Err(Error::Equivalence {
                tag: config.tag(),
                detail: report.to_string(),
            }
            .into());
        }
    }
    Ok(())
}

fn default_matrix(threads: usize) -> Vec<EngineConfig> {
    use wcsph::engines::GatherVariant;
    let mut m = vec![
        EngineConfig::cellpairs(false, 1, Threading::Single, 1),
        EngineConfig::cellpairs(true, 1, Threading::Single, 1),
        EngineConfig::cellpairs(true, 4, Threading::Single, 1),
    ];
    if threads > 1 {
        m.push(EngineConfig::cellpairs(false, 4, Threading::Asymmetric, threads));
        m.push(EngineConfig::cellpairs(true, 4, Threading::Symmetric, threads));
        m.push(EngineConfig::cellpairs(true, 4, Threading::Slices, threads));
    }
    for v in [GatherVariant::SlowCellsH, GatherVariant::SlowCellsHalf, GatherVariant::FastCellsHalf] {
        m.push(EngineConfig::gather(v, threads));
    }
    m
}

fn bench(a: BenchArgs) -> anyhow::Result<()> {
    let opts = a.sim.resolve()?;
    let Some(steps) = opts.limits.max_steps else {
        bail!("bench needs --steps");
    };
    let configs: Vec<EngineConfig> = if a.tags.is_empty() {
        if opts.engine_given {
            vec![EngineConfig::cellpairs(false, 1, Threading::Single, 1), opts.config.clone()]
        } else {
            default_matrix(opts.config.thread_count)
        }
    } else {
        a.tags
            .iter()
            .map(|t| t.parse::<EngineConfig>().and_then(|c| c.validate()))
            .collect::<Result<_, _>>()?
    };
    let mut configs = configs;
    configs.dedup_by(|x, y| x.tag() == y.tag());
    let baseline = opts.baseline.clone().unwrap_or_else(|| configs[0].tag());
    let options = BenchOptions {
        steps,
        warmup: a.warmup,
        verify: Some(Tolerances {
            rel: a.tolerance,
            abs: 0.0,
        }),
    };
    println!(
        "benchmark: {} configurations, {} particles, {} steps after {} warmup",
        configs.len(),
        opts.scenario.fluid_count() + opts.scenario.boundary_count(),
        steps,
        a.warmup
    );
    let report = run_benchmark(&configs, &opts.scenario, &opts.params, options, &baseline)?;
    print!("{}", report.to_table());
    if let Some(dir) = &opts.out {
        create_dir(dir)?;
        let path = dir.join("bench.csv");
        fs::write(&path, report.to_csv()).with_context(|| format!("writing {}", path.display()))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn occupancy_table(a: OccupancyArgs) -> anyhow::Result<()> {
    let caps: Vec<Capability> = match a.capability {
        Some(c) => vec![c],
        None => Capability::ALL.to_vec(),
    };
    let mut out = std::io::stdout().lock();
    for cap in caps {
        let dev = DeviceSpec::new(cap);
        writeln!(out, "capability {cap}, {} registers/thread", a.regs)?;
        let blocks: Vec<u32> = match a.block {
            Some(b) => vec![b],
            None => (32..=dev.max_threads_per_block).step_by(32).collect(),
        };
        for b in blocks {
            writeln!(out, "  {b:>5} threads  {:>6.2}%", 100.0 * occupancy(a.regs, b, &dev)?)?;
        }
        let (b, occ) = best_block_size(a.regs, &dev);
        writeln!(out, "  best: {b} threads, {:.2}%", 100.0 * occ)?;
    }
    Ok(())
}

fn mem(a: MemArgs) -> anyhow::Result<()> {
    let ncells = match a.ncells {
        Some(n) => n,
        None => {
            let s = wcsph::sim::Scenario::dam_break(a.dp);
            s.validate()?;
            let p = s.params(a.hdp).validate()?;
            let g = CellGrid::new(p.domain_min, p.domain_max, p.support(), 1);
            println!("dam break at dp {}: {} particles", a.dp, s.fluid_count() + s.boundary_count());
            g.ncells() as u64
        }
    };
    let limit = match &a.device {
        Some(tag) => Some(device_memory_limit(tag).with_context(|| format!("unknown device `{tag}`"))?),
        None => None,
    };
    for n in [1u32, 2] {
        let cells = subdivided_cells(ncells, n);
        let bytes = estimate_range_memory(cells, n)?;
        let mut line = format!(
            "cells {}: {cells} cells, {bytes} bytes ({:.2} MB)",
            if n == 1 { "h" } else { "h/2" },
            bytes as f64 / 1e6
        );
        if let Some((name, cap)) = limit {
            line.push_str(&format!(", {:.3}% of {name}", 100.0 * bytes as f64 / cap as f64));
            if bytes > cap {
                line.push_str(" (does not fit)");
            }
        }
        println!("{line}");
    }
    Ok(())
}
