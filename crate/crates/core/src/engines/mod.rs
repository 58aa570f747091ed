//! Interchangeable force-computation engines.
//!
//! Two traversal families:
//! - **cell pairs**: the cell is the unit of work; optionally symmetric
//!   (each unordered pair evaluated once and scattered to both particles),
//!   optionally lane-batched, with four threading strategies;
//! - **gather**: one work item per particle that reads neighbours and writes
//!   only its own outputs, in a fused F-F + F-B pass followed by a
//!   boundary-only B-F pass.
//!
//! Every engine accumulates in double precision and returns single
//! precision arrays.

mod accum;
mod cellpairs;
mod gather;
mod pairs;
mod slices;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{CellGrid, CellLists, InteractionRanges};
use crate::model::{DerivedQuantities, EngineCounters, ParticleSystem, SimParams, Vec3};
use crate::physics::{DerivedMode, PhysicsConsts};

pub use accum::{merge_accumulators, Accumulators};
pub use cellpairs::compute_forces_cellpairs;
pub use gather::compute_forces_gather;
pub use slices::{even_slices, rebalance_slices};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EngineKind {
    CellPairs,
    Gather,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Threading {
    Single,
    /// No symmetry; blocks of cells handed out dynamically.
    Asymmetric,
    /// Symmetry with a private accumulator per thread, merged afterwards.
    Symmetric,
    /// X-axis slabs; symmetry only inside a slab.
    Slices,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GatherVariant {
    /// Precomputed ranges, cells of half the interaction radius.
    FastCellsHalf,
    /// Row ranges computed on the fly, cells of half the interaction radius.
    SlowCellsHalf,
    /// Row ranges computed on the fly, cells of the full interaction radius.
    SlowCellsH,
}

impl GatherVariant {
    pub fn n_subdiv(self) -> u32 {
        match self {
            GatherVariant::FastCellsHalf | GatherVariant::SlowCellsHalf => 2,
            GatherVariant::SlowCellsH => 1,
        }
    }

    pub fn needs_ranges(self) -> bool {
        matches!(self, GatherVariant::FastCellsHalf)
    }
}

/// Which interaction classes are evaluated. `FluidOnly` suppresses F-B and
/// B-F terms, isolating the momentum-conserving F-F exchange.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InteractionSet {
    #[default]
    All,
    FluidOnly,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EngineConfig {
    pub engine: EngineKind,
    pub symmetry: bool,
    /// 1 or 4 pairs per evaluation.
    pub lane_batch: usize,
    pub threading: Threading,
    pub thread_count: usize,
    pub gather_variant: GatherVariant,
    pub block_of_cells: usize,
    pub derived_mode: DerivedMode,
    pub interactions: InteractionSet,
    /// Cell subdivision for cell-pair engines; `None` uses the run's
    /// `SimParams::n_subdiv`. Gather engines take it from the variant.
    pub cell_subdiv: Option<u32>,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            engine: EngineKind::CellPairs,
            symmetry: true,
            lane_batch: 1,
            threading: Threading::Single,
            thread_count: 1,
            gather_variant: GatherVariant::FastCellsHalf,
            block_of_cells: 10,
            derived_mode: DerivedMode::Precomputed,
            interactions: InteractionSet::All,
            cell_subdiv: None,
        }
    }
}

impl EngineConfig {
    pub fn cellpairs(symmetry: bool, lane_batch: usize, threading: Threading, thread_count: usize) -> Self {
        Self {
            symmetry,
            lane_batch,
            threading,
            thread_count,
            ..Self::default()
        }
    }

    pub fn gather(variant: GatherVariant, thread_count: usize) -> Self {
        Self {
            engine: EngineKind::Gather,
            symmetry: false,
            threading: if thread_count > 1 {
                Threading::Asymmetric
            } else {
                Threading::Single
            },
            thread_count,
            gather_variant: variant,
            ..Self::default()
        }
    }

    /// Checks the configuration. Asymmetric threading forces symmetry off;
    /// the normalised configuration is returned.
    pub fn validate(mut self) -> Result<Self> {
        if self.thread_count < 1 {
            return Err(Error::InvalidConfig("thread_count must be at least 1".into()));
        }
        if !(self.lane_batch == 1 || self.lane_batch == 4) {
            return Err(Error::InvalidConfig(format!(
                "lane_batch must be 1 or 4, got {}",
                self.lane_batch
            )));
        }
        if self.block_of_cells < 1 {
            return Err(Error::InvalidConfig("block_of_cells must be at least 1".into()));
        }
        if self.cell_subdiv == Some(0) {
            return Err(Error::InvalidConfig("cell_subdiv must be at least 1".into()));
        }
        match self.engine {
            EngineKind::Gather => {
                if self.symmetry {
                    return Err(Error::InvalidConfig(
                        "symmetry cannot be applied by the per-particle gather engine".into(),
                    ));
                }
            }
            EngineKind::CellPairs => match self.threading {
                Threading::Asymmetric => self.symmetry = false,
                Threading::Symmetric if !self.symmetry => {
                    return Err(Error::InvalidConfig("Symmetric threading requires symmetry".into()));
                }
                _ => {}
            },
        }
        Ok(self)
    }

    /// Cell subdivision the neighbour list must be built with.
    pub fn n_subdiv(&self, params: &SimParams) -> u32 {
        match self.engine {
            EngineKind::Gather => self.gather_variant.n_subdiv(),
            EngineKind::CellPairs => self.cell_subdiv.unwrap_or(params.n_subdiv),
        }
    }

    pub fn needs_ranges(&self) -> bool {
        self.engine == EngineKind::Gather && self.gather_variant.needs_ranges()
    }

    /// Canonical short name, parseable by [`FromStr`].
    ///
    /// `cp-{sym|nosym}-l{1|4}-{single|asym|symm|slices}-t{N}[-h2][-rec]` or
    /// `gather-{fasthalf|slowhalf|slowh}-t{N}[-rec]`.
    pub fn tag(&self) -> String {
        let mut s = match self.engine {
            EngineKind::CellPairs => {
                let thr = match self.threading {
                    Threading::Single => "single",
                    Threading::Asymmetric => "asym",
                    Threading::Symmetric => "symm",
                    Threading::Slices => "slices",
                };
                let mut s = format!(
                    "cp-{}-l{}-{}-t{}",
                    if self.symmetry { "sym" } else { "nosym" },
                    self.lane_batch,
                    thr,
                    self.thread_count
                );
                if let Some(n) = self.cell_subdiv {
                    s.push_str(&format!("-h{n}"));
                }
                s
            }
            EngineKind::Gather => {
                let v = match self.gather_variant {
                    GatherVariant::FastCellsHalf => "fasthalf",
                    GatherVariant::SlowCellsHalf => "slowhalf",
                    GatherVariant::SlowCellsH => "slowh",
                };
                format!("gather-{v}-t{}", self.thread_count)
            }
        };
        if self.derived_mode == DerivedMode::Recomputed {
            s.push_str("-rec");
        }
        if self.interactions == InteractionSet::FluidOnly {
            s.push_str("-ff");
        }
        s
    }
}

impl fmt::Display for EngineConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tag())
    }
}

impl FromStr for EngineConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |detail: String| Error::Parse {
            what: "engine tag",
            detail,
        };
        let mut parts = s.split('-');
        let mut cfg = match parts.next() {
            Some("cp") => EngineConfig::default(),
            Some("gather") => EngineConfig::gather(GatherVariant::FastCellsHalf, 1),
            other => return Err(bad(format!("unknown engine `{}`", other.unwrap_or("")))),
        };
        for p in parts {
            match p {
                "sym" => cfg.symmetry = true,
                "nosym" => cfg.symmetry = false,
                "l1" => cfg.lane_batch = 1,
                "l4" => cfg.lane_batch = 4,
                "single" => cfg.threading = Threading::Single,
                "asym" => cfg.threading = Threading::Asymmetric,
                "symm" => cfg.threading = Threading::Symmetric,
                "slices" => cfg.threading = Threading::Slices,
                "fasthalf" => cfg.gather_variant = GatherVariant::FastCellsHalf,
                "slowhalf" => cfg.gather_variant = GatherVariant::SlowCellsHalf,
                "slowh" => cfg.gather_variant = GatherVariant::SlowCellsH,
                "rec" => cfg.derived_mode = DerivedMode::Recomputed,
                "ff" => cfg.interactions = InteractionSet::FluidOnly,
                _ if p.starts_with('t') => {
                    cfg.thread_count = p[1..].parse().map_err(|_| bad(format!("bad thread count `{p}`")))?;
                }
                _ if p.starts_with('h') => {
                    cfg.cell_subdiv = Some(p[1..].parse().map_err(|_| bad(format!("bad cell subdivision `{p}`")))?);
                }
                _ => return Err(bad(format!("unknown component `{p}` in `{s}`"))),
            }
        }
        if cfg.engine == EngineKind::Gather {
            cfg.threading = if cfg.thread_count > 1 {
                Threading::Asymmetric
            } else {
                Threading::Single
            };
        }
        cfg.validate()
    }
}

/// Per-particle force-stage output. `accel` excludes gravity and is zero on
/// boundary particles.
#[derive(Clone, Debug, PartialEq)]
pub struct ForceOutput {
    pub accel: Vec<Vec3>,
    pub drho_dt: Vec<f32>,
    /// Largest `|mu_ab|` over each particle's neighbours.
    pub visc_mu: Vec<f32>,
    pub counters: EngineCounters,
}

/// Everything a force engine reads about the current step.
#[derive(Clone, Copy)]
pub struct ForceInput<'a> {
    pub system: &'a ParticleSystem,
    pub derived: &'a DerivedQuantities,
    pub grid: &'a CellGrid,
    pub lists: &'a CellLists,
    pub ranges: Option<&'a InteractionRanges>,
    pub consts: &'a PhysicsConsts,
}

impl ForceInput<'_> {
    fn check(&self) -> Result<()> {
        let n = self.system.len();
        if self.derived.len() != n {
            return Err(Error::Inconsistent(format!(
                "derived quantities cover {} particles, system has {n}",
                self.derived.len()
            )));
        }
        if self.grid.cell_of.len() != n {
            return Err(Error::Inconsistent(format!(
                "grid covers {} particles, system has {n}",
                self.grid.cell_of.len()
            )));
        }
        let nc = self.grid.ncells();
        if self.lists.fluid.ncells() != nc || self.lists.boundary.ncells() != nc {
            return Err(Error::Inconsistent("cell lists do not match grid".into()));
        }
        let fluid_end = self.lists.fluid.ranges.last().map(|r| r[1] as usize);
        if fluid_end.unwrap_or(n) != n {
            return Err(Error::Inconsistent("cell lists do not cover the system".into()));
        }
        Ok(())
    }
}

/// A configured engine plus the state it carries between steps (slice
/// bounds for the Slices strategy).
#[derive(Clone, Debug)]
pub struct Engine {
    config: EngineConfig,
    slice_bounds: Option<Vec<usize>>,
}

impl Engine {
    pub fn new(config: EngineConfig) -> Result<Self> {
        Ok(Self {
            config: config.validate()?,
            slice_bounds: None,
        })
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn slice_bounds(&self) -> Option<&[usize]> {
        self.slice_bounds.as_deref()
    }

    pub fn compute(&mut self, input: ForceInput<'_>) -> Result<ForceOutput> {
        match self.config.engine {
            EngineKind::CellPairs => compute_forces_cellpairs(input, &self.config, &mut self.slice_bounds),
            EngineKind::Gather => compute_forces_gather(input, &self.config),
        }
    }
}
