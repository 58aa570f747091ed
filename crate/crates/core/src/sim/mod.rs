//! Time stepping: neighbour list, particle interaction and system update,
//! repeated every step, plus the dam-break scenario.

mod frame;
mod integrate;
mod scenario;

use std::time::Instant;

use crate::engines::{Engine, EngineConfig, ForceInput};
use crate::error::{Error, Result};
use crate::model::{ParticleSystem, SimParams, StageTimes, StepStats};
use crate::physics::{derive_quantities, PhysicsConsts};

pub use frame::{compute_system_forces, NeighborFrame};
pub use integrate::{compute_dt, dt_terms, verlet_update, DtTerms, VerletState};
pub use scenario::{build_dam_break, Scenario};

/// Receives the particle state at snapshot times.
pub trait SnapshotSink {
    fn emit(&mut self, step: u64, time: f64, system: &ParticleSystem, consts: &PhysicsConsts) -> Result<()>;
}

impl<F> SnapshotSink for F
where
    F: FnMut(u64, f64, &ParticleSystem, &PhysicsConsts) -> Result<()>,
{
    fn emit(&mut self, step: u64, time: f64, system: &ParticleSystem, consts: &PhysicsConsts) -> Result<()> {
        self(step, time, system, consts)
    }
}

/// A running simulation. The particle arrays are re-sorted by cell every
/// step, so indices are not stable; use `system().id`.
pub struct Simulation {
    params: SimParams,
    consts: PhysicsConsts,
    engine: Engine,
    n_subdiv: u32,
    system: ParticleSystem,
    verlet: VerletState,
    time: f64,
}

impl Simulation {
    pub fn new(system: ParticleSystem, params: SimParams, config: EngineConfig) -> Result<Self> {
        let params = params.validate()?;
        system.check()?;
        let engine = Engine::new(config)?;
        let n_subdiv = engine.config().n_subdiv(&params);
        let mut verlet = VerletState::new(&system, params.verlet_corrector_stride);
        if params.boundary_rho_floor {
            verlet = verlet.with_boundary_floor(params.rho0);
        }
        Ok(Self {
            consts: PhysicsConsts::new(&params),
            verlet,
            params,
            engine,
            n_subdiv,
            system,
            time: 0.0,
        })
    }

    pub fn system(&self) -> &ParticleSystem {
        &self.system
    }

    pub fn params(&self) -> &SimParams {
        &self.params
    }

    pub fn consts(&self) -> &PhysicsConsts {
        &self.consts
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn steps(&self) -> u64 {
        self.verlet.step
    }

    pub fn step(&mut self) -> Result<StepStats> {
        self.step_with(None::<&mut dyn SnapshotSink>, 0)
    }

    /// One step; afterwards the state is handed to `sink` if the new step
    /// count is a multiple of `every` (never when `every == 0`).
    pub fn step_with<'s>(&mut self, sink: Option<&mut (dyn SnapshotSink + 's)>, every: u64) -> Result<StepStats> {
        let step = self.verlet.step;
        let at = |e: Error| match e {
            Error::OutOfDomain { id, .. } => Error::OutOfDomain { step, id },
            Error::NonFinite { id, .. } => Error::NonFinite { step, id },
            e => e,
        };
        let start = Instant::now();

        let frame = NeighborFrame::build(&self.system, &self.params, self.n_subdiv, self.engine.config().needs_ranges())
            .map_err(at)?;
        self.verlet.permute(&frame.perm);
        let NeighborFrame {
            system, grid, lists, ranges, ..
        } = frame;
        let t_nl = Instant::now();

        let derived = derive_quantities(&system, &self.consts);
        let forces = self.engine.compute(ForceInput {
            system: &system,
            derived: &derived,
            grid: &grid,
            lists: &lists,
            ranges: ranges.as_ref(),
            consts: &self.consts,
        })?;
        let t_pi = Instant::now();

        let dt = compute_dt(&forces, &system, &derived, &self.params);
        self.system = system;
        verlet_update(&mut self.system, &mut self.verlet, &forces, dt, self.params.gravity)?;
        self.time += dt;
        let t_su = Instant::now();

        self.check_state(step)?;
        let done = self.verlet.step;
        if let Some(sink) = sink {
            if every > 0 && done % every == 0 {
                sink.emit(done, self.time, &self.system, &self.consts)?;
            }
        }
        let end = Instant::now();

        Ok(StepStats {
            step,
            dt,
            counters: forces.counters,
            wall_seconds: (end - start).as_secs_f64(),
            engine_tag: self.engine.config().tag(),
            stages: StageTimes {
                nl: (t_nl - start).as_secs_f64(),
                pi: (t_pi - t_nl).as_secs_f64(),
                su: (t_su - t_pi).as_secs_f64(),
                bookkeeping: (end - t_su).as_secs_f64(),
            },
        })
    }

    fn check_state(&self, step: u64) -> Result<()> {
        let s = &self.system;
        let (lo, hi) = (self.params.domain_min, self.params.domain_max);
        for i in 0..s.len() {
            let finite = s.rho[i].is_finite()
                && s.pos[i].iter().all(|c| c.is_finite())
                && s.vel[i].iter().all(|c| c.is_finite());
            if !finite {
                return Err(Error::NonFinite { step, id: s.id[i] });
            }
            if (0..3).any(|d| s.pos[i][d] < lo[d] || s.pos[i][d] > hi[d]) {
                return Err(Error::OutOfDomain { step, id: s.id[i] });
            }
        }
        Ok(())
    }
}

/// When to stop: after `max_steps` steps or once simulated time reaches
/// `t_end`, whichever comes first. At least one must be set.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RunLimits {
    pub max_steps: Option<u64>,
    pub t_end: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub system: ParticleSystem,
    pub stats: Vec<StepStats>,
    pub time: f64,
}

/// Builds the scenario and runs it. The sink, if any, gets the initial
/// state and every `snapshot_every`-th step.
pub fn run_simulation(
    scenario: &Scenario,
    params: &SimParams,
    config: &EngineConfig,
    limits: RunLimits,
    mut sink: Option<&mut dyn SnapshotSink>,
    snapshot_every: u64,
) -> Result<RunOutput> {
    if limits.max_steps.is_none() && limits.t_end.is_none() {
        return Err(Error::InvalidConfig("need a step limit or an end time".into()));
    }
    if let Some(t) = limits.t_end {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::InvalidParam {
                field: "t_end",
                reason: format!("must be finite and non-negative, got {t}"),
            });
        }
    }
    let system = build_dam_break(scenario, params)?;
    let mut sim = Simulation::new(system, params.clone(), config.clone())?;
    if let Some(s) = sink.as_deref_mut() {
        s.emit(0, 0.0, sim.system(), sim.consts())?;
    }
    let mut stats = Vec::new();
    loop {
        if limits.max_steps.is_some_and(|m| sim.steps() >= m) || limits.t_end.is_some_and(|t| sim.time() >= t) {
            break;
        }
        stats.push(sim.step_with(sink.as_deref_mut(), snapshot_every)?);
    }
    Ok(RunOutput {
        time: sim.time,
        system: sim.system,
        stats,
    })
}
