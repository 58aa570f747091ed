use crate::engines::{Engine, EngineConfig, ForceInput, ForceOutput};
use crate::error::{Error, Result};
use crate::grid::{assign_cells_subdiv, build_ranges, reorder, CellGrid, CellLists, InteractionRanges};
use crate::model::{DerivedQuantities, ParticleSystem, SimParams};
use crate::physics::{derive_quantities, PhysicsConsts};

/// A cell-sorted copy of a system with everything the engines read about
/// its neighbourhoods.
#[derive(Clone, Debug)]
pub struct NeighborFrame {
    pub system: ParticleSystem,
    pub grid: CellGrid,
    pub lists: CellLists,
    pub ranges: Option<InteractionRanges>,
    /// Sorted index -> index in the source system.
    pub perm: Vec<usize>,
}

impl NeighborFrame {
    /// Assigns cells, sorts each list by cell and builds CellBeginEnd, plus
    /// interaction ranges when asked. A particle outside the domain is an
    /// [`Error::OutOfDomain`] (with step 0).
    pub fn build(system: &ParticleSystem, params: &SimParams, n_subdiv: u32, with_ranges: bool) -> Result<Self> {
        let mut grid = assign_cells_subdiv(&system.pos, params, n_subdiv);
        if let Some(&i) = grid.out_of_domain.first() {
            let id = system.id[i];
            return Err(if system.pos[i].iter().all(|c| c.is_finite()) {
                Error::OutOfDomain { step: 0, id }
            } else {
                Error::NonFinite { step: 0, id }
            });
        }
        let sorted = reorder(system, &grid)?;
        grid.cell_of = sorted.cell_of;
        let lists = CellLists::build(&grid.cell_of, system.count_boundary, grid.ncells());
        let ranges = if with_ranges {
            Some(build_ranges(&lists, grid.dims, n_subdiv)?)
        } else {
            None
        };
        Ok(Self {
            system: sorted.system,
            grid,
            lists,
            ranges,
            perm: sorted.perm,
        })
    }

    pub fn input<'a>(&'a self, derived: &'a DerivedQuantities, consts: &'a PhysicsConsts) -> ForceInput<'a> {
        ForceInput {
            system: &self.system,
            derived,
            grid: &self.grid,
            lists: &self.lists,
            ranges: self.ranges.as_ref(),
            consts,
        }
    }

    /// Puts per-particle values from sorted order back into source order.
    pub fn unsort<T: Copy + Default>(&self, sorted: &[T]) -> Vec<T> {
        let mut out = vec![T::default(); sorted.len()];
        for (i, &p) in self.perm.iter().enumerate() {
            out[p] = sorted[i];
        }
        out
    }
}

/// One force evaluation of `system` with `config`, outputs in the order of
/// `system`.
pub fn compute_system_forces(system: &ParticleSystem, params: &SimParams, config: &EngineConfig) -> Result<ForceOutput> {
    let mut engine = Engine::new(config.clone())?;
    let frame = NeighborFrame::build(system, params, config.n_subdiv(params), config.needs_ranges())?;
    let consts = PhysicsConsts::new(params);
    let derived = derive_quantities(&frame.system, &consts);
    let out = engine.compute(frame.input(&derived, &consts))?;
    Ok(ForceOutput {
        accel: frame.unsort(&out.accel),
        drho_dt: frame.unsort(&out.drho_dt),
        visc_mu: frame.unsort(&out.visc_mu),
        counters: out.counters,
    })
}
