//! Shared domain types: particle state, derived per-particle quantities,
//! simulation parameters and per-step instrumentation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Single-precision 3-vector used for all particle state.
pub type Vec3 = [f32; 3];

#[inline(always)]
pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline(always)]
pub fn dot(a: Vec3, b: Vec3) -> f32 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline(always)]
pub fn scale(a: Vec3, s: f32) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline(always)]
pub fn neg(a: Vec3) -> Vec3 {
    [-a[0], -a[1], -a[2]]
}

#[inline(always)]
pub fn norm(a: Vec3) -> f32 {
    dot(a, a).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ParticleKind {
    Fluid,
    Boundary,
}

/// Structure-of-arrays particle state.
///
/// Layout is segregated: boundary particles occupy `[0, count_boundary)` and
/// fluid particles occupy `[count_boundary, len)`. Every engine and the grid
/// rely on this, and reordering sorts each block independently.
#[derive(Clone, Debug, PartialEq)]
pub struct ParticleSystem {
    pub count_boundary: usize,
    pub count_fluid: usize,
    pub pos: Vec<Vec3>,
    pub vel: Vec<Vec3>,
    pub rho: Vec<f32>,
    pub ptype: Vec<ParticleKind>,
    /// Stable identifiers; survive every reorder.
    pub id: Vec<u32>,
    pub mass_fluid: f32,
    pub mass_boundary: f32,
}

impl ParticleSystem {
    /// Builds a system from separate boundary and fluid lists. Ids are
    /// assigned sequentially, boundary first.
    pub fn from_parts(
        boundary_pos: Vec<Vec3>,
        fluid_pos: Vec<Vec3>,
        fluid_vel: Vec<Vec3>,
        rho: impl Fn(ParticleKind, Vec3) -> f32,
        mass_boundary: f32,
        mass_fluid: f32,
    ) -> Self {
        assert_eq!(fluid_pos.len(), fluid_vel.len());
        let nb = boundary_pos.len();
        let nf = fluid_pos.len();
        let mut pos = boundary_pos;
        pos.extend_from_slice(&fluid_pos);
        let mut vel = vec![[0.0; 3]; nb];
        vel.extend_from_slice(&fluid_vel);
        let ptype: Vec<_> = (0..nb + nf)
            .map(|i| {
                if i < nb {
                    ParticleKind::Boundary
                } else {
                    ParticleKind::Fluid
                }
            })
            .collect();
        let rho = pos.iter().zip(&ptype).map(|(p, k)| rho(*k, *p)).collect();
        Self {
            count_boundary: nb,
            count_fluid: nf,
            pos,
            vel,
            rho,
            ptype,
            id: (0..(nb + nf) as u32).collect(),
            mass_fluid,
            mass_boundary,
        }
    }

    pub fn len(&self) -> usize {
        self.pos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pos.is_empty()
    }

    #[inline(always)]
    pub fn is_fluid(&self, i: usize) -> bool {
        i >= self.count_boundary
    }

    #[inline(always)]
    pub fn mass(&self, i: usize) -> f32 {
        if self.is_fluid(i) {
            self.mass_fluid
        } else {
            self.mass_boundary
        }
    }

    pub fn boundary_range(&self) -> std::ops::Range<usize> {
        0..self.count_boundary
    }

    pub fn fluid_range(&self) -> std::ops::Range<usize> {
        self.count_boundary..self.len()
    }

    /// Checks the structural invariants (lengths, layout, positive density).
    pub fn check(&self) -> Result<()> {
        let n = self.count_boundary + self.count_fluid;
        let lens = [
            self.pos.len(),
            self.vel.len(),
            self.rho.len(),
            self.ptype.len(),
            self.id.len(),
        ];
        if lens.iter().any(|&l| l != n) {
            return Err(Error::Inconsistent(format!(
                "array lengths {lens:?} do not match particle count {n}"
            )));
        }
        if let Some(i) = (0..n).find(|&i| {
            let expect = if i < self.count_boundary {
                ParticleKind::Boundary
            } else {
                ParticleKind::Fluid
            };
            self.ptype[i] != expect
        }) {
            return Err(Error::Inconsistent(format!(
                "particle {i} breaks the boundary-then-fluid layout"
            )));
        }
        if let Some(i) = self.rho.iter().position(|&r| !(r > 0.0)) {
            return Err(Error::Inconsistent(format!(
                "particle id {} has non-positive density {}",
                self.id[i], self.rho[i]
            )));
        }
        Ok(())
    }

    /// Returns the system with every per-particle array gathered through
    /// `perm` (new index -> old index).
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self {
            count_boundary: self.count_boundary,
            count_fluid: self.count_fluid,
            pos: gather(&self.pos, perm),
            vel: gather(&self.vel, perm),
            rho: gather(&self.rho, perm),
            ptype: gather(&self.ptype, perm),
            id: gather(&self.id, perm),
            mass_fluid: self.mass_fluid,
            mass_boundary: self.mass_boundary,
        }
    }
}

/// `out[k] = src[perm[k]]`.
pub fn gather<T: Copy>(src: &[T], perm: &[usize]) -> Vec<T> {
    perm.iter().map(|&p| src[p]).collect()
}

/// Per-particle quantities derived from density through the equation of
/// state. Either cached once per step or recomputed inside the pair loop,
/// depending on [`DerivedMode`](crate::physics::DerivedMode).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DerivedQuantities {
    pub press: Vec<f32>,
    pub csound: Vec<f32>,
    /// `press / rho^2`.
    pub prrho: Vec<f32>,
    /// Per-particle tensile coefficient `R_i`.
    pub tensil: Vec<f32>,
}

impl DerivedQuantities {
    pub fn len(&self) -> usize {
        self.press.len()
    }

    pub fn is_empty(&self) -> bool {
        self.press.is_empty()
    }

    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self {
            press: gather(&self.press, perm),
            csound: gather(&self.csound, perm),
            prrho: gather(&self.prrho, perm),
            tensil: gather(&self.tensil, perm),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimParams {
    /// Smoothing length; the kernel support radius is `2h`.
    pub h: f32,
    /// Initial particle spacing.
    pub dp: f32,
    /// Cells have side `2h / n_subdiv`.
    pub n_subdiv: u32,
    pub rho0: f32,
    pub c0: f32,
    pub gamma: f32,
    /// Artificial viscosity coefficient.
    pub alpha: f32,
    pub gravity: Vec3,
    pub cfl: f32,
    pub domain_min: Vec3,
    pub domain_max: Vec3,
    pub verlet_corrector_stride: u32,
    /// Keep boundary density at or above `rho0` so wall particles never
    /// pull fluid in with negative pressure.
    pub boundary_rho_floor: bool,
    pub dt_min: f64,
    pub dt_max: f64,
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            h: 0.02,
            dp: 0.01,
            n_subdiv: 1,
            rho0: 1000.0,
            c0: 20.0,
            gamma: 7.0,
            alpha: 0.25,
            gravity: [0.0, 0.0, -9.81],
            cfl: 0.2,
            domain_min: [0.0; 3],
            domain_max: [1.0; 3],
            verlet_corrector_stride: 40,
            boundary_rho_floor: true,
            dt_min: 1e-8,
            dt_max: 1e-3,
        }
    }
}

impl SimParams {
    /// Kernel support radius (`2h`), the maximum interaction distance.
    pub fn support(&self) -> f32 {
        2.0 * self.h
    }

    /// Returns the parameters unchanged if every invariant holds, otherwise
    /// the first violated one.
    pub fn validate(self) -> Result<Self> {
        fn bad(field: &'static str, msg: &str) -> Result<SimParams> {
            Err(Error::InvalidParam {
                field,
                reason: msg.to_string(),
            })
        }
        if !(self.h > 0.0) || !self.h.is_finite() {
            return bad("h", "h must be positive");
        }
        if !(self.dp > 0.0) || !self.dp.is_finite() {
            return bad("dp", "dp must be positive");
        }
        if self.n_subdiv < 1 {
            return bad("n_subdiv", "n_subdiv must be at least 1");
        }
        if !(self.rho0 > 0.0) {
            return bad("rho0", "rho0 must be positive");
        }
        if !(self.c0 > 0.0) {
            return bad("c0", "c0 must be positive");
        }
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return bad("cfl", "cfl in (0,1)");
        }
        if !(self.gamma >= 1.0) {
            return bad("gamma", "gamma must be >= 1");
        }
        if !(self.alpha >= 0.0) {
            return bad("alpha", "alpha must be >= 0");
        }
        if self.gravity.iter().any(|g| !g.is_finite()) {
            return bad("gravity", "gravity must be finite");
        }
        if (0..3).any(|d| !(self.domain_min[d] < self.domain_max[d])) {
            return bad("domain", "domain_min < domain_max componentwise");
        }
        if self.verlet_corrector_stride < 1 {
            return bad(
                "verlet_corrector_stride",
                "verlet_corrector_stride must be at least 1",
            );
        }
        if !(self.dt_min > 0.0 && self.dt_min <= self.dt_max) {
            return bad("dt_min", "0 < dt_min <= dt_max");
        }
        Ok(self)
    }
}

/// Counter split by interaction class. `fluid_boundary` lumps F-B and B-F.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairCounts {
    pub fluid_fluid: u64,
    pub fluid_boundary: u64,
}

impl PairCounts {
    pub fn total(&self) -> u64 {
        self.fluid_fluid + self.fluid_boundary
    }

    #[inline(always)]
    pub fn bump(&mut self, fluid_fluid: bool, by: u64) {
        if fluid_fluid {
            self.fluid_fluid += by;
        } else {
            self.fluid_boundary += by;
        }
    }
}

impl std::ops::AddAssign for PairCounts {
    fn add_assign(&mut self, rhs: Self) {
        self.fluid_fluid += rhs.fluid_fluid;
        self.fluid_boundary += rhs.fluid_boundary;
    }
}

/// Counters produced by one force computation.
///
/// `true_pairs` counts distinct unordered interacting pairs (B-B never
/// counted). `force_evals` counts pair evaluations: equal to `true_pairs`
/// when every pair is evaluated symmetrically, twice it when none is.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EngineCounters {
    /// Distance checks performed.
    pub candidate_pairs: PairCounts,
    pub true_pairs: PairCounts,
    pub force_evals: PairCounts,
    /// Modeled bytes read for neighbour data (40 or 32 per evaluation).
    pub neighbor_bytes: u64,
    /// Per-worker busy time (per slice for the Slices strategy).
    pub thread_seconds: Vec<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimes {
    /// Neighbour list: cell assignment, reorder, CellBeginEnd, ranges.
    pub nl: f64,
    /// Particle interaction: derived quantities plus force computation.
    pub pi: f64,
    /// System update: time step reduction plus integration.
    pub su: f64,
    /// Checks, stats and snapshot emission.
    pub bookkeeping: f64,
}

impl StageTimes {
    pub fn sum(&self) -> f64 {
        self.nl + self.pi + self.su + self.bookkeeping
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StepStats {
    pub step: u64,
    pub dt: f64,
    pub counters: EngineCounters,
    pub wall_seconds: f64,
    pub engine_tag: String,
    pub stages: StageTimes,
}

impl StepStats {
    pub fn candidate_pairs(&self) -> u64 {
        self.counters.candidate_pairs.total()
    }

    pub fn true_pairs(&self) -> u64 {
        self.counters.true_pairs.total()
    }

    pub fn force_evals(&self) -> u64 {
        self.counters.force_evals.total()
    }
}
