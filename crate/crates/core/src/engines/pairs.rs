use std::ops::Range;

use super::accum::AccTarget;
use crate::model::{dot, sub, DerivedQuantities, EngineCounters, PairCounts, ParticleSystem};
use crate::physics::{pair_interaction, pair_interaction_x4, DerivedMode, PairState, PhysicsConsts, LANES};

/// Raw counters of one traversal. `hits` is in ordered units: a symmetric
/// evaluation covers two, a one-sided one covers one.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Tally {
    pub cand: PairCounts,
    pub hits: PairCounts,
    pub evals: PairCounts,
}

impl Tally {
    pub fn add(&mut self, o: &Tally) {
        self.cand += o.cand;
        self.hits += o.hits;
        self.evals += o.evals;
    }

    pub fn into_counters(self, mode: DerivedMode, thread_seconds: Vec<f64>) -> EngineCounters {
        debug_assert!(self.hits.fluid_fluid % 2 == 0 && self.hits.fluid_boundary % 2 == 0);
        EngineCounters {
            candidate_pairs: self.cand,
            true_pairs: PairCounts {
                fluid_fluid: self.hits.fluid_fluid / 2,
                fluid_boundary: self.hits.fluid_boundary / 2,
            },
            force_evals: self.evals,
            neighbor_bytes: self.evals.total() * mode.bytes_per_neighbor(),
            thread_seconds,
        }
    }
}

/// Read-only view used by every traversal.
pub(crate) struct PairCtx<'a> {
    pub sys: &'a ParticleSystem,
    pub derived: &'a DerivedQuantities,
    pub k: &'a PhysicsConsts,
    pub mode: DerivedMode,
    pub lanes: usize,
}

impl PairCtx<'_> {
    #[inline(always)]
    pub fn load(&self, i: usize) -> PairState {
        PairState::load(self.sys, self.derived, i, self.mode, self.k)
    }

    /// Evaluates every pair `(i, j)`, `i` in `ir`, `j` in `jr`, lying inside
    /// the kernel support. With `intra`, `ir == jr` and only `j > i` is
    /// visited. `SYM` scatters to both particles; otherwise only `i`
    /// receives its side and `j == i` is skipped.
    ///
    /// With four lanes, found pairs are queued and evaluated four at a
    /// time; the remainder is flushed singly when the block ends.
    #[inline(always)]
    pub fn run<T: AccTarget, const SYM: bool>(
        &self,
        ir: Range<usize>,
        jr: Range<usize>,
        intra: bool,
        ff: bool,
        target: &mut T,
        tally: &mut Tally,
    ) {
        if ir.is_empty() || jr.is_empty() {
            return;
        }
        let pos = &self.sys.pos;
        let support_sq = self.k.support_sq;
        let mut cand = 0u64;
        let mut hits = 0u64;
        let mut queue_i = [0usize; LANES];
        let mut queue_j = [0usize; LANES];
        let mut queued = 0usize;
        for i in ir {
            let pi = pos[i];
            let state_i = self.load(i);
            let j0 = if intra { i + 1 } else { jr.start };
            for j in j0..jr.end {
                if !SYM && j == i {
                    continue;
                }
                cand += 1;
                let d = sub(pi, pos[j]);
                if dot(d, d) >= support_sq {
                    continue;
                }
                hits += 1;
                if self.lanes == LANES {
                    queue_i[queued] = i;
                    queue_j[queued] = j;
                    queued += 1;
                    if queued == LANES {
                        self.flush_lanes::<T, SYM>(&queue_i, &queue_j, target);
                        queued = 0;
                    }
                } else {
                    let c = pair_interaction(&state_i, &self.load(j), self.k);
                    self.scatter::<T, SYM>(i, j, &c, target);
                }
            }
        }
        for q in 0..queued {
            let (i, j) = (queue_i[q], queue_j[q]);
            let c = pair_interaction(&self.load(i), &self.load(j), self.k);
            self.scatter::<T, SYM>(i, j, &c, target);
        }
        let units = if SYM { 2 } else { 1 };
        tally.cand.bump(ff, cand);
        tally.hits.bump(ff, hits * units);
        tally.evals.bump(ff, hits);
    }

    #[inline(always)]
    fn flush_lanes<T: AccTarget, const SYM: bool>(&self, qi: &[usize; LANES], qj: &[usize; LANES], target: &mut T) {
        let a: [PairState; LANES] = std::array::from_fn(|l| self.load(qi[l]));
        let b: [PairState; LANES] = std::array::from_fn(|l| self.load(qj[l]));
        let out = pair_interaction_x4(&a, &b, self.k);
        for l in 0..LANES {
            self.scatter::<T, SYM>(qi[l], qj[l], &out[l], target);
        }
    }

    #[inline(always)]
    fn scatter<T: AccTarget, const SYM: bool>(
        &self,
        i: usize,
        j: usize,
        c: &crate::physics::PairContribution,
        target: &mut T,
    ) {
        target.add(i, c.accel_on_a, c.drho_dt_on_a, c.visc_mu, self.sys.is_fluid(i));
        if SYM {
            target.add(j, c.accel_on_b, c.drho_dt_on_b, c.visc_mu, self.sys.is_fluid(j));
        }
    }
}
