//! Cell-pair traversal: the cell is the unit of work.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use super::accum::{AccTarget, Accumulators, Local, SharedAccumulators};
use super::pairs::{PairCtx, Tally};
use super::slices::{even_slices, rebalance_slices};
use super::{merge_accumulators, EngineConfig, ForceInput, ForceOutput, InteractionSet, Threading};
use crate::error::Result;
use crate::grid::{forward_offsets, full_offsets, offset_cell, CellGrid, CellLists};

struct Cells<'a> {
    grid: &'a CellGrid,
    lists: &'a CellLists,
    forward: Vec<[i32; 3]>,
    /// Full stencil without the origin.
    around: Vec<[i32; 3]>,
    with_boundary: bool,
}

impl Cells<'_> {
    /// Symmetric work of cell `c`: its internal pairs plus every pair with
    /// forward cells accepted by `keep` (given the neighbour's X index).
    #[inline(always)]
    fn symmetric<T: AccTarget>(
        &self,
        ctx: &PairCtx<'_>,
        c: usize,
        keep: impl Fn(usize) -> bool,
        target: &mut T,
        tally: &mut Tally,
    ) {
        let fr = self.lists.fluid.get(c);
        let br = self.lists.boundary.get(c);
        if fr.is_empty() && br.is_empty() {
            return;
        }
        ctx.run::<T, true>(fr.clone(), fr.clone(), true, true, target, tally);
        if self.with_boundary {
            ctx.run::<T, true>(fr.clone(), br.clone(), false, false, target, tally);
        }
        let cc = self.grid.coords(c);
        for &off in &self.forward {
            let Some(nc) = offset_cell(cc, off, self.grid.dims) else {
                continue;
            };
            if !keep(nc[0]) {
                continue;
            }
            let c2 = self.grid.linear(nc);
            let f2 = self.lists.fluid.get(c2);
            ctx.run::<T, true>(fr.clone(), f2.clone(), false, true, target, tally);
            if self.with_boundary {
                let b2 = self.lists.boundary.get(c2);
                ctx.run::<T, true>(fr.clone(), b2, false, false, target, tally);
                ctx.run::<T, true>(br.clone(), f2, false, false, target, tally);
            }
        }
    }

    /// One-sided work of cell `c`: each of its particles scans the full
    /// stencil and receives only its own side.
    #[inline(always)]
    fn one_sided<T: AccTarget>(&self, ctx: &PairCtx<'_>, c: usize, target: &mut T, tally: &mut Tally) {
        let fr = self.lists.fluid.get(c);
        let br = if self.with_boundary {
            self.lists.boundary.get(c)
        } else {
            0..0
        };
        if fr.is_empty() && br.is_empty() {
            return;
        }
        let cc = self.grid.coords(c);
        for i in br.chain(fr) {
            let fluid = ctx.sys.is_fluid(i);
            let mut local = Local::default();
            for off in std::iter::once([0, 0, 0]).chain(self.around.iter().copied()) {
                let Some(nc) = offset_cell(cc, off, self.grid.dims) else {
                    continue;
                };
                let c2 = self.grid.linear(nc);
                ctx.run::<Local, false>(i..i + 1, self.lists.fluid.get(c2), false, fluid, &mut local, tally);
                if fluid && self.with_boundary {
                    ctx.run::<Local, false>(i..i + 1, self.lists.boundary.get(c2), false, false, &mut local, tally);
                }
            }
            target.add_local(i, &local, fluid);
        }
    }

    /// Cross-slice work of cell `c`: pairs with cells outside `[x0, x1)`,
    /// applied only to this cell's particles.
    fn cross_slice<T: AccTarget>(
        &self,
        ctx: &PairCtx<'_>,
        c: usize,
        x0: usize,
        x1: usize,
        target: &mut T,
        tally: &mut Tally,
    ) {
        let fr = self.lists.fluid.get(c);
        let br = self.lists.boundary.get(c);
        if fr.is_empty() && br.is_empty() {
            return;
        }
        let cc = self.grid.coords(c);
        for &off in &self.around {
            let Some(nc) = offset_cell(cc, off, self.grid.dims) else {
                continue;
            };
            if (x0..x1).contains(&nc[0]) {
                continue;
            }
            let c2 = self.grid.linear(nc);
            let f2 = self.lists.fluid.get(c2);
            ctx.run::<T, false>(fr.clone(), f2.clone(), false, true, target, tally);
            if self.with_boundary {
                ctx.run::<T, false>(fr.clone(), self.lists.boundary.get(c2), false, false, target, tally);
                ctx.run::<T, false>(br.clone(), f2, false, false, target, tally);
            }
        }
    }
}

/// Cell-pair force computation.
///
/// `slice_bounds` carries the Slices strategy's X-axis slab bounds between
/// calls; it is (re)initialised to an even split when absent or stale and
/// rebalanced from this call's measured per-slice times.
pub fn compute_forces_cellpairs(
    input: ForceInput<'_>,
    config: &EngineConfig,
    slice_bounds: &mut Option<Vec<usize>>,
) -> Result<ForceOutput> {
    input.check()?;
    let config = config.clone().validate()?;
    let sys = input.system;
    let n = sys.len();
    let reach = input.grid.n_subdiv.max(1);
    let cells = Cells {
        grid: input.grid,
        lists: input.lists,
        forward: forward_offsets(reach),
        around: full_offsets(reach).into_iter().filter(|o| *o != [0, 0, 0]).collect(),
        with_boundary: config.interactions == InteractionSet::All,
    };
    let ctx = PairCtx {
        sys,
        derived: input.derived,
        k: input.consts,
        mode: config.derived_mode,
        lanes: config.lane_batch,
    };
    let ncells = input.grid.ncells();
    let threads = config.thread_count;
    let block = config.block_of_cells;
    let nblocks = ncells.div_ceil(block);
    let block_cells = |b: usize| b * block..((b + 1) * block).min(ncells);

    let (acc, tally, thread_seconds) = match config.threading {
        Threading::Single => {
            let t0 = Instant::now();
            let mut acc = Accumulators::zeros(n);
            let mut tally = Tally::default();
            for c in 0..ncells {
                if config.symmetry {
                    cells.symmetric(&ctx, c, |_| true, &mut acc, &mut tally);
                } else {
                    cells.one_sided(&ctx, c, &mut acc, &mut tally);
                }
            }
            (acc, tally, vec![t0.elapsed().as_secs_f64()])
        }
        Threading::Asymmetric => {
            let shared = SharedAccumulators::zeros(n);
            let next = AtomicUsize::new(0);
            let results: Vec<(Tally, f64)> = std::thread::scope(|s| {
                let workers: Vec<_> = (0..threads)
                    .map(|_| {
                        s.spawn(|| {
                            let t0 = Instant::now();
                            let mut tally = Tally::default();
                            // SAFETY: a block is claimed by exactly one thread and
                            // one-sided work only writes particles of its own cells.
                            let mut target = unsafe { shared.handle() };
                            loop {
                                let b = next.fetch_add(1, Ordering::Relaxed);
                                if b >= nblocks {
                                    break;
                                }
                                for c in block_cells(b) {
                                    cells.one_sided(&ctx, c, &mut target, &mut tally);
                                }
                            }
                            (tally, t0.elapsed().as_secs_f64())
                        })
                    })
                    .collect();
                workers.into_iter().map(|w| w.join().expect("worker panicked")).collect()
            });
            let mut tally = Tally::default();
            results.iter().for_each(|(t, _)| tally.add(t));
            (shared.into_inner(), tally, results.iter().map(|r| r.1).collect())
        }
        Threading::Symmetric => {
            let results: Vec<(Accumulators, Tally, f64)> = std::thread::scope(|s| {
                let workers: Vec<_> = (0..threads)
                    .map(|t| {
                        let cells = &cells;
                        let ctx = &ctx;
                        s.spawn(move || {
                            let t0 = Instant::now();
                            let mut acc = Accumulators::zeros(n);
                            let mut tally = Tally::default();
                            for b in (t..nblocks).step_by(threads) {
                                for c in block_cells(b) {
                                    cells.symmetric(ctx, c, |_| true, &mut acc, &mut tally);
                                }
                            }
                            (acc, tally, t0.elapsed().as_secs_f64())
                        })
                    })
                    .collect();
                workers.into_iter().map(|w| w.join().expect("worker panicked")).collect()
            });
            let mut tally = Tally::default();
            results.iter().for_each(|r| tally.add(&r.1));
            let secs = results.iter().map(|r| r.2).collect();
            let parts: Vec<Accumulators> = results.into_iter().map(|r| r.0).collect();
            (merge_accumulators(&parts, threads)?, tally, secs)
        }
        Threading::Slices => {
            let nx = input.grid.dims[0];
            let nslices = threads.min(nx);
            let bounds = match slice_bounds.take() {
                Some(b) if b.len() == nslices + 1 && b.last() == Some(&nx) => b,
                _ => even_slices(nx, nslices)?,
            };
            let shared = SharedAccumulators::zeros(n);
            let next = AtomicUsize::new(0);
            let (dx, dy, dz) = (input.grid.dims[0], input.grid.dims[1], input.grid.dims[2]);
            let results: Vec<Vec<(usize, Tally, f64)>> = std::thread::scope(|s| {
                let workers: Vec<_> = (0..nslices)
                    .map(|_| {
                        s.spawn(|| {
                            let mut done = Vec::new();
                            // SAFETY: a slice is claimed by exactly one thread and
                            // all writes target particles of that slice's cells.
                            let mut target = unsafe { shared.handle() };
                            loop {
                                let sl = next.fetch_add(1, Ordering::Relaxed);
                                if sl >= nslices {
                                    break;
                                }
                                let (x0, x1) = (bounds[sl], bounds[sl + 1]);
                                let t0 = Instant::now();
                                let mut tally = Tally::default();
                                for z in 0..dz {
                                    for y in 0..dy {
                                        for x in x0..x1 {
                                            let c = x + dx * (y + dy * z);
                                            if config.symmetry {
                                                let inside = |nx: usize| (x0..x1).contains(&nx);
                                                cells.symmetric(&ctx, c, inside, &mut target, &mut tally);
                                                cells.cross_slice(&ctx, c, x0, x1, &mut target, &mut tally);
                                            } else {
                                                cells.one_sided(&ctx, c, &mut target, &mut tally);
                                            }
                                        }
                                    }
                                }
                                done.push((sl, tally, t0.elapsed().as_secs_f64()));
                            }
                            done
                        })
                    })
                    .collect();
                workers.into_iter().map(|w| w.join().expect("worker panicked")).collect()
            });
            let mut per_slice = vec![0.0; nslices];
            let mut tally = Tally::default();
            for (sl, t, secs) in results.into_iter().flatten() {
                tally.add(&t);
                per_slice[sl] = secs;
            }
            let times: Vec<f64> = per_slice.iter().map(|t| t.max(1e-9)).collect();
            *slice_bounds = Some(rebalance_slices(&bounds, &times)?);
            (shared.into_inner(), tally, per_slice)
        }
    };

    let (accel, drho_dt, visc_mu) = acc.finish(sys.count_boundary);
    Ok(ForceOutput {
        accel,
        drho_dt,
        visc_mu,
        counters: tally.into_counters(config.derived_mode, thread_seconds),
    })
}
