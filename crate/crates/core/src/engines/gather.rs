//! Gather traversal: one work item per particle, reading whole X rows of
//! neighbour cells and writing only its own outputs.

use std::time::Instant;

use super::accum::Local;
use super::pairs::{PairCtx, Tally};
use super::{EngineConfig, ForceInput, ForceOutput, InteractionSet};
use crate::error::{Error, Result};
use crate::grid::{row_range, CellBeginEnd, CellGrid, InteractionRanges};
use crate::model::Vec3;

#[derive(Clone, Copy)]
enum Rows<'a> {
    Precomputed(&'a InteractionRanges),
    OnTheFly,
}

struct Gather<'a> {
    ctx: PairCtx<'a>,
    grid: &'a CellGrid,
    fluid: &'a CellBeginEnd,
    boundary: &'a CellBeginEnd,
    rows: Rows<'a>,
    with_boundary: bool,
}

impl Gather<'_> {
    /// Calls `f(fluid_row, boundary_row)` for each neighbour row of `cell`.
    #[inline(always)]
    fn for_rows(&self, cell: usize, mut f: impl FnMut([u32; 2], [u32; 2])) {
        match self.rows {
            Rows::Precomputed(r) => {
                for rp in r.of_cell(cell) {
                    f(rp.fluid, rp.boundary);
                }
            }
            Rows::OnTheFly => {
                let dims = self.grid.dims;
                let n = self.grid.n_subdiv as usize;
                let [cx, cy, cz] = self.grid.coords(cell);
                let (x0, x1) = (cx.saturating_sub(n), (cx + n).min(dims[0] - 1));
                for z in cz.saturating_sub(n)..=(cz + n).min(dims[2] - 1) {
                    for y in cy.saturating_sub(n)..=(cy + n).min(dims[1] - 1) {
                        f(
                            row_range(self.fluid, dims, x0, x1, y, z),
                            row_range(self.boundary, dims, x0, x1, y, z),
                        );
                    }
                }
            }
        }
    }

    fn fluid_particle(&self, i: usize, tally: &mut Tally) -> Local {
        let mut local = Local::default();
        let cell = self.grid.cell_of[i] as usize;
        self.for_rows(cell, |fr, br| {
            let ir = i..i + 1;
            self.ctx
                .run::<Local, false>(ir.clone(), span(fr), false, true, &mut local, tally);
            if self.with_boundary {
                self.ctx.run::<Local, false>(ir, span(br), false, false, &mut local, tally);
            }
        });
        local
    }

    fn boundary_particle(&self, i: usize, tally: &mut Tally) -> Local {
        let mut local = Local::default();
        let cell = self.grid.cell_of[i] as usize;
        self.for_rows(cell, |fr, _| {
            self.ctx
                .run::<Local, false>(i..i + 1, span(fr), false, false, &mut local, tally);
        });
        local
    }
}

#[inline(always)]
fn span(r: [u32; 2]) -> std::ops::Range<usize> {
    r[0] as usize..r[1] as usize
}

/// Runs `work` for every index of `first..first + out.len()`, statically
/// chunked over `threads` threads.
fn chunked<F>(first: usize, out: &mut [Local], threads: usize, work: F) -> (Tally, Vec<f64>)
where
    F: Fn(usize, &mut Tally) -> Local + Sync,
{
    if out.is_empty() {
        return (Tally::default(), vec![0.0; threads]);
    }
    let chunk = out.len().div_ceil(threads);
    let results: Vec<(Tally, f64)> = std::thread::scope(|s| {
        let workers: Vec<_> = out
            .chunks_mut(chunk)
            .enumerate()
            .map(|(c, part)| {
                let work = &work;
                s.spawn(move || {
                    let t0 = Instant::now();
                    let mut tally = Tally::default();
                    for (k, slot) in part.iter_mut().enumerate() {
                        *slot = work(first + c * chunk + k, &mut tally);
                    }
                    (tally, t0.elapsed().as_secs_f64())
                })
            })
            .collect();
        workers.into_iter().map(|w| w.join().expect("worker panicked")).collect()
    });
    let mut tally = Tally::default();
    let mut secs = vec![0.0; threads];
    for (t, (tl, s)) in results.iter().enumerate() {
        tally.add(tl);
        secs[t] = *s;
    }
    (tally, secs)
}

/// Gather force computation: a fused fluid pass (F-F and F-B) and a
/// boundary pass (B-F, density rate only).
pub fn compute_forces_gather(input: ForceInput<'_>, config: &EngineConfig) -> Result<ForceOutput> {
    input.check()?;
    let config = config.clone().validate()?;
    let variant = config.gather_variant;
    if input.grid.n_subdiv != variant.n_subdiv() {
        return Err(Error::InvalidConfig(format!(
            "gather variant {variant:?} needs cells subdivided by {}, grid has {}",
            variant.n_subdiv(),
            input.grid.n_subdiv
        )));
    }
    let rows = if variant.needs_ranges() {
        match input.ranges {
            Some(r) if r.n_subdiv == variant.n_subdiv() && r.per_cell * input.grid.ncells() == r.ranges.len() => {
                Rows::Precomputed(r)
            }
            Some(_) => return Err(Error::Inconsistent("interaction ranges do not match grid".into())),
            None => {
                return Err(Error::InvalidConfig(format!(
                    "gather variant {variant:?} needs precomputed interaction ranges"
                )))
            }
        }
    } else {
        Rows::OnTheFly
    };
    let sys = input.system;
    let g = Gather {
        ctx: PairCtx {
            sys,
            derived: input.derived,
            k: input.consts,
            mode: config.derived_mode,
            lanes: config.lane_batch,
        },
        grid: input.grid,
        fluid: &input.lists.fluid,
        boundary: &input.lists.boundary,
        rows,
        with_boundary: config.interactions == InteractionSet::All,
    };
    let threads = config.thread_count;
    let nb = sys.count_boundary;
    let n = sys.len();

    let mut locals = vec![Local::default(); n];
    let (fluid_part, boundary_part) = {
        let (b, f) = locals.split_at_mut(nb);
        (f, b)
    };
    let (mut tally, mut secs) = chunked(nb, fluid_part, threads, |i, t| g.fluid_particle(i, t));
    if g.with_boundary {
        let (t2, s2) = chunked(0, boundary_part, threads, |i, t| g.boundary_particle(i, t));
        tally.add(&t2);
        secs.iter_mut().zip(s2).for_each(|(a, b)| *a += b);
    }

    let mut accel: Vec<Vec3> = vec![[0.0; 3]; n];
    let mut drho_dt = vec![0.0f32; n];
    let mut visc_mu = vec![0.0f32; n];
    for (i, l) in locals.iter().enumerate() {
        if i >= nb {
            accel[i] = [l.accel[0] as f32, l.accel[1] as f32, l.accel[2] as f32];
        }
        drho_dt[i] = l.drho as f32;
        visc_mu[i] = l.visc;
    }
    Ok(ForceOutput {
        accel,
        drho_dt,
        visc_mu,
        counters: tally.into_counters(config.derived_mode, secs),
    })
}
