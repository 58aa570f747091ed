use std::cell::UnsafeCell;

use crate::error::{Error, Result};
use crate::model::Vec3;

/// Full-length double-precision accumulators.
#[derive(Clone, Debug, PartialEq)]
pub struct Accumulators {
    pub accel: Vec<[f64; 3]>,
    pub drho: Vec<f64>,
    pub visc: Vec<f32>,
}

impl Accumulators {
    pub fn zeros(n: usize) -> Self {
        Self {
            accel: vec![[0.0; 3]; n],
            drho: vec![0.0; n],
            visc: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.drho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.drho.is_empty()
    }

    /// Rounds to single precision. Boundary particles (`i < count_boundary`)
    /// get zero acceleration.
    pub fn finish(&self, count_boundary: usize) -> (Vec<Vec3>, Vec<f32>, Vec<f32>) {
        let accel = self
            .accel
            .iter()
            .enumerate()
            .map(|(i, a)| {
                if i < count_boundary {
                    [0.0; 3]
                } else {
                    [a[0] as f32, a[1] as f32, a[2] as f32]
                }
            })
            .collect();
        let drho = self.drho.iter().map(|&d| d as f32).collect();
        (accel, drho, self.visc.clone())
    }
}

/// Somewhere a one-particle contribution can be added.
pub(crate) trait AccTarget {
    fn add(&mut self, i: usize, accel: Vec3, drho: f32, visc: f32, fluid: bool);

    /// Adds a particle's locally accumulated sums.
    fn add_local(&mut self, i: usize, l: &Local, fluid: bool);
}

impl AccTarget for Accumulators {
    #[inline(always)]
    fn add(&mut self, i: usize, accel: Vec3, drho: f32, visc: f32, fluid: bool) {
        if fluid {
            let a = &mut self.accel[i];
            a[0] += accel[0] as f64;
            a[1] += accel[1] as f64;
            a[2] += accel[2] as f64;
        }
        self.drho[i] += drho as f64;
        if visc > self.visc[i] {
            self.visc[i] = visc;
        }
    }

    #[inline(always)]
    fn add_local(&mut self, i: usize, l: &Local, fluid: bool) {
        if fluid {
            let a = &mut self.accel[i];
            a[0] += l.accel[0];
            a[1] += l.accel[1];
            a[2] += l.accel[2];
        }
        self.drho[i] += l.drho;
        if l.visc > self.visc[i] {
            self.visc[i] = l.visc;
        }
    }
}

/// Accumulator for a single particle held in locals.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Local {
    pub accel: [f64; 3],
    pub drho: f64,
    pub visc: f32,
}

impl AccTarget for Local {
    #[inline(always)]
    fn add(&mut self, _i: usize, accel: Vec3, drho: f32, visc: f32, fluid: bool) {
        if fluid {
            self.accel[0] += accel[0] as f64;
            self.accel[1] += accel[1] as f64;
            self.accel[2] += accel[2] as f64;
        }
        self.drho += drho as f64;
        if visc > self.visc {
            self.visc = visc;
        }
    }

    fn add_local(&mut self, _i: usize, l: &Local, fluid: bool) {
        if fluid {
            self.accel[0] += l.accel[0];
            self.accel[1] += l.accel[1];
            self.accel[2] += l.accel[2];
        }
        self.drho += l.drho;
        self.visc = self.visc.max(l.visc);
    }
}

/// Accumulators written concurrently by several threads, each owning a
/// disjoint set of particle indices.
pub(crate) struct SharedAccumulators {
    accel: Vec<UnsafeCell<[f64; 3]>>,
    drho: Vec<UnsafeCell<f64>>,
    visc: Vec<UnsafeCell<f32>>,
}

// SAFETY: access goes through `SharedRef::add`, whose callers guarantee that
// no index is touched by two threads during one parallel section.
unsafe impl Sync for SharedAccumulators {}

impl SharedAccumulators {
    pub fn zeros(n: usize) -> Self {
        Self {
            accel: (0..n).map(|_| UnsafeCell::new([0.0; 3])).collect(),
            drho: (0..n).map(|_| UnsafeCell::new(0.0)).collect(),
            visc: (0..n).map(|_| UnsafeCell::new(0.0)).collect(),
        }
    }

    pub fn into_inner(self) -> Accumulators {
        Accumulators {
            accel: self.accel.into_iter().map(UnsafeCell::into_inner).collect(),
            drho: self.drho.into_iter().map(UnsafeCell::into_inner).collect(),
            visc: self.visc.into_iter().map(UnsafeCell::into_inner).collect(),
        }
    }

    /// # Safety
    /// During the lifetime of the returned handle, the caller's thread must
    /// be the only one adding to any index it adds to.
    pub unsafe fn handle(&self) -> SharedRef<'_> {
        SharedRef(self)
    }
}

pub(crate) struct SharedRef<'a>(&'a SharedAccumulators);

impl AccTarget for SharedRef<'_> {
    #[inline(always)]
    fn add(&mut self, i: usize, accel: Vec3, drho: f32, visc: f32, fluid: bool) {
        // SAFETY: exclusive per-index ownership is the contract of `handle`.
        unsafe {
            if fluid {
                let a = &mut *self.0.accel[i].get();
                a[0] += accel[0] as f64;
                a[1] += accel[1] as f64;
                a[2] += accel[2] as f64;
            }
            *self.0.drho[i].get() += drho as f64;
            let v = &mut *self.0.visc[i].get();
            if visc > *v {
                *v = visc;
            }
        }
    }

    #[inline(always)]
    fn add_local(&mut self, i: usize, l: &Local, fluid: bool) {
        // SAFETY: as in `add`.
        unsafe {
            if fluid {
                let a = &mut *self.0.accel[i].get();
                a[0] += l.accel[0];
                a[1] += l.accel[1];
                a[2] += l.accel[2];
            }
            *self.0.drho[i].get() += l.drho;
            let v = &mut *self.0.visc[i].get();
            if l.visc > *v {
                *v = l.visc;
            }
        }
    }
}

/// Elementwise sum of per-thread accumulators (max for `visc`), summed in
/// thread-index order so the result is deterministic. The index space is
/// split into `threads` chunks merged concurrently.
pub fn merge_accumulators(parts: &[Accumulators], threads: usize) -> Result<Accumulators> {
    let Some(first) = parts.first() else {
        return Err(Error::Inconsistent("no accumulators to merge".into()));
    };
    let n = first.len();
    if parts.iter().any(|p| p.len() != n || p.accel.len() != n || p.visc.len() != n) {
        return Err(Error::Inconsistent("accumulator lengths differ".into()));
    }
    let mut out = first.clone();
    if parts.len() == 1 || n == 0 {
        return Ok(out);
    }
    let chunk = n.div_ceil(threads.max(1));
    let merge_chunk = |start: usize, accel: &mut [[f64; 3]], drho: &mut [f64], visc: &mut [f32]| {
        for p in &parts[1..] {
            for k in 0..accel.len() {
                let i = start + k;
                accel[k][0] += p.accel[i][0];
                accel[k][1] += p.accel[i][1];
                accel[k][2] += p.accel[i][2];
                drho[k] += p.drho[i];
                if p.visc[i] > visc[k] {
                    visc[k] = p.visc[i];
                }
            }
        }
    };
    std::thread::scope(|s| {
        let Accumulators { accel, drho, visc } = &mut out;
        let iter = accel
            .chunks_mut(chunk)
            .zip(drho.chunks_mut(chunk))
            .zip(visc.chunks_mut(chunk))
            .enumerate();
        for (c, ((a, d), v)) in iter {
            let merge_chunk = &merge_chunk;
            s.spawn(move || merge_chunk(c * chunk, a, d, v));
        }
    });
    Ok(out)
}
