use crate::engines::ForceOutput;
use crate::error::{Error, Result};
use crate::model::{gather, DerivedQuantities, ParticleSystem, SimParams, Vec3};

/// Previous-step velocity and density for the two-step Verlet scheme.
#[derive(Clone, Debug, PartialEq)]
pub struct VerletState {
    pub prev_vel: Vec<Vec3>,
    pub prev_rho: Vec<f32>,
    /// Steps accepted so far.
    pub step: u64,
    pub corrector_stride: u32,
    /// Lower bound applied to boundary densities after each update.
    pub boundary_rho_min: f32,
}

impl VerletState {
    pub fn new(system: &ParticleSystem, corrector_stride: u32) -> Self {
        Self {
            prev_vel: system.vel.clone(),
            prev_rho: system.rho.clone(),
            step: 0,
            corrector_stride: corrector_stride.max(1),
            boundary_rho_min: f32::NEG_INFINITY,
        }
    }

    pub fn with_boundary_floor(mut self, rho_min: f32) -> Self {
        self.boundary_rho_min = rho_min;
        self
    }

    /// Applies the same new-to-old permutation the system went through.
    pub fn permute(&mut self, perm: &[usize]) {
        self.prev_vel = gather(&self.prev_vel, perm);
        self.prev_rho = gather(&self.prev_rho, perm);
    }

    /// The single-step form runs on step 0 and every `corrector_stride`
    /// steps after it.
    pub fn is_corrector_step(&self) -> bool {
        self.step % self.corrector_stride as u64 == 0
    }
}

/// Advances the system by `dt`. Fluid particles take the two-step form
/// `v' = v_prev + 2 dt a`, `rho' = rho_prev + 2 dt drho` (single-step
/// `v + dt a` on corrector steps) and `r' = r + dt v + dt^2 a / 2`, with
/// gravity added to `a`. Boundary particles only update density, floored
/// at `state.boundary_rho_min`.
pub fn verlet_update(
    system: &mut ParticleSystem,
    state: &mut VerletState,
    forces: &ForceOutput,
    dt: f64,
    gravity: Vec3,
) -> Result<()> {
    let n = system.len();
    if !(dt > 0.0) {
        return Err(Error::InvalidParam {
            field: "dt",
            reason: format!("time step must be positive, got {dt}"),
        });
    }
    if forces.accel.len() != n || forces.drho_dt.len() != n || state.prev_vel.len() != n || state.prev_rho.len() != n {
        return Err(Error::Inconsistent("integrator arrays differ in length".into()));
    }
    let single = state.is_corrector_step();
    let span = if single { dt } else { 2.0 * dt };
    for i in 0..n {
        let rho_from = if single { system.rho[i] } else { state.prev_rho[i] };
        let new_rho = rho_from as f64 + span * forces.drho_dt[i] as f64;
        state.prev_rho[i] = system.rho[i];
        system.rho[i] = new_rho as f32;
        if !system.is_fluid(i) {
            system.rho[i] = system.rho[i].max(state.boundary_rho_min);
            continue;
        }
        let v = system.vel[i];
        let from = if single { v } else { state.prev_vel[i] };
        let mut nv = [0.0f32; 3];
        let mut np = [0.0f32; 3];
        for d in 0..3 {
            let a = forces.accel[i][d] as f64 + gravity[d] as f64;
            nv[d] = (from[d] as f64 + span * a) as f32;
            np[d] = (system.pos[i][d] as f64 + dt * v[d] as f64 + 0.5 * dt * dt * a) as f32;
        }
        state.prev_vel[i] = v;
        system.vel[i] = nv;
        system.pos[i] = np;
    }
    state.step += 1;
    Ok(())
}

/// The two limits entering the time step, before the CFL factor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DtTerms {
    /// `min sqrt(h / |a + g|)` over fluid particles; zero if any
    /// acceleration is not finite.
    pub force: f64,
    /// `min h / (c + mu_max)` over all particles.
    pub acoustic: f64,
}

const REDUCE_CHUNK: usize = 4096;

/// Minimum of `f(i)` for `i < n`: per-chunk minima folded pairwise.
fn chunked_min(n: usize, f: impl Fn(usize) -> f64) -> f64 {
    let mut level: Vec<f64> = (0..n.div_ceil(REDUCE_CHUNK))
        .map(|c| {
            (c * REDUCE_CHUNK..((c + 1) * REDUCE_CHUNK).min(n))
                .map(&f)
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    while level.len() > 1 {
        level = level.chunks(2).map(|p| p.iter().copied().fold(f64::INFINITY, f64::min)).collect();
    }
    level.first().copied().unwrap_or(f64::INFINITY)
}

pub fn dt_terms(forces: &ForceOutput, system: &ParticleSystem, derived: &DerivedQuantities, params: &SimParams) -> DtTerms {
    let h = params.h as f64;
    let g = params.gravity;
    let nb = system.count_boundary;
    let force = chunked_min(system.count_fluid, |k| {
        let a = forces.accel[nb + k];
        let m2: f64 = (0..3).map(|d| (a[d] as f64 + g[d] as f64).powi(2)).sum();
        if !m2.is_finite() {
            return 0.0;
        }
        (h / m2.sqrt().max(f64::MIN_POSITIVE)).sqrt()
    });
    let acoustic = chunked_min(system.len(), |i| {
        h / (derived.csound[i] as f64 + forces.visc_mu[i] as f64).max(f64::MIN_POSITIVE)
    });
    DtTerms { force, acoustic }
}

/// `cfl * min(force, acoustic)` clamped to `[dt_min, dt_max]`.
pub fn compute_dt(forces: &ForceOutput, system: &ParticleSystem, derived: &DerivedQuantities, params: &SimParams) -> f64 {
    let t = dt_terms(forces, system, derived, params);
    let dt = params.cfl as f64 * t.force.min(t.acoustic);
    if dt.is_nan() {
        return params.dt_min;
    }
    dt.clamp(params.dt_min, params.dt_max)
}
