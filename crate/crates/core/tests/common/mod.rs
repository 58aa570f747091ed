//! Shared helpers for integration tests: an all-pairs double-precision
//! reference and dam-break frames.
#![allow(dead_code)]

use wcsph::engines::{EngineConfig, Threading};
use wcsph::model::{ParticleSystem, SimParams};
use wcsph::sim::{build_dam_break, Scenario, Simulation};

pub struct Reference {
    pub accel: Vec<[f64; 3]>,
    pub drho_dt: Vec<f64>,
    /// Unordered pairs within the support, split F-F / F-B.
    pub pairs_ff: u64,
    pub pairs_fb: u64,
}

fn w_and_fac(r: f64, h: f64) -> (f64, f64) {
    let q = r / h;
    let norm = 1.0 / (std::f64::consts::PI * h.powi(3));
    if q < 1.0 {
        let w = norm * (1.0 - 1.5 * q * q + 0.75 * q.powi(3));
        let dw = norm / h * (-3.0 * q + 2.25 * q * q);
        (w, if r > 0.0 { dw / r } else { norm / (h * h) * -3.0 })
    } else if q < 2.0 {
        let w = norm * 0.25 * (2.0 - q).powi(3);
        let dw = -0.75 * norm / h * (2.0 - q).powi(2);
        (w, dw / r)
    } else {
        (0.0, 0.0)
    }
}

/// Every unordered pair except boundary-boundary, in f64, written from the
/// formulas without touching the library's pair code.
pub fn brute_force(sys: &ParticleSystem, p: &SimParams) -> Reference {
    let n = sys.len();
    let h = p.h as f64;
    let rho0 = p.rho0 as f64;
    let gamma = p.gamma as f64;
    let b = (p.c0 as f64).powi(2) * rho0 / gamma;
    let press: Vec<f64> = sys.rho.iter().map(|&r| b * ((r as f64 / rho0).powf(gamma) - 1.0)).collect();
    let cs: Vec<f64> = sys
        .rho
        .iter()
        .map(|&r| p.c0 as f64 * (r as f64 / rho0).powf((gamma - 1.0) / 2.0))
        .collect();
    let tens: Vec<f64> = (0..n)
        .map(|i| {
            let r2 = (sys.rho[i] as f64).powi(2);
            if press[i] > 0.0 {
                0.01 * press[i] / r2
            } else {
                -0.2 * press[i] / r2
            }
        })
        .collect();
    let w_dp = w_and_fac(p.dp as f64, h).0;
    let support_sq = 4.0 * p.h * p.h;
    let mut out = Reference {
        accel: vec![[0.0; 3]; n],
        drho_dt: vec![0.0; n],
        pairs_ff: 0,
        pairs_fb: 0,
    };
    for i in 0..n {
        for j in i + 1..n {
            let (fi, fj) = (sys.is_fluid(i), sys.is_fluid(j));
            if !fi && !fj {
                continue;
            }
            // Same single-precision support test as the engines.
            let d32: [f32; 3] = std::array::from_fn(|c| sys.pos[i][c] - sys.pos[j][c]);
            if d32[0] * d32[0] + d32[1] * d32[1] + d32[2] * d32[2] >= support_sq {
                continue;
            }
            if fi && fj {
                out.pairs_ff += 1;
            } else {
                out.pairs_fb += 1;
            }
            let dr: [f64; 3] = std::array::from_fn(|c| sys.pos[i][c] as f64 - sys.pos[j][c] as f64);
            let dv: [f64; 3] = std::array::from_fn(|c| sys.vel[i][c] as f64 - sys.vel[j][c] as f64);
            let r2 = dr.iter().map(|x| x * x).sum::<f64>();
            let (w, fac) = w_and_fac(r2.sqrt(), h);
            let rv = (0..3).map(|c| dr[c] * dv[c]).sum::<f64>();
            let (ri, rj) = (sys.rho[i] as f64, sys.rho[j] as f64);
            let visc = if rv < 0.0 {
                let mu = h * rv / (r2 + 0.01 * h * h);
                -(p.alpha as f64) * 0.5 * (cs[i] + cs[j]) * mu / (0.5 * (ri + rj))
            } else {
                0.0
            };
            let t = (tens[i] + tens[j]) * (w / w_dp).powi(4);
            let f = press[i] / (ri * ri) + press[j] / (rj * rj) + visc + t;
            let (mi, mj) = (sys.mass(i) as f64, sys.mass(j) as f64);
            for c in 0..3 {
                let g = fac * dr[c];
                out.accel[i][c] -= mj * f * g;
                out.accel[j][c] += mi * f * g;
            }
            out.drho_dt[i] += mj * fac * rv;
            out.drho_dt[j] += mi * fac * rv;
        }
    }
    for i in sys.boundary_range() {
        out.accel[i] = [0.0; 3];
    }
    out
}

/// Largest difference over the largest reference magnitude.
pub fn rel_linf<T: Copy + Into<f64>>(got: &[T], want: &[f64]) -> f64 {
    assert_eq!(got.len(), want.len());
    let scale = want.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let diff = got
        .iter()
        .zip(want)
        .fold(0.0f64, |m, (g, w)| m.max(((*g).into() - w).abs()));
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

pub fn flatten3<T: Copy>(v: &[[T; 3]]) -> Vec<T> {
    v.iter().flat_map(|a| a.iter().copied()).collect()
}

/// The desk dam break at `dp = 0.01` (about 5,400 particles) after
/// `steps` steps, so velocities and densities are no longer uniform.
pub fn dam_break_frame(steps: u64) -> (ParticleSystem, SimParams) {
    let scenario = Scenario::dam_break(0.01);
    let params = scenario.params(2.0);
    let sys = build_dam_break(&scenario, &params).unwrap();
    let mut sim = Simulation::new(sys, params.clone(), EngineConfig::cellpairs(true, 1, Threading::Single, 1)).unwrap();
    for _ in 0..steps {
        sim.step().unwrap();
    }
    (sim.system().clone(), params)
}

/// A small dam break (about 1,700 particles) for quicker checks.
pub fn small_frame(steps: u64) -> (ParticleSystem, SimParams) {
    let scenario = Scenario {
        tank_max: [0.2, 0.06, 0.2],
        fill_max: [0.085, 0.055, 0.125],
        ..Scenario::dam_break(0.01)
    };
    let params = scenario.params(2.0);
    let sys = build_dam_break(&scenario, &params).unwrap();
    let mut sim = Simulation::new(sys, params.clone(), EngineConfig::cellpairs(true, 1, Threading::Single, 1)).unwrap();
    for _ in 0..steps {
        sim.step().unwrap();
    }
    (sim.system().clone(), params)
}

/// Every engine configuration: cell pairs over symmetry, lanes and
/// threading (Asymmetric only without symmetry, Symmetric only with it),
/// and the three gather variants.
pub fn all_configs(threads: usize) -> Vec<EngineConfig> {
    use wcsph::engines::GatherVariant;
    let mut out = Vec::new();
    for sym in [false, true] {
        for lanes in [1, 4] {
            for th in [Threading::Single, Threading::Asymmetric, Threading::Symmetric, Threading::Slices] {
                if (th == Threading::Asymmetric && sym) || (th == Threading::Symmetric && !sym) {
                    continue;
                }
                let k = if th == Threading::Single { 1 } else { threads };
                out.push(EngineConfig::cellpairs(sym, lanes, th, k));
            }
        }
    }
    for v in [GatherVariant::FastCellsHalf, GatherVariant::SlowCellsHalf, GatherVariant::SlowCellsH] {
        out.push(EngineConfig::gather(v, threads));
    }
    out
}
