use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ParticleKind, ParticleSystem, SimParams, Vec3};

/// Dam-break geometry: an open-topped tank and the box of water inside it.
///
/// Fluid particles sit at the centres of the `dp`-cubes tiling the fill box,
/// so a fill box of side `L` holds `round(L / dp)` particles per axis. The
/// tank is tiled by one layer of boundary particles on its floor and four
/// walls, on the lattice `tank_min + i dp`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub tank_min: Vec3,
    pub tank_max: Vec3,
    pub fill_min: Vec3,
    pub fill_max: Vec3,
    pub dp: f32,
    /// Start from hydrostatic density instead of uniform `rho0`.
    pub hydrostatic: bool,
}

impl Scenario {
    /// Tank 0.3 x 0.1 x 0.3 m with a 0.12 m wide, 0.25 m tall column against
    /// the `x = 0` wall. At `dp = 0.01` this is 2,700 fluid and 2,741
    /// boundary particles.
    pub fn dam_break(dp: f32) -> Self {
        let tank_max = [0.3, 0.1, 0.3];
        let half = 0.5 * dp;
        Self {
            tank_min: [0.0; 3],
            tank_max,
            fill_min: [half; 3],
            fill_max: [0.12 + half, tank_max[1] - half, 0.25 + half],
            dp,
            hydrostatic: true,
        }
    }

    /// Water at rest filling the whole footprint of a tank to `depth`.
    pub fn resting_column(dp: f32, tank: Vec3, depth: f32) -> Self {
        let half = 0.5 * dp;
        Self {
            tank_min: [0.0; 3],
            tank_max: tank,
            fill_min: [half; 3],
            fill_max: [tank[0] - half, tank[1] - half, depth + half],
            dp,
            hydrostatic: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dp > 0.0 && self.dp.is_finite()) {
            return Err(Error::InvalidParam {
                field: "dp",
                reason: "dp must be positive".into(),
            });
        }
        for d in 0..3 {
            if !(self.tank_min[d] < self.fill_min[d]
                && self.fill_min[d] < self.fill_max[d]
                && self.fill_max[d] < self.tank_max[d])
            {
                return Err(Error::InvalidParam {
                    field: "fill",
                    reason: "fill box must lie strictly inside the tank".into(),
                });
            }
        }
        let [f, t] = [self.fluid_dims(), self.tank_dims()];
        if f.contains(&0) || t.iter().any(|&n| n < 2) {
            return Err(Error::InvalidParam {
                field: "dp",
                reason: format!("dp = {} is larger than a box dimension", self.dp),
            });
        }
        Ok(())
    }

    /// Fluid particles per axis.
    pub fn fluid_dims(&self) -> [usize; 3] {
        std::array::from_fn(|d| lattice_steps(self.fill_max[d] - self.fill_min[d], self.dp))
    }

    /// Boundary lattice points per axis, both faces included.
    pub fn tank_dims(&self) -> [usize; 3] {
        std::array::from_fn(|d| lattice_steps(self.tank_max[d] - self.tank_min[d], self.dp) + 1)
    }

    pub fn fluid_count(&self) -> usize {
        self.fluid_dims().iter().product()
    }

    /// Lattice points on the floor and the four walls.
    pub fn boundary_count(&self) -> usize {
        let [nx, ny, nz] = self.tank_dims();
        nx * ny * nz - (nx - 2) * (ny - 2) * (nz - 1)
    }

    /// Height of the water column.
    pub fn depth(&self) -> f32 {
        self.fill_max[2] - self.tank_min[2]
    }

    /// Parameters for this scenario: `h = hdp * dp`, `c0 = 10 sqrt(g H)`,
    /// and a domain that adds one support radius around the tank plus one
    /// tank height above it.
    pub fn params(&self, hdp: f32) -> SimParams {
        let base = SimParams::default();
        let g = base.gravity[2].abs();
        let h = hdp * self.dp;
        let margin = 2.0 * h;
        let height = self.tank_max[2] - self.tank_min[2];
        SimParams {
            h,
            dp: self.dp,
            c0: 10.0 * (g * self.depth()).sqrt(),
            domain_min: std::array::from_fn(|d| self.tank_min[d] - margin),
            domain_max: [
                self.tank_max[0] + margin,
                self.tank_max[1] + margin,
                self.tank_max[2] + height + margin,
            ],
            ..base
        }
    }
}

fn lattice_steps(len: f32, dp: f32) -> usize {
    let n = (len as f64 / dp as f64).round();
    if n.is_finite() && n > 0.0 {
        n as usize
    } else {
        0
    }
}

/// Builds the initial particle system, ordered by lattice index (X fastest)
/// within each list. Fluid and boundary particles both have mass
/// `rho0 dp^3`.
pub fn build_dam_break(scenario: &Scenario, params: &SimParams) -> Result<ParticleSystem> {
    scenario.validate()?;
    let dp = scenario.dp;
    let [fx, fy, fz] = scenario.fluid_dims();
    let mut fluid = Vec::with_capacity(fx * fy * fz);
    for k in 0..fz {
        for j in 0..fy {
            for i in 0..fx {
                fluid.push(lattice_point(scenario.fill_min, [i, j, k], dp, 0.5));
            }
        }
    }
    let [nx, ny, nz] = scenario.tank_dims();
    let mut boundary = Vec::with_capacity(scenario.boundary_count());
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let wall = i == 0 || i == nx - 1 || j == 0 || j == ny - 1 || k == 0;
                if wall {
                    boundary.push(lattice_point(scenario.tank_min, [i, j, k], dp, 0.0));
                }
            }
        }
    }
    let vel = vec![[0.0; 3]; fluid.len()];
    let mass = (params.rho0 as f64 * (dp as f64).powi(3)) as f32;
    let rho = |kind: ParticleKind, p: Vec3| initial_density(scenario, params, kind, p);
    Ok(ParticleSystem::from_parts(boundary, fluid, vel, rho, mass, mass))
}

fn lattice_point(origin: Vec3, idx: [usize; 3], dp: f32, shift: f64) -> Vec3 {
    std::array::from_fn(|d| (origin[d] as f64 + (idx[d] as f64 + shift) * dp as f64) as f32)
}

/// `rho0 (1 + rho0 g d / B)^(1/gamma)` at depth `d` below the free surface.
/// Boundary particles outside the column's footprint get `rho0`.
fn initial_density(s: &Scenario, p: &SimParams, kind: ParticleKind, x: Vec3) -> f32 {
    if !s.hydrostatic {
        return p.rho0;
    }
    let reach = s.dp as f64;
    let under = (0..2).all(|d| {
        (x[d] as f64) > s.fill_min[d] as f64 - reach && (x[d] as f64) < s.fill_max[d] as f64 + reach
    });
    if kind == ParticleKind::Boundary && !under {
        return p.rho0;
    }
    let depth = (s.fill_max[2] as f64 - x[2] as f64).max(0.0);
    let rho0 = p.rho0 as f64;
    let gamma = p.gamma as f64;
    let b = (p.c0 as f64).powi(2) * rho0 / gamma;
    let g = p.gravity[2].abs() as f64;
    (rho0 * (1.0 + rho0 * g * depth / b).powf(1.0 / gamma)) as f32
}
