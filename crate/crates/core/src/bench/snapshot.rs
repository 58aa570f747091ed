use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{ParticleKind, ParticleSystem, Vec3};
use crate::physics::{pressure, PhysicsConsts};

pub const SNAPSHOT_HEADER: &str = "id,type,x,y,z,vx,vy,vz,rho,press";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SnapshotRow {
    pub id: u32,
    pub kind: ParticleKind,
    pub pos: Vec3,
    pub vel: Vec3,
    pub rho: f32,
    pub press: f32,
}

/// Particle state at one instant, one row per particle in system order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Snapshot {
    pub rows: Vec<SnapshotRow>,
}

fn kind_name(k: ParticleKind) -> &'static str {
    match k {
        ParticleKind::Fluid => "fluid",
        ParticleKind::Boundary => "boundary",
    }
}

impl Snapshot {
    pub fn from_system(system: &ParticleSystem, consts: &PhysicsConsts) -> Self {
        let rows = (0..system.len())
            .map(|i| SnapshotRow {
                id: system.id[i],
                kind: system.ptype[i],
                pos: system.pos[i],
                vel: system.vel[i],
                rho: system.rho[i],
                press: pressure(system.rho[i], consts),
            })
            .collect();
        Self { rows }
    }

    /// Rebuilds a system, boundary rows first, each list in file order.
    pub fn to_system(&self, mass_boundary: f32, mass_fluid: f32) -> ParticleSystem {
        let mut rows: Vec<&SnapshotRow> = self.rows.iter().filter(|r| r.kind == ParticleKind::Boundary).collect();
        let nb = rows.len();
        rows.extend(self.rows.iter().filter(|r| r.kind == ParticleKind::Fluid));
        ParticleSystem {
            count_boundary: nb,
            count_fluid: rows.len() - nb,
            pos: rows.iter().map(|r| r.pos).collect(),
            vel: rows.iter().map(|r| r.vel).collect(),
            rho: rows.iter().map(|r| r.rho).collect(),
            ptype: rows.iter().map(|r| r.kind).collect(),
            id: rows.iter().map(|r| r.id).collect(),
            mass_fluid,
            mass_boundary,
        }
    }

    /// Floats are written in shortest round-trip form.
    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{SNAPSHOT_HEADER}")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{}",
                r.id,
                kind_name(r.kind),
                r.pos[0],
                r.pos[1],
                r.pos[2],
                r.vel[0],
                r.vel[1],
                r.vel[2],
                r.rho,
                r.press
            )?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read<R: BufRead>(r: R) -> Result<Self> {
        let bad = |line: usize, detail: String| Error::Parse {
            what: "snapshot",
            detail: format!("line {line}: {detail}"),
        };
        let mut lines = r.lines();
        let header = lines.next().transpose()?.unwrap_or_default();
        if header.trim_end() != SNAPSHOT_HEADER {
            return Err(bad(1, format!("expected header `{SNAPSHOT_HEADER}`")));
        }
        let mut rows = Vec::new();
        for (k, line) in lines.enumerate() {
            let line = line?;
            let no = k + 2;
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.trim_end().split(',').collect();
            if cols.len() != 10 {
                return Err(bad(no, format!("expected 10 columns, found {}", cols.len())));
            }
            let num = |c: usize| -> Result<f32> {
                cols[c]
                    .parse::<f32>()
                    .map_err(|e| bad(no, format!("column {}: {e}", c + 1)))
            };
            let kind = match cols[1] {
                "fluid" => ParticleKind::Fluid,
                "boundary" => ParticleKind::Boundary,
                other => return Err(bad(no, format!("unknown particle type `{other}`"))),
            };
            rows.push(SnapshotRow {
                id: cols[0].parse().map_err(|e| bad(no, format!("id: {e}")))?,
                kind,
                pos: [num(2)?, num(3)?, num(4)?],
                vel: [num(5)?, num(6)?, num(7)?],
                rho: num(8)?,
                press: num(9)?,
            });
        }
        Ok(Self { rows })
    }

    pub fn write_file(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write(BufWriter::new(File::create(path)?))
    }

    pub fn read_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::read(BufReader::new(File::open(path)?))
    }
}

/// A field passes if its largest absolute difference is within `abs` or
/// its relative difference is within `rel`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub rel: f64,
    pub abs: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rel: 1e-5, abs: 0.0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FieldDiff {
    pub field: &'static str,
    /// Largest absolute difference over particles (and components).
    pub max_abs: f64,
    /// `max_abs` over the field's largest magnitude in the first snapshot.
    pub max_rel: f64,
    /// Particle where `max_abs` occurs.
    pub worst_id: Option<u32>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompareReport {
    pub fields: Vec<FieldDiff>,
    pub pass: bool,
}

impl CompareReport {
    /// The field with the largest relative difference.
    pub fn worst(&self) -> Option<&FieldDiff> {
        self.fields.iter().max_by(|a, b| a.max_rel.total_cmp(&b.max_rel))
    }
}

impl fmt::Display for CompareReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, d) in self.fields.iter().enumerate() {
            if k > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{}: abs {:.3e} rel {:.3e}", d.field, d.max_abs, d.max_rel)?;
            if let Some(id) = d.worst_id {
                write!(f, " at id {id}")?;
            }
            if !d.pass {
                f.write_str(" FAIL")?;
            }
        }
        Ok(())
    }
}

/// Field-wise L-infinity differences after aligning particles by id.
/// Fields are `pos`, `vel` (over all components), `rho` and `press`.
pub fn compare_snapshots(a: &Snapshot, b: &Snapshot, tol: Tolerances) -> Result<CompareReport> {
    if a.rows.len() != b.rows.len() {
        return Err(Error::Inconsistent(format!(
            "snapshots hold {} and {} particles",
            a.rows.len(),
            b.rows.len()
        )));
    }
    let index: HashMap<u32, usize> = b.rows.iter().enumerate().map(|(k, r)| (r.id, k)).collect();
    let mut pairs = Vec::with_capacity(a.rows.len());
    for ra in &a.rows {
        let Some(&k) = index.get(&ra.id) else {
            return Err(Error::Inconsistent(format!("id {} missing from second snapshot", ra.id)));
        };
        pairs.push((ra, &b.rows[k]));
    }
    type Get = fn(&SnapshotRow) -> Vec<f32>;
    let fields: [(&'static str, Get); 4] = [
        ("pos", |r| r.pos.to_vec()),
        ("vel", |r| r.vel.to_vec()),
        ("rho", |r| vec![r.rho]),
        ("press", |r| vec![r.press]),
    ];
    let mut out = Vec::new();
    for (name, get) in fields {
        let mut max_abs = 0.0f64;
        let mut scale = 0.0f64;
        let mut worst_id = None;
        for (ra, rb) in &pairs {
            for (x, y) in get(ra).into_iter().zip(get(rb)) {
                scale = scale.max((x as f64).abs());
                let d = (x as f64 - y as f64).abs();
                if d > max_abs || d.is_nan() {
                    max_abs = if d.is_nan() { f64::INFINITY } else { d };
                    worst_id = Some(ra.id);
                }
            }
        }
        let max_rel = if max_abs == 0.0 {
            0.0
        } else if scale > 0.0 {
            max_abs / scale
        } else {
            f64::INFINITY
        };
        out.push(FieldDiff {
            field: name,
            max_abs,
            max_rel,
            worst_id,
            pass: max_abs <= tol.abs || max_rel <= tol.rel,
        });
    }
    let pass = out.iter().all(|d| d.pass);
    Ok(CompareReport { fields: out, pass })
}
