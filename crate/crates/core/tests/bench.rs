use proptest::prelude::*;
use wcsph::bench::{
    best_block_size, compare_snapshots, estimate_range_memory, occupancy, read_stats, run_benchmark,
    subdivided_cells, write_stats, BenchOptions, BenchReport, BenchRow, Capability, DeviceSpec, Snapshot,
    Tolerances, WARP_SIZE,
};
use wcsph::engines::{EngineConfig, Threading};
use wcsph::sim::{run_simulation, RunLimits, Scenario};
use wcsph::Error;

fn dev(c: Capability) -> DeviceSpec {
    DeviceSpec::new(c)
}

#[test]
fn occupancy_examples() {
    let d13 = dev(Capability::V1_3);
    assert_eq!(occupancy(35, 256, &d13).unwrap(), 0.25);
    assert_eq!(occupancy(35, 448, &d13).unwrap(), 0.4375);
    assert_eq!((occupancy(35, 448, &d13).unwrap() * 100.0).round(), 44.0);
    assert_eq!(occupancy(1, 32, &dev(Capability::V2x)).unwrap(), 8.0 / 48.0);
    assert_eq!(occupancy(1000, 64, &d13).unwrap(), 0.0);
}

#[test]
fn occupancy_rejects_bad_blocks() {
    let d = dev(Capability::V1_0);
    assert!(occupancy(10, 0, &d).is_err());
    assert!(occupancy(10, 48, &d).is_err());
    assert!(occupancy(10, 1024, &d).is_err());
    assert!(occupancy(0, 64, &d).is_err());
    assert!(occupancy(10, 1024, &dev(Capability::V2x)).is_ok());
}

#[test]
fn device_table() {
    let regs: Vec<u32> = Capability::ALL.iter().map(|&c| dev(c).registers_per_sm).collect();
    assert_eq!(regs, [8192, 8192, 16384, 16384, 32768]);
    let warps: Vec<u32> = Capability::ALL.iter().map(|&c| dev(c).max_warps_per_sm).collect();
    assert_eq!(warps, [24, 24, 32, 32, 48]);
    for c in Capability::ALL {
        let d = dev(c);
        assert_eq!(d.max_threads_per_sm, d.max_warps_per_sm * WARP_SIZE);
        assert_eq!(d.max_blocks_per_sm, 8);
        assert_eq!(c.to_string().parse::<Capability>().unwrap(), c);
    }
    assert_eq!("2.1".parse::<Capability>().unwrap(), Capability::V2x);
    assert!("3.0".parse::<Capability>().is_err());
}

#[test]
fn best_block_sizes() {
    let d13 = dev(Capability::V1_3);
    let (tpb, occ) = best_block_size(35, &d13);
    assert!(occ >= 0.4375);
    assert_eq!(occupancy(35, tpb, &d13).unwrap(), occ);
    let (_, occ) = best_block_size(1, &d13);
    assert_eq!(occ, 1.0);
    assert_eq!(best_block_size(1, &dev(Capability::V2x)).1, 1.0);
    assert_eq!(best_block_size(100_000, &d13), (32, 0.0));
    // Smallest block wins a tie.
    let (tpb, occ) = best_block_size(8, &d13);
    for b in (32..tpb).step_by(32) {
        assert!(occupancy(8, b, &d13).unwrap() < occ);
    }
}

#[test]
fn range_memory() {
    assert_eq!(estimate_range_memory(1000, 1).unwrap(), 144_000);
    assert_eq!(subdivided_cells(1000, 2), 8000);
    assert_eq!(estimate_range_memory(subdivided_cells(1000, 2), 2).unwrap(), 3_200_000);
    assert_eq!(estimate_range_memory(0, 1).unwrap(), 0);
    assert_eq!(estimate_range_memory(1, 1).unwrap(), 144);
    assert_eq!(estimate_range_memory(1, 2).unwrap(), 400);
    assert!(estimate_range_memory(10, 3).is_err());
}

proptest! {
    #[test]
    fn occupancy_monotone_and_quantized(r in 1u32..200, blocks in 1u32..=16, cap in 0usize..5) {
        let d = dev(Capability::ALL[cap]);
        let tpb = blocks * 32;
        prop_assume!(tpb <= d.max_threads_per_block);
        let a = occupancy(r, tpb, &d).unwrap();
        let b = occupancy(r + 1, tpb, &d).unwrap();
        prop_assert!(b <= a);
        prop_assert!((0.0..=1.0).contains(&a));
        let quantum = blocks as f64 / d.max_warps_per_sm as f64;
        let k = a / quantum;
        prop_assert!((k - k.round()).abs() < 1e-9);
    }

    #[test]
    fn range_memory_is_linear(n in 0u64..1_000_000, m in 0u64..1_000_000) {
        for s in [1, 2] {
            let f = |c| estimate_range_memory(c, s).unwrap();
            prop_assert_eq!(f(n + m), f(n) + f(m));
        }
        prop_assert_eq!(estimate_range_memory(n, 1).unwrap(), 144 * n);
        prop_assert_eq!(estimate_range_memory(n, 2).unwrap(), 400 * n);
    }

    #[test]
    fn speedups_are_scale_free(a in 0.01f64..10.0, b in 0.01f64..10.0, k in 0.1f64..100.0) {
        let rows = |s: f64| vec![row("base", 10, a * s), row("other", 10, b * s)];
        let r1 = BenchReport::new("base", rows(1.0)).unwrap();
        let r2 = BenchReport::new("base", rows(k)).unwrap();
        let (x, y) = (r1.row("other").unwrap().speedup, r2.row("other").unwrap().speedup);
        prop_assert!((x - y).abs() <= 1e-12 * x);
        prop_assert!((x - a / b).abs() <= 1e-12 * x);
    }
}

fn row(tag: &str, steps: u64, wall: f64) -> BenchRow {
    BenchRow {
        tag: tag.into(),
        particles: 1,
        steps,
        wall_seconds: wall,
        steps_per_second: 0.0,
        speedup: 0.0,
        candidate_pairs: 0,
        true_pairs: 0,
        force_evals: 0,
        pi_fraction: 0.0,
    }
}

#[test]
fn report_requires_baseline() {
    assert!(BenchReport::new("x", vec![row("a", 1, 1.0)]).is_err());
    let r = BenchReport::new("a", vec![row("a", 10, 2.0)]).unwrap();
    assert_eq!(r.rows[0].speedup, 1.0);
    assert_eq!(r.rows[0].steps_per_second, 5.0);
    assert!(r.to_csv().starts_with("tag,particles,steps,"));
    assert!(r.to_table().contains('*'));
}

fn frame_snapshot(cfg: &EngineConfig, steps: u64) -> Snapshot {
    let s = Scenario::dam_break(0.02);
    let p = s.params(2.0);
    let mut last = None;
    let mut sink = |_: u64, _: f64, sys: &wcsph::model::ParticleSystem, k: &wcsph::physics::PhysicsConsts| {
        last = Some(Snapshot::from_system(sys, k));
        Ok(())
    };
    let lim = RunLimits {
        max_steps: Some(steps),
        t_end: None,
    };
    run_simulation(&s, &p, cfg, lim, Some(&mut sink), steps.max(1)).unwrap();
    last.unwrap()
}

#[test]
fn snapshot_round_trip_is_exact() {
    let snap = frame_snapshot(&EngineConfig::default(), 15);
    let mut buf = Vec::new();
    snap.write(&mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert!(text.starts_with("id,type,x,y,z,vx,vy,vz,rho,press\n"));
    assert!(text.contains(",fluid,") && text.contains(",boundary,"));
    let back = Snapshot::read(&buf[..]).unwrap();
    assert_eq!(back, snap);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    snap.write_file(&path).unwrap();
    assert_eq!(Snapshot::read_file(&path).unwrap(), snap);
}

#[test]
fn snapshot_parse_errors() {
    assert!(Snapshot::read(&b"id,x\n"[..]).is_err());
    let bad = "id,type,x,y,z,vx,vy,vz,rho,press\n0,water,0,0,0,0,0,0,1000,0\n";
    assert!(matches!(Snapshot::read(bad.as_bytes()), Err(Error::Parse { .. })));
    let short = "id,type,x,y,z,vx,vy,vz,rho,press\n0,fluid,0,0\n";
    assert!(Snapshot::read(short.as_bytes()).is_err());
}

#[test]
fn comparison_against_self_and_perturbed() {
    let a = frame_snapshot(&EngineConfig::default(), 10);
    let same = compare_snapshots(&a, &a, Tolerances::default()).unwrap();
    assert!(same.pass);
    assert!(same.fields.iter().all(|f| f.max_abs == 0.0));

    let mut b = a.clone();
    b.rows.reverse();
    assert!(compare_snapshots(&a, &b, Tolerances::default()).unwrap().pass);
    let k = b.rows.iter().position(|r| r.kind == wcsph::model::ParticleKind::Fluid).unwrap();
    b.rows[k].vel[1] += 1e-2;
    let id = b.rows[k].id;
    let rep = compare_snapshots(&a, &b, Tolerances::default()).unwrap();
    assert!(!rep.pass);
    let vel = rep.fields.iter().find(|f| f.field == "vel").unwrap();
    assert!(!vel.pass);
    assert_eq!(vel.worst_id, Some(id));
    assert!(rep.to_string().contains(&format!("id {id}")));

    b.rows.pop();
    assert!(compare_snapshots(&a, &b, Tolerances::default()).is_err());
}

#[test]
fn symmetry_on_and_off_snapshots_agree() {
    let on = frame_snapshot(&EngineConfig::cellpairs(true, 1, Threading::Single, 1), 20);
    let off = frame_snapshot(&EngineConfig::cellpairs(false, 1, Threading::Single, 1), 20);
    let rep = compare_snapshots(&on, &off, Tolerances { rel: 1e-5, abs: 0.0 }).unwrap();
    assert!(rep.pass, "{rep}");
}

#[test]
fn stats_lines_have_fixed_keys() {
    let s = Scenario::dam_break(0.02);
    let p = s.params(2.0);
    let lim = RunLimits {
        max_steps: Some(3),
        t_end: None,
    };
    let out = run_simulation(&s, &p, &EngineConfig::default(), lim, None, 0).unwrap();
    let mut buf = Vec::new();
    write_stats(&mut buf, &out.stats).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    let first = text.lines().next().unwrap();
    let v: serde_json::Value = serde_json::from_str(first).unwrap();
    let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
    let want = [
        "step", "dt", "wall_s", "candidate_pairs", "true_pairs", "force_evals", "stage_nl_s", "stage_pi_s", "stage_su_s",
    ];
    assert_eq!(keys.len(), want.len());
    let mut at = 0;
    for k in want {
        let pos = first.find(&format!("\"{k}\":")).unwrap();
        assert!(pos >= at, "{k} out of order");
        at = pos;
    }
    let back = read_stats(&buf[..]).unwrap();
    assert_eq!(back.len(), 3);
    assert_eq!(back[2].step, 2);
    assert_eq!(back[0].dt, out.stats[0].dt);
}

#[test]
fn benchmark_symmetry_matrix() {
    let s = Scenario::dam_break(0.02);
    let p = s.params(2.0);
    let off = EngineConfig::cellpairs(false, 1, Threading::Single, 1);
    let on = EngineConfig::cellpairs(true, 1, Threading::Single, 1);
    let opts = BenchOptions {
        steps: 5,
        warmup: 1,
        ..BenchOptions::default()
    };
    let rep = run_benchmark(&[off.clone(), on.clone()], &s, &p, opts, &off.tag()).unwrap();
    let (a, b) = (rep.row(&off.tag()).unwrap(), rep.row(&on.tag()).unwrap());
    assert_eq!(a.speedup, 1.0);
    assert_eq!(a.true_pairs, b.true_pairs);
    assert_eq!(a.force_evals, 2 * b.force_evals);
    assert!(a.particles > 0 && a.steps == 5);

    let only = run_benchmark(&[on.clone()], &s, &p, opts, &on.tag()).unwrap();
    assert!(only.rows.iter().all(|r| r.speedup == 1.0));
    assert!(run_benchmark(&[on], &s, &p, opts, "nope").is_err());
}
