//! Uniform cell grid over the fixed domain box, cell-ordered particle
//! reordering, `CellBeginEnd` tables and precomputed interaction ranges.
//!
//! Cells have side `2h / n` (the interaction radius divided by `n`), so any
//! neighbour of a particle lies at most `n` cells away along each axis.
//! Linear cell index is `x + dims.x * (y + dims.y * z)`.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::model::{ParticleSystem, SimParams, Vec3};

/// Marker stored in `cell_of` for particles outside the domain.
pub const OUT_OF_DOMAIN: u32 = u32::MAX;

#[derive(Clone, Debug, PartialEq)]
pub struct CellGrid {
    pub origin: Vec3,
    pub upper: Vec3,
    pub cell_size: f32,
    /// How many cells span one interaction radius.
    pub n_subdiv: u32,
    pub dims: [usize; 3],
    /// Linear cell index per particle, or [`OUT_OF_DOMAIN`].
    pub cell_of: Vec<u32>,
    /// Indices of particles flagged outside the domain.
    pub out_of_domain: Vec<usize>,
}

impl CellGrid {
    /// An empty grid covering `[min, max]` with cells of side `cell_size`.
    pub fn new(min: Vec3, max: Vec3, cell_size: f32, n_subdiv: u32) -> Self {
        let dims = std::array::from_fn(|d| {
            let span = (max[d] as f64 - min[d] as f64) / cell_size as f64;
            // Absorb single-precision noise in the inputs.
            ((span * (1.0 - 1e-6)).ceil() as usize).max(1)
        });
        Self {
            origin: min,
            upper: max,
            cell_size,
            n_subdiv,
            dims,
            cell_of: Vec::new(),
            out_of_domain: Vec::new(),
        }
    }

    pub fn ncells(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    #[inline(always)]
    pub fn linear(&self, c: [usize; 3]) -> usize {
        c[0] + self.dims[0] * (c[1] + self.dims[1] * c[2])
    }

    #[inline(always)]
    pub fn coords(&self, cell: usize) -> [usize; 3] {
        let x = cell % self.dims[0];
        let yz = cell / self.dims[0];
        [x, yz % self.dims[1], yz / self.dims[1]]
    }

    /// Cell coordinates of a point, lower-inclusive. Points on the upper
    /// domain face belong to the last cell; anything else outside is `None`.
    pub fn locate(&self, p: Vec3) -> Option<[usize; 3]> {
        let mut c = [0usize; 3];
        for d in 0..3 {
            if !(p[d] >= self.origin[d] && p[d] <= self.upper[d]) {
                return None;
            }
            let rel = (p[d] as f64 - self.origin[d] as f64) / self.cell_size as f64;
            c[d] = (rel.floor() as usize).min(self.dims[d] - 1);
        }
        Some(c)
    }

    /// Fills `cell_of` for `positions`.
    pub fn assign(&mut self, positions: &[Vec3]) {
        self.cell_of.clear();
        self.out_of_domain.clear();
        self.cell_of.reserve(positions.len());
        for (i, &p) in positions.iter().enumerate() {
            match self.locate(p) {
                Some(c) => self.cell_of.push(self.linear(c) as u32),
                None => {
                    self.cell_of.push(OUT_OF_DOMAIN);
                    self.out_of_domain.push(i);
                }
            }
        }
    }
}

/// Builds the grid for `params` (cells of side `2h / n_subdiv`) and assigns
/// every position to its cell.
pub fn assign_cells(positions: &[Vec3], params: &SimParams) -> CellGrid {
    assign_cells_subdiv(positions, params, params.n_subdiv)
}

/// Like [`assign_cells`] with an explicit subdivision.
pub fn assign_cells_subdiv(positions: &[Vec3], params: &SimParams, n_subdiv: u32) -> CellGrid {
    let mut grid = CellGrid::new(
        params.domain_min,
        params.domain_max,
        params.support() / n_subdiv as f32,
        n_subdiv,
    );
    grid.assign(positions);
    grid
}

/// Result of [`reorder`].
#[derive(Clone, Debug)]
pub struct Reordered {
    pub system: ParticleSystem,
    /// `cell_of` in the new order (nondecreasing within each list).
    pub cell_of: Vec<u32>,
    /// New index -> old index.
    pub perm: Vec<usize>,
}

impl Reordered {
    /// Old index -> new index.
    pub fn inverse(&self) -> Vec<usize> {
        invert(&self.perm)
    }
}

pub fn invert(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (new, &old) in perm.iter().enumerate() {
        inv[old] = new;
    }
    inv
}

/// Stable counting sort of the boundary and fluid lists by cell index.
pub fn reorder(system: &ParticleSystem, grid: &CellGrid) -> Result<Reordered> {
    if grid.cell_of.len() != system.len() {
        return Err(Error::Inconsistent(format!(
            "grid covers {} particles, system has {}",
            grid.cell_of.len(),
            system.len()
        )));
    }
    if let Some(&i) = grid.out_of_domain.first() {
        return Err(Error::Inconsistent(format!(
            "particle id {} is outside the domain",
            system.id[i]
        )));
    }
    let ncells = grid.ncells();
    let mut perm = vec![0usize; system.len()];
    let mut counts = vec![0usize; ncells + 1];
    for range in [system.boundary_range(), system.fluid_range()] {
        counting_sort(&grid.cell_of, range, &mut counts, &mut perm);
    }
    let cell_of = perm.iter().map(|&p| grid.cell_of[p]).collect();
    Ok(Reordered {
        system: system.permuted(&perm),
        cell_of,
        perm,
    })
}

fn counting_sort(cell_of: &[u32], range: Range<usize>, counts: &mut [usize], perm: &mut [usize]) {
    counts.iter_mut().for_each(|c| *c = 0);
    for i in range.clone() {
        counts[cell_of[i] as usize + 1] += 1;
    }
    for c in 1..counts.len() {
        counts[c] += counts[c - 1];
    }
    for i in range.clone() {
        let slot = &mut counts[cell_of[i] as usize];
        perm[range.start + *slot] = i;
        *slot += 1;
    }
}

/// Per-cell half-open particle ranges `[begin, end)` of one sorted list,
/// in absolute particle indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellBeginEnd {
    pub ranges: Vec<[u32; 2]>,
}

impl CellBeginEnd {
    #[inline(always)]
    pub fn get(&self, cell: usize) -> Range<usize> {
        let [b, e] = self.ranges[cell];
        b as usize..e as usize
    }

    pub fn ncells(&self) -> usize {
        self.ranges.len()
    }
}

/// Builds `CellBeginEnd` for a nondecreasing run of cell indices whose first
/// element sits at particle index `base`.
///
/// Each particle whose cell differs from its predecessor opens that cell and
/// closes the previous one; empty cells then collapse onto the begin of the
/// next occupied cell so the ranges tile `[base, base + len)`.
pub fn build_cell_begin_end(sorted_cells: &[u32], base: usize, ncells: usize) -> CellBeginEnd {
    let n = sorted_cells.len();
    let mut ranges = vec![[u32::MAX, u32::MAX]; ncells];
    for i in 0..n {
        let c = sorted_cells[i] as usize;
        if i == 0 || sorted_cells[i - 1] as usize != c {
            ranges[c][0] = (base + i) as u32;
            if i > 0 {
                ranges[sorted_cells[i - 1] as usize][1] = (base + i) as u32;
            }
        }
    }
    if n > 0 {
        ranges[sorted_cells[n - 1] as usize][1] = (base + n) as u32;
    }
    let mut next = (base + n) as u32;
    for r in ranges.iter_mut().rev() {
        if r[0] == u32::MAX {
            *r = [next, next];
        } else {
            next = r[0];
        }
    }
    CellBeginEnd { ranges }
}

/// `CellBeginEnd` for both particle lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellLists {
    pub boundary: CellBeginEnd,
    pub fluid: CellBeginEnd,
}

impl CellLists {
    /// `sorted_cells` is the reordered `cell_of` of the whole system.
    pub fn build(sorted_cells: &[u32], count_boundary: usize, ncells: usize) -> Self {
        Self {
            boundary: build_cell_begin_end(&sorted_cells[..count_boundary], 0, ncells),
            fluid: build_cell_begin_end(&sorted_cells[count_boundary..], count_boundary, ncells),
        }
    }
}

/// Offsets of the forward half stencil: all `(dx, dy, dz)` within `reach`
/// that come after the origin in linear (Z, then Y, then X) order.
pub fn forward_offsets(reach: u32) -> Vec<[i32; 3]> {
    let r = reach as i32;
    let mut out = Vec::new();
    for dz in -r..=r {
        for dy in -r..=r {
            for dx in -r..=r {
                if dz > 0 || (dz == 0 && (dy > 0 || (dy == 0 && dx > 0))) {
                    out.push([dx, dy, dz]);
                }
            }
        }
    }
    out
}

/// Offsets of the full `(2 reach + 1)^3` stencil, origin included.
pub fn full_offsets(reach: u32) -> Vec<[i32; 3]> {
    let r = reach as i32;
    let mut out = Vec::new();
    for dz in -r..=r {
        for dy in -r..=r {
            for dx in -r..=r {
                out.push([dx, dy, dz]);
            }
        }
    }
    out
}

#[inline(always)]
pub fn offset_cell(c: [usize; 3], off: [i32; 3], dims: [usize; 3]) -> Option<[usize; 3]> {
    let mut out = [0usize; 3];
    for d in 0..3 {
        let v = c[d] as i64 + off[d] as i64;
        if v < 0 || v >= dims[d] as i64 {
            return None;
        }
        out[d] = v as usize;
    }
    Some(out)
}

/// Forward neighbour cells used by symmetric traversal, clipped to the
/// grid. The cell itself is not listed; its internal pairs are visited as
/// ordered pairs `j > i`. Interior cells get 13 cells at `reach = 1`.
pub fn forward_cells(cell: [usize; 3], dims: [usize; 3], reach: u32) -> Vec<[usize; 3]> {
    forward_offsets(reach)
        .into_iter()
        .filter_map(|off| offset_cell(cell, off, dims))
        .collect()
}

/// Particle range of one X row of cells `[x0, x1]` at `(cy, cz)`: begin of
/// the first cell to end of the last.
#[inline(always)]
pub fn row_range(list: &CellBeginEnd, dims: [usize; 3], x0: usize, x1: usize, cy: usize, cz: usize) -> [u32; 2] {
    let row = dims[0] * (cy + dims[1] * cz);
    [list.ranges[row + x0][0], list.ranges[row + x1][1]]
}

/// One interaction range for both lists: `[begin, end)` into the fluid and
/// boundary blocks. 16 bytes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[repr(C)]
pub struct RangePair {
    pub fluid: [u32; 2],
    pub boundary: [u32; 2],
}

/// Per-cell precomputed ranges: one per X row of the neighbour block,
/// `(2n + 1)^2` rows (9 at `n = 1`, 25 at `n = 2`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InteractionRanges {
    pub n_subdiv: u32,
    pub per_cell: usize,
    pub ranges: Vec<RangePair>,
}

impl InteractionRanges {
    #[inline(always)]
    pub fn of_cell(&self, cell: usize) -> &[RangePair] {
        &self.ranges[cell * self.per_cell..(cell + 1) * self.per_cell]
    }

    pub fn bytes(&self) -> usize {
        self.ranges.len() * std::mem::size_of::<RangePair>()
    }
}

/// Builds interaction ranges for every cell. Rows falling outside the grid
/// become empty ranges; rows are clipped along X at the domain.
pub fn build_ranges(lists: &CellLists, dims: [usize; 3], n_subdiv: u32) -> Result<InteractionRanges> {
    if !(n_subdiv == 1 || n_subdiv == 2) {
        return Err(Error::InvalidConfig(format!(
            "interaction ranges support n_subdiv 1 or 2, got {n_subdiv}"
        )));
    }
    let ncells = dims[0] * dims[1] * dims[2];
    if lists.fluid.ncells() != ncells || lists.boundary.ncells() != ncells {
        return Err(Error::Inconsistent("cell lists do not match grid dims".into()));
    }
    let n = n_subdiv as i64;
    let side = (2 * n + 1) as usize;
    let per_cell = side * side;
    let mut ranges = Vec::with_capacity(ncells * per_cell);
    for cz in 0..dims[2] {
        for cy in 0..dims[1] {
            for cx in 0..dims[0] {
                let x0 = (cx as i64 - n).max(0) as usize;
                let x1 = (cx as i64 + n).min(dims[0] as i64 - 1) as usize;
                for dz in -n..=n {
                    for dy in -n..=n {
                        let y = cy as i64 + dy;
                        let z = cz as i64 + dz;
                        if y < 0 || z < 0 || y >= dims[1] as i64 || z >= dims[2] as i64 {
                            ranges.push(RangePair::default());
                            continue;
                        }
                        let (y, z) = (y as usize, z as usize);
                        ranges.push(RangePair {
                            fluid: row_range(&lists.fluid, dims, x0, x1, y, z),
                            boundary: row_range(&lists.boundary, dims, x0, x1, y, z),
                        });
                    }
                }
            }
        }
    }
    Ok(InteractionRanges {
        n_subdiv,
        per_cell,
        ranges,
    })
}

/// Searched volume over interaction-sphere volume for cells of side
/// `radius / n`: `(2 + 1/n)^3 / (4 pi / 3)`. Tends to `6 / pi`.
pub fn searched_volume_ratio(n: f64) -> f64 {
    (2.0 + 1.0 / n).powi(3) / (4.0 / 3.0 * std::f64::consts::PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit_grid(cell: f32) -> CellGrid {
        CellGrid::new([0.0; 3], [1.0; 3], cell, 1)
    }

    #[test]
    fn locate_examples() {
        let g = unit_grid(0.5);
        assert_eq!(g.dims, [2, 2, 2]);
        let c = g.locate([0.6, 0.1, 0.1]).unwrap();
        assert_eq!(c, [1, 0, 0]);
        assert_eq!(g.linear(c), 1);
        assert_eq!(g.locate([0.5, 0.0, 0.0]), Some([1, 0, 0]));
        assert_eq!(g.locate([-0.1, 0.0, 0.0]), None);
        assert_eq!(g.locate([1.0, 1.0, 1.0]), Some([1, 1, 1]));
        assert_eq!(g.locate([f32::NAN, 0.0, 0.0]), None);
    }

    #[test]
    fn assign_flags_out_of_domain() {
        let mut g = unit_grid(0.5);
        g.assign(&[[0.1; 3], [1.5, 0.0, 0.0], [0.9, 0.9, 0.9]]);
        assert_eq!(g.cell_of, vec![0, OUT_OF_DOMAIN, 7]);
        assert_eq!(g.out_of_domain, vec![1]);
    }

    #[test]
    fn coords_roundtrip() {
        let g = CellGrid::new([0.0; 3], [1.0, 0.7, 0.3], 0.1, 1);
        assert_eq!(g.dims, [10, 7, 3]);
        for c in 0..g.ncells() {
            assert_eq!(g.linear(g.coords(c)), c);
        }
    }

    #[test]
    fn cell_begin_end_hand_example() {
        let cbe = build_cell_begin_end(&[0, 0, 2, 2, 2], 0, 4);
        assert_eq!(cbe.ranges, vec![[0, 2], [2, 2], [2, 5], [5, 5]]);
        let empty = build_cell_begin_end(&[], 0, 3);
        assert_eq!(empty.ranges, vec![[0, 0]; 3]);
        let offset = build_cell_begin_end(&[1, 1], 10, 3);
        assert_eq!(offset.ranges, vec![[10, 10], [10, 12], [12, 12]]);
    }

    #[test]
    fn cell_begin_end_matches_bucket_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let ncells = 500;
        let mut cells: Vec<u32> = (0..10_000).map(|_| rng.gen_range(0..ncells as u32)).collect();
        cells.sort_unstable();
        let cbe = build_cell_begin_end(&cells, 0, ncells);
        let mut counts = vec![0usize; ncells];
        for &c in &cells {
            counts[c as usize] += 1;
        }
        let mut start = 0;
        for c in 0..ncells {
            assert_eq!(cbe.get(c), start..start + counts[c]);
            start += counts[c];
        }
    }

    fn random_system(rng: &mut ChaCha8Rng, nb: usize, nf: usize) -> ParticleSystem {
        let mut pt = |_| [rng.gen_range(0.0..1.0f32), rng.gen_range(0.0..1.0f32), rng.gen_range(0.0..1.0f32)];
        let b: Vec<_> = (0..nb).map(&mut pt).collect();
        let f: Vec<_> = (0..nf).map(&mut pt).collect();
        let v = vec![[0.0; 3]; nf];
        ParticleSystem::from_parts(b, f, v, |_, _| 1000.0, 1.0, 1.0)
    }

    #[test]
    fn reorder_sorts_each_list_stably() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let sys = random_system(&mut rng, 300, 1000);
        let mut g = unit_grid(0.1);
        g.assign(&sys.pos);
        let r = reorder(&sys, &g).unwrap();
        r.system.check().unwrap();
        for list in [0..300, 300..1300] {
            let cells = &r.cell_of[list.clone()];
            assert!(cells.windows(2).all(|w| w[0] <= w[1]));
            // stability: equal cells keep ascending original index
            for k in list.start + 1..list.end {
                if r.cell_of[k] == r.cell_of[k - 1] {
                    assert!(r.perm[k] > r.perm[k - 1]);
                }
                assert!(list.contains(&r.perm[k]));
            }
        }
        // undo with the inverse permutation
        let inv = r.inverse();
        let back = r.system.permuted(&inv);
        assert_eq!(back, sys);
    }

    #[test]
    fn reorder_of_sorted_is_identity() {
        let pos = vec![[0.05, 0.05, 0.05], [0.05, 0.06, 0.05], [0.55, 0.05, 0.05]];
        let sys = ParticleSystem::from_parts(vec![], pos.clone(), vec![[0.0; 3]; 3], |_, _| 1.0, 1.0, 1.0);
        let mut g = unit_grid(0.5);
        g.assign(&sys.pos);
        let r = reorder(&sys, &g).unwrap();
        assert_eq!(r.perm, vec![0, 1, 2]);
    }

    #[test]
    fn reorder_rejects_out_of_domain() {
        let sys = ParticleSystem::from_parts(vec![], vec![[2.0; 3]], vec![[0.0; 3]], |_, _| 1.0, 1.0, 1.0);
        let mut g = unit_grid(0.5);
        g.assign(&sys.pos);
        assert!(reorder(&sys, &g).is_err());
    }

    #[test]
    fn forward_stencil_counts() {
        assert_eq!(forward_offsets(1).len(), 13);
        assert_eq!(forward_offsets(2).len(), 62);
        assert_eq!(forward_cells([1, 1, 1], [3, 3, 3], 1).len(), 13);
        let corner = forward_cells([2, 2, 2], [3, 3, 3], 1);
        assert!(corner.is_empty());
        let corner = forward_cells([0, 0, 0], [3, 3, 3], 1);
        assert!(corner.len() < 13);
    }

    #[test]
    fn forward_stencil_covers_each_adjacent_pair_once() {
        for reach in [1u32, 2] {
            let dims = [4, 4, 4];
            let g = CellGrid::new([0.0; 3], [4.0; 3], 1.0, reach);
            let mut seen = std::collections::HashMap::new();
            for c in 0..g.ncells() {
                for nb in forward_cells(g.coords(c), dims, reach) {
                    let n = g.linear(nb);
                    let key = (c.min(n), c.max(n));
                    *seen.entry(key).or_insert(0) += 1;
                }
            }
            // brute force over all unordered distinct pairs within reach
            let mut expected = 0;
            for a in 0..g.ncells() {
                for b in a + 1..g.ncells() {
                    let (ca, cb) = (g.coords(a), g.coords(b));
                    let near = (0..3).all(|d| (ca[d] as i64 - cb[d] as i64).abs() <= reach as i64);
                    if near {
                        expected += 1;
                        assert_eq!(seen.get(&(a, b)), Some(&1), "pair {a},{b}");
                    }
                }
            }
            assert_eq!(seen.len(), expected);
        }
    }

    #[test]
    fn ranges_cover_neighbour_block() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let sys = random_system(&mut rng, 200, 800);
        for n in [1u32, 2] {
            let mut g = CellGrid::new([0.0; 3], [1.0; 3], 0.2 / n as f32, n);
            g.assign(&sys.pos);
            let r = reorder(&sys, &g).unwrap();
            let lists = CellLists::build(&r.cell_of, r.system.count_boundary, g.ncells());
            let ir = build_ranges(&lists, g.dims, n).unwrap();
            assert_eq!(ir.per_cell, if n == 1 { 9 } else { 25 });
            for c in 0..g.ncells() {
                let cc = g.coords(c);
                let mut from_ranges: Vec<usize> = ir
                    .of_cell(c)
                    .iter()
                    .flat_map(|rp| (rp.fluid[0]..rp.fluid[1]).chain(rp.boundary[0]..rp.boundary[1]))
                    .map(|i| i as usize)
                    .collect();
                from_ranges.sort_unstable();
                let mut brute: Vec<usize> = (0..r.system.len())
                    .filter(|&i| {
                        let pc = g.coords(r.cell_of[i] as usize);
                        (0..3).all(|d| (pc[d] as i64 - cc[d] as i64).abs() <= n as i64)
                    })
                    .collect();
                brute.sort_unstable();
                assert_eq!(from_ranges, brute, "cell {c}");
            }
        }
        let lists = CellLists {
            boundary: build_cell_begin_end(&[], 0, 1),
            fluid: build_cell_begin_end(&[], 0, 1),
        };
        assert!(build_ranges(&lists, [1, 1, 1], 3).is_err());
    }

    #[test]
    fn volume_ratio_asymptote() {
        let lim = 6.0 / std::f64::consts::PI;
        // Gap is about 9 / (2 pi n).
        assert!((searched_volume_ratio(1e6) - lim).abs() < 3e-6);
        assert!((searched_volume_ratio(1e7) - lim).abs() < 1e-6);
        let r = searched_volume_ratio(1.0) / searched_volume_ratio(2.0);
        assert!((r - 27.0 / 15.625).abs() < 1e-12);
    }
}
