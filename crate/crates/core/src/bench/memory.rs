use crate::error::{Error, Result};
use crate::grid::RangePair;

/// Interaction ranges stored per cell: 9 at cell size `2h`, 25 at `h`.
pub fn ranges_per_cell(n_subdiv: u32) -> Result<u64> {
    match n_subdiv {
        1 | 2 => Ok((2 * n_subdiv as u64 + 1).pow(2)),
        _ => Err(Error::InvalidParam {
            field: "n_subdiv",
            reason: format!("interaction ranges exist for 1 or 2 subdivisions, got {n_subdiv}"),
        }),
    }
}

/// Bytes of interaction ranges for `ncells` cells: 144 per cell with one
/// subdivision, 400 with two.
pub fn estimate_range_memory(ncells: u64, n_subdiv: u32) -> Result<u64> {
    Ok(ncells * ranges_per_cell(n_subdiv)? * std::mem::size_of::<RangePair>() as u64)
}

/// Cells covering the same domain once each side is split `n_subdiv` ways.
pub fn subdivided_cells(base_cells: u64, n_subdiv: u32) -> u64 {
    base_cells * (n_subdiv as u64).pow(3)
}

/// Usable-memory annotations for known cards, in bytes.
pub fn device_memory_limit(tag: &str) -> Option<(&'static str, u64)> {
    match tag.to_ascii_lowercase().as_str() {
        "gtx480" | "gtx-480" => Some(("GTX 480, less than 1.4 GB usable", 1_400_000_000)),
        "tesla1060" | "tesla-1060" => Some(("Tesla 1060, 4 GB", 4_000_000_000)),
        _ => None,
    }
}
