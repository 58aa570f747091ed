use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const WARP_SIZE: u32 = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Capability {
    V1_0,
    V1_1,
    V1_2,
    V1_3,
    V2x,
}

impl Capability {
    pub const ALL: [Capability; 5] = [Self::V1_0, Self::V1_1, Self::V1_2, Self::V1_3, Self::V2x];
}

impl fmt::Display for Capability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::V1_0 => "1.0",
            Self::V1_1 => "1.1",
            Self::V1_2 => "1.2",
            Self::V1_3 => "1.3",
            Self::V2x => "2.x",
        })
    }
}

impl FromStr for Capability {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "1.0" => Self::V1_0,
            "1.1" => Self::V1_1,
            "1.2" => Self::V1_2,
            "1.3" => Self::V1_3,
            "2.x" | "2.0" | "2.1" => Self::V2x,
            _ => {
                return Err(Error::Parse {
                    what: "compute capability",
                    detail: format!("`{s}` (expected 1.0, 1.1, 1.2, 1.3 or 2.x)"),
                })
            }
        })
    }
}

/// Per-multiprocessor limits of one compute capability.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeviceSpec {
    pub capability: Capability,
    pub max_threads_per_block: u32,
    pub max_blocks_per_sm: u32,
    pub max_warps_per_sm: u32,
    pub max_threads_per_sm: u32,
    pub registers_per_sm: u32,
}

impl DeviceSpec {
    pub fn new(capability: Capability) -> Self {
        let (regs, warps, block) = match capability {
            Capability::V1_0 | Capability::V1_1 => (8 * 1024, 24, 512),
            Capability::V1_2 | Capability::V1_3 => (16 * 1024, 32, 512),
            Capability::V2x => (32 * 1024, 48, 1024),
        };
        Self {
            capability,
            max_threads_per_block: block,
            max_blocks_per_sm: 8,
            max_warps_per_sm: warps,
            max_threads_per_sm: warps * WARP_SIZE,
            registers_per_sm: regs,
        }
    }
}

/// Resident blocks per multiprocessor, limited by the block cap, register
/// file and thread slots.
pub fn blocks_per_sm(registers_per_thread: u32, threads_per_block: u32, device: &DeviceSpec) -> Result<u32> {
    if threads_per_block == 0
        || threads_per_block % WARP_SIZE != 0
        || threads_per_block > device.max_threads_per_block
    {
        return Err(Error::InvalidParam {
            field: "threads_per_block",
            reason: format!(
                "{threads_per_block} is not a positive multiple of {WARP_SIZE} up to {}",
                device.max_threads_per_block
            ),
        });
    }
    if registers_per_thread == 0 {
        return Err(Error::InvalidParam {
            field: "registers_per_thread",
            reason: "must be at least 1".into(),
        });
    }
    let per_block = registers_per_thread as u64 * threads_per_block as u64;
    let by_regs = device.registers_per_sm as u64 / per_block;
    let by_threads = (device.max_threads_per_sm / threads_per_block) as u64;
    Ok((device.max_blocks_per_sm as u64).min(by_regs).min(by_threads) as u32)
}

/// Active warps over the multiprocessor's warp limit.
pub fn occupancy(registers_per_thread: u32, threads_per_block: u32, device: &DeviceSpec) -> Result<f64> {
    let blocks = blocks_per_sm(registers_per_thread, threads_per_block, device)?;
    let warps = blocks * (threads_per_block / WARP_SIZE);
    Ok(warps as f64 / device.max_warps_per_sm as f64)
}

/// Block size with the highest occupancy, the smallest on ties. Returns
/// occupancy 0 (and the smallest block) when nothing fits.
pub fn best_block_size(registers_per_thread: u32, device: &DeviceSpec) -> (u32, f64) {
    let regs = registers_per_thread.max(1);
    let mut best = (WARP_SIZE, 0.0);
    for tpb in (WARP_SIZE..=device.max_threads_per_block).step_by(WARP_SIZE as usize) {
        let occ = occupancy(regs, tpb, device).unwrap_or(0.0);
        if occ > best.1 {
            best = (tpb, occ);
        }
    }
    best
}
