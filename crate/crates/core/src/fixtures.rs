//! Bundled test geometries.

use crate::error::Result;
use crate::geometry::CompactSet;

pub const DISK: &str = include_str!("../fixtures/disk.json");
pub const INTERVAL: &str = include_str!("../fixtures/interval.json");
pub const TWO_INTERVALS: &str = include_str!("../fixtures/two_intervals_a05.json");
pub const TWO_DISKS: &str = include_str!("../fixtures/two_disks.json");
/// Polyline sampling of `r = 10 θ⁻²`, `θ ∈ [π, 5π]`: two turns, with an
/// arc-to-chord ratio that grows as the turns tighten.
pub const SPIRAL: &str = include_str!("../fixtures/spiral.json");

pub const NAMES: [&str; 5] = ["disk", "interval", "two_intervals_a05", "two_disks", "spiral"];

pub fn source(name: &str) -> Option<&'static str> {
    Some(match name {
        "disk" => DISK,
        "interval" => INTERVAL,
        "two_intervals_a05" => TWO_INTERVALS,
        "two_disks" => TWO_DISKS,
        "spiral" => SPIRAL,
        _ => return None,
    })
}

/// Quasismooth fixtures (every name except the spiral).
pub fn is_quasismooth(name: &str) -> bool {
    name != "spiral"
}

pub fn load(name: &str) -> Option<Result<CompactSet>> {
    source(name).map(CompactSet::from_json)
}
