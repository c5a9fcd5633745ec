//! Fixtures shared by the benchmarks.

use zhat_core::catalog::{dimension2, ZClassEntry};
use zhat_core::groups::{PointGroup, DEFAULT_GROUP_CAP};

/// Point group of the shipped dimension-2 entry with the given label.
pub fn plane_point_group(label: &str) -> PointGroup {
    let c = dimension2();
    let entry: &ZClassEntry = c.entries().find(|e| e.label == label).expect("known label");
    entry.point_group(DEFAULT_GROUP_CAP).expect("valid entry")
}
