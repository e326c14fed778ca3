//! Component structure, grid counting functions and bad events.

mod bad_events;
mod components;
mod counting;
mod union_find;

pub use bad_events::{analyze_global, detect_bad_events, BadEventFlags, GlobalAnalysis};
pub use components::{
    component_labels, connected_components, find_close_small_pairs, is_connected, ComponentSummary,
};
pub use counting::{
    charge_of, counting_field, global_counting_function, local_probe, nearest_grid_point, Charge,
    CountingField, CountingGeometry, GridPoint, LocalProbe,
};
pub use union_find::UnionFind;
