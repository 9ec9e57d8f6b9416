//! Scaling experiments and the detectors for the comb and spiral
//! configurations.

pub mod scaling;
pub mod spiral;
pub mod tube;

pub use scaling::{
    heat_kernel_scaling_experiment, heat_kernel_table, volume_profile, volume_scaling_experiment, volume_table,
    HeatKernelRow, HeatKernelScaling, VolumeRow, VolumeScaling,
};
pub use spiral::{spiral_box_sequence, BoxSequence};
pub use tube::{a1_frequency, event_a, tube_event_check, BoxEvents, EventFlags, EventFrequency, Flag, TubeEventParams, TubeGeometry};
