//! Entropy ladders, exact trajectory enumeration and escape estimators.

mod enumerate;
mod escape;
mod induced;
mod ladder;
mod sample;

pub use enumerate::{
    coarse_entropy, coarse_entropy_given_endpoint, conditional_entropy, enumerate_trajectories, view_entropy,
    PartitionView, Trajectory, TrajectoryEnumeration, TrajectoryRecord, DEFAULT_ENUMERATION_CAP,
};
pub use escape::{
    describe, exact_escape_drifted_z, exact_escape_z2, hoeffding_bound, return_probabilities_z, rigorous_escape,
    translation_subgroup_image, DriftBound, EscapeEstimate, EscapeMethod, SeriesEscape,
};
pub use induced::{induced_measure_on_subgroup, InducedMeasure};
pub use ladder::{entropy_ladder, free_group_srw_ladder, EntropyLadder, InvariantReport, LadderRow};
pub use sample::{mc_escape, mc_escape_nested, range_rate, sample_walk, stream, StepSampler, Z95};
