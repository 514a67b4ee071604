//! Independent verification machinery: feasible-factor sampling, simulators
//! that record the factor values behind every trajectory, brute-force
//! membership for small sets, an interval-arithmetic baseline and 2-D
//! projection geometry.

mod geometry;
mod interval;
mod membership;
mod random;
mod sample;
mod simulate;

pub use geometry::{boundary_cloud, convex_hull, hull_area, polygon_area};
pub use interval::{
    box_area, interval_baseline_poly, interval_enclosure, interval_matrix, Interval,
};
pub use membership::{
    membership_bruteforce, membership_bruteforce_matrix, membership_bruteforce_with, GridConfig,
};
pub use random::{random_assignment, random_cpmz, random_cpz, InstanceSpec};
pub use sample::{sample_feasible, sample_feasible_with, sample_uniform, SamplerConfig};
pub use simulate::{
    noise_witness, record_trajectories, replay, simulate, simulate_lti, simulate_poly,
    simulate_run, witness_error, RecordedData, StepWitness, WitnessTrace,
};
