//! Phases, resonant sets and cutoff partitions.

mod cutoff;
mod phase;
mod sets;

pub use cutoff::{
    ball, build_cutoffs, default_widths, ibp_residual, lattice_sample, partition_defect, support_lower_bounds, time_ibp_residual,
    CutoffFamily, NeighborhoodCutoff, SupportBounds, DEFAULT_DELTA, DEFAULT_DELTA_CUBIC, NEIGHBORHOOD_WIDTH,
};
pub use phase::{check_null_identity, null_identity_residual, inner_grad, phase_eval, phase_grad, PhaseSpec, Var};
pub use sets::{cone_distance, resonant_sets, Classifier, ConeDistance, ResonantSets, SearchBox, SetDistances, SetKind, SliceForm};
