//! Weak coupling of a position projector to the polarization pointer,
//! momentum post-selection, and readout of the complex weak value.

mod coupling;
mod discrete;
mod oracle;
mod pointer;
mod postselect;
mod readout;
mod scan;

pub use coupling::{couple, CouplingConfig, JointState};
pub use discrete::{discrete_profile, discrete_weak_value, reconstruct_discrete};
pub use oracle::{oracle_full_simulation, oracle_scan, ORACLE_MAX_POINTS};
pub use pointer::PointerState;
pub use postselect::{postselect_pointer, PostSelection, Postselector};
pub use readout::{pointer_readout, readout_from_expectations, ROTATION_GAIN};
pub use scan::{
    analytic_profile, analytic_weak_value, scan_weak_values, scan_weak_values_with, BinFlag, ScanSettings,
    WeakValueProfile,
};
