//! Operators, drive pulses, collapse channels and the Liouvillian.

mod liouvillian;
mod pulse;
mod system;

pub use liouvillian::{liouvillian_at, Generator, Liouvillian};
pub use pulse::{default_center, sigma_from_fwhm, PulseEnvelope};
pub use system::{
    add_dephasing, build_ladder, build_lambda, build_two_level, split_emission, CollapseChannel, Rate, SourceSystem,
};
