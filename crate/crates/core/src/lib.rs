//! Relative `(ε, δ)`-approximations for finite set systems: sampling,
//! exact verification, iterated halving, packings and chaining, plus a
//! Monte Carlo harness for measuring failure rates and calibrating constants.

pub mod bound;
pub mod chaining;
pub mod error;
pub mod generators;
pub mod halving;
pub mod harness;
pub mod packing;
pub mod range_space;
pub mod sampling;
pub mod seed;
pub mod set_system;
pub mod subset;

pub use error::{Error, Result};
pub use range_space::{IntervalSpace, RangeSpace, SetCount};
pub use sampling::{ApproxParams, Constants, ConstantsFile, Formula, ReplacementMode, Sample};
pub use set_system::{Reindex, SetSystem, VcDimension};
pub use subset::Subset;
