//! Read-out corruption, finite-shot sampling and mixture-model bias
//! estimation.

mod mixture;
mod readout;
mod sampling;

pub use mixture::{estimate_bias, histogram_mode, MixtureFit, MIN_SAMPLES};
pub use readout::{btilde, DeviceReadout, ReadoutModel, DEVICES};
pub use sampling::{sample_counts, sample_counts_with};
