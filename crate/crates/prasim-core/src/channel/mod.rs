//! Geometry, mobility, large-scale gain traces, and small-scale fading.

mod fading;
mod geometry;
mod mobility;
mod trace;

pub use fading::{derived_rng, mix_key, FadingSampler, StreamKind};
pub use geometry::{pathloss_db, Geometry};
pub use mobility::{
    build_transition_matrix, extrapolate_mobility, sample_mobility, MobilityTrace, VelocityChain,
};
pub use trace::{
    export_traces, import_traces, large_scale_trace, median_gain, predict_trace, LargeScaleTrace,
    TraceKind,
};

#[derive(Debug, thiserror::Error)]
pub enum ChannelError {
    #[error("invalid velocity chain: {0}")]
    InvalidChain(String),
    #[error("trace format error: {0}")]
    TraceFormat(String),
}
