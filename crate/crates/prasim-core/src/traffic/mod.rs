//! VoD video traces, real-time arrivals, effective bandwidth, and QoS
//! exponent solving.

mod rt;
mod video;

pub use rt::{
    effective_bandwidth, sample_arrivals, solve_qos_exponent, QoSExponent, QoSSpec, RTArrivalSpec,
    SlotArrivals,
};
pub use video::{
    export_video_trace, import_video_trace, reduce_quality, VideoGenerator, VideoTrace,
    ENHANCEMENT_LAYERS,
};

#[derive(Debug, thiserror::Error)]
pub enum TrafficError {
    #[error("invalid traffic spec: {0}")]
    InvalidSpec(String),
    #[error("MGF diverges: theta = {theta} >= lambda_u = {lambda_u}")]
    MgfDiverges { theta: f64, lambda_u: f64 },
    #[error("no QoS exponent below lambda_u = {lambda_u}")]
    QosInfeasible { lambda_u: f64 },
    #[error("video trace format error: {0}")]
    TraceFormat(String),
}
