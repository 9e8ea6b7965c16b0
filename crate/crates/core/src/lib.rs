pub mod discovery;
pub mod distributions;
pub mod error;
pub mod event_log;
pub mod time;
pub mod simulation;
pub mod metrics;
pub mod synth;
pub mod pipeline;
