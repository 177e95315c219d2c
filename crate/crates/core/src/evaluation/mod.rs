//! Image-quality metrics and the benign / adversarial / transformed
//! evaluation protocol.

mod metrics;
mod protocol;

pub use metrics::{gaussian_window, nmse, ssim, SSIM_SIGMA, SSIM_WINDOW};
pub use protocol::{
    evaluate, evaluate_sample, Condition, EvalAttackTarget, EvalConfig, EvalReport, EvalSummary, MetricsRecord,
    ReportRow, SampleMetrics,
};
