//! Time-domain detectors for unstable and positive eigenvalues, the
//! limiting-amplitude computation and adjudication against the oracle.

mod amplitude;
mod embedded;
mod growth;
mod verdict;

pub use amplitude::{
    amplitude_closed_form, amplitude_from_trajectory, limiting_amplitude, AmplitudeGuard, AmplitudeResult,
};
pub use embedded::{
    detect_embedded, detect_embedded_on, fit_tail, DetectedMode, EmbeddedDetection, EmbeddedOptions, KGrid, ScanRow,
    ZeroFrequencyRow,
};
pub use growth::{default_eps_growth, growth_rate, GrowthEstimate, GrowthVerdict, DEFAULT_WINDOW_FRAC};
pub use verdict::{
    adjudicate, detect_unstable, stability_from_trajectory, DetectionVerdict, OracleAgreement, OracleFacts,
    StabilityReport,
};
