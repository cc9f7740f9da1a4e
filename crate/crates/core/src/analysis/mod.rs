//! Decay-rate measurement, theoretical rates, and diagnostics.

pub mod catalog;
pub mod fit;
pub mod oracle;
pub mod probes;
pub mod splitting;

pub use catalog::{catalog_rate, interpolated_rate, optimal_rate, RateCatalogEntry, TheoremId};
pub use fit::{fit_decay, log_spaced, loglog_fit};
pub use oracle::{f_m, linear_decay_oracle, RadialSpectrum};
pub use probes::{decay_report, interpolation_check, nonlinear_spectrum_bound_probe, DecayReport};
pub use splitting::{splitting_report, SplittingReport};
