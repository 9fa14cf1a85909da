//! Non-parametric proportional-risk (NPPR) estimation for two-group
//! time-to-event data.
//!
//! The crate estimates a constant relative risk `RR = F1(t) / F0(t)` from
//! right-censored data without assuming a parametric form for either CDF,
//! derives risk-difference and number-needed-to-treat curves, and provides
//! percentile-bootstrap intervals. A parametric competitor based on the
//! exponentiated-uniform distribution, a two-group Cox fit, and a
//! Monte-Carlo harness for comparing the estimators are included.
//!
//! ```
//! use nppr::{estimator, validate_dataset};
//!
//! let data = validate_dataset([
//!     (1.0, 1, 1), (3.0, 1, 1), (4.0, 0, 1), (6.0, 1, 1),
//!     (1.0, 1, 0), (2.0, 1, 0), (3.0, 1, 0), (5.0, 0, 0),
//! ])
//! .unwrap();
//! let fit = estimator::estimate(&data).unwrap();
//! assert_eq!(fit.rr, (-fit.beta).exp());
//! ```

pub mod bootstrap;
pub mod data;
pub mod error;
pub mod estimator;
pub mod io;
pub mod km;
pub mod parametric;
pub mod quadrature;
pub mod rng;
pub mod sim;
pub mod study;

pub use bootstrap::{percentile_bootstrap, BootstrapConfig, BootstrapResult, ConfidenceInterval};
pub use data::{validate_dataset, Dataset, Group, Observation, RawRecord};
pub use error::{EstimationFailure, Error, Result};
pub use estimator::{analyze, analyze_with, NpprAnalysis, NpprEstimate, VarianceScale};
pub use km::{cdf_at, kaplan_meier, SurvivalCurve};
