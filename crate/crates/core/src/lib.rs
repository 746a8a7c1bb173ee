//! Growth rates, dichotomy certificates, spectra and hull probes for linear
//! nonautonomous ODEs `x' = A(t) x`.
//!
//! The crate computes with *generalized* growth rates — exponential,
//! polynomial, sub- and superexponential — entirely in log-space:
//!
//! - [`rate`] builds growth rates, their translations and powers;
//!   [`compare`] decides weak/strong comparisons, slow/fast classification
//!   and translated-rate limits by expanding-window sweeps.
//! - [`system`] and [`evolution`] represent coefficients `A(t)` with their
//!   evolution operators, translations `A(t + tau)` and `(mu, gamma)`-shifts,
//!   backed by exact catalog antiderivatives or numeric integration.
//! - [`dichotomy`] verifies, fits and propagates dichotomy and
//!   bounded-growth certificates and probes the stable/unstable/bounded
//!   subbundles.
//! - [`spectrum`] estimates dichotomy spectra of scalar/diagonal systems via
//!   Bohl-type exponents of shifted systems, with a resolvent cross-check.
//! - [`hull`] probes translation orbits for limit equations and classifies
//!   limit behavior, cross-checking every theorem-level prediction against
//!   numerics and reporting disagreements as falsifications.

pub mod compare;
pub mod dichotomy;
pub mod error;
pub mod evolution;
pub mod grid;
pub mod hull;
pub mod rate;
pub mod spectrum;
pub mod system;

pub use compare::{
    classify, compare_strong, compare_weak, dyadic_schedule, translated_limit_probe,
    ComparisonVerdict, ExponentGrid, RateClass, Relation, TranslatedLimit,
};
pub use dichotomy::{
    fit_minimal_k, propagate_dichotomy, propagate_growth, subbundle_probe, verify_dichotomy,
    verify_growth, DichotomyCertificate, FitExponents, FitReport, GrowthCertificate, Projector,
    SubbundleReport, VerificationReport,
};
pub use error::{CoreError, CoreResult};
pub use evolution::{EvolutionOperator, Method};
pub use grid::{PairGrid, WindowSchedule};
pub use hull::{
    bounded_solutions_probe, classify_limit_behavior, pointwise_limit_probe,
    uniform_local_integrability, ClassifyConfig, HullCertificates, LimitClassification,
    LimitPrediction, LimitProbeReport, LimitVerdict, OrbitProbe, UliReport,
};
pub use rate::{eval_log, translate, GrowthRate};
pub use spectrum::{
    bohl_exponents, estimate_spectrum, resolvent_test, BohlExponents, ExtendedReal,
    ResolventReport, SpectralInterval, SpectrumEstimate,
};
pub use system::{
    shift_system, translate_system, ClosedForm, Coefficient, LinearSystem, ScalarChannel,
    ScalarKind, ScalarTable,
};
