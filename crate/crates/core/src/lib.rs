//! Geostatistics of annual precipitation extremes.
//!
//! The crate covers the full pipeline from daily station series to a
//! coherence classification of years:
//!
//! * [`ingest`] parses station catalogs, daily series, and ENSO phase
//!   tables, and filters station-years by completeness.
//! * [`extremes`] extracts the annual maximum k-day accumulation and its
//!   day of occurrence.
//! * [`variogram`] bins squared differences into empirical semivariograms
//!   and covariograms.
//! * [`modelfit`] fits a linear variogram by weighted least squares and
//!   scores it by percent of variance explained.
//! * [`coherence`] turns per-year fit percentages into spatial/temporal
//!   coherence categories and cross-tabulates them against ENSO phases.
//! * [`simulate`] draws seeded Gaussian fields with a prescribed linear
//!   variogram, used as a statistical oracle in the test suite.
//!
//! All estimators are deterministic: equal inputs produce bit-identical
//! output, and simulation is reproducible from a seed.

pub mod coherence;
mod csvutil;
pub mod extremes;
pub mod fixtures;
pub mod ingest;
pub mod modelfit;
pub mod simulate;
pub mod variogram;
