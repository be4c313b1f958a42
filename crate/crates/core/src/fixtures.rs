//! Bundled reference data: the station catalog, ENSO phases, and the
//! published variogram, percentage, and classification tables the test
//! suite reproduces.

/// Station catalog (`code,name,lat,lon,network`).
pub const STATIONS: &str = include_str!("../fixtures/stations.csv");

/// ENSO phase per year (`year,phase`).
pub const ENSO_PHASES: &str = include_str!("../fixtures/enso.csv");

/// Reference empirical variogram (`bin_index,N,h,V`).
pub const REFERENCE_VARIOGRAM: &str = include_str!("../fixtures/reference_variogram.csv");

/// Reference percent-variance-explained table
/// (`year,n_obs,maxi_01..maxi_05,diam_01..diam_05`).
pub const REFERENCE_PERCENTAGES: &str = include_str!("../fixtures/reference_percentages.csv");

/// Reference coherence classification (`year,phase,category`).
pub const REFERENCE_CLASSES: &str = include_str!("../fixtures/reference_classes.csv");
