//! Empirical isotropic semivariograms and covariograms of scattered
//! samples.
//!
//! Pairs are assigned to distance classes of width `w`; the bin with index
//! `i` covers the half-open interval `(i*w, (i+1)*w]`. Pairs at distance 0
//! or beyond the maximum lag are left out, and empty bins are omitted from
//! the result.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::csvutil::{self, format_sig10};

#[derive(Debug, Error)]
pub enum VariogramError {
    #[error("bin width must be positive and finite, got {0}")]
    BadBinWidth(f64),
    #[error("max lag must be positive and finite, got {0}")]
    BadMaxLag(f64),
    #[error("need at least 2 points, got {0}")]
    FewPoints(usize),
    #[error("sample set contains a non-finite coordinate or value")]
    NonFinite,
    #[error("no pairs in range: every pairwise distance is 0 or exceeds the max lag")]
    NoPairsInRange,
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
}

/// One sampled location with its value. `x` is longitude and `y` latitude
/// when the samples are stations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplePoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// A labeled set of sample points.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub label: String,
    pub points: Vec<SamplePoint>,
}

/// One distance class of the empirical semivariogram.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LagBin {
    pub index: usize,
    pub pair_count: usize,
    pub mean_lag: f64,
    pub semivariance: f64,
}

/// Binned semivariance estimates, sorted by index, empty bins omitted.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalVariogram {
    pub bin_width: f64,
    pub max_lag: f64,
    pub label: String,
    pub bins: Vec<LagBin>,
}

/// One distance class of the empirical covariogram.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceBin {
    pub index: usize,
    pub pair_count: usize,
    pub mean_lag: f64,
    pub covariance: f64,
}

/// Binned covariance estimates plus the lag-zero variance.
#[derive(Debug, Clone, PartialEq)]
pub struct Covariogram {
    pub variance: f64,
    pub bins: Vec<CovarianceBin>,
}

/// Distance measure used when pairing points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Metric {
    /// Euclidean distance in the raw (x, y) degree plane. The default.
    #[default]
    DegreePlane,
    /// Great-circle kilometers, treating (x, y) as (lon, lat).
    GreatCircleKm,
}

impl Metric {
    pub fn distance(self, p: (f64, f64), q: (f64, f64)) -> f64 {
        match self {
            Metric::DegreePlane => pairwise_distance(p, q),
            Metric::GreatCircleKm => great_circle_km(p, q),
        }
    }
}

/// Euclidean distance between two (x, y) positions in the raw degree plane.
pub fn pairwise_distance(p: (f64, f64), q: (f64, f64)) -> f64 {
    let dx = p.0 - q.0;
    let dy = p.1 - q.1;
    (dx * dx + dy * dy).sqrt()
}

/// Great-circle distance in kilometers between two (lon, lat) positions.
pub fn great_circle_km(p: (f64, f64), q: (f64, f64)) -> f64 {
    const EARTH_RADIUS_KM: f64 = 6371.0;
    let (lon1, lat1) = (p.0.to_radians(), p.1.to_radians());
    let (lon2, lat2) = (q.0.to_radians(), q.1.to_radians());
    let half_dlat = (lat2 - lat1) / 2.0;
    let half_dlon = (lon2 - lon1) / 2.0;
    let a = half_dlat.sin().powi(2) + lat1.cos() * lat2.cos() * half_dlon.sin().powi(2);
    2.0 * EARTH_RADIUS_KM * a.sqrt().asin()
}

/// Bin index for a positive distance `d`: the bin covering `(i*w, (i+1)*w]`.
pub fn bin_index(d: f64, w: f64) -> usize {
    ((d / w).ceil() as usize).saturating_sub(1)
}

/// Estimates the semivariogram with the default degree-plane metric.
pub fn empirical_semivariogram(
    s: &SampleSet,
    bin_width: f64,
    max_lag: f64,
) -> Result<EmpiricalVariogram, VariogramError> {
    empirical_semivariogram_in(s, bin_width, max_lag, Metric::DegreePlane)
}

/// Estimates the semivariogram under the given metric: per bin, half the
/// mean squared value difference over the pairs falling in the bin, with
/// the bin lag reported as the mean pair distance.
pub fn empirical_semivariogram_in(
    s: &SampleSet,
    bin_width: f64,
    max_lag: f64,
    metric: Metric,
) -> Result<EmpiricalVariogram, VariogramError> {
    validate(s, bin_width, max_lag)?;
    let pts = &s.points;
    let mut acc: BTreeMap<usize, (usize, f64, f64)> = BTreeMap::new();
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            let d = metric.distance((pts[i].x, pts[i].y), (pts[j].x, pts[j].y));
            if d == 0.0 || d > max_lag {
                continue;
            }
            let dz = pts[i].z - pts[j].z;
            let slot = acc.entry(bin_index(d, bin_width)).or_insert((0, 0.0, 0.0));
            slot.0 += 1;
            slot.1 += d;
            slot.2 += dz * dz;
        }
    }
    if acc.is_empty() {
        return Err(VariogramError::NoPairsInRange);
    }
    let bins = acc
        .into_iter()
        .map(|(index, (n, sum_d, sum_sq))| LagBin {
            index,
            pair_count: n,
            mean_lag: sum_d / n as f64,
            semivariance: sum_sq / (2.0 * n as f64),
        })
        .collect();
    Ok(EmpiricalVariogram {
        bin_width,
        max_lag,
        label: s.label.clone(),
        bins,
    })
}

/// Estimates the covariogram: per bin, the mean product of deviations from
/// the sample mean, plus the lag-zero variance (denominator n).
pub fn empirical_covariogram(
    s: &SampleSet,
    bin_width: f64,
    max_lag: f64,
) -> Result<Covariogram, VariogramError> {
    validate(s, bin_width, max_lag)?;
    let pts = &s.points;
    let n = pts.len() as f64;
    let mean = pts.iter().map(|p| p.z).sum::<f64>() / n;
    let variance = pts.iter().map(|p| (p.z - mean).powi(2)).sum::<f64>() / n;
    let mut acc: BTreeMap<usize, (usize, f64, f64)> = BTreeMap::new();
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            let d = pairwise_distance((pts[i].x, pts[i].y), (pts[j].x, pts[j].y));
            if d == 0.0 || d > max_lag {
                continue;
            }
            let slot = acc.entry(bin_index(d, bin_width)).or_insert((0, 0.0, 0.0));
            slot.0 += 1;
            slot.1 += d;
            slot.2 += (pts[i].z - mean) * (pts[j].z - mean);
        }
    }
    if acc.is_empty() {
        return Err(VariogramError::NoPairsInRange);
    }
    let bins = acc
        .into_iter()
        .map(|(index, (count, sum_d, sum_prod))| CovarianceBin {
            index,
            pair_count: count,
            mean_lag: sum_d / count as f64,
            covariance: sum_prod / count as f64,
        })
        .collect();
    Ok(Covariogram { variance, bins })
}

/// Renders lag bins as `variogram.csv` content (`bin_index,N,h,V`).
pub fn variogram_to_csv(v: &EmpiricalVariogram) -> String {
    let mut out = String::from("bin_index,N,h,V\n");
    for b in &v.bins {
        out.push_str(&format!(
            "{},{},{},{}\n",
            b.index,
            b.pair_count,
            format_sig10(b.mean_lag),
            format_sig10(b.semivariance)
        ));
    }
    out
}

/// Parses `variogram.csv` content back into lag bins.
pub fn bins_from_csv(text: &str) -> Result<Vec<LagBin>, VariogramError> {
    csvutil::expect_header(text, "bin_index,N,h,V")
        .map_err(|msg| VariogramError::Malformed { line: 1, msg })?;
    let mut bins: Vec<LagBin> = Vec::new();
    for (line, raw) in csvutil::data_lines(text) {
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != 4 {
            return Err(VariogramError::Malformed {
                line,
                msg: format!("expected 4 fields, found {}", fields.len()),
            });
        }
        let index = parse_usize(fields[0], line, "bin index")?;
        let pair_count = parse_usize(fields[1], line, "pair count")?;
        if pair_count == 0 {
            return Err(VariogramError::Malformed {
                line,
                msg: "pair count must be at least 1".into(),
            });
        }
        let mean_lag = parse_f64(fields[2], line, "lag")?;
        let semivariance = parse_f64(fields[3], line, "semivariance")?;
        if let Some(last) = bins.last() {
            if index <= last.index {
                return Err(VariogramError::Malformed {
                    line,
                    msg: format!("bin index {index} not increasing"),
                });
            }
        }
        bins.push(LagBin {
            index,
            pair_count,
            mean_lag,
            semivariance,
        });
    }
    Ok(bins)
}

/// Renders a sample set as `x,y,z` CSV.
pub fn samples_to_csv(s: &SampleSet) -> String {
    let mut out = String::from("x,y,z\n");
    for p in &s.points {
        out.push_str(&format!("{},{},{}\n", p.x, p.y, p.z));
    }
    out
}

/// Parses `x,y,z` CSV into a sample set labeled `label`.
pub fn samples_from_csv(text: &str, label: &str) -> Result<SampleSet, VariogramError> {
    csvutil::expect_header(text, "x,y,z")
        .map_err(|msg| VariogramError::Malformed { line: 1, msg })?;
    let mut points = Vec::new();
    for (line, raw) in csvutil::data_lines(text) {
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != 3 {
            return Err(VariogramError::Malformed {
                line,
                msg: format!("expected 3 fields, found {}", fields.len()),
            });
        }
        points.push(SamplePoint {
            x: parse_f64(fields[0], line, "x")?,
            y: parse_f64(fields[1], line, "y")?,
            z: parse_f64(fields[2], line, "z")?,
        });
    }
    Ok(SampleSet {
        label: label.to_string(),
        points,
    })
}

fn validate(s: &SampleSet, bin_width: f64, max_lag: f64) -> Result<(), VariogramError> {
    if !(bin_width.is_finite() && bin_width > 0.0) {
        return Err(VariogramError::BadBinWidth(bin_width));
    }
    if !(max_lag.is_finite() && max_lag > 0.0) {
        return Err(VariogramError::BadMaxLag(max_lag));
    }
    if s.points.len() < 2 {
        return Err(VariogramError::FewPoints(s.points.len()));
    }
    if s.points
        .iter()
        .any(|p| !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite()))
    {
        return Err(VariogramError::NonFinite);
    }
    Ok(())
}

fn parse_usize(field: &str, line: usize, what: &str) -> Result<usize, VariogramError> {
    field
        .trim()
        .parse::<usize>()
        .map_err(|_| VariogramError::Malformed {
            line,
            msg: format!("bad {what} `{field}`"),
        })
}

fn parse_f64(field: &str, line: usize, what: &str) -> Result<f64, VariogramError> {
    let v = field
        .trim()
        .parse::<f64>()
        .map_err(|_| VariogramError::Malformed {
            line,
            msg: format!("bad {what} `{field}`"),
        })?;
    if !v.is_finite() {
        return Err(VariogramError::Malformed {
            line,
            msg: format!("non-finite {what} `{field}`"),
        });
    }
    Ok(v)
}
