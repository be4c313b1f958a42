//! Weighted least-squares fit of the linear variogram model V = c0 + b·h,
//! with the percent of bin variance the line explains.

use thiserror::Error;

use crate::csvutil::{self, format_sig10};
use crate::extremes::Variable;
use crate::variogram::EmpiricalVariogram;

#[derive(Debug, Error)]
pub enum ModelFitError {
    #[error("need at least 3 bins, got {0}")]
    FewBins(usize),
    #[error("degenerate design: all bins share one lag")]
    DegenerateDesign,
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
}

/// The fitted line V = c0 + b·h together with its fit quality.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearVariogramFit {
    /// Nugget c0. May come out negative; it is reported as-is.
    pub intercept: f64,
    /// Slope b in semivariance per distance unit.
    pub slope: f64,
    /// Percent of bin variance explained, clamped to [0, 100].
    pub pct_explained: f64,
    pub n_bins: usize,
    pub weighted: bool,
    /// Set when the fitted nugget is negative.
    pub warning: Option<String>,
}

/// Fits the line by weighted least squares. With `weighted`, bins count in
/// proportion to their pair counts (normalized to mean weight 1); otherwise
/// every bin counts equally.
pub fn fit_linear(
    v: &EmpiricalVariogram,
    weighted: bool,
) -> Result<LinearVariogramFit, ModelFitError> {
    let bins = &v.bins;
    if bins.len() < 3 {
        return Err(ModelFitError::FewBins(bins.len()));
    }
    let first_lag = bins[0].mean_lag;
    if bins.iter().all(|b| b.mean_lag == first_lag) {
        return Err(ModelFitError::DegenerateDesign);
    }
    let weights = bin_weights(v, weighted);
    let (mut sw, mut swh, mut swh2, mut swv, mut swhv) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (b, &w) in bins.iter().zip(&weights) {
        sw += w;
        swh += w * b.mean_lag;
        swh2 += w * b.mean_lag * b.mean_lag;
        swv += w * b.semivariance;
        swhv += w * b.mean_lag * b.semivariance;
    }
    let det = sw * swh2 - swh * swh;
    if det == 0.0 {
        return Err(ModelFitError::DegenerateDesign);
    }
    let slope = (sw * swhv - swh * swv) / det;
    let intercept = (swv - slope * swh) / sw;
    let warning = (intercept < 0.0).then(|| format!("negative nugget {intercept}"));
    let mut fit = LinearVariogramFit {
        intercept,
        slope,
        pct_explained: 0.0,
        n_bins: bins.len(),
        weighted,
        warning,
    };
    fit.pct_explained = percent_variance_explained(v, &fit);
    Ok(fit)
}

/// Percent of bin variance explained by the fitted line: one minus the
/// ratio of residual to total mean square (degrees of freedom n-2 and n-1),
/// scaled to percent and clamped to [0, 100]. A flat variogram (zero total
/// sum of squares) yields 0 by convention.
pub fn percent_variance_explained(v: &EmpiricalVariogram, fit: &LinearVariogramFit) -> f64 {
    let weights = bin_weights(v, fit.weighted);
    let n = v.bins.len() as f64;
    let sw: f64 = weights.iter().sum();
    let mean_v = v
        .bins
        .iter()
        .zip(&weights)
        .map(|(b, &w)| w * b.semivariance)
        .sum::<f64>()
        / sw;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for (b, &w) in v.bins.iter().zip(&weights) {
        let r = b.semivariance - (fit.intercept + fit.slope * b.mean_lag);
        ss_res += w * r * r;
        let t = b.semivariance - mean_v;
        ss_tot += w * t * t;
    }
    if ss_tot == 0.0 {
        return 0.0;
    }
    let ratio = (ss_res / (n - 2.0)) / (ss_tot / (n - 1.0));
    (100.0 * (1.0 - ratio)).clamp(0.0, 100.0)
}

fn bin_weights(v: &EmpiricalVariogram, weighted: bool) -> Vec<f64> {
    if weighted {
        let n = v.bins.len() as f64;
        let total: f64 = v.bins.iter().map(|b| b.pair_count as f64).sum();
        v.bins
            .iter()
            .map(|b| b.pair_count as f64 * n / total)
            .collect()
    } else {
        vec![1.0; v.bins.len()]
    }
}

/// One row of `fits.csv`: a fit tagged with its analysis cell.
#[derive(Debug, Clone, PartialEq)]
pub struct FitRecord {
    pub year: i32,
    pub variable: Variable,
    pub k: u32,
    pub fit: LinearVariogramFit,
}

/// Renders fit records as `fits.csv` content
/// (`year,variable,k,n_bins,c0,b,pct,weighted`).
pub fn fits_to_csv(records: &[FitRecord]) -> String {
    let mut out = String::from("year,variable,k,n_bins,c0,b,pct,weighted\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.year,
            r.variable.as_str(),
            r.k,
            r.fit.n_bins,
            format_sig10(r.fit.intercept),
            format_sig10(r.fit.slope),
            format_sig10(r.fit.pct_explained),
            r.fit.weighted
        ));
    }
    out
}

/// Parses `fits.csv` content.
pub fn fits_from_csv(text: &str) -> Result<Vec<FitRecord>, ModelFitError> {
    csvutil::expect_header(text, "year,variable,k,n_bins,c0,b,pct,weighted")
        .map_err(|msg| ModelFitError::Malformed { line: 1, msg })?;
    let mut out = Vec::new();
    for (line, raw) in csvutil::data_lines(text) {
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != 8 {
            return Err(ModelFitError::Malformed {
                line,
                msg: format!("expected 8 fields, found {}", fields.len()),
            });
        }
        let bad = |what: &str, field: &str| ModelFitError::Malformed {
            line,
            msg: format!("bad {what} `{field}`"),
        };
        let year = fields[0]
            .trim()
            .parse::<i32>()
            .map_err(|_| bad("year", fields[0]))?;
        let variable =
            Variable::parse(fields[1].trim()).ok_or_else(|| bad("variable", fields[1]))?;
        let k = fields[2]
            .trim()
            .parse::<u32>()
            .map_err(|_| bad("window", fields[2]))?;
        let n_bins = fields[3]
            .trim()
            .parse::<usize>()
            .map_err(|_| bad("bin count", fields[3]))?;
        let intercept = fields[4]
            .trim()
            .parse::<f64>()
            .map_err(|_| bad("c0", fields[4]))?;
        let slope = fields[5]
            .trim()
            .parse::<f64>()
            .map_err(|_| bad("b", fields[5]))?;
        let pct_explained = fields[6]
            .trim()
            .parse::<f64>()
            .map_err(|_| bad("pct", fields[6]))?;
        let weighted = match fields[7].trim() {
            "true" => true,
            "false" => false,
            other => return Err(bad("weighted flag", other)),
        };
        out.push(FitRecord {
            year,
            variable,
            k,
            fit: LinearVariogramFit {
                intercept,
                slope,
                pct_explained,
                n_bins,
                weighted,
                warning: None,
            },
        });
    }
    Ok(out)
}
