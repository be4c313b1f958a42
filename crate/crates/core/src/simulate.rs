//! Seeded simulation of intrinsic random fields with a linear variogram.
//!
//! Points are scattered uniformly over a rectangle and the field is drawn
//! from a Gaussian process whose increments satisfy Var(Z(p) - Z(q)) =
//! 2 (c0 + b d(p, q)) for p != q. The process itself is only defined up to
//! a constant, so it is pinned to zero variance at the domain's lower-left
//! corner.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::variogram::{pairwise_distance, SamplePoint, SampleSet};

/// Hard cap on simulated points; the covariance factorization is dense.
pub const MAX_POINTS: usize = 2048;

const JITTER: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum SimulateError {
    #[error("need at least 3 points to simulate")]
    FewPoints,
    #[error("at most {MAX_POINTS} points can be simulated")]
    TooManyPoints,
    #[error("slope and nugget must be finite and non-negative")]
    BadParameters,
    #[error("invalid domain: {0}")]
    BadDomain(String),
    #[error("covariance matrix is not positive definite")]
    NotPositiveDefinite,
}

/// Axis-aligned sampling rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Domain {
    fn validate(&self) -> Result<(), SimulateError> {
        let vals = [self.x_min, self.x_max, self.y_min, self.y_max];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(SimulateError::BadDomain(
                "coordinates must be finite".into(),
            ));
        }
        if self.x_max < self.x_min || self.y_max < self.y_min {
            return Err(SimulateError::BadDomain(format!(
                "empty rectangle [{}, {}] x [{}, {}]",
                self.x_min, self.x_max, self.y_min, self.y_max
            )));
        }
        Ok(())
    }
}

/// Everything that determines one simulated sample set.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSpec {
    pub n_points: usize,
    pub domain: Domain,
    pub slope: f64,
    pub nugget: f64,
    pub seed: u64,
}

/// Covariance of the pinned intrinsic process over the given coordinates:
/// with gamma(d) = slope * d and o the pinning origin,
/// K[i][j] = gamma(d(i, o)) + gamma(d(j, o)) - gamma(d(i, j)).
pub fn intrinsic_covariance(
    coords: &[(f64, f64)],
    origin: (f64, f64),
    slope: f64,
) -> Vec<Vec<f64>> {
    let gamma = |d: f64| slope * d;
    let n = coords.len();
    let mut cov = vec![vec![0.0; n]; n];
    for i in 0..n {
        let gio = gamma(pairwise_distance(coords[i], origin));
        for j in 0..n {
            let gjo = gamma(pairwise_distance(coords[j], origin));
            let gij = gamma(pairwise_distance(coords[i], coords[j]));
            cov[i][j] = gio + gjo - gij;
        }
    }
    cov
}

/// Lower-triangular Cholesky factor of a symmetric matrix, with a small
/// diagonal jitter to absorb rounding.
fn cholesky(mut m: Vec<Vec<f64>>) -> Result<Vec<Vec<f64>>, SimulateError> {
    let n = m.len();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] += JITTER;
    }
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let dot: f64 = l[i][..j].iter().zip(&l[j][..j]).map(|(a, b)| a * b).sum();
            let sum = m[i][j] - dot;
            if i == j {
                if !(sum.is_finite() && sum > 0.0) {
                    return Err(SimulateError::NotPositiveDefinite);
                }
                l[i][j] = sum.sqrt();
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    Ok(l)
}

fn mat_vec_lower(l: &[Vec<f64>], g: &[f64]) -> Vec<f64> {
    l.iter()
        .enumerate()
        .map(|(i, row)| (0..=i).map(|k| row[k] * g[k]).sum())
        .collect()
}

/// Draws one seeded sample set. The same spec always produces bit-identical
/// output: point coordinates first (x then y per point), then the field
/// normals, then one extra normal per point when a nugget is present.
pub fn simulate_linear_field(spec: &FieldSpec) -> Result<SampleSet, SimulateError> {
    if spec.n_points < 3 {
        return Err(SimulateError::FewPoints);
    }
    if spec.n_points > MAX_POINTS {
        return Err(SimulateError::TooManyPoints);
    }
    if !(spec.slope.is_finite() && spec.slope >= 0.0)
        || !(spec.nugget.is_finite() && spec.nugget >= 0.0)
    {
        return Err(SimulateError::BadParameters);
    }
    spec.domain.validate()?;

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let d = spec.domain;
    let coords: Vec<(f64, f64)> = (0..spec.n_points)
        .map(|_| {
            let x = d.x_min + (d.x_max - d.x_min) * rng.gen::<f64>();
            let y = d.y_min + (d.y_max - d.y_min) * rng.gen::<f64>();
            (x, y)
        })
        .collect();

    let z = if spec.slope == 0.0 && spec.nugget == 0.0 {
        vec![0.0; spec.n_points]
    } else {
        let cov = intrinsic_covariance(&coords, (d.x_min, d.y_min), spec.slope);
        let l = cholesky(cov)?;
        let g: Vec<f64> = (0..spec.n_points)
            .map(|_| rng.sample(StandardNormal))
            .collect();
        let mut z = mat_vec_lower(&l, &g);
        if spec.nugget > 0.0 {
            let sd = spec.nugget.sqrt();
            for zi in z.iter_mut() {
                let e: f64 = rng.sample(StandardNormal);
                *zi += sd * e;
            }
        }
        z
    };

    let points = coords
        .into_iter()
        .zip(z)
        .map(|((x, y), z)| SamplePoint { x, y, z })
        .collect();
    Ok(SampleSet {
        label: format!("sim-{}", spec.seed),
        points,
    })
}
