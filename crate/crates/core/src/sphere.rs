//! Points on the unit sphere, samples, discrete measures and their moments.

use crate::error::{invalid, Error, Result};
use crate::linalg::SymMatrix;

/// Largest ambient dimension accepted anywhere in the crate.
pub const MAX_DIM: usize = 16;

/// Mean resultant lengths below this have no defined mean direction.
pub const MEAN_DIRECTION_FLOOR: f64 = 1e-14;

/// Default tolerance on `| ||v|| - 1 |` when ingesting nearly-unit vectors.
pub const INGEST_NORM_TOLERANCE: f64 = 1e-6;

/// A point on S^{d-1}. The coordinates are renormalized at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitVector(Vec<f64>);

impl UnitVector {
    /// Normalizes any finite nonzero vector onto the sphere.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        check_dim(coords.len())?;
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(invalid("vector has non-finite coordinates"));
        }
        let norm = l2_norm(&coords);
        if norm == 0.0 {
            return Err(invalid("the zero vector has no direction"));
        }
        Ok(Self(coords.into_iter().map(|c| c / norm).collect()))
    }

    /// Accepts vectors whose norm is within `tol` of one, then renormalizes.
    pub fn from_near_unit(coords: Vec<f64>, tol: f64) -> Result<Self> {
        let norm = l2_norm(&coords);
        if !norm.is_finite() || (norm - 1.0).abs() > tol {
            return Err(invalid(format!("vector norm {norm} is not within {tol} of 1")));
        }
        Self::new(coords)
    }

    /// `(cos θ, sin θ)`.
    pub fn from_angle(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self(vec![c, s])
    }

    pub fn basis(dim: usize, axis: usize) -> Result<Self> {
        check_dim(dim)?;
        if axis >= dim {
            return Err(invalid(format!("axis {axis} out of range for dimension {dim}")));
        }
        let mut v = vec![0.0; dim];
        v[axis] = 1.0;
        Ok(Self(v))
    }

    pub(crate) fn from_unit_unchecked(coords: Vec<f64>) -> Self {
        Self(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &UnitVector) -> f64 {
        dot(&self.0, &other.0)
    }

    pub fn antipode(&self) -> Self {
        Self(self.0.iter().map(|c| -c).collect())
    }

    /// Planar angle `atan2(y, x)`; only meaningful for d = 2.
    pub fn angle(&self) -> f64 {
        self.0[1].atan2(self.0[0])
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::UnsupportedDimension(dim));
    }
    Ok(())
}

fn check_common_dim<'a>(mut points: impl Iterator<Item = &'a UnitVector>) -> Result<usize> {
    let first = points
        .next()
        .ok_or_else(|| invalid("at least one point is required"))?
        .dim();
    for p in points {
        if p.dim() != first {
            return Err(Error::DimensionMismatch {
                expected: first,
                found: p.dim(),
            });
        }
    }
    Ok(first)
}

/// A nonempty ordered sample on a common sphere S^{d-1}.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    points: Vec<UnitVector>,
    dim: usize,
}

impl SampleSet {
    pub fn new(points: Vec<UnitVector>) -> Result<Self> {
        let dim = check_common_dim(points.iter())?;
        Ok(Self { points, dim })
    }

    /// Planar sample from angles in radians.
    pub fn from_angles(angles: &[f64]) -> Result<Self> {
        Self::new(angles.iter().map(|&a| UnitVector::from_angle(a)).collect())
    }

    pub fn points(&self) -> &[UnitVector] {
        &self.points
    }

    pub fn into_points(self) -> Vec<UnitVector> {
        self.points
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// A probability measure made of weighted point masses on S^{d-1}.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    atoms: Vec<(UnitVector, f64)>,
    dim: usize,
}

impl DiscreteMeasure {
    /// Weights must be nonnegative and sum to one within 1e-12.
    pub fn new(atoms: Vec<(UnitVector, f64)>) -> Result<Self> {
        let dim = check_common_dim(atoms.iter().map(|(p, _)| p))?;
        if atoms.iter().any(|(_, w)| !w.is_finite() || *w < 0.0) {
            return Err(invalid("measure weights must be finite and nonnegative"));
        }
        let total: f64 = atoms.iter().map(|(_, w)| w).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("measure weights sum to {total}, not 1")));
        }
        Ok(Self { atoms, dim })
    }

    /// Rescales arbitrary nonnegative weights to a probability measure.
    pub fn from_unnormalized(points: Vec<UnitVector>, weights: &[f64]) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(invalid("one weight per point is required"));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(invalid("weights must have a positive finite sum"));
        }
        Self::new(points.into_iter().zip(weights.iter().map(|w| w / total)).collect())
    }

    /// The normalized counting measure of a sample.
    pub fn counting(sample: &SampleSet) -> Self {
        let w = 1.0 / sample.len() as f64;
        Self {
            atoms: sample.points().iter().map(|p| (p.clone(), w)).collect(),
            dim: sample.dim(),
        }
    }

    pub fn atoms(&self) -> &[(UnitVector, f64)] {
        &self.atoms
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }
}

/// First and second moments of a sample or measure.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSummary {
    pub mean: Vec<f64>,
    pub resultant_length: f64,
    /// Absent when the resultant length is below [`MEAN_DIRECTION_FLOOR`].
    pub mean_direction: Option<UnitVector>,
    /// Fisher (scatter) matrix, the second-moment matrix of the measure.
    pub scatter: SymMatrix,
}

fn weighted_moments<'a>(dim: usize, atoms: impl Iterator<Item = (&'a [f64], f64)>) -> MomentSummary {
    let mut mean = vec![0.0; dim];
    let mut scatter = SymMatrix::zeros(dim);
    for (x, w) in atoms {
        for (m, xi) in mean.iter_mut().zip(x) {
            *m += w * xi;
        }
        scatter.add_outer(x, w);
    }
    let resultant_length = l2_norm(&mean);
    let mean_direction = (resultant_length >= MEAN_DIRECTION_FLOOR)
        .then(|| UnitVector::from_unit_unchecked(mean.iter().map(|m| m / resultant_length).collect()));
    MomentSummary {
        mean,
        resultant_length,
        mean_direction,
        scatter,
    }
}

/// Mean, resultant length, mean direction and scatter matrix of a sample.
///
/// Uses the same accumulation as [`measure_moments`] with weights `1/n`, so
/// the two agree bit for bit on the same point list.
pub fn moment_summary(sample: &SampleSet) -> MomentSummary {
    let w = 1.0 / sample.len() as f64;
    weighted_moments(sample.dim(), sample.points().iter().map(|p| (p.coords(), w)))
}

pub fn measure_moments(mu: &DiscreteMeasure) -> MomentSummary {
    weighted_moments(mu.dim(), mu.atoms().iter().map(|(p, w)| (p.coords(), *w)))
}

/// Frobenius distance between the second-moment matrix and `I/d`.
pub fn moment_deviation(mu: &DiscreteMeasure) -> f64 {
    let d = mu.dim();
    let moments = measure_moments(mu);
    moments
        .scatter
        .sub(&SymMatrix::identity(d).scaled(1.0 / d as f64))
        .frobenius_norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn v(c: &[f64]) -> UnitVector {
        UnitVector::new(c.to_vec()).unwrap()
    }

    #[test]
    fn unit_vector_construction() {
        let u = v(&[3.0, 4.0]);
        assert!((u.coords()[0] - 0.6).abs() < 1e-15);
        assert!(UnitVector::new(vec![0.0, 0.0]).is_err());
        assert!(UnitVector::new(vec![]).is_err());
        assert!(UnitVector::new(vec![1.0; 17]).is_err());
        assert!(UnitVector::from_near_unit(vec![1.0 + 5e-7, 0.0], 1e-6).is_ok());
        assert!(UnitVector::from_near_unit(vec![1.1, 0.0], 1e-6).is_err());
    }

    #[test]
    fn sample_rejects_mixed_dimensions() {
        let err = SampleSet::new(vec![v(&[1.0, 0.0]), v(&[1.0, 0.0, 0.0])]).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { expected: 2, found: 3 });
        assert!(SampleSet::new(vec![]).is_err());
    }

    #[test]
    fn single_point_moments() {
        let s = SampleSet::new(vec![v(&[1.0, 0.0])]).unwrap();
        let m = moment_summary(&s);
        assert_eq!(m.mean, vec![1.0, 0.0]);
        assert_eq!(m.resultant_length, 1.0);
        assert_eq!(m.scatter, SymMatrix::from_rows(&[&[1.0, 0.0], &[0.0, 0.0]]));
        assert_eq!(m.mean_direction.unwrap().coords(), &[1.0, 0.0]);
    }

    #[test]
    fn antipodal_pair_has_no_mean_direction() {
        let s = SampleSet::new(vec![v(&[1.0, 0.0]), v(&[-1.0, 0.0])]).unwrap();
        let m = moment_summary(&s);
        assert_eq!(m.resultant_length, 0.0);
        assert!(m.mean_direction.is_none());
        assert_eq!(m.scatter, SymMatrix::from_rows(&[&[1.0, 0.0], &[0.0, 0.0]]));
    }

    #[test]
    fn orthonormal_pair() {
        let s = SampleSet::new(vec![v(&[1.0, 0.0]), v(&[0.0, 1.0])]).unwrap();
        let m = moment_summary(&s);
        assert_eq!(m.mean, vec![0.5, 0.5]);
        assert!((m.resultant_length - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(m.scatter, SymMatrix::from_rows(&[&[0.5, 0.0], &[0.0, 0.5]]));
    }

    #[test]
    fn weighted_measure_moments() {
        let mu = DiscreteMeasure::new(vec![(v(&[1.0, 0.0]), 0.75), (v(&[0.0, 1.0]), 0.25)]).unwrap();
        let m = measure_moments(&mu);
        assert_eq!(m.mean, vec![0.75, 0.25]);
        assert_eq!(m.scatter, SymMatrix::from_rows(&[&[0.75, 0.0], &[0.0, 0.25]]));
        let point = DiscreteMeasure::new(vec![(v(&[1.0, 0.0]), 1.0)]).unwrap();
        assert_eq!(measure_moments(&point).mean, vec![1.0, 0.0]);
    }

    #[test]
    fn measure_validation() {
        assert!(DiscreteMeasure::new(vec![(v(&[1.0, 0.0]), 0.5)]).is_err());
        assert!(DiscreteMeasure::new(vec![(v(&[1.0, 0.0]), 1.5), (v(&[0.0, 1.0]), -0.5)]).is_err());
        let mu = DiscreteMeasure::from_unnormalized(vec![v(&[1.0, 0.0]), v(&[0.0, 1.0])], &[3.0, 1.0]).unwrap();
        assert_eq!(mu.atoms()[0].1, 0.75);
    }

    #[test]
    fn moment_deviation_examples() {
        let pair = DiscreteMeasure::new(vec![(v(&[1.0, 0.0]), 0.5), (v(&[0.0, 1.0]), 0.5)]).unwrap();
        assert_eq!(moment_deviation(&pair), 0.0);
        let point = DiscreteMeasure::new(vec![(v(&[1.0, 0.0]), 1.0)]).unwrap();
        assert!((moment_deviation(&point) - 0.5f64.sqrt()).abs() < 1e-15);
        let tri = SampleSet::from_angles(&[0.0, PI / 3.0, 2.0 * PI / 3.0]).unwrap();
        assert!(moment_deviation(&DiscreteMeasure::counting(&tri)) < 1e-15);
    }
}
