//! Nematic order of planar rods: the traceless matrix
//! `Q₂ = (2/n) Σ x_i x_iᵀ - I₂`, its nonnegative eigenvalue (the order
//! parameter λ) and eigenvector (the director), and a spatially local order
//! field evaluated on a grid.

use rayon::prelude::*;
use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::linalg::SymMatrix;
use crate::sphere::{moment_summary, SampleSet, UnitVector};
use crate::uniformity::bingham_test;

/// Order parameters below this leave the director undefined.
pub const ISOTROPIC_FLOOR: f64 = 1e-14;

pub const DEFAULT_MIN_COUNT: usize = 5;

/// A rod in the plane. The orientation is axial and stored in [0, π).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rod {
    position: [f64; 2],
    orientation: f64,
}

impl Rod {
    pub fn new(position: [f64; 2], orientation: f64) -> Self {
        Self {
            position,
            orientation: reduce_axial(orientation),
        }
    }

    pub fn position(&self) -> [f64; 2] {
        self.position
    }

    pub fn orientation(&self) -> f64 {
        self.orientation
    }
}

fn reduce_axial(theta: f64) -> f64 {
    let r = theta.rem_euclid(PI);
    // rem_euclid can round up to exactly π for tiny negative inputs.
    if r >= PI {
        0.0
    } else {
        r
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderResult {
    pub q2: SymMatrix,
    pub order_parameter: f64,
    /// Eigenvector of `+λ`, sign-fixed to a nonnegative first component
    /// (nonnegative second on ties). Absent in the isotropic state.
    pub director: Option<UnitVector>,
}

impl OrderResult {
    /// Director as an axial angle in [0, π).
    pub fn director_angle(&self) -> Option<f64> {
        self.director.as_ref().map(|d| reduce_axial(d.angle()))
    }
}

fn require_planar(sample: &SampleSet) -> Result<()> {
    if sample.dim() != 2 {
        return Err(Error::UnsupportedDimension(sample.dim()));
    }
    Ok(())
}

pub fn q2_matrix(sample: &SampleSet) -> Result<SymMatrix> {
    require_planar(sample)?;
    let mut q = moment_summary(sample).scatter.scaled(2.0);
    q[(0, 0)] -= 1.0;
    q[(1, 1)] -= 1.0;
    Ok(q)
}

fn canonical_sign(v: &[f64]) -> Vec<f64> {
    if v[0] < 0.0 || (v[0] == 0.0 && v[1] < 0.0) {
        vec![-v[0], -v[1]]
    } else {
        vec![v[0], v[1]]
    }
}

pub fn order_parameter(sample: &SampleSet) -> Result<OrderResult> {
    let q2 = q2_matrix(sample)?;
    let eig = q2.symmetric_eigen();
    let lambda = eig.values[1].max(0.0);
    let director = (lambda >= ISOTROPIC_FLOOR)
        .then(|| UnitVector::new(canonical_sign(&eig.vectors[1])))
        .transpose()?;
    Ok(OrderResult {
        q2,
        order_parameter: lambda,
        director,
    })
}

/// Order analysis of rod orientations (positions ignored).
pub fn rod_order(rods: &[Rod]) -> Result<OrderResult> {
    let angles: Vec<f64> = rods.iter().map(|r| r.orientation).collect();
    order_parameter(&SampleSet::from_angles(&angles)?)
}

/// Order parameter and Bingham statistic of the same planar sample.
/// Since `Q₂ = 2T - I`, the two satisfy `bingham = 2 n λ²`.
pub fn fisher_vs_q2_bridge(sample: &SampleSet) -> Result<(f64, f64)> {
    let lambda = order_parameter(sample)?.order_parameter;
    Ok((lambda, bingham_test(sample).statistic))
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderCell {
    pub center: [f64; 2],
    pub count: usize,
    pub order_parameter: Option<f64>,
    /// Axial angle in [0, π).
    pub director_angle: Option<f64>,
}

/// Local order on a regular lattice of cell centers. `cells` is row-major
/// with `nx` columns; row 0 sits at the lowest y.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderField {
    pub nx: usize,
    pub ny: usize,
    pub cell_size: f64,
    pub radius: f64,
    pub min_count: usize,
    pub cells: Vec<OrderCell>,
}

impl OrderField {
    pub fn cell(&self, ix: usize, iy: usize) -> &OrderCell {
        &self.cells[iy * self.nx + ix]
    }
}

/// For each cell center, the order of all rods within `radius` of it.
/// Cells with fewer than `min_count` rods in range hold no values.
pub fn local_order_field(rods: &[Rod], radius: f64, cell_size: f64, min_count: usize) -> Result<OrderField> {
    if rods.is_empty() {
        return Err(invalid("at least one rod is required"));
    }
    if !(radius > 0.0) || !(cell_size > 0.0) {
        return Err(invalid("radius and cell size must be positive"));
    }
    if min_count < 2 {
        return Err(invalid("min_count must be at least 2"));
    }
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for r in rods {
        for a in 0..2 {
            lo[a] = lo[a].min(r.position[a]);
            hi[a] = hi[a].max(r.position[a]);
        }
    }
    let cells_along = |a: usize| (((hi[a] - lo[a]) / cell_size).ceil() as usize).max(1);
    let (nx, ny) = (cells_along(0), cells_along(1));
    let r2 = radius * radius;

    let cells = (0..nx * ny)
        .into_par_iter()
        .map(|idx| {
            let (ix, iy) = (idx % nx, idx / nx);
            let center = [
                lo[0] + (ix as f64 + 0.5) * cell_size,
                lo[1] + (iy as f64 + 0.5) * cell_size,
            ];
            let angles: Vec<f64> = rods
                .iter()
                .filter(|r| {
                    let dx = r.position[0] - center[0];
                    let dy = r.position[1] - center[1];
                    dx * dx + dy * dy <= r2
                })
                .map(|r| r.orientation)
                .collect();
            let count = angles.len();
            if count < min_count {
                return Ok(OrderCell {
                    center,
                    count,
                    order_parameter: None,
                    director_angle: None,
                });
            }
            let result = order_parameter(&SampleSet::from_angles(&angles)?)?;
            Ok(OrderCell {
                center,
                count,
                order_parameter: Some(result.order_parameter),
                director_angle: result.director_angle(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(OrderField {
        nx,
        ny,
        cell_size,
        radius,
        min_count,
        cells,
    })
}
