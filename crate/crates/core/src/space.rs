//! Affine points, vectors of the directing space, and sampling grids.
//!
//! Both [`Vector`] and [`Point`] are plain coordinate tuples; the Euclidean
//! inner product on the directing space is the standard dot product in the
//! ambient coordinates (the auxiliary structure all Gauss-map functionals
//! refer to).

use crate::error::{Error, Result};

/// Smallest supported ambient dimension.
pub const MIN_DIM: usize = 2;
/// Largest supported ambient dimension; grid oracles are intractable above.
pub const MAX_DIM: usize = 4;

fn check_coords(coords: &[f64], what: &'static str) -> Result<()> {
    if coords.len() < MIN_DIM || coords.len() > MAX_DIM {
        return Err(Error::DimensionMismatch {
            expected: MIN_DIM,
            got: coords.len(),
        });
    }
    if coords.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFinite(what));
    }
    Ok(())
}

/// A vector of the directing space `V^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector {
    coords: Vec<f64>,
}

impl Vector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        check_coords(&coords, "Vector")?;
        Ok(Self { coords })
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            coords: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        dot(&self.coords, &other.coords)
    }

    pub fn euclid_norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn add(&self, other: &Vector) -> Vector {
        debug_assert_eq!(self.dim(), other.dim());
        Vector {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        debug_assert_eq!(self.dim(), other.dim());
        Vector {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, t: f64) -> Vector {
        Vector {
            coords: self.coords.iter().map(|a| a * t).collect(),
        }
    }

    pub fn neg(&self) -> Vector {
        self.scale(-1.0)
    }

    /// Euclidean-normalized copy; error on the zero vector.
    pub fn euclid_unit(&self) -> Result<Vector> {
        let n = self.euclid_norm();
        if n <= 0.0 {
            return Err(Error::Domain("cannot normalize zero vector".into()));
        }
        Ok(self.scale(1.0 / n))
    }

    /// Euclidean angle to another vector, in radians.
    pub fn euclid_angle(&self, other: &Vector) -> f64 {
        let d = self.dot(other) / (self.euclid_norm() * other.euclid_norm());
        d.clamp(-1.0, 1.0).acos()
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A point of the affine space `A^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        check_coords(&coords, "Point")?;
        Ok(Self { coords })
    }

    pub fn origin(dim: usize) -> Self {
        Self {
            coords: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Vector from `other` to `self`.
    pub fn sub(&self, other: &Point) -> Vector {
        debug_assert_eq!(self.dim(), other.dim());
        Vector {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn add_vec(&self, v: &Vector) -> Point {
        debug_assert_eq!(self.dim(), v.dim());
        Point {
            coords: self
                .coords
                .iter()
                .zip(v.coords())
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

/// Axis-aligned box used for level-set extraction and probe grids.
#[derive(Debug, Clone)]
pub struct BoundingBox {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl BoundingBox {
    pub fn new(min: Vec<f64>, max: Vec<f64>) -> Result<Self> {
        if min.len() != max.len() {
            return Err(Error::DimensionMismatch {
                expected: min.len(),
                got: max.len(),
            });
        }
        if min.iter().zip(&max).any(|(a, b)| a >= b) {
            return Err(Error::Domain("box min must be below max".into()));
        }
        Ok(Self { min, max })
    }

    /// Symmetric cube `[-r, r]^n`.
    pub fn cube(dim: usize, r: f64) -> Self {
        Self {
            min: vec![-r; dim],
            max: vec![r; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }
}

/// A finite list of probe points.
#[derive(Debug, Clone)]
pub struct PointGrid {
    pub points: Vec<Point>,
}

impl PointGrid {
    pub fn from_points(points: Vec<Point>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyGrid);
        }
        Ok(Self { points })
    }

    /// Regular grid with the given step over the box.
    pub fn regular(bbox: &BoundingBox, step: f64) -> Result<Self> {
        if step <= 0.0 {
            return Err(Error::Domain("grid step must be positive".into()));
        }
        let dim = bbox.dim();
        let counts: Vec<usize> = (0..dim)
            .map(|i| ((bbox.max[i] - bbox.min[i]) / step).round() as usize + 1)
            .collect();
        let total: usize = counts.iter().product();
        let mut points = Vec::with_capacity(total);
        let mut idx = vec![0usize; dim];
        loop {
            let coords: Vec<f64> = (0..dim)
                .map(|i| bbox.min[i] + step * idx[i] as f64)
                .collect();
            points.push(Point { coords });
            let mut d = 0;
            loop {
                idx[d] += 1;
                if idx[d] < counts[d] {
                    break;
                }
                idx[d] = 0;
                d += 1;
                if d == dim {
                    return PointGrid::from_points(points);
                }
            }
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_dimensions() {
        assert!(Vector::new(vec![1.0]).is_err());
        assert!(Vector::new(vec![1.0; 5]).is_err());
        assert!(Point::new(vec![f64::NAN, 0.0]).is_err());
    }

    #[test]
    fn regular_grid_counts() {
        let bbox = BoundingBox::cube(2, 5.0);
        let g = PointGrid::regular(&bbox, 0.5).unwrap();
        assert_eq!(g.len(), 21 * 21);
    }

    #[test]
    fn vector_ops() {
        let a = Vector::new(vec![3.0, 4.0]).unwrap();
        assert_eq!(a.euclid_norm(), 5.0);
        let b = a.euclid_unit().unwrap();
        assert!((b.euclid_norm() - 1.0).abs() < 1e-15);
    }
}
