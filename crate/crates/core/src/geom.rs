//! Small helpers for `[f64; 3]` vectors.

pub type Vec3 = [f64; 3];

#[inline]
pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn dist(a: Vec3, b: Vec3) -> f64 {
    norm(sub(a, b))
}

#[inline]
pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub fn is_finite(a: Vec3) -> bool {
    a.iter().all(|x| x.is_finite())
}

/// Axis-aligned box of sample points, z index fastest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub origin: Vec3,
    pub spacing: Vec3,
    pub shape: [usize; 3],
}

impl Grid {
    pub fn new(origin: Vec3, spacing: Vec3, shape: [usize; 3]) -> crate::Result<Self> {
        use crate::Error;
        if !is_finite(origin) || !is_finite(spacing) {
            return Err(Error::NonFinite("grid geometry"));
        }
        for axis in 0..3 {
            if shape[axis] == 0 {
                return Err(Error::InvalidInput("grid axes need at least one point".into()));
            }
            if shape[axis] > 1 && !(spacing[axis] > 0.0) {
                return Err(Error::InvalidInput(format!("grid spacing on axis {axis} must be positive")));
            }
        }
        Ok(Grid { origin, spacing, shape })
    }

    /// Grid spanning `lo..=hi` with `shape` points per axis.
    pub fn spanning(lo: Vec3, hi: Vec3, shape: [usize; 3]) -> crate::Result<Self> {
        let mut spacing = [0.0; 3];
        for axis in 0..3 {
            if shape[axis] > 1 {
                spacing[axis] = (hi[axis] - lo[axis]) / (shape[axis] - 1) as f64;
            }
        }
        Grid::new(lo, spacing, shape)
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.shape[1] + j) * self.shape[2] + k
    }

    pub fn unravel(&self, idx: usize) -> [usize; 3] {
        let k = idx % self.shape[2];
        let j = (idx / self.shape[2]) % self.shape[1];
        [idx / (self.shape[1] * self.shape[2]), j, k]
    }

    pub fn point(&self, idx: [usize; 3]) -> Vec3 {
        [
            self.origin[0] + idx[0] as f64 * self.spacing[0],
            self.origin[1] + idx[1] as f64 * self.spacing[1],
            self.origin[2] + idx[2] as f64 * self.spacing[2],
        ]
    }

    pub fn point_at(&self, idx: usize) -> Vec3 {
        self.point(self.unravel(idx))
    }

    /// Smallest spacing among the axes that have more than one point.
    pub fn min_spacing(&self) -> f64 {
        (0..3)
            .filter(|&a| self.shape[a] > 1)
            .map(|a| self.spacing[a])
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, p: Vec3) -> bool {
        (0..3).all(|a| {
            let hi = self.origin[a] + (self.shape[a] - 1) as f64 * self.spacing[a];
            p[a] >= self.origin[a] - 1e-12 && p[a] <= hi + 1e-12
        })
    }
}
