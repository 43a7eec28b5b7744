//! Fixed-capacity vectors and half-space points.
//!
//! Everything here is `Copy` so that integrands can build points without
//! touching the allocator.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Storage capacity of [`SpaceVector`].
pub const MAX_DIM: usize = 6;
/// Largest ambient dimension accepted by [`Dimension`].
pub const MAX_N: usize = 5;

/// Ambient dimension `n`, with `2 <= n <= MAX_N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dimension(usize);

impl Dimension {
    pub fn new(n: usize) -> Result<Self> {
        if (2..=MAX_N).contains(&n) {
            Ok(Self(n))
        } else {
            Err(Error::UnsupportedDimension(n))
        }
    }

    #[inline]
    pub fn get(self) -> usize {
        self.0
    }

    #[inline]
    pub fn as_f64(self) -> f64 {
        self.0 as f64
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for Dimension {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_u64(self.0 as u64)
    }
}

impl<'de> Deserialize<'de> for Dimension {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let n = usize::deserialize(d)?;
        Dimension::new(n).map_err(serde::de::Error::custom)
    }
}

/// A vector in R^len with `len <= MAX_DIM`.
#[derive(Clone, Copy, PartialEq)]
pub struct SpaceVector {
    c: [f64; MAX_DIM],
    len: usize,
}

impl SpaceVector {
    pub fn zeros(len: usize) -> Self {
        assert!(len <= MAX_DIM, "vector length {len} exceeds capacity {MAX_DIM}");
        Self { c: [0.0; MAX_DIM], len }
    }

    pub fn from_slice(v: &[f64]) -> Result<Self> {
        if v.is_empty() || v.len() > MAX_DIM {
            return Err(Error::DimensionMismatch { expected: MAX_DIM, got: v.len() });
        }
        let mut out = Self::zeros(v.len());
        out.c[..v.len()].copy_from_slice(v);
        Ok(out)
    }

    /// Unit vector `e_i` in R^len.
    pub fn unit(len: usize, i: usize) -> Self {
        let mut v = Self::zeros(len);
        v.c[i] = 1.0;
        v
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.c[..self.len]
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.c[..self.len]
    }

    #[inline]
    pub fn dot(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.len, other.len);
        let mut s = 0.0;
        for i in 0..self.len {
            s += self.c[i] * other.c[i];
        }
        s
    }

    #[inline]
    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    #[inline]
    pub fn scale(&self, s: f64) -> Self {
        let mut out = *self;
        for v in out.as_mut_slice() {
            *v *= s;
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.as_slice().iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.as_slice().iter().all(|v| v.is_finite())
    }

    fn check_len(&self, other: &Self) -> Result<()> {
        if self.len == other.len {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: self.len, got: other.len })
        }
    }

    /// Length check for public entry points that take two vectors.
    pub fn same_len(&self, other: &Self) -> Result<()> {
        self.check_len(other)
    }
}

impl fmt::Debug for SpaceVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.as_slice()).finish()
    }
}

impl Index<usize> for SpaceVector {
    type Output = f64;
    #[inline]
    fn index(&self, i: usize) -> &f64 {
        &self.as_slice()[i]
    }
}

impl IndexMut<usize> for SpaceVector {
    #[inline]
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.as_mut_slice()[i]
    }
}

impl Add for SpaceVector {
    type Output = SpaceVector;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        debug_assert_eq!(self.len, rhs.len);
        let mut out = self;
        for i in 0..self.len {
            out.c[i] += rhs.c[i];
        }
        out
    }
}

impl Sub for SpaceVector {
    type Output = SpaceVector;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        debug_assert_eq!(self.len, rhs.len);
        let mut out = self;
        for i in 0..self.len {
            out.c[i] -= rhs.c[i];
        }
        out
    }
}

impl Neg for SpaceVector {
    type Output = SpaceVector;
    #[inline]
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl Mul<f64> for SpaceVector {
    type Output = SpaceVector;
    #[inline]
    fn mul(self, s: f64) -> Self {
        self.scale(s)
    }
}

impl Serialize for SpaceVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.as_slice().serialize(s)
    }
}

impl<'de> Deserialize<'de> for SpaceVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        SpaceVector::from_slice(&v).map_err(serde::de::Error::custom)
    }
}

/// A point `(x', t)` of the closed upper half-space, `t >= 0`.
///
/// The last coordinate is `t`.
#[derive(Clone, Copy, PartialEq)]
pub struct HalfSpacePoint {
    v: SpaceVector,
}

impl HalfSpacePoint {
    pub fn new(x_prime: &[f64], t: f64) -> Result<Self> {
        let mut c = [0.0; MAX_DIM];
        let n = x_prime.len() + 1;
        if n > MAX_DIM {
            return Err(Error::DimensionMismatch { expected: MAX_DIM, got: n });
        }
        c[..n - 1].copy_from_slice(x_prime);
        c[n - 1] = t;
        Self::from_coords(&c[..n])
    }

    /// Boundary point `(x', 0)`.
    pub fn boundary(x_prime: &[f64]) -> Result<Self> {
        Self::new(x_prime, 0.0)
    }

    /// Build from the full coordinate list `(x_1, .., x_{n-1}, t)`.
    pub fn from_coords(coords: &[f64]) -> Result<Self> {
        if coords.len() < 2 || coords.len() > MAX_DIM {
            return Err(Error::DimensionMismatch { expected: 2, got: coords.len() });
        }
        let t = coords[coords.len() - 1];
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("t = {t} is not in the closed half-space")));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain("non-finite coordinate".into()));
        }
        let mut v = SpaceVector::from_slice(coords)?;
        // normalise -0.0 so that boundary points have t == +0.0 exactly
        v[coords.len() - 1] = t + 0.0;
        Ok(Self { v })
    }

    /// Build from coordinates produced by a quadrature map; `t` is clamped at 0.
    #[inline]
    pub(crate) fn from_map(coords: &[f64]) -> Self {
        let mut v = SpaceVector::zeros(coords.len());
        v.as_mut_slice().copy_from_slice(coords);
        let n = coords.len();
        if !(v[n - 1] > 0.0) {
            v[n - 1] = 0.0;
        }
        Self { v }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.v.len()
    }

    #[inline]
    pub fn t(&self) -> f64 {
        self.v[self.v.len() - 1]
    }

    #[inline]
    pub fn x_prime(&self) -> &[f64] {
        &self.v.as_slice()[..self.v.len() - 1]
    }

    #[inline]
    pub fn coords(&self) -> &[f64] {
        self.v.as_slice()
    }

    #[inline]
    pub fn as_vector(&self) -> SpaceVector {
        self.v
    }

    #[inline]
    pub fn is_boundary(&self) -> bool {
        self.t() == 0.0
    }

    /// Euclidean norm `|x|`.
    #[inline]
    pub fn norm(&self) -> f64 {
        self.v.norm()
    }
}

impl fmt::Debug for HalfSpacePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HalfSpacePoint{:?}", self.v)
    }
}

impl Serialize for HalfSpacePoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for HalfSpacePoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        HalfSpacePoint::from_coords(&v).map_err(serde::de::Error::custom)
    }
}

/// Square matrix of side `len <= MAX_DIM`, row-major.
#[derive(Clone, Copy, PartialEq)]
pub struct Matrix {
    a: [[f64; MAX_DIM]; MAX_DIM],
    len: usize,
}

impl Matrix {
    pub fn zeros(len: usize) -> Self {
        assert!(len <= MAX_DIM);
        Self { a: [[0.0; MAX_DIM]; MAX_DIM], len }
    }

    pub fn identity(len: usize) -> Self {
        let mut m = Self::zeros(len);
        for i in 0..len {
            m.a[i][i] = 1.0;
        }
        m
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.len && j < self.len);
        self.a[i][j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.len && j < self.len);
        self.a[i][j] = v;
    }

    pub fn trace(&self) -> f64 {
        (0..self.len).map(|i| self.a[i][i]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        let mut m = 0.0_f64;
        for i in 0..self.len {
            for j in 0..self.len {
                m = m.max(self.a[i][j].abs());
            }
        }
        m
    }

    /// Largest `|a_ij - a_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut m = 0.0_f64;
        for i in 0..self.len {
            for j in 0..i {
                m = m.max((self.a[i][j] - self.a[j][i]).abs());
            }
        }
        m
    }

    pub fn mul_mat(&self, other: &Matrix) -> Matrix {
        debug_assert_eq!(self.len, other.len);
        let mut out = Matrix::zeros(self.len);
        for i in 0..self.len {
            for j in 0..self.len {
                let mut s = 0.0;
                for k in 0..self.len {
                    s += self.a[i][k] * other.a[k][j];
                }
                out.a[i][j] = s;
            }
        }
        out
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.len).map(|i| self.a[i][..self.len].to_vec()).collect()
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.rows()).finish()
    }
}

impl Sub for Matrix {
    type Output = Matrix;
    fn sub(self, rhs: Matrix) -> Matrix {
        let mut out = self;
        for i in 0..self.len {
            for j in 0..self.len {
                out.a[i][j] -= rhs.a[i][j];
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_space_point_rejects_negative_t() {
        assert!(HalfSpacePoint::new(&[0.0], -1e-300).is_err());
        assert!(HalfSpacePoint::new(&[0.0], f64::NAN).is_err());
        let p = HalfSpacePoint::new(&[1.0, 2.0], -0.0).unwrap();
        assert!(p.is_boundary());
        assert!(p.t().is_sign_positive());
        assert_eq!(p.x_prime(), &[1.0, 2.0]);
    }

    #[test]
    fn dimension_bounds() {
        assert!(Dimension::new(1).is_err());
        assert!(Dimension::new(2).is_ok());
        assert!(Dimension::new(MAX_N).is_ok());
        assert!(Dimension::new(MAX_N + 1).is_err());
    }

    #[test]
    fn vector_arithmetic() {
        let a = SpaceVector::from_slice(&[1.0, 2.0, 2.0]).unwrap();
        let b = SpaceVector::unit(3, 0);
        assert_eq!(a.norm(), 3.0);
        assert_eq!((a - b).as_slice(), &[0.0, 2.0, 2.0]);
        assert_eq!((a + b * 2.0).as_slice(), &[3.0, 2.0, 2.0]);
        assert!(a.same_len(&SpaceVector::zeros(2)).is_err());
    }
}
