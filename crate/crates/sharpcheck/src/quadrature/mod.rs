//! Deterministic adaptive quadrature over half-balls, the boundary
//! hyperplane, hemispheres, the whole half-space and the whole space.
//!
//! Every region is written in polar coordinates about a centre. Unbounded
//! radii are compactified with `r = R0 s / (1 - s)`, `s` in `[0, 1)`, and the
//! `s` axis is split at 1/2 (i.e. at `r = R0`). Directions use hyperspherical
//! angles; the azimuth is periodic and starts with the trapezoid rule.

mod engine;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

pub use engine::gauss_legendre;
use engine::{adaptive, Axis};

use crate::error::{invalid, Error, Result};
use crate::geometry::{HalfSpacePoint, SpaceVector, MAX_DIM, MAX_N};
use crate::kernels::sphere_area;

/// Tolerances and limits for one integral.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Compactification scale `R0` for unbounded radial directions.
    pub truncation_radius: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_evals: usize,
    /// Order `k` of the low rule; the high rule has order `2k`.
    pub rule_order: usize,
}

impl QuadratureSpec {
    /// Defaults for dimension `n`, with `R0 = 8` (the `lambda = 1` choice).
    pub fn for_dimension(n: usize) -> Self {
        Self::for_lambda(n, 1.0)
    }

    /// Defaults for dimension `n` and a family of scale `lambda`: `R0 = 4(1+lambda)`.
    pub fn for_lambda(n: usize, lambda: f64) -> Self {
        let (rel_tol, abs_tol, max_evals) = if n <= 3 { (1e-8, 1e-10, 10_000_000) } else { (1e-6, 1e-8, 100_000_000) };
        Self { truncation_radius: 4.0 * (1.0 + lambda), rel_tol, abs_tol, max_evals, rule_order: 4 }
    }

    pub fn with_tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_max_evals(mut self, max_evals: usize) -> Self {
        self.max_evals = max_evals;
        self
    }

    pub fn with_radius(mut self, r0: f64) -> Self {
        self.truncation_radius = r0;
        self
    }

    pub fn with_rule_order(mut self, k: usize) -> Self {
        self.rule_order = k;
        self
    }

    /// Check the invariants for integrals over `dim` axes.
    pub fn validate(&self, dim: usize) -> Result<()> {
        if !(self.rel_tol > 0.0) {
            return Err(invalid("rel_tol", self.rel_tol, "must be positive"));
        }
        if !(self.abs_tol > 0.0) {
            return Err(invalid("abs_tol", self.abs_tol, "must be positive"));
        }
        if !(self.truncation_radius > 0.0 && self.truncation_radius.is_finite()) {
            return Err(invalid("truncation_radius", self.truncation_radius, "must be positive and finite"));
        }
        if self.rule_order == 0 || self.rule_order > 32 {
            return Err(invalid("rule_order", self.rule_order as f64, "must lie in 1..=32"));
        }
        let min_evals = (self.rule_order as f64).powi(dim as i32);
        if (self.max_evals as f64) < min_evals {
            return Err(invalid("max_evals", self.max_evals as f64, format!("must be at least rule_order^{dim} = {min_evals}")));
        }
        Ok(())
    }
}

/// Value of an integral with its error estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub n_evals: usize,
    pub converged: bool,
}

impl QuadratureResult {
    pub fn exact(value: f64) -> Self {
        Self { value, error_estimate: 0.0, n_evals: 0, converged: true }
    }

    /// Sum of two independent integrals.
    pub fn plus(self, other: QuadratureResult) -> Self {
        Self {
            value: self.value + other.value,
            error_estimate: self.error_estimate + other.error_estimate,
            n_evals: self.n_evals + other.n_evals,
            converged: self.converged && other.converged,
        }
    }

    pub fn scaled(self, c: f64) -> Self {
        Self { value: c * self.value, error_estimate: c.abs() * self.error_estimate, ..self }
    }

    /// Turn a non-converged result into an error.
    pub fn require(self, what: &str) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NonConvergence { what: what.to_string(), error_estimate: self.error_estimate, n_evals: self.n_evals })
        }
    }
}

#[derive(Clone, Copy)]
enum Radial {
    Ball(f64),
    Compact(f64),
    Shell(f64),
    /// `[r_min, inf)` compactified about `r_min`.
    Exterior(f64, f64),
}

/// Direction sets in R^dim.
#[derive(Clone, Copy, PartialEq)]
enum Directions {
    /// Upper hemisphere (last coordinate >= 0).
    Upper,
    /// Full sphere.
    Full,
}

/// Angle axes of the full sphere S^m.
fn sphere_axes(m: usize, out: &mut Vec<Axis>) {
    if m == 0 {
        return;
    }
    for _ in 0..m - 1 {
        out.push(Axis::new(0.0, PI));
    }
    out.push(Axis::periodic(0.0, 2.0 * PI));
}

/// Map sphere angles to a unit vector in R^{m+1}; returns the Jacobian.
/// For m = 0 the `sheet` selects the point +1 or -1.
#[inline]
fn sphere_map(m: usize, angles: &[f64], sheet: usize, out: &mut [f64]) -> f64 {
    if m == 0 {
        out[0] = if sheet == 0 { 1.0 } else { -1.0 };
        return 1.0;
    }
    let mut s = 1.0;
    let mut jac = 1.0;
    for j in 0..m - 1 {
        let (sn, cs) = angles[j].sin_cos();
        out[j] = s * cs;
        jac *= sn.powi((m - 1 - j) as i32);
        s *= sn;
    }
    let (sn, cs) = angles[m - 1].sin_cos();
    out[m - 1] = s * cs;
    out[m] = s * sn;
    jac
}

/// Integrate `f` over `centre + r·omega` for the given radial range and
/// direction set in R^dim.
fn integrate_polar(
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    dim: usize,
    radial: Radial,
    dirs: Directions,
    centre: &[f64],
    spec: &QuadratureSpec,
) -> QuadratureResult {
    assert!((1..=MAX_DIM).contains(&dim));
    let mut axes = Vec::new();
    let mut splits: Vec<Vec<f64>> = Vec::new();
    match radial {
        Radial::Ball(r) => {
            axes.push(Axis::new(0.0, r));
            splits.push(vec![]);
        }
        Radial::Compact(_) | Radial::Exterior(..) => {
            axes.push(Axis::new(0.0, 1.0));
            splits.push(vec![0.5]);
        }
        Radial::Shell(_) => {}
    }
    let sphere_dim = match dirs {
        Directions::Upper => {
            axes.push(Axis::new(0.0, 0.5 * PI));
            splits.push(vec![]);
            dim - 2
        }
        Directions::Full => dim - 1,
    };
    sphere_axes(sphere_dim, &mut axes);
    let sheets = if sphere_dim == 0 { 2 } else { 1 };

    let g = |u: &[f64]| -> f64 {
        let (r, rjac, rest) = match radial {
            Radial::Ball(_) => (u[0], u[0].powi(dim as i32 - 1), &u[1..]),
            Radial::Compact(r0) => {
                let s = u[0];
                let r = r0 * s / (1.0 - s);
                (r, r.powi(dim as i32 - 1) * r0 / ((1.0 - s) * (1.0 - s)), &u[1..])
            }
            Radial::Exterior(rmin, r0) => {
                let s = u[0];
                let r = rmin + r0 * s / (1.0 - s);
                (r, r.powi(dim as i32 - 1) * r0 / ((1.0 - s) * (1.0 - s)), &u[1..])
            }
            Radial::Shell(r) => (r, r.powi(dim as i32 - 1), u),
        };
        let mut total = 0.0;
        let mut omega = [0.0; MAX_DIM];
        let mut x = [0.0; MAX_DIM];
        for sheet in 0..sheets {
            let jac = match dirs {
                Directions::Upper => {
                    let (sn, cs) = rest[0].sin_cos();
                    let mut xi = [0.0; MAX_DIM];
                    let j = sphere_map(sphere_dim, &rest[1..], sheet, &mut xi);
                    for i in 0..dim - 1 {
                        omega[i] = sn * xi[i];
                    }
                    omega[dim - 1] = cs;
                    j * sn.powi(dim as i32 - 2)
                }
                Directions::Full => sphere_map(sphere_dim, rest, sheet, &mut omega),
            };
            for i in 0..dim {
                x[i] = centre[i] + r * omega[i];
            }
            if jac != 0.0 {
                total += f(&x[..dim]) * jac;
            }
        }
        if rjac == 0.0 || !rjac.is_finite() {
            return 0.0;
        }
        total * rjac
    };

    if axes.is_empty() {
        // S^0 shell in R^1: two points
        let v = g(&[]);
        return QuadratureResult { value: v, error_estimate: 0.0, n_evals: 2, converged: v.is_finite() };
    }
    adaptive(&g, &axes, &splits, spec)
}

fn check_n(n: usize) -> Result<()> {
    if (2..=MAX_N).contains(&n) {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(n))
    }
}

fn check_radius(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(invalid("R", r, "must be positive and finite"))
    }
}

/// `∫_{B_R^+} f dx`, the half-ball centred at the origin.
pub fn integrate_half_ball(
    f: &(dyn Fn(&HalfSpacePoint) -> f64 + Sync),
    n: usize,
    r: f64,
    spec: &QuadratureSpec,
) -> Result<QuadratureResult> {
    integrate_half_ball_at(f, n, r, &vec![0.0; n - 1], spec)
}

/// `∫ f dx` over the half-ball of radius `r` centred at the boundary point `(c', 0)`.
pub fn integrate_half_ball_at(
    f: &(dyn Fn(&HalfSpacePoint) -> f64 + Sync),
    n: usize,
    r: f64,
    centre_prime: &[f64],
    spec: &QuadratureSpec,
) -> Result<QuadratureResult> {
    check_n(n)?;
    check_radius(r)?;
    spec.validate(n)?;
    let mut c = vec![0.0; n];
    c[..n - 1].copy_from_slice(centre_prime);
    let g = |x: &[f64]| f(&HalfSpacePoint::from_map(x));
    Ok(integrate_polar(&g, n, Radial::Ball(r), Directions::Upper, &c, spec))
}

/// `∫_{R^n_+} f dx`, compactified radially about the origin with scale `R0`.
pub fn integrate_half_space(f: &(dyn Fn(&HalfSpacePoint) -> f64 + Sync), n: usize, spec: &QuadratureSpec) -> Result<QuadratureResult> {
    check_n(n)?;
    spec.validate(n)?;
    let c = vec![0.0; n];
    let g = |x: &[f64]| f(&HalfSpacePoint::from_map(x));
    Ok(integrate_polar(&g, n, Radial::Compact(spec.truncation_radius), Directions::Upper, &c, spec))
}

/// `∫_{R^n_+ \ B_R^+} f dx`.
pub fn integrate_half_space_exterior(
    f: &(dyn Fn(&HalfSpacePoint) -> f64 + Sync),
    n: usize,
    r: f64,
    spec: &QuadratureSpec,
) -> Result<QuadratureResult> {
    check_n(n)?;
    check_radius(r)?;
    spec.validate(n)?;
    let c = vec![0.0; n];
    let g = |x: &[f64]| f(&HalfSpacePoint::from_map(x));
    Ok(integrate_polar(&g, n, Radial::Exterior(r, spec.truncation_radius.max(r)), Directions::Upper, &c, spec))
}

/// `∫_{∂R^n_+} f dx'`; `f` receives the boundary point `(x', 0)`.
pub fn integrate_boundary(f: &(dyn Fn(&HalfSpacePoint) -> f64 + Sync), n: usize, spec: &QuadratureSpec) -> Result<QuadratureResult> {
    check_n(n)?;
    spec.validate(n - 1)?;
    let c = vec![0.0; n - 1];
    let g = |xp: &[f64]| {
        let mut x = [0.0; MAX_DIM];
        x[..n - 1].copy_from_slice(xp);
        f(&HalfSpacePoint::from_map(&x[..n]))
    };
    Ok(integrate_polar(&g, n - 1, Radial::Compact(spec.truncation_radius), Directions::Full, &c, spec))
}

/// `∫_{Σ_R} f dx'` over the flat part `{|x'| < R, t = 0}` of `∂B_R^+`.
pub fn integrate_boundary_ball(
    f: &(dyn Fn(&HalfSpacePoint) -> f64 + Sync),
    n: usize,
    r: f64,
    spec: &QuadratureSpec,
) -> Result<QuadratureResult> {
    check_n(n)?;
    check_radius(r)?;
    spec.validate(n - 1)?;
    let c = vec![0.0; n - 1];
    let g = |xp: &[f64]| {
        let mut x = [0.0; MAX_DIM];
        x[..n - 1].copy_from_slice(xp);
        f(&HalfSpacePoint::from_map(&x[..n]))
    };
    Ok(integrate_polar(&g, n - 1, Radial::Ball(r), Directions::Full, &c, spec))
}

/// `∫_{∂B_R^+ ∩ {t>0}} f dS`, the curved part of the half-ball boundary.
pub fn integrate_hemisphere(
    f: &(dyn Fn(&HalfSpacePoint) -> f64 + Sync),
    n: usize,
    r: f64,
    spec: &QuadratureSpec,
) -> Result<QuadratureResult> {
    check_n(n)?;
    check_radius(r)?;
    spec.validate(n - 1)?;
    let c = vec![0.0; n];
    let g = |x: &[f64]| f(&HalfSpacePoint::from_map(x));
    Ok(integrate_polar(&g, n, Radial::Shell(r), Directions::Upper, &c, spec))
}

/// `∫_{R^n \ B_rho} f dx` over the whole space minus a small ball about the origin.
pub fn integrate_full_space(
    f: &(dyn Fn(&SpaceVector) -> f64 + Sync),
    n: usize,
    rho: f64,
    spec: &QuadratureSpec,
) -> Result<QuadratureResult> {
    check_n(n)?;
    if !(rho >= 0.0) {
        return Err(invalid("rho", rho, "must be nonnegative"));
    }
    spec.validate(n)?;
    let c = vec![0.0; n];
    let g = |x: &[f64]| f(&SpaceVector::from_slice(x).expect("length within capacity"));
    let radial = if rho > 0.0 { Radial::Exterior(rho, spec.truncation_radius) } else { Radial::Compact(spec.truncation_radius) };
    Ok(integrate_polar(&g, n, radial, Directions::Full, &c, spec))
}

/// `∫_a^b f`.
pub fn integrate_interval(f: &(dyn Fn(f64) -> f64 + Sync), a: f64, b: f64, spec: &QuadratureSpec) -> QuadratureResult {
    if a == b {
        return QuadratureResult::exact(0.0);
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let g = |x: &[f64]| f(x[0]);
    adaptive(&g, &[Axis::new(lo, hi)], &[], spec).scaled(sign)
}

/// `∫_a^∞ f`, compactified with scale `spec.truncation_radius`.
pub fn integrate_to_infinity(f: &(dyn Fn(f64) -> f64 + Sync), a: f64, spec: &QuadratureSpec) -> QuadratureResult {
    let r0 = spec.truncation_radius;
    let g = |u: &[f64]| {
        let s = u[0];
        let x = a + r0 * s / (1.0 - s);
        let j = r0 / ((1.0 - s) * (1.0 - s));
        if !j.is_finite() {
            return 0.0;
        }
        f(x) * j
    };
    adaptive(&g, &[Axis::new(0.0, 1.0)], &[vec![0.5]], spec)
}

/// `∫ f` over the box `[lower, upper]` in Cartesian coordinates.
pub fn integrate_box(f: &(dyn Fn(&[f64]) -> f64 + Sync), lower: &[f64], upper: &[f64], spec: &QuadratureSpec) -> Result<QuadratureResult> {
    if lower.len() != upper.len() {
        return Err(Error::DimensionMismatch { expected: lower.len(), got: upper.len() });
    }
    if lower.is_empty() || lower.len() > MAX_DIM {
        return Err(Error::UnsupportedDimension(lower.len()));
    }
    spec.validate(lower.len())?;
    let axes: Vec<Axis> = lower.iter().zip(upper).map(|(&a, &b)| Axis::new(a, b)).collect();
    Ok(adaptive(f, &axes, &[], spec))
}

/// Region of a discarded tail.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TailRegion {
    /// `R^n_+ \ B_R^+`
    Interior,
    /// `{|x'| > R} ⊂ ∂R^n_+`
    Boundary,
}

/// Bound on `∫_{|x|>R} prefactor·|x|^{-decay}` over the given region.
pub fn tail_bound(decay_exponent: f64, prefactor: f64, r: f64, n: usize, region: TailRegion) -> Result<f64> {
    check_n(n)?;
    check_radius(r)?;
    let nf = n as f64;
    match region {
        TailRegion::Interior => {
            if !(decay_exponent > nf) {
                return Err(Error::Divergent(format!(
                    "|x|^-{decay_exponent} is not integrable at infinity in the half-space of dimension {n}"
                )));
            }
            Ok(prefactor.abs() * 0.5 * sphere_area(n) * r.powf(nf - decay_exponent) / (decay_exponent - nf))
        }
        TailRegion::Boundary => {
            if !(decay_exponent > nf - 1.0) {
                return Err(Error::Divergent(format!("|x'|^-{decay_exponent} is not integrable at infinity on R^{}", n - 1)));
            }
            Ok(prefactor.abs() * sphere_area(n - 1) * r.powf(nf - 1.0 - decay_exponent) / (decay_exponent - nf + 1.0))
        }
    }
}
