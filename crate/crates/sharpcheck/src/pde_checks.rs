//! Residuals and integral identities for the Liouville system and the
//! Euler-Lagrange system of the trace inequality.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::extremals::{liouville_flux, liouville_flux_jacobian, onofri_w, LiouvilleSolution, OnofriTraceExtremal};
use crate::fields::ScalarField;
use crate::geometry::{HalfSpacePoint, Matrix, SpaceVector};
use crate::kernels::{flux_a, flux_a_jacobian, mu_formula, omega, sphere_area, x_field};
use crate::quadrature::{integrate_boundary_ball, integrate_half_ball, integrate_hemisphere, QuadratureResult, QuadratureSpec};

/// Summary of a pointwise residual over a sample set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub max_abs: f64,
    pub mean_abs: f64,
    pub n_samples: usize,
    pub worst_point: SpaceVector,
}

impl ResidualReport {
    /// Collect `|r(x)|` over the sample set. NaN residuals count as infinite.
    pub fn collect(points: &[HalfSpacePoint], r: impl Fn(&HalfSpacePoint) -> f64) -> Result<Self> {
        let first = points.first().ok_or_else(|| Error::Domain("empty sample set".into()))?;
        let mut max_abs = -1.0;
        let mut sum = 0.0;
        let mut worst = *first;
        for x in points {
            let v = r(x).abs();
            let v = if v.is_nan() { f64::INFINITY } else { v };
            sum += v;
            if v > max_abs {
                max_abs = v;
                worst = *x;
            }
        }
        Ok(Self { max_abs, mean_abs: sum / points.len() as f64, n_samples: points.len(), worst_point: worst.as_vector() })
    }
}

/// `div a(∇u)` from the closed-form flux Jacobian.
pub fn interior_residual_closed(params: &LiouvilleSolution, points: &[HalfSpacePoint]) -> Result<ResidualReport> {
    ResidualReport::collect(points, |x| liouville_flux_jacobian(params, x).trace())
}

/// `Δ_n u = div a(∇u)` by central differences of the analytic gradient.
///
/// `x` must satisfy `t > h`.
pub fn n_laplacian_fd(u: &dyn ScalarField, x: &HalfSpacePoint, h: f64) -> f64 {
    let n = x.dim();
    let base = x.as_vector();
    let mut div = 0.0;
    for i in 0..n {
        let at = |s: f64| {
            let mut c = base;
            c[i] += s;
            flux_a(&u.gradient(&HalfSpacePoint::from_map(c.as_slice())))[i]
        };
        div += (at(h) - at(-h)) / (2.0 * h);
    }
    div
}

/// Second-opinion interior residual by [`n_laplacian_fd`].
pub fn interior_residual_fd(u: &dyn ScalarField, points: &[HalfSpacePoint], h: f64) -> Result<ResidualReport> {
    if points.iter().any(|x| x.t() <= h) {
        return Err(invalid("h", h, "sample points must lie above t = h"));
    }
    ResidualReport::collect(points, |x| n_laplacian_fd(u, x, h))
}

/// Five-point Laplacian of the values of a planar field.
pub fn laplacian_5pt(u: &dyn ScalarField, x: &HalfSpacePoint, h: f64) -> f64 {
    let c = x.coords();
    let at = |dx: f64, dt: f64| u.value(&HalfSpacePoint::from_map(&[c[0] + dx, c[1] + dt]));
    (at(h, 0.0) + at(-h, 0.0) + at(0.0, h) + at(0.0, -h) - 4.0 * at(0.0, 0.0)) / (h * h)
}

/// `|∇u|^{n-2} ∂_t u + e^u` at boundary points, from the closed forms.
pub fn neumann_residual(params: &LiouvilleSolution, boundary_points: &[HalfSpacePoint]) -> Result<ResidualReport> {
    let n = params.n.get();
    ResidualReport::collect(boundary_points, |x| liouville_flux(params, x)[n - 1] + params.value_at(x.coords()).exp())
}

/// `|∇u|^{n-2} ∂_t u + e^u` for any field with an analytic gradient.
pub fn neumann_residual_field(u: &dyn ScalarField, boundary_points: &[HalfSpacePoint]) -> Result<ResidualReport> {
    let n = u.dim();
    ResidualReport::collect(boundary_points, |x| {
        let (v, g) = u.value_and_gradient(x);
        flux_a(&g)[n - 1] + v.exp()
    })
}

/// Normalisation of the boundary equation in the `w`-picture.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryScaling {
    /// `-a(X+∇w)·e_n = e^w μ_n`, exact only for the normalised `C~`.
    Unscaled,
    /// `-a(X+∇w)·e_n = (n^{n-1} σ_{n-1}/2) L e^w μ_n` with `L = 1/∫ e^w dμ_n = e^{-C~}`.
    Matched,
}

/// Interior and boundary residuals of the Euler-Lagrange system for an extremal.
///
/// The interior residual is computed in the `u`-picture; the boundary one
/// uses `X + ∇w` assembled from the `w` field.
pub fn el_residual_w(
    params: &OnofriTraceExtremal,
    points: &[HalfSpacePoint],
    boundary_points: &[HalfSpacePoint],
    scaling: BoundaryScaling,
) -> Result<(ResidualReport, ResidualReport)> {
    let interior = interior_residual_closed(&params.liouville(), points)?;
    let n = params.n.get();
    let nf = n as f64;
    let kappa = match scaling {
        BoundaryScaling::Unscaled => 1.0,
        BoundaryScaling::Matched => nf.powf(nf - 1.0) * sphere_area(n) / 2.0 * (-params.c_tilde).exp(),
    };
    let w = onofri_w(params);
    let boundary = ResidualReport::collect(boundary_points, |x| {
        let (wv, gw) = w.value_and_gradient(x);
        let xi = x_field(x) + gw;
        -flux_a(&xi)[n - 1] - kappa * wv.exp() * mu_formula(n, x.coords())
    })?;
    Ok((interior, boundary))
}

/// The three surface terms of the Pohozaev identity on `B_R^+` and their sum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PohozaevReport {
    /// Left side, zero for `f = 0`, `p = n`.
    pub lhs: f64,
    /// Sum of the surface terms.
    pub rhs: f64,
    pub gap: f64,
    /// `∫_{∂B_R^+} |∇u|^{n-2}⟨∇u,ν⟩⟨x-y,∇u⟩`
    pub flux_term: f64,
    /// `∫_{Σ_R} e^u ⟨x-y,∇u⟩ dx'`
    pub boundary_term: f64,
    /// `-(1/n) ∫_{∂(B_R ∩ R^n_+)} |∇u|^n ⟨x-y,ν⟩`
    pub energy_term: f64,
    pub error_estimate: f64,
    pub converged: bool,
}

/// Pohozaev identity with `f = 0`, `g = e^u`, `Ω = B_R`, `p = n` and an arbitrary `y`.
pub fn pohozaev_check(params: &LiouvilleSolution, r: f64, y: &SpaceVector, spec: &QuadratureSpec) -> Result<PohozaevReport> {
    let n = params.n.get();
    if y.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: y.len() });
    }
    let nf = n as f64;
    let flux = integrate_hemisphere(
        &|x| {
            let g = params.gradient_at(x.coords());
            let nu = x.as_vector().scale(1.0 / r);
            let a = flux_a(&g);
            a.dot(&nu) * (x.as_vector() - *y).dot(&g)
        },
        n,
        r,
        spec,
    )?;
    let bdry = integrate_boundary_ball(
        &|x| {
            let g = params.gradient_at(x.coords());
            params.value_at(x.coords()).exp() * (x.as_vector() - *y).dot(&g)
        },
        n,
        r,
        spec,
    )?;
    let curved = integrate_hemisphere(
        &|x| {
            let g = params.gradient_at(x.coords());
            g.norm().powf(nf) * (x.as_vector() - *y).dot(&x.as_vector()) / r
        },
        n,
        r,
        spec,
    )?;
    // on Σ_R the outer normal is -e_n, so ⟨x - y, ν⟩ = y_n
    let flat = if y[n - 1] != 0.0 {
        integrate_boundary_ball(&|x| params.gradient_at(x.coords()).norm().powf(nf) * y[n - 1], n, r, spec)?
    } else {
        QuadratureResult::exact(0.0)
    };
    let energy = curved.plus(flat).scaled(-1.0 / nf);
    let rhs = flux.value + bdry.value + energy.value;
    Ok(PohozaevReport {
        lhs: 0.0,
        rhs,
        gap: rhs,
        flux_term: flux.value,
        boundary_term: bdry.value,
        energy_term: energy.value,
        error_estimate: flux.error_estimate + bdry.error_estimate + energy.error_estimate,
        converged: flux.converged && bdry.converged && energy.converged,
    })
}

/// Both sides of the divergence identity `∫_{Σ_R} e^u dx' = ∫_{∂B_R^+} |∇u|^{n-2}⟨∇u,-ν⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluxReport {
    pub boundary_mass: QuadratureResult,
    pub hemisphere_flux: QuadratureResult,
}

impl FluxReport {
    pub fn gap(&self) -> f64 {
        self.boundary_mass.value - self.hemisphere_flux.value
    }
}

pub fn flux_identity(params: &LiouvilleSolution, r: f64, spec: &QuadratureSpec) -> Result<FluxReport> {
    let n = params.n.get();
    let boundary_mass = integrate_boundary_ball(&|x| params.value_at(x.coords()).exp(), n, r, spec)?;
    let hemisphere_flux = integrate_hemisphere(&|x| -flux_a(&params.gradient_at(x.coords())).dot(&x.as_vector()) / r, n, r, spec)?;
    Ok(FluxReport { boundary_mass, hemisphere_flux })
}

/// `β = (2 ∫ e^u dx' / (n ω_n))^{1/(n-1)}`.
pub fn beta_from_mass(boundary_mass: f64, n: usize) -> Result<f64> {
    if !(boundary_mass > 0.0 && boundary_mass.is_finite()) {
        return Err(invalid("boundary_mass", boundary_mass, "must be positive and finite"));
    }
    let nf = n as f64;
    Ok((2.0 * boundary_mass / (nf * omega(n as i32)?)).powf(1.0 / (nf - 1.0)))
}

/// `E = A(∇u) Hess u - (|∇u|^{n-2} ∇u ∇u^T - |∇u|^n I / n)` for any gradient and Hessian.
pub fn stress_tensor_generic(grad: &SpaceVector, hess: &Matrix) -> Matrix {
    let n = grad.len();
    let nf = n as f64;
    let ah = flux_a_jacobian(grad).mul_mat(hess);
    let g2 = grad.norm_sq();
    let gn2 = g2.powf(0.5 * (nf - 2.0));
    let mut e = Matrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let delta = if i == j { g2 * gn2 / nf } else { 0.0 };
            e.set(i, j, ah.get(i, j) - (gn2 * grad[i] * grad[j] - delta));
        }
    }
    e
}

/// `E_ij` for a Liouville solution, from the closed-form flux Jacobian.
pub fn stress_tensor_e(params: &LiouvilleSolution, x: &HalfSpacePoint) -> Matrix {
    let n = params.n.get();
    let nf = n as f64;
    let g = params.gradient_at(x.coords());
    let g2 = g.norm_sq();
    let gn2 = g2.powf(0.5 * (nf - 2.0));
    let j = liouville_flux_jacobian(params, x);
    let mut e = Matrix::zeros(n);
    for a in 0..n {
        for b in 0..n {
            let delta = if a == b { g2 * gn2 / nf } else { 0.0 };
            e.set(a, b, j.get(a, b) - (gn2 * g[a] * g[b] - delta));
        }
    }
    e
}

/// `v = |x - x0|^{n/(n-1)} / (n λ^{1/(n-1)})` with its gradient and Hessian.
pub fn auxiliary_v(params: &LiouvilleSolution, x: &HalfSpacePoint) -> (f64, SpaceVector, Matrix) {
    let n = params.n.get();
    let nf = n as f64;
    let m = nf / (nf - 1.0);
    let z = x.as_vector() - params.centre();
    let r2 = z.norm_sq();
    let c = 1.0 / (nf * params.lambda.powf(1.0 / (nf - 1.0)));
    let v = c * r2.powf(0.5 * m);
    let k = c * m * r2.powf(0.5 * (m - 2.0));
    let mut h = Matrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let delta = if i == j { 1.0 } else { 0.0 };
            h.set(i, j, k * (delta + (m - 2.0) * z[i] * z[j] / r2));
        }
    }
    (v, z.scale(k), h)
}

/// Residuals of `Δ_n v = (n-1)|∇v|^n / v` inside and `|∇v|^{n-2} ∂_t v = (n-1)^{1-n}` on the boundary.
pub fn auxiliary_v_check(
    params: &LiouvilleSolution,
    points: &[HalfSpacePoint],
    boundary_points: &[HalfSpacePoint],
) -> Result<(ResidualReport, ResidualReport)> {
    let n = params.n.get();
    let nf = n as f64;
    let interior = ResidualReport::collect(points, |x| {
        let (v, g, h) = auxiliary_v(params, x);
        flux_a_jacobian(&g).mul_mat(&h).trace() - (nf - 1.0) * g.norm().powf(nf) / v
    })?;
    let boundary = ResidualReport::collect(boundary_points, |x| {
        let (_, g, _) = auxiliary_v(params, x);
        flux_a(&g)[n - 1] - (nf - 1.0).powf(1.0 - nf)
    })?;
    Ok((interior, boundary))
}

/// One row of the second-order scaling report.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecondOrderRow {
    pub radius: f64,
    /// `∫_{B_{2R}^+ \ B_R^+} |∇[a(∇u)]|^2 e^{γu} dx`
    pub integral: f64,
    /// `integral · R^{(γ+1)n}`
    pub ratio: f64,
    pub error_estimate: f64,
}

/// Scaled second-order integrals over dyadic half-annuli. Reported, not gated:
/// only boundedness of the ratios is meaningful.
pub fn second_order_ratio(params: &LiouvilleSolution, gamma: f64, radii: &[f64], spec: &QuadratureSpec) -> Result<Vec<SecondOrderRow>> {
    let n = params.n.get();
    let nf = n as f64;
    let f = |x: &HalfSpacePoint| {
        let j = liouville_flux_jacobian(params, x);
        let mut s = 0.0;
        for a in 0..n {
            for b in 0..n {
                s += j.get(a, b) * j.get(a, b);
            }
        }
        s * (gamma * params.value_at(x.coords())).exp()
    };
    radii
        .iter()
        .map(|&r| {
            let outer = integrate_half_ball(&f, n, 2.0 * r, spec)?;
            let inner = integrate_half_ball(&f, n, r, spec)?;
            let integral = outer.value - inner.value;
            let scale = r.powf((gamma + 1.0) * nf);
            Ok(SecondOrderRow {
                radius: r,
                integral,
                ratio: integral * scale,
                error_estimate: (outer.error_estimate + inner.error_estimate) * scale,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extremals::liouville_u;
    use crate::fields::Shifted;
    use crate::geometry::Dimension;
    use crate::sampling::{boundary_points, interior_points};
    use std::f64::consts::PI;

    fn sol(n: usize, lambda: f64, shift: f64) -> LiouvilleSolution {
        LiouvilleSolution::new(Dimension::new(n).unwrap(), lambda, &vec![shift; n - 1]).unwrap()
    }

    #[test]
    fn closed_form_residuals_vanish() {
        for n in 2..=4 {
            let p = sol(n, 1.0, 0.0);
            let pts = interior_points(n, 200, 1, 5.0, 0.01);
            let bps = boundary_points(n, 200, 2, 5.0);
            assert!(interior_residual_closed(&p, &pts).unwrap().max_abs < 1e-12);
            assert!(neumann_residual(&p, &bps).unwrap().max_abs < 1e-12);
        }
    }

    #[test]
    fn neumann_negative_control() {
        let p = sol(3, 1.0, 0.0);
        let bps = boundary_points(3, 50, 3, 2.0);
        let shifted = Shifted { inner: liouville_u(&p), shift: 0.1 };
        let r = neumann_residual_field(&shifted, &bps).unwrap();
        assert!(r.max_abs > 1e-2);
        assert!(neumann_residual_field(&liouville_u(&p), &bps).unwrap().max_abs < 1e-12);
    }

    #[test]
    fn fd_residual_is_second_order() {
        let p = sol(3, 1.0, 0.3);
        let u = liouville_u(&p);
        let pts = interior_points(3, 50, 4, 3.0, 0.5);
        let a = interior_residual_fd(&u, &pts, 1e-2).unwrap().max_abs;
        let b = interior_residual_fd(&u, &pts, 5e-3).unwrap().max_abs;
        assert!(a / b > 3.0 && a / b < 5.0, "{a} {b}");
    }

    #[test]
    fn planar_laplacian() {
        let u = liouville_u(&sol(2, 1.0, 0.0));
        let x = HalfSpacePoint::new(&[0.3], 0.7).unwrap();
        assert!(laplacian_5pt(&u, &x, 1e-3).abs() < 1e-5);
    }

    #[test]
    fn stress_tensor_vanishes_and_control_does_not() {
        for n in 2..=4 {
            let p = sol(n, 1.0, 0.2);
            for x in interior_points(n, 50, 5, 4.0, 0.0) {
                assert!(stress_tensor_e(&p, &x).max_abs() < 1e-10);
                let g = p.gradient_at(x.coords());
                let h = p.hessian(&x);
                assert!(stress_tensor_generic(&g, &h).max_abs() < 1e-10);
            }
            let x = HalfSpacePoint::new(&vec![0.5; n - 1], 0.5).unwrap();
            let eps = 1e-3;
            let g = p.gradient_at(x.coords()) + x.as_vector().scale(2.0 * eps);
            let h = p.hessian(&x);
            let mut h2 = h;
            for i in 0..n {
                h2.set(i, i, h.get(i, i) + 2.0 * eps);
            }
            let e = stress_tensor_generic(&g, &h2).max_abs();
            assert!(e > 1e-5 && e < 1e-1, "{e}");
        }
    }

    #[test]
    fn auxiliary_v_equations() {
        for n in 2..=3 {
            let p = sol(n, 0.7, 0.4);
            let pts = interior_points(n, 100, 6, 5.0, 0.0);
            let bps = boundary_points(n, 100, 7, 5.0);
            let (i, b) = auxiliary_v_check(&p, &pts, &bps).unwrap();
            assert!(i.max_abs < 1e-10 && b.max_abs < 1e-12, "{i:?} {b:?}");
            let x = pts[0];
            let v = auxiliary_v(&p, &x).0;
            assert!((v - (-p.value_at(x.coords()) / (n as f64 - 1.0)).exp()).abs() < 1e-12 * v);
        }
    }

    #[test]
    fn el_boundary_scalings() {
        let n = Dimension::new(2).unwrap();
        let bps = boundary_points(2, 100, 8, 10.0);
        let pts = interior_points(2, 100, 9, 10.0, 0.0);
        let norm = OnofriTraceExtremal::liouville_normalisation(n);
        let e = OnofriTraceExtremal::new(n, 3.0, &[0.0], norm).unwrap();
        let (_, b) = el_residual_w(&e, &pts, &bps, BoundaryScaling::Unscaled).unwrap();
        assert!(b.max_abs < 1e-12);
        let e0 = OnofriTraceExtremal::new(n, 3.0, &[0.0], 0.0).unwrap();
        let (_, b) = el_residual_w(&e0, &pts, &bps, BoundaryScaling::Matched).unwrap();
        assert!(b.max_abs < 1e-12);
        let (_, b) = el_residual_w(&e0, &pts, &bps, BoundaryScaling::Unscaled).unwrap();
        assert!(b.max_abs > 1e-3);
    }

    #[test]
    fn pohozaev_and_flux_n2() {
        let p = sol(2, 1.0, 0.0);
        let spec = QuadratureSpec::for_dimension(2);
        let r = pohozaev_check(&p, 5.0, &SpaceVector::zeros(2), &spec).unwrap();
        assert!(r.gap.abs() < 1e-6, "{r:?}");
        let y = SpaceVector::from_slice(&[10.0, 0.5]).unwrap();
        let r = pohozaev_check(&p, 5.0, &y, &spec).unwrap();
        assert!(r.gap.abs() < 1e-6, "{r:?}");
        let f = flux_identity(&p, 10.0, &spec).unwrap();
        assert!(f.gap().abs() < 1e-8, "{f:?}");
        assert!((beta_from_mass(2.0 * PI, 2).unwrap() - 2.0).abs() < 1e-15);
        assert!((beta_from_mass(18.0 * PI, 3).unwrap() - 3.0).abs() < 1e-14);
        assert!(beta_from_mass(0.0, 2).is_err());
    }
}
