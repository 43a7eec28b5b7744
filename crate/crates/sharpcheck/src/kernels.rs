//! Pointwise formulas: convexity remainders, the half-space and full-space
//! kernels, the weights, and the sharp constants.

use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::geometry::{HalfSpacePoint, Matrix, SpaceVector};
use crate::special::{beta, gamma};

/// Convexity remainder `|X+Y|^p - |X|^p - p|X|^{p-2} X·Y` without argument checks.
///
/// Evaluated as `|X|^p [ (1+z)^{p/2} - 1 - (p/2) z_1 ]` with
/// `z = (2X·Y + |Y|^2)/|X|^2` and `z_1 = 2X·Y/|X|^2`, switching to the binomial
/// series for small `z`. This keeps full relative accuracy when `|Y| << |X|`,
/// which is the far-field regime of every kernel integral.
pub fn convexity_remainder(x: &[f64], y: &[f64], p: f64) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    let mut b = 0.0;
    let mut xy = 0.0;
    let mut yy = 0.0;
    for i in 0..x.len() {
        b += x[i] * x[i];
        xy += x[i] * y[i];
        yy += y[i] * y[i];
    }
    if yy == 0.0 {
        return 0.0;
    }
    if b == 0.0 {
        return yy.powf(0.5 * p);
    }
    let q = 0.5 * p;
    let z = ((2.0 * xy + yy) / b).max(-1.0);
    let scale = b.powf(q);
    if z.abs() < 1e-3 {
        // (1+z)^q - 1 - q z_1 = q (z - z_1) + sum_{k>=2} binom(q,k) z^k
        let mut sum = 0.0;
        let mut coeff = q * (q - 1.0) / 2.0;
        let mut zk = z * z;
        for k in 2..10 {
            sum += coeff * zk;
            coeff *= (q - k as f64) / (k as f64 + 1.0);
            zk *= z;
        }
        scale * (q * yy / b + sum)
    } else {
        scale * ((q * z.ln_1p()).exp_m1() - q * 2.0 * xy / b)
    }
}

/// `R_p(X, Y)`, the convexity remainder of `|.|^p` at `X` in direction `Y`.
pub fn r_p(x: &SpaceVector, y: &SpaceVector, p: f64) -> Result<f64> {
    x.same_len(y)?;
    if !(p > 1.0) {
        return Err(Error::InvalidExponent { p, reason: "R_p requires p > 1" });
    }
    Ok(convexity_remainder(x.as_slice(), y.as_slice(), p))
}

/// Drift of the full-space kernel: `-n |y|^{-(n-2)/(n-1)} y / (1 + |y|^{n/(n-1)})`.
pub fn fullspace_drift(y: &SpaceVector) -> SpaceVector {
    let n = y.len() as f64;
    let r = y.norm();
    let c = -n * r.powf(-(n - 2.0) / (n - 1.0)) / (1.0 + r.powf(n / (n - 1.0)));
    y.scale(c)
}

/// `H_n(y, z) = R_n(drift(y), (n-1)z/n)`.
pub fn h_n(y: &SpaceVector, z: &SpaceVector) -> Result<f64> {
    y.same_len(z)?;
    let n = y.len();
    if n < 2 {
        return Err(Error::UnsupportedDimension(n));
    }
    let nf = n as f64;
    let zz = z.scale((nf - 1.0) / nf);
    if y.norm_sq() == 0.0 {
        if n == 2 {
            return Ok(convexity_remainder(SpaceVector::zeros(2).as_slice(), zz.as_slice(), 2.0));
        }
        return Err(Error::Domain("H_n is singular at y = 0 for n >= 3".into()));
    }
    Ok(convexity_remainder(fullspace_drift(y).as_slice(), zz.as_slice(), nf))
}

/// `X = -n (x', 1+t) / ((1+t)^2 + |x'|^2)`, the gradient of `log mu_n`.
pub fn x_field(x: &HalfSpacePoint) -> SpaceVector {
    let n = x.dim();
    let mut v = x.as_vector();
    v[n - 1] += 1.0;
    let d = v.norm_sq();
    v.scale(-(n as f64) / d)
}

/// `K_n(x, y) = R_n(X(x), y)`.
pub fn k_n(x: &HalfSpacePoint, y: &SpaceVector) -> Result<f64> {
    if y.len() != x.dim() {
        return Err(Error::DimensionMismatch { expected: x.dim(), got: y.len() });
    }
    Ok(kn_unchecked(x, y))
}

#[inline]
pub(crate) fn kn_unchecked(x: &HalfSpacePoint, y: &SpaceVector) -> f64 {
    convexity_remainder(x_field(x).as_slice(), y.as_slice(), x.dim() as f64)
}

/// `|S^{n-1}|` for integer n >= 1, used internally without checks.
#[inline]
pub(crate) fn sphere_area(n: usize) -> f64 {
    let h = 0.5 * n as f64;
    2.0 * PI.powf(h) / gamma(h)
}

/// Weight formula of dimension `n` applied to a coordinate list `(x', t)`.
#[inline]
pub(crate) fn mu_formula(n: usize, coords: &[f64]) -> f64 {
    let m = coords.len();
    let mut d = 0.0;
    for c in &coords[..m - 1] {
        d += c * c;
    }
    let s = 1.0 + coords[m - 1];
    d += s * s;
    2.0 / (sphere_area(n) * d.powf(0.5 * n as f64))
}

/// `mu_n(x', t) = 2 / (sigma_{n-1} ((1+t)^2 + |x'|^2)^{n/2})`.
pub fn weight_mu_n(x: &HalfSpacePoint) -> f64 {
    mu_formula(x.dim(), x.coords())
}

/// `mu_{n+1}` evaluated at the n-dimensional point `(x', t)`.
pub fn weight_mu_tilde(x: &HalfSpacePoint) -> f64 {
    mu_formula(x.dim() + 1, x.coords())
}

/// `nu_n(x) = (n / sigma_{n-1}) (1 + |x|^{n/(n-1)})^{-n}` on R^n.
pub fn weight_nu_n(x: &SpaceVector) -> f64 {
    let n = x.len();
    let nf = n as f64;
    nf / sphere_area(n) / (1.0 + x.norm().powf(nf / (nf - 1.0))).powf(nf)
}

fn check_positive_int(n: i32) -> Result<usize> {
    if n >= 1 {
        Ok(n as usize)
    } else {
        Err(invalid("n", n as f64, "must be a positive integer"))
    }
}

fn check_dim(n: i32) -> Result<usize> {
    if n >= 2 {
        Ok(n as usize)
    } else {
        Err(invalid("n", n as f64, "must be at least 2"))
    }
}

/// `sigma_{n-1} = |S^{n-1}| = 2 pi^{n/2} / Gamma(n/2)`.
pub fn sigma(n: i32) -> Result<f64> {
    Ok(sphere_area(check_positive_int(n)?))
}

/// Volume of the unit ball of R^n.
pub fn omega(n: i32) -> Result<f64> {
    let n = check_positive_int(n)?;
    let h = 0.5 * n as f64;
    Ok(PI.powf(h) / gamma(h + 1.0))
}

/// `alpha_n = 2 / (n^n sigma_{n-1})`, the sharp constant of the trace inequality.
pub fn alpha_n(n: i32) -> Result<f64> {
    let n = check_dim(n)?;
    let nf = n as f64;
    Ok(2.0 / (nf.powi(n as i32) * sphere_area(n)))
}

/// `beta_n = n^{1-n} Gamma(n/2) / (2 (n-1) pi^{n/2})`, the full-space constant.
pub fn beta_n_fullspace(n: i32) -> Result<f64> {
    let n = check_dim(n)?;
    let nf = n as f64;
    Ok(nf.powf(1.0 - nf) * gamma(0.5 * nf) / (2.0 * (nf - 1.0) * PI.powf(0.5 * nf)))
}

fn check_p(n: usize, p: f64) -> Result<()> {
    if p > 1.0 && p < n as f64 {
        Ok(())
    } else {
        Err(Error::InvalidExponent { p, reason: "p must lie in (1, n)" })
    }
}

/// `delta = (n-p) / (p(n-1))`.
pub fn sobolev_delta(n: i32, p: f64) -> Result<f64> {
    let n = check_dim(n)?;
    check_p(n, p)?;
    let nf = n as f64;
    Ok((nf - p) / (p * (nf - 1.0)))
}

fn half_sigma_beta(n: usize, p: f64) -> f64 {
    let nf = n as f64;
    0.5 * sphere_area(n - 1) * beta(0.5 * (nf - 1.0), (nf - 1.0) / (2.0 * (p - 1.0)))
}

/// `C_{0,p} = (1/2) sigma_{n-2} B((n-1)/2, (n-1)/(2(p-1)))`.
pub fn c0p(n: i32, p: f64) -> Result<f64> {
    let n = check_dim(n)?;
    check_p(n, p)?;
    Ok(half_sigma_beta(n, p))
}

/// `C_{1,p} = (p(n-1)/(p-1))^{p-1} C_{0,p}`.
pub fn c1p(n: i32, p: f64) -> Result<f64> {
    let n = check_dim(n)?;
    check_p(n, p)?;
    let nf = n as f64;
    Ok((p * (nf - 1.0) / (p - 1.0)).powf(p - 1.0) * half_sigma_beta(n, p))
}

/// Limit of `C_{0,p}` as p -> n: `sigma_{n-1} / 2`.
pub fn c0_limit(n: i32) -> Result<f64> {
    Ok(0.5 * sphere_area(check_dim(n)?))
}

/// Limit of `C_{1,p}` as p -> n: `n^{n-1} sigma_{n-1} / 2`.
pub fn c1_limit(n: i32) -> Result<f64> {
    let n = check_dim(n)?;
    let nf = n as f64;
    Ok(0.5 * nf.powf(nf - 1.0) * sphere_area(n))
}

/// Sharp Sobolev trace constant `S(n, p)`.
pub fn sobolev_trace_constant(n: i32, p: f64) -> Result<f64> {
    let n = check_dim(n)?;
    check_p(n, p)?;
    let nf = n as f64;
    Ok(((nf - p) / (p - 1.0)).powf((p - 1.0) / p) * half_sigma_beta(n, p).powf((p - 1.0) / (p * (nf - 1.0))))
}

/// `a^eps(x) = (|x|^2 + eps^2)^{(n-2)/2} x`; at eps = 0 this is `a(x) = |x|^{n-2} x`.
pub fn regularized_flux_a_eps(x: &SpaceVector, eps: f64) -> Result<SpaceVector> {
    if !(eps >= 0.0) {
        return Err(invalid("eps", eps, "must be nonnegative"));
    }
    let n = x.len() as f64;
    let s = x.norm_sq() + eps * eps;
    if s == 0.0 {
        return Ok(*x);
    }
    Ok(x.scale(s.powf(0.5 * (n - 2.0))))
}

/// `a(xi) = |xi|^{n-2} xi` with `n = xi.len()`.
#[inline]
pub fn flux_a(xi: &SpaceVector) -> SpaceVector {
    let n = xi.len() as f64;
    let s = xi.norm_sq();
    if s == 0.0 {
        return *xi;
    }
    xi.scale(s.powf(0.5 * (n - 2.0)))
}

/// `A(xi) = Da(xi) = |xi|^{n-2} [I + (n-2) xi xi^T / |xi|^2]`.
///
/// At `xi = 0` this is the identity for `n = 2` and zero otherwise.
pub fn flux_a_jacobian(xi: &SpaceVector) -> Matrix {
    let n = xi.len();
    let nf = n as f64;
    let s = xi.norm_sq();
    if s == 0.0 {
        return if n == 2 { Matrix::identity(2) } else { Matrix::zeros(n) };
    }
    let c = s.powf(0.5 * (nf - 2.0));
    let mut m = Matrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let delta = if i == j { 1.0 } else { 0.0 };
            m.set(i, j, c * (delta + (nf - 2.0) * xi[i] * xi[j] / s));
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: &[f64]) -> SpaceVector {
        SpaceVector::from_slice(c).unwrap()
    }

    fn naive_r_p(x: &[f64], y: &[f64], p: f64) -> f64 {
        let xv = v(x);
        let yv = v(y);
        let s = xv + yv;
        let nx = xv.norm();
        let third = if nx == 0.0 { 0.0 } else { p * nx.powf(p - 2.0) * xv.dot(&yv) };
        s.norm().powf(p) - nx.powf(p) - third
    }

    #[test]
    fn r_p_examples() {
        assert!((r_p(&v(&[1.0, 0.0, 0.0]), &v(&[1.0, 0.0, 0.0]), 3.0).unwrap() - 4.0).abs() < 1e-14);
        let x = v(&[0.3, -1.2]);
        let y = v(&[2.0, 0.7]);
        assert!((r_p(&x, &y, 2.0).unwrap() - y.norm_sq()).abs() < 1e-14);
        assert_eq!(r_p(&x, &SpaceVector::zeros(2), 3.7).unwrap(), 0.0);
        assert!(r_p(&x, &y, 1.0).is_err());
        assert!(r_p(&x, &v(&[1.0, 2.0, 3.0]), 2.0).is_err());
        // X = 0 uses the continuous extension of the third term
        assert!((r_p(&SpaceVector::zeros(2), &y, 3.0).unwrap() - y.norm().powi(3)).abs() < 1e-14);
    }

    #[test]
    fn r_p_agrees_with_naive_formula_in_benign_regime() {
        let cases: [(&[f64], &[f64], f64); 4] = [
            (&[1.0, 2.0], &[-0.5, 0.25], 2.5),
            (&[0.1, 0.0, 3.0], &[1.0, 1.0, 1.0], 3.0),
            (&[1.0, 0.0, 0.0, 0.0], &[0.0, 0.0, 0.0, 0.01], 4.0),
            (&[2.0, 1.0], &[-2.0, -1.0], 1.5),
        ];
        for (x, y, p) in cases {
            let a = convexity_remainder(x, y, p);
            let b = naive_r_p(x, y, p);
            assert!((a - b).abs() < 1e-12 * b.abs().max(1.0), "{x:?} {y:?} {p}: {a} vs {b}");
        }
    }

    #[test]
    fn r_p_small_perturbation_is_quadratic() {
        // R_p(X, eY) ~ e^2 (p/2)|X|^{p-2}(|Y|^2 + (p-2)(X.Y)^2/|X|^2)
        let x = [1.0, 2.0, 0.5];
        let y = [0.3, -0.1, 0.7];
        let p = 3.0;
        let xv = v(&x);
        let yv = v(&y);
        let nx = xv.norm();
        let lead = 0.5 * p * nx.powf(p - 2.0) * (yv.norm_sq() + (p - 2.0) * xv.dot(&yv).powi(2) / (nx * nx));
        let e = 1e-7;
        let ye: Vec<f64> = y.iter().map(|c| c * e).collect();
        let got = convexity_remainder(&x, &ye, p) / (e * e);
        assert!(((got - lead) / lead).abs() < 1e-6);
    }

    #[test]
    fn h_n_examples() {
        assert_eq!(h_n(&v(&[1.0, 0.0]), &v(&[2.0, 0.0])).unwrap(), 1.0);
        assert_eq!(h_n(&v(&[0.3, 0.2, 0.1]), &SpaceVector::zeros(3)).unwrap(), 0.0);
        assert!(h_n(&SpaceVector::zeros(3), &v(&[1.0, 0.0, 0.0])).is_err());
        assert!((h_n(&SpaceVector::zeros(2), &v(&[2.0, 0.0])).unwrap() - 1.0).abs() < 1e-15);
        // independent evaluation with X = -(3/2) e1, Y = 2 e1
        let got = h_n(&v(&[1.0, 0.0, 0.0]), &v(&[3.0, 0.0, 0.0])).unwrap();
        let want = naive_r_p(&[-1.5, 0.0, 0.0], &[2.0, 0.0, 0.0], 3.0);
        assert!((got - want).abs() < 1e-13, "{got} vs {want}");
        assert!(got > 0.0);
    }

    #[test]
    fn x_field_examples() {
        let x = HalfSpacePoint::new(&[0.0], 0.0).unwrap();
        assert_eq!(x_field(&x).as_slice(), &[0.0, -2.0]);
        let x = HalfSpacePoint::new(&[0.0], 1.0).unwrap();
        assert_eq!(x_field(&x).as_slice(), &[0.0, -1.0]);
        let x = HalfSpacePoint::new(&[1e3], 0.0).unwrap();
        assert!((x_field(&x).norm() * 1e3 / 2.0 - 1.0).abs() < 1e-5);
    }

    #[test]
    fn k_n_examples() {
        let x = HalfSpacePoint::new(&[0.0], 0.0).unwrap();
        assert!((k_n(&x, &v(&[0.0, 2.0])).unwrap() - 4.0).abs() < 1e-14);
        assert_eq!(k_n(&x, &SpaceVector::zeros(2)).unwrap(), 0.0);
        assert!(k_n(&x, &SpaceVector::zeros(3)).is_err());
    }

    #[test]
    fn weights() {
        let o2 = HalfSpacePoint::new(&[0.0], 0.0).unwrap();
        let o3 = HalfSpacePoint::new(&[0.0, 0.0], 0.0).unwrap();
        assert!((weight_mu_n(&o2) - 1.0 / PI).abs() < 1e-15);
        assert!((weight_mu_n(&o3) - 0.5 / PI).abs() < 1e-15);
        assert!((weight_mu_tilde(&o2) - 0.5 / PI).abs() < 1e-15);
        assert!((weight_nu_n(&SpaceVector::zeros(2)) - 1.0 / PI).abs() < 1e-15);
        assert!((weight_nu_n(&SpaceVector::zeros(3)) - 0.75 / PI).abs() < 1e-15);
        for n in [2usize, 3] {
            let mut x = SpaceVector::zeros(n);
            x[0] = 1e3;
            let nf = n as f64;
            let scaled = weight_nu_n(&x) * 1e3_f64.powf(nf * nf / (nf - 1.0));
            assert!((scaled / (nf / sphere_area(n)) - 1.0).abs() < 0.01);
        }
    }

    #[test]
    fn constants() {
        assert!((sigma(2).unwrap() - 2.0 * PI).abs() < 1e-14);
        assert!((sigma(3).unwrap() - 4.0 * PI).abs() < 1e-14);
        assert!((sigma(4).unwrap() - 2.0 * PI * PI).abs() < 1e-13);
        assert!((sigma(1).unwrap() - 2.0).abs() < 1e-15);
        assert!(sigma(0).is_err());
        assert!((omega(2).unwrap() - PI).abs() < 1e-14);
        assert!((omega(3).unwrap() - 4.0 * PI / 3.0).abs() < 1e-14);
        assert!((alpha_n(2).unwrap() - 0.25 / PI).abs() < 1e-16);
        assert!((alpha_n(3).unwrap() - 1.0 / (54.0 * PI)).abs() < 1e-16);
        assert!(alpha_n(1).is_err());
        assert!((beta_n_fullspace(2).unwrap() - 0.25 / PI).abs() < 1e-16);
        let b3 = gamma(1.5) / (9.0 * 4.0 * PI.powf(1.5));
        assert!((beta_n_fullspace(3).unwrap() - b3).abs() < 1e-16);
        assert!((sobolev_trace_constant(3, 2.0).unwrap() - PI.powf(0.25)).abs() < 1e-14);
        assert!(sobolev_trace_constant(3, 3.0).is_err());
        assert!((sobolev_delta(3, 2.0).unwrap() - 0.25).abs() < 1e-16);
        assert!((c0_limit(3).unwrap() - 2.0 * PI).abs() < 1e-14);
        assert!((c1_limit(3).unwrap() - 18.0 * PI).abs() < 1e-13);
    }

    #[test]
    fn a_eps_examples() {
        let x4 = v(&[1.0, 0.0, 0.0, 0.0]);
        let a = regularized_flux_a_eps(&x4, 0.0).unwrap();
        let mut last = f64::INFINITY;
        for k in 1..6 {
            let e = 10f64.powi(-k);
            let d = (regularized_flux_a_eps(&x4, e).unwrap() - a).norm();
            assert!((d - e * e).abs() < 1e-14);
            assert!(d < last);
            last = d;
        }
        let x2 = v(&[0.3, -4.0]);
        assert_eq!(regularized_flux_a_eps(&x2, 0.7).unwrap(), x2);
        assert_eq!(regularized_flux_a_eps(&SpaceVector::zeros(3), 0.5).unwrap(), SpaceVector::zeros(3));
        assert!(regularized_flux_a_eps(&x2, -1.0).is_err());
    }
}
