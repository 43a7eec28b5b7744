//! Both sides of the half-space trace inequality and of its whole-space
//! counterpart, with the deficit, the quotient, the weighted norm and the
//! finite-mass integrals.
//!
//! Integrability is decided from the field's declared [`Tail`] before any
//! quadrature runs. Fields with an unknown tail are integrated anyway and the
//! result carries `tail_assumed = true`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{ScalarField, Tail};
use crate::geometry::{HalfSpacePoint, SpaceVector};
use crate::kernels::{alpha_n, beta_n_fullspace, h_n, kn_unchecked, mu_formula, omega, weight_nu_n, x_field};
use crate::quadrature::{integrate_boundary, integrate_full_space, integrate_half_space, QuadratureResult, QuadratureSpec};

/// A functional value with its propagated quadrature error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error_estimate: f64,
    pub n_evals: usize,
    /// The field declared no tail, so integrability was not verified.
    pub tail_assumed: bool,
}

impl Estimate {
    fn from_quad(q: QuadratureResult, tail_assumed: bool) -> Self {
        Self { value: q.value, error_estimate: q.error_estimate, n_evals: q.n_evals, tail_assumed }
    }
}

/// Both sides of the trace inequality for one field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeficitReport {
    /// `log ∫ e^w dμ_n - ∫ w dμ_n`
    pub lhs: f64,
    /// `α_n ∫ K_n(x, ∇w) dx`
    pub rhs: f64,
    pub deficit: f64,
    /// Error estimates of `lhs` and `rhs`.
    pub quad_errors: (f64, f64),
    pub tail_assumed: bool,
}

impl DeficitReport {
    pub fn combined_error(&self) -> f64 {
        self.quad_errors.0 + self.quad_errors.1
    }
}

/// The three pieces of the weighted norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedNorm {
    /// `∫ |w| dμ_n`
    pub b1: Estimate,
    /// `‖∇w‖_{L^n}`
    pub gn: Estimate,
    /// `(∫ |∇w|^2 |∇log μ_n|^{n-2} dx)^{1/2}`
    pub cross: Estimate,
}

impl WeightedNorm {
    pub fn total(&self) -> f64 {
        self.b1.value + self.gn.value + self.cross.value
    }
}

/// `∫ e^{nu/(n-1)} dx` and `∫ e^u dx'`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassReport {
    pub interior: Estimate,
    pub boundary: Estimate,
}

fn dim_i32(f: &dyn ScalarField) -> i32 {
    f.dim() as i32
}

/// `Ok(true)` when the tail is unknown, `Ok(false)` when it is verified.
fn require_log_coefficient(w: &dyn ScalarField, below: f64, what: &str) -> Result<bool> {
    match w.tail().log_coefficient() {
        None => Ok(true),
        Some(c) if c < below => Ok(false),
        Some(c) => Err(Error::Divergent(format!("{what}: field grows like {c} log|x| (needs < {below}) for {}", w.describe()))),
    }
}

fn require_grad_decay(w: &dyn ScalarField, above: f64, what: &str) -> Result<bool> {
    match w.tail().grad_decay() {
        None => Ok(true),
        Some(k) if k > above => Ok(false),
        Some(k) => Err(Error::Divergent(format!("{what}: |∇w| decays like |x|^-{k} (needs > {above}) for {}", w.describe()))),
    }
}

fn require_not_linear(w: &dyn ScalarField, what: &str) -> Result<bool> {
    match w.tail() {
        Tail::Unknown => Ok(true),
        Tail::LinearGrowth => Err(Error::Divergent(format!("{what}: linear growth of {}", w.describe()))),
        _ => Ok(false),
    }
}

#[inline]
fn boundary_mu(x: &HalfSpacePoint) -> f64 {
    mu_formula(x.dim(), x.coords())
}

/// Reference value used to shift `w` before exponentiating.
fn shift_of(w: &dyn ScalarField) -> f64 {
    let origin = HalfSpacePoint::from_coords(&vec![0.0; w.dim()]).expect("origin is a valid point");
    let c = w.value(&origin);
    if c.is_finite() {
        c
    } else {
        0.0
    }
}

/// `log ∫ e^w dμ_n - ∫ w dμ_n`.
///
/// Both integrals are taken of `w - w(0)`, which leaves the difference
/// unchanged and keeps the exponential in range.
pub fn onofri_lhs(w: &dyn ScalarField, spec: &QuadratureSpec) -> Result<Estimate> {
    let assumed = require_log_coefficient(w, 1.0, "∫ e^w dμ_n")? | require_not_linear(w, "∫ w dμ_n")?;
    let n = w.dim();
    let c = shift_of(w);
    let exp_part = integrate_boundary(&|x| (w.value(x) - c).exp() * boundary_mu(x), n, spec)?.require("∫ e^w dμ_n")?;
    let lin_part = integrate_boundary(&|x| (w.value(x) - c) * boundary_mu(x), n, spec)?.require("∫ w dμ_n")?;
    if !(exp_part.value > 0.0) {
        return Err(Error::Domain("∫ e^w dμ_n is not positive".into()));
    }
    Ok(Estimate {
        value: exp_part.value.ln() - lin_part.value,
        error_estimate: exp_part.error_estimate / exp_part.value + lin_part.error_estimate,
        n_evals: exp_part.n_evals + lin_part.n_evals,
        tail_assumed: assumed,
    })
}

/// `log ∫ e^w dμ_n` on its own.
pub fn log_boundary_exp(w: &dyn ScalarField, spec: &QuadratureSpec) -> Result<Estimate> {
    let assumed = require_log_coefficient(w, 1.0, "∫ e^w dμ_n")?;
    let c = shift_of(w);
    let q = integrate_boundary(&|x| (w.value(x) - c).exp() * boundary_mu(x), w.dim(), spec)?.require("∫ e^w dμ_n")?;
    Ok(Estimate { value: q.value.ln() + c, error_estimate: q.error_estimate / q.value, n_evals: q.n_evals, tail_assumed: assumed })
}

/// `∫ w dμ_n`.
pub fn boundary_mean(w: &dyn ScalarField, spec: &QuadratureSpec) -> Result<Estimate> {
    let assumed = require_not_linear(w, "∫ w dμ_n")?;
    let q = integrate_boundary(&|x| w.value(x) * boundary_mu(x), w.dim(), spec)?.require("∫ w dμ_n")?;
    Ok(Estimate::from_quad(q, assumed))
}

/// `∫_{R^n_+} K_n(x, ∇w) dx`, without the constant `α_n`.
pub fn kn_energy(w: &dyn ScalarField, spec: &QuadratureSpec) -> Result<Estimate> {
    let assumed = require_grad_decay(w, 1.0, "∫ K_n(x, ∇w)")?;
    let q = integrate_half_space(&|x| kn_unchecked(x, &w.gradient(x)), w.dim(), spec)?.require("∫ K_n(x, ∇w)")?;
    Ok(Estimate::from_quad(q, assumed))
}

/// `α_n ∫ K_n(x,∇w) dx - (log ∫ e^w dμ_n - ∫ w dμ_n)`.
pub fn deficit(w: &dyn ScalarField, spec: &QuadratureSpec) -> Result<DeficitReport> {
    let alpha = alpha_n(dim_i32(w))?;
    let lhs = onofri_lhs(w, spec)?;
    let energy = kn_energy(w, spec)?;
    let rhs = alpha * energy.value;
    Ok(DeficitReport {
        lhs: lhs.value,
        rhs,
        deficit: rhs - lhs.value,
        quad_errors: (lhs.error_estimate, alpha * energy.error_estimate),
        tail_assumed: lhs.tail_assumed || energy.tail_assumed,
    })
}

/// `Q_n[w] = ∫ K_n(x,∇w) dx / (log ∫ e^w dμ_n - ∫ w dμ_n)`.
///
/// Undefined when the denominator is zero within its error, which is the
/// case for every constant.
pub fn quotient_q(w: &dyn ScalarField, spec: &QuadratureSpec) -> Result<Estimate> {
    let lhs = onofri_lhs(w, spec)?;
    if lhs.value.abs() <= 10.0 * lhs.error_estimate + 1e-12 {
        return Err(Error::Undefined(format!("quotient denominator {} is zero within its error {}", lhs.value, lhs.error_estimate)));
    }
    let energy = kn_energy(w, spec)?;
    let q = energy.value / lhs.value;
    Ok(Estimate {
        value: q,
        error_estimate: q.abs()
            * (energy.error_estimate / energy.value.abs().max(f64::MIN_POSITIVE) + lhs.error_estimate / lhs.value.abs()),
        n_evals: lhs.n_evals + energy.n_evals,
        tail_assumed: lhs.tail_assumed || energy.tail_assumed,
    })
}

/// The three components of the weighted norm of `w`.
pub fn weighted_norm(w: &dyn ScalarField, spec: &QuadratureSpec) -> Result<WeightedNorm> {
    let n = w.dim();
    let nf = n as f64;
    let assumed_b = require_not_linear(w, "∫ |w| dμ_n")?;
    let assumed_g = require_grad_decay(w, 1.0, "‖∇w‖_{L^n}")?;
    let b1 = integrate_boundary(&|x| w.value(x).abs() * boundary_mu(x), n, spec)?.require("∫ |w| dμ_n")?;
    let gn = integrate_half_space(&|x| w.gradient(x).norm().powf(nf), n, spec)?.require("∫ |∇w|^n")?;
    let cross = integrate_half_space(
        &|x| {
            let g2 = w.gradient(x).norm_sq();
            if n == 2 {
                g2
            } else {
                g2 * x_field(x).norm().powf(nf - 2.0)
            }
        },
        n,
        spec,
    )?
    .require("∫ |∇w|^2 |∇log μ_n|^{n-2}")?;
    // d(I^{1/k}) = I^{1/k - 1} dI / k
    let root = |q: QuadratureResult, k: f64, assumed: bool| {
        let v = q.value.max(0.0).powf(1.0 / k);
        let err = if q.value > 0.0 { v * q.error_estimate / (k * q.value) } else { q.error_estimate.powf(1.0 / k) };
        Estimate { value: v, error_estimate: err, n_evals: q.n_evals, tail_assumed: assumed }
    };
    Ok(WeightedNorm { b1: Estimate::from_quad(b1, assumed_b), gn: root(gn, nf, assumed_g), cross: root(cross, 2.0, assumed_g) })
}

/// `∫_{R^n_+} e^{n w/(n-1)} μ_n^{n/(n-1)} dx`.
pub fn energy_exp_interior(w: &dyn ScalarField, spec: &QuadratureSpec) -> Result<Estimate> {
    let assumed = require_log_coefficient(w, 1.0, "∫ e^{nw/(n-1)} μ_n^{n/(n-1)}")?;
    let n = w.dim();
    let e = n as f64 / (n as f64 - 1.0);
    let q = integrate_half_space(&|x| (e * (w.value(x) + mu_formula(n, x.coords()).ln())).exp(), n, spec)?
        .require("∫ e^{nw/(n-1)} μ_n^{n/(n-1)}")?;
    Ok(Estimate::from_quad(q, assumed))
}

/// `(∫ e^{nu/(n-1)} dx, ∫ e^u dx')` for a field in the `u`-picture.
///
/// A declared tail says how fast `u` may grow but not its sign, so only an
/// unknown tail is flagged; divergence then shows up as non-convergence.
pub fn finite_mass(u: &dyn ScalarField, spec: &QuadratureSpec) -> Result<MassReport> {
    let n = u.dim();
    let assumed = matches!(u.tail(), Tail::Unknown);
    let e = n as f64 / (n as f64 - 1.0);
    let interior = integrate_half_space(&|x| (e * u.value(x)).exp(), n, spec)?.require("∫ e^{nu/(n-1)}")?;
    let boundary = integrate_boundary(&|x| u.value(x).exp(), n, spec)?.require("∫ e^u dx'")?;
    Ok(MassReport { interior: Estimate::from_quad(interior, assumed), boundary: Estimate::from_quad(boundary, assumed) })
}

/// Whole-space left side `log ∫ e^w dν_n - ∫ w dν_n`.
pub fn fullspace_lhs(w: &dyn ScalarField, spec: &QuadratureSpec) -> Result<Estimate> {
    let n = w.dim();
    let nf = n as f64;
    let assumed = require_log_coefficient(w, nf / (nf - 1.0), "∫ e^w dν_n")? | require_not_linear(w, "∫ w dν_n")?;
    let c = w.value_full(&SpaceVector::zeros(n));
    let c = if c.is_finite() { c } else { 0.0 };
    let exp_part = integrate_full_space(&|x| (w.value_full(x) - c).exp() * weight_nu_n(x), n, 0.0, spec)?.require("∫ e^w dν_n")?;
    let lin_part = integrate_full_space(&|x| (w.value_full(x) - c) * weight_nu_n(x), n, 0.0, spec)?.require("∫ w dν_n")?;
    if !(exp_part.value > 0.0) {
        return Err(Error::Domain("∫ e^w dν_n is not positive".into()));
    }
    Ok(Estimate {
        value: exp_part.value.ln() - lin_part.value,
        error_estimate: exp_part.error_estimate / exp_part.value + lin_part.error_estimate,
        n_evals: exp_part.n_evals + lin_part.n_evals,
        tail_assumed: assumed,
    })
}

/// Radius of the ball about the origin left out of [`hn_energy`].
const HN_EXCLUDED_RADIUS: f64 = 1e-6;

/// `∫_{R^n} H_n(x, ∇w) dx`, without the constant `β_n`.
///
/// The kernel's prefactor is singular at the origin for `n >= 3` although
/// the integrand stays bounded, so a ball of radius `1e-6` is left out and
/// its contribution is added to the error estimate.
pub fn hn_energy(w: &dyn ScalarField, spec: &QuadratureSpec) -> Result<Estimate> {
    let assumed = require_grad_decay(w, 1.0, "∫ H_n(x, ∇w)")?;
    let n = w.dim();
    let integrand = |x: &SpaceVector| h_n(x, &w.gradient_full(x)).unwrap_or(0.0);
    let q = integrate_full_space(&integrand, n, HN_EXCLUDED_RADIUS, spec)?.require("∫ H_n(x, ∇w)")?;
    // sup of the integrand on the excluded ball, sampled on the axes at its radius
    let mut sup = 0.0f64;
    for i in 0..n {
        for s in [-1.0, 1.0] {
            let x = SpaceVector::unit(n, i).scale(s * HN_EXCLUDED_RADIUS);
            sup = sup.max(integrand(&x).abs());
        }
    }
    let ball = omega(n as i32)? * HN_EXCLUDED_RADIUS.powi(n as i32) * 2.0 * sup;
    Ok(Estimate { value: q.value, error_estimate: q.error_estimate + ball, n_evals: q.n_evals, tail_assumed: assumed })
}

/// Whole-space deficit `β_n ∫ H_n(x,∇w) dx - (log ∫ e^w dν_n - ∫ w dν_n)`.
pub fn fullspace_deficit(w: &dyn ScalarField, spec: &QuadratureSpec) -> Result<DeficitReport> {
    let beta = beta_n_fullspace(dim_i32(w))?;
    let lhs = fullspace_lhs(w, spec)?;
    let energy = hn_energy(w, spec)?;
    let rhs = beta * energy.value;
    Ok(DeficitReport {
        lhs: lhs.value,
        rhs,
        deficit: rhs - lhs.value,
        quad_errors: (lhs.error_estimate, beta * energy.error_estimate),
        tail_assumed: lhs.tail_assumed || energy.tail_assumed,
    })
}
