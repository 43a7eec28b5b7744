//! Closed-form extremal families and classified solutions.
//!
//! Conventions: points are `(x', t)`; every family centred at `x0'` with scale
//! `lambda` uses the lifted centre `x0 = (x0', -lambda)` strictly below the
//! boundary, so `z = x - x0` never vanishes on the closed half-space.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fields::{ScalarField, Tail};
use crate::geometry::{Dimension, HalfSpacePoint, Matrix, SpaceVector};
use crate::kernels::{mu_formula, sphere_area, x_field};

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(invalid("lambda", lambda, "must be positive and finite"))
    }
}

fn check_prime(n: Dimension, x0_prime: &[f64]) -> Result<SpaceVector> {
    if x0_prime.len() != n.get() - 1 {
        return Err(Error::DimensionMismatch { expected: n.get() - 1, got: x0_prime.len() });
    }
    if x0_prime.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("non-finite x0'".into()));
    }
    SpaceVector::from_slice(x0_prime)
}

/// `z = x - (x0', -lambda)` for a point given by its coordinates.
#[inline]
fn lifted_offset(coords: &[f64], x0_prime: &SpaceVector, lambda: f64) -> SpaceVector {
    let n = coords.len();
    let mut z = SpaceVector::zeros(n);
    for i in 0..n - 1 {
        z[i] = coords[i] - x0_prime[i];
    }
    z[n - 1] = coords[n - 1] + lambda;
    z
}

/// `log mu_n(x)`.
#[inline]
pub fn log_mu_n(x: &HalfSpacePoint) -> f64 {
    mu_formula(x.dim(), x.coords()).ln()
}

/// The trace-inequality extremal family, parameters `(lambda, x0', C~)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OnofriTraceExtremal {
    pub n: Dimension,
    pub lambda: f64,
    pub x0_prime: SpaceVector,
    pub c_tilde: f64,
}

impl OnofriTraceExtremal {
    pub fn new(n: Dimension, lambda: f64, x0_prime: &[f64], c_tilde: f64) -> Result<Self> {
        check_lambda(lambda)?;
        let x0_prime = check_prime(n, x0_prime)?;
        if !c_tilde.is_finite() {
            return Err(invalid("c_tilde", c_tilde, "must be finite"));
        }
        Ok(Self { n, lambda, x0_prime, c_tilde })
    }

    /// The normalisation `log(n^{n-1} sigma_{n-1} / 2)` that maps the family
    /// onto the Liouville solutions.
    pub fn liouville_normalisation(n: Dimension) -> f64 {
        let nf = n.as_f64();
        (nf.powf(nf - 1.0) * sphere_area(n.get()) / 2.0).ln()
    }

    /// The Liouville solution with the same `(lambda, x0')`.
    pub fn liouville(&self) -> LiouvilleSolution {
        LiouvilleSolution { n: self.n, lambda: self.lambda, x0_prime: self.x0_prime }
    }
}

/// `w(x) = log[ (|x'|^2+(1+t)^2)^{n/2} lambda / (|x'-x0'|^2+(t+lambda)^2)^{n/2} ] + C~`.
#[derive(Clone, Debug)]
pub struct OnofriW {
    params: OnofriTraceExtremal,
}

/// The field `w` of the extremal family.
pub fn onofri_w(params: &OnofriTraceExtremal) -> OnofriW {
    OnofriW { params: params.clone() }
}

impl OnofriW {
    pub fn params(&self) -> &OnofriTraceExtremal {
        &self.params
    }
}

impl ScalarField for OnofriW {
    fn dim(&self) -> usize {
        self.params.n.get()
    }

    fn value(&self, x: &HalfSpacePoint) -> f64 {
        let p = &self.params;
        let n = x.dim();
        let xp = x.x_prime();
        let t = x.t();
        // D1 - D2 in closed form, so that w is exactly log(lambda) + C~ when
        // the two quadratic forms coincide
        let mut diff = (1.0 - p.lambda) * (1.0 + p.lambda + 2.0 * t);
        let mut d2 = (t + p.lambda) * (t + p.lambda);
        for (&a, &b) in xp.iter().zip(p.x0_prime.as_slice()).take(n - 1) {
            diff += b * (2.0 * a - b);
            let s = a - b;
            d2 += s * s;
        }
        0.5 * n as f64 * (diff / d2).ln_1p() + p.lambda.ln() + p.c_tilde
    }

    fn gradient(&self, x: &HalfSpacePoint) -> SpaceVector {
        let p = &self.params;
        let z = lifted_offset(x.coords(), &p.x0_prime, p.lambda);
        let nf = x.dim() as f64;
        z.scale(-nf / z.norm_sq()) - x_field(x)
    }

    fn tail(&self) -> Tail {
        Tail::Bounded { grad_decay: 2.0 }
    }

    fn describe(&self) -> String {
        let p = &self.params;
        format!("trace extremal w (n={}, lambda={}, x0'={:?}, C~={})", p.n, p.lambda, p.x0_prime, p.c_tilde)
    }
}

/// Classified solution of the Liouville system with parameters `(lambda, x0')`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiouvilleSolution {
    pub n: Dimension,
    pub lambda: f64,
    pub x0_prime: SpaceVector,
}

impl LiouvilleSolution {
    pub fn new(n: Dimension, lambda: f64, x0_prime: &[f64]) -> Result<Self> {
        check_lambda(lambda)?;
        let x0_prime = check_prime(n, x0_prime)?;
        Ok(Self { n, lambda, x0_prime })
    }

    /// Lifted centre `x0 = (x0', -lambda)`.
    pub fn centre(&self) -> SpaceVector {
        let n = self.n.get();
        let mut c = SpaceVector::zeros(n);
        for i in 0..n - 1 {
            c[i] = self.x0_prime[i];
        }
        c[n - 1] = -self.lambda;
        c
    }

    #[inline]
    fn offset(&self, coords: &[f64]) -> SpaceVector {
        lifted_offset(coords, &self.x0_prime, self.lambda)
    }

    /// `log(n^{n-1} lambda)`, the constant in `u + n log|x - x0|`.
    pub fn log_constant(&self) -> f64 {
        let nf = self.n.as_f64();
        (nf - 1.0) * nf.ln() + self.lambda.ln()
    }

    /// `u(x) = log(n^{n-1} lambda) - n log|x - x0|`, valid on R^n minus `x0`.
    pub fn value_at(&self, coords: &[f64]) -> f64 {
        let z = self.offset(coords);
        self.log_constant() - 0.5 * self.n.as_f64() * z.norm_sq().ln()
    }

    /// `∇u = -n z / |z|^2`.
    pub fn gradient_at(&self, coords: &[f64]) -> SpaceVector {
        let z = self.offset(coords);
        z.scale(-self.n.as_f64() / z.norm_sq())
    }

    /// Hessian `-n [I/|z|^2 - 2 z z^T/|z|^4]`.
    pub fn hessian(&self, x: &HalfSpacePoint) -> Matrix {
        let z = self.offset(x.coords());
        let n = z.len();
        let nf = n as f64;
        let r2 = z.norm_sq();
        let mut h = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let delta = if i == j { 1.0 } else { 0.0 };
                h.set(i, j, -nf * (delta / r2 - 2.0 * z[i] * z[j] / (r2 * r2)));
            }
        }
        h
    }
}

/// Field view of a Liouville solution.
#[derive(Clone, Copy, Debug)]
pub struct LiouvilleU {
    params: LiouvilleSolution,
}

/// The field `u` of the Liouville family.
pub fn liouville_u(params: &LiouvilleSolution) -> LiouvilleU {
    LiouvilleU { params: *params }
}

impl LiouvilleU {
    pub fn params(&self) -> &LiouvilleSolution {
        &self.params
    }
}

impl ScalarField for LiouvilleU {
    fn dim(&self) -> usize {
        self.params.n.get()
    }
    fn value(&self, x: &HalfSpacePoint) -> f64 {
        self.params.value_at(x.coords())
    }
    fn gradient(&self, x: &HalfSpacePoint) -> SpaceVector {
        self.params.gradient_at(x.coords())
    }
    fn tail(&self) -> Tail {
        Tail::LogGrowth { coefficient: self.params.n.as_f64(), grad_decay: 1.0 }
    }
    fn describe(&self) -> String {
        format!("Liouville u (n={}, lambda={}, x0'={:?})", self.params.n, self.params.lambda, self.params.x0_prime)
    }
    fn value_full(&self, x: &SpaceVector) -> f64 {
        self.params.value_at(x.as_slice())
    }
    fn gradient_full(&self, x: &SpaceVector) -> SpaceVector {
        self.params.gradient_at(x.as_slice())
    }
}

/// `a(∇u) = -n^{n-1} z / |z|^n` in closed form.
pub fn liouville_flux(params: &LiouvilleSolution, x: &HalfSpacePoint) -> SpaceVector {
    let z = params.offset(x.coords());
    let nf = params.n.as_f64();
    z.scale(-nf.powf(nf - 1.0) / z.norm_sq().powf(0.5 * nf))
}

/// `∂_j a_i(∇u) = -n^{n-1} [δ_ij/|z|^n - n z_i z_j/|z|^{n+2}]`.
pub fn liouville_flux_jacobian(params: &LiouvilleSolution, x: &HalfSpacePoint) -> Matrix {
    let z = params.offset(x.coords());
    let n = z.len();
    let nf = n as f64;
    let r2 = z.norm_sq();
    let c = -nf.powf(nf - 1.0) / r2.powf(0.5 * nf);
    let mut m = Matrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let delta = if i == j { 1.0 } else { 0.0 };
            m.set(i, j, c * (delta - nf * z[i] * z[j] / r2));
        }
    }
    m
}

/// Whole-space Liouville family with parameters `(lambda, x0)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FullSpaceLiouville {
    pub n: Dimension,
    pub lambda: f64,
    pub x0: SpaceVector,
}

impl FullSpaceLiouville {
    pub fn new(n: Dimension, lambda: f64, x0: &[f64]) -> Result<Self> {
        check_lambda(lambda)?;
        if x0.len() != n.get() {
            return Err(Error::DimensionMismatch { expected: n.get(), got: x0.len() });
        }
        Ok(Self { n, lambda, x0: SpaceVector::from_slice(x0)? })
    }
}

/// `u(x) = log[ n (n^2/(n-1))^{n-1} lambda^n / (1 + lambda^{n/(n-1)} |x-x0|^{n/(n-1)})^n ]`.
#[derive(Clone, Copy, Debug)]
pub struct FullSpaceU {
    params: FullSpaceLiouville,
}

pub fn fullspace_u(params: &FullSpaceLiouville) -> FullSpaceU {
    FullSpaceU { params: *params }
}

impl FullSpaceU {
    fn eval(&self, x: &SpaceVector) -> (f64, SpaceVector) {
        let p = &self.params;
        let nf = p.n.as_f64();
        let e = nf / (nf - 1.0);
        let z = *x - p.x0;
        let r = z.norm();
        let le = p.lambda.powf(e);
        let q = le * r.powf(e);
        let c = nf.ln() + (nf - 1.0) * (nf * nf / (nf - 1.0)).ln() + nf * p.lambda.ln();
        let value = c - nf * q.ln_1p();
        // ∇u = -n e lambda^e |z|^{e-2} z / (1 + q)
        let grad = if r == 0.0 { SpaceVector::zeros(z.len()) } else { z.scale(-nf * e * le * r.powf(e - 2.0) / (1.0 + q)) };
        (value, grad)
    }
}

impl ScalarField for FullSpaceU {
    fn dim(&self) -> usize {
        self.params.n.get()
    }
    fn value(&self, x: &HalfSpacePoint) -> f64 {
        self.eval(&x.as_vector()).0
    }
    fn gradient(&self, x: &HalfSpacePoint) -> SpaceVector {
        self.eval(&x.as_vector()).1
    }
    fn tail(&self) -> Tail {
        let nf = self.params.n.as_f64();
        Tail::LogGrowth { coefficient: nf * nf / (nf - 1.0), grad_decay: 1.0 }
    }
    fn describe(&self) -> String {
        format!("whole-space Liouville u (n={}, lambda={})", self.params.n, self.params.lambda)
    }
    fn value_full(&self, x: &SpaceVector) -> f64 {
        self.eval(x).0
    }
    fn gradient_full(&self, x: &SpaceVector) -> SpaceVector {
        self.eval(x).1
    }
}

/// Sobolev-trace extremal family with parameters `(p, lambda, x0')`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SobolevTraceExtremal {
    pub n: Dimension,
    pub p: f64,
    pub lambda: f64,
    pub x0_prime: SpaceVector,
}

impl SobolevTraceExtremal {
    pub fn new(n: Dimension, p: f64, lambda: f64, x0_prime: &[f64]) -> Result<Self> {
        if !(p > 1.0 && p < n.as_f64()) {
            return Err(Error::InvalidExponent { p, reason: "p must lie in (1, n)" });
        }
        check_lambda(lambda)?;
        let x0_prime = check_prime(n, x0_prime)?;
        Ok(Self { n, p, lambda, x0_prime })
    }

    /// The standard member `lambda = 1, x0' = 0`.
    pub fn standard(n: Dimension, p: f64) -> Result<Self> {
        Self::new(n, p, 1.0, &vec![0.0; n.get() - 1])
    }

    /// Exponent `(n-p)/(2(p-1))`.
    pub fn exponent(&self) -> f64 {
        (self.n.as_f64() - self.p) / (2.0 * (self.p - 1.0))
    }

    /// `delta = (n-p)/(p(n-1))`.
    pub fn delta(&self) -> f64 {
        let nf = self.n.as_f64();
        (nf - self.p) / (self.p * (nf - 1.0))
    }
}

/// `u_*(x) = (lambda^{2/p} / (|x'-x0'|^2 + (t+lambda)^2))^{(n-p)/(2(p-1))}`.
#[derive(Clone, Copy, Debug)]
pub struct SobolevUStar {
    params: SobolevTraceExtremal,
}

pub fn sobolev_u_star(params: &SobolevTraceExtremal) -> SobolevUStar {
    SobolevUStar { params: *params }
}

impl SobolevUStar {
    pub fn params(&self) -> &SobolevTraceExtremal {
        &self.params
    }
}

impl ScalarField for SobolevUStar {
    fn dim(&self) -> usize {
        self.params.n.get()
    }
    fn value(&self, x: &HalfSpacePoint) -> f64 {
        self.value_and_gradient(x).0
    }
    fn gradient(&self, x: &HalfSpacePoint) -> SpaceVector {
        self.value_and_gradient(x).1
    }
    fn value_and_gradient(&self, x: &HalfSpacePoint) -> (f64, SpaceVector) {
        let p = &self.params;
        let z = lifted_offset(x.coords(), &p.x0_prime, p.lambda);
        let r2 = z.norm_sq();
        let e = p.exponent();
        let u = (p.lambda.powf(2.0 / p.p) / r2).powf(e);
        (u, z.scale(-2.0 * e * u / r2))
    }
    fn tail(&self) -> Tail {
        Tail::Bounded { grad_decay: 2.0 * self.params.exponent() + 1.0 }
    }
    fn describe(&self) -> String {
        let p = &self.params;
        format!("Sobolev trace extremal (n={}, p={}, lambda={})", p.n, p.p, p.lambda)
    }
}

/// `u = log mu_n + w`.
#[derive(Clone)]
pub struct UFromW<F> {
    pub w: F,
}

/// `w = u - log mu_n`.
#[derive(Clone)]
pub struct WFromU<F> {
    pub u: F,
}

pub fn u_from_w<F: ScalarField>(w: F) -> UFromW<F> {
    UFromW { w }
}

pub fn w_from_u<F: ScalarField>(u: F) -> WFromU<F> {
    WFromU { u }
}

impl<F: ScalarField> ScalarField for UFromW<F> {
    fn dim(&self) -> usize {
        self.w.dim()
    }
    fn value(&self, x: &HalfSpacePoint) -> f64 {
        log_mu_n(x) + self.w.value(x)
    }
    fn gradient(&self, x: &HalfSpacePoint) -> SpaceVector {
        x_field(x) + self.w.gradient(x)
    }
    fn describe(&self) -> String {
        format!("log mu_n + ({})", self.w.describe())
    }
}

impl<F: ScalarField> ScalarField for WFromU<F> {
    fn dim(&self) -> usize {
        self.u.dim()
    }
    fn value(&self, x: &HalfSpacePoint) -> f64 {
        self.u.value(x) - log_mu_n(x)
    }
    fn gradient(&self, x: &HalfSpacePoint) -> SpaceVector {
        self.u.gradient(x) - x_field(x)
    }
    fn describe(&self) -> String {
        format!("({}) - log mu_n", self.u.describe())
    }
}

/// `h = u_*(1 + delta w)` built on the standard Sobolev extremal.
#[derive(Clone)]
pub struct PerturbedH<F> {
    pub u_star: SobolevUStar,
    pub w: F,
    pub delta: f64,
}

/// The perturbed field `h = u_*(1 + delta w)`, `delta = (n-p)/(p(n-1))`.
pub fn perturbed_h<F: ScalarField>(w: F, p: f64) -> Result<PerturbedH<F>> {
    let n = Dimension::new(w.dim())?;
    let params = SobolevTraceExtremal::standard(n, p)?;
    Ok(PerturbedH { u_star: sobolev_u_star(&params), delta: params.delta(), w })
}

impl<F: ScalarField> PerturbedH<F> {
    /// The decomposition `∇h = X_delta + Y_delta` with
    /// `X_delta = ∇u_*(1 + delta w)` and `Y_delta = delta u_* ∇w`.
    pub fn parts(&self, x: &HalfSpacePoint) -> (SpaceVector, SpaceVector) {
        let (u, gu) = self.u_star.value_and_gradient(x);
        let (w, gw) = self.w.value_and_gradient(x);
        (gu.scale(1.0 + self.delta * w), gw.scale(self.delta * u))
    }
}

impl<F: ScalarField> ScalarField for PerturbedH<F> {
    fn dim(&self) -> usize {
        self.w.dim()
    }
    fn value(&self, x: &HalfSpacePoint) -> f64 {
        self.u_star.value(x) * (1.0 + self.delta * self.w.value(x))
    }
    fn gradient(&self, x: &HalfSpacePoint) -> SpaceVector {
        let (a, b) = self.parts(x);
        a + b
    }
    fn describe(&self) -> String {
        format!("u_*(1 + {} ({}))", self.delta, self.w.describe())
    }
}

/// Shared handle helper.
pub fn shared<F: ScalarField + 'static>(f: F) -> Arc<dyn ScalarField> {
    Arc::new(f)
}
