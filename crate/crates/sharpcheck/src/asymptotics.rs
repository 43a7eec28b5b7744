//! Far-field behaviour of the classified solutions and the radial barrier
//! used to pin the decay exponent.
//!
//! The decay exponent is fixed to `β = n` everywhere.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::extremals::LiouvilleSolution;
use crate::geometry::{HalfSpacePoint, SpaceVector};
use crate::quadrature::{integrate_interval, QuadratureResult, QuadratureSpec};

/// Per-radius sup-deviation and gradient-decay values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileReport {
    pub radii: Vec<f64>,
    /// `sup_θ |u(Rθ) + n log R - log(n^{n-1} λ)|`
    pub sup_deviation: Vec<f64>,
    /// `sup_θ R |∇(u + n log|x|)(Rθ)|`
    pub grad_decay: Vec<f64>,
}

fn check_radii(radii: &[f64]) -> Result<()> {
    if radii.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
        return Err(Error::Domain("radii must be positive and finite".into()));
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("radii must be strictly increasing".into()));
    }
    Ok(())
}

fn profile(params: &LiouvilleSolution, radii: &[f64], directions: &[SpaceVector]) -> Result<ProfileReport> {
    check_radii(radii)?;
    let n = params.n.get();
    if directions.is_empty() || directions.iter().any(|d| d.len() != n) {
        return Err(Error::Domain(format!("need a nonempty set of directions in R^{n}")));
    }
    let nf = n as f64;
    let c = params.log_constant();
    let mut dev = Vec::with_capacity(radii.len());
    let mut grad = Vec::with_capacity(radii.len());
    for &r in radii {
        let mut d_max = 0.0f64;
        let mut g_max = 0.0f64;
        for dir in directions {
            let x = dir.scale(r);
            let u = params.value_at(x.as_slice());
            d_max = d_max.max((u + nf * r.ln() - c).abs());
            let g = params.gradient_at(x.as_slice()) + x.scale(nf / (r * r));
            g_max = g_max.max(r * g.norm());
        }
        dev.push(d_max);
        grad.push(g_max);
    }
    Ok(ProfileReport { radii: radii.to_vec(), sup_deviation: dev, grad_decay: grad })
}

/// Deviation of `u + n log|x|` from its limit `log(n^{n-1} λ)` on spheres.
pub fn sharp_profile(params: &LiouvilleSolution, radii: &[f64], directions: &[SpaceVector]) -> Result<ProfileReport> {
    profile(params, radii, directions)
}

/// `|x| |∇(u + n log|x|)|` on spheres; the report also carries the sup-deviation.
pub fn gradient_decay(params: &LiouvilleSolution, radii: &[f64], directions: &[SpaceVector]) -> Result<ProfileReport> {
    profile(params, radii, directions)
}

/// `sup_x (u(x) + k log|x|)` over the samples.
pub fn log_bound_with_exponent(params: &LiouvilleSolution, samples: &[HalfSpacePoint], k: f64) -> Result<f64> {
    if samples.iter().any(|x| x.norm() == 0.0) {
        return Err(Error::Domain("samples must exclude the origin".into()));
    }
    samples
        .iter()
        .map(|x| params.value_at(x.coords()) + k * x.norm().ln())
        .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))))
        .ok_or_else(|| Error::Domain("empty sample set".into()))
}

/// Smallest `C` with `u(x) <= C - (n-1) log|x|` over the samples.
pub fn log_upper_bound(params: &LiouvilleSolution, samples: &[HalfSpacePoint]) -> Result<f64> {
    log_bound_with_exponent(params, samples, params.n.as_f64() - 1.0)
}

/// `sup u = log(n^{n-1} λ^{1-n})`, attained at `(x0', 0)`.
pub fn liouville_sup(params: &LiouvilleSolution) -> f64 {
    let nf = params.n.as_f64();
    (nf - 1.0) * nf.ln() + (1.0 - nf) * params.lambda.ln()
}

/// `max û / min û` on the spheres `|x| = κ` for `û = U0 - u`.
///
/// Entries are `None` where `min û <= 0`.
pub fn sphere_harnack_ratio(params: &LiouvilleSolution, u0: f64, kappas: &[f64], directions: &[SpaceVector]) -> Result<Vec<Option<f64>>> {
    if u0 < liouville_sup(params) {
        return Err(invalid("U0", u0, "must be at least sup u"));
    }
    check_radii(kappas)?;
    Ok(kappas
        .iter()
        .map(|&k| {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for d in directions {
                let v = u0 - params.value_at(d.scale(k).as_slice());
                lo = lo.min(v);
                hi = hi.max(v);
            }
            (lo > 0.0).then(|| hi / lo)
        })
        .collect())
}

/// Parameters of the barrier `ū = C1^{1/(n-1)} φ(|x| + t|x|^{-δ})`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupersolutionParams {
    pub n: usize,
    pub gamma: f64,
    pub delta: f64,
    #[serde(rename = "R1")]
    pub r1: f64,
    pub a_eps: f64,
    pub b: f64,
    #[serde(rename = "C1")]
    pub c1: f64,
}

/// Inputs of [`SupersolutionParams::solve`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupersolutionInputs {
    pub n: usize,
    pub gamma: f64,
    pub delta: f64,
    #[serde(rename = "R1")]
    pub r1: f64,
    /// `ε` in `a_ε = (β - ε)^{n-1}(γ - n) / (2 C1)`, within `(0, 1)`.
    pub eps: f64,
    /// Fraction of the largest admissible `C1` that is used.
    pub c1_fraction: f64,
    /// Bound `sup_{∂B_{R1}^+} u` entering the choice of `b`.
    pub sup_u_on_r1: f64,
}

impl SupersolutionInputs {
    /// Defaults for dimension `n`: `γ = n + 1/2`, `δ = 0.45`, `R1 = 10^3`,
    /// `ε = 1/2`, `C1` at 99% of its bound, and `sup u` from the
    /// `λ = 1, x0' = 0` solution.
    pub fn defaults(n: usize) -> Self {
        let nf = n as f64;
        let r1 = 1e3;
        Self {
            n,
            gamma: nf + 0.5,
            delta: 0.45,
            r1,
            eps: 0.5,
            c1_fraction: 0.99,
            sup_u_on_r1: (nf - 1.0) * nf.ln() - 0.5 * nf * (r1 * r1 + 1.0).ln(),
        }
    }
}

/// One named constraint of the parameter display and whether it holds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub holds: bool,
}

impl SupersolutionParams {
    /// `e = (n - γ)/2 < 0`.
    fn e(&self) -> f64 {
        0.5 * (self.n as f64 - self.gamma)
    }

    /// Largest `C1` with `(n-1)^{n-1}(γ-n)/(2 C1) >= 2 R1^{(n-γ)/2}`.
    pub fn c1_max(n: usize, gamma: f64, r1: f64) -> f64 {
        let nf = n as f64;
        (nf - 1.0).powf(nf - 1.0) * (gamma - nf) / (4.0 * r1.powf(0.5 * (nf - gamma)))
    }

    /// Pick `C1` first, then derive `a_ε` and `b`. Infeasible inputs are
    /// returned as they are; call [`Self::constraints`] to see which fail.
    pub fn solve(inp: &SupersolutionInputs) -> Result<Self> {
        let nf = inp.n as f64;
        if inp.n < 2 {
            return Err(Error::UnsupportedDimension(inp.n));
        }
        if !(inp.gamma > nf) {
            return Err(invalid("gamma", inp.gamma, "must exceed n"));
        }
        if !(inp.r1 > 1.0) {
            return Err(invalid("R1", inp.r1, "must exceed 1"));
        }
        if !(inp.eps > 0.0 && inp.eps < 1.0) {
            return Err(invalid("eps", inp.eps, "must lie in (0, 1)"));
        }
        if !(inp.c1_fraction > 0.0) {
            return Err(invalid("c1_fraction", inp.c1_fraction, "must be positive"));
        }
        let c1 = inp.c1_fraction * Self::c1_max(inp.n, inp.gamma, inp.r1);
        let a_eps = (nf - inp.eps).powf(nf - 1.0) * (inp.gamma - nf) / (2.0 * c1);
        let b = (inp.sup_u_on_r1 + nf * 2f64.ln()).max(0.0) / c1.powf(1.0 / (nf - 1.0));
        Ok(Self { n: inp.n, gamma: inp.gamma, delta: inp.delta, r1: inp.r1, a_eps, b, c1 })
    }

    /// The constraints of the parameter display with `β = n`, for a given `C0`.
    pub fn constraints(&self, c0: f64) -> Vec<Constraint> {
        let nf = self.n as f64;
        let e = self.e();
        let half_gap = 0.5 * (self.gamma - nf);
        let r1e = self.r1.powf(e);
        let tail = self.r1.powf(0.5 - self.delta);
        let c = |name: &str, value: f64, bound: f64, holds: bool| Constraint { name: name.to_string(), value, bound, holds };
        vec![
            c("(gamma-n)/2 > 0", half_gap, 0.0, half_gap > 0.0),
            c("delta > (gamma-n)/2", self.delta, half_gap, self.delta > half_gap),
            c("delta < min(1, 1/2)", self.delta, 0.5, self.delta < 0.5),
            c("a_eps >= 2 R1^((n-gamma)/2)", self.a_eps, 2.0 * r1e, self.a_eps >= 2.0 * r1e),
            {
                let v = (nf - 1.0).powf(nf - 1.0) * (self.gamma - nf) / (2.0 * self.c1);
                c("(n-1)^(n-1)(gamma-n)/(2 C1) >= 2 R1^((n-gamma)/2)", v, 2.0 * r1e, v >= 2.0 * r1e)
            },
            {
                let v = 2.0 * self.c1 / (self.gamma - nf) * (self.a_eps - r1e) * tail;
                c("2 C1 (a_eps - R1^((n-gamma)/2)) R1^(1/2-delta) / (gamma-n) >= C0", v, c0, v >= c0)
            },
            c("b >= 0", self.b, 0.0, self.b >= 0.0),
        ]
    }

    pub fn feasible(&self, c0: f64) -> bool {
        self.constraints(c0).iter().all(|c| c.holds)
    }

    fn check_domain(&self, r: f64) -> Result<()> {
        if !(r >= self.r1) {
            return Err(invalid("r", r, "must be at least R1"));
        }
        if !(self.a_eps > r.powf(self.e())) {
            return Err(invalid("a_eps", self.a_eps, "must exceed r^((n-gamma)/2) on [R1, r]"));
        }
        Ok(())
    }

    /// `k = ((γ-n)/2)^{1/(1-n)}`.
    fn k(&self) -> f64 {
        let nf = self.n as f64;
        (0.5 * (self.gamma - nf)).powf(1.0 / (1.0 - nf))
    }

    /// `(-φ')^{n-1} = (2/(γ-n)) (a_ε - r^e) r^{1-n}`.
    fn p(&self, r: f64) -> f64 {
        let nf = self.n as f64;
        2.0 / (self.gamma - nf) * (self.a_eps - r.powf(self.e())) * r.powf(1.0 - nf)
    }

    /// `[(-φ')^{n-1}]'` in closed form.
    fn p_prime(&self, r: f64) -> f64 {
        let nf = self.n as f64;
        let e = self.e();
        2.0 / (self.gamma - nf) * (-e * r.powf(e - nf) + (1.0 - nf) * (self.a_eps - r.powf(e)) * r.powf(-nf))
    }
}

/// `φ'(r) = -k (a_ε - r^{(n-γ)/2})^{1/(n-1)} / r`.
pub fn phi_prime(r: f64, sp: &SupersolutionParams) -> Result<f64> {
    sp.check_domain(r)?;
    let nf = sp.n as f64;
    Ok(-sp.k() * (sp.a_eps - r.powf(sp.e())).powf(1.0 / (nf - 1.0)) / r)
}

/// `φ(r) = b + ∫_{R1}^r φ'(s) ds` by adaptive quadrature.
pub fn phi(r: f64, sp: &SupersolutionParams) -> Result<QuadratureResult> {
    sp.check_domain(r)?;
    // ds/s = d log s keeps the integrand smooth over decades
    let f = |v: f64| {
        let s = v.exp();
        phi_prime(s, sp).map(|d| d * s).unwrap_or(f64::NAN)
    };
    let spec = QuadratureSpec::for_dimension(1).with_tolerances(1e-13, 1e-15);
    let q = integrate_interval(&f, sp.r1.ln(), r.ln(), &spec).require("phi")?;
    Ok(QuadratureResult { value: q.value + sp.b, ..q })
}

/// Lower and upper sandwich bounds on `-φ'(r)`.
pub fn phi_sandwich(r: f64, sp: &SupersolutionParams) -> Result<(f64, f64)> {
    sp.check_domain(r)?;
    let nf = sp.n as f64;
    let k = sp.k();
    Ok((k * (sp.a_eps - r.powf(sp.e())).powf(1.0 / (nf - 1.0)) / r, k * sp.a_eps.powf(1.0 / (nf - 1.0)) / r))
}

/// Relative residual of `[(-φ')^{n-1}]' + (n-1)(-φ')^{n-1}/r = r^{-(n+γ)/2}`.
///
/// The derivative is a central difference of the closed-form `φ'` with step
/// `rel_step · r`; the residual is divided by the right side.
pub fn phi_ode_residual(r: f64, sp: &SupersolutionParams, rel_step: f64) -> Result<f64> {
    let nf = sp.n as f64;
    let h = rel_step * r;
    sp.check_domain(r)?;
    let q = |s: f64| -> Result<f64> { Ok((-phi_prime(s, sp)?).powf(nf - 1.0)) };
    // one-sided at R1 so the stencil stays in the domain
    let dq =
        if r - h < sp.r1 { (-3.0 * q(r)? + 4.0 * q(r + h)? - q(r + 2.0 * h)?) / (2.0 * h) } else { (q(r + h)? - q(r - h)?) / (2.0 * h) };
    let rhs = r.powf(-0.5 * (nf + sp.gamma));
    Ok((dq + (nf - 1.0) * q(r)? / r - rhs) / rhs)
}

/// Pieces of `ū` at a point: `r`, the field `X = ∇r`, `A = |X|^2 - 1`, `∇A` and `div X`.
#[derive(Clone, Copy, Debug)]
pub struct BarrierGeometry {
    pub r: f64,
    pub x_vec: SpaceVector,
    pub a: f64,
    pub grad_a: SpaceVector,
    pub div_x: f64,
}

/// Closed forms for `r = |x| + t|x|^{-δ}` and its derivatives.
pub fn barrier_geometry(x: &HalfSpacePoint, delta: f64) -> BarrierGeometry {
    let n = x.dim();
    let nf = n as f64;
    let rho = x.norm();
    let t = x.t();
    let rd = rho.powf(-delta);
    let s = 1.0 - delta * t * rd / rho;
    let mut xv = x.as_vector().scale(s / rho);
    xv[n - 1] += rd;
    let a = 2.0 * (1.0 - delta) * t * rd / rho + (delta * delta - 2.0 * delta) * t * t * rd * rd / (rho * rho) + rd * rd;
    let bracket = (delta * delta - 1.0) * t / rho - (delta + 1.0) * (delta * delta - 2.0 * delta) * t * t * rd / (rho * rho) - delta * rd;
    let mut ga = x.as_vector().scale(2.0 * rd / (rho * rho) * bracket);
    ga[n - 1] += 2.0 * rd / rho * (1.0 - delta + (delta * delta - 2.0 * delta) * t * rd / rho);
    let div_x = (nf - 1.0) / rho - delta * (nf - delta) * t * rd / (rho * rho);
    BarrierGeometry { r: rho + t * rd, x_vec: xv, a, grad_a: ga, div_x }
}

/// Outcome of a sign check over samples: the worst normalised margin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignReport {
    /// Smallest normalised margin; the sign condition holds when it is `>= threshold`.
    pub worst_ratio: f64,
    pub threshold: f64,
    pub worst_point: SpaceVector,
    pub n_samples: usize,
    pub holds: bool,
}

fn sign_report(points: &[HalfSpacePoint], threshold: f64, ratio: impl Fn(&HalfSpacePoint) -> Result<f64>) -> Result<SignReport> {
    let mut worst = f64::INFINITY;
    let mut at = points.first().ok_or_else(|| Error::Domain("empty sample set".into()))?.as_vector();
    for x in points {
        let v = ratio(x)?;
        let v = if v.is_nan() { f64::NEG_INFINITY } else { v };
        if v < worst {
            worst = v;
            at = x.as_vector();
        }
    }
    Ok(SignReport { worst_ratio: worst, threshold, worst_point: at, n_samples: points.len(), holds: worst >= threshold })
}

/// `-Δ_n ū / C1` from the exact three-term decomposition.
pub fn barrier_interior_terms(x: &HalfSpacePoint, sp: &SupersolutionParams) -> Result<[f64; 3]> {
    let nf = sp.n as f64;
    let g = barrier_geometry(x, sp.delta);
    sp.check_domain(g.r)?;
    let p = sp.p(g.r);
    let one_a = 1.0 + g.a;
    Ok([
        sp.p_prime(g.r) * one_a.powf(0.5 * nf),
        0.5 * (nf - 2.0) * p * one_a.powf(0.5 * nf - 2.0) * g.grad_a.dot(&g.x_vec),
        p * one_a.powf(0.5 * (nf - 2.0)) * g.div_x,
    ])
}

/// `|∇ū|^{n-2} ∂_t ū` at the boundary point `x`.
pub fn barrier_boundary_flux(x: &HalfSpacePoint, sp: &SupersolutionParams) -> Result<f64> {
    let nf = sp.n as f64;
    let rho = x.norm();
    let d = phi_prime(rho, sp)?;
    Ok(sp.c1 * (-d).powf(nf - 2.0) * d * (1.0 + rho.powf(-2.0 * sp.delta)).powf(0.5 * (nf - 2.0)) * rho.powf(-sp.delta))
}

/// `ū` and its gradient in closed form, used as an oracle for the decomposition.
pub fn barrier_value_and_gradient(x: &HalfSpacePoint, sp: &SupersolutionParams) -> Result<(f64, SpaceVector)> {
    let nf = sp.n as f64;
    let g = barrier_geometry(x, sp.delta);
    let scale = sp.c1.powf(1.0 / (nf - 1.0));
    Ok((scale * phi(g.r, sp)?.value, g.x_vec.scale(scale * phi_prime(g.r, sp)?)))
}

/// Boundary and interior sign checks of the barrier.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupersolutionReport {
    /// `flux / (-C0 |x|^{-(2n-1)/2})`, must be `>= 1`.
    pub boundary: SignReport,
    /// `(-Δ_n ū) / (C1 (|x| + t|x|^{-δ})^{-(n+γ)/2})`, must be `> 0`.
    pub interior: SignReport,
    pub constraints: Vec<Constraint>,
}

impl SupersolutionReport {
    pub fn constraints_hold(&self) -> bool {
        self.constraints.iter().all(|c| c.holds)
    }

    pub fn passed(&self) -> bool {
        self.constraints_hold() && self.boundary.holds && self.interior.holds
    }
}

/// Evaluate both sign conditions at samples with `|x| >= R1`.
pub fn supersolution_checks(
    sp: &SupersolutionParams,
    c0: f64,
    interior_samples: &[HalfSpacePoint],
    boundary_samples: &[HalfSpacePoint],
) -> Result<SupersolutionReport> {
    let nf = sp.n as f64;
    if interior_samples.iter().chain(boundary_samples).any(|x| x.norm() < sp.r1) {
        return Err(Error::Domain("samples must satisfy |x| >= R1".into()));
    }
    if boundary_samples.iter().any(|x| !x.is_boundary()) {
        return Err(Error::Domain("boundary samples must have t = 0".into()));
    }
    let boundary = sign_report(boundary_samples, 1.0, |x| {
        let target = -c0 * x.norm().powf(-0.5 * (2.0 * nf - 1.0));
        Ok(barrier_boundary_flux(x, sp)? / target)
    })?;
    let interior = sign_report(interior_samples, f64::MIN_POSITIVE, |x| {
        let t = barrier_interior_terms(x, sp)?;
        let r = barrier_geometry(x, sp.delta).r;
        Ok((t[0] + t[1] + t[2]) / r.powf(-0.5 * (nf + sp.gamma)))
    })?;
    Ok(SupersolutionReport { boundary, interior, constraints: sp.constraints(c0) })
}

/// Samples with `|x|` log-uniform in `[R1, R1 · span]` along the given directions.
pub fn barrier_samples(
    sp: &SupersolutionParams,
    directions: &[SpaceVector],
    radii_per_direction: usize,
    span: f64,
) -> (Vec<HalfSpacePoint>, Vec<HalfSpacePoint>) {
    let n = sp.n;
    let mut interior = Vec::new();
    let mut boundary = Vec::new();
    for k in 0..radii_per_direction {
        let f = if radii_per_direction > 1 { k as f64 / (radii_per_direction - 1) as f64 } else { 0.0 };
        // nudge outward so rounding in d·r never lands inside B_{R1}
        let r = sp.r1 * span.powf(f) * (1.0 + 1e-12);
        for d in directions {
            let x = HalfSpacePoint::from_map(d.scale(r).as_slice());
            if x.is_boundary() {
                boundary.push(x);
            }
            interior.push(x);
        }
        let mut xp = vec![0.0; n - 1];
        xp[0] = r;
        boundary.push(HalfSpacePoint::boundary(&xp).expect("finite point"));
    }
    (interior, boundary)
}

/// The direction set, `n = 3` Fibonacci and seeded otherwise, at least 200 entries.
pub fn default_directions(n: usize, seed: u64) -> Vec<SpaceVector> {
    crate::sampling::hemisphere_directions(n, 200, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{fd_gradient, ScalarField};
    use crate::geometry::Dimension;

    fn sol(n: usize, lambda: f64) -> LiouvilleSolution {
        LiouvilleSolution::new(Dimension::new(n).unwrap(), lambda, &vec![0.0; n - 1]).unwrap()
    }

    #[test]
    fn profile_rates() {
        let p = sol(2, 1.0);
        let dirs = default_directions(2, 1);
        let radii = [10.0, 1e2, 1e3, 1e4];
        let rep = sharp_profile(&p, &radii, &dirs).unwrap();
        assert!(rep.sup_deviation[2] < 6e-3);
        assert!(rep.sup_deviation.windows(2).all(|w| w[1] < w[0]));
        assert!(rep.grad_decay[3] < 1e-3);
        for w in rep.grad_decay.windows(2) {
            let q = w[0] / w[1];
            assert!(q > 5.0 && q < 20.0, "{q}");
        }
    }

    #[test]
    fn log_bounds() {
        let p = sol(2, 1.0);
        let pts = crate::sampling::interior_points(2, 500, 3, 20.0, 0.0);
        let c = log_upper_bound(&p, &pts).unwrap();
        assert!(c.is_finite());
        let far = [HalfSpacePoint::new(&[1e6], 0.0).unwrap()];
        assert!(log_upper_bound(&p, &far).unwrap() < -10.0);
        let sharp = log_bound_with_exponent(&p, &far, 2.0).unwrap();
        assert!((sharp - 2f64.ln()).abs() < 1e-6);
    }

    #[test]
    fn harnack_ratios_approach_one() {
        let p = sol(2, 1.0);
        let dirs = default_directions(2, 1);
        let r = sphere_harnack_ratio(&p, liouville_sup(&p), &[10.0, 1e2, 1e3], &dirs).unwrap();
        let r: Vec<f64> = r.into_iter().map(Option::unwrap).collect();
        assert!(r[0] > r[1] && r[1] > r[2]);
        assert!(r[2] < 1.05);
    }

    #[test]
    fn barrier_geometry_matches_differences() {
        let delta = 0.45;
        let x = HalfSpacePoint::new(&[700.0, -300.0], 900.0).unwrap();
        let g = barrier_geometry(&x, delta);
        struct R(f64);
        impl ScalarField for R {
            fn dim(&self) -> usize {
                3
            }
            fn value(&self, x: &HalfSpacePoint) -> f64 {
                barrier_geometry(x, self.0).r
            }
            fn gradient(&self, x: &HalfSpacePoint) -> SpaceVector {
                barrier_geometry(x, self.0).x_vec
            }
        }
        struct A(f64);
        impl ScalarField for A {
            fn dim(&self) -> usize {
                3
            }
            fn value(&self, x: &HalfSpacePoint) -> f64 {
                barrier_geometry(x, self.0).a
            }
            fn gradient(&self, x: &HalfSpacePoint) -> SpaceVector {
                barrier_geometry(x, self.0).grad_a
            }
        }
        let fr = fd_gradient(&R(delta), &x, 1e-2);
        assert!((fr - g.x_vec).max_abs() < 1e-9);
        let fa = fd_gradient(&A(delta), &x, 1e-2);
        assert!((fa - g.grad_a).max_abs() < 1e-6 * g.grad_a.max_abs(), "{fa:?} {:?}", g.grad_a);
        assert!((g.x_vec.norm_sq() - 1.0 - g.a).abs() < 1e-14);
    }

    #[test]
    fn interior_decomposition_matches_fd_n_laplacian() {
        let sp = SupersolutionParams::solve(&SupersolutionInputs::defaults(3)).unwrap();
        let x = HalfSpacePoint::new(&[1500.0, 800.0], 600.0).unwrap();
        let terms = barrier_interior_terms(&x, &sp).unwrap();
        let exact = -sp.c1 * (terms[0] + terms[1] + terms[2]);
        // Δ_n ū by differences of the closed-form gradient
        let h = 0.5;
        let mut div = 0.0;
        for i in 0..3 {
            let at = |s: f64| {
                let mut c = x.as_vector();
                c[i] += s;
                let g = barrier_value_and_gradient(&HalfSpacePoint::from_map(c.as_slice()), &sp).unwrap().1;
                crate::kernels::flux_a(&g)[i]
            };
            div += (at(h) - at(-h)) / (2.0 * h);
        }
        assert!((div - exact).abs() < 1e-4 * exact.abs(), "{div} {exact}");
    }

    #[test]
    fn phi_properties() {
        let sp = SupersolutionParams::solve(&SupersolutionInputs::defaults(3)).unwrap();
        assert_eq!(phi(sp.r1, &sp).unwrap().value, sp.b);
        for k in 0..20 {
            let r = sp.r1 * 10f64.powf(k as f64 / 5.0);
            assert!(phi_prime(r, &sp).unwrap() <= 0.0);
            assert!(phi_ode_residual(r, &sp, 1e-5).unwrap().abs() < 1e-6);
            let (lo, hi) = phi_sandwich(r, &sp).unwrap();
            let d = -phi_prime(r, &sp).unwrap();
            assert!(lo <= d && d <= hi);
            // closed-form φ' against differences of the quadrature φ
            let h = 1e-3 * r;
            let fd =
                (phi(r + h, &sp).unwrap().value - phi(r - h.min(r - sp.r1).max(0.0), &sp).unwrap().value) / (h + h.min(r - sp.r1).max(0.0));
            if r > sp.r1 {
                assert!((fd + d).abs() < 1e-5 * d, "{fd} {d}");
            }
        }
    }

    #[test]
    fn defaults_pass_and_controls_fail() {
        for n in [2usize, 3] {
            let sp = SupersolutionParams::solve(&SupersolutionInputs::defaults(n)).unwrap();
            let dirs = default_directions(n, 11);
            let (i, b) = barrier_samples(&sp, &dirs, 8, 100.0);
            let rep = supersolution_checks(&sp, 1.0, &i, &b).unwrap();
            assert!(rep.passed(), "{rep:?}");
            let mut bad = sp;
            bad.a_eps *= 0.5;
            let rep = supersolution_checks(&bad, 1.0, &i, &b).unwrap();
            assert!(!rep.passed());
        }
    }

    #[test]
    fn original_delta_fails_interior_positivity() {
        let mut inp = SupersolutionInputs::defaults(3);
        inp.delta = 0.3;
        let sp = SupersolutionParams::solve(&inp).unwrap();
        let (i, b) = barrier_samples(&sp, &default_directions(3, 11), 8, 100.0);
        let rep = supersolution_checks(&sp, 1.0, &i, &b).unwrap();
        assert!(!rep.interior.holds);
    }
}
