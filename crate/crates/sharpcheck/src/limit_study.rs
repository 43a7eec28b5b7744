//! The limit `p → n` of the Sobolev trace inequality: convergence of the
//! constants, of the convexity remainder, and of the perturbed quotient.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extremals::{perturbed_h, sobolev_u_star, SobolevTraceExtremal};
use crate::fields::{ScalarField, Tail};
use crate::functionals::{boundary_mean, kn_energy};
use crate::geometry::{Dimension, HalfSpacePoint, SpaceVector};
use crate::kernels::{alpha_n, c0_limit, c0p, c1_limit, c1p, convexity_remainder, sobolev_delta, sobolev_trace_constant};
use crate::quadrature::{integrate_boundary, integrate_half_ball, integrate_half_space, QuadratureSpec};

/// Columns indexed by `p`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitTable {
    pub p_values: Vec<f64>,
    pub columns: Vec<(String, Vec<f64>)>,
}

impl LimitTable {
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns.iter().find(|(k, _)| k == name).map(|(_, v)| v.as_slice())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["p".to_string()];
        header.extend(self.columns.iter().map(|(k, _)| k.clone()));
        let io = |e: csv::Error| Error::Domain(format!("csv: {e}"));
        w.write_record(&header).map_err(io)?;
        for (i, p) in self.p_values.iter().enumerate() {
            let mut row = vec![format!("{p:e}")];
            row.extend(self.columns.iter().map(|(_, v)| format!("{:e}", v[i])));
            w.write_record(&row).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Domain(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is ascii"))
    }
}

/// `p = n - 10^{-k}` for `k = 1..=k_max`.
pub fn default_p_sequence(n: usize, k_max: u32) -> Vec<f64> {
    (1..=k_max).map(|k| n as f64 - 10f64.powi(-(k as i32))).collect()
}

fn check_sequence(n: usize, ps: &[f64]) -> Result<()> {
    let nf = n as f64;
    if ps.is_empty() {
        return Err(Error::Domain("empty p sequence".into()));
    }
    if let Some(&p) = ps.iter().find(|&&p| !(p > 1.0 && p < nf)) {
        return Err(Error::InvalidExponent { p, reason: "p must lie in (1, n)" });
    }
    if ps.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("p values must increase strictly toward n".into()));
    }
    Ok(())
}

/// `C_{0,p}`, `C_{1,p}`, their gaps to the limits, `δ`, and the error of
/// `C_{1,p}/C_{0,p} = (p(n-1)/(p-1))^{p-1}`.
pub fn constants_limit(n: usize, ps: &[f64]) -> Result<LimitTable> {
    check_sequence(n, ps)?;
    let ni = n as i32;
    let nf = n as f64;
    let (l0, l1) = (c0_limit(ni)?, c1_limit(ni)?);
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); 6];
    for &p in ps {
        let (a, b) = (c0p(ni, p)?, c1p(ni, p)?);
        let ratio = (p * (nf - 1.0) / (p - 1.0)).powf(p - 1.0);
        cols[0].push(a);
        cols[1].push(b);
        cols[2].push((a - l0).abs());
        cols[3].push((b - l1).abs());
        cols[4].push(sobolev_delta(ni, p)?);
        cols[5].push((b / a / ratio - 1.0).abs());
    }
    let names = ["C0p", "C1p", "gap_C0", "gap_C1", "delta", "ratio_identity_error"];
    Ok(LimitTable { p_values: ps.to_vec(), columns: names.iter().map(|s| s.to_string()).zip(cols).collect() })
}

/// `δ^{-p} R_p(X_δ, Y_δ)` along the sequence, with `X_δ = ∇u_*(1 + δw)` and
/// `Y_δ = δ u_* ∇w` at the point `x`, given `w(x)` and `∇w(x)`.
///
/// Homogeneity lets the scaling be applied to the arguments, so the values
/// carry no `δ^{-p}` cancellation. The limit is `K_n(x, ∇w)`.
pub fn rp_homogeneity_limit(x: &HalfSpacePoint, w_value: f64, w_grad: &SpaceVector, ps: &[f64]) -> Result<Vec<f64>> {
    let n = x.dim();
    if w_grad.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: w_grad.len() });
    }
    check_sequence(n, ps)?;
    let dim = Dimension::new(n)?;
    ps.iter()
        .map(|&p| {
            let params = SobolevTraceExtremal::standard(dim, p)?;
            let delta = params.delta();
            let (u, gu) = sobolev_u_star(&params).value_and_gradient(x);
            let xs = gu.scale((1.0 + delta * w_value) / delta);
            let ys = w_grad.scale(u);
            Ok(convexity_remainder(xs.as_slice(), ys.as_slice(), p))
        })
        .collect()
}

/// Value of the perturbed quotient with its ingredients.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuotientValue {
    pub p: f64,
    pub delta: f64,
    /// `(1/(pδ)) log(∫|∇h|^p / ∫|∇u_*|^p)`
    pub value: f64,
    /// `∫ (|∇h|^p - |∇u_*|^p) dx`
    pub energy_difference: f64,
    /// `∫ |∇u_*|^p dx = δ^{p-1} C_{1,p}`
    pub base_energy: f64,
    pub error_estimate: f64,
}

/// `(1/p) log((∫|∇h|^p / ∫|∇u_*|^p)^{1/δ})` for compactly supported `w`.
///
/// Only the difference `|∇h|^p - |∇u_*|^p` is integrated, over a half-ball
/// holding the support, in the form `|∇u_*|^p expm1((p/2) log1p(·))`; the
/// base energy is the closed form `δ^{p-1} C_{1,p}`.
pub fn sobolev_quotient_log(w: &dyn ScalarField, p: f64, spec: &QuadratureSpec) -> Result<QuotientValue> {
    let n = w.dim();
    let radius = match w.tail() {
        Tail::Compact { radius } => radius,
        other => return Err(Error::Domain(format!("the perturbed quotient needs a compactly supported field, got tail {other:?}"))),
    };
    let h = perturbed_h(w, p)?;
    let delta = h.delta;
    let base = delta.powf(p - 1.0) * c1p(n as i32, p)?;
    // The difference is O(δ); dividing by pδ·base keeps the integrand O(1)
    // so the absolute tolerance does not end refinement early.
    let scale = 1.0 / (p * delta * base);
    let diff = |x: &HalfSpacePoint| {
        let (u, gu) = h.u_star.value_and_gradient(x);
        let (wv, gw) = w.value_and_gradient(x);
        let g2 = gu.norm_sq();
        let s = 1.0 + delta * wv;
        // |∇h|^2 - |∇u_*|^2
        let d2 = g2 * delta * wv * (2.0 + delta * wv) + 2.0 * s * delta * u * gu.dot(&gw) + (delta * u).powi(2) * gw.norm_sq();
        scale * g2.powf(0.5 * p) * (0.5 * p * (d2 / g2).ln_1p()).exp_m1()
    };
    let q = if radius > 0.0 {
        integrate_half_ball(&diff, n, radius, spec)?.require("∫ |∇h|^p - |∇u_*|^p")?
    } else {
        crate::quadrature::QuadratureResult::exact(0.0)
    };
    let ratio = q.value * p * delta;
    let value = ratio.ln_1p() / (p * delta);
    Ok(QuotientValue {
        p,
        delta,
        value,
        energy_difference: q.value / scale,
        base_energy: base,
        error_estimate: q.error_estimate / (1.0 + ratio),
    })
}

/// The limit `∫ w dμ_n + α_n ∫ K_n(x, ∇w) dx` of the quotient.
pub fn quotient_target(w: &dyn ScalarField, spec: &QuadratureSpec) -> Result<(f64, f64)> {
    let mean = boundary_mean(w, spec)?;
    let energy = kn_energy(w, spec)?;
    let alpha = alpha_n(w.dim() as i32)?;
    Ok((mean.value + alpha * energy.value, mean.error_estimate + alpha * energy.error_estimate))
}

/// Both sides of the Sobolev trace inequality and their difference.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SobolevTraceReport {
    /// `(∫_∂ |u|^{p(n-1)/(n-p)} dx')^{(n-p)/(p(n-1))}`
    pub lhs: f64,
    /// `S(n,p)^{-1} (∫ |∇u|^p dx)^{1/p}`
    pub rhs: f64,
    pub deficit: f64,
    pub error_estimate: f64,
    pub tail_assumed: bool,
}

pub fn sobolev_trace_deficit(u: &dyn ScalarField, p: f64, spec: &QuadratureSpec) -> Result<SobolevTraceReport> {
    let n = u.dim();
    let nf = n as f64;
    let s = sobolev_trace_constant(n as i32, p)?;
    let tail_assumed = match u.tail().grad_decay() {
        None => true,
        Some(k) if k * p > nf => !matches!(u.tail(), Tail::Compact { .. }),
        Some(k) => return Err(Error::Divergent(format!("|∇u|^p with |∇u| ~ |x|^-{k} is not integrable for p = {p}, n = {n}"))),
    };
    let q = p * (nf - 1.0) / (nf - p);
    let b = integrate_boundary(&|x| u.value(x).abs().powf(q), n, spec)?.require("∫ |u|^q dx'")?;
    let g = integrate_half_space(&|x| u.gradient(x).norm().powf(p), n, spec)?.require("∫ |∇u|^p")?;
    let lhs = b.value.powf(1.0 / q);
    let rhs = g.value.powf(1.0 / p) / s;
    let err = lhs * b.error_estimate / (q * b.value.max(f64::MIN_POSITIVE)) + rhs * g.error_estimate / (p * g.value.max(f64::MIN_POSITIVE));
    Ok(SobolevTraceReport { lhs, rhs, deficit: rhs - lhs, error_estimate: err, tail_assumed })
}
