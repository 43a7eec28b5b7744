//! One function per command; each returns the checks it ran.

use std::f64::consts::PI;
use std::sync::Arc;

use sharpcheck::asymptotics::{
    barrier_samples, default_directions, gradient_decay, liouville_sup, phi_ode_residual, phi_prime, phi_sandwich, sharp_profile,
    sphere_harnack_ratio, supersolution_checks, SupersolutionInputs, SupersolutionParams,
};
use sharpcheck::expr::{parse_tail, Expression};
use sharpcheck::extremals::{
    fullspace_u, liouville_u, onofri_w, sobolev_u_star, FullSpaceLiouville, LiouvilleSolution, OnofriTraceExtremal, SobolevTraceExtremal,
};
use sharpcheck::fields::{Constant, Shifted};
use sharpcheck::fixtures::Fixtures;
use sharpcheck::functionals::{deficit, finite_mass, fullspace_deficit, quotient_q};
use sharpcheck::kernels::{alpha_n, beta_n_fullspace, c0_limit, c1_limit, k_n, omega, sigma, weight_nu_n};
use sharpcheck::limit_study::{
    constants_limit, default_p_sequence, quotient_target, rp_homogeneity_limit, sobolev_quotient_log, sobolev_trace_deficit,
};
use sharpcheck::pde_checks::{
    auxiliary_v_check, beta_from_mass, el_residual_w, flux_identity, interior_residual_closed, interior_residual_fd, neumann_residual,
    neumann_residual_field, pohozaev_check, stress_tensor_e, stress_tensor_generic, BoundaryScaling,
};
use sharpcheck::quadrature::integrate_full_space;
use sharpcheck::report::{Check, RefSource};
use sharpcheck::sampling::{boundary_points, interior_points};
use sharpcheck::testfields::{seeded_library, Bump, Gaussian};
use sharpcheck::{Dimension, Error, HalfSpacePoint, QuadratureSpec, Result, ScalarField, SharedField, SpaceVector};

use crate::config::RunConfig;

use RefSource::{AnalyticLimit, ClosedForm, Fixture};

/// `|S^k|` from the two-step recurrence, independent of the Gamma function.
pub fn sphere_area_recurrence(k: usize) -> f64 {
    match k {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (k as f64 - 1.0) * sphere_area_recurrence(k - 2),
    }
}

fn dim(cfg: &RunConfig) -> Result<Dimension> {
    Dimension::new(cfg.n)
}

fn spec(cfg: &RunConfig) -> QuadratureSpec {
    let mut s = QuadratureSpec::for_lambda(cfg.n, cfg.lambda);
    if let Some(r) = cfg.rel_tol {
        s.rel_tol = r;
    }
    if let Some(a) = cfg.abs_tol {
        s.abs_tol = a;
    }
    s
}

fn fixtures(cfg: &RunConfig) -> Result<Fixtures> {
    match &cfg.fixtures_path {
        Some(p) => Fixtures::load(p),
        None => Ok(Fixtures::builtin()),
    }
}

fn liouville(cfg: &RunConfig) -> Result<LiouvilleSolution> {
    LiouvilleSolution::new(dim(cfg)?, cfg.lambda, &cfg.x0())
}

/// `n^n σ_{n-1} / 2`, the reciprocal of `α_n`.
fn sharp_quotient(n: usize) -> f64 {
    (n as f64).powi(n as i32) * sphere_area_recurrence(n - 1) / 2.0
}

pub fn constants(cfg: &RunConfig) -> Result<Vec<Check>> {
    let n = cfg.n;
    let ni = n as i32;
    let nf = n as f64;
    let s = sphere_area_recurrence(n - 1);
    let alpha_ref = if n == 2 { 1.0 / (4.0 * PI) } else { 2.0 / (nf.powi(ni) * s) };
    let half_mass = nf.powi(ni) * (s / nf) / 2.0;
    Ok(vec![
        Check::absolute(format!("constants.alpha_n[n={n}]"), alpha_n(ni)?, alpha_ref, ClosedForm, 1e-14),
        Check::relative(format!("constants.sharp_quotient[n={n}]"), 1.0 / alpha_n(ni)?, sharp_quotient(n), ClosedForm, 1e-13),
        Check::relative(format!("constants.beta_n[n={n}]"), beta_n_fullspace(ni)?, nf.powf(1.0 - nf) / ((nf - 1.0) * s), ClosedForm, 1e-13),
        Check::relative(format!("constants.sigma[n={n}]"), sigma(ni)?, s, ClosedForm, 1e-13),
        Check::relative(format!("constants.boundary_mass[n={n}]"), nf.powi(ni) * omega(ni)? / 2.0, half_mass, ClosedForm, 1e-13),
        Check::relative(format!("constants.c0_limit[n={n}]"), c0_limit(ni)?, s / 2.0, ClosedForm, 1e-13),
        Check::relative(format!("constants.c1_limit[n={n}]"), c1_limit(ni)?, nf.powf(nf - 1.0) * s / 2.0, ClosedForm, 1e-13),
        Check::absolute(
            format!("constants.liouville_normalisation[n={n}]"),
            OnofriTraceExtremal::liouville_normalisation(dim(cfg)?),
            (nf.powf(nf - 1.0) * s / 2.0).ln(),
            ClosedForm,
            1e-13,
        ),
    ])
}

fn tag(cfg: &RunConfig) -> String {
    let x0: Vec<String> = cfg.x0().iter().map(|v| format!("{v}")).collect();
    format!("n={},lambda={},x0=({})", cfg.n, cfg.lambda, x0.join(","))
}

pub fn verify_extremal(cfg: &RunConfig) -> Result<Vec<Check>> {
    let d = dim(cfg)?;
    let c = cfg.c_tilde.unwrap_or_else(|| OnofriTraceExtremal::liouville_normalisation(d));
    let w = onofri_w(&OnofriTraceExtremal::new(d, cfg.lambda, &cfg.x0(), c)?);
    let spec = spec(cfg);
    let t = format!("{},c={c}", tag(cfg));
    let r = deficit(&w, &spec)?;
    let mut out = vec![Check::absolute(format!("extremal.deficit[{t}]"), r.deficit, 0.0, ClosedForm, 1e-6).quad_error(r.combined_error())];
    // Q is 0/0 at (λ, x0') = (1, 0), where the extremal is constant.
    match quotient_q(&w, &spec) {
        Ok(q) => out.push(
            Check::relative(format!("extremal.quotient[{t}]"), q.value, sharp_quotient(cfg.n), ClosedForm, 1e-4)
                .quad_error(q.error_estimate),
        ),
        Err(Error::Undefined(_)) => {}
        Err(e) => return Err(e),
    }
    Ok(out)
}

/// The field named by `field`/`builtin`, or `None` for the seeded library.
fn user_field(cfg: &RunConfig, default: &str) -> Result<Option<(String, SharedField)>> {
    if let Some(src) = &cfg.field {
        let tail = parse_tail(cfg.tail.as_deref().unwrap_or("unknown"))?;
        let e = Expression::parse(src, dim(cfg)?, tail)?;
        return Ok(Some((format!("expr:{src}"), Arc::new(e))));
    }
    match cfg.builtin.as_deref().unwrap_or(default) {
        "gaussian" => Ok(Some(("gaussian".into(), Arc::new(Gaussian::standard(cfg.n))))),
        "bump" => Ok(Some(("bump".into(), Arc::new(Bump::standard(cfg.n))))),
        "zero" => Ok(Some(("zero".into(), Arc::new(Constant { n: cfg.n, c: 0.0 })))),
        "library" => Ok(None),
        other => Err(Error::Expression(format!("unknown builtin `{other}` (gaussian, bump, zero, library)"))),
    }
}

pub fn deficit_cmd(cfg: &RunConfig) -> Result<Vec<Check>> {
    let spec = spec(cfg);
    let n = cfg.n;
    let fields: Vec<(String, SharedField)> = match user_field(cfg, "gaussian")? {
        Some(f) => vec![f],
        None => seeded_library(n, cfg.seed, 20)?.into_iter().map(|f| (f.name, f.field)).collect(),
    };
    let fx = fixtures(cfg)?;
    let mut out = Vec::new();
    for (name, w) in fields {
        let r = deficit(&*w, &spec)?;
        out.push(
            Check::at_least(format!("deficit.nonnegative[n={n},{name}]"), r.deficit, 0.0, ClosedForm, 1e-8).quad_error(r.combined_error()),
        );
        if name == "gaussian" {
            if let Ok(f) = fx.get(&format!("deficit.gaussian.n{n}")) {
                out.push(
                    Check::absolute(format!("deficit.pinned[n={n},gaussian]"), r.deficit, f.value, Fixture, f.tol)
                        .quad_error(r.combined_error()),
                );
            }
        }
    }
    Ok(out)
}

pub fn pde_check(cfg: &RunConfig) -> Result<Vec<Check>> {
    let n = cfg.n;
    let p = liouville(cfg)?;
    let t = tag(cfg);
    let scale = 5.0 * cfg.lambda.max(1.0);
    let pts = interior_points(n, 1000, cfg.seed, scale, 0.0);
    let bps = boundary_points(n, 1000, cfg.seed + 1, scale);
    let mut out = Vec::new();
    let at_most = |id: &str, v: f64, tol: f64| Check::at_most(format!("pde.{id}[{t}]"), v, 0.0, ClosedForm, tol);
    let at_least = |id: &str, v: f64, lower: f64| Check::at_least(format!("pde.{id}[{t}]"), v, lower, ClosedForm, 0.0);

    out.push(at_most("interior_residual", interior_residual_closed(&p, &pts)?.max_abs, 1e-12));
    out.push(at_most("neumann_residual", neumann_residual(&p, &bps)?.max_abs, 1e-12));
    let u = liouville_u(&p);
    let shifted = Shifted { inner: u, shift: 0.1 };
    out.push(at_least("neumann_negative_control", neumann_residual_field(&shifted, &bps)?.max_abs, 1e-3));

    // second opinion: the FD residual shrinks by 4 when h halves
    let fd_pts = interior_points(n, 50, cfg.seed + 2, 3.0, 0.5);
    let a = interior_residual_fd(&u, &fd_pts, 1e-2)?.max_abs;
    let b = interior_residual_fd(&u, &fd_pts, 5e-3)?.max_abs;
    out.push(Check::absolute(format!("pde.fd_order_ratio[{t}]"), a / b, 4.0, ClosedForm, 1.0));

    let d = dim(cfg)?;
    let matched = OnofriTraceExtremal::new(d, cfg.lambda, &cfg.x0(), 0.0)?;
    let (ei, eb) = el_residual_w(&matched, &pts, &bps, BoundaryScaling::Matched)?;
    out.push(at_most("el_interior_residual", ei.max_abs, 1e-12));
    out.push(at_most("el_boundary_residual", eb.max_abs, 1e-12));
    let (_, bad) = el_residual_w(&matched, &pts, &bps, BoundaryScaling::Unscaled)?;
    out.push(at_least("el_negative_control", bad.max_abs, 1e-3));

    let stress_pts = interior_points(n, 100, cfg.seed + 3, scale, 0.0);
    let e = stress_pts.iter().map(|x| stress_tensor_e(&p, x).max_abs()).fold(0.0, f64::max);
    out.push(at_most("stress_tensor", e, 1e-10));
    // perturbing u by ε|x|^2 must be detected
    let x = HalfSpacePoint::new(&vec![0.5; n - 1], 0.5)?;
    let eps = 1e-3;
    let g = p.gradient_at(x.coords()) + x.as_vector().scale(2.0 * eps);
    let mut h = p.hessian(&x);
    for i in 0..n {
        h.set(i, i, h.get(i, i) + 2.0 * eps);
    }
    out.push(at_least("stress_negative_control", stress_tensor_generic(&g, &h).max_abs(), 1e-5));

    let (vi, vb) = auxiliary_v_check(&p, &stress_pts, &bps[..100])?;
    out.push(at_most("auxiliary_v_interior", vi.max_abs, 1e-10));
    out.push(at_most("auxiliary_v_boundary", vb.max_abs, 1e-12));
    Ok(out)
}

pub fn pohozaev(cfg: &RunConfig) -> Result<Vec<Check>> {
    let p = liouville(cfg)?;
    let y = if cfg.y.is_empty() { SpaceVector::zeros(cfg.n) } else { SpaceVector::from_slice(&cfg.y)? };
    let radii = if cfg.radii.is_empty() { vec![2.0, 5.0] } else { cfg.radii.clone() };
    let spec = spec(cfg);
    let t = tag(cfg);
    radii
        .iter()
        .map(|&r| {
            let rep = pohozaev_check(&p, r, &y, &spec)?;
            Ok(Check::absolute(format!("pohozaev.gap[{t},R={r},y={:?}]", y.as_slice()), rep.gap, 0.0, ClosedForm, 1e-5)
                .quad_error(rep.error_estimate))
        })
        .collect()
}

pub fn mass(cfg: &RunConfig) -> Result<Vec<Check>> {
    let n = cfg.n;
    let nf = n as f64;
    let p = liouville(cfg)?;
    let spec = spec(cfg);
    let t = tag(cfg);
    let m = finite_mass(&liouville_u(&p), &spec)?;
    let target = nf.powi(n as i32) * sphere_area_recurrence(n - 1) / nf / 2.0;
    let mut out = vec![
        Check::relative(format!("mass.boundary[{t}]"), m.boundary.value, target, ClosedForm, 1e-6).quad_error(m.boundary.error_estimate),
        Check::absolute(format!("mass.beta[{t}]"), beta_from_mass(m.boundary.value, n)?, nf, ClosedForm, 1e-6),
    ];
    if n == 2 {
        out.push(
            Check::relative(format!("mass.interior[{t}]"), m.interior.value, PI, ClosedForm, 1e-6).quad_error(m.interior.error_estimate),
        );
    }
    let radii = if cfg.radii.is_empty() { vec![10.0] } else { cfg.radii.clone() };
    for r in radii {
        let f = flux_identity(&p, r, &spec)?;
        out.push(Check::absolute(format!("mass.flux_identity[{t},R={r}]"), f.gap(), 0.0, ClosedForm, 1e-6));
    }
    Ok(out)
}

/// `max/min` of a positive sequence.
fn spread(v: &[f64]) -> f64 {
    let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
    hi / lo
}

pub fn asymptotics(cfg: &RunConfig) -> Result<Vec<Check>> {
    let p = liouville(cfg)?;
    let radii = if cfg.radii.is_empty() { vec![1e2, 1e3, 1e4, 1e5] } else { cfg.radii.clone() };
    let dirs = default_directions(cfg.n, cfg.seed);
    let t = tag(cfg);
    let prof = sharp_profile(&p, &radii, &dirs)?;
    let scaled: Vec<f64> = prof.sup_deviation.iter().zip(&radii).map(|(d, r)| d * r).collect();
    let grad = gradient_decay(&p, &radii, &dirs)?;
    // R|∇(u + n log|x|)| ~ 1/R, so R times it is flat
    let flat: Vec<f64> = grad.grad_decay.iter().zip(&radii).map(|(g, r)| g * r).collect();
    let kappas = [1e1, 1e2, 1e3];
    let harnack = sphere_harnack_ratio(&p, liouville_sup(&p), &kappas, &dirs)?;
    let last = harnack.last().copied().flatten().ok_or_else(|| Error::Domain("sphere Harnack ratio undefined".into()))?;
    Ok(vec![
        Check::at_most(format!("asymptotics.deviation_times_R_spread[{t}]"), spread(&scaled), 2.0, AnalyticLimit, 0.0),
        Check::at_most(format!("asymptotics.gradient_decay_spread[{t}]"), spread(&flat), 2.0, AnalyticLimit, 0.0),
        Check::absolute(format!("asymptotics.sphere_harnack[{t},kappa=1e3]"), last, 1.0, AnalyticLimit, 0.1),
    ])
}

pub fn supersolution(cfg: &RunConfig) -> Result<Vec<Check>> {
    let n = cfg.n;
    let mut inp = SupersolutionInputs::defaults(n);
    if let Some(g) = cfg.gamma {
        inp.gamma = g;
    }
    if let Some(d) = cfg.delta {
        inp.delta = d;
    }
    if let Some(r) = cfg.r1 {
        let nf = n as f64;
        inp.r1 = r;
        // sup of the standard solution on the sphere of radius R1
        inp.sup_u_on_r1 = (nf - 1.0) * nf.ln() - 0.5 * nf * (r * r + 1.0).ln();
    }
    let sp = SupersolutionParams::solve(&inp)?;
    let t = format!("n={n},gamma={},delta={},R1={}", sp.gamma, sp.delta, sp.r1);
    let dirs = default_directions(n, cfg.seed);
    let (int, bnd) = barrier_samples(&sp, &dirs, 20, 1e3);
    let rep = supersolution_checks(&sp, cfg.c0, &int, &bnd)?;
    let mut out: Vec<Check> =
        rep.constraints.iter().map(|c| Check::holds(format!("supersolution.constraint[{t}]: {}", c.name), c.holds)).collect();
    out.push(Check::at_least(format!("supersolution.boundary_ratio[{t}]"), rep.boundary.worst_ratio, 1.0, ClosedForm, 0.0));
    out.push(Check::at_least(format!("supersolution.interior_margin[{t}]"), rep.interior.worst_ratio, f64::MIN_POSITIVE, ClosedForm, 0.0));

    let radii: Vec<f64> = (0..50).map(|k| sp.r1 * 10f64.powf(4.0 * k as f64 / 49.0)).collect();
    let mut worst = 0.0f64;
    let mut sandwich = true;
    for &r in &radii {
        worst = worst.max(phi_ode_residual(r, &sp, 1e-5)?.abs());
        let (lo, hi) = phi_sandwich(r, &sp)?;
        let d = -phi_prime(r, &sp)?;
        sandwich &= lo <= d && d <= hi;
    }
    out.push(Check::at_most(format!("supersolution.phi_ode_residual[{t}]"), worst, 0.0, ClosedForm, 1e-6));
    out.push(Check::holds(format!("supersolution.phi_sandwich[{t}]"), sandwich));

    let mut bad = sp;
    bad.a_eps *= 0.5;
    let control = supersolution_checks(&bad, cfg.c0, &int, &bnd)?;
    out.push(Check::holds(format!("supersolution.negative_control_rejected[{t},a_eps/2]"), !control.passed()));
    Ok(out)
}

/// A fixed point and gradient for the remainder limit.
fn rp_sample(n: usize) -> (HalfSpacePoint, f64, SpaceVector) {
    let xp: Vec<f64> = (0..n - 1).map(|i| 0.4 - 0.3 * i as f64).collect();
    let x = HalfSpacePoint::new(&xp, 0.8).expect("finite point");
    let g: Vec<f64> = (0..n).map(|i| 0.5 - 0.6 * i as f64).collect();
    (x, 0.7, SpaceVector::from_slice(&g).expect("finite gradient"))
}

pub fn limit_study(cfg: &RunConfig) -> Result<Vec<Check>> {
    let n = cfg.n;
    let ps = default_p_sequence(n, cfg.k_max.max(4));
    let mut table = constants_limit(n, &ps)?;
    let (x, wv, wg) = rp_sample(n);
    let rp = rp_homogeneity_limit(&x, wv, &wg, &ps)?;
    let kn = k_n(&x, &wg)?;
    let bump = Bump::standard(n);
    let spec = QuadratureSpec::for_dimension(n);
    let (target, target_err) = quotient_target(&bump, &spec)?;
    let quot = ps.iter().map(|&p| sobolev_quotient_log(&bump, p, &spec)).collect::<Result<Vec<_>>>()?;
    table.columns.push(("rp_remainder".into(), rp.clone()));
    table.columns.push(("rp_gap".into(), rp.iter().map(|v| (v - kn).abs()).collect()));
    table.columns.push(("quotient_log".into(), quot.iter().map(|q| q.value).collect()));
    table.columns.push(("quotient_gap".into(), quot.iter().map(|q| (q.value - target).abs()).collect()));
    if let Some(path) = &cfg.table_path {
        std::fs::write(path, table.to_csv()?).map_err(|e| Error::Domain(format!("{}: {e}", path.display())))?;
    }

    let last = ps.len() - 1;
    let p_last = ps[last];
    let g0 = table.column("gap_C0").expect("column")[last];
    let g1 = table.column("gap_C1").expect("column")[last];
    let k4 = 3; // p = n - 1e-4
    let mut out = vec![
        Check::at_most(format!("limit.gap_C0[n={n},p={p_last}]"), g0, 0.0, AnalyticLimit, 1e-3),
        Check::at_most(format!("limit.gap_C1[n={n},p={p_last}]"), g1, 0.0, AnalyticLimit, 1e-3),
        Check::absolute(format!("limit.rp_homogeneity[n={n},p={p_last}]"), rp[last], kn, AnalyticLimit, 1e-3),
        Check::absolute(format!("limit.sobolev_quotient_log[n={n},p={},bump]", ps[k4]), quot[k4].value, target, AnalyticLimit, 1e-2)
            .quad_error(quot[k4].error_estimate + target_err),
    ];
    let p = cfg.p.unwrap_or(if n == 3 { 2.0 } else { 0.5 * (n as f64 + 1.0) });
    let u = sobolev_u_star(&SobolevTraceExtremal::standard(dim(cfg)?, p)?);
    let s = sobolev_trace_deficit(&u, p, &spec)?;
    out.push(
        Check::absolute(format!("limit.sobolev_trace_equality[n={n},p={p}]"), s.deficit, 0.0, ClosedForm, 1e-6)
            .quad_error(s.error_estimate),
    );
    Ok(out)
}

pub fn fullspace(cfg: &RunConfig) -> Result<Vec<Check>> {
    let n = cfg.n;
    let nf = n as f64;
    let spec = spec(cfg);
    let mut out = Vec::new();
    let nu = integrate_full_space(&|x| weight_nu_n(x), n, 0.0, &spec)?.require("∫ dν_n")?;
    out.push(Check::relative(format!("fullspace.nu_total[n={n}]"), nu.value, 1.0, ClosedForm, 1e-8).quad_error(nu.error_estimate));

    let mut x0 = cfg.x0();
    x0.push(0.0);
    let u = fullspace_u(&FullSpaceLiouville::new(dim(cfg)?, cfg.lambda, &x0)?);
    let shift = u.value_full(&SpaceVector::from_slice(&x0)?);
    let m = integrate_full_space(&|x| (u.value_full(x) - shift).exp(), n, 0.0, &spec)?.require("∫ e^u")?;
    let target = (nf * nf / (nf - 1.0)).powf(nf - 1.0) * sphere_area_recurrence(n - 1);
    out.push(
        Check::relative(format!("fullspace.liouville_mass[{}]", tag(cfg)), m.value * shift.exp(), target, ClosedForm, 1e-6)
            .quad_error(m.error_estimate * shift.exp()),
    );

    let fx = fixtures(cfg)?;
    if let Some((name, w)) = user_field(cfg, "gaussian")? {
        let r = fullspace_deficit(&*w, &spec)?;
        out.push(
            Check::at_least(format!("fullspace.deficit_nonnegative[n={n},{name}]"), r.deficit, 0.0, ClosedForm, 1e-8)
                .quad_error(r.combined_error()),
        );
        if name == "gaussian" {
            if let Ok(f) = fx.get(&format!("fullspace_deficit.gaussian.n{n}")) {
                out.push(
                    Check::absolute(format!("fullspace.deficit_pinned[n={n},gaussian]"), r.deficit, f.value, Fixture, f.tol)
                        .quad_error(r.combined_error()),
                );
            }
        }
    }
    Ok(out)
}
