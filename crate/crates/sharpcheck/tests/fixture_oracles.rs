//! Recomputes every pinned fixture with low-dimensional Simpson rules in
//! coordinates adapted to the radial symmetry of `exp(-|x|^2)`. Weights and
//! the convexity remainder are written out again here, so the only shared
//! code is the constants `α_n`, `β_n` and `σ`.

use std::f64::consts::PI;

use sharpcheck::fixtures::Fixtures;
use sharpcheck::kernels::{alpha_n, beta_n_fullspace, sigma};

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
    let m = m + m % 2;
    let h = (b - a) / m as f64;
    let mut s = f(a) + f(b);
    for i in 1..m {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn simpson2(f: impl Fn(f64, f64) -> f64, (a, b): (f64, f64), (c, d): (f64, f64), m: usize) -> f64 {
    simpson(|x| simpson(|y| f(x, y), c, d, m), a, b, m)
}

/// `|x+y|^p - |x|^p - p|x|^{p-2} x·y` in the plane spanned by the arguments.
fn remainder(x: &[f64], y: &[f64], p: f64) -> f64 {
    let nx: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let s: f64 = x.iter().zip(y).map(|(a, b)| (a + b) * (a + b)).sum::<f64>().sqrt();
    let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let lin = if nx > 0.0 { p * nx.powf(p - 2.0) * dot } else { 0.0 };
    s.powf(p) - nx.powf(p) - lin
}

/// Boundary density `2/(σ_{n-1}(1+ρ^2)^{n/2})`.
fn mu_boundary(n: usize, rho: f64) -> f64 {
    2.0 / (sigma(n as i32).unwrap() * (1.0 + rho * rho).powf(0.5 * n as f64))
}

/// `log ∫ e^w dμ - ∫ w dμ` for `w = exp(-ρ^2)` with `ρ = tan θ`.
fn boundary_side(n: usize) -> f64 {
    let m = 20_000;
    // |S^{n-2}| ρ^{n-2} dρ, with |S^0| = 2
    let shell = sigma(n as i32 - 1).unwrap();
    let integrate = |g: &dyn Fn(f64) -> f64| {
        simpson(
            |th| {
                let rho = th.tan();
                let c = th.cos();
                if c < 1e-300 {
                    return 0.0;
                }
                shell * rho.powi(n as i32 - 2) * g(rho) * mu_boundary(n, rho) / (c * c)
            },
            0.0,
            0.5 * PI,
            m,
        )
    };
    let e = integrate(&|r| (-r * r).exp().exp());
    let l = integrate(&|r| (-r * r).exp());
    e.ln() - l
}

/// `∫ K_n(x, ∇w) dx` over the half-space, in `(|x'|, t)`.
fn kn_energy_oracle(n: usize) -> f64 {
    let nf = n as f64;
    let shell = sigma(n as i32 - 1).unwrap();
    let l = 7.0;
    simpson2(
        |rho, t| {
            let d = rho * rho + (1.0 + t) * (1.0 + t);
            let x = [-nf * rho / d, -nf * (1.0 + t) / d];
            let e = (-(rho * rho + t * t)).exp();
            let y = [-2.0 * rho * e, -2.0 * t * e];
            shell * rho.powi(n as i32 - 2) * remainder(&x, &y, nf)
        },
        (0.0, l),
        (0.0, l),
        1600,
    )
}

/// Whole-space deficit in the radial variable `r = tan(θ)^2`; the square
/// absorbs the `r^{1/2}` behaviour of the drift at the origin for `n = 3`.
fn fullspace_deficit_oracle(n: usize) -> f64 {
    let nf = n as f64;
    let area = sigma(n as i32).unwrap();
    let nu = |r: f64| nf / area / (1.0 + r.powf(nf / (nf - 1.0))).powf(nf);
    let m = 20_000;
    let radial = |g: &dyn Fn(f64) -> f64| {
        simpson(
            |th| {
                let s = th.tan();
                let c = th.cos();
                if c < 1e-300 {
                    return 0.0;
                }
                let r = s * s;
                area * r.powi(n as i32 - 1) * g(r) * 2.0 * s / (c * c)
            },
            0.0,
            0.5 * PI,
            m,
        )
    };
    let e = radial(&|r| (-r * r).exp().exp() * nu(r));
    let lin = radial(&|r| (-r * r).exp() * nu(r));
    let lhs = e.ln() - lin;
    // drift and ∇w are both radial
    let h = radial(&|r| {
        if r == 0.0 {
            return 0.0;
        }
        let a = -nf * r.powf(-(nf - 2.0) / (nf - 1.0)) * r / (1.0 + r.powf(nf / (nf - 1.0)));
        let b = (nf - 1.0) / nf * (-2.0 * r * (-r * r).exp());
        remainder(&[a], &[b], nf)
    });
    beta_n_fullspace(n as i32).unwrap() * h - lhs
}

fn assert_fixture(key: &str, oracle: f64) {
    let f = Fixtures::builtin();
    let fx = f.get(key).unwrap();
    assert!((fx.value - oracle).abs() <= fx.tol, "{key}: pinned {} vs oracle {oracle} (tol {})", fx.value, fx.tol);
}

#[test]
fn kn_energy_n2_is_half_pi() {
    assert!((kn_energy_oracle(2) - PI / 2.0).abs() < 1e-10);
}

#[test]
fn deficit_gaussian_n2() {
    let d = alpha_n(2).unwrap() * kn_energy_oracle(2) - boundary_side(2);
    assert_fixture("deficit.gaussian.n2", d);
}

#[test]
fn deficit_gaussian_n3() {
    let k = kn_energy_oracle(3);
    assert_fixture("kn_energy.gaussian.n3", k);
    assert_fixture("deficit.gaussian.n3", alpha_n(3).unwrap() * k - boundary_side(3));
}

#[test]
fn fullspace_deficit_gaussian() {
    assert_fixture("fullspace_deficit.gaussian.n2", fullspace_deficit_oracle(2));
    assert_fixture("fullspace_deficit.gaussian.n3", fullspace_deficit_oracle(3));
}

#[test]
fn pinned_fixtures_match_library() {
    use sharpcheck::functionals::{deficit, fullspace_deficit, kn_energy};
    use sharpcheck::testfields::Gaussian;
    use sharpcheck::QuadratureSpec;
    let f = Fixtures::builtin();
    for n in [2usize, 3] {
        let g = Gaussian::standard(n);
        let spec = QuadratureSpec::for_dimension(n);
        let d = deficit(&g, &spec).unwrap().deficit;
        let fx = f.get(&format!("deficit.gaussian.n{n}")).unwrap();
        assert!((d - fx.value).abs() <= fx.tol, "n={n}: {d} vs {}", fx.value);
        let d = fullspace_deficit(&g, &spec).unwrap().deficit;
        let fx = f.get(&format!("fullspace_deficit.gaussian.n{n}")).unwrap();
        assert!((d - fx.value).abs() <= fx.tol, "n={n}: {d} vs {}", fx.value);
    }
    let k = kn_energy(&Gaussian::standard(3), &QuadratureSpec::for_dimension(3)).unwrap().value;
    let fx = f.get("kn_energy.gaussian.n3").unwrap();
    assert!((k - fx.value).abs() <= fx.tol);
}
