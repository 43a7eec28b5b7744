//! Deterministic point and direction sets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{HalfSpacePoint, SpaceVector};

/// Points uniformly distributed in the box `[-r, r]^{n-1} × [t_min, r]`.
pub fn interior_points(n: usize, count: usize, seed: u64, r: f64, t_min: f64) -> Vec<HalfSpacePoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut c = vec![0.0; n];
            for v in c.iter_mut().take(n - 1) {
                *v = rng.gen_range(-r..r);
            }
            c[n - 1] = rng.gen_range(t_min..r);
            HalfSpacePoint::from_coords(&c).expect("sampled point is in the half-space")
        })
        .collect()
}

/// Boundary points `(x', 0)` with `x'` uniform in `[-r, r]^{n-1}`.
pub fn boundary_points(n: usize, count: usize, seed: u64, r: f64) -> Vec<HalfSpacePoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let xp: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-r..r)).collect();
            HalfSpacePoint::boundary(&xp).expect("finite boundary point")
        })
        .collect()
}

/// Unit vectors in the closed upper half-space.
///
/// For `n = 3` this is a Fibonacci lattice on the upper hemisphere, for
/// `n = 2` equally spaced angles in `[0, π]`; other dimensions use seeded
/// Gaussian directions folded into `t >= 0`. The horizontal directions are
/// always included so that boundary behaviour is sampled.
pub fn hemisphere_directions(n: usize, count: usize, seed: u64) -> Vec<SpaceVector> {
    let mut out = Vec::with_capacity(count + 2 * n);
    match n {
        2 => {
            for k in 0..count {
                let th = std::f64::consts::PI * k as f64 / (count - 1).max(1) as f64;
                out.push(SpaceVector::from_slice(&[th.cos(), th.sin()]).unwrap());
            }
        }
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            for k in 0..count {
                let t = (k as f64 + 0.5) / count as f64;
                let rho = (1.0 - t * t).sqrt();
                let phi = golden * k as f64;
                out.push(SpaceVector::from_slice(&[rho * phi.cos(), rho * phi.sin(), t]).unwrap());
            }
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            while out.len() < count {
                // Box-Muller
                let mut v = SpaceVector::zeros(n);
                for i in 0..n {
                    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
                    let u2: f64 = rng.gen();
                    v[i] = (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
                }
                v[n - 1] = v[n - 1].abs();
                let r = v.norm();
                if r > 1e-8 {
                    out.push(v.scale(1.0 / r));
                }
            }
        }
    }
    for i in 0..n - 1 {
        out.push(SpaceVector::unit(n, i));
        out.push(-SpaceVector::unit(n, i));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn directions_are_unit_and_upper() {
        for n in 2..=5 {
            let d = hemisphere_directions(n, 200, 7);
            assert!(d.len() >= 200);
            for v in &d {
                assert!((v.norm() - 1.0).abs() < 1e-14);
                assert!(v[n - 1] >= 0.0);
            }
        }
    }

    #[test]
    fn points_are_reproducible() {
        let a = interior_points(3, 10, 1, 5.0, 0.1);
        let b = interior_points(3, 10, 1, 5.0, 0.1);
        assert_eq!(a, b);
        assert!(a.iter().all(|p| p.t() >= 0.1));
        assert!(boundary_points(4, 10, 2, 1.0).iter().all(|p| p.is_boundary()));
    }
}
