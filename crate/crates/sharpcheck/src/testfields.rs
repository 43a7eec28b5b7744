//! Builtin test functions and the seeded admissible library.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::extremals::{onofri_w, OnofriTraceExtremal};
use crate::fields::{Combination, ScalarField, SharedField, Tail};
use crate::geometry::{Dimension, HalfSpacePoint, SpaceVector};

/// `A exp(1 - 1/(1 - |x-c|^2/ρ^2))` inside the ball, zero outside.
#[derive(Clone, Copy, Debug)]
pub struct Bump {
    pub centre: SpaceVector,
    pub radius: f64,
    pub amplitude: f64,
}

impl Bump {
    /// The unit-height bump of support radius 1.5 centred at the origin.
    pub fn standard(n: usize) -> Self {
        Self { centre: SpaceVector::zeros(n), radius: 1.5, amplitude: 1.0 }
    }

    fn eval(&self, x: &SpaceVector) -> (f64, SpaceVector) {
        let d = *x - self.centre;
        let rho2 = self.radius * self.radius;
        let s = d.norm_sq() / rho2;
        if s >= 1.0 {
            return (0.0, SpaceVector::zeros(x.len()));
        }
        let q = 1.0 - s;
        let v = self.amplitude * (1.0 - 1.0 / q).exp();
        // dv/ds = -v/q^2, ∇s = 2d/ρ^2
        (v, d.scale(-2.0 * v / (q * q * rho2)))
    }
}

impl ScalarField for Bump {
    fn dim(&self) -> usize {
        self.centre.len()
    }
    fn value(&self, x: &HalfSpacePoint) -> f64 {
        self.eval(&x.as_vector()).0
    }
    fn gradient(&self, x: &HalfSpacePoint) -> SpaceVector {
        self.eval(&x.as_vector()).1
    }
    fn value_and_gradient(&self, x: &HalfSpacePoint) -> (f64, SpaceVector) {
        self.eval(&x.as_vector())
    }
    fn tail(&self) -> Tail {
        Tail::Compact { radius: self.centre.norm() + self.radius }
    }
    fn describe(&self) -> String {
        format!("bump(c={:?}, rho={}, A={})", self.centre, self.radius, self.amplitude)
    }
    fn value_full(&self, x: &SpaceVector) -> f64 {
        self.eval(x).0
    }
    fn gradient_full(&self, x: &SpaceVector) -> SpaceVector {
        self.eval(x).1
    }
}

/// `A (1 + k·(x-c)) exp(-|x-c|^2/σ^2)`; `k = 0` gives a plain Gaussian.
#[derive(Clone, Copy, Debug)]
pub struct Gaussian {
    pub centre: SpaceVector,
    pub width: f64,
    pub amplitude: f64,
    pub tilt: SpaceVector,
}

impl Gaussian {
    /// `exp(-|x|^2)`.
    pub fn standard(n: usize) -> Self {
        Self { centre: SpaceVector::zeros(n), width: 1.0, amplitude: 1.0, tilt: SpaceVector::zeros(n) }
    }

    fn eval(&self, x: &SpaceVector) -> (f64, SpaceVector) {
        let d = *x - self.centre;
        let s2 = self.width * self.width;
        let e = (-d.norm_sq() / s2).exp();
        let lin = 1.0 + self.tilt.dot(&d);
        let v = self.amplitude * lin * e;
        let g = self.tilt.scale(self.amplitude * e) - d.scale(2.0 * v / s2);
        (v, g)
    }
}

impl ScalarField for Gaussian {
    fn dim(&self) -> usize {
        self.centre.len()
    }
    fn value(&self, x: &HalfSpacePoint) -> f64 {
        self.eval(&x.as_vector()).0
    }
    fn gradient(&self, x: &HalfSpacePoint) -> SpaceVector {
        self.eval(&x.as_vector()).1
    }
    fn value_and_gradient(&self, x: &HalfSpacePoint) -> (f64, SpaceVector) {
        self.eval(&x.as_vector())
    }
    fn tail(&self) -> Tail {
        Tail::Bounded { grad_decay: f64::INFINITY }
    }
    fn describe(&self) -> String {
        if self.tilt.max_abs() == 0.0 {
            format!("gaussian(c={:?}, sigma={}, A={})", self.centre, self.width, self.amplitude)
        } else {
            format!("tilted gaussian(c={:?}, sigma={}, A={}, k={:?})", self.centre, self.width, self.amplitude, self.tilt)
        }
    }
    fn value_full(&self, x: &SpaceVector) -> f64 {
        self.eval(x).0
    }
    fn gradient_full(&self, x: &SpaceVector) -> SpaceVector {
        self.eval(x).1
    }
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize, half_width: f64, t_range: (f64, f64)) -> SpaceVector {
    let mut v = SpaceVector::zeros(n);
    for i in 0..n - 1 {
        v[i] = rng.gen_range(-half_width..half_width);
    }
    v[n - 1] = rng.gen_range(t_range.0..t_range.1);
    v
}

/// A named entry of the seeded library.
pub struct LibraryField {
    pub name: String,
    pub field: SharedField,
}

/// `count` admissible fields cycling through Gaussians, tilted Gaussians and
/// extremals plus a tenth of a bump.
pub fn seeded_library(n: usize, seed: u64, count: usize) -> Result<Vec<LibraryField>> {
    let dim = Dimension::new(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let (name, field): (String, SharedField) = match k % 3 {
            0 => {
                let g = Gaussian {
                    centre: random_vec(&mut rng, n, 1.0, (0.0, 1.5)),
                    width: rng.gen_range(0.6..2.0),
                    amplitude: rng.gen_range(-2.0..2.0),
                    tilt: SpaceVector::zeros(n),
                };
                (format!("gaussian-{k}"), Arc::new(g))
            }
            1 => {
                let g = Gaussian {
                    centre: random_vec(&mut rng, n, 1.0, (0.0, 1.5)),
                    width: rng.gen_range(0.6..2.0),
                    amplitude: rng.gen_range(-1.5..1.5),
                    tilt: random_vec(&mut rng, n, 0.8, (-0.8, 0.8)),
                };
                (format!("tilted-{k}"), Arc::new(g))
            }
            _ => {
                let lambda = rng.gen_range(0.5..2.0);
                let x0: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let c = rng.gen_range(-1.0..1.0);
                let e = onofri_w(&OnofriTraceExtremal::new(dim, lambda, &x0, c)?);
                let b = Bump { centre: random_vec(&mut rng, n, 1.0, (0.0, 1.0)), radius: rng.gen_range(0.8..1.6), amplitude: 1.0 };
                let f = Combination { a: 1.0, first: e, b: 0.1, second: b };
                (format!("extremal+bump-{k}"), Arc::new(f))
            }
        };
        out.push(LibraryField { name, field });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::fd_gradient;

    #[test]
    fn gradients_match_differences() {
        for n in 2..=4 {
            for f in seeded_library(n, 3, 9).unwrap() {
                for x in crate::sampling::interior_points(n, 20, 5, 2.0, 0.1) {
                    let g = f.field.gradient(&x);
                    let fd = fd_gradient(&*f.field, &x, 1e-5);
                    assert!((g - fd).max_abs() < 1e-6 * (1.0 + g.max_abs()), "{} at {:?}", f.name, x.coords());
                }
            }
            let b = Bump::standard(n);
            let x = HalfSpacePoint::from_coords(&vec![0.3; n]).unwrap();
            assert!((b.gradient(&x) - fd_gradient(&b, &x, 1e-6)).max_abs() < 1e-7);
        }
    }

    #[test]
    fn bump_support() {
        let b = Bump::standard(3);
        assert_eq!(b.value(&HalfSpacePoint::new(&[1.5, 0.0], 0.0).unwrap()), 0.0);
        assert_eq!(b.value(&HalfSpacePoint::new(&[0.0, 0.0], 0.0).unwrap()), 1.0);
        assert_eq!(b.tail(), Tail::Compact { radius: 1.5 });
    }
}
