//! The scalar-field evaluation contract shared by closed-form families,
//! builtin test functions and user expressions.

use std::sync::Arc;

use crate::geometry::{HalfSpacePoint, SpaceVector};

/// Far-field behaviour a field declares about itself.
///
/// Integrability of every functional is decided from this declaration, never
/// from watching partial sums.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Tail {
    /// `w` and `∇w` vanish outside the ball of this radius.
    Compact { radius: f64 },
    /// `w` is bounded and `|∇w| <= C |x|^{-grad_decay}`.
    Bounded { grad_decay: f64 },
    /// `|w| <= c log|x| + C` and `|∇w| <= C |x|^{-grad_decay}`.
    LogGrowth { coefficient: f64, grad_decay: f64 },
    /// `w` grows at least linearly along some direction.
    LinearGrowth,
    /// Nothing is known; reports carry a "tail assumed" caveat.
    Unknown,
}

impl Tail {
    /// Exponent `k` with `|∇w| = O(|x|^{-k})`, if declared.
    pub fn grad_decay(&self) -> Option<f64> {
        match *self {
            Tail::Compact { .. } => Some(f64::INFINITY),
            Tail::Bounded { grad_decay } | Tail::LogGrowth { grad_decay, .. } => Some(grad_decay),
            Tail::LinearGrowth => Some(0.0),
            Tail::Unknown => None,
        }
    }

    /// Coefficient `c` of the logarithmic growth bound (0 for bounded fields).
    pub fn log_coefficient(&self) -> Option<f64> {
        match *self {
            Tail::Compact { .. } | Tail::Bounded { .. } => Some(0.0),
            Tail::LogGrowth { coefficient, .. } => Some(coefficient),
            Tail::LinearGrowth => Some(f64::INFINITY),
            Tail::Unknown => None,
        }
    }

    /// Tail of `w + v`.
    pub fn sum(self, other: Tail) -> Tail {
        use Tail::*;
        match (self, other) {
            (Unknown, _) | (_, Unknown) => Unknown,
            (LinearGrowth, _) | (_, LinearGrowth) => LinearGrowth,
            (Compact { radius: a }, Compact { radius: b }) => Compact { radius: a.max(b) },
            (a, b) => {
                let k = a.grad_decay().unwrap().min(b.grad_decay().unwrap());
                let c = a.log_coefficient().unwrap() + b.log_coefficient().unwrap();
                if c == 0.0 {
                    Bounded { grad_decay: k }
                } else {
                    LogGrowth { coefficient: c, grad_decay: k }
                }
            }
        }
    }
}

/// A real function on the closed half-space (or on R^n for full-space
/// checks) with an analytic gradient.
pub trait ScalarField: Send + Sync {
    /// Ambient dimension.
    fn dim(&self) -> usize;

    fn value(&self, x: &HalfSpacePoint) -> f64;

    fn gradient(&self, x: &HalfSpacePoint) -> SpaceVector;

    fn value_and_gradient(&self, x: &HalfSpacePoint) -> (f64, SpaceVector) {
        (self.value(x), self.gradient(x))
    }

    fn tail(&self) -> Tail {
        Tail::Unknown
    }

    /// Short human-readable description used in reports.
    fn describe(&self) -> String {
        "field".to_string()
    }

    /// Value at an arbitrary point of R^n.
    ///
    /// Full-space functionals need `t < 0`; closed forms override this, the
    /// default only accepts the half-space.
    fn value_full(&self, x: &SpaceVector) -> f64 {
        let p = HalfSpacePoint::from_coords(x.as_slice()).expect("field is only defined on the half-space");
        self.value(&p)
    }

    fn gradient_full(&self, x: &SpaceVector) -> SpaceVector {
        let p = HalfSpacePoint::from_coords(x.as_slice()).expect("field is only defined on the half-space");
        self.gradient(&p)
    }
}

pub type SharedField = Arc<dyn ScalarField>;

impl<T: ScalarField + ?Sized> ScalarField for Arc<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &HalfSpacePoint) -> f64 {
        (**self).value(x)
    }
    fn gradient(&self, x: &HalfSpacePoint) -> SpaceVector {
        (**self).gradient(x)
    }
    fn value_and_gradient(&self, x: &HalfSpacePoint) -> (f64, SpaceVector) {
        (**self).value_and_gradient(x)
    }
    fn tail(&self) -> Tail {
        (**self).tail()
    }
    fn describe(&self) -> String {
        (**self).describe()
    }
    fn value_full(&self, x: &SpaceVector) -> f64 {
        (**self).value_full(x)
    }
    fn gradient_full(&self, x: &SpaceVector) -> SpaceVector {
        (**self).gradient_full(x)
    }
}

impl<T: ScalarField + ?Sized> ScalarField for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &HalfSpacePoint) -> f64 {
        (**self).value(x)
    }
    fn gradient(&self, x: &HalfSpacePoint) -> SpaceVector {
        (**self).gradient(x)
    }
    fn value_and_gradient(&self, x: &HalfSpacePoint) -> (f64, SpaceVector) {
        (**self).value_and_gradient(x)
    }
    fn tail(&self) -> Tail {
        (**self).tail()
    }
    fn describe(&self) -> String {
        (**self).describe()
    }
    fn value_full(&self, x: &SpaceVector) -> f64 {
        (**self).value_full(x)
    }
    fn gradient_full(&self, x: &SpaceVector) -> SpaceVector {
        (**self).gradient_full(x)
    }
}

/// The constant field `c`.
#[derive(Clone, Copy, Debug)]
pub struct Constant {
    pub n: usize,
    pub c: f64,
}

impl ScalarField for Constant {
    fn dim(&self) -> usize {
        self.n
    }
    fn value(&self, _: &HalfSpacePoint) -> f64 {
        self.c
    }
    fn gradient(&self, _: &HalfSpacePoint) -> SpaceVector {
        SpaceVector::zeros(self.n)
    }
    fn tail(&self) -> Tail {
        Tail::Compact { radius: 0.0 }
    }
    fn describe(&self) -> String {
        format!("constant {}", self.c)
    }
    fn value_full(&self, _: &SpaceVector) -> f64 {
        self.c
    }
    fn gradient_full(&self, _: &SpaceVector) -> SpaceVector {
        SpaceVector::zeros(self.n)
    }
}

/// `w + c`.
#[derive(Clone)]
pub struct Shifted<F> {
    pub inner: F,
    pub shift: f64,
}

impl<F: ScalarField> ScalarField for Shifted<F> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn value(&self, x: &HalfSpacePoint) -> f64 {
        self.inner.value(x) + self.shift
    }
    fn gradient(&self, x: &HalfSpacePoint) -> SpaceVector {
        self.inner.gradient(x)
    }
    fn value_and_gradient(&self, x: &HalfSpacePoint) -> (f64, SpaceVector) {
        let (v, g) = self.inner.value_and_gradient(x);
        (v + self.shift, g)
    }
    fn tail(&self) -> Tail {
        match self.inner.tail() {
            Tail::Compact { .. } if self.shift != 0.0 => Tail::Bounded { grad_decay: f64::INFINITY },
            t => t,
        }
    }
    fn describe(&self) -> String {
        format!("({}) + {}", self.inner.describe(), self.shift)
    }
    fn value_full(&self, x: &SpaceVector) -> f64 {
        self.inner.value_full(x) + self.shift
    }
    fn gradient_full(&self, x: &SpaceVector) -> SpaceVector {
        self.inner.gradient_full(x)
    }
}

/// `a·w + b·v`.
#[derive(Clone)]
pub struct Combination<F, G> {
    pub a: f64,
    pub first: F,
    pub b: f64,
    pub second: G,
}

impl<F: ScalarField, G: ScalarField> ScalarField for Combination<F, G> {
    fn dim(&self) -> usize {
        self.first.dim()
    }
    fn value(&self, x: &HalfSpacePoint) -> f64 {
        self.a * self.first.value(x) + self.b * self.second.value(x)
    }
    fn gradient(&self, x: &HalfSpacePoint) -> SpaceVector {
        self.first.gradient(x) * self.a + self.second.gradient(x) * self.b
    }
    fn value_and_gradient(&self, x: &HalfSpacePoint) -> (f64, SpaceVector) {
        let (v1, g1) = self.first.value_and_gradient(x);
        let (v2, g2) = self.second.value_and_gradient(x);
        (self.a * v1 + self.b * v2, g1 * self.a + g2 * self.b)
    }
    fn tail(&self) -> Tail {
        let scale = |t: Tail, s: f64| match t {
            Tail::LogGrowth { coefficient, grad_decay } => Tail::LogGrowth { coefficient: coefficient * s.abs(), grad_decay },
            t => t,
        };
        let t1 = if self.a == 0.0 { Tail::Compact { radius: 0.0 } } else { scale(self.first.tail(), self.a) };
        let t2 = if self.b == 0.0 { Tail::Compact { radius: 0.0 } } else { scale(self.second.tail(), self.b) };
        t1.sum(t2)
    }
    fn describe(&self) -> String {
        format!("{}*({}) + {}*({})", self.a, self.first.describe(), self.b, self.second.describe())
    }
    fn value_full(&self, x: &SpaceVector) -> f64 {
        self.a * self.first.value_full(x) + self.b * self.second.value_full(x)
    }
    fn gradient_full(&self, x: &SpaceVector) -> SpaceVector {
        self.first.gradient_full(x) * self.a + self.second.gradient_full(x) * self.b
    }
}

/// Central finite-difference gradient, used as a test oracle.
///
/// Steps that would leave the half-space fall back to one-sided differences
/// of the same order.
pub fn fd_gradient(f: &dyn ScalarField, x: &HalfSpacePoint, h: f64) -> SpaceVector {
    let n = x.dim();
    let mut g = SpaceVector::zeros(n);
    let base = x.as_vector();
    for i in 0..n {
        let at = |s: f64| {
            let mut c = base;
            c[i] += s;
            f.value(&HalfSpacePoint::from_map(c.as_slice()))
        };
        if i == n - 1 && x.t() < 2.0 * h {
            // second-order forward difference
            g[i] = (-3.0 * at(0.0) + 4.0 * at(h) - at(2.0 * h)) / (2.0 * h);
        } else {
            g[i] = (at(h) - at(-h)) / (2.0 * h);
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tail_algebra() {
        let a = Tail::Bounded { grad_decay: 2.0 };
        let b = Tail::Compact { radius: 3.0 };
        assert_eq!(a.sum(b), Tail::Bounded { grad_decay: 2.0 });
        assert_eq!(b.sum(Tail::Compact { radius: 1.0 }), Tail::Compact { radius: 3.0 });
        assert_eq!(a.sum(Tail::Unknown), Tail::Unknown);
        let l = Tail::LogGrowth { coefficient: 0.5, grad_decay: 1.0 };
        assert_eq!(l.sum(a), Tail::LogGrowth { coefficient: 0.5, grad_decay: 1.0 });
    }

    #[test]
    fn constant_and_shift() {
        let c = Constant { n: 3, c: 2.0 };
        let p = HalfSpacePoint::new(&[1.0, 2.0], 0.5).unwrap();
        assert_eq!(c.value(&p), 2.0);
        let s = Shifted { inner: c, shift: 1.5 };
        assert_eq!(s.value(&p), 3.5);
        assert_eq!(s.gradient(&p).norm(), 0.0);
    }
}
