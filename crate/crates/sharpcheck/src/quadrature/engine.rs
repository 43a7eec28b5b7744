//! Globally adaptive cubature on boxes.
//!
//! Each cell carries an embedded pair of tensor rules (Gauss-Legendre of
//! orders k and 2k, or trapezoid with k and 2k points on periodic axes). The
//! cell with the largest error estimate is bisected along the axis with the
//! largest fourth divided difference at its centre. Cells are refined in
//! fixed-size batches whose children are evaluated in parallel; batch content
//! depends only on the error ordering, and the final sum runs over cells in
//! creation order, so the result does not depend on the thread count.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use super::{QuadratureResult, QuadratureSpec};

pub(crate) const MAX_AXES: usize = 6;
const BATCH: usize = 32;
const LAMBDA2: f64 = 0.358_568_582_800_318_1; // sqrt(9/70)
const LAMBDA3: f64 = 0.948_683_298_050_513_8; // sqrt(9/10)

/// One integration axis.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Axis {
    pub lo: f64,
    pub hi: f64,
    /// Integrand is periodic over `[lo, hi)`; the trapezoid rule is used
    /// until the axis is split.
    pub periodic: bool,
}

impl Axis {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi, periodic: false }
    }

    pub fn periodic(lo: f64, hi: f64) -> Self {
        Self { lo, hi, periodic: true }
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(k: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(k >= 1);
    let mut nodes = vec![0.0; k];
    let mut weights = vec![0.0; k];
    let m = k.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (k as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(k, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(k, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[k - 1 - i] = x;
        weights[i] = w;
        weights[k - 1 - i] = w;
    }
    if k % 2 == 1 {
        nodes[k / 2] = 0.0;
    }
    (nodes, weights)
}

/// P_k(x) and P_k'(x).
fn legendre(k: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for j in 2..=k {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    if k == 0 {
        return (1.0, 0.0);
    }
    let d = k as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

struct Rules {
    low: (Vec<f64>, Vec<f64>),
    high: (Vec<f64>, Vec<f64>),
    k: usize,
}

#[derive(Clone, Copy)]
struct Cell {
    lo: [f64; MAX_AXES],
    hi: [f64; MAX_AXES],
    periodic: u8,
    value: f64,
    error: f64,
    split_axis: usize,
    id: u64,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        // max-heap on error; older cells first on ties
        self.error.total_cmp(&other.error).then_with(|| other.id.cmp(&self.id))
    }
}

struct Evaluated {
    value: f64,
    error: f64,
    split_axis: usize,
    evals: usize,
    finite: bool,
}

fn eval_cell(
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    d: usize,
    lo: &[f64; MAX_AXES],
    hi: &[f64; MAX_AXES],
    periodic: u8,
    widths0: &[f64; MAX_AXES],
    rules: &Rules,
) -> Evaluated {
    let mut evals = 0usize;
    let mut finite = true;
    let mut centre = [0.0; MAX_AXES];
    let mut half = [0.0; MAX_AXES];
    for i in 0..d {
        centre[i] = 0.5 * (lo[i] + hi[i]);
        half[i] = 0.5 * (hi[i] - lo[i]);
    }

    // per-axis nodes and weights for both rules
    let axis_rule = |m: usize, which: &(Vec<f64>, Vec<f64>), i: usize| -> (Vec<f64>, Vec<f64>) {
        if periodic & (1 << i) != 0 {
            let h = (hi[i] - lo[i]) / m as f64;
            ((0..m).map(|j| lo[i] + (j as f64 + 0.5) * h).collect(), vec![h; m])
        } else {
            (which.0.iter().map(|x| centre[i] + half[i] * x).collect(), which.1.iter().map(|w| half[i] * w).collect())
        }
    };
    let high: Vec<(Vec<f64>, Vec<f64>)> = (0..d).map(|i| axis_rule(2 * rules.k, &rules.high, i)).collect();
    let low: Vec<(Vec<f64>, Vec<f64>)> = (0..d).map(|i| axis_rule(rules.k, &rules.low, i)).collect();

    let mut tensor = |rule: &[(Vec<f64>, Vec<f64>)], abs_sum: &mut f64| -> f64 {
        let m = rule[0].0.len();
        let mut idx = [0usize; MAX_AXES];
        let mut x = [0.0; MAX_AXES];
        let mut total = 0.0;
        let mut comp = 0.0;
        loop {
            let mut w = 1.0;
            for i in 0..d {
                x[i] = rule[i].0[idx[i]];
                w *= rule[i].1[idx[i]];
            }
            let v = f(&x[..d]);
            evals += 1;
            if !v.is_finite() {
                finite = false;
            }
            let term = w * v;
            *abs_sum += term.abs();
            // Neumaier summation keeps the per-cell rule exact to rounding
            let t = total + term;
            if total.abs() >= term.abs() {
                comp += (total - t) + term;
            } else {
                comp += (term - t) + total;
            }
            total = t;
            let mut a = 0;
            loop {
                idx[a] += 1;
                if idx[a] < m {
                    break;
                }
                idx[a] = 0;
                a += 1;
                if a == d {
                    return total + comp;
                }
            }
        }
    };
    let mut abs_sum = 0.0;
    let qh = tensor(&high, &mut abs_sum);
    let mut dummy = 0.0;
    let ql = tensor(&low, &mut dummy);

    // fourth-difference probes along each axis
    let f0 = f(&centre[..d]);
    evals += 1;
    let ratio = (LAMBDA2 / LAMBDA3).powi(2);
    let mut diffs = [0.0; MAX_AXES];
    let mut x = centre;
    for i in 0..d {
        let mut probe = |s: f64| {
            x[i] = centre[i] + s * half[i];
            let v = f(&x[..d]);
            x[i] = centre[i];
            v
        };
        let a = probe(LAMBDA2) + probe(-LAMBDA2) - 2.0 * f0;
        let b = probe(LAMBDA3) + probe(-LAMBDA3) - 2.0 * f0;
        evals += 4;
        diffs[i] = (a - ratio * b).abs();
        if !diffs[i].is_finite() {
            diffs[i] = f64::INFINITY;
        }
    }
    let dmax = diffs[..d].iter().cloned().fold(0.0_f64, f64::max);
    let mut split_axis = 0;
    let mut best_width = -1.0;
    for i in 0..d {
        if diffs[i] >= 0.9 * dmax {
            let rel_width = (hi[i] - lo[i]) / widths0[i];
            if rel_width > best_width {
                best_width = rel_width;
                split_axis = i;
            }
        }
    }

    let floor = 50.0 * f64::EPSILON * abs_sum;
    Evaluated { value: qh, error: (qh - ql).abs() + floor, split_axis, evals, finite: finite && qh.is_finite() && ql.is_finite() }
}

/// Integrate `f` over the product of `axes`, starting from the grid given by
/// the interior `splits` of each axis.
pub(crate) fn adaptive(f: &(dyn Fn(&[f64]) -> f64 + Sync), axes: &[Axis], splits: &[Vec<f64>], spec: &QuadratureSpec) -> QuadratureResult {
    let d = axes.len();
    assert!((1..=MAX_AXES).contains(&d), "unsupported number of axes {d}");
    let k = spec.rule_order.max(1);
    let rules = Rules { low: gauss_legendre(k), high: gauss_legendre(2 * k), k };
    let mut widths0 = [1.0; MAX_AXES];
    for (w, a) in widths0.iter_mut().zip(axes) {
        *w = (a.hi - a.lo).abs().max(f64::MIN_POSITIVE);
    }

    // initial grid
    let mut edges: Vec<Vec<f64>> = Vec::with_capacity(d);
    for (i, a) in axes.iter().enumerate() {
        let mut e = vec![a.lo];
        if let Some(s) = splits.get(i) {
            e.extend(s.iter().copied().filter(|&x| x > a.lo && x < a.hi));
        }
        e.push(a.hi);
        edges.push(e);
    }
    let mut seeds: Vec<([f64; MAX_AXES], [f64; MAX_AXES], u8)> = Vec::new();
    let mut idx = [0usize; MAX_AXES];
    'grid: loop {
        let mut lo = [0.0; MAX_AXES];
        let mut hi = [0.0; MAX_AXES];
        let mut per = 0u8;
        for i in 0..d {
            lo[i] = edges[i][idx[i]];
            hi[i] = edges[i][idx[i] + 1];
            if axes[i].periodic && edges[i].len() == 2 {
                per |= 1 << i;
            }
        }
        seeds.push((lo, hi, per));
        let mut a = 0;
        loop {
            idx[a] += 1;
            if idx[a] + 1 < edges[a].len() {
                break;
            }
            idx[a] = 0;
            a += 1;
            if a == d {
                break 'grid;
            }
        }
    }

    let target = |v: f64| spec.abs_tol.max(spec.rel_tol * v.abs());
    let evaluate = |cells: &[([f64; MAX_AXES], [f64; MAX_AXES], u8)]| -> Vec<Evaluated> {
        cells.par_iter().map(|(lo, hi, per)| eval_cell(f, d, lo, hi, *per, &widths0, &rules)).collect()
    };

    let mut next_id = 0u64;
    let mut heap: BinaryHeap<Cell> = BinaryHeap::new();
    let mut done: Vec<Cell> = Vec::new();
    let mut n_evals = 0usize;
    let mut total_value = 0.0;
    let mut total_error = 0.0;
    let mut finite = true;

    for ((lo, hi, per), ev) in seeds.iter().zip(evaluate(&seeds)) {
        n_evals += ev.evals;
        finite &= ev.finite;
        total_value += ev.value;
        total_error += ev.error;
        heap.push(Cell { lo: *lo, hi: *hi, periodic: *per, value: ev.value, error: ev.error, split_axis: ev.split_axis, id: next_id });
        next_id += 1;
    }

    let mut iteration = 0usize;
    while finite && total_error > target(total_value) && n_evals < spec.max_evals && !heap.is_empty() {
        let mut batch: Vec<Cell> = Vec::with_capacity(BATCH);
        while batch.len() < BATCH {
            match heap.pop() {
                Some(c) => batch.push(c),
                None => break,
            }
        }
        let mut children: Vec<([f64; MAX_AXES], [f64; MAX_AXES], u8)> = Vec::with_capacity(2 * BATCH);
        let mut parents: Vec<Cell> = Vec::with_capacity(BATCH);
        for c in batch {
            let a = c.split_axis;
            let mid = 0.5 * (c.lo[a] + c.hi[a]);
            if !(mid > c.lo[a] && mid < c.hi[a]) {
                // cannot split further; keep as a final cell
                done.push(c);
                continue;
            }
            let per = c.periodic & !(1u8 << a);
            let mut hi1 = c.hi;
            hi1[a] = mid;
            let mut lo2 = c.lo;
            lo2[a] = mid;
            children.push((c.lo, hi1, per));
            children.push((lo2, c.hi, per));
            parents.push(c);
        }
        if children.is_empty() {
            continue;
        }
        let evs = evaluate(&children);
        for p in &parents {
            total_value -= p.value;
            total_error -= p.error;
        }
        for ((lo, hi, per), ev) in children.iter().zip(evs) {
            n_evals += ev.evals;
            finite &= ev.finite;
            total_value += ev.value;
            total_error += ev.error;
            heap.push(Cell { lo: *lo, hi: *hi, periodic: *per, value: ev.value, error: ev.error, split_axis: ev.split_axis, id: next_id });
            next_id += 1;
        }
        iteration += 1;
        if iteration.is_multiple_of(8) {
            // re-sum to shed the drift of the running totals
            total_value = heap.iter().chain(done.iter()).map(|c| c.value).sum();
            total_error = heap.iter().chain(done.iter()).map(|c| c.error).sum();
        }
    }

    if !finite {
        return QuadratureResult { value: f64::NAN, error_estimate: f64::INFINITY, n_evals, converged: false };
    }

    let mut all: Vec<Cell> = heap.into_vec();
    all.extend(done);
    all.sort_by_key(|c| c.id);
    let value = neumaier(all.iter().map(|c| c.value));
    let error = neumaier(all.iter().map(|c| c.error));
    QuadratureResult { value, error_estimate: error, n_evals, converged: error <= target(value) }
}

pub(crate) fn neumaier(values: impl Iterator<Item = f64>) -> f64 {
    let mut s = 0.0;
    let mut c = 0.0;
    for v in values {
        let t = s + v;
        if s.abs() >= v.abs() {
            c += (s - t) + v;
        } else {
            c += (v - t) + s;
        }
        s = t;
    }
    s + c
}
