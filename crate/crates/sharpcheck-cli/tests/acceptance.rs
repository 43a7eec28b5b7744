//! Acceptance suite. Runs every command family the way the binary would,
//! prints one line per criterion and exits non-zero if any criterion fails.
//!
//! The suite is run three times (8, 4 and 1 worker threads) with timing
//! disabled; criteria 1 to 12 are judged on the first pass and criterion 13
//! compares the rendered JSON of all three.

use std::f64::consts::PI;
use std::time::Instant;

use sharpcheck::extremals::LiouvilleSolution;
use sharpcheck::kernels::alpha_n;
use sharpcheck::pde_checks::stress_tensor_e;
use sharpcheck::report::{Report, ReportRow};
use sharpcheck::sampling::interior_points;
use sharpcheck::Dimension;
use sharpcheck_cli::{render, run_with_threads, Command, OutputFormat, RunConfig};

struct Case {
    criterion: usize,
    cfg: RunConfig,
}

struct Outcome {
    criterion: usize,
    cfg: RunConfig,
    label: String,
    report: Report,
    seconds: f64,
}

fn cfg(command: Command, n: usize) -> RunConfig {
    RunConfig { command: Some(command), n, timing: false, ..RunConfig::default() }
}

/// `log(n^{n-1} σ_{n-1} / 2)` with `σ_1 = 2π`, `σ_2 = 4π`.
fn liouville_constant(n: usize) -> f64 {
    match n {
        2 => (2.0 * PI).ln(),
        3 => (18.0 * PI).ln(),
        _ => unreachable!(),
    }
}

fn suite() -> Vec<Case> {
    let mut cases = Vec::new();
    let mut add = |criterion, cfg| cases.push(Case { criterion, cfg });

    add(1, cfg(Command::Constants, 2));
    for n in [2, 3] {
        for lambda in [0.5, 1.0, 2.0] {
            for x0 in [0.0, 0.7] {
                for c in [0.0, liouville_constant(n)] {
                    add(2, RunConfig { lambda, x0_prime: vec![x0], c_tilde: Some(c), ..cfg(Command::VerifyExtremal, n) });
                }
            }
        }
    }
    for n in [2, 3] {
        add(3, RunConfig { builtin: Some("library".into()), seed: 7, ..cfg(Command::Deficit, n) });
    }
    for n in [2, 3] {
        for (lambda, x0) in [(1.0, 0.0), (2.0, 0.7)] {
            add(5, RunConfig { lambda, x0_prime: vec![x0], ..cfg(Command::Mass, n) });
        }
    }
    for n in [2, 3, 4] {
        add(6, cfg(Command::PdeCheck, n));
    }
    for n in [2usize, 3] {
        let y = |v: &[f64]| v[..n - 1].iter().copied().chain([v[3]]).collect::<Vec<_>>();
        let grid: [(f64, f64, Vec<f64>, f64); 6] = [
            (1.0, 2.0, vec![], 0.0),
            (1.0, 5.0, y(&[0.5, -0.3, 0.0, 0.2]), 0.0),
            (0.5, 3.0, vec![], 0.7),
            (0.5, 8.0, y(&[1.0, 0.4, 0.0, 0.5]), -0.4),
            (2.0, 4.0, y(&[-0.6, 0.1, 0.0, 0.0]), 0.7),
            (2.0, 10.0, y(&[0.2, 0.2, 0.0, 1.0]), 1.5),
        ];
        for (lambda, r, y, x0) in grid {
            add(7, RunConfig { lambda, radii: vec![r], y, x0_prime: vec![x0], ..cfg(Command::Pohozaev, n) });
        }
    }
    for n in [2, 3, 4] {
        add(9, cfg(Command::Asymptotics, n));
    }
    add(9, RunConfig { lambda: 2.0, x0_prime: vec![0.7], ..cfg(Command::Asymptotics, 3) });
    for n in [2, 3, 4] {
        add(10, cfg(Command::Supersolution, n));
    }
    for n in [3, 4] {
        add(11, cfg(Command::LimitStudy, n));
    }
    // not a criterion of their own, but part of the determinism sweep
    for n in [2, 3] {
        add(13, cfg(Command::Fullspace, n));
    }
    cases
}

fn run_suite(cases: &[Case], threads: usize) -> Vec<Outcome> {
    cases
        .iter()
        .map(|c| {
            let label = format!("{:?} n={} lambda={} x0={:?}", c.cfg.command.unwrap(), c.cfg.n, c.cfg.lambda, c.cfg.x0_prime);
            let start = Instant::now();
            let report = run_with_threads(&c.cfg, Some(threads)).unwrap_or_else(|e| panic!("{label}: {e}"));
            Outcome { criterion: c.criterion, cfg: c.cfg.clone(), label, report, seconds: start.elapsed().as_secs_f64() }
        })
        .collect()
}

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new() -> Self {
        Verdict { pass: true, detail: String::new() }
    }

    fn require(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.pass = false;
            if self.detail.len() < 400 {
                self.detail.push_str(&what());
                self.detail.push_str("; ");
            }
        }
    }
}

fn of(outcomes: &[Outcome], criterion: usize) -> impl Iterator<Item = &Outcome> {
    outcomes.iter().filter(move |o| o.criterion == criterion)
}

fn rows<'a>(o: &'a Outcome, prefix: &'a str) -> impl Iterator<Item = &'a ReportRow> {
    o.report.rows.iter().filter(move |r| r.check_id.starts_with(prefix))
}

fn one<'a>(o: &'a Outcome, prefix: &'a str) -> &'a ReportRow {
    let mut it = rows(o, prefix);
    let r = it.next().unwrap_or_else(|| panic!("{}: no row {prefix}", o.label));
    assert!(it.next().is_none(), "{}: several rows {prefix}", o.label);
    r
}

/// Every row of every case passes, and each case finished within `limit` seconds.
fn all_rows_and_time(v: &mut Verdict, outcomes: &[Outcome], criterion: usize, limit: f64) {
    for o in of(outcomes, criterion) {
        for r in o.report.failures() {
            v.require(false, || format!("{}", r));
        }
        v.require(o.seconds < limit, || format!("{} took {:.1}s", o.label, o.seconds));
    }
}

fn criterion_1(out: &[Outcome]) -> Verdict {
    let mut v = Verdict::new();
    let start = Instant::now();
    let a = alpha_n(2).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    v.require((a - 1.0 / (4.0 * PI)).abs() <= 1e-14, || format!("alpha_2 = {a:e}"));
    v.require(elapsed < 1e-3, || format!("took {elapsed}s"));
    let o = of(out, 1).next().unwrap();
    let r = one(o, "constants.alpha_n[n=2]");
    v.require((r.value - 1.0 / (4.0 * PI)).abs() <= 1e-14 && r.pass, || format!("{r}"));
    all_rows_and_time(&mut v, out, 1, 1.0);
    v.detail.push_str(&format!("alpha_2 - 1/(4pi) = {:e}", a - 1.0 / (4.0 * PI)));
    v
}

fn criterion_2(out: &[Outcome]) -> Verdict {
    let mut v = Verdict::new();
    let mut worst = 0.0f64;
    let mut count = 0;
    for o in of(out, 2) {
        let r = one(o, "extremal.deficit");
        worst = worst.max(r.value.abs());
        count += 1;
        v.require(r.value.abs() < 1e-6, || format!("{r}"));
        v.require(o.seconds < 60.0, || format!("{} took {:.1}s", o.label, o.seconds));
    }
    v.require(count == 24, || format!("{count} cases instead of 24"));
    v.detail.push_str(&format!("{count} cases, max |deficit| = {worst:.2e}"));
    v
}

fn criterion_3(out: &[Outcome]) -> Verdict {
    let mut v = Verdict::new();
    let mut min = f64::INFINITY;
    let mut total = 0.0;
    for o in of(out, 3) {
        let rs: Vec<_> = rows(o, "deficit.nonnegative").collect();
        v.require(rs.len() == 20, || format!("{}: {} fields", o.label, rs.len()));
        for r in rs {
            min = min.min(r.value);
            v.require(r.value >= -1e-8, || format!("{r}"));
        }
        total += o.seconds;
    }
    v.require(total < 600.0, || format!("took {total:.1}s"));
    v.detail.push_str(&format!("40 fields, min deficit = {min:.3e}, {total:.1}s"));
    v
}

fn criterion_4(out: &[Outcome]) -> Verdict {
    let mut v = Verdict::new();
    let mut worst = 0.0f64;
    let mut count = 0;
    for o in of(out, 2) {
        let q: Vec<_> = rows(o, "extremal.quotient").collect();
        // the extremal is constant at (1, 0) and Q is 0/0
        if o.cfg.lambda == 1.0 && o.cfg.x0_prime == [0.0] {
            v.require(q.is_empty(), || format!("{}: unexpected quotient", o.label));
            continue;
        }
        v.require(q.len() == 1, || format!("{}: no quotient", o.label));
        for r in q {
            let target = 1.0 / alpha_n(o.cfg.n as i32).unwrap();
            let rel = (r.value - target).abs() / target;
            worst = worst.max(rel);
            count += 1;
            v.require(rel <= 1e-4, || format!("{r}"));
        }
    }
    v.require(count == 20, || format!("{count} quotients instead of 20"));
    v.detail.push_str(&format!("{count} cases, max relative error = {worst:.2e}"));
    v
}

fn criterion_5(out: &[Outcome]) -> Verdict {
    let mut v = Verdict::new();
    let mut worst = 0.0f64;
    for o in of(out, 5) {
        let n = o.cfg.n;
        let target = if n == 2 { 2.0 * PI } else { 18.0 * PI };
        let m = one(o, "mass.boundary").value;
        let b = one(o, "mass.beta").value;
        worst = worst.max((m - target).abs() / target);
        v.require((m - target).abs() <= 1e-6 * target, || format!("{}: mass {m}", o.label));
        v.require((b - n as f64).abs() <= 1e-6, || format!("{}: beta {b}", o.label));
    }
    all_rows_and_time(&mut v, out, 5, 30.0);
    v.detail.push_str(&format!("max relative mass error = {worst:.2e}"));
    v
}

fn criterion_6(out: &[Outcome]) -> Verdict {
    let mut v = Verdict::new();
    let mut worst = 0.0f64;
    for o in of(out, 6) {
        for id in ["pde.interior_residual", "pde.neumann_residual"] {
            let r = one(o, id);
            worst = worst.max(r.value);
            v.require(r.value < 1e-12, || format!("{r}"));
        }
        let ratio = one(o, "pde.fd_order_ratio").value;
        v.require((ratio - 4.0).abs() <= 1.0, || format!("{}: FD ratio {ratio}", o.label));
        for id in ["pde.neumann_negative_control", "pde.el_negative_control", "pde.stress_negative_control"] {
            let r = one(o, id);
            v.require(r.pass, || format!("{r}"));
        }
    }
    all_rows_and_time(&mut v, out, 6, 10.0);
    v.detail.push_str(&format!("n = 2,3,4, max residual = {worst:.2e}"));
    v
}

fn criterion_7(out: &[Outcome]) -> Verdict {
    let mut v = Verdict::new();
    let mut worst = 0.0f64;
    let mut count = 0;
    for o in of(out, 7) {
        let r = one(o, "pohozaev.gap");
        worst = worst.max(r.value.abs());
        count += 1;
        v.require(r.value.abs() < 1e-5, || format!("{r}"));
    }
    v.require(count == 12, || format!("{count} cases instead of 12"));
    all_rows_and_time(&mut v, out, 7, 60.0);
    v.detail.push_str(&format!("{count} cases, max |gap| = {worst:.2e}"));
    v
}

fn criterion_8(out: &[Outcome]) -> Verdict {
    let mut v = Verdict::new();
    for o in of(out, 6) {
        let r = one(o, "pde.stress_tensor");
        v.require(r.value < 1e-10, || format!("{r}"));
    }
    let mut worst = 0.0f64;
    for n in [2, 3, 4] {
        let p = LiouvilleSolution::new(Dimension::new(n).unwrap(), 1.3, &vec![0.4; n - 1]).unwrap();
        let pts = interior_points(n, 100, 11, 6.0, 0.0);
        let start = Instant::now();
        let e = pts.iter().map(|x| stress_tensor_e(&p, x).max_abs()).fold(0.0, f64::max);
        let secs = start.elapsed().as_secs_f64();
        worst = worst.max(e);
        v.require(e < 1e-10, || format!("n={n}: max|E| = {e:e}"));
        v.require(secs < 1.0, || format!("n={n}: took {secs}s"));
    }
    v.detail.push_str(&format!("max|E_ij| = {worst:.2e}"));
    v
}

fn criterion_9(out: &[Outcome]) -> Verdict {
    let mut v = Verdict::new();
    let mut worst = 0.0f64;
    for o in of(out, 9) {
        for id in ["asymptotics.deviation_times_R_spread", "asymptotics.gradient_decay_spread"] {
            let r = one(o, id);
            worst = worst.max(r.value);
            v.require(r.value <= 2.0, || format!("{r}"));
        }
    }
    all_rows_and_time(&mut v, out, 9, 10.0);
    v.detail.push_str(&format!("largest max/min over R = {worst:.4}"));
    v
}

fn criterion_10(out: &[Outcome]) -> Verdict {
    let mut v = Verdict::new();
    for o in of(out, 10) {
        v.require(one(o, "supersolution.phi_ode_residual").value < 1e-6, || format!("{}: ODE residual", o.label));
        v.require(one(o, "supersolution.phi_sandwich").pass, || format!("{}: sandwich", o.label));
        v.require(one(o, "supersolution.negative_control_rejected").pass, || format!("{}: control", o.label));
    }
    all_rows_and_time(&mut v, out, 10, 30.0);
    // a parameter set violating the interior inequality must be rejected
    let bad = RunConfig { delta: Some(0.3), ..cfg(Command::Supersolution, 3) };
    let rep = run_with_threads(&bad, Some(1)).unwrap();
    v.require(!rep.all_pass(), || "delta = 0.3 accepted".into());
    v.detail.push_str("n = 2,3,4 solved sets pass, delta = 0.3 rejected");
    v
}

fn criterion_11(out: &[Outcome]) -> Verdict {
    let mut v = Verdict::new();
    for o in of(out, 11) {
        for id in ["limit.gap_C0", "limit.gap_C1"] {
            let r = one(o, id);
            v.require(r.check_id.contains("p=") && r.value < 1e-3, || format!("{r}"));
        }
        let r = one(o, "limit.rp_homogeneity");
        v.require((r.value - r.reference).abs() < 1e-3, || format!("{r}"));
        let r = one(o, "limit.sobolev_quotient_log");
        v.require((r.value - r.reference).abs() < 1e-2, || format!("{r}"));
        v.detail.push_str(&format!("n={}: quotient gap {:.2e}; ", o.cfg.n, (r.value - r.reference).abs()));
    }
    all_rows_and_time(&mut v, out, 11, 300.0);
    v
}

fn criterion_12(out: &[Outcome]) -> Verdict {
    let mut v = Verdict::new();
    let o = of(out, 11).find(|o| o.cfg.n == 3).unwrap();
    let r = one(o, "limit.sobolev_trace_equality[n=3,p=2]");
    v.require(r.value.abs() < 1e-6, || format!("{r}"));
    v.require(o.seconds < 60.0, || format!("took {:.1}s", o.seconds));
    v.detail.push_str(&format!("|deficit| = {:.2e}", r.value.abs()));
    v
}

type Criterion = fn(&[Outcome]) -> Verdict;

fn json(outcomes: &[Outcome]) -> String {
    outcomes.iter().map(|o| render(&o.report, OutputFormat::Json).unwrap()).collect()
}

fn main() {
    let cases = suite();
    let start = Instant::now();
    let first = run_suite(&cases, 8);
    let checks: [(usize, Criterion); 12] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
        (11, criterion_11),
        (12, criterion_12),
    ];
    let mut failed = 0;
    let mut report = |k: usize, v: Verdict| {
        failed += !v.pass as usize;
        println!("criterion {k:>2}: {} {}", if v.pass { "PASS" } else { "FAIL" }, v.detail.trim_end_matches("; "));
    };
    for (k, f) in checks {
        report(k, f(&first));
    }
    let reference = json(&first);
    let mut v = Verdict::new();
    for threads in [4, 1] {
        let again = json(&run_suite(&cases, threads));
        v.require(again == reference, || format!("{threads} threads differ from 8"));
    }
    v.detail.push_str(&format!("{} cases, {} bytes of JSON, identical across 8/4/1 threads", cases.len(), reference.len()));
    report(13, v);
    println!("acceptance: {} of 13 criteria failed, {:.1}s", failed, start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
