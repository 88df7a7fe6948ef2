//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

mod common;

use std::time::{Duration, Instant};

use common::close;
use radchaos::verify::{
    check_decoupling, check_khintchine, check_lower_bounds, check_ruc_upper, check_sandwich,
    equivalence_report_for, meta_check, scaling_scan, CheckReport, ConstantId, ConstantsTable,
    FamilyKind, InstanceFamily, Mode, Suite,
};
use radchaos::{
    build_complete, cut_norm, cut_norm_star, disc_exact, disc_monte_carlo, expected_disc_exact,
    linf_chaos, linf_multiple, lp_rademacher_exact, mixed_norm_profile, opnorm_inf_to_1, Budget,
    CoeffTensor, SignPattern,
};
use serde_json::{json, Value};

const B: Budget = Budget(radchaos::DEFAULT_BUDGET);
const SEED: u64 = 20240917;

struct Outcome {
    checks: Vec<(String, bool)>,
    data: Value,
}

impl Outcome {
    fn new() -> Self {
        Outcome { checks: Vec::new(), data: json!({}) }
    }

    fn check(&mut self, what: impl Into<String>, ok: bool) {
        self.checks.push((what.into(), ok));
    }

    fn reports(&mut self, key: &str, reports: &[CheckReport]) {
        for r in reports {
            self.check(
                format!("{key}/{} ({:?}): {} instances, {} violations", r.name, r.mode, r.instances, r.violations),
                r.mode != Mode::Hard || r.pass,
            );
        }
        self.data[key] = serde_json::to_value(reports).unwrap();
    }

    fn pass(&self) -> bool {
        self.checks.iter().all(|(_, ok)| *ok)
    }
}

fn families(order: usize, extents: (usize, usize), count: usize) -> Vec<InstanceFamily> {
    FamilyKind::RANDOM
        .iter()
        .map(|&k| InstanceFamily::new(k, order, extents, count, SEED))
        .collect()
}

fn named(reports: &[CheckReport], name: &str) -> Vec<CheckReport> {
    reports.iter().filter(|r| r.name == name).cloned().collect()
}

fn pattern_min(a: &CoeffTensor) -> f64 {
    (0..1u64 << a.len())
        .map(|m| {
            let flipped = a.hadamard_signs(&SignPattern::from_mask(m, a.len())).unwrap();
            linf_multiple(&flipped, B).unwrap().value
        })
        .fold(f64::INFINITY, f64::min)
}

fn pattern_mean(a: &CoeffTensor) -> f64 {
    let total: f64 = (0..1u64 << a.len())
        .map(|m| {
            let flipped = a.hadamard_signs(&SignPattern::from_mask(m, a.len())).unwrap();
            linf_multiple(&flipped, B).unwrap().value
        })
        .sum();
    total / (1u64 << a.len()) as f64
}

fn c1() -> Outcome {
    let mut out = Outcome::new();
    let c = ConstantsTable::default();
    let mut all = Vec::new();
    for f in families(2, (1, 6), 500) {
        all.extend(check_sandwich(&f, &c, B).unwrap());
    }
    out.reports("random", &all);
    let check = CoeffTensor::from_rows(&[vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap();
    let ratio = opnorm_inf_to_1(&check, B).unwrap().value / cut_norm(&check, B).unwrap().value;
    out.check(format!("[[1,-1],[-1,1]] ratio {ratio} == 4"), ratio == 4.0);
    out.data["checkerboard_ratio"] = json!(ratio);
    out
}

fn c2() -> Outcome {
    let mut out = Outcome::new();
    let mut all = Vec::new();
    for f in families(3, (1, 3), 200) {
        all.extend(check_sandwich(&f, &ConstantsTable::default(), B).unwrap());
    }
    out.reports("random", &all);
    out
}

fn c3() -> Outcome {
    let mut out = Outcome::new();
    let mut all = Vec::new();
    for f in families(2, (1, 6), 500) {
        let reports = check_lower_bounds(&f, &ConstantsTable::default(), B).unwrap();
        all.extend(named(&reports, "lower-bounds/array"));
    }
    out.reports("random", &all);
    let ones = CoeffTensor::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
    let min = pattern_min(&ones);
    let bound = ConstantsTable::default().szarek() * mixed_norm_profile(&ones).max();
    out.check(format!("2x2 ones: min over signs {min} == {bound}"), close(min, bound, 1e-12) && min == 2.0);
    out.data["ones_min"] = json!(min);
    out
}

fn c4() -> Outcome {
    let mut out = Outcome::new();
    let mut all = Vec::new();
    for f in families(2, (2, 12), 500) {
        let reports = check_lower_bounds(&f, &ConstantsTable::default(), B).unwrap();
        all.extend(named(&reports, "lower-bounds/chaos"));
    }
    out.reports("random", &all);
    out
}

fn c5() -> Outcome {
    let mut out = Outcome::new();
    let c = ConstantsTable::default();
    out.check("C_2(2) = 4", c.decoupling(2) == 4.0);
    out.check("C_3(2) = 32", c.decoupling(3) == 32.0);
    let mut d2 = Vec::new();
    for f in families(2, (2, 6), 300) {
        d2.extend(check_decoupling(&f, &c, B).unwrap());
    }
    out.reports("d2", &d2);
    let mut d3 = Vec::new();
    for f in families(3, (3, 4), 50) {
        d3.extend(check_decoupling(&f, &c, B).unwrap());
    }
    out.reports("d3", &d3);
    out
}

fn c6() -> Outcome {
    let mut out = Outcome::new();
    let c = ConstantsTable::default();
    let mut d2 = Vec::new();
    for f in families(2, (2, 3), 100) {
        d2.extend(check_ruc_upper(&f, &c, B).unwrap());
    }
    let mut d3 = Vec::new();
    for f in families(3, (2, 2), 20) {
        d3.extend(check_ruc_upper(&f, &c, B).unwrap());
    }
    let exact_only = |reports: &[CheckReport]| reports.iter().all(|r| r.mode == Mode::Hard);
    out.check("every instance evaluated exactly", exact_only(&d2) && exact_only(&d3));
    out.reports("d2", &d2);
    out.reports("d3", &d3);
    let ones = CoeffTensor::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
    let mean = pattern_mean(&ones);
    let m = mixed_norm_profile(&ones);
    let bound = 2.0 * m.m()[0] + m.m()[1];
    out.check(format!("2x2 ones: E = {mean} == 3 <= {bound}"), mean == 3.0 && mean <= bound);
    out.data["ones_mean"] = json!(mean);
    out
}

fn c7() -> Outcome {
    let mut out = Outcome::new();
    let mut all = Vec::new();
    for f in families(1, (1, 14), 200) {
        all.extend(check_khintchine(&f, &[1.0, 2.0, 3.0, 4.0], &ConstantsTable::default(), B).unwrap());
    }
    out.reports("random", &all);
    let l1 = lp_rademacher_exact(&[1.0, 1.0], 1.0, B).unwrap();
    let bound = ConstantsTable::default().szarek() * 2f64.sqrt();
    out.check(format!("a = (1,1): L1 {l1} vs {bound}"), (l1 - bound).abs() <= 1e-12);
    out.data["pair_l1"] = json!(l1);
    out
}

fn c8() -> Outcome {
    let mut out = Outcome::new();
    let k3 = build_complete(3, 2, 1.0).unwrap();
    let k4 = build_complete(4, 2, 1.0).unwrap();
    let d3 = disc_exact(&k3, B).unwrap().value;
    let d4 = disc_exact(&k4, B).unwrap().value;
    let e3 = expected_disc_exact(&k3, B).unwrap().value;
    let mc = disc_monte_carlo(&k3, 10_000, SEED, B).unwrap();
    let se = mc.stderr.unwrap();
    out.check(format!("disc(K_3) = {d3}"), d3 == 1.0);
    out.check(format!("disc(K_4) = {d4}"), d4 == 1.0);
    out.check(format!("E disc(K_3) = {e3}"), e3 == 1.5);
    out.check(format!("Monte-Carlo mean {} within 3 * {se} of 1.5", mc.value), (mc.value - 1.5).abs() <= 3.0 * se);
    out.data = json!({ "disc_k3": d3, "disc_k4": d4, "expected_k3": e3, "mc": mc });
    out
}

fn c9() -> Outcome {
    let mut out = Outcome::new();
    let tol = 1e-12;
    let mut record = |what: &str, pairs: Vec<(f64, f64)>| {
        let bad = pairs.iter().filter(|(a, b)| !close(*a, *b, tol)).count();
        out.check(format!("{what}: {} instances, {bad} disagreements", pairs.len()), bad == 0 && pairs.len() >= 100);
    };
    let g = |order| InstanceFamily::new(FamilyKind::RandomGaussian, order, (1, 4), 100, SEED);
    let s = |order| InstanceFamily::new(FamilyKind::RandomSign, order, (1, 4), 100, SEED);

    let mats: Vec<CoeffTensor> = (0..100).map(|i| g(2).tensor(i)).collect();
    let cubes: Vec<CoeffTensor> = (0..100).map(|i| s(3).tensor(i)).collect();
    let both: Vec<&CoeffTensor> = mats.iter().zip(&cubes).flat_map(|(a, b)| [a, b]).collect();
    record("cut_norm", both.iter().map(|a| (cut_norm(a, B).unwrap().value, common::cut(a))).collect());
    record("linf_multiple", both.iter().map(|a| (linf_multiple(a, B).unwrap().value, common::linf(a))).collect());
    record("opnorm_inf_to_1", mats.iter().map(|a| (opnorm_inf_to_1(a, B).unwrap().value, common::opnorm(a))).collect());

    let chaos_family = InstanceFamily::new(FamilyKind::RandomGaussian, 2, (2, 4), 100, SEED);
    let chaos3 = InstanceFamily::new(FamilyKind::RandomSign, 3, (3, 4), 100, SEED);
    let simplices: Vec<_> = (0..100).flat_map(|i| [chaos_family.simplex(i), chaos3.simplex(i)]).collect();
    record("cut_norm_star", simplices.iter().map(|a| (cut_norm_star(a, B).unwrap().value, common::star(a))).collect());
    record("linf_chaos", simplices.iter().map(|a| (linf_chaos(a, B).unwrap().value, common::chaos(a))).collect());

    let vectors: Vec<Vec<f64>> = (0..100).map(|i| g(1).vector(i)).collect();
    record(
        "lp_rademacher_exact",
        vectors
            .iter()
            .flat_map(|v| [1.0, 2.5, 4.0].map(|p| (lp_rademacher_exact(v, p, B).unwrap(), common::lp(v, p))))
            .collect(),
    );

    let graphs = InstanceFamily::new(FamilyKind::RandomGaussian, 2, (2, 4), 100, SEED);
    let hs: Vec<_> = (0..100).map(|i| graphs.hypergraph(i)).collect();
    record("disc_exact", hs.iter().map(|h| (disc_exact(h, B).unwrap().value, common::disc(h))).collect());
    record(
        "expected_disc_exact",
        hs.iter().map(|h| (expected_disc_exact(h, B).unwrap().value, common::expected_disc(h))).collect(),
    );
    out
}

fn c10() -> Outcome {
    let mut out = Outcome::new();
    let table = scaling_scan(2, 3, 7, 10_000, SEED, B).unwrap();
    let computed = table.rows.iter().all(|r| r.disc_exact.is_some());
    out.check("disc_exact available for n = 3..7", computed);
    out.check("disc_exact nondecreasing in n", table.monotone);
    for r in &table.rows {
        let b = r.n as f64 * ((r.n - 1) as f64).sqrt();
        out.check(format!("n = {}: B = {} matches n sqrt(n-1)", r.n, r.balance), close(r.balance, b, 1e-12));
        let p = (r.n as f64).powf(1.5);
        out.check(format!("n = {}: n^(3/2) = {}", r.n, r.n_pow), close(r.n_pow, p, 1e-12));
    }
    let graphs: Vec<_> = (3..=7).map(|n| build_complete(n, 2, 1.0).unwrap()).collect();
    let reports = equivalence_report_for(&graphs, B).unwrap();
    out.reports("chain", &reports);
    out.data["scan"] = serde_json::to_value(&table).unwrap();
    out.data["csv"] = json!(table.to_csv(|x| radchaos::cli::round_sig(x).to_string()));
    out
}

type Criterion = (u32, &'static str, fn() -> Outcome);

const CRITERIA: [Criterion; 10] = [
    (1, "cut <= opnorm <= 4 cut on random matrices", c1),
    (2, "cut <= linf <= 8 cut, order 3", c2),
    (3, "linf >= max M_k / sqrt(2)", c3),
    (4, "chaos >= max M_k / (16 sqrt(2))", c4),
    (5, "decoupling with C_2(2) = 4, C_3(2) = 32", c5),
    (6, "exact averaged upper bound", c6),
    (7, "Khintchine and Szarek", c7),
    (8, "discrepancy ground truth", c8),
    (9, "agreement with brute force", c9),
    (10, "scaling scan and equivalence chain", c10),
];

fn limit(id: u32) -> Option<Duration> {
    match id {
        1 => Some(Duration::from_secs(60)),
        2 => Some(Duration::from_secs(120)),
        10 => Some(Duration::from_secs(600)),
        _ => None,
    }
}

fn run_all() -> Vec<(u32, Outcome, Duration)> {
    CRITERIA
        .iter()
        .map(|&(id, _, f)| {
            let start = Instant::now();
            let out = f();
            (id, out, start.elapsed())
        })
        .collect()
}

fn serialized(results: &[(u32, Outcome, Duration)]) -> String {
    let v: Vec<Value> = results.iter().map(|(id, o, _)| json!({ "criterion": id, "data": o.data })).collect();
    serde_json::to_string(&v).unwrap()
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

/// Tightens each listed constant by 1% and reruns every suite asserting it on
/// the extremal catalog; each must go from passing to failing.
fn c12() -> Outcome {
    let mut out = Outcome::new();
    let listed = [
        ConstantId::AlonNaor,
        ConstantId::MultiSandwich,
        ConstantId::Szarek,
        ConstantId::ChaosLower,
        ConstantId::Khintchine,
        ConstantId::Decoupling,
    ];
    for id in listed {
        for suite in Suite::ALL.into_iter().filter(|s| s.constants().contains(&id)) {
            let m = meta_check(id, suite, 0.01, B).unwrap();
            out.check(
                format!(
                    "{id} in {}: baseline {}, tightened {}",
                    suite.name(),
                    if m.baseline_pass { "passes" } else { "fails" },
                    if m.tightened_pass { "passes" } else { "fails" }
                ),
                m.detected,
            );
        }
    }
    out
}

fn report(id: u32, title: &str, out: &Outcome, extra: &str) -> bool {
    let pass = out.pass();
    println!("criterion {id:>2}: {} {title}{extra}", if pass { "PASS" } else { "FAIL" });
    for (what, ok) in &out.checks {
        println!("    [{}] {what}", if *ok { "ok" } else { "FAILED" });
    }
    pass
}

fn main() {
    // single worker first: criterion 10 is timed single-threaded
    let single = in_pool(1, run_all);
    let mut all_pass = true;
    for ((id, out, elapsed), &(_, title, _)) in single.iter().zip(&CRITERIA) {
        let mut out = Outcome { checks: out.checks.clone(), data: Value::Null };
        let mut extra = format!(" ({:.2}s)", elapsed.as_secs_f64());
        if let Some(max) = limit(*id) {
            out.check(format!("runtime {:.2}s < {}s", elapsed.as_secs_f64(), max.as_secs()), *elapsed < max);
        }
        if *id == 10 {
            extra.push_str(" single-threaded");
        }
        all_pass &= report(*id, title, &out, &extra);
    }

    let base = serialized(&single);
    let mut c11 = Outcome::new();
    for threads in [4, 8] {
        let other = serialized(&in_pool(threads, run_all));
        c11.check(format!("criteria 1-10 JSON with {threads} workers identical to 1 worker ({} bytes)", base.len()), other == base);
    }
    all_pass &= report(11, "byte-identical output for 1, 4, 8 workers", &c11, "");

    let c12 = c12();
    all_pass &= report(12, "1% tightening of each constant is detected on the catalog", &c12, "");

    if !all_pass {
        println!("acceptance: FAILED");
        std::process::exit(1);
    }
    println!("acceptance: all criteria passed");
}
