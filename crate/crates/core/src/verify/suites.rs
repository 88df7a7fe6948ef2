use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::catalog::{catalog, CatalogObject};
use super::{
    le_tol, merge_reports, ratio, CheckReport, ConstantId, ConstantsTable, FamilyKind,
    InstanceFamily, Mode, STABILITY_CAP,
};
use crate::discrepancy::{balance, disc_exact, expected_disc_exact};
use crate::enumerate::Budget;
use crate::error::{Error, Result};
use crate::model::{CoeffTensor, SignPattern, SimplexCoeffs, WeightedHypergraph};
use crate::norms::{
    cut_norm, decouple, linf_chaos, linf_multiple, lp_rademacher_exact, mixed_norm_profile,
    mixed_norm_profile_simplex, opnorm_inf_to_1,
};

pub const DEFAULT_P_LIST: [f64; 4] = [1.0, 2.0, 3.0, 4.0];

/// Monte-Carlo sample size used by the averaged upper bound beyond exact reach.
const RUC_MC_TRIALS: u64 = 2000;

/// The registry of suites; `--suite all` runs them in this order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    /// Cut-norm sandwiches with factors 4 (operator norm) and 2^d.
    Sandwich,
    /// Slice-norm lower bounds with 1/sqrt(2) (arrays) and 1/(16 sqrt(2)) (chaos).
    LowerBounds,
    /// Two-sided decoupling with C_d(2).
    Decoupling,
    /// Averaged upper bound sum_k 2^(d-k) M_k, and the minimum lower bound.
    RucUpper,
    /// Khintchine and Szarek inequalities on exact L_p norms.
    Khintchine,
    /// Discrepancy against the balance functional.
    Equivalence,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Sandwich,
        Suite::LowerBounds,
        Suite::Decoupling,
        Suite::RucUpper,
        Suite::Khintchine,
        Suite::Equivalence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Sandwich => "sandwich",
            Suite::LowerBounds => "lower-bounds",
            Suite::Decoupling => "decoupling",
            Suite::RucUpper => "ruc-upper",
            Suite::Khintchine => "khintchine",
            Suite::Equivalence => "equivalence",
        }
    }

    pub fn from_name(name: &str) -> Option<Suite> {
        Suite::ALL.into_iter().find(|s| s.name() == name)
    }

    /// Constants whose tightening this suite must detect.
    pub fn constants(self) -> &'static [ConstantId] {
        match self {
            Suite::Sandwich => &[ConstantId::AlonNaor, ConstantId::MultiSandwich],
            Suite::LowerBounds => &[ConstantId::Szarek, ConstantId::ChaosLower],
            Suite::Decoupling => &[ConstantId::Decoupling],
            Suite::RucUpper => &[ConstantId::RucUpper, ConstantId::Szarek],
            Suite::Khintchine => &[ConstantId::Szarek, ConstantId::Khintchine],
            Suite::Equivalence => &[],
        }
    }
}

fn describe_tensor(a: &CoeffTensor) -> String {
    serde_json::to_string(a).unwrap()
}

fn describe_simplex(a: &SimplexCoeffs) -> String {
    let entries: Vec<String> = a
        .values()
        .iter()
        .map(|(k, v)| format!("{k:?}:{v}"))
        .collect();
    format!("d={} n={} {{{}}}", a.d(), a.n(), entries.join(", "))
}

/// Instances of one object type taken from a family or the catalog.
fn tensors(family: &InstanceFamily, suite: Suite) -> Vec<(String, CoeffTensor)> {
    if family.kind == FamilyKind::ExtremalCatalog {
        catalog()
            .into_iter()
            .filter(|e| e.belongs_to(suite.name()))
            .filter_map(|e| match e.object {
                CatalogObject::Tensor(t) => Some((e.name, t)),
                _ => None,
            })
            .collect()
    } else {
        (0..family.count)
            .map(|i| (format!("#{i}"), family.tensor(i)))
            .collect()
    }
}

fn simplices(family: &InstanceFamily, suite: Suite) -> Vec<(String, SimplexCoeffs)> {
    if family.kind == FamilyKind::ExtremalCatalog {
        catalog()
            .into_iter()
            .filter(|e| e.belongs_to(suite.name()))
            .filter_map(|e| match e.object {
                CatalogObject::Simplex(s) => Some((e.name, s)),
                _ => None,
            })
            .collect()
    } else {
        (0..family.count)
            .map(|i| (format!("#{i}"), family.simplex(i)))
            .collect()
    }
}

fn vectors(family: &InstanceFamily, suite: Suite) -> Vec<(String, Vec<f64>)> {
    if family.kind == FamilyKind::ExtremalCatalog {
        catalog()
            .into_iter()
            .filter(|e| e.belongs_to(suite.name()))
            .filter_map(|e| match e.object {
                CatalogObject::Vector(v) => Some((e.name, v)),
                _ => None,
            })
            .collect()
    } else {
        (0..family.count)
            .map(|i| (format!("#{i}"), family.vector(i)))
            .collect()
    }
}

fn hypergraphs(family: &InstanceFamily, suite: Suite) -> Vec<(String, WeightedHypergraph)> {
    if family.kind == FamilyKind::ExtremalCatalog {
        catalog()
            .into_iter()
            .filter(|e| e.belongs_to(suite.name()))
            .filter_map(|e| match e.object {
                CatalogObject::Graph(g) => Some((e.name, g)),
                _ => None,
            })
            .collect()
    } else {
        (0..family.count)
            .map(|i| (format!("#{i}"), family.hypergraph(i)))
            .collect()
    }
}

/// One instance's contribution to one report.
struct Outcome {
    report: usize,
    ratio: Option<f64>,
    violation: Option<String>,
}

/// Evaluates instances in parallel and folds outcomes in instance order.
fn run_instances<T, F>(mut reports: Vec<CheckReport>, items: &[(String, T)], eval: F) -> Result<Vec<CheckReport>>
where
    T: Sync,
    F: Fn(&str, &T) -> Result<Vec<Outcome>> + Sync,
{
    let outcomes = items
        .par_iter()
        .map(|(label, item)| eval(label, item))
        .collect::<Result<Vec<_>>>()?;
    for outcome in outcomes.into_iter().flatten() {
        reports[outcome.report].record(outcome.ratio, outcome.violation);
    }
    Ok(reports)
}

/// `cut <= linf <= 2^d cut` for every array, and for matrices also
/// `cut <= ||A: l_inf -> l_1|| <= 4 cut` with the operator norm equal to `linf`.
///
/// Ratio: `linf / cut`.
pub fn check_sandwich(
    family: &InstanceFamily,
    constants: &ConstantsTable,
    budget: Budget,
) -> Result<Vec<CheckReport>> {
    let items = tensors(family, Suite::Sandwich);
    run_instances(
        vec![CheckReport::new("sandwich", Mode::Hard)],
        &items,
        |label, a| {
            let d = a.order();
            let cut = cut_norm(a, budget)?.value;
            let linf = linf_multiple(a, budget)?.value;
            let mut problems = Vec::new();
            if !le_tol(cut, linf) {
                problems.push(format!("cut {cut} > linf {linf}"));
            }
            let factor = constants.multi_sandwich(d);
            if !le_tol(linf, factor * cut) {
                problems.push(format!("linf {linf} > {factor} * cut {cut}"));
            }
            if d == 2 {
                let op = opnorm_inf_to_1(a, budget)?.value;
                if !le_tol(cut, op) {
                    problems.push(format!("cut {cut} > opnorm {op}"));
                }
                let factor = constants.alon_naor();
                if !le_tol(op, factor * cut) {
                    problems.push(format!("opnorm {op} > {factor} * cut {cut}"));
                }
                if !(le_tol(op, linf) && le_tol(linf, op)) {
                    problems.push(format!("opnorm {op} != linf {linf}"));
                }
            }
            let violation = (!problems.is_empty())
                .then(|| format!("{label} {}: {}", describe_tensor(a), problems.join("; ")));
            Ok(vec![Outcome {
                report: 0,
                ratio: Some(ratio(linf, cut)),
                violation,
            }])
        },
    )
}

/// Order 2: `linf(A) >= max(M_1, M_2) / sqrt(2)` on arrays and
/// `linf_chaos(a) >= max(M_1, M_2) / (16 sqrt(2))` on second-order chaos.
/// Order 3 and up: the ratios `linf / max_k M_k` are reported only.
///
/// Ratios: quantity / bound (report-only: quantity / max_k M_k).
pub fn check_lower_bounds(
    family: &InstanceFamily,
    constants: &ConstantsTable,
    budget: Budget,
) -> Result<Vec<CheckReport>> {
    let tensor_items: Vec<_> = tensors(family, Suite::LowerBounds);
    let simplex_items: Vec<_> = simplices(family, Suite::LowerBounds);

    let mut out = Vec::new();
    let tensor_reports = vec![
        CheckReport::new("lower-bounds/array", Mode::Hard),
        CheckReport::new("lower-bounds/array-higher-order", Mode::Report),
    ];
    out.extend(run_instances(tensor_reports, &tensor_items, |label, a| {
        let linf = linf_multiple(a, budget)?.value;
        let m = mixed_norm_profile(a).max();
        if a.order() == 2 {
            let bound = constants.szarek() * m;
            let violation = (!le_tol(bound, linf)).then(|| {
                format!("{label} {}: linf {linf} < {bound}", describe_tensor(a))
            });
            Ok(vec![Outcome { report: 0, ratio: Some(ratio(linf, bound)), violation }])
        } else {
            Ok(vec![Outcome { report: 1, ratio: Some(ratio(linf, m)), violation: None }])
        }
    })?);

    let simplex_reports = vec![
        CheckReport::new("lower-bounds/chaos", Mode::Hard),
        CheckReport::new("lower-bounds/chaos-higher-order", Mode::Report),
    ];
    out.extend(run_instances(simplex_reports, &simplex_items, |label, a| {
        let chaos = linf_chaos(a, budget)?.value;
        let m = mixed_norm_profile_simplex(a).max();
        if a.d() == 2 {
            let bound = constants.chaos_lower_2() * m;
            let violation = (!le_tol(bound, chaos)).then(|| {
                format!("{label} {}: chaos {chaos} < {bound}", describe_simplex(a))
            });
            Ok(vec![Outcome { report: 0, ratio: Some(ratio(chaos, bound)), violation }])
        } else {
            Ok(vec![Outcome { report: 1, ratio: Some(ratio(chaos, m)), violation: None }])
        }
    })?);
    Ok(out.into_iter().filter(|r| r.instances > 0).collect())
}

/// `linf_chaos(a) <= linf(decouple(a)) <= C_d(2) linf_chaos(a)`.
///
/// Ratio: decoupled / chaos.
pub fn check_decoupling(
    family: &InstanceFamily,
    constants: &ConstantsTable,
    budget: Budget,
) -> Result<Vec<CheckReport>> {
    let items = simplices(family, Suite::Decoupling);
    run_instances(
        vec![CheckReport::new("decoupling", Mode::Hard)],
        &items,
        |label, a| {
            let chaos = linf_chaos(a, budget)?.value;
            let decoupled = linf_multiple(&decouple(a), budget)?.value;
            let c = constants.decoupling(a.d());
            let mut problems = Vec::new();
            if !le_tol(chaos, decoupled) {
                problems.push(format!("chaos {chaos} > decoupled {decoupled}"));
            }
            if !le_tol(decoupled, c * chaos) {
                problems.push(format!("decoupled {decoupled} > {c} * chaos {chaos}"));
            }
            let violation = (!problems.is_empty())
                .then(|| format!("{label} {}: {}", describe_simplex(a), problems.join("; ")));
            Ok(vec![Outcome { report: 0, ratio: Some(ratio(decoupled, chaos)), violation }])
        },
    )
}

/// Mean, minimum and sample count of `linf` over sign patterns of `a`.
struct PatternStats {
    mean: f64,
    min: f64,
    stderr: f64,
    exact: bool,
}

fn pattern_stats(a: &CoeffTensor, seed: u64, index: u64, budget: Budget) -> Result<PatternStats> {
    let cells = a.len();
    let leading: usize = a.dims()[..a.order() - 1].iter().sum();
    let exact = cells <= 20 && budget.admit(1, (cells + leading) as u32).is_ok();
    if exact {
        let mut sum = 0.0;
        let mut min = f64::INFINITY;
        for mask in 0..1u64 << cells {
            let v = linf_multiple(&a.hadamard_signs(&SignPattern::from_mask(mask, cells))?, budget)?.value;
            sum += v;
            min = min.min(v);
        }
        return Ok(PatternStats {
            mean: sum / (1u64 << cells) as f64,
            min,
            stderr: 0.0,
            exact: true,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let mut samples = Vec::with_capacity(RUC_MC_TRIALS as usize);
    for _ in 0..RUC_MC_TRIALS {
        let signs = (0..cells).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
        let pattern = SignPattern::new(signs)?;
        samples.push(linf_multiple(&a.hadamard_signs(&pattern)?, budget)?.value);
    }
    let count = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / count;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (count - 1.0);
    Ok(PatternStats {
        mean,
        min: samples.iter().copied().fold(f64::INFINITY, f64::min),
        stderr: (var / count).sqrt(),
        exact: false,
    })
}

/// `E_theta linf(theta o A) <= sum_k 2^(d-k) M_k`, exact over all sign patterns
/// when the budget allows, else by seeded sampling (statistical report:
/// `mean + 3 stderr <= bound`). For order 2 also
/// `min_theta linf(theta o A) >= max(M_1, M_2) / sqrt(2)` on exact instances.
///
/// Ratios: mean / bound, and minimum / lower bound.
pub fn check_ruc_upper(
    family: &InstanceFamily,
    constants: &ConstantsTable,
    budget: Budget,
) -> Result<Vec<CheckReport>> {
    let items = tensors(family, Suite::RucUpper);
    let indexed: Vec<(String, (usize, CoeffTensor))> = items
        .into_iter()
        .enumerate()
        .map(|(i, (label, t))| (label, (i, t)))
        .collect();
    let reports = vec![
        CheckReport::new("ruc-upper", Mode::Hard),
        CheckReport::new("ruc-upper/min-lower", Mode::Hard),
        CheckReport::new("ruc-upper", Mode::Statistical),
    ];
    let out = run_instances(reports, &indexed, |label, (index, a)| {
        let d = a.order();
        let profile = mixed_norm_profile(a);
        let bound: f64 = profile
            .m()
            .iter()
            .enumerate()
            .map(|(k, m)| constants.ruc_upper_coeff(k + 1, d) * m)
            .sum();
        let stats = pattern_stats(a, family.seed, *index as u64, budget)?;
        let mut outcomes = Vec::new();
        if stats.exact {
            let violation = (!le_tol(stats.mean, bound)).then(|| {
                format!("{label} {}: mean {} > bound {bound}", describe_tensor(a), stats.mean)
            });
            outcomes.push(Outcome { report: 0, ratio: Some(ratio(stats.mean, bound)), violation });
            if d == 2 {
                let lower = constants.szarek() * profile.max();
                let violation = (!le_tol(lower, stats.min)).then(|| {
                    format!("{label} {}: min {} < {lower}", describe_tensor(a), stats.min)
                });
                outcomes.push(Outcome { report: 1, ratio: Some(ratio(stats.min, lower)), violation });
            }
        } else {
            let upper = stats.mean + 3.0 * stats.stderr;
            let violation = (!le_tol(upper, bound)).then(|| {
                format!("{label} {}: mean + 3 se {upper} > bound {bound}", describe_tensor(a))
            });
            outcomes.push(Outcome { report: 2, ratio: Some(ratio(stats.mean, bound)), violation });
        }
        Ok(outcomes)
    })?;
    Ok(out.into_iter().filter(|r| r.instances > 0).collect())
}

/// `||a||_2 / sqrt(2) <= L_1` and `L_p <= sqrt(p) ||a||_2` for each `p`.
///
/// Ratios: `L_1 / ||a||_2` and `L_p / (sqrt(p) ||a||_2)`.
pub fn check_khintchine(
    family: &InstanceFamily,
    p_list: &[f64],
    constants: &ConstantsTable,
    budget: Budget,
) -> Result<Vec<CheckReport>> {
    if let Some(p) = p_list.iter().find(|&&p| !(p >= 1.0 && p.is_finite())) {
        return Err(Error::Domain(format!("p must be a finite real >= 1, got {p}")));
    }
    let items = vectors(family, Suite::Khintchine);
    let reports = vec![
        CheckReport::new("khintchine/szarek-lower", Mode::Hard),
        CheckReport::new("khintchine/upper", Mode::Hard),
    ];
    run_instances(reports, &items, |label, a| {
        let l2 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let l1 = lp_rademacher_exact(a, 1.0, budget)?;
        let lower = constants.szarek() * l2;
        let mut outcomes = vec![Outcome {
            report: 0,
            ratio: Some(ratio(l1, l2)),
            violation: (!le_tol(lower, l1)).then(|| format!("{label} {a:?}: L1 {l1} < {lower}")),
        }];
        for &p in p_list {
            let lp = lp_rademacher_exact(a, p, budget)?;
            let upper = constants.khintchine(p) * l2;
            outcomes.push(Outcome {
                report: 1,
                ratio: Some(ratio(lp, p.sqrt() * l2)),
                violation: (!le_tol(lp, upper))
                    .then(|| format!("{label} {a:?}: L{p} {lp} > {upper}")),
            });
        }
        Ok(outcomes)
    })
    .map(|mut reports| {
        // one "instance" per vector in the upper report, not one per p
        if !p_list.is_empty() {
            reports[1].instances /= p_list.len();
        }
        reports
    })
}

/// Exact discrepancy and expected discrepancy against the balance functional.
///
/// Asserts `disc <= E_theta disc` per instance and a spread of at most
/// [`STABILITY_CAP`] in each ratio across the family.
pub fn equivalence_report(family: &InstanceFamily, budget: Budget) -> Result<Vec<CheckReport>> {
    let items = hypergraphs(family, Suite::Equivalence);
    equivalence_over(&items, budget)
}

/// [`equivalence_report`] over an explicit list of hypergraphs.
pub fn equivalence_report_for(graphs: &[WeightedHypergraph], budget: Budget) -> Result<Vec<CheckReport>> {
    let items: Vec<(String, WeightedHypergraph)> = graphs
        .iter()
        .enumerate()
        .map(|(i, g)| (format!("#{i}"), g.clone()))
        .collect();
    equivalence_over(&items, budget)
}

fn equivalence_over(items: &[(String, WeightedHypergraph)], budget: Budget) -> Result<Vec<CheckReport>> {
    let reports = vec![
        CheckReport::new("equivalence/disc-over-balance", Mode::Hard),
        CheckReport::new("equivalence/expected-over-balance", Mode::Hard),
    ];
    let mut reports = run_instances(reports, items, |label, h| {
        let disc = disc_exact(h, budget)?.value;
        let expected = expected_disc_exact(h, budget)?.value;
        let b = balance(h);
        let chain = (!le_tol(disc, expected))
            .then(|| format!("{label} (n={}, d={}): disc {disc} > expected {expected}", h.n(), h.d()));
        let r = |x: f64| (b > 0.0).then(|| x / b);
        Ok(vec![
            Outcome { report: 0, ratio: r(disc), violation: chain },
            Outcome { report: 1, ratio: r(expected), violation: None },
        ])
    })?;
    for report in &mut reports {
        if let (Some(lo), Some(hi)) = (report.min_ratio, report.max_ratio) {
            if hi > STABILITY_CAP * lo {
                report.flag(format!("ratio spread {hi} / {lo} exceeds {STABILITY_CAP}"));
            }
        }
    }
    Ok(reports)
}

/// Runs one suite over the three random kinds and the extremal catalog, merging
/// reports of the same name.
#[allow(clippy::too_many_arguments)]
pub fn run_suite(
    suite: Suite,
    order: usize,
    extents: (usize, usize),
    count: usize,
    seed: u64,
    p_list: &[f64],
    constants: &ConstantsTable,
    budget: Budget,
) -> Result<Vec<CheckReport>> {
    let mut families: Vec<InstanceFamily> = FamilyKind::RANDOM
        .iter()
        .map(|&kind| InstanceFamily::new(kind, order, extents, count, seed))
        .collect();
    families.push(InstanceFamily::extremal());
    let mut all = Vec::new();
    for family in &families {
        all.extend(run_on_family(suite, family, p_list, constants, budget)?);
    }
    Ok(merge_reports(all))
}

pub(crate) fn run_on_family(
    suite: Suite,
    family: &InstanceFamily,
    p_list: &[f64],
    constants: &ConstantsTable,
    budget: Budget,
) -> Result<Vec<CheckReport>> {
    match suite {
        Suite::Sandwich => check_sandwich(family, constants, budget),
        Suite::LowerBounds => check_lower_bounds(family, constants, budget),
        Suite::Decoupling => check_decoupling(family, constants, budget),
        Suite::RucUpper => check_ruc_upper(family, constants, budget),
        Suite::Khintchine => check_khintchine(family, p_list, constants, budget),
        Suite::Equivalence => equivalence_report(family, budget),
    }
}

/// Result of rerunning a suite on the extremal catalog with one constant tightened.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetaOutcome {
    pub constant: ConstantId,
    pub suite: Suite,
    pub baseline_pass: bool,
    pub tightened_pass: bool,
    /// The harness detects the change: it passes as is and fails when tightened.
    pub detected: bool,
}

/// Tightens `constant` by `fraction` and reruns `suite` on the catalog.
pub fn meta_check(constant: ConstantId, suite: Suite, fraction: f64, budget: Budget) -> Result<MetaOutcome> {
    let family = InstanceFamily::extremal();
    let hard_pass = |reports: &[CheckReport]| reports.iter().all(|r| !r.fails_hard());
    let baseline = run_on_family(suite, &family, &DEFAULT_P_LIST, &ConstantsTable::default(), budget)?;
    let tightened_table = ConstantsTable::default().tightened(constant, fraction);
    let tightened = run_on_family(suite, &family, &DEFAULT_P_LIST, &tightened_table, budget)?;
    let baseline_pass = hard_pass(&baseline);
    let tightened_pass = hard_pass(&tightened);
    Ok(MetaOutcome {
        constant,
        suite,
        baseline_pass,
        tightened_pass,
        detected: baseline_pass && !tightened_pass,
    })
}
