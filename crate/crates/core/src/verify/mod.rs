//! Inequality suites run over generated and catalogued instances.
//!
//! Every suite is a pure function of its [`InstanceFamily`] (kind, extents,
//! count, seed) and of the [`ConstantsTable`] it asserts against. Instances
//! are evaluated in parallel and folded in index order, so reports are
//! identical for any worker count.

mod catalog;
mod scan;
mod suites;

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::model::{build_complete_with, CoeffTensor, SimplexCoeffs, WeightedHypergraph};

pub use catalog::{catalog, CatalogEntry, CatalogObject};
pub use scan::{scaling_scan, ScanRow, ScanTable};
pub use suites::{
    check_decoupling, check_khintchine, check_lower_bounds, check_ruc_upper, check_sandwich,
    equivalence_report, equivalence_report_for, meta_check, run_suite, MetaOutcome, Suite,
    DEFAULT_P_LIST,
};

/// Relative tolerance for hard assertions.
pub const TOLERANCE: f64 = 1e-9;

/// Cap on `max_ratio / min_ratio` in the equivalence reports.
///
/// Regression guard for this crate only; it is not a bound from the theory.
pub const STABILITY_CAP: f64 = 64.0;

/// `a <= b` up to the relative tolerance.
pub fn le_tol(a: f64, b: f64) -> bool {
    a <= b + TOLERANCE * a.abs().max(b.abs())
}

/// Identifies one of the explicit constants asserted by the suites.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstantId {
    /// `4` in `cut <= ||A: l_inf -> l_1|| <= 4 cut`.
    AlonNaor,
    /// `2^d` in `cut <= linf <= 2^d cut`.
    MultiSandwich,
    /// `1/sqrt(2)` lower constant for `L_1` of Rademacher sums.
    Szarek,
    /// `1/(16 sqrt(2))` lower constant for second-order chaos.
    ChaosLower,
    /// `sqrt(p)` upper constant for `L_p` of Rademacher sums.
    Khintchine,
    /// `C_d(2) = 2^(2d-2) (d-1)!` decoupling constant.
    Decoupling,
    /// `2^(d-k)` weights in the averaged upper bound.
    RucUpper,
}

impl ConstantId {
    pub const ALL: [ConstantId; 7] = [
        ConstantId::AlonNaor,
        ConstantId::MultiSandwich,
        ConstantId::Szarek,
        ConstantId::ChaosLower,
        ConstantId::Khintchine,
        ConstantId::Decoupling,
        ConstantId::RucUpper,
    ];

    /// Lower-bound constants multiply the smaller side of their inequality.
    pub fn is_lower(self) -> bool {
        matches!(self, ConstantId::Szarek | ConstantId::ChaosLower)
    }
}

impl fmt::Display for ConstantId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).unwrap();
        write!(f, "{}", s.as_str().unwrap())
    }
}

/// The explicit constants, each with an optional multiplier for meta-testing.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConstantsTable {
    scale: BTreeMap<ConstantId, f64>,
}

impl ConstantsTable {
    /// The same table with one constant made `fraction` tighter: upper-bound
    /// constants shrink by that fraction, lower-bound constants grow by it.
    pub fn tightened(&self, id: ConstantId, fraction: f64) -> Self {
        let factor = if id.is_lower() {
            1.0 + fraction
        } else {
            1.0 - fraction
        };
        let mut out = self.clone();
        *out.scale.entry(id).or_insert(1.0) *= factor;
        out
    }

    fn s(&self, id: ConstantId) -> f64 {
        self.scale.get(&id).copied().unwrap_or(1.0)
    }

    pub fn alon_naor(&self) -> f64 {
        4.0 * self.s(ConstantId::AlonNaor)
    }

    pub fn multi_sandwich(&self, d: usize) -> f64 {
        2f64.powi(d as i32) * self.s(ConstantId::MultiSandwich)
    }

    pub fn szarek(&self) -> f64 {
        std::f64::consts::FRAC_1_SQRT_2 * self.s(ConstantId::Szarek)
    }

    pub fn chaos_lower_2(&self) -> f64 {
        1.0 / (16.0 * std::f64::consts::SQRT_2) * self.s(ConstantId::ChaosLower)
    }

    pub fn khintchine(&self, p: f64) -> f64 {
        p.sqrt() * self.s(ConstantId::Khintchine)
    }

    /// `C_d(2) = 2^(2d-2) (d-1)!`.
    pub fn decoupling(&self, d: usize) -> f64 {
        let factorial: f64 = (1..d).map(|k| k as f64).product();
        2f64.powi(2 * d as i32 - 2) * factorial * self.s(ConstantId::Decoupling)
    }

    /// `C_2(1)`, read as `2^2 * 3`. The general product formula is ambiguous
    /// at `d = 2`; nothing asserts against this value.
    pub fn decoupling_c1_2(&self) -> f64 {
        12.0
    }

    /// Weight `2^(d-k)` of `M_k` (1-based `k`) in the averaged upper bound.
    pub fn ruc_upper_coeff(&self, k: usize, d: usize) -> f64 {
        2f64.powi((d - k) as i32) * self.s(ConstantId::RucUpper)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    /// Standard normal entries.
    RandomGaussian,
    /// Uniform ±1 entries.
    RandomSign,
    /// Standard normal entries kept with probability 1/10, zero otherwise.
    RandomSparse,
    /// The pinned catalog of bound-attaining instances.
    ExtremalCatalog,
}

impl FamilyKind {
    pub const RANDOM: [FamilyKind; 3] = [
        FamilyKind::RandomGaussian,
        FamilyKind::RandomSign,
        FamilyKind::RandomSparse,
    ];

    fn stream_tag(self) -> u64 {
        match self {
            FamilyKind::RandomGaussian => 1,
            FamilyKind::RandomSign => 2,
            FamilyKind::RandomSparse => 3,
            FamilyKind::ExtremalCatalog => 4,
        }
    }
}

/// Generated instances: `count` objects whose extents are drawn uniformly
/// from `min_extent..=max_extent`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InstanceFamily {
    pub kind: FamilyKind,
    pub order: usize,
    pub min_extent: usize,
    pub max_extent: usize,
    pub count: usize,
    pub seed: u64,
}

impl InstanceFamily {
    pub fn new(kind: FamilyKind, order: usize, extents: (usize, usize), count: usize, seed: u64) -> Self {
        InstanceFamily {
            kind,
            order,
            min_extent: extents.0.max(1),
            max_extent: extents.1.max(extents.0.max(1)),
            count,
            seed,
        }
    }

    pub fn extremal() -> Self {
        InstanceFamily::new(FamilyKind::ExtremalCatalog, 2, (1, 1), 0, 0)
    }

    pub(crate) fn rng(&self, index: usize, object: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.kind.stream_tag() << 56 | object << 48 | index as u64);
        rng
    }

    fn entry(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self.kind {
            FamilyKind::RandomSign => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            FamilyKind::RandomSparse => {
                let keep = rng.random::<f64>() < 0.1;
                let g: f64 = rng.sample(StandardNormal);
                if keep {
                    g
                } else {
                    0.0
                }
            }
            FamilyKind::RandomGaussian | FamilyKind::ExtremalCatalog => rng.sample(StandardNormal),
        }
    }

    fn extent(&self, rng: &mut ChaCha8Rng, floor: usize) -> usize {
        let lo = self.min_extent.max(floor);
        let hi = self.max_extent.max(lo);
        rng.random_range(lo..=hi)
    }

    /// Instance `index` as an array of order `self.order`.
    pub fn tensor(&self, index: usize) -> CoeffTensor {
        let mut rng = self.rng(index, 1);
        let dims: Vec<usize> = (0..self.order.max(1)).map(|_| self.extent(&mut rng, 1)).collect();
        let len = dims.iter().product();
        let values = (0..len).map(|_| self.entry(&mut rng)).collect();
        CoeffTensor::new(dims, values).expect("generated tensor is valid")
    }

    /// Instance `index` as chaos coefficients of order `self.order` (at least 2).
    pub fn simplex(&self, index: usize) -> SimplexCoeffs {
        let d = self.order.max(2);
        let mut rng = self.rng(index, 2);
        let n = self.extent(&mut rng, d);
        let entries: Vec<(Vec<usize>, f64)> = itertools::Itertools::combinations(1..=n, d)
            .map(|key| {
                let v = self.entry(&mut rng);
                (key, v)
            })
            .collect();
        SimplexCoeffs::from_entries(d, n, entries).expect("generated coefficients are valid")
    }

    /// Instance `index` as a coefficient vector.
    pub fn vector(&self, index: usize) -> Vec<f64> {
        let mut rng = self.rng(index, 3);
        let k = self.extent(&mut rng, 1);
        (0..k).map(|_| self.entry(&mut rng)).collect()
    }

    /// Instance `index` as a weighted complete hypergraph of arity `self.order`.
    pub fn hypergraph(&self, index: usize) -> WeightedHypergraph {
        let d = self.order.max(2);
        let mut rng = self.rng(index, 4);
        let n = self.extent(&mut rng, d);
        build_complete_with(n, d, |_| self.entry(&mut rng)).expect("valid arity")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Exact assertions; violations fail the run.
    Hard,
    /// Sampling-based assertions; reported, never decide pass/fail of a run.
    Statistical,
    /// Ratios only, nothing asserted.
    Report,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub instances: usize,
    pub violations: usize,
    pub min_ratio: Option<f64>,
    pub max_ratio: Option<f64>,
    pub pass: bool,
    pub mode: Mode,
    pub examples_of_violation: Vec<String>,
}

const MAX_EXAMPLES: usize = 3;

impl CheckReport {
    pub fn new(name: impl Into<String>, mode: Mode) -> Self {
        CheckReport {
            name: name.into(),
            instances: 0,
            violations: 0,
            min_ratio: None,
            max_ratio: None,
            pass: true,
            mode,
            examples_of_violation: Vec::new(),
        }
    }

    /// Records one instance with its ratio; `violation` describes a failed assertion.
    pub fn record(&mut self, ratio: Option<f64>, violation: Option<String>) {
        self.instances += 1;
        if let Some(r) = ratio {
            self.min_ratio = Some(self.min_ratio.map_or(r, |m| m.min(r)));
            self.max_ratio = Some(self.max_ratio.map_or(r, |m| m.max(r)));
        }
        if let Some(v) = violation {
            self.flag(v);
        }
    }

    /// Adds a violation not tied to a single instance.
    pub fn flag(&mut self, description: String) {
        self.violations += 1;
        self.pass = false;
        if self.examples_of_violation.len() < MAX_EXAMPLES {
            self.examples_of_violation.push(description);
        }
    }

    pub fn merge(mut self, other: &CheckReport) -> Self {
        debug_assert_eq!(self.name, other.name);
        self.instances += other.instances;
        self.violations += other.violations;
        self.min_ratio = match (self.min_ratio, other.min_ratio) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        self.max_ratio = match (self.max_ratio, other.max_ratio) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
        self.pass = self.violations == 0;
        for ex in &other.examples_of_violation {
            if self.examples_of_violation.len() < MAX_EXAMPLES {
                self.examples_of_violation.push(ex.clone());
            }
        }
        self
    }

    /// Hard reports decide pass/fail; statistical and report-only ones do not.
    pub fn fails_hard(&self) -> bool {
        self.mode == Mode::Hard && !self.pass
    }
}

/// Merges reports that share a name, keeping first-seen order.
pub fn merge_reports(reports: impl IntoIterator<Item = CheckReport>) -> Vec<CheckReport> {
    let mut merged: Vec<CheckReport> = Vec::new();
    for r in reports {
        match merged.iter_mut().find(|m| m.name == r.name && m.mode == r.mode) {
            Some(m) => *m = m.clone().merge(&r),
            None => merged.push(r),
        }
    }
    merged
}

/// `num / den`, with `0 / 0` read as 1.
pub(crate) fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        if num == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        num / den
    }
}
