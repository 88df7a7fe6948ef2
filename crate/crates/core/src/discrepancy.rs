//! Discrepancy of edge-weighted uniform hypergraphs.
//!
//! `disc(h, theta) = max over V' of |sum of theta(e) w(e) over edges inside V'|`,
//! and `disc(h)` is its minimum over all colorings `theta`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::enumerate::{gray, gray_chunks, Best, Budget};
use crate::error::{Error, Result};
use crate::model::{chaos_coeffs, Coloring, WeightedHypergraph};
use crate::norms::cut_norm_star;

#[derive(Clone, Debug, PartialEq)]
pub struct DiscResult {
    /// The discrepancy (exact modes) or the sample mean (Monte-Carlo).
    pub value: f64,
    /// Achieving coloring for `disc_exact`, the evaluated one for
    /// `disc_for_coloring`, the best sampled one for Monte-Carlo.
    pub coloring: Option<Coloring>,
    /// Vertex subset attaining the inner maximum for `coloring`.
    pub witness_subset: Option<u64>,
    /// Smallest per-coloring discrepancy seen (Monte-Carlo only).
    pub best: Option<f64>,
    pub stderr: Option<f64>,
    pub trials: Option<u64>,
}

impl DiscResult {
    fn exact(value: f64, coloring: Option<Coloring>, witness_subset: Option<u64>) -> Self {
        DiscResult {
            value,
            coloring,
            witness_subset,
            best: None,
            stderr: None,
            trials: None,
        }
    }
}

/// Hex mask of a coloring, bit `e` set when edge `e` is colored +1.
pub fn coloring_hex(c: &Coloring) -> String {
    if c.is_empty() {
        return "0x0".to_string();
    }
    let nibbles: Vec<char> = c
        .signs()
        .chunks(4)
        .map(|chunk| {
            let v = chunk
                .iter()
                .enumerate()
                .fold(0u32, |acc, (b, &s)| acc | u32::from(s == 1) << b);
            std::char::from_digit(v, 16).unwrap()
        })
        .collect();
    let digits: String = nibbles.iter().rev().collect();
    let trimmed = digits.trim_start_matches('0');
    format!("0x{}", if trimmed.is_empty() { "0" } else { trimmed })
}

/// Inverse of [`coloring_hex`] for a hypergraph with `len` edges.
pub fn coloring_from_hex(hex: &str, len: usize) -> Result<Coloring> {
    let digits = hex
        .strip_prefix("0x")
        .or_else(|| hex.strip_prefix("0X"))
        .unwrap_or(hex);
    if digits.is_empty() {
        return Err(Error::Domain(format!("empty coloring mask {hex:?}")));
    }
    let mut signs = vec![-1i8; len];
    for (pos, c) in digits.chars().rev().enumerate() {
        let v = c
            .to_digit(16)
            .ok_or_else(|| Error::Domain(format!("invalid hex digit {c:?} in {hex:?}")))?;
        for b in 0..4 {
            if v >> b & 1 == 1 {
                let e = 4 * pos + b;
                if e >= len {
                    return Err(Error::Shape(format!(
                        "coloring mask {hex} sets edge {e} but there are {len} edges"
                    )));
                }
                signs[e] = 1;
            }
        }
    }
    Coloring::new(signs)
}

impl Serialize for DiscResult {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("DiscResult", 6)?;
        st.serialize_field("value", &self.value)?;
        st.serialize_field("coloring", &self.coloring.as_ref().map(coloring_hex))?;
        st.serialize_field(
            "witness_subset",
            &self.witness_subset.map(|m| format!("{m:#x}")),
        )?;
        if let Some(best) = self.best {
            st.serialize_field("best", &best)?;
        }
        if let Some(stderr) = self.stderr {
            st.serialize_field("stderr", &stderr)?;
        }
        if let Some(trials) = self.trials {
            st.serialize_field("trials", &trials)?;
        }
        st.end()
    }
}

/// Discrepancy of `h` under one coloring, with the maximizing vertex subset.
pub fn disc_for_coloring(
    h: &WeightedHypergraph,
    coloring: &Coloring,
    budget: Budget,
) -> Result<DiscResult> {
    let adjusted = h.sign_adjusted(coloring)?;
    let r = cut_norm_star(&chaos_coeffs(&adjusted), budget)?;
    Ok(DiscResult::exact(
        r.value,
        Some(coloring.clone()),
        r.witness.get("I"),
    ))
}

/// Running statistics of per-coloring discrepancies over a coloring walk.
#[derive(Clone, Copy, Debug)]
struct WalkStats {
    lowest: Best,
    sum: f64,
    highest: f64,
}

/// Subset-sum table over the vertices that touch at least one edge.
struct SubsetTable {
    edge_masks: Vec<u64>,
    weights: Vec<f64>,
    width: u32,
}

impl SubsetTable {
    fn new(h: &WeightedHypergraph) -> Result<Self> {
        let mut active: Vec<usize> = h
            .edges()
            .iter()
            .flat_map(|e| e.vertices.iter().copied())
            .collect();
        active.sort_unstable();
        active.dedup();
        if active.len() > 26 {
            return Err(Error::Domain(format!(
                "{} active vertices is too many for a subset table",
                active.len()
            )));
        }
        let rank = |v: usize| active.binary_search(&v).unwrap();
        let edge_masks = h
            .edges()
            .iter()
            .map(|e| e.vertices.iter().fold(0u64, |m, &v| m | 1 << rank(v)))
            .collect();
        Ok(SubsetTable {
            edge_masks,
            weights: h.edges().iter().map(|e| e.weight).collect(),
            width: active.len() as u32,
        })
    }

    /// `table[S]` = signed weight of the edges inside `S`, for the coloring `mask`.
    fn fill(&self, mask: u64, table: &mut [f64]) {
        table.iter_mut().for_each(|t| *t = 0.0);
        for (e, (&em, &w)) in self.edge_masks.iter().zip(&self.weights).enumerate() {
            table[em as usize] += if mask >> e & 1 == 1 { w } else { -w };
        }
        for b in 0..self.width {
            let bit = 1usize << b;
            for s in 0..table.len() {
                if s & bit != 0 {
                    table[s] += table[s ^ bit];
                }
            }
        }
    }

    fn add_to_supersets(&self, edge: usize, delta: f64, table: &mut [f64]) {
        let em = self.edge_masks[edge];
        let full = (1u64 << self.width) - 1;
        let comp = full & !em;
        let mut sub = comp;
        loop {
            table[(em | sub) as usize] += delta;
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & comp;
        }
    }
}

fn max_abs(table: &[f64]) -> f64 {
    table.iter().fold(0.0, |m, &t| f64::max(m, t.abs()))
}

/// Walks all colorings with edge 0 fixed to +1 in Gray-code order.
fn coloring_walk(h: &WeightedHypergraph) -> Result<WalkStats> {
    let m = h.edge_count();
    let table = SubsetTable::new(h)?;
    let free = (m - 1) as u32;
    let parts = gray_chunks(free, |start, end| {
        let mut buf = vec![0.0; 1usize << table.width];
        let mut code = gray(start);
        table.fill(code << 1 | 1, &mut buf);
        let mut stats = WalkStats {
            lowest: Best::new(),
            sum: 0.0,
            highest: 0.0,
        };
        let record = |code: u64, buf: &[f64], stats: &mut WalkStats| {
            let v = max_abs(buf);
            stats.lowest.offer(-v, code << 1 | 1);
            stats.sum += v;
            stats.highest = stats.highest.max(v);
        };
        record(code, &buf, &mut stats);
        for i in start + 1..end {
            let bit = i.trailing_zeros();
            let edge = bit as usize + 1;
            let old = if code >> bit & 1 == 1 { 1.0 } else { -1.0 };
            table.add_to_supersets(edge, -2.0 * old * table.weights[edge], &mut buf);
            code ^= 1u64 << bit;
            record(code, &buf, &mut stats);
        }
        stats
    });
    Ok(parts.into_iter().fold(
        WalkStats {
            lowest: Best::new(),
            sum: 0.0,
            highest: 0.0,
        },
        |acc, p| WalkStats {
            lowest: acc.lowest.merge(p.lowest),
            sum: acc.sum + p.sum,
            highest: acc.highest.max(p.highest),
        },
    ))
}

fn check_vertex_budget(h: &WeightedHypergraph, log2_colorings: u32, budget: Budget) -> Result<()> {
    if h.n() > 63 {
        return Err(Error::Domain(format!("{} vertices do not fit a 64-bit mask", h.n())));
    }
    budget.admit(1, log2_colorings + h.n() as u32)
}

/// Exact discrepancy: minimum of [`disc_for_coloring`] over all colorings.
///
/// The coloring reported has edge 0 colored +1; among equally good colorings
/// it is the one with the smallest mask.
pub fn disc_exact(h: &WeightedHypergraph, budget: Budget) -> Result<DiscResult> {
    let m = h.edge_count();
    if m == 0 {
        return Ok(DiscResult::exact(0.0, Some(Coloring::all_plus(0)), Some(0)));
    }
    check_vertex_budget(h, (m - 1) as u32, budget)?;
    let stats = coloring_walk(h)?;
    let coloring = Coloring::from_mask(stats.lowest.mask, m);
    disc_for_coloring(h, &coloring, budget)
}

/// Exact mean of `disc(h, theta)` over uniformly random colorings.
pub fn expected_disc_exact(h: &WeightedHypergraph, budget: Budget) -> Result<DiscResult> {
    Ok(DiscResult::exact(coloring_profile(h, budget)?.mean, None, None))
}

/// Minimum, mean and maximum of `disc(h, theta)` over all colorings.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ColoringProfile {
    pub min: f64,
    pub mean: f64,
    pub max: f64,
}

/// One pass over all colorings giving min, mean and max together.
///
/// Needs the same budget as [`expected_disc_exact`].
pub fn coloring_profile(h: &WeightedHypergraph, budget: Budget) -> Result<ColoringProfile> {
    let m = h.edge_count();
    if m == 0 {
        return Ok(ColoringProfile {
            min: 0.0,
            mean: 0.0,
            max: 0.0,
        });
    }
    check_vertex_budget(h, m as u32, budget)?;
    // disc(h, theta) = disc(h, -theta), so the half with edge 0 at +1 suffices
    let stats = coloring_walk(h)?;
    Ok(ColoringProfile {
        min: -stats.lowest.value,
        mean: stats.sum / (1u64 << (m - 1)) as f64,
        max: stats.highest,
    })
}

/// The coloring used by Monte-Carlo trial `trial` under `seed`.
pub fn sample_coloring(h: &WeightedHypergraph, seed: u64, trial: u64) -> Coloring {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    let signs = (0..h.edge_count())
        .map(|_| if rng.random::<bool>() { 1 } else { -1 })
        .collect();
    Coloring::new(signs).expect("signs are +-1")
}

/// Monte-Carlo estimate of the expected discrepancy over random colorings.
///
/// Also reports the smallest discrepancy among the sampled colorings, an upper
/// bound on [`disc_exact`]. Trial `t` depends only on `(seed, t)`.
pub fn disc_monte_carlo(
    h: &WeightedHypergraph,
    trials: u64,
    seed: u64,
    budget: Budget,
) -> Result<DiscResult> {
    if trials == 0 {
        return Err(Error::Domain("at least one trial is required".into()));
    }
    if h.n() > 63 {
        return Err(Error::Domain(format!("{} vertices do not fit a 64-bit mask", h.n())));
    }
    budget.admit_pow2(h.n() as u32)?;
    let samples = (0..trials)
        .into_par_iter()
        .map(|t| disc_for_coloring(h, &sample_coloring(h, seed, t), budget).map(|r| r.value))
        .collect::<Result<Vec<f64>>>()?;

    let count = trials as f64;
    let mean = samples.iter().sum::<f64>() / count;
    let stderr = if trials > 1 {
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (count - 1.0);
        (var / count).sqrt()
    } else {
        0.0
    };
    let (best_trial, best) = samples
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bt, bv), (t, &v)| {
            if v < bv {
                (t, v)
            } else {
                (bt, bv)
            }
        });
    let best_coloring = sample_coloring(h, seed, best_trial as u64);
    let witness = disc_for_coloring(h, &best_coloring, budget)?.witness_subset;
    Ok(DiscResult {
        value: mean,
        coloring: Some(best_coloring),
        witness_subset: witness,
        best: Some(best),
        stderr: Some(stderr),
        trials: Some(trials),
    })
}

/// `sum over vertices v of sqrt(sum of w(e)^2 over edges e containing v)`.
pub fn balance(h: &WeightedHypergraph) -> f64 {
    vertex_energies(h).iter().map(|s| s.sqrt()).sum()
}

/// Two-block form `max(sum over v < left, sum over v >= left)` for a
/// bipartite graph whose first block is `0..left`.
pub fn bipartite_balance(h: &WeightedHypergraph, left: usize) -> f64 {
    let per_vertex: Vec<f64> = vertex_energies(h).iter().map(|s| s.sqrt()).collect();
    let split = left.min(per_vertex.len());
    let l: f64 = per_vertex[..split].iter().sum();
    let r: f64 = per_vertex[split..].iter().sum();
    l.max(r)
}

fn vertex_energies(h: &WeightedHypergraph) -> Vec<f64> {
    let mut energy = vec![0.0; h.n()];
    for e in h.edges() {
        for &v in &e.vertices {
            energy[v] += e.weight * e.weight;
        }
    }
    energy
}
