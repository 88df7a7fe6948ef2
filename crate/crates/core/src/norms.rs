//! Exact norms by sign and subset enumeration.
//!
//! Every maximum is returned with a witness: the subset family or sign
//! vectors that attain it, encoded as bit-masks. For subsets bit `i` set
//! means index `i` (0-based) belongs to the set; for sign vectors bit `i`
//! set means the `i`-th sign is `+1`. The reported value is the objective
//! re-evaluated directly at the witness.
//!
//! For arrays of order `d` only the first `d - 1` index families are
//! enumerated; the last one is chosen in closed form from the slice sums
//! (positive or negative part for cut-norms, signs of the sums for the
//! multilinear form).

use std::collections::BTreeMap;

use itertools::Itertools;
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::enumerate::{gray, gray_chunks, Best, Budget};
use crate::error::{Error, Result};
use crate::model::{CoeffTensor, MixedNormProfile, SimplexCoeffs};

/// Labeled bit-masks identifying the configuration that attains a maximum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness(pub Vec<(String, u64)>);

impl Witness {
    pub fn get(&self, label: &str) -> Option<u64> {
        self.0.iter().find(|(l, _)| l == label).map(|&(_, m)| m)
    }

    pub fn masks(&self) -> Vec<u64> {
        self.0.iter().map(|&(_, m)| m).collect()
    }
}

impl Serialize for Witness {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (label, mask) in &self.0 {
            map.serialize_entry(label, &format!("{mask:#x}"))?;
        }
        map.end()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormResult {
    pub value: f64,
    pub witness: Witness,
}

#[inline]
fn sign_of(mask: u64, bits: u64) -> f64 {
    // product of the signs selected by `bits`; clear bits are -1
    if (bits & !mask).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

fn check_mask_width(width: usize) -> Result<()> {
    if width > 63 {
        Err(Error::Domain(format!(
            "{width} enumerated indices do not fit a 64-bit mask"
        )))
    } else {
        Ok(())
    }
}

/// `|sum of a over I_1 x ... x I_d|` for subset masks `sets`.
pub fn cut_objective(a: &CoeffTensor, sets: &[u64]) -> f64 {
    assert_eq!(sets.len(), a.order());
    let mut total = 0.0;
    for (flat, &v) in a.values().iter().enumerate() {
        let index = a.unflatten(flat);
        if index.iter().zip(sets).all(|(&i, &s)| s >> i & 1 == 1) {
            total += v;
        }
    }
    total.abs()
}

/// `sum of a[j] x^1[j_1] ... x^d[j_d]` for sign masks `signs`.
pub fn multilinear_objective(a: &CoeffTensor, signs: &[u64]) -> f64 {
    assert_eq!(signs.len(), a.order());
    let mut total = 0.0;
    for (flat, &v) in a.values().iter().enumerate() {
        let index = a.unflatten(flat);
        let negatives = index
            .iter()
            .zip(signs)
            .filter(|(&i, &s)| s >> i & 1 == 0)
            .count();
        total += if negatives % 2 == 0 { v } else { -v };
    }
    total
}

fn key_mask(key: &[usize]) -> u64 {
    key.iter().fold(0, |m, &j| m | 1 << (j - 1))
}

/// `|sum of a over keys contained in I|`.
pub fn star_objective(a: &SimplexCoeffs, subset: u64) -> f64 {
    a.values()
        .iter()
        .filter(|(k, _)| {
            let km = key_mask(k);
            km & subset == km
        })
        .map(|(_, v)| v)
        .sum::<f64>()
        .abs()
}

/// `sum of a[j] eps[j_1] ... eps[j_d]` for a sign mask `eps`.
pub fn chaos_objective(a: &SimplexCoeffs, eps: u64) -> f64 {
    a.values()
        .iter()
        .map(|(k, &v)| v * sign_of(eps, key_mask(k)))
        .sum()
}

/// Cells of a tensor grouped for enumeration over its leading axes.
struct SliceLayout {
    prefix: Vec<u64>,
    last: Vec<usize>,
    values: Vec<f64>,
    by_bit: Vec<Vec<u32>>,
    offsets: Vec<usize>,
    bits: u32,
    last_len: usize,
}

impl SliceLayout {
    fn new(a: &CoeffTensor) -> Result<Self> {
        let d = a.order();
        let dims = a.dims();
        let mut offsets = Vec::with_capacity(d - 1);
        let mut width = 0;
        for &n in &dims[..d - 1] {
            offsets.push(width);
            width += n;
        }
        check_mask_width(width)?;
        let mut layout = SliceLayout {
            prefix: Vec::new(),
            last: Vec::new(),
            values: Vec::new(),
            by_bit: vec![Vec::new(); width],
            offsets,
            bits: width as u32,
            last_len: dims[d - 1],
        };
        for (flat, &v) in a.values().iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let index = a.unflatten(flat);
            let prefix = index[..d - 1]
                .iter()
                .zip(&layout.offsets)
                .fold(0u64, |m, (&i, &o)| m | 1 << (o + i));
            let cell = layout.values.len() as u32;
            for b in 0..width {
                if prefix >> b & 1 == 1 {
                    layout.by_bit[b].push(cell);
                }
            }
            layout.prefix.push(prefix);
            layout.last.push(index[d - 1]);
            layout.values.push(v);
        }
        Ok(layout)
    }

    fn split(&self, mask: u64, dims: &[usize]) -> Vec<u64> {
        self.offsets
            .iter()
            .zip(dims)
            .map(|(&o, &n)| (mask >> o) & ((1u64 << n) - 1))
            .collect()
    }

    fn subset_sums(&self, mask: u64) -> Vec<f64> {
        let mut s = vec![0.0; self.last_len];
        for c in 0..self.values.len() {
            if self.prefix[c] & mask == self.prefix[c] {
                s[self.last[c]] += self.values[c];
            }
        }
        s
    }

    fn signed_sums(&self, mask: u64) -> Vec<f64> {
        let mut s = vec![0.0; self.last_len];
        for c in 0..self.values.len() {
            s[self.last[c]] += self.values[c] * sign_of(mask, self.prefix[c]);
        }
        s
    }
}

fn cut_last_axis(s: &[f64]) -> (f64, u64) {
    let pos: f64 = s.iter().filter(|&&x| x > 0.0).sum();
    let neg: f64 = -s.iter().filter(|&&x| x < 0.0).sum::<f64>();
    let pick = |keep: fn(f64) -> bool| {
        s.iter()
            .enumerate()
            .filter(|(_, &x)| keep(x))
            .fold(0u64, |m, (l, _)| m | 1 << l)
    };
    if pos >= neg {
        (pos, pick(|x| x > 0.0))
    } else {
        (neg, pick(|x| x < 0.0))
    }
}

fn abs_sum(s: &[f64]) -> f64 {
    s.iter().map(|x| x.abs()).sum()
}

fn sign_mask(s: &[f64]) -> u64 {
    s.iter()
        .enumerate()
        .filter(|(_, &x)| x >= 0.0)
        .fold(0u64, |m, (l, _)| m | 1 << l)
}

fn axis_labels(prefix: &str, d: usize) -> impl Iterator<Item = String> + '_ {
    (1..=d).map(move |k| format!("{prefix}{k}"))
}

/// Cut-norm of an array of order `d >= 2`: the largest `|sum|` over a box
/// `I_1 x ... x I_d` of index subsets (empty sets allowed).
pub fn cut_norm(a: &CoeffTensor, budget: Budget) -> Result<NormResult> {
    if a.order() < 2 {
        return Err(Error::Shape(format!(
            "cut-norm needs order >= 2, got {}",
            a.order()
        )));
    }
    check_mask_width(*a.dims().last().unwrap())?;
    let layout = SliceLayout::new(a)?;
    budget.admit_pow2(layout.bits)?;

    let parts = gray_chunks(layout.bits, |start, end| {
        let mut mask = gray(start);
        let mut s = layout.subset_sums(mask);
        let mut best = Best::new();
        best.offer(cut_last_axis(&s).0, mask);
        for i in start + 1..end {
            let bit = i.trailing_zeros();
            let flag = 1u64 << bit;
            let adding = mask & flag == 0;
            mask ^= flag;
            let full = mask | flag;
            for &c in &layout.by_bit[bit as usize] {
                let c = c as usize;
                let p = layout.prefix[c];
                if p & full == p {
                    let v = layout.values[c];
                    s[layout.last[c]] += if adding { v } else { -v };
                }
            }
            best.offer(cut_last_axis(&s).0, mask);
        }
        best
    });
    let best = Best::reduce(parts);

    let (_, last_set) = cut_last_axis(&layout.subset_sums(best.mask));
    let mut sets = layout.split(best.mask, a.dims());
    sets.push(last_set);
    Ok(NormResult {
        value: cut_objective(a, &sets),
        witness: Witness(axis_labels("I", a.order()).zip(sets).collect()),
    })
}

/// Maximum of the multilinear form `sum a[j] x^1[j_1] ... x^d[j_d]` over sign
/// vectors, which equals the sup-norm of the multiple Rademacher sum.
///
/// For `d = 1` this is the `l1` norm.
pub fn linf_multiple(a: &CoeffTensor, budget: Budget) -> Result<NormResult> {
    check_mask_width(*a.dims().last().unwrap())?;
    let layout = SliceLayout::new(a)?;
    budget.admit_pow2(layout.bits)?;

    let parts = gray_chunks(layout.bits, |start, end| {
        let mut mask = gray(start);
        let mut s = layout.signed_sums(mask);
        let mut best = Best::new();
        best.offer(abs_sum(&s), mask);
        for i in start + 1..end {
            let bit = i.trailing_zeros();
            for &c in &layout.by_bit[bit as usize] {
                let c = c as usize;
                s[layout.last[c]] -= 2.0 * layout.values[c] * sign_of(mask, layout.prefix[c]);
            }
            mask ^= 1u64 << bit;
            best.offer(abs_sum(&s), mask);
        }
        best
    });
    let best = Best::reduce(parts);

    let mut signs = layout.split(best.mask, a.dims());
    signs.push(sign_mask(&layout.signed_sums(best.mask)));
    Ok(NormResult {
        value: multilinear_objective(a, &signs),
        witness: Witness(axis_labels("x", a.order()).zip(signs).collect()),
    })
}

/// Norm of the `n x m` matrix as an operator from `l_inf^m` to `l_1^n`.
///
/// Enumerates column sign vectors `x` and resolves the row signs as the signs
/// of `A x`.
pub fn opnorm_inf_to_1(a: &CoeffTensor, budget: Budget) -> Result<NormResult> {
    if a.order() != 2 {
        return Err(Error::Shape(format!(
            "operator norm needs an order-2 tensor, got order {}",
            a.order()
        )));
    }
    let (n, m) = (a.dims()[0], a.dims()[1]);
    check_mask_width(m)?;
    check_mask_width(n)?;
    budget.admit_pow2(m as u32)?;
    let rows: Vec<&[f64]> = a.values().chunks(m).collect();
    let row_sums = |x: u64| -> Vec<f64> {
        rows.iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .map(|(j, &v)| if x >> j & 1 == 1 { v } else { -v })
                    .sum()
            })
            .collect()
    };

    let parts = gray_chunks(m as u32, |start, end| {
        let mut x = gray(start);
        let mut r = row_sums(x);
        let mut best = Best::new();
        best.offer(abs_sum(&r), x);
        for i in start + 1..end {
            let j = i.trailing_zeros() as usize;
            let delta = if x >> j & 1 == 1 { -2.0 } else { 2.0 };
            for (ri, row) in r.iter_mut().zip(&rows) {
                *ri += delta * row[j];
            }
            x ^= 1u64 << j;
            best.offer(abs_sum(&r), x);
        }
        best
    });
    let best = Best::reduce(parts);

    let row_signs = sign_mask(&row_sums(best.mask));
    Ok(NormResult {
        value: multilinear_objective(a, &[row_signs, best.mask]),
        witness: Witness(vec![
            ("x".to_string(), best.mask),
            ("row_signs".to_string(), row_signs),
        ]),
    })
}

/// Coefficients indexed by key bit-masks, with per-vertex incidence lists.
struct KeyLayout {
    keys: Vec<u64>,
    values: Vec<f64>,
    by_vertex: Vec<Vec<u32>>,
}

impl KeyLayout {
    fn new(a: &SimplexCoeffs) -> Result<Self> {
        check_mask_width(a.n())?;
        let mut layout = KeyLayout {
            keys: Vec::new(),
            values: Vec::new(),
            by_vertex: vec![Vec::new(); a.n()],
        };
        for (key, &v) in a.values() {
            if v == 0.0 {
                continue;
            }
            let id = layout.keys.len() as u32;
            for &j in key {
                layout.by_vertex[j - 1].push(id);
            }
            layout.keys.push(key_mask(key));
            layout.values.push(v);
        }
        Ok(layout)
    }

    fn induced_sum(&self, subset: u64) -> f64 {
        self.keys
            .iter()
            .zip(&self.values)
            .filter(|(&k, _)| k & subset == k)
            .map(|(_, v)| v)
            .sum()
    }

    fn chaos_sum(&self, eps: u64) -> f64 {
        self.keys
            .iter()
            .zip(&self.values)
            .map(|(&k, v)| v * sign_of(eps, k))
            .sum()
    }
}

/// Modified cut-norm: the largest `|sum|` of coefficients whose whole key lies
/// in one subset `I` of the ground set.
pub fn cut_norm_star(a: &SimplexCoeffs, budget: Budget) -> Result<NormResult> {
    let layout = KeyLayout::new(a)?;
    let n = a.n() as u32;
    budget.admit_pow2(n)?;

    let parts = gray_chunks(n, |start, end| {
        let mut subset = gray(start);
        let mut sum = layout.induced_sum(subset);
        let mut best = Best::new();
        best.offer(sum.abs(), subset);
        for i in start + 1..end {
            let v = i.trailing_zeros() as usize;
            let flag = 1u64 << v;
            let adding = subset & flag == 0;
            subset ^= flag;
            let full = subset | flag;
            for &id in &layout.by_vertex[v] {
                let k = layout.keys[id as usize];
                if k & full == k {
                    let w = layout.values[id as usize];
                    sum += if adding { w } else { -w };
                }
            }
            best.offer(sum.abs(), subset);
        }
        best
    });
    let best = Best::reduce(parts);
    Ok(NormResult {
        value: star_objective(a, best.mask),
        witness: Witness(vec![("I".to_string(), best.mask)]),
    })
}

/// Sup-norm of the Rademacher chaos `sum a[j] r_{j_1} ... r_{j_d}`, i.e. the
/// largest `|sum a[j] eps[j_1] ... eps[j_d]|` over sign vectors `eps`.
pub fn linf_chaos(a: &SimplexCoeffs, budget: Budget) -> Result<NormResult> {
    let layout = KeyLayout::new(a)?;
    let n = a.n() as u32;
    budget.admit_pow2(n)?;

    let parts = gray_chunks(n, |start, end| {
        let mut eps = gray(start);
        let mut sum = layout.chaos_sum(eps);
        let mut best = Best::new();
        best.offer(sum.abs(), eps);
        for i in start + 1..end {
            let v = i.trailing_zeros() as usize;
            for &id in &layout.by_vertex[v] {
                let id = id as usize;
                sum -= 2.0 * layout.values[id] * sign_of(eps, layout.keys[id]);
            }
            eps ^= 1u64 << v;
            best.offer(sum.abs(), eps);
        }
        best
    });
    let best = Best::reduce(parts);
    Ok(NormResult {
        value: chaos_objective(a, best.mask).abs(),
        witness: Witness(vec![("eps".to_string(), best.mask)]),
    })
}

/// Largest vector length accepted by [`lp_rademacher_exact`].
pub const LP_MAX_TERMS: usize = 24;

/// Exact `L_p` norm of `sum a_j r_j`, averaging `|sum a_j eps_j|^p` over all
/// `2^k` sign vectors.
pub fn lp_rademacher_exact(a: &[f64], p: f64, budget: Budget) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::Domain(format!("p must be a finite real >= 1, got {p}")));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("coefficients must be finite".into()));
    }
    if a.len() > LP_MAX_TERMS {
        return Err(Error::BudgetExceeded {
            needed: format!("2^{}", a.len()),
            budget: 1 << LP_MAX_TERMS,
        });
    }
    let k = a.len() as u32;
    budget.admit_pow2(k)?;
    let power = |s: f64| {
        let s = s.abs();
        if p == 1.0 {
            s
        } else if p == 2.0 {
            s * s
        } else {
            s.powf(p)
        }
    };
    let parts = gray_chunks(k, |start, end| {
        let mut eps = gray(start);
        let mut s: f64 = a
            .iter()
            .enumerate()
            .map(|(j, &v)| if eps >> j & 1 == 1 { v } else { -v })
            .sum();
        let mut acc = power(s);
        for i in start + 1..end {
            let j = i.trailing_zeros() as usize;
            s += if eps >> j & 1 == 1 { -2.0 * a[j] } else { 2.0 * a[j] };
            eps ^= 1u64 << j;
            acc += power(s);
        }
        acc
    });
    let total: f64 = parts.iter().sum();
    let mean = total / (1u64 << k) as f64;
    Ok(if p == 1.0 {
        mean
    } else if p == 2.0 {
        mean.sqrt()
    } else {
        mean.powf(1.0 / p)
    })
}

/// Symmetric array of order `d` with extent `n` on each axis carrying
/// `a[sorted j] / d!` on cells with pairwise distinct indices and 0 elsewhere.
pub fn decouple(a: &SimplexCoeffs) -> CoeffTensor {
    let (d, n) = (a.d(), a.n());
    let factorial: f64 = (1..=d).map(|k| k as f64).product();
    let shape = CoeffTensor::zeros(vec![n; d]).expect("non-empty dims");
    let mut values = shape.values().to_vec();
    for (key, &v) in a.values() {
        let zero_based: Vec<usize> = key.iter().map(|j| j - 1).collect();
        for perm in zero_based.iter().copied().permutations(d) {
            values[shape.flat_index(&perm)] = v / factorial;
        }
    }
    CoeffTensor::new(vec![n; d], values).expect("finite entries")
}

/// `M_k = sum over l of the Euclidean norm of the slice {j : j_k = l}`, for each axis `k`.
pub fn mixed_norm_profile(a: &CoeffTensor) -> MixedNormProfile {
    let d = a.order();
    let mut squares: Vec<Vec<f64>> = a.dims().iter().map(|&n| vec![0.0; n]).collect();
    for (flat, &v) in a.values().iter().enumerate() {
        let index = a.unflatten(flat);
        for k in 0..d {
            squares[k][index[k]] += v * v;
        }
    }
    MixedNormProfile(
        squares
            .iter()
            .map(|slices| slices.iter().map(|s| s.sqrt()).sum())
            .collect(),
    )
}

/// Slice norms restricted to the simplex: slice `(k, l)` holds the keys whose
/// `k`-th entry equals `l`.
pub fn mixed_norm_profile_simplex(a: &SimplexCoeffs) -> MixedNormProfile {
    let mut squares: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); a.d()];
    for (key, &v) in a.values() {
        for (k, &l) in key.iter().enumerate() {
            *squares[k].entry(l).or_insert(0.0) += v * v;
        }
    }
    MixedNormProfile(
        squares
            .iter()
            .map(|slices| slices.values().map(|s| s.sqrt()).sum())
            .collect(),
    )
}
