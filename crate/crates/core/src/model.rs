//! Graphs, hypergraphs, coefficient arrays and sign assignments.
//!
//! Vertices and tensor indices are 0-based everywhere except in
//! [`SimplexCoeffs`], whose keys are strictly increasing 1-based tuples
//! `j_1 < ... < j_d <= n`. The only place that converts between the two is
//! [`chaos_coeffs`].

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One edge of a [`WeightedHypergraph`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub vertices: Vec<usize>,
    pub weight: f64,
}

/// A `d`-uniform hypergraph on vertices `0..n` with a real weight per edge.
///
/// Zero weights are allowed; duplicate edges are not.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedHypergraph {
    n: usize,
    d: usize,
    edges: Vec<Edge>,
}

impl WeightedHypergraph {
    pub fn new(n: usize, d: usize, edges: Vec<Edge>) -> Result<Self> {
        if d < 2 {
            return Err(Error::Invariant(format!("arity must be at least 2, got {d}")));
        }
        if d > n {
            return Err(Error::Invariant(format!(
                "arity {d} exceeds the vertex count {n}"
            )));
        }
        let mut seen = BTreeSet::new();
        for (idx, edge) in edges.iter().enumerate() {
            if edge.vertices.len() != d {
                return Err(Error::Invariant(format!(
                    "edge {idx} has {} vertices, expected {d}",
                    edge.vertices.len()
                )));
            }
            if !edge.vertices.windows(2).all(|w| w[0] < w[1]) {
                return Err(Error::Invariant(format!(
                    "edge {idx} vertices {:?} are not strictly increasing",
                    edge.vertices
                )));
            }
            if let Some(&v) = edge.vertices.iter().find(|&&v| v >= n) {
                return Err(Error::Invariant(format!(
                    "edge {idx} uses vertex {v} outside [0, {n})"
                )));
            }
            if !edge.weight.is_finite() {
                return Err(Error::Invariant(format!("edge {idx} has a non-finite weight")));
            }
            if !seen.insert(edge.vertices.clone()) {
                return Err(Error::Invariant(format!(
                    "duplicate edge {:?}",
                    edge.vertices
                )));
            }
        }
        Ok(WeightedHypergraph { n, d, edges })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Returns a copy with every weight multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let edges = self
            .edges
            .iter()
            .map(|e| Edge {
                vertices: e.vertices.clone(),
                weight: e.weight * factor,
            })
            .collect();
        WeightedHypergraph {
            n: self.n,
            d: self.d,
            edges,
        }
    }

    /// Returns the hypergraph whose weights are `theta(e) * w(e)`.
    pub fn sign_adjusted(&self, coloring: &Coloring) -> Result<Self> {
        if coloring.len() != self.edges.len() {
            return Err(Error::Shape(format!(
                "coloring has {} signs for {} edges",
                coloring.len(),
                self.edges.len()
            )));
        }
        let edges = self
            .edges
            .iter()
            .zip(coloring.signs())
            .map(|(e, &s)| Edge {
                vertices: e.vertices.clone(),
                weight: f64::from(s) * e.weight,
            })
            .collect();
        Ok(WeightedHypergraph {
            n: self.n,
            d: self.d,
            edges,
        })
    }
}

/// A real array of order `d` stored in row-major order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTensor")]
pub struct CoeffTensor {
    dims: Vec<usize>,
    values: Vec<f64>,
}

#[derive(Deserialize)]
struct RawTensor {
    dims: Vec<usize>,
    values: Vec<f64>,
}

impl TryFrom<RawTensor> for CoeffTensor {
    type Error = Error;

    fn try_from(raw: RawTensor) -> Result<Self> {
        CoeffTensor::new(raw.dims, raw.values)
    }
}

impl CoeffTensor {
    pub fn new(dims: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::Invariant("tensor order must be at least 1".into()));
        }
        if let Some(k) = dims.iter().position(|&n| n == 0) {
            return Err(Error::Invariant(format!("extent of axis {k} is zero")));
        }
        let len = dims
            .iter()
            .try_fold(1usize, |acc, &n| acc.checked_mul(n))
            .ok_or_else(|| Error::Invariant("tensor size overflows".into()))?;
        if values.len() != len {
            return Err(Error::Invariant(format!(
                "{} values for dims {:?} (expected {len})",
                values.len(),
                dims
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invariant("tensor entries must be finite".into()));
        }
        Ok(CoeffTensor { dims, values })
    }

    pub fn zeros(dims: Vec<usize>) -> Result<Self> {
        let len = dims.iter().product();
        CoeffTensor::new(dims, vec![0.0; len])
    }

    /// Builds an order-2 tensor from rows of equal length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::Invariant("rows have unequal lengths".into()));
        }
        CoeffTensor::new(vec![n, m], rows.concat())
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dims.len()];
        for k in (0..self.dims.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.dims[k + 1];
        }
        strides
    }

    pub fn flat_index(&self, index: &[usize]) -> usize {
        debug_assert_eq!(index.len(), self.dims.len());
        index
            .iter()
            .zip(self.strides())
            .map(|(&i, s)| i * s)
            .sum()
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        self.values[self.flat_index(index)]
    }

    /// Multi-index of the cell at `flat` in row-major order.
    pub fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let mut index = vec![0; self.dims.len()];
        for k in (0..self.dims.len()).rev() {
            index[k] = flat % self.dims[k];
            flat /= self.dims[k];
        }
        index
    }

    /// Cell-wise product with a sign pattern aligned to the row-major cells.
    pub fn hadamard_signs(&self, pattern: &SignPattern) -> Result<Self> {
        if pattern.len() != self.values.len() {
            return Err(Error::Shape(format!(
                "sign pattern of length {} for a tensor with {} cells",
                pattern.len(),
                self.values.len()
            )));
        }
        let values = self
            .values
            .iter()
            .zip(pattern.signs())
            .map(|(&v, &s)| v * f64::from(s))
            .collect();
        Ok(CoeffTensor {
            dims: self.dims.clone(),
            values,
        })
    }

    pub fn scaled(&self, factor: f64) -> Self {
        CoeffTensor {
            dims: self.dims.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    /// Reorders the axes so that new axis `k` is old axis `perm[k]`.
    pub fn permute_axes(&self, perm: &[usize]) -> Result<Self> {
        let d = self.order();
        let mut check = perm.to_vec();
        check.sort_unstable();
        if check != (0..d).collect::<Vec<_>>() {
            return Err(Error::Domain(format!("{perm:?} is not a permutation of 0..{d}")));
        }
        let dims: Vec<usize> = perm.iter().map(|&k| self.dims[k]).collect();
        let mut out = CoeffTensor::zeros(dims)?;
        for flat in 0..self.values.len() {
            let old = self.unflatten(flat);
            let new: Vec<usize> = perm.iter().map(|&k| old[k]).collect();
            let at = out.flat_index(&new);
            out.values[at] = self.values[flat];
        }
        Ok(out)
    }

    /// Reverses the order of indices along one axis.
    pub fn reverse_axis(&self, axis: usize) -> Self {
        let mut out = self.clone();
        for flat in 0..self.values.len() {
            let mut index = self.unflatten(flat);
            index[axis] = self.dims[axis] - 1 - index[axis];
            let at = self.flat_index(&index);
            out.values[at] = self.values[flat];
        }
        out
    }
}

/// Coefficients on strictly increasing 1-based multi-indices of `[n]`.
///
/// Absent keys are zero.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplexCoeffs {
    d: usize,
    n: usize,
    values: BTreeMap<Vec<usize>, f64>,
}

impl SimplexCoeffs {
    pub fn new(d: usize, n: usize, values: BTreeMap<Vec<usize>, f64>) -> Result<Self> {
        if d < 2 {
            return Err(Error::Invariant(format!("chaos order must be at least 2, got {d}")));
        }
        if n < d {
            return Err(Error::Invariant(format!("ground set {n} smaller than order {d}")));
        }
        for (key, value) in &values {
            if key.len() != d {
                return Err(Error::Invariant(format!("key {key:?} does not have {d} entries")));
            }
            if key[0] < 1 || key[d - 1] > n || !key.windows(2).all(|w| w[0] < w[1]) {
                return Err(Error::Invariant(format!(
                    "key {key:?} is not strictly increasing within [1, {n}]"
                )));
            }
            if !value.is_finite() {
                return Err(Error::Invariant(format!("coefficient at {key:?} is not finite")));
            }
        }
        Ok(SimplexCoeffs { d, n, values })
    }

    /// Convenience constructor from `(key, value)` pairs.
    pub fn from_entries<I>(d: usize, n: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<usize>, f64)>,
    {
        let mut values = BTreeMap::new();
        for (key, value) in entries {
            if values.insert(key.clone(), value).is_some() {
                return Err(Error::Invariant(format!("key {key:?} given twice")));
            }
        }
        SimplexCoeffs::new(d, n, values)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &BTreeMap<Vec<usize>, f64> {
        &self.values
    }

    pub fn get(&self, key: &[usize]) -> f64 {
        self.values.get(key).copied().unwrap_or(0.0)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        SimplexCoeffs {
            d: self.d,
            n: self.n,
            values: self
                .values
                .iter()
                .map(|(k, v)| (k.clone(), v * factor))
                .collect(),
        }
    }

    /// Relabels the ground set by `perm` (1-based image of each 1-based label).
    pub fn relabeled(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::Shape(format!(
                "relabeling of length {} for ground set {}",
                perm.len(),
                self.n
            )));
        }
        let mut values = BTreeMap::new();
        for (key, &v) in &self.values {
            let mut image: Vec<usize> = key.iter().map(|&j| perm[j - 1]).collect();
            image.sort_unstable();
            if values.insert(image.clone(), v).is_some() {
                return Err(Error::Domain("relabeling is not a bijection".into()));
            }
        }
        SimplexCoeffs::new(self.d, self.n, values)
    }

    /// Multiplies each stored coefficient by the sign aligned with it in key order.
    pub fn hadamard_signs(&self, pattern: &SignPattern) -> Result<Self> {
        if pattern.len() != self.values.len() {
            return Err(Error::Shape(format!(
                "sign pattern of length {} for {} coefficients",
                pattern.len(),
                self.values.len()
            )));
        }
        let values = self
            .values
            .iter()
            .zip(pattern.signs())
            .map(|((k, &v), &s)| (k.clone(), v * f64::from(s)))
            .collect();
        Ok(SimplexCoeffs {
            d: self.d,
            n: self.n,
            values,
        })
    }
}

fn check_signs(signs: &[i8]) -> Result<()> {
    match signs.iter().position(|&s| s != 1 && s != -1) {
        Some(i) => Err(Error::Invariant(format!(
            "entry {i} is {}, expected +1 or -1",
            signs[i]
        ))),
        None => Ok(()),
    }
}

/// A ±1 sign per edge, aligned with the edge order of a hypergraph.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Coloring(Vec<i8>);

impl Coloring {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        check_signs(&signs)?;
        Ok(Coloring(signs))
    }

    pub fn all_plus(len: usize) -> Self {
        Coloring(vec![1; len])
    }

    /// Bit `e` of `mask` set means edge `e` is colored +1.
    pub fn from_mask(mask: u64, len: usize) -> Self {
        Coloring((0..len).map(|e| bit_sign(mask, e)).collect())
    }

    pub fn signs(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn negated(&self) -> Self {
        Coloring(self.0.iter().map(|s| -s).collect())
    }
}

/// A ±1 sign per cell of a tensor (row-major) or per key of simplex coefficients (key order).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SignPattern(Vec<i8>);

impl SignPattern {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        check_signs(&signs)?;
        Ok(SignPattern(signs))
    }

    pub fn from_mask(mask: u64, len: usize) -> Self {
        SignPattern((0..len).map(|e| bit_sign(mask, e)).collect())
    }

    pub fn signs(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub(crate) fn bit_sign(mask: u64, bit: usize) -> i8 {
    if mask >> bit & 1 == 1 {
        1
    } else {
        -1
    }
}

/// Slice norms `M_1..M_d`: for each axis, the sum over its index values of the
/// Euclidean norm of the corresponding slice.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MixedNormProfile(pub Vec<f64>);

impl MixedNormProfile {
    pub fn m(&self) -> &[f64] {
        &self.0
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(0.0, f64::max)
    }
}

/// Rademacher function `r_i(t) = (-1)^floor(2^i t)` on `[0, 1)`.
pub fn rademacher_eval(i: u32, t: f64) -> Result<i8> {
    if i < 1 {
        return Err(Error::Domain(format!("rademacher index must be >= 1, got {i}")));
    }
    if !(0.0..1.0).contains(&t) {
        return Err(Error::Domain(format!("t = {t} is outside [0, 1)")));
    }
    if i > 1000 {
        return Err(Error::Domain(format!("rademacher index {i} is too large")));
    }
    // 2^i t is exact in binary floating point; the parity of its floor is
    // the i-th binary digit of t.
    let scaled = t * 2f64.powi(i as i32);
    let digit = scaled.floor() % 2.0;
    Ok(if digit == 0.0 { 1 } else { -1 })
}

/// A point `t` in `[0, 1)` with `r_i(t) = signs[i - 1]` for every `i`.
///
/// Chooses the midpoint of the dyadic interval of length `2^-k` selected by
/// the signs.
pub fn dyadic_point(signs: &[i8]) -> Result<f64> {
    check_signs(signs)?;
    if signs.len() > 52 {
        return Err(Error::Domain("at most 52 signs fit a double".into()));
    }
    let mut t = 0.0;
    let mut step = 0.5;
    for &s in signs {
        if s == -1 {
            t += step;
        }
        step /= 2.0;
    }
    Ok(t + step)
}

/// Complete `d`-uniform hypergraph on `n` vertices with one weight for all edges.
pub fn build_complete(n: usize, d: usize, weight: f64) -> Result<WeightedHypergraph> {
    build_complete_with(n, d, |_| weight)
}

/// Complete `d`-uniform hypergraph on `n` vertices with per-edge weights.
///
/// Edges are produced in lexicographic order of their vertex tuples.
pub fn build_complete_with<F>(n: usize, d: usize, mut weight: F) -> Result<WeightedHypergraph>
where
    F: FnMut(&[usize]) -> f64,
{
    if d < 2 || d > n {
        return Err(Error::Domain(format!(
            "complete hypergraph needs 2 <= d <= n, got n = {n}, d = {d}"
        )));
    }
    let edges = (0..n)
        .combinations(d)
        .map(|vertices| {
            let weight = weight(&vertices);
            Edge { vertices, weight }
        })
        .collect();
    WeightedHypergraph::new(n, d, edges)
}

/// Complete bipartite graph carrying an `n x m` weight matrix.
///
/// Row `i` is vertex `i`, column `j` is vertex `n + j`; edges follow row-major
/// cell order, so a sign pattern on the matrix is also a coloring.
pub fn build_bipartite(weights: &CoeffTensor) -> Result<WeightedHypergraph> {
    if weights.order() != 2 {
        return Err(Error::Shape(format!(
            "bipartite graph needs an order-2 tensor, got order {}",
            weights.order()
        )));
    }
    let (n, m) = (weights.dims()[0], weights.dims()[1]);
    let mut edges = Vec::with_capacity(n * m);
    for i in 0..n {
        for j in 0..m {
            edges.push(Edge {
                vertices: vec![i, n + j],
                weight: weights.get(&[i, j]),
            });
        }
    }
    WeightedHypergraph::new(n + m, 2, edges)
}

/// The chaos coefficients of a hypergraph: `w(e)` at the 1-based vertex tuple of `e`.
pub fn chaos_coeffs(h: &WeightedHypergraph) -> SimplexCoeffs {
    let values = h
        .edges()
        .iter()
        .map(|e| (e.vertices.iter().map(|v| v + 1).collect(), e.weight))
        .collect();
    SimplexCoeffs {
        d: h.d(),
        n: h.n(),
        values,
    }
}
