use serde::Serialize;

use crate::discrepancy::{balance, disc_exact, disc_monte_carlo, expected_disc_exact};
use crate::enumerate::Budget;
use crate::error::{Error, Result};
use crate::model::build_complete;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanRow {
    pub n: usize,
    /// Exact discrepancy, absent when the budget does not allow it.
    pub disc_exact: Option<f64>,
    pub e_exact: Option<f64>,
    pub e_mc: f64,
    pub e_mc_stderr: f64,
    /// Smallest discrepancy among the sampled colorings.
    pub best: f64,
    pub balance: f64,
    /// `n^((d+1)/2)`.
    pub n_pow: f64,
    pub disc_ratio: Option<f64>,
    pub e_mc_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanTable {
    pub d: usize,
    pub rows: Vec<ScanRow>,
    /// Exact discrepancy never decreases with `n` over the computed rows.
    pub monotone: bool,
}

impl ScanTable {
    pub const CSV_HEADER: &'static str = "n,disc_exact,e_mc,best,balance,n_pow";

    /// CSV rendering; `fmt` formats each float, an empty field marks a missing value.
    pub fn to_csv(&self, fmt: impl Fn(f64) -> String) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let disc = r.disc_exact.map(&fmt).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.n,
                disc,
                fmt(r.e_mc),
                fmt(r.best),
                fmt(r.balance),
                fmt(r.n_pow)
            ));
        }
        out
    }
}

fn optional(r: Result<f64>) -> Result<Option<f64>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::BudgetExceeded { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Discrepancy of unit complete `d`-uniform hypergraphs for `n` in `n_lo..=n_hi`.
pub fn scaling_scan(
    d: usize,
    n_lo: usize,
    n_hi: usize,
    trials: u64,
    seed: u64,
    budget: Budget,
) -> Result<ScanTable> {
    if d < 2 {
        return Err(Error::Domain(format!("arity must be at least 2, got {d}")));
    }
    if n_lo < d || n_lo > n_hi {
        return Err(Error::Domain(format!(
            "invalid range {n_lo}..{n_hi} for arity {d}"
        )));
    }
    let mut rows = Vec::new();
    for n in n_lo..=n_hi {
        let h = build_complete(n, d, 1.0)?;
        let exact = optional(disc_exact(&h, budget).map(|r| r.value))?;
        let e_exact = optional(expected_disc_exact(&h, budget).map(|r| r.value))?;
        let mc = disc_monte_carlo(&h, trials, seed, budget)?;
        let n_pow = (n as f64).powf((d as f64 + 1.0) / 2.0);
        rows.push(ScanRow {
            n,
            disc_exact: exact,
            e_exact,
            e_mc: mc.value,
            e_mc_stderr: mc.stderr.unwrap_or(0.0),
            best: mc.best.unwrap_or(mc.value),
            balance: balance(&h),
            n_pow,
            disc_ratio: exact.map(|v| v / n_pow),
            e_mc_ratio: mc.value / n_pow,
        });
    }
    let exact: Vec<f64> = rows.iter().filter_map(|r| r.disc_exact).collect();
    let monotone = exact.windows(2).all(|w| w[0] <= w[1]);
    Ok(ScanTable { d, rows, monotone })
}
