//! Budgeted Gray-code enumeration split into fixed parallel ranges.
//!
//! A walk over `2^bits` configurations is cut into ranges of at most
//! `2^CHUNK_LOG` consecutive Gray-code indices. The cut depends only on
//! `bits`, every range is seeded by a direct evaluation at its first code,
//! and per-range results come back in range order, so any reduction over
//! them is identical for every worker count.

use rayon::prelude::*;

use crate::error::{Error, Result};

pub const DEFAULT_BUDGET: u64 = 1 << 28;

const CHUNK_LOG: u32 = 12;

/// Upper limit on objective updates an enumeration may perform.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget(pub u64);

impl Default for Budget {
    fn default() -> Self {
        Budget(DEFAULT_BUDGET)
    }
}

impl Budget {
    /// Admits an enumeration of `2^log2_updates` updates.
    pub fn admit_pow2(self, log2_updates: u32) -> Result<()> {
        if log2_updates < 64 && (1u64 << log2_updates) <= self.0 {
            Ok(())
        } else {
            Err(Error::BudgetExceeded {
                needed: format!("2^{log2_updates}"),
                budget: self.0,
            })
        }
    }

    /// Admits an enumeration of `count * 2^log2_factor` updates.
    pub fn admit(self, count: u128, log2_factor: u32) -> Result<()> {
        let needed = if log2_factor < 100 {
            count.checked_mul(1u128 << log2_factor)
        } else {
            None
        };
        match needed {
            Some(k) if k <= u128::from(self.0) => Ok(()),
            _ => Err(Error::BudgetExceeded {
                needed: format!("{count} * 2^{log2_factor}"),
                budget: self.0,
            }),
        }
    }
}

#[inline]
pub fn gray(i: u64) -> u64 {
    i ^ (i >> 1)
}

/// Runs `f(start, end)` over the fixed ranges covering Gray indices `0..2^bits`.
pub(crate) fn gray_chunks<T, F>(bits: u32, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, u64) -> T + Sync + Send,
{
    debug_assert!(bits < 64);
    let span_log = bits.min(CHUNK_LOG);
    let chunks = 1u64 << (bits - span_log);
    (0..chunks)
        .into_par_iter()
        .map(|c| f(c << span_log, (c + 1) << span_log))
        .collect()
}

/// Running maximum with ties going to the smaller mask.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Best {
    pub value: f64,
    pub mask: u64,
}

impl Best {
    pub fn new() -> Self {
        Best {
            value: f64::NEG_INFINITY,
            mask: u64::MAX,
        }
    }

    #[inline]
    pub fn offer(&mut self, value: f64, mask: u64) {
        if value > self.value || (value == self.value && mask < self.mask) {
            self.value = value;
            self.mask = mask;
        }
    }

    pub fn merge(mut self, other: Best) -> Best {
        self.offer(other.value, other.mask);
        self
    }

    pub fn reduce(parts: impl IntoIterator<Item = Best>) -> Best {
        parts.into_iter().fold(Best::new(), Best::merge)
    }
}
