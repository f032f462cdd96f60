//! Summary statistics over CPI logs.

use std::collections::BTreeMap;

use statrs::distribution::{Binomial, DiscreteCDF};

use crate::bandits::Policy;
use crate::error::{Error, Result};
use crate::sim::io::CpiRecord;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EcdfPoint {
    pub value: f64,
    pub probability: f64,
}

/// Empirical CDF as a step function: the i-th smallest sample (1-based)
/// maps to i/n.
pub fn ecdf(values: &[f64]) -> Result<Vec<EcdfPoint>> {
    if values.is_empty() {
        return Err(Error::Empty("ecdf of no values"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    Ok(sorted
        .into_iter()
        .enumerate()
        .map(|(i, value)| EcdfPoint {
            value,
            probability: (i + 1) as f64 / n,
        })
        .collect())
}

pub fn median(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Empty("median of no values"));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len() / 2;
    Ok(if v.len() % 2 == 1 {
        v[k]
    } else {
        0.5 * (v[k - 1] + v[k])
    })
}

/// Records of one policy grouped by run, each run sorted by CPI.
pub fn by_run(records: &[CpiRecord], policy: Policy) -> BTreeMap<usize, Vec<&CpiRecord>> {
    let mut runs: BTreeMap<usize, Vec<&CpiRecord>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.policy == policy) {
        runs.entry(r.run).or_default().push(r);
    }
    for v in runs.values_mut() {
        v.sort_by_key(|r| r.cpi);
    }
    runs
}

fn tail<'a, 'b>(run: &'b [&'a CpiRecord], window: Option<usize>) -> &'b [&'a CpiRecord] {
    match window {
        Some(w) => &run[run.len().saturating_sub(w)..],
        None => run,
    }
}

/// Localization errors of one policy, optionally restricted to the last
/// `window` CPIs of each run.
pub fn errors(records: &[CpiRecord], policy: Policy, window: Option<usize>) -> Vec<f64> {
    by_run(records, policy)
        .values()
        .flat_map(|run| tail(run, window).iter().map(|r| r.error_m))
        .collect()
}

/// Median error of each run, ordered by run index.
pub fn per_run_medians(
    records: &[CpiRecord],
    policy: Policy,
    window: Option<usize>,
) -> Result<Vec<(usize, f64)>> {
    by_run(records, policy)
        .iter()
        .map(|(&run, v)| {
            let e: Vec<f64> = tail(v, window).iter().map(|r| r.error_m).collect();
            Ok((run, median(&e)?))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignTest {
    /// Pairs where the first sample is larger.
    pub greater: u64,
    pub less: u64,
    pub ties: u64,
    /// One-sided p-value for "the first sample tends to be larger".
    pub p_value: f64,
}

impl SignTest {
    pub fn significant(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

/// Paired one-sided sign test. Ties are dropped.
pub fn sign_test(first: &[f64], second: &[f64]) -> Result<SignTest> {
    if first.len() != second.len() {
        return Err(Error::DimensionMismatch(format!(
            "sign test on {} vs {} samples",
            first.len(),
            second.len()
        )));
    }
    let (mut greater, mut less, mut ties) = (0u64, 0u64, 0u64);
    for (a, b) in first.iter().zip(second) {
        match a.partial_cmp(b) {
            Some(std::cmp::Ordering::Greater) => greater += 1,
            Some(std::cmp::Ordering::Less) => less += 1,
            _ => ties += 1,
        }
    }
    let n = greater + less;
    let p_value = if n == 0 || greater == 0 {
        1.0
    } else {
        let binom = Binomial::new(0.5, n).expect("valid binomial");
        binom.sf(greater - 1)
    };
    Ok(SignTest {
        greater,
        less,
        ties,
        p_value,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorByCpi {
    pub cpi: usize,
    pub mean_m: f64,
    pub median_m: f64,
}

/// Mean and median error across runs at each CPI.
pub fn error_by_cpi(records: &[CpiRecord], policy: Policy) -> Result<Vec<ErrorByCpi>> {
    let mut per_cpi: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.policy == policy) {
        per_cpi.entry(r.cpi).or_default().push(r.error_m);
    }
    per_cpi
        .into_iter()
        .map(|(cpi, e)| {
            Ok(ErrorByCpi {
                cpi,
                mean_m: e.iter().sum::<f64>() / e.len() as f64,
                median_m: median(&e)?,
            })
        })
        .collect()
}

/// Mean cumulative regret across runs at each CPI.
pub fn mean_cum_regret(records: &[CpiRecord], policy: Policy) -> Vec<f64> {
    let mut per_cpi: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    for r in records.iter().filter(|r| r.policy == policy) {
        let e = per_cpi.entry(r.cpi).or_default();
        e.0 += r.cum_regret;
        e.1 += 1;
    }
    per_cpi.into_values().map(|(s, n)| s / n as f64).collect()
}

/// Policies present in a log, in first-appearance order.
pub fn policies_in(records: &[CpiRecord]) -> Vec<Policy> {
    let mut seen = Vec::new();
    for r in records {
        if !seen.contains(&r.policy) {
            seen.push(r.policy);
        }
    }
    seen
}
