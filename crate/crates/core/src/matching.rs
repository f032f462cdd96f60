//! Node-to-channel matchings, their utility, optimal assignment and regret.

use std::fmt;

use crate::error::{Error, Result};

/// Largest matching set [`enumerate_matchings`] will materialize.
pub const ENUMERATION_GUARD: u128 = 1_000_000;

/// Relative tolerance under which two utilities count as tied.
const TIE_TOLERANCE: f64 = 1e-10;

/// Injective assignment: `assignment[m]` is the channel of node `m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Matching(Vec<usize>);

impl Matching {
    /// Checks injectivity and that every channel is below `n_channels`.
    pub fn new(assignment: Vec<usize>, n_channels: usize) -> Result<Self> {
        let mut seen = vec![false; n_channels];
        for &c in &assignment {
            if c >= n_channels {
                return Err(Error::DimensionMismatch(format!(
                    "channel {c} out of range for {n_channels} channels"
                )));
            }
            if std::mem::replace(&mut seen[c], true) {
                return Err(Error::NonInjective(c));
            }
        }
        Ok(Self(assignment))
    }

    pub(crate) fn from_vec_unchecked(assignment: Vec<usize>) -> Self {
        Self(assignment)
    }

    pub fn channel(&self, node: usize) -> usize {
        self.0[node]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }
}

impl fmt::Display for Matching {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Dense `M × N` reward matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    n_nodes: usize,
    n_channels: usize,
    values: Vec<f64>,
}

impl WeightMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_nodes = rows.len();
        let n_channels = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_channels) {
            return Err(Error::DimensionMismatch("ragged weight matrix".into()));
        }
        let values: Vec<f64> = rows.into_iter().flatten().collect();
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::DimensionMismatch(format!("non-finite weight {v}")));
        }
        Ok(Self {
            n_nodes,
            n_channels,
            values,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_channels(&self) -> usize {
        self.n_channels
    }

    pub fn get(&self, node: usize, channel: usize) -> f64 {
        self.values[node * self.n_channels + channel]
    }

    pub fn row(&self, node: usize) -> &[f64] {
        &self.values[node * self.n_channels..(node + 1) * self.n_channels]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n_nodes).map(|m| self.row(m).to_vec()).collect()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            values: self.values.iter().map(|&v| f(v)).collect(),
            ..self.clone()
        }
    }

    fn check(&self, pi: &Matching) -> Result<()> {
        if pi.len() != self.n_nodes {
            return Err(Error::DimensionMismatch(format!(
                "matching covers {} nodes, weights have {}",
                pi.len(),
                self.n_nodes
            )));
        }
        Matching::new(pi.0.clone(), self.n_channels).map(|_| ())
    }
}

/// Sum of the rewards each node collects under `pi`.
pub fn utility(w: &WeightMatrix, pi: &Matching) -> Result<f64> {
    w.check(pi)?;
    Ok(utility_unchecked(w, pi.as_slice()))
}

fn utility_unchecked(w: &WeightMatrix, assignment: &[usize]) -> f64 {
    assignment
        .iter()
        .enumerate()
        .map(|(m, &c)| w.get(m, c))
        .sum()
}

/// Hungarian algorithm (shortest augmenting paths) on a `rows × cols`
/// cost matrix with `rows <= cols`; minimizes total cost. Returns the
/// column chosen by every row.
fn hungarian_min(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    let m = cost[0].len();
    debug_assert!(n <= m);

    // 1-based potentials; column 0 is the virtual source.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut owner = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];

    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![0; n];
    for j in 1..=m {
        if owner[j] > 0 {
            assignment[owner[j] - 1] = j - 1;
        }
    }
    assignment
}

/// Best utility achievable by `rows` using only `cols`.
fn best_restricted(w: &WeightMatrix, rows: &[usize], cols: &[usize]) -> f64 {
    if rows.is_empty() {
        return 0.0;
    }
    let cost: Vec<Vec<f64>> = rows
        .iter()
        .map(|&r| cols.iter().map(|&c| -w.get(r, c)).collect())
        .collect();
    hungarian_min(&cost)
        .iter()
        .zip(rows)
        .map(|(&j, &r)| w.get(r, cols[j]))
        .sum()
}

/// Maximum-utility matching. Among tied optima the lexicographically
/// smallest assignment vector wins, so results are reproducible.
pub fn optimal_matching(w: &WeightMatrix) -> Result<(Matching, f64)> {
    let (m, n) = (w.n_nodes, w.n_channels);
    if m > n {
        return Err(Error::Infeasible {
            nodes: m,
            channels: n,
        });
    }
    let all_rows: Vec<usize> = (0..m).collect();
    let all_cols: Vec<usize> = (0..n).collect();
    let best = best_restricted(w, &all_rows, &all_cols);
    let tol = TIE_TOLERANCE * best.abs().max(1.0);

    // Fix nodes in order, each to the smallest channel that still admits
    // an optimal completion.
    let mut assignment = Vec::with_capacity(m);
    let mut free = all_cols;
    let mut prefix = 0.0;
    for node in 0..m {
        let rest: Vec<usize> = (node + 1..m).collect();
        let mut chosen = None;
        for (k, &c) in free.iter().enumerate() {
            let mut remaining = free.clone();
            remaining.remove(k);
            let total = prefix + w.get(node, c) + best_restricted(w, &rest, &remaining);
            if total >= best - tol {
                chosen = Some(k);
                break;
            }
        }
        // Floating-point slack can in principle reject every branch; fall
        // back to the Hungarian choice for this node.
        let k = chosen.unwrap_or_else(|| {
            let cost: Vec<Vec<f64>> = (node..m)
                .map(|r| free.iter().map(|&c| -w.get(r, c)).collect())
                .collect();
            hungarian_min(&cost)[0]
        });
        let c = free.remove(k);
        prefix += w.get(node, c);
        assignment.push(c);
    }

    let pi = Matching(assignment);
    let u = utility_unchecked(w, pi.as_slice());
    Ok((pi, u))
}

/// Number of injective maps from `m` nodes into `n` channels.
pub fn count_matchings(m: usize, n: usize) -> u128 {
    if m > n {
        return 0;
    }
    ((n - m + 1)..=n).map(|k| k as u128).product()
}

/// Every injective assignment exactly once, in lexicographic order.
pub fn enumerate_matchings(m: usize, n: usize) -> Result<Vec<Matching>> {
    let count = count_matchings(m, n);
    if count > ENUMERATION_GUARD {
        return Err(Error::EnumerationTooLarge(count));
    }
    let mut out = Vec::with_capacity(count as usize);
    let mut current = Vec::with_capacity(m);
    let mut used = vec![false; n];
    fn rec(
        m: usize,
        n: usize,
        current: &mut Vec<usize>,
        used: &mut [bool],
        out: &mut Vec<Matching>,
    ) {
        if current.len() == m {
            out.push(Matching(current.clone()));
            return;
        }
        for c in 0..n {
            if !used[c] {
                used[c] = true;
                current.push(c);
                rec(m, n, current, used, out);
                current.pop();
                used[c] = false;
            }
        }
    }
    if m <= n {
        rec(m, n, &mut current, &mut used, &mut out);
    }
    Ok(out)
}

/// Utility gap between the optimal matching for `w_true` and `pi`.
pub fn instant_regret(w_true: &WeightMatrix, pi: &Matching) -> Result<f64> {
    let chosen = utility(w_true, pi)?;
    let (_, best) = optimal_matching(w_true)?;
    Ok((best - chosen).max(0.0))
}

/// Running sum of per-CPI regrets.
pub fn cumulative_regret(per_cpi: &[f64]) -> Result<Vec<f64>> {
    let mut total = 0.0;
    per_cpi
        .iter()
        .enumerate()
        .map(|(index, &value)| {
            if value < 0.0 || value.is_nan() {
                return Err(Error::NegativeRegret { index, value });
            }
            total += value;
            Ok(total)
        })
        .collect()
}
