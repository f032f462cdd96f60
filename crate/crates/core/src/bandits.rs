//! Channel-selection policies and the coordinator's feedback protocol.
//!
//! The learning policies share one exploration scheme. The coordinator
//! hands the nodes a sequence Γ of matchings, the cyclic shifts of the
//! surviving channels, and each entry is played `2^p` consecutive CPIs in
//! phase `p`. After every full sweep the coordinator scores each channel by
//! its network-averaged channel metric, drops channels whose upper
//! confidence bound falls below the lower bound of the M-th best channel,
//! and broadcasts the pair means back to the nodes. Once only M channels
//! survive the sequence collapses to a single matching:
//!
//! - ETC commits to the optimal matching of the mean SINR matrix.
//! - ETP re-solves every CPI on the weight matrix built from the learned
//!   metrics and the ranges predicted from the shared track.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matching::{optimal_matching, Matching, WeightMatrix};
use crate::rf::channel_metric;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    Oracle,
    Random,
    Etc,
    Etp,
}

impl Policy {
    pub const ALL: [Policy; 4] = [Policy::Oracle, Policy::Etp, Policy::Etc, Policy::Random];

    pub fn name(self) -> &'static str {
        match self {
            Policy::Oracle => "oracle",
            Policy::Random => "random",
            Policy::Etc => "etc",
            Policy::Etp => "etp",
        }
    }

    /// Stable key for seed derivation.
    pub fn id(self) -> u64 {
        match self {
            Policy::Oracle => 1,
            Policy::Random => 2,
            Policy::Etc => 3,
            Policy::Etp => 4,
        }
    }

    pub fn is_learning(self) -> bool {
        matches!(self, Policy::Etc | Policy::Etp)
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "oracle" => Ok(Policy::Oracle),
            "random" => Ok(Policy::Random),
            "etc" => Ok(Policy::Etc),
            "etp" => Ok(Policy::Etp),
            other => Err(Error::InvalidConfig(format!(
                "unknown policy '{other}' (expected oracle, random, etc or etp)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BanditParams {
    /// `c` in the confidence radius sqrt(c·ln t / n).
    pub ucb_exploration: f64,
    /// Multiplies the confidence radius.
    pub confidence_scale: f64,
    /// Width of one broadcast scalar.
    pub feedback_scalar_bits: u32,
}

impl Default for BanditParams {
    fn default() -> Self {
        Self {
            ucb_exploration: 2.0,
            confidence_scale: 1.0,
            feedback_scalar_bits: 32,
        }
    }
}

/// Running per-(node, channel) means of SINR and channel metric.
#[derive(Debug, Clone, PartialEq)]
pub struct PairStats {
    n_nodes: usize,
    n_channels: usize,
    count: Vec<u64>,
    mean_sinr_db: Vec<f64>,
    mean_metric_db: Vec<f64>,
}

impl PairStats {
    pub fn new(n_nodes: usize, n_channels: usize) -> Self {
        let len = n_nodes * n_channels;
        Self {
            n_nodes,
            n_channels,
            count: vec![0; len],
            mean_sinr_db: vec![0.0; len],
            mean_metric_db: vec![0.0; len],
        }
    }

    fn idx(&self, node: usize, channel: usize) -> usize {
        node * self.n_channels + channel
    }

    pub fn record(&mut self, node: usize, channel: usize, sinr_db: f64, metric_db: f64) {
        let i = self.idx(node, channel);
        self.count[i] += 1;
        let k = self.count[i] as f64;
        self.mean_sinr_db[i] += (sinr_db - self.mean_sinr_db[i]) / k;
        self.mean_metric_db[i] += (metric_db - self.mean_metric_db[i]) / k;
    }

    pub fn count(&self, node: usize, channel: usize) -> u64 {
        self.count[self.idx(node, channel)]
    }

    pub fn mean_sinr_db(&self, node: usize, channel: usize) -> f64 {
        self.mean_sinr_db[self.idx(node, channel)]
    }

    pub fn mean_metric_db(&self, node: usize, channel: usize) -> f64 {
        self.mean_metric_db[self.idx(node, channel)]
    }

    pub fn count_total(&self, channel: usize) -> u64 {
        (0..self.n_nodes).map(|m| self.count(m, channel)).sum()
    }

    /// Network score ĝ(n): metric mean over the nodes that sampled `channel`.
    pub fn network_metric(&self, channel: usize) -> Option<f64> {
        let (sum, k) = (0..self.n_nodes)
            .filter(|&m| self.count(m, channel) > 0)
            .fold((0.0, 0usize), |(s, k), m| {
                (s + self.mean_metric_db(m, channel), k + 1)
            });
        (k > 0).then(|| sum / k as f64)
    }

    /// `M × channels.len()` submatrix of metric means.
    pub fn metric_columns(&self, channels: &[usize]) -> Vec<Vec<f64>> {
        (0..self.n_nodes)
            .map(|m| {
                channels
                    .iter()
                    .map(|&c| self.mean_metric_db(m, c))
                    .collect()
            })
            .collect()
    }

    pub fn sinr_columns(&self, channels: &[usize]) -> Vec<Vec<f64>> {
        (0..self.n_nodes)
            .map(|m| channels.iter().map(|&c| self.mean_sinr_db(m, c)).collect())
            .collect()
    }
}

/// The sequence Γ for one exploration phase.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplorationSequence {
    pub matchings: Vec<Matching>,
    pub phase: u32,
    /// CPIs played so far in this phase.
    pub steps_in_phase: usize,
}

impl ExplorationSequence {
    pub fn repeats(&self) -> usize {
        1usize << self.phase.min(40)
    }

    pub fn cursor(&self) -> usize {
        (self.steps_in_phase / self.repeats()) % self.matchings.len()
    }

    pub fn current(&self) -> &Matching {
        &self.matchings[self.cursor()]
    }

    pub fn sweep_len(&self) -> usize {
        self.matchings.len() * self.repeats()
    }

    /// Counts one played CPI; true when the sweep just completed.
    fn advance(&mut self) -> bool {
        self.steps_in_phase += 1;
        self.steps_in_phase >= self.sweep_len()
    }
}

/// Γ = the cyclic shifts of the sorted surviving channels; in shift `s`
/// node `i` plays `surviving[(i + s) mod K]`.
pub fn build_exploration_sequence(
    surviving: &[usize],
    m: usize,
    phase: u32,
) -> Result<ExplorationSequence> {
    let mut channels = surviving.to_vec();
    channels.sort_unstable();
    channels.dedup();
    let k = channels.len();
    if k < m || m == 0 {
        return Err(Error::Infeasible {
            nodes: m,
            channels: k,
        });
    }
    let matchings = (0..k)
        .map(|s| Matching::from_vec_unchecked((0..m).map(|i| channels[(i + s) % k]).collect()))
        .collect();
    Ok(ExplorationSequence {
        matchings,
        phase,
        steps_in_phase: 0,
    })
}

/// What the coordinator decided at the end of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Refinement {
    pub t: usize,
    pub eliminated: Vec<usize>,
    pub surviving: Vec<usize>,
    pub converged: bool,
    pub bits: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BanditState {
    pub policy: Policy,
    pub n_nodes: usize,
    pub n_channels: usize,
    pub params: BanditParams,
    pub stats: PairStats,
    pub sequence: ExplorationSequence,
    /// Sorted ascending.
    pub surviving: Vec<usize>,
    pub converged: bool,
    pub feedback_bits: u64,
    pub converged_at: Option<usize>,
}

impl BanditState {
    pub fn new(
        policy: Policy,
        n_nodes: usize,
        n_channels: usize,
        params: BanditParams,
    ) -> Result<Self> {
        if n_nodes > n_channels {
            return Err(Error::Infeasible {
                nodes: n_nodes,
                channels: n_channels,
            });
        }
        let surviving: Vec<usize> = (0..n_channels).collect();
        Ok(Self {
            policy,
            n_nodes,
            n_channels,
            params,
            stats: PairStats::new(n_nodes, n_channels),
            sequence: build_exploration_sequence(&surviving, n_nodes, 0)?,
            surviving,
            converged: false,
            feedback_bits: 0,
            converged_at: None,
        })
    }

    pub fn phase(&self) -> u32 {
        self.sequence.phase
    }

    /// Node-level decision for ETC.
    pub fn etc_step(&self, node: usize) -> usize {
        if self.converged {
            self.sequence.matchings[0].channel(node)
        } else {
            self.sequence.current().channel(node)
        }
    }

    /// Node-level decision for ETP. Every node solves the same problem on
    /// shared data, so all nodes agree on the matching.
    pub fn etp_step(&self, node: usize, predicted_ranges: &[f64]) -> Result<usize> {
        if self.converged {
            Ok(self.etp_matching(predicted_ranges)?.channel(node))
        } else {
            Ok(self.etc_step(node))
        }
    }

    /// π*(W) over the surviving channels using learned metrics.
    pub fn etp_matching(&self, predicted_ranges: &[f64]) -> Result<Matching> {
        let w = build_weight_matrix(
            &self.stats.metric_columns(&self.surviving),
            predicted_ranges,
        )?;
        let (pi, _) = optimal_matching(&w)?;
        Ok(Matching::from_vec_unchecked(
            pi.as_slice().iter().map(|&j| self.surviving[j]).collect(),
        ))
    }

    /// The matching the whole network plays this CPI.
    pub fn select(&self, predicted_ranges: Option<&[f64]>) -> Result<Matching> {
        match (self.policy, self.converged, predicted_ranges) {
            (Policy::Etp, true, Some(r)) => self.etp_matching(r),
            (Policy::Etp, true, None) => {
                Err(Error::Empty("ETP needs predicted ranges after convergence"))
            }
            _ => Ok(Matching::from_vec_unchecked(
                (0..self.n_nodes).map(|m| self.etc_step(m)).collect(),
            )),
        }
    }

    /// Folds one observation into the pair statistics.
    pub fn record_reward(&mut self, node: usize, channel: usize, sinr_db: f64, pstar_db: f64) {
        self.stats
            .record(node, channel, sinr_db, channel_metric(sinr_db, pstar_db));
    }

    /// Call once per CPI after rewards are recorded; `t` is the number of
    /// CPIs elapsed. Refines when a sweep completes.
    pub fn end_cpi(&mut self, t: usize) -> Result<Option<Refinement>> {
        if self.converged {
            return Ok(None);
        }
        if self.sequence.advance() {
            self.coordinator_refine(t).map(Some)
        } else {
            Ok(None)
        }
    }

    fn radius(&self, channel: usize, t: usize) -> f64 {
        let n = self.stats.count_total(channel);
        if n == 0 {
            return f64::INFINITY;
        }
        let ln_t = (t.max(1) as f64).ln();
        self.params.confidence_scale * (self.params.ucb_exploration * ln_t / n as f64).sqrt()
    }

    /// UCB elimination over the surviving channels, then a new sequence
    /// for phase `p + 1` (or commitment once only M channels are left).
    pub fn coordinator_refine(&mut self, t: usize) -> Result<Refinement> {
        let m = self.n_nodes;
        let scored: Vec<(usize, f64, f64)> = self
            .surviving
            .iter()
            .map(|&c| {
                let g = self.stats.network_metric(c).unwrap_or(f64::NEG_INFINITY);
                (c, g, self.radius(c, t))
            })
            .collect();

        let mut ranked = scored.clone();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let top: Vec<usize> = ranked.iter().take(m).map(|s| s.0).collect();
        let (_, g_m, c_m) = ranked[m - 1];
        let lcb = g_m - c_m;

        let mut next: Vec<usize> = scored
            .iter()
            // Unobserved channels have an infinite radius and always survive.
            .filter(|(c, g, r)| top.contains(c) || r.is_infinite() || g + r >= lcb)
            .map(|s| s.0)
            .collect();
        if next.len() < m {
            next = top;
        }
        next.sort_unstable();
        let eliminated: Vec<usize> = self
            .surviving
            .iter()
            .copied()
            .filter(|c| !next.contains(c))
            .collect();
        self.surviving = next;

        let phase = self.sequence.phase + 1;
        if self.surviving.len() == m {
            let s_hat = WeightMatrix::from_rows(self.stats.sinr_columns(&self.surviving))?;
            let (pi, _) = optimal_matching(&s_hat)?;
            let commit = pi.as_slice().iter().map(|&j| self.surviving[j]).collect();
            self.sequence = ExplorationSequence {
                matchings: vec![Matching::from_vec_unchecked(commit)],
                phase,
                steps_in_phase: 0,
            };
            self.converged = true;
            self.converged_at = Some(t);
        } else {
            self.sequence = build_exploration_sequence(&self.surviving, m, phase)?;
        }

        let bits = (m * self.surviving.len()) as u64 * self.params.feedback_scalar_bits as u64;
        self.feedback_bits += bits;
        Ok(Refinement {
            t,
            eliminated,
            surviving: self.surviving.clone(),
            converged: self.converged,
            bits,
        })
    }
}

/// Optimal matching under the true weights.
pub fn oracle_select(w_true: &WeightMatrix) -> Result<Matching> {
    optimal_matching(w_true).map(|(pi, _)| pi)
}

/// Uniformly random injective assignment of `m` nodes into `n` channels.
pub fn random_select<R: Rng + ?Sized>(rng: &mut R, m: usize, n: usize) -> Result<Matching> {
    if m > n {
        return Err(Error::Infeasible {
            nodes: m,
            channels: n,
        });
    }
    let picks = rand::seq::index::sample(rng, n, m).into_vec();
    Ok(Matching::from_vec_unchecked(picks))
}

/// W = P̄ / r̄ row-wise, with P̄ shifted by its global minimum so every
/// entry is non-negative and r̄ expressed in kilometers. Closer nodes get
/// larger weights, so the best channels go to them.
pub fn build_weight_matrix(pbar: &[Vec<f64>], rbar: &[f64]) -> Result<WeightMatrix> {
    if pbar.len() != rbar.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} metric rows but {} ranges",
            pbar.len(),
            rbar.len()
        )));
    }
    if rbar.iter().any(|&r| !(r > 0.0)) {
        return Err(Error::RangeSingularity);
    }
    let floor = pbar.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let rows = pbar
        .iter()
        .zip(rbar)
        .map(|(row, &r)| row.iter().map(|&p| (p - floor) / (r / 1000.0)).collect())
        .collect();
    WeightMatrix::from_rows(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matching::{count_matchings, enumerate_matchings, utility};
    use crate::rng::rng_for;
    use std::collections::HashMap;

    #[test]
    fn cyclic_sequence_for_two_nodes_three_channels() {
        let seq = build_exploration_sequence(&[0, 1, 2], 2, 0).unwrap();
        let got: Vec<Vec<usize>> = seq
            .matchings
            .iter()
            .map(|m| m.as_slice().to_vec())
            .collect();
        assert_eq!(got, vec![vec![0, 1], vec![1, 2], vec![2, 0]]);
        assert_eq!(seq.repeats(), 1);
        let seq3 = build_exploration_sequence(&[2, 0, 1], 2, 3).unwrap();
        assert_eq!(seq3.matchings, seq.matchings);
        assert_eq!(seq3.repeats(), 8);
        assert!(build_exploration_sequence(&[4], 2, 0).is_err());
    }

    #[test]
    fn every_pair_once_per_sweep() {
        let surviving = [1, 3, 4, 6, 7];
        let seq = build_exploration_sequence(&surviving, 4, 0).unwrap();
        let mut counts: HashMap<(usize, usize), usize> = HashMap::new();
        for pi in &seq.matchings {
            for (node, &c) in pi.as_slice().iter().enumerate() {
                *counts.entry((node, c)).or_default() += 1;
            }
            assert!(Matching::new(pi.as_slice().to_vec(), 8).is_ok());
        }
        assert_eq!(counts.len(), 4 * surviving.len());
        assert!(counts.values().all(|&k| k == 1));
    }

    #[test]
    fn cursor_walks_repeats() {
        let mut state = BanditState::new(Policy::Etc, 2, 3, BanditParams::default()).unwrap();
        // Phase 0: (0,1), (1,2), (2,0), each once.
        let mut seen = Vec::new();
        for t in 1..=3 {
            seen.push(state.etc_step(0));
            state.end_cpi(t).unwrap();
        }
        assert_eq!(seen, vec![0, 1, 2]);
        assert_eq!(state.phase(), 1);
        // Phase 1: each entry twice.
        let mut seen = Vec::new();
        for t in 4..=9 {
            seen.push(state.etc_step(1));
            state.end_cpi(t).unwrap();
        }
        assert_eq!(seen, vec![1, 1, 2, 2, 0, 0]);
    }

    #[test]
    fn running_means_match_brute_force() {
        let mut state = BanditState::new(Policy::Etc, 1, 2, BanditParams::default()).unwrap();
        let samples = [3.0, 7.5, -1.25, 4.0, 10.0];
        for (k, &s) in samples.iter().enumerate() {
            state.record_reward(0, 1, s, -2.0);
            let brute = samples[..=k].iter().sum::<f64>() / (k + 1) as f64;
            assert!((state.stats.mean_sinr_db(0, 1) - brute).abs() < 1e-12);
            assert!((state.stats.mean_metric_db(0, 1) - (brute + 2.0)).abs() < 1e-12);
        }
        assert_eq!(state.stats.count(0, 1), 5);
        assert_eq!(state.stats.count(0, 0), 0);

        let mut same = PairStats::new(1, 1);
        for _ in 0..4 {
            same.record(0, 0, 2.5, 1.0);
        }
        assert_eq!(same.mean_sinr_db(0, 0), 2.5);
    }

    fn feed(state: &mut BanditState, metric: &dyn Fn(usize, usize) -> f64, t: usize) {
        let pi = state.select(None).unwrap();
        for node in 0..state.n_nodes {
            let c = pi.channel(node);
            let m = metric(node, c);
            state.record_reward(node, c, m, 0.0);
        }
        state.end_cpi(t).unwrap();
    }

    #[test]
    fn identical_channels_are_kept() {
        let mut state = BanditState::new(Policy::Etc, 2, 4, BanditParams::default()).unwrap();
        for t in 1..=4 {
            feed(&mut state, &|_, _| 5.0, t);
        }
        assert_eq!(state.surviving, vec![0, 1, 2, 3]);
        assert!(!state.converged);
    }

    #[test]
    fn far_worse_channel_goes_first() {
        // After one sweep with 2 nodes: count_total = 2, t = 4, radius =
        // sqrt(2·ln 4 / 2) ≈ 1.18 dB, so a 30 dB deficit is decisive.
        let mut state = BanditState::new(Policy::Etc, 2, 4, BanditParams::default()).unwrap();
        let metric = |_: usize, c: usize| if c == 3 { -30.0 } else { c as f64 * 0.1 };
        for t in 1..=4 {
            feed(&mut state, &metric, t);
        }
        assert_eq!(state.surviving, vec![0, 1, 2]);
        assert_eq!(state.phase(), 1);
        // 2 nodes × 3 survivors × 32 bits.
        assert_eq!(state.feedback_bits, 192);
    }

    #[test]
    fn converges_to_optimal_sinr_matching_when_noiseless() {
        let params = BanditParams::default();
        let mut state = BanditState::new(Policy::Etc, 3, 6, params).unwrap();
        let inr = [4.0, 0.5, 12.0, 2.0, 9.0, 17.0];
        let offsets = [
            [0.1, -0.2, 0.0, 0.2, -0.1, 0.0],
            [0.0, 0.1, -0.2, 0.0, 0.2, 0.1],
            [-0.1, 0.0, 0.1, -0.2, 0.0, 0.2],
        ];
        let sinr = |m: usize, c: usize| 90.0 - inr[c] - offsets[m][c];
        let mut t = 0;
        while !state.converged && t < 2000 {
            t += 1;
            feed(&mut state, &sinr, t);
        }
        assert!(state.converged);
        assert_eq!(state.surviving, vec![0, 1, 3]);
        let truth = WeightMatrix::from_rows(
            (0..3)
                .map(|m| (0..6).map(|c| sinr(m, c)).collect())
                .collect(),
        )
        .unwrap();
        let (best, _) = optimal_matching(&truth).unwrap();
        let committed = state.select(None).unwrap();
        assert_eq!(
            utility(&truth, &committed).unwrap(),
            utility(&truth, &best).unwrap()
        );
        assert_eq!(state.sequence.matchings.len(), 1);
    }

    #[test]
    fn feedback_rate_never_rises() {
        let mut state = BanditState::new(Policy::Etc, 3, 8, BanditParams::default()).unwrap();
        let inr = [0.0, 3.0, 6.0, 9.0, 12.0, 15.0, 18.0, 21.0];
        let mut rates = Vec::new();
        let mut t = 0;
        while !state.converged {
            let len = state.sequence.sweep_len();
            let mut r = None;
            for _ in 0..len {
                t += 1;
                let pi = state.select(None).unwrap();
                for n in 0..3 {
                    state.record_reward(n, pi.channel(n), 80.0 - inr[pi.channel(n)], 0.0);
                }
                r = state.end_cpi(t).unwrap();
            }
            rates.push(r.unwrap().bits as f64 / len as f64);
        }
        assert!(rates.windows(2).all(|w| w[1] <= w[0]), "{rates:?}");
    }

    #[test]
    fn weight_matrix_shift_and_scaling() {
        let pbar = vec![vec![10.0, 4.0, 6.0], vec![10.0, 4.0, 6.0]];
        let w = build_weight_matrix(&pbar, &[2000.0, 500.0]).unwrap();
        assert_eq!(w.row(0), &[3.0, 0.0, 1.0]);
        assert_eq!(w.row(1), &[12.0, 0.0, 4.0]);
        // Equal rows: the near node gets the best channel.
        let (pi, _) = optimal_matching(&w).unwrap();
        assert_eq!(pi.as_slice(), &[2, 0]);
        // Uniform shift of P̄ leaves W untouched.
        let shifted: Vec<Vec<f64>> = pbar
            .iter()
            .map(|r| r.iter().map(|p| p + 7.25).collect())
            .collect();
        assert_eq!(build_weight_matrix(&shifted, &[2000.0, 500.0]).unwrap(), w);
        assert!(matches!(
            build_weight_matrix(&pbar, &[0.0, 1.0]),
            Err(Error::RangeSingularity)
        ));
    }

    #[test]
    fn equal_ranges_reduce_to_metric_optimum() {
        let pbar = vec![
            vec![3.0, 9.0, 1.0, 5.0],
            vec![2.0, 8.5, 0.0, 7.0],
            vec![4.0, 1.0, 6.0, 2.0],
        ];
        let w = build_weight_matrix(&pbar, &[700.0; 3]).unwrap();
        let p = WeightMatrix::from_rows(pbar).unwrap();
        assert_eq!(
            optimal_matching(&w).unwrap().0,
            optimal_matching(&p).unwrap().0
        );
    }

    #[test]
    fn best_channel_follows_the_target() {
        // Two nodes with identical metric rows; the target moves from node
        // 0's side to node 1's side. Brute-force the optimum on both sides.
        let pbar = vec![vec![20.0, 12.0, 5.0], vec![20.0, 12.0, 5.0]];
        for (r, near) in [([100.0, 900.0], 0usize), ([900.0, 100.0], 1usize)] {
            let w = build_weight_matrix(&pbar, &r).unwrap();
            let brute = enumerate_matchings(2, 3)
                .unwrap()
                .into_iter()
                .max_by(|a, b| utility(&w, a).unwrap().total_cmp(&utility(&w, b).unwrap()))
                .unwrap();
            assert_eq!(brute.channel(near), 0);
            assert_eq!(oracle_select(&w).unwrap(), brute);
        }
    }

    #[test]
    fn oracle_tracks_relabeled_rows() {
        let rows = vec![vec![1.0, 5.0, 2.0], vec![4.0, 0.0, 3.0]];
        let a = oracle_select(&WeightMatrix::from_rows(rows.clone()).unwrap()).unwrap();
        let b = oracle_select(
            &WeightMatrix::from_rows(vec![rows[1].clone(), rows[0].clone()]).unwrap(),
        )
        .unwrap();
        assert_eq!(a.as_slice(), &[b.channel(1), b.channel(0)]);
    }

    #[test]
    fn random_matchings_are_uniform() {
        let (m, n) = (2, 4);
        let all = enumerate_matchings(m, n).unwrap();
        let k = count_matchings(m, n) as f64;
        let mut rng = rng_for(8, &[]);
        let draws = 100_000;
        let mut hist: HashMap<Matching, usize> = HashMap::new();
        for _ in 0..draws {
            let pi = random_select(&mut rng, m, n).unwrap();
            assert!(Matching::new(pi.as_slice().to_vec(), n).is_ok());
            *hist.entry(pi).or_default() += 1;
        }
        let p = 1.0 / k;
        let sd = (draws as f64 * p * (1.0 - p)).sqrt();
        for pi in &all {
            let c = *hist.get(pi).unwrap_or(&0) as f64;
            assert!((c - draws as f64 * p).abs() < 4.0 * sd, "{pi}: {c}");
        }
        assert!(random_select(&mut rng, 3, 2).is_err());
    }

    #[test]
    fn single_node_random_choice_covers_all_channels() {
        let mut rng = rng_for(4, &[]);
        let mut seen = [false; 5];
        for _ in 0..500 {
            seen[random_select(&mut rng, 1, 5).unwrap().channel(0)] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn etp_matches_etc_while_exploring() {
        let etc = BanditState::new(Policy::Etc, 3, 5, BanditParams::default()).unwrap();
        let mut etp = etc.clone();
        etp.policy = Policy::Etp;
        for node in 0..3 {
            assert_eq!(
                etp.etp_step(node, &[1.0, 2.0, 3.0]).unwrap(),
                etc.etc_step(node)
            );
        }
    }

    #[test]
    fn policy_names_round_trip() {
        for p in Policy::ALL {
            assert_eq!(p.name().parse::<Policy>().unwrap(), p);
        }
        assert!("ucb".parse::<Policy>().is_err());
    }
}
