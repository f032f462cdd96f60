//! The per-CPI simulation loop and Monte-Carlo batching.
//!
//! Each run index owns a [`World`]: node geometry, channel table and a
//! noise seed. All policies in a batch see the same world for the same run
//! index, and the measurement noise for a given (node, channel, CPI) is
//! drawn from its own keyed stream, so policy comparisons are paired.

use rayon::prelude::*;

use crate::bandits::{oracle_select, random_select, BanditState, Policy, Refinement};
use crate::error::Result;
use crate::matching::{instant_regret, Matching, WeightMatrix};
use crate::rf::{
    echo_power_db, generate_measurement, sample_channel_table, ChannelTable, Measurement,
};
use crate::rng::{derive_seed, rng_for, stream, SimRng};
use crate::scene::{place_nodes, Scene};
use crate::sim::config::ScenarioConfig;
use crate::sim::io::CpiRecord;
use crate::tracking::{
    fuse, kf_predict, kf_update, kf_update_radial_velocity, node_position_estimate,
    predicted_ranges, TrackState,
};

/// Everything about one run that does not depend on the policy.
#[derive(Debug, Clone)]
pub struct World<'a> {
    pub cfg: &'a ScenarioConfig,
    pub run: usize,
    pub scene: Scene,
    pub table: ChannelTable,
    /// Ground-truth `M × N` channel metrics.
    pub true_metric: Vec<Vec<f64>>,
    noise_seed: u64,
}

impl<'a> World<'a> {
    pub fn build(cfg: &'a ScenarioConfig, run: usize) -> Result<Self> {
        let m = cfg.scene.n_nodes;
        let mut scene_rng = rng_for(cfg.seed, &[run as u64, stream::SCENE]);
        let nodes = place_nodes(&mut scene_rng, m, cfg.scene.area())?;
        let scene = Scene::new(nodes, cfg.scene.target(), cfg.scene.area())?;

        let mut table_rng = rng_for(cfg.seed, &[run as u64, stream::CHANNELS]);
        let table = sample_channel_table(
            &mut table_rng,
            &cfg.rf,
            m,
            cfg.rf.interference_spread_db,
            cfg.rf.offset_scale_db,
        )?;
        let true_metric = table.true_metric_matrix(scene.target.rcs_db(), &cfg.rf);
        Ok(Self {
            cfg,
            run,
            scene,
            table,
            true_metric,
            noise_seed: derive_seed(cfg.seed, &[run as u64, stream::NOISE]),
        })
    }

    /// Noise stream for one (node, channel, CPI) triple.
    pub fn noise_rng(&self, node: usize, channel: usize, cpi: usize) -> SimRng {
        rng_for(self.noise_seed, &[node as u64, channel as u64, cpi as u64])
    }

    /// Weights the oracle optimizes and regret is scored against.
    pub fn true_weights(&self, true_ranges: &[f64]) -> Result<WeightMatrix> {
        crate::bandits::build_weight_matrix(&self.true_metric, true_ranges)
    }
}

/// Mutable per-(run, policy) state carried between CPIs.
#[derive(Debug, Clone)]
pub struct PolicyRunner {
    pub policy: Policy,
    pub bandit: Option<BanditState>,
    pub track: Option<TrackState>,
    pub cum_regret: f64,
    /// Smallest correlation-matrix eigenvalue of the track covariance seen so far.
    pub min_cov_correlation_eigenvalue: f64,
    /// CPIs after which the track covariance failed a Cholesky factorization.
    pub non_pd_steps: usize,
    pub refinements: Vec<Refinement>,
    rng: SimRng,
}

impl PolicyRunner {
    pub fn new(world: &World<'_>, policy: Policy) -> Result<Self> {
        let cfg = world.cfg;
        let bandit = if policy.is_learning() {
            Some(BanditState::new(
                policy,
                cfg.scene.n_nodes,
                cfg.rf.n_channels,
                cfg.bandit.clone(),
            )?)
        } else {
            None
        };
        Ok(Self {
            policy,
            bandit,
            track: None,
            cum_regret: 0.0,
            min_cov_correlation_eigenvalue: f64::INFINITY,
            non_pd_steps: 0,
            refinements: Vec::new(),
            rng: rng_for(cfg.seed, &[world.run as u64, stream::POLICY, policy.id()]),
        })
    }

    fn select(&mut self, world: &World<'_>, w_true: &WeightMatrix) -> Result<Matching> {
        let cfg = world.cfg;
        match self.policy {
            Policy::Oracle => oracle_select(w_true),
            Policy::Random => random_select(&mut self.rng, cfg.scene.n_nodes, cfg.rf.n_channels),
            Policy::Etc | Policy::Etp => {
                let bandit = self.bandit.as_ref().expect("learning policy has state");
                let predicted = match (self.policy, bandit.converged, &self.track) {
                    (Policy::Etp, true, Some(track)) => Some(predicted_ranges(
                        track,
                        &world.scene.nodes,
                        cfg.tracking.lookahead,
                        cfg.rf.cpi_duration_s,
                    )),
                    _ => None,
                };
                bandit.select(predicted.as_deref())
            }
        }
    }
}

/// Executes CPI `t`: selection, measurement, localization, fusion,
/// filtering, reward bookkeeping and, at the end of a sweep, coordinator
/// refinement. Regret is scored against the ground-truth weights.
pub fn run_cpi(world: &World<'_>, runner: &mut PolicyRunner, t: usize) -> Result<CpiRecord> {
    let cfg = world.cfg;
    let rf = &cfg.rf;
    let dt = rf.cpi_duration_s;
    let truth = world.scene.target_midpoint(t, dt);
    let true_ranges = world.scene.true_ranges(&truth.position);
    let w_true = world.true_weights(&true_ranges)?;

    let pi = runner.select(world, &w_true)?;

    let measurements: Vec<Measurement> = (0..cfg.scene.n_nodes)
        .map(|node| {
            let channel = pi.channel(node);
            let mut rng = world.noise_rng(node, channel, t);
            generate_measurement(node, channel, &world.scene, t, &world.table, rf, &mut rng)
        })
        .collect::<Result<_>>()?;

    let fixes: Vec<_> = measurements
        .iter()
        .map(|m| node_position_estimate(m, &world.scene.nodes[m.node]))
        .collect();
    let fused = fuse(&fixes)?;

    let mut track = match &runner.track {
        None => TrackState::initialize(&fused, cfg.tracking.init_velocity_std_mps),
        Some(prev) => kf_update(&kf_predict(prev, dt, cfg.tracking.process_noise), &fused)?,
    };
    if cfg.tracking.use_radial_velocity {
        for m in &measurements {
            track = kf_update_radial_velocity(&track, &world.scene.nodes[m.node], m);
        }
    }
    runner.min_cov_correlation_eigenvalue = runner
        .min_cov_correlation_eigenvalue
        .min(track.min_correlation_eigenvalue());
    if !track.is_positive_definite() {
        runner.non_pd_steps += 1;
    }
    runner.track = Some(track);

    if let Some(bandit) = runner.bandit.as_mut() {
        for m in &measurements {
            let pstar = echo_power_db(m.range_est, rf, m.channel)?;
            bandit.record_reward(m.node, m.channel, m.sinr_db, pstar);
        }
        if let Some(r) = bandit.end_cpi(t + 1)? {
            runner.refinements.push(r);
        }
    }

    let regret = instant_regret(&w_true, &pi)?;
    runner.cum_regret += regret;

    let est = track.position();
    Ok(CpiRecord {
        run: world.run,
        cpi: t,
        policy: runner.policy,
        channels: pi.into_vec(),
        sinrs_db: measurements.iter().map(|m| m.sinr_db).collect(),
        est: [est.x, est.y],
        truth: [truth.position.x, truth.position.y],
        error_m: (est - truth.position).norm(),
        regret,
        cum_regret: runner.cum_regret,
        feedback_bits: runner.bandit.as_ref().map_or(0, |b| b.feedback_bits),
        converged: runner.bandit.as_ref().is_some_and(|b| b.converged),
    })
}

/// One policy over one run, plus the end-of-run state the log omits.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub run: usize,
    pub policy: Policy,
    pub records: Vec<CpiRecord>,
    pub table: ChannelTable,
    pub scene: Scene,
    pub true_metric: Vec<Vec<f64>>,
    pub bandit: Option<BanditState>,
    pub refinements: Vec<Refinement>,
    pub min_cov_correlation_eigenvalue: f64,
    pub non_pd_steps: usize,
}

pub fn run_single(cfg: &ScenarioConfig, run: usize, policy: Policy) -> Result<RunOutcome> {
    let world = World::build(cfg, run)?;
    let mut runner = PolicyRunner::new(&world, policy)?;
    let records = (0..cfg.n_cpis)
        .map(|t| run_cpi(&world, &mut runner, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(RunOutcome {
        run,
        policy,
        records,
        table: world.table.clone(),
        scene: world.scene.clone(),
        true_metric: world.true_metric.clone(),
        bandit: runner.bandit,
        refinements: runner.refinements,
        min_cov_correlation_eigenvalue: runner.min_cov_correlation_eigenvalue,
        non_pd_steps: runner.non_pd_steps,
    })
}

/// Every (run, policy) pair, executed in parallel, returned run-major in
/// the configured policy order.
pub fn run_batch(cfg: &ScenarioConfig) -> Result<Vec<RunOutcome>> {
    cfg.validate()?;
    let jobs: Vec<(usize, Policy)> = (0..cfg.n_runs)
        .flat_map(|run| cfg.policies.iter().map(move |&p| (run, p)))
        .collect();
    jobs.into_par_iter()
        .map(|(run, policy)| run_single(cfg, run, policy))
        .collect()
}

/// Flattened CPI log of [`run_batch`].
pub fn run_monte_carlo(cfg: &ScenarioConfig) -> Result<Vec<CpiRecord>> {
    Ok(run_batch(cfg)?
        .into_iter()
        .flat_map(|o| o.records)
        .collect())
}
