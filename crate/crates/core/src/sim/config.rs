//! Scenario configuration (TOML).
//!
//! Every key is optional; missing keys take the defaults below, which
//! describe five nodes in a 1 km square, eight channels between 2.4 and
//! 2.5 GHz, and a 100 m² target crossing the square diagonally at
//! 200 m/s for 700 CPIs. See `docs/config.md` for the key reference.

use std::path::{Path, PathBuf};

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::bandits::{BanditParams, Policy};
use crate::error::{Error, Result};
use crate::rf::RfParams;
use crate::scene::TargetState;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub n_cpis: usize,
    pub n_runs: usize,
    pub policies: Vec<Policy>,
    pub output_dir: PathBuf,
    /// Trailing CPIs per run used for the post-convergence ECDF.
    pub tail_window: usize,
    pub scene: SceneConfig,
    pub rf: RfParams,
    pub tracking: TrackingConfig,
    pub bandit: BanditParams,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            n_cpis: 700,
            n_runs: 30,
            policies: Policy::ALL.to_vec(),
            output_dir: PathBuf::from("out"),
            tail_window: 300,
            scene: SceneConfig::default(),
            rf: RfParams::default(),
            tracking: TrackingConfig::default(),
            bandit: BanditParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneConfig {
    pub n_nodes: usize,
    pub area_m: [f64; 2],
    pub target_start_m: [f64; 2],
    /// The target flies from `target_start_m` towards this point.
    pub target_towards_m: [f64; 2],
    pub target_speed_mps: f64,
    pub target_rcs_m2: f64,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            n_nodes: 5,
            area_m: [1000.0, 1000.0],
            target_start_m: [0.0, 0.0],
            target_towards_m: [1000.0, 1000.0],
            target_speed_mps: 200.0,
            target_rcs_m2: 100.0,
        }
    }
}

impl SceneConfig {
    pub fn area(&self) -> Vector2<f64> {
        Vector2::new(self.area_m[0], self.area_m[1])
    }

    pub fn target(&self) -> TargetState {
        TargetState::heading(
            Vector2::from(self.target_start_m),
            Vector2::from(self.target_towards_m),
            self.target_speed_mps,
            self.target_rcs_m2,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackingConfig {
    /// White-acceleration intensity q, m²/s³.
    pub process_noise: f64,
    pub init_velocity_std_mps: f64,
    /// CPIs ahead the ETP range prediction extrapolates.
    pub lookahead: usize,
    /// Also feed per-node radial velocities to the filter.
    pub use_radial_velocity: bool,
}

impl Default for TrackingConfig {
    fn default() -> Self {
        Self {
            process_noise: 1.0,
            init_velocity_std_mps: 50.0,
            lookahead: 1,
            use_radial_velocity: false,
        }
    }
}

/// Command-line overrides applied on top of a loaded file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub n_runs: Option<usize>,
    pub policies: Option<Vec<Policy>>,
    pub output_dir: Option<PathBuf>,
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if let Some(n) = o.n_runs {
            self.n_runs = n;
        }
        if let Some(p) = &o.policies {
            self.policies = p.clone();
        }
        if let Some(d) = &o.output_dir {
            self.output_dir = d.clone();
        }
    }

    /// Checks every constraint and reports all violations at once.
    pub fn validate(&self) -> Result<()> {
        let mut issues = Vec::new();
        if self.n_cpis == 0 {
            issues.push("n_cpis must be at least 1".to_string());
        }
        if self.n_runs == 0 {
            issues.push("n_runs must be at least 1".to_string());
        }
        if self.policies.is_empty() {
            issues.push("policies must name at least one policy".to_string());
        }
        let mut sorted = self.policies.clone();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            issues.push("policies must not repeat".to_string());
        }
        if self.tail_window == 0 {
            issues.push("tail_window must be at least 1".to_string());
        }

        let s = &self.scene;
        if s.n_nodes == 0 {
            issues.push("scene.n_nodes must be at least 1".to_string());
        }
        if s.n_nodes > self.rf.n_channels {
            issues.push(format!(
                "scene.n_nodes = {} exceeds rf.n_channels = {}; every node needs its own channel",
                s.n_nodes, self.rf.n_channels
            ));
        }
        if !s.area_m.iter().all(|&a| a > 0.0 && a.is_finite()) {
            issues.push("scene.area_m must be positive in both axes".to_string());
        }
        if !(s.target_speed_mps >= 0.0) {
            issues.push("scene.target_speed_mps must be non-negative".to_string());
        }
        if !(s.target_rcs_m2 > 0.0) {
            issues.push("scene.target_rcs_m2 must be positive".to_string());
        }

        issues.extend(self.rf.issues());

        let t = &self.tracking;
        if !(t.process_noise >= 0.0) {
            issues.push("tracking.process_noise must be non-negative".to_string());
        }
        if !(t.init_velocity_std_mps > 0.0) {
            issues.push("tracking.init_velocity_std_mps must be positive".to_string());
        }

        let b = &self.bandit;
        if !(b.ucb_exploration > 0.0) {
            issues.push("bandit.ucb_exploration must be positive".to_string());
        }
        if !(b.confidence_scale >= 0.0) {
            issues.push("bandit.confidence_scale must be non-negative".to_string());
        }
        if b.feedback_scalar_bits == 0 {
            issues.push("bandit.feedback_scalar_bits must be at least 1".to_string());
        }

        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::ConfigIssues(issues))
        }
    }
}

/// Reads, defaults and validates a scenario file.
pub fn load_config(path: impl AsRef<Path>) -> Result<ScenarioConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let cfg = ScenarioConfig::from_toml_str(&text)
        .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
    cfg.validate()?;
    Ok(cfg)
}
