//! RF environment: channel plan, interference, the radar range equation,
//! observed SINR, the range-free channel metric and SINR-dependent
//! measurement noise.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scene::Scene;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Rejection-sampling budget for [`sample_channel_table`].
const MAX_TABLE_ATTEMPTS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RfParams {
    pub tx_power_dbw: f64,
    pub antenna_gain_db: f64,
    pub band_low_hz: f64,
    pub band_high_hz: f64,
    pub n_channels: usize,
    pub chirp_bandwidth_hz: f64,
    pub pulses_per_cpi: u32,
    pub cpi_duration_s: f64,
    pub noise_psd_dbw_hz: f64,
    /// Angle-noise constant: σ_θ = beamwidth_const / sqrt(2·SINR).
    pub beamwidth_const_rad: f64,
    /// Multiplies every measurement standard deviation; 0 disables noise.
    pub noise_scale: f64,
    /// INRs are drawn on `[0, interference_spread_db]`.
    pub interference_spread_db: f64,
    /// Half-width of the per-node INR perturbation.
    pub offset_scale_db: f64,
}

impl Default for RfParams {
    fn default() -> Self {
        Self {
            tx_power_dbw: 20.0,
            antenna_gain_db: 30.0,
            band_low_hz: 2.4e9,
            band_high_hz: 2.5e9,
            n_channels: 8,
            chirp_bandwidth_hz: 100e6,
            pulses_per_cpi: 1000,
            cpi_duration_s: 0.01,
            noise_psd_dbw_hz: -204.0,
            beamwidth_const_rad: 0.05,
            noise_scale: 1.0,
            interference_spread_db: 20.0,
            offset_scale_db: 0.25,
        }
    }
}

impl RfParams {
    /// Problems with these parameters, one message per offending key.
    pub fn issues(&self) -> Vec<String> {
        let mut issues = Vec::new();
        if !(self.band_high_hz > self.band_low_hz && self.band_low_hz > 0.0) {
            issues.push("rf.band_high_hz must exceed rf.band_low_hz > 0".to_string());
        }
        if self.n_channels == 0 {
            issues.push("rf.n_channels must be at least 1".to_string());
        }
        if !(self.chirp_bandwidth_hz > 0.0) {
            issues.push("rf.chirp_bandwidth_hz must be positive".to_string());
        }
        if self.pulses_per_cpi == 0 {
            issues.push("rf.pulses_per_cpi must be at least 1".to_string());
        }
        if !(self.cpi_duration_s > 0.0) {
            issues.push("rf.cpi_duration_s must be positive".to_string());
        }
        if !(self.beamwidth_const_rad > 0.0) {
            issues.push("rf.beamwidth_const_rad must be positive".to_string());
        }
        if !(self.noise_scale >= 0.0) {
            issues.push("rf.noise_scale must be non-negative".to_string());
        }
        if !(self.interference_spread_db >= 0.0) {
            issues.push("rf.interference_spread_db must be non-negative".to_string());
        }
        if !(self.offset_scale_db >= 0.0) {
            issues.push("rf.offset_scale_db must be non-negative".to_string());
        } else if self.n_channels > 1 && self.band_high_hz > self.band_low_hz {
            let gap = 2.0 * self.offset_scale_db + self.wavelength_spread_db();
            if (self.n_channels - 1) as f64 * gap >= self.interference_spread_db {
                issues.push(format!(
                    "rf.interference_spread_db = {} cannot fit {} channels {:.3} dB apart; widen the spread or shrink rf.offset_scale_db",
                    self.interference_spread_db, self.n_channels, gap
                ));
            }
        }
        issues
    }

    pub fn validate(&self) -> Result<()> {
        let issues = self.issues();
        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::ConfigIssues(issues))
        }
    }

    pub fn channel_bandwidth_hz(&self) -> f64 {
        (self.band_high_hz - self.band_low_hz) / self.n_channels as f64
    }

    /// Channels split the band into equal slices; this is the slice center.
    pub fn center_freq_hz(&self, channel: usize) -> f64 {
        self.band_low_hz + self.channel_bandwidth_hz() * (channel as f64 + 0.5)
    }

    pub fn wavelength_m(&self, channel: usize) -> f64 {
        SPEED_OF_LIGHT / self.center_freq_hz(channel)
    }

    pub fn noise_floor_dbw(&self) -> f64 {
        self.noise_psd_dbw_hz + 10.0 * self.channel_bandwidth_hz().log10()
    }

    pub fn integration_gain_db(&self) -> f64 {
        10.0 * (self.pulses_per_cpi as f64).log10()
    }

    /// Spread of 20·log10(λ) across the channel plan. Echo power depends on
    /// λ², so this is how far the radar equation alone can reorder channels.
    pub fn wavelength_spread_db(&self) -> f64 {
        if self.n_channels < 2 {
            return 0.0;
        }
        20.0 * (self.center_freq_hz(self.n_channels - 1) / self.center_freq_hz(0)).log10()
    }
}

/// Echo power normalized by RCS, P* = P_t G² λ² / ((4π)³ r⁴), in dB.
pub fn echo_power_db(range: f64, rf: &RfParams, channel: usize) -> Result<f64> {
    if !(range > 0.0) {
        return Err(Error::RangeSingularity);
    }
    let pt = 10f64.powf(rf.tx_power_dbw / 10.0);
    let g = 10f64.powf(rf.antenna_gain_db / 10.0);
    let lambda = rf.wavelength_m(channel);
    let p = pt * g * g * lambda * lambda / ((4.0 * PI).powi(3) * range.powi(4));
    Ok(10.0 * p.log10())
}

/// Range-free channel metric P_c = SINR_dB − P*_dB.
pub fn channel_metric(sinr_db: f64, pstar_db: f64) -> f64 {
    sinr_db - pstar_db
}

/// Interference table, frozen for a run.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelTable {
    pub center_freq_hz: Vec<f64>,
    /// Network-wide interference-to-noise ratio per channel.
    pub inr_db: Vec<f64>,
    /// `node_offsets[m][n]`: node-local deviation from `inr_db[n]`.
    pub node_offsets: Vec<Vec<f64>>,
}

impl ChannelTable {
    pub fn n_channels(&self) -> usize {
        self.inr_db.len()
    }

    pub fn n_nodes(&self) -> usize {
        self.node_offsets.len()
    }

    /// Interference-plus-noise over noise seen by `node` on `channel`, dB.
    pub fn local_inr_db(&self, node: usize, channel: usize) -> f64 {
        self.inr_db[channel] + self.node_offsets[node][channel]
    }

    /// Ground-truth channel metric for a node/channel pair.
    pub fn true_metric_db(&self, node: usize, channel: usize, rcs_db: f64, rf: &RfParams) -> f64 {
        rcs_db + rf.integration_gain_db() - rf.noise_floor_dbw() - self.local_inr_db(node, channel)
    }

    /// Full `M × N` matrix of [`Self::true_metric_db`].
    pub fn true_metric_matrix(&self, rcs_db: f64, rf: &RfParams) -> Vec<Vec<f64>> {
        (0..self.n_nodes())
            .map(|m| {
                (0..self.n_channels())
                    .map(|n| self.true_metric_db(m, n, rcs_db, rf))
                    .collect()
            })
            .collect()
    }

    /// Channels ordered from least to most interference.
    pub fn network_ranking(&self) -> Vec<usize> {
        rank_ascending(&self.inr_db)
    }

    pub fn node_ranking(&self, node: usize) -> Vec<usize> {
        let q: Vec<f64> = (0..self.n_channels())
            .map(|n| self.local_inr_db(node, n))
            .collect();
        rank_ascending(&q)
    }
}

fn rank_ascending(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    idx
}

/// Draws a channel table whose per-node rankings all agree with the
/// network ranking.
///
/// INRs are uniform on `[0, spread]`, resampled until every pairwise gap
/// exceeds `2·offset_scale` plus the wavelength spread of the band; node
/// offsets are uniform on `[−offset_scale, offset_scale]`.
pub fn sample_channel_table<R: Rng + ?Sized>(
    rng: &mut R,
    rf: &RfParams,
    m: usize,
    interference_spread_db: f64,
    offset_scale_db: f64,
) -> Result<ChannelTable> {
    let n = rf.n_channels;
    if n == 0 || m == 0 {
        return Err(Error::InvalidConfig(
            "channel table needs nodes and channels".into(),
        ));
    }
    if !(interference_spread_db >= 0.0) || !(offset_scale_db >= 0.0) {
        return Err(Error::InvalidConfig(
            "interference spread and offset scale must be non-negative".into(),
        ));
    }
    let min_gap = 2.0 * offset_scale_db + rf.wavelength_spread_db();
    if n > 1 && (n - 1) as f64 * min_gap >= interference_spread_db {
        return Err(Error::InvalidConfig(format!(
            "{n} channels cannot keep {min_gap:.3} dB gaps inside a {interference_spread_db} dB spread"
        )));
    }

    let mut inr_db = vec![0.0; n];
    let mut accepted = false;
    for _ in 0..MAX_TABLE_ATTEMPTS {
        for v in inr_db.iter_mut() {
            *v = rng.random_range(0.0..=interference_spread_db);
        }
        let mut sorted = inr_db.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).all(|w| w[1] - w[0] > min_gap) {
            accepted = true;
            break;
        }
    }
    if !accepted {
        return Err(Error::InvalidConfig(format!(
            "no channel table with {min_gap:.3} dB gaps found in {MAX_TABLE_ATTEMPTS} draws"
        )));
    }

    let node_offsets = (0..m)
        .map(|_| {
            (0..n)
                .map(|_| {
                    if offset_scale_db > 0.0 {
                        rng.random_range(-offset_scale_db..=offset_scale_db)
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();

    Ok(ChannelTable {
        center_freq_hz: (0..n).map(|c| rf.center_freq_hz(c)).collect(),
        inr_db,
        node_offsets,
    })
}

/// SINR observed by `node` on `channel` for a target at `range` after
/// coherent integration over the CPI.
pub fn observed_sinr(
    node: usize,
    channel: usize,
    range: f64,
    rcs_db: f64,
    table: &ChannelTable,
    rf: &RfParams,
) -> Result<f64> {
    let pstar = echo_power_db(range, rf, channel)?;
    Ok(
        pstar + rcs_db - rf.noise_floor_dbw() + rf.integration_gain_db()
            - table.local_inr_db(node, channel),
    )
}

/// Per-CPI estimate produced by one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    pub node: usize,
    pub channel: usize,
    pub cpi: usize,
    pub range_est: f64,
    pub radial_velocity_est: f64,
    pub azimuth_est: f64,
    pub sinr_db: f64,
    pub range_std: f64,
    pub azimuth_std: f64,
    pub radial_velocity_std: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementStd {
    pub range: f64,
    pub azimuth: f64,
    pub radial_velocity: f64,
}

/// Inverse-square-root-SINR accuracy of range, angle and Doppler estimates.
pub fn measurement_std(sinr_db: f64, channel: usize, rf: &RfParams) -> MeasurementStd {
    let root = (2.0 * 10f64.powf(sinr_db / 10.0)).sqrt();
    let s = rf.noise_scale;
    MeasurementStd {
        range: s * SPEED_OF_LIGHT / (2.0 * rf.chirp_bandwidth_hz * root),
        azimuth: s * rf.beamwidth_const_rad / root,
        radial_velocity: s * rf.wavelength_m(channel) / (2.0 * rf.cpi_duration_s * root),
    }
}

/// Simulates what `node` measures on `channel` during CPI `t`.
///
/// The truth is the target state at the CPI midpoint. Noise is Gaussian
/// with the standard deviations of [`measurement_std`]; the reported SINR
/// is exact.
#[allow(clippy::too_many_arguments)]
pub fn generate_measurement<R: Rng + ?Sized>(
    node: usize,
    channel: usize,
    scene: &Scene,
    t: usize,
    table: &ChannelTable,
    rf: &RfParams,
    rng: &mut R,
) -> Result<Measurement> {
    let target = scene.target_midpoint(t, rf.cpi_duration_s);
    let offset = target.position - scene.nodes[node];
    let range = offset.norm();
    let sinr_db = observed_sinr(node, channel, range, target.rcs_db(), table, rf)?;
    let std = measurement_std(sinr_db, channel, rf);

    let azimuth = offset.y.atan2(offset.x);
    let radial_velocity = offset.dot(&target.velocity) / range;

    let dr: f64 = rng.sample(StandardNormal);
    let da: f64 = rng.sample(StandardNormal);
    let dv: f64 = rng.sample(StandardNormal);

    Ok(Measurement {
        node,
        channel,
        cpi: t,
        range_est: (range + std.range * dr).max(0.0),
        radial_velocity_est: radial_velocity + std.radial_velocity * dv,
        azimuth_est: azimuth + std.azimuth * da,
        sinr_db,
        range_std: std.range,
        azimuth_std: std.azimuth,
        radial_velocity_std: std.radial_velocity,
    })
}
