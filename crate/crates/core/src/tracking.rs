//! Per-node localization, coordinator fusion and the network's
//! constant-velocity Kalman filter.

use nalgebra::{Matrix2, Matrix2x4, Matrix4, RowVector4, Vector2, Vector4};

use crate::error::{Error, Result};
use crate::rf::Measurement;
use crate::scene::{true_ranges, Position};

/// Diagonal loading applied to singular covariances, m².
pub const REGULARIZATION: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionEstimate {
    pub position: Position,
    pub covariance: Matrix2<f64>,
}

/// Filter state `[x, y, vx, vy]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackState {
    pub state: Vector4<f64>,
    pub covariance: Matrix4<f64>,
}

impl TrackState {
    /// Starts a track at a fused fix with zero velocity.
    pub fn initialize(fix: &PositionEstimate, velocity_std: f64) -> Self {
        let mut covariance = Matrix4::zeros();
        covariance
            .fixed_view_mut::<2, 2>(0, 0)
            .copy_from(&fix.covariance);
        covariance[(2, 2)] = velocity_std * velocity_std;
        covariance[(3, 3)] = velocity_std * velocity_std;
        Self {
            state: Vector4::new(fix.position.x, fix.position.y, 0.0, 0.0),
            covariance,
        }
    }

    pub fn position(&self) -> Position {
        Vector2::new(self.state[0], self.state[1])
    }

    pub fn velocity(&self) -> Vector2<f64> {
        Vector2::new(self.state[2], self.state[3])
    }

    pub fn position_trace(&self) -> f64 {
        self.covariance[(0, 0)] + self.covariance[(1, 1)]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.covariance
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Smallest eigenvalue of the correlation matrix D^-1/2 P D^-1/2.
    ///
    /// Position and velocity variances can differ by more than the f64
    /// mantissa, so the raw spectrum cannot resolve definiteness; the
    /// correlation spectrum is scale-free. `-inf` for a non-positive
    /// diagonal.
    pub fn min_correlation_eigenvalue(&self) -> f64 {
        let d = self.covariance.diagonal();
        if d.iter().any(|&v| !(v > 0.0)) {
            return f64::NEG_INFINITY;
        }
        let scale = Matrix4::from_diagonal(&d.map(|v| 1.0 / v.sqrt()));
        (scale * self.covariance * scale)
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_positive_definite(&self) -> bool {
        self.covariance.cholesky().is_some()
    }
}

/// Converts a node's range/azimuth estimate into a Cartesian fix with a
/// first-order propagated covariance.
pub fn node_position_estimate(meas: &Measurement, node: &Position) -> PositionEstimate {
    let (s, c) = meas.azimuth_est.sin_cos();
    let r = meas.range_est;
    let position = node + Vector2::new(c, s) * r;
    let jacobian = Matrix2::new(c, -r * s, s, r * c);
    let polar = Matrix2::new(
        meas.range_std * meas.range_std,
        0.0,
        0.0,
        meas.azimuth_std * meas.azimuth_std,
    );
    let covariance = symmetrize2(jacobian * polar * jacobian.transpose());
    PositionEstimate {
        position,
        covariance,
    }
}

fn symmetrize2(m: Matrix2<f64>) -> Matrix2<f64> {
    (m + m.transpose()) * 0.5
}

fn symmetrize4(m: Matrix4<f64>) -> Matrix4<f64> {
    (m + m.transpose()) * 0.5
}

/// Returns `cov` if it is positive-definite, otherwise `cov + ε·I`.
fn regularized(cov: &Matrix2<f64>) -> Matrix2<f64> {
    if cov.cholesky().is_some() {
        *cov
    } else {
        cov + Matrix2::identity() * REGULARIZATION
    }
}

fn inverse_pd(cov: &Matrix2<f64>) -> Result<Matrix2<f64>> {
    cov.cholesky()
        .map(|c| c.inverse())
        .ok_or_else(|| Error::DimensionMismatch("covariance is not positive-definite".into()))
}

/// Inverse-covariance weighted combination of node fixes.
pub fn fuse(estimates: &[PositionEstimate]) -> Result<PositionEstimate> {
    match estimates {
        [] => Err(Error::Empty("fuse needs at least one estimate")),
        [only] => Ok(PositionEstimate {
            position: only.position,
            covariance: regularized(&only.covariance),
        }),
        _ => {
            let mut info = Matrix2::zeros();
            let mut info_pos = Vector2::zeros();
            for e in estimates {
                let inv = inverse_pd(&regularized(&e.covariance))?;
                info += inv;
                info_pos += inv * e.position;
            }
            let covariance = symmetrize2(inverse_pd(&symmetrize2(info))?);
            Ok(PositionEstimate {
                position: covariance * info_pos,
                covariance,
            })
        }
    }
}

fn transition(dt: f64) -> Matrix4<f64> {
    let mut f = Matrix4::identity();
    f[(0, 2)] = dt;
    f[(1, 3)] = dt;
    f
}

/// White-acceleration process noise for one step of length `dt`.
fn process_noise(dt: f64, q: f64) -> Matrix4<f64> {
    let a = dt.powi(3) / 3.0;
    let b = dt.powi(2) / 2.0;
    Matrix4::new(
        a, 0.0, b, 0.0, //
        0.0, a, 0.0, b, //
        b, 0.0, dt, 0.0, //
        0.0, b, 0.0, dt,
    ) * q
}

pub fn kf_predict(track: &TrackState, dt: f64, q: f64) -> TrackState {
    let f = transition(dt);
    TrackState {
        state: f * track.state,
        covariance: symmetrize4(f * track.covariance * f.transpose() + process_noise(dt, q)),
    }
}

/// Position-only update (Joseph form).
pub fn kf_update(track: &TrackState, fix: &PositionEstimate) -> Result<TrackState> {
    let p = &track.covariance;
    let prior_pos = p.fixed_view::<2, 2>(0, 0).into_owned();
    let mut r = fix.covariance;
    let s_inv = match (prior_pos + r).cholesky() {
        Some(c) => c.inverse(),
        None => {
            r += Matrix2::identity() * REGULARIZATION;
            inverse_pd(&(prior_pos + r))?
        }
    };

    // H selects the position block, so P·Hᵀ is the first two columns.
    let pht = p.fixed_view::<4, 2>(0, 0).into_owned();
    let gain = pht * s_inv;
    let innovation = fix.position - track.position();
    let state = track.state + gain * innovation;

    let h = Matrix2x4::new(1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0);
    let i_kh = Matrix4::identity() - gain * h;
    let covariance = i_kh * p * i_kh.transpose() + gain * r * gain.transpose();
    Ok(TrackState {
        state,
        covariance: symmetrize4(covariance),
    })
}

/// Scalar update with one node's radial-velocity estimate. The line of
/// sight is taken from the current track position.
pub fn kf_update_radial_velocity(
    track: &TrackState,
    node: &Position,
    meas: &Measurement,
) -> TrackState {
    let los = track.position() - node;
    let dist = los.norm();
    if dist == 0.0 {
        return *track;
    }
    let u = los / dist;
    let h = RowVector4::new(0.0, 0.0, u.x, u.y);
    let mut r = meas.radial_velocity_std * meas.radial_velocity_std;
    let p = &track.covariance;
    let mut s = (h * p * h.transpose())[(0, 0)] + r;
    if !(s > 0.0) {
        r += REGULARIZATION;
        s += REGULARIZATION;
    }
    let gain = p * h.transpose() / s;
    let innovation = meas.radial_velocity_est - (h * track.state)[(0, 0)];
    let i_kh = Matrix4::identity() - gain * h;
    TrackState {
        state: track.state + gain * innovation,
        covariance: symmetrize4(i_kh * p * i_kh.transpose() + gain * gain.transpose() * r),
    }
}

/// Ranges from each node to the track extrapolated `lookahead` steps.
pub fn predicted_ranges(
    track: &TrackState,
    nodes: &[Position],
    lookahead: usize,
    dt: f64,
) -> Vec<f64> {
    let f = transition(dt);
    let state = (0..lookahead).fold(track.state, |s, _| f * s);
    true_ranges(nodes, &Vector2::new(state[0], state[1]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn meas(range: f64, azimuth: f64, range_std: f64, azimuth_std: f64) -> Measurement {
        Measurement {
            node: 0,
            channel: 0,
            cpi: 0,
            range_est: range,
            radial_velocity_est: 0.0,
            azimuth_est: azimuth,
            sinr_db: 0.0,
            range_std,
            azimuth_std,
            radial_velocity_std: 0.0,
        }
    }

    fn est(x: f64, y: f64, var: f64) -> PositionEstimate {
        PositionEstimate {
            position: Vector2::new(x, y),
            covariance: Matrix2::identity() * var,
        }
    }

    #[test]
    fn noiseless_polar_to_cartesian() {
        let e = node_position_estimate(&meas(100.0, 0.0, 0.0, 0.0), &Vector2::zeros());
        assert_abs_diff_eq!(e.position, Vector2::new(100.0, 0.0), epsilon = 1e-12);
        assert_eq!(e.covariance, Matrix2::zeros());
        let e = node_position_estimate(
            &meas(100.0, std::f64::consts::FRAC_PI_2, 0.0, 0.0),
            &Vector2::zeros(),
        );
        assert_abs_diff_eq!(e.position, Vector2::new(0.0, 100.0), epsilon = 1e-12);
    }

    #[test]
    fn cross_range_std_is_range_times_angle_std() {
        // σ_r = 1 m, r·σ_θ = 100·0.01 = 1 m, so both eigenvalues are 1 m².
        for az in [0.0, 0.7, 2.0, -1.3] {
            let e = node_position_estimate(&meas(100.0, az, 1.0, 0.01), &Vector2::new(5.0, -2.0));
            let eig = e.covariance.symmetric_eigen().eigenvalues;
            assert_abs_diff_eq!(eig[0], 1.0, epsilon = 1e-9);
            assert_abs_diff_eq!(eig[1], 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn fuse_identities() {
        let a = est(1.0, 2.0, 4.0);
        assert_eq!(fuse(&[a]).unwrap(), a);
        let b = est(3.0, -2.0, 4.0);
        let f = fuse(&[a, b]).unwrap();
        assert_abs_diff_eq!(f.position, Vector2::new(2.0, 0.0), epsilon = 1e-12);
        assert_abs_diff_eq!(f.covariance, Matrix2::identity() * 2.0, epsilon = 1e-12);
        assert!(fuse(&[]).is_err());
    }

    #[test]
    fn inverse_variance_weights() {
        // Weights 1/σ² : 1/(4σ²) normalize to 0.8 : 0.2.
        let f = fuse(&[est(0.0, 0.0, 1.0), est(10.0, 5.0, 4.0)]).unwrap();
        assert_abs_diff_eq!(f.position, Vector2::new(2.0, 1.0), epsilon = 1e-12);
        assert_abs_diff_eq!(f.covariance[(0, 0)], 0.8, epsilon = 1e-12);
    }

    #[test]
    fn zero_covariances_are_regularized() {
        let f = fuse(&[est(1.0, 1.0, 0.0), est(3.0, 3.0, 0.0)]).unwrap();
        assert_abs_diff_eq!(f.position, Vector2::new(2.0, 2.0), epsilon = 1e-12);
        assert!(f.covariance.cholesky().is_some());
    }

    fn diag_track(v: Vector2<f64>) -> TrackState {
        TrackState {
            state: Vector4::new(0.0, 0.0, v.x, v.y),
            covariance: Matrix4::identity(),
        }
    }

    #[test]
    fn predict_advances_along_diagonal() {
        let v = 200.0 / 2f64.sqrt();
        let t = kf_predict(&diag_track(Vector2::new(v, v)), 0.01, 1.0);
        // 200 m/s for 10 ms along the diagonal: 2 m, i.e. sqrt(2) m per axis.
        assert_abs_diff_eq!(t.state[0], std::f64::consts::SQRT_2, epsilon = 1e-12);
        assert_abs_diff_eq!(t.state[1], std::f64::consts::SQRT_2, epsilon = 1e-12);
    }

    #[test]
    fn predict_without_process_noise_tracks_cv_truth() {
        let mut t = diag_track(Vector2::new(3.0, -1.0));
        t.covariance = Matrix4::zeros();
        for k in 1..=100 {
            t = kf_predict(&t, 0.01, 0.0);
            let truth = Vector2::new(3.0, -1.0) * (0.01 * k as f64);
            assert!((t.position() - truth).norm() < 1e-12);
        }
    }

    #[test]
    fn predict_grows_trace() {
        let t = diag_track(Vector2::new(1.0, 1.0));
        let p = kf_predict(&t, 0.01, 1.0);
        assert!(p.covariance.trace() > t.covariance.trace());
    }

    #[test]
    fn update_limits() {
        let t = diag_track(Vector2::new(1.0, 0.0));
        let sharp = PositionEstimate {
            position: Vector2::new(5.0, -3.0),
            covariance: Matrix2::identity() * 1e-14,
        };
        let u = kf_update(&t, &sharp).unwrap();
        assert_abs_diff_eq!(u.position(), sharp.position, epsilon = 1e-9);
        let vague = PositionEstimate {
            position: Vector2::new(5.0, -3.0),
            covariance: Matrix2::identity() * 1e14,
        };
        let u = kf_update(&t, &vague).unwrap();
        assert_abs_diff_eq!(u.state, t.state, epsilon = 1e-9);
        assert_abs_diff_eq!(u.covariance, t.covariance, epsilon = 1e-9);
    }

    #[test]
    fn repeated_updates_follow_riccati_recursion() {
        // Brute-force scalar recursion 1/p_k = 1/p_0 + k/σ² for a static fix.
        let sigma2 = 2.5;
        let mut t = diag_track(Vector2::zeros());
        let fix = est(0.0, 0.0, sigma2);
        let mut prev = t.position_trace();
        let mut p = 1.0;
        for _ in 0..50 {
            t = kf_update(&t, &fix).unwrap();
            p = p * sigma2 / (p + sigma2);
            assert!(t.position_trace() < prev);
            assert_abs_diff_eq!(t.covariance[(0, 0)], p, epsilon = 1e-12);
            prev = t.position_trace();
        }
        assert!(prev < 0.11);
    }

    #[test]
    fn predicted_ranges_behaviour() {
        let nodes = vec![Vector2::new(0.0, 0.0), Vector2::new(3.0, 4.0)];
        let still = TrackState {
            state: Vector4::new(3.0, 4.0, 0.0, 0.0),
            covariance: Matrix4::identity(),
        };
        assert_eq!(predicted_ranges(&still, &nodes, 0, 0.01), vec![5.0, 0.0]);
        assert_eq!(predicted_ranges(&still, &nodes, 7, 0.01), vec![5.0, 0.0]);

        let receding = TrackState {
            state: Vector4::new(10.0, 10.0, 141.0, 141.0),
            covariance: Matrix4::identity(),
        };
        let r: Vec<f64> = (0..6)
            .map(|k| predicted_ranges(&receding, &nodes[..1], k, 0.01)[0])
            .collect();
        assert!(r.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn radial_velocity_update_pulls_velocity() {
        let mut t = diag_track(Vector2::zeros());
        t.state[0] = 100.0;
        let mut m = meas(100.0, 0.0, 0.0, 0.0);
        m.radial_velocity_est = 20.0;
        m.radial_velocity_std = 0.1;
        let u = kf_update_radial_velocity(&t, &Vector2::zeros(), &m);
        assert!(u.state[2] > 19.0 && u.state[2] < 20.0);
        assert_abs_diff_eq!(u.state[3], 0.0, epsilon = 1e-12);
        assert!(u.min_eigenvalue() > 0.0);
    }

    #[test]
    fn definiteness_survives_extreme_scaling() {
        // Position variances near 1e-19 m² next to velocity variances near
        // 1e-3: the raw spectrum is lost in rounding, the correlation
        // spectrum is not.
        let mut t = diag_track(Vector2::zeros());
        t.covariance = Matrix4::new(
            1.0e-19, 2.7e-20, 1.3e-17, 3.4e-18, 2.7e-20, 7.8e-21, 3.4e-18, 9.8e-19, 1.3e-17,
            3.4e-18, 2.9e-3, 2.0e-14, 3.4e-18, 9.8e-19, 2.0e-14, 2.9e-3,
        );
        assert!(t.is_positive_definite());
        assert!(t.min_correlation_eigenvalue() > 1e-3);

        t.covariance[(1, 1)] = 0.0;
        assert_eq!(t.min_correlation_eigenvalue(), f64::NEG_INFINITY);
        assert!(!t.is_positive_definite());
    }
}
