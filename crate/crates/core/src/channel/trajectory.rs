use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::Rng;

use super::geometry::{add, antenna_positions, dot, polarization_of, Vec3};
use super::{sample_paths, ChannelError, ChannelMode, PathSet, ScenarioConfig, ScenarioKind, TrackKind};
use crate::numerics::CVec;

/// UE position and velocity at one sounding instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UeState {
    pub position: Vec3,
    pub velocity: Vec3,
}

impl UeState {
    /// Travel azimuth `φ_v` of the velocity vector.
    pub fn heading(&self) -> f64 {
        self.velocity[1].atan2(self.velocity[0])
    }
}

/// One scattering-environment realization and the channel it produces.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub kind: ScenarioKind,
    pub speed_mps: f64,
    pub seed_index: u64,
    pub states: Vec<UeState>,
    pub paths: PathSet,
    pub snapshots: Vec<CVec>,
}

/// Channel vector `h(t)` at SRS time `t_s` (seconds).
///
/// Static mode evaluates the multipath sum with the path parameters frozen at
/// the reference position and a linear Doppler phase `2π·(r̂_rxᵀv̄/λ)·t`.
/// Drifting mode recomputes every path's unit vectors and delay at the UE's
/// current position and uses the delay phase `−2πf·τ_l(t)` alone; in the
/// static limit the delay change reproduces the Doppler term.
pub fn snapshot(cfg: &ScenarioConfig, paths: &PathSet, ue: &UeState, t_s: f64, mode: ChannelMode) -> Result<CVec, ChannelError> {
    let lambda = cfg.wavelength();
    let f = cfg.carrier_hz;
    let positions = antenna_positions(cfg);
    let mut h = CVec::zeros(cfg.n_b());
    for (l, path) in paths.paths.iter().enumerate() {
        let (geom, common) = match mode {
            ChannelMode::Static => {
                let g = path.frozen;
                let doppler = Complex64::from_polar(1.0, 2.0 * PI * dot(g.r_rx, ue.velocity) / lambda * t_s);
                let delay = Complex64::from_polar(1.0, -2.0 * PI * f * g.tau);
                (g, doppler * delay)
            }
            ChannelMode::Drifting => {
                let g = path.geometry_at(l, paths.bs_position, ue.position)?;
                // f·τ is the path length in wavelengths; only its fractional
                // part matters for the phase
                let cycles = (f * g.tau).rem_euclid(1.0);
                (g, Complex64::from_polar(1.0, -TAU * cycles))
            }
        };
        for (b, d) in positions.iter().enumerate() {
            let array = Complex64::from_polar(1.0, 2.0 * PI * dot(geom.r_tx, *d) / lambda);
            h[b] += path.gains[polarization_of(cfg, b)] * array * common;
        }
    }
    Ok(h)
}

fn track_states(cfg: &ScenarioConfig, start: Vec3, heading: f64, speed: f64) -> Vec<UeState> {
    let ts = cfg.srs_period_s;
    (0..cfg.snapshots)
        .map(|n| {
            let t = n as f64 * ts;
            match cfg.track {
                TrackKind::Linear => {
                    let v = [speed * heading.cos(), speed * heading.sin(), 0.0];
                    UeState {
                        position: add(start, [v[0] * t, v[1] * t, 0.0]),
                        velocity: v,
                    }
                }
                TrackKind::Circular { radius_m } => {
                    let center = add(start, [-radius_m * heading.sin(), radius_m * heading.cos(), 0.0]);
                    let phi = heading + speed * t / radius_m;
                    UeState {
                        position: add(center, [radius_m * phi.sin(), -radius_m * phi.cos(), 0.0]),
                        velocity: [speed * phi.cos(), speed * phi.sin(), 0.0],
                    }
                }
            }
        })
        .collect()
}

/// Simulates one trajectory of `cfg.snapshots` SRS instants at `speed_mps`.
///
/// The UE starts in front of the array at a random distance and azimuth
/// within ±60° of boresight and travels horizontally with a random initial
/// heading.
pub fn generate_trajectory<R: Rng + ?Sized>(
    cfg: &ScenarioConfig,
    speed_mps: f64,
    seed_index: u64,
    rng: &mut R,
) -> Result<Trajectory, ChannelError> {
    cfg.validate()?;
    let (d0, d1) = cfg.ue_distance_m;
    let dist = if d1 > d0 { rng.random_range(d0..d1) } else { d0 };
    let az = rng.random_range(-PI / 3.0..PI / 3.0);
    let start = [dist * az.cos(), dist * az.sin(), cfg.ue_height_m];
    let heading = rng.random_range(0.0..TAU);
    let states = track_states(cfg, start, heading, speed_mps);
    debug_assert!(states.iter().all(|s| (dot(s.velocity, s.velocity).sqrt() - speed_mps).abs() < 1e-9));

    let mut paths = sample_paths(cfg, start, rng)?;
    let track: Vec<Vec3> = states.iter().map(|s| s.position).collect();
    paths.regenerate_collisions(cfg, &track, rng);

    let snapshots = states
        .iter()
        .enumerate()
        .map(|(n, s)| snapshot(cfg, &paths, s, n as f64 * cfg.srs_period_s, cfg.mode))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Trajectory {
        kind: cfg.kind,
        speed_mps,
        seed_index,
        states,
        paths,
        snapshots,
    })
}
