use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::geometry::{add, angles_of, norm, sub, unit, unit_from_angles, Vec3};
use super::{ChannelError, ScenarioConfig, ScenarioKind, SPEED_OF_LIGHT};

/// Minimum UE–scatterer distance before a scatterer is redrawn.
pub const COLLISION_RADIUS_M: f64 = 0.1;

/// Departure/arrival unit vectors and delay of one path at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathGeometry {
    /// BS-side unit vector, pointing from the array toward the last
    /// interaction point.
    pub r_tx: Vec3,
    /// UE-side unit vector, pointing from the UE toward the last interaction
    /// point.
    pub r_rx: Vec3,
    pub tau: f64,
}

impl PathGeometry {
    pub fn from_angles(aoa: f64, eoa: f64, aod: f64, eod: f64, tau: f64) -> Self {
        Self {
            r_tx: unit_from_angles(aod, eod),
            r_rx: unit_from_angles(aoa, eoa),
            tau,
        }
    }

    /// `(φ_AOA, θ_EOA, φ_AOD, θ_EOD)` in radians.
    pub fn angles(&self) -> (f64, f64, f64, f64) {
        let (aoa, eoa) = angles_of(self.r_rx);
        let (aod, eod) = angles_of(self.r_tx);
        (aoa, eoa, aod, eod)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    /// Complex gain seen by the +45° and −45° elements.
    pub gains: [Complex64; 2],
    pub scatterer: Option<Vec3>,
    pub direct: bool,
    /// Geometry at the reference UE position, used by static mode.
    pub frozen: PathGeometry,
}

impl Path {
    /// Path with explicit angles and no underlying geometry (static mode
    /// only).
    pub fn from_angles(gains: [Complex64; 2], geometry: PathGeometry) -> Self {
        Self {
            gains,
            scatterer: None,
            direct: false,
            frozen: geometry,
        }
    }

    /// Exact geometry with the UE at `ue`.
    pub fn geometry_at(&self, index: usize, bs: Vec3, ue: Vec3) -> Result<PathGeometry, ChannelError> {
        if self.direct {
            let d = sub(ue, bs);
            return Ok(PathGeometry {
                r_tx: unit(d),
                r_rx: unit(sub(bs, ue)),
                tau: norm(d) / SPEED_OF_LIGHT,
            });
        }
        let s = self.scatterer.ok_or(ChannelError::NoGeometry(index))?;
        let to_ue = sub(s, ue);
        let dist_ue = norm(to_ue);
        if dist_ue < COLLISION_RADIUS_M {
            return Err(ChannelError::Collision {
                path: index,
                distance: dist_ue,
            });
        }
        let from_bs = sub(s, bs);
        Ok(PathGeometry {
            r_tx: unit(from_bs),
            r_rx: unit(to_ue),
            tau: (norm(from_bs) + dist_ue) / SPEED_OF_LIGHT,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathSet {
    pub paths: Vec<Path>,
    pub bs_position: Vec3,
    pub reference_ue: Vec3,
    /// Scatterers redrawn because the UE track passed too close.
    pub regenerated: usize,
}

impl PathSet {
    /// Hand-built path set for static-mode evaluation.
    pub fn from_paths(paths: Vec<Path>) -> Self {
        Self {
            paths,
            bs_position: [0.0; 3],
            reference_ue: [0.0; 3],
            regenerated: 0,
        }
    }

    pub fn total_power(&self) -> f64 {
        self.paths.iter().map(|p| p.gains[0].norm_sqr() + p.gains[1].norm_sqr()).sum()
    }

    /// Redraws every scatterer within [`COLLISION_RADIUS_M`] of any point on
    /// `track`; returns how many were redrawn.
    pub fn regenerate_collisions<R: Rng + ?Sized>(&mut self, cfg: &ScenarioConfig, track: &[Vec3], rng: &mut R) -> usize {
        let mut count = 0;
        for i in 0..self.paths.len() {
            loop {
                let Some(s) = self.paths[i].scatterer else { break };
                let close = track.iter().any(|&p| norm(sub(s, p)) < COLLISION_RADIUS_M);
                if !close {
                    break;
                }
                let s_new = draw_scatterer(cfg, self.bs_position, self.reference_ue, rng);
                self.paths[i].scatterer = Some(s_new);
                self.paths[i].frozen = self.paths[i]
                    .geometry_at(i, self.bs_position, self.reference_ue)
                    .unwrap_or(self.paths[i].frozen);
                count += 1;
            }
        }
        self.regenerated += count;
        count
    }
}

fn draw_scatterer<R: Rng + ?Sized>(cfg: &ScenarioConfig, bs: Vec3, ue: Vec3, rng: &mut R) -> Vec3 {
    let mid = [(bs[0] + ue[0]) / 2.0, (bs[1] + ue[1]) / 2.0, 0.0];
    let (r0, r1) = cfg.scatter_radius_m;
    // uniform over the annulus area
    let r = rng.random_range(r0 * r0..r1 * r1).sqrt();
    let phi = rng.random_range(0.0..std::f64::consts::TAU);
    let (h0, h1) = cfg.scatter_height_m;
    let h = if h1 > h0 { rng.random_range(h0..h1) } else { h0 };
    add(mid, [r * phi.cos(), r * phi.sin(), h])
}

fn polarized_gain<R: Rng + ?Sized>(xpd_lin: f64, rng: &mut R) -> Complex64 {
    let co = (xpd_lin / (1.0 + xpd_lin)).sqrt();
    let cross = (1.0 / (1.0 + xpd_lin)).sqrt();
    let tau = std::f64::consts::TAU;
    Complex64::from_polar(co, rng.random_range(0.0..tau)) + Complex64::from_polar(cross, rng.random_range(0.0..tau))
}

/// Draws the scatterers and path gains for one scattering environment with
/// the UE starting at `ue_start`.
///
/// Scattered paths are sorted by delay and given an exponential power
/// profile spanning `pdp_decay_db`, perturbed by log-normal shadowing. The LOS
/// preset prepends a direct ray carrying the K-factor share of the power.
/// Gains are finally scaled so that `Σ_l Σ_pol |α|² = 2`.
pub fn sample_paths<R: Rng + ?Sized>(cfg: &ScenarioConfig, ue_start: Vec3, rng: &mut R) -> Result<PathSet, ChannelError> {
    cfg.validate()?;
    let bs = [0.0, 0.0, cfg.bs_height_m];
    let has_direct = cfg.kind == ScenarioKind::LosLike;
    let n_scatter = cfg.n_paths - usize::from(has_direct);

    let mut scatterers: Vec<(f64, Vec3)> = (0..n_scatter)
        .map(|_| {
            let s = draw_scatterer(cfg, bs, ue_start, rng);
            let tau = (norm(sub(s, bs)) + norm(sub(s, ue_start))) / SPEED_OF_LIGHT;
            (tau, s)
        })
        .collect();
    scatterers.sort_by(|a, b| a.0.total_cmp(&b.0));

    let shadow = Normal::new(0.0, cfg.shadowing_db.max(0.0)).expect("finite std");
    let slope = if n_scatter > 1 {
        cfg.pdp_decay_db / (n_scatter - 1) as f64
    } else {
        0.0
    };
    let mut powers: Vec<f64> = (0..n_scatter)
        .map(|rank| 10f64.powf((-slope * rank as f64 + shadow.sample(rng)) / 10.0))
        .collect();
    let scatter_total: f64 = powers.iter().sum();
    let scatter_share = if has_direct {
        1.0 / (1.0 + 10f64.powf(cfg.k_factor_db / 10.0))
    } else {
        1.0
    };
    powers.iter_mut().for_each(|p| *p *= scatter_share / scatter_total);

    let xpd = 10f64.powf(cfg.xpd_db / 10.0);
    let mut paths = Vec::with_capacity(cfg.n_paths);
    if has_direct {
        let p = 1.0 - scatter_share;
        let gains = [polarized_gain(xpd, rng) * p.sqrt(), polarized_gain(xpd, rng) * p.sqrt()];
        let mut path = Path {
            gains,
            scatterer: None,
            direct: true,
            frozen: PathGeometry::from_angles(0.0, 0.0, 0.0, 0.0, 0.0),
        };
        path.frozen = path.geometry_at(0, bs, ue_start)?;
        paths.push(path);
    }
    for ((_, s), p) in scatterers.into_iter().zip(powers) {
        let gains = [polarized_gain(xpd, rng) * p.sqrt(), polarized_gain(xpd, rng) * p.sqrt()];
        let mut path = Path {
            gains,
            scatterer: Some(s),
            direct: false,
            frozen: PathGeometry::from_angles(0.0, 0.0, 0.0, 0.0, 0.0),
        };
        let idx = paths.len();
        path.frozen = match path.geometry_at(idx, bs, ue_start) {
            Ok(g) => g,
            // a scatterer on top of the start point is redrawn later
            Err(ChannelError::Collision { .. }) => PathGeometry::from_angles(0.0, 0.0, 0.0, 0.0, 0.0),
            Err(e) => return Err(e),
        };
        paths.push(path);
    }

    let mut set = PathSet {
        paths,
        bs_position: bs,
        reference_ue: ue_start,
        regenerated: 0,
    };
    let norm_factor = (2.0 / set.total_power()).sqrt();
    for p in &mut set.paths {
        p.gains[0] *= norm_factor;
        p.gains[1] *= norm_factor;
    }
    Ok(set)
}
