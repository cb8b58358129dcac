use super::ScenarioConfig;

pub type Vec3 = [f64; 3];

pub(crate) fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub(crate) fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub(crate) fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn unit(a: Vec3) -> Vec3 {
    scale(a, 1.0 / norm(a))
}

/// Spherical unit vector `[sinθ cosφ, sinθ sinφ, cosθ]` for azimuth `phi`
/// and elevation (from zenith) `theta`.
pub fn unit_from_angles(phi: f64, theta: f64) -> Vec3 {
    [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
}

/// `(azimuth, elevation-from-zenith)` of a unit vector.
pub(crate) fn angles_of(u: Vec3) -> (f64, f64) {
    (u[1].atan2(u[0]), u[2].clamp(-1.0, 1.0).acos())
}

/// Element locations relative to the array reference point.
///
/// The `N_l × N_r` grid lies in the vertical y–z plane (boresight +x) at
/// half-wavelength spacing, with two co-located elements per grid point.
/// Ordering is polarization-major, then row-major: element
/// `b = pol·N_l·N_r + row·N_r + col` sits at `(0, col·d, row·d)`.
pub fn antenna_positions(cfg: &ScenarioConfig) -> Vec<Vec3> {
    let d = cfg.element_spacing();
    let mut out = Vec::with_capacity(cfg.n_b());
    for _pol in 0..2 {
        for row in 0..cfg.n_l {
            for col in 0..cfg.n_r {
                out.push([0.0, col as f64 * d, row as f64 * d]);
            }
        }
    }
    out
}

/// Polarization index (0 for +45°, 1 for −45°) of element `b`.
pub fn polarization_of(cfg: &ScenarioConfig, b: usize) -> usize {
    b / (cfg.n_l * cfg.n_r)
}
