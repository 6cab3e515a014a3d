//! Two-body geometry of the star-planet-asteroid configuration.
//!
//! Lengths are in units of the planet's semi-major axis (`a_J = 1`). The
//! inertial frame has its origin at the star, the `x` axis pointing at the
//! planet's periapsis and the `xy` plane containing the planet's orbit.
//!
//! The Poincaré variables follow the convention
//!
//! ```text
//! p1 = L                          q1 = l + g + h
//! p2 =  sqrt(2(L-G)) cos(g+h)     q2 = -sqrt(2(L-G)) sin(g+h)
//! p3 =  sqrt(2(G-H)) cos(h)       q3 = -sqrt(2(G-H)) sin(h)
//! ```
//!
//! Note the leading minus sign on `q2` and `q3`; other references use the
//! opposite orientation.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Problem parameters. The planet's semi-major axis is fixed to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitConfig {
    /// Semi-major axis of the asteroid.
    pub a: f64,
    /// Eccentricity of the planet's orbit.
    pub e_j: f64,
    /// Mass fraction of the planet.
    pub mu: f64,
}

impl OrbitConfig {
    pub fn new(a: f64, e_j: f64, mu: f64) -> Result<Self> {
        let cfg = Self { a, e_j, mu };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a.is_finite() && self.a > 0.0) {
            return Err(domain(format!(
                "semi-major axis must be positive, got {}",
                self.a
            )));
        }
        if !(0.0..1.0).contains(&self.e_j) {
            return Err(domain(format!(
                "planet eccentricity must lie in [0, 1), got {}",
                self.e_j
            )));
        }
        if !(0.0..1.0).contains(&self.mu) {
            return Err(domain(format!(
                "mass fraction must lie in [0, 1), got {}",
                self.mu
            )));
        }
        Ok(())
    }

    /// Delaunay action `L = sqrt((1 - mu) a)`.
    pub fn delaunay_l(&self) -> f64 {
        ((1.0 - self.mu) * self.a).sqrt()
    }

    /// Delaunay action `G = L sqrt(1 - e^2)` for an asteroid eccentricity `e`.
    pub fn delaunay_g(&self, e: f64) -> f64 {
        self.delaunay_l() * ((1.0 - e) * (1.0 + e)).sqrt()
    }
}

/// Osculating elements of the asteroid. Angles are kept in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OsculatingElements {
    pub a: f64,
    pub e: f64,
    pub i: f64,
    /// Argument of periapsis `g`.
    pub omega: f64,
    /// Longitude of the ascending node `h`.
    pub node: f64,
    /// Mean anomaly.
    pub l: f64,
}

impl OsculatingElements {
    pub fn to_delaunay(&self, mu: f64) -> Result<DelaunayElements> {
        if !(self.a > 0.0) || !(0.0..1.0).contains(&self.e) {
            return Err(domain("osculating elements need a > 0 and 0 <= e < 1"));
        }
        let l_act = ((1.0 - mu) * self.a).sqrt();
        let g_act = l_act * ((1.0 - self.e) * (1.0 + self.e)).sqrt();
        Ok(DelaunayElements {
            l_act,
            g_act,
            h_act: g_act * self.i.cos(),
            l: wrap_angle(self.l),
            g: wrap_angle(self.omega),
            h: wrap_angle(self.node),
        })
    }
}

/// Canonical Delaunay elements: actions `(L, G, H)` and angles `(l, g, h)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelaunayElements {
    pub l_act: f64,
    pub g_act: f64,
    pub h_act: f64,
    pub l: f64,
    pub g: f64,
    pub h: f64,
}

impl DelaunayElements {
    pub fn validate(&self) -> Result<()> {
        if !(self.g_act > 0.0 && self.g_act <= self.l_act) {
            return Err(domain(format!(
                "Delaunay actions need 0 < G <= L, got G = {}, L = {}",
                self.g_act, self.l_act
            )));
        }
        if self.h_act.abs() > self.g_act {
            return Err(domain(format!(
                "Delaunay actions need |H| <= G, got H = {}, G = {}",
                self.h_act, self.g_act
            )));
        }
        Ok(())
    }

    pub fn to_osculating(&self, mu: f64) -> OsculatingElements {
        let (l, g, h) = (self.l_act, self.g_act, self.h_act);
        let e = (((l - g) * (l + g)).max(0.0)).sqrt() / l;
        let i = (((g - h) * (g + h)).max(0.0)).sqrt().atan2(h);
        OsculatingElements {
            a: l * l / (1.0 - mu),
            e,
            i,
            omega: wrap_angle(self.g),
            node: wrap_angle(self.h),
            l: wrap_angle(self.l),
        }
    }
}

/// Canonical Poincaré variables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoincareState {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
}

/// Result of inverting the Poincaré map.
///
/// On the singular sets the corresponding angle cannot be recovered; it is
/// set to zero and flagged rather than reported as an error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelaunayRecovery {
    pub elements: DelaunayElements,
    /// `L = G` (circular orbit): `g + h` is indeterminate.
    pub periapsis_indeterminate: bool,
    /// `G = H` (planar orbit): `h` is indeterminate.
    pub node_indeterminate: bool,
}

impl DelaunayRecovery {
    pub fn osculating(&self, mu: f64) -> OsculatingElements {
        self.elements.to_osculating(mu)
    }
}

/// Asteroid position, both in the inertial frame and in its orbital plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartesianState {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub xp: f64,
    pub yp: f64,
    pub ecc_anomaly: f64,
}

/// Planet position on its prescribed ellipse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanetState {
    pub x_j: f64,
    pub y_j: f64,
    pub ecc_anomaly: f64,
    pub mean_anomaly: f64,
}

/// Reduces an angle to `[0, 2π)`.
pub fn wrap_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Signed difference `x - y` reduced to `[-π, π)`.
pub fn angle_diff(x: f64, y: f64) -> f64 {
    (x - y + PI).rem_euclid(TAU) - PI
}

fn check_ecc(e: f64, what: &str) -> Result<()> {
    if (0.0..1.0).contains(&e) {
        Ok(())
    } else {
        Err(domain(format!(
            "{what} eccentricity must lie in [0, 1), got {e}"
        )))
    }
}

const KEPLER_NEWTON_ITERS: usize = 50;

/// Solves Kepler's equation `E - e sin E = l` for the eccentric anomaly.
///
/// The solution is continuous and increasing in `l`: the branch is chosen so
/// that `E - l` stays within `[-e, e]`.
pub fn solve_kepler(l: f64, e: f64) -> Result<f64> {
    check_ecc(e, "orbit")?;
    if !l.is_finite() {
        return Err(domain("mean anomaly must be finite"));
    }
    let turns = ((l + PI) / TAU).floor();
    let m = l - turns * TAU;
    let kepler = |x: f64| x - e * x.sin() - m;

    let mut ecc = m + e * m.sin();
    let mut converged = false;
    for _ in 0..KEPLER_NEWTON_ITERS {
        let step = kepler(ecc) / (1.0 - e * ecc.cos());
        ecc -= step;
        if step.abs() <= 4.0 * f64::EPSILON * (1.0 + ecc.abs()) {
            converged = true;
            break;
        }
    }
    if !converged || !ecc.is_finite() || kepler(ecc).abs() > 1e-14 {
        // E - m = e sin E lies in [-e, e]
        let (mut lo, mut hi) = (m - e, m + e);
        while hi - lo > 2.0 * f64::EPSILON * (1.0 + m.abs()) {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if kepler(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        ecc = 0.5 * (lo + hi);
    }
    Ok(ecc + turns * TAU)
}

/// Planet position at eccentric anomaly `ecc_anomaly`.
pub fn planet_position(ecc_anomaly: f64, e_j: f64) -> Result<PlanetState> {
    check_ecc(e_j, "planet")?;
    let (s, c) = ecc_anomaly.sin_cos();
    Ok(PlanetState {
        x_j: c - e_j,
        y_j: ((1.0 - e_j) * (1.0 + e_j)).sqrt() * s,
        ecc_anomaly,
        mean_anomaly: ecc_anomaly - e_j * s,
    })
}

/// Coordinates `(x', y')` of the asteroid in its own orbital plane.
pub fn asteroid_plane_position(ecc_anomaly: f64, a: f64, e: f64) -> Result<(f64, f64)> {
    if !(a > 0.0) {
        return Err(domain(format!("semi-major axis must be positive, got {a}")));
    }
    check_ecc(e, "asteroid")?;
    let (s, c) = ecc_anomaly.sin_cos();
    Ok((a * (c - e), a * ((1.0 - e) * (1.0 + e)).sqrt() * s))
}

/// Rows of the 3x2 map from orbital-plane to inertial coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneRotation {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub z: [f64; 2],
}

impl PlaneRotation {
    pub fn new(omega: f64, i: f64, node: f64) -> Self {
        let (sw, cw) = omega.sin_cos();
        let (si, ci) = i.sin_cos();
        Self::from_trig((sw, cw), (si, ci), node.sin_cos())
    }

    /// Builds the rotation from precomputed `(sin, cos)` pairs, which lets
    /// callers supply `cos i` and `sin i` without cancellation.
    pub fn from_trig(omega: (f64, f64), i: (f64, f64), node: (f64, f64)) -> Self {
        let (sw, cw) = omega;
        let (si, ci) = i;
        let (so, co) = node;
        Self {
            x: [co * cw - ci * so * sw, -co * sw - ci * so * cw],
            y: [so * cw + ci * co * sw, -so * sw + ci * co * cw],
            z: [si * sw, si * cw],
        }
    }

    #[inline]
    pub fn apply(&self, xp: f64, yp: f64) -> [f64; 3] {
        [
            self.x[0] * xp + self.x[1] * yp,
            self.y[0] * xp + self.y[1] * yp,
            self.z[0] * xp + self.z[1] * yp,
        ]
    }
}

/// Maps orbital-plane coordinates to the inertial frame.
pub fn rotate_to_inertial(xp: f64, yp: f64, omega: f64, i: f64, node: f64) -> [f64; 3] {
    PlaneRotation::new(omega, i, node).apply(xp, yp)
}

/// Full asteroid state at eccentric anomaly `ecc_anomaly`.
pub fn asteroid_state(el: &OsculatingElements, ecc_anomaly: f64) -> Result<CartesianState> {
    let (xp, yp) = asteroid_plane_position(ecc_anomaly, el.a, el.e)?;
    let [x, y, z] = rotate_to_inertial(xp, yp, el.omega, el.i, el.node);
    Ok(CartesianState {
        x,
        y,
        z,
        xp,
        yp,
        ecc_anomaly,
    })
}

pub fn poincare_from_delaunay(d: &DelaunayElements) -> Result<PoincareState> {
    d.validate()?;
    let rho2 = (2.0 * (d.l_act - d.g_act)).max(0.0).sqrt();
    let rho3 = (2.0 * (d.g_act - d.h_act)).max(0.0).sqrt();
    let (s2, c2) = (d.g + d.h).sin_cos();
    let (s3, c3) = d.h.sin_cos();
    Ok(PoincareState {
        p1: d.l_act,
        p2: rho2 * c2,
        p3: rho3 * c3,
        q1: wrap_angle(d.l + d.g + d.h),
        q2: -rho2 * s2,
        q3: -rho3 * s3,
    })
}

/// Inverts the Poincaré map. `mu` is only used to validate that the state
/// describes a bound orbit (`p1 > 0` and consistent actions).
pub fn delaunay_from_poincare(p: &PoincareState, mu: f64) -> Result<DelaunayRecovery> {
    if !(0.0..1.0).contains(&mu) {
        return Err(domain(format!(
            "mass fraction must lie in [0, 1), got {mu}"
        )));
    }
    if !(p.p1 > 0.0) {
        return Err(domain(format!("p1 = L must be positive, got {}", p.p1)));
    }
    let rho2_sq = p.p2 * p.p2 + p.q2 * p.q2;
    let rho3_sq = p.p3 * p.p3 + p.q3 * p.q3;
    if rho2_sq > 2.0 * p.p1 {
        return Err(domain(
            "p2^2 + q2^2 exceeds 2 p1: eccentricity would exceed one",
        ));
    }
    let l_act = p.p1;
    let g_act = l_act - 0.5 * rho2_sq;
    let h_act = g_act - 0.5 * rho3_sq;
    if !(g_act > 0.0) || h_act < -g_act {
        return Err(domain("Poincaré state does not describe a valid orbit"));
    }
    let periapsis_indeterminate = rho2_sq == 0.0;
    let node_indeterminate = rho3_sq == 0.0;
    let gh = if periapsis_indeterminate {
        0.0
    } else {
        (-p.q2).atan2(p.p2)
    };
    let h = if node_indeterminate {
        0.0
    } else {
        (-p.q3).atan2(p.p3)
    };
    Ok(DelaunayRecovery {
        elements: DelaunayElements {
            l_act,
            g_act,
            h_act,
            l: wrap_angle(p.q1 - gh),
            g: wrap_angle(gh - h),
            h: wrap_angle(h),
        },
        periapsis_indeterminate,
        node_indeterminate,
    })
}

/// Resolution of the coarse grid used by [`orbit_min_separation`].
pub const SEPARATION_GRID: usize = 256;

/// Default separation below which a configuration counts as crossing.
pub const DEFAULT_CROSSING_THRESHOLD: f64 = 1e-3;

/// Minimum distance between the asteroid and planet ellipses with aligned
/// periapses in a common plane.
pub fn orbit_min_separation(a: f64, e: f64, e_j: f64) -> f64 {
    min_separation(a, e, 0.0, e_j)
}

/// Minimum distance between the two coplanar ellipses when the asteroid's
/// periapsis is rotated by `g` from the planet's.
///
/// `e` may be negative: `(e, g)` and `(-e, g + π)` describe the same curve.
pub fn min_separation(a: f64, e: f64, g: f64, e_j: f64) -> f64 {
    let n = SEPARATION_GRID;
    let (sg, cg) = g.sin_cos();
    let b = a * ((1.0 - e) * (1.0 + e)).sqrt();
    let b_j = ((1.0 - e_j) * (1.0 + e_j)).sqrt();
    let ast = |ecc: f64| {
        let (s, c) = ecc.sin_cos();
        let (xp, yp) = (a * (c - e), b * s);
        (cg * xp - sg * yp, sg * xp + cg * yp)
    };
    let pla = |ecc: f64| {
        let (s, c) = ecc.sin_cos();
        (c - e_j, b_j * s)
    };
    let dist2 = |u: f64, v: f64| {
        let (x, y) = ast(u);
        let (xj, yj) = pla(v);
        (x - xj) * (x - xj) + (y - yj) * (y - yj)
    };

    let step = TAU / n as f64;
    let ast_pts: Vec<(f64, f64)> = (0..n).map(|k| ast(k as f64 * step)).collect();
    let pla_pts: Vec<(f64, f64)> = (0..n).map(|k| pla(k as f64 * step)).collect();
    let grid: Vec<f64> = ast_pts
        .iter()
        .flat_map(|&(x, y)| {
            pla_pts
                .iter()
                .map(move |&(xj, yj)| (x - xj) * (x - xj) + (y - yj) * (y - yj))
        })
        .collect();

    // Distance from each asteroid node to the planet ellipse. Nesting the
    // minimisations keeps narrow diagonal valleys (nearly homothetic
    // orbits) from stalling a coordinate search.
    let foot = |u: f64, v0: f64, half: f64| golden_min(|t| dist2(u, t), v0 - half, v0 + half);
    let profile: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let row = &grid[i * n..(i + 1) * n];
            let j = (0..n)
                .min_by(|&p, &q| row[p].total_cmp(&row[q]))
                .unwrap_or(0);
            foot(i as f64 * step, j as f64 * step, step)
        })
        .collect();

    let mut seeds: Vec<usize> = (0..n)
        .filter(|&i| {
            let d = profile[i].1;
            d <= profile[(i + n - 1) % n].1 && d <= profile[(i + 1) % n].1
        })
        .collect();
    seeds.sort_by(|&p, &q| profile[p].1.total_cmp(&profile[q].1));
    seeds.truncate(8);

    let mut best = profile.iter().fold(f64::INFINITY, |m, p| m.min(p.1));
    for i in seeds {
        let (u0, v0) = (i as f64 * step, profile[i].0);
        let (_, d) = golden_min(|u| foot(u, v0, 4.0 * step).1, u0 - step, u0 + step);
        best = best.min(d);
    }
    best.max(0.0).sqrt()
}

fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > 1e-13 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 < f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Checks the crossing guard for a configuration.
pub fn check_separation(a: f64, e: f64, g: f64, e_j: f64, threshold: f64) -> Result<f64> {
    let separation = min_separation(a, e, g, e_j);
    if separation < threshold {
        Err(Error::OrbitCrossing {
            separation,
            threshold,
        })
    } else {
        Ok(separation)
    }
}
