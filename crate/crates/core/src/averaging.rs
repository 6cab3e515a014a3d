//! Double averaging of the planet's force function over the mean anomalies
//! of the asteroid and the planet.
//!
//! All averages are computed in eccentric anomalies, where the change of
//! variables contributes the weight `(1 - e cos E)(1 - e_J cos E_J)`.
//!
//! At the aligned planar configuration (`g = 0`, `i = 0`) both orbits are
//! symmetric about the `x` axis, and the four reflections of a node in
//! `[0, π]²` pair up into the two distances
//!
//! ```text
//! r1 = |(x - x_J, y - y_J)|,   r2 = |(x - x_J, y + y_J)|
//! ```
//!
//! The quadratic part of the force function in `(p3, q3)` then averages to
//!
//! ```text
//! Abar = -1/(4π² G) ∬_{[0,π]²} (r2³ - r1³)/(r1³ r2³) · y y_J · w dE dE_J
//! Cbar = -1/(4π² G) ∬_{[0,π]²} (r2³ + r1³)/(r1³ r2³) · x x_J · w dE dE_J
//! ```
//!
//! and `Bbar` vanishes by the same symmetry.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::fd;
use crate::kepler::{self, OrbitConfig, PlaneRotation, PoincareState};
use crate::quadrature::{converge, grid_mean, AxisNodes, Converged, Domain, QuadratureSpec};

/// A scalar quadrature result with its convergence estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub err: f64,
    /// Nodes per full period at the accepted level.
    pub nodes: usize,
}

/// Force function `1 / |r - r_J|` of the planet at the asteroid position.
pub fn disturbing_v(x: f64, y: f64, z: f64, x_j: f64, y_j: f64) -> Result<f64> {
    let d2 = (x - x_j).powi(2) + (y - y_j).powi(2) + z * z;
    if d2 == 0.0 {
        return Err(Error::Singular("asteroid coincides with the planet".into()));
    }
    Ok(1.0 / d2.sqrt())
}

/// The two distances of the folded integrands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparationPair {
    pub r1: f64,
    pub r2: f64,
}

impl SeparationPair {
    pub fn new(x: f64, y: f64, x_j: f64, y_j: f64) -> Self {
        let dx2 = (x - x_j) * (x - x_j);
        Self {
            r1: (dx2 + (y - y_j) * (y - y_j)).sqrt(),
            r2: (dx2 + (y + y_j) * (y + y_j)).sqrt(),
        }
    }

    /// `(r2³ - r1³) / (r1³ r2³) · y y_J`, written so that the sign is exact:
    /// `r2² - r1² = 4 y y_J`.
    #[inline]
    pub fn a_kernel(&self, yy: f64) -> f64 {
        let (r1, r2) = (self.r1, self.r2);
        let r13 = r1 * r1 * r1;
        let r23 = r2 * r2 * r2;
        4.0 * yy * yy * (r1 * r1 + r1 * r2 + r2 * r2) / ((r1 + r2) * r13 * r23)
    }

    /// `(r2³ + r1³) / (r1³ r2³)`.
    #[inline]
    pub fn c_kernel(&self) -> f64 {
        1.0 / (self.r1 * self.r1 * self.r1) + 1.0 / (self.r2 * self.r2 * self.r2)
    }
}

/// Planet positions and Kepler weights on one axis of nodes.
pub(crate) struct PlanetTable {
    x: Vec<f64>,
    y: Vec<f64>,
    w: Vec<f64>,
}

impl PlanetTable {
    pub(crate) fn new(nodes: &AxisNodes, e_j: f64) -> Self {
        let b = ((1.0 - e_j) * (1.0 + e_j)).sqrt();
        Self {
            x: nodes.cos.iter().map(|c| c - e_j).collect(),
            y: nodes.sin.iter().map(|s| b * s).collect(),
            w: nodes.cos.iter().map(|c| 1.0 - e_j * c).collect(),
        }
    }
}

/// Asteroid positions `(x, y, z, weight)` for `S` geometries on one axis.
pub(crate) struct AsteroidTable<const S: usize> {
    rows: Vec<[[f64; 4]; S]>,
}

/// One asteroid geometry of a stencil: eccentricity and plane orientation.
/// `e` may be negative (a half-turn of the periapsis).
#[derive(Debug, Clone, Copy)]
pub(crate) struct Geometry {
    pub e: f64,
    pub rot: PlaneRotation,
}

impl Geometry {
    pub(crate) fn planar(e: f64, g: f64) -> Self {
        Self {
            e,
            rot: PlaneRotation::new(g, 0.0, 0.0),
        }
    }
}

impl<const S: usize> AsteroidTable<S> {
    pub(crate) fn new(nodes: &AxisNodes, a: f64, geoms: &[Geometry; S]) -> Self {
        let rows = nodes
            .cos
            .iter()
            .zip(&nodes.sin)
            .map(|(&c, &s)| {
                geoms.map(|g| {
                    let xp = a * (c - g.e);
                    let yp = a * ((1.0 - g.e) * (1.0 + g.e)).sqrt() * s;
                    let [x, y, z] = g.rot.apply(xp, yp);
                    [x, y, z, 1.0 - g.e * c]
                })
            })
            .collect();
        Self { rows }
    }
}

/// Mean over `[0, 2π)²` of `combos · (w/r)` for a stencil of geometries.
pub(crate) fn full_stencil_mean<const S: usize, const K: usize>(
    a: f64,
    e_j: f64,
    geoms: &[Geometry; S],
    combos: &[[f64; S]; K],
    n_ast: usize,
    n_pl: usize,
) -> [f64; K] {
    let ast = AsteroidTable::new(&AxisNodes::new(Domain::Full, n_ast), a, geoms);
    let pla = PlanetTable::new(&AxisNodes::new(Domain::Full, n_pl), e_j);
    grid_mean(n_ast, n_pl, |i, j| {
        let (xj, yj, wj) = (pla.x[j], pla.y[j], pla.w[j]);
        let mut vals = [0.0; S];
        for (v, p) in vals.iter_mut().zip(&ast.rows[i]) {
            let (dx, dy) = (p[0] - xj, p[1] - yj);
            *v = p[3] * wj / (dx * dx + dy * dy + p[2] * p[2]).sqrt();
        }
        fd::combine(combos, &vals)
    })
}

/// Mean of the force function over `[0, 2π)²` for aligned planar
/// geometries `e_s`, folded onto `[0, π]²`.
pub(crate) fn quarter_stencil_mean<const S: usize, const K: usize>(
    a: f64,
    e_j: f64,
    eccs: &[f64; S],
    combos: &[[f64; S]; K],
    n_ast: usize,
    n_pl: usize,
) -> [f64; K] {
    let geoms = eccs.map(|e| Geometry::planar(e, 0.0));
    let ast_nodes = AxisNodes::new(Domain::Quarter, n_ast);
    let pla_nodes = AxisNodes::new(Domain::Quarter, n_pl);
    let ast = AsteroidTable::new(&ast_nodes, a, &geoms);
    let pla = PlanetTable::new(&pla_nodes, e_j);
    grid_mean(ast_nodes.len(), pla_nodes.len(), |i, j| {
        let (xj, yj, wj) = (pla.x[j], pla.y[j], pla.w[j]);
        let mut vals = [0.0; S];
        for (v, p) in vals.iter_mut().zip(&ast.rows[i]) {
            let pair = SeparationPair::new(p[0], p[1], xj, yj);
            *v = 0.5 * p[3] * wj * (pair.r1 + pair.r2) / (pair.r1 * pair.r2);
        }
        fd::combine(combos, &vals)
    })
}

fn check_planar(cfg: &OrbitConfig, e: f64, quad: &QuadratureSpec) -> Result<()> {
    cfg.validate()?;
    quad.validate()?;
    if !(0.0..1.0).contains(&e) {
        return Err(domain(format!(
            "asteroid eccentricity must lie in [0, 1), got {e}"
        )));
    }
    Ok(())
}

fn relative(tol: f64) -> impl Fn(&[f64; 1], &[f64; 1]) -> bool {
    move |v, d| d[0] <= tol * v[0].abs()
}

/// Doubly averaged planar force function `Rbar(e, g)`.
///
/// At `g = 0` the folded quarter-domain form is used; elsewhere the full
/// torus. Configurations closer than `quad.crossing_threshold` are refused.
pub fn averaged_r(cfg: &OrbitConfig, e: f64, g: f64, quad: &QuadratureSpec) -> Result<Estimate> {
    check_planar(cfg, e, quad)?;
    kepler::check_separation(cfg.a, e, g, cfg.e_j, quad.crossing_threshold)?;
    averaged_r_unchecked(cfg, e, g, quad)
}

pub(crate) fn averaged_r_unchecked(
    cfg: &OrbitConfig,
    e: f64,
    g: f64,
    quad: &QuadratureSpec,
) -> Result<Estimate> {
    let c = if g == 0.0 {
        converge(
            quad,
            |na, np| Ok(quarter_stencil_mean(cfg.a, cfg.e_j, &[e], &[[1.0]], na, np)),
            relative(quad.tol),
        )?
    } else {
        let geoms = [Geometry::planar(e, g)];
        converge(
            quad,
            |na, np| Ok(full_stencil_mean(cfg.a, cfg.e_j, &geoms, &[[1.0]], na, np)),
            relative(quad.tol),
        )?
    };
    Ok(Estimate {
        value: c.values[0],
        err: c.change[0],
        nodes: c.n_ast,
    })
}

/// Quarter-domain means of the `Abar` and `Cbar` kernels (without the
/// `-1/(4G)` prefactor) at fixed node counts.
pub(crate) fn ac_kernels(a: f64, e: f64, e_j: f64, n_ast: usize, n_pl: usize) -> [f64; 2] {
    let ast_nodes = AxisNodes::new(Domain::Quarter, n_ast);
    let pla_nodes = AxisNodes::new(Domain::Quarter, n_pl);
    let ast = AsteroidTable::new(&ast_nodes, a, &[Geometry::planar(e, 0.0)]);
    let pla = PlanetTable::new(&pla_nodes, e_j);
    grid_mean(ast_nodes.len(), pla_nodes.len(), |i, j| {
        let p = &ast.rows[i][0];
        let (xj, yj) = (pla.x[j], pla.y[j]);
        let w = p[3] * pla.w[j];
        let pair = SeparationPair::new(p[0], p[1], xj, yj);
        let ka = pair.a_kernel(p[1] * yj);
        debug_assert!(ka >= 0.0, "Abar kernel must be non-negative");
        [ka * w, pair.c_kernel() * p[0] * xj * w]
    })
}

/// Averaged coefficients `(Abar, Cbar)` of `p3²` and `q3²` at the aligned
/// planar configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticCoefficients {
    pub abar: f64,
    pub cbar: f64,
    pub err_a: f64,
    pub err_c: f64,
    pub nodes: usize,
}

pub fn averaged_ac(
    cfg: &OrbitConfig,
    e: f64,
    quad: &QuadratureSpec,
) -> Result<QuadraticCoefficients> {
    check_planar(cfg, e, quad)?;
    kepler::check_separation(cfg.a, e, 0.0, cfg.e_j, quad.crossing_threshold)?;
    averaged_ac_unchecked(cfg, e, quad)
}

pub(crate) fn averaged_ac_unchecked(
    cfg: &OrbitConfig,
    e: f64,
    quad: &QuadratureSpec,
) -> Result<QuadraticCoefficients> {
    let g_act = cfg.delaunay_g(e);
    let c: Converged<2> = converge(
        quad,
        |na, np| Ok(ac_kernels(cfg.a, e, cfg.e_j, na, np)),
        |v, d| {
            let scale = v[0].abs().max(v[1].abs());
            d[0] <= quad.tol * scale && d[1] <= quad.tol * scale
        },
    )?;
    let f = -0.25 / g_act;
    Ok(QuadraticCoefficients {
        abar: f * c.values[0],
        cbar: f * c.values[1],
        err_a: f.abs() * c.change[0],
        err_c: f.abs() * c.change[1],
        nodes: c.n_ast,
    })
}

/// Full-torus average of `B = -(x y_J + y x_J) / (4 r³ G)` at the aligned
/// configuration. Expected to vanish.
pub fn averaged_b(cfg: &OrbitConfig, e: f64, quad: &QuadratureSpec) -> Result<Estimate> {
    check_planar(cfg, e, quad)?;
    kepler::check_separation(cfg.a, e, 0.0, cfg.e_j, quad.crossing_threshold)?;
    averaged_b_unchecked(cfg, e, quad)
}

pub(crate) fn averaged_b_unchecked(
    cfg: &OrbitConfig,
    e: f64,
    quad: &QuadratureSpec,
) -> Result<Estimate> {
    let g_act = cfg.delaunay_g(e);
    let c: Converged<2> = converge(
        quad,
        |na, np| {
            let ast = AsteroidTable::new(
                &AxisNodes::new(Domain::Full, na),
                cfg.a,
                &[Geometry::planar(e, 0.0)],
            );
            let pla = PlanetTable::new(&AxisNodes::new(Domain::Full, np), cfg.e_j);
            Ok(grid_mean(na, np, |i, j| {
                let p = &ast.rows[i][0];
                let (xj, yj) = (pla.x[j], pla.y[j]);
                let (dx, dy) = (p[0] - xj, p[1] - yj);
                let r2 = dx * dx + dy * dy;
                let b = -(p[0] * yj + p[1] * xj) / (4.0 * r2 * r2.sqrt() * g_act) * p[3] * pla.w[j];
                [b, b.abs()]
            }))
        },
        |v, d| d[0] <= quad.tol * v[1],
    )?;
    Ok(Estimate {
        value: c.values[0],
        err: c.change[0],
        nodes: c.n_ast,
    })
}

/// The averaged quantities at an aligned planar point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AveragedCoefficients {
    pub rbar: f64,
    pub abar: f64,
    pub bbar: f64,
    pub cbar: f64,
    pub err: CoefficientErrors,
    pub min_separation: f64,
    /// Set when the orbits are closer than the crossing threshold; the
    /// values were then computed on request and may be unreliable.
    pub crossing_flag: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CoefficientErrors {
    pub r: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

/// What to do when the orbits come closer than the crossing threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CrossingPolicy {
    #[default]
    Refuse,
    /// Evaluate anyway and raise `crossing_flag`.
    Flag,
}

impl AveragedCoefficients {
    pub fn compute(
        cfg: &OrbitConfig,
        e: f64,
        quad: &QuadratureSpec,
        policy: CrossingPolicy,
    ) -> Result<Self> {
        check_planar(cfg, e, quad)?;
        let min_separation = kepler::orbit_min_separation(cfg.a, e, cfg.e_j);
        let crossing_flag = min_separation < quad.crossing_threshold;
        if crossing_flag && policy == CrossingPolicy::Refuse {
            return Err(Error::OrbitCrossing {
                separation: min_separation,
                threshold: quad.crossing_threshold,
            });
        }
        let r = averaged_r_unchecked(cfg, e, 0.0, quad)?;
        let ac = averaged_ac_unchecked(cfg, e, quad)?;
        let b = averaged_b_unchecked(cfg, e, quad)?;
        Ok(Self {
            rbar: r.value,
            abar: ac.abar,
            bbar: b.value,
            cbar: ac.cbar,
            err: CoefficientErrors {
                r: r.err,
                a: ac.err_a,
                b: b.err,
                c: ac.err_c,
            },
            min_separation,
            crossing_flag,
        })
    }

    /// `Abar < 0` must hold for every non-crossing configuration.
    pub fn abar_sign_consistent(&self) -> bool {
        self.crossing_flag || self.abar < 0.0
    }
}

/// Orbit geometry described by a Poincaré state, with the numerically
/// careful `cos i`, `sin i` taken from the actions.
pub(crate) fn geometry_from_poincare(cfg: &OrbitConfig, p: &PoincareState) -> Result<Geometry> {
    let l_cfg = cfg.delaunay_l();
    if (p.p1 - l_cfg).abs() > 1e-12 * l_cfg {
        return Err(domain(format!(
            "p1 = {} is inconsistent with a = {} (L = {l_cfg})",
            p.p1, cfg.a
        )));
    }
    let rec = kepler::delaunay_from_poincare(p, cfg.mu)?;
    let d = rec.elements;
    let e = ((d.l_act - d.g_act) * (d.l_act + d.g_act)).max(0.0).sqrt() / d.l_act;
    let ci = d.h_act / d.g_act;
    let si = ((d.g_act - d.h_act) * (d.g_act + d.h_act)).max(0.0).sqrt() / d.g_act;
    Ok(Geometry {
        e,
        rot: PlaneRotation::from_trig(d.g.sin_cos(), (si, ci), d.h.sin_cos()),
    })
}

/// Doubly averaged spatial force function at a Poincaré state, evaluated
/// directly from the three-dimensional geometry.
pub fn direct_average_v3d(
    cfg: &OrbitConfig,
    p: &PoincareState,
    quad: &QuadratureSpec,
) -> Result<Estimate> {
    cfg.validate()?;
    quad.validate()?;
    let geom = geometry_from_poincare(cfg, p)?;
    let g_plane = (-p.q2).atan2(p.p2);
    kepler::check_separation(cfg.a, geom.e, g_plane, cfg.e_j, quad.crossing_threshold)?;
    let c = converge(
        quad,
        |na, np| Ok(full_stencil_mean(cfg.a, cfg.e_j, &[geom], &[[1.0]], na, np)),
        relative(quad.tol),
    )?;
    Ok(Estimate {
        value: c.values[0],
        err: c.change[0],
        nodes: c.n_ast,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn cfg(a: f64, e_j: f64) -> OrbitConfig {
        OrbitConfig::new(a, e_j, 0.0).unwrap()
    }

    #[test]
    fn disturbing_examples() {
        assert!((disturbing_v(1.0, 0.0, 0.0, 0.0, 1.0).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(disturbing_v(0.0, 0.0, 1.0, 0.0, 0.0).unwrap(), 1.0);
        let v = disturbing_v(0.3, 0.4, 0.0, -0.2, 0.1).unwrap();
        assert!((v - 1.0 / 0.34f64.sqrt()).abs() < 1e-15);
        assert!(disturbing_v(0.5, 0.5, 0.0, 0.5, 0.5).is_err());
    }

    #[test]
    fn separation_pair_symmetry() {
        let p = SeparationPair::new(0.3, 0.0, -0.5, 0.7);
        assert_eq!(p.r1, p.r2);
        let p = SeparationPair::new(0.3, 0.2, -0.5, 0.0);
        assert_eq!(p.r1, p.r2);
        let p = SeparationPair::new(0.3, 0.2, -0.5, 0.7);
        assert!(p.r2 > p.r1);
        let direct = (p.r2.powi(3) - p.r1.powi(3)) / (p.r1.powi(3) * p.r2.powi(3)) * 0.2 * 0.7;
        assert!((p.a_kernel(0.2 * 0.7) - direct).abs() < 1e-12 * direct);
    }

    #[test]
    fn small_a_limit_is_one() {
        let r = averaged_r(&cfg(1e-3, 0.3), 0.2, 0.0, &QuadratureSpec::default()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-5, "{}", r.value);
    }

    #[test]
    fn rbar_against_fine_midpoint_oracle() {
        // 2048² plain midpoint rule over the full torus, directly from
        // Kepler geometry and the force function
        let (a, e_j) = (0.1, 0.0);
        let n = 2048;
        let h = 2.0 * PI / n as f64;
        let mut total = 0.0;
        for i in 0..n {
            let ecc = (i as f64 + 0.5) * h;
            let (x, y) = kepler::asteroid_plane_position(ecc, a, 0.0).unwrap();
            let mut row = 0.0;
            for j in 0..n {
                let pl = kepler::planet_position((j as f64 + 0.5) * h, e_j).unwrap();
                row += disturbing_v(x, y, 0.0, pl.x_j, pl.y_j).unwrap();
            }
            total += row;
        }
        let oracle = total / (n * n) as f64;
        let r = averaged_r(&cfg(a, e_j), 0.0, 0.0, &QuadratureSpec::default()).unwrap();
        assert!(
            (r.value - oracle).abs() < 1e-12,
            "{} vs {}",
            r.value,
            oracle
        );
    }

    #[test]
    fn circular_planet_is_rotation_invariant() {
        let c = cfg(0.4, 0.0);
        let quad = QuadratureSpec::default();
        let r0 = averaged_r(&c, 0.3, 0.0, &quad).unwrap().value;
        for g in [0.4, FRAC_PI_2, 2.5, PI] {
            let rg = averaged_r(&c, 0.3, g, &quad).unwrap().value;
            assert!((rg - r0).abs() < 1e-10 * r0, "g={g}: {rg} vs {r0}");
        }
    }

    #[test]
    fn quarter_and_full_forms_agree() {
        let c = cfg(0.35, 0.4);
        let quad = QuadratureSpec::default();
        let quarter = averaged_r(&c, 0.2, 0.0, &quad).unwrap().value;
        let full = converge(
            &quad,
            |na, np| {
                Ok(full_stencil_mean(
                    c.a,
                    c.e_j,
                    &[Geometry::planar(0.2, 0.0)],
                    &[[1.0]],
                    na,
                    np,
                ))
            },
            relative(quad.tol),
        )
        .unwrap()
        .values[0];
        assert!((quarter - full).abs() < 1e-12);
    }

    #[test]
    fn b_vanishes() {
        let quad = QuadratureSpec::default();
        let b = averaged_b(&cfg(0.3, 0.0), 0.0, &quad).unwrap();
        assert!(b.value.abs() < 1e-12);
        let b = averaged_b(&cfg(2.5, 0.6), 0.4, &quad).unwrap();
        assert!(b.value.abs() < 1e-10, "{}", b.value);
    }

    #[test]
    fn mu_enters_through_g_only() {
        let quad = QuadratureSpec::default();
        let c0 = averaged_ac(&OrbitConfig::new(0.5, 0.2, 0.0).unwrap(), 0.1, &quad).unwrap();
        let c1 = averaged_ac(&OrbitConfig::new(0.5, 0.2, 0.5).unwrap(), 0.1, &quad).unwrap();
        let s = 1.0 / 0.5f64.sqrt();
        assert!((c1.cbar - c0.cbar * s).abs() < 1e-13 * c0.cbar.abs());
        assert!((c1.abar - c0.abar * s).abs() < 1e-13 * c0.abar.abs());
    }

    #[test]
    fn refuses_crossing_orbits() {
        let quad = QuadratureSpec::default();
        let r = averaged_r(&cfg(1.0, 0.3), 0.3, 0.0, &quad);
        assert!(matches!(r, Err(Error::OrbitCrossing { .. })));
        let flagged =
            AveragedCoefficients::compute(&cfg(1.0, 0.3), 0.3, &quad, CrossingPolicy::Flag);
        // singular integrand: either non-finite or not converged, never a silent value
        assert!(flagged.is_err() || flagged.unwrap().crossing_flag);
    }

    #[test]
    fn coefficients_bundle() {
        let quad = QuadratureSpec::default();
        let co = AveragedCoefficients::compute(&cfg(0.4, 0.3), 0.15, &quad, CrossingPolicy::Refuse)
            .unwrap();
        assert!(co.abar < 0.0 && co.cbar < 0.0);
        assert!(co.abar_sign_consistent());
        assert!(co.bbar.abs() < 1e-12);
        assert!(!co.crossing_flag);
    }

    #[test]
    fn v3d_reduces_to_planar_average() {
        let c = cfg(0.45, 0.25);
        let quad = QuadratureSpec::default();
        let e: f64 = 0.12;
        let l_act = c.delaunay_l();
        let p2 = (2.0 * (l_act - c.delaunay_g(e))).sqrt();
        let p = PoincareState {
            p1: l_act,
            p2,
            p3: 0.0,
            q1: 0.0,
            q2: 0.0,
            q3: 0.0,
        };
        let v = direct_average_v3d(&c, &p, &quad).unwrap().value;
        let r = averaged_r(&c, e, 0.0, &quad).unwrap().value;
        assert!((v - r).abs() < 1e-10);
    }

    #[test]
    fn v3d_rejects_inconsistent_p1() {
        let c = cfg(0.45, 0.25);
        let p = PoincareState {
            p1: 1.0,
            p2: 0.0,
            p3: 0.0,
            q1: 0.0,
            q2: 0.0,
            q3: 0.0,
        };
        assert!(matches!(
            direct_average_v3d(&c, &p, &QuadratureSpec::default()),
            Err(Error::Domain(_))
        ));
    }
}
