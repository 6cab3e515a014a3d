//! Equilibria of the doubly averaged planar problem.
//!
//! Aligned equilibria sit at `q2 = 0`, `p2 > 0` (`g = 0`) and satisfy
//! `dRbar/de = 0`. Derivatives are finite differences of the quadrature,
//! taken pointwise at a fixed node count so that the discretisation error
//! is a smooth function of `e`.
//!
//! `Rbar(e, 0)` extends analytically to `e < 0`, where it equals
//! `Rbar(|e|, π)`; stencils are allowed to reach into that branch, so the
//! derivative at small `e` needs no one-sided formula.

use serde::{Deserialize, Serialize};

use crate::averaging::{full_stencil_mean, quarter_stencil_mean, Geometry};
use crate::error::{domain, Error, Result};
use crate::fd;
use crate::kepler::{self, OrbitConfig};
use crate::oracle::{aligned_p2, canonical_step};
use crate::quadrature::{converge, QuadratureSpec};

/// Numerical settings shared by the equilibrium, stability and sweep layers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    pub quad: QuadratureSpec,
    /// Base finite-difference step in `e`.
    pub fd_step: f64,
    /// Required `|dRbar/de|` at an accepted root.
    pub root_tol: f64,
    /// Number of points of the derivative scan over the bracket.
    pub scan_points: usize,
    pub e_min: f64,
    pub e_max: f64,
    /// Relative eigenvalue threshold below which a Hessian is degenerate.
    pub degeneracy_tol: f64,
    /// Sign margins must exceed this multiple of the quadrature error.
    pub verdict_margin: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            quad: QuadratureSpec::default(),
            fd_step: 1e-3,
            root_tol: 1e-11,
            scan_points: 40,
            e_min: 1e-4,
            e_max: 0.95,
            degeneracy_tol: 1e-8,
            verdict_margin: 3.0,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<()> {
        self.quad.validate()?;
        if !(self.fd_step > 0.0 && self.fd_step < 0.1) {
            return Err(domain("finite-difference step must lie in (0, 0.1)"));
        }
        if !(self.root_tol > 0.0) {
            return Err(domain("root tolerance must be positive"));
        }
        if self.scan_points < 3 {
            return Err(domain("derivative scan needs at least 3 points"));
        }
        if !(0.0 < self.e_min && self.e_min < self.e_max && self.e_max < 1.0) {
            return Err(domain(
                "eccentricity bracket must satisfy 0 < e_min < e_max < 1",
            ));
        }
        Ok(())
    }
}

/// A point of the planar phase space in both parametrisations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanarState {
    pub e: f64,
    pub g: f64,
    pub p2: f64,
    pub q2: f64,
}

impl PlanarState {
    pub fn from_elements(cfg: &OrbitConfig, e: f64, g: f64) -> Self {
        let rho = aligned_p2(cfg, e);
        Self {
            e,
            g: kepler::wrap_angle(g),
            p2: rho * g.cos(),
            q2: -rho * g.sin(),
        }
    }

    pub fn from_canonical(cfg: &OrbitConfig, p2: f64, q2: f64) -> Result<Self> {
        let (e, g) = elements_from_canonical(cfg.delaunay_l(), p2, q2)?;
        Ok(Self {
            e,
            g: kepler::wrap_angle(g),
            p2,
            q2,
        })
    }
}

/// `(e, g)` from `(p2, q2)` at fixed `L`.
pub fn elements_from_canonical(l_act: f64, p2: f64, q2: f64) -> Result<(f64, f64)> {
    let rho2 = p2 * p2 + q2 * q2;
    if rho2 >= 2.0 * l_act {
        return Err(domain("p2^2 + q2^2 must stay below 2L"));
    }
    // (L - G)(L + G) with L - G = rho²/2
    let e = (0.5 * rho2 * (2.0 * l_act - 0.5 * rho2)).sqrt() / l_act;
    let g = if rho2 == 0.0 { 0.0 } else { (-q2).atan2(p2) };
    Ok((e, g))
}

/// First and second `e`-derivatives of `Rbar` at `g = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EDerivatives {
    pub rbar: f64,
    pub first: f64,
    pub second: f64,
    /// Change of the first derivative between the last two node levels.
    pub err: f64,
    pub nodes: usize,
    pub step: f64,
}

fn e_stencil(cfg: &OrbitConfig, e: f64, h: f64, nodes: usize) -> [f64; 5] {
    let eccs = fd::LINE_OFFSETS.map(|o| e + o * h);
    quarter_stencil_mean(cfg.a, cfg.e_j, &eccs, &fd::line_combos(h), nodes, nodes)
}

/// Largest step not larger than `settings.fd_step` whose stencil keeps
/// every geometry clear of the crossing threshold.
fn admissible_step(
    cfg: &OrbitConfig,
    e: f64,
    separation: f64,
    settings: &SolverSettings,
) -> Result<f64> {
    let threshold = settings.quad.crossing_threshold;
    let mut h = settings.fd_step;
    while h >= 1e-6 {
        let reach = e.abs() + h;
        if reach < 0.99 {
            // |d(position)/de| <= a / sqrt(1 - e²)
            let lip = cfg.a / ((1.0 - reach) * (1.0 + reach)).sqrt();
            if separation - lip * h >= threshold {
                return Ok(h);
            }
        }
        h *= 0.25;
    }
    Err(Error::OrbitCrossing {
        separation,
        threshold,
    })
}

/// `dRbar/de` at `g = 0` by Richardson-extrapolated central differences.
pub fn drbar_de(cfg: &OrbitConfig, e: f64, settings: &SolverSettings) -> Result<EDerivatives> {
    cfg.validate()?;
    settings.validate()?;
    if !(0.0..1.0).contains(&e) {
        return Err(domain(format!(
            "asteroid eccentricity must lie in [0, 1), got {e}"
        )));
    }
    let sep = kepler::check_separation(cfg.a, e, 0.0, cfg.e_j, settings.quad.crossing_threshold)?;
    let h = admissible_step(cfg, e, sep, settings)?;
    e_derivatives_adaptive(cfg, e, h, &settings.quad)
}

fn e_derivatives_adaptive(
    cfg: &OrbitConfig,
    e: f64,
    h: f64,
    quad: &QuadratureSpec,
) -> Result<EDerivatives> {
    let combos = fd::line_combos(h);
    let c = converge(
        quad,
        |na, _| Ok(e_stencil(cfg, e, h, na)),
        |v, d| within_tolerance(&combos, v, d, quad.tol),
    )?;
    Ok(derivatives_from(
        &c.values,
        c.change[1].max(c.change[2]),
        c.n_ast,
        h,
    ))
}

/// Stencil convergence test: every row changed by less than `tol` relative
/// to the function value, or by less than its own rounding level.
pub(crate) fn within_tolerance<const S: usize, const K: usize>(
    rows: &[[f64; S]; K],
    v: &[f64; K],
    d: &[f64; K],
    tol: f64,
) -> bool {
    let floor = fd::roundoff_floor(rows, v[0]);
    d.iter()
        .zip(floor)
        .all(|(dk, fk)| *dk <= tol * v[0].abs() + fk)
}

fn derivatives_from(v: &[f64; 5], err: f64, nodes: usize, step: f64) -> EDerivatives {
    let (first, second) = fd::line_derivatives(v);
    EDerivatives {
        rbar: v[0],
        first,
        second,
        err,
        nodes,
        step,
    }
}

/// Planar Hessian of `Rbar` in the canonical variables `(p2, q2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanarHessian {
    pub pp: f64,
    pub qq: f64,
    pub pq: f64,
    pub rbar: f64,
    pub err: f64,
    pub nodes: usize,
    pub step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Definiteness {
    PositiveDefinite,
    Indefinite,
    NegativeDefinite,
    Degenerate,
}

impl PlanarHessian {
    pub fn det(&self) -> f64 {
        self.pp * self.qq - self.pq * self.pq
    }

    pub fn eigenvalues(&self) -> (f64, f64) {
        let mean = 0.5 * (self.pp + self.qq);
        let rad = (0.25 * (self.pp - self.qq).powi(2) + self.pq * self.pq).sqrt();
        (mean - rad, mean + rad)
    }

    pub fn classify(&self, rel_tol: f64) -> Definiteness {
        let (lo, hi) = self.eigenvalues();
        let scale = lo.abs().max(hi.abs());
        if !(scale > 0.0) || lo.abs().min(hi.abs()) <= rel_tol * scale {
            Definiteness::Degenerate
        } else if lo > 0.0 {
            Definiteness::PositiveDefinite
        } else if hi < 0.0 {
            Definiteness::NegativeDefinite
        } else {
            Definiteness::Indefinite
        }
    }
}

/// Second derivatives of `Rbar` in `(p2, q2)` at the aligned point `e_star`.
pub fn planar_hessian(
    cfg: &OrbitConfig,
    e_star: f64,
    settings: &SolverSettings,
) -> Result<PlanarHessian> {
    cfg.validate()?;
    settings.validate()?;
    if !(0.0..1.0).contains(&e_star) {
        return Err(domain(format!(
            "equilibrium eccentricity must lie in [0, 1), got {e_star}"
        )));
    }
    // The stencil runs in p/sqrt(L), which makes the result depend on mu
    // only through the final 1/L factor.
    let l_act = cfg.delaunay_l();
    let unit = OrbitConfig {
        mu: 0.0,
        a: 1.0,
        ..*cfg
    };
    let p2 = aligned_p2(&unit, e_star);
    let h = canonical_step(&unit);
    let mut geoms = [Geometry::planar(e_star, 0.0); 17];
    for (k, (du, dv)) in fd::PLANE_OFFSETS.into_iter().enumerate() {
        let (e, g) = elements_from_canonical(1.0, p2 + du * h, dv * h)?;
        // the outermost ring of the stencil bounds the others
        if k == 0 || (du.abs() == 1.0 || dv.abs() == 1.0) {
            kepler::check_separation(cfg.a, e, g, cfg.e_j, settings.quad.crossing_threshold)?;
        }
        geoms[k] = Geometry::planar(e, g);
    }
    let combos = fd::plane_combos(h);
    let quad = &settings.quad;
    let c = converge(
        quad,
        |na, np| Ok(full_stencil_mean(cfg.a, cfg.e_j, &geoms, &combos, na, np)),
        |v, d| within_tolerance(&combos, v, d, quad.tol),
    )?;
    let (pp, qq, pq) = fd::plane_hessian(&c.values);
    let err = c.change[1..].iter().fold(0.0f64, |m, v| m.max(*v)) / l_act;
    Ok(PlanarHessian {
        pp: pp / l_act,
        qq: qq / l_act,
        pq: pq / l_act,
        rbar: c.values[0],
        err,
        nodes: c.n_ast,
        step: h * l_act.sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EquilibriumStatus {
    Found,
    NoRoot,
    MultipleRoots,
    Crossing,
    NonConverged,
}

/// One root of `dRbar/de` with its planar classification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootInfo {
    pub e: f64,
    pub residual: f64,
    pub hessian: Option<PlanarHessian>,
    pub definiteness: Definiteness,
}

/// Outcome of the equilibrium search at one `(a, e_J)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumRecord {
    pub cfg: OrbitConfig,
    pub status: EquilibriumStatus,
    /// Selected stable root (smallest `e` when several qualify).
    pub selected: Option<RootInfo>,
    /// Every root found, stable or not, in increasing `e`.
    pub roots: Vec<RootInfo>,
    /// Sub-intervals of the bracket where the scan was admissible.
    pub admissible: Vec<(f64, f64)>,
}

impl EquilibriumRecord {
    pub fn e_star(&self) -> Option<f64> {
        self.selected.map(|r| r.e)
    }

    pub fn residual(&self) -> Option<f64> {
        self.selected.map(|r| r.residual)
    }

    pub fn hessian(&self) -> Option<PlanarHessian> {
        self.selected.and_then(|r| r.hessian)
    }

    pub fn hessian_definite(&self) -> Option<Definiteness> {
        self.selected.map(|r| r.definiteness)
    }
}

#[derive(Debug, Clone, Copy)]
enum ScanPoint {
    Crossing,
    Failed,
    Ok { d: f64, nodes: usize, step: f64 },
}

/// Derivative of `Rbar` at a fixed node count and step.
struct FixedProbe<'a> {
    cfg: &'a OrbitConfig,
    nodes: usize,
    step: f64,
}

impl FixedProbe<'_> {
    fn eval(&self, e: f64) -> f64 {
        let v = e_stencil(self.cfg, e, self.step, self.nodes);
        fd::richardson(v[1], v[2])
    }
}

/// Searches `[e_lo, e_hi]` for aligned equilibria and selects the one with
/// a positive definite planar Hessian.
pub fn find_equilibrium(
    cfg: &OrbitConfig,
    settings: &SolverSettings,
    e_lo: f64,
    e_hi: f64,
) -> Result<EquilibriumRecord> {
    cfg.validate()?;
    settings.validate()?;
    if !(0.0 < e_lo && e_lo < e_hi && e_hi < 1.0) {
        return Err(domain(format!(
            "bracket [{e_lo}, {e_hi}] must lie inside (0, 1)"
        )));
    }
    let m = settings.scan_points;
    let es: Vec<f64> = (0..m)
        .map(|k| e_lo + (e_hi - e_lo) * k as f64 / (m - 1) as f64)
        .collect();
    let threshold = settings.quad.crossing_threshold;
    let scan: Vec<ScanPoint> = es
        .iter()
        .map(|&e| {
            let sep = kepler::orbit_min_separation(cfg.a, e, cfg.e_j);
            if sep < threshold {
                return ScanPoint::Crossing;
            }
            match admissible_step(cfg, e, sep, settings)
                .and_then(|h| e_derivatives_adaptive(cfg, e, h, &settings.quad))
            {
                Ok(d) => ScanPoint::Ok {
                    d: d.first,
                    nodes: d.nodes,
                    step: d.step,
                },
                Err(Error::OrbitCrossing { .. }) => ScanPoint::Crossing,
                Err(_) => ScanPoint::Failed,
            }
        })
        .collect();

    let admissible = admissible_runs(&es, &scan);
    let mut record = EquilibriumRecord {
        cfg: *cfg,
        status: EquilibriumStatus::NoRoot,
        selected: None,
        roots: Vec::new(),
        admissible,
    };
    if scan.iter().all(|s| matches!(s, ScanPoint::Crossing)) {
        record.status = EquilibriumStatus::Crossing;
        return Ok(record);
    }
    if !scan.iter().any(|s| matches!(s, ScanPoint::Ok { .. })) {
        record.status = EquilibriumStatus::NonConverged;
        return Ok(record);
    }

    let mut unresolved = false;
    for k in 0..m - 1 {
        let (
            ScanPoint::Ok {
                d: dl,
                nodes: nl,
                step: hl,
            },
            ScanPoint::Ok {
                d: dr,
                nodes: nr,
                step: hr,
            },
        ) = (scan[k], scan[k + 1])
        else {
            continue;
        };
        if dl.signum() == dr.signum() && dl != 0.0 && dr != 0.0 {
            continue;
        }
        let probe = FixedProbe {
            cfg,
            nodes: nl.max(nr),
            step: hl.min(hr),
        };
        match refine_root(&probe, es[k], es[k + 1], settings.root_tol) {
            Some((e, residual)) if residual < settings.root_tol => {
                let hessian = planar_hessian(cfg, e, settings).ok();
                let definiteness = hessian.map_or(Definiteness::Degenerate, |h| {
                    h.classify(settings.degeneracy_tol)
                });
                record.roots.push(RootInfo {
                    e,
                    residual,
                    hessian,
                    definiteness,
                });
            }
            Some(_) => unresolved = true,
            None => {}
        }
    }

    let stable: Vec<RootInfo> = record
        .roots
        .iter()
        .copied()
        .filter(|r| r.definiteness == Definiteness::PositiveDefinite)
        .collect();
    record.status = match stable.len() {
        0 if unresolved => EquilibriumStatus::NonConverged,
        0 => EquilibriumStatus::NoRoot,
        1 => EquilibriumStatus::Found,
        _ => EquilibriumStatus::MultipleRoots,
    };
    record.selected = stable.first().copied();
    Ok(record)
}

/// Default search over `[settings.e_min, settings.e_max]`.
pub fn find_equilibrium_default(
    cfg: &OrbitConfig,
    settings: &SolverSettings,
) -> Result<EquilibriumRecord> {
    find_equilibrium(cfg, settings, settings.e_min, settings.e_max)
}

fn admissible_runs(es: &[f64], scan: &[ScanPoint]) -> Vec<(f64, f64)> {
    let mut runs = Vec::new();
    let mut start: Option<usize> = None;
    for (k, s) in scan.iter().enumerate() {
        let ok = matches!(s, ScanPoint::Ok { .. });
        match (ok, start) {
            (true, None) => start = Some(k),
            (false, Some(s0)) => {
                runs.push((es[s0], es[k - 1]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s0) = start {
        runs.push((es[s0], es[es.len() - 1]));
    }
    runs
}

/// Illinois-modified regula falsi on a sign-changing bracket, falling back
/// to bisection whenever an interpolated point fails to shrink the bracket
/// by half. Returns the best point and its residual.
fn refine_root(probe: &FixedProbe, mut lo: f64, mut hi: f64, tol: f64) -> Option<(f64, f64)> {
    let (mut flo, mut fhi) = (probe.eval(lo), probe.eval(hi));
    if flo == 0.0 {
        return Some((lo, 0.0));
    }
    if fhi == 0.0 {
        return Some((hi, 0.0));
    }
    if flo.signum() == fhi.signum() {
        return None;
    }
    let mut best = if flo.abs() < fhi.abs() {
        (lo, flo.abs())
    } else {
        (hi, fhi.abs())
    };
    let mut side = 0i8;
    for _ in 0..200 {
        let width = hi - lo;
        let mut x = hi - fhi * (hi - lo) / (fhi - flo);
        if !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
        }
        let fx = probe.eval(x);
        if fx.abs() < best.1 {
            best = (x, fx.abs());
        }
        if fx.abs() < tol && width < 1e-6 || fx == 0.0 {
            break;
        }
        if fx.signum() == flo.signum() {
            lo = x;
            flo = fx;
            if side == -1 {
                fhi *= 0.5;
            }
            side = -1;
        } else {
            hi = x;
            fhi = fx;
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        }
        if hi - lo > 0.5 * width {
            let mid = 0.5 * (lo + hi);
            let fm = probe.eval(mid);
            if fm.abs() < best.1 {
                best = (mid, fm.abs());
            }
            if fm.signum() == flo.signum() {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
                fhi = fm;
            }
            side = 0;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi.abs() {
            break;
        }
    }
    Some(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::averaging::averaged_r;
    use std::f64::consts::FRAC_PI_2;

    fn cfg(a: f64, e_j: f64) -> OrbitConfig {
        OrbitConfig::new(a, e_j, 0.0).unwrap()
    }

    #[test]
    fn canonical_round_trip() {
        let c = cfg(0.3, 0.4);
        let s = PlanarState::from_elements(&c, 0.25, 0.7);
        let back = PlanarState::from_canonical(&c, s.p2, s.q2).unwrap();
        assert!((back.e - 0.25).abs() < 1e-14);
        assert!(kepler::angle_diff(back.g, 0.7).abs() < 1e-14);
        let l_act = c.delaunay_l();
        let lhs = s.p2 * s.p2 + s.q2 * s.q2;
        assert!((lhs - 2.0 * l_act * (1.0 - (1.0f64 - 0.0625).sqrt())).abs() < 1e-12);
    }

    #[test]
    fn circular_planet_derivative_is_g_independent() {
        let c = cfg(0.3, 0.0);
        let settings = SolverSettings::default();
        let d0 = drbar_de(&c, 0.2, &settings).unwrap().first;
        // g = π/2 derivative by differencing the general-g average
        let h = 1e-3;
        let quad = settings.quad;
        let rp = averaged_r(&c, 0.2 + h, FRAC_PI_2, &quad).unwrap().value;
        let rm = averaged_r(&c, 0.2 - h, FRAC_PI_2, &quad).unwrap().value;
        let rp2 = averaged_r(&c, 0.2 + h / 2.0, FRAC_PI_2, &quad)
            .unwrap()
            .value;
        let rm2 = averaged_r(&c, 0.2 - h / 2.0, FRAC_PI_2, &quad)
            .unwrap()
            .value;
        let d90 = fd::richardson((rp - rm) / (2.0 * h), (rp2 - rm2) / h);
        assert!((d0 - d90).abs() < 1e-8 * d0.abs(), "{d0} vs {d90}");
    }

    #[test]
    fn derivative_against_nine_point_oracle() {
        // eighth-order central difference of Rbar on a fixed fine grid
        let c = cfg(0.3, 0.4);
        let e = 0.2;
        let h = 2e-3;
        let n = 1024;
        let w = [
            1.0 / 280.0,
            -4.0 / 105.0,
            0.2,
            -0.8,
            0.0,
            0.8,
            -0.2,
            4.0 / 105.0,
            -1.0 / 280.0,
        ];
        let mut oracle = 0.0;
        for (k, wk) in w.iter().enumerate() {
            let ek = e + (k as f64 - 4.0) * h;
            oracle += wk * quarter_stencil_mean(c.a, c.e_j, &[ek], &[[1.0]], n, n)[0];
        }
        oracle /= h;
        let d = drbar_de(&c, e, &SolverSettings::default()).unwrap();
        assert!(
            (d.first - oracle).abs() < 1e-10,
            "{} vs {}",
            d.first,
            oracle
        );
    }

    #[test]
    fn derivative_at_zero_eccentricity() {
        let c = cfg(0.3, 0.4);
        let d = drbar_de(&c, 0.0, &SolverSettings::default()).unwrap();
        // forward Richardson difference from e = 0 upwards agrees
        let n = 512;
        let f = |e: f64| quarter_stencil_mean(c.a, c.e_j, &[e], &[[1.0]], n, n)[0];
        let h = 1e-3;
        let fwd = |h: f64| (-3.0 * f(0.0) + 4.0 * f(h) - f(2.0 * h)) / (2.0 * h);
        let one_sided = fd::richardson(fwd(h), fwd(h / 2.0));
        assert!(
            (d.first - one_sided).abs() < 1e-8 * d.first.abs(),
            "{} vs {}",
            d.first,
            one_sided
        );
        assert!(d.first < 0.0);
    }

    #[test]
    fn derivative_refuses_crossing() {
        let r = drbar_de(&cfg(1.0, 0.3), 0.3, &SolverSettings::default());
        assert!(matches!(r, Err(Error::OrbitCrossing { .. })));
    }

    #[test]
    fn equilibrium_matches_grid_scan_oracle() {
        let c = cfg(0.2, 0.3);
        let settings = SolverSettings::default();
        let rec = find_equilibrium_default(&c, &settings).unwrap();
        assert_eq!(rec.status, EquilibriumStatus::Found, "{rec:?}");
        let root = rec.selected.unwrap();
        assert!(root.residual < 1e-11);
        assert_eq!(root.definiteness, Definiteness::PositiveDefinite);
        let minima = crate::oracle::rbar_grid_minima(&c, root.e - 0.01, root.e + 0.01, 1e-4, 512);
        assert_eq!(minima.len(), 1, "{minima:?}");
        assert!(
            (minima[0] - root.e).abs() <= 1e-4,
            "{} vs {}",
            minima[0],
            root.e
        );
    }

    #[test]
    fn hessian_off_diagonal_vanishes_and_matches_chain_rule() {
        let c = cfg(0.3, 0.4);
        let settings = SolverSettings::default();
        let rec = find_equilibrium_default(&c, &settings).unwrap();
        let e = rec.e_star().unwrap();
        let h = rec.hessian().unwrap();
        assert!(h.pq.abs() < 1e-7 * h.pp.abs(), "{h:?}");

        let d = drbar_de(&c, e, &settings).unwrap();
        let l_act = c.delaunay_l();
        let p = aligned_p2(&c, e);
        let s = (l_act - p * p / 4.0).sqrt();
        let ds = -p / (4.0 * s);
        let d2s = -1.0 / (4.0 * s) - p * p / (16.0 * s * s * s);
        let de = (s + p * ds) / l_act;
        let d2e = (2.0 * ds + p * d2s) / l_act;
        let chain = d.second * de * de + d.first * d2e;
        assert!(
            (h.pp - chain).abs() < 1e-6 * chain.abs(),
            "{} vs {}",
            h.pp,
            chain
        );
    }

    #[test]
    fn circular_planet_has_no_aligned_root() {
        let rec = find_equilibrium_default(&cfg(0.3, 0.0), &SolverSettings::default()).unwrap();
        assert!(matches!(rec.status, EquilibriumStatus::NoRoot), "{rec:?}");
    }

    #[test]
    fn fully_crossing_bracket() {
        let rec = find_equilibrium(&cfg(1.0, 0.3), &SolverSettings::default(), 0.5, 0.7).unwrap();
        assert_eq!(rec.status, EquilibriumStatus::Crossing);
        assert!(rec.selected.is_none());
    }

    #[test]
    fn rejects_bad_bracket() {
        let r = find_equilibrium(&cfg(0.3, 0.3), &SolverSettings::default(), 0.0, 0.5);
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    #[test]
    fn definiteness_classes() {
        let mk = |pp, qq, pq| PlanarHessian {
            pp,
            qq,
            pq,
            rbar: 1.0,
            err: 0.0,
            nodes: 64,
            step: 1e-3,
        };
        assert_eq!(
            mk(1.0, 2.0, 0.1).classify(1e-8),
            Definiteness::PositiveDefinite
        );
        assert_eq!(
            mk(-1.0, -2.0, 0.1).classify(1e-8),
            Definiteness::NegativeDefinite
        );
        assert_eq!(mk(1.0, -2.0, 0.0).classify(1e-8), Definiteness::Indefinite);
        assert_eq!(mk(1.0, 1.0, 1.0).classify(1e-8), Definiteness::Degenerate);
    }
}
