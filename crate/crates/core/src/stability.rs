//! Spatial stability of planar equilibria, linear frequencies and the
//! resonance curves of their ratio.
//!
//! Near an aligned equilibrium the averaged Hamiltonian is, up to cubic
//! terms, `-mu (Rbar(p2, q2) + Abar p3² + Cbar q3²)`; the planar and
//! spatial blocks decouple because `Bbar` vanishes. Frequencies are
//! reported divided by `mu`.

use nalgebra::{Complex, Matrix4};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::averaging::{AveragedCoefficients, CoefficientErrors, CrossingPolicy};
use crate::equilibrium::{Definiteness, EquilibriumRecord, PlanarHessian, SolverSettings};
use crate::error::{domain, Error, Result};
use crate::kepler::OrbitConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SpatialVerdict {
    LinearlyStable,
    Unstable,
    Inconclusive,
}

/// Linear frequencies divided by `mu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Frequencies {
    pub omega_plane: f64,
    pub omega_z: f64,
    /// `omega_z / omega_plane`.
    pub ratio: f64,
}

impl Frequencies {
    /// Physical frequencies for planet mass fraction `mu`.
    pub fn scaled(&self, mu: f64) -> (f64, f64) {
        (mu * self.omega_plane, mu * self.omega_z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityRecord {
    pub cfg: OrbitConfig,
    pub e_star: f64,
    pub rbar: f64,
    pub abar: f64,
    pub bbar: f64,
    pub cbar: f64,
    pub err: CoefficientErrors,
    pub hessian: PlanarHessian,
    pub planar: Definiteness,
    pub spatial_verdict: SpatialVerdict,
    /// Present when both the planar and the spatial blocks are definite.
    pub frequencies: Option<Frequencies>,
    /// Whether the verdict needed the tightened quadrature.
    pub refined: bool,
}

/// Sign verdict for `Abar`, `Cbar` with their error estimates.
pub fn spatial_verdict(
    abar: f64,
    cbar: f64,
    err_a: f64,
    err_c: f64,
    margin: f64,
) -> SpatialVerdict {
    let clear = |v: f64, e: f64| v.abs() > margin * e;
    if !clear(abar, err_a) || !clear(cbar, err_c) {
        SpatialVerdict::Inconclusive
    } else if abar < 0.0 && cbar < 0.0 {
        SpatialVerdict::LinearlyStable
    } else {
        SpatialVerdict::Unstable
    }
}

/// Evaluates the spatial coefficients at the selected equilibrium and
/// classifies it. An inconclusive verdict is retried once with the
/// quadrature tolerance divided by ten.
pub fn classify_spatial(
    cfg: &OrbitConfig,
    eq: &EquilibriumRecord,
    settings: &SolverSettings,
) -> Result<StabilityRecord> {
    let root = eq
        .selected
        .ok_or_else(|| domain(format!("no stable equilibrium selected ({:?})", eq.status)))?;
    let hessian = root
        .hessian
        .ok_or_else(|| Error::Degenerate("equilibrium carries no planar Hessian".into()))?;
    let margin = settings.verdict_margin;

    let mut refined = false;
    let mut co =
        AveragedCoefficients::compute(cfg, root.e, &settings.quad, CrossingPolicy::Refuse)?;
    let mut verdict = spatial_verdict(co.abar, co.cbar, co.err.a, co.err.c, margin);
    if verdict == SpatialVerdict::Inconclusive {
        let tight = settings.quad.with_tol(settings.quad.tol / 10.0);
        co = AveragedCoefficients::compute(cfg, root.e, &tight, CrossingPolicy::Refuse)?;
        verdict = spatial_verdict(co.abar, co.cbar, co.err.a, co.err.c, margin);
        refined = true;
    }

    let frequencies = if verdict == SpatialVerdict::LinearlyStable
        && root.definiteness == Definiteness::PositiveDefinite
    {
        frequencies(&hessian, co.abar, co.cbar).ok()
    } else {
        None
    };
    Ok(StabilityRecord {
        cfg: *cfg,
        e_star: root.e,
        rbar: co.rbar,
        abar: co.abar,
        bbar: co.bbar,
        cbar: co.cbar,
        err: co.err,
        hessian,
        planar: root.definiteness,
        spatial_verdict: verdict,
        frequencies,
        refined,
    })
}

/// Normal-form frequencies of the two decoupled quadratic blocks.
pub fn frequencies(hessian: &PlanarHessian, abar: f64, cbar: f64) -> Result<Frequencies> {
    let det = hessian.det();
    if !(det > 0.0) {
        return Err(Error::Degenerate(format!(
            "planar Hessian determinant {det:e} is not positive"
        )));
    }
    let prod = abar * cbar;
    if !(prod > 0.0) {
        return Err(Error::Degenerate(format!(
            "Abar * Cbar = {prod:e} is not positive"
        )));
    }
    let omega_plane = det.sqrt();
    let omega_z = 2.0 * prod.sqrt();
    Ok(Frequencies {
        omega_plane,
        omega_z,
        ratio: omega_z / omega_plane,
    })
}

/// Jacobian of Hamilton's equations (divided by `mu`) for the state
/// `(p2, q2, p3, q3)`, with the `p` variables as momenta.
pub fn linearization(hessian: &PlanarHessian, abar: f64, cbar: f64) -> Matrix4<f64> {
    let (pp, qq, pq) = (hessian.pp, hessian.qq, hessian.pq);
    #[rustfmt::skip]
    let m = Matrix4::new(
        pq,  qq,  0.0,        0.0,
        -pp, -pq, 0.0,        0.0,
        0.0, 0.0, 0.0,        2.0 * cbar,
        0.0, 0.0, -2.0 * abar, 0.0,
    );
    m
}

/// Eigenvalues of the linearization, sorted by imaginary part.
pub fn spectrum(m: &Matrix4<f64>) -> [Complex<f64>; 4] {
    let ev = m.complex_eigenvalues();
    let mut out = [ev[0], ev[1], ev[2], ev[3]];
    out.sort_by(|x, y| x.im.total_cmp(&y.im));
    out
}

/// Largest relative deviation of the spectrum from `{±i omega_plane, ±i omega_z}`.
pub fn spectrum_deviation(spec: &[Complex<f64>; 4], f: &Frequencies) -> f64 {
    let mut target = [f.omega_plane, f.omega_z, -f.omega_plane, -f.omega_z];
    target.sort_by(f64::total_cmp);
    let scale = f.omega_plane.max(f.omega_z);
    spec.iter()
        .zip(target)
        .map(|(z, w)| (z.re.abs() + (z.im - w).abs()) / scale)
        .fold(0.0, f64::max)
}

/// A point on a resonance curve `ratio = k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonancePoint {
    pub a: f64,
    pub e_j: f64,
    pub ratio: f64,
}

/// Rectangular parameter grid with the ratio known at its nodes
/// (`values[i * e_j.len() + j]` belongs to `(a[i], e_j[j])`).
#[derive(Debug, Clone, Copy)]
pub struct RatioField<'a> {
    pub a: &'a [f64],
    pub e_j: &'a [f64],
    pub values: &'a [Option<f64>],
}

/// Largest `|ratio - k|` accepted at a traced point; a bracket that
/// closes on a larger value straddles a jump, not a crossing.
pub const RESONANCE_ACCEPT: f64 = 1e-3;

/// Locates `ratio = k` along every grid edge whose end values straddle `k`
/// and refines it to `param_tol` with `eval`, which recomputes the ratio
/// at an arbitrary parameter point. Every returned point was evaluated.
pub fn trace_resonance<F>(field: RatioField, k: f64, param_tol: f64, eval: F) -> Vec<ResonancePoint>
where
    F: Fn(f64, f64) -> Option<f64> + Sync,
{
    let (na, nj) = (field.a.len(), field.e_j.len());
    assert_eq!(
        field.values.len(),
        na * nj,
        "ratio field does not match the grid"
    );
    let mut edges = Vec::new();
    for i in 0..na {
        for j in 0..nj {
            if j + 1 < nj {
                edges.push(((i, j), (i, j + 1)));
            }
            if i + 1 < na {
                edges.push(((i, j), (i + 1, j)));
            }
        }
    }
    edges
        .par_iter()
        .filter_map(|&((i0, j0), (i1, j1))| {
            let r0 = field.values[i0 * nj + j0]? - k;
            let r1 = field.values[i1 * nj + j1]? - k;
            if r0.signum() == r1.signum() && r0 != 0.0 && r1 != 0.0 {
                return None;
            }
            let p0 = (field.a[i0], field.e_j[j0]);
            let p1 = (field.a[i1], field.e_j[j1]);
            refine_edge(p0, p1, r0, r1, k, param_tol, &eval)
        })
        .collect()
}

fn refine_edge<F>(
    p0: (f64, f64),
    p1: (f64, f64),
    r0: f64,
    r1: f64,
    k: f64,
    param_tol: f64,
    eval: &F,
) -> Option<ResonancePoint>
where
    F: Fn(f64, f64) -> Option<f64>,
{
    let at = |t: f64| (p0.0 + t * (p1.0 - p0.0), p0.1 + t * (p1.1 - p0.1));
    let length = (p1.0 - p0.0).abs().max((p1.1 - p0.1).abs());
    let (mut lo, mut hi, mut flo, mut fhi) = (0.0, 1.0, r0, r1);
    let mut best = if r0.abs() <= r1.abs() {
        (0.0, r0)
    } else {
        (1.0, r1)
    };
    let mut side = 0i8;
    while (hi - lo) * length > param_tol && best.1 != 0.0 {
        let width = hi - lo;
        let mut t = hi - fhi * (hi - lo) / (fhi - flo);
        if !(t > lo && t < hi) {
            t = 0.5 * (lo + hi);
        }
        let (a, e_j) = at(t);
        let ft = eval(a, e_j)? - k;
        if ft.abs() < best.1.abs() {
            best = (t, ft);
        }
        if ft.signum() == flo.signum() {
            lo = t;
            flo = ft;
            if side == -1 {
                fhi *= 0.5;
            }
            side = -1;
        } else {
            hi = t;
            fhi = ft;
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        }
        if hi - lo > 0.5 * width {
            // interpolation stalled on one side
            let mid = 0.5 * (lo + hi);
            let (a, e_j) = at(mid);
            let fm = eval(a, e_j)? - k;
            if fm.abs() < best.1.abs() {
                best = (mid, fm);
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
    }
    // the reported point must lie within the final bracket
    let (t, f) = if best.0 >= lo && best.0 <= hi {
        best
    } else if flo.abs() <= fhi.abs() {
        (lo, flo)
    } else {
        (hi, fhi)
    };
    if f.abs() >= RESONANCE_ACCEPT {
        return None;
    }
    let (a, e_j) = at(t);
    Some(ResonancePoint {
        a,
        e_j,
        ratio: f + k,
    })
}
