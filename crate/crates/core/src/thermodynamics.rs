//! Free energies of the triangular Ising model on the cylinder and the plane.
//!
//! With `c_i = cosh(2 beta J_i)` and `s_i = sinh(2 beta J_i)`,
//!
//! ```text
//! g = c1 c2 c3 + s1 s2 s3 - (s1 + s2 + s3)
//! h = s1 (1 - cos k1) + s2 (1 - cos k2) + s3 (1 - cos(k1 + k2))
//! f = -log 2 - (1 / 8 pi^2) int log(g + h) dk1 dk2
//! ```
//!
//! The plane integral is reduced analytically in `k2`: for fixed `k1`,
//! `g + h = u - b cos(k2 + phi)` and
//! `(1/2pi) int log(u - b cos x) dx = log((u + sqrt(u^2 - b^2)) / 2)`.
//! The remaining `k1` integral, and its `beta` derivatives, use the
//! doubling midpoint rule.

use std::f64::consts::{LN_2, PI};

use crate::critical::critical_beta;
use crate::error::{Error, Result};
use crate::kacward::MomentumPoint;
use crate::lattice::Couplings;
use crate::numerics::{linear_fit, NeumaierSum};
use crate::quadrature::{integrate_periodic, Estimate, QuadratureSpec};

/// `g`, `h` and their first two `beta` derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GHDecomposition {
    pub g: f64,
    pub g1: f64,
    pub g2: f64,
    pub h: f64,
    pub h1: f64,
    pub h2: f64,
}

/// Hyperbolic factors of the three couplings and their `beta` derivatives.
#[derive(Debug, Clone, Copy)]
struct Hyp {
    c: [f64; 3],
    s: [f64; 3],
    c1: [f64; 3],
    s1: [f64; 3],
    c2: [f64; 3],
    s2: [f64; 3],
}

impl Hyp {
    fn new(beta: f64, j: &Couplings) -> Self {
        let j = j.as_array();
        let c = j.map(|x| (2.0 * beta * x).cosh());
        let s = j.map(|x| (2.0 * beta * x).sinh());
        let mut out = Self {
            c,
            s,
            c1: [0.0; 3],
            s1: [0.0; 3],
            c2: [0.0; 3],
            s2: [0.0; 3],
        };
        for i in 0..3 {
            out.c1[i] = 2.0 * j[i] * s[i];
            out.s1[i] = 2.0 * j[i] * c[i];
            out.c2[i] = 4.0 * j[i] * j[i] * c[i];
            out.s2[i] = 4.0 * j[i] * j[i] * s[i];
        }
        out
    }
}

/// `(x1 x2 x3, ', '')` from values and derivatives.
fn product3(x: [f64; 3], x1: [f64; 3], x2: [f64; 3]) -> (f64, f64, f64) {
    let p = x[0] * x[1] * x[2];
    let p1 = x1[0] * x[1] * x[2] + x[0] * x1[1] * x[2] + x[0] * x[1] * x1[2];
    let p2 = x2[0] * x[1] * x[2]
        + x[0] * x2[1] * x[2]
        + x[0] * x[1] * x2[2]
        + 2.0 * (x1[0] * x1[1] * x[2] + x1[0] * x[1] * x1[2] + x[0] * x1[1] * x1[2]);
    (p, p1, p2)
}

pub fn eval_gh(beta: f64, k: &MomentumPoint, j: &Couplings) -> GHDecomposition {
    let hy = Hyp::new(beta, j);
    let (pc, pc1, pc2) = product3(hy.c, hy.c1, hy.c2);
    let (ps, ps1, ps2) = product3(hy.s, hy.s1, hy.s2);
    let kk = k.as_array();
    let mut out = GHDecomposition {
        g: pc + ps,
        g1: pc1 + ps1,
        g2: pc2 + ps2,
        h: 0.0,
        h1: 0.0,
        h2: 0.0,
    };
    for i in 0..3 {
        out.g -= hy.s[i];
        out.g1 -= hy.s1[i];
        out.g2 -= hy.s2[i];
        // 1 - cos k, without cancellation for small k
        let w = 2.0 * (0.5 * kk[i]).sin().powi(2);
        out.h += hy.s[i] * w;
        out.h1 += hy.s1[i] * w;
        out.h2 += hy.s2[i] * w;
    }
    out
}

/// `(1/2pi) int dk2 log(g + h)` and its first two `beta` derivatives at fixed `k1`.
fn reduced_integrand(hy: &Hyp, p: (f64, f64, f64), k1: f64) -> [f64; 3] {
    let (pp, pp1, pp2) = p;
    let cs = k1.cos();
    let [_, s2, s3] = hy.s;
    let [_, d2, d3] = hy.s1;
    let [_, e2, e3] = hy.s2;
    let u = pp - hy.s[0] * cs;
    let u1 = pp1 - hy.s1[0] * cs;
    let u2 = pp2 - hy.s2[0] * cs;
    let v = s2 * s2 + s3 * s3 + 2.0 * s2 * s3 * cs;
    let v1 = 2.0 * (s2 * d2 + s3 * d3) + 2.0 * (d2 * s3 + s2 * d3) * cs;
    let v2 = 2.0 * (d2 * d2 + s2 * e2 + d3 * d3 + s3 * e3) + 2.0 * (e2 * s3 + 2.0 * d2 * d3 + s2 * e3) * cs;
    let r = (u * u - v).max(0.0).sqrt();
    let q = u + r;
    let r1 = (u * u1 - 0.5 * v1) / r;
    let q1 = u1 + r1;
    let i0 = (0.5 * q).ln();
    let i1 = u1 / r - v1 / (2.0 * r * q);
    let i2 = u2 / r - u1 * r1 / (r * r) - v2 / (2.0 * r * q) + v1 * (r1 * q + r * q1) / (2.0 * r * r * q * q);
    [i0, i1, i2]
}

/// Result of [`thermo_sample`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermoSample {
    pub beta: f64,
    pub f: f64,
    pub f1: f64,
    pub f2: f64,
    pub quadrature_error: f64,
}

fn plane_integrals(beta: f64, j: &Couplings, quad: &QuadratureSpec) -> Result<([f64; 3], f64)> {
    let hy = Hyp::new(beta, j);
    let (pc, pc1, pc2) = product3(hy.c, hy.c1, hy.c2);
    let (ps, ps1, ps2) = product3(hy.s, hy.s1, hy.s2);
    let p = (pc + ps, pc1 + ps1, pc2 + ps2);
    let r = integrate_periodic(|k1| reduced_integrand(&hy, p, k1), quad)?;
    let scale = 1.0 / (4.0 * PI);
    Ok((r.values.map(|x| -scale * x), scale * r.error))
}

/// Plane free energy at couplings `J` (inverse temperature absorbed).
pub fn plane_free_energy(j: &Couplings, quad: &QuadratureSpec) -> Result<Estimate> {
    let hy = Hyp::new(1.0, j);
    let (pc, _, _) = product3(hy.c, hy.c1, hy.c2);
    let (ps, _, _) = product3(hy.s, hy.s1, hy.s2);
    let p = (pc + ps, 0.0, 0.0);
    let r = integrate_periodic(|k1| [reduced_integrand(&hy, p, k1)[0]], quad)?;
    Ok(Estimate {
        value: -LN_2 - r.values[0] / (4.0 * PI),
        error: r.error / (4.0 * PI),
    })
}

/// Plane free energy from the plain `n x n` tensor midpoint rule.
pub fn plane_free_energy_tensor(j: &Couplings, n: usize) -> f64 {
    let h = 2.0 * PI / n as f64;
    let node = |i: usize| -PI + (i as f64 + 0.5) * h;
    let mut s = NeumaierSum::new();
    for a in 0..n {
        for b in 0..n {
            let gh = eval_gh(1.0, &MomentumPoint::new(node(a), node(b)), j);
            s.add((gh.g + gh.h).ln());
        }
    }
    -LN_2 - s.value() * h * h / (8.0 * PI * PI)
}

/// Radius of the exclusion zone around a critical point for derivatives.
pub const CRITICAL_EXCLUSION: f64 = 1e-9;

fn check_exclusion(beta: f64, j: &Couplings) -> Result<()> {
    if let Some(bc) = critical_beta(j) {
        if (beta - bc).abs() <= CRITICAL_EXCLUSION {
            return Err(Error::NearCritical {
                beta,
                beta_c: bc,
                radius: CRITICAL_EXCLUSION,
            });
        }
    }
    Ok(())
}

/// `f(beta)`, `f'(beta)` and `f''(beta)` for the plane at couplings `beta J`.
pub fn thermo_sample(beta: f64, j: &Couplings, quad: &QuadratureSpec) -> Result<ThermoSample> {
    if !(beta > 0.0) {
        return Err(Error::Precondition(format!("beta must be positive, got {beta}")));
    }
    check_exclusion(beta, j)?;
    let ([i0, i1, i2], err) = plane_integrals(beta, j, quad)?;
    Ok(ThermoSample {
        beta,
        f: -LN_2 + i0,
        f1: i1,
        f2: i2,
        quadrature_error: err,
    })
}

/// `(f', f'')` at `beta`.
pub fn free_energy_derivatives(beta: f64, j: &Couplings, quad: &QuadratureSpec) -> Result<(f64, f64)> {
    let s = thermo_sample(beta, j, quad)?;
    Ok((s.f1, s.f2))
}

/// Cylinder free energy `f_M` at couplings `J`.
pub fn cylinder_free_energy(m: usize, j: &Couplings, quad: &QuadratureSpec) -> Result<Estimate> {
    if m < 2 {
        return Err(Error::Precondition(format!("cylinder needs M >= 2, got {m}")));
    }
    let hy = Hyp::new(1.0, j);
    let (pc, _, _) = product3(hy.c, hy.c1, hy.c2);
    let (ps, _, _) = product3(hy.s, hy.s1, hy.s2);
    let g = pc + ps - hy.s.iter().sum::<f64>();
    let k2s: Vec<f64> = (0..m).map(|i| (2 * i + 1) as f64 * PI / m as f64).collect();
    let integrand = |k1: f64| {
        let mut s = NeumaierSum::new();
        for &k2 in &k2s {
            let h = hy.s[0] * 2.0 * (0.5 * k1).sin().powi(2)
                + hy.s[1] * 2.0 * (0.5 * k2).sin().powi(2)
                + hy.s[2] * 2.0 * (0.5 * (k1 + k2)).sin().powi(2);
            s.add((g + h).ln());
        }
        [s.value()]
    };
    let r = integrate_periodic(integrand, quad)?;
    let scale = 1.0 / (4.0 * PI * m as f64);
    Ok(Estimate {
        value: -LN_2 - scale * r.values[0],
        error: scale * r.error,
    })
}

/// Least-squares line `y = slope log d + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual divided by the range of the fitted values.
    pub relative_residual: f64,
}

pub fn fit_log(distances: &[f64], values: &[f64]) -> LogFit {
    let x: Vec<f64> = distances.iter().map(|d| d.ln()).collect();
    let (slope, intercept, rms) = linear_fit(&x, values);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    LogFit {
        slope,
        intercept,
        relative_residual: if hi > lo { rms / (hi - lo) } else { 0.0 },
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingularityFit {
    pub below: LogFit,
    pub above: LogFit,
    pub f2_below: Vec<f64>,
    pub f2_above: Vec<f64>,
}

impl SingularityFit {
    pub fn consistent(&self, min_slope: f64, max_residual: f64) -> bool {
        let (a, b) = (self.below, self.above);
        a.slope.abs() > min_slope
            && b.slope.abs() > min_slope
            && a.slope.signum() == b.slope.signum()
            && a.relative_residual < max_residual
            && b.relative_residual < max_residual
    }
}

/// Fits `f''(beta_c -+ d)` against `log d` on both sides of the critical point.
pub fn log_singularity_fit(j: &Couplings, beta_c: f64, distances: &[f64], quad: &QuadratureSpec) -> Result<SingularityFit> {
    if !(beta_c > 0.0) || distances.iter().any(|&d| !(d > 0.0)) {
        return Err(Error::Precondition("need beta_c > 0 and positive distances".into()));
    }
    let side = |sign: f64| -> Result<Vec<f64>> {
        distances
            .iter()
            .map(|&d| {
                let ([_, _, f2], _) = plane_integrals(beta_c + sign * d, j, quad)?;
                Ok(f2)
            })
            .collect()
    };
    let f2_below = side(-1.0)?;
    let f2_above = side(1.0)?;
    Ok(SingularityFit {
        below: fit_log(distances, &f2_below),
        above: fit_log(distances, &f2_above),
        f2_below,
        f2_above,
    })
}
