//! Critical temperatures.
//!
//! For `J1 = J2 = 1` the critical point solves `a(beta) = 0`, inverted
//! through the monotone function `j(t)`. For general couplings the gap
//! `min_k (g + h)` closes exactly when one of the four corner polynomials
//! `P_eps(beta) = a(eps1 t1, eps2 t2, eps1 eps2 t3)` changes sign, since the
//! Fourier block equals `P_eps^2` at the corners of the Brillouin zone.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::kacward::MomentumPoint;
use crate::lattice::Couplings;
use crate::numerics::bisect;
use crate::thermodynamics::eval_gh;

/// `a(beta) = 1 + t^2 tau - 2t - tau - t^2 - 2 t tau`, `t = tanh beta`, `tau = tanh(beta J3)`.
pub fn a_of_beta(beta: f64, j3: f64) -> f64 {
    let t = beta.tanh();
    let tau = (beta * j3).tanh();
    1.0 + t * t * tau - 2.0 * t - tau - t * t - 2.0 * t * tau
}

/// `da/dbeta`.
pub fn a_prime(beta: f64, j3: f64) -> f64 {
    let t = beta.tanh();
    let tau = (beta * j3).tanh();
    -2.0 * (1.0 - t * t) * (1.0 + t + (1.0 - t) * tau) - j3 * (1.0 + 2.0 * t - t * t) * (1.0 - tau * tau)
}

/// `a'(beta_c) = -4 (1 - t^2)(1 + t^2 + 2 t J3) / (1 + 2t - t^2)` at `t = tanh beta_c`.
pub fn a_prime_at_critical(t: f64, j3: f64) -> f64 {
    -4.0 * (1.0 - t * t) * (1.0 + t * t + 2.0 * t * j3) / (1.0 + 2.0 * t - t * t)
}

/// `j(t) = artanh((1 - 2t - t^2) / (1 + 2t - t^2)) / artanh t` on `(0, 1)`.
pub fn j_of_t(t: f64) -> f64 {
    assert!(t > 0.0 && t < 1.0, "j(t) is defined on (0, 1), got {t}");
    let den = 1.0 + 2.0 * t - t * t;
    debug_assert!(den > 0.0);
    ((1.0 - 2.0 * t - t * t) / den).atanh() / t.atanh()
}

/// `j(tanh beta)` written in `beta` directly:
/// `j = -1 + (ln 2 - ln(1 - e^{-4 beta})) / (2 beta)`.
///
/// Stays accurate when `tanh beta` rounds to 1, which happens long before
/// `beta_c` diverges as `J3 -> -1`.
pub fn j_of_beta(beta: f64) -> f64 {
    -1.0 + (std::f64::consts::LN_2 - (-(-4.0 * beta).exp()).ln_1p()) / (2.0 * beta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CriticalMethod {
    CdclInversion,
    GapScan,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypothesisChecks {
    /// `g''(beta_c)`.
    pub g2: f64,
    /// Grid estimate of the largest `c` with `h >= c (k1^2 + k2^2)`.
    pub c: f64,
    /// `sinh(2 beta_c J_i) + 2 sinh(2 beta_c J3) > 0` for `i = 1, 2`.
    pub sufficient_condition: bool,
    /// `a'(beta_c)` from the closed form, when `J1 = J2 = 1`.
    pub a_prime: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalResult {
    pub beta_c: Option<f64>,
    pub method: CriticalMethod,
    pub gap_min_location: MomentumPoint,
    pub hypothesis_checks: Option<HypothesisChecks>,
}

const BISECT_TOL: f64 = 1e-15;

/// Critical point of the `(1, 1, J3)` model; absent for `J3 <= -1`.
pub fn beta_c_from_j3(j3: f64) -> CriticalResult {
    let beta_c = cdcl_root(j3);
    CriticalResult {
        beta_c,
        method: CriticalMethod::CdclInversion,
        gap_min_location: MomentumPoint::origin(),
        hypothesis_checks: beta_c.map(|b| singularity_hypotheses(&Couplings::new(1.0, 1.0, j3), b)),
    }
}

fn cdcl_root(j3: f64) -> Option<f64> {
    if !(j3 > -1.0) || !j3.is_finite() {
        return None;
    }
    // j decreases from +inf at beta -> 0 to -1 at beta -> inf
    let mut lo = 1e-6;
    while j_of_beta(lo) <= j3 {
        lo *= 0.5;
        if lo < 1e-300 {
            return None;
        }
    }
    let mut hi = 1.0;
    while j_of_beta(hi) >= j3 {
        hi *= 2.0;
        if hi > 1e300 {
            return None;
        }
    }
    bisect(|b| j_of_beta(b) - j3, lo, hi, BISECT_TOL * hi.max(1.0))
}

/// The four corners `(0,0), (pi,0), (0,pi), (pi,pi)` of the Brillouin zone.
pub const CORNERS: [(f64, f64); 4] = [(1.0, 1.0), (-1.0, 1.0), (1.0, -1.0), (-1.0, -1.0)];

fn corner_point(eps: (f64, f64)) -> MomentumPoint {
    MomentumPoint::new(if eps.0 > 0.0 { 0.0 } else { PI }, if eps.1 > 0.0 { 0.0 } else { PI })
}

fn a_poly(x: [f64; 3]) -> f64 {
    let [x, y, z] = x;
    1.0 + x * y * z - x - y - z - x * y - y * z - z * x
}

/// `P_eps(beta)`; `P_(1,1)` reduces to `a(beta)` for `J = (1, 1, J3)`.
///
/// Written as a multilinear polynomial in `q_i = 1 - |t_i|`, which keeps
/// full relative accuracy after `tanh(beta J_i)` has rounded to one.
pub fn corner_polynomial_beta(beta: f64, j: &Couplings, eps: (f64, f64)) -> f64 {
    let flips = [eps.0, eps.1, eps.0 * eps.1];
    let mut sigma = [0.0; 3];
    let mut q = [0.0; 3];
    for (i, jj) in j.as_array().into_iter().enumerate() {
        let x = flips[i] * jj;
        sigma[i] = if x < 0.0 { -1.0 } else { 1.0 };
        let e = (-2.0 * beta * x.abs()).exp();
        q[i] = 2.0 * e / (1.0 + e);
    }
    let mut total = 0.0;
    for s in 0..8usize {
        // coefficient of prod_{i in s} q_i, by inclusion-exclusion over corners
        let mut c = 0.0;
        for t in 0..8usize {
            if t & !s != 0 {
                continue;
            }
            let x = [0, 1, 2].map(|i| if t >> i & 1 == 1 { 0.0 } else { sigma[i] });
            let sign = if (s & !t).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            c += sign * a_poly(x);
        }
        let mut m = c;
        for (i, qi) in q.iter().enumerate() {
            if s >> i & 1 == 1 {
                m *= qi;
            }
        }
        total += m;
    }
    total
}

/// All roots of the corner polynomials in `(0, beta_max]`, sorted, with their corner.
pub fn gap_roots(j: &Couplings, beta_max: f64) -> Vec<(f64, MomentumPoint)> {
    const GRID: usize = 4096;
    let mut roots = Vec::new();
    for eps in CORNERS {
        let p = |b: f64| corner_polynomial_beta(b, j, eps);
        let mut prev_b: f64 = 0.0;
        let mut prev: f64 = 1.0;
        for i in 1..=GRID {
            let b = beta_max * i as f64 / GRID as f64;
            let v = p(b);
            if v == 0.0 || v.signum() != prev.signum() {
                if let Some(r) = bisect(p, prev_b.max(1e-300), b, BISECT_TOL * b.max(1.0)) {
                    roots.push((r, corner_point(eps)));
                }
            }
            prev_b = b;
            if v != 0.0 {
                prev = v;
            }
        }
    }
    roots.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    roots
}

/// Locates the smallest `beta` at which the gap closes.
pub fn gap_scan(j: &Couplings, beta_max: f64) -> CriticalResult {
    let first = gap_roots(j, beta_max).first().copied();
    CriticalResult {
        beta_c: first.map(|r| r.0),
        method: CriticalMethod::GapScan,
        gap_min_location: first.map_or(MomentumPoint::origin(), |r| r.1),
        hypothesis_checks: first.map(|r| singularity_hypotheses(j, r.0)),
    }
}

/// Brings couplings with two equal magnitudes to the form `K (1, 1, J3)`.
///
/// Permutations and the sign flips `(J1,J2,J3) -> (-J1,-J2,J3)` and its
/// cyclic versions leave the free energy unchanged. Returns `(K, J3)`.
pub fn cdcl_normal_form(j: &Couplings) -> Option<(f64, f64)> {
    let a = j.as_array();
    for (p, q, r) in [(0, 1, 2), (0, 2, 1), (1, 2, 0)] {
        let k = a[p].abs();
        if k > 0.0 && a[q].abs() == k {
            let sign = (a[0] * a[1] * a[2]).signum();
            let j3 = if a[r] == 0.0 { 0.0 } else { sign * a[r].abs() / k };
            return Some((k, j3));
        }
    }
    None
}

/// Critical inverse temperature of the plane model, if any.
///
/// Exact CDCL inversion when two couplings share a magnitude, corner-gap
/// root finding otherwise.
pub fn critical_beta(j: &Couplings) -> Option<f64> {
    if let Some((k, j3)) = cdcl_normal_form(j) {
        return cdcl_root(j3).map(|b| b / k);
    }
    let scale = j.max_abs();
    if scale == 0.0 {
        return None;
    }
    gap_scan(j, 50.0 / scale).beta_c
}

/// Minimum of `h(beta; k)` over the Brillouin zone and a minimiser.
///
/// Closed form for `J1 = J2 > 0`; otherwise a 512^2 midpoint scan refined by
/// coordinate descent.
pub fn min_h(beta: f64, j: &Couplings) -> (f64, MomentumPoint) {
    if j.j1 == j.j2 && j.j1 > 0.0 {
        let s = (2.0 * beta * j.j1).sinh();
        let alpha = -(2.0 * beta * j.j3).sinh() / s;
        if alpha <= 0.5 {
            return (0.0, MomentumPoint::origin());
        }
        let x = (1.0 / (2.0 * alpha)).acos();
        return (2.0 * s * (1.0 - alpha - 1.0 / (4.0 * alpha)), MomentumPoint::new(x, x));
    }
    min_h_scan(beta, j)
}

/// Grid scan plus coordinate descent, exposed for cross-checks.
pub fn min_h_scan(beta: f64, j: &Couplings) -> (f64, MomentumPoint) {
    const N: usize = 512;
    let h = |k1: f64, k2: f64| eval_gh(beta, &MomentumPoint::new(k1, k2), j).h;
    let step = 2.0 * PI / N as f64;
    let node = |i: usize| -PI + (i as f64 + 0.5) * step;
    let (mut best, mut k1, mut k2) = (f64::INFINITY, 0.0, 0.0);
    for a in 0..N {
        for b in 0..N {
            let v = h(node(a), node(b));
            if v < best {
                (best, k1, k2) = (v, node(a), node(b));
            }
        }
    }
    // the origin is not a node but is always a candidate, h(0, 0) = 0
    if 0.0 < best {
        (best, k1, k2) = (0.0, 0.0, 0.0);
    }
    let mut width = step;
    for _ in 0..500 {
        let before = best;
        let n1 = golden_min(|x| h(x, k2), k1 - width, k1 + width);
        if h(n1, k2) < best {
            k1 = n1;
            best = h(k1, k2);
        }
        let n2 = golden_min(|y| h(k1, y), k2 - width, k2 + width);
        if h(k1, n2) < best {
            k2 = n2;
            best = h(k1, k2);
        }
        if before - best < 1e-16 * best.abs().max(1.0) {
            width *= 0.5;
            if width < 1e-9 {
                break;
            }
        }
    }
    (best, MomentumPoint::new(k1, k2))
}

fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..100 {
        if (b - a).abs() < 1e-15 {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Checks the hypotheses under which the specific heat diverges logarithmically.
pub fn singularity_hypotheses(j: &Couplings, beta_c: f64) -> HypothesisChecks {
    const N: usize = 512;
    let gh0 = eval_gh(beta_c, &MomentumPoint::origin(), j);
    let step = 2.0 * PI / N as f64;
    let node = |i: usize| -PI + (i as f64 + 0.5) * step;
    let c = (0..N)
        .into_par_iter()
        .map(|a| {
            (0..N)
                .map(|b| {
                    let (k1, k2) = (node(a), node(b));
                    eval_gh(beta_c, &MomentumPoint::new(k1, k2), j).h / (k1 * k1 + k2 * k2)
                })
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| f64::INFINITY, f64::min);
    let s3 = (2.0 * beta_c * j.j3).sinh();
    let sufficient = (2.0 * beta_c * j.j1).sinh() + 2.0 * s3 > 0.0 && (2.0 * beta_c * j.j2).sinh() + 2.0 * s3 > 0.0;
    let a_prime = (j.j1 == 1.0 && j.j2 == 1.0).then(|| a_prime_at_critical(beta_c.tanh(), j.j3));
    HypothesisChecks {
        g2: gh0.g2,
        c: c.max(0.0),
        sufficient_condition: sufficient,
        a_prime,
    }
}

/// `(J3, beta_c)` along the line `J1 = J2 = 1`.
pub fn phase_diagram_sweep(j3_values: &[f64]) -> Vec<(f64, Option<f64>)> {
    j3_values.par_iter().map(|&j3| (j3, cdcl_root(j3))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const BC_ONE: f64 = 0.274_653_072_167_027_3;
    const BC_ZERO: f64 = 0.440_686_793_509_771_5;

    #[test]
    fn closed_form_critical_points() {
        assert!((BC_ONE - 0.25 * 3f64.ln()).abs() < 1e-15);
        assert!((BC_ZERO - (2f64.sqrt() - 1.0).atanh()).abs() < 1e-15);
        assert!((beta_c_from_j3(1.0).beta_c.unwrap() - BC_ONE).abs() < 1e-12);
        assert!((beta_c_from_j3(0.0).beta_c.unwrap() - BC_ZERO).abs() < 1e-12);
        assert!(beta_c_from_j3(-1.0).beta_c.is_none());
        assert!(beta_c_from_j3(-2.0).beta_c.is_none());
        let near = beta_c_from_j3(-0.999).beta_c.unwrap();
        assert!(near.is_finite() && near > 3.0);
    }

    #[test]
    fn a_examples() {
        assert!(a_of_beta(BC_ZERO, 0.0).abs() < 1e-14);
        assert!((a_of_beta(1e-12, 0.7) - 1.0).abs() < 1e-11);
    }

    #[test]
    fn j_forms_agree_and_decrease() {
        assert!(j_of_t(2f64.sqrt() - 1.0).abs() < 1e-15);
        let mut prev = f64::INFINITY;
        for i in 1..1000 {
            let t = i as f64 / 1000.0;
            let v = j_of_t(t);
            assert!(v < prev);
            prev = v;
            let b = t.atanh();
            assert!((v - j_of_beta(b)).abs() < 1e-11 * v.abs().max(1.0), "t={t}");
        }
    }

    #[test]
    fn derivative_of_a() {
        for (b, j3) in [(0.3, 0.5), (1.2, -0.7), (0.05, 2.0)] {
            let h = 1e-6;
            let fd = (a_of_beta(b + h, j3) - a_of_beta(b - h, j3)) / (2.0 * h);
            assert!((a_prime(b, j3) - fd).abs() < 1e-8);
        }
        for j3 in [-0.9, -0.3, 0.0, 1.0, 3.0] {
            let bc = beta_c_from_j3(j3).beta_c.unwrap();
            let ap = a_prime_at_critical(bc.tanh(), j3);
            assert!((ap - a_prime(bc, j3)).abs() < 1e-10);
            assert!(ap < 0.0);
        }
    }

    #[test]
    fn corner_polynomial_matches_naive_form() {
        let j = Couplings::new(0.8, -1.3, 0.45);
        for eps in CORNERS {
            for i in 1..200 {
                let b = 0.02 * i as f64;
                let t = j.scaled(b).tanh();
                let naive = a_poly([eps.0 * t[0], eps.1 * t[1], eps.0 * eps.1 * t[2]]);
                assert!((naive - corner_polynomial_beta(b, &j, eps)).abs() < 1e-14, "{eps:?} {b}");
            }
        }
    }

    #[test]
    fn gap_scan_agrees_with_cdcl() {
        for j3 in [-0.5, 0.0, 1.0, 2.5] {
            let r = gap_scan(&Couplings::new(1.0, 1.0, j3), 20.0);
            let b = beta_c_from_j3(j3).beta_c.unwrap();
            assert!((r.beta_c.unwrap() - b).abs() < 1e-12, "{j3}");
            assert_eq!(r.gap_min_location, MomentumPoint::origin());
        }
        assert!(gap_scan(&Couplings::new(1.0, 1.0, -1.5), 50.0).beta_c.is_none());
    }

    #[test]
    fn normal_form_handles_flips_and_permutations() {
        assert_eq!(cdcl_normal_form(&Couplings::new(-1.0, -1.0, 0.5)), Some((1.0, 0.5)));
        assert_eq!(cdcl_normal_form(&Couplings::new(2.0, 1.0, 2.0)), Some((2.0, 0.5)));
        assert_eq!(cdcl_normal_form(&Couplings::new(-2.0, 1.0, 2.0)), Some((2.0, -0.5)));
        assert_eq!(cdcl_normal_form(&Couplings::new(1.0, 2.0, 3.0)), None);
        let direct = critical_beta(&Couplings::new(1.0, 1.0, 0.5)).unwrap();
        let flipped = critical_beta(&Couplings::new(-1.0, -1.0, 0.5)).unwrap();
        assert!((direct - flipped).abs() < 1e-14);
        let general = gap_scan(&Couplings::new(-1.0, -1.0, 0.5), 20.0).beta_c.unwrap();
        assert!((general - direct).abs() < 1e-12);
    }

    #[test]
    fn min_h_closed_form_and_scan() {
        let (v, k) = min_h(0.7, &Couplings::new(1.0, 1.0, 1.0));
        assert_eq!((v, k), (0.0, MomentumPoint::origin()));
        // alpha > 1/2 needs sinh(2 beta |J3|) > sinh(2 beta) / 2
        let j = Couplings::new(1.0, 1.0, -1.5);
        let (closed, _) = min_h(0.8, &j);
        assert!(closed < 0.0);
        let (scan, _) = min_h_scan(0.8, &j);
        assert!((closed - scan).abs() < 1e-9, "{closed} vs {scan}");
    }

    #[test]
    fn min_h_vanishes_at_criticality() {
        for j3 in [-0.8, 0.0, 1.0] {
            let b = beta_c_from_j3(j3).beta_c.unwrap();
            let (v, k) = min_h(b, &Couplings::new(1.0, 1.0, j3));
            assert_eq!(v, 0.0);
            assert_eq!(k, MomentumPoint::origin());
        }
    }

    #[test]
    fn hypotheses_on_the_special_line() {
        let h = singularity_hypotheses(&Couplings::new(1.0, 1.0, 1.0), BC_ONE);
        assert!(h.g2 > 0.0 && h.c > 0.0 && h.sufficient_condition);
        assert!(h.a_prime.unwrap() != 0.0);
        let h0 = singularity_hypotheses(&Couplings::new(1.0, 1.0, 0.0), BC_ZERO);
        assert!(h0.c > 0.0);
    }

    #[test]
    fn sweep_is_monotone() {
        let j3: Vec<f64> = (0..40).map(|i| -0.9 + i as f64 * 0.1).collect();
        let rows = phase_diagram_sweep(&j3);
        for w in rows.windows(2) {
            assert!(w[1].1.unwrap() < w[0].1.unwrap());
        }
        assert_eq!(phase_diagram_sweep(&[-1.0]), vec![(-1.0, None)]);
    }
}
