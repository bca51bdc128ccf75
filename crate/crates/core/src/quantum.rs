//! The periodic transverse-field Ising chain
//! `H_L = -sum S^z_i S^z_{i+1} - h sum S^x_i` with `S = sigma / 2`.

use std::f64::consts::{LN_2, PI};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::Couplings;
use crate::numerics::{linear_fit, log_cosh, log_sum_exp};
use crate::oracle::TransferMatrix;
use crate::quadrature::{integrate_periodic, Estimate, QuadratureSpec};
use crate::thermodynamics::cylinder_free_energy;

/// Largest chain handled by [`exact_diag_free_energy`].
pub const MAX_EXACT_DIAG_L: usize = 14;
/// Largest chain handled by [`lie_trotter_trace`].
pub const MAX_LIE_TROTTER_L: usize = 12;
/// Radius of the exclusion zone around `|h| = 1/2` for `e_0''`.
pub const QUANTUM_CRITICAL_EXCLUSION: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantumParams {
    pub beta: f64,
    pub h: f64,
}

impl QuantumParams {
    pub fn new(beta: f64, h: f64) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::Precondition(format!("beta must be positive, got {beta}")));
        }
        if !h.is_finite() {
            return Err(Error::Precondition(format!("h must be finite, got {h}")));
        }
        Ok(Self { beta, h })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionPoint {
    pub k: f64,
    pub epsilon: f64,
}

/// `epsilon^2 = 1 + 4h^2 + 4h cos k`, arranged so no cancellation occurs near `|h| = 1/2`.
pub fn epsilon_squared(h: f64, k: f64) -> f64 {
    if h >= 0.0 {
        (1.0 - 2.0 * h).powi(2) + 8.0 * h * (0.5 * k).cos().powi(2)
    } else {
        (1.0 + 2.0 * h).powi(2) - 8.0 * h * (0.5 * k).sin().powi(2)
    }
}

pub fn dispersion(h: f64, k: f64) -> DispersionPoint {
    DispersionPoint {
        k,
        epsilon: epsilon_squared(h, k).sqrt(),
    }
}

/// `f^qu(beta, h) = -(1/beta) log 2 - (1 / 2 pi beta) int log cosh(beta epsilon / 4) dk`.
pub fn quantum_free_energy(p: &QuantumParams, quad: &QuadratureSpec) -> Result<Estimate> {
    let b = p.beta;
    let r = integrate_periodic(|k| [log_cosh(0.25 * b * dispersion(p.h, k).epsilon)], quad)?;
    let scale = 1.0 / (2.0 * PI * b);
    Ok(Estimate {
        value: -LN_2 / b - scale * r.values[0],
        error: scale * r.error,
    })
}

/// `e_0(h) = -(1 / 8 pi) int epsilon dk`.
pub fn ground_state_energy(h: f64, quad: &QuadratureSpec) -> Result<Estimate> {
    let r = integrate_periodic(|k| [dispersion(h, k).epsilon], quad)?;
    Ok(Estimate {
        value: -r.values[0] / (8.0 * PI),
        error: r.error / (8.0 * PI),
    })
}

/// The two pieces of `e_0''`: `int 4 / epsilon` and `int (4h + 2 cos k)^2 / epsilon^3`.
pub fn gse_second_derivative_parts(h: f64, quad: &QuadratureSpec) -> Result<[f64; 2]> {
    let r = integrate_periodic(
        |k| {
            let e2 = epsilon_squared(h, k);
            let e = e2.sqrt();
            let d = 4.0 * h + 2.0 * k.cos();
            [4.0 / e, d * d / (e2 * e)]
        },
        quad,
    )?;
    Ok(r.values)
}

/// `e_0''(h) = -(1 / 8 pi) [int 4/epsilon - int (4h + 2 cos k)^2 / epsilon^3]`.
pub fn gse_second_derivative(h: f64, quad: &QuadratureSpec) -> Result<f64> {
    if ((h.abs() - 0.5).abs()) <= QUANTUM_CRITICAL_EXCLUSION {
        return Err(Error::NearQuantumCritical {
            h,
            radius: QUANTUM_CRITICAL_EXCLUSION,
        });
    }
    let [a, b] = gse_second_derivative_parts(h, quad)?;
    Ok(-(a - b) / (8.0 * PI))
}

/// Fit of `e_0''(1/2 + side d)` against `log d`; returns `(slope, intercept, rms)`.
pub fn gse_log_fit(distances: &[f64], side: f64, quad: &QuadratureSpec) -> Result<(f64, f64, f64)> {
    let x: Vec<f64> = distances.iter().map(|d| d.ln()).collect();
    let y = distances
        .iter()
        .map(|&d| gse_second_derivative(0.5 + side * d, quad))
        .collect::<Result<Vec<_>>>()?;
    Ok(linear_fit(&x, &y))
}

/// `-(1/4) sum sigma_i sigma_{i+1}` on the periodic chain.
fn zz_energy(l: usize, s: usize) -> f64 {
    let rot = ((s >> 1) | ((s & 1) << (l - 1))) ^ s;
    let unlike = rot.count_ones() as f64;
    -0.25 * (l as f64 - 2.0 * unlike)
}

fn rotate(l: usize, s: usize) -> usize {
    let mask = (1usize << l) - 1;
    ((s << 1) | (s >> (l - 1))) & mask
}

/// Dense Hamiltonian, for checks on short chains.
pub fn dense_hamiltonian(l: usize, h: f64) -> Result<DMatrix<f64>> {
    if !(2..=MAX_EXACT_DIAG_L).contains(&l) || l > 10 {
        return Err(Error::SizeExceeded {
            what: "dense chain length",
            size: l,
            bound: 10,
        });
    }
    let dim = 1usize << l;
    let mut m = DMatrix::zeros(dim, dim);
    for s in 0..dim {
        m[(s, s)] = zz_energy(l, s);
        for i in 0..l {
            m[(s ^ (1 << i), s)] += -0.5 * h;
        }
    }
    Ok(m)
}

/// Orbit data of a state under translations and the global spin flip.
struct Orbits {
    /// For each state, its representative and the group element `(a, b)` with `T^a F^b rep = s`.
    rep: Vec<(u32, u8, u8)>,
    /// Representatives with their stabilisers, listed as group elements.
    reps: Vec<(usize, Vec<(usize, usize)>)>,
}

fn orbits(l: usize) -> Orbits {
    let dim = 1usize << l;
    let mask = dim - 1;
    let mut rep = vec![(u32::MAX, 0u8, 0u8); dim];
    let mut reps = Vec::new();
    for r in 0..dim {
        if rep[r].0 != u32::MAX {
            continue;
        }
        let mut stab = Vec::new();
        for b in 0..2 {
            let mut s = if b == 1 { r ^ mask } else { r };
            for a in 0..l {
                if rep[s].0 == u32::MAX {
                    rep[s] = (r as u32, a as u8, b as u8);
                }
                if s == r {
                    stab.push((a, b));
                }
                s = rotate(l, s);
            }
        }
        reps.push((r, stab));
    }
    Orbits { rep, reps }
}

/// Eigenvalues of `H_L` in the sector with momentum `2 pi m / L` and flip parity `p`.
fn sector_eigenvalues(l: usize, h: f64, m: usize, parity: f64, orb: &Orbits) -> Vec<f64> {
    let omega = |a: usize| Complex64::from_polar(1.0, 2.0 * PI * (m * a) as f64 / l as f64);
    let chi = |a: usize, b: usize| omega(a) * if b == 1 { parity } else { 1.0 };
    let basis: Vec<(usize, usize)> = orb
        .reps
        .iter()
        .filter(|(_, stab)| {
            let s: Complex64 = stab.iter().map(|&(a, b)| chi(a, b)).sum();
            s.norm() > 1e-9
        })
        .map(|(r, stab)| (*r, stab.len()))
        .collect();
    let n = basis.len();
    if n == 0 {
        return Vec::new();
    }
    let mut index = std::collections::HashMap::with_capacity(n);
    for (i, &(r, _)) in basis.iter().enumerate() {
        index.insert(r, i);
    }
    let mut mat = DMatrix::<Complex64>::zeros(n, n);
    for (col, &(r, stab_r)) in basis.iter().enumerate() {
        mat[(col, col)] += zz_energy(l, r);
        for i in 0..l {
            let s = r ^ (1 << i);
            let (rp, a, b) = orb.rep[s];
            if let Some(&row) = index.get(&(rp as usize)) {
                let stab_rp = basis[row].1;
                let amp = chi(a as usize, b as usize) * ((stab_rp as f64) / (stab_r as f64)).sqrt();
                mat[(row, col)] += amp * (-0.5 * h);
            }
        }
    }
    mat.symmetric_eigenvalues().iter().copied().collect()
}

/// Full spectrum of `H_L` assembled from symmetry sectors, with multiplicities.
pub fn chain_spectrum(l: usize, h: f64) -> Result<Vec<(f64, usize)>> {
    if !(2..=MAX_EXACT_DIAG_L).contains(&l) {
        return Err(Error::SizeExceeded {
            what: "chain length",
            size: l,
            bound: MAX_EXACT_DIAG_L,
        });
    }
    let orb = orbits(l);
    let sectors: Vec<(usize, f64, usize)> = (0..=l / 2)
        .flat_map(|m| {
            // m and L - m have complex-conjugate blocks
            let w = if m == 0 || 2 * m == l { 1 } else { 2 };
            [(m, 1.0, w), (m, -1.0, w)]
        })
        .collect();
    let out = sectors
        .par_iter()
        .map(|&(m, p, w)| {
            sector_eigenvalues(l, h, m, p, &orb)
                .into_iter()
                .map(|e| (e, w))
                .collect::<Vec<_>>()
        })
        .flatten()
        .collect();
    Ok(out)
}

/// `-(1 / beta L) log Tr exp(-beta H_L)`.
pub fn exact_diag_free_energy(l: usize, p: &QuantumParams) -> Result<f64> {
    let spec = chain_spectrum(l, p.h)?;
    let terms: Vec<f64> = spec
        .iter()
        .map(|&(e, w)| -p.beta * e + (w as f64).ln())
        .collect();
    Ok(-log_sum_exp(&terms) / (p.beta * l as f64))
}

fn trotter_check(p: &QuantumParams, n: usize) -> Result<()> {
    if !(p.h > 0.0) {
        return Err(Error::Precondition(format!("Trotter route needs h > 0, got {}", p.h)));
    }
    if !(n as f64 > 0.5 * p.beta * p.h) {
        return Err(Error::Precondition(format!(
            "Trotter route needs n > beta h / 2, got n = {n}"
        )));
    }
    Ok(())
}

/// Classical couplings `(beta / 4n, -log(beta h / 2n) / 2, 0)` of the `n`-slice Trotter cylinder.
pub fn trotter_couplings(p: &QuantumParams, n: usize) -> Result<Couplings> {
    trotter_check(p, n)?;
    let nf = n as f64;
    Ok(Couplings::new(
        p.beta / (4.0 * nf),
        -0.5 * (p.beta * p.h / (2.0 * nf)).ln(),
        0.0,
    ))
}

/// `f_{inf,n} / beta` from the cylinder free energy with `M = n`.
pub fn trotter_free_energy(p: &QuantumParams, n: usize, quad: &QuadratureSpec) -> Result<Estimate> {
    let j = trotter_couplings(p, n)?;
    let nf = n as f64;
    let cyl = cylinder_free_energy(n, &j, quad)?;
    let shift = -0.5 * nf * (p.beta * p.h / (2.0 * nf)).ln();
    Ok(Estimate {
        value: (shift + nf * cyl.value) / p.beta,
        error: nf * cyl.error / p.beta,
    })
}

/// `f_{L,n} / beta` on a chain of `L` sites, through the column transfer matrix.
pub fn trotter_free_energy_finite(l: usize, p: &QuantumParams, n: usize) -> Result<f64> {
    let j = trotter_couplings(p, n)?;
    let nf = n as f64;
    let tm = TransferMatrix::new(n, &j)?;
    let shift = -0.5 * nf * (p.beta * p.h / (2.0 * nf)).ln();
    Ok((shift - tm.trace_power(l).ln() / l as f64) / p.beta)
}

/// `Tr [exp(-(beta/n) H_zz) prod_i (1 + (beta h / n) S^x_i)]^n` by propagating basis vectors.
pub fn lie_trotter_trace(l: usize, p: &QuantumParams, n: usize) -> Result<f64> {
    if !(2..=MAX_LIE_TROTTER_L).contains(&l) || n == 0 {
        return Err(Error::SizeExceeded {
            what: "Lie-Trotter chain length",
            size: l,
            bound: MAX_LIE_TROTTER_L,
        });
    }
    let dim = 1usize << l;
    let diag: Vec<f64> = (0..dim)
        .map(|s| (-(p.beta / n as f64) * zz_energy(l, s)).exp())
        .collect();
    let c = 0.5 * p.beta * p.h / n as f64;
    let step = |v: &mut Vec<f64>, tmp: &mut Vec<f64>| {
        for i in 0..l {
            let bit = 1 << i;
            for s in 0..dim {
                tmp[s] = v[s] + c * v[s ^ bit];
            }
            std::mem::swap(v, tmp);
        }
        for s in 0..dim {
            v[s] *= diag[s];
        }
    };
    let total: f64 = (0..dim)
        .into_par_iter()
        .map(|s0| {
            let mut v = vec![0.0; dim];
            let mut tmp = vec![0.0; dim];
            v[s0] = 1.0;
            for _ in 0..n {
                step(&mut v, &mut tmp);
            }
            v[s0]
        })
        .collect::<Vec<_>>()
        .iter()
        .sum();
    Ok(total)
}

/// `(lhs, rhs)` of `sum_{k in shifted grid} log(a - cos k) = -M log 2 + M log b + 2 log(1 + b^-M)`
/// with `b = a + sqrt(a^2 - 1)`.
pub fn sum_identity_check_a(m: usize, a: f64) -> Result<(f64, f64)> {
    if m < 2 || !(a > 1.0) {
        return Err(Error::Precondition(format!("need M >= 2 and a > 1, got M = {m}, a = {a}")));
    }
    let lhs: f64 = (0..m)
        .map(|i| {
            let k = (2 * i + 1) as f64 * PI / m as f64;
            // a - cos k = (a - 1) + 2 sin^2(k/2)
            ((a - 1.0) + 2.0 * (0.5 * k).sin().powi(2)).ln()
        })
        .sum();
    let b = a + ((a - 1.0) * (a + 1.0)).sqrt();
    let mf = m as f64;
    let rhs = -mf * LN_2 + mf * b.ln() + 2.0 * (-mf * b.ln()).exp().ln_1p();
    Ok((lhs, rhs))
}

/// The identity at `a = coth(2 J2)`, where `b = coth J2`.
pub fn sum_identity_check(m: usize, j2: f64) -> Result<(f64, f64)> {
    if !(j2 > 0.0) {
        return Err(Error::Precondition(format!("need J2 > 0, got {j2}")));
    }
    let (lhs, _) = sum_identity_check_a(m, 1.0 / (2.0 * j2).tanh())?;
    let mf = m as f64;
    let lb = -j2.tanh().ln();
    let rhs = -mf * LN_2 + mf * lb + 2.0 * (-mf * lb).exp().ln_1p();
    Ok((lhs, rhs))
}
