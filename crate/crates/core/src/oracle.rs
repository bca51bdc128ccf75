//! Ground-truth engines: brute-force spin sums, even-subgraph signed sums,
//! and the column transfer matrix.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{Couplings, TorusSpec};
use crate::numerics::NeumaierSum;
use crate::projection::{cycle_basis, handle_kind, FaithfulProjection, HandleKind, ProjectionVariant};

pub const MAX_BRUTE_FORCE_SITES: usize = 24;
pub const MAX_CYCLE_DIMENSION: usize = 25;
pub const MAX_TRANSFER_M: usize = 14;
/// Largest `M` for which the dense `2^M x 2^M` matrix is materialised.
pub const MAX_DENSE_TRANSFER_M: usize = 10;

fn require_oracle_spec(spec: &TorusSpec) -> Result<()> {
    if spec.l() < 3 || spec.m() < 3 {
        return Err(Error::TorusTooSmall {
            l: spec.l(),
            m: spec.m(),
            min: 3,
        });
    }
    Ok(())
}

/// Histogram of configurations by the number of unsatisfied bonds per class.
#[derive(Debug, Clone, PartialEq)]
pub struct DisagreementCensus {
    bonds_per_class: usize,
    /// `(d1, d2, d3) -> number of spin configurations`
    pub counts: BTreeMap<(u16, u16, u16), u64>,
}

impl DisagreementCensus {
    pub fn partition_function(&self, j: &Couplings) -> f64 {
        let n = self.bonds_per_class as f64;
        let mut s = NeumaierSum::new();
        for (&(d1, d2, d3), &c) in &self.counts {
            let e = j.j1 * (n - 2.0 * d1 as f64) + j.j2 * (n - 2.0 * d2 as f64) + j.j3 * (n - 2.0 * d3 as f64);
            s.add(c as f64 * e.exp());
        }
        s.value()
    }
}

/// Enumerates all `2^{LM}` spin configurations once.
pub fn disagreement_census(spec: &TorusSpec) -> Result<DisagreementCensus> {
    require_oracle_spec(spec)?;
    let n = spec.sites();
    if n > MAX_BRUTE_FORCE_SITES {
        return Err(Error::SizeExceeded {
            what: "brute-force spin enumeration",
            size: n,
            bound: MAX_BRUTE_FORCE_SITES,
        });
    }
    let (l, m) = (spec.l(), spec.m());
    let full: u64 = (1u64 << n) - 1;
    let last_col = (0..m).fold(0u64, |acc, y| acc | 1 << (l - 1 + l * y));
    // neighbour bit (x, y) <- spin at (x + 1, y)
    let east = move |c: u64| ((c >> 1) & !last_col | (c << (l - 1)) & last_col) & full;
    // neighbour bit (x, y) <- spin at (x, y + 1)
    let north = move |c: u64| ((c >> l) | (c << (l * (m - 1)))) & full;
    let side = n + 1;
    // global spin flip leaves every count unchanged: fix the top bit to 0
    let half = 1u64 << (n - 1);
    let chunk = 1u64 << 14.min(n - 1);
    let hist = (0..half.div_ceil(chunk))
        .into_par_iter()
        .fold(
            || vec![0u64; side * side * side],
            |mut h, c| {
                for conf in c * chunk..((c + 1) * chunk).min(half) {
                    let e = east(conf);
                    let d1 = (conf ^ e).count_ones() as usize;
                    let d2 = (conf ^ north(conf)).count_ones() as usize;
                    let d3 = (conf ^ north(e)).count_ones() as usize;
                    h[(d1 * side + d2) * side + d3] += 2;
                }
                h
            },
        )
        .reduce(
            || vec![0u64; side * side * side],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    let mut counts = BTreeMap::new();
    for (i, &c) in hist.iter().enumerate() {
        if c > 0 {
            let d3 = i % side;
            let d2 = (i / side) % side;
            let d1 = i / (side * side);
            counts.insert((d1 as u16, d2 as u16, d3 as u16), c);
        }
    }
    Ok(DisagreementCensus {
        bonds_per_class: n,
        counts,
    })
}

/// `Z = sum_sigma exp(sum_edges J_e sigma sigma')` by exhaustive enumeration.
pub fn brute_force_z(spec: &TorusSpec, j: &Couplings) -> Result<f64> {
    Ok(disagreement_census(spec)?.partition_function(j))
}

/// Key of the even-subgraph histogram: edge counts per class, crossing
/// parities in both projections, and the parity of `n_h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EvenKey {
    pub n: [u8; 3],
    pub odd1: bool,
    pub odd2: bool,
    pub odd_h: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvenSubgraphCensus {
    pub spec: TorusSpec,
    pub counts: BTreeMap<EvenKey, u64>,
    pub total: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvenSubgraphSums {
    pub ztilde: f64,
    pub signed1: f64,
    pub signed2: f64,
    pub odd_h: f64,
}

impl EvenSubgraphCensus {
    /// Exact evaluation of the four sums at the given couplings.
    ///
    /// The census has integer counts and `tanh J` is a dyadic rational, so
    /// each sum is computed exactly in big-integer arithmetic and rounded
    /// once. Frustrated couplings cancel by many orders of magnitude, which
    /// floating-point accumulation cannot resolve.
    pub fn sums(&self, j: &Couplings) -> EvenSubgraphSums {
        let t = j.tanh().map(Dyadic::from_f64);
        let max_n = self.spec.sites();
        let powers: Vec<Vec<Dyadic>> = t.iter().map(|d| d.powers(max_n)).collect();
        let terms: Vec<(Dyadic, &EvenKey)> = self
            .counts
            .iter()
            .map(|(k, &c)| {
                let mut d = Dyadic::from_int(c);
                for i in 0..3 {
                    d = d.mul(&powers[i][k.n[i] as usize]);
                }
                (d, k)
            })
            .collect();
        let exp_min = terms.iter().map(|(d, _)| d.exp).min().unwrap_or(0);
        let mut acc = [BigInt::zero(), BigInt::zero(), BigInt::zero(), BigInt::zero()];
        for (d, k) in &terms {
            let v = &d.mant << (d.exp - exp_min) as usize;
            acc[0] += &v;
            acc[1] += if k.odd1 { -&v } else { v.clone() };
            acc[2] += if k.odd2 { -&v } else { v.clone() };
            if k.odd_h {
                acc[3] += &v;
            }
        }
        let f = |x: &BigInt| Dyadic { mant: x.clone(), exp: exp_min }.to_f64();
        EvenSubgraphSums {
            ztilde: f(&acc[0]),
            signed1: f(&acc[1]),
            signed2: f(&acc[2]),
            odd_h: f(&acc[3]),
        }
    }
}

/// `mant * 2^exp`, exact.
#[derive(Debug, Clone)]
struct Dyadic {
    mant: BigInt,
    exp: i64,
}

impl Dyadic {
    fn from_int(c: u64) -> Self {
        Self {
            mant: BigInt::from(c),
            exp: 0,
        }
    }

    fn from_f64(x: f64) -> Self {
        assert!(x.is_finite());
        if x == 0.0 {
            return Self {
                mant: BigInt::zero(),
                exp: 0,
            };
        }
        let bits = x.to_bits();
        let raw_exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (m, e) = if raw_exp == 0 {
            (frac, -1074)
        } else {
            (frac | 1 << 52, raw_exp - 1075)
        };
        let mant = BigInt::from(m);
        Self {
            mant: if x < 0.0 { -mant } else { mant },
            exp: e,
        }
    }

    fn mul(&self, o: &Self) -> Self {
        Self {
            mant: &self.mant * &o.mant,
            exp: self.exp + o.exp,
        }
    }

    fn powers(&self, n: usize) -> Vec<Self> {
        let mut out = vec![Self::from_int(1)];
        for i in 1..=n {
            out.push(out[i - 1].mul(self));
        }
        out
    }

    fn to_f64(&self) -> f64 {
        let bits = self.mant.bits() as i64;
        let shift = (bits - 64).max(0);
        let top = (&self.mant >> shift as usize).to_f64().unwrap_or(0.0);
        ldexp(top, self.exp + shift)
    }
}

fn ldexp(mut x: f64, mut e: i64) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
    }
    x * 2f64.powi(e as i32)
}

/// Enumerates every even subgraph through the cycle space, in Gray-code order.
pub fn even_subgraph_census(spec: &TorusSpec) -> Result<EvenSubgraphCensus> {
    require_oracle_spec(spec)?;
    let dim = 2 * spec.sites() + 1;
    if dim > MAX_CYCLE_DIMENSION {
        return Err(Error::SizeExceeded {
            what: "cycle-space dimension",
            size: dim,
            bound: MAX_CYCLE_DIMENSION,
        });
    }
    let basis = cycle_basis(spec)?;
    let p1 = FaithfulProjection::new(*spec, ProjectionVariant::G1);
    let p2 = FaithfulProjection::new(*spec, ProjectionVariant::G2);
    let (m1, m2) = (p1.crossing_masks().unwrap(), p2.crossing_masks().unwrap());
    let mut class_mask = [0u64; 3];
    let mut h_mask = 0u64;
    for i in 0..spec.undirected_edge_count() {
        let u = spec.undirected_from_index(i);
        class_mask[u.class as usize] |= 1 << i;
        if matches!(handle_kind(spec, u), Some(HandleKind::Horizontal | HandleKind::Corner)) {
            h_mask |= 1 << i;
        }
    }
    let total = 1u64 << dim;
    let chunk_bits = dim.min(12);
    let chunk = 1u64 << chunk_bits;
    let merged = (0..total / chunk)
        .into_par_iter()
        .fold(BTreeMap::<EvenKey, u64>::new, |mut acc, c| {
            let start = c * chunk;
            let gray0 = start ^ (start >> 1);
            let mut g = (0..dim).filter(|b| gray0 >> b & 1 == 1).fold(0u64, |g, b| g ^ basis[b]);
            for idx in start..start + chunk {
                if idx != start {
                    g ^= basis[idx.trailing_zeros() as usize];
                }
                let key = EvenKey {
                    n: [
                        (g & class_mask[0]).count_ones() as u8,
                        (g & class_mask[1]).count_ones() as u8,
                        (g & class_mask[2]).count_ones() as u8,
                    ],
                    odd1: m1.count(g) % 2 == 1,
                    odd2: m2.count(g) % 2 == 1,
                    odd_h: (g & h_mask).count_ones() % 2 == 1,
                };
                *acc.entry(key).or_insert(0) += 1;
            }
            acc
        })
        .reduce(BTreeMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            a
        });
    Ok(EvenSubgraphCensus {
        spec: *spec,
        counts: merged,
        total,
    })
}

/// Signed even-subgraph sums for one coupling triple.
pub fn even_subgraph_sums(spec: &TorusSpec, j: &Couplings) -> Result<EvenSubgraphSums> {
    Ok(even_subgraph_census(spec)?.sums(j))
}

/// `Z = 2^{LM} prod_e cosh J_e * Ztilde`.
pub fn high_temperature_z(spec: &TorusSpec, j: &Couplings, ztilde: f64) -> f64 {
    let n = spec.sites() as f64;
    let c: f64 = j.as_array().iter().map(|x| x.cosh().ln()).sum();
    (n * (std::f64::consts::LN_2 + c)).exp() * ztilde
}

/// Partition function of a periodic 1D ring of `m` spins.
pub fn ring_partition_function(m: usize, j: f64) -> f64 {
    (2.0 * j.cosh()).powi(m as i32) + (2.0 * j.sinh()).powi(m as i32)
}

/// Column-to-column transfer matrix of the cylinder with `M` rows.
///
/// Column configurations are bit patterns, bit `i` set meaning spin `+1` in row `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferMatrix {
    m: usize,
    j: Couplings,
    data: Vec<f64>,
}

fn spin(bits: usize, i: usize) -> f64 {
    if bits >> i & 1 == 1 {
        1.0
    } else {
        -1.0
    }
}

fn check_transfer_m(m: usize, bound: usize) -> Result<()> {
    if m < 2 {
        return Err(Error::Precondition(format!("transfer matrix needs M >= 2, got {m}")));
    }
    if m > bound {
        return Err(Error::SizeExceeded {
            what: "transfer matrix height",
            size: m,
            bound,
        });
    }
    Ok(())
}

impl TransferMatrix {
    pub fn new(m: usize, j: &Couplings) -> Result<Self> {
        check_transfer_m(m, MAX_DENSE_TRANSFER_M)?;
        let dim = 1usize << m;
        let mut data = vec![0.0; dim * dim];
        for a in 0..dim {
            for b in 0..dim {
                data[a * dim + b] = Self::entry_formula(m, j, a, b);
            }
        }
        Ok(Self { m, j: *j, data })
    }

    pub fn entry_formula(m: usize, j: &Couplings, a: usize, b: usize) -> f64 {
        let mut e = 0.0;
        for i in 0..m {
            let ip = (i + 1) % m;
            e += j.j1 * spin(a, i) * spin(b, i) + j.j2 * spin(a, i) * spin(a, ip) + j.j3 * spin(a, i) * spin(b, ip);
        }
        e.exp()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn couplings(&self) -> Couplings {
        self.j
    }

    pub fn dim(&self) -> usize {
        1 << self.m
    }

    pub fn entry(&self, a: usize, b: usize) -> f64 {
        self.data[a * self.dim() + b]
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        let d = self.dim();
        self.data.chunks(d).map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    /// `Tr T^L`, the partition function of the `L x M` torus.
    pub fn trace_power(&self, l: usize) -> f64 {
        let d = self.dim();
        let mut acc: Option<Vec<f64>> = None;
        let mut base = self.data.clone();
        let mut k = l;
        while k > 0 {
            if k & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => dense_mul(&a, &base, d),
                });
            }
            k >>= 1;
            if k > 0 {
                base = dense_mul(&base, &base, d);
            }
        }
        let a = acc.unwrap_or_else(|| identity(d));
        (0..d).map(|i| a[i * d + i]).sum()
    }

    /// Moduli of all eigenvalues, in decreasing order, from a dense Schur solve.
    pub fn spectrum_moduli(&self) -> Vec<f64> {
        let d = self.dim();
        let mat = nalgebra::DMatrix::from_row_slice(d, d, &self.data);
        let mut v: Vec<f64> = mat.complex_eigenvalues().iter().map(|z| z.norm()).collect();
        v.sort_by(|a, b| b.partial_cmp(a).unwrap());
        v
    }
}

fn identity(d: usize) -> Vec<f64> {
    let mut a = vec![0.0; d * d];
    for i in 0..d {
        a[i * d + i] = 1.0;
    }
    a
}

fn dense_mul(a: &[f64], b: &[f64], d: usize) -> Vec<f64> {
    let mut out = vec![0.0; d * d];
    out.par_chunks_mut(d).enumerate().for_each(|(i, row)| {
        for k in 0..d {
            let x = a[i * d + k];
            for (r, y) in row.iter_mut().zip(&b[k * d..(k + 1) * d]) {
                *r += x * y;
            }
        }
    });
    out
}

/// Matrix-free `T v`, eliminating one row of the primed column at a time.
///
/// Costs `O(M 2^M)` instead of `O(4^M)`.
pub fn transfer_matvec(m: usize, j: &Couplings, v: &[f64]) -> Vec<f64> {
    let dim = 1usize << m;
    assert_eq!(v.len(), dim);
    // w[b][x]: b is the assumed value of eta_{M-1}, x mixes eta (bits < i) and eta' (bits >= i)
    let mut w = [v.to_vec(), v.to_vec()];
    let pair = |s: f64, field: f64| (s * field).exp();
    for i in 0..m {
        let bit = 1usize << i;
        for (b, wb) in w.iter_mut().enumerate() {
            let mut next = vec![0.0; dim];
            for x in 0..dim {
                if x & bit != 0 {
                    continue;
                }
                let prev = if i == 0 {
                    if b == 1 {
                        1.0
                    } else {
                        -1.0
                    }
                } else {
                    spin(x, i - 1)
                };
                let (lo, hi) = (wb[x], wb[x | bit]);
                for e in [0usize, 1] {
                    let s = if e == 1 { 1.0 } else { -1.0 };
                    let field = j.j1 * s + j.j3 * prev;
                    next[x | (e * bit)] = pair(-1.0, field) * lo + pair(1.0, field) * hi;
                }
            }
            *wb = next;
        }
    }
    (0..dim)
        .map(|eta| {
            let mut e = 0.0;
            for i in 0..m {
                e += j.j2 * spin(eta, i) * spin(eta, (i + 1) % m);
            }
            e.exp() * w[eta >> (m - 1) & 1][eta]
        })
        .collect()
}

/// Collatz-Wielandt bracket `[min (Tv)_i / v_i, max (Tv)_i / v_i]` for positive `v`.
fn collatz_wielandt(v: &[f64], tv: &[f64]) -> (f64, f64) {
    v.iter().zip(tv).fold((f64::INFINITY, 0.0f64), |(lo, hi), (a, b)| {
        let r = b / a;
        (lo.min(r), hi.max(r))
    })
}

fn normalize(v: &mut [f64]) {
    let s: f64 = v.iter().sum();
    for x in v.iter_mut() {
        *x /= s;
    }
}

const POWER_TOL: f64 = 1e-13;
/// Rounding can pin the bracket slightly above `POWER_TOL` when the Perron
/// vector spans many orders of magnitude; a bracket this tight that has
/// stopped shrinking is accepted.
const POWER_FLOOR_TOL: f64 = 1e-11;

#[derive(Default)]
struct Bracket {
    best: Option<(f64, f64)>,
    stalls: usize,
}

impl Bracket {
    fn update(&mut self, (lo, hi): (f64, f64)) -> Option<f64> {
        let w = (hi - lo) / lo;
        if w <= POWER_TOL {
            return Some(0.5 * (lo + hi));
        }
        match self.best {
            Some((blo, bhi)) if (bhi - blo) / blo <= w => self.stalls += 1,
            _ => {
                self.best = Some((lo, hi));
                self.stalls = 0;
            }
        }
        let (blo, bhi) = self.best?;
        (self.stalls >= 3 && (bhi - blo) / blo <= POWER_FLOOR_TOL).then(|| 0.5 * (blo + bhi))
    }
}

/// Largest eigenvalue of the transfer matrix, in log form.
///
/// Power iteration from the all-ones vector. The stopping test uses the
/// Collatz-Wielandt bracket, which encloses the Perron root for every
/// positive iterate. Up to `M = 8` the dense matrix is repeatedly squared to
/// accelerate convergence; above that the matrix-free product is used.
pub fn log_lambda_max(m: usize, j: &Couplings) -> Result<f64> {
    check_transfer_m(m, MAX_TRANSFER_M)?;
    let dim = 1usize << m;
    let mut v = vec![1.0 / dim as f64; dim];
    if m <= 8 {
        let t = TransferMatrix::new(m, j)?;
        let scale = t.data.iter().copied().fold(0.0, f64::max);
        let mut p: Vec<f64> = t.data.iter().map(|x| x / scale).collect();
        let mut best = Bracket::default();
        for _ in 0..60 {
            let tv = t.matvec(&v);
            if let Some(x) = best.update(collatz_wielandt(&v, &tv)) {
                return Ok(x.ln());
            }
            v = dense_apply(&p, &v, dim);
            normalize(&mut v);
            p = dense_mul(&p, &p, dim);
            let s = p.iter().copied().fold(0.0, f64::max);
            p.iter_mut().for_each(|x| *x /= s);
        }
        return Err(Error::PowerIterationStalled { iterations: 60 });
    }
    const CAP: usize = 200_000;
    let mut best = Bracket::default();
    for _ in 0..CAP {
        let mut tv = transfer_matvec(m, j, &v);
        if let Some(x) = best.update(collatz_wielandt(&v, &tv)) {
            return Ok(x.ln());
        }
        normalize(&mut tv);
        v = tv;
    }
    Err(Error::PowerIterationStalled { iterations: CAP })
}

fn dense_apply(p: &[f64], v: &[f64], d: usize) -> Vec<f64> {
    p.chunks(d).map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

/// `-(1/M) log lambda_max(T)`, the exact free energy of the infinite cylinder.
pub fn cylinder_free_energy_tm(m: usize, j: &Couplings) -> Result<f64> {
    Ok(-log_lambda_max(m, j)? / m as f64)
}
