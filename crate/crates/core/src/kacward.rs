//! Kac-Ward matrices on the torus, their determinants, and the Fourier
//! product formula.
//!
//! `det(1 - K W)` is the square of a signed even-subgraph sum. The sign of
//! that sum is not fixed: it is negative for a sizeable share of
//! frustrated couplings. [`kacward_partition_pair`] therefore takes the
//! square root on the branch that is polynomial in `tanh J`. Momenta with
//! `k = -k` contribute a factor `F(k) = P(k)^2`, where `P` is an explicit
//! polynomial, and all other momenta come in pairs with equal factors.
//! The root is the product of one factor per pair times `P` at each
//! self-paired momentum.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{turning_angle, Couplings, Direction, TorusSpec};
use crate::linalg::{det_one_minus, CMatrix, Determinant};
use crate::numerics::NeumaierSum;
use crate::projection::{FaithfulProjection, ProjectionVariant};

/// Point of the Brillouin zone; `k3 = k1 + k2` is derived.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentumPoint {
    k1: f64,
    k2: f64,
}

fn wrap(k: f64) -> f64 {
    let r = (k + PI).rem_euclid(2.0 * PI) - PI;
    if r <= -PI {
        r + 2.0 * PI
    } else {
        r
    }
}

impl MomentumPoint {
    /// Wraps both components into `(-pi, pi]`.
    pub fn new(k1: f64, k2: f64) -> Self {
        Self {
            k1: wrap(k1),
            k2: wrap(k2),
        }
    }

    pub fn origin() -> Self {
        Self { k1: 0.0, k2: 0.0 }
    }

    pub fn k1(&self) -> f64 {
        self.k1
    }

    pub fn k2(&self) -> f64 {
        self.k2
    }

    pub fn k3(&self) -> f64 {
        self.k1 + self.k2
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.k1, self.k2, self.k3()]
    }
}

fn phase16(n: i32) -> Complex64 {
    Complex64::from_polar(1.0, n as f64 * PI / 16.0)
}

fn assemble(spec: &TorusSpec, projection: Option<&FaithfulProjection>) -> CMatrix {
    let mut k = CMatrix::zeros(spec.directed_edge_count());
    for e in spec.directed_edges() {
        let row = spec.flatten(e);
        let extra = projection.map_or(0, |p| p.integrated_angle(e).0);
        let end = spec.endpoint(e);
        for d in Direction::ALL {
            if d == e.dir.reverse() {
                continue;
            }
            let turn = turning_angle(e.dir, d).expect("non-backtracking pair");
            let col = spec.flatten(crate::lattice::DirectedEdge::new(end, d));
            k[(row, col)] = phase16(turn.0 + extra);
        }
    }
    k
}

/// `K^(v)`: half-angle phases including the handle turning of `variant`.
pub fn assemble_k(spec: &TorusSpec, variant: ProjectionVariant) -> CMatrix {
    assemble(spec, Some(&FaithfulProjection::new(*spec, variant)))
}

/// `K~`: the translation-invariant matrix without handle turning.
pub fn assemble_k_tilde(spec: &TorusSpec) -> CMatrix {
    assemble(spec, None)
}

/// Diagonal of `W`: `tanh J_e`.
pub fn assemble_w(spec: &TorusSpec, j: &Couplings) -> Vec<f64> {
    spec.directed_edges().map(|e| crate::lattice::coupling_of(e, j).tanh()).collect()
}

/// Direction-dependent phase of `W~^(v)`.
pub fn w_tilde_phase(spec: &TorusSpec, variant: ProjectionVariant, d: Direction) -> Complex64 {
    let (l, m) = (spec.l() as f64, spec.m() as f64);
    let (a1, a2) = match variant {
        ProjectionVariant::G1 => (PI / l, PI / m),
        ProjectionVariant::G2 => (0.0, PI / m),
    };
    let (dx, dy) = d.delta();
    Complex64::from_polar(1.0, dx as f64 * a1 + dy as f64 * a2)
}

/// Diagonal of `W~^(v)`.
pub fn assemble_w_tilde(spec: &TorusSpec, j: &Couplings, variant: ProjectionVariant) -> Vec<Complex64> {
    spec.directed_edges()
        .map(|e| w_tilde_phase(spec, variant, e.dir) * crate::lattice::coupling_of(e, j).tanh())
        .collect()
}

/// `K^(v) W`.
pub fn kac_ward_product(spec: &TorusSpec, j: &Couplings, variant: ProjectionVariant) -> CMatrix {
    let w: Vec<Complex64> = assemble_w(spec, j).into_iter().map(|x| Complex64::new(x, 0.0)).collect();
    assemble_k(spec, variant).scale_columns(&w)
}

/// `K~ W~^(v)`.
pub fn kac_ward_tilde_product(spec: &TorusSpec, j: &Couplings, variant: ProjectionVariant) -> CMatrix {
    assemble_k_tilde(spec).scale_columns(&assemble_w_tilde(spec, j, variant))
}

/// Closed form of the 6x6 Fourier block determinant.
pub fn fourier_block_det(k: &MomentumPoint, j: &Couplings) -> f64 {
    let t = j.tanh();
    let kk = k.as_array();
    let prod_sq: f64 = t.iter().map(|x| 1.0 + x * x).product();
    let mut s = prod_sq + 8.0 * t[0] * t[1] * t[2];
    for i in 0..3 {
        let (a, b) = (t[(i + 1) % 3], t[(i + 2) % 3]);
        s -= 2.0 * t[i] * (1.0 - a * a) * (1.0 - b * b) * kk[i].cos();
    }
    s
}

/// `1 - W^(k) K^(0)` with `W^(k) = diag(tanh J_a e^{i k.delta_a})`.
pub fn fourier_block_matrix(k: &MomentumPoint, j: &Couplings) -> CMatrix {
    let t = j.tanh();
    CMatrix::from_fn(6, |a, b| {
        let (da, db) = (Direction::ALL[a], Direction::ALL[b]);
        let khat = if db == da.reverse() {
            Complex64::new(0.0, 0.0)
        } else {
            phase16(turning_angle(da, db).unwrap().0)
        };
        let (dx, dy) = da.delta();
        let w = Complex64::from_polar(t[da.class() as usize], dx as f64 * k.k1() + dy as f64 * k.k2());
        let id = if a == b { 1.0 } else { 0.0 };
        id - w * khat
    })
}

/// Direct LU evaluation of the Fourier block determinant.
pub fn fourier_block_det_direct(k: &MomentumPoint, j: &Couplings) -> Complex64 {
    crate::linalg::determinant(fourier_block_matrix(k, j)).value()
}

/// Grid `(2 pi / n) Z_n`, shifted by `pi / n` when `shifted`, as integer
/// numerators of `pi / n`: `k = numerator * pi / n`.
fn grid_numerators(n: usize, shifted: bool) -> impl Iterator<Item = i64> {
    (0..n as i64).map(move |j| 2 * j + i64::from(shifted))
}

/// Momentum grid of a variant: G1 uses shifted `k1`, G2 unshifted; `k2` always shifted.
pub fn momentum_grid(spec: &TorusSpec, variant: ProjectionVariant) -> Vec<MomentumPoint> {
    let shift1 = variant == ProjectionVariant::G1;
    let (l, m) = (spec.l(), spec.m());
    let mut out = Vec::with_capacity(l * m);
    for a in grid_numerators(l, shift1) {
        for b in grid_numerators(m, true) {
            out.push(MomentumPoint::new(a as f64 * PI / l as f64, b as f64 * PI / m as f64));
        }
    }
    out
}

/// Self-paired momenta (`k = -k` modulo `2 pi`) of a variant's grid.
pub fn self_paired_momenta(spec: &TorusSpec, variant: ProjectionVariant) -> Vec<MomentumPoint> {
    let shift1 = variant == ProjectionVariant::G1;
    let fixed = |n: usize, shifted: bool| -> Vec<f64> {
        grid_numerators(n, shifted)
            .filter(|&num| num == 0 || num == n as i64)
            .map(|num| num as f64 * PI / n as f64)
            .collect()
    };
    let mut out = Vec::new();
    for a in fixed(spec.l(), shift1) {
        for b in fixed(spec.m(), true) {
            out.push(MomentumPoint::new(a, b));
        }
    }
    out
}

/// `log prod_k F(k)` over the variant's grid, equal to `log det(1 - K~ W~^(v))`.
pub fn product_formula_det(spec: &TorusSpec, j: &Couplings, variant: ProjectionVariant) -> Result<f64> {
    let mut s = NeumaierSum::new();
    for k in momentum_grid(spec, variant) {
        let f = fourier_block_det(&k, j);
        if f < -1e-12 {
            return Err(Error::NegativeFactor { value: f });
        }
        s.add(f.max(0.0).ln());
    }
    Ok(s.value())
}

/// `P(eps1, eps2) = a(eps1 t1, eps2 t2, eps1 eps2 t3)` with
/// `a(x, y, z) = 1 + xyz - x - y - z - xy - yz - zx`.
///
/// At the momentum `(k1, k2)` with `cos k1 = eps1`, `cos k2 = eps2`, the
/// Fourier block determinant equals `P^2`.
pub fn corner_polynomial(j: &Couplings, k: &MomentumPoint) -> f64 {
    let t = j.tanh();
    let e1 = k.k1().cos().round();
    let e2 = k.k2().cos().round();
    let (x, y, z) = (e1 * t[0], e2 * t[1], e1 * e2 * t[2]);
    1.0 + x * y * z - x - y - z - x * y - y * z - z * x
}

/// Sign of the polynomial branch of `sqrt det(1 - K^(v) W)`.
pub fn root_sign(spec: &TorusSpec, j: &Couplings, variant: ProjectionVariant) -> f64 {
    self_paired_momenta(spec, variant)
        .iter()
        .map(|k| if corner_polynomial(j, k) < 0.0 { -1.0 } else { 1.0 })
        .product()
}

/// Hadamard bound on `|det(1 - A)|`, used to scale tolerances.
pub fn hadamard_scale(a: &CMatrix) -> f64 {
    let mut log = 0.0;
    for i in 0..a.dim() {
        let row = a.row(i);
        let norm2: f64 = row
            .iter()
            .enumerate()
            .map(|(c, z)| {
                let v = if c == i { Complex64::new(1.0, 0.0) - z } else { -z };
                v.norm_sqr()
            })
            .sum();
        log += 0.5 * norm2.ln();
    }
    log.exp()
}

/// Tolerance, relative to the Hadamard scale, for realness and sign checks.
pub const DET_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionPair {
    /// Signed square roots of `det(1 - K^(i) W)`, `i = 1, 2`.
    pub sqrt1: f64,
    pub sqrt2: f64,
    pub det1: Determinant,
    pub det2: Determinant,
    pub sign1: f64,
    pub sign2: f64,
}

fn signed_root(spec: &TorusSpec, j: &Couplings, variant: ProjectionVariant) -> Result<(f64, Determinant, f64)> {
    let a = kac_ward_product(spec, j, variant);
    let scale = hadamard_scale(&a);
    let det = det_one_minus(&a);
    let v = det.value();
    if v.im.abs() > DET_TOL * scale || v.re < -DET_TOL * scale {
        return Err(Error::NegativeFactor { value: v.re });
    }
    let sign = root_sign(spec, j, variant);
    Ok((sign * v.re.max(0.0).sqrt(), det, sign))
}

/// Both signed square roots `sqrt det(1 - K^(i) W)`.
pub fn kacward_partition_pair(spec: &TorusSpec, j: &Couplings) -> Result<PartitionPair> {
    if spec.l() < 3 || spec.m() < 3 {
        return Err(Error::TorusTooSmall {
            l: spec.l(),
            m: spec.m(),
            min: 3,
        });
    }
    let (sqrt1, det1, sign1) = signed_root(spec, j, ProjectionVariant::G1)?;
    let (sqrt2, det2, sign2) = signed_root(spec, j, ProjectionVariant::G2)?;
    Ok(PartitionPair {
        sqrt1,
        sqrt2,
        det1,
        det2,
        sign1,
        sign2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{DirectedEdge, Site};

    fn spec33() -> TorusSpec {
        TorusSpec::new(3, 3).unwrap()
    }

    #[test]
    fn rows_have_five_unimodular_entries() {
        let spec = spec33();
        for v in ProjectionVariant::BOTH {
            let k = assemble_k(&spec, v);
            for r in 0..k.dim() {
                let nz: Vec<_> = k.row(r).iter().filter(|z| z.norm() > 0.0).collect();
                assert_eq!(nz.len(), 5);
                assert!(nz.iter().all(|z| (z.norm() - 1.0).abs() < 1e-15));
            }
        }
    }

    #[test]
    fn nonzero_only_on_consecutive_pairs() {
        let spec = TorusSpec::new(2, 3).unwrap();
        let k = assemble_k(&spec, ProjectionVariant::G1);
        for e in spec.directed_edges() {
            for f in spec.directed_edges() {
                let nz = k[(spec.flatten(e), spec.flatten(f))].norm() > 0.0;
                assert_eq!(nz, crate::lattice::is_consecutive(&spec, e, f));
            }
        }
    }

    #[test]
    fn straight_and_wrap_entries() {
        let spec = spec33();
        let k = assemble_k(&spec, ProjectionVariant::G1);
        let at = |e: DirectedEdge, f: DirectedEdge| k[(spec.flatten(e), spec.flatten(f))];
        let e = DirectedEdge::new(Site::one_based(1, 1), Direction::E);
        let f = DirectedEdge::new(Site::one_based(2, 1), Direction::N);
        assert!((at(e, f) - Complex64::from_polar(1.0, PI / 4.0)).norm() < 1e-15);
        let w = DirectedEdge::new(Site::one_based(3, 1), Direction::E);
        let g = DirectedEdge::new(Site::one_based(1, 1), Direction::N);
        assert!((at(w, g) + Complex64::from_polar(1.0, PI / 4.0)).norm() < 1e-15);
    }

    #[test]
    fn w_examples() {
        let spec = spec33();
        assert!(assemble_w(&spec, &Couplings::zero()).iter().all(|&x| x == 0.0));
        let j = Couplings::new(0.3, -0.8, 1.1);
        let w = assemble_w(&spec, &j);
        for v in ProjectionVariant::BOTH {
            let wt = assemble_w_tilde(&spec, &j, v);
            assert!(w.iter().zip(&wt).all(|(a, b)| (a.abs() - b.norm()).abs() < 1e-15));
        }
        let wt2 = assemble_w_tilde(&spec, &j, ProjectionVariant::G2);
        for e in spec.directed_edges() {
            if matches!(e.dir, Direction::E | Direction::W) {
                assert_eq!(wt2[spec.flatten(e)], Complex64::new(0.3f64.tanh(), 0.0));
            }
        }
    }

    #[test]
    fn khat_table_matches_printed_phases() {
        // row E of K^(0): 1, 0, e^{i pi/4}, e^{-i pi/4}, e^{i pi/8}, e^{-3i pi/8}
        let expect = [0, 0, 4, -4, 2, -6];
        for (b, &n) in expect.iter().enumerate() {
            let db = Direction::ALL[b];
            if db == Direction::W {
                continue;
            }
            assert_eq!(turning_angle(Direction::E, db).unwrap().0, n);
        }
        // row SW: e^{3i pi/8}, e^{-i pi/8}, e^{-3i pi/8}, e^{i pi/8}, 0, 1
        let expect = [6, -2, -6, 2, 0, 0];
        for (b, &n) in expect.iter().enumerate() {
            let db = Direction::ALL[b];
            if db == Direction::NE {
                continue;
            }
            assert_eq!(turning_angle(Direction::SW, db).unwrap().0, n);
        }
    }

    #[test]
    fn fourier_block_closed_form_equals_direct() {
        let j = Couplings::new(1.0, 1.0, 1.0);
        let k = MomentumPoint::origin();
        let t: f64 = 1f64.tanh();
        let expect = (1.0 + t * t).powi(3) + 8.0 * t.powi(3) - 6.0 * t * (1.0 - t * t).powi(2);
        assert!((fourier_block_det(&k, &j) - expect).abs() < 1e-14);
        for (j, k) in [
            (Couplings::new(0.3, -0.7, 1.2), MomentumPoint::new(0.4, -2.2)),
            (Couplings::new(-1.4, 0.2, -0.5), MomentumPoint::new(3.0, 1.1)),
            (Couplings::new(1.0, 1.0, 1.0), MomentumPoint::new(0.0, 0.0)),
        ] {
            let d = fourier_block_det_direct(&k, &j);
            assert!((d.re - fourier_block_det(&k, &j)).abs() < 1e-12);
            assert!(d.im.abs() < 1e-12);
        }
        assert_eq!(fourier_block_det(&MomentumPoint::new(0.7, 0.1), &Couplings::zero()), 1.0);
    }

    #[test]
    fn corner_polynomial_squares_to_block() {
        let j = Couplings::new(0.8, -1.3, 0.45);
        for (a, b) in [(0.0, 0.0), (PI, 0.0), (0.0, PI), (PI, PI)] {
            let k = MomentumPoint::new(a, b);
            let p = corner_polynomial(&j, &k);
            assert!((p * p - fourier_block_det(&k, &j)).abs() < 1e-13);
        }
    }

    #[test]
    fn grids_and_self_paired_points() {
        let s33 = spec33();
        assert_eq!(self_paired_momenta(&s33, ProjectionVariant::G1), vec![MomentumPoint::new(PI, PI)]);
        assert_eq!(self_paired_momenta(&s33, ProjectionVariant::G2), vec![MomentumPoint::new(0.0, PI)]);
        let s43 = TorusSpec::new(4, 3).unwrap();
        assert_eq!(self_paired_momenta(&s43, ProjectionVariant::G1).len(), 0);
        assert_eq!(self_paired_momenta(&s43, ProjectionVariant::G2).len(), 2);
        assert!(self_paired_momenta(&TorusSpec::new(3, 4).unwrap(), ProjectionVariant::G2).is_empty());
        let g1 = momentum_grid(&s33, ProjectionVariant::G1);
        assert!((g1[0].k1() - PI / 3.0).abs() < 1e-15);
        let g2 = momentum_grid(&s33, ProjectionVariant::G2);
        assert_eq!(g2[0].k1(), 0.0);
    }

    #[test]
    fn zero_couplings() {
        let spec = spec33();
        for v in ProjectionVariant::BOTH {
            assert_eq!(product_formula_det(&spec, &Couplings::zero(), v).unwrap(), 0.0);
        }
        let p = kacward_partition_pair(&spec, &Couplings::zero()).unwrap();
        assert!((p.sqrt1 - 1.0).abs() < 1e-14 && (p.sqrt2 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn momentum_wrap() {
        let k = MomentumPoint::new(3.0 * PI, -PI);
        assert!((k.k1() - PI).abs() < 1e-12);
        assert!((k.k2() - PI).abs() < 1e-12);
    }
}
