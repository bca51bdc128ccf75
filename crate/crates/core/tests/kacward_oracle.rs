use ising_kw::kacward::{
    kac_ward_product, kac_ward_tilde_product, kacward_partition_pair, product_formula_det, root_sign,
};
use ising_kw::linalg::det_one_minus;
use ising_kw::numerics::rel_diff;
use ising_kw::oracle::{brute_force_z, even_subgraph_census, high_temperature_z};
use ising_kw::projection::{handle_stats, EvenSubgraph, FaithfulProjection, ProjectionVariant};
use ising_kw::{Couplings, TorusSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn draws(seed: u64, n: usize) -> Vec<Couplings> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| Couplings::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)))
        .collect()
}

#[test]
fn determinant_is_square_of_signed_sum() {
    let spec = TorusSpec::new(3, 3).unwrap();
    let census = even_subgraph_census(&spec).unwrap();
    let mut negative = 0;
    for j in draws(11, 30) {
        let s = census.sums(&j);
        let p = kacward_partition_pair(&spec, &j).unwrap();
        assert!(rel_diff(p.det1.value().re, s.signed1 * s.signed1) < 1e-10, "{j:?}");
        assert!(rel_diff(p.det2.value().re, s.signed2 * s.signed2) < 1e-10, "{j:?}");
        assert!(rel_diff(p.sqrt1, s.signed1) < 1e-10, "{j:?}: {} vs {}", p.sqrt1, s.signed1);
        assert!(rel_diff(p.sqrt2, s.signed2) < 1e-10, "{j:?}: {} vs {}", p.sqrt2, s.signed2);
        negative += usize::from(s.signed1 < 0.0) + usize::from(s.signed2 < 0.0);
    }
    // the signed sums really do go negative for frustrated couplings
    assert!(negative > 0);
}

#[test]
fn frozen_kacward_examples() {
    let spec = TorusSpec::new(3, 3).unwrap();
    let census = even_subgraph_census(&spec).unwrap();
    let j = Couplings::new(0.4, 0.4, 0.4);
    let p = kacward_partition_pair(&spec, &j).unwrap();
    let s = census.sums(&j);
    assert!(rel_diff(p.sqrt1, s.signed1) < 1e-10);
    let z = brute_force_z(&spec, &j).unwrap();
    assert!(rel_diff(high_temperature_z(&spec, &j, s.ztilde), z) < 1e-12);

    let j = Couplings::new(-0.6, 0.8, -0.3);
    let p = kacward_partition_pair(&spec, &j).unwrap();
    let s = census.sums(&j);
    assert!(rel_diff(p.sqrt1 + p.sqrt2, 2.0 * (s.ztilde - s.odd_h)) < 1e-10);
}

#[test]
fn georgios_parity_identity_exhaustive() {
    let spec = TorusSpec::new(3, 3).unwrap();
    let census = even_subgraph_census(&spec).unwrap();
    for k in census.counts.keys() {
        assert_eq!(k.odd1 ^ k.odd2, k.odd_h, "{k:?}");
    }
    for j in draws(5, 10) {
        let s = census.sums(&j);
        assert!(rel_diff(s.signed1 + s.signed2, 2.0 * (s.ztilde - s.odd_h)) < 1e-12);
    }
}

#[test]
fn crossing_count_ignores_interior_edges() {
    let spec = TorusSpec::new(3, 3).unwrap();
    let p1 = FaithfulProjection::new(spec, ProjectionVariant::G1);
    let p2 = FaithfulProjection::new(spec, ProjectionVariant::G2);
    let base = EvenSubgraph::horizontal_ring(&spec, 0);
    let mut with_interior = base.clone();
    // add a contractible triangle away from the seams
    for e in [0usize, 4, 2] {
        with_interior.toggle(e);
    }
    // edges 0 (E at (0,0)), 4 (N at (1,0)), 2 (NE at (0,0)) close a face
    assert!(with_interior.is_even(&spec));
    for p in [&p1, &p2] {
        assert_eq!(p.crossing_count(&base), p.crossing_count(&with_interior));
    }
}

#[test]
fn handle_count_equals_wrap_count() {
    let spec = TorusSpec::new(3, 3).unwrap();
    let basis = ising_kw::projection::cycle_basis(&spec).unwrap();
    let mut g = EvenSubgraph::empty(&spec);
    for (i, &c) in basis.iter().enumerate().cycle().take(200) {
        for b in 0..27 {
            if (c >> b) & 1 == 1 && (i * 31 + b) % 3 != 0 {
                g.toggle(b);
            }
        }
        if !g.is_even(&spec) {
            continue;
        }
        let s = handle_stats(&spec, &g);
        let wraps = g.edges().filter(|&e| spec.is_wrap(spec.undirected_from_index(e))).count();
        assert_eq!(s.n_h + s.n_v, wraps);
    }
}

#[test]
fn translation_invariance_and_product_formula() {
    for l in 2..=4 {
        for m in 2..=4 {
            let spec = TorusSpec::new(l, m).unwrap();
            for j in draws(100 + (l * 10 + m) as u64, 4) {
                for v in ProjectionVariant::BOTH {
                    let a = det_one_minus(&kac_ward_product(&spec, &j, v)).value();
                    let b = det_one_minus(&kac_ward_tilde_product(&spec, &j, v)).value();
                    let c = product_formula_det(&spec, &j, v).unwrap().exp();
                    assert!((a - b).norm() <= 1e-9 * a.norm().max(1e-300), "{l}x{m} {v:?} {j:?}: {a} vs {b}");
                    assert!(rel_diff(a.re, c) < 1e-9, "{l}x{m} {v:?} {j:?}: {a} vs {c}");
                    assert!(root_sign(&spec, &j, v).abs() == 1.0);
                }
            }
        }
    }
}

#[test]
fn product_formula_riemann_sum_convergence() {
    let j = Couplings::new(0.5, -0.7, 0.2);
    let m = 3;
    let per_l = |l: usize| {
        let spec = TorusSpec::new(l, m).unwrap();
        product_formula_det(&spec, &j, ProjectionVariant::G1).unwrap() / l as f64
    };
    let (a, b, c) = (per_l(4), per_l(8), per_l(16));
    assert!((b - c).abs() * 2.0 <= (a - b).abs());
}
