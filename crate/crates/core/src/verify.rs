//! The acceptance suite: eleven numbered checks, each returning pass/fail
//! with the worst observed deviation. Random draws come from a seeded
//! ChaCha generator so every run can be replayed.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::critical::beta_c_from_j3;
use crate::error::Result;
use crate::kacward::{kac_ward_product, kac_ward_tilde_product, kacward_partition_pair, product_formula_det, MomentumPoint};
use crate::lattice::{Couplings, TorusSpec};
use crate::linalg::det_one_minus;
use crate::numerics::rel_diff;
use crate::oracle::{cylinder_free_energy_tm, even_subgraph_census};
use crate::projection::ProjectionVariant;
use crate::quadrature::QuadratureSpec;
use crate::quantum::{ground_state_energy, gse_log_fit, quantum_free_energy, exact_diag_free_energy, sum_identity_check, trotter_free_energy, QuantumParams};
use crate::thermodynamics::{cylinder_free_energy, eval_gh, log_singularity_fit, plane_free_energy};

pub const CHECK_COUNT: usize = 11;
/// Wall-clock budget for the whole suite.
pub const SUITE_BUDGET: Duration = Duration::from_secs(600);
/// Thread cap for the whole suite.
pub const MAX_THREADS: usize = 8;

pub const CHECK_NAMES: [&str; CHECK_COUNT] = [
    "Kac-Ward determinant vs even-subgraph signed sums (3x3)",
    "parity identity sqrt(det1) + sqrt(det2) = 2(Z~ - odd-n_h sum)",
    "direct vs modified vs Fourier-product determinants",
    "cylinder integral vs transfer matrix, M = 2..8",
    "critical points and the g = cosh^2 cosh a^2 identity",
    "log singularity of f'' at J = (1,1,1)",
    "positivity of g + h",
    "cylinder to plane convergence",
    "quantum free energy, exact diagonalisation, Trotter, 2d-to-1d sum",
    "quantum ground-state energy and e0'' log divergence",
    "full suite within budget",
];

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl CheckResult {
    pub fn line(&self) -> String {
        format!(
            "{} [{:>2}] {} ({:.2}s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.elapsed.as_secs_f64(),
            self.detail
        )
    }
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub seed: u64,
    pub threads: usize,
    pub checks: Vec<CheckResult>,
    pub elapsed: Duration,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn rng(seed: u64, id: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_mul(1_000_003).wrapping_add(id as u64))
}

/// `n` triples in `[-1.5, 1.5]^3`, the first `negative` of them all-negative.
pub fn coupling_draws(seed: u64, id: usize, n: usize, negative: usize) -> Vec<Couplings> {
    let mut r = rng(seed, id);
    (0..n)
        .map(|i| {
            if i < negative {
                Couplings::new(-r.gen_range(0.0..1.5), -r.gen_range(0.0..1.5), -r.gen_range(0.0..1.5))
            } else {
                Couplings::new(r.gen_range(-1.5..1.5), r.gen_range(-1.5..1.5), r.gen_range(-1.5..1.5))
            }
        })
        .collect()
}

fn finish(id: usize, start: Instant, passed: bool, detail: String) -> CheckResult {
    CheckResult {
        id,
        name: CHECK_NAMES[id - 1],
        passed,
        detail,
        elapsed: start.elapsed(),
    }
}

fn failed(id: usize, start: Instant, e: crate::error::Error) -> CheckResult {
    finish(id, start, false, format!("error: {e}"))
}

fn kacward_draws(seed: u64) -> Vec<Couplings> {
    coupling_draws(seed, 1, 20, 2)
}

fn check_kacward(seed: u64) -> Result<(bool, String)> {
    let spec = TorusSpec::new(3, 3)?;
    let census = even_subgraph_census(&spec)?;
    let mut worst: f64 = 0.0;
    for j in kacward_draws(seed) {
        let s = census.sums(&j);
        let p = kacward_partition_pair(&spec, &j)?;
        worst = worst.max(rel_diff(p.sqrt1, s.signed1)).max(rel_diff(p.sqrt2, s.signed2));
    }
    Ok((worst < 1e-10, format!("max relative deviation {worst:.3e} over 20 draws")))
}

fn check_parity(seed: u64) -> Result<(bool, String)> {
    let spec = TorusSpec::new(3, 3)?;
    let census = even_subgraph_census(&spec)?;
    let mut worst: f64 = 0.0;
    for j in kacward_draws(seed) {
        let s = census.sums(&j);
        let p = kacward_partition_pair(&spec, &j)?;
        worst = worst.max(rel_diff(p.sqrt1 + p.sqrt2, 2.0 * (s.ztilde - s.odd_h)));
    }
    Ok((worst < 1e-10, format!("max relative deviation {worst:.3e} over 20 draws")))
}

fn check_translation(seed: u64) -> Result<(bool, String)> {
    let draws = coupling_draws(seed, 3, 20, 1);
    let mut worst: f64 = 0.0;
    for l in 2..=4 {
        for m in 2..=4 {
            let spec = TorusSpec::new(l, m)?;
            for j in &draws {
                for v in ProjectionVariant::BOTH {
                    let a = det_one_minus(&kac_ward_product(&spec, j, v)).value();
                    let b = det_one_minus(&kac_ward_tilde_product(&spec, j, v)).value();
                    let c = product_formula_det(&spec, j, v)?.exp();
                    let scale = a.norm().max(c.abs());
                    worst = worst.max((a - b).norm() / scale).max((a.re - c).abs() / scale);
                }
            }
        }
    }
    Ok((worst < 1e-9, format!("max relative deviation {worst:.3e} over 9 sizes x 20 draws x 2 projections")))
}

fn check_cylinder_tm(seed: u64, quad: &QuadratureSpec) -> Result<(bool, String)> {
    let draws = coupling_draws(seed, 4, 10, 1);
    let mut worst: f64 = 0.0;
    let mut bad = Vec::new();
    for m in 2..=8 {
        for j in &draws {
            let a = cylinder_free_energy(m, j, quad)?.value;
            let b = cylinder_free_energy_tm(m, j)?;
            let d = (a - b).abs();
            worst = worst.max(d);
            if d > 1e-8 {
                bad.push(format!("M={m} J=({:.3},{:.3},{:.3}) diff {d:.2e}", j.j1, j.j2, j.j3));
            }
        }
    }
    let mut detail = format!("max absolute deviation {worst:.3e}");
    if !bad.is_empty() {
        detail.push_str(&format!("; {} of 70 cases off: {}", bad.len(), bad.join("; ")));
    }
    Ok((bad.is_empty(), detail))
}

fn check_critical(seed: u64) -> Result<(bool, String)> {
    let b1 = beta_c_from_j3(1.0).beta_c;
    let b0 = beta_c_from_j3(0.0).beta_c;
    let e1 = b1.map_or(f64::INFINITY, |b| (b - 0.25 * 3f64.ln()).abs());
    let e0 = b0.map_or(f64::INFINITY, |b| (b - (2f64.sqrt() - 1.0).atanh()).abs());
    let absent = [-1.0, -1.2, -2.0, -5.0].iter().all(|&j3| beta_c_from_j3(j3).beta_c.is_none());
    let mut r = rng(seed, 5);
    let mut worst: f64 = 0.0;
    let mut worst_quartic: f64 = 0.0;
    for _ in 0..1000 {
        let beta = r.gen_range(0.01..1.5);
        let j3 = r.gen_range(-2.0..3.0);
        let g = eval_gh(beta, &MomentumPoint::origin(), &Couplings::new(1.0, 1.0, j3)).g;
        let a = crate::critical::a_of_beta(beta, j3);
        let rhs = (2.0 * beta).cosh().powi(2) * (2.0 * beta * j3).cosh() * a * a;
        worst = worst.max(rel_diff(g, rhs));
        let quartic = beta.cosh().powi(4) * (beta * j3).cosh().powi(2) * a * a;
        worst_quartic = worst_quartic.max(rel_diff(g, quartic));
    }
    let ok = e1 < 1e-10 && e0 < 1e-10 && absent && worst < 1e-12;
    Ok((
        ok,
        format!(
            "|beta_c(1) - log3/4| = {e1:.1e}, |beta_c(0) - artanh(sqrt2-1)| = {e0:.1e}, absent for J3 <= -1: {absent}, identity max rel {worst:.2e} (with cosh^4(beta) cosh^2(beta J3) in place of the prefactor: {worst_quartic:.2e})"
        ),
    ))
}

fn check_singularity(quad: &QuadratureSpec) -> Result<(bool, String)> {
    let j = Couplings::new(1.0, 1.0, 1.0);
    let bc = beta_c_from_j3(1.0).beta_c.expect("critical point exists");
    let fit = log_singularity_fit(&j, bc, &[0.02, 0.01, 0.005, 0.0025], quad)?;
    Ok((
        fit.consistent(0.01, 0.05),
        format!(
            "slopes {:.4} / {:.4}, residuals {:.2e} / {:.2e} (below / above)",
            fit.below.slope, fit.above.slope, fit.below.relative_residual, fit.above.relative_residual
        ),
    ))
}

fn check_positivity(seed: u64) -> Result<(bool, String)> {
    let mut r = rng(seed, 7);
    let mut worst = f64::INFINITY;
    for _ in 0..10_000 {
        let beta = r.gen_range(0.0..2.0);
        let j = Couplings::new(r.gen_range(-1.5..1.5), r.gen_range(-1.5..1.5), r.gen_range(-1.5..1.5));
        let k = MomentumPoint::new(r.gen_range(-PI..PI), r.gen_range(-PI..PI));
        let gh = eval_gh(beta, &k, &j);
        // magnitude of the largest terms that cancel in g + h
        let jj = j.as_array();
        let scale = jj.iter().map(|x| (2.0 * beta * x).cosh()).product::<f64>()
            + jj.iter().map(|x| (2.0 * beta * x).sinh().abs()).product::<f64>()
            + 3.0 * jj.iter().map(|x| (2.0 * beta * x).sinh().abs()).sum::<f64>();
        worst = worst.min((gh.g + gh.h) / scale.max(1.0));
    }
    Ok((worst >= -1e-12, format!("min (g + h) / scale = {worst:.3e} over 10^4 samples")))
}

fn check_plane_limit(seed: u64, quad: &QuadratureSpec) -> Result<(bool, String)> {
    let mut worst_ratio: f64 = 0.0;
    for j in coupling_draws(seed, 8, 5, 0) {
        let f = plane_free_energy(&j, quad)?.value;
        for m in [8, 16, 32, 64] {
            let fm = cylinder_free_energy(m, &j, quad)?.value;
            let bound = 4.0 * j.max_abs() / m as f64 + 2e-8;
            worst_ratio = worst_ratio.max((f - fm).abs() / bound);
        }
    }
    Ok((worst_ratio <= 1.0, format!("max |f - f_M| / bound = {worst_ratio:.3e}")))
}

fn check_quantum(seed: u64, quad: &QuadratureSpec) -> Result<(bool, String)> {
    let mut zero_field: f64 = 0.0;
    for b in [0.5, 2.0, 10.0] {
        let f = quantum_free_energy(&QuantumParams::new(b, 0.0)?, quad)?.value;
        zero_field = zero_field.max((f + (2.0 * (0.25 * b).cosh()).ln() / b).abs());
    }
    let p = QuantumParams::new(2.0, 0.3)?;
    let ed = (quantum_free_energy(&p, quad)?.value - exact_diag_free_energy(14, &p)?).abs();
    let p = QuantumParams::new(2.0, 0.5)?;
    let fq = quantum_free_energy(&p, quad)?.value;
    let errs = [16, 32, 64]
        .iter()
        .map(|&n| Ok((trotter_free_energy(&p, n, quad)?.value - fq).abs()))
        .collect::<Result<Vec<f64>>>()?;
    let ratios = [errs[0] / errs[1], errs[1] / errs[2]];
    let ratios_ok = ratios.iter().all(|r| (1.6..=2.4).contains(r));
    let mut r = rng(seed, 9);
    let mut sum_worst: f64 = 0.0;
    for _ in 0..20 {
        let m = r.gen_range(2..=32);
        let j2 = r.gen_range(0.05..2.0);
        let (lhs, rhs) = sum_identity_check(m, j2)?;
        sum_worst = sum_worst.max((lhs - rhs).abs() / rhs.abs().max(1.0));
    }
    let ok = zero_field < 1e-10 && ed < 1e-4 && ratios_ok && sum_worst < 1e-12;
    Ok((
        ok,
        format!(
            "h=0 closed form {zero_field:.1e}, ED L=14 {ed:.2e}, Trotter ratios {:.3} {:.3}, 2d-to-1d {sum_worst:.1e}",
            ratios[0], ratios[1]
        ),
    ))
}

fn check_ground_state(quad: &QuadratureSpec) -> Result<(bool, String)> {
    let e0 = (ground_state_energy(0.0, quad)?.value + 0.25).abs();
    let eh = (ground_state_energy(0.5, quad)?.value + 1.0 / PI).abs();
    let d = [1e-2, 1e-3, 1e-4];
    let above = gse_log_fit(&d, 1.0, quad)?.0;
    let below = gse_log_fit(&d, -1.0, quad)?.0;
    let target = 1.0 / (2.0 * PI);
    let slope_ok = [above, below].iter().all(|s| (s / target - 1.0).abs() <= 0.15);
    Ok((
        e0 < 1e-9 && eh < 1e-9 && slope_ok,
        format!(
            "e0(0) err {e0:.1e}, e0(1/2) err {eh:.1e}, slopes {above:.4} / {below:.4} vs 1/(2pi) = {target:.4} (1/pi = {:.4})",
            1.0 / PI
        ),
    ))
}

/// Runs check `id` (1 to 10). Check 11 is only meaningful inside [`run_all`].
pub fn run_check(id: usize, seed: u64) -> CheckResult {
    let quad = QuadratureSpec::default();
    let start = Instant::now();
    let out = match id {
        1 => check_kacward(seed).map(|(ok, d)| (ok && start.elapsed() < Duration::from_secs(120), d)),
        2 => check_parity(seed),
        3 => check_translation(seed).map(|(ok, d)| (ok && start.elapsed() < Duration::from_secs(60), d)),
        4 => check_cylinder_tm(seed, &quad).map(|(ok, d)| (ok && start.elapsed() < Duration::from_secs(120), d)),
        5 => check_critical(seed),
        6 => check_singularity(&quad),
        7 => check_positivity(seed),
        8 => check_plane_limit(seed, &quad),
        9 => check_quantum(seed, &quad),
        10 => check_ground_state(&quad),
        _ => return finish(id.clamp(1, CHECK_COUNT), start, false, format!("no check numbered {id}")),
    };
    match out {
        Ok((ok, detail)) => finish(id, start, ok, detail),
        Err(e) => failed(id, start, e),
    }
}

/// Runs every check in order on a pool of at most [`MAX_THREADS`] threads.
pub fn run_all(seed: u64, mut progress: impl FnMut(&CheckResult)) -> VerifyReport {
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get()).min(MAX_THREADS);
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build();
    let mut checks = Vec::with_capacity(CHECK_COUNT);
    for id in 1..CHECK_COUNT {
        let c = match &pool {
            Ok(p) => p.install(|| run_check(id, seed)),
            Err(_) => run_check(id, seed),
        };
        progress(&c);
        checks.push(c);
    }
    let elapsed = start.elapsed();
    let failures: Vec<usize> = checks.iter().filter(|c| !c.passed).map(|c| c.id).collect();
    let within = elapsed < SUITE_BUDGET;
    let last = CheckResult {
        id: CHECK_COUNT,
        name: CHECK_NAMES[CHECK_COUNT - 1],
        passed: within && failures.is_empty(),
        detail: format!(
            "{:.1}s on {threads} threads (budget {}s), failing checks: {:?}",
            elapsed.as_secs_f64(),
            SUITE_BUDGET.as_secs(),
            failures
        ),
        elapsed,
    };
    progress(&last);
    checks.push(last);
    VerifyReport {
        seed,
        threads,
        checks,
        elapsed,
    }
}
