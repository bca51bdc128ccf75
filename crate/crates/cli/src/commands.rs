use rayon::prelude::*;
use serde_json::json;

use ising_kw::critical::{beta_c_from_j3, singularity_hypotheses};
use ising_kw::oracle::{cylinder_free_energy_tm, MAX_TRANSFER_M};
use ising_kw::quantum::{ground_state_energy, gse_second_derivative, quantum_free_energy, trotter_free_energy, QuantumParams};
use ising_kw::thermodynamics::{cylinder_free_energy, plane_free_energy, thermo_sample};
use ising_kw::verify::{run_all, VerifyReport};
use ising_kw::{Couplings, Error, QuadratureSpec};

use crate::output::{Cell, Table};
use crate::range::Sweep;

/// Computes rows in parallel and keeps them in input order up to the first failure.
fn collect_rows<T: Sync>(inputs: &[T], row: impl Fn(&T) -> Result<Vec<Cell>, Error> + Sync + Send, table: &mut Table) -> Option<Error> {
    let results: Vec<Result<Vec<Cell>, Error>> = inputs.par_iter().map(row).collect();
    for r in results {
        match r {
            Ok(cells) => table.rows.push(cells),
            Err(e) => {
                table.error = Some(e.to_string());
                return Some(e);
            }
        }
    }
    None
}

pub fn free_energy(j: &Couplings, beta: &Sweep, cylinder_m: Option<usize>, quad: &QuadratureSpec) -> (Table, Option<Error>) {
    let mut cols = vec!["beta", "f", "f1", "f2", "quadrature_error", "flag"];
    if cylinder_m.is_some() {
        cols.extend(["f_cylinder", "f_transfer"]);
    }
    let mut table = Table::new(cols);
    let err = collect_rows(
        &beta.values(),
        |&b| {
            let mut row = match thermo_sample(b, j, quad) {
                Ok(s) => vec![
                    Cell::Num(b),
                    Cell::Num(s.f),
                    Cell::Num(s.f1),
                    Cell::Num(s.f2),
                    Cell::Num(s.quadrature_error),
                    Cell::Missing,
                ],
                Err(Error::NearCritical { .. }) => {
                    let f = plane_free_energy(&j.scaled(b), quad)?;
                    vec![
                        Cell::Num(b),
                        Cell::Num(f.value),
                        Cell::Missing,
                        Cell::Missing,
                        Cell::Num(f.error),
                        Cell::Text("near-critical".into()),
                    ]
                }
                Err(e) => return Err(e),
            };
            if let Some(m) = cylinder_m {
                let jb = j.scaled(b);
                row.push(Cell::Num(cylinder_free_energy(m, &jb, quad)?.value));
                row.push(if m <= MAX_TRANSFER_M { Cell::Num(cylinder_free_energy_tm(m, &jb)?) } else { Cell::Missing });
            }
            Ok(row)
        },
        &mut table,
    );
    (table, err)
}

pub fn cylinder(j: &Couplings, beta: &Sweep, m: usize, quad: &QuadratureSpec) -> (Table, Option<Error>) {
    let mut table = Table::new(vec!["beta", "M", "f_cylinder", "quadrature_error", "f_transfer", "difference"]);
    let err = collect_rows(
        &beta.values(),
        |&b| {
            let jb = j.scaled(b);
            let c = cylinder_free_energy(m, &jb, quad)?;
            let t = if m <= MAX_TRANSFER_M { Some(cylinder_free_energy_tm(m, &jb)?) } else { None };
            Ok(vec![
                Cell::Num(b),
                Cell::Int(m as i64),
                Cell::Num(c.value),
                Cell::Num(c.error),
                Cell::opt(t),
                Cell::opt(t.map(|t| c.value - t)),
            ])
        },
        &mut table,
    );
    (table, err)
}

pub fn critical(j3: &Sweep) -> (Table, Option<Error>) {
    let mut table = Table::new(vec!["J3", "beta_c", "g2", "c"]);
    let err = collect_rows(
        &j3.values(),
        |&x| {
            let r = beta_c_from_j3(x);
            Ok(match r.beta_c {
                Some(bc) => {
                    let hc = singularity_hypotheses(&Couplings::new(1.0, 1.0, x), bc);
                    vec![Cell::Num(x), Cell::Num(bc), Cell::Num(hc.g2), Cell::Num(hc.c)]
                }
                None => vec![Cell::Num(x), Cell::Missing, Cell::Missing, Cell::Missing],
            })
        },
        &mut table,
    );
    (table, err)
}

pub fn quantum(beta: &Sweep, h: &Sweep, trotter_n: Option<usize>, quad: &QuadratureSpec) -> (Table, Option<Error>) {
    let mut cols = vec!["beta", "h", "f_qu", "quadrature_error", "e0", "e0_second"];
    if trotter_n.is_some() {
        cols.push("f_trotter");
    }
    let mut table = Table::new(cols);
    let hs = h.values();
    let grid: Vec<(f64, f64)> = beta.values().into_iter().flat_map(|b| hs.iter().map(move |&x| (b, x))).collect();
    let err = collect_rows(
        &grid,
        |&(b, x)| {
            let p = QuantumParams::new(b, x)?;
            let f = quantum_free_energy(&p, quad)?;
            let e0 = ground_state_energy(x, quad)?.value;
            let e2 = match gse_second_derivative(x, quad) {
                Ok(v) => Some(v),
                Err(Error::NearQuantumCritical { .. }) => None,
                Err(e) => return Err(e),
            };
            let mut row = vec![Cell::Num(b), Cell::Num(x), Cell::Num(f.value), Cell::Num(f.error), Cell::Num(e0), Cell::opt(e2)];
            if let Some(n) = trotter_n {
                // the Trotter route needs h > 0 and n > beta h / 2
                let t = if x > 0.0 && n as f64 > 0.5 * b * x { Some(trotter_free_energy(&p, n, quad)?.value) } else { None };
                row.push(Cell::opt(t));
            }
            Ok(row)
        },
        &mut table,
    );
    (table, err)
}

pub fn verify(seed: u64) -> (Table, VerifyReport) {
    let report = run_all(seed, |c| eprintln!("{}", c.line()));
    let mut table = Table::new(vec!["id", "check", "passed", "seconds", "detail"]);
    for c in &report.checks {
        table.rows.push(vec![
            Cell::Int(c.id as i64),
            Cell::Text(c.name.to_string()),
            Cell::Bool(c.passed),
            Cell::Num(c.elapsed.as_secs_f64()),
            Cell::Text(c.detail.clone()),
        ]);
    }
    (table, report)
}

pub fn couplings_json(j: &Couplings) -> serde_json::Value {
    json!([j.j1, j.j2, j.j3])
}

pub fn sweep_json(s: &Sweep) -> serde_json::Value {
    json!({ "start": s.start, "stop": s.stop, "steps": s.steps })
}
