#![allow(dead_code)]

use netdea::lp::{ConstraintSense, LinearProgram};
use netdea::Dataset;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Published relational results for the fixture: (E_k, rank, E_k^1, rank, E_k^2, rank) for D1..D13.
pub const RELATIONAL_REFERENCE: [(f64, usize, f64, usize, f64, usize); 13] = [
    (0.4973, 1, 0.4973, 9, 1.0, 1),
    (0.0135, 7, 0.2668, 11, 0.0506, 5),
    (0.1235, 2, 0.7147, 4, 0.1728, 2),
    (0.0041, 11, 0.5529, 7, 0.0074, 11),
    (0.0568, 3, 0.6857, 5, 0.0823, 4),
    (0.0507, 4, 0.3417, 10, 0.1485, 3),
    (0.0025, 12, 1.0, 1, 0.0025, 12),
    (0.0090, 8, 0.5934, 6, 0.0152, 8),
    (0.0145, 6, 0.9809, 2, 0.0148, 9),
    (0.0268, 5, 0.7703, 3, 0.0348, 6),
    (0.0084, 9, 1.0, 1, 0.0084, 10),
    (0.0082, 10, 0.5064, 8, 0.0163, 7),
    (0.0007, 13, 1.0, 1, 0.0007, 13),
];

/// Published CCR results for the fixture (score, rank). D13 is printed as "0052" and read as 0.0052.
pub const CCR_REFERENCE: [(f64, usize); 13] = [
    (1.0, 1),
    (0.0327, 10),
    (0.4067, 2),
    (0.0162, 11),
    (0.2666, 3),
    (0.2377, 4),
    (0.0064, 12),
    (0.0357, 7),
    (0.0347, 8),
    (0.1639, 5),
    (0.0342, 9),
    (0.0514, 6),
    (0.0052, 13),
];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random strictly positive dataset with n in 2..=10 and m, p, s in 1..=3.
///
/// About a third of the datasets get a DMU 0 that dominates every other DMU
/// in both stages (single intermediate product), so it is relationally
/// efficient and exercises the efficient-DMU properties.
pub fn random_dataset(rng: &mut impl Rng) -> Dataset {
    let n = rng.gen_range(2..=10);
    let m = rng.gen_range(1..=3);
    let s = rng.gen_range(1..=3);
    let dominant = rng.gen_bool(1.0 / 3.0);
    let p = if dominant { 1 } else { rng.gen_range(1..=3) };
    let mut block = |width: usize| -> Vec<Vec<f64>> {
        (0..n)
            .map(|_| (0..width).map(|_| rng.gen_range(1.0..100.0)).collect())
            .collect()
    };
    let mut x = block(m);
    let mut z = block(p);
    let mut y = block(s);
    if dominant {
        let col_min = |rows: &[Vec<f64>], c: usize| rows.iter().map(|r| r[c]).fold(f64::MAX, f64::min);
        let col_max = |rows: &[Vec<f64>], c: usize| rows.iter().map(|r| r[c]).fold(f64::MIN, f64::max);
        let x0: Vec<f64> = (0..m).map(|c| 0.5 * col_min(&x, c)).collect();
        let z0 = 2.0 * col_max(&z, 0);
        let k = 2.0 * z0 / col_min(&z, 0);
        let y0: Vec<f64> = (0..s).map(|c| k * col_max(&y, c)).collect();
        x[0] = x0;
        z[0] = vec![z0];
        y[0] = y0;
    }
    let ids = (1..=n).map(|i| format!("D{i}")).collect();
    Dataset::new(ids, x, z, y).expect("generated data is valid")
}

/// Random LP with at most 4 variables and 4 constraints, small integer data.
pub fn random_lp(rng: &mut impl Rng) -> LinearProgram {
    let n = rng.gen_range(1..=4);
    let rows = rng.gen_range(1..=4);
    let objective = (0..n).map(|_| rng.gen_range(-5..=5) as f64).collect();
    let bounds = (0..n)
        .map(|_| {
            if rng.gen_bool(0.7) {
                0.0
            } else {
                rng.gen_range(-2..=2) as f64
            }
        })
        .collect();
    let mut lp = LinearProgram::maximize(objective).with_lower_bounds(bounds);
    for _ in 0..rows {
        let coefficients = (0..n).map(|_| rng.gen_range(-5..=5) as f64).collect();
        let sense = match rng.gen_range(0..20) {
            0..=11 => ConstraintSense::LessEqual,
            12..=16 => ConstraintSense::GreaterEqual,
            _ => ConstraintSense::Equal,
        };
        lp.add_constraint(coefficients, sense, rng.gen_range(-4..=10) as f64);
    }
    lp
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleOutcome {
    Optimal(f64),
    Infeasible,
    Unbounded,
}

const BOX: f64 = 1e6;

struct Halfspace {
    a: Vec<f64>,
    b: f64,
    equality: bool,
    artificial_box: bool,
}

fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..n {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Brute-force optimum by enumerating every basic solution.
///
/// A large artificial box makes the feasible set a polytope; the problem is
/// unbounded exactly when vertices touching the box beat every other vertex.
pub fn vertex_enumeration(lp: &LinearProgram) -> OracleOutcome {
    let n = lp.num_variables();
    let mut spaces = Vec::new();
    for ((row, sense), &b) in lp.constraint_matrix.iter().zip(&lp.constraint_senses).zip(&lp.rhs) {
        let (a, b, equality) = match sense {
            ConstraintSense::LessEqual => (row.clone(), b, false),
            ConstraintSense::GreaterEqual => (row.iter().map(|v| -v).collect(), -b, false),
            ConstraintSense::Equal => (row.clone(), b, true),
        };
        spaces.push(Halfspace {
            a,
            b,
            equality,
            artificial_box: false,
        });
    }
    for i in 0..n {
        let mut lower = vec![0.0; n];
        lower[i] = -1.0;
        spaces.push(Halfspace {
            a: lower,
            b: -lp.variable_lower_bounds[i],
            equality: false,
            artificial_box: false,
        });
        let mut upper = vec![0.0; n];
        upper[i] = 1.0;
        spaces.push(Halfspace {
            a: upper,
            b: lp.variable_lower_bounds[i] + BOX,
            equality: false,
            artificial_box: true,
        });
    }

    let feasible = |x: &[f64]| {
        spaces.iter().all(|h| {
            let lhs: f64 = h.a.iter().zip(x).map(|(a, v)| a * v).sum();
            let tol = 1e-9 * (1.0 + h.b.abs());
            if h.equality {
                (lhs - h.b).abs() <= tol
            } else {
                lhs <= h.b + tol
            }
        })
    };

    let mut best_all: Option<f64> = None;
    let mut best_regular: Option<f64> = None;
    for active in combinations(spaces.len(), n) {
        let a = active.iter().map(|&i| spaces[i].a.clone()).collect();
        let b = active.iter().map(|&i| spaces[i].b).collect();
        let Some(x) = solve_dense(a, b) else { continue };
        if !feasible(&x) {
            continue;
        }
        let value: f64 = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        best_all = Some(best_all.map_or(value, |b| b.max(value)));
        if !active.iter().any(|&i| spaces[i].artificial_box) {
            best_regular = Some(best_regular.map_or(value, |b| b.max(value)));
        }
    }
    match (best_all, best_regular) {
        (None, _) => OracleOutcome::Infeasible,
        (Some(all), Some(regular)) if all <= regular + 1e-6 => OracleOutcome::Optimal(regular),
        _ => OracleOutcome::Unbounded,
    }
}
