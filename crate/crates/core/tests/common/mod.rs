//! Independent oracles and data generators shared by the integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::BTreeSet;

use causalfire_core::dataset::{Column, Role, Schema, Table};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn table(cols: Vec<(&str, Role, Vec<f64>)>) -> Table {
    let schema = Schema::new(
        cols.iter()
            .map(|(n, r, _)| Column::new(*n, "", *r))
            .collect(),
    )
    .expect("valid test schema");
    Table::from_columns(schema, cols.into_iter().map(|c| c.2).collect()).expect("valid test table")
}

/// Edge list over nodes `0..d` as `(from, to)` index pairs.
pub type Edges = Vec<(usize, usize)>;

pub fn node_names(d: usize) -> Vec<String> {
    (0..d).map(|i| format!("V{i}")).collect()
}

/// Random DAG: shuffle a causal order, then keep each forward pair with
/// probability `p`.
pub fn random_dag(rng: &mut impl Rng, d: usize, p: f64) -> Edges {
    let mut order: Vec<usize> = (0..d).collect();
    order.shuffle(rng);
    let mut edges = Vec::new();
    for a in 0..d {
        for b in a + 1..d {
            if rng.random_bool(p) {
                edges.push((order[a], order[b]));
            }
        }
    }
    edges
}

/// Every node reachable from `start` along directed edges, `start` included.
fn reach(edges: &Edges, start: usize) -> BTreeSet<usize> {
    let mut seen = BTreeSet::from([start]);
    let mut stack = vec![start];
    while let Some(u) = stack.pop() {
        for &(a, b) in edges {
            if a == u && seen.insert(b) {
                stack.push(b);
            }
        }
    }
    seen
}

/// d-separation by enumerating every simple path between `x` and `y` in the
/// skeleton and testing each for activity given `z`.
pub fn dsep_by_paths(d: usize, edges: &Edges, x: usize, y: usize, z: &BTreeSet<usize>) -> bool {
    fn walk(d: usize, edges: &Edges, path: &mut Vec<usize>, y: usize, z: &BTreeSet<usize>) -> bool {
        let u = *path.last().unwrap();
        if u == y {
            return path_active(edges, path, z);
        }
        for v in 0..d {
            let adjacent = edges.contains(&(u, v)) || edges.contains(&(v, u));
            if adjacent && !path.contains(&v) {
                path.push(v);
                let found = walk(d, edges, path, y, z);
                path.pop();
                if found {
                    return true;
                }
            }
        }
        false
    }
    let mut path = vec![x];
    !walk(d, edges, &mut path, y, z)
}

fn path_active(edges: &Edges, path: &[usize], z: &BTreeSet<usize>) -> bool {
    for k in 1..path.len() - 1 {
        let (a, m, b) = (path[k - 1], path[k], path[k + 1]);
        let collider = edges.contains(&(a, m)) && edges.contains(&(b, m));
        if collider {
            if !reach(edges, m).iter().any(|n| z.contains(n)) {
                return false;
            }
        } else if z.contains(&m) {
            return false;
        }
    }
    true
}

/// `tr(exp(A)) - d` with `A = W∘W`, summing the power series until the terms
/// stop contributing.
pub fn penalty_series(w: &[Vec<f64>]) -> f64 {
    let d = w.len();
    let a: Vec<Vec<f64>> = w
        .iter()
        .map(|r| r.iter().map(|v| v * v).collect())
        .collect();
    let mut term: Vec<Vec<f64>> = (0..d)
        .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut total = 0.0;
    for k in 1..200 {
        let mut next = vec![vec![0.0; d]; d];
        for i in 0..d {
            for j in 0..d {
                next[i][j] = (0..d).map(|l| term[i][l] * a[l][j]).sum::<f64>() / k as f64;
            }
        }
        term = next;
        total += (0..d).map(|i| term[i][i]).sum::<f64>();
        if term.iter().flatten().all(|v| v.abs() < 1e-18) {
            break;
        }
    }
    total
}

/// Kahn's algorithm on an index edge list; `None` when a cycle remains.
pub fn is_acyclic(d: usize, edges: &Edges) -> bool {
    let mut indeg = vec![0; d];
    for &(_, b) in edges {
        indeg[b] += 1;
    }
    let mut ready: Vec<usize> = (0..d).filter(|&i| indeg[i] == 0).collect();
    let mut seen = 0;
    while let Some(u) = ready.pop() {
        seen += 1;
        for &(a, b) in edges {
            if a == u {
                indeg[b] -= 1;
                if indeg[b] == 0 {
                    ready.push(b);
                }
            }
        }
    }
    seen == d
}

/// Linear-Gaussian SEM: `x_j = Σ w_ij x_i + N(0, noise_sd²)`.
pub fn linear_sem(
    rng: &mut impl Rng,
    d: usize,
    weights: &[(usize, usize, f64)],
    n: usize,
    noise_sd: f64,
) -> Vec<Vec<f64>> {
    let edges: Edges = weights.iter().map(|&(a, b, _)| (a, b)).collect();
    let mut order = Vec::new();
    let mut placed = vec![false; d];
    while order.len() < d {
        for j in 0..d {
            if !placed[j] && edges.iter().all(|&(a, b)| b != j || placed[a]) {
                placed[j] = true;
                order.push(j);
            }
        }
    }
    let noise = Normal::new(0.0, noise_sd).unwrap();
    let mut x = vec![vec![0.0; n]; d];
    for &j in &order {
        for i in 0..n {
            let mut v = noise.sample(rng);
            for &(a, b, w) in weights {
                if b == j {
                    v += w * x[a][i];
                }
            }
            x[j][i] = v;
        }
    }
    x
}

/// Weight magnitude in [0.5, 2.0] with a random sign.
pub fn edge_weight(rng: &mut impl Rng) -> f64 {
    let m = rng.random_range(0.5..=2.0);
    if rng.random_bool(0.5) {
        m
    } else {
        -m
    }
}

/// Structural Hamming distance: unordered pairs whose edge status differs
/// (missing, extra or reversed each count once).
pub fn shd(truth: &BTreeSet<(String, String)>, est: &BTreeSet<(String, String)>) -> usize {
    let mut pairs = BTreeSet::new();
    for (a, b) in truth.iter().chain(est) {
        let key = if a < b {
            (a.clone(), b.clone())
        } else {
            (b.clone(), a.clone())
        };
        pairs.insert(key);
    }
    pairs
        .into_iter()
        .filter(|(a, b)| {
            let t = (
                truth.contains(&(a.clone(), b.clone())),
                truth.contains(&(b.clone(), a.clone())),
            );
            let e = (
                est.contains(&(a.clone(), b.clone())),
                est.contains(&(b.clone(), a.clone())),
            );
            t != e
        })
        .count()
}

/// `X ~ N(0,1)`, `T = 1[X + e > 0]`, `Y = 2T + 1.5X + u`, unit-variance noise.
pub fn confounded(seed: u64, n: usize) -> Table {
    let mut r = rng(seed);
    let mut x = Vec::with_capacity(n);
    let mut t = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let xi: f64 = StandardNormal.sample(&mut r);
        let e: f64 = StandardNormal.sample(&mut r);
        let u: f64 = StandardNormal.sample(&mut r);
        let ti = if xi + e > 0.0 { 1.0 } else { 0.0 };
        x.push(xi);
        t.push(ti);
        y.push(2.0 * ti + 1.5 * xi + u);
    }
    table(vec![
        ("T", Role::Input, t),
        ("X", Role::Input, x),
        ("Y", Role::Outcome, y),
    ])
}

/// Treatment and outcome drawn independently.
pub fn null_dataset(seed: u64, n: usize) -> Table {
    let mut r = rng(seed);
    let t: Vec<f64> = (0..n).map(|_| r.random_range(0.0..1.0)).collect();
    let y: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut r)).collect();
    table(vec![("T", Role::Input, t), ("Y", Role::Outcome, y)])
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Difference of outcome means between treated and control rows.
pub fn group_mean_difference(t: &[f64], y: &[f64]) -> f64 {
    let (mut s1, mut n1, mut s0, mut n0) = (0.0, 0.0, 0.0, 0.0);
    for (ti, yi) in t.iter().zip(y) {
        if *ti > 0.5 {
            s1 += yi;
            n1 += 1.0;
        } else {
            s0 += yi;
            n0 += 1.0;
        }
    }
    s1 / n1 - s0 / n0
}

/// `1 - Σ(y - ŷ)² / Σ(y - ȳ)²`, written out from the definition.
pub fn r2_definition(y: &[f64], pred: &[f64]) -> f64 {
    let m = mean(y);
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for i in 0..y.len() {
        ss_res += (y[i] - pred[i]) * (y[i] - pred[i]);
        ss_tot += (y[i] - m) * (y[i] - m);
    }
    1.0 - ss_res / ss_tot
}

/// Least squares with intercept via the normal equations and Gauss-Jordan
/// elimination with partial pivoting. Returns `[intercept, slopes...]`.
pub fn ols_normal_equations(xs: &[&[f64]], y: &[f64]) -> Vec<f64> {
    let p = xs.len() + 1;
    let n = y.len();
    let row = |i: usize| -> Vec<f64> {
        std::iter::once(1.0)
            .chain(xs.iter().map(|c| c[i]))
            .collect()
    };
    let mut a = vec![vec![0.0; p + 1]; p];
    for i in 0..n {
        let r = row(i);
        for j in 0..p {
            for k in 0..p {
                a[j][k] += r[j] * r[k];
            }
            a[j][p] += r[j] * y[i];
        }
    }
    for c in 0..p {
        let piv = (c..p)
            .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
            .unwrap();
        a.swap(c, piv);
        for r in 0..p {
            if r != c {
                let f = a[r][c] / a[c][c];
                for k in c..=p {
                    a[r][k] -= f * a[c][k];
                }
            }
        }
    }
    (0..p).map(|j| a[j][p] / a[j][j]).collect()
}
