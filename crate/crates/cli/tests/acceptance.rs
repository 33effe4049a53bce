//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Runs as a plain binary (`harness = false`).

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use causalfire_core::baselines::{
    fit_forest, fit_ols, intervention_shift, ForestConfig, Predictor,
};
use causalfire_core::dataset::{
    synthesize_fire_dataset, BinaryTreatment, Role, FIRE_DGP, FIRE_INPUTS,
};
use causalfire_core::discovery::{
    acyclicity_gradient, acyclicity_penalty, learn_structure, DiscoveryConfig, Scaling,
};
use causalfire_core::inference::{
    build_config, estimate_ate, CausalQuery, DagConfigKind, DOMAIN_EDGES, STUDY_COLUMNS,
};
use causalfire_core::refute::{data_subset, placebo_treatment, random_common_cause};
use causalfire_core::{ConstraintSet, Dag, Table};
use common::*;
use nalgebra::DMatrix;
use rand::Rng;
use serde_json::Value;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        match $cond {
            true => {}
            false => return Err(format!($($msg)+)),
        }
    };
}

fn dag_of(d: usize, edges: &Edges) -> Dag {
    let names = node_names(d);
    let pairs: Vec<(&str, &str)> = edges
        .iter()
        .map(|&(a, b)| (names[a].as_str(), names[b].as_str()))
        .collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    Dag::from_edges(&refs, &pairs).unwrap()
}

fn named_edges(d: usize, edges: &Edges) -> BTreeSet<(String, String)> {
    let names = node_names(d);
    edges
        .iter()
        .map(|&(a, b)| (names[a].clone(), names[b].clone()))
        .collect()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut r = rng(2024);
    let mut checks = 0usize;
    for _ in 0..200 {
        let d = r.random_range(2..=5);
        let edges = random_dag(&mut r, d, 0.5);
        let dag = dag_of(d, &edges);
        let names = node_names(d);
        for x in 0..d {
            for y in 0..d {
                if x == y {
                    continue;
                }
                let others: Vec<usize> = (0..d).filter(|&v| v != x && v != y).collect();
                for mask in 0..(1u32 << others.len()) {
                    let z: BTreeSet<usize> = others
                        .iter()
                        .enumerate()
                        .filter(|(k, _)| mask >> k & 1 == 1)
                        .map(|(_, &v)| v)
                        .collect();
                    let given: Vec<&str> = z.iter().map(|&v| names[v].as_str()).collect();
                    let got = dag.d_separated(&names[x], &names[y], &given).unwrap();
                    ensure!(
                        got == dsep_by_paths(d, &edges, x, y, &z),
                        "mismatch on {edges:?} x={x} y={y} z={z:?}"
                    );
                    checks += 1;
                }
            }
        }
    }
    let small = Dag::from_edges(
        &["W", "X", "Y", "Z"],
        &[("W", "X"), ("X", "Z"), ("X", "Y"), ("Z", "Y")],
    )
    .unwrap();
    let small_edges: Edges = vec![(0, 1), (1, 3), (1, 2), (3, 2)];
    for x in 0..4 {
        for y in 0..4 {
            if x == y {
                continue;
            }
            let others: Vec<usize> = (0..4).filter(|&v| v != x && v != y).collect();
            for mask in 0..4u32 {
                let z: BTreeSet<usize> = others
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| mask >> k & 1 == 1)
                    .map(|(_, &v)| v)
                    .collect();
                let n = ["W", "X", "Y", "Z"];
                let given: Vec<&str> = z.iter().map(|&v| n[v]).collect();
                ensure!(
                    small.d_separated(n[x], n[y], &given).unwrap()
                        == dsep_by_paths(4, &small_edges, x, y, &z),
                    "four-node graph mismatch"
                );
                checks += 1;
            }
        }
    }
    ensure!(
        small.d_separated("Y", "W", &["X"]).unwrap(),
        "Y not independent of W given X"
    );
    ensure!(
        small.d_separated("Z", "W", &["X"]).unwrap(),
        "Z not independent of W given X"
    );
    let secs = start.elapsed();
    ensure!(secs < Duration::from_secs(60), "took {secs:?}");
    Ok(format!(
        "{checks} queries agree, {:.1}s",
        secs.as_secs_f64()
    ))
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

fn criterion_2() -> Outcome {
    ensure!(
        acyclicity_penalty(&DMatrix::zeros(4, 4)).unwrap() == 0.0,
        "h(0) != 0"
    );
    let w = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
    let h = acyclicity_penalty(&w).unwrap();
    let series = penalty_series(&rows_of(&w));
    ensure!((h - series).abs() < 1e-9, "h {h} vs series {series}");
    ensure!(
        (h - (2.0 * 1f64.cosh() - 2.0)).abs() < 1e-9,
        "h {h} vs closed form"
    );
    let mut r = rng(11);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let d = r.random_range(2..=5);
        let w = DMatrix::from_fn(d, d, |i, j| {
            if i == j {
                0.0
            } else {
                r.random_range(-1.0..1.0)
            }
        });
        let g = acyclicity_gradient(&w).unwrap();
        let eps = 1e-6;
        for i in 0..d {
            for j in 0..d {
                let (mut up, mut dn) = (w.clone(), w.clone());
                up[(i, j)] += eps;
                dn[(i, j)] -= eps;
                let fd = (acyclicity_penalty(&up).unwrap() - acyclicity_penalty(&dn).unwrap())
                    / (2.0 * eps);
                let rel = (fd - g[(i, j)]).abs() / g[(i, j)].abs().max(1.0);
                worst = worst.max(rel);
            }
        }
    }
    ensure!(worst < 1e-5, "worst gradient relative error {worst:e}");
    Ok(format!(
        "h(2-cycle)={h:.12}, worst gradient error {worst:.1e}"
    ))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let cfg = DiscoveryConfig {
        scaling: Scaling::Common,
        ..DiscoveryConfig::default()
    };
    let mut good = 0;
    let mut shds = Vec::new();
    for seed in 0..10u64 {
        let mut r = rng(seed);
        let d = 5;
        let edges = random_dag(&mut r, d, 0.5);
        let weights: Vec<(usize, usize, f64)> = edges
            .iter()
            .map(|&(a, b)| (a, b, edge_weight(&mut r)))
            .collect();
        let data = linear_sem(&mut r, d, &weights, 2000, 0.1);
        let names = node_names(d);
        let t = table(
            names
                .iter()
                .map(String::as_str)
                .zip(data)
                .map(|(n, v)| (n, Role::Input, v))
                .collect(),
        );
        let learned =
            learn_structure(&t, &ConstraintSet::default(), &cfg).map_err(|e| e.to_string())?;
        ensure!(
            learned.topological_order().len() == d,
            "seed {seed}: output not acyclic"
        );
        let s = shd(&named_edges(d, &edges), &learned.edge_set());
        shds.push(s);
        if s <= 1 {
            good += 1;
        }

        // Constrained run: require one true edge, forbid one absent pair.
        let required = edges
            .first()
            .map(|&(a, b)| (names[a].clone(), names[b].clone()));
        let forbidden = (0..d)
            .flat_map(|a| (0..d).map(move |b| (a, b)))
            .find(|&(a, b)| a != b && !edges.contains(&(a, b)) && !edges.contains(&(b, a)))
            .map(|(a, b)| (names[a].clone(), names[b].clone()));
        let req: Vec<(&str, &str)> = required
            .iter()
            .map(|(a, b)| (a.as_str(), b.as_str()))
            .collect();
        let forb: Vec<(&str, &str)> = forbidden
            .iter()
            .map(|(a, b)| (a.as_str(), b.as_str()))
            .collect();
        let c = ConstraintSet::new(&req, &forb).map_err(|e| e.to_string())?;
        let constrained = learn_structure(&t, &c, &cfg).map_err(|e| e.to_string())?;
        ensure!(
            constrained.topological_order().len() == d,
            "seed {seed}: constrained output not acyclic"
        );
        for (a, b) in &req {
            ensure!(
                constrained.has_edge(a, b),
                "seed {seed}: required {a}->{b} missing"
            );
        }
        for (a, b) in &forb {
            ensure!(
                !constrained.has_edge(a, b),
                "seed {seed}: forbidden {a}->{b} present"
            );
        }
    }
    let secs = start.elapsed();
    ensure!(
        good >= 8,
        "SHD <= 1 on {good}/10 seeds, SHD per seed {shds:?}"
    );
    ensure!(secs < Duration::from_secs(300), "took {secs:?}");
    Ok(format!(
        "SHD <= 1 on {good}/10 seeds {shds:?}, {:.1}s",
        secs.as_secs_f64()
    ))
}

fn confounder_query(t: &Table) -> CausalQuery {
    let dag = Dag::from_edges(&["T", "X", "Y"], &[("X", "T"), ("X", "Y"), ("T", "Y")]).unwrap();
    let def = BinaryTreatment::from_values("T", t.column("T").unwrap(), 0.5).unwrap();
    CausalQuery::new(dag, "Y", def).unwrap()
}

fn criterion_4() -> Outcome {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut min_naive = f64::INFINITY;
    for seed in 0..10u64 {
        let t = confounded(seed, 5000);
        let est = estimate_ate(&t, &confounder_query(&t)).map_err(|e| e.to_string())?;
        let naive = group_mean_difference(t.column("T").unwrap(), t.column("Y").unwrap());
        ensure!(
            (1.9..=2.1).contains(&est.ate),
            "seed {seed}: ate {}",
            est.ate
        );
        ensure!(naive > 2.3, "seed {seed}: unadjusted {naive}");
        ensure!(est.p_value < 0.05, "seed {seed}: p {}", est.p_value);
        lo = lo.min(est.ate);
        hi = hi.max(est.ate);
        min_naive = min_naive.min(naive);
    }
    Ok(format!(
        "adjusted ATE in [{lo:.3}, {hi:.3}], unadjusted >= {min_naive:.3}"
    ))
}

fn criterion_5() -> Outcome {
    let mut worst_rel = 0.0f64;
    let mut worst_placebo = 0.0f64;
    for seed in 0..10u64 {
        let t = confounded(seed, 5000);
        let q = confounder_query(&t);
        let est = estimate_ate(&t, &q).map_err(|e| e.to_string())?;
        let rcc = random_common_cause(&t, &q, &est, 20, seed).map_err(|e| e.to_string())?;
        let sub = data_subset(&t, &q, &est, 0.8, 20, seed).map_err(|e| e.to_string())?;
        let plc = placebo_treatment(&t, &q, &est, 20, seed).map_err(|e| e.to_string())?;
        for r in [&rcc, &sub] {
            let rel = (r.refuted_ate - est.ate).abs() / est.ate.abs();
            ensure!(
                rel <= 0.05,
                "seed {seed}: {:?} off by {:.1}%",
                r.method,
                rel * 100.0
            );
            worst_rel = worst_rel.max(rel);
        }
        ensure!(
            plc.refuted_ate.abs() < 0.1,
            "seed {seed}: placebo {}",
            plc.refuted_ate
        );
        worst_placebo = worst_placebo.max(plc.refuted_ate.abs());
    }
    let mut passes = 0;
    for seed in 0..100u64 {
        let t = null_dataset(seed, 500);
        let dag = Dag::from_edges(&["T", "Y"], &[("T", "Y")]).unwrap();
        let q = CausalQuery::at_mean(&t, dag, "T", "Y").map_err(|e| e.to_string())?;
        let est = estimate_ate(&t, &q).map_err(|e| e.to_string())?;
        if placebo_treatment(&t, &q, &est, 20, seed)
            .map_err(|e| e.to_string())?
            .passed
        {
            passes += 1;
        }
    }
    ensure!(passes >= 95, "null placebo pass rate {passes}/100");
    Ok(format!(
        "refuters within {:.2}%, |placebo| <= {worst_placebo:.3}, null placebo pass {passes}/100",
        worst_rel * 100.0
    ))
}

fn criterion_6() -> Outcome {
    let mut r = rng(6);
    let cols: Vec<Vec<f64>> = (0..3)
        .map(|_| (0..60).map(|_| r.random_range(-10.0..10.0)).collect())
        .collect();
    let truth = [4.0, 0.5, -3.0, 7.25];
    let y: Vec<f64> = (0..60)
        .map(|i| truth[0] + truth[1] * cols[0][i] + truth[2] * cols[1][i] + truth[3] * cols[2][i])
        .collect();
    let t = table(vec![
        ("a", Role::Input, cols[0].clone()),
        ("b", Role::Input, cols[1].clone()),
        ("c", Role::Input, cols[2].clone()),
        ("y", Role::Outcome, y),
    ]);
    let m = fit_ols(&t, "y").map_err(|e| e.to_string())?;
    ensure!(
        (m.intercept - truth[0]).abs() < 1e-9,
        "intercept {}",
        m.intercept
    );
    for (k, name) in ["a", "b", "c"].iter().enumerate() {
        let c = m.coefficient(name).unwrap();
        ensure!((c - truth[k + 1]).abs() < 1e-9, "{name}: {c}");
    }
    ensure!(
        (m.r_squared - 1.0).abs() < 1e-9,
        "noiseless R^2 {}",
        m.r_squared
    );

    let fire = synthesize_fire_dataset(10_000, 42).map_err(|e| e.to_string())?;
    let fm = fit_ols(&fire, "FR").map_err(|e| e.to_string())?;
    let mut worst_dot = 0.0f64;
    for name in FIRE_INPUTS {
        let col = fire.column(name).unwrap();
        let scale = col.iter().map(|v| v * v).sum::<f64>().sqrt()
            * fm.residuals.iter().map(|v| v * v).sum::<f64>().sqrt();
        let dot: f64 = col.iter().zip(&fm.residuals).map(|(x, e)| x * e).sum();
        worst_dot = worst_dot.max((dot / scale).abs());
    }
    ensure!(worst_dot < 1e-6, "residual orthogonality {worst_dot:e}");
    let mut worst = 0.0f64;
    for name in FIRE_INPUTS {
        let want = FIRE_DGP.coefficient(name).unwrap();
        let got = fm.coefficient(name).unwrap();
        let rel = (got - want).abs() / want.abs();
        ensure!(rel <= 0.10, "{name}: {got} vs generator {want}");
        worst = worst.max(rel);
    }
    Ok(format!(
        "exact noiseless fit, orthogonality {worst_dot:.1e}, generator coefficients within {:.2}%",
        worst * 100.0
    ))
}

fn criterion_7() -> Outcome {
    let t = synthesize_fire_dataset(500, 7).map_err(|e| e.to_string())?;
    let ols = fit_ols(&t, "FR").map_err(|e| e.to_string())?;
    let forest = fit_forest(&t, "FR", &ForestConfig::default()).map_err(|e| e.to_string())?;
    for v in FIRE_INPUTS {
        let r = intervention_shift(&ols, &t, &[v]).map_err(|e| e.to_string())?;
        ensure!(
            r.mean_shift.abs() < 1e-9,
            "{v}: linear mean shift {}",
            r.mean_shift
        );
        ensure!(
            r.row_shifts().iter().any(|s| s.abs() > 1e-6),
            "{v}: all row shifts zero"
        );
    }
    for model in [&ols as &dyn Predictor, &forest] {
        let r = intervention_shift(model, &t, &FIRE_INPUTS).map_err(|e| e.to_string())?;
        ensure!(
            r.after.iter().all(|p| *p == r.after[0]),
            "{}: post predictions vary",
            model.method_name()
        );
    }
    Ok("linear mean shift 0 per variable, fix-all collapses both methods".into())
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_causalfire")
}

fn run_cli(dir: &Path, args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(bin())
        .current_dir(dir)
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    ensure!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    Ok(out.stdout)
}

fn criterion_8() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    run_cli(d, &["synth", "--n", "144", "--seed", "42"])?;
    run_cli(
        d,
        &[
            "--data",
            "synthetic.csv",
            "--out",
            "out",
            "study",
            "--kind",
            "hypothetical",
        ],
    )?;
    let md =
        std::fs::read_to_string(d.join("out/study_hypothetical.md")).map_err(|e| e.to_string())?;
    let json: Value = serde_json::from_str(
        &std::fs::read_to_string(d.join("out/study_hypothetical.json"))
            .map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    // The results table is the first contiguous block of table lines.
    let lines: Vec<&str> = md
        .lines()
        .skip_while(|l| !l.starts_with('|'))
        .take_while(|l| l.starts_with('|'))
        .collect();
    let header: Vec<&str> = lines[0]
        .trim_matches('|')
        .split('|')
        .map(str::trim)
        .collect();
    let expected = [
        "Treatment variable",
        "Mean value",
        "p-value",
        "Random Common Cause",
        "Data Subset Refuter",
        "Placebo Treatment",
    ];
    ensure!(header == expected, "header {header:?}");
    ensure!(
        STUDY_COLUMNS == expected,
        "column constant {STUDY_COLUMNS:?}"
    );
    let body = &lines[2..];
    ensure!(body.len() == 7, "{} rows", body.len());
    let rows = json["rows"].as_array().ok_or("rows missing")?;
    for (k, line) in body.iter().enumerate() {
        let cells: Vec<&str> = line.trim_matches('|').split('|').map(str::trim).collect();
        ensure!(cells.len() == 6, "row {k} has {} cells", cells.len());
        ensure!(cells[0] == FIRE_INPUTS[k], "row {k} is {}", cells[0]);
        let p = rows[k]["estimate"]["p_value"]
            .as_f64()
            .ok_or("p_value missing")?;
        let bold = cells[2].starts_with("**") && cells[2].ends_with("**");
        ensure!(bold == (p < 0.05), "row {} p {p} bold {bold}", cells[0]);
    }
    let empty = Dag::new(FIRE_INPUTS.iter().copied().chain(["FR"])).unwrap();
    let dom = build_config(DagConfigKind::DomainAugmented, "fc", Some(&empty))
        .map_err(|e| e.to_string())?;
    let mut expected_edges: BTreeSet<(String, String)> = DOMAIN_EDGES
        .iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect();
    expected_edges.extend(
        FIRE_INPUTS
            .iter()
            .map(|v| (v.to_string(), "FR".to_string())),
    );
    ensure!(
        dom.edge_set() == expected_edges,
        "domain edges {:?}",
        dom.edge_set()
    );
    ensure!(dom.n_edges() == 13, "{} domain edges", dom.n_edges());
    Ok("7-row study table with the six expected columns, 13 domain edges".into())
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    run_cli(d, &["synth", "--n", "144", "--out", "data"])?;
    let data = "data/synthetic.csv";
    let commands: Vec<Vec<&str>> = vec![
        vec!["synth", "--n", "144"],
        vec!["--data", data, "summarize"],
        vec!["--data", data, "discover"],
        vec![
            "--data",
            data,
            "study",
            "--kind",
            "isolated",
            "--replicates",
            "5",
        ],
        vec![
            "--data",
            data,
            "study",
            "--kind",
            "hypothetical",
            "--replicates",
            "5",
        ],
        vec![
            "--data",
            data,
            "study",
            "--kind",
            "learned",
            "--replicates",
            "5",
        ],
        vec![
            "--data",
            data,
            "study",
            "--kind",
            "domain",
            "--replicates",
            "5",
        ],
        vec!["--data", data, "compare", "--fix", "C,fc", "--trees", "20"],
    ];
    let mut files = 0;
    for (i, cmd) in commands.iter().enumerate() {
        let mut outputs = Vec::new();
        for run in ["a", "b"] {
            let out_dir = d.join(format!("cmd{i}_{run}"));
            let out_str = out_dir.to_string_lossy().into_owned();
            let mut args = cmd.clone();
            args.extend(["--out", out_str.as_str()]);
            let stdout = run_cli(d, &args)?;
            outputs.push((stdout, snapshot(&out_dir)));
        }
        ensure!(outputs[0].0 == outputs[1].0, "{cmd:?}: stdout differs");
        ensure!(!outputs[0].1.is_empty(), "{cmd:?}: no files written");
        ensure!(outputs[0].1 == outputs[1].1, "{cmd:?}: output files differ");
        files += outputs[0].1.len();
    }
    Ok(format!(
        "{} commands, {files} files byte-identical across reruns",
        commands.len()
    ))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("d-separation oracle equivalence", criterion_1),
        ("acyclicity penalty", criterion_2),
        ("structure recovery", criterion_3),
        ("ATE recovery", criterion_4),
        ("refuter contracts", criterion_5),
        ("OLS", criterion_6),
        ("intervention identities", criterion_7),
        ("pipeline schema fidelity", criterion_8),
        ("determinism", criterion_9),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match result {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {detail}", k + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
