use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use causalfire_core::baselines::{compare_methods, fit_forest, fit_ols, ForestConfig, Predictor};
use causalfire_core::dataset::{load_csv, summary_report, synthesize_fire_dataset, Schema};
use causalfire_core::discovery::learn_structure;
use causalfire_core::graph::parse_dot;
use causalfire_core::inference::{build_config_for, estimate_ate, run_study, CausalQuery};
use causalfire_core::{ConstraintSet, Dag, Error, RefuteConfig, Table};

use crate::args::{CompareArgs, DiscoverArgs, Format, GraphArgs, RunConfig, StudyArgs, SynthArgs};

/// Failure of a command, carrying its process exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(PathBuf, std::io::Error),
    Core(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io(..) => 2,
            CliError::Core(e) => core_exit_code(e),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Io(p, e) => write!(f, "{}: {e}", p.display()),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

fn core_exit_code(e: &Error) -> i32 {
    match e {
        Error::Io { .. } | Error::EmptyFile(_) => 2,
        Error::Csv(c) if c.is_io_error() => 2,
        Error::NonConvergence { .. } => 3,
        Error::InvalidArgument(_) => 1,
        _ => 4,
    }
}

type CmdResult = Result<(), CliError>;

fn load_schema(run: &RunConfig) -> Result<Schema, CliError> {
    if run.schema == "fire8" {
        return Ok(Schema::fire());
    }
    let path = PathBuf::from(&run.schema);
    let text = fs::read_to_string(&path).map_err(|e| CliError::Io(path, e))?;
    Ok(Schema::from_json(&text)?)
}

fn load_table(run: &RunConfig) -> Result<Table, CliError> {
    let data = run
        .data
        .as_ref()
        .ok_or_else(|| CliError::Usage("--data is required for this command".into()))?;
    let schema = load_schema(run)?;
    Ok(load_csv(data, &schema)?)
}

/// Write `contents` to `dir/name` through a temporary file and a rename.
fn write_atomic(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(dir.to_path_buf(), e))?;
    let path = dir.join(name);
    let mut tmp =
        tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::Io(dir.to_path_buf(), e))?;
    tmp.write_all(contents.as_bytes())
        .and_then(|_| tmp.as_file().sync_all())
        .map_err(|e| CliError::Io(path.clone(), e))?;
    tmp.persist(&path)
        .map_err(|e| CliError::Io(path.clone(), e.error))?;
    eprintln!("wrote {}", path.display());
    Ok(path)
}

/// Write the requested report formats under `stem`, print markdown to stdout.
fn emit_report(run: &RunConfig, stem: &str, markdown: &str, json: &str) -> CmdResult {
    if run.format.contains(&Format::Markdown) {
        write_atomic(&run.out, &format!("{stem}.md"), markdown)?;
    }
    if run.format.contains(&Format::Json) {
        write_atomic(&run.out, &format!("{stem}.json"), &format!("{json}\n"))?;
    }
    print!("{markdown}");
    Ok(())
}

pub fn summarize(run: &RunConfig) -> CmdResult {
    let table = load_table(run)?;
    let report = summary_report(&table)?;
    emit_report(run, "summary", &report.to_markdown(), &report.to_json())
}

pub fn discover(run: &RunConfig, args: &DiscoverArgs) -> CmdResult {
    let table = load_table(run)?;
    let constraints = match &args.constraints {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::Io(p.clone(), e))?;
            ConstraintSet::from_json_str(&text)?
        }
        None => ConstraintSet::default(),
    };
    let dag = learn_structure(&table, &constraints, &args.learn.config())?;
    let dot = dag.to_dot();
    write_atomic(&run.out, "dag.dot", &dot)?;
    write_atomic(&run.out, "dag.json", &format!("{}\n", dag.to_json_string()))?;
    print!("{dot}");
    Ok(())
}

fn read_graph(path: &Path) -> Result<Dag, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
    let dag = if path.extension().is_some_and(|e| e == "dot" || e == "gv") {
        parse_dot(&text)?
    } else {
        Dag::from_json_str(&text)?
    };
    Ok(dag)
}

/// The learned graph a configuration needs, read from `--graph` or learned
/// from `table`.
fn learned_graph(table: &Table, args: &GraphArgs) -> Result<Option<Dag>, CliError> {
    if !args.kind.needs_learned_graph() {
        return Ok(None);
    }
    let dag = match &args.graph {
        Some(p) => read_graph(p)?,
        None => learn_structure(table, &ConstraintSet::default(), &args.learn.config())?,
    };
    Ok(Some(dag))
}

pub fn study(run: &RunConfig, args: &StudyArgs) -> CmdResult {
    let table = load_table(run)?;
    let learned = learned_graph(&table, &args.graph)?;
    let refute = RefuteConfig {
        replicates: args.replicates,
        subset_fraction: args.subset_fraction,
        seed: run.seed,
    };
    let report = run_study(&table, args.graph.kind, learned.as_ref(), &refute)?;
    if report.succeeded() == 0 {
        let first = report.rows.iter().find_map(|r| r.error.clone());
        return Err(CliError::Core(Error::InvalidQuery(format!(
            "no variable could be estimated: {}",
            first.unwrap_or_default()
        ))));
    }
    let stem = format!("study_{}", args.graph.kind);
    emit_report(run, &stem, &report.to_markdown(), &report.to_json())
}

pub fn compare(run: &RunConfig, args: &CompareArgs) -> CmdResult {
    let table = load_table(run)?;
    let outcome = table
        .schema()
        .outcome()
        .ok_or_else(|| Error::Schema("table has no outcome column".into()))?
        .to_string();
    let inputs: Vec<String> = table.schema().inputs().map(str::to_string).collect();
    let variables: Vec<String> = if args.fix.iter().any(|v| v == "all") {
        inputs.clone()
    } else {
        args.fix.clone()
    };

    let ols = fit_ols(&table, &outcome)?;
    let forest_config = ForestConfig {
        n_trees: args.trees,
        max_depth: args.depth,
        seed: run.seed,
        ..ForestConfig::default()
    };
    let forest = fit_forest(&table, &outcome, &forest_config)?;

    let learned = learned_graph(&table, &args.graph)?;
    let mut causal = Vec::new();
    for v in &variables {
        if !inputs.contains(v) {
            continue;
        }
        let dag = build_config_for(args.graph.kind, &inputs, &outcome, v, learned.as_ref())?;
        let query = CausalQuery::at_mean(&table, dag, v, &outcome)?;
        causal.push(estimate_ate(&table, &query)?);
    }

    let models: [&dyn Predictor; 2] = [&ols, &forest];
    let report = compare_methods(&table, &models, &[], &causal, &variables)?;
    write_atomic(&run.out, "compare_plot.csv", &report.plot_csv())?;
    emit_report(run, "compare", &report.to_markdown(), &report.to_json())
}

pub fn synth(run: &RunConfig, args: &SynthArgs) -> CmdResult {
    if run.schema != "fire8" {
        return Err(CliError::Usage(
            "synth only generates the built-in fire8 schema".into(),
        ));
    }
    let table = synthesize_fire_dataset(args.n, run.seed)?;
    let name = "synthetic.csv";
    write_atomic(&run.out, name, &table.to_csv_string())?;
    print!("{}", summary_report(&table)?.to_markdown());
    Ok(())
}
