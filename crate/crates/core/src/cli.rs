//! Command-line interface of the `seqvimp` binary.
//!
//! Settings are resolved with the precedence flag > `--config` TOML file >
//! built-in default. Every run that writes files also writes a
//! `manifest.json` holding the resolved settings, so any output can be
//! regenerated from the manifest alone. No timestamps or host details are
//! recorded, which keeps repeated runs byte-identical.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forest::{Dataset, ForestConfig, Loss, Schema};
use crate::monitor::{
    average_expected_permutations, boundary_table, characteristic_table, effective_alpha,
    power_function, write_boundary_csv, write_characteristic_csv, Method, SequentialSpec,
    SpecParams,
};
use crate::report::{sig6, write_json};
use crate::seed::stream;
use crate::simbench::{
    gen_study1, gen_study2, run_experiment, write_summaries_csv, Experiment, ExperimentSummary,
    StudyISpec, STUDY1_K_GRID, STUDY1_VARIABLES, STUDY2_VARIABLES,
};
use crate::vimp_tests::{test_all_variables, write_reports_csv, TestKind};

/// Environment variable holding the number of worker threads.
pub const THREADS_ENV: &str = "SEQVIMP_THREADS";

#[derive(Debug, Parser)]
#[command(name = "seqvimp", version, about = "Sequential permutation tests of random forest variable importance")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test every predictor of a CSV dataset.
    Test(TestArgs),
    /// Run the simulation studies.
    Simulate(SimulateArgs),
    /// Tabulate the power function and expected cost of SPRT/SAPT.
    Characterize(CharacterizeArgs),
    /// Tabulate the SPRT/SAPT decision boundaries.
    Boundaries(BoundariesArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct SpecArgs {
    /// Stopping regime: sprt, sapt, pval, certain or complete.
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long)]
    pub p0: Option<f64>,
    #[arg(long)]
    pub p1: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Lower likelihood-ratio threshold of SAPT (B = 1/A).
    #[arg(long = "A")]
    pub a: Option<f64>,
    /// Maximum number of permutations.
    #[arg(long = "M")]
    pub m: Option<usize>,
    /// Exceedances after which the sequential p-value stops.
    #[arg(long)]
    pub h: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ForestArgs {
    /// Permutation test: general or two-sample.
    #[arg(long)]
    pub test: Option<String>,
    #[arg(long)]
    pub ntree: Option<usize>,
    #[arg(long)]
    pub mtry: Option<usize>,
    #[arg(long)]
    pub nperm: Option<usize>,
    #[arg(long)]
    pub min_node_size: Option<usize>,
    /// squared_error, brier or misclassification.
    #[arg(long)]
    pub loss: Option<String>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct OutputArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory (file for `boundaries`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write only this report format: json or csv.
    #[arg(long)]
    pub format: Option<String>,
    /// TOML file with defaults for any of the flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct TestArgs {
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub target: Option<String>,
    /// File of `name:type` lines overriding inferred column types.
    #[arg(long)]
    pub schema: Option<PathBuf>,
    #[command(flatten)]
    pub spec: SpecArgs,
    #[command(flatten)]
    pub forest: ForestArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// study1 (logistic) or study2 (Friedman 1).
    #[arg(long)]
    pub study: Option<String>,
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Comma-separated effect sizes for study1.
    #[arg(long, value_delimiter = ',')]
    pub k: Option<Vec<f64>>,
    /// Sample size per replicate.
    #[arg(long)]
    pub n: Option<usize>,
    /// Comma-separated one-based predictor numbers to test.
    #[arg(long, value_delimiter = ',')]
    pub variables: Option<Vec<usize>>,
    /// Use 1000 replicates and 500 trees unless set explicitly.
    #[arg(long)]
    pub full_scale: bool,
    #[command(flatten)]
    pub spec: SpecArgs,
    #[command(flatten)]
    pub forest: ForestArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CharacterizeArgs {
    /// Interior grid points in (0, 1).
    #[arg(long, default_value_t = 99)]
    pub points: usize,
    #[command(flatten)]
    pub spec: SpecArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BoundariesArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Contents of a `--config` file. Keys mirror the flag names.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub data: Option<PathBuf>,
    pub target: Option<String>,
    pub schema: Option<PathBuf>,
    pub method: Option<String>,
    pub test: Option<String>,
    pub p0: Option<f64>,
    pub p1: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    #[serde(rename = "A")]
    pub a: Option<f64>,
    #[serde(rename = "M")]
    pub m: Option<usize>,
    pub h: Option<usize>,
    pub ntree: Option<usize>,
    pub mtry: Option<usize>,
    pub nperm: Option<usize>,
    pub min_node_size: Option<usize>,
    pub loss: Option<String>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
    pub study: Option<String>,
    pub replicates: Option<usize>,
    pub k: Option<Vec<f64>>,
    pub n: Option<usize>,
    pub variables: Option<Vec<usize>>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

/// Which report files to write.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Both,
    Json,
    Csv,
}

impl Format {
    fn parse(s: Option<&str>) -> Result<Self> {
        match s.map(str::to_ascii_lowercase).as_deref() {
            None => Ok(Format::Both),
            Some("json") => Ok(Format::Json),
            Some("csv") => Ok(Format::Csv),
            Some(other) => Err(Error::Config(format!("unknown format '{other}'"))),
        }
    }

    fn json(self) -> bool {
        self != Format::Csv
    }

    fn csv(self) -> bool {
        self != Format::Json
    }
}

fn resolve_params(spec: &SpecArgs, file: &FileConfig) -> SpecParams {
    let d = SpecParams::default();
    SpecParams {
        p0: spec.p0.or(file.p0).unwrap_or(d.p0),
        p1: spec.p1.or(file.p1).unwrap_or(d.p1),
        alpha: spec.alpha.or(file.alpha).unwrap_or(d.alpha),
        beta: spec.beta.or(file.beta).unwrap_or(d.beta),
        sapt_a: spec.a.or(file.a).unwrap_or(d.sapt_a),
        max_perms: spec.m.or(file.m).unwrap_or(d.max_perms),
        h: spec.h.or(file.h).unwrap_or(d.h),
    }
}

fn resolve_method(spec: &SpecArgs, file: &FileConfig) -> Result<Option<Method>> {
    spec.method
        .clone()
        .or_else(|| file.method.clone())
        .map(|m| m.parse())
        .transpose()
}

fn resolve_test(forest: &ForestArgs, file: &FileConfig) -> Result<TestKind> {
    forest
        .test
        .clone()
        .or_else(|| file.test.clone())
        .map_or(Ok(TestKind::General), |t| t.parse())
}

fn resolve_forest(
    forest: &ForestArgs,
    file: &FileConfig,
    default_ntree: usize,
    seed: u64,
) -> Result<ForestConfig> {
    let loss = forest
        .loss
        .clone()
        .or_else(|| file.loss.clone())
        .map(|l| l.parse::<Loss>())
        .transpose()?;
    Ok(ForestConfig {
        ntree: forest.ntree.or(file.ntree).unwrap_or(default_ntree),
        mtry: forest.mtry.or(file.mtry),
        nperm: forest.nperm.or(file.nperm).unwrap_or(1),
        min_node_size: forest.min_node_size.or(file.min_node_size),
        loss,
        seed,
    })
}

#[derive(Debug, Serialize)]
struct Manifest<'a, T: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    settings: &'a T,
    outputs: Vec<String>,
}

fn write_manifest<T: Serialize>(dir: &Path, command: &'static str, settings: &T, outputs: &[&str]) -> Result<()> {
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command,
        settings,
        outputs: outputs.iter().map(|s| s.to_string()).collect(),
    };
    write_json(&dir.join("manifest.json"), &manifest)
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Config(format!("cannot create {}: {e}", dir.display())))
}

/// Parse arguments and run; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return e.exit_code();
    }
    let stdout = io::stdout();
    match run(cli.command, &mut stdout.lock()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{THREADS_ENV} must be a positive integer, got '{value}'")))?;
    if threads == 0 {
        return Err(Error::Config(format!("{THREADS_ENV} must be at least 1")));
    }
    // A second initialisation (for example in tests) keeps the first pool.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

pub fn run(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Test(args) => cmd_test(&args, out),
        Command::Simulate(args) => cmd_simulate(&args, out),
        Command::Characterize(args) => cmd_characterize(&args, out),
        Command::Boundaries(args) => cmd_boundaries(&args, out),
    }
}

#[derive(Debug, Serialize)]
struct TestSettings {
    data: PathBuf,
    target: String,
    schema: Option<PathBuf>,
    test: TestKind,
    spec: SequentialSpec,
    forest: ForestConfig,
    seed: u64,
    rows_used: usize,
    rows_dropped: usize,
}

pub fn cmd_test(args: &TestArgs, out: &mut dyn Write) -> Result<()> {
    let file = FileConfig::load(args.output.config.as_deref())?;
    let data_path = args
        .data
        .clone()
        .or_else(|| file.data.clone())
        .ok_or_else(|| Error::Config("--data is required".into()))?;
    let target = args
        .target
        .clone()
        .or_else(|| file.target.clone())
        .ok_or_else(|| Error::Config("--target is required".into()))?;
    let schema_path = args.schema.clone().or_else(|| file.schema.clone());
    let schema = schema_path.as_deref().map(Schema::from_path).transpose()?;
    let method = resolve_method(&args.spec, &file)?.unwrap_or(Method::Sapt);
    let spec = SequentialSpec::new(method, &resolve_params(&args.spec, &file))?;
    let test = resolve_test(&args.forest, &file)?;
    let seed = args.output.seed.or(file.seed).unwrap_or(0);
    let forest = resolve_forest(&args.forest, &file, 500, seed)?;
    let format = Format::parse(args.output.format.as_deref().or(file.format.as_deref()))?;
    let out_dir = args.output.out.clone().or_else(|| file.out.clone());

    let (data, ingest) = Dataset::from_csv_path(&data_path, &target, schema.as_ref())?;
    forest.validate(&data)?;
    log::info!(
        "read {} rows ({} dropped), {} predictors",
        ingest.rows_read,
        ingest.rows_dropped,
        data.n_predictors()
    );

    let result = test_all_variables(&data, &forest, &spec, test, &mut stream(seed, &[]))?;

    writeln!(out, "{:<24} {:>12} {:>10} {:>10} {:>6}", "variable", "VIMP", "decision", "p_value", "m")?;
    for r in &result.reports {
        writeln!(
            out,
            "{:<24} {:>12} {:>10} {:>10} {:>6}",
            r.name,
            sig6(r.u),
            r.decision.label(),
            r.p_value.map(sig6).unwrap_or_else(|| "-".into()),
            r.permutations_used
        )?;
    }
    for f in &result.failures {
        writeln!(out, "{:<24} failed: {}", f.name, f.error)?;
    }
    writeln!(
        out,
        "total permutations: {} of at most {}",
        result.total_permutations, result.max_permutations
    )?;

    if let Some(dir) = out_dir {
        create_dir(&dir)?;
        let mut outputs = Vec::new();
        if format.json() {
            write_json(&dir.join("report.json"), &result)?;
            outputs.push("report.json");
        }
        if format.csv() {
            write_reports_csv(fs::File::create(dir.join("report.csv"))?, &result.reports)?;
            outputs.push("report.csv");
        }
        let settings = TestSettings {
            data: data_path,
            target,
            schema: schema_path,
            test,
            spec,
            forest,
            seed,
            rows_used: data.n_rows(),
            rows_dropped: ingest.rows_dropped,
        };
        write_manifest(&dir, "test", &settings, &outputs)?;
    }
    if !result.failures.is_empty() && result.reports.is_empty() {
        return Err(Error::Fit(format!("all {} variables failed", result.failures.len())));
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct SimulateSettings {
    study: String,
    replicates: usize,
    n: usize,
    k: Vec<f64>,
    variables: Vec<usize>,
    test: TestKind,
    specs: Vec<SequentialSpec>,
    forest: ForestConfig,
    seed: u64,
    /// Seed of the experiment for each entry of `k` (study1) or the single
    /// experiment (study2).
    experiment_seeds: Vec<u64>,
}

pub fn cmd_simulate(args: &SimulateArgs, out: &mut dyn Write) -> Result<()> {
    let file = FileConfig::load(args.output.config.as_deref())?;
    let study = args
        .study
        .clone()
        .or_else(|| file.study.clone())
        .unwrap_or_else(|| "study1".into())
        .to_ascii_lowercase();
    let (default_vars, n_predictors) = match study.as_str() {
        "study1" => (STUDY1_VARIABLES.to_vec(), 6),
        "study2" => (STUDY2_VARIABLES.to_vec(), 10),
        other => return Err(Error::Config(format!("unknown study '{other}'; use study1 or study2"))),
    };
    let (default_reps, default_ntree) = if args.full_scale { (1000, 500) } else { (200, 100) };
    let replicates = args.replicates.or(file.replicates).unwrap_or(default_reps);
    let n = args.n.or(file.n).unwrap_or(100);
    let seed = args.output.seed.or(file.seed).unwrap_or(0);
    let forest = resolve_forest(&args.forest, &file, default_ntree, seed)?;
    let test = resolve_test(&args.forest, &file)?;
    let params = resolve_params(&args.spec, &file);
    let specs = match resolve_method(&args.spec, &file)? {
        Some(m) => vec![SequentialSpec::new(m, &params)?],
        None => Method::ALL
            .iter()
            .map(|&m| SequentialSpec::new(m, &params))
            .collect::<Result<_>>()?,
    };
    let variables: Vec<usize> = match args.variables.clone().or_else(|| file.variables.clone()) {
        Some(vs) => vs
            .into_iter()
            .map(|v| {
                if (1..=n_predictors).contains(&v) {
                    Ok(v - 1)
                } else {
                    Err(Error::Config(format!("variable {v} outside 1..={n_predictors}")))
                }
            })
            .collect::<Result<_>>()?,
        None => default_vars,
    };
    let ks = if study == "study1" {
        args.k.clone().or_else(|| file.k.clone()).unwrap_or_else(|| STUDY1_K_GRID.to_vec())
    } else {
        Vec::new()
    };
    let format = Format::parse(args.output.format.as_deref().or(file.format.as_deref()))?;
    let out_dir = args.output.out.clone().or_else(|| file.out.clone());

    let mut summaries: Vec<ExperimentSummary> = Vec::new();
    let mut experiment_seeds = Vec::new();
    let cells: Vec<Option<f64>> = if ks.is_empty() { vec![None] } else { ks.iter().map(|&k| Some(k)).collect() };
    for (i, k) in cells.into_iter().enumerate() {
        let exp_seed = crate::seed::derive_seed(seed, &[i as u64]);
        experiment_seeds.push(exp_seed);
        let exp = Experiment {
            study: study.clone(),
            k,
            replicates,
            forest: forest.clone(),
            specs: specs.clone(),
            test,
            variables: variables.clone(),
            seed: exp_seed,
        };
        let result = match k {
            Some(k) => run_experiment(|rng| gen_study1(&StudyISpec { k, n }, rng), &exp)?,
            None => run_experiment(|rng| gen_study2(n, rng), &exp)?,
        };
        if !result.failed.is_empty() {
            log::warn!("{} replicates failed and were excluded", result.failed.len());
        }
        summaries.extend(result.summaries);
    }

    writeln!(
        out,
        "{:<7} {:>6} {:<9} {:<9} {:>10} {:>10}",
        "study", "k", "variable", "method", "rejection", "mean_m"
    )?;
    for s in &summaries {
        writeln!(
            out,
            "{:<7} {:>6} {:<9} {:<9} {:>10} {:>10}",
            s.study,
            s.k.map(|k| k.to_string()).unwrap_or_else(|| "-".into()),
            s.variable,
            s.method,
            sig6(s.rejection_frequency),
            sig6(s.mean_permutations)
        )?;
    }

    if let Some(dir) = out_dir {
        create_dir(&dir)?;
        let mut outputs = Vec::new();
        if format.json() {
            write_json(&dir.join("summary.json"), &summaries)?;
            outputs.push("summary.json");
        }
        if format.csv() {
            write_summaries_csv(fs::File::create(dir.join("summary.csv"))?, &summaries)?;
            outputs.push("summary.csv");
        }
        let settings = SimulateSettings {
            study,
            replicates,
            n,
            k: ks,
            variables: variables.iter().map(|v| v + 1).collect(),
            test,
            specs,
            forest,
            seed,
            experiment_seeds,
        };
        write_manifest(&dir, "simulate", &settings, &outputs)?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct CharacterizeSummary {
    spec: SequentialSpec,
    effective_alpha: f64,
    average_expected_permutations: f64,
    power_at_p0: f64,
    power_at_p1: f64,
}

fn wald_spec(spec_args: &SpecArgs, file: &FileConfig) -> Result<SequentialSpec> {
    let method = resolve_method(spec_args, file)?.unwrap_or(Method::Sapt);
    if !method.is_wald() {
        return Err(Error::Config(format!("{method} has no linear boundaries; use sprt or sapt")));
    }
    SequentialSpec::new(method, &resolve_params(spec_args, file))
}

pub fn cmd_characterize(args: &CharacterizeArgs, out: &mut dyn Write) -> Result<()> {
    let file = FileConfig::load(args.output.config.as_deref())?;
    let spec = wald_spec(&args.spec, &file)?;
    let format = Format::parse(args.output.format.as_deref().or(file.format.as_deref()))?;
    let summary = CharacterizeSummary {
        spec,
        effective_alpha: effective_alpha(&spec)?,
        average_expected_permutations: average_expected_permutations(&spec)?,
        power_at_p0: power_function(spec.p0(), &spec)?,
        power_at_p1: power_function(spec.p1(), &spec)?,
    };
    writeln!(out, "method                        {}", spec.method())?;
    writeln!(out, "effective_alpha               {}", sig6(summary.effective_alpha))?;
    writeln!(out, "average_expected_permutations {}", sig6(summary.average_expected_permutations))?;
    writeln!(out, "L_p0                          {}", sig6(summary.power_at_p0))?;
    writeln!(out, "L_p1                          {}", sig6(summary.power_at_p1))?;

    if let Some(dir) = args.output.out.clone().or_else(|| file.out.clone()) {
        create_dir(&dir)?;
        let table = characteristic_table(&spec, args.points)?;
        let bounds = boundary_table(&spec, spec.max_perms())?;
        let mut outputs = Vec::new();
        if format.csv() {
            write_characteristic_csv(fs::File::create(dir.join("characteristic.csv"))?, &table)?;
            write_boundary_csv(fs::File::create(dir.join("boundaries.csv"))?, &bounds)?;
            outputs.extend(["characteristic.csv", "boundaries.csv"]);
        }
        if format.json() {
            write_json(&dir.join("characteristic.json"), &summary)?;
            outputs.push("characteristic.json");
        }
        #[derive(Serialize)]
        struct Settings {
            spec: SequentialSpec,
            points: usize,
        }
        write_manifest(
            &dir,
            "characterize",
            &Settings {
                spec,
                points: args.points,
            },
            &outputs,
        )?;
    }
    Ok(())
}

pub fn cmd_boundaries(args: &BoundariesArgs, out: &mut dyn Write) -> Result<()> {
    let file = FileConfig::load(args.output.config.as_deref())?;
    let spec = wald_spec(&args.spec, &file)?;
    let rows = boundary_table(&spec, spec.max_perms())?;
    match args.output.out.clone().or_else(|| file.out.clone()) {
        Some(path) => write_boundary_csv(fs::File::create(path)?, &rows),
        None => write_boundary_csv(out, &rows),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Command {
        Cli::try_parse_from(std::iter::once("seqvimp").chain(args.iter().copied()))
            .unwrap()
            .command
    }

    #[test]
    fn uppercase_flags_parse() {
        match parse(&["boundaries", "--method", "sapt", "--A", "0.2", "--M", "50"]) {
            Command::Boundaries(b) => {
                assert_eq!(b.spec.a, Some(0.2));
                assert_eq!(b.spec.m, Some(50));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_flags_are_rejected() {
        assert!(Cli::try_parse_from(["seqvimp", "test", "--bogus", "1"]).is_err());
    }

    #[test]
    fn boundaries_to_stdout() {
        let mut buf = Vec::new();
        run(parse(&["boundaries", "--method", "sapt"]), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "m,lower_H1,upper_H0");
        assert_eq!(lines.len(), 501);
    }

    #[test]
    fn characterize_rejects_pval() {
        let err = run(parse(&["characterize", "--method", "pval"]), &mut Vec::new()).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.toml");
        fs::write(&cfg, "method = \"sprt\"\nalpha = 0.1\nM = 40\n").unwrap();
        let file = FileConfig::load(Some(&cfg)).unwrap();
        let args = SpecArgs {
            m: Some(60),
            ..SpecArgs::default()
        };
        let params = resolve_params(&args, &file);
        assert_eq!(params.max_perms, 60);
        assert_eq!(params.alpha, 0.1);
        assert_eq!(params.p0, 0.06);
        assert_eq!(resolve_method(&args, &file).unwrap(), Some(Method::Sprt));
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.toml");
        fs::write(&cfg, "colour = 3\n").unwrap();
        assert!(matches!(FileConfig::load(Some(&cfg)), Err(Error::Config(_))));
    }
}
