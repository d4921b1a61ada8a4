//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 bad input, 3 internal error.

use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::cmscan::{build_cm, BuildConfig, CovarianceModel, GapPenalties, ScanConfig};
use crate::error::{Error, Result};
use crate::forest::{load_dataset, oob_accuracy, train_forest, CoaxLabel, ForestConfig, RandomForest};
use crate::pipeline::{
    classify_structure, coax_status, emit_machine_output, format_status, format_text_report, run_scan_pipeline,
    HitAnalysis, OutputFormat, PipelineConfig,
};
use crate::seqio::parse_fasta;
use crate::structio::{parse_ct, parse_stockholm};
use crate::thermo::{parse_thermo_params, ThermoParams};

pub const NO_JUNCTIONS: &str = "no 3-way junctions found";

#[derive(Debug, Parser)]
#[command(
    name = "csminer",
    version,
    about = "Scan genomes for RNA three-way junctions and predict coaxial stacking"
)]
pub struct Cli {
    /// More log output (repeat for debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a covariance model from a Stockholm alignment.
    Build(BuildArgs),
    /// Scan a genome and report hits containing multibranch loops.
    Scan(ScanArgs),
    /// Predict coaxial stacking for every three-way junction of a CT file.
    Classify(ClassifyArgs),
    /// Print the feature table of every three-way junction of a CT file.
    Features(FeaturesArgs),
    /// Train a random forest from a junction table.
    Train(TrainArgs),
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[arg(long)]
    pub msa: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = BuildConfig::default().pseudocount)]
    pub pseudocount: f64,
    /// Node deletion cost, bits.
    #[arg(long, default_value_t = GapPenalties::default().delete)]
    pub delete: f64,
    #[arg(long, default_value_t = GapPenalties::default().insert_open)]
    pub insert_open: f64,
    #[arg(long, default_value_t = GapPenalties::default().insert_extend)]
    pub insert_extend: f64,
    /// Model name; defaults to the alignment's first ID line.
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub genome: PathBuf,
    #[arg(long)]
    pub forest: PathBuf,
    #[arg(long, default_value_t = 20.0)]
    pub threshold: f64,
    #[arg(long, default_value_t = 1.2)]
    pub window_factor: f64,
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// text, tsv or json.
    #[arg(long, default_value = "text")]
    pub format: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Directory for one CT file per reported hit.
    #[arg(long)]
    pub ct_dir: Option<PathBuf>,
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub ct: PathBuf,
    #[arg(long)]
    pub forest: PathBuf,
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FeaturesArgs {
    #[arg(long)]
    pub ct: PathBuf,
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub trees: usize,
    #[arg(long, default_value_t = 4)]
    pub mtry: usize,
    #[arg(long, default_value_t = 1)]
    pub min_leaf: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub params: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::io(p, e)),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes())
                .and_then(|_| so.flush())
                .map_err(|e| Error::io("<stdout>", e))
        }
    }
}

fn load_params(path: Option<&Path>) -> Result<ThermoParams> {
    match path {
        Some(p) => parse_thermo_params(&read(p)?),
        None => Ok(ThermoParams::default()),
    }
}

fn build(a: &BuildArgs) -> Result<()> {
    let aln = parse_stockholm(&read(&a.msa)?)?;
    let cfg = BuildConfig {
        pseudocount: a.pseudocount,
        penalties: GapPenalties {
            delete: a.delete,
            insert_open: a.insert_open,
            insert_extend: a.insert_extend,
        },
    };
    let mut cm = build_cm(&aln, &cfg)?;
    if let Some(n) = &a.name {
        cm.name = n.clone();
    }
    log::info!(
        "model {}: {} consensus columns, {} nodes",
        cm.name,
        cm.consensus_length,
        cm.nodes.len()
    );
    write_out(Some(&a.out), &cm.to_json()?)
}

fn scan(a: &ScanArgs) -> Result<()> {
    let format: OutputFormat = a.format.parse()?;
    let model = CovarianceModel::from_json(&read(&a.model)?)?;
    let forest = RandomForest::from_json(&read(&a.forest)?)?;
    let genomes = parse_fasta(&read(&a.genome)?)?;
    let config = PipelineConfig {
        scan: ScanConfig {
            threshold: a.threshold,
            window_factor: a.window_factor,
        },
        params: load_params(a.params.as_deref())?,
    };
    if config.scan.window_factor.is_nan() || config.scan.window_factor < 1.0 {
        return Err(Error::invalid("--window-factor must be at least 1"));
    }
    let run = || -> Result<Vec<(String, Vec<HitAnalysis>)>> {
        genomes
            .iter()
            .map(|g| Ok((g.id.clone(), run_scan_pipeline(&model, g, &forest, &config)?)))
            .collect()
    };
    let per_target = match a.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Internal(format!("thread pool: {e}")))?
            .install(run)?,
        None => run()?,
    };
    let text = match format {
        OutputFormat::Text => {
            if let Some(dir) = &a.ct_dir {
                let all: Vec<HitAnalysis> = per_target.iter().flat_map(|(_, v)| v.clone()).collect();
                crate::pipeline::write_ct_dir(&all, dir)?;
            }
            per_target
                .iter()
                .map(|(id, v)| format_text_report(v, &model, id))
                .collect::<Vec<_>>()
                .join("\n")
        }
        _ => {
            let all: Vec<HitAnalysis> = per_target.into_iter().flat_map(|(_, v)| v).collect();
            emit_machine_output(&all, format, a.ct_dir.as_deref())?
        }
    };
    write_out(a.out.as_deref(), &text)
}

fn classify(a: &ClassifyArgs) -> Result<()> {
    let ct = parse_ct(&read(&a.ct)?)?;
    let forest = RandomForest::from_json(&read(&a.forest)?)?;
    let params = load_params(a.params.as_deref())?;
    let (calls, higher) = classify_structure(&ct, &forest, &params);
    if calls.is_empty() && higher.is_empty() {
        return write_out(a.out.as_deref(), &format!("{NO_JUNCTIONS}\n"));
    }
    let mut text = String::new();
    for (k, c) in calls.iter().enumerate() {
        let [a1, b1, a2, b2, a3, b3] = c.junction.coords();
        let votes: Vec<String> = CoaxLabel::ALL
            .iter()
            .zip(c.votes)
            .map(|(l, v)| format!("{}:{v}", l.as_str()))
            .collect();
        text.push_str(&format!(
            "junction {}\tS1={a1}-{b1}\tS2={a2}-{b2}\tS3={a3}-{b3}\tfamily={}\tlabel={}\tvotes={}\n",
            k + 1,
            c.junction.family,
            c.label,
            votes.join(",")
        ));
    }
    for (i, j) in &higher {
        text.push_str(&format!("higher-order loop closed by {i}-{j}\n"));
    }
    text.push_str(&format!(
        "Coax status = {}\n",
        format_status(&coax_status(&calls), !higher.is_empty())
    ));
    write_out(a.out.as_deref(), &text)
}

fn features(a: &FeaturesArgs) -> Result<()> {
    let ct = parse_ct(&read(&a.ct)?)?;
    let params = load_params(a.params.as_deref())?;
    let scan = crate::junction::junctions_in_ct(&ct);
    if scan.junctions.is_empty() {
        return write_out(a.out.as_deref(), &format!("{NO_JUNCTIONS}\n"));
    }
    let several = scan.junctions.len() > 1;
    let mut text = String::new();
    for (k, j) in scan.junctions.iter().enumerate() {
        if several {
            let [a1, b1, a2, b2, a3, b3] = j.coords();
            text.push_str(&format!(
                "# junction {}: S1={a1}-{b1} S2={a2}-{b2} S3={a3}-{b3}\n",
                k + 1
            ));
        }
        text.push_str(&crate::features::extract_features(j, &params).to_table());
    }
    write_out(a.out.as_deref(), &text)
}

fn train(a: &TrainArgs) -> Result<()> {
    let params = load_params(a.params.as_deref())?;
    let samples = load_dataset(&read(&a.data)?, &params)?;
    let cfg = ForestConfig {
        n_trees: a.trees,
        m_try: a.mtry,
        min_leaf: a.min_leaf,
        seed: a.seed,
    };
    let forest = train_forest(&samples, &cfg)?;
    match oob_accuracy(&forest, &samples) {
        Ok(acc) => log::info!("{} samples, out-of-bag accuracy {acc:.3}", samples.len()),
        Err(e) => log::warn!("no out-of-bag estimate: {e}"),
    }
    write_out(Some(&a.out), &forest.to_json()?)
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Internal(_) => 3,
        _ => 2,
    }
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// process exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    let res = match &cli.command {
        Command::Build(a) => build(a),
        Command::Scan(a) => scan(a),
        Command::Classify(a) => classify(a),
        Command::Features(a) => features(a),
        Command::Train(a) => train(a),
    };
    match res {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("csminer: {e}");
            exit_code(&e)
        }
    }
}
