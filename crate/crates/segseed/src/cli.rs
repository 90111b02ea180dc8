//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error (unreadable or
//! inconsistent inputs), 3 algorithm error (empty pool, rejected seed, ...).

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::info;

use segseed_core::ga::{evolve_with, Evolution, GenerationStats};
use segseed_core::grow::segment_triple;
use segseed_core::seeding::{histogram_peak_seeds, pool_from_thresholds, random_seeds};
use segseed_core::{
    generate, rms_error, Class, EvalReport, GrowthSettings, Image2D, LabelMap, Point,
};

use crate::config::{format_seeds, RunConfig, Strategy};
use crate::parallel::Parallel;
use crate::pgm::{self, PgmError};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Algorithm(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Algorithm(_) => 3,
        }
    }
}

impl From<PgmError> for CliError {
    fn from(e: PgmError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<segseed_core::Error> for CliError {
    fn from(e: segseed_core::Error) -> Self {
        use segseed_core::Error as E;
        let msg = e.to_string();
        match e {
            E::EmptyImage { .. }
            | E::BufferLength { .. }
            | E::InvalidClass(_)
            | E::DimensionMismatch { .. } => CliError::Data(msg),
            E::SeedOutOfBounds { .. }
            | E::DuplicateSeed { .. }
            | E::InvalidBand { .. }
            | E::OverlappingBands { .. }
            | E::InvalidConfig(_)
            | E::PhantomTooSmall { .. }
            | E::NotSeparable => CliError::Usage(msg),
            E::SeedRejected { .. }
            | E::EmptyPool(_)
            | E::InsufficientPeaks { .. }
            | E::BlobPlacement => CliError::Algorithm(msg),
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "segseed",
    version,
    about = "Seeded region growing with genetic seed selection"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Grow a label map from seeds (manual, random, histogram or ga).
    Segment(Flags),
    /// Search seeds with the genetic algorithm against a reference label map.
    Optimize(Flags),
    /// Score a label map (--input) against a reference.
    Evaluate(Flags),
    /// Manual seeds versus genetic search on the same image.
    Compare(Flags),
    /// Write a synthetic image, its labels and a provenance record.
    PhantomGen(Flags),
}

#[derive(Args, Debug, Default, Clone)]
pub struct Flags {
    /// key=value file with any run parameter (e.g. an earlier config echo)
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub input: Option<String>,
    #[arg(long)]
    pub reference: Option<String>,
    #[arg(long)]
    pub output_dir: Option<String>,
    /// "csf:x,y;gm:x,y;wm:x,y"
    #[arg(long)]
    pub seeds: Option<String>,
    #[arg(long, value_parser = ["manual", "random", "histogram", "ga"])]
    pub strategy: Option<String>,
    #[arg(long)]
    pub k: Option<String>,
    #[arg(long)]
    pub sigma_floor: Option<String>,
    #[arg(long, value_parser = ["exact", "paper-literal"])]
    pub stats_mode: Option<String>,
    #[arg(long, value_parser = ["4", "diag4", "8"])]
    pub neighborhood: Option<String>,
    /// Growth order of the tissue regions, e.g. "gm,wm,csf"
    #[arg(long)]
    pub class_order: Option<String>,
    /// Six band bounds: csf_lo,csf_hi,gm_lo,gm_hi,wm_lo,wm_hi
    #[arg(long)]
    pub bands: Option<String>,
    #[arg(long)]
    pub smoothing_window: Option<String>,
    /// key=value file with genetic algorithm parameters
    #[arg(long)]
    pub ga_config: Option<PathBuf>,
    #[arg(long)]
    pub rng_seed: Option<String>,
    #[arg(long)]
    pub population_size: Option<String>,
    #[arg(long)]
    pub max_generations: Option<String>,
    #[arg(long)]
    pub tournament_size: Option<String>,
    #[arg(long)]
    pub crossover_rate: Option<String>,
    #[arg(long)]
    pub mutation_rate: Option<String>,
    #[arg(long)]
    pub elite_count: Option<String>,
    #[arg(long)]
    pub stagnation_patience: Option<String>,
    #[arg(long)]
    pub width: Option<String>,
    #[arg(long)]
    pub height: Option<String>,
    /// Phantom class means: csf,gm,wm
    #[arg(long)]
    pub means: Option<String>,
    #[arg(long)]
    pub background: Option<String>,
    #[arg(long)]
    pub noise_std: Option<String>,
    #[arg(long, value_parser = ["concentric", "blobs"])]
    pub geometry: Option<String>,
    /// Require class means at least 4 noise_std apart
    #[arg(long)]
    pub separable: bool,
}

impl Flags {
    fn overrides(&self) -> Vec<(&'static str, &str)> {
        let pairs: [(&'static str, &Option<String>); 28] = [
            ("input", &self.input),
            ("reference", &self.reference),
            ("output_dir", &self.output_dir),
            ("seeds", &self.seeds),
            ("strategy", &self.strategy),
            ("k", &self.k),
            ("sigma_floor", &self.sigma_floor),
            ("stats_mode", &self.stats_mode),
            ("neighborhood", &self.neighborhood),
            ("class_order", &self.class_order),
            ("bands", &self.bands),
            ("smoothing_window", &self.smoothing_window),
            ("rng_seed", &self.rng_seed),
            ("population_size", &self.population_size),
            ("max_generations", &self.max_generations),
            ("tournament_size", &self.tournament_size),
            ("crossover_rate", &self.crossover_rate),
            ("mutation_rate", &self.mutation_rate),
            ("elite_count", &self.elite_count),
            ("stagnation_patience", &self.stagnation_patience),
            ("width", &self.width),
            ("height", &self.height),
            ("means", &self.means),
            ("background", &self.background),
            ("noise_std", &self.noise_std),
            ("geometry", &self.geometry),
            ("separable", &None),
            ("command", &None),
        ];
        let mut out: Vec<(&'static str, &str)> = pairs
            .iter()
            .filter_map(|(k, v)| v.as_deref().map(|v| (*k, v)))
            .collect();
        if self.separable {
            out.push(("separable", "true"));
        }
        out
    }

    /// Defaults, then `--config`, then `--ga-config`, then individual flags.
    pub fn resolve(&self, command: &str) -> Result<RunConfig, CliError> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(path).map_err(CliError::Usage)?;
        }
        if let Some(path) = &self.ga_config {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            cfg.apply_ga_file(&text)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        }
        for (k, v) in self.overrides() {
            cfg.apply(k, v)
                .map_err(|e| CliError::Usage(e.to_string()))?;
        }
        cfg.command = command.to_owned();
        Ok(cfg)
    }
}

/// Parses `args` (program name first) and runs the subcommand; returns the
/// process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Parses `args` and runs the subcommand.
pub fn run_args<I, T>(args: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Usage(e.to_string()))?;
    run(&cli.command)
}

pub fn run(command: &Command) -> Result<(), CliError> {
    match command {
        Command::Segment(f) => cmd_segment(&f.resolve("segment")?),
        Command::Optimize(f) => cmd_optimize(&f.resolve("optimize")?),
        Command::Evaluate(f) => cmd_evaluate(&f.resolve("evaluate")?),
        Command::Compare(f) => cmd_compare(&f.resolve("compare")?),
        Command::PhantomGen(f) => cmd_phantom_gen(&f.resolve("phantom-gen")?),
    }
}

struct Outputs<'a> {
    dir: PathBuf,
    inputs: Vec<PathBuf>,
    cfg: &'a RunConfig,
}

impl<'a> Outputs<'a> {
    fn create(cfg: &'a RunConfig) -> Result<Self, CliError> {
        fs::create_dir_all(&cfg.output_dir)
            .map_err(|e| CliError::Data(format!("{}: {e}", cfg.output_dir.display())))?;
        let inputs = [&cfg.input, &cfg.reference]
            .into_iter()
            .flatten()
            .filter_map(|p| fs::canonicalize(p).ok())
            .collect();
        Ok(Outputs {
            dir: cfg.output_dir.clone(),
            inputs,
            cfg,
        })
    }

    fn path(&self, name: &str) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        if let Ok(canonical) = fs::canonicalize(&path) {
            if self.inputs.contains(&canonical) {
                return Err(CliError::Usage(format!(
                    "refusing to overwrite input file {}",
                    path.display()
                )));
            }
        }
        Ok(path)
    }

    fn text(&self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.path(name)?;
        fs::write(&path, contents).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
    }

    fn labels(&self, name: &str, labels: &LabelMap) -> Result<(), CliError> {
        Ok(pgm::save_labels(labels, self.path(name)?)?)
    }

    fn image(&self, name: &str, image: &Image2D) -> Result<(), CliError> {
        Ok(pgm::save_pgm(image, self.path(name)?)?)
    }

    fn echo(&self, name: &str) -> Result<(), CliError> {
        self.text(name, &self.cfg.echo())
    }
}

fn required<'a>(path: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path, CliError> {
    path.as_deref()
        .ok_or_else(|| CliError::Usage(format!("--{flag} is required")))
}

fn load_reference(cfg: &RunConfig, image: &Image2D) -> Result<LabelMap, CliError> {
    let reference = pgm::load_labels(required(&cfg.reference, "reference")?)?;
    image.same_dims(&reference)?;
    Ok(reference)
}

fn run_ga(
    image: &Image2D,
    reference: &LabelMap,
    cfg: &RunConfig,
    settings: &GrowthSettings,
) -> Result<([Point; 3], Evolution), CliError> {
    let pool = pool_from_thresholds(image, &cfg.bands)?;
    info!(
        "candidate pool: csf {} gm {} wm {}",
        pool.candidates(Class::Csf).len(),
        pool.candidates(Class::Gm).len(),
        pool.candidates(Class::Wm).len()
    );
    let evo = evolve_with(
        image,
        &pool,
        reference,
        settings,
        &cfg.ga_config(),
        &Parallel,
    )?;
    info!(
        "ga finished after {} generations, best cost {}",
        evo.history.len(),
        evo.best_cost.cost()
    );
    Ok((evo.best.points(&pool), evo))
}

fn history_csv(history: &[GenerationStats]) -> String {
    let mut s = String::from("generation,best_cost,mean_cost\n");
    for g in history {
        let _ = writeln!(s, "{},{},{:.4}", g.generation, g.best_cost, g.mean_cost);
    }
    s
}

fn eval_csv(rows: &[(&str, &EvalReport)]) -> String {
    let mut s = format!("method,{}\n", EvalReport::CSV_HEADER);
    for (method, report) in rows {
        let _ = writeln!(s, "{method},{}", report.csv_row());
    }
    s
}

fn best_seeds_txt(points: &[Point; 3], cost: u64) -> String {
    format!("seeds={}\ncost={cost}\n", format_seeds(points))
}

fn class_counts(labels: &LabelMap) -> String {
    let mut s = String::new();
    for class in [Class::Background, Class::Csf, Class::Gm, Class::Wm] {
        let _ = writeln!(s, "pixels {}: {}", class.name(), labels.count(class));
    }
    s
}

pub fn cmd_segment(cfg: &RunConfig) -> Result<(), CliError> {
    let image = pgm::load_pgm(required(&cfg.input, "input")?)?;
    let settings = cfg.growth_settings()?;
    let reference = match cfg.reference {
        Some(_) => Some(load_reference(cfg, &image)?),
        None => None,
    };
    if cfg.seeds.is_some() && cfg.strategy != Strategy::Manual {
        return Err(CliError::Usage(
            "--seeds only applies to the manual strategy".into(),
        ));
    }
    let out = Outputs::create(cfg)?;

    let mut history = None;
    let points = match cfg.strategy {
        Strategy::Manual => cfg
            .seeds
            .ok_or_else(|| CliError::Usage("manual strategy needs --seeds".into()))?,
        Strategy::Random => {
            let pool = pool_from_thresholds(&image, &cfg.bands)?;
            random_seeds(&pool, cfg.rng_seed).map(|s| s.point)
        }
        Strategy::Histogram => histogram_peak_seeds(&image, cfg.smoothing_window)?.map(|s| s.point),
        Strategy::Ga => {
            let reference = reference
                .as_ref()
                .ok_or_else(|| CliError::Usage("ga strategy needs --reference".into()))?;
            let (points, evo) = run_ga(&image, reference, cfg, &settings)?;
            history = Some(evo.history);
            points
        }
    };
    info!("segmenting with seeds {}", format_seeds(&points));
    let labels = segment_triple(&image, points, &settings)?;

    out.labels("labels.pgm", &labels)?;
    let mut report = format!(
        "strategy: {}\nseeds: {}\n",
        cfg.strategy.name(),
        format_seeds(&points)
    );
    report.push_str(&class_counts(&labels));
    if let Some(reference) = &reference {
        let eval = rms_error(&labels, reference)?;
        out.text("eval.csv", &eval_csv(&[(cfg.strategy.name(), &eval)]))?;
        report.push_str(&eval.to_string());
    }
    if let Some(history) = &history {
        out.text("history.csv", &history_csv(history))?;
    }
    out.text("report.txt", &report)?;
    out.echo("config.txt")
}

pub fn cmd_optimize(cfg: &RunConfig) -> Result<(), CliError> {
    let image = pgm::load_pgm(required(&cfg.input, "input")?)?;
    let reference = load_reference(cfg, &image)?;
    let settings = cfg.growth_settings()?;
    let out = Outputs::create(cfg)?;

    let (points, evo) = run_ga(&image, &reference, cfg, &settings)?;
    let labels = segment_triple(&image, points, &settings)?;
    let eval = rms_error(&labels, &reference)?;

    out.text(
        "best-seeds.txt",
        &best_seeds_txt(&points, evo.best_cost.cost()),
    )?;
    out.labels("labels.pgm", &labels)?;
    out.text("history.csv", &history_csv(&evo.history))?;
    out.text("eval.csv", &eval_csv(&[("ga", &eval)]))?;
    let mut report = format!(
        "seeds: {}\ncost: {}\ngenerations: {}\n",
        format_seeds(&points),
        evo.best_cost.cost(),
        evo.history.len()
    );
    report.push_str(&class_counts(&labels));
    report.push_str(&eval.to_string());
    out.text("report.txt", &report)?;
    out.echo("config.txt")
}

pub fn cmd_evaluate(cfg: &RunConfig) -> Result<(), CliError> {
    let produced = pgm::load_labels(required(&cfg.input, "input")?)?;
    let reference = pgm::load_labels(required(&cfg.reference, "reference")?)?;
    let eval = rms_error(&produced, &reference)?;
    let out = Outputs::create(cfg)?;
    out.text("eval.csv", &eval_csv(&[("evaluate", &eval)]))?;
    out.text("eval.txt", &eval.to_string())?;
    print!("{eval}");
    out.echo("config.txt")
}

pub fn cmd_compare(cfg: &RunConfig) -> Result<(), CliError> {
    let image = pgm::load_pgm(required(&cfg.input, "input")?)?;
    let reference = load_reference(cfg, &image)?;
    let settings = cfg.growth_settings()?;
    let manual = cfg
        .seeds
        .ok_or_else(|| CliError::Usage("compare needs manual --seeds".into()))?;
    let out = Outputs::create(cfg)?;

    let manual_labels = segment_triple(&image, manual, &settings)?;
    let manual_eval = rms_error(&manual_labels, &reference)?;
    let (ga_points, evo) = run_ga(&image, &reference, cfg, &settings)?;
    let ga_labels = segment_triple(&image, ga_points, &settings)?;
    let ga_eval = rms_error(&ga_labels, &reference)?;
    info!(
        "rms manual {:.6} ga {:.6}",
        manual_eval.rms_overall, ga_eval.rms_overall
    );

    let compare = format!(
        "method,rms\nmanual,{:.6}\nga,{:.6}\n",
        manual_eval.rms_overall, ga_eval.rms_overall
    );
    out.text("compare.csv", &compare)?;
    out.text(
        "eval.csv",
        &eval_csv(&[("manual", &manual_eval), ("ga", &ga_eval)]),
    )?;
    out.text("history.csv", &history_csv(&evo.history))?;
    out.text(
        "best-seeds.txt",
        &best_seeds_txt(&ga_points, evo.best_cost.cost()),
    )?;
    out.labels("manual-labels.pgm", &manual_labels)?;
    out.labels("labels.pgm", &ga_labels)?;
    out.echo("config.txt")
}

pub fn cmd_phantom_gen(cfg: &RunConfig) -> Result<(), CliError> {
    let (image, labels) = generate(&cfg.phantom_spec())?;
    let out = Outputs::create(cfg)?;
    out.image("image.pgm", &image)?;
    out.labels("labels.pgm", &labels)?;
    out.echo("spec.txt")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("run.txt");
        fs::write(&file, "k=3\nsigma_floor=2\nrng_seed=5\n").unwrap();
        let flags = Flags {
            config: Some(file),
            k: Some("1.5".into()),
            ..Flags::default()
        };
        let cfg = flags.resolve("segment").unwrap();
        assert_eq!((cfg.k, cfg.sigma_floor, cfg.rng_seed), (1.5, 2.0, 5));
        assert_eq!(cfg.command, "segment");
    }

    #[test]
    fn error_categories() {
        use segseed_core::Error as E;
        assert_eq!(CliError::from(E::EmptyPool(Class::Gm)).exit_code(), 3);
        assert_eq!(CliError::from(E::InvalidConfig("x")).exit_code(), 1);
        let mismatch = E::DimensionMismatch {
            left_width: 1,
            left_height: 1,
            right_width: 2,
            right_height: 2,
        };
        assert_eq!(CliError::from(mismatch).exit_code(), 2);
    }

    #[test]
    fn history_format() {
        let h = [
            GenerationStats {
                generation: 0,
                best_cost: 12,
                mean_cost: 40.25,
            },
            GenerationStats {
                generation: 1,
                best_cost: 9,
                mean_cost: 20.0,
            },
        ];
        assert_eq!(
            history_csv(&h),
            "generation,best_cost,mean_cost\n0,12,40.2500\n1,9,20.0000\n"
        );
    }
}
