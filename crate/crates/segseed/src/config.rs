//! Run configuration: `key=value` files, flag overrides and the echo file
//! written next to every run's outputs.
//!
//! Every key accepted here is also written by [`RunConfig::echo`], so feeding
//! an echo file back through `--config` reproduces the run.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use segseed_core::ga::GaConfig;
use segseed_core::{
    Class, Geometry, GrowthCriterion, GrowthSettings, Neighborhood, PhantomSpec, Point, StatsMode,
    ThresholdBands,
};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("line {line}: expected key=value, got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("unknown configuration key {0:?}")]
    UnknownKey(String),
    #[error("invalid value {value:?} for {key}: {reason}")]
    Value {
        key: String,
        value: String,
        reason: String,
    },
}

fn bad(key: &str, value: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Value {
        key: key.to_owned(),
        value: value.to_owned(),
        reason: reason.into(),
    }
}

/// Splits `key=value` lines. Blank lines and `#` comments are skipped.
pub fn parse_key_values(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line: i + 1,
            text: raw.to_owned(),
        })?;
        out.push((k.trim().to_owned(), v.trim().to_owned()));
    }
    Ok(out)
}

/// How the seeds of a segmentation are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    #[default]
    Manual,
    Random,
    Histogram,
    Ga,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Manual => "manual",
            Strategy::Random => "random",
            Strategy::Histogram => "histogram",
            Strategy::Ga => "ga",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "manual" => Strategy::Manual,
            "random" => Strategy::Random,
            "histogram" => Strategy::Histogram,
            "ga" => Strategy::Ga,
            _ => return None,
        })
    }
}

/// One seed per tissue class, written `csf:x,y;gm:x,y;wm:x,y` (class names
/// or codes 1-3, any order).
pub fn parse_seeds(s: &str) -> Result<[Point; 3], String> {
    let mut slots: [Option<Point>; 3] = [None; 3];
    let parts: Vec<&str> = s
        .split(';')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .collect();
    if parts.len() != 3 {
        return Err(format!(
            "expected 3 seeds (one per class), got {}",
            parts.len()
        ));
    }
    for part in parts {
        let (class, coords) = part
            .split_once(':')
            .ok_or_else(|| format!("seed {part:?} is not class:x,y"))?;
        let class = Class::parse_tissue(class).ok_or_else(|| format!("unknown class {class:?}"))?;
        let (x, y) = coords
            .split_once(',')
            .ok_or_else(|| format!("seed {part:?} is not class:x,y"))?;
        let x = x
            .trim()
            .parse()
            .map_err(|_| format!("bad x coordinate in {part:?}"))?;
        let y = y
            .trim()
            .parse()
            .map_err(|_| format!("bad y coordinate in {part:?}"))?;
        let slot = &mut slots[class.tissue_index().expect("tissue")];
        if slot.is_some() {
            return Err(format!("class {class} given twice"));
        }
        *slot = Some(Point::new(x, y));
    }
    Ok(slots.map(|p| p.expect("three distinct classes")))
}

pub fn format_seeds(points: &[Point; 3]) -> String {
    Class::TISSUES
        .iter()
        .zip(points)
        .map(|(c, p)| format!("{}:{},{}", c.name(), p.x, p.y))
        .collect::<Vec<_>>()
        .join(";")
}

fn parse_list<T: std::str::FromStr, const N: usize>(
    key: &str,
    value: &str,
) -> Result<[T; N], ConfigError> {
    let items: Vec<T> = value
        .split(',')
        .map(|s| s.trim().parse::<T>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad(key, value, format!("expected {N} comma-separated numbers")))?;
    items
        .try_into()
        .map_err(|_| bad(key, value, format!("expected {N} comma-separated numbers")))
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| bad(key, value, "not a number"))
}

/// All effective parameters of one command-line run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: String,
    pub input: Option<PathBuf>,
    pub reference: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub strategy: Strategy,
    /// Seeds in CSF, GM, WM order.
    pub seeds: Option<[Point; 3]>,
    pub k: f64,
    pub sigma_floor: f64,
    pub stats_mode: StatsMode,
    pub neighborhood: Neighborhood,
    pub class_order: [Class; 3],
    pub bands: ThresholdBands,
    pub smoothing_window: usize,
    pub rng_seed: u64,
    pub ga: GaConfig,
    pub phantom: PhantomSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        let criterion = GrowthCriterion::default();
        RunConfig {
            command: String::new(),
            input: None,
            reference: None,
            output_dir: PathBuf::from("."),
            strategy: Strategy::default(),
            seeds: None,
            k: criterion.k(),
            sigma_floor: criterion.sigma_floor(),
            stats_mode: criterion.stats_mode(),
            neighborhood: Neighborhood::default(),
            class_order: GrowthSettings::DEFAULT_CLASS_ORDER,
            bands: ThresholdBands::default(),
            smoothing_window: 5,
            rng_seed: 0,
            ga: GaConfig::default(),
            phantom: PhantomSpec::default(),
        }
    }
}

/// Keys understood by `--ga-config` files.
pub const GA_KEYS: [&str; 8] = [
    "population_size",
    "max_generations",
    "tournament_size",
    "crossover_rate",
    "mutation_rate",
    "elite_count",
    "stagnation_patience",
    "rng_seed",
];

impl RunConfig {
    /// Sets one parameter from its textual form.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            // informational; the subcommand on the command line decides
            "command" => {}
            "input" => self.input = Some(PathBuf::from(value)),
            "reference" => self.reference = Some(PathBuf::from(value)),
            "output_dir" => self.output_dir = PathBuf::from(value),
            "strategy" => {
                self.strategy = Strategy::parse(value)
                    .ok_or_else(|| bad(key, value, "expected manual, random, histogram or ga"))?
            }
            "seeds" => self.seeds = Some(parse_seeds(value).map_err(|r| bad(key, value, r))?),
            "k" => self.k = parse_num(key, value)?,
            "sigma_floor" => self.sigma_floor = parse_num(key, value)?,
            "stats_mode" => {
                self.stats_mode = match value {
                    "exact" => StatsMode::Exact,
                    "paper-literal" => StatsMode::PaperLiteral,
                    _ => return Err(bad(key, value, "expected exact or paper-literal")),
                }
            }
            "neighborhood" => {
                self.neighborhood = Neighborhood::parse(value)
                    .ok_or_else(|| bad(key, value, "expected 4, diag4 or 8"))?
            }
            "class_order" => {
                let mut order = [Class::Background; 3];
                let names: Vec<&str> = value.split(',').collect();
                if names.len() != 3 {
                    return Err(bad(key, value, "expected three class names"));
                }
                for (slot, name) in order.iter_mut().zip(names) {
                    *slot = Class::parse_tissue(name)
                        .ok_or_else(|| bad(key, value, "unknown class"))?;
                }
                let settings = GrowthSettings {
                    class_order: order,
                    ..GrowthSettings::default()
                };
                settings
                    .validate()
                    .map_err(|e| bad(key, value, e.to_string()))?;
                self.class_order = order;
            }
            "bands" => {
                let bounds: [u8; 6] = parse_list(key, value)?;
                self.bands = ThresholdBands::from_bounds(bounds)
                    .map_err(|e| bad(key, value, e.to_string()))?;
            }
            "smoothing_window" => self.smoothing_window = parse_num(key, value)?,
            "rng_seed" => self.rng_seed = parse_num(key, value)?,
            "population_size" => self.ga.population_size = parse_num(key, value)?,
            "max_generations" => self.ga.max_generations = parse_num(key, value)?,
            "tournament_size" => self.ga.tournament_size = parse_num(key, value)?,
            "crossover_rate" => self.ga.crossover_rate = parse_num(key, value)?,
            "mutation_rate" => self.ga.mutation_rate = parse_num(key, value)?,
            "elite_count" => self.ga.elite_count = parse_num(key, value)?,
            "stagnation_patience" => self.ga.stagnation_patience = parse_num(key, value)?,
            "width" => self.phantom.width = parse_num(key, value)?,
            "height" => self.phantom.height = parse_num(key, value)?,
            "means" => self.phantom.class_means = parse_list(key, value)?,
            "background" => self.phantom.background = parse_num(key, value)?,
            "noise_std" => self.phantom.noise_std = parse_num(key, value)?,
            "geometry" => {
                self.phantom.geometry = Geometry::parse(value)
                    .ok_or_else(|| bad(key, value, "expected concentric or blobs"))?
            }
            "separable" => {
                self.phantom.require_separable = value
                    .parse()
                    .map_err(|_| bad(key, value, "expected true or false"))?
            }
            other => return Err(ConfigError::UnknownKey(other.to_owned())),
        }
        Ok(())
    }

    pub fn apply_all<'a>(
        &mut self,
        pairs: impl IntoIterator<Item = (&'a str, &'a str)>,
    ) -> Result<(), ConfigError> {
        for (k, v) in pairs {
            self.apply(k, v)?;
        }
        Ok(())
    }

    /// Applies a GA parameter file; only [`GA_KEYS`] are allowed.
    pub fn apply_ga_file(&mut self, text: &str) -> Result<(), ConfigError> {
        for (k, v) in parse_key_values(text)? {
            if !GA_KEYS.contains(&k.as_str()) {
                return Err(ConfigError::UnknownKey(k));
            }
            self.apply(&k, &v)?;
        }
        Ok(())
    }

    pub fn criterion(&self) -> Result<GrowthCriterion, segseed_core::Error> {
        GrowthCriterion::new(self.k, self.sigma_floor, self.stats_mode)
    }

    pub fn growth_settings(&self) -> Result<GrowthSettings, segseed_core::Error> {
        let settings = GrowthSettings {
            criterion: self.criterion()?,
            neighborhood: self.neighborhood,
            class_order: self.class_order,
        };
        settings.validate()?;
        Ok(settings)
    }

    pub fn ga_config(&self) -> GaConfig {
        GaConfig {
            rng_seed: self.rng_seed,
            ..self.ga
        }
    }

    pub fn phantom_spec(&self) -> PhantomSpec {
        PhantomSpec {
            rng_seed: self.rng_seed,
            ..self.phantom
        }
    }

    /// Every effective parameter as `key=value` lines, in a fixed order.
    pub fn echo(&self) -> String {
        let mut s = String::new();
        let mut line = |k: &str, v: &dyn std::fmt::Display| {
            let _ = writeln!(s, "{k}={v}");
        };
        line("command", &self.command);
        if let Some(p) = &self.input {
            line("input", &p.display());
        }
        if let Some(p) = &self.reference {
            line("reference", &p.display());
        }
        line("output_dir", &self.output_dir.display());
        line("strategy", &self.strategy.name());
        if let Some(seeds) = &self.seeds {
            line("seeds", &format_seeds(seeds));
        }
        line("k", &self.k);
        line("sigma_floor", &self.sigma_floor);
        let mode = match self.stats_mode {
            StatsMode::Exact => "exact",
            StatsMode::PaperLiteral => "paper-literal",
        };
        line("stats_mode", &mode);
        line("neighborhood", &self.neighborhood.name());
        let order: Vec<&str> = self.class_order.iter().map(|c| c.name()).collect();
        line("class_order", &order.join(","));
        line("bands", &self.bands);
        line("smoothing_window", &self.smoothing_window);
        line("rng_seed", &self.rng_seed);
        let g = &self.ga;
        line("population_size", &g.population_size);
        line("max_generations", &g.max_generations);
        line("tournament_size", &g.tournament_size);
        line("crossover_rate", &g.crossover_rate);
        line("mutation_rate", &g.mutation_rate);
        line("elite_count", &g.elite_count);
        line("stagnation_patience", &g.stagnation_patience);
        let p = &self.phantom;
        line("width", &p.width);
        line("height", &p.height);
        let m = p.class_means;
        line("means", &format_args!("{},{},{}", m[0], m[1], m[2]));
        line("background", &p.background);
        line("noise_std", &p.noise_std);
        line("geometry", &p.geometry.name());
        line("separable", &p.require_separable);
        s
    }

    /// Loads a `key=value` file on top of the current values.
    pub fn apply_file(&mut self, path: &Path) -> Result<(), String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let pairs = parse_key_values(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        self.apply_all(pairs.iter().map(|(k, v)| (k.as_str(), v.as_str())))
            .map_err(|e| format!("{}: {e}", path.display()))
    }
}
