use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use dpdt::dataset::{self, CsvOptions, LabelColumn};
use dpdt::{Dataset, DpdtConfig, FitConfig, GeneratorKind, GeneratorSpec, GreedyConfig, Impurity};

/// Depth used when neither `--depth` nor `--budgets` is given.
pub const DEFAULT_DEPTH: usize = 3;

/// First-depth budget of the default "light" configuration `(8, 1, ..., 1)`.
pub const LIGHT_ROOT_BUDGET: usize = 8;

/// Above this many samples the exhaustive generator triggers a warning.
pub const EXHAUSTIVE_WARN_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Cart,
    Dpdt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Synthetic {
    /// Uniform points labelled by the 2×2 XOR pattern.
    Xor,
    /// XOR on a square lattice of cell centres (exactly balanced).
    XorLattice,
    /// Uniform points on a `--cells` × `--cells` checkerboard.
    Checkerboard,
}

/// Comma-separated per-depth budgets such as `8,1,1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Budgets(pub Vec<usize>);

impl std::str::FromStr for Budgets {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let budgets = s
            .split(',')
            .map(|b| {
                let b = b.trim();
                match b.parse::<usize>() {
                    Ok(0) => Err("budgets must be at least 1".to_string()),
                    Ok(v) => Ok(v),
                    Err(_) => Err(format!("invalid budget {b:?}")),
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Budgets(budgets))
    }
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Training CSV file.
    #[arg(long, conflicts_with = "synthetic")]
    pub data: Option<PathBuf>,

    /// Generate the training data instead of reading a file.
    #[arg(long, value_enum)]
    pub synthetic: Option<Synthetic>,

    /// Sample count for generated data (lattices round to a square).
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,

    /// Board size for `--synthetic checkerboard`.
    #[arg(long, default_value_t = 3)]
    pub cells: usize,

    /// Seed for generated data.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Held-out CSV file, read with the same options as `--data`.
    #[arg(long)]
    pub test: Option<PathBuf>,

    /// Label column: a header name or a zero-based index. Defaults to the
    /// last column.
    #[arg(long)]
    pub label: Option<String>,

    /// The first CSV row is a header (default).
    #[arg(long, overrides_with = "no_header")]
    pub header: bool,

    /// The first CSV row is data.
    #[arg(long, overrides_with = "header")]
    pub no_header: bool,

    #[arg(long, default_value_t = ',')]
    pub delimiter: char,
}

/// Training data, optional test data, and the seed if the data was generated.
pub struct Loaded {
    pub train: Dataset,
    pub test: Option<Dataset>,
    pub seed: Option<u64>,
}

impl DataArgs {
    fn csv_options(&self) -> Result<CsvOptions> {
        if !self.delimiter.is_ascii() {
            bail!("delimiter must be a single ASCII character");
        }
        Ok(CsvOptions {
            label: self
                .label
                .as_deref()
                .map_or(LabelColumn::Last, LabelColumn::parse),
            has_header: !self.no_header,
            delimiter: self.delimiter as u8,
        })
    }

    pub fn load(&self) -> Result<Loaded> {
        let options = self.csv_options()?;
        let (train, seed) = match (&self.data, self.synthetic) {
            (Some(path), _) => (
                dataset::load_csv(path, &options)
                    .with_context(|| format!("reading {}", path.display()))?,
                None,
            ),
            (None, Some(kind)) => (
                generate(kind, self.samples, self.cells, self.seed)?,
                Some(self.seed),
            ),
            (None, None) => bail!("give --data FILE or --synthetic KIND"),
        };
        let test = match &self.test {
            Some(path) => {
                let test = dataset::load_csv(path, &options)
                    .with_context(|| format!("reading {}", path.display()))?;
                if test.n_features() != train.n_features() {
                    bail!(
                        "{} has {} features but the training data has {}",
                        path.display(),
                        test.n_features(),
                        train.n_features()
                    );
                }
                Some(test.with_class_names_of(&train)?)
            }
            None => None,
        };
        Ok(Loaded { train, test, seed })
    }
}

pub fn generate(kind: Synthetic, samples: usize, cells: usize, seed: u64) -> Result<Dataset> {
    let data = match kind {
        Synthetic::Xor => dataset::generate_xor(samples, seed)?,
        Synthetic::XorLattice => dataset::xor_lattice(lattice_side(samples))?,
        Synthetic::Checkerboard => dataset::generate_checkerboard(samples, cells, seed)?,
    };
    Ok(data)
}

/// Side of the square lattice closest to `samples` points.
pub fn lattice_side(samples: usize) -> usize {
    ((samples as f64).sqrt().round() as usize).max(1)
}

/// Tree-learner settings shared by `train`, `compare` and `boost`.
#[derive(Debug, Clone, Args)]
pub struct LearnerArgs {
    /// Split generator for DPDT: exhaustive, top_b or cart_call.
    #[arg(long, default_value = "cart_call")]
    pub generator: GeneratorKind,

    /// Maximum tree depth. Defaults to the number of budgets, or 3.
    #[arg(long)]
    pub depth: Option<usize>,

    /// Cost of one expected split in the regularized loss.
    #[arg(long, default_value_t = 0.0)]
    pub alpha: f64,

    /// Impurity criterion: gini or entropy.
    #[arg(long, default_value = "gini")]
    pub impurity: Impurity,
}

impl LearnerArgs {
    pub fn depth_for(&self, budgets: Option<&Budgets>) -> Result<usize> {
        match (self.depth, budgets) {
            (Some(d), Some(b)) if b.0.len() != d => {
                bail!("--budgets lists {} entries for --depth {d}", b.0.len())
            }
            (Some(d), _) => Ok(d),
            (None, Some(b)) => Ok(b.0.len()),
            (None, None) => Ok(DEFAULT_DEPTH),
        }
    }

    pub fn greedy(&self, budgets: Option<&Budgets>) -> Result<GreedyConfig> {
        let config = GreedyConfig::with_depth(self.depth_for(budgets)?).impurity(self.impurity);
        config.validate()?;
        Ok(config)
    }

    pub fn dpdt(&self, budgets: Option<&Budgets>) -> Result<DpdtConfig> {
        let depth = self.depth_for(budgets)?;
        let generator = match self.generator {
            GeneratorKind::Exhaustive => GeneratorSpec::exhaustive(),
            kind => {
                let budgets = budgets.map_or_else(|| light_budgets(depth), |b| b.0.clone());
                GeneratorSpec {
                    kind,
                    budgets,
                    impurity: self.impurity,
                }
            }
        };
        let config = DpdtConfig {
            max_depth: depth,
            alpha: self.alpha,
            generator: generator.with_impurity(self.impurity),
            tie_break: Default::default(),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn config(&self, algo: Algo, budgets: Option<&Budgets>) -> Result<FitConfig> {
        if !(0.0..=1.0).contains(&self.alpha) {
            bail!("--alpha {} outside [0, 1]", self.alpha);
        }
        Ok(match algo {
            Algo::Cart => FitConfig::Cart(self.greedy(budgets)?),
            Algo::Dpdt => FitConfig::Dpdt(self.dpdt(budgets)?),
        })
    }
}

/// `(8, 1, ..., 1)` truncated to `depth` entries.
pub fn light_budgets(depth: usize) -> Vec<usize> {
    (0..depth)
        .map(|d| if d == 0 { LIGHT_ROOT_BUDGET } else { 1 })
        .collect()
}
