//! Run configuration: a flat INI file with one section per stage.
//!
//! ```ini
//! seed = 1
//! threads = 1
//!
//! [paths]
//! corpora = may.txt, june.txt
//! output_dir = out
//!
//! [train]
//! dim = 200
//! ```
//!
//! Keys left out keep their defaults. Command-line flags are applied on top
//! through [`RunConfig::set`], the same entry point the file loader uses.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use ini::Ini;

use crate::error::{Error, Result};
use crate::sgns::TrainConfig;
use crate::stability::Scope;
use crate::text::{load_stopwords, PipelineConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct PathsSection {
    /// Raw corpora in period order; the first one is the base.
    pub corpora: Vec<PathBuf>,
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreprocessSection {
    pub stopwords: Option<PathBuf>,
    pub min_tokens: usize,
    pub keep_hashtags: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSection {
    pub k_min: usize,
    pub k_max: usize,
    pub min_frequency: u64,
    pub top_hashtags: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisSection {
    pub bins: usize,
    pub top_n: usize,
    pub trajectory_target: Option<String>,
    pub trajectory_neighbors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub threads: usize,
    pub paths: PathsSection,
    pub preprocess: PreprocessSection,
    /// `seed` and `threads` here are ignored; see [`RunConfig::train_config`].
    pub train: TrainConfig,
    /// Initialize each period from the previous period's space.
    pub warm_start: bool,
    pub anchors: usize,
    pub scope: Scope,
    pub cluster: ClusterSection,
    pub analysis: AnalysisSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        let text = PipelineConfig::default();
        RunConfig {
            seed: 1,
            threads: 1,
            paths: PathsSection {
                corpora: Vec::new(),
                output_dir: PathBuf::from("out"),
            },
            preprocess: PreprocessSection {
                stopwords: None,
                min_tokens: text.min_tokens,
                keep_hashtags: text.keep_hashtags,
            },
            train: TrainConfig::default(),
            warm_start: true,
            anchors: 1000,
            scope: Scope::Union,
            cluster: ClusterSection {
                k_min: 2,
                k_max: 10,
                min_frequency: crate::clustering::DEFAULT_MIN_HASHTAG_FREQUENCY,
                top_hashtags: 10,
            },
            analysis: AnalysisSection {
                bins: crate::analysis::DEFAULT_BINS,
                top_n: 20,
                trajectory_target: None,
                trajectory_neighbors: Vec::new(),
            },
        }
    }
}

fn parse<T: FromStr>(section: &str, key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("[{section}] {key}: cannot parse {value:?}")))
}

fn parse_bool(section: &str, key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(Error::Config(format!(
            "[{section}] {key}: expected a boolean, got {value:?}"
        ))),
    }
}

fn list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

fn optional(value: &str) -> Option<String> {
    let v = value.trim();
    (!v.is_empty()).then(|| v.to_string())
}

fn join<I: IntoIterator<Item = S>, S: AsRef<str>>(items: I) -> String {
    items
        .into_iter()
        .map(|s| s.as_ref().to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_ini_str(&text)
    }

    /// Defaults overlaid with every key of the INI text. Unknown sections
    /// and keys are errors.
    pub fn from_ini_str(text: &str) -> Result<Self> {
        let ini = Ini::load_from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut config = RunConfig::default();
        for (section, props) in ini.iter() {
            for (key, value) in props.iter() {
                config.set(section.unwrap_or(""), key, value)?;
            }
        }
        Ok(config)
    }

    /// Set one key. `section` is empty for the top-level keys.
    pub fn set(&mut self, section: &str, key: &str, value: &str) -> Result<()> {
        let s = section;
        match (section, key) {
            ("", "seed") => self.seed = parse(s, key, value)?,
            ("", "threads") => {
                self.threads = parse(s, key, value)?;
                if self.threads == 0 {
                    return Err(Error::Config("threads must be >= 1".into()));
                }
            }
            ("paths", "corpora") => self.paths.corpora = list(value).into_iter().map(PathBuf::from).collect(),
            ("paths", "output_dir") => self.paths.output_dir = PathBuf::from(value.trim()),
            ("preprocess", "stopwords") => self.preprocess.stopwords = optional(value).map(PathBuf::from),
            ("preprocess", "min_tokens") => self.preprocess.min_tokens = parse(s, key, value)?,
            ("preprocess", "keep_hashtags") => self.preprocess.keep_hashtags = parse_bool(s, key, value)?,
            ("train", "dim") => self.train.dim = parse(s, key, value)?,
            ("train", "window") => self.train.window = parse(s, key, value)?,
            ("train", "min_count") => self.train.min_count = parse(s, key, value)?,
            ("train", "epochs") => self.train.epochs = parse(s, key, value)?,
            ("train", "lr_start") => self.train.lr_start = parse(s, key, value)?,
            ("train", "lr_end") => self.train.lr_end = parse(s, key, value)?,
            ("train", "negatives") => self.train.negatives = parse(s, key, value)?,
            ("train", "subsample_threshold") => self.train.subsample_threshold = parse(s, key, value)?,
            ("train", "warm_start") => self.warm_start = parse_bool(s, key, value)?,
            ("align", "anchors") => self.anchors = parse(s, key, value)?,
            ("stability", "scope") => self.scope = value.trim().parse()?,
            ("cluster", "k_min") => self.cluster.k_min = parse(s, key, value)?,
            ("cluster", "k_max") => self.cluster.k_max = parse(s, key, value)?,
            ("cluster", "min_frequency") => self.cluster.min_frequency = parse(s, key, value)?,
            ("cluster", "top_hashtags") => self.cluster.top_hashtags = parse(s, key, value)?,
            ("analysis", "bins") => self.analysis.bins = parse(s, key, value)?,
            ("analysis", "top_n") => self.analysis.top_n = parse(s, key, value)?,
            ("analysis", "trajectory_target") => self.analysis.trajectory_target = optional(value),
            ("analysis", "trajectory_neighbors") => self.analysis.trajectory_neighbors = list(value),
            _ => {
                return Err(Error::Config(if section.is_empty() {
                    format!("unknown top-level key {key:?}")
                } else {
                    format!("unknown key {key:?} in [{section}]")
                }))
            }
        }
        Ok(())
    }

    /// Apply a `section.key=value` override; a bare `key=value` targets the
    /// top level.
    pub fn set_override(&mut self, assignment: &str) -> Result<()> {
        let (path, value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override {assignment:?} is not key=value")))?;
        let (section, key) = path.trim().rsplit_once('.').unwrap_or(("", path.trim()));
        self.set(section, key, value)
    }

    pub fn to_ini(&self) -> Ini {
        let mut ini = Ini::new();
        let t = &self.train;
        ini.with_general_section()
            .set("seed", self.seed.to_string())
            .set("threads", self.threads.to_string());
        ini.with_section(Some("paths"))
            .set("corpora", join(self.paths.corpora.iter().map(|p| p.to_string_lossy())))
            .set("output_dir", self.paths.output_dir.to_string_lossy());
        ini.with_section(Some("preprocess"))
            .set(
                "stopwords",
                self.preprocess
                    .stopwords
                    .as_ref()
                    .map(|p| p.to_string_lossy().into_owned())
                    .unwrap_or_default(),
            )
            .set("min_tokens", self.preprocess.min_tokens.to_string())
            .set("keep_hashtags", self.preprocess.keep_hashtags.to_string());
        ini.with_section(Some("train"))
            .set("dim", t.dim.to_string())
            .set("window", t.window.to_string())
            .set("min_count", t.min_count.to_string())
            .set("epochs", t.epochs.to_string())
            .set("lr_start", t.lr_start.to_string())
            .set("lr_end", t.lr_end.to_string())
            .set("negatives", t.negatives.to_string())
            .set("subsample_threshold", t.subsample_threshold.to_string())
            .set("warm_start", self.warm_start.to_string());
        ini.with_section(Some("align")).set("anchors", self.anchors.to_string());
        ini.with_section(Some("stability")).set(
            "scope",
            match self.scope {
                Scope::Intersection => "intersection",
                Scope::Union => "union",
            },
        );
        ini.with_section(Some("cluster"))
            .set("k_min", self.cluster.k_min.to_string())
            .set("k_max", self.cluster.k_max.to_string())
            .set("min_frequency", self.cluster.min_frequency.to_string())
            .set("top_hashtags", self.cluster.top_hashtags.to_string());
        ini.with_section(Some("analysis"))
            .set("bins", self.analysis.bins.to_string())
            .set("top_n", self.analysis.top_n.to_string())
            .set(
                "trajectory_target",
                self.analysis.trajectory_target.clone().unwrap_or_default(),
            )
            .set("trajectory_neighbors", join(&self.analysis.trajectory_neighbors));
        ini
    }

    /// The effective configuration as INI text; loading it gives back `self`.
    pub fn dump(&self) -> String {
        let mut out = Vec::new();
        self.to_ini().write_to(&mut out).expect("writing to a Vec cannot fail");
        String::from_utf8(out).expect("INI output is UTF-8")
    }

    /// Training settings for period `period`: the global seed offset by the
    /// period index, and the global thread count.
    pub fn train_config(&self, period: usize) -> TrainConfig {
        TrainConfig {
            seed: self.seed.wrapping_add(period as u64),
            threads: self.threads,
            ..self.train.clone()
        }
    }

    pub fn pipeline_config(&self) -> Result<PipelineConfig> {
        let mut config = PipelineConfig::default().with_min_tokens(self.preprocess.min_tokens);
        config.keep_hashtags = self.preprocess.keep_hashtags;
        if let Some(path) = &self.preprocess.stopwords {
            config.stopwords = load_stopwords(path)?;
        }
        Ok(config)
    }

    /// Check parameter ranges and that every referenced input file exists.
    pub fn validate(&self) -> Result<()> {
        self.train_config(0).validate()?;
        if self.anchors == 0 {
            return Err(Error::Config("[align] anchors must be >= 1".into()));
        }
        if self.cluster.k_min < 2 || self.cluster.k_min > self.cluster.k_max {
            return Err(Error::Config("[cluster] need 2 <= k_min <= k_max".into()));
        }
        if self.analysis.bins == 0 {
            return Err(Error::Config("[analysis] bins must be >= 1".into()));
        }
        let inputs = self.paths.corpora.iter().chain(self.preprocess.stopwords.iter());
        for path in inputs {
            if !path.is_file() {
                return Err(Error::Config(format!("input file {} not found", path.display())));
            }
        }
        Ok(())
    }
}
