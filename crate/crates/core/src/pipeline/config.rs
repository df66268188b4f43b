use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::classify::{ClassifierConfig, ClassifierKind};
use crate::error::{Error, Result};
use crate::eval::Sidedness;
use crate::features::{FeatureConfig, Scenario};
use crate::model::{Channel, Dimension, ExclusionRule, Flavor, TieRule};
use crate::selection::{SelectionRule, VarianceConvention};

use super::kv::{Flag, KvFile};

/// Everything a run depends on. `out_dir`, `jobs` and `dataset_path` do not
/// affect results and are left out of the resolved text and its hash.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dataset_path: Option<PathBuf>,
    pub flavor: Flavor,
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Worker threads; 0 uses every core.
    pub jobs: usize,
    pub scenarios: Vec<Scenario>,
    pub classifiers: Vec<ClassifierKind>,
    /// More than one value sweeps C for SVM and LR; the table keeps the best.
    pub c_grid: Vec<f64>,
    pub balanced: bool,
    pub max_iterations: usize,
    pub lr_tolerance: f64,
    pub svm_tolerance: f64,
    pub dimensions: Vec<Dimension>,
    pub selection: SelectionRule,
    pub tie: TieRule,
    pub min_class_fraction: f64,
    pub sidedness: Sidedness,
    pub baseline_repetitions: usize,
    pub features: FeatureConfig,
    /// Classifiers whose setups enter the correlation matrices.
    pub correlation_classifiers: Vec<ClassifierKind>,
    pub model_dump: bool,
}

impl ExperimentConfig {
    /// Defaults for a flavor: the lab set runs NB on BVP+all without the
    /// extended indices, the others the full wearable grid with all classifiers.
    pub fn for_flavor(flavor: Flavor, seed: u64) -> Self {
        let lab = flavor == Flavor::DeapLike;
        let features = FeatureConfig {
            extended: !lab,
            ..FeatureConfig::default()
        };
        Self {
            dataset_path: None,
            flavor,
            seed,
            out_dir: PathBuf::from("results"),
            jobs: 0,
            scenarios: if lab { vec![Scenario::replication()] } else { Scenario::wearable_grid() },
            classifiers: if lab { vec![ClassifierKind::NaiveBayes] } else { ClassifierKind::ALL.to_vec() },
            c_grid: vec![1.0],
            balanced: true,
            max_iterations: 1000,
            lr_tolerance: ClassifierKind::LogReg.default_tolerance(),
            svm_tolerance: ClassifierKind::Svm.default_tolerance(),
            dimensions: Dimension::BOTH.to_vec(),
            selection: SelectionRule::default(),
            tie: TieRule::Low,
            min_class_fraction: 0.10,
            sidedness: Sidedness::Greater,
            baseline_repetitions: 1000,
            features,
            correlation_classifiers: ClassifierKind::ALL.to_vec(),
            model_dump: false,
        }
    }

    /// Parses a config file. `seed_override` (the command-line seed) wins
    /// over `run.seed`; one of them must be present.
    pub fn parse(text: &str, file: &Path, seed_override: Option<u64>) -> Result<Self> {
        let mut kv = KvFile::parse(text, file)?;
        let flavor: Flavor = kv.take_or("dataset.flavor", Flavor::Synthetic)?;
        let file_seed: Option<u64> = kv.take("run.seed")?;
        let seed = seed_override.or(file_seed).ok_or_else(|| {
            Error::Config(format!("{}: run.seed is mandatory (or pass --seed)", file.display()))
        })?;
        let mut c = Self::for_flavor(flavor, seed);
        // relative paths are taken from the config file's directory
        let anchor = |p: PathBuf| match file.parent() {
            Some(dir) if p.is_relative() => dir.join(p),
            _ => p,
        };
        c.dataset_path = kv.take::<PathBuf>("dataset.path")?.map(anchor);
        if let Some(out) = kv.take::<PathBuf>("run.out")? {
            c.out_dir = anchor(out);
        }
        c.jobs = kv.take_or("run.jobs", c.jobs)?;
        if let Some(v) = list::<Scenario>(&mut kv, "run.scenarios")? {
            c.scenarios = v;
        }
        if let Some(v) = list::<ClassifierKind>(&mut kv, "run.classifiers")? {
            c.classifiers = v;
        }
        if let Some(v) = kv.take_list::<Dimension>("run.dimensions")? {
            c.dimensions = v;
        }
        if let Some(v) = kv.take_list::<f64>("classifier.c")? {
            c.c_grid = v;
        }
        c.balanced = kv.take_or("classifier.balanced", Flag(c.balanced))?.0;
        c.max_iterations = kv.take_or("classifier.max_iterations", c.max_iterations)?;
        c.lr_tolerance = kv.take_or("classifier.lr_tolerance", c.lr_tolerance)?;
        c.svm_tolerance = kv.take_or("classifier.svm_tolerance", c.svm_tolerance)?;
        c.selection.threshold = kv.take_or("selection.threshold", c.selection.threshold)?;
        c.selection.min_count = kv.take_or("selection.min_count", c.selection.min_count)?;
        if let Some((v, line)) = kv.take_raw("selection.variance") {
            c.selection.variance = v.parse::<VarianceConvention>().map_err(|e| kv.error(line, e.to_string()))?;
        }
        c.tie = kv.take_or("labels.tie", c.tie)?;
        c.min_class_fraction = kv.take_or("exclusion.min_class_fraction", c.min_class_fraction)?;
        if let Some((v, line)) = kv.take_raw("eval.sidedness") {
            c.sidedness = v.parse::<Sidedness>().map_err(|e| kv.error(line, e.to_string()))?;
        }
        c.baseline_repetitions = kv.take_or("eval.baseline_repetitions", c.baseline_repetitions)?;
        if let Some((v, line)) = kv.take_raw("beats.ibi_screen") {
            c.features.detectors.ibi_window = parse_screen(&v).map_err(|e| kv.error(line, e))?;
        }
        c.features.extended = kv.take_or("features.extended", Flag(c.features.extended))?.0;
        c.features.absolute_ibi_derivative =
            kv.take_or("features.absolute_ibi_derivative", Flag(c.features.absolute_ibi_derivative))?.0;
        c.features.blink_min_prominence =
            kv.take_or("features.blink_min_prominence", c.features.blink_min_prominence)?;
        c.model_dump = kv.take_or("report.model_dump", Flag(c.model_dump))?.0;
        if let Some(v) = list::<ClassifierKind>(&mut kv, "report.correlation_classifiers")? {
            c.correlation_classifiers = v;
        }
        kv.finish()?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path, seed_override: Option<u64>) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path, seed_override)
    }

    pub fn validate(&self) -> Result<()> {
        if self.scenarios.is_empty() || self.classifiers.is_empty() || self.dimensions.is_empty() {
            return Err(Error::Config("scenarios, classifiers and dimensions must be non-empty".into()));
        }
        for s in &self.scenarios {
            s.feature_channels(self.flavor)?;
        }
        if self.c_grid.is_empty() {
            return Err(Error::Config("classifier.c needs at least one value".into()));
        }
        for cfg in self.classifier_configs() {
            cfg.validate()?;
        }
        if !(self.min_class_fraction > 0.0 && self.min_class_fraction <= 0.5) {
            return Err(Error::Config(format!(
                "exclusion.min_class_fraction {} must be in (0, 0.5]",
                self.min_class_fraction
            )));
        }
        if !self.selection.threshold.is_finite() {
            return Err(Error::Config("selection.threshold must be finite".into()));
        }
        if self.flavor == Flavor::DeapLike && self.features.extended {
            return Err(Error::Config("features.extended is not available for the deap flavor".into()));
        }
        Ok(())
    }

    /// One entry per classifier and C value; NB ignores C and appears once.
    pub fn classifier_configs(&self) -> Vec<ClassifierConfig> {
        let mut out = Vec::new();
        for &kind in &self.classifiers {
            let grid: &[f64] = if kind == ClassifierKind::NaiveBayes { &[1.0] } else { &self.c_grid };
            for &c in grid {
                out.push(ClassifierConfig {
                    kind,
                    c,
                    balanced: self.balanced,
                    max_iterations: self.max_iterations,
                    tolerance: match kind {
                        ClassifierKind::Svm => self.svm_tolerance,
                        _ => self.lr_tolerance,
                    },
                    seed: self.seed,
                });
            }
        }
        out
    }

    /// Ingested channels every kept trial must carry, over all scenarios, so
    /// every setup sees the same subjects.
    pub fn required_channels(&self) -> Result<Vec<Channel>> {
        let mut v = Vec::new();
        for s in &self.scenarios {
            v.extend(s.required_channels(self.flavor)?);
        }
        v.sort();
        v.dedup();
        Ok(v)
    }

    pub fn exclusion_rule(&self) -> Result<ExclusionRule> {
        Ok(ExclusionRule {
            min_class_fraction: self.min_class_fraction,
            tie: self.tie,
            required_channels: self.required_channels()?,
        })
    }

    /// Every result-affecting setting with its value, in a fixed order. The
    /// output parses back to the same config.
    pub fn resolved(&self) -> String {
        let join = |v: Vec<String>| v.join(", ");
        let kinds = |v: &[ClassifierKind]| join(v.iter().map(|k| k.name().to_string()).collect());
        let screen = match self.features.detectors.ibi_window {
            Some((a, b)) => format!("{a}..{b}"),
            None => "off".into(),
        };
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("dataset.flavor", self.flavor.name().into());
        put("run.seed", self.seed.to_string());
        put("run.scenarios", join(self.scenarios.iter().map(|x| x.id()).collect()));
        put("run.classifiers", kinds(&self.classifiers));
        put("run.dimensions", join(self.dimensions.iter().map(|d| d.name().to_string()).collect()));
        put("classifier.c", join(self.c_grid.iter().map(|c| c.to_string()).collect()));
        put("classifier.balanced", self.balanced.to_string());
        put("classifier.max_iterations", self.max_iterations.to_string());
        put("classifier.lr_tolerance", self.lr_tolerance.to_string());
        put("classifier.svm_tolerance", self.svm_tolerance.to_string());
        put("selection.threshold", self.selection.threshold.to_string());
        put("selection.min_count", self.selection.min_count.to_string());
        put("selection.variance", self.selection.variance.name().into());
        put("labels.tie", self.tie.name().into());
        put("exclusion.min_class_fraction", self.min_class_fraction.to_string());
        put("eval.sidedness", self.sidedness.name().into());
        put("eval.baseline_repetitions", self.baseline_repetitions.to_string());
        put("beats.ibi_screen", screen);
        put("features.extended", self.features.extended.to_string());
        put("features.absolute_ibi_derivative", self.features.absolute_ibi_derivative.to_string());
        put("features.blink_min_prominence", self.features.blink_min_prominence.to_string());
        put("report.model_dump", self.model_dump.to_string());
        put("report.correlation_classifiers", kinds(&self.correlation_classifiers));
        s
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.resolved().as_bytes()))
    }
}

/// Like `take_list`, for parsers whose error is the crate error.
fn list<T: std::str::FromStr<Err = Error>>(kv: &mut KvFile, key: &str) -> Result<Option<Vec<T>>> {
    let Some((v, line)) = kv.take_raw(key) else {
        return Ok(None);
    };
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|e| kv.error(line, format!("{key}: {e}"))))
        .collect::<Result<Vec<T>>>()
        .map(Some)
}

fn parse_screen(v: &str) -> std::result::Result<Option<(f64, f64)>, String> {
    let v = v.trim();
    if matches!(v.to_ascii_lowercase().as_str(), "off" | "none" | "false") {
        return Ok(None);
    }
    let (a, b) = v
        .split_once("..")
        .ok_or_else(|| format!("beats.ibi_screen: expected `lo..hi` or `off`, got `{v}`"))?;
    let a: f64 = a.trim().parse().map_err(|e| format!("beats.ibi_screen: {e}"))?;
    let b: f64 = b.trim().parse().map_err(|e| format!("beats.ibi_screen: {e}"))?;
    if !(a > 0.0 && a < b) {
        return Err(format!("beats.ibi_screen: need 0 < lo < hi, got {a}..{b}"));
    }
    Ok(Some((a, b)))
}
