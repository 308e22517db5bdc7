//! Simulation-recovery experiments: generate a tree, simulate data, fit
//! every requested model and tabulate held-out losses and structure recovery.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{PbctError, Result};
use crate::generator::{generate_tree, sample_leaf_distributions, simulate_sequence};
use crate::inference::{build_fbm, fbm_leaf_count, fit_pbct, fit_vbm, FitConfig};
use crate::likelihood::compute_counts;
use crate::metrics::{marginal_log_loss_with_counts, model_size, tree_similarity, true_log_loss};
use crate::model::{AlphaSchedule, ContextTree, Hyperparams, SequenceCorpus, Vocabulary};
use crate::rng::RngSeed;

pub const SIMULATED: &str = "simulated";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelSpec {
    Pbct,
    Vbm,
    Fbm(usize),
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelSpec::Pbct => f.write_str("pbct"),
            ModelSpec::Vbm => f.write_str("vbm"),
            ModelSpec::Fbm(d) => write!(f, "fbm:{d}"),
        }
    }
}

impl FromStr for ModelSpec {
    type Err = PbctError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pbct" => Ok(ModelSpec::Pbct),
            "vbm" => Ok(ModelSpec::Vbm),
            other => other
                .strip_prefix("fbm:")
                .and_then(|d| d.parse().ok())
                .map(ModelSpec::Fbm)
                .ok_or_else(|| {
                    PbctError::InvalidParameter(format!(
                        "unknown model {s:?}; expected pbct, vbm or fbm:<order>"
                    ))
                }),
        }
    }
}

impl Serialize for ModelSpec {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ModelSpec {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub vocab_size: u32,
    pub alpha: f64,
    pub decay: f64,
    pub max_depth: usize,
    pub eta: f64,
    pub lambda: f64,
    pub n_train: usize,
    pub n_test: usize,
    pub replicates: usize,
    pub seed: u64,
    pub models: Vec<ModelSpec>,
    /// FBM constructions with more leaves than this are skipped.
    pub max_leaves: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            vocab_size: 10,
            alpha: 1.0,
            decay: 1.0,
            max_depth: 3,
            eta: 1.0,
            lambda: 0.0,
            n_train: 10_000,
            n_test: 1_000,
            replicates: 15,
            seed: 1,
            models: vec![
                ModelSpec::Pbct,
                ModelSpec::Vbm,
                ModelSpec::Fbm(1),
                ModelSpec::Fbm(2),
                ModelSpec::Fbm(3),
            ],
            max_leaves: 1_000_000,
        }
    }
}

impl ExperimentConfig {
    pub fn hyper(&self) -> Result<Hyperparams> {
        Hyperparams::new(
            vec![self.eta; self.vocab_size as usize],
            AlphaSchedule::geometric(self.alpha, self.decay),
            self.max_depth,
        )
    }

    pub fn validate(&self) -> Result<()> {
        Vocabulary::new(self.vocab_size)?;
        self.hyper()?;
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(PbctError::InvalidParameter(format!(
                "lambda must lie in [0, 1], got {}",
                self.lambda
            )));
        }
        if self.replicates == 0 {
            return Err(PbctError::InvalidParameter(
                "replicates must be at least 1".into(),
            ));
        }
        if self.models.is_empty() {
            return Err(PbctError::InvalidParameter("no models requested".into()));
        }
        let burn_in = self.burn_in();
        for (name, n) in [("training", self.n_train), ("test", self.n_test)] {
            if n <= burn_in {
                return Err(PbctError::InvalidParameter(format!(
                    "{name} length {n} leaves nothing to score after a burn-in of {burn_in}"
                )));
            }
        }
        Ok(())
    }

    /// Positions skipped at the start of every sequence, shared by all
    /// models so their losses score the same symbols.
    pub fn burn_in(&self) -> usize {
        self.models
            .iter()
            .filter_map(|m| match m {
                ModelSpec::Fbm(d) => Some(*d),
                _ => None,
            })
            .fold(self.max_depth, usize::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RowValue {
    Value(f64),
    Skipped(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub replicate: usize,
    pub model: String,
    pub metric: String,
    pub value: RowValue,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub rows: Vec<ReportRow>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub sd: f64,
    pub median: f64,
    pub n: usize,
}

impl Summary {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let sd = if n > 1 {
            (values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let median = if n % 2 == 1 {
            sorted[n / 2]
        } else {
            (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
        };
        Some(Self {
            mean,
            sd,
            median,
            n,
        })
    }
}

impl ExperimentReport {
    /// Per-replicate values of one metric, skipping skipped rows.
    pub fn values(&self, model: &str, metric: &str) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.model == model && r.metric == metric)
            .filter_map(|r| match r.value {
                RowValue::Value(v) => Some(v),
                RowValue::Skipped(_) => None,
            })
            .collect()
    }

    pub fn summary(&self, model: &str, metric: &str) -> Option<Summary> {
        Summary::of(&self.values(model, metric))
    }

    /// Tab-separated rows followed by a `#`-prefixed summary block.
    pub fn render(&self) -> String {
        let mut out = String::from("replicate\tmodel\tmetric\tvalue\n");
        for row in &self.rows {
            let value = match &row.value {
                RowValue::Value(v) => format!("{v:.5}"),
                RowValue::Skipped(reason) => format!("skipped: {reason}"),
            };
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\n",
                row.replicate, row.model, row.metric, value
            ));
        }

        let mut keys: Vec<(&str, &str)> = Vec::new();
        for row in &self.rows {
            let key = (row.model.as_str(), row.metric.as_str());
            if !keys.contains(&key) {
                keys.push(key);
            }
        }
        out.push_str("# summary\tmodel\tmetric\tmean\tsd\tn\n");
        for (model, metric) in keys {
            match self.summary(model, metric) {
                Some(s) => out.push_str(&format!(
                    "# summary\t{model}\t{metric}\t{:.5}\t{:.5}\t{}\n",
                    s.mean, s.sd, s.n
                )),
                None => out.push_str(&format!("# summary\t{model}\t{metric}\tskipped\n")),
            }
        }

        let cell = |model: &str, metric: &str| {
            self.summary(model, metric)
                .map(|s| format!("{:.5} ({:.5})", s.mean, s.sd))
                .unwrap_or_else(|| "-".into())
        };
        out.push_str("# table\teta\tlambda\tmodel\ttrue\tsimulated\tfitted\tdifference\n");
        for spec in &self.config.models {
            let model = spec.to_string();
            out.push_str(&format!(
                "# table\t{}\t{}\t{model}\t{}\t{}\t{}\t{}\n",
                self.config.eta,
                self.config.lambda,
                cell(SIMULATED, "true_log_loss"),
                cell(SIMULATED, "marginal_log_loss"),
                cell(&model, "marginal_log_loss"),
                cell(&model, "delta_log_loss"),
            ));
        }
        out
    }
}

fn lift(tree: &ContextTree, max_depth: usize) -> Result<ContextTree> {
    if tree.max_depth() == max_depth {
        return Ok(tree.clone());
    }
    ContextTree::new(tree.vocab().clone(), max_depth, tree.splits().clone())
}

/// Similarity of `fitted` to `truth` at `depth`, weighted by the fitted
/// tree's contexts. A level missing from `fitted` counts as a single `{V}`
/// node.
fn similarity_at(
    fitted: &ContextTree,
    truth: &ContextTree,
    corpus: &SequenceCorpus,
    depth: usize,
) -> Result<f64> {
    match tree_similarity(fitted, truth, corpus, depth) {
        Err(PbctError::DepthUnavailable { .. }) => {
            let nodes = truth.nodes_at_depth(depth - 1);
            let has_leaf = nodes.is_empty() || nodes.iter().any(|n| truth.is_leaf(n));
            Ok(if has_leaf { 1.0 } else { 0.0 })
        }
        other => other,
    }
}

struct Replicate {
    truth: ContextTree,
    train: SequenceCorpus,
    test: SequenceCorpus,
    dists: crate::generator::LeafDistributionTable,
}

fn simulate_replicate(
    config: &ExperimentConfig,
    hyper: &Hyperparams,
    index: usize,
) -> Result<Replicate> {
    let vocab = Vocabulary::new(config.vocab_size)?;
    let seed = RngSeed::new(config.seed).derive(index as u64);
    let truth = generate_tree(&vocab, hyper, seed.derive(1))?;
    let dists = sample_leaf_distributions(&truth, hyper, config.lambda, &mut seed.derive(2).rng())?;
    let mut seq = simulate_sequence(
        &truth,
        &dists,
        config.n_train + config.n_test,
        &mut seed.derive(3).rng(),
    )?;
    let test = seq.split_off(config.n_train);
    Ok(Replicate {
        truth,
        train: SequenceCorpus::single(vocab.clone(), seq)?,
        test: SequenceCorpus::single(vocab, test)?,
        dists,
    })
}

fn run_replicate(
    config: &ExperimentConfig,
    hyper: &Hyperparams,
    index: usize,
) -> Result<Vec<ReportRow>> {
    let rep = simulate_replicate(config, hyper, index)?;
    let burn_in = config.burn_in();
    let eta = &hyper.eta;
    let mut rows = Vec::new();
    let mut push = |model: &str, metric: &str, value: RowValue| {
        rows.push(ReportRow {
            replicate: index + 1,
            model: model.to_string(),
            metric: metric.to_string(),
            value,
        })
    };

    let truth = lift(&rep.truth, burn_in)?;
    let truth_counts = compute_counts(&truth, &rep.train, burn_in)?;
    let simulated = marginal_log_loss_with_counts(&truth, &truth_counts, &rep.test, eta, burn_in)?;
    push(SIMULATED, "marginal_log_loss", RowValue::Value(simulated));
    let true_loss = match true_log_loss(&truth, &rep.dists, &rep.test, burn_in) {
        Ok(v) => RowValue::Value(v),
        Err(e @ PbctError::ZeroProbabilityEvent { .. }) => RowValue::Skipped(e.to_string()),
        Err(e) => return Err(e),
    };
    push(SIMULATED, "true_log_loss", true_loss);
    push(
        SIMULATED,
        "leaves",
        RowValue::Value(model_size(&rep.truth) as f64),
    );

    let fit_config = FitConfig::new(hyper.clone());
    for spec in &config.models {
        let name = spec.to_string();
        let fitted = match spec {
            ModelSpec::Pbct => fit_pbct(&rep.train, &fit_config)?,
            ModelSpec::Vbm => fit_vbm(&rep.train, &fit_config)?,
            ModelSpec::Fbm(d) => match fbm_leaf_count(config.vocab_size, *d) {
                Some(l) if l <= config.max_leaves => build_fbm(rep.train.vocab(), *d)?,
                _ => {
                    let reason = format!(
                        "FBM-{d} needs {}^{d} leaves, above the budget of {}",
                        config.vocab_size, config.max_leaves
                    );
                    push(&name, "all", RowValue::Skipped(reason));
                    continue;
                }
            },
        };
        let fitted = lift(&fitted, burn_in)?;
        let counts = compute_counts(&fitted, &rep.train, burn_in)?;
        let loss = marginal_log_loss_with_counts(&fitted, &counts, &rep.test, eta, burn_in)?;
        push(&name, "marginal_log_loss", RowValue::Value(loss));
        push(&name, "delta_log_loss", RowValue::Value(loss - simulated));
        for depth in 1..=config.max_depth {
            let s = similarity_at(&fitted, &truth, &rep.train, depth)?;
            push(&name, &format!("similarity_d{depth}"), RowValue::Value(s));
        }
        push(&name, "leaves", RowValue::Value(model_size(&fitted) as f64));
    }
    Ok(rows)
}

/// Runs every replicate (concurrently) and returns rows ordered by
/// replicate, then model in configuration order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let hyper = config.hyper()?;
    let per_replicate = (0..config.replicates)
        .into_par_iter()
        .map(|i| run_replicate(config, &hyper, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentReport {
        config: config.clone(),
        rows: per_replicate.into_iter().flatten().collect(),
    })
}

/// Per-depth similarity summary across replicates, keyed by depth.
pub fn similarity_medians(report: &ExperimentReport, model: &str) -> BTreeMap<usize, f64> {
    (1..=report.config.max_depth)
        .filter_map(|d| {
            report
                .summary(model, &format!("similarity_d{d}"))
                .map(|s| (d, s.median))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ExperimentConfig {
        ExperimentConfig {
            vocab_size: 3,
            max_depth: 2,
            n_train: 600,
            n_test: 200,
            replicates: 3,
            seed: 11,
            models: vec![
                ModelSpec::Pbct,
                ModelSpec::Vbm,
                ModelSpec::Fbm(1),
                ModelSpec::Fbm(3),
            ],
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn model_spec_parsing() {
        assert_eq!("pbct".parse::<ModelSpec>().unwrap(), ModelSpec::Pbct);
        assert_eq!("VBM".parse::<ModelSpec>().unwrap(), ModelSpec::Vbm);
        assert_eq!("fbm:2".parse::<ModelSpec>().unwrap(), ModelSpec::Fbm(2));
        assert!("fbm".parse::<ModelSpec>().is_err());
        assert!("fbm:x".parse::<ModelSpec>().is_err());
        for spec in [ModelSpec::Pbct, ModelSpec::Vbm, ModelSpec::Fbm(0)] {
            assert_eq!(spec.to_string().parse::<ModelSpec>().unwrap(), spec);
        }
    }

    #[test]
    fn burn_in_covers_deepest_model() {
        let config = small();
        assert_eq!(config.burn_in(), 3);
    }

    #[test]
    fn report_is_deterministic_and_ordered() {
        let config = small();
        let a = run_experiment(&config).unwrap();
        let b = run_experiment(&config).unwrap();
        assert_eq!(a.render(), b.render());
        let reps: Vec<usize> = a.rows.iter().map(|r| r.replicate).collect();
        assert!(reps.windows(2).all(|w| w[0] <= w[1]));
        for spec in &config.models {
            assert!(a.rows.iter().any(|r| r.model == spec.to_string()));
        }
    }

    #[test]
    fn leaf_budget_skips_fbm() {
        let config = ExperimentConfig {
            max_leaves: 10,
            ..small()
        };
        let report = run_experiment(&config).unwrap();
        let skipped: Vec<_> = report.rows.iter().filter(|r| r.model == "fbm:3").collect();
        assert_eq!(skipped.len(), config.replicates);
        assert!(skipped
            .iter()
            .all(|r| matches!(r.value, RowValue::Skipped(_))));
        assert!(report.render().contains("skipped: FBM-3 needs 3^3 leaves"));
    }

    #[test]
    fn delta_is_fitted_minus_simulated() {
        let report = run_experiment(&small()).unwrap();
        let sim = report.values(SIMULATED, "marginal_log_loss");
        let fit = report.values("pbct", "marginal_log_loss");
        let delta = report.values("pbct", "delta_log_loss");
        for i in 0..sim.len() {
            assert!((fit[i] - sim[i] - delta[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn validation() {
        let mut config = small();
        config.replicates = 0;
        assert!(run_experiment(&config).is_err());
        let mut config = small();
        config.n_test = 3;
        assert!(run_experiment(&config).is_err());
        let mut config = small();
        config.lambda = 1.5;
        assert!(run_experiment(&config).is_err());
    }

    #[test]
    fn summary_statistics() {
        let s = Summary::of(&[1.0, 2.0, 3.0, 10.0]).unwrap();
        assert_eq!(s.mean, 4.0);
        assert_eq!(s.median, 2.5);
        assert!((s.sd - (50.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert_eq!(Summary::of(&[5.0]).unwrap().sd, 0.0);
        assert!(Summary::of(&[]).is_none());
    }
}
