//! Exhaustive hyperparameter search ranked on the validation set.

use serde::{Deserialize, Serialize};

use super::features::FeatureConfig;
use super::train::{train, TrainConfig};
use super::ClassifierError;
use crate::corpus::Dataset;
use crate::metrics::{confusion, macro_f1_ex_none, mcc_multiclass};

/// Candidate values per [`TrainConfig`] field. Empty lists are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ParamGrid {
    pub learning_rate: Vec<f64>,
    pub epochs: Vec<usize>,
    pub batch_size: Vec<usize>,
    pub l2: Vec<f64>,
    pub hash_dimension: Vec<usize>,
    pub use_class_weights: Vec<bool>,
    pub seed: Vec<u64>,
    pub features: FeatureConfig,
}

impl Default for ParamGrid {
    fn default() -> Self {
        let base = TrainConfig::default();
        ParamGrid {
            learning_rate: vec![base.learning_rate],
            epochs: vec![base.epochs],
            batch_size: vec![base.batch_size],
            l2: vec![base.l2],
            hash_dimension: vec![base.hash_dimension],
            use_class_weights: vec![base.use_class_weights],
            seed: vec![base.seed],
            features: base.features,
        }
    }
}

impl ParamGrid {
    pub fn len(&self) -> usize {
        self.learning_rate.len()
            * self.epochs.len()
            * self.batch_size.len()
            * self.l2.len()
            * self.hash_dimension.len()
            * self.use_class_weights.len()
            * self.seed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cartesian product; the last field varies fastest.
    pub fn configs(&self) -> Vec<TrainConfig> {
        let mut out = Vec::with_capacity(self.len());
        for &learning_rate in &self.learning_rate {
            for &epochs in &self.epochs {
                for &batch_size in &self.batch_size {
                    for &l2 in &self.l2 {
                        for &hash_dimension in &self.hash_dimension {
                            for &use_class_weights in &self.use_class_weights {
                                for &seed in &self.seed {
                                    out.push(TrainConfig {
                                        learning_rate,
                                        epochs,
                                        batch_size,
                                        seed,
                                        hash_dimension,
                                        use_class_weights,
                                        l2,
                                        features: self.features,
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum GridOutcome {
    Ok { val_macro_f1: f64, val_mcc: f64 },
    Failed { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderboardRow {
    /// 1-based rank; absent for failed cells.
    pub rank: Option<usize>,
    /// Position of the config in the grid expansion.
    pub index: usize,
    pub config: TrainConfig,
    pub outcome: GridOutcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    pub best: TrainConfig,
    /// Ranked cells first, failed cells after in grid order.
    pub leaderboard: Vec<LeaderboardRow>,
}

impl GridResult {
    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "rank", "index", "learning_rate", "epochs", "batch_size", "l2", "hash_dimension",
            "use_class_weights", "seed", "status", "val_macro_f1", "val_mcc",
        ])
        .expect("in-memory write");
        for row in &self.leaderboard {
            let c = &row.config;
            let (status, f1, mcc) = match &row.outcome {
                GridOutcome::Ok { val_macro_f1, val_mcc } => {
                    ("ok".to_string(), val_macro_f1.to_string(), val_mcc.to_string())
                }
                GridOutcome::Failed { reason } => (format!("failed: {reason}"), String::new(), String::new()),
            };
            w.write_record([
                row.rank.map(|r| r.to_string()).unwrap_or_default(),
                row.index.to_string(),
                c.learning_rate.to_string(),
                c.epochs.to_string(),
                c.batch_size.to_string(),
                c.l2.to_string(),
                c.hash_dimension.to_string(),
                c.use_class_weights.to_string(),
                c.seed.to_string(),
                status,
                f1,
                mcc,
            ])
            .expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }
}

/// Trains every grid cell and ranks by validation macro-F1, then MCC, then
/// grid position. Failing cells are recorded and left unranked.
pub fn grid_search(train_set: &Dataset, val: &Dataset, grid: &ParamGrid) -> Result<GridResult, ClassifierError> {
    if grid.is_empty() {
        return Err(ClassifierError::InvalidConfig("grid has no configurations".into()));
    }
    if val.is_empty() {
        return Err(ClassifierError::EmptyDataset);
    }
    let golds = val.labels();
    let mut rows: Vec<LeaderboardRow> = grid
        .configs()
        .into_iter()
        .enumerate()
        .map(|(index, config)| {
            let outcome = match train(train_set, val, &config) {
                Ok(out) => {
                    let preds: Vec<_> = val.items.iter().map(|i| out.model.predict(&i.pair).label).collect();
                    let m = confusion(&golds, &preds).expect("val is non-empty and aligned");
                    GridOutcome::Ok {
                        val_macro_f1: macro_f1_ex_none(&m),
                        val_mcc: mcc_multiclass(&m).expect("val is non-empty"),
                    }
                }
                Err(e) => GridOutcome::Failed { reason: e.to_string() },
            };
            LeaderboardRow { rank: None, index, config, outcome }
        })
        .collect();

    rows.sort_by(|a, b| match (&a.outcome, &b.outcome) {
        (
            GridOutcome::Ok { val_macro_f1: fa, val_mcc: ma },
            GridOutcome::Ok { val_macro_f1: fb, val_mcc: mb },
        ) => fb.total_cmp(fa).then(mb.total_cmp(ma)).then(a.index.cmp(&b.index)),
        (GridOutcome::Ok { .. }, GridOutcome::Failed { .. }) => std::cmp::Ordering::Less,
        (GridOutcome::Failed { .. }, GridOutcome::Ok { .. }) => std::cmp::Ordering::Greater,
        _ => a.index.cmp(&b.index),
    });
    let mut rank = 0;
    for row in &mut rows {
        if matches!(row.outcome, GridOutcome::Ok { .. }) {
            rank += 1;
            row.rank = Some(rank);
        }
    }
    let best = rows
        .first()
        .filter(|r| r.rank.is_some())
        .map(|r| r.config)
        .ok_or_else(|| ClassifierError::InvalidConfig("every grid configuration failed".into()))?;
    Ok(GridResult { best, leaderboard: rows })
}
