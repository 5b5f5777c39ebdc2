use serde::{Deserialize, Serialize};

use super::accept::{check_acceptable, Acceptability};
use super::problems::{ProblemDef, ProblemName};
use crate::linear::{Dataset, FeatureCache, Model};
use crate::scalar::Scalar;
use crate::stats::median;

/// Result of one independent run, reduced to its selected model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub accepted: bool,
    /// The run aborted; it counts towards no measure.
    #[serde(default)]
    pub failed: bool,
    /// Selected model with its coefficients inlined.
    pub expression: Option<String>,
    #[serde(with = "lossless")]
    pub c_train: f64,
    #[serde(with = "lossless")]
    pub c_constr: f64,
    #[serde(with = "lossless_opt")]
    pub mad: Option<f64>,
    #[serde(with = "lossless_opt")]
    pub msd: Option<f64>,
    #[serde(with = "lossless_opt")]
    pub viol_grid: Option<f64>,
    #[serde(with = "lossless_opt")]
    pub mse_test: Option<f64>,
}

impl RunRecord {
    pub fn failed() -> Self {
        RunRecord {
            accepted: false,
            failed: true,
            expression: None,
            c_train: f64::INFINITY,
            c_constr: f64::INFINITY,
            mad: None,
            msd: None,
            viol_grid: None,
            mse_test: None,
        }
    }
}

/// Aggregate measures over the runs of one method.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub n_runs: usize,
    pub n_failed: usize,
    /// Runs that produced an acceptable model.
    pub nb_succ: usize,
    /// No run was accepted, so the medians cover every run's selected model.
    pub fallback: bool,
    /// Median training error.
    #[serde(with = "lossless_opt")]
    pub mse: Option<f64>,
    /// Median mean squared deviation from the reference over the validation grid.
    #[serde(with = "lossless_opt")]
    pub mse_ref: Option<f64>,
    /// Median constraint objective.
    #[serde(with = "lossless_opt")]
    pub viol: Option<f64>,
    #[serde(with = "lossless_opt")]
    pub mse_test: Option<f64>,
}

/// Quantity minimized when choosing among a run's final models.
fn selection_key(problem: &ProblemDef, acc: &Acceptability, c_train: f64) -> f64 {
    let k = match problem.name {
        ProblemName::Resistance2 => acc.mad.unwrap_or(f64::INFINITY),
        ProblemName::Magman => acc.msd.unwrap_or(f64::INFINITY),
        ProblemName::Pressure | ProblemName::External => c_train,
    };
    if k.is_nan() {
        f64::INFINITY
    } else {
        k
    }
}

/// Picks the model a run reports: the acceptable model with the least
/// MAD (resistance2), MSD (magman) or training error (otherwise), or the
/// model minimizing the same quantity when none is acceptable.
///
/// Ties go to the earliest model. Returns the chosen index with its record.
pub fn select_model<T: Scalar>(
    models: &[Model<T>],
    problem: &ProblemDef,
    test: Option<&Dataset<T>>,
) -> Option<(usize, RunRecord)> {
    let checked: Vec<(Acceptability, f64)> = models
        .iter()
        .map(|m| {
            let acc = check_acceptable(m, problem);
            let key = selection_key(problem, &acc, m.scores_or_sentinel().c_train.as_f64());
            (acc, key)
        })
        .collect();
    let any_accepted = checked.iter().any(|(a, _)| a.acceptable);
    let (best, _) = checked
        .iter()
        .enumerate()
        .filter(|(_, (a, _))| a.acceptable || !any_accepted)
        .min_by(|(_, (_, k1)), (_, (_, k2))| k1.total_cmp(k2))?;
    let model = &models[best];
    let scores = model.scores_or_sentinel();
    let acc = checked[best].0;
    Some((
        best,
        RunRecord {
            accepted: acc.acceptable,
            failed: false,
            expression: Some(model.to_infix()),
            c_train: scores.c_train.as_f64(),
            c_constr: scores.c_constr.as_f64(),
            mad: acc.mad,
            msd: acc.msd,
            viol_grid: acc.viol_grid,
            mse_test: test.map(|t| FeatureCache::new(&model.genome, t, None).c_train(&model.beta, t).as_f64()),
        },
    ))
}

/// Success count and medians over accepted runs, or over every completed run when none is accepted.
pub fn performance_measures(runs: &[RunRecord]) -> RunReport {
    let done: Vec<&RunRecord> = runs.iter().filter(|r| !r.failed).collect();
    let accepted: Vec<&RunRecord> = done.iter().copied().filter(|r| r.accepted).collect();
    let fallback = accepted.is_empty();
    let pool = if fallback { &done } else { &accepted };
    let med = |f: fn(&RunRecord) -> Option<f64>| {
        let v: Vec<f64> = pool.iter().filter_map(|r| f(r)).collect();
        median(&v)
    };
    RunReport {
        n_runs: runs.len(),
        n_failed: runs.len() - done.len(),
        nb_succ: accepted.len(),
        fallback,
        mse: med(|r| Some(r.c_train)),
        mse_ref: med(|r| r.msd),
        viol: med(|r| Some(r.c_constr)),
        mse_test: med(|r| r.mse_test),
    }
}

/// JSON numbers for finite values, strings `"inf"`, `"-inf"` and `"nan"` otherwise.
pub mod lossless {
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        encode(*v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        decode(Repr::deserialize(d)?).map_err(D::Error::custom)
    }

    fn encode(v: f64) -> Repr {
        if v.is_finite() {
            Repr::Num(v)
        } else if v.is_nan() {
            Repr::Text("nan".into())
        } else if v > 0.0 {
            Repr::Text("inf".into())
        } else {
            Repr::Text("-inf".into())
        }
    }

    fn decode(r: Repr) -> Result<f64, String> {
        match r {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(format!("expected a number, got `{other}`")),
            },
        }
    }

    pub(super) fn encode_opt(v: Option<f64>) -> Option<impl Serialize> {
        v.map(encode)
    }

    pub(super) fn decode_opt<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        Option::<Repr>::deserialize(d)?.map(decode).transpose().map_err(D::Error::custom)
    }
}

mod lossless_opt {
    use serde::{Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        super::lossless::encode_opt(*v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        super::lossless::decode_opt(d)
    }
}
