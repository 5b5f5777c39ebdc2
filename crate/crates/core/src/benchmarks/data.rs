use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::problems::{population_std, ProblemDef, ProblemName};
use crate::linear::Dataset;
use crate::rng::RandomStream;
use crate::scalar::Scalar;

/// Share of valve openings drawn from the low range `[0, 40]` for the pressure problem.
pub const PRESSURE_LOW_SHARE: f64 = 0.7;
pub const PRESSURE_LOW_RANGE: f64 = 40.0;

/// Synthesizes the training set and, when the problem holds some data out, the test set.
///
/// Noise per problem, scaled by `data.noise`:
/// * resistance2: every input column and the target get Gaussian noise with
///   standard deviation `noise` times that column's standard deviation over
///   the drawn samples;
/// * magman: target noise with `noise` times the standard deviation of the clean targets;
/// * pressure: target noise with absolute standard deviation `noise`.
///
/// The last `floor(test_fraction * n)` samples form the test set.
///
/// # Panics
/// For external problems, which have no data generator.
pub fn generate_data<T: Scalar>(problem: &ProblemDef, rng: &mut RandomStream) -> (Dataset<T>, Option<Dataset<T>>) {
    let dp = &problem.data;
    let truth = problem.ground_truth;
    let mut xs: Vec<Vec<f64>> = (0..dp.n_samples)
        .map(|_| match problem.name {
            ProblemName::Pressure => {
                let (lo, hi) = dp.sample_box[0];
                let (ulo, uhi) = dp.sample_box[1];
                let p = rng.random_range(lo..=hi);
                let u = if rng.random_bool(PRESSURE_LOW_SHARE) {
                    rng.random_range(ulo..=PRESSURE_LOW_RANGE)
                } else {
                    rng.random_range(PRESSURE_LOW_RANGE..=uhi)
                };
                vec![p, u]
            }
            _ => dp.sample_box.iter().map(|&(lo, hi)| rng.random_range(lo..=hi)).collect(),
        })
        .collect();
    let mut ys: Vec<f64> = xs.iter().map(|x| truth(x)).collect();

    if dp.noise > 0.0 {
        let mut perturb = |values: &mut dyn Iterator<Item = &mut f64>, std: f64| {
            if let Ok(n) = Normal::new(0.0, std) {
                for v in values {
                    *v += n.sample(rng);
                }
            }
        };
        match problem.name {
            ProblemName::Resistance2 => {
                for d in 0..problem.n_inputs() {
                    let col: Vec<f64> = xs.iter().map(|x| x[d]).collect();
                    perturb(&mut xs.iter_mut().map(|x| &mut x[d]), dp.noise * population_std(&col));
                }
                let std = dp.noise * population_std(&ys);
                perturb(&mut ys.iter_mut(), std);
            }
            ProblemName::Magman => {
                let std = dp.noise * population_std(&ys);
                perturb(&mut ys.iter_mut(), std);
            }
            ProblemName::Pressure | ProblemName::External => perturb(&mut ys.iter_mut(), dp.noise),
        }
    }

    let n_test = (dp.test_fraction * dp.n_samples as f64).floor() as usize;
    let n_train = dp.n_samples - n_test;
    let cast = |rows: &[Vec<f64>], t: &[f64]| {
        Dataset::new(
            rows.iter().map(|r| r.iter().map(|&v| T::lit(v)).collect()).collect(),
            t.iter().map(|&v| T::lit(v)).collect(),
        )
        .expect("generated data are nonempty and rectangular")
    };
    let train = cast(&xs[..n_train], &ys[..n_train]);
    let test = (n_test > 0).then(|| cast(&xs[n_train..], &ys[n_train..]));
    (train, test)
}
