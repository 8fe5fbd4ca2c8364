use rand::Rng;
use rayon::prelude::*;

use crate::error::{Result, ScmError};
use crate::harness::config::{digest_text, ExperimentConfig, Method, PoolOrder};
use crate::harness::pool::{build_pool, build_test_set, InputPool};
use crate::learning::{
    draw_mask, dropout_predict, dropout_step_mut, ensemble_predict, l2_sgd_step_mut, sgd_step_mut,
    split_network, EnsembleSpec,
};
use crate::metrics::{mse, mse_iter, overlaps, ErrorPoint, OverlapSnapshot};
use crate::model::{init_weights, CommitteeMachine, InputVector};
use crate::rng::{substream, Purpose};

/// Pools up to this many stored components (`size * N`) are kept in memory
/// during a trial; larger pools are regenerated input by input.
const MATERIALIZE_LIMIT: usize = 1 << 25;

/// Error measurements of one run, or the pointwise mean of several.
#[derive(Clone, Debug, PartialEq)]
pub struct LearningCurve {
    pub points: Vec<ErrorPoint>,
    pub overlap_trace: Option<Vec<OverlapSnapshot>>,
    pub config_digest: String,
}

impl LearningCurve {
    pub fn last(&self) -> Option<&ErrorPoint> {
        self.points.last()
    }
}

/// Mean curve plus the per-trial curves it was computed from, in trial order.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentResult {
    pub mean: LearningCurve,
    pub trials: Vec<LearningCurve>,
}

enum Learner {
    One(CommitteeMachine),
    Many(EnsembleSpec),
}

impl Learner {
    fn init(config: &ExperimentConfig, trial_seed: u64) -> Result<Self> {
        let student = |member: usize, size: usize| {
            init_weights(
                config.n_inputs,
                size,
                &mut substream(trial_seed, Purpose::Student, member as u64),
            )
        };
        match config.method {
            Method::Ensemble => {
                let members = split_network(config.k_student, config.k_en)?
                    .into_iter()
                    .enumerate()
                    .map(|(j, size)| student(j, size))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Learner::Many(EnsembleSpec::uniform(members)?))
            }
            Method::Single => {
                let size = split_network(config.k_student, config.k_en)?[0];
                Ok(Learner::One(student(0, size)?))
            }
            Method::Sgd | Method::Dropout | Method::L2 => {
                Ok(Learner::One(student(0, config.k_student)?))
            }
        }
    }

    fn predict(&self, config: &ExperimentConfig, x: &InputVector) -> Result<f64> {
        match (self, config.method) {
            (Learner::Many(ens), _) => ensemble_predict(ens, x),
            // Keep fraction 1 - p: equals p at p = 0.5 and the plain output at p = 0.
            (Learner::One(m), Method::Dropout) => dropout_predict(m, 1.0 - config.p, x),
            (Learner::One(m), _) => m.forward(x),
        }
    }

    fn snapshot_machine(&self) -> Result<CommitteeMachine> {
        match self {
            Learner::One(m) => Ok(m.clone()),
            Learner::Many(ens) => CommitteeMachine::concat(ens.members()),
        }
    }
}

/// Inputs of a pool, either stored or regenerated per access.
enum PoolView<'a> {
    Stored(Vec<(InputVector, f64)>),
    Lazy(&'a InputPool),
}

impl<'a> PoolView<'a> {
    fn new(pool: &'a InputPool) -> Self {
        if pool.pool_size().saturating_mul(pool.n_inputs()) <= MATERIALIZE_LIMIT {
            PoolView::Stored(pool.materialize())
        } else {
            PoolView::Lazy(pool)
        }
    }

    fn with_sample<T>(&self, index: usize, f: impl FnOnce(&InputVector, f64) -> T) -> T {
        match self {
            PoolView::Stored(data) => f(&data[index].0, data[index].1),
            PoolView::Lazy(pool) => f(&pool.input(index), pool.target(index)),
        }
    }

    fn mse(&self, predictor: impl FnMut(&InputVector) -> Result<f64>) -> Result<f64> {
        match self {
            PoolView::Stored(data) => mse(predictor, data),
            PoolView::Lazy(pool) => mse_iter(predictor, pool.samples()),
        }
    }
}

/// Runs one trial: teacher, students, pool and test set are all drawn from
/// substreams of `trial_seed`, so the result depends on nothing else.
pub fn run_trial(config: &ExperimentConfig, trial_seed: u64) -> Result<LearningCurve> {
    config.validate()?;
    let n = config.n_inputs;

    let teacher = init_weights(
        n,
        config.k_teacher,
        &mut substream(trial_seed, Purpose::Teacher, 0),
    )?;
    let mut learner = Learner::init(config, trial_seed)?;
    let pool = build_pool(config, &teacher, trial_seed)?;
    let test = build_test_set(config, &teacher, trial_seed)?;
    let train_view = PoolView::new(&pool);
    let test_view = PoolView::new(&test);

    let mut presentation = substream(trial_seed, Purpose::Presentation, 0);
    let mut mask_rng = substream(trial_seed, Purpose::DropoutMask, 0);

    let grid = config.grid_len();
    let mut points = Vec::with_capacity(grid);
    let mut trace = config.record_overlaps.then(Vec::new);

    let mut measure = |learner: &Learner, j: usize| -> Result<()> {
        let t_time = j as f64 * config.measure_every;
        let predict = |x: &InputVector| learner.predict(config, x);
        points.push(ErrorPoint {
            t_time,
            mse_learn: train_view.mse(predict)?,
            mse_test: test_view.mse(predict)?,
        });
        if let Some(trace) = trace.as_mut() {
            trace.push(overlaps(&learner.snapshot_machine()?, &teacher, t_time)?);
        }
        Ok(())
    };

    let total = config.total_steps();
    let mut next_point = 0usize;
    for m in 0..=total {
        while next_point < grid && config.grid_step(next_point) == m {
            measure(&learner, next_point)?;
            next_point += 1;
        }
        if m == total {
            break;
        }
        let index = match config.pool_order {
            PoolOrder::Random => presentation.random_range(0..config.pool_size),
            PoolOrder::Cyclic => (m % config.pool_size as u64) as usize,
        };
        train_view.with_sample(index, |x, target| -> Result<()> {
            match (&mut learner, config.method) {
                (Learner::Many(ens), _) => {
                    for member in ens.members_mut() {
                        sgd_step_mut(member, target, x, config.eta)?;
                    }
                }
                (Learner::One(student), Method::Dropout) => {
                    let mask = draw_mask(student.n_hidden(), config.p, &mut mask_rng)?;
                    dropout_step_mut(student, &mask, target, x, config.eta)?;
                }
                (Learner::One(student), Method::L2) => {
                    l2_sgd_step_mut(student, target, x, config.eta, config.alpha)?;
                }
                (Learner::One(student), _) => sgd_step_mut(student, target, x, config.eta)?,
            }
            Ok(())
        })?;
    }

    Ok(LearningCurve {
        points,
        overlap_trace: trace,
        config_digest: digest_text(&format!(
            "{}trial_seed = {trial_seed}\n",
            crate::cli::config_text::render(config)
        )),
    })
}

/// Pointwise arithmetic mean of curves measured on the same grid.
pub fn average_curves(curves: &[LearningCurve], config_digest: String) -> Result<LearningCurve> {
    let first = curves
        .first()
        .ok_or_else(|| ScmError::InvalidArgument("no curves to average".into()))?;
    let len = first.points.len();
    if let Some(c) = curves.iter().find(|c| c.points.len() != len) {
        return Err(ScmError::DimensionMismatch {
            expected: len,
            found: c.points.len(),
        });
    }
    let count = curves.len() as f64;
    let points = (0..len)
        .map(|j| {
            let (learn, test) = curves.iter().fold((0.0, 0.0), |(l, t), c| {
                (l + c.points[j].mse_learn, t + c.points[j].mse_test)
            });
            ErrorPoint {
                t_time: first.points[j].t_time,
                mse_learn: learn / count,
                mse_test: test / count,
            }
        })
        .collect();
    Ok(LearningCurve {
        points,
        overlap_trace: None,
        config_digest,
    })
}

/// Runs `config.trials` trials sequentially; trial `i` uses seed `seed + i`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    run_experiment_with_threads(config, 1)
}

/// Like [`run_experiment`], with trials spread over `threads` workers.
/// The result does not depend on `threads`.
pub fn run_experiment_with_threads(
    config: &ExperimentConfig,
    threads: usize,
) -> Result<ExperimentResult> {
    config.validate()?;
    let seeds: Vec<u64> = (0..config.trials as u64)
        .map(|i| config.seed.wrapping_add(i))
        .collect();
    let trials = if threads <= 1 {
        seeds
            .iter()
            .map(|&s| run_trial(config, s))
            .collect::<Result<Vec<_>>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| ScmError::InvalidArgument(format!("thread pool: {e}")))?;
        pool.install(|| {
            seeds
                .par_iter()
                .map(|&s| run_trial(config, s))
                .collect::<Result<Vec<_>>>()
        })?
    };
    let mean = average_curves(&trials, config.digest())?;
    Ok(ExperimentResult { mean, trials })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(method: Method) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(20, 2, 4, method, 0.5, 60);
        c.duration = 3.0;
        c.measure_every = 0.5;
        c.seed = 11;
        c
    }

    #[test]
    fn zero_duration_gives_initial_point() {
        let mut c = small(Method::Sgd);
        c.duration = 0.0;
        let curve = run_trial(&c, 5).unwrap();
        assert_eq!(curve.points.len(), 1);
        let p = curve.points[0];
        assert_eq!(p.t_time, 0.0);

        // Recompute the initial errors directly.
        let teacher = init_weights(20, 2, &mut substream(5, Purpose::Teacher, 0)).unwrap();
        let student = init_weights(20, 4, &mut substream(5, Purpose::Student, 0)).unwrap();
        let pool = build_pool(&c, &teacher, 5).unwrap().materialize();
        let test = build_test_set(&c, &teacher, 5).unwrap().materialize();
        assert_eq!(p.mse_learn, mse(|x| student.forward(x), &pool).unwrap());
        assert_eq!(p.mse_test, mse(|x| student.forward(x), &test).unwrap());
    }

    #[test]
    fn grid_times_are_exact() {
        let curve = run_trial(&small(Method::Dropout), 1).unwrap();
        assert_eq!(curve.points.len(), 7);
        for (j, p) in curve.points.iter().enumerate() {
            assert_eq!(p.t_time, j as f64 * 0.5);
        }
    }

    #[test]
    fn trials_are_deterministic() {
        for method in Method::ALL {
            let mut c = small(method);
            c.p = 0.5;
            c.k_en = 2;
            c.alpha = 1e-3;
            c.record_overlaps = true;
            let a = run_trial(&c, 3).unwrap();
            let b = run_trial(&c, 3).unwrap();
            assert_eq!(a, b, "{method}");
            assert_eq!(a.overlap_trace.as_ref().unwrap().len(), a.points.len());
        }
    }

    #[test]
    fn dropout_without_dropping_is_sgd() {
        let sgd = run_trial(&small(Method::Sgd), 2).unwrap();
        let drop = run_trial(&small(Method::Dropout), 2).unwrap();
        let l2 = run_trial(&small(Method::L2), 2).unwrap();
        assert_eq!(sgd.points, drop.points);
        assert_eq!(sgd.points, l2.points);
    }

    #[test]
    fn single_is_first_ensemble_member_and_k_en_one_is_sgd() {
        let mut single = small(Method::Single);
        single.k_en = 1;
        assert_eq!(
            run_trial(&single, 4).unwrap().points,
            run_trial(&small(Method::Sgd), 4).unwrap().points
        );
        let mut ens = small(Method::Ensemble);
        ens.k_en = 1;
        assert_eq!(
            run_trial(&ens, 4).unwrap().points,
            run_trial(&small(Method::Sgd), 4).unwrap().points
        );
    }

    #[test]
    fn ensemble_rejects_bad_split() {
        let mut c = small(Method::Ensemble);
        c.k_en = 3;
        assert!(run_trial(&c, 0).is_err());
    }

    #[test]
    fn experiment_averaging() {
        let mut c = small(Method::Sgd);
        c.trials = 1;
        let one = run_experiment(&c).unwrap();
        assert_eq!(one.mean.points, one.trials[0].points);

        c.trials = 3;
        let res = run_experiment(&c).unwrap();
        assert_eq!(res.trials.len(), 3);
        assert_eq!(res.trials[0].points, one.trials[0].points);
        let j = 4;
        let hand = (res.trials[0].points[j].mse_test
            + res.trials[1].points[j].mse_test
            + res.trials[2].points[j].mse_test)
            / 3.0;
        assert!((res.mean.points[j].mse_test - hand).abs() < 1e-12);

        let threaded = run_experiment_with_threads(&c, 2).unwrap();
        assert_eq!(threaded, res);
    }

    #[test]
    fn averaging_identical_curves_is_identity() {
        let curve = run_trial(&small(Method::Sgd), 9).unwrap();
        let avg = average_curves(&[curve.clone(), curve.clone()], "x".into()).unwrap();
        assert_eq!(avg.points, curve.points);
        assert!(average_curves(&[], "x".into()).is_err());
    }

    #[test]
    fn cyclic_order_differs_from_random() {
        let mut c = small(Method::Sgd);
        let random = run_trial(&c, 1).unwrap();
        c.pool_order = PoolOrder::Cyclic;
        let cyclic = run_trial(&c, 1).unwrap();
        assert_eq!(random.points[0], cyclic.points[0]);
        assert_ne!(random.points, cyclic.points);
    }
}
