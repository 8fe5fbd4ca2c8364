use crate::error::{Result, ScmError};
use crate::harness::config::ExperimentConfig;
use crate::model::{sample_input, CommitteeMachine, InputVector};
use crate::rng::{Purpose, StreamKey};

/// A fixed set of inputs with their teacher targets.
///
/// Only the targets are stored. Input `i` is regenerated on demand from
/// its own substream, so it is bit-identical on every call and memory is
/// linear in the pool size.
#[derive(Clone, Debug)]
pub struct InputPool {
    seed: u64,
    purpose: Purpose,
    key: StreamKey,
    n_inputs: usize,
    targets: Vec<f64>,
}

impl InputPool {
    /// Samples `size` inputs under `(seed, purpose)` and labels them with `teacher`.
    pub fn generate(
        teacher: &CommitteeMachine,
        seed: u64,
        purpose: Purpose,
        size: usize,
    ) -> Result<Self> {
        let key = StreamKey::new(seed, purpose);
        let n_inputs = teacher.n_inputs();
        let targets = (0..size)
            .map(|i| teacher.forward(&sample_input(n_inputs, &mut key.stream(i as u64))))
            .collect::<Result<Vec<_>>>()?;
        Ok(InputPool {
            seed,
            purpose,
            key,
            n_inputs,
            targets,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn purpose(&self) -> Purpose {
        self.purpose
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn pool_size(&self) -> usize {
        self.targets.len()
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn target(&self, index: usize) -> f64 {
        self.targets[index]
    }

    /// Regenerates input `index`.
    pub fn input(&self, index: usize) -> InputVector {
        assert!(
            index < self.targets.len(),
            "pool index {index} out of range"
        );
        sample_input(self.n_inputs, &mut self.key.stream(index as u64))
    }

    /// Regenerates every `(input, target)` pair, in index order.
    pub fn samples(&self) -> impl Iterator<Item = (InputVector, f64)> + '_ {
        (0..self.pool_size()).map(|i| (self.input(i), self.targets[i]))
    }

    /// All pairs held in memory at once.
    pub fn materialize(&self) -> Vec<(InputVector, f64)> {
        self.samples().collect()
    }
}

/// The training pool of one trial: `pool_size` inputs labelled by `teacher`.
pub fn build_pool(
    config: &ExperimentConfig,
    teacher: &CommitteeMachine,
    trial_seed: u64,
) -> Result<InputPool> {
    check_teacher(config, teacher)?;
    InputPool::generate(teacher, trial_seed, Purpose::PoolInputs, config.pool_size)
}

/// The fresh test set of one trial, never used for updates.
pub fn build_test_set(
    config: &ExperimentConfig,
    teacher: &CommitteeMachine,
    trial_seed: u64,
) -> Result<InputPool> {
    check_teacher(config, teacher)?;
    InputPool::generate(teacher, trial_seed, Purpose::TestInputs, config.test_size())
}

fn check_teacher(config: &ExperimentConfig, teacher: &CommitteeMachine) -> Result<()> {
    if teacher.n_inputs() != config.n_inputs {
        return Err(ScmError::DimensionMismatch {
            expected: config.n_inputs,
            found: teacher.n_inputs(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::Method;
    use crate::model::init_weights;
    use crate::rng::seeded;
    use rand::Rng;

    fn setup() -> (ExperimentConfig, CommitteeMachine) {
        let config = ExperimentConfig::new(20, 2, 3, Method::Sgd, 0.1, 200);
        let teacher = init_weights(20, 2, &mut seeded(1)).unwrap();
        (config, teacher)
    }

    #[test]
    fn pool_is_deterministic() {
        let (config, teacher) = setup();
        let a = build_pool(&config, &teacher, 9).unwrap();
        let b = build_pool(&config, &teacher, 9).unwrap();
        assert_eq!(a.targets(), b.targets());
        let c = build_pool(&config, &teacher, 10).unwrap();
        assert_ne!(a.targets(), c.targets());
        assert_eq!(a.pool_size(), 200);
    }

    #[test]
    fn regenerated_input_matches_target() {
        let (config, teacher) = setup();
        let pool = build_pool(&config, &teacher, 3).unwrap();
        let t0 = teacher.forward(&pool.input(0)).unwrap();
        assert!((t0 - pool.target(0)).abs() < 1e-12);
    }

    #[test]
    fn regeneration_is_bit_identical() {
        let (config, teacher) = setup();
        let pool = build_pool(&config, &teacher, 4).unwrap();
        let all = pool.materialize();
        let mut rng = seeded(5);
        for _ in 0..100 {
            let i = rng.random_range(0..pool.pool_size());
            let again = pool.input(i);
            let bits =
                |x: &InputVector| x.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
            assert_eq!(bits(&again), bits(&all[i].0));
        }
    }

    #[test]
    fn test_set_is_independent_of_pool() {
        let (config, teacher) = setup();
        let pool = build_pool(&config, &teacher, 4).unwrap();
        let test = build_test_set(&config, &teacher, 4).unwrap();
        assert_eq!(test.pool_size(), 20);
        assert_ne!(pool.input(0), test.input(0));
    }

    #[test]
    fn rejects_mismatched_teacher() {
        let (config, _) = setup();
        let teacher = init_weights(21, 2, &mut seeded(1)).unwrap();
        assert!(build_pool(&config, &teacher, 0).is_err());
    }
}
