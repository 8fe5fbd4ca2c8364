//! Soft committee machines: representation, activation and sampling.
//!
//! A committee machine has `n_hidden` perceptron units over `n_inputs`
//! inputs. Its output is the plain sum of the hidden activations; the
//! hidden-to-output weights are all +1 and are not stored.

use std::f64::consts::FRAC_1_SQRT_2;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Result, ScmError};
use crate::linalg;

/// `sqrt(2 / pi)`, the slope of the activation at the origin.
const SQRT_2_OVER_PI: f64 = 0.797_884_560_802_865_4;

/// Hidden-unit output function `g(x) = erf(x / sqrt(2))`.
///
/// For `x >= 0` this is the probability that a standard Gaussian falls in
/// `[-x, x]`; it is odd, increasing and bounded by 1 in magnitude.
#[inline]
pub fn activation(x: f64) -> f64 {
    libm::erf(x * FRAC_1_SQRT_2)
}

/// Derivative of [`activation`]: `sqrt(2 / pi) * exp(-x^2 / 2)`.
#[inline]
pub fn activation_deriv(x: f64) -> f64 {
    SQRT_2_OVER_PI * (-0.5 * x * x).exp()
}

/// One input pattern.
#[derive(Clone, Debug, PartialEq)]
pub struct InputVector(Vec<f64>);

impl InputVector {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if let Some(bad) = components.iter().find(|c| !c.is_finite()) {
            return Err(ScmError::InvalidArgument(format!(
                "input component {bad} is not finite"
            )));
        }
        Ok(InputVector(components))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for InputVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Distribution of freshly initialized weights: Gaussian, mean 0, variance `1/N`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightInitSpec {
    pub mean: f64,
    pub variance: f64,
}

impl WeightInitSpec {
    pub fn for_inputs(n_inputs: usize) -> Self {
        WeightInitSpec {
            mean: 0.0,
            variance: 1.0 / n_inputs as f64,
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }
}

/// Weight rows of a soft committee machine, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CommitteeMachine {
    n_inputs: usize,
    n_hidden: usize,
    weights: Vec<f64>,
}

impl CommitteeMachine {
    /// Builds a machine from explicit rows. Every row must have `n_inputs`
    /// finite components.
    pub fn from_rows(n_inputs: usize, rows: &[Vec<f64>]) -> Result<Self> {
        let mut weights = Vec::with_capacity(rows.len() * n_inputs);
        for row in rows {
            if row.len() != n_inputs {
                return Err(ScmError::DimensionMismatch {
                    expected: n_inputs,
                    found: row.len(),
                });
            }
            weights.extend_from_slice(row);
        }
        Self::from_flat(n_inputs, rows.len(), weights)
    }

    /// Builds a machine from `n_hidden * n_inputs` row-major weights.
    pub fn from_flat(n_inputs: usize, n_hidden: usize, weights: Vec<f64>) -> Result<Self> {
        if n_inputs == 0 || n_hidden == 0 {
            return Err(ScmError::InvalidArgument(
                "a committee machine needs at least one input and one hidden unit".into(),
            ));
        }
        if weights.len() != n_inputs * n_hidden {
            return Err(ScmError::DimensionMismatch {
                expected: n_inputs * n_hidden,
                found: weights.len(),
            });
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(ScmError::InvalidArgument("weights must be finite".into()));
        }
        Ok(CommitteeMachine {
            n_inputs,
            n_hidden,
            weights,
        })
    }

    pub fn zeros(n_inputs: usize, n_hidden: usize) -> Result<Self> {
        Self::from_flat(n_inputs, n_hidden, vec![0.0; n_inputs * n_hidden])
    }

    /// Stacks the rows of several machines over the same inputs.
    pub fn concat(machines: &[CommitteeMachine]) -> Result<Self> {
        let first = machines.first().ok_or(ScmError::EmptyEnsemble)?;
        let mut weights = Vec::new();
        for m in machines {
            if m.n_inputs != first.n_inputs {
                return Err(ScmError::DimensionMismatch {
                    expected: first.n_inputs,
                    found: m.n_inputs,
                });
            }
            weights.extend_from_slice(&m.weights);
        }
        let n_hidden = weights.len() / first.n_inputs;
        Self::from_flat(first.n_inputs, n_hidden, weights)
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn n_hidden(&self) -> usize {
        self.n_hidden
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.weights[k * self.n_inputs..(k + 1) * self.n_inputs]
    }

    pub(crate) fn row_mut(&mut self, k: usize) -> &mut [f64] {
        &mut self.weights[k * self.n_inputs..(k + 1) * self.n_inputs]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.weights.chunks_exact(self.n_inputs)
    }

    /// Row-major view of all weights.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub(crate) fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() == self.n_inputs {
            Ok(())
        } else {
            Err(ScmError::DimensionMismatch {
                expected: self.n_inputs,
                found: x.len(),
            })
        }
    }

    /// Writes the inner potential of every hidden unit into `out`.
    /// Sizes must already have been checked.
    pub(crate) fn potentials_into(&self, x: &[f64], out: &mut [f64]) {
        for (slot, row) in out.iter_mut().zip(self.rows()) {
            *slot = linalg::dot(row, x);
        }
    }

    /// Inner potentials `y_k = J_k . x` of all hidden units.
    pub fn inner_potentials(&self, x: &InputVector) -> Result<Vec<f64>> {
        self.check_input(x.as_slice())?;
        let mut out = vec![0.0; self.n_hidden];
        self.potentials_into(x.as_slice(), &mut out);
        Ok(out)
    }

    /// Network output: the sum of hidden activations.
    pub fn forward(&self, x: &InputVector) -> Result<f64> {
        self.forward_slice(x.as_slice())
    }

    pub(crate) fn forward_slice(&self, x: &[f64]) -> Result<f64> {
        self.check_input(x)?;
        Ok(self
            .rows()
            .fold(0.0, |acc, row| acc + activation(linalg::dot(row, x))))
    }
}

/// Draws an input of `n` independent standard Gaussian components.
pub fn sample_input<R: Rng + ?Sized>(n: usize, rng: &mut R) -> InputVector {
    InputVector((0..n).map(|_| rng.sample(StandardNormal)).collect())
}

/// Draws a machine whose weights are independent Gaussians with variance `1/n`.
///
/// Used for teachers and for initial students alike.
pub fn init_weights<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<CommitteeMachine> {
    let std_dev = WeightInitSpec::for_inputs(n.max(1)).std_dev();
    let weights = (0..n * k)
        .map(|_| std_dev * rng.sample::<f64, _>(StandardNormal))
        .collect();
    CommitteeMachine::from_flat(n, k, weights)
}
