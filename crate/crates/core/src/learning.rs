//! Online update rules and inference-time output combiners.
//!
//! All four rules share one kernel: compute the error signal from the
//! units that take part in this step, then move each participating row
//! along `(eta / N) * delta * g'(y_k) * x`. Plain SGD is the kernel with no
//! dropped units and no decay, so the rules agree bit-for-bit when dropout
//! and decay are switched off.

use rand::Rng;

use crate::error::{Result, ScmError};
use crate::linalg;
use crate::model::{activation, activation_deriv, CommitteeMachine, InputVector};

/// Hidden units excluded from one dropout iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct DropoutMask {
    k_hidden: usize,
    p: f64,
    // Sorted, unique, all < k_hidden.
    dropped: Vec<usize>,
}

impl DropoutMask {
    /// Number of units dropped out of `k_hidden` at probability `p`.
    pub fn dropped_count(k_hidden: usize, p: f64) -> usize {
        (p * k_hidden as f64).round() as usize
    }

    /// Builds a mask from explicit indices, checking every invariant.
    pub fn new(k_hidden: usize, p: f64, mut dropped: Vec<usize>) -> Result<Self> {
        check_train_probability(p)?;
        dropped.sort_unstable();
        if let Some(&bad) = dropped.iter().find(|&&i| i >= k_hidden) {
            return Err(ScmError::InvalidMask(format!(
                "index {bad} is out of range for {k_hidden} hidden units"
            )));
        }
        if dropped.windows(2).any(|w| w[0] == w[1]) {
            return Err(ScmError::InvalidMask("duplicate index".into()));
        }
        let expected = Self::dropped_count(k_hidden, p);
        if dropped.len() != expected {
            return Err(ScmError::InvalidMask(format!(
                "{} dropped units, expected round({p} * {k_hidden}) = {expected}",
                dropped.len()
            )));
        }
        Ok(DropoutMask {
            k_hidden,
            p,
            dropped,
        })
    }

    /// The mask that drops nothing.
    pub fn empty(k_hidden: usize) -> Self {
        DropoutMask {
            k_hidden,
            p: 0.0,
            dropped: Vec::new(),
        }
    }

    pub fn k_hidden(&self) -> usize {
        self.k_hidden
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn dropped(&self) -> &[usize] {
        &self.dropped
    }

    pub fn contains(&self, unit: usize) -> bool {
        self.dropped.binary_search(&unit).is_ok()
    }

    fn active_flags(&self) -> Vec<bool> {
        let mut active = vec![true; self.k_hidden];
        for &d in &self.dropped {
            active[d] = false;
        }
        active
    }
}

fn check_train_probability(p: f64) -> Result<()> {
    if (0.0..1.0).contains(&p) {
        Ok(())
    } else {
        Err(ScmError::InvalidProbability(p))
    }
}

fn check_rate(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(ScmError::InvalidArgument(format!(
            "{name} must be finite and non-negative, got {value}"
        )))
    }
}

/// Draws `round(p * k_hidden)` distinct units uniformly without replacement.
pub fn draw_mask<R: Rng + ?Sized>(k_hidden: usize, p: f64, rng: &mut R) -> Result<DropoutMask> {
    check_train_probability(p)?;
    let amount = DropoutMask::dropped_count(k_hidden, p);
    let mut dropped = rand::seq::index::sample(rng, k_hidden, amount).into_vec();
    dropped.sort_unstable();
    Ok(DropoutMask {
        k_hidden,
        p,
        dropped,
    })
}

/// The shared update kernel. `active[k] == false` freezes row `k` and
/// removes it from the error signal.
fn update_rows(
    student: &mut CommitteeMachine,
    active: Option<&[bool]>,
    teacher_output: f64,
    x: &[f64],
    eta: f64,
    alpha: f64,
) {
    let k = student.n_hidden();
    let is_active = |unit: usize| active.is_none_or(|flags| flags[unit]);

    let mut potentials = vec![0.0; k];
    let mut output = 0.0;
    for (unit, y) in potentials.iter_mut().enumerate() {
        if is_active(unit) {
            *y = linalg::dot(student.row(unit), x);
            output += activation(*y);
        }
    }

    let scale = eta / student.n_inputs() as f64 * (teacher_output - output);
    for (unit, &y) in potentials.iter().enumerate() {
        if !is_active(unit) {
            continue;
        }
        let coef = scale * activation_deriv(y);
        let row = student.row_mut(unit);
        if alpha == 0.0 {
            linalg::axpy(coef, x, row);
        } else {
            for (w, &xi) in row.iter_mut().zip(x) {
                let old = *w;
                *w = (old + coef * xi) - alpha * old;
            }
        }
    }
}

/// Plain online gradient step, in place.
pub fn sgd_step_mut(
    student: &mut CommitteeMachine,
    teacher_output: f64,
    x: &InputVector,
    eta: f64,
) -> Result<()> {
    check_rate("eta", eta)?;
    student.check_input(x.as_slice())?;
    update_rows(student, None, teacher_output, x.as_slice(), eta, 0.0);
    Ok(())
}

/// Plain online gradient step: every row moves by
/// `(eta / N) (t - s) g'(y_k) x` with `s` the full student output.
pub fn sgd_step(
    student: &CommitteeMachine,
    teacher_output: f64,
    x: &InputVector,
    eta: f64,
) -> Result<CommitteeMachine> {
    let mut next = student.clone();
    sgd_step_mut(&mut next, teacher_output, x, eta)?;
    Ok(next)
}

/// Dropout step, in place. Rows in the mask are left untouched.
pub fn dropout_step_mut(
    student: &mut CommitteeMachine,
    mask: &DropoutMask,
    teacher_output: f64,
    x: &InputVector,
    eta: f64,
) -> Result<()> {
    check_rate("eta", eta)?;
    student.check_input(x.as_slice())?;
    if mask.k_hidden() != student.n_hidden() {
        return Err(ScmError::InvalidMask(format!(
            "mask is for {} hidden units, student has {}",
            mask.k_hidden(),
            student.n_hidden()
        )));
    }
    if mask.dropped().is_empty() {
        update_rows(student, None, teacher_output, x.as_slice(), eta, 0.0);
    } else {
        let active = mask.active_flags();
        update_rows(
            student,
            Some(&active),
            teacher_output,
            x.as_slice(),
            eta,
            0.0,
        );
    }
    Ok(())
}

/// Dropout step: the error signal is computed from the surviving units
/// only, and only the surviving rows are updated.
pub fn dropout_step(
    student: &CommitteeMachine,
    mask: &DropoutMask,
    teacher_output: f64,
    x: &InputVector,
    eta: f64,
) -> Result<CommitteeMachine> {
    let mut next = student.clone();
    dropout_step_mut(&mut next, mask, teacher_output, x, eta)?;
    Ok(next)
}

/// Inference after dropout training: `scale * sum_k g(y_k)` over all units.
///
/// Dropped rows were frozen during their step, so their current weights
/// are their pre-step weights and one scaled sum covers both the learned
/// and the not-learned units.
pub fn dropout_predict(student: &CommitteeMachine, p: f64, x: &InputVector) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(ScmError::InvalidProbability(p));
    }
    Ok(p * student.forward(x)?)
}

/// SGD with weight decay, in place.
pub fn l2_sgd_step_mut(
    student: &mut CommitteeMachine,
    teacher_output: f64,
    x: &InputVector,
    eta: f64,
    alpha: f64,
) -> Result<()> {
    check_rate("eta", eta)?;
    check_rate("alpha", alpha)?;
    student.check_input(x.as_slice())?;
    update_rows(student, None, teacher_output, x.as_slice(), eta, alpha);
    Ok(())
}

/// SGD increment followed by subtracting `alpha * J_k` from every row,
/// where `J_k` is the row before the step.
pub fn l2_sgd_step(
    student: &CommitteeMachine,
    teacher_output: f64,
    x: &InputVector,
    eta: f64,
    alpha: f64,
) -> Result<CommitteeMachine> {
    let mut next = student.clone();
    l2_sgd_step_mut(&mut next, teacher_output, x, eta, alpha)?;
    Ok(next)
}

/// Independently trained machines combined by fixed weights.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleSpec {
    members: Vec<CommitteeMachine>,
    combine_weights: Vec<f64>,
}

impl EnsembleSpec {
    pub fn new(members: Vec<CommitteeMachine>, combine_weights: Vec<f64>) -> Result<Self> {
        let first = members.first().ok_or(ScmError::EmptyEnsemble)?;
        if members.len() != combine_weights.len() {
            return Err(ScmError::EnsembleWeights {
                members: members.len(),
                weights: combine_weights.len(),
            });
        }
        if combine_weights.iter().any(|c| !c.is_finite()) {
            return Err(ScmError::InvalidArgument(
                "ensemble weights must be finite".into(),
            ));
        }
        if let Some(m) = members.iter().find(|m| m.n_inputs() != first.n_inputs()) {
            return Err(ScmError::DimensionMismatch {
                expected: first.n_inputs(),
                found: m.n_inputs(),
            });
        }
        Ok(EnsembleSpec {
            members,
            combine_weights,
        })
    }

    /// Plain averaging, `C_k = 1 / K_en`.
    pub fn uniform(members: Vec<CommitteeMachine>) -> Result<Self> {
        let weight = 1.0 / members.len().max(1) as f64;
        let weights = vec![weight; members.len()];
        Self::new(members, weights)
    }

    pub fn members(&self) -> &[CommitteeMachine] {
        &self.members
    }

    pub fn members_mut(&mut self) -> &mut [CommitteeMachine] {
        &mut self.members
    }

    pub fn combine_weights(&self) -> &[f64] {
        &self.combine_weights
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Weighted ensemble output `sum_k C_k s_k`.
pub fn ensemble_predict(ens: &EnsembleSpec, x: &InputVector) -> Result<f64> {
    ens.members
        .iter()
        .zip(&ens.combine_weights)
        .try_fold(0.0, |acc, (member, c)| Ok(acc + c * member.forward(x)?))
}

/// Sizes of `k_en` equal sub-networks carved out of `total_hidden` units.
pub fn split_network(total_hidden: usize, k_en: usize) -> Result<Vec<usize>> {
    if total_hidden == 0 || k_en == 0 || !total_hidden.is_multiple_of(k_en) {
        return Err(ScmError::NonDivisibleSplit {
            total: total_hidden,
            parts: k_en,
        });
    }
    Ok(vec![total_hidden / k_en; k_en])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{init_weights, sample_input};
    use crate::rng::seeded;
    use proptest::prelude::*;
    use rand::Rng;

    /// `0.5 * g(1) * g'(0)`, evaluated at 30 digits.
    const HAND_INCREMENT: f64 = 0.272_353_702_799_265;

    fn bits(m: &CommitteeMachine) -> Vec<u64> {
        m.weights().iter().map(|w| w.to_bits()).collect()
    }

    fn random_case(
        seed: u64,
        n: usize,
        k_teacher: usize,
        k_student: usize,
    ) -> (CommitteeMachine, CommitteeMachine, InputVector) {
        let mut rng = seeded(seed);
        let teacher = init_weights(n, k_teacher, &mut rng).unwrap();
        let student = init_weights(n, k_student, &mut rng).unwrap();
        let x = sample_input(n, &mut rng);
        (teacher, student, x)
    }

    #[test]
    fn zero_rate_leaves_student_unchanged() {
        let (teacher, student, x) = random_case(1, 30, 2, 4);
        let t = teacher.forward(&x).unwrap();
        assert_eq!(
            bits(&sgd_step(&student, t, &x, 0.0).unwrap()),
            bits(&student)
        );
    }

    #[test]
    fn student_equal_to_teacher_is_a_fixed_point() {
        let (teacher, _, x) = random_case(2, 30, 3, 3);
        let t = teacher.forward(&x).unwrap();
        let next = sgd_step(&teacher, t, &x, 0.5).unwrap();
        assert_eq!(bits(&next), bits(&teacher));
    }

    #[test]
    fn sgd_hand_case() {
        let teacher = CommitteeMachine::from_rows(2, &[vec![1.0, 0.0]]).unwrap();
        let student = CommitteeMachine::zeros(2, 1).unwrap();
        let x = InputVector::new(vec![1.0, 1.0]).unwrap();
        let t = teacher.forward(&x).unwrap();
        let next = sgd_step(&student, t, &x, 1.0).unwrap();
        for &w in next.row(0) {
            assert!((w - HAND_INCREMENT).abs() < 1e-12, "{w}");
        }
    }

    #[test]
    fn rejects_mismatched_input_and_bad_rates() {
        let student = CommitteeMachine::zeros(3, 2).unwrap();
        let x = InputVector::new(vec![1.0, 1.0]).unwrap();
        assert!(matches!(
            sgd_step(&student, 0.0, &x, 0.1),
            Err(ScmError::DimensionMismatch { .. })
        ));
        let x = InputVector::new(vec![1.0, 1.0, 1.0]).unwrap();
        assert!(sgd_step(&student, 0.0, &x, -0.1).is_err());
        assert!(l2_sgd_step(&student, 0.0, &x, 0.1, -1.0).is_err());
        assert!(l2_sgd_step(&student, 0.0, &x, f64::NAN, 0.0).is_err());
    }

    /// Central-difference gradient of `0.5 (t - s)^2` with respect to row `k`.
    fn fd_gradient(student: &CommitteeMachine, t: f64, x: &InputVector, k: usize) -> Vec<f64> {
        let h = 1e-6;
        let loss = |m: &CommitteeMachine| 0.5 * (t - m.forward(x).unwrap()).powi(2);
        (0..student.n_inputs())
            .map(|i| {
                let mut w = student.weights().to_vec();
                let idx = k * student.n_inputs() + i;
                w[idx] += h;
                let plus = loss(
                    &CommitteeMachine::from_flat(student.n_inputs(), student.n_hidden(), w.clone())
                        .unwrap(),
                );
                w[idx] -= 2.0 * h;
                let minus = loss(
                    &CommitteeMachine::from_flat(student.n_inputs(), student.n_hidden(), w)
                        .unwrap(),
                );
                (plus - minus) / (2.0 * h)
            })
            .collect()
    }

    #[test]
    fn increment_is_negative_scaled_gradient() {
        let mut rng = seeded(77);
        for case in 0..40 {
            let n = rng.random_range(1..=20);
            let k = rng.random_range(1..=5);
            let (teacher, student, x) = random_case(1000 + case, n, 2, k);
            let t = teacher.forward(&x).unwrap();
            let eta = 0.7;
            let next = sgd_step(&student, t, &x, eta).unwrap();
            for unit in 0..k {
                let grad = fd_gradient(&student, t, &x, unit);
                let expected: Vec<f64> = grad.iter().map(|g| -eta / n as f64 * g).collect();
                let got: Vec<f64> = next
                    .row(unit)
                    .iter()
                    .zip(student.row(unit))
                    .map(|(a, b)| a - b)
                    .collect();
                let err = got
                    .iter()
                    .zip(&expected)
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>()
                    .sqrt();
                let scale = expected.iter().map(|v| v * v).sum::<f64>().sqrt();
                assert!(
                    err <= 1e-5 * scale + 1e-12,
                    "case {case} unit {unit}: {err} vs {scale}"
                );
            }
        }
    }

    #[test]
    fn draw_mask_cardinality_and_errors() {
        let mut rng = seeded(4);
        assert!(draw_mask(10, 0.0, &mut rng).unwrap().dropped().is_empty());
        assert_eq!(draw_mask(100, 0.5, &mut rng).unwrap().dropped().len(), 50);
        assert_eq!(draw_mask(7, 0.3, &mut rng).unwrap().dropped().len(), 2);
        assert!(matches!(
            draw_mask(10, 1.0, &mut rng),
            Err(ScmError::InvalidProbability(_))
        ));
        assert!(draw_mask(10, -0.1, &mut rng).is_err());
        let a = draw_mask(20, 0.5, &mut seeded(8)).unwrap();
        let b = draw_mask(20, 0.5, &mut seeded(8)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn draw_mask_is_uniform_over_units() {
        let mut rng = seeded(12);
        let mut counts = [0usize; 10];
        let draws = 10_000;
        for _ in 0..draws {
            for &d in draw_mask(10, 0.5, &mut rng).unwrap().dropped() {
                counts[d] += 1;
            }
        }
        for (unit, &c) in counts.iter().enumerate() {
            let frac = c as f64 / draws as f64;
            assert!((frac - 0.5).abs() < 0.02, "unit {unit}: {frac}");
        }
    }

    #[test]
    fn mask_constructor_validates() {
        assert!(DropoutMask::new(2, 0.5, vec![1]).is_ok());
        assert!(DropoutMask::new(2, 0.5, vec![2]).is_err());
        assert!(DropoutMask::new(4, 0.5, vec![1, 1]).is_err());
        assert!(DropoutMask::new(4, 0.5, vec![1]).is_err());
        assert!(DropoutMask::new(4, 1.0, vec![0, 1, 2, 3]).is_err());
    }

    #[test]
    fn empty_mask_matches_sgd_bitwise() {
        let (teacher, student, x) = random_case(5, 40, 2, 6);
        let t = teacher.forward(&x).unwrap();
        let a = sgd_step(&student, t, &x, 0.3).unwrap();
        let b = dropout_step(&student, &DropoutMask::empty(6), t, &x, 0.3).unwrap();
        let c = dropout_step(
            &student,
            &draw_mask(6, 0.0, &mut seeded(1)).unwrap(),
            t,
            &x,
            0.3,
        )
        .unwrap();
        let d = l2_sgd_step(&student, t, &x, 0.3, 0.0).unwrap();
        assert_eq!(bits(&a), bits(&b));
        assert_eq!(bits(&a), bits(&c));
        assert_eq!(bits(&a), bits(&d));
    }

    #[test]
    fn full_mask_freezes_everything() {
        let (teacher, student, x) = random_case(6, 10, 2, 2);
        let t = teacher.forward(&x).unwrap();
        let mask = DropoutMask::new(2, 0.75, vec![0, 1]).unwrap();
        let next = dropout_step(&student, &mask, t, &x, 1.0).unwrap();
        assert_eq!(bits(&next), bits(&student));
    }

    #[test]
    fn dropout_hand_case() {
        let teacher = CommitteeMachine::from_rows(2, &[vec![1.0, 0.0]]).unwrap();
        let student = CommitteeMachine::zeros(2, 2).unwrap();
        let x = InputVector::new(vec![1.0, 1.0]).unwrap();
        let t = teacher.forward(&x).unwrap();
        let mask = DropoutMask::new(2, 0.5, vec![1]).unwrap();
        let next = dropout_step(&student, &mask, t, &x, 1.0).unwrap();
        for &w in next.row(0) {
            assert!((w - HAND_INCREMENT).abs() < 1e-12);
        }
        assert_eq!(next.row(1), &[0.0, 0.0]);
    }

    #[test]
    fn dropout_rejects_foreign_mask() {
        let (teacher, student, x) = random_case(7, 10, 2, 4);
        let t = teacher.forward(&x).unwrap();
        let mask = DropoutMask::new(6, 0.5, vec![0, 4, 5]).unwrap();
        assert!(matches!(
            dropout_step(&student, &mask, t, &x, 1.0),
            Err(ScmError::InvalidMask(_))
        ));
    }

    #[test]
    fn dropout_predict_cases() {
        let (_, student, x) = random_case(8, 25, 2, 100);
        let full = student.forward(&x).unwrap();
        assert_eq!(dropout_predict(&student, 1.0, &x).unwrap(), full);
        assert!(dropout_predict(&student, 1.5, &x).is_err());

        // Two-sum oracle: learned units plus not-learned units, both scaled by p.
        let mask = draw_mask(100, 0.5, &mut seeded(3)).unwrap();
        let ys = student.inner_potentials(&x).unwrap();
        let (mut kept, mut dropped) = (0.0, 0.0);
        for (k, y) in ys.iter().enumerate() {
            if mask.contains(k) {
                dropped += activation(*y);
            } else {
                kept += activation(*y);
            }
        }
        let oracle = 0.5 * (kept + dropped);
        assert!((dropout_predict(&student, 0.5, &x).unwrap() - oracle).abs() < 1e-12);
        assert!((dropout_predict(&student, 0.5, &x).unwrap() - 0.5 * full).abs() < 1e-12);
    }

    #[test]
    fn dropout_predict_arithmetic() {
        // Potential y with g(y) = 0.5 exactly is not representable; use equal rows and compare.
        let row = vec![0.6744897501960817, 0.0];
        let student = CommitteeMachine::from_rows(2, &vec![row; 4]).unwrap();
        let x = InputVector::new(vec![1.0, 0.0]).unwrap();
        let g = activation(0.6744897501960817);
        assert!((g - 0.5).abs() < 1e-12);
        assert!((dropout_predict(&student, 0.5, &x).unwrap() - 1.0).abs() < 1e-11);
    }

    #[test]
    fn l2_cases() {
        let student = CommitteeMachine::from_rows(2, &[vec![1.0, 0.0]]).unwrap();
        let x = InputVector::new(vec![0.3, 0.4]).unwrap();
        let next = l2_sgd_step(&student, 0.2, &x, 0.0, 0.1).unwrap();
        assert!((next.row(0)[0] - 0.9).abs() < 1e-15);
        assert_eq!(next.row(0)[1], 0.0);

        // Decay alone shrinks the norm geometrically.
        let mut m = init_weights(20, 3, &mut seeded(1)).unwrap();
        let norm0: f64 = m.row(1).iter().map(|w| w * w).sum::<f64>().sqrt();
        let alpha = 0.05;
        for step in 1..=30 {
            l2_sgd_step_mut(
                &mut m,
                0.0,
                &sample_input(20, &mut seeded(step)),
                0.0,
                alpha,
            )
            .unwrap();
            let norm: f64 = m.row(1).iter().map(|w| w * w).sum::<f64>().sqrt();
            let expected = norm0 * (1.0 - alpha).powi(step as i32);
            assert!((norm - expected).abs() < 1e-12 * norm0, "step {step}");
        }
    }

    #[test]
    fn ensemble_cases() {
        let (_, a, x) = random_case(9, 12, 2, 3);
        let one = EnsembleSpec::new(vec![a.clone()], vec![1.0]).unwrap();
        assert_eq!(ensemble_predict(&one, &x).unwrap(), a.forward(&x).unwrap());

        let twin = EnsembleSpec::uniform(vec![a.clone(), a.clone()]).unwrap();
        assert!((ensemble_predict(&twin, &x).unwrap() - a.forward(&x).unwrap()).abs() < 1e-15);

        // Members with outputs 0.4 and 0.6.
        let inv = |v: f64| {
            let (mut lo, mut hi) = (0.0, 5.0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if activation(mid) < v {
                    lo = mid
                } else {
                    hi = mid
                }
            }
            lo
        };
        let x1 = InputVector::new(vec![1.0]).unwrap();
        let m04 = CommitteeMachine::from_rows(1, &[vec![inv(0.4)]]).unwrap();
        let m06 = CommitteeMachine::from_rows(1, &[vec![inv(0.6)]]).unwrap();
        let ens = EnsembleSpec::new(vec![m04, m06], vec![0.5, 0.5]).unwrap();
        assert!((ensemble_predict(&ens, &x1).unwrap() - 0.5).abs() < 1e-12);

        let b = CommitteeMachine::zeros(12, 3).unwrap();
        let mass = EnsembleSpec::new(vec![b.clone(), a.clone(), b], vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(ensemble_predict(&mass, &x).unwrap(), a.forward(&x).unwrap());
    }

    #[test]
    fn ensemble_errors() {
        assert!(matches!(
            EnsembleSpec::new(vec![], vec![]),
            Err(ScmError::EmptyEnsemble)
        ));
        let a = CommitteeMachine::zeros(3, 1).unwrap();
        let b = CommitteeMachine::zeros(4, 1).unwrap();
        assert!(EnsembleSpec::new(vec![a.clone()], vec![0.5, 0.5]).is_err());
        assert!(EnsembleSpec::new(vec![a.clone(), b], vec![0.5, 0.5]).is_err());
        assert!(EnsembleSpec::new(vec![a.clone()], vec![f64::NAN]).is_err());
        let ens = EnsembleSpec::uniform(vec![a]).unwrap();
        assert!(ensemble_predict(&ens, &InputVector::new(vec![1.0]).unwrap()).is_err());
    }

    #[test]
    fn split_network_cases() {
        assert_eq!(split_network(4, 2).unwrap(), vec![2, 2]);
        assert_eq!(split_network(100, 2).unwrap(), vec![50, 50]);
        assert_eq!(split_network(7, 1).unwrap(), vec![7]);
        assert!(matches!(
            split_network(7, 2),
            Err(ScmError::NonDivisibleSplit { .. })
        ));
        assert!(split_network(4, 0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn updates_are_permutation_equivariant(seed in 0u64..1000, shift in 1usize..6) {
            let k = 6;
            let (teacher, student, x) = random_case(seed, 9, 2, k);
            let t = teacher.forward(&x).unwrap();
            let perm: Vec<usize> = (0..k).map(|i| (i + shift) % k).collect();
            let permute = |m: &CommitteeMachine| {
                let rows: Vec<Vec<f64>> = perm.iter().map(|&j| m.row(j).to_vec()).collect();
                CommitteeMachine::from_rows(9, &rows).unwrap()
            };
            let mask = draw_mask(k, 0.5, &mut seeded(seed)).unwrap();
            // Unit j of the permuted machine is unit perm[j] of the original.
            let permuted_mask = DropoutMask::new(
                k,
                0.5,
                (0..k).filter(|&j| mask.contains(perm[j])).collect(),
            ).unwrap();
            let direct = dropout_step(&student, &mask, t, &x, 0.4).unwrap();
            let via = dropout_step(&permute(&student), &permuted_mask, t, &x, 0.4).unwrap();
            let direct_p = permute(&direct);
            for (a, b) in direct_p.weights().iter().zip(via.weights()) {
                prop_assert!((a - b).abs() < 1e-14);
            }
            let direct = l2_sgd_step(&student, t, &x, 0.4, 0.01).unwrap();
            let via = l2_sgd_step(&permute(&student), t, &x, 0.4, 0.01).unwrap();
            for (a, b) in permute(&direct).weights().iter().zip(via.weights()) {
                prop_assert!((a - b).abs() < 1e-14);
            }
        }

        #[test]
        fn dropped_rows_are_never_modified(seed in 0u64..1000, p in 0.0f64..0.95) {
            let (teacher, student, x) = random_case(seed, 11, 2, 8);
            let t = teacher.forward(&x).unwrap();
            let mask = draw_mask(8, p, &mut seeded(seed ^ 0xabc)).unwrap();
            prop_assert_eq!(mask.dropped().len(), DropoutMask::dropped_count(8, p));
            let next = dropout_step(&student, &mask, t, &x, 2.0).unwrap();
            for &d in mask.dropped() {
                let before: Vec<u64> = student.row(d).iter().map(|w| w.to_bits()).collect();
                let after: Vec<u64> = next.row(d).iter().map(|w| w.to_bits()).collect();
                prop_assert_eq!(before, after);
            }
        }

        #[test]
        fn dropout_predict_is_linear_in_p(seed in 0u64..1000, p in 0.0f64..=1.0) {
            let (_, student, x) = random_case(seed, 7, 2, 5);
            let full = student.forward(&x).unwrap();
            prop_assert!((dropout_predict(&student, p, &x).unwrap() - p * full).abs() <= 1e-15 * full.abs().max(1.0));
        }
    }
}
