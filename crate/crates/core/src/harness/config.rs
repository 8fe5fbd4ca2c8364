use std::fmt;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::error::{Result, ScmError};

/// Training rule (and matching inference rule) of an experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    /// Plain online SGD on one machine of `k_student` units.
    Sgd,
    /// Dropout training, output scaled by the keep fraction at inference.
    Dropout,
    /// SGD with weight decay `alpha`.
    L2,
    /// `k_en` machines of `k_student / k_en` units trained independently
    /// and averaged.
    Ensemble,
    /// Plain SGD on one machine of `k_student / k_en` units: the baseline
    /// for an ensemble with the same settings.
    Single,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Sgd,
        Method::Dropout,
        Method::L2,
        Method::Ensemble,
        Method::Single,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Sgd => "sgd",
            Method::Dropout => "dropout",
            Method::L2 => "l2",
            Method::Ensemble => "ensemble",
            Method::Single => "single",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| {
                format!("unknown method `{s}` (expected sgd, dropout, l2, ensemble or single)")
            })
    }
}

/// How the next training example is picked from the pool.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum PoolOrder {
    /// Uniformly at random with replacement.
    #[default]
    Random,
    /// Index `m mod P`.
    Cyclic,
}

impl PoolOrder {
    pub fn as_str(self) -> &'static str {
        match self {
            PoolOrder::Random => "random",
            PoolOrder::Cyclic => "cyclic",
        }
    }
}

impl FromStr for PoolOrder {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "random" => Ok(PoolOrder::Random),
            "cyclic" => Ok(PoolOrder::Cyclic),
            _ => Err(format!(
                "unknown pool order `{s}` (expected random or cyclic)"
            )),
        }
    }
}

/// Everything needed to reproduce one experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub n_inputs: usize,
    pub k_teacher: usize,
    pub k_student: usize,
    pub method: Method,
    pub eta: f64,
    pub p: f64,
    pub alpha: f64,
    pub k_en: usize,
    pub pool_size: usize,
    /// Size of the fresh test set; `None` means `n_inputs`.
    pub test_size: Option<usize>,
    pub duration: f64,
    pub trials: usize,
    pub measure_every: f64,
    pub seed: u64,
    pub record_overlaps: bool,
    pub pool_order: PoolOrder,
    /// Plot learning-set error next to test error.
    pub plot_learn: bool,
}

impl ExperimentConfig {
    pub const DEFAULT_DURATION: f64 = 100.0;

    /// A configuration with the documented defaults for every optional field.
    pub fn new(
        n_inputs: usize,
        k_teacher: usize,
        k_student: usize,
        method: Method,
        eta: f64,
        pool_size: usize,
    ) -> Self {
        ExperimentConfig {
            n_inputs,
            k_teacher,
            k_student,
            method,
            eta,
            p: 0.0,
            alpha: 0.0,
            k_en: 1,
            pool_size,
            test_size: None,
            duration: Self::DEFAULT_DURATION,
            trials: 1,
            measure_every: 1.0,
            seed: 0,
            record_overlaps: false,
            pool_order: PoolOrder::Random,
            plot_learn: false,
        }
    }

    pub fn test_size(&self) -> usize {
        self.test_size.unwrap_or(self.n_inputs)
    }

    /// Hidden units of each trained machine.
    pub fn member_size(&self) -> usize {
        match self.method {
            Method::Ensemble | Method::Single => self.k_student / self.k_en.max(1),
            _ => self.k_student,
        }
    }

    /// Number of online steps, `round(duration * N)`.
    pub fn total_steps(&self) -> u64 {
        (self.duration * self.n_inputs as f64).round() as u64
    }

    /// Number of points on the measurement grid `t_j = j * measure_every`.
    pub fn grid_len(&self) -> usize {
        (self.duration / self.measure_every + 1e-9).floor() as usize + 1
    }

    /// Online step at which grid point `j` is measured.
    pub fn grid_step(&self, j: usize) -> u64 {
        (j as f64 * self.measure_every * self.n_inputs as f64).round() as u64
    }

    /// Checks single-field ranges; returns the offending key and a message.
    pub(crate) fn field_error(&self) -> Option<(&'static str, String)> {
        let positive = [
            ("n_inputs", self.n_inputs),
            ("k_teacher", self.k_teacher),
            ("k_student", self.k_student),
            ("k_en", self.k_en),
            ("pool_size", self.pool_size),
            ("trials", self.trials),
        ];
        for (key, v) in positive {
            if v == 0 {
                return Some((key, "must be at least 1".into()));
            }
        }
        if self.test_size == Some(0) {
            return Some(("test_size", "must be at least 1".into()));
        }
        if !(self.eta.is_finite() && self.eta > 0.0) {
            return Some(("eta", format!("must be positive, got {}", self.eta)));
        }
        if !(0.0..1.0).contains(&self.p) {
            return Some(("p", format!("must lie in [0, 1), got {}", self.p)));
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Some(("alpha", format!("must be non-negative, got {}", self.alpha)));
        }
        if !(self.duration.is_finite() && self.duration >= 0.0) {
            return Some((
                "duration",
                format!("must be non-negative, got {}", self.duration),
            ));
        }
        if !(self.measure_every.is_finite() && self.measure_every > 0.0) {
            return Some((
                "measure_every",
                format!("must be positive, got {}", self.measure_every),
            ));
        }
        None
    }

    /// Checks combinations of fields.
    pub(crate) fn combination_error(&self) -> Option<(&'static str, String)> {
        if matches!(self.method, Method::Ensemble | Method::Single)
            && !self.k_student.is_multiple_of(self.k_en)
        {
            return Some((
                "k_en",
                format!(
                    "k_en = {} does not divide k_student = {}",
                    self.k_en, self.k_student
                ),
            ));
        }
        None
    }

    pub fn validate(&self) -> Result<()> {
        match self.field_error().or_else(|| self.combination_error()) {
            Some((key, msg)) => Err(ScmError::InvalidConfig(format!("{key} {msg}"))),
            None => Ok(()),
        }
    }

    /// Short stable identifier of this configuration.
    pub fn digest(&self) -> String {
        digest_text(&crate::cli::config_text::render(self))
    }
}

pub(crate) fn digest_text(text: &str) -> String {
    let hash = Sha256::digest(text.as_bytes());
    hash[..8].iter().map(|b| format!("{b:02x}")).collect()
}
