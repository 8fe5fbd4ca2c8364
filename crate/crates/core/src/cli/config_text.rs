//! The `key = value` experiment description format.
//!
//! One assignment per line; `#` starts a comment; blank lines are ignored.
//! A line `[label]` opens a named section. Keys before the first section
//! are shared by every section, and each section may override them. A text
//! without sections describes a single experiment.
//!
//! Required keys: `n_inputs`, `k_teacher`, `k_student`, `method`, `eta`,
//! `pool_size`. Defaults for the rest: `p = 0`, `alpha = 0`, `k_en = 1`,
//! `test_size = n_inputs`, `duration = 100`, `trials = 1`,
//! `measure_every = 1`, `seed = 0`, `record_overlaps = false`,
//! `pool_order = random`, `plot_learn = false`.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Result, ScmError};
use crate::harness::{ExperimentConfig, LabeledConfig, Method, PoolOrder};

const REQUIRED: [&str; 6] = [
    "n_inputs",
    "k_teacher",
    "k_student",
    "method",
    "eta",
    "pool_size",
];

struct Entry<'a> {
    line: usize,
    key: &'a str,
    value: &'a str,
}

fn syntax(line: usize, message: impl Into<String>) -> ScmError {
    ScmError::ConfigSyntax {
        line,
        message: message.into(),
    }
}

/// Section label, its header line, and its entries.
type Section<'a> = (String, usize, Vec<Entry<'a>>);

/// Splits the text into the shared entries and the labelled sections.
fn tokenize(text: &str) -> Result<(Vec<Entry<'_>>, Vec<Section<'_>>)> {
    let mut shared = Vec::new();
    let mut sections: Vec<Section<'_>> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let label = rest
                .strip_suffix(']')
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .ok_or_else(|| syntax(line, format!("malformed section header `{content}`")))?;
            if sections.iter().any(|(l, _, _)| l == label) {
                return Err(syntax(line, format!("duplicate section `{label}`")));
            }
            sections.push((label.to_string(), line, Vec::new()));
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .filter(|(k, v)| !k.is_empty() && !v.is_empty())
            .ok_or_else(|| syntax(line, format!("expected `key = value`, found `{content}`")))?;
        let entry = Entry { line, key, value };
        match sections.last_mut() {
            Some((_, _, entries)) => entries.push(entry),
            None => shared.push(entry),
        }
    }
    Ok((shared, sections))
}

fn parse_count(e: &Entry<'_>) -> Result<usize> {
    let v: usize = e.value.parse().map_err(|_| {
        syntax(
            e.line,
            format!(
                "{} must be a non-negative integer, got `{}`",
                e.key, e.value
            ),
        )
    })?;
    if v == 0 {
        return Err(syntax(e.line, format!("{} must be at least 1", e.key)));
    }
    Ok(v)
}

fn parse_real(e: &Entry<'_>, ok: impl Fn(f64) -> bool, range: &str) -> Result<f64> {
    let v: f64 = e.value.parse().map_err(|_| {
        syntax(
            e.line,
            format!("{} must be a number, got `{}`", e.key, e.value),
        )
    })?;
    if !v.is_finite() || !ok(v) {
        return Err(syntax(
            e.line,
            format!("{} = {} is out of range: {range}", e.key, e.value),
        ));
    }
    Ok(v)
}

fn parse_bool(e: &Entry<'_>) -> Result<bool> {
    match e.value {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(syntax(
            e.line,
            format!("{} must be true or false, got `{other}`", e.key),
        )),
    }
}

fn apply(config: &mut ExperimentConfig, e: &Entry<'_>) -> Result<()> {
    match e.key {
        "n_inputs" => config.n_inputs = parse_count(e)?,
        "k_teacher" => config.k_teacher = parse_count(e)?,
        "k_student" => config.k_student = parse_count(e)?,
        "k_en" => config.k_en = parse_count(e)?,
        "pool_size" => config.pool_size = parse_count(e)?,
        "test_size" => config.test_size = Some(parse_count(e)?),
        "trials" => config.trials = parse_count(e)?,
        "method" => config.method = e.value.parse::<Method>().map_err(|m| syntax(e.line, m))?,
        "pool_order" => {
            config.pool_order = e
                .value
                .parse::<PoolOrder>()
                .map_err(|m| syntax(e.line, m))?
        }
        "eta" => config.eta = parse_real(e, |v| v > 0.0, "must be > 0")?,
        "p" => config.p = parse_real(e, |v| (0.0..1.0).contains(&v), "must lie in [0, 1)")?,
        "alpha" => config.alpha = parse_real(e, |v| v >= 0.0, "must be >= 0")?,
        "duration" => config.duration = parse_real(e, |v| v >= 0.0, "must be >= 0")?,
        "measure_every" => config.measure_every = parse_real(e, |v| v > 0.0, "must be > 0")?,
        "seed" => {
            config.seed = e.value.parse().map_err(|_| {
                syntax(
                    e.line,
                    format!("seed must be an unsigned 64-bit integer, got `{}`", e.value),
                )
            })?
        }
        "record_overlaps" => config.record_overlaps = parse_bool(e)?,
        "plot_learn" => config.plot_learn = parse_bool(e)?,
        other => return Err(syntax(e.line, format!("unknown key `{other}`"))),
    }
    Ok(())
}

fn build(shared: &[Entry<'_>], own: &[Entry<'_>], end_line: usize) -> Result<ExperimentConfig> {
    let mut config = ExperimentConfig::new(1, 1, 1, Method::Sgd, 1.0, 1);
    let mut lines: HashMap<&str, usize> = HashMap::new();
    let mut own_keys: HashMap<&str, usize> = HashMap::new();
    for (group, entries) in [(0, shared), (1, own)] {
        let mut seen: HashMap<&str, usize> = HashMap::new();
        for e in entries {
            if let Some(first) = seen.insert(e.key, e.line) {
                return Err(syntax(
                    e.line,
                    format!("duplicate key `{}` (first set on line {first})", e.key),
                ));
            }
            apply(&mut config, e)?;
            lines.insert(e.key, e.line);
            if group == 1 {
                own_keys.insert(e.key, e.line);
            }
        }
    }
    if let Some(missing) = REQUIRED.iter().find(|k| !lines.contains_key(*k)) {
        return Err(ScmError::MissingKey(missing.to_string()));
    }
    if let Some((key, message)) = config.combination_error() {
        let line = lines
            .get(key)
            .or_else(|| lines.get("k_student"))
            .copied()
            .unwrap_or(end_line);
        return Err(syntax(line, message));
    }
    Ok(config)
}

/// Parses a single experiment. Section headers are rejected.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let (shared, sections) = tokenize(text)?;
    if let Some((_, line, _)) = sections.first() {
        return Err(syntax(
            *line,
            "sections are only allowed in experiment sets",
        ));
    }
    build(&shared, &[], text.lines().count())
}

/// Parses a text that may hold several labelled experiments. A text without
/// sections yields one experiment with an empty label.
pub fn parse_config_set(text: &str) -> Result<Vec<LabeledConfig>> {
    let (shared, sections) = tokenize(text)?;
    let end = text.lines().count();
    if sections.is_empty() {
        return Ok(vec![LabeledConfig {
            label: String::new(),
            config: build(&shared, &[], end)?,
        }]);
    }
    sections
        .iter()
        .map(|(label, _, entries)| {
            Ok(LabeledConfig {
                label: label.clone(),
                config: build(&shared, entries, end)?,
            })
        })
        .collect()
}

/// Canonical text of one experiment; parses back to an equal config.
pub fn render(config: &ExperimentConfig) -> String {
    let mut out = String::new();
    let mut kv = |k: &str, v: &dyn std::fmt::Display| {
        let _ = writeln!(out, "{k} = {v}");
    };
    kv("n_inputs", &config.n_inputs);
    kv("k_teacher", &config.k_teacher);
    kv("k_student", &config.k_student);
    kv("method", &config.method);
    kv("eta", &config.eta);
    kv("p", &config.p);
    kv("alpha", &config.alpha);
    kv("k_en", &config.k_en);
    kv("pool_size", &config.pool_size);
    if let Some(size) = config.test_size {
        kv("test_size", &size);
    }
    kv("duration", &config.duration);
    kv("trials", &config.trials);
    kv("measure_every", &config.measure_every);
    kv("seed", &config.seed);
    kv("record_overlaps", &config.record_overlaps);
    kv("pool_order", &config.pool_order.as_str());
    kv("plot_learn", &config.plot_learn);
    out
}

/// Canonical text of a set of labelled experiments.
pub fn render_set(runs: &[LabeledConfig]) -> String {
    if let [only] = runs {
        if only.label.is_empty() {
            return render(&only.config);
        }
    }
    let mut out = String::new();
    for (i, run) in runs.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "[{}]", run.label);
        out.push_str(&render(&run.config));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::preset;
    use proptest::prelude::*;

    const FIG4_DROPOUT: &str = "n_inputs = 1000\nk_teacher = 2\nk_student = 100\nmethod = dropout\np = 0.5\neta = 0.01\npool_size = 1000\nseed = 42";

    #[test]
    fn parses_dropout_arm() {
        let c = parse_config(FIG4_DROPOUT).unwrap();
        let fig4 = preset("fig4").unwrap();
        let arm = fig4.get("dropout").unwrap();
        assert_eq!(c.n_inputs, arm.n_inputs);
        assert_eq!(c.k_teacher, arm.k_teacher);
        assert_eq!(c.k_student, arm.k_student);
        assert_eq!(c.method, arm.method);
        assert_eq!(c.p, arm.p);
        assert_eq!(c.eta, arm.eta);
        assert_eq!(c.pool_size, arm.pool_size);
        assert_eq!(c.seed, 42);
        assert_eq!(c.duration, ExperimentConfig::DEFAULT_DURATION);
    }

    #[test]
    fn empty_text_is_missing_keys() {
        assert!(matches!(parse_config(""), Err(ScmError::MissingKey(_))));
    }

    #[test]
    fn range_errors_carry_line_numbers() {
        match parse_config("p = 1.5") {
            Err(ScmError::ConfigSyntax { line: 1, message }) => {
                assert!(message.contains("out of range"))
            }
            other => panic!("{other:?}"),
        }
        match parse_config("# header\n\nn_inputs = 0\n") {
            Err(ScmError::ConfigSyntax { line: 3, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_and_unknown_lines() {
        assert!(matches!(
            parse_config("n_inputs 10"),
            Err(ScmError::ConfigSyntax { line: 1, .. })
        ));
        assert!(matches!(
            parse_config("\nfoo = 1"),
            Err(ScmError::ConfigSyntax { line: 2, .. })
        ));
        assert!(matches!(
            parse_config("method = adam"),
            Err(ScmError::ConfigSyntax { line: 1, .. })
        ));
        assert!(matches!(
            parse_config("eta = x"),
            Err(ScmError::ConfigSyntax { line: 1, .. })
        ));
        assert!(matches!(
            parse_config("seed = 1\nseed = 2"),
            Err(ScmError::ConfigSyntax { line: 2, .. })
        ));
        assert!(matches!(
            parse_config("[a]\nseed = 1"),
            Err(ScmError::ConfigSyntax { line: 1, .. })
        ));
    }

    #[test]
    fn combination_error_points_at_k_en() {
        let text = "n_inputs = 10\nk_teacher = 2\nk_student = 5\nmethod = ensemble\neta = 0.1\npool_size = 10\nk_en = 2\n";
        match parse_config(text) {
            Err(ScmError::ConfigSyntax { line: 7, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn comments_and_sections() {
        let text = "# shared\nn_inputs = 10 # inline\nk_teacher = 2\nk_student = 4\neta = 0.1\npool_size = 10\nmethod = sgd\n\n[a]\nseed = 3\n[b]\nmethod = dropout\np = 0.5\n";
        let set = parse_config_set(text).unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!(set[0].label, "a");
        assert_eq!(set[0].config.seed, 3);
        assert_eq!(set[1].config.method, Method::Dropout);
        assert_eq!(set[1].config.n_inputs, 10);
        assert!(parse_config_set("[a]\n[a]\n").is_err());
        assert!(parse_config_set("[]\n").is_err());
    }

    #[test]
    fn presets_render_and_parse_back() {
        for name in preset::PRESET_NAMES {
            let runs = preset::preset(name).unwrap().runs;
            assert_eq!(
                parse_config_set(&render_set(&runs)).unwrap(),
                runs,
                "{name}"
            );
        }
    }

    fn arb_config() -> impl Strategy<Value = ExperimentConfig> {
        (
            (
                1usize..5000,
                1usize..10,
                1usize..20,
                0usize..5,
                1e-6f64..10.0,
            ),
            (
                0.0f64..0.999,
                0.0f64..1.0,
                1usize..10,
                1usize..100_000,
                proptest::option::of(1usize..1000),
            ),
            (
                0.0f64..1000.0,
                1usize..20,
                1e-3f64..10.0,
                any::<u64>(),
                any::<bool>(),
                any::<bool>(),
                any::<bool>(),
            ),
        )
            .prop_map(
                |(
                    (n, kt, ks, m, eta),
                    (p, alpha, k_en, pool, test),
                    (dur, trials, every, seed, ov, cyc, pl),
                )| {
                    let mut c = ExperimentConfig::new(n, kt, ks, Method::ALL[m], eta, pool);
                    c.p = p;
                    c.alpha = alpha;
                    c.k_en = if matches!(c.method, Method::Ensemble | Method::Single) {
                        1
                    } else {
                        k_en
                    };
                    c.test_size = test;
                    c.duration = dur;
                    c.trials = trials;
                    c.measure_every = every;
                    c.seed = seed;
                    c.record_overlaps = ov;
                    c.pool_order = if cyc {
                        PoolOrder::Cyclic
                    } else {
                        PoolOrder::Random
                    };
                    c.plot_learn = pl;
                    c
                },
            )
    }

    proptest! {
        #[test]
        fn render_round_trips(config in arb_config()) {
            prop_assert_eq!(parse_config(&render(&config)).unwrap(), config);
        }
    }
}
