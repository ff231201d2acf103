//! Flat `key = value` configuration documents.

use std::collections::BTreeMap;
use std::path::PathBuf;

use infohopf::{Error as ModelError, ModelParams};
use thiserror::Error;

pub const MODEL_KEYS: [&str; 9] = ModelParams::<f64>::FIELD_NAMES;

const OPTION_KEYS: [&str; 11] = [
    "command",
    "t_end",
    "steps_per_delay",
    "transient_fraction",
    "sweep_param",
    "sweep_min",
    "sweep_max",
    "sweep_count",
    "u0",
    "v0",
    "w0",
];

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, found `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key `{key}`")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: `{key}`: cannot parse `{value}` as {expected}")]
    InvalidValue {
        line: usize,
        key: String,
        value: String,
        expected: &'static str,
    },
    #[error("missing required keys: {}", .0.join(", "))]
    Missing(Vec<String>),
    #[error("`{key}`: {reason}")]
    Constraint { key: String, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Analyze,
    Critical,
    Direction,
    Simulate,
    Sweep,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Analyze => "analyze",
            Command::Critical => "critical",
            Command::Direction => "direction",
            Command::Simulate => "simulate",
            Command::Sweep => "sweep",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s.to_ascii_lowercase().as_str() {
            "analyze" => Command::Analyze,
            "critical" => Command::Critical,
            "direction" => Command::Direction,
            "simulate" => Command::Simulate,
            "sweep" => Command::Sweep,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateOptions {
    /// History point; `None` means 1% off `E*` in `u` and `v`.
    pub u0: Option<f64>,
    pub v0: Option<f64>,
    /// Explicit `w(0)`; `None` selects the consistent value.
    pub w0: Option<f64>,
    pub t_end: f64,
    pub steps_per_delay: usize,
    pub transient_fraction: f64,
}

impl Default for SimulateOptions {
    fn default() -> Self {
        Self {
            u0: None,
            v0: None,
            w0: None,
            t_end: 5000.0,
            steps_per_delay: 200,
            transient_fraction: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    pub param: String,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl SweepOptions {
    pub fn values(&self) -> Vec<f64> {
        let span = self.max - self.min;
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    self.max
                } else {
                    self.min + span * i as f64 / (self.count - 1) as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ModelParams<f64>,
    pub command: Command,
    pub simulate: SimulateOptions,
    pub sweep: Option<SweepOptions>,
    /// False when `s` was omitted; `params.s` is then zero and no verdict at
    /// the configured delay is reported.
    pub delay_given: bool,
    pub output_dir: PathBuf,
    pub plot: bool,
}

struct Entry {
    line: usize,
    value: String,
}

fn number(entries: &BTreeMap<String, Entry>, key: &str) -> Result<Option<f64>, ConfigError> {
    let Some(e) = entries.get(key) else { return Ok(None) };
    e.value
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .map(Some)
        .ok_or_else(|| ConfigError::InvalidValue {
            line: e.line,
            key: key.to_string(),
            value: e.value.clone(),
            expected: "a finite number",
        })
}

fn count(entries: &BTreeMap<String, Entry>, key: &str) -> Result<Option<usize>, ConfigError> {
    let Some(e) = entries.get(key) else { return Ok(None) };
    e.value
        .parse::<usize>()
        .map(Some)
        .map_err(|_| ConfigError::InvalidValue {
            line: e.line,
            key: key.to_string(),
            value: e.value.clone(),
            expected: "a non-negative integer",
        })
}

fn constraint(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Constraint {
        key: key.to_string(),
        reason: reason.into(),
    }
}

fn check_params(params: &ModelParams<f64>) -> Result<(), ConfigError> {
    params.validate().map_err(|e| match e {
        ModelError::InvalidParameter { name, reason } => constraint(name, reason),
        other => constraint("params", other.to_string()),
    })
}

/// Parses and validates a configuration document. `output_dir` defaults to
/// the current directory and `plot` to `false`; both come from the command
/// line.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut entries: BTreeMap<String, Entry> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::Syntax {
                line,
                text: content.to_string(),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(ConfigError::Syntax {
                line,
                text: content.to_string(),
            });
        }
        if !MODEL_KEYS.contains(&key) && !OPTION_KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey {
                line,
                key: key.to_string(),
            });
        }
        if entries.contains_key(key) {
            return Err(ConfigError::DuplicateKey {
                line,
                key: key.to_string(),
            });
        }
        entries.insert(
            key.to_string(),
            Entry {
                line,
                value: value.to_string(),
            },
        );
    }

    let command = match entries.get("command") {
        Some(e) => Some(Command::parse(&e.value).ok_or_else(|| ConfigError::InvalidValue {
            line: e.line,
            key: "command".into(),
            value: e.value.clone(),
            expected: "one of analyze, critical, direction, simulate, sweep",
        })?),
        None => None,
    };

    let sweep_param = entries.get("sweep_param").map(|e| e.value.clone());
    let mut missing: Vec<String> = Vec::new();
    if command.is_none() {
        missing.push("command".into());
    }
    for key in MODEL_KEYS {
        // the swept parameter takes its values from the sweep range
        let swept = command == Some(Command::Sweep) && sweep_param.as_deref() == Some(key);
        // critical delays, the normal form and sweep rows do not depend on s
        let delay_free = key == "s"
            && matches!(
                command,
                Some(Command::Analyze | Command::Critical | Command::Direction | Command::Sweep)
            );
        if !swept && !delay_free && !entries.contains_key(key) {
            missing.push(key.into());
        }
    }
    if command == Some(Command::Sweep) {
        for key in ["sweep_param", "sweep_min", "sweep_max", "sweep_count"] {
            if !entries.contains_key(key) {
                missing.push(key.into());
            }
        }
    }
    if !missing.is_empty() {
        return Err(ConfigError::Missing(missing));
    }
    let command = command.expect("checked above");

    let delay_given = entries.contains_key("s") || sweep_param.as_deref() == Some("s");
    let mut params = ModelParams::<f64>::benchmark().with_delay(0.0);
    for key in MODEL_KEYS {
        if let Some(x) = number(&entries, key)? {
            params.set(key, x);
        }
    }

    let mut simulate = SimulateOptions::default();
    if let Some(t) = number(&entries, "t_end")? {
        if t <= 0.0 {
            return Err(constraint("t_end", "must be > 0"));
        }
        simulate.t_end = t;
    }
    if let Some(n) = count(&entries, "steps_per_delay")? {
        if n < 20 {
            return Err(constraint("steps_per_delay", "must be at least 20"));
        }
        simulate.steps_per_delay = n;
    }
    if let Some(f) = number(&entries, "transient_fraction")? {
        if !(f > 0.0 && f < 1.0) {
            return Err(constraint("transient_fraction", "must lie in (0, 1)"));
        }
        simulate.transient_fraction = f;
    }
    simulate.u0 = number(&entries, "u0")?;
    simulate.v0 = number(&entries, "v0")?;
    simulate.w0 = number(&entries, "w0")?;
    if simulate.u0.is_some() != simulate.v0.is_some() {
        return Err(constraint(
            if simulate.u0.is_some() { "v0" } else { "u0" },
            "u0 and v0 must be given together",
        ));
    }

    let sweep = if command == Command::Sweep {
        let param = sweep_param.expect("checked above");
        if !MODEL_KEYS.contains(&param.as_str()) {
            return Err(constraint(
                "sweep_param",
                format!("`{param}` is not one of {}", MODEL_KEYS.join(", ")),
            ));
        }
        let min = number(&entries, "sweep_min")?.expect("checked above");
        let max = number(&entries, "sweep_max")?.expect("checked above");
        let n = count(&entries, "sweep_count")?.expect("checked above");
        if !(min < max) {
            return Err(constraint("sweep_min", "must be below sweep_max"));
        }
        if n < 2 {
            return Err(constraint("sweep_count", "must be at least 2"));
        }
        for end in [min, max] {
            let mut p = params;
            p.set(&param, end);
            check_params(&p).map_err(|e| constraint(&param, format!("sweep endpoint {end} is invalid: {e}")))?;
        }
        params.set(&param, min);
        Some(SweepOptions {
            param,
            min,
            max,
            count: n,
        })
    } else {
        None
    };
    check_params(&params)?;

    Ok(RunConfig {
        params,
        command,
        simulate,
        sweep,
        delay_given,
        output_dir: PathBuf::from("."),
        plot: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const BENCHMARK: &str = "\
# benchmark parameters
a1 = 0.05
a2 = 1.045
b1 = 0.95
b2 = 0.27
mu = 2
r = 4
r1 = 0.5
r2 = 0.5
";

    #[test]
    fn benchmark_document() {
        let cfg = parse_config(&format!("{BENCHMARK}command = analyze\n")).unwrap();
        assert_eq!(cfg.command, Command::Analyze);
        assert_eq!(cfg.params, ModelParams::benchmark().with_delay(0.0));
        assert!(!cfg.delay_given);
        let cfg = parse_config(&format!("{BENCHMARK}s = 2\ncommand = analyze\n")).unwrap();
        assert_eq!(cfg.params, ModelParams::benchmark());
        assert!(cfg.delay_given);
        assert_eq!(cfg.simulate, SimulateOptions::default());
        assert!(cfg.sweep.is_none());
    }

    #[test]
    fn negative_a1_names_the_key() {
        let text = format!("{}command = analyze\n", BENCHMARK.replace("a1 = 0.05", "a1 = -0.1"));
        match parse_config(&text) {
            Err(ConfigError::Constraint { key, .. }) => assert_eq!(key, "a1"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_document_lists_every_required_key() {
        match parse_config("") {
            Err(ConfigError::Missing(keys)) => {
                assert_eq!(keys[0], "command");
                for k in MODEL_KEYS {
                    assert!(keys.iter().any(|x| x == k), "{k} not reported");
                }
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_and_malformed_lines() {
        assert_eq!(
            parse_config("colour = red\n"),
            Err(ConfigError::UnknownKey {
                line: 1,
                key: "colour".into()
            })
        );
        assert!(matches!(
            parse_config("\n\njust text\n"),
            Err(ConfigError::Syntax { line: 3, .. })
        ));
        let text = format!("{BENCHMARK}command = analyze\nr = 5\n");
        assert!(matches!(
            parse_config(&text),
            Err(ConfigError::DuplicateKey { line: 11, .. })
        ));
        let text = format!("{BENCHMARK}command = analyze\nt_end = soon\n");
        assert!(matches!(
            parse_config(&text),
            Err(ConfigError::InvalidValue { line: 11, .. })
        ));
        let text = format!("{BENCHMARK}command = dance\n");
        assert!(matches!(parse_config(&text), Err(ConfigError::InvalidValue { .. })));
    }

    #[test]
    fn simulate_requires_delay() {
        match parse_config(&format!("{BENCHMARK}command = simulate\n")) {
            Err(ConfigError::Missing(keys)) => assert_eq!(keys, vec!["s".to_string()]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn simulate_options() {
        let text = format!(
            "{BENCHMARK}s = 2\ncommand = Simulate\nt_end = 100 # short\nsteps_per_delay = 40\nu0 = 1.01\nv0 = 0.99\nw0 = 0.2\n"
        );
        let cfg = parse_config(&text).unwrap();
        assert_eq!(cfg.command, Command::Simulate);
        assert_eq!(cfg.simulate.t_end, 100.0);
        assert_eq!(cfg.simulate.steps_per_delay, 40);
        assert_eq!(
            (cfg.simulate.u0, cfg.simulate.v0, cfg.simulate.w0),
            (Some(1.01), Some(0.99), Some(0.2))
        );
        let text = format!("{BENCHMARK}s = 2\ncommand = simulate\nsteps_per_delay = 10\n");
        assert!(matches!(parse_config(&text), Err(ConfigError::Constraint { key, .. }) if key == "steps_per_delay"));
        let text = format!("{BENCHMARK}s = 2\ncommand = simulate\nu0 = 1\n");
        assert!(matches!(parse_config(&text), Err(ConfigError::Constraint { key, .. }) if key == "v0"));
    }

    #[test]
    fn sweep_options() {
        let base = BENCHMARK;
        let text =
            format!("{base}command = sweep\nsweep_param = s\nsweep_min = 1.5\nsweep_max = 2.5\nsweep_count = 5\n");
        let cfg = parse_config(&text).unwrap();
        let sweep = cfg.sweep.unwrap();
        assert_eq!(sweep.values(), vec![1.5, 1.75, 2.0, 2.25, 2.5]);

        let text = format!("{base}command = sweep\nsweep_param = s\nsweep_min = 2\nsweep_max = 1\nsweep_count = 5\n");
        assert!(matches!(parse_config(&text), Err(ConfigError::Constraint { key, .. }) if key == "sweep_min"));
        let text = format!("{base}command = sweep\nsweep_param = s\nsweep_min = 1\nsweep_max = 2\nsweep_count = 1\n");
        assert!(matches!(parse_config(&text), Err(ConfigError::Constraint { key, .. }) if key == "sweep_count"));
        let text = format!(
            "{base}s = 2\ncommand = sweep\nsweep_param = zeta\nsweep_min = 1\nsweep_max = 2\nsweep_count = 3\n"
        );
        assert!(matches!(parse_config(&text), Err(ConfigError::Constraint { key, .. }) if key == "sweep_param"));
        let text =
            format!("{base}s = 2\ncommand = sweep\nsweep_param = a1\nsweep_min = -1\nsweep_max = 2\nsweep_count = 3\n");
        assert!(matches!(parse_config(&text), Err(ConfigError::Constraint { key, .. }) if key == "a1"));
        match parse_config(&format!("{base}command = sweep\n")) {
            Err(ConfigError::Missing(keys)) => {
                assert!(!keys.contains(&"s".to_string()));
                assert!(keys.contains(&"sweep_count".to_string()));
            }
            other => panic!("{other:?}"),
        }
    }
}
