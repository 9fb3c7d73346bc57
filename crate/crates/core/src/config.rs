//! Experiment configuration: the line-oriented `key = value` format, the
//! three reference presets and command-line overrides.
//!
//! ```text
//! # smooth advection
//! problem = advection
//! basis = gauss
//! p = 7
//! elements = 8
//! domain = 0, 2
//! flux = central
//! time.final = 10
//! time.steps = 120000
//! dissipation.mode = adaptive
//! dissipation.order = 2
//! ```

use std::collections::HashMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;

use crate::dissipation::{DissipationConfig, DissipationMode};
use crate::sbp::BasisKind;
use crate::semidisc::{check_pairing, FluxKind, InitialCondition, Problem};
use crate::time::{Integrator, TimeGrid};

pub const PRESET_NAMES: [&str; 3] = ["advection-smooth", "advection-step", "burgers-sine"];

const DEFAULT_GAUSSIAN_COEFFICIENT: f64 = 20.0;

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub snapshot_times: Vec<f64>,
    pub diagnostics: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problem: Problem,
    pub basis: BasisKind,
    pub p: usize,
    pub elements: usize,
    pub domain: (f64, f64),
    pub initial_condition: InitialCondition,
    pub flux: FluxKind,
    pub time: TimeGrid,
    pub dissipation: DissipationConfig,
    pub integrator: Integrator,
    pub output: OutputConfig,
}

/// One problem in a config text. Line 0 means the whole file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            f.write_str(&self.message)
        } else {
            write!(f, "line {}: {}", self.line, self.message)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl ConfigErrors {
    fn single(message: impl Into<String>) -> Self {
        Self(vec![ConfigError {
            line: 0,
            message: message.into(),
        }])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ValueType {
    Word,
    Unsigned,
    Real,
    Pair,
    RealList,
    Bool,
    Text,
}

const KEYS: &[(&str, ValueType)] = &[
    ("problem", ValueType::Word),
    ("basis", ValueType::Word),
    ("p", ValueType::Unsigned),
    ("elements", ValueType::Unsigned),
    ("domain", ValueType::Pair),
    ("flux", ValueType::Word),
    ("integrator", ValueType::Word),
    ("initial.kind", ValueType::Word),
    ("initial.center", ValueType::Real),
    ("initial.coefficient", ValueType::Real),
    ("initial.lo", ValueType::Real),
    ("initial.hi", ValueType::Real),
    ("initial.offset", ValueType::Real),
    ("initial.value", ValueType::Real),
    ("time.final", ValueType::Real),
    ("time.steps", ValueType::Unsigned),
    ("dissipation.mode", ValueType::Word),
    ("dissipation.order", ValueType::Unsigned),
    ("dissipation.epsilon", ValueType::Real),
    ("output.dir", ValueType::Text),
    ("output.snapshot_times", ValueType::RealList),
    ("output.diagnostics", ValueType::Bool),
];

const REQUIRED: &[&str] = &[
    "problem",
    "basis",
    "p",
    "elements",
    "domain",
    "flux",
    "time.final",
    "time.steps",
];

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Word(String),
    Unsigned(usize),
    Real(f64),
    Pair(f64, f64),
    RealList(Vec<f64>),
    Bool(bool),
}

fn parse_real(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

fn parse_value(ty: ValueType, raw: &str) -> Result<Value, String> {
    match ty {
        ValueType::Word => {
            if raw.is_empty() || raw.contains(char::is_whitespace) {
                Err(format!("expected a single word, got `{raw}`"))
            } else {
                Ok(Value::Word(raw.to_string()))
            }
        }
        ValueType::Text => {
            if raw.is_empty() {
                Err("expected a non-empty value".into())
            } else {
                Ok(Value::Word(raw.to_string()))
            }
        }
        ValueType::Unsigned => raw
            .parse::<usize>()
            .map(Value::Unsigned)
            .map_err(|_| format!("expected a non-negative integer, got `{raw}`")),
        ValueType::Real => parse_real(raw)
            .map(Value::Real)
            .ok_or_else(|| format!("expected a finite number, got `{raw}`")),
        ValueType::Pair => {
            let parts: Vec<&str> = raw.split(',').collect();
            match parts.as_slice() {
                [a, b] => match (parse_real(a), parse_real(b)) {
                    (Some(a), Some(b)) => Ok(Value::Pair(a, b)),
                    _ => Err(format!("expected two numbers `a, b`, got `{raw}`")),
                },
                _ => Err(format!("expected two numbers `a, b`, got `{raw}`")),
            }
        }
        ValueType::RealList => {
            if raw.is_empty() {
                return Ok(Value::RealList(Vec::new()));
            }
            raw.split(',')
                .map(|s| parse_real(s).ok_or_else(|| format!("expected a comma separated list of numbers, got `{raw}`")))
                .collect::<Result<Vec<_>, _>>()
                .map(Value::RealList)
        }
        ValueType::Bool => match raw {
            "true" => Ok(Value::Bool(true)),
            "false" => Ok(Value::Bool(false)),
            _ => Err(format!("expected true or false, got `{raw}`")),
        },
    }
}

struct Entries {
    values: HashMap<&'static str, (usize, Value)>,
    errors: Vec<ConfigError>,
}

impl Entries {
    fn error(&mut self, line: usize, message: impl Into<String>) {
        self.errors.push(ConfigError {
            line,
            message: message.into(),
        });
    }

    fn line(&self, key: &str) -> usize {
        self.values.get(key).map_or(0, |(l, _)| *l)
    }

    fn has(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    fn word<T: FromStr<Err = String>>(&mut self, key: &str) -> Option<T> {
        let (line, v) = self.values.get(key)?.clone();
        let Value::Word(w) = v else { return None };
        match w.parse::<T>() {
            Ok(t) => Some(t),
            Err(e) => {
                self.error(line, format!("{key}: {e}"));
                None
            }
        }
    }

    fn unsigned(&self, key: &str) -> Option<usize> {
        match self.values.get(key) {
            Some((_, Value::Unsigned(v))) => Some(*v),
            _ => None,
        }
    }

    fn real(&self, key: &str) -> Option<f64> {
        match self.values.get(key) {
            Some((_, Value::Real(v))) => Some(*v),
            _ => None,
        }
    }
}

/// Parses and validates a config text, reporting every problem found.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigErrors> {
    let mut entries = Entries {
        values: HashMap::new(),
        errors: Vec::new(),
    };
    let mut seen_required_failure = Vec::new();
    for (index, raw_line) in text.lines().enumerate() {
        let line = index + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            entries.error(line, format!("expected `key = value`, got `{content}`"));
            continue;
        };
        let key = key.trim();
        let value = value.trim();
        let Some(&(name, ty)) = KEYS.iter().find(|(k, _)| *k == key) else {
            entries.error(line, format!("unknown key `{key}`"));
            continue;
        };
        if let Some((first, _)) = entries.values.get(name) {
            let first = *first;
            entries.error(line, format!("duplicate key `{key}` (first set on line {first})"));
            continue;
        }
        match parse_value(ty, value) {
            Ok(v) => {
                entries.values.insert(name, (line, v));
            }
            Err(e) => {
                entries.error(line, format!("{key}: {e}"));
                seen_required_failure.push(name);
            }
        }
    }
    for key in REQUIRED {
        if !entries.has(key) && !seen_required_failure.contains(key) {
            entries.error(0, format!("missing required key `{key}`"));
        }
    }

    let problem = entries.word::<Problem>("problem");
    let basis = entries.word::<BasisKind>("basis");
    let flux = entries.word::<FluxKind>("flux");
    let integrator = if entries.has("integrator") {
        entries.word::<Integrator>("integrator")
    } else {
        Some(Integrator::Euler)
    };

    let p = entries.unsigned("p");
    if p == Some(0) {
        entries.error(entries.line("p"), "p must be at least 1");
    }
    let elements = entries.unsigned("elements");
    if elements == Some(0) {
        entries.error(entries.line("elements"), "elements must be at least 1");
    }
    let domain = match entries.values.get("domain") {
        Some((line, Value::Pair(a, b))) => {
            let (line, a, b) = (*line, *a, *b);
            if a < b {
                Some((a, b))
            } else {
                entries.error(line, format!("domain must satisfy a < b, got {a}, {b}"));
                None
            }
        }
        _ => None,
    };

    if let (Some(flux), Some(problem)) = (flux, problem) {
        if let Err(e) = check_pairing(flux, problem) {
            entries.error(entries.line("flux"), e.to_string());
        }
    }

    let time = match (entries.real("time.final"), entries.unsigned("time.steps")) {
        (Some(t), Some(k)) => {
            let mut ok = true;
            if !(t > 0.0) {
                entries.error(entries.line("time.final"), format!("time.final must be positive, got {t}"));
                ok = false;
            }
            if k == 0 {
                entries.error(entries.line("time.steps"), "time.steps must be at least 1");
                ok = false;
            }
            if ok {
                TimeGrid::new(t, k).ok()
            } else {
                None
            }
        }
        _ => None,
    };

    let dissipation = parse_dissipation(&mut entries);
    let initial_condition = parse_initial(&mut entries, domain);

    let output_dir = match entries.values.get("output.dir") {
        Some((_, Value::Word(d))) => PathBuf::from(d),
        _ => PathBuf::from("output"),
    };
    let snapshot_times = match entries.values.get("output.snapshot_times") {
        Some((line, Value::RealList(v))) => {
            let (line, v) = (*line, v.clone());
            if v.iter().any(|&t| t < 0.0) {
                entries.error(line, "snapshot times must be non-negative");
            }
            if let Some(t_final) = time.map(|g| g.t_final()) {
                if v.iter().any(|&t| t > t_final) {
                    entries.error(line, format!("snapshot times must not exceed time.final = {t_final}"));
                }
            }
            v
        }
        _ => time.map_or_else(Vec::new, |g| vec![0.0, g.t_final()]),
    };
    let diagnostics = matches!(entries.values.get("output.diagnostics"), Some((_, Value::Bool(true))));

    if !entries.errors.is_empty() {
        entries.errors.sort_by_key(|e| e.line);
        return Err(ConfigErrors(entries.errors));
    }
    match (
        problem,
        basis,
        p,
        elements,
        domain,
        flux,
        time,
        dissipation,
        integrator,
        initial_condition,
    ) {
        (
            Some(problem),
            Some(basis),
            Some(p),
            Some(elements),
            Some(domain),
            Some(flux),
            Some(time),
            Some(dissipation),
            Some(integrator),
            Some(initial_condition),
        ) => Ok(ExperimentConfig {
            problem,
            basis,
            p,
            elements,
            domain,
            initial_condition,
            flux,
            time,
            dissipation,
            integrator,
            output: OutputConfig {
                dir: output_dir,
                snapshot_times,
                diagnostics,
            },
        }),
        _ => Err(ConfigErrors::single("incomplete configuration")),
    }
}

fn parse_dissipation(entries: &mut Entries) -> Option<DissipationConfig> {
    let order = entries.unsigned("dissipation.order").unwrap_or(1);
    if order == 0 {
        entries.error(entries.line("dissipation.order"), "dissipation.order must be at least 1");
        return None;
    }
    let mode_name = match entries.values.get("dissipation.mode") {
        Some((_, Value::Word(w))) => w.clone(),
        Some(_) => return None,
        None => "off".to_string(),
    };
    let epsilon = entries.real("dissipation.epsilon");
    let eps_line = entries.line("dissipation.epsilon");
    let mode = match mode_name.as_str() {
        "off" | "adaptive" => {
            if epsilon.is_some() {
                entries.error(eps_line, "dissipation.epsilon only applies to dissipation.mode = fixed");
                return None;
            }
            if mode_name == "off" {
                DissipationMode::Off
            } else {
                DissipationMode::Adaptive
            }
        }
        "fixed" => match epsilon {
            Some(e) if e >= 0.0 => DissipationMode::Fixed(e),
            Some(e) => {
                entries.error(eps_line, format!("dissipation.epsilon must be >= 0, got {e}"));
                return None;
            }
            None => {
                if !entries.has("dissipation.epsilon") {
                    entries.error(
                        entries.line("dissipation.mode"),
                        "dissipation.mode = fixed requires dissipation.epsilon",
                    );
                }
                return None;
            }
        },
        other => {
            entries.error(
                entries.line("dissipation.mode"),
                format!("dissipation.mode: unknown mode `{other}` (expected off, fixed or adaptive)"),
            );
            return None;
        }
    };
    DissipationConfig::new(order, mode).ok()
}

fn parse_initial(entries: &mut Entries, domain: Option<(f64, f64)>) -> Option<InitialCondition> {
    let kind = match entries.values.get("initial.kind") {
        Some((_, Value::Word(w))) => w.clone(),
        Some(_) => return None,
        None => "gaussian".to_string(),
    };
    let allowed: &[&str] = match kind.as_str() {
        "gaussian" => &["initial.center", "initial.coefficient"],
        "step" => &["initial.lo", "initial.hi"],
        "sine-plus" => &["initial.offset"],
        "constant" => &["initial.value"],
        other => {
            entries.error(
                entries.line("initial.kind"),
                format!("initial.kind: unknown kind `{other}` (expected gaussian, step, sine-plus or constant)"),
            );
            return None;
        }
    };
    let mut ok = true;
    for key in [
        "initial.center",
        "initial.coefficient",
        "initial.lo",
        "initial.hi",
        "initial.offset",
        "initial.value",
    ] {
        if entries.has(key) && !allowed.contains(&key) {
            entries.error(entries.line(key), format!("`{key}` does not apply to initial.kind = {kind}"));
            ok = false;
        }
    }
    let require = |entries: &mut Entries, key: &str| -> Option<f64> {
        let v = entries.real(key);
        if v.is_none() && !entries.has(key) {
            entries.error(
                entries.line("initial.kind"),
                format!("initial.kind = {kind} requires `{key}`"),
            );
        }
        v
    };
    let ic = match kind.as_str() {
        "gaussian" => {
            let center = match entries.real("initial.center") {
                Some(c) => c,
                None => {
                    let (a, b) = domain?;
                    0.5 * (a + b)
                }
            };
            let coefficient = entries.real("initial.coefficient").unwrap_or(DEFAULT_GAUSSIAN_COEFFICIENT);
            InitialCondition::Gaussian { center, coefficient }
        }
        "step" => {
            let lo = require(entries, "initial.lo");
            let hi = require(entries, "initial.hi");
            let (lo, hi) = (lo?, hi?);
            if lo > hi {
                entries.error(entries.line("initial.lo"), format!("initial.lo must not exceed initial.hi, got {lo} > {hi}"));
                return None;
            }
            InitialCondition::Step { lo, hi }
        }
        "sine-plus" => InitialCondition::SinePlus {
            offset: entries.real("initial.offset").unwrap_or(0.0),
        },
        _ => InitialCondition::Constant {
            value: require(entries, "initial.value")?,
        },
    };
    ok.then_some(ic)
}

fn real_text(v: f64) -> String {
    format!("{v:?}")
}

impl ExperimentConfig {
    /// Serialises to the config format. `parse_config` of the result gives
    /// back an identical config.
    pub fn to_config_text(&self) -> String {
        let mut lines = vec![
            format!("problem = {}", self.problem),
            format!("basis = {}", self.basis),
            format!("p = {}", self.p),
            format!("elements = {}", self.elements),
            format!("domain = {}, {}", real_text(self.domain.0), real_text(self.domain.1)),
            format!("flux = {}", self.flux),
            format!("integrator = {}", self.integrator),
        ];
        match self.initial_condition {
            InitialCondition::Gaussian { center, coefficient } => {
                lines.push("initial.kind = gaussian".into());
                lines.push(format!("initial.center = {}", real_text(center)));
                lines.push(format!("initial.coefficient = {}", real_text(coefficient)));
            }
            InitialCondition::Step { lo, hi } => {
                lines.push("initial.kind = step".into());
                lines.push(format!("initial.lo = {}", real_text(lo)));
                lines.push(format!("initial.hi = {}", real_text(hi)));
            }
            InitialCondition::SinePlus { offset } => {
                lines.push("initial.kind = sine-plus".into());
                lines.push(format!("initial.offset = {}", real_text(offset)));
            }
            InitialCondition::Constant { value } => {
                lines.push("initial.kind = constant".into());
                lines.push(format!("initial.value = {}", real_text(value)));
            }
        }
        lines.push(format!("time.final = {}", real_text(self.time.t_final())));
        lines.push(format!("time.steps = {}", self.time.num_steps()));
        lines.push(format!("dissipation.mode = {}", self.dissipation.mode().name()));
        lines.push(format!("dissipation.order = {}", self.dissipation.order()));
        if let DissipationMode::Fixed(eps) = self.dissipation.mode() {
            lines.push(format!("dissipation.epsilon = {}", real_text(eps)));
        }
        lines.push(format!("output.dir = {}", self.output.dir.display()));
        let times: Vec<String> = self.output.snapshot_times.iter().map(|&t| real_text(t)).collect();
        lines.push(format!("output.snapshot_times = {}", times.join(", ")));
        lines.push(format!("output.diagnostics = {}", self.output.diagnostics));
        let mut text = lines.join("\n");
        text.push('\n');
        text
    }
}

/// The reference experiments with dissipation off.
pub fn preset(name: &str) -> Result<ExperimentConfig, ConfigErrors> {
    let (problem, p, elements, initial_condition, flux, t_final, steps, snapshots) = match name {
        "advection-smooth" => (
            Problem::LinearAdvection,
            7,
            8,
            InitialCondition::Gaussian {
                center: 1.0,
                coefficient: 20.0,
            },
            FluxKind::Central,
            10.0,
            120_000,
            vec![0.0, 10.0],
        ),
        "advection-step" => (
            Problem::LinearAdvection,
            15,
            16,
            InitialCondition::Step { lo: 0.5, hi: 1.0 },
            FluxKind::Upwind,
            8.0,
            100_000,
            vec![0.0, 8.0],
        ),
        "burgers-sine" => (
            Problem::Burgers,
            15,
            16,
            InitialCondition::SinePlus { offset: 0.01 },
            FluxKind::LocalLaxFriedrichs,
            3.0,
            15_000,
            vec![0.0, 0.31, 3.0],
        ),
        other => {
            return Err(ConfigErrors::single(format!(
                "unknown preset `{other}` (expected one of {})",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    Ok(ExperimentConfig {
        problem,
        basis: BasisKind::GaussNodal,
        p,
        elements,
        domain: (0.0, 2.0),
        initial_condition,
        flux,
        time: TimeGrid::new(t_final, steps).expect("preset time grid is valid"),
        dissipation: DissipationConfig::off(),
        integrator: Integrator::Euler,
        output: OutputConfig {
            dir: PathBuf::from("output").join(name),
            snapshot_times: snapshots,
            diagnostics: false,
        },
    })
}

/// Mode names accepted by `--dissipation`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeName {
    Off,
    Fixed,
    Adaptive,
}

impl FromStr for ModeName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "off" => Ok(ModeName::Off),
            "fixed" => Ok(ModeName::Fixed),
            "adaptive" => Ok(ModeName::Adaptive),
            other => Err(format!("unknown dissipation mode `{other}` (expected off, fixed or adaptive)")),
        }
    }
}

/// Command-line overrides. Each one touches only its own field.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub steps: Option<usize>,
    pub dissipation: Option<ModeName>,
    pub order: Option<usize>,
    pub epsilon: Option<f64>,
    pub output: Option<PathBuf>,
}

impl Overrides {
    pub fn apply(&self, config: &ExperimentConfig) -> Result<ExperimentConfig, ConfigErrors> {
        let mut out = config.clone();
        let mut errors = Vec::new();
        let mut fail = |m: String| errors.push(ConfigError { line: 0, message: m });

        if let Some(steps) = self.steps {
            match TimeGrid::new(config.time.t_final(), steps) {
                Ok(g) => out.time = g,
                Err(e) => fail(format!("--steps: {e}")),
            }
        }
        let order = self.order.unwrap_or(config.dissipation.order());
        let current = config.dissipation.mode();
        let mode = match self.dissipation {
            None => match (current, self.epsilon) {
                (DissipationMode::Fixed(_), Some(e)) => Some(DissipationMode::Fixed(e)),
                (_, Some(_)) => {
                    fail("--epsilon requires --dissipation fixed".into());
                    None
                }
                (m, None) => Some(m),
            },
            Some(ModeName::Off) | Some(ModeName::Adaptive) if self.epsilon.is_some() => {
                fail("--epsilon requires --dissipation fixed".into());
                None
            }
            Some(ModeName::Off) => Some(DissipationMode::Off),
            Some(ModeName::Adaptive) => Some(DissipationMode::Adaptive),
            Some(ModeName::Fixed) => match (self.epsilon, current) {
                (Some(e), _) | (None, DissipationMode::Fixed(e)) => Some(DissipationMode::Fixed(e)),
                _ => {
                    fail("--dissipation fixed requires --epsilon".into());
                    None
                }
            },
        };
        if let Some(mode) = mode {
            match DissipationConfig::new(order, mode) {
                Ok(d) => out.dissipation = d,
                Err(e) => fail(e.to_string()),
            }
        }
        if let Some(dir) = &self.output {
            out.output.dir = dir.clone();
        }
        if !errors.is_empty() {
            return Err(ConfigErrors(errors));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
problem = advection
basis = gauss
p = 3
elements = 4
domain = 0, 2
flux = central
time.final = 1
time.steps = 100
";

    #[test]
    fn minimal_config_uses_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.dissipation.mode(), DissipationMode::Off);
        assert_eq!(c.integrator, Integrator::Euler);
        assert_eq!(
            c.initial_condition,
            InitialCondition::Gaussian {
                center: 1.0,
                coefficient: 20.0
            }
        );
        assert_eq!(c.output.snapshot_times, vec![0.0, 1.0]);
        assert!(!c.output.diagnostics);
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = format!("# header\n\n{MINIMAL}dissipation.order = 2  # trailing\n");
        assert_eq!(parse_config(&text).unwrap().dissipation.order(), 2);
    }

    #[test]
    fn llf_with_advection_is_a_pairing_error() {
        let text = MINIMAL.replace("flux = central", "flux = llf");
        let err = parse_config(&text).unwrap_err();
        assert_eq!(err.0.len(), 1);
        assert_eq!(err.0[0].line, 6);
        assert!(err.0[0].message.contains("llf"));
    }

    #[test]
    fn all_errors_are_collected() {
        let text = "\
problem = advection
basis = gauss
p = three
elements = 4
domain = 0, 2
flux = central
colour = blue
time.final = 1
time.steps = 100
time.steps = 200
";
        let err = parse_config(text).unwrap_err();
        let lines: Vec<usize> = err.0.iter().map(|e| e.line).collect();
        assert_eq!(lines, vec![3, 7, 10], "{err}");
        assert!(err.0[1].message.contains("unknown key"));
        assert!(err.0[2].message.contains("duplicate"));
    }

    #[test]
    fn missing_keys_are_reported() {
        let err = parse_config("problem = burgers\n").unwrap_err();
        assert_eq!(err.0.len(), REQUIRED.len() - 1);
        assert!(err.0.iter().all(|e| e.line == 0 && e.message.contains("missing")));
    }

    #[test]
    fn fixed_mode_needs_epsilon() {
        let err = parse_config(&format!("{MINIMAL}dissipation.mode = fixed\n")).unwrap_err();
        assert!(err.to_string().contains("requires dissipation.epsilon"));
        let err = parse_config(&format!("{MINIMAL}dissipation.epsilon = 0.1\n")).unwrap_err();
        assert!(err.to_string().contains("only applies"));
        let c = parse_config(&format!("{MINIMAL}dissipation.mode = fixed\ndissipation.epsilon = 5e-3\n")).unwrap();
        assert_eq!(c.dissipation.mode(), DissipationMode::Fixed(5e-3));
    }

    #[test]
    fn initial_parameters_must_match_kind() {
        let err = parse_config(&format!("{MINIMAL}initial.kind = step\ninitial.lo = 0.5\ninitial.offset = 1\n")).unwrap_err();
        let msgs = err.to_string();
        assert!(msgs.contains("requires `initial.hi`"), "{msgs}");
        assert!(msgs.contains("does not apply"), "{msgs}");
    }

    #[test]
    fn presets_match_reference_setups() {
        let s = preset("advection-smooth").unwrap();
        assert_eq!((s.problem, s.basis, s.p, s.elements, s.domain), (Problem::LinearAdvection, BasisKind::GaussNodal, 7, 8, (0.0, 2.0)));
        assert_eq!(s.flux, FluxKind::Central);
        assert_eq!((s.time.t_final(), s.time.num_steps()), (10.0, 120_000));
        let st = preset("advection-step").unwrap();
        assert_eq!((st.p, st.elements, st.flux), (15, 16, FluxKind::Upwind));
        assert_eq!(st.initial_condition, InitialCondition::Step { lo: 0.5, hi: 1.0 });
        assert_eq!(st.time.t_final(), 8.0);
        let b = preset("burgers-sine").unwrap();
        assert_eq!((b.problem, b.p, b.elements, b.flux), (Problem::Burgers, 15, 16, FluxKind::LocalLaxFriedrichs));
        assert_eq!(b.initial_condition, InitialCondition::SinePlus { offset: 0.01 });
        assert_eq!((b.time.t_final(), b.time.num_steps()), (3.0, 15_000));
        assert_eq!(b.output.snapshot_times, vec![0.0, 0.31, 3.0]);
        assert!(preset("euler-shock").is_err());
    }

    #[test]
    fn presets_round_trip() {
        for name in PRESET_NAMES {
            let c = preset(name).unwrap();
            assert_eq!(parse_config(&c.to_config_text()).unwrap(), c, "{name}");
        }
    }

    #[test]
    fn overrides_touch_only_their_fields() {
        let base = preset("advection-smooth").unwrap();
        let o = Overrides {
            steps: Some(12_000),
            ..Default::default()
        };
        let c = o.apply(&base).unwrap();
        assert_eq!(c.time.num_steps(), 12_000);
        assert_eq!(c.time.t_final(), base.time.t_final());
        assert_eq!(ExperimentConfig { time: base.time, ..c.clone() }, base);

        let o = Overrides {
            dissipation: Some(ModeName::Adaptive),
            order: Some(3),
            ..Default::default()
        };
        let c = o.apply(&base).unwrap();
        assert_eq!(c.dissipation, DissipationConfig::adaptive(3).unwrap());
        assert_eq!(ExperimentConfig { dissipation: base.dissipation, ..c }, base);
    }

    #[test]
    fn epsilon_override_rules() {
        let base = preset("burgers-sine").unwrap();
        let eps_only = Overrides {
            epsilon: Some(5e-3),
            ..Default::default()
        };
        assert!(eps_only.apply(&base).is_err());
        let fixed_only = Overrides {
            dissipation: Some(ModeName::Fixed),
            ..Default::default()
        };
        assert!(fixed_only.apply(&base).is_err());
        let both = Overrides {
            dissipation: Some(ModeName::Fixed),
            epsilon: Some(5e-3),
            ..Default::default()
        };
        let c = both.apply(&base).unwrap();
        assert_eq!(c.dissipation.mode(), DissipationMode::Fixed(5e-3));
        // once fixed, the strength alone can be changed
        assert_eq!(eps_only.apply(&c).unwrap().dissipation.mode(), DissipationMode::Fixed(5e-3));
    }
}
