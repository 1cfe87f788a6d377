//! Experiment configuration: defaults, flat key-value config files with
//! one section per concern, and command-line overrides.

use crate::CliError;
use qfisher::optimize::OptMethod;
use std::fmt::Write as _;
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Estimate,
    Optimize,
    MSweep,
    PuritySweep,
    VarianceScan,
    BoundCompare,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Estimate => "estimate",
            Self::Optimize => "optimize",
            Self::MSweep => "m-sweep",
            Self::PuritySweep => "purity-sweep",
            Self::VarianceScan => "variance-scan",
            Self::BoundCompare => "bound-compare",
        }
    }
}

/// Which probe state feeds the experiment before phase encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputState {
    /// Computational |0...0>, the pure input for probe training.
    Zero,
    /// GHZ state with phase 0.
    Ghz,
    MaximallyMixed,
    /// Seeded random state at each configured purity.
    RandomPurity,
}

impl InputState {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Zero => "zero",
            Self::Ghz => "ghz",
            Self::MaximallyMixed => "maximally-mixed",
            Self::RandomPurity => "random-purity",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "zero" => Some(Self::Zero),
            "ghz" => Some(Self::Ghz),
            "maximally-mixed" => Some(Self::MaximallyMixed),
            "random-purity" => Some(Self::RandomPurity),
            _ => None,
        }
    }
}

/// Full experiment configuration. Every field is echoed into output
/// metadata so runs are self-describing.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    // [experiment]
    pub n: usize,
    pub delta: f64,
    pub m: usize,
    pub theta: f64,
    pub purity: Vec<f64>,
    pub layers: usize,
    pub input_state: InputState,
    // [optimizer]
    pub method: OptMethod,
    pub max_iters: usize,
    pub restarts: usize,
    pub initial_step: f64,
    pub learning_rate: f64,
    pub convergence_tol: f64,
    // [scan]
    pub n_list: Vec<usize>,
    pub delta_list: Vec<f64>,
    pub samples: usize,
    pub purity_samples: usize,
    // [shots]
    pub shots_mode: bool,
    pub n_runs: u64,
    // [run]
    pub seed: u64,
    pub workers: usize,
    pub out_path: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n: 4,
            delta: 0.1,
            m: 4,
            theta: 0.3,
            purity: vec![0.95],
            layers: 3,
            input_state: InputState::RandomPurity,
            method: OptMethod::Cobyla,
            max_iters: 200,
            restarts: 30,
            initial_step: 0.5,
            learning_rate: 0.1,
            convergence_tol: 1e-8,
            n_list: vec![2, 3, 4, 5, 6, 7, 8],
            delta_list: vec![0.1, 0.5, 1.0],
            samples: 1000,
            purity_samples: 10,
            shots_mode: false,
            n_runs: 1_000_000,
            seed: 7,
            workers: 0,
            out_path: PathBuf::from("out.csv"),
        }
    }
}

impl ExperimentConfig {
    /// Render in the config-file format; also the output of `defaults`.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "[experiment]");
        let _ = writeln!(s, "n = {}", self.n);
        let _ = writeln!(s, "delta = {}", self.delta);
        let _ = writeln!(s, "m = {}", self.m);
        let _ = writeln!(s, "theta = {}", self.theta);
        let _ = writeln!(s, "purity = {}", join_f64(&self.purity));
        let _ = writeln!(s, "layers = {}", self.layers);
        let _ = writeln!(s, "input_state = {}", self.input_state.name());
        let _ = writeln!(s);
        let _ = writeln!(s, "[optimizer]");
        let _ = writeln!(s, "method = {}", self.method.name());
        let _ = writeln!(s, "max_iters = {}", self.max_iters);
        let _ = writeln!(s, "restarts = {}", self.restarts);
        let _ = writeln!(s, "initial_step = {}", self.initial_step);
        let _ = writeln!(s, "learning_rate = {}", self.learning_rate);
        let _ = writeln!(s, "convergence_tol = {}", self.convergence_tol);
        let _ = writeln!(s);
        let _ = writeln!(s, "[scan]");
        let _ = writeln!(
            s,
            "n_list = {}",
            self.n_list
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(",")
        );
        let _ = writeln!(s, "delta_list = {}", join_f64(&self.delta_list));
        let _ = writeln!(s, "samples = {}", self.samples);
        let _ = writeln!(s, "purity_samples = {}", self.purity_samples);
        let _ = writeln!(s);
        let _ = writeln!(s, "[shots]");
        let _ = writeln!(s, "shots_mode = {}", self.shots_mode);
        let _ = writeln!(s, "n_runs = {}", self.n_runs);
        let _ = writeln!(s);
        let _ = writeln!(s, "[run]");
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "workers = {}", self.workers);
        let _ = writeln!(s, "out = {}", self.out_path.display());
        s
    }

    /// Metadata lines echoed at the top of every output file.
    pub fn metadata(&self, experiment: ExperimentKind) -> Vec<(String, String)> {
        let mut md = vec![
            ("tool".into(), format!("qfisher {}", env!("CARGO_PKG_VERSION"))),
            ("experiment".into(), experiment.name().into()),
        ];
        for line in self.render().lines() {
            if line.is_empty() {
                continue;
            }
            if let Some(section) = line.strip_prefix('[') {
                md.push(("section".into(), section.trim_end_matches(']').into()));
            } else if let Some((k, v)) = line.split_once(" = ") {
                md.push((k.into(), v.into()));
            }
        }
        md.push(("strata_log_base".into(), "e".into()));
        md.push(("scan_layers".into(), "ceil(log2(n))".into()));
        md.push((
            "conventions".into(),
            "half-angle rotations; Ry,Rz per qubit then CNOT brick; final layer keeps its brick"
                .into(),
        ));
        md
    }

    pub fn parse_file(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut config = Self::default();
        config.apply_text(&text)?;
        Ok(config)
    }

    /// Apply `key = value` lines grouped under `[section]` headers.
    pub fn apply_text(&mut self, text: &str) -> Result<(), CliError> {
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| {
                    CliError::Config(format!("line {}: malformed section header", lineno + 1))
                })?;
                section = name.trim().to_string();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            self.apply_key(&section, key.trim(), value.trim())
                .map_err(|e| match e {
                    CliError::Config(msg) => {
                        CliError::Config(format!("line {}: {msg}", lineno + 1))
                    }
                    other => other,
                })?;
        }
        Ok(())
    }

    fn apply_key(&mut self, section: &str, key: &str, value: &str) -> Result<(), CliError> {
        let bad_key =
            || CliError::Config(format!("unknown key '{key}' in section [{section}]"));
        match section {
            "experiment" => match key {
                "n" => self.n = parse_num(key, value)?,
                "delta" => self.delta = parse_num(key, value)?,
                "m" => self.m = parse_num(key, value)?,
                "theta" => self.theta = parse_num(key, value)?,
                "purity" => self.purity = parse_list(key, value)?,
                "layers" => self.layers = parse_num(key, value)?,
                "input_state" => {
                    self.input_state = InputState::parse(value)
                        .ok_or_else(|| CliError::Config(format!("unknown input_state '{value}'")))?
                }
                _ => return Err(bad_key()),
            },
            "optimizer" => match key {
                "method" => {
                    self.method = OptMethod::parse(value)
                        .ok_or_else(|| CliError::Config(format!("unknown method '{value}'")))?
                }
                "max_iters" => self.max_iters = parse_num(key, value)?,
                "restarts" => self.restarts = parse_num(key, value)?,
                "initial_step" => self.initial_step = parse_num(key, value)?,
                "learning_rate" => self.learning_rate = parse_num(key, value)?,
                "convergence_tol" => self.convergence_tol = parse_num(key, value)?,
                _ => return Err(bad_key()),
            },
            "scan" => match key {
                "n_list" => self.n_list = parse_list(key, value)?,
                "delta_list" => self.delta_list = parse_list(key, value)?,
                "samples" => self.samples = parse_num(key, value)?,
                "purity_samples" => self.purity_samples = parse_num(key, value)?,
                _ => return Err(bad_key()),
            },
            "shots" => match key {
                "shots_mode" => {
                    self.shots_mode = value.parse().map_err(|_| {
                        CliError::Config(format!("shots_mode must be true/false, got '{value}'"))
                    })?
                }
                "n_runs" => self.n_runs = parse_num(key, value)?,
                _ => return Err(bad_key()),
            },
            "run" => match key {
                "seed" => self.seed = parse_num(key, value)?,
                "workers" => self.workers = parse_num(key, value)?,
                "out" => self.out_path = PathBuf::from(value),
                _ => return Err(bad_key()),
            },
            _ => return Err(CliError::Config(format!("unknown section [{section}]"))),
        }
        Ok(())
    }

    /// Sanity checks shared by every experiment; field names appear in
    /// the error messages.
    pub fn validate(&self, experiment: ExperimentKind) -> Result<(), CliError> {
        let err = |msg: String| Err(CliError::Config(msg));
        if self.n < 1 || self.n > 13 {
            return err(format!("n = {} outside [1, 13]", self.n));
        }
        if self.delta == 0.0 {
            return err("delta must be nonzero".into());
        }
        let d = 1usize << self.n;
        if self.m < 1 || self.m > d {
            return err(format!("m = {} outside [1, 2^n = {d}]", self.m));
        }
        if self.layers < 1 {
            return err("layers must be >= 1".into());
        }
        if self.max_iters < 1 || self.restarts < 1 {
            return err("optimizer budget must be >= 1".into());
        }
        for &p in &self.purity {
            if !(0.0..=1.0 + 1e-12).contains(&p) {
                return err(format!("purity = {p} outside (0, 1]"));
            }
        }
        if self.purity.is_empty() && self.input_state == InputState::RandomPurity {
            return err("purity list is empty but input_state = random-purity".into());
        }
        match experiment {
            ExperimentKind::VarianceScan => {
                if self.n_list.is_empty() || self.delta_list.is_empty() {
                    return err("variance scan needs n_list and delta_list".into());
                }
                if self.samples < 2 {
                    return err("variance scan needs samples >= 2".into());
                }
                for &n in &self.n_list {
                    if !(2..=13).contains(&n) {
                        return err(format!("n_list entry {n} outside [2, 13]"));
                    }
                }
            }
            ExperimentKind::BoundCompare => {
                if self.n_list.is_empty() {
                    return err("bound comparison needs n_list".into());
                }
                if self.purity_samples < 1 {
                    return err("purity_samples must be >= 1".into());
                }
            }
            _ => {}
        }
        Ok(())
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::Config(format!("cannot parse '{value}' for key '{key}'")))
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>, CliError> {
    value
        .split(',')
        .map(|item| parse_num(key, item.trim()))
        .collect()
}

fn join_f64(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_render_and_parse() {
        let defaults = ExperimentConfig::default();
        let mut parsed = ExperimentConfig::default();
        parsed.n = 99; // will be overwritten by the rendered text
        parsed.apply_text(&defaults.render()).unwrap();
        assert_eq!(parsed.n, defaults.n);
        assert_eq!(parsed.purity, defaults.purity);
        assert_eq!(parsed.n_list, defaults.n_list);
        assert_eq!(parsed.out_path, defaults.out_path);
        assert_eq!(parsed.method.name(), defaults.method.name());
    }

    #[test]
    fn unknown_keys_are_rejected_with_location() {
        let mut config = ExperimentConfig::default();
        let err = config
            .apply_text("[experiment]\nbogus = 1\n")
            .unwrap_err();
        match err {
            CliError::Config(msg) => {
                assert!(msg.contains("bogus"), "{msg}");
                assert!(msg.contains("line 2"), "{msg}");
            }
            other => panic!("wrong error {other:?}"),
        }
    }

    #[test]
    fn comments_and_lists_parse() {
        let mut config = ExperimentConfig::default();
        config
            .apply_text("[scan]\nn_list = 2, 4, 6 # inline comment\ndelta_list = 0.1,1.0\n")
            .unwrap();
        assert_eq!(config.n_list, vec![2, 4, 6]);
        assert_eq!(config.delta_list, vec![0.1, 1.0]);
    }

    #[test]
    fn validation_names_the_field() {
        let mut config = ExperimentConfig::default();
        config.m = 40;
        let err = config.validate(ExperimentKind::Estimate).unwrap_err();
        match err {
            CliError::Config(msg) => assert!(msg.contains("m = 40"), "{msg}"),
            other => panic!("wrong error {other:?}"),
        }
    }
}
