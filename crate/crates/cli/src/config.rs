//! Experiment configuration.
//!
//! Configs are TOML; JSON with the same shape is accepted when the file name
//! ends in `.json` or the text starts with `{`. Parse errors and semantic
//! errors both carry a line number.

use std::path::{Path, PathBuf};

use meanfield_core::linalg::CMatrix;
use meanfield_core::reduced::{Cutoff, InitialData};
use meanfield_core::statistics::ObservableSpec;
use meanfield_core::{PairPotential, WaveFunction, C64};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult, Location};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Study {
    Convergence,
    Growth,
    Bogoliubov,
    Clt,
}

impl Study {
    pub fn name(self) -> &'static str {
        match self {
            Study::Convergence => "convergence",
            Study::Growth => "growth",
            Study::Bogoliubov => "bogoliubov",
            Study::Clt => "clt",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub study: Study,
    /// Particle numbers swept by the study.
    #[serde(default)]
    pub particles: Vec<usize>,
    #[serde(default = "default_budget")]
    pub memory_budget_mb: u64,
    #[serde(default)]
    pub seed: u64,
    pub lattice: LatticeConfig,
    pub potential: PotentialConfig,
    pub initial: InitialConfig,
    #[serde(default)]
    pub cutoff: CutoffConfig,
    pub time: TimeConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observable: Option<ObservableConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub btu: Option<BtuConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_budget() -> u64 {
    2048
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub sites: usize,
}

/// `V(d)` for minimal-image displacement `d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialConfig {
    Zero,
    /// `strength · exp(-d²/(2·width²))`.
    Gaussian { strength: f64, width: f64 },
    /// Explicit values for `d = 0..M`.
    Values { values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub state: StateConfig,
    #[serde(default)]
    pub data: DataKind,
}

/// Initial one-particle wavefunction; normalized after construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateConfig {
    /// `∝ exp(amplitude · cos(2πx/M))`.
    Smooth { amplitude: f64 },
    PlaneWave { k: usize },
    /// Amplitudes as real and imaginary parts; `im` defaults to zero.
    Values {
        re: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        im: Option<Vec<f64>>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataKind {
    #[default]
    Product,
    Coherent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case", deny_unknown_fields)]
pub enum CutoffConfig {
    #[default]
    Auto,
    Extra { value: usize },
    Fixed { value: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub end: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    /// Grid points per propagation step (growth, BTU) or per reported row
    /// (Bogoliubov identities).
    #[serde(default = "default_stride")]
    pub stride: usize,
    /// Reporting times for convergence and CLT; defaults to `[end]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<f64>>,
}

fn default_dt() -> f64 {
    1e-3
}

fn default_stride() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObservableConfig {
    /// Multiplication by `cos(2πx/M)`.
    Cosine { delta: f64 },
    /// Symmetrized nearest-neighbour hopping.
    Hopping { delta: f64 },
    /// Row-major `M × M` matrix; must be Hermitian.
    Matrix {
        delta: f64,
        re: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        im: Option<Vec<Vec<f64>>>,
    },
}

impl ObservableConfig {
    pub fn delta(&self) -> f64 {
        match self {
            ObservableConfig::Cosine { delta } | ObservableConfig::Hopping { delta } => *delta,
            ObservableConfig::Matrix { delta, .. } => *delta,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BtuConfig {
    pub n_max: usize,
    pub samples: usize,
    pub time: f64,
    #[serde(default = "default_test_sector")]
    pub test_sector: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare_up_to: Option<usize>,
}

fn default_test_sector() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default = "yes")]
    pub charts: bool,
    #[serde(default)]
    pub snapshots: bool,
    /// Also report two-particle distances in the convergence study.
    #[serde(default)]
    pub gamma2: bool,
}

fn yes() -> bool {
    true
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: None, charts: true, snapshots: false, gamma2: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Toml,
    Json,
}

impl Format {
    pub fn detect(path: Option<&Path>, text: &str) -> Self {
        let by_ext = path.and_then(|p| p.extension()).map(|e| e.eq_ignore_ascii_case("json"));
        match by_ext {
            Some(true) => Format::Json,
            Some(false) => Format::Toml,
            None if text.trim_start().starts_with('{') => Format::Json,
            None => Format::Toml,
        }
    }
}

/// A parsed config together with the text it came from, for locating
/// semantic errors.
#[derive(Debug, Clone)]
pub struct Source {
    pub path: Option<PathBuf>,
    pub text: String,
    pub format: Format,
}

impl Source {
    pub fn read(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
        let format = Format::detect(Some(path), &text);
        Ok(Self { path: Some(path.to_path_buf()), text, format })
    }

    pub fn inline(text: &str) -> Self {
        Self { path: None, text: text.to_string(), format: Format::detect(None, text) }
    }

    fn error(&self, location: Option<Location>, message: impl Into<String>) -> CliError {
        CliError::Config { file: self.path.clone(), location, message: message.into() }
    }

    /// Parses and validates.
    pub fn load(&self) -> CliResult<ExperimentConfig> {
        let cfg = self.parse()?;
        cfg.validate().map_err(|(path, msg)| self.error(locate(&self.text, self.format, &path), format!("{path}: {msg}")))?;
        Ok(cfg)
    }

    /// Syntax and schema only.
    pub fn parse(&self) -> CliResult<ExperimentConfig> {
        match self.format {
            Format::Toml => toml::from_str(&self.text).map_err(|e| {
                let msg = e.message().trim().to_string();
                let location = e.span().map(|s| {
                    // Tagged tables report the whole table; point at the key instead.
                    let key = msg.strip_prefix("unknown field `").and_then(|r| r.split('`').next());
                    key.and_then(|k| key_line_after(&self.text, k, s.start))
                        .unwrap_or_else(|| offset_location(&self.text, s.start))
                });
                self.error(location, msg)
            }),
            Format::Json => serde_json::from_str(&self.text).map_err(|e| {
                let location = (e.line() > 0).then(|| Location { line: e.line(), column: Some(e.column()) });
                let msg = e.to_string();
                let msg = msg.split(" at line ").next().unwrap_or(&msg).to_string();
                self.error(location, msg)
            }),
        }
    }
}

fn offset_location(text: &str, offset: usize) -> Location {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    Location { line, column: Some(column) }
}

fn key_line_after(text: &str, key: &str, offset: usize) -> Option<Location> {
    let start = offset_location(text, offset).line - 1;
    text.lines().enumerate().skip(start).find_map(|(i, l)| {
        let l = l.trim_start();
        let assigns = l.strip_prefix(key).is_some_and(|r| r.trim_start().starts_with('='));
        assigns.then_some(Location { line: i + 1, column: Some(text.lines().nth(i)?.len() - l.len() + 1) })
    })
}

/// Best-effort line of a dotted key path such as `potential.values`.
fn locate(text: &str, format: Format, path: &str) -> Option<Location> {
    let parts: Vec<&str> = path.split('.').collect();
    let line_of = |pred: &dyn Fn(&str) -> bool, from: usize| {
        text.lines().enumerate().skip(from).find(|(_, l)| pred(l.trim_start())).map(|(i, _)| i)
    };
    let found = match format {
        Format::Json => {
            let mut at = 0;
            let mut hit = None;
            for p in &parts {
                let key = format!("\"{p}\"");
                if let Some(i) = line_of(&|l: &str| l.contains(&key), at) {
                    at = i;
                    hit = Some(i);
                }
            }
            hit
        }
        Format::Toml => {
            let key_line = |name: &str, from: usize| {
                let name = name.to_string();
                line_of(
                    &move |l: &str| l.starts_with(&name) && l[name.len()..].trim_start().starts_with('='),
                    from,
                )
            };
            match parts.as_slice() {
                [key] => key_line(key, 0).or_else(|| line_of(&|l: &str| l.starts_with(&format!("[{key}]")), 0)),
                [table, rest @ ..] => {
                    let header = line_of(&|l: &str| l.starts_with(&format!("[{table}]")), 0);
                    match header {
                        Some(h) => key_line(rest[0], h + 1).or(Some(h)),
                        None => key_line(table, 0),
                    }
                }
                [] => None,
            }
        }
    };
    found.map(|i| Location { line: i + 1, column: None })
}

type Invalid = (String, String);

fn invalid(path: &str, msg: impl Into<String>) -> Invalid {
    (path.to_string(), msg.into())
}

impl ExperimentConfig {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes to JSON")
    }

    pub fn sites(&self) -> usize {
        self.lattice.sites
    }

    pub fn memory_budget(&self) -> u64 {
        self.memory_budget_mb.saturating_mul(1 << 20)
    }

    pub fn potential(&self) -> Result<PairPotential, Invalid> {
        let m = self.sites();
        let v = match &self.potential {
            PotentialConfig::Zero => Ok(PairPotential::zero(m)),
            PotentialConfig::Gaussian { strength, width } => PairPotential::gaussian(m, *strength, *width),
            PotentialConfig::Values { values } => {
                if values.len() != m {
                    return Err(invalid("potential.values", format!("expected {m} values, found {}", values.len())));
                }
                PairPotential::new(values.clone())
            }
        };
        let path = match self.potential {
            PotentialConfig::Values { .. } => "potential.values",
            _ => "potential",
        };
        v.map_err(|e| invalid(path, e.to_string()))
    }

    pub fn initial_state(&self) -> Result<WaveFunction, Invalid> {
        let m = self.sites();
        let raw = match &self.initial.state {
            StateConfig::Smooth { amplitude } => WaveFunction::new(
                (0..m)
                    .map(|x| C64::new((amplitude * (2.0 * std::f64::consts::PI * x as f64 / m as f64).cos()).exp(), 0.0))
                    .collect(),
            ),
            StateConfig::PlaneWave { k } => WaveFunction::plane_wave(m, *k),
            StateConfig::Values { re, im } => {
                if re.len() != m {
                    return Err(invalid("initial.state", format!("expected {m} amplitudes, found {}", re.len())));
                }
                let im = im.clone().unwrap_or_else(|| vec![0.0; m]);
                if im.len() != m {
                    return Err(invalid("initial.state", format!("expected {m} imaginary parts, found {}", im.len())));
                }
                WaveFunction::new(re.iter().zip(&im).map(|(&a, &b)| C64::new(a, b)).collect())
            }
        };
        if !raw.is_finite() {
            return Err(invalid("initial.state", "amplitudes must be finite"));
        }
        raw.normalized().map_err(|e| invalid("initial.state", e.to_string()))
    }

    pub fn observable(&self) -> Result<Option<ObservableSpec>, Invalid> {
        let m = self.sites();
        let Some(obs) = &self.observable else { return Ok(None) };
        let spec = match obs {
            ObservableConfig::Cosine { .. } => ObservableSpec::cosine(m),
            ObservableConfig::Hopping { .. } => ObservableSpec::hopping(m),
            ObservableConfig::Matrix { re, im, .. } => {
                let shape_ok = |rows: &Vec<Vec<f64>>| rows.len() == m && rows.iter().all(|r| r.len() == m);
                if !shape_ok(re) || im.as_ref().is_some_and(|i| !shape_ok(i)) {
                    return Err(invalid("observable", format!("matrix must be {m} x {m}")));
                }
                let mat = CMatrix::from_fn(m, m, |x, y| {
                    C64::new(re[x][y], im.as_ref().map_or(0.0, |i| i[x][y]))
                });
                ObservableSpec::new("matrix", mat).map_err(|e| invalid("observable", e.to_string()))?
            }
        };
        Ok(Some(spec))
    }

    pub fn initial_data(&self) -> InitialData {
        match self.initial.data {
            DataKind::Product => InitialData::Product,
            DataKind::Coherent => InitialData::Coherent,
        }
    }

    pub fn cutoff(&self) -> Cutoff {
        match self.cutoff {
            CutoffConfig::Auto => Cutoff::Auto,
            CutoffConfig::Extra { value } => Cutoff::Extra(value),
            CutoffConfig::Fixed { value } => Cutoff::Fixed(value),
        }
    }

    /// Reporting times: `time.samples`, or `[time.end]`.
    pub fn sample_times(&self) -> Vec<f64> {
        self.time.samples.clone().unwrap_or_else(|| vec![self.time.end])
    }

    /// Semantic checks; the error carries the offending key path.
    pub fn validate(&self) -> Result<(), Invalid> {
        let m = self.sites();
        if m < 2 {
            return Err(invalid("lattice.sites", format!("need at least 2 sites, got {m}")));
        }
        if m > 64 {
            return Err(invalid("lattice.sites", format!("at most 64 sites supported, got {m}")));
        }
        self.potential()?;
        self.initial_state()?;
        let t = &self.time;
        if !(t.dt > 0.0 && t.dt.is_finite()) {
            return Err(invalid("time.dt", "must be positive"));
        }
        if !(t.end >= 0.0 && t.end.is_finite()) {
            return Err(invalid("time.end", "must be nonnegative"));
        }
        if t.stride == 0 {
            return Err(invalid("time.stride", "must be at least 1"));
        }
        if let Some(s) = &t.samples {
            if s.is_empty() {
                return Err(invalid("time.samples", "must not be empty"));
            }
            if s.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(invalid("time.samples", "must be strictly increasing"));
            }
            if let Some(bad) = s.iter().find(|&&x| !(0.0..=t.end).contains(&x)) {
                return Err(invalid("time.samples", format!("{bad} lies outside [0, end = {}]", t.end)));
            }
            if let Some(bad) = s.iter().find(|&&x| ((x / t.dt) - (x / t.dt).round()).abs() > 1e-6) {
                return Err(invalid("time.samples", format!("{bad} is not a multiple of dt = {}", t.dt)));
            }
        }
        if self.particles.contains(&0) {
            return Err(invalid("particles", "particle numbers must be positive"));
        }
        if self.memory_budget_mb == 0 {
            return Err(invalid("memory_budget_mb", "must be positive"));
        }
        let needs_particles = matches!(self.study, Study::Convergence | Study::Growth | Study::Clt);
        if needs_particles && self.particles.is_empty() {
            return Err(invalid("particles", format!("the {} study needs at least one N", self.study.name())));
        }
        match self.study {
            Study::Convergence => {}
            Study::Growth => {
                if !matches!(self.cutoff, CutoffConfig::Fixed { .. }) {
                    return Err(invalid("cutoff", "the growth study needs a fixed cutoff"));
                }
                let steps = (t.end / t.dt).round() as usize / t.stride;
                if steps < 2 {
                    return Err(invalid("time.stride", "the growth study needs at least two samples"));
                }
            }
            Study::Bogoliubov => {
                if let Some(b) = &self.btu {
                    if !(b.time >= 0.0 && b.time <= t.end) {
                        return Err(invalid("btu.time", format!("must lie in [0, end = {}]", t.end)));
                    }
                    if b.samples == 0 {
                        return Err(invalid("btu.samples", "must be at least 1"));
                    }
                    if b.test_sector + 1 >= b.n_max {
                        return Err(invalid("btu.test_sector", "must lie at least two sectors below n_max"));
                    }
                    if b.compare_up_to.is_some_and(|c| c > b.n_max) {
                        return Err(invalid("btu.compare_up_to", "must not exceed n_max"));
                    }
                }
            }
            Study::Clt => match &self.observable {
                None => return Err(invalid("observable", "the clt study needs an observable")),
                Some(o) if !(o.delta() > 0.0) => return Err(invalid("observable.delta", "must be positive")),
                Some(_) => {}
            },
        }
        self.observable()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
study = "convergence"
particles = [2, 4]

[lattice]
sites = 4

[potential]
kind = "zero"

[initial]
state = { kind = "plane_wave", k = 1 }

[time]
end = 0.5
"#;

    #[test]
    fn defaults_fill_in() {
        let c = Source::inline(MINIMAL).load().unwrap();
        assert_eq!(c.time.dt, 1e-3);
        assert_eq!(c.cutoff, CutoffConfig::Auto);
        assert_eq!(c.initial.data, DataKind::Product);
        assert_eq!(c.memory_budget_mb, 2048);
        assert_eq!(c.sample_times(), vec![0.5]);
        assert!(c.output.charts);
    }

    #[test]
    fn offsets_become_lines() {
        let text = "a\nbc\ndef";
        assert_eq!(offset_location(text, 0), Location { line: 1, column: Some(1) });
        assert_eq!(offset_location(text, 4), Location { line: 2, column: Some(3) });
        assert_eq!(offset_location(text, 7), Location { line: 3, column: Some(3) });
    }

    #[test]
    fn keys_are_located() {
        let text = "study = \"clt\"\n[potential]\nkind = \"values\"\nvalues = [1, 2]\n[time]\nend = 1\n";
        assert_eq!(locate(text, Format::Toml, "potential.values").unwrap().line, 4);
        assert_eq!(locate(text, Format::Toml, "time.end").unwrap().line, 6);
        assert_eq!(locate(text, Format::Toml, "study").unwrap().line, 1);
        assert_eq!(locate(text, Format::Toml, "potential.width").unwrap().line, 2);
    }

    #[test]
    fn format_detection() {
        assert_eq!(Format::detect(Some(Path::new("a.json")), ""), Format::Json);
        assert_eq!(Format::detect(Some(Path::new("a.toml")), "{"), Format::Toml);
        assert_eq!(Format::detect(None, "  {\"a\": 1}"), Format::Json);
        assert_eq!(Format::detect(None, "a = 1"), Format::Toml);
    }

    #[test]
    fn semantic_errors_name_the_key() {
        let text = MINIMAL.replace("end = 0.5", "end = 0.5\nsamples = [0.25, 0.1]");
        let e = Source::inline(&text).load().unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("time.samples"), "{msg}");
        assert!(msg.contains("line 16"), "{msg}");
    }
}
