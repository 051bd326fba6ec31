//! Scenario files.
//!
//! A scenario is a TOML document:
//!
//! ```toml
//! hops = 3
//! omega_hat = [1.0, 1.0, 1.0]
//! snr_db = [5.0, 5.0, 5.0]          # needed for semi-blind relays
//! relay_gain = "semi-blind"          # "unity" (default), "semi-blind" or "explicit"
//! # gains = [0.8, 0.9]               # N - 1 relay amplitude gains for "explicit"
//! node_doppler_hz = [10.0, 10.0, 10.0, 0.0]   # source, relays, destination
//! # node_mobile = [true, true, true, false]  # a fixed node contributes 0 Hz
//! # fm_ref_hz = 10.0                 # normalization; default: largest mobile node shift
//! # reference_power = 1.0            # threshold_db = 20 log10(y / sqrt(reference_power))
//! methods = ["laplace", "exact"]
//!
//! [grid]
//! lo_db = -30.0
//! hi_db = 10.0
//! step_db = 0.5
//!
//! [simulation]
//! seed = 1
//! # duration_s = 2000.0              # default: fade_cycles periods of the slowest hop
//! fade_cycles = 10000.0
//! oscillators = 32
//! ```

use std::path::Path;
use std::str::FromStr;

use cascade_lcr::{CascadeSpec, HopSpec, Method, RelayGain, SimulationSettings, ThresholdGrid};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub hops: usize,
    pub omega_hat: Vec<f64>,
    #[serde(default)]
    pub snr_db: Option<Vec<f64>>,
    #[serde(default)]
    pub relay_gain: GainMode,
    #[serde(default)]
    pub gains: Option<Vec<f64>>,
    pub node_doppler_hz: Vec<f64>,
    #[serde(default)]
    pub node_mobile: Option<Vec<bool>>,
    #[serde(default)]
    pub fm_ref_hz: Option<f64>,
    #[serde(default = "one")]
    pub reference_power: f64,
    #[serde(default = "default_methods")]
    pub methods: Vec<MethodChoice>,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub simulation: SimulationSection,
}

fn one() -> f64 {
    1.0
}

fn default_methods() -> Vec<MethodChoice> {
    vec![MethodChoice::Laplace]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GainMode {
    #[default]
    Unity,
    SemiBlind,
    Explicit,
}

/// A method as named on the command line and in scenario files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodChoice {
    Exact,
    Laplace,
    Simulate,
    All,
}

impl MethodChoice {
    pub fn expand(self) -> Vec<Method> {
        match self {
            MethodChoice::Exact => vec![Method::Exact],
            MethodChoice::Laplace => vec![Method::Laplace],
            MethodChoice::Simulate => vec![Method::Simulated],
            MethodChoice::All => vec![Method::Exact, Method::Laplace, Method::Simulated],
        }
    }
}

impl FromStr for MethodChoice {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "exact" => Ok(MethodChoice::Exact),
            "laplace" => Ok(MethodChoice::Laplace),
            "simulate" => Ok(MethodChoice::Simulate),
            "all" => Ok(MethodChoice::All),
            other => Err(CliError::Usage(format!(
                "unknown method '{other}'; expected exact, laplace, simulate or all"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub lo_db: f64,
    pub hi_db: f64,
    pub step_db: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection {
            lo_db: -30.0,
            hi_db: 10.0,
            step_db: 0.5,
        }
    }
}

impl FromStr for GridSection {
    type Err = CliError;

    /// Parses `lo_db:hi_db:step_db`.
    fn from_str(s: &str) -> Result<Self, CliError> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || CliError::Usage(format!("grid '{s}' is not of the form lo_db:hi_db:step_db"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let v = parts
            .iter()
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(GridSection {
            lo_db: v[0],
            hi_db: v[1],
            step_db: v[2],
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub duration_s: Option<f64>,
    #[serde(default = "default_fade_cycles")]
    pub fade_cycles: f64,
    #[serde(default = "default_oscillators")]
    pub oscillators: usize,
}

fn default_seed() -> u64 {
    SimulationSettings::default().seed
}

fn default_fade_cycles() -> f64 {
    SimulationSettings::default().fade_cycles
}

fn default_oscillators() -> usize {
    SimulationSettings::default().oscillators
}

impl Default for SimulationSection {
    fn default() -> Self {
        SimulationSection {
            seed: default_seed(),
            duration_s: None,
            fade_cycles: default_fade_cycles(),
            oscillators: default_oscillators(),
        }
    }
}

impl SimulationSection {
    pub fn settings(&self) -> SimulationSettings {
        SimulationSettings {
            seed: self.seed,
            duration: self.duration_s,
            fade_cycles: self.fade_cycles,
            oscillators: self.oscillators,
            ..SimulationSettings::default()
        }
    }
}

/// 1-based line of byte offset `pos` in `src`.
fn line_at(src: &str, pos: usize) -> usize {
    src[..pos.min(src.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

/// Line on which `key` is assigned, if it is.
fn line_of_key(src: &str, key: &str) -> Option<usize> {
    src.lines().position(|l| {
        let t = l.trim_start();
        t.strip_prefix(key)
            .is_some_and(|rest| rest.trim_start().starts_with('='))
    })
    .map(|i| i + 1)
}

impl ScenarioFile {
    pub fn parse(src: &str) -> Result<Self, CliError> {
        let s: ScenarioFile = toml::from_str(src).map_err(|e| CliError::Parse {
            file: None,
            line: e.span().map(|r| line_at(src, r.start)),
            message: e.message().to_string(),
        })?;
        s.validate().map_err(|(key, message)| CliError::Parse {
            file: None,
            line: line_of_key(src, key),
            message,
        })?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let src = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::parse(&src).map_err(|e| e.in_file(path))
    }

    fn validate(&self) -> Result<(), (&'static str, String)> {
        let n = self.hops;
        if n == 0 {
            return Err(("hops", "hops must be at least 1".into()));
        }
        let count = |key: &'static str, got: usize, want: usize| {
            if got == want {
                Ok(())
            } else {
                Err((key, format!("{key} has {got} entries, {n} hops need {want}")))
            }
        };
        count("omega_hat", self.omega_hat.len(), n)?;
        count("node_doppler_hz", self.node_doppler_hz.len(), n + 1)?;
        if let Some(s) = &self.snr_db {
            count("snr_db", s.len(), n)?;
        }
        if let Some(m) = &self.node_mobile {
            count("node_mobile", m.len(), n + 1)?;
        }
        match (self.relay_gain, &self.gains) {
            (GainMode::Explicit, Some(g)) => count("gains", g.len(), n - 1)?,
            (GainMode::Explicit, None) => {
                return Err(("relay_gain", "relay_gain = \"explicit\" needs a gains list".into()))
            }
            (_, Some(_)) => {
                return Err(("gains", "gains are only read with relay_gain = \"explicit\"".into()))
            }
            (GainMode::SemiBlind, None) if self.snr_db.is_none() && n > 1 => {
                return Err(("relay_gain", "semi-blind relays need snr_db".into()))
            }
            _ => {}
        }
        if self.methods.is_empty() {
            return Err(("methods", "methods must not be empty".into()));
        }
        if !(self.reference_power > 0.0 && self.reference_power.is_finite()) {
            return Err(("reference_power", "reference_power must be positive".into()));
        }
        if let Some(f) = self.fm_ref_hz {
            if !(f > 0.0 && f.is_finite()) {
                return Err(("fm_ref_hz", "fm_ref_hz must be positive".into()));
            }
        }
        Ok(())
    }

    /// Node shifts with fixed nodes zeroed.
    pub fn node_dopplers(&self) -> Vec<f64> {
        match &self.node_mobile {
            Some(m) => self
                .node_doppler_hz
                .iter()
                .zip(m)
                .map(|(&f, &mobile)| if mobile { f } else { 0.0 })
                .collect(),
            None => self.node_doppler_hz.clone(),
        }
    }

    pub fn cascade(&self) -> Result<CascadeSpec, CliError> {
        let hops = self
            .omega_hat
            .iter()
            .enumerate()
            .map(|(i, &o)| {
                let h = HopSpec::new(o)?;
                match &self.snr_db {
                    Some(s) => h.with_snr_db(s[i]),
                    None => Ok(h),
                }
            })
            .collect::<cascade_lcr::Result<Vec<_>>>()?;
        let mut gains = vec![RelayGain::Unity];
        for i in 1..self.hops {
            gains.push(match self.relay_gain {
                GainMode::Unity => RelayGain::Unity,
                GainMode::SemiBlind => RelayGain::SemiBlind,
                GainMode::Explicit => RelayGain::Explicit(self.gains.as_ref().unwrap()[i - 1]),
            });
        }
        Ok(CascadeSpec::from_nodes(hops, &self.node_dopplers(), gains)?)
    }

    /// Doppler used to normalize LCR and AFD.
    pub fn fm_ref(&self) -> Result<f64, CliError> {
        if let Some(f) = self.fm_ref_hz {
            return Ok(f);
        }
        let f = self.node_dopplers().into_iter().fold(0.0, f64::max);
        if f > 0.0 {
            Ok(f)
        } else {
            Err(CliError::Usage(
                "every node is fixed, so LCR and AFD are undefined".into(),
            ))
        }
    }

    pub fn grid(&self, over: Option<GridSection>) -> Result<ThresholdGrid, CliError> {
        let g = over.unwrap_or(self.grid);
        Ok(ThresholdGrid::from_db(g.lo_db, g.hi_db, g.step_db, self.reference_power)?)
    }

    /// Requested methods in order, without repeats.
    pub fn methods(&self, over: Option<MethodChoice>) -> Vec<Method> {
        let chosen = match over {
            Some(m) => vec![m],
            None => self.methods.clone(),
        };
        let mut out = Vec::new();
        for m in chosen.into_iter().flat_map(MethodChoice::expand) {
            if !out.contains(&m) {
                out.push(m);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"
hops = 2
omega_hat = [1.0, 0.5]
node_doppler_hz = [10.0, 10.0, 0.0]
methods = ["laplace", "exact"]

[grid]
lo_db = -10.0
hi_db = 0.0
step_db = 5.0
"#;

    #[test]
    fn parses_and_builds() {
        let s = ScenarioFile::parse(BASIC).unwrap();
        let c = s.cascade().unwrap();
        assert_eq!(c.n_hops(), 2);
        assert!((c.phi() - 0.5).abs() < 1e-15);
        // Hop 1 is mobile-to-mobile (10, 10), hop 2 fixed-to-mobile.
        assert!((c.doppler_sum_sq() - 300.0).abs() < 1e-9);
        assert_eq!(s.fm_ref().unwrap(), 10.0);
        assert_eq!(s.grid(None).unwrap().len(), 3);
        assert_eq!(s.methods(None), vec![Method::Laplace, Method::Exact]);
        assert_eq!(
            s.methods(Some(MethodChoice::All)),
            vec![Method::Exact, Method::Laplace, Method::Simulated]
        );
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let src = "hops = 2\nomega_hat = [1.0, 0.5\nnode_doppler_hz = [1.0]\n";
        match ScenarioFile::parse(src) {
            Err(CliError::Parse { line: Some(l), .. }) => assert!((2..=3).contains(&l)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn inconsistent_lengths_point_at_the_key() {
        let src = BASIC.replace("[10.0, 10.0, 0.0]", "[10.0, 0.0]");
        match ScenarioFile::parse(&src) {
            Err(CliError::Parse { line, message, .. }) => {
                assert_eq!(line, Some(4));
                assert!(message.contains("node_doppler_hz"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let src = format!("{BASIC}\n[simulation]\nsed = 3\n");
        assert!(matches!(ScenarioFile::parse(&src), Err(CliError::Parse { line: Some(_), .. })));
    }

    #[test]
    fn node_mobility_flags_zero_fixed_nodes() {
        let src = BASIC.replace(
            "methods",
            "node_mobile = [true, false, false]\nmethods",
        );
        let s = ScenarioFile::parse(&src).unwrap();
        assert_eq!(s.node_dopplers(), vec![10.0, 0.0, 0.0]);
    }

    #[test]
    fn semi_blind_needs_snr() {
        let src = BASIC.replace("methods", "relay_gain = \"semi-blind\"\nmethods");
        assert!(ScenarioFile::parse(&src).is_err());
        let src = src.replace("methods", "snr_db = [5.0, 5.0]\nmethods");
        let s = ScenarioFile::parse(&src).unwrap();
        assert!(s.cascade().unwrap().resolved_gains()[1] > 0.0);
    }

    #[test]
    fn grid_flag_syntax() {
        let g: GridSection = "-20:5:2.5".parse().unwrap();
        assert_eq!(g, GridSection { lo_db: -20.0, hi_db: 5.0, step_db: 2.5 });
        assert!("1:2".parse::<GridSection>().is_err());
        assert!("a:b:c".parse::<GridSection>().is_err());
    }
}
