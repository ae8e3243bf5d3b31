//! Run configuration in TOML (`[section]` + `key = value`) or JSON, one
//! section per command. Parsing is strict: unknown keys are errors.

use std::fmt;

use serde::de::{self, SeqAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::spectral::Method;

/// One or more inverse temperatures: a number, an array, or `"0.5,1,5"`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct BetaList(pub Vec<f64>);

impl<'de> Deserialize<'de> for BetaList {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = BetaList;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number, an array of numbers, or a comma-separated string")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<BetaList, E> {
                Ok(BetaList(vec![v]))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<BetaList, E> {
                Ok(BetaList(vec![v as f64]))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<BetaList, E> {
                Ok(BetaList(vec![v as f64]))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<BetaList, E> {
                v.split(',')
                    .map(|s| s.trim().parse::<f64>().map_err(|_| E::custom(format!("`{}` is not a number", s.trim()))))
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map(BetaList)
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> std::result::Result<BetaList, A::Error> {
                let mut out = Vec::new();
                while let Some(x) = seq.next_element::<f64>()? {
                    out.push(x);
                }
                Ok(BetaList(out))
            }
        }
        d.deserialize_any(V)
    }
}

fn d_t_max() -> f64 {
    20.0
}
fn d_steps() -> usize {
    2000
}
fn d_one() -> f64 {
    1.0
}
fn d_fig_gamma() -> f64 {
    0.1
}
fn d_fig_betas() -> BetaList {
    BetaList(vec![0.5, 1.0, 5.0])
}
fn d_n_basis() -> usize {
    64
}
fn d_dt() -> f64 {
    1e-3
}
fn d_record_every() -> usize {
    10
}
fn d_true() -> bool {
    true
}
fn d_eps_pos() -> f64 {
    1e-10
}
fn d_n_modes() -> usize {
    512
}
fn d_omega_max() -> f64 {
    100.0
}
fn d_out_dt() -> f64 {
    0.01
}
fn d_grid_min() -> f64 {
    -8.0
}
fn d_grid_max() -> f64 {
    8.0
}
fn d_grid_step() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelsConfig {
    pub gamma_s: f64,
    pub beta_s: f64,
    #[serde(default = "d_t_max")]
    pub t_max: f64,
    #[serde(default = "d_steps")]
    pub steps: usize,
    #[serde(default = "default_method")]
    pub method: Method,
}

fn default_method() -> Method {
    Method::ClosedForm
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoeffsConfig {
    pub gamma_s: f64,
    pub beta_s: BetaList,
    #[serde(default = "d_t_max")]
    pub t_max: f64,
    #[serde(default = "d_steps")]
    pub steps: usize,
}

/// Same keys as [`CoeffsConfig`], defaulted to `gamma_s = 0.1`, `beta_s = [0.5, 1, 5]`, `t_max = 20`, `steps = 2000`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Figure1Config {
    #[serde(default = "d_fig_gamma")]
    pub gamma_s: f64,
    #[serde(default = "d_fig_betas")]
    pub beta_s: BetaList,
    #[serde(default = "d_t_max")]
    pub t_max: f64,
    #[serde(default = "d_steps")]
    pub steps: usize,
}

impl Default for Figure1Config {
    fn default() -> Self {
        Self { gamma_s: d_fig_gamma(), beta_s: d_fig_betas(), t_max: d_t_max(), steps: d_steps() }
    }
}

impl From<&Figure1Config> for CoeffsConfig {
    fn from(f: &Figure1Config) -> Self {
        Self { gamma_s: f.gamma_s, beta_s: f.beta_s.clone(), t_max: f.t_max, steps: f.steps }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialKind {
    /// Uncorrelated harmonic thermal state at `omega_g`.
    #[default]
    Thermal,
    /// Reduced system state of the full system-plus-bath ground Gibbs state.
    ExactReduced,
}

/// Propagation parameters; also the parameter set of `compare`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagateConfig {
    pub gamma_s: f64,
    pub beta_s: f64,
    #[serde(default = "d_one")]
    pub omega_e: f64,
    /// Minimum `d` of the excited potential.
    #[serde(default = "d_one")]
    pub shift: f64,
    #[serde(default)]
    pub quartic: f64,
    #[serde(default = "d_one")]
    pub omega_g: f64,
    #[serde(default)]
    pub q0: f64,
    #[serde(default)]
    pub cross_gamma_s: f64,
    #[serde(default)]
    pub ground_gamma_s: f64,
    #[serde(default = "d_n_basis")]
    pub n_basis: usize,
    /// Basis frequency; defaults to `omega_e`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_ref: Option<f64>,
    #[serde(default = "d_dt")]
    pub dt: f64,
    #[serde(default = "d_t_max")]
    pub t_end: f64,
    #[serde(default = "d_record_every")]
    pub record_every: usize,
    #[serde(default = "d_true")]
    pub min_eig: bool,
    #[serde(default = "d_eps_pos")]
    pub eps_pos: f64,
    #[serde(default)]
    pub symmetrize: bool,
    #[serde(default)]
    pub initial: InitialKind,
    /// Bath discretization, used by `exact_reduced` and `compare`.
    #[serde(default = "d_n_modes")]
    pub n_modes: usize,
    #[serde(default = "d_omega_max")]
    pub omega_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    pub gamma_s: f64,
    pub beta_s: f64,
    #[serde(default = "d_one")]
    pub omega_e: f64,
    #[serde(default = "d_one")]
    pub shift: f64,
    #[serde(default = "d_one")]
    pub omega_g: f64,
    #[serde(default)]
    pub ground_gamma_s: f64,
    #[serde(default = "d_n_modes")]
    pub n_modes: usize,
    #[serde(default = "d_omega_max")]
    pub omega_max: f64,
    #[serde(default = "d_t_max")]
    pub t_end: f64,
    /// Output spacing.
    #[serde(default = "d_out_dt")]
    pub dt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WignerSource {
    #[default]
    Thermal,
    Coherent,
    /// Final state of the `[propagate]` run.
    Propagated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WignerConfig {
    #[serde(default)]
    pub state: WignerSource,
    #[serde(default = "d_one")]
    pub beta_s: f64,
    #[serde(default = "d_one")]
    pub omega_g: f64,
    #[serde(default)]
    pub q0: f64,
    #[serde(default)]
    pub p0: f64,
    #[serde(default = "d_n_basis")]
    pub n_basis: usize,
    #[serde(default = "d_one")]
    pub omega_ref: f64,
    #[serde(default = "d_grid_min")]
    pub q_min: f64,
    #[serde(default = "d_grid_max")]
    pub q_max: f64,
    #[serde(default = "d_grid_step")]
    pub q_step: f64,
    #[serde(default = "d_grid_min")]
    pub p_min: f64,
    #[serde(default = "d_grid_max")]
    pub p_max: f64,
    #[serde(default = "d_grid_step")]
    pub p_step: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernels: Option<KernelsConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<CoeffsConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub figure1: Option<Figure1Config>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub propagate: Option<PropagateConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare: Option<PropagateConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wigner: Option<WignerConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Toml,
    Json,
}

impl Format {
    pub fn detect(text: &str) -> Self {
        if text.trim_start().starts_with('{') {
            Format::Json
        } else {
            Format::Toml
        }
    }
}

/// A validation failure for one key.
struct Invalid {
    section: &'static str,
    key: &'static str,
    reason: String,
}

fn positive(section: &'static str, key: &'static str, v: f64) -> std::result::Result<(), Invalid> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Invalid { section, key, reason: format!("must be positive, got {v}") })
    }
}

fn non_negative(section: &'static str, key: &'static str, v: f64) -> std::result::Result<(), Invalid> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Invalid { section, key, reason: format!("must be >= 0, got {v}") })
    }
}

fn at_least(section: &'static str, key: &'static str, v: usize, min: usize) -> std::result::Result<(), Invalid> {
    if v >= min {
        Ok(())
    } else {
        Err(Invalid { section, key, reason: format!("must be >= {min}, got {v}") })
    }
}

fn betas(section: &'static str, b: &BetaList) -> std::result::Result<(), Invalid> {
    if b.0.is_empty() {
        return Err(Invalid { section, key: "beta_s", reason: "needs at least one value".into() });
    }
    b.0.iter().try_for_each(|&v| positive(section, "beta_s", v))
}

fn check_propagate(s: &'static str, c: &PropagateConfig) -> std::result::Result<(), Invalid> {
    non_negative(s, "gamma_s", c.gamma_s)?;
    positive(s, "beta_s", c.beta_s)?;
    positive(s, "omega_e", c.omega_e)?;
    positive(s, "omega_g", c.omega_g)?;
    non_negative(s, "quartic", c.quartic)?;
    non_negative(s, "ground_gamma_s", c.ground_gamma_s)?;
    if let Some(w) = c.omega_ref {
        positive(s, "omega_ref", w)?;
    }
    at_least(s, "n_basis", c.n_basis, 2)?;
    positive(s, "dt", c.dt)?;
    positive(s, "t_end", c.t_end)?;
    at_least(s, "record_every", c.record_every, 1)?;
    non_negative(s, "eps_pos", c.eps_pos)?;
    at_least(s, "n_modes", c.n_modes, crate::oracle::MIN_MODES)?;
    positive(s, "omega_max", c.omega_max)
}

impl RunConfig {
    fn check(&self) -> std::result::Result<(), Invalid> {
        if let Some(c) = &self.kernels {
            non_negative("kernels", "gamma_s", c.gamma_s)?;
            positive("kernels", "beta_s", c.beta_s)?;
            positive("kernels", "t_max", c.t_max)?;
            at_least("kernels", "steps", c.steps, 1)?;
        }
        if let Some(c) = &self.coeffs {
            non_negative("coeffs", "gamma_s", c.gamma_s)?;
            betas("coeffs", &c.beta_s)?;
            positive("coeffs", "t_max", c.t_max)?;
            at_least("coeffs", "steps", c.steps, 1)?;
        }
        if let Some(c) = &self.figure1 {
            non_negative("figure1", "gamma_s", c.gamma_s)?;
            betas("figure1", &c.beta_s)?;
            positive("figure1", "t_max", c.t_max)?;
            at_least("figure1", "steps", c.steps, 1)?;
        }
        if let Some(c) = &self.propagate {
            check_propagate("propagate", c)?;
        }
        if let Some(c) = &self.compare {
            check_propagate("compare", c)?;
        }
        if let Some(c) = &self.oracle {
            non_negative("oracle", "gamma_s", c.gamma_s)?;
            positive("oracle", "beta_s", c.beta_s)?;
            positive("oracle", "omega_e", c.omega_e)?;
            positive("oracle", "omega_g", c.omega_g)?;
            non_negative("oracle", "ground_gamma_s", c.ground_gamma_s)?;
            at_least("oracle", "n_modes", c.n_modes, crate::oracle::MIN_MODES)?;
            positive("oracle", "omega_max", c.omega_max)?;
            positive("oracle", "t_end", c.t_end)?;
            positive("oracle", "dt", c.dt)?;
        }
        if let Some(c) = &self.wigner {
            positive("wigner", "beta_s", c.beta_s)?;
            positive("wigner", "omega_g", c.omega_g)?;
            positive("wigner", "omega_ref", c.omega_ref)?;
            at_least("wigner", "n_basis", c.n_basis, 2)?;
            positive("wigner", "q_step", c.q_step)?;
            positive("wigner", "p_step", c.p_step)?;
        }
        Ok(())
    }

    /// Validates parameter ranges; `text` is used to point at the offending line.
    pub fn validate(&self, text: Option<&str>, format: Format) -> Result<()> {
        self.check().map_err(|e| Error::Config {
            line: text.and_then(|t| locate_key(t, format, e.section, e.key)),
            message: format!("[{}] `{}` {}", e.section, e.key, e.reason),
        })
    }

    /// Sets `section.key` for each pair from command-line text (parsed as a
    /// TOML value, falling back to a bare string). Nothing changes on error.
    pub fn apply_overrides(&mut self, section: &str, pairs: &[(String, String)]) -> Result<()> {
        if pairs.is_empty() {
            return Ok(());
        }
        let mut table = toml::Table::try_from(&*self)
            .map_err(|e| Error::Config { line: None, message: format!("cannot serialize config: {e}") })?;
        let entry = table.entry(section.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        let toml::Value::Table(sec) = entry else {
            return Err(Error::Config { line: None, message: format!("`{section}` is not a section") });
        };
        for (key, value) in pairs {
            let parsed = toml::from_str::<toml::Table>(&format!("v = {value}"))
                .ok()
                .and_then(|mut t| t.remove("v"))
                .unwrap_or_else(|| toml::Value::String(value.clone()));
            sec.insert(key.clone(), parsed);
        }
        let updated: RunConfig = table.try_into().map_err(|e: toml::de::Error| Error::Config {
            line: None,
            message: format!("[{section}] after command-line overrides: {}", e.message().trim()),
        })?;
        *self = updated;
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config { line: None, message: e.to_string() })
    }
}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Line of `key` inside `[section]` (TOML) or after `"section"` (JSON).
fn locate_key(text: &str, format: Format, section: &str, key: &str) -> Option<usize> {
    match format {
        Format::Toml => {
            let mut current = String::new();
            for (i, line) in text.lines().enumerate() {
                let l = line.trim();
                if let Some(h) = l.strip_prefix('[') {
                    current = h.trim_end_matches(']').trim().to_string();
                } else if current == section {
                    if let Some((k, _)) = l.split_once('=') {
                        if k.trim().trim_matches('"') == key {
                            return Some(i + 1);
                        }
                    }
                }
            }
            None
        }
        Format::Json => {
            let start = text.find(&format!("\"{section}\""))?;
            let rel = text[start..].find(&format!("\"{key}\""))?;
            Some(line_of_offset(text, start + rel))
        }
    }
}

/// Parses and validates a configuration; errors carry the line number.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    parse_config_as(text, Format::detect(text))
}

pub fn parse_config_as(text: &str, format: Format) -> Result<RunConfig> {
    let cfg: RunConfig = match format {
        Format::Toml => toml::from_str(text).map_err(|e| Error::Config {
            line: e.span().map(|s| line_of_offset(text, s.start)),
            message: e.message().trim().to_string(),
        })?,
        Format::Json => {
            serde_json::from_str(text).map_err(|e| Error::Config { line: Some(e.line()), message: e.to_string() })?
        }
    };
    cfg.validate(Some(text), format)?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_coeffs_gets_defaults() {
        let c = parse_config("[coeffs]\ngamma_s = 0.1\nbeta_s = 0.5\n").unwrap().coeffs.unwrap();
        assert_eq!((c.t_max, c.steps), (20.0, 2000));
        assert_eq!(c.beta_s, BetaList(vec![0.5]));
    }

    #[test]
    fn beta_list_forms() {
        for text in ["beta_s = \"0.5,1,5\"", "beta_s = [0.5, 1, 5]"] {
            let c = parse_config(&format!("[coeffs]\ngamma_s = 0.1\n{text}\n")).unwrap();
            assert_eq!(c.coeffs.unwrap().beta_s.0, vec![0.5, 1.0, 5.0]);
        }
        let j = parse_config(r#"{"coeffs": {"gamma_s": 0.1, "beta_s": "0.5, 1"}}"#).unwrap();
        assert_eq!(j.coeffs.unwrap().beta_s.0, vec![0.5, 1.0]);
    }

    #[test]
    fn negative_gamma_names_field_and_line() {
        let err = parse_config("[coeffs]\nbeta_s = 1\ngamma_s = -0.1\n").unwrap_err();
        match err {
            Error::Config { line, message } => {
                assert_eq!(line, Some(3));
                assert!(message.contains("gamma_s"), "{message}");
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn unknown_key_has_line() {
        let err = parse_config("[coeffs]\ngamma_s = 0.1\nbeta_s = 1\nbogus = 3\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: Some(4), .. }), "{err}");
        let err = parse_config("{\n\"coeffs\": {\"gamma_s\": 0.1,\n \"beta_s\": 1, \"x\": 2}}").unwrap_err();
        assert!(matches!(err, Error::Config { line: Some(3), .. }), "{err}");
    }

    #[test]
    fn type_mismatch_and_missing_key() {
        let err = parse_config("[kernels]\ngamma_s = 0.1\nbeta_s = \"hot\"\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: Some(3), .. }), "{err}");
        let err = parse_config("[kernels]\ngamma_s = 0.1\n").unwrap_err();
        assert!(err.to_string().contains("beta_s"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn overrides_apply_and_validate() {
        let kv = |k: &str, v: &str| (k.to_string(), v.to_string());
        let mut c = RunConfig::default();
        c.apply_overrides("coeffs", &[kv("gamma_s", "0.2"), kv("beta_s", "0.5,1")]).unwrap();
        assert_eq!(c.coeffs.as_ref().unwrap().beta_s.0, vec![0.5, 1.0]);
        assert!(c.apply_overrides("propagate", &[kv("gamma_s", "0.1")]).is_err());
        assert!(c.propagate.is_none());
        assert!(c.apply_overrides("coeffs", &[kv("nope", "1")]).is_err());
        c.apply_overrides("coeffs", &[kv("gamma_s", "-1")]).unwrap();
        assert!(c.validate(None, Format::Toml).is_err());
    }

    #[test]
    fn toml_round_trip() {
        let text = "[propagate]\ngamma_s = 0.05\nbeta_s = 0.5\ninitial = \"exact_reduced\"\n[figure1]\n";
        let c = parse_config(text).unwrap();
        assert_eq!(parse_config(&c.to_toml().unwrap()).unwrap(), c);
        assert_eq!(c.figure1.unwrap(), Figure1Config::default());
    }
}
