//! Flat key-value experiment configuration and the built-in figure registry.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::floquet::SweepAxis;
use crate::hamiltonians::PhysParams;
use crate::model::{Emission, ModelKind};
use crate::noise::{AtomNumberNoise, DetuningNoise, NoisePlan, PhaseNoise, RabiNoise, UrrDisorder};
use crate::open_system::Integrator;

const REGISTRY: &str = include_str!("../../registry/figures.toml");

#[derive(Clone, Copy, Debug)]
enum Kind {
    Float,
    Int,
    Str,
    Bool,
    StrList,
}

const KEYS: &[(&str, Kind)] = &[
    ("experiment", Kind::Str),
    ("mode", Kind::Str),
    ("model", Kind::Str),
    ("omega_mhz", Kind::Float),
    ("omega_ryd_mhz", Kind::Float),
    ("urr_over_omega", Kind::Float),
    ("gamma_khz", Kind::Float),
    ("atoms", Kind::Int),
    ("cycles", Kind::Int),
    ("detuning_khz", Kind::Float),
    ("phase_rad", Kind::Float),
    ("seed", Kind::Int),
    ("ensemble", Kind::Int),
    ("urr_disorder_low_mhz", Kind::Float),
    ("urr_disorder_high_mhz", Kind::Float),
    ("rabi_eps_max", Kind::Float),
    ("phase_noise_rad", Kind::Float),
    ("detuning_noise_khz", Kind::Float),
    ("atoms_reference", Kind::Int),
    ("atoms_low", Kind::Int),
    ("atoms_high", Kind::Int),
    ("sweep_urr_min", Kind::Float),
    ("sweep_urr_max", Kind::Float),
    ("sweep_urr_points", Kind::Int),
    ("sweep_cycles_min", Kind::Int),
    ("sweep_cycles_max", Kind::Int),
    ("spectrum_model", Kind::Str),
    ("spectrum_axis", Kind::Str),
    ("spectrum_min", Kind::Float),
    ("spectrum_max", Kind::Float),
    ("spectrum_points", Kind::Int),
    ("populations", Kind::StrList),
    ("g2", Kind::Bool),
    ("emission", Kind::Str),
    ("samples_per_segment", Kind::Int),
    ("integrator", Kind::Str),
    ("compare", Kind::Str),
];

/// Alternative spellings accepted for a canonical key.
const ALIASES: &[(&str, &str)] = &[("urr_over_omega_ryd", "urr_over_omega")];

const UNIT_SUFFIXES: &[&str] = &["hz", "khz", "mhz", "ghz"];

const REQUIRED: &[&str] = &["omega_mhz", "omega_ryd_mhz", "urr_over_omega", "atoms", "cycles"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// sample after every cycle
    Stroboscopic,
    /// sample inside segments
    Continuous,
    /// exact evolution against its Zeno approximation
    Zeno,
    /// Lindblad ensemble
    Master,
    /// superatom ensemble with random atom number
    AtomNumber,
    /// sweep and/or spectrum only
    None,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Compare {
    None,
    /// same ensemble with γ = 0
    NoDecay,
    /// single run without any noise channel
    NoiseFree,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub urr_over_omega: Vec<f64>,
    pub cycles: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSpec {
    pub model: ModelKind,
    pub axis: SweepAxis,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub name: String,
    pub mode: Mode,
    pub model: ModelKind,
    pub params: PhysParams,
    pub noise: NoisePlan,
    pub ensemble: u32,
    pub samples_per_segment: u32,
    pub populations: Vec<String>,
    pub g2: bool,
    pub emission: Emission,
    pub integrator: Integrator,
    pub compare: Compare,
    pub sweep: Option<SweepGrid>,
    pub spectrum: Option<SpectrumSpec>,
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}

fn registry() -> Table {
    REGISTRY.parse::<Table>().expect("built-in registry parses")
}

pub fn registry_version() -> String {
    registry()
        .get("version")
        .and_then(|v| v.as_str())
        .unwrap_or("0")
        .to_string()
}

/// Names of all registered experiments, in registry order.
pub fn registry_names() -> Vec<String> {
    registry()
        .iter()
        .filter(|(_, v)| v.is_table())
        .map(|(k, _)| k.clone())
        .collect()
}

fn registry_table(name: &str) -> Result<Table> {
    match registry().get(name) {
        Some(Value::Table(t)) => Ok(t.clone()),
        _ => Err(Error::UnknownExperiment(name.to_string())),
    }
}

pub fn registry_spec(name: &str) -> Result<ExperimentSpec> {
    ExperimentSpec::from_table(name, &registry_table(name)?)
}

/// Parse config text. Keys are checked; the experiment's registry entry
/// (`experiment`, or `fallback`, or `custom`) supplies anything not given.
pub fn parse_config(text: &str, fallback: Option<&str>) -> Result<ExperimentSpec> {
    let user = text.parse::<Table>().map_err(|e| {
        let msg = e.message().to_string();
        let spanned = e.span().and_then(|s| text.get(s)).map(str::trim);
        match spanned {
            Some(key) if msg.contains("duplicate key") => {
                Error::config(key, format!("duplicate key `{key}`"))
            }
            _ => Error::config("syntax", msg),
        }
    })?;
    let user = normalize(user)?;
    let name = match user.get("experiment") {
        Some(v) => v
            .as_str()
            .ok_or_else(|| Error::config("experiment", "expected a string"))?
            .to_string(),
        None => fallback.unwrap_or("custom").to_string(),
    };
    if let Some(f) = fallback {
        if f != name {
            return Err(Error::config(
                "experiment",
                format!("config names `{name}` but `{f}` was requested"),
            ));
        }
    }
    let mut merged = registry_table(&name)?;
    for (k, v) in user {
        merged.insert(k, v);
    }
    ExperimentSpec::from_table(&name, &merged)
}

pub fn load_config(path: &Path, fallback: Option<&str>) -> Result<ExperimentSpec> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config(path.display().to_string(), e.to_string()))?;
    parse_config(&text, fallback)
}

fn known(key: &str) -> Option<Kind> {
    KEYS.iter().find(|(k, _)| *k == key).map(|(_, t)| *t)
}

fn normalize(table: Table) -> Result<Table> {
    let mut out = Table::new();
    for (key, value) in table {
        let canonical = ALIASES
            .iter()
            .find(|(a, _)| *a == key)
            .map(|(_, c)| c.to_string())
            .unwrap_or_else(|| key.clone());
        if known(&canonical).is_none() {
            return Err(unknown_key(&key));
        }
        if out.contains_key(&canonical) {
            return Err(Error::config(
                &key,
                format!("duplicate key: `{key}` repeats `{canonical}`"),
            ));
        }
        out.insert(canonical, value);
    }
    Ok(out)
}

fn unknown_key(key: &str) -> Error {
    if let Some((stem, suffix)) = key.rsplit_once('_') {
        if UNIT_SUFFIXES.contains(&suffix) {
            for s in UNIT_SUFFIXES {
                let candidate = format!("{stem}_{s}");
                if known(&candidate).is_some() {
                    return Error::config(
                        key,
                        format!("unit-suffix mismatch: expected `{candidate}`"),
                    );
                }
            }
        }
    }
    Error::config(key, "unknown key")
}

struct Reader<'a> {
    t: &'a Table,
}

impl Reader<'_> {
    fn get(&self, key: &str) -> Option<&Value> {
        self.t.get(key)
    }

    fn float(&self, key: &str) -> Result<Option<f64>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Float(f)) => Ok(Some(*f)),
            Some(Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(_) => Err(Error::config(key, "expected a number")),
        }
    }

    fn int(&self, key: &str) -> Result<Option<i64>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Integer(i)) => Ok(Some(*i)),
            Some(_) => Err(Error::config(key, "expected an integer")),
        }
    }

    fn uint(&self, key: &str) -> Result<Option<u32>> {
        match self.int(key)? {
            None => Ok(None),
            Some(i) if (0..=u32::MAX as i64).contains(&i) => Ok(Some(i as u32)),
            Some(_) => Err(Error::config(key, "expected a non-negative integer")),
        }
    }

    fn string(&self, key: &str) -> Result<Option<String>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(_) => Err(Error::config(key, "expected a string")),
        }
    }

    fn boolean(&self, key: &str) -> Result<Option<bool>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Boolean(b)) => Ok(Some(*b)),
            Some(_) => Err(Error::config(key, "expected true or false")),
        }
    }

    fn strings(&self, key: &str) -> Result<Option<Vec<String>>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Array(a)) => a
                .iter()
                .map(|v| {
                    v.as_str()
                        .map(str::to_string)
                        .ok_or_else(|| Error::config(key, "expected a list of strings"))
                })
                .collect::<Result<Vec<_>>>()
                .map(Some),
            Some(_) => Err(Error::config(key, "expected a list of strings")),
        }
    }

    fn required_float(&self, key: &str) -> Result<f64> {
        self.float(key)?
            .ok_or_else(|| Error::config(key, "required key missing"))
    }

    fn required_uint(&self, key: &str) -> Result<u32> {
        self.uint(key)?
            .ok_or_else(|| Error::config(key, "required key missing"))
    }
}

const MHZ: f64 = 2.0 * PI;
const KHZ: f64 = 2.0 * PI * 1e-3;

impl ExperimentSpec {
    pub fn from_table(name: &str, table: &Table) -> Result<ExperimentSpec> {
        for (k, v) in table {
            let kind = known(k).ok_or_else(|| unknown_key(k))?;
            let ok = match kind {
                Kind::Float => v.is_float() || v.is_integer(),
                Kind::Int => v.is_integer(),
                Kind::Str => v.is_str(),
                Kind::Bool => v.is_bool(),
                Kind::StrList => v.is_array(),
            };
            if !ok {
                return Err(Error::config(k, format!("wrong value type for {kind:?} key")));
            }
        }
        let r = Reader { t: table };
        for key in REQUIRED {
            if r.get(key).is_none() {
                return Err(Error::config(*key, "required key missing"));
            }
        }
        let omega = r.required_float("omega_mhz")? * MHZ;
        let omega_ryd = r.required_float("omega_ryd_mhz")? * MHZ;
        let detuning = r.float("detuning_khz")?.unwrap_or(0.0) * KHZ;
        let params = PhysParams {
            omega,
            omega_ryd,
            u_rr: r.required_float("urr_over_omega")? * omega_ryd,
            gamma: r.float("gamma_khz")?.unwrap_or(0.0) * KHZ,
            atom_count: r.required_uint("atoms")?,
            cycles: r.required_uint("cycles")?,
            detuning_e: detuning,
            detuning_r: detuning,
            phase: r.float("phase_rad")?.unwrap_or(0.0),
            urr_pairs: None,
        };
        params
            .validate_timings()
            .map_err(|e| Error::config("params", e.to_string()))?;

        let mode = match r.string("mode")?.as_deref().unwrap_or("stroboscopic") {
            "stroboscopic" => Mode::Stroboscopic,
            "continuous" => Mode::Continuous,
            "zeno" => Mode::Zeno,
            "master" => Mode::Master,
            "atom_number" => Mode::AtomNumber,
            "none" => Mode::None,
            other => return Err(Error::config("mode", format!("unknown mode `{other}`"))),
        };
        let model = ModelKind::parse(r.string("model")?.as_deref().unwrap_or("full"))?;

        let mut noise = NoisePlan {
            seed: r.int("seed")?.unwrap_or(0) as u64,
            ..Default::default()
        };
        match (r.float("urr_disorder_low_mhz")?, r.float("urr_disorder_high_mhz")?) {
            (Some(lo), Some(hi)) => {
                noise.urr_disorder = Some(UrrDisorder {
                    low: lo * MHZ,
                    high: hi * MHZ,
                })
            }
            (None, None) => {}
            _ => {
                return Err(Error::config(
                    "urr_disorder_low_mhz",
                    "both disorder bounds are required",
                ))
            }
        }
        if let Some(eps) = r.float("rabi_eps_max")? {
            noise.rabi = Some(RabiNoise { eps_max: eps });
        }
        if let Some(d) = r.float("phase_noise_rad")? {
            noise.phase = Some(PhaseNoise { dphi_max: d });
        }
        if let Some(d) = r.float("detuning_noise_khz")? {
            noise.detuning = Some(DetuningNoise { range: d * KHZ });
        }
        match (r.uint("atoms_reference")?, r.uint("atoms_low")?, r.uint("atoms_high")?) {
            (Some(reference), Some(low), Some(high)) => {
                noise.atom_number = Some(AtomNumberNoise { reference, low, high })
            }
            (None, None, None) => {}
            _ => {
                return Err(Error::config(
                    "atoms_reference",
                    "atoms_reference, atoms_low and atoms_high go together",
                ))
            }
        }
        noise
            .validate()
            .map_err(|e| Error::config("noise", e.to_string()))?;
        if mode == Mode::AtomNumber && noise.atom_number.is_none() {
            return Err(Error::config("atoms_reference", "atom_number mode needs the atom-number channel"));
        }

        let sweep_keys = [
            "sweep_urr_min",
            "sweep_urr_max",
            "sweep_urr_points",
            "sweep_cycles_min",
            "sweep_cycles_max",
        ];
        let present = sweep_keys.iter().filter(|k| r.get(k).is_some()).count();
        let sweep = match present {
            0 => None,
            5 => {
                let lo = r.required_uint("sweep_cycles_min")?;
                let hi = r.required_uint("sweep_cycles_max")?;
                let pts = r.required_uint("sweep_urr_points")? as usize;
                if lo == 0 || hi < lo || pts == 0 {
                    return Err(Error::config("sweep_cycles_min", "empty sweep grid"));
                }
                Some(SweepGrid {
                    urr_over_omega: linspace(
                        r.required_float("sweep_urr_min")?,
                        r.required_float("sweep_urr_max")?,
                        pts,
                    ),
                    cycles: (lo..=hi).collect(),
                })
            }
            _ => return Err(Error::config("sweep_urr_min", "all five sweep keys are required together")),
        };

        let spectrum = match r.string("spectrum_axis")? {
            None => None,
            Some(axis) => {
                let lo = r.required_float("spectrum_min")?;
                let hi = r.required_float("spectrum_max")?;
                let axis = match axis.as_str() {
                    "cycles" => {
                        if lo < 1.0 || hi < lo {
                            return Err(Error::config("spectrum_min", "empty cycle range"));
                        }
                        SweepAxis::Cycles((lo.round() as u32..=hi.round() as u32).collect())
                    }
                    "urr_over_omega" => {
                        let pts = r.required_uint("spectrum_points")? as usize;
                        if pts == 0 {
                            return Err(Error::config("spectrum_points", "empty grid"));
                        }
                        SweepAxis::UrrOverOmega(linspace(lo, hi, pts))
                    }
                    other => {
                        return Err(Error::config("spectrum_axis", format!("unknown axis `{other}`")))
                    }
                };
                let model = match r.string("spectrum_model")? {
                    Some(m) => ModelKind::parse(&m)?,
                    None => model,
                };
                Some(SpectrumSpec { model, axis })
            }
        };

        let emission = match r.string("emission")?.as_deref().unwrap_or("ground") {
            "ground" => Emission::Ground,
            "rydberg" => Emission::Rydberg,
            other => return Err(Error::config("emission", format!("unknown transition `{other}`"))),
        };
        let integrator = match r.string("integrator")?.as_deref().unwrap_or("chebyshev") {
            "chebyshev" => Integrator::Chebyshev,
            "rk4" => Integrator::Rk4,
            other => return Err(Error::config("integrator", format!("unknown integrator `{other}`"))),
        };
        let compare = match r.string("compare")?.as_deref().unwrap_or("none") {
            "none" => Compare::None,
            "no_decay" => Compare::NoDecay,
            "noise_free" => Compare::NoiseFree,
            other => return Err(Error::config("compare", format!("unknown comparison `{other}`"))),
        };
        let ensemble = r.uint("ensemble")?.unwrap_or(32);
        if ensemble == 0 {
            return Err(Error::config("ensemble", "must be at least 1"));
        }
        let samples_per_segment = r.uint("samples_per_segment")?.unwrap_or(1);
        if samples_per_segment == 0 {
            return Err(Error::config("samples_per_segment", "must be at least 1"));
        }
        Ok(ExperimentSpec {
            name: name.to_string(),
            mode,
            model,
            params,
            noise,
            ensemble,
            samples_per_segment,
            populations: r.strings("populations")?.unwrap_or_default(),
            g2: r.boolean("g2")?.unwrap_or(false),
            emission,
            integrator,
            compare,
            sweep,
            spectrum,
        })
    }
}
