//! Experiment configuration: a flat `key = value` text format.
//!
//! Keys are dotted (`section.name`) and each has a fixed unit. A value may
//! repeat the unit after the number (`irs.length = 0.5 m`); any other unit
//! is rejected rather than converted. Lines starting with `#` are comments.
//! Lists are comma separated. Every key has a default, so an empty file
//! describes the reference scene.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use irsfso_core::beam::BeamSource;
use irsfso_core::channel::{FadingModel, TurbulencePath};
use irsfso_core::geometry::{Point2D, SceneLayout};
use irsfso_core::link::{Engine, RelayLinkSpec, SnrConfig};
use irsfso_core::phase::{DesignFamily, IrsDesign};
use irsfso_core::wave::{self, UnitCellGrid};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("config key `{key}`: {message}")]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

fn err(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        key: key.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Number,
    /// A number or the word `auto`.
    AutoNumber,
    Count,
    Choice(&'static [&'static str]),
    NumberList,
    ChoiceList(&'static [&'static str]),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Bound {
    Any,
    Positive,
    NonNegative,
    /// Strictly between 0 and 1.
    OpenUnit,
}

struct KeySpec {
    name: &'static str,
    unit: &'static str,
    kind: Kind,
    bound: Bound,
    default: &'static str,
}

const DESIGNS: &[&str] = &["auto", "uniform", "linear", "focusing", "mirror"];
const SWEEP_DESIGNS: &[&str] = &["uniform", "linear", "focusing", "mirror"];
const TECHNOLOGIES: &[&str] = &["mirror", "micro-mirror", "static-meta", "tunable-meta"];
const ENGINES: &[&str] = &["wave", "geometric"];
const SYSTEMS: &[&str] = &["mirror", "metasurface", "relay"];
const SCALES: &[&str] = &["linear", "log"];

macro_rules! key {
    ($name:literal, $unit:literal, $kind:expr, $bound:ident, $default:literal) => {
        KeySpec {
            name: $name,
            unit: $unit,
            kind: $kind,
            bound: Bound::$bound,
            default: $default,
        }
    };
}

use Kind::*;

static KEYS: &[KeySpec] = &[
    key!("scene.tx_x", "m", Number, Any, "-200"),
    key!("scene.tx_y", "m", Number, Any, "300"),
    key!("scene.irs_x", "m", Number, Any, "0"),
    key!("scene.irs_y", "m", Number, Any, "0"),
    key!("scene.irs_normal", "deg", Number, Any, "0"),
    key!("scene.rx_x", "m", Number, Any, "0"),
    key!("scene.rx_y", "m", Number, Any, "500"),
    key!("scene.lens_length", "m", Number, Positive, "0.1"),
    key!("scene.lens_normal", "deg", Number, Any, "0"),
    key!("beam.profile", "", Choice(&["gaussian", "plane"]), Any, "gaussian"),
    key!("beam.wavelength", "m", Number, Positive, "1.55e-6"),
    key!("beam.waist", "m", Number, Positive, "1e-3"),
    key!("beam.power", "W", Number, Positive, "1"),
    key!("beam.power_density", "W/m", Number, Positive, "1"),
    key!("irs.length", "m", Number, Positive, "0.5"),
    key!("irs.spacing", "m", AutoNumber, Positive, "auto"),
    key!("irs.design", "", Choice(DESIGNS), Any, "auto"),
    key!("irs.technology", "", Choice(TECHNOLOGIES), Any, "tunable-meta"),
    key!("irs.quantization_levels", "", Count, Any, "0"),
    key!("wave.lens_samples", "", Count, Any, "0"),
    key!("fading.kappa", "1/m", Number, NonNegative, "0.43e-3"),
    key!("fading.cn2", "m^-2/3", Number, NonNegative, "1.4e-14"),
    key!("fading.pointing_sigma", "m", Number, NonNegative, "0"),
    key!("fading.responsivity", "A/W", Number, Positive, "0.5"),
    key!("fading.turbulence", "", Choice(&["end-to-end", "per-hop"]), Any, "end-to-end"),
    key!("snr.transmit", "dB", Number, Any, "20"),
    key!("snr.threshold", "dB", Number, Any, "0"),
    key!("relay.x", "m", Number, Any, "0"),
    key!("relay.y", "m", Number, Any, "0"),
    key!("relay.power_split", "", Number, OpenUnit, "0.5"),
    key!("relay.lens_length", "m", AutoNumber, Positive, "auto"),
    key!("mc.trials", "", Count, Any, "100000"),
    key!("mc.seed", "", Count, Any, "1"),
    key!("mc.early_exit", "", Number, NonNegative, "0.05"),
    key!("field_map.y", "m", Number, Positive, "200"),
    key!("field_map.start", "m", Number, Any, "-1"),
    key!("field_map.stop", "m", Number, Any, "1"),
    key!("field_map.points", "", Count, Any, "2001"),
    key!("field_map.wavelengths", "m", NumberList, Positive, "1.55e-6, 5e-3"),
    key!("field_map.engines", "", ChoiceList(ENGINES), Any, "wave, geometric"),
    key!("power_sweep.start", "m", Number, Positive, "1e-4"),
    key!("power_sweep.stop", "m", Number, Positive, "10"),
    key!("power_sweep.points", "", Count, Any, "26"),
    key!("power_sweep.scale", "", Choice(SCALES), Any, "log"),
    key!("power_sweep.designs", "", ChoiceList(SWEEP_DESIGNS), Any, "mirror, linear, focusing"),
    key!("power_sweep.engines", "", ChoiceList(ENGINES), Any, "wave, geometric"),
    key!("outage.start", "dB", Number, Any, "10"),
    key!("outage.stop", "dB", Number, Any, "40"),
    key!("outage.points", "", Count, Any, "31"),
    key!("outage.waists", "m", NumberList, Positive, "1e-3, 2.5e-3"),
    key!("outage.systems", "", ChoiceList(SYSTEMS), Any, "mirror, metasurface, relay"),
    key!("outage.engine", "", Choice(ENGINES), Any, "wave"),
    key!("delay.lengths", "m", NumberList, Positive, "0.1"),
    key!("delay.theta_i", "deg", NumberList, Any, "0"),
    key!("delay.theta_r", "deg", NumberList, Any, "60"),
    key!("delay.rate", "bit/s", Number, Positive, "10e9"),
];

fn spec(key: &str) -> Option<&'static KeySpec> {
    KEYS.iter().find(|k| k.name == key)
}

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Number(f64),
    Auto,
    Count(u64),
    Word(String),
    Numbers(Vec<f64>),
    Words(Vec<String>),
}

impl Value {
    fn canonical(&self) -> String {
        let join = |v: Vec<String>| v.join(", ");
        match self {
            Value::Number(x) => format!("{x:e}"),
            Value::Auto => "auto".into(),
            Value::Count(n) => n.to_string(),
            Value::Word(w) => w.clone(),
            Value::Numbers(v) => join(v.iter().map(|x| format!("{x:e}")).collect()),
            Value::Words(v) => join(v.clone()),
        }
    }
}

fn parse_number(spec: &KeySpec, text: &str) -> Result<f64, ConfigError> {
    let mut parts = text.split_whitespace();
    let num = parts.next().ok_or_else(|| err(spec.name, "missing value"))?;
    if let Some(unit) = parts.next() {
        if unit != spec.unit {
            let expected = if spec.unit.is_empty() { "no unit" } else { spec.unit };
            return Err(err(spec.name, format!("unit `{unit}` does not match expected {expected}")));
        }
    }
    if let Some(extra) = parts.next() {
        return Err(err(spec.name, format!("unexpected `{extra}`")));
    }
    let x: f64 = num
        .parse()
        .map_err(|_| err(spec.name, format!("`{num}` is not a number")))?;
    check_bound(spec, x)?;
    Ok(x)
}

fn check_bound(spec: &KeySpec, x: f64) -> Result<(), ConfigError> {
    let ok = x.is_finite()
        && match spec.bound {
            Bound::Any => true,
            Bound::Positive => x > 0.0,
            Bound::NonNegative => x >= 0.0,
            Bound::OpenUnit => x > 0.0 && x < 1.0,
        };
    if ok {
        return Ok(());
    }
    let what = match spec.bound {
        Bound::Any => "must be finite",
        Bound::Positive => "must be positive",
        Bound::NonNegative => "must be non-negative",
        Bound::OpenUnit => "must lie strictly between 0 and 1",
    };
    Err(err(spec.name, format!("{x} {what}")))
}

fn parse_choice(spec: &KeySpec, options: &[&str], text: &str) -> Result<String, ConfigError> {
    let word = text.trim().to_ascii_lowercase();
    if options.contains(&word.as_str()) {
        Ok(word)
    } else {
        Err(err(spec.name, format!("`{text}` is not one of {}", options.join(", "))))
    }
}

fn parse_value(spec: &KeySpec, text: &str) -> Result<Value, ConfigError> {
    let text = text.trim();
    let items = || text.split(',').map(str::trim).filter(|s| !s.is_empty());
    Ok(match spec.kind {
        Kind::Number => Value::Number(parse_number(spec, text)?),
        Kind::AutoNumber if text.eq_ignore_ascii_case("auto") => Value::Auto,
        Kind::AutoNumber => Value::Number(parse_number(spec, text)?),
        Kind::Count => {
            let n = text
                .parse::<u64>()
                .map_err(|_| err(spec.name, format!("`{text}` is not a non-negative integer")))?;
            Value::Count(n)
        }
        Kind::Choice(options) => Value::Word(parse_choice(spec, options, text)?),
        Kind::NumberList => {
            let v = items().map(|s| parse_number(spec, s)).collect::<Result<Vec<_>, _>>()?;
            if v.is_empty() {
                return Err(err(spec.name, "list is empty"));
            }
            Value::Numbers(v)
        }
        Kind::ChoiceList(options) => {
            let v = items()
                .map(|s| parse_choice(spec, options, s))
                .collect::<Result<Vec<_>, _>>()?;
            if v.is_empty() {
                return Err(err(spec.name, "list is empty"));
            }
            Value::Words(v)
        }
    })
}

/// Raw key/value settings with defaults filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    values: BTreeMap<&'static str, Value>,
}

impl Settings {
    pub fn defaults() -> Self {
        let values = KEYS
            .iter()
            .map(|k| (k.name, parse_value(k, k.default).expect("defaults parse")))
            .collect();
        Settings { values }
    }

    /// Parses config text on top of the defaults.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut s = Settings::defaults();
        let mut seen = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(&format!("line {}", i + 1), "expected `key = value`"))?;
            let key = key.trim();
            if seen.contains(&key) {
                return Err(err(key, "set more than once"));
            }
            seen.push(key);
            s.set(key, value)?;
        }
        Ok(s)
    }

    /// Overrides one key, as `--set key=value` does.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let spec = spec(key).ok_or_else(|| err(key, "unknown key"))?;
        self.values.insert(spec.name, parse_value(spec, value)?);
        Ok(())
    }

    /// Applies a `key=value` override string.
    pub fn apply_override(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| err(assignment, "override must look like key=value"))?;
        self.set(k.trim(), v)
    }

    /// Canonical text: every key in a fixed order with normalised values.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for k in KEYS {
            let v = &self.values[k.name];
            let unit = match v {
                Value::Number(_) | Value::Numbers(_) if !k.unit.is_empty() => format!(" {}", k.unit),
                _ => String::new(),
            };
            match v {
                // Units follow each list entry so the text parses back.
                Value::Numbers(xs) if !unit.is_empty() => {
                    let items: Vec<String> = xs.iter().map(|x| format!("{x:e}{unit}")).collect();
                    writeln!(out, "{} = {}", k.name, items.join(", ")).unwrap();
                }
                _ => writeln!(out, "{} = {}{}", k.name, v.canonical(), unit).unwrap(),
            }
        }
        out
    }

    /// SHA-256 of the canonical text, hex encoded.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.serialize().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    fn number(&self, key: &str) -> f64 {
        match &self.values[key] {
            Value::Number(x) => *x,
            v => panic!("{key} holds {v:?}"),
        }
    }

    fn auto_number(&self, key: &str) -> Option<f64> {
        match &self.values[key] {
            Value::Number(x) => Some(*x),
            Value::Auto => None,
            v => panic!("{key} holds {v:?}"),
        }
    }

    fn count(&self, key: &str) -> u64 {
        match &self.values[key] {
            Value::Count(n) => *n,
            v => panic!("{key} holds {v:?}"),
        }
    }

    fn word(&self, key: &str) -> &str {
        match &self.values[key] {
            Value::Word(w) => w,
            v => panic!("{key} holds {v:?}"),
        }
    }

    fn numbers(&self, key: &str) -> &[f64] {
        match &self.values[key] {
            Value::Numbers(v) => v,
            v => panic!("{key} holds {v:?}"),
        }
    }

    fn words(&self, key: &str) -> &[String] {
        match &self.values[key] {
            Value::Words(v) => v,
            v => panic!("{key} holds {v:?}"),
        }
    }
}

/// IRS hardware class. Metadata only, apart from choosing the default
/// design family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Technology {
    Mirror,
    MicroMirror,
    StaticMeta,
    TunableMeta,
}

impl Technology {
    fn parse(s: &str) -> Self {
        match s {
            "mirror" => Technology::Mirror,
            "micro-mirror" => Technology::MicroMirror,
            "static-meta" => Technology::StaticMeta,
            _ => Technology::TunableMeta,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Technology::Mirror => "mirror",
            Technology::MicroMirror => "micro-mirror",
            Technology::StaticMeta => "static-meta",
            Technology::TunableMeta => "tunable-meta",
        }
    }

    pub fn default_family(&self) -> DesignFamily {
        match self {
            Technology::Mirror | Technology::MicroMirror => DesignFamily::Mirror,
            Technology::StaticMeta | Technology::TunableMeta => DesignFamily::Focusing,
        }
    }

    /// Qualitative control resolution, recorded in outputs.
    pub fn control(&self) -> &'static str {
        match self {
            Technology::Mirror => "single rigid tilt",
            Technology::MicroMirror => "per-element tilt",
            Technology::StaticMeta => "fixed phase profile",
            Technology::TunableMeta => "per-cell tunable phase",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IrsConfig {
    pub length: f64,
    /// `None` means half the wavelength in use.
    pub spacing: Option<f64>,
    pub family: DesignFamily,
    /// Phase levels; `None` is continuous.
    pub quantization: Option<u32>,
    pub technology: Technology,
}

impl IrsConfig {
    pub fn spacing_for(&self, wavelength: f64) -> f64 {
        self.spacing.unwrap_or(0.5 * wavelength)
    }

    pub fn grid(&self, scene: &SceneLayout, length: f64, wavelength: f64) -> irsfso_core::Result<UnitCellGrid> {
        UnitCellGrid::for_scene(scene, length, self.spacing_for(wavelength))
    }

    /// The configured design for `scene`, with quantization applied to
    /// phase designs.
    pub fn design(&self, family: DesignFamily, scene: &SceneLayout) -> irsfso_core::Result<IrsDesign> {
        let d = IrsDesign::for_scene(family, scene)?;
        match (self.quantization, family) {
            (Some(levels), f) if f != DesignFamily::Mirror => d.quantized(levels),
            _ => Ok(d),
        }
    }
}

/// A sampled axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub log: bool,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        let n = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                let t = i as f64 / n;
                if self.log {
                    (self.start.ln() + t * (self.stop.ln() - self.start.ln())).exp()
                } else {
                    self.start + t * (self.stop - self.start)
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldMapConfig {
    pub line_y: f64,
    pub x: Axis,
    pub wavelengths: Vec<f64>,
    pub engines: Vec<Engine>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerSweepConfig {
    pub lengths: Axis,
    pub designs: Vec<DesignFamily>,
    pub engines: Vec<Engine>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum System {
    Mirror,
    Metasurface,
    Relay,
}

impl System {
    pub fn name(&self) -> &'static str {
        match self {
            System::Mirror => "mirror",
            System::Metasurface => "metasurface",
            System::Relay => "relay",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutageConfig {
    pub snr_db: Axis,
    pub waists: Vec<f64>,
    pub systems: Vec<System>,
    pub engine: Engine,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DelayConfig {
    pub lengths: Vec<f64>,
    pub theta_i_deg: Vec<f64>,
    pub theta_r_deg: Vec<f64>,
    pub rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub trials: u64,
    pub seed: u64,
    /// Early-exit ratio; `None` runs every trial.
    pub early_exit: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelayConfig {
    pub position: Point2D,
    pub power_split: f64,
    /// `None` reuses the Rx lens length.
    pub lens_length: Option<f64>,
}

impl RelayConfig {
    pub fn spec(&self, scene: &SceneLayout, beam: &BeamSource) -> irsfso_core::Result<RelayLinkSpec> {
        let mut r = RelayLinkSpec::matching(scene, beam, self.position)?;
        r.power_split = self.power_split;
        r.relay_lens_length = self.lens_length.unwrap_or(scene.rx_lens_length);
        r.validate()?;
        Ok(r)
    }
}

/// Fully validated experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub settings: Settings,
    pub scene: SceneLayout,
    pub beam: BeamSource,
    pub irs: IrsConfig,
    pub lens_samples: Option<usize>,
    pub fading: FadingModel,
    pub snr: SnrConfig,
    pub relay: RelayConfig,
    pub mc: McConfig,
    pub field_map: FieldMapConfig,
    pub power_sweep: PowerSweepConfig,
    pub outage: OutageConfig,
    pub delay: DelayConfig,
}

fn parse_family(name: &str) -> DesignFamily {
    match name {
        "uniform" => DesignFamily::Uniform,
        "linear" => DesignFamily::Linear,
        "mirror" => DesignFamily::Mirror,
        _ => DesignFamily::Focusing,
    }
}

fn parse_engine(name: &str) -> Engine {
    if name == "geometric" {
        Engine::Geometric
    } else {
        Engine::Wave
    }
}

fn axis(s: &Settings, section: &str, log: bool) -> Result<Axis, ConfigError> {
    let start = s.number(&format!("{section}.start"));
    let stop = s.number(&format!("{section}.stop"));
    let points = s.count(&format!("{section}.points")) as usize;
    let pkey = format!("{section}.points");
    if points == 0 {
        return Err(err(&pkey, "need at least one point"));
    }
    if points > 1 && !(stop > start) {
        return Err(err(&format!("{section}.stop"), "must exceed the start of the range"));
    }
    Ok(Axis {
        start,
        stop,
        points,
        log,
    })
}

/// Maps a core validation failure onto the config section it came from.
fn core_err(section: &str) -> impl Fn(irsfso_core::Error) -> ConfigError + '_ {
    move |e| err(section, e.to_string())
}

impl ExperimentConfig {
    pub fn load(text: &str) -> Result<Self, ConfigError> {
        Self::from_settings(Settings::parse(text)?)
    }

    pub fn from_settings(s: Settings) -> Result<Self, ConfigError> {
        let deg = f64::to_radians;
        let scene = SceneLayout {
            tx_position: Point2D::new(s.number("scene.tx_x"), s.number("scene.tx_y")),
            irs_center: Point2D::new(s.number("scene.irs_x"), s.number("scene.irs_y")),
            irs_normal_angle: deg(s.number("scene.irs_normal")),
            rx_lens_center: Point2D::new(s.number("scene.rx_x"), s.number("scene.rx_y")),
            rx_lens_length: s.number("scene.lens_length"),
            rx_lens_normal_angle: deg(s.number("scene.lens_normal")),
        };
        scene.validate().map_err(core_err("scene"))?;

        let wavelength = s.number("beam.wavelength");
        let beam = if s.word("beam.profile") == "plane" {
            BeamSource::plane_aimed(
                scene.tx_position,
                scene.irs_center,
                wavelength,
                s.number("beam.power_density"),
            )
        } else {
            BeamSource::gaussian_aimed(
                scene.tx_position,
                scene.irs_center,
                wavelength,
                s.number("beam.waist"),
                s.number("beam.power"),
            )
        }
        .map_err(core_err("beam"))?;

        let technology = Technology::parse(s.word("irs.technology"));
        let family = match s.word("irs.design") {
            "auto" => technology.default_family(),
            name => parse_family(name),
        };
        let quantization = match s.count("irs.quantization_levels") {
            0 => None,
            1 => return Err(err("irs.quantization_levels", "need at least 2 levels (0 = continuous)")),
            n => Some(u32::try_from(n).map_err(|_| err("irs.quantization_levels", "too many levels"))?),
        };
        let irs = IrsConfig {
            length: s.number("irs.length"),
            spacing: s.auto_number("irs.spacing"),
            family,
            quantization,
            technology,
        };
        irs.grid(&scene, irs.length, wavelength)
            .map_err(core_err("irs.spacing"))?;

        let lens_samples = match s.count("wave.lens_samples") {
            0 => None,
            n => Some(n as usize),
        };

        let fading = FadingModel {
            kappa: s.number("fading.kappa"),
            cn2: s.number("fading.cn2"),
            pointing_sigma: s.number("fading.pointing_sigma"),
            responsivity: s.number("fading.responsivity"),
            turbulence_path: if s.word("fading.turbulence") == "per-hop" {
                TurbulencePath::PerHop
            } else {
                TurbulencePath::EndToEnd
            },
        };
        if fading.responsivity > 1.0 {
            return Err(err("fading.responsivity", "must not exceed 1"));
        }
        fading.validate().map_err(core_err("fading"))?;

        let snr = SnrConfig::new(s.number("snr.transmit"), s.number("snr.threshold"))
            .map_err(core_err("snr"))?;

        let relay = RelayConfig {
            position: Point2D::new(s.number("relay.x"), s.number("relay.y")),
            power_split: s.number("relay.power_split"),
            lens_length: s.auto_number("relay.lens_length"),
        };

        let trials = s.count("mc.trials");
        if trials < 1000 {
            return Err(err("mc.trials", "need at least 1000 trials"));
        }
        let early = s.number("mc.early_exit");
        let mc = McConfig {
            trials,
            seed: s.count("mc.seed"),
            early_exit: (early > 0.0).then_some(early),
        };

        let field_map = FieldMapConfig {
            line_y: s.number("field_map.y"),
            x: axis(&s, "field_map", false)?,
            wavelengths: s.numbers("field_map.wavelengths").to_vec(),
            engines: s.words("field_map.engines").iter().map(|e| parse_engine(e)).collect(),
        };
        if field_map.x.points < 2 {
            return Err(err("field_map.points", "need at least 2 samples"));
        }

        let power_sweep = PowerSweepConfig {
            lengths: axis(&s, "power_sweep", s.word("power_sweep.scale") == "log")?,
            designs: s.words("power_sweep.designs").iter().map(|d| parse_family(d)).collect(),
            engines: s.words("power_sweep.engines").iter().map(|e| parse_engine(e)).collect(),
        };

        let outage = OutageConfig {
            snr_db: axis(&s, "outage", false)?,
            waists: s.numbers("outage.waists").to_vec(),
            systems: s
                .words("outage.systems")
                .iter()
                .map(|w| match w.as_str() {
                    "mirror" => System::Mirror,
                    "metasurface" => System::Metasurface,
                    _ => System::Relay,
                })
                .collect(),
            engine: parse_engine(s.word("outage.engine")),
        };
        let delay = DelayConfig {
            lengths: s.numbers("delay.lengths").to_vec(),
            theta_i_deg: s.numbers("delay.theta_i").to_vec(),
            theta_r_deg: s.numbers("delay.theta_r").to_vec(),
            rate: s.number("delay.rate"),
        };
        for (key, list) in [("delay.theta_i", &delay.theta_i_deg), ("delay.theta_r", &delay.theta_r_deg)] {
            if list.iter().any(|a| a.abs() >= 90.0) {
                return Err(err(key, "angles must lie strictly between -90 and 90 degrees"));
            }
        }

        let cfg = ExperimentConfig {
            settings: s,
            scene,
            beam,
            irs,
            lens_samples,
            fading,
            snr,
            relay,
            mc,
            field_map,
            power_sweep,
            outage,
            delay,
        };
        cfg.check_lens_sampling()?;
        Ok(cfg)
    }

    /// A fixed lens quadrature must resolve the field oscillations the
    /// largest configured IRS can produce across the lens.
    fn check_lens_sampling(&self) -> Result<(), ConfigError> {
        let Some(n) = self.lens_samples else {
            return Ok(());
        };
        let longest = self.irs.length.max(self.power_sweep.lengths.stop);
        let grid = self
            .irs
            .grid(&self.scene, longest, self.beam.wavelength)
            .map_err(core_err("irs"))?;
        let half = 0.5 * grid.length();
        let need = wave::lens_samples_for(&grid, (-half, half), &self.scene, self.beam.wavenumber());
        if n < need {
            return Err(err(
                "wave.lens_samples",
                format!("{n} samples undersample the field across the lens; need at least {need}"),
            ));
        }
        Ok(())
    }

    pub fn hash(&self) -> String {
        self.settings.hash()
    }

    pub fn seed(&self) -> u64 {
        self.mc.seed
    }
}

/// Parses and validates config text.
pub fn load_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    ExperimentConfig::load(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_reference_scene() {
        let c = load_config("").unwrap();
        assert_eq!(c.scene, SceneLayout::reference());
        assert_eq!(c.beam.waist_radius(), Some(1e-3));
        assert_eq!(c.beam.wavelength, 1.55e-6);
        assert_eq!(c.irs.spacing_for(c.beam.wavelength), 7.75e-7);
        assert_eq!(c.fading, FadingModel::default());
        assert_eq!(c.irs.family, DesignFamily::Focusing);
    }

    #[test]
    fn negative_kappa_names_the_key() {
        let e = load_config("fading.kappa = -1").unwrap_err();
        assert_eq!(e.key, "fading.kappa");
    }

    #[test]
    fn unknown_key_and_unit_mismatch() {
        assert_eq!(load_config("beam.colour = red").unwrap_err().key, "beam.colour");
        let e = load_config("irs.length = 50 cm").unwrap_err();
        assert_eq!(e.key, "irs.length");
        assert!(e.message.contains("cm"));
        assert!(load_config("irs.length = 0.5 m").is_ok());
    }

    #[test]
    fn duplicate_key_rejected() {
        assert!(load_config("mc.seed = 1\nmc.seed = 2").is_err());
    }

    #[test]
    fn round_trip_preserves_hash() {
        let c = load_config("irs.length = 0.25\nfield_map.wavelengths = 1e-6, 2e-6\nirs.spacing = 1e-6").unwrap();
        let again = load_config(&c.settings.serialize()).unwrap();
        assert_eq!(again.hash(), c.hash());
        assert_eq!(again, c);
    }

    #[test]
    fn hash_ignores_formatting() {
        let a = load_config("irs.length=0.5\n# note\n  mc.seed = 3").unwrap();
        let b = load_config("mc.seed = 3\nirs.length = 5e-1 m").unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), load_config("").unwrap().hash());
    }

    #[test]
    fn technology_selects_family() {
        let c = load_config("irs.technology = mirror").unwrap();
        assert_eq!(c.irs.family, DesignFamily::Mirror);
        let c = load_config("irs.technology = mirror\nirs.design = linear").unwrap();
        assert_eq!(c.irs.family, DesignFamily::Linear);
    }

    #[test]
    fn undersampled_lens_rejected() {
        let e = load_config("wave.lens_samples = 4").unwrap_err();
        assert_eq!(e.key, "wave.lens_samples");
        assert!(load_config("wave.lens_samples = 1000000").is_ok());
    }

    #[test]
    fn override_syntax() {
        let mut s = Settings::defaults();
        s.apply_override("mc.seed=9").unwrap();
        assert!(s.apply_override("mc.seed").is_err());
        assert_eq!(ExperimentConfig::from_settings(s).unwrap().seed(), 9);
    }

    #[test]
    fn axis_values() {
        let a = Axis {
            start: 1e-3,
            stop: 1.0,
            points: 4,
            log: true,
        };
        let v = a.values();
        assert!((v[1] - 1e-2).abs() < 1e-15 && (v[3] - 1.0).abs() < 1e-15);
        let l = Axis { log: false, start: 0.0, stop: 3.0, points: 4 };
        assert_eq!(l.values(), vec![0.0, 1.0, 2.0, 3.0]);
    }
}
