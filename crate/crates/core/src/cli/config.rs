//! Run configuration: a TOML document with the sections `[model]`,
//! `[coords]`, `[grid]`, `[run]`, `[initial]`, `[trace]`, `[duct]`,
//! `[verify]` and `[output]`, plus a top-level `seed`. Every key is optional.
//!
//! Parsing collects every problem it finds (unknown keys, wrong types,
//! out-of-range values, inconsistent combinations), each tagged with the
//! line and column of the offending text.

use std::ops::Range;
use std::sync::Arc;

use serde::Serialize;
use toml::de::{DeTable, DeValue};
use toml::Spanned;

use crate::coords::{Chart, ChartMode, DEFAULT_CACHE_NODES};
use crate::duct::{DuctProfile, DuctRun, DuctRunSettings, VelocityPulse};
use crate::error::{ConfigError, Error, Result};
use crate::pressure::{make_mhd_law, PowerLaw, PressureLaw, Profile, ValidityDomain};
use crate::riccati::Branch;
use crate::solver::blowup::DEFAULT_CUT;
use crate::solver::grid::{Boundary, MIN_NODES};
use crate::solver::initial::{Family, GridSpec, InitialData, Shape, Strength};
use crate::solver::run::RunSettings;
use crate::solver::scheme::MAX_CFL;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelName {
    /// p = K·v^{−γ}
    Psystem,
    /// p = K·e^{S(x)/c_v}·v^{−γ}
    Polytropic,
    /// p = B(x)·v^{−2}
    Mhd,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelConfig {
    pub name: ModelName,
    pub gamma: f64,
    pub k: f64,
    pub cv: f64,
    /// Entropy S(x) for `polytropic`, field B(x) for `mhd`.
    pub profile: Profile,
    pub v_min: f64,
    pub v_max: f64,
    /// Extra room beyond the grid interval in the law's x-range.
    pub x_margin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CoordsMode {
    Auto,
    Generic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoordsConfig {
    pub mode: CoordsMode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h0: Option<f64>,
    pub cache_nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InitialConfig {
    pub shape: Shape,
    pub family: Family,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_y: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_q: Option<f64>,
    pub v_ref: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_ref: Option<f64>,
}

impl InitialConfig {
    pub fn strength(&self) -> Strength {
        match (self.amplitude, self.min_y, self.min_q) {
            (_, Some(y), _) => Strength::MinY(y),
            (_, _, Some(q)) => Strength::MinQ(q),
            (a, _, _) => Strength::Amplitude(a.unwrap_or(0.0)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceConfig {
    pub family: Branch,
    /// Starting positions; empty means `count` evenly spaced interior points.
    pub seeds: Vec<f64>,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DuctConfig {
    pub gamma: f64,
    pub k: f64,
    pub cv: f64,
    pub profile: DuctProfile,
    pub n: usize,
    pub x_lo: f64,
    pub x_hi: f64,
    pub entropy: Profile,
    pub volume: f64,
    pub position_lo: f64,
    pub pulse: VelocityPulse,
    pub cfl: f64,
    pub t_max: f64,
    pub blowup_cut: f64,
    pub store_every: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyConfig {
    pub samples: usize,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputConfig {
    pub dir: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub seed: u64,
    pub model: ModelConfig,
    pub coords: CoordsConfig,
    pub grid: GridSpec,
    pub run: RunSettings,
    pub initial: InitialConfig,
    pub trace: TraceConfig,
    pub duct: DuctConfig,
    pub verify: VerifyConfig,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            model: ModelConfig {
                name: ModelName::Psystem,
                gamma: 2.0,
                k: 1.0,
                cv: 1.0,
                profile: Profile::constant(0.0),
                v_min: 0.05,
                v_max: 20.0,
                x_margin: 1.0,
            },
            coords: CoordsConfig {
                mode: CoordsMode::Auto,
                h0: None,
                cache_nodes: DEFAULT_CACHE_NODES,
            },
            grid: GridSpec {
                x_lo: 0.0,
                x_hi: 1.0,
                n: 400,
                boundary: Boundary::Periodic,
            },
            run: RunSettings::default(),
            initial: InitialConfig {
                shape: Shape::Sine {
                    wavenumber: 1.0,
                    phase: 0.0,
                },
                family: Family::Forward,
                amplitude: Some(0.1),
                min_y: None,
                min_q: None,
                v_ref: 1.0,
                x_ref: None,
            },
            trace: TraceConfig {
                family: Branch::Forward,
                seeds: Vec::new(),
                count: 8,
            },
            duct: DuctConfig {
                gamma: 1.4,
                k: 1.0,
                cv: 1.0,
                profile: DuctProfile::Linear { value: 1.0, slope: 0.1 },
                n: 400,
                x_lo: 0.0,
                x_hi: 2.0,
                entropy: Profile::constant(0.0),
                volume: 1.0,
                position_lo: 0.0,
                pulse: VelocityPulse {
                    amplitude: 0.05,
                    center: 1.0,
                    width: 0.1,
                },
                cfl: 0.8,
                t_max: 0.5,
                blowup_cut: DEFAULT_CUT,
                store_every: 1,
            },
            verify: VerifyConfig {
                samples: 1000,
                tolerance: 1e-8,
            },
            output: OutputConfig { dir: "out".into() },
        }
    }
}

impl RunConfig {
    pub fn law(&self) -> Result<Arc<dyn PressureLaw>> {
        let m = &self.model;
        let domain = ValidityDomain::new(
            m.v_min,
            m.v_max,
            self.grid.x_lo - m.x_margin,
            self.grid.x_hi + m.x_margin,
        )?;
        Ok(match m.name {
            ModelName::Psystem => Arc::new(PowerLaw::isentropic(m.gamma, m.k, domain)?),
            ModelName::Polytropic => Arc::new(PowerLaw::with_entropy(m.gamma, m.k, m.cv, m.profile, domain)?),
            ModelName::Mhd => Arc::new(make_mhd_law(m.profile, domain)?),
        })
    }

    pub fn chart(&self) -> Result<Chart> {
        let mode = match self.coords.mode {
            CoordsMode::Auto => ChartMode::Auto,
            CoordsMode::Generic => ChartMode::Generic,
        };
        Chart::with_options(self.law()?, mode, self.coords.h0, self.coords.cache_nodes)
    }

    pub fn initial_data(&self) -> InitialData {
        InitialData {
            shape: self.initial.shape,
            family: self.initial.family,
            strength: self.initial.strength(),
            v_ref: self.initial.v_ref,
            x_ref: self.initial.x_ref,
        }
    }

    /// Trace starting points: the configured seeds, or `count` points spread
    /// over the middle of the grid.
    pub fn trace_seeds(&self) -> Vec<f64> {
        if !self.trace.seeds.is_empty() {
            return self.trace.seeds.clone();
        }
        let (lo, hi) = (self.grid.x_lo, self.grid.x_hi);
        let k = self.trace.count;
        (0..k)
            .map(|j| lo + (hi - lo) * (0.25 + 0.5 * (j as f64 + 0.5) / k as f64))
            .collect()
    }

    pub fn duct_run(&self) -> Result<DuctRun> {
        let d = &self.duct;
        let mut run = DuctRun::new(d.gamma, d.k, d.cv, d.profile, d.n)?;
        run.x_lo = d.x_lo;
        run.x_hi = d.x_hi;
        run.entropy = d.entropy;
        run.volume = d.volume;
        run.position_lo = d.position_lo;
        run.pulse = d.pulse;
        Ok(run)
    }

    pub fn duct_settings(&self) -> DuctRunSettings {
        DuctRunSettings {
            cfl: self.duct.cfl,
            t_max: self.duct.t_max,
            blowup_cut: self.duct.blowup_cut,
            store_every: self.duct.store_every,
            max_steps: self.run.max_steps,
        }
    }

    /// The resolved configuration as TOML; parsing it gives back `self`.
    pub fn echo(&self) -> String {
        let mut table = toml::Table::try_from(self).expect("configuration is always representable as TOML");
        if self.model.name == ModelName::Psystem {
            if let Some(toml::Value::Table(m)) = table.get_mut("model") {
                m.remove("profile");
            }
        }
        toml::to_string(&table).expect("tables serialize")
    }
}

type Table<'i> = DeTable<'i>;

struct Parser<'s> {
    line_starts: Vec<usize>,
    src: &'s str,
    errors: Vec<ConfigError>,
}

impl<'s> Parser<'s> {
    fn new(src: &'s str) -> Self {
        let mut line_starts = vec![0];
        line_starts.extend(src.match_indices('\n').map(|(i, _)| i + 1));
        Parser {
            line_starts,
            src,
            errors: Vec::new(),
        }
    }

    fn error(&mut self, span: Range<usize>, message: impl Into<String>) {
        let offset = span.start.min(self.src.len());
        let line = self.line_starts.partition_point(|&s| s <= offset);
        let start = self.line_starts[line - 1];
        let column = self.src[start..offset].chars().count() + 1;
        self.errors.push(ConfigError {
            line,
            column,
            message: message.into(),
        });
    }

    fn check_keys(&mut self, table: &Table<'_>, path: &str, allowed: &[&str]) {
        for (k, _) in table.iter() {
            if !allowed.contains(&k.get_ref().as_ref()) {
                self.error(
                    k.span(),
                    format!(
                        "unknown key `{}` in {}; expected one of: {}",
                        k.get_ref(),
                        describe(path),
                        allowed.join(", ")
                    ),
                );
            }
        }
    }

    fn table<'t, 'i>(&mut self, parent: &'t Table<'i>, key: &str, path: &str) -> Option<&'t Table<'i>> {
        let v = get(parent, key)?;
        match v.get_ref() {
            DeValue::Table(t) => Some(t),
            other => {
                self.error(v.span(), format!("`{}` must be a table, found {}", join(path, key), other.type_str()));
                None
            }
        }
    }

    fn number(&mut self, table: &Table<'_>, key: &str, path: &str) -> Option<(f64, Range<usize>)> {
        let v = get(table, key)?;
        let parsed = match v.get_ref() {
            DeValue::Integer(i) => i64::from_str_radix(&i.as_str().replace('_', ""), i.radix())
                .ok()
                .map(|x| x as f64),
            DeValue::Float(f) => f.as_str().replace('_', "").parse::<f64>().ok(),
            other => {
                self.error(v.span(), format!("`{}` must be a number, found {}", join(path, key), other.type_str()));
                return None;
            }
        };
        match parsed {
            Some(x) => Some((x, v.span())),
            None => {
                self.error(v.span(), format!("`{}` is not a representable number", join(path, key)));
                None
            }
        }
    }

    fn integer(&mut self, table: &Table<'_>, key: &str, path: &str) -> Option<(u64, Range<usize>)> {
        let v = get(table, key)?;
        match v.get_ref() {
            DeValue::Integer(i) => match u64::from_str_radix(&i.as_str().replace('_', ""), i.radix()) {
                Ok(x) => Some((x, v.span())),
                Err(_) => {
                    self.error(v.span(), format!("`{}` must be a non-negative integer", join(path, key)));
                    None
                }
            },
            other => {
                self.error(
                    v.span(),
                    format!("`{}` must be an integer, found {}", join(path, key), other.type_str()),
                );
                None
            }
        }
    }

    fn boolean(&mut self, table: &Table<'_>, key: &str, path: &str) -> Option<bool> {
        let v = get(table, key)?;
        match v.get_ref() {
            DeValue::Boolean(b) => Some(*b),
            other => {
                self.error(v.span(), format!("`{}` must be a boolean, found {}", join(path, key), other.type_str()));
                None
            }
        }
    }

    fn string(&mut self, table: &Table<'_>, key: &str, path: &str) -> Option<(String, Range<usize>)> {
        let v = get(table, key)?;
        match v.get_ref() {
            DeValue::String(s) => Some((s.to_string(), v.span())),
            other => {
                self.error(v.span(), format!("`{}` must be a string, found {}", join(path, key), other.type_str()));
                None
            }
        }
    }

    fn choice<T: Copy>(&mut self, table: &Table<'_>, key: &str, path: &str, options: &[(&str, T)]) -> Option<T> {
        let (s, span) = self.string(table, key, path)?;
        match options.iter().find(|(name, _)| *name == s) {
            Some(&(_, v)) => Some(v),
            None => {
                let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
                self.error(
                    span,
                    format!("`{}` = \"{s}\" is not one of: {}", join(path, key), names.join(", ")),
                );
                None
            }
        }
    }

    /// Reads an optional number into `slot`, checking `ok` and naming the
    /// admissible range in the error.
    fn set_number(
        &mut self,
        table: &Table<'_>,
        key: &str,
        path: &str,
        slot: &mut f64,
        ok: impl Fn(f64) -> bool,
        range: &str,
    ) {
        if let Some((x, span)) = self.number(table, key, path) {
            if ok(x) {
                *slot = x;
            } else {
                self.error(span, format!("`{}` = {x} out of range: must be {range}", join(path, key)));
            }
        }
    }

    fn set_count(&mut self, table: &Table<'_>, key: &str, path: &str, slot: &mut usize, min: usize) {
        if let Some((x, span)) = self.integer(table, key, path) {
            if x >= min as u64 {
                *slot = x as usize;
            } else {
                self.error(span, format!("`{}` = {x} out of range: must be at least {min}", join(path, key)));
            }
        }
    }

    fn required(&mut self, table: &Table<'_>, span: Range<usize>, key: &str, path: &str) -> Option<f64> {
        if get(table, key).is_none() {
            self.error(span, format!("{} is missing `{key}`", describe(path)));
            return None;
        }
        self.number(table, key, path).map(|(x, _)| x)
    }

    /// `{ kind = "...", ... }` with the listed parameters; `optional` ones
    /// default to 0.
    fn tagged<'t, 'i>(
        &mut self,
        parent: &'t Table<'i>,
        key: &str,
        path: &str,
        kinds: &[(&str, &[&str], &[&str])],
    ) -> Option<(String, Vec<f64>)> {
        let value = get(parent, key)?;
        let full = join(path, key);
        let DeValue::Table(t) = value.get_ref() else {
            self.error(value.span(), format!("`{full}` must be a table with a `kind` key"));
            return None;
        };
        let Some((kind, span)) = self.string(t, "kind", &full) else {
            if get(t, "kind").is_none() {
                self.error(value.span(), format!("`{full}` is missing `kind`"));
            }
            return None;
        };
        let Some(&(_, required, optional)) = kinds.iter().find(|(k, _, _)| *k == kind) else {
            let names: Vec<&str> = kinds.iter().map(|(k, _, _)| *k).collect();
            self.error(span, format!("`{full}.kind` = \"{kind}\" is not one of: {}", names.join(", ")));
            return None;
        };
        let mut allowed = vec!["kind"];
        allowed.extend_from_slice(required);
        allowed.extend_from_slice(optional);
        self.check_keys(t, &full, &allowed);
        let mut values = Vec::new();
        let mut complete = true;
        for p in required {
            match self.required(t, value.span(), p, &full) {
                Some(x) => values.push(x),
                None => complete = false,
            }
        }
        for p in optional {
            values.push(self.number(t, p, &full).map_or(0.0, |(x, _)| x));
        }
        complete.then_some((kind, values))
    }

    fn profile(&mut self, parent: &Table<'_>, key: &str, path: &str, slot: &mut Profile) {
        let kinds: &[(&str, &[&str], &[&str])] = &[
            ("constant", &["value"], &[]),
            ("linear", &["value", "slope"], &[]),
            ("sinusoidal", &["mean", "amplitude", "wavenumber"], &["phase"]),
            ("tanh_step", &["mean", "amplitude", "center", "width"], &[]),
        ];
        let Some((kind, p)) = self.tagged(parent, key, path, kinds) else {
            return;
        };
        *slot = match kind.as_str() {
            "constant" => Profile::Constant { value: p[0] },
            "linear" => Profile::Linear {
                value: p[0],
                slope: p[1],
            },
            "sinusoidal" => Profile::Sinusoidal {
                mean: p[0],
                amplitude: p[1],
                wavenumber: p[2],
                phase: p[3],
            },
            _ => Profile::TanhStep {
                mean: p[0],
                amplitude: p[1],
                center: p[2],
                width: p[3],
            },
        };
        if let Profile::TanhStep { width, .. } = *slot {
            if !(width > 0.0) {
                let span = get(parent, key).unwrap().span();
                self.error(span, format!("`{}.width` must be positive", join(path, key)));
            }
        }
    }
}

fn get<'t, 'i>(table: &'t Table<'i>, key: &str) -> Option<&'t Spanned<DeValue<'i>>> {
    table.iter().find(|(k, _)| k.get_ref() == key).map(|(_, v)| v)
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn describe(path: &str) -> String {
    if path.is_empty() {
        "the top level".into()
    } else {
        format!("[{path}]")
    }
}

const TOP: &[&str] = &[
    "seed", "model", "coords", "grid", "run", "initial", "trace", "duct", "verify", "output",
];

fn positive(x: f64) -> bool {
    x > 0.0 && x.is_finite()
}

fn finite(x: f64) -> bool {
    x.is_finite()
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let doc = DeTable::parse(text).map_err(|e| {
        let mut p = Parser::new(text);
        p.error(e.span().unwrap_or(0..0), e.message().trim().to_string());
        Error::Config(p.errors)
    })?;
    let root = doc.get_ref();
    let mut p = Parser::new(text);
    let mut cfg = RunConfig::default();
    p.check_keys(root, "", TOP);
    if let Some((s, _)) = p.integer(root, "seed", "") {
        cfg.seed = s;
    }
    model_section(&mut p, root, &mut cfg);
    coords_section(&mut p, root, &mut cfg);
    grid_section(&mut p, root, &mut cfg);
    run_section(&mut p, root, &mut cfg);
    initial_section(&mut p, root, &mut cfg);
    trace_section(&mut p, root, &mut cfg);
    duct_section(&mut p, root, &mut cfg);
    if let Some(t) = p.table(root, "verify", "") {
        p.check_keys(t, "verify", &["samples", "tolerance"]);
        p.set_count(t, "samples", "verify", &mut cfg.verify.samples, 1);
        p.set_number(t, "tolerance", "verify", &mut cfg.verify.tolerance, positive, "positive");
    }
    if let Some(t) = p.table(root, "output", "") {
        p.check_keys(t, "output", &["dir"]);
        if let Some((d, span)) = p.string(t, "dir", "output") {
            if d.is_empty() {
                p.error(span, "`output.dir` must not be empty");
            } else {
                cfg.output.dir = d;
            }
        }
    }
    if p.errors.is_empty() {
        Ok(cfg)
    } else {
        p.errors.sort_by_key(|e| (e.line, e.column));
        Err(Error::Config(p.errors))
    }
}

pub fn load_config(path: &std::path::Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}

fn model_section(p: &mut Parser<'_>, root: &Table<'_>, cfg: &mut RunConfig) {
    let Some(t) = p.table(root, "model", "") else {
        return;
    };
    let path = "model";
    p.check_keys(t, path, &["name", "gamma", "k", "cv", "profile", "v_min", "v_max", "x_margin"]);
    let m = &mut cfg.model;
    if let Some(name) = p.choice(
        t,
        "name",
        path,
        &[
            ("psystem", ModelName::Psystem),
            ("polytropic", ModelName::Polytropic),
            ("mhd", ModelName::Mhd),
        ],
    ) {
        m.name = name;
    }
    if m.name == ModelName::Mhd {
        m.profile = Profile::constant(1.0);
    }
    p.set_number(t, "gamma", path, &mut m.gamma, |g| g > 1.0 && g.is_finite(), "greater than 1");
    if m.name == ModelName::Mhd {
        if let Some((g, span)) = p.number(t, "gamma", path) {
            if g != 2.0 {
                p.error(span, format!("`model.gamma` = {g} but the mhd law has γ = 2"));
            }
        }
        m.gamma = 2.0;
    }
    p.set_number(t, "k", path, &mut m.k, positive, "positive");
    p.set_number(t, "cv", path, &mut m.cv, positive, "positive");
    p.profile(t, "profile", path, &mut m.profile);
    p.set_number(t, "v_min", path, &mut m.v_min, positive, "positive");
    p.set_number(t, "v_max", path, &mut m.v_max, positive, "positive");
    p.set_number(t, "x_margin", path, &mut m.x_margin, |x| x >= 0.0 && x.is_finite(), "non-negative");
    if m.v_max <= m.v_min {
        let span = get(t, "v_max").or(get(t, "v_min")).map_or(0..0, |v| v.span());
        p.error(span, format!("`model.v_max` = {} must exceed `model.v_min` = {}", m.v_max, m.v_min));
    }
    if m.name == ModelName::Psystem && get(t, "profile").is_some() {
        p.error(get(t, "profile").unwrap().span(), "the psystem model takes no `profile`");
    }
}

fn coords_section(p: &mut Parser<'_>, root: &Table<'_>, cfg: &mut RunConfig) {
    let Some(t) = p.table(root, "coords", "") else {
        return;
    };
    let path = "coords";
    p.check_keys(t, path, &["mode", "h0", "cache_nodes"]);
    if let Some(m) = p.choice(
        t,
        "mode",
        path,
        &[("auto", CoordsMode::Auto), ("generic", CoordsMode::Generic)],
    ) {
        cfg.coords.mode = m;
    }
    let mut h0 = 0.0;
    if get(t, "h0").is_some() {
        let before = p.errors.len();
        p.set_number(t, "h0", path, &mut h0, |h| h >= 0.0 && h.is_finite(), "non-negative");
        if p.errors.len() == before {
            cfg.coords.h0 = Some(h0);
        }
    }
    p.set_count(t, "cache_nodes", path, &mut cfg.coords.cache_nodes, 1);
}

fn grid_section(p: &mut Parser<'_>, root: &Table<'_>, cfg: &mut RunConfig) {
    let Some(t) = p.table(root, "grid", "") else {
        return;
    };
    let path = "grid";
    p.check_keys(t, path, &["n", "x_lo", "x_hi", "boundary"]);
    let g = &mut cfg.grid;
    p.set_count(t, "n", path, &mut g.n, MIN_NODES);
    p.set_number(t, "x_lo", path, &mut g.x_lo, finite, "finite");
    p.set_number(t, "x_hi", path, &mut g.x_hi, finite, "finite");
    if let Some(b) = p.choice(
        t,
        "boundary",
        path,
        &[("periodic", Boundary::Periodic), ("outflow", Boundary::Outflow)],
    ) {
        g.boundary = b;
    }
    if g.x_hi <= g.x_lo {
        let span = get(t, "x_hi").or(get(t, "x_lo")).map_or(0..0, |v| v.span());
        p.error(span, format!("`grid.x_hi` = {} must exceed `grid.x_lo` = {}", g.x_hi, g.x_lo));
    }
}

fn run_section(p: &mut Parser<'_>, root: &Table<'_>, cfg: &mut RunConfig) {
    let Some(t) = p.table(root, "run", "") else {
        return;
    };
    let path = "run";
    p.check_keys(
        t,
        path,
        &[
            "cfl",
            "t_max",
            "nu",
            "blowup_cut",
            "store_every",
            "max_steps",
            "confirm_refinement",
        ],
    );
    let r = &mut cfg.run;
    p.set_number(t, "cfl", path, &mut r.cfl, |c| c > 0.0 && c <= MAX_CFL, &format!("in (0, {MAX_CFL}]"));
    p.set_number(t, "t_max", path, &mut r.t_max, |x| x >= 0.0 && x.is_finite(), "non-negative");
    p.set_number(t, "nu", path, &mut r.nu, |x| x > 0.0 && x < 1.0, "in (0, 1)");
    p.set_number(t, "blowup_cut", path, &mut r.blowup_cut, positive, "positive");
    p.set_count(t, "store_every", path, &mut r.store_every, 1);
    p.set_count(t, "max_steps", path, &mut r.max_steps, 1);
    if let Some(b) = p.boolean(t, "confirm_refinement", path) {
        r.confirm_refinement = b;
    }
}

fn initial_section(p: &mut Parser<'_>, root: &Table<'_>, cfg: &mut RunConfig) {
    let Some(t) = p.table(root, "initial", "") else {
        return;
    };
    let path = "initial";
    p.check_keys(
        t,
        path,
        &["shape", "family", "amplitude", "min_y", "min_q", "v_ref", "x_ref"],
    );
    let ini = &mut cfg.initial;
    let kinds: &[(&str, &[&str], &[&str])] = &[
        ("flat", &[], &[]),
        ("sine", &["wavenumber"], &["phase"]),
        ("gaussian", &["center", "width"], &[]),
        ("tanh", &["center", "width"], &[]),
    ];
    if let Some((kind, v)) = p.tagged(t, "shape", path, kinds) {
        ini.shape = match kind.as_str() {
            "flat" => Shape::Flat,
            "sine" => Shape::Sine {
                wavenumber: v[0],
                phase: v[1],
            },
            "gaussian" => Shape::Gaussian {
                center: v[0],
                width: v[1],
            },
            _ => Shape::Tanh {
                center: v[0],
                width: v[1],
            },
        };
        if matches!(ini.shape, Shape::Gaussian { width, .. } | Shape::Tanh { width, .. } if !(width > 0.0)) {
            p.error(get(t, "shape").unwrap().span(), "`initial.shape.width` must be positive");
        }
    }
    if let Some(f) = p.choice(
        t,
        "family",
        path,
        &[
            ("forward", Family::Forward),
            ("backward", Family::Backward),
            ("velocity", Family::Velocity),
        ],
    ) {
        ini.family = f;
    }
    let given: Vec<&str> = ["amplitude", "min_y", "min_q"]
        .into_iter()
        .filter(|k| get(t, k).is_some())
        .collect();
    if given.len() > 1 {
        let span = get(t, given[1]).unwrap().span();
        p.error(
            span,
            format!("give only one of `initial.amplitude`, `initial.min_y`, `initial.min_q` (found {})", given.join(", ")),
        );
    } else if let Some(&key) = given.first() {
        if let Some((x, span)) = p.number(t, key, path) {
            if !x.is_finite() {
                p.error(span, format!("`initial.{key}` must be finite"));
            } else {
                ini.amplitude = None;
                match key {
                    "amplitude" => ini.amplitude = Some(x),
                    "min_y" => ini.min_y = Some(x),
                    _ => ini.min_q = Some(x),
                }
            }
        }
    }
    p.set_number(t, "v_ref", path, &mut ini.v_ref, positive, "positive");
    if get(t, "x_ref").is_some() {
        let mut x = 0.0;
        let before = p.errors.len();
        p.set_number(t, "x_ref", path, &mut x, finite, "finite");
        if p.errors.len() == before {
            ini.x_ref = Some(x);
        }
    }
}

fn trace_section(p: &mut Parser<'_>, root: &Table<'_>, cfg: &mut RunConfig) {
    let Some(t) = p.table(root, "trace", "") else {
        return;
    };
    let path = "trace";
    p.check_keys(t, path, &["family", "seeds", "count"]);
    if let Some(b) = p.choice(
        t,
        "family",
        path,
        &[("forward", Branch::Forward), ("backward", Branch::Backward)],
    ) {
        cfg.trace.family = b;
    }
    p.set_count(t, "count", path, &mut cfg.trace.count, 1);
    if let Some(v) = get(t, "seeds") {
        match v.get_ref() {
            DeValue::Array(items) => {
                let mut seeds = Vec::new();
                for item in items.iter() {
                    let x = match item.get_ref() {
                        DeValue::Integer(i) => i.as_str().replace('_', "").parse::<f64>().ok(),
                        DeValue::Float(f) => f.as_str().replace('_', "").parse::<f64>().ok(),
                        _ => None,
                    };
                    match x {
                        Some(x) if x >= cfg.grid.x_lo && x <= cfg.grid.x_hi => seeds.push(x),
                        Some(x) => p.error(
                            item.span(),
                            format!("trace seed {x} lies outside the grid [{}, {}]", cfg.grid.x_lo, cfg.grid.x_hi),
                        ),
                        None => p.error(item.span(), "trace seeds must be numbers"),
                    }
                }
                cfg.trace.seeds = seeds;
            }
            other => p.error(
                v.span(),
                format!("`trace.seeds` must be an array of numbers, found {}", other.type_str()),
            ),
        }
    }
}

fn duct_section(p: &mut Parser<'_>, root: &Table<'_>, cfg: &mut RunConfig) {
    let Some(t) = p.table(root, "duct", "") else {
        return;
    };
    let path = "duct";
    p.check_keys(
        t,
        path,
        &[
            "gamma",
            "k",
            "cv",
            "profile",
            "n",
            "x_lo",
            "x_hi",
            "entropy",
            "volume",
            "position_lo",
            "pulse",
            "cfl",
            "t_max",
            "blowup_cut",
            "store_every",
        ],
    );
    let d = &mut cfg.duct;
    p.set_number(t, "gamma", path, &mut d.gamma, |g| g > 1.0 && g.is_finite(), "greater than 1");
    p.set_number(t, "k", path, &mut d.k, positive, "positive");
    p.set_number(t, "cv", path, &mut d.cv, positive, "positive");
    let kinds: &[(&str, &[&str], &[&str])] = &[
        ("constant", &["value"], &[]),
        ("linear", &["value", "slope"], &[]),
        ("smooth_nozzle", &["inlet", "outlet", "center", "width"], &[]),
    ];
    if let Some((kind, v)) = p.tagged(t, "profile", path, kinds) {
        let profile = match kind.as_str() {
            "constant" => DuctProfile::Constant { value: v[0] },
            "linear" => DuctProfile::Linear {
                value: v[0],
                slope: v[1],
            },
            _ => DuctProfile::SmoothNozzle {
                inlet: v[0],
                outlet: v[1],
                center: v[2],
                width: v[3],
            },
        };
        match profile.validate() {
            Ok(()) => d.profile = profile,
            Err(e) => p.error(get(t, "profile").unwrap().span(), e.to_string()),
        }
    }
    p.set_count(t, "n", path, &mut d.n, MIN_NODES);
    p.set_number(t, "x_lo", path, &mut d.x_lo, finite, "finite");
    p.set_number(t, "x_hi", path, &mut d.x_hi, finite, "finite");
    if d.x_hi <= d.x_lo {
        let span = get(t, "x_hi").or(get(t, "x_lo")).map_or(0..0, |v| v.span());
        p.error(span, format!("`duct.x_hi` = {} must exceed `duct.x_lo` = {}", d.x_hi, d.x_lo));
    }
    p.profile(t, "entropy", path, &mut d.entropy);
    p.set_number(t, "volume", path, &mut d.volume, positive, "positive");
    p.set_number(t, "position_lo", path, &mut d.position_lo, finite, "finite");
    if let Some(pulse) = p.table(t, "pulse", path) {
        let pp = "duct.pulse";
        p.check_keys(pulse, pp, &["amplitude", "center", "width"]);
        p.set_number(pulse, "amplitude", pp, &mut d.pulse.amplitude, finite, "finite");
        p.set_number(pulse, "center", pp, &mut d.pulse.center, finite, "finite");
        p.set_number(pulse, "width", pp, &mut d.pulse.width, positive, "positive");
    }
    p.set_number(t, "cfl", path, &mut d.cfl, |c| c > 0.0 && c <= MAX_CFL, &format!("in (0, {MAX_CFL}]"));
    p.set_number(t, "t_max", path, &mut d.t_max, |x| x >= 0.0 && x.is_finite(), "non-negative");
    p.set_number(t, "blowup_cut", path, &mut d.blowup_cut, positive, "positive");
    p.set_count(t, "store_every", path, &mut d.store_every, 1);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn errors(text: &str) -> Vec<ConfigError> {
        match parse_config(text) {
            Err(Error::Config(e)) => e,
            other => panic!("expected config errors, got {other:?}"),
        }
    }

    #[test]
    fn minimal_config_fills_defaults() {
        let c = parse_config("[model]\nname = \"psystem\"\ngamma = 2\n").unwrap();
        assert_eq!(c.model.name, ModelName::Psystem);
        assert_eq!(c.model.gamma, 2.0);
        assert_eq!(c.grid.n, 400);
        assert_eq!(c.run.cfl, 0.8);
        assert_eq!(c.run.nu, 0.01);
        assert_eq!(c.initial.strength(), Strength::Amplitude(0.1));
        assert_eq!(parse_config("").unwrap(), RunConfig::default());
    }

    #[test]
    fn cfl_range_error_names_the_bound() {
        let e = errors("[run]\ncfl = 1.5\n");
        assert_eq!(e.len(), 1);
        assert_eq!((e[0].line, e[0].column), (2, 7));
        assert!(e[0].message.contains("(0, 0.9]"), "{}", e[0].message);
    }

    #[test]
    fn every_error_is_reported() {
        let e = errors("seed = 3\n[grid]\nn = 4\n[run]\nnu = 2.0\ncolour = \"red\"\n");
        assert_eq!(e.len(), 3, "{e:?}");
        assert_eq!(e.iter().map(|e| e.line).collect::<Vec<_>>(), [3, 5, 6]);
        assert!(e[2].message.contains("unknown key `colour`"));
    }

    #[test]
    fn type_mismatch_and_syntax_errors_have_positions() {
        let e = errors("[grid]\nn = \"many\"\n");
        assert_eq!((e[0].line, e[0].column), (2, 5));
        assert!(e[0].message.contains("integer"));
        let e = errors("[grid\nn = 3\n");
        assert_eq!(e.len(), 1);
        assert_eq!(e[0].line, 1);
    }

    #[test]
    fn tagged_tables() {
        let c = parse_config(
            "[model]\nname = \"mhd\"\nprofile = { kind = \"sinusoidal\", mean = 1, amplitude = 0.1, wavenumber = 1 }\n\
             [initial]\nshape = { kind = \"gaussian\", center = 0.5, width = 0.1 }\nmin_y = -2\n",
        )
        .unwrap();
        assert_eq!(
            c.model.profile,
            Profile::Sinusoidal {
                mean: 1.0,
                amplitude: 0.1,
                wavenumber: 1.0,
                phase: 0.0
            }
        );
        assert_eq!(c.initial.strength(), Strength::MinY(-2.0));
        let e = errors("[initial]\nshape = { kind = \"gaussian\", center = 0.5 }\namplitude = 1\nmin_q = 2\n");
        assert_eq!(e.len(), 2, "{e:?}");
        assert!(e[0].message.contains("missing `width`"));
        assert!(e[1].message.contains("only one"));
    }

    #[test]
    fn echo_round_trips() {
        let text = "seed = 7\n[model]\nname = \"polytropic\"\ngamma = 1.4\n\
                    profile = { kind = \"tanh_step\", mean = 0, amplitude = 0.2, center = 0.5, width = 0.1 }\n\
                    [coords]\nh0 = 0.25\n[grid]\nboundary = \"outflow\"\nn = 101\nx_lo = -1\nx_hi = 1\n\
                    [run]\nt_max = 0.3\nnu = 0.05\n[initial]\nfamily = \"velocity\"\nmin_q = -1.5\nx_ref = 0.1\n\
                    [trace]\nseeds = [0.1, -0.2]\nfamily = \"backward\"\n\
                    [duct]\nprofile = { kind = \"smooth_nozzle\", inlet = 1, outlet = 0.5, center = 1, width = 0.2 }\n\
                    pulse = { amplitude = 0.01, center = 0.7, width = 0.05 }\n";
        let c = parse_config(text).unwrap();
        let again = parse_config(&c.echo()).unwrap();
        assert_eq!(again, c);
        assert_eq!(parse_config(&RunConfig::default().echo()).unwrap(), RunConfig::default());
    }

    #[test]
    fn builds_the_configured_law() {
        let c = parse_config("[model]\nname = \"mhd\"\n").unwrap();
        let chart = c.chart().unwrap();
        let d = chart.law().eval(1.0, 0.5).unwrap();
        assert!((d.p - 1.0).abs() < 1e-15);
        assert!(c.trace_seeds().len() == 8);
        assert!(errors("[model]\nname = \"mhd\"\ngamma = 1.4\n")[0].message.contains("γ = 2"));
    }
}
