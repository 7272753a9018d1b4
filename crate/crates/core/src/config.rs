//! Run configuration in TOML.
//!
//! ```toml
//! # Rates in units of gamma_i.
//! gamma_i = 1.0
//! gamma_s = 2000.0
//! gamma_A = 10000.0
//! gamma_B = 20.0
//! squeezing_db = 25.0      # or lambda = 0.8935; dB wins when both agree
//! eta = 1.0
//! omega_rabi = 6.0
//!
//! [[sweep]]                # zero or more axes, expanded as a product
//! name = "gamma_B_over_gamma_s"
//! values = [1e-1, 1e-2]    # or log = { start, stop, points } / linear = { ... }
//!
//! [grid]
//! tau = { start = 0.0, stop = 2.0, points = 401 }
//! omega = { start = -20.0, stop = 20.0, points = 801 }
//! rabi = [2.0, 6.0, 10.0]  # Rabi values for spectrum surfaces
//!
//! [design]
//! target_g2 = 0.003
//!
//! [output]
//! quantity = "g2"          # spectrum | g2 | g2zero | design | mc
//!
//! [mc]
//! duration = 1000.0
//! n_traj = 16
//! alice = "lowpass"        # or broadband
//! routing = "teleporter"   # or bypass
//! input = "vacuum"         # or coherent (input_amplitude = [re, im]) / chaotic (input_flux)
//! welch_sample_dt = 0.05
//! welch_segment = 512
//! lag_dt = 0.1
//! n_lags = 20
//! budget_seconds = 600.0
//! compare = ["background_flux", "opo_squeezing", "a_s"]
//! ```
//!
//! Unknown keys are errors. Every problem found is reported, not just the
//! first.

use std::time::Duration;

use num_complex::Complex64 as C64;
use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::mc::{AliceResponse, InputSource, LagConfig, McConfig, Routing, WelchConfig};
use crate::params::{db_from_lambda, lambda_from_db, TeleporterParams};
use crate::series::{linspace, logspace};

/// Tolerance on the disagreement between `lambda` and `squeezing_db`.
pub const SQUEEZING_CONSISTENCY: f64 = 1e-6;

/// Parameters a sweep may vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweptName {
    GammaI,
    GammaS,
    GammaA,
    GammaB,
    Lambda,
    SqueezingDb,
    Eta,
    OmegaRabi,
    /// Sets `γ_s = γ_B/r` and keeps `γ_A/γ_s`.
    GammaBOverGammaS,
    /// Sets `γ_A = r γ_s`.
    GammaAOverGammaS,
}

impl SweptName {
    pub const ALL: [SweptName; 10] = [
        SweptName::GammaI,
        SweptName::GammaS,
        SweptName::GammaA,
        SweptName::GammaB,
        SweptName::Lambda,
        SweptName::SqueezingDb,
        SweptName::Eta,
        SweptName::OmegaRabi,
        SweptName::GammaBOverGammaS,
        SweptName::GammaAOverGammaS,
    ];

    pub fn key(self) -> &'static str {
        match self {
            SweptName::GammaI => "gamma_i",
            SweptName::GammaS => "gamma_s",
            SweptName::GammaA => "gamma_A",
            SweptName::GammaB => "gamma_B",
            SweptName::Lambda => "lambda",
            SweptName::SqueezingDb => "squeezing_db",
            SweptName::Eta => "eta",
            SweptName::OmegaRabi => "omega_rabi",
            SweptName::GammaBOverGammaS => "gamma_B_over_gamma_s",
            SweptName::GammaAOverGammaS => "gamma_A_over_gamma_s",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|n| n.key() == s)
    }

    pub fn apply(self, mut p: TeleporterParams, v: f64) -> Result<TeleporterParams> {
        match self {
            SweptName::GammaI => p.gamma_i = v,
            SweptName::GammaS => p.gamma_s = v,
            SweptName::GammaA => p.gamma_a = v,
            SweptName::GammaB => p.gamma_b = v,
            SweptName::Lambda => p.lambda = v,
            SweptName::SqueezingDb => p.lambda = lambda_from_db(v)?,
            SweptName::Eta => p.eta = v,
            SweptName::OmegaRabi => p.omega_rabi = v,
            SweptName::GammaBOverGammaS => {
                if !(v > 0.0) {
                    return Err(Error::InvalidParam {
                        name: "gamma_B_over_gamma_s",
                        reason: format!("ratio must be positive, got {v}"),
                    });
                }
                p = p.with_filter_ratio(v);
            }
            SweptName::GammaAOverGammaS => p.gamma_a = v * p.gamma_s,
        }
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub name: SweptName,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Spectrum,
    G2,
    G2Zero,
    Design,
    Mc,
}

impl Quantity {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "spectrum" => Quantity::Spectrum,
            "g2" => Quantity::G2,
            "g2zero" => Quantity::G2Zero,
            "design" => Quantity::Design,
            "mc" => Quantity::Mc,
            _ => return None,
        })
    }

    pub fn label(self) -> &'static str {
        match self {
            Quantity::Spectrum => "spectrum",
            Quantity::G2 => "g2",
            Quantity::G2Zero => "g2zero",
            Quantity::Design => "design",
            Quantity::Mc => "mc",
        }
    }
}

/// Gaussian-sector quantities the Monte Carlo can be checked on, plus the
/// photon-correlation request that is refused.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompareQuantity {
    BackgroundFlux,
    OpoSqueezing,
    As,
    G2,
}

impl CompareQuantity {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "background_flux" => CompareQuantity::BackgroundFlux,
            "opo_squeezing" => CompareQuantity::OpoSqueezing,
            "a_s" => CompareQuantity::As,
            "g2" => CompareQuantity::G2,
            _ => return None,
        })
    }

    pub fn label(self) -> &'static str {
        match self {
            CompareQuantity::BackgroundFlux => "background_flux",
            CompareQuantity::OpoSqueezing => "opo_squeezing",
            CompareQuantity::As => "a_s",
            CompareQuantity::G2 => "g2",
        }
    }
}

/// One evaluation point of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub index: usize,
    pub coords: Vec<(SweptName, f64)>,
    pub params: TeleporterParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base: TeleporterParams,
    pub axes: Vec<SweepAxis>,
    pub quantity: Quantity,
    pub tau: Vec<f64>,
    pub omega: Vec<f64>,
    /// Rabi values for spectrum surfaces; empty means the base value.
    pub rabi: Vec<f64>,
    pub target_g2: Option<f64>,
}

impl SweepSpec {
    /// Product of all axes, the last axis varying fastest.
    pub fn points(&self) -> Result<Vec<SweepPoint>> {
        let mut coords: Vec<Vec<(SweptName, f64)>> = vec![Vec::new()];
        for axis in &self.axes {
            coords = coords
                .into_iter()
                .flat_map(|c| {
                    axis.values.iter().map(move |&v| {
                        let mut c = c.clone();
                        c.push((axis.name, v));
                        c
                    })
                })
                .collect();
        }
        let mut errors = Vec::new();
        let mut points = Vec::with_capacity(coords.len());
        for (index, coords) in coords.into_iter().enumerate() {
            let mut p = self.base;
            let mut ok = true;
            for &(name, v) in &coords {
                match name.apply(p, v) {
                    Ok(q) => p = q,
                    Err(e) => {
                        errors.push(format!("sweep point {index}: {e}"));
                        ok = false;
                    }
                }
            }
            if ok {
                for e in p.violations() {
                    errors.push(format!("sweep point {index}: {e}"));
                }
            }
            points.push(SweepPoint { index, coords, params: p });
        }
        if errors.is_empty() {
            Ok(points)
        } else {
            Err(Error::Config(errors))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: TeleporterParams,
    pub sweep: SweepSpec,
    pub mc: McConfig,
    pub compare: Vec<CompareQuantity>,
}

pub const DEFAULT_TAU: (f64, f64, usize) = (0.0, 2.0, 401);
pub const DEFAULT_OMEGA: (f64, f64, usize) = (-20.0, 20.0, 801);

const TOP_KEYS: [&str; 13] = [
    "gamma_i",
    "gamma_s",
    "gamma_A",
    "gamma_B",
    "lambda",
    "squeezing_db",
    "eta",
    "omega_rabi",
    "sweep",
    "grid",
    "design",
    "output",
    "mc",
];
const MC_KEYS: [&str; 16] = [
    "duration",
    "warmup",
    "dt",
    "n_traj",
    "seed",
    "alice",
    "routing",
    "input",
    "input_amplitude",
    "input_flux",
    "welch_sample_dt",
    "welch_segment",
    "lag_dt",
    "n_lags",
    "budget_seconds",
    "compare",
];

struct Reader {
    errors: Vec<String>,
}

impl Reader {
    fn unknown(&mut self, table: &Table, allowed: &[&str], context: &str) {
        for k in table.keys() {
            if !allowed.contains(&k.as_str()) {
                self.errors.push(format!("unknown key `{context}{k}`"));
            }
        }
    }

    fn float(&mut self, table: &Table, key: &str, context: &str) -> Option<f64> {
        match table.get(key)? {
            Value::Float(v) => Some(*v),
            Value::Integer(v) => Some(*v as f64),
            other => {
                self.errors
                    .push(format!("`{context}{key}` must be a number, got {}", other.type_str()));
                None
            }
        }
    }

    fn positive_int(&mut self, table: &Table, key: &str, context: &str) -> Option<usize> {
        match table.get(key)? {
            Value::Integer(v) if *v > 0 => Some(*v as usize),
            other => {
                self.errors
                    .push(format!("`{context}{key}` must be a positive integer, got {other}"));
                None
            }
        }
    }

    fn string<'a>(&mut self, table: &'a Table, key: &str, context: &str) -> Option<&'a str> {
        match table.get(key)? {
            Value::String(s) => Some(s),
            other => {
                self.errors
                    .push(format!("`{context}{key}` must be a string, got {}", other.type_str()));
                None
            }
        }
    }

    fn table<'a>(&mut self, table: &'a Table, key: &str) -> Option<&'a Table> {
        match table.get(key)? {
            Value::Table(t) => Some(t),
            other => {
                self.errors
                    .push(format!("`{key}` must be a table, got {}", other.type_str()));
                None
            }
        }
    }

    fn float_list(&mut self, v: &Value, context: &str) -> Option<Vec<f64>> {
        let Value::Array(items) = v else {
            self.errors.push(format!("`{context}` must be an array of numbers"));
            return None;
        };
        let mut out = Vec::with_capacity(items.len());
        for item in items {
            match item {
                Value::Float(x) => out.push(*x),
                Value::Integer(x) => out.push(*x as f64),
                _ => {
                    self.errors.push(format!("`{context}` must contain only numbers"));
                    return None;
                }
            }
        }
        Some(out)
    }

    /// An explicit list or a `{ start, stop, points }` range, evenly spaced
    /// in value or, with `log`, in its logarithm.
    fn range(&mut self, v: &Value, context: &str, log: bool) -> Option<Vec<f64>> {
        match v {
            Value::Array(_) => self.float_list(v, context),
            Value::Table(t) => {
                let ctx = format!("{context}.");
                self.unknown(t, &["start", "stop", "points"], &ctx);
                let start = self.float(t, "start", &ctx);
                let stop = self.float(t, "stop", &ctx);
                let points = self.positive_int(t, "points", &ctx);
                let (Some(start), Some(stop), Some(points)) = (start, stop, points) else {
                    self.errors
                        .push(format!("`{context}` needs numeric start, stop and points"));
                    return None;
                };
                if log && !(start > 0.0 && stop > 0.0) {
                    self.errors
                        .push(format!("`{context}` log range needs positive end points"));
                    return None;
                }
                Some(if log {
                    logspace(start, stop, points)
                } else {
                    linspace(start, stop, points)
                })
            }
            _ => {
                self.errors
                    .push(format!("`{context}` must be an array or a range table"));
                None
            }
        }
    }
}

fn read_params(r: &mut Reader, t: &Table) -> TeleporterParams {
    let mut p = TeleporterParams::default();
    let fields: [(&str, &mut f64); 6] = [
        ("gamma_i", &mut p.gamma_i),
        ("gamma_s", &mut p.gamma_s),
        ("gamma_A", &mut p.gamma_a),
        ("gamma_B", &mut p.gamma_b),
        ("eta", &mut p.eta),
        ("omega_rabi", &mut p.omega_rabi),
    ];
    for (key, slot) in fields {
        if let Some(v) = r.float(t, key, "") {
            *slot = v;
        }
    }
    let lambda = r.float(t, "lambda", "");
    let db = r.float(t, "squeezing_db", "");
    match (lambda, db) {
        (_, Some(db)) => match lambda_from_db(db) {
            Ok(l) => {
                if let Some(given) = lambda {
                    let consistent = db_from_lambda(given)
                        .map(|d| (d - db).abs() <= SQUEEZING_CONSISTENCY)
                        .unwrap_or(false)
                        || (given - l).abs() <= SQUEEZING_CONSISTENCY;
                    if !consistent {
                        r.errors.push(format!(
                            "`lambda` = {given} and `squeezing_db` = {db} (lambda {l}) disagree"
                        ));
                    }
                }
                p.lambda = l;
            }
            Err(e) => r.errors.push(format!("`squeezing_db`: {e}")),
        },
        (Some(l), None) => p.lambda = l,
        (None, None) => {}
    }
    for e in p.violations() {
        r.errors.push(e.to_string());
    }
    p
}

fn read_sweep(r: &mut Reader, t: &Table) -> Vec<SweepAxis> {
    let Some(v) = t.get("sweep") else {
        return Vec::new();
    };
    let Value::Array(entries) = v else {
        r.errors
            .push("`sweep` must be an array of tables ([[sweep]])".into());
        return Vec::new();
    };
    let mut axes = Vec::new();
    for (i, e) in entries.iter().enumerate() {
        let ctx = format!("sweep[{i}].");
        let Value::Table(e) = e else {
            r.errors.push(format!("`sweep[{i}]` must be a table"));
            continue;
        };
        r.unknown(e, &["name", "values", "log", "linear"], &ctx);
        let name = match r.string(e, "name", &ctx) {
            Some(s) => match SweptName::parse(s) {
                Some(n) => Some(n),
                None => {
                    let known: Vec<&str> = SweptName::ALL.iter().map(|n| n.key()).collect();
                    r.errors.push(format!(
                        "`{ctx}name` = \"{s}\" is not a sweepable parameter (known: {})",
                        known.join(", ")
                    ));
                    None
                }
            },
            None => {
                r.errors.push(format!("`{ctx}name` is required"));
                None
            }
        };
        let sources: Vec<&str> = ["values", "log", "linear"]
            .into_iter()
            .filter(|k| e.contains_key(*k))
            .collect();
        let values = match sources.as_slice() {
            ["values"] => r.float_list(&e["values"], &format!("{ctx}values")),
            ["log"] => r.range(&e["log"], &format!("{ctx}log"), true),
            ["linear"] => r.range(&e["linear"], &format!("{ctx}linear"), false),
            _ => {
                r.errors
                    .push(format!("`sweep[{i}]` needs exactly one of values, log, linear"));
                None
            }
        };
        if let Some(vs) = &values {
            if vs.is_empty() {
                r.errors.push(format!("`sweep[{i}]` has no values"));
            }
        }
        if let (Some(name), Some(values)) = (name, values) {
            axes.push(SweepAxis { name, values });
        }
    }
    axes
}

fn grid_or(r: &mut Reader, g: Option<&Table>, key: &str, default: (f64, f64, usize)) -> Vec<f64> {
    g.and_then(|g| g.get(key))
        .and_then(|v| r.range(v, &format!("grid.{key}"), false))
        .unwrap_or_else(|| linspace(default.0, default.1, default.2))
}

fn read_mc(r: &mut Reader, t: Option<&Table>) -> (McConfig, Vec<CompareQuantity>) {
    let mut mc = McConfig::default();
    let mut compare = vec![
        CompareQuantity::BackgroundFlux,
        CompareQuantity::OpoSqueezing,
        CompareQuantity::As,
    ];
    let Some(t) = t else {
        return (mc, compare);
    };
    let c = "mc.";
    r.unknown(t, &MC_KEYS, c);
    if let Some(v) = r.float(t, "duration", c) {
        mc.duration = v;
    }
    mc.warmup = r.float(t, "warmup", c);
    mc.dt = r.float(t, "dt", c);
    if let Some(n) = r.positive_int(t, "n_traj", c) {
        mc.n_traj = n;
    }
    match t.get("seed") {
        Some(Value::Integer(s)) if *s >= 0 => mc.seed = *s as u64,
        Some(other) => r.errors.push(format!("`mc.seed` must be a nonnegative integer, got {other}")),
        None => {}
    }
    match r.string(t, "alice", c) {
        Some("lowpass") | None => {}
        Some("broadband") => mc.alice = AliceResponse::Broadband,
        Some(s) => r.errors.push(format!("`mc.alice` = \"{s}\": expected lowpass or broadband")),
    }
    match r.string(t, "routing", c) {
        Some("teleporter") | None => {}
        Some("bypass") => mc.routing = Routing::Bypass,
        Some(s) => r.errors.push(format!("`mc.routing` = \"{s}\": expected teleporter or bypass")),
    }
    let amplitude = t.get("input_amplitude").and_then(|v| match v {
        Value::Float(x) => Some(C64::new(*x, 0.0)),
        Value::Integer(x) => Some(C64::new(*x as f64, 0.0)),
        v => match r.float_list(v, "mc.input_amplitude").as_deref() {
            Some([re, im]) => Some(C64::new(*re, *im)),
            Some(_) => {
                r.errors.push("`mc.input_amplitude` must be a number or [re, im]".into());
                None
            }
            None => None,
        },
    });
    let flux = r.float(t, "input_flux", c);
    match r.string(t, "input", c) {
        Some("vacuum") | None => {}
        Some("coherent") => match amplitude {
            Some(a) => mc.input = InputSource::Coherent { amplitude: a },
            None => r.errors.push("`mc.input` = \"coherent\" needs `mc.input_amplitude`".into()),
        },
        Some("chaotic") => match flux {
            Some(f) if f >= 0.0 => mc.input = InputSource::Chaotic { flux: f },
            Some(f) => r.errors.push(format!("`mc.input_flux` = {f} must be nonnegative")),
            None => r.errors.push("`mc.input` = \"chaotic\" needs `mc.input_flux`".into()),
        },
        Some(s) => r.errors.push(format!(
            "`mc.input` = \"{s}\": expected vacuum, coherent or chaotic"
        )),
    }
    let sample_dt = r.float(t, "welch_sample_dt", c);
    let segment = r.positive_int(t, "welch_segment", c);
    match (sample_dt, segment) {
        (Some(sample_dt), Some(segment)) => mc.welch = Some(WelchConfig { sample_dt, segment }),
        (None, None) => {}
        _ => r.errors.push("`mc.welch_sample_dt` and `mc.welch_segment` go together".into()),
    }
    let lag_dt = r.float(t, "lag_dt", c);
    let n_lags = r.positive_int(t, "n_lags", c);
    match (lag_dt, n_lags) {
        (Some(lag_dt), Some(n_lags)) => mc.lags = Some(LagConfig { lag_dt, n_lags }),
        (None, None) => {}
        _ => r.errors.push("`mc.lag_dt` and `mc.n_lags` go together".into()),
    }
    if let Some(b) = r.float(t, "budget_seconds", c) {
        if b > 0.0 && b.is_finite() {
            mc.budget = Some(Duration::from_secs_f64(b));
        } else {
            r.errors.push(format!("`mc.budget_seconds` = {b} must be positive"));
        }
    }
    for (key, v) in [("duration", Some(mc.duration)), ("warmup", mc.warmup), ("dt", mc.dt)] {
        if let Some(v) = v {
            if !(v > 0.0 && v.is_finite()) {
                r.errors.push(format!("`mc.{key}` = {v} must be positive"));
            }
        }
    }
    if let Some(v) = t.get("compare") {
        match v {
            Value::Array(items) => {
                compare.clear();
                for item in items {
                    match item.as_str().and_then(CompareQuantity::parse) {
                        Some(q) => compare.push(q),
                        None => r.errors.push(format!(
                            "`mc.compare` entry {item} is not one of background_flux, opo_squeezing, a_s, g2"
                        )),
                    }
                }
            }
            _ => r.errors.push("`mc.compare` must be an array of strings".into()),
        }
    }
    (mc, compare)
}

/// Parses and validates a configuration, collecting every error.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let table: Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::Config(vec![e.to_string()]))?;
    let mut r = Reader { errors: Vec::new() };
    r.unknown(&table, &TOP_KEYS, "");
    let params = read_params(&mut r, &table);
    let axes = read_sweep(&mut r, &table);

    let grid = r.table(&table, "grid");
    if let Some(g) = grid {
        r.unknown(g, &["tau", "omega", "rabi"], "grid.");
    }
    let tau = grid_or(&mut r, grid, "tau", DEFAULT_TAU);
    if !tau.is_empty() && crate::series::check_delay_grid(&tau).is_err() {
        r.errors
            .push("`grid.tau` must start at 0 and increase strictly".into());
    }
    let omega = grid_or(&mut r, grid, "omega", DEFAULT_OMEGA);
    let rabi = grid
        .and_then(|g| g.get("rabi"))
        .and_then(|v| r.range(v, "grid.rabi", false))
        .unwrap_or_default();
    if rabi.iter().any(|v| !(*v >= 0.0)) {
        r.errors.push("`grid.rabi` values must be nonnegative".into());
    }

    let target_g2 = r.table(&table, "design").and_then(|d| {
        r.unknown(d, &["target_g2"], "design.");
        let t = r.float(d, "target_g2", "design.");
        if let Some(t) = t {
            if !(t > 0.0 && t < 2.0) {
                r.errors
                    .push(format!("`design.target_g2` = {t} must lie strictly inside (0, 2)"));
            }
        }
        t
    });

    let quantity = r
        .table(&table, "output")
        .and_then(|o| {
            r.unknown(o, &["quantity"], "output.");
            let s = r.string(o, "quantity", "output.")?;
            let q = Quantity::parse(s);
            if q.is_none() {
                r.errors.push(format!(
                    "`output.quantity` = \"{s}\": expected spectrum, g2, g2zero, design or mc"
                ));
            }
            q
        })
        .unwrap_or(Quantity::G2);

    let mc_table = r.table(&table, "mc");
    let (mc, compare) = read_mc(&mut r, mc_table);

    let sweep = SweepSpec {
        base: params,
        axes,
        quantity,
        tau,
        omega,
        rabi,
        target_g2,
    };
    if r.errors.is_empty() {
        if let Err(Error::Config(errs)) = sweep.points() {
            r.errors.extend(errs);
        }
    }
    if !r.errors.is_empty() {
        return Err(Error::Config(r.errors));
    }
    Ok(RunConfig {
        params,
        sweep,
        mc,
        compare,
    })
}
