//! Subcommands behind the `cvteleport` binary and their CSV artifacts.
//!
//! Every CSV starts with `#`-prefixed metadata lines (code version, command,
//! seed, units, full parameters as `# param <key> = <value>`, sweep point,
//! regime check) followed by a column line and data rows. Numbers use the
//! shortest representation that round-trips. Each run also writes
//! `manifest.csv` listing the files it produced.
//!
//! | command    | files                                          | columns |
//! |------------|------------------------------------------------|---------|
//! | `spectrum` | `spectrum_PPP_RRR.csv` per point and Rabi value | `omega,s_out` |
//! | `g2`       | `g2_PPP.csv` per point                         | `tau,g2` |
//! | `design`   | `design.csv`                                   | one row per point |
//! | `simulate` | `mc_scalars_PPP.csv`, `mc_psd_PPP.csv`, `mc_lags_PPP.csv` | estimator means with `se` |
//! | `compare`  | `compare.csv`                                  | `point,quantity,label,mc,se,analytic,z` |
//!
//! `sweep` dispatches on `output.quantity`; `g2zero` writes `g2zero.csv`.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::analytic::{self, FluxMode};
use crate::config::{CompareQuantity, Quantity, RunConfig, SweepPoint, SweptName};
use crate::error::{Error, Result};
use crate::mc::{self, AliceResponse, EstimatorSet, InputSource, McConfig, Moments, Routing, Tap};
use crate::params::{db_from_lambda, validate_regime_with, TeleporterParams, DEFAULT_REGIME_RATIO};
use crate::series::Spectrum;
use crate::transfer;

/// Compare rows with `|z|` above this fail the run.
pub const Z_LIMIT: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Spectrum,
    G2,
    Design,
    Simulate,
    Sweep,
    Compare,
}

impl Command {
    pub fn label(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::G2 => "g2",
            Command::Design => "design",
            Command::Simulate => "simulate",
            Command::Sweep => "sweep",
            Command::Compare => "compare",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub out: PathBuf,
    /// Overrides `mc.seed`.
    pub seed: Option<u64>,
    /// Worker count; `None` uses rayon's default.
    pub threads: Option<usize>,
}

/// One row of `compare.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub point: usize,
    pub quantity: &'static str,
    pub label: String,
    pub mc: f64,
    pub se: f64,
    pub analytic: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Outcome {
    /// Files written, manifest last.
    pub files: Vec<PathBuf>,
    pub compare: Vec<CompareRow>,
    /// Some compare row exceeded [`Z_LIMIT`].
    pub z_failed: bool,
}

/// Runs `cmd` on a worker pool of `opts.threads` workers.
pub fn run(cmd: Command, cfg: &RunConfig, opts: &RunOptions) -> Result<Outcome> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = opts.threads {
        if n == 0 {
            return Err(Error::Config(vec!["--threads must be at least 1".into()]));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(vec![format!("cannot start worker pool: {e}")]))?;
    pool.install(|| run_in_pool(cmd, cfg, opts))
}

fn run_in_pool(cmd: Command, cfg: &RunConfig, opts: &RunOptions) -> Result<Outcome> {
    let quantity = match cmd {
        Command::Spectrum => Quantity::Spectrum,
        Command::G2 => Quantity::G2,
        Command::Design => Quantity::Design,
        Command::Simulate => Quantity::Mc,
        Command::Compare => return compare(cfg, opts),
        Command::Sweep => cfg.sweep.quantity,
    };
    let mut mc_cfg = cfg.mc.clone();
    if let Some(s) = opts.seed {
        mc_cfg.seed = s;
    }
    let ctx = Context::new(cmd, cfg, &mc_cfg, opts)?;
    let points = cfg.sweep.points()?;
    let entries: Vec<Vec<Entry>> = match quantity {
        Quantity::Spectrum => par_points(&points, |p| spectrum_files(&ctx, p))?,
        Quantity::G2 => par_points(&points, |p| g2_file(&ctx, p))?,
        Quantity::Mc => par_points(&points, |p| mc_files(&ctx, p))?,
        Quantity::Design => vec![design_file(&ctx, &points)?],
        Quantity::G2Zero => vec![g2zero_file(&ctx, &points)?],
    };
    let entries: Vec<Entry> = entries.into_iter().flatten().collect();
    let mut files: Vec<PathBuf> = entries.iter().map(|e| e.path.clone()).collect();
    files.push(ctx.write_manifest(&entries, quantity.label())?);
    Ok(Outcome {
        files,
        ..Default::default()
    })
}

/// Evaluates points in parallel; results keep point order.
fn par_points<F>(points: &[SweepPoint], f: F) -> Result<Vec<Vec<Entry>>>
where
    F: Fn(&SweepPoint) -> Result<Vec<Entry>> + Sync + Send,
{
    points.par_iter().map(f).collect()
}

/// A file recorded in the manifest.
#[derive(Debug, Clone)]
struct Entry {
    path: PathBuf,
    point: Option<usize>,
    coords: Vec<(SweptName, f64)>,
    omega_rabi: Option<f64>,
}

struct Context<'a> {
    cmd: Command,
    cfg: &'a RunConfig,
    mc: &'a McConfig,
    out: &'a Path,
}

impl<'a> Context<'a> {
    fn new(cmd: Command, cfg: &'a RunConfig, mc: &'a McConfig, opts: &'a RunOptions) -> Result<Self> {
        fs::create_dir_all(&opts.out).map_err(|e| Error::io(&opts.out, e))?;
        Ok(Self {
            cmd,
            cfg,
            mc,
            out: &opts.out,
        })
    }

    fn header(&self, params: Option<&TeleporterParams>, point: Option<&SweepPoint>) -> String {
        let mut h = String::new();
        let _ = writeln!(h, "# cvteleport {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(h, "# command: {}", self.cmd.label());
        let _ = writeln!(h, "# seed: {}", self.mc.seed);
        let _ = writeln!(h, "# units: rates, omega and omega_rabi in gamma_i; tau in 1/gamma_i; s_out per unit omega");
        if let Some(p) = params {
            h.push_str(&param_lines(p));
            let r = validate_regime_with(p, DEFAULT_REGIME_RATIO, self.cfg.sweep.target_g2);
            let _ = writeln!(h, "# regime: simplified_formulas_valid = {}", r.simplified_formulas_valid);
        }
        if let Some(pt) = point {
            let _ = writeln!(h, "# point: {}{}", pt.index, coord_text(&pt.coords));
        }
        let mc_run = match self.cmd {
            Command::Simulate | Command::Compare => true,
            Command::Sweep => self.cfg.sweep.quantity == Quantity::Mc,
            _ => false,
        };
        if mc_run {
            h.push_str(&mc_lines(self.mc));
        }
        h
    }

    fn write_manifest(&self, entries: &[Entry], quantity: &str) -> Result<PathBuf> {
        let mut text = self.header(None, None);
        let _ = writeln!(text, "# quantity: {quantity}");
        let names: Vec<&str> = self.cfg.sweep.axes.iter().map(|a| a.name.key()).collect();
        let mut cols = vec!["file", "point", "omega_rabi"];
        cols.extend(&names);
        let _ = writeln!(text, "{}", cols.join(","));
        for e in entries {
            let name = e.path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            let mut row = vec![
                name,
                e.point.map(|p| p.to_string()).unwrap_or_default(),
                e.omega_rabi.map(num).unwrap_or_default(),
            ];
            row.extend(e.coords.iter().map(|c| num(c.1)));
            let _ = writeln!(text, "{}", row.join(","));
        }
        let path = self.out.join("manifest.csv");
        write_atomic(&path, &text)?;
        Ok(path)
    }
}

/// `{:e}` gives the shortest round-tripping form.
fn num(v: f64) -> String {
    format!("{v:e}")
}

fn param_lines(p: &TeleporterParams) -> String {
    let mut s = String::new();
    for (k, v) in [
        ("gamma_i", p.gamma_i),
        ("gamma_s", p.gamma_s),
        ("gamma_A", p.gamma_a),
        ("gamma_B", p.gamma_b),
        ("lambda", p.lambda),
        ("eta", p.eta),
        ("omega_rabi", p.omega_rabi),
    ] {
        let _ = writeln!(s, "# param {k} = {}", num(v));
    }
    if let Ok(db) = db_from_lambda(p.lambda) {
        let _ = writeln!(s, "# derived squeezing_db = {}", num(db));
    }
    let _ = writeln!(s, "# derived gamma_B_over_gamma_s = {}", num(p.filter_ratio()));
    s
}

fn mc_lines(m: &McConfig) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# mc duration = {}", num(m.duration));
    if let Some(w) = m.warmup {
        let _ = writeln!(s, "# mc warmup = {}", num(w));
    }
    if let Some(dt) = m.dt {
        let _ = writeln!(s, "# mc dt = {}", num(dt));
    }
    let _ = writeln!(s, "# mc n_traj = {}", m.n_traj);
    let alice = match m.alice {
        AliceResponse::Lowpass => "lowpass",
        AliceResponse::Broadband => "broadband",
    };
    let routing = match m.routing {
        Routing::Teleporter => "teleporter",
        Routing::Bypass => "bypass",
    };
    let _ = writeln!(s, "# mc alice = \"{alice}\"");
    let _ = writeln!(s, "# mc routing = \"{routing}\"");
    match m.input {
        InputSource::Vacuum => {
            let _ = writeln!(s, "# mc input = \"vacuum\"");
        }
        InputSource::Coherent { amplitude } => {
            let _ = writeln!(s, "# mc input = \"coherent\"");
            let _ = writeln!(s, "# mc input_amplitude = [{}, {}]", num(amplitude.re), num(amplitude.im));
        }
        InputSource::Chaotic { flux } => {
            let _ = writeln!(s, "# mc input = \"chaotic\"");
            let _ = writeln!(s, "# mc input_flux = {}", num(flux));
        }
    }
    if let Some(w) = m.welch {
        let _ = writeln!(s, "# mc welch_sample_dt = {}", num(w.sample_dt));
        let _ = writeln!(s, "# mc welch_segment = {}", w.segment);
    }
    if let Some(l) = m.lags {
        let _ = writeln!(s, "# mc lag_dt = {}", num(l.lag_dt));
        let _ = writeln!(s, "# mc n_lags = {}", l.n_lags);
    }
    s
}

fn coord_text(coords: &[(SweptName, f64)]) -> String {
    coords
        .iter()
        .map(|(n, v)| format!(" {}={}", n.key(), num(*v)))
        .collect()
}

/// Writes through a temporary sibling and renames it into place.
fn write_atomic(path: &Path, text: &str) -> Result<()> {
    let tmp = path.with_extension("csv.tmp");
    let write = || -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(text.as_bytes())?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    };
    write().map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

fn entry(path: PathBuf, pt: &SweepPoint, omega_rabi: Option<f64>) -> Entry {
    Entry {
        path,
        point: Some(pt.index),
        coords: pt.coords.clone(),
        omega_rabi,
    }
}

fn spectrum_files(ctx: &Context, pt: &SweepPoint) -> Result<Vec<Entry>> {
    let rabi = if ctx.cfg.sweep.rabi.is_empty() {
        vec![pt.params.omega_rabi]
    } else {
        ctx.cfg.sweep.rabi.clone()
    };
    let mut out = Vec::with_capacity(rabi.len());
    for (r, &omega_rabi) in rabi.iter().enumerate() {
        let p = TeleporterParams { omega_rabi, ..pt.params };
        let s: Spectrum = analytic::output_spectrum(&p, &ctx.cfg.sweep.omega)?;
        let mut text = ctx.header(Some(&p), Some(pt));
        let _ = writeln!(text, "# integral = {}", num(s.integral));
        text.push_str("omega,s_out\n");
        for (w, d) in s.omega.iter().zip(&s.density) {
            let _ = writeln!(text, "{},{}", num(*w), num(*d));
        }
        let path = ctx.out.join(format!("spectrum_{:03}_{:03}.csv", pt.index, r));
        write_atomic(&path, &text)?;
        out.push(entry(path, pt, Some(omega_rabi)));
    }
    Ok(out)
}

fn g2_file(ctx: &Context, pt: &SweepPoint) -> Result<Vec<Entry>> {
    let g = analytic::g2_out(&pt.params, &ctx.cfg.sweep.tau)?;
    let mut text = ctx.header(Some(&pt.params), Some(pt));
    text.push_str("tau,g2\n");
    for (t, v) in g.tau.iter().zip(&g.values) {
        let _ = writeln!(text, "{},{}", num(*t), num(*v));
    }
    let path = ctx.out.join(format!("g2_{:03}.csv", pt.index));
    write_atomic(&path, &text)?;
    Ok(vec![entry(path, pt, Some(pt.params.omega_rabi))])
}

fn axis_columns(ctx: &Context) -> String {
    ctx.cfg
        .sweep
        .axes
        .iter()
        .map(|a| format!(",{}", a.name.key()))
        .collect()
}

fn coord_values(pt: &SweepPoint) -> String {
    pt.coords.iter().map(|c| format!(",{}", num(c.1))).collect()
}

fn design_file(ctx: &Context, points: &[SweepPoint]) -> Result<Vec<Entry>> {
    let target = ctx.cfg.sweep.target_g2.ok_or_else(|| {
        Error::Config(vec!["`design` needs `design.target_g2`".into()])
    })?;
    let rows: Vec<String> = points
        .par_iter()
        .map(|pt| {
            let d = analytic::design(&pt.params, target)?;
            let at_ratio = analytic::required_squeezing_db_at_filter_ratio(target, &pt.params)
                .map(num)
                .unwrap_or_else(|_| "nan".into());
            Ok(format!(
                "{}{},{},{},{},{},{},{}",
                pt.index,
                coord_values(pt),
                num(target),
                num(d.required_db),
                num(d.max_filter_ratio),
                num(pt.params.filter_ratio()),
                d.feasible,
                at_ratio
            ))
        })
        .collect::<Result<_>>()?;
    let mut text = ctx.header(Some(&ctx.cfg.params), None);
    let _ = writeln!(
        text,
        "point{},target_g2,required_db,max_filter_ratio,filter_ratio,feasible,required_db_at_filter_ratio",
        axis_columns(ctx)
    );
    for r in rows {
        let _ = writeln!(text, "{r}");
    }
    let path = ctx.out.join("design.csv");
    write_atomic(&path, &text)?;
    Ok(vec![Entry {
        path,
        point: None,
        coords: Vec::new(),
        omega_rabi: None,
    }])
}

fn g2zero_file(ctx: &Context, points: &[SweepPoint]) -> Result<Vec<Entry>> {
    let rows: Vec<String> = points
        .par_iter()
        .map(|pt| {
            let exact = analytic::flux_ratio(&pt.params, FluxMode::Exact)?;
            let limit = analytic::flux_ratio(&pt.params, FluxMode::Limit)?;
            Ok(format!(
                "{}{},{},{},{},{}",
                pt.index,
                coord_values(pt),
                num(exact.ratio),
                num(limit.ratio),
                num(analytic::g2_zero_from_ratio(exact.ratio)),
                num(analytic::g2_zero_from_ratio(limit.ratio))
            ))
        })
        .collect::<Result<_>>()?;
    let mut text = ctx.header(Some(&ctx.cfg.params), None);
    let _ = writeln!(
        text,
        "point{},ratio_exact,ratio_limit,g2zero_exact,g2zero_limit",
        axis_columns(ctx)
    );
    for r in rows {
        let _ = writeln!(text, "{r}");
    }
    let path = ctx.out.join("g2zero.csv");
    write_atomic(&path, &text)?;
    Ok(vec![Entry {
        path,
        point: None,
        coords: Vec::new(),
        omega_rabi: None,
    }])
}

fn moments_cols(m: &Moments) -> String {
    format!("{},{}", num(m.mean()), num(m.se()))
}

fn mc_files(ctx: &Context, pt: &SweepPoint) -> Result<Vec<Entry>> {
    let set = mc::run_ensemble(&pt.params, ctx.mc)?;
    let mut out = Vec::new();
    let header = ctx.header(Some(&pt.params), Some(pt));

    let mut text = header.clone();
    text.push_str("quantity,mean,se,n_traj\n");
    let n = set.n_traj();
    for (name, m) in [
        ("occupation", &set.occupation),
        ("flux", &set.flux),
        ("squeezed_zero", &set.squeezed_zero),
        ("antisqueezed_zero", &set.antisqueezed_zero),
    ] {
        if m.n > 0 {
            let _ = writeln!(text, "{name},{},{n}", moments_cols(m));
        }
    }
    let path = ctx.out.join(format!("mc_scalars_{:03}.csv", pt.index));
    write_atomic(&path, &text)?;
    out.push(entry(path, pt, Some(pt.params.omega_rabi)));

    if !set.omega.is_empty() {
        let mut text = header.clone();
        let _ = writeln!(text, "# quadrature columns in vacuum units; output per unit domega/2pi (symmetric)");
        let mut cols = vec!["omega".to_string()];
        for t in Tap::ALL {
            cols.push(t.label().to_string());
            cols.push(format!("{}_se", t.label()));
        }
        let _ = writeln!(text, "{}", cols.join(","));
        for (k, w) in set.omega.iter().enumerate() {
            let mut row = num(*w);
            for tap in &set.psd {
                let _ = write!(row, ",{}", moments_cols(&tap[k]));
            }
            let _ = writeln!(text, "{row}");
        }
        let path = ctx.out.join(format!("mc_psd_{:03}.csv", pt.index));
        write_atomic(&path, &text)?;
        out.push(entry(path, pt, Some(pt.params.omega_rabi)));
    }

    if !set.tau.is_empty() {
        let mut text = header;
        text.push_str("tau,sym_cov,sym_cov_se,background_corr,background_corr_se,normalized_corr,normalized_corr_se\n");
        for (k, t) in set.tau.iter().enumerate() {
            let _ = writeln!(
                text,
                "{},{},{},{}",
                num(*t),
                moments_cols(&set.lag_sym[k]),
                moments_cols(&set.background_corr[k]),
                moments_cols(&set.normalized_corr[k])
            );
        }
        let path = ctx.out.join(format!("mc_lags_{:03}.csv", pt.index));
        write_atomic(&path, &text)?;
        out.push(entry(path, pt, Some(pt.params.omega_rabi)));
    }
    Ok(out)
}

/// Why the photon correlation of the atomic input cannot be compared.
pub const WIGNER_REFUSAL: &str = "the two-level input has no positive Wigner function, so the classical \
     (Wigner) representation used by the Monte Carlo must be dropped; only Gaussian-sector quantities can be compared";

fn z_score(mc: f64, se: f64, analytic: f64) -> f64 {
    let d = mc - analytic;
    if se > 0.0 {
        d / se
    } else if d.abs() <= 1e-12 * analytic.abs().max(1.0) {
        0.0
    } else {
        f64::INFINITY.copysign(d)
    }
}

fn compare_checks(cfg: &RunConfig) -> Result<()> {
    let mut errors = Vec::new();
    if cfg.compare.contains(&CompareQuantity::G2) {
        return Err(Error::NonGaussianQuantity {
            quantity: "g2".into(),
            reason: WIGNER_REFUSAL,
        });
    }
    if cfg.mc.input != InputSource::Vacuum {
        errors.push("compare needs `mc.input = \"vacuum\"`".into());
    }
    if cfg.mc.routing != Routing::Teleporter {
        errors.push("compare needs `mc.routing = \"teleporter\"`".into());
    }
    if cfg.compare.contains(&CompareQuantity::OpoSqueezing) && cfg.mc.welch.is_none() {
        errors.push("`opo_squeezing` needs `mc.welch_sample_dt` and `mc.welch_segment`".into());
    }
    if cfg.compare.contains(&CompareQuantity::As) && cfg.mc.lags.is_none() {
        errors.push("`a_s` needs `mc.lag_dt` and `mc.n_lags`".into());
    }
    if errors.is_empty() {
        Ok(())
    } else {
        Err(Error::Config(errors))
    }
}

/// Monte Carlo and closed forms side by side for one point.
pub fn compare_point(
    params: &TeleporterParams,
    cfg: &McConfig,
    quantities: &[CompareQuantity],
    point: usize,
) -> Result<Vec<CompareRow>> {
    let set: EstimatorSet = mc::run_ensemble(params, cfg)?;
    let broadband = cfg.alice == AliceResponse::Broadband;
    let mut rows = Vec::new();
    let mut push = |quantity, label: String, m: &Moments, analytic: f64| {
        rows.push(CompareRow {
            point,
            quantity,
            label,
            mc: m.mean(),
            se: m.se(),
            analytic,
            z: z_score(m.mean(), m.se(), analytic),
        });
    };
    let flux = if broadband {
        analytic::background_flux(params)
    } else {
        transfer::background_flux_general(params, false)
    };
    for q in quantities {
        match q {
            CompareQuantity::BackgroundFlux => {
                push(q.label(), "f_s".into(), &set.flux, flux);
            }
            CompareQuantity::OpoSqueezing => {
                let r = (1.0 - params.lambda) / (1.0 + params.lambda);
                push(q.label(), "squeezed".into(), &set.squeezed_zero, r * r);
                push(q.label(), "antisqueezed".into(), &set.antisqueezed_zero, 1.0 / (r * r));
            }
            CompareQuantity::As => {
                let corr = |tau: f64| {
                    if broadband {
                        flux * analytic::a_s(tau, params)
                    } else {
                        transfer::background_correlation_general(params, tau, false)
                    }
                };
                let g0 = corr(0.0);
                for (k, &tau) in set.tau.iter().enumerate() {
                    let g = corr(tau);
                    push(q.label(), format!("G tau={tau:.6}"), &set.background_corr[k], g);
                    push(q.label(), format!("G/G0 tau={tau:.6}"), &set.normalized_corr[k], g / g0);
                }
            }
            CompareQuantity::G2 => unreachable!("refused before running"),
        }
    }
    Ok(rows)
}

fn compare(cfg: &RunConfig, opts: &RunOptions) -> Result<Outcome> {
    compare_checks(cfg)?;
    let mut mc_cfg = cfg.mc.clone();
    if let Some(s) = opts.seed {
        mc_cfg.seed = s;
    }
    let ctx = Context::new(Command::Compare, cfg, &mc_cfg, opts)?;
    let points = cfg.sweep.points()?;
    let rows: Vec<Vec<CompareRow>> = points
        .par_iter()
        .map(|pt| compare_point(&pt.params, &mc_cfg, &cfg.compare, pt.index))
        .collect::<Result<_>>()?;
    let rows: Vec<CompareRow> = rows.into_iter().flatten().collect();
    let mut text = ctx.header(Some(&cfg.params), None);
    let _ = writeln!(text, "# z_limit = {}", num(Z_LIMIT));
    text.push_str("point,quantity,label,mc,se,analytic,z\n");
    for r in &rows {
        let _ = writeln!(
            text,
            "{},{},{},{},{},{},{}",
            r.point,
            r.quantity,
            r.label,
            num(r.mc),
            num(r.se),
            num(r.analytic),
            num(r.z)
        );
    }
    let path = ctx.out.join("compare.csv");
    write_atomic(&path, &text)?;
    let entries = [Entry {
        path: path.clone(),
        point: None,
        coords: Vec::new(),
        omega_rabi: None,
    }];
    let manifest = ctx.write_manifest(&entries, "compare")?;
    let z_failed = rows.iter().any(|r| !(r.z.abs() <= Z_LIMIT));
    Ok(Outcome {
        files: vec![path, manifest],
        compare: rows,
        z_failed,
    })
}
