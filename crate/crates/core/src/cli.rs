//! Command-line front end.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::geometry::{kappa_sigma, ConeConfig, ConePoint};
use crate::kernels::{
    halfwave_kernel_truncated, heat_kernel_closed, heat_kernel_series, schrodinger_kernel_closed, schrodinger_kernel_series,
    spectral_kernel, HalfwaveWindow, KernelValue,
};
use crate::lpbesov::{besov_norm, dyadic_phi, make_cutoff, sobolev_norm};
use crate::spectrum::{mode_table, project_k, sample_points, spectral_apply, SpectralField, Window};
use crate::verify::{self, HalfwaveGrid, SweepReport};

#[derive(Parser, Debug)]
#[command(name = "magcone", version, about = "Propagator kernels and dispersive estimates on magnetic cones")]
struct Cli {
    /// Run configuration file (key = value lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Print machine-readable JSON instead of CSV/text.
    #[arg(long, global = true)]
    json: bool,
    /// Output directory; overrides `out` in the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Random seed; overrides `seed` in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Cone to use: an index into the config's cones, or "sigma,alpha,B0".
    #[arg(long, global = true, default_value = "0")]
    cone: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a propagator kernel at one pair of points.
    Kernel(KernelArgs),
    /// Mode tables, sample nodes, expansion and spectral evolution.
    Spectrum {
        #[command(subcommand)]
        action: SpectrumAction,
    },
    /// Run verification sweeps.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KernelKind {
    Heat,
    Schrodinger,
    Halfwave,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Repr {
    Series,
    Closed,
    Spectral,
    Both,
}

#[derive(Args, Debug)]
struct KernelArgs {
    kind: KernelKind,
    #[arg(long, value_enum, default_value = "series")]
    repr: Repr,
    #[arg(long, allow_negative_numbers = true)]
    t: f64,
    /// First point as "r,theta".
    #[arg(long, value_parser = parse_point, allow_negative_numbers = true)]
    p: (f64, f64),
    /// Second point as "r,theta".
    #[arg(long, value_parser = parse_point, allow_negative_numbers = true)]
    q: (f64, f64),
    /// Dyadic shell of the half-wave propagator.
    #[arg(long, default_value_t = 2)]
    j: i32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Multiplier {
    Heat,
    Schrodinger,
    Halfwave,
    Fractional,
}

#[derive(Subcommand, Debug)]
enum SpectrumAction {
    /// List (k, m, λ, ‖V‖²) over the window.
    Table,
    /// Write the sample nodes (k, r, theta) that `expand` expects values at.
    Nodes,
    /// Read sampled values (k, r, theta, re, im) and write the coefficient field.
    Expand {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "expanded")]
        name: String,
    },
    /// Apply a spectral multiplier to a stored field.
    Evolve {
        /// Field path without extension (reads PATH.csv and PATH.json).
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        mult: Multiplier,
        #[arg(long, allow_negative_numbers = true)]
        t: f64,
        /// Dyadic shell for the half-wave multiplier; omit for the untruncated flow.
        #[arg(long)]
        j: Option<i32>,
        /// Exponent of the fractional multiplier e^{itλ^ν}.
        #[arg(long)]
        nu: Option<f64>,
        #[arg(long, default_value = "evolved")]
        name: String,
    },
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// dispersive, weighted, gaussian, halfwave, reduced, a_l1, energy, subordination,
    /// bessel, spectral, semigroup, littlewood_paley or all.
    suite: String,
    /// Weight exponent; with `dispersive` this runs the weighted sweep at this γ only.
    #[arg(long)]
    gamma: Option<f64>,
    /// Dyadic shells for the half-wave sweep; overrides `halfwave_j`.
    #[arg(long, value_delimiter = ',')]
    j: Option<Vec<i32>>,
    /// Grid preset; overrides `grid`.
    #[arg(long)]
    grid: Option<String>,
}

fn parse_point(s: &str) -> std::result::Result<(f64, f64), String> {
    let v: Vec<&str> = s.split(',').collect();
    if v.len() != 2 {
        return Err(format!("expected r,theta but got '{s}'"));
    }
    let r = v[0].trim().parse::<f64>().map_err(|e| e.to_string())?;
    let th = v[1].trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok((r, th))
}

/// Exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::SingularTime { .. } => 3,
        Error::Nonconvergence { .. } => 4,
        _ => 2,
    }
}

/// Parses the arguments, runs the command and returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let mut out = std::io::stdout().lock();
    match dispatch(cli, &mut out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

struct Context {
    run: RunConfig,
    cone: ConeConfig,
    json: bool,
}

fn resolve_cone(spec: &str, run: &RunConfig) -> Result<ConeConfig> {
    if let Ok(i) = spec.trim().parse::<usize>() {
        return run
            .cones
            .get(i)
            .copied()
            .ok_or_else(|| Error::Config(format!("cone index {i} out of range ({} configured)", run.cones.len())));
    }
    let v: Vec<f64> = spec
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Config(format!("cannot parse cone '{spec}'")))?;
    if v.len() != 3 {
        return Err(Error::Config(format!("cone '{spec}' needs sigma,alpha,B0")));
    }
    ConeConfig::new(v[0], v[2], v[1])
}

fn dispatch<W: Write>(cli: Cli, w: &mut W) -> Result<i32> {
    let mut run = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(o) = cli.out {
        run.output_dir = o;
    }
    if let Some(s) = cli.seed {
        run.seed = s;
    }
    let cone = resolve_cone(&cli.cone, &run)?;
    let ctx = Context { run, cone, json: cli.json };
    match cli.command {
        Command::Kernel(a) => cmd_kernel(&ctx, &a, w),
        Command::Spectrum { action } => cmd_spectrum(&ctx, action, w),
        Command::Verify(a) => cmd_verify(ctx, &a, w),
    }
}

/// Plain decimal where it is short, scientific otherwise; both round-trip.
fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub const KERNEL_HEADER: [&str; 12] =
    ["kind", "repr", "t", "r1", "th1", "r2", "th2", "re", "im", "largest_term", "k_max_used", "rel_diff"];

#[derive(Debug, Clone, Serialize)]
struct KernelRow {
    kind: &'static str,
    repr: &'static str,
    t: f64,
    r1: f64,
    th1: f64,
    r2: f64,
    th2: f64,
    re: f64,
    im: f64,
    largest_term: f64,
    k_max_used: i64,
    #[serde(skip_serializing_if = "Option::is_none")]
    rel_diff: Option<f64>,
}

impl KernelRow {
    fn record(&self) -> Vec<String> {
        vec![
            self.kind.to_string(),
            self.repr.to_string(),
            num(self.t),
            num(self.r1),
            num(self.th1),
            num(self.r2),
            num(self.th2),
            num(self.re),
            num(self.im),
            num(self.largest_term),
            self.k_max_used.to_string(),
            self.rel_diff.map(num).unwrap_or_default(),
        ]
    }
}

/// Appends rows to `path`, writing the header only when the file is new or empty.
fn append_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    if let Some(d) = path.parent() {
        std::fs::create_dir_all(d)?;
    }
    let fresh = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let f = OpenOptions::new().create(true).append(true).open(path)?;
    let mut wr = csv::Writer::from_writer(f);
    if fresh {
        wr.write_record(header)?;
    }
    for r in rows {
        wr.write_record(r)?;
    }
    wr.flush()?;
    Ok(())
}

fn print_csv<W: Write>(w: &mut W, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(header)?;
    for r in rows {
        wr.write_record(r)?;
    }
    wr.flush()?;
    Ok(())
}

fn cmd_kernel<W: Write>(ctx: &Context, a: &KernelArgs, w: &mut W) -> Result<i32> {
    let cfg = &ctx.cone;
    let trunc = &ctx.run.trunc;
    let p = ConePoint::new(a.p.0, a.p.1, cfg)?;
    let q = ConePoint::new(a.q.0, a.q.1, cfg)?;
    let row = |kind: &'static str, repr: &'static str, v: KernelValue| KernelRow {
        kind,
        repr,
        t: a.t,
        r1: a.p.0,
        th1: a.p.1,
        r2: a.q.0,
        th2: a.q.1,
        re: v.value.re,
        im: v.value.im,
        largest_term: v.largest_term,
        k_max_used: v.truncation.k_max as i64,
        rel_diff: None,
    };
    let spectral = |f: &dyn Fn(f64) -> Complex64| -> KernelValue {
        let (value, largest_term) = spectral_kernel(f, &p, &q, cfg, &ctx.run.window);
        KernelValue { value, largest_term, truncation: crate::kernels::TruncationSpec { k_max: ctx.run.window.max_abs_k() as usize, ..*trunc } }
    };
    let t = a.t;
    let mut rows = Vec::new();
    match a.kind {
        KernelKind::Heat => {
            if matches!(a.repr, Repr::Series | Repr::Both) {
                rows.push(row("heat", "series", heat_kernel_series(t, &p, &q, cfg, trunc)?));
            }
            if matches!(a.repr, Repr::Closed | Repr::Both) {
                rows.push(row("heat", "closed", heat_kernel_closed(t, &p, &q, cfg, trunc)?));
            }
            if a.repr == Repr::Spectral {
                if !(t > 0.0) {
                    return Err(Error::Domain(format!("heat kernel needs t > 0, got {t}")));
                }
                rows.push(row("heat", "spectral", spectral(&|l| Complex64::new((-t * l).exp(), 0.0))));
            }
        }
        KernelKind::Schrodinger => {
            if matches!(a.repr, Repr::Series | Repr::Both) {
                rows.push(row("schrodinger", "series", schrodinger_kernel_series(t, &p, &q, cfg, trunc)?));
            }
            if matches!(a.repr, Repr::Closed | Repr::Both) {
                rows.push(row("schrodinger", "closed", schrodinger_kernel_closed(t, &p, &q, cfg, trunc)?));
            }
            if a.repr == Repr::Spectral {
                // validates the time against the same guard as the other forms
                schrodinger_kernel_series(t, &p, &q, cfg, trunc)?;
                rows.push(row("schrodinger", "spectral", spectral(&|l| Complex64::from_polar(1.0, t * l))));
            }
        }
        KernelKind::Halfwave => {
            if a.repr == Repr::Both {
                return Err(Error::Config("the half-wave kernel has only the spectral representation".into()));
            }
            let hw = HalfwaveWindow::for_shell(a.j, cfg, p.r().max(q.r()))?;
            let value = halfwave_kernel_truncated(a.j, t, &p, &q, cfg, &hw.window)?;
            let scale = 2f64.powi(-a.j);
            let (_, largest) = spectral_kernel(|l| Complex64::new(dyadic_phi(scale * l.sqrt()), 0.0), &p, &q, cfg, &hw.window);
            rows.push(row(
                "halfwave",
                "spectral",
                KernelValue { value, largest_term: largest, truncation: crate::kernels::TruncationSpec { k_max: hw.window.max_abs_k() as usize, ..*trunc } },
            ));
        }
    }
    if rows.len() == 2 {
        let (x, y) = (Complex64::new(rows[0].re, rows[0].im), Complex64::new(rows[1].re, rows[1].im));
        let d = (x - y).norm() / x.norm().max(y.norm());
        rows.iter_mut().for_each(|r| r.rel_diff = Some(d));
    }
    let records: Vec<Vec<String>> = rows.iter().map(KernelRow::record).collect();
    append_csv(&ctx.run.output_dir.join("kernel.csv"), &KERNEL_HEADER, &records)?;
    if ctx.json {
        writeln!(w, "{}", serde_json::to_string_pretty(&rows)?)?;
    } else {
        print_csv(w, &KERNEL_HEADER, &records)?;
        for r in &rows {
            let v = Complex64::new(r.re, r.im).norm();
            if v > 0.0 {
                eprintln!("{} {}: cancellation largest_term/|K| = {}", r.kind, r.repr, num(r.largest_term / v));
            }
        }
    }
    Ok(0)
}

fn read_samples(path: &Path) -> Result<BTreeMap<i64, Vec<(f64, f64, Complex64)>>> {
    let mut rd = csv::Reader::from_path(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let mut by_k: BTreeMap<i64, Vec<(f64, f64, Complex64)>> = BTreeMap::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|e| Error::Config(format!("row {}: {e}", i + 2)))?;
        if rec.len() != 5 {
            return Err(Error::Config(format!("row {}: expected k,r,theta,re,im", i + 2)));
        }
        let f = |j: usize| -> Result<f64> {
            rec[j].trim().parse::<f64>().map_err(|_| Error::Config(format!("row {}: bad number '{}'", i + 2, &rec[j])))
        };
        let k = rec[0].trim().parse::<i64>().map_err(|_| Error::Config(format!("row {}: bad k '{}'", i + 2, &rec[0])))?;
        by_k.entry(k).or_default().push((f(1)?, f(2)?, Complex64::new(f(3)?, f(4)?)));
    }
    Ok(by_k)
}

fn cmd_spectrum<W: Write>(ctx: &Context, action: SpectrumAction, w: &mut W) -> Result<i32> {
    let cfg = &ctx.cone;
    let window = ctx.run.window;
    let quad = ctx.run.quad;
    let dir = &ctx.run.output_dir;
    match action {
        SpectrumAction::Table => {
            let header = ["k", "m", "lambda", "norm_sq"];
            let table = mode_table(&window, cfg);
            if ctx.json {
                let rows: Vec<_> = table
                    .iter()
                    .map(|(i, d)| serde_json::json!({ "k": i.k, "m": i.m, "lambda": d.lambda, "norm_sq": d.norm_sq }))
                    .collect();
                writeln!(w, "{}", serde_json::to_string_pretty(&rows)?)?;
            }
            let rows: Vec<Vec<String>> =
                table.iter().map(|(i, d)| vec![i.k.to_string(), i.m.to_string(), num(d.lambda), num(d.norm_sq)]).collect();
            if !ctx.json {
                print_csv(w, &header, &rows)?;
            }
            append_csv(&dir.join("spectrum_table.csv"), &header, &rows)?;
        }
        SpectrumAction::Nodes => {
            let header = ["k", "r", "theta"];
            let mut rows = Vec::new();
            for k in window.k_range() {
                for (r, th) in sample_points(k, cfg, &quad) {
                    rows.push(vec![k.to_string(), format!("{r:e}"), format!("{th:e}")]);
                }
            }
            print_csv(w, &header, &rows)?;
        }
        SpectrumAction::Expand { input, name } => {
            if 2 * window.max_abs_k() as usize >= quad.n_ang {
                return Err(Error::Quadrature(format!("|k| up to {} needs more than {} angular samples", window.max_abs_k(), quad.n_ang)));
            }
            let samples = read_samples(&input)?;
            let mut coeffs = Vec::with_capacity(window.len());
            for k in window.k_range() {
                let expected = sample_points(k, cfg, &quad);
                let got = samples.get(&k).ok_or_else(|| Error::Config(format!("no samples for k = {k}")))?;
                if got.len() != expected.len() {
                    return Err(Error::Config(format!("k = {k}: expected {} samples, found {}", expected.len(), got.len())));
                }
                for (&(r, th), &(gr, gth, _)) in expected.iter().zip(got) {
                    if (r - gr).abs() > 1e-9 * r.max(1.0) || (th - gth).abs() > 1e-9 * th.max(1.0) {
                        return Err(Error::Config(format!("k = {k}: sample at ({gr}, {gth}) does not match node ({r}, {th})")));
                    }
                }
                let values: Vec<Complex64> = got.iter().map(|s| s.2).collect();
                coeffs.extend(project_k(k, &values, window.m_max, cfg, &quad));
            }
            let field = SpectralField::new(*cfg, window, quad, coeffs)?;
            field.save(dir, &name)?;
            report_field(ctx, &field, w)?;
        }
        SpectrumAction::Evolve { input, mult, t, j, nu, name } => {
            let stem = input.file_name().and_then(|s| s.to_str()).ok_or_else(|| Error::Config("bad --input path".into()))?;
            let parent = input.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
            let field = SpectralField::load(parent, stem)?;
            let out = match mult {
                Multiplier::Heat => {
                    if t < 0.0 {
                        return Err(Error::Domain(format!("heat flow needs t >= 0, got {t}")));
                    }
                    spectral_apply(|l| Complex64::new((-t * l).exp(), 0.0), &field)
                }
                Multiplier::Schrodinger => spectral_apply(|l| Complex64::from_polar(1.0, t * l), &field),
                Multiplier::Halfwave => {
                    let cut = |l: f64| j.map_or(1.0, |j| dyadic_phi(2f64.powi(-j) * l.sqrt()));
                    spectral_apply(|l| Complex64::from_polar(cut(l), t * l.sqrt()), &field)
                }
                Multiplier::Fractional => {
                    let nu = nu.ok_or_else(|| Error::Config("--mult fractional needs --nu".into()))?;
                    if !(nu > 0.0) {
                        return Err(Error::Domain(format!("fractional exponent must be positive, got {nu}")));
                    }
                    spectral_apply(|l| Complex64::from_polar(1.0, t * l.powf(nu)), &field)
                }
            };
            out.save(dir, &name)?;
            report_field(ctx, &out, w)?;
        }
    }
    Ok(0)
}

fn report_field<W: Write>(ctx: &Context, f: &SpectralField, w: &mut W) -> Result<()> {
    if ctx.json {
        let mut v = f.header_json();
        v["l2_norm"] = serde_json::json!(f.l2_norm());
        writeln!(w, "{}", serde_json::to_string_pretty(&v)?)?;
    } else {
        f.write_csv(w)?;
    }
    Ok(())
}

pub const SUITES: [&str; 12] = [
    "dispersive",
    "weighted",
    "gaussian",
    "halfwave",
    "reduced",
    "a_l1",
    "energy",
    "subordination",
    "bessel",
    "spectral",
    "semigroup",
    "littlewood_paley",
];

fn cone_dir(i: usize) -> String {
    format!("cone{i}")
}

/// Runs one suite; config-dependent suites run on every configured cone.
fn run_suite(run: &RunConfig, suite: &str, gamma: Option<f64>, js: &[i32]) -> Result<Vec<(String, SweepReport)>> {
    let trunc = &run.trunc;
    let grid = run.grid.sweep();
    let mut out: Vec<(String, SweepReport)> = Vec::new();
    let each = |f: &dyn Fn(&ConeConfig) -> Result<Vec<(String, SweepReport)>>| -> Result<Vec<(String, SweepReport)>> {
        let mut v = Vec::new();
        for (i, c) in run.cones.iter().enumerate() {
            for (stem, r) in f(c)? {
                v.push((format!("{}/{stem}", cone_dir(i)), r));
            }
        }
        Ok(v)
    };
    match suite {
        "dispersive" => match gamma {
            Some(g) => out = each(&|c| Ok(vec![("weighted_custom".into(), verify::weighted_dispersive_constant(c, g, &grid, trunc)?)]))?,
            None => out = each(&|c| Ok(vec![("dispersive".into(), verify::dispersive_constant_schrodinger(c, &grid, trunc)?)]))?,
        },
        "weighted" => {
            out = each(&|c| {
                let k = kappa_sigma(c).kappa;
                [("weighted_g0", 0.0), ("weighted_half_kappa", 0.5 * k), ("weighted_kappa", k)]
                    .into_iter()
                    .map(|(s, g)| Ok((s.to_string(), verify::weighted_dispersive_constant(c, g, &grid, trunc)?)))
                    .collect()
            })?
        }
        "gaussian" => out = each(&|c| Ok(vec![("gaussian".into(), verify::gaussian_heat_constant(c, &grid, trunc)?)]))?,
        "halfwave" => {
            out = each(&|c| {
                js.iter()
                    .map(|&j| {
                        let g = match run.grid {
                            crate::config::GridPreset::Quick => HalfwaveGrid::quick(j),
                            crate::config::GridPreset::Standard => HalfwaveGrid::for_shell(j),
                        };
                        Ok((format!("halfwave_j{j}"), verify::halfwave_decay_fit(c, j, &g, None)?))
                    })
                    .collect()
            })?
        }
        "reduced" => {
            out = each(&|c| {
                let rg = run.grid.reduced();
                let a = verify::reduced_kernel_bound_scan(c, std::f64::consts::PI, &rg, trunc)?;
                let mut b = verify::reduced_kernel_bound_scan(c, 2.0 * std::f64::consts::PI, &rg, trunc)?;
                // nested δ-ranges: the larger range cannot have a smaller sup
                let nested = a.empirical_constant <= b.empirical_constant * (1.0 + 1e-12);
                b.details.insert("nested_monotone".into(), if nested { 1.0 } else { 0.0 });
                b.pass &= nested;
                Ok(vec![("reduced_r_pi".into(), a), ("reduced_r_2pi".into(), b)])
            })?
        }
        "a_l1" => out = each(&|c| Ok(vec![("a_l1".into(), verify::a_integrand_l1_bound(c, run.grid.a_theta())?)]))?,
        "energy" => {
            out = each(&|c| Ok(vec![("energy".into(), verify::energy_conservation_check(c, run.window, run.grid.trials(), run.seed)?)]))?
        }
        "subordination" => {
            let (z, y) = verify::subordination_default_grid();
            out.push(("subordination".into(), verify::subordination_identity_check(&z, &y)?));
        }
        "bessel" => out.push(("bessel_product".into(), verify::bessel_product_identity_check(20, run.seed)?)),
        "spectral" => out = each(&|c| Ok(vec![("spectral".into(), spectral_report(c, run)?)]))?,
        "semigroup" => out = each(&|c| Ok(vec![("semigroup".into(), semigroup_report(c, run)?)]))?,
        "littlewood_paley" => out = each(&|c| Ok(vec![("littlewood_paley".into(), lp_report(c, run)?)]))?,
        _ => return Err(Error::Config(format!("unknown suite '{suite}' (expected one of {} or all)", SUITES.join(", ")))),
    }
    Ok(out)
}

fn with_details(mut r: SweepReport, d: &[(&str, f64)]) -> SweepReport {
    for (k, v) in d {
        r.details.insert((*k).into(), *v);
    }
    r
}

fn tolerance_report(name: &str, cfg: &ConeConfig, grid: String, checks: &[(&str, f64, f64)]) -> SweepReport {
    let worst = checks.iter().map(|c| c.1 / c.2).fold(0.0, f64::max);
    let pass = checks.iter().all(|c| c.1 < c.2);
    let criterion = checks.iter().map(|c| format!("{} < {:e}", c.0, c.2)).collect::<Vec<_>>().join(", ");
    let r = SweepReport {
        name: name.into(),
        config: Some(*cfg),
        grid_spec: grid,
        empirical_constant: worst,
        refinement_ratio: 1.0,
        pass: pass && worst.is_finite(),
        criterion: format!("{criterion}; empirical constant is the worst value/tolerance"),
        details: BTreeMap::new(),
        runtime_ms: 0,
        samples: Default::default(),
    };
    let d: Vec<(&str, f64)> = checks.iter().map(|c| (c.0, c.1)).collect();
    with_details(r, &d)
}

fn spectral_report(cfg: &ConeConfig, run: &RunConfig) -> Result<SweepReport> {
    let w = Window::symmetric(4, 4);
    let ortho = verify::orthonormality_defect(&w, cfg);
    let eig = verify::eigen_residual(&w, cfg);
    let round = verify::roundtrip_defect(w, cfg, run.seed)?;
    Ok(tolerance_report(
        "spectral",
        cfg,
        "window |k|<=4, m<=4".into(),
        &[("orthonormality", ortho, 1e-8), ("eigen_residual", eig, 1e-5), ("roundtrip", round, 1e-8)],
    ))
}

fn semigroup_report(cfg: &ConeConfig, run: &RunConfig) -> Result<SweepReport> {
    let u = 1.0 / cfg.b0.sqrt();
    let p = ConePoint::new(0.8 * u, 0.3, cfg)?;
    let q = ConePoint::new(1.2 * u, 2.0, cfg)?;
    let ck = verify::heat_semigroup_defect(0.4 / cfg.b0, 0.7 / cfg.b0, &p, &q, cfg, &run.trunc)?;
    let herm = verify::hermitian_defect(cfg, &run.trunc)?;
    let mut rng = ChaCha8Rng::seed_from_u64(run.seed);
    let f = SpectralField::random(*cfg, run.window, &mut rng);
    let unit = (spectral_apply(|l| Complex64::from_polar(1.0, 0.7 * l), &f).l2_norm() - f.l2_norm()).abs();
    Ok(tolerance_report(
        "semigroup",
        cfg,
        "t = 0.4/B0 + 0.7/B0; 4 points x 2 times".into(),
        &[("chapman_kolmogorov", ck, 1e-6), ("hermitian", herm, 1e-12), ("unitarity", unit, 1e-12)],
    ))
}

fn lp_report(cfg: &ConeConfig, run: &RunConfig) -> Result<SweepReport> {
    let cut = make_cutoff();
    let mut rng = ChaCha8Rng::seed_from_u64(run.seed);
    let w = Window::symmetric(6, 6);
    let mut worst_lo: f64 = f64::INFINITY;
    let mut worst_hi: f64 = 0.0;
    for _ in 0..10 {
        let f = SpectralField::random(*cfg, w, &mut rng);
        for s in [0.5, 1.0] {
            let ratio = besov_norm(&f, s, 2.0, 2.0)? / sobolev_norm(&f, s);
            worst_lo = worst_lo.min(ratio);
            worst_hi = worst_hi.max(ratio);
        }
    }
    let lo = std::f64::consts::FRAC_1_SQRT_2 - 1e-6;
    let hi = std::f64::consts::SQRT_2 + 1e-6;
    let r = SweepReport {
        name: "littlewood_paley".into(),
        config: Some(*cfg),
        grid_spec: "10 random fields, window |k|<=6, m<=6, s in {0.5, 1}".into(),
        empirical_constant: cut.partition_residual,
        refinement_ratio: 1.0,
        pass: cut.partition_residual < 1e-12 && worst_lo >= lo && worst_hi <= hi,
        criterion: "partition residual < 1e-12 and Besov/Sobolev ratio in [1/sqrt2, sqrt2]".into(),
        details: BTreeMap::new(),
        runtime_ms: 0,
        samples: Default::default(),
    };
    Ok(with_details(r, &[("ratio_min", worst_lo), ("ratio_max", worst_hi)]))
}

fn cmd_verify<W: Write>(mut ctx: Context, a: &VerifyArgs, w: &mut W) -> Result<i32> {
    if let Some(g) = &a.grid {
        ctx.run.grid = g.parse()?;
    }
    let js = a.j.clone().unwrap_or_else(|| ctx.run.halfwave_j.clone());
    let suites: Vec<&str> = if a.suite == "all" { SUITES.to_vec() } else { vec![a.suite.as_str()] };
    if a.gamma.is_some() && a.suite != "dispersive" {
        return Err(Error::Config("--gamma applies to the dispersive suite only".into()));
    }
    let dir = ctx.run.output_dir.join("verify");
    let mut all = Vec::new();
    for s in suites {
        let start = std::time::Instant::now();
        let mut reports = run_suite(&ctx.run, s, a.gamma, &js)?;
        let ms = start.elapsed().as_millis() as u64;
        for (stem, r) in reports.iter_mut() {
            if r.runtime_ms == 0 {
                r.runtime_ms = ms;
            }
            let (sub, file) = stem.rsplit_once('/').map_or((None, stem.as_str()), |(d, f)| (Some(d), f));
            let target = sub.map_or(dir.clone(), |d| dir.join(d));
            r.save(&target, file)?;
        }
        all.extend(reports);
    }
    let failed = all.iter().filter(|(_, r)| !r.pass).count();
    if ctx.json {
        let v: Vec<_> = all.iter().map(|(s, r)| serde_json::json!({ "id": s, "report": r })).collect();
        writeln!(w, "{}", serde_json::to_string_pretty(&v)?)?;
    } else {
        for (stem, r) in &all {
            writeln!(
                w,
                "{} {stem}: constant {} refinement {} ({} ms)",
                if r.pass { "PASS" } else { "FAIL" },
                num(r.empirical_constant),
                num(r.refinement_ratio),
                r.runtime_ms
            )?;
        }
    }
    Ok(if failed > 0 { 1 } else { 0 })
}
