//! Command-line front end.
//!
//! Every subcommand validates its whole configuration before computing and
//! writes a single JSON or CSV document to `--out` (stdout by default).
//! Exit codes: 0 ok, 1 a check failed, 2 bad configuration, 3 numerical
//! non-convergence.

use std::f64::consts::PI;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::angular::{
    angular_bracket, discrepancy_report, sphere_quadrature_bracket, triple_identity_residual, Discrepancy,
    DirectionCosineMonomial, LmMap,
};
use crate::born::{
    born_amplitude, factorization_residual, random_kinematics, write_sweep_csv, BornAmplitude, CouplingConfig,
    ScatteringKinematics,
};
use crate::curves::KnotSpec;
use crate::error::{Error, Result};
use crate::multipole::{dipole_moment, moment_set, MomentSet};
use crate::potential::{
    biot_savart_dipole_line, log_log_slope, multipole_potential, sample_potential, write_csv, FieldPoint,
    MultipoleOrder, PotentialMethod,
};
use crate::radial::{radial_closed, radial_quadrature, radial_quadrature_tail, RadialKind};
use crate::{DEFAULT_CURVE_SAMPLES, DEFAULT_LAMBDA0};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Default residual threshold of `factorize`.
pub const FACTORIZE_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Parser)]
#[command(name = "abknot", version, about = "Born-approximation scattering off knotted solenoids")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Quadrupole and octopole curve moments
    Moments,
    /// Vector potential along one direction
    Potential(PotentialArgs),
    /// Born matrix element for one pair of wave vectors
    Amplitude,
    /// Amplitudes over seeded random kinematics
    Sweep,
    /// Torus-knot versus unknot-triad residual
    Factorize(FactorizeArgs),
    /// Oracle self-checks
    Selfcheck,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// torus:P,Q | unknot-xy | unknot-xz | unknot-yz | file:PATH
    #[arg(long, global = true, default_value = "torus:2,3")]
    pub knot: String,
    /// Wave-number magnitude; sweep draws from [0.2, 2] when omitted
    #[arg(long, global = true)]
    pub k: Option<f64>,
    #[arg(long = "ki-theta", global = true, default_value_t = 0.0, allow_negative_numbers = true)]
    pub ki_theta: f64,
    #[arg(long = "ki-phi", global = true, default_value_t = 0.0, allow_negative_numbers = true)]
    pub ki_phi: f64,
    #[arg(long = "kn-theta", global = true, default_value_t = PI / 3.0, allow_negative_numbers = true)]
    pub kn_theta: f64,
    #[arg(long = "kn-phi", global = true, default_value_t = 0.0, allow_negative_numbers = true)]
    pub kn_phi: f64,
    #[arg(long, global = true, default_value_t = DEFAULT_LAMBDA0, allow_negative_numbers = true)]
    pub lambda0: f64,
    #[arg(long, global = true, default_value_t = 1.0, allow_negative_numbers = true)]
    pub coupling: f64,
    /// Curve samples (moments, potential) or kinematics draws (sweep, factorize)
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Treat printed-table discrepancies as failures
    #[arg(long = "strict-paper-tables", global = true)]
    pub strict_paper_tables: bool,
}

#[derive(Debug, Args)]
pub struct PotentialArgs {
    #[arg(long, default_value_t = 0.7)]
    pub theta: f64,
    #[arg(long, default_value_t = 0.3)]
    pub phi: f64,
    #[arg(long = "r-min", default_value_t = 30.0)]
    pub r_min: f64,
    #[arg(long = "r-max", default_value_t = 300.0)]
    pub r_max: f64,
    /// Number of geometrically spaced radii
    #[arg(long, default_value_t = 10)]
    pub points: usize,
    /// biot_savart | quadrupole | multipole | all
    #[arg(long, default_value = "all")]
    pub method: String,
}

#[derive(Debug, Args)]
pub struct FactorizeArgs {
    #[arg(long, default_value_t = FACTORIZE_THRESHOLD)]
    pub threshold: f64,
}

/// Validated configuration shared by the subcommands.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub knot: KnotSpec,
    pub k: Option<f64>,
    pub ki: (f64, f64),
    pub kn: (f64, f64),
    pub lambda0: f64,
    pub coupling: CouplingConfig,
    pub samples: Option<usize>,
    pub seed: u64,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub strict_paper_tables: bool,
}

impl RunConfig {
    pub fn from_args(a: &CommonArgs) -> Result<Self> {
        let knot: KnotSpec = a.knot.parse()?;
        if let Some(k) = a.k {
            if !(k > 0.0 && k.is_finite()) {
                return Err(Error::InvalidArgument(format!("--k must be positive, got {k}")));
            }
        }
        if !(a.lambda0 > 0.0 && a.lambda0.is_finite()) {
            return Err(Error::InvalidArgument(format!("--lambda0 must be positive, got {}", a.lambda0)));
        }
        for v in [a.ki_theta, a.ki_phi, a.kn_theta, a.kn_phi] {
            if !v.is_finite() {
                return Err(Error::InvalidArgument("direction angles must be finite".into()));
            }
        }
        if a.samples == Some(0) {
            return Err(Error::InvalidArgument("--samples must be positive".into()));
        }
        Ok(RunConfig {
            knot,
            k: a.k,
            ki: (a.ki_theta, a.ki_phi),
            kn: (a.kn_theta, a.kn_phi),
            lambda0: a.lambda0,
            coupling: CouplingConfig::new(a.coupling)?,
            samples: a.samples,
            seed: a.seed,
            format: a.format,
            out: a.out.clone(),
            strict_paper_tables: a.strict_paper_tables,
        })
    }

    pub fn kinematics(&self) -> Result<ScatteringKinematics> {
        ScatteringKinematics::from_angles(self.k.unwrap_or(1.0), self.ki, self.kn, self.lambda0)
    }

    fn json_only(&self, what: &str) -> Result<()> {
        if self.format == Format::Csv {
            return Err(Error::InvalidArgument(format!("{what} output is JSON only")));
        }
        Ok(())
    }
}

/// A rendered document and the exit status it implies.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub document: String,
    pub status: i32,
}

impl Outcome {
    fn ok(document: String) -> Self {
        Outcome { document, status: EXIT_OK }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_CONFIG
    }
}

fn pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("document serializes");
    s.push('\n');
    s
}

pub fn cmd_moments(cfg: &RunConfig) -> Result<Outcome> {
    cfg.json_only("moments")?;
    let n = cfg.samples.unwrap_or(DEFAULT_CURVE_SAMPLES);
    let m = MomentSet::compute(&cfg.knot, n)?;
    let doc = json!({
        "knot": cfg.knot.label(),
        "samples": n,
        "moments": m,
    });
    Ok(Outcome::ok(pretty(&doc)))
}

fn parse_methods(s: &str) -> Result<Vec<PotentialMethod>> {
    Ok(match s {
        "all" => vec![PotentialMethod::BiotSavart, PotentialMethod::Quadrupole, PotentialMethod::Multipole],
        "biot_savart" => vec![PotentialMethod::BiotSavart],
        "quadrupole" => vec![PotentialMethod::Quadrupole],
        "multipole" => vec![PotentialMethod::Multipole],
        other => return Err(Error::InvalidArgument(format!("unknown potential method '{other}'"))),
    })
}

pub fn cmd_potential(cfg: &RunConfig, args: &PotentialArgs) -> Result<Outcome> {
    let methods = parse_methods(&args.method)?;
    if !(args.r_min > 0.0 && args.r_max >= args.r_min && args.r_max.is_finite()) || args.points == 0 {
        return Err(Error::InvalidArgument(format!(
            "need 0 < r-min <= r-max and points > 0, got [{}, {}] with {} points",
            args.r_min, args.r_max, args.points
        )));
    }
    let n = cfg.samples.unwrap_or(DEFAULT_CURVE_SAMPLES);
    let moments = MomentSet::compute(&cfg.knot, n)?;
    let ratio = if args.points > 1 {
        (args.r_max / args.r_min).powf(1.0 / (args.points - 1) as f64)
    } else {
        1.0
    };
    let points = (0..args.points)
        .map(|j| FieldPoint::new(args.r_min * ratio.powi(j as i32), args.theta, args.phi))
        .collect::<Result<Vec<_>>>()?;
    let rows = sample_potential(&cfg.knot, &moments, &points, &methods, n)?;
    let document = match cfg.format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_csv(&mut buf, &rows)?;
            String::from_utf8(buf).expect("ascii")
        }
        Format::Json => pretty(&json!({ "knot": cfg.knot.label(), "rows": rows })),
    };
    Ok(Outcome::ok(document))
}

fn sweep_csv(rows: &[BornAmplitude]) -> Result<String> {
    let mut buf = Vec::new();
    write_sweep_csv(&mut buf, rows)?;
    Ok(String::from_utf8(buf).expect("ascii"))
}

pub fn cmd_amplitude(cfg: &RunConfig) -> Result<Outcome> {
    let kin = cfg.kinematics()?;
    let a = born_amplitude(&cfg.knot, &kin, cfg.coupling.g())?;
    Ok(Outcome::ok(match cfg.format {
        Format::Json => pretty(&a),
        Format::Csv => sweep_csv(&[a])?,
    }))
}

fn draws(cfg: &RunConfig) -> Result<Vec<ScatteringKinematics>> {
    let n = cfg.samples.unwrap_or(20);
    let (lo, hi) = cfg.k.map_or((0.2, 2.0), |k| (k, k));
    random_kinematics(cfg.seed, n, lo, hi, cfg.lambda0)
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<Outcome> {
    let kins = draws(cfg)?;
    let rows = kins
        .iter()
        .map(|k| born_amplitude(&cfg.knot, k, cfg.coupling.g()))
        .collect::<Result<Vec<_>>>()?;
    Ok(Outcome::ok(match cfg.format {
        Format::Csv => sweep_csv(&rows)?,
        Format::Json => pretty(&json!({ "knot": cfg.knot.label(), "seed": cfg.seed, "rows": rows })),
    }))
}

pub fn cmd_factorize(cfg: &RunConfig, args: &FactorizeArgs) -> Result<Outcome> {
    cfg.json_only("factorize")?;
    let KnotSpec::Torus(t) = &cfg.knot else {
        return Err(Error::InvalidArgument("factorize needs --knot torus:P,Q".into()));
    };
    if !(args.threshold > 0.0) {
        return Err(Error::InvalidArgument(format!("threshold must be positive, got {}", args.threshold)));
    }
    let kins = draws(cfg)?;
    let residual = factorization_residual(t.p(), t.q(), &kins, cfg.coupling.g())?;
    let passed = residual < args.threshold;
    let doc = json!({
        "p": t.p(),
        "q": t.q(),
        "samples": kins.len(),
        "seed": cfg.seed,
        "residual": residual,
        "threshold": args.threshold,
        "passed": passed,
    });
    Ok(Outcome {
        document: pretty(&doc),
        status: if passed { EXIT_OK } else { EXIT_CHECK_FAILED },
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: Value,
}

fn check(name: &'static str, passed: bool, detail: Value) -> CheckResult {
    CheckResult { name, passed, detail }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn check_radial() -> Result<CheckResult> {
    let mut worst: f64 = 0.0;
    for a in [0.3, 0.5, 1.0, 2.0, 5.0, 10.0] {
        for (kind, l) in [(RadialKind::A, 2), (RadialKind::B, 3)] {
            worst = worst.max(rel(radial_closed(kind, l, a, 1.0)?, radial_quadrature(kind, l, a, 1.0)?));
        }
    }
    let mut worst_degenerate: f64 = 0.0;
    for a in [0.3, 1.0, 5.0] {
        for (kind, l) in [(RadialKind::A, 0), (RadialKind::B, 1)] {
            let x = radial_quadrature(kind, l, a, 1.0)?;
            worst_degenerate = worst_degenerate.max(rel(radial_quadrature_tail(kind, l, a, 1.0)?, x));
        }
    }
    Ok(check(
        "radial_closed_form_vs_quadrature",
        worst <= 1e-7 && worst_degenerate <= 1e-8,
        json!({ "max_rel_closed": worst, "max_rel_degenerate": worst_degenerate }),
    ))
}

fn check_angular(seed: u64) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coeffs = LmMap::new();
    for l in 0..=3u32 {
        for m in -(l as i32)..=(l as i32) {
            coeffs.insert((l, m), Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        }
    }
    let mut worst: f64 = 0.0;
    for mono in DirectionCosineMonomial::all() {
        let a = angular_bracket(&mono, &coeffs)?;
        let b = sphere_quadrature_bracket(&mono, &coeffs, 3)?;
        worst = worst.max((a - b).norm());
    }
    Ok(check("angular_bracket_vs_sphere_quadrature", worst <= 1e-11, json!({ "max_abs": worst })))
}

fn check_triples(seed: u64) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let angles: Vec<(f64, f64)> = (0..100)
        .map(|_| (rng.gen_range(-1.0f64..1.0).acos(), rng.gen_range(0.0..2.0 * PI)))
        .collect();
    let r = triple_identity_residual(&angles);
    check("triple_product_identities", r <= 1e-12, json!({ "max_abs": r }))
}

fn check_potential_slope() -> Result<CheckResult> {
    let spec = KnotSpec::torus(2, 3)?;
    let m = moment_set(&spec);
    let radii: Vec<f64> = (0..8).map(|j| 30.0 * 10f64.powf(j as f64 / 7.0)).collect();
    let mut slopes = Vec::new();
    for (theta, phi) in [(0.4, 0.1), (1.3, 2.2), (2.5, 4.0)] {
        let mut diffs = Vec::new();
        for &r in &radii {
            let p = FieldPoint::new(r, theta, phi)?;
            let bs = biot_savart_dipole_line(&spec, &p, DEFAULT_CURVE_SAMPLES)?;
            diffs.push(multipole_potential(&m, &p, MultipoleOrder::ThroughOctopole).sub(&bs).norm());
        }
        slopes.push(log_log_slope(&radii, &diffs));
    }
    let ok = slopes.iter().all(|s| (s + 5.0).abs() <= 0.3);
    Ok(check("potential_far_field_slope", ok, json!({ "slopes": slopes })))
}

fn check_factorization(lambda0: f64, seed: u64) -> Result<CheckResult> {
    let kins = random_kinematics(seed, 5, 0.2, 2.0, lambda0)?;
    let r = factorization_residual(2, 3, &kins, 1.0)?;
    Ok(check("torus_2_3_factorization", r < 1e-9, json!({ "residual": r })))
}

fn check_dipole() -> Result<CheckResult> {
    let mut worst: f64 = 0.0;
    for spec in [KnotSpec::torus(2, 3)?, KnotSpec::UnknotXY, KnotSpec::UnknotXZ, KnotSpec::UnknotYZ] {
        worst = worst.max(dipole_moment(&spec).iter().fold(0.0, |a: f64, c| a.max(c.abs())));
    }
    Ok(check("dipole_moment_vanishes", worst <= 1e-12, json!({ "max_abs": worst })))
}

pub fn cmd_selfcheck(cfg: &RunConfig) -> Result<Outcome> {
    cfg.json_only("selfcheck")?;
    let checks = vec![
        check_radial()?,
        check_angular(cfg.seed)?,
        check_triples(cfg.seed),
        check_potential_slope()?,
        check_factorization(cfg.lambda0, cfg.seed)?,
        check_dipole()?,
    ];
    let report: Vec<Discrepancy> = discrepancy_report();
    let structural = checks.iter().all(|c| c.passed);
    let tables_ok = report.is_empty() || !cfg.strict_paper_tables;
    let passed = structural && tables_ok;
    let doc = json!({
        "checks": checks,
        "discrepancies": report,
        "strict_paper_tables": cfg.strict_paper_tables,
        "passed": passed,
    });
    Ok(Outcome {
        document: pretty(&doc),
        status: if passed { EXIT_OK } else { EXIT_CHECK_FAILED },
    })
}

pub fn execute(cli: &Cli) -> Result<Outcome> {
    let cfg = RunConfig::from_args(&cli.common)?;
    match &cli.command {
        Command::Moments => cmd_moments(&cfg),
        Command::Potential(a) => cmd_potential(&cfg, a),
        Command::Amplitude => cmd_amplitude(&cfg),
        Command::Sweep => cmd_sweep(&cfg),
        Command::Factorize(a) => cmd_factorize(&cfg, a),
        Command::Selfcheck => cmd_selfcheck(&cfg),
    }
}

/// Parse, run and write the document. Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let outcome = match execute(&cli) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return exit_code(&e);
        }
    };
    let written = match &cli.common.out {
        Some(path) => std::fs::write(path, &outcome.document),
        None => stdout.write_all(outcome.document.as_bytes()),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "error: {e}");
        return EXIT_CONFIG;
    }
    outcome.status
}
