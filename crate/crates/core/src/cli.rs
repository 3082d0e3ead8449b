//! Command-line front end.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or configuration
//! error. CSV output uses seconds for times (the `table1` human view uses ms).

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::broadband::{broadband_uzzz, BroadbandScheme, SwapBuild};
use crate::engine::{propagator_of, PulseMode, SimulationSettings};
use crate::error::{Error, Result};
use crate::metrics::{eta_curve, fidelity, fig2_row};
use crate::pulseprog::serialize_program;
use crate::sequences::{
    build_swap13, build_uzzz, duration_scaling, swap13_duration, swap_duration_bookkeeping,
    theoretical_limit, Variant,
};
use crate::spinsys::{Channel, Spin, SpinSystem};
use crate::{broadband, metrics, spinsys};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "trispin",
    version,
    about = "Three-spin trilinear propagators and indirect SWAP gates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Durations and scaling factors at κ = 1 and SWAP(1,3) durations.
    Table1 {
        /// Coupling constant (Hz).
        #[arg(long = "J", allow_negative_numbers = true)]
        j: f64,
        /// Emit CSV (times in seconds) instead of the ms table.
        #[arg(long)]
        csv: bool,
    },
    /// Closed-form duration and scaling curves (τ in units of 1/J).
    Curves {
        /// κ grid as `start:stop:step`.
        #[arg(long, default_value = "0.01:1:0.01")]
        kappa: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Transfer efficiency η13 of the SWAP(1,3) composition versus κ.
    EtaSweep {
        #[arg(long)]
        variant: VariantArg,
        #[arg(long, value_enum, default_value = "ideal")]
        mode: ModeArg,
        /// κ grid as `start:stop:step` (`a:b` uses step 0.05).
        #[arg(long, default_value = "0:2:0.05")]
        kappa: String,
        /// Flat key=value configuration file.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an oracle suite: identities, swap, broadband or limits.
    Verify { suite: String },
    /// Compile a U_zzz(κ) element to the pulse-program text format.
    Compile(CompileArgs),
}

#[derive(Debug, Args)]
struct CompileArgs {
    #[arg(long)]
    variant: VariantArg,
    #[arg(long, allow_negative_numbers = true)]
    kappa: f64,
    /// Coupling the delays are designed for (Hz).
    #[arg(long = "J", default_value_t = 88.0, allow_negative_numbers = true)]
    j: f64,
    /// Offset refocusing (and DANTE for D).
    #[arg(long)]
    broadband: bool,
    /// DANTE segment count for D (multiple of 4).
    #[arg(long)]
    n: Option<usize>,
    /// Compile the SWAP(1,3) composition instead of a single element.
    #[arg(long)]
    swap: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy)]
struct VariantArg(Variant);

impl FromStr for VariantArg {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        s.parse().map(VariantArg)
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Ideal,
    Realistic,
}

/// Failure of a command, mapped to an exit code.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Verify,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type CmdResult = std::result::Result<(), Failure>;

/// Parses `args` (program name first) and runs the command, writing to the
/// process's stdout and stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() {
                EXIT_USAGE
            } else {
                let _ = write!(out, "{e}");
                EXIT_OK
            };
        }
    };
    let result = match cli.command {
        Command::Table1 { j, csv } => cmd_table1(j, csv, out),
        Command::Curves { kappa, out: path } => cmd_curves(&kappa, path.as_deref(), out),
        Command::EtaSweep {
            variant,
            mode,
            kappa,
            config,
            out: path,
        } => cmd_eta_sweep(
            variant.0,
            mode,
            &kappa,
            config.as_deref(),
            path.as_deref(),
            out,
        ),
        Command::Verify { suite } => cmd_verify(&suite, out),
        Command::Compile(args) => cmd_compile(&args, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Verify) => EXIT_VERIFY,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
    }
}

fn emit(text: &str, path: Option<&Path>, out: &mut dyn Write) -> CmdResult {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Usage(format!("{}: {e}", p.display()))),
        None => out.write_all(text.as_bytes()).map_err(Failure::from),
    }
}

// ---------------------------------------------------------------------------
// Ranges and configuration
// ---------------------------------------------------------------------------

/// Inclusive grid from `start:stop[:step]`; empty when stop < start. Values
/// are rounded to 12 decimals so `0.1·3` prints as `0.3`.
pub fn parse_range(spec: &str, default_step: f64) -> Result<Vec<f64>> {
    let bad = || Error::ScanRange(format!("expected start:stop[:step], got '{spec}'"));
    let parts: Vec<&str> = spec.split(':').collect();
    if !(2..=3).contains(&parts.len()) {
        return Err(bad());
    }
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    let lo = num(parts[0])?;
    let hi = num(parts[1])?;
    let step = if parts.len() == 3 {
        num(parts[2])?
    } else {
        default_step
    };
    if !(lo.is_finite() && hi.is_finite() && step.is_finite()) {
        return Err(bad());
    }
    if step <= 0.0 {
        return Err(Error::ScanRange(format!("step {step} must be positive")));
    }
    if hi < lo {
        return Ok(Vec::new());
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|i| ((lo + step * i as f64) * 1e12).round() / 1e12)
        .collect())
}

/// Scenario for transfer sweeps: spin system, simulation settings and the
/// coupling the sequences are designed for.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub system: SpinSystem,
    pub settings: SimulationSettings,
    pub design_j: f64,
    pub build: SwapBuild,
}

impl Scenario {
    /// Default scenario for `mode`. Ideal mode simulates the on-resonance
    /// chain with J12 = J23 = 88 Hz; realistic mode uses the acetamide
    /// couplings and offsets, 35.7/5.5 kHz pulses and a 10% FWHM rf
    /// distribution over 11 points. Sequences are designed for J = 88 Hz.
    pub fn for_mode(mode: PulseMode) -> Self {
        let (system, settings) = match mode {
            PulseMode::Ideal => (SpinSystem::chain(88.0), SimulationSettings::ideal()),
            PulseMode::Realistic => (SpinSystem::acetamide(), SimulationSettings::realistic()),
        };
        Self {
            system,
            settings,
            design_j: 88.0,
            build: SwapBuild::default(),
        }
    }
}

/// Keys accepted in a configuration file, with their meaning.
pub const CONFIG_KEYS: &[(&str, &str)] = &[
    ("j12", "coupling 1-2 (Hz)"),
    ("j23", "coupling 2-3 (Hz)"),
    ("j13", "coupling 1-3 (Hz)"),
    ("offset1", "offset of spin 1 (Hz)"),
    ("offset2", "offset of spin 2 (Hz)"),
    ("offset3", "offset of spin 3 (Hz)"),
    ("channel1", "channel of spin 1: proton or hetero"),
    ("channel2", "channel of spin 2: proton or hetero"),
    ("channel3", "channel of spin 3: proton or hetero"),
    ("proton_rf", "proton-channel rf amplitude (Hz)"),
    ("hetero_rf", "hetero-channel rf amplitude (Hz)"),
    ("rf_fwhm", "rf inhomogeneity FWHM as a fraction; 0 disables"),
    ("rf_points", "odd number of ensemble points"),
    (
        "design_j",
        "coupling the sequence delays are designed for (Hz)",
    ),
    ("dante_n", "DANTE segment count for D in realistic mode"),
    (
        "selective_emulation",
        "replace single-proton pulses by hard-pulse elements (true/false)",
    ),
];

/// Applies a flat `key = value` file on top of `base`. Blank lines and `#`
/// comments are ignored; unknown keys, duplicate keys and empty values are
/// errors.
pub fn apply_config(base: Scenario, text: &str) -> Result<Scenario> {
    let mut sc = base;
    let mut seen = Vec::new();
    let mut inh = sc.settings.inhomogeneity.unwrap_or_default();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let cfg_err = |msg: String| Error::Settings(format!("config line {}: {msg}", n + 1));
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| cfg_err(format!("expected key=value, got '{line}'")))?;
        let (key, value) = (key.trim(), value.trim());
        if value.is_empty() {
            return Err(cfg_err(format!("missing value for '{key}'")));
        }
        if !CONFIG_KEYS.iter().any(|(k, _)| *k == key) {
            return Err(cfg_err(format!("unknown key '{key}'")));
        }
        if seen.contains(&key) {
            return Err(cfg_err(format!("duplicate key '{key}'")));
        }
        seen.push(key);
        let num = || {
            value
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| cfg_err(format!("'{key}' needs a number, got '{value}'")))
        };
        let channel = || Channel::from_str(value).map_err(|e| cfg_err(e.to_string()));
        match key {
            "j12" => sc.system.j12 = num()?,
            "j23" => sc.system.j23 = num()?,
            "j13" => sc.system.j13 = num()?,
            "offset1" => sc.system.offsets[0] = num()?,
            "offset2" => sc.system.offsets[1] = num()?,
            "offset3" => sc.system.offsets[2] = num()?,
            "channel1" => sc.system.channels[0] = channel()?,
            "channel2" => sc.system.channels[1] = channel()?,
            "channel3" => sc.system.channels[2] = channel()?,
            "proton_rf" => sc.settings.proton_amplitude = num()?,
            "hetero_rf" => sc.settings.hetero_amplitude = num()?,
            "rf_fwhm" => inh.fwhm = num()?,
            "rf_points" => {
                inh.points = value
                    .parse()
                    .map_err(|_| cfg_err(format!("'rf_points' needs an integer, got '{value}'")))?
            }
            "design_j" => sc.design_j = num()?,
            "dante_n" => {
                sc.build.scheme.segments =
                    Some(value.parse().map_err(|_| {
                        cfg_err(format!("'dante_n' needs an integer, got '{value}'"))
                    })?)
            }
            "selective_emulation" => {
                sc.build.emulate_selective = value
                    .parse()
                    .map_err(|_| cfg_err(format!("'{key}' needs true or false, got '{value}'")))?
            }
            _ => unreachable!("checked against CONFIG_KEYS"),
        }
    }
    if sc.settings.is_realistic() {
        sc.settings.inhomogeneity = Some(inh);
    }
    sc.system.validate()?;
    sc.settings.validate()?;
    sc.build.scheme.validate()?;
    if !(sc.design_j.is_finite() && sc.design_j > 0.0) {
        return Err(Error::NonPositiveCoupling(sc.design_j));
    }
    Ok(sc)
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

/// Variant, τ (s), s, SWAP(1,3) duration (s).
type Table1Row = (Variant, f64, f64, f64);

fn cmd_table1(j: f64, csv: bool, out: &mut dyn Write) -> CmdResult {
    let swaps = swap_duration_bookkeeping(j)?;
    let mut rows = Vec::new();
    for v in Variant::ALL {
        let (jtau, s) = duration_scaling(v, 1.0);
        rows.push((v, jtau / j, s, swap13_duration(v, j)?));
    }
    let mut text = String::new();
    if csv {
        text.push_str("variant,tau_s,s,swap13_s\n");
        for (v, tau, s, swap) in &rows {
            let _ = writeln!(text, "{v},{tau},{s},{swap}");
        }
    } else {
        let _ = writeln!(text, "J = {j} Hz, kappa = 1");
        let _ = writeln!(
            text,
            "{:<16}{:>10}{:>10}{:>10}{:>10}",
            "", "A", "B", "C", "D"
        );
        let line = |label: &str, f: &dyn Fn(&Table1Row) -> String| {
            let mut l = format!("{label:<16}");
            for r in &rows {
                let _ = write!(l, "{:>10}", f(r));
            }
            l
        };
        let _ = writeln!(
            text,
            "{}",
            line("tau (ms)", &|r| format!("{:.2}", r.1 * 1e3))
        );
        let _ = writeln!(text, "{}", line("s(1)", &|r| format!("{:.3}", r.2)));
        let _ = writeln!(
            text,
            "{}",
            line("SWAP(1,3) (ms)", &|r| format!("{:.1}", r.3 * 1e3))
        );
        let _ = writeln!(
            text,
            "direct SWAP {:.1} ms; SWAP(1,3) via three direct SWAPs {:.1} ms; optimal/conventional {:.3}",
            swaps.direct * 1e3,
            swaps.conventional13 * 1e3,
            swaps.ratio()
        );
        let ms: Vec<String> = rows.iter().map(|r| format!("{:.1}", r.3 * 1e3)).collect();
        let _ = writeln!(text, "swap13_ms,{}", ms.join(","));
    }
    emit(&text, None, out)
}

pub fn curves_csv(kappas: &[f64]) -> Result<String> {
    let mut text = String::from("kappa,tau_A,tau_B,tau_C,tau_D,s_A,s_B,s_C,s_D,rA,rC,rD\n");
    for &k in kappas {
        let r = fig2_row(k)?;
        let _ = write!(text, "{k}");
        for x in r.tau.iter().chain(&r.s).chain(&r.ratio) {
            let _ = write!(text, ",{x}");
        }
        text.push('\n');
    }
    Ok(text)
}

fn cmd_curves(kappa: &str, path: Option<&Path>, out: &mut dyn Write) -> CmdResult {
    let grid = parse_range(kappa, 0.01)?;
    emit(&curves_csv(&grid)?, path, out)
}

pub fn eta_sweep_csv(v: Variant, kappas: &[f64], sc: &Scenario) -> Result<String> {
    let mut text = String::from("variant,kappa,tau_s,eta13\n");
    if kappas.is_empty() {
        return Ok(text);
    }
    let curve = eta_curve(v, kappas, &sc.system, &sc.settings, sc.design_j, &sc.build)?;
    for p in curve {
        let _ = writeln!(text, "{v},{},{},{}", p.kappa, p.tau, p.eta);
    }
    Ok(text)
}

fn cmd_eta_sweep(
    v: Variant,
    mode: ModeArg,
    kappa: &str,
    config: Option<&Path>,
    path: Option<&Path>,
    out: &mut dyn Write,
) -> CmdResult {
    let mode = match mode {
        ModeArg::Ideal => PulseMode::Ideal,
        ModeArg::Realistic => PulseMode::Realistic,
    };
    let mut sc = Scenario::for_mode(mode);
    if let Some(cfg) = config {
        let text = fs::read_to_string(cfg)
            .map_err(|e| Failure::Usage(format!("{}: {e}", cfg.display())))?;
        sc = apply_config(sc, &text)?;
    }
    let grid = parse_range(kappa, 0.05)?;
    emit(&eta_sweep_csv(v, &grid, &sc)?, path, out)
}

fn cmd_compile(args: &CompileArgs, out: &mut dyn Write) -> CmdResult {
    let v = args.variant.0;
    if args.n.is_some() && !(args.broadband && v == Variant::D) {
        return Err(Failure::Usage(
            "--n applies to --variant D with --broadband".into(),
        ));
    }
    let scheme = BroadbandScheme {
        segments: args.n,
        ..BroadbandScheme::default()
    };
    let p = match (args.swap, args.broadband) {
        (false, false) => build_uzzz(v, args.kappa, args.j)?,
        (false, true) => broadband_uzzz(v, args.kappa, args.j, &scheme)?,
        (true, false) => build_swap13(v, args.kappa, args.j)?,
        (true, true) => broadband::broadband_swap13(v, args.kappa, args.j, &scheme)?,
    };
    emit(&serialize_program(&p), args.out.as_deref(), out)
}

// ---------------------------------------------------------------------------
// Verification suites
// ---------------------------------------------------------------------------

/// One oracle comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: String,
    pub pass: bool,
}

impl Check {
    fn at_least(name: impl Into<String>, value: f64, min: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance: format!(">= {min:e}"),
            pass: value >= min,
        }
    }

    fn at_most(name: impl Into<String>, value: f64, max: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance: format!("<= {max:e}"),
            pass: value <= max,
        }
    }

    fn near(name: impl Into<String>, value: f64, want: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance: format!("{want} +/- {tol:e}"),
            pass: (value - want).abs() <= tol,
        }
    }
}

pub const SUITES: [&str; 4] = ["identities", "swap", "broadband", "limits"];

pub fn run_suite(suite: &str) -> Result<Vec<Check>> {
    match suite {
        "identities" => suite_identities(),
        "swap" => suite_swap(),
        "broadband" => suite_broadband(),
        "limits" => Ok(suite_limits()),
        other => Err(Error::Settings(format!(
            "unknown suite '{other}' (expected one of {})",
            SUITES.join(", ")
        ))),
    }
}

fn suite_identities() -> Result<Vec<Check>> {
    const J: f64 = 88.0;
    let sys = SpinSystem::chain(J);
    let ideal = SimulationSettings::ideal();
    let mut checks = Vec::new();
    for v in Variant::ALL {
        let mut worst = f64::INFINITY;
        for i in 1..=20 {
            let kappa = i as f64 / 10.0;
            let u = propagator_of(&build_uzzz(v, kappa, J)?, &sys, &ideal)?;
            let target = spinsys::target_trilinear(
                spinsys::Axis::Z,
                spinsys::Axis::Z,
                spinsys::Axis::Z,
                kappa,
            );
            worst = worst.min(fidelity(&u, &target)?);
        }
        checks.push(Check::at_least(
            format!("U_zzz {v} min fidelity, kappa 0.1..2.0"),
            worst,
            1.0 - 1e-9,
        ));
    }
    Ok(checks)
}

fn suite_swap() -> Result<Vec<Check>> {
    use spinsys::{swap13_product, swap13_target, target_trilinear, Axis};
    const J: f64 = 88.0;
    let sys = SpinSystem::chain(J);
    let ideal = SimulationSettings::ideal();
    let mut checks = vec![Check::at_least(
        "trilinear product vs SWAP(1,3)",
        fidelity(&swap13_product(), &swap13_target())?,
        1.0 - 1e-10,
    )];
    let factors = [
        target_trilinear(Axis::Z, Axis::Z, Axis::Z, 1.0),
        target_trilinear(Axis::Y, Axis::Z, Axis::Y, 1.0),
        target_trilinear(Axis::X, Axis::Z, Axis::X, 1.0),
    ];
    let mut comm = 0.0f64;
    for a in 0..3 {
        for b in a + 1..3 {
            comm = comm.max(factors[a].commutator(&factors[b]).max_abs());
        }
    }
    checks.push(Check::at_most(
        "max commutator of trilinear factors",
        comm,
        1e-10,
    ));
    let rho0 = crate::engine::DensityOperator::new(spinsys::op(Spin::ONE, Axis::X).clone())?;
    for v in Variant::ALL {
        let p = build_swap13(v, 1.0, J)?;
        let u = propagator_of(&p, &sys, &ideal)?;
        checks.push(Check::at_least(
            format!("SWAP(1,3) {v} fidelity"),
            fidelity(&u, &swap13_target())?,
            1.0 - 1e-9,
        ));
        let rho = crate::engine::evolve(&rho0, &p, &sys, &ideal)?;
        checks.push(Check::near(
            format!("SWAP(1,3) {v} eta13"),
            metrics::transfer_efficiency(&rho),
            1.0,
            1e-9,
        ));
    }
    Ok(checks)
}

fn suite_broadband() -> Result<Vec<Check>> {
    use spinsys::{target_trilinear, Axis};
    const J: f64 = 88.0;
    let sys = SpinSystem::chain(J).with_offsets([200.0, -300.0, 500.0]);
    let ideal = SimulationSettings::ideal();
    let target = target_trilinear(Axis::Z, Axis::Z, Axis::Z, 1.0);
    let scheme = BroadbandScheme::default();
    let mut checks = Vec::new();
    for v in [Variant::A, Variant::C] {
        let p = broadband_uzzz(v, 1.0, J, &scheme)?;
        let f = fidelity(&propagator_of(&p, &sys, &ideal)?, &target)?;
        checks.push(Check::at_least(
            format!("broadband {v} fidelity, offsets 200/-300/500 Hz"),
            f,
            0.999,
        ));
    }
    let p = broadband::broadband_geodesic(1.0, J, &BroadbandScheme::with_segments(64))?;
    let f = fidelity(&propagator_of(&p, &sys, &ideal)?, &target)?;
    checks.push(Check::at_least(
        "broadband D (n=64) fidelity, offsets 200/-300/500 Hz",
        f,
        0.999,
    ));

    let on_res = SpinSystem::chain(J);
    let base = build_uzzz(Variant::D, 1.0, J)?;
    let mut errs = Vec::new();
    for n in [8usize, 16, 32, 64] {
        let u = propagator_of(&broadband::dante_discretize(&base, n)?, &on_res, &ideal)?;
        errs.push(1.0 - fidelity(&u, &target)?);
    }
    checks.push(Check::at_most(
        "DANTE error ratio n=64 / n=8",
        errs[3] / errs[0],
        1.0 - f64::EPSILON,
    ));
    let slope = (errs[3].ln() - errs[0].ln()) / (64f64.ln() - 8f64.ln());
    checks.push(Check::at_most("DANTE log-log error slope", slope, -1.0));
    Ok(checks)
}

fn suite_limits() -> Vec<Check> {
    let mut worst = f64::NEG_INFINITY;
    for i in 1..=200 {
        let kappa = i as f64 / 200.0;
        let opt = theoretical_limit(kappa).0;
        let best = [Variant::A, Variant::B, Variant::C]
            .iter()
            .map(|&v| duration_scaling(v, kappa).0)
            .fold(f64::INFINITY, f64::min);
        worst = worst.max(opt - best);
    }
    let s = |v, k| {
        if v == Variant::D {
            theoretical_limit(k).1
        } else {
            duration_scaling(v, k).1
        }
    };
    vec![
        Check::at_most(
            "max J(tau_D - min tau_ABC) over 200 kappa in (0,1]",
            worst,
            0.0,
        ),
        Check::near(
            "s_D/s_A at kappa=1",
            s(Variant::D, 1.0) / s(Variant::A, 1.0),
            1.732,
            1e-3,
        ),
        Check::near(
            "s_D/s_B at kappa=0.01",
            s(Variant::D, 0.01) / s(Variant::B, 0.01),
            10.0,
            0.1,
        ),
        Check::near(
            "s_D/s_C at kappa=0.01",
            s(Variant::D, 0.01) / s(Variant::C, 0.01),
            5.0,
            0.1,
        ),
    ]
}

fn cmd_verify(suite: &str, out: &mut dyn Write) -> CmdResult {
    let checks = run_suite(suite)?;
    let mut text = String::new();
    let mut ok = true;
    for c in &checks {
        ok &= c.pass;
        let _ = writeln!(
            text,
            "{} {}: {} (tolerance {})",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.tolerance
        );
    }
    let _ = writeln!(
        text,
        "{suite}: {}/{} checks passed",
        checks.iter().filter(|c| c.pass).count(),
        checks.len()
    );
    emit(&text, None, out)?;
    if ok {
        Ok(())
    } else {
        Err(Failure::Verify)
    }
}
