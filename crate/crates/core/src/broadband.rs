//! Program-to-program transformations that make the ideal sequences robust
//! against frequency offsets, plus the phase bookkeeping that goes with them.
//!
//! Offset refocusing splits every delay with a π pulse on all three spins.
//! Such a group inverts every `I_z` and so keeps the bilinear couplings while
//! reversing offset evolution. The groups are not undone individually; the
//! transformation tracks the toggling frame they create and rewrites the phase
//! of every later pulse so the program as a whole is unchanged apart from the
//! removed offset evolution.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::engine::{hard_pulse_width, SimulationSettings};
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::pulseprog::{PulseEvent, PulseProgram};
use crate::sequences::{build_swap13, build_uzzz, geodesic_weak_flip, theoretical_limit, Variant};
use crate::spinsys::{z_rotation, Spin, SpinSet, SpinSystem, DIM, TWO_PI};

/// Phase cycle for the inserted π groups and the DANTE segment count.
#[derive(Debug, Clone, PartialEq)]
pub struct BroadbandScheme {
    /// Phases (rad) taken by consecutive π groups, repeated cyclically.
    pub cycle: Vec<f64>,
    /// DANTE segment count `n = 4m`; `None` picks the smallest `n` with
    /// `Δ ≤ 1/(20J)`.
    pub segments: Option<usize>,
}

impl Default for BroadbandScheme {
    fn default() -> Self {
        Self {
            cycle: vec![0.0, PI, PI, 0.0],
            segments: None,
        }
    }
}

impl BroadbandScheme {
    pub fn with_segments(n: usize) -> Self {
        Self {
            segments: Some(n),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.cycle.is_empty() {
            return Err(Error::Settings("empty refocusing phase cycle".into()));
        }
        if let Some(n) = self.segments {
            check_segments(n)?;
        }
        Ok(())
    }

    fn describe_cycle(&self) -> String {
        self.cycle
            .iter()
            .map(|&p| phase_label(p))
            .collect::<Vec<_>>()
            .join(",")
    }
}

fn phase_label(p: f64) -> String {
    if p == 0.0 {
        "x".into()
    } else if p == PI {
        "-x".into()
    } else if p == FRAC_PI_2 {
        "y".into()
    } else if p == -FRAC_PI_2 {
        "-y".into()
    } else {
        format!("{}deg", p.to_degrees())
    }
}

fn check_segments(n: usize) -> Result<()> {
    if n == 0 || !n.is_multiple_of(4) {
        Err(Error::DanteSegments(n))
    } else {
        Ok(())
    }
}

/// Wraps an angle into (−π, π], leaving values already in range untouched.
fn wrap(phase: f64) -> f64 {
    if phase > -PI && phase <= PI {
        return phase;
    }
    let r = phase.rem_euclid(TWO_PI);
    if r > PI {
        r - TWO_PI
    } else {
        r
    }
}

/// Action of the accumulated π groups on transverse phases: `φ ↦ sign·φ + shift`.
#[derive(Debug, Clone, Copy)]
struct ToggleFrame {
    sign: f64,
    shift: f64,
}

impl ToggleFrame {
    fn identity() -> Self {
        Self {
            sign: 1.0,
            shift: 0.0,
        }
    }

    fn phase(&self, phi: f64) -> f64 {
        if self.shift == 0.0 {
            wrap(self.sign * phi)
        } else {
            wrap(self.sign * phi + self.shift)
        }
    }

    fn z_angle(&self, angle: f64) -> f64 {
        self.sign * angle
    }

    /// A π rotation about the axis at `psi` acts on the plane as a reflection.
    fn after_pi(&self, psi: f64) -> Self {
        Self {
            sign: -self.sign,
            shift: (2.0 * psi - self.shift).rem_euclid(TWO_PI),
        }
    }
}

/// Inserts a π group on all spins at the midpoint of every delay and rewrites
/// later pulse phases for the toggling frame. A trailing π group is appended
/// when the number of groups leaves the frame inverted.
pub fn refocus_offsets(p: &PulseProgram, scheme: &BroadbandScheme) -> Result<PulseProgram> {
    scheme.validate()?;
    if p.events()
        .iter()
        .any(|e| matches!(e, PulseEvent::WeakPulse { .. }))
    {
        return Err(Error::WeakPulsePresent);
    }
    let mut out = PulseProgram::new(p.label.clone());
    out.kappa = p.kappa;
    out.metadata = p.metadata.clone();

    let mut frame = ToggleFrame::identity();
    let mut groups = 0usize;
    for event in p.events() {
        match *event {
            PulseEvent::Delay { duration } if duration > 0.0 => {
                let psi = scheme.cycle[groups % scheme.cycle.len()];
                groups += 1;
                out.delay(duration / 2.0)
                    .pulse(SpinSet::ALL, PI, psi)
                    .delay(duration / 2.0);
                frame = frame.after_pi(psi);
            }
            PulseEvent::Delay { .. } => out.push_unchecked(event.clone()),
            PulseEvent::HardPulse {
                targets,
                flip,
                phase,
            } => {
                out.pulse(targets, flip, frame.phase(phase));
            }
            PulseEvent::ZRotation { target, angle } => {
                out.zrot(target, frame.z_angle(angle));
            }
            PulseEvent::WeakPulse { .. } => unreachable!("rejected above"),
        }
    }

    if frame.sign < 0.0 {
        // The frame is a π rotation about shift/2; repeating it closes the cycle.
        out.pulse(SpinSet::ALL, PI, wrap(frame.shift / 2.0));
        groups += 1;
    } else if frame.shift != 0.0 {
        for k in Spin::ALL {
            out.zrot(k, -frame.shift);
        }
    }
    out.set_meta("refocus_cycle", scheme.describe_cycle());
    out.set_meta("refocus_groups", groups.to_string());
    Ok(out)
}

/// Smallest multiple of four with `τ/n ≤ 1/(20J)`.
pub fn default_dante_segments(duration: f64, j: f64) -> usize {
    let max_delta = 1.0 / (20.0 * j);
    let mut n = 4;
    while duration / n as f64 > max_delta {
        n += 4;
    }
    n
}

fn discretize_weak(
    out: &mut PulseProgram,
    targets: SpinSet,
    amplitude: f64,
    duration: f64,
    phase: f64,
    n: usize,
    total_flip: Option<f64>,
) {
    let total = match total_flip {
        Some(f) if amplitude > 0.0 => f,
        _ => TWO_PI * amplitude * duration,
    };
    let flip = total / n as f64;
    let delta = duration / n as f64;
    // Symmetric layout: Δ/2, (pulse, Δ)×(n−1), pulse, Δ/2.
    out.delay(delta / 2.0);
    for i in 0..n {
        out.pulse(targets, flip, phase);
        out.delay(if i + 1 == n { delta / 2.0 } else { delta });
    }
}

/// `total_flip` replaces `2π·ν·τ` when the exact value is known.
fn dante_all(p: &PulseProgram, n: usize, total_flip: Option<f64>) -> Result<PulseProgram> {
    check_segments(n)?;
    let mut out = PulseProgram::new(p.label.clone());
    out.kappa = p.kappa;
    out.metadata = p.metadata.clone();
    for event in p.events() {
        match *event {
            PulseEvent::WeakPulse {
                targets,
                amplitude,
                duration,
                phase,
            } => discretize_weak(&mut out, targets, amplitude, duration, phase, n, total_flip),
            ref other => out.push_unchecked(other.clone()),
        }
    }
    out.set_meta("dante_segments", n.to_string());
    Ok(out)
}

/// Replaces the single weak pulse of a geodesic element by `n` hard pulses of
/// flip `2π·ν·τ/n` spaced by `Δ = τ/n`.
pub fn dante_discretize(p: &PulseProgram, n: usize) -> Result<PulseProgram> {
    let weak = p
        .events()
        .iter()
        .filter(|e| matches!(e, PulseEvent::WeakPulse { .. }))
        .count();
    if weak != 1 {
        return Err(Error::WeakPulseCount(weak));
    }
    dante_all(p, n, None)
}

fn segments_for(kappa: f64, j: f64, scheme: &BroadbandScheme) -> usize {
    scheme
        .segments
        .unwrap_or_else(|| default_dante_segments(theoretical_limit(kappa).0 / j, j))
}

/// Broadband time-optimal `U_zzz(κ)` element: DANTE-discretized geodesic
/// sequence with a refocusing π group in every delay.
pub fn broadband_geodesic(kappa: f64, j: f64, scheme: &BroadbandScheme) -> Result<PulseProgram> {
    scheme.validate()?;
    let base = build_uzzz(Variant::D, kappa, j)?;
    let n = scheme
        .segments
        .unwrap_or_else(|| default_dante_segments(base.nominal_duration(), j));
    let mut p = refocus_offsets(
        &dante_all(&base, n, Some(geodesic_weak_flip(kappa)))?,
        scheme,
    )?;
    p.label = "uzzz-D-broadband".into();
    Ok(p)
}

/// Broadband version of any `U_zzz(κ)` element.
pub fn broadband_uzzz(
    v: Variant,
    kappa: f64,
    j: f64,
    scheme: &BroadbandScheme,
) -> Result<PulseProgram> {
    if v == Variant::D {
        return broadband_geodesic(kappa, j, scheme);
    }
    let mut p = refocus_offsets(&build_uzzz(v, kappa, j)?, scheme)?;
    p.label = format!("uzzz-{v}-broadband");
    Ok(p)
}

/// Broadband SWAP(1,3) composition. Refocusing runs over the whole program so
/// the π groups of all three elements share one phase cycle.
pub fn broadband_swap13(
    v: Variant,
    kappa: f64,
    j: f64,
    scheme: &BroadbandScheme,
) -> Result<PulseProgram> {
    scheme.validate()?;
    let mut p = build_swap13(v, kappa, j)?;
    if v == Variant::D {
        p = dante_all(
            &p,
            segments_for(kappa, j, scheme),
            Some(geodesic_weak_flip(kappa)),
        )?;
    }
    let mut p = refocus_offsets(&p, scheme)?;
    p.label = format!("swap13-{v}-broadband");
    Ok(p)
}

/// Delay δ of the selective-pulse emulation element: spin 3 must precess by
/// π relative to spin 1 over 2δ, so `δ = 1/(4Δν13)`.
pub fn selective_delay(delta_nu13: f64) -> Result<f64> {
    if delta_nu13 == 0.0 || !delta_nu13.is_finite() {
        return Err(Error::ZeroOffsetDifference);
    }
    Ok(1.0 / (4.0 * delta_nu13.abs()))
}

/// Spin-selective proton rotation built from hard pulses and delays, for
/// spin 1 on resonance and spin 3 shifted by `delta_nu13`:
///
/// `θ/2(1,3) – δ – π(2) – δ – π(2) – θ/2(1,3)`
///
/// The final half pulse is phase-inverted when spin 3 is the target. The
/// offset precession leaves spin 3 with a z-rotation by π, which the fragment
/// undoes with a trailing [`PulseEvent::ZRotation`]; drop that event to see
/// the raw element.
pub fn emulate_selective_pulse(
    target: Spin,
    flip: f64,
    phase: f64,
    delta_nu13: f64,
) -> Result<PulseProgram> {
    if target == Spin::TWO {
        return Err(Error::UnsupportedSelective);
    }
    let is_quarter = (flip.abs() - FRAC_PI_2).abs() < 1e-12;
    let is_half = (flip.abs() - PI).abs() < 1e-12;
    if !(is_quarter || is_half) {
        return Err(Error::UnsupportedSelective);
    }
    let delta = selective_delay(delta_nu13)?;
    let protons = SpinSet::outer();
    let n15 = SpinSet::single(Spin::TWO);
    let last_phase = if target == Spin::ONE {
        phase
    } else {
        wrap(phase + PI)
    };
    let mut p = PulseProgram::new(format!("selective-{target}"));
    p.pulse(protons, flip / 2.0, phase)
        .delay(delta)
        .pulse(n15, PI, 0.0)
        .delay(delta)
        .pulse(n15, PI, 0.0)
        .pulse(protons, flip / 2.0, last_phase)
        .zrot(Spin::THREE, selective_residue(delta_nu13)?);
    p.set_meta("delta_s", format!("{delta}"));
    Ok(p)
}

/// z-rotation that cancels the spin-3 residue of the emulation element.
fn selective_residue(delta_nu13: f64) -> Result<f64> {
    let delta = selective_delay(delta_nu13)?;
    // spin 3 precesses by 2π·Δν·2δ = π (sign follows Δν)
    Ok(TWO_PI * delta_nu13 * 2.0 * delta)
}

/// Replaces every hard pulse addressed to exactly one of spins 1 and 3 by the
/// emulation element.
pub fn expand_selective_pulses(p: &PulseProgram, delta_nu13: f64) -> Result<PulseProgram> {
    let mut out = PulseProgram::new(p.label.clone());
    out.kappa = p.kappa;
    out.metadata = p.metadata.clone();
    for event in p.events() {
        match *event {
            PulseEvent::HardPulse {
                targets,
                flip,
                phase,
            } if targets.len() == 1
                && !targets.contains(Spin::TWO)
                && ((flip.abs() - PI).abs() < 1e-12 || (flip.abs() - FRAC_PI_2).abs() < 1e-12) =>
            {
                let spin = targets.iter().next().expect("one target");
                let phase = if flip < 0.0 { wrap(phase + PI) } else { phase };
                out.extend_from(&emulate_selective_pulse(
                    spin,
                    flip.abs(),
                    phase,
                    delta_nu13,
                )?);
            }
            ref other => out.push_unchecked(other.clone()),
        }
    }
    out.set_meta("selective_emulation_dnu13", format!("{delta_nu13}"));
    Ok(out)
}

/// Result of removing z-rotations by phase bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct ZElimination {
    pub program: PulseProgram,
    /// Accumulated z-rotation per spin (rad); the receiver phase shift that
    /// completes the original propagator.
    pub receiver_phases: [f64; 3],
}

impl ZElimination {
    /// `Π_k exp(−i·a_k·I_kz)`; `original = correction · transformed`.
    pub fn receiver_correction(&self) -> ComplexMatrix {
        receiver_correction(self.receiver_phases)
    }
}

pub fn receiver_correction(phases: [f64; 3]) -> ComplexMatrix {
    let mut u = ComplexMatrix::identity(DIM);
    for (k, &a) in Spin::ALL.iter().zip(&phases) {
        if a != 0.0 {
            u = &z_rotation(*k, a) * &u;
        }
    }
    u
}

/// Removes z-rotations by shifting the phase of every later pulse on the
/// rotated spin by −angle. What remains at the end is reported as a per-spin
/// receiver phase and recorded in the program metadata.
pub fn eliminate_z_rotations(p: &PulseProgram) -> ZElimination {
    let mut acc = [0.0f64; 3];
    let mut out = PulseProgram::new(p.label.clone());
    out.kappa = p.kappa;
    out.metadata = p.metadata.clone();
    let slot = |k: Spin| k.index() - 1;

    for event in p.events() {
        match *event {
            PulseEvent::ZRotation { target, angle } => acc[slot(target)] += angle,
            PulseEvent::Delay { .. } => out.push_unchecked(event.clone()),
            PulseEvent::HardPulse {
                targets,
                flip,
                phase,
            } => {
                // Spins with different accumulated angles need different phases.
                let mut remaining = targets;
                while let Some(first) = remaining.iter().next() {
                    let a = acc[slot(first)];
                    let group = SpinSet::of(
                        &remaining
                            .iter()
                            .filter(|&k| acc[slot(k)] == a)
                            .collect::<Vec<_>>(),
                    );
                    out.pulse(group, flip, wrap(phase - a));
                    remaining = SpinSet::of(
                        &remaining
                            .iter()
                            .filter(|k| !group.contains(*k))
                            .collect::<Vec<_>>(),
                    );
                }
            }
            PulseEvent::WeakPulse {
                targets,
                amplitude,
                duration,
                phase,
            } => {
                let first = targets.iter().next().expect("validated nonempty");
                let a = acc[slot(first)];
                if targets.iter().all(|k| acc[slot(k)] == a) {
                    out.push_unchecked(PulseEvent::WeakPulse {
                        targets,
                        amplitude,
                        duration,
                        phase: wrap(phase - a),
                    });
                } else {
                    // A concurrent pulse cannot carry per-spin phases; keep the rotations.
                    for k in targets.iter() {
                        if acc[slot(k)] != 0.0 {
                            out.zrot(k, acc[slot(k)]);
                            acc[slot(k)] = 0.0;
                        }
                    }
                    out.push_unchecked(event.clone());
                }
            }
        }
    }
    for k in Spin::ALL {
        let a = acc[slot(k)];
        if a != 0.0 {
            out.set_meta(
                format!("receiver_phase_{k}"),
                format!("{}deg", a.to_degrees()),
            );
        }
    }
    ZElimination {
        program: out,
        receiver_phases: acc,
    }
}

/// Shortens the delays around each hard pulse by the pulse width (half on
/// each side) so that, with finite pulses, the overall timing matches the
/// ideal program. Delays are clamped at zero; any shortfall is recorded as
/// `timing_deficit_s` in the metadata. No-op in ideal mode.
pub fn compensate_pulse_widths(
    p: &PulseProgram,
    sys: &SpinSystem,
    settings: &SimulationSettings,
) -> Result<PulseProgram> {
    if !settings.is_realistic() {
        return Ok(p.clone());
    }
    let events = p.events();
    let mut delays: Vec<Option<f64>> = events
        .iter()
        .map(|e| match *e {
            PulseEvent::Delay { duration } => Some(duration),
            _ => None,
        })
        .collect();
    let barrier = |e: &PulseEvent| matches!(e, PulseEvent::WeakPulse { .. });

    let mut deficit = 0.0;
    for (i, event) in events.iter().enumerate() {
        let PulseEvent::HardPulse { targets, flip, .. } = *event else {
            continue;
        };
        let w = hard_pulse_width(targets, flip, sys, settings)?;
        if w == 0.0 {
            continue;
        }
        let before = (0..i)
            .rev()
            .take_while(|&k| !barrier(&events[k]))
            .find(|&k| delays[k].is_some());
        let after = (i + 1..events.len())
            .take_while(|&k| !barrier(&events[k]))
            .find(|&k| delays[k].is_some());
        let shares: Vec<(usize, f64)> = match (before, after) {
            (Some(b), Some(a)) => vec![(b, w / 2.0), (a, w / 2.0)],
            (Some(b), None) => vec![(b, w)],
            (None, Some(a)) => vec![(a, w)],
            (None, None) => {
                deficit += w;
                vec![]
            }
        };
        for (k, share) in shares {
            let d = delays[k].as_mut().expect("delay slot");
            let taken = share.min(*d);
            *d -= taken;
            deficit += share - taken;
        }
    }

    let mut out = PulseProgram::new(p.label.clone());
    out.kappa = p.kappa;
    out.metadata = p.metadata.clone();
    for (event, d) in events.iter().zip(&delays) {
        match d {
            Some(t) => out.delay(*t),
            None => {
                out.push_unchecked(event.clone());
                &mut out
            }
        };
    }
    out.set_meta("width_compensated", "true");
    if deficit > 0.0 {
        out.set_meta("timing_deficit_s", format!("{deficit}"));
    }
    Ok(out)
}

/// Options for turning a SWAP(1,3) request into the program that is actually
/// simulated.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SwapBuild {
    pub scheme: BroadbandScheme,
    /// Apply offset refocusing (and DANTE for sequence D). Defaults to on in
    /// realistic mode.
    pub broadband: Option<bool>,
    /// Replace single-proton pulses by the hard-pulse emulation element.
    pub emulate_selective: bool,
}

/// SWAP(1,3) program as simulated under `settings`: the ideal composition in
/// ideal mode; broadband, width-compensated in realistic mode.
pub fn prepare_swap13(
    v: Variant,
    kappa: f64,
    design_j: f64,
    sys: &SpinSystem,
    settings: &SimulationSettings,
    build: &SwapBuild,
) -> Result<PulseProgram> {
    let broadband = build.broadband.unwrap_or(settings.is_realistic());
    let mut p = if broadband {
        broadband_swap13(v, kappa, design_j, &build.scheme)?
    } else {
        build_swap13(v, kappa, design_j)?
    };
    if build.emulate_selective {
        let dnu = sys.offset(Spin::THREE) - sys.offset(Spin::ONE);
        p = expand_selective_pulses(&p, dnu)?;
    }
    compensate_pulse_widths(&p, sys, settings)
}
