//! Pulse programs and their line-oriented text format.
//!
//! ```text
//! #! label=uzzz-B
//! #! kappa=1
//! pulse targets=2 angle=90 phase=y
//! wpulse targets=2 amp=50.8Hz dur=9.84ms phase=-x
//! delay 5.681ms
//! zrot target=2 angle=-90
//! ```
//!
//! Lines starting with `#!` carry `key=value` metadata; any other `#` text is
//! a comment. The serializer picks units per value but always emits a literal
//! that parses back to the identical `f64`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;

use crate::engine::{hard_pulse_width, SimulationSettings};
use crate::error::{Error, Result};
use crate::spinsys::{Spin, SpinSet, SpinSystem};

#[derive(Debug, Clone, PartialEq)]
pub enum PulseEvent {
    /// Instantaneous (ideal mode) rotation by `flip` about the axis at `phase`.
    HardPulse {
        targets: SpinSet,
        flip: f64,
        phase: f64,
    },
    /// rf of fixed amplitude applied for `duration` while free evolution continues.
    WeakPulse {
        targets: SpinSet,
        amplitude: f64,
        duration: f64,
        phase: f64,
    },
    Delay {
        duration: f64,
    },
    /// `exp(−i·angle·I_z)` on one spin; realized by phase bookkeeping.
    ZRotation {
        target: Spin,
        angle: f64,
    },
}

impl PulseEvent {
    pub fn pulse(targets: SpinSet, flip: f64, phase: f64) -> Self {
        PulseEvent::HardPulse {
            targets,
            flip,
            phase,
        }
    }

    pub fn delay(duration: f64) -> Self {
        PulseEvent::Delay { duration }
    }

    pub fn zrot(target: Spin, angle: f64) -> Self {
        PulseEvent::ZRotation { target, angle }
    }

    /// Duration contributed in ideal mode.
    pub fn nominal_duration(&self) -> f64 {
        match *self {
            PulseEvent::Delay { duration } | PulseEvent::WeakPulse { duration, .. } => duration,
            PulseEvent::HardPulse { .. } | PulseEvent::ZRotation { .. } => 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            PulseEvent::HardPulse {
                targets,
                flip,
                phase,
            } => {
                if targets.is_empty() {
                    return Err(Error::EmptyTargets);
                }
                finite(flip, "flip angle")?;
                finite(phase, "phase")
            }
            PulseEvent::WeakPulse {
                targets,
                amplitude,
                duration,
                phase,
            } => {
                if targets.is_empty() {
                    return Err(Error::EmptyTargets);
                }
                finite(amplitude, "amplitude")?;
                finite(duration, "duration")?;
                finite(phase, "phase")?;
                if amplitude < 0.0 {
                    return Err(Error::NegativeAmplitude(amplitude));
                }
                if duration < 0.0 {
                    return Err(Error::NegativeDuration(duration));
                }
                Ok(())
            }
            PulseEvent::Delay { duration } => {
                finite(duration, "duration")?;
                if duration < 0.0 {
                    return Err(Error::NegativeDuration(duration));
                }
                Ok(())
            }
            PulseEvent::ZRotation { angle, .. } => finite(angle, "angle"),
        }
    }
}

fn finite(x: f64, what: &'static str) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

/// An ordered list of events plus descriptive metadata.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PulseProgram {
    pub label: String,
    pub kappa: Option<f64>,
    /// Free-form `key=value` annotations (transformation parameters,
    /// receiver phases). Kept in insertion order.
    pub metadata: Vec<(String, String)>,
    events: Vec<PulseEvent>,
}

impl PulseProgram {
    pub fn new(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            ..Self::default()
        }
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = Some(kappa);
        self
    }

    pub fn events(&self) -> &[PulseEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Appends an event after validating it.
    pub fn push(&mut self, event: PulseEvent) -> Result<()> {
        event.validate()?;
        self.events.push(event);
        Ok(())
    }

    pub(crate) fn push_unchecked(&mut self, event: PulseEvent) {
        debug_assert!(event.validate().is_ok(), "{event:?}");
        self.events.push(event);
    }

    pub fn pulse(&mut self, targets: SpinSet, flip: f64, phase: f64) -> &mut Self {
        self.push_unchecked(PulseEvent::pulse(targets, flip, phase));
        self
    }

    pub fn delay(&mut self, duration: f64) -> &mut Self {
        self.push_unchecked(PulseEvent::delay(duration));
        self
    }

    pub fn zrot(&mut self, target: Spin, angle: f64) -> &mut Self {
        self.push_unchecked(PulseEvent::zrot(target, angle));
        self
    }

    pub fn extend_from(&mut self, other: &PulseProgram) {
        self.events.extend(other.events.iter().cloned());
    }

    /// `self` followed by `other` in time.
    pub fn concat(&self, other: &PulseProgram) -> PulseProgram {
        let mut out = self.clone();
        out.extend_from(other);
        out
    }

    pub fn set_meta(&mut self, key: impl Into<String>, value: impl Into<String>) {
        let key = key.into();
        let value = value.into();
        match self.metadata.iter_mut().find(|(k, _)| *k == key) {
            Some(slot) => slot.1 = value,
            None => self.metadata.push((key, value)),
        }
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// Sum of delays and weak-pulse durations; hard pulses count as zero.
    pub fn nominal_duration(&self) -> f64 {
        self.events.iter().map(PulseEvent::nominal_duration).sum()
    }

    pub(crate) fn from_parts(
        label: String,
        kappa: Option<f64>,
        metadata: Vec<(String, String)>,
        events: Vec<PulseEvent>,
    ) -> Self {
        Self {
            label,
            kappa,
            metadata,
            events,
        }
    }
}

/// Duration of `p` under `settings`. Realistic mode adds the width of every
/// hard pulse.
pub fn total_duration(
    p: &PulseProgram,
    sys: &SpinSystem,
    settings: &SimulationSettings,
) -> Result<f64> {
    let mut total = 0.0;
    for event in p.events() {
        total += match *event {
            PulseEvent::HardPulse { targets, flip, .. } if settings.is_realistic() => {
                hard_pulse_width(targets, flip, sys, settings)?
            }
            ref e => e.nominal_duration(),
        };
    }
    Ok(total)
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

const TIME_UNITS: &[(&str, f64)] = &[("us", 1e-6), ("ms", 1e-3), ("s", 1.0)];
const FREQ_UNITS: &[(&str, f64)] = &[("kHz", 1e3), ("Hz", 1.0)];

struct Cursor<'a> {
    line: usize,
    text: &'a str,
}

impl Cursor<'_> {
    fn err(&self, token: &str, message: impl Into<String>) -> Error {
        // Tokens are slices of the line, so pointer arithmetic gives the column.
        let offset = (token.as_ptr() as usize).saturating_sub(self.text.as_ptr() as usize);
        let column = if offset <= self.text.len() {
            offset + 1
        } else {
            1
        };
        Error::Syntax {
            line: self.line,
            column,
            message: message.into(),
        }
    }
}

fn parse_number(cur: &Cursor, token: &str) -> Result<f64> {
    let v: f64 = token
        .parse()
        .map_err(|_| cur.err(token, format!("invalid number '{token}'")))?;
    if !v.is_finite() {
        return Err(cur.err(token, "non-finite number"));
    }
    Ok(v)
}

fn parse_with_units(
    cur: &Cursor,
    token: &str,
    units: &[(&str, f64)],
    bare_scale: Option<f64>,
) -> Result<f64> {
    for &(suffix, scale) in units {
        if let Some(num) = token.strip_suffix(suffix) {
            // "ms" also ends in "s"; make sure the numeric part really is a number.
            if let Ok(v) = parse_number(cur, num) {
                return Ok(v * scale);
            }
        }
    }
    match bare_scale {
        Some(scale) => Ok(parse_number(cur, token)? * scale),
        None => Err(cur.err(token, format!("missing unit in '{token}'"))),
    }
}

fn parse_time(cur: &Cursor, token: &str) -> Result<f64> {
    let t = parse_with_units(cur, token, TIME_UNITS, None)?;
    if t < 0.0 {
        return Err(cur.err(token, format!("negative duration '{token}'")));
    }
    Ok(t)
}

fn parse_angle(cur: &Cursor, token: &str) -> Result<f64> {
    if let Some(num) = token.strip_suffix("rad") {
        return parse_number(cur, num);
    }
    Ok(parse_number(cur, token.strip_suffix("deg").unwrap_or(token))?.to_radians())
}

fn parse_phase(cur: &Cursor, token: &str) -> Result<f64> {
    match token {
        "x" | "+x" => Ok(0.0),
        "y" | "+y" => Ok(FRAC_PI_2),
        "-x" => Ok(PI),
        "-y" => Ok(-FRAC_PI_2),
        _ => parse_angle(cur, token),
    }
}

fn parse_spin(cur: &Cursor, token: &str) -> Result<Spin> {
    let k: usize = token
        .parse()
        .map_err(|_| cur.err(token, format!("invalid spin index '{token}'")))?;
    Spin::new(k).map_err(|_| cur.err(token, format!("unknown spin index {k}")))
}

fn parse_targets(cur: &Cursor, token: &str) -> Result<SpinSet> {
    let mut set = SpinSet::EMPTY;
    for part in token.split(',') {
        set = set.with(parse_spin(cur, part)?);
    }
    Ok(set)
}

/// `key=value` fields following the keyword.
fn fields<'a>(
    cur: &Cursor,
    tokens: &[&'a str],
    allowed: &[&str],
) -> Result<Vec<(&'a str, &'a str)>> {
    let mut out: Vec<(&str, &str)> = Vec::new();
    for &tok in tokens {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| cur.err(tok, format!("expected key=value, found '{tok}'")))?;
        if !allowed.contains(&k) {
            return Err(cur.err(tok, format!("unknown field '{k}'")));
        }
        if out.iter().any(|(seen, _)| *seen == k) {
            return Err(cur.err(tok, format!("duplicate field '{k}'")));
        }
        out.push((k, v));
    }
    Ok(out)
}

fn required<'a>(cur: &Cursor, f: &[(&str, &'a str)], key: &str, at: &str) -> Result<&'a str> {
    f.iter()
        .find(|(k, _)| *k == key)
        .map(|(_, v)| *v)
        .ok_or_else(|| cur.err(at, format!("missing field '{key}'")))
}

fn parse_event(cur: &Cursor, tokens: &[&str]) -> Result<PulseEvent> {
    let keyword = tokens[0];
    let rest = &tokens[1..];
    match keyword {
        "pulse" => {
            let f = fields(cur, rest, &["targets", "angle", "phase"])?;
            Ok(PulseEvent::HardPulse {
                targets: parse_targets(cur, required(cur, &f, "targets", keyword)?)?,
                flip: parse_angle(cur, required(cur, &f, "angle", keyword)?)?,
                phase: parse_phase(cur, required(cur, &f, "phase", keyword)?)?,
            })
        }
        "wpulse" => {
            let f = fields(cur, rest, &["targets", "amp", "dur", "phase"])?;
            let amp_tok = required(cur, &f, "amp", keyword)?;
            let amplitude = parse_with_units(cur, amp_tok, FREQ_UNITS, Some(1.0))?;
            if amplitude < 0.0 {
                return Err(cur.err(amp_tok, "negative amplitude"));
            }
            Ok(PulseEvent::WeakPulse {
                targets: parse_targets(cur, required(cur, &f, "targets", keyword)?)?,
                amplitude,
                duration: parse_time(cur, required(cur, &f, "dur", keyword)?)?,
                phase: parse_phase(cur, required(cur, &f, "phase", keyword)?)?,
            })
        }
        "delay" => match rest {
            [t] => Ok(PulseEvent::Delay {
                duration: parse_time(cur, t)?,
            }),
            [] => Err(cur.err(keyword, "delay needs a duration")),
            [_, extra, ..] => Err(cur.err(extra, "unexpected token")),
        },
        "zrot" => {
            let f = fields(cur, rest, &["target", "angle"])?;
            Ok(PulseEvent::ZRotation {
                target: parse_spin(cur, required(cur, &f, "target", keyword)?)?,
                angle: parse_angle(cur, required(cur, &f, "angle", keyword)?)?,
            })
        }
        other => Err(cur.err(other, format!("unknown event '{other}'"))),
    }
}

/// Parses the text format into a program.
pub fn parse_program(text: &str) -> Result<PulseProgram> {
    let mut label = String::new();
    let mut kappa = None;
    let mut metadata = Vec::new();
    let mut events = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let cur = Cursor {
            line: idx + 1,
            text: raw,
        };
        let trimmed = raw.trim();
        if let Some(meta) = trimmed.strip_prefix("#!") {
            let meta = meta.trim();
            let (k, v) = meta
                .split_once('=')
                .ok_or_else(|| cur.err(meta, "metadata must be key=value"))?;
            let (k, v) = (k.trim(), v.trim());
            match k {
                "label" => label = v.to_string(),
                "kappa" => kappa = Some(parse_number(&cur, v)?),
                _ => metadata.push((k.to_string(), v.to_string())),
            }
            continue;
        }
        let content = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        let event = parse_event(&cur, &tokens)?;
        event
            .validate()
            .map_err(|e| cur.err(tokens[0], e.to_string()))?;
        events.push(event);
    }
    Ok(PulseProgram::from_parts(label, kappa, metadata, events))
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

/// Shortest decimal `d` with `d * scale == value` exactly, if one exists near
/// `value / scale`.
fn exact_in_unit(value: f64, scale: f64) -> Option<String> {
    if scale == 1.0 {
        return Some(format!("{value}"));
    }
    let mut candidate = value / scale;
    if candidate * scale == value {
        return Some(format!("{candidate}"));
    }
    // Walk a few ulps either side.
    for dir in [1.0f64, -1.0] {
        candidate = value / scale;
        for _ in 0..4 {
            candidate = next_toward(candidate, dir);
            if candidate * scale == value {
                return Some(format!("{candidate}"));
            }
        }
    }
    None
}

fn next_toward(x: f64, dir: f64) -> f64 {
    if x == 0.0 {
        return dir * f64::from_bits(1);
    }
    let bits = x.to_bits();
    let up = (x > 0.0) == (dir > 0.0);
    f64::from_bits(if up { bits + 1 } else { bits - 1 })
}

fn format_time(t: f64) -> String {
    let preferred = if t == 0.0 || t >= 1.0 {
        "s"
    } else if t >= 1e-3 {
        "ms"
    } else {
        "us"
    };
    for &(suffix, scale) in TIME_UNITS.iter().filter(|(s, _)| *s == preferred) {
        if let Some(num) = exact_in_unit(t, scale) {
            return format!("{num}{suffix}");
        }
    }
    format!("{t}s")
}

fn format_freq(f: f64) -> String {
    if f >= 1e3 {
        if let Some(num) = exact_in_unit(f, 1e3) {
            return format!("{num}kHz");
        }
    }
    format!("{f}Hz")
}

/// Degrees when the literal converts back exactly, radians otherwise.
fn format_angle(rad: f64) -> String {
    let mut candidate = rad.to_degrees();
    if candidate.to_radians() == rad {
        return format!("{candidate}");
    }
    for dir in [1.0f64, -1.0] {
        candidate = rad.to_degrees();
        for _ in 0..4 {
            candidate = next_toward(candidate, dir);
            if candidate.to_radians() == rad {
                return format!("{candidate}");
            }
        }
    }
    format!("{rad}rad")
}

fn format_phase(phase: f64) -> String {
    if phase == 0.0 {
        "x".into()
    } else if phase == FRAC_PI_2 {
        "y".into()
    } else if phase == PI {
        "-x".into()
    } else if phase == -FRAC_PI_2 {
        "-y".into()
    } else {
        format_angle(phase)
    }
}

/// Deterministic text rendering of a program.
pub fn serialize_program(p: &PulseProgram) -> String {
    let mut out = String::new();
    if !p.label.is_empty() {
        let _ = writeln!(out, "#! label={}", p.label);
    }
    if let Some(k) = p.kappa {
        let _ = writeln!(out, "#! kappa={k}");
    }
    for (k, v) in &p.metadata {
        let _ = writeln!(out, "#! {k}={v}");
    }
    for e in p.events() {
        let _ = match *e {
            PulseEvent::HardPulse {
                targets,
                flip,
                phase,
            } => writeln!(
                out,
                "pulse targets={targets} angle={} phase={}",
                format_angle(flip),
                format_phase(phase)
            ),
            PulseEvent::WeakPulse {
                targets,
                amplitude,
                duration,
                phase,
            } => writeln!(
                out,
                "wpulse targets={targets} amp={} dur={} phase={}",
                format_freq(amplitude),
                format_time(duration),
                format_phase(phase)
            ),
            PulseEvent::Delay { duration } => writeln!(out, "delay {}", format_time(duration)),
            PulseEvent::ZRotation { target, angle } => {
                writeln!(out, "zrot target={target} angle={}", format_angle(angle))
            }
        };
    }
    out
}
