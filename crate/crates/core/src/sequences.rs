//! Ideal pulse sequences for `U_zzz(κ)`, their durations, and the indirect
//! SWAP(1,3) built from three trilinear propagators.
//!
//! All constructors target the on-resonance chain `J12 = J23 = J`,
//! `J13 = 0` and emit delta pulses. Pulse trains are written in time order;
//! the propagator identities they realize read right to left.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::pulseprog::{PulseEvent, PulseProgram};
use crate::spinsys::{Spin, SpinSet};

const X: f64 = 0.0;
const Y: f64 = FRAC_PI_2;
const MX: f64 = PI;
const MY: f64 = -FRAC_PI_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Selective decoupling.
    A,
    /// Conventional sequence without decoupling.
    B,
    /// Improved sequence without decoupling.
    C,
    /// Time-optimal geodesic sequence.
    D,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::A, Variant::B, Variant::C, Variant::D];
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Variant::A => "A",
            Variant::B => "B",
            Variant::C => "C",
            Variant::D => "D",
        };
        f.write_str(s)
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "A" | "a" => Ok(Variant::A),
            "B" | "b" => Ok(Variant::B),
            "C" | "c" => Ok(Variant::C),
            "D" | "d" => Ok(Variant::D),
            other => Err(format!("unknown variant '{other}' (expected A, B, C or D)")),
        }
    }
}

fn check_kappa(kappa: f64) -> Result<()> {
    if (0.0..=2.0).contains(&kappa) {
        Ok(())
    } else {
        Err(Error::KappaOutOfRange(kappa))
    }
}

fn check_j(j: f64) -> Result<()> {
    if j.is_finite() && j > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositiveCoupling(j))
    }
}

/// `(J·τ, s)` for variant `v`: duration in units of 1/J and scaling factor.
/// `s·J·τ = κ` for every variant.
pub fn duration_scaling(v: Variant, kappa: f64) -> (f64, f64) {
    let tau = match v {
        Variant::A => (2.0 + kappa) / 2.0,
        Variant::B => 1.0,
        Variant::C => (1.0 + kappa) / 2.0,
        Variant::D => (kappa * (4.0 - kappa)).sqrt() / 2.0,
    };
    let s = if tau == 0.0 { 0.0 } else { kappa / tau };
    (tau, s)
}

/// Folds κ onto `[0, 1]` using `τ*(2n ± κ) = τ*(κ)`.
pub fn reduce_kappa(kappa: f64) -> f64 {
    let r = kappa.rem_euclid(2.0);
    if r > 1.0 {
        2.0 - r
    } else {
        r
    }
}

/// Minimum time (units of 1/J) and maximum scaling factor for `U(κ)`.
pub fn theoretical_limit(kappa: f64) -> (f64, f64) {
    let k = reduce_kappa(kappa);
    let root = (k * (4.0 - k)).sqrt();
    let s = if root == 0.0 { 0.0 } else { 2.0 * k / root };
    (root / 2.0, s)
}

/// Weak-pulse amplitude (Hz) of the geodesic sequence; `None` at κ = 0 where
/// the pulse degenerates to an instantaneous 2π rotation.
pub fn geodesic_amplitude(kappa: f64, j: f64) -> Option<f64> {
    let root = (kappa * (4.0 - kappa)).sqrt();
    (root > 0.0).then(|| (2.0 - kappa) * j / root)
}

/// Total flip `2π·ν·τ* = π(2 − κ)` of the geodesic weak pulse, free of the
/// rounding in the amplitude–duration product.
pub fn geodesic_weak_flip(kappa: f64) -> f64 {
    PI * (2.0 - kappa)
}

fn spin2() -> SpinSet {
    SpinSet::single(Spin::TWO)
}

/// Delay `d` during which only the coupling between the spins other than
/// `refocused` acts: `d/2 – π_x(refocused) – d/2 – π_−x(refocused)`.
fn selective_coupling(p: &mut PulseProgram, d: f64, refocused: Spin) {
    let s = SpinSet::single(refocused);
    p.delay(d / 2.0)
        .pulse(s, PI, X)
        .delay(d / 2.0)
        .pulse(s, PI, MX);
}

fn sequence_a(p: &mut PulseProgram, kappa: f64, j: f64) {
    let half = 1.0 / (2.0 * j);
    // V_A⁻¹ with exp(+iπ I1zI2z) realized by inverting I2z around the block
    p.pulse(spin2(), FRAC_PI_2, X);
    selective_coupling(p, half, Spin::THREE);
    p.pulse(spin2(), PI, MX).pulse(spin2(), FRAC_PI_2, MY);
    selective_coupling(p, kappa * half, Spin::ONE);
    // V_A
    p.pulse(spin2(), FRAC_PI_2, Y);
    selective_coupling(p, half, Spin::THREE);
    p.pulse(spin2(), FRAC_PI_2, X);
}

fn sequence_b(p: &mut PulseProgram, kappa: f64, j: f64) {
    let half = 1.0 / (2.0 * j);
    p.pulse(spin2(), FRAC_PI_2, MY)
        .pulse(spin2(), PI, MX)
        .delay(half)
        .pulse(spin2(), PI, X)
        .pulse(spin2(), kappa * FRAC_PI_2, X)
        .delay(half)
        .pulse(spin2(), FRAC_PI_2, Y);
}

fn sequence_c(p: &mut PulseProgram, kappa: f64, j: f64) {
    let quarter = 1.0 / (4.0 * j);
    p.zrot(Spin::TWO, -kappa * FRAC_PI_2)
        // V_C⁻¹
        .pulse(spin2(), FRAC_PI_2, Y)
        .delay(quarter)
        .pulse(spin2(), FRAC_PI_2, MY)
        // exp(−iπκ(I1zI2y + I2yI3z))
        .pulse(spin2(), FRAC_PI_2, X)
        .delay(kappa / (2.0 * j))
        .pulse(spin2(), FRAC_PI_2, MX)
        // V_C
        .pulse(spin2(), FRAC_PI_2, MY)
        .delay(quarter)
        .pulse(spin2(), FRAC_PI_2, Y);
}

fn sequence_d(p: &mut PulseProgram, kappa: f64, j: f64) {
    let tau = theoretical_limit_unreduced(kappa) / j;
    let amplitude = geodesic_amplitude(kappa, j).unwrap_or(0.0);
    p.pulse(spin2(), FRAC_PI_2, MY);
    p.push_unchecked(PulseEvent::WeakPulse {
        targets: spin2(),
        amplitude,
        duration: tau,
        phase: MX,
    });
    // W = exp(−iπ(2 − κ/2) I2x) equals a κπ/2 rotation about −x up to a global sign
    p.pulse(spin2(), kappa * FRAC_PI_2, MX)
        .pulse(spin2(), FRAC_PI_2, Y);
}

fn theoretical_limit_unreduced(kappa: f64) -> f64 {
    (kappa * (4.0 - kappa)).sqrt() / 2.0
}

/// Ideal program realizing `U_zzz(κ)` on a chain with coupling `j` (Hz).
pub fn build_uzzz(v: Variant, kappa: f64, j: f64) -> Result<PulseProgram> {
    check_kappa(kappa)?;
    check_j(j)?;
    let mut p = PulseProgram::new(format!("uzzz-{v}")).with_kappa(kappa);
    p.set_meta("J", format!("{j}"));
    match v {
        Variant::A => sequence_a(&mut p, kappa, j),
        Variant::B => sequence_b(&mut p, kappa, j),
        Variant::C => sequence_c(&mut p, kappa, j),
        Variant::D => sequence_d(&mut p, kappa, j),
    }
    Ok(p)
}

/// Wraps `inner` (a `U_zzz` element) so it realizes `U_αzα` with α = x or y
/// on spins 1 and 3.
fn axis_changed(out: &mut PulseProgram, inner: &PulseProgram, before: f64, after: f64) {
    let outer = SpinSet::outer();
    out.pulse(outer, FRAC_PI_2, before);
    out.extend_from(inner);
    out.pulse(outer, FRAC_PI_2, after);
}

/// `U_zzz(κ)·U_yzy(κ)·U_xzx(κ)·exp(iπ/2·I2z)` as one program. At κ = 1 this is
/// SWAP(1,3) up to a global phase.
pub fn build_swap13(v: Variant, kappa: f64, j: f64) -> Result<PulseProgram> {
    let uzzz = build_uzzz(v, kappa, j)?;
    let mut p = PulseProgram::new(format!("swap13-{v}")).with_kappa(kappa);
    p.set_meta("J", format!("{j}"));
    p.zrot(Spin::TWO, -FRAC_PI_2);
    // U_xzx: z→x on spins 1 and 3 is a 90° rotation about y
    axis_changed(&mut p, &uzzz, MY, Y);
    // U_yzy: z→y is a 90° rotation about −x
    axis_changed(&mut p, &uzzz, X, MX);
    p.extend_from(&uzzz);
    Ok(p)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwapDurations {
    /// SWAP(1,2) or SWAP(2,3) between directly coupled spins.
    pub direct: f64,
    /// SWAP(1,3) as SWAP(1,2)·SWAP(2,3)·SWAP(1,2).
    pub conventional13: f64,
    /// SWAP(1,3) from three geodesic trilinear elements.
    pub optimal13: f64,
}

impl SwapDurations {
    pub fn ratio(&self) -> f64 {
        self.optimal13 / self.conventional13
    }
}

/// SWAP durations (s) for coupling `j` (Hz).
pub fn swap_duration_bookkeeping(j: f64) -> Result<SwapDurations> {
    check_j(j)?;
    Ok(SwapDurations {
        direct: 3.0 / (2.0 * j),
        conventional13: 9.0 / (2.0 * j),
        optimal13: 3.0 * 3f64.sqrt() / (2.0 * j),
    })
}

/// Duration (s) of the SWAP(1,3) program built from variant `v` at κ = 1.
pub fn swap13_duration(v: Variant, j: f64) -> Result<f64> {
    check_j(j)?;
    Ok(3.0 * duration_scaling(v, 1.0).0 / j)
}
