//! Propagation of pulse programs.
//!
//! Ideal mode treats hard pulses as instantaneous rotations. Realistic mode
//! gives every hard pulse a finite width set by the channel rf amplitude and
//! keeps the free Hamiltonian on while it is applied. Pulses that hit both
//! channels are centred on each other.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{expm_generator, ComplexMatrix};
use crate::pulseprog::{PulseEvent, PulseProgram};
use crate::spinsys::{
    free_hamiltonian, rf_generator, rotation, z_rotation, Channel, Spin, SpinSet, SpinSystem, DIM,
    TWO_PI,
};

/// Conversion between a Gaussian FWHM and its standard deviation.
const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949_3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PulseMode {
    Ideal,
    Realistic,
}

/// Gaussian distribution of rf amplitude scale factors, sampled on a fixed
/// grid spanning ±2σ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RfInhomogeneity {
    /// Full width at half maximum as a fraction of the nominal amplitude.
    pub fwhm: f64,
    /// Odd number of grid points.
    pub points: usize,
}

impl Default for RfInhomogeneity {
    fn default() -> Self {
        Self {
            fwhm: 0.10,
            points: 11,
        }
    }
}

impl RfInhomogeneity {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.fwhm) {
            return Err(Error::Settings(format!(
                "rf inhomogeneity FWHM {} outside [0, 1)",
                self.fwhm
            )));
        }
        if self.points.is_multiple_of(2) {
            return Err(Error::Settings(format!(
                "ensemble grid needs an odd number of points, got {}",
                self.points
            )));
        }
        Ok(())
    }

    /// `(scale, weight)` pairs with weights summing to one.
    pub fn grid(&self) -> Vec<(f64, f64)> {
        let sigma = self.fwhm / FWHM_PER_SIGMA;
        if sigma == 0.0 || self.points <= 1 {
            return vec![(1.0, 1.0)];
        }
        let n = self.points;
        let raw: Vec<(f64, f64)> = (0..n)
            .map(|i| {
                let u = -2.0 + 4.0 * i as f64 / (n - 1) as f64;
                (1.0 + sigma * u, (-0.5 * u * u).exp())
            })
            .collect();
        let total: f64 = raw.iter().map(|(_, w)| w).sum();
        raw.into_iter().map(|(c, w)| (c, w / total)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationSettings {
    pub mode: PulseMode,
    /// Proton-channel rf amplitude (Hz).
    pub proton_amplitude: f64,
    /// Heteronuclear-channel rf amplitude (Hz).
    pub hetero_amplitude: f64,
    pub inhomogeneity: Option<RfInhomogeneity>,
    /// Per-spin offsets (Hz) that replace the spin system's values.
    pub offset_overrides: [Option<f64>; 3],
}

impl Default for SimulationSettings {
    fn default() -> Self {
        Self::ideal()
    }
}

impl SimulationSettings {
    pub fn ideal() -> Self {
        Self {
            mode: PulseMode::Ideal,
            proton_amplitude: 35.7e3,
            hetero_amplitude: 5.5e3,
            inhomogeneity: None,
            offset_overrides: [None; 3],
        }
    }

    /// Finite pulses at 35.7 kHz (proton) and 5.5 kHz (hetero) with a 10%
    /// FWHM rf distribution.
    pub fn realistic() -> Self {
        Self {
            mode: PulseMode::Realistic,
            inhomogeneity: Some(RfInhomogeneity::default()),
            ..Self::ideal()
        }
    }

    pub fn is_realistic(&self) -> bool {
        self.mode == PulseMode::Realistic
    }

    pub fn amplitude(&self, channel: Channel) -> f64 {
        match channel {
            Channel::Proton => self.proton_amplitude,
            Channel::Hetero => self.hetero_amplitude,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(inh) = &self.inhomogeneity {
            inh.validate()?;
        }
        if self.is_realistic() {
            for ch in [Channel::Proton, Channel::Hetero] {
                let a = self.amplitude(ch);
                if !(a.is_finite() && a > 0.0) {
                    return Err(Error::MissingAmplitude(ch.name()));
                }
            }
        }
        Ok(())
    }

    /// Ensemble grid; a single unit-weight point in ideal mode or without
    /// inhomogeneity.
    pub fn ensemble(&self) -> Vec<(f64, f64)> {
        match (&self.inhomogeneity, self.mode) {
            (Some(inh), PulseMode::Realistic) => inh.grid(),
            _ => vec![(1.0, 1.0)],
        }
    }

    pub fn apply_overrides(&self, sys: &SpinSystem) -> SpinSystem {
        let mut out = sys.clone();
        for (slot, o) in out.offsets.iter_mut().zip(self.offset_overrides) {
            if let Some(v) = o {
                *slot = v;
            }
        }
        out
    }
}

/// Width of a realistic hard pulse: the longest of the per-channel widths
/// `|flip| / (2π·amplitude)`.
pub fn hard_pulse_width(
    targets: SpinSet,
    flip: f64,
    sys: &SpinSystem,
    settings: &SimulationSettings,
) -> Result<f64> {
    let mut width = 0.0f64;
    for k in targets.iter() {
        let ch = sys.channel(k);
        let amp = settings.amplitude(ch);
        if !(amp.is_finite() && amp > 0.0) {
            return Err(Error::MissingAmplitude(ch.name()));
        }
        width = width.max(flip.abs() / (TWO_PI * amp));
    }
    Ok(width)
}

/// Hermitian 8×8 state in product-operator normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator(ComplexMatrix);

impl DensityOperator {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if m.rows() != DIM || m.cols() != DIM {
            return Err(Error::DimensionMismatch {
                left: (m.rows(), m.cols()),
                right: (DIM, DIM),
            });
        }
        let defect = m.hermitian_defect();
        if defect > crate::linalg::HERMITIAN_TOL {
            return Err(Error::NotHermitian { defect });
        }
        Ok(Self(m))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    /// `Tr(self · observable)`; real for Hermitian arguments.
    pub fn expectation(&self, observable: &ComplexMatrix) -> f64 {
        // Tr(ρA) = Tr(ρ†A) for Hermitian ρ
        self.0.inner(observable).re
    }
}

struct Segment {
    duration: f64,
    channels: SpinSet,
    /// Per-spin rf amplitude (Hz) for this spin's channel.
    amplitude: [f64; 3],
}

fn realistic_pulse(
    targets: SpinSet,
    flip: f64,
    phase: f64,
    h0: &ComplexMatrix,
    sys: &SpinSystem,
    settings: &SimulationSettings,
    rf_scale: f64,
) -> Result<ComplexMatrix> {
    if flip == 0.0 {
        return Ok(ComplexMatrix::identity(DIM));
    }
    // negative flips rotate about the opposite axis
    let phase = if flip < 0.0 {
        phase + std::f64::consts::PI
    } else {
        phase
    };
    let mut widths = [0.0f64; 3];
    let mut amps = [0.0f64; 3];
    for k in targets.iter() {
        let ch = sys.channel(k);
        let amp = settings.amplitude(ch);
        if !(amp.is_finite() && amp > 0.0) {
            return Err(Error::MissingAmplitude(ch.name()));
        }
        widths[k.index() - 1] = flip.abs() / (TWO_PI * amp);
        amps[k.index() - 1] = amp * rf_scale;
    }
    let total = widths.iter().cloned().fold(0.0, f64::max);
    let mut edges: Vec<f64> = vec![0.0, total];
    for k in targets.iter() {
        let w = widths[k.index() - 1];
        edges.push(0.5 * (total - w));
        edges.push(0.5 * (total + w));
    }
    edges.sort_by(f64::total_cmp);
    edges.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * total.max(1e-30));

    let mut segments = Vec::new();
    for pair in edges.windows(2) {
        let (t0, t1) = (pair[0], pair[1]);
        let mid = 0.5 * (t0 + t1);
        let mut active = SpinSet::EMPTY;
        for k in targets.iter() {
            let w = widths[k.index() - 1];
            if (mid - 0.5 * total).abs() < 0.5 * w {
                active = active.with(k);
            }
        }
        segments.push(Segment {
            duration: t1 - t0,
            channels: active,
            amplitude: amps,
        });
    }

    let mut u = ComplexMatrix::identity(DIM);
    for seg in segments {
        let mut h = h0.clone();
        for k in seg.channels.iter() {
            let amp = seg.amplitude[k.index() - 1];
            h = &h + &rf_generator(SpinSet::single(k), phase).scale_real(TWO_PI * amp);
        }
        u = &expm_generator(&h, seg.duration)? * &u;
    }
    Ok(u)
}

fn event_propagator(
    event: &PulseEvent,
    h0: &ComplexMatrix,
    sys: &SpinSystem,
    settings: &SimulationSettings,
    rf_scale: f64,
) -> Result<ComplexMatrix> {
    match *event {
        PulseEvent::HardPulse {
            targets,
            flip,
            phase,
        } => match settings.mode {
            PulseMode::Ideal => Ok(rotation(targets, flip, phase)),
            PulseMode::Realistic => {
                realistic_pulse(targets, flip, phase, h0, sys, settings, rf_scale)
            }
        },
        PulseEvent::WeakPulse {
            targets,
            amplitude,
            duration,
            phase,
        } => {
            let scale = if settings.is_realistic() {
                rf_scale
            } else {
                1.0
            };
            let h = h0 + &rf_generator(targets, phase).scale_real(TWO_PI * amplitude * scale);
            expm_generator(&h, duration)
        }
        PulseEvent::Delay { duration } => expm_generator(h0, duration),
        PulseEvent::ZRotation { target, angle } => Ok(z_rotation(target, angle)),
    }
}

/// Propagator of `p` at a given rf amplitude scale factor (ignored in ideal
/// mode).
pub fn propagator_scaled(
    p: &PulseProgram,
    sys: &SpinSystem,
    settings: &SimulationSettings,
    rf_scale: f64,
) -> Result<ComplexMatrix> {
    settings.validate()?;
    let sys = settings.apply_overrides(sys);
    sys.validate()?;
    let h0 = free_hamiltonian(&sys);
    let mut u = ComplexMatrix::identity(DIM);
    for event in p.events() {
        let step = event_propagator(event, &h0, &sys, settings, rf_scale)?;
        u = &step * &u;
    }
    Ok(u)
}

/// Time-ordered propagator of `p`; later events multiply from the left.
pub fn propagator_of(
    p: &PulseProgram,
    sys: &SpinSystem,
    settings: &SimulationSettings,
) -> Result<ComplexMatrix> {
    propagator_scaled(p, sys, settings, 1.0)
}

/// Weighted mean of `metric(scale)` over the settings' rf ensemble. Grid points
/// are evaluated in parallel and summed in grid order.
pub fn rf_ensemble_average<F>(settings: &SimulationSettings, metric: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let grid = settings.ensemble();
    let values: Vec<f64> = grid
        .par_iter()
        .map(|&(c, _)| metric(c))
        .collect::<Result<_>>()?;
    Ok(grid.iter().zip(values).map(|((_, w), v)| w * v).sum())
}

/// `U ρ0 U†`, averaged over the rf ensemble.
pub fn evolve(
    rho0: &DensityOperator,
    p: &PulseProgram,
    sys: &SpinSystem,
    settings: &SimulationSettings,
) -> Result<DensityOperator> {
    let grid = settings.ensemble();
    let states: Vec<ComplexMatrix> = grid
        .par_iter()
        .map(|&(c, w)| {
            let u = propagator_scaled(p, sys, settings, c)?;
            Ok(rho0.matrix().conjugate_by(&u).scale_real(w))
        })
        .collect::<Result<_>>()?;
    let mut sum = ComplexMatrix::zeros(DIM, DIM);
    for s in &states {
        sum = &sum + s;
    }
    // Remove rounding-level anti-Hermitian residue.
    let sym = (&sum + &sum.adjoint()).scale_real(0.5);
    DensityOperator::new(sym)
}

/// Offset scan for one channel: every spin on `channel` has `o` added to its
/// offset for each `o` on the grid `lo, lo+step, …, hi`.
pub fn offset_scan<F>(
    sys: &SpinSystem,
    channel: Channel,
    lo: f64,
    hi: f64,
    step: f64,
    metric: F,
) -> Result<Vec<(f64, f64)>>
where
    F: Fn(&SpinSystem) -> Result<f64> + Sync,
{
    if step.is_nan() || step <= 0.0 {
        return Err(Error::ScanRange(format!("step {step} must be positive")));
    }
    if !(lo.is_finite() && hi.is_finite()) || hi < lo {
        return Err(Error::ScanRange(format!("empty range [{lo}, {hi}]")));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    let grid: Vec<f64> = (0..count).map(|i| lo + step * i as f64).collect();
    grid.par_iter()
        .map(|&o| {
            let mut shifted = sys.clone();
            for k in Spin::ALL {
                if sys.channel(k) == channel {
                    shifted.offsets[k.index() - 1] += o;
                }
            }
            metric(&shifted).map(|m| (o, m))
        })
        .collect()
}
