//! Brute-force reference implementations shared by the integration tests.
//!
//! Operators are assembled element by element from basis-state bits and
//! exponentials come from a scaled-and-squared Taylor series, so nothing here
//! goes through the crate's Kronecker products or eigendecomposition.

#![allow(dead_code, clippy::needless_range_loop)]

use num_complex::Complex64;
use trispin::engine::SimulationSettings;
use trispin::linalg::ComplexMatrix;
use trispin::pulseprog::{PulseEvent, PulseProgram};
use trispin::spinsys::{Channel, SpinSystem};

pub const N: usize = 8;
pub type M = [[Complex64; N]; N];

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

pub fn zero() -> M {
    [[Complex64::new(0.0, 0.0); N]; N]
}

pub fn eye() -> M {
    let mut m = zero();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Complex64::new(1.0, 0.0);
    }
    m
}

pub fn mul(a: &M, b: &M) -> M {
    let mut c = zero();
    for i in 0..N {
        for j in 0..N {
            let mut s = Complex64::new(0.0, 0.0);
            for k in 0..N {
                s += a[i][k] * b[k][j];
            }
            c[i][j] = s;
        }
    }
    c
}

pub fn add(a: &M, b: &M) -> M {
    let mut c = *a;
    for i in 0..N {
        for j in 0..N {
            c[i][j] += b[i][j];
        }
    }
    c
}

pub fn scale(a: &M, s: Complex64) -> M {
    let mut c = *a;
    for row in c.iter_mut() {
        for x in row.iter_mut() {
            *x *= s;
        }
    }
    c
}

pub fn dagger(a: &M) -> M {
    let mut c = zero();
    for i in 0..N {
        for j in 0..N {
            c[i][j] = a[j][i].conj();
        }
    }
    c
}

pub fn trace(a: &M) -> Complex64 {
    (0..N).map(|i| a[i][i]).sum()
}

/// Bit of spin `k` (1-based) in basis index `b`; spin 1 is the most
/// significant bit and 0 means spin up.
fn bit(b: usize, k: usize) -> usize {
    (b >> (3 - k)) & 1
}

/// Matrix of `I_k{x,y,z}` from its action on basis states.
pub fn spin_op(k: usize, axis: char) -> M {
    let mut m = zero();
    for a in 0..N {
        for b in 0..N {
            let others_equal = (1..=3).filter(|&q| q != k).all(|q| bit(a, q) == bit(b, q));
            if !others_equal {
                continue;
            }
            let (ba, bb) = (bit(a, k), bit(b, k));
            m[a][b] = match axis {
                'x' if ba != bb => Complex64::new(0.5, 0.0),
                // ⟨up|Iy|down⟩ = −i/2, ⟨down|Iy|up⟩ = +i/2
                'y' if ba == 0 && bb == 1 => Complex64::new(0.0, -0.5),
                'y' if ba == 1 && bb == 0 => Complex64::new(0.0, 0.5),
                'z' if a == b => Complex64::new(if ba == 0 { 0.5 } else { -0.5 }, 0.0),
                _ => Complex64::new(0.0, 0.0),
            };
        }
    }
    m
}

pub fn free_h(sys: &SpinSystem) -> M {
    let mut h = zero();
    for b in 0..N {
        let z = |k: usize| if bit(b, k) == 0 { 0.5 } else { -0.5 };
        let e = sys.j12 * z(1) * z(2)
            + sys.j23 * z(2) * z(3)
            + sys.j13 * z(1) * z(3)
            + (1..=3).map(|k| sys.offsets[k - 1] * z(k)).sum::<f64>();
        h[b][b] = Complex64::new(TWO_PI * e, 0.0);
    }
    h
}

/// `Σ_k (I_kx cos φ + I_ky sin φ)` over the given 1-based spins.
pub fn transverse(spins: &[usize], phase: f64) -> M {
    let mut g = zero();
    for &k in spins {
        g = add(
            &g,
            &scale(&spin_op(k, 'x'), Complex64::new(phase.cos(), 0.0)),
        );
        g = add(
            &g,
            &scale(&spin_op(k, 'y'), Complex64::new(phase.sin(), 0.0)),
        );
    }
    g
}

fn norm1(a: &M) -> f64 {
    (0..N)
        .map(|j| (0..N).map(|i| a[i][j].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `exp(−i·h·t)` by Taylor series with scaling and squaring.
pub fn expm_taylor(h: &M, t: f64) -> M {
    let a = scale(h, Complex64::new(0.0, -t));
    let mut squarings = 0;
    let mut nrm = norm1(&a);
    while nrm > 0.25 {
        nrm /= 2.0;
        squarings += 1;
    }
    let a = scale(&a, Complex64::new(0.5f64.powi(squarings), 0.0));
    let mut sum = eye();
    let mut term = eye();
    for n in 1..30 {
        term = scale(&mul(&term, &a), Complex64::new(1.0 / n as f64, 0.0));
        sum = add(&sum, &term);
    }
    for _ in 0..squarings {
        sum = mul(&sum, &sum);
    }
    sum
}

pub fn from_crate(m: &ComplexMatrix) -> M {
    let mut out = zero();
    for i in 0..N {
        for j in 0..N {
            out[i][j] = m[(i, j)];
        }
    }
    out
}

pub fn max_diff(a: &M, b: &M) -> f64 {
    let mut d = 0.0f64;
    for i in 0..N {
        for j in 0..N {
            d = d.max((a[i][j] - b[i][j]).norm());
        }
    }
    d
}

pub fn fidelity(u: &M, v: &M) -> f64 {
    trace(&mul(&dagger(u), v)).norm() / N as f64
}

/// Rotation by `flip` about the in-plane axis at `phase` on the given spins.
pub fn rotation(spins: &[usize], flip: f64, phase: f64) -> M {
    expm_taylor(&transverse(spins, phase), flip)
}

fn targets_of(set: trispin::spinsys::SpinSet) -> Vec<usize> {
    set.iter().map(|s| s.index()).collect()
}

/// Step-by-step propagation of `p`. Realistic pulses run each channel at its
/// own amplitude, centred on the longest one, with the free Hamiltonian on.
pub fn propagate(
    p: &PulseProgram,
    sys: &SpinSystem,
    settings: &SimulationSettings,
    rf_scale: f64,
) -> M {
    let h0 = free_h(sys);
    let realistic = settings.is_realistic();
    let mut u = eye();
    for e in p.events() {
        let step = match *e {
            PulseEvent::Delay { duration } => expm_taylor(&h0, duration),
            PulseEvent::ZRotation { target, angle } => {
                expm_taylor(&spin_op(target.index(), 'z'), angle)
            }
            PulseEvent::HardPulse {
                targets,
                flip,
                phase,
            } if !realistic => rotation(&targets_of(targets), flip, phase),
            PulseEvent::HardPulse {
                targets,
                flip,
                phase,
            } => realistic_pulse(
                &targets_of(targets),
                flip,
                phase,
                &h0,
                sys,
                settings,
                rf_scale,
            ),
            PulseEvent::WeakPulse {
                targets,
                amplitude,
                duration,
                phase,
            } => {
                let amp = if realistic {
                    amplitude * rf_scale
                } else {
                    amplitude
                };
                let h = add(
                    &h0,
                    &scale(
                        &transverse(&targets_of(targets), phase),
                        Complex64::new(TWO_PI * amp, 0.0),
                    ),
                );
                expm_taylor(&h, duration)
            }
        };
        u = mul(&step, &u);
    }
    u
}

fn realistic_pulse(
    spins: &[usize],
    flip: f64,
    phase: f64,
    h0: &M,
    sys: &SpinSystem,
    settings: &SimulationSettings,
    rf_scale: f64,
) -> M {
    if flip == 0.0 {
        return eye();
    }
    let phase = if flip < 0.0 {
        phase + std::f64::consts::PI
    } else {
        phase
    };
    let amp = |k: usize| match sys.channels[k - 1] {
        Channel::Proton => settings.proton_amplitude,
        Channel::Hetero => settings.hetero_amplitude,
    };
    let width = |k: usize| flip.abs() / (TWO_PI * amp(k));
    let total = spins.iter().map(|&k| width(k)).fold(0.0, f64::max);
    let mut cuts = vec![0.0, total];
    for &k in spins {
        cuts.push((total - width(k)) / 2.0);
        cuts.push((total + width(k)) / 2.0);
    }
    cuts.sort_by(f64::total_cmp);
    let mut u = eye();
    for w in cuts.windows(2) {
        let dt = w[1] - w[0];
        if dt <= 1e-15 * total {
            continue;
        }
        let mid = (w[0] + w[1]) / 2.0;
        let mut h = *h0;
        for &k in spins {
            if (mid - total / 2.0).abs() < width(k) / 2.0 {
                let g = transverse(&[k], phase);
                h = add(
                    &h,
                    &scale(&g, Complex64::new(TWO_PI * amp(k) * rf_scale, 0.0)),
                );
            }
        }
        u = mul(&expm_taylor(&h, dt), &u);
    }
    u
}

/// `exp(−i·2πκ·I1a·I2b·I3c)`.
pub fn trilinear(a: char, b: char, c: char, kappa: f64) -> M {
    let g = mul(&mul(&spin_op(1, a), &spin_op(2, b)), &spin_op(3, c));
    expm_taylor(&g, TWO_PI * kappa)
}

/// Permutation `|abc⟩ → |cba⟩`.
pub fn swap13() -> M {
    let mut m = zero();
    for b in 0..N {
        let swapped = (bit(b, 3) << 2) | (bit(b, 2) << 1) | bit(b, 1);
        m[swapped][b] = Complex64::new(1.0, 0.0);
    }
    m
}

pub fn conj(u: &M, rho: &M) -> M {
    mul(&mul(u, rho), &dagger(u))
}
