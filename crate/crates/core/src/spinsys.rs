//! Spin operators, Hamiltonians and target propagators for a three-spin chain.
//!
//! Basis ordering: spin 1 is the leftmost Kronecker factor and the basis index
//! is `4·b1 + 2·b2 + b3`, with bit 0 meaning spin up (z-eigenvalue +1/2).

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{expm_generator, kron, ComplexMatrix, ONE, ZERO};

pub const DIM: usize = 8;
pub const TWO_PI: f64 = 2.0 * PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }
}

/// A spin label, 1 through 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Spin(u8);

impl Spin {
    pub const ONE: Spin = Spin(1);
    pub const TWO: Spin = Spin(2);
    pub const THREE: Spin = Spin(3);
    pub const ALL: [Spin; 3] = [Spin(1), Spin(2), Spin(3)];

    pub fn new(k: usize) -> Result<Self> {
        if (1..=3).contains(&k) {
            Ok(Spin(k as u8))
        } else {
            Err(Error::SpinIndex(k))
        }
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    fn slot(self) -> usize {
        self.0 as usize - 1
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A set of spins, stored as a bitmask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct SpinSet(u8);

impl SpinSet {
    pub const EMPTY: SpinSet = SpinSet(0);
    pub const ALL: SpinSet = SpinSet(0b111);

    pub fn single(spin: Spin) -> Self {
        SpinSet(1 << spin.slot())
    }

    pub fn of(spins: &[Spin]) -> Self {
        spins.iter().fold(Self::EMPTY, |s, &k| s.with(k))
    }

    pub fn with(self, spin: Spin) -> Self {
        SpinSet(self.0 | (1 << spin.slot()))
    }

    pub fn contains(self, spin: Spin) -> bool {
        self.0 & (1 << spin.slot()) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = Spin> {
        Spin::ALL.into_iter().filter(move |&k| self.contains(k))
    }

    /// Spins 1 and 3.
    pub fn outer() -> Self {
        Self::of(&[Spin::ONE, Spin::THREE])
    }
}

impl fmt::Display for SpinSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.iter().map(|k| k.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// Transmitter channel a spin is addressed through.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    /// Proton-like channel (high rf amplitude).
    Proton,
    /// Heteronucleus-like channel (low rf amplitude).
    Hetero,
}

impl Channel {
    pub fn name(self) -> &'static str {
        match self {
            Channel::Proton => "proton",
            Channel::Hetero => "hetero",
        }
    }
}

impl FromStr for Channel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "proton" | "h" | "1h" => Ok(Channel::Proton),
            "hetero" | "x" | "n" | "15n" => Ok(Channel::Hetero),
            other => Err(Error::Settings(format!("unknown channel '{other}'"))),
        }
    }
}

/// Couplings (Hz), offsets (Hz) and channel assignment for the three spins.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinSystem {
    pub j12: f64,
    pub j23: f64,
    pub j13: f64,
    pub offsets: [f64; 3],
    pub channels: [Channel; 3],
}

impl SpinSystem {
    /// Ideal on-resonance chain `J12 = J23 = j`, `J13 = 0`, spins 1 and 3 on
    /// the proton channel.
    pub fn chain(j: f64) -> Self {
        Self {
            j12: j,
            j23: j,
            j13: 0.0,
            offsets: [0.0; 3],
            channels: [Channel::Proton, Channel::Hetero, Channel::Proton],
        }
    }

    /// Amino group of 15N-acetamide: spin 1 irradiated on resonance, spin 3
    /// shifted by 358 Hz.
    pub fn acetamide() -> Self {
        Self {
            j12: 88.8,
            j23: 87.3,
            j13: 2.9,
            offsets: [0.0, 0.0, 358.0],
            channels: [Channel::Proton, Channel::Hetero, Channel::Proton],
        }
    }

    pub fn with_offsets(mut self, offsets: [f64; 3]) -> Self {
        self.offsets = offsets;
        self
    }

    pub fn channel(&self, spin: Spin) -> Channel {
        self.channels[spin.slot()]
    }

    pub fn offset(&self, spin: Spin) -> f64 {
        self.offsets[spin.slot()]
    }

    /// Same couplings, all offsets zero.
    pub fn on_resonance(&self) -> Self {
        self.clone().with_offsets([0.0; 3])
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.j12, self.j23, self.j13]
            .iter()
            .chain(self.offsets.iter())
            .all(|x| x.is_finite());
        if finite {
            Ok(())
        } else {
            Err(Error::NonFinite("spin system parameter"))
        }
    }
}

fn pauli_half(axis: Axis) -> ComplexMatrix {
    let h = Complex64::new(0.5, 0.0);
    let ih = Complex64::new(0.0, 0.5);
    let e = match axis {
        Axis::X => vec![ZERO, h, h, ZERO],
        Axis::Y => vec![ZERO, -ih, ih, ZERO],
        Axis::Z => vec![h, ZERO, ZERO, -h],
    };
    ComplexMatrix::from_row_major(2, 2, e)
}

fn build_operator(spin: Spin, axis: Axis) -> ComplexMatrix {
    let id = ComplexMatrix::identity(2);
    let mut factors = [id.clone(), id.clone(), id];
    factors[spin.slot()] = pauli_half(axis);
    kron(&kron(&factors[0], &factors[1]), &factors[2])
}

fn operator_table() -> &'static [ComplexMatrix] {
    static TABLE: OnceLock<Vec<ComplexMatrix>> = OnceLock::new();
    TABLE.get_or_init(|| {
        Spin::ALL
            .iter()
            .flat_map(|&k| Axis::ALL.iter().map(move |&a| build_operator(k, a)))
            .collect()
    })
}

/// `I_{kα}` on the 8-dimensional space.
pub fn spin_operator(k: usize, axis: Axis) -> Result<ComplexMatrix> {
    Ok(op(Spin::new(k)?, axis).clone())
}

/// Borrowing variant of [`spin_operator`] for a validated spin.
pub fn op(spin: Spin, axis: Axis) -> &'static ComplexMatrix {
    &operator_table()[spin.slot() * 3 + axis.index()]
}

/// z-eigenvalue (±1/2) of `spin` in basis state `b`.
pub fn z_eigenvalue(b: usize, spin: Spin) -> f64 {
    let bit = (b >> (3 - spin.index())) & 1;
    if bit == 0 {
        0.5
    } else {
        -0.5
    }
}

/// Product operator `2^(n−1)·Π I_{kα}`, e.g. `[(1,x),(2,z)]` gives `2I1xI2z`.
pub fn product_operator(factors: &[(Spin, Axis)]) -> ComplexMatrix {
    let mut m = ComplexMatrix::identity(DIM);
    for &(k, a) in factors {
        m = &m * op(k, a);
    }
    let n = factors.len().max(1) as i32;
    m.scale_real(2f64.powi(n - 1))
}

/// Free-evolution Hamiltonian (rad/s): Ising couplings plus offsets. Diagonal.
pub fn free_hamiltonian(sys: &SpinSystem) -> ComplexMatrix {
    let [s1, s2, s3] = Spin::ALL;
    let mut diag = [ZERO; DIM];
    for (b, d) in diag.iter_mut().enumerate() {
        let (z1, z2, z3) = (
            z_eigenvalue(b, s1),
            z_eigenvalue(b, s2),
            z_eigenvalue(b, s3),
        );
        let coupling = sys.j12 * z1 * z2 + sys.j23 * z2 * z3 + sys.j13 * z1 * z3;
        let offset = sys.offsets[0] * z1 + sys.offsets[1] * z2 + sys.offsets[2] * z3;
        *d = Complex64::new(TWO_PI * (coupling + offset), 0.0);
    }
    ComplexMatrix::from_diagonal(&diag)
}

/// `2π·amplitude·Σ_k (I_kx cos φ + I_ky sin φ)` for the spins in `targets`.
pub fn rf_hamiltonian(targets: SpinSet, amplitude: f64, phase: f64) -> Result<ComplexMatrix> {
    if targets.is_empty() {
        return Err(Error::EmptyTargets);
    }
    Ok(rf_generator(targets, phase).scale_real(TWO_PI * amplitude))
}

/// `Σ_k (I_kx cos φ + I_ky sin φ)`; the rotation generator of a pulse.
pub fn rf_generator(targets: SpinSet, phase: f64) -> ComplexMatrix {
    let (s, c) = phase.sin_cos();
    let mut h = ComplexMatrix::zeros(DIM, DIM);
    for k in targets.iter() {
        h = &h + &(&op(k, Axis::X).scale_real(c) + &op(k, Axis::Y).scale_real(s));
    }
    h
}

/// Ideal rotation `exp(−i·flip·Σ(I_kx cos φ + I_ky sin φ))`.
pub fn rotation(targets: SpinSet, flip: f64, phase: f64) -> ComplexMatrix {
    expm_generator(&rf_generator(targets, phase), flip).expect("rf generator is Hermitian")
}

/// `exp(−i·angle·I_kz)`.
pub fn z_rotation(spin: Spin, angle: f64) -> ComplexMatrix {
    expm_generator(op(spin, Axis::Z), angle).expect("I_z is Hermitian")
}

/// `I_{1α} I_{2β} I_{3γ}`.
pub fn trilinear_operator(a: Axis, b: Axis, c: Axis) -> ComplexMatrix {
    &(op(Spin::ONE, a) * op(Spin::TWO, b)) * op(Spin::THREE, c)
}

/// `exp{−i·2πκ·I_{1α} I_{2β} I_{3γ}}`.
pub fn target_trilinear(a: Axis, b: Axis, c: Axis, kappa: f64) -> ComplexMatrix {
    let h = trilinear_operator(a, b, c).scale_real(TWO_PI);
    expm_generator(&h, kappa).expect("trilinear operator is Hermitian")
}

/// Permutation unitary exchanging spins 1 and 3: `|a b c⟩ → |c b a⟩`.
pub fn swap13_target() -> ComplexMatrix {
    let mut p = ComplexMatrix::zeros(DIM, DIM);
    for b in 0..DIM {
        let (b1, b2, b3) = ((b >> 2) & 1, (b >> 1) & 1, b & 1);
        p[((b3 << 2) | (b2 << 1) | b1, b)] = ONE;
    }
    p
}

/// Ideal product `U_zzz(1)·U_yzy(1)·U_xzx(1)·exp(iπ/2·I_2z)`.
pub fn swap13_product() -> ComplexMatrix {
    use Axis::*;
    let last = z_rotation(Spin::TWO, -PI / 2.0);
    let chain = &(&target_trilinear(Z, Z, Z, 1.0) * &target_trilinear(Y, Z, Y, 1.0))
        * &target_trilinear(X, Z, X, 1.0);
    &chain * &last
}
