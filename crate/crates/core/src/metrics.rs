//! Figures of merit: propagator fidelity, SWAP transfer efficiency and the
//! curve generators behind the duration and transfer plots.

use rayon::prelude::*;

use crate::broadband::{prepare_swap13, SwapBuild};
use crate::engine::{evolve, DensityOperator, SimulationSettings};
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::pulseprog::total_duration;
use crate::sequences::{duration_scaling, theoretical_limit, Variant};
use crate::spinsys::{op, Axis, Spin, SpinSystem};

/// `|Tr(U†V)| / n`; 1 exactly when the two agree up to a global phase.
pub fn fidelity(u: &ComplexMatrix, v: &ComplexMatrix) -> Result<f64> {
    if u.rows() != v.rows() || u.cols() != v.cols() {
        return Err(Error::DimensionMismatch {
            left: (u.rows(), u.cols()),
            right: (v.rows(), v.cols()),
        });
    }
    if !u.is_square() {
        return Err(Error::NotSquare {
            rows: u.rows(),
            cols: u.cols(),
        });
    }
    Ok(u.inner(v).norm() / u.rows() as f64)
}

/// `Tr(ρ·I3x) / Tr(I1x·I1x)` for a run started from `I1x`.
pub fn transfer_efficiency(rho: &DensityOperator) -> f64 {
    let i1x = op(Spin::ONE, Axis::X);
    rho.expectation(op(Spin::THREE, Axis::X)) / i1x.inner(i1x).re
}

/// One point of a transfer curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaPoint {
    pub kappa: f64,
    /// Duration of the simulated program (s).
    pub tau: f64,
    pub eta: f64,
}

/// η13 of the SWAP(1,3) composition at each κ, with the program built for
/// coupling `design_j` and simulated on `sys`. Realistic settings switch to
/// the broadband, width-compensated program.
pub fn eta_curve(
    v: Variant,
    kappas: &[f64],
    sys: &SpinSystem,
    settings: &SimulationSettings,
    design_j: f64,
    build: &SwapBuild,
) -> Result<Vec<EtaPoint>> {
    if kappas.is_empty() {
        return Err(Error::ScanRange("empty kappa grid".into()));
    }
    let rho0 = DensityOperator::new(op(Spin::ONE, Axis::X).clone())?;
    kappas
        .par_iter()
        .map(|&kappa| {
            let p = prepare_swap13(v, kappa, design_j, sys, settings, build)?;
            let tau = total_duration(&p, sys, settings)?;
            let rho = evolve(&rho0, &p, sys, settings)?;
            Ok(EtaPoint {
                kappa,
                tau,
                eta: transfer_efficiency(&rho),
            })
        })
        .collect()
}

/// Point with the largest η (first one on ties).
pub fn curve_peak(curve: &[EtaPoint]) -> Option<EtaPoint> {
    curve
        .iter()
        .copied()
        .fold(None, |best: Option<EtaPoint>, p| match best {
            Some(b) if b.eta >= p.eta => Some(b),
            _ => Some(p),
        })
}

/// Durations (units of 1/J), scaling factors and scaling relative to B.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fig2Row {
    pub kappa: f64,
    /// Jτ for A, B, C, D.
    pub tau: [f64; 4],
    /// s for A, B, C, D.
    pub s: [f64; 4],
    /// s/s_B for A, C, D.
    pub ratio: [f64; 3],
}

pub fn fig2_row(kappa: f64) -> Result<Fig2Row> {
    if !(kappa > 0.0 && kappa <= 1.0) {
        return Err(Error::ScanRange(format!("kappa {kappa} outside (0, 1]")));
    }
    let mut tau = [0.0; 4];
    let mut s = [0.0; 4];
    for (i, v) in Variant::ALL.into_iter().enumerate() {
        let (t, sv) = if v == Variant::D {
            theoretical_limit(kappa)
        } else {
            duration_scaling(v, kappa)
        };
        tau[i] = t;
        s[i] = sv;
    }
    let sb = s[1];
    Ok(Fig2Row {
        kappa,
        tau,
        s,
        ratio: [s[0] / sb, s[2] / sb, s[3] / sb],
    })
}

pub fn fig2_tables(kappas: &[f64]) -> Result<Vec<Fig2Row>> {
    kappas.iter().map(|&k| fig2_row(k)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{propagator_of, RfInhomogeneity};
    use crate::linalg::{expm_generator, I};
    use crate::sequences::build_swap13;
    use crate::spinsys::{free_hamiltonian, rf_hamiltonian, target_trilinear, SpinSet};
    use num_complex::Complex64;
    use proptest::prelude::*;

    const J: f64 = 88.0;

    fn random_unitary(seed: [f64; 6]) -> ComplexMatrix {
        let mut sys = SpinSystem::chain(seed[0] * 100.0)
            .with_offsets([seed[1], seed[2], seed[3]].map(|x| x * 500.0));
        sys.j13 = seed[4] * 20.0;
        let h = &free_hamiltonian(&sys) + &rf_hamiltonian(SpinSet::ALL, 300.0, seed[5]).unwrap();
        expm_generator(&h, 1e-3).unwrap()
    }

    #[test]
    fn fidelity_examples() {
        let u = random_unitary([0.3, 0.1, -0.4, 0.7, 0.2, 1.1]);
        assert!((fidelity(&u, &u).unwrap() - 1.0).abs() < 1e-12);
        let phased = u.scale(Complex64::from_polar(1.0, 0.83));
        assert!((fidelity(&u, &phased).unwrap() - 1.0).abs() < 1e-12);
        let id = ComplexMatrix::identity(8);
        let f = fidelity(&id, &target_trilinear(Axis::Z, Axis::Z, Axis::Z, 1.0)).unwrap();
        assert!((f - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn fidelity_dimension_mismatch() {
        let err = fidelity(&ComplexMatrix::identity(8), &ComplexMatrix::identity(4));
        assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
    }

    proptest! {
        #[test]
        fn fidelity_symmetric_and_left_invariant(
            a in prop::array::uniform6(-1.0f64..1.0),
            b in prop::array::uniform6(-1.0f64..1.0),
            c in prop::array::uniform6(-1.0f64..1.0),
        ) {
            let (u, v, w) = (random_unitary(a), random_unitary(b), random_unitary(c));
            let f = fidelity(&u, &v).unwrap();
            prop_assert!((f - fidelity(&v, &u).unwrap()).abs() < 1e-12);
            prop_assert!((f - fidelity(&(&w * &u), &(&w * &v)).unwrap()).abs() < 1e-12);
            prop_assert!((0.0..=1.0 + 1e-12).contains(&f));
        }
    }

    #[test]
    fn efficiency_trivial_states() {
        let i3x = DensityOperator::new(op(Spin::THREE, Axis::X).clone()).unwrap();
        assert!((transfer_efficiency(&i3x) - 1.0).abs() < 1e-15);
        let i1x = DensityOperator::new(op(Spin::ONE, Axis::X).clone()).unwrap();
        assert_eq!(transfer_efficiency(&i1x), 0.0);
    }

    #[test]
    fn ideal_swaps_transfer_completely() {
        let sys = SpinSystem::chain(J);
        let rho0 = DensityOperator::new(op(Spin::ONE, Axis::X).clone()).unwrap();
        for v in Variant::ALL {
            let p = build_swap13(v, 1.0, J).unwrap();
            let rho = evolve(&rho0, &p, &sys, &SimulationSettings::ideal()).unwrap();
            assert!((transfer_efficiency(&rho) - 1.0).abs() < 1e-9, "{v}");
        }
    }

    #[test]
    fn ideal_curves_peak_where_expected() {
        let sys = SpinSystem::chain(J);
        let kappas: Vec<f64> = (0..=40).map(|i| i as f64 * 0.05).collect();
        let settings = SimulationSettings::ideal();
        for (v, tau_ms) in [(Variant::D, 29.5), (Variant::A, 51.1)] {
            let curve = eta_curve(v, &kappas, &sys, &settings, J, &SwapBuild::default()).unwrap();
            assert!(curve[0].eta.abs() < 1e-12, "{v} κ=0");
            let peak = curve_peak(&curve).unwrap();
            assert!((peak.kappa - 1.0).abs() < 1e-12, "{v}");
            assert!((peak.eta - 1.0).abs() < 1e-9);
            assert!((peak.tau * 1e3 - tau_ms).abs() < 0.05, "{v} {}", peak.tau);
        }
    }

    #[test]
    fn ideal_curve_ignores_rf_settings() {
        let sys = SpinSystem::chain(J);
        let kappas = [0.3, 1.0, 1.6];
        let a = eta_curve(
            Variant::C,
            &kappas,
            &sys,
            &SimulationSettings::ideal(),
            J,
            &SwapBuild::default(),
        )
        .unwrap();
        let mut other = SimulationSettings::ideal();
        other.proton_amplitude = 1e3;
        other.hetero_amplitude = 2e2;
        other.inhomogeneity = Some(RfInhomogeneity {
            fwhm: 0.3,
            points: 5,
        });
        let b = eta_curve(Variant::C, &kappas, &sys, &other, J, &SwapBuild::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn eta_curve_rejects_empty_grid() {
        let sys = SpinSystem::chain(J);
        assert!(eta_curve(
            Variant::A,
            &[],
            &sys,
            &SimulationSettings::ideal(),
            J,
            &SwapBuild::default()
        )
        .is_err());
    }

    #[test]
    fn peak_picks_first_maximum() {
        let pts = [
            EtaPoint {
                kappa: 0.0,
                tau: 0.0,
                eta: 0.2,
            },
            EtaPoint {
                kappa: 1.0,
                tau: 1.0,
                eta: 0.9,
            },
            EtaPoint {
                kappa: 2.0,
                tau: 2.0,
                eta: 0.9,
            },
        ];
        assert_eq!(curve_peak(&pts).unwrap().kappa, 1.0);
        assert_eq!(curve_peak(&[]), None);
    }

    #[test]
    fn fig2_rows() {
        let row = fig2_row(1.0).unwrap();
        let want = [2.0 / 3.0, 1.0, 1.0, 2.0 / 3f64.sqrt()];
        for (s, w) in row.s.iter().zip(want) {
            assert!((s - w).abs() < 1e-12);
        }
        let small = fig2_row(0.01).unwrap();
        assert!((small.ratio[2] - 10.0).abs() < 0.1);
        assert!((small.ratio[0] * small.s[1] / small.s[0] - 1.0).abs() < 1e-12);
        assert!((small.s[3] / small.s[0] - 10.0).abs() < 0.1);
        for k in [0.05, 0.4, 0.99] {
            let r = fig2_row(k).unwrap();
            assert!((r.s[1] / k - 1.0).abs() < 1e-12);
        }
        assert!(matches!(fig2_row(0.0), Err(Error::ScanRange(_))));
        assert!(matches!(fig2_row(1.5), Err(Error::ScanRange(_))));
        assert_eq!(fig2_tables(&[0.5, 1.0]).unwrap().len(), 2);
    }

    #[test]
    fn global_phase_of_swap_is_irrelevant() {
        let sys = SpinSystem::chain(J);
        let u = propagator_of(
            &build_swap13(Variant::B, 1.0, J).unwrap(),
            &sys,
            &SimulationSettings::ideal(),
        )
        .unwrap();
        let shifted = u.scale(I);
        assert!((fidelity(&u, &shifted).unwrap() - 1.0).abs() < 1e-12);
    }
}
