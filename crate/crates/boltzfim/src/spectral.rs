//! Eigenvalue spectra of Fisher matrices, spectral entropy, and the Schur
//! complement bound on the smallest eigenvalue.
//!
//! A Fisher matrix is positive semidefinite in exact arithmetic. Spectra from
//! EXACT moments must respect that up to a -1e-9 tolerance (anything worse is
//! a bug and an error); spectra from EMPIRICAL moments may dip slightly
//! negative from sampling noise, and those eigenvalues are clamped to zero
//! with a count. Spectral entropy treats the normalized eigenvalues as a
//! probability vector: S = -Σ p_i ln p_i, p_i = λ_i / Σ_j λ_j, in nats.
//!
//! For the block split F = [[F11, F12], [F21, F22]] along linear/pair
//! coefficients with F11 positive definite,
//!
//! ```text
//! λ_min(F) ≤ λ_min(F22 - F21 (F11 + damping·I)^{-1} F12)
//! ```
//!
//! (adding damping only raises the right-hand side). The solve goes through a
//! Cholesky factorization of F11 + damping·I, never an explicit inverse.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::fisher::FimMatrix;
use crate::moments::MomentSource;

/// Eigenvalues below this are an error for EXACT-source FIMs; empirical ones
/// are clamped.
pub const PSD_TOLERANCE: f64 = 1e-9;

/// Slack allowed when checking that the Schur bound holds.
pub const SCHUR_SLACK: f64 = 1e-9;

/// Descending eigenvalues of a FIM, with negative-clamping bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Descending, clamped at zero.
    eigenvalues: Vec<f64>,
    /// How many eigenvalues were clamped to zero.
    clamped_negatives: usize,
    /// Smallest eigenvalue before clamping.
    min_before_clamp: f64,
}

impl Spectrum {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// Smallest eigenvalue as computed, before clamping.
    pub fn lambda_min_raw(&self) -> f64 {
        self.min_before_clamp
    }

    pub fn clamped_negatives(&self) -> usize {
        self.clamped_negatives
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }
}

/// Eigenvalues of the symmetrized matrix, ascending.
pub(crate) fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let sym = (m + m.transpose()) * 0.5;
    let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).expect("eigenvalues are finite"));
    ev
}

/// Full eigenvalue spectrum of a FIM, sorted descending.
pub fn fim_spectrum(fim: &FimMatrix) -> Result<Spectrum> {
    let m = fim.matrix();
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("FIM entry"));
    }
    let ascending = symmetric_eigenvalues(m);
    let min_before_clamp = ascending[0];
    if fim.source() == MomentSource::Exact && min_before_clamp < -PSD_TOLERANCE {
        return Err(Error::IndefiniteExactFim {
            lambda_min: min_before_clamp,
            tol: PSD_TOLERANCE,
        });
    }
    let mut clamped = 0;
    let mut eigenvalues: Vec<f64> = ascending
        .into_iter()
        .rev()
        .map(|v| {
            if v < 0.0 {
                clamped += 1;
                0.0
            } else {
                v
            }
        })
        .collect();
    // descending order survives clamping (only a trailing run is clamped)
    eigenvalues.sort_by(|a, b| b.partial_cmp(a).expect("clamped values are finite"));
    Ok(Spectrum {
        eigenvalues,
        clamped_negatives: clamped,
        min_before_clamp,
    })
}

/// Spectral entropy S = -Σ p_i ln p_i of the normalized spectrum, in nats.
pub fn spectral_entropy(spectrum: &Spectrum) -> Result<f64> {
    let total: f64 = spectrum.eigenvalues.iter().sum();
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::ZeroSpectrum);
    }
    let mut s = 0.0;
    for &ev in &spectrum.eigenvalues {
        if ev > 0.0 {
            let p = ev / total;
            s -= p * p.ln();
        }
    }
    Ok(s)
}

/// Both sides of the Schur complement bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchurBound {
    /// λ_min of the full matrix.
    pub lhs: f64,
    /// λ_min of F22 - F21 (F11 + damping·I)^{-1} F12.
    pub rhs: f64,
    /// lhs ≤ rhs + slack.
    pub holds: bool,
    /// Damping actually used in the solve.
    pub damping_used: f64,
    /// True when a singular F11 at zero damping forced the 1e-10 fallback.
    pub fell_back: bool,
}

/// Evaluate the Schur complement bound on a FIM with the given damping.
/// A singular F11 at zero damping falls back to damping 1e-10 (recorded in
/// the output); if even that fails the error says so.
pub fn schur_bound(fim: &FimMatrix, damping: f64) -> Result<SchurBound> {
    let lhs = symmetric_eigenvalues(fim.matrix())[0];
    schur_bound_given_lhs(fim, damping, lhs)
}

/// Same as [`schur_bound`] with a precomputed λ_min of the full matrix, so
/// callers that already hold the spectrum skip one eigendecomposition.
pub(crate) fn schur_bound_given_lhs(fim: &FimMatrix, damping: f64, lhs: f64) -> Result<SchurBound> {
    if !(damping.is_finite() && damping >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "damping must be nonnegative and finite, got {damping}"
        )));
    }
    let blocks = fim.blocks();
    if blocks.f22.nrows() == 0 {
        return Err(Error::InvalidArgument(
            "Schur bound needs a pair block (d must be at least 2)".into(),
        ));
    }
    let d = blocks.f11.nrows();
    let damped = |lambda: f64| &blocks.f11 + DMatrix::identity(d, d) * lambda;
    let (factor, damping_used, fell_back) = match damped(damping).cholesky() {
        Some(ch) => (ch, damping, false),
        None if damping == 0.0 => {
            let fallback = 1e-10;
            match damped(fallback).cholesky() {
                Some(ch) => (ch, fallback, true),
                None => return Err(Error::SingularBlock { damping }),
            }
        }
        None => return Err(Error::SingularBlock { damping }),
    };
    let solved = factor.solve(&blocks.f12);
    let complement = &blocks.f22 - &blocks.f21 * solved;
    let rhs = symmetric_eigenvalues(&complement)[0];
    Ok(SchurBound {
        lhs,
        rhs,
        holds: lhs <= rhs + SCHUR_SLACK,
        damping_used,
        fell_back,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::{Encoding, ModelParams};
    use crate::fisher::{fim_from_moments, FimMatrix};
    use crate::gibbs::{enumerate_distribution, exact_moments};
    use crate::index::param_len;
    use nalgebra::DVector;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn exact_fim(encoding: Encoding, d: usize, theta_scale: f64, seed: u64) -> FimMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let theta: Vec<f64> = (0..param_len(d))
            .map(|_| rng.gen_range(-theta_scale..=theta_scale))
            .collect();
        let params = ModelParams::new(encoding, d, theta).unwrap();
        let dist = enumerate_distribution(&params, 1.0).unwrap();
        let m = exact_moments(&dist, encoding, 4.min(d)).unwrap();
        fim_from_moments(&m).unwrap()
    }

    #[test]
    fn identity_fim_spectrum_and_entropy() {
        let d = 4;
        let fim = exact_fim(Encoding::Ising, d, 0.0, 0);
        let spec = fim_spectrum(&fim).unwrap();
        let p = param_len(d);
        assert_eq!(spec.len(), p);
        for &ev in spec.eigenvalues() {
            assert!((ev - 1.0).abs() <= 1e-12);
        }
        assert_eq!(spec.clamped_negatives(), 0);
        let s = spectral_entropy(&spec).unwrap();
        assert!((s - (p as f64).ln()).abs() <= 1e-12);
    }

    #[test]
    fn eigenvalues_match_power_iteration_and_trace() {
        let fim = exact_fim(Encoding::Qubo, 4, 0.7, 3);
        let spec = fim_spectrum(&fim).unwrap();
        // power iteration oracle for λ_max
        let m = fim.matrix();
        let p = m.nrows();
        let mut v = DVector::from_element(p, 1.0 / (p as f64).sqrt());
        for _ in 0..10_000 {
            let w = m * &v;
            v = &w / w.norm();
        }
        let rayleigh = (v.transpose() * m * &v)[(0, 0)];
        assert!((spec.lambda_max() - rayleigh).abs() <= 1e-8 * rayleigh.abs());
        // eigenvalue sum equals the trace
        let sum: f64 = spec.eigenvalues().iter().sum();
        assert!((sum - m.trace()).abs() <= 1e-10);
        // descending order
        for w in spec.eigenvalues().windows(2) {
            assert!(w[0] >= w[1]);
        }
    }

    #[test]
    fn entropy_of_known_spectra() {
        let two_level = Spectrum {
            eigenvalues: vec![3.0, 1.0],
            clamped_negatives: 0,
            min_before_clamp: 1.0,
        };
        // p = (3/4, 1/4): S = -(3/4)ln(3/4) - (1/4)ln(1/4)
        let want = -(0.75f64.ln() * 0.75 + 0.25f64.ln() * 0.25);
        assert!((spectral_entropy(&two_level).unwrap() - want).abs() <= 1e-15);

        let with_zero = Spectrum {
            eigenvalues: vec![1.0, 1.0, 0.0],
            clamped_negatives: 1,
            min_before_clamp: -1e-12,
        };
        assert!((spectral_entropy(&with_zero).unwrap() - 2.0f64.ln()).abs() <= 1e-15);

        let dead = Spectrum {
            eigenvalues: vec![0.0, 0.0],
            clamped_negatives: 2,
            min_before_clamp: -0.1,
        };
        assert!(matches!(spectral_entropy(&dead), Err(Error::ZeroSpectrum)));
    }

    #[test]
    fn empirical_negatives_clamp_but_exact_negatives_error() {
        use crate::moments::MomentSource;
        let m = nalgebra::DMatrix::from_row_slice(3, 3, &[1.0, 1.1, 0.0, 1.1, 1.0, 0.0, 0.0, 0.0, 1.0]);
        let empirical =
            FimMatrix::from_matrix(2, Encoding::Qubo, MomentSource::Empirical, m.clone()).unwrap();
        let spec = fim_spectrum(&empirical).unwrap();
        assert_eq!(spec.clamped_negatives(), 1);
        assert!((spec.lambda_min_raw() - (-0.1)).abs() <= 1e-12);
        assert_eq!(spec.eigenvalues().last().copied().unwrap(), 0.0);

        let exact = FimMatrix::from_matrix(2, Encoding::Qubo, MomentSource::Exact, m).unwrap();
        assert!(matches!(
            fim_spectrum(&exact).map(|_| ()),
            Err(Error::IndefiniteExactFim { .. })
        ));
    }

    #[test]
    fn schur_bound_identity_case() {
        let fim = exact_fim(Encoding::Ising, 4, 0.0, 0);
        let b = schur_bound(&fim, 0.0).unwrap();
        assert!((b.lhs - 1.0).abs() <= 1e-12);
        assert!((b.rhs - 1.0).abs() <= 1e-12);
        assert!(b.holds);
        assert!(!b.fell_back);
        assert_eq!(b.damping_used, 0.0);
    }

    #[test]
    fn schur_bound_matches_explicit_inverse_oracle() {
        for (encoding, seed) in [(Encoding::Ising, 1u64), (Encoding::Qubo, 2u64)] {
            let fim = exact_fim(encoding, 4, 0.6, seed);
            let damping = 1e-3;
            let b = schur_bound(&fim, damping).unwrap();
            let blocks = fim.blocks();
            let inv = (blocks.f11 + DMatrix::identity(4, 4) * damping)
                .try_inverse()
                .unwrap();
            let complement = &blocks.f22 - &blocks.f21 * inv * &blocks.f12;
            let oracle = symmetric_eigenvalues(&complement)[0];
            assert!((b.rhs - oracle).abs() <= 1e-10);
            assert!(b.holds, "lhs {} rhs {}", b.lhs, b.rhs);
            assert!(!b.fell_back);
        }
    }

    #[test]
    fn schur_bound_holds_on_random_psd_matrices() {
        for seed in 0..25u64 {
            let d = 4;
            let p = param_len(d);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            // PSD by construction, rank-deficient every third case
            let cols = if seed % 3 == 0 { p - 3 } else { p };
            let g = DMatrix::from_fn(p, cols, |_, _| rng.gen_range(-1.0..1.0));
            let m = &g * g.transpose();
            let fim = FimMatrix::from_matrix(
                d,
                Encoding::Ising,
                crate::moments::MomentSource::Empirical,
                m,
            )
            .unwrap();
            let b = schur_bound(&fim, 0.0).unwrap();
            assert!(b.holds, "seed {seed}: lhs {} rhs {}", b.lhs, b.rhs);
        }
    }

    #[test]
    fn singular_linear_block_falls_back_and_reports() {
        // F11 = 0: bound becomes λ_min(F) ≤ λ_min(F22)
        let p = param_len(2);
        let mut m = DMatrix::zeros(p, p);
        m[(2, 2)] = 1.0;
        let fim =
            FimMatrix::from_matrix(2, Encoding::Ising, crate::moments::MomentSource::Empirical, m)
                .unwrap();
        let b = schur_bound(&fim, 0.0).unwrap();
        assert!(b.fell_back);
        assert_eq!(b.damping_used, 1e-10);
        assert!(b.holds);
    }

    #[test]
    fn damping_validation() {
        let fim = exact_fim(Encoding::Ising, 3, 0.2, 4);
        assert!(schur_bound(&fim, -1.0).is_err());
        assert!(schur_bound(&fim, f64::NAN).is_err());
    }
}
