//! Reduced density matrices, Schmidt spectra and the entanglement entropy.
//!
//! Entropies are in nats. The composite basis index of `H_A ⊗ H_B` is
//! `i·d_B + j` everywhere.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::state_space::{Bipartition, PureState};
use crate::{Error, Result};

/// Hermiticity residual above which eigenvalue requests are refused.
const HERMITIAN_TOL: f64 = 1e-8;
/// Eigenvalues in `[-SPECTRUM_TOL, 0)` are rounding noise and clipped to zero.
const SPECTRUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(DMatrix<Complex64>);

impl HermitianMatrix {
    /// Wraps `entries` without checking Hermiticity; the eigensolver checks it.
    pub fn new(entries: DMatrix<Complex64>) -> Self {
        assert!(entries.is_square(), "Hermitian matrix must be square");
        Self(entries)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    /// `max |H - H†|` over entries.
    pub fn hermiticity_residual(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }
}

/// Real eigenvalues in descending order.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum(Vec<f64>);

impl Spectrum {
    /// Sorts `values` into descending order.
    pub fn new(mut values: Vec<f64>) -> Self {
        values.sort_by(|a, b| b.total_cmp(a));
        Self(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }
}

/// `ρ_A = Tr_B |ψ⟩⟨ψ|`.
pub fn reduced_density(psi: &PureState, bip: Bipartition) -> Result<HermitianMatrix> {
    bip.check(psi)?;
    Ok(HermitianMatrix(partial_trace_b(psi.amplitudes(), bip.d_a(), bip.d_b())))
}

/// `ρ_A[i, i'] = Σ_j ψ[i·d_b + j] ψ*[i'·d_b + j]`.
fn partial_trace_b(psi: &[Complex64], d_a: usize, d_b: usize) -> DMatrix<Complex64> {
    let mut rho = DMatrix::zeros(d_a, d_a);
    for i in 0..d_a {
        let row_i = &psi[i * d_b..(i + 1) * d_b];
        for k in i..d_a {
            let row_k = &psi[k * d_b..(k + 1) * d_b];
            let v: Complex64 = row_i.iter().zip(row_k).map(|(a, b)| a * b.conj()).sum();
            rho[(i, k)] = v;
            rho[(k, i)] = v.conj();
        }
    }
    rho
}

/// `ρ_B[j, j'] = Σ_i ψ[i·d_b + j] ψ*[i·d_b + j']`.
fn partial_trace_a(psi: &[Complex64], d_a: usize, d_b: usize) -> DMatrix<Complex64> {
    let mut rho = DMatrix::<Complex64>::zeros(d_b, d_b);
    for row in psi.chunks_exact(d_b).take(d_a) {
        for j in 0..d_b {
            let a = row[j];
            for k in j..d_b {
                rho[(j, k)] += a * row[k].conj();
            }
        }
    }
    for j in 0..d_b {
        for k in 0..j {
            rho[(j, k)] = rho[(k, j)].conj();
        }
    }
    rho
}

/// Eigenvalues of a Hermitian matrix, descending.
pub fn hermitian_eigenvalues(h: &HermitianMatrix) -> Result<Spectrum> {
    let residual = h.hermiticity_residual();
    if residual > HERMITIAN_TOL {
        return Err(Error::NotHermitian(residual));
    }
    let values = h.0.clone().symmetric_eigenvalues();
    Ok(Spectrum::new(values.iter().copied().collect()))
}

/// `-Σ λ ln λ` with `0·ln 0 = 0`.
pub fn von_neumann_entropy(s: &Spectrum) -> Result<f64> {
    let mut entropy = 0.0;
    for &lambda in s.values() {
        if lambda < -SPECTRUM_TOL {
            return Err(Error::InvalidSpectrum(lambda));
        }
        if lambda > 0.0 {
            entropy -= lambda * lambda.ln();
        }
    }
    Ok(entropy.max(0.0))
}

/// Entanglement entropy `E([ψ]) = S(ρ_A)` in nats.
///
/// Both reduced states share their nonzero spectrum, so the smaller factor is
/// diagonalized.
pub fn entanglement(psi: &PureState, bip: Bipartition) -> Result<f64> {
    bip.check(psi)?;
    if bip.d_a() == 1 || bip.d_b() == 1 {
        return Ok(0.0);
    }
    let rho = if bip.d_a() <= bip.d_b() {
        partial_trace_b(psi.amplitudes(), bip.d_a(), bip.d_b())
    } else {
        partial_trace_a(psi.amplitudes(), bip.d_a(), bip.d_b())
    };
    von_neumann_entropy(&hermitian_eigenvalues(&HermitianMatrix(rho))?)
}

/// Schmidt coefficients (descending, `d_A` of them); their squares are the
/// spectrum of `ρ_A`.
pub fn schmidt_coefficients(psi: &PureState, bip: Bipartition) -> Result<Vec<f64>> {
    let spectrum = hermitian_eigenvalues(&reduced_density(psi, bip)?)?;
    spectrum
        .into_values()
        .into_iter()
        .map(|lambda| {
            if lambda < -SPECTRUM_TOL {
                Err(Error::InvalidSpectrum(lambda))
            } else {
                Ok(lambda.max(0.0).sqrt())
            }
        })
        .collect()
}
