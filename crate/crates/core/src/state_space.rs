//! Pure states as ray representatives, Haar sampling, overlaps and distances.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::{Error, Result};

/// Norms below this are treated as the zero vector.
const ZERO_NORM: f64 = 1e-300;

/// Normalized complex amplitude vector representing a ray `[ψ]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vec<Complex64>,
}

impl PureState {
    /// Rescales `v` to unit norm.
    pub fn normalize(v: Vec<Complex64>) -> Result<Self> {
        if v.is_empty() {
            return Err(Error::ZeroVector(0.0));
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm >= ZERO_NORM) {
            return Err(Error::ZeroVector(norm));
        }
        let scale = 1.0 / norm;
        Ok(Self {
            amplitudes: v.into_iter().map(|z| z * scale).collect(),
        })
    }

    /// Computational basis vector `|k⟩` in dimension `dim`.
    pub fn basis(dim: usize, k: usize) -> Self {
        assert!(k < dim, "basis index {k} out of range for dimension {dim}");
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[k] = Complex64::new(1.0, 0.0);
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self|other⟩`, conjugate-linear in `self`.
    pub fn overlap(&self, other: &PureState) -> Result<Complex64> {
        overlap(self, other)
    }
}

/// Factorization `H = H_A ⊗ H_B` with composite index `i·d_B + j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bipartition {
    d_a: usize,
    d_b: usize,
}

impl Bipartition {
    pub fn new(d_a: usize, d_b: usize) -> Result<Self> {
        if d_a == 0 || d_b == 0 {
            return Err(Error::InvalidBipartition { d_a, d_b });
        }
        Ok(Self { d_a, d_b })
    }

    /// Block of `block_len` sites out of `n_sites` spin-1/2 sites.
    pub fn spin_chain(n_sites: usize, block_len: usize) -> Result<Self> {
        if block_len == 0 || block_len >= n_sites || n_sites >= usize::BITS as usize {
            return Err(Error::InvalidBipartition {
                d_a: 1 << block_len.min(63),
                d_b: 1 << n_sites.saturating_sub(block_len).min(63),
            });
        }
        Self::new(1 << block_len, 1 << (n_sites - block_len))
    }

    pub fn d_a(&self) -> usize {
        self.d_a
    }

    pub fn d_b(&self) -> usize {
        self.d_b
    }

    pub fn dim(&self) -> usize {
        self.d_a * self.d_b
    }

    pub fn swapped(&self) -> Self {
        Self {
            d_a: self.d_b,
            d_b: self.d_a,
        }
    }

    pub(crate) fn check(&self, psi: &PureState) -> Result<()> {
        if psi.dim() != self.dim() {
            return Err(Error::DimMismatch {
                expected: self.dim(),
                got: psi.dim(),
            });
        }
        Ok(())
    }
}

/// Counter-based source of per-sample random streams.
///
/// Sample `i` draws from a ChaCha8 stream keyed by `master_seed` with stream id
/// `i`, so sample `i` is the same no matter which worker produces it or in
/// which order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeededSampler {
    master_seed: u64,
    counter: u64,
}

impl SeededSampler {
    pub fn new(master_seed: u64) -> Self {
        Self {
            master_seed,
            counter: 0,
        }
    }

    /// Sampler positioned at an arbitrary counter, e.g. a worker's range start.
    pub fn at(master_seed: u64, counter: u64) -> Self {
        Self {
            master_seed,
            counter,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn counter(&self) -> u64 {
        self.counter
    }

    /// Stream for sample `index`; a pure function of `(master_seed, index)`.
    pub fn stream(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(index);
        rng
    }

    /// Stream at the current counter, then advances the counter.
    pub fn next_stream(&mut self) -> ChaCha8Rng {
        let rng = self.stream(self.counter);
        self.counter += 1;
        rng
    }

    /// Reserves `n` consecutive sample indices and returns the first one.
    pub fn reserve(&mut self, n: u64) -> u64 {
        let start = self.counter;
        self.counter += n;
        start
    }
}

/// Haar-random state from an explicit stream: a normalized vector of
/// independent standard complex Gaussians.
pub fn haar_state_from<R: rand::Rng + ?Sized>(dim: usize, rng: &mut R) -> PureState {
    assert!(dim >= 1, "Haar sampling needs dim >= 1");
    loop {
        let z: Vec<Complex64> = (0..dim)
            .map(|_| {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                Complex64::new(re, im)
            })
            .collect();
        // A zero draw has probability zero; redraw rather than fail.
        if let Ok(psi) = PureState::normalize(z) {
            return psi;
        }
    }
}

/// Draws the next Haar-random state from `sampler` (one counter step).
pub fn haar_sample(dim: usize, sampler: &mut SeededSampler) -> PureState {
    haar_state_from(dim, &mut sampler.next_stream())
}

/// `⟨a|b⟩`, conjugate-linear in the first argument.
pub fn overlap(a: &PureState, b: &PureState) -> Result<Complex64> {
    if a.dim() != b.dim() {
        return Err(Error::DimMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    Ok(a
        .amplitudes
        .iter()
        .zip(&b.amplitudes)
        .map(|(x, y)| x.conj() * y)
        .sum())
}

/// Fubini-Study geodesic distance `2·arccos|⟨a|b⟩|`.
///
/// With this normalization a single qubit is the unit Bloch sphere and the
/// distance is the great-circle angle between Bloch vectors.
pub fn fs_distance(a: &PureState, b: &PureState) -> Result<f64> {
    let fidelity = overlap(a, b)?.norm().clamp(0.0, 1.0);
    Ok(2.0 * fidelity.acos())
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn bloch(theta: f64, phi: f64) -> PureState {
        PureState::normalize(vec![
            c((theta / 2.0).cos(), 0.0),
            Complex64::from_polar((theta / 2.0).sin(), phi),
        ])
        .unwrap()
    }

    /// Haar unitary from the QR decomposition of a complex Gaussian matrix,
    /// with the phases of R's diagonal folded back into Q.
    pub(crate) fn random_unitary(dim: usize, sampler: &mut SeededSampler) -> DMatrix<Complex64> {
        let mut rng = sampler.next_stream();
        let g = DMatrix::from_fn(dim, dim, |_, _| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            c(re, im)
        });
        let qr = g.qr();
        let mut q = qr.q();
        let r = qr.r();
        for j in 0..dim {
            let d = r[(j, j)];
            let phase = d / d.norm();
            for i in 0..dim {
                q[(i, j)] *= phase;
            }
        }
        q
    }

    pub(crate) fn apply(u: &DMatrix<Complex64>, psi: &PureState) -> PureState {
        let v = nalgebra::DVector::from_column_slice(psi.amplitudes());
        PureState::normalize((u * v).as_slice().to_vec()).unwrap()
    }

    #[test]
    fn normalize_examples() {
        let psi = PureState::normalize(vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(psi.amplitudes(), &[c(1.0, 0.0), c(0.0, 0.0)]);

        let psi = PureState::normalize(vec![c(3.0, 0.0), c(0.0, 4.0)]).unwrap();
        assert_abs_diff_eq!(psi.amplitudes()[0].re, 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(psi.amplitudes()[1].im, 0.8, epsilon = 1e-15);

        assert!(matches!(
            PureState::normalize(vec![c(0.0, 0.0); 2]),
            Err(Error::ZeroVector(_))
        ));
        assert!(matches!(
            PureState::normalize(vec![]),
            Err(Error::ZeroVector(_))
        ));
    }

    #[test]
    fn haar_one_dimensional_is_a_phase() {
        let mut s = SeededSampler::new(3);
        for _ in 0..10 {
            let psi = haar_sample(1, &mut s);
            assert_abs_diff_eq!(psi.amplitudes()[0].norm(), 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn haar_marginals_are_uniform() {
        let n = 100_000;
        let mut s = SeededSampler::new(11);
        let mut sum = [0.0; 4];
        let mut sum_sq = [0.0; 4];
        for _ in 0..n {
            let psi = haar_sample(4, &mut s);
            assert!((psi.norm() - 1.0).abs() < 1e-12);
            for (k, a) in psi.amplitudes().iter().enumerate() {
                let p = a.norm_sqr();
                sum[k] += p;
                sum_sq[k] += p * p;
            }
        }
        for k in 0..4 {
            let mean = sum[k] / n as f64;
            let var = sum_sq[k] / n as f64 - mean * mean;
            let se = (var / n as f64).sqrt();
            assert!((mean - 0.25).abs() < 3.0 * se, "k={k} mean={mean} se={se}");
        }
    }

    #[test]
    fn sampler_streams_are_position_addressed() {
        let mut serial = SeededSampler::new(42);
        let a: Vec<PureState> = (0..8).map(|_| haar_sample(3, &mut serial)).collect();
        // Out-of-order reconstruction from the counter alone.
        for i in (0..8u64).rev() {
            let b = haar_state_from(3, &mut SeededSampler::new(42).stream(i));
            assert_eq!(a[i as usize], b);
        }
        let other = haar_sample(3, &mut SeededSampler::new(43));
        assert_ne!(a[0], other);
    }

    #[test]
    fn overlap_examples() {
        let psi = bloch(1.1, 0.3);
        assert_abs_diff_eq!(overlap(&psi, &psi).unwrap().re, 1.0, epsilon = 1e-15);
        let z = overlap(&PureState::basis(2, 0), &PureState::basis(2, 1)).unwrap();
        assert_eq!(z, c(0.0, 0.0));
        let (theta, phi) = (0.9, 2.1);
        let z = overlap(&PureState::basis(2, 0), &bloch(theta, phi)).unwrap();
        assert_abs_diff_eq!(z.re, (theta / 2.0).cos(), epsilon = 1e-15);
        assert_abs_diff_eq!(z.im, 0.0, epsilon = 1e-15);
        assert!(matches!(
            overlap(&PureState::basis(2, 0), &PureState::basis(3, 0)),
            Err(Error::DimMismatch { .. })
        ));
    }

    #[test]
    fn fs_distance_examples() {
        let psi = bloch(0.4, 1.0);
        assert_abs_diff_eq!(fs_distance(&psi, &psi).unwrap(), 0.0, epsilon = 1e-7);
        let d = fs_distance(&PureState::basis(2, 0), &PureState::basis(2, 1)).unwrap();
        assert_abs_diff_eq!(d, PI, epsilon = 1e-15);
        for theta in [0.1, 0.7, 1.5, 2.9] {
            let d = fs_distance(&bloch(0.0, 0.0), &bloch(theta, 0.0)).unwrap();
            assert_abs_diff_eq!(d, theta, epsilon = 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn distance_is_unitarily_invariant(seed in any::<u64>(), dim in 2usize..6) {
            let mut s = SeededSampler::new(seed);
            let a = haar_sample(dim, &mut s);
            let b = haar_sample(dim, &mut s);
            let u = random_unitary(dim, &mut s);
            let before = fs_distance(&a, &b).unwrap();
            let after = fs_distance(&apply(&u, &a), &apply(&u, &b)).unwrap();
            prop_assert!((before - after).abs() < 1e-10);
        }

        #[test]
        fn distance_satisfies_triangle_inequality(seed in any::<u64>(), dim in 2usize..6) {
            let mut s = SeededSampler::new(seed);
            let a = haar_sample(dim, &mut s);
            let b = haar_sample(dim, &mut s);
            let c = haar_sample(dim, &mut s);
            let ab = fs_distance(&a, &b).unwrap();
            let bc = fs_distance(&b, &c).unwrap();
            let ac = fs_distance(&a, &c).unwrap();
            prop_assert!(ac <= ab + bc + 1e-10);
        }

        #[test]
        fn every_sample_is_normalized(seed in any::<u64>(), dim in 1usize..64) {
            let psi = haar_sample(dim, &mut SeededSampler::new(seed));
            prop_assert!((psi.norm() - 1.0).abs() < 1e-12);
        }
    }
}
