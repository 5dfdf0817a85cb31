//! Density of states `ω(e)`, geometric entropy `S_geo(e) = ln ω(e)` and
//! microcanonical averages of the Weingarten trace.
//!
//! Two routes are provided:
//!
//! - Monte Carlo: entanglement values of Haar-random states are histogrammed
//!   into a probability density. `P(e) ∝ ω(e)`, so the normalization `∫ω = 1`
//!   fixes the free additive constant in `S_geo`.
//! - Quadrature on reduced families: a two-coordinate chart whose field depends
//!   on the first coordinate only, so every level set is a closed orbit of the
//!   second (angular) coordinate. Then `ω(e) = ∮ dσ/‖∇E‖` and
//!   `⟨Tr W⟩_e = ω⁻¹ ∮ div ξ dσ/‖∇E‖`.

use std::f64::consts::TAU;

use rayon::prelude::*;

use crate::chart::{divergence_xi, fs_metric, scalar_gradient, Chart, FdSteps, ScalarField};
use crate::entanglement::entanglement;
use crate::state_space::{haar_state_from, Bipartition, SeededSampler};
use crate::{Error, Result};

/// Largest spin chain sampled (4096-dimensional states).
pub const MAX_QUBITS: usize = 12;

/// Entanglement of `n` Haar-random states across `bip`.
///
/// Sample `k` uses stream `sampler.counter() + k`; the counter is advanced by
/// `n`. Work is spread over the current rayon pool and the output does not
/// depend on its size.
pub fn sample_entanglement(
    bip: Bipartition,
    n: usize,
    sampler: &mut SeededSampler,
) -> Result<Vec<f64>> {
    let start = sampler.reserve(n as u64);
    let dim = bip.dim();
    (0..n as u64)
        .into_par_iter()
        .map(|k| {
            let psi = haar_state_from(dim, &mut sampler.stream(start + k));
            entanglement(&psi, bip)
        })
        .collect()
}

/// How to place histogram bins.
#[derive(Debug, Clone, PartialEq)]
pub enum Binning {
    /// Freedman-Diaconis width over the sample range.
    FreedmanDiaconis,
    /// Equal-width bins over the sample range.
    Count(usize),
    /// Equal-width bins over `[lo, hi]`.
    Range { lo: f64, hi: f64, bins: usize },
    /// Explicit increasing edges.
    Edges(Vec<f64>),
}

impl Default for Binning {
    fn default() -> Self {
        Binning::FreedmanDiaconis
    }
}

/// Upper bound on automatically chosen bin counts.
const MAX_AUTO_BINS: usize = 10_000;

fn uniform_edges(lo: f64, hi: f64, bins: usize) -> Vec<f64> {
    let width = (hi - lo) / bins as f64;
    let mut edges: Vec<f64> = (0..bins).map(|k| lo + k as f64 * width).collect();
    edges.push(hi);
    edges
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    match sorted.get(i + 1) {
        Some(next) => sorted[i] + frac * (next - sorted[i]),
        None => sorted[i],
    }
}

impl Binning {
    fn edges(&self, samples: &[f64], lo: f64, hi: f64) -> Result<Vec<f64>> {
        let edges = match self {
            Binning::FreedmanDiaconis => {
                let mut sorted = samples.to_vec();
                sorted.sort_by(f64::total_cmp);
                let iqr = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);
                let n = sorted.len() as f64;
                let bins = if iqr > 0.0 {
                    let width = 2.0 * iqr / n.cbrt();
                    ((hi - lo) / width).ceil() as usize
                } else {
                    n.sqrt().ceil() as usize
                };
                uniform_edges(lo, hi, bins.clamp(1, MAX_AUTO_BINS))
            }
            Binning::Count(bins) => {
                if *bins == 0 {
                    return Err(Error::InvalidBinning("zero bins".into()));
                }
                uniform_edges(lo, hi, *bins)
            }
            Binning::Range { lo, hi, bins } => {
                if *bins == 0 || !(hi > lo) {
                    return Err(Error::InvalidBinning(format!(
                        "{bins} bins over [{lo}, {hi}]"
                    )));
                }
                uniform_edges(*lo, *hi, *bins)
            }
            Binning::Edges(edges) => edges.clone(),
        };
        if edges.len() < 2 || edges.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidBinning(
                "edges must be strictly increasing, at least two".into(),
            ));
        }
        Ok(edges)
    }
}

/// Spin-chain metadata attached to scans.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainBlock {
    pub n_qubits: usize,
    pub block_len: usize,
}

/// Histogram estimate of the density of states as a probability density.
///
/// Bins are half-open `[lo, hi)` except the last, which is closed. The first
/// and last bins sit against the support boundary (no entanglement, or
/// maximal entanglement), where `ω` can vanish or peak; see
/// [`OmegaEstimate::is_boundary_bin`].
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaEstimate {
    pub bin_edges: Vec<f64>,
    pub density: Vec<f64>,
    /// `√(p(1−p)/N)/width` per bin.
    pub std_error: Vec<f64>,
    pub counts: Vec<u64>,
    /// Samples that fell inside the binned range; densities are normalized to it.
    pub n_samples: usize,
    /// Samples outside explicit edges.
    pub n_outside: usize,
    /// Mean and standard error of all samples.
    pub sample_mean: f64,
    pub sample_std_error: f64,
    pub seed: Option<u64>,
    pub chain: Option<ChainBlock>,
}

impl OmegaEstimate {
    pub fn n_bins(&self) -> usize {
        self.density.len()
    }

    pub fn width(&self, k: usize) -> f64 {
        self.bin_edges[k + 1] - self.bin_edges[k]
    }

    pub fn center(&self, k: usize) -> f64 {
        0.5 * (self.bin_edges[k] + self.bin_edges[k + 1])
    }

    pub fn is_boundary_bin(&self, k: usize) -> bool {
        k == 0 || k + 1 == self.n_bins()
    }

    /// `Σ density_k · width_k`, 1 up to rounding.
    pub fn integral(&self) -> f64 {
        (0..self.n_bins()).map(|k| self.density[k] * self.width(k)).sum()
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_chain(mut self, chain: ChainBlock) -> Self {
        self.chain = Some(chain);
        self
    }
}

/// Normalized histogram of `samples` with per-bin standard errors.
pub fn estimate_omega(samples: &[f64], binning: &Binning) -> Result<OmegaEstimate> {
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    let (lo, hi) = samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    if !(hi > lo) {
        return Err(Error::DegenerateSamples(lo));
    }
    let edges = binning.edges(samples, lo, hi)?;
    let n_bins = edges.len() - 1;
    let last = edges[n_bins];

    let mut counts = vec![0u64; n_bins];
    let mut n_outside = 0;
    for &x in samples {
        if x < edges[0] || x > last {
            n_outside += 1;
            continue;
        }
        let k = if x == last {
            n_bins - 1
        } else {
            edges.partition_point(|&b| b <= x) - 1
        };
        counts[k] += 1;
    }
    let n_in = samples.len() - n_outside;
    if n_in == 0 {
        return Err(Error::EmptyInput);
    }

    let total = n_in as f64;
    let mut density = Vec::with_capacity(n_bins);
    let mut std_error = Vec::with_capacity(n_bins);
    for (k, &count) in counts.iter().enumerate() {
        let width = edges[k + 1] - edges[k];
        let p = count as f64 / total;
        density.push(p / width);
        std_error.push((p * (1.0 - p) / total).sqrt() / width);
    }

    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);

    Ok(OmegaEstimate {
        bin_edges: edges,
        density,
        std_error,
        counts,
        n_samples: n_in,
        n_outside,
        sample_mean: mean,
        sample_std_error: (var / n).sqrt(),
        seed: None,
        chain: None,
    })
}

/// `S_geo` sampled on a grid of entanglement values. Entries are `None` where
/// the density is zero (empty bins) or where the difference stencil touches
/// such an entry.
#[derive(Debug, Clone, PartialEq)]
pub struct SGeoCurve {
    pub e_centers: Vec<f64>,
    pub s_geo: Vec<Option<f64>>,
    pub ds_de: Vec<Option<f64>>,
}

impl SGeoCurve {
    /// Curve from pointwise density values at increasing `e`.
    pub fn from_points(e: Vec<f64>, omega: &[f64]) -> Result<Self> {
        if e.len() != omega.len() {
            return Err(Error::DimMismatch {
                expected: e.len(),
                got: omega.len(),
            });
        }
        let s_geo: Vec<Option<f64>> = omega
            .iter()
            .map(|&w| (w > 0.0).then(|| w.ln()))
            .collect();
        let present = s_geo.iter().filter(|s| s.is_some()).count();
        if present < 3 {
            return Err(Error::TooFewBins(present));
        }
        let ds_de = differentiate(&e, &s_geo);
        Ok(Self {
            e_centers: e,
            s_geo,
            ds_de,
        })
    }
}

/// Second-order differences on a nonuniform grid; one-sided at the ends.
fn differentiate(x: &[f64], y: &[Option<f64>]) -> Vec<Option<f64>> {
    let n = x.len();
    (0..n)
        .map(|k| {
            let yk = y[k]?;
            if k == 0 {
                Some((y[1]? - yk) / (x[1] - x[0]))
            } else if k + 1 == n {
                Some((yk - y[k - 1]?) / (x[k] - x[k - 1]))
            } else {
                let (y0, y2) = (y[k - 1]?, y[k + 1]?);
                let h1 = x[k] - x[k - 1];
                let h2 = x[k + 1] - x[k];
                Some(
                    -h2 / (h1 * (h1 + h2)) * y0
                        + (h2 - h1) / (h1 * h2) * yk
                        + h1 / (h2 * (h1 + h2)) * y2,
                )
            }
        })
        .collect()
}

/// Geometric entropy of a histogram estimate at its bin centers.
pub fn s_geo_curve(omega: &OmegaEstimate) -> Result<SGeoCurve> {
    let centers = (0..omega.n_bins()).map(|k| omega.center(k)).collect();
    SGeoCurve::from_points(centers, &omega.density)
}

/// Two-coordinate chart whose field depends on coordinate 0 only, so each
/// level set is the orbit of coordinate 1 over one period.
pub struct LevelFamily<C, F> {
    pub chart: C,
    pub field: F,
    /// Bracket in coordinate 0 searched for a level; the field must be
    /// monotone on it.
    pub level_range: (f64, f64),
    /// Value of coordinate 1 used while searching for a level.
    pub orbit_start: f64,
    /// Period of coordinate 1.
    pub orbit_period: f64,
    pub steps: FdSteps,
}

impl<C: Chart, F: ScalarField> LevelFamily<C, F> {
    pub fn new(chart: C, field: F, level_range: (f64, f64)) -> Self {
        Self {
            chart,
            field,
            level_range,
            orbit_start: 0.0,
            orbit_period: TAU,
            steps: FdSteps::default(),
        }
    }

    pub fn with_steps(mut self, steps: FdSteps) -> Self {
        self.steps = steps;
        self
    }

    fn level_value(&self, t: f64) -> Result<f64> {
        self.field.value(&[t, self.orbit_start])
    }

    /// Coordinate 0 of the level set `field = e`, by bisection.
    pub fn level_coordinate(&self, e: f64) -> Result<f64> {
        if self.chart.dim() != 2 {
            return Err(Error::DimMismatch {
                expected: 2,
                got: self.chart.dim(),
            });
        }
        let (mut lo, mut hi) = self.level_range;
        let (f_lo, f_hi) = (self.level_value(lo)?, self.level_value(hi)?);
        let (min, max) = (f_lo.min(f_hi), f_lo.max(f_hi));
        if !(e >= min && e <= max) {
            return Err(Error::OutOfRange {
                value: e,
                lo: min,
                hi: max,
            });
        }
        let increasing = f_hi >= f_lo;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if (self.level_value(mid)? < e) == increasing {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Orbit nodes of the level set with their microcanonical weights
    /// `√g₁₁/‖∇E‖ · Δφ` (periodic trapezoid rule).
    fn orbit(&self, e: f64, n_phi: usize) -> Result<Vec<([f64; 2], f64)>> {
        if n_phi == 0 {
            return Err(Error::OutOfRange {
                value: 0.0,
                lo: 1.0,
                hi: f64::INFINITY,
            });
        }
        let t = self.level_coordinate(e)?;
        let dphi = self.orbit_period / n_phi as f64;
        (0..n_phi)
            .map(|k| {
                let x = [t, self.orbit_start + k as f64 * dphi];
                let grad = scalar_gradient(&self.chart, &x, &self.field, self.steps.h1)?;
                if !(grad.norm_sq > self.steps.epsilon_grad) {
                    return Err(Error::VanishingGradient(grad.norm_sq));
                }
                let line = grad.metric.g[(1, 1)].max(0.0).sqrt();
                Ok((x, line / grad.norm_sq.sqrt() * dphi))
            })
            .collect()
    }
}

/// `ω(e) = ∮ dσ_FS/‖∇E‖` over the level set of a reduced family.
pub fn omega_quadrature_reduced<C: Chart, F: ScalarField>(
    family: &LevelFamily<C, F>,
    e: f64,
    n_phi: usize,
) -> Result<f64> {
    Ok(family.orbit(e, n_phi)?.iter().map(|(_, w)| w).sum())
}

/// Microcanonical average `⟨Tr W⟩_e = ω⁻¹ ∮ div ξ dσ_FS/‖∇E‖`.
pub fn average_trace_w<C: Chart, F: ScalarField>(
    family: &LevelFamily<C, F>,
    e: f64,
    n_phi: usize,
) -> Result<f64> {
    let orbit = family.orbit(e, n_phi)?;
    let mut omega = 0.0;
    let mut acc = 0.0;
    for (x, w) in &orbit {
        acc += divergence_xi(&family.chart, x, &family.field, &family.steps)? * w;
        omega += w;
    }
    Ok(acc / omega)
}

/// `∂_e S_geo` from the quadrature density, by a central difference of
/// `ln ω` with step `de`.
pub fn ds_geo_de_quadrature<C: Chart, F: ScalarField>(
    family: &LevelFamily<C, F>,
    e: f64,
    de: f64,
    n_phi: usize,
) -> Result<f64> {
    let grid = vec![e - de, e, e + de];
    let omega = grid
        .iter()
        .map(|&x| omega_quadrature_reduced(family, x, n_phi))
        .collect::<Result<Vec<_>>>()?;
    let curve = SGeoCurve::from_points(grid, &omega)?;
    Ok(curve.ds_de[1].expect("all three points are present"))
}

/// Induced length of the orbit through `x`, `∮ √g₁₁ dφ`; used to check that a
/// chart closes up as expected.
pub fn orbit_length<C: Chart>(chart: &C, t: f64, n_phi: usize, h: f64) -> Result<f64> {
    let dphi = TAU / n_phi as f64;
    (0..n_phi)
        .map(|k| Ok(fs_metric(chart, &[t, k as f64 * dphi], h)?.g[(1, 1)].max(0.0).sqrt() * dphi))
        .sum()
}

/// Haar scan of the block entanglement of an `n_qubits` spin-1/2 chain with a
/// block of `block_len` sites.
pub fn spin_chain_scan(
    n_qubits: usize,
    block_len: usize,
    n: usize,
    sampler: &mut SeededSampler,
    binning: &Binning,
) -> Result<OmegaEstimate> {
    if n_qubits > MAX_QUBITS {
        return Err(Error::TooLarge {
            qubits: n_qubits,
            cap: MAX_QUBITS,
        });
    }
    let bip = Bipartition::spin_chain(n_qubits, block_len)?;
    let seed = sampler.master_seed();
    let samples = sample_entanglement(bip, n, sampler)?;
    Ok(estimate_omega(&samples, binning)?
        .with_seed(seed)
        .with_chain(ChainBlock {
            n_qubits,
            block_len,
        }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{
        bloch_chart, bloch_height, e_of_theta, omega_reduced, s_geo_reduced, schmidt_chart,
        theta_of_e, trace_w, BlochChart, SchmidtChart,
    };
    use crate::chart::EntanglementField;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, LN_2, PI};

    fn schmidt_family() -> LevelFamily<SchmidtChart, EntanglementField<SchmidtChart>> {
        LevelFamily::new(
            schmidt_chart(),
            EntanglementField::new(schmidt_chart(), Bipartition::new(2, 2).unwrap()),
            (0.0, FRAC_PI_4),
        )
    }

    fn bloch_family() -> LevelFamily<BlochChart, fn(&[f64]) -> f64> {
        LevelFamily::new(bloch_chart(), bloch_height as fn(&[f64]) -> f64, (0.0, PI))
    }

    #[test]
    fn trivial_cut_has_no_entanglement() {
        let values =
            sample_entanglement(Bipartition::new(1, 4).unwrap(), 100, &mut SeededSampler::new(1)).unwrap();
        assert!(values.iter().all(|&e| e == 0.0));
        assert!(matches!(
            estimate_omega(&values, &Binning::default()),
            Err(Error::DegenerateSamples(_))
        ));
    }

    #[test]
    fn two_qubit_samples_stay_in_range() {
        let mut s = SeededSampler::new(8);
        let values = sample_entanglement(Bipartition::new(2, 2).unwrap(), 20_000, &mut s).unwrap();
        assert_eq!(s.counter(), 20_000);
        assert!(values.iter().all(|&e| (0.0..=LN_2 + 1e-12).contains(&e)));
    }

    #[test]
    fn sampling_is_independent_of_pool_size() {
        let bip = Bipartition::new(2, 3).unwrap();
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| sample_entanglement(bip, 5000, &mut SeededSampler::new(99)).unwrap())
        };
        let a = run(1);
        let b = run(7);
        assert_eq!(a.iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
                   b.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
        // Consecutive calls continue the stream instead of repeating it.
        let mut s = SeededSampler::new(99);
        let first = sample_entanglement(bip, 2500, &mut s).unwrap();
        let second = sample_entanglement(bip, 2500, &mut s).unwrap();
        assert_eq!([first, second].concat(), a);
    }

    #[test]
    fn empty_and_invalid_inputs() {
        assert!(matches!(estimate_omega(&[], &Binning::default()), Err(Error::EmptyInput)));
        assert!(matches!(
            estimate_omega(&[0.0, 1.0], &Binning::Edges(vec![0.0, 0.0, 1.0])),
            Err(Error::InvalidBinning(_))
        ));
        assert!(matches!(
            estimate_omega(&[0.0, 1.0], &Binning::Edges(vec![5.0, 6.0])),
            Err(Error::EmptyInput)
        ));
    }

    #[test]
    fn uniform_samples_have_unit_density() {
        use rand::Rng;
        let mut rng = SeededSampler::new(3).stream(0);
        let samples: Vec<f64> = (0..100_000).map(|_| rng.random::<f64>()).collect();
        let est = estimate_omega(&samples, &Binning::Range { lo: 0.0, hi: 1.0, bins: 20 }).unwrap();
        assert_abs_diff_eq!(est.integral(), 1.0, epsilon = 1e-9);
        for k in 0..20 {
            assert!((est.density[k] - 1.0).abs() < 5.0 * est.std_error[k]);
        }
        assert!(est.is_boundary_bin(0) && est.is_boundary_bin(19) && !est.is_boundary_bin(5));
    }

    #[test]
    fn edge_values_land_in_closed_last_bin() {
        let est = estimate_omega(&[0.0, 0.5, 1.0, 2.0], &Binning::Edges(vec![0.0, 0.5, 1.0])).unwrap();
        assert_eq!(est.counts, vec![1, 2]);
        assert_eq!(est.n_outside, 1);
        assert_eq!(est.n_samples, 3);
    }

    #[test]
    fn freedman_diaconis_bins_cover_the_sample_range() {
        let mut s = SeededSampler::new(4);
        let samples = sample_entanglement(Bipartition::new(2, 2).unwrap(), 50_000, &mut s).unwrap();
        let est = estimate_omega(&samples, &Binning::FreedmanDiaconis).unwrap();
        assert!(est.n_bins() > 10);
        assert_eq!(est.n_outside, 0);
        assert_abs_diff_eq!(est.integral(), 1.0, epsilon = 1e-9);
        // Density rises away from the product-state end.
        assert!(est.density[est.n_bins() / 2] > 1.5 * est.density[0]);
    }

    #[test]
    fn flat_density_gives_flat_entropy() {
        let third = 1.0 / 3.0;
        let omega = OmegaEstimate {
            bin_edges: vec![0.0, third, 2.0 * third, 1.0],
            density: vec![1.0; 3],
            std_error: vec![0.0; 3],
            counts: vec![1; 3],
            n_samples: 3,
            n_outside: 0,
            sample_mean: 0.5,
            sample_std_error: 0.0,
            seed: None,
            chain: None,
        };
        let curve = s_geo_curve(&omega).unwrap();
        assert_eq!(curve.s_geo, vec![Some(0.0); 3]);
        assert_eq!(curve.ds_de, vec![Some(0.0); 3]);
    }

    #[test]
    fn empty_bins_break_the_stencil() {
        let curve = SGeoCurve::from_points(
            vec![0.0, 1.0, 2.0, 3.0, 4.0],
            &[1.0, 2.0, 0.0, 3.0, 4.0],
        )
        .unwrap();
        assert_eq!(curve.s_geo[2], None);
        assert!(curve.ds_de[0].is_some());
        assert_eq!(curve.ds_de[1], None);
        assert_eq!(curve.ds_de[2], None);
        assert_eq!(curve.ds_de[3], None);
        assert!(curve.ds_de[4].is_some());
        assert!(matches!(
            SGeoCurve::from_points(vec![0.0, 1.0, 2.0], &[1.0, 0.0, 1.0]),
            Err(Error::TooFewBins(2))
        ));
    }

    #[test]
    fn nonuniform_differences_are_exact_on_quadratics() {
        let x = vec![0.0, 0.1, 0.35, 0.4, 1.0];
        let y: Vec<f64> = x.iter().map(|t| (2.0 * t * t - t + 3.0f64).exp()).collect();
        let curve = SGeoCurve::from_points(x.clone(), &y).unwrap();
        for k in 1..4 {
            assert_abs_diff_eq!(curve.ds_de[k].unwrap(), 4.0 * x[k] - 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn quadrature_density_matches_closed_form() {
        let family = schmidt_family();
        let e = e_of_theta(FRAC_PI_8);
        let omega = omega_quadrature_reduced(&family, e, 256).unwrap();
        let want = 2.0 * PI / (1.0 + 2f64.sqrt()).ln();
        assert!(((omega - want) / want).abs() < 1e-4, "{omega}");
        let doubled = omega_quadrature_reduced(&family, e, 512).unwrap();
        assert!((doubled - omega).abs() < 1e-10);

        let mut e = 0.1;
        while e <= 0.65 {
            let want = omega_reduced(theta_of_e(e).unwrap()).unwrap();
            let got = omega_quadrature_reduced(&family, e, 32).unwrap();
            assert!(((got - want) / want).abs() < 1e-4, "e {e}: {got} vs {want}");
            e += 0.05;
        }
    }

    #[test]
    fn quadrature_density_vanishes_toward_product_states() {
        let family = schmidt_family();
        let values: Vec<f64> = [1e-2, 1e-4, 1e-6]
            .iter()
            .map(|&e| omega_quadrature_reduced(&family, e, 16).unwrap())
            .collect();
        assert!(values[0] > values[1] && values[1] > values[2], "{values:?}");
        assert!(matches!(
            omega_quadrature_reduced(&family, 0.8, 16),
            Err(Error::OutOfRange { .. })
        ));
    }

    #[test]
    fn average_trace_w_matches_closed_form() {
        let family = schmidt_family();
        let avg = average_trace_w(&family, e_of_theta(FRAC_PI_8), 16).unwrap();
        assert!(((avg - 2.574_601) / 2.574_601).abs() < 1e-3, "{avg}");
        let bloch = bloch_family();
        for e in [-0.8, 0.0, 0.5] {
            assert!(average_trace_w(&bloch, e, 16).unwrap().abs() < 1e-4);
            // The height function's level circles all carry 2π of measure.
            assert_abs_diff_eq!(omega_quadrature_reduced(&bloch, e, 16).unwrap(), 2.0 * PI, epsilon = 1e-6);
        }
    }

    #[test]
    fn entropy_slope_matches_average_curvature() {
        let family = schmidt_family();
        for e in [0.2, 0.3, 0.4, 0.5, 0.6] {
            let avg = average_trace_w(&family, e, 8).unwrap();
            let slope = ds_geo_de_quadrature(&family, e, 1e-3, 8).unwrap();
            assert!(((avg - slope) / avg).abs() < 2e-3, "e {e}: {avg} vs {slope}");
            let exact = trace_w(theta_of_e(e).unwrap()).unwrap();
            assert!(((slope - exact) / exact).abs() < 2e-3);
        }
    }

    #[test]
    fn quadrature_curve_matches_reduced_entropy() {
        let family = schmidt_family();
        let e: Vec<f64> = (0..41).map(|k| 0.2 + 0.01 * k as f64).collect();
        let omega: Vec<f64> = e
            .iter()
            .map(|&x| omega_quadrature_reduced(&family, x, 8).unwrap())
            .collect();
        let curve = SGeoCurve::from_points(e.clone(), &omega).unwrap();
        for (k, &x) in e.iter().enumerate() {
            let want = s_geo_reduced(theta_of_e(x).unwrap()).unwrap();
            assert!((curve.s_geo[k].unwrap() - want).abs() < 1e-4);
        }
        let k = e.iter().position(|&x| (x - 0.42).abs() < 1e-9).unwrap();
        let fine = SGeoCurve::from_points(
            vec![0.4155, 0.4165, 0.4175],
            &[0.4155, 0.4165, 0.4175f64].map(|x| omega_quadrature_reduced(&family, x, 8).unwrap()),
        )
        .unwrap();
        assert!((fine.ds_de[1].unwrap() - 2.574_601).abs() < 2.574_601 * 1e-3);
        assert!(curve.ds_de[k].is_some());
    }

    #[test]
    fn bloch_orbits_have_circle_length() {
        let len = orbit_length(&bloch_chart(), 1.0, 64, 1e-4).unwrap();
        assert_abs_diff_eq!(len, 2.0 * PI * 1.0f64.sin(), epsilon = 1e-6);
    }

    #[test]
    fn spin_chain_matches_direct_sampling() {
        let a = spin_chain_scan(2, 1, 2000, &mut SeededSampler::new(5), &Binning::Count(10)).unwrap();
        let samples =
            sample_entanglement(Bipartition::new(2, 2).unwrap(), 2000, &mut SeededSampler::new(5)).unwrap();
        let b = estimate_omega(&samples, &Binning::Count(10)).unwrap();
        assert_eq!(a.counts, b.counts);
        assert_eq!(a.bin_edges, b.bin_edges);
        assert_eq!(a.chain, Some(ChainBlock { n_qubits: 2, block_len: 1 }));
        assert_eq!(a.seed, Some(5));
    }

    #[test]
    fn spin_chain_limits() {
        let s = &mut SeededSampler::new(1);
        assert!(matches!(
            spin_chain_scan(20, 10, 10, s, &Binning::default()),
            Err(Error::TooLarge { .. })
        ));
        assert!(matches!(
            spin_chain_scan(6, 6, 10, s, &Binning::default()),
            Err(Error::InvalidBipartition { .. })
        ));
        assert!(spin_chain_scan(6, 0, 10, s, &Binning::default()).is_err());
    }

    /// Page's exact mean entanglement of a Haar state with `m ≤ n`.
    fn page_mean(m: usize, n: usize) -> f64 {
        ((n + 1)..=(m * n)).map(|k| 1.0 / k as f64).sum::<f64>() - (m as f64 - 1.0) / (2.0 * n as f64)
    }

    #[test]
    fn ten_qubit_half_chain_mean_matches_page() {
        let est = spin_chain_scan(10, 5, 100_000, &mut SeededSampler::new(2), &Binning::default()).unwrap();
        let want = page_mean(32, 32);
        assert!(
            (est.sample_mean - want).abs() < 3.0 * est.sample_std_error,
            "{} ± {} vs {want}",
            est.sample_mean,
            est.sample_std_error
        );
        let edge = spin_chain_scan(10, 1, 20_000, &mut SeededSampler::new(3), &Binning::default()).unwrap();
        assert!(est.sample_mean > edge.sample_mean);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn estimates_are_normalized(seed in any::<u64>(), n in 10usize..2000, bins in 1usize..50) {
            let values = sample_entanglement(Bipartition::new(2, 3).unwrap(), n, &mut SeededSampler::new(seed)).unwrap();
            for binning in [Binning::Count(bins), Binning::FreedmanDiaconis] {
                let est = estimate_omega(&values, &binning).unwrap();
                prop_assert!((est.integral() - 1.0).abs() < 1e-9);
                prop_assert!(est.density.iter().all(|&d| d >= 0.0));
                prop_assert_eq!(est.counts.iter().sum::<u64>() as usize, n);
            }
        }
    }
}
