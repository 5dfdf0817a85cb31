//! Finite-difference differential geometry on charts of projective space.
//!
//! A [`Chart`] is a black-box parametrization `x ↦ |ψ(x)⟩`. Everything here is
//! computed from chart evaluations with central differences:
//!
//! - the Fubini-Study metric in projector form
//!   `g_μν = 4 Re[⟨∂_μψ|∂_νψ⟩ − ⟨∂_μψ|ψ⟩⟨ψ|∂_νψ⟩]`, which is gauge invariant,
//!   so charts need not pick a horizontal phase;
//! - gradients `(∇f)^μ = g^μν ∂_ν f` of scalar fields;
//! - the transverse field `ξ = ∇f/‖∇f‖²`, normalized so `df(ξ) = 1`;
//! - its divergence `(1/√det g) ∂_i(√det g ξ^i)`, the trace of the Weingarten
//!   map of the level set of `f` through `x`.
//!
//! Lengths are in the units fixed by the factor 4 (unit-radius Bloch sphere).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::entanglement::entanglement;
use crate::state_space::{Bipartition, PureState};
use crate::{Error, Result};

/// Smooth parametrization of a patch of projective space.
///
/// `eval` must return normalized states, be smooth on the open box returned by
/// `domain` (finite differences must converge at second order), and must not
/// mutate shared state: charts are evaluated from several threads.
pub trait Chart: Sync {
    /// Open interval per coordinate; bounds may be infinite.
    fn domain(&self) -> &[(f64, f64)];

    fn eval(&self, x: &[f64]) -> PureState;

    fn dim(&self) -> usize {
        self.domain().len()
    }
}

impl<C: Chart + ?Sized> Chart for &C {
    fn domain(&self) -> &[(f64, f64)] {
        (**self).domain()
    }

    fn eval(&self, x: &[f64]) -> PureState {
        (**self).eval(x)
    }
}

/// Chart backed by a closure.
pub struct FnChart<F> {
    domain: Vec<(f64, f64)>,
    eval: F,
}

impl<F> FnChart<F>
where
    F: Fn(&[f64]) -> PureState + Sync,
{
    pub fn new(domain: Vec<(f64, f64)>, eval: F) -> Self {
        Self { domain, eval }
    }
}

impl<F> Chart for FnChart<F>
where
    F: Fn(&[f64]) -> PureState + Sync,
{
    fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    fn eval(&self, x: &[f64]) -> PureState {
        (self.eval)(x)
    }
}

/// Real function of chart coordinates.
pub trait ScalarField: Sync {
    fn value(&self, x: &[f64]) -> Result<f64>;
}

impl<F> ScalarField for F
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    fn value(&self, x: &[f64]) -> Result<f64> {
        Ok(self(x))
    }
}

/// Entanglement entropy of the chart state across a fixed bipartition.
pub struct EntanglementField<C> {
    chart: C,
    bip: Bipartition,
}

impl<C: Chart> EntanglementField<C> {
    pub fn new(chart: C, bip: Bipartition) -> Self {
        Self { chart, bip }
    }

    pub fn chart(&self) -> &C {
        &self.chart
    }
}

impl<C: Chart> ScalarField for EntanglementField<C> {
    fn value(&self, x: &[f64]) -> Result<f64> {
        entanglement(&self.chart.eval(x), self.bip)
    }
}

/// Step sizes and thresholds for the finite-difference operators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdSteps {
    /// Step for first derivatives (tangents, field derivatives).
    pub h1: f64,
    /// Outer step for the divergence.
    pub h2: f64,
    /// `‖∇f‖²` at or below this is treated as a critical point.
    pub epsilon_grad: f64,
}

impl Default for FdSteps {
    fn default() -> Self {
        Self {
            h1: 1e-4,
            h2: 1e-3,
            epsilon_grad: 1e-10,
        }
    }
}

/// Largest condition number accepted when inverting a metric.
pub const MAX_CONDITION: f64 = 1e12;

/// Metric components at a chart point.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricData {
    pub g: DMatrix<f64>,
    /// Filled in by [`MetricData::inverted`].
    pub g_inv: Option<DMatrix<f64>>,
    pub sqrt_det_g: f64,
}

impl MetricData {
    fn new(g: DMatrix<f64>) -> Self {
        let sqrt_det_g = g.determinant().max(0.0).sqrt();
        Self {
            g,
            g_inv: None,
            sqrt_det_g,
        }
    }

    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    /// Condition number from the symmetric spectrum; infinite when `g` is
    /// not positive definite.
    pub fn condition_number(&self) -> f64 {
        let eig = self.g.clone().symmetric_eigenvalues();
        let max = eig.max();
        let min = eig.min();
        if min <= 0.0 || max <= 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }

    /// Attaches the inverse. Degenerate metrics (pure-gauge directions,
    /// condition number above [`MAX_CONDITION`]) are refused rather than
    /// pseudo-inverted.
    pub fn inverted(mut self) -> Result<Self> {
        if self.g_inv.is_none() {
            let cond = self.condition_number();
            if !(cond <= MAX_CONDITION) {
                return Err(Error::SingularMetric(cond));
            }
            let inv = self
                .g
                .clone()
                .cholesky()
                .ok_or(Error::SingularMetric(cond))?
                .inverse();
            self.g_inv = Some(inv);
        }
        Ok(self)
    }

    fn inverse(&self) -> &DMatrix<f64> {
        self.g_inv.as_ref().expect("metric was not inverted")
    }
}

fn check_stencil<C: Chart + ?Sized>(chart: &C, x: &[f64], step: f64) -> Result<()> {
    let domain = chart.domain();
    if x.len() != domain.len() {
        return Err(Error::DimMismatch {
            expected: domain.len(),
            got: x.len(),
        });
    }
    for (coord, (&value, &(lo, hi))) in x.iter().zip(domain).enumerate() {
        if !(value - step > lo && value + step < hi) {
            return Err(Error::OutOfDomain { coord, value, step });
        }
    }
    Ok(())
}

fn shifted(x: &[f64], mu: usize, delta: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    y[mu] += delta;
    y
}

/// Central-difference tangent vectors `|∂_μψ(x)⟩`, one per coordinate.
pub fn chart_tangents<C: Chart + ?Sized>(
    chart: &C,
    x: &[f64],
    h: f64,
) -> Result<Vec<Vec<Complex64>>> {
    check_stencil(chart, x, h)?;
    let scale = 1.0 / (2.0 * h);
    Ok((0..x.len())
        .map(|mu| {
            let plus = chart.eval(&shifted(x, mu, h));
            let minus = chart.eval(&shifted(x, mu, -h));
            plus.amplitudes()
                .iter()
                .zip(minus.amplitudes())
                .map(|(p, m)| (p - m) * scale)
                .collect()
        })
        .collect())
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Fubini-Study metric components at `x`. The inverse is not computed; call
/// [`MetricData::inverted`] when it is needed.
pub fn fs_metric<C: Chart + ?Sized>(chart: &C, x: &[f64], h: f64) -> Result<MetricData> {
    let tangents = chart_tangents(chart, x, h)?;
    let psi = chart.eval(x);
    let psi = psi.amplitudes();
    let vertical: Vec<Complex64> = tangents.iter().map(|t| inner(t, psi)).collect();
    let n = tangents.len();
    let mut g = DMatrix::zeros(n, n);
    for mu in 0..n {
        for nu in mu..n {
            let q = inner(&tangents[mu], &tangents[nu]) - vertical[mu] * vertical[nu].conj();
            g[(mu, nu)] = 4.0 * q.re;
            g[(nu, mu)] = g[(mu, nu)];
        }
    }
    Ok(MetricData::new(g))
}

/// Central-difference partial derivatives `∂_μ f`.
pub fn field_derivatives<C: Chart + ?Sized, F: ScalarField + ?Sized>(
    chart: &C,
    x: &[f64],
    field: &F,
    h: f64,
) -> Result<DVector<f64>> {
    check_stencil(chart, x, h)?;
    let mut d = DVector::zeros(x.len());
    for mu in 0..x.len() {
        let plus = field.value(&shifted(x, mu, h))?;
        let minus = field.value(&shifted(x, mu, -h))?;
        d[mu] = (plus - minus) / (2.0 * h);
    }
    Ok(d)
}

/// Gradient of a scalar field with respect to the Fubini-Study metric.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    /// Contravariant components `g^μν ∂_ν f`.
    pub components: DVector<f64>,
    /// Covariant components `∂_μ f`.
    pub differential: DVector<f64>,
    /// `‖∇f‖² = ∂f · g⁻¹ · ∂f`.
    pub norm_sq: f64,
    pub metric: MetricData,
}

pub fn scalar_gradient<C: Chart + ?Sized, F: ScalarField + ?Sized>(
    chart: &C,
    x: &[f64],
    field: &F,
    h: f64,
) -> Result<Gradient> {
    let metric = fs_metric(chart, x, h)?.inverted()?;
    let differential = field_derivatives(chart, x, field, h)?;
    let components = metric.inverse() * &differential;
    let norm_sq = differential.dot(&components).max(0.0);
    Ok(Gradient {
        components,
        differential,
        norm_sq,
        metric,
    })
}

fn xi_from(grad: &Gradient, epsilon_grad: f64) -> Result<DVector<f64>> {
    if !(grad.norm_sq > epsilon_grad) {
        return Err(Error::VanishingGradient(grad.norm_sq));
    }
    Ok(&grad.components / grad.norm_sq)
}

/// `ξ = ∇f/‖∇f‖²`, the flow along increasing `f` with `df(ξ) = 1`.
pub fn xi_field<C: Chart + ?Sized, F: ScalarField + ?Sized>(
    chart: &C,
    x: &[f64],
    field: &F,
    h: f64,
    epsilon_grad: f64,
) -> Result<DVector<f64>> {
    xi_from(&scalar_gradient(chart, x, field, h)?, epsilon_grad)
}

/// `div ξ = (1/√det g) ∂_i(√det g ξ^i)`: the Weingarten trace of the level
/// set of `field` through `x`.
///
/// The flux `√det g ξ^i` is evaluated at `x ± h2 e_i` with inner step `h1`.
pub fn divergence_xi<C: Chart + ?Sized, F: ScalarField + ?Sized>(
    chart: &C,
    x: &[f64],
    field: &F,
    steps: &FdSteps,
) -> Result<f64> {
    check_stencil(chart, x, steps.h2 + steps.h1)?;
    let center = scalar_gradient(chart, x, field, steps.h1)?;
    xi_from(&center, steps.epsilon_grad)?;

    let mut div = 0.0;
    for i in 0..x.len() {
        let mut flux = [0.0; 2];
        for (slot, sign) in [(0, 1.0), (1, -1.0)] {
            let y = shifted(x, i, sign * steps.h2);
            let grad = scalar_gradient(chart, &y, field, steps.h1)?;
            let xi = xi_from(&grad, steps.epsilon_grad)?;
            flux[slot] = grad.metric.sqrt_det_g * xi[i];
        }
        div += (flux[0] - flux[1]) / (2.0 * steps.h2);
    }
    Ok(div / center.metric.sqrt_det_g)
}

/// Residual of the normal/tangential split `g_μν = n_μ n_ν + σ_μν` with
/// `n = df/‖∇f‖`: returns `max_μ |σ_μν g^νρ ∂_ρ f|`, which vanishes when the
/// tangential part annihilates the gradient.
pub fn metric_split_residual<C: Chart + ?Sized, F: ScalarField + ?Sized>(
    chart: &C,
    x: &[f64],
    field: &F,
    h: f64,
) -> Result<f64> {
    let grad = scalar_gradient(chart, x, field, h)?;
    if !(grad.norm_sq > FdSteps::default().epsilon_grad) {
        return Err(Error::VanishingGradient(grad.norm_sq));
    }
    let normal = &grad.differential / grad.norm_sq.sqrt();
    let sigma = &grad.metric.g - &normal * normal.transpose();
    let residual = sigma * &grad.components;
    Ok(residual.amax())
}
