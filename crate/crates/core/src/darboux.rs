//! Darboux transformations of the chiral model.
//!
//! A step with spectral data `(Lambda, |i>)` builds `M = (V(lambda_1)|1>, ...)`,
//! `S = M Lambda M^-1` and the Darboux matrix `D(lambda) = lambda I - S`, then
//! maps `V -> D V`, `g -> -S g` and `j+- -> (I -+ S) j+- (I -+ S)^-1`.
//! Chains of steps are evaluated either as a product of such factors or as a
//! single block quasideterminant over matrices built from the seed.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{ComplexMatrix, ONE, ZERO};
use crate::model::{
    check_spectral_parameter, deriv_lightcone, sweep_max, Currents, Direction, Grid, LaxSolution,
    SeedSolution, SpacetimePoint,
};
use crate::quasidet::{qdet_block_conditioned, BlockGrid};
use crate::report::{ReportEntry, ResidualReport};
use crate::tolerance::Tolerances;

/// Angles closer than this to `0` or `pi` (mod `2 pi`) are rejected.
pub const THETA_GUARD: f64 = 1e-8;

/// Rejects `theta` whose `e^{i theta}` would sit on a Lax pole.
pub fn check_theta(theta: f64) -> Result<()> {
    check_theta_with(theta, THETA_GUARD)
}

/// [`check_theta`] with an explicit guard band.
pub fn check_theta_with(theta: f64, guard: f64) -> Result<()> {
    if !theta.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "theta must be finite, got {theta}"
        )));
    }
    let t = theta.rem_euclid(std::f64::consts::PI);
    if t < guard || std::f64::consts::PI - t < guard {
        return Err(Error::InvalidParameter(format!(
            "theta = {theta} is a multiple of pi; e^(i theta) hits a pole"
        )));
    }
    Ok(())
}

/// Eigenvalues `lambda_i` and the constant kets `|i>` of one step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralData {
    lambdas: Vec<Complex64>,
    kets: Vec<Vec<Complex64>>,
}

impl SpectralData {
    pub fn new(lambdas: Vec<Complex64>, kets: Vec<Vec<Complex64>>) -> Result<Self> {
        let n = lambdas.len();
        if n == 0 {
            return Err(Error::InvalidParameter("spectral data is empty".into()));
        }
        if kets.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: kets.len(),
            });
        }
        for &l in &lambdas {
            check_spectral_parameter(l)?;
        }
        for (i, k) in kets.iter().enumerate() {
            if k.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: k.len(),
                });
            }
            if k.iter().all(|c| *c == ZERO) || k.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "ket {i} must be finite and nonzero"
                )));
            }
        }
        Ok(Self { lambdas, kets })
    }

    /// SU(2) soliton data: `lambda = (mu, conj mu)` with `mu = e^{i theta}`,
    /// kets `(1, -1)` and `(1, 1)`.
    pub fn soliton(theta: f64) -> Result<Self> {
        check_theta(theta)?;
        let mu = Complex64::from_polar(1.0, theta);
        Self::new(vec![mu, mu.conj()], vec![vec![ONE, -ONE], vec![ONE, ONE]])
    }

    pub fn dim(&self) -> usize {
        self.lambdas.len()
    }

    pub fn lambdas(&self) -> &[Complex64] {
        &self.lambdas
    }

    pub fn kets(&self) -> &[Vec<Complex64>] {
        &self.kets
    }

    /// `Lambda = diag(lambda_1, ..., lambda_N)`.
    pub fn lambda_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::diag(&self.lambdas)
    }

    /// `I - Lambda` for `Plus`, `I + Lambda` for `Minus`.
    pub fn shifted_lambda(&self, direction: Direction) -> ComplexMatrix {
        let s = direction.sign();
        ComplexMatrix::diag(
            &self
                .lambdas
                .iter()
                .map(|&l| ONE - l * s)
                .collect::<Vec<_>>(),
        )
    }

    /// `mu` when every eigenvalue is `mu` or `conj mu` with `mu` non-real,
    /// `lambda_1 = mu`.
    pub fn conjugate_pair(&self) -> Result<Complex64> {
        let mu = self.lambdas[0];
        if mu.im.abs() < 1e-12 {
            return Err(Error::NotUnitaryConfiguration(format!("mu = {mu} is real")));
        }
        let scale = mu.norm().max(1.0);
        for &l in &self.lambdas {
            if (l - mu).norm() > 1e-12 * scale && (l - mu.conj()).norm() > 1e-12 * scale {
                return Err(Error::NotUnitaryConfiguration(format!(
                    "eigenvalue {l} is neither {mu} nor its conjugate"
                )));
            }
        }
        Ok(mu)
    }
}

/// `M(x)` with columns `V(lambda_i, x)|i>`.
pub fn build_m<S: LaxSolution + ?Sized>(
    state: &S,
    spectral: &SpectralData,
    x: SpacetimePoint,
) -> Result<ComplexMatrix> {
    if state.dim() != spectral.dim() {
        return Err(Error::DimensionMismatch {
            expected: state.dim(),
            found: spectral.dim(),
        });
    }
    let columns = spectral
        .lambdas
        .iter()
        .zip(&spectral.kets)
        .map(|(&l, ket)| Ok(state.v(l, x)?.apply(ket)))
        .collect::<Result<Vec<_>>>()?;
    ComplexMatrix::from_columns(&columns)
}

/// `S = M Lambda M^-1`. Columns of `M` are normalized first; the scaling
/// commutes with the diagonal `Lambda`, so `S` is unchanged.
pub fn build_s(m: &ComplexMatrix, lambda: &ComplexMatrix) -> Result<ComplexMatrix> {
    if m.n() != lambda.n() {
        return Err(Error::DimensionMismatch {
            expected: m.n(),
            found: lambda.n(),
        });
    }
    let (m, _) = m.normalize_columns()?;
    let lu = m.lu();
    lu.check_regular(1e-12, "particular solution M")?;
    let inv = lu.inverse(1e-12)?;
    Ok(&(&m * lambda) * &inv)
}

/// `D(lambda) = lambda I - S`.
pub fn darboux_matrix(s: &ComplexMatrix, lambda: Complex64) -> ComplexMatrix {
    &ComplexMatrix::scalar(s.n(), lambda) - s
}

/// The state obtained by dressing `inner` with one Darboux step.
#[derive(Debug, Clone)]
pub struct DarbouxStep<S> {
    pub inner: S,
    pub spectral: SpectralData,
}

/// Applies one Darboux step to `state`.
pub fn transform_state<S: LaxSolution>(state: S, spectral: SpectralData) -> Result<DarbouxStep<S>> {
    if state.dim() != spectral.dim() {
        return Err(Error::DimensionMismatch {
            expected: state.dim(),
            found: spectral.dim(),
        });
    }
    Ok(DarbouxStep {
        inner: state,
        spectral,
    })
}

impl<S: LaxSolution> DarbouxStep<S> {
    pub fn m(&self, x: SpacetimePoint) -> Result<ComplexMatrix> {
        build_m(&self.inner, &self.spectral, x)
    }

    pub fn s(&self, x: SpacetimePoint) -> Result<ComplexMatrix> {
        build_s(&self.m(x)?, &self.spectral.lambda_matrix())
    }

    pub fn darboux_matrix(&self, lambda: Complex64, x: SpacetimePoint) -> Result<ComplexMatrix> {
        Ok(darboux_matrix(&self.s(x)?, lambda))
    }

    /// `j~ = (I -+ S) j (I -+ S)^-1`.
    fn conjugated(
        &self,
        direction: Direction,
        s: &ComplexMatrix,
        x: SpacetimePoint,
    ) -> Result<ComplexMatrix> {
        let n = s.n();
        let f = &ComplexMatrix::identity(n) - &s.scale(Complex64::new(direction.sign(), 0.0));
        let finv = f.invert()?;
        Ok(&(&f * &self.inner.current(direction, x)?) * &finv)
    }

    /// `j~ = M (I -+ Lambda) M^-1 j M (I -+ Lambda)^-1 M^-1`.
    pub fn j_via_m(&self, direction: Direction, x: SpacetimePoint) -> Result<ComplexMatrix> {
        let (m, _) = self.m(x)?.normalize_columns()?;
        let minv = m.invert()?;
        let shifted = self.spectral.shifted_lambda(direction);
        let f = &(&m * &shifted) * &minv;
        let finv = &(&m * &shifted.invert()?) * &minv;
        Ok(&(&f * &self.inner.current(direction, x)?) * &finv)
    }

    /// `j~+ = j+ + d+ S` and `j~- = j- - d- S`, with `d+-` by central differences.
    pub fn j_via_derivative(
        &self,
        direction: Direction,
        x: SpacetimePoint,
        h: f64,
    ) -> Result<ComplexMatrix> {
        let ds = deriv_lightcone(|y| self.s(y), x, direction, h)?;
        let j = self.inner.current(direction, x)?;
        Ok(&j + &ds.scale(Complex64::new(direction.sign(), 0.0)))
    }
}

impl<S: LaxSolution> Currents for DarbouxStep<S> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn j_plus(&self, x: SpacetimePoint) -> Result<ComplexMatrix> {
        self.conjugated(Direction::Plus, &self.s(x)?, x)
    }

    fn j_minus(&self, x: SpacetimePoint) -> Result<ComplexMatrix> {
        self.conjugated(Direction::Minus, &self.s(x)?, x)
    }
}

impl<S: LaxSolution> LaxSolution for DarbouxStep<S> {
    fn v(&self, lambda: Complex64, x: SpacetimePoint) -> Result<ComplexMatrix> {
        check_spectral_parameter(lambda)?;
        Ok(&self.darboux_matrix(lambda, x)? * &self.inner.v(lambda, x)?)
    }

    fn g(&self, x: SpacetimePoint) -> Result<ComplexMatrix> {
        Ok(&(-&self.s(x)?) * &self.inner.g(x)?)
    }
}

/// `K` Darboux steps over one seed. Every particular solution `M_k` is built
/// from the seed at `Lambda_k`; the dressed `M[k]` are derived internally.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DarbouxChain {
    pub base: SeedSolution,
    pub steps: Vec<SpectralData>,
}

/// Per-point data of a chain: seed-built `M_k`, dressed `M[k]` and `S[k]`.
#[derive(Debug, Clone)]
pub struct ChainPoint {
    pub raw_m: Vec<ComplexMatrix>,
    pub dressed_m: Vec<ComplexMatrix>,
    pub s: Vec<ComplexMatrix>,
}

impl DarbouxChain {
    pub fn new(base: SeedSolution, steps: Vec<SpectralData>) -> Result<Self> {
        for st in &steps {
            if st.dim() != base.dim() {
                return Err(Error::DimensionMismatch {
                    expected: base.dim(),
                    found: st.dim(),
                });
            }
        }
        Ok(Self { base, steps })
    }

    /// SU(2) seed with one soliton step per angle.
    pub fn su2(p: f64, q: f64, thetas: &[f64]) -> Result<Self> {
        let base = SeedSolution::su2(p, q)?;
        let steps = thetas
            .iter()
            .map(|&t| SpectralData::soliton(t))
            .collect::<Result<Vec<_>>>()?;
        Self::new(base, steps)
    }

    pub fn depth(&self) -> usize {
        self.steps.len()
    }

    /// The first `k` steps.
    pub fn truncated(&self, k: usize) -> Self {
        Self {
            base: self.base.clone(),
            steps: self.steps[..k.min(self.steps.len())].to_vec(),
        }
    }

    /// Step `k` (1-based) as a single dressing of the first `k - 1` steps.
    pub fn step(&self, k: usize) -> Result<DarbouxStep<DarbouxChain>> {
        if k == 0 || k > self.depth() {
            return Err(Error::InvalidParameter(format!(
                "step {k} out of range 1..={}",
                self.depth()
            )));
        }
        transform_state(self.truncated(k - 1), self.steps[k - 1].clone())
    }

    /// Builds `M_k`, `M[k] = (V[k](lambda_i) |i>)` and `S[k]` at `x`.
    pub fn at(&self, x: SpacetimePoint) -> Result<ChainPoint> {
        let mut point = ChainPoint {
            raw_m: Vec::with_capacity(self.depth()),
            dressed_m: Vec::with_capacity(self.depth()),
            s: Vec::with_capacity(self.depth()),
        };
        for spectral in &self.steps {
            let raw = build_m(&self.base, spectral, x)?;
            let mut dressed = raw.clone();
            for (i, &l) in spectral.lambdas.iter().enumerate() {
                let mut col = raw.column(i);
                for s in &point.s {
                    col = darboux_matrix(s, l).apply(&col);
                }
                dressed.set_column(i, &col);
            }
            let s = build_s(&dressed, &spectral.lambda_matrix())?;
            point.raw_m.push(raw);
            point.dressed_m.push(dressed);
            point.s.push(s);
        }
        Ok(point)
    }

    /// `F+- = (I -+ S[K]) ... (I -+ S[1])`.
    fn current_factor(&self, point: &ChainPoint, direction: Direction) -> ComplexMatrix {
        let n = self.base.dim();
        let sign = Complex64::new(direction.sign(), 0.0);
        point.s.iter().fold(ComplexMatrix::identity(n), |acc, s| {
            &(&ComplexMatrix::identity(n) - &s.scale(sign)) * &acc
        })
    }

    fn left_product(&self, point: &ChainPoint, lambda: Complex64) -> ComplexMatrix {
        let n = self.base.dim();
        point.s.iter().fold(ComplexMatrix::identity(n), |acc, s| {
            &darboux_matrix(s, lambda) * &acc
        })
    }
}

impl Currents for DarbouxChain {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn j_plus(&self, x: SpacetimePoint) -> Result<ComplexMatrix> {
        let point = self.at(x)?;
        conjugate(
            &self.current_factor(&point, Direction::Plus),
            &self.base.j_plus(x)?,
        )
    }

    fn j_minus(&self, x: SpacetimePoint) -> Result<ComplexMatrix> {
        let point = self.at(x)?;
        conjugate(
            &self.current_factor(&point, Direction::Minus),
            &self.base.j_minus(x)?,
        )
    }
}

impl LaxSolution for DarbouxChain {
    fn v(&self, lambda: Complex64, x: SpacetimePoint) -> Result<ComplexMatrix> {
        check_spectral_parameter(lambda)?;
        let point = self.at(x)?;
        Ok(&self.left_product(&point, lambda) * &self.base.v(lambda, x)?)
    }
}

fn conjugate(f: &ComplexMatrix, j: &ComplexMatrix) -> Result<ComplexMatrix> {
    Ok(&(f * j) * &f.invert()?)
}

/// `V[K+1]`, `g[K+1]`, the current factors and the currents at one point.
#[derive(Debug, Clone)]
pub struct ChainValues {
    pub v: ComplexMatrix,
    pub g: ComplexMatrix,
    pub f_plus: ComplexMatrix,
    pub f_minus: ComplexMatrix,
    pub j_plus: ComplexMatrix,
    pub j_minus: ComplexMatrix,
    /// Largest condition estimate of an inverted block matrix (qdet route only).
    pub condition: Option<f64>,
}

/// Sequential products `V[K+1] = (lambda - S[K]) ... (lambda - S[1]) V`, etc.
pub fn iterate_product(
    chain: &DarbouxChain,
    lambda: Complex64,
    x: SpacetimePoint,
) -> Result<ChainValues> {
    check_spectral_parameter(lambda)?;
    let point = chain.at(x)?;
    let base = &chain.base;
    let f_plus = chain.current_factor(&point, Direction::Plus);
    let f_minus = chain.current_factor(&point, Direction::Minus);
    Ok(ChainValues {
        v: &chain.left_product(&point, lambda) * &base.v(lambda, x)?,
        g: &chain.left_product(&point, ZERO) * &base.g(x)?,
        j_plus: conjugate(&f_plus, &base.j_plus(x)?)?,
        j_minus: conjugate(&f_minus, &base.j_minus(x)?)?,
        f_plus,
        f_minus,
        condition: None,
    })
}

/// `(K+1) x (K+1)` block grid with entry `(j, k) = M_k W_k^j` for `k < K` and
/// last column `last(j)`, boxed bottom-right.
fn power_grid(
    ms: &[ComplexMatrix],
    weights: &[ComplexMatrix],
    last: impl Fn(usize) -> ComplexMatrix,
) -> Result<BlockGrid> {
    let k = ms.len();
    let mut blocks = Vec::with_capacity((k + 1) * (k + 1));
    let mut powers: Vec<ComplexMatrix> = ms.to_vec();
    for j in 0..=k {
        for (col, p) in powers.iter().enumerate().take(k) {
            let _ = col;
            blocks.push(p.clone());
        }
        blocks.push(last(j));
        for (p, w) in powers.iter_mut().zip(weights) {
            *p = &*p * w;
        }
    }
    BlockGrid::new(k + 1, blocks, (k, k))
}

/// Evaluates the chain as block quasideterminants over the seed-built `M_k`:
/// last column `lambda^j I` for `V`, `(I, O, ..., O)` for `g`, and rows
/// `M_k (I -+ Lambda_k)^j` for the current factors. The factor quasideterminant
/// equals `(-1)^K F+-`; the sign is removed.
pub fn iterate_qdet(
    chain: &DarbouxChain,
    lambda: Complex64,
    x: SpacetimePoint,
) -> Result<ChainValues> {
    check_spectral_parameter(lambda)?;
    let base = &chain.base;
    let n = base.dim();
    let k = chain.depth();
    let ms = chain
        .steps
        .iter()
        .map(|sp| Ok(build_m(base, sp, x)?.normalize_columns()?.0))
        .collect::<Result<Vec<_>>>()?;
    let lambdas: Vec<_> = chain
        .steps
        .iter()
        .map(SpectralData::lambda_matrix)
        .collect();
    let identity = ComplexMatrix::identity(n);
    let unit_top = |j: usize| {
        if j == 0 {
            identity.clone()
        } else {
            ComplexMatrix::zeros(n)
        }
    };

    let mut condition: f64 = 1.0;
    let mut eval = |grid: BlockGrid| -> Result<ComplexMatrix> {
        let q = qdet_block_conditioned(&grid)?;
        condition = condition.max(q.condition);
        Ok(q.value)
    };

    let v_grid = power_grid(&ms, &lambdas, |j| {
        ComplexMatrix::scalar(n, lambda.powu(j as u32))
    })?;
    let v = &eval(v_grid)? * &base.v(lambda, x)?;
    let g = &eval(power_grid(&ms, &lambdas, unit_top)?)? * &base.g(x)?;

    let sign = if k.is_multiple_of(2) { ONE } else { -ONE };
    let mut factor = |direction: Direction| -> Result<ComplexMatrix> {
        let weights: Vec<_> = chain
            .steps
            .iter()
            .map(|sp| sp.shifted_lambda(direction))
            .collect();
        Ok(eval(power_grid(&ms, &weights, unit_top)?)?.scale(sign))
    };
    let f_plus = factor(Direction::Plus)?;
    let f_minus = factor(Direction::Minus)?;
    Ok(ChainValues {
        v,
        g,
        j_plus: conjugate(&f_plus, &base.j_plus(x)?)?,
        j_minus: conjugate(&f_minus, &base.j_minus(x)?)?,
        f_plus,
        f_minus,
        condition: Some(condition),
    })
}

/// Max over the grid of `||d+ S (I - S) - [j+, S]||_F`,
/// `||d- S (I + S) - [j-, S]||_F` and `|Tr d+- S|`.
pub fn s_conditions_residual<S: LaxSolution>(
    step: &DarbouxStep<S>,
    grid: &Grid,
    tol: &Tolerances,
) -> Result<ResidualReport> {
    let h = grid.h;
    let maxima = sweep_max(grid, 4, |x| {
        let s = step.s(x)?;
        let n = s.n();
        let mut out = vec![0.0; 4];
        for (idx, dir) in [Direction::Plus, Direction::Minus].into_iter().enumerate() {
            let ds = deriv_lightcone(|y| step.s(y), x, dir, h)?;
            let factor = &ComplexMatrix::identity(n) - &s.scale(Complex64::new(dir.sign(), 0.0));
            let j = step.inner.current(dir, x)?;
            out[idx] = (&(&ds * &factor) - &j.commutator(&s)).frobenius_norm();
            out[2 + idx] = ds.trace().norm();
        }
        Ok(out)
    })?;
    let names = [
        "s_conditions.plus",
        "s_conditions.minus",
        "trace_dS.plus",
        "trace_dS.minus",
    ];
    let tols = [
        tol.derivative_at(h),
        tol.derivative_at(h),
        tol.algebraic,
        tol.algebraic,
    ];
    let mut report = ResidualReport::new();
    for ((name, m), t) in names.iter().zip(maxima).zip(tols) {
        report.push(ReportEntry::new(*name, m.value, t).grid(grid).at(m.at));
    }
    Ok(report)
}

/// Unitarity and reality checks for a step whose eigenvalues are `mu` and
/// `conj mu`: `S^+ + S = (mu + conj mu) I`, `S^+ S = |mu|^2 I`, the reality
/// condition on the dressed `V`, trace and anti-hermiticity of the currents,
/// and, when `|mu| = 1`, unitarity of `g~` (and `det g~ = 1` when
/// `det(-Lambda) = 1`).
pub fn unitarity_checks<S: LaxSolution>(
    step: &DarbouxStep<S>,
    grid: &Grid,
    tol: &Tolerances,
) -> Result<ResidualReport> {
    let mu = step.spectral.conjugate_pair()?;
    let unimodular = (mu.norm() - 1.0).abs() < 1e-12;
    let unit_det = (step.spectral.lambda_matrix().scale(-ONE).det() - ONE).norm() < 1e-12;
    let probe = Complex64::new(0.3, 0.4);
    let sum = mu + mu.conj();
    let prod = mu.norm_sqr();

    let mut names = vec![
        "unitarity.sum",
        "unitarity.product",
        "unitarity.reality",
        "su.trace_j.plus",
        "su.trace_j.minus",
        "su.antihermitian_j.plus",
        "su.antihermitian_j.minus",
    ];
    if unimodular {
        names.push("unitarity.g");
    }
    if unimodular && unit_det {
        names.push("unitarity.det_g");
    }
    let count = names.len();

    let maxima = sweep_max(grid, count, |x| {
        let s = step.s(x)?;
        let n = s.n();
        let sd = s.adjoint();
        let mut out = Vec::with_capacity(count);
        out.push((&(&sd + &s) - &ComplexMatrix::scalar(n, sum)).frobenius_norm());
        out.push(
            (&(&sd * &s) - &ComplexMatrix::scalar(n, Complex64::new(prod, 0.0))).frobenius_norm(),
        );
        let a = &step.v(probe.conj(), x)?.adjoint() * &step.v(probe, x)?;
        out.push(a.distance_from_identity_span() / a.frobenius_norm().max(1e-300));
        let jp = step.j_plus(x)?;
        let jm = step.j_minus(x)?;
        out.push(jp.trace().norm());
        out.push(jm.trace().norm());
        out.push((&jp + &jp.adjoint()).frobenius_norm());
        out.push((&jm + &jm.adjoint()).frobenius_norm());
        if unimodular {
            let g = step.g(x)?;
            out.push((&(&g.adjoint() * &g) - &ComplexMatrix::identity(n)).frobenius_norm());
            if unit_det {
                out.push((g.det() - ONE).norm());
            }
        }
        Ok(out)
    })?;
    let mut report = ResidualReport::new();
    for (name, m) in names.iter().zip(maxima) {
        report.push(
            ReportEntry::new(*name, m.value, tol.algebraic)
                .grid(grid)
                .at(m.at),
        );
    }
    Ok(report)
}

/// Hermitian projector form of a `(mu, conj mu)` step.
#[derive(Debug, Clone)]
pub struct ProjectorForm {
    /// Orthogonal projector onto the span of the `mu` columns of `M`.
    pub p: ComplexMatrix,
    /// `(mu - conj mu) P + conj mu I`.
    pub s: ComplexMatrix,
    /// `(lambda - conj mu) I - (mu - conj mu) P`.
    pub d: ComplexMatrix,
}

/// Builds `P = A (A^+ A)^-1 A^+` from the columns of `M` carrying `mu` and
/// assembles `S` and `D(lambda)` from it.
pub fn projector_path<S: LaxSolution>(
    step: &DarbouxStep<S>,
    x: SpacetimePoint,
    lambda: Complex64,
) -> Result<ProjectorForm> {
    let mu = step.spectral.conjugate_pair()?;
    let m = step.m(x)?;
    let n = m.n();
    let scale = mu.norm().max(1.0);
    let group: Vec<usize> = (0..n)
        .filter(|&i| (step.spectral.lambdas[i] - mu).norm() <= 1e-12 * scale)
        .collect();
    let cols = group
        .iter()
        .map(|&i| {
            let c = m.column(i);
            let norm = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm == 0.0 || !norm.is_finite() {
                return Err(Error::ZeroNormColumn(i));
            }
            Ok(c.into_iter().map(|z| z / norm).collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let r = cols.len();
    // Gram matrix G = A^+ A (r x r) and P = A G^-1 A^+.
    let mut gram = ComplexMatrix::zeros(r);
    for a in 0..r {
        for b in 0..r {
            gram[(a, b)] = crate::model::inner_product(&cols[a], &cols[b]);
        }
    }
    let ginv = gram.invert()?;
    let mut p = ComplexMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = ZERO;
            for a in 0..r {
                for b in 0..r {
                    acc += cols[a][i] * ginv[(a, b)] * cols[b][j].conj();
                }
            }
            p[(i, j)] = acc;
        }
    }
    let gap = mu - mu.conj();
    let s = &p.scale(gap) + &ComplexMatrix::scalar(n, mu.conj());
    let d = &ComplexMatrix::scalar(n, lambda - mu.conj()) - &p.scale(gap);
    Ok(ProjectorForm { p, s, d })
}
