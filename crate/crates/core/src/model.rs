//! The chiral model: seed solutions, light-cone differencing, and residuals
//! of the Lax pair and the field equations.
//!
//! The Lax pair is
//!
//! ```text
//! d+ V = j+ V / (1 - lambda)
//! d- V = j- V / (1 + lambda)
//! ```
//!
//! whose compatibility is current conservation `d+ j- + d- j+ = 0` together
//! with zero curvature `d- j+ - d+ j- + [j+, j-] = 0`. `V(0)` is the chiral
//! field `g`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{ComplexMatrix, I, ONE, ZERO};
use crate::report::{ReportEntry, ResidualReport};
use crate::tolerance::Tolerances;

/// Distance from `+-1` below which a spectral parameter is treated as a pole.
pub const POLE_GUARD: f64 = 1e-12;

/// Point in light-cone coordinates `x+ = (t + x)/2`, `x- = (t - x)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpacetimePoint {
    pub xplus: f64,
    pub xminus: f64,
}

impl SpacetimePoint {
    pub fn new(xplus: f64, xminus: f64) -> Self {
        Self { xplus, xminus }
    }

    pub fn from_tx(t: f64, x: f64) -> Self {
        Self {
            xplus: 0.5 * (t + x),
            xminus: 0.5 * (t - x),
        }
    }

    pub fn origin() -> Self {
        Self::new(0.0, 0.0)
    }

    pub fn t(&self) -> f64 {
        self.xplus + self.xminus
    }

    pub fn x(&self) -> f64 {
        self.xplus - self.xminus
    }

    /// Shifts only the coordinate matching `direction`.
    pub fn shifted(&self, direction: Direction, by: f64) -> Self {
        match direction {
            Direction::Plus => Self::new(self.xplus + by, self.xminus),
            Direction::Minus => Self::new(self.xplus, self.xminus + by),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Plus,
    Minus,
}

impl Direction {
    /// `+1` for the plus direction, `-1` for minus.
    pub fn sign(self) -> f64 {
        match self {
            Direction::Plus => 1.0,
            Direction::Minus => -1.0,
        }
    }
}

/// Rejects `lambda = +-1`, where the Lax pair coefficients blow up.
pub fn check_spectral_parameter(lambda: Complex64) -> Result<()> {
    if !(lambda.re.is_finite() && lambda.im.is_finite())
        || (lambda - ONE).norm() < POLE_GUARD
        || (lambda + ONE).norm() < POLE_GUARD
    {
        return Err(Error::LaxPole(lambda));
    }
    Ok(())
}

/// Current fields `j+(x)`, `j-(x)`.
pub trait Currents: Sync {
    fn dim(&self) -> usize;
    fn j_plus(&self, x: SpacetimePoint) -> Result<ComplexMatrix>;
    fn j_minus(&self, x: SpacetimePoint) -> Result<ComplexMatrix>;

    fn current(&self, direction: Direction, x: SpacetimePoint) -> Result<ComplexMatrix> {
        match direction {
            Direction::Plus => self.j_plus(x),
            Direction::Minus => self.j_minus(x),
        }
    }
}

/// A collection `(V(lambda), j+, j-)` solving the Lax pair.
pub trait LaxSolution: Currents {
    fn v(&self, lambda: Complex64, x: SpacetimePoint) -> Result<ComplexMatrix>;

    fn g(&self, x: SpacetimePoint) -> Result<ComplexMatrix> {
        self.v(ZERO, x)
    }
}

impl<T: Currents + ?Sized> Currents for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn j_plus(&self, x: SpacetimePoint) -> Result<ComplexMatrix> {
        (**self).j_plus(x)
    }
    fn j_minus(&self, x: SpacetimePoint) -> Result<ComplexMatrix> {
        (**self).j_minus(x)
    }
}

impl<T: LaxSolution + ?Sized> LaxSolution for &T {
    fn v(&self, lambda: Complex64, x: SpacetimePoint) -> Result<ComplexMatrix> {
        (**self).v(lambda, x)
    }
    fn g(&self, x: SpacetimePoint) -> Result<ComplexMatrix> {
        (**self).g(x)
    }
}

/// Diagonal vacuum: constant commuting currents `j+ = diag(i a_k)`,
/// `j- = diag(i b_k)` and
/// `V(lambda) = diag(exp i(a_k x+ / (1 - lambda) + b_k x- / (1 + lambda)))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedSolution {
    plus_rates: Vec<f64>,
    minus_rates: Vec<f64>,
}

impl SeedSolution {
    pub fn diagonal(plus_rates: Vec<f64>, minus_rates: Vec<f64>) -> Result<Self> {
        if plus_rates.is_empty() || plus_rates.len() != minus_rates.len() {
            return Err(Error::InvalidParameter(
                "seed rates must be non-empty and of equal length".into(),
            ));
        }
        if plus_rates
            .iter()
            .chain(&minus_rates)
            .any(|v| !v.is_finite())
        {
            return Err(Error::InvalidParameter("seed rates must be finite".into()));
        }
        Ok(Self {
            plus_rates,
            minus_rates,
        })
    }

    /// SU(2) seed `g = diag(e^{i(p x+ + q x-)}, e^{-i(p x+ + q x-)})`.
    pub fn su2(p: f64, q: f64) -> Result<Self> {
        if p == 0.0 || q == 0.0 || !p.is_finite() || !q.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "p and q must be finite and nonzero (p = {p}, q = {q})"
            )));
        }
        Self::diagonal(vec![p, -p], vec![q, -q])
    }

    pub fn plus_rates(&self) -> &[f64] {
        &self.plus_rates
    }

    pub fn minus_rates(&self) -> &[f64] {
        &self.minus_rates
    }

    /// Exponent `i(a x+ / (1 - lambda) + b x- / (1 + lambda))` of diagonal entry `k`.
    fn phase(&self, k: usize, lambda: Complex64, x: SpacetimePoint) -> Complex64 {
        I * (self.plus_rates[k] * x.xplus / (ONE - lambda)
            + self.minus_rates[k] * x.xminus / (ONE + lambda))
    }

    /// `omega(lambda)`, the first diagonal entry of `V(lambda)`.
    pub fn omega(&self, lambda: Complex64, x: SpacetimePoint) -> Result<Complex64> {
        check_spectral_parameter(lambda)?;
        Ok(self.phase(0, lambda, x).exp())
    }
}

/// Builds the SU(2) seed with rates `p`, `q`.
pub fn make_seed_su2(p: f64, q: f64) -> Result<SeedSolution> {
    SeedSolution::su2(p, q)
}

impl Currents for SeedSolution {
    fn dim(&self) -> usize {
        self.plus_rates.len()
    }

    fn j_plus(&self, _x: SpacetimePoint) -> Result<ComplexMatrix> {
        Ok(ComplexMatrix::diag(
            &self.plus_rates.iter().map(|&a| I * a).collect::<Vec<_>>(),
        ))
    }

    fn j_minus(&self, _x: SpacetimePoint) -> Result<ComplexMatrix> {
        Ok(ComplexMatrix::diag(
            &self.minus_rates.iter().map(|&b| I * b).collect::<Vec<_>>(),
        ))
    }
}

impl LaxSolution for SeedSolution {
    fn v(&self, lambda: Complex64, x: SpacetimePoint) -> Result<ComplexMatrix> {
        check_spectral_parameter(lambda)?;
        let entries: Vec<_> = (0..self.dim())
            .map(|k| self.phase(k, lambda, x).exp())
            .collect();
        Ok(ComplexMatrix::diag(&entries))
    }
}

/// Rectangular sampling region in `(t, x)` plus the finite-difference step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub t_min: f64,
    pub t_max: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub nt: usize,
    pub nx: usize,
    pub h: f64,
}

impl Default for Grid {
    fn default() -> Self {
        Self {
            t_min: -5.0,
            t_max: 5.0,
            x_min: -5.0,
            x_max: 5.0,
            nt: 41,
            nx: 41,
            h: 1e-4,
        }
    }
}

impl Grid {
    pub fn validate(&self) -> Result<()> {
        let bounds = [self.t_min, self.t_max, self.x_min, self.x_max];
        if bounds.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid("bounds must be finite".into()));
        }
        if self.t_max < self.t_min || self.x_max < self.x_min {
            return Err(Error::InvalidGrid("bounds must be ordered".into()));
        }
        if self.nt < 2 || self.nx < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 points per axis (nt = {}, nx = {})",
                self.nt, self.nx
            )));
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "step h must be positive, got {}",
                self.h
            )));
        }
        Ok(())
    }

    pub fn with_h(&self, h: f64) -> Self {
        Self { h, ..self.clone() }
    }

    fn axis(min: f64, max: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| {
                if i + 1 == n {
                    max
                } else {
                    min + (max - min) * i as f64 / (n - 1) as f64
                }
            })
            .collect()
    }

    /// Uniform `t` samples including both endpoints.
    pub fn t_values(&self) -> Vec<f64> {
        Self::axis(self.t_min, self.t_max, self.nt)
    }

    pub fn x_values(&self) -> Vec<f64> {
        Self::axis(self.x_min, self.x_max, self.nx)
    }

    /// Grid points, `t` outer and `x` inner.
    pub fn points(&self) -> Vec<SpacetimePoint> {
        let xs = self.x_values();
        self.t_values()
            .into_iter()
            .flat_map(|t| xs.iter().map(move |&x| SpacetimePoint::from_tx(t, x)))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.nt * self.nx
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Central difference `(f(x + h e) - f(x - h e)) / 2h` along one light-cone
/// coordinate.
pub fn deriv_lightcone<F>(
    f: F,
    x: SpacetimePoint,
    direction: Direction,
    h: f64,
) -> Result<ComplexMatrix>
where
    F: Fn(SpacetimePoint) -> Result<ComplexMatrix>,
{
    if h.is_nan() || h <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "step h must be positive, got {h}"
        )));
    }
    let fwd = f(x.shifted(direction, h))?;
    let bwd = f(x.shifted(direction, -h))?;
    Ok((&fwd - &bwd).scale(Complex64::new(0.5 / h, 0.0)))
}

/// Worst value of one residual component over a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridMax {
    pub value: f64,
    pub at: SpacetimePoint,
}

/// Evaluates `f` at every grid point (in parallel) and keeps, per component,
/// the maximum and where it occurred. The first error in grid order wins.
pub fn sweep_max<F>(grid: &Grid, components: usize, f: F) -> Result<Vec<GridMax>>
where
    F: Fn(SpacetimePoint) -> Result<Vec<f64>> + Sync,
{
    grid.validate()?;
    let points = grid.points();
    let values: Vec<Result<Vec<f64>>> = points.par_iter().map(|&p| f(p)).collect();
    let mut best = vec![
        GridMax {
            value: 0.0,
            at: points[0],
        };
        components
    ];
    for (p, vals) in points.iter().zip(values) {
        let vals = vals?;
        for (b, &v) in best.iter_mut().zip(&vals) {
            // NaN propagates as a failure
            if v > b.value || v.is_nan() && !b.value.is_nan() {
                *b = GridMax { value: v, at: *p };
            }
        }
    }
    Ok(best)
}

/// Max over the grid of `||d+ V - j+ V/(1-lambda)||_F` and
/// `||d- V - j- V/(1+lambda)||_F` (entries `lax.plus`, `lax.minus`).
pub fn lax_residual<S: LaxSolution + ?Sized>(
    state: &S,
    lambda: Complex64,
    grid: &Grid,
    tol: &Tolerances,
) -> Result<ResidualReport> {
    check_spectral_parameter(lambda)?;
    let h = grid.h;
    let maxima = sweep_max(grid, 2, |x| {
        let v = state.v(lambda, x)?;
        let mut out = Vec::with_capacity(2);
        for dir in [Direction::Plus, Direction::Minus] {
            let dv = deriv_lightcone(|y| state.v(lambda, y), x, dir, h)?;
            let coeff = ONE / (ONE - lambda * dir.sign());
            let rhs = (&state.current(dir, x)? * &v).scale(coeff);
            out.push((&dv - &rhs).frobenius_norm());
        }
        Ok(out)
    })?;
    let tolerance = tol.derivative_at(h);
    let mut report = ResidualReport::new();
    for (name, m) in ["lax.plus", "lax.minus"].iter().zip(maxima) {
        report.push(
            ReportEntry::new(*name, m.value, tolerance)
                .grid(grid)
                .at(m.at)
                .detail(format!("lambda = {lambda}")),
        );
    }
    Ok(report)
}

/// Max over the grid of `||d+ j- + d- j+||_F` (conservation) and
/// `||d- j+ - d+ j- + [j+, j-]||_F` (zero curvature).
pub fn eom_residual<C: Currents + ?Sized>(
    currents: &C,
    grid: &Grid,
    tol: &Tolerances,
) -> Result<ResidualReport> {
    let h = grid.h;
    let maxima = sweep_max(grid, 2, |x| {
        let dp_jm = deriv_lightcone(|y| currents.j_minus(y), x, Direction::Plus, h)?;
        let dm_jp = deriv_lightcone(|y| currents.j_plus(y), x, Direction::Minus, h)?;
        let jp = currents.j_plus(x)?;
        let jm = currents.j_minus(x)?;
        let conservation = (&dp_jm + &dm_jp).frobenius_norm();
        let curvature = (&(&dm_jp - &dp_jm) + &jp.commutator(&jm)).frobenius_norm();
        Ok(vec![conservation, curvature])
    })?;
    let tolerance = tol.derivative_at(h);
    let mut report = ResidualReport::new();
    for (name, m) in ["eom.conservation", "eom.zero_curvature"]
        .iter()
        .zip(maxima)
    {
        report.push(
            ReportEntry::new(*name, m.value, tolerance)
                .grid(grid)
                .at(m.at),
        );
    }
    Ok(report)
}

/// Column solution `x -> V(lambda_i, x) |i>` of the Lax pair at `lambda_i`.
#[derive(Debug, Clone)]
pub struct ColumnSolution<'a, S: ?Sized> {
    state: &'a S,
    lambda: Complex64,
    ket: Vec<Complex64>,
}

pub fn column_solution<'a, S: LaxSolution + ?Sized>(
    state: &'a S,
    lambda: Complex64,
    ket: Vec<Complex64>,
) -> Result<ColumnSolution<'a, S>> {
    check_spectral_parameter(lambda)?;
    if ket.len() != state.dim() {
        return Err(Error::DimensionMismatch {
            expected: state.dim(),
            found: ket.len(),
        });
    }
    if ket.iter().all(|c| *c == ZERO) {
        return Err(Error::InvalidParameter("ket must be nonzero".into()));
    }
    Ok(ColumnSolution { state, lambda, ket })
}

impl<S: LaxSolution + ?Sized> ColumnSolution<'_, S> {
    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    pub fn at(&self, x: SpacetimePoint) -> Result<Vec<Complex64>> {
        Ok(self.state.v(self.lambda, x)?.apply(&self.ket))
    }
}

/// Hermitian pairing `<a|b> = sum conj(a_i) b_i`.
pub fn inner_product(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn seed_examples() {
        let seed = make_seed_su2(1.0, 1.0).unwrap();
        assert_eq!(
            seed.g(SpacetimePoint::origin()).unwrap(),
            ComplexMatrix::identity(2)
        );
        assert_eq!(
            seed.j_plus(SpacetimePoint::origin()).unwrap(),
            ComplexMatrix::diag(&[I, -I])
        );
        let seed = make_seed_su2(1.3, -0.4).unwrap();
        for &(t, x) in &[(0.3, -1.2), (4.0, 2.5), (-3.3, 0.1)] {
            let p = SpacetimePoint::from_tx(t, x);
            let g = seed.g(p).unwrap();
            let v0 = seed.v(ZERO, p).unwrap();
            assert!((&g - &v0).frobenius_norm() < 1e-14);
            let phase = 1.3 * p.xplus - 0.4 * p.xminus;
            assert!((g[(0, 0)] - Complex64::from_polar(1.0, phase)).norm() < 1e-14);
            assert!((g.det() - ONE).norm() < 1e-14);
            let gu = &g.adjoint() * &g;
            assert!((&gu - &ComplexMatrix::identity(2)).frobenius_norm() < 1e-14);
        }
    }

    #[test]
    fn seed_rejects_bad_parameters() {
        assert!(make_seed_su2(0.0, 1.0).is_err());
        assert!(make_seed_su2(1.0, f64::NAN).is_err());
        let seed = make_seed_su2(1.0, 1.0).unwrap();
        let x = SpacetimePoint::origin();
        assert!(matches!(seed.v(ONE, x), Err(Error::LaxPole(_))));
        assert!(matches!(seed.v(-ONE, x), Err(Error::LaxPole(_))));
    }

    #[test]
    fn seed_reality_condition() {
        let seed = make_seed_su2(0.8, 1.7).unwrap();
        for &l in &[c(0.3, 0.4), c(-2.0, 0.7), c(0.5, 0.0), c(0.0, 3.0)] {
            for &(t, x) in &[(1.0, 2.0), (-4.0, 0.5)] {
                let p = SpacetimePoint::from_tx(t, x);
                let a = &seed.v(l.conj(), p).unwrap().adjoint() * &seed.v(l, p).unwrap();
                assert!(a.distance_from_identity_span() <= 1e-12 * a.frobenius_norm());
            }
        }
    }

    #[test]
    fn lightcone_coordinates() {
        let p = SpacetimePoint::from_tx(3.0, 1.0);
        assert_eq!((p.xplus, p.xminus), (2.0, 1.0));
        assert_eq!((p.t(), p.x()), (3.0, 1.0));
        let q = p.shifted(Direction::Minus, 0.5);
        assert_eq!((q.xplus, q.xminus), (2.0, 1.5));
    }

    #[test]
    fn derivative_of_constant_is_zero() {
        let m = ComplexMatrix::diag(&[c(1.0, 2.0), c(-3.0, 0.5)]);
        let d = deriv_lightcone(
            |_| Ok(m.clone()),
            SpacetimePoint::new(0.3, 0.2),
            Direction::Plus,
            1e-3,
        )
        .unwrap();
        assert_eq!(d.frobenius_norm(), 0.0);
    }

    #[test]
    fn derivative_converges_at_second_order() {
        let p = 1.7;
        let f = |y: SpacetimePoint| {
            Ok(ComplexMatrix::scalar(
                2,
                Complex64::from_polar(1.0, p * y.xplus),
            ))
        };
        let x = SpacetimePoint::new(0.4, -0.9);
        let exact = ComplexMatrix::scalar(2, I * p * Complex64::from_polar(1.0, p * x.xplus));
        let err = |h: f64| {
            (&deriv_lightcone(f, x, Direction::Plus, h).unwrap() - &exact).frobenius_norm()
        };
        let (e1, e2) = (err(2e-3), err(1e-3));
        let ratio = e1 / e2;
        assert!((ratio - 4.0).abs() < 0.05, "ratio {ratio}");
        // minus direction leaves a pure x+ field untouched
        let d = deriv_lightcone(f, x, Direction::Minus, 1e-3).unwrap();
        assert_eq!(d.frobenius_norm(), 0.0);
        assert!(deriv_lightcone(f, x, Direction::Plus, 0.0).is_err());
    }

    #[test]
    fn seed_lax_and_eom_residuals() {
        let seed = make_seed_su2(1.0, 1.0).unwrap();
        let grid = Grid {
            nt: 9,
            nx: 9,
            ..Grid::default()
        };
        let tol = Tolerances::default();
        for l in [ZERO, c(0.5, 0.0), c(0.3, 0.4)] {
            let r = lax_residual(&seed, l, &grid, &tol).unwrap();
            assert!(r.passed(), "{r:?}");
            assert!(r.max_value() > 0.0);
        }
        let r = eom_residual(&seed, &grid, &tol).unwrap();
        assert!(r.max_value() < 1e-12);
        assert!(lax_residual(&seed, ONE, &grid, &tol).is_err());
    }

    #[test]
    fn grid_layout_and_validation() {
        let g = Grid {
            t_min: 0.0,
            t_max: 1.0,
            x_min: -1.0,
            x_max: 1.0,
            nt: 2,
            nx: 3,
            h: 1e-4,
        };
        let pts = g.points();
        assert_eq!(pts.len(), 6);
        assert_eq!((pts[0].t(), pts[0].x()), (0.0, -1.0));
        assert_eq!((pts[1].t(), pts[1].x()), (0.0, 0.0));
        assert_eq!((pts[5].t(), pts[5].x()), (1.0, 1.0));
        assert!(Grid { nt: 0, ..g.clone() }.validate().is_err());
        assert!(Grid {
            h: 0.0,
            ..g.clone()
        }
        .validate()
        .is_err());
        assert!(Grid { t_max: -1.0, ..g }.validate().is_err());
    }

    #[test]
    fn column_solutions() {
        let seed = make_seed_su2(1.0, 2.0).unwrap();
        let mu = Complex64::from_polar(1.0, 1.1);
        let col = column_solution(&seed, mu, vec![ONE, -ONE]).unwrap();
        assert_eq!(col.at(SpacetimePoint::origin()).unwrap(), vec![ONE, -ONE]);
        let x = SpacetimePoint::new(0.7, -0.3);
        let v = col.at(x).unwrap();
        let w = seed.omega(mu, x).unwrap();
        assert!((v[0] - w).norm() < 1e-14);
        assert!((v[1] + ONE / w).norm() < 1e-14);

        // orthogonality of the (mu, conj mu) pair
        let col2 = column_solution(&seed, mu.conj(), vec![ONE, ONE]).unwrap();
        for &(t, xx) in &[(0.0, 0.0), (3.0, -2.0), (-4.5, 4.5)] {
            let p = SpacetimePoint::from_tx(t, xx);
            assert!(inner_product(&col.at(p).unwrap(), &col2.at(p).unwrap()).norm() < 1e-12);
        }

        assert!(column_solution(&seed, ONE, vec![ONE, ONE]).is_err());
        assert!(column_solution(&seed, mu, vec![ZERO, ZERO]).is_err());
        assert!(column_solution(&seed, mu, vec![ONE]).is_err());
    }
}
