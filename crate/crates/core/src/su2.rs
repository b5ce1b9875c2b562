//! Closed-form SU(2) solitons over the seed `g = diag(e^{i(px+ + qx-)}, c.c.)`
//! with `mu = e^{i theta}`.
//!
//! With `r = -p x+ cot(theta/2) + q x- tan(theta/2)` and `s = p x+ + q x-`,
//!
//! ```text
//! S = [[cos + i sin tanh r, -i sin sech r e^{is}],
//!      [-i sin sech r e^{-is}, cos - i sin tanh r]]
//! g~ = -S g = [[X, Y], [-conj Y, conj X]] g
//! ```

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::darboux::check_theta;
use crate::error::{Error, Result};
use crate::matcore::{ComplexMatrix, I, ONE};
use crate::model::{Currents, LaxSolution, SeedSolution, SpacetimePoint};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolitonParams {
    pub p: f64,
    pub q: f64,
    pub theta: f64,
}

fn check_rates(p: f64, q: f64) -> Result<()> {
    if p == 0.0 || q == 0.0 || !p.is_finite() || !q.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "p and q must be finite and nonzero (p = {p}, q = {q})"
        )));
    }
    Ok(())
}

impl SolitonParams {
    pub fn new(p: f64, q: f64, theta: f64) -> Result<Self> {
        check_rates(p, q)?;
        check_theta(theta)?;
        Ok(Self { p, q, theta })
    }

    pub fn mu(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.theta)
    }

    pub fn seed(&self) -> Result<SeedSolution> {
        SeedSolution::su2(self.p, self.q)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoSolitonParams {
    pub p: f64,
    pub q: f64,
    pub theta1: f64,
    pub theta2: f64,
}

impl TwoSolitonParams {
    pub fn new(p: f64, q: f64, theta1: f64, theta2: f64) -> Result<Self> {
        check_rates(p, q)?;
        check_theta(theta1)?;
        check_theta(theta2)?;
        if theta1 == theta2 {
            return Err(Error::InvalidParameter(
                "theta1 and theta2 must differ".into(),
            ));
        }
        Ok(Self {
            p,
            q,
            theta1,
            theta2,
        })
    }

    pub fn first(&self) -> SolitonParams {
        SolitonParams {
            p: self.p,
            q: self.q,
            theta: self.theta1,
        }
    }

    pub fn second(&self) -> SolitonParams {
        SolitonParams {
            p: self.p,
            q: self.q,
            theta: self.theta2,
        }
    }
}

/// `r`, `s` at a point, with the largest imaginary part left over from the
/// complex defining combinations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RsProfile {
    pub r: f64,
    pub s: f64,
    pub imaginary_residue: f64,
}

/// `r = i(1/(1-mu) - 1/(1-conj mu)) p x+ + i(1/(1+mu) - 1/(1+conj mu)) q x-`,
/// `s = (1/(1-mu) + 1/(1-conj mu)) p x+ + (1/(1+mu) + 1/(1+conj mu)) q x-`.
pub fn rs_profile(params: &SolitonParams, x: SpacetimePoint) -> Result<RsProfile> {
    check_theta(params.theta)?;
    let mu = params.mu();
    let mb = mu.conj();
    let (a, b) = (ONE / (ONE - mu), ONE / (ONE - mb));
    let (c, d) = (ONE / (ONE + mu), ONE / (ONE + mb));
    let r = I * (a - b) * params.p * x.xplus + I * (c - d) * params.q * x.xminus;
    let s = (a + b) * params.p * x.xplus + (c + d) * params.q * x.xminus;
    Ok(RsProfile {
        r: r.re,
        s: s.re,
        imaginary_residue: r.im.abs().max(s.im.abs()),
    })
}

/// Real closed forms `r = -p x+ cot(theta/2) + q x- tan(theta/2)`, `s = p x+ + q x-`.
pub fn rs_real(params: &SolitonParams, x: SpacetimePoint) -> (f64, f64) {
    let half = 0.5 * params.theta;
    (
        -params.p * x.xplus / half.tan() + params.q * x.xminus * half.tan(),
        params.p * x.xplus + params.q * x.xminus,
    )
}

/// `[[x, y], [-conj y, conj x]]`.
pub fn su2_matrix(x: Complex64, y: Complex64) -> ComplexMatrix {
    ComplexMatrix::from_row_major(2, vec![x, y, -y.conj(), x.conj()]).expect("2x2")
}

#[derive(Debug, Clone)]
pub struct OneSoliton {
    pub rs: RsProfile,
    pub s: ComplexMatrix,
    pub x_tilde: Complex64,
    pub y_tilde: Complex64,
    pub g: ComplexMatrix,
    pub j_plus: ComplexMatrix,
    pub j_minus: ComplexMatrix,
}

/// Entries `(a, b, c, d)` of `j~+ = [[a, b], [-conj b, conj a]]` and
/// `j~- = [[c, d], [-conj d, conj c]]`.
pub fn current_entries(params: &SolitonParams, r: f64, s: f64) -> [Complex64; 4] {
    let (sin, cos) = params.theta.sin_cos();
    let (tanh, sech) = (r.tanh(), 1.0 / r.cosh());
    let phase = Complex64::from_polar(sech, s);
    let (ip, iq) = (I * params.p, I * params.q);
    [
        ip * (1.0 - (1.0 + cos) * sech * sech),
        -ip * (Complex64::new((1.0 + cos) * tanh, sin)) * phase,
        iq * (1.0 - (1.0 - cos) * sech * sech),
        -iq * (Complex64::new((1.0 - cos) * tanh, -sin)) * phase,
    ]
}

/// The `j~-` off-diagonal entry with the opposite overall sign,
/// `iq[(1 - cos) tanh r - i sin] sech r e^{is}`, as it is sometimes quoted.
/// It does not reproduce `(I + S) j- (I + S)^-1`.
pub fn quoted_d(params: &SolitonParams, r: f64, s: f64) -> Complex64 {
    -current_entries(params, r, s)[3]
}

pub fn one_soliton(params: &SolitonParams, x: SpacetimePoint) -> Result<OneSoliton> {
    let rs = rs_profile(params, x)?;
    let (sin, cos) = params.theta.sin_cos();
    let (tanh, sech) = (rs.r.tanh(), 1.0 / rs.r.cosh());
    let diag = Complex64::new(cos, sin * tanh);
    let off = -I * sin * Complex64::from_polar(sech, rs.s);
    let s =
        ComplexMatrix::from_row_major(2, vec![diag, off, -off.conj(), diag.conj()]).expect("2x2");
    let x_tilde = -diag;
    let y_tilde = I * sin * Complex64::from_polar(sech, rs.s);
    let g = &su2_matrix(x_tilde, y_tilde) * &params.seed()?.g(x)?;
    let [a, b, c, d] = current_entries(params, rs.r, rs.s);
    Ok(OneSoliton {
        rs,
        s,
        x_tilde,
        y_tilde,
        g,
        j_plus: su2_matrix(a, b),
        j_minus: su2_matrix(c, d),
    })
}

/// Closed-form one-soliton currents as a field.
#[derive(Debug, Clone, Copy)]
pub struct OneSolitonCurrents(pub SolitonParams);

impl Currents for OneSolitonCurrents {
    fn dim(&self) -> usize {
        2
    }
    fn j_plus(&self, x: SpacetimePoint) -> Result<ComplexMatrix> {
        Ok(one_soliton(&self.0, x)?.j_plus)
    }
    fn j_minus(&self, x: SpacetimePoint) -> Result<ComplexMatrix> {
        Ok(one_soliton(&self.0, x)?.j_minus)
    }
}

#[derive(Debug, Clone)]
pub struct TwoSoliton {
    pub x3: Complex64,
    pub y3: Complex64,
    pub g: ComplexMatrix,
    pub denominator: f64,
}

/// The quoted two-soliton closed form, evaluated term by term with `r_k`,
/// `s_k` taken from [`rs_profile`] at `theta_k`. Points where the common
/// denominator is below `floor` in magnitude are rejected.
pub fn two_soliton(params: &TwoSolitonParams, x: SpacetimePoint, floor: f64) -> Result<TwoSoliton> {
    let p1 = rs_profile(&params.first(), x)?;
    let p2 = rs_profile(&params.second(), x)?;
    let (r1, s1, r2, s2) = (p1.r, p1.s, p2.r, p2.s);
    let (sn1, cs1) = params.theta1.sin_cos();
    let (sn2, cs2) = params.theta2.sin_cos();
    let (sh1, ch1, th1) = (r1.sinh(), r1.cosh(), r1.tanh());
    let (sh2, ch2, th2) = (r2.sinh(), r2.cosh(), r2.tanh());
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let e = |phi: f64| Complex64::from_polar(1.0, phi);

    let denominator = sn2 * sn1 * (sh2 * sh1 - (s2 - s1).cos()) - (1.0 - cs2 * cs1) * ch1 * ch2;
    if denominator.is_nan() || denominator.abs() <= floor {
        return Err(Error::VanishingDenominator(denominator));
    }

    let a = c(cs2 * ch2 * ch1, 0.0) + I * (sh2 * sh1 * (sn2 - sn1))
        - I * (sn2 * sn1 * sn1 * sh1 / ch1)
        - cs2 * c(cs1 * ch1, -sn1 * sh1) * c(cs2 * ch2, sn2 * sh2);
    let b = sn2
        * sn1
        * (c(cs1, -sn1 * th1) * e(s1 - s2) + c(-2.0 * cs2 + cs1, sn1 * th1) * e(-(s1 - s2)));
    let cc = -I * sn2 * ch1 * (ONE - c(cs1, sn1 * th1) * c(2.0 * cs2 - cs1, -sn1 * th1)) * e(s1)
        + I * sn1 * ch2 * (ONE + c(cs2, sn2 * th2) * c(2.0 * cs1 - cs2, -sn2 * th2)) * e(s2)
        + I * sn1 * sn2 * e(s1) * (sn2 / ch2 - sn1 / ch1 * e(s1 - s2));

    let x3 = (a + b) / denominator;
    let y3 = cc / (2.0 * denominator);
    let seed = SeedSolution::su2(params.p, params.q)?;
    Ok(TwoSoliton {
        x3,
        y3,
        g: &su2_matrix(x3, y3) * &seed.g(x)?,
        denominator,
    })
}

/// Direction of the asymptotic limit `r -> +-infinity`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AsymptoticSign {
    Plus,
    Minus,
}

impl AsymptoticSign {
    pub fn sign(self) -> f64 {
        match self {
            AsymptoticSign::Plus => 1.0,
            AsymptoticSign::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AsymptoticLimit {
    /// `diag((-1)^K e^{+-i sum theta}, (-1)^K e^{-+i sum theta})`.
    pub factor: ComplexMatrix,
    /// Single-soliton limits `diag(-e^{+-i theta_k}, -e^{-+i theta_k})`.
    pub single_factors: Vec<ComplexMatrix>,
    /// Product of the single-soliton limits, last step leftmost.
    pub product: ComplexMatrix,
}

/// Limit of `g[K+1] g^-1` as every `r_k -> +-infinity`.
pub fn asymptotic_g(thetas: &[f64], sign: AsymptoticSign) -> Result<AsymptoticLimit> {
    if thetas.is_empty() {
        return Err(Error::InvalidParameter("need at least one angle".into()));
    }
    for &t in thetas {
        check_theta(t)?;
    }
    let sg = sign.sign();
    let k = thetas.len();
    let total: f64 = thetas.iter().sum();
    let parity = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    let factor = ComplexMatrix::diag(&[
        Complex64::from_polar(parity, sg * total),
        Complex64::from_polar(parity, -sg * total),
    ]);
    let single_factors: Vec<_> = thetas
        .iter()
        .map(|&t| {
            ComplexMatrix::diag(&[
                -Complex64::from_polar(1.0, sg * t),
                -Complex64::from_polar(1.0, -sg * t),
            ])
        })
        .collect();
    let product = single_factors
        .iter()
        .fold(ComplexMatrix::identity(2), |acc, f| f * &acc);
    Ok(AsymptoticLimit {
        factor,
        single_factors,
        product,
    })
}

/// A point on `x- = 0` where every `r_k` has the sign of `r` and the smallest
/// `|r_k|` equals `|r|`. All angles must lie on the same side of `pi`.
pub fn point_at_r(p: f64, thetas: &[f64], r: f64) -> Result<SpacetimePoint> {
    if p == 0.0 || !p.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "p must be finite and nonzero, got {p}"
        )));
    }
    let mut rates = Vec::with_capacity(thetas.len());
    for &t in thetas {
        check_theta(t)?;
        // r_k = -p x+ cot(theta_k / 2) on x- = 0
        rates.push(-p / (0.5 * t).tan());
    }
    let first = rates
        .first()
        .ok_or_else(|| Error::InvalidParameter("need an angle".into()))?;
    if rates.iter().any(|k| k.signum() != first.signum()) {
        return Err(Error::InvalidParameter(
            "angles on both sides of pi give r_k of opposite signs".into(),
        ));
    }
    let slowest = rates.iter().fold(f64::INFINITY, |m, k| m.min(k.abs()));
    Ok(SpacetimePoint::new(r / (slowest * first.signum()), 0.0))
}
