use num_complex::Complex64;
use serde::Serialize;

use super::moments::{free_bins, MomentData};
use crate::error::{Error, Result};
use crate::repr;
use crate::setsys::IncidenceSystem;

use std::f64::consts::PI;

/// Pairings `<phi(b), theta_j>` for every block, laid out `b * (l-1) + j`.
fn pairings(theta: &[f64], sys: &IncidenceSystem, l: u64) -> Result<Vec<f64>> {
    let bins = free_bins(l)?;
    let a = sys.cols();
    if theta.len() != bins * a {
        return Err(Error::DimensionMismatch { expected: bins * a, found: theta.len() });
    }
    let mut out = Vec::with_capacity(sys.rows() * bins);
    for b in 0..sys.rows() {
        let supp = sys.row_support(b);
        for th in theta.chunks(a) {
            out.push(supp.iter().map(|&(i, v)| v as f64 * th[i]).sum());
        }
    }
    Ok(out)
}

/// `p - round(p)` with the representative taken in `[-1/2, 1/2)`.
fn frac(p: f64) -> f64 {
    p - (p + 0.5).floor()
}

/// `f(x) = (1/l)(1 + sum_j e^{i x_j})` for `x` of length `l - 1`.
pub fn f_multiplier(x: &[f64], l: u64) -> Result<Complex64> {
    let bins = free_bins(l)?;
    if x.len() != bins {
        return Err(Error::DimensionMismatch { expected: bins, found: x.len() });
    }
    let s: Complex64 = x.iter().map(|&xj| Complex64::from_polar(1.0, xj)).sum();
    Ok((Complex64::new(1.0, 0.0) + s) / l as f64)
}

fn max_abs(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Whether `|f(x)| <= exp(-|x|^2 / (8l))` with `|x|` the max-norm. Only
/// meaningful for `|x| <= pi`.
pub fn check_f_bound(x: &[f64], l: u64) -> Result<bool> {
    let f = f_multiplier(x, l)?.norm();
    let m = max_abs(x);
    let bound = (-m * m / (8.0 * l as f64)).exp();
    Ok(f <= bound * (1.0 + 4.0 * f64::EPSILON))
}

/// `|log f(x) - q(x)|` where `q` is the quadratic approximation
/// `i(1/l) sum x_j - (1/2l)(1 - 1/l) sum x_j^2 + (1/2l^2) sum_{j != j'} x_j x_j'`.
pub fn check_f_approx(x: &[f64], l: u64) -> Result<f64> {
    let f = f_multiplier(x, l)?;
    let lf = l as f64;
    let sum: f64 = x.iter().sum();
    let sq: f64 = x.iter().map(|v| v * v).sum();
    let cross = sum * sum - sq;
    let q = Complex64::new(-(1.0 - 1.0 / lf) * sq / (2.0 * lf) + cross / (2.0 * lf * lf), sum / lf);
    Ok((f.ln() - q).norm())
}

/// `E[exp(2 pi i <X, Theta>)]` as the product over blocks of `f(x_b)`.
///
/// Pairings are reduced modulo 1 before exponentiation so that shifting
/// `Theta` by a dual-lattice vector changes the result only by rounding.
#[allow(non_snake_case)]
pub fn char_fn_X(theta: &[f64], sys: &IncidenceSystem, l: u64) -> Result<Complex64> {
    let bins = free_bins(l)?;
    let p = pairings(theta, sys, l)?;
    let mut acc = Complex64::new(1.0, 0.0);
    if bins == 0 {
        return Ok(acc);
    }
    let mut x = vec![0.0; bins];
    for chunk in p.chunks(bins) {
        for (xj, &pj) in x.iter_mut().zip(chunk) {
            *xj = 2.0 * PI * frac(pj);
        }
        acc *= f_multiplier(&x, l)?;
    }
    Ok(acc)
}

/// `exp(2 pi i <E[X], Theta> - 2 pi^2 Theta^t Sigma Theta)`.
pub fn gaussian_char(theta: &[f64], m: &MomentData) -> Result<Complex64> {
    let q = m.quadratic_form(theta)?;
    let mean: f64 = m
        .mean_x
        .iter()
        .zip(theta)
        .map(|(e, t)| num_traits::ToPrimitive::to_f64(e).unwrap_or(f64::NAN) * t)
        .sum();
    Ok(Complex64::from_polar((-2.0 * PI * PI * q).exp(), 2.0 * PI * frac(mean)))
}

/// The four norms of `Theta` induced by the system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct NormReport {
    #[serde(with = "repr::sig15")]
    pub ii_inf: f64,
    #[serde(with = "repr::sig15")]
    pub ii_2: f64,
    #[serde(with = "repr::sig15")]
    pub iii_inf: f64,
    #[serde(with = "repr::sig15")]
    pub iii_2: f64,
}

/// Max-over-bins of the sup and quadratic-mean pairings, with and without
/// reduction modulo 1. `ii_2` is the R-norm.
pub fn norms(theta: &[f64], sys: &IncidenceSystem, l: u64) -> Result<NormReport> {
    let bins = free_bins(l)?;
    let p = pairings(theta, sys, l)?;
    let nb = sys.rows() as f64;
    let mut out = NormReport { ii_inf: 0.0, ii_2: 0.0, iii_inf: 0.0, iii_2: 0.0 };
    for j in 0..bins {
        let (mut sup, mut sq, mut fsup, mut fsq) = (0.0f64, 0.0, 0.0f64, 0.0);
        for b in 0..sys.rows() {
            let v = p[b * bins + j];
            let r = frac(v);
            sup = sup.max(v.abs());
            sq += v * v;
            fsup = fsup.max(r.abs());
            fsq += r * r;
        }
        out.ii_inf = out.ii_inf.max(sup);
        out.ii_2 = out.ii_2.max((sq / nb).sqrt());
        out.iii_inf = out.iii_inf.max(fsup);
        out.iii_2 = out.iii_2.max((fsq / nb).sqrt());
    }
    Ok(out)
}

/// The R-norm of `Theta`.
pub fn r_norm(theta: &[f64], sys: &IncidenceSystem, l: u64) -> Result<f64> {
    Ok(norms(theta, sys, l)?.ii_2)
}
