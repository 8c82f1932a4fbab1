use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{IntMat, RatMat};
use crate::repr;
use crate::setsys::IncidenceSystem;

/// Number of bins carrying a coordinate block, `l - 1`.
pub(crate) fn free_bins(l: u64) -> Result<usize> {
    if l == 0 {
        return Err(Error::params("l must be at least 1"));
    }
    usize::try_from(l - 1).map_err(|_| Error::params("l too large"))
}

/// Exact first and second moments of X.
///
/// Coordinates of X are laid out block-major: index `j * |A| + a` holds
/// coordinate `a` of bin `j`. In this layout the covariance is the
/// Kronecker product `Mfac (x) R`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MomentData {
    pub l: u64,
    pub dim_a: usize,
    #[serde(with = "repr::rat_vec")]
    pub mean_x: Vec<BigRational>,
    #[serde(rename = "R", with = "repr::big_mat")]
    pub r: Vec<Vec<BigInt>>,
    #[serde(with = "repr::rat_mat")]
    pub m_fac: Vec<Vec<BigRational>>,
    #[serde(with = "repr::big")]
    pub det_r: BigInt,
}

impl MomentData {
    /// Dimension of X, `(l - 1) |A|`.
    pub fn dim(&self) -> usize {
        self.m_fac.len() * self.dim_a
    }

    pub fn sigma_entry(&self, i: usize, j: usize) -> BigRational {
        let (bi, ai) = (i / self.dim_a, i % self.dim_a);
        let (bj, aj) = (j / self.dim_a, j % self.dim_a);
        &self.m_fac[bi][bj] * BigRational::from_integer(self.r[ai][aj].clone())
    }

    /// The full covariance matrix.
    pub fn sigma(&self) -> RatMat {
        let d = self.dim();
        let rows = (0..d).map(|i| (0..d).map(|j| self.sigma_entry(i, j)).collect()).collect();
        RatMat::from_rows(rows, d).expect("square by construction")
    }

    /// `det(Sigma) = det(R)^(l-1) * l^(-l |A|)`, exact.
    pub fn det_sigma(&self) -> BigRational {
        let bins = self.m_fac.len();
        let num = num_traits::pow(self.det_r.clone(), bins);
        let den = if bins == 0 {
            BigInt::one()
        } else {
            num_traits::pow(BigInt::from(self.l), self.l as usize * self.dim_a)
        };
        BigRational::new(num, den)
    }

    /// `ln det(Sigma)`, from the exact factors.
    pub fn log_det_sigma(&self) -> Result<f64> {
        if !self.det_r.is_positive() {
            return Err(Error::SingularCovariance);
        }
        let bins = self.m_fac.len();
        if bins == 0 {
            return Ok(0.0);
        }
        let ln_r = repr::ln_biguint(self.det_r.magnitude());
        Ok(bins as f64 * ln_r - (self.l as f64) * (self.dim_a as f64) * (self.l as f64).ln())
    }

    /// `Theta^t Sigma Theta` in floating point.
    pub fn quadratic_form(&self, theta: &[f64]) -> Result<f64> {
        if theta.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: theta.len() });
        }
        let a = self.dim_a;
        let r: Vec<Vec<f64>> = self
            .r
            .iter()
            .map(|row| row.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect())
            .collect();
        let rtheta: Vec<Vec<f64>> = theta
            .chunks(a)
            .map(|th| (0..a).map(|i| r[i].iter().zip(th).map(|(x, y)| x * y).sum()).collect())
            .collect();
        let mut q = 0.0;
        for (j, th) in theta.chunks(a).enumerate() {
            for (jp, rt) in rtheta.iter().enumerate() {
                let m = self.m_fac[j][jp].to_f64().unwrap_or(f64::NAN);
                q += m * th.iter().zip(rt).map(|(x, y)| x * y).sum::<f64>();
            }
        }
        Ok(q)
    }
}

/// `l - 1` copies of `(1/l) sum_b phi(b)`.
pub fn mean_x(sys: &IncidenceSystem, l: u64) -> Result<Vec<BigRational>> {
    let bins = free_bins(l)?;
    let lr = BigInt::from(l);
    let block: Vec<BigRational> = sys
        .column_sums()
        .into_iter()
        .map(|s| BigRational::new(BigInt::from(s), lr.clone()))
        .collect();
    Ok(block.iter().cycle().take(bins * block.len()).cloned().collect())
}

/// Whether every coordinate of E[X] is an integer.
pub fn mean_is_integral(sys: &IncidenceSystem, l: u64) -> bool {
    l <= 1 || sys.column_sums().iter().all(|&s| s % i128::from(l) == 0)
}

/// `R[a][a'] = sum_b phi(b)_a phi(b)_a'`.
pub fn gram_matrix(sys: &IncidenceSystem) -> Vec<Vec<BigInt>> {
    let a = sys.cols();
    let mut r = vec![vec![0i128; a]; a];
    for b in 0..sys.rows() {
        let supp = sys.row_support(b);
        for &(i, x) in &supp {
            for &(j, y) in &supp {
                r[i][j] += i128::from(x) * i128::from(y);
            }
        }
    }
    r.into_iter().map(|row| row.into_iter().map(BigInt::from).collect()).collect()
}

/// The `(l-1) x (l-1)` factor with `(l-1)/l^2` on the diagonal and `-1/l^2` elsewhere.
pub fn m_factor(l: u64) -> Result<Vec<Vec<BigRational>>> {
    let bins = free_bins(l)?;
    let l2 = BigInt::from(l) * BigInt::from(l);
    let diag = BigRational::new(BigInt::from(l - 1), l2.clone());
    let off = BigRational::new(-BigInt::one(), l2);
    Ok((0..bins)
        .map(|i| (0..bins).map(|j| if i == j { diag.clone() } else { off.clone() }).collect())
        .collect())
}

/// Mean, R, the bin factor and det(R) for the random partition into `l` bins.
pub fn covariance(sys: &IncidenceSystem, l: u64) -> Result<MomentData> {
    let mean = mean_x(sys, l)?;
    let r = gram_matrix(sys);
    let m_fac = m_factor(l)?;
    let rm = IntMat::from_rows(r.clone(), sys.cols())?;
    let det_r = rm.determinant()?;
    Ok(MomentData { l, dim_a: sys.cols(), mean_x: mean, r, m_fac, det_r })
}

/// `ln f_Y(E[X]) = -(d/2) ln(2 pi) - (1/2) ln det(Sigma)` for a Gaussian of
/// dimension `d` with the given exact covariance determinant.
pub fn log_gaussian_density_from_det(d: usize, det_sigma: &BigRational) -> Result<f64> {
    if !det_sigma.is_positive() {
        return Err(Error::SingularCovariance);
    }
    Ok(-(d as f64) / 2.0 * (2.0 * std::f64::consts::PI).ln() - 0.5 * repr::ln_rational(det_sigma))
}

/// `ln f_Y(E[X])` for the Gaussian matching the moments of X.
pub fn log_gaussian_density_at_mean(m: &MomentData) -> Result<f64> {
    let d = m.dim();
    Ok(-(d as f64) / 2.0 * (2.0 * std::f64::consts::PI).ln() - 0.5 * m.log_det_sigma()?)
}
