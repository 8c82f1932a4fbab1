use num_bigint::BigUint;
use serde::Serialize;

use super::moments::{covariance, log_gaussian_density_at_mean};
use crate::error::{Error, Result};
use crate::lattice::{check_main_divisibility_in, lattice_of, product_lattice_determinant};
use crate::repr;
use crate::setsys::{c3_design_bound, IncidenceSystem};

/// The unspecified absolute constants, all defaulting to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Constants {
    /// Large-set existence threshold.
    pub main: f64,
    /// Single-design threshold.
    pub klp: f64,
    /// Norm comparison constant in `Mconst`.
    pub norm: f64,
    /// Local-ball constant: used in I1, in alpha1 and in the default epsilon.
    pub i1: f64,
    /// Sample-size requirement for `|alpha1|, |alpha3| <= 1/4`.
    pub c4: f64,
    /// Sample-size requirement for `alpha2 <= f_Y / 4`.
    pub c5: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Self { main: 1.0, klp: 1.0, norm: 1.0, i1: 1.0, c4: 1.0, c5: 1.0 }
    }
}

impl Constants {
    pub fn validate(&self) -> Result<()> {
        let all = [self.main, self.klp, self.norm, self.i1, self.c4, self.c5];
        if all.iter().all(|c| c.is_finite() && *c > 0.0) {
            Ok(())
        } else {
            Err(Error::params("all constants must be positive and finite"))
        }
    }
}

/// `Mconst = C_M (|A| ln(2 c2 |A|))^(3/2)`.
#[allow(non_snake_case)]
pub fn norm_constant_M(dim_a: usize, c2: f64, c_m: f64) -> f64 {
    let a = dim_a as f64;
    c_m * (a * (2.0 * c2 * a).ln()).powf(1.5)
}

/// Scalar inputs shared by the I-bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundInputs {
    pub blocks: f64,
    pub dim_a: usize,
    pub l: u64,
    pub c3: f64,
    pub mconst: f64,
    /// `ln f_Y(E[X])`.
    pub log_f_y: f64,
    /// `ln det(L(Phi))`.
    pub log_det: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub lemma: &'static str,
    pub condition: String,
}

/// Upper bounds on the three error integrals, with natural logs alongside
/// since the values themselves often underflow.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct IBounds {
    #[serde(with = "repr::sig15")]
    pub i1: f64,
    #[serde(with = "repr::sig15")]
    pub i2: f64,
    #[serde(with = "repr::sig15")]
    pub i3: f64,
    #[serde(with = "repr::sig15")]
    pub log_i1: f64,
    #[serde(with = "repr::sig15")]
    pub log_i2: f64,
    #[serde(with = "repr::sig15")]
    pub log_i3: f64,
    pub violations: Vec<Violation>,
}

/// I1, I2 and I3 bounds at `eps`. Violated lemma preconditions are listed
/// in the result rather than treated as errors; see [`bounds_I_strict`].
#[allow(non_snake_case)]
pub fn bounds_I(eps: f64, inp: &BoundInputs, c: &Constants) -> Result<IBounds> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::params("eps must be positive"));
    }
    let l = inp.l as f64;
    let (b, a, m) = (inp.blocks, inp.dim_a as f64, inp.mconst);
    let mut violations = Vec::new();

    let i1_cap = (c.i1 * m * b).powf(-1.0 / 3.0);
    if eps > i1_cap {
        violations.push(Violation {
            lemma: "I1 bound",
            condition: format!("eps = {eps:e} exceeds (C M |B|)^(-1/3) = {i1_cap:e}"),
        });
    }
    if inp.c3 < 2.0 {
        violations.push(Violation { lemma: "I2 bound", condition: format!("c3 = {} < 2", inp.c3) });
    }
    let i2_cap = 1.0 / (inp.c3 * m);
    if eps > i2_cap {
        violations.push(Violation {
            lemma: "I2 bound",
            condition: format!("eps = {eps:e} exceeds 1/(c3 M) = {i2_cap:e}"),
        });
    }

    let log_i1 = (c.i1 * l.powi(3) * m * a.powf(1.5) / b.sqrt()).ln() + inp.log_f_y;
    let log_i2 = -inp.log_det - b * eps * eps / (l * l);
    let log_i3 = if inp.l <= 1 {
        f64::NEG_INFINITY
    } else {
        inp.log_f_y + (l - 1.0).ln() + a / 2.0 * std::f64::consts::LN_2
            - std::f64::consts::PI.powi(2) * b * eps * eps / (l * l)
    };
    Ok(IBounds {
        i1: log_i1.exp(),
        i2: log_i2.exp(),
        i3: log_i3.exp(),
        log_i1,
        log_i2,
        log_i3,
        violations,
    })
}

/// [`bounds_I`], failing on the first violated precondition.
#[allow(non_snake_case)]
pub fn bounds_I_strict(eps: f64, inp: &BoundInputs, c: &Constants) -> Result<IBounds> {
    let r = bounds_I(eps, inp, c)?;
    match r.violations.first() {
        Some(v) => Err(Error::PreconditionViolated { lemma: v.lemma, condition: v.condition.clone() }),
        None => Ok(r),
    }
}

/// `lhs >= rhs`, compared in log space.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ThresholdVerdict {
    #[serde(with = "repr::sig15")]
    pub lhs: f64,
    #[serde(with = "repr::sig15")]
    pub rhs: f64,
    #[serde(with = "repr::sig15")]
    pub log_rhs: f64,
    pub holds: bool,
}

fn verdict(lhs: f64, log_rhs: f64) -> ThresholdVerdict {
    let holds = lhs > 0.0 && lhs.ln() >= log_rhs || log_rhs == f64::NEG_INFINITY;
    ThresholdVerdict { lhs, rhs: log_rhs.exp(), log_rhs, holds }
}

/// `|B| >= C dim^6 l^6 c3^3 log^3(dim c2 c3 l)`: sufficient for a large set.
pub fn largeset_threshold(blocks: f64, dim: usize, l: u64, c2: f64, c3: f64, c: f64) -> ThresholdVerdict {
    let (d, lf) = (dim as f64, l as f64);
    let inner = (d * c2 * c3 * lf).ln();
    let log_rhs = c.ln() + 6.0 * d.ln() + 6.0 * lf.ln() + 3.0 * c3.ln() + 3.0 * inner.ln();
    verdict(blocks, if inner > 0.0 { log_rhs } else { f64::NEG_INFINITY })
}

/// `min(N, |B| - N) >= C c2 c3^2 dim^6 log(2 c3 dim)^6` with `N = |B| / l`:
/// sufficient for a single design of size N.
pub fn design_threshold(blocks: f64, dim: usize, l: u64, c2: f64, c3: f64, c: f64) -> ThresholdVerdict {
    let d = dim as f64;
    let n = blocks / l as f64;
    let lhs = n.min(blocks - n);
    let inner = (2.0 * c3 * d).ln();
    let log_rhs = c.ln() + c2.ln() + 2.0 * c3.ln() + 6.0 * d.ln() + 6.0 * inner.ln();
    verdict(lhs, if inner > 0.0 { log_rhs } else { f64::NEG_INFINITY })
}

/// Inputs for [`estimate_success_probability`] beyond the system itself.
#[derive(Debug, Clone, Default)]
pub struct EstimateOptions {
    /// Required for systems without a design shape.
    pub c3: Option<BigUint>,
    /// Defaults to the largest absolute entry of the system.
    pub c2: Option<u64>,
    /// Defaults to `(C1 M |B|)^(-1/3)`, clamped to `1/(c3 M)`.
    pub eps: Option<f64>,
    pub constants: Constants,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ThresholdReport {
    /// The large-set threshold on |B|.
    pub large_set: ThresholdVerdict,
    /// The single-design threshold on min(N, |B| - N).
    pub single_design: ThresholdVerdict,
    /// `|B| >= C4 |A|^3 M^2 l^6 c3^3`.
    pub alpha_small: ThresholdVerdict,
    /// `|B| >= C5 |A|^3 M^2 l^6 log(|A| M l)`.
    pub alpha2_small: ThresholdVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EstimateReport {
    pub blocks: usize,
    pub dim_a: usize,
    pub l: u64,
    pub c2: u64,
    #[serde(with = "repr::big")]
    pub c3: BigUint,
    pub c3_source: &'static str,
    pub constants: Constants,
    #[serde(with = "repr::sig15")]
    pub log_gaussian_density_at_mean: f64,
    #[serde(with = "repr::sig15")]
    pub gaussian_density_at_mean: f64,
    #[serde(with = "repr::big")]
    pub det_l_phi_product: BigUint,
    #[serde(with = "repr::sig15")]
    pub log_point_estimate: f64,
    #[serde(with = "repr::sig15")]
    pub point_estimate: f64,
    #[serde(with = "repr::sig15")]
    pub eps: f64,
    pub eps_source: &'static str,
    pub eps_clamped: bool,
    #[serde(with = "repr::sig15")]
    pub mconst: f64,
    pub bounds: IBounds,
    #[serde(with = "repr::sig15")]
    pub alpha1: f64,
    #[serde(with = "repr::sig15")]
    pub alpha2: f64,
    #[serde(with = "repr::sig15")]
    pub alpha3: f64,
    #[serde(with = "repr::sig15_opt")]
    pub lower_bound: Option<f64>,
    pub thresholds: ThresholdReport,
}

/// Gaussian point estimate `det(L(Phi)) f_Y(E[X])` for `Pr[X = E[X]]`, its
/// error diagnostics, and the threshold verdicts at the configured constants.
pub fn estimate_success_probability(
    sys: &IncidenceSystem,
    l: u64,
    opts: &EstimateOptions,
) -> Result<EstimateReport> {
    let c = opts.constants;
    c.validate()?;
    let lattice = lattice_of(sys);
    if !check_main_divisibility_in(sys, &lattice, l)? {
        return Err(Error::NotApplicable(format!(
            "(1/{l}) sum phi(b) is not in the lattice spanned by the rows"
        )));
    }
    let moments = covariance(sys, l)?;
    let log_f_y = log_gaussian_density_at_mean(&moments)?;
    let det = product_lattice_determinant(&lattice, l)?;
    let det = det.magnitude().clone();
    let log_det = repr::ln_biguint(&det);

    let (c3, c3_source) = match (&opts.c3, sys.shape()) {
        (Some(v), _) => (v.clone(), "user"),
        (None, Some(s)) => (c3_design_bound(s.n, s.t)?, "designBound"),
        (None, None) => {
            return Err(Error::params("c3 must be supplied for a general incidence matrix"))
        }
    };
    let c3f = crate::setsys::c3_as_f64(&c3);
    let c2 = opts.c2.unwrap_or_else(|| sys.max_abs_entry());
    let dim_a = sys.cols();
    let blocks = sys.rows() as f64;
    let mconst = norm_constant_M(dim_a, c2 as f64, c.norm);

    let default_eps = (c.i1 * mconst * blocks).powf(-1.0 / 3.0);
    let clamp = 1.0 / (c3f * mconst);
    let (eps, eps_source, eps_clamped) = match opts.eps {
        Some(e) => (e, "user", false),
        None if default_eps > clamp => (clamp, "default", true),
        None => (default_eps, "default", false),
    };

    let inp = BoundInputs { blocks, dim_a, l, c3: c3f, mconst, log_f_y, log_det };
    let bounds = bounds_I(eps, &inp, &c)?;

    let lf = l as f64;
    let a = dim_a as f64;
    let alpha1 = c.i1 * lf.powi(3) * mconst * a.powf(1.5) / blocks.sqrt();
    let alpha2 = (-blocks * eps * eps / (lf * lf)).exp();
    let alpha3 = if l <= 1 {
        0.0
    } else {
        ((lf - 1.0).ln() + a / 2.0 * std::f64::consts::LN_2
            - std::f64::consts::PI.powi(2) * blocks * eps * eps / (lf * lf))
            .exp()
    };
    let f_y = log_f_y.exp();
    let log_point = log_det + log_f_y;
    let conditions = alpha1 <= 0.25 && alpha3 <= 0.25 && alpha2 <= 0.25 * f_y && bounds.violations.is_empty();
    let lower_bound = conditions.then(|| 0.25 * log_point.exp());

    let log_m = mconst.ln();
    let base = 3.0 * a.ln() + 2.0 * log_m + 6.0 * lf.ln();
    let inner = (a * mconst * lf).ln();
    let thresholds = ThresholdReport {
        large_set: largeset_threshold(blocks, dim_a, l, c2 as f64, c3f, c.main),
        single_design: design_threshold(blocks, dim_a, l, c2 as f64, c3f, c.klp),
        alpha_small: verdict(blocks, c.c4.ln() + base + 3.0 * c3f.ln()),
        alpha2_small: verdict(
            blocks,
            if inner > 0.0 { c.c5.ln() + base + inner.ln() } else { f64::NEG_INFINITY },
        ),
    };

    Ok(EstimateReport {
        blocks: sys.rows(),
        dim_a,
        l,
        c2,
        c3,
        c3_source,
        constants: c,
        log_gaussian_density_at_mean: log_f_y,
        gaussian_density_at_mean: f_y,
        det_l_phi_product: det,
        log_point_estimate: log_point,
        point_estimate: log_point.exp(),
        eps,
        eps_source,
        eps_clamped,
        mconst,
        bounds,
        alpha1,
        alpha2,
        alpha3,
        lower_bound,
        thresholds,
    })
}
