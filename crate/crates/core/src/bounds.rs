//! Closed-form evaluators and inverters for the deviation bounds.
//!
//! Two families of bounds control the deviation of the cross-validated
//! tail-risk estimate from the true risk of the full-sample rule:
//!
//! - an **exponential** bound whose main term involves both the validation
//!   and training sizes, `M√vc(1/√(n_V α) + 4/√(n_T α)) + 5/(n_T α)`, plus
//!   Bernstein-style log terms, holding with probability `1 − 15δ`;
//! - a **polynomial** bound whose main term involves the training size
//!   only, `9M√vc/√(n_T α) + 9/(n_T α)`, plus a term linear in `1/δ`,
//!   holding with probability `1 − 18δ` — the useful one for leave-p-out,
//!   where the validation size stays constant.
//!
//! `M` and `M5` are universal constants whose existence is proved but whose
//! values are not; they are explicit inputs here, defaulting to 1, and are
//! echoed into every report rather than silently baked in.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Everything a bound evaluation needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs<F> {
    pub n: usize,
    pub n_t: usize,
    pub n_v: usize,
    pub alpha: F,
    /// Complexity proxy for the hypothesis class (`vc > 0`).
    pub vc: F,
    /// Universal-constant stand-in for the main terms (default 1).
    pub m_const: F,
    /// Universal-constant stand-in for the polynomial remainder (default 1).
    pub m5_const: F,
    pub delta: F,
}

impl<F: Real> BoundInputs<F> {
    pub fn new(n: usize, n_t: usize, n_v: usize, alpha: F, vc: F, delta: F) -> Result<Self> {
        let inputs = BoundInputs {
            n,
            n_t,
            n_v,
            alpha,
            vc,
            m_const: F::one(),
            m5_const: F::one(),
            delta,
        };
        inputs.validate()?;
        Ok(inputs)
    }

    pub fn with_constants(mut self, m_const: F, m5_const: F) -> Result<Self> {
        self.m_const = m_const;
        self.m5_const = m5_const;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n_t == 0 || self.n_v == 0 {
            return Err(Error::invalid("bound inputs need positive n, n_T, n_V"));
        }
        if self.n_t + self.n_v != self.n {
            return Err(Error::invalid(format!(
                "split sizes must satisfy n_T + n_V = n, got {} + {} != {}",
                self.n_t, self.n_v, self.n
            )));
        }
        if !(self.alpha > F::zero() && self.alpha < F::one()) {
            return Err(Error::invalid("alpha must lie in (0, 1)"));
        }
        if self.alpha * F::of_usize(self.n) < F::one() {
            return Err(Error::invalid("bound inputs need n*alpha >= 1"));
        }
        if self.vc.is_nan() || self.vc <= F::zero() {
            return Err(Error::invalid("vc proxy must be positive"));
        }
        if self.m_const.is_nan()
            || self.m_const <= F::zero()
            || self.m5_const.is_nan()
            || self.m5_const <= F::zero()
        {
            return Err(Error::invalid("constants M and M5 must be positive"));
        }
        if !(self.delta > F::zero() && self.delta <= F::one()) {
            return Err(Error::invalid("delta must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// Which bound a radius came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormulaId {
    CvExponential,
    KfoldExponential,
    CvPolynomial,
    LpoPolynomial,
}

impl FormulaId {
    pub fn as_str(self) -> &'static str {
        match self {
            FormulaId::CvExponential => "cv_exponential",
            FormulaId::KfoldExponential => "kfold_exponential",
            FormulaId::CvPolynomial => "cv_polynomial",
            FormulaId::LpoPolynomial => "lpo_polynomial",
        }
    }
}

impl std::fmt::Display for FormulaId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An evaluated deviation radius and its stated coverage.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundValue<F> {
    pub formula_id: FormulaId,
    pub radius: F,
    /// Coverage exactly as stated: `1 − 15δ` for the exponential family,
    /// `1 − 18δ` for the polynomial one. May be negative (vacuous).
    pub coverage: F,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Generic bounded-differences Bernstein tail
/// `exp(−t² / (2(σ² + D·t/3)))` for a statistic with variance proxy
/// `sigma_sq` and maximum step `d_max`.
pub fn mcdiarmid_bernstein_tail<F: Real>(sigma_sq: F, d_max: F, t: F) -> F {
    debug_assert!(t >= F::zero());
    let two = F::of(2.0);
    let three = F::of(3.0);
    (-(t * t) / (two * (sigma_sq + d_max * t / three))).exp()
}

/// Smallest `t` with [`mcdiarmid_bernstein_tail`] `≤ delta`: the positive
/// root `t = L·D/3 + sqrt((L·D/3)² + 2·L·σ²)`, `L = ln(1/δ)`.
pub fn mcdiarmid_bernstein_invert<F: Real>(sigma_sq: F, d_max: F, delta: F) -> Result<F> {
    if !(delta > F::zero() && delta <= F::one()) {
        return Err(Error::invalid("delta must lie in (0, 1]"));
    }
    let l = (F::one() / delta).ln();
    let half_lin = l * d_max / F::of(3.0);
    Ok(half_lin + (half_lin * half_lin + F::of(2.0) * l * sigma_sq).sqrt())
}

/// Tail of the averaged sup-deviation statistic around its mean:
/// `exp(−nα t² / (2(4 + t/3)))`.
pub fn bernstein_tail<F: Real>(n: usize, alpha: F, t: F) -> F {
    let na = alpha * F::of_usize(n);
    mcdiarmid_bernstein_tail(F::of(4.0) / na, F::one() / na, t)
}

/// Exact inversion of [`bernstein_tail`]:
/// `t = L/(3nα) + sqrt((L/(3nα))² + 8L/(nα))`, `L = ln(1/δ)`.
pub fn bernstein_invert<F: Real>(n: usize, alpha: F, delta: F) -> Result<F> {
    let na = alpha * F::of_usize(n);
    mcdiarmid_bernstein_invert(F::of(4.0) / na, F::one() / na, delta)
}

/// Tail envelope for the centered full-sample sup deviation,
/// `min(1, 3·bernstein_tail)`.
pub fn sup_deviation_tail<F: Real>(n: usize, alpha: F, t: F) -> F {
    (F::of(3.0) * bernstein_tail(n, alpha, t)).min(F::one())
}

/// Bound on the mean sup deviation over a sample of size `n`:
/// `B(n, α) = M√vc / √(αn)`.
pub fn mean_sup_deviation_bound<F: Real>(n: usize, alpha: F, m_const: F, vc: F) -> Result<F> {
    if vc.is_nan() || vc <= F::zero() {
        return Err(Error::invalid("vc proxy must be positive"));
    }
    Ok(m_const * vc.sqrt() / (alpha * F::of_usize(n)).sqrt())
}

/// Centering of the sup-deviation tail: `Q(n, α) = B(n, α) + 1/(nα)`.
pub fn sup_deviation_center<F: Real>(n: usize, alpha: F, m_const: F, vc: F) -> Result<F> {
    let na = alpha * F::of_usize(n);
    Ok(mean_sup_deviation_bound(n, alpha, m_const, vc)? + F::one() / na)
}

/// Main term of the exponential CV bound:
/// `M√vc (1/√(n_V α) + 4/√(n_T α)) + 5/(n_T α)`.
pub fn cv_exponential_main_term<F: Real>(
    n_t: usize,
    n_v: usize,
    alpha: F,
    m_const: F,
    vc: F,
) -> Result<F> {
    if vc.is_nan() || vc <= F::zero() {
        return Err(Error::invalid("vc proxy must be positive"));
    }
    let nta = alpha * F::of_usize(n_t);
    let nva = alpha * F::of_usize(n_v);
    Ok(m_const * vc.sqrt() * (F::one() / nva.sqrt() + F::of(4.0) / nta.sqrt()) + F::of(5.0) / nta)
}

fn exponential_log_terms<F: Real>(n: usize, alpha: F, delta: F) -> F {
    let na = alpha * F::of_usize(n);
    let l = (F::one() / delta).ln();
    F::of(20.0 / 3.0) * l / na + F::of(20.0) * (F::of(2.0) * l / na).sqrt()
}

/// Full exponential CV radius at confidence `delta`; coverage `1 − 15δ`.
pub fn cv_exponential_radius<F: Real>(inputs: &BoundInputs<F>) -> Result<BoundValue<F>> {
    inputs.validate()?;
    let main = cv_exponential_main_term(
        inputs.n_t,
        inputs.n_v,
        inputs.alpha,
        inputs.m_const,
        inputs.vc,
    )?;
    Ok(BoundValue {
        formula_id: FormulaId::CvExponential,
        radius: main + exponential_log_terms(inputs.n, inputs.alpha, inputs.delta),
        coverage: F::one() - F::of(15.0) * inputs.delta,
        note: None,
    })
}

/// Main term of the K-fold specialization:
/// `5M√(vc·K/(nα)) + 5K/((K−1)nα)` for `K ≥ 2`.
pub fn kfold_main_term<F: Real>(n: usize, k: usize, alpha: F, m_const: F, vc: F) -> Result<F> {
    if k < 2 {
        return Err(Error::invalid("K-fold bound needs K >= 2"));
    }
    if vc.is_nan() || vc <= F::zero() {
        return Err(Error::invalid("vc proxy must be positive"));
    }
    let na = alpha * F::of_usize(n);
    let kf = F::of_usize(k);
    Ok(F::of(5.0) * m_const * (vc * kf / na).sqrt() + F::of(5.0) * kf / ((kf - F::one()) * na))
}

/// Full K-fold exponential radius; `K = n/n_V` from the inputs; coverage
/// `1 − 15δ`.
pub fn kfold_radius<F: Real>(inputs: &BoundInputs<F>) -> Result<BoundValue<F>> {
    inputs.validate()?;
    if !inputs.n.is_multiple_of(inputs.n_v) {
        return Err(Error::Indivisible {
            what: "K-fold bound validation size n_V",
            divisor: inputs.n_v,
            n: inputs.n,
        });
    }
    let k = inputs.n / inputs.n_v;
    let main = kfold_main_term(inputs.n, k, inputs.alpha, inputs.m_const, inputs.vc)?;
    Ok(BoundValue {
        formula_id: FormulaId::KfoldExponential,
        radius: main + exponential_log_terms(inputs.n, inputs.alpha, inputs.delta),
        coverage: F::one() - F::of(15.0) * inputs.delta,
        note: None,
    })
}

/// Main term of the polynomial CV bound: `9M√vc/√(αn_T) + 9/(n_T α)`.
pub fn cv_polynomial_main_term<F: Real>(n_t: usize, alpha: F, m_const: F, vc: F) -> Result<F> {
    if vc.is_nan() || vc <= F::zero() {
        return Err(Error::invalid("vc proxy must be positive"));
    }
    let nta = alpha * F::of_usize(n_t);
    Ok(F::of(9.0) * m_const * vc.sqrt() / nta.sqrt() + F::of(9.0) / nta)
}

fn polynomial_remainder<F: Real>(
    n_t: usize,
    alpha: F,
    m_const: F,
    m5_const: F,
    vc: F,
    delta: F,
) -> F {
    let nta = alpha * F::of_usize(n_t);
    (F::of(5.0) * m_const * vc.sqrt() + m5_const) / (delta * nta.sqrt())
}

/// Full polynomial CV radius; the remainder is linear in `1/δ`, so the tail
/// decays polynomially. Coverage `1 − 18δ`.
pub fn cv_polynomial_radius<F: Real>(inputs: &BoundInputs<F>) -> Result<BoundValue<F>> {
    inputs.validate()?;
    let main = cv_polynomial_main_term(inputs.n_t, inputs.alpha, inputs.m_const, inputs.vc)?;
    Ok(BoundValue {
        formula_id: FormulaId::CvPolynomial,
        radius: main
            + polynomial_remainder(
                inputs.n_t,
                inputs.alpha,
                inputs.m_const,
                inputs.m5_const,
                inputs.vc,
                inputs.delta,
            ),
        coverage: F::one() - F::of(18.0) * inputs.delta,
        note: None,
    })
}

/// Main term of the leave-p-out specialization:
/// `9M√(vc/((n−p)α)) + 9/((n−p)α)`. With `p = 0` this is the generic
/// polynomial main term at `n_T = n`.
pub fn lpo_main_term<F: Real>(n: usize, p: usize, alpha: F, m_const: F, vc: F) -> Result<F> {
    if p >= n {
        return Err(Error::invalid("leave-p-out bound needs p < n"));
    }
    cv_polynomial_main_term(n - p, alpha, m_const, vc)
}

/// Full leave-p-out radius with `p = n_V`.
///
/// The stated coverage is `1 − 15δ` as printed for this specialization,
/// even though the general polynomial bound it derives from holds with
/// `1 − 18δ`; both levels are surfaced rather than silently reconciled.
pub fn lpo_radius<F: Real>(inputs: &BoundInputs<F>) -> Result<BoundValue<F>> {
    inputs.validate()?;
    let p = inputs.n_v;
    let main = lpo_main_term(inputs.n, p, inputs.alpha, inputs.m_const, inputs.vc)?;
    Ok(BoundValue {
        formula_id: FormulaId::LpoPolynomial,
        radius: main
            + polynomial_remainder(
                inputs.n - p,
                inputs.alpha,
                inputs.m_const,
                inputs.m5_const,
                inputs.vc,
                inputs.delta,
            ),
        coverage: F::one() - F::of(15.0) * inputs.delta,
        note: Some(
            "stated coverage 1-15*delta; the parent polynomial bound holds with 1-18*delta"
                .to_string(),
        ),
    })
}

/// Bound on the mean of the averaged sup-deviation statistic Z:
/// `M√vc / √(α n_V)`.
pub fn mean_z_bound<F: Real>(n_v: usize, alpha: F, m_const: F, vc: F) -> Result<F> {
    mean_sup_deviation_bound(n_v, alpha, m_const, vc)
}

/// Composed tail statement for Z: `P(Z − center ≥ t) ≤ tail`, with
/// `center = M√vc/√(αn_V)` and `tail = bernstein_tail(n, α, t)`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ZTailBound<F> {
    pub center: F,
    pub tail: F,
}

pub fn z_tail_bound<F: Real>(
    n: usize,
    n_v: usize,
    alpha: F,
    m_const: F,
    vc: F,
    t: F,
) -> Result<ZTailBound<F>> {
    Ok(ZTailBound {
        center: mean_z_bound(n_v, alpha, m_const, vc)?,
        tail: bernstein_tail(n, alpha, t),
    })
}
