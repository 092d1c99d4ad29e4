//! Closed-form feasibility and outage bounds for randomized network coding,
//! together with the capacity/reliability tradeoff quantities.
//!
//! Everything here is pure arithmetic on the parameters (D, zeta, eta, u)
//! extracted from a network; probabilities are computed in the log domain so
//! regressions on outage values near 1e-9 stay accurate. Bit widths are not
//! limited to the simulable range, so asymptotic curves can be evaluated.

use thiserror::Error;

use crate::netgraph::GridSpec;
use crate::rnc::Variant;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundError {
    #[error("field size 2^{u} must exceed {required}")]
    FieldTooSmall { u: u8, required: u64 },
    #[error("per-variable degree {m} must be in 1..=total ({total}) and below 2^{u}")]
    DegreeTooHigh { m: u64, total: u64, u: u8 },
    #[error("limited-scheme bound needs zeta ({zeta}) to divide eta ({eta})")]
    DivisibilityViolated { zeta: u64, eta: u64 },
    #[error("need at least two positive outage points, got {0}")]
    InsufficientData(usize),
    #[error("reference series has zero slope")]
    DegenerateSlope,
    #[error("hyperedge count {j} outside 1..={n}")]
    BadGroupCount { j: u32, n: usize },
    #[error("invalid reduced-rate parameters: {0}")]
    BadReducedInputs(String),
    #[error("bit width {0} outside 1..=63")]
    BadWidth(u8),
}

/// A probability held as ln(p); exposes both the plain value and log2(p).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundValue {
    ln_p: f64,
}

impl BoundValue {
    fn from_ln(ln_p: f64) -> Self {
        BoundValue { ln_p }
    }

    pub fn p(&self) -> f64 {
        self.ln_p.exp()
    }

    pub fn log2(&self) -> f64 {
        self.ln_p / std::f64::consts::LN_2
    }

    /// 1 - p without cancellation near p = 1.
    pub fn complement(&self) -> BoundValue {
        BoundValue::from_ln((-self.ln_p.exp_m1()).ln())
    }
}

fn pow2(u: u8) -> Result<f64, BoundError> {
    if u == 0 || u > 63 {
        return Err(BoundError::BadWidth(u));
    }
    Ok((1u64 << u) as f64)
}

/// ln((1 - numer/2^u)^exponent)
fn ln_pow_one_minus(numer: f64, u: u8, exponent: f64) -> Result<f64, BoundError> {
    let q = pow2(u)?;
    Ok(exponent * (-numer / q).ln_1p())
}

/// Parameters of the feasibility lower bound: sink count D, the largest
/// per-node outgoing-slot count zeta, the coded-edge count eta, the field
/// bit width, and whether every coding node's slot count divides eta.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundInputs {
    pub sinks: u32,
    pub zeta: u32,
    pub eta: u64,
    pub u: u8,
    pub divisible: bool,
}

impl BoundInputs {
    pub fn new(sinks: u32, zeta: u32, eta: u64, u: u8, divisible: bool) -> Result<Self, BoundError> {
        if u == 0 || u > 63 {
            return Err(BoundError::BadWidth(u));
        }
        let required = u64::from(sinks) * u64::from(zeta);
        if sinks == 0 || zeta == 0 || (1u64 << u) <= required {
            return Err(BoundError::FieldTooSmall { u, required });
        }
        Ok(BoundInputs { sinks, zeta, eta, u, divisible })
    }
}

/// Lower bound on the probability that every sink decodes all source
/// processes.
///
/// Divisible case: (1 - D*zeta/2^u)^(eta/zeta). Otherwise the infimum over
/// integer slot counts z in [1, zeta] of (1 - D*z/2^u)^ceil(eta/z); the
/// ceiling breaks strict monotonicity, so the infimum is taken explicitly.
pub fn feasibility_lower_bound(b: &BoundInputs) -> Result<BoundValue, BoundError> {
    let required = u64::from(b.sinks) * u64::from(b.zeta);
    if (1u64 << b.u) <= required {
        return Err(BoundError::FieldTooSmall { u: b.u, required });
    }
    if b.eta == 0 {
        return Ok(BoundValue::from_ln(0.0));
    }
    let d = f64::from(b.sinks);
    if b.divisible {
        let exponent = b.eta as f64 / f64::from(b.zeta);
        let ln = ln_pow_one_minus(d * f64::from(b.zeta), b.u, exponent)?;
        Ok(BoundValue::from_ln(ln))
    } else {
        let mut best = f64::INFINITY;
        for z in 1..=b.zeta {
            let exponent = b.eta.div_ceil(u64::from(z)) as f64;
            let ln = ln_pow_one_minus(d * f64::from(z), b.u, exponent)?;
            best = best.min(ln);
        }
        Ok(BoundValue::from_ln(best))
    }
}

/// Upper bound on the probability that a polynomial of total degree at most
/// `total` whose variables each appear with degree at most `m` evaluates to
/// zero under uniform assignments: 1 - (1 - m/2^u)^ceil(total/m).
pub fn polynomial_zero_upper_bound(total: u64, m: u64, u: u8) -> Result<BoundValue, BoundError> {
    let q = pow2(u)?;
    if m == 0 || m > total || (m as f64) >= q {
        return Err(BoundError::DegreeTooHigh { m, total, u });
    }
    let exponent = total.div_ceil(m) as f64;
    let ln_keep = ln_pow_one_minus(m as f64, u, exponent)?;
    Ok(BoundValue::from_ln((-ln_keep.exp_m1()).ln()))
}

/// Feasibility lower bound for the off-axis grid sink when each coding node
/// permutes its coefficient vector across J broadcast groups:
/// (1 - J/2^u)^ceil(n(sum nu - 2)/J). J = n is the limited scheme, J = 1 the
/// broadcast (and exhaustive) scheme.
pub fn grid_lower_bound(spec: &GridSpec, u: u8, j: u32) -> Result<BoundValue, BoundError> {
    if j == 0 || j as usize > spec.n {
        return Err(BoundError::BadGroupCount { j, n: spec.n });
    }
    let inputs = BoundInputs::new(1, j, spec.eta(), u, spec.eta() % u64::from(j) == 0)?;
    feasibility_lower_bound(&inputs)
}

/// Parameters of the reduced-rate (capacity/reliability tradeoff) bounds:
/// full rate `r` vs reduced rate `q`, with coded-edge counts and slot counts
/// for the full network and for a reduced network of max-flow `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReducedInputs {
    pub r: u32,
    pub q: u32,
    pub eta_r: u64,
    pub zeta_r: u32,
    pub eta_q: u64,
    pub zeta_q: u32,
}

impl ReducedInputs {
    pub fn new(
        r: u32,
        q: u32,
        eta_r: u64,
        zeta_r: u32,
        eta_q: u64,
        zeta_q: u32,
    ) -> Result<Self, BoundError> {
        if q <= 1 || q >= r {
            return Err(BoundError::BadReducedInputs(format!(
                "reduced rate {q} must satisfy 1 < q < r = {r}"
            )));
        }
        if zeta_r == 0 || zeta_q == 0 {
            return Err(BoundError::BadReducedInputs("zeta must be positive".into()));
        }
        Ok(ReducedInputs { r, q, eta_r, zeta_r, eta_q, zeta_q })
    }

    /// Number of distinct cut-edge deletions, C(r, q).
    pub fn gamma(&self) -> u64 {
        binomial(u64::from(self.r), u64::from(self.q))
    }
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
    }
    acc as u64
}

/// Upper bound on the probability that a sink fails to recover all q
/// independent processes when the source transmits r expanded processes:
/// single sink (1 - (1 - zeta_q/2^u)^(eta_q/zeta_q))^C(r,q), with zeta_q = 1
/// for the exhaustive scheme. Multiple sinks combine by the union bound
/// D * P, capped at 1.
pub fn reduced_outage_upper_bound(
    ri: &ReducedInputs,
    u: u8,
    variant: Variant,
    sinks: u32,
) -> Result<BoundValue, BoundError> {
    let zeta_q = match variant {
        Variant::Exhaustive => 1,
        Variant::Limited | Variant::Broadcast => ri.zeta_q,
    };
    if variant != Variant::Exhaustive && ri.eta_q % u64::from(zeta_q) != 0 {
        return Err(BoundError::DivisibilityViolated { zeta: u64::from(zeta_q), eta: ri.eta_q });
    }
    let q = pow2(u)?;
    if f64::from(zeta_q) >= q {
        return Err(BoundError::FieldTooSmall { u, required: u64::from(zeta_q) });
    }
    let gamma = ri.gamma() as f64;
    let exponent = ri.eta_q as f64 / f64::from(zeta_q);
    let ln_keep = ln_pow_one_minus(f64::from(zeta_q), u, exponent)?;
    let single_ln = gamma * (-ln_keep.exp_m1()).ln();
    let total_ln = (f64::from(sinks).ln() + single_ln).min(0.0);
    Ok(BoundValue::from_ln(total_ln))
}

/// Asymptotic reliability gain of transmitting q instead of r processes:
/// (eta_q/eta_r) * C(r,q) for the exhaustive scheme, scaled by zeta_r/zeta_q
/// for the limited and broadcast schemes.
pub fn reliability_gain(ri: &ReducedInputs, variant: Variant) -> f64 {
    let gamma = ri.gamma() as f64;
    let ratio = ri.eta_q as f64 / ri.eta_r as f64;
    match variant {
        Variant::Exhaustive => ratio * gamma,
        Variant::Limited | Variant::Broadcast => {
            ratio * f64::from(ri.zeta_r) / f64::from(ri.zeta_q) * gamma
        }
    }
}

/// Measured reliability gain: the ratio of least-squares slopes of
/// log2(outage) against u, each fitted over the largest-u `window` points
/// with positive outage.
pub fn empirical_gain(
    full: &[(f64, f64)],
    reduced: &[(f64, f64)],
    window: usize,
) -> Result<f64, BoundError> {
    let slope_full = tail_slope(full, window)?;
    let slope_reduced = tail_slope(reduced, window)?;
    if slope_full == 0.0 {
        return Err(BoundError::DegenerateSlope);
    }
    Ok(slope_reduced / slope_full)
}

fn tail_slope(series: &[(f64, f64)], window: usize) -> Result<f64, BoundError> {
    let mut points: Vec<(f64, f64)> = series
        .iter()
        .filter(|(u, p)| p.is_finite() && *p > 0.0 && u.is_finite())
        .map(|&(u, p)| (u, p.log2()))
        .collect();
    points.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    if points.len() < 2 {
        return Err(BoundError::InsufficientData(points.len()));
    }
    let start = points.len().saturating_sub(window.max(2));
    Ok(least_squares_slope(&points[start..]))
}

/// Slope of the least-squares line through (x, y) points.
pub fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for &(x, y) in points {
        num += (x - mean_x) * (y - mean_y);
        den += (x - mean_x) * (x - mean_x);
    }
    num / den
}
