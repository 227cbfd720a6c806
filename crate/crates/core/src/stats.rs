//! Normal-distribution primitives and binomial confidence-interval half-widths.
//!
//! Everything here is a pure function of its inputs, safe to call from any
//! number of threads. All arithmetic is 64-bit binary floating point.

use crate::error::Error;
use crate::Result;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;

/// Two-sided confidence level, e.g. 0.95.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceSpec {
    level: f64,
}

impl ConfidenceSpec {
    /// Validates `0 < level < 1`.
    pub fn new(level: f64) -> Result<Self> {
        if !(level > 0.0 && level < 1.0) {
            return Err(Error::invalid(format!(
                "confidence level must lie in (0,1), got {level}"
            )));
        }
        Ok(Self { level })
    }

    pub fn level(&self) -> f64 {
        self.level
    }

    /// The standard-normal multiplier z_(1-alpha/2) for this level.
    pub fn z_score(&self) -> ZScore {
        // (1+level)/2 is in (0.5, 1), so the quantile exists and is positive.
        let value =
            normal_quantile((1.0 + self.level) / 2.0).expect("(1+level)/2 is a valid probability");
        ZScore { value }
    }
}

impl Serialize for ConfidenceSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.level)
    }
}

impl<'de> Deserialize<'de> for ConfidenceSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let level = f64::deserialize(d)?;
        ConfidenceSpec::new(level).map_err(D::Error::custom)
    }
}

/// Upper-tail standard normal quantile z_(1-alpha/2); positive for any
/// two-sided level in (0,1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZScore {
    value: f64,
}

impl ZScore {
    pub fn value(&self) -> f64 {
        self.value
    }
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal CDF, absolute error below 1e-12 on all finite inputs.
///
/// Series expansion of erf near zero, Lentz continued fraction for erfc in
/// the tails; the tail branch keeps full *relative* precision, which the
/// quantile refinement below depends on.
pub fn normal_cdf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        0.5 * erfc_pos(-x / SQRT_2)
    } else {
        1.0 - 0.5 * erfc_pos(x / SQRT_2)
    }
}

/// erfc(z) for z >= 0.
fn erfc_pos(z: f64) -> f64 {
    debug_assert!(z >= 0.0);
    if z < 2.5 {
        1.0 - erf_series(z)
    } else {
        erfc_cf(z)
    }
}

/// Confluent series erf(z) = (2z/sqrt(pi)) e^(-z^2) sum_n (2z^2)^n / (2n+1)!!.
/// All terms positive, so no cancellation; used for z in [0, 2.5).
fn erf_series(z: f64) -> f64 {
    let zz2 = 2.0 * z * z;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut odd = 1.0;
    loop {
        odd += 2.0;
        term *= zz2 / odd;
        sum += term;
        if term < sum * 1e-18 {
            break;
        }
    }
    2.0 * FRAC_1_SQRT_PI * z * (-z * z).exp() * sum
}

/// Continued fraction erfc(z) = e^(-z^2)/sqrt(pi) / (z + (1/2)/(z + 1/(z + (3/2)/(z + ...)))),
/// evaluated by the modified Lentz algorithm; used for z >= 2.5.
fn erfc_cf(z: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = z;
    let mut c = f;
    let mut d = 0.0;
    for k in 1..200 {
        let a = k as f64 / 2.0;
        d = z + a * d;
        if d == 0.0 {
            d = TINY;
        }
        c = z + a / c;
        if c == 0.0 {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-17 {
            break;
        }
    }
    (-z * z).exp() * FRAC_1_SQRT_PI / f
}

/// Inverse standard normal CDF, absolute error below 1e-9 on (0,1).
///
/// Acklam's rational approximation refined by Newton steps against
/// [`normal_cdf`]. Upper-tail inputs are mapped to the lower tail through the
/// exact complement 1-p (exact in binary floating point for p >= 0.5), so the
/// refinement always works on a tail probability with full relative precision.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid(format!(
            "normal_quantile requires p in (0,1), got {p}"
        )));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    if p > 0.5 {
        Ok(-quantile_lower(1.0 - p))
    } else {
        Ok(quantile_lower(p))
    }
}

/// Solve normal_cdf(x) = q for q in (0, 0.5); the root is negative.
fn quantile_lower(q: f64) -> f64 {
    let mut x = acklam(q);
    for _ in 0..4 {
        let density = normal_pdf(x);
        if density <= f64::MIN_POSITIVE || !density.is_finite() {
            break;
        }
        let step = (normal_cdf(x) - q) / density;
        x -= step;
        if step.abs() <= 1e-14 * (1.0 + x.abs()) {
            break;
        }
    }
    x
}

/// Acklam's rational starting approximation (relative error ~1.15e-9).
fn acklam(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.02425;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

/// p(1-p), evaluated identically for p and its complement: canonicalize to
/// q = max(p, 1-p), whose own complement is exact (Sterbenz), so the result
/// is bitwise symmetric under p -> 1-p.
pub(crate) fn symmetric_variance(p: f64) -> f64 {
    let hi = if p < 0.5 { 1.0 - p } else { p };
    hi * (1.0 - hi)
}

/// Wald (normal-approximation) half-width z * sqrt(p(1-p)/n).
pub fn wald_half_width(p_hat: f64, n: u64, conf: ConfidenceSpec) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("wald_half_width requires n >= 1"));
    }
    if !(0.0..=1.0).contains(&p_hat) {
        return Err(Error::invalid(format!(
            "wald_half_width requires p_hat in [0,1], got {p_hat}"
        )));
    }
    Ok(conf.z_score().value() * (symmetric_variance(p_hat) / n as f64).sqrt())
}

/// Wilson score interval for k successes in n trials.
///
/// Returns `(lower, upper)` with `0 <= lower <= k/n <= upper <= 1`. Used by
/// the Monte Carlo verifier as an alternative to the Wald interval; sizing
/// itself is Wald-based.
pub fn wilson_interval(k: u64, n: u64, conf: ConfidenceSpec) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::invalid("wilson_interval requires n >= 1"));
    }
    if k > n {
        return Err(Error::invalid(format!(
            "wilson_interval requires k <= n, got k={k}, n={n}"
        )));
    }
    let z = conf.z_score().value();
    let nf = n as f64;
    let p_hat = k as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p_hat + z2 / (2.0 * nf)) / denom;
    let half = z * (p_hat * (1.0 - p_hat) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    Ok(((center - half).max(0.0), (center + half).min(1.0)))
}
