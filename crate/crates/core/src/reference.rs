//! Slow, independent reference implementations used by the test and
//! acceptance suites to cross-check the fast paths.
//!
//! Nothing here shares code with [`crate::stats`]: the CDF is computed by
//! Gauss-Legendre quadrature of the density (the fast path uses a series and
//! a continued fraction), the quantile by bisection on that quadrature, and
//! the Wilson endpoints by solving the score equation numerically (the fast
//! path uses the closed form).

use crate::stats::{normal_pdf, wald_half_width, ConfidenceSpec};

/// 20-point Gauss-Legendre nodes on [-1, 1].
const GL_NODES: [f64; 20] = [
    -0.9931285991850949,
    -0.9639719272779138,
    -0.9122344282513258,
    -0.8391169718222188,
    -0.7463319064601508,
    -0.636053680726515,
    -0.5108670019508271,
    -0.37370608871541955,
    -0.2277858511416451,
    -0.07652652113349734,
    0.07652652113349734,
    0.2277858511416451,
    0.37370608871541955,
    0.5108670019508271,
    0.636053680726515,
    0.7463319064601508,
    0.8391169718222188,
    0.9122344282513258,
    0.9639719272779138,
    0.9931285991850949,
];

/// 20-point Gauss-Legendre weights.
const GL_WEIGHTS: [f64; 20] = [
    0.017614007139153273,
    0.04060142980038622,
    0.06267204833410944,
    0.08327674157670467,
    0.10193011981724026,
    0.11819453196151825,
    0.13168863844917653,
    0.14209610931838187,
    0.14917298647260366,
    0.15275338713072578,
    0.15275338713072578,
    0.14917298647260366,
    0.14209610931838187,
    0.13168863844917653,
    0.11819453196151825,
    0.10193011981724026,
    0.08327674157670467,
    0.06267204833410944,
    0.04060142980038622,
    0.017614007139153273,
];

fn gl_panel(a: f64, b: f64) -> f64 {
    let half = (b - a) / 2.0;
    let mid = (a + b) / 2.0;
    let mut sum = 0.0;
    for (x, w) in GL_NODES.iter().zip(&GL_WEIGHTS) {
        sum += w * normal_pdf(mid + half * x);
    }
    sum * half
}

/// Upper tail P(X > t) for t >= 0, by composite quadrature over [t, t+24].
/// The truncated mass beyond t+24 is negligible relative to the tail itself.
pub fn normal_tail(t: f64) -> f64 {
    debug_assert!(t >= 0.0);
    let panels = 48;
    let width = 0.5;
    let mut sum = 0.0;
    // accumulate outermost panels first: ascending magnitudes lose less
    for i in (0..panels).rev() {
        let a = t + i as f64 * width;
        sum += gl_panel(a, a + width);
    }
    sum
}

/// Quadrature-based standard normal CDF.
pub fn normal_cdf_quadrature(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 - normal_tail(x)
    } else {
        normal_tail(-x)
    }
}

/// Quantile by bisection on the quadrature tail; full relative precision in
/// both tails because the target is always compared against a tail mass.
pub fn normal_quantile_bisect(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "p must lie in (0,1)");
    if p == 0.5 {
        return 0.0;
    }
    // 1 - p is exact for p >= 0.5
    let (target, negate) = if p < 0.5 { (p, true) } else { (1.0 - p, false) };
    let mut lo = 0.0_f64;
    let mut hi = 45.0_f64;
    for _ in 0..200 {
        let mid = (lo + hi) / 2.0;
        if mid == lo || mid == hi {
            break;
        }
        if normal_tail(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = (lo + hi) / 2.0;
    if negate {
        -t
    } else {
        t
    }
}

/// Linear-scan oracle: the smallest n with wald_half_width(p, n, conf) <= d.
pub fn min_n_by_scan(p: f64, d: f64, conf: ConfidenceSpec) -> u64 {
    let mut n = 1;
    while wald_half_width(p, n, conf).expect("valid inputs") > d {
        n += 1;
    }
    n
}

/// Wilson endpoints by bisecting the score equation
/// (p_hat - p)^2 = z^2 p(1-p)/n on each side of p_hat.
pub fn wilson_by_score_equation(k: u64, n: u64, conf: ConfidenceSpec) -> (f64, f64) {
    assert!(n >= 1 && k <= n);
    let z = conf.z_score().value();
    let p_hat = k as f64 / n as f64;
    let g = |p: f64| (p_hat - p).powi(2) - z * z * p * (1.0 - p) / n as f64;

    let bisect = |mut lo: f64, mut hi: f64, rising: bool| -> f64 {
        for _ in 0..200 {
            let mid = (lo + hi) / 2.0;
            if mid == lo || mid == hi {
                break;
            }
            let positive = g(mid) > 0.0;
            if positive == rising {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        (lo + hi) / 2.0
    };

    // g >= 0 at 0 and 1, g <= 0 at p_hat
    let lower = if k == 0 {
        0.0
    } else {
        bisect(0.0, p_hat, false)
    };
    let upper = if k == n {
        1.0
    } else {
        bisect(p_hat, 1.0, true)
    };
    (lower, upper)
}
