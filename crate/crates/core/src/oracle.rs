//! Brute-force reference computations that share no code path with the
//! closed forms they check: adaptive Gauss-Kronrod quadrature and dense
//! grid searches.

use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::specfun::{factorial, gamma_tail};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for the odd Kronrod nodes XGK[1], XGK[3], XGK[5], XGK[7]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// 15-point Kronrod estimate and `|Kronrod − Gauss|` on `[a, b]`.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, (kronrod - gauss).abs() * half)
}

/// Globally adaptive G7-K15 quadrature of `f` on `[a, b]`: the panel with
/// the largest error estimate is bisected until the summed estimate is at
/// most `tol` or 5000 panels are in use.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite() && a <= b) {
        return Err(Error::InvalidBracket { lo: a, hi: b });
    }
    if !(tol > 0.0) {
        return Err(domain("tol", tol, "> 0"));
    }
    if a == b {
        return Ok(0.0);
    }
    let (v, e) = gk15(&f, a, b);
    let mut panels = vec![(a, b, v, e)];
    for _ in 0..5000 {
        let total_err: f64 = panels.iter().map(|p| p.3).sum();
        let total: f64 = panels.iter().map(|p| p.2).sum();
        if !total.is_finite() {
            return Err(Error::NonFinite { at: a, value: total });
        }
        if total_err <= tol {
            return Ok(total);
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .expect("nonempty");
        let (lo, hi, _, _) = panels.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Err(Error::NoConvergence {
                what: "adaptive quadrature",
                iterations: panels.len(),
            });
        }
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        panels.push((lo, mid, v1, e1));
        panels.push((mid, hi, v2, e2));
    }
    Err(Error::NoConvergence {
        what: "adaptive quadrature",
        iterations: 5000,
    })
}

/// `E ln(1 + (P/nt) x)` for `x ~ Gamma(nt, 1)` by quadrature; the ergodic
/// capacity of the `nt × 1` channel.
pub fn ergodic_quadrature(nt: usize, p: f64) -> Result<f64> {
    if nt == 0 || nt > 100 {
        return Err(domain("nt", nt as f64, "1 <= nt <= 100"));
    }
    let n = nt as u32;
    let norm = factorial(n - 1);
    let scale = p / nt as f64;
    let density = move |x: f64| {
        if x == 0.0 {
            if n == 1 {
                1.0
            } else {
                0.0
            }
        } else {
            (f64::from(n - 1) * x.ln() - x).exp() / norm
        }
    };
    let f = |x: f64| density(x) * (scale * x).ln_1p();
    // the Gamma(nt) tail beyond nt + 200 is below e^-150
    let upper = nt as f64 + 200.0;
    let knee = nt as f64 + 20.0;
    Ok(integrate(f, 0.0, knee, 1e-14)? + integrate(f, knee, upper, 1e-16)?)
}

/// Best point of `f` over `points` equally spaced nodes of `[lo, hi]`.
pub fn grid_max<F: Fn(f64) -> f64 + Sync>(f: F, lo: f64, hi: f64, points: usize) -> (f64, f64) {
    let step = (hi - lo) / (points - 1) as f64;
    (0..points)
        .into_par_iter()
        .map(|i| {
            let x = lo + step * i as f64;
            (x, f(x))
        })
        .reduce(
            || (f64::NAN, f64::NEG_INFINITY),
            |a, b| if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) { b } else { a },
        )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayeredGridPoint {
    pub s1: f64,
    pub s2: f64,
    pub p1: f64,
    pub value: f64,
}

/// Best two-layer MISO plan on a `s_points × s_points × p_points` grid
/// over `(s_1, s_2, P_1)`, `s` strictly inside `(0, 1)` and `P_1 ∈ [0, P]`,
/// evaluated straight from the layered expected-rate definition.
pub fn two_layer_grid_max(
    nt: usize,
    p: f64,
    s_points: usize,
    p_points: usize,
) -> Result<LayeredGridPoint> {
    if nt == 0 || s_points < 2 || p_points < 2 {
        return Err(domain("grid", s_points as f64, "nt >= 1 and >= 2 points per axis"));
    }
    let n = nt as u32;
    let ntf = nt as f64;
    let s_at = |i: usize| (i + 1) as f64 / (s_points + 1) as f64;
    let success: Vec<f64> = (0..s_points).map(|i| gamma_tail(n, ntf * s_at(i))).collect();
    let best = (0..s_points)
        .into_par_iter()
        .map(|i| {
            let s1 = s_at(i);
            let mut best = LayeredGridPoint {
                s1,
                s2: f64::NAN,
                p1: f64::NAN,
                value: f64::NEG_INFINITY,
            };
            for k in 0..p_points {
                let p1 = p * k as f64 / (p_points - 1) as f64;
                let p2 = p - p1;
                // bottom layer sees the top layer's power as noise
                let bottom = success[i] * (1.0 + p1 * s1 / (1.0 + p2 * s1)).ln();
                for (j, &succ2) in success.iter().enumerate() {
                    let s2 = s_at(j);
                    let value = bottom + succ2 * (1.0 + p2 * s2).ln();
                    if value > best.value {
                        best = LayeredGridPoint { s1, s2, p1, value };
                    }
                }
            }
            best
        })
        .reduce(
            || LayeredGridPoint {
                s1: f64::NAN,
                s2: f64::NAN,
                p1: f64::NAN,
                value: f64::NEG_INFINITY,
            },
            |a, b| if b.value > a.value { b } else { a },
        );
    Ok(best)
}
