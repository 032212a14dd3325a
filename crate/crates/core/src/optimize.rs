//! Scalar maximization, bracketed root finding and the multi-start
//! coordinate ascent used for layered power/threshold searches.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;

use crate::error::{domain, Error, Result};

/// Closed search interval with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    lo: f64,
    hi: f64,
}

impl Bracket {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidBracket { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Outcome of a maximization.
#[derive(Debug, Clone, PartialEq)]
pub struct OptResult<A> {
    pub argmax: A,
    pub value: f64,
    pub iterations: usize,
    /// width of the final uncertainty interval (scalar) or last sweep
    /// improvement (layered)
    pub tol_achieved: f64,
}

pub const DEFAULT_SCALAR_TOL: f64 = 1e-10;
pub const DEFAULT_LAYERED_TOL: f64 = 1e-8;
pub const DEFAULT_RESTARTS: usize = 20;
const GRID_POINTS: usize = 64;
/// a start stops once a full sweep gains no more than this
const SWEEP_STALL: f64 = 1e-13;
const INV_PHI: f64 = 0.618_033_988_749_894_8;

fn eval<F: Fn(f64) -> f64>(f: &F, x: f64) -> Result<f64> {
    let v = f(x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite { at: x, value: v })
    }
}

/// Maximizes `f` on `b`: a 64-point grid scan locates the best cell, then
/// golden-section search refines inside the two neighbouring cells until
/// the bracket is narrower than `tol`. The returned value is never below
/// any grid value.
pub fn maximize_scalar<F>(f: F, b: Bracket, tol: f64) -> Result<OptResult<f64>>
where
    F: Fn(f64) -> f64,
{
    if !(tol > 0.0) {
        return Err(domain("tol", tol, "> 0"));
    }
    let step = b.width() / (GRID_POINTS - 1) as f64;
    let grid_x = |i: usize| {
        if i == GRID_POINTS - 1 {
            b.hi
        } else {
            b.lo + step * i as f64
        }
    };
    let mut best_i = 0;
    let mut best_v = f64::NEG_INFINITY;
    for i in 0..GRID_POINTS {
        let v = eval(&f, grid_x(i))?;
        // strict comparison keeps the smallest argmax on ties
        if v > best_v {
            best_v = v;
            best_i = i;
        }
    }
    let best_x = grid_x(best_i);
    let mut lo = grid_x(best_i.saturating_sub(1));
    let mut hi = grid_x((best_i + 1).min(GRID_POINTS - 1));

    let mut iterations = GRID_POINTS;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = eval(&f, x1)?;
    let mut f2 = eval(&f, x2)?;
    iterations += 2;
    while hi - lo > tol {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = eval(&f, x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = eval(&f, x2)?;
        }
        iterations += 1;
        if x1 >= x2 {
            break;
        }
    }
    let (mut x, mut v) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    for cand in [lo, hi] {
        let fv = eval(&f, cand)?;
        iterations += 1;
        if fv > v || (fv == v && cand < x) {
            x = cand;
            v = fv;
        }
    }
    if best_v > v || (best_v == v && best_x < x) {
        x = best_x;
        v = best_v;
    }
    Ok(OptResult {
        argmax: x,
        value: v,
        iterations,
        tol_achieved: hi - lo,
    })
}

/// Bisection for a sign change of `g` on `b`. Returns the midpoint of the
/// final bracket, which is at most `tol` wide unless floating-point
/// resolution is reached first. An exact zero at either end is returned
/// as is.
pub fn find_root<G>(g: G, b: Bracket, tol: f64) -> Result<f64>
where
    G: Fn(f64) -> f64,
{
    if !(tol > 0.0) {
        return Err(domain("tol", tol, "> 0"));
    }
    let (mut lo, mut hi) = (b.lo, b.hi);
    let g_lo = eval(&g, lo)?;
    let g_hi = eval(&g, hi)?;
    if g_lo == 0.0 {
        return Ok(lo);
    }
    if g_hi == 0.0 {
        return Ok(hi);
    }
    if g_lo.signum() == g_hi.signum() {
        return Err(Error::NoSignChange { lo, hi, g_lo, g_hi });
    }
    let lo_negative = g_lo < 0.0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = eval(&g, mid)?;
        if gm == 0.0 {
            return Ok(mid);
        }
        if (gm < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Thresholds `s` and powers `P` of a layered code, layer 0 decoded first.
#[derive(Debug, Clone, PartialEq)]
pub struct LayeredPoint {
    pub thresholds: Vec<f64>,
    pub powers: Vec<f64>,
}

impl LayeredPoint {
    /// Lexicographic key over `(s, P)`, used for deterministic tie-breaking.
    fn key(&self) -> impl Iterator<Item = f64> + '_ {
        self.thresholds.iter().chain(self.powers.iter()).copied()
    }
}

/// Settings of [`maximize_layered_with`].
#[derive(Debug, Clone, PartialEq)]
pub struct LayeredOptions {
    /// open interval for every threshold `s_i`
    pub s_range: (f64, f64),
    /// tolerance of the single-layer seed search
    pub scalar_tol: f64,
    /// argmax tolerance of every coordinate refinement
    pub tol: f64,
    pub restarts: usize,
    pub max_sweeps: usize,
    pub seed: u64,
    /// extra deterministic starting points (e.g. an embedded lower-K optimum)
    pub warm_starts: Vec<LayeredPoint>,
}

impl Default for LayeredOptions {
    fn default() -> Self {
        Self {
            s_range: (1e-9, 1.0 - 1e-9),
            scalar_tol: DEFAULT_SCALAR_TOL,
            tol: DEFAULT_LAYERED_TOL,
            restarts: DEFAULT_RESTARTS,
            max_sweeps: 200,
            seed: 0x1A7E_5EED,
            warm_starts: Vec::new(),
        }
    }
}

/// Euclidean projection of `v` onto `{x ≥ 0, Σx = total}`.
pub fn project_simplex(v: &[f64], total: f64) -> Vec<f64> {
    if v.is_empty() {
        return Vec::new();
    }
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cum += uj;
        let t = (cum - total) / (j + 1) as f64;
        if uj - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Multi-start coordinate ascent for `max objective(s, P)` over
/// `s_i ∈ (0, 1)`, `P_i ≥ 0`, `ΣP_i = P` with default options.
pub fn maximize_layered<F>(
    k: usize,
    total_power: f64,
    objective: F,
    restarts: usize,
) -> Result<OptResult<LayeredPoint>>
where
    F: Fn(&[f64], &[f64]) -> f64 + Sync,
{
    let opts = LayeredOptions {
        restarts,
        ..LayeredOptions::default()
    };
    maximize_layered_with(k, total_power, objective, &opts)
}

/// Each start alternates a 1-D refinement of every `s_i` with pairwise
/// power transfers `(P_i, P_j) → (t, P_i + P_j − t)` and a simplex
/// projection. The first start splits the power equally and sets every
/// threshold to the single-layer optimum, so the result is never worse
/// than that point. Starts run concurrently; the best value wins, ties go
/// to the lexicographically smallest argmax.
pub fn maximize_layered_with<F>(
    k: usize,
    total_power: f64,
    objective: F,
    opts: &LayeredOptions,
) -> Result<OptResult<LayeredPoint>>
where
    F: Fn(&[f64], &[f64]) -> f64 + Sync,
{
    if k == 0 {
        return Err(domain("K", 0.0, "K >= 1"));
    }
    if !(total_power.is_finite() && total_power >= 0.0) {
        return Err(domain("P", total_power, "finite and >= 0"));
    }
    let s_bracket = Bracket::new(opts.s_range.0, opts.s_range.1)?;
    let objective = &objective;

    // single-layer optimum (all power in layer 0) seeds the equal split
    let mut single_powers = vec![0.0; k];
    single_powers[0] = total_power;
    let single = maximize_scalar(
        |s| objective(&vec![s; k], &single_powers),
        s_bracket,
        opts.scalar_tol,
    )?;
    if k == 1 {
        return Ok(OptResult {
            argmax: LayeredPoint {
                thresholds: vec![single.argmax],
                powers: vec![total_power],
            },
            value: single.value,
            iterations: single.iterations,
            tol_achieved: single.tol_achieved,
        });
    }

    let mut starts = vec![LayeredPoint {
        thresholds: vec![single.argmax; k],
        powers: vec![total_power / k as f64; k],
    }];
    for w in &opts.warm_starts {
        if w.thresholds.len() != k || w.powers.len() != k {
            return Err(Error::Dimension(format!(
                "warm start has {} thresholds and {} powers for K = {k}",
                w.thresholds.len(),
                w.powers.len()
            )));
        }
        let thresholds = w
            .thresholds
            .iter()
            .map(|s| s.clamp(s_bracket.lo, s_bracket.hi))
            .collect();
        starts.push(LayeredPoint {
            thresholds,
            powers: project_simplex(&w.powers, total_power),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..opts.restarts {
        let weights: Vec<f64> = (0..k).map(|_| Exp1.sample(&mut rng)).collect();
        let sum: f64 = weights.iter().sum();
        let mut thresholds: Vec<f64> = (0..k)
            .map(|_| rng.random_range(s_bracket.lo..s_bracket.hi))
            .collect();
        thresholds.sort_by(f64::total_cmp);
        starts.push(LayeredPoint {
            thresholds,
            powers: weights.iter().map(|w| total_power * w / sum).collect(),
        });
    }

    let results: Vec<Result<OptResult<LayeredPoint>>> = starts
        .into_par_iter()
        .map(|start| ascend(start, total_power, objective, s_bracket, opts))
        .collect();

    let mut best: Option<OptResult<LayeredPoint>> = None;
    let mut iterations = 0;
    for r in results {
        let r = r?;
        iterations += r.iterations;
        let better = match &best {
            None => true,
            Some(b) => {
                r.value > b.value
                    || (r.value == b.value
                        && r.argmax.key().partial_cmp(b.argmax.key())
                            == Some(std::cmp::Ordering::Less))
            }
        };
        if better {
            best = Some(r);
        }
    }
    let mut best = best.expect("at least one start");
    best.iterations = iterations;
    Ok(best)
}

fn ascend<F>(
    mut x: LayeredPoint,
    total_power: f64,
    objective: &F,
    s_bracket: Bracket,
    opts: &LayeredOptions,
) -> Result<OptResult<LayeredPoint>>
where
    F: Fn(&[f64], &[f64]) -> f64,
{
    let k = x.thresholds.len();
    let eval_point = |p: &LayeredPoint| -> Result<f64> {
        let v = objective(&p.thresholds, &p.powers);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite {
                at: p.thresholds[0],
                value: v,
            })
        }
    };
    let mut value = eval_point(&x)?;
    let mut iterations = 0;
    let mut last_gain = f64::INFINITY;
    for _ in 0..opts.max_sweeps {
        let before = value;
        for i in 0..k {
            let r = maximize_scalar(
                |s| {
                    let mut t = x.thresholds.clone();
                    t[i] = s;
                    objective(&t, &x.powers)
                },
                s_bracket,
                opts.tol,
            )?;
            iterations += r.iterations;
            if r.value > value {
                x.thresholds[i] = r.argmax;
                value = r.value;
            }
        }
        if total_power > 0.0 {
            for i in 0..k {
                for j in i + 1..k {
                    let pair = x.powers[i] + x.powers[j];
                    if pair <= 0.0 {
                        continue;
                    }
                    let r = maximize_scalar(
                        |t| {
                            let mut p = x.powers.clone();
                            p[i] = t;
                            p[j] = pair - t;
                            objective(&x.thresholds, &p)
                        },
                        Bracket::new(0.0, pair)?,
                        opts.tol * pair.max(1.0),
                    )?;
                    iterations += r.iterations;
                    if r.value > value {
                        x.powers[i] = r.argmax;
                        x.powers[j] = pair - r.argmax;
                        value = r.value;
                    }
                }
            }
            let projected = project_simplex(&x.powers, total_power);
            let candidate = LayeredPoint {
                thresholds: x.thresholds.clone(),
                powers: projected,
            };
            let v = eval_point(&candidate)?;
            if v >= value {
                x = candidate;
                value = v;
            }
        }
        last_gain = value - before;
        if last_gain <= SWEEP_STALL {
            break;
        }
    }
    Ok(OptResult {
        argmax: x,
        value,
        iterations,
        tol_achieved: last_gain.max(0.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parabola() {
        let r = maximize_scalar(|x| -(x - 0.3) * (x - 0.3), Bracket::new(0.0, 1.0).unwrap(), 1e-10)
            .unwrap();
        assert!((r.argmax - 0.3).abs() <= 1e-8, "{}", r.argmax);
        assert!(r.tol_achieved <= 1e-10);
    }

    #[test]
    fn monotone_edge() {
        let r = maximize_scalar(|x| x, Bracket::new(0.0, 1.0).unwrap(), 1e-10).unwrap();
        assert_eq!(r.argmax, 1.0);
        assert_eq!(r.value, 1.0);
        let r = maximize_scalar(|x| -x, Bracket::new(0.0, 1.0).unwrap(), 1e-10).unwrap();
        assert_eq!(r.argmax, 0.0);
    }

    #[test]
    fn ties_keep_smallest_argmax() {
        let r = maximize_scalar(|_| 1.0, Bracket::new(-2.0, 5.0).unwrap(), 1e-6).unwrap();
        assert_eq!(r.argmax, -2.0);
    }

    #[test]
    fn never_below_grid() {
        // sharp spike between grid nodes plus a broad bump elsewhere
        let f = |x: f64| (-(x - 0.8) * (x - 0.8) * 4.0).exp() + 2.0 * (-((x - 0.201) / 1e-3).powi(2)).exp();
        let b = Bracket::new(0.0, 1.0).unwrap();
        let r = maximize_scalar(f, b, 1e-10).unwrap();
        for i in 0..64 {
            let x = i as f64 / 63.0;
            assert!(r.value >= f(x));
        }
    }

    #[test]
    fn non_finite_reports_point() {
        let err = maximize_scalar(|x| if x > 0.5 { f64::NAN } else { x }, Bracket::new(0.0, 1.0).unwrap(), 1e-6)
            .unwrap_err();
        assert!(matches!(err, Error::NonFinite { at, .. } if at > 0.5));
    }

    #[test]
    fn bracket_validation() {
        assert!(Bracket::new(1.0, 1.0).is_err());
        assert!(Bracket::new(2.0, 1.0).is_err());
        assert!(Bracket::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn roots() {
        let b = Bracket::new(0.0, 1.0).unwrap();
        assert_eq!(find_root(|x| x - 0.5, b, 1e-12).unwrap(), 0.5);
        let r = find_root(|s| 1.0 / s - 1.0, Bracket::new(0.1, 10.0).unwrap(), 1e-13).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
        let r = find_root(|s| 1.0 / s - (1.0 + 4.0 * s), Bracket::new(1e-6, 1.0).unwrap(), 1e-14)
            .unwrap();
        let expected = (17f64.sqrt() - 1.0) / 8.0;
        assert!((r - expected).abs() < 1e-13);
        assert!((expected - 2.0 / (1.0 + 17f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn root_without_sign_change() {
        let err = find_root(|x| x * x + 1.0, Bracket::new(-1.0, 1.0).unwrap(), 1e-9).unwrap_err();
        assert!(matches!(err, Error::NoSignChange { .. }));
    }

    #[test]
    fn simplex_projection() {
        let p = project_simplex(&[0.5, 0.5], 1.0);
        assert_eq!(p, vec![0.5, 0.5]);
        let p = project_simplex(&[2.0, -1.0, 0.0], 1.0);
        assert!((p[0] - 1.0).abs() < 1e-15 && p[1] == 0.0 && p[2] == 0.0);
        let p = project_simplex(&[0.3, 0.3, 0.3], 1.2);
        assert!(p.iter().all(|x| (x - 0.4).abs() < 1e-15));
    }

    #[test]
    fn layered_zero_k_rejected() {
        let err = maximize_layered(0, 1.0, |_, _| 0.0, 2).unwrap_err();
        assert!(matches!(err, Error::Domain { .. }));
    }

    #[test]
    fn layered_concave_toy() {
        // separable concave objective with known maximizer
        let obj = |s: &[f64], p: &[f64]| -> f64 {
            -(s[0] - 0.2).powi(2) - (s[1] - 0.7).powi(2) - (p[0] - 3.0).powi(2)
        };
        let r = maximize_layered(2, 4.0, obj, 4).unwrap();
        assert!((r.argmax.thresholds[0] - 0.2).abs() < 1e-6);
        assert!((r.argmax.thresholds[1] - 0.7).abs() < 1e-6);
        assert!((r.argmax.powers[0] - 3.0).abs() < 1e-6);
        assert!((r.argmax.powers.iter().sum::<f64>() - 4.0).abs() < 1e-12);
    }
}
