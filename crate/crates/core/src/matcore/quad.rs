//! Adaptive Simpson quadrature over explicitly split panels.

use crate::error::{Error, Result};

const MAX_DEPTH: usize = 60;

/// Integrates `f` over `[lo, hi]`, refining each panel between consecutive
/// breakpoints independently. The tolerance is shared between panels in
/// proportion to their width.
///
/// Breakpoints must be sorted and lie inside `[lo, hi]`; kinks and derivative
/// singularities of `f` belong there.
pub fn integrate_adaptive<F>(f: F, lo: f64, hi: f64, breakpoints: &[f64], tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(Error::InvalidArgument(format!("bad interval [{lo}, {hi}]")));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    if breakpoints.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument("breakpoints not sorted".into()));
    }
    if breakpoints.iter().any(|&b| b < lo || b > hi) {
        return Err(Error::InvalidArgument("breakpoint outside interval".into()));
    }
    if lo == hi {
        return Ok(0.0);
    }

    let mut edges = Vec::with_capacity(breakpoints.len() + 2);
    edges.push(lo);
    edges.extend(breakpoints.iter().copied().filter(|&b| b > lo && b < hi));
    edges.push(hi);
    edges.dedup();

    let width = hi - lo;
    let mut total = 0.0;
    for w in edges.windows(2) {
        let (a, b) = (w[0], w[1]);
        let panel_tol = tol * (b - a) / width;
        let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
        let whole = simpson(a, b, fa, fm, fb);
        total += refine(&f, a, b, fa, fm, fb, whole, panel_tol, 0)?;
    }
    Ok(total)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn refine<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth >= MAX_DEPTH {
        return Err(Error::MaxDepth { depth, at: m });
    }
    Ok(refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)?
        + refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)?)
}
