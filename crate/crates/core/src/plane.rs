//! Geometry of the concurrence / linear-entropy plane for E0 states.
//!
//! At fixed concurrence `c`, an E0 state is a point of the `(x, y)` plane
//! with `x = (a - b)/sqrt 2`, `y = (a + b - 2/3)/sqrt 2`. Physical states fill
//! the region X+ above the hyperbola `ab = c^2/4`, and states sharing a linear
//! entropy `s` lie on an ellipse with semi-axes `A = sqrt 3 B`. The quadratic
//! entropic inequality splits each level set, which partitions the plane into
//! regions where every state violates it (`V_E`), none does (`NV_E`), or
//! both kinds occur (`Zero_E`).

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::integrate_adaptive;

const TWO_THIRDS: f64 = 2.0 / 3.0;
const TANGENCY_SLACK: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlanePoint {
    /// Concurrence.
    pub c: f64,
    /// Normalized linear entropy.
    pub s: f64,
}

impl PlanePoint {
    pub fn new(c: f64, s: f64) -> Self {
        Self { c, s }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct XYPoint {
    pub x: f64,
    pub y: f64,
}

/// Semi-axes of the linear-entropy level set, `x^2/A^2 + y^2/B^2 = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EllipseSpec {
    pub a_axis: f64,
    pub b_axis: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionLabel {
    #[serde(rename = "V_E")]
    V,
    #[serde(rename = "Zero_E")]
    Zero,
    #[serde(rename = "NV_E")]
    Nv,
    NonPhysical,
}

impl RegionLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            RegionLabel::V => "V_E",
            RegionLabel::Zero => "Zero_E",
            RegionLabel::Nv => "NV_E",
            RegionLabel::NonPhysical => "NonPhysical",
        }
    }
}

impl fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RegionLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "V_E" => Ok(RegionLabel::V),
            "Zero_E" => Ok(RegionLabel::Zero),
            "NV_E" => Ok(RegionLabel::Nv),
            "NonPhysical" => Ok(RegionLabel::NonPhysical),
            other => Err(Error::InvalidArgument(format!(
                "unknown region label `{other}`"
            ))),
        }
    }
}

/// Region sizes on the physical part of the plane.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AreaReport {
    pub method: String,
    pub tolerance: f64,
    pub total_area: f64,
    pub v_area: f64,
    pub zero_area: f64,
    pub nv_area: f64,
    pub v_percent: f64,
    pub zero_percent: f64,
    pub nv_percent: f64,
}

impl AreaReport {
    fn from_areas(method: String, tolerance: f64, total: f64, v: f64, zero: f64, nv: f64) -> Self {
        let pct = |x: f64| 100.0 * x / total;
        Self {
            method,
            tolerance,
            total_area: total,
            v_area: v,
            zero_area: zero,
            nv_area: nv,
            v_percent: pct(v),
            zero_percent: pct(zero),
            nv_percent: pct(nv),
        }
    }
}

// Unchecked curve formulas; callers own the domain.

fn s_l1(c: f64) -> f64 {
    8.0 / 3.0 * c * (1.0 - c)
}

fn s_l2(c: f64) -> f64 {
    8.0 / 9.0 - 2.0 / 3.0 * c * c
}

fn radical(c: f64) -> f64 {
    (1.0 - 2.0 * c * c).max(0.0).sqrt()
}

fn s_lm(c: f64) -> f64 {
    (1.0 + c * c - radical(c)) / 3.0
}

fn s_lp(c: f64) -> f64 {
    (1.0 + c * c + radical(c)) / 3.0
}

/// The boundary curves that define the entropic partition. Replaceable so
/// verification can demonstrate that a corrupted curve is caught.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryCurves {
    /// MEMS I frontier, used for c >= 2/3.
    pub s_l1: fn(f64) -> f64,
    /// MEMS II frontier, used for c < 2/3.
    pub s_l2: fn(f64) -> f64,
    pub s_l_minus: fn(f64) -> f64,
    pub s_l_plus: fn(f64) -> f64,
}

impl Default for BoundaryCurves {
    fn default() -> Self {
        Self {
            s_l1,
            s_l2,
            s_l_minus: s_lm,
            s_l_plus: s_lp,
        }
    }
}

impl BoundaryCurves {
    fn frontier(&self, c: f64) -> f64 {
        if c >= TWO_THIRDS {
            (self.s_l1)(c)
        } else {
            (self.s_l2)(c)
        }
    }

    /// Length of the V_E part of the column at `c`.
    fn v_length(&self, c: f64) -> f64 {
        if c < 0.0 {
            0.0
        } else if c > FRAC_1_SQRT_2 {
            (self.s_l1)(c).max(0.0)
        } else {
            let mut len = (self.s_l_minus)(c).max(0.0);
            if c >= TWO_THIRDS {
                len += ((self.s_l1)(c) - (self.s_l_plus)(c)).max(0.0);
            }
            len
        }
    }

    /// Length of the NV_E part of the column at `c`.
    fn nv_length(&self, c: f64) -> f64 {
        if !(0.0..TWO_THIRDS).contains(&c) {
            0.0
        } else if c < 0.5 {
            ((self.s_l2)(c) - TWO_THIRDS).max(0.0)
        } else {
            ((self.s_l2)(c) - (self.s_l1)(c)).max(0.0)
        }
    }
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} is not finite")))
    }
}

/// Maximal linear entropy at concurrence `c`, reached by the MEMS.
pub fn frontier_mems(c: f64) -> Result<f64> {
    check_unit("c", c)?;
    if c <= 0.0 || c > 1.0 {
        return Err(Error::Domain(format!(
            "frontier needs c in (0, 1], got {c}"
        )));
    }
    Ok(BoundaryCurves::default().frontier(c))
}

fn check_curve_domain(c: f64) -> Result<()> {
    check_unit("c", c)?;
    if !(0.0..=FRAC_1_SQRT_2).contains(&c) {
        return Err(Error::Domain(format!(
            "S_L+- need c in [0, 1/sqrt 2], got {c}"
        )));
    }
    Ok(())
}

/// (1/3)(1 + c^2 - sqrt(1 - 2c^2)).
pub fn s_l_minus(c: f64) -> Result<f64> {
    check_curve_domain(c)?;
    Ok(s_lm(c))
}

/// (1/3)(1 + c^2 + sqrt(1 - 2c^2)).
pub fn s_l_plus(c: f64) -> Result<f64> {
    check_curve_domain(c)?;
    Ok(s_lp(c))
}

/// Lower edge of NV_E: 2/3 below c = 1/2, the MEMS I curve from 1/2 to 2/3,
/// `None` elsewhere.
pub fn nv_lower(c: f64) -> Option<f64> {
    if c > 0.0 && c < 0.5 {
        Some(TWO_THIRDS)
    } else if (0.5..TWO_THIRDS).contains(&c) {
        Some(s_l1(c))
    } else {
        None
    }
}

pub fn to_xy(a: f64, b: f64) -> XYPoint {
    XYPoint {
        x: (a - b) / SQRT_2,
        y: (a + b - TWO_THIRDS) / SQRT_2,
    }
}

/// Inverse of [`to_xy`].
pub fn from_xy(p: XYPoint) -> (f64, f64) {
    let sum = SQRT_2 * p.y + TWO_THIRDS;
    let diff = SQRT_2 * p.x;
    (0.5 * (sum + diff), 0.5 * (sum - diff))
}

/// 2(ab - c^2/4) in the (x, y) variables.
pub fn hyperbola_lhs(p: XYPoint, c: f64) -> f64 {
    p.y * p.y + 2.0 * SQRT_2 / 3.0 * p.y - p.x * p.x - c * c / 2.0 + 2.0 / 9.0
}

/// Membership in X+: above the hyperbola and below the line a + b = 1.
pub fn in_x_plus(p: XYPoint, c: f64) -> bool {
    hyperbola_lhs(p, c) >= 0.0 && p.y <= 1.0 / (3.0 * SQRT_2)
}

/// Linear entropy of the E0 state at `(x, y)` with concurrence `c`.
pub fn linear_entropy_xy(p: XYPoint, c: f64) -> f64 {
    -8.0 / 3.0 * (p.x * p.x / 2.0 + 1.5 * p.y * p.y + c * c / 4.0 - 1.0 / 3.0)
}

fn ellipse_radicand(s: f64, c: f64) -> f64 {
    -c * c / 12.0 - s / 8.0 + 1.0 / 9.0
}

/// Level set of the linear entropy: `A = sqrt(6 K)`, `B = sqrt(2 K)` with
/// `K = 1/9 - c^2/12 - s/8`.
pub fn ellipse_axes(s: f64, c: f64) -> Result<EllipseSpec> {
    check_unit("s", s)?;
    check_unit("c", c)?;
    let k = ellipse_radicand(s, c);
    if k < 0.0 {
        return Err(Error::NoLevelSet { c, s });
    }
    Ok(EllipseSpec {
        a_axis: (6.0 * k).sqrt(),
        b_axis: (2.0 * k).sqrt(),
    })
}

/// Left side of the quadratic entropic inequality for E0 states,
/// `y^2 - xy + (x + y)/(3 sqrt 2) + c^2/4 - 1/9`. It equals half of
/// `Tr rho^2 - Tr rho_A^2`, i.e. `c^2/4 - b(1 - a - b)`; positive means the
/// state violates the inequality.
pub fn eineq_lhs(p: XYPoint, c: f64) -> f64 {
    let k = 1.0 / (3.0 * SQRT_2);
    p.y * p.y - p.x * p.y + k * p.y + k * p.x + c * c / 4.0 - 1.0 / 9.0
}

/// Slack for points computed from actual states: MEMS sit exactly on the
/// frontier and pure states at s = 0, so rounding must not push them out.
pub const PHYSICAL_SLACK: f64 = 1e-10;

/// Clamps a point within [`PHYSICAL_SLACK`] of the physical region onto it;
/// `None` when it is genuinely outside.
fn snap_physical(curves: &BoundaryCurves, point: PlanePoint) -> Option<PlanePoint> {
    let PlanePoint { c, s } = point;
    if !(c.is_finite() && s.is_finite()) {
        return None;
    }
    if !(-PHYSICAL_SLACK..=1.0 + PHYSICAL_SLACK).contains(&c)
        || !(-PHYSICAL_SLACK..=1.0).contains(&s)
    {
        return None;
    }
    let c = c.clamp(0.0, 1.0);
    let s = s.max(0.0);
    if c == 0.0 {
        return Some(PlanePoint { c, s });
    }
    let top = curves.frontier(c);
    if s > top + PHYSICAL_SLACK {
        return None;
    }
    Some(PlanePoint { c, s: s.min(top) })
}

/// Entropic region of a plane point under the default boundary curves.
pub fn classify_entropic(point: PlanePoint) -> RegionLabel {
    classify_entropic_with(&BoundaryCurves::default(), point)
}

/// Strict and non-strict inequalities follow the region definitions
/// exactly; the c = 0 column is NV_E for every s in [0, 1].
pub fn classify_entropic_with(curves: &BoundaryCurves, point: PlanePoint) -> RegionLabel {
    let Some(PlanePoint { c, s }) = snap_physical(curves, point) else {
        return RegionLabel::NonPhysical;
    };
    if c == 0.0 {
        return RegionLabel::Nv;
    }
    let sl1 = (curves.s_l1)(c);
    let sl2 = (curves.s_l2)(c);

    let nv = (c < 0.5 && s > TWO_THIRDS && s <= sl2)
        || ((0.5..TWO_THIRDS).contains(&c) && (sl1..=sl2).contains(&s));
    if nv {
        return RegionLabel::Nv;
    }
    let v = (c < FRAC_1_SQRT_2 && s < (curves.s_l_minus)(c))
        || ((TWO_THIRDS..=FRAC_1_SQRT_2).contains(&c) && s > (curves.s_l_plus)(c) && s <= sl1)
        || (c > FRAC_1_SQRT_2 && s <= sl1);
    if v {
        RegionLabel::V
    } else {
        RegionLabel::Zero
    }
}

/// Breakpoints of the region integrands: kinks at 1/2 and 2/3, square-root
/// singularity at 1/sqrt 2.
pub const AREA_BREAKPOINTS: [f64; 3] = [0.5, TWO_THIRDS, FRAC_1_SQRT_2];

pub fn entropic_region_areas(tol: f64) -> Result<AreaReport> {
    entropic_region_areas_with(&BoundaryCurves::default(), tol)
}

/// Areas by adaptive quadrature in `c` of the closed-form s-interval
/// lengths of each region.
pub fn entropic_region_areas_with(curves: &BoundaryCurves, tol: f64) -> Result<AreaReport> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let bp = &AREA_BREAKPOINTS;
    let total = integrate_adaptive(|c| curves.frontier(c).max(0.0), 0.0, 1.0, bp, tol)?;
    let v = integrate_adaptive(|c| curves.v_length(c), 0.0, 1.0, bp, tol)?;
    let nv = integrate_adaptive(|c| curves.nv_length(c), 0.0, 1.0, bp, tol)?;
    let zero = integrate_adaptive(
        |c| (curves.frontier(c) - curves.v_length(c) - curves.nv_length(c)).max(0.0),
        0.0,
        1.0,
        bp,
        tol,
    )?;
    Ok(AreaReport::from_areas(
        "adaptive Simpson over closed-form region bounds".into(),
        tol,
        total,
        v,
        zero,
        nv,
    ))
}

/// Sub-intervals of `y` attained by E0 states with concurrence `c` and
/// linear entropy `s`: the level-set ellipse intersected with X+ and
/// `a + b >= 0`. At most two intervals (upper and lower arc).
pub fn level_set_y_ranges(c: f64, s: f64) -> Result<Vec<(f64, f64)>> {
    let e = ellipse_axes(s, c)?;
    let b2 = e.b_axis * e.b_axis;
    let lo = (-e.b_axis).max(-SQRT_2 / 3.0);
    let hi = e.b_axis.min(1.0 / (3.0 * SQRT_2));
    if lo > hi {
        return Ok(Vec::new());
    }
    // On the ellipse x^2 = 3(B^2 - y^2); X+ becomes q(y) >= 0 with
    // q(y) = 4y^2 + (2 sqrt 2/3) y + 2/9 - c^2/2 - 3B^2.
    let qa = 4.0;
    let qb = 2.0 * SQRT_2 / 3.0;
    let qc = 2.0 / 9.0 - c * c / 2.0 - 3.0 * b2;
    let disc = qb * qb - 4.0 * qa * qc;
    let ranges = if disc <= 0.0 {
        vec![(lo, hi)]
    } else {
        let root = disc.sqrt();
        let r1 = (-qb - root) / (2.0 * qa);
        let r2 = (-qb + root) / (2.0 * qa);
        vec![(lo, hi.min(r1)), (lo.max(r2), hi)]
    };
    // Level sets on the MEMS I frontier touch the hyperbola at a single
    // point; rounding may leave that as a slightly inverted interval.
    Ok(ranges
        .into_iter()
        .filter_map(|(l, h)| {
            if l <= h {
                Some((l, h))
            } else if l - h <= TANGENCY_SLACK {
                let m = 0.5 * (l + h);
                Some((m, m))
            } else {
                None
            }
        })
        .collect())
}

/// CHSH value of an E0 state from its concurrence and `y` coordinate: the
/// spectrum of T^T T is {c^2, c^2, (1/3 + 2 sqrt 2 y)^2}.
pub fn chsh_e0(c: f64, y: f64) -> f64 {
    let t = 1.0 / 3.0 + 2.0 * SQRT_2 * y;
    2.0 * (c * c + (c * c).max(t * t)).sqrt()
}

/// CHSH region of a plane point: V if every E0 state on the level set
/// exceeds 2 + tol, NV if every one stays below 2 - tol, Zero otherwise.
pub fn classify_chsh(point: PlanePoint, tol: f64) -> Result<RegionLabel> {
    let Some(PlanePoint { c, s }) = snap_physical(&BoundaryCurves::default(), point) else {
        return Ok(RegionLabel::NonPhysical);
    };
    if c == 0.0 {
        return Ok(RegionLabel::Nv);
    }
    let ranges = level_set_y_ranges(c, s)?;
    if ranges.is_empty() {
        return Err(Error::NoLevelSet { c, s });
    }
    // chsh_e0 is monotone in t^2, so the extremes sit at the interval ends or
    // at t = 0.
    let y_zero = -1.0 / (6.0 * SQRT_2);
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for &(lo, hi) in &ranges {
        for y in [lo, hi] {
            let v = chsh_e0(c, y);
            min = min.min(v);
            max = max.max(v);
        }
        if lo <= y_zero && y_zero <= hi {
            min = min.min(chsh_e0(c, y_zero));
        }
    }
    Ok(if min > 2.0 + tol {
        RegionLabel::V
    } else if max < 2.0 - tol {
        RegionLabel::Nv
    } else {
        RegionLabel::Zero
    })
}

const CHSH_CLASSIFY_TOL: f64 = 1e-12;
const BISECT_STEPS: usize = 60;

fn chsh_label(c: f64, s: f64) -> RegionLabel {
    classify_chsh(PlanePoint::new(c, s), CHSH_CLASSIFY_TOL).unwrap_or(RegionLabel::NonPhysical)
}

/// [V, Zero, NV] lengths of the column at `c`, on an s-grid of `cells`
/// cells with label switches located by bisection.
fn chsh_column(c: f64, cells: usize) -> [f64; 3] {
    let top = BoundaryCurves::default().frontier(c);
    let mut out = [0.0; 3];
    let slot = |l: RegionLabel| match l {
        RegionLabel::V => Some(0),
        RegionLabel::Zero => Some(1),
        RegionLabel::Nv => Some(2),
        RegionLabel::NonPhysical => None,
    };
    let h = top / cells as f64;
    let mut s0 = 0.0;
    let mut l0 = chsh_label(c, s0);
    for j in 1..=cells {
        let s1 = if j == cells { top } else { j as f64 * h };
        let l1 = chsh_label(c, s1);
        if l0 == l1 {
            if let Some(k) = slot(l0) {
                out[k] += s1 - s0;
            }
        } else {
            let (mut lo, mut hi) = (s0, s1);
            for _ in 0..BISECT_STEPS {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if chsh_label(c, mid) == l0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let cut = 0.5 * (lo + hi);
            if let Some(k) = slot(l0) {
                out[k] += cut - s0;
            }
            if let Some(k) = slot(l1) {
                out[k] += s1 - cut;
            }
        }
        s0 = s1;
        l0 = l1;
    }
    out
}

/// CHSH region areas by a midpoint scan over `resolution` concurrence
/// columns. Columns are computed in parallel and summed in index order, so
/// the result is identical for any thread count.
pub fn chsh_region_areas(resolution: usize) -> Result<AreaReport> {
    if resolution < 2 {
        return Err(Error::InvalidArgument(format!(
            "resolution must be >= 2, got {resolution}"
        )));
    }
    let dc = 1.0 / resolution as f64;
    let columns: Vec<[f64; 3]> = (0..resolution)
        .into_par_iter()
        .map(|i| chsh_column((i as f64 + 0.5) * dc, resolution))
        .collect();
    let (mut v, mut zero, mut nv) = (0.0, 0.0, 0.0);
    for col in &columns {
        v += col[0] * dc;
        zero += col[1] * dc;
        nv += col[2] * dc;
    }
    let total = v + zero + nv;
    Ok(AreaReport::from_areas(
        format!("level-set extremization, {resolution}x{resolution} scan with bisection"),
        dc * dc,
        total,
        v,
        zero,
        nv,
    ))
}
