//! The self-verification suite behind `entroplane verify` and the
//! acceptance tests. Each criterion returns a named pass/fail outcome with
//! a short human-readable detail line.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::experiment::{for_each_batch, run_sample, Family, SampleConfig, SampleRecord};
use crate::families::{
    e0_state, e1_state, mems1, sample_e0, sample_e1, sample_full_rank, sample_separable, RngStream,
};
use crate::matcore::{hermitian_eigen, JACOBI_TOL};
use crate::measures::{
    chsh_max, concurrence, concurrence_x_closed_form, conditional_renyi, conditional_tsallis,
    entropic_violation, von_neumann,
};
use crate::plane::{
    chsh_region_areas, classify_chsh, classify_entropic_with, entropic_region_areas_with,
    frontier_mems, nv_lower, s_l_minus, s_l_plus, BoundaryCurves, PlanePoint, RegionLabel,
};
use crate::qstate::{partial_trace_a_out, partial_trace_b_out, partial_transpose, DensityMatrix};

/// Published reference percentages being reproduced: V, Zero, NV.
pub const REFERENCE_ENTROPIC: [f64; 3] = [28.390, 58.155, 13.455];
pub const REFERENCE_CHSH: [f64; 3] = [26.577, 54.788, 18.635];
pub const ENTROPIC_PP_TOL: f64 = 0.05;
pub const CHSH_PP_TOL: f64 = 0.3;
/// Exact V_E percentage from the closed-form antiderivatives.
pub const EXACT_V_PERCENT: f64 = 28.386_936_174_782_524;
pub const AREA_QUAD_TOL: f64 = 1e-10;
pub const CHSH_RESOLUTION: usize = 1000;
pub const BOUNDARY_BAND: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct CriterionOutcome {
    pub id: String,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl fmt::Display for CriterionOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {} {} ({:.2} s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.detail
        )
    }
}

/// Knobs of a verification run. `sample_divisor` > 1 shrinks every Monte
/// Carlo count for smoke runs; acceptance uses 1.
#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub curves: BoundaryCurves,
    pub sample_divisor: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            curves: BoundaryCurves::default(),
            sample_divisor: 1,
        }
    }
}

impl VerifyOptions {
    fn count(&self, n: u64) -> u64 {
        (n / self.sample_divisor).max(1)
    }
}

/// Replacement for `s_l_plus` with a wrong constant, for fault injection.
pub fn corrupted_s_l_plus(c: f64) -> f64 {
    (1.0 + c * c + (1.0 - 2.0 * c * c).max(0.0).sqrt()) / 2.9
}

pub fn corrupted_curves() -> BoundaryCurves {
    BoundaryCurves {
        s_l_plus: corrupted_s_l_plus,
        ..BoundaryCurves::default()
    }
}

fn timed(
    id: &str,
    name: &str,
    limit: Option<Duration>,
    f: impl FnOnce() -> (bool, String),
) -> CriterionOutcome {
    let t = Instant::now();
    let (mut passed, mut detail) = f();
    let elapsed = t.elapsed();
    if let Some(limit) = limit {
        if elapsed > limit {
            passed = false;
            detail = format!(
                "{detail}; runtime {:.1} s exceeds {:.0} s",
                elapsed.as_secs_f64(),
                limit.as_secs_f64()
            );
        }
    }
    CriterionOutcome {
        id: id.to_string(),
        name: name.to_string(),
        passed,
        detail,
        seconds: elapsed.as_secs_f64(),
    }
}

fn failed(e: impl fmt::Display) -> (bool, String) {
    (false, format!("error: {e}"))
}

fn rel_err(got: f64, want: f64) -> f64 {
    ((got - want) / want).abs()
}

pub fn entropic_areas(opts: &VerifyOptions) -> CriterionOutcome {
    timed(
        "1",
        "entropic region areas",
        Some(Duration::from_secs(5)),
        || {
            let rep = match entropic_region_areas_with(&opts.curves, AREA_QUAD_TOL) {
                Ok(r) => r,
                Err(e) => return failed(e),
            };
            let got = [rep.v_percent, rep.zero_percent, rep.nv_percent];
            let reference_ok = got
                .iter()
                .zip(REFERENCE_ENTROPIC)
                .all(|(g, p)| (g - p).abs() <= ENTROPIC_PP_TOL);
            let total_ok = rel_err(rep.total_area, 52.0 / 81.0) <= 1e-6;
            let nv_ok = rel_err(rep.nv_percent, 700.0 / 52.0) <= 1e-6;
            let v_ok = rel_err(rep.v_percent, EXACT_V_PERCENT) <= 1e-6;
            let sum_ok = (got.iter().sum::<f64>() - 100.0).abs() <= 2.0 * ENTROPIC_PP_TOL;
            (
            reference_ok && total_ok && nv_ok && v_ok && sum_ok,
            format!(
                "V/Zero/NV = {:.4}/{:.4}/{:.4} % (printed {:.3}/{:.3}/{:.3}, +-{} pp: {}); total {:.10} vs 52/81: {}; NV vs 7/52: {}; V vs exact: {}; sum: {}",
                got[0], got[1], got[2], REFERENCE_ENTROPIC[0], REFERENCE_ENTROPIC[1], REFERENCE_ENTROPIC[2],
                ENTROPIC_PP_TOL, ok(reference_ok), rep.total_area, ok(total_ok), ok(nv_ok), ok(v_ok), ok(sum_ok)
            ),
        )
        },
    )
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "FAIL"
    }
}

pub fn chsh_areas(_opts: &VerifyOptions) -> CriterionOutcome {
    timed(
        "2",
        "CHSH region areas",
        Some(Duration::from_secs(60)),
        || {
            let rep = match chsh_region_areas(CHSH_RESOLUTION) {
                Ok(r) => r,
                Err(e) => return failed(e),
            };
            let got = [rep.v_percent, rep.zero_percent, rep.nv_percent];
            let pass = got
                .iter()
                .zip(REFERENCE_CHSH)
                .all(|(g, p)| (g - p).abs() <= CHSH_PP_TOL);
            (
                pass,
                format!(
                    "V/Zero/NV = {:.4}/{:.4}/{:.4} % vs printed {:.3}/{:.3}/{:.3} (+-{} pp)",
                    got[0],
                    got[1],
                    got[2],
                    REFERENCE_CHSH[0],
                    REFERENCE_CHSH[1],
                    REFERENCE_CHSH[2],
                    CHSH_PP_TOL
                ),
            )
        },
    )
}

pub fn mems1_in_toto(opts: &VerifyOptions) -> CriterionOutcome {
    timed(
        "3",
        "MEMS I branch: entropic violation without CHSH violation",
        None,
        || {
            let lo = 2.0 / 3.0;
            let mut worst_gap = 0.0_f64;
            let mut worst_chsh = 0.0_f64;
            let mut bad = Vec::new();
            for k in 1..=1000 {
                let c = lo + (FRAC_1_SQRT_2 - lo) * k as f64 / 1000.0;
                let rho = match mems1(c, 0.0) {
                    Ok(r) => r,
                    Err(e) => return failed(e),
                };
                let gap = entropic_violation(&rho).gap_a;
                let chsh = chsh_max(&rho);
                let want_gap = 1.5 * c * c - c;
                let want_chsh = 2.0 * (2.0 * c * c).sqrt();
                worst_gap = worst_gap.max((gap - want_gap).abs());
                worst_chsh = worst_chsh.max((chsh - want_chsh).abs());
                let s = 8.0 / 3.0 * c * (1.0 - c);
                let entropic = classify_entropic_with(&opts.curves, PlanePoint::new(c, s));
                let bell = classify_chsh(PlanePoint::new(c, s), 1e-12);
                let good = gap > 0.0
                    && chsh <= 2.0 + 1e-12
                    && entropic == RegionLabel::V
                    && !matches!(bell, Ok(RegionLabel::V));
                if !good && bad.len() < 3 {
                    bad.push(format!(
                        "c={c:.6} gap={gap:.3e} chsh={chsh:.12} region={entropic}"
                    ));
                }
            }
            let pass = bad.is_empty() && worst_gap <= 1e-12 && worst_chsh <= 1e-12;
            (
            pass,
            format!(
                "1000 grid points; max |gap_a - (3/2 c^2 - c)| = {worst_gap:.2e}, max |chsh - 2 sqrt(2) c| = {worst_chsh:.2e}{}",
                if bad.is_empty() { String::new() } else { format!("; failures: {}", bad.join(", ")) }
            ),
        )
        },
    )
}

pub fn curve_anchors(opts: &VerifyOptions) -> CriterionOutcome {
    timed("4", "boundary curve anchors", None, || {
        let r = FRAC_1_SQRT_2;
        let cv = &opts.curves;
        let mut checks: Vec<(&str, f64, f64)> = vec![
            ("S_L-(1/sqrt2)", (cv.s_l_minus)(r), 0.5),
            ("S_L+(1/sqrt2)", (cv.s_l_plus)(r), 0.5),
            ("S_L1(1/2)", (cv.s_l1)(0.5), 2.0 / 3.0),
            ("S_L1(2/3)", (cv.s_l1)(2.0 / 3.0), 16.0 / 27.0),
            ("S_L2(2/3)", (cv.s_l2)(2.0 / 3.0), 16.0 / 27.0),
            ("S_L-(0)", (cv.s_l_minus)(0.0), 0.0),
        ];
        // Library entry points agree with the curve table.
        let lib = [
            ("s_l_minus(1/sqrt2)", s_l_minus(r), 0.5),
            ("s_l_plus(1/sqrt2)", s_l_plus(r), 0.5),
            ("frontier(2/3)", frontier_mems(2.0 / 3.0), 16.0 / 27.0),
            ("s_l_minus(0)", s_l_minus(0.0), 0.0),
        ];
        for (n, v, w) in lib {
            match v {
                Ok(v) => checks.push((n, v, w)),
                Err(e) => return failed(e),
            }
        }
        let below = nv_lower(0.5 - 1e-15).unwrap_or(f64::NAN);
        let at = nv_lower(0.5).unwrap_or(f64::NAN);
        checks.push(("NV lower bound continuity at 1/2", below - at, 0.0));
        let eps = 1e-9;
        checks.push((
            "frontier continuity at 2/3",
            (cv.s_l1)(2.0 / 3.0 + eps) - (cv.s_l2)(2.0 / 3.0 - eps),
            0.0,
        ));
        let bad: Vec<String> = checks
            .iter()
            .filter(|(n, v, w)| {
                let tol = if n.starts_with("frontier continuity") {
                    1e-8
                } else {
                    1e-12
                };
                (v - w).abs().is_nan() || (v - w).abs() > tol
            })
            .map(|(n, v, w)| format!("{n} = {v} (want {w})"))
            .collect();
        (
            bad.is_empty(),
            if bad.is_empty() {
                format!("{} anchors within 1e-12", checks.len())
            } else {
                bad.join("; ")
            },
        )
    })
}

/// Whether the label is stable under 1e-9 moves of c and s. Moves that
/// leave the physical region are ignored, and the c = 0 column (separable
/// states, its own NV_E segment) is only moved along s.
fn off_boundary(curves: &BoundaryCurves, c: f64, s: f64, label: RegionLabel) -> bool {
    let d = BOUNDARY_BAND;
    let moves: &[(f64, f64)] = if c == 0.0 {
        &[(0.0, -d), (0.0, d)]
    } else {
        &[(-d, 0.0), (d, 0.0), (0.0, -d), (0.0, d)]
    };
    moves.iter().all(|&(dc, ds)| {
        let l = classify_entropic_with(curves, PlanePoint::new(c + dc, s + ds));
        l == label || l == RegionLabel::NonPhysical
    })
}

#[derive(Default)]
struct ConsistencyTally {
    checked: u64,
    banded: u64,
    v: u64,
    nv: u64,
    contradictions: u64,
    example: Option<String>,
}

fn consistency_scan(
    opts: &VerifyOptions,
    family: Family,
    seed: u64,
    n: u64,
    t: &mut ConsistencyTally,
) -> Result<()> {
    let cfg = SampleConfig {
        family,
        n,
        seed,
        streams: 8,
    };
    for_each_batch(&cfg, |batch| {
        for r in batch {
            t.checked += 1;
            let label = classify_entropic_with(&opts.curves, PlanePoint::new(r.c, r.s));
            if !off_boundary(&opts.curves, r.c, r.s, label) {
                t.banded += 1;
                continue;
            }
            let violates = entropic_violation_flag(r);
            let contradiction = match label {
                RegionLabel::V => {
                    t.v += 1;
                    !violates
                }
                RegionLabel::Nv => {
                    t.nv += 1;
                    violates
                }
                _ => false,
            };
            if contradiction {
                t.contradictions += 1;
                t.example.get_or_insert_with(|| {
                    format!(
                        "{family} c={:.6} s={:.6} gap_a={:.3e} region={label}",
                        r.c, r.s, r.gap_a
                    )
                });
            }
        }
        Ok(())
    })
}

fn entropic_violation_flag(r: &SampleRecord) -> bool {
    r.gap_a > crate::measures::VIOLATION_TOL
}

pub fn classifier_consistency(opts: &VerifyOptions) -> CriterionOutcome {
    timed(
        "5",
        "region classifier vs per-state verdict",
        Some(Duration::from_secs(180)),
        || {
            let n = opts.count(1_000_000);
            let mut t = ConsistencyTally::default();
            for (family, seed) in [(Family::E0, 2015), (Family::E1, 2016)] {
                if let Err(e) = consistency_scan(opts, family, seed, n, &mut t) {
                    return failed(e);
                }
            }
            (
            t.contradictions == 0,
            format!(
                "{} E0 + {} E1 states; {} in V_E, {} in NV_E, {} within the {BOUNDARY_BAND:e} band; {} contradictions{}",
                n,
                n,
                t.v,
                t.nv,
                t.banded,
                t.contradictions,
                t.example.map(|e| format!(" (first: {e})")).unwrap_or_default()
            ),
        )
        },
    )
}

/// Runs `check` on `n` states drawn from independent streams of `seed` in
/// parallel; returns (failures, first failure message).
fn par_check<F>(n: u64, seed: u64, check: F) -> (u64, Option<String>)
where
    F: Fn(&mut RngStream) -> std::result::Result<(), String> + Sync,
{
    const CHUNK: u64 = 1000;
    let chunks = n.div_ceil(CHUNK);
    let results: Vec<(u64, Option<String>)> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = RngStream::new(seed, k);
            let mut fails = 0;
            let mut first = None;
            for _ in 0..CHUNK.min(n - k * CHUNK) {
                if let Err(msg) = check(&mut rng) {
                    fails += 1;
                    first.get_or_insert(msg);
                }
            }
            (fails, first)
        })
        .collect();
    results
        .into_iter()
        .fold((0, None), |(f, first), (g, m)| (f + g, first.or(m)))
}

fn summarize(label: &str, n: u64, (fails, first): (u64, Option<String>)) -> (bool, String) {
    (
        fails == 0,
        format!(
            "{label}: {fails}/{n} failures{}",
            first.map(|m| format!(" (first: {m})")).unwrap_or_default()
        ),
    )
}

fn x_closed_form(rho: &DensityMatrix) -> Result<f64> {
    let m = rho.matrix();
    concurrence_x_closed_form(
        [m[(0, 0)].re, m[(1, 1)].re, m[(2, 2)].re, m[(3, 3)].re],
        m[(0, 3)],
        m[(1, 2)],
    )
}

fn property_a(n: u64) -> (bool, String) {
    let res = par_check(n, 61, |rng| {
        let rho = if rng.uniform() < 0.5 {
            e0_state(&sample_e0(rng))
        } else {
            e1_state(&sample_e1(rng))
        }
        .map_err(|e| e.to_string())?;
        let general = concurrence(&rho).concurrence;
        let closed = x_closed_form(&rho).map_err(|e| e.to_string())?;
        if (general - closed).abs() <= 1e-10 {
            Ok(())
        } else {
            Err(format!("general {general} vs closed form {closed}"))
        }
    });
    summarize("(a) general vs X closed form", n, res)
}

fn property_b(n: u64) -> (bool, String) {
    let res = par_check(n, 62, |rng| {
        let p = sample_e0(rng);
        let rho = e0_state(&p).map_err(|e| e.to_string())?;
        let c = concurrence(&rho).concurrence;
        if (c - p.c).abs() <= 1e-10 {
            Ok(())
        } else {
            Err(format!("C = {c} vs c = {}", p.c))
        }
    });
    summarize("(b) E0 concurrence = c", n, res)
}

fn property_c(n: u64) -> (bool, String) {
    let res = par_check(n, 63, |rng| {
        let rho = sample_full_rank(rng);
        let pt = partial_transpose(&rho);
        let min = hermitian_eigen(&pt, JACOBI_TOL)
            .map_err(|e| e.to_string())?
            .eigenvalues
            .last()
            .copied()
            .unwrap_or(f64::NAN);
        let c = concurrence(&rho).concurrence;
        if (min >= -1e-10) == (c <= 1e-8) {
            Ok(())
        } else {
            Err(format!("min PT eigenvalue {min:e}, concurrence {c:e}"))
        }
    });
    summarize("(c) PPT <=> C = 0", n, res)
}

fn property_d(n: u64) -> (bool, String) {
    let res = par_check(n, 64, |rng| {
        let rho = sample_separable(rng);
        let v = entropic_violation(&rho);
        let s = von_neumann(&rho);
        let sa = von_neumann(&partial_trace_b_out(&rho));
        let sb = von_neumann(&partial_trace_a_out(&rho));
        if v.violates_any {
            Err(format!(
                "separable state violates (gaps {:e}, {:e})",
                v.gap_a, v.gap_b
            ))
        } else if s < sa.max(sb) - 1e-10 {
            Err(format!("S = {s} < max(S_A, S_B) = {}", sa.max(sb)))
        } else {
            Ok(())
        }
    });
    summarize("(d) separable soundness", n, res)
}

fn sign_of(x: f64) -> i8 {
    if x > 1e-12 {
        1
    } else if x < -1e-12 {
        -1
    } else {
        0
    }
}

fn property_e(n: u64) -> (bool, String) {
    let res = par_check(n, 65, |rng| {
        let rho = match rng.below(3) {
            0 => e1_state(&sample_e1(rng)).map_err(|e| e.to_string())?,
            1 => sample_full_rank(rng),
            _ => sample_separable(rng),
        };
        let gap = entropic_violation(&rho).gap_a;
        let r = conditional_renyi(&rho, 2.0).map_err(|e| e.to_string())?;
        let t = conditional_tsallis(&rho, 2.0).map_err(|e| e.to_string())?;
        let g = -sign_of(gap);
        // Inside the rounding band only a consistent zero is required.
        if g == 0 || (sign_of(r) == g && sign_of(t) == g) {
            Ok(())
        } else {
            Err(format!("gap {gap:e}, S2(B|A) {r:e}, T2(B|A) {t:e}"))
        }
    });
    summarize("(e) sign equivalence", n, res)
}

fn property_f(n: u64) -> (bool, String) {
    let res = par_check(n, 66, |rng| {
        let rho = if rng.uniform() < 0.5 {
            e0_state(&sample_e0(rng))
        } else {
            e1_state(&sample_e1(rng))
        }
        .map_err(|e| e.to_string())?;
        let chsh = chsh_max(&rho);
        if chsh > 2.0 + 1e-9 && !entropic_violation(&rho).violates_any {
            Err(format!("CHSH {chsh} without entropic violation"))
        } else {
            Ok(())
        }
    });
    summarize("(f) CHSH violation => entropic violation", n, res)
}

pub fn property_suites(opts: &VerifyOptions) -> CriterionOutcome {
    timed("6", "property suites", None, || {
        let small = opts.count(100_000);
        let large = opts.count(1_000_000);
        let parts = [
            property_a(small),
            property_b(small),
            property_c(small),
            property_d(small),
            property_e(small),
            property_f(large),
        ];
        let pass = parts.iter().all(|(p, _)| *p);
        (
            pass,
            parts
                .iter()
                .map(|(_, d)| d.as_str())
                .collect::<Vec<_>>()
                .join("; "),
        )
    })
}

pub const DETERMINISM_N: u64 = 100_000;
pub const DETERMINISM_SEED: u64 = 7;
pub const DETERMINISM_STREAMS: u64 = 4;

pub fn determinism(opts: &VerifyOptions) -> CriterionOutcome {
    timed("7", "sampling determinism", None, || {
        let cfg = SampleConfig {
            family: Family::E1,
            n: opts.count(DETERMINISM_N),
            seed: DETERMINISM_SEED,
            streams: DETERMINISM_STREAMS,
        };
        let first = run_sample(&cfg, std::io::sink());
        let second = run_sample(&cfg, std::io::sink());
        match (first, second) {
            (Ok(a), Ok(b)) => (
                a.csv_sha256 == b.csv_sha256,
                format!(
                    "{} rows, SHA-256 {} / {}",
                    cfg.n,
                    &a.csv_sha256[..16],
                    &b.csv_sha256[..16]
                ),
            ),
            (Err(e), _) | (_, Err(e)) => failed(e),
        }
    })
}

/// Runs every criterion in order.
pub fn run_all(opts: &VerifyOptions) -> Vec<CriterionOutcome> {
    vec![
        entropic_areas(opts),
        chsh_areas(opts),
        mems1_in_toto(opts),
        curve_anchors(opts),
        classifier_consistency(opts),
        property_suites(opts),
        determinism(opts),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fault_injection_fails_area_check() {
        let good = entropic_areas(&VerifyOptions::default());
        assert!(good.passed, "{good}");
        let bad = entropic_areas(&VerifyOptions {
            curves: corrupted_curves(),
            sample_divisor: 1,
        });
        assert!(!bad.passed);
        assert_eq!(bad.id, "1");
    }

    #[test]
    fn anchors_pass() {
        let o = curve_anchors(&VerifyOptions::default());
        assert!(o.passed, "{o}");
    }
}
