//! Entropies, concurrence and the per-state inequality tests.
//!
//! Logarithms are base 2 throughout. Tsallis entropies use the
//! `(1 - Tr rho^a) / (a - 1)` normalization, which makes them non-negative
//! and gives the conditional Tsallis entropy the same sign as the
//! conditional Renyi entropy for every `a > 0`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matcore::{
    hermitian_eigen, hermitian_eigenvalues_n, matrix_sqrt_psd, CMatrix, JACOBI_TOL, PSD_CLAMP,
};
use crate::qstate::{
    partial_trace_a_out, partial_trace_b_out, purity, reduced_purity, DensityMatrix, ReducedDensity,
};

/// A gap above this value counts as an entropic violation.
pub const VIOLATION_TOL: f64 = 1e-12;

/// Anything with a density-operator spectrum.
pub trait Spectral {
    /// Eigenvalues, descending.
    fn spectrum(&self) -> &[f64];
}

impl Spectral for DensityMatrix {
    fn spectrum(&self) -> &[f64] {
        DensityMatrix::spectrum(self)
    }
}

impl Spectral for ReducedDensity {
    fn spectrum(&self) -> &[f64] {
        ReducedDensity::spectrum(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyValue {
    pub alpha: f64,
    /// Bits.
    pub value: f64,
}

/// Tr(rho^alpha) over the clamped spectrum, with 0^alpha = 0 for alpha > 0.
pub fn power_trace<S: Spectral + ?Sized>(state: &S, alpha: f64) -> f64 {
    state
        .spectrum()
        .iter()
        .map(|&l| if l > 0.0 { l.powf(alpha) } else { 0.0 })
        .sum()
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(Error::Domain(format!(
            "entropic index must be finite and non-negative, got {alpha}"
        )));
    }
    Ok(())
}

fn check_tsallis_alpha(alpha: f64) -> Result<()> {
    check_alpha(alpha)?;
    if alpha == 0.0 || alpha == 1.0 {
        return Err(Error::Domain(format!(
            "Tsallis entropy needs alpha > 0 and alpha != 1, got {alpha}"
        )));
    }
    Ok(())
}

/// -sum lambda log2 lambda, with 0 log 0 = 0.
pub fn von_neumann<S: Spectral + ?Sized>(state: &S) -> f64 {
    let h: f64 = state
        .spectrum()
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| -l * l.log2())
        .sum();
    h.max(0.0)
}

/// Renyi entropy S_alpha in bits. alpha = 0 gives log2 of the rank
/// (eigenvalues above 1e-10), alpha = 1 the von Neumann entropy.
pub fn renyi<S: Spectral + ?Sized>(state: &S, alpha: f64) -> Result<EntropyValue> {
    check_alpha(alpha)?;
    let value = if alpha == 0.0 {
        let rank = state.spectrum().iter().filter(|&&l| l > PSD_CLAMP).count();
        (rank as f64).log2()
    } else if alpha == 1.0 {
        von_neumann(state)
    } else {
        power_trace(state, alpha).log2() / (1.0 - alpha)
    };
    Ok(EntropyValue { alpha, value })
}

/// Tsallis entropy (1 - Tr rho^alpha) / (alpha - 1).
pub fn tsallis<S: Spectral + ?Sized>(state: &S, alpha: f64) -> Result<f64> {
    check_tsallis_alpha(alpha)?;
    Ok((1.0 - power_trace(state, alpha)) / (alpha - 1.0))
}

/// S_alpha(B|A) = S_alpha(rho) - S_alpha(rho_A).
pub fn conditional_renyi(rho: &DensityMatrix, alpha: f64) -> Result<f64> {
    let rho_a = partial_trace_b_out(rho);
    Ok(renyi(rho, alpha)?.value - renyi(&rho_a, alpha)?.value)
}

/// T_alpha(B|A) = (Tr rho_A^alpha - Tr rho^alpha) / ((alpha - 1) Tr rho_A^alpha).
pub fn conditional_tsallis(rho: &DensityMatrix, alpha: f64) -> Result<f64> {
    check_tsallis_alpha(alpha)?;
    let rho_a = partial_trace_b_out(rho);
    let pa = power_trace(&rho_a, alpha);
    let p = power_trace(rho, alpha);
    Ok((pa - p) / ((alpha - 1.0) * pa))
}

/// Outcome of the quadratic entropic inequality Tr rho^2 <= Tr rho_X^2 for
/// both reductions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ViolationReport {
    /// Tr rho^2 - Tr rho_A^2.
    pub gap_a: f64,
    /// Tr rho^2 - Tr rho_B^2.
    pub gap_b: f64,
    pub violates_a: bool,
    pub violates_b: bool,
    pub violates_any: bool,
}

pub fn entropic_violation(rho: &DensityMatrix) -> ViolationReport {
    let p = purity(rho);
    let gap_a = p - reduced_purity(&partial_trace_b_out(rho));
    let gap_b = p - reduced_purity(&partial_trace_a_out(rho));
    let violates_a = gap_a > VIOLATION_TOL;
    let violates_b = gap_b > VIOLATION_TOL;
    ViolationReport {
        gap_a,
        gap_b,
        violates_a,
        violates_b,
        violates_any: violates_a || violates_b,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConcurrenceSpectrum {
    /// Square roots of the eigenvalues of rho rho~, descending.
    pub lambdas: [f64; 4],
    pub concurrence: f64,
}

fn sigma_y_sigma_y() -> CMatrix {
    let mut s = CMatrix::zeros(4).expect("dim 4");
    s[(0, 3)] = Complex64::new(-1.0, 0.0);
    s[(1, 2)] = Complex64::new(1.0, 0.0);
    s[(2, 1)] = Complex64::new(1.0, 0.0);
    s[(3, 0)] = Complex64::new(-1.0, 0.0);
    s
}

/// The spin-flipped state (sy x sy) rho* (sy x sy).
pub fn spin_flip(rho: &DensityMatrix) -> CMatrix {
    let s = sigma_y_sigma_y();
    &(&s * &rho.matrix().conj()) * &s
}

/// Wootters concurrence.
///
/// The lambdas are the singular values of the complex symmetric matrix
/// `sqrt(rho) (sy x sy) sqrt(rho)*`, whose Gram matrix is
/// `sqrt(rho) rho~ sqrt(rho)`. They are read off the real symmetric 8x8
/// embedding `[[Re, Im], [Im, -Re]]`, whose eigenvalues are the pairs
/// `+-lambda`; this keeps small lambdas accurate to rounding instead of to
/// its square root.
pub fn concurrence(rho: &DensityMatrix) -> ConcurrenceSpectrum {
    let root = matrix_sqrt_psd(rho.matrix()).expect("valid state has a square root");
    let s = sigma_y_sigma_y();
    let m = &(&root * &s) * &root.conj();

    let n = 8;
    let mut embed = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..4 {
        for j in 0..4 {
            let z = (m[(i, j)] + m[(j, i)]) * 0.5;
            embed[i * n + j] = Complex64::new(z.re, 0.0);
            embed[i * n + j + 4] = Complex64::new(z.im, 0.0);
            embed[(i + 4) * n + j] = Complex64::new(z.im, 0.0);
            embed[(i + 4) * n + j + 4] = Complex64::new(-z.re, 0.0);
        }
    }
    let vals = hermitian_eigenvalues_n(n, &embed, JACOBI_TOL).expect("Jacobi converges on 8x8");
    let mut lambdas = [0.0; 4];
    for (slot, v) in lambdas.iter_mut().zip(&vals) {
        *slot = v.max(0.0);
    }
    let sum: f64 = lambdas.iter().sum();
    let concurrence = (2.0 * lambdas[0] - sum).clamp(0.0, 1.0);
    ConcurrenceSpectrum {
        lambdas,
        concurrence,
    }
}

const X_STATE_TOL: f64 = 1e-12;

/// Closed-form concurrence of an X-shaped state from its diagonal
/// `[rho11, rho22, rho33, rho44]` and the anti-diagonal entries rho14, rho23:
/// `2 max(0, |rho23| - sqrt(rho11 rho44), |rho14| - sqrt(rho22 rho33))`.
pub fn concurrence_x_closed_form(
    diag: [f64; 4],
    rho14: Complex64,
    rho23: Complex64,
) -> Result<f64> {
    if diag.iter().any(|d| !d.is_finite()) || !rho14.norm().is_finite() || !rho23.norm().is_finite()
    {
        return Err(Error::InvalidState("non-finite entry".into()));
    }
    if let Some(d) = diag.iter().find(|&&d| d < -X_STATE_TOL) {
        return Err(Error::InvalidState(format!("negative diagonal entry {d}")));
    }
    let trace: f64 = diag.iter().sum();
    if (trace - 1.0).abs() > X_STATE_TOL {
        return Err(Error::InvalidState(format!("trace {trace}")));
    }
    let [d1, d2, d3, d4] = diag.map(|d| d.max(0.0));
    let outer = d1 * d4 - rho14.norm_sqr();
    let inner = d2 * d3 - rho23.norm_sqr();
    if outer < -X_STATE_TOL || inner < -X_STATE_TOL {
        return Err(Error::InvalidState(format!(
            "coherence block not positive (det {outer:e}, {inner:e})"
        )));
    }
    let c1 = rho23.norm() - (d1 * d4).sqrt();
    let c2 = rho14.norm() - (d2 * d3).sqrt();
    Ok(2.0 * 0.0_f64.max(c1).max(c2))
}

/// Pauli matrices x, y, z.
fn paulis() -> [CMatrix; 3] {
    let z0 = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    [
        CMatrix::from_entries(&[z0, one, one, z0]).expect("2x2"),
        CMatrix::from_entries(&[z0, -i, i, z0]).expect("2x2"),
        CMatrix::from_entries(&[one, z0, z0, -one]).expect("2x2"),
    ]
}

/// Correlation matrix T_ij = Tr(rho sigma_i x sigma_j).
pub fn correlation_matrix(rho: &DensityMatrix) -> [[f64; 3]; 3] {
    let p = paulis();
    let m = rho.matrix();
    let mut t = [[0.0; 3]; 3];
    for (i, si) in p.iter().enumerate() {
        for (j, sj) in p.iter().enumerate() {
            let op = CMatrix::kron(si, sj).expect("2x2 factors");
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..4 {
                for l in 0..4 {
                    acc += m[(k, l)] * op[(l, k)];
                }
            }
            t[i][j] = acc.re;
        }
    }
    t
}

/// Maximal CHSH expectation 2 sqrt(m1 + m2), where m1 >= m2 are the two
/// largest eigenvalues of T^T T. CHSH is violated when this exceeds 2.
pub fn chsh_max(rho: &DensityMatrix) -> f64 {
    let t = correlation_matrix(rho);
    let mut ttt = CMatrix::zeros(4).expect("dim 4");
    for i in 0..3 {
        for j in 0..3 {
            let v: f64 = (0..3).map(|k| t[k][i] * t[k][j]).sum();
            ttt[(i, j)] = Complex64::new(v, 0.0);
        }
    }
    // The padding row and column add a zero eigenvalue, which never ranks
    // above the two largest of a PSD matrix.
    let eig = hermitian_eigen(&ttt, JACOBI_TOL).expect("T^T T is symmetric");
    let m = (eig.eigenvalues[0] + eig.eigenvalues[1]).max(0.0);
    2.0 * m.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::make_density;

    fn r(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn e0(a: f64, b: f64, c: f64, theta: f64) -> DensityMatrix {
        let mut m = [[r(0.0); 4]; 4];
        m[1][1] = r(a);
        m[2][2] = r(b);
        m[3][3] = r(1.0 - a - b);
        m[1][2] = Complex64::from_polar(c / 2.0, theta);
        m[2][1] = Complex64::from_polar(c / 2.0, -theta);
        make_density(&m).unwrap()
    }

    fn mems1(c: f64) -> DensityMatrix {
        e0(c / 2.0, c / 2.0, c, 0.0)
    }

    fn product_state() -> DensityMatrix {
        // (cos t |0> + sin t |1>) x |1>
        let (s, c) = 0.3_f64.sin_cos();
        let z = r(0.0);
        DensityMatrix::pure([z, r(c), z, r(s)]).unwrap()
    }

    #[test]
    fn renyi_examples() {
        let mixed = DensityMatrix::maximally_mixed();
        assert!((renyi(&mixed, 2.0).unwrap().value - 2.0).abs() < 1e-14);
        let bell = DensityMatrix::bell_phi_plus();
        for alpha in [0.5, 2.0, 3.0, 7.5] {
            assert!(renyi(&bell, alpha).unwrap().value.abs() < 1e-12);
        }
        assert_eq!(renyi(&bell, 0.0).unwrap().value, 0.0);
        assert_eq!(renyi(&mixed, 0.0).unwrap().value, 2.0);
        let s2 = renyi(&mems1(0.7), 2.0).unwrap().value;
        assert!((s2 + 0.58_f64.log2()).abs() < 1e-14);
        assert!((s2 - 0.785875).abs() < 1e-6);
    }

    #[test]
    fn negative_alpha_rejected() {
        let mixed = DensityMatrix::maximally_mixed();
        assert!(matches!(renyi(&mixed, -0.5), Err(Error::Domain(_))));
        assert!(tsallis(&mixed, 1.0).is_err());
        assert!(conditional_tsallis(&mixed, -2.0).is_err());
        assert!(conditional_renyi(&mixed, -2.0).is_err());
    }

    #[test]
    fn von_neumann_examples() {
        assert!((von_neumann(&DensityMatrix::maximally_mixed()) - 2.0).abs() < 1e-14);
        let bell = DensityMatrix::bell_phi_plus();
        assert!(von_neumann(&bell).abs() < 1e-12);
        assert!((von_neumann(&partial_trace_b_out(&bell)) - 1.0).abs() < 1e-14);
        let half = make_density(&{
            let mut m = [[r(0.0); 4]; 4];
            m[0][0] = r(0.5);
            m[1][1] = r(0.5);
            m
        })
        .unwrap();
        assert!((von_neumann(&half) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn tsallis_and_conditionals() {
        let prod = product_state();
        assert!(tsallis(&prod, 2.0).unwrap().abs() < 1e-12);
        assert!(conditional_tsallis(&prod, 2.0).unwrap().abs() < 1e-12);
        assert!(conditional_renyi(&prod, 2.0).unwrap().abs() < 1e-12);

        let bell = DensityMatrix::bell_phi_plus();
        assert!((conditional_renyi(&bell, 2.0).unwrap() + 1.0).abs() < 1e-12);
        // (1/2 - 1) / (1 * 1/2)
        assert!((conditional_tsallis(&bell, 2.0).unwrap() + 1.0).abs() < 1e-12);

        // Separable: both conditionals non-negative.
        let mixed = DensityMatrix::maximally_mixed();
        assert!((conditional_tsallis(&mixed, 2.0).unwrap() - 0.5).abs() < 1e-14);
        assert!((conditional_renyi(&mixed, 2.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((tsallis(&mixed, 2.0).unwrap() - 0.75).abs() < 1e-14);
    }

    #[test]
    fn violation_examples() {
        let v = entropic_violation(&DensityMatrix::maximally_mixed());
        assert!((v.gap_a + 0.25).abs() < 1e-15);
        assert!(!v.violates_any);
        let v = entropic_violation(&DensityMatrix::bell_phi_plus());
        assert!((v.gap_a - 0.5).abs() < 1e-14);
        assert!(v.violates_a && v.violates_b && v.violates_any);
        for c in [0.5, 2.0 / 3.0 + 1e-3, 0.7, 0.9, 1.0] {
            let v = entropic_violation(&mems1(c));
            assert!((v.gap_a - (1.5 * c * c - c)).abs() < 1e-14);
            assert_eq!(v.violates_a, c > 2.0 / 3.0);
        }
    }

    #[test]
    fn concurrence_examples() {
        assert!((concurrence(&DensityMatrix::bell_phi_plus()).concurrence - 1.0).abs() < 1e-14);
        assert_eq!(concurrence(&product_state()).concurrence, 0.0);
        assert_eq!(
            concurrence(&DensityMatrix::maximally_mixed()).concurrence,
            0.0
        );
        for &(a, b, c, th) in &[
            (0.35, 0.35, 0.7, 0.0),
            (0.3, 0.45, 0.5, 1.1),
            (0.2, 0.6, 0.4, 4.0),
        ] {
            let cs = concurrence(&e0(a, b, c, th));
            assert!((cs.concurrence - c).abs() < 1e-12, "{cs:?}");
        }
    }

    #[test]
    fn lambdas_square_to_spin_flip_spectrum() {
        let rho = e0(0.3, 0.45, 0.5, 0.4);
        let root = matrix_sqrt_psd(rho.matrix()).unwrap();
        let r = &(&root * &spin_flip(&rho)) * &root;
        let eig = hermitian_eigen(&r, JACOBI_TOL).unwrap();
        let cs = concurrence(&rho);
        for (l, mu) in cs.lambdas.iter().zip(&eig.eigenvalues) {
            assert!((l * l - mu).abs() < 1e-12);
        }
    }

    #[test]
    fn x_closed_form_examples() {
        let c = 0.6;
        let v = concurrence_x_closed_form(
            [0.0, 0.4, 0.35, 0.25],
            r(0.0),
            Complex64::from_polar(c / 2.0, 0.3),
        )
        .unwrap();
        assert!((v - c).abs() < 1e-15);
        // Outer block: d - 2 sqrt(ab) = 0.5 - 0.08.
        let v = concurrence_x_closed_form([0.46, 0.04, 0.04, 0.46], r(0.25), r(0.0)).unwrap();
        assert!((v - 0.42).abs() < 1e-15);
        assert_eq!(
            concurrence_x_closed_form([0.1, 0.2, 0.3, 0.4], r(0.0), r(0.0)).unwrap(),
            0.0
        );
        assert!(matches!(
            concurrence_x_closed_form([0.0, 0.1, 0.1, 0.8], r(0.0), r(0.25)),
            Err(Error::InvalidState(_))
        ));
        assert!(concurrence_x_closed_form([0.5, 0.5, 0.5, 0.0], r(0.0), r(0.0)).is_err());
    }

    #[test]
    fn chsh_examples() {
        let bell = chsh_max(&DensityMatrix::bell_phi_plus());
        assert!((bell - 2.0 * 2.0_f64.sqrt()).abs() < 1e-12);
        assert!(chsh_max(&DensityMatrix::maximally_mixed()).abs() < 1e-12);
        let m = chsh_max(&mems1(0.7));
        assert!((m - 2.0 * 0.98_f64.sqrt()).abs() < 1e-12);
        assert!(m < 2.0);
    }

    #[test]
    fn e0_correlation_spectrum() {
        let (a, b, c) = (0.3, 0.45, 0.5);
        let t = correlation_matrix(&e0(a, b, c, 0.9));
        let zz = 1.0 - 2.0 * (a + b);
        assert!((t[2][2] - zz).abs() < 1e-15);
        let xy_block = t[0][0].powi(2) + t[0][1].powi(2) + t[1][0].powi(2) + t[1][1].powi(2);
        assert!((xy_block - 2.0 * c * c).abs() < 1e-14);
    }
}
