//! Validated two-qubit density matrices in the product basis
//! |00>, |01>, |10>, |11> (indices 0..3, first qubit is A).

use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matcore::{hermitian_eigen, CMatrix, HERMITIAN_TOL, JACOBI_TOL, PSD_CLAMP};

pub const TRACE_TOL: f64 = 1e-12;

fn validate(mat: &CMatrix) -> Result<Vec<f64>> {
    let deviation = mat.hermitian_deviation();
    if deviation > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    let trace = mat.trace().re;
    if (trace - 1.0).abs() > TRACE_TOL {
        return Err(Error::TraceNotOne { trace });
    }
    let eig = hermitian_eigen(mat, JACOBI_TOL)?;
    let min = *eig.eigenvalues.last().expect("non-empty spectrum");
    if min < -PSD_CLAMP {
        return Err(Error::NotPsd {
            min_eigenvalue: min,
        });
    }
    Ok(eig.eigenvalues)
}

/// A 4x4 density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    mat: CMatrix,
    spectrum: Vec<f64>,
}

impl DensityMatrix {
    pub fn new(mat: CMatrix) -> Result<Self> {
        if mat.dim() != 4 {
            return Err(Error::BadDimension(mat.dim()));
        }
        let spectrum = validate(&mat)?;
        Ok(Self { mat, spectrum })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    /// Eigenvalues, descending.
    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    pub fn maximally_mixed() -> Self {
        let mat = CMatrix::identity(4).expect("dim 4").scale(0.25);
        Self::new(mat).expect("maximally mixed state is valid")
    }

    /// Projector onto a normalized pure state given by four amplitudes.
    pub fn pure(amplitudes: [Complex64; 4]) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if norm.is_nan() || norm <= 0.0 || !norm.is_finite() {
            return Err(Error::InvalidArgument(
                "zero or non-finite state vector".into(),
            ));
        }
        let mut mat = CMatrix::zeros(4)?;
        for i in 0..4 {
            for j in 0..4 {
                mat[(i, j)] = amplitudes[i] * amplitudes[j].conj() / norm;
            }
        }
        Self::new(mat)
    }

    /// The Bell state (|00> + |11>)/sqrt 2.
    pub fn bell_phi_plus() -> Self {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let z = Complex64::new(0.0, 0.0);
        Self::pure([h, z, z, h]).expect("Bell state is valid")
    }
}

/// A 2x2 single-qubit reduced density matrix.
#[derive(Debug, Clone)]
pub struct ReducedDensity {
    mat: CMatrix,
    spectrum: Vec<f64>,
}

impl ReducedDensity {
    pub fn new(mat: CMatrix) -> Result<Self> {
        if mat.dim() != 2 {
            return Err(Error::BadDimension(mat.dim()));
        }
        let spectrum = validate(&mat)?;
        Ok(Self { mat, spectrum })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }
}

/// Validates a row-major 4x4 array as a density matrix.
pub fn make_density(entries: &[[Complex64; 4]; 4]) -> Result<DensityMatrix> {
    let flat: Vec<Complex64> = entries.iter().flatten().copied().collect();
    DensityMatrix::new(CMatrix::from_entries(&flat)?)
}

/// Traces out qubit B, giving rho_A[i][j] = sum_k rho[2i+k][2j+k].
pub fn partial_trace_b_out(rho: &DensityMatrix) -> ReducedDensity {
    let m = rho.matrix();
    let mut out = CMatrix::zeros(2).expect("dim 2");
    for i in 0..2 {
        for j in 0..2 {
            out[(i, j)] = (0..2).map(|k| m[(2 * i + k, 2 * j + k)]).sum();
        }
    }
    ReducedDensity::new(out).expect("partial trace of a valid state is valid")
}

/// Traces out qubit A, giving rho_B[k][l] = sum_i rho[2i+k][2i+l].
pub fn partial_trace_a_out(rho: &DensityMatrix) -> ReducedDensity {
    let m = rho.matrix();
    let mut out = CMatrix::zeros(2).expect("dim 2");
    for k in 0..2 {
        for l in 0..2 {
            out[(k, l)] = (0..2).map(|i| m[(2 * i + k, 2 * i + l)]).sum();
        }
    }
    ReducedDensity::new(out).expect("partial trace of a valid state is valid")
}

/// Transpose on the first qubit. For the PPT test the choice of subsystem
/// does not matter: both partial transposes share a spectrum.
pub fn partial_transpose(rho: &DensityMatrix) -> CMatrix {
    let m = rho.matrix();
    let mut out = *m;
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[(2 * i + k, 2 * j + l)] = m[(2 * j + k, 2 * i + l)];
                }
            }
        }
    }
    out
}

fn trace_of_square(m: &CMatrix) -> f64 {
    // Tr(M^2) = sum |M_ij|^2 for Hermitian M.
    m.entries().iter().map(|z| z.norm_sqr()).sum()
}

/// Tr(rho^2).
pub fn purity(rho: &DensityMatrix) -> f64 {
    trace_of_square(rho.matrix())
}

pub fn reduced_purity(rho: &ReducedDensity) -> f64 {
    trace_of_square(rho.matrix())
}

/// Normalized linear entropy (4/3)(1 - Tr rho^2), in [0, 1].
pub fn linear_entropy(rho: &DensityMatrix) -> f64 {
    4.0 / 3.0 * (1.0 - purity(rho))
}

/// Text form: four lines of four whitespace-separated `re,im` entries.
/// Blank lines and lines starting with `#` are skipped.
impl FromStr for DensityMatrix {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut rows: Vec<[Complex64; 4]> = Vec::with_capacity(4);
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let line_no = lineno + 1;
            if rows.len() == 4 {
                return Err(Error::Parse {
                    line: line_no,
                    field: 1,
                    message: "more than four matrix rows".into(),
                });
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 {
                return Err(Error::Parse {
                    line: line_no,
                    field: fields.len().min(4) + 1,
                    message: format!("expected 4 entries, found {}", fields.len()),
                });
            }
            let mut row = [Complex64::new(0.0, 0.0); 4];
            for (f, (slot, field)) in row.iter_mut().zip(&fields).enumerate() {
                *slot = parse_entry(field).map_err(|message| Error::Parse {
                    line: line_no,
                    field: f + 1,
                    message,
                })?;
            }
            rows.push(row);
        }
        if rows.len() != 4 {
            return Err(Error::Parse {
                line: text.lines().count(),
                field: 0,
                message: format!("expected 4 matrix rows, found {}", rows.len()),
            });
        }
        make_density(&[rows[0], rows[1], rows[2], rows[3]])
    }
}

fn parse_entry(field: &str) -> std::result::Result<Complex64, String> {
    let (re, im) = field
        .split_once(',')
        .ok_or_else(|| format!("entry `{field}` is not of the form re,im"))?;
    let parse = |s: &str| {
        s.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| format!("`{s}` is not a finite number"))
    };
    Ok(Complex64::new(parse(re)?, parse(im)?))
}

/// Inverse of the text form, 17 significant digits per component.
pub fn format_density(rho: &DensityMatrix) -> String {
    let m = rho.matrix();
    let mut out = String::new();
    for i in 0..4 {
        let row: Vec<String> = (0..4)
            .map(|j| format!("{:.16e},{:.16e}", m[(i, j)].re, m[(i, j)].im))
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}
