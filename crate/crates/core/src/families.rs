//! Parametric state classes E0 and E1, the two MEMS branches, and seeded
//! samplers.
//!
//! E0 states carry a single coherence between |01> and |10>:
//!
//! ```text
//! | 0   0          0         0     |
//! | 0   a          c/2 e^{it} 0     |
//! | 0   c/2 e^{-it} b         0     |
//! | 0   0          0         1-a-b |
//! ```
//!
//! E1 adds weight `f` on |00> and a second coherence `d/2 e^{i phi}` between
//! |00> and |11>. Both are X-shaped, so positivity reduces to the two 2x2
//! block conditions `ab >= c^2/4` and `f g >= d^2/4` with `g = 1 - a - b - f`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matcore::CMatrix;
use crate::qstate::DensityMatrix;

/// Identifier recorded in run manifests for the sampling algorithm.
pub const SAMPLER_ID: &str = "chacha8-seed_from_u64+set_stream/v1";

/// Slack on the block positivity conditions, for parameters assembled in
/// double precision.
const PARAM_TOL: f64 = 1e-14;

/// Deterministic random stream: one ChaCha8 stream per `(seed, stream_index)`.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_index: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_index);
        Self {
            seed,
            stream_index,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    /// Uniform on [0, 1).
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn below(&mut self, n: u32) -> u32 {
        self.rng.random_range(0..n)
    }

    fn phase(&mut self) -> f64 {
        TAU * self.uniform()
    }
}

fn normalize_phase(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

fn finite(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidParams(format!("{name} is not finite")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct E0Params {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Radians, normalized into [0, 2 pi).
    pub theta: f64,
}

impl E0Params {
    pub fn new(a: f64, b: f64, c: f64, theta: f64) -> Result<Self> {
        let p = Self {
            a: finite("a", a)?,
            b: finite("b", b)?,
            c: finite("c", c)?,
            theta: normalize_phase(finite("theta", theta)?),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let Self { a, b, c, .. } = *self;
        if a < 0.0 || b < 0.0 {
            return Err(Error::InvalidParams(format!(
                "a, b must be >= 0 (a={a}, b={b})"
            )));
        }
        if a + b > 1.0 + PARAM_TOL {
            return Err(Error::InvalidParams(format!("a + b = {} exceeds 1", a + b)));
        }
        if !(0.0..=1.0).contains(&c) {
            return Err(Error::InvalidParams(format!("c = {c} outside [0, 1]")));
        }
        if a * b < c * c / 4.0 - PARAM_TOL {
            return Err(Error::InvalidParams(format!(
                "ab = {} < c^2/4 = {}",
                a * b,
                c * c / 4.0
            )));
        }
        Ok(())
    }

    pub fn as_vec(&self) -> Vec<f64> {
        vec![self.a, self.b, self.c, self.theta]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct E1Params {
    pub a: f64,
    pub b: f64,
    pub f: f64,
    pub c: f64,
    pub d: f64,
    pub theta: f64,
    pub phi: f64,
}

impl E1Params {
    #[allow(clippy::too_many_arguments)]
    pub fn new(a: f64, b: f64, f: f64, c: f64, d: f64, theta: f64, phi: f64) -> Result<Self> {
        let p = Self {
            a: finite("a", a)?,
            b: finite("b", b)?,
            f: finite("f", f)?,
            c: finite("c", c)?,
            d: finite("d", d)?,
            theta: normalize_phase(finite("theta", theta)?),
            phi: normalize_phase(finite("phi", phi)?),
        };
        p.validate()?;
        Ok(p)
    }

    /// Weight on |11>.
    pub fn g(&self) -> f64 {
        1.0 - self.a - self.b - self.f
    }

    pub fn validate(&self) -> Result<()> {
        let Self { a, b, f, c, d, .. } = *self;
        if a < 0.0 || b < 0.0 || f < 0.0 {
            return Err(Error::InvalidParams(format!(
                "a, b, f must be >= 0 (a={a}, b={b}, f={f})"
            )));
        }
        let g = self.g();
        if g < -PARAM_TOL {
            return Err(Error::InvalidParams(format!(
                "a + b + f = {} exceeds 1",
                a + b + f
            )));
        }
        if c < 0.0 || d < 0.0 {
            return Err(Error::InvalidParams(format!(
                "c, d must be >= 0 (c={c}, d={d})"
            )));
        }
        if a * b < c * c / 4.0 - PARAM_TOL {
            return Err(Error::InvalidParams(format!(
                "ab = {} < c^2/4 = {}",
                a * b,
                c * c / 4.0
            )));
        }
        if f * g.max(0.0) < d * d / 4.0 - PARAM_TOL {
            return Err(Error::InvalidParams(format!(
                "f(1-a-b-f) = {} < d^2/4 = {}",
                f * g,
                d * d / 4.0
            )));
        }
        Ok(())
    }

    pub fn as_vec(&self) -> Vec<f64> {
        vec![self.a, self.b, self.f, self.c, self.d, self.theta, self.phi]
    }
}

impl From<E0Params> for E1Params {
    fn from(p: E0Params) -> Self {
        Self {
            a: p.a,
            b: p.b,
            f: 0.0,
            c: p.c,
            d: 0.0,
            theta: p.theta,
            phi: 0.0,
        }
    }
}

fn x_state(diag: [f64; 4], rho14: Complex64, rho23: Complex64) -> Result<DensityMatrix> {
    let mut m = CMatrix::zeros(4)?;
    for (i, &d) in diag.iter().enumerate() {
        m[(i, i)] = Complex64::new(d, 0.0);
    }
    m[(0, 3)] = rho14;
    m[(3, 0)] = rho14.conj();
    m[(1, 2)] = rho23;
    m[(2, 1)] = rho23.conj();
    DensityMatrix::new(m)
}

pub fn e0_state(p: &E0Params) -> Result<DensityMatrix> {
    p.validate()?;
    x_state(
        [0.0, p.a, p.b, 1.0 - p.a - p.b],
        Complex64::new(0.0, 0.0),
        Complex64::from_polar(p.c / 2.0, p.theta),
    )
}

pub fn e1_state(p: &E1Params) -> Result<DensityMatrix> {
    p.validate()?;
    x_state(
        [p.f, p.a, p.b, p.g()],
        Complex64::from_polar(p.d / 2.0, p.phi),
        Complex64::from_polar(p.c / 2.0, p.theta),
    )
}

/// MEMS I branch (a = b = c/2), defined for c in [2/3, 1].
pub fn mems1(c: f64, theta: f64) -> Result<DensityMatrix> {
    if !(2.0 / 3.0..=1.0).contains(&c) {
        return Err(Error::Domain(format!(
            "MEMS I needs c in [2/3, 1], got {c}"
        )));
    }
    e0_state(&E0Params::new(c / 2.0, c / 2.0, c, theta)?)
}

/// MEMS II branch (a = b = 1/3), defined for c in (0, 2/3].
pub fn mems2(c: f64, theta: f64) -> Result<DensityMatrix> {
    if !(c > 0.0 && c <= 2.0 / 3.0) {
        return Err(Error::Domain(format!(
            "MEMS II needs c in (0, 2/3], got {c}"
        )));
    }
    e0_state(&E0Params::new(1.0 / 3.0, 1.0 / 3.0, c, theta)?)
}

/// (a, b) uniform on the triangle a + b <= 1, c uniform on
/// [0, min(1, 2 sqrt(ab))], theta uniform.
pub fn sample_e0(rng: &mut RngStream) -> E0Params {
    let (mut a, mut b) = (rng.uniform(), rng.uniform());
    if a + b > 1.0 {
        a = 1.0 - a;
        b = 1.0 - b;
    }
    let c = rng.uniform() * (2.0 * (a * b).sqrt()).min(1.0);
    let theta = rng.phase();
    E0Params { a, b, c, theta }
}

/// (a, b, f, g) uniform on the 3-simplex, c uniform on
/// [0, min(1, 2 sqrt(ab))], d uniform on [0, min(1, 2 sqrt(fg))], phases
/// uniform.
pub fn sample_e1(rng: &mut RngStream) -> E1Params {
    let mut cuts = [rng.uniform(), rng.uniform(), rng.uniform()];
    cuts.sort_by(f64::total_cmp);
    let a = cuts[0];
    let b = cuts[1] - cuts[0];
    let f = cuts[2] - cuts[1];
    let g = 1.0 - a - b - f;
    let c = rng.uniform() * (2.0 * (a * b).sqrt()).min(1.0);
    let d = rng.uniform() * (2.0 * (f * g.max(0.0)).sqrt()).min(1.0);
    let theta = rng.phase();
    let phi = rng.phase();
    E1Params {
        a,
        b,
        f,
        c,
        d,
        theta,
        phi,
    }
}

fn random_qubit(rng: &mut RngStream) -> [Complex64; 2] {
    loop {
        let v = [
            Complex64::new(rng.normal(), rng.normal()),
            Complex64::new(rng.normal(), rng.normal()),
        ];
        let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
        if n > 1e-12 {
            return [v[0] / n, v[1] / n];
        }
    }
}

/// Normalizes an accumulated PSD matrix to unit trace, exactly Hermitian.
fn normalized_state(mut m: CMatrix) -> DensityMatrix {
    let tr = m.trace().re;
    for i in 0..4 {
        m[(i, i)] = Complex64::new(m[(i, i)].re / tr, 0.0);
        for j in (i + 1)..4 {
            let z = m[(i, j)] / tr;
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    DensityMatrix::new(m).expect("sampled state is valid")
}

/// Mixture of k (uniform in 1..=8) random product pure states with weights
/// uniform on the simplex.
pub fn sample_separable(rng: &mut RngStream) -> DensityMatrix {
    let k = 1 + rng.below(8) as usize;
    let weights: Vec<f64> = (0..k).map(|_| -(1.0 - rng.uniform()).ln()).collect();
    let mut m = CMatrix::zeros(4).expect("dim 4");
    for &w in &weights {
        let [a0, a1] = random_qubit(rng);
        let [b0, b1] = random_qubit(rng);
        let psi = [a0 * b0, a0 * b1, a1 * b0, a1 * b1];
        for i in 0..4 {
            for j in 0..4 {
                m[(i, j)] += psi[i] * psi[j].conj() * w;
            }
        }
    }
    normalized_state(m)
}

/// G G^H / Tr(G G^H) for a 4x4 matrix G of standard complex Gaussians.
pub fn sample_full_rank(rng: &mut RngStream) -> DensityMatrix {
    let mut g = [Complex64::new(0.0, 0.0); 16];
    for z in g.iter_mut() {
        *z = Complex64::new(rng.normal(), rng.normal());
    }
    let mut m = CMatrix::zeros(4).expect("dim 4");
    for i in 0..4 {
        for j in 0..4 {
            m[(i, j)] = (0..4).map(|k| g[i * 4 + k] * g[j * 4 + k].conj()).sum();
        }
    }
    normalized_state(m)
}
