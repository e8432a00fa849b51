//! Poincaré-sphere embedding and the projected dynamics on 𝕊ⁿ.
//!
//! ℝⁿ is embedded by h(x) = (x, 1)/‖(x, 1)‖ into the open northern hemisphere
//! 𝕊^{n,+}; h₋ = −h lands in the southern one; the equator {s_{n+1} = 0}
//! represents points at infinity. The extended bilinear system induces the
//! sphere dynamics ṡ = Σᵢ uᵢ [A′ᵢ − (sᵀA′ᵢs)I]s, which is tangent to the
//! sphere, antipodally equivariant, and leaves the equator and both open
//! hemispheres invariant.
//!
//! The metric on 𝕊ⁿ used throughout is the max-coordinate metric
//! d(s, s′) = maxᵢ |sᵢ − s′ᵢ| (it gives the Lipschitz bound
//! d(h(x), h(y)) ≤ 2‖x − y‖_∞); the projective metric is the min over
//! antipodal representatives.

use nalgebra::DVector;
use thiserror::Error;

use crate::systems::{integrate, AffineSystem, ControlSignal, ExtendedBilinearSystem, SystemError};

/// Sign tolerance for projective canonicalization.
pub const TOL_SIGN: f64 = 1e-12;
/// Below this |s_{n+1}| a sphere point counts as "at infinity" for h⁻¹.
pub const TOL_EQUATOR: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum CompactError {
    #[error("non-finite coordinates")]
    NonFinite,
    #[error("point on (or numerically at) the equator has no finite preimage")]
    Equator,
    #[error(transparent)]
    System(#[from] SystemError),
}

/// Point on the unit sphere 𝕊ⁿ ⊂ ℝⁿ⁺¹; renormalized on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint {
    coords: DVector<f64>,
}

impl SpherePoint {
    pub fn new(coords: DVector<f64>) -> Result<Self, CompactError> {
        if coords.iter().any(|v| !v.is_finite()) {
            return Err(CompactError::NonFinite);
        }
        let norm = coords.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(CompactError::NonFinite);
        }
        Ok(Self {
            coords: coords / norm,
        })
    }

    pub fn from_slice(coords: &[f64]) -> Result<Self, CompactError> {
        Self::new(DVector::from_column_slice(coords))
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    /// Sphere dimension n (ambient dimension minus one).
    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }
}

/// Point of ℙⁿ stored as its canonical sphere representative: the first
/// coordinate with |value| > TOL_SIGN is positive (scan in index order).
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectivePoint {
    rep: SpherePoint,
}

impl ProjectivePoint {
    pub fn rep(&self) -> &SpherePoint {
        &self.rep
    }
}

/// h(x) = (x, 1)/‖(x, 1)‖; lands in the open northern hemisphere.
pub fn embed_h(x: &DVector<f64>) -> Result<SpherePoint, CompactError> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(CompactError::NonFinite);
    }
    let mut c = DVector::zeros(x.len() + 1);
    c.rows_mut(0, x.len()).copy_from(x);
    c[x.len()] = 1.0;
    SpherePoint::new(c)
}

/// h₋(x) = −h(x); lands in the open southern hemisphere.
pub fn embed_h_minus(x: &DVector<f64>) -> Result<SpherePoint, CompactError> {
    Ok(antipode(&embed_h(x)?))
}

/// h⁻¹(s) = (s₁/s_{n+1}, …, s_n/s_{n+1}); fails on the equator.
pub fn h_inverse(s: &SpherePoint) -> Result<DVector<f64>, CompactError> {
    let n = s.dim();
    let last = s.coords[n];
    if last.abs() <= TOL_EQUATOR {
        return Err(CompactError::Equator);
    }
    Ok(s.coords.rows(0, n) / last)
}

pub fn antipode(s: &SpherePoint) -> SpherePoint {
    SpherePoint {
        coords: -&s.coords,
    }
}

/// Canonical representative of the antipodal pair {s, −s}.
pub fn projective_canonical(s: &SpherePoint) -> ProjectivePoint {
    for v in s.coords.iter() {
        if v.abs() > TOL_SIGN {
            let rep = if *v < 0.0 { antipode(s) } else { s.clone() };
            return ProjectivePoint { rep };
        }
    }
    ProjectivePoint { rep: s.clone() }
}

/// Last coordinate s_{n+1}: positive on the northern hemisphere, zero on the
/// equator (points at infinity).
pub fn equator_height(s: &SpherePoint) -> f64 {
    s.coords[s.dim()]
}

/// Max-coordinate metric on the sphere, d(s, s′) = maxᵢ |sᵢ − s′ᵢ|.
pub fn sphere_metric(a: &SpherePoint, b: &SpherePoint) -> f64 {
    max_metric(a.coords.as_slice(), b.coords.as_slice())
}

/// Projective metric: min over the antipodal representatives of b.
pub fn projective_metric(a: &SpherePoint, b: &SpherePoint) -> f64 {
    sphere_metric(a, b).min(sphere_metric(a, &antipode(b)))
}

pub fn max_metric(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Projected dynamics on 𝕊ⁿ: [A′₀ − (sᵀA′₀s)I]s + Σᵢ uᵢ[A′ᵢ − (sᵀA′ᵢs)I]s.
/// The result is tangent: ⟨field, s⟩ = 0 up to roundoff.
pub fn sphere_field(ext: &ExtendedBilinearSystem, s: &SpherePoint, u: &[f64]) -> DVector<f64> {
    sphere_field_raw(ext, &s.coords, u)
}

/// Same formula on a raw ambient vector (used by the integrator, where the
/// state drifts slightly off the sphere between renormalizations).
pub fn sphere_field_raw(ext: &ExtendedBilinearSystem, s: &DVector<f64>, u: &[f64]) -> DVector<f64> {
    let mats = ext.matrices();
    let mut f = projected_term(&(&mats[0] * s), s);
    for (i, &ui) in u.iter().enumerate() {
        if ui != 0.0 {
            f += projected_term(&(&mats[i + 1] * s), s) * ui;
        }
    }
    f
}

fn projected_term(as_: &DVector<f64>, s: &DVector<f64>) -> DVector<f64> {
    let q = s.dot(as_);
    as_ - s * q
}

/// RK4 on the sphere field with renormalization to the unit sphere after
/// every step. Deterministic; supports backward time like [`integrate`].
pub fn sphere_integrate(
    ext: &ExtendedBilinearSystem,
    s0: &SpherePoint,
    u: &ControlSignal,
    t0: f64,
    t1: f64,
    step: f64,
) -> Result<SpherePoint, CompactError> {
    if !(step > 0.0) {
        return Err(SystemError::Parameter("step must be positive".into()).into());
    }
    if t0 == t1 {
        return Ok(s0.clone());
    }
    // Re-run the shared segment logic, renormalizing between segments is not
    // enough: project after every RK4 step. We inline the stepping here to
    // keep the renormalization per step.
    let forward = t1 > t0;
    let mut bounds = vec![t0];
    let mut interior: Vec<f64> = u
        .breakpoints()
        .iter()
        .copied()
        .filter(|&b| (b > t0.min(t1)) && (b < t0.max(t1)))
        .collect();
    if !forward {
        interior.reverse();
    }
    bounds.extend(interior);
    bounds.push(t1);

    let mut x = s0.coords.clone();
    for w in bounds.windows(2) {
        let (a, b) = (w[0], w[1]);
        let uc = u.eval(0.5 * (a + b)).to_vec();
        let len = (b - a).abs();
        let nsteps = (len / step).ceil().max(1.0) as usize;
        let h = (b - a) / nsteps as f64;
        for k in 0..nsteps {
            let k1 = sphere_field_raw(ext, &x, &uc);
            let k2 = sphere_field_raw(ext, &(&x + &k1 * (h / 2.0)), &uc);
            let k3 = sphere_field_raw(ext, &(&x + &k2 * (h / 2.0)), &uc);
            let k4 = sphere_field_raw(ext, &(&x + &k3 * h), &uc);
            x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
            if x.iter().any(|v| !v.is_finite()) {
                return Err(SystemError::Divergence {
                    time: a + h * (k + 1) as f64,
                }
                .into());
            }
            let norm = x.norm();
            x /= norm;
        }
    }
    Ok(SpherePoint { coords: x })
}

/// Distance (max-coordinate metric) between h(ψ(t, x, u)) computed in the
/// plane and the sphere trajectory 𝕊ψ(t, h(x), u). The conjugation theorem
/// forces this to vanish up to integration error.
pub fn conjugacy_residual(
    sys: &AffineSystem,
    x: &DVector<f64>,
    u: &ControlSignal,
    t: f64,
    step: f64,
) -> Result<f64, CompactError> {
    let field = |y: &DVector<f64>, uc: &[f64]| sys.field(y, uc);
    let plane_end = integrate(&field, x, u, 0.0, t, step)?;
    let lhs = embed_h(&plane_end)?;
    let ext = sys.extend();
    let rhs = sphere_integrate(&ext, &embed_h(x)?, u, 0.0, t, step)?;
    Ok(sphere_metric(&lhs, &rhs))
}
