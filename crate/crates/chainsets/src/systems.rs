//! Affine and bilinear control systems, trajectory integration, monodromy,
//! and the weak* control metric.
//!
//! An affine system is ẋ = A₀x + a₀ + Σᵢ uᵢ(t)(Aᵢx + aᵢ) with u(t) in a
//! compact box Ω ⊂ ℝᵐ that is a neighborhood of 0. Its extension doubles as
//! the bilinear system on ℝⁿ⁺¹ whose matrices are the block forms
//! [[Aᵢ, aᵢ], [0, 0]].

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default eigenvalue tolerance for the unit-eigenvalue test.
pub const TOL_EIG: f64 = 1e-6;
/// Default periodicity tolerance for periodic-orbit detection.
pub const TOL_PER: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum SystemError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid control range: {0}")]
    ControlRange(String),
    #[error("control value lies outside the control range")]
    ControlOutsideRange,
    #[error("trajectory diverged at t = {time}")]
    Divergence { time: f64 },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("system document: {0}")]
    Document(String),
}

/// Compact control range Ω = Π[lowerᵢ, upperᵢ], a neighborhood of 0 ∈ ℝᵐ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlRange {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl ControlRange {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, SystemError> {
        if lower.len() != upper.len() {
            return Err(SystemError::ControlRange(
                "lower and upper lengths differ".into(),
            ));
        }
        for i in 0..lower.len() {
            if !(lower[i] <= 0.0 && 0.0 <= upper[i]) {
                return Err(SystemError::ControlRange(format!(
                    "component {i} must satisfy lower <= 0 <= upper"
                )));
            }
            if !(lower[i] < upper[i]) {
                return Err(SystemError::ControlRange(format!(
                    "component {i} must satisfy lower < upper"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The trivial range for control-free systems (m = 0).
    pub fn empty() -> Self {
        Self {
            lower: vec![],
            upper: vec![],
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// Membership with a small absolute slack so that box vertices pass.
    pub fn contains(&self, u: &[f64]) -> bool {
        u.len() == self.dim()
            && u.iter().enumerate().all(|(i, &ui)| {
                ui >= self.lower[i] - 1e-9 && ui <= self.upper[i] + 1e-9
            })
    }

    /// All 2^m vertices of the box, in lexicographic order.
    pub fn vertices(&self) -> Vec<Vec<f64>> {
        let m = self.dim();
        let mut out = Vec::with_capacity(1 << m);
        for mask in 0..(1usize << m) {
            let v: Vec<f64> = (0..m)
                .map(|i| {
                    if mask >> i & 1 == 0 {
                        self.lower[i]
                    } else {
                        self.upper[i]
                    }
                })
                .collect();
            out.push(v);
        }
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out
    }

    /// Default control samples for graph construction: box vertices plus 0.
    pub fn default_samples(&self) -> Vec<Vec<f64>> {
        let mut out = self.vertices();
        let zero = vec![0.0; self.dim()];
        if !out.contains(&zero) {
            out.push(zero);
        }
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out.dedup();
        out
    }
}

/// ẋ = A₀x + a₀ + Σᵢ uᵢ(Aᵢx + aᵢ), u(t) ∈ Ω.
#[derive(Debug, Clone)]
pub struct AffineSystem {
    n: usize,
    mats: Vec<DMatrix<f64>>,
    offsets: Vec<DVector<f64>>,
    omega: ControlRange,
}

impl AffineSystem {
    /// `mats` and `offsets` are A₀..A_m and a₀..a_m; `omega.dim()` must be m.
    pub fn new(
        mats: Vec<DMatrix<f64>>,
        offsets: Vec<DVector<f64>>,
        omega: ControlRange,
    ) -> Result<Self, SystemError> {
        if mats.is_empty() || mats.len() != offsets.len() {
            return Err(SystemError::Dimension(
                "need m+1 matrices and m+1 offsets".into(),
            ));
        }
        if mats.len() != omega.dim() + 1 {
            return Err(SystemError::Dimension(format!(
                "{} matrices but control dimension {}",
                mats.len(),
                omega.dim()
            )));
        }
        let n = mats[0].nrows();
        for a in &mats {
            if a.nrows() != n || a.ncols() != n {
                return Err(SystemError::Dimension("matrices must be square n×n".into()));
            }
        }
        for a in &offsets {
            if a.len() != n {
                return Err(SystemError::Dimension("offsets must have length n".into()));
            }
        }
        Ok(Self {
            n,
            mats,
            offsets,
            omega,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.omega.dim()
    }

    pub fn omega(&self) -> &ControlRange {
        &self.omega
    }

    pub fn matrices(&self) -> &[DMatrix<f64>] {
        &self.mats
    }

    pub fn offsets(&self) -> &[DVector<f64>] {
        &self.offsets
    }

    /// Right-hand side A₀x + a₀ + Σᵢ uᵢ(Aᵢx + aᵢ) without range checking.
    pub fn field(&self, x: &DVector<f64>, u: &[f64]) -> DVector<f64> {
        let mut f = &self.mats[0] * x + &self.offsets[0];
        for (i, &ui) in u.iter().enumerate() {
            if ui != 0.0 {
                f += (&self.mats[i + 1] * x + &self.offsets[i + 1]) * ui;
            }
        }
        f
    }

    /// Checked right-hand side: rejects u outside Ω or mismatched dimensions.
    pub fn affine_field(&self, x: &DVector<f64>, u: &[f64]) -> Result<DVector<f64>, SystemError> {
        if x.len() != self.n {
            return Err(SystemError::Dimension("state length != n".into()));
        }
        if !self.omega.contains(u) {
            return Err(SystemError::ControlOutsideRange);
        }
        Ok(self.field(x, u))
    }

    /// The system matrix A₀ + Σᵢ uᵢAᵢ of the homogeneous part at control u.
    pub fn system_matrix(&self, u: &[f64]) -> DMatrix<f64> {
        let mut a = self.mats[0].clone();
        for (i, &ui) in u.iter().enumerate() {
            if ui != 0.0 {
                a += &self.mats[i + 1] * ui;
            }
        }
        a
    }

    /// Lift to the bilinear system on ℝⁿ⁺¹ with block matrices
    /// A′ᵢ = [[Aᵢ, aᵢ], [0, 0]].
    pub fn extend(&self) -> ExtendedBilinearSystem {
        let n = self.n;
        let aprime = self
            .mats
            .iter()
            .zip(&self.offsets)
            .map(|(a, off)| {
                let mut b = DMatrix::zeros(n + 1, n + 1);
                b.view_mut((0, 0), (n, n)).copy_from(a);
                b.view_mut((0, n), (n, 1)).copy_from(off);
                b
            })
            .collect();
        ExtendedBilinearSystem {
            n_ext: n + 1,
            aprime,
        }
    }

    /// Same matrices, zero offsets: the bilinear part ẋ = [A₀+Σuᵢ Aᵢ]x.
    pub fn homogeneous_part(&self) -> AffineSystem {
        AffineSystem {
            n: self.n,
            mats: self.mats.clone(),
            offsets: vec![DVector::zeros(self.n); self.mats.len()],
            omega: self.omega.clone(),
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self, SystemError> {
        let doc: SystemDoc =
            serde_json::from_str(s).map_err(|e| SystemError::Document(e.to_string()))?;
        doc.into_system()
    }

    pub fn to_json_string(&self) -> String {
        let doc = SystemDoc {
            n: self.n,
            matrices: self.mats.iter().map(row_major).collect(),
            offsets: self.offsets.iter().map(|v| v.iter().copied().collect()).collect(),
            omega: OmegaDoc {
                lower: self.omega.lower.clone(),
                upper: self.omega.upper.clone(),
            },
        };
        serde_json::to_string_pretty(&doc).expect("system document serializes")
    }
}

fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    let mut out = Vec::with_capacity(m.nrows() * m.ncols());
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            out.push(m[(r, c)]);
        }
    }
    out
}

/// JSON system document: row-major matrices A₀..A_m, offsets a₀..a_m, and Ω.
#[derive(Serialize, Deserialize)]
struct SystemDoc {
    n: usize,
    matrices: Vec<Vec<f64>>,
    offsets: Vec<Vec<f64>>,
    omega: OmegaDoc,
}

#[derive(Serialize, Deserialize)]
struct OmegaDoc {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl SystemDoc {
    fn into_system(self) -> Result<AffineSystem, SystemError> {
        let n = self.n;
        let mats = self
            .matrices
            .iter()
            .map(|flat| {
                if flat.len() != n * n {
                    return Err(SystemError::Document(format!(
                        "matrix has {} entries, expected {}",
                        flat.len(),
                        n * n
                    )));
                }
                Ok(DMatrix::from_row_slice(n, n, flat))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let offsets = self
            .offsets
            .iter()
            .map(|v| {
                if v.len() != n {
                    return Err(SystemError::Document(format!(
                        "offset has {} entries, expected {}",
                        v.len(),
                        n
                    )));
                }
                Ok(DVector::from_column_slice(v))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let omega = ControlRange::new(self.omega.lower, self.omega.upper)?;
        AffineSystem::new(mats, offsets, omega)
    }
}

/// Bilinear system on ℝⁿ⁺¹ obtained from [`AffineSystem::extend`]; the last
/// row of every matrix is zero, so the hyperplane x_{n+1} = const is invariant.
#[derive(Debug, Clone)]
pub struct ExtendedBilinearSystem {
    n_ext: usize,
    aprime: Vec<DMatrix<f64>>,
}

impl ExtendedBilinearSystem {
    pub fn n_ext(&self) -> usize {
        self.n_ext
    }

    pub fn matrices(&self) -> &[DMatrix<f64>] {
        &self.aprime
    }

    /// [A′₀ + Σᵢ uᵢ A′ᵢ] x̂ on ℝⁿ⁺¹.
    pub fn field(&self, x: &DVector<f64>, u: &[f64]) -> DVector<f64> {
        let mut f = &self.aprime[0] * x;
        for (i, &ui) in u.iter().enumerate() {
            if ui != 0.0 {
                f += (&self.aprime[i + 1] * x) * ui;
            }
        }
        f
    }

    /// A′₀ + Σᵢ uᵢ A′ᵢ.
    pub fn system_matrix(&self, u: &[f64]) -> DMatrix<f64> {
        let mut a = self.aprime[0].clone();
        for (i, &ui) in u.iter().enumerate() {
            if ui != 0.0 {
                a += &self.aprime[i + 1] * ui;
            }
        }
        a
    }
}

/// Piecewise-constant, right-continuous control signal with values in Ω.
/// Breakpoints t₁ < … < t_k split ℝ into k+1 intervals; value j applies on
/// [tⱼ, tⱼ₊₁); the first and last values extend constantly to ±∞.
#[derive(Debug, Clone)]
pub struct ControlSignal {
    breakpoints: Vec<f64>,
    values: Vec<Vec<f64>>,
}

impl ControlSignal {
    pub fn new(
        breakpoints: Vec<f64>,
        values: Vec<Vec<f64>>,
        omega: &ControlRange,
    ) -> Result<Self, SystemError> {
        if values.len() != breakpoints.len() + 1 {
            return Err(SystemError::Parameter(
                "need one value per interval (breakpoints + 1)".into(),
            ));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(SystemError::Parameter(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        for v in &values {
            if !omega.contains(v) {
                return Err(SystemError::ControlOutsideRange);
            }
        }
        Ok(Self {
            breakpoints,
            values,
        })
    }

    pub fn constant(value: Vec<f64>, omega: &ControlRange) -> Result<Self, SystemError> {
        Self::new(vec![], vec![value], omega)
    }

    /// Constant signal without a range check (for internal plumbing).
    pub fn constant_unchecked(value: Vec<f64>) -> Self {
        Self {
            breakpoints: vec![],
            values: vec![value],
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// Right-continuous evaluation, defined for every real time.
    pub fn eval(&self, t: f64) -> &[f64] {
        let idx = self.breakpoints.partition_point(|&b| b <= t);
        &self.values[idx]
    }

    /// The signal s ↦ u(offset + s).
    pub fn shifted(&self, offset: f64) -> ControlSignal {
        ControlSignal {
            breakpoints: self.breakpoints.iter().map(|b| b - offset).collect(),
            values: self.values.clone(),
        }
    }
}

/// Classical fixed-step RK4 for ẋ = field(x, u(t)), with steps aligned to the
/// control breakpoints so each step sees a constant control. `t1 < t0`
/// integrates backward (negative step size on the same scheme). Deterministic
/// for fixed inputs; a non-finite state aborts with the escape time.
pub fn integrate<F>(
    field: &F,
    x0: &DVector<f64>,
    u: &ControlSignal,
    t0: f64,
    t1: f64,
    step: f64,
) -> Result<DVector<f64>, SystemError>
where
    F: Fn(&DVector<f64>, &[f64]) -> DVector<f64>,
{
    if !(step > 0.0) {
        return Err(SystemError::Parameter("step must be positive".into()));
    }
    if t0 == t1 {
        return Ok(x0.clone());
    }
    let forward = t1 > t0;
    // Segment boundaries: t0, interior breakpoints (in travel order), t1.
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

    let mut x = x0.clone();
    for w in bounds.windows(2) {
        let (a, b) = (w[0], w[1]);
        // u is constant on the open segment; the midpoint avoids boundary
        // ambiguity in either travel direction.
        let uc = u.eval(0.5 * (a + b)).to_vec();
        let len = (b - a).abs();
        let nsteps = (len / step).ceil().max(1.0) as usize;
        let h = (b - a) / nsteps as f64;
        let mut t = a;
        for k in 0..nsteps {
            let k1 = field(&x, &uc);
            let k2 = field(&(&x + &k1 * (h / 2.0)), &uc);
            let k3 = field(&(&x + &k2 * (h / 2.0)), &uc);
            let k4 = field(&(&x + &k3 * h), &uc);
            x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
            t = a + h * (k + 1) as f64;
            if x.iter().any(|v| !v.is_finite()) {
                return Err(SystemError::Divergence { time: t });
            }
        }
        let _ = t;
    }
    Ok(x)
}

/// Fundamental solution X_u(τ, 0) of Ẋ = [A₀ + Σᵢ uᵢ(t)Aᵢ]X with its spectrum
/// and the unit-eigenvalue flag of the unboundedness criterion.
#[derive(Debug, Clone)]
pub struct MonodromyReport {
    pub matrix: DMatrix<f64>,
    pub eigenvalues: Vec<Complex<f64>>,
    pub has_unit_eigenvalue: bool,
    pub unit_eigvec: Option<DVector<f64>>,
}

/// Integrates the homogeneous matrix ODE over [0, τ] (column by column, via
/// the matrix-valued RK4) and reports the spectrum. Uses `u` on [0, τ] only;
/// the caller asserts τ-periodicity where that matters.
pub fn monodromy(
    sys: &AffineSystem,
    u: &ControlSignal,
    tau: f64,
) -> Result<MonodromyReport, SystemError> {
    monodromy_with(sys, u, tau, 1e-3, TOL_EIG)
}

pub fn monodromy_with(
    sys: &AffineSystem,
    u: &ControlSignal,
    tau: f64,
    step: f64,
    tol_eig: f64,
) -> Result<MonodromyReport, SystemError> {
    if !(tau > 0.0) {
        return Err(SystemError::Parameter("tau must be positive".into()));
    }
    let n = sys.n();
    // Flatten X into one long vector and integrate all columns at once.
    let field = |x: &DVector<f64>, uc: &[f64]| -> DVector<f64> {
        let a = sys.system_matrix(uc);
        let xm = DMatrix::from_column_slice(n, n, x.as_slice());
        let dm = a * xm;
        DVector::from_column_slice(dm.as_slice())
    };
    let x0 = DVector::from_column_slice(DMatrix::<f64>::identity(n, n).as_slice());
    let xf = integrate(&field, &x0, u, 0.0, tau, step)?;
    let matrix = DMatrix::from_column_slice(n, n, xf.as_slice());
    let eigenvalues: Vec<Complex<f64>> = matrix.complex_eigenvalues().iter().copied().collect();
    let has_unit_eigenvalue = eigenvalues
        .iter()
        .any(|l| (l - Complex::new(1.0, 0.0)).norm() < tol_eig);
    let unit_eigvec = if has_unit_eigenvalue {
        Some(null_direction(&(&matrix - DMatrix::identity(n, n))))
    } else {
        None
    };
    Ok(MonodromyReport {
        matrix,
        eigenvalues,
        has_unit_eigenvalue,
        unit_eigvec,
    })
}

/// Unit right-singular vector for the smallest singular value of `m`.
fn null_direction(m: &DMatrix<f64>) -> DVector<f64> {
    let svd = m.clone().svd(false, true);
    let vt = svd.v_t.expect("svd with v_t");
    let (imin, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .expect("nonempty spectrum");
    let mut dir = DVector::from_iterator(vt.ncols(), vt.row(imin).iter().copied());
    // Deterministic sign: first coordinate of significant size positive.
    if let Some(c) = dir.iter().find(|c| c.abs() > 1e-12) {
        if *c < 0.0 {
            dir = -dir;
        }
    }
    dir
}

/// Result of the unbounded-strong-set test: the sufficient criterion
/// "τ-periodic orbit and 1 ∈ spec(X_u(τ,0))". `direction` spans the
/// eigenvalue-1 eigenspace when the flag is set.
#[derive(Debug, Clone)]
pub struct UnboundedCheck {
    pub is_periodic_orbit: bool,
    pub unbounded_flag: bool,
    pub direction: Option<DVector<f64>>,
}

pub fn check_unbounded_strong_set(
    sys: &AffineSystem,
    u: &ControlSignal,
    tau: f64,
    x: &DVector<f64>,
) -> Result<UnboundedCheck, SystemError> {
    check_unbounded_strong_set_with(sys, u, tau, x, 1e-3, TOL_PER, TOL_EIG)
}

pub fn check_unbounded_strong_set_with(
    sys: &AffineSystem,
    u: &ControlSignal,
    tau: f64,
    x: &DVector<f64>,
    step: f64,
    tol_per: f64,
    tol_eig: f64,
) -> Result<UnboundedCheck, SystemError> {
    let field = |y: &DVector<f64>, uc: &[f64]| sys.field(y, uc);
    let xf = integrate(&field, x, u, 0.0, tau, step)?;
    let is_periodic_orbit = (&xf - x).norm() < tol_per;
    if !is_periodic_orbit {
        return Ok(UnboundedCheck {
            is_periodic_orbit: false,
            unbounded_flag: false,
            direction: None,
        });
    }
    let report = monodromy_with(sys, u, tau, step, tol_eig)?;
    let unbounded_flag = report.has_unit_eigenvalue;
    Ok(UnboundedCheck {
        is_periodic_orbit,
        unbounded_flag,
        direction: if unbounded_flag {
            report.unit_eigvec
        } else {
            None
        },
    })
}

/// Truncated weak* metric Σᵢ₌₁^N 2⁻ⁱ |Iᵢ|/(1+|Iᵢ|), Iᵢ = ∫⟨u−v, yᵢ⟩dt over
/// [−horizon, horizon].
///
/// The basis family is fixed once and documented: yᵢ(t) is the indicator of
/// [−2^⌈i/2⌉, 2^⌈i/2⌉] times tᵏ/k! with k = (i−1) mod 4, applied to each
/// control component. Exact values depend on this choice; only the
/// pseudo-metric properties are contractual (diagnostic use).
pub fn control_distance(
    u: &ControlSignal,
    v: &ControlSignal,
    num_terms: usize,
    horizon: f64,
) -> f64 {
    assert!(num_terms >= 1, "num_terms must be >= 1");
    assert!(horizon > 0.0, "horizon must be positive");
    let mut total = 0.0;
    for i in 1..=num_terms {
        let half_width = 2f64.powi(((i + 1) / 2) as i32);
        let s = half_width.min(horizon);
        let k = (i - 1) % 4;
        let ii = integral_diff_monomial(u, v, k, s);
        total += 2f64.powi(-(i as i32)) * ii.abs() / (1.0 + ii.abs());
    }
    total
}

/// Exact ∫_{-s}^{s} Σⱼ (uⱼ(t) − vⱼ(t)) tᵏ/k! dt, piecewise over breakpoints.
fn integral_diff_monomial(u: &ControlSignal, v: &ControlSignal, k: usize, s: f64) -> f64 {
    let mut cuts: Vec<f64> = vec![-s, s];
    for &b in u.breakpoints().iter().chain(v.breakpoints()) {
        if b > -s && b < s {
            cuts.push(b);
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();
    let kfact: f64 = (1..=k).map(|j| j as f64).product::<f64>().max(1.0);
    let mut acc = 0.0;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mid = 0.5 * (a + b);
        let du = u.eval(mid);
        let dv = v.eval(mid);
        let c: f64 = du.iter().zip(dv).map(|(x, y)| x - y).sum();
        if c != 0.0 {
            let p = (k + 1) as f64;
            acc += c * (b.powi(k as i32 + 1) - a.powi(k as i32 + 1)) / (p * kfact);
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios;

    fn dvec(v: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(v)
    }

    #[test]
    fn zero_system_field_is_zero() {
        let sys = AffineSystem::new(
            vec![DMatrix::zeros(2, 2)],
            vec![DVector::zeros(2)],
            ControlRange::empty(),
        )
        .unwrap();
        let f = sys.affine_field(&dvec(&[3.0, -7.0]), &[]).unwrap();
        assert_eq!(f, dvec(&[0.0, 0.0]));
    }

    #[test]
    fn example2_equilibrium_field_vanishes() {
        // Equilibrium x = (d+u)/(1+u) with u = 0, d = 0.5.
        let sc = scenarios::example2_scenario(1.1, 0.5).unwrap();
        let f = sc.system.affine_field(&dvec(&[0.5, 0.0]), &[0.0]).unwrap();
        assert!(f.norm() < 1e-14, "field = {f}");
    }

    #[test]
    fn scalar_equilibrium_field_vanishes() {
        let sc = scenarios::scalar_hyperbolic_scenario();
        let f = sc.system.affine_field(&dvec(&[1.0]), &[1.0]).unwrap();
        assert!(f.norm() < 1e-14);
    }

    #[test]
    fn control_outside_range_rejected() {
        let sc = scenarios::scalar_hyperbolic_scenario();
        assert!(matches!(
            sc.system.affine_field(&dvec(&[0.0]), &[2.0]),
            Err(SystemError::ControlOutsideRange)
        ));
    }

    #[test]
    fn extend_block_assembly() {
        let sys = AffineSystem::new(
            vec![DMatrix::from_row_slice(1, 1, &[0.0])],
            vec![dvec(&[1.0])],
            ControlRange::empty(),
        )
        .unwrap();
        let ext = sys.extend();
        let expect = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert_eq!(ext.matrices()[0], expect);
    }

    #[test]
    fn extend_example2_control_block() {
        let sc = scenarios::example2_scenario(1.1, 0.5).unwrap();
        let ext = sc.system.extend();
        let expect =
            DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
        assert_eq!(ext.matrices()[1], expect);
    }

    #[test]
    fn extended_field_matches_affine_field_on_slice() {
        let sc = scenarios::example2_scenario(1.1, 0.5).unwrap();
        let ext = sc.system.extend();
        let x = dvec(&[0.3, -1.2]);
        let u = [0.7];
        let f_aff = sc.system.field(&x, &u);
        let f_ext = ext.field(&dvec(&[0.3, -1.2, 1.0]), &u);
        assert!((f_ext.rows(0, 2) - f_aff).norm() < 1e-15);
        assert_eq!(f_ext[2], 0.0);
    }

    #[test]
    fn homogeneous_part_idempotent_and_correct() {
        let sc = scenarios::example2_scenario(1.1, 0.5).unwrap();
        let h = sc.system.homogeneous_part();
        assert_eq!(
            h.matrices()[0],
            DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, -3.0])
        );
        assert_eq!(
            h.matrices()[1],
            DMatrix::from_row_slice(2, 2, &[0.0, 0.0, -1.0, 0.0])
        );
        assert!(h.offsets().iter().all(|a| a.norm() == 0.0));
        let hh = h.homogeneous_part();
        assert_eq!(hh.matrices(), h.matrices());
        assert_eq!(hh.offsets(), h.offsets());
    }

    #[test]
    fn integrate_constant_field_exact() {
        // ẋ = u with u ≡ 1: x(1) = 1 exactly under RK4.
        let omega = ControlRange::new(vec![-1.0], vec![1.0]).unwrap();
        let u = ControlSignal::constant(vec![1.0], &omega).unwrap();
        let field = |_x: &DVector<f64>, uc: &[f64]| dvec(&[uc[0]]);
        let x = integrate(&field, &dvec(&[0.0]), &u, 0.0, 1.0, 0.1).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn integrate_exponential_oracle() {
        // ẋ = −x from 1: x(1) = e⁻¹ within 1e−8 at step 1e−3.
        let u = ControlSignal::constant_unchecked(vec![]);
        let field = |x: &DVector<f64>, _uc: &[f64]| -x;
        let x = integrate(&field, &dvec(&[1.0]), &u, 0.0, 1.0, 1e-3).unwrap();
        assert!((x[0] - (-1.0f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn integrate_preserves_example2_equilibrium() {
        let sc = scenarios::example2_scenario(1.1, 0.5).unwrap();
        let u = ControlSignal::constant(vec![0.0], sc.system.omega()).unwrap();
        let field = |x: &DVector<f64>, uc: &[f64]| sc.system.field(x, uc);
        let x = integrate(&field, &dvec(&[0.5, 0.0]), &u, 0.0, 10.0, 1e-3).unwrap();
        assert!((x - dvec(&[0.5, 0.0])).norm() < 1e-9);
    }

    #[test]
    fn integrate_backward_inverts_forward() {
        let sc = scenarios::example2_scenario(1.1, 0.5).unwrap();
        let u = ControlSignal::constant(vec![0.4], sc.system.omega()).unwrap();
        let field = |x: &DVector<f64>, uc: &[f64]| sc.system.field(x, uc);
        let x0 = dvec(&[1.0, -0.5]);
        let x1 = integrate(&field, &x0, &u, 0.0, 2.0, 1e-3).unwrap();
        let back = integrate(&field, &x1, &u, 2.0, 0.0, 1e-3).unwrap();
        assert!((back - x0).norm() < 1e-9);
    }

    #[test]
    fn integrate_divergence_reports_escape() {
        // ẋ = x² blows up at t = 1 from x(0) = 1.
        let u = ControlSignal::constant_unchecked(vec![]);
        let field = |x: &DVector<f64>, _uc: &[f64]| dvec(&[x[0] * x[0]]);
        let r = integrate(&field, &dvec(&[1.0]), &u, 0.0, 2.0, 1e-3);
        match r {
            Err(SystemError::Divergence { time }) => assert!(time > 0.9 && time < 1.2),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn monodromy_zero_field_is_identity() {
        let sys = AffineSystem::new(
            vec![DMatrix::zeros(2, 2)],
            vec![DVector::zeros(2)],
            ControlRange::empty(),
        )
        .unwrap();
        let u = ControlSignal::constant_unchecked(vec![]);
        let rep = monodromy(&sys, &u, 3.0).unwrap();
        assert!((rep.matrix.clone() - DMatrix::<f64>::identity(2, 2)).norm() < 1e-12);
        assert!(rep.has_unit_eigenvalue);
    }

    #[test]
    fn monodromy_linear_3d_eigenvalues() {
        // exp of [[0,1,0],[0,0,0],[0,0,1]] has eigenvalues {1, 1, e}.
        let sc = scenarios::linear_3d_scenario();
        let u = ControlSignal::constant(vec![0.0], sc.system.omega()).unwrap();
        let rep = monodromy(&sc.system, &u, 1.0).unwrap();
        let mut mods: Vec<f64> = rep.eigenvalues.iter().map(|l| l.norm()).collect();
        mods.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((mods[0] - 1.0).abs() < 1e-9);
        assert!((mods[1] - 1.0).abs() < 1e-9);
        assert!((mods[2] - std::f64::consts::E).abs() < 1e-8);
        assert!(rep.has_unit_eigenvalue);
    }

    #[test]
    fn monodromy_scalar_decay() {
        let sc = scenarios::scalar_hyperbolic_scenario();
        let u = ControlSignal::constant(vec![0.0], sc.system.omega()).unwrap();
        let rep = monodromy(&sc.system, &u, 1.0).unwrap();
        assert!((rep.eigenvalues[0].re - (-1.0f64).exp()).abs() < 1e-8);
        assert!(!rep.has_unit_eigenvalue);
        assert!(rep.unit_eigvec.is_none());
    }

    #[test]
    fn monodromy_liouville_determinant() {
        // det X_u(τ,0) = exp(∫ tr A dt) for constant control.
        let sc = scenarios::example2_scenario(1.1, 0.5).unwrap();
        let u = ControlSignal::constant(vec![0.7], sc.system.omega()).unwrap();
        let tau = 2.0;
        let rep = monodromy(&sc.system, &u, tau).unwrap();
        let tr = sc.system.system_matrix(&[0.7]).trace();
        let expect = (tr * tau).exp();
        assert!((rep.matrix.determinant() - expect).abs() / expect.abs() < 1e-6);
    }

    #[test]
    fn unbounded_flag_linear_3d() {
        let sc = scenarios::linear_3d_scenario();
        let u = ControlSignal::constant(vec![0.0], sc.system.omega()).unwrap();
        let chk = check_unbounded_strong_set(&sc.system, &u, 1.0, &DVector::zeros(3)).unwrap();
        assert!(chk.is_periodic_orbit);
        assert!(chk.unbounded_flag);
        let dir = chk.direction.unwrap();
        // Eigenvalue-1 eigenspace of exp(A) contains e₁ (A e₁ = 0).
        let m = monodromy(&sc.system, &u, 1.0).unwrap().matrix;
        assert!((&m * &dir - &dir).norm() < 1e-6);
    }

    #[test]
    fn unbounded_flag_scalar_false() {
        let sc = scenarios::scalar_hyperbolic_scenario();
        let u = ControlSignal::constant(vec![0.0], sc.system.omega()).unwrap();
        let chk = check_unbounded_strong_set(&sc.system, &u, 1.0, &dvec(&[0.0])).unwrap();
        assert!(chk.is_periodic_orbit);
        assert!(!chk.unbounded_flag);
        assert!(chk.direction.is_none());
    }

    #[test]
    fn non_periodic_point_gates_flag() {
        let sc = scenarios::linear_3d_scenario();
        let u = ControlSignal::constant(vec![0.0], sc.system.omega()).unwrap();
        // z(0) = 1 grows as e^t: not periodic.
        let chk = check_unbounded_strong_set(&sc.system, &u, 1.0, &dvec(&[0.0, 0.0, 1.0])).unwrap();
        assert!(!chk.is_periodic_orbit);
        assert!(!chk.unbounded_flag);
        assert!(chk.direction.is_none());
    }

    #[test]
    fn control_distance_zero_for_equal() {
        let omega = ControlRange::new(vec![-1.0], vec![1.0]).unwrap();
        let u = ControlSignal::constant(vec![0.5], &omega).unwrap();
        assert_eq!(control_distance(&u, &u, 8, 4.0), 0.0);
    }

    #[test]
    fn control_distance_symmetric() {
        let omega = ControlRange::new(vec![-1.0], vec![1.0]).unwrap();
        let u = ControlSignal::new(vec![0.0, 1.0], vec![vec![-0.5], vec![1.0], vec![0.25]], &omega)
            .unwrap();
        let v = ControlSignal::constant(vec![-0.75], &omega).unwrap();
        let d1 = control_distance(&u, &v, 10, 3.0);
        let d2 = control_distance(&v, &u, 10, 3.0);
        assert_eq!(d1, d2);
        assert!(d1 > 0.0);
    }

    #[test]
    fn control_distance_frozen_regression() {
        // u ≡ 1, v ≡ 0, N = 8, horizon = 4 with the documented basis family.
        // Constant frozen from an independent Simpson quadrature of each Iᵢ.
        let omega = ControlRange::new(vec![-1.0], vec![1.0]).unwrap();
        let u = ControlSignal::constant(vec![1.0], &omega).unwrap();
        let v = ControlSignal::constant(vec![0.0], &omega).unwrap();
        let d = control_distance(&u, &v, 8, 4.0);
        assert!((d - 0.5546434494196).abs() < 1e-10, "d = {d}");

        // Independent oracle: composite Simpson at 10× the resolution any
        // internal evaluation uses.
        let mut oracle = 0.0;
        for i in 1..=8usize {
            let s = 2f64.powi(((i + 1) / 2) as i32).min(4.0);
            let k = (i - 1) % 4;
            let kfact: f64 = (1..=k).map(|j| j as f64).product::<f64>().max(1.0);
            let nq = 20000;
            let h = 2.0 * s / nq as f64;
            let f = |t: f64| t.powi(k as i32) / kfact; // (u−v) ≡ 1
            let mut acc = f(-s) + f(s);
            for j in 1..nq {
                let t = -s + h * j as f64;
                acc += if j % 2 == 1 { 4.0 } else { 2.0 } * f(t);
            }
            let ii = acc * h / 3.0;
            oracle += 2f64.powi(-(i as i32)) * ii.abs() / (1.0 + ii.abs());
        }
        assert!((d - oracle).abs() < 1e-9, "d = {d}, oracle = {oracle}");
    }

    #[test]
    fn json_roundtrip() {
        let sc = scenarios::example2_scenario(1.1, 0.5).unwrap();
        let s = sc.system.to_json_string();
        let back = AffineSystem::from_json_str(&s).unwrap();
        assert_eq!(back.matrices(), sc.system.matrices());
        assert_eq!(back.offsets(), sc.system.offsets());
        assert_eq!(back.omega(), sc.system.omega());
    }

    #[test]
    fn json_rejects_bad_matrix_size() {
        let doc = r#"{"n": 2, "matrices": [[0.0, 1.0, 0.0]], "offsets": [[0.0, 0.0]],
                      "omega": {"lower": [], "upper": []}}"#;
        assert!(AffineSystem::from_json_str(doc).is_err());
    }

    #[test]
    fn control_range_validation() {
        assert!(ControlRange::new(vec![0.5], vec![1.0]).is_err()); // not a nbhd of 0
        assert!(ControlRange::new(vec![-1.0], vec![-0.5]).is_err());
        assert!(ControlRange::new(vec![0.0], vec![0.0]).is_err());
        assert!(ControlRange::new(vec![-1.0], vec![1.0]).is_ok());
    }

    #[test]
    fn default_samples_are_vertices_plus_zero() {
        let omega = ControlRange::new(vec![-1.0, -2.0], vec![1.0, 3.0]).unwrap();
        let s = omega.default_samples();
        assert_eq!(s.len(), 5);
        assert!(s.contains(&vec![0.0, 0.0]));
        assert!(s.contains(&vec![-1.0, -2.0]));
        assert!(s.contains(&vec![1.0, 3.0]));
        assert!(s.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn signal_eval_right_continuous() {
        let omega = ControlRange::new(vec![-1.0], vec![1.0]).unwrap();
        let u = ControlSignal::new(vec![0.0, 1.0], vec![vec![-1.0], vec![0.5], vec![1.0]], &omega)
            .unwrap();
        assert_eq!(u.eval(-5.0), &[-1.0]);
        assert_eq!(u.eval(0.0), &[0.5]);
        assert_eq!(u.eval(0.999), &[0.5]);
        assert_eq!(u.eval(1.0), &[1.0]);
        assert_eq!(u.eval(50.0), &[1.0]);
    }
}
