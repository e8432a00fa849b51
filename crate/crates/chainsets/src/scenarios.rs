//! Worked examples with analytic oracles, as ready-to-run configurations.

use nalgebra::{DMatrix, DVector};

use crate::engine::Weight;
use crate::systems::{AffineSystem, ControlRange, SystemError};

/// A named system with recommended engine parameters. The analytic oracle
/// facts (equilibria maps, eigenvalue formulas, known chain/strong sets) live
/// in the free functions below and in the scenario's test suites.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: &'static str,
    pub system: AffineSystem,
    /// Recommended euclidean window, one (lower, upper) per coordinate.
    pub window: Vec<(f64, f64)>,
    pub depth: usize,
    pub t_chain: f64,
    pub eps: f64,
    pub ladder: Vec<f64>,
    pub weight: Weight,
    pub step: f64,
}

impl Scenario {
    /// Engine-parameter sidecar accompanying the system JSON export.
    pub fn sidecar_json(&self) -> serde_json::Value {
        serde_json::json!({
            "name": self.name,
            "window": self.window.iter().map(|w| [w.0, w.1]).collect::<Vec<_>>(),
            "depth": self.depth,
            "T": self.t_chain,
            "eps": self.eps,
            "delta_ladder": self.ladder,
            "weight": self.weight.name(),
            "step": self.step,
        })
    }
}

/// Shear flow ẋ = y, ẏ = 0 (control-free). The whole plane is chain
/// transitive at coarse ε, but the strong chain recurrent set is exactly the
/// x-axis of equilibria; on the compactified hemisphere the ladder survivors
/// hug the arc {s₂ = 0}.
pub fn shear_flow_scenario() -> Scenario {
    let system = AffineSystem::new(
        vec![DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0])],
        vec![DVector::zeros(2)],
        ControlRange::empty(),
    )
    .expect("shear flow system is valid");
    Scenario {
        name: "shear_flow",
        system,
        window: vec![(-3.0, 3.0), (-3.0, 3.0)],
        depth: 7,
        t_chain: 1.0,
        eps: 0.2,
        ladder: vec![0.5, 0.1, 0.02],
        weight: Weight::EquatorHeight,
        // RK4 on this smooth flow is ~1e-8 accurate at this step, orders of
        // magnitude below the box resolution at the recommended depth.
        step: 2e-2,
    }
}

/// 3-D linear control system ẋ = Ax + u·(0,0,1) with drift rows
/// (0,1,0), (0,0,0), (0,0,1) and Ω = [−1,1]. Oracles: strong chain control
/// set ℝ×{0}×[−1,1], chain control set ℝ²×[−1,1], control set
/// D₀ = {(0,0)}×(−1,1).
pub fn linear_3d_scenario() -> Scenario {
    let a0 = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
    let system = AffineSystem::new(
        vec![a0, DMatrix::zeros(3, 3)],
        vec![DVector::zeros(3), DVector::from_column_slice(&[0.0, 0.0, 1.0])],
        ControlRange::new(vec![-1.0], vec![1.0]).expect("omega valid"),
    )
    .expect("3-d linear system is valid");
    Scenario {
        name: "linear_3d",
        system,
        window: vec![(-8.0, 8.0), (-4.0, 4.0), (-3.0, 3.0)],
        depth: 6,
        t_chain: 1.0,
        eps: 1.0,
        // The central component's extent tracks where layer-crossing jumps in
        // the frozen y coordinate stay affordable, which moves fast with δ
        // (the weight is ~1/|x| far out); the last two deltas sit within a
        // tenth of each other so the one-diameter stabilization check
        // compares like with like, and bottom out near the sampling floor
        // (quarter-width inflation, sampled |y| down to ~0.02).
        ladder: vec![0.5, 0.0275, 0.025],
        weight: Weight::InverseNorm,
        // RK4 at this step is ~1e-6 accurate on this linear flow over T = 1,
        // far below the box resolution.
        step: 5e-2,
    }
}

/// Planar affine system with matrix rows (0, 1) and (−1−u, −3), offsets
/// u·(0,1) + (0,d), Ω = [−ρ, ρ]. Valid for ρ ∈ (1, 5/4) and d < 1. Each
/// constant u ≠ −1 has the equilibrium ((d+u)/(1+u), 0); the equilibria form
/// two continua, 𝒞₁ for u ∈ [−ρ, −1) and 𝒞₂ for u ∈ (−1, ρ].
pub fn example2_scenario(rho: f64, d: f64) -> Result<Scenario, SystemError> {
    if !(rho > 1.0 && rho < 1.25) {
        return Err(SystemError::Parameter(
            "rho must lie in the open interval (1, 5/4)".into(),
        ));
    }
    if !(d < 1.0) {
        return Err(SystemError::Parameter("d must be < 1".into()));
    }
    let a0 = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, -3.0]);
    let a1 = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, -1.0, 0.0]);
    let system = AffineSystem::new(
        vec![a0, a1],
        vec![
            DVector::from_column_slice(&[0.0, d]),
            DVector::from_column_slice(&[0.0, 1.0]),
        ],
        ControlRange::new(vec![-rho], vec![rho])?,
    )?;
    Ok(Scenario {
        name: "example2",
        system,
        window: vec![(-4.0, 8.0), (-4.0, 4.0)],
        depth: 8,
        // Between the two equilibrium continua the flow drifts away from
        // the saddle at x = 6 like (x−6)(e^{t/30}−1) under the slowest
        // control. Wherever one step moves less than the jump radius plus
        // a box width, box-restart chains fake recurrence, so the channel
        // sprouts spurious one-column components unless that marginal band
        // is thinner than the grid spacing and falls between column
        // centers. T = 45 (drift factor e^{1.5}−1 ≈ 3.5) places the band
        // at |x−6| ∈ (0.016, 0.031), clear of the depth-8 columns at
        // offsets 0.008 and 0.039, while the equilibrium sets themselves
        // are horizon-independent.
        t_chain: 45.0,
        eps: 0.05,
        ladder: vec![0.3, 0.1, 0.05],
        weight: Weight::EquatorHeight,
        // Eigenvalues over the control range stay in [−3.1, 0.04]; RK4 at
        // |λh| ≈ 0.45 resolves the flow far below the box resolution.
        step: 0.15,
    })
}

/// Equilibrium ((d+u)/(1+u), 0) of the two-equilibria planar system, u ≠ −1.
pub fn example2_equilibrium(rho: f64, d: f64, u: f64) -> Option<(f64, f64)> {
    if u.abs() > rho || (1.0 + u).abs() < 1e-12 {
        return None;
    }
    Some(((d + u) / (1.0 + u), 0.0))
}

/// Eigenvalues λ₁,₂(u) = −3/2 ± √(5/4 − u) at the equilibrium for constant u
/// (complex for u > 5/4; all scenario controls satisfy u ≤ ρ < 5/4).
pub fn example2_eigenvalues(u: f64) -> (f64, f64) {
    let r = (1.25 - u).sqrt();
    (-1.5 + r, -1.5 - r)
}

/// Scalar hyperbolic system ẋ = −x + u, Ω = [−1,1]: unique chain control set
/// [−1,1], compact, bounded away from the equator on 𝕊¹.
pub fn scalar_hyperbolic_scenario() -> Scenario {
    let system = AffineSystem::new(
        vec![DMatrix::from_row_slice(1, 1, &[-1.0]), DMatrix::zeros(1, 1)],
        vec![DVector::zeros(1), DVector::from_column_slice(&[1.0])],
        ControlRange::new(vec![-1.0], vec![1.0]).expect("omega valid"),
    )
    .expect("scalar system is valid");
    Scenario {
        name: "scalar_hyperbolic",
        system,
        window: vec![(-3.0, 3.0)],
        depth: 8,
        t_chain: 1.0,
        // An ε-chain set of ẋ = −x + u overshoots [−1, 1] by about
        // ε/(1 − e⁻¹); keep ε well under a box diameter so the computed set
        // hugs the true one and the edge inflation cannot manufacture
        // isolated self-loops just outside it.
        eps: 0.005,
        ladder: vec![0.2, 0.1, 0.05],
        weight: Weight::Unit,
        step: 1e-2,
    }
}

/// Built-in scenario lookup for the CLI (example2 with default ρ=1.1, d=0.5).
pub fn by_name(name: &str) -> Option<Scenario> {
    match name {
        "shear_flow" => Some(shear_flow_scenario()),
        "linear_3d" => Some(linear_3d_scenario()),
        "example2" => example2_scenario(1.1, 0.5).ok(),
        "scalar_hyperbolic" => Some(scalar_hyperbolic_scenario()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{integrate, ControlSignal};

    fn dvec(v: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(v)
    }

    #[test]
    fn shear_flow_closed_form() {
        // φ(t, (x,y)) = (x + ty, y); at t = 2, (1,1) → (3,1).
        let sc = shear_flow_scenario();
        let u = ControlSignal::constant_unchecked(vec![]);
        let field = |x: &DVector<f64>, uc: &[f64]| sc.system.field(x, uc);
        let x = integrate(&field, &dvec(&[1.0, 1.0]), &u, 0.0, 2.0, 1e-3).unwrap();
        assert!((x - dvec(&[3.0, 1.0])).norm() < 1e-10);
        // x-axis points are equilibria
        let e = integrate(&field, &dvec(&[5.0, 0.0]), &u, 0.0, 7.0, 1e-3).unwrap();
        assert!((e - dvec(&[5.0, 0.0])).norm() < 1e-12);
    }

    #[test]
    fn linear_3d_origin_fixed_with_zero_control() {
        let sc = linear_3d_scenario();
        let u = ControlSignal::constant(vec![0.0], sc.system.omega()).unwrap();
        let field = |x: &DVector<f64>, uc: &[f64]| sc.system.field(x, uc);
        let x = integrate(&field, &DVector::zeros(3), &u, 0.0, 5.0, 1e-3).unwrap();
        assert!(x.norm() < 1e-12);
    }

    #[test]
    fn example2_oracles() {
        assert_eq!(example2_equilibrium(1.1, 0.5, 0.0), Some((0.5, 0.0)));
        // continuum endpoints with the default parameters: 6 and ≈0.762
        let c1 = example2_equilibrium(1.1, 0.5, -1.1).unwrap();
        assert!((c1.0 - 6.0).abs() < 1e-12);
        let c2 = example2_equilibrium(1.1, 0.5, 1.1).unwrap();
        assert!((c2.0 - 1.6 / 2.1).abs() < 1e-12);
        assert_eq!(example2_equilibrium(1.1, 0.5, -1.0), None);

        let (l1, l2) = example2_eigenvalues(-1.0);
        assert!((l1 - 0.0).abs() < 1e-12 && (l2 + 3.0).abs() < 1e-12);
        let (l1, l2) = example2_eigenvalues(1.0);
        assert!((l1 + 1.0).abs() < 1e-12 && (l2 + 2.0).abs() < 1e-12);
    }

    #[test]
    fn example2_rejects_boundary_parameters() {
        assert!(example2_scenario(1.0, 0.5).is_err());
        assert!(example2_scenario(1.25, 0.5).is_err());
        assert!(example2_scenario(1.1, 1.0).is_err());
        assert!(example2_scenario(1.1, 0.5).is_ok());
    }

    #[test]
    fn example2_equilibria_are_integrate_fixed_points() {
        let sc = example2_scenario(1.1, 0.5).unwrap();
        let field = |x: &DVector<f64>, uc: &[f64]| sc.system.field(x, uc);
        for &uv in &[-1.1, -1.05, 0.0, 0.5, 1.1] {
            let (ex, ey) = example2_equilibrium(1.1, 0.5, uv).unwrap();
            let u = ControlSignal::constant(vec![uv], sc.system.omega()).unwrap();
            let x = integrate(&field, &dvec(&[ex, ey]), &u, 0.0, 10.0, 1e-3).unwrap();
            assert!((x - dvec(&[ex, ey])).norm() < 1e-8, "u = {uv}");
        }
    }

    #[test]
    fn scalar_equilibria_sweep() {
        let sc = scalar_hyperbolic_scenario();
        let field = |x: &DVector<f64>, uc: &[f64]| sc.system.field(x, uc);
        for k in 0..=20 {
            let uv = -1.0 + 0.1 * k as f64;
            let u = ControlSignal::constant(vec![uv], sc.system.omega()).unwrap();
            let x = integrate(&field, &dvec(&[uv]), &u, 0.0, 10.0, 1e-3).unwrap();
            assert!((x[0] - uv).abs() < 1e-8);
        }
    }

    #[test]
    fn scenario_json_export_roundtrips() {
        for name in ["shear_flow", "linear_3d", "example2", "scalar_hyperbolic"] {
            let sc = by_name(name).unwrap();
            let s = sc.system.to_json_string();
            let back = AffineSystem::from_json_str(&s).unwrap();
            assert_eq!(back.matrices(), sc.system.matrices());
            let side = sc.sidecar_json();
            assert_eq!(side["name"], name);
        }
    }
}
