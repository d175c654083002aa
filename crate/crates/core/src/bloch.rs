//! Reduced dynamics of the five observables on the isochores.
//!
//! On a constant-field branch the expectation values b_k = ⟨B_k⟩ obey
//! ḃ = B·b − c with a 3×3 drift on (b₁,b₂,b₃) whose spectrum is
//! {−Γ, −Γ−2γΩ² ± i√2Ω}: the component along the energy direction
//! (ω,J,0)/Ω relaxes at Γ, the transverse plane precesses at √2Ω while
//! decaying at Γ + 2γΩ². The propagator exponentiates in closed form:
//!
//! ```text
//! U(Δt) = e^(−(Γ+2γΩ²)Δt) ( (Xω²+cJ²)/Ω²   ωJ(X−c)/Ω²   Js/Ω  )
//!                          ( ωJ(X−c)/Ω²    (XJ²+cω²)/Ω² −ωs/Ω )
//!                          ( −Js/Ω          ωs/Ω          c    )
//! ```
//!
//! with X = e^(2γΩ²Δt), c = cos(√2ΩΔt), s = sin(√2ΩΔt), and the state moves
//! as b(t+Δt) = U(Δt)(b(t) − b_eq) + b_eq. b₄ decays freely at Γ; b₅ obeys a
//! driven first-order equation integrated in closed form.

use std::f64::consts::SQRT_2;

use crate::algebra::{build_basis, FieldPoint};
use crate::linalg::{dot, AffineMap5, Mat3, Vec3};
use crate::lindblad::{BathParams, DensityMatrix4};
use crate::{OttoError, Result};

/// Expectation values of the five basis operators; the reduced state.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BVector {
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub b4: f64,
    pub b5: f64,
}

impl BVector {
    pub fn new(b1: f64, b2: f64, b3: f64, b4: f64, b5: f64) -> Self {
        Self { b1, b2, b3, b4, b5 }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn b123(&self) -> Vec3 {
        [self.b1, self.b2, self.b3]
    }

    pub fn with_b123(&self, v: Vec3) -> Self {
        Self::new(v[0], v[1], v[2], self.b4, self.b5)
    }

    pub fn as_array(&self) -> [f64; 5] {
        [self.b1, self.b2, self.b3, self.b4, self.b5]
    }

    pub fn from_array(a: [f64; 5]) -> Self {
        Self::new(a[0], a[1], a[2], a[3], a[4])
    }

    /// D = √(b₁²+b₂²+b₃²), the Bloch-like radius of the correlated block.
    pub fn radius(&self) -> f64 {
        dot(&self.b123(), &self.b123()).sqrt()
    }

    /// Read the five expectation values out of a full density matrix.
    pub fn from_density(rho: &DensityMatrix4) -> Self {
        let basis = build_basis();
        let expect = |op: &crate::algebra::Operator4| op.hs_inner(&rho.op).re;
        Self::new(
            expect(&basis.b1),
            expect(&basis.b2),
            expect(&basis.b3),
            expect(&basis.b4),
            expect(&basis.b5),
        )
    }

    pub fn max_abs_diff(&self, other: &BVector) -> f64 {
        self.as_array()
            .iter()
            .zip(other.as_array().iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Drift matrix and source vector of ḃ = drift·b − source on (b₁,b₂,b₃).
#[derive(Debug, Clone, Copy)]
pub struct EomSystem {
    pub drift: Mat3,
    pub source: Vec3,
}

/// Equation-of-motion coefficients at a fixed field point.
///
/// The dephasing block is −γ[H,[H,·]] expanded over the basis; it annihilates
/// the energy direction (ω,J,0), which fixes the off-diagonal sign at +2γJω.
pub fn eom_system(fp: &FieldPoint, bath: &BathParams) -> Result<EomSystem> {
    let om = fp.big_omega();
    if om <= 0.0 {
        return Err(OttoError::DegenerateField);
    }
    let (w, j) = (fp.omega, fp.j_coupling);
    let gam = bath.gamma_relax;
    let gd = bath.gamma_dephase;
    let drift = Mat3::new([
        [-gam - 2.0 * gd * j * j, 2.0 * gd * j * w, SQRT_2 * j],
        [2.0 * gd * w * j, -gam - 2.0 * gd * w * w, -SQRT_2 * w],
        [-SQRT_2 * j, SQRT_2 * w, -gam - 2.0 * gd * om * om],
    ]);
    let (k_down, k_up) = bath.rates(fp)?;
    let dk = k_down - k_up;
    let source = [w / (SQRT_2 * om) * dk, j / (SQRT_2 * om) * dk, 0.0];
    Ok(EomSystem { drift, source })
}

/// Stationary state of the isochore dynamics.
///
/// b₁ = −(√2ω/ΩZ)·sinh(Ωβ/√2) = −(ω/√2Ω)·tanh(Ωβ/2√2), b₂ = (J/ω)·b₁,
/// b₃ = b₄ = 0, b₅ = b₁² + b₂². The tanh form stays finite for Γ → 0.
pub fn equilibrium_bvector(fp: &FieldPoint, bath: &BathParams) -> Result<BVector> {
    let om = fp.big_omega();
    if om <= 0.0 {
        return Err(OttoError::DegenerateField);
    }
    let pol = bath.polarization(fp);
    let b1 = -fp.omega / (SQRT_2 * om) * pol;
    let b2 = -fp.j_coupling / (SQRT_2 * om) * pol;
    Ok(BVector::new(b1, b2, 0.0, 0.0, b1 * b1 + b2 * b2))
}

/// Closed-form propagator of one isochore interval.
#[derive(Debug, Clone, Copy)]
pub struct IsochorePropagator {
    /// 3×3 map of the (b₁,b₂,b₃) deviation from equilibrium.
    pub u: Mat3,
    pub b_eq: BVector,
    pub dt: f64,
    /// e^(−ΓΔt), the b₄ decay.
    pub decay_b4: f64,
    /// e^(−2ΓΔt), the homogeneous b₅ decay.
    pub decay_b5: f64,
    /// Linear response of b₅ to the initial (b₁,b₂,b₃) deviation.
    pub b5_coupling: Vec3,
}

/// Build the isochore propagator for elapsed time `dt` ≥ 0.
pub fn isochore_propagator(
    fp: &FieldPoint,
    bath: &BathParams,
    dt: f64,
) -> Result<IsochorePropagator> {
    if !(dt >= 0.0) {
        return Err(OttoError::InvalidState(format!("negative duration {dt}")));
    }
    let om = fp.big_omega();
    if om <= 0.0 {
        return Err(OttoError::DegenerateField);
    }
    let (w, j) = (fp.omega, fp.j_coupling);
    let om2 = om * om;
    let gam = bath.gamma_relax;
    let gd = bath.gamma_dephase;
    let g2 = gam + 2.0 * gd * om2;

    let pre = (-g2 * dt).exp();
    let x = (2.0 * gd * om2 * dt).exp();
    let c = (SQRT_2 * om * dt).cos();
    let s = (SQRT_2 * om * dt).sin();
    let u = Mat3::new([
        [
            (x * w * w + c * j * j) / om2,
            w * j * (x - c) / om2,
            j * s / om,
        ],
        [
            w * j * (x - c) / om2,
            (x * j * j + c * w * w) / om2,
            -w * s / om,
        ],
        [-j * s / om, w * s / om, c],
    ])
    .scale(pre);

    let b_eq = equilibrium_bvector(fp, bath)?;
    let e_decay = (-gam * dt).exp();
    let e_decay2 = (-2.0 * gam * dt).exp();

    // Closed-form b₅ response to the initial deviation. The oscillatory
    // k₀(k₁,k₂) block is kept as written even though k₀ vanishes identically
    // here (J·b₁eq = ω·b₂eq, so the transverse projection of the drive is 0).
    let e_eq = w * b_eq.b1 + j * b_eq.b2;
    let mut coupling = [
        2.0 * e_eq / om2 * (e_decay - e_decay2) * w,
        2.0 * e_eq / om2 * (e_decay - e_decay2) * j,
        0.0,
    ];
    let k0 = 2.0 * gam * (j * b_eq.b1 - w * b_eq.b2) / (om2 * (g2 * g2 + 2.0 * om2));
    let k1_row = [j * g2, -w * g2, -SQRT_2 * om2];
    let k2_row = [SQRT_2 * om * j, -SQRT_2 * om * w, om * g2];
    let osc = (-g2 * dt).exp();
    for i in 0..3 {
        coupling[i] += k0 * ((c * osc - e_decay2) * k1_row[i] + s * osc * k2_row[i]);
    }

    Ok(IsochorePropagator {
        u,
        b_eq,
        dt,
        decay_b4: e_decay,
        decay_b5: e_decay2,
        b5_coupling: coupling,
    })
}

impl IsochorePropagator {
    /// b(t+Δt): affine map around the equilibrium point.
    pub fn propagate(&self, b: &BVector) -> BVector {
        let dev = [
            b.b1 - self.b_eq.b1,
            b.b2 - self.b_eq.b2,
            b.b3 - self.b_eq.b3,
        ];
        let moved = self.u.apply(&dev);
        BVector::new(
            moved[0] + self.b_eq.b1,
            moved[1] + self.b_eq.b2,
            moved[2] + self.b_eq.b3,
            b.b4 * self.decay_b4,
            self.b_eq.b5 + (b.b5 - self.b_eq.b5) * self.decay_b5 + dot(&self.b5_coupling, &dev),
        )
    }

    /// The same map in explicit affine form on the five-component state.
    pub fn affine(&self) -> AffineMap5 {
        let eq = [self.b_eq.b1, self.b_eq.b2, self.b_eq.b3];
        let mut m = [[0.0; 5]; 5];
        let mut d = [0.0; 5];
        for i in 0..3 {
            for jj in 0..3 {
                m[i][jj] = self.u.m[i][jj];
            }
            d[i] = eq[i] - dot(&self.u.m[i], &eq);
        }
        m[3][3] = self.decay_b4;
        m[4][4] = self.decay_b5;
        for jj in 0..3 {
            m[4][jj] = self.b5_coupling[jj];
        }
        d[4] = self.b_eq.b5 * (1.0 - self.decay_b5) - dot(&self.b5_coupling, &eq);
        AffineMap5 {
            matrix: m,
            offset: d,
        }
    }
}

/// Propagate one isochore interval; `prop` must have been built for the
/// branch's field point and bath.
pub fn propagate_isochore(b: &BVector, prop: &IsochorePropagator) -> BVector {
    prop.propagate(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{norm, sub};
    use crate::lindblad::{
        default_oracle_steps, equilibrium_density, integrate_master_equation, DensityMatrix4,
    };
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_fp(rng: &mut ChaCha8Rng) -> FieldPoint {
        FieldPoint::new(rng.gen_range(0.5..14.0), rng.gen_range(0.1..4.0))
    }

    fn random_bath(rng: &mut ChaCha8Rng, with_dephasing: bool) -> BathParams {
        BathParams::new(
            rng.gen_range(0.5..10.0),
            rng.gen_range(0.05..0.8),
            if with_dephasing {
                rng.gen_range(0.0..0.01)
            } else {
                0.0
            },
        )
        .unwrap()
    }

    fn random_density(rng: &mut ChaCha8Rng) -> DensityMatrix4 {
        let mut g = crate::algebra::Operator4::zero();
        for i in 0..4 {
            for j in 0..4 {
                g.m[i][j] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
        let p = g * g.dagger();
        DensityMatrix4::new(p.scale_re(1.0 / p.trace().re)).unwrap()
    }

    #[test]
    fn drift_entries() {
        // γ = 0: drift = −Γ·I + rotation part
        let fp = FieldPoint::new(12.717, 2.0);
        let bath = BathParams::new(7.5, 0.382, 0.0).unwrap();
        let sys = eom_system(&fp, &bath).unwrap();
        assert_eq!(sys.drift.m[2][2], -0.382);
        assert_eq!(sys.drift.m[0][0], -0.382);
        assert_eq!(sys.drift.m[0][1], 0.0);
        assert!((sys.drift.m[0][2] - SQRT_2 * 2.0).abs() < 1e-15);
        assert!((sys.drift.m[1][2] + SQRT_2 * 12.717).abs() < 1e-15);

        // with dephasing the energy direction (ω,J,0) must be annihilated by
        // the γ block: drift·u + Γ·u = 0
        let bath = BathParams::new(7.5, 0.382, 0.004).unwrap();
        let sys = eom_system(&fp, &bath).unwrap();
        let u = [fp.omega, fp.j_coupling, 0.0];
        let r = sys.drift.apply(&u);
        for i in 0..3 {
            assert!((r[i] + bath.gamma_relax * u[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn equilibrium_is_steady_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..20 {
            let fp = random_fp(&mut rng);
            let bath = random_bath(&mut rng, true);
            let sys = eom_system(&fp, &bath).unwrap();
            let eq = equilibrium_bvector(&fp, &bath).unwrap();
            let r = sub(&sys.drift.apply(&eq.b123()), &sys.source);
            assert!(norm(&r) < 1e-12, "steady-state residual {}", norm(&r));
        }
    }

    #[test]
    fn equilibrium_limits() {
        let fp = FieldPoint::new(6.0, 2.5);
        let hot = BathParams::new(1e12, 0.3, 0.0).unwrap();
        let eq = equilibrium_bvector(&fp, &hot).unwrap();
        assert!(eq.b1.abs() < 1e-9 && eq.b2.abs() < 1e-9 && eq.b5.abs() < 1e-9);

        let bath = BathParams::new(2.0, 0.3, 0.0).unwrap();
        let eq = equilibrium_bvector(&fp, &bath).unwrap();
        assert!((eq.b1 / eq.b2 - fp.omega / fp.j_coupling).abs() < 1e-13);
        assert!((eq.b5 - (eq.b1 * eq.b1 + eq.b2 * eq.b2)).abs() < 1e-15);
        assert_eq!(eq.b3, 0.0);
        assert_eq!(eq.b4, 0.0);

        // matches the long-time limit of the dense oracle
        let rho_eq = equilibrium_density(&fp, &bath).unwrap();
        let from_oracle = BVector::from_density(&rho_eq);
        assert!(eq.max_abs_diff(&from_oracle) < 1e-13);
    }

    #[test]
    fn propagator_at_zero_is_identity() {
        let fp = FieldPoint::new(5.0, 1.5);
        let bath = BathParams::new(3.0, 0.4, 0.002).unwrap();
        let prop = isochore_propagator(&fp, &bath, 0.0).unwrap();
        assert!(prop.u.max_abs_diff(&Mat3::identity()) < 1e-15);
        assert_eq!(prop.decay_b4, 1.0);
        assert_eq!(prop.decay_b5, 1.0);
        assert!(norm(&prop.b5_coupling) < 1e-15);
    }

    #[test]
    fn gamma_zero_propagator_is_damped_rotation() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for _ in 0..10 {
            let fp = random_fp(&mut rng);
            let bath = random_bath(&mut rng, false);
            let dt = rng.gen_range(0.1..3.0);
            let prop = isochore_propagator(&fp, &bath, dt).unwrap();
            let r = prop.u.scale((bath.gamma_relax * dt).exp());
            assert!(r.orthogonality_defect() < 1e-12);
            assert!((r.det() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn propagator_matches_numerically_exponentiated_drift() {
        // independent route: high-resolution RK4 of dU/dt = drift·U
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..5 {
            let fp = random_fp(&mut rng);
            let bath = random_bath(&mut rng, true);
            let dt = rng.gen_range(0.2..1.5);
            let sys = eom_system(&fp, &bath).unwrap();
            let steps = (4000.0 * dt * fp.big_omega()).ceil() as usize;
            let h = dt / steps as f64;
            let mut u = Mat3::identity();
            for _ in 0..steps {
                let k1 = sys.drift.mul(&u);
                let k2 = sys.drift.mul(&u.add(&k1.scale(h / 2.0)));
                let k3 = sys.drift.mul(&u.add(&k2.scale(h / 2.0)));
                let k4 = sys.drift.mul(&u.add(&k3.scale(h)));
                u = u
                    .add(&k1.scale(h / 6.0))
                    .add(&k2.scale(h / 3.0))
                    .add(&k3.scale(h / 3.0))
                    .add(&k4.scale(h / 6.0));
            }
            let prop = isochore_propagator(&fp, &bath, dt).unwrap();
            assert!(
                prop.u.max_abs_diff(&u) < 1e-9,
                "closed form vs integrated exponential: {}",
                prop.u.max_abs_diff(&u)
            );
        }
    }

    #[test]
    fn equilibrium_is_fixed_point() {
        let fp = FieldPoint::new(12.717, 2.0);
        let bath = BathParams::new(7.5, 0.382, 0.003).unwrap();
        let prop = isochore_propagator(&fp, &bath, 3.0108).unwrap();
        let eq = prop.b_eq;
        let moved = prop.propagate(&eq);
        assert!(moved.max_abs_diff(&eq) < 1e-14);
    }

    #[test]
    fn b4_decays_exponentially() {
        let fp = FieldPoint::new(5.382, 2.0);
        let bath = BathParams::new(1.5, 0.342, 0.0).unwrap();
        let prop = isochore_propagator(&fp, &bath, 3.014).unwrap();
        let b = BVector::new(0.0, 0.0, 0.0, 0.3, 0.0);
        let moved = prop.propagate(&b);
        assert!((moved.b4 - 0.3 * (-0.342f64 * 3.014).exp()).abs() < 1e-15);
    }

    #[test]
    fn semigroup_property() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..10 {
            let fp = random_fp(&mut rng);
            let bath = random_bath(&mut rng, true);
            let (t1, t2) = (rng.gen_range(0.05..1.0), rng.gen_range(0.05..1.0));
            let p1 = isochore_propagator(&fp, &bath, t1).unwrap().affine();
            let p2 = isochore_propagator(&fp, &bath, t2).unwrap().affine();
            let p12 = isochore_propagator(&fp, &bath, t1 + t2).unwrap().affine();
            assert!(p1.then(&p2).max_abs_diff(&p12) < 1e-12);
        }
    }

    #[test]
    fn contraction_rate_without_dephasing() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        for _ in 0..10 {
            let fp = random_fp(&mut rng);
            let bath = random_bath(&mut rng, false);
            let dt = rng.gen_range(0.1..2.0);
            let prop = isochore_propagator(&fp, &bath, dt).unwrap();
            let dev = [
                rng.gen_range(-0.5..0.5),
                rng.gen_range(-0.5..0.5),
                rng.gen_range(-0.5..0.5),
            ];
            let moved = prop.u.apply(&dev);
            let expected = (-bath.gamma_relax * dt).exp() * norm(&dev);
            assert!((norm(&moved) - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn relaxation_rates_along_and_across_energy_direction() {
        // energy component decays at Γ, transverse at Γ + 2γΩ²; fit both
        let fp = FieldPoint::new(7.0, 2.0);
        let bath = BathParams::new(4.0, 0.3, 0.004).unwrap();
        let om = fp.big_omega();
        let u_dir = [fp.omega / om, fp.j_coupling / om, 0.0];
        let v_dir = [fp.j_coupling / om, -fp.omega / om, 0.0];
        let dt = 0.35;
        let prop = isochore_propagator(&fp, &bath, dt).unwrap();

        let along = prop.u.apply(&u_dir);
        let rate_along = -(norm(&along)).ln() / dt;
        assert!((rate_along / bath.gamma_relax - 1.0).abs() < 1e-10);

        let across = prop.u.apply(&v_dir);
        let rate_across = -(norm(&across)).ln() / dt;
        let expected = bath.gamma_relax + 2.0 * bath.gamma_dephase * om * om;
        assert!((rate_across / expected - 1.0).abs() < 0.01);
    }

    #[test]
    fn closed_form_matches_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for case in 0..6 {
            let (fp, bath, dur) = if case == 0 {
                // the hot-isochore point of the benchmark optimal-allocation cycle
                (
                    FieldPoint::new(12.717, 2.0),
                    BathParams::new(7.5, 0.382, 0.0).unwrap(),
                    3.0108,
                )
            } else {
                (
                    random_fp(&mut rng),
                    random_bath(&mut rng, true),
                    rng.gen_range(0.2..2.0),
                )
            };
            let rho0 = random_density(&mut rng);
            let b0 = BVector::from_density(&rho0);

            let prop = isochore_propagator(&fp, &bath, dur).unwrap();
            let closed = prop.propagate(&b0);

            let steps = default_oracle_steps(&fp, dur);
            let rho_t = integrate_master_equation(&rho0, &fp, &bath, dur, steps).unwrap();
            let oracle = BVector::from_density(&rho_t);

            let diff = closed.max_abs_diff(&oracle);
            assert!(diff < 1e-7, "case {case}: closed vs oracle diff {diff:.3e}");
        }
    }
}
