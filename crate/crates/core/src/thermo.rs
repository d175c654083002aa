//! State reconstruction and thermodynamic bookkeeping.
//!
//! The five expectation values reconstruct the reduced density operator
//! ρ_R = I/4 + Σ b_k B_k. Three diagonal pictures of it drive the analysis:
//!
//! * polarization picture ρ_p — diagonal 1/4 ± b₁/√2 ± …, corners (b₂∓ib₃)/√2;
//! * energy picture ρ_e — diagonal built from E/(√2Ω), corners give the phase;
//! * eigenpicture — diagonal from D = √(b₁²+b₂²+b₃²).
//!
//! From these come the energy entropy S_E (Shannon entropy of diag ρ_e), the
//! Von Neumann entropy S_VN (eigenvalue entropy, S_E ≥ S_VN), the dynamical
//! temperature T_dyn = Ė/Ṡ_E, and the phase observable
//! ⟨L₊⟩ = (−Jb₁ + ωb₂ + iΩb₃)/(√2Ω) whose modulus decays at Γ + 2γΩ² on the
//! isochores.

use std::f64::consts::SQRT_2;

use num_complex::Complex64;

use crate::algebra::{FieldPoint, Operator4};
use crate::bloch::{equilibrium_bvector, BVector};
use crate::lindblad::{BathParams, DensityMatrix4};
use crate::{OttoError, Result};

/// Internal energy E = ⟨H⟩ = ω·b₁ + J·b₂.
pub fn energy(b: &BVector, fp: &FieldPoint) -> f64 {
    fp.omega * b.b1 + fp.j_coupling * b.b2
}

/// ρ_R in the polarization picture. Purely linear bookkeeping; physicality
/// of the input is not enforced here.
pub fn reconstruct_polarization(b: &BVector) -> DensityMatrix4 {
    let mut m = Operator4::zero();
    let s = 1.0 / SQRT_2;
    m.m[0][0] = Complex64::new(0.25 + b.b1 * s + b.b5 / 2.0, 0.0);
    m.m[1][1] = Complex64::new(0.25 + b.b4 * s - b.b5 / 2.0, 0.0);
    m.m[2][2] = Complex64::new(0.25 - b.b4 * s - b.b5 / 2.0, 0.0);
    m.m[3][3] = Complex64::new(0.25 - b.b1 * s + b.b5 / 2.0, 0.0);
    m.m[0][3] = Complex64::new(b.b2 * s, -b.b3 * s);
    m.m[3][0] = Complex64::new(b.b2 * s, b.b3 * s);
    DensityMatrix4::new_unchecked(m)
}

/// ρ_R in the energy picture; coincides with C·ρ_p·C.
pub fn reconstruct_energy_basis(b: &BVector, fp: &FieldPoint) -> Result<DensityMatrix4> {
    let om = fp.big_omega();
    if om <= 0.0 {
        return Err(OttoError::DegenerateField);
    }
    let e = energy(b, fp);
    let s = 1.0 / SQRT_2;
    let so = 1.0 / (SQRT_2 * om);
    let mut m = Operator4::zero();
    m.m[0][0] = Complex64::new(0.25 - e * so + b.b5 / 2.0, 0.0);
    m.m[1][1] = Complex64::new(0.25 + b.b4 * s - b.b5 / 2.0, 0.0);
    m.m[2][2] = Complex64::new(0.25 - b.b4 * s - b.b5 / 2.0, 0.0);
    m.m[3][3] = Complex64::new(0.25 + e * so + b.b5 / 2.0, 0.0);
    let re = -fp.j_coupling * b.b1 * so + fp.omega * b.b2 * so;
    m.m[0][3] = Complex64::new(re, b.b3 * s);
    m.m[3][0] = Complex64::new(re, -b.b3 * s);
    Ok(DensityMatrix4::new_unchecked(m))
}

/// Diagonal of ρ_e: the four energy-measurement probabilities
/// (1/4 − E/√2Ω + b₅/2, 1/4 ± b₄/√2 − b₅/2, 1/4 + E/√2Ω + b₅/2).
pub fn energy_probabilities(b: &BVector, fp: &FieldPoint) -> Result<[f64; 4]> {
    let om = fp.big_omega();
    if om <= 0.0 {
        return Err(OttoError::DegenerateField);
    }
    let e = energy(b, fp) / (SQRT_2 * om);
    let s = b.b4 / SQRT_2;
    check_probabilities([
        0.25 - e + b.b5 / 2.0,
        0.25 + s - b.b5 / 2.0,
        0.25 - s - b.b5 / 2.0,
        0.25 + e + b.b5 / 2.0,
    ])
}

/// Eigenvalues of ρ_R in closed form,
/// {1/4 ∓ D/√2 + b₅/2, 1/4 ± b₄/√2 − b₅/2} with D = √(b₁²+b₂²+b₃²).
pub fn eigen_probabilities(b: &BVector) -> Result<[f64; 4]> {
    let d = b.radius() / SQRT_2;
    let s = b.b4 / SQRT_2;
    check_probabilities([
        0.25 - d + b.b5 / 2.0,
        0.25 + s - b.b5 / 2.0,
        0.25 - s - b.b5 / 2.0,
        0.25 + d + b.b5 / 2.0,
    ])
}

/// Roundoff inside [−1e−9, 0) is clamped to 0; anything lower is an error.
fn check_probabilities(p: [f64; 4]) -> Result<[f64; 4]> {
    let mut out = [0.0; 4];
    for (i, &pi) in p.iter().enumerate() {
        if !(-1e-9..=1.0 + 1e-9).contains(&pi) {
            return Err(OttoError::UnphysicalState(format!(
                "probability p{} = {pi:.6e}",
                i + 1
            )));
        }
        out[i] = pi.clamp(0.0, 1.0);
    }
    Ok(out)
}

/// Shannon entropy −Σ pᵢ ln pᵢ with 0·ln0 ≡ 0 (natural log, k_B = 1).
pub fn entropy(p: &[f64; 4]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum()
}

/// Energy entropy S_E: Shannon entropy of diag(ρ_e).
pub fn entropy_energy(b: &BVector, fp: &FieldPoint) -> Result<f64> {
    Ok(entropy(&energy_probabilities(b, fp)?))
}

/// Von Neumann entropy S_VN: Shannon entropy of the ρ_R eigenvalues.
pub fn entropy_vn(b: &BVector) -> Result<f64> {
    Ok(entropy(&eigen_probabilities(b)?))
}

/// Dynamical temperature T_dyn = (dE/dt)/(dS_E/dt).
///
/// With a bath attached the probability derivatives collect the relaxation,
/// pump and b₅ terms; `omega_dot` adds the drive contribution. Without a
/// bath the populations only move through ω̇ and everything reduces to
/// T_dyn = √2Ω / ln(p₁/p₄).
pub fn dynamical_temperature(
    b: &BVector,
    fp: &FieldPoint,
    omega_dot: f64,
    bath: Option<&BathParams>,
) -> Result<f64> {
    let om = fp.big_omega();
    if om <= 0.0 {
        return Err(OttoError::DegenerateField);
    }
    let p = energy_probabilities(b, fp)?;
    match bath {
        None => {
            let (p1, p4) = (p[0].max(1e-300), p[3].max(1e-300));
            let log_ratio = (p1 / p4).ln();
            if log_ratio.abs() < 1e-12 {
                return Err(OttoError::UndefinedTemperature(log_ratio));
            }
            Ok(SQRT_2 * om / log_ratio)
        }
        Some(bath) => {
            let (k_down, k_up) = bath.rates(fp)?;
            let dk = k_down - k_up;
            let gam = bath.gamma_relax;
            let e = energy(b, fp);
            let eq = equilibrium_bvector(fp, bath)?;
            let b5_dot = 2.0 * gam * (eq.b1 * b.b1 + eq.b2 * b.b2 - b.b5);
            let b4_dot = -gam * b.b4;
            let drive = (-omega_dot * b.b1 + gam * e) / (SQRT_2 * om);
            let p_dot = [
                drive + dk / 2.0 + b5_dot / 2.0,
                b4_dot / SQRT_2 - b5_dot / 2.0,
                -b4_dot / SQRT_2 - b5_dot / 2.0,
                -drive - dk / 2.0 + b5_dot / 2.0,
            ];
            let numerator = omega_dot * b.b1 - gam * e - om / SQRT_2 * dk;
            let denominator: f64 = -p_dot
                .iter()
                .zip(p.iter())
                .map(|(pd, pi)| pd * (1.0 + pi.max(1e-300).ln()))
                .sum::<f64>();
            if denominator.abs() < 1e-12 {
                return Err(OttoError::UndefinedTemperature(denominator));
            }
            Ok(numerator / denominator)
        }
    }
}

/// Modulus and arguments of the phase observables.
#[derive(Debug, Clone, Copy)]
pub struct PhaseObservable {
    /// |⟨L₊⟩| with L₊ = (−J·B₁ + ω·B₂ + iΩ·B₃)/(√2Ω).
    pub modulus: f64,
    /// arg⟨L₊⟩ = atan2(Ωb₃, −Jb₁+ωb₂); `None` below the modulus floor.
    pub phi: Option<f64>,
    /// Correlation angle φ_B = atan2(b₃, b₂); `None` when b₂ = b₃ = 0.
    pub phi_b: Option<f64>,
}

impl PhaseObservable {
    /// The phase angle, or the error assigned to a meaningless one.
    pub fn phi_strict(&self) -> Result<f64> {
        self.phi.ok_or(OttoError::PhaseUndefined(self.modulus))
    }
}

pub fn phase_observable(b: &BVector, fp: &FieldPoint) -> Result<PhaseObservable> {
    let om = fp.big_omega();
    if om <= 0.0 {
        return Err(OttoError::DegenerateField);
    }
    let transverse = -fp.j_coupling * b.b1 + fp.omega * b.b2;
    let imag = om * b.b3;
    let modulus = transverse.hypot(imag) / (SQRT_2 * om);
    let phi = (modulus >= 1e-14).then(|| imag.atan2(transverse));
    let phi_b = (b.b2.hypot(b.b3) >= 1e-14).then(|| b.b3.atan2(b.b2));
    Ok(PhaseObservable {
        modulus,
        phi,
        phi_b,
    })
}

/// Heat exchanged on an isochore: no power flows at constant field, so the
/// first law gives Q = E(end) − E(start).
pub fn isochore_heat(b_start: &BVector, b_end: &BVector, fp: &FieldPoint) -> f64 {
    energy(b_end, fp) - energy(b_start, fp)
}

/// Trapezoidal quadrature of the work integral ∫ b₁ dω over sampled points.
pub fn work_trapezoid(omegas: &[f64], b1s: &[f64]) -> f64 {
    omegas
        .windows(2)
        .zip(b1s.windows(2))
        .map(|(w, b)| (w[1] - w[0]) * (b[0] + b[1]) / 2.0)
        .sum()
}

/// Per-branch energy bookkeeping.
#[derive(Debug, Clone, Copy, Default)]
pub struct BranchEnergetics {
    pub delta_e: f64,
    pub work: f64,
    pub heat: f64,
    pub duration: f64,
}

impl BranchEnergetics {
    /// |ΔE − (W + Q)|, the first-law residual of this branch.
    pub fn first_law_residual(&self) -> f64 {
        (self.delta_e - self.work - self.heat).abs()
    }
}

/// Whole-cycle figures of merit.
#[derive(Debug, Clone, Copy)]
pub struct CycleAccounting {
    /// Net work delivered by the engine per cycle, −∮ b₁ dω.
    pub work_output: f64,
    /// Heat absorbed from the hot bath on A→B (positive into the medium).
    pub heat_hot: f64,
    /// Heat on the cold isochore C→D (negative when rejected).
    pub heat_cold: f64,
    /// η = W_out/Q_h; NaN when the hot branch absorbs nothing.
    pub efficiency: f64,
    /// W_out divided by the cycle period.
    pub power: f64,
    /// Entropy production at the boundaries, −(Q_h/T_h + Q_c/T_c).
    pub entropy_production: f64,
    /// Largest per-branch first-law residual.
    pub first_law_residual: f64,
    /// W_out > 0 with Q_h > 0 and Q_c < 0.
    pub engine_mode: bool,
}

/// Assemble cycle figures from the four branch energetics, ordered
/// hot isochore, expansion, cold isochore, compression.
pub fn cycle_accounting(
    branches: &[BranchEnergetics; 4],
    t_hot: f64,
    t_cold: f64,
    total_time: f64,
) -> CycleAccounting {
    let heat_hot = branches[0].heat;
    let heat_cold = branches[2].heat;
    let work_on = branches[1].work + branches[3].work;
    let work_output = -work_on;
    let efficiency = if heat_hot > 0.0 {
        work_output / heat_hot
    } else {
        f64::NAN
    };
    let first_law_residual = branches
        .iter()
        .map(BranchEnergetics::first_law_residual)
        .fold(0.0, f64::max);
    CycleAccounting {
        work_output,
        heat_hot,
        heat_cold,
        efficiency,
        power: work_output / total_time,
        entropy_production: -(heat_hot / t_hot + heat_cold / t_cold),
        first_law_residual,
        engine_mode: work_output > 0.0 && heat_hot > 0.0 && heat_cold < 0.0,
    }
}
