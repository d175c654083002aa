//! Bath coupling and the dense master-equation oracle.
//!
//! The heat baths enter through eight jump operators F₁…F₈, one raising and
//! one lowering operator for each of the four allowed transitions between
//! energy eigenstates (all with gap Ω/√2). Down rates are equal for the four
//! transitions; up rates follow from detailed balance,
//! k↑/k↓ = exp(−Ω/(√2 T)).
//!
//! The dissipative generator acts on observables as
//!
//! ```text
//! L_D*(A) = Σ_j ( F_j A F_j† − ½(F_j F_j† A + A F_j F_j†) )
//! ```
//!
//! (note the F F† ordering inside the anticommutator — the dagger placement
//! matters and is validated against the closed-form action on B₁,B₂,B₃),
//! plus an elastic pure-dephasing channel `L_De*(A) = −γ[H,[H,A]]`.
//!
//! [`integrate_master_equation`] integrates the trace-dual Schrödinger-picture
//! generator with a fixed-step classical 4th-order scheme. It is deliberately
//! plain: a 4×4 brute-force integrator used as the independent oracle for the
//! closed-form reduced dynamics in [`crate::bloch`].

use std::f64::consts::SQRT_2;

use num_complex::Complex64;

use crate::algebra::{energy_eigensystem, hamiltonian, FieldPoint, Operator4};
use crate::{OttoError, Result};

/// Parameters of one heat bath.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathParams {
    /// Bath temperature T > 0 (k_B = 1).
    pub temperature: f64,
    /// Heat conductance Γ = k↓ + k↑ ≥ 0.
    pub gamma_relax: f64,
    /// Pure-dephasing strength γ ≥ 0 multiplying the double commutator.
    pub gamma_dephase: f64,
}

impl BathParams {
    pub fn new(temperature: f64, gamma_relax: f64, gamma_dephase: f64) -> Result<Self> {
        if !(temperature > 0.0) {
            return Err(OttoError::InvalidBath(format!(
                "temperature must be > 0, got {temperature}"
            )));
        }
        if !(gamma_relax >= 0.0) {
            return Err(OttoError::InvalidBath(format!(
                "gamma_relax must be >= 0, got {gamma_relax}"
            )));
        }
        if !(gamma_dephase >= 0.0) {
            return Err(OttoError::InvalidBath(format!(
                "gamma_dephase must be >= 0, got {gamma_dephase}"
            )));
        }
        Ok(Self {
            temperature,
            gamma_relax,
            gamma_dephase,
        })
    }

    pub fn beta(&self) -> f64 {
        1.0 / self.temperature
    }

    /// (k↓, k↑) at the given field point: Γ = k↓ + k↑ together with detailed
    /// balance k↑/k↓ = exp(−Ω/(√2 T)).
    pub fn rates(&self, fp: &FieldPoint) -> Result<(f64, f64)> {
        let om = fp.big_omega();
        if om <= 0.0 {
            return Err(OttoError::DegenerateField);
        }
        let boltz = (-self.beta() * om / SQRT_2).exp();
        let k_down = self.gamma_relax / (1.0 + boltz);
        let k_up = self.gamma_relax - k_down;
        Ok((k_down, k_up))
    }

    /// (k↓ − k↑)/Γ = tanh(Ωβ/(2√2)), well defined even for Γ = 0.
    pub fn polarization(&self, fp: &FieldPoint) -> f64 {
        (fp.big_omega() * self.beta() / (2.0 * SQRT_2)).tanh()
    }
}

/// The eight jump operators in the polarization representation.
#[derive(Debug, Clone)]
pub struct JumpSet {
    pub ops: [Operator4; 8],
}

/// Build F₁…F₈ from their closed polarization-picture forms, each a
/// √rate-weighted pair of matrix elements built from μ and χ.
pub fn build_jump_operators(fp: &FieldPoint, bath: &BathParams) -> Result<JumpSet> {
    let (mu, chi) = fp.mu_chi()?;
    let (k_down, k_up) = bath.rates(fp)?;
    let sd = k_down.sqrt();
    let su = k_up.sqrt();

    // (scale, [(row, col, value); 2]) per operator
    let two_entries = |s: f64, e: [(usize, usize, f64); 2]| {
        let mut op = Operator4::zero();
        for (r, c, v) in e {
            op.m[r][c] = Complex64::new(s * v, 0.0);
        }
        op
    };
    let f1 = two_entries(sd, [(1, 0, -mu), (1, 3, chi)]);
    let f2 = two_entries(su, [(0, 1, -mu), (3, 1, chi)]);
    let f3 = two_entries(sd, [(2, 0, -mu), (2, 3, chi)]);
    let f4 = two_entries(su, [(0, 2, -mu), (3, 2, chi)]);
    let f5 = two_entries(sd, [(0, 1, chi), (3, 1, mu)]);
    let f6 = two_entries(su, [(1, 0, chi), (1, 3, mu)]);
    let f7 = two_entries(sd, [(0, 2, chi), (3, 2, mu)]);
    let f8 = two_entries(su, [(2, 0, chi), (2, 3, mu)]);

    Ok(JumpSet {
        ops: [f1, f2, f3, f4, f5, f6, f7, f8],
    })
}

/// Heisenberg-picture dissipator Σ_j (F_j A F_j† − ½{F_j F_j†, A}).
pub fn dissipator_heisenberg(a: &Operator4, js: &JumpSet) -> Operator4 {
    let mut out = Operator4::zero();
    for f in &js.ops {
        let fd = f.dagger();
        let ffd = *f * fd;
        out = out + *f * *a * fd - ffd.anticommutator(a).scale_re(0.5);
    }
    out
}

/// Elastic-encounter generator `−γ[H,[H,A]]`; annihilates H itself.
pub fn dephasing_heisenberg(a: &Operator4, h: &Operator4, gamma: f64) -> Operator4 {
    if gamma == 0.0 {
        return Operator4::zero();
    }
    h.commutator(&h.commutator(a)).scale_re(-gamma)
}

/// A state of the pair: Hermitian, unit trace, numerically positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix4 {
    pub op: Operator4,
}

impl DensityMatrix4 {
    /// Validates hermiticity, normalization and positivity to 1e-9.
    pub fn new(op: Operator4) -> Result<Self> {
        let herm = op.hermiticity_defect();
        if herm > 1e-9 {
            return Err(OttoError::InvalidState(format!(
                "hermiticity defect {herm:.3e}"
            )));
        }
        let tr = op.trace();
        if (tr.re - 1.0).abs() > 1e-9 || tr.im.abs() > 1e-9 {
            return Err(OttoError::InvalidState(format!("trace {tr}")));
        }
        let min_eig = op.min_eigenvalue();
        if min_eig < -1e-9 {
            return Err(OttoError::InvalidState(format!(
                "minimum eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(Self { op })
    }

    pub const fn new_unchecked(op: Operator4) -> Self {
        Self { op }
    }

    pub fn trace(&self) -> Complex64 {
        self.op.trace()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.op.min_eigenvalue()
    }
}

/// ⟨A⟩ = Tr{A† ρ}.
pub fn expectation(rho: &DensityMatrix4, a: &Operator4) -> Complex64 {
    a.hs_inner(&rho.op)
}

/// Thermal state exp(−βH)/Z expressed in the polarization picture.
///
/// In the energy picture the diagonal is (e^x, 1, 1, e^−x)/Z with
/// x = Ωβ/√2 and Z = e^−x + 2 + e^x = Γ²/(k↓k↑).
pub fn equilibrium_density(fp: &FieldPoint, bath: &BathParams) -> Result<DensityMatrix4> {
    let (_, c) = energy_eigensystem(fp)?;
    let x = fp.big_omega() * bath.beta() / SQRT_2;
    let z = (-x).exp() + 2.0 + x.exp();
    let rho_e = Operator4::diag([x.exp() / z, 1.0 / z, 1.0 / z, (-x).exp() / z]);
    // C is symmetric and involutory, so C ρ_e C is the polarization picture
    DensityMatrix4::new(c * rho_e * c)
}

/// The full generator at a fixed field point, with the jump structure
/// precomputed once.
pub struct MasterEquation {
    pub h: Operator4,
    pub jumps: JumpSet,
    jump_daggers: [Operator4; 8],
    /// Σ_j F_j F_j†.
    q_sum: Operator4,
    gamma_dephase: f64,
}

impl MasterEquation {
    pub fn new(fp: &FieldPoint, bath: &BathParams) -> Result<Self> {
        let h = hamiltonian(fp);
        let jumps = build_jump_operators(fp, bath)?;
        let jump_daggers = core::array::from_fn(|i| jumps.ops[i].dagger());
        let mut q_sum = Operator4::zero();
        for j in 0..8 {
            q_sum = q_sum + jumps.ops[j] * jump_daggers[j];
        }
        Ok(Self {
            h,
            jumps,
            jump_daggers,
            q_sum,
            gamma_dephase: bath.gamma_dephase,
        })
    }

    /// Schrödinger-picture right-hand side, the trace dual of the Heisenberg
    /// generator: `ρ̇ = −i[H,ρ] + Σ(F† ρ F − ½{F F†, ρ}) − γ[H,[H,ρ]]`.
    pub fn rhs(&self, rho: &Operator4) -> Operator4 {
        let mut out = self.h.commutator(rho).scale(Complex64::new(0.0, -1.0));
        for j in 0..8 {
            out = out + self.jump_daggers[j] * *rho * self.jumps.ops[j];
        }
        out = out - self.q_sum.anticommutator(rho).scale_re(0.5);
        if self.gamma_dephase != 0.0 {
            out = out
                + self
                    .h
                    .commutator(&self.h.commutator(rho))
                    .scale_re(-self.gamma_dephase);
        }
        out
    }

    /// Heisenberg-picture generator `L*(A) = i[H,A] + L_D*(A) + L_De*(A)`,
    /// kept alongside the dual so the two can be checked against each other.
    pub fn heisenberg(&self, a: &Operator4) -> Operator4 {
        self.h.commutator(a).scale(Complex64::new(0.0, 1.0))
            + dissipator_heisenberg(a, &self.jumps)
            + dephasing_heisenberg(a, &self.h, self.gamma_dephase)
    }
}

/// Default oracle step count: duration/steps ≤ 0.001/Ω.
pub fn default_oracle_steps(fp: &FieldPoint, duration: f64) -> usize {
    ((duration * fp.big_omega() / 1e-3).ceil() as usize).max(1)
}

/// Fixed-step 4th-order integration of the master equation over `duration`.
pub fn integrate_master_equation(
    rho0: &DensityMatrix4,
    fp: &FieldPoint,
    bath: &BathParams,
    duration: f64,
    steps: usize,
) -> Result<DensityMatrix4> {
    if steps == 0 {
        return Err(OttoError::InvalidState("steps must be >= 1".into()));
    }
    // re-validate the input against the state invariants
    let mut rho = DensityMatrix4::new(rho0.op)?.op;
    if duration == 0.0 {
        return Ok(DensityMatrix4::new_unchecked(rho));
    }
    let eq = MasterEquation::new(fp, bath)?;
    let dt = duration / steps as f64;
    for _ in 0..steps {
        let k1 = eq.rhs(&rho);
        let k2 = eq.rhs(&(rho + k1.scale_re(dt / 2.0)));
        let k3 = eq.rhs(&(rho + k2.scale_re(dt / 2.0)));
        let k4 = eq.rhs(&(rho + k3.scale_re(dt)));
        rho = rho + (k1 + k2.scale_re(2.0) + k3.scale_re(2.0) + k4).scale_re(dt / 6.0);
    }
    Ok(DensityMatrix4::new_unchecked(rho))
}
