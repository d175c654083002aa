//! The four-stroke cycle: composition, limit cycle, sweeps, optimization.
//!
//! Branch order is fixed: A→B hot isochore at ω_b, B→C expansion adiabat
//! ω_b→ω_a, C→D cold isochore at ω_a, D→A compression adiabat ω_a→ω_b.
//!
//! Every stroke acts on the five-component reduced state as an affine map,
//! so one full period is a single affine map b ↦ M·b + d whose matrix is a
//! strict contraction whenever Γτ > 0 on either isochore. The limit cycle is
//! the fixed point of that map, solved directly as a 5×5 linear system; a
//! plain period-iteration solver is kept as an independent cross-check.
//!
//! Work bookkeeping per adiabat kind:
//! * stepped schedules (linear/tabulated) apply a piecewise-constant field,
//!   so the work is the Stieltjes sum Σ b₁·Δω of the jumps actually applied
//!   (the midpoint-in-ω composite rule for ∫b₁dω); the first law then holds
//!   to roundoff at any step count;
//! * the analytic window propagator yields exact states, and the work uses
//!   ∫b₁ω̇dt = Δ(ωb₁) − √2J∫ωb₃dt with composite Simpson on ωb₃, which
//!   avoids differentiating ω(t);
//! * reference (quasistatic) adiabats integrate b₁(ω) over ω directly.

use rayon::prelude::*;

use crate::adiabat::{
    adiabat_step_propagator, analytic_propagator, default_steps, numeric_propagator, OmegaSchedule,
};
use crate::algebra::FieldPoint;
use crate::bloch::{equilibrium_bvector, isochore_propagator, BVector};
use crate::linalg::{norm5, sub5, AffineMap5, Mat3};
use crate::lindblad::BathParams;
use crate::thermo::{
    cycle_accounting, dynamical_temperature, energy, entropy_energy, entropy_vn, phase_observable,
    BranchEnergetics, CycleAccounting,
};
use crate::{OttoError, Result};

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// How ω moves on the adiabats.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AdiabatKind {
    /// Linear ramp over the configured stroke durations.
    Linear,
    /// The exactly solvable profile; stroke durations are dictated by the
    /// window between the two field values and override the configured ones.
    Analytic { r: f64 },
}

/// Full description of one operating cycle.
#[derive(Debug, Clone)]
pub struct CycleSpec {
    /// Low field endpoint (cold isochore), ω_a > 0.
    pub omega_a: f64,
    /// High field endpoint (hot isochore), ω_b > ω_a.
    pub omega_b: f64,
    pub j_coupling: f64,
    pub hot_bath: BathParams,
    pub cold_bath: BathParams,
    pub tau_h: f64,
    pub tau_c: f64,
    /// Expansion stroke duration (B→C); ignored for analytic adiabats.
    pub tau_ba: f64,
    /// Compression stroke duration (D→A); ignored for analytic adiabats.
    pub tau_ab: f64,
    pub adiabat: AdiabatKind,
    /// Trajectory rows emitted per branch (0 = none, endpoints included).
    pub samples_per_branch: usize,
    /// Override for the stepped-adiabat segment count.
    pub adiabat_steps: Option<usize>,
}

impl CycleSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega_a > 0.0 && self.omega_b > self.omega_a) {
            return Err(OttoError::InvalidState(format!(
                "need omega_b > omega_a > 0, got {} and {}",
                self.omega_a, self.omega_b
            )));
        }
        if !(self.j_coupling >= 0.0) {
            return Err(OttoError::InvalidState("j_coupling must be >= 0".into()));
        }
        if !(self.tau_h > 0.0 && self.tau_c > 0.0) {
            return Err(OttoError::InvalidState(
                "isochore durations must be > 0".into(),
            ));
        }
        if self.adiabat == AdiabatKind::Linear && !(self.tau_ba > 0.0 && self.tau_ab > 0.0) {
            return Err(OttoError::InvalidState(
                "adiabat durations must be > 0".into(),
            ));
        }
        self.expansion_schedule()?;
        Ok(())
    }

    pub fn hot_field(&self) -> FieldPoint {
        FieldPoint::new(self.omega_b, self.j_coupling)
    }

    pub fn cold_field(&self) -> FieldPoint {
        FieldPoint::new(self.omega_a, self.j_coupling)
    }

    pub fn expansion_schedule(&self) -> Result<OmegaSchedule> {
        match self.adiabat {
            AdiabatKind::Linear => Ok(OmegaSchedule::Linear {
                omega_start: self.omega_b,
                omega_end: self.omega_a,
                duration: self.tau_ba,
            }),
            AdiabatKind::Analytic { r } => {
                OmegaSchedule::analytic_between(r, self.j_coupling, self.omega_b, self.omega_a)
            }
        }
    }

    pub fn compression_schedule(&self) -> Result<OmegaSchedule> {
        match self.adiabat {
            AdiabatKind::Linear => Ok(OmegaSchedule::Linear {
                omega_start: self.omega_a,
                omega_end: self.omega_b,
                duration: self.tau_ab,
            }),
            AdiabatKind::Analytic { r } => {
                OmegaSchedule::analytic_between(r, self.j_coupling, self.omega_a, self.omega_b)
            }
        }
    }

    /// Actual stroke durations (analytic windows override the configured
    /// values): (τ_h, τ_ba, τ_c, τ_ab).
    pub fn durations(&self) -> Result<[f64; 4]> {
        Ok([
            self.tau_h,
            self.expansion_schedule()?.duration(),
            self.tau_c,
            self.compression_schedule()?.duration(),
        ])
    }

    pub fn total_time(&self) -> Result<f64> {
        Ok(self.durations()?.iter().sum())
    }

    fn steps_for(&self, sched: &OmegaSchedule) -> usize {
        self.adiabat_steps
            .unwrap_or_else(|| default_steps(sched.max_abs_omega(), sched.duration()))
    }
}

/// The four strokes, in cycle order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    HotIsochore,
    Expansion,
    ColdIsochore,
    Compression,
}

impl Branch {
    pub fn label(&self) -> &'static str {
        match self {
            Branch::HotIsochore => "hot_isochore",
            Branch::Expansion => "expansion_adiabat",
            Branch::ColdIsochore => "cold_isochore",
            Branch::Compression => "compression_adiabat",
        }
    }
}

/// One emitted trajectory row.
#[derive(Debug, Clone, Copy)]
pub struct ThermoSample {
    pub t: f64,
    pub branch: Branch,
    pub omega: f64,
    pub b: BVector,
    pub energy: f64,
    pub entropy_energy: f64,
    pub entropy_vn: f64,
    /// `None` where the entropy rate vanishes (reported as NaN in files).
    pub t_dyn: Option<f64>,
    pub phase_modulus: f64,
    pub phi: Option<f64>,
    pub phi_b: Option<f64>,
    /// Accumulated work on the medium since the cycle start, ∫b₁dω.
    pub work_cum: f64,
    /// Accumulated heat since the cycle start.
    pub heat_cum: f64,
}

/// Output of one stroke: energetics plus optional samples.
struct StrokeRun {
    end: BVector,
    energetics: BranchEnergetics,
    samples: Vec<ThermoSample>,
}

struct Offsets {
    t: f64,
    work: f64,
    heat: f64,
}

#[allow(clippy::too_many_arguments)]
fn make_sample(
    branch: Branch,
    t: f64,
    omega: f64,
    j: f64,
    b: &BVector,
    bath: Option<&BathParams>,
    work_cum: f64,
    heat_cum: f64,
) -> Result<ThermoSample> {
    let fp = FieldPoint::new(omega, j);
    let t_dyn = match dynamical_temperature(b, &fp, 0.0, bath) {
        Ok(t) => Some(t),
        Err(OttoError::UndefinedTemperature(_)) => None,
        Err(e) => return Err(e),
    };
    let phase = phase_observable(b, &fp)?;
    Ok(ThermoSample {
        t,
        branch,
        omega,
        b: *b,
        energy: energy(b, &fp),
        entropy_energy: entropy_energy(b, &fp)?,
        entropy_vn: entropy_vn(b)?,
        t_dyn,
        phase_modulus: phase.modulus,
        phi: phase.phi,
        phi_b: phase.phi_b,
        work_cum,
        heat_cum,
    })
}

/// Sample positions 0..n−1 mapped onto [0, 1].
fn sample_fractions(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
    }
}

fn run_isochore(
    branch: Branch,
    fp: &FieldPoint,
    bath: &BathParams,
    tau: f64,
    b0: &BVector,
    n_samples: usize,
    off: &Offsets,
) -> Result<StrokeRun> {
    let mut samples = Vec::with_capacity(n_samples);
    let e0 = energy(b0, fp);
    for frac in sample_fractions(n_samples) {
        let t = frac * tau;
        let prop = isochore_propagator(fp, bath, t)?;
        let b = prop.propagate(b0);
        let heat_cum = off.heat + energy(&b, fp) - e0;
        samples.push(make_sample(
            branch,
            off.t + t,
            fp.omega,
            fp.j_coupling,
            &b,
            Some(bath),
            off.work,
            heat_cum,
        )?);
    }
    let end = isochore_propagator(fp, bath, tau)?.propagate(b0);
    let delta_e = energy(&end, fp) - e0;
    Ok(StrokeRun {
        end,
        energetics: BranchEnergetics {
            delta_e,
            work: 0.0,
            heat: delta_e,
            duration: tau,
        },
        samples,
    })
}

/// Stepped adiabat: piecewise-constant midpoint field. The work accumulates
/// the b₁·Δω of every field jump actually applied, including a virtual jump
/// onto the continuous ω(t) at each emitted sample, so sampled energies obey
/// E(t) − E(0) = W_cum(t) exactly.
fn run_adiabat_stepped(
    branch: Branch,
    sched: &OmegaSchedule,
    j: f64,
    steps: usize,
    b0: &BVector,
    n_samples: usize,
    off: &Offsets,
) -> Result<StrokeRun> {
    sched.validate()?;
    let tau = sched.duration();
    let dt = tau / steps as f64;
    let sample_steps: Vec<usize> = sample_fractions(n_samples)
        .iter()
        .map(|f| (f * steps as f64).round() as usize)
        .collect();

    let mut samples = Vec::with_capacity(n_samples);
    let mut b = *b0;
    let mut w_acc = 0.0;
    let mut field = sched.omega_at(0.0);
    let mut next_sample = 0usize;
    for k in 0..=steps {
        let t = k as f64 * dt;
        while next_sample < sample_steps.len() && sample_steps[next_sample] == k {
            let omega_here = sched.omega_at(t);
            let w_cum = off.work + w_acc + b.b1 * (omega_here - field);
            samples.push(make_sample(
                branch,
                off.t + t,
                omega_here,
                j,
                &b,
                None,
                w_cum,
                off.heat,
            )?);
            next_sample += 1;
        }
        if k == steps {
            break;
        }
        let omega_mid = sched.omega_at((k as f64 + 0.5) * dt);
        w_acc += b.b1 * (omega_mid - field);
        field = omega_mid;
        let fp = FieldPoint::new(omega_mid, j);
        b = b.with_b123(adiabat_step_propagator(&fp, dt).apply(&b.b123()));
    }
    // close onto the exact endpoint field
    let omega_end = sched.omega_at(tau);
    w_acc += b.b1 * (omega_end - field);

    let fp0 = FieldPoint::new(sched.omega_at(0.0), j);
    let fp1 = FieldPoint::new(omega_end, j);
    let delta_e = energy(&b, &fp1) - energy(b0, &fp0);
    Ok(StrokeRun {
        end: b,
        energetics: BranchEnergetics {
            delta_e,
            work: w_acc,
            heat: 0.0,
            duration: tau,
        },
        samples,
    })
}

/// Analytic adiabat: exact window propagators at the sample points; the work
/// integral uses Δ(ωb₁) − √2J·∫ωb₃dt with per-gap composite Simpson.
fn run_adiabat_analytic(
    branch: Branch,
    sched: &OmegaSchedule,
    j: f64,
    b0: &BVector,
    n_samples: usize,
    quad_points: usize,
    off: &Offsets,
) -> Result<StrokeRun> {
    let tau = sched.duration();
    let fractions = if n_samples >= 2 {
        sample_fractions(n_samples)
    } else {
        vec![0.0, 1.0]
    };
    let gaps = fractions.len() - 1;
    // even number of Simpson subintervals per gap
    let m = quad_points.div_ceil(gaps).max(8).next_multiple_of(2);

    let state_at = |s: f64| -> Result<BVector> {
        let u = analytic_propagator(s, sched)?;
        Ok(b0.with_b123(u.apply(&b0.b123())))
    };
    let integrand = |s: f64| -> Result<f64> {
        let b = state_at(s)?;
        Ok(sched.omega_at(s) * b.b3)
    };

    let w0 = sched.omega_at(0.0);
    let e0 = energy(b0, &FieldPoint::new(w0, j));
    let mut samples = Vec::with_capacity(n_samples);
    let mut integral = 0.0;
    let mut last_b = *b0;
    for (gi, frac) in fractions.iter().enumerate() {
        let s = frac * tau;
        let b = state_at(s)?;
        last_b = b;
        if n_samples > 0 && gi < n_samples {
            let w_cum = off.work + sched.omega_at(s) * b.b1 - w0 * b0.b1 - SQRT_2 * j * integral;
            samples.push(make_sample(
                branch,
                off.t + s,
                sched.omega_at(s),
                j,
                &b,
                None,
                w_cum,
                off.heat,
            )?);
        }
        if gi < gaps {
            let s_next = fractions[gi + 1] * tau;
            let h = (s_next - s) / m as f64;
            let mut acc = integrand(s)? + integrand(s_next)?;
            for q in 1..m {
                let weight = if q % 2 == 1 { 4.0 } else { 2.0 };
                acc += weight * integrand(s + q as f64 * h)?;
            }
            integral += acc * h / 3.0;
        }
    }
    let omega_end = sched.omega_at(tau);
    let work = omega_end * last_b.b1 - w0 * b0.b1 - SQRT_2 * j * integral;
    let delta_e = energy(&last_b, &FieldPoint::new(omega_end, j)) - e0;
    Ok(StrokeRun {
        end: last_b,
        energetics: BranchEnergetics {
            delta_e,
            work,
            heat: 0.0,
            duration: tau,
        },
        samples,
    })
}

fn run_adiabat(
    spec: &CycleSpec,
    branch: Branch,
    sched: &OmegaSchedule,
    b0: &BVector,
    n_samples: usize,
    off: &Offsets,
) -> Result<StrokeRun> {
    match spec.adiabat {
        AdiabatKind::Linear => run_adiabat_stepped(
            branch,
            sched,
            spec.j_coupling,
            spec.steps_for(sched),
            b0,
            n_samples,
            off,
        ),
        AdiabatKind::Analytic { .. } => {
            run_adiabat_analytic(branch, sched, spec.j_coupling, b0, n_samples, 2000, off)
        }
    }
}

/// Affine form of one stroke on the five-component state.
fn stroke_affine_adiabat(spec: &CycleSpec, sched: &OmegaSchedule) -> Result<AffineMap5> {
    let u: Mat3 = match spec.adiabat {
        AdiabatKind::Linear => numeric_propagator(sched, spec.j_coupling, spec.steps_for(sched))?,
        AdiabatKind::Analytic { .. } => analytic_propagator(sched.duration(), sched)?,
    };
    let mut map = AffineMap5::identity();
    for i in 0..3 {
        for jj in 0..3 {
            map.matrix[i][jj] = u.m[i][jj];
        }
    }
    Ok(map)
}

/// The period map b(A) ↦ b(A after one full cycle) as an affine map.
pub fn period_map(spec: &CycleSpec) -> Result<AffineMap5> {
    spec.validate()?;
    let hot = isochore_propagator(&spec.hot_field(), &spec.hot_bath, spec.tau_h)?.affine();
    let exp = stroke_affine_adiabat(spec, &spec.expansion_schedule()?)?;
    let cold = isochore_propagator(&spec.cold_field(), &spec.cold_bath, spec.tau_c)?.affine();
    let comp = stroke_affine_adiabat(spec, &spec.compression_schedule()?)?;
    Ok(hot.then(&exp).then(&cold).then(&comp))
}

/// One period of propagation starting from `b0` (corner A).
pub struct PeriodRun {
    /// States at A, B, C, D and the returning A'.
    pub corners: [BVector; 5],
    pub branches: [BranchEnergetics; 4],
    pub trajectory: Vec<ThermoSample>,
    pub total_time: f64,
}

/// Run one full period A→B→C→D→A' with thermodynamic sampling.
pub fn run_cycle(spec: &CycleSpec, b0: &BVector) -> Result<PeriodRun> {
    spec.validate()?;
    let n = spec.samples_per_branch;
    let mut trajectory = Vec::new();
    let mut off = Offsets {
        t: 0.0,
        work: 0.0,
        heat: 0.0,
    };

    let hot = run_isochore(
        Branch::HotIsochore,
        &spec.hot_field(),
        &spec.hot_bath,
        spec.tau_h,
        b0,
        n,
        &off,
    )?;
    off.t += spec.tau_h;
    off.heat += hot.energetics.heat;
    trajectory.extend(hot.samples);

    let exp_sched = spec.expansion_schedule()?;
    let exp = run_adiabat(spec, Branch::Expansion, &exp_sched, &hot.end, n, &off)?;
    off.t += exp.energetics.duration;
    off.work += exp.energetics.work;
    trajectory.extend(exp.samples);

    let cold = run_isochore(
        Branch::ColdIsochore,
        &spec.cold_field(),
        &spec.cold_bath,
        spec.tau_c,
        &exp.end,
        n,
        &off,
    )?;
    off.t += spec.tau_c;
    off.heat += cold.energetics.heat;
    trajectory.extend(cold.samples);

    let comp_sched = spec.compression_schedule()?;
    let comp = run_adiabat(spec, Branch::Compression, &comp_sched, &cold.end, n, &off)?;
    off.t += comp.energetics.duration;
    trajectory.extend(comp.samples);

    Ok(PeriodRun {
        corners: [*b0, hot.end, exp.end, cold.end, comp.end],
        branches: [
            hot.energetics,
            exp.energetics,
            cold.energetics,
            comp.energetics,
        ],
        trajectory,
        total_time: off.t,
    })
}

/// Limit cycle and its thermodynamics.
#[derive(Debug, Clone)]
pub struct CycleResult {
    /// Corner states A, B, C, D on the limit cycle.
    pub corners: [BVector; 4],
    /// ‖b(A) − b(A after one period)‖ of the reported cycle.
    pub closure_residual: f64,
    pub converged: bool,
    pub branches: [BranchEnergetics; 4],
    pub accounting: CycleAccounting,
    pub trajectory: Vec<ThermoSample>,
    pub total_time: f64,
}

const CLOSURE_TOL: f64 = 1e-8;

/// Solve the limit cycle through the affine structure of the period map;
/// fall back to period iteration if the linear solve degrades.
pub fn find_limit_cycle(spec: &CycleSpec) -> Result<CycleResult> {
    let map = period_map(spec)?;
    let fixed = map
        .fixed_point()
        .filter(|x| norm5(&sub5(&map.apply(x), x)) < 1e-10);
    let (start, converged) = match fixed {
        Some(x) => (x, true),
        None => {
            let (x, _) = iterate_limit_cycle(&map, 10_000, 1e-12)?;
            (x, true)
        }
    };
    let b_star = BVector::from_array(start);
    let run = run_cycle(spec, &b_star)?;
    let closure_residual = norm5(&sub5(&run.corners[4].as_array(), &start));
    if closure_residual > CLOSURE_TOL {
        return Err(OttoError::NotClosed {
            residual: closure_residual,
            tolerance: CLOSURE_TOL,
        });
    }
    let accounting = cycle_accounting(
        &run.branches,
        spec.hot_bath.temperature,
        spec.cold_bath.temperature,
        run.total_time,
    );
    Ok(CycleResult {
        corners: [
            run.corners[0],
            run.corners[1],
            run.corners[2],
            run.corners[3],
        ],
        closure_residual,
        converged,
        branches: run.branches,
        accounting,
        trajectory: run.trajectory,
        total_time: run.total_time,
    })
}

/// Plain fixed-point iteration of the period map, the independent cross-check
/// of the direct solve. Returns the state and the number of periods used.
pub fn iterate_limit_cycle(
    map: &AffineMap5,
    max_periods: usize,
    tol: f64,
) -> Result<([f64; 5], usize)> {
    let mut b = [0.0; 5];
    let mut residual = f64::INFINITY;
    for k in 1..=max_periods {
        let next = map.apply(&b);
        residual = norm5(&sub5(&next, &b));
        b = next;
        if residual < tol {
            return Ok((b, k));
        }
    }
    Err(OttoError::NoConvergence {
        iterations: max_periods,
        residual,
    })
}

/// The reference cycle with unbounded time on every branch: isochores relax
/// all the way to the bath equilibria and the adiabats follow the energy
/// direction with frozen populations (isoentropic). Its efficiency is
/// exactly 1 − Ω_a/Ω_b and its power is zero.
pub fn reference_cycle(spec: &CycleSpec) -> Result<CycleResult> {
    spec.validate()?;
    let n = spec.samples_per_branch;
    let hot_fp = spec.hot_field();
    let cold_fp = spec.cold_field();
    let eq_hot = equilibrium_bvector(&hot_fp, &spec.hot_bath)?;
    let eq_cold = equilibrium_bvector(&cold_fp, &spec.cold_bath)?;
    let d_hot = eq_hot.radius();
    let d_cold = eq_cold.radius();

    let carried = |d: f64, b5: f64, fp: &FieldPoint| -> BVector {
        let om = fp.big_omega();
        BVector::new(-d * fp.omega / om, -d * fp.j_coupling / om, 0.0, 0.0, b5)
    };
    let a = carried(d_cold, eq_cold.b5, &hot_fp);
    let b_corner = eq_hot;
    let c = carried(d_hot, eq_hot.b5, &cold_fp);
    let d_corner = eq_cold;

    // notional display spans: isochores relax over 40/Γ, adiabats use the
    // configured stroke durations
    let tau_h_disp = 40.0 / spec.hot_bath.gamma_relax.max(1e-6);
    let tau_c_disp = 40.0 / spec.cold_bath.gamma_relax.max(1e-6);
    let [_, tau_ba, _, tau_ab] = spec.durations()?;

    let mut trajectory = Vec::new();
    let mut off = Offsets {
        t: 0.0,
        work: 0.0,
        heat: 0.0,
    };
    let mut branches = [BranchEnergetics::default(); 4];

    // hot isochore: full relaxation A → B
    {
        let mut run = run_isochore(
            Branch::HotIsochore,
            &hot_fp,
            &spec.hot_bath,
            tau_h_disp,
            &a,
            n,
            &off,
        )?;
        let heat = energy(&b_corner, &hot_fp) - energy(&a, &hot_fp);
        run.energetics.heat = heat;
        run.energetics.delta_e = heat;
        branches[0] = run.energetics;
        off.t += tau_h_disp;
        off.heat += heat;
        trajectory.extend(run.samples);
    }

    // quasistatic adiabats: b₁(ω) = −D·ω/Ω with Simpson in ω for the work
    let quasistatic = |branch: Branch,
                       from_fp: &FieldPoint,
                       to_fp: &FieldPoint,
                       d: f64,
                       b5: f64,
                       span: f64,
                       off: &mut Offsets|
     -> Result<(BranchEnergetics, Vec<ThermoSample>)> {
        let m = 2000usize;
        let (w0, w1) = (from_fp.omega, to_fp.omega);
        let h = (w1 - w0) / m as f64;
        let b1_at = |w: f64| -> f64 { -d * w / w.hypot(from_fp.j_coupling) };
        let mut acc = b1_at(w0) + b1_at(w1);
        for q in 1..m {
            acc += if q % 2 == 1 { 4.0 } else { 2.0 } * b1_at(w0 + q as f64 * h);
        }
        let work = acc * h / 3.0;
        let mut branch_samples = Vec::with_capacity(n);
        for frac in sample_fractions(n) {
            let w = w0 + (w1 - w0) * frac;
            let fp = FieldPoint::new(w, from_fp.j_coupling);
            let b = carried(d, b5, &fp);
            // partial Simpson up to this sample's ω
            let partial = if frac == 0.0 {
                0.0
            } else {
                let mq = ((m as f64 * frac).round() as usize)
                    .max(2)
                    .next_multiple_of(2);
                let hq = (w - w0) / mq as f64;
                let mut s = b1_at(w0) + b1_at(w);
                for q in 1..mq {
                    s += if q % 2 == 1 { 4.0 } else { 2.0 } * b1_at(w0 + q as f64 * hq);
                }
                s * hq / 3.0
            };
            branch_samples.push(make_sample(
                branch,
                off.t + frac * span,
                w,
                from_fp.j_coupling,
                &b,
                None,
                off.work + partial,
                off.heat,
            )?);
        }
        let delta_e =
            energy(&carried(d, b5, to_fp), to_fp) - energy(&carried(d, b5, from_fp), from_fp);
        off.t += span;
        off.work += work;
        Ok((
            BranchEnergetics {
                delta_e,
                work,
                heat: 0.0,
                duration: span,
            },
            branch_samples,
        ))
    };

    let (exp_energetics, exp_samples) = quasistatic(
        Branch::Expansion,
        &hot_fp,
        &cold_fp,
        d_hot,
        eq_hot.b5,
        tau_ba,
        &mut off,
    )?;
    branches[1] = exp_energetics;
    trajectory.extend(exp_samples);

    // cold isochore: full relaxation C → D
    {
        let mut run = run_isochore(
            Branch::ColdIsochore,
            &cold_fp,
            &spec.cold_bath,
            tau_c_disp,
            &c,
            n,
            &off,
        )?;
        let heat = energy(&d_corner, &cold_fp) - energy(&c, &cold_fp);
        run.energetics.heat = heat;
        run.energetics.delta_e = heat;
        branches[2] = run.energetics;
        off.t += tau_c_disp;
        off.heat += heat;
        trajectory.extend(run.samples);
    }

    let (comp_energetics, comp_samples) = quasistatic(
        Branch::Compression,
        &cold_fp,
        &hot_fp,
        d_cold,
        eq_cold.b5,
        tau_ab,
        &mut off,
    )?;
    branches[3] = comp_energetics;
    trajectory.extend(comp_samples);

    let mut accounting = cycle_accounting(
        &branches,
        spec.hot_bath.temperature,
        spec.cold_bath.temperature,
        f64::INFINITY,
    );
    accounting.power = 0.0;
    Ok(CycleResult {
        corners: [a, b_corner, c, d_corner],
        closure_residual: 0.0,
        converged: true,
        branches,
        accounting,
        trajectory,
        total_time: f64::INFINITY,
    })
}

/// Parameters that a sweep may vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    TauH,
    TauC,
    DephasingHot,
    DephasingCold,
    JCoupling,
    RelaxHot,
    RelaxCold,
    OmegaA,
    OmegaB,
}

impl SweepParameter {
    /// Names follow the cycle notation: lowercase gamma is pure dephasing,
    /// capital Gamma the heat conductance.
    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "tau_h" => Self::TauH,
            "tau_c" => Self::TauC,
            "gamma_h" => Self::DephasingHot,
            "gamma_c" => Self::DephasingCold,
            "j_coupling" => Self::JCoupling,
            "Gamma_h" => Self::RelaxHot,
            "Gamma_c" => Self::RelaxCold,
            "omega_a" => Self::OmegaA,
            "omega_b" => Self::OmegaB,
            other => {
                return Err(OttoError::InvalidState(format!(
                    "unknown sweep parameter {other:?}"
                )))
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::TauH => "tau_h",
            Self::TauC => "tau_c",
            Self::DephasingHot => "gamma_h",
            Self::DephasingCold => "gamma_c",
            Self::JCoupling => "j_coupling",
            Self::RelaxHot => "Gamma_h",
            Self::RelaxCold => "Gamma_c",
            Self::OmegaA => "omega_a",
            Self::OmegaB => "omega_b",
        }
    }

    pub fn apply(&self, spec: &mut CycleSpec, value: f64) {
        match self {
            Self::TauH => spec.tau_h = value,
            Self::TauC => spec.tau_c = value,
            Self::DephasingHot => spec.hot_bath.gamma_dephase = value,
            Self::DephasingCold => spec.cold_bath.gamma_dephase = value,
            Self::JCoupling => spec.j_coupling = value,
            Self::RelaxHot => spec.hot_bath.gamma_relax = value,
            Self::RelaxCold => spec.cold_bath.gamma_relax = value,
            Self::OmegaA => spec.omega_a = value,
            Self::OmegaB => spec.omega_b = value,
        }
    }
}

/// Compact limit-cycle summary for tables.
#[derive(Debug, Clone)]
pub struct CycleSummary {
    pub corners: [BVector; 4],
    pub accounting: CycleAccounting,
    pub closure_residual: f64,
    pub total_time: f64,
}

impl From<&CycleResult> for CycleSummary {
    fn from(r: &CycleResult) -> Self {
        Self {
            corners: r.corners,
            accounting: r.accounting,
            closure_residual: r.closure_residual,
            total_time: r.total_time,
        }
    }
}

/// One sweep grid point; failures are recorded, not fatal.
pub struct SweepPoint {
    pub value: f64,
    pub outcome: Result<CycleSummary>,
}

/// Solve the limit cycle at every grid value of one parameter. Points run in
/// parallel; the output preserves grid order.
pub fn sweep(spec: &CycleSpec, parameter: SweepParameter, grid: &[f64]) -> Vec<SweepPoint> {
    sweep_linked(spec, parameter, grid, None)
}

/// Like [`sweep`], but with the two isochore times optionally linked so that
/// τ_h + τ_c stays at `linked_isochore_total` while one of them is swept —
/// the "power versus hot-contact time at fixed cycle period" setup.
pub fn sweep_linked(
    spec: &CycleSpec,
    parameter: SweepParameter,
    grid: &[f64],
    linked_isochore_total: Option<f64>,
) -> Vec<SweepPoint> {
    grid.par_iter()
        .map(|&value| {
            let mut point_spec = spec.clone();
            point_spec.samples_per_branch = 0;
            parameter.apply(&mut point_spec, value);
            if let Some(total) = linked_isochore_total {
                match parameter {
                    SweepParameter::TauH => point_spec.tau_c = total - value,
                    SweepParameter::TauC => point_spec.tau_h = total - value,
                    _ => {
                        return SweepPoint {
                            value,
                            outcome: Err(OttoError::InvalidState(
                                "isochore link requires sweeping tau_h or tau_c".into(),
                            )),
                        }
                    }
                }
            }
            let outcome = find_limit_cycle(&point_spec).map(|r| CycleSummary::from(&r));
            SweepPoint { value, outcome }
        })
        .collect()
}

/// One optimizer probe.
#[derive(Debug, Clone, Copy)]
pub struct AllocationProbe {
    pub tau_h: f64,
    pub tau_c: f64,
    pub tau_ba: f64,
    pub tau_ab: f64,
    pub power: f64,
}

/// Result of the time-allocation search.
#[derive(Debug, Clone)]
pub struct OptimizationResult {
    pub best: AllocationProbe,
    pub probes: Vec<AllocationProbe>,
    pub rounds: usize,
}

/// Maximize limit-cycle power over branch time allocations at fixed total
/// budget by pairwise golden-section coordinate descent. The search starts
/// from the spec's own allocation (rescaled to the budget) and from the
/// uniform split, keeping the better outcome; it is fully deterministic.
pub fn optimize_time_allocation(
    spec: &CycleSpec,
    total_budget: f64,
    min_adiabat: f64,
) -> Result<OptimizationResult> {
    spec.validate()?;
    if !(total_budget > 4.0 * min_adiabat) {
        return Err(OttoError::InvalidState(format!(
            "budget {total_budget} must exceed 4x min_adiabat {min_adiabat}"
        )));
    }
    let analytic = matches!(spec.adiabat, AdiabatKind::Analytic { .. });
    let fixed_adiabat = if analytic {
        Some(spec.expansion_schedule()?.duration())
    } else {
        None
    };

    let mut probes: Vec<AllocationProbe> = Vec::new();
    let mut power_of = |alloc: [f64; 4]| -> Result<f64> {
        let mut s = spec.clone();
        s.samples_per_branch = 0;
        s.tau_h = alloc[0];
        s.tau_ba = alloc[1];
        s.tau_c = alloc[2];
        s.tau_ab = alloc[3];
        let result = find_limit_cycle(&s)?;
        probes.push(AllocationProbe {
            tau_h: alloc[0],
            tau_c: alloc[2],
            tau_ba: alloc[1],
            tau_ab: alloc[3],
            power: result.accounting.power,
        });
        Ok(result.accounting.power)
    };

    // free coordinates: isochores always; adiabats only for ramp schedules
    let (free, mins): (Vec<usize>, [f64; 4]) = if let Some(w) = fixed_adiabat {
        (vec![0, 2], [min_adiabat, w, min_adiabat, w])
    } else {
        (vec![0, 1, 2, 3], [min_adiabat; 4])
    };

    let normalize = |mut alloc: [f64; 4]| -> [f64; 4] {
        for (k, m) in mins.iter().enumerate() {
            if !free.contains(&k) {
                alloc[k] = *m;
            }
            alloc[k] = alloc[k].max(*m);
        }
        let fixed_sum: f64 = (0..4).filter(|k| !free.contains(k)).map(|k| alloc[k]).sum();
        let free_sum: f64 = free.iter().map(|&k| alloc[k]).sum();
        let target = total_budget - fixed_sum;
        let scale = target / free_sum;
        for &k in &free {
            alloc[k] *= scale;
        }
        alloc
    };

    let seeds = [
        normalize([spec.tau_h, spec.tau_ba, spec.tau_c, spec.tau_ab]),
        normalize([1.0, 1.0, 1.0, 1.0]),
    ];

    let golden = (5f64.sqrt() - 1.0) / 2.0;
    let mut best_alloc = seeds[0];
    let mut best_power = f64::NEG_INFINITY;
    let mut total_rounds = 0usize;
    for seed in seeds {
        let mut alloc = seed;
        let mut power = power_of(alloc)?;
        let max_rounds = 60;
        let mut converged = false;
        for _round in 0..max_rounds {
            total_rounds += 1;
            let mut improved = 0.0f64;
            for (pi, &i) in free.iter().enumerate() {
                for &j in free.iter().skip(pi + 1) {
                    // transfer delta from coordinate j to coordinate i
                    let lo = -(alloc[i] - mins[i]);
                    let hi = alloc[j] - mins[j];
                    if hi - lo < 1e-12 {
                        continue;
                    }
                    let eval = |d: f64, probes_power: &mut dyn FnMut([f64; 4]) -> Result<f64>| {
                        let mut a = alloc;
                        a[i] += d;
                        a[j] -= d;
                        probes_power(a)
                    };
                    let (mut x1, mut x2) = (hi - golden * (hi - lo), lo + golden * (hi - lo));
                    let mut f1 = eval(x1, &mut power_of)?;
                    let mut f2 = eval(x2, &mut power_of)?;
                    let (mut a_lo, mut a_hi) = (lo, hi);
                    for _ in 0..40 {
                        if f1 < f2 {
                            a_lo = x1;
                            x1 = x2;
                            f1 = f2;
                            x2 = a_lo + golden * (a_hi - a_lo);
                            f2 = eval(x2, &mut power_of)?;
                        } else {
                            a_hi = x2;
                            x2 = x1;
                            f2 = f1;
                            x1 = a_hi - golden * (a_hi - a_lo);
                            f1 = eval(x1, &mut power_of)?;
                        }
                    }
                    let (d_best, f_best) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
                    if f_best > power {
                        improved = improved.max(f_best - power);
                        alloc[i] += d_best;
                        alloc[j] -= d_best;
                        power = f_best;
                    }
                }
            }
            if improved < 1e-11 {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(OttoError::NoConvergence {
                iterations: max_rounds,
                residual: f64::NAN,
            });
        }
        if power > best_power {
            best_power = power;
            best_alloc = alloc;
        }
    }

    Ok(OptimizationResult {
        best: AllocationProbe {
            tau_h: best_alloc[0],
            tau_c: best_alloc[2],
            tau_ba: best_alloc[1],
            tau_ab: best_alloc[3],
            power: best_power,
        },
        probes,
        rounds: total_rounds,
    })
}
