//! Self-check battery: every structural identity the engine relies on,
//! runnable from the command line with a fixed seed.
//!
//! Each check reports the largest residual observed against its threshold.
//! The list mirrors the per-module invariants; thresholds are the ones the
//! test suites enforce.

use std::f64::consts::SQRT_2;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::adiabat::{
    alpha_analytic, analytic_propagator, numeric_propagator, omega_analytic, OmegaSchedule,
};
use crate::algebra::{build_basis, energy_eigensystem, hamiltonian, FieldPoint, Operator4};
use crate::bloch::{eom_system, equilibrium_bvector, isochore_propagator, BVector};
use crate::cycle::{
    find_limit_cycle, iterate_limit_cycle, period_map, reference_cycle, AdiabatKind, Branch,
    CycleSpec,
};
use crate::linalg::{norm, sub, sub5};
use crate::lindblad::{
    build_jump_operators, default_oracle_steps, dissipator_heisenberg, equilibrium_density,
    integrate_master_equation, BathParams, DensityMatrix4, MasterEquation,
};
use crate::thermo::dynamical_temperature;
use crate::Result;

/// Outcome of one named check.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub residual: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl CheckResult {
    fn new(name: &'static str, residual: f64, threshold: f64) -> Self {
        Self {
            name,
            residual,
            threshold,
            passed: residual.is_finite() && residual <= threshold,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub seed: u64,
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn random_fp(rng: &mut ChaCha8Rng) -> FieldPoint {
    FieldPoint::new(rng.gen_range(0.5..14.0), rng.gen_range(0.1..4.0))
}

fn random_bath(rng: &mut ChaCha8Rng, dephasing: bool) -> BathParams {
    BathParams::new(
        rng.gen_range(0.5..10.0),
        rng.gen_range(0.05..0.8),
        if dephasing {
            rng.gen_range(0.0..0.01)
        } else {
            0.0
        },
    )
    .expect("valid bath")
}

fn random_density(rng: &mut ChaCha8Rng) -> DensityMatrix4 {
    let mut g = Operator4::zero();
    for i in 0..4 {
        for j in 0..4 {
            g.m[i][j] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
    }
    let p = g * g.dagger();
    DensityMatrix4::new_unchecked(p.scale_re(1.0 / p.trace().re))
}

fn reference_linear_spec() -> CycleSpec {
    CycleSpec {
        omega_a: 5.382,
        omega_b: 12.717,
        j_coupling: 2.0,
        hot_bath: BathParams::new(7.5, 0.382, 0.0).expect("bath"),
        cold_bath: BathParams::new(1.5, 0.342, 0.0).expect("bath"),
        tau_h: 3.0108,
        tau_c: 3.014,
        tau_ba: 0.301,
        tau_ab: 0.346,
        adiabat: AdiabatKind::Linear,
        samples_per_branch: 0,
        adiabat_steps: Some(20_000),
    }
}

fn reference_analytic_spec() -> CycleSpec {
    CycleSpec {
        omega_a: 5.08364,
        omega_b: 11.8675,
        j_coupling: 2.0,
        hot_bath: BathParams::new(7.5, 0.3243, 0.0).expect("bath"),
        cold_bath: BathParams::new(1.5, 0.3243, 0.0).expect("bath"),
        tau_h: 2.0,
        tau_c: 2.1,
        tau_ba: 0.015,
        tau_ab: 0.015,
        adiabat: AdiabatKind::Analytic { r: 0.96 },
        samples_per_branch: 0,
        adiabat_steps: None,
    }
}

/// Run the full battery with a fixed seed.
pub fn run_battery(seed: u64) -> Result<ValidationReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();
    let basis = build_basis();

    // operator algebra
    {
        let mut residual = 0.0f64;
        let ops = basis.ops();
        for (i, a) in ops.iter().enumerate() {
            for (j, b) in ops.iter().enumerate() {
                let inner = a.hs_inner(b);
                let expected = if i == j { 1.0 } else { 0.0 };
                residual = residual.max((inner.re - expected).abs().max(inner.im.abs()));
            }
        }
        checks.push(CheckResult::new("basis orthonormality", residual, 1e-14));

        let i_sqrt2 = Complex64::new(0.0, SQRT_2);
        let closure = [
            basis
                .b1
                .commutator(&basis.b2)
                .max_abs_diff(&basis.b3.scale(i_sqrt2)),
            basis
                .b2
                .commutator(&basis.b3)
                .max_abs_diff(&basis.b1.scale(i_sqrt2)),
            basis
                .b3
                .commutator(&basis.b1)
                .max_abs_diff(&basis.b2.scale(i_sqrt2)),
        ];
        checks.push(CheckResult::new(
            "lie algebra closure",
            closure.into_iter().fold(0.0, f64::max),
            1e-14,
        ));
    }

    // Hamiltonian commutators and spectrum over random field points
    {
        let mut comm = 0.0f64;
        let mut spec = 0.0f64;
        let mut diag = 0.0f64;
        for _ in 0..25 {
            let fp = random_fp(&mut rng);
            let h = hamiltonian(&fp);
            let om = fp.big_omega();
            comm = comm.max(
                h.commutator(&basis.b1)
                    .max_abs_diff(&basis.b3.scale(Complex64::new(0.0, -SQRT_2 * fp.j_coupling))),
            );
            comm = comm.max(
                h.commutator(&basis.b2)
                    .max_abs_diff(&basis.b3.scale(Complex64::new(0.0, SQRT_2 * fp.omega))),
            );
            let eig = h.hermitian_eigenvalues();
            spec = spec
                .max((eig[0] + om / SQRT_2).abs())
                .max(eig[1].abs())
                .max(eig[2].abs())
                .max((eig[3] - om / SQRT_2).abs());
            let (vals, c) = energy_eigensystem(&fp)?;
            diag = diag.max((c * h * c).max_abs_diff(&Operator4::diag(vals)));
        }
        checks.push(CheckResult::new("hamiltonian commutators", comm, 1e-13));
        checks.push(CheckResult::new("energy spectrum symmetry", spec, 1e-12));
        checks.push(CheckResult::new("eigensystem diagonalization", diag, 1e-12));
    }

    // dissipator closed form on B1,B2,B3 (50 randomized parameter sets)
    {
        let mut residual = 0.0f64;
        for _ in 0..50 {
            let fp = random_fp(&mut rng);
            let bath = random_bath(&mut rng, false);
            let js = build_jump_operators(&fp, &bath)?;
            let (kd, ku) = bath.rates(&fp)?;
            let gam = bath.gamma_relax;
            let om = fp.big_omega();
            let id = Operator4::identity();
            let d1 = dissipator_heisenberg(&basis.b1, &js);
            let e1 = -(basis.b1.scale_re(gam) + id.scale_re(fp.omega / (SQRT_2 * om) * (kd - ku)));
            let d2 = dissipator_heisenberg(&basis.b2, &js);
            let e2 =
                -(basis.b2.scale_re(gam) + id.scale_re(fp.j_coupling / (SQRT_2 * om) * (kd - ku)));
            let d3 = dissipator_heisenberg(&basis.b3, &js);
            residual = residual
                .max(d1.max_abs_diff(&e1))
                .max(d2.max_abs_diff(&e2))
                .max(d3.max_abs_diff(&basis.b3.scale_re(-gam)))
                .max(dissipator_heisenberg(&id, &js).max_abs_diff(&Operator4::zero()));
        }
        checks.push(CheckResult::new("dissipator closed form", residual, 1e-12));
    }

    // Heisenberg/Schrödinger duality and oracle conservation laws
    {
        let mut dual = 0.0f64;
        let mut trace = 0.0f64;
        let mut positivity = 0.0f64;
        for _ in 0..6 {
            let fp = random_fp(&mut rng);
            let bath = random_bath(&mut rng, true);
            let eq = MasterEquation::new(&fp, &bath)?;
            let rho = random_density(&mut rng);
            let mut g = Operator4::zero();
            for i in 0..4 {
                for j in 0..4 {
                    g.m[i][j] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                }
            }
            let a = (g + g.dagger()).scale_re(0.5);
            dual = dual
                .max((eq.heisenberg(&a).hs_inner(&rho.op) - a.hs_inner(&eq.rhs(&rho.op))).norm());
            let dur = rng.gen_range(0.2..1.0);
            let steps = default_oracle_steps(&fp, dur);
            let evolved = integrate_master_equation(&rho, &fp, &bath, dur, steps)?;
            trace = trace.max((evolved.trace().re - 1.0).abs());
            positivity = positivity.max((-evolved.min_eigenvalue()).max(0.0));
        }
        checks.push(CheckResult::new("generator trace duality", dual, 1e-12));
        checks.push(CheckResult::new("oracle trace preservation", trace, 1e-10));
        checks.push(CheckResult::new("oracle positivity", positivity, 1e-9));
    }

    // detailed balance of the long-time oracle state
    {
        let fp = FieldPoint::new(5.382, 2.0);
        let bath = BathParams::new(1.5, 0.342, 0.0)?;
        let rho0 = random_density(&mut rng);
        let t_long = 45.0 / bath.gamma_relax;
        let rho = integrate_master_equation(
            &rho0,
            &fp,
            &bath,
            t_long,
            default_oracle_steps(&fp, t_long),
        )?;
        let (_, c) = energy_eigensystem(&fp)?;
        let rho_e = c * rho.op * c;
        let ratio = rho_e.m[0][0].re / rho_e.m[3][3].re;
        let expected = (SQRT_2 * fp.big_omega() * bath.beta()).exp();
        checks.push(CheckResult::new(
            "oracle detailed balance",
            (ratio / expected - 1.0).abs(),
            1e-6,
        ));
        let rho_eq = equilibrium_density(&fp, &bath)?;
        checks.push(CheckResult::new(
            "oracle equilibrium fixed point",
            rho.op.max_abs_diff(&rho_eq.op),
            1e-7,
        ));
    }

    // reduced dynamics: steady state, semigroup, contraction, oracle match
    {
        let mut steady = 0.0f64;
        let mut semigroup = 0.0f64;
        let mut contraction = 0.0f64;
        for _ in 0..10 {
            let fp = random_fp(&mut rng);
            let bath = random_bath(&mut rng, true);
            let sys = eom_system(&fp, &bath)?;
            let eqb = equilibrium_bvector(&fp, &bath)?;
            steady = steady.max(norm(&sub(&sys.drift.apply(&eqb.b123()), &sys.source)));
            let (t1, t2) = (rng.gen_range(0.05..1.0), rng.gen_range(0.05..1.0));
            let p1 = isochore_propagator(&fp, &bath, t1)?.affine();
            let p2 = isochore_propagator(&fp, &bath, t2)?.affine();
            let p12 = isochore_propagator(&fp, &bath, t1 + t2)?.affine();
            semigroup = semigroup.max(p1.then(&p2).max_abs_diff(&p12));

            let plain = BathParams::new(bath.temperature, bath.gamma_relax, 0.0)?;
            let prop = isochore_propagator(&fp, &plain, t1)?;
            let dev = [
                rng.gen_range(-0.4..0.4),
                rng.gen_range(-0.4..0.4),
                rng.gen_range(-0.4..0.4),
            ];
            let expected = (-plain.gamma_relax * t1).exp() * norm(&dev);
            contraction = contraction.max((norm(&prop.u.apply(&dev)) - expected).abs());
        }
        checks.push(CheckResult::new("equilibrium steady state", steady, 1e-12));
        checks.push(CheckResult::new("isochore semigroup", semigroup, 1e-12));
        checks.push(CheckResult::new("isochore contraction", contraction, 1e-12));

        let mut oracle = 0.0f64;
        for _ in 0..5 {
            let fp = random_fp(&mut rng);
            let bath = random_bath(&mut rng, true);
            let rho0 = random_density(&mut rng);
            let b0 = BVector::from_density(&rho0);
            let dur = rng.gen_range(0.2..1.5);
            let closed = isochore_propagator(&fp, &bath, dur)?.propagate(&b0);
            let evolved =
                integrate_master_equation(&rho0, &fp, &bath, dur, default_oracle_steps(&fp, dur))?;
            oracle = oracle.max(closed.max_abs_diff(&BVector::from_density(&evolved)));
        }
        checks.push(CheckResult::new(
            "isochore oracle equivalence",
            oracle,
            1e-7,
        ));

        let fp = FieldPoint::new(6.0, 2.0);
        let bath = random_bath(&mut rng, false);
        let eqb = equilibrium_bvector(&fp, &bath)?;
        checks.push(CheckResult::new(
            "b5 equilibrium consistency",
            (eqb.b5 - (eqb.b1 * eqb.b1 + eqb.b2 * eqb.b2)).abs(),
            1e-14,
        ));
    }

    // adiabats: orthogonality, convergence to the analytic propagator, ODEs
    {
        let exp = OmegaSchedule::analytic_between(0.96, 2.0, 11.8675, 5.08364)?;
        let analytic = analytic_propagator(exp.duration(), &exp)?;
        checks.push(CheckResult::new(
            "adiabat orthogonality",
            analytic.orthogonality_defect(),
            1e-12,
        ));
        let numeric = numeric_propagator(&exp, 2.0, 1000)?;
        checks.push(CheckResult::new(
            "adiabat numeric vs analytic (N=1000)",
            numeric.max_abs_diff(&analytic),
            1e-3,
        ));

        let h = 1e-6;
        let mut ode = 0.0f64;
        for frac in [0.2, 0.4, 0.6, 0.8] {
            let t = frac * 0.96 / (SQRT_2 * 2.0) + 0.002;
            let ap = alpha_analytic(t + h, 0.96, 2.0)?;
            let am = alpha_analytic(t - h, 0.96, 2.0)?;
            let a = alpha_analytic(t, 0.96, 2.0)?;
            let w = omega_analytic(t, 0.96, 2.0)?;
            let (s1, c1) = a.alpha1.sin_cos();
            let (s2, c2) = a.alpha2.sin_cos();
            ode = ode
                .max(
                    ((ap.alpha1 - am.alpha1) / (2.0 * h)
                        - (SQRT_2 * w + SQRT_2 * 2.0 * s1 * s2 / c2))
                        .abs(),
                )
                .max(((ap.alpha2 - am.alpha2) / (2.0 * h) - SQRT_2 * 2.0 * c1).abs())
                .max(((ap.alpha3 - am.alpha3) / (2.0 * h) - SQRT_2 * 2.0 * s1 / c2).abs());
        }
        checks.push(CheckResult::new("wei-norman ode residuals", ode, 1e-6));
    }

    // entropy ordering and unitarity of S_VN along sampled cycles
    {
        let mut spec = reference_analytic_spec();
        spec.samples_per_branch = 64;
        let result = find_limit_cycle(&spec)?;
        let mut ordering = 0.0f64;
        for s in &result.trajectory {
            ordering = ordering.max(s.entropy_vn - s.entropy_energy);
        }
        checks.push(CheckResult::new(
            "entropy ordering S_E >= S_VN",
            ordering,
            1e-12,
        ));
        let mut svn_drift = 0.0f64;
        for branch in [Branch::Expansion, Branch::Compression] {
            let svn: Vec<f64> = result
                .trajectory
                .iter()
                .filter(|s| s.branch == branch)
                .map(|s| s.entropy_vn)
                .collect();
            let hi = svn.iter().cloned().fold(f64::MIN, f64::max);
            let lo = svn.iter().cloned().fold(f64::MAX, f64::min);
            svn_drift = svn_drift.max((hi - lo) / hi.abs().max(1e-30));
        }
        checks.push(CheckResult::new(
            "S_VN constant on adiabats",
            svn_drift,
            1e-6,
        ));
        checks.push(CheckResult::new(
            "first law per branch",
            result.accounting.first_law_residual,
            1e-8,
        ));
    }

    // limit cycle: direct vs iterated, closure, contraction, engine mode
    {
        let spec = reference_linear_spec();
        let map = period_map(&spec)?;
        let direct = map.fixed_point().expect("contraction must be solvable");
        let (iterated, _) = iterate_limit_cycle(&map, 10_000, 1e-13)?;
        let diff = sub5(&direct, &iterated);
        checks.push(CheckResult::new(
            "limit cycle direct vs iterated",
            diff.iter().fold(0.0f64, |m, x| m.max(x.abs())),
            1e-10,
        ));
        let result = find_limit_cycle(&spec)?;
        checks.push(CheckResult::new(
            "limit cycle closure",
            result.closure_residual,
            1e-10,
        ));
        checks.push(CheckResult::new(
            "period map contraction",
            map.spectral_radius_bound(9),
            1.0,
        ));
        let acc = &result.accounting;
        let om_ratio = spec.cold_field().big_omega() / spec.hot_field().big_omega();
        let carnot_chain = acc.engine_mode
            && acc.efficiency > 0.0
            && acc.efficiency <= 1.0 - om_ratio
            && 1.0 - om_ratio < 1.0 - spec.cold_bath.temperature / spec.hot_bath.temperature
            && acc.entropy_production >= -1e-12;
        checks.push(CheckResult::new(
            "engine mode and efficiency chain",
            if carnot_chain { 0.0 } else { 1.0 },
            0.0,
        ));

        let reference = reference_cycle(&reference_analytic_spec())?;
        let eta_max = 1.0
            - reference_analytic_spec().cold_field().big_omega()
                / reference_analytic_spec().hot_field().big_omega();
        checks.push(CheckResult::new(
            "reference cycle efficiency",
            (reference.accounting.efficiency - eta_max).abs(),
            1e-12,
        ));
    }

    // dynamical temperature limits
    {
        let fp = FieldPoint::new(11.8675, 2.0);
        let bath = BathParams::new(7.5, 0.3243, 0.0)?;
        let eqb = equilibrium_bvector(&fp, &bath)?;
        let t = dynamical_temperature(&eqb, &fp, 0.0, None)?;
        checks.push(CheckResult::new(
            "equilibrium temperature",
            (t - bath.temperature).abs(),
            1e-8,
        ));

        let fp0 = FieldPoint::new(4.0, 0.0);
        let bath0 = BathParams::new(2.5, 0.3, 0.0)?;
        let b1 = -(fp0.omega / (2.0 * SQRT_2 * 1.7)).tanh() / SQRT_2;
        let b = BVector::new(b1, 0.0, 0.0, 0.0, b1 * b1);
        let t_dyn = dynamical_temperature(&b, &fp0, 0.0, Some(&bath0))?;
        let ratio = (0.5 - b1 / SQRT_2) / (0.5 + b1 / SQRT_2);
        let two_level = fp0.omega / (SQRT_2 * ratio.ln());
        checks.push(CheckResult::new(
            "two-level temperature reduction",
            (t_dyn - two_level).abs(),
            1e-10,
        ));
        let eq0 = equilibrium_bvector(&fp0, &bath0)?;
        let tanh_form = -(fp0.omega / (2.0 * SQRT_2 * bath0.temperature)).tanh() / SQRT_2;
        checks.push(CheckResult::new(
            "equilibrium polarization tanh form",
            (eq0.b1 - tanh_form).abs(),
            1e-12,
        ));
    }

    // phase modulus decay rate on a dephasing isochore
    {
        let fp = FieldPoint::new(11.8675, 2.0);
        let bath = BathParams::new(7.5, 0.34, 0.01)?;
        let om = fp.big_omega();
        let b0 = BVector::new(-0.2, 0.3, 0.1, 0.0, 0.05);
        let m0 = crate::thermo::phase_observable(&b0, &fp)?.modulus;
        let dt = 0.4;
        let b1 = isochore_propagator(&fp, &bath, dt)?.propagate(&b0);
        let m1 = crate::thermo::phase_observable(&b1, &fp)?.modulus;
        let fitted = -(m1 / m0).ln() / dt;
        let expected = bath.gamma_relax + 2.0 * bath.gamma_dephase * om * om;
        checks.push(CheckResult::new(
            "phase decay rate",
            (fitted / expected - 1.0).abs(),
            0.01,
        ));
    }

    Ok(ValidationReport { seed, checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn battery_passes_with_fixed_seed() {
        let report = run_battery(42).unwrap();
        for c in &report.checks {
            assert!(
                c.passed,
                "check {:?} failed: residual {:.3e} > {:.3e}",
                c.name, c.residual, c.threshold
            );
        }
        assert!(report.all_passed());
        assert!(report.checks.len() >= 25);
    }
}
