//! TOML run configuration.
//!
//! One file describes the cycle plus optional command sections. The schema
//! is strict: unknown keys are rejected, and all physical constraints are
//! enforced when the cycle is built.

use anyhow::{bail, Context};
use serde::Deserialize;

use otto_core::bloch::BVector;
use otto_core::cycle::{AdiabatKind, CycleSpec, SweepParameter};
use otto_core::lindblad::BathParams;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub cycle: CycleSection,
    #[serde(default)]
    pub simulate: SimulateSection,
    pub sweep: Option<SweepSection>,
    pub optimize: Option<OptimizeSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CycleSection {
    pub omega_a: f64,
    pub omega_b: f64,
    pub j_coupling: f64,
    pub tau_h: f64,
    pub tau_c: f64,
    pub tau_ba: f64,
    pub tau_ab: f64,
    pub hot_bath: BathSection,
    pub cold_bath: BathSection,
    pub adiabat: AdiabatSection,
    #[serde(default = "default_samples")]
    pub samples_per_branch: usize,
    pub adiabat_steps: Option<usize>,
}

fn default_samples() -> usize {
    64
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathSection {
    pub temperature: f64,
    pub gamma_relax: f64,
    #[serde(default)]
    pub gamma_dephase: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdiabatSection {
    /// "linear" or "analytic".
    pub kind: String,
    /// Profile parameter of the analytic schedule, 0 < r < 1.
    pub r: Option<f64>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    /// "limit-cycle" (default), "reference" or "transient".
    pub mode: Option<String>,
    /// Periods to propagate in transient mode.
    pub periods: Option<usize>,
    /// Transient start: a named state or five explicit expectation values.
    pub start: Option<StartState>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum StartState {
    Named(String),
    Values([f64; 5]),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub parameter: String,
    /// Explicit grid; alternative to start/stop/points.
    pub values: Option<Vec<f64>>,
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub points: Option<usize>,
    /// Keep τ_h + τ_c at this value while sweeping one of them.
    pub link_total_isochore: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeSection {
    pub total_budget: f64,
    #[serde(default = "default_min_adiabat")]
    pub min_adiabat: f64,
}

fn default_min_adiabat() -> f64 {
    0.01
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimulateMode {
    LimitCycle,
    Reference,
    Transient,
}

impl RunConfig {
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        toml::from_str(text).context("config does not match the schema")
    }

    pub fn load(path: &std::path::Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        Self::parse(&text)
    }

    /// Build and validate the cycle description.
    pub fn cycle_spec(&self) -> anyhow::Result<CycleSpec> {
        let c = &self.cycle;
        let adiabat = match c.adiabat.kind.as_str() {
            "linear" => {
                if c.adiabat.r.is_some() {
                    bail!("adiabat.r only applies to the analytic schedule");
                }
                AdiabatKind::Linear
            }
            "analytic" => AdiabatKind::Analytic {
                r: c.adiabat.r.context("analytic schedule needs adiabat.r")?,
            },
            other => bail!("unknown adiabat kind {other:?} (use \"linear\" or \"analytic\")"),
        };
        let spec = CycleSpec {
            omega_a: c.omega_a,
            omega_b: c.omega_b,
            j_coupling: c.j_coupling,
            hot_bath: BathParams::new(
                c.hot_bath.temperature,
                c.hot_bath.gamma_relax,
                c.hot_bath.gamma_dephase,
            )?,
            cold_bath: BathParams::new(
                c.cold_bath.temperature,
                c.cold_bath.gamma_relax,
                c.cold_bath.gamma_dephase,
            )?,
            tau_h: c.tau_h,
            tau_c: c.tau_c,
            tau_ba: c.tau_ba,
            tau_ab: c.tau_ab,
            adiabat,
            samples_per_branch: c.samples_per_branch,
            adiabat_steps: c.adiabat_steps,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn simulate_mode(&self) -> anyhow::Result<SimulateMode> {
        Ok(match self.simulate.mode.as_deref() {
            None | Some("limit-cycle") => SimulateMode::LimitCycle,
            Some("reference") => SimulateMode::Reference,
            Some("transient") => SimulateMode::Transient,
            Some(other) => bail!("unknown simulate mode {other:?}"),
        })
    }

    /// Resolve the transient start state.
    pub fn start_state(&self, spec: &CycleSpec) -> anyhow::Result<BVector> {
        match &self.simulate.start {
            None => Ok(BVector::zero()),
            Some(StartState::Values(v)) => Ok(BVector::from_array(*v)),
            Some(StartState::Named(name)) => match name.as_str() {
                "maximally-mixed" => Ok(BVector::zero()),
                "hot-equilibrium" => Ok(otto_core::bloch::equilibrium_bvector(
                    &spec.hot_field(),
                    &spec.hot_bath,
                )?),
                "cold-equilibrium" => Ok(otto_core::bloch::equilibrium_bvector(
                    &spec.cold_field(),
                    &spec.cold_bath,
                )?),
                other => bail!("unknown start state {other:?}"),
            },
        }
    }

    pub fn sweep_plan(&self) -> anyhow::Result<(SweepParameter, Vec<f64>, Option<f64>)> {
        let section = self
            .sweep
            .as_ref()
            .context("config has no [sweep] section")?;
        let parameter = SweepParameter::parse(&section.parameter)?;
        let grid = match (&section.values, section.start, section.stop, section.points) {
            (Some(values), None, None, None) => values.clone(),
            (None, Some(start), Some(stop), Some(points)) => {
                if points == 0 {
                    Vec::new()
                } else if points == 1 {
                    vec![start]
                } else {
                    (0..points)
                        .map(|i| start + (stop - start) * i as f64 / (points - 1) as f64)
                        .collect()
                }
            }
            _ => bail!("sweep needs either `values` or all of `start`, `stop`, `points`"),
        };
        Ok((parameter, grid, section.link_total_isochore))
    }

    pub fn optimize_plan(&self) -> anyhow::Result<&OptimizeSection> {
        self.optimize
            .as_ref()
            .context("config has no [optimize] section")
    }
}
