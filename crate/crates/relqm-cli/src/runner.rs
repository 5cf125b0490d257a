//! Command execution: every number emitted comes straight from a library
//! call; the CLI performs no arithmetic of its own beyond ordering output.

use relqm::dynamics::{evolve_relational, HermitianOperator};
use relqm::entangle::{entropy, schmidt, DEFAULT_ENTROPY_TOL};
use relqm::pathint::{kernel_single, reduced_density_paths, relational_from_paths, Subsystem};
use relqm::prob::{
    prob_coherent_with, prob_incoherent, prob_joint, prob_transition_with, OutcomeSet,
};
use serde::Serialize;

use crate::scenario::{grid_to_matrix, matrix_to_grid, Grid, Scenario};

/// Failure modes mapped to exit codes: schema/usage problems exit 1, numeric
/// domain errors from the library exit 2 with the library message verbatim.
#[derive(Debug)]
pub enum CliError {
    Schema(String),
    Domain(relqm::Error),
}

impl From<relqm::Error> for CliError {
    fn from(e: relqm::Error) -> Self {
        CliError::Domain(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Schema(msg) => write!(f, "{msg}"),
            CliError::Domain(e) => write!(f, "{e}"),
        }
    }
}

fn schema(msg: impl Into<String>) -> CliError {
    CliError::Schema(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ProbMode {
    Coherent,
    Incoherent,
    Joint,
    Transition,
}

#[derive(Debug, Serialize)]
pub struct ProbResult {
    pub p: f64,
}

#[derive(Debug, Serialize)]
pub struct EntropyResult {
    pub entropy: f64,
}

#[derive(Debug, Serialize)]
pub struct SchmidtResult {
    pub singulars: Vec<f64>,
    pub u: Grid,
    pub v: Grid,
}

#[derive(Debug, Serialize)]
pub struct EvolveSnapshot {
    pub t: f64,
    pub matrix: Grid,
    pub entropy: f64,
    pub probabilities: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct EvolveResult {
    pub snapshots: Vec<EvolveSnapshot>,
}

#[derive(Debug, Serialize)]
pub struct PathintResult {
    pub kernel: Grid,
    pub relational: Grid,
    pub entropy: f64,
    pub rho: Grid,
    pub probabilities: Vec<f64>,
}

pub fn run_prob(
    scenario: &Scenario,
    scenario_b: Option<&Scenario>,
    mode: ProbMode,
    outcome: &[usize],
    apparatus_index: Option<usize>,
    tol: Option<f64>,
) -> Result<ProbResult, CliError> {
    let r = scenario.relational_matrix().map_err(schema)?;
    let tol = tol.unwrap_or(DEFAULT_ENTROPY_TOL);
    let p = match mode {
        ProbMode::Coherent => {
            let set = outcome_set(outcome)?;
            prob_coherent_with(&r, &set, tol)?
        }
        ProbMode::Incoherent => {
            let set = outcome_set(outcome)?;
            prob_incoherent(&r, &set)?
        }
        ProbMode::Joint => {
            let i = match outcome {
                [i] => *i,
                _ => {
                    return Err(schema(
                        "mode joint requires exactly one --outcome index (the system index)",
                    ))
                }
            };
            let j =
                apparatus_index.ok_or_else(|| schema("mode joint requires --apparatus-index"))?;
            prob_joint(&r, i, j)?
        }
        ProbMode::Transition => {
            let other = scenario_b.ok_or_else(|| {
                schema("mode transition requires --scenario-b (the target matrix)")
            })?;
            let q = other.relational_matrix().map_err(schema)?;
            prob_transition_with(&q, &r, tol)?
        }
    };
    Ok(ProbResult { p })
}

fn outcome_set(outcome: &[usize]) -> Result<OutcomeSet, CliError> {
    if outcome.is_empty() {
        return Err(schema(
            "this mode requires --outcome with at least one index",
        ));
    }
    OutcomeSet::new(outcome.to_vec()).map_err(CliError::Domain)
}

pub fn run_entropy(scenario: &Scenario) -> Result<EntropyResult, CliError> {
    let r = scenario.relational_matrix().map_err(schema)?;
    Ok(EntropyResult {
        entropy: entropy(&r)?,
    })
}

pub fn run_schmidt(scenario: &Scenario) -> Result<SchmidtResult, CliError> {
    let r = scenario.relational_matrix().map_err(schema)?;
    let dec = schmidt(&r)?;
    Ok(SchmidtResult {
        singulars: dec.singulars().to_vec(),
        u: matrix_to_grid(dec.u()),
        v: matrix_to_grid(dec.v()),
    })
}

pub fn run_evolve(
    scenario: &Scenario,
    hbar_override: Option<f64>,
) -> Result<EvolveResult, CliError> {
    let r0 = scenario.relational_matrix().map_err(schema)?;
    let hbar = hbar_override.or(scenario.hbar).unwrap_or(1.0);
    let hs_grid = scenario
        .hamiltonian_s
        .as_ref()
        .ok_or_else(|| schema("field `hamiltonian_s` is required for evolve"))?;
    let h_s = HermitianOperator::with_hbar(
        grid_to_matrix(hs_grid, "hamiltonian_s").map_err(schema)?,
        hbar,
    )?;
    let h_a = match &scenario.hamiltonian_a {
        Some(grid) => HermitianOperator::with_hbar(
            grid_to_matrix(grid, "hamiltonian_a").map_err(schema)?,
            hbar,
        )?,
        None => {
            HermitianOperator::with_hbar(nalgebra::DMatrix::zeros(r0.n_app(), r0.n_app()), hbar)?
        }
    };
    let mut times = scenario
        .times
        .clone()
        .ok_or_else(|| schema("field `times` is required for evolve"))?;
    if times.is_empty() {
        return Err(schema("field `times` must list at least one time"));
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(schema("field `times` must contain finite values"));
    }
    times.sort_by(|a, b| a.partial_cmp(b).expect("finite times"));

    let mut snapshots = Vec::with_capacity(times.len());
    for &t in &times {
        let rt = evolve_relational(&r0, &h_s, &h_a, t)?;
        let h = entropy(&rt)?;
        let mut probabilities = Vec::with_capacity(rt.n_sys());
        for i in 0..rt.n_sys() {
            probabilities.push(prob_incoherent(&rt, &OutcomeSet::single(i))?);
        }
        snapshots.push(EvolveSnapshot {
            t,
            matrix: matrix_to_grid(rt.entries()),
            entropy: h,
            probabilities,
        });
    }
    Ok(EvolveResult { snapshots })
}

pub fn run_pathint(
    scenario: &Scenario,
    hbar_override: Option<f64>,
) -> Result<PathintResult, CliError> {
    let lat = scenario.lattice().map_err(schema)?;
    let act = scenario.action(hbar_override).map_err(schema)?;
    let (start_s, start_a) = scenario.start_indices(&lat);
    let kernel = kernel_single(&lat, &act, Subsystem::System)?;
    let r = relational_from_paths(&lat, &lat, &act, start_s, start_a)?;
    let h = entropy(&r)?;
    let block = reduced_density_paths(&lat, &lat, &act, start_s, start_s)?;
    // position distribution at the final slice: normalized diagonal of the
    // path density block (library trace normalization, then diagonal reads)
    let rho_norm = block.to_density_matrix()?.trace_normalized()?;
    let probabilities: Vec<f64> = (0..rho_norm.dim())
        .map(|i| rho_norm.entries()[(i, i)].re)
        .collect();
    Ok(PathintResult {
        kernel: matrix_to_grid(kernel.matrix()),
        relational: matrix_to_grid(r.entries()),
        entropy: h,
        rho: matrix_to_grid(block.matrix()),
        probabilities,
    })
}
