//! Scenario file schema and loading.
//!
//! A scenario is a JSON object with top-level keys `kind`, `system_dim`,
//! `apparatus_dim`, `matrix`, `norm_mode`, `hamiltonian_s`, `hamiltonian_a`,
//! `hbar`, `times`, `lattice`, `action`. Complex numbers are `[re, im]`
//! pairs, grids are row-major arrays of rows. Tool output produced with
//! `--format json` echoes the scenario under a `scenario` key and can be fed
//! back in as input unchanged.

use nalgebra::DMatrix;
use relqm::pathint::{ActionSpec, Interaction, Lattice1D, Potential};
use relqm::relcore::NormMode;
use relqm::C64;
use serde::{Deserialize, Serialize};

pub type Grid = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Matrix,
    Evolution,
    PathIntegral,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system_dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub apparatus_dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Grid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm_mode: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonian_s: Option<Grid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonian_a: Option<Grid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hbar: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<LatticeFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<ActionFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeFile {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
    pub n_slices: usize,
    pub dt: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionFile {
    pub mass_s: f64,
    pub mass_a: f64,
    pub v_s: PotentialFile,
    pub v_a: PotentialFile,
    pub v_int: InteractionFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_idx_s: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_idx_a: Option<usize>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialFile {
    Zero,
    Harmonic { k: f64 },
    Quartic { g: f64 },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum InteractionFile {
    None,
    Bilinear { lambda: f64 },
}

impl From<PotentialFile> for Potential {
    fn from(p: PotentialFile) -> Self {
        match p {
            PotentialFile::Zero => Potential::Zero,
            PotentialFile::Harmonic { k } => Potential::Harmonic { k },
            PotentialFile::Quartic { g } => Potential::Quartic { g },
        }
    }
}

impl From<InteractionFile> for Interaction {
    fn from(i: InteractionFile) -> Self {
        match i {
            InteractionFile::None => Interaction::None,
            InteractionFile::Bilinear { lambda } => Interaction::Bilinear { lambda },
        }
    }
}

/// Loads a scenario, accepting either a bare scenario object or a previous
/// JSON output that echoes one under a `scenario` key.
pub fn load(path: &std::path::Path) -> Result<Scenario, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    let scenario_value = match value.get("scenario") {
        Some(inner) => inner.clone(),
        None => value,
    };
    serde_json::from_value(scenario_value).map_err(|e| format!("{}: {e}", path.display()))
}

pub fn grid_to_matrix(grid: &Grid, what: &str) -> Result<DMatrix<C64>, String> {
    if grid.is_empty() || grid[0].is_empty() {
        return Err(format!("{what}: matrix must be non-empty"));
    }
    let rows = grid.len();
    let cols = grid[0].len();
    for (i, row) in grid.iter().enumerate() {
        if row.len() != cols {
            return Err(format!(
                "{what}: row {i} has {} entries, expected {cols}",
                row.len()
            ));
        }
    }
    Ok(DMatrix::from_fn(rows, cols, |i, j| {
        C64::new(grid[i][j][0], grid[i][j][1])
    }))
}

pub fn matrix_to_grid(m: &DMatrix<C64>) -> Grid {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

pub fn parse_norm_mode(s: &str) -> Result<NormMode, String> {
    match s {
        "coherent" => Ok(NormMode::Coherent),
        "incoherent" => Ok(NormMode::Incoherent),
        "raw" => Ok(NormMode::Raw),
        other => Err(format!(
            "norm_mode: expected coherent|incoherent|raw, found {other:?}"
        )),
    }
}

impl Scenario {
    /// The relational matrix payload (kinds `matrix` and `evolution`).
    pub fn relational_matrix(&self) -> Result<relqm::RelationalMatrix, String> {
        let grid = self
            .matrix
            .as_ref()
            .ok_or_else(|| "field `matrix` is required for this command".to_string())?;
        let entries = grid_to_matrix(grid, "matrix")?;
        let n = self.system_dim.unwrap_or(entries.nrows());
        let m = self.apparatus_dim.unwrap_or(entries.ncols());
        let mode = parse_norm_mode(self.norm_mode.as_deref().unwrap_or("raw"))?;
        relqm::RelationalMatrix::new(n, m, entries, mode).map_err(|e| e.to_string())
    }

    pub fn lattice(&self) -> Result<Lattice1D, String> {
        let spec = self
            .lattice
            .as_ref()
            .ok_or_else(|| "field `lattice` is required for path-integral scenarios".to_string())?;
        Lattice1D::new(
            spec.x_min,
            spec.x_max,
            spec.n_points,
            spec.n_slices,
            spec.dt,
        )
        .map_err(|e| e.to_string())
    }

    pub fn action(&self, hbar_override: Option<f64>) -> Result<ActionSpec, String> {
        let spec = self
            .action
            .as_ref()
            .ok_or_else(|| "field `action` is required for path-integral scenarios".to_string())?;
        let hbar = hbar_override.or(self.hbar).unwrap_or(1.0);
        ActionSpec::new(
            spec.mass_s,
            spec.mass_a,
            spec.v_s.into(),
            spec.v_a.into(),
            spec.v_int.into(),
            hbar,
        )
        .map_err(|e| e.to_string())
    }

    pub fn start_indices(&self, lattice: &Lattice1D) -> (usize, usize) {
        let mid = lattice.n_points() / 2;
        match &self.action {
            Some(a) => (a.start_idx_s.unwrap_or(mid), a.start_idx_a.unwrap_or(mid)),
            None => (mid, mid),
        }
    }
}
