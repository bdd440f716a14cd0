use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use sectorange::calculus::{parse_complex, CalcFunction};
use sectorange::fem::{build_mesh, BoundaryMarking, Mesh2D, Side};
use sectorange::field::CoefficientField;
use sectorange::numkernel::ComplexMatrix;

use crate::error::CliError;
use crate::json::Json;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Matrix,
    Field,
    Fem,
    Calculus,
    Pform,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSpec {
    pub nx: usize,
    pub ny: usize,
    #[serde(rename = "Lx", default = "one")]
    pub lx: f64,
    #[serde(rename = "Ly", default = "one")]
    pub ly: f64,
}

fn one() -> f64 {
    1.0
}

/// Side names or explicit boundary edge indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Dirichlet {
    Sides(Vec<String>),
    Edges(Vec<usize>),
}

/// A complete run description. Subcommands build one from their flags.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<PathBuf>,
    /// Inline matrix; takes precedence over `matrix`. Reports always inline it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix_data: Option<MatrixFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field_data: Option<FieldFile>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub p: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Sector half-angle for the FEM inclusion check instead of ω(μ).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub eps: Vec<f64>,
    /// Wider angles ϑ for the uniform resolvent bound.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub vartheta: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lambdas: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub z: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub functions: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh: Option<MeshSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dirichlet: Option<Dirichlet>,
    /// Cutoff level K of the p-form.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_freq: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_dirs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_override: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub json_out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv_out: Option<PathBuf>,
}

impl Scenario {
    pub fn new(kind: Kind) -> Self {
        Self {
            kind,
            matrix: None,
            field: None,
            matrix_data: None,
            field_data: None,
            p: Vec::new(),
            delta: None,
            theta: None,
            eps: Vec::new(),
            vartheta: Vec::new(),
            lambdas: Vec::new(),
            z: Vec::new(),
            functions: Vec::new(),
            mesh: None,
            dirichlet: None,
            cutoff: None,
            grid: None,
            samples: None,
            max_freq: None,
            n_dirs: None,
            seed: None,
            tol_override: None,
            json_out: None,
            csv_out: None,
        }
    }

    /// Reads a scenario file; relative input paths are taken from its directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = read(path)?;
        let mut s: Scenario = serde_json::from_str(&text).map_err(|e| CliError::parse(path, &e))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut s.matrix, &mut s.field].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(s)
    }

    pub fn to_json(&self) -> Json {
        serde_json::to_value(self).expect("scenario serializes").into()
    }
}

pub fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub n: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldFile {
    pub d: usize,
    pub grid: [usize; 2],
    pub cells: Vec<MatrixFile>,
}

impl MatrixFile {
    pub fn to_matrix(&self, what: &str) -> Result<ComplexMatrix, CliError> {
        let square = |rows: &Vec<Vec<f64>>, part: &str| {
            if rows.len() != self.n || rows.iter().any(|r| r.len() != self.n) {
                Err(CliError::Validation(format!("{what}.{part}: expected {0}×{0} entries", self.n)))
            } else {
                Ok(())
            }
        };
        if self.n == 0 {
            return Err(CliError::Validation(format!("{what}.n: must be at least 1")));
        }
        square(&self.re, "re")?;
        square(&self.im, "im")?;
        if self.re.iter().chain(&self.im).flatten().any(|x| !x.is_finite()) {
            return Err(CliError::Validation(format!("{what}: entries must be finite")));
        }
        ComplexMatrix::from_parts(&self.re, &self.im).map_err(|e| CliError::Validation(format!("{what}: {e}")))
    }
}

pub fn load_matrix(path: &Path) -> Result<(MatrixFile, ComplexMatrix), CliError> {
    let text = read(path)?;
    let mf: MatrixFile = serde_json::from_str(&text).map_err(|e| CliError::parse(path, &e))?;
    let m = mf.to_matrix("matrix")?;
    Ok((mf, m))
}

pub fn load_field(path: &Path) -> Result<(FieldFile, CoefficientField), CliError> {
    let text = read(path)?;
    let ff: FieldFile = serde_json::from_str(&text).map_err(|e| CliError::parse(path, &e))?;
    let field = ff.to_field("field")?;
    Ok((ff, field))
}

impl FieldFile {
    pub fn to_field(&self, what: &str) -> Result<CoefficientField, CliError> {
        let [nx, ny] = self.grid;
        if nx == 0 || ny == 0 || self.cells.len() != nx * ny {
            return Err(CliError::Validation(format!(
                "{what}.cells: grid {nx}×{ny} needs {} cells, got {}",
                nx * ny,
                self.cells.len()
            )));
        }
        let mus = self
            .cells
            .iter()
            .enumerate()
            .map(|(k, c)| {
                if c.n != self.d {
                    return Err(CliError::Validation(format!("{what}.cells[{k}].n: expected d = {}", self.d)));
                }
                c.to_matrix(&format!("{what}.cells[{k}]"))
            })
            .collect::<Result<Vec<_>, _>>()?;
        CoefficientField::new(nx, ny, &mus).map_err(|e| CliError::Validation(format!("{what}: {e}")))
    }
}

pub fn require<'a, T>(v: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
    v.as_ref().ok_or_else(|| CliError::Validation(format!("{name}: required for this scenario kind")))
}

pub fn check_exponents(ps: &[f64]) -> Result<(), CliError> {
    match ps.iter().position(|p| !(p.is_finite() && *p > 1.0)) {
        Some(k) => Err(CliError::Validation(format!("p[{k}] = {}: must lie in (1, ∞)", ps[k]))),
        None => Ok(()),
    }
}

pub fn check_positive(v: Option<f64>, name: &str) -> Result<(), CliError> {
    match v {
        Some(x) if !(x.is_finite() && x > 0.0) => Err(CliError::Validation(format!("{name} = {x}: must be positive"))),
        _ => Ok(()),
    }
}

pub fn check_nonnegative(v: Option<f64>, name: &str) -> Result<(), CliError> {
    match v {
        Some(x) if !(x.is_finite() && x >= 0.0) => Err(CliError::Validation(format!("{name} = {x}: must be ≥ 0"))),
        _ => Ok(()),
    }
}

pub fn parse_points(list: &[String], name: &str) -> Result<Vec<Complex64>, CliError> {
    list.iter()
        .enumerate()
        .map(|(k, s)| parse_complex(s).map_err(|e| CliError::Validation(format!("{name}[{k}]: {e}"))))
        .collect()
}

pub fn parse_functions(list: &[String]) -> Result<Vec<CalcFunction>, CliError> {
    list.iter()
        .enumerate()
        .map(|(k, s)| CalcFunction::parse(s).map_err(|e| CliError::Validation(format!("functions[{k}]: {e}"))))
        .collect()
}

pub fn resolve_mesh(spec: Option<&MeshSpec>) -> Result<(MeshSpec, Mesh2D), CliError> {
    let spec = spec.cloned().unwrap_or(MeshSpec { nx: 16, ny: 16, lx: 1.0, ly: 1.0 });
    if spec.nx == 0 || spec.ny == 0 {
        return Err(CliError::Validation("mesh: nx and ny must be positive".into()));
    }
    if !(spec.lx > 0.0 && spec.ly > 0.0 && spec.lx.is_finite() && spec.ly.is_finite()) {
        return Err(CliError::Validation("mesh: Lx and Ly must be positive".into()));
    }
    let mesh = build_mesh(spec.nx, spec.ny, spec.lx, spec.ly).map_err(|e| CliError::Validation(format!("mesh: {e}")))?;
    Ok((spec, mesh))
}

pub fn resolve_marking(d: Option<&Dirichlet>, mesh: &Mesh2D) -> Result<(Dirichlet, BoundaryMarking), CliError> {
    let d = d.cloned().unwrap_or_else(|| Dirichlet::Sides(Side::ALL.iter().map(|s| s.name().to_string()).collect()));
    let marking = match &d {
        Dirichlet::Sides(names) => {
            let sides = names
                .iter()
                .enumerate()
                .map(|(k, n)| {
                    Side::ALL.iter().copied().find(|s| s.name() == n).ok_or_else(|| {
                        CliError::Validation(format!("dirichlet[{k}] = {n:?}: expected left, right, top or bottom"))
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            BoundaryMarking::from_sides(mesh, &sides)
        }
        Dirichlet::Edges(edges) => {
            BoundaryMarking::from_edges(mesh, edges).map_err(|e| CliError::Validation(format!("dirichlet: {e}")))?
        }
    };
    Ok((d, marking))
}
