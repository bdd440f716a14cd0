//! P1 finite elements for the form `∫(μ∇u, ∇v)` on a rectangle with a marked
//! Dirichlet part of the boundary. The Galerkin pencil (K, M) realizes the
//! form's numerical range on the finite element subspace.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use thiserror::Error;

use crate::field::{CoefficientField, FieldError};
use crate::numkernel::{cholesky, solve_lower, ComplexMatrix, NumError};
use crate::range::{extremal_vector, optimal_angle, AngleRole, RangeError, SectorAngle};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FemError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("no free nodes remain after Dirichlet elimination")]
    EmptySubspace,
    #[error("boundary edge {index} does not exist (mesh has {count})")]
    InvalidEdge { index: usize, count: usize },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Range(#[from] RangeError),
    #[error(transparent)]
    Numeric(#[from] NumError),
}

/// Uniform triangulation of `[0, Lx] × [0, Ly]`; every cell is split along its
/// lower-left to upper-right diagonal.
#[derive(Clone, Debug)]
pub struct Mesh2D {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
    pub vertices: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    /// Grid cell `(i, j)` of each triangle.
    pub cell_of_triangle: Vec<(usize, usize)>,
}

impl Mesh2D {
    pub fn vertex_index(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }

    pub fn boundary_edge_count(&self) -> usize {
        2 * (self.nx + self.ny)
    }

    /// Endpoints of boundary edge `k`, numbered counterclockwise from the
    /// lower-left corner: bottom, right, top (right to left), left (top to bottom).
    pub fn boundary_edge(&self, k: usize) -> Option<[usize; 2]> {
        let (nx, ny) = (self.nx, self.ny);
        let v = |i, j| self.vertex_index(i, j);
        if k < nx {
            Some([v(k, 0), v(k + 1, 0)])
        } else if k < nx + ny {
            let j = k - nx;
            Some([v(nx, j), v(nx, j + 1)])
        } else if k < 2 * nx + ny {
            let i = nx - (k - nx - ny);
            Some([v(i, ny), v(i - 1, ny)])
        } else if k < 2 * (nx + ny) {
            let j = ny - (k - 2 * nx - ny);
            Some([v(0, j), v(0, j - 1)])
        } else {
            None
        }
    }

    /// Boundary edge indices belonging to one side.
    pub fn side_edges(&self, side: Side) -> std::ops::Range<usize> {
        let (nx, ny) = (self.nx, self.ny);
        match side {
            Side::Bottom => 0..nx,
            Side::Right => nx..nx + ny,
            Side::Top => nx + ny..2 * nx + ny,
            Side::Left => 2 * nx + ny..2 * (nx + ny),
        }
    }
}

pub fn build_mesh(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Mesh2D, FemError> {
    if nx == 0 || ny == 0 {
        return Err(FemError::Domain(format!("mesh needs at least one cell per axis, got {nx}×{ny}")));
    }
    if !(lx > 0.0 && ly > 0.0 && lx.is_finite() && ly.is_finite()) {
        return Err(FemError::Domain(format!("side lengths must be positive, got {lx}×{ly}")));
    }
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push([lx * i as f64 / nx as f64, ly * j as f64 / ny as f64]);
        }
    }
    let mut mesh = Mesh2D {
        nx,
        ny,
        lx,
        ly,
        vertices,
        triangles: Vec::with_capacity(2 * nx * ny),
        cell_of_triangle: Vec::with_capacity(2 * nx * ny),
    };
    for j in 0..ny {
        for i in 0..nx {
            let a = mesh.vertex_index(i, j);
            let b = mesh.vertex_index(i + 1, j);
            let c = mesh.vertex_index(i + 1, j + 1);
            let d = mesh.vertex_index(i, j + 1);
            mesh.triangles.push([a, b, c]);
            mesh.triangles.push([a, c, d]);
            mesh.cell_of_triangle.push((i, j));
            mesh.cell_of_triangle.push((i, j));
        }
    }
    Ok(mesh)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Bottom,
    Right,
    Top,
    Left,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Bottom, Side::Right, Side::Top, Side::Left];

    pub fn name(self) -> &'static str {
        match self {
            Side::Bottom => "bottom",
            Side::Right => "right",
            Side::Top => "top",
            Side::Left => "left",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Side {
    type Err = FemError;
    fn from_str(s: &str) -> Result<Self, FemError> {
        match s {
            "bottom" => Ok(Side::Bottom),
            "right" => Ok(Side::Right),
            "top" => Ok(Side::Top),
            "left" => Ok(Side::Left),
            other => Err(FemError::Domain(format!("unknown side {other:?}"))),
        }
    }
}

/// The Dirichlet part D as a set of whole boundary edges.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct BoundaryMarking {
    pub dirichlet_edges: BTreeSet<usize>,
}

impl BoundaryMarking {
    pub fn neumann() -> Self {
        Self::default()
    }

    pub fn from_sides(mesh: &Mesh2D, sides: &[Side]) -> Self {
        Self {
            dirichlet_edges: sides.iter().flat_map(|&s| mesh.side_edges(s)).collect(),
        }
    }

    pub fn full_dirichlet(mesh: &Mesh2D) -> Self {
        Self::from_sides(mesh, &Side::ALL)
    }

    pub fn from_edges(mesh: &Mesh2D, edges: &[usize]) -> Result<Self, FemError> {
        let count = mesh.boundary_edge_count();
        if let Some(&index) = edges.iter().find(|&&e| e >= count) {
            return Err(FemError::InvalidEdge { index, count });
        }
        Ok(Self {
            dirichlet_edges: edges.iter().copied().collect(),
        })
    }

    /// Vertices not touched by any Dirichlet edge, ascending.
    pub fn free_nodes(&self, mesh: &Mesh2D) -> Vec<usize> {
        let mut fixed = vec![false; mesh.vertices.len()];
        for &e in &self.dirichlet_edges {
            if let Some([a, b]) = mesh.boundary_edge(e) {
                fixed[a] = true;
                fixed[b] = true;
            }
        }
        (0..mesh.vertices.len()).filter(|&v| !fixed[v]).collect()
    }
}

/// Stiffness and mass matrices over the free nodes.
#[derive(Clone, Debug)]
pub struct FormMatrices {
    pub k: ComplexMatrix,
    pub m: ComplexMatrix,
    pub lumped_mass: Vec<f64>,
    pub free_nodes: Vec<usize>,
}

impl FormMatrices {
    pub fn dim(&self) -> usize {
        self.free_nodes.len()
    }

    /// The pencil `(K + δM, M)`.
    pub fn shifted(&self, delta: f64) -> Self {
        Self {
            k: &self.k + &self.m.scale_real(delta),
            ..self.clone()
        }
    }

    /// `u*Ku / u*Mu`.
    pub fn rayleigh_quotient(&self, u: &[Complex64]) -> Complex64 {
        self.k.quad_form(u) / self.m.quad_form(u).re
    }
}

fn gradients(p: [[f64; 2]; 3]) -> (f64, [[f64; 2]; 3]) {
    let [p0, p1, p2] = p;
    let det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
    let g = [
        [(p1[1] - p2[1]) / det, (p2[0] - p1[0]) / det],
        [(p2[1] - p0[1]) / det, (p0[0] - p2[0]) / det],
        [(p0[1] - p1[1]) / det, (p1[0] - p0[0]) / det],
    ];
    (0.5 * det.abs(), g)
}

pub fn assemble(
    field: &CoefficientField,
    mesh: &Mesh2D,
    marking: &BoundaryMarking,
) -> Result<FormMatrices, FemError> {
    let (fx, fy) = field.grid();
    if !mesh.nx.is_multiple_of(fx) || !mesh.ny.is_multiple_of(fy) {
        return Err(FemError::GridMismatch(format!(
            "field grid {fx}×{fy} does not divide mesh {}×{}",
            mesh.nx, mesh.ny
        )));
    }
    if field.dim() != 2 {
        return Err(FemError::GridMismatch(format!(
            "assembly needs 2×2 coefficients, field has d = {}",
            field.dim()
        )));
    }
    let free = marking.free_nodes(mesh);
    if free.is_empty() {
        return Err(FemError::EmptySubspace);
    }
    let mut slot = vec![usize::MAX; mesh.vertices.len()];
    for (k, &v) in free.iter().enumerate() {
        slot[v] = k;
    }
    let n = free.len();
    let mut k_mat = ComplexMatrix::zeros(n);
    let mut m_mat = ComplexMatrix::zeros(n);
    let mut lumped = vec![0.0; n];
    let (rx, ry) = (mesh.nx / fx, mesh.ny / fy);
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let (ci, cj) = mesh.cell_of_triangle[t];
        let mu = &field.cell(ci / rx, cj / ry).mu;
        let (area, g) = gradients([mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]]);
        for a in 0..3 {
            let ia = slot[tri[a]];
            if ia == usize::MAX {
                continue;
            }
            lumped[ia] += area / 3.0;
            for b in 0..3 {
                let ib = slot[tri[b]];
                if ib == usize::MAX {
                    continue;
                }
                // K_ab = area · ∇φ_aᵀ μ ∇φ_b
                let mut s = Complex64::new(0.0, 0.0);
                for r in 0..2 {
                    for c in 0..2 {
                        s += mu[(r, c)] * (g[a][r] * g[b][c]);
                    }
                }
                k_mat[(ia, ib)] += s * area;
                let w = if a == b { 2.0 } else { 1.0 };
                m_mat[(ia, ib)] += Complex64::new(area * w / 12.0, 0.0);
            }
        }
    }
    Ok(FormMatrices {
        k: k_mat,
        m: m_mat,
        lumped_mass: lumped,
        free_nodes: free,
    })
}

/// `R⁻* K R⁻¹` with `M = R* R`; its numerical range is the set of Rayleigh quotients.
pub fn reduced_operator(fm: &FormMatrices) -> Result<(ComplexMatrix, ComplexMatrix), FemError> {
    let l = cholesky(&fm.m)?;
    let y = solve_lower(&l, &fm.k);
    let z = solve_lower(&l, &y.adjoint());
    Ok((z.adjoint(), l))
}

/// Optimal angle of the form restricted to the Galerkin subspace.
pub fn generalized_range_angle(fm: &FormMatrices) -> Result<SectorAngle, FemError> {
    let (op, _) = reduced_operator(fm)?;
    Ok(optimal_angle(&op)?)
}

#[derive(Clone, Debug)]
pub struct InclusionReport {
    pub angle: SectorAngle,
    pub theta: SectorAngle,
    /// `max(0, angle − θ)`.
    pub max_excess_angle: f64,
    pub passed: bool,
    /// Coefficient vector whose Rayleigh quotient has the largest |arg|, on failure.
    pub witness: Option<Vec<Complex64>>,
    pub witness_quotient: Option<Complex64>,
}

pub const INCLUSION_SLACK: f64 = 1e-8;

pub fn sector_inclusion_check(fm: &FormMatrices, theta: SectorAngle) -> Result<InclusionReport, FemError> {
    let (op, l) = reduced_operator(fm)?;
    let angle = optimal_angle(&op)?;
    let excess = (angle.radians() - theta.radians()).max(0.0);
    let passed = angle.radians() <= theta.radians() + INCLUSION_SLACK;
    let (witness, witness_quotient) = if passed {
        (None, None)
    } else {
        // u = L⁻* x turns x* op x into u* K u with u* M u = |x|²
        let x = extremal_vector(&op)?;
        let n = x.len();
        let mut u = x;
        for i in (0..n).rev() {
            let mut s = u[i];
            for j in i + 1..n {
                s -= l[(j, i)].conj() * u[j];
            }
            u[i] = s / l[(i, i)].conj();
        }
        let q = fm.rayleigh_quotient(&u);
        (Some(u), Some(q))
    };
    Ok(InclusionReport {
        angle,
        theta: theta.with_role(AngleRole::Free),
        max_excess_angle: excess,
        passed,
        witness,
        witness_quotient,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::analyze_cell;
    use crate::numkernel::eigvalsh;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_mu(rng: &mut ChaCha8Rng) -> ComplexMatrix {
        let g = ComplexMatrix::from_fn(2, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let m = eigvalsh(&g.hermitian_part()).unwrap()[0];
        g.shift(c(-m + rng.gen_range(0.3..1.0), 0.0))
    }

    fn random_field(rng: &mut ChaCha8Rng, nx: usize, ny: usize) -> CoefficientField {
        let mus: Vec<ComplexMatrix> = (0..nx * ny).map(|_| random_mu(rng)).collect();
        CoefficientField::new(nx, ny, &mus).unwrap()
    }

    #[test]
    fn mesh_counts() {
        let m = build_mesh(1, 1, 1.0, 1.0).unwrap();
        assert_eq!((m.triangles.len(), m.vertices.len()), (2, 4));
        let m = build_mesh(2, 2, 1.0, 1.0).unwrap();
        assert_eq!((m.triangles.len(), m.vertices.len()), (8, 9));
        let m = build_mesh(3, 1, 3.0, 1.0).unwrap();
        assert_eq!(m.triangles.len(), 6);
        for tri in &m.triangles {
            let (area, _) = gradients([m.vertices[tri[0]], m.vertices[tri[1]], m.vertices[tri[2]]]);
            assert!((area - 0.5).abs() < 1e-15);
        }
        assert!(build_mesh(0, 1, 1.0, 1.0).is_err());
        assert!(build_mesh(1, 1, -1.0, 1.0).is_err());
    }

    #[test]
    fn boundary_edges_walk_counterclockwise() {
        let m = build_mesh(3, 2, 1.0, 1.0).unwrap();
        let count = m.boundary_edge_count();
        for k in 0..count {
            let [_, b] = m.boundary_edge(k).unwrap();
            let [a, _] = m.boundary_edge((k + 1) % count).unwrap();
            assert_eq!(a, b);
        }
        assert!(m.boundary_edge(count).is_none());
        assert_eq!(BoundaryMarking::full_dirichlet(&m).free_nodes(&m).len(), 2);
        assert!(matches!(BoundaryMarking::from_edges(&m, &[count]), Err(FemError::InvalidEdge { .. })));
    }

    #[test]
    fn single_free_node_stencil() {
        let mesh = build_mesh(2, 2, 1.0, 1.0).unwrap();
        let field = CoefficientField::constant(&ComplexMatrix::identity(2)).unwrap();
        let fm = assemble(&field, &mesh, &BoundaryMarking::full_dirichlet(&mesh)).unwrap();
        assert_eq!(fm.dim(), 1);
        assert!((fm.k[(0, 0)] - c(4.0, 0.0)).norm() < 1e-14);
        // six triangles meet at the centre, each of area 1/8
        assert!((fm.m[(0, 0)].re - 6.0 * (1.0 / 8.0) / 6.0).abs() < 1e-15);
        assert!((fm.lumped_mass[0] - 6.0 / 24.0).abs() < 1e-15);
    }

    #[test]
    fn grid_mismatch_and_empty_subspace() {
        let mesh = build_mesh(3, 3, 1.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let field = random_field(&mut rng, 2, 1);
        assert!(matches!(assemble(&field, &mesh, &BoundaryMarking::neumann()), Err(FemError::GridMismatch(_))));
        let mesh = build_mesh(1, 1, 1.0, 1.0).unwrap();
        let field = CoefficientField::constant(&ComplexMatrix::identity(2)).unwrap();
        assert!(matches!(
            assemble(&field, &mesh, &BoundaryMarking::full_dirichlet(&mesh)),
            Err(FemError::EmptySubspace)
        ));
    }

    #[test]
    fn stiffness_linear_and_adjoint_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mesh = build_mesh(4, 4, 1.0, 2.0).unwrap();
        let marking = BoundaryMarking::from_sides(&mesh, &[Side::Left, Side::Top]);
        let field = random_field(&mut rng, 2, 2);
        let fm = assemble(&field, &mesh, &marking).unwrap();
        let adj: Vec<ComplexMatrix> = field.cells().iter().map(|c| c.mu.adjoint()).collect();
        let fa = assemble(&CoefficientField::new(2, 2, &adj).unwrap(), &mesh, &marking).unwrap();
        assert!(fm.k.adjoint().max_abs_diff(&fa.k) < 1e-12);
        let scaled: Vec<ComplexMatrix> = field.cells().iter().map(|c| c.mu.scale_real(3.5)).collect();
        let fs = assemble(&CoefficientField::new(2, 2, &scaled).unwrap(), &mesh, &marking).unwrap();
        assert!(fs.k.max_abs_diff(&fm.k.scale_real(3.5)) < 1e-12);
        let herm: Vec<ComplexMatrix> = field.cells().iter().map(|c| c.mu.hermitian_part()).collect();
        let fh = assemble(&CoefficientField::new(2, 2, &herm).unwrap(), &mesh, &marking).unwrap();
        assert!(fh.k.hermitian_defect() < 1e-12);
        assert!(eigvalsh(&fm.m).unwrap()[0] > 0.0);
    }

    #[test]
    fn galerkin_angle_examples() {
        let mesh = build_mesh(6, 6, 1.0, 1.0).unwrap();
        let full = BoundaryMarking::full_dirichlet(&mesh);
        let id = CoefficientField::constant(&ComplexMatrix::identity(2)).unwrap();
        assert_eq!(generalized_range_angle(&assemble(&id, &mesh, &full).unwrap()).unwrap().radians(), 0.0);
        let rot = CoefficientField::constant(&ComplexMatrix::from_real_rows(&[&[1.0, -0.5], &[0.5, 1.0]]).unwrap()).unwrap();
        let a = generalized_range_angle(&assemble(&rot, &mesh, &full).unwrap()).unwrap();
        assert!(a.radians() <= 1e-8);
        let partial = BoundaryMarking::from_sides(&mesh, &[Side::Bottom]);
        let scal = CoefficientField::constant(&ComplexMatrix::identity(2).scale(c(1.0, 1.0))).unwrap();
        let a = generalized_range_angle(&assemble(&scal, &mesh, &partial).unwrap()).unwrap();
        assert!((a.radians() - PI / 4.0).abs() < 1e-10);
    }

    #[test]
    fn inclusion_and_refinement() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..4 {
            let field = random_field(&mut rng, 2, 2);
            let coarse = build_mesh(4, 4, 1.0, 1.0).unwrap();
            let fine = build_mesh(8, 8, 1.0, 1.0).unwrap();
            let sides = [Side::Left, Side::Bottom];
            let fc = assemble(&field, &coarse, &BoundaryMarking::from_sides(&coarse, &sides)).unwrap();
            let ff = assemble(&field, &fine, &BoundaryMarking::from_sides(&fine, &sides)).unwrap();
            let ac = generalized_range_angle(&fc).unwrap().radians();
            let af = generalized_range_angle(&ff).unwrap().radians();
            assert!(ac <= af + 1e-9);
            let omega = field.omega_mu();
            assert!(sector_inclusion_check(&ff, omega).unwrap().passed);
            assert!(sector_inclusion_check(&ff, crate::field::field_alpha(&field)).unwrap().passed);
            for delta in [0.0, 0.5, 10.0] {
                let shifted = generalized_range_angle(&ff.shifted(delta)).unwrap().radians();
                assert!(shifted <= af + 1e-9);
            }
        }
    }

    #[test]
    fn inclusion_negative_control() {
        let mesh = build_mesh(4, 4, 1.0, 1.0).unwrap();
        let mu = ComplexMatrix::from_rows(&[vec![c(1.0, 0.3), c(0.2, 0.0)], vec![c(0.0, 0.1), c(1.5, -0.2)]]).unwrap();
        assert!(analyze_cell(&mu).unwrap().omega_x.radians() > 0.0);
        let field = CoefficientField::constant(&mu).unwrap();
        let fm = assemble(&field, &mesh, &BoundaryMarking::from_sides(&mesh, &[Side::Top])).unwrap();
        let zero = SectorAngle::new(0.0, AngleRole::Free).unwrap();
        let r = sector_inclusion_check(&fm, zero).unwrap();
        assert!(!r.passed);
        let q = r.witness_quotient.unwrap();
        assert!((q.arg().abs() - r.angle.radians()).abs() < 1e-9);
        let u = r.witness.unwrap();
        assert!((fm.rayleigh_quotient(&u) - q).norm() < 1e-12);
    }
}
