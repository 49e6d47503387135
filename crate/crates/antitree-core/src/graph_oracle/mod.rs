//! Finite-element reference solver on the full truncated antitree.
//!
//! Every edge of the complete bipartite graphs between consecutive spheres
//! is meshed with piecewise-linear elements and consistent mass. No
//! symmetry is used, so agreement with the block decomposition is a
//! genuine check of it.

use std::f64::consts::PI;
use std::io::{self, Write};

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::MetricProfile;
use crate::spectra::{decomposed_spectrum, BlockKind, BoundaryCondition, SpectraError};

/// Largest dimension accepted by the dense solver.
pub const DENSE_MAX_DIM: usize = 5000;
/// Largest number of free vertex unknowns for the condensed solver, whose
/// vertex Schur complement is dense.
pub const CONDENSED_MAX_VERTICES: usize = 3000;
/// Largest mesh accepted at all.
pub const MAX_DOFS: usize = 5_000_000;
/// Dimensions up to this use the dense solver under [`OracleSolver::Auto`].
pub const AUTO_DENSE_LIMIT: usize = 1200;
/// Minimum number of elements on every edge.
pub const MIN_ELEMENTS_PER_EDGE: usize = 4;
/// Relative P1 eigenvalue error model `(λ_h − λ)/λ ≤ C h² λ`; the leading
/// term on a uniform interval mesh is `h² λ / 12`, doubled for margin.
pub const FEM_ERROR_CONSTANT: f64 = 1.0 / 6.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("edge of generation {generation} gets {elements} elements; at least {MIN_ELEMENTS_PER_EDGE} are required")]
    TooCoarse { generation: usize, elements: usize },
    #[error("problem size {size} exceeds the {what} limit {limit}")]
    DimensionOverflow {
        what: &'static str,
        size: usize,
        limit: usize,
    },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("mass matrix is not positive definite")]
    MassNotPositive,
    #[error(transparent)]
    Spectra(#[from] SpectraError),
}

/// Condition imposed on the outermost sphere `S_{N+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Truncation {
    Dirichlet,
    Neumann,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleSolver {
    /// Dense generalized eigensolver.
    Dense,
    /// Inertia counting on the edge-condensed matrix, plus bisection.
    Condensed,
    /// Dense up to [`AUTO_DENSE_LIMIT`], condensed above.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshEdge {
    /// Global vertex indices of the inner and outer endpoint.
    pub inner: usize,
    pub outer: usize,
    pub generation: usize,
    pub length: f64,
    pub elements: usize,
    /// Index of the first interior node; interior nodes are consecutive.
    pub first_interior: usize,
}

/// Meshed truncated antitree. Vertex unknowns come first (outer sphere
/// omitted under Dirichlet truncation), followed by the interior nodes of
/// each edge in edge order.
#[derive(Debug, Clone)]
pub struct MetricGraphMesh {
    spheres: Vec<u64>,
    sphere_offset: Vec<usize>,
    vertex_dof: Vec<Option<usize>>,
    edges: Vec<MeshEdge>,
    truncation: Truncation,
    dim: usize,
    h_min: f64,
}

impl MetricGraphMesh {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn truncation(&self) -> Truncation {
        self.truncation
    }

    pub fn spheres(&self) -> &[u64] {
        &self.spheres
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_dof.len()
    }

    pub fn free_vertex_count(&self) -> usize {
        self.vertex_dof.iter().flatten().count()
    }

    pub fn edges(&self) -> &[MeshEdge] {
        &self.edges
    }

    /// Sphere index of a global vertex.
    pub fn sphere_of(&self, vertex: usize) -> usize {
        self.sphere_offset.partition_point(|&o| o <= vertex) - 1
    }

    pub fn edges_in_generation(&self, n: usize) -> usize {
        self.edges.iter().filter(|e| e.generation == n).count()
    }

    /// Number of edges meeting at a vertex.
    pub fn degree(&self, vertex: usize) -> usize {
        self.edges
            .iter()
            .filter(|e| e.inner == vertex || e.outer == vertex)
            .count()
    }

    /// Total edge length, equal to the volume of the truncated profile.
    pub fn total_length(&self) -> f64 {
        crate::numeric::compensated_sum(self.edges.iter().map(|e| e.length))
    }

    pub fn h_min(&self) -> f64 {
        self.h_min
    }

    /// Plain-text edge list: one `inner outer generation length elements`
    /// line per edge, vertices written as `sphere:index`.
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "# inner outer generation length elements")?;
        for e in &self.edges {
            let (si, so) = (self.sphere_of(e.inner), self.sphere_of(e.outer));
            writeln!(
                w,
                "{}:{} {}:{} {} {:.15e} {}",
                si,
                e.inner - self.sphere_offset[si],
                so,
                e.outer - self.sphere_offset[so],
                e.generation,
                e.length,
                e.elements
            )?;
        }
        Ok(())
    }
}

fn check_vertex_count(profile: &MetricProfile) -> Result<(), OracleError> {
    let total = profile.spheres().iter().fold(0u64, |acc, &s| acc.saturating_add(s));
    if total > MAX_DOFS as u64 {
        return Err(OracleError::DimensionOverflow {
            what: "mesh",
            size: usize::try_from(total).unwrap_or(usize::MAX),
            limit: MAX_DOFS,
        });
    }
    Ok(())
}

/// Meshes the truncated antitree with element size at most `h`.
pub fn build_mesh(profile: &MetricProfile, h: f64, truncation: Truncation) -> Result<MetricGraphMesh, OracleError> {
    check_vertex_count(profile)?;
    let perms: Vec<Vec<usize>> = profile.spheres().iter().map(|&s| (0..s as usize).collect()).collect();
    build_mesh_permuted(profile, h, truncation, &perms)
}

/// As [`build_mesh`], with the vertices of sphere `n` relabelled by
/// `perms[n]` (label `i` becomes `perms[n][i]`), which reorders every
/// unknown of the discretization.
pub fn build_mesh_permuted(
    profile: &MetricProfile,
    h: f64,
    truncation: Truncation,
    perms: &[Vec<usize>],
) -> Result<MetricGraphMesh, OracleError> {
    if !(h.is_finite() && h > 0.0) {
        return Err(OracleError::InvalidInput(format!(
            "mesh size must be positive, got {h}"
        )));
    }
    check_vertex_count(profile)?;
    let spheres = profile.spheres().to_vec();
    if perms.len() != spheres.len() {
        return Err(OracleError::InvalidInput(
            "one permutation per sphere is required".into(),
        ));
    }
    let mut vertices = 0usize;
    let mut sphere_offset = Vec::with_capacity(spheres.len());
    for (n, &s) in spheres.iter().enumerate() {
        let s = s as usize;
        let mut seen = vec![false; s];
        if perms[n].len() != s
            || perms[n]
                .iter()
                .any(|&p| p >= s || std::mem::replace(&mut seen[p], true))
        {
            return Err(OracleError::InvalidInput(format!(
                "perms[{n}] is not a permutation of 0..{s}"
            )));
        }
        sphere_offset.push(vertices);
        vertices = vertices.saturating_add(s);
    }
    let elements: Vec<usize> = profile.lengths().iter().map(|&l| (l / h).ceil() as usize).collect();
    if let Some((n, &e)) = elements.iter().enumerate().find(|(_, &e)| e < MIN_ELEMENTS_PER_EDGE) {
        return Err(OracleError::TooCoarse {
            generation: n,
            elements: e,
        });
    }
    let mut interior = 0usize;
    for n in 0..elements.len() {
        let edges = spheres[n].saturating_mul(spheres[n + 1]) as usize;
        interior = interior.saturating_add(edges.saturating_mul(elements[n] - 1));
    }
    let size = interior.saturating_add(vertices);
    if size > MAX_DOFS {
        return Err(OracleError::DimensionOverflow {
            what: "mesh",
            size,
            limit: MAX_DOFS,
        });
    }

    let outer = spheres.len() - 1;
    let mut vertex_dof = vec![None; vertices];
    let mut next = 0usize;
    for (v, dof) in vertex_dof.iter_mut().enumerate() {
        let sphere = sphere_offset.partition_point(|&o| o <= v) - 1;
        if !(sphere == outer && truncation == Truncation::Dirichlet) {
            *dof = Some(next);
            next += 1;
        }
    }
    let mut edges = Vec::new();
    let mut h_min = f64::INFINITY;
    for n in 0..elements.len() {
        let len = profile.lengths()[n];
        h_min = h_min.min(len / elements[n] as f64);
        for i in 0..spheres[n] as usize {
            for j in 0..spheres[n + 1] as usize {
                edges.push(MeshEdge {
                    inner: sphere_offset[n] + perms[n][i],
                    outer: sphere_offset[n + 1] + perms[n + 1][j],
                    generation: n,
                    length: len,
                    elements: elements[n],
                    first_interior: next,
                });
                next += elements[n] - 1;
            }
        }
    }
    Ok(MetricGraphMesh {
        spheres,
        sphere_offset,
        vertex_dof,
        edges,
        truncation,
        dim: next,
        h_min,
    })
}

/// Symmetric matrix in coordinate form; duplicate entries add up.
#[derive(Debug, Clone, PartialEq)]
pub struct CooMatrix {
    pub dim: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl CooMatrix {
    fn new(dim: usize) -> Self {
        CooMatrix {
            dim,
            entries: Vec::new(),
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        for &(i, j, v) in &self.entries {
            y[i] += v * x[j];
        }
        y
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for &(i, j, v) in &self.entries {
            m[(i, j)] += v;
        }
        m
    }
}

/// Stiffness `Σ_e ∫ f′g′` and consistent mass `Σ_e ∫ fg`.
#[derive(Debug, Clone)]
pub struct Assembly {
    pub stiffness: CooMatrix,
    pub mass: CooMatrix,
}

/// Unknown index of every node along an edge, endpoints included; `None`
/// for an eliminated endpoint.
fn edge_nodes(mesh: &MetricGraphMesh, e: &MeshEdge) -> Vec<Option<usize>> {
    let mut nodes = Vec::with_capacity(e.elements + 1);
    nodes.push(mesh.vertex_dof[e.inner]);
    nodes.extend((0..e.elements - 1).map(|k| Some(e.first_interior + k)));
    nodes.push(mesh.vertex_dof[e.outer]);
    nodes
}

pub fn assemble_mesh(mesh: &MetricGraphMesh) -> Assembly {
    let mut k = CooMatrix::new(mesh.dim);
    let mut m = CooMatrix::new(mesh.dim);
    for e in &mesh.edges {
        let h = e.length / e.elements as f64;
        let ke = [[1.0 / h, -1.0 / h], [-1.0 / h, 1.0 / h]];
        let me = [[h / 3.0, h / 6.0], [h / 6.0, h / 3.0]];
        let nodes = edge_nodes(mesh, e);
        for w in nodes.windows(2) {
            for a in 0..2 {
                for b in 0..2 {
                    if let (Some(i), Some(j)) = (w[a], w[b]) {
                        k.entries.push((i, j, ke[a][b]));
                        m.entries.push((i, j, me[a][b]));
                    }
                }
            }
        }
    }
    Assembly { stiffness: k, mass: m }
}

/// Meshes and assembles in one step.
pub fn assemble(
    profile: &MetricProfile,
    h: f64,
    truncation: Truncation,
) -> Result<(MetricGraphMesh, Assembly), OracleError> {
    let mesh = build_mesh(profile, h, truncation)?;
    let asm = assemble_mesh(&mesh);
    Ok((mesh, asm))
}

/// All eigenvalues of the generalized problem `K x = λ M x`, ascending.
fn dense_eigenvalues(mesh: &MetricGraphMesh) -> Result<Vec<f64>, OracleError> {
    if mesh.dim > DENSE_MAX_DIM {
        return Err(OracleError::DimensionOverflow {
            what: "dense solver",
            size: mesh.dim,
            limit: DENSE_MAX_DIM,
        });
    }
    let asm = assemble_mesh(mesh);
    let k = asm.stiffness.to_dense();
    let chol = asm.mass.to_dense().cholesky().ok_or(OracleError::MassNotPositive)?;
    let l = chol.l();
    // L⁻¹ K L⁻ᵀ
    let x = l.solve_lower_triangular(&k).ok_or(OracleError::MassNotPositive)?;
    let c = l
        .solve_lower_triangular(&x.transpose())
        .ok_or(OracleError::MassNotPositive)?;
    let c = (&c + c.transpose()) * 0.5;
    let mut ev: Vec<f64> = SymmetricEigen::new(c).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Pivot data of the interior chain of one edge at shift `σ`.
struct Chain {
    negative: usize,
    /// `(T⁻¹)_{11}`, `(T⁻¹)_{mm}`, `(T⁻¹)_{1m}` for the tridiagonal chain block.
    first: f64,
    last: f64,
    corner: f64,
    coupling: f64,
    end_diag: f64,
}

fn chain(length: f64, elements: usize, sigma: f64) -> Option<Chain> {
    let h = length / elements as f64;
    let a = 2.0 / h - sigma * 4.0 * h / 6.0;
    let b = -1.0 / h - sigma * h / 6.0;
    let m = elements - 1;
    let mut negative = 0;
    let mut d = a;
    let mut corner = 1.0;
    for i in 0..m {
        if i > 0 {
            d = a - b * b / d;
        }
        if d == 0.0 {
            return None;
        }
        if d < 0.0 {
            negative += 1;
        }
        if i + 1 < m {
            corner *= -b / d;
        } else {
            corner /= d;
        }
    }
    // constant diagonals make the chain persymmetric
    Some(Chain {
        negative,
        first: 1.0 / d,
        last: 1.0 / d,
        corner,
        coupling: b,
        end_diag: 1.0 / h - sigma * h / 3.0,
    })
}

/// Number of eigenvalues `< σ` by Sylvester's law of inertia applied to
/// `K − σM` after eliminating the interior of every edge.
pub fn oracle_count(mesh: &MetricGraphMesh, sigma: f64) -> Result<usize, OracleError> {
    let nv = mesh.free_vertex_count();
    if nv > CONDENSED_MAX_VERTICES {
        return Err(OracleError::DimensionOverflow {
            what: "condensed vertex system",
            size: nv,
            limit: CONDENSED_MAX_VERTICES,
        });
    }
    let mut shift = sigma;
    'retry: loop {
        let mut schur = DMatrix::<f64>::zeros(nv, nv);
        let mut negative = 0usize;
        let mut cache: Vec<(usize, Chain)> = Vec::new();
        for e in &mesh.edges {
            if cache.last().map(|c| c.0) != Some(e.generation) {
                match chain(e.length, e.elements, shift) {
                    Some(c) => cache.push((e.generation, c)),
                    None => {
                        shift = shift * (1.0 + 4.0 * f64::EPSILON) + f64::MIN_POSITIVE;
                        continue 'retry;
                    }
                }
            }
            let c = &cache.last().expect("just pushed").1;
            negative += c.negative;
            let b2 = c.coupling * c.coupling;
            let (u, v) = (mesh.vertex_dof[e.inner], mesh.vertex_dof[e.outer]);
            if let Some(u) = u {
                schur[(u, u)] += c.end_diag - b2 * c.first;
            }
            if let Some(v) = v {
                schur[(v, v)] += c.end_diag - b2 * c.last;
            }
            if let (Some(u), Some(v)) = (u, v) {
                schur[(u, v)] -= b2 * c.corner;
                schur[(v, u)] -= b2 * c.corner;
            }
        }
        let eig = SymmetricEigen::new(schur).eigenvalues;
        if eig.iter().any(|&x| x == 0.0) {
            shift = shift * (1.0 + 4.0 * f64::EPSILON) + f64::MIN_POSITIVE;
            continue;
        }
        negative += eig.iter().filter(|&&x| x < 0.0).count();
        return Ok(negative);
    }
}

/// Lowest `m` eigenvalues by bisection on [`oracle_count`].
fn condensed_eigenvalues(mesh: &MetricGraphMesh, m: usize) -> Result<Vec<f64>, OracleError> {
    // every P1 element has generalized eigenvalues at most 12/h²
    let top = 12.0 / (mesh.h_min * mesh.h_min) * 1.01;
    let mut out = Vec::with_capacity(m);
    // the Neumann problem has the constant in its kernel
    let mut floor = if mesh.truncation == Truncation::Neumann {
        -1.0
    } else {
        0.0
    };
    for k in 0..m {
        let (mut lo, mut hi) = (floor, top);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if oracle_count(mesh, mid)? > k {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 1e-13 * hi.abs().max(1e-8) {
                break;
            }
        }
        let value = 0.5 * (lo + hi);
        out.push(value);
        floor = lo;
    }
    Ok(out)
}

/// Lowest `m` eigenvalues of the oracle problem.
pub fn oracle_eigenvalues(mesh: &MetricGraphMesh, m: usize, solver: OracleSolver) -> Result<Vec<f64>, OracleError> {
    if m == 0 || m > mesh.dim {
        return Err(OracleError::InvalidInput(format!(
            "requested {m} eigenvalues of a {}-dimensional problem",
            mesh.dim
        )));
    }
    let dense = match solver {
        OracleSolver::Dense => true,
        OracleSolver::Condensed => false,
        OracleSolver::Auto => mesh.dim <= AUTO_DENSE_LIMIT,
    };
    if dense {
        let mut ev = dense_eigenvalues(mesh)?;
        ev.truncate(m);
        Ok(ev)
    } else {
        condensed_eigenvalues(mesh, m)
    }
}

/// One paired eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatchRow {
    pub index: usize,
    pub oracle: f64,
    pub decomposed: f64,
    pub block: BlockKind,
    pub rel_error: f64,
    pub allowed: f64,
    pub ok: bool,
}

/// A group of numerically equal decomposed eigenvalues and the blocks
/// they come from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterRow {
    pub lambda: f64,
    pub expected_size: usize,
    pub oracle_size: usize,
    pub blocks: Vec<(BlockKind, usize)>,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub h: f64,
    pub tol: f64,
    pub rows: Vec<MatchRow>,
    pub clusters: Vec<ClusterRow>,
    pub pass: bool,
}

impl VerifyReport {
    /// Human-readable description of every failed pair and cluster.
    pub fn mismatches(&self) -> Vec<String> {
        let mut out = Vec::new();
        for r in self.rows.iter().filter(|r| !r.ok) {
            out.push(format!(
                "eigenvalue #{}: oracle {:.10e} vs {:?} {:.10e} (rel {:.3e} > {:.3e})",
                r.index, r.oracle, r.block, r.decomposed, r.rel_error, r.allowed
            ));
        }
        for c in self.clusters.iter().filter(|c| !c.ok) {
            out.push(format!(
                "cluster at {:.10e}: blocks {:?} expect {} eigenvalues, oracle has {}",
                c.lambda, c.blocks, c.expected_size, c.oracle_size
            ));
        }
        out
    }
}

/// Compares the lowest `m` eigenvalues of the Dirichlet-truncated oracle
/// with the decomposed spectrum. A pair agrees when its relative error is
/// at most `tol + C h² λ`; clusters of equal decomposed eigenvalues must be
/// reproduced with exactly the same size.
pub fn verify_decomposition(
    profile: &MetricProfile,
    h: f64,
    m: usize,
    tol: f64,
    solver: OracleSolver,
) -> Result<VerifyReport, OracleError> {
    if !(tol > 0.0) || m == 0 {
        return Err(OracleError::InvalidInput("need tol > 0 and m ≥ 1".into()));
    }
    let mesh = build_mesh(profile, h, Truncation::Dirichlet)?;
    let s = profile.spheres();
    let widest = s.iter().map(|&x| x.saturating_sub(1)).max().unwrap_or(0);
    let widest = (widest.saturating_mul(widest) as usize).saturating_add(2 * widest as usize + 1);
    let m_ext = m.saturating_add(widest).min(mesh.dim);
    let oracle = oracle_eigenvalues(&mesh, m_ext, solver)?;
    // conforming elements overestimate, so the exact spectrum up to the
    // last oracle value has at least m_ext entries
    let lambda_max = oracle[m_ext - 1] * 1.01 + 1.0;
    let decomposed = decomposed_spectrum(profile, BoundaryCondition::Dirichlet, lambda_max)?.expanded(m_ext);
    let n = m_ext.min(decomposed.len());
    let h_eff = mesh
        .edges()
        .iter()
        .map(|e| e.length / e.elements as f64)
        .fold(0.0, f64::max);
    let allowed = |lambda: f64| tol + FEM_ERROR_CONSTANT * h_eff * h_eff * lambda;
    let within = |o: f64, d: f64| (o - d).abs() <= allowed(d) * d.abs().max(f64::MIN_POSITIVE);

    let rows: Vec<MatchRow> = (0..n)
        .map(|i| {
            let (d, block) = decomposed[i];
            let o = oracle[i];
            MatchRow {
                index: i,
                oracle: o,
                decomposed: d,
                block,
                rel_error: (o - d).abs() / d.abs(),
                allowed: allowed(d),
                ok: within(o, d),
            }
        })
        .collect();

    let mut clusters = Vec::new();
    let mut i = 0;
    while i < m.min(n) {
        let mut j = i + 1;
        while j < n && (decomposed[j].0 - decomposed[i].0).abs() <= tol * decomposed[i].0 {
            j += 1;
        }
        let lambda = decomposed[i].0;
        let mut blocks: Vec<(BlockKind, usize)> = Vec::new();
        for &(_, b) in &decomposed[i..j] {
            match blocks.iter_mut().find(|x| x.0 == b) {
                Some(x) => x.1 += 1,
                None => blocks.push((b, 1)),
            }
        }
        let oracle_size = oracle.iter().filter(|&&o| within(o, lambda)).count();
        // the cluster is complete only if the index range after it was computed
        let complete = j < n || n == mesh.dim;
        clusters.push(ClusterRow {
            lambda,
            expected_size: j - i,
            oracle_size,
            blocks,
            ok: complete && oracle_size == j - i,
        });
        i = j;
    }
    let pass = rows.iter().take(m).all(|r| r.ok) && clusters.iter().all(|c| c.ok) && n >= m.min(mesh.dim);
    Ok(VerifyReport {
        h,
        tol,
        rows: rows.into_iter().take(m).collect(),
        clusters,
        pass,
    })
}

/// Exact Neumann–Dirichlet eigenvalues of a single interval of length `t`,
/// the textbook reference for calibration.
pub fn interval_reference(t: f64, k: usize) -> f64 {
    let z = PI * (k as f64 + 0.5) / t;
    z * z
}
