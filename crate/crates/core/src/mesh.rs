//! Lumped-mass P1 discretisation of the graph Laplacian (equivalently, the
//! three-point finite-difference stencil on every edge with the Kirchhoff
//! flux balance folded into the vertex rows).
//!
//! Global node numbering puts the vertices first, followed by the interior
//! nodes of every edge in edge order. Dirichlet vertices keep a slot in the
//! numbering but are never unknowns.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graph::MetricGraph;
use crate::linalg::{DenseLu, Tridiagonal};
use crate::scalar::{c, Scalar};

/// Smallest admissible number of interior nodes on an edge.
pub const MIN_INTERIOR_NODES: usize = 4;

#[derive(Debug, Clone)]
pub struct EdgeMesh<T> {
    pub cells: usize,
    pub h: T,
    offset: usize,
}

impl<T> EdgeMesh<T> {
    pub fn interior_nodes(&self) -> usize {
        self.cells - 1
    }
}

#[derive(Debug, Clone)]
pub struct GraphMesh<T> {
    graph: MetricGraph<T>,
    edges: Vec<EdgeMesh<T>>,
    node_count: usize,
    mass: Vec<T>,
}

impl<T: Scalar> GraphMesh<T> {
    /// Uniform mesh with `ceil(length / mesh_h)` cells per edge.
    pub fn new(graph: &MetricGraph<T>, mesh_h: T) -> Result<Self> {
        if !(mesh_h > T::zero()) || !mesh_h.is_finite() {
            return Err(Error::InvalidDomain(format!("mesh width must be positive, got {mesh_h}")));
        }
        let cells =
            graph.edges().iter().map(|e| (e.length / mesh_h).ceil().to_usize().unwrap_or(usize::MAX).max(1)).collect();
        Self::with_cells(graph, cells)
    }

    /// Mesh with an explicit cell count per edge.
    pub fn with_cells(graph: &MetricGraph<T>, cells: Vec<usize>) -> Result<Self> {
        graph.validate()?;
        assert_eq!(cells.len(), graph.edges().len());
        let mut offset = graph.vertices().len();
        let mut edges = Vec::with_capacity(cells.len());
        for (e, &n) in graph.edges().iter().zip(&cells) {
            if n < MIN_INTERIOR_NODES + 1 {
                return Err(Error::MeshTooCoarse { edge: e.id.clone(), interior_nodes: n.saturating_sub(1) });
            }
            edges.push(EdgeMesh { cells: n, h: e.length / T::from_usize_lossy(n), offset });
            offset += n - 1;
        }
        let mut mass = vec![T::zero(); offset];
        for (e, m) in graph.edges().iter().zip(&edges) {
            let half = c::<T>(0.5) * m.h;
            mass[e.from] = mass[e.from] + half;
            mass[e.to] = mass[e.to] + half;
            for slot in &mut mass[m.offset..m.offset + m.cells - 1] {
                *slot = m.h;
            }
        }
        Ok(Self { graph: graph.clone(), edges, node_count: offset, mass })
    }

    pub fn graph(&self) -> &MetricGraph<T> {
        &self.graph
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_mesh(&self, edge: usize) -> &EdgeMesh<T> {
        &self.edges[edge]
    }

    pub fn edge_meshes(&self) -> &[EdgeMesh<T>] {
        &self.edges
    }

    /// Global index of node `i` (`0..=cells`) along `edge`.
    pub fn edge_node(&self, edge: usize, i: usize) -> usize {
        let m = &self.edges[edge];
        let e = &self.graph.edges()[edge];
        match i {
            0 => e.from,
            i if i == m.cells => e.to,
            i => m.offset + i - 1,
        }
    }

    /// Arclength coordinates of the nodes along `edge`, endpoints included.
    pub fn edge_positions(&self, edge: usize) -> Vec<T> {
        let m = &self.edges[edge];
        let len = self.graph.edges()[edge].length;
        (0..=m.cells).map(|i| if i == m.cells { len } else { m.h * T::from_usize_lossy(i) }).collect()
    }

    /// Diagonal of the lumped mass matrix.
    pub fn mass(&self) -> &[T] {
        &self.mass
    }

    pub fn is_fixed(&self, node: usize) -> bool {
        node < self.graph.vertices().len() && self.graph.is_dirichlet(node)
    }

    pub fn max_h(&self) -> T {
        self.edges.iter().fold(T::zero(), |a, m| a.max(m.h))
    }

    /// `K u` for the stiffness matrix `K` (no Dirichlet masking).
    pub fn apply_stiffness(&self, u: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.node_count];
        for (k, m) in self.edges.iter().enumerate() {
            let inv_h = T::one() / m.h;
            for i in 0..m.cells {
                let (a, b) = (self.edge_node(k, i), self.edge_node(k, i + 1));
                let flux = (u[b] - u[a]) * inv_h;
                out[a] = out[a] - flux;
                out[b] = out[b] + flux;
            }
        }
        out
    }

    /// `u^T K u`, the discrete Dirichlet integral.
    pub fn dirichlet_form(&self, u: &[T]) -> T {
        let mut s = T::zero();
        for (k, m) in self.edges.iter().enumerate() {
            let mut edge_sum = T::zero();
            for i in 0..m.cells {
                let d = u[self.edge_node(k, i + 1)] - u[self.edge_node(k, i)];
                edge_sum = edge_sum + d * d;
            }
            s = s + edge_sum / m.h;
        }
        s
    }

    pub fn mass_inner(&self, u: &[T], v: &[T]) -> T {
        self.mass.iter().zip(u).zip(v).map(|((&m, &a), &b)| m * a * b).sum()
    }

    /// Factorise `alpha M + beta K` restricted to the free nodes.
    pub fn factor(&self, alpha: T, beta: T) -> Result<Factorization<T>> {
        Factorization::new(self, alpha, beta)
    }
}

#[derive(Debug, Clone)]
struct EdgeBlock<T> {
    tri: Tridiagonal<T>,
    /// Columns of the inverse block at its first and last rows.
    first: Vec<T>,
    last: Vec<T>,
    coupling: T,
}

/// Schur-complement solver for `alpha M + beta K`: Thomas sweeps on each edge
/// interior and a dense LU on the free vertices.
#[derive(Debug, Clone)]
pub struct Factorization<T> {
    mesh_edges: Vec<(usize, usize, usize, usize)>,
    blocks: Vec<EdgeBlock<T>>,
    free_index: Vec<Option<usize>>,
    schur: DenseLu<T>,
    vertex_count: usize,
    node_count: usize,
}

impl<T: Scalar> Factorization<T> {
    fn new(mesh: &GraphMesh<T>, alpha: T, beta: T) -> Result<Self> {
        let g = mesh.graph();
        let nv = g.vertices().len();
        let mut free_index = vec![None; nv];
        let mut nfree = 0;
        for (v, slot) in free_index.iter_mut().enumerate() {
            if !g.is_dirichlet(v) {
                *slot = Some(nfree);
                nfree += 1;
            }
        }
        let mut s = vec![T::zero(); nfree * nfree];
        for (v, slot) in free_index.iter().enumerate() {
            if let Some(i) = slot {
                s[i * nfree + i] = alpha * mesh.mass[v];
            }
        }
        let mut blocks = Vec::with_capacity(g.edges().len());
        let mut mesh_edges = Vec::with_capacity(g.edges().len());
        let two = c::<T>(2.0);
        for (e, m) in g.edges().iter().zip(&mesh.edges) {
            let n = m.cells - 1;
            let inv_h = T::one() / m.h;
            let diag = vec![alpha * m.h + two * beta * inv_h; n];
            let tri = Tridiagonal::factor(&diag, -beta * inv_h)?;
            let mut first = vec![T::zero(); n];
            first[0] = T::one();
            tri.solve_in_place(&mut first);
            let mut last = vec![T::zero(); n];
            last[n - 1] = T::one();
            tri.solve_in_place(&mut last);
            let coupling = -beta * inv_h;
            let c2 = coupling * coupling;
            let ends = [(e.from, 0usize), (e.to, n - 1)];
            for &(va, ia) in &ends {
                let Some(ra) = free_index[va] else { continue };
                s[ra * nfree + ra] = s[ra * nfree + ra] + beta * inv_h;
                for &(vb, ib) in &ends {
                    let Some(rb) = free_index[vb] else { continue };
                    let col = if ib == 0 { &first } else { &last };
                    s[ra * nfree + rb] = s[ra * nfree + rb] - c2 * col[ia];
                }
            }
            mesh_edges.push((e.from, e.to, m.offset, n));
            blocks.push(EdgeBlock { tri, first, last, coupling });
        }
        let schur = DenseLu::factor(nfree, s)?;
        Ok(Self { mesh_edges, blocks, free_index, schur, vertex_count: nv, node_count: mesh.node_count })
    }

    /// Solve `(alpha M + beta K) x = b` on the free nodes; fixed nodes return 0.
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        assert_eq!(b.len(), self.node_count);
        let mut x = b.to_vec();
        let nfree = self.free_index.iter().flatten().count();
        let mut rhs_v = vec![T::zero(); nfree];
        for (v, slot) in self.free_index.iter().enumerate() {
            if let Some(i) = slot {
                rhs_v[*i] = b[v];
            }
        }
        for (&(from, to, off, n), blk) in self.mesh_edges.iter().zip(&self.blocks) {
            let y = &mut x[off..off + n];
            blk.tri.solve_in_place(y);
            if let Some(i) = self.free_index[from] {
                rhs_v[i] = rhs_v[i] - blk.coupling * y[0];
            }
            if let Some(i) = self.free_index[to] {
                rhs_v[i] = rhs_v[i] - blk.coupling * y[n - 1];
            }
        }
        let xv = self.schur.solve(&rhs_v);
        for v in 0..self.vertex_count {
            x[v] = self.free_index[v].map_or(T::zero(), |i| xv[i]);
        }
        for (&(from, to, off, n), blk) in self.mesh_edges.iter().zip(&self.blocks) {
            let (xf, xt) = (x[from], x[to]);
            for i in 0..n {
                x[off + i] = x[off + i] - blk.coupling * (xf * blk.first[i] + xt * blk.last[i]);
            }
        }
        x
    }
}

/// Samples of a function along one edge, listed from its `from` end.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeProfile<T> {
    pub edge: String,
    pub x: Vec<T>,
    pub u: Vec<T>,
}

impl<T: Scalar> EdgeProfile<T> {
    /// Piecewise-linear interpolation, clamped at the ends.
    pub fn interpolate(&self, x: T) -> T {
        let n = self.x.len();
        if x <= self.x[0] {
            return self.u[0];
        }
        if x >= self.x[n - 1] {
            return self.u[n - 1];
        }
        let k = self.x.partition_point(|&xi| xi <= x).clamp(1, n - 1);
        let (x0, x1) = (self.x[k - 1], self.x[k]);
        let t = (x - x0) / (x1 - x0);
        self.u[k - 1] + t * (self.u[k] - self.u[k - 1])
    }
}

/// A function sampled at every node of a [`GraphMesh`].
#[derive(Debug, Clone)]
pub struct Field<T> {
    mesh: Arc<GraphMesh<T>>,
    values: Vec<T>,
}

impl<T: Scalar> Field<T> {
    pub fn zeros(mesh: Arc<GraphMesh<T>>) -> Self {
        let n = mesh.node_count();
        Self { mesh, values: vec![T::zero(); n] }
    }

    /// Evaluate `f(edge, x)` at every node; vertex values come from the first
    /// incident edge. Dirichlet vertices are set to zero.
    pub fn from_fn<F: Fn(usize, T) -> T>(mesh: Arc<GraphMesh<T>>, f: F) -> Self {
        let mut values = vec![T::zero(); mesh.node_count()];
        let mut seen = vec![false; mesh.graph().vertices().len()];
        for k in 0..mesh.graph().edges().len() {
            for (i, x) in mesh.edge_positions(k).into_iter().enumerate() {
                let node = mesh.edge_node(k, i);
                if node < seen.len() {
                    if seen[node] {
                        continue;
                    }
                    seen[node] = true;
                }
                values[node] = if mesh.is_fixed(node) { T::zero() } else { f(k, x) };
            }
        }
        Self { mesh, values }
    }

    /// Interpolate per-edge profiles (matched by edge id) onto the mesh.
    pub fn from_profiles(mesh: Arc<GraphMesh<T>>, profiles: &[EdgeProfile<T>]) -> Result<Self> {
        let lookup: Vec<&EdgeProfile<T>> = mesh
            .graph()
            .edges()
            .iter()
            .map(|e| {
                profiles
                    .iter()
                    .find(|p| p.edge == e.id && !p.x.is_empty() && p.x.len() == p.u.len())
                    .ok_or_else(|| Error::InvalidDomain(format!("no samples for edge {}", e.id)))
            })
            .collect::<Result<_>>()?;
        Ok(Self::from_fn(mesh, |k, x| lookup[k].interpolate(x)))
    }

    pub fn from_values(mesh: Arc<GraphMesh<T>>, values: Vec<T>) -> Result<Self> {
        if values.len() != mesh.node_count() {
            return Err(Error::InvalidDomain(format!(
                "field has {} values, mesh has {} nodes",
                values.len(),
                mesh.node_count()
            )));
        }
        Ok(Self { mesh, values })
    }

    pub fn mesh(&self) -> &Arc<GraphMesh<T>> {
        &self.mesh
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn sup_norm(&self) -> T {
        self.values.iter().fold(T::zero(), |a, &v| a.max(v.abs()))
    }

    pub fn l2_norm(&self) -> T {
        self.mesh.mass_inner(&self.values, &self.values).sqrt()
    }

    /// Samples `(x, u)` along one edge, endpoints included.
    pub fn edge_samples(&self, edge: usize) -> Vec<(T, T)> {
        self.mesh
            .edge_positions(edge)
            .into_iter()
            .enumerate()
            .map(|(i, x)| (x, self.values[self.mesh.edge_node(edge, i)]))
            .collect()
    }

    pub fn to_profiles(&self) -> Vec<EdgeProfile<T>> {
        self.mesh
            .graph()
            .edges()
            .iter()
            .enumerate()
            .map(|(k, e)| {
                let (x, u) = self.edge_samples(k).into_iter().unzip();
                EdgeProfile { edge: e.id.clone(), x, u }
            })
            .collect()
    }

    /// `max |self - other|` over all nodes of a shared mesh.
    pub fn distance(&self, other: &Field<T>) -> T {
        self.values.iter().zip(&other.values).fold(T::zero(), |a, (&x, &y)| a.max((x - y).abs()))
    }
}
