//! Divergence-free matrix eigenbasis on a rectangle.
//!
//! Discretizes `(∇Φ, ∇Ξ) + (Φ, Ξ) = λ (Φ, Ξ)` over 2×2 matrix fields whose
//! columns are divergence-free, with natural boundary conditions. Unknowns sit
//! at cell centres; the stiffness is the Neumann graph Laplacian plus mass and
//! the divergence constraint is imposed at interior cell vertices. The
//! constraint is eliminated through an explicit orthonormal null-space basis.
//!
//! Matrix fields are flat vectors `[c * N + p]` with component `c = 2i + j`
//! for `Φ_ij` and node `p = a * ny + b`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Largest `nx · ny` accepted by the dense solver.
pub const NODE_BUDGET: usize = 4096;

const D: usize = 2;
const COMPONENTS: usize = D * D;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RectGrid {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
    pub hx: f64,
    pub hy: f64,
}

impl RectGrid {
    /// Cell-centred grid of `nx × ny` cells on `[0, lx] × [0, ly]`.
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        if nx == 0 || ny == 0 || !(lx > 0.0 && ly > 0.0 && lx.is_finite() && ly.is_finite()) {
            return Err(Error::InvalidGrid(format!("rectangle {nx}x{ny} on {lx}x{ly}")));
        }
        if nx * ny > NODE_BUDGET {
            return Err(Error::BudgetExceeded { nodes: nx * ny, limit: NODE_BUDGET });
        }
        Ok(Self { nx, ny, lx, ly, hx: lx / nx as f64, hy: ly / ny as f64 })
    }

    pub fn unit_square(n: usize) -> Result<Self> {
        Self::new(n, n, 1.0, 1.0)
    }

    pub fn nodes(&self) -> usize {
        self.nx * self.ny
    }

    pub fn node(&self, a: usize, b: usize) -> usize {
        a * self.ny + b
    }

    /// Cell-centre coordinates of node `p`.
    pub fn coords(&self, p: usize) -> [f64; 2] {
        let (a, b) = (p / self.ny, p % self.ny);
        [(a as f64 + 0.5) * self.hx, (b as f64 + 0.5) * self.hy]
    }

    pub fn cell_area(&self) -> f64 {
        self.hx * self.hy
    }

    /// Length of a flat matrix field.
    pub fn field_len(&self) -> usize {
        COMPONENTS * self.nodes()
    }
}

/// Compressed sparse row matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Sums duplicate entries.
    pub fn from_triplets(nrows: usize, ncols: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by_key(|&(i, j, _)| (i, j));
        let mut indptr = vec![0; nrows + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last = None;
        for (i, j, v) in triplets {
            assert!(i < nrows && j < ncols, "entry ({i}, {j}) out of bounds");
            if last == Some((i, j)) {
                *values.last_mut().expect("previous entry") += v;
                continue;
            }
            last = Some((i, j));
            indices.push(j);
            values.push(v);
            indptr[i + 1] = indices.len();
        }
        for r in 1..=nrows {
            indptr[r] = indptr[r].max(indptr[r - 1]);
        }
        Self { nrows, ncols, indptr, indices, values }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.indptr[i]..self.indptr[i + 1];
        self.indices[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                m[(i, j)] += v;
            }
        }
        m
    }

    /// `selfᵀ · self`, dense.
    fn gram_dense(&self) -> DMatrix<f64> {
        let mut g = DMatrix::zeros(self.ncols, self.ncols);
        for i in 0..self.nrows {
            for (j, vj) in self.row(i) {
                for (k, vk) in self.row(i) {
                    g[(j, k)] += vj * vk;
                }
            }
        }
        g
    }

    /// `self · x` for a dense `x`.
    fn mul_dense(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.nrows, x.ncols());
        for c in 0..x.ncols() {
            let col = x.column(c);
            for i in 0..self.nrows {
                out[(i, c)] = self.row(i).map(|(j, v)| v * col[j]).sum();
            }
        }
        out
    }
}

/// Stiffness `A`, mass `M` and divergence constraint `D` on matrix fields.
#[derive(Clone, Debug)]
pub struct Assembly {
    pub grid: RectGrid,
    pub stiffness: CsrMatrix,
    pub mass: CsrMatrix,
    pub divergence: CsrMatrix,
    pub periodic: bool,
}

/// Natural-boundary assembly on the rectangle.
pub fn assemble(grid: &RectGrid) -> Assembly {
    build(grid, false)
}

/// Periodic variant used to cross-check against the Fourier spectrum.
pub fn assemble_periodic(grid: &RectGrid) -> Assembly {
    build(grid, true)
}

fn build(grid: &RectGrid, periodic: bool) -> Assembly {
    let scalar = scalar_stiffness(grid, periodic);
    let n = grid.nodes();
    let len = grid.field_len();
    let mut a = Vec::new();
    for c in 0..COMPONENTS {
        for &(i, j, v) in &scalar {
            a.push((c * n + i, c * n + j, v));
        }
    }
    let mass = (0..len).map(|i| (i, i, grid.cell_area())).collect();
    let div = column_divergence(grid, periodic);
    let rows = D * vertex_count(grid, periodic);
    Assembly {
        grid: *grid,
        stiffness: CsrMatrix::from_triplets(len, len, a),
        mass: CsrMatrix::from_triplets(len, len, mass),
        divergence: CsrMatrix::from_triplets(rows, len, div),
        periodic,
    }
}

/// Graph Laplacian over adjacent cells, weighted by face length over centre
/// distance, plus the cell mass.
fn scalar_stiffness(grid: &RectGrid, periodic: bool) -> Vec<(usize, usize, f64)> {
    let mut t: Vec<(usize, usize, f64)> =
        (0..grid.nodes()).map(|p| (p, p, grid.cell_area())).collect();
    let mut link = |p: usize, q: usize, w: f64| {
        t.extend([(p, p, w), (q, q, w), (p, q, -w), (q, p, -w)]);
    };
    let (wx, wy) = (grid.hy / grid.hx, grid.hx / grid.hy);
    for a in 0..grid.nx {
        for b in 0..grid.ny {
            let p = grid.node(a, b);
            if a + 1 < grid.nx || periodic {
                link(p, grid.node((a + 1) % grid.nx, b), wx);
            }
            if b + 1 < grid.ny || periodic {
                link(p, grid.node(a, (b + 1) % grid.ny), wy);
            }
        }
    }
    t
}

fn vertex_count(grid: &RectGrid, periodic: bool) -> usize {
    if periodic {
        grid.nodes()
    } else {
        grid.nx.saturating_sub(1) * grid.ny.saturating_sub(1)
    }
}

/// Rows `j * V + v`: `∂x Φ_0j + ∂y Φ_1j` at vertex `v`, each derivative the
/// average of the two cell differences meeting there.
fn column_divergence(grid: &RectGrid, periodic: bool) -> Vec<(usize, usize, f64)> {
    let n = grid.nodes();
    let local = local_divergence(grid, periodic);
    let v = vertex_count(grid, periodic);
    (0..D)
        .flat_map(|j| {
            local.iter().map(move |&(row, col, val)| {
                let c = if col < n { j } else { D + j };
                (j * v + row, c * n + col % n, val)
            })
        })
        .collect()
}

/// Divergence of one column `(Φ_0j, Φ_1j)` stored as `[slot * N + p]`.
fn local_divergence(grid: &RectGrid, periodic: bool) -> Vec<(usize, usize, f64)> {
    let n = grid.nodes();
    let (va, vb) = if periodic {
        (grid.nx, grid.ny)
    } else {
        (grid.nx.saturating_sub(1), grid.ny.saturating_sub(1))
    };
    let (sx, sy) = (0.5 / grid.hx, 0.5 / grid.hy);
    let mut t = Vec::with_capacity(8 * va * vb);
    for a in 0..va {
        for b in 0..vb {
            let row = a * vb + b;
            let (a1, b1) = ((a + 1) % grid.nx, (b + 1) % grid.ny);
            let (p00, p10, p01, p11) =
                (grid.node(a, b), grid.node(a1, b), grid.node(a, b1), grid.node(a1, b1));
            t.extend([
                (row, p10, sx),
                (row, p11, sx),
                (row, p00, -sx),
                (row, p01, -sx),
                (row, n + p01, sy),
                (row, n + p11, sy),
                (row, n + p00, -sy),
                (row, n + p10, -sy),
            ]);
        }
    }
    t
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenPair {
    pub lambda: f64,
    /// Flat matrix field, normalized in the discrete `L²` norm.
    pub phi: Vec<f64>,
}

/// The `k` smallest eigenpairs of the natural-boundary problem.
pub fn eigensolve(grid: &RectGrid, k: usize) -> Result<Vec<EigenPair>> {
    solve_blocks(&assemble(grid), k)
}

/// Same as [`eigensolve`] for the periodic assembly.
pub fn eigensolve_periodic(grid: &RectGrid, k: usize) -> Result<Vec<EigenPair>> {
    solve_blocks(&assemble_periodic(grid), k)
}

/// Solves the two matrix columns independently: column `j` couples only
/// `Φ_0j` and `Φ_1j`, and the stiffness and mass act componentwise, so both
/// columns share one reduced problem.
fn solve_blocks(asm: &Assembly, k: usize) -> Result<Vec<EigenPair>> {
    let grid = asm.grid;
    let n = grid.nodes();
    let scalar = scalar_stiffness(&grid, asm.periodic);
    let stiffness = CsrMatrix::from_triplets(
        D * n,
        D * n,
        (0..D)
            .flat_map(|s| scalar.iter().map(move |&(i, j, v)| (s * n + i, s * n + j, v)))
            .collect(),
    );
    let div = CsrMatrix::from_triplets(
        vertex_count(&grid, asm.periodic),
        D * n,
        local_divergence(&grid, asm.periodic),
    );
    let column = constrained_eigen(&stiffness, grid.cell_area(), &div)?;
    if D * column.len() < k {
        return Err(Error::NullspaceDeficient { available: D * column.len(), requested: k });
    }
    let mut all = Vec::with_capacity(k);
    for (lambda, v) in &column {
        for j in 0..D {
            if all.len() == k {
                return Ok(all);
            }
            let mut phi = vec![0.0; grid.field_len()];
            phi[j * n..(j + 1) * n].copy_from_slice(&v[..n]);
            phi[(D + j) * n..(D + j + 1) * n].copy_from_slice(&v[n..]);
            all.push(EigenPair { lambda: *lambda, phi });
        }
    }
    Ok(all)
}

/// Full dense solve on all four components at once; for cross-checks on small grids.
pub fn eigensolve_dense(asm: &Assembly, k: usize) -> Result<Vec<EigenPair>> {
    let pairs = constrained_eigen(&asm.stiffness, asm.grid.cell_area(), &asm.divergence)?;
    if pairs.len() < k {
        return Err(Error::NullspaceDeficient { available: pairs.len(), requested: k });
    }
    Ok(pairs.into_iter().take(k).map(|(lambda, phi)| EigenPair { lambda, phi }).collect())
}

/// Eigenpairs of `A` on `ker D` with mass `area · I`, ascending, normalized
/// so that `area · |v|² = 1`.
fn constrained_eigen(a: &CsrMatrix, area: f64, d: &CsrMatrix) -> Result<Vec<(f64, Vec<f64>)>> {
    let z = null_space(d);
    let az = a.mul_dense(&z);
    let mut reduced = z.transpose() * az;
    reduced /= area;
    // symmetrize against round-off before the symmetric solver
    let reduced = (&reduced + reduced.transpose()) * 0.5;
    let eig = SymmetricEigen::new(reduced);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let scale = 1.0 / area.sqrt();
    Ok(order
        .into_iter()
        .map(|i| {
            let v: DVector<f64> = &z * eig.eigenvectors.column(i) * scale;
            (eig.eigenvalues[i], v.iter().copied().collect())
        })
        .collect())
}

/// Orthonormal basis of `ker D` from the spectrum of `DᵀD`.
fn null_space(d: &CsrMatrix) -> DMatrix<f64> {
    let n = d.ncols();
    if d.nrows() == 0 || d.nnz() == 0 {
        return DMatrix::identity(n, n);
    }
    let eig = SymmetricEigen::new(d.gram_dense());
    let top = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let keep: Vec<usize> =
        (0..n).filter(|&i| eig.eigenvalues[i] <= 1e-9 * top).collect();
    let mut z = DMatrix::zeros(n, keep.len());
    for (c, &i) in keep.iter().enumerate() {
        z.set_column(c, &eig.eigenvectors.column(i));
    }
    z
}

/// Discrete `L²` inner product `hx hy Σ f·g`.
pub fn inner(grid: &RectGrid, f: &[f64], g: &[f64]) -> f64 {
    grid.cell_area() * f.iter().zip(g).map(|(a, b)| a * b).sum::<f64>()
}

/// `(Φⁱ, Φʲ)` for all pairs.
pub fn l2_gram(grid: &RectGrid, basis: &[EigenPair]) -> DMatrix<f64> {
    DMatrix::from_fn(basis.len(), basis.len(), |i, j| inner(grid, &basis[i].phi, &basis[j].phi))
}

/// `(∇Φⁱ, ∇Φʲ) + (Φⁱ, Φʲ)` for all pairs.
pub fn w_gram(asm: &Assembly, basis: &[EigenPair]) -> DMatrix<f64> {
    let a_phi: Vec<Vec<f64>> = basis.iter().map(|p| asm.stiffness.mul_vec(&p.phi)).collect();
    DMatrix::from_fn(basis.len(), basis.len(), |i, j| {
        basis[i].phi.iter().zip(&a_phi[j]).map(|(x, y)| x * y).sum()
    })
}

/// `|D φ| / |φ|` in the Euclidean norm, scaled by the node spacing so that it
/// is comparable with a derivative-to-value ratio.
pub fn divergence_ratio(asm: &Assembly, phi: &[f64]) -> f64 {
    let norm = phi.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return 0.0;
    }
    let div = asm.divergence.mul_vec(phi);
    div.iter().map(|x| x * x).sum::<f64>().sqrt() / norm
}

#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    /// `dⱼ = (F, Φʲ)`.
    pub coeffs: Vec<f64>,
    pub reconstruction: Vec<f64>,
    /// `‖F − Σ dⱼ Φʲ‖`.
    pub residual_norm: f64,
    /// `max_j |(F − Σ dⱼ Φʲ, Φʲ)|`.
    pub residual_overlap: f64,
}

/// Orthogonal projection of `f` onto the span of an `L²`-orthonormal basis.
#[allow(non_snake_case)]
pub fn project_Pn(grid: &RectGrid, f: &[f64], basis: &[EigenPair]) -> Projection {
    assert_eq!(f.len(), grid.field_len(), "field length");
    let coeffs: Vec<f64> = basis.iter().map(|p| inner(grid, f, &p.phi)).collect();
    let mut reconstruction = vec![0.0; f.len()];
    for (c, p) in coeffs.iter().zip(basis) {
        for (r, x) in reconstruction.iter_mut().zip(&p.phi) {
            *r += c * x;
        }
    }
    let residual: Vec<f64> = f.iter().zip(&reconstruction).map(|(a, b)| a - b).collect();
    let residual_norm = inner(grid, &residual, &residual).sqrt();
    let residual_overlap =
        basis.iter().map(|p| inner(grid, &residual, &p.phi).abs()).fold(0.0, f64::max);
    Projection { coeffs, reconstruction, residual_norm, residual_overlap }
}

/// Flat field with constant value `m[i][j]` in component `Φ_ij`.
pub fn constant_field(grid: &RectGrid, m: [[f64; 2]; 2]) -> Vec<f64> {
    let n = grid.nodes();
    let mut f = vec![0.0; grid.field_len()];
    for i in 0..D {
        for j in 0..D {
            f[(i * D + j) * n..(i * D + j + 1) * n].fill(m[i][j]);
        }
    }
    f
}
