//! Test problem generators: a 2D Neumann Laplacian, a convection-diffusion
//! operator in Kronecker form, the augmented operator for exponential Euler
//! steps, normalized directed-graph in-Laplacians, and the grid functions
//! that provide starting vectors. A seeded preferential-attachment edge
//! generator is included for graph experiments without external data.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::sparse::SparseMatrix;

/// Equispaced `d x d` grid on `[lo, hi]^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<T> {
    pub d: usize,
    pub lo: T,
    pub hi: T,
}

impl<T: Real> GridSpec<T> {
    pub fn new(d: usize, lo: T, hi: T) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidArgument("grid needs at least 2 points per side".into()));
        }
        if !(hi > lo) {
            return Err(Error::InvalidArgument("grid domain needs hi > lo".into()));
        }
        Ok(GridSpec { d, lo, hi })
    }

    /// Grid spacing `(hi - lo) / (d - 1)`.
    pub fn h(&self) -> T {
        (self.hi - self.lo) / T::from_usize(self.d - 1).unwrap()
    }

    pub fn n(&self) -> usize {
        self.d * self.d
    }
}

/// Grid functions used as starting vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridFunction {
    /// `0.5 exp(-x^2) exp(-y^2)`
    GaussianBump,
    /// `0.3 + 256 x y (1-x) (1-y)`
    PolynomialBump,
}

/// Evaluates `which` at the grid points, column-major with x fastest:
/// entry `i + d*j` holds the value at `(x_i, y_j)`.
pub fn grid_eval<T: Real>(spec: &GridSpec<T>, which: GridFunction) -> Vec<T> {
    let d = spec.d;
    let h = spec.h();
    let coord = |k: usize| spec.lo + h * T::from_usize(k).unwrap();
    let mut out = Vec::with_capacity(d * d);
    for j in 0..d {
        let y = coord(j);
        for i in 0..d {
            let x = coord(i);
            let v = match which {
                GridFunction::GaussianBump => T::c(0.5) * (-x * x).exp() * (-y * y).exp(),
                GridFunction::PolynomialBump => {
                    T::c(0.3) + T::c(256.0) * x * y * (T::one() - x) * (T::one() - y)
                }
            };
            out.push(v);
        }
    }
    out
}

/// Triplets of a `d x d` tridiagonal Toeplitz matrix `tridiag(sub, diag, sup)`.
fn tridiag_triplets<T: Real>(d: usize, sub: T, diag: T, sup: T) -> Vec<(usize, usize, T)> {
    let mut t = Vec::with_capacity(3 * d);
    for i in 0..d {
        t.push((i, i, diag));
        if i > 0 && sub != T::zero() {
            t.push((i, i - 1, sub));
        }
        if i + 1 < d && sup != T::zero() {
            t.push((i, i + 1, sup));
        }
    }
    t
}

/// Lifts 1D triplets to the x factor of the grid: `I (x) T1` acting along
/// the fast index.
fn lift_x<T: Real>(d: usize, t1: &[(usize, usize, T)], out: &mut Vec<(usize, usize, T)>, scale: T) {
    for j in 0..d {
        for &(a, b, v) in t1 {
            out.push((a + d * j, b + d * j, v * scale));
        }
    }
}

/// Lifts 1D triplets to the y factor: `T1 (x) I` acting along the slow index.
fn lift_y<T: Real>(d: usize, t1: &[(usize, usize, T)], out: &mut Vec<(usize, usize, T)>, scale: T) {
    for &(a, b, v) in t1 {
        for i in 0..d {
            out.push((i + d * a, i + d * b, v * scale));
        }
    }
}

/// 5-point finite difference Laplacian with Neumann boundary on the grid,
/// scaled by `1/h^2`. Symmetric, negative semidefinite, zero row sums.
pub fn laplacian_2d_neumann<T: Real>(spec: &GridSpec<T>) -> SparseMatrix<T> {
    let d = spec.d;
    let h = spec.h();
    let inv_h2 = T::one() / (h * h);
    // 1D Neumann stencil: interior rows (1, -2, 1), boundary rows mirror to
    // (-1, 1), keeping row sums zero and symmetry.
    let mut t1 = tridiag_triplets(d, T::one(), -T::c(2.0), T::one());
    for (a, b, v) in &mut t1 {
        if a == b && (*a == 0 || *a == d - 1) {
            *v = -T::one();
        }
    }
    let mut trips = Vec::with_capacity(2 * t1.len() * d);
    lift_x(d, &t1, &mut trips, inv_h2);
    lift_y(d, &t1, &mut trips, inv_h2);
    SparseMatrix::from_coo(d * d, &trips).expect("stencil indices are in range")
}

/// Convection-diffusion operator on the unit square:
/// `diffusion/(d-1)^2 (L (x) I + I (x) L) + 1/(d-1) (C (x) I + I (x) C)`
/// with `L = tridiag(1,-2,1)` and `C = tridiag(1,-1,0)`. Nonsymmetric.
pub fn convection_diffusion<T: Real>(d: usize, diffusion: T) -> Result<SparseMatrix<T>> {
    if d < 2 {
        return Err(Error::InvalidArgument("convection_diffusion needs d >= 2".into()));
    }
    if !(diffusion > T::zero()) {
        return Err(Error::InvalidArgument("diffusion must be positive".into()));
    }
    let dm1 = T::from_usize(d - 1).unwrap();
    let diff_scale = diffusion / (dm1 * dm1);
    let conv_scale = T::one() / dm1;
    let lap = tridiag_triplets(d, T::one(), -T::c(2.0), T::one());
    let conv = tridiag_triplets(d, T::one(), -T::one(), T::zero());
    let mut trips = Vec::new();
    lift_x(d, &lap, &mut trips, diff_scale);
    lift_y(d, &lap, &mut trips, diff_scale);
    lift_x(d, &conv, &mut trips, conv_scale);
    lift_y(d, &conv, &mut trips, conv_scale);
    SparseMatrix::from_coo(d * d, &trips)
}

/// Augments `a` with a constant-source column for one exponential Euler
/// step: `[[a, g], [0, 0]]` of size `(n+1) x (n+1)`.
pub fn augmented_exp_operator<T: Real>(a: &SparseMatrix<T>, g_vec: &[T]) -> Result<SparseMatrix<T>> {
    let n = a.n();
    if g_vec.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: g_vec.len() });
    }
    let mut trips: Vec<(usize, usize, T)> = a.triplets().collect();
    for (i, &g) in g_vec.iter().enumerate() {
        if g != T::zero() {
            trips.push((i, n, g));
        }
    }
    SparseMatrix::from_coo(n + 1, &trips)
}

/// Normalized in-degree Laplacian `I - D^{-1/2} A D^{-1/2}` of a directed
/// graph. Self-loops are dropped and duplicate edges collapse to weight 1.
/// Nodes with zero in-degree are removed iteratively until none remain
/// (removal deletes their outgoing edges, which can expose new zero
/// in-degree nodes). Returns the Laplacian over the survivors together with
/// their original ids in ascending order.
pub fn graph_in_laplacian<T: Real>(edges: &[(usize, usize)]) -> Result<(SparseMatrix<T>, Vec<usize>)> {
    use std::collections::{BTreeMap, BTreeSet};

    let mut edge_set: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut alive: BTreeSet<usize> = BTreeSet::new();
    for &(s, d) in edges {
        if s == d {
            continue;
        }
        edge_set.insert((s, d));
        alive.insert(s);
        alive.insert(d);
    }

    loop {
        let mut in_deg: BTreeMap<usize, usize> = alive.iter().map(|&v| (v, 0)).collect();
        for &(s, d) in &edge_set {
            if alive.contains(&s) && alive.contains(&d) {
                *in_deg.get_mut(&d).unwrap() += 1;
            }
        }
        let doomed: Vec<usize> =
            in_deg.iter().filter(|&(_, &deg)| deg == 0).map(|(&v, _)| v).collect();
        if doomed.is_empty() {
            break;
        }
        for v in doomed {
            alive.remove(&v);
        }
        if alive.is_empty() {
            return Err(Error::EmptyGraph);
        }
    }

    let kept: Vec<usize> = alive.iter().copied().collect();
    let index: BTreeMap<usize, usize> = kept.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let n = kept.len();
    let mut in_deg = vec![0usize; n];
    let mut survivors = Vec::new();
    for &(s, d) in &edge_set {
        if let (Some(&si), Some(&di)) = (index.get(&s), index.get(&d)) {
            in_deg[di] += 1;
            survivors.push((si, di));
        }
    }

    let mut trips: Vec<(usize, usize, T)> = Vec::with_capacity(n + survivors.len());
    for i in 0..n {
        trips.push((i, i, T::one()));
    }
    for (si, di) in survivors {
        let scale = (T::from_usize(in_deg[si].max(1)).unwrap()
            * T::from_usize(in_deg[di]).unwrap())
        .sqrt();
        trips.push((si, di, -T::one() / scale));
    }
    let l = SparseMatrix::from_coo(n, &trips)?;
    Ok((l, kept))
}

/// Directed preferential-attachment edge list: a seed cycle of `out_degree`
/// + 1 nodes, then each new node sends `out_degree` edges to distinct
/// existing nodes drawn with probability proportional to in-degree + 1.
/// Fully determined by the seed.
pub fn preferential_attachment_edges(
    nodes: usize,
    out_degree: usize,
    seed: u64,
) -> Vec<(usize, usize)> {
    assert!(out_degree >= 1, "out_degree must be at least 1");
    let seed_nodes = (out_degree + 1).max(3).min(nodes);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    // Urn with one ball per node plus one per received edge.
    let mut urn: Vec<usize> = Vec::new();
    for v in 0..seed_nodes {
        let w = (v + 1) % seed_nodes;
        edges.push((v, w));
        urn.push(w);
    }
    for v in 0..seed_nodes {
        urn.push(v);
    }
    for v in seed_nodes..nodes {
        let mut targets: Vec<usize> = Vec::with_capacity(out_degree);
        let mut guard = 0usize;
        while targets.len() < out_degree.min(v) {
            let pick = urn[rng.gen_range(0..urn.len())];
            if !targets.contains(&pick) {
                targets.push(pick);
            }
            guard += 1;
            if guard > 100 * out_degree {
                // Deterministic fallback: fill with the lowest unused ids.
                for cand in 0..v {
                    if targets.len() == out_degree.min(v) {
                        break;
                    }
                    if !targets.contains(&cand) {
                        targets.push(cand);
                    }
                }
            }
        }
        for &t in &targets {
            edges.push((v, t));
            urn.push(t);
        }
        // Reciprocal edge from the first target keeps every node's
        // in-degree positive, so the in-Laplacian trim removes nothing.
        if let Some(&t) = targets.first() {
            edges.push((t, v));
            urn.push(v);
        }
        urn.push(v);
    }
    edges
}
