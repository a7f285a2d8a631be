//! Fixtures and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use whkit::consistency::PartialSelection;
use whkit::embedding::gen_grid_with_defect;
use whkit::geometry::{mesh_graph, SurfaceGraph};

/// Floyd–Warshall over the edge list; independent of the Dijkstra code.
pub fn floyd_warshall(g: &SurfaceGraph<f64>) -> DMatrix<f64> {
    let n = g.n_vertices();
    let mut d = DMatrix::from_element(n, n, f64::INFINITY);
    for i in 0..n {
        d[(i, i)] = 0.0;
    }
    for (u, v, w) in g.edges() {
        d[(u, v)] = d[(u, v)].min(w);
        d[(v, u)] = d[(v, u)].min(w);
    }
    for k in 0..n {
        for j in 0..n {
            let dkj = d[(k, j)];
            for i in 0..n {
                let via = d[(i, k)] + dkj;
                if via < d[(i, j)] {
                    d[(i, j)] = via;
                }
            }
        }
    }
    d
}

/// Triangulated planar grid graph without defects.
pub fn grid(rows: usize, cols: usize) -> SurfaceGraph<f64> {
    mesh_graph(&gen_grid_with_defect(rows, cols, 1.0, None).unwrap()).unwrap()
}

/// Removes 1 to 3 random interior rectangles from a `rows x cols` grid,
/// redrawing until the remainder is connected.
pub fn random_partial(full: &SurfaceGraph<f64>, rows: usize, cols: usize, seed: u64) -> PartialSelection {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let holes: Vec<(usize, usize, usize, usize)> = (0..rng.gen_range(1..=3))
            .map(|_| {
                let h = rng.gen_range(1..=rows / 3);
                let w = rng.gen_range(1..=cols / 3);
                let r = rng.gen_range(1..rows - h);
                let c = rng.gen_range(1..cols - w);
                (r, c, r + h - 1, c + w - 1)
            })
            .collect();
        let removed = |v: usize| {
            let (r, c) = (v / cols, v % cols);
            holes.iter().any(|&(r0, c0, r1, c1)| (r0..=r1).contains(&r) && (c0..=c1).contains(&c))
        };
        let sel = PartialSelection::from_predicate(rows * cols, |v| !removed(v)).unwrap();
        if whkit::consistency::induce_partial(full, &sel).is_ok() {
            return sel;
        }
    }
}

/// Row-stochastic matrix with strictly positive entries.
pub fn random_stochastic(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    let mut p = DMatrix::from_fn(rows, cols, |_, _| rng.gen_range(0.05..1.0));
    for mut row in p.row_iter_mut() {
        let s = row.sum();
        row /= s;
    }
    p
}

/// Euclidean distances between random points in the unit cube.
pub fn random_distances(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let pts: Vec<[f64; 3]> = (0..n).map(|_| [rng.gen(), rng.gen(), rng.gen()]).collect();
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            let (a, b) = (pts[i.min(j)], pts[i.max(j)]);
            ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
        }
    })
}

/// `max |a - b| / max(max |b|, 1e-300)`.
pub fn rel_inf_error(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax() / b.amax().max(1e-300)
}

/// Central finite-difference gradient of `f` at `x`.
pub fn fd_gradient(f: impl Fn(&DMatrix<f64>) -> f64, x: &DMatrix<f64>, h: f64) -> DMatrix<f64> {
    let mut g = DMatrix::zeros(x.nrows(), x.ncols());
    let mut xp = x.clone();
    for i in 0..x.nrows() {
        for j in 0..x.ncols() {
            let orig = xp[(i, j)];
            xp[(i, j)] = orig + h;
            let up = f(&xp);
            xp[(i, j)] = orig - h;
            let down = f(&xp);
            xp[(i, j)] = orig;
            g[(i, j)] = (up - down) / (2.0 * h);
        }
    }
    g
}

/// `trace(R^T A R A)` with `R = sqrt(M) .* (P D_X P^T - D_Y)`: the
/// area-weighted Frobenius form of the masked loss.
pub fn norm_form_loss(p: &DMatrix<f64>, dx: &DMatrix<f64>, dy: &DMatrix<f64>, mask: &DMatrix<f64>, areas: &[f64]) -> f64 {
    let r = (p * dx * p.transpose() - dy).component_mul(&mask.map(f64::sqrt));
    let a = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(areas));
    (r.transpose() * &a * &r * &a).trace()
}
