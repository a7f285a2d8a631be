//! Synthetic surfaces with known geometry.

use std::f64::consts::PI;

use nalgebra::{Point2, Point3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::geometry::{mesh_graph, BoundarySet, PointCloud, TriangleMesh};
use crate::scalar::Real;

/// Angle range of the roll, `t in [1.5 pi, 4.5 pi]`.
pub const ROLL_T_RANGE: (f64, f64) = (1.5 * PI, 4.5 * PI);
/// Unstretched width of the roll.
pub const ROLL_HEIGHT: f64 = 21.0;

/// Arclength of the spiral `r = t` from the origin.
pub fn spiral_arclength(t: f64) -> f64 {
    0.5 * (t * (1.0 + t * t).sqrt() + t.asinh())
}

/// Axis-aligned rectangle `[u0, u1] x [v0, v1]` in the normalised parameter
/// square, `u` along the spiral and `v` across the width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamRect {
    pub u0: f64,
    pub v0: f64,
    pub u1: f64,
    pub v1: f64,
}

impl ParamRect {
    pub fn new(u0: f64, v0: f64, u1: f64, v1: f64) -> Result<Self> {
        let r = Self { u0, v0, u1, v1 };
        let inside = |a: f64, b: f64| (0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b) && a < b;
        if !inside(u0, u1) || !inside(v0, v1) {
            return Err(Error::InvalidInput(format!(
                "rectangle {u0},{v0},{u1},{v1} must satisfy 0 <= lo < hi <= 1 on both axes"
            )));
        }
        Ok(r)
    }

    fn contains(&self, u: f64, v: f64) -> bool {
        (self.u0..=self.u1).contains(&u) && (self.v0..=self.v1).contains(&v)
    }

    fn touches_rim(&self) -> bool {
        self.u0 == 0.0 || self.v0 == 0.0 || self.u1 == 1.0 || self.v1 == 1.0
    }

    fn area(&self) -> f64 {
        (self.u1 - self.u0) * (self.v1 - self.v0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SwissRollDefect {
    None,
    /// Interior hole; the rectangle may not touch the rim.
    Hole(ParamRect),
    /// Missing part connected to the rim; the rectangle must touch it.
    Cut(ParamRect),
}

impl SwissRollDefect {
    fn rect(&self) -> Option<&ParamRect> {
        match self {
            SwissRollDefect::None => None,
            SwissRollDefect::Hole(r) | SwissRollDefect::Cut(r) => Some(r),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwissRollSpec {
    pub n: usize,
    /// Width factor applied across the roll.
    pub stretch: f64,
    pub noise_sigma: f64,
    pub defect: SwissRollDefect,
    pub seed: u64,
}

impl Default for SwissRollSpec {
    fn default() -> Self {
        Self {
            n: 2000,
            stretch: 1.5,
            noise_sigma: 0.2,
            defect: SwissRollDefect::None,
            seed: 0,
        }
    }
}

impl SwissRollSpec {
    fn validate(&self) -> Result<()> {
        if self.n < 10 {
            return Err(Error::InvalidInput(format!("need at least 10 samples, got {}", self.n)));
        }
        if !(self.noise_sigma >= 0.0) || !self.noise_sigma.is_finite() {
            return Err(Error::InvalidInput("noise sigma must be finite and >= 0".into()));
        }
        if !(self.stretch > 0.0) || !self.stretch.is_finite() {
            return Err(Error::InvalidInput("stretch must be positive".into()));
        }
        match self.defect {
            SwissRollDefect::None => {}
            SwissRollDefect::Hole(r) => {
                if r.touches_rim() {
                    return Err(Error::InvalidInput("a hole may not touch the rim; use a cut".into()));
                }
            }
            SwissRollDefect::Cut(r) => {
                if !r.touches_rim() {
                    return Err(Error::InvalidInput("a cut must touch the rim; use a hole".into()));
                }
                if r.area() >= 1.0 {
                    return Err(Error::InvalidInput("the cut removes the whole surface".into()));
                }
            }
        }
        Ok(())
    }
}

/// A sampled swiss roll: 3D points, their flattened ground-truth positions
/// (arclength along the spiral, stretched width), and the samples lying
/// within one nominal spacing of the rim or the defect.
#[derive(Debug, Clone)]
pub struct SwissRoll<T: Real> {
    pub cloud: PointCloud<T>,
    pub boundary_hint: BoundarySet,
}

fn dist_to_interval(x: f64, lo: f64, hi: f64) -> f64 {
    if x < lo {
        lo - x
    } else if x > hi {
        x - hi
    } else {
        0.0
    }
}

pub fn gen_swiss_roll<T: Real>(spec: &SwissRollSpec) -> Result<SwissRoll<T>> {
    spec.validate()?;
    let (t0, t1) = ROLL_T_RANGE;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = Normal::new(0.0, spec.noise_sigma).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let rect = spec.defect.rect();

    let mut params = Vec::with_capacity(spec.n);
    while params.len() < spec.n {
        let (u, v): (f64, f64) = (rng.gen(), rng.gen());
        if rect.is_some_and(|r| r.contains(u, v)) {
            continue;
        }
        params.push((u, v));
    }

    let mut points = Vec::with_capacity(spec.n);
    let mut truth = Vec::with_capacity(spec.n);
    let s0 = spiral_arclength(t0);
    for &(u, v) in &params {
        let t = t0 + u * (t1 - t0);
        let y = spec.stretch * ROLL_HEIGHT * v;
        let mut p = [t * t.cos(), y, t * t.sin()];
        if spec.noise_sigma > 0.0 {
            for c in &mut p {
                *c += noise.sample(&mut rng);
            }
        }
        points.push(Point3::new(T::lit(p[0]), T::lit(p[1]), T::lit(p[2])));
        truth.push((spiral_arclength(t) - s0, y));
    }

    // ground-truth frame extents
    let length = spiral_arclength(t1) - s0;
    let width = spec.stretch * ROLL_HEIGHT;
    let kept_fraction = 1.0 - rect.map_or(0.0, ParamRect::area);
    let spacing = (length * width * kept_fraction / spec.n as f64).sqrt();
    let hole_gt = rect.map(|r| {
        let at = |u: f64| spiral_arclength(t0 + u * (t1 - t0)) - s0;
        (at(r.u0), at(r.u1), width * r.v0, width * r.v1)
    });
    let hint: Vec<usize> = truth
        .iter()
        .enumerate()
        .filter(|&(_, &(s, y))| {
            let rim = s.min(length - s).min(y).min(width - y);
            let defect = hole_gt.map_or(f64::INFINITY, |(a0, a1, b0, b1)| {
                dist_to_interval(s, a0, a1).hypot(dist_to_interval(y, b0, b1))
            });
            rim < spacing || defect < spacing
        })
        .map(|(i, _)| i)
        .collect();

    let truth = truth
        .into_iter()
        .map(|(s, y)| Point2::new(T::lit(s), T::lit(y)))
        .collect();
    Ok(SwissRoll {
        cloud: PointCloud::with_parameterization(points, truth)?,
        boundary_hint: BoundarySet::new(hint, spec.n)?,
    })
}

/// Inclusive block of grid vertices `rows r0..=r1, cols c0..=c1` to remove.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridDefect {
    pub r0: usize,
    pub c0: usize,
    pub r1: usize,
    pub c1: usize,
}

impl GridDefect {
    pub fn new(r0: usize, c0: usize, r1: usize, c1: usize) -> Self {
        Self { r0, c0, r1, c1 }
    }

    fn contains(&self, r: usize, c: usize) -> bool {
        (self.r0..=self.r1).contains(&r) && (self.c0..=self.c1).contains(&c)
    }
}

/// Planar `rows x cols` grid at `spacing`, every cell split along its
/// `(r, c)`-`(r+1, c+1)` diagonal. Defect vertices and their faces are
/// removed, then vertices left without faces; the result is re-indexed in
/// row-major order.
pub fn gen_grid_with_defect<T: Real>(
    rows: usize,
    cols: usize,
    spacing: T,
    defect: Option<GridDefect>,
) -> Result<TriangleMesh<T>> {
    if rows < 3 || cols < 3 {
        return Err(Error::InvalidInput(format!("grid must be at least 3x3, got {rows}x{cols}")));
    }
    if !(spacing > T::zero()) {
        return Err(Error::InvalidInput("grid spacing must be positive".into()));
    }
    if let Some(d) = defect {
        if d.r0 > d.r1 || d.c0 > d.c1 {
            return Err(Error::InvalidInput("defect block has inverted bounds".into()));
        }
    }
    let id = |r: usize, c: usize| r * cols + c;
    let removed = |v: usize| defect.is_some_and(|d| d.contains(v / cols, v % cols));
    let mut faces = Vec::new();
    for r in 0..rows - 1 {
        for c in 0..cols - 1 {
            let (a, b, cc, d) = (id(r, c), id(r, c + 1), id(r + 1, c + 1), id(r + 1, c));
            for f in [[a, b, cc], [a, cc, d]] {
                if !f.iter().any(|&v| removed(v)) {
                    faces.push(f);
                }
            }
        }
    }
    let mut used = vec![false; rows * cols];
    for f in &faces {
        for &v in f {
            used[v] = true;
        }
    }
    let mut new_id = vec![usize::MAX; rows * cols];
    let mut verts = Vec::new();
    for v in 0..rows * cols {
        if used[v] {
            new_id[v] = verts.len();
            let (r, c) = (v / cols, v % cols);
            verts.push(Point3::new(T::from_count(c) * spacing, T::from_count(r) * spacing, T::zero()));
        }
    }
    if verts.is_empty() {
        return Err(Error::InvalidInput("defect removes the whole grid".into()));
    }
    for f in &mut faces {
        for v in f.iter_mut() {
            *v = new_id[*v];
        }
    }
    let mesh = TriangleMesh::new(verts, faces)?;
    let comps = mesh_graph(&mesh)?.components();
    if comps.len() > 1 {
        return Err(Error::DisconnectedComponents(comps));
    }
    Ok(mesh)
}
