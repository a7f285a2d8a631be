//! The `whkit` command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 input or parse error, 3 numeric
//! or contract failure. All matrices are written as WHM1 files; reports are
//! `key = value` text.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;

use crate::consistency::{analyze_partial, PartialSelection};
use crate::criterion::{ct_masks, wormhole_masks, MaskSet, MetricScale, ThresholdAlgo, DEFAULT_BATCH};
use crate::embedding::{
    classical_scaling, gen_grid_with_defect, gen_swiss_roll, pair_weights, smacof_weighted, GridDefect,
    PairMask, ParamRect, SmacofOptions, SwissRollDefect, SwissRollSpec,
};
use crate::error::{Error, Result};
use crate::geodesics::{distance_matrix, DistanceMatrix};
use crate::geometry::{
    extract_boundary, knn_graph, load_index_list, load_mesh, load_pointcloud, mesh_graph, save_index_list,
    save_mesh, save_pointcloud, vertex_areas, BoundarySet, SurfaceGraph, TriangleMesh, VertexAreas,
};
use crate::matching::{
    functional_map, lbo_basis, masked_geo_loss, ortho_loss, total_loss, Correspondence, LossWeights,
};
use crate::whm;

/// Environment variable that overrides `--threads`.
pub const THREADS_ENV: &str = "WHKIT_THREADS";

#[derive(Debug, Parser)]
#[command(name = "whkit", version, about = "Boundary-aware geodesic consistency toolkit")]
pub struct Cli {
    /// Worker threads; 0 uses every core. Overridden by WHKIT_THREADS.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate synthetic surfaces.
    #[command(subcommand)]
    Gen(GenCommand),
    /// All-pairs graph geodesic distances.
    Geodesics(GeodesicsArgs),
    /// Boundary vertices of a mesh (edges with a single incident face).
    Boundary(BoundaryArgs),
    /// Threshold matrix and consistency mask.
    Mask(MaskArgs),
    /// Consistent and guaranteed pair statistics for a partial surface.
    Stats(StatsArgs),
    /// Classical or masked (stress-majorization) MDS embedding.
    Mds(MdsArgs),
    /// Matching losses.
    #[command(subcommand)]
    Loss(LossCommand),
}

#[derive(Debug, Subcommand)]
pub enum GenCommand {
    /// Swiss roll point cloud with optional hole or cut.
    SwissRoll(SwissRollArgs),
    /// Planar triangulated grid with an optional removed block.
    Grid(GridArgs),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DefectArg(pub SwissRollDefect);

impl FromStr for DefectArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "none" {
            return Ok(Self(SwissRollDefect::None));
        }
        let (kind, rect) = s
            .split_once(':')
            .ok_or_else(|| format!("expected none, hole:u0,v0,u1,v1 or cut:u0,v0,u1,v1, got {s:?}"))?;
        let v: Vec<f64> = rect
            .split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}")))
            .collect::<std::result::Result<_, _>>()?;
        let [u0, v0, u1, v1] = v[..] else {
            return Err(format!("expected 4 rectangle coordinates, got {}", v.len()));
        };
        let r = ParamRect::new(u0, v0, u1, v1).map_err(|e| e.to_string())?;
        match kind {
            "hole" => Ok(Self(SwissRollDefect::Hole(r))),
            "cut" => Ok(Self(SwissRollDefect::Cut(r))),
            _ => Err(format!("unknown defect kind {kind:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockArg(pub GridDefect);

impl FromStr for BlockArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let v: Vec<usize> = s
            .split(',')
            .map(|x| x.trim().parse::<usize>().map_err(|e| format!("{x:?}: {e}")))
            .collect::<std::result::Result<_, _>>()?;
        let [r0, c0, r1, c1] = v[..] else {
            return Err(format!("expected r0,c0,r1,c1, got {s:?}"));
        };
        Ok(Self(GridDefect::new(r0, c0, r1, c1)))
    }
}

#[derive(Debug, Args)]
pub struct SwissRollArgs {
    #[arg(long, default_value_t = 2000)]
    pub n: usize,
    #[arg(long, default_value_t = 1.5)]
    pub stretch: f64,
    /// Gaussian noise standard deviation.
    #[arg(long, default_value_t = 0.2)]
    pub noise: f64,
    /// none | hole:u0,v0,u1,v1 | cut:u0,v0,u1,v1 in the unit parameter square.
    #[arg(long, default_value = "none")]
    pub defect: DefectArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Point cloud (.xyz).
    #[arg(long)]
    pub out: PathBuf,
    /// Ground-truth 2D parameterization (WHM1, n x 2).
    #[arg(long)]
    pub param_out: Option<PathBuf>,
    /// Samples near the rim or the defect (index list).
    #[arg(long)]
    pub boundary_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long, default_value_t = 20)]
    pub rows: usize,
    #[arg(long, default_value_t = 20)]
    pub cols: usize,
    #[arg(long, default_value_t = 1.0)]
    pub spacing: f64,
    /// Inclusive vertex block r0,c0,r1,c1 to remove.
    #[arg(long)]
    pub defect: Option<BlockArg>,
    /// Mesh (.off).
    #[arg(long)]
    pub out: PathBuf,
}

/// Surface input: a mesh, or a point cloud turned into a kNN graph.
#[derive(Debug, Args)]
pub struct SurfaceArgs {
    /// Triangle mesh (.off).
    #[arg(long, conflicts_with = "cloud", required_unless_present = "cloud")]
    pub mesh: Option<PathBuf>,
    /// Point cloud (.xyz).
    #[arg(long)]
    pub cloud: Option<PathBuf>,
    /// Neighbours per point for point clouds.
    #[arg(long, default_value_t = 15)]
    pub k: usize,
}

#[derive(Debug, Args)]
pub struct GeodesicsArgs {
    #[command(flatten)]
    pub surface: SurfaceArgs,
    /// Distance matrix (WHM1).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BoundaryArgs {
    #[arg(long)]
    pub mesh: PathBuf,
    /// Index list.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgoArg {
    Naive,
    Fast,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Ct,
    Wormhole,
}

#[derive(Debug, Args)]
pub struct CriterionArgs {
    #[arg(long, value_enum, default_value_t = AlgoArg::Fast)]
    pub algo: AlgoArg,
    /// Metric floor scaling the Euclidean shortcut; 1 is the plain criterion.
    #[arg(long = "c-m", default_value_t = 1.0)]
    pub c_m: f64,
    /// Boundary-pair block size for the naive algorithm.
    #[arg(long, default_value_t = DEFAULT_BATCH)]
    pub batch: usize,
}

impl CriterionArgs {
    fn algo(&self) -> ThresholdAlgo {
        match self.algo {
            AlgoArg::Naive => ThresholdAlgo::Naive { batch: self.batch },
            AlgoArg::Fast => ThresholdAlgo::Fast,
        }
    }

    fn scale(&self) -> Result<MetricScale<f64>> {
        MetricScale::new(self.c_m)
    }
}

#[derive(Debug, Args)]
pub struct MaskArgs {
    #[command(flatten)]
    pub surface: SurfaceArgs,
    /// Boundary index list; meshes default to their topological boundary.
    #[arg(long)]
    pub boundary: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ModeArg::Wormhole)]
    pub mode: ModeArg,
    /// Write the soft mask min(K / D, 1) instead of the binary mask.
    #[arg(long)]
    pub soft: bool,
    #[command(flatten)]
    pub criterion: CriterionArgs,
    /// Mask (WHM1).
    #[arg(long)]
    pub out: PathBuf,
    /// Threshold matrix (WHM1).
    #[arg(long)]
    pub threshold_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Full surface mesh (.off).
    #[arg(long)]
    pub full: PathBuf,
    /// Full-surface vertex indices kept in the partial surface.
    #[arg(long)]
    pub keep: PathBuf,
    /// Relative tolerance for distance equality.
    #[arg(long, default_value_t = crate::consistency::CONSISTENCY_RTOL)]
    pub tol: f64,
    #[command(flatten)]
    pub criterion: CriterionArgs,
    /// Report file; printed to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MdsMethod {
    Classical,
    Whcie,
    Tcie,
}

#[derive(Debug, Args)]
pub struct MdsArgs {
    #[command(flatten)]
    pub surface: SurfaceArgs,
    /// Boundary index list; meshes default to their topological boundary.
    #[arg(long)]
    pub boundary: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = MdsMethod::Whcie)]
    pub method: MdsMethod,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Pairs closer than this are always constrained.
    #[arg(long, default_value_t = 3.0)]
    pub local_radius: f64,
    #[arg(long, default_value_t = 500)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub rel_tol: f64,
    #[command(flatten)]
    pub criterion: CriterionArgs,
    /// Embedding coordinates (WHM1, n x dim).
    #[arg(long)]
    pub out: PathBuf,
    /// Stress after each iteration (WHM1 column).
    #[arg(long)]
    pub stress_out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum LossCommand {
    /// Masked geodesic preservation loss.
    Geo(GeoLossArgs),
    /// Functional-map orthogonality loss.
    Ortho(OrthoLossArgs),
    /// Weighted sum of the two losses.
    Total(TotalLossArgs),
}

#[derive(Debug, Args)]
pub struct GeoLossArgs {
    /// Correspondence, partial x full (WHM1).
    #[arg(long)]
    pub p: PathBuf,
    /// Full-surface distances (WHM1).
    #[arg(long)]
    pub dx: PathBuf,
    /// Partial-surface distances (WHM1).
    #[arg(long)]
    pub dy: PathBuf,
    /// Partial-surface mask (WHM1); all ones when omitted.
    #[arg(long)]
    pub mask: Option<PathBuf>,
    /// Partial-surface vertex areas (WHM1 column); ones when omitted.
    #[arg(long, conflicts_with = "partial_mesh")]
    pub areas: Option<PathBuf>,
    /// Take vertex areas from this partial mesh.
    #[arg(long)]
    pub partial_mesh: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OrthoLossArgs {
    /// Correspondence, partial x full (WHM1).
    #[arg(long)]
    pub p: PathBuf,
    /// Full mesh (.off).
    #[arg(long)]
    pub full: PathBuf,
    /// Partial mesh (.off).
    #[arg(long)]
    pub partial: PathBuf,
    #[arg(long, default_value_t = 128)]
    pub k_full: usize,
    #[arg(long, default_value_t = 80)]
    pub k_partial: usize,
}

#[derive(Debug, Args)]
pub struct TotalLossArgs {
    #[arg(long)]
    pub geo: f64,
    #[arg(long)]
    pub ortho: f64,
    #[arg(long, default_value_t = 1e3)]
    pub lambda_geo: f64,
    #[arg(long, default_value_t = 1.0)]
    pub lambda_ortho: f64,
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code. Diagnostics go to stderr.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let threads = match threads_override(std::env::var(THREADS_ENV).ok(), cli.threads) {
        Ok(t) => t,
        Err(msg) => {
            eprintln!("error: {msg}");
            return 1;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return 3;
        }
    };
    match pool.install(|| execute(&cli.command)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_input_error() {
                2
            } else {
                3
            }
        }
    }
}

fn threads_override(env: Option<String>, flag: usize) -> std::result::Result<usize, String> {
    match env {
        Some(v) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .map_err(|_| format!("{THREADS_ENV} must be a non-negative integer, got {v:?}")),
        _ => Ok(flag),
    }
}

/// Runs a parsed command on the current rayon pool.
pub fn execute(cmd: &Command) -> Result<()> {
    match cmd {
        Command::Gen(GenCommand::SwissRoll(a)) => gen_roll(a),
        Command::Gen(GenCommand::Grid(a)) => {
            let mesh = gen_grid_with_defect(a.rows, a.cols, a.spacing, a.defect.map(|b| b.0))?;
            save_mesh(&a.out, &mesh)
        }
        Command::Geodesics(a) => {
            let surf = load_surface(&a.surface)?;
            whm::save(&a.out, distance_matrix(&surf.graph)?.as_matrix())
        }
        Command::Boundary(a) => {
            let mesh = load_mesh::<f64>(&a.mesh)?;
            save_index_list(&a.out, extract_boundary(&mesh).indices())
        }
        Command::Mask(a) => mask(a),
        Command::Stats(a) => stats(a),
        Command::Mds(a) => mds(a),
        Command::Loss(LossCommand::Geo(a)) => {
            let v = geo_loss(a)?;
            println!("{v:.16e}");
            Ok(())
        }
        Command::Loss(LossCommand::Ortho(a)) => {
            let v = ortho(a)?;
            println!("{v:.16e}");
            Ok(())
        }
        Command::Loss(LossCommand::Total(a)) => {
            let w = LossWeights {
                lambda_geo: a.lambda_geo,
                lambda_ortho: a.lambda_ortho,
            };
            println!("{:.16e}", total_loss(a.geo, a.ortho, w));
            Ok(())
        }
    }
}

fn gen_roll(a: &SwissRollArgs) -> Result<()> {
    let spec = SwissRollSpec {
        n: a.n,
        stretch: a.stretch,
        noise_sigma: a.noise,
        defect: a.defect.0,
        seed: a.seed,
    };
    let roll = gen_swiss_roll::<f64>(&spec)?;
    save_pointcloud(&a.out, &roll.cloud)?;
    if let Some(path) = &a.param_out {
        let gt = roll.cloud.parameterization().expect("generator attaches ground truth");
        let m = DMatrix::from_fn(gt.len(), 2, |i, j| gt[i][j]);
        whm::save(path, &m)?;
    }
    if let Some(path) = &a.boundary_out {
        save_index_list(path, roll.boundary_hint.indices())?;
    }
    Ok(())
}

struct Surface {
    mesh: Option<TriangleMesh<f64>>,
    graph: SurfaceGraph<f64>,
}

fn load_surface(a: &SurfaceArgs) -> Result<Surface> {
    match (&a.mesh, &a.cloud) {
        (Some(path), _) => {
            let mesh = load_mesh(path)?;
            let graph = mesh_graph(&mesh)?;
            Ok(Surface {
                mesh: Some(mesh),
                graph,
            })
        }
        (None, Some(path)) => {
            let cloud = load_pointcloud(path)?;
            Ok(Surface {
                mesh: None,
                graph: knn_graph(&cloud, a.k)?,
            })
        }
        (None, None) => Err(Error::InvalidInput("either --mesh or --cloud is required".into())),
    }
}

fn load_boundary(surf: &Surface, path: Option<&Path>) -> Result<BoundarySet> {
    let n = surf.graph.n_vertices();
    match (path, &surf.mesh) {
        (Some(p), _) => BoundarySet::from_unsorted(load_index_list(p)?, n),
        (None, Some(mesh)) => Ok(extract_boundary(mesh)),
        (None, None) => {
            eprintln!("warning: no --boundary given for a point cloud; treating the surface as closed");
            Ok(BoundarySet::empty())
        }
    }
}

fn bool_matrix(m: &DMatrix<bool>) -> DMatrix<f64> {
    m.map(|b| if b { 1.0 } else { 0.0 })
}

fn mask(a: &MaskArgs) -> Result<()> {
    let surf = load_surface(&a.surface)?;
    let boundary = load_boundary(&surf, a.boundary.as_deref())?;
    let d = distance_matrix(&surf.graph)?;
    let set: MaskSet<f64> = match a.mode {
        ModeArg::Ct => ct_masks(&d, &boundary)?,
        ModeArg::Wormhole => {
            wormhole_masks(&surf.graph, &d, &boundary, a.criterion.scale()?, a.criterion.algo())?
        }
    };
    let out = if a.soft { set.soft.clone() } else { bool_matrix(&set.binary) };
    whm::save(&a.out, &out)?;
    if let Some(path) = &a.threshold_out {
        whm::save(path, &set.threshold)?;
    }
    Ok(())
}

fn stats(a: &StatsArgs) -> Result<()> {
    let mesh = load_mesh::<f64>(&a.full)?;
    let full = mesh_graph(&mesh)?;
    let sel = PartialSelection::new(load_index_list(&a.keep)?, full.n_vertices())?;
    let d_full = distance_matrix(&full)?;
    let analysis = analyze_partial(&full, &d_full, &sel, a.criterion.scale()?, a.criterion.algo(), a.tol)?;
    let text = analysis.report.to_string();
    match &a.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::io(path, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn mds(a: &MdsArgs) -> Result<()> {
    let surf = load_surface(&a.surface)?;
    let d = distance_matrix(&surf.graph)?;
    let init = classical_scaling(&d, a.dim)?;
    if init.padded {
        eprintln!("warning: fewer than {} positive eigenvalues; padded with zero columns", a.dim);
    }
    let (coords, trace) = match a.method {
        MdsMethod::Classical => (init.coords, Vec::new()),
        MdsMethod::Whcie | MdsMethod::Tcie => {
            let boundary = load_boundary(&surf, a.boundary.as_deref())?;
            let mask = match a.method {
                MdsMethod::Whcie => PairMask::Wormhole(a.criterion.scale()?),
                _ => PairMask::BoundaryDistance,
            };
            let w = pair_weights(&surf.graph, &d, &boundary, mask, a.local_radius, a.criterion.algo())?;
            let opts = SmacofOptions {
                max_iter: a.max_iter,
                rel_tol: a.rel_tol,
            };
            let emb = smacof_weighted(&d, &w, &init.coords, opts)?;
            (emb.coords, emb.stress_trace)
        }
    };
    whm::save(&a.out, &coords)?;
    if let Some(path) = &a.stress_out {
        whm::save(path, &whm::column(&trace))?;
    }
    Ok(())
}

fn load_distances(path: &Path) -> Result<DistanceMatrix<f64>> {
    DistanceMatrix::from_matrix(whm::load(path)?)
}

fn geo_loss(a: &GeoLossArgs) -> Result<f64> {
    let p = Correspondence::new(whm::load(&a.p)?)?;
    let dx = load_distances(&a.dx)?;
    let dy = load_distances(&a.dy)?;
    let n = dy.n();
    let mask = match &a.mask {
        Some(path) => whm::load(path)?,
        None => DMatrix::from_element(n, n, 1.0),
    };
    let areas = match (&a.areas, &a.partial_mesh) {
        (Some(path), _) => {
            let m: DMatrix<f64> = whm::load(path)?;
            VertexAreas::new(m.iter().copied().collect())?
        }
        (None, Some(path)) => vertex_areas(&load_mesh(path)?)?,
        (None, None) => VertexAreas::uniform(n, 1.0)?,
    };
    masked_geo_loss(p.as_matrix(), &dx, &dy, &mask, &areas)
}

fn ortho(a: &OrthoLossArgs) -> Result<f64> {
    let p = Correspondence::new(whm::load(&a.p)?)?;
    let full = lbo_basis(&load_mesh::<f64>(&a.full)?, a.k_full)?;
    let partial = lbo_basis(&load_mesh::<f64>(&a.partial)?, a.k_partial)?;
    Ok(ortho_loss(&functional_map(&p, &full, &partial)?))
}
