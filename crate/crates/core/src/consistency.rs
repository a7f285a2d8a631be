//! Ground truth for consistent pairs: cut a partial surface out of a full
//! one, compare distances on both, and tally how many consistent pairs each
//! criterion recovers.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geodesics::DistanceMatrix;
use crate::geometry::{BoundarySet, SurfaceGraph};
use crate::scalar::Real;

/// Default relative tolerance for `D_partial == D_full`.
pub const CONSISTENCY_RTOL: f64 = 1e-9;

/// Full-surface vertices retained in a partial surface.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialSelection {
    kept: Vec<usize>,
}

impl PartialSelection {
    pub fn new(kept: Vec<usize>, n_full: usize) -> Result<Self> {
        if kept.is_empty() {
            return Err(Error::InvalidInput("partial selection is empty".into()));
        }
        if let Some(w) = kept.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(format!(
                "kept indices not strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        if kept[kept.len() - 1] >= n_full {
            return Err(Error::InvalidInput(format!(
                "kept index {} out of range for {n_full} vertices",
                kept[kept.len() - 1]
            )));
        }
        Ok(Self { kept })
    }

    /// Keeps every vertex for which `keep` is true.
    pub fn from_predicate(n_full: usize, keep: impl Fn(usize) -> bool) -> Result<Self> {
        Self::new((0..n_full).filter(|&v| keep(v)).collect(), n_full)
    }

    pub fn kept(&self) -> &[usize] {
        &self.kept
    }

    pub fn len(&self) -> usize {
        self.kept.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kept.is_empty()
    }
}

/// Vertex-induced subgraph on the kept vertices, re-indexed in kept order.
/// Its boundary is every kept vertex with a removed neighbour in `full`.
pub fn induce_partial<T: Real>(
    full: &SurfaceGraph<T>,
    sel: &PartialSelection,
) -> Result<(SurfaceGraph<T>, BoundarySet)> {
    let n = full.n_vertices();
    if sel.kept().last().is_some_and(|&v| v >= n) {
        return Err(Error::InvalidInput("selection exceeds the full graph".into()));
    }
    let mut new_id = vec![usize::MAX; n];
    for (k, &v) in sel.kept().iter().enumerate() {
        new_id[v] = k;
    }
    let coords = sel.kept().iter().map(|&v| full.coords()[v]).collect();
    let mut edges = Vec::new();
    let mut boundary = Vec::new();
    for (k, &v) in sel.kept().iter().enumerate() {
        let mut on_rim = false;
        for &(u, _) in full.neighbors(v) {
            match new_id[u] {
                usize::MAX => on_rim = true,
                ku if ku > k => edges.push((k, ku)),
                _ => {}
            }
        }
        if on_rim {
            boundary.push(k);
        }
    }
    let graph = SurfaceGraph::from_edges(coords, edges)?;
    let comps = graph.components();
    if comps.len() > 1 {
        let comps = comps
            .into_iter()
            .map(|c| c.into_iter().map(|k| sel.kept()[k]).collect())
            .collect();
        return Err(Error::DisconnectedComponents(comps));
    }
    let boundary = BoundarySet::new(boundary, sel.len())?;
    Ok((graph, boundary))
}

/// `C_ij = 1` iff `D_partial <= (1 + tol) * D_full`. Because removing
/// vertices can only lengthen paths, this detects equality; a partial
/// distance shorter than the full one beyond `tol` is reported as an error.
pub fn consistent_pairs<T: Real>(
    d_full_restricted: &DistanceMatrix<T>,
    d_partial: &DistanceMatrix<T>,
    tol: T,
) -> Result<DMatrix<bool>> {
    let n = d_partial.n();
    if d_full_restricted.n() != n {
        return Err(Error::Dimension(format!(
            "restricted full matrix is {}x{0}, partial is {n}x{n}",
            d_full_restricted.n()
        )));
    }
    let one = T::one();
    let mut out = DMatrix::from_element(n, n, false);
    for j in 0..n {
        for i in 0..n {
            let (f, p) = (d_full_restricted.get(i, j), d_partial.get(i, j));
            if p < f * (one - tol) {
                return Err(Error::Contract(format!(
                    "partial distance {p} < full distance {f} for pair ({i}, {j}); \
                     the partial graph is not a subgraph of the full one"
                )));
            }
            out[(i, j)] = p <= f * (one + tol);
        }
    }
    Ok(out)
}

/// Percentages and counts over unordered distinct pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsistencyReport {
    /// Consistent pairs out of all pairs.
    pub pct_consistent: f64,
    /// Pairs guaranteed by the boundary-distance criterion, out of the
    /// consistent pairs.
    pub pct_guaranteed_ct: f64,
    /// Pairs guaranteed by the wormhole criterion, out of the consistent
    /// pairs.
    pub pct_guaranteed_cw: f64,
    pub n_pairs: u64,
    pub n_consistent: u64,
    pub n_ct: u64,
    pub n_cw: u64,
}

fn pct(num: u64, den: u64) -> f64 {
    // vacuous: no pairs to recover counts as full recovery
    if den == 0 {
        100.0
    } else {
        100.0 * num as f64 / den as f64
    }
}

/// Tallies the upper triangle (diagonal excluded). A guaranteed pair that is
/// not consistent means a criterion is unsound and is a hard error, as is a
/// boundary-distance-guaranteed pair missing from the wormhole mask.
pub fn pair_statistics(
    consistent: &DMatrix<bool>,
    m_ct: &DMatrix<bool>,
    m_cw: &DMatrix<bool>,
) -> Result<ConsistencyReport> {
    let shape = consistent.shape();
    if m_ct.shape() != shape || m_cw.shape() != shape || shape.0 != shape.1 {
        return Err(Error::Dimension("consistency and mask shapes differ".into()));
    }
    let n = shape.0;
    let (mut n_pairs, mut n_consistent, mut n_ct, mut n_cw) = (0u64, 0u64, 0u64, 0u64);
    for j in 0..n {
        for i in 0..j {
            n_pairs += 1;
            let (c, t, w) = (consistent[(i, j)], m_ct[(i, j)], m_cw[(i, j)]);
            if (t || w) && !c {
                return Err(Error::Contract(format!(
                    "pair ({i}, {j}) is guaranteed by {} but not consistent",
                    if w { "the wormhole criterion" } else { "the boundary-distance criterion" }
                )));
            }
            if t && !w {
                return Err(Error::Contract(format!(
                    "pair ({i}, {j}) is guaranteed by the boundary-distance criterion only"
                )));
            }
            n_consistent += c as u64;
            n_ct += t as u64;
            n_cw += w as u64;
        }
    }
    Ok(ConsistencyReport {
        pct_consistent: pct(n_consistent, n_pairs),
        pct_guaranteed_ct: pct(n_ct, n_consistent),
        pct_guaranteed_cw: pct(n_cw, n_consistent),
        n_pairs,
        n_consistent,
        n_ct,
        n_cw,
    })
}

impl fmt::Display for ConsistencyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "pct_consistent = {}", self.pct_consistent)?;
        writeln!(f, "pct_guaranteed_ct = {}", self.pct_guaranteed_ct)?;
        writeln!(f, "pct_guaranteed_cw = {}", self.pct_guaranteed_cw)?;
        writeln!(f, "n_pairs = {}", self.n_pairs)?;
        writeln!(f, "n_consistent = {}", self.n_consistent)?;
        writeln!(f, "n_ct = {}", self.n_ct)?;
        writeln!(f, "n_cw = {}", self.n_cw)
    }
}

impl FromStr for ConsistencyReport {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut vals = std::collections::HashMap::new();
        for (ln, line) in s.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(ln + 1, "expected \"key = value\""))?;
            vals.insert(k.trim().to_string(), (ln + 1, v.trim().to_string()));
        }
        let float = |k: &str| -> Result<f64> {
            let (ln, v) = vals.get(k).ok_or_else(|| Error::parse(0, format!("missing key {k}")))?;
            v.parse().map_err(|_| Error::parse(*ln, format!("bad value for {k}")))
        };
        let int = |k: &str| -> Result<u64> {
            let (ln, v) = vals.get(k).ok_or_else(|| Error::parse(0, format!("missing key {k}")))?;
            v.parse().map_err(|_| Error::parse(*ln, format!("bad value for {k}")))
        };
        Ok(Self {
            pct_consistent: float("pct_consistent")?,
            pct_guaranteed_ct: float("pct_guaranteed_ct")?,
            pct_guaranteed_cw: float("pct_guaranteed_cw")?,
            n_pairs: int("n_pairs")?,
            n_consistent: int("n_consistent")?,
            n_ct: int("n_ct")?,
            n_cw: int("n_cw")?,
        })
    }
}

/// Everything computed for one full/partial pair of surfaces.
#[derive(Debug, Clone)]
pub struct PartialAnalysis<T: Real> {
    pub partial: SurfaceGraph<T>,
    pub boundary: BoundarySet,
    pub d_full_restricted: DistanceMatrix<T>,
    pub d_partial: DistanceMatrix<T>,
    pub consistent: DMatrix<bool>,
    pub m_ct: DMatrix<bool>,
    pub m_cw: DMatrix<bool>,
    pub report: ConsistencyReport,
}

/// Full pipeline: induce, measure both surfaces, build both masks, tally.
pub fn analyze_partial<T: Real>(
    full: &SurfaceGraph<T>,
    d_full: &DistanceMatrix<T>,
    sel: &PartialSelection,
    scale: crate::criterion::MetricScale<T>,
    algo: crate::criterion::ThresholdAlgo,
    tol: T,
) -> Result<PartialAnalysis<T>> {
    let (partial, boundary) = induce_partial(full, sel)?;
    let d_partial = crate::geodesics::distance_matrix(&partial)?;
    let d_full_restricted = d_full.restrict(sel.kept());
    let consistent = consistent_pairs(&d_full_restricted, &d_partial, tol)?;
    let m_ct = crate::criterion::ct_masks(&d_partial, &boundary)?.binary;
    let m_cw = crate::criterion::wormhole_masks(&partial, &d_partial, &boundary, scale, algo)?.binary;
    let report = pair_statistics(&consistent, &m_ct, &m_cw)?;
    Ok(PartialAnalysis {
        partial,
        boundary,
        d_full_restricted,
        d_partial,
        consistent,
        m_ct,
        m_cw,
        report,
    })
}
