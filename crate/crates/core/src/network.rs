//! Spillover network estimation from indicator time series.
//!
//! The undirected skeleton is a triangulated maximally filtered graph (TMFG)
//! over absolute Pearson correlations. Each skeleton edge is then oriented
//! with the pairwise likelihood-ratio measure
//! `R = rho * (E[x tanh(y)] - E[tanh(x) y])` on standardized series:
//! `x -> y` when `R > 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Matrix;

/// Complete (imputed) time series of one country, rows = years.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorPanel {
    labels: Vec<String>,
    years: Vec<i32>,
    rows: Vec<Vec<f64>>,
}

impl IndicatorPanel {
    pub const MIN_ROWS: usize = 3;

    pub fn new(labels: Vec<String>, years: Vec<i32>, rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.len() < Self::MIN_ROWS {
            return Err(Error::TooFew {
                required: Self::MIN_ROWS,
                got: rows.len(),
            });
        }
        if years.len() != rows.len() {
            return Err(Error::DimensionMismatch {
                what: "years",
                got: years.len(),
                expected: rows.len(),
            });
        }
        if years.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidPanel("years must be strictly increasing".into()));
        }
        for row in &rows {
            if row.len() != labels.len() {
                return Err(Error::DimensionMismatch {
                    what: "panel row",
                    got: row.len(),
                    expected: labels.len(),
                });
            }
            if row.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidPanel("panel contains missing or non-finite values".into()));
            }
        }
        for (j, label) in labels.iter().enumerate() {
            let first = rows[0][j];
            if rows.iter().all(|r| r[j] == first) {
                return Err(Error::ZeroVariance(label.clone()));
            }
        }
        Ok(Self { labels, years, rows })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
    pub fn years(&self) -> &[i32] {
        &self.years
    }
    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }
    pub fn n_indicators(&self) -> usize {
        self.labels.len()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    pub fn first_row(&self) -> &[f64] {
        &self.rows[0]
    }

    pub fn last_row(&self) -> &[f64] {
        &self.rows[self.rows.len() - 1]
    }

    /// Mean level of every indicator over the sample years.
    pub fn column_means(&self) -> Vec<f64> {
        (0..self.n_indicators())
            .map(|j| self.rows.iter().map(|r| r[j]).sum::<f64>() / self.rows.len() as f64)
            .collect()
    }
}

/// Zero-mean, unit (population) variance copy of a series.
pub fn standardize(x: &[f64]) -> Vec<f64> {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let sd = var.sqrt();
    x.iter().map(|v| (v - mean) / sd).collect()
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0)
}

/// Pearson correlations between all indicator columns.
pub fn correlation_matrix(panel: &IndicatorPanel) -> Matrix {
    let n = panel.n_indicators();
    let cols: Vec<Vec<f64>> = (0..n).map(|j| panel.column(j)).collect();
    let mut m = Matrix::zeros(n);
    for i in 0..n {
        m.set(i, i, 1.0);
        for j in 0..i {
            let r = pearson(&cols[i], &cols[j]);
            m.set(i, j, r);
            m.set(j, i, r);
        }
    }
    m
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Insertion {
    pub vertex: usize,
    pub face: [usize; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tmfg {
    /// The four vertices of the starting clique, ascending.
    pub seed: [usize; 4],
    /// Vertex insertions in the order they were made.
    pub insertions: Vec<Insertion>,
    /// Undirected edges `(i, j)` with `i < j`, sorted.
    pub edges: Vec<(usize, usize)>,
}

fn best_seed_clique(s: &Matrix) -> [usize; 4] {
    let n = s.n();
    let mut best = [0, 1, 2, 3];
    let mut best_score = f64::NEG_INFINITY;
    for a in 0..n {
        for b in a + 1..n {
            let ab = s.get(a, b);
            for c in b + 1..n {
                let abc = ab + s.get(a, c) + s.get(b, c);
                for d in c + 1..n {
                    let score = abc + s.get(a, d) + s.get(b, d) + s.get(c, d);
                    if score > best_score {
                        best_score = score;
                        best = [a, b, c, d];
                    }
                }
            }
        }
    }
    best
}

/// Builds the TMFG of a symmetric similarity matrix.
///
/// Starts from the 4-clique with the largest total similarity, then
/// repeatedly inserts the (vertex, triangular face) pair with the largest
/// gain, the sum of the vertex's similarities to the face's corners. The
/// face is replaced by the three faces it is split into. Ties go to the
/// lowest vertex, then the oldest face. The result has `3(N - 2)` edges.
pub fn tmfg(similarity: &Matrix) -> Result<Tmfg> {
    let n = similarity.n();
    if n < 4 {
        return Err(Error::TooFew { required: 4, got: n });
    }
    if !similarity.is_symmetric(1e-12) {
        return Err(Error::InvalidArgument("similarity matrix is not symmetric".into()));
    }

    let seed = best_seed_clique(similarity);
    let [a, b, c, d] = seed;
    let mut faces: Vec<[usize; 3]> = vec![[a, b, c], [a, b, d], [a, c, d], [b, c, d]];
    let mut edges: Vec<(usize, usize)> = vec![(a, b), (a, c), (a, d), (b, c), (b, d), (c, d)];
    let mut placed = vec![false; n];
    for v in seed {
        placed[v] = true;
    }
    let mut insertions = Vec::with_capacity(n - 4);

    for _ in 4..n {
        let mut best: Option<(f64, usize, usize)> = None;
        for v in (0..n).filter(|&v| !placed[v]) {
            let row = similarity.row(v);
            for (fi, f) in faces.iter().enumerate() {
                let gain = row[f[0]] + row[f[1]] + row[f[2]];
                if best.is_none_or(|(g, _, _)| gain > g) {
                    best = Some((gain, v, fi));
                }
            }
        }
        let (_, v, fi) = best.expect("an unplaced vertex and a face always exist");
        let [x, y, z] = faces[fi];
        faces[fi] = [x, y, v];
        faces.push([x, z, v]);
        faces.push([y, z, v]);
        for u in [x, y, z] {
            edges.push((u.min(v), u.max(v)));
        }
        placed[v] = true;
        insertions.push(Insertion {
            vertex: v,
            face: [x, y, z],
        });
    }

    edges.sort_unstable();
    Ok(Tmfg {
        seed,
        insertions,
        edges,
    })
}

/// Pairwise likelihood-ratio direction measure on standardized series.
/// Antisymmetric: `lr_measure(x, y) == -lr_measure(y, x)`.
pub fn lr_measure(x_std: &[f64], y_std: &[f64]) -> f64 {
    let n = x_std.len() as f64;
    let rho = x_std.iter().zip(y_std).map(|(a, b)| a * b).sum::<f64>() / n;
    let xy = x_std.iter().zip(y_std).map(|(a, b)| a * b.tanh()).sum::<f64>() / n;
    let yx = x_std.iter().zip(y_std).map(|(a, b)| a.tanh() * b).sum::<f64>() / n;
    rho * (xy - yx)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectedEdge {
    pub source: usize,
    pub target: usize,
    pub weight: f64,
    /// The direction measure was exactly zero; the edge runs from the
    /// lexicographically smaller label.
    #[serde(default)]
    pub tie: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OrientOptions {
    /// Keep the sign of the correlation as the edge weight instead of its
    /// absolute value.
    pub signed_weights: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectedSpilloverNetwork {
    pub labels: Vec<String>,
    pub edges: Vec<DirectedEdge>,
}

impl DirectedSpilloverNetwork {
    pub fn n(&self) -> usize {
        self.labels.len()
    }

    /// Dense matrix with `A[source][target] = weight`.
    pub fn adjacency(&self) -> Matrix {
        let mut m = Matrix::zeros(self.n());
        for e in &self.edges {
            m.set(e.source, e.target, e.weight);
        }
        m
    }

    pub fn from_adjacency(labels: Vec<String>, adj: &Matrix) -> Result<Self> {
        if adj.n() != labels.len() {
            return Err(Error::DimensionMismatch {
                what: "adjacency",
                got: adj.n(),
                expected: labels.len(),
            });
        }
        let mut edges = Vec::new();
        for i in 0..adj.n() {
            for j in 0..adj.n() {
                let w = adj.get(i, j);
                if w != 0.0 {
                    edges.push(DirectedEdge {
                        source: i,
                        target: j,
                        weight: w,
                        tie: false,
                    });
                }
            }
        }
        Ok(Self { labels, edges })
    }
}

/// Gives every skeleton edge exactly one direction.
pub fn orient_edges(
    panel: &IndicatorPanel,
    skeleton: &[(usize, usize)],
    opts: OrientOptions,
) -> Result<DirectedSpilloverNetwork> {
    let n = panel.n_indicators();
    if let Some(&(i, j)) = skeleton.iter().find(|(i, j)| *i >= n || *j >= n || i == j) {
        return Err(Error::InvalidArgument(format!(
            "skeleton edge ({i}, {j}) does not reference two distinct panel columns"
        )));
    }
    let std_cols: Vec<Vec<f64>> = (0..n).map(|j| standardize(&panel.column(j))).collect();
    let labels = panel.labels();
    let edges = skeleton
        .iter()
        .map(|&(x, y)| {
            let rho = pearson(&panel.column(x), &panel.column(y));
            let weight = if opts.signed_weights { rho } else { rho.abs() };
            let r = lr_measure(&std_cols[x], &std_cols[y]);
            let (source, target, tie) = if r > 0.0 {
                (x, y, false)
            } else if r < 0.0 {
                (y, x, false)
            } else if labels[x] <= labels[y] {
                (x, y, true)
            } else {
                (y, x, true)
            };
            DirectedEdge {
                source,
                target,
                weight,
                tie,
            }
        })
        .collect();
    Ok(DirectedSpilloverNetwork {
        labels: labels.to_vec(),
        edges,
    })
}

/// TMFG skeleton over absolute correlations, then likelihood-ratio
/// orientation.
pub fn estimate_network(
    panel: &IndicatorPanel,
    opts: OrientOptions,
) -> Result<DirectedSpilloverNetwork> {
    let corr = correlation_matrix(panel);
    let mut sim = corr.clone();
    for i in 0..sim.n() {
        for j in 0..sim.n() {
            sim.set(i, j, corr.get(i, j).abs());
        }
    }
    let skeleton = tmfg(&sim)?;
    orient_edges(panel, &skeleton.edges, opts)
}
