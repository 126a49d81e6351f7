//! Ward agglomerative clustering with Euclidean distance.

use crate::error::{Error, Result};

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Clusters the rows of `features` into `k` groups with Ward linkage.
///
/// Returns one label per row. Labels are numbered by first appearance, so
/// row 0 is always in cluster 0. Merge ties go to the pair with the lowest
/// cluster slots.
pub fn ward_clusters(features: &[Vec<f64>], k: usize) -> Result<Vec<usize>> {
    let n = features.len();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "cannot cut {n} observations into {k} clusters"
        )));
    }
    let dim = features[0].len();
    if let Some(r) = features.iter().find(|r| r.len() != dim) {
        return Err(Error::DimensionMismatch {
            what: "feature row",
            got: r.len(),
            expected: dim,
        });
    }

    // Lance-Williams on squared distances.
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..i {
            let v = sq_dist(&features[i], &features[j]);
            d[i][j] = v;
            d[j][i] = v;
        }
    }
    let mut size = vec![1usize; n];
    let mut active = vec![true; n];
    let mut owner: Vec<usize> = (0..n).collect();

    for _ in 0..n - k {
        let mut best: Option<(f64, usize, usize)> = None;
        for i in (0..n).filter(|&i| active[i]) {
            for j in (i + 1..n).filter(|&j| active[j]) {
                if best.is_none_or(|(b, _, _)| d[i][j] < b) {
                    best = Some((d[i][j], i, j));
                }
            }
        }
        let (dij, i, j) = best.expect("at least two active clusters");
        let (ni, nj) = (size[i] as f64, size[j] as f64);
        for m in (0..n).filter(|&m| active[m] && m != i && m != j) {
            let nm = size[m] as f64;
            let v = ((ni + nm) * d[i][m] + (nj + nm) * d[j][m] - nm * dij) / (ni + nj + nm);
            d[i][m] = v;
            d[m][i] = v;
        }
        active[j] = false;
        size[i] += size[j];
        for o in owner.iter_mut().filter(|o| **o == j) {
            *o = i;
        }
    }

    let mut labels = vec![usize::MAX; n];
    let mut next = 0;
    let mut slot_label = vec![usize::MAX; n];
    for (p, &slot) in owner.iter().enumerate() {
        if slot_label[slot] == usize::MAX {
            slot_label[slot] = next;
            next += 1;
        }
        labels[p] = slot_label[slot];
    }
    Ok(labels)
}
