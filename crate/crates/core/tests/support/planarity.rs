//! Planarity certificate for stacked triangulations.
//!
//! A graph built from K4 by repeatedly placing a vertex inside a triangular
//! face and joining it to the face's corners is planar by construction. The
//! check peels off degree-3 vertices whose neighbours form a triangle until
//! K4 remains, then replays the peeling backwards on an explicit face list:
//! every replayed vertex must land in a face that still exists. Success
//! proves planarity; failure means the graph is not such a triangulation.

use std::collections::BTreeSet;

pub fn is_stacked_triangulation(n: usize, edges: &[(usize, usize)]) -> bool {
    if n < 4 {
        return false;
    }
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for &(a, b) in edges {
        if a == b || a >= n || b >= n || !adj[a].insert(b) {
            return false;
        }
        adj[b].insert(a);
    }
    if edges.len() != 3 * (n - 2) {
        return false;
    }

    let mut alive: BTreeSet<usize> = (0..n).collect();
    let mut peeled: Vec<(usize, [usize; 3])> = Vec::new();
    while alive.len() > 4 {
        let found = alive.iter().copied().find(|&v| {
            if adj[v].len() != 3 {
                return false;
            }
            let nb: Vec<usize> = adj[v].iter().copied().collect();
            adj[nb[0]].contains(&nb[1]) && adj[nb[0]].contains(&nb[2]) && adj[nb[1]].contains(&nb[2])
        });
        let Some(v) = found else { return false };
        let nb: Vec<usize> = adj[v].iter().copied().collect();
        for &u in &nb {
            adj[u].remove(&v);
        }
        adj[v].clear();
        alive.remove(&v);
        peeled.push((v, [nb[0], nb[1], nb[2]]));
    }
    let core: Vec<usize> = alive.iter().copied().collect();
    if core.iter().any(|&v| adj[v].len() != 3) {
        return false;
    }

    let key = |mut f: [usize; 3]| {
        f.sort_unstable();
        f
    };
    let [a, b, c, d] = [core[0], core[1], core[2], core[3]];
    let mut faces: BTreeSet<[usize; 3]> = [[a, b, c], [a, b, d], [a, c, d], [b, c, d]]
        .into_iter()
        .map(key)
        .collect();
    for (v, [x, y, z]) in peeled.into_iter().rev() {
        if !faces.remove(&key([x, y, z])) {
            return false;
        }
        faces.insert(key([x, y, v]));
        faces.insert(key([x, z, v]));
        faces.insert(key([y, z, v]));
    }
    faces.len() == 2 * n - 4
}
