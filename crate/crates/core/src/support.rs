//! Support-graph helpers.

use petgraph::unionfind::UnionFind;

use crate::laplacian::{pairs, WeightVector};

/// Whether the edges with nonzero weight connect all `p` vertices.
pub fn is_connected(x: &WeightVector) -> bool {
    let p = x.p();
    let mut uf = UnionFind::<usize>::new(p);
    let mut components = p;
    for ((i, j), &w) in pairs(p).zip(x.as_slice()) {
        if w != 0.0 && uf.union(i, j) {
            components -= 1;
            if components == 1 {
                return true;
            }
        }
    }
    components == 1
}
