//! Proper edge coloring of bipartite graphs with max-degree colors.

use serde::{Deserialize, Serialize};

use crate::codes::TannerGraph;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeColoring {
    pub graph: TannerGraph,
    /// Color of `graph.edges[e]`.
    pub color_of: Vec<usize>,
    pub n_colors: usize,
}

impl EdgeColoring {
    /// No two edges of one color share an endpoint.
    pub fn is_proper(&self) -> bool {
        let g = &self.graph;
        let mut seen_c = vec![vec![false; self.n_colors]; g.n_checks];
        let mut seen_b = vec![vec![false; self.n_colors]; g.n_bits];
        for (&(c, b), &col) in g.edges.iter().zip(&self.color_of) {
            if col >= self.n_colors || seen_c[c][col] || seen_b[b][col] {
                return false;
            }
            seen_c[c][col] = true;
            seen_b[b][col] = true;
        }
        true
    }

    /// Edges `(check, bit)` of the given color.
    pub fn edges_of(&self, color: usize) -> Vec<(usize, usize)> {
        self.graph
            .edges
            .iter()
            .zip(&self.color_of)
            .filter(|(_, &c)| c == color)
            .map(|(&e, _)| e)
            .collect()
    }
}

/// König edge coloring by alternating-path recoloring.
pub fn bipartite_edge_coloring(g: &TannerGraph) -> EdgeColoring {
    const NONE: usize = usize::MAX;
    let delta = g.max_degree();
    let nc = g.n_checks;
    let nv = nc + g.n_bits;
    let ends = |e: usize| (g.edges[e].0, nc + g.edges[e].1);
    let mut at = vec![vec![NONE; delta]; nv];
    let mut color = vec![NONE; g.edges.len()];
    for e in 0..g.edges.len() {
        let (u, v) = ends(e);
        let a = (0..delta).find(|&c| at[u][c] == NONE).expect("free color at check");
        if at[v][a] != NONE {
            let b = (0..delta).find(|&c| at[v][c] == NONE).expect("free color at bit");
            // Walk the a/b path from v and swap its colors; in a bipartite
            // graph it cannot end at u.
            let mut path = Vec::new();
            let (mut x, mut col) = (v, a);
            while at[x][col] != NONE {
                let f = at[x][col];
                path.push(f);
                let (p, q) = ends(f);
                x = if p == x { q } else { p };
                col = if col == a { b } else { a };
            }
            for &f in &path {
                let (p, q) = ends(f);
                at[p][color[f]] = NONE;
                at[q][color[f]] = NONE;
            }
            for &f in &path {
                let (p, q) = ends(f);
                color[f] = if color[f] == a { b } else { a };
                at[p][color[f]] = f;
                at[q][color[f]] = f;
            }
        }
        color[e] = a;
        at[u][a] = e;
        at[v][a] = e;
    }
    EdgeColoring { graph: g.clone(), color_of: color, n_colors: delta }
}
