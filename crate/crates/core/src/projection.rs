//! The two faithful projections of the torus graph.
//!
//! Wrap-around edges are drawn as handles. Only their windings and crossing
//! parities enter the Kac-Ward matrices, so no embedding is computed.
//!
//! Handle groups, with `(L, M)` the last column and row:
//! - H: edges joining column `L` to column 1 (horizontal, and oblique off the corner),
//! - V: edges joining row `M` to row 1 (vertical, and oblique off the corner),
//! - C: the oblique corner handle `(L, M) - (1, 1)`.
//!
//! Every handle of V or C crosses every handle of H or C exactly once.
//! In G1 only C crosses itself and has winding -2. In G2 each H handle
//! crosses itself and has winding -2 while C is a plain handle. All other
//! handles wind once clockwise.

use crate::error::{Error, Result};
use crate::lattice::{DirectedEdge, EdgeClass, EighthPi, Site, TorusSpec, UndirectedEdge};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProjectionVariant {
    G1,
    G2,
}

impl ProjectionVariant {
    pub const BOTH: [ProjectionVariant; 2] = [ProjectionVariant::G1, ProjectionVariant::G2];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HandleKind {
    Horizontal,
    Vertical,
    Corner,
}

pub fn handle_kind(spec: &TorusSpec, u: UndirectedEdge) -> Option<HandleKind> {
    let right = u.base.x == spec.l() - 1;
    let top = u.base.y == spec.m() - 1;
    match u.class {
        EdgeClass::Horizontal if right => Some(HandleKind::Horizontal),
        EdgeClass::Vertical if top => Some(HandleKind::Vertical),
        EdgeClass::Oblique => match (right, top) {
            (true, true) => Some(HandleKind::Corner),
            (true, false) => Some(HandleKind::Horizontal),
            (false, true) => Some(HandleKind::Vertical),
            (false, false) => None,
        },
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FaithfulProjection {
    variant: ProjectionVariant,
    spec: TorusSpec,
    winding: Vec<i32>,
    crossing_pairs: Vec<(usize, usize)>,
    self_crossing: Vec<usize>,
}

impl FaithfulProjection {
    pub fn new(spec: TorusSpec, variant: ProjectionVariant) -> Self {
        let n = spec.undirected_edge_count();
        let kinds: Vec<Option<HandleKind>> = (0..n)
            .map(|i| handle_kind(&spec, spec.undirected_from_index(i)))
            .collect();
        let mut winding = vec![0; n];
        let mut self_crossing = Vec::new();
        for (i, k) in kinds.iter().enumerate() {
            let Some(k) = k else { continue };
            let crosses_itself = matches!(
                (variant, k),
                (ProjectionVariant::G1, HandleKind::Corner) | (ProjectionVariant::G2, HandleKind::Horizontal)
            );
            winding[i] = if crosses_itself { -2 } else { -1 };
            if crosses_itself {
                self_crossing.push(i);
            }
        }
        let in_top = |i: usize| matches!(kinds[i], Some(HandleKind::Vertical | HandleKind::Corner));
        let in_right = |i: usize| matches!(kinds[i], Some(HandleKind::Horizontal | HandleKind::Corner));
        let mut crossing_pairs = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if (in_top(a) && in_right(b)) || (in_right(a) && in_top(b)) {
                    crossing_pairs.push((a, b));
                }
            }
        }
        Self {
            variant,
            spec,
            winding,
            crossing_pairs,
            self_crossing,
        }
    }

    pub fn variant(&self) -> ProjectionVariant {
        self.variant
    }

    pub fn spec(&self) -> &TorusSpec {
        &self.spec
    }

    /// Winding number of the undirected edge with the given index.
    pub fn winding(&self, undirected: usize) -> i32 {
        self.winding[undirected]
    }

    pub fn crossing_pairs(&self) -> &[(usize, usize)] {
        &self.crossing_pairs
    }

    pub fn self_crossing(&self) -> &[usize] {
        &self.self_crossing
    }

    /// Total turning of the drawn curve of `e`, beyond the straight-edge table.
    ///
    /// Traversing a handle backwards flips the sign of its turning.
    pub fn integrated_angle(&self, e: DirectedEdge) -> EighthPi {
        let w = self.winding[self.spec.undirected_index(self.spec.undirected(e))];
        let a = EighthPi(16 * w);
        if e.dir.is_forward() {
            a
        } else {
            -a
        }
    }

    pub fn crossing_count(&self, g: &EvenSubgraph) -> usize {
        let pairs = self
            .crossing_pairs
            .iter()
            .filter(|&&(a, b)| g.contains(a) && g.contains(b))
            .count();
        pairs + self.self_crossing.iter().filter(|&&a| g.contains(a)).count()
    }

    /// Per-edge masks for fast crossing parity on graphs with at most 64 edges.
    pub(crate) fn crossing_masks(&self) -> Option<CrossingMasks> {
        let n = self.spec.undirected_edge_count();
        if n > 64 {
            return None;
        }
        let mut partners = vec![0u64; n];
        for &(a, b) in &self.crossing_pairs {
            partners[a] |= 1 << b;
            partners[b] |= 1 << a;
        }
        let handles: Vec<(usize, u64)> = partners
            .iter()
            .enumerate()
            .filter(|(_, &m)| m != 0)
            .map(|(i, &m)| (i, m))
            .collect();
        let self_mask = self.self_crossing.iter().fold(0u64, |m, &a| m | 1 << a);
        Some(CrossingMasks { handles, self_mask })
    }
}

pub(crate) struct CrossingMasks {
    handles: Vec<(usize, u64)>,
    self_mask: u64,
}

impl CrossingMasks {
    pub(crate) fn count(&self, g: u64) -> u32 {
        let mut twice = 0;
        for &(i, m) in &self.handles {
            if g >> i & 1 == 1 {
                twice += (m & g).count_ones();
            }
        }
        twice / 2 + (self.self_mask & g).count_ones()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct HandleStats {
    pub n_h: usize,
    pub n_v: usize,
    pub n_hv: usize,
}

/// Handle counts of an edge set. The corner handle counts towards `n_h`
/// and sets `n_hv`; it is not counted in `n_v`.
pub fn handle_stats(spec: &TorusSpec, g: &EvenSubgraph) -> HandleStats {
    let mut s = HandleStats::default();
    for i in g.edges() {
        match handle_kind(spec, spec.undirected_from_index(i)) {
            Some(HandleKind::Horizontal) => s.n_h += 1,
            Some(HandleKind::Vertical) => s.n_v += 1,
            Some(HandleKind::Corner) => {
                s.n_h += 1;
                s.n_hv = 1;
            }
            None => {}
        }
    }
    s
}

/// Set of undirected edges, by index, in which every site has even degree.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EvenSubgraph {
    words: Vec<u64>,
}

impl EvenSubgraph {
    pub fn empty(spec: &TorusSpec) -> Self {
        Self {
            words: vec![0; spec.undirected_edge_count().div_ceil(64)],
        }
    }

    pub fn from_edges(spec: &TorusSpec, edges: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut g = Self::empty(spec);
        for e in edges {
            if e >= spec.undirected_edge_count() {
                return Err(Error::Precondition(format!("edge index {e} out of range")));
            }
            g.toggle(e);
        }
        if !g.is_even(spec) {
            return Err(Error::Precondition("edge set has odd-degree vertices".into()));
        }
        Ok(g)
    }

    #[cfg(test)]
    pub(crate) fn from_bits(spec: &TorusSpec, bits: u64) -> Self {
        let mut g = Self::empty(spec);
        g.words[0] = bits;
        g
    }

    pub fn contains(&self, e: usize) -> bool {
        self.words[e / 64] >> (e % 64) & 1 == 1
    }

    pub fn toggle(&mut self, e: usize) {
        self.words[e / 64] ^= 1 << (e % 64);
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn edges(&self) -> impl Iterator<Item = usize> + '_ {
        self.words
            .iter()
            .enumerate()
            .flat_map(|(w, &bits)| (0..64).filter(move |b| bits >> b & 1 == 1).map(move |b| 64 * w + b))
    }

    pub fn is_even(&self, spec: &TorusSpec) -> bool {
        let mut deg = vec![0u8; spec.sites()];
        for e in self.edges() {
            let (a, b) = spec.endpoints(spec.undirected_from_index(e));
            deg[spec.site_index(a)] ^= 1;
            deg[spec.site_index(b)] ^= 1;
        }
        deg.iter().all(|&d| d == 0)
    }

    /// The horizontal cycle along row `y` (zero-based).
    pub fn horizontal_ring(spec: &TorusSpec, y: usize) -> Self {
        Self::walk(spec, Site::new(0, y), crate::lattice::Direction::E)
    }

    /// The vertical cycle along column `x` (zero-based).
    pub fn vertical_ring(spec: &TorusSpec, x: usize) -> Self {
        Self::walk(spec, Site::new(x, 0), crate::lattice::Direction::N)
    }

    /// The closed NE walk through `start`.
    pub fn oblique_ring(spec: &TorusSpec, start: Site) -> Self {
        Self::walk(spec, start, crate::lattice::Direction::NE)
    }

    fn walk(spec: &TorusSpec, start: Site, d: crate::lattice::Direction) -> Self {
        let mut g = Self::empty(spec);
        let mut s = start;
        loop {
            g.toggle(spec.undirected_index(spec.undirected(DirectedEdge::new(s, d))));
            s = spec.step(s, d);
            if s == start {
                break;
            }
        }
        g
    }
}

/// Fundamental cycles of a BFS spanning tree, as 64-bit edge masks.
///
/// Their span over GF(2) is exactly the set of even subgraphs; the
/// dimension is `3LM - (LM - 1) = 2LM + 1`.
pub fn cycle_basis(spec: &TorusSpec) -> Result<Vec<u64>> {
    let n_edges = spec.undirected_edge_count();
    if n_edges > 64 {
        return Err(Error::SizeExceeded {
            what: "edge bitset",
            size: n_edges,
            bound: 64,
        });
    }
    let n = spec.sites();
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for e in 0..n_edges {
        let (a, b) = spec.endpoints(spec.undirected_from_index(e));
        let (a, b) = (spec.site_index(a), spec.site_index(b));
        adj[a].push((b, e));
        adj[b].push((a, e));
    }
    // path[v] = tree edges from the root to v
    let mut path: Vec<Option<u64>> = vec![None; n];
    let mut tree = 0u64;
    path[0] = Some(0);
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(v) = queue.pop_front() {
        for &(w, e) in &adj[v] {
            if path[w].is_none() {
                path[w] = Some(path[v].unwrap() | 1 << e);
                tree |= 1 << e;
                queue.push_back(w);
            }
        }
    }
    let mut basis = Vec::new();
    for e in 0..n_edges {
        if tree >> e & 1 == 1 {
            continue;
        }
        let (a, b) = spec.endpoints(spec.undirected_from_index(e));
        let pa = path[spec.site_index(a)].unwrap();
        let pb = path[spec.site_index(b)].unwrap();
        basis.push(pa ^ pb ^ (1 << e));
    }
    Ok(basis)
}
