//! Labeled oriented graphs without tadpoles, the cycle relations, and
//! reduction of formal combinations to the span of disjoint unions of lines.
//!
//! Two facts drive the implementation: a graph containing a directed cycle
//! is equivalent to zero, and reversing a single edge changes the sign of
//! the class. Hence every class is represented by forests in a canonical
//! orientation, and the remaining relations among forests are handled by
//! exact linear algebra over a cached relation basis.

use crate::error::{Error, Result};
use crate::linalg::QMat;
use crate::scalar::Q;
use num_traits::Zero;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Mutex;

/// Oriented graph on vertices `1..=n` (stored 0-based), no tadpoles, at
/// most one edge per ordered pair.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OrientedGraph {
    pub n: usize,
    pub edges: Vec<(u8, u8)>,
}

impl OrientedGraph {
    pub fn new(n: usize, mut edges: Vec<(u8, u8)>) -> Result<OrientedGraph> {
        edges.sort_unstable();
        edges.dedup();
        for &(a, b) in &edges {
            if a == b {
                return Err(Error::Parameter("tadpoles are not allowed".into()));
            }
            if a as usize >= n || b as usize >= n {
                return Err(Error::Parameter("edge endpoint out of range".into()));
            }
        }
        Ok(OrientedGraph { n, edges })
    }

    pub fn empty(n: usize) -> OrientedGraph {
        OrientedGraph { n, edges: vec![] }
    }

    /// Does the edge set contain a directed cycle?
    pub fn has_directed_cycle(&self) -> bool {
        // Kahn peeling
        let mut indeg = vec![0usize; self.n];
        for &(_, b) in &self.edges {
            indeg[b as usize] += 1;
        }
        let mut queue: Vec<usize> = (0..self.n).filter(|&v| indeg[v] == 0).collect();
        let mut seen = 0;
        while let Some(v) = queue.pop() {
            seen += 1;
            for &(a, b) in &self.edges {
                if a as usize == v {
                    indeg[b as usize] -= 1;
                    if indeg[b as usize] == 0 {
                        queue.push(b as usize);
                    }
                }
            }
        }
        seen < self.n
    }

    /// Is the underlying undirected graph a forest (given no directed
    /// 2-cycles, i.e. no repeated undirected pairs)?
    fn is_underlying_forest(&self) -> bool {
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(p: &mut Vec<usize>, x: usize) -> usize {
            if p[x] != x {
                let r = find(p, p[x]);
                p[x] = r;
            }
            p[x]
        }
        for &(a, b) in &self.edges {
            let ra = find(&mut parent, a as usize);
            let rb = find(&mut parent, b as usize);
            if ra == rb {
                return false;
            }
            parent[ra] = rb;
        }
        true
    }

    /// Is this a disjoint union of lines (in-degree and out-degree at most
    /// one, no cycles)?
    pub fn is_line_union(&self) -> bool {
        let mut indeg = vec![0usize; self.n];
        let mut outdeg = vec![0usize; self.n];
        for &(a, b) in &self.edges {
            outdeg[a as usize] += 1;
            indeg[b as usize] += 1;
        }
        indeg.iter().all(|&d| d <= 1)
            && outdeg.iter().all(|&d| d <= 1)
            && !self.has_directed_cycle()
    }

    /// Relabel vertices: vertex `v` becomes `sigma[v]`.
    pub fn relabel(&self, sigma: &[usize]) -> OrientedGraph {
        let mut edges: Vec<(u8, u8)> = self
            .edges
            .iter()
            .map(|&(a, b)| (sigma[a as usize] as u8, sigma[b as usize] as u8))
            .collect();
        edges.sort_unstable();
        OrientedGraph {
            n: self.n,
            edges,
        }
    }
}

impl fmt::Display for OrientedGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.edges.is_empty() {
            return write!(f, "[{} vertices]", self.n);
        }
        let parts: Vec<String> = self
            .edges
            .iter()
            .map(|&(a, b)| format!("{}->{}", a + 1, b + 1))
            .collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// Apply a permutation to a graph: the vertex labeled `v` is relabeled
/// `sigma(v)`. Functorial for composition.
pub fn sigma_act(sigma: &[usize], g: &OrientedGraph) -> Result<OrientedGraph> {
    if sigma.len() != g.n {
        return Err(Error::Parameter("permutation length mismatch".into()));
    }
    let mut seen = vec![false; g.n];
    for &s in sigma {
        if s >= g.n || seen[s] {
            return Err(Error::Parameter("not a permutation".into()));
        }
        seen[s] = true;
    }
    Ok(g.relabel(sigma))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphKind {
    All,
    Acyclic,
    Lines,
}

/// Duplicate-free enumeration. `All` ranges over simple edge sets (at most
/// one edge per ordered pair); `Acyclic` excludes directed cycles;
/// `Lines` produces the disjoint unions of lines.
pub fn enumerate(n: usize, kind: GraphKind) -> Result<Vec<OrientedGraph>> {
    if n == 0 || n > 6 {
        return Err(Error::Limit(format!("graph enumeration supports 1..=6 vertices, got {n}")));
    }
    let pairs: Vec<(u8, u8)> = (0..n as u8)
        .flat_map(|a| (0..n as u8).map(move |b| (a, b)))
        .filter(|&(a, b)| a != b)
        .collect();
    match kind {
        GraphKind::All | GraphKind::Acyclic => {
            if kind == GraphKind::All && n > 4 {
                return Err(Error::Limit(
                    "full enumeration is limited to 4 vertices".into(),
                ));
            }
            if kind == GraphKind::Acyclic && n > 5 {
                return Err(Error::Limit(
                    "acyclic enumeration is limited to 5 vertices".into(),
                ));
            }
            let m = pairs.len();
            let mut out = Vec::new();
            for mask in 0u64..(1 << m) {
                let edges: Vec<(u8, u8)> = (0..m)
                    .filter(|i| mask & (1 << i) != 0)
                    .map(|i| pairs[i])
                    .collect();
                let g = OrientedGraph::new(n, edges)?;
                if kind == GraphKind::Acyclic && g.has_directed_cycle() {
                    continue;
                }
                out.push(g);
            }
            out.sort();
            Ok(out)
        }
        GraphKind::Lines => {
            // partition 1..n into sequences: each line is an ordered list of
            // distinct vertices; enumerate by recursion on the smallest
            // unused vertex.
            let mut out = BTreeSet::new();
            let mut edges = Vec::new();
            enumerate_lines(n, &mut vec![false; n], &mut edges, &mut out);
            Ok(out.into_iter().collect())
        }
    }
}

fn enumerate_lines(
    n: usize,
    used: &mut Vec<bool>,
    edges: &mut Vec<(u8, u8)>,
    out: &mut BTreeSet<OrientedGraph>,
) {
    // the smallest unused vertex lies on some line, at any position: grow
    // the tail first, then the head, so each sequence is built exactly once
    let start = match used.iter().position(|&u| !u) {
        None => {
            out.insert(OrientedGraph::new(n, edges.clone()).unwrap());
            return;
        }
        Some(s) => s,
    };
    used[start] = true;
    grow_tail(n, start, start, used, edges, out);
    used[start] = false;
}

fn grow_tail(
    n: usize,
    head: usize,
    tail: usize,
    used: &mut Vec<bool>,
    edges: &mut Vec<(u8, u8)>,
    out: &mut BTreeSet<OrientedGraph>,
) {
    grow_head(n, head, used, edges, out);
    for v in 0..n {
        if used[v] {
            continue;
        }
        used[v] = true;
        edges.push((tail as u8, v as u8));
        grow_tail(n, head, v, used, edges, out);
        edges.pop();
        used[v] = false;
    }
}

fn grow_head(
    n: usize,
    head: usize,
    used: &mut Vec<bool>,
    edges: &mut Vec<(u8, u8)>,
    out: &mut BTreeSet<OrientedGraph>,
) {
    // close the line and move to the next component
    enumerate_lines(n, used, edges, out);
    for v in 0..n {
        if used[v] {
            continue;
        }
        used[v] = true;
        edges.push((v as u8, head as u8));
        grow_head(n, v, used, edges, out);
        edges.pop();
        used[v] = false;
    }
}

/// A formal rational combination of oriented graphs, reduced to the span of
/// line unions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphClass {
    pub n: usize,
    pub terms: BTreeMap<OrientedGraph, Q>,
}

impl GraphClass {
    pub fn zero(n: usize) -> GraphClass {
        GraphClass {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, g: OrientedGraph, c: Q) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(g).or_insert_with(Q::zero);
        *e += c;
        if e.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }
}

/// Canonical orientation of a forest: path components are oriented from
/// their smaller endpoint, branched components edge-by-edge ascending.
/// Returns the sign picked up by the reversals, or `None` when the graph
/// dies (directed cycle or undirected cycle).
fn canonicalize(g: &OrientedGraph) -> Option<(OrientedGraph, i32)> {
    if g.has_directed_cycle() {
        return None;
    }
    if !g.is_underlying_forest() {
        return None;
    }
    let n = g.n;
    let mut adj: Vec<Vec<usize>> = vec![vec![]; n];
    for &(a, b) in &g.edges {
        adj[a as usize].push(b as usize);
        adj[b as usize].push(a as usize);
    }
    // component extraction
    let mut comp = vec![usize::MAX; n];
    let mut ncomp = 0;
    for v in 0..n {
        if comp[v] != usize::MAX {
            continue;
        }
        let mut stack = vec![v];
        while let Some(x) = stack.pop() {
            if comp[x] != usize::MAX {
                continue;
            }
            comp[x] = ncomp;
            for &y in &adj[x] {
                stack.push(y);
            }
        }
        ncomp += 1;
    }
    let mut wanted: BTreeSet<(u8, u8)> = BTreeSet::new();
    for c in 0..ncomp {
        let verts: Vec<usize> = (0..n).filter(|&v| comp[v] == c).collect();
        let is_path = verts.iter().all(|&v| adj[v].len() <= 2);
        if is_path && verts.len() >= 2 {
            // orient from the smaller endpoint along the path
            let endpoints: Vec<usize> = verts.iter().cloned().filter(|&v| adj[v].len() <= 1).collect();
            let start = *endpoints.iter().min().unwrap();
            let mut prev = usize::MAX;
            let mut cur = start;
            loop {
                let next = adj[cur].iter().cloned().find(|&x| x != prev);
                match next {
                    None => break,
                    Some(nx) => {
                        wanted.insert((cur as u8, nx as u8));
                        prev = cur;
                        cur = nx;
                    }
                }
            }
        } else {
            // branched tree: ascending orientation
            for &(a, b) in &g.edges {
                if comp[a as usize] == c {
                    let (x, y) = if a < b { (a, b) } else { (b, a) };
                    wanted.insert((x, y));
                }
            }
        }
    }
    // sign: edges of g whose orientation disagrees with the wanted set
    let mut sign = 1;
    let mut edges: Vec<(u8, u8)> = Vec::with_capacity(g.edges.len());
    for &(a, b) in &g.edges {
        if wanted.contains(&(a, b)) {
            edges.push((a, b));
        } else {
            debug_assert!(wanted.contains(&(b, a)));
            sign = -sign;
            edges.push((b, a));
        }
    }
    edges.sort_unstable();
    Some((OrientedGraph { n, edges }, sign))
}

/// Relation data for one vertex count: canonical forests indexed, and the
/// reduced relation rows used to rewrite branched forests into line unions.
struct RelationBasis {
    forests: Vec<OrientedGraph>,
    index: HashMap<OrientedGraph, usize>,
    /// rref rows over the forest coordinates, pivots on branched forests
    rows: Vec<Vec<Q>>,
    pivots: Vec<usize>,
}

static RELATION_CACHE: Mutex<BTreeMap<usize, &'static RelationBasis>> = Mutex::new(BTreeMap::new());

fn canonical_forests(n: usize) -> Vec<OrientedGraph> {
    // depth-first over undirected forests on n labeled vertices, stored in
    // canonical orientation
    let mut pairs = Vec::new();
    for a in 0..n as u8 {
        for b in (a + 1)..n as u8 {
            pairs.push((a, b));
        }
    }
    let mut out = BTreeSet::new();
    let m = pairs.len();
    'mask: for mask in 0u64..(1 << m) {
        let edges: Vec<(u8, u8)> = (0..m)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| pairs[i])
            .collect();
        let g = OrientedGraph { n, edges };
        if !g.is_underlying_forest() {
            continue 'mask;
        }
        let (canon, _) = canonicalize(&g).expect("forest canonicalizes");
        out.insert(canon);
    }
    out.into_iter().collect()
}

fn build_relation_basis(n: usize) -> RelationBasis {
    let forests = canonical_forests(n);
    let index: HashMap<OrientedGraph, usize> = forests
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, g)| (g, i))
        .collect();
    // column order for elimination: branched (non-line) forests first so
    // that pivots land on them and line unions survive as free columns
    let mut order: Vec<usize> = (0..forests.len()).collect();
    order.sort_by_key(|&i| (forests[i].is_line_union(), i));
    let pos_in_order: Vec<usize> = {
        let mut v = vec![0; forests.len()];
        for (k, &i) in order.iter().enumerate() {
            v[i] = k;
        }
        v
    };

    let mut rows: Vec<Vec<Q>> = Vec::new();
    let mut pivots: Vec<usize> = Vec::new();
    let insert_row = |mut row: Vec<Q>, rows: &mut Vec<Vec<Q>>, pivots: &mut Vec<usize>| {
        // reduce against existing rows
        for (r, &p) in pivots.iter().enumerate() {
            if !row[p].is_zero() {
                let f = row[p].clone();
                let other = rows[r].clone();
                for (x, y) in row.iter_mut().zip(other.iter()) {
                    *x -= f.clone() * y.clone();
                }
            }
        }
        if let Some(p) = row.iter().position(|x| !x.is_zero()) {
            let inv = Q::from_integer(1.into()) / row[p].clone();
            for x in row.iter_mut() {
                *x *= inv.clone();
            }
            // back-substitute into existing rows
            for (r, old) in rows.iter_mut().enumerate() {
                if !old[p].is_zero() {
                    let f = old[p].clone();
                    for (x, y) in old.iter_mut().zip(row.iter()) {
                        *x -= f.clone() * y.clone();
                    }
                }
                let _ = r;
            }
            rows.push(row);
            pivots.push(p);
        }
    };

    for f in &forests {
        // adding one edge (a,b), a != b, between two vertices creates an
        // undirected cycle exactly when they already share a component
        let mut comp: Vec<usize> = (0..n).collect();
        fn find(p: &mut Vec<usize>, x: usize) -> usize {
            if p[x] != x {
                let r = find(p, p[x]);
                p[x] = r;
            }
            p[x]
        }
        for &(a, b) in &f.edges {
            let (ra, rb) = (find(&mut comp, a as usize), find(&mut comp, b as usize));
            if ra != rb {
                comp[ra] = rb;
            }
        }
        for a in 0..n as u8 {
            for b in (a + 1)..n as u8 {
                if f.edges.iter().any(|&(x, y)| (x, y) == (a, b) || (x, y) == (b, a)) {
                    continue;
                }
                if find(&mut comp, a as usize) != find(&mut comp, b as usize) {
                    continue;
                }
                // the cycle: a -> b via the new edge, back along the tree path
                let path = tree_path(f, b as usize, a as usize);
                let mut cycle_edges: Vec<(u8, u8)> = vec![(a, b)];
                for w in path.windows(2) {
                    cycle_edges.push((w[0] as u8, w[1] as u8));
                }
                // non-cycle edges keep their canonical orientation; the
                // cycle edges are forced to the walk orientation
                let mut base: Vec<(u8, u8)> = Vec::new();
                'edge: for &(x, y) in &f.edges {
                    for &(cx, cy) in &cycle_edges {
                        if (x, y) == (cx, cy) || (x, y) == (cy, cx) {
                            continue 'edge;
                        }
                    }
                    base.push((x, y));
                }
                // relation: sum over cycle edges of the graph minus that edge
                let mut row = vec![Q::zero(); forests.len()];
                for drop in 0..cycle_edges.len() {
                    let mut edges = base.clone();
                    for (k, &e) in cycle_edges.iter().enumerate() {
                        if k != drop {
                            edges.push(e);
                        }
                    }
                    edges.sort_unstable();
                    let g = OrientedGraph { n, edges };
                    if let Some((canon, sign)) = canonicalize(&g) {
                        let idx = *index.get(&canon).expect("canonical forest in index");
                        let col = pos_in_order[idx];
                        row[col] += Q::from_integer(sign.into());
                    }
                }
                insert_row(row, &mut rows, &mut pivots);
            }
        }
    }

    // re-express rows/pivots back in forest indices
    let remap = |row: &Vec<Q>| -> Vec<Q> {
        let mut out = vec![Q::zero(); forests.len()];
        for (k, &i) in order.iter().enumerate() {
            out[i] = row[k].clone();
        }
        out
    };
    let rows_f: Vec<Vec<Q>> = rows.iter().map(remap).collect();
    let pivots_f: Vec<usize> = pivots.iter().map(|&p| order[p]).collect();
    RelationBasis {
        forests,
        index,
        rows: rows_f,
        pivots: pivots_f,
    }
}

fn tree_path(f: &OrientedGraph, from: usize, to: usize) -> Vec<usize> {
    // unique undirected path in a forest
    let n = f.n;
    let mut adj: Vec<Vec<usize>> = vec![vec![]; n];
    for &(a, b) in &f.edges {
        adj[a as usize].push(b as usize);
        adj[b as usize].push(a as usize);
    }
    let mut prev = vec![usize::MAX; n];
    let mut stack = vec![from];
    let mut seen = vec![false; n];
    seen[from] = true;
    while let Some(x) = stack.pop() {
        if x == to {
            break;
        }
        for &y in &adj[x] {
            if !seen[y] {
                seen[y] = true;
                prev[y] = x;
                stack.push(y);
            }
        }
    }
    let mut path = vec![to];
    let mut cur = to;
    while cur != from {
        cur = prev[cur];
        path.push(cur);
    }
    path.reverse();
    path
}

fn relation_basis(n: usize) -> &'static RelationBasis {
    let mut cache = RELATION_CACHE.lock().unwrap();
    if let Some(b) = cache.get(&n) {
        return b;
    }
    let b: &'static RelationBasis = Box::leak(Box::new(build_relation_basis(n)));
    cache.insert(n, b);
    b
}

/// Reduce a formal combination of oriented graphs modulo the cycle
/// relations, expressing it in the span of line unions.
pub fn reduce(n: usize, combination: &[(OrientedGraph, Q)]) -> Result<GraphClass> {
    if n == 0 || n > 6 {
        return Err(Error::Limit(format!(
            "graph reduction supports 1..=6 vertices, got {n}"
        )));
    }
    let basis = relation_basis(n);
    let mut coords = vec![Q::zero(); basis.forests.len()];
    for (g, c) in combination {
        if g.n != n {
            return Err(Error::Parameter("vertex count mismatch".into()));
        }
        match canonicalize(g) {
            None => {} // contains a cycle: dies
            Some((canon, sign)) => {
                let idx = *basis
                    .index
                    .get(&canon)
                    .expect("canonical forest is indexed");
                coords[idx] += if sign < 0 { -c.clone() } else { c.clone() };
            }
        }
    }
    // reduce modulo the relation rows
    for (r, &p) in basis.pivots.iter().enumerate() {
        if !coords[p].is_zero() {
            let f = coords[p].clone();
            for (x, y) in coords.iter_mut().zip(basis.rows[r].iter()) {
                *x -= f.clone() * y.clone();
            }
        }
    }
    let mut out = GraphClass::zero(n);
    for (i, c) in coords.into_iter().enumerate() {
        if !c.is_zero() {
            let g = basis.forests[i].clone();
            debug_assert!(g.is_line_union(), "reduction left a branched forest");
            out.add_term(g, c);
        }
    }
    Ok(out)
}

/// Dimension of the span of all graphs modulo the relations (the number of
/// free line-union coordinates after elimination).
pub fn quotient_dim(n: usize) -> Result<usize> {
    if n == 0 || n > 6 {
        return Err(Error::Limit("vertex count out of range".into()));
    }
    let basis = relation_basis(n);
    Ok(basis.forests.len() - basis.rows.len())
}

/// Brute-force oracle: the quotient dimension computed as the rank defect
/// of the full relation matrix over all simple graphs. Limited to 4
/// vertices.
pub fn quotient_dim_oracle(n: usize) -> Result<usize> {
    if n == 0 || n > 4 {
        return Err(Error::Limit("oracle supports 1..=4 vertices".into()));
    }
    let all = enumerate(n, GraphKind::All)?;
    let acyclic: Vec<&OrientedGraph> = all.iter().filter(|g| !g.has_directed_cycle()).collect();
    let index: HashMap<&OrientedGraph, usize> = acyclic
        .iter()
        .enumerate()
        .map(|(i, g)| (*g, i))
        .collect();
    let mut rows: Vec<Vec<Q>> = Vec::new();
    for g in &all {
        for cyc in simple_directed_cycles(g) {
            let mut row = vec![Q::zero(); acyclic.len()];
            for &e in &cyc {
                let mut edges = g.edges.clone();
                edges.retain(|&x| x != e);
                let sub = OrientedGraph { n, edges };
                if sub.has_directed_cycle() {
                    continue; // still cyclic: a relation of the first kind
                }
                row[index[&sub]] += Q::from_integer(1.into());
            }
            if row.iter().any(|x| !x.is_zero()) {
                rows.push(row);
            }
        }
    }
    if rows.is_empty() {
        return Ok(acyclic.len());
    }
    let m = QMat::from_rows(rows);
    Ok(acyclic.len() - m.rank())
}

fn simple_directed_cycles(g: &OrientedGraph) -> Vec<Vec<(u8, u8)>> {
    // enumerate simple directed cycles by walking from each minimal vertex
    let mut cycles = BTreeSet::new();
    fn walk(
        g: &OrientedGraph,
        start: u8,
        cur: u8,
        visited: &mut Vec<u8>,
        edges: &mut Vec<(u8, u8)>,
        cycles: &mut BTreeSet<Vec<(u8, u8)>>,
    ) {
        for &(a, b) in &g.edges {
            if a != cur {
                continue;
            }
            if b == start {
                let mut c = edges.clone();
                c.push((a, b));
                c.sort_unstable();
                cycles.insert(c);
                continue;
            }
            if b < start || visited.contains(&b) {
                continue;
            }
            visited.push(b);
            edges.push((a, b));
            walk(g, start, b, visited, edges, cycles);
            edges.pop();
            visited.pop();
        }
    }
    for s in 0..g.n as u8 {
        walk(g, s, s, &mut vec![s], &mut vec![], &mut cycles);
    }
    cycles.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::q;

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate(2, GraphKind::Acyclic).unwrap().len(), 3);
        assert_eq!(enumerate(1, GraphKind::Lines).unwrap().len(), 1);
        assert_eq!(enumerate(3, GraphKind::Lines).unwrap().len(), 13);
        // labeled DAG counts: 1, 3, 25, 543
        assert_eq!(enumerate(3, GraphKind::Acyclic).unwrap().len(), 25);
        assert_eq!(enumerate(4, GraphKind::Acyclic).unwrap().len(), 543);
        assert!(enumerate(7, GraphKind::Lines).is_err());
    }

    #[test]
    fn sigma_action() {
        let g = OrientedGraph::new(2, vec![(0, 1)]).unwrap();
        let t = sigma_act(&[1, 0], &g).unwrap();
        assert_eq!(t, OrientedGraph::new(2, vec![(1, 0)]).unwrap());
        let id = sigma_act(&[0, 1], &g).unwrap();
        assert_eq!(id, g);
        // 3-cycle on the line 1->2->3 gives the line 2->3->1
        let line = OrientedGraph::new(3, vec![(0, 1), (1, 2)]).unwrap();
        let s = sigma_act(&[1, 2, 0], &line).unwrap();
        assert_eq!(s, OrientedGraph::new(3, vec![(1, 2), (2, 0)]).unwrap());
        // functorial
        let a = [2, 0, 1];
        let b = [1, 2, 0];
        let ab: Vec<usize> = (0..3).map(|i| a[b[i]]).collect();
        assert_eq!(
            sigma_act(&ab, &line).unwrap(),
            sigma_act(&a, &sigma_act(&b, &line).unwrap()).unwrap()
        );
    }

    #[test]
    fn reduction_basics() {
        // 2->1 reduces to -(1->2)
        let g = OrientedGraph::new(2, vec![(1, 0)]).unwrap();
        let r = reduce(2, &[(g, q(1))]).unwrap();
        let e = OrientedGraph::new(2, vec![(0, 1)]).unwrap();
        assert_eq!(r.terms.len(), 1);
        assert_eq!(r.terms.get(&e), Some(&q(-1)));
        // 2-cycle dies
        let g = OrientedGraph::new(2, vec![(0, 1), (1, 0)]).unwrap();
        assert!(reduce(2, &[(g, q(1))]).unwrap().is_zero());
        // out-fork reduces into the line span
        let g = OrientedGraph::new(3, vec![(0, 1), (0, 2)]).unwrap();
        let r = reduce(3, &[(g, q(1))]).unwrap();
        assert!(!r.is_zero());
        for t in r.terms.keys() {
            assert!(t.is_line_union());
        }
    }

    #[test]
    fn reduce_is_idempotent_and_relation_invariant() {
        for n in 1..=4usize {
            let all = enumerate(n, GraphKind::All);
            let all = match all {
                Ok(a) => a,
                Err(_) => continue,
            };
            // relation invariance: subtracting a cycle relation leaves the
            // class unchanged
            for g in all.iter().take(80) {
                let cycles = simple_directed_cycles(g);
                for cyc in cycles {
                    let mut combo: Vec<(OrientedGraph, Q)> = Vec::new();
                    for &e in &cyc {
                        let mut edges = g.edges.clone();
                        edges.retain(|&x| x != e);
                        combo.push((OrientedGraph { n, edges }, q(1)));
                    }
                    let r = reduce(n, &combo).unwrap();
                    assert!(r.is_zero(), "cycle relation not killed: {combo:?}");
                }
            }
            // idempotence: reducing a reduced class is the identity
            for g in all.iter().take(40) {
                let r = reduce(n, &[(g.clone(), q(1))]).unwrap();
                let terms: Vec<(OrientedGraph, Q)> =
                    r.terms.iter().map(|(g, c)| (g.clone(), c.clone())).collect();
                let r2 = reduce(n, &terms).unwrap();
                assert_eq!(r, r2);
            }
        }
    }

    #[test]
    fn quotient_dims_match_oracle() {
        for n in 1..=4usize {
            assert_eq!(
                quotient_dim(n).unwrap(),
                quotient_dim_oracle(n).unwrap(),
                "dimension mismatch at n = {n}"
            );
        }
        // the quotient dimension is n!
        let mut fact = 1;
        for n in 1..=5usize {
            fact *= n;
            assert_eq!(quotient_dim(n).unwrap(), fact);
        }
    }

    #[test]
    fn action_commutes_with_reduce() {
        let sigma = [2usize, 0, 1];
        for g in enumerate(3, GraphKind::All).unwrap().iter().take(64) {
            let r_then_act: Vec<(OrientedGraph, Q)> = reduce(3, &[(g.clone(), q(1))])
                .unwrap()
                .terms
                .iter()
                .map(|(h, c)| (sigma_act(&sigma, h).unwrap(), c.clone()))
                .collect();
            let lhs = reduce(3, &r_then_act).unwrap();
            let rhs = reduce(3, &[(sigma_act(&sigma, g).unwrap(), q(1))]).unwrap();
            assert_eq!(lhs, rhs);
        }
    }
}
