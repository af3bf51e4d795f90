//! Graphs, 1-factorizations, 2-factorizations, and weighted ("k-null")
//! 1-factorizations of K_{n,n}, K_{4r}, K_{6k+4} and K_{4k+2}: factorizations
//! whose edge weights are nonzero, bounded by k-1, and sum to zero at every
//! vertex and on every factor.

use std::collections::HashMap;
use std::error::Error;
use std::fmt;

use crate::design::{Budget, SearchOutcome};
use crate::latin::orthogonal_idempotent_pair;

/// Simple undirected graph with labeled vertices 0..n.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    index: HashMap<(usize, usize), usize>,
}

impl Graph {
    pub fn new(n: usize, mut edges: Vec<(usize, usize)>) -> Graph {
        for e in edges.iter_mut() {
            assert!(e.0 != e.1, "loops are not allowed");
            assert!(e.0 < n && e.1 < n, "vertex out of range");
            if e.0 > e.1 {
                *e = (e.1, e.0);
            }
        }
        edges.sort_unstable();
        let before = edges.len();
        edges.dedup();
        assert_eq!(before, edges.len(), "multi-edges are not allowed");
        let index = edges
            .iter()
            .enumerate()
            .map(|(i, &e)| (e, i))
            .collect();
        Graph { n, edges, index }
    }

    pub fn complete(n: usize) -> Graph {
        let mut edges = Vec::with_capacity(n * (n - 1) / 2);
        for u in 0..n {
            for v in u + 1..n {
                edges.push((u, v));
            }
        }
        Graph::new(n, edges)
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, i: usize) -> (usize, usize) {
        self.edges[i]
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn index_of(&self, u: usize, v: usize) -> Option<usize> {
        self.index.get(&(u.min(v), u.max(v))).copied()
    }

    pub fn is_complete(&self) -> bool {
        self.edges.len() == self.n * (self.n - 1) / 2
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n];
        for &(u, v) in &self.edges {
            d[u] += 1;
            d[v] += 1;
        }
        d
    }
}

/// A 1-factorization of a graph with integer edge weights; carries the
/// k-null certificate when every factor is a perfect matching, the factors
/// partition the edges, every vertex's incident weight sum is zero, every
/// factor's weight sum is zero, and all |weights| <= k-1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedFactorization {
    pub host: Graph,
    /// Edge indices per factor.
    pub factors: Vec<Vec<usize>>,
    /// Weight per edge, aligned with `host.edges()`.
    pub weights: Vec<i64>,
}

impl WeightedFactorization {
    pub fn max_abs_weight(&self) -> i64 {
        self.weights.iter().map(|w| w.abs()).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NullReport {
    pub problems: Vec<String>,
}

impl NullReport {
    pub fn is_valid(&self) -> bool {
        self.problems.is_empty()
    }

    pub fn summary(&self) -> String {
        if self.problems.is_empty() {
            "ok".into()
        } else {
            self.problems.join("; ")
        }
    }
}

/// Independent audit of a k-null 1-factorization; checks matching-ness,
/// partition, vertex sums, factor sums, and weight bounds.
pub fn verify_null_factorization(wf: &WeightedFactorization, k: usize) -> NullReport {
    let mut problems = Vec::new();
    let g = &wf.host;
    if wf.weights.len() != g.num_edges() {
        problems.push(format!(
            "{} weights for {} edges",
            wf.weights.len(),
            g.num_edges()
        ));
        return NullReport { problems };
    }
    let bound = (k as i64) - 1;
    for (ei, &w) in wf.weights.iter().enumerate() {
        if w == 0 {
            problems.push(format!("edge {ei} has zero weight"));
        } else if w.abs() > bound {
            problems.push(format!("edge {ei} weight {w} exceeds bound {bound}"));
        }
    }
    let mut seen = vec![false; g.num_edges()];
    for (fi, factor) in wf.factors.iter().enumerate() {
        let mut hit = vec![false; g.num_vertices()];
        let mut sum = 0i64;
        for &ei in factor {
            if ei >= g.num_edges() {
                problems.push(format!("factor {fi} references edge {ei} out of range"));
                continue;
            }
            if seen[ei] {
                problems.push(format!("edge {ei} appears in two factors"));
            }
            seen[ei] = true;
            let (u, v) = g.edge(ei);
            if hit[u] || hit[v] {
                problems.push(format!("factor {fi} is not a matching at edge {ei}"));
            }
            hit[u] = true;
            hit[v] = true;
            sum += wf.weights[ei];
        }
        if hit.iter().any(|&h| !h) {
            problems.push(format!("factor {fi} is not perfect"));
        }
        if sum != 0 {
            problems.push(format!("factor {fi} has weight sum {sum}"));
        }
    }
    if let Some(ei) = (0..g.num_edges()).find(|&ei| !seen[ei]) {
        problems.push(format!("edge {ei} is in no factor"));
    }
    let mut vertex_sum = vec![0i64; g.num_vertices()];
    for (ei, &(u, v)) in g.edges().iter().enumerate() {
        vertex_sum[u] += wf.weights[ei];
        vertex_sum[v] += wf.weights[ei];
    }
    for (vtx, &s) in vertex_sum.iter().enumerate() {
        if s != 0 {
            problems.push(format!("vertex {vtx} has weight sum {s}"));
        }
    }
    NullReport { problems }
}

/// A partition of a graph's edges into 2-regular spanning subgraphs.
#[derive(Debug, Clone)]
pub struct TwoFactorization {
    pub host: Graph,
    pub factors: Vec<Vec<usize>>,
}

pub fn verify_two_factorization(tf: &TwoFactorization) -> Result<(), String> {
    let g = &tf.host;
    let mut seen = vec![false; g.num_edges()];
    for (fi, factor) in tf.factors.iter().enumerate() {
        let mut deg = vec![0usize; g.num_vertices()];
        for &ei in factor {
            if seen[ei] {
                return Err(format!("edge {ei} in two factors"));
            }
            seen[ei] = true;
            let (u, v) = g.edge(ei);
            deg[u] += 1;
            deg[v] += 1;
        }
        if deg.iter().any(|&d| d != 2) {
            return Err(format!("factor {fi} is not 2-regular spanning"));
        }
    }
    if seen.iter().any(|&s| !s) {
        return Err("some edge is in no factor".into());
    }
    Ok(())
}

/// Cycle lengths of a 2-regular edge set, sorted ascending.
pub fn cycle_type(g: &Graph, factor: &[usize]) -> Vec<usize> {
    let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
    for &ei in factor {
        let (u, v) = g.edge(ei);
        adj.entry(u).or_default().push(v);
        adj.entry(v).or_default().push(u);
    }
    let mut visited: HashMap<usize, bool> = adj.keys().map(|&k| (k, false)).collect();
    let mut lengths = Vec::new();
    let vertices: Vec<usize> = {
        let mut v: Vec<usize> = adj.keys().copied().collect();
        v.sort_unstable();
        v
    };
    for &start in &vertices {
        if visited[&start] {
            continue;
        }
        let mut len = 0;
        let mut prev = usize::MAX;
        let mut cur = start;
        loop {
            visited.insert(cur, true);
            len += 1;
            let nbrs = &adj[&cur];
            let next = if nbrs[0] != prev { nbrs[0] } else { nbrs[1] };
            prev = cur;
            cur = next;
            if cur == start {
                break;
            }
        }
        lengths.push(len);
    }
    lengths.sort_unstable();
    lengths
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FactorError {
    BadOrder(usize),
    NotCubic,
    SearchExhausted(String),
    Unsupported(String),
}

impl fmt::Display for FactorError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FactorError::BadOrder(n) => write!(f, "order {n} is outside the construction's range"),
            FactorError::NotCubic => write!(f, "graph is not 3-regular"),
            FactorError::SearchExhausted(m) => write!(f, "search exhausted: {m}"),
            FactorError::Unsupported(m) => write!(f, "unsupported: {m}"),
        }
    }
}

impl Error for FactorError {}

/// Circle-method 1-factorization of K_{2r}: vertex 2r-1 is the hub, the ring
/// is Z_{2r-1}, and factor i pairs the hub with i and (i+j) with (i-j).
pub fn round_robin_one_factorization(n: usize) -> Vec<Vec<(usize, usize)>> {
    assert!(n >= 2 && n % 2 == 0, "round robin needs even order");
    let m = n - 1;
    let mut factors = Vec::with_capacity(m);
    for i in 0..m {
        let mut f = vec![(i, m)];
        for j in 1..n / 2 {
            f.push(((i + j) % m, (i + m - j) % m));
        }
        factors.push(f);
    }
    factors
}

/// Walecki decomposition of K_m (m odd) into (m-1)/2 Hamiltonian cycles:
/// a zigzag path on the ring Z_{m-1} closed through the hub, rotated.
pub fn walecki_hamiltonian_factorization(m: usize) -> Result<TwoFactorization, FactorError> {
    if m < 3 || m % 2 == 0 {
        return Err(FactorError::BadOrder(m));
    }
    let host = Graph::complete(m);
    let ring = m - 1;
    let half = ring / 2;
    let hub = m - 1;
    let mut factors = Vec::with_capacity(half);
    for t in 0..half {
        let seq = walecki_cycle_sequence(m, t);
        let mut f = Vec::with_capacity(m);
        for w in 0..m {
            let a = if w == 0 { hub } else { seq[w - 1] };
            let b = if w == m - 1 { hub } else { seq[w] };
            f.push(host.index_of(a, b).expect("complete graph edge"));
        }
        let _ = ring;
        factors.push(f);
    }
    Ok(TwoFactorization { host, factors })
}

/// Ring part of the t-th Walecki cycle, in path order.
fn walecki_cycle_sequence(m: usize, t: usize) -> Vec<usize> {
    let ring = m - 1;
    let mut seq = Vec::with_capacity(ring);
    seq.push(t % ring);
    for idx in 1..ring {
        let off = if idx % 2 == 1 {
            (idx + 1) / 2
        } else {
            ring - idx / 2
        };
        seq.push((t + off) % ring);
    }
    seq
}

/// 3-null 1-factorization of K_{n,n} (left vertices 0..n, right n..2n) from
/// an orthogonal pair: one square colors the edges, the other groups them
/// into factors, so each factor holds one edge of each color. Weights are
/// constant per color and sum to zero over the colors. n = 6 is assembled
/// from four K_{3,3} blocks instead.
pub fn knn_null(n: usize) -> Result<WeightedFactorization, FactorError> {
    if n < 3 {
        return Err(FactorError::BadOrder(n));
    }
    let mut edges = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            edges.push((i, n + j));
        }
    }
    let host = Graph::new(2 * n, edges);
    if n == 6 {
        return knn_null_order6(host);
    }
    let pair =
        orthogonal_idempotent_pair(n).map_err(|e| FactorError::Unsupported(e.to_string()))?;
    let weights_by_color = color_weights(n);
    let mut weights = vec![0i64; host.num_edges()];
    let mut factors = vec![Vec::with_capacity(n); n];
    for i in 0..n {
        for j in 0..n {
            let ei = host.index_of(i, n + j).unwrap();
            weights[ei] = weights_by_color[pair.first.get(i, j)];
            factors[pair.second.get(i, j)].push(ei);
        }
    }
    Ok(WeightedFactorization {
        host,
        factors,
        weights,
    })
}

/// Per-color weights summing to zero: +1 on the first half and -1 on the
/// second when the count is even; 2, -1, -1 then alternating +1/-1 when odd.
fn color_weights(n: usize) -> Vec<i64> {
    let mut w = Vec::with_capacity(n);
    if n % 2 == 0 {
        for c in 0..n {
            w.push(if c < n / 2 { 1 } else { -1 });
        }
    } else {
        w.extend_from_slice(&[2, -1, -1]);
        for c in 3..n {
            w.push(if c % 2 == 1 { 1 } else { -1 });
        }
    }
    debug_assert_eq!(w.iter().sum::<i64>(), 0);
    w
}

/// K_{6,6} as four K_{3,3} blocks, each carrying the odd-order weighting;
/// factors pair matchings of complementary blocks.
fn knn_null_order6(host: Graph) -> Result<WeightedFactorization, FactorError> {
    let n = 6;
    let pair3 = orthogonal_idempotent_pair(3).expect("order 3 pair");
    let mut weights = vec![0i64; host.num_edges()];
    let mut factors = vec![Vec::new(); n];
    let wcol = color_weights(3);
    // Blocks: (left half lh, right half rh) for lh, rh in {0,1}.
    for lh in 0..2 {
        for rh in 0..2 {
            for i in 0..3 {
                for j in 0..3 {
                    let u = 3 * lh + i;
                    let v = n + 3 * rh + j;
                    let ei = host.index_of(u, v).unwrap();
                    weights[ei] = wcol[pair3.first.get(i, j)];
                    // Parallel blocks (lh == rh) fill factors 0..3, crossed
                    // blocks fill 3..6.
                    let base = if lh == rh { 0 } else { 3 };
                    factors[base + pair3.second.get(i, j)].push(ei);
                }
            }
        }
    }
    Ok(WeightedFactorization {
        host,
        factors,
        weights,
    })
}

/// 3-null 1-factorization of K_n for n = 0 (mod 4), n > 4: the two halves
/// carry round-robin factorizations M_i, M'_i joined as factors M_i + M'_i
/// with constant weights c_i on M_i and -c_i on M'_i (c = 2, -1, then
/// alternating with sum zero); the K_{n/2,n/2} join comes from `knn_null`.
pub fn kn_3null(n: usize) -> Result<WeightedFactorization, FactorError> {
    if n % 4 != 0 || n == 4 || n == 0 {
        return Err(FactorError::BadOrder(n));
    }
    let m = n / 2;
    let host = Graph::complete(n);
    let own = round_robin_one_factorization(m);
    // c_1 = 2, c_2 = -1, then 2r-3 terms alternating -1, +1, ..., -1.
    let mut c = vec![2i64, -1];
    for i in 0..m - 3 {
        c.push(if i % 2 == 0 { -1 } else { 1 });
    }
    debug_assert_eq!(c.iter().sum::<i64>(), 0);
    let mut weights = vec![0i64; host.num_edges()];
    let mut factors: Vec<Vec<usize>> = Vec::with_capacity(n - 1);
    for (i, matching) in own.iter().enumerate() {
        let mut f = Vec::with_capacity(m);
        for &(a, b) in matching {
            let ei = host.index_of(a, b).unwrap();
            weights[ei] = c[i];
            f.push(ei);
            let ej = host.index_of(m + a, m + b).unwrap();
            weights[ej] = -c[i];
            f.push(ej);
        }
        factors.push(f);
    }
    let bip = knn_null(m)?;
    for factor in &bip.factors {
        let mut f = Vec::with_capacity(m);
        for &bei in factor {
            let (u, v) = bip.host.edge(bei);
            // bipartite host: left u, right v - m maps to m + (v - m).
            let ei = host.index_of(u, v).unwrap();
            weights[ei] = bip.weights[bei];
            f.push(ei);
        }
        factors.push(f);
    }
    Ok(WeightedFactorization {
        host,
        factors,
        weights,
    })
}

/// Connected components of an edge set, as (vertices, edge indices).
fn components(g: &Graph, edge_set: &[usize]) -> Vec<(Vec<usize>, Vec<usize>)> {
    let mut parent: HashMap<usize, usize> = HashMap::new();
    fn find(parent: &mut HashMap<usize, usize>, x: usize) -> usize {
        let p = *parent.entry(x).or_insert(x);
        if p == x {
            x
        } else {
            let root = find(parent, p);
            parent.insert(x, root);
            root
        }
    }
    for &ei in edge_set {
        let (u, v) = g.edge(ei);
        let ru = find(&mut parent, u);
        let rv = find(&mut parent, v);
        if ru != rv {
            parent.insert(ru, rv);
        }
    }
    let mut comp: HashMap<usize, (Vec<usize>, Vec<usize>)> = HashMap::new();
    let mut verts: Vec<usize> = parent.keys().copied().collect();
    verts.sort_unstable();
    for v in verts {
        let root = find(&mut parent, v);
        comp.entry(root).or_default().0.push(v);
    }
    for &ei in edge_set {
        let (u, _) = g.edge(ei);
        let root = find(&mut parent, u);
        comp.get_mut(&root).unwrap().1.push(ei);
    }
    let mut out: Vec<(Vec<usize>, Vec<usize>)> = comp.into_values().collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

/// 4-null 1-factorization of K_{6k+4}, k > 1, over Z_{6k+3} + infinity.
/// The starter factor {(x,-x)} + {(0,inf)} is developed cyclically; factor
/// triples i, i+2k+1, i+4k+2 union into K_4 + k disjoint K_{3,3}, which are
/// weighted so each of the three matchings sums to zero across the union.
pub fn k6k4_4null(k: usize) -> Result<WeightedFactorization, FactorError> {
    if k <= 1 {
        return Err(FactorError::BadOrder(6 * k + 4));
    }
    let n = 6 * k + 4;
    let m = n - 1; // Z_m plus infinity = vertex m
    let host = Graph::complete(n);
    let mut factors: Vec<Vec<usize>> = Vec::with_capacity(m);
    for i in 0..m {
        let mut f = Vec::with_capacity(n / 2);
        f.push(host.index_of(i, m).unwrap());
        for x in 1..=(m - 1) / 2 {
            let a = (x + i) % m;
            let b = (m - x + i) % m;
            f.push(host.index_of(a, b).unwrap());
        }
        factors.push(f);
    }
    let mut weights = vec![0i64; host.num_edges()];
    // Unions of factors i, i + (2k+1), i + (4k+2).
    for i in 0..(2 * k + 1) {
        let fids = [i, i + 2 * k + 1, i + 4 * k + 2];
        let union_edges: Vec<usize> = fids.iter().flat_map(|&f| factors[f].clone()).collect();
        let comps = components(&host, &union_edges);
        // Identify the K_4 and the K_{3,3}s; weight the K_4 (sums 2, 2, -4),
        // compensate with the first two K_{3,3}s (sums -1, -1, 2), zero the
        // rest.
        let mut seen_k33 = 0;
        for (verts, comp_edges) in &comps {
            // The component's edges grouped by owning factor.
            let mut groups: Vec<Vec<usize>> = vec![Vec::new(); 3];
            for &ei in comp_edges {
                let gi = fids
                    .iter()
                    .position(|&f| factors[f].contains(&ei))
                    .expect("edge belongs to one of the three factors");
                groups[gi].push(ei);
            }
            if verts.len() == 4 {
                for &ei in &groups[0] {
                    weights[ei] = 1;
                }
                for &ei in &groups[1] {
                    weights[ei] = 1;
                }
                for &ei in &groups[2] {
                    weights[ei] = -2;
                }
            } else if verts.len() == 6 {
                let targets = if seen_k33 < 2 {
                    [-1i64, -1, 2]
                } else {
                    [0, 0, 0]
                };
                seen_k33 += 1;
                weight_k33(&host, verts, &groups, targets, &mut weights)?;
            } else {
                return Err(FactorError::Unsupported(format!(
                    "unexpected component of order {}",
                    verts.len()
                )));
            }
        }
    }
    Ok(WeightedFactorization {
        host,
        factors,
        weights,
    })
}

/// Assigns weights to a K_{3,3} whose edges are split into three perfect
/// matchings, so that rows and columns (vertex stars) sum to zero and the
/// three matchings hit the given target sums. Searches the 4-parameter
/// family of zero-row/zero-column matrices over small entries.
fn weight_k33(
    g: &Graph,
    verts: &[usize],
    groups: &[Vec<usize>],
    targets: [i64; 3],
    weights: &mut [i64],
) -> Result<(), FactorError> {
    // 2-color to find the bipartition.
    let mut side: HashMap<usize, usize> = HashMap::new();
    let all_edges: Vec<usize> = groups.iter().flatten().copied().collect();
    side.insert(verts[0], 0);
    let mut queue = vec![verts[0]];
    while let Some(u) = queue.pop() {
        for &ei in &all_edges {
            let (a, b) = g.edge(ei);
            let other = if a == u {
                b
            } else if b == u {
                a
            } else {
                continue;
            };
            if !side.contains_key(&other) {
                side.insert(other, 1 - side[&u]);
                queue.push(other);
            }
        }
    }
    let xs: Vec<usize> = verts.iter().copied().filter(|v| side[v] == 0).collect();
    let ys: Vec<usize> = verts.iter().copied().filter(|v| side[v] == 1).collect();
    if xs.len() != 3 || ys.len() != 3 {
        return Err(FactorError::Unsupported("component is not K_{3,3}".into()));
    }
    let xi = |v: usize| xs.iter().position(|&x| x == v).unwrap();
    let yi = |v: usize| ys.iter().position(|&y| y == v).unwrap();
    // cell (row, col) -> (edge index, matching group)
    let mut cell = [[usize::MAX; 3]; 3];
    let mut owner = [[usize::MAX; 3]; 3];
    for (gi, group) in groups.iter().enumerate() {
        for &ei in group {
            let (a, b) = g.edge(ei);
            let (x, y) = if side[&a] == 0 { (a, b) } else { (b, a) };
            cell[xi(x)][yi(y)] = ei;
            owner[xi(x)][yi(y)] = gi;
        }
    }
    // W = [[a, b, -a-b], [d, e, -d-e], [-a-d, -b-e, a+b+d+e]] spans all
    // matrices with zero row and column sums.
    for a in -3i64..=3 {
        for b in -3i64..=3 {
            for d in -3i64..=3 {
                for e in -3i64..=3 {
                    let w = [
                        [a, b, -a - b],
                        [d, e, -d - e],
                        [-a - d, -b - e, a + b + d + e],
                    ];
                    if w.iter().flatten().any(|&x| x == 0 || x.abs() > 3) {
                        continue;
                    }
                    let mut sums = [0i64; 3];
                    for r in 0..3 {
                        for c in 0..3 {
                            sums[owner[r][c]] += w[r][c];
                        }
                    }
                    if sums == targets {
                        for r in 0..3 {
                            for c in 0..3 {
                                weights[cell[r][c]] = w[r][c];
                            }
                        }
                        return Ok(());
                    }
                }
            }
        }
    }
    Err(FactorError::SearchExhausted(format!(
        "no K_{{3,3}} weighting for targets {targets:?}"
    )))
}

/// Local vertex encoding for prism graphs: (fiber, side) -> 2*fiber + side.
fn pv(fiber: usize, side: usize, m: usize) -> usize {
    2 * (fiber % m) + side
}

/// One chained-gadget 2-factor of C_m wr K2bar, with gadget boundaries at
/// the given fiber starts (cyclically). A gadget [s, e] is the cycle
/// (s,1) (s+1,0) ... (e,0) (e-1,1) ... (s+1,1), giving a 2(e-s)-cycle.
/// Returns the cycles as local-vertex sequences.
fn prism_factor_cycles(m: usize, boundaries: &[usize]) -> Vec<Vec<usize>> {
    let mut cycles = Vec::with_capacity(boundaries.len());
    for (gi, &s) in boundaries.iter().enumerate() {
        let e = boundaries[(gi + 1) % boundaries.len()];
        let len = (e + m - s) % m;
        debug_assert!(len >= 2);
        let mut cyc = Vec::with_capacity(2 * len);
        cyc.push(pv(s, 1, m));
        for j in 1..=len {
            cyc.push(pv(s + j, 0, m));
        }
        for j in (1..len).rev() {
            cyc.push(pv(s + j, 1, m));
        }
        cycles.push(cyc);
    }
    cycles
}

/// Edges of a cycle given as a vertex sequence.
fn cycle_edges(cyc: &[usize]) -> Vec<(usize, usize)> {
    (0..cyc.len())
        .map(|i| {
            let a = cyc[i];
            let b = cyc[(i + 1) % cyc.len()];
            (a.min(b), a.max(b))
        })
        .collect()
}

/// Extracts cycles (as vertex sequences) from a disjoint union of cycles.
fn extract_cycles(edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
    for &(u, v) in edges {
        adj.entry(u).or_default().push(v);
        adj.entry(v).or_default().push(u);
    }
    let mut starts: Vec<usize> = adj.keys().copied().collect();
    starts.sort_unstable();
    let mut visited: HashMap<usize, bool> = HashMap::new();
    let mut cycles = Vec::new();
    for &start in &starts {
        if *visited.get(&start).unwrap_or(&false) {
            continue;
        }
        let mut cyc = Vec::new();
        let mut prev = usize::MAX;
        let mut cur = start;
        loop {
            visited.insert(cur, true);
            cyc.push(cur);
            let nbrs = &adj[&cur];
            let next = if nbrs[0] != prev { nbrs[0] } else { nbrs[1] };
            prev = cur;
            cur = next;
            if cur == start {
                break;
            }
        }
        cycles.push(cyc);
    }
    cycles
}

/// Weighting plan for a 2-factor that is a disjoint union of even cycles:
/// alternating +-a on each cycle, with per-cycle magnitudes and orientations
/// chosen so that both alternate-edge matchings sum to zero.
/// `magnitudes[i]` applies to `cycles[i]` ordered longest first.
fn weight_even_cycle_factor(cycles: &[Vec<usize>], magnitudes: &[i64]) -> HashMap<(usize, usize), i64> {
    // Half-sums h_i = a_i * len_i / 2; pick signs greedily to reach zero.
    let mut order: Vec<usize> = (0..cycles.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(cycles[i].len()));
    let mut running = 0i64;
    let mut sign = vec![1i64; cycles.len()];
    for &i in &order {
        let h = magnitudes[i] * (cycles[i].len() as i64) / 2;
        let s = if running > 0 { -1 } else { 1 };
        sign[i] = s;
        running += s * h;
    }
    assert_eq!(running, 0, "matching half-sums must cancel");
    let mut w = HashMap::new();
    for (ci, cyc) in cycles.iter().enumerate() {
        for (i, e) in cycle_edges(cyc).into_iter().enumerate() {
            let val = if i % 2 == 0 {
                magnitudes[ci] * sign[ci]
            } else {
                -magnitudes[ci] * sign[ci]
            };
            w.insert(e, val);
        }
    }
    w
}

/// Alternate-edge split of even cycles into two matchings (as edge lists).
fn split_matchings(cycles: &[Vec<usize>]) -> (Vec<(usize, usize)>, Vec<(usize, usize)>) {
    let mut a = Vec::new();
    let mut b = Vec::new();
    for cyc in cycles {
        for (i, e) in cycle_edges(cyc).into_iter().enumerate() {
            if i % 2 == 0 {
                a.push(e);
            } else {
                b.push(e);
            }
        }
    }
    (a, b)
}

/// Magnitudes for the C_6 + (k-1) C_4 factor: 2 on the C_6; on the first
/// C_4, 2 if the number of C_4s is even and 3 if odd; 1 elsewhere.
fn f_magnitudes(cycles: &[Vec<usize>]) -> Vec<i64> {
    let c4_count = cycles.iter().filter(|c| c.len() == 4).count();
    let mut mags = Vec::with_capacity(cycles.len());
    let mut first_c4 = true;
    for cyc in cycles {
        match cyc.len() {
            6 => mags.push(2),
            4 => {
                if first_c4 {
                    mags.push(if c4_count % 2 == 0 { 2 } else { 3 });
                    first_c4 = false;
                } else {
                    mags.push(1);
                }
            }
            other => panic!("unexpected cycle length {other} in C_6 + C_4s factor"),
        }
    }
    mags
}

/// 5-null 1-factorization of K_{4k+2}, k >= 2. K_{4k+2} splits along a
/// Hamiltonian factorization of K_{2k+1} into k-1 copies of C_{2k+1} wr K2bar
/// plus one C_{2k+1} wr K2; each wreath-over-empty piece yields two
/// C_6 + (k-1)C_4 factors weighted with alternating +-1, +-2 (or +-3);
/// the wreath-over-K2 piece yields one such factor plus a cubic remainder
/// handled by `cubic_null_search`.
pub fn k4k2_5null(k: usize) -> Result<WeightedFactorization, FactorError> {
    if k < 2 {
        return Err(FactorError::BadOrder(4 * k + 2));
    }
    let m = 2 * k + 1;
    let n = 4 * k + 2;
    let host = Graph::complete(n);
    let ham = walecki_hamiltonian_factorization(m)?;
    let mut weights = vec![0i64; host.num_edges()];
    let mut factors: Vec<Vec<usize>> = Vec::new();

    // Standard gadget boundaries: C_6 on [0,3], then C_4s every 2 fibers.
    let mut boundaries = vec![0usize, 3];
    let mut b = 3;
    while b + 2 < m {
        b += 2;
        boundaries.push(b);
    }
    // For the wr K2 piece with k = 3 the generic remainder has no bounded
    // assignment; the C_6 + C_8 factor takes its place.
    let special_boundaries: Vec<usize> = vec![0, 3];

    for (ci, factor) in ham.factors.iter().enumerate() {
        // Fiber order along this Hamiltonian cycle.
        let edges: Vec<(usize, usize)> = factor.iter().map(|&ei| ham.host.edge(ei)).collect();
        let seq = extract_cycles(&edges)
            .into_iter()
            .next()
            .expect("hamiltonian cycle");
        debug_assert_eq!(seq.len(), m);
        let to_global = |local: usize| -> usize {
            let fiber = local / 2;
            let side = local % 2;
            2 * seq[fiber] + side
        };
        let carries_rungs = ci == 0;
        let (bnd, l_kind) = if carries_rungs && k == 3 {
            (&special_boundaries, true)
        } else {
            (&boundaries, false)
        };
        let f1_cycles = prism_factor_cycles(m, bnd);
        // Complement within the bundles of this lifted cycle.
        let mut all_bundle_edges: Vec<(usize, usize)> = Vec::new();
        for f in 0..m {
            for s in 0..2 {
                for t in 0..2 {
                    let a = pv(f, s, m);
                    let b = pv(f + 1, t, m);
                    all_bundle_edges.push((a.min(b), a.max(b)));
                }
            }
        }
        let f1_edges: Vec<(usize, usize)> = f1_cycles.iter().flat_map(|c| cycle_edges(c)).collect();
        let f2_edges: Vec<(usize, usize)> = all_bundle_edges
            .iter()
            .copied()
            .filter(|e| !f1_edges.contains(e))
            .collect();
        let f2_cycles = extract_cycles(&f2_edges);

        for (which, cycles) in [(0, &f1_cycles), (1, &f2_cycles)] {
            if carries_rungs && which == 1 {
                // F2 + rungs forms the cubic remainder, handled below.
                continue;
            }
            let mags = if l_kind {
                // C_6 +-4, C_8 +-3.
                cycles
                    .iter()
                    .map(|c| match c.len() {
                        6 => 4i64,
                        8 => 3,
                        other => panic!("unexpected cycle length {other}"),
                    })
                    .collect::<Vec<i64>>()
            } else {
                f_magnitudes(cycles)
            };
            let wmap = weight_even_cycle_factor(cycles, &mags);
            let (ma, mb) = split_matchings(cycles);
            for matching in [ma, mb] {
                let mut f = Vec::with_capacity(n / 2);
                let mut sum = 0i64;
                for &(a, b) in &matching {
                    let (ga, gb) = (to_global(a), to_global(b));
                    let ei = host.index_of(ga, gb).unwrap();
                    weights[ei] = wmap[&(a, b)];
                    sum += wmap[&(a, b)];
                    f.push(ei);
                }
                debug_assert_eq!(sum, 0);
                factors.push(f);
            }
        }

        if carries_rungs {
            // Cubic remainder: F2 plus the rungs (u,0)-(u,1).
            let mut rem_edges: Vec<(usize, usize)> = f2_edges.clone();
            for f in 0..m {
                rem_edges.push((pv(f, 0, m), pv(f, 1, m)));
            }
            let rem_global: Vec<(usize, usize)> = rem_edges
                .iter()
                .map(|&(a, b)| {
                    let (ga, gb) = (to_global(a), to_global(b));
                    (ga.min(gb), ga.max(gb))
                })
                .collect();
            let rem_graph = Graph::new(n, rem_global.clone());
            let sub = cubic_null_search(&rem_graph, 5, Budget { max_nodes: 80_000_000 })?;
            let sub = match sub {
                SearchOutcome::Found(wf) => wf,
                SearchOutcome::Exhausted => {
                    return Err(FactorError::SearchExhausted(
                        "cubic remainder has no bounded assignment".into(),
                    ))
                }
                SearchOutcome::Timeout => {
                    return Err(FactorError::SearchExhausted(
                        "cubic remainder search timed out".into(),
                    ))
                }
            };
            for factor in &sub.factors {
                let mut f = Vec::with_capacity(n / 2);
                for &rei in factor {
                    let (a, b) = sub.host.edge(rei);
                    let ei = host.index_of(a, b).unwrap();
                    weights[ei] = sub.weights[rei];
                    f.push(ei);
                }
                factors.push(f);
            }
        }
    }
    Ok(WeightedFactorization {
        host,
        factors,
        weights,
    })
}

/// Exhaustive search for a proper 3-edge-coloring of a cubic graph with
/// weights in {±1..±(k-1)} making every color class and every vertex sum to
/// zero. Colorings are enumerated up to global color permutation; for each,
/// weights are assigned depth-first with vertex- and factor-sum pruning.
pub fn cubic_null_search(
    g: &Graph,
    k: usize,
    budget: Budget,
) -> Result<SearchOutcome<WeightedFactorization>, FactorError> {
    if g.degrees().iter().any(|&d| d != 3) {
        return Err(FactorError::NotCubic);
    }
    let ecount = g.num_edges();
    // Edge processing order: grow outward so endpoints complete early.
    let order = {
        let mut order = Vec::with_capacity(ecount);
        let mut placed = vec![false; ecount];
        let mut incident: Vec<Vec<usize>> = vec![Vec::new(); g.num_vertices()];
        for (ei, &(u, v)) in g.edges().iter().enumerate() {
            incident[u].push(ei);
            incident[v].push(ei);
        }
        while order.len() < ecount {
            let next = (0..ecount)
                .filter(|&ei| !placed[ei])
                .max_by_key(|&ei| {
                    let (u, v) = g.edge(ei);
                    let score: usize = incident[u]
                        .iter()
                        .chain(incident[v].iter())
                        .filter(|&&e2| placed[e2])
                        .count();
                    (score, std::cmp::Reverse(ei))
                })
                .unwrap();
            placed[next] = true;
            order.push(next);
        }
        order
    };

    struct St<'a> {
        g: &'a Graph,
        order: &'a [usize],
        color: Vec<usize>,
        vertex_colors: Vec<[bool; 3]>,
        nodes: u64,
        budget: Budget,
        k: i64,
        // weight search state per coloring
        result: Option<(Vec<usize>, Vec<i64>)>,
    }

    impl St<'_> {
        fn color_dfs(&mut self, idx: usize) -> Option<bool> {
            self.nodes += 1;
            if self.nodes > self.budget.max_nodes {
                return None;
            }
            if idx == self.order.len() {
                return self.weight_search();
            }
            let ei = self.order[idx];
            let (u, v) = self.g.edge(ei);
            // Cut global color permutations: first edge fixed to color 0,
            // second distinct color to 1.
            let max_color = (self
                .color
                .iter()
                .filter(|&&c| c != usize::MAX)
                .max_by_key(|&&c| c)
                .copied()
                .unwrap_or(0)
                .min(2))
            .min(2);
            let limit = if self.color.iter().all(|&c| c == usize::MAX) {
                0
            } else {
                (max_color + 1).min(2)
            };
            for c in 0..=limit {
                if self.vertex_colors[u][c] || self.vertex_colors[v][c] {
                    continue;
                }
                self.color[ei] = c;
                self.vertex_colors[u][c] = true;
                self.vertex_colors[v][c] = true;
                match self.color_dfs(idx + 1) {
                    Some(true) => return Some(true),
                    Some(false) => {}
                    None => return None,
                }
                self.vertex_colors[u][c] = false;
                self.vertex_colors[v][c] = false;
                self.color[ei] = usize::MAX;
            }
            Some(false)
        }

        fn weight_search(&mut self) -> Option<bool> {
            let ecount = self.g.num_edges();
            let nv = self.g.num_vertices();
            let mut weights = vec![0i64; ecount];
            let mut vsum = vec![0i64; nv];
            let mut vleft = vec![3usize; nv];
            let mut fsum = [0i64; 3];
            let mut fleft = [0usize; 3];
            for &c in &self.color {
                fleft[c] += 1;
            }
            let wmax = self.k - 1;
            let mut values: Vec<i64> = Vec::new();
            for a in 1..=wmax {
                values.push(a);
                values.push(-a);
            }

            fn rec(
                st: &mut St,
                idx: usize,
                weights: &mut Vec<i64>,
                vsum: &mut Vec<i64>,
                vleft: &mut Vec<usize>,
                fsum: &mut [i64; 3],
                fleft: &mut [usize; 3],
                values: &[i64],
                wmax: i64,
            ) -> Option<bool> {
                st.nodes += 1;
                if st.nodes > st.budget.max_nodes {
                    return None;
                }
                if idx == st.order.len() {
                    if fsum.iter().all(|&s| s == 0) {
                        st.result = Some((st.color.clone(), weights.clone()));
                        return Some(true);
                    }
                    return Some(false);
                }
                let ei = st.order[idx];
                let (u, v) = st.g.edge(ei);
                let c = st.color[ei];
                for &val in values {
                    weights[ei] = val;
                    vsum[u] += val;
                    vsum[v] += val;
                    vleft[u] -= 1;
                    vleft[v] -= 1;
                    fsum[c] += val;
                    fleft[c] -= 1;
                    let ok = |s: i64, m: usize| -> bool {
                        if m == 0 {
                            s == 0
                        } else {
                            s.abs() <= m as i64 * wmax
                        }
                    };
                    let feas = ok(vsum[u], vleft[u])
                        && ok(vsum[v], vleft[v])
                        && ok(fsum[c], fleft[c]);
                    if feas {
                        match rec(st, idx + 1, weights, vsum, vleft, fsum, fleft, values, wmax) {
                            Some(true) => return Some(true),
                            Some(false) => {}
                            None => return None,
                        }
                    }
                    fleft[c] += 1;
                    fsum[c] -= val;
                    vleft[u] += 1;
                    vleft[v] += 1;
                    vsum[u] -= val;
                    vsum[v] -= val;
                    weights[ei] = 0;
                }
                Some(false)
            }

            rec(
                self,
                0,
                &mut weights,
                &mut vsum,
                &mut vleft,
                &mut fsum,
                &mut fleft,
                &values,
                wmax,
            )
        }
    }

    let mut st = St {
        g,
        order: &order,
        color: vec![usize::MAX; ecount],
        vertex_colors: vec![[false; 3]; g.num_vertices()],
        nodes: 0,
        budget,
        k: k as i64,
        result: None,
    };
    match st.color_dfs(0) {
        Some(true) => {
            let (color, weights) = st.result.expect("result recorded on success");
            let mut factors = vec![Vec::new(); 3];
            for (ei, &c) in color.iter().enumerate() {
                factors[c].push(ei);
            }
            Ok(SearchOutcome::Found(WeightedFactorization {
                host: g.clone(),
                factors,
                weights,
            }))
        }
        Some(false) => Ok(SearchOutcome::Exhausted),
        None => Ok(SearchOutcome::Timeout),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_robin_partitions_k8() {
        let factors = round_robin_one_factorization(8);
        assert_eq!(factors.len(), 7);
        let g = Graph::complete(8);
        let mut seen = vec![false; g.num_edges()];
        for f in &factors {
            let mut hit = vec![false; 8];
            for &(a, b) in f {
                let ei = g.index_of(a, b).unwrap();
                assert!(!seen[ei]);
                seen[ei] = true;
                assert!(!hit[a] && !hit[b]);
                hit[a] = true;
                hit[b] = true;
            }
            assert!(hit.iter().all(|&h| h));
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn walecki_small_orders() {
        for m in [3usize, 5, 7, 9, 11, 13, 21] {
            let tf = walecki_hamiltonian_factorization(m).unwrap();
            assert_eq!(tf.factors.len(), (m - 1) / 2, "m={m}");
            verify_two_factorization(&tf).unwrap_or_else(|e| panic!("m={m}: {e}"));
            for f in &tf.factors {
                assert_eq!(cycle_type(&tf.host, f), vec![m], "m={m} not hamiltonian");
            }
        }
        assert!(matches!(
            walecki_hamiltonian_factorization(4),
            Err(FactorError::BadOrder(4))
        ));
    }

    #[test]
    fn knn_null_small_orders() {
        for n in [3usize, 4, 5, 6, 7, 8, 9] {
            let wf = knn_null(n).unwrap();
            assert_eq!(wf.factors.len(), n, "n={n}");
            let report = verify_null_factorization(&wf, 3);
            assert!(report.is_valid(), "n={n}: {}", report.summary());
        }
    }

    #[test]
    fn knn_null_even_orders_are_two_null() {
        let wf = knn_null(4).unwrap();
        assert!(verify_null_factorization(&wf, 2).is_valid());
        assert_eq!(wf.factors.len(), 4);
    }

    #[test]
    fn knn_rejects_tiny_orders() {
        assert!(matches!(knn_null(2), Err(FactorError::BadOrder(2))));
    }

    #[test]
    fn kn_3null_orders_8_and_12() {
        for n in [8usize, 12] {
            let wf = kn_3null(n).unwrap();
            assert_eq!(wf.factors.len(), n - 1, "n={n}");
            let report = verify_null_factorization(&wf, 3);
            assert!(report.is_valid(), "n={n}: {}", report.summary());
        }
        assert!(matches!(kn_3null(4), Err(FactorError::BadOrder(4))));
        assert!(matches!(kn_3null(10), Err(FactorError::BadOrder(10))));
    }

    #[test]
    fn k6k4_structure_and_certificate() {
        let wf = k6k4_4null(2).unwrap();
        assert_eq!(wf.factors.len(), 15);
        let report = verify_null_factorization(&wf, 4);
        assert!(report.is_valid(), "{}", report.summary());
    }

    #[test]
    fn k6k4_union_components_are_k4_and_k33() {
        let k = 2;
        let wf = k6k4_4null(k).unwrap();
        let host = &wf.host;
        for i in 0..(2 * k + 1) {
            let fids = [i, i + 2 * k + 1, i + 4 * k + 2];
            let union_edges: Vec<usize> =
                fids.iter().flat_map(|&f| wf.factors[f].clone()).collect();
            let comps = components(host, &union_edges);
            let mut sizes: Vec<usize> = comps.iter().map(|(v, _)| v.len()).collect();
            sizes.sort_unstable();
            assert_eq!(sizes, vec![4, 6, 6], "union {i}");
            // 3-regularity of the union
            for (verts, comp_edges) in &comps {
                let mut deg: HashMap<usize, usize> = HashMap::new();
                for &ei in comp_edges {
                    let (u, v) = host.edge(ei);
                    *deg.entry(u).or_default() += 1;
                    *deg.entry(v).or_default() += 1;
                }
                assert!(verts.iter().all(|v| deg[v] == 3));
            }
        }
    }

    #[test]
    fn k6k4_rejects_k1() {
        assert!(matches!(k6k4_4null(1), Err(FactorError::BadOrder(10))));
    }

    #[test]
    fn cubic_search_k4_is_unsat() {
        let k4 = Graph::complete(4);
        for k in [3usize, 5, 8] {
            let out = cubic_null_search(&k4, k, Budget::default()).unwrap();
            assert_eq!(out, SearchOutcome::Exhausted, "k={k}");
        }
    }

    #[test]
    fn cubic_search_k33_finds_4_null() {
        let mut edges = Vec::new();
        for i in 0..3 {
            for j in 0..3 {
                edges.push((i, 3 + j));
            }
        }
        let g = Graph::new(6, edges);
        let out = cubic_null_search(&g, 4, Budget::default()).unwrap();
        let wf = out.found().expect("K_{3,3} has a 4-null factorization");
        assert!(verify_null_factorization(&wf, 4).is_valid());
    }

    #[test]
    fn cubic_search_disjoint_union() {
        // K_4 + 2 K_{3,3}: the K_4 alone is unsat but the union balances.
        let mut edges = Vec::new();
        for u in 0..4 {
            for v in u + 1..4 {
                edges.push((u, v));
            }
        }
        for base in [4usize, 10] {
            for i in 0..3 {
                for j in 0..3 {
                    edges.push((base + i, base + 3 + j));
                }
            }
        }
        let g = Graph::new(16, edges);
        let out = cubic_null_search(&g, 4, Budget::default()).unwrap();
        let wf = out.found().expect("K_4 + 2 K_{3,3} has a 4-null weighting");
        assert!(verify_null_factorization(&wf, 4).is_valid());
    }

    #[test]
    fn cubic_search_rejects_non_cubic() {
        let g = Graph::complete(5);
        assert!(matches!(
            cubic_null_search(&g, 4, Budget::default()),
            Err(FactorError::NotCubic)
        ));
    }

    #[test]
    fn prism_factors_have_expected_cycle_types() {
        for k in 2..=10usize {
            let m = 2 * k + 1;
            let mut boundaries = vec![0usize, 3];
            let mut b = 3;
            while b + 2 < m {
                b += 2;
                boundaries.push(b);
            }
            let f1 = prism_factor_cycles(m, &boundaries);
            let mut lens: Vec<usize> = f1.iter().map(|c| c.len()).collect();
            lens.sort_unstable();
            let mut expect = vec![4usize; k - 1];
            expect.push(6);
            expect.sort_unstable();
            assert_eq!(lens, expect, "k={k} F1");
            // Complement is also C_6 + (k-1) C_4.
            let f1_edges: Vec<(usize, usize)> =
                f1.iter().flat_map(|c| cycle_edges(c)).collect();
            let mut all = Vec::new();
            for f in 0..m {
                for s in 0..2 {
                    for t in 0..2 {
                        let a = pv(f, s, m);
                        let b2 = pv(f + 1, t, m);
                        all.push((a.min(b2), a.max(b2)));
                    }
                }
            }
            let f2: Vec<(usize, usize)> = all
                .iter()
                .copied()
                .filter(|e| !f1_edges.contains(e))
                .collect();
            let mut lens2: Vec<usize> = extract_cycles(&f2).iter().map(|c| c.len()).collect();
            lens2.sort_unstable();
            assert_eq!(lens2, expect, "k={k} F2");
        }
    }

    #[test]
    fn k4k2_certificates() {
        for k in [2usize, 3] {
            let wf = k4k2_5null(k).unwrap();
            assert_eq!(wf.factors.len(), 4 * k + 1, "k={k}");
            let report = verify_null_factorization(&wf, 5);
            assert!(report.is_valid(), "k={k}: {}", report.summary());
        }
    }
}
