//! 2-designs and triple systems: validation, incidence matrices, cyclic
//! development from starter blocks, and searches for starters and
//! resolutions.

pub mod resolvable;

use std::error::Error;
use std::fmt;

/// A validated 2-(v,k,lambda) design. Points are `0..v`; blocks are sorted
/// k-subsets. Repeated blocks are allowed and are distinct entries: a block's
/// identity is its index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Design {
    v: usize,
    lambda: usize,
    k: usize,
    blocks: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DesignError {
    /// A block has the wrong size, an out-of-range point, or a repeated point.
    MalformedBlock { index: usize, block: Vec<usize> },
    /// Some unordered pair is covered the wrong number of times.
    PairCoverage {
        pair: (usize, usize),
        got: usize,
        want: usize,
    },
    /// Developed starter blocks do not form a design.
    NotADesign(String),
    BadParameters(String),
}

impl fmt::Display for DesignError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DesignError::MalformedBlock { index, block } => {
                write!(f, "malformed block #{index}: {block:?}")
            }
            DesignError::PairCoverage { pair, got, want } => write!(
                f,
                "pair {{{},{}}} covered {} times, expected {}",
                pair.0, pair.1, got, want
            ),
            DesignError::NotADesign(msg) => write!(f, "developed blocks are not a design: {msg}"),
            DesignError::BadParameters(msg) => write!(f, "bad parameters: {msg}"),
        }
    }
}

impl Error for DesignError {}

impl Design {
    pub fn v(&self) -> usize {
        self.v
    }

    pub fn lambda(&self) -> usize {
        self.lambda
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of blocks, traditionally written b.
    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Replication number r = lambda (v-1) / (k-1).
    pub fn replication(&self) -> usize {
        self.lambda * (self.v - 1) / (self.k - 1)
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block(&self, i: usize) -> &[usize] {
        &self.blocks[i]
    }
}

/// Validates and wraps a block list as a 2-(v,k,lambda) design.
///
/// Every block must be a k-subset of `0..v` and every unordered pair of
/// points must lie in exactly `lambda` blocks. Blocks are sorted internally;
/// the given block order is preserved.
pub fn make_design(
    v: usize,
    lambda: usize,
    k: usize,
    blocks: Vec<Vec<usize>>,
) -> Result<Design, DesignError> {
    if v < k || k < 2 || lambda == 0 {
        return Err(DesignError::BadParameters(format!(
            "need v >= k >= 2 and lambda >= 1, got v={v} k={k} lambda={lambda}"
        )));
    }
    if blocks.is_empty() {
        return Err(DesignError::BadParameters("empty block list".into()));
    }
    let mut sorted: Vec<Vec<usize>> = Vec::with_capacity(blocks.len());
    for (i, b) in blocks.into_iter().enumerate() {
        let mut b = b;
        b.sort_unstable();
        let ok = b.len() == k && b.iter().all(|&p| p < v) && b.windows(2).all(|w| w[0] < w[1]);
        if !ok {
            return Err(DesignError::MalformedBlock { index: i, block: b });
        }
        sorted.push(b);
    }
    let mut cover = vec![0usize; v * v];
    for b in &sorted {
        for i in 0..k {
            for j in i + 1..k {
                cover[b[i] * v + b[j]] += 1;
            }
        }
    }
    for x in 0..v {
        for y in x + 1..v {
            let got = cover[x * v + y];
            if got != lambda {
                return Err(DesignError::PairCoverage {
                    pair: (x, y),
                    got,
                    want: lambda,
                });
            }
        }
    }
    Ok(Design {
        v,
        lambda,
        k,
        blocks: sorted,
    })
}

/// Admissibility of (v, lambda) for a triple system TS(v, lambda):
/// lambda = 1,5 mod 6 needs v = 1,3 mod 6; lambda = 2,4 mod 6 needs
/// v = 0,1 mod 3; lambda = 3 mod 6 needs v odd; lambda = 0 mod 6 allows
/// any v >= 3. Equivalently lambda = 0 mod gcd(v-2, 6).
pub fn check_admissible(v: usize, lambda: usize) -> bool {
    if v < 3 || lambda == 0 {
        return false;
    }
    match lambda % 6 {
        1 | 5 => v % 6 == 1 || v % 6 == 3,
        2 | 4 => v % 3 == 0 || v % 3 == 1,
        3 => v % 2 == 1,
        0 => true,
        _ => unreachable!(),
    }
}

/// The v x b point-block incidence matrix of a design.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceMatrix {
    pub rows: usize,
    pub cols: usize,
    entries: Vec<u8>,
}

impl IncidenceMatrix {
    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.entries[i * self.cols + j]
    }

    pub fn row_sum(&self, i: usize) -> usize {
        (0..self.cols).map(|j| self.get(i, j) as usize).sum()
    }

    pub fn col_sum(&self, j: usize) -> usize {
        (0..self.rows).map(|i| self.get(i, j) as usize).sum()
    }

    /// N * w for an integer weight vector of length b.
    pub fn apply(&self, w: &[i64]) -> Vec<i64> {
        assert_eq!(w.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|j| self.get(i, j) as i64 * w[j])
                    .sum()
            })
            .collect()
    }
}

pub fn incidence_matrix(design: &Design) -> IncidenceMatrix {
    let (v, b) = (design.v(), design.num_blocks());
    let mut entries = vec![0u8; v * b];
    for (j, block) in design.blocks().iter().enumerate() {
        for &p in block {
            entries[p * b + j] = 1;
        }
    }
    IncidenceMatrix {
        rows: v,
        cols: b,
        entries,
    }
}

/// Starter blocks for a cyclic triple system over Z_v.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StarterSet {
    pub v: usize,
    pub lambda: usize,
    pub starters: Vec<Vec<usize>>,
    pub orbit_lengths: Vec<usize>,
}

impl StarterSet {
    pub fn new(v: usize, lambda: usize, starters: Vec<Vec<usize>>) -> Self {
        let orbit_lengths = starters.iter().map(|s| orbit_length(v, s)).collect();
        StarterSet {
            v,
            lambda,
            starters,
            orbit_lengths,
        }
    }

    pub fn has_short_orbit(&self) -> bool {
        self.orbit_lengths.iter().any(|&l| l < self.v)
    }
}

/// Length of the orbit of a block under x -> x+1 mod v.
pub fn orbit_length(v: usize, block: &[usize]) -> usize {
    let norm = |b: &[usize]| {
        let mut s: Vec<usize> = b.to_vec();
        s.sort_unstable();
        s
    };
    let base = norm(block);
    for t in 1..v {
        let shifted = norm(&block.iter().map(|&x| (x + t) % v).collect::<Vec<_>>());
        if shifted == base {
            return t;
        }
    }
    v
}

/// Develops each starter through Z_v and validates the result. Returns the
/// design with blocks in lexicographic order, plus the originating starter
/// index for every block.
pub fn develop_cyclic(starters: &StarterSet) -> Result<(Design, Vec<usize>), DesignError> {
    let v = starters.v;
    let mut tagged: Vec<(Vec<usize>, usize)> = Vec::new();
    for (oi, s) in starters.starters.iter().enumerate() {
        let len = starters.orbit_lengths[oi];
        for t in 0..len {
            let mut b: Vec<usize> = s.iter().map(|&x| (x + t) % v).collect();
            b.sort_unstable();
            tagged.push((b, oi));
        }
    }
    tagged.sort();
    let orbits: Vec<usize> = tagged.iter().map(|(_, o)| *o).collect();
    let blocks: Vec<Vec<usize>> = tagged.into_iter().map(|(b, _)| b).collect();
    match make_design(v, starters.lambda, 3, blocks) {
        Ok(d) => Ok((d, orbits)),
        Err(e) => Err(DesignError::NotADesign(e.to_string())),
    }
}

/// Outcome of a bounded combinatorial search. `Exhausted` certifies that the
/// whole space was searched; `Timeout` only means the budget ran out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchOutcome<T> {
    Found(T),
    Exhausted,
    Timeout,
}

impl<T> SearchOutcome<T> {
    pub fn found(self) -> Option<T> {
        match self {
            SearchOutcome::Found(t) => Some(t),
            _ => None,
        }
    }

    pub fn is_found(&self) -> bool {
        matches!(self, SearchOutcome::Found(_))
    }
}

/// Node budget for backtracking searches.
#[derive(Debug, Clone, Copy)]
pub struct Budget {
    pub max_nodes: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_nodes: 50_000_000,
        }
    }
}

struct DiffCand {
    /// Sorted multiset of covered differences: three for a full-orbit
    /// starter, one for the short-orbit starter {0, v/3, 2v/3}.
    diffs: Vec<usize>,
    /// Lexicographically least starter realizing them.
    starter: Vec<usize>,
}

struct StarterSearch<'a> {
    cands: Vec<DiffCand>,
    need: Vec<usize>,
    chosen: Vec<usize>,
    nodes: u64,
    budget: &'a Budget,
}

impl StarterSearch<'_> {
    /// Some(true) = found, Some(false) = subtree exhausted, None = budget hit.
    /// Branches on the smallest still-needed difference; when the same
    /// difference is targeted twice in a row, candidate indices must not
    /// decrease, so every candidate multiset is visited once.
    fn dfs(&mut self, last: Option<(usize, usize)>) -> Option<bool> {
        self.nodes += 1;
        if self.nodes > self.budget.max_nodes {
            return None;
        }
        let d = match self.need.iter().position(|&n| n > 0) {
            Some(d) => d,
            None => return Some(true),
        };
        let start = match last {
            Some((ld, ci)) if ld == d => ci,
            _ => 0,
        };
        for ci in start..self.cands.len() {
            if !self.cands[ci].diffs.contains(&d) {
                continue;
            }
            let fits = {
                let mut need = self.need.clone();
                let mut ok = true;
                for &cd in &self.cands[ci].diffs {
                    if need[cd] == 0 {
                        ok = false;
                        break;
                    }
                    need[cd] -= 1;
                }
                ok
            };
            if !fits {
                continue;
            }
            for i in 0..self.cands[ci].diffs.len() {
                let cd = self.cands[ci].diffs[i];
                self.need[cd] -= 1;
            }
            self.chosen.push(ci);
            match self.dfs(Some((d, ci))) {
                Some(true) => return Some(true),
                Some(false) => {}
                None => return None,
            }
            self.chosen.pop();
            for i in 0..self.cands[ci].diffs.len() {
                let cd = self.cands[ci].diffs[i];
                self.need[cd] += 1;
            }
        }
        Some(false)
    }
}

/// Searches for starter blocks whose development is a TS(v, lambda), by
/// backtracking over difference triples. With `require_full_orbits` the
/// short-orbit starter {0, v/3, 2v/3} is excluded, and every orbit of the
/// result has length v.
pub fn find_cyclic_starters(
    v: usize,
    lambda: usize,
    require_full_orbits: bool,
    budget: Budget,
) -> SearchOutcome<StarterSet> {
    if v < 3 {
        return SearchOutcome::Exhausted;
    }
    if lambda * (v - 1) % 2 != 0 {
        return SearchOutcome::Exhausted;
    }
    let half = v / 2;

    // Coverage targets per difference 1..=half. For even v the difference
    // v/2 has only v/2 point pairs and a full orbit covers each of them twice
    // per occurrence, so its occurrence target is lambda/2.
    let mut need = vec![0usize; half + 1];
    for d in 1..=half {
        if v % 2 == 0 && d == half {
            if lambda % 2 != 0 {
                return SearchOutcome::Exhausted;
            }
            need[d] = lambda / 2;
        } else {
            need[d] = lambda;
        }
    }

    // Candidate full-orbit difference triples, deduplicated by diff multiset.
    let mut cands: Vec<DiffCand> = Vec::new();
    let diff = |g: usize| g.min(v - g);
    for a in 1..v {
        for b in a + 1..v {
            let block = vec![0, a, b];
            if orbit_length(v, &block) != v {
                continue;
            }
            let mut ds = vec![diff(a), diff(b - a), diff(v - b)];
            ds.sort_unstable();
            if !cands.iter().any(|c| c.diffs == ds) {
                cands.push(DiffCand {
                    diffs: ds,
                    starter: block,
                });
            }
        }
    }
    if !require_full_orbits && v % 3 == 0 {
        cands.push(DiffCand {
            diffs: vec![v / 3],
            starter: vec![0, v / 3, 2 * v / 3],
        });
    }
    cands.sort_by(|p, q| p.diffs.cmp(&q.diffs).then(p.starter.cmp(&q.starter)));

    let mut search = StarterSearch {
        cands,
        need,
        chosen: Vec::new(),
        nodes: 0,
        budget: &budget,
    };
    match search.dfs(None) {
        Some(true) => {
            let mut starters: Vec<Vec<usize>> = search
                .chosen
                .iter()
                .map(|&ci| search.cands[ci].starter.clone())
                .collect();
            starters.sort();
            SearchOutcome::Found(StarterSet::new(v, lambda, starters))
        }
        Some(false) => SearchOutcome::Exhausted,
        None => SearchOutcome::Timeout,
    }
}

/// A partition of block indices into alpha-resolution classes: each class
/// contains every point exactly `alpha` times.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Resolution {
    pub alpha: usize,
    pub classes: Vec<Vec<usize>>,
}

impl Resolution {
    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }
}

/// Checks that `res` is a valid alpha-resolution of `design`: classes are
/// disjoint, exhaust all block indices, and each covers every point exactly
/// alpha times.
pub fn validate_resolution(design: &Design, res: &Resolution) -> Result<(), String> {
    let b = design.num_blocks();
    let mut seen = vec![false; b];
    for (ci, class) in res.classes.iter().enumerate() {
        let mut count = vec![0usize; design.v()];
        for &bi in class {
            if bi >= b {
                return Err(format!("class {ci} references block {bi} out of range"));
            }
            if seen[bi] {
                return Err(format!("block {bi} appears in more than one class"));
            }
            seen[bi] = true;
            for &p in design.block(bi) {
                count[p] += 1;
            }
        }
        if let Some(p) = (0..design.v()).find(|&p| count[p] != res.alpha) {
            return Err(format!(
                "class {ci} covers point {p} {} times, expected {}",
                count[p], res.alpha
            ));
        }
    }
    if let Some(bi) = (0..b).find(|&bi| !seen[bi]) {
        return Err(format!("block {bi} is in no class"));
    }
    Ok(())
}

/// Backtracking search for an alpha-resolution of a design.
pub fn find_resolution(design: &Design, alpha: usize, budget: Budget) -> SearchOutcome<Resolution> {
    let v = design.v();
    let b = design.num_blocks();
    let k = design.k();
    let r = design.replication();
    if alpha == 0 || r % alpha != 0 {
        return SearchOutcome::Exhausted;
    }
    let class_blocks = v * alpha / k;
    if v * alpha % k != 0 {
        return SearchOutcome::Exhausted;
    }
    let num_classes = r / alpha;
    if class_blocks * num_classes != b {
        return SearchOutcome::Exhausted;
    }

    // blocks_on[p] = indices of blocks containing p
    let mut blocks_on: Vec<Vec<usize>> = vec![Vec::new(); v];
    for (bi, block) in design.blocks().iter().enumerate() {
        for &p in block {
            blocks_on[p].push(bi);
        }
    }

    struct St<'a> {
        design: &'a Design,
        blocks_on: &'a [Vec<usize>],
        alpha: usize,
        used: Vec<bool>,
        classes: Vec<Vec<usize>>,
        current: Vec<usize>,
        count: Vec<usize>,
        in_class: usize,
        class_blocks: usize,
        nodes: u64,
        budget: Budget,
    }

    fn extend(st: &mut St) -> Option<bool> {
        st.nodes += 1;
        if st.nodes > st.budget.max_nodes {
            return None;
        }
        if st.in_class == st.class_blocks {
            let class = st.current.clone();
            st.classes.push(class);
            if st.classes.len() * st.class_blocks == st.design.num_blocks() {
                return Some(true);
            }
            st.current = Vec::new();
            st.in_class = 0;
            let saved_count = std::mem::replace(&mut st.count, vec![0; st.design.v()]);
            let r = extend(st);
            if r != Some(true) {
                let class = st.classes.pop().unwrap();
                st.current = class;
                st.in_class = st.current.len();
                st.count = saved_count;
            }
            return r;
        }
        // Symmetry break: classes are unordered, so the lowest unused block
        // can be forced to open the current class. Otherwise branch on the
        // lowest under-covered point.
        let cand: Vec<usize> = if st.in_class == 0 {
            let lb = (0..st.design.num_blocks())
                .find(|&bi| !st.used[bi])
                .expect("blocks remain while classes are incomplete");
            vec![lb]
        } else {
            let p = (0..st.design.v())
                .find(|&p| st.count[p] < st.alpha)
                .expect("incomplete class must have an under-covered point");
            st.blocks_on[p]
                .iter()
                .copied()
                .filter(|&bi| !st.used[bi])
                .collect()
        };
        for bi in cand {
            if st.used[bi] {
                continue;
            }
            let fits = st
                .design
                .block(bi)
                .iter()
                .all(|&q| st.count[q] < st.alpha);
            if !fits {
                continue;
            }
            st.used[bi] = true;
            for &q in st.design.block(bi) {
                st.count[q] += 1;
            }
            st.current.push(bi);
            st.in_class += 1;
            match extend(st) {
                Some(true) => return Some(true),
                Some(false) => {}
                None => return None,
            }
            st.in_class -= 1;
            st.current.pop();
            for &q in st.design.block(bi) {
                st.count[q] -= 1;
            }
            st.used[bi] = false;
        }
        Some(false)
    }

    let mut st = St {
        design,
        blocks_on: &blocks_on,
        alpha,
        used: vec![false; b],
        classes: Vec::new(),
        current: Vec::new(),
        count: vec![0; v],
        in_class: 0,
        class_blocks,
        nodes: 0,
        budget,
    };
    match extend(&mut st) {
        Some(true) => SearchOutcome::Found(Resolution {
            alpha,
            classes: st.classes,
        }),
        Some(false) => SearchOutcome::Exhausted,
        None => SearchOutcome::Timeout,
    }
}

/// A Hanani triple system of order 6u+1: a partial parallel class P_0 of u
/// disjoint blocks plus 3u almost-parallel classes, each missing exactly one
/// point of P_0's point set.
#[derive(Debug, Clone)]
pub struct HananiStructure {
    pub u: usize,
    pub design: Design,
    /// Block indices of the partial class P_0.
    pub partial_class: Vec<usize>,
    /// Block indices per almost-parallel class P_1..P_{3u}.
    pub almost_classes: Vec<Vec<usize>>,
    /// missing_point[i] is the point absent from almost_classes[i].
    pub missing_point: Vec<usize>,
}

impl HananiStructure {
    /// Checks all structural invariants, reporting the first failure.
    pub fn validate(&self) -> Result<(), String> {
        let v = self.design.v();
        let u = self.u;
        if v != 6 * u + 1 {
            return Err(format!("order {v} is not 6u+1 for u={u}"));
        }
        if self.partial_class.len() != u {
            return Err("partial class has wrong size".into());
        }
        if self.almost_classes.len() != 3 * u || self.missing_point.len() != 3 * u {
            return Err("wrong number of almost-parallel classes".into());
        }
        let mut seen = vec![false; self.design.num_blocks()];
        let mut p0_cover = vec![0usize; v];
        for &bi in &self.partial_class {
            if seen[bi] {
                return Err(format!("block {bi} reused"));
            }
            seen[bi] = true;
            for &p in self.design.block(bi) {
                p0_cover[p] += 1;
            }
        }
        if p0_cover.iter().any(|&c| c > 1) {
            return Err("P_0 blocks are not disjoint".into());
        }
        let p0_points: Vec<usize> = (0..v).filter(|&p| p0_cover[p] == 1).collect();
        if p0_points.len() != 3 * u {
            return Err("P_0 does not cover exactly 3u points".into());
        }
        let mut missing_seen = vec![false; v];
        for (i, class) in self.almost_classes.iter().enumerate() {
            let m = self.missing_point[i];
            if p0_cover[m] != 1 {
                return Err(format!("missing point {m} of class {i} is not a P_0 point"));
            }
            if missing_seen[m] {
                return Err(format!("point {m} is missed by two classes"));
            }
            missing_seen[m] = true;
            let mut cover = vec![0usize; v];
            for &bi in class {
                if seen[bi] {
                    return Err(format!("block {bi} reused"));
                }
                seen[bi] = true;
                for &p in self.design.block(bi) {
                    cover[p] += 1;
                }
            }
            for p in 0..v {
                let want = if p == m { 0 } else { 1 };
                if cover[p] != want {
                    return Err(format!(
                        "class {i} covers point {p} {} times, expected {want}",
                        cover[p]
                    ));
                }
            }
        }
        if let Some(bi) = (0..self.design.num_blocks()).find(|&bi| !seen[bi]) {
            return Err(format!("block {bi} is in no class"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_copies_of_full_block_is_ts32() {
        let d = make_design(3, 2, 3, vec![vec![0, 1, 2], vec![0, 1, 2]]).unwrap();
        assert_eq!(d.num_blocks(), 2);
        assert_eq!(d.replication(), 2);
    }

    #[test]
    fn undercovered_pair_is_rejected() {
        let err = make_design(4, 1, 3, vec![vec![0, 1, 2]]).unwrap_err();
        match err {
            DesignError::PairCoverage { pair, got, .. } => {
                assert_eq!(pair, (0, 3));
                assert_eq!(got, 0);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn malformed_blocks_are_rejected() {
        assert!(matches!(
            make_design(6, 1, 3, vec![vec![0, 1]]),
            Err(DesignError::MalformedBlock { .. })
        ));
        assert!(matches!(
            make_design(6, 1, 3, vec![vec![0, 1, 6]]),
            Err(DesignError::MalformedBlock { .. })
        ));
        assert!(matches!(
            make_design(6, 1, 3, vec![vec![0, 1, 1]]),
            Err(DesignError::MalformedBlock { .. })
        ));
    }

    #[test]
    fn admissibility_matches_gcd_form() {
        fn gcd(a: usize, b: usize) -> usize {
            if b == 0 {
                a
            } else {
                gcd(b, a % b)
            }
        }
        for v in 3..=40 {
            for lambda in 1..=15 {
                let want = lambda % gcd(v - 2, 6) == 0;
                assert_eq!(
                    check_admissible(v, lambda),
                    want,
                    "disagreement at v={v} lambda={lambda}"
                );
            }
        }
        assert!(check_admissible(7, 1));
        assert!(!check_admissible(5, 1));
        assert!(check_admissible(10, 2));
    }

    #[test]
    fn incidence_of_ts32_is_all_ones() {
        let d = make_design(3, 2, 3, vec![vec![0, 1, 2], vec![0, 1, 2]]).unwrap();
        let n = incidence_matrix(&d);
        assert_eq!((n.rows, n.cols), (3, 2));
        for i in 0..3 {
            for j in 0..2 {
                assert_eq!(n.get(i, j), 1);
            }
        }
    }

    #[test]
    fn fano_incidence_row_and_col_sums() {
        let s = StarterSet::new(7, 1, vec![vec![0, 1, 3]]);
        assert_eq!(s.orbit_lengths, vec![7]);
        let (d, orbits) = develop_cyclic(&s).unwrap();
        assert_eq!(d.num_blocks(), 7);
        assert!(orbits.iter().all(|&o| o == 0));
        let n = incidence_matrix(&d);
        for i in 0..7 {
            assert_eq!(n.row_sum(i), 3);
        }
        for j in 0..7 {
            assert_eq!(n.col_sum(j), 3);
        }
    }

    #[test]
    fn sts13_from_classic_starters() {
        let s = StarterSet::new(13, 1, vec![vec![0, 1, 4], vec![0, 2, 7]]);
        let (d, orbits) = develop_cyclic(&s).unwrap();
        assert_eq!(d.num_blocks(), 26);
        assert_eq!(orbits.iter().filter(|&&o| o == 0).count(), 13);
    }

    #[test]
    fn bad_starter_fails_development() {
        let s = StarterSet::new(9, 1, vec![vec![0, 1, 2]]);
        assert!(matches!(
            develop_cyclic(&s),
            Err(DesignError::NotADesign(_))
        ));
    }

    #[test]
    fn develop_is_translation_invariant() {
        let s = StarterSet::new(13, 1, vec![vec![0, 1, 4], vec![0, 2, 7]]);
        let (d, _) = develop_cyclic(&s).unwrap();
        let mut shifted: Vec<Vec<usize>> = d
            .blocks()
            .iter()
            .map(|b| {
                let mut s: Vec<usize> = b.iter().map(|&x| (x + 1) % 13).collect();
                s.sort_unstable();
                s
            })
            .collect();
        shifted.sort();
        let mut orig = d.blocks().to_vec();
        orig.sort();
        assert_eq!(shifted, orig);
    }

    #[test]
    fn starter_search_covers_differences() {
        // The difference-coverage oracle: develop and validate, then check
        // the claimed orbit structure.
        let s = find_cyclic_starters(13, 1, true, Budget::default())
            .found()
            .expect("cyclic STS(13) exists");
        assert_eq!(s.starters.len(), 2);
        assert!(!s.has_short_orbit());
        let (d, _) = develop_cyclic(&s).unwrap();
        assert_eq!(d.num_blocks(), 26);
    }

    #[test]
    fn no_full_orbit_cyclic_sts9() {
        // r = 4 is not divisible by 3, so exhaustive search must certify
        // nonexistence.
        assert_eq!(
            find_cyclic_starters(9, 1, true, Budget::default()),
            SearchOutcome::Exhausted
        );
    }

    #[test]
    fn cyclic_ts72_covers_each_difference_twice() {
        let s = find_cyclic_starters(7, 2, true, Budget::default())
            .found()
            .expect("cyclic TS(7,2) exists");
        let mut count = [0usize; 4];
        for st in &s.starters {
            let d = |g: usize| g.min(7 - g);
            count[d(st[1] - st[0])] += 1;
            count[d(st[2] - st[1])] += 1;
            count[d(7 - st[2])] += 1;
        }
        assert_eq!(&count[1..], &[2, 2, 2]);
        develop_cyclic(&s).unwrap();
    }

    #[test]
    fn resolution_of_sts9_has_four_parallel_classes() {
        let d = crate::constructions::sts9();
        let res = find_resolution(&d, 1, Budget::default())
            .found()
            .expect("STS(9) is resolvable");
        assert_eq!(res.num_classes(), 4);
        validate_resolution(&d, &res).unwrap();
    }

    #[test]
    fn cyclic_sts13_has_a_3_resolution() {
        let s = StarterSet::new(13, 1, vec![vec![0, 1, 4], vec![0, 2, 7]]);
        let (d, _) = develop_cyclic(&s).unwrap();
        let res = find_resolution(&d, 3, Budget::default())
            .found()
            .expect("full orbits are 3-resolution classes");
        assert_eq!(res.num_classes(), 2);
        validate_resolution(&d, &res).unwrap();
    }

    #[test]
    fn fano_has_no_parallel_class_resolution() {
        let s = StarterSet::new(7, 1, vec![vec![0, 1, 3]]);
        let (d, _) = develop_cyclic(&s).unwrap();
        assert_eq!(
            find_resolution(&d, 1, Budget::default()),
            SearchOutcome::Exhausted
        );
    }
}
