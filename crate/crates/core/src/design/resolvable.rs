//! Desk-scale searches for resolvable and Hanani triple systems. These build
//! concrete instances (design plus class structure together); the paper-level
//! existence theory is taken as given and everything returned here is
//! re-validated by the callers' verifiers.

use super::{
    make_design, validate_resolution, Design, HananiStructure, Resolution,
};

/// Deterministic splitmix64, used only to vary branch orderings between
/// restarts.
pub(crate) struct Rng(u64);

impl Rng {
    pub(crate) fn new(seed: u64) -> Self {
        Rng(seed.wrapping_add(0x9e3779b97f4a7c15))
    }

    pub(crate) fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    pub(crate) fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = (self.next() % (i as u64 + 1)) as usize;
            items.swap(i, j);
        }
    }
}

/// Pair-coverage bookkeeping for sequential class construction.
struct PairState {
    v: usize,
    /// Remaining multiplicity per unordered pair.
    left: Vec<u8>,
}

impl PairState {
    fn new(v: usize, lambda: u8) -> Self {
        PairState {
            v,
            left: vec![lambda; v * v],
        }
    }

    fn get(&self, a: usize, b: usize) -> u8 {
        self.left[a.min(b) * self.v + a.max(b)]
    }

    fn take_triple(&mut self, t: [usize; 3]) -> bool {
        let ok = self.get(t[0], t[1]) > 0 && self.get(t[0], t[2]) > 0 && self.get(t[1], t[2]) > 0;
        if !ok {
            return false;
        }
        for (a, b) in [(t[0], t[1]), (t[0], t[2]), (t[1], t[2])] {
            let idx = a.min(b) * self.v + a.max(b);
            self.left[idx] -= 1;
        }
        true
    }

    fn put_triple(&mut self, t: [usize; 3]) {
        for (a, b) in [(t[0], t[1]), (t[0], t[2]), (t[1], t[2])] {
            let idx = a.min(b) * self.v + a.max(b);
            self.left[idx] += 1;
        }
    }
}

/// Builds one parallel class on `points` (every point used once, all pairs
/// still available), appending triples to `out`. Fail-first backtracking:
/// branches on the active point with the fewest live partners; orderings
/// vary with the rng.
fn build_class(
    pairs: &mut PairState,
    active: &mut Vec<bool>,
    points: &[usize],
    out: &mut Vec<[usize; 3]>,
    rng: &mut Rng,
    nodes: &mut u64,
    max_nodes: u64,
) -> bool {
    *nodes += 1;
    if *nodes > max_nodes {
        return false;
    }
    // Point with the fewest live partners in the availability graph.
    let mut p = usize::MAX;
    let mut best_deg = usize::MAX;
    for &a in points.iter() {
        if !active[a] {
            continue;
        }
        let deg = points
            .iter()
            .filter(|&&q| active[q] && q != a && pairs.get(a, q) > 0)
            .count();
        if deg < best_deg {
            best_deg = deg;
            p = a;
            if deg <= 1 {
                break;
            }
        }
    }
    if p == usize::MAX {
        return true;
    }
    if best_deg < 2 {
        return false;
    }
    let mut cands: Vec<(usize, usize)> = Vec::new();
    for (qi, &q) in points.iter().enumerate() {
        if !active[q] || q == p || pairs.get(p, q) == 0 {
            continue;
        }
        for &s in points.iter().skip(qi + 1) {
            if !active[s] || s == p || s == q {
                continue;
            }
            if pairs.get(p, s) > 0 && pairs.get(q, s) > 0 {
                cands.push((q, s));
            }
        }
    }
    rng.shuffle(&mut cands);
    for (q, s) in cands {
        let t = [p, q, s];
        if !pairs.take_triple(t) {
            continue;
        }
        active[p] = false;
        active[q] = false;
        active[s] = false;
        out.push(t);
        if build_class(pairs, active, points, out, rng, nodes, max_nodes) {
            return true;
        }
        out.pop();
        active[p] = true;
        active[q] = true;
        active[s] = true;
        pairs.put_triple(t);
    }
    false
}

/// Full depth-first search over class-by-class construction: the search
/// backtracks across class boundaries, so a stuck endgame revises earlier
/// classes instead of giving up. `excluded[c]`, when present, is the point
/// class c must miss (Hanani almost-classes).
struct ClassesSearch<'a> {
    v: usize,
    pairs: PairState,
    excluded: Option<&'a [usize]>,
    num_classes: usize,
    active: Vec<bool>,
    classes: Vec<Vec<[usize; 3]>>,
    current: Vec<[usize; 3]>,
    rng: Rng,
    nodes: u64,
    max_nodes: u64,
}

impl ClassesSearch<'_> {
    fn activate_for(&mut self, level: usize) {
        self.active = vec![true; self.v];
        if let Some(ex) = self.excluded {
            self.active[ex[level]] = false;
        }
    }

    fn solve_level(&mut self, level: usize) -> bool {
        if level == self.num_classes {
            return true;
        }
        let saved_active = self.active.clone();
        let saved_current = std::mem::take(&mut self.current);
        self.activate_for(level);
        let found = self.class_dfs(level);
        if !found {
            self.active = saved_active;
            self.current = saved_current;
        }
        found
    }

    fn class_dfs(&mut self, level: usize) -> bool {
        self.nodes += 1;
        if self.nodes > self.max_nodes {
            return false;
        }
        // Fail-first: the active point with the fewest live partners.
        let mut p = usize::MAX;
        let mut best_deg = usize::MAX;
        for a in 0..self.v {
            if !self.active[a] {
                continue;
            }
            let deg = (0..self.v)
                .filter(|&q| self.active[q] && q != a && self.pairs.get(a, q) > 0)
                .count();
            if deg < best_deg {
                best_deg = deg;
                p = a;
                if deg <= 1 {
                    break;
                }
            }
        }
        if p == usize::MAX {
            // Class complete; recurse into the next level.
            let class = std::mem::take(&mut self.current);
            self.classes.push(class);
            if self.solve_level(level + 1) {
                return true;
            }
            let class = self.classes.pop().unwrap();
            self.current = class;
            return false;
        }
        if best_deg < 2 {
            return false;
        }
        let mut cands: Vec<(usize, usize)> = Vec::new();
        for q in 0..self.v {
            if !self.active[q] || q == p || self.pairs.get(p, q) == 0 {
                continue;
            }
            for s in q + 1..self.v {
                if !self.active[s] || s == p || s == q {
                    continue;
                }
                if self.pairs.get(p, s) > 0 && self.pairs.get(q, s) > 0 {
                    cands.push((q, s));
                }
            }
        }
        self.rng.shuffle(&mut cands);
        for (q, s) in cands {
            let t = [p, q, s];
            if !self.pairs.take_triple(t) {
                continue;
            }
            self.active[p] = false;
            self.active[q] = false;
            self.active[s] = false;
            self.current.push(t);
            if self.class_dfs(level) {
                return true;
            }
            self.current.pop();
            self.active[p] = true;
            self.active[q] = true;
            self.active[s] = true;
            self.pairs.put_triple(t);
        }
        false
    }
}

/// Kirkman triple system KTS(v) for v = 3 (mod 6): a resolvable STS(v) from
/// randomized cross-class backtracking. Returns the design (blocks in
/// class-major order) and its resolution.
pub fn kts_search(v: usize, seed: u64, restarts: u32) -> Option<(Design, Resolution)> {
    if v % 6 != 3 {
        return None;
    }
    let num_classes = (v - 1) / 2;
    let class_size = v / 3;
    for attempt in 0..restarts {
        let mut search = ClassesSearch {
            v,
            pairs: PairState::new(v, 1),
            excluded: None,
            num_classes,
            active: vec![false; v],
            classes: Vec::new(),
            current: Vec::new(),
            rng: Rng::new(seed.wrapping_add(attempt as u64).wrapping_mul(0x51ab3f)),
            nodes: 0,
            max_nodes: 3_000_000,
        };
        // First class is canonical; any KTS can be relabeled to contain it.
        let mut first: Vec<[usize; 3]> = Vec::new();
        for c in 0..class_size {
            let t = [3 * c, 3 * c + 1, 3 * c + 2];
            search.pairs.take_triple(t);
            first.push(t);
        }
        search.classes.push(first);
        if !search.solve_level(1) {
            continue;
        }
        let mut blocks = Vec::new();
        let mut res_classes = Vec::new();
        for class in &search.classes {
            let start = blocks.len();
            for t in class {
                blocks.push(t.to_vec());
            }
            res_classes.push((start..blocks.len()).collect());
        }
        let design = make_design(v, 1, 3, blocks).ok()?;
        let res = Resolution {
            alpha: 1,
            classes: res_classes,
        };
        debug_assert!(validate_resolution(&design, &res).is_ok());
        return Some((design, res));
    }
    None
}

/// One-rotational resolvable TS(v, 2) for v = 0 (mod 6), built over
/// Z_{v-1} + an infinity point. The base parallel class is a partition of
/// Z_{v-1} into triples plus one pair {a, b} (which becomes the block
/// {inf, a, b}); developing it by +1 gives v-1 parallel classes. The class
/// covers each difference exactly twice, which is exactly the TS(v, 2)
/// condition.
pub fn rts2_one_rotational(v: usize) -> Option<(Design, Resolution)> {
    if v % 6 != 0 || v < 6 {
        return None;
    }
    let m = v - 1;
    let half = (m - 1) / 2;
    let mut need = vec![2u8; half + 1];
    need[0] = 0;
    let diff = |a: usize, b: usize| {
        let d = if a > b { a - b } else { b - a };
        d.min(m - d)
    };

    struct St {
        m: usize,
        used: Vec<bool>,
        need: Vec<u8>,
        triples: Vec<[usize; 3]>,
        pair: Option<(usize, usize)>,
    }

    fn dfs(st: &mut St) -> bool {
        let p = match (0..st.m).find(|&p| !st.used[p]) {
            Some(p) => p,
            None => return true,
        };
        let m = st.m;
        let d = |a: usize, b: usize| {
            let x = if a > b { a - b } else { b - a };
            x.min(m - x)
        };
        // Try p in a triple.
        for q in p + 1..m {
            if st.used[q] || st.need[d(p, q)] == 0 {
                continue;
            }
            for s in q + 1..m {
                if st.used[s] {
                    continue;
                }
                let (d1, d2, d3) = (d(p, q), d(p, s), d(q, s));
                let mut n = st.need.clone();
                if n[d1] == 0 {
                    continue;
                }
                n[d1] -= 1;
                if n[d2] == 0 {
                    continue;
                }
                n[d2] -= 1;
                if n[d3] == 0 {
                    continue;
                }
                n[d3] -= 1;
                st.need = n;
                st.used[p] = true;
                st.used[q] = true;
                st.used[s] = true;
                st.triples.push([p, q, s]);
                if dfs(st) {
                    return true;
                }
                st.triples.pop();
                st.used[p] = false;
                st.used[q] = false;
                st.used[s] = false;
                st.need[d1] += 1;
                st.need[d2] += 1;
                st.need[d3] += 1;
            }
        }
        // Or p in the infinity pair.
        if st.pair.is_none() {
            for q in p + 1..m {
                if st.used[q] || st.need[d(p, q)] == 0 {
                    continue;
                }
                st.need[d(p, q)] -= 1;
                st.used[p] = true;
                st.used[q] = true;
                st.pair = Some((p, q));
                if dfs(st) {
                    return true;
                }
                st.pair = None;
                st.used[p] = false;
                st.used[q] = false;
                st.need[d(p, q)] += 1;
            }
        }
        false
    }

    let mut st = St {
        m,
        used: vec![false; m],
        need,
        triples: Vec::new(),
        pair: None,
    };
    if !dfs(&mut st) {
        return None;
    }
    let (a, b) = st.pair.expect("complete partition includes the pair");
    let inf = m;
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for t in 0..m {
        let start = blocks.len();
        blocks.push(vec![inf, (a + t) % m, (b + t) % m]);
        for tri in &st.triples {
            blocks.push(tri.iter().map(|&x| (x + t) % m).collect());
        }
        classes.push((start..blocks.len()).collect());
    }
    let design = make_design(v, 2, 3, blocks).ok()?;
    let res = Resolution { alpha: 1, classes };
    debug_assert!(validate_resolution(&design, &res).is_ok());
    let _ = diff;
    Some((design, res))
}

/// Hanani triple system of order 6u+1 by sequential class construction.
/// The partial class P_0 is pinned to the canonical partition of 0..3u-1 and
/// the almost-class missing points are taken in order, both without loss of
/// generality.
pub fn hanani_search(u: usize, seed: u64, restarts: u32) -> Option<HananiStructure> {
    if u < 3 {
        return None;
    }
    let v = 6 * u + 1;
    let points: Vec<usize> = (0..v).collect();
    for attempt in 0..restarts {
        let mut rng = Rng::new(seed.wrapping_add(attempt as u64).wrapping_mul(0x9d2c));
        let mut pairs = PairState::new(v, 1);
        let mut p0: Vec<[usize; 3]> = Vec::new();
        for c in 0..u {
            let t = [3 * c, 3 * c + 1, 3 * c + 2];
            pairs.take_triple(t);
            p0.push(t);
        }
        let mut almost: Vec<Vec<[usize; 3]>> = Vec::new();
        let mut ok = true;
        for missing in 0..3 * u {
            let mut active = vec![true; v];
            active[missing] = false;
            let mut out = Vec::with_capacity(2 * u);
            let mut nodes = 0u64;
            if build_class(
                &mut pairs,
                &mut active,
                &points,
                &mut out,
                &mut rng,
                &mut nodes,
                400_000,
            ) {
                almost.push(out);
            } else {
                ok = false;
                break;
            }
        }
        if !ok {
            continue;
        }
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        let mut partial_class = Vec::new();
        for t in &p0 {
            partial_class.push(blocks.len());
            blocks.push(t.to_vec());
        }
        let mut almost_classes = Vec::new();
        for class in &almost {
            let start = blocks.len();
            for t in class {
                blocks.push(t.to_vec());
            }
            almost_classes.push((start..blocks.len()).collect());
        }
        let design = make_design(v, 1, 3, blocks).ok()?;
        let h = HananiStructure {
            u,
            design,
            partial_class,
            almost_classes,
            missing_point: (0..3 * u).collect(),
        };
        if h.validate().is_ok() {
            return Some(h);
        }
    }
    None
}

/// Pasch switch: if blocks {a,b,c},{a,d,e},{f,b,d},{f,c,e} all exist, they
/// can be replaced by {a,b,d},{a,c,e},{f,b,c},{f,d,e} without changing pair
/// coverage. Returns the first switched design in scan order, used to build
/// non-isomorphic companions of known systems.
pub fn pasch_switch_first(design: &Design) -> Option<Design> {
    let b = design.num_blocks();
    let has = |t: [usize; 3]| -> Option<usize> {
        let mut s = t.to_vec();
        s.sort_unstable();
        design.blocks().iter().position(|blk| blk[..] == s[..])
    };
    for i in 0..b {
        let blk = design.block(i);
        for ai in 0..3 {
            let a = blk[ai];
            let others: Vec<usize> = blk.iter().copied().filter(|&x| x != a).collect();
            let (bb, c) = (others[0], others[1]);
            for j in 0..b {
                if j == i {
                    continue;
                }
                let other = design.block(j);
                if !other.contains(&a) || other.contains(&bb) || other.contains(&c) {
                    continue;
                }
                let rest: Vec<usize> = other.iter().copied().filter(|&x| x != a).collect();
                for (d, e) in [(rest[0], rest[1]), (rest[1], rest[0])] {
                    for f in 0..design.v() {
                        if [a, bb, c, d, e].contains(&f) {
                            continue;
                        }
                        if let (Some(i3), Some(i4)) = (has([f, bb, d]), has([f, c, e])) {
                            if i3 == i4 || [i, j].contains(&i3) || [i, j].contains(&i4) {
                                continue;
                            }
                            let mut blocks = design.blocks().to_vec();
                            let mut set = |idx: usize, t: [usize; 3]| {
                                let mut s = t.to_vec();
                                s.sort_unstable();
                                blocks[idx] = s;
                            };
                            set(i, [a, bb, d]);
                            set(j, [a, c, e]);
                            set(i3, [f, bb, c]);
                            set(i4, [f, d, e]);
                            if let Ok(d2) =
                                make_design(design.v(), design.lambda(), design.k(), blocks)
                            {
                                return Some(d2);
                            }
                        }
                    }
                }
            }
        }
    }
    None
}

/// Number of Pasch configurations (quadrilaterals) in a triple system: an
/// isomorphism invariant used to tell small systems apart.
pub fn pasch_count(design: &Design) -> usize {
    let b = design.num_blocks();
    let mut count = 0;
    // Unordered 4-subsets of blocks forming a Pasch: 4 blocks on 6 points,
    // each point in exactly 2 of them.
    for i in 0..b {
        for j in i + 1..b {
            for k in j + 1..b {
                for l in k + 1..b {
                    let mut occur = std::collections::HashMap::new();
                    for idx in [i, j, k, l] {
                        for &p in design.block(idx) {
                            *occur.entry(p).or_insert(0usize) += 1;
                        }
                    }
                    if occur.len() == 6 && occur.values().all(|&c| c == 2) {
                        count += 1;
                    }
                }
            }
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kts9_found_and_valid() {
        let (d, res) = kts_search(9, 0, 50).expect("KTS(9)");
        assert_eq!(res.num_classes(), 4);
        validate_resolution(&d, &res).unwrap();
    }

    #[test]
    fn kts15_found_and_valid() {
        let (d, res) = kts_search(15, 0, 200).expect("KTS(15)");
        assert_eq!(res.num_classes(), 7);
        assert_eq!(d.num_blocks(), 35);
        validate_resolution(&d, &res).unwrap();
    }

    #[test]
    fn rts2_order_12_valid() {
        let (d, res) = rts2_one_rotational(12).expect("RTS(12,2)");
        assert_eq!(d.lambda(), 2);
        assert_eq!(res.num_classes(), 11);
        validate_resolution(&d, &res).unwrap();
    }

    #[test]
    fn rts2_order_18_valid() {
        let (d, res) = rts2_one_rotational(18).expect("RTS(18,2)");
        assert_eq!(res.num_classes(), 17);
        validate_resolution(&d, &res).unwrap();
    }

    #[test]
    fn orbit_helper_consistency() {
        assert_eq!(crate::design::orbit_length(9, &[0, 3, 6]), 3);
        assert_eq!(crate::design::orbit_length(9, &[0, 1, 2]), 9);
    }
}
