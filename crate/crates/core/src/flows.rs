//! Zero-sum flows of designs: representation, exact verification, exhaustive
//! search, and unions.

use std::error::Error;
use std::fmt;

use crate::design::{incidence_matrix, make_design, Budget, Design, SearchOutcome};

/// Nonzero integer block weights, index-aligned with `Design::blocks`.
/// A zero-sum n-flow has entries in {±1, ..., ±(n-1)} and zero weight sum
/// around every point; we call n the width.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowAssignment {
    pub weights: Vec<i64>,
}

impl FlowAssignment {
    pub fn new(weights: Vec<i64>) -> Self {
        FlowAssignment { weights }
    }

    /// Width n = 1 + max |entry|.
    pub fn width(&self) -> usize {
        1 + self.weights.iter().map(|w| w.unsigned_abs()).max().unwrap_or(0) as usize
    }

    pub fn negated(&self) -> Self {
        FlowAssignment {
            weights: self.weights.iter().map(|w| -w).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FlowError {
    LengthMismatch { weights: usize, blocks: usize },
    MismatchedPointSet { expected: (usize, usize), got: (usize, usize) },
    InvalidInputFlow { index: usize, reason: String },
}

impl fmt::Display for FlowError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FlowError::LengthMismatch { weights, blocks } => {
                write!(f, "{weights} weights for {blocks} blocks")
            }
            FlowError::MismatchedPointSet { expected, got } => write!(
                f,
                "expected all designs on v={} k={}, got v={} k={}",
                expected.0, expected.1, got.0, got.1
            ),
            FlowError::InvalidInputFlow { index, reason } => {
                write!(f, "input flow {index} is invalid: {reason}")
            }
        }
    }
}

impl Error for FlowError {}

/// Per-point audit of a flow candidate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowReport {
    pub valid: bool,
    pub width: usize,
    /// Points with nonzero weight sum, or blocks with zero weight
    /// (reported as (usize::MAX, block index) would be opaque; zero weights
    /// make the whole report invalid and are listed in `zero_weight_blocks`).
    pub violations: Vec<(usize, i64)>,
    pub zero_weight_blocks: Vec<usize>,
}

/// Computes exact per-point weight sums. Valid iff every point sums to zero
/// and every weight is nonzero.
pub fn verify_flow(design: &Design, flow: &FlowAssignment) -> Result<FlowReport, FlowError> {
    if flow.weights.len() != design.num_blocks() {
        return Err(FlowError::LengthMismatch {
            weights: flow.weights.len(),
            blocks: design.num_blocks(),
        });
    }
    let mut sums = vec![0i64; design.v()];
    for (bi, block) in design.blocks().iter().enumerate() {
        for &p in block {
            sums[p] += flow.weights[bi];
        }
    }
    let violations: Vec<(usize, i64)> = sums
        .iter()
        .enumerate()
        .filter(|(_, &s)| s != 0)
        .map(|(p, &s)| (p, s))
        .collect();
    let zero_weight_blocks: Vec<usize> = flow
        .weights
        .iter()
        .enumerate()
        .filter(|(_, &w)| w == 0)
        .map(|(i, _)| i)
        .collect();
    Ok(FlowReport {
        valid: violations.is_empty() && zero_weight_blocks.is_empty(),
        width: flow.width(),
        violations,
        zero_weight_blocks,
    })
}

/// Depth-first exhaustive search for a zero-sum flow of the given width.
///
/// Blocks are decided fail-first (points with fewest undecided blocks first);
/// values are tried in ascending order, so the witness is deterministic.
/// `Exhausted` is a certified UNSAT: the whole assignment space was pruned or
/// visited.
pub fn search_flow(design: &Design, width: usize, budget: Budget) -> SearchOutcome<FlowAssignment> {
    assert!(width >= 2, "width must be at least 2");
    let b = design.num_blocks();
    let v = design.v();
    let wmax = (width - 1) as i64;

    let mut values: Vec<i64> = Vec::new();
    for x in -wmax..=wmax {
        if x != 0 {
            values.push(x);
        }
    }

    let mut blocks_on: Vec<Vec<usize>> = vec![Vec::new(); v];
    for (bi, block) in design.blocks().iter().enumerate() {
        for &p in block {
            blocks_on[p].push(bi);
        }
    }

    struct St<'a> {
        design: &'a Design,
        blocks_on: &'a [Vec<usize>],
        values: &'a [i64],
        weights: Vec<i64>,
        decided: Vec<bool>,
        undecided: Vec<usize>,
        sums: Vec<i64>,
        wmax: i64,
        parity: bool,
        nodes: u64,
        budget: Budget,
    }

    impl St<'_> {
        fn feasible_point(&self, p: usize) -> bool {
            let m = self.undecided[p] as i64;
            let s = self.sums[p];
            if m == 0 {
                return s == 0;
            }
            if s.abs() > m * self.wmax {
                return false;
            }
            // Width 2 leaves only odd values, so the parity is forced.
            if self.parity && (s + m) % 2 != 0 {
                return false;
            }
            true
        }

        fn dfs(&mut self, remaining: usize) -> Option<bool> {
            self.nodes += 1;
            if self.nodes > self.budget.max_nodes {
                return None;
            }
            if remaining == 0 {
                return Some(true);
            }
            // Fail-first: branch on a block of the point with the fewest
            // undecided blocks.
            let p = (0..self.design.v())
                .filter(|&p| self.undecided[p] > 0)
                .min_by_key(|&p| self.undecided[p])
                .expect("undecided blocks imply an undecided point");
            let bi = *self.blocks_on[p]
                .iter()
                .find(|&&bi| !self.decided[bi])
                .expect("point counted as undecided");
            for vi in 0..self.values.len() {
                let val = self.values[vi];
                self.decided[bi] = true;
                self.weights[bi] = val;
                let mut ok = true;
                for &q in self.design.block(bi) {
                    self.sums[q] += val;
                    self.undecided[q] -= 1;
                }
                for &q in self.design.block(bi) {
                    if !self.feasible_point(q) {
                        ok = false;
                        break;
                    }
                }
                if ok {
                    match self.dfs(remaining - 1) {
                        Some(true) => return Some(true),
                        Some(false) => {}
                        None => return None,
                    }
                }
                for &q in self.design.block(bi) {
                    self.sums[q] -= val;
                    self.undecided[q] += 1;
                }
                self.decided[bi] = false;
                self.weights[bi] = 0;
            }
            Some(false)
        }
    }

    let mut st = St {
        design,
        blocks_on: &blocks_on,
        values: &values,
        weights: vec![0; b],
        decided: vec![false; b],
        undecided: design.blocks().iter().fold(vec![0usize; v], |mut acc, blk| {
            for &p in blk {
                acc[p] += 1;
            }
            acc
        }),
        sums: vec![0; v],
        wmax,
        parity: width == 2,
        nodes: 0,
        budget,
    };
    match st.dfs(b) {
        Some(true) => SearchOutcome::Found(FlowAssignment::new(st.weights)),
        Some(false) => SearchOutcome::Exhausted,
        None => SearchOutcome::Timeout,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WidthResult {
    Found { width: usize, flow: FlowAssignment },
    NoFlowUpTo(usize),
    Timeout,
}

/// Least width n <= max_width admitting a zero-sum n-flow, with witness.
pub fn min_flow_width(design: &Design, max_width: usize, budget: Budget) -> WidthResult {
    for width in 2..=max_width {
        match search_flow(design, width, budget) {
            SearchOutcome::Found(flow) => return WidthResult::Found { width, flow },
            SearchOutcome::Exhausted => {}
            SearchOutcome::Timeout => return WidthResult::Timeout,
        }
    }
    WidthResult::NoFlowUpTo(max_width)
}

/// Concatenates designs on a common point set into a TS(v, sum of lambdas),
/// carrying the flows along. The result width is the max of the input widths.
pub fn union_flows(
    inputs: &[(&Design, &FlowAssignment)],
) -> Result<(Design, FlowAssignment), FlowError> {
    assert!(!inputs.is_empty(), "union of zero designs");
    let (v, k) = (inputs[0].0.v(), inputs[0].0.k());
    let mut lambda = 0;
    let mut blocks = Vec::new();
    let mut weights = Vec::new();
    for (i, (d, f)) in inputs.iter().enumerate() {
        if d.v() != v || d.k() != k {
            return Err(FlowError::MismatchedPointSet {
                expected: (v, k),
                got: (d.v(), d.k()),
            });
        }
        let report = verify_flow(d, f)?;
        if !report.valid {
            return Err(FlowError::InvalidInputFlow {
                index: i,
                reason: format!(
                    "{} point violations, {} zero weights",
                    report.violations.len(),
                    report.zero_weight_blocks.len()
                ),
            });
        }
        lambda += d.lambda();
        blocks.extend(d.blocks().iter().cloned());
        weights.extend(f.weights.iter().copied());
    }
    let design = make_design(v, lambda, k, blocks).map_err(|e| FlowError::InvalidInputFlow {
        index: 0,
        reason: format!("union does not validate: {e}"),
    })?;
    Ok((design, FlowAssignment::new(weights)))
}

/// Brute-force oracle: enumerates every assignment in {±1..±(width-1)}^b.
/// Test-grade; only sane for b <= 12 or so.
pub fn brute_force_flow(design: &Design, width: usize) -> Option<FlowAssignment> {
    let b = design.num_blocks();
    let mut values: Vec<i64> = Vec::new();
    let wmax = (width - 1) as i64;
    for x in -wmax..=wmax {
        if x != 0 {
            values.push(x);
        }
    }
    let m = values.len();
    let total = (m as u64).checked_pow(b as u32).expect("oracle too large");
    let n = incidence_matrix(design);
    let mut weights = vec![0i64; b];
    for code in 0..total {
        let mut c = code;
        for w in weights.iter_mut() {
            *w = values[(c % m as u64) as usize];
            c /= m as u64;
        }
        if n.apply(&weights).iter().all(|&s| s == 0) {
            return Some(FlowAssignment::new(weights));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::StarterSet;

    fn ts32() -> Design {
        make_design(3, 2, 3, vec![vec![0, 1, 2], vec![0, 1, 2]]).unwrap()
    }

    #[test]
    fn ts32_plus_minus_is_valid_width_2() {
        let d = ts32();
        let report = verify_flow(&d, &FlowAssignment::new(vec![1, -1])).unwrap();
        assert!(report.valid);
        assert_eq!(report.width, 2);
    }

    #[test]
    fn all_ones_is_invalid_with_sum_r() {
        let d = crate::constructions::ts62().0;
        let report = verify_flow(&d, &FlowAssignment::new(vec![1; 10])).unwrap();
        assert!(!report.valid);
        assert_eq!(report.violations.len(), 6);
        assert!(report.violations.iter().all(|&(_, s)| s == 5));
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let d = ts32();
        assert!(matches!(
            verify_flow(&d, &FlowAssignment::new(vec![1])),
            Err(FlowError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn ts62_has_no_3_flow_but_a_4_flow() {
        let d = crate::constructions::ts62().0;
        assert_eq!(
            search_flow(&d, 3, Budget::default()),
            SearchOutcome::Exhausted
        );
        let f = search_flow(&d, 4, Budget::default()).found().unwrap();
        assert!(verify_flow(&d, &f).unwrap().valid);
        assert!(f.width() <= 4);
    }

    #[test]
    fn fano_has_no_flow_of_small_width() {
        let s = StarterSet::new(7, 1, vec![vec![0, 1, 3]]);
        let (d, _) = crate::design::develop_cyclic(&s).unwrap();
        for width in 2..=5 {
            assert_eq!(
                search_flow(&d, width, Budget::default()),
                SearchOutcome::Exhausted,
                "width {width}"
            );
        }
    }

    #[test]
    fn sts9_has_a_3_flow() {
        let d = crate::constructions::sts9();
        let f = search_flow(&d, 3, Budget::default()).found().unwrap();
        assert!(verify_flow(&d, &f).unwrap().valid);
    }

    #[test]
    fn min_width_of_ts62_is_4() {
        let d = crate::constructions::ts62().0;
        match min_flow_width(&d, 6, Budget::default()) {
            WidthResult::Found { width, flow } => {
                assert_eq!(width, 4);
                assert!(verify_flow(&d, &flow).unwrap().valid);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn min_width_of_fano_is_unbounded() {
        let s = StarterSet::new(7, 1, vec![vec![0, 1, 3]]);
        let (d, _) = crate::design::develop_cyclic(&s).unwrap();
        assert_eq!(
            min_flow_width(&d, 10, Budget::default()),
            WidthResult::NoFlowUpTo(10)
        );
    }

    #[test]
    fn union_of_two_ts32_copies() {
        let d = ts32();
        let f = FlowAssignment::new(vec![1, -1]);
        let (u, uf) = union_flows(&[(&d, &f), (&d, &f)]).unwrap();
        assert_eq!(u.lambda(), 4);
        assert_eq!(u.num_blocks(), 4);
        assert!(verify_flow(&u, &uf).unwrap().valid);
        assert_eq!(uf.width(), 2);
    }

    #[test]
    fn union_rejects_mismatched_point_sets() {
        let d1 = ts32();
        let f1 = FlowAssignment::new(vec![1, -1]);
        let d2 = make_design(4, 2, 3, vec![vec![0, 1, 2], vec![0, 1, 3], vec![0, 2, 3], vec![1, 2, 3]])
            .unwrap();
        let f2 = FlowAssignment::new(vec![1, 1, -1, -1]);
        assert!(matches!(
            union_flows(&[(&d1, &f1), (&d2, &f2)]),
            Err(FlowError::MismatchedPointSet { .. })
        ));
    }

    #[test]
    fn union_rejects_invalid_input_flow() {
        let d = ts32();
        let bad = FlowAssignment::new(vec![1, 1]);
        assert!(matches!(
            union_flows(&[(&d, &bad)]),
            Err(FlowError::InvalidInputFlow { .. })
        ));
    }

    #[test]
    fn negation_preserves_validity() {
        let d = crate::constructions::ts62().0;
        let f = search_flow(&d, 4, Budget::default()).found().unwrap();
        assert!(verify_flow(&d, &f.negated()).unwrap().valid);
    }

    #[test]
    fn search_matches_brute_force_on_small_designs() {
        // SAT/UNSAT equivalence against full enumeration.
        let designs = vec![
            ts32(),
            make_design(4, 2, 3, vec![vec![0, 1, 2], vec![0, 1, 3], vec![0, 2, 3], vec![1, 2, 3]])
                .unwrap(),
        ];
        for d in &designs {
            for width in 2..=3 {
                let brute = brute_force_flow(d, width);
                let search = search_flow(d, width, Budget::default());
                match (brute, search) {
                    (Some(_), SearchOutcome::Found(f)) => {
                        assert!(verify_flow(d, &f).unwrap().valid)
                    }
                    (None, SearchOutcome::Exhausted) => {}
                    (b, s) => panic!("oracle disagreement: brute={b:?} search={s:?}"),
                }
            }
        }
    }
}
