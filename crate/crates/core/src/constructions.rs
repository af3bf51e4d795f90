//! Flow-producing constructions: resolution labelings, Hanani labelings,
//! cyclic orbit labelings, fixed small systems, the lambda = 0 (mod 6) Latin
//! square construction, the modified Bose construction, the doubling
//! construction, and the existence driver that dispatches among them.

use std::collections::HashMap;
use std::error::Error;
use std::fmt;
use std::sync::{Mutex, OnceLock};

use crate::design::resolvable::{hanani_search, kts_search, rts2_one_rotational};
use crate::design::{
    find_cyclic_starters, make_design, validate_resolution, Budget, Design, HananiStructure,
    Resolution, SearchOutcome, StarterSet,
};
use crate::factorizations::{verify_null_factorization, WeightedFactorization};
use crate::flows::{search_flow, union_flows, verify_flow, FlowAssignment};
use crate::latin::{orthogonal_idempotent_pair, transversals_from_mate};
use crate::linalg::is_symmetric_noflow;

/// A design together with a certified zero-sum flow and the construction
/// that produced it.
#[derive(Debug, Clone)]
pub struct FlowedDesign {
    pub design: Design,
    pub flow: FlowAssignment,
    pub width: usize,
    pub provenance: String,
}

impl FlowedDesign {
    /// Wraps and certifies: the flow must verify against the design.
    pub fn certified(
        design: Design,
        flow: FlowAssignment,
        provenance: impl Into<String>,
    ) -> Result<FlowedDesign, ConstructionError> {
        let report = verify_flow(&design, &flow).map_err(|e| {
            ConstructionError::InvalidCertificate(format!("flow/design mismatch: {e}"))
        })?;
        if !report.valid {
            return Err(ConstructionError::InvalidCertificate(format!(
                "flow fails verification: {} point violations, {} zero weights",
                report.violations.len(),
                report.zero_weight_blocks.len()
            )));
        }
        let width = flow.width();
        Ok(FlowedDesign {
            design,
            flow,
            width,
            provenance: provenance.into(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConstructionError {
    /// A resolution labeling needs at least two classes.
    SingleClass,
    /// Cyclic labeling requires every orbit to be full.
    ShortOrbit,
    InvalidStructure(String),
    UnsupportedOrder(usize),
    InvalidCertificate(String),
    FactorCountMismatch { expected: usize, got: usize },
}

impl fmt::Display for ConstructionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstructionError::SingleClass => write!(f, "resolution has a single class"),
            ConstructionError::ShortOrbit => write!(f, "design has a short orbit"),
            ConstructionError::InvalidStructure(m) => write!(f, "invalid structure: {m}"),
            ConstructionError::UnsupportedOrder(v) => write!(f, "unsupported order {v}"),
            ConstructionError::InvalidCertificate(m) => write!(f, "invalid certificate: {m}"),
            ConstructionError::FactorCountMismatch { expected, got } => {
                write!(f, "expected {expected} factors, got {got}")
            }
        }
    }
}

impl Error for ConstructionError {}

/// Class labels summing to zero: alternating +1/-1 when the count is even;
/// +1, +1, -2 followed by alternating pairs when it is odd.
fn class_labels(count: usize) -> Vec<i64> {
    let mut labels = Vec::with_capacity(count);
    if count % 2 == 0 {
        for i in 0..count {
            labels.push(if i % 2 == 0 { 1 } else { -1 });
        }
    } else {
        labels.extend_from_slice(&[1, 1, -2]);
        for i in 3..count {
            labels.push(if i % 2 == 1 { 1 } else { -1 });
        }
    }
    debug_assert_eq!(labels.iter().sum::<i64>(), 0);
    labels
}

/// Lemma-style resolution labeling: every block of a class gets the class
/// label, so each point sums to alpha times the label total, which is zero.
/// Width 2 for an even number of classes, exactly 3 for an odd number.
pub fn label_alpha_resolvable(
    design: &Design,
    res: &Resolution,
) -> Result<FlowedDesign, ConstructionError> {
    validate_resolution(design, res).map_err(ConstructionError::InvalidStructure)?;
    let rho = res.num_classes();
    if rho < 2 {
        return Err(ConstructionError::SingleClass);
    }
    let labels = class_labels(rho);
    let mut weights = vec![0i64; design.num_blocks()];
    for (ci, class) in res.classes.iter().enumerate() {
        for &bi in class {
            weights[bi] = labels[ci];
        }
    }
    FlowedDesign::certified(
        design.clone(),
        FlowAssignment::new(weights),
        format!("alpha-resolvable rho={rho} alpha={}", res.alpha),
    )
}

/// Treats the full orbits of a cyclic triple system as 3-resolution classes
/// and applies the resolution labeling. `orbits[i]` tags the orbit of block
/// i, as produced by `develop_cyclic`.
pub fn label_cyclic_orbits(
    design: &Design,
    orbits: &[usize],
) -> Result<FlowedDesign, ConstructionError> {
    if orbits.len() != design.num_blocks() {
        return Err(ConstructionError::InvalidStructure(
            "orbit tags do not match block count".into(),
        ));
    }
    let num_orbits = orbits.iter().copied().max().map_or(0, |m| m + 1);
    let mut classes: Vec<Vec<usize>> = vec![Vec::new(); num_orbits];
    for (bi, &o) in orbits.iter().enumerate() {
        classes[o].push(bi);
    }
    if classes.iter().any(|c| c.len() != design.v()) {
        return Err(ConstructionError::ShortOrbit);
    }
    if num_orbits < 2 {
        return Err(ConstructionError::SingleClass);
    }
    let res = Resolution { alpha: 3, classes };
    let fd = label_alpha_resolvable(design, &res)?;
    Ok(FlowedDesign {
        provenance: format!("cyclic orbits rho={num_orbits}"),
        ..fd
    })
}

/// Hanani labeling: the partial class P_0 gets labels summing to zero
/// (alternating signs, with a -1,-1,+2 tail when u is odd), and each
/// almost-parallel class inherits the label of the P_0 block holding its
/// missing point.
pub fn label_hanani(h: &HananiStructure) -> Result<FlowedDesign, ConstructionError> {
    h.validate().map_err(ConstructionError::InvalidStructure)?;
    let u = h.u;
    if u < 3 {
        return Err(ConstructionError::InvalidStructure(format!(
            "Hanani systems need u >= 3, got {u}"
        )));
    }
    // Label B_1..B_u (1-based as in the construction).
    let mut p0_labels = Vec::with_capacity(u);
    if u % 2 == 0 {
        for i in 1..=u {
            p0_labels.push(if i % 2 == 1 { -1i64 } else { 1 });
        }
    } else {
        for i in 1..=u - 3 {
            p0_labels.push(if i % 2 == 1 { -1i64 } else { 1 });
        }
        p0_labels.extend_from_slice(&[-1, -1, 2]);
    }
    debug_assert_eq!(p0_labels.iter().sum::<i64>(), 0);

    let mut label_of_point: HashMap<usize, i64> = HashMap::new();
    for (j, &bi) in h.partial_class.iter().enumerate() {
        for &p in h.design.block(bi) {
            label_of_point.insert(p, p0_labels[j]);
        }
    }
    let mut weights = vec![0i64; h.design.num_blocks()];
    for (j, &bi) in h.partial_class.iter().enumerate() {
        weights[bi] = p0_labels[j];
    }
    for (i, class) in h.almost_classes.iter().enumerate() {
        let label = *label_of_point.get(&h.missing_point[i]).ok_or_else(|| {
            ConstructionError::InvalidStructure("missing point outside P_0".into())
        })?;
        for &bi in class {
            weights[bi] = label;
        }
    }
    FlowedDesign::certified(
        h.design.clone(),
        FlowAssignment::new(weights),
        format!("hanani u={u}"),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmallDesign {
    Ts62,
    Ts64,
    Ts66,
}

/// The unique TS(6,2) with its zero-sum 4-flow table.
pub fn ts62() -> (Design, FlowAssignment) {
    // Blocks and weights as tabulated, points renumbered to 0..5.
    let table: [([usize; 3], i64); 10] = [
        ([1, 2, 3], 1),
        ([1, 3, 4], -2),
        ([1, 4, 5], 2),
        ([1, 5, 6], -3),
        ([1, 2, 6], 2),
        ([2, 3, 5], -2),
        ([3, 4, 6], 1),
        ([2, 4, 5], 1),
        ([3, 5, 6], 2),
        ([2, 4, 6], -2),
    ];
    let blocks: Vec<Vec<usize>> = table
        .iter()
        .map(|(b, _)| b.iter().map(|&p| p - 1).collect())
        .collect();
    let weights: Vec<i64> = table.iter().map(|&(_, w)| w).collect();
    let design = make_design(6, 2, 3, blocks).expect("fixed TS(6,2) table");
    (design, FlowAssignment::new(weights))
}

/// Develops starter blocks over Z_5 with a fixed point, weighting every block
/// by its starter's value.
fn develop_z5_fixed(starters: &[(Vec<isize>, i64)], lambda: usize) -> (Design, FlowAssignment) {
    // Encoding: 0..4 are Z_5, 5 is the fixed point (written -1 in starters).
    let mut blocks = Vec::new();
    let mut weights = Vec::new();
    for (starter, w) in starters {
        for t in 0..5isize {
            let block: Vec<usize> = starter
                .iter()
                .map(|&x| {
                    if x < 0 {
                        5
                    } else {
                        ((x + t) % 5) as usize
                    }
                })
                .collect();
            blocks.push(block);
            weights.push(*w);
        }
    }
    let design = make_design(6, lambda, 3, blocks).expect("fixed small design");
    (design, FlowAssignment::new(weights))
}

/// TS(6,4) with a zero-sum 2-flow from four starters mod 5.
pub fn ts64() -> (Design, FlowAssignment) {
    develop_z5_fixed(
        &[
            (vec![-1, 0, 1], 1),
            (vec![-1, 0, 2], -1),
            (vec![0, 1, 2], 1),
            (vec![0, 2, 4], -1),
        ],
        4,
    )
}

/// TS(6,6) with a zero-sum 3-flow from six starters mod 5.
pub fn ts66() -> (Design, FlowAssignment) {
    develop_z5_fixed(
        &[
            (vec![-1, 0, 1], 2),
            (vec![-1, 0, 1], -1),
            (vec![-1, 0, 2], -1),
            (vec![0, 1, 2], 2),
            (vec![0, 2, 4], -1),
            (vec![0, 2, 4], -1),
        ],
        6,
    )
}

/// Fixed small systems with their tabulated flows.
pub fn small_fixed_design(name: SmallDesign) -> FlowedDesign {
    let (design, flow, tag) = match name {
        SmallDesign::Ts62 => {
            let (d, f) = ts62();
            (d, f, "fixed TS(6,2)")
        }
        SmallDesign::Ts64 => {
            let (d, f) = ts64();
            (d, f, "fixed TS(6,4)")
        }
        SmallDesign::Ts66 => {
            let (d, f) = ts66();
            (d, f, "fixed TS(6,6)")
        }
    };
    FlowedDesign::certified(design, flow, tag).expect("fixed tables are certified")
}

/// The unique STS(9) as the affine plane AG(2,3), blocks in class-major
/// order: the four direction classes are parallel classes.
pub fn sts9() -> Design {
    sts9_resolved().0
}

pub fn sts9_resolved() -> (Design, Resolution) {
    let pt = |a: usize, b: usize| a * 3 + b;
    let mut blocks = Vec::new();
    let mut classes = Vec::new();
    for (da, db) in [(0usize, 1usize), (1, 0), (1, 1), (1, 2)] {
        let start = blocks.len();
        let mut covered = vec![false; 9];
        for a in 0..3 {
            for b in 0..3 {
                if covered[pt(a, b)] {
                    continue;
                }
                let line: Vec<usize> = (0..3)
                    .map(|s| pt((a + s * da) % 3, (b + s * db) % 3))
                    .collect();
                for &p in &line {
                    covered[p] = true;
                }
                blocks.push(line);
            }
        }
        classes.push((start..blocks.len()).collect());
    }
    let design = make_design(9, 1, 3, blocks).expect("AG(2,3)");
    (design, Resolution { alpha: 1, classes })
}

/// Labels for a run of transversals (or vertical gadgets): +1/-1 in pairs,
/// with a +2,-1,-1 head when the count is odd.
fn paired_labels(count: usize) -> Vec<i64> {
    let mut labels = Vec::with_capacity(count);
    if count % 2 == 1 {
        labels.extend_from_slice(&[2, -1, -1]);
    }
    let mut sign = 1i64;
    while labels.len() < count {
        labels.push(sign);
        labels.push(-sign);
        sign = 1;
    }
    debug_assert_eq!(labels.iter().sum::<i64>(), 0);
    labels
}

/// TS(v, 6) from an idempotent Latin square with an orthogonal mate: blocks
/// (i, j, L(i,j)) for i != j, labeled constant on each off-diagonal
/// transversal with labels summing to zero. Every point lies in exactly
/// three blocks per transversal, so the flow is zero-sum. Width 2 for odd v,
/// 3 for even v.
pub fn ts_lambda6(v: usize) -> Result<FlowedDesign, ConstructionError> {
    if v < 3 {
        return Err(ConstructionError::UnsupportedOrder(v));
    }
    if v == 6 {
        return Ok(small_fixed_design(SmallDesign::Ts66));
    }
    let pair = orthogonal_idempotent_pair(v).map_err(|_| ConstructionError::UnsupportedOrder(v))?;
    let ts = transversals_from_mate(&pair);
    let labels = paired_labels(v - 1);
    let mut blocks = Vec::new();
    let mut weights = Vec::new();
    for (ti, t) in ts.transversals.iter().take(v - 1).enumerate() {
        for &(i, j) in t {
            debug_assert_ne!(i, j, "off-diagonal transversal hits the diagonal");
            blocks.push(vec![i, j, pair.first.get(i, j)]);
            weights.push(labels[ti]);
        }
    }
    let design = make_design(v, 6, 3, blocks)
        .map_err(|e| ConstructionError::InvalidCertificate(e.to_string()))?;
    FlowedDesign::certified(
        design,
        FlowAssignment::new(weights),
        format!("latin lambda6 v={v}"),
    )
}

/// Modified Bose construction: TS(v, 2) for v = 1 or 4 (mod 6) on
/// (Z_n x Z_3) + infinity, n = (v-1)/3. Mixed triples (x_i, y_i, L(x,y)_{i+1})
/// are labeled by transversal; each vertical column carries a TS(4,2) gadget
/// with weights (a, a, a, -2a). Width 3 when n is even, 5 when n is odd.
pub fn bose_modified(v: usize) -> Result<FlowedDesign, ConstructionError> {
    if v < 4 || (v % 6 != 1 && v % 6 != 4) || (v - 1) % 3 != 0 {
        return Err(ConstructionError::UnsupportedOrder(v));
    }
    let n = (v - 1) / 3;
    if n < 3 || n == 6 {
        return Err(ConstructionError::UnsupportedOrder(v));
    }
    let pair = orthogonal_idempotent_pair(n).map_err(|_| ConstructionError::UnsupportedOrder(v))?;
    let ts = transversals_from_mate(&pair);
    let pt = |x: usize, i: usize| 3 * x + i;
    let inf = 3 * n;
    let mut blocks = Vec::new();
    let mut weights = Vec::new();

    let labels = paired_labels(n - 1);
    for (ti, t) in ts.transversals.iter().take(n - 1).enumerate() {
        for &(x, y) in t {
            let z = pair.first.get(x, y);
            for i in 0..3 {
                blocks.push(vec![pt(x, i), pt(y, i), pt(z, (i + 1) % 3)]);
                weights.push(labels[ti]);
            }
        }
    }
    let alphas = paired_labels(n);
    for x in 0..n {
        let a = alphas[x];
        blocks.push(vec![inf, pt(x, 0), pt(x, 1)]);
        weights.push(a);
        blocks.push(vec![inf, pt(x, 1), pt(x, 2)]);
        weights.push(a);
        blocks.push(vec![inf, pt(x, 0), pt(x, 2)]);
        weights.push(a);
        blocks.push(vec![pt(x, 0), pt(x, 1), pt(x, 2)]);
        weights.push(-2 * a);
    }
    let design = make_design(v, 2, 3, blocks)
        .map_err(|e| ConstructionError::InvalidCertificate(e.to_string()))?;
    FlowedDesign::certified(
        design,
        FlowAssignment::new(weights),
        format!("modified bose v={v} n={n}"),
    )
}

/// The doubling construction: an STS(v) with a zero-sum flow plus a k-null
/// 1-factorization of K_{v+1} embed into an STS(2v+1) whose new triples take
/// their factor edge's weight. The embedded blocks keep their weights
/// unchanged.
pub fn double_sts(
    base: &FlowedDesign,
    wf: &WeightedFactorization,
) -> Result<FlowedDesign, ConstructionError> {
    let v = base.design.v();
    if base.design.lambda() != 1 || base.design.k() != 3 {
        return Err(ConstructionError::InvalidStructure(
            "doubling needs an STS(v) base".into(),
        ));
    }
    let host = &wf.host;
    if host.num_vertices() != v + 1 {
        return Err(ConstructionError::InvalidStructure(format!(
            "factorization is on K_{}, need K_{}",
            host.num_vertices(),
            v + 1
        )));
    }
    if !host.is_complete() {
        return Err(ConstructionError::InvalidStructure(
            "host graph is not complete".into(),
        ));
    }
    if wf.factors.len() != v {
        return Err(ConstructionError::FactorCountMismatch {
            expected: v,
            got: wf.factors.len(),
        });
    }
    let width = wf.max_abs_weight() as usize + 1;
    let report = verify_null_factorization(wf, width);
    if !report.is_valid() {
        return Err(ConstructionError::InvalidCertificate(format!(
            "not a {width}-null 1-factorization: {}",
            report.summary()
        )));
    }
    let base_report = verify_flow(&base.design, &base.flow)
        .map_err(|e| ConstructionError::InvalidCertificate(e.to_string()))?;
    if !base_report.valid {
        return Err(ConstructionError::InvalidCertificate(
            "base flow fails verification".into(),
        ));
    }
    let mut blocks: Vec<Vec<usize>> = base.design.blocks().to_vec();
    let mut weights = base.flow.weights.clone();
    for (i, factor) in wf.factors.iter().enumerate() {
        for &ei in factor {
            let (a, b) = wf.host.edge(ei);
            blocks.push(vec![i, v + a, v + b]);
            weights.push(wf.weights[ei]);
        }
    }
    let design = make_design(2 * v + 1, 1, 3, blocks)
        .map_err(|e| ConstructionError::InvalidCertificate(e.to_string()))?;
    FlowedDesign::certified(
        design,
        FlowAssignment::new(weights),
        format!("double of v={v} ({})", base.provenance),
    )
}

/// Caches for the instance searches the driver leans on; results are
/// deterministic for fixed parameters, so memoizing them is transparent.
fn kts_cached(v: usize) -> Option<(Design, Resolution)> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Option<(Design, Resolution)>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    guard
        .entry(v)
        .or_insert_with(|| kts_search(v, 0, 400))
        .clone()
}

fn rts2_cached(v: usize) -> Option<(Design, Resolution)> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Option<(Design, Resolution)>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    guard
        .entry(v)
        .or_insert_with(|| rts2_one_rotational(v))
        .clone()
}

/// A Hanani triple system for small u, from the bounded search.
pub fn hanani_instance(u: usize) -> Option<HananiStructure> {
    hanani_search(u, 0, 200)
}

/// Outcome of the existence driver.
#[derive(Debug, Clone)]
pub enum ExistsOutcome {
    Flowed(FlowedDesign),
    /// (v, lambda) is not admissible: no TS(v, lambda) exists at all.
    NoDesign,
    /// Certified: no zero-sum flow within the requested width exists for any
    /// TS(v, lambda) (symmetric cases), or for the unique design (TS(6,2)).
    NoFlowExists(String),
    /// No structured path applied and search gave out; lists what was tried.
    NotAchieved(Vec<String>),
}

/// Union of `copies` identical flowed designs.
fn self_union(fd: &FlowedDesign, copies: usize) -> Result<FlowedDesign, ConstructionError> {
    if copies == 1 {
        return Ok(fd.clone());
    }
    let refs: Vec<(&Design, &FlowAssignment)> =
        (0..copies).map(|_| (&fd.design, &fd.flow)).collect();
    let (design, flow) =
        union_flows(&refs).map_err(|e| ConstructionError::InvalidCertificate(e.to_string()))?;
    FlowedDesign::certified(
        design,
        flow,
        format!("{} x [{}]", copies, fd.provenance),
    )
}

fn union_pair(a: &FlowedDesign, b: &FlowedDesign) -> Result<FlowedDesign, ConstructionError> {
    let (design, flow) = union_flows(&[(&a.design, &a.flow), (&b.design, &b.flow)])
        .map_err(|e| ConstructionError::InvalidCertificate(e.to_string()))?;
    FlowedDesign::certified(
        design,
        flow,
        format!("[{}] + [{}]", a.provenance, b.provenance),
    )
}

/// TS(6, lambda) for even lambda >= 4 from the fixed tables.
fn ts6_lambda(lambda: usize) -> Result<FlowedDesign, ConstructionError> {
    let t4 = small_fixed_design(SmallDesign::Ts64);
    let t6 = small_fixed_design(SmallDesign::Ts66);
    if lambda % 4 == 0 {
        self_union(&t4, lambda / 4)
    } else if lambda >= 6 && (lambda - 6) % 4 == 0 {
        let base = self_union(&t4, (lambda - 6) / 4);
        match base {
            Ok(b) if lambda > 6 => union_pair(&b, &t6),
            _ => {
                if lambda == 6 {
                    Ok(t6)
                } else {
                    base
                }
            }
        }
    } else {
        Err(ConstructionError::UnsupportedOrder(6))
    }
}

/// Existence driver: dispatches over the structured constructions in
/// priority order (fixed tables, resolution labelings, cyclic labelings,
/// Latin/Bose constructions, generic search) and re-verifies whatever it
/// returns.
pub fn exists_with_flow(v: usize, lambda: usize, max_width: usize) -> ExistsOutcome {
    if !crate::design::check_admissible(v, lambda) {
        return ExistsOutcome::NoDesign;
    }
    let mut attempts: Vec<String> = Vec::new();

    // Certified nonexistence: the three symmetric-type systems have no
    // zero-sum flow of any width.
    if matches!((v, lambda), (3, 1) | (4, 2) | (7, 1)) {
        let design = match (v, lambda) {
            (3, 1) => make_design(3, 1, 3, vec![vec![0, 1, 2]]).unwrap(),
            (4, 2) => make_design(
                4,
                2,
                3,
                vec![vec![0, 1, 2], vec![0, 1, 3], vec![0, 2, 3], vec![1, 2, 3]],
            )
            .unwrap(),
            _ => {
                let s = StarterSet::new(7, 1, vec![vec![0, 1, 3]]);
                crate::design::develop_cyclic(&s).unwrap().0
            }
        };
        debug_assert!(is_symmetric_noflow(&design));
        return ExistsOutcome::NoFlowExists(format!(
            "TS({v},{lambda}) has a nonsingular incidence matrix; no zero-sum flow exists"
        ));
    }

    if (v, lambda) == (6, 2) {
        if max_width >= 4 {
            return ExistsOutcome::Flowed(small_fixed_design(SmallDesign::Ts62));
        }
        // The unique TS(6,2) has no zero-sum 3-flow; certify by exhaustion.
        let (d, _) = ts62();
        let unsat = (2..=max_width.max(3))
            .all(|w| search_flow(&d, w, Budget::default()) == SearchOutcome::Exhausted);
        debug_assert!(unsat);
        return ExistsOutcome::NoFlowExists(
            "the unique TS(6,2) admits no zero-sum 3-flow (exhaustive search)".into(),
        );
    }

    let finish = |fd: FlowedDesign| -> Result<FlowedDesign, String> {
        // Re-validate from scratch: design and flow are rebuilt through the
        // public validators.
        let design = make_design(
            fd.design.v(),
            fd.design.lambda(),
            fd.design.k(),
            fd.design.blocks().to_vec(),
        )
        .map_err(|e| e.to_string())?;
        let report = verify_flow(&design, &fd.flow).map_err(|e| e.to_string())?;
        if !report.valid {
            return Err("flow failed re-verification".into());
        }
        Ok(fd)
    };

    let try_path = |fd: Result<FlowedDesign, ConstructionError>,
                        label: &str,
                        attempts: &mut Vec<String>|
     -> Option<FlowedDesign> {
        match fd {
            Ok(fd) if fd.width <= max_width => match finish(fd) {
                Ok(fd) => Some(fd),
                Err(e) => {
                    attempts.push(format!("{label}: re-verification failed: {e}"));
                    None
                }
            },
            Ok(fd) => {
                attempts.push(format!("{label}: width {} exceeds {max_width}", fd.width));
                None
            }
            Err(e) => {
                attempts.push(format!("{label}: {e}"));
                None
            }
        }
    };

    // Fixed tables for v = 6.
    if v == 6 {
        if let Some(fd) = try_path(ts6_lambda(lambda), "fixed tables", &mut attempts) {
            return ExistsOutcome::Flowed(fd);
        }
    }

    // Trivial resolution for v = 3: every block is its own parallel class.
    if v == 3 {
        let blocks = vec![vec![0, 1, 2]; lambda];
        let design = make_design(3, lambda, 3, blocks).unwrap();
        let res = Resolution {
            alpha: 1,
            classes: (0..lambda).map(|i| vec![i]).collect(),
        };
        if let Some(fd) = try_path(
            label_alpha_resolvable(&design, &res),
            "trivial resolution",
            &mut attempts,
        ) {
            return ExistsOutcome::Flowed(fd);
        }
    }

    // Resolution labeling: KTS(v) copies for v = 3 (mod 6), one-rotational
    // resolvable TS(v,2) copies for v = 0 (mod 6) and even lambda.
    if v % 6 == 3 && v >= 9 {
        if let Some((kts, res)) = kts_cached(v) {
            let copies = lambda;
            let stacked = stack_resolvable(&kts, &res, copies);
            if let Some(fd) = try_path(stacked, "resolvable (KTS copies)", &mut attempts) {
                return ExistsOutcome::Flowed(fd);
            }
        } else {
            attempts.push("resolvable: KTS search failed".into());
        }
    }
    if v % 6 == 0 && v >= 12 && lambda % 2 == 0 {
        if let Some((rts, res)) = rts2_cached(v) {
            let stacked = stack_resolvable(&rts, &res, lambda / 2);
            if let Some(fd) = try_path(stacked, "resolvable (RTS(v,2) copies)", &mut attempts) {
                return ExistsOutcome::Flowed(fd);
            }
        } else {
            attempts.push("resolvable: RTS(v,2) search failed".into());
        }
    }

    // Cyclic labeling with full orbits.
    match find_cyclic_starters(v, lambda, true, Budget { max_nodes: 2_000_000 }) {
        SearchOutcome::Found(starters) => match crate::design::develop_cyclic(&starters) {
            Ok((design, orbits)) => {
                if let Some(fd) = try_path(
                    label_cyclic_orbits(&design, &orbits),
                    "cyclic orbits",
                    &mut attempts,
                ) {
                    return ExistsOutcome::Flowed(fd);
                }
            }
            Err(e) => attempts.push(format!("cyclic development failed: {e}")),
        },
        SearchOutcome::Exhausted => attempts.push("cyclic: no full-orbit starters".into()),
        SearchOutcome::Timeout => attempts.push("cyclic: starter search timed out".into()),
    }

    // lambda = 0 (mod 6): Latin square construction plus copies.
    if lambda % 6 == 0 {
        let path = ts_lambda6(v).and_then(|fd| self_union(&fd, lambda / 6));
        if let Some(fd) = try_path(path, "latin lambda6", &mut attempts) {
            return ExistsOutcome::Flowed(fd);
        }
    }

    // lambda = 2, 4 (mod 6): modified Bose base plus buildup by TS(v,4) and
    // TS(v, 6k) unions, following the lambda (mod 12) case analysis.
    if lambda % 6 == 2 || lambda % 6 == 4 {
        if lambda == 2 {
            if let Some(fd) = try_path(bose_modified(v), "modified bose", &mut attempts) {
                return ExistsOutcome::Flowed(fd);
            }
        } else {
            // lambda >= 4: TS(v,4) + TS(v, lambda-4), where lambda-4 = 0 (mod 6)
            // or another even case that recursion settles.
            let base4 = match find_cyclic_starters(v, 4, true, Budget { max_nodes: 2_000_000 }) {
                SearchOutcome::Found(starters) => crate::design::develop_cyclic(&starters)
                    .ok()
                    .and_then(|(d, o)| label_cyclic_orbits(&d, &o).ok()),
                _ => None,
            };
            if let Some(base4) = base4 {
                let rest = lambda - 4;
                let rest_fd = if rest == 0 {
                    Some(base4.clone())
                } else if rest % 6 == 0 {
                    ts_lambda6(v)
                        .and_then(|fd| self_union(&fd, rest / 6))
                        .ok()
                } else {
                    match exists_with_flow(v, rest, max_width) {
                        ExistsOutcome::Flowed(fd) => Some(fd),
                        _ => None,
                    }
                };
                if rest == 0 {
                    if let Some(fd) = try_path(Ok(base4), "cyclic TS(v,4)", &mut attempts) {
                        return ExistsOutcome::Flowed(fd);
                    }
                } else if let Some(rest_fd) = rest_fd {
                    if let Some(fd) = try_path(
                        union_pair(&base4, &rest_fd),
                        "TS(v,4) + buildup",
                        &mut attempts,
                    ) {
                        return ExistsOutcome::Flowed(fd);
                    }
                } else {
                    attempts.push("buildup: no TS(v, lambda-4) component".into());
                }
            } else {
                attempts.push("buildup: no cyclic TS(v,4)".into());
            }
        }
    }

    // Generic fallback: construct any TS(v, lambda) (short orbits allowed)
    // and run the flow search directly.
    match find_cyclic_starters(v, lambda, false, Budget { max_nodes: 2_000_000 }) {
        SearchOutcome::Found(starters) => match crate::design::develop_cyclic(&starters) {
            Ok((design, _)) => {
                for width in 2..=max_width {
                    match search_flow(&design, width, Budget { max_nodes: 20_000_000 }) {
                        SearchOutcome::Found(flow) => {
                            if let Some(fd) = try_path(
                                FlowedDesign::certified(
                                    design.clone(),
                                    flow,
                                    format!("search width={width} on cyclic TS({v},{lambda})"),
                                ),
                                "generic search",
                                &mut attempts,
                            ) {
                                return ExistsOutcome::Flowed(fd);
                            }
                        }
                        SearchOutcome::Exhausted => {
                            attempts.push(format!("search: width {width} UNSAT on this instance"))
                        }
                        SearchOutcome::Timeout => {
                            attempts.push(format!("search: width {width} timed out"));
                            break;
                        }
                    }
                }
            }
            Err(e) => attempts.push(format!("generic: development failed: {e}")),
        },
        _ => attempts.push("generic: no cyclic instance found".into()),
    }

    ExistsOutcome::NotAchieved(attempts)
}

/// lambda copies of a resolvable design: the concatenated classes form a
/// resolution of the union with lambda * rho classes.
fn stack_resolvable(
    base: &Design,
    res: &Resolution,
    copies: usize,
) -> Result<FlowedDesign, ConstructionError> {
    if copies == 0 {
        return Err(ConstructionError::InvalidStructure("zero copies".into()));
    }
    let b = base.num_blocks();
    let mut blocks = Vec::with_capacity(b * copies);
    let mut classes = Vec::with_capacity(res.num_classes() * copies);
    for c in 0..copies {
        blocks.extend(base.blocks().iter().cloned());
        for class in &res.classes {
            classes.push(class.iter().map(|&bi| bi + c * b).collect());
        }
    }
    let design = make_design(base.v(), base.lambda() * copies, base.k(), blocks)
        .map_err(|e| ConstructionError::InvalidCertificate(e.to_string()))?;
    let res = Resolution {
        alpha: res.alpha,
        classes,
    };
    let fd = label_alpha_resolvable(&design, &res)?;
    Ok(FlowedDesign {
        provenance: format!("{copies} stacked resolvable copies v={}", base.v()),
        ..fd
    })
}
