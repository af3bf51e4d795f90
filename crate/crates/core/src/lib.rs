//! Triple systems TS(v, lambda) with certified zero-sum flows.
//!
//! The crate constructs triple systems together with zero-sum n-flows
//! (nonzero integer block weights in {±1, ..., ±(n-1)} summing to zero
//! around every point), refutes their existence by exhaustive search and
//! exact linear algebra, and builds the weighted 1-factorizations that feed
//! the doubling construction STS(v) -> STS(2v+1).

pub mod design;
pub mod factorizations;
pub mod flows;
pub mod io;
pub mod latin;
pub mod linalg;

pub mod constructions;

pub use design::{
    check_admissible, develop_cyclic, find_cyclic_starters, find_resolution, incidence_matrix,
    make_design, Budget, Design, DesignError, HananiStructure, IncidenceMatrix, Resolution,
    SearchOutcome, StarterSet,
};
pub use flows::{
    min_flow_width, search_flow, union_flows, verify_flow, FlowAssignment, FlowError, FlowReport,
    WidthResult,
};
pub use linalg::{bound_flow, is_symmetric_noflow, nullspace_basis, BoundSolution, RationalMatrix};
