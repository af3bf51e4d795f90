//! Idempotent Latin squares with orthogonal mates, and the transversal
//! decompositions they induce.
//!
//! The construction ladder: finite-field linear squares for prime-power
//! orders, MacNeish (Kronecker) products for composite orders with no
//! bare factor of 2, and a bounded self-orthogonal-square search for
//! n = 2 (mod 4). Order 6 has no orthogonal pair at all.

use std::error::Error;
use std::fmt;

use crate::design::Budget;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatinSquare {
    n: usize,
    grid: Vec<usize>,
}

impl LatinSquare {
    pub fn from_grid(n: usize, grid: Vec<usize>) -> Self {
        assert_eq!(grid.len(), n * n);
        LatinSquare { n, grid }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> usize {
        self.grid[i * self.n + j]
    }

    pub fn is_latin(&self) -> bool {
        let n = self.n;
        for i in 0..n {
            let mut row = vec![false; n];
            let mut col = vec![false; n];
            for j in 0..n {
                let a = self.get(i, j);
                let b = self.get(j, i);
                if a >= n || b >= n || row[a] || col[b] {
                    return false;
                }
                row[a] = true;
                col[b] = true;
            }
        }
        true
    }

    pub fn is_idempotent(&self) -> bool {
        (0..self.n).all(|i| self.get(i, i) == i)
    }

    /// Applies a symbol permutation.
    fn relabel(&self, perm: &[usize]) -> LatinSquare {
        LatinSquare {
            n: self.n,
            grid: self.grid.iter().map(|&s| perm[s]).collect(),
        }
    }

    /// Applies a column permutation: new(i, j) = old(i, cols[j]).
    fn permute_cols(&self, cols: &[usize]) -> LatinSquare {
        let n = self.n;
        let mut grid = vec![0; n * n];
        for i in 0..n {
            for j in 0..n {
                grid[i * n + j] = self.get(i, cols[j]);
            }
        }
        LatinSquare { n, grid }
    }

    pub fn transpose(&self) -> LatinSquare {
        let n = self.n;
        let mut grid = vec![0; n * n];
        for i in 0..n {
            for j in 0..n {
                grid[j * n + i] = self.get(i, j);
            }
        }
        LatinSquare { n, grid }
    }
}

/// Two Latin squares of the same order whose cellwise ordered pairs are all
/// distinct. Constructors keep `first` idempotent and `second` constant on
/// the diagonal (value n-1), so the diagonal is the last transversal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrthogonalPair {
    pub first: LatinSquare,
    pub second: LatinSquare,
}

pub fn verify_orthogonal(pair: &OrthogonalPair) -> bool {
    let n = pair.first.order();
    if pair.second.order() != n || !pair.first.is_latin() || !pair.second.is_latin() {
        return false;
    }
    let mut seen = vec![false; n * n];
    for i in 0..n {
        for j in 0..n {
            let key = pair.first.get(i, j) * n + pair.second.get(i, j);
            if seen[key] {
                return false;
            }
            seen[key] = true;
        }
    }
    true
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LatinError {
    /// No construction available: n < 3, n = 6, or the mate search for
    /// n = 2 (mod 4) exceeded its budget.
    Unsupported(usize),
}

impl fmt::Display for LatinError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LatinError::Unsupported(n) => {
                write!(f, "no idempotent square with orthogonal mate for order {n}")
            }
        }
    }
}

impl Error for LatinError {}

/// Small finite field GF(p^k) with precomputed tables.
struct Gf {
    q: usize,
    add: Vec<usize>,
    mul: Vec<usize>,
    neg: Vec<usize>,
}

impl Gf {
    fn new(p: usize, k: usize) -> Gf {
        let q = p.pow(k as u32);
        // Field elements are base-p digit strings of length k; find a monic
        // irreducible polynomial of degree k to reduce products.
        let irreducible = find_irreducible(p, k);
        let mut add = vec![0; q * q];
        let mut mul = vec![0; q * q];
        let mut neg = vec![0; q];
        let digits = |mut x: usize| -> Vec<usize> {
            let mut d = vec![0; k];
            for item in d.iter_mut() {
                *item = x % p;
                x /= p;
            }
            d
        };
        let undigits = |d: &[usize]| -> usize {
            let mut x = 0;
            for &di in d.iter().rev() {
                x = x * p + di;
            }
            x
        };
        for x in 0..q {
            let dx = digits(x);
            let dn: Vec<usize> = dx.iter().map(|&a| (p - a) % p).collect();
            neg[x] = undigits(&dn);
            for y in 0..q {
                let dy = digits(y);
                let ds: Vec<usize> = dx.iter().zip(&dy).map(|(&a, &b)| (a + b) % p).collect();
                add[x * q + y] = undigits(&ds);
                // polynomial product reduced by the irreducible
                let mut prod = vec![0usize; 2 * k];
                for (i, &a) in dx.iter().enumerate() {
                    for (j, &b) in dy.iter().enumerate() {
                        prod[i + j] = (prod[i + j] + a * b) % p;
                    }
                }
                for i in (k..2 * k).rev() {
                    let c = prod[i];
                    if c == 0 {
                        continue;
                    }
                    prod[i] = 0;
                    for (j, &ir) in irreducible.iter().enumerate().take(k) {
                        let idx = i - k + j;
                        prod[idx] = (prod[idx] + c * (p - ir) % p + p * p) % p;
                    }
                }
                mul[x * q + y] = undigits(&prod[..k]);
            }
        }
        Gf { q, add, mul, neg }
    }

    fn add(&self, x: usize, y: usize) -> usize {
        self.add[x * self.q + y]
    }

    fn sub(&self, x: usize, y: usize) -> usize {
        self.add(x, self.neg[y])
    }

    fn mul(&self, x: usize, y: usize) -> usize {
        self.mul[x * self.q + y]
    }
}

/// Coefficients c_0..c_{k-1} of a monic irreducible x^k + c_{k-1}x^{k-1} +
/// ... + c_0 over GF(p), found by exhaustive trial division.
fn find_irreducible(p: usize, k: usize) -> Vec<usize> {
    if k == 1 {
        return vec![0];
    }
    let total = p.pow(k as u32);
    'outer: for code in 0..total {
        let mut coeffs = Vec::with_capacity(k);
        let mut c = code;
        for _ in 0..k {
            coeffs.push(c % p);
            c /= p;
        }
        // full polynomial: coeffs + leading 1
        let mut full = coeffs.clone();
        full.push(1);
        // trial divide by every monic polynomial of degree 1..=k/2
        for d in 1..=k / 2 {
            let dt = p.pow(d as u32);
            for dc in 0..dt {
                let mut div = Vec::with_capacity(d + 1);
                let mut x = dc;
                for _ in 0..d {
                    div.push(x % p);
                    x /= p;
                }
                div.push(1);
                if poly_divides(&div, &full, p) {
                    continue 'outer;
                }
            }
        }
        return coeffs;
    }
    unreachable!("irreducible polynomials exist for every degree");
}

fn poly_divides(div: &[usize], poly: &[usize], p: usize) -> bool {
    let mut rem: Vec<usize> = poly.to_vec();
    let d = div.len() - 1;
    while rem.len() > d {
        let lead = *rem.last().unwrap();
        if lead != 0 {
            let shift = rem.len() - 1 - d;
            for i in 0..=d {
                let idx = shift + i;
                rem[idx] = (rem[idx] + lead * (p - div[i]) % p + p * p) % p;
            }
        }
        rem.pop();
    }
    rem.iter().all(|&c| c == 0)
}

fn prime_power(n: usize) -> Option<(usize, usize)> {
    for p in 2..=n {
        if n % p == 0 {
            let mut k = 0;
            let mut m = n;
            while m % p == 0 {
                m /= p;
                k += 1;
            }
            return if m == 1 { Some((p, k)) } else { None };
        }
    }
    None
}

/// Field-linear pair: first = a*x + (1-a)*y with a outside {0,1} is
/// idempotent; second = x - y is orthogonal to it in every field.
fn field_pair(p: usize, k: usize) -> OrthogonalPair {
    let gf = Gf::new(p, k);
    let q = gf.q;
    // a = 2 in GF(p) terms; for p = 2 the digit string 10 = the generator.
    let a = if p == 2 { 2.min(q - 1) } else { 2 % q };
    debug_assert!(a != 0 && a != 1);
    let one_minus_a = gf.sub(1, a);
    let mut first = vec![0; q * q];
    let mut second = vec![0; q * q];
    for x in 0..q {
        for y in 0..q {
            first[x * q + y] = gf.add(gf.mul(a, x), gf.mul(one_minus_a, y));
            second[x * q + y] = gf.sub(x, y);
        }
    }
    OrthogonalPair {
        first: LatinSquare::from_grid(q, first),
        second: LatinSquare::from_grid(q, second),
    }
}

/// Kronecker (MacNeish) product of two orthogonal pairs; preserves
/// idempotency of the first squares.
fn product_pair(a: &OrthogonalPair, b: &OrthogonalPair) -> OrthogonalPair {
    let (n1, n2) = (a.first.order(), b.first.order());
    let n = n1 * n2;
    let combine = |p: &LatinSquare, q: &LatinSquare| {
        let mut grid = vec![0; n * n];
        for i1 in 0..n1 {
            for i2 in 0..n2 {
                for j1 in 0..n1 {
                    for j2 in 0..n2 {
                        let row = i1 * n2 + i2;
                        let col = j1 * n2 + j2;
                        grid[row * n + col] = p.get(i1, j1) * n2 + q.get(i2, j2);
                    }
                }
            }
        }
        LatinSquare::from_grid(n, grid)
    };
    OrthogonalPair {
        first: combine(&a.first, &b.first),
        second: combine(&a.second, &b.second),
    }
}

/// Conjugates an orthogonal pair so the first square is idempotent and the
/// second is constant n-1 on the diagonal: the cells of one transversal are
/// moved to the diagonal by a column permutation, then symbols are relabeled.
fn canonicalize(pair: OrthogonalPair) -> OrthogonalPair {
    let n = pair.first.order();
    // Cells where second == second(0,0), one per row.
    let c = pair.second.get(0, 0);
    let mut col_of_row = vec![usize::MAX; n];
    for i in 0..n {
        for j in 0..n {
            if pair.second.get(i, j) == c {
                col_of_row[i] = j;
            }
        }
    }
    let first = pair.first.permute_cols(&col_of_row);
    let second = pair.second.permute_cols(&col_of_row);
    // first's diagonal is now a transversal; relabel symbols to make it
    // idempotent.
    let mut perm = vec![0; n];
    for i in 0..n {
        perm[first.get(i, i)] = i;
    }
    let first = first.relabel(&perm);
    // second is constant c on the diagonal; swap c with n-1.
    let mut swap: Vec<usize> = (0..n).collect();
    swap.swap(c, n - 1);
    let second = second.relabel(&swap);
    OrthogonalPair { first, second }
}

/// Bounded search for an idempotent self-orthogonal square of even order
/// n = m+1 (m odd), 1-rotational over Z_m plus a fixed point:
///
///   L(i,i) = i,  L(inf,inf) = inf,  L(i,inf) = i+a,  L(inf,j) = j+b,
///   L(i,i+d) = i + f(d),  with f(1) = inf.
///
/// Latin rows force {f(d)} = Z_m minus {0, a}; Latin columns force
/// {f(d)-d} = Z_m minus {0, b}. Orthogonality to the transpose reduces to
/// the deltas d + f(-d) - f(d) together with b-a and a-b covering the
/// nonzero residues exactly. Fixing the infinity difference at 1 loses no
/// generality: unit multipliers act transitively on it.
fn sols_search(n: usize, budget: Budget) -> Option<LatinSquare> {
    if n < 4 || n % 2 != 0 {
        return None;
    }
    let m = n - 1;

    struct St {
        m: usize,
        f: Vec<usize>,
        row_used: Vec<bool>,
        col_used: Vec<bool>,
        delta_used: Vec<bool>,
        a: usize,
        b: usize,
        nodes: u64,
        max_nodes: u64,
    }

    impl St {
        /// Assigns f over difference pairs {d, m-d}; closing a pair fixes
        /// the two deltas +-(d + f(m-d) - f(d)), which must be new.
        fn dfs(&mut self, pairs: &[(usize, usize)], idx: usize) -> Option<bool> {
            self.nodes += 1;
            if self.nodes > self.max_nodes {
                return None;
            }
            if idx == pairs.len() {
                return Some(true);
            }
            let m = self.m;
            let (d, md) = pairs[idx];
            for x in 1..m {
                if x == self.a || self.row_used[x] {
                    continue;
                }
                let colx = (x + m - d) % m;
                if colx == 0 || colx == self.b || self.col_used[colx] {
                    continue;
                }
                self.f[d] = x;
                self.row_used[x] = true;
                self.col_used[colx] = true;
                if md == d || md == 1 {
                    // Single assignment: the pair partner is the infinity
                    // difference (md == 1) and carries no delta constraint.
                    match self.dfs(pairs, idx + 1) {
                        Some(true) => return Some(true),
                        Some(false) => {}
                        None => return None,
                    }
                } else {
                    for y in 1..m {
                        if y == self.a || self.row_used[y] {
                            continue;
                        }
                        let coly = (y + m - md) % m;
                        if coly == 0 || coly == self.b || self.col_used[coly] {
                            continue;
                        }
                        let delta = (d + y + m - x) % m;
                        if delta == 0 || self.delta_used[delta] {
                            continue;
                        }
                        let neg = (m - delta) % m;
                        if self.delta_used[neg] {
                            continue;
                        }
                        self.f[md] = y;
                        self.row_used[y] = true;
                        self.col_used[coly] = true;
                        self.delta_used[delta] = true;
                        self.delta_used[neg] = true;
                        match self.dfs(pairs, idx + 1) {
                            Some(true) => return Some(true),
                            Some(false) => {}
                            None => return None,
                        }
                        self.delta_used[delta] = false;
                        self.delta_used[neg] = false;
                        self.col_used[coly] = false;
                        self.row_used[y] = false;
                        self.f[md] = usize::MAX;
                    }
                }
                self.col_used[colx] = false;
                self.row_used[x] = false;
                self.f[d] = usize::MAX;
            }
            Some(false)
        }
    }

    // f(1) = infinity; assign f(m-1) alone, then the remaining differences
    // in {d, m-d} pairs.
    let mut pairs: Vec<(usize, usize)> = vec![(m - 1, 1)];
    for d in 2..m {
        let md = m - d;
        if d < md {
            pairs.push((d, md));
        }
    }
    let mut nodes_spent = 0u64;
    // Solutions cluster at small shifts with a > b; try those first.
    let mut shift_pairs: Vec<(usize, usize)> = Vec::new();
    for a in 2..m {
        for b in 1..a {
            shift_pairs.push((a, b));
        }
    }
    for a in 1..m {
        for b in a + 1..m {
            shift_pairs.push((a, b));
        }
    }
    for (a, b) in shift_pairs {
        {
            let gap = (b + m - a) % m;
            let mut delta_used = vec![false; m];
            delta_used[gap] = true;
            delta_used[(m - gap) % m] = true;
            let mut st = St {
                m,
                f: vec![usize::MAX; m],
                row_used: vec![false; m],
                col_used: vec![false; m],
                delta_used,
                a,
                b,
                nodes: 0,
                max_nodes: budget.max_nodes.saturating_sub(nodes_spent),
            };
            match st.dfs(&pairs, 0) {
                Some(true) => {
                    let inf = m;
                    let mut grid = vec![usize::MAX; n * n];
                    for i in 0..m {
                        grid[i * n + i] = i;
                        grid[i * n + inf] = (i + a) % m;
                        grid[inf * n + i] = (i + b) % m;
                        for d in 1..m {
                            let j = (i + d) % m;
                            grid[i * n + j] = if d == 1 { inf } else { (i + st.f[d]) % m };
                        }
                    }
                    grid[inf * n + inf] = inf;
                    return Some(LatinSquare::from_grid(n, grid));
                }
                Some(false) => {
                    nodes_spent += st.nodes;
                }
                None => return None,
            }
        }
    }
    None
}

/// An idempotent Latin square of order n with an orthogonal mate, in
/// canonical form (mate constant n-1 on the diagonal). Exists for every
/// n >= 3 except 6; orders 2 (mod 4) above the search budget come back
/// `Unsupported`.
pub fn orthogonal_idempotent_pair(n: usize) -> Result<OrthogonalPair, LatinError> {
    orthogonal_idempotent_pair_with_budget(n, Budget::default())
}

pub fn orthogonal_idempotent_pair_with_budget(
    n: usize,
    budget: Budget,
) -> Result<OrthogonalPair, LatinError> {
    if n < 3 || n == 6 {
        return Err(LatinError::Unsupported(n));
    }
    if let Some((p, k)) = prime_power(n) {
        return Ok(canonicalize(field_pair(p, k)));
    }
    if n % 4 != 2 {
        // Coprime prime-power factorization with every factor >= 3.
        let mut rest = n;
        let mut factors: Vec<(usize, usize)> = Vec::new();
        let mut p = 2;
        while rest > 1 {
            if rest % p == 0 {
                let mut k = 0;
                while rest % p == 0 {
                    rest /= p;
                    k += 1;
                }
                factors.push((p, k));
            }
            p += 1;
        }
        let mut pair: Option<OrthogonalPair> = None;
        for (p, k) in factors {
            let f = field_pair(p, k);
            pair = Some(match pair {
                None => f,
                Some(acc) => product_pair(&acc, &f),
            });
        }
        return Ok(canonicalize(pair.expect("composite order has factors")));
    }
    // n = 2 (mod 4): search for an idempotent self-orthogonal square; its
    // transpose is the mate.
    match sols_search(n, budget) {
        Some(l) => {
            let mate = l.transpose();
            Ok(canonicalize(OrthogonalPair {
                first: l,
                second: mate,
            }))
        }
        None => Err(LatinError::Unsupported(n)),
    }
}

/// The transversal decomposition induced by an orthogonal mate: cell sets
/// T_i = positions of entry i in the second square.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransversalSet {
    pub transversals: Vec<Vec<(usize, usize)>>,
}

/// Extracts T_i from the mate. If the first square is idempotent and some
/// transversal is the diagonal, indices are relabeled so it comes last.
pub fn transversals_from_mate(pair: &OrthogonalPair) -> TransversalSet {
    let n = pair.first.order();
    let mut transversals: Vec<Vec<(usize, usize)>> = vec![Vec::with_capacity(n); n];
    for i in 0..n {
        for j in 0..n {
            transversals[pair.second.get(i, j)].push((i, j));
        }
    }
    if pair.first.is_idempotent() {
        let diag: Vec<(usize, usize)> = (0..n).map(|i| (i, i)).collect();
        if let Some(di) = transversals.iter().position(|t| {
            let mut s = t.clone();
            s.sort_unstable();
            s == diag
        }) {
            transversals.swap(di, n - 1);
        }
    }
    TransversalSet { transversals }
}

/// Test-grade check that every T_i hits each row, column, and entry of the
/// host square exactly once and the T_i partition all cells.
pub fn validate_transversals(square: &LatinSquare, ts: &TransversalSet) -> Result<(), String> {
    let n = square.order();
    if ts.transversals.len() != n {
        return Err(format!("expected {n} transversals"));
    }
    let mut cell_seen = vec![false; n * n];
    for (ti, t) in ts.transversals.iter().enumerate() {
        if t.len() != n {
            return Err(format!("transversal {ti} has {} cells", t.len()));
        }
        let mut rows = vec![false; n];
        let mut cols = vec![false; n];
        let mut entries = vec![false; n];
        for &(i, j) in t {
            if cell_seen[i * n + j] {
                return Err(format!("cell ({i},{j}) in two transversals"));
            }
            cell_seen[i * n + j] = true;
            let e = square.get(i, j);
            if rows[i] || cols[j] || entries[e] {
                return Err(format!("transversal {ti} repeats a row/col/entry"));
            }
            rows[i] = true;
            cols[j] = true;
            entries[e] = true;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_order5_pair_is_orthogonal_and_idempotent() {
        // first(i,j) = 3(i+j), second(i,j) = 2i+4j over Z_5.
        let mut f = vec![0; 25];
        let mut s = vec![0; 25];
        for i in 0..5 {
            for j in 0..5 {
                f[i * 5 + j] = 3 * (i + j) % 5;
                s[i * 5 + j] = (2 * i + 4 * j) % 5;
            }
        }
        let pair = OrthogonalPair {
            first: LatinSquare::from_grid(5, f),
            second: LatinSquare::from_grid(5, s),
        };
        assert!(pair.first.is_idempotent());
        assert!(pair.second.is_idempotent());
        assert!(verify_orthogonal(&pair));
    }

    #[test]
    fn cyclic_squares_mod5_are_orthogonal() {
        let mut f = vec![0; 25];
        let mut s = vec![0; 25];
        for i in 0..5 {
            for j in 0..5 {
                f[i * 5 + j] = (i + j) % 5;
                s[i * 5 + j] = (i + 2 * j) % 5;
            }
        }
        let pair = OrthogonalPair {
            first: LatinSquare::from_grid(5, f),
            second: LatinSquare::from_grid(5, s),
        };
        assert!(verify_orthogonal(&pair));
    }

    #[test]
    fn identical_squares_are_not_orthogonal() {
        let p = orthogonal_idempotent_pair(4).unwrap();
        let twin = OrthogonalPair {
            first: p.first.clone(),
            second: p.first.clone(),
        };
        assert!(!verify_orthogonal(&twin));
    }

    #[test]
    fn constructed_pairs_verify_for_supported_orders() {
        for n in [3usize, 4, 5, 7, 8, 9, 11, 12, 13, 15, 16, 20, 21, 25] {
            let pair = orthogonal_idempotent_pair(n).unwrap_or_else(|e| panic!("order {n}: {e}"));
            assert!(pair.first.is_latin(), "order {n} first not latin");
            assert!(pair.second.is_latin(), "order {n} second not latin");
            assert!(pair.first.is_idempotent(), "order {n} not idempotent");
            assert!(verify_orthogonal(&pair), "order {n} not orthogonal");
            assert!(
                (0..n).all(|i| pair.second.get(i, i) == n - 1),
                "order {n} mate diagonal not constant"
            );
        }
    }

    #[test]
    fn order_6_is_unsupported() {
        assert_eq!(
            orthogonal_idempotent_pair(6),
            Err(LatinError::Unsupported(6))
        );
    }

    #[test]
    fn transversals_partition_and_end_with_diagonal() {
        for n in [3usize, 4, 5, 7, 9] {
            let pair = orthogonal_idempotent_pair(n).unwrap();
            let ts = transversals_from_mate(&pair);
            validate_transversals(&pair.first, &ts).unwrap();
            let mut last = ts.transversals[n - 1].clone();
            last.sort_unstable();
            let diag: Vec<(usize, usize)> = (0..n).map(|i| (i, i)).collect();
            assert_eq!(last, diag, "order {n}");
        }
    }

    #[test]
    fn sols_search_finds_order_10() {
        let pair = orthogonal_idempotent_pair(10).expect("order 10 pair");
        assert!(pair.first.is_idempotent());
        assert!(verify_orthogonal(&pair));
    }
}
