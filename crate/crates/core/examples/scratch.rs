// Instrumented copy of hanani_search to find where it sticks.
use tsflow::design::make_design;

struct Rng(u64);
impl Rng {
    fn new(seed: u64) -> Self { Rng(seed.wrapping_add(0x9e3779b97f4a7c15)) }
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }
    fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = (self.next() % (i as u64 + 1)) as usize;
            items.swap(i, j);
        }
    }
}

struct PairState { v: usize, left: Vec<u8> }
impl PairState {
    fn new(v: usize, lambda: u8) -> Self { PairState { v, left: vec![lambda; v * v] } }
    fn get(&self, a: usize, b: usize) -> u8 { self.left[a.min(b) * self.v + a.max(b)] }
    fn take_triple(&mut self, t: [usize; 3]) -> bool {
        let ok = self.get(t[0], t[1]) > 0 && self.get(t[0], t[2]) > 0 && self.get(t[1], t[2]) > 0;
        if !ok { return false; }
        for (a, b) in [(t[0], t[1]), (t[0], t[2]), (t[1], t[2])] {
            self.left[a.min(b) * self.v + a.max(b)] -= 1;
        }
        true
    }
    fn put_triple(&mut self, t: [usize; 3]) {
        for (a, b) in [(t[0], t[1]), (t[0], t[2]), (t[1], t[2])] {
            self.left[a.min(b) * self.v + a.max(b)] += 1;
        }
    }
}

fn build_class(pairs: &mut PairState, active: &mut Vec<bool>, points: &[usize], out: &mut Vec<[usize; 3]>, rng: &mut Rng, nodes: &mut u64, max_nodes: u64) -> bool {
    *nodes += 1;
    if *nodes > max_nodes { return false; }
    let mut p = usize::MAX;
    let mut best_deg = usize::MAX;
    for &a in points.iter() {
        if !active[a] { continue; }
        let deg = points.iter().filter(|&&q| active[q] && q != a && pairs.get(a, q) > 0).count();
        if deg < best_deg { best_deg = deg; p = a; if deg <= 1 { break; } }
    }
    if p == usize::MAX { return true; }
    if best_deg < 2 { return false; }
    let mut cands: Vec<(usize, usize)> = Vec::new();
    for (qi, &q) in points.iter().enumerate() {
        if !active[q] || q == p || pairs.get(p, q) == 0 { continue; }
        for &s in points.iter().skip(qi + 1) {
            if !active[s] || s == p || s == q { continue; }
            if pairs.get(p, s) > 0 && pairs.get(q, s) > 0 { cands.push((q, s)); }
        }
    }
    rng.shuffle(&mut cands);
    for (q, s) in cands {
        let t = [p, q, s];
        if !pairs.take_triple(t) { continue; }
        active[p] = false; active[q] = false; active[s] = false;
        out.push(t);
        if build_class(pairs, active, points, out, rng, nodes, max_nodes) { return true; }
        out.pop();
        active[p] = true; active[q] = true; active[s] = true;
        pairs.put_triple(t);
    }
    false
}

fn main() {
    let u = 3usize;
    let v = 6 * u + 1;
    let points: Vec<usize> = (0..v).collect();
    let mut best_progress = 0;
    for attempt in 0..300u64 {
        let mut rng = Rng::new(attempt.wrapping_mul(0x9d2c));
        let mut pairs = PairState::new(v, 1);
        let mut p0: Vec<[usize; 3]> = Vec::new();
        for c in 0..u {
            let t = [3 * c, 3 * c + 1, 3 * c + 2];
            pairs.take_triple(t);
            p0.push(t);
        }
        let mut almost: Vec<Vec<[usize; 3]>> = Vec::new();
        for missing in 0..3 * u {
            let mut active = vec![true; v];
            active[missing] = false;
            let mut out = Vec::new();
            let mut nodes = 0u64;
            if build_class(&mut pairs, &mut active, &points, &mut out, &mut rng, &mut nodes, 400_000) {
                almost.push(out);
            } else {
                break;
            }
        }
        if almost.len() > best_progress {
            best_progress = almost.len();
            println!("attempt {attempt}: reached {} almost-classes", almost.len());
        }
        if almost.len() == 3 * u {
            println!("SUCCESS at attempt {attempt}");
            let mut blocks: Vec<Vec<usize>> = p0.iter().map(|t| t.to_vec()).collect();
            for class in &almost { for t in class { blocks.push(t.to_vec()); } }
            let d = make_design(v, 1, 3, blocks);
            println!("design valid: {}", d.is_ok());
            return;
        }
    }
    println!("failed; best progress {best_progress}/{}", 3 * u);
}
