//! Seeded edge placement with rejection of double edges and 4-cycles.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{DegreeProfile, GraphKind, TannerGraph};
use crate::error::{Error, Result};

const ATTEMPTS: u64 = 8;

/// Builds a graph with `n_var` variable nodes; the check count follows from
/// the profile's edge balance and check degrees absorb the rounding.
pub fn build_graph(n_var: usize, profile: &DegreeProfile, kind: GraphKind, seed: u64) -> Result<TannerGraph> {
    profile.validate()?;
    if n_var == 0 {
        return Err(Error::InvalidInput("n_var must be positive".into()));
    }
    let var_deg = DegreeProfile::node_degrees(&profile.var, n_var);
    let edges: usize = var_deg.iter().sum();
    let n_chk = ((edges as f64) / profile.avg_chk_degree()).round().max(1.0) as usize;
    let mut chk_deg = DegreeProfile::node_degrees(&profile.chk, n_chk);
    balance(&mut chk_deg, edges, "check")?;
    place(kind, &var_deg, &chk_deg, seed)
}

/// Builds a graph with both node counts fixed; variable degrees absorb the
/// rounding. Used for the LDGM, whose code-bit count is set by the block
/// length and whose information-bit count is set by the rate.
pub fn build_graph_with_checks(
    n_var: usize,
    n_chk: usize,
    profile: &DegreeProfile,
    kind: GraphKind,
    seed: u64,
) -> Result<TannerGraph> {
    profile.validate()?;
    if n_var == 0 || n_chk == 0 {
        return Err(Error::InvalidInput("node counts must be positive".into()));
    }
    let chk_deg = DegreeProfile::node_degrees(&profile.chk, n_chk);
    let edges: usize = chk_deg.iter().sum();
    let mut var_deg = DegreeProfile::node_degrees(&profile.var, n_var);
    balance(&mut var_deg, edges, "variable")?;
    place(kind, &var_deg, &chk_deg, seed)
}

/// Nudges node degrees by one, spread round-robin, until they sum to `edges`.
fn balance(deg: &mut [usize], edges: usize, side: &str) -> Result<()> {
    let total: usize = deg.iter().sum();
    let n = deg.len();
    // Each node may move by at most one.
    if total.abs_diff(edges) > n {
        return Err(Error::Construction(format!(
            "{side} sockets {total} cannot be reconciled with {edges} edges"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    if total < edges {
        order.sort_by_key(|&i| (deg[i], i));
        for &i in order.iter().take(edges - total) {
            deg[i] += 1;
        }
    } else if total > edges {
        order.sort_by_key(|&i| (std::cmp::Reverse(deg[i]), i));
        let mut need = total - edges;
        for &i in &order {
            if need == 0 {
                break;
            }
            if deg[i] > 1 {
                deg[i] -= 1;
                need -= 1;
            }
        }
        if need > 0 {
            return Err(Error::Construction(format!("cannot shed {need} {side} sockets")));
        }
    }
    Ok(())
}

fn place(kind: GraphKind, var_deg: &[usize], chk_deg: &[usize], seed: u64) -> Result<TannerGraph> {
    let n_chk = chk_deg.len();
    if var_deg.iter().any(|&d| d > n_chk) {
        return Err(Error::Construction("variable degree exceeds check count".into()));
    }
    let mut last = String::new();
    for attempt in 0..ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(attempt);
        match Placement::new(var_deg, chk_deg).run(&mut rng) {
            Ok(checks) => return TannerGraph::from_checks(kind, var_deg.len(), &checks),
            Err(msg) => last = msg,
        }
    }
    Err(Error::Construction(format!(
        "no 4-cycle-free placement found in {ATTEMPTS} attempts: {last}"
    )))
}

struct Placement<'a> {
    var_deg: &'a [usize],
    remaining: Vec<usize>,
    var_adj: Vec<Vec<u32>>,
    chk_adj: Vec<Vec<u32>>,
    // Capacity buckets: checks with r open sockets live in buckets[r].
    buckets: Vec<Vec<u32>>,
    slot: Vec<usize>,
    mark: Vec<u32>,
    stamp: u32,
}

impl<'a> Placement<'a> {
    fn new(var_deg: &'a [usize], chk_deg: &[usize]) -> Self {
        let max = chk_deg.iter().copied().max().unwrap_or(0);
        let mut buckets = vec![Vec::new(); max + 1];
        let mut slot = vec![0; chk_deg.len()];
        for (c, &d) in chk_deg.iter().enumerate() {
            slot[c] = buckets[d].len();
            buckets[d].push(c as u32);
        }
        Placement {
            var_deg,
            remaining: chk_deg.to_vec(),
            var_adj: var_deg.iter().map(|&d| Vec::with_capacity(d)).collect(),
            chk_adj: chk_deg.iter().map(|&d| Vec::with_capacity(d)).collect(),
            buckets,
            slot,
            mark: vec![0; chk_deg.len()],
            stamp: 0,
        }
    }

    fn move_bucket(&mut self, c: usize, to: usize) {
        let from = self.remaining[c];
        let i = self.slot[c];
        let b = &mut self.buckets[from];
        b.swap_remove(i);
        if i < b.len() {
            let moved = b[i] as usize;
            self.slot[moved] = i;
        }
        self.slot[c] = self.buckets[to].len();
        self.buckets[to].push(c as u32);
        self.remaining[c] = to;
    }

    fn connect(&mut self, v: usize, c: usize) {
        let r = self.remaining[c];
        self.move_bucket(c, r - 1);
        self.var_adj[v].push(c as u32);
        self.chk_adj[c].push(v as u32);
    }

    fn disconnect(&mut self, v: usize, c: usize) {
        let r = self.remaining[c];
        self.move_bucket(c, r + 1);
        self.var_adj[v].retain(|&x| x as usize != c);
        self.chk_adj[c].retain(|&x| x as usize != v);
    }

    /// Marks every check that `v` may not join: current neighbors and checks
    /// two hops away. `skip` is an edge treated as absent.
    fn mark_forbidden(&mut self, v: usize, skip: Option<usize>) {
        self.stamp = self.stamp.wrapping_add(1);
        if self.stamp == 0 {
            self.mark.fill(0);
            self.stamp = 1;
        }
        let s = self.stamp;
        for &c in &self.var_adj[v] {
            let c = c as usize;
            if Some(c) == skip {
                continue;
            }
            self.mark[c] = s;
            for &u in &self.chk_adj[c] {
                if u as usize == v {
                    continue;
                }
                for &c2 in &self.var_adj[u as usize] {
                    self.mark[c2 as usize] = s;
                }
            }
        }
    }

    fn allowed(&self, c: usize) -> bool {
        self.mark[c] != self.stamp
    }

    /// Picks an allowed open check, preferring the most open sockets.
    fn pick<R: Rng>(&self, rng: &mut R) -> Option<usize> {
        for r in (1..self.buckets.len()).rev() {
            let b = &self.buckets[r];
            if b.is_empty() {
                continue;
            }
            for _ in 0..8 {
                let c = b[rng.random_range(0..b.len())] as usize;
                if self.allowed(c) {
                    return Some(c);
                }
            }
            let start = rng.random_range(0..b.len());
            for k in 0..b.len() {
                let c = b[(start + k) % b.len()] as usize;
                if self.allowed(c) {
                    return Some(c);
                }
            }
        }
        None
    }

    /// Frees a socket usable by `v` by moving an existing edge `(u, c)` to an
    /// open check `free`, then attaches `v` to `c`.
    fn swap_in<R: Rng>(&mut self, v: usize, rng: &mut R) -> bool {
        let open: Vec<usize> = (1..self.buckets.len())
            .flat_map(|r| self.buckets[r].iter().map(|&c| c as usize))
            .collect();
        let n_chk = self.chk_adj.len();
        for _ in 0..4 * n_chk.max(64) {
            let c = rng.random_range(0..n_chk);
            self.mark_forbidden(v, None);
            if !self.allowed(c) || self.chk_adj[c].is_empty() {
                continue;
            }
            let u = self.chk_adj[c][rng.random_range(0..self.chk_adj[c].len())] as usize;
            if u == v {
                continue;
            }
            for &free in &open {
                if free == c {
                    continue;
                }
                // u must be able to trade c for free, and v must still accept c afterwards.
                self.mark_forbidden(u, Some(c));
                if !self.allowed(free) {
                    continue;
                }
                self.disconnect(u, c);
                self.connect(u, free);
                self.mark_forbidden(v, None);
                if self.allowed(c) && self.remaining[c] > 0 {
                    self.connect(v, c);
                    return true;
                }
                self.disconnect(u, free);
                self.connect(u, c);
            }
        }
        false
    }

    fn run<R: Rng>(mut self, rng: &mut R) -> std::result::Result<Vec<Vec<usize>>, String> {
        let mut order: Vec<usize> = (0..self.var_deg.len()).collect();
        order.shuffle(rng);
        // High-degree variables first while the check side is still open.
        order.sort_by_key(|&v| std::cmp::Reverse(self.var_deg[v]));
        for &v in &order {
            for _ in 0..self.var_deg[v] {
                self.mark_forbidden(v, None);
                match self.pick(rng) {
                    Some(c) => self.connect(v, c),
                    None => {
                        if !self.swap_in(v, rng) {
                            return Err(format!("stuck placing variable {v}"));
                        }
                    }
                }
            }
        }
        Ok(self
            .chk_adj
            .into_iter()
            .map(|l| l.into_iter().map(|v| v as usize).collect())
            .collect())
    }
}
