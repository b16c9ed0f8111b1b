//! Combinatorial indices: finite subsets, partite index functions, injections, and the
//! pullback/pushforward maps they induce on configuration points.
//!
//! All enumerations use a size-then-lexicographic order, and every ordering is
//! deterministic so that serialized points are stable across runs.

use std::collections::HashMap;
use std::fmt;

use crate::templates::{Config, PartiteConfig};

/// Binomial coefficient as `u64`, zero when `r > n`.
pub fn binom(n: usize, r: usize) -> u64 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    let mut acc: u64 = 1;
    for i in 0..r {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc
}

/// Falling factorial `(n)_r = n (n-1) ... (n-r+1)`.
pub fn falling(n: usize, r: usize) -> u64 {
    if r > n {
        return 0;
    }
    (0..r).map(|i| (n - i) as u64).product()
}

pub fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// A finite non-empty subset of `[m]`, stored as strictly increasing 1-based members.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subset(Vec<u32>);

impl Subset {
    pub fn new(mut members: Vec<u32>) -> Result<Self, String> {
        members.sort_unstable();
        members.dedup();
        if members.is_empty() {
            return Err("subset must be non-empty".into());
        }
        if members[0] == 0 {
            return Err("subset members are 1-based".into());
        }
        Ok(Subset(members))
    }

    pub fn members(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max(&self) -> u32 {
        *self.0.last().unwrap()
    }

    pub fn contains(&self, v: u32) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    /// Bitmask with bit `i-1` set for every member `i` (members must be ≤ 64).
    pub fn mask(&self) -> u64 {
        self.0.iter().fold(0, |acc, &v| acc | (1u64 << (v - 1)))
    }

    pub fn from_mask(mask: u64) -> Self {
        Subset((0..64).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).collect())
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

impl std::str::FromStr for Subset {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let inner = s
            .trim()
            .strip_prefix('{')
            .and_then(|t| t.strip_suffix('}'))
            .ok_or_else(|| format!("bad subset literal {s:?}"))?;
        let members = inner
            .split(',')
            .map(|t| t.trim().parse::<u32>().map_err(|e| e.to_string()))
            .collect::<Result<Vec<_>, _>>()?;
        Subset::new(members)
    }
}

/// All non-empty subsets of `[m]` of size at most `cap`, size-then-lex.
pub fn enumerate_subsets(m: usize, cap: usize) -> Vec<Subset> {
    let mut out = Vec::new();
    for s in 1..=cap.min(m) {
        let mut comb: Vec<u32> = (1..=s as u32).collect();
        loop {
            out.push(Subset(comb.clone()));
            // advance to the next combination in lex order
            let mut i = s;
            while i > 0 && comb[i - 1] == (m - s + i) as u32 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            comb[i - 1] += 1;
            for j in i..s {
                comb[j] = comb[j - 1] + 1;
            }
        }
    }
    out
}

/// Position of `a` inside `enumerate_subsets(m, cap)`.
pub fn subset_rank(m: usize, a: &[u32]) -> usize {
    let s = a.len();
    let offset: u64 = (1..s).map(|t| binom(m, t)).sum();
    // lex rank among s-subsets of [m]
    let mut tail = 0u64;
    for (j, &c) in a.iter().enumerate() {
        tail += binom(m - c as usize, s - j);
    }
    (offset + binom(m, s) - 1 - tail) as usize
}

/// Number of subsets enumerated by `enumerate_subsets(m, cap)`.
pub fn subset_count(m: usize, cap: usize) -> usize {
    (1..=cap.min(m)).map(|s| binom(m, s) as usize).sum()
}

/// An injection `[k'] -> [m]`, stored as 1-based images. Permutations are the case `k' = m`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Injection(Vec<u32>);

impl Injection {
    pub fn new(images: Vec<u32>) -> Result<Self, String> {
        let mut seen = images.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != images.len() {
            return Err("injection images must be distinct".into());
        }
        if images.iter().any(|&v| v == 0) {
            return Err("injection images are 1-based".into());
        }
        Ok(Injection(images))
    }

    pub fn identity(k: usize) -> Self {
        Injection((1..=k as u32).collect())
    }

    pub fn images(&self) -> &[u32] {
        &self.0
    }

    pub fn source_size(&self) -> usize {
        self.0.len()
    }

    /// Image of a 1-based point.
    pub fn at(&self, i: u32) -> u32 {
        self.0[(i - 1) as usize]
    }

    /// `(self ∘ other)(i) = self(other(i))`.
    pub fn compose(&self, other: &Injection) -> Injection {
        Injection(other.0.iter().map(|&i| self.at(i)).collect())
    }

    /// Inverse of a permutation.
    pub fn inverse(&self) -> Injection {
        let mut inv = vec![0u32; self.0.len()];
        for (i, &v) in self.0.iter().enumerate() {
            inv[(v - 1) as usize] = i as u32 + 1;
        }
        Injection(inv)
    }

    /// Sorted image of a subset of the source.
    pub fn image_of(&self, a: &[u32]) -> Vec<u32> {
        let mut v: Vec<u32> = a.iter().map(|&i| self.at(i)).collect();
        v.sort_unstable();
        v
    }

    pub fn image_set(&self) -> Vec<u32> {
        let mut v = self.0.clone();
        v.sort_unstable();
        v
    }
}

impl fmt::Display for Injection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            self.0.iter().enumerate().map(|(i, v)| format!("{}↦{}", i + 1, v)).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// All injections `[k] -> [m]` in lex order of their image lists.
pub fn enumerate_injections(m: usize, k: usize) -> Vec<Injection> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    let mut used = vec![false; m + 1];
    fn rec(m: usize, k: usize, cur: &mut Vec<u32>, used: &mut [bool], out: &mut Vec<Injection>) {
        if cur.len() == k {
            out.push(Injection(cur.clone()));
            return;
        }
        for v in 1..=m {
            if !used[v] {
                used[v] = true;
                cur.push(v as u32);
                rec(m, k, cur, used, out);
                cur.pop();
                used[v] = false;
            }
        }
    }
    if k <= m {
        rec(m, k, &mut cur, &mut used, &mut out);
    }
    out
}

/// Increasing injections `[k] -> [m]` (one per `k`-subset), in lex order.
pub fn increasing_injections(m: usize, k: usize) -> Vec<Injection> {
    let mut out = Vec::with_capacity(binom(m, k) as usize);
    let mut cur: Vec<u32> = (1..=k as u32).collect();
    if k > m {
        return out;
    }
    loop {
        out.push(Injection(cur.clone()));
        // advance the rightmost entry that still has room
        let Some(j) = (0..k).rev().find(|&j| (cur[j] as usize) < m - (k - 1 - j)) else { return out };
        cur[j] += 1;
        for t in j + 1..k {
            cur[t] = cur[t - 1] + 1;
        }
    }
}

/// All permutations of `[k]` in lex order; index 0 is the identity.
pub fn permutations(k: usize) -> Vec<Injection> {
    enumerate_injections(k, k)
}

/// Position of an injection inside `enumerate_injections(m, k)`.
pub fn injection_rank(m: usize, images: &[u32]) -> usize {
    let k = images.len();
    let mut rank = 0u64;
    for j in 0..k {
        let used_below = images[..j].iter().filter(|&&v| v < images[j]).count() as u64;
        let smaller_unused = images[j] as u64 - 1 - used_below;
        rank += smaller_unused * falling(m - j - 1, k - j - 1);
    }
    rank as usize
}

/// A partite index function `f ∈ r_k(V_1,…,V_k)`: a non-empty domain `A ⊆ [k]` and a
/// part-local vertex for each `i ∈ A` (both 1-based).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartIndex {
    domain: Vec<u32>,
    values: Vec<u32>,
}

impl PartIndex {
    pub fn new(pairs: Vec<(u32, u32)>) -> Result<Self, String> {
        let mut pairs = pairs;
        pairs.sort_unstable();
        if pairs.is_empty() {
            return Err("partite index must have a non-empty domain".into());
        }
        for w in pairs.windows(2) {
            if w[0].0 == w[1].0 {
                return Err("duplicate part in partite index".into());
            }
        }
        if pairs.iter().any(|&(i, v)| i == 0 || v == 0) {
            return Err("partite indices are 1-based".into());
        }
        Ok(PartIndex {
            domain: pairs.iter().map(|p| p.0).collect(),
            values: pairs.iter().map(|p| p.1).collect(),
        })
    }

    pub fn domain(&self) -> &[u32] {
        &self.domain
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn value_at(&self, part: u32) -> Option<u32> {
        self.domain.iter().position(|&d| d == part).map(|p| self.values[p])
    }
}

impl fmt::Display for PartIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .domain
            .iter()
            .zip(&self.values)
            .map(|(i, v)| format!("{i}↦{v}"))
            .collect();
        write!(f, "{}", parts.join(","))
    }
}

impl std::str::FromStr for PartIndex {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let pairs = s
            .split(',')
            .map(|t| {
                let (a, b) = t.split_once('↦').ok_or_else(|| format!("bad pair {t:?}"))?;
                Ok((
                    a.trim().parse::<u32>().map_err(|e| e.to_string())?,
                    b.trim().parse::<u32>().map_err(|e| e.to_string())?,
                ))
            })
            .collect::<Result<Vec<_>, String>>()?;
        PartIndex::new(pairs)
    }
}

/// Layout of the coordinates of a partite point with `sizes[i]` vertices in part `i+1`.
///
/// Coordinates are ordered by domain (size-then-lex over `r(k)`), then by the values
/// in mixed radix with the lowest part most significant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartLayout {
    pub sizes: Vec<usize>,
    pub domains: Vec<Subset>,
    offsets: Vec<usize>,
    total: usize,
}

impl PartLayout {
    pub fn new(sizes: &[usize]) -> Self {
        let k = sizes.len();
        let domains = enumerate_subsets(k, k);
        let mut offsets = Vec::with_capacity(domains.len());
        let mut total = 0;
        for d in &domains {
            offsets.push(total);
            total += d.members().iter().map(|&i| sizes[(i - 1) as usize]).product::<usize>();
        }
        PartLayout { sizes: sizes.to_vec(), domains, offsets, total }
    }

    pub fn uniform(m: usize, k: usize) -> Self {
        Self::new(&vec![m; k])
    }

    pub fn k(&self) -> usize {
        self.sizes.len()
    }

    pub fn len(&self) -> usize {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    /// Coordinate position of the index with domain number `dom` (in `r(k)` order) and the
    /// given 1-based values.
    pub fn position(&self, dom: usize, values: &[u32]) -> usize {
        let mut pos = 0usize;
        for (&i, &v) in self.domains[dom].members().iter().zip(values) {
            pos = pos * self.sizes[(i - 1) as usize] + (v - 1) as usize;
        }
        self.offsets[dom] + pos
    }

    pub fn rank(&self, f: &PartIndex) -> usize {
        let dom = self
            .domains
            .iter()
            .position(|d| d.members() == f.domain())
            .expect("domain within [k]");
        self.position(dom, f.values())
    }

    /// Domain number (in `r(k)` order) of the coordinate at `pos`.
    pub fn domain_of(&self, pos: usize) -> usize {
        match self.offsets.binary_search(&pos) {
            Ok(mut i) => {
                // skip empty blocks (only possible with a zero-size part)
                while i + 1 < self.offsets.len() && self.offsets[i + 1] == pos {
                    i += 1;
                }
                i
            }
            Err(i) => i - 1,
        }
    }

    pub fn enumerate(&self) -> Vec<PartIndex> {
        let mut out = Vec::with_capacity(self.total);
        for d in &self.domains {
            let parts = d.members();
            let radices: Vec<usize> = parts.iter().map(|&i| self.sizes[(i - 1) as usize]).collect();
            let count: usize = radices.iter().product();
            for mut n in 0..count {
                let mut vals = vec![0u32; parts.len()];
                for j in (0..parts.len()).rev() {
                    vals[j] = (n % radices[j]) as u32 + 1;
                    n /= radices[j];
                }
                out.push(PartIndex { domain: parts.to_vec(), values: vals });
            }
        }
        out
    }
}

/// All partite indices over `([m],…,[m])` with `k` parts.
pub fn enumerate_part_indices(m: usize, k: usize) -> Vec<PartIndex> {
    PartLayout::uniform(m, k).enumerate()
}

/// Local coordinate order over `[k]`: the subsets of `r(k)` in canonical order.
/// Both a non-partite point over `[k]` and a partite point over `([1],…,[1])` use it.
pub fn local_slots(k: usize) -> Vec<Subset> {
    enumerate_subsets(k, k)
}

/// `α*(x)_A = x_{α(A)}` for a non-partite point over `[m]`.
pub fn pullback(alpha: &Injection, x: &Config) -> Result<Config, String> {
    let kp = alpha.source_size();
    if alpha.images().iter().any(|&v| v as usize > x.m) {
        return Err(format!("injection image out of range [{}]", x.m));
    }
    let cap = x.cap;
    let coords = enumerate_subsets(kp, cap)
        .iter()
        .map(|a| x.coords[subset_rank(x.m, &alpha.image_of(a.members()))])
        .collect();
    Ok(Config { m: kp, cap, coords })
}

/// `α*(x)_f = x_{α|dom f}` for a partite point; the result lives over `([1],…,[1])`.
pub fn pullback_partite(alpha: &[u32], x: &PartiteConfig) -> Result<PartiteConfig, String> {
    let layout = &x.layout;
    if alpha.len() != layout.k() {
        return Err("tuple length differs from the number of parts".into());
    }
    for (i, &a) in alpha.iter().enumerate() {
        if a == 0 || a as usize > layout.sizes[i] {
            return Err(format!("part {} index {} out of range", i + 1, a));
        }
    }
    let coords = layout
        .domains
        .iter()
        .enumerate()
        .map(|(d, dom)| {
            let vals: Vec<u32> = dom.members().iter().map(|&i| alpha[(i - 1) as usize]).collect();
            x.coords[layout.position(d, &vals)]
        })
        .collect();
    Ok(PartiteConfig { layout: PartLayout::uniform(1, layout.k()), coords })
}

/// Covariant action `σ_*(x)_A = x_{σ^{-1}(A)}` on partite points over `([1],…,[1])`.
///
/// `sizes` gives the cardinality per local slot; the action is only defined when the
/// cardinality depends on the slot size alone.
pub fn sigma_act_partite(sigma: &Injection, x: &[u32], sizes: &[usize]) -> Result<Vec<u32>, String> {
    let k = sigma.source_size();
    let slots = local_slots(k);
    if sizes.len() != slots.len() || x.len() != slots.len() {
        return Err("point does not have one coordinate per non-empty subset of [k]".into());
    }
    for (j, a) in slots.iter().enumerate() {
        let first = slots.iter().position(|b| b.len() == a.len()).unwrap();
        if sizes[j] != sizes[first] {
            return Err("template is not symmetric across same-size index sets".into());
        }
    }
    let inv = sigma.inverse();
    Ok(slots.iter().map(|a| x[subset_rank(k, &inv.image_of(a.members()))]).collect())
}

/// Precomputed `σ^*` on local points over `[k]`: `table[σ][j] = rank(σ(A_j))`, so that
/// `σ^*(x)_{A_j} = x[table[σ][j]]`.
pub fn perm_pullback_table(k: usize) -> Vec<Vec<usize>> {
    let slots = local_slots(k);
    permutations(k)
        .iter()
        .map(|s| slots.iter().map(|a| subset_rank(k, &s.image_of(a.members()))).collect())
        .collect()
}

/// Cache of local-coordinate lookups for pulling back points over `[m]` along every
/// injection `[k] -> [m]`: `rows[α][j]` is the coordinate of `α(A_j)` in a point over `[m]`.
#[derive(Clone, Debug)]
pub struct PullbackCache {
    pub m: usize,
    pub k: usize,
    pub injections: Vec<Injection>,
    pub rows: Vec<Vec<usize>>,
    rank: HashMap<Vec<u32>, usize>,
}

impl PullbackCache {
    pub fn new(m: usize, k: usize) -> Self {
        let slots = local_slots(k);
        let injections = enumerate_injections(m, k);
        let rows = injections
            .iter()
            .map(|a| slots.iter().map(|s| subset_rank(m, &a.image_of(s.members()))).collect())
            .collect();
        let rank = injections.iter().enumerate().map(|(i, a)| (a.images().to_vec(), i)).collect();
        PullbackCache { m, k, injections, rows, rank }
    }

    pub fn rank_of(&self, images: &[u32]) -> usize {
        self.rank[images]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets_small_cases() {
        let s = enumerate_subsets(2, 2);
        let txt: Vec<String> = s.iter().map(|a| a.to_string()).collect();
        assert_eq!(txt, vec!["{1}", "{2}", "{1,2}"]);
        assert_eq!(enumerate_subsets(3, 2).len(), 6);
        assert!(enumerate_subsets(0, 2).is_empty());
    }

    #[test]
    fn subset_rank_matches_enumeration() {
        for m in 0..7 {
            for cap in 1..5 {
                let all = enumerate_subsets(m, cap);
                assert_eq!(all.len(), subset_count(m, cap));
                for (i, a) in all.iter().enumerate() {
                    assert_eq!(subset_rank(m, a.members()), i);
                }
            }
        }
    }

    #[test]
    fn part_indices_counts() {
        assert_eq!(enumerate_part_indices(2, 2).len(), 8);
        assert_eq!(enumerate_part_indices(1, 1).len(), 1);
        assert!(enumerate_part_indices(0, 2).is_empty());
        // count = Σ_A m^|A| by direct summation
        for m in 0..4usize {
            for k in 1..4usize {
                let want: usize = enumerate_subsets(k, k).iter().map(|a| m.pow(a.len() as u32)).sum();
                assert_eq!(enumerate_part_indices(m, k).len(), want);
            }
        }
    }

    #[test]
    fn part_layout_rank_roundtrip() {
        let layout = PartLayout::new(&[2, 3, 1]);
        for (i, f) in layout.enumerate().iter().enumerate() {
            assert_eq!(layout.rank(f), i);
            let d = layout.domain_of(i);
            assert_eq!(layout.domains[d].members(), f.domain());
        }
    }

    #[test]
    fn text_forms_roundtrip() {
        let a: Subset = "{1,3}".parse().unwrap();
        assert_eq!(a.to_string(), "{1,3}");
        let f: PartIndex = "1↦2,3↦1".parse().unwrap();
        assert_eq!(f.to_string(), "1↦2,3↦1");
        assert_eq!(f.value_at(3), Some(1));
    }

    #[test]
    fn injection_rank_matches_enumeration() {
        for m in 0..6 {
            for k in 0..=m.min(4) {
                for (i, a) in enumerate_injections(m, k).iter().enumerate() {
                    assert_eq!(injection_rank(m, a.images()), i);
                }
            }
        }
        assert_eq!(permutations(3)[0], Injection::identity(3));
    }

    #[test]
    fn increasing_injections_are_the_k_subsets() {
        for m in 0..7 {
            for k in 1..=m + 1 {
                let direct: Vec<Vec<u32>> = increasing_injections(m, k).iter().map(|a| a.images().to_vec()).collect();
                let via: Vec<Vec<u32>> =
                    enumerate_subsets(m, k).into_iter().filter(|u| u.len() == k).map(|u| u.members().to_vec()).collect();
                assert_eq!(direct, via, "m = {m}, k = {k}");
            }
        }
    }

    #[test]
    fn pullback_forced_value() {
        let x = Config { m: 3, cap: 2, coords: (0..6).collect() };
        let alpha = Injection::new(vec![1, 3]).unwrap();
        let y = pullback(&alpha, &x).unwrap();
        // {1,3} is the fifth subset of [3] in size-then-lex order
        assert_eq!(y.coords[2], x.coords[subset_rank(3, &[1, 3])]);
        assert_eq!(pullback(&Injection::identity(3), &x).unwrap(), x);
        assert!(pullback(&Injection::new(vec![4]).unwrap(), &x).is_err());
    }

    #[test]
    fn partite_pullback_forced_value() {
        let layout = PartLayout::uniform(2, 2);
        let x = PartiteConfig { coords: (0..layout.len() as u32).collect(), layout };
        let y = pullback_partite(&[2, 1], &x).unwrap();
        let f: PartIndex = "1↦2".parse().unwrap();
        assert_eq!(y.coords[0], x.coords[x.layout.rank(&f)]);
        let one = PartiteConfig { layout: PartLayout::uniform(1, 3), coords: (0..7).collect() };
        assert_eq!(pullback_partite(&[1, 1, 1], &one).unwrap(), one);
    }

    #[test]
    fn sigma_swap_moves_singletons() {
        let swap = Injection::new(vec![2, 1]).unwrap();
        let x = vec![10, 20, 30];
        let y = sigma_act_partite(&swap, &x, &[2, 2, 1]).unwrap();
        assert_eq!(y, vec![20, 10, 30]);
        assert_eq!(sigma_act_partite(&Injection::identity(2), &x, &[2, 2, 1]).unwrap(), x);
        assert!(sigma_act_partite(&swap, &x, &[2, 3, 1]).is_err());
    }

    #[test]
    fn sigma_action_is_covariant_s3() {
        let sizes = vec![2; 7];
        let perms = permutations(3);
        let x: Vec<u32> = (0..7).collect();
        for s in &perms {
            for t in &perms {
                let lhs = sigma_act_partite(&t.compose(s), &x, &sizes).unwrap();
                let rhs =
                    sigma_act_partite(t, &sigma_act_partite(s, &x, &sizes).unwrap(), &sizes).unwrap();
                assert_eq!(lhs, rhs);
            }
        }
    }

    /// Every point of the 2-point template over `[m]` with arity cap `cap`.
    fn all_points(m: usize, cap: usize) -> Vec<Config> {
        let n = subset_count(m, cap);
        (0..1u32 << n)
            .map(|bits| Config { m, cap, coords: (0..n).map(|i| bits >> i & 1).collect() })
            .collect()
    }

    #[test]
    fn contravariance_exhaustive() {
        for c in 1..=4 {
            let cap = if c == 4 { 2 } else { 3 };
            for b in 1..=c {
                for a in 1..=b {
                    for x in all_points(c, cap) {
                        for beta in enumerate_injections(c, b) {
                            let bx = pullback(&beta, &x).unwrap();
                            for alpha in enumerate_injections(b, a) {
                                let lhs = pullback(&beta.compose(&alpha), &x).unwrap();
                                let rhs = pullback(&alpha, &bx).unwrap();
                                assert_eq!(lhs, rhs);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn enumeration_is_stable() {
        assert_eq!(enumerate_subsets(5, 3), enumerate_subsets(5, 3));
        assert_eq!(enumerate_part_indices(3, 2), enumerate_part_indices(3, 2));
    }
}
