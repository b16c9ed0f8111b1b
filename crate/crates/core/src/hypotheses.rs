//! Hypotheses on local points, hypothesis classes, the labeled-diagram maps `F*`, rank
//! computation and partization of hypotheses and classes.
//!
//! A *local point* is a point over `[k]` (non-partite) or over `([1],…,[1])` (partite).
//! Both carry one coordinate per `A ∈ r(k)` in canonical order, so they share the
//! representation `&[u32]`; only the slot sizes differ.

use std::fmt;
use std::sync::Arc;

use crate::index::{local_slots, perm_pullback_table, PullbackCache};
use crate::losses::{Atoms, LocalLoss};
use crate::templates::{Config, PartiteConfig};
use crate::Setting;

type Eval = Arc<dyn Fn(&[u32]) -> u32 + Send + Sync>;

/// Number of points of a product space with the given slot sizes.
pub fn point_count(sizes: &[usize]) -> usize {
    sizes.iter().product()
}

/// Mixed-radix index of a local point (first slot most significant).
pub fn point_index(sizes: &[usize], x: &[u32]) -> usize {
    x.iter().zip(sizes).fold(0, |acc, (&c, &n)| acc * n + c as usize)
}

pub fn point_from_index(sizes: &[usize], mut idx: usize) -> Vec<u32> {
    let mut x = vec![0u32; sizes.len()];
    for j in (0..sizes.len()).rev() {
        x[j] = (idx % sizes[j]) as u32;
        idx /= sizes[j];
    }
    x
}

/// All points of a product space, in mixed-radix order.
pub fn all_points(sizes: &[usize]) -> impl Iterator<Item = Vec<u32>> + '_ {
    (0..point_count(sizes)).map(move |i| point_from_index(sizes, i))
}

/// Encodes a label pattern as one integer in base `labels` (entry 0 least significant).
pub fn encode_pattern(p: &[u32], labels: usize) -> u32 {
    p.iter().rev().fold(0u64, |acc, &v| acc * labels as u64 + v as u64) as u32
}

pub fn decode_pattern(mut code: u32, len: usize, labels: usize) -> Vec<u32> {
    let mut p = Vec::with_capacity(len);
    for _ in 0..len {
        p.push(code % labels as u32);
        code /= labels as u32;
    }
    p
}

/// A `k`-ary hypothesis: a label for every local point.
#[derive(Clone)]
pub struct Hypothesis {
    pub name: String,
    pub k: usize,
    pub setting: Setting,
    /// Slot sizes of the local points, in canonical order of `r(k)`.
    pub sizes: Vec<usize>,
    pub labels: usize,
    pub declared_rank: usize,
    eval: Eval,
    /// For a partized hypothesis, the non-partite hypothesis it came from.
    pub origin: Option<Arc<Hypothesis>>,
}

impl fmt::Debug for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Hypothesis({}, k={}, {:?})", self.name, self.k, self.setting)
    }
}

impl Hypothesis {
    pub fn new(
        name: impl Into<String>,
        k: usize,
        setting: Setting,
        sizes: Vec<usize>,
        labels: usize,
        declared_rank: usize,
        eval: impl Fn(&[u32]) -> u32 + Send + Sync + 'static,
    ) -> Self {
        assert_eq!(sizes.len(), local_slots(k).len(), "one slot size per non-empty subset of [k]");
        Hypothesis {
            name: name.into(),
            k,
            setting,
            sizes,
            labels,
            declared_rank,
            eval: Arc::new(eval),
            origin: None,
        }
    }

    /// Explicit label table in mixed-radix point order.
    pub fn from_table(
        name: impl Into<String>,
        k: usize,
        setting: Setting,
        sizes: Vec<usize>,
        labels: usize,
        table: Vec<u32>,
    ) -> Self {
        assert_eq!(table.len(), point_count(&sizes));
        assert!(table.iter().all(|&v| (v as usize) < labels), "table label out of range");
        let s2 = sizes.clone();
        let mut h = Hypothesis::new(name, k, setting, sizes, labels, k, move |x| {
            table[point_index(&s2, x)]
        });
        h.declared_rank = rank_of(&h);
        h
    }

    pub fn constant(k: usize, setting: Setting, sizes: Vec<usize>, labels: usize, value: u32) -> Self {
        Hypothesis::new(format!("const{value}"), k, setting, sizes, labels, 0, move |_| value)
    }

    pub fn eval(&self, x: &[u32]) -> u32 {
        (self.eval)(x)
    }

    /// Pattern length: `k!` non-partite, 1 partite.
    pub fn pattern_len(&self) -> usize {
        pattern_len(self.k, self.setting)
    }

    /// `H*_k(x) = (H(σ*(x)))_σ` on a local point (non-partite), or `[H(x)]` (partite).
    pub fn pattern(&self, x: &[u32]) -> Vec<u32> {
        match self.setting {
            Setting::Partite => vec![self.eval(x)],
            Setting::NonPartite => {
                let table = perm_table(self.k);
                table
                    .iter()
                    .map(|row| {
                        let px: Vec<u32> = row.iter().map(|&j| x[j]).collect();
                        self.eval(&px)
                    })
                    .collect()
            }
        }
    }

    pub fn table(&self) -> Vec<u32> {
        all_points(&self.sizes).map(|x| self.eval(&x)).collect()
    }

    pub fn same_function(&self, other: &Hypothesis) -> bool {
        self.sizes == other.sizes && all_points(&self.sizes).all(|x| self.eval(&x) == other.eval(&x))
    }

    /// `F*_m(x)`: labels indexed by the injections `[k] -> [m]` in lex order.
    pub fn star(&self, x: &Config) -> Vec<u32> {
        let cache = PullbackCache::new(x.m, self.k);
        self.star_cached(x, &cache)
    }

    pub fn star_cached(&self, x: &Config, cache: &PullbackCache) -> Vec<u32> {
        let mut local = vec![0u32; self.sizes.len()];
        cache
            .rows
            .iter()
            .map(|row| {
                for (j, &r) in row.iter().enumerate() {
                    local[j] = x.coords[r];
                }
                self.eval(&local)
            })
            .collect()
    }

    /// `F*_{V_1,…,V_k}(x)`: labels indexed by tuples in `∏[m_i]`, lex order.
    pub fn star_partite(&self, x: &PartiteConfig) -> Vec<u32> {
        let layout = &x.layout;
        let tuples = all_tuples(&layout.sizes);
        let slots = local_slots(self.k);
        let mut local = vec![0u32; slots.len()];
        tuples
            .iter()
            .map(|t| {
                for (d, a) in slots.iter().enumerate() {
                    let vals: Vec<u32> = a.members().iter().map(|&i| t[(i - 1) as usize]).collect();
                    local[d] = x.coords[layout.position(d, &vals)];
                }
                self.eval(&local)
            })
            .collect()
    }
}

pub fn pattern_len(k: usize, setting: Setting) -> usize {
    match setting {
        Setting::Partite => 1,
        Setting::NonPartite => crate::index::factorial(k) as usize,
    }
}

fn perm_table(k: usize) -> Arc<Vec<Vec<usize>>> {
    use std::collections::HashMap;
    use std::sync::Mutex;
    static CACHE: Mutex<Option<HashMap<usize, Arc<Vec<Vec<usize>>>>>> = Mutex::new(None);
    let mut guard = CACHE.lock().unwrap();
    guard.get_or_insert_with(HashMap::new).entry(k).or_insert_with(|| Arc::new(perm_pullback_table(k))).clone()
}

/// `σ*(x)` on a local point, for the permutation with index `s` in lex order.
pub fn permute_local(k: usize, s: usize, x: &[u32]) -> Vec<u32> {
    perm_table(k)[s].iter().map(|&j| x[j]).collect()
}

/// All tuples of `∏[m_i]` (1-based) in lex order.
pub fn all_tuples(sizes: &[usize]) -> Vec<Vec<u32>> {
    let total: usize = sizes.iter().product();
    (0..total)
        .map(|mut n| {
            let mut t = vec![0u32; sizes.len()];
            for j in (0..sizes.len()).rev() {
                t[j] = (n % sizes[j]) as u32 + 1;
                n /= sizes[j];
            }
            t
        })
        .collect()
}

/// Smallest `r` such that the hypothesis ignores every coordinate `A` with `|A| > r`.
pub fn rank_of(h: &Hypothesis) -> usize {
    let slots = local_slots(h.k);
    let mut rank = 0;
    for (j, a) in slots.iter().enumerate() {
        if a.len() <= rank || h.sizes[j] < 2 {
            continue;
        }
        let depends = all_points(&h.sizes).any(|x| {
            let base = h.eval(&x);
            (0..h.sizes[j] as u32).any(|v| {
                let mut y = x.clone();
                y[j] = v;
                h.eval(&y) != base
            })
        });
        if depends {
            rank = a.len();
        }
    }
    rank
}

/// `F^kpart(x) = F*_k(ι(x))`, encoded in base `L` over `S_k`. The local representation is
/// shared, so `ι` is the identity on coordinate vectors.
pub fn partize_hypothesis(f: &Hypothesis) -> Hypothesis {
    assert_eq!(f.setting, Setting::NonPartite, "partization takes a non-partite hypothesis");
    let src = Arc::new(f.clone());
    let inner = src.clone();
    let plen = f.pattern_len();
    let labels = (f.labels as u64).pow(plen as u32) as usize;
    let base = f.labels;
    let mut h = Hypothesis::new(
        format!("{}^kpart", f.name),
        f.k,
        Setting::Partite,
        f.sizes.clone(),
        labels,
        f.declared_rank,
        move |x| encode_pattern(&inner.pattern(x), base),
    );
    h.origin = Some(src);
    h
}

/// Inverse of partization: the stored origin, or `x ↦ G(x)_id` for a hypothesis in the
/// image of partization.
pub fn unpartize_hypothesis(g: &Hypothesis, base_labels: usize) -> Hypothesis {
    if let Some(o) = &g.origin {
        return (**o).clone();
    }
    let g2 = g.clone();
    let plen = pattern_len(g.k, Setting::NonPartite);
    Hypothesis::new(
        format!("{}^kpart,-1", g.name),
        g.k,
        Setting::NonPartite,
        g.sizes.clone(),
        base_labels,
        g.declared_rank,
        move |x| decode_pattern(g2.eval(x), plen, base_labels)[0],
    )
}

type Gen = Arc<dyn Fn(usize) -> Hypothesis + Send + Sync>;
/// Structured ERM: given aggregated sample atoms and a local loss, the index of a minimizer.
pub type ErmOracle = Arc<dyn Fn(&Atoms, &LocalLoss) -> usize + Send + Sync>;
type Membership = Arc<dyn Fn(&Hypothesis) -> bool + Send + Sync>;
/// Restriction enumerator: given a slice part `i` (1-based) and a local point whose
/// coordinates outside the slots containing `i` are fixed, the distinct restrictions of the
/// class to the free coordinates (mixed-radix order over the free slots).
pub type RestrictFn = Arc<dyn Fn(usize, &[u32]) -> Vec<Vec<u32>> + Send + Sync>;

/// A hypothesis class: an indexed family of members, optionally with a structured ERM
/// oracle and membership test.
#[derive(Clone)]
pub struct HypothesisClass {
    pub name: String,
    pub k: usize,
    pub setting: Setting,
    pub sizes: Vec<usize>,
    pub labels: usize,
    len: usize,
    gen: Gen,
    pub erm: Option<ErmOracle>,
    membership: Option<Membership>,
    pub restrict: Option<RestrictFn>,
    /// For a partized class, the class it came from.
    pub origin: Option<Arc<HypothesisClass>>,
}

impl fmt::Debug for HypothesisClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HypothesisClass({}, |H|={})", self.name, self.len)
    }
}

impl HypothesisClass {
    /// Explicit class; members are deduplicated under pointwise equality.
    pub fn explicit(name: impl Into<String>, members: Vec<Hypothesis>) -> Result<Self, String> {
        let first = members.first().ok_or("explicit class needs at least one member")?;
        let (k, setting, sizes, labels) = (first.k, first.setting, first.sizes.clone(), first.labels);
        let mut kept: Vec<Hypothesis> = Vec::new();
        let mut tables: Vec<Vec<u32>> = Vec::new();
        for h in members {
            if h.k != k || h.setting != setting || h.sizes != sizes || h.labels != labels {
                return Err(format!("member {} has a different shape", h.name));
            }
            let t = h.table();
            if !tables.contains(&t) {
                tables.push(t);
                kept.push(h);
            }
        }
        let kept = Arc::new(kept);
        Ok(HypothesisClass {
            name: name.into(),
            k,
            setting,
            sizes,
            labels,
            len: kept.len(),
            gen: Arc::new(move |i| kept[i].clone()),
            erm: None,
            membership: None,
            restrict: None,
            origin: None,
        })
    }

    /// Structured class given by an indexed generator (members assumed distinct).
    #[allow(clippy::too_many_arguments)]
    pub fn structured(
        name: impl Into<String>,
        k: usize,
        setting: Setting,
        sizes: Vec<usize>,
        labels: usize,
        len: usize,
        gen: impl Fn(usize) -> Hypothesis + Send + Sync + 'static,
        erm: Option<ErmOracle>,
        membership: Option<Membership>,
    ) -> Self {
        HypothesisClass {
            name: name.into(),
            k,
            setting,
            sizes,
            labels,
            len,
            gen: Arc::new(gen),
            erm,
            membership,
            restrict: None,
            origin: None,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> Hypothesis {
        (self.gen)(i)
    }

    pub fn members(&self) -> Vec<Hypothesis> {
        (0..self.len).map(|i| self.get(i)).collect()
    }

    pub fn contains(&self, h: &Hypothesis) -> bool {
        match &self.membership {
            Some(m) => m(h),
            None => (0..self.len).any(|i| self.get(i).same_function(h)),
        }
    }

    /// Class with one extra member appended (used for monotonicity checks).
    pub fn with_member(&self, h: Hypothesis) -> HypothesisClass {
        let mut all = self.members();
        all.push(h);
        let mut c = HypothesisClass::explicit(self.name.clone(), all).expect("same shape");
        c.origin = self.origin.clone();
        c
    }

    pub fn pattern_len(&self) -> usize {
        pattern_len(self.k, self.setting)
    }
}

/// Elementwise partization; the source class is retained for the inverse map.
pub fn partize_class(h: &HypothesisClass) -> HypothesisClass {
    assert_eq!(h.setting, Setting::NonPartite);
    let src = Arc::new(h.clone());
    let inner = src.clone();
    let plen = h.pattern_len();
    let labels = (h.labels as u64).pow(plen as u32) as usize;
    let base = h.labels;
    // ERM transfers: the partized loss on encoded labels is the source loss on patterns.
    let erm = h.erm.clone().map(|e| {
        let oracle: ErmOracle = Arc::new(move |atoms: &Atoms, loss: &LocalLoss| {
            let decoded = atoms.decode_patterns(plen, base);
            let l2 = loss.clone();
            let lifted: LocalLoss = Arc::new(move |x: &[u32], hp: &[u32], y: &[u32]| {
                l2(x, &[encode_pattern(hp, base)], &[encode_pattern(y, base)])
            });
            e(&decoded, &lifted)
        });
        oracle
    });
    let mut c = HypothesisClass::structured(
        format!("{}^kpart", h.name),
        h.k,
        Setting::Partite,
        h.sizes.clone(),
        labels,
        h.len(),
        move |i| partize_hypothesis(&inner.get(i)),
        erm,
        None,
    );
    c.origin = Some(src);
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::{enumerate_injections, pullback, subset_count, Injection};

    fn two_point_hyp(k: usize, seed: u64) -> Hypothesis {
        let sizes = vec![2; local_slots(k).len()];
        let n = point_count(&sizes);
        let table = (0..n).map(|i| ((i as u64 * 2654435761 + seed) >> 3 & 1) as u32).collect();
        Hypothesis::from_table("t", k, Setting::NonPartite, sizes, 2, table)
    }

    #[test]
    fn constant_star_is_constant() {
        let h = Hypothesis::constant(2, Setting::NonPartite, vec![2, 2, 1], 3, 2);
        let x = Config { m: 3, cap: 2, coords: vec![0, 1, 0, 0, 0, 0] };
        assert!(h.star(&x).iter().all(|&v| v == 2));
        assert_eq!(rank_of(&h), 0);
    }

    #[test]
    fn star_equivariance_exhaustive() {
        // β*(F*_V(x)) = F*_U(β*(x)) for every injection β: [u] -> [v], v ≤ 4
        let h = two_point_hyp(2, 7);
        for v in 2..=4 {
            let n = subset_count(v, 2);
            for bits in 0..1u32 << n {
                let x = Config { m: v, cap: 2, coords: (0..n).map(|i| bits >> i & 1).collect() };
                let fx = h.star(&x);
                let inj_v = enumerate_injections(v, 2);
                for u in 2..=v {
                    for beta in enumerate_injections(v, u) {
                        let bx = pullback(&beta, &x).unwrap();
                        let lhs: Vec<u32> = enumerate_injections(u, 2)
                            .iter()
                            .map(|a| {
                                let ba = beta.compose(a);
                                fx[inj_v.iter().position(|g| g == &ba).unwrap()]
                            })
                            .collect();
                        assert_eq!(lhs, h.star(&bx));
                    }
                }
            }
        }
    }

    #[test]
    fn pattern_equivariance_under_permutations() {
        let h = two_point_hyp(3, 11);
        let perms = crate::index::permutations(3);
        for x in all_points(&h.sizes) {
            let p = h.pattern(&x);
            for (s, sigma) in perms.iter().enumerate() {
                let sx = permute_local(3, s, &x);
                // σ*(F*_k(x))_τ = F*_k(x)_{σ∘τ}
                let lhs: Vec<u32> = perms
                    .iter()
                    .map(|tau| p[perms.iter().position(|g| *g == sigma.compose(tau)).unwrap()])
                    .collect();
                assert_eq!(lhs, h.pattern(&sx));
            }
        }
    }

    #[test]
    fn rank_detection() {
        let sizes = vec![3, 3, 2];
        let r1 = Hypothesis::new("r1", 2, Setting::NonPartite, sizes.clone(), 2, 1, |x| (x[0] == x[1]) as u32);
        assert_eq!(rank_of(&r1), 1);
        let r2 = Hypothesis::new("r2", 2, Setting::NonPartite, sizes, 2, 2, |x| x[2]);
        assert_eq!(rank_of(&r2), 2);
    }

    #[test]
    fn partization_roundtrip_and_rank() {
        for seed in 0..6 {
            let h = two_point_hyp(2, seed);
            let p = partize_hypothesis(&h);
            assert_eq!(p.labels, 4);
            assert_eq!(rank_of(&p), rank_of(&h));
            let back = unpartize_hypothesis(&p, 2);
            assert!(back.same_function(&h));
            // inverse without the stored origin
            let mut bare = p.clone();
            bare.origin = None;
            assert!(unpartize_hypothesis(&bare, 2).same_function(&h));
        }
        // k = 1: identity up to re-indexing
        let h = Hypothesis::from_table("u", 1, Setting::NonPartite, vec![3], 3, vec![2, 0, 1]);
        let p = partize_hypothesis(&h);
        assert_eq!(p.table(), h.table());
    }

    #[test]
    fn partized_class_is_bijective() {
        let members: Vec<_> = (0..5).map(|s| two_point_hyp(2, s)).collect();
        let c = HypothesisClass::explicit("c", members).unwrap();
        let p = partize_class(&c);
        assert_eq!(p.len(), c.len());
        for i in 0..c.len() {
            assert!(unpartize_hypothesis(&p.get(i), 2).same_function(&c.get(i)));
        }
    }

    #[test]
    fn explicit_dedup() {
        let h = two_point_hyp(2, 3);
        let c = HypothesisClass::explicit("c", vec![h.clone(), h.clone()]).unwrap();
        assert_eq!(c.len(), 1);
        assert!(c.contains(&h));
    }

    #[test]
    fn partite_star_indexing() {
        let h = Hypothesis::new("p", 2, Setting::Partite, vec![4, 4, 16], 16, 2, |x| x[2]);
        let layout = crate::index::PartLayout::uniform(2, 2);
        let x = PartiteConfig { coords: (0..8).map(|i| i % 4).collect(), layout };
        let y = h.star_partite(&x);
        assert_eq!(y.len(), 4);
        // tuple (1,2) reads the {1,2} coordinate at 1↦1,2↦2
        let pos = x.layout.rank(&"1↦1,2↦2".parse().unwrap());
        assert_eq!(y[1], x.coords[pos]);
        let _ = Injection::identity(2);
    }
}
