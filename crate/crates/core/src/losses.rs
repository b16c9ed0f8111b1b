//! Loss functions (plain and agnostic), total and empirical losses, flexibility witnesses,
//! neutral symbols and Bayes predictors.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::hypotheses::{
    all_points, decode_pattern, encode_pattern, pattern_len, permute_local, point_count, point_index,
    Hypothesis, HypothesisClass,
};
use crate::index::{
    binom, enumerate_subsets, factorial, falling, injection_rank, local_slots, permutations, Injection,
    PartLayout,
};
use crate::sampler::{Sample, Scenario};
use crate::templates::{join_local, Config, LocalMeasure, PartiteConfig};
use crate::{q, qf, qi, Setting, Q};

/// `ℓ(x, y, y')` on a local point and two label patterns (length `k!` non-partite, 1 partite).
pub type LocalLoss = Arc<dyn Fn(&[u32], &[u32], &[u32]) -> Q + Send + Sync>;
/// `ℓ(H, x, y)`.
pub type AgnosticFn = Arc<dyn Fn(&Hypothesis, &[u32], &[u32]) -> Q + Send + Sync>;
/// Regularization term `r(H)`.
pub type Regularizer = Arc<dyn Fn(&Hypothesis) -> Q + Send + Sync>;

/// Every label pattern of the given length, in canonical (encoded) order.
pub fn all_patterns(len: usize, labels: usize) -> Vec<Vec<u32>> {
    let n = (labels as u64).pow(len as u32) as u32;
    (0..n).map(|c| decode_pattern(c, len, labels)).collect()
}

/// `σ*(y)_τ = y_{σ∘τ}` on a pattern indexed by `S_k` (lex order).
pub fn permute_pattern(k: usize, s: usize, y: &[u32]) -> Vec<u32> {
    let perms = perm_list(k);
    let sigma = &perms[s];
    perms.iter().map(|tau| y[injection_rank(k, sigma.compose(tau).images())]).collect()
}

fn perm_list(k: usize) -> Arc<Vec<Injection>> {
    use std::sync::Mutex;
    static CACHE: Mutex<Option<HashMap<usize, Arc<Vec<Injection>>>>> = Mutex::new(None);
    let mut g = CACHE.lock().unwrap();
    g.get_or_insert_with(HashMap::new).entry(k).or_insert_with(|| Arc::new(permutations(k))).clone()
}

/// A non-agnostic loss with cached norm, separation and symmetry flags.
#[derive(Clone)]
pub struct LossFn {
    pub name: String,
    pub k: usize,
    pub setting: Setting,
    pub sizes: Vec<usize>,
    pub labels: usize,
    pub f: LocalLoss,
    pub sup_norm: Q,
    /// `inf_{y≠y'} ℓ(x,y,y')`; `None` when only one pattern exists.
    pub separation: Option<Q>,
    pub zero_on_diagonal: bool,
    pub symmetric: bool,
}

impl fmt::Debug for LossFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LossFn({}, k={}, {:?})", self.name, self.k, self.setting)
    }
}

/// Flags recomputed by exhaustive enumeration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LossFlags {
    pub sup_norm: Q,
    pub separation: Option<Q>,
    pub zero_on_diagonal: bool,
    pub symmetric: bool,
}

impl LossFn {
    /// Builds a loss and computes its flags exhaustively.
    pub fn new(
        name: impl Into<String>,
        k: usize,
        setting: Setting,
        sizes: Vec<usize>,
        labels: usize,
        f: impl Fn(&[u32], &[u32], &[u32]) -> Q + Send + Sync + 'static,
    ) -> Self {
        let mut l = LossFn {
            name: name.into(),
            k,
            setting,
            sizes,
            labels,
            f: Arc::new(f),
            sup_norm: Q::zero(),
            separation: None,
            zero_on_diagonal: true,
            symmetric: true,
        };
        let flags = l.compute_flags();
        l.sup_norm = flags.sup_norm;
        l.separation = flags.separation;
        l.zero_on_diagonal = flags.zero_on_diagonal;
        l.symmetric = flags.symmetric;
        l
    }

    pub fn eval(&self, x: &[u32], y: &[u32], yp: &[u32]) -> Q {
        (self.f)(x, y, yp)
    }

    pub fn pattern_len(&self) -> usize {
        pattern_len(self.k, self.setting)
    }

    pub fn is_separated(&self) -> bool {
        self.zero_on_diagonal && self.separation.as_ref().map_or(true, |s| s > &Q::zero())
    }

    /// Exhaustive recomputation of the flags over every point and pattern pair.
    pub fn compute_flags(&self) -> LossFlags {
        let plen = self.pattern_len();
        let pats = all_patterns(plen, self.labels);
        let mut sup = Q::zero();
        let mut sep: Option<Q> = None;
        let mut diag = true;
        let mut sym = true;
        let nperm = if self.setting == Setting::NonPartite { factorial(self.k) as usize } else { 1 };
        for x in all_points(&self.sizes) {
            for y in &pats {
                for yp in &pats {
                    let v = self.eval(&x, y, yp);
                    if v > sup {
                        sup = v.clone();
                    }
                    if y == yp {
                        diag &= v.is_zero();
                    } else if sep.as_ref().map_or(true, |s| &v < s) {
                        sep = Some(v.clone());
                    }
                    if sym {
                        for s in 1..nperm {
                            let w = self.eval(
                                &permute_local(self.k, s, &x),
                                &permute_pattern(self.k, s, y),
                                &permute_pattern(self.k, s, yp),
                            );
                            if w != v {
                                sym = false;
                                break;
                            }
                        }
                    }
                }
            }
        }
        LossFlags { sup_norm: sup, separation: sep, zero_on_diagonal: diag, symmetric: sym }
    }

    /// `min{ℓ, 1}`.
    pub fn capped(&self) -> LossFn {
        let f = self.f.clone();
        LossFn::new(format!("min({},1)", self.name), self.k, self.setting, self.sizes.clone(), self.labels, move |x, y, yp| {
            let v = f(x, y, yp);
            if v > Q::one() {
                Q::one()
            } else {
                v
            }
        })
    }

    /// `ℓ^kpart(x, y, y') = ℓ(ι(x), y, y')` with patterns encoded as single partite labels.
    pub fn partize(&self) -> LossFn {
        assert_eq!(self.setting, Setting::NonPartite);
        let f = self.f.clone();
        let plen = self.pattern_len();
        let base = self.labels;
        let labels = (base as u64).pow(plen as u32) as usize;
        let mut l = LossFn {
            name: format!("{}^kpart", self.name),
            k: self.k,
            setting: Setting::Partite,
            sizes: self.sizes.clone(),
            labels,
            f: Arc::new(move |x, y, yp| f(x, &decode_pattern(y[0], plen, base), &decode_pattern(yp[0], plen, base))),
            sup_norm: self.sup_norm.clone(),
            separation: self.separation.clone(),
            zero_on_diagonal: self.zero_on_diagonal,
            symmetric: true,
        };
        // k-partite losses carry no S_k action
        l.symmetric = true;
        l
    }
}

/// `ℓ_{0/1}(x, y, y') = 1[y ≠ y']`.
pub fn zero_one_loss(labels: usize, k: usize, setting: Setting, sizes: Vec<usize>) -> LossFn {
    let plen = pattern_len(k, setting);
    let many = (labels as u64).pow(plen as u32) > 1;
    LossFn {
        name: "01".into(),
        k,
        setting,
        sizes,
        labels,
        f: Arc::new(|_, y, yp| if y == yp { Q::zero() } else { Q::one() }),
        sup_norm: if many { Q::one() } else { Q::zero() },
        separation: many.then(Q::one),
        zero_on_diagonal: true,
        symmetric: true,
    }
}

/// An agnostic loss `ℓ(H, x, y)`, optionally with a locality decomposition
/// `ℓ(H,x,y) = ℓ_r(x, H*_k(x), y) + r(H)`.
#[derive(Clone)]
pub struct AgnosticLossFn {
    pub name: String,
    pub k: usize,
    pub setting: Setting,
    pub sizes: Vec<usize>,
    pub labels: usize,
    pub f: AgnosticFn,
    pub local: Option<LocalLoss>,
    pub regularizer: Option<Regularizer>,
    pub sup_norm: Q,
    pub symmetric: bool,
}

impl fmt::Debug for AgnosticLossFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AgnosticLossFn({}, k={}, {:?})", self.name, self.k, self.setting)
    }
}

impl AgnosticLossFn {
    pub fn eval(&self, h: &Hypothesis, x: &[u32], y: &[u32]) -> Q {
        (self.f)(h, x, y)
    }

    /// The local part when the regularizer is absent (so ERM decomposes per point).
    pub fn purely_local(&self) -> Option<LocalLoss> {
        if self.regularizer.is_none() {
            self.local.clone()
        } else {
            None
        }
    }

    /// Checks the stored decomposition on every member, point and pattern.
    pub fn check_decomposition(&self, class: &HypothesisClass) -> Result<(), String> {
        let local = self.local.as_ref().ok_or("no decomposition stored")?;
        let pats = all_patterns(pattern_len(self.k, self.setting), self.labels);
        for h in class.members() {
            let r = self.regularizer.as_ref().map_or_else(Q::zero, |r| r(&h));
            for x in all_points(&self.sizes) {
                let hp = h.pattern(&x);
                for y in &pats {
                    if self.eval(&h, &x, y) != local(&x, &hp, y) + &r {
                        return Err(format!("decomposition fails for {} at {x:?}", h.name));
                    }
                }
            }
        }
        Ok(())
    }

    /// `sup_{H,x,y} ℓ(H,x,y)` over the given class.
    pub fn sup_over(&self, class: &HypothesisClass) -> Q {
        let pats = all_patterns(pattern_len(self.k, self.setting), self.labels);
        let mut sup = Q::zero();
        for h in class.members() {
            for x in all_points(&self.sizes) {
                for y in &pats {
                    let v = self.eval(&h, &x, y);
                    if v > sup {
                        sup = v;
                    }
                }
            }
        }
        sup
    }
}

/// `ℓ^ag(H, x, y) = ℓ(x, H*_k(x), y)`: local with zero regularizer, same norm and symmetry.
pub fn wrap_agnostic(ell: &LossFn) -> AgnosticLossFn {
    let f = ell.f.clone();
    AgnosticLossFn {
        name: format!("{}^ag", ell.name),
        k: ell.k,
        setting: ell.setting,
        sizes: ell.sizes.clone(),
        labels: ell.labels,
        f: Arc::new(move |h, x, y| f(x, &h.pattern(x), y)),
        local: Some(ell.f.clone()),
        regularizer: None,
        sup_norm: ell.sup_norm.clone(),
        symmetric: ell.symmetric,
    }
}

/// Agnostic 0/1 loss `1[H*_k(x) ≠ y]`.
pub fn agnostic_zero_one(labels: usize, k: usize, setting: Setting, sizes: Vec<usize>) -> AgnosticLossFn {
    wrap_agnostic(&zero_one_loss(labels, k, setting, sizes))
}

/// A choice of injection `α_U` with image `U` for every `U ∈ binom([m], k)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderChoice {
    pub m: usize,
    pub k: usize,
    pub choice: Vec<Injection>,
}

impl OrderChoice {
    /// Each `α_U` enumerates `U` increasingly.
    pub fn canonical(m: usize, k: usize) -> Self {
        OrderChoice { m, k, choice: crate::index::increasing_injections(m, k) }
    }

    pub fn new(m: usize, k: usize, choice: Vec<Injection>) -> Result<Self, String> {
        let us: Vec<_> = enumerate_subsets(m, k).into_iter().filter(|u| u.len() == k).collect();
        if us.len() != choice.len() {
            return Err("one injection per k-subset required".into());
        }
        for (u, a) in us.iter().zip(&choice) {
            if a.image_set() != u.members() {
                return Err(format!("α_U does not have image {u}"));
            }
        }
        Ok(OrderChoice { m, k, choice })
    }

    /// Every order choice (feasible only for tiny `m`).
    pub fn all(m: usize, k: usize) -> Vec<OrderChoice> {
        let perms = permutations(k);
        let us: Vec<_> = enumerate_subsets(m, k).into_iter().filter(|u| u.len() == k).collect();
        let mut out = vec![Vec::new()];
        for u in &us {
            let base = Injection::new(u.members().to_vec()).unwrap();
            let mut next = Vec::new();
            for prefix in &out {
                for p in &perms {
                    let mut v: Vec<Injection> = prefix.clone();
                    v.push(base.compose(p));
                    next.push(v);
                }
            }
            out = next;
        }
        out.into_iter().map(|choice| OrderChoice { m, k, choice }).collect()
    }
}

/// One distinct `(local point, observed pattern)` pair of a sample with its multiplicity.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Atom {
    pub x: Vec<u32>,
    pub y: Vec<u32>,
    pub count: u64,
}

/// A sample aggregated into the terms of its empirical loss.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Atoms {
    pub k: usize,
    pub setting: Setting,
    pub entries: Vec<Atom>,
    pub total: u64,
}

/// Largest key space counted in a dense array instead of a hash map.
const DENSE_KEYS: u64 = 1 << 20;

struct Aggregator {
    sizes: Vec<usize>,
    radix: u64,
    plen: usize,
    dense: Vec<u64>,
    map: HashMap<u64, u64>,
}

impl Aggregator {
    fn new(sizes: &[usize], labels: usize, plen: usize) -> Self {
        let radix = (labels as u64).pow(plen as u32);
        let keys = (point_count(sizes) as u64).saturating_mul(radix);
        Aggregator {
            sizes: sizes.to_vec(),
            radix,
            plen,
            dense: if keys <= DENSE_KEYS { vec![0; keys as usize] } else { Vec::new() },
            map: HashMap::new(),
        }
    }

    fn add(&mut self, x: &[u32], y: &[u32], labels: usize) {
        let key = point_index(&self.sizes, x) as u64 * self.radix + encode_pattern(y, labels) as u64;
        match self.dense.get_mut(key as usize) {
            Some(c) => *c += 1,
            None => *self.map.entry(key).or_insert(0) += 1,
        }
    }

    fn finish(self, k: usize, setting: Setting, labels: usize) -> Atoms {
        let mut keys: Vec<(u64, u64)> = self.map.into_iter().collect();
        keys.extend(self.dense.iter().enumerate().filter(|(_, &c)| c > 0).map(|(key, &c)| (key as u64, c)));
        keys.sort_unstable();
        let total = keys.iter().map(|p| p.1).sum();
        let entries = keys
            .into_iter()
            .map(|(key, count)| Atom {
                x: crate::hypotheses::point_from_index(&self.sizes, (key / self.radix) as usize),
                y: decode_pattern((key % self.radix) as u32, self.plen, labels),
                count,
            })
            .collect();
        Atoms { k, setting, entries, total }
    }
}

impl Atoms {
    /// Terms `(α_U*(x), (y_{α_U∘π})_π)` for every `U ∈ binom([m], k)`.
    pub fn nonpartite(x: &Config, y: &[u32], k: usize, oc: &OrderChoice, sizes: &[usize], labels: usize) -> Self {
        let slots = local_slots(k);
        let perms = permutations(k);
        let mut agg = Aggregator::new(sizes, labels, perms.len());
        let mut local = vec![0u32; slots.len()];
        let mut pat = vec![0u32; perms.len()];
        let mut buf = Vec::with_capacity(k);
        for a in &oc.choice {
            let img = a.images();
            for (j, s) in slots.iter().enumerate() {
                buf.clear();
                buf.extend(s.members().iter().map(|&i| img[i as usize - 1]));
                buf.sort_unstable();
                local[j] = x.coords[crate::index::subset_rank(x.m, &buf)];
            }
            for (t, p) in perms.iter().enumerate() {
                buf.clear();
                buf.extend(p.images().iter().map(|&i| img[i as usize - 1]));
                pat[t] = y[injection_rank(x.m, &buf)];
            }
            agg.add(&local, &pat, labels);
        }
        agg.finish(k, Setting::NonPartite, labels)
    }

    /// Terms `(α*(x), y_α)` for every `α ∈ ∏[m_i]`.
    pub fn partite(x: &PartiteConfig, y: &[u32], k: usize, sizes: &[usize], labels: usize) -> Self {
        let layout = &x.layout;
        let slots = local_slots(k);
        let mut agg = Aggregator::new(sizes, labels, 1);
        let tuples = crate::hypotheses::all_tuples(&layout.sizes);
        let mut local = vec![0u32; slots.len()];
        let mut vals = Vec::with_capacity(k);
        for (t, tup) in tuples.iter().enumerate() {
            for (d, s) in slots.iter().enumerate() {
                vals.clear();
                vals.extend(s.members().iter().map(|&i| tup[(i - 1) as usize]));
                local[d] = x.coords[layout.position(d, &vals)];
            }
            agg.add(&local, &[y[t]], labels);
        }
        agg.finish(k, Setting::Partite, labels)
    }

    /// Atoms of a sample using the canonical order choice.
    pub fn of_sample(s: &Sample, k: usize, sizes: &[usize], labels: usize) -> Self {
        match s {
            Sample::NonPartite { x, y } => {
                Atoms::nonpartite(x, y, k, &OrderChoice::canonical(x.m, k), sizes, labels)
            }
            Sample::Partite { x, y } => Atoms::partite(x, y, k, sizes, labels),
        }
    }

    /// Reinterprets encoded partite labels as patterns of length `plen` over `base` labels.
    pub fn decode_patterns(&self, plen: usize, base: usize) -> Atoms {
        Atoms {
            k: self.k,
            setting: Setting::NonPartite,
            entries: self
                .entries
                .iter()
                .map(|a| Atom { x: a.x.clone(), y: decode_pattern(a.y[0], plen, base), count: a.count })
                .collect(),
            total: self.total,
        }
    }

    /// Empirical loss `Σ count · ℓ(H, x, y) / total`.
    pub fn loss(&self, ell: &AgnosticLossFn, h: &Hypothesis) -> Q {
        if self.total == 0 {
            return Q::zero();
        }
        let mut acc = Q::zero();
        for a in &self.entries {
            acc += ell.eval(h, &a.x, &a.y) * qi(a.count as i64);
        }
        acc / qi(self.total as i64)
    }

    pub fn local_loss(&self, ell: &LocalLoss, h: &Hypothesis) -> Q {
        if self.total == 0 {
            return Q::zero();
        }
        let mut acc = Q::zero();
        for a in &self.entries {
            acc += ell(&a.x, &h.pattern(&a.x), &a.y) * qi(a.count as i64);
        }
        acc / qi(self.total as i64)
    }
}

/// `L^α_{x,y,ℓ}(H)`: mean over `U` of `ℓ(H, α_U*(x), b_α(y)_U)`, computed term by term.
pub fn empirical_loss_nonpartite(
    x: &Config,
    y: &[u32],
    ell: &AgnosticLossFn,
    h: &Hypothesis,
    oc: &OrderChoice,
) -> Result<Q, String> {
    if y.len() != falling(x.m, h.k) as usize || oc.m != x.m {
        return Err("label tensor or order choice does not match the sample".into());
    }
    let perms = permutations(h.k);
    let mut acc = Q::zero();
    for a in &oc.choice {
        let local = crate::index::pullback(a, x)?.coords;
        let pat: Vec<u32> = perms.iter().map(|p| y[injection_rank(x.m, a.compose(p).images())]).collect();
        acc += ell.eval(h, &local, &pat);
    }
    Ok(acc / qi(binom(x.m, h.k) as i64))
}

/// `L_{x,y,ℓ}(H)`: mean over `α ∈ ∏V_i` of `ℓ(H, α*(x), y_α)`.
pub fn empirical_loss_partite(x: &PartiteConfig, y: &[u32], ell: &AgnosticLossFn, h: &Hypothesis) -> Result<Q, String> {
    let tuples = crate::hypotheses::all_tuples(&x.layout.sizes);
    if y.len() != tuples.len() {
        return Err("label tensor does not match the sample".into());
    }
    let mut acc = Q::zero();
    for (t, tup) in tuples.iter().enumerate() {
        let local = crate::index::pullback_partite(tup, x)?.coords;
        acc += ell.eval(h, &local, &[y[t]]);
    }
    Ok(acc / qi(tuples.len() as i64))
}

/// `L_{μ,F,ℓ}(H) = E_{x~μ^k}[ℓ(x, H*_k(x), F*_k(x))]`, exact.
pub fn total_loss(mu: &LocalMeasure, f: &Hypothesis, ell: &LossFn, h: &Hypothesis) -> Q {
    let mut acc = Q::zero();
    for (x, p) in mu.atoms() {
        acc += p * ell.eval(&x, &h.pattern(&x), &f.pattern(&x));
    }
    acc
}

/// `L_{μ,μ',F,ℓ}(H) = E_{(x,x')}[ℓ(H, x, F*_k(x, x'))]`, exact.
pub fn agnostic_total_loss(sc: &Scenario, ell: &AgnosticLossFn, h: &Hypothesis) -> Q {
    let xs = sc.x_measure().atoms();
    let xps = sc.xp_measure().atoms();
    let right = sc.hidden_sizes();
    let mut acc = Q::zero();
    for (x, px) in &xs {
        // conditional law of the observed pattern given x
        let mut cond: BTreeMap<Vec<u32>, Q> = BTreeMap::new();
        for (xp, pxp) in &xps {
            *cond.entry(sc.f.pattern(&join_local(x, xp, &right))).or_insert_with(Q::zero) += pxp;
        }
        for (y, py) in cond {
            acc += px * py * ell.eval(h, x, &y);
        }
    }
    acc
}

/// Conditional law of `F*_k(x, x')` given the visible local point `x`.
pub fn conditional_pattern_law(sc: &Scenario, x: &[u32]) -> BTreeMap<Vec<u32>, Q> {
    let right = sc.hidden_sizes();
    let mut cond: BTreeMap<Vec<u32>, Q> = BTreeMap::new();
    for (xp, pxp) in sc.xp_measure().atoms() {
        *cond.entry(sc.f.pattern(&join_local(x, &xp, &right))).or_insert_with(Q::zero) += pxp;
    }
    cond
}

/// How a flexibility witness realizes its auxiliary randomness.
#[derive(Clone)]
pub enum WitnessKind {
    /// A finite auxiliary template `Σ` (one slot per `A ∈ r(k)`) with rational weights and
    /// `G` on local points of `Ω ⊗ Σ`.
    Finite { sigma: LocalMeasure, sigma_by_arity: Option<Vec<Vec<Q>>>, g: Hypothesis },
    /// The induced law of `G*_m(x, z)` is uniform over all label tensors; used for the 0/1
    /// loss at `k ≥ 2`, where `Σ_1` is continuous.
    UniformTensor,
}

/// A witness `(Σ, ν, G, 𝒩)` of flexibility.
#[derive(Clone)]
pub struct FlexibilityWitness {
    pub k: usize,
    pub setting: Setting,
    /// Slot sizes of `Ω` on local points.
    pub omega_sizes: Vec<usize>,
    pub labels: usize,
    pub kind: WitnessKind,
}

impl fmt::Debug for FlexibilityWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FlexibilityWitness(k={}, {:?})", self.k, self.setting)
    }
}

/// Witness of flexibility of the 0/1 loss (agnostic and non-agnostic).
pub fn flexibility_witness_01(labels: usize, k: usize, setting: Setting, omega_sizes: Vec<usize>) -> FlexibilityWitness {
    let slots = local_slots(k);
    let kind = match setting {
        Setting::NonPartite if k >= 2 => WitnessKind::UniformTensor,
        _ => {
            // Σ is Λ (uniform) on the top slot [k]; G reads that coordinate.
            let top = slots.len() - 1;
            let sizes: Vec<usize> = (0..slots.len()).map(|j| if j == top { labels } else { 1 }).collect();
            let weights: Vec<Vec<Q>> = sizes.iter().map(|&n| vec![q(1, n as i64); n]).collect();
            let sigma = LocalMeasure { sizes: sizes.clone(), weights: weights.clone() };
            let prod: Vec<usize> = omega_sizes.iter().zip(&sizes).map(|(a, b)| a * b).collect();
            let sz = sizes.clone();
            let g = Hypothesis::new("G01", k, setting, prod, labels, k, move |x| x[top] % sz[top] as u32);
            let by_arity = (setting == Setting::NonPartite).then(|| vec![weights[top].clone()]);
            WitnessKind::Finite { sigma, sigma_by_arity: by_arity, g }
        }
    };
    FlexibilityWitness { k, setting, omega_sizes, labels, kind }
}

impl FlexibilityWitness {
    /// Law of `G*_k(x, z)` for `z ~ ν^k` at a local point `x`.
    pub fn pattern_law(&self, x: &[u32]) -> BTreeMap<Vec<u32>, Q> {
        let plen = pattern_len(self.k, self.setting);
        match &self.kind {
            WitnessKind::UniformTensor => {
                let pats = all_patterns(plen, self.labels);
                let p = Q::new(1.into(), (pats.len() as i64).into());
                pats.into_iter().map(|y| (y, p.clone())).collect()
            }
            WitnessKind::Finite { sigma, g, .. } => {
                let mut law = BTreeMap::new();
                for (z, pz) in sigma.atoms() {
                    *law.entry(g.pattern(&join_local(x, &z, &sigma.sizes))).or_insert_with(Q::zero) += pz;
                }
                law
            }
        }
    }

    /// `ℓ^{Σ,ν,G}(x) = E_z[ℓ(x, y, G*_k(x, z))]` for a fixed pattern `y`.
    pub fn averaged_loss(&self, ell: &LossFn, x: &[u32], y: &[u32]) -> Q {
        self.pattern_law(x).iter().map(|(g, p)| p * ell.eval(x, y, g)).sum()
    }

    /// `E_z[ℓ(H, x, G*_k(x, z))]`.
    pub fn averaged_agnostic(&self, ell: &AgnosticLossFn, h: &Hypothesis, x: &[u32]) -> Q {
        self.pattern_law(x).iter().map(|(g, p)| p * ell.eval(h, x, g)).sum()
    }

    /// Checks that the averaged loss does not depend on `y`; returns the common value per point.
    pub fn check_indep_y(&self, ell: &LossFn) -> Result<Vec<Q>, String> {
        let pats = all_patterns(pattern_len(self.k, self.setting), self.labels);
        let mut out = Vec::new();
        for x in all_points(&self.omega_sizes) {
            let v0 = self.averaged_loss(ell, &x, &pats[0]);
            for y in &pats[1..] {
                if self.averaged_loss(ell, &x, y) != v0 {
                    return Err(format!("averaged loss depends on y at {x:?}"));
                }
            }
            out.push(v0);
        }
        Ok(out)
    }

    /// Checks that the averaged agnostic loss does not depend on `H ∈ 𝓗`.
    pub fn check_indep_h(&self, ell: &AgnosticLossFn, class: &HypothesisClass) -> Result<(), String> {
        let members = class.members();
        for x in all_points(&self.omega_sizes) {
            let v0 = self.averaged_agnostic(ell, &members[0], &x);
            for h in &members[1..] {
                if self.averaged_agnostic(ell, h, &x) != v0 {
                    return Err(format!("averaged loss depends on H at {x:?}"));
                }
            }
        }
        Ok(())
    }

    /// Number of label tensor entries on a sample of size `m`.
    fn tensor_len(&self, m: usize) -> usize {
        match self.setting {
            Setting::NonPartite => falling(m, self.k) as usize,
            Setting::Partite => m.pow(self.k as u32),
        }
    }

    /// Per-coordinate radices of the randomness of `𝒩` at size `m` (digits of `b`).
    fn digits(&self, m: usize) -> Vec<(u64, Vec<u64>)> {
        match &self.kind {
            WitnessKind::UniformTensor => {
                vec![(self.labels as u64, vec![1; self.labels]); self.tensor_len(m)]
            }
            WitnessKind::Finite { sigma, sigma_by_arity, .. } => {
                // each coordinate of z is drawn by a digit in [D] mapped through the
                // cumulative numerators of its weights over the common denominator D
                let to_counts = |w: &[Q]| -> (u64, Vec<u64>) {
                    let d = w.iter().fold(num_bigint::BigInt::one(), |acc, p| acc.lcm(p.denom()));
                    let counts = w.iter().map(|p| (p * Q::from_integer(d.clone())).to_integer().to_u64().unwrap()).collect();
                    (d.to_u64().unwrap(), counts)
                };
                match self.setting {
                    Setting::NonPartite => {
                        let w = sigma_by_arity.as_ref().expect("non-partite witness stores Σ by arity");
                        let mut out = Vec::new();
                        for s in 1..=self.k.min(m) {
                            let c = if s <= w.len() { to_counts(&w[s - 1]) } else { (1, vec![1]) };
                            for _ in 0..binom(m, s) {
                                out.push(c.clone());
                            }
                        }
                        out
                    }
                    Setting::Partite => {
                        let layout = PartLayout::uniform(m, self.k);
                        (0..layout.len()).map(|i| to_counts(&sigma.weights[layout.domain_of(i)])).collect()
                    }
                }
            }
        }
    }

    /// `R_𝒩(m)`.
    pub fn r_n(&self, m: usize) -> BigUint {
        self.digits(m).iter().fold(BigUint::one(), |acc, (d, _)| acc * BigUint::from(*d))
    }

    fn decode(&self, m: usize, b: &BigUint) -> Vec<u32> {
        let mut b = b.clone();
        self.digits(m)
            .iter()
            .map(|(d, counts)| {
                let (q, r) = b.div_rem(&BigUint::from(*d));
                b = q;
                let r = r.to_u64().unwrap();
                let mut acc = 0;
                for (v, c) in counts.iter().enumerate() {
                    acc += c;
                    if r < acc {
                        return v as u32;
                    }
                }
                unreachable!("digit below the denominator")
            })
            .collect()
    }

    /// `𝒩(x, b)` on a non-partite point over `[m]`: labels indexed by injections.
    pub fn noise_nonpartite(&self, x: &Config, b: &BigUint) -> Vec<u32> {
        let z = self.decode(x.m, b);
        match &self.kind {
            WitnessKind::UniformTensor => z,
            WitnessKind::Finite { g, sigma_by_arity, .. } => {
                let w = sigma_by_arity.as_ref().unwrap();
                let right = crate::templates::Template::new((1..=self.k).map(|i| if i <= w.len() { w[i - 1].len() } else { 1 }).collect()).unwrap();
                let zc = Config { m: x.m, cap: x.cap, coords: z };
                g.star(&Config::join(x, &zc, &right))
            }
        }
    }

    /// `𝒩(x, b)` on a partite point: labels indexed by tuples.
    pub fn noise_partite(&self, x: &PartiteConfig, b: &BigUint) -> Vec<u32> {
        let m = x.layout.sizes[0];
        let z = self.decode(m, b);
        match &self.kind {
            WitnessKind::UniformTensor => z,
            WitnessKind::Finite { g, sigma, .. } => {
                let right = crate::templates::PartiteTemplate::new(self.k, sigma.sizes.clone()).unwrap();
                let zc = PartiteConfig { layout: x.layout.clone(), coords: z };
                g.star_partite(&PartiteConfig::join(x, &zc, &right))
            }
        }
    }

    /// Exact law of `𝒩(x, b)` under uniform `b` (tiny `m` only).
    pub fn noise_law_nonpartite(&self, x: &Config) -> BTreeMap<Vec<u32>, Q> {
        let r = self.r_n(x.m);
        let n = r.to_u64().expect("tiny randomness");
        let p = Q::new(1.into(), (n as i64).into());
        let mut law = BTreeMap::new();
        for b in 0..n {
            *law.entry(self.noise_nonpartite(x, &BigUint::from(b))).or_insert_with(Q::zero) += &p;
        }
        law
    }

    /// Exact law of `G*_m(x, z)` under `z ~ ν^m` (tiny `m` only).
    pub fn g_law_nonpartite(&self, x: &Config) -> BTreeMap<Vec<u32>, Q> {
        match &self.kind {
            WitnessKind::UniformTensor => {
                let len = self.tensor_len(x.m);
                let pats = all_patterns(len, self.labels);
                let p = Q::new(1.into(), (pats.len() as i64).into());
                pats.into_iter().map(|y| (y, p.clone())).collect()
            }
            WitnessKind::Finite { g, sigma_by_arity, .. } => {
                let w = sigma_by_arity.as_ref().unwrap();
                let subsets = enumerate_subsets(x.m, x.cap);
                let weights: Vec<Vec<Q>> = subsets
                    .iter()
                    .map(|a| if a.len() <= w.len() { w[a.len() - 1].clone() } else { vec![Q::one()] })
                    .collect();
                let meas = LocalMeasure { sizes: weights.iter().map(|v| v.len()).collect(), weights };
                let right = crate::templates::Template::new((1..=self.k).map(|i| if i <= w.len() { w[i - 1].len() } else { 1 }).collect()).unwrap();
                let mut law = BTreeMap::new();
                for (z, pz) in meas.atoms() {
                    let zc = Config { m: x.m, cap: x.cap, coords: z };
                    *law.entry(g.star(&Config::join(x, &zc, &right))).or_insert_with(Q::zero) += pz;
                }
                law
            }
        }
    }
}

/// The distinguished label `⊥` and its cost `ℓ_⊥`.
#[derive(Clone)]
pub struct NeutralSymbolInfo {
    pub bottom: u32,
    pub bottom_cost: Arc<dyn Fn(&[u32]) -> Q + Send + Sync>,
}

impl fmt::Debug for NeutralSymbolInfo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NeutralSymbolInfo(⊥={})", self.bottom)
    }
}

/// `ℓ^{Σ,ν,G,⊥}` over `Λ ∪ {⊥}` (with `⊥ = L`): the original loss on `⊥`-free patterns and
/// `ℓ^{Σ,ν,G}(x)` otherwise. `reference` is any member of the class, used to evaluate the
/// (hypothesis-independent) averaged loss.
pub fn extend_with_neutral(
    ell: &AgnosticLossFn,
    w: &FlexibilityWitness,
    class: &HypothesisClass,
) -> Result<(AgnosticLossFn, NeutralSymbolInfo), String> {
    w.check_indep_h(ell, class)?;
    let bottom = ell.labels as u32;
    let reference = class.get(0);
    let (w2, e2) = (w.clone(), ell.clone());
    let cost: Arc<dyn Fn(&[u32]) -> Q + Send + Sync> =
        Arc::new(move |x: &[u32]| w2.averaged_agnostic(&e2, &reference, x));
    let (f0, c2) = (ell.f.clone(), cost.clone());
    let local = ell.local.clone().map(|l| {
        let c3 = cost.clone();
        let ll: LocalLoss = Arc::new(move |x: &[u32], hp: &[u32], y: &[u32]| {
            if y.contains(&bottom) {
                c3(x)
            } else {
                l(x, hp, y)
            }
        });
        ll
    });
    let ext = AgnosticLossFn {
        name: format!("{}^⊥", ell.name),
        k: ell.k,
        setting: ell.setting,
        sizes: ell.sizes.clone(),
        labels: ell.labels + 1,
        f: Arc::new(move |h, x, y| if y.contains(&bottom) { c2(x) } else { f0(h, x, y) }),
        local,
        regularizer: ell.regularizer.clone(),
        sup_norm: ell.sup_norm.clone(),
        symmetric: ell.symmetric,
    };
    Ok((ext, NeutralSymbolInfo { bottom, bottom_cost: cost }))
}

/// Exhaustive check that `⊥` is neutral: `ℓ(H,x,y) = ℓ_⊥(x)` whenever `⊥ ∈ im(y)`.
pub fn verify_neutral(ell: &AgnosticLossFn, info: &NeutralSymbolInfo, class: &HypothesisClass) -> Result<(), String> {
    let pats = all_patterns(pattern_len(ell.k, ell.setting), ell.labels);
    for h in class.members() {
        for x in all_points(&ell.sizes) {
            let c = (info.bottom_cost)(&x);
            for y in pats.iter().filter(|y| y.contains(&info.bottom)) {
                if ell.eval(&h, &x, y) != c {
                    return Err(format!("⊥ not neutral at {x:?}, {y:?}"));
                }
            }
        }
    }
    Ok(())
}

/// The Bayes predictor of `(μ, μ', F, ℓ)`.
///
/// Partite: pointwise argmin of the conditional expected loss, smallest label on ties.
/// Non-partite: `B` is chosen per `S_k`-orbit of local points, minimizing the orbit's
/// mass-weighted conditional loss over label assignments to the distinct orbit points
/// (smallest assignment on ties). This minimizes the total loss over all hypotheses and,
/// for symmetric losses, is pointwise optimal over every pattern realizable at `x`.
pub fn bayes_predictor(sc: &Scenario, ell: &LossFn) -> Hypothesis {
    let sizes = sc.visible_sizes();
    let mu = sc.x_measure();
    let labels = sc.labels();
    let k = sc.k;
    let n = point_count(&sizes);
    let mut table = vec![0u32; n];
    let cond_cost = |x: &[u32], y: &[u32]| -> Q {
        conditional_pattern_law(sc, x).iter().map(|(f, p)| p * ell.eval(x, y, f)).sum()
    };
    match sc.setting() {
        Setting::Partite => {
            for (i, x) in all_points(&sizes).enumerate() {
                let mut best: Option<(Q, u32)> = None;
                for v in 0..labels as u32 {
                    let c = cond_cost(&x, &[v]);
                    if best.as_ref().map_or(true, |(b, _)| &c < b) {
                        best = Some((c, v));
                    }
                }
                table[i] = best.unwrap().1;
            }
        }
        Setting::NonPartite => {
            let nperm = factorial(k) as usize;
            let mut done = vec![false; n];
            for (i, x) in all_points(&sizes).enumerate() {
                if done[i] {
                    continue;
                }
                // orbit[s] = index of σ_s*(x)
                let orbit: Vec<usize> = (0..nperm).map(|s| point_index(&sizes, &permute_local(k, s, &x))).collect();
                let mut distinct: Vec<usize> = orbit.clone();
                distinct.sort_unstable();
                distinct.dedup();
                let points: Vec<Vec<u32>> =
                    distinct.iter().map(|&j| crate::hypotheses::point_from_index(&sizes, j)).collect();
                let masses: Vec<Q> = points.iter().map(|p| mu.mass(p)).collect();
                let all_zero = masses.iter().all(|m| m.is_zero());
                let mut best: Option<(Q, Vec<u32>)> = None;
                for assign in all_patterns(distinct.len(), labels) {
                    let value_at = |j: usize| assign[distinct.binary_search(&j).unwrap()];
                    let mut cost = Q::zero();
                    for (p, mass) in points.iter().zip(&masses) {
                        if !all_zero && mass.is_zero() {
                            continue;
                        }
                        let pat: Vec<u32> = (0..nperm)
                            .map(|s| value_at(point_index(&sizes, &permute_local(k, s, p))))
                            .collect();
                        let c = cond_cost(p, &pat);
                        cost += if all_zero { c } else { c * mass };
                    }
                    let better = match &best {
                        None => true,
                        Some((b, a)) => cost < *b || (cost == *b && reversed_lt(&assign, a)),
                    };
                    if better {
                        best = Some((cost, assign));
                    }
                }
                let (_, assign) = best.unwrap();
                for (j, &v) in distinct.iter().zip(&assign) {
                    table[*j] = v;
                    done[*j] = true;
                }
            }
        }
    }
    let mut b = Hypothesis::from_table("bayes", k, sc.setting(), sizes, labels, table);
    b.name = "bayes".into();
    b
}

/// Lexicographic comparison with the first entry most significant.
fn reversed_lt(a: &[u32], b: &[u32]) -> bool {
    a < b
}

/// Cover–Hart bound on the nearest-neighbour asymptotic risk: `R*(2 − L/(L−1)·R*)`.
pub fn cover_hart_bound(r_star: f64, labels: usize) -> f64 {
    let l = labels as f64;
    r_star * (2.0 - l / (l - 1.0) * r_star)
}

/// Float view of an exact loss, for Monte Carlo accumulation.
pub fn as_f64(x: &Q) -> f64 {
    qf(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::Measure;
    use crate::templates::ProbTemplate;

    fn sizes2() -> Vec<usize> {
        vec![2, 2, 2]
    }

    #[test]
    fn zero_one_values_and_flags() {
        let l = zero_one_loss(2, 2, Setting::NonPartite, sizes2());
        assert_eq!(l.eval(&[0, 0, 0], &[1, 0], &[1, 0]), Q::zero());
        assert_eq!(l.eval(&[0, 0, 0], &[1, 0], &[1, 1]), Q::one());
        let flags = l.compute_flags();
        assert_eq!(flags.sup_norm, Q::one());
        assert_eq!(flags.separation, Some(Q::one()));
        assert!(flags.symmetric && flags.zero_on_diagonal);
        assert!(l.is_separated());
    }

    #[test]
    fn asymmetric_loss_detected() {
        let l = LossFn::new("asym", 2, Setting::NonPartite, sizes2(), 2, |x, y, yp| {
            if y[0] != yp[0] && x[0] == 1 {
                Q::one()
            } else {
                Q::zero()
            }
        });
        assert!(!l.symmetric);
    }

    fn h_from(bits: u32) -> Hypothesis {
        Hypothesis::from_table("h", 1, Setting::NonPartite, vec![2], 2, vec![bits & 1, bits >> 1 & 1])
    }

    #[test]
    fn total_loss_examples() {
        let mu = LocalMeasure::nonpartite(&ProbTemplate::uniform(&[2]), 1);
        let l = zero_one_loss(2, 1, Setting::NonPartite, vec![2]);
        assert_eq!(total_loss(&mu, &h_from(1), &l, &h_from(1)), Q::zero());
        assert_eq!(total_loss(&mu, &h_from(1), &l, &h_from(3)), q(1, 2));
        let dirac = LocalMeasure::nonpartite(&ProbTemplate::new(vec![vec![Q::zero(), Q::one()]]).unwrap(), 1);
        assert_eq!(total_loss(&dirac, &h_from(0), &l, &h_from(2)), Q::one());
    }

    #[test]
    fn partite_empirical_examples() {
        let ell = agnostic_zero_one(2, 1, Setting::Partite, vec![2]);
        let h = Hypothesis::from_table("h", 1, Setting::Partite, vec![2], 2, vec![0, 1]);
        let layout = PartLayout::uniform(2, 1);
        let x = PartiteConfig { layout, coords: vec![0, 1] };
        assert_eq!(empirical_loss_partite(&x, &[0, 1], &ell, &h).unwrap(), Q::zero());
        assert_eq!(empirical_loss_partite(&x, &[0, 0], &ell, &h).unwrap(), q(1, 2));
        let x1 = PartiteConfig { layout: PartLayout::uniform(1, 1), coords: vec![1] };
        assert_eq!(empirical_loss_partite(&x1, &[0], &ell, &h).unwrap(), Q::one());
        let atoms = Atoms::partite(&x, &[0, 0], 1, &[2], 2);
        assert_eq!(atoms.loss(&ell, &h), q(1, 2));
    }

    fn np_h() -> Hypothesis {
        Hypothesis::new("h", 2, Setting::NonPartite, sizes2(), 2, 2, |x| (x[0] + x[2]) % 2)
    }

    #[test]
    fn nonpartite_empirical_realizable_and_order_invariance() {
        let h = np_h();
        let ell = agnostic_zero_one(2, 2, Setting::NonPartite, sizes2());
        let x = Config { m: 3, cap: 2, coords: vec![0, 1, 1, 0, 1, 1] };
        let y = h.star(&x);
        let oc = OrderChoice::canonical(3, 2);
        assert_eq!(empirical_loss_nonpartite(&x, &y, &ell, &h, &oc).unwrap(), Q::zero());
        // perturb labels; symmetric ℓ ⇒ independent of the order choice
        let mut y2 = y.clone();
        y2[1] ^= 1;
        y2[4] ^= 1;
        let values: Vec<Q> = OrderChoice::all(3, 2)
            .iter()
            .map(|oc| empirical_loss_nonpartite(&x, &y2, &ell, &h, oc).unwrap())
            .collect();
        assert_eq!(values.len(), 8);
        assert!(values.iter().all(|v| *v == values[0]));
        let atoms = Atoms::nonpartite(&x, &y2, 2, &oc, &sizes2(), 2);
        assert_eq!(atoms.loss(&ell, &h), values[0]);
        // m = k: one term
        let x2 = Config { m: 2, cap: 2, coords: vec![1, 0, 1] };
        let v = empirical_loss_nonpartite(&x2, &[1, 1], &ell, &h, &OrderChoice::canonical(2, 2)).unwrap();
        assert_eq!(v, ell.eval(&h, &[1, 0, 1], &[1, 1]));
    }

    #[test]
    fn wrap_keeps_decomposition() {
        let l = zero_one_loss(2, 2, Setting::NonPartite, sizes2());
        let ag = wrap_agnostic(&l);
        let class = HypothesisClass::explicit("c", vec![np_h(), Hypothesis::constant(2, Setting::NonPartite, sizes2(), 2, 0)]).unwrap();
        ag.check_decomposition(&class).unwrap();
        assert_eq!(ag.sup_over(&class), Q::one());
    }

    fn class_k(k: usize, setting: Setting, sizes: Vec<usize>) -> HypothesisClass {
        let a = Hypothesis::constant(k, setting, sizes.clone(), 2, 0);
        let s2 = sizes.clone();
        let b = Hypothesis::new("b", k, setting, s2, 2, 1, |x| x[0] % 2);
        HypothesisClass::explicit("c", vec![a, b]).unwrap()
    }

    #[test]
    fn flexibility_01_constants() {
        // k = 1: 1 − 1/L
        let w = flexibility_witness_01(2, 1, Setting::NonPartite, vec![2]);
        let l = zero_one_loss(2, 1, Setting::NonPartite, vec![2]);
        assert!(w.check_indep_y(&l).unwrap().iter().all(|v| *v == q(1, 2)));
        // k = 2: uniform pattern over Λ^{S_2}, so the miss probability is 1 − L^{−2}
        let w = flexibility_witness_01(2, 2, Setting::NonPartite, sizes2());
        let l = zero_one_loss(2, 2, Setting::NonPartite, sizes2());
        let oracle = {
            let pats = all_patterns(2, 2);
            let miss = pats.iter().filter(|p| **p != pats[0]).count() as i64;
            q(miss, pats.len() as i64)
        };
        assert!(w.check_indep_y(&l).unwrap().iter().all(|v| *v == oracle));
        assert_eq!(oracle, q(3, 4));
        // partite: 1 − 1/L
        let ps = vec![2, 2, 1];
        let w = flexibility_witness_01(3, 2, Setting::Partite, ps.clone());
        let l = zero_one_loss(3, 2, Setting::Partite, ps.clone());
        assert!(w.check_indep_y(&l).unwrap().iter().all(|v| *v == q(2, 3)));
        let ag = wrap_agnostic(&l);
        w.check_indep_h(&ag, &class_k(2, Setting::Partite, ps)).unwrap();
    }

    #[test]
    fn flexibility_g_matches_noise_exactly() {
        // k = 2, m = 2: the law of 𝒩(x, ·) is uniform over Λ^{(m)_k}
        let w = flexibility_witness_01(2, 2, Setting::NonPartite, sizes2());
        let x = Config { m: 2, cap: 2, coords: vec![0, 1, 1] };
        let law = w.noise_law_nonpartite(&x);
        assert_eq!(law.len(), 4);
        assert!(law.values().all(|p| *p == q(1, 4)));
        assert_eq!(law, w.g_law_nonpartite(&x));
        assert_eq!(w.r_n(3), BigUint::from(64u32));
        // k = 1 finite witness, m = 3
        let w = flexibility_witness_01(3, 1, Setting::NonPartite, vec![2]);
        let x = Config { m: 3, cap: 1, coords: vec![0, 1, 1] };
        assert_eq!(w.noise_law_nonpartite(&x), w.g_law_nonpartite(&x));
        assert_eq!(w.r_n(3), BigUint::from(27u32));
        // partite R_𝒩(m) = L^{m^k}
        let w = flexibility_witness_01(2, 2, Setting::Partite, vec![2, 2, 1]);
        assert_eq!(w.r_n(2), BigUint::from(16u32));
    }

    #[test]
    fn neutral_extension_exhaustive() {
        let l = zero_one_loss(2, 2, Setting::NonPartite, sizes2());
        let ag = wrap_agnostic(&l);
        let w = flexibility_witness_01(2, 2, Setting::NonPartite, sizes2());
        let class = class_k(2, Setting::NonPartite, sizes2());
        let (ext, info) = extend_with_neutral(&ag, &w, &class).unwrap();
        assert_eq!(info.bottom, 2);
        verify_neutral(&ext, &info, &class).unwrap();
        for h in class.members() {
            for x in all_points(&sizes2()) {
                for y in all_patterns(2, 2) {
                    assert_eq!(ext.eval(&h, &x, &y), ag.eval(&h, &x, &y));
                }
                assert_eq!((info.bottom_cost)(&x), q(3, 4));
            }
        }
        assert_eq!(ext.sup_norm, ag.sup_norm);
        assert!(ext.symmetric);
    }

    #[test]
    fn bayes_deterministic_target() {
        let mu = ProbTemplate::new(vec![vec![q(1, 3), q(2, 3)], vec![q(1, 2), q(1, 2)]]).unwrap();
        let f = np_h();
        let sc = Scenario::new(2, Measure::NonPartite(mu), None, f.clone()).unwrap();
        let l = zero_one_loss(2, 2, Setting::NonPartite, sizes2());
        let b = bayes_predictor(&sc, &l);
        assert!(b.same_function(&f));
        assert_eq!(agnostic_total_loss(&sc, &wrap_agnostic(&l), &b), Q::zero());
    }

    #[test]
    fn cover_hart_zero() {
        assert_eq!(cover_hart_bound(0.0, 2), 0.0);
        assert!((cover_hart_bound(0.1, 2) - 0.18).abs() < 1e-12);
    }
}
