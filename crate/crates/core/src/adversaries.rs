//! Lower-bound constructions: the no-free-lunch scenario, the measure that turns a large
//! VCN_k slice into a hard learning problem, the Ramsey-type subset search and the
//! partition-family adversary maps.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dims::{natarajan_witness, FunctionFamily};
use crate::families::{decision_erm, PartitionData};
use crate::hypotheses::{all_tuples, point_count, point_from_index, Hypothesis, HypothesisClass};
use crate::index::{enumerate_injections, enumerate_subsets, injection_rank, local_slots, PartLayout};
use crate::learners::{estimate_pac_success, Learner};
use crate::losses::{agnostic_zero_one, AgnosticLossFn, LossFn};
use crate::sampler::{Measure, Sample, Scenario};
use crate::templates::{Config, PartiteConfig, PartiteProbTemplate, ProbTemplate};
use crate::{q, qi, Setting, Q};

/// `(1/(B − ε))·((s/2)(1 − m/d) − ε)`; may be negative (vacuous).
pub fn nfl_lower_bound(eps: f64, m: usize, d: usize, s: f64, b: f64) -> Result<f64, String> {
    if !(eps > 0.0 && eps < b) {
        return Err(format!("need 0 < ε < B (ε = {eps}, B = {b})"));
    }
    if d == 0 {
        return Err("need d ≥ 1".into());
    }
    Ok((s / 2.0 * (1.0 - m as f64 / d as f64) - eps) / (b - eps))
}

type Realizer = Arc<dyn Fn(&[bool]) -> Hypothesis + Send + Sync>;

/// A unary family shattering `points` with witnesses `(f0, f1)`, the uniform measure on the
/// shattered set and the members `F_B(a) = f_{1[a ∈ B]}(a)`.
#[derive(Clone)]
pub struct ShatteredScenario {
    pub domain: usize,
    pub labels: usize,
    pub points: Vec<u32>,
    pub f0: Vec<u32>,
    pub f1: Vec<u32>,
    realize: Realizer,
}

/// All `2^d` binary functions on `[d]` as a unary class; member `i` is `x ↦ bit x of i`.
pub fn full_binary_class(d: usize) -> HypothesisClass {
    assert!(d <= 30);
    let erm = decision_erm(1, Setting::NonPartite, d, |x: &[u32]| Some(x[0] as usize), |_, on| on as u32);
    HypothesisClass::structured(
        format!("binary({d})"),
        1,
        Setting::NonPartite,
        vec![d],
        2,
        1 << d,
        move |i| Hypothesis::new(format!("B{i:b}"), 1, Setting::NonPartite, vec![d], 2, 1, move |x| (i >> x[0] & 1) as u32),
        Some(erm),
        None,
    )
}

impl ShatteredScenario {
    /// The full binary class on `[d]`, shattered by all of `[d]` with `f0 = 0`, `f1 = 1`.
    pub fn full_binary(d: usize) -> Self {
        let class = full_binary_class(d);
        ShatteredScenario {
            domain: d,
            labels: 2,
            points: (0..d as u32).collect(),
            f0: vec![0; d],
            f1: vec![1; d],
            realize: Arc::new(move |b| class.get(b.iter().enumerate().fold(0, |acc, (i, &on)| acc | (on as usize) << i))),
        }
    }

    /// A shattered set of size `d` for an enumerable unary class.
    pub fn from_class(class: &HypothesisClass, d: usize) -> Result<Self, String> {
        if class.k != 1 || class.setting != Setting::NonPartite {
            return Err("no-free-lunch scenarios use unary non-partite classes".into());
        }
        let domain = class.sizes[0];
        let tables: Vec<Vec<u32>> = class.members().iter().map(|h| h.table()).collect();
        let fam = FunctionFamily::new(domain, class.labels, tables.clone())?;
        let (set, f0, f1) = natarajan_witness(&fam, d).ok_or(format!("{} shatters no set of size {d}", class.name))?;
        let points: Vec<u32> = set.iter().map(|&p| p as u32).collect();
        let mut by_pattern: BTreeMap<Vec<u32>, usize> = BTreeMap::new();
        for (i, t) in tables.iter().enumerate() {
            by_pattern.entry(set.iter().map(|&p| t[p]).collect()).or_insert(i);
        }
        let (c, p0, p1) = (class.clone(), f0.clone(), f1.clone());
        Ok(ShatteredScenario {
            domain,
            labels: class.labels,
            points,
            f0,
            f1,
            realize: Arc::new(move |b| {
                let pat: Vec<u32> = b.iter().enumerate().map(|(i, &on)| if on { p1[i] } else { p0[i] }).collect();
                c.get(by_pattern[&pat])
            }),
        })
    }

    pub fn d(&self) -> usize {
        self.points.len()
    }

    /// `F_B` for `B` given as membership flags over `points`.
    pub fn member(&self, b: &[bool]) -> Hypothesis {
        (self.realize)(b)
    }

    pub fn measure(&self) -> Measure {
        let w = q(1, self.d() as i64);
        let mut weights = vec![qi(0); self.domain];
        for &p in &self.points {
            weights[p as usize] = w.clone();
        }
        Measure::NonPartite(ProbTemplate::new(vec![weights]).expect("uniform on the shattered set"))
    }

    pub fn scenario(&self, b: &[bool]) -> Scenario {
        Scenario::new(1, self.measure(), None, self.member(b)).expect("unary scenario")
    }

    /// `B` candidates: all subsets for `d ≤ 12`, otherwise `∅`, everything and 64 seeded
    /// random subsets.
    pub fn candidates(&self, seed: u64) -> Vec<Vec<bool>> {
        let d = self.d();
        if d <= 12 {
            return (0..1usize << d).map(|s| (0..d).map(|i| s >> i & 1 == 1).collect()).collect();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = vec![vec![false; d], vec![true; d]];
        out.extend((0..64).map(|_| (0..d).map(|_| rng.gen_bool(0.5)).collect()));
        out
    }
}

/// Worst adversary among candidates: which one, and its failure probability re-estimated on
/// fresh seeds (so selection does not bias the reported frequency).
#[derive(Clone, Debug, PartialEq)]
pub struct WorstCase {
    pub index: usize,
    pub selection_failure: f64,
    pub failure: f64,
    pub std_err: f64,
    pub trials: u64,
}

/// `P[L(A(sample)) > ε]` for each candidate scenario (realizable: threshold 0); picks the
/// largest with `max(trials/10, 100)` trials each, then re-estimates it with `trials` trials.
pub fn worst_case_failure(learner: &Learner, scenarios: &[Scenario], ell: &AgnosticLossFn, m: usize, eps: f64, trials: u64, seed: u64) -> WorstCase {
    let sel_trials = (trials / 10).max(100).min(trials);
    let mut best = (0usize, -1.0f64);
    for (i, sc) in scenarios.iter().enumerate() {
        let f = 1.0 - estimate_pac_success(learner, sc, ell, m, eps, 0.0, sel_trials, seed).frequency;
        if f > best.1 {
            best = (i, f);
        }
    }
    let r = estimate_pac_success(learner, &scenarios[best.0], ell, m, eps, 0.0, trials, seed ^ 0x9e37_79b9_7f4a_7c15);
    WorstCase { index: best.0, selection_failure: best.1, failure: 1.0 - r.frequency, std_err: r.std_err, trials }
}

/// The adversarial `B` for `A` on a shattered scenario, with its failure frequency under the
/// 0/1 loss.
pub fn nfl_worst_f(learner: &Learner, sc: &ShatteredScenario, m: usize, eps: f64, trials: u64, seed: u64) -> (Vec<bool>, WorstCase) {
    let cands = sc.candidates(seed);
    let scenarios: Vec<Scenario> = cands.iter().map(|b| sc.scenario(b)).collect();
    let ell = agnostic_zero_one(sc.labels, 1, Setting::NonPartite, vec![sc.domain]);
    let w = worst_case_failure(learner, &scenarios, &ell, m, eps, trials, seed);
    (cands[w.index].clone(), w)
}

/// The hard instance built from a slice of Natarajan dimension `≥ d` of a rank-≤1 partite
/// class: part `a` is free, the other slots are fixed to `z⁰` (slots containing `a` of size ≥ 2
/// to `0`), and the measure is Dirac on the fixed slots and uniform on a shattered set of
/// `X_{a}`.
#[derive(Clone, Debug)]
pub struct VcnScenario {
    pub part: usize,
    /// Local point with the fixed slots set; the `{a}` slot is overwritten per point.
    pub base: Vec<u32>,
    pub a_slot: usize,
    pub points: Vec<u32>,
    pub f0: Vec<u32>,
    pub f1: Vec<u32>,
    pub mu: PartiteProbTemplate,
    /// Class index realizing `F_B` on the shattered set, by bitmask of `B`.
    pub members: Vec<usize>,
}

/// Searches the slices of an enumerable rank-≤1 partite class for one whose unary family
/// (through the `{a}` coordinate) Natarajan-shatters `d` points.
pub fn vcn_nonlearn_scenario(class: &HypothesisClass, d: usize) -> Result<VcnScenario, String> {
    if class.setting != Setting::Partite {
        return Err("the construction works on partite classes (partize first)".into());
    }
    if class.len() > 1 << 16 {
        return Err(format!("class {} is too large to enumerate", class.name));
    }
    if !(1..=16).contains(&d) {
        return Err("need 1 ≤ d ≤ 16".into());
    }
    let k = class.k;
    let slots = local_slots(k);
    let members = class.members();
    for part in 1..=k {
        let a_slot = slots.iter().position(|s| s.members() == [part as u32]).unwrap();
        let fixed: Vec<usize> = (0..slots.len()).filter(|&j| !slots[j].contains(part as u32)).collect();
        let fixed_sizes: Vec<usize> = fixed.iter().map(|&j| class.sizes[j]).collect();
        let domain = class.sizes[a_slot];
        for zi in 0..point_count(&fixed_sizes) {
            let mut base = vec![0u32; slots.len()];
            for (&j, v) in fixed.iter().zip(point_from_index(&fixed_sizes, zi)) {
                base[j] = v;
            }
            let tables: Vec<Vec<u32>> = members
                .iter()
                .map(|h| {
                    (0..domain as u32)
                        .map(|w| {
                            let mut x = base.clone();
                            x[a_slot] = w;
                            h.eval(&x)
                        })
                        .collect()
                })
                .collect();
            let fam = FunctionFamily::new(domain, class.labels, tables.clone())?;
            let Some((set, f0, f1)) = natarajan_witness(&fam, d) else { continue };
            let realized: Vec<usize> = (0..1usize << d)
                .map(|mask| {
                    let want: Vec<u32> = (0..d).map(|i| if mask >> i & 1 == 1 { f1[i] } else { f0[i] }).collect();
                    tables.iter().position(|t| set.iter().zip(&want).all(|(&p, &w)| t[p] == w)).expect("shattered")
                })
                .collect();
            let points: Vec<u32> = set.iter().map(|&p| p as u32).collect();
            let weights = (0..slots.len())
                .map(|j| {
                    let mut w = vec![qi(0); class.sizes[j]];
                    if j == a_slot {
                        for &p in &points {
                            w[p as usize] = q(1, d as i64);
                        }
                    } else {
                        w[base[j] as usize] = qi(1);
                    }
                    w
                })
                .collect();
            let mu = PartiteProbTemplate::new(k, weights)?;
            return Ok(VcnScenario { part, base, a_slot, points, f0, f1, mu, members: realized });
        }
    }
    Err(format!("no slice of {} has Natarajan dimension ≥ {d}", class.name))
}

impl VcnScenario {
    pub fn d(&self) -> usize {
        self.points.len()
    }

    pub fn scenario(&self, class: &HypothesisClass, mask: usize) -> Scenario {
        Scenario::new(class.k, Measure::Partite(self.mu.clone()), None, class.get(self.members[mask])).expect("partite scenario")
    }

    /// `H(z⁰, ·)'`: the unary function `w ↦ H(base with x_{a} = w)`.
    pub fn unary(&self, h: &Hypothesis) -> Hypothesis {
        let (base, slot, inner) = (self.base.clone(), self.a_slot, h.clone());
        Hypothesis::new(format!("{}'", h.name), 1, Setting::NonPartite, vec![h.sizes[slot]], h.labels, 1, move |w| {
            let mut x = base.clone();
            x[slot] = w[0];
            inner.eval(&x)
        })
    }

    /// `ℓ'(w, u, u') = ℓ(ŵ, u, u')` on the `{a}` coordinate.
    pub fn unary_loss(&self, ell: &LossFn) -> LossFn {
        let (base, slot, f) = (self.base.clone(), self.a_slot, ell.f.clone());
        LossFn::new(format!("{}'", ell.name), 1, Setting::NonPartite, vec![ell.sizes[slot]], ell.labels, move |w, y, yp| {
            let mut x = base.clone();
            x[slot] = w[0];
            f(&x, y, yp)
        })
    }

    /// The unary problem: uniform on the shattered set with `F̂ = F(z⁰, ·)'`.
    pub fn unary_scenario(&self, class: &HypothesisClass, mask: usize) -> Scenario {
        let domain = class.sizes[self.a_slot];
        let mut w = vec![qi(0); domain];
        for &p in &self.points {
            w[p as usize] = q(1, self.d() as i64);
        }
        let mu = ProbTemplate::new(vec![w]).expect("uniform");
        Scenario::new(1, Measure::NonPartite(mu), None, self.unary(&class.get(self.members[mask]))).expect("unary scenario")
    }

    /// `(ŵ, û)`: the partite sample over `m` vertices per part induced by a unary sample.
    pub fn lift_sample(&self, k: usize, w: &[u32], u: &[u32]) -> Sample {
        let m = w.len();
        let slots = local_slots(k);
        let layout = PartLayout::uniform(m, k);
        let coords = layout
            .enumerate()
            .iter()
            .map(|f| {
                let j = slots.iter().position(|s| s.members() == f.domain()).unwrap();
                if j == self.a_slot {
                    w[(f.values()[0] - 1) as usize]
                } else {
                    self.base[j]
                }
            })
            .collect();
        let y = all_tuples(&vec![m; k]).iter().map(|alpha| u[(alpha[self.part - 1] - 1) as usize]).collect();
        Sample::Partite { x: PartiteConfig { layout, coords }, y }
    }

    /// `A'(w, u) = A(ŵ, û)(z⁰, ·)'`.
    pub fn unary_learner(&self, a: &Learner) -> Learner {
        let (me, a1, a2) = (self.clone(), a.clone(), a.clone());
        let k = a.k;
        Learner::randomized(format!("{}'", a.name), Setting::NonPartite, 1, move |m| a1.randomness(m), move |s, b| {
            let Sample::NonPartite { x, y } = s else { unreachable!("setting checked by Learner::run") };
            let lifted = me.lift_sample(k, &x.coords[..x.m], y);
            me.unary(&a2.run(&lifted, b).expect("same randomness"))
        })
    }
}

/// `ρ(n) = n` for `n ≤ 2`, `(n)₃/2 + 3` otherwise.
pub fn ramsey_rho(n: usize) -> usize {
    if n <= 2 {
        n
    } else {
        n * (n - 1) * (n - 2) / 2 + 3
    }
}

fn pair_ok(f1: &[u32], f2: &dyn Fn(usize, usize) -> u32, u: usize, v: usize, image: &BTreeSet<u32>) -> bool {
    let c = f2(u.min(v), u.max(v));
    !image.contains(&c) || c == f1[u] || c == f1[v]
}

/// Independent check of the pair condition: every pair `{u, v} ⊆ U` has `f2({u,v}) ∉ f1(U)`
/// or `f2({u,v}) ∈ {f1(u), f1(v)}`. `f2` is called with `u < v`.
pub fn verify_clean_subset(f1: &[u32], f2: &dyn Fn(usize, usize) -> u32, subset: &[usize]) -> bool {
    let image: BTreeSet<u32> = subset.iter().map(|&u| f1[u]).collect();
    subset.iter().enumerate().all(|(i, &u)| subset[i + 1..].iter().all(|&v| pair_ok(f1, f2, u, v, &image)))
}

/// Exhaustive search over `n`-subsets of `[f1.len()]` (0-based), pruning as soon as a pair
/// is violated (the condition only gets harder as `f1(U)` grows).
pub fn find_clean_subset(f1: &[u32], f2: &dyn Fn(usize, usize) -> u32, n: usize) -> Option<Vec<usize>> {
    fn go(f1: &[u32], f2: &dyn Fn(usize, usize) -> u32, n: usize, start: usize, cur: &mut Vec<usize>) -> bool {
        if cur.len() == n {
            return true;
        }
        for c in start..f1.len() {
            if f1.len() - c < n - cur.len() {
                return false;
            }
            cur.push(c);
            if verify_clean_subset(f1, f2, cur) && go(f1, f2, n, c + 1, cur) {
                return true;
            }
            cur.pop();
        }
        false
    }
    let distinct: BTreeSet<u32> = f1.iter().copied().collect();
    assert_eq!(distinct.len(), f1.len(), "f1 must be injective");
    let mut cur = Vec::new();
    go(f1, f2, n, 0, &mut cur).then_some(cur)
}

/// The ingredients of the partition-family adversary around a vertex `z*` and a clean set
/// `V'` (vertex ids), built from the partition `χ₂`.
#[derive(Clone, Debug)]
pub struct PartitionAdversary {
    pub data: PartitionData,
    pub z_star: u32,
    pub v_prime: Vec<u32>,
}

impl PartitionAdversary {
    /// Takes the first `ρ(d)` vertices with distinct `χ₁` (so `𝓗(z*)` shatters them) and
    /// extracts a clean `d`-subset.
    pub fn new(data: PartitionData, z_star: u32, d: usize) -> Result<Self, String> {
        if z_star as usize >= data.n {
            return Err("z* is not a vertex".into());
        }
        let rho = ramsey_rho(d);
        let mut seen = BTreeSet::new();
        let v: Vec<u32> = (0..data.n as u32)
            .filter(|&x| x != z_star && seen.insert(data.class(z_star, x).unwrap()))
            .take(rho)
            .collect();
        if v.len() < rho {
            return Err(format!("𝓗(z*) shatters only {} vertices, need ρ({d}) = {rho}", v.len()));
        }
        let f1: Vec<u32> = v.iter().map(|&x| data.class(z_star, x).unwrap()).collect();
        let f2 = |i: usize, j: usize| data.class(v[i], v[j]).unwrap();
        let u = find_clean_subset(&f1, &f2, d).expect("a clean subset exists within ρ(d)");
        Ok(PartitionAdversary { z_star, v_prime: u.iter().map(|&i| v[i]).collect(), data })
    }

    /// Uses a given `V'` after checking shattering and cleanliness.
    pub fn with_set(data: PartitionData, z_star: u32, v_prime: Vec<u32>) -> Result<Self, String> {
        let adv = PartitionAdversary { data, z_star, v_prime };
        let f1: Vec<u32> = adv.v_prime.iter().map(|&x| adv.chi1(x).ok_or("z* lies in V'")).collect::<Result<_, _>>()?;
        if f1.iter().collect::<BTreeSet<_>>().len() != f1.len() {
            return Err("𝓗(z*) does not shatter V' (two vertices share a class with z*)".into());
        }
        let f2 = |i: usize, j: usize| adv.chi2(adv.v_prime[i], adv.v_prime[j]).unwrap_or(u32::MAX);
        if !verify_clean_subset(&f1, &f2, &(0..f1.len()).collect::<Vec<_>>()) {
            return Err("V' violates the pair condition".into());
        }
        Ok(adv)
    }

    /// `χ₂`, with `None` for `⊥`.
    pub fn chi2(&self, x1: u32, x2: u32) -> Option<u32> {
        self.data.class(x1, x2)
    }

    /// `χ₁(x) = χ₂(z*, x)`.
    pub fn chi1(&self, x: u32) -> Option<u32> {
        self.data.class(self.z_star, x)
    }

    /// `g(x1, x2) = t` when `χ₂(x1, x2) = χ₁(x_t)`.
    pub fn g(&self, x1: u32, x2: u32) -> Option<usize> {
        let c = self.chi2(x1, x2)?;
        [x1, x2].iter().position(|&x| self.chi1(x) == Some(c)).map(|t| t + 1)
    }

    /// `B_F = {χ₁(x) : x ∈ V', F(x) = 1}`; `f` is given on `V'` in order, as a class bitmask.
    pub fn b_f(&self, f: &[u32]) -> usize {
        self.v_prime.iter().zip(f).filter(|(_, &v)| v == 1).fold(0, |m, (&x, _)| m | 1 << self.chi1(x).unwrap())
    }

    /// `x^b_t = x_t` if `b_t = 1`, else `z*`.
    pub fn x_b(&self, x: &[u32], b: &[bool]) -> Vec<u32> {
        x.iter().zip(b).map(|(&v, &on)| if on { v } else { self.z_star }).collect()
    }

    /// `y^{b,x}` on pairs `{α₁ < α₂}` in lex order.
    pub fn y_bx(&self, x: &[u32], y: &[u32], b: &[bool]) -> Vec<u32> {
        let m = x.len();
        let mut out = Vec::with_capacity(m * m.saturating_sub(1) / 2);
        for i in 0..m {
            for j in i + 1..m {
                out.push(match (b[i], b[j]) {
                    (false, false) => 0,
                    (false, true) => y[j],
                    (true, false) => y[i],
                    (true, true) => match self.g(x[i], x[j]) {
                        Some(1) => y[i],
                        Some(_) => y[j],
                        None => 0,
                    },
                });
            }
        }
        out
    }

    /// Graph labels on pairs in lex order of a graph hypothesis at a vertex sequence.
    pub fn pair_labels(h: &Hypothesis, x: &[u32]) -> Vec<u32> {
        let m = x.len();
        let coords: Vec<u32> = enumerate_subsets(m, 2).iter().map(|s| if s.len() == 1 { x[(s.members()[0] - 1) as usize] } else { 0 }).collect();
        let star = h.star(&Config { m, cap: 2, coords });
        let mut out = Vec::new();
        for i in 1..=m as u32 {
            for j in i + 1..=m as u32 {
                out.push(star[injection_rank(m, &[i, j])]);
            }
        }
        out
    }

    /// Non-partite label tensor (over injections) from pair labels.
    pub fn pair_labels_to_tensor(pairs: &[u32], m: usize) -> Vec<u32> {
        let idx = |i: u32, j: u32| -> usize {
            let (a, b) = (i.min(j) as usize - 1, i.max(j) as usize - 1);
            a * (2 * m - a - 1) / 2 + (b - a - 1)
        };
        enumerate_injections(m, 2).iter().map(|al| pairs[idx(al.images()[0], al.images()[1])]).collect()
    }

    /// `ℓ'(x, y, y') = (ℓ((z*, x), y, y') + ℓ((x, z*), y, y'))/4`, as a unary loss on the
    /// vertices.
    pub fn unary_loss(&self, ell: &LossFn) -> LossFn {
        let (f, z) = (ell.f.clone(), self.z_star);
        let n = self.data.n;
        LossFn::new(format!("{}'", ell.name), 1, Setting::NonPartite, vec![n], 2, move |x, y, yp| {
            let (c, cp) = (vec![y[0]; 2], vec![yp[0]; 2]);
            (f(&[z, x[0], 0], &c, &cp) + f(&[x[0], z, 0], &c, &cp)) / qi(4)
        })
    }

    /// `μ̂`: mass `1/2` on `z*` and `μ'(x)/2` on each `x ∈ V'` (`mu_prime` in `V'` order).
    pub fn mu_hat(&self, mu_prime: &[Q]) -> Vec<Q> {
        let mut w = vec![qi(0); self.data.n];
        w[self.z_star as usize] = q(1, 2);
        for (&x, p) in self.v_prime.iter().zip(mu_prime) {
            w[x as usize] += p / qi(2);
        }
        w
    }

    /// `A'(x, y, b) = A(x^b, y^{b,x})↓`, randomness `2^m`, with output `w ↦ H(z*, w)` on `V'`
    /// (and `0` elsewhere).
    pub fn unary_learner(&self, a: &Learner) -> Learner {
        let (me, a2) = (self.clone(), a.clone());
        let n = self.data.n;
        Learner::randomized(
            format!("{}'", a.name),
            Setting::NonPartite,
            1,
            |m| num_bigint::BigUint::from(1u8) << m,
            move |s, bits| {
                let Sample::NonPartite { x, y } = s else { unreachable!("setting checked by Learner::run") };
                let m = x.m;
                let b: Vec<bool> = (0..m).map(|t| bits.bit(t as u64)).collect();
                let xs = &x.coords[..m];
                let xb = me.x_b(xs, &b);
                let coords: Vec<u32> = enumerate_subsets(m, 2).iter().map(|s| if s.len() == 1 { xb[(s.members()[0] - 1) as usize] } else { 0 }).collect();
                let yt = Self::pair_labels_to_tensor(&me.y_bx(xs, y, &b), m);
                let h = a2.run0(&Sample::NonPartite { x: Config { m, cap: 2, coords }, y: yt });
                let (z, vp) = (me.z_star, me.v_prime.clone());
                Hypothesis::new(format!("{}↓", h.name), 1, Setting::NonPartite, vec![n], 2, 1, move |w| {
                    if vp.contains(&w[0]) {
                        h.eval(&[z, w[0], 0])
                    } else {
                        0
                    }
                })
            },
        )
    }

    /// Exhaustive check of `F*_m(x)^{b,x} = (G_{B_F})*_m(x^b)` over every `F: V' → {0,1}`,
    /// `x ∈ (V')^m` and `b ∈ {0,1}^m`; `graph(mask)` is `G_B` for a class bitmask.
    pub fn check_identity(&self, m: usize, graph: &dyn Fn(usize) -> Hypothesis) -> Result<usize, String> {
        let d = self.v_prime.len();
        let mut checked = 0;
        for fmask in 0..1usize << d {
            let f: Vec<u32> = (0..d).map(|i| (fmask >> i & 1) as u32).collect();
            let g = graph(self.b_f(&f));
            for xi in all_tuples(&vec![d; m]) {
                let x: Vec<u32> = xi.iter().map(|&i| self.v_prime[(i - 1) as usize]).collect();
                let y: Vec<u32> = xi.iter().map(|&i| f[(i - 1) as usize]).collect();
                for bm in 0..1usize << m {
                    let b: Vec<bool> = (0..m).map(|t| bm >> t & 1 == 1).collect();
                    let lhs = self.y_bx(&x, &y, &b);
                    let rhs = Self::pair_labels(&g, &self.x_b(&x, &b));
                    if lhs != rhs {
                        return Err(format!("identity fails at F = {f:?}, x = {x:?}, b = {b:?}"));
                    }
                    checked += 1;
                }
            }
        }
        Ok(checked)
    }
}

/// Seeded random instance for the Ramsey search: an injective `f1` into `[2ρ]` and a
/// symmetric `f2` that mostly hits `f1`'s image.
pub fn random_ramsey_instance(n: usize, seed: u64) -> (Vec<u32>, Vec<Vec<u32>>) {
    let rho = ramsey_rho(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool: Vec<u32> = (0..2 * rho as u32).collect();
    pool.shuffle(&mut rng);
    let f1: Vec<u32> = pool[..rho].to_vec();
    let mut f2 = vec![vec![0u32; rho]; rho];
    for i in 0..rho {
        for j in i + 1..rho {
            let v = if rng.gen_bool(0.8) { f1[rng.gen_range(0..rho)] } else { rng.gen_range(0..2 * rho as u32) };
            f2[i][j] = v;
            f2[j][i] = v;
        }
    }
    (f1, f2)
}
