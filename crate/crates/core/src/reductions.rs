//! Partite and non-partite conversions: the partization maps, learner wrappers in both
//! directions, finite disintegration, randomized departization with its exact discrete
//! equivalent, neutral symbols, dummy-variable stripping and codomain extension.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::hypotheses::{all_tuples, decode_pattern, encode_pattern, partize_hypothesis, permute_local, unpartize_hypothesis, Hypothesis, HypothesisClass};
use crate::index::{binom, enumerate_injections, enumerate_subsets, factorial, injection_rank, local_slots, pullback, subset_rank, Injection, PartLayout, Subset};
use crate::learners::{Learner, SizeFn};
use crate::losses::{AgnosticLossFn, FlexibilityWitness, LocalLoss, LossFn, all_patterns};
use crate::sampler::Sample;
use crate::templates::{Config, LocalMeasure, PartiteConfig, PartiteProbTemplate, PartiteTemplate, ProbTemplate, Template};
use crate::{Setting, Q};

/// `ι_kpart`: a partite point over `([1],…,[1])` as a non-partite point over `[k]`.
pub fn iota_kpart(x: &PartiteConfig) -> Result<Config, String> {
    let k = x.layout.k();
    if x.layout.sizes.iter().any(|&s| s != 1) || x.coords.len() != local_slots(k).len() {
        return Err("ι_kpart needs a partite point with one vertex per part".into());
    }
    Ok(Config { m: k, cap: k, coords: x.coords.clone() })
}

/// `φ_k`, the inverse of `ι_kpart`.
pub fn phi_k(x: &Config) -> Result<PartiteConfig, String> {
    let k = x.m;
    if x.cap < k || x.coords.len() != enumerate_subsets(k, x.cap).len() {
        return Err("φ_k needs a point over [k] with every subset present".into());
    }
    Ok(PartiteConfig { layout: PartLayout::uniform(1, k), coords: x.coords[..local_slots(k).len()].to_vec() })
}

/// `φ_m(x)_f = x_{{(i−1)⌊m/k⌋ + f(i) : i ∈ dom f}}`.
pub fn phi_m(x: &Config, k: usize) -> Result<PartiteConfig, String> {
    if x.m < k {
        return Err(format!("φ_m needs m ≥ k (m = {}, k = {k})", x.m));
    }
    if x.cap < k {
        return Err("point lacks coordinates of size k".into());
    }
    let n = x.m / k;
    let layout = PartLayout::uniform(n, k);
    let coords = layout
        .enumerate()
        .iter()
        .map(|f| {
            let set: Vec<u32> = f.domain().iter().zip(f.values()).map(|(&i, &v)| (i - 1) * n as u32 + v).collect();
            x.coords[subset_rank(x.m, &set)]
        })
        .collect();
    Ok(PartiteConfig { layout, coords })
}

/// `(Φ_m(y)_α)_τ = y_{β_α∘τ}` with `β_α(i) = (i−1)⌊m/k⌋ + α(i)`; patterns encoded in base `labels`.
pub fn big_phi_m(y: &[u32], m: usize, k: usize, labels: usize) -> Result<Vec<u32>, String> {
    if m < k {
        return Err(format!("Φ_m needs m ≥ k (m = {m}, k = {k})"));
    }
    if y.len() != crate::index::falling(m, k) as usize {
        return Err("label tensor is not indexed by the injections [k] -> [m]".into());
    }
    let n = m / k;
    let perms = crate::index::permutations(k);
    Ok(all_tuples(&vec![n; k])
        .iter()
        .map(|alpha| {
            let beta: Vec<u32> = alpha.iter().enumerate().map(|(i, &a)| i as u32 * n as u32 + a).collect();
            let pat: Vec<u32> = perms
                .iter()
                .map(|tau| {
                    let images: Vec<u32> = tau.images().iter().map(|&t| beta[(t - 1) as usize]).collect();
                    y[injection_rank(m, &images)]
                })
                .collect();
            encode_pattern(&pat, labels)
        })
        .collect())
}

/// Exact law of a non-partite configuration over `[m]` (coordinates of size at most `cap`).
pub fn config_law(mu: &ProbTemplate, m: usize, cap: usize) -> LocalMeasure {
    let mu = mu.padded(cap);
    let weights: Vec<Vec<Q>> = enumerate_subsets(m, cap).iter().map(|a| mu.weights[a.len() - 1].clone()).collect();
    LocalMeasure { sizes: weights.iter().map(Vec::len).collect(), weights }
}

/// Exact law of a partite configuration with `n` vertices per part.
pub fn partite_config_law(mu: &PartiteProbTemplate, n: usize) -> LocalMeasure {
    let layout = PartLayout::uniform(n, mu.k());
    let weights: Vec<Vec<Q>> = (0..layout.len()).map(|i| mu.weights[layout.domain_of(i)].clone()).collect();
    LocalMeasure { sizes: weights.iter().map(Vec::len).collect(), weights }
}

/// Pushforward of `μ^m` under `φ_m`.
pub fn phi_m_pushforward(mu: &ProbTemplate, m: usize, k: usize) -> Result<BTreeMap<Vec<u32>, Q>, String> {
    let mut law = BTreeMap::new();
    for (x, p) in config_law(mu, m, k).atoms() {
        let img = phi_m(&Config { m, cap: k, coords: x }, k)?;
        *law.entry(img.coords).or_insert_with(Q::zero) += p;
    }
    Ok(law)
}

/// `(μ^kpart)^n` as a law on coordinate vectors.
pub fn partite_product_law(mu: &PartiteProbTemplate, n: usize) -> BTreeMap<Vec<u32>, Q> {
    partite_config_law(mu, n).atoms().into_iter().collect()
}

/// `ℓ^kpart(H', x, y) = ℓ(H'^{kpart,−1}, ι(x), y)` with patterns encoded as partite labels.
pub fn partize_agnostic(ell: &AgnosticLossFn) -> AgnosticLossFn {
    assert_eq!(ell.setting, Setting::NonPartite);
    let plen = factorial(ell.k) as usize;
    let base = ell.labels;
    let f = ell.f.clone();
    let local = ell.local.clone().map(|l| {
        let ll: LocalLoss = Arc::new(move |x: &[u32], h: &[u32], y: &[u32]| {
            l(x, &decode_pattern(h[0], plen, base), &decode_pattern(y[0], plen, base))
        });
        ll
    });
    let reg = ell.regularizer.clone().map(|r| {
        let rr: crate::losses::Regularizer = Arc::new(move |h: &Hypothesis| r(&unpartize_hypothesis(h, base)));
        rr
    });
    AgnosticLossFn {
        name: format!("{}^kpart", ell.name),
        k: ell.k,
        setting: Setting::Partite,
        sizes: ell.sizes.clone(),
        labels: (base as u64).pow(plen as u32) as usize,
        f: Arc::new(move |h, x, y| f(&unpartize_hypothesis(h, base), x, &decode_pattern(y[0], plen, base))),
        local,
        regularizer: reg,
        sup_norm: ell.sup_norm.clone(),
        symmetric: true,
    }
}

/// Non-partite learner from a partite one:
/// `A(x, y, b) = A'(φ_m(x), Φ_m(y), b)^{kpart,−1}`, with `R_A(m) = R_{A'}(⌊m/k⌋)`.
pub fn nonpartite_from_partite_learner(a: &Learner, base_labels: usize) -> Learner {
    assert_eq!(a.setting, Setting::Partite);
    let k = a.k;
    let (a1, a2) = (a.clone(), a.clone());
    Learner::randomized(
        format!("{}^np", a.name),
        Setting::NonPartite,
        k,
        move |m| a1.randomness(m / k),
        move |s, b| {
            let Sample::NonPartite { x, y } = s else { unreachable!("setting checked by Learner::run") };
            let converted = if x.m >= k {
                Sample::Partite { x: phi_m(x, k).expect("m ≥ k"), y: big_phi_m(y, x.m, k, base_labels).expect("m ≥ k") }
            } else {
                Sample::Partite { x: PartiteConfig { layout: PartLayout::uniform(0, k), coords: vec![] }, y: vec![] }
            };
            let h = a2.run(&converted, b).expect("randomness passed through");
            unpartize_hypothesis(&h, base_labels)
        },
    )
}

/// Sample size of the non-partite wrapper: `k·⌈m^PAC_{A'}⌉`.
pub fn nonpartite_sample_size(m_partite: f64, k: usize) -> usize {
    k * m_partite.ceil() as usize
}

/// Markov kernel `η_i(x)` of a finite disintegration.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteKernel {
    pub rows: Vec<Vec<Q>>,
}

/// Disintegrates `ν_i` on `X_i × [J]` (given as `nu[x][j]`) into its marginal `μ̂_i` and the
/// kernel `η_i(x)({j}) = ν_i({(x,j)})/μ̂_i({x})`; zero-mass rows are Dirac at `j = 0`.
pub fn disintegrate_finite(nu: &[Vec<Q>]) -> (Vec<Q>, FiniteKernel) {
    let marginal: Vec<Q> = nu.iter().map(|row| row.iter().sum()).collect();
    let rows = nu
        .iter()
        .zip(&marginal)
        .map(|(row, m)| {
            if m.is_zero() {
                (0..row.len()).map(|j| if j == 0 { Q::one() } else { Q::zero() }).collect()
            } else {
                row.iter().map(|v| v / m).collect()
            }
        })
        .collect();
    (marginal, FiniteKernel { rows })
}

/// `ν_i(V × J) = Σ_{x ∈ V} μ̂_i(x)·η_i(x)(J)`, checked for every `V` and `J` (as singletons,
/// which suffices by additivity).
pub fn check_reconstruction(nu: &[Vec<Q>], marginal: &[Q], kernel: &FiniteKernel) -> bool {
    nu.iter().enumerate().all(|(x, row)| row.iter().enumerate().all(|(j, v)| &(&marginal[x] * &kernel.rows[x][j]) == v))
}

/// `B^i_1, …, B^i_{binom(k,i)}`: the `i`-subsets of `[k]` in lex order.
pub fn k_subsets(k: usize, i: usize) -> Vec<Subset> {
    enumerate_subsets(k, k).into_iter().filter(|a| a.len() == i).collect()
}

/// Lex rank of a permutation of `[m]` (its factorial-base digits).
pub fn perm_rank(sigma: &Injection) -> BigUint {
    let m = sigma.source_size();
    let mut left: Vec<u32> = (1..=m as u32).collect();
    let mut r = BigUint::zero();
    for (i, &v) in sigma.images().iter().enumerate() {
        let pos = left.iter().position(|&u| u == v).expect("permutation");
        left.remove(pos);
        r += BigUint::from(pos) * BigUint::from(factorial(m - 1 - i));
    }
    r
}

/// Inverse of [`perm_rank`].
pub fn perm_unrank(m: usize, rank: &BigUint) -> Injection {
    let mut left: Vec<u32> = (1..=m as u32).collect();
    let mut r = rank.clone();
    let mut images = Vec::with_capacity(m);
    for i in 0..m {
        let f = BigUint::from(factorial(m - 1 - i));
        let (q, rem) = r.div_rem(&f);
        images.push(left.remove(q.to_usize().expect("rank below m!")));
        r = rem;
    }
    Injection::new(images).expect("permutation")
}

/// `m!·∏_{i=1}^k binom(k,i)^{2·binom(m,i)}`.
pub fn departization_count(m: usize, k: usize) -> BigUint {
    let mut r = BigUint::from(factorial(m));
    for i in 1..=k {
        r *= BigUint::from(binom(k, i)).pow(2 * binom(m, i) as u32);
    }
    r
}

/// `p = ∏_{i=1}^k binom(k,i)^{−2·binom(k,i)}`.
pub fn departization_p(k: usize) -> Q {
    let mut d = BigUint::one();
    for i in 1..=k {
        d *= BigUint::from(binom(k, i)).pow(2 * binom(k, i) as u32);
    }
    Q::new(1.into(), d.into())
}

/// Randomness `(σ, U, U')` of departization; `u[c]` indexes `B^{|C|}` for the `c`-th `C ∈ r(m,k)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct DepartizationRandomness {
    pub sigma: Injection,
    pub u: Vec<usize>,
    pub u_prime: Vec<usize>,
}

impl DepartizationRandomness {
    fn radices(m: usize, k: usize) -> Vec<usize> {
        enumerate_subsets(m, k).iter().map(|c| binom(k, c.len()) as usize).collect()
    }

    /// Decodes an index below [`departization_count`]: `σ` (factorial base) least
    /// significant, then `U`, then `U'`, each in product base over `r(m,k)`.
    pub fn decode(m: usize, k: usize, index: &BigUint) -> Self {
        let (mut rest, sr) = index.div_rem(&BigUint::from(factorial(m)));
        let sigma = perm_unrank(m, &sr);
        let radices = Self::radices(m, k);
        let take = |rest: &mut BigUint| -> Vec<usize> {
            radices
                .iter()
                .map(|&r| {
                    let (q, d) = rest.div_rem(&BigUint::from(r));
                    *rest = q;
                    d.to_usize().unwrap()
                })
                .collect()
        };
        let u = take(&mut rest);
        let u_prime = take(&mut rest);
        DepartizationRandomness { sigma, u, u_prime }
    }

    pub fn encode(&self, k: usize) -> BigUint {
        let m = self.sigma.source_size();
        let radices = Self::radices(m, k);
        let mut acc = BigUint::zero();
        for (digits, _) in [(&self.u_prime, 0), (&self.u, 1)] {
            for (d, r) in digits.iter().zip(&radices).rev() {
                acc = acc * BigUint::from(*r) + BigUint::from(*d);
            }
        }
        acc * BigUint::from(factorial(m)) + perm_rank(&self.sigma)
    }

    /// Every randomness value at `(m, k)` in index order (tiny cases only).
    pub fn all(m: usize, k: usize) -> Vec<Self> {
        let n = departization_count(m, k).to_u64().expect("enumerable");
        (0..n).map(|i| Self::decode(m, k, &BigUint::from(i))).collect()
    }
}

/// `τ_α = α^{-1}∘τ∘ι_{im(τ^{-1}∘α), m}` for a permutation `τ` of `[m]`.
pub fn sigma_alpha(tau: &Injection, alpha: &Injection) -> Injection {
    let inv = tau.inverse();
    let mut pre: Vec<u32> = alpha.images().iter().map(|&a| inv.at(a)).collect();
    pre.sort_unstable();
    let images = pre
        .iter()
        .map(|&c| {
            let v = tau.at(c);
            alpha.images().iter().position(|&a| a == v).unwrap() as u32 + 1
        })
        .collect();
    Injection::new(images).unwrap()
}

/// `x^{σ,U}_C = x_f` with `dom f = U_C` and `f(u_t) = σ(c'_t)`, `c'_t` the `t`-th smallest
/// element of `σ^{-1}(C)`; coordinates over `r(m,k)`.
pub fn departize_config(x: &PartiteConfig, sigma: &Injection, u: &[usize]) -> Config {
    let k = x.layout.k();
    let m = sigma.source_size();
    let slots = local_slots(k);
    let inv = sigma.inverse();
    let coords = enumerate_subsets(m, k)
        .iter()
        .zip(u)
        .map(|(c, &uc)| {
            let target = &k_subsets(k, c.len())[uc];
            let d = slots.iter().position(|s| s == target).unwrap();
            let mut pre: Vec<u32> = c.members().iter().map(|&v| inv.at(v)).collect();
            pre.sort_unstable();
            let values: Vec<u32> = pre.iter().map(|&p| sigma.at(p)).collect();
            x.coords[x.layout.position(d, &values)]
        })
        .collect();
    Config { m, cap: k, coords }
}

/// Whether `α ∈ 𝒢(σ, U, U')`: `U_{α(C)} = U'_{α(C)} = σ_α^{-1}(C)` for all `C ∈ r(k)`.
fn in_good_set(alpha: &Injection, sa_inv: &Injection, u: &[usize], u_prime: &[usize], m: usize, k: usize) -> bool {
    local_slots(k).iter().all(|c| {
        let ac = alpha.image_of(c.members());
        let pos = subset_rank(m, &ac);
        if u[pos] != u_prime[pos] {
            return false;
        }
        let mut target = sa_inv.image_of(c.members());
        target.sort_unstable();
        k_subsets(k, c.len())[u[pos]].members() == target.as_slice()
    })
}

/// `y^{σ,U,U'}_α = (y_{α∘σ_α})_{σ_α^{-1}}` on `𝒢(σ,U,U')`, `⊥ = labels` elsewhere. `y` holds
/// partite labels (patterns encoded in base `labels`) indexed by `[m]^k`.
pub fn departize_labels(y: &[u32], m: usize, k: usize, labels: usize, r: &DepartizationRandomness) -> Vec<u32> {
    let plen = factorial(k) as usize;
    let bottom = labels as u32;
    enumerate_injections(m, k)
        .iter()
        .map(|alpha| {
            let sa = sigma_alpha(&r.sigma, alpha);
            let sa_inv = sa.inverse();
            if !in_good_set(alpha, &sa_inv, &r.u, &r.u_prime, m, k) {
                return bottom;
            }
            let tuple = alpha.compose(&sa);
            let idx = tuple.images().iter().fold(0usize, |acc, &v| acc * m + (v - 1) as usize);
            decode_pattern(y[idx], plen, labels)[injection_rank(k, sa_inv.images())]
        })
        .collect()
}

/// The departized non-partite sample `(x^{σ,U}, y^{σ,U,U'})` over `Λ ∪ {⊥}`.
pub fn departize_sample(s: &Sample, labels: usize, r: &DepartizationRandomness) -> Result<Sample, String> {
    let Sample::Partite { x, y } = s else { return Err("departization takes a partite sample".into()) };
    let k = x.layout.k();
    let m = x.layout.sizes[0];
    if x.layout.sizes.iter().any(|&n| n != m) || r.sigma.source_size() != m {
        return Err("departization needs m vertices in every part and σ ∈ S_m".into());
    }
    Ok(Sample::NonPartite { x: departize_config(x, &r.sigma, &r.u), y: departize_labels(y, m, k, labels, r) })
}

/// An agnostic partite adversary `(μ, μ', F)` over `Ω^kpart` and `(Ω')^kpart`, used to build
/// both sides of the departization identities exactly.
#[derive(Clone, Debug)]
pub struct DepartizationSetup {
    pub k: usize,
    pub mu: PartiteProbTemplate,
    pub mu_prime: PartiteProbTemplate,
    pub f: Hypothesis,
    /// `|Λ|`; `F` takes values in `Λ^{S_k}` encoded in base `labels`.
    pub labels: usize,
}

/// Outcome `(x, x', σ, U, U', y)` of a departized sample or of its discrete equivalent.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct DepartOutcome {
    pub x: Vec<u32>,
    pub x_prime: Vec<u32>,
    pub sigma: Vec<u32>,
    pub u: Vec<usize>,
    pub u_prime: Vec<usize>,
    pub y: Vec<u32>,
}

impl DepartizationSetup {
    pub fn new(k: usize, mu: PartiteProbTemplate, mu_prime: PartiteProbTemplate, f: Hypothesis, labels: usize) -> Result<Self, String> {
        let slots = local_slots(k);
        for t in [&mu.template, &mu_prime.template] {
            if t.k != k {
                return Err("measure has the wrong number of parts".into());
            }
            for (j, a) in slots.iter().enumerate() {
                let first = slots.iter().position(|b| b.len() == a.len()).unwrap();
                if t.sizes[j] != t.sizes[first] {
                    return Err("space is not a partization (sizes differ across same-size index sets)".into());
                }
            }
        }
        let prod: Vec<usize> = mu.template.sizes.iter().zip(&mu_prime.template.sizes).map(|(a, b)| a * b).collect();
        if f.setting != Setting::Partite || f.k != k || f.sizes != prod {
            return Err("F must be partite over the product space".into());
        }
        if f.labels != (labels as u64).pow(factorial(k) as u32) as usize {
            return Err("F must take values in Λ^{S_k}".into());
        }
        Ok(DepartizationSetup { k, mu, mu_prime, f, labels })
    }

    /// Sizes per arity `1..=k` of the non-partite spaces `Ω` and `Ω'`.
    fn arity_sizes(t: &PartiteTemplate) -> Vec<usize> {
        let slots = local_slots(t.k);
        (1..=t.k).map(|i| t.sizes[slots.iter().position(|a| a.len() == i).unwrap()]).collect()
    }

    fn f_star(&self, x: &PartiteConfig, xp: &PartiteConfig) -> Vec<u32> {
        self.f.star_partite(&PartiteConfig::join(x, xp, &self.mu_prime.template))
    }

    /// Exact law of `(x^{σ,U}, x'^{σ,U'}, σ, U, U', y^{σ,U,U'})` with `(x, x') ~ (μ⊗μ')^m`,
    /// `y = F*_m(x, x')` and uniform randomness.
    pub fn departized_law(&self, m: usize) -> BTreeMap<DepartOutcome, Q> {
        let layout = PartLayout::uniform(m, self.k);
        let rs = DepartizationRandomness::all(m, self.k);
        let pr = Q::new(1.into(), (rs.len() as i64).into());
        let mut law = BTreeMap::new();
        for (xc, px) in partite_config_law(&self.mu, m).atoms() {
            let x = PartiteConfig { layout: layout.clone(), coords: xc };
            for (xpc, pxp) in partite_config_law(&self.mu_prime, m).atoms() {
                let xp = PartiteConfig { layout: layout.clone(), coords: xpc };
                let y = self.f_star(&x, &xp);
                let p = &px * &pxp * &pr;
                for r in &rs {
                    let out = DepartOutcome {
                        x: departize_config(&x, &r.sigma, &r.u).coords,
                        x_prime: departize_config(&xp, &r.sigma, &r.u_prime).coords,
                        sigma: r.sigma.images().to_vec(),
                        u: r.u.clone(),
                        u_prime: r.u_prime.clone(),
                        y: departize_labels(&y, m, self.k, self.labels, r),
                    };
                    *law.entry(out).or_insert_with(Q::zero) += &p;
                }
            }
        }
        law
    }

    /// Law of `(x̃, j̃) ~ ν^m` on `r(m,k)`, `ν_i(W × {j}) = binom(k,i)^{-1}·μ_{B^i_j}(W)`;
    /// atoms carry `value·binom(k,|C|) + j` per coordinate.
    fn nu_law(mu: &PartiteProbTemplate, m: usize) -> LocalMeasure {
        let k = mu.k();
        let slots = local_slots(k);
        let weights: Vec<Vec<Q>> = enumerate_subsets(m, k)
            .iter()
            .map(|c| {
                let bs = k_subsets(k, c.len());
                let nb = bs.len();
                let size = mu.template.sizes[slots.iter().position(|s| s == &bs[0]).unwrap()];
                let mut w = vec![Q::zero(); size * nb];
                for (j, b) in bs.iter().enumerate() {
                    let d = slots.iter().position(|s| s == b).unwrap();
                    for v in 0..size {
                        w[v * nb + j] = &mu.weights[d][v] / Q::from_integer((nb as i64).into());
                    }
                }
                w
            })
            .collect();
        LocalMeasure { sizes: weights.iter().map(Vec::len).collect(), weights }
    }

    /// Exact law of the discrete equivalent `(x̃, x̃', σ̃, Ũ, Ũ', ỹ)`.
    pub fn discrete_equivalent_law(&self, m: usize) -> BTreeMap<DepartOutcome, Q> {
        let k = self.k;
        let subsets = enumerate_subsets(m, k);
        let nbs: Vec<u32> = subsets.iter().map(|c| binom(k, c.len()) as u32).collect();
        let split = |v: Vec<u32>| -> (Vec<u32>, Vec<usize>) {
            v.iter().zip(&nbs).map(|(&c, &nb)| (c / nb, (c % nb) as usize)).unzip()
        };
        let right = Template::new(Self::arity_sizes(&self.mu_prime.template)).unwrap();
        let perms = crate::index::permutations(m);
        let pr = Q::new(1.into(), (perms.len() as i64).into());
        let alphas = enumerate_injections(m, k);
        let plen = factorial(k) as usize;
        let bottom = self.labels as u32;
        let mut law = BTreeMap::new();
        for (a, pa) in Self::nu_law(&self.mu, m).atoms() {
            let (x, j) = split(a);
            for (b, pb) in Self::nu_law(&self.mu_prime, m).atoms() {
                let (xp, jp) = split(b);
                let joined = Config::join(&Config { m, cap: k, coords: x.clone() }, &Config { m, cap: k, coords: xp.clone() }, &right);
                for sigma in &perms {
                    let y = alphas
                        .iter()
                        .map(|alpha| {
                            let sa = sigma_alpha(sigma, alpha);
                            let sa_inv = sa.inverse();
                            if !in_good_set(alpha, &sa_inv, &j, &jp, m, k) {
                                return bottom;
                            }
                            let local = pullback(alpha, &joined).unwrap().coords;
                            let moved = permute_local(k, injection_rank(k, sa.images()), &local);
                            decode_pattern(self.f.eval(&moved), plen, self.labels)[injection_rank(k, sa_inv.images())]
                        })
                        .collect();
                    let out = DepartOutcome {
                        x: x.clone(),
                        x_prime: xp.clone(),
                        sigma: sigma.images().to_vec(),
                        u: j.clone(),
                        u_prime: jp.clone(),
                        y,
                    };
                    *law.entry(out).or_insert_with(Q::zero) += &pa * &pb * &pr;
                }
            }
        }
        law
    }

    /// Total loss `L_{μ̂,μ̂'',F̂,ℓ}(H)` read off the discrete equivalent at `m = k`, where the
    /// labels over `S_k` are the pattern.
    pub fn departized_total_loss(&self, ell: &AgnosticLossFn, h: &Hypothesis) -> Q {
        self.discrete_equivalent_law(self.k).iter().map(|(o, p)| p * ell.eval(h, &o.x, &o.y)).sum()
    }

    /// `C_{ℓ,⊥,F}`: the expected `ℓ_⊥(x̃)` given that `ỹ` carries `⊥`, and the probability `p`
    /// that it does not.
    pub fn bottom_constant(&self, bottom_cost: &dyn Fn(&[u32]) -> Q) -> (Q, Q) {
        let bottom = self.labels as u32;
        let (mut mass, mut acc) = (Q::zero(), Q::zero());
        for (o, p) in self.discrete_equivalent_law(self.k) {
            if o.y.contains(&bottom) {
                acc += &p * bottom_cost(&o.x);
                mass += p;
            }
        }
        (acc / &mass, Q::one() - mass)
    }
}

/// Marginal of a departization law on `(x, y)`.
pub fn xy_marginal(law: &BTreeMap<DepartOutcome, Q>) -> BTreeMap<(Vec<u32>, Vec<u32>), Q> {
    let mut out = BTreeMap::new();
    for (o, p) in law {
        *out.entry((o.x.clone(), o.y.clone())).or_insert_with(Q::zero) += p;
    }
    out
}

/// `δ̃_ℓ(ε, δ) = min{εδ/(2‖ℓ‖∞), 1/2}`.
pub fn delta_tilde(eps: f64, delta: f64, sup_norm: f64) -> f64 {
    (eps * delta / (2.0 * sup_norm)).min(0.5)
}

/// `δ̂_ℓ(ε, δ) = min{pε²δ/(8‖ℓ‖∞²), pε/(8‖ℓ‖∞), 1/2}`.
pub fn delta_hat(eps: f64, delta: f64, sup_norm: f64, p: f64) -> f64 {
    (p * eps * eps * delta / (8.0 * sup_norm * sup_norm)).min(p * eps / (8.0 * sup_norm)).min(0.5)
}

/// Replaces `⊥`-touched entries of a label tensor by fresh labels: non-partite entries are
/// replaced when any injection with the same image carries `⊥`; partite entries one by one.
pub fn fill_bottoms(y: &[u32], fresh: &[u32], bottom: u32, m: usize, k: usize, setting: Setting) -> Vec<u32> {
    match setting {
        Setting::Partite => y.iter().zip(fresh).map(|(&a, &b)| if a == bottom { b } else { a }).collect(),
        Setting::NonPartite => {
            let injections = enumerate_injections(m, k);
            let mut touched: std::collections::HashSet<Vec<u32>> = std::collections::HashSet::new();
            for (alpha, &v) in injections.iter().zip(y) {
                if v == bottom {
                    touched.insert(alpha.image_set());
                }
            }
            injections
                .iter()
                .zip(y.iter().zip(fresh))
                .map(|(alpha, (&a, &b))| if touched.contains(&alpha.image_set()) { b } else { a })
                .collect()
        }
    }
}

/// Learner over `Λ ∪ {⊥}` from one over `Λ`: `A'(x, y, b, b̃) = A(x, y^{x,b̃}, b)`, where
/// `y^{x,b̃}` fills the `⊥`-touched entries from `𝒩(x, b̃)`. Randomness `R_A·R_𝒩`, with `b`
/// the least significant digit.
pub fn neutral_symbol_learner(a: &Learner, w: &FlexibilityWitness) -> Learner {
    let (a1, a2, w1, w2) = (a.clone(), a.clone(), w.clone(), w.clone());
    let k = a.k;
    let setting = a.setting;
    Learner::randomized(
        format!("{}^⊥", a.name),
        setting,
        k,
        move |m| a1.randomness(m) * w1.r_n(m),
        move |s, b| {
            let ra = a2.randomness(s.m());
            let (bt, ba) = b.div_rem(&ra);
            let bottom = w2.labels as u32;
            let filled = match s {
                Sample::NonPartite { x, y } => {
                    let fresh = w2.noise_nonpartite(x, &bt);
                    Sample::NonPartite { x: x.clone(), y: fill_bottoms(y, &fresh, bottom, x.m, k, setting) }
                }
                Sample::Partite { x, y } => {
                    let fresh = w2.noise_partite(x, &bt);
                    Sample::Partite { x: x.clone(), y: fill_bottoms(y, &fresh, bottom, x.layout.sizes[0], k, setting) }
                }
            };
            a2.run(&filled, &ba).expect("digit below R_A")
        },
    )
}

/// Partite learner from a non-partite learner that accepts `⊥ = labels`:
/// `A'(x, y, b, σ, U, U') = A(x^{σ,U}, y^{σ,U,U'}, b)^kpart`.
pub fn departize_learner_neutral(a: &Learner, labels: usize) -> Learner {
    assert_eq!(a.setting, Setting::NonPartite);
    let k = a.k;
    let (a1, a2) = (a.clone(), a.clone());
    Learner::randomized(
        format!("{}^dep", a.name),
        Setting::Partite,
        k,
        move |m| a1.randomness(m) * departization_count(m, k),
        move |s, b| {
            let m = s.m();
            let (rest, ba) = b.div_rem(&a2.randomness(m));
            let r = DepartizationRandomness::decode(m, k, &rest);
            let dep = departize_sample(s, labels, &r).expect("partite sample with equal parts");
            partize_hypothesis(&a2.run(&dep, &ba).expect("digit below R_A"))
        },
    )
}

/// The composition with flexibility: randomness `R_A·R_𝒩·m!·∏ binom(k,i)^{2binom(m,i)}`
/// decoded as `(b, b̃, σ, U, U')`, least significant first.
pub fn departize_learner(a: &Learner, w: &FlexibilityWitness) -> Learner {
    departize_learner_neutral(&neutral_symbol_learner(a, w), w.labels)
}

/// `m^agPACr` of [`neutral_symbol_learner`]: `m_A(ε/2, δ̃_ℓ(ε, δ))`.
pub fn neutral_sample_size(m_a: SizeFn, sup_norm: f64) -> SizeFn {
    Arc::new(move |e, d| m_a(e / 2.0, delta_tilde(e, d, sup_norm)))
}

/// `m^agPACr` of [`departize_learner_neutral`]: `m_A(pε/2, δ̃_ℓ(ε, δ))`.
pub fn departized_neutral_sample_size(m_a: SizeFn, sup_norm: f64, k: usize) -> SizeFn {
    let p = crate::qf(&departization_p(k));
    Arc::new(move |e, d| m_a(p * e / 2.0, delta_tilde(e, d, sup_norm)))
}

/// `m^agPACr` of [`departize_learner`]: `m_A(pε/4, δ̂_ℓ(ε, δ))`.
pub fn departized_sample_size(m_a: SizeFn, sup_norm: f64, k: usize) -> SizeFn {
    let p = crate::qf(&departization_p(k));
    Arc::new(move |e, d| m_a(p * e / 4.0, delta_hat(e, d, sup_norm, p)))
}

/// Sets every coordinate of arity above `k` to `0`.
pub fn strip_config(x: &Config, k: usize) -> Config {
    let coords = enumerate_subsets(x.m, x.cap).iter().zip(&x.coords).map(|(a, &c)| if a.len() > k { 0 } else { c }).collect();
    Config { m: x.m, cap: x.cap, coords }
}

/// The learner that feeds `A` samples whose coordinates of arity above `k` are fixed.
pub fn strip_dummy(a: &Learner) -> Learner {
    let (a1, a2) = (a.clone(), a.clone());
    let k = a.k;
    Learner::randomized(format!("{}^strip", a.name), a.setting, k, move |m| a1.randomness(m), move |s, b| {
        let s2 = match s {
            Sample::NonPartite { x, y } => Sample::NonPartite { x: strip_config(x, k), y: y.clone() },
            other => other.clone(),
        };
        a2.run(&s2, b).expect("same randomness")
    })
}

fn relabel(h: &Hypothesis, labels: usize) -> Hypothesis {
    let inner = h.clone();
    let mut out = Hypothesis::new(h.name.clone(), h.k, h.setting, h.sizes.clone(), labels, h.declared_rank, move |x| inner.eval(x));
    out.origin = h.origin.clone();
    out
}

/// `ℓ'` extends `ℓ` and charges every `Λ`-valued prediction against a label outside `Λ`.
pub fn check_extension(ell: &LossFn, ell2: &LossFn) -> Result<(), String> {
    if ell2.labels < ell.labels || ell2.k != ell.k || ell2.setting != ell.setting || ell2.sizes != ell.sizes {
        return Err("ℓ' does not live over a larger label set on the same space".into());
    }
    let plen = ell.pattern_len();
    let small = all_patterns(plen, ell.labels);
    let big = all_patterns(plen, ell2.labels);
    for x in crate::hypotheses::all_points(&ell.sizes) {
        for y in &small {
            for yp in &small {
                if ell.eval(&x, y, yp) != ell2.eval(&x, y, yp) {
                    return Err(format!("ℓ' differs from ℓ at {x:?}"));
                }
            }
            for yp in big.iter().filter(|p| p.iter().any(|&v| v as usize >= ell.labels)) {
                if ell2.eval(&x, y, yp) <= Q::zero() {
                    return Err(format!("ℓ' does not penalize {y:?} against {yp:?}"));
                }
            }
        }
    }
    Ok(())
}

/// `𝓗' = {ι∘H}` over `labels2 ≥ labels` labels, after checking that `ell2` extends `ell`.
pub fn extend_codomain(class: &HypothesisClass, ell: &LossFn, labels2: usize, ell2: &LossFn) -> Result<HypothesisClass, String> {
    if ell2.labels != labels2 {
        return Err("ℓ' label count differs from the new codomain".into());
    }
    check_extension(ell, ell2)?;
    let inner = class.clone();
    let mut c = HypothesisClass::structured(
        format!("{}^+{}", class.name, labels2 - class.labels),
        class.k,
        class.setting,
        class.sizes.clone(),
        labels2,
        class.len(),
        move |i| relabel(&inner.get(i), labels2),
        class.erm.clone(),
        None,
    );
    c.restrict = class.restrict.clone();
    c.origin = Some(Arc::new(class.clone()));
    Ok(c)
}

/// A learner for `𝓗'` from one for `𝓗`: labels outside `Λ` become `y₀ = 0` before running `A`.
pub fn lift_learner(a: &Learner, labels: usize, labels2: usize) -> Learner {
    let (a1, a2) = (a.clone(), a.clone());
    Learner::randomized(format!("{}^lift", a.name), a.setting, a.k, move |m| a1.randomness(m), move |s, b| {
        let clean = |y: &[u32]| y.iter().map(|&v| if v as usize >= labels { 0 } else { v }).collect::<Vec<u32>>();
        let s2 = match s {
            Sample::NonPartite { x, y } => Sample::NonPartite { x: x.clone(), y: clean(y) },
            Sample::Partite { x, y } => Sample::Partite { x: x.clone(), y: clean(y) },
        };
        relabel(&a2.run(&s2, b).expect("same randomness"), labels2)
    })
}

/// A learner for `𝓗` from one for `𝓗'` (whose outputs take values in `Λ`).
pub fn lower_learner(a: &Learner, labels: usize) -> Learner {
    let (a1, a2) = (a.clone(), a.clone());
    Learner::randomized(format!("{}^lower", a.name), a.setting, a.k, move |m| a1.randomness(m), move |s, b| {
        relabel(&a2.run(s, b).expect("same randomness"), labels)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dims::vcn_k;
    use crate::families::matching_family;
    use crate::hypotheses::{all_points, partize_class, point_count};
    use crate::index::permutations;
    use crate::learners::erm;
    use crate::losses::{agnostic_total_loss, agnostic_zero_one, flexibility_witness_01, total_loss, zero_one_loss};
    use crate::sampler::{Measure, SampleDrawer, Scenario, SeededStream};
    use crate::templates::partize_template;
    use crate::{q, qi};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hyp(k: usize, setting: Setting, sizes: Vec<usize>, labels: usize, seed: u64) -> Hypothesis {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let table = (0..point_count(&sizes)).map(|_| rng.gen_range(0..labels as u32)).collect();
        Hypothesis::from_table("r", k, setting, sizes, labels, table)
    }

    fn random_weights(rng: &mut ChaCha8Rng, n: usize) -> Vec<Q> {
        let raw: Vec<i64> = (0..n).map(|_| rng.gen_range(1..6)).collect();
        let t: i64 = raw.iter().sum();
        raw.iter().map(|&r| q(r, t)).collect()
    }

    #[test]
    fn iota_phi_round_trip_and_equivariance() {
        for k in 1..=3 {
            let n = local_slots(k).len();
            let sizes = vec![2; n];
            for x in all_points(&sizes) {
                let p = PartiteConfig { layout: PartLayout::uniform(1, k), coords: x.clone() };
                let c = iota_kpart(&p).unwrap();
                assert_eq!(phi_k(&c).unwrap(), p);
                if k == 1 {
                    assert_eq!(c.coords, x);
                }
                for s in permutations(k) {
                    let lhs = phi_k(&pullback(&s, &c).unwrap()).unwrap().coords;
                    let rhs = crate::index::sigma_act_partite(&s.inverse(), &x, &sizes).unwrap();
                    assert_eq!(lhs, rhs);
                }
            }
        }
        assert!(phi_m(&Config { m: 1, cap: 1, coords: vec![0] }, 2).is_err());
    }

    #[test]
    fn phi_commuting_square() {
        // k = 2 on a 2-point space: every configuration, several hypotheses, m ∈ {2, 4, 5}
        for (m, seeds) in [(2usize, 6u64), (4, 2), (5, 1)] {
            for seed in 0..seeds {
                let f = random_hyp(2, Setting::NonPartite, vec![2, 2, 2], 2, seed);
                let fk = partize_hypothesis(&f);
                let law = config_law(&ProbTemplate::uniform(&[2, 2]), m, 2);
                for (coords, _) in law.atoms().into_iter().step_by(if m > 2 { 7 } else { 1 }) {
                    let x = Config { m, cap: 2, coords };
                    let lhs = big_phi_m(&f.star(&x), m, 2, 2).unwrap();
                    let rhs = fk.star_partite(&phi_m(&x, 2).unwrap());
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn phi_m_is_measure_preserving() {
        let mu = ProbTemplate::new(vec![vec![q(1, 3), q(2, 3)], vec![q(1, 4), q(3, 4)]]).unwrap();
        let part = partize_template(&mu, 2).unwrap();
        for m in [2, 3, 4, 5] {
            assert_eq!(phi_m_pushforward(&mu, m, 2).unwrap(), partite_product_law(&part, m / 2), "m = {m}");
        }
        let mu3 = ProbTemplate::new(vec![vec![q(1, 2), q(1, 2)], vec![qi(1)], vec![q(1, 5), q(4, 5)]]).unwrap();
        let part3 = partize_template(&mu3, 3).unwrap();
        assert_eq!(phi_m_pushforward(&mu3, 3, 3).unwrap(), partite_product_law(&part3, 1));
    }

    #[test]
    fn partized_total_loss_identity() {
        let mu = ProbTemplate::new(vec![vec![q(1, 3), q(2, 3)], vec![q(1, 4), q(3, 4)]]).unwrap();
        let ell = zero_one_loss(2, 2, Setting::NonPartite, vec![2, 2, 2]);
        let ag = crate::losses::wrap_agnostic(&ell);
        let agp = partize_agnostic(&ag);
        for seed in 0..5 {
            let f = random_hyp(2, Setting::NonPartite, vec![2, 2, 2], 2, seed);
            let h = random_hyp(2, Setting::NonPartite, vec![2, 2, 2], 2, 100 + seed);
            let np = total_loss(&LocalMeasure::nonpartite(&mu, 2), &f, &ell, &h);
            let pt = total_loss(&LocalMeasure::partite(&partize_template(&mu, 2).unwrap()), &partize_hypothesis(&f), &ell.partize(), &partize_hypothesis(&h));
            assert_eq!(np, pt);
            let sc = Scenario::new(2, Measure::Partite(partize_template(&mu, 2).unwrap()), None, partize_hypothesis(&f)).unwrap();
            assert_eq!(agnostic_total_loss(&sc, &agp, &partize_hypothesis(&h)), np);
        }
    }

    #[test]
    fn nonpartite_wrapper_of_partite_erm() {
        let spec = matching_family(2);
        let pclass = partize_class(&spec.class);
        let ell = agnostic_zero_one(2, 2, Setting::NonPartite, spec.class.sizes.clone());
        let a_part = erm(&pclass, &partize_agnostic(&ell));
        let a = nonpartite_from_partite_learner(&a_part, 2);
        assert_eq!(nonpartite_sample_size(3.2, 2), 8);
        let f = spec.class.get(0b10);
        let sc = Scenario::new(2, spec.measure.clone(), None, f.clone()).unwrap();
        for t in 0..10 {
            let s = SampleDrawer::new(&sc, 8).draw(&mut SeededStream::new(3, t).rng());
            let h = a.run0(&s);
            assert_eq!(h.setting, Setting::NonPartite);
            assert!(spec.class.contains(&h));
            // consistent on the sub-sample seen through φ_m
            let Sample::NonPartite { x, .. } = &s else { unreachable!() };
            let px = phi_m(x, 2).unwrap();
            assert_eq!(partize_hypothesis(&h).star_partite(&px), partize_hypothesis(&f).star_partite(&px));
        }
    }

    #[test]
    fn disintegration() {
        let uniform = vec![vec![q(1, 6); 2]; 3];
        let (m, k) = disintegrate_finite(&uniform);
        assert_eq!(m, vec![q(1, 3); 3]);
        assert!(k.rows.iter().all(|r| r == &vec![q(1, 2); 2]));
        let dirac = vec![vec![qi(0), qi(1)], vec![qi(0), qi(0)]];
        let (m, k) = disintegrate_finite(&dirac);
        assert_eq!(m, vec![qi(1), qi(0)]);
        assert_eq!(k.rows[0], vec![qi(0), qi(1)]);
        assert_eq!(k.rows[1], vec![qi(1), qi(0)]);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let (xs, js) = (rng.gen_range(1..5), rng.gen_range(1..4));
            let flat = random_weights(&mut rng, xs * js);
            let nu: Vec<Vec<Q>> = flat.chunks(js).map(|c| c.to_vec()).collect();
            let (m, k) = disintegrate_finite(&nu);
            assert!(check_reconstruction(&nu, &m, &k));
            assert!(k.rows.iter().all(|r| r.iter().sum::<Q>() == qi(1)));
        }
    }

    #[test]
    fn randomness_counts_and_codes() {
        assert_eq!(departization_count(2, 2), BigUint::from(32u32));
        assert_eq!(departization_p(2), q(1, 16));
        assert_eq!(departization_p(1), qi(1));
        for m in 1..=3 {
            let all = DepartizationRandomness::all(m, 2);
            for (i, r) in all.iter().enumerate() {
                assert_eq!(r.encode(2), BigUint::from(i));
            }
        }
        for m in 1..=5 {
            for (i, p) in permutations(m).iter().enumerate() {
                assert_eq!(perm_rank(p), BigUint::from(i));
                assert_eq!(&perm_unrank(m, &BigUint::from(i)), p);
            }
        }
        assert!((delta_tilde(0.5, 0.4, 1.0) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn sigma_alpha_makes_increasing() {
        for m in 2..=4 {
            for tau in permutations(m) {
                for alpha in enumerate_injections(m, 2) {
                    let sa = sigma_alpha(&tau, &alpha);
                    let g = tau.inverse().compose(&alpha).compose(&sa);
                    assert!(g.images().windows(2).all(|w| w[0] < w[1]));
                }
            }
        }
    }

    #[test]
    fn departization_at_k1_is_identity() {
        let f = Hypothesis::new("f", 1, Setting::Partite, vec![3], 2, 1, |x| (x[0] == 2) as u32);
        let x = PartiteConfig { layout: PartLayout::uniform(3, 1), coords: vec![0, 2, 1] };
        let y = f.star_partite(&x);
        for sigma in permutations(3) {
            let r = DepartizationRandomness { sigma: sigma.clone(), u: vec![0; 3], u_prime: vec![0; 3] };
            let s = departize_sample(&Sample::Partite { x: x.clone(), y: y.clone() }, 2, &r).unwrap();
            let Sample::NonPartite { x: xd, y: yd } = s else { unreachable!() };
            assert_eq!(xd.coords, x.coords);
            assert_eq!(yd, y);
        }
    }

    #[test]
    fn good_set_probability_is_p() {
        // m = k = 2: P[α ∈ 𝒢] over uniform randomness, per α
        for alpha in enumerate_injections(2, 2) {
            let all = DepartizationRandomness::all(2, 2);
            let hits = all
                .iter()
                .filter(|r| {
                    let sa = sigma_alpha(&r.sigma, &alpha);
                    in_good_set(&alpha, &sa.inverse(), &r.u, &r.u_prime, 2, 2)
                })
                .count();
            assert_eq!(q(hits as i64, all.len() as i64), q(1, 16));
        }
    }

    fn tiny_setup(seed: u64) -> DepartizationSetup {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mu = PartiteProbTemplate::new(2, vec![random_weights(&mut rng, 2), random_weights(&mut rng, 2), vec![qi(1)]]).unwrap();
        let mup = PartiteProbTemplate::new(2, vec![vec![qi(1)], vec![qi(1)], random_weights(&mut rng, 2)]).unwrap();
        let f = random_hyp(2, Setting::Partite, vec![2, 2, 2], 4, seed);
        DepartizationSetup::new(2, mu, mup, f, 2).unwrap()
    }

    #[test]
    fn departized_law_matches_discrete_equivalent_small() {
        let s = tiny_setup(4);
        let lhs = s.departized_law(2);
        let rhs = s.discrete_equivalent_law(2);
        assert_eq!(lhs.values().sum::<Q>(), qi(1));
        assert_eq!(lhs, rhs);
        assert_eq!(xy_marginal(&lhs), xy_marginal(&rhs));
    }

    #[test]
    fn neutral_symbol_learner_substitution() {
        let spec = matching_family(2);
        let ell = agnostic_zero_one(2, 2, Setting::NonPartite, spec.class.sizes.clone());
        let w = flexibility_witness_01(2, 2, Setting::NonPartite, spec.class.sizes.clone());
        let echo = Learner::deterministic("echo", Setting::NonPartite, 2, |s| {
            let Sample::NonPartite { y, .. } = s else { unreachable!() };
            Hypothesis::new("echo", 2, Setting::NonPartite, vec![4, 4, 1], 3, 0, {
                let v = y[0];
                move |_| v
            })
        });
        let a = neutral_symbol_learner(&echo, &w);
        assert_eq!(a.randomness(3), w.r_n(3));
        let sc = Scenario::new(2, spec.measure.clone(), None, spec.class.get(1)).unwrap();
        let s = SampleDrawer::new(&sc, 3).draw(&mut SeededStream::new(1, 0).rng());
        let Sample::NonPartite { x, y } = &s else { unreachable!() };
        for b in 0..8u32 {
            assert_eq!(a.run(&s, &BigUint::from(b)).unwrap().eval(&[0, 0, 0]), y[0]);
        }
        let all_bot = Sample::NonPartite { x: x.clone(), y: vec![2; y.len()] };
        for b in 0..16u32 {
            let fresh = w.noise_nonpartite(x, &BigUint::from(b));
            assert_eq!(a.run(&all_bot, &BigUint::from(b)).unwrap().eval(&[0, 0, 0]), fresh[0]);
        }
        // a single ⊥ at α also replaces the entry of the reversed injection
        let mut one = y.clone();
        one[0] = 2;
        let fresh = w.noise_nonpartite(x, &BigUint::from(5u32));
        let filled = fill_bottoms(&one, &fresh, 2, 3, 2, Setting::NonPartite);
        let inj = enumerate_injections(3, 2);
        let rev = inj.iter().position(|a| a.images() == [2, 1]).unwrap();
        assert_eq!(filled[rev], fresh[rev]);
        assert_eq!(filled[1], y[1]);
        let _ = ell;
    }

    #[test]
    fn stripping_dummies() {
        // a learner that reads the arity-3 coordinate
        let peek = Learner::deterministic("peek", Setting::NonPartite, 2, |s| {
            let Sample::NonPartite { x, .. } = s else { unreachable!() };
            Hypothesis::constant(2, Setting::NonPartite, vec![2, 2, 1], 2, *x.coords.last().unwrap() % 2)
        });
        let stripped = strip_dummy(&peek);
        let law = config_law(&ProbTemplate::uniform(&[2, 1, 2]), 3, 3);
        let mut outs = std::collections::HashSet::new();
        for (coords, _) in law.atoms() {
            let x = Config { m: 3, cap: 3, coords };
            let s = Sample::NonPartite { y: vec![0; 6], x };
            outs.insert(stripped.run0(&s).table());
        }
        assert_eq!(outs.len(), 1);
        // an already independent learner is unchanged
        let spec = matching_family(2);
        let ell = agnostic_zero_one(2, 2, Setting::NonPartite, spec.class.sizes.clone());
        let e = erm(&spec.class, &ell);
        let sc = Scenario::new(2, spec.measure.clone(), None, spec.class.get(3)).unwrap();
        let s = SampleDrawer::new(&sc, 5).draw(&mut SeededStream::new(2, 2).rng());
        assert!(strip_dummy(&e).run0(&s).same_function(&e.run0(&s)));
    }

    #[test]
    fn codomain_extension() {
        let spec = matching_family(3);
        let ell = zero_one_loss(2, 2, Setting::NonPartite, spec.class.sizes.clone());
        let ell3 = zero_one_loss(3, 2, Setting::NonPartite, spec.class.sizes.clone());
        let ext = extend_codomain(&spec.class, &ell, 3, &ell3).unwrap();
        assert_eq!(ext.labels, 3);
        let mut plain = spec.class.clone();
        plain.restrict = None;
        let mut ext_plain = ext.clone();
        ext_plain.restrict = None;
        assert_eq!(vcn_k(&plain, 4).unwrap(), vcn_k(&ext_plain, 4).unwrap());
        let same = extend_codomain(&spec.class, &ell, 2, &ell).unwrap();
        assert!(same.get(5).same_function(&spec.class.get(5)));
        // a loss that ignores the new label is not an extension
        let lazy = LossFn::new("lazy", 2, Setting::NonPartite, spec.class.sizes.clone(), 3, |_, y, yp| {
            if y.iter().chain(yp).any(|&v| v == 2) { qi(0) } else if y == yp { qi(0) } else { qi(1) }
        });
        assert!(extend_codomain(&spec.class, &ell, 3, &lazy).is_err());
        // learner transfer: out-of-Λ labels become 0 before ERM
        let ag = agnostic_zero_one(2, 2, Setting::NonPartite, spec.class.sizes.clone());
        let lifted = lift_learner(&erm(&spec.class, &ag), 2, 3);
        let sc = Scenario::new(2, spec.measure.clone(), None, spec.class.get(2)).unwrap();
        let s = SampleDrawer::new(&sc, 6).draw(&mut SeededStream::new(4, 1).rng());
        let h = lifted.run0(&s);
        assert_eq!(h.labels, 3);
        assert!(ext.contains(&h));
        assert_eq!(lower_learner(&lifted, 2).run0(&s).labels, 2);
    }

    #[test]
    fn composed_learner_randomness() {
        let spec = matching_family(2);
        let ell = agnostic_zero_one(2, 2, Setting::NonPartite, spec.class.sizes.clone());
        let w = flexibility_witness_01(2, 2, Setting::NonPartite, spec.class.sizes.clone());
        let a = departize_learner(&erm(&spec.class, &ell), &w);
        assert_eq!(a.setting, Setting::Partite);
        assert_eq!(a.randomness(2), w.r_n(2) * BigUint::from(32u32));
        let m_a: SizeFn = Arc::new(|e, d| 1.0 / e + 1.0 / d);
        let sz = departized_sample_size(m_a.clone(), 1.0, 2);
        let p = 1.0 / 16.0;
        assert!((sz(0.5, 0.5) - (4.0 / (p * 0.5) + 1.0 / delta_hat(0.5, 0.5, 1.0, p))).abs() < 1e-9);
        let nz = neutral_sample_size(m_a, 1.0);
        assert!((nz(0.5, 0.4) - (4.0 + 10.0)).abs() < 1e-9);
    }
}
