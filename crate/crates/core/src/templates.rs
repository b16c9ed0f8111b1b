//! Finite templates (ground spaces per arity), probability templates with exact rational
//! weights, their partite counterparts, and configuration points.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::index::{enumerate_subsets, local_slots, subset_count, PartLayout, Subset};
use crate::{parse_q, Q};

/// Ground-space sizes per arity `1..=cap`; arities above the cap are singletons.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Template {
    pub sizes: Vec<usize>,
}

impl Template {
    pub fn new(sizes: Vec<usize>) -> Result<Self, String> {
        if sizes.iter().any(|&n| n == 0) {
            return Err("every ground space needs at least one point".into());
        }
        Ok(Template { sizes })
    }

    pub fn cap(&self) -> usize {
        self.sizes.len()
    }

    pub fn size(&self, arity: usize) -> usize {
        if arity == 0 || arity > self.sizes.len() {
            1
        } else {
            self.sizes[arity - 1]
        }
    }

    /// Same template with stored arities extended (by singletons) up to `cap`.
    pub fn padded(&self, cap: usize) -> Template {
        Template { sizes: (1..=cap.max(self.cap())).map(|i| self.size(i)).collect() }
    }

    /// Sizes of the local slots `r(k)` of a point over `[k]`.
    pub fn local_sizes(&self, k: usize) -> Vec<usize> {
        local_slots(k).iter().map(|a| self.size(a.len())).collect()
    }

    pub fn product(&self, other: &Template) -> Template {
        let cap = self.cap().max(other.cap());
        Template { sizes: (1..=cap).map(|i| self.size(i) * other.size(i)).collect() }
    }
}

fn check_prob(w: &[Q], n: usize, what: &str) -> Result<(), String> {
    if w.len() != n {
        return Err(format!("{what}: expected {n} weights, got {}", w.len()));
    }
    if w.iter().any(|p| p < &Q::zero()) {
        return Err(format!("{what}: negative weight"));
    }
    let total: Q = w.iter().sum();
    if !total.is_one() {
        return Err(format!("{what}: weights sum to {total}, not 1"));
    }
    Ok(())
}

fn tensor(a: &[Q], b: &[Q]) -> Vec<Q> {
    a.iter().flat_map(|p| b.iter().map(move |q| p * q)).collect()
}

fn uniform_vec(n: usize) -> Vec<Q> {
    vec![Q::new(1.into(), (n as i64).into()); n]
}

/// A template with a probability vector per stored arity.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ProbTemplate {
    pub template: Template,
    pub weights: Vec<Vec<Q>>,
}

impl ProbTemplate {
    pub fn new(weights: Vec<Vec<Q>>) -> Result<Self, String> {
        let template = Template::new(weights.iter().map(|w| w.len()).collect())?;
        for (i, w) in weights.iter().enumerate() {
            check_prob(w, template.sizes[i], &format!("arity {}", i + 1))?;
        }
        Ok(ProbTemplate { template, weights })
    }

    pub fn uniform(sizes: &[usize]) -> Self {
        ProbTemplate::new(sizes.iter().map(|&n| uniform_vec(n)).collect()).expect("uniform weights")
    }

    pub fn cap(&self) -> usize {
        self.template.cap()
    }

    /// Weight of point `p` at the given arity (arities above the cap are a Dirac singleton).
    pub fn weight(&self, arity: usize, p: u32) -> Q {
        if arity > self.cap() {
            Q::one()
        } else {
            self.weights[arity - 1][p as usize].clone()
        }
    }

    pub fn padded(&self, cap: usize) -> ProbTemplate {
        let weights = (1..=cap.max(self.cap()))
            .map(|i| if i <= self.cap() { self.weights[i - 1].clone() } else { vec![Q::one()] })
            .collect();
        ProbTemplate { template: self.template.padded(cap), weights }
    }

    /// Tensor product; the point `(a, b)` gets id `a * n' + b`.
    pub fn product(&self, other: &ProbTemplate) -> ProbTemplate {
        let cap = self.cap().max(other.cap());
        let (a, b) = (self.padded(cap), other.padded(cap));
        let weights = (0..cap).map(|i| tensor(&a.weights[i], &b.weights[i])).collect();
        ProbTemplate { template: a.template.product(&b.template), weights }
    }

    /// Weights of the local slots `r(k)`.
    pub fn local_weights(&self, k: usize) -> Vec<Vec<Q>> {
        let p = self.padded(k);
        local_slots(k).iter().map(|a| p.weights[a.len() - 1].clone()).collect()
    }

    pub fn to_json(&self) -> Value {
        let sizes: BTreeMap<String, usize> =
            self.template.sizes.iter().enumerate().map(|(i, &n)| ((i + 1).to_string(), n)).collect();
        let weights: BTreeMap<String, Vec<String>> = self
            .weights
            .iter()
            .enumerate()
            .map(|(i, w)| ((i + 1).to_string(), w.iter().map(|q| q.to_string()).collect()))
            .collect();
        json!({"k": self.cap(), "sizes": sizes, "weights": weights})
    }

    pub fn from_json(v: &Value) -> Result<Self, String> {
        let k = v["k"].as_u64().ok_or("template JSON needs integer field k")? as usize;
        let mut weights = Vec::with_capacity(k);
        for i in 1..=k {
            let key = i.to_string();
            let n = v["sizes"][&key].as_u64().ok_or(format!("missing size for arity {i}"))? as usize;
            let w = match v.get("weights").and_then(|w| w.get(&key)) {
                Some(Value::Array(items)) => items
                    .iter()
                    .map(|t| t.as_str().ok_or("weights must be strings".to_string()).and_then(parse_q))
                    .collect::<Result<Vec<_>, _>>()?,
                _ => uniform_vec(n),
            };
            if w.len() != n {
                return Err(format!("arity {i}: size {n} but {} weights", w.len()));
            }
            weights.push(w);
        }
        ProbTemplate::new(weights)
    }
}

/// Sizes per slot `A ∈ r(k)` of a `k`-partite template, in canonical order of `r(k)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PartiteTemplate {
    pub k: usize,
    pub sizes: Vec<usize>,
}

impl PartiteTemplate {
    pub fn new(k: usize, sizes: Vec<usize>) -> Result<Self, String> {
        if sizes.len() != subset_count(k, k) {
            return Err(format!("a {k}-partite template needs {} sizes", subset_count(k, k)));
        }
        if sizes.iter().any(|&n| n == 0) {
            return Err("every ground space needs at least one point".into());
        }
        Ok(PartiteTemplate { k, sizes })
    }

    pub fn product(&self, other: &PartiteTemplate) -> PartiteTemplate {
        assert_eq!(self.k, other.k, "partite product needs equal k");
        PartiteTemplate {
            k: self.k,
            sizes: self.sizes.iter().zip(&other.sizes).map(|(a, b)| a * b).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PartiteProbTemplate {
    pub template: PartiteTemplate,
    pub weights: Vec<Vec<Q>>,
}

impl PartiteProbTemplate {
    pub fn new(k: usize, weights: Vec<Vec<Q>>) -> Result<Self, String> {
        let template = PartiteTemplate::new(k, weights.iter().map(|w| w.len()).collect())?;
        let slots = local_slots(k);
        for (a, w) in slots.iter().zip(&weights) {
            check_prob(w, w.len(), &format!("slot {a}"))?;
        }
        Ok(PartiteProbTemplate { template, weights })
    }

    pub fn uniform(k: usize, sizes: &[usize]) -> Self {
        PartiteProbTemplate::new(k, sizes.iter().map(|&n| uniform_vec(n)).collect())
            .expect("uniform weights")
    }

    pub fn k(&self) -> usize {
        self.template.k
    }

    pub fn product(&self, other: &PartiteProbTemplate) -> PartiteProbTemplate {
        PartiteProbTemplate {
            template: self.template.product(&other.template),
            weights: self.weights.iter().zip(&other.weights).map(|(a, b)| tensor(a, b)).collect(),
        }
    }

    pub fn to_json(&self) -> Value {
        let slots = local_slots(self.k());
        let sizes: BTreeMap<String, usize> =
            slots.iter().zip(&self.template.sizes).map(|(a, &n)| (a.to_string(), n)).collect();
        let weights: BTreeMap<String, Vec<String>> = slots
            .iter()
            .zip(&self.weights)
            .map(|(a, w)| (a.to_string(), w.iter().map(|q| q.to_string()).collect()))
            .collect();
        json!({"k": self.k(), "sizes": sizes, "weights": weights})
    }

    pub fn from_json(v: &Value) -> Result<Self, String> {
        let k = v["k"].as_u64().ok_or("template JSON needs integer field k")? as usize;
        let mut weights = Vec::new();
        for a in local_slots(k) {
            let key = a.to_string();
            let n = v["sizes"][&key].as_u64().ok_or(format!("missing size for slot {key}"))? as usize;
            let w = match v.get("weights").and_then(|w| w.get(&key)) {
                Some(Value::Array(items)) => items
                    .iter()
                    .map(|t| t.as_str().ok_or("weights must be strings".to_string()).and_then(parse_q))
                    .collect::<Result<Vec<_>, _>>()?,
                _ => uniform_vec(n),
            };
            if w.len() != n {
                return Err(format!("slot {key}: size {n} but {} weights", w.len()));
            }
            weights.push(w);
        }
        PartiteProbTemplate::new(k, weights)
    }
}

/// `k`-partite version: slot `A` receives the arity-`|A|` space and weights.
pub fn partize_template(mu: &ProbTemplate, k: usize) -> Result<PartiteProbTemplate, String> {
    if k == 0 {
        return Err("k must be positive".into());
    }
    PartiteProbTemplate::new(k, mu.local_weights(k))
}

/// A non-partite configuration point over `[m]`: one coordinate per `A ∈ r(m)` with
/// `|A| ≤ cap`, in canonical order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Config {
    pub m: usize,
    pub cap: usize,
    pub coords: Vec<u32>,
}

impl Config {
    pub fn subsets(&self) -> Vec<Subset> {
        enumerate_subsets(self.m, self.cap)
    }

    /// Checks every coordinate against the template.
    pub fn validate(&self, t: &Template) -> Result<(), String> {
        for (a, &c) in self.subsets().iter().zip(&self.coords) {
            if c as usize >= t.size(a.len()) {
                return Err(format!("coordinate {a} = {c} out of range"));
            }
        }
        Ok(())
    }

    /// Splits a point of `Ω ⊗ Ω'` into its two factors.
    pub fn split(&self, right: &Template) -> (Config, Config) {
        let subsets = self.subsets();
        let (l, r): (Vec<u32>, Vec<u32>) = subsets
            .iter()
            .zip(&self.coords)
            .map(|(a, &c)| {
                let n = right.size(a.len()) as u32;
                (c / n, c % n)
            })
            .unzip();
        (Config { m: self.m, cap: self.cap, coords: l }, Config { m: self.m, cap: self.cap, coords: r })
    }

    pub fn join(left: &Config, right: &Config, right_t: &Template) -> Config {
        let coords = left
            .subsets()
            .iter()
            .zip(left.coords.iter().zip(&right.coords))
            .map(|(a, (&l, &r))| l * right_t.size(a.len()) as u32 + r)
            .collect();
        Config { m: left.m, cap: left.cap, coords }
    }
}

/// A partite configuration point: one coordinate per partite index, ordered by `layout`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartiteConfig {
    pub layout: PartLayout,
    pub coords: Vec<u32>,
}

impl PartialOrd for PartLayout {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PartLayout {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.sizes.cmp(&other.sizes)
    }
}

impl std::hash::Hash for PartLayout {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.sizes.hash(state)
    }
}

impl PartiteConfig {
    /// Slot-size lookup: coordinate `i` lives in the space of its domain.
    pub fn validate(&self, t: &PartiteTemplate) -> Result<(), String> {
        for (i, &c) in self.coords.iter().enumerate() {
            let d = self.layout.domain_of(i);
            if c as usize >= t.sizes[d] {
                return Err(format!("coordinate {i} = {c} out of range"));
            }
        }
        Ok(())
    }

    pub fn split(&self, right: &PartiteTemplate) -> (PartiteConfig, PartiteConfig) {
        let (l, r): (Vec<u32>, Vec<u32>) = self
            .coords
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let n = right.sizes[self.layout.domain_of(i)] as u32;
                (c / n, c % n)
            })
            .unzip();
        (
            PartiteConfig { layout: self.layout.clone(), coords: l },
            PartiteConfig { layout: self.layout.clone(), coords: r },
        )
    }

    pub fn join(left: &PartiteConfig, right: &PartiteConfig, right_t: &PartiteTemplate) -> PartiteConfig {
        let coords = left
            .coords
            .iter()
            .zip(&right.coords)
            .enumerate()
            .map(|(i, (&l, &r))| l * right_t.sizes[left.layout.domain_of(i)] as u32 + r)
            .collect();
        PartiteConfig { layout: left.layout.clone(), coords }
    }
}

/// Splits a local point (one coordinate per slot of `r(k)`) of a product space.
pub fn split_local(x: &[u32], right_sizes: &[usize]) -> (Vec<u32>, Vec<u32>) {
    x.iter().zip(right_sizes).map(|(&c, &n)| (c / n as u32, c % n as u32)).unzip()
}

pub fn join_local(l: &[u32], r: &[u32], right_sizes: &[usize]) -> Vec<u32> {
    l.iter().zip(r).zip(right_sizes).map(|((&a, &b), &n)| a * n as u32 + b).collect()
}

/// Product measure on local points (one slot per `A ∈ r(k)`), the law of `x ~ μ^k` or
/// of a partite `x ~ μ^{[1],…,[1]}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalMeasure {
    pub sizes: Vec<usize>,
    pub weights: Vec<Vec<Q>>,
}

impl LocalMeasure {
    pub fn nonpartite(mu: &ProbTemplate, k: usize) -> Self {
        let weights = mu.local_weights(k);
        LocalMeasure { sizes: weights.iter().map(|w| w.len()).collect(), weights }
    }

    pub fn partite(mu: &PartiteProbTemplate) -> Self {
        LocalMeasure { sizes: mu.template.sizes.clone(), weights: mu.weights.clone() }
    }

    pub fn trivial(k: usize) -> Self {
        let n = local_slots(k).len();
        LocalMeasure { sizes: vec![1; n], weights: vec![vec![Q::one()]; n] }
    }

    pub fn mass(&self, x: &[u32]) -> Q {
        x.iter().zip(&self.weights).map(|(&c, w)| w[c as usize].clone()).product()
    }

    /// Points of positive mass with their masses, in mixed-radix order.
    pub fn atoms(&self) -> Vec<(Vec<u32>, Q)> {
        let mut out = vec![(Vec::new(), Q::one())];
        for w in &self.weights {
            let mut next = Vec::with_capacity(out.len() * w.len());
            for (p, m) in &out {
                for (c, wc) in w.iter().enumerate() {
                    if !wc.is_zero() {
                        let mut p2 = p.clone();
                        p2.push(c as u32);
                        next.push((p2, m * wc));
                    }
                }
            }
            out = next;
        }
        out
    }

    pub fn product(&self, other: &LocalMeasure) -> LocalMeasure {
        LocalMeasure {
            sizes: self.sizes.iter().zip(&other.sizes).map(|(a, b)| a * b).collect(),
            weights: self.weights.iter().zip(&other.weights).map(|(a, b)| tensor(a, b)).collect(),
        }
    }
}
