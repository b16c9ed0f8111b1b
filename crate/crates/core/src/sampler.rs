//! Exchangeable labeled samples drawn from `(μ, μ', F)` representations, seeded streams,
//! and exact sample laws for tiny instances.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::hypotheses::{Hypothesis, point_count};
use crate::index::{enumerate_subsets, subset_count, PartLayout, PullbackCache};
use crate::templates::{
    join_local, Config, LocalMeasure, PartiteConfig, PartiteProbTemplate, ProbTemplate,
};
use crate::{qf, Setting, Q};

/// Deterministic random stream for trial `trial` of master seed `seed`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SeededStream {
    pub seed: u64,
    pub trial: u64,
}

impl SeededStream {
    pub fn new(seed: u64, trial: u64) -> Self {
        SeededStream { seed, trial }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(self.trial);
        r
    }
}

/// A measure over a non-partite template or a partite one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Measure {
    NonPartite(ProbTemplate),
    Partite(PartiteProbTemplate),
}

impl Measure {
    pub fn local(&self, k: usize) -> LocalMeasure {
        match self {
            Measure::NonPartite(mu) => LocalMeasure::nonpartite(mu, k),
            Measure::Partite(mu) => LocalMeasure::partite(mu),
        }
    }

    pub fn setting(&self) -> Setting {
        match self {
            Measure::NonPartite(_) => Setting::NonPartite,
            Measure::Partite(_) => Setting::Partite,
        }
    }
}

/// Precomputed samplers for every arity / slot weight vector.
#[derive(Clone, Debug)]
pub struct WeightSampler {
    dists: Vec<Option<WeightedIndex<f64>>>,
}

impl WeightSampler {
    pub fn new(weights: &[Vec<Q>]) -> Self {
        let dists = weights
            .iter()
            .map(|w| {
                if w.len() == 1 {
                    None
                } else {
                    Some(WeightedIndex::new(w.iter().map(qf)).expect("valid weights"))
                }
            })
            .collect();
        WeightSampler { dists }
    }

    pub fn draw<R: Rng>(&self, slot: usize, rng: &mut R) -> u32 {
        match self.dists.get(slot) {
            Some(Some(d)) => d.sample(rng) as u32,
            _ => 0,
        }
    }
}

/// One independent draw per `A ∈ r(m)` with `|A| ≤ cap` from `μ_{|A|}`.
pub fn sample_config<R: Rng>(mu: &ProbTemplate, m: usize, cap: usize, rng: &mut R) -> Config {
    let ws = WeightSampler::new(&mu.padded(cap).weights);
    sample_config_with(&ws, m, cap, rng)
}

pub fn sample_config_with<R: Rng>(ws: &WeightSampler, m: usize, cap: usize, rng: &mut R) -> Config {
    let mut coords = Vec::with_capacity(subset_count(m, cap));
    for s in 1..=cap.min(m) {
        let n = crate::index::binom(m, s) as usize;
        for _ in 0..n {
            coords.push(ws.draw(s - 1, rng));
        }
    }
    Config { m, cap, coords }
}

/// One independent draw per partite index, with `sizes[i]` vertices in part `i+1`.
pub fn sample_partite_config<R: Rng>(
    mu: &PartiteProbTemplate,
    sizes: &[usize],
    rng: &mut R,
) -> PartiteConfig {
    let ws = WeightSampler::new(&mu.weights);
    sample_partite_config_with(&ws, sizes, rng)
}

pub fn sample_partite_config_with<R: Rng>(ws: &WeightSampler, sizes: &[usize], rng: &mut R) -> PartiteConfig {
    let layout = PartLayout::new(sizes);
    let coords = (0..layout.len()).map(|i| ws.draw(layout.domain_of(i), rng)).collect();
    PartiteConfig { layout, coords }
}

/// An adversary `(μ, μ', F)`; `F` lives on local points of `Ω ⊗ Ω'` (or `Ω` when `μ'` is
/// absent).
#[derive(Clone, Debug)]
pub struct Scenario {
    pub k: usize,
    pub mu: Measure,
    pub mu_prime: Option<Measure>,
    pub f: Hypothesis,
}

impl Scenario {
    pub fn new(k: usize, mu: Measure, mu_prime: Option<Measure>, f: Hypothesis) -> Result<Self, String> {
        let sc = Scenario { k, mu, mu_prime, f };
        if let Some(mp) = &sc.mu_prime {
            if mp.setting() != sc.mu.setting() {
                return Err("μ and μ' must share the setting".into());
            }
        }
        if sc.f.setting != sc.setting() || sc.f.k != k {
            return Err("F must share k and setting with the measures".into());
        }
        let want = sc.x_measure().product(&sc.xp_measure()).sizes;
        if sc.f.sizes != want {
            return Err(format!("F expects slot sizes {:?}, product space has {:?}", sc.f.sizes, want));
        }
        Ok(sc)
    }

    pub fn setting(&self) -> Setting {
        self.mu.setting()
    }

    pub fn labels(&self) -> usize {
        self.f.labels
    }

    pub fn x_measure(&self) -> LocalMeasure {
        self.mu.local(self.k)
    }

    pub fn xp_measure(&self) -> LocalMeasure {
        match &self.mu_prime {
            Some(mp) => mp.local(self.k),
            None => LocalMeasure::trivial(self.k),
        }
    }

    /// Slot sizes of the visible local points.
    pub fn visible_sizes(&self) -> Vec<usize> {
        self.x_measure().sizes
    }

    pub fn hidden_sizes(&self) -> Vec<usize> {
        self.xp_measure().sizes
    }

    /// `F` evaluated at the joined local point `(x, x')`.
    pub fn f_at(&self, x: &[u32], xp: &[u32]) -> u32 {
        self.f.eval(&join_local(x, xp, &self.hidden_sizes()))
    }

    pub fn f_pattern_at(&self, x: &[u32], xp: &[u32]) -> Vec<u32> {
        self.f.pattern(&join_local(x, xp, &self.hidden_sizes()))
    }
}

/// A visible labeled sample.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sample {
    /// Point over `[m]` and labels indexed by injections `[k] -> [m]` (lex order).
    NonPartite { x: Config, y: Vec<u32> },
    /// Point over `([m_1],…,[m_k])` and labels indexed by `∏[m_i]` (lex order).
    Partite { x: PartiteConfig, y: Vec<u32> },
}

impl Sample {
    pub fn setting(&self) -> Setting {
        match self {
            Sample::NonPartite { .. } => Setting::NonPartite,
            Sample::Partite { .. } => Setting::Partite,
        }
    }

    /// Number of vertices (non-partite) or vertices per part (partite, first part).
    pub fn m(&self) -> usize {
        match self {
            Sample::NonPartite { x, .. } => x.m,
            Sample::Partite { x, .. } => x.layout.sizes.first().copied().unwrap_or(0),
        }
    }

    pub fn labels(&self) -> &[u32] {
        match self {
            Sample::NonPartite { y, .. } | Sample::Partite { y, .. } => y,
        }
    }
}

/// Reusable per-`m` machinery for drawing many samples of one scenario.
pub struct SampleDrawer<'a> {
    pub sc: &'a Scenario,
    pub m: usize,
    ws: WeightSampler,
    wsp: WeightSampler,
    cache: Option<PullbackCache>,
}

impl<'a> SampleDrawer<'a> {
    pub fn new(sc: &'a Scenario, m: usize) -> Self {
        let (ws, wsp) = match sc.setting() {
            Setting::NonPartite => {
                let by_arity = |meas: &Option<&Measure>| -> Vec<Vec<Q>> {
                    match meas {
                        Some(Measure::NonPartite(mu)) => mu.padded(sc.k).weights,
                        _ => vec![vec![Q::one()]; sc.k],
                    }
                };
                (
                    WeightSampler::new(&by_arity(&Some(&sc.mu))),
                    WeightSampler::new(&by_arity(&sc.mu_prime.as_ref())),
                )
            }
            Setting::Partite => (
                WeightSampler::new(&sc.x_measure().weights),
                WeightSampler::new(&sc.xp_measure().weights),
            ),
        };
        let cache = (sc.setting() == Setting::NonPartite && m >= sc.k).then(|| PullbackCache::new(m, sc.k));
        SampleDrawer { sc, m, ws, wsp, cache }
    }

    /// Draws `(x, x')` and returns the visible `(x, F*_m(x, x'))`.
    pub fn draw<R: Rng>(&self, rng: &mut R) -> Sample {
        let sc = self.sc;
        match sc.setting() {
            Setting::NonPartite => {
                let x = sample_config_with(&self.ws, self.m, sc.k, rng);
                let xp = sample_config_with(&self.wsp, self.m, sc.k, rng);
                let right = crate::templates::Template::new(
                    (1..=sc.k).map(|i| hidden_arity_size(sc, i)).collect(),
                )
                .expect("sizes");
                let joined = Config::join(&x, &xp, &right);
                let y = match &self.cache {
                    Some(c) => sc.f.star_cached(&joined, c),
                    None => Vec::new(),
                };
                Sample::NonPartite { x, y }
            }
            Setting::Partite => {
                let sizes = vec![self.m; sc.k];
                let x = sample_partite_config_with(&self.ws, &sizes, rng);
                let xp = sample_partite_config_with(&self.wsp, &sizes, rng);
                let hidden =
                    crate::templates::PartiteTemplate::new(sc.k, sc.hidden_sizes()).expect("sizes");
                let joined = PartiteConfig::join(&x, &xp, &hidden);
                let y = sc.f.star_partite(&joined);
                Sample::Partite { x, y }
            }
        }
    }
}

fn hidden_arity_size(sc: &Scenario, arity: usize) -> usize {
    match &sc.mu_prime {
        Some(Measure::NonPartite(mu)) => mu.template.size(arity),
        _ => 1,
    }
}

/// `(x, F*_m(x, x'))` with `(x, x') ~ (μ ⊗ μ')^m`; `x'` stays hidden.
pub fn labeled_sample<R: Rng>(sc: &Scenario, m: usize, rng: &mut R) -> Result<Sample, String> {
    if sc.setting() == Setting::NonPartite && m < sc.k {
        return Err(format!("need m ≥ k = {}", sc.k));
    }
    Ok(SampleDrawer::new(sc, m).draw(rng))
}

/// Maximum number of joint `(x, x')` configurations for exact enumeration.
pub const EXACT_CAP: u128 = 1_000_000;

/// Exact law of the visible sample `(x, F*_m(x, x'))` as rational masses.
pub fn exact_sample_law(sc: &Scenario, m: usize) -> Result<BTreeMap<Sample, Q>, String> {
    let (x_weights, xp_weights, shape): (Vec<Vec<Q>>, Vec<Vec<Q>>, Shape) = match sc.setting() {
        Setting::NonPartite => {
            if m < sc.k {
                return Err(format!("need m ≥ k = {}", sc.k));
            }
            let subsets = enumerate_subsets(m, sc.k);
            let mu = match &sc.mu {
                Measure::NonPartite(mu) => mu.padded(sc.k),
                _ => unreachable!(),
            };
            let mup = match &sc.mu_prime {
                Some(Measure::NonPartite(mu)) => mu.padded(sc.k),
                _ => ProbTemplate::uniform(&vec![1; sc.k]),
            };
            (
                subsets.iter().map(|a| mu.weights[a.len() - 1].clone()).collect(),
                subsets.iter().map(|a| mup.weights[a.len() - 1].clone()).collect(),
                Shape::NonPartite(m),
            )
        }
        Setting::Partite => {
            let layout = PartLayout::uniform(m, sc.k);
            let xm = sc.x_measure();
            let xpm = sc.xp_measure();
            (
                (0..layout.len()).map(|i| xm.weights[layout.domain_of(i)].clone()).collect(),
                (0..layout.len()).map(|i| xpm.weights[layout.domain_of(i)].clone()).collect(),
                Shape::Partite(layout),
            )
        }
    };
    let count = x_weights.iter().chain(&xp_weights).fold(1u128, |acc, w| {
        acc.saturating_mul(w.iter().filter(|p| !p.is_zero()).count() as u128)
    });
    if count > EXACT_CAP {
        return Err(format!("{count} joint configurations exceed the exact cap"));
    }
    let xs = LocalMeasure { sizes: x_weights.iter().map(|w| w.len()).collect(), weights: x_weights }.atoms();
    let xps = LocalMeasure { sizes: xp_weights.iter().map(|w| w.len()).collect(), weights: xp_weights }.atoms();
    let mut law: BTreeMap<Sample, Q> = BTreeMap::new();
    for (x, px) in &xs {
        for (xp, pxp) in &xps {
            let s = shape.labeled(sc, x, xp);
            *law.entry(s).or_insert_with(Q::zero) += px * pxp;
        }
    }
    Ok(law)
}

enum Shape {
    NonPartite(usize),
    Partite(PartLayout),
}

impl Shape {
    fn labeled(&self, sc: &Scenario, x: &[u32], xp: &[u32]) -> Sample {
        match self {
            Shape::NonPartite(m) => {
                let right = crate::templates::Template::new(
                    (1..=sc.k).map(|i| hidden_arity_size(sc, i)).collect(),
                )
                .expect("sizes");
                let xc = Config { m: *m, cap: sc.k, coords: x.to_vec() };
                let xpc = Config { m: *m, cap: sc.k, coords: xp.to_vec() };
                let y = sc.f.star(&Config::join(&xc, &xpc, &right));
                Sample::NonPartite { x: xc, y }
            }
            Shape::Partite(layout) => {
                let hidden = crate::templates::PartiteTemplate::new(sc.k, sc.hidden_sizes()).expect("sizes");
                let xc = PartiteConfig { layout: layout.clone(), coords: x.to_vec() };
                let xpc = PartiteConfig { layout: layout.clone(), coords: xp.to_vec() };
                let y = sc.f.star_partite(&PartiteConfig::join(&xc, &xpc, &hidden));
                Sample::Partite { x: xc, y }
            }
        }
    }
}

/// Number of local points of the scenario's visible space.
pub fn visible_point_count(sc: &Scenario) -> usize {
    point_count(&sc.visible_sizes())
}

/// Seeded random weights: integers in `1..=5`, normalized.
pub fn random_weights<R: Rng>(rng: &mut R, n: usize) -> Vec<Q> {
    let raw: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=5)).collect();
    let total: i64 = raw.iter().sum();
    raw.iter().map(|&r| crate::q(r, total)).collect()
}

/// A seeded random agnostic scenario: random `μ` over `visible` and `μ'` over `hidden`
/// (sizes per arity when non-partite, per slot when partite) and a uniformly random `F` on
/// the product space.
pub fn random_agnostic_scenario(k: usize, setting: Setting, visible: &[usize], hidden: &[usize], labels: usize, seed: u64) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut measure = |sizes: &[usize]| -> Measure {
        let w: Vec<Vec<Q>> = sizes.iter().map(|&n| random_weights(&mut rng, n)).collect();
        match setting {
            Setting::NonPartite => Measure::NonPartite(ProbTemplate::new(w).expect("normalized")),
            Setting::Partite => Measure::Partite(PartiteProbTemplate::new(k, w).expect("normalized")),
        }
    };
    let (mu, mup) = (measure(visible), measure(hidden));
    let sizes = mu.local(k).product(&mup.local(k)).sizes;
    let table: Vec<u32> = (0..point_count(&sizes)).map(|_| rng.gen_range(0..labels as u32)).collect();
    let f = Hypothesis::from_table("F", k, setting, sizes, labels, table);
    Scenario::new(k, mu, Some(mup), f).expect("consistent shapes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::{enumerate_injections, pullback, Injection};
    use crate::q;

    fn np_scenario(with_hidden: bool) -> Scenario {
        let mu = ProbTemplate::new(vec![vec![q(1, 3), q(2, 3)], vec![q(1, 2), q(1, 2)]]).unwrap();
        let mup = ProbTemplate::new(vec![vec![q(1, 4), q(3, 4)], vec![q(1, 1)]]).unwrap();
        let sizes = if with_hidden { vec![4, 4, 2] } else { vec![2, 2, 2] };
        let f = Hypothesis::new("f", 2, Setting::NonPartite, sizes, 2, 2, move |x| {
            ((x[0] + 2 * x[1] + x[2]) % 3 == 0) as u32
        });
        Scenario::new(
            2,
            Measure::NonPartite(mu),
            with_hidden.then(|| Measure::NonPartite(mup)),
            f,
        )
        .unwrap()
    }

    #[test]
    fn deterministic_measure_gives_unique_point() {
        let mu = ProbTemplate::new(vec![vec![q(0, 1), q(1, 1)], vec![q(1, 1)]]).unwrap();
        let mut rng = SeededStream::new(1, 0).rng();
        let x = sample_config(&mu, 4, 2, &mut rng);
        assert!(x.coords[..4].iter().all(|&c| c == 1));
        assert!(x.coords[4..].iter().all(|&c| c == 0));
    }

    #[test]
    fn streams_are_reproducible() {
        let sc = np_scenario(true);
        let a = labeled_sample(&sc, 4, &mut SeededStream::new(9, 3).rng()).unwrap();
        let b = labeled_sample(&sc, 4, &mut SeededStream::new(9, 3).rng()).unwrap();
        let c = labeled_sample(&sc, 4, &mut SeededStream::new(9, 4).rng()).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn unary_marginal_within_three_sigma() {
        let mu = ProbTemplate::new(vec![vec![q(1, 5), q(4, 5)]]).unwrap();
        let mut rng = SeededStream::new(5, 0).rng();
        let n = 10_000;
        let hits = (0..n).filter(|_| sample_config(&mu, 2, 1, &mut rng).coords[0] == 0).count();
        let p = 0.2;
        let sd = (p * (1.0 - p) / n as f64).sqrt();
        assert!((hits as f64 / n as f64 - p).abs() < 3.0 * sd);
    }

    #[test]
    fn coordinates_independent_chi_square() {
        let mu = ProbTemplate::new(vec![vec![q(1, 3), q(2, 3)]]).unwrap();
        let mut rng = SeededStream::new(6, 0).rng();
        let n = 10_000;
        let mut counts = [[0f64; 2]; 2];
        for _ in 0..n {
            let x = sample_config(&mu, 2, 1, &mut rng);
            counts[x.coords[0] as usize][x.coords[1] as usize] += 1.0;
        }
        let p = [1.0 / 3.0, 2.0 / 3.0];
        let chi: f64 = (0..2)
            .flat_map(|a| (0..2).map(move |b| (a, b)))
            .map(|(a, b)| {
                let e = n as f64 * p[a] * p[b];
                (counts[a][b] - e).powi(2) / e
            })
            .sum();
        // 3 degrees of freedom, 0.999 quantile
        assert!(chi < 16.27, "chi-square {chi}");
    }

    #[test]
    fn trivial_hidden_labels_are_star() {
        let sc = np_scenario(false);
        let s = labeled_sample(&sc, 3, &mut SeededStream::new(2, 0).rng()).unwrap();
        if let Sample::NonPartite { x, y } = s {
            assert_eq!(y, sc.f.star(&x));
        } else {
            panic!()
        }
    }

    #[test]
    fn exact_law_is_normalized_and_exchangeable() {
        let sc = np_scenario(true);
        let law = exact_sample_law(&sc, 2).unwrap();
        let total: Q = law.values().sum();
        assert!(total.is_one());
        // exchangeability under the swap of [2]
        let swap = Injection::new(vec![2, 1]).unwrap();
        let injs = enumerate_injections(2, 2);
        for (s, p) in &law {
            if let Sample::NonPartite { x, y } = s {
                let sx = pullback(&swap, x).unwrap();
                let sy: Vec<u32> = injs
                    .iter()
                    .map(|a| y[injs.iter().position(|b| *b == swap.compose(a)).unwrap()])
                    .collect();
                let other = Sample::NonPartite { x: sx, y: sy };
                assert_eq!(law.get(&other), Some(p));
            }
        }
        let dirac = ProbTemplate::new(vec![vec![q(1, 1)]]).unwrap();
        let f = Hypothesis::constant(1, Setting::NonPartite, vec![1], 2, 1);
        let sc = Scenario::new(1, Measure::NonPartite(dirac), None, f).unwrap();
        assert_eq!(exact_sample_law(&sc, 3).unwrap().len(), 1);
    }

    #[test]
    fn locality_k1_exact() {
        // k = 1, m = 2: the two vertices' (coordinate, label) pairs are independent
        let mu = ProbTemplate::new(vec![vec![q(1, 3), q(2, 3)]]).unwrap();
        let mup = ProbTemplate::new(vec![vec![q(1, 2), q(1, 4), q(1, 4)]]).unwrap();
        let f = Hypothesis::new("f", 1, Setting::NonPartite, vec![6], 2, 1, |x| (x[0] % 4 == 1) as u32);
        let sc = Scenario::new(1, Measure::NonPartite(mu), Some(Measure::NonPartite(mup)), f).unwrap();
        let law = exact_sample_law(&sc, 2).unwrap();
        let mut m1: BTreeMap<(u32, u32), Q> = BTreeMap::new();
        let mut m2: BTreeMap<(u32, u32), Q> = BTreeMap::new();
        for (s, p) in &law {
            if let Sample::NonPartite { x, y } = s {
                *m1.entry((x.coords[0], y[0])).or_insert_with(Q::zero) += p;
                *m2.entry((x.coords[1], y[1])).or_insert_with(Q::zero) += p;
            }
        }
        for (s, p) in &law {
            if let Sample::NonPartite { x, y } = s {
                assert_eq!(*p, &m1[&(x.coords[0], y[0])] * &m2[&(x.coords[1], y[1])]);
            }
        }
    }

    #[test]
    fn exact_law_matches_frequencies() {
        let sc = np_scenario(true);
        let law = exact_sample_law(&sc, 2).unwrap();
        let n = 20_000;
        let drawer = SampleDrawer::new(&sc, 2);
        let mut rng = SeededStream::new(3, 0).rng();
        let mut counts: BTreeMap<Sample, usize> = BTreeMap::new();
        for _ in 0..n {
            *counts.entry(drawer.draw(&mut rng)).or_default() += 1;
        }
        for (s, p) in &law {
            let p = qf(p);
            let f = *counts.get(s).unwrap_or(&0) as f64 / n as f64;
            let sd = (p * (1.0 - p) / n as f64).sqrt().max(1e-4);
            assert!((f - p).abs() <= 4.0 * sd, "{f} vs {p}");
        }
    }

    #[test]
    fn partite_exact_law_small() {
        let mu = PartiteProbTemplate::new(2, vec![vec![q(1, 2), q(1, 2)], vec![q(1, 1)], vec![q(1, 3), q(2, 3)]]).unwrap();
        let f = Hypothesis::new("f", 2, Setting::Partite, vec![2, 1, 2], 2, 2, |x| x[0] ^ x[2]);
        let sc = Scenario::new(2, Measure::Partite(mu), None, f).unwrap();
        let law = exact_sample_law(&sc, 1).unwrap();
        let total: Q = law.values().sum();
        assert!(total.is_one());
        assert_eq!(law.len(), 4);
    }
}
