//! Learners (deterministic and randomized), ERM, sample-size formulas, the derandomization
//! wrapper, uniform-convergence and concentration verifiers, and the higher-order learner.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::families::highorder_family;
use crate::hypotheses::{all_tuples, Hypothesis, HypothesisClass};
use crate::index::{enumerate_injections, injection_rank, Injection, PartLayout};
use crate::losses::{agnostic_total_loss, AgnosticLossFn, Atoms};
use crate::sampler::{Sample, SampleDrawer, Scenario, SeededStream};
use crate::templates::{Config, PartiteConfig};
use crate::{qf, Setting, Q};

pub type RunFn = Arc<dyn Fn(&Sample, &BigUint) -> Hypothesis + Send + Sync>;
pub type RandomnessFn = Arc<dyn Fn(usize) -> BigUint + Send + Sync>;
/// A sample-size function `(ε, δ) -> m`.
pub type SizeFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// A (possibly randomized) learner: `(x, y, b) ↦ H` with `b < R(m)`.
#[derive(Clone)]
pub struct Learner {
    pub name: String,
    pub setting: Setting,
    pub k: usize,
    randomness: RandomnessFn,
    run: RunFn,
}

impl fmt::Debug for Learner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Learner({})", self.name)
    }
}

impl Learner {
    pub fn deterministic(
        name: impl Into<String>,
        setting: Setting,
        k: usize,
        run: impl Fn(&Sample) -> Hypothesis + Send + Sync + 'static,
    ) -> Self {
        Learner {
            name: name.into(),
            setting,
            k,
            randomness: Arc::new(|_| BigUint::one()),
            run: Arc::new(move |s, _| run(s)),
        }
    }

    pub fn randomized(
        name: impl Into<String>,
        setting: Setting,
        k: usize,
        randomness: impl Fn(usize) -> BigUint + Send + Sync + 'static,
        run: impl Fn(&Sample, &BigUint) -> Hypothesis + Send + Sync + 'static,
    ) -> Self {
        Learner { name: name.into(), setting, k, randomness: Arc::new(randomness), run: Arc::new(run) }
    }

    /// `R(m)`.
    pub fn randomness(&self, m: usize) -> BigUint {
        (self.randomness)(m)
    }

    pub fn is_deterministic_at(&self, m: usize) -> bool {
        self.randomness(m).is_one()
    }

    pub fn run(&self, s: &Sample, b: &BigUint) -> Result<Hypothesis, String> {
        if s.setting() != self.setting {
            return Err(format!("{} expects {:?} samples", self.name, self.setting));
        }
        let r = self.randomness(s.m());
        if b >= &r {
            return Err(format!("randomness index {b} out of range [{r}]"));
        }
        Ok((self.run)(s, b))
    }

    /// Runs with `b = 0`.
    pub fn run0(&self, s: &Sample) -> Hypothesis {
        (self.run)(s, &BigUint::zero())
    }

    /// Draws `b` uniformly from `[R(m)]` and runs.
    pub fn run_random<R: rand::Rng>(&self, s: &Sample, rng: &mut R) -> Hypothesis {
        use num_bigint::RandBigInt;
        let r = self.randomness(s.m());
        let b = rng.gen_biguint_below(&r);
        (self.run)(s, &b)
    }
}

/// Index of a class member minimizing the empirical loss on `atoms`: the structured oracle
/// when the class has one and the loss is local, otherwise exhaustive (lowest index on ties).
pub fn erm_index(class: &HypothesisClass, ell: &AgnosticLossFn, atoms: &Atoms) -> usize {
    if let (Some(oracle), Some(local)) = (&class.erm, ell.purely_local()) {
        return oracle(atoms, &local);
    }
    let mut best: Option<(Q, usize)> = None;
    for i in 0..class.len() {
        let l = atoms.loss(ell, &class.get(i));
        if best.as_ref().map_or(true, |(b, _)| &l < b) {
            best = Some((l, i));
        }
    }
    best.expect("non-empty class").1
}

/// Empirical risk minimizer over `class` for `ell` (canonical order choice).
pub fn erm(class: &HypothesisClass, ell: &AgnosticLossFn) -> Learner {
    let (c, e) = (class.clone(), ell.clone());
    Learner::deterministic(format!("erm[{}]", class.name), class.setting, class.k, move |s| {
        let atoms = Atoms::of_sample(s, c.k, &c.sizes, e.labels);
        c.get(erm_index(&c, &e, &atoms))
    })
}

/// `c = √(1 − ln ln 2 / ln 2) + 1/(2√(1 − 1/e))`.
pub fn uc_constant() -> f64 {
    let ln2 = std::f64::consts::LN_2;
    (1.0 - ln2.ln() / ln2).sqrt() + 1.0 / (2.0 * (1.0 - (-1.0f64).exp()).sqrt())
}

fn xlnx_term(coef: f64, arg: f64) -> f64 {
    if coef == 0.0 {
        0.0
    } else {
        coef * arg.ln()
    }
}

/// `B_ℓ = max{1/(2√2·c), ‖ℓ‖∞}`.
pub fn uc_b(sup_norm: f64) -> f64 {
    (1.0 / (2.0 * 2f64.sqrt() * uc_constant())).max(sup_norm)
}

/// `m^UC(ε, δ)` in its exact form.
pub fn m_uc(vcn: usize, k: usize, labels: usize, sup_norm: f64, eps: f64, delta: f64) -> f64 {
    let c = uc_constant();
    let b = uc_b(sup_norm);
    let e = std::f64::consts::E;
    let d = vcn as f64;
    let k4 = (k as f64).powi(4);
    let lead = 4.0 * c * c * k4 * b * b / (delta * delta * eps * eps);
    let inner = xlnx_term(e / (e - 1.0) * d, 8.0 * c * c * k4 * b * b * d / (delta * delta * eps * eps))
        + std::f64::consts::LN_2
        + xlnx_term(d, crate::index::binom(labels, 2) as f64);
    lead * inner + 0.5
}

/// The numeric upper form with the rounded constants `13.918`, `1.582`, `27.836`, `0.694`.
pub fn m_uc_upper(vcn: usize, k: usize, labels: usize, sup_norm: f64, eps: f64, delta: f64) -> f64 {
    let b = uc_b(sup_norm);
    let d = vcn as f64;
    let k4 = (k as f64).powi(4);
    let base = k4 * b * b / (delta * delta * eps * eps);
    13.918 * base * (xlnx_term(1.582 * d, 27.836 * base * d) + 0.694 + xlnx_term(d, crate::index::binom(labels, 2) as f64))
        + 0.5
}

/// `K = k²` non-partite, `k` partite.
pub fn k_factor(k: usize, setting: Setting) -> f64 {
    match setting {
        Setting::NonPartite => (k * k) as f64,
        Setting::Partite => k as f64,
    }
}

/// `2·exp(−ε²m/(2K‖ℓ‖∞²))`.
pub fn concentration_bound(eps: f64, m: usize, k: usize, setting: Setting, sup_norm: f64) -> f64 {
    2.0 * (-(eps * eps) * m as f64 / (2.0 * k_factor(k, setting) * sup_norm * sup_norm)).exp()
}

/// Exact total losses of every class member.
pub fn total_losses(sc: &Scenario, class: &HypothesisClass, ell: &AgnosticLossFn) -> Vec<Q> {
    (0..class.len()).into_par_iter().map(|i| agnostic_total_loss(sc, ell, &class.get(i))).collect()
}

/// Outcome of a uniform-convergence experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct UcReport {
    pub m: usize,
    pub trials: u64,
    /// Fraction of ε-representative samples.
    pub frequency: f64,
    pub std_err: f64,
    /// Trials where the sample was ε/2-representative but ERM exceeded `inf + ε`.
    pub representative_lemma_violations: u64,
}

/// Frequency of `sup_H |L_sample(H) − L_total(H)| ≤ ε` over seeded trials.
#[allow(clippy::too_many_arguments)]
pub fn check_uniform_convergence(
    sc: &Scenario,
    class: &HypothesisClass,
    ell: &AgnosticLossFn,
    totals: &[Q],
    m: usize,
    eps: f64,
    trials: u64,
    seed: u64,
) -> UcReport {
    let totals_f: Vec<f64> = totals.iter().map(qf).collect();
    let inf = totals_f.iter().cloned().fold(f64::INFINITY, f64::min);
    let drawer = SampleDrawer::new(sc, m);
    let members = class.members();
    let outcomes: Vec<(bool, bool)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let s = drawer.draw(&mut SeededStream::new(seed, t).rng());
            let atoms = Atoms::of_sample(&s, class.k, &class.sizes, ell.labels);
            let emp: Vec<f64> = members.iter().map(|h| qf(&atoms.loss(ell, h))).collect();
            let dev = emp.iter().zip(&totals_f).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let half_rep = dev <= eps / 2.0;
            let erm_i = erm_index(class, ell, &atoms);
            let violation = half_rep && totals_f[erm_i] > inf + eps + 1e-12;
            (dev <= eps, violation)
        })
        .collect();
    let hits = outcomes.iter().filter(|o| o.0).count() as f64;
    let p = hits / trials as f64;
    UcReport {
        m,
        trials,
        frequency: p,
        std_err: (p * (1.0 - p) / trials as f64).sqrt(),
        representative_lemma_violations: outcomes.iter().filter(|o| o.1).count() as u64,
    }
}

/// Frequency of `|L_sample(H) − L_total(H)| ≥ ε` for a fixed `H`.
pub fn deviation_frequency(sc: &Scenario, ell: &AgnosticLossFn, h: &Hypothesis, m: usize, eps: f64, trials: u64, seed: u64) -> f64 {
    let total = qf(&agnostic_total_loss(sc, ell, h));
    let drawer = SampleDrawer::new(sc, m);
    let hits: usize = (0..trials)
        .into_par_iter()
        .filter(|&t| {
            let s = drawer.draw(&mut SeededStream::new(seed, t).rng());
            let atoms = Atoms::of_sample(&s, h.k, &h.sizes, ell.labels);
            (qf(&atoms.loss(ell, h)) - total).abs() >= eps
        })
        .count();
    hits as f64 / trials as f64
}

/// Outcome of a PAC success experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct SuccessReport {
    pub m: usize,
    pub trials: u64,
    pub frequency: f64,
    pub std_err: f64,
}

/// Fraction of trials with `L(A(sample, b)) ≤ threshold + ε`, `b` uniform. `threshold` is `0`
/// for the realizable criterion and `inf_H L` for the agnostic one.
#[allow(clippy::too_many_arguments)]
pub fn estimate_pac_success(
    learner: &Learner,
    sc: &Scenario,
    ell: &AgnosticLossFn,
    m: usize,
    eps: f64,
    threshold: f64,
    trials: u64,
    seed: u64,
) -> SuccessReport {
    let drawer = SampleDrawer::new(sc, m);
    let cache: std::sync::Mutex<HashMap<Vec<u32>, f64>> = std::sync::Mutex::new(HashMap::new());
    let hits: usize = (0..trials)
        .into_par_iter()
        .filter(|&t| {
            let mut rng = SeededStream::new(seed, t).rng();
            let s = drawer.draw(&mut rng);
            let h = learner.run_random(&s, &mut rng);
            let table = h.table();
            let cached = cache.lock().unwrap().get(&table).copied();
            let loss = cached.unwrap_or_else(|| {
                let l = qf(&agnostic_total_loss(sc, ell, &h));
                cache.lock().unwrap().insert(table, l);
                l
            });
            loss <= threshold + eps + 1e-12
        })
        .count();
    let p = hits as f64 / trials as f64;
    SuccessReport { m, trials, frequency: p, std_err: (p * (1.0 - p) / trials as f64).sqrt() }
}

/// The sub-sample on vertices (per part, when partite) `start+1 ..= start+len`.
pub fn sub_sample(s: &Sample, start: usize, len: usize, k: usize) -> Sample {
    match s {
        Sample::NonPartite { x, y } => {
            let alpha = Injection::new((start as u32 + 1..=(start + len) as u32).collect()).unwrap();
            let xs = crate::index::pullback(&alpha, x).expect("prefix fits");
            let ys = enumerate_injections(len, k)
                .iter()
                .map(|b| y[injection_rank(x.m, alpha.compose(b).images())])
                .collect();
            Sample::NonPartite { x: xs, y: ys }
        }
        Sample::Partite { x, y } => {
            let layout = PartLayout::uniform(len, k);
            let mut coords = Vec::with_capacity(layout.len());
            for f in layout.enumerate() {
                let vals: Vec<u32> = f.values().iter().map(|v| v + start as u32).collect();
                let d = crate::index::local_slots(k).iter().position(|a| a.members() == f.domain()).unwrap();
                coords.push(x.coords[x.layout.position(d, &vals)]);
            }
            let full = all_tuples(&x.layout.sizes);
            let index: HashMap<&Vec<u32>, usize> = full.iter().enumerate().map(|(i, t)| (t, i)).collect();
            let ys = all_tuples(&vec![len; k])
                .iter()
                .map(|t| {
                    let shifted: Vec<u32> = t.iter().map(|v| v + start as u32).collect();
                    y[index[&shifted]]
                })
                .collect();
            Sample::Partite { x: PartiteConfig { layout, coords }, y: ys }
        }
    }
}

/// `ξ(ε, δ) = min{⌈2/ε⌉^{-1}, ⌈2/δ⌉^{-1}}`.
pub fn xi(eps: f64, delta: f64) -> f64 {
    (1.0 / (2.0 / eps).ceil()).min(1.0 / (2.0 / delta).ceil())
}

/// Parameters of a derandomization.
#[derive(Clone)]
pub struct DerandSpec {
    pub k: usize,
    pub setting: Setting,
    pub sup_norm: f64,
    /// `m^PACr` (or `m^agPACr`) of the randomized learner.
    pub m_rand: SizeFn,
    /// Largest `R(m₁)` enumerated before falling back.
    pub r_cap: u64,
}

impl DerandSpec {
    fn r_of(&self, learner: &Learner, m: usize) -> f64 {
        learner.randomness(m).to_f64().unwrap_or(f64::INFINITY)
    }

    /// `m^PAC` of the derandomized learner.
    pub fn sample_size(&self, learner: &Learner, eps: f64, delta: f64) -> usize {
        let x = xi(eps, delta);
        let big_m = (self.m_rand)(x, x).ceil() as usize;
        let kk = k_factor(self.k, self.setting);
        let r = self.r_of(learner, big_m);
        big_m + (2.0 * kk * self.sup_norm.powi(2) / (x * x) * (2.0 * r / x).ln()).ceil() as usize
    }

    /// The `δ = ε` closed form.
    pub fn sample_size_simple(&self, learner: &Learner, eps: f64) -> usize {
        let c = (2.0 / eps).ceil();
        let big_m = (self.m_rand)(1.0 / c, 1.0 / c).ceil() as usize;
        let kk = k_factor(self.k, self.setting);
        let r = self.r_of(learner, big_m);
        big_m + (2.0 * kk * self.sup_norm.powi(2) * c * c * (2.0 * c * r).ln()).ceil() as usize
    }

    /// `m₁` and the requirement on `m₂` at scale `s`.
    fn split_at(&self, learner: &Learner, s: usize) -> (usize, usize) {
        let e = 1.0 / (2.0 * s as f64);
        let m1 = (self.m_rand)(e, e).ceil() as usize;
        let kk = k_factor(self.k, self.setting);
        let need = (8.0 * kk * self.sup_norm.powi(2) * (s * s) as f64 * (4.0 * s as f64 * self.r_of(learner, m1)).ln())
            .ceil() as usize;
        (m1, need)
    }

    /// `s(m)` by linear scan from 1 (`None` for `−∞`), capped at `10⁶`.
    pub fn s_of_m(&self, learner: &Learner, m: usize) -> Option<usize> {
        let mut last = None;
        for s in 1..=1_000_000 {
            let (m1, need) = self.split_at(learner, s);
            if m1 + need <= m {
                last = Some(s);
            } else if last.is_some() {
                break;
            } else if m1 > m {
                break;
            }
        }
        last
    }

    /// `(m₁(m), m₂(m))` when `s(m) ≠ −∞`.
    pub fn split(&self, learner: &Learner, m: usize) -> Option<(usize, usize)> {
        self.s_of_m(learner, m).map(|s| {
            let (m1, _) = self.split_at(learner, s);
            (m1, m - m1)
        })
    }
}

/// Deterministic learner: run `A` on the first `m₁` points under every `b`, return the output
/// with least empirical loss on the last `m₂` points (smallest `b` on ties). Falls back to
/// `fallback` when `s(m) = −∞` or `R(m₁)` exceeds the cap.
pub fn derandomize(a: &Learner, spec: &DerandSpec, ell: &AgnosticLossFn, fallback: Hypothesis) -> Learner {
    let (a2, spec2, ell2) = (a.clone(), spec.clone(), ell.clone());
    let k = a.k;
    Learner::deterministic(format!("derand[{}]", a.name), a.setting, k, move |s| {
        let Some((m1, m2)) = spec2.split(&a2, s.m()) else { return fallback.clone() };
        let r = a2.randomness(m1);
        let Some(r) = r.to_u64().filter(|&r| r <= spec2.r_cap) else { return fallback.clone() };
        let first = sub_sample(s, 0, m1, k);
        let second = sub_sample(s, m1, m2, k);
        let mut atoms: Option<Atoms> = None;
        let mut best: Option<(Q, Hypothesis)> = None;
        for b in 0..r {
            let h = a2.run(&first, &BigUint::from(b)).expect("b below R(m1)");
            let l = atoms.get_or_insert_with(|| Atoms::of_sample(&second, k, &h.sizes, ell2.labels)).loss(&ell2, &h);
            if best.as_ref().map_or(true, |(bl, _)| &l < bl) {
                best = Some((l, h));
            }
        }
        best.expect("R ≥ 1").1
    })
}

/// `δ'(δ) = 1 − √(1 − δ)`.
pub fn delta_prime(delta: f64) -> f64 {
    1.0 - (1.0 - delta).sqrt()
}

/// `m'(ε, δ)` of the higher-order learner.
pub fn higher_order_m_prime(eps: f64, delta: f64, b_ell: f64) -> f64 {
    let l = (2.0 * b_ell / (eps * delta_prime(delta))).ln();
    (l / (2.0 * b_ell / (2.0 * b_ell - eps)).ln()).sqrt()
}

/// `m^PAC(ε, δ)` of ERM on the higher-order class, `B_ℓ = max{‖ℓ‖∞, 1}`.
pub fn higher_order_m_pac(eps: f64, delta: f64, b_ell: f64) -> f64 {
    let mp = higher_order_m_prime(eps, delta, b_ell);
    let l = (2.0 * b_ell / (delta_prime(delta) * eps)).ln();
    2.0 * b_ell / eps * (mp + l + (2.0 * mp * l + l * l).sqrt())
}

/// The higher-order class on `([1], [n], [n])`, its ERM and its `m^PAC`.
pub fn infvcn_learner(n_max: usize, ell: &AgnosticLossFn) -> (HypothesisClass, Learner, SizeFn) {
    let spec = highorder_family(n_max);
    let learner = erm(&spec.class, ell);
    let b = qf(&ell.sup_norm).max(1.0);
    (spec.class, learner, Arc::new(move |e, d| higher_order_m_pac(e, d, b)))
}

/// A non-partite configuration restricted to its first `m` vertices.
pub fn config_prefix(x: &Config, m: usize) -> Config {
    let alpha = Injection::new((1..=m as u32).collect()).unwrap();
    crate::index::pullback(&alpha, x).expect("prefix fits")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::matching_family;
    use crate::losses::{agnostic_zero_one, OrderChoice};
    use crate::sampler::Measure;
    use crate::templates::ProbTemplate;
    use crate::{q, qi};

    #[test]
    fn uc_constants() {
        let c = uc_constant();
        assert!(c > 1.865 && c < 1.866);
        assert!((1.0 / (2.0 * 2f64.sqrt() * c)) <= 0.380);
        let zero = m_uc(0, 2, 2, 1.0, 0.3, 0.2);
        let expect = 4.0 * c * c * 16.0 / (0.04 * 0.09) * std::f64::consts::LN_2 + 0.5;
        assert!((zero - expect).abs() < 1e-6 * expect);
        for &(d, k, l, e, dl) in &[(1, 2, 2, 0.2, 0.2), (3, 1, 4, 0.1, 0.3), (2, 3, 3, 0.5, 0.5)] {
            let exact = m_uc(d, k, l, 1.0, e, dl);
            let upper = m_uc_upper(d, k, l, 1.0, e, dl);
            assert!(exact <= upper * (1.0 + 1e-9), "{exact} > {upper}");
            assert!(upper <= exact * 1.01);
        }
        let grid = [0.1, 0.2, 0.4, 0.8];
        for w in grid.windows(2) {
            assert!(m_uc(1, 2, 2, 1.0, w[0], 0.3) > m_uc(1, 2, 2, 1.0, w[1], 0.3));
            assert!(m_uc(1, 2, 2, 1.0, 0.3, w[0]) > m_uc(1, 2, 2, 1.0, 0.3, w[1]));
        }
    }

    #[test]
    fn concentration_values() {
        let v = concentration_bound(1.0, 2, 1, Setting::Partite, 1.0);
        assert!((v - 2.0 * (-1.0f64).exp()).abs() < 1e-12);
        let np = concentration_bound(0.5, 8, 2, Setting::NonPartite, 1.0);
        assert!((np - 2.0 * (-0.25 * 8.0 / 8.0f64).exp()).abs() < 1e-12);
        assert_eq!(k_factor(2, Setting::NonPartite), 4.0);
        assert_eq!(k_factor(2, Setting::Partite), 2.0);
    }

    #[test]
    fn xi_and_simple_form() {
        assert!((xi(0.5, 0.3) - 1.0 / 7.0).abs() < 1e-12);
        let l = Learner::randomized("r", Setting::NonPartite, 2, |_| BigUint::from(4u32), |_, _| unreachable!());
        let spec = DerandSpec {
            k: 2,
            setting: Setting::NonPartite,
            sup_norm: 1.0,
            m_rand: Arc::new(|e, d| 4.0 / e * (4.0 / d).ln()),
            r_cap: 1 << 20,
        };
        for &e in &[0.05, 0.1, 0.25, 0.5, 0.9] {
            assert_eq!(spec.sample_size(&l, e, e), spec.sample_size_simple(&l, e));
        }
        assert_eq!(spec.sample_size(&l, 0.5, 0.5), 489);
        assert_eq!(spec.s_of_m(&l, 489), Some(2));
        assert_eq!(spec.split(&l, 489), Some((45, 444)));
        assert_eq!(spec.s_of_m(&l, 10), None);
    }

    fn matching_scenario(n: usize, mask: usize) -> (Scenario, HypothesisClass) {
        let spec = matching_family(n);
        let f = spec.class.get(mask);
        (Scenario::new(2, spec.measure.clone(), None, f).unwrap(), spec.class)
    }

    #[test]
    fn erm_examples() {
        let (sc, class) = matching_scenario(3, 0b101);
        let ell = agnostic_zero_one(2, 2, Setting::NonPartite, class.sizes.clone());
        let l = erm(&class, &ell);
        let drawer = SampleDrawer::new(&sc, 6);
        for t in 0..10 {
            let s = drawer.draw(&mut SeededStream::new(5, t).rng());
            let h = l.run0(&s);
            let atoms = Atoms::of_sample(&s, 2, &class.sizes, 2);
            assert_eq!(atoms.loss(&ell, &h), qi(0));
            for g in class.members() {
                assert!(atoms.loss(&ell, &h) <= atoms.loss(&ell, &g));
            }
        }
        // singleton class
        let single = HypothesisClass::explicit("one", vec![class.get(3)]).unwrap();
        let s = drawer.draw(&mut SeededStream::new(5, 99).rng());
        assert!(erm(&single, &ell).run0(&s).same_function(&class.get(3)));
    }

    #[test]
    fn erm_crafted_three_member_class() {
        // k = 1 on 3 points; sample x = (0, 1, 2) with labels (1, 1, 0)
        let mk = |t: Vec<u32>| Hypothesis::from_table("h", 1, Setting::NonPartite, vec![3], 2, t);
        let class = HypothesisClass::explicit("c", vec![mk(vec![0, 0, 0]), mk(vec![1, 0, 0]), mk(vec![1, 1, 1])]).unwrap();
        let ell = agnostic_zero_one(2, 1, Setting::NonPartite, vec![3]);
        let s = Sample::NonPartite { x: Config { m: 3, cap: 1, coords: vec![0, 1, 2] }, y: vec![1, 1, 0] };
        // losses: 2/3, 1/3, 1/3 → lowest index among minimizers is 1
        let atoms = Atoms::nonpartite(&Config { m: 3, cap: 1, coords: vec![0, 1, 2] }, &[1, 1, 0], 1, &OrderChoice::canonical(3, 1), &[3], 2);
        assert_eq!(atoms.loss(&ell, &class.get(0)), q(2, 3));
        assert_eq!(erm_index(&class, &ell, &atoms), 1);
        assert!(erm(&class, &ell).run0(&s).same_function(&class.get(1)));
    }

    #[test]
    fn sub_samples_match_pullbacks() {
        let (sc, _) = matching_scenario(2, 0b11);
        let s = SampleDrawer::new(&sc, 5).draw(&mut SeededStream::new(1, 1).rng());
        let Sample::NonPartite { x, .. } = &s else { unreachable!() };
        let tail = sub_sample(&s, 2, 3, 2);
        let alpha = Injection::new(vec![3, 4, 5]).unwrap();
        let xt = crate::index::pullback(&alpha, x).unwrap();
        assert_eq!(tail, Sample::NonPartite { y: sc.f.star(&xt), x: xt });
        let ps = Scenario::new(
            2,
            Measure::Partite(crate::templates::PartiteProbTemplate::uniform(2, &[2, 3, 2])),
            None,
            Hypothesis::new("f", 2, Setting::Partite, vec![2, 3, 2], 2, 2, |x| (x[0] + x[1] + x[2]) % 2),
        )
        .unwrap();
        let s = SampleDrawer::new(&ps, 4).draw(&mut SeededStream::new(1, 2).rng());
        let t = sub_sample(&s, 1, 2, 2);
        let Sample::Partite { x, y } = &t else { unreachable!() };
        assert_eq!(&ps.f.star_partite(x), y);
    }

    #[test]
    fn derandomized_learner_is_deterministic_and_reduces_to_prefix() {
        let (sc, class) = matching_scenario(2, 0b01);
        let ell = agnostic_zero_one(2, 2, Setting::NonPartite, class.sizes.clone());
        let base = erm(&class, &ell);
        let spec = DerandSpec {
            k: 2,
            setting: Setting::NonPartite,
            sup_norm: 1.0,
            m_rand: Arc::new(|e, d| 1.0 / e * (1.0 / d).ln().max(1.0)),
            r_cap: 1 << 20,
        };
        let d = derandomize(&base, &spec, &ell, class.get(0));
        let m = spec.sample_size(&base, 0.5, 0.5);
        let (m1, _) = spec.split(&base, m).unwrap();
        for t in 0..3 {
            let s = SampleDrawer::new(&sc, m).draw(&mut SeededStream::new(8, t).rng());
            let h1 = d.run0(&s);
            assert!(h1.same_function(&d.run0(&s)));
            assert!(h1.same_function(&base.run0(&sub_sample(&s, 0, m1, 2))));
        }
    }

    #[test]
    fn higher_order_formulas() {
        assert!((delta_prime(0.36) - 0.2).abs() < 1e-12);
        let m = higher_order_m_pac(0.2, 0.2, 1.0);
        assert!(m > 150.0 && m < 250.0, "{m}");
        let ell = agnostic_zero_one(2, 2, Setting::Partite, vec![1, 4, 4]);
        let (class, _, mp) = infvcn_learner(4, &ell);
        assert_eq!(class.len(), 16);
        assert_eq!(mp(0.2, 0.2), m);
    }

    #[test]
    fn uc_trivial_cases() {
        let mu = ProbTemplate::new(vec![vec![qi(1), qi(0)], vec![qi(1)]]).unwrap();
        let f = Hypothesis::constant(2, Setting::NonPartite, vec![2, 2, 1], 2, 0);
        let sc = Scenario::new(2, Measure::NonPartite(mu), None, f.clone()).unwrap();
        let class = HypothesisClass::explicit("one", vec![f]).unwrap();
        let ell = agnostic_zero_one(2, 2, Setting::NonPartite, class.sizes.clone());
        let totals = total_losses(&sc, &class, &ell);
        let r = check_uniform_convergence(&sc, &class, &ell, &totals, 4, 0.01, 50, 1);
        assert_eq!(r.frequency, 1.0);
    }
}
