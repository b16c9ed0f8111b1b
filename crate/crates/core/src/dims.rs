//! Natarajan, VC and VCN_k dimensions, growth functions and their bounds.

use std::collections::HashSet;
use std::fmt;

use crate::hypotheses::{point_count, point_from_index, point_index, HypothesisClass};
use crate::index::{binom, falling, local_slots};
use crate::Setting;

/// Largest class enumerated member by member when no restriction enumerator is present.
pub const MEMBER_CAP: usize = 1 << 16;

/// A finite family of total functions `[domain] -> [labels]`, deduplicated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionFamily {
    pub domain: usize,
    pub labels: usize,
    pub functions: Vec<Vec<u32>>,
}

impl FunctionFamily {
    pub fn new(domain: usize, labels: usize, functions: Vec<Vec<u32>>) -> Result<Self, String> {
        let mut seen = HashSet::new();
        let mut kept = Vec::new();
        for f in functions {
            if f.len() != domain {
                return Err(format!("function of length {} on a domain of size {domain}", f.len()));
            }
            if f.iter().any(|&v| v as usize >= labels) {
                return Err("function value outside the label set".into());
            }
            if seen.insert(f.clone()) {
                kept.push(f);
            }
        }
        Ok(FunctionFamily { domain, labels, functions: kept })
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    /// `𝓕_V`: distinct restrictions to the given points.
    pub fn restrict(&self, set: &[usize]) -> HashSet<Vec<u32>> {
        self.functions.iter().map(|f| set.iter().map(|&a| f[a]).collect()).collect()
    }

    /// Points where at least two values are realized.
    fn active_points(&self) -> Vec<usize> {
        (0..self.domain)
            .filter(|&a| self.functions.iter().any(|f| f[a] != self.functions[0][a]))
            .collect()
    }
}

/// A dimension value, or a lower bound when the search cap was reached.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dim {
    Exact(usize),
    AtLeast(usize),
}

impl Dim {
    pub fn value(self) -> usize {
        match self {
            Dim::Exact(d) | Dim::AtLeast(d) => d,
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, Dim::Exact(_))
    }

    fn max(self, other: Dim) -> Dim {
        match (self, other) {
            (a, b) if a.value() > b.value() => a,
            (a, b) if b.value() > a.value() => b,
            (Dim::AtLeast(d), _) | (_, Dim::AtLeast(d)) => Dim::AtLeast(d),
            (a, _) => a,
        }
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dim::Exact(d) => write!(f, "{d}"),
            Dim::AtLeast(d) => write!(f, ">={d}"),
        }
    }
}

/// Whether `set` is Natarajan-shattered: some pointwise-distinct witnesses `f0, f1` have
/// every mixture realized.
pub fn natarajan_shatters(fam: &FunctionFamily, set: &[usize]) -> bool {
    let d = set.len();
    let proj = fam.restrict(set);
    if d == 0 {
        return !proj.is_empty();
    }
    if d >= 63 || proj.len() < (1usize << d) {
        return false;
    }
    let values: Vec<Vec<u32>> = (0..d)
        .map(|t| {
            let mut v: Vec<u32> = proj.iter().map(|p| p[t]).collect();
            v.sort_unstable();
            v.dedup();
            v
        })
        .collect();
    let mut choice = vec![(0u32, 0u32); d];
    witness_search(&proj, &values, &mut choice, 0)
}

fn witness_search(proj: &HashSet<Vec<u32>>, values: &[Vec<u32>], choice: &mut [(u32, u32)], t: usize) -> bool {
    let d = values.len();
    if t == d {
        let mut g = vec![0u32; d];
        return (0..1u64 << d).all(|mask| {
            for (s, slot) in g.iter_mut().enumerate() {
                *slot = if mask >> s & 1 == 1 { choice[s].1 } else { choice[s].0 };
            }
            proj.contains(&g)
        });
    }
    let vals = &values[t];
    for i in 0..vals.len() {
        for j in i + 1..vals.len() {
            choice[t] = (vals[i], vals[j]);
            if witness_search(proj, values, choice, t + 1) {
                return true;
            }
        }
    }
    false
}

/// Natarajan dimension, searching sets of size at most `cap`.
pub fn natarajan_dim(fam: &FunctionFamily, cap: usize) -> Dim {
    shatter_search(fam, cap, natarajan_shatters)
}

/// VC dimension of a binary family.
pub fn vc_dim(fam: &FunctionFamily, cap: usize) -> Result<Dim, String> {
    if fam.labels != 2 {
        return Err(format!("VC dimension needs binary labels, got {}", fam.labels));
    }
    Ok(shatter_search(fam, cap, vc_shatters))
}

fn vc_shatters(fam: &FunctionFamily, set: &[usize]) -> bool {
    let d = set.len();
    if fam.is_empty() {
        return false;
    }
    d < 63 && fam.restrict(set).len() == 1usize << d
}

fn shatter_search(fam: &FunctionFamily, cap: usize, shatters: fn(&FunctionFamily, &[usize]) -> bool) -> Dim {
    if fam.is_empty() {
        return Dim::Exact(0);
    }
    let active = fam.active_points();
    let mut best = 0;
    let mut capped = false;
    let mut set = Vec::new();
    // shattered sets are closed under subsets, so growing shattered prefixes finds them all
    fn dfs(
        fam: &FunctionFamily,
        active: &[usize],
        start: usize,
        set: &mut Vec<usize>,
        cap: usize,
        best: &mut usize,
        capped: &mut bool,
        shatters: fn(&FunctionFamily, &[usize]) -> bool,
    ) {
        if *capped {
            return;
        }
        for i in start..active.len() {
            if set.len() + 1 > cap || (1usize << (set.len() + 1)) > fam.len() {
                return;
            }
            set.push(active[i]);
            if shatters(fam, set) {
                *best = (*best).max(set.len());
                if set.len() == cap {
                    *capped = true;
                    set.pop();
                    return;
                }
                dfs(fam, active, i + 1, set, cap, best, capped, shatters);
            }
            set.pop();
        }
    }
    dfs(fam, &active, 0, &mut set, cap, &mut best, &mut capped, shatters);
    // a set of size cap is shattered but larger ones were not examined
    let more_possible = capped && cap < active.len() && (1usize << (cap + 1).min(62)) <= fam.len();
    if more_possible {
        Dim::AtLeast(best)
    } else {
        Dim::Exact(best)
    }
}

/// A Natarajan-shattered set of size `d` with its witness pair `(f0, f1)` (values on the set),
/// if one exists.
pub fn natarajan_witness(fam: &FunctionFamily, d: usize) -> Option<(Vec<usize>, Vec<u32>, Vec<u32>)> {
    fn grow(fam: &FunctionFamily, active: &[usize], start: usize, set: &mut Vec<usize>, d: usize) -> bool {
        if set.len() == d {
            return true;
        }
        for i in start..active.len() {
            set.push(active[i]);
            if natarajan_shatters(fam, set) && grow(fam, active, i + 1, set, d) {
                return true;
            }
            set.pop();
        }
        false
    }
    if fam.is_empty() || (d < 63 && (1usize << d) > fam.len()) {
        return None;
    }
    let mut set = Vec::new();
    if !grow(fam, &fam.active_points(), 0, &mut set, d) {
        return None;
    }
    let proj = fam.restrict(&set);
    let values: Vec<Vec<u32>> = (0..d)
        .map(|t| {
            let mut v: Vec<u32> = proj.iter().map(|p| p[t]).collect();
            v.sort_unstable();
            v.dedup();
            v
        })
        .collect();
    let mut choice = vec![(0u32, 0u32); d];
    assert!(witness_search(&proj, &values, &mut choice, 0), "shattered set has a witness pair");
    Some((set, choice.iter().map(|c| c.0).collect(), choice.iter().map(|c| c.1).collect()))
}

/// One slice `𝓗(x)`: the part left free, the fixed local point (free coordinates zero) and
/// the restricted family.
#[derive(Clone, Debug)]
pub struct Slice {
    pub part: usize,
    pub fixed: Vec<u32>,
    pub family: FunctionFamily,
}

/// Slots containing `part` (free in the slice) and their sizes.
fn free_slots(k: usize, part: usize) -> Vec<usize> {
    local_slots(k)
        .iter()
        .enumerate()
        .filter(|(_, a)| a.contains(part as u32))
        .map(|(j, _)| j)
        .collect()
}

/// Parts sliced by VCN_k: only `k` non-partite (the others are equivalent by symmetry),
/// every part in the partite setting.
fn slice_parts(k: usize, setting: Setting) -> Vec<usize> {
    match setting {
        Setting::NonPartite => vec![k],
        Setting::Partite => (1..=k).collect(),
    }
}

/// Every slice family of the class.
pub fn slices(class: &HypothesisClass) -> Result<Vec<Slice>, String> {
    let sizes = &class.sizes;
    let k = class.k;
    let tables: Option<Vec<Vec<u32>>> = if class.restrict.is_none() {
        if class.len() > MEMBER_CAP {
            return Err(format!(
                "class {} has {} members and no restriction enumerator",
                class.name,
                class.len()
            ));
        }
        Some(class.members().iter().map(|h| h.table()).collect())
    } else {
        None
    };
    let mut out = Vec::new();
    for part in slice_parts(k, class.setting) {
        let free = free_slots(k, part);
        let fixed_slots: Vec<usize> = (0..sizes.len()).filter(|j| !free.contains(j)).collect();
        let fixed_sizes: Vec<usize> = fixed_slots.iter().map(|&j| sizes[j]).collect();
        let free_sizes: Vec<usize> = free.iter().map(|&j| sizes[j]).collect();
        let domain = point_count(&free_sizes);
        for fi in 0..point_count(&fixed_sizes) {
            let fv = point_from_index(&fixed_sizes, fi);
            let mut base = vec![0u32; sizes.len()];
            for (&j, &v) in fixed_slots.iter().zip(&fv) {
                base[j] = v;
            }
            let functions = match (&tables, &class.restrict) {
                (_, Some(r)) => r(part, &base),
                (Some(tables), None) => {
                    let idx: Vec<usize> = (0..domain)
                        .map(|di| {
                            let yv = point_from_index(&free_sizes, di);
                            let mut x = base.clone();
                            for (&j, &v) in free.iter().zip(&yv) {
                                x[j] = v;
                            }
                            point_index(sizes, &x)
                        })
                        .collect();
                    tables.iter().map(|t| idx.iter().map(|&i| t[i]).collect()).collect()
                }
                (None, None) => unreachable!(),
            };
            out.push(Slice { part, fixed: base, family: FunctionFamily::new(domain, class.labels, functions)? });
        }
    }
    Ok(out)
}

/// `VCN_k(𝓗)`: supremum of the Natarajan dimension over all slices.
pub fn vcn_k(class: &HypothesisClass, cap: usize) -> Result<Dim, String> {
    let mut best = Dim::Exact(0);
    for s in slices(class)? {
        best = best.max(natarajan_dim(&s.family, cap));
    }
    Ok(best)
}

/// The whole class as a function family over all local points.
pub fn class_family(class: &HypothesisClass) -> Result<FunctionFamily, String> {
    if class.len() > MEMBER_CAP {
        return Err(format!("class {} is too large to tabulate", class.name));
    }
    let n = point_count(&class.sizes);
    FunctionFamily::new(n, class.labels, class.members().iter().map(|h| h.table()).collect())
}

/// Largest number of distinct restrictions of `fam` to an `m`-point subset of its domain
/// (the whole domain when it has fewer than `m` points).
pub fn family_growth(fam: &FunctionFamily, m: usize) -> usize {
    if fam.is_empty() {
        return 0;
    }
    let active = fam.active_points();
    if active.len() <= m {
        // constant points never separate functions
        return fam.restrict(&active).len();
    }
    let mut best = 0;
    let mut set: Vec<usize> = Vec::with_capacity(m);
    fn rec(fam: &FunctionFamily, active: &[usize], start: usize, m: usize, set: &mut Vec<usize>, best: &mut usize) {
        if set.len() == m {
            *best = (*best).max(fam.restrict(set).len());
            return;
        }
        let cap = fam.len().min(1usize << m.min(62));
        for i in start..=active.len() - (m - set.len()) {
            if *best == cap {
                return;
            }
            set.push(active[i]);
            rec(fam, active, i + 1, m, set, best);
            set.pop();
        }
    }
    rec(fam, &active, 0, m, &mut set, &mut best);
    best
}

/// `τ^k_𝓗(m)`: supremum over slices `x` and `m`-point sets `V` of `|{F|_V : F ∈ 𝓗(x)}|`.
pub fn growth_function(class: &HypothesisClass, m: usize) -> Result<usize, String> {
    Ok(slices(class)?.iter().map(|s| family_growth(&s.family, m)).max().unwrap_or(0))
}

/// Both forms of the growth bound: `(m+1)_{min{d,m+1}}·binom(L,2)^d` and `(m+1)^d·binom(L,2)^d`.
pub fn growth_bound(vcn: usize, m: usize, labels: usize) -> (u128, u128) {
    let pairs = binom(labels, 2) as u128;
    let pow = pairs.saturating_pow(vcn as u32);
    let fall = falling(m + 1, vcn.min(m + 1)) as u128;
    let power = ((m + 1) as u128).saturating_pow(vcn as u32);
    (fall.saturating_mul(pow), power.saturating_mul(pow))
}

/// Natarajan's bound `|𝓕_V| ≤ (|V|+1)^{Nat}·binom(L,2)^{Nat}`.
pub fn ssp_bound(v: usize, nat: usize, labels: usize) -> u128 {
    growth_bound(nat, v, labels).1
}
