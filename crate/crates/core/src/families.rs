//! Built-in hypothesis families with structured ERM oracles and known dimension values.
//!
//! Graph families are non-partite with `k = 2`, vertex coordinates on `{1}`, `{2}` and a
//! singleton space on `{1,2}`, so every member has rank at most 1.

use std::sync::Arc;

use serde_json::Value;

use crate::dims::{vcn_k, Dim};
use crate::hypotheses::{ErmOracle, Hypothesis, HypothesisClass, RestrictFn};
use crate::index::factorial;
use crate::hypotheses::permute_local;
use crate::losses::{Atoms, LocalLoss};
use crate::sampler::Measure;
use crate::templates::{PartiteProbTemplate, ProbTemplate};
use crate::{Setting, Q};

/// A built-in family: its class, a default measure and known dimension values.
#[derive(Clone, Debug)]
pub struct FamilySpec {
    pub name: String,
    pub truncation: String,
    pub class: HypothesisClass,
    pub measure: Measure,
    /// VCN_k at the given truncation.
    pub vcn: usize,
    /// VCN_k of the untruncated family, when it differs (`None` means infinite).
    pub vcn_limit: Option<Option<usize>>,
    /// VC dimension of the whole class at the truncation, when recorded.
    pub vc: Option<usize>,
    pub rank: usize,
    /// Partition data of partition families.
    pub partition: Option<PartitionData>,
}

impl FamilySpec {
    /// Recomputes VCN_k and compares it with the recorded value.
    pub fn verify(&self, cap: usize) -> Result<Dim, String> {
        let d = vcn_k(&self.class, cap)?;
        match d {
            Dim::Exact(v) if v == self.vcn => Ok(d),
            Dim::AtLeast(v) if v <= self.vcn && cap <= self.vcn => Ok(d),
            _ => Err(format!("{}: recorded VCN {} but computed {d}", self.name, self.vcn)),
        }
    }
}

fn graph_sizes(n: usize) -> Vec<usize> {
    vec![n, n, 1]
}

fn uniform_vertices(n: usize) -> Measure {
    Measure::NonPartite(ProbTemplate::uniform(&[n, 1]))
}

/// Per-decision ERM for classes indexed by bitmasks of independent binary decisions.
///
/// `decision(x)` names the decision that controls the label at `x` (`None` when every
/// member agrees there); `eval(x, on)` is the label when that decision is `on`. Ties keep the
/// decision off. This is an exact ERM whenever every pattern entry at `x` is governed by the
/// same decision, which holds for all families below.
pub fn decision_erm<D, E>(k: usize, setting: Setting, decisions: usize, decision: D, eval: E) -> ErmOracle
where
    D: Fn(&[u32]) -> Option<usize> + Send + Sync + 'static,
    E: Fn(&[u32], bool) -> u32 + Send + Sync + 'static,
{
    Arc::new(move |atoms: &Atoms, loss: &LocalLoss| {
        let mut cost = vec![[Q::from_integer(0.into()), Q::from_integer(0.into())]; decisions];
        let nperm = match setting {
            Setting::NonPartite => factorial(k) as usize,
            Setting::Partite => 1,
        };
        for a in &atoms.entries {
            let points: Vec<Vec<u32>> = (0..nperm)
                .map(|s| if setting == Setting::NonPartite { permute_local(k, s, &a.x) } else { a.x.clone() })
                .collect();
            let Some(d) = points.iter().find_map(|p| decision(p)) else { continue };
            debug_assert!(points.iter().all(|p| decision(p).map_or(true, |e| e == d)));
            for (on, slot) in [false, true].into_iter().zip(0..2) {
                let pat: Vec<u32> = points.iter().map(|p| eval(p, on && decision(p).is_some())).collect();
                cost[d][slot] += loss(&a.x, &pat, &a.y) * Q::from_integer(a.count.into());
            }
        }
        cost.iter().enumerate().filter(|(_, c)| c[1] < c[0]).fold(0usize, |m, (d, _)| m | 1 << d)
    })
}

/// `F_A(x) = 1[∃ i ∈ A, {x_1, x_2} = {2i, 2i+1}]` on `2n` vertices, `A ⊆ [n]`.
pub fn matching_family(n_pairs: usize) -> FamilySpec {
    assert!((1..=20).contains(&n_pairs), "matching family needs 1..=20 pairs");
    let n = 2 * n_pairs;
    let pair_of = |x: &[u32]| -> Option<usize> { (x[0] / 2 == x[1] / 2 && x[0] != x[1]).then_some((x[0] / 2) as usize) };
    let erm = decision_erm(2, Setting::NonPartite, n_pairs, pair_of, |_, on| on as u32);
    let gen = move |mask: usize| {
        Hypothesis::new(format!("F{mask:b}"), 2, Setting::NonPartite, graph_sizes(n), 2, 1, move |x| {
            pair_of(x).map_or(0, |i| (mask >> i & 1) as u32)
        })
    };
    let class = HypothesisClass::structured(
        format!("matching({n_pairs})"),
        2,
        Setting::NonPartite,
        graph_sizes(n),
        2,
        1 << n_pairs,
        gen,
        Some(erm),
        None,
    );
    FamilySpec {
        name: "matching".into(),
        truncation: format!("n_pairs={n_pairs}"),
        class,
        measure: uniform_vertices(n),
        vcn: 1,
        vcn_limit: None,
        vc: Some(n_pairs),
        rank: 1,
        partition: None,
    }
}

/// Largest bounded-degree family whose ERM scans every member.
const EXACT_ERM_MEMBERS: usize = 1 << 16;

/// Graphs on `n` vertices with maximum degree at most `d`, enumerated as edge masks.
pub fn bounded_degree_family(n: usize, d: usize) -> FamilySpec {
    assert!((1..=8).contains(&n), "bounded-degree family enumerates graphs on at most 8 vertices");
    let edges: Vec<(u32, u32)> = (0..n as u32).flat_map(|u| (u + 1..n as u32).map(move |v| (u, v))).collect();
    let mut masks = Vec::new();
    let mut deg = vec![0usize; n];
    fn grow(i: usize, mask: u64, edges: &[(u32, u32)], deg: &mut [usize], d: usize, out: &mut Vec<u64>) {
        if i == edges.len() {
            out.push(mask);
            return;
        }
        grow(i + 1, mask, edges, deg, d, out);
        let (u, v) = edges[i];
        if deg[u as usize] < d && deg[v as usize] < d {
            deg[u as usize] += 1;
            deg[v as usize] += 1;
            grow(i + 1, mask | 1 << i, edges, deg, d, out);
            deg[u as usize] -= 1;
            deg[v as usize] -= 1;
        }
    }
    grow(0, 0, &edges, &mut deg, d, &mut masks);
    masks.sort_unstable();
    let masks = Arc::new(masks);
    let edge_index = Arc::new(move |u: u32, v: u32| -> Option<usize> {
        if u == v {
            return None;
        }
        let (a, b) = (u.min(v) as usize, u.max(v) as usize);
        Some(a * (2 * n - a - 1) / 2 + (b - a - 1))
    });
    let (m2, ei) = (masks.clone(), edge_index.clone());
    let gen = move |i: usize| {
        let mask = m2[i];
        let ei = ei.clone();
        Hypothesis::new(format!("G{mask:b}"), 2, Setting::NonPartite, graph_sizes(n), 2, 1, move |x| {
            ei(x[0], x[1]).map_or(0, |e| (mask >> e & 1) as u32)
        })
    };
    // the loss of a graph is a constant minus the summed gains of its edges: exact argmax over
    // the enumerated graphs when there are few, otherwise greedy by decreasing gain
    let (m3, ei2, edges2) = (masks.clone(), edge_index.clone(), edges.clone());
    let erm: ErmOracle = Arc::new(move |atoms: &Atoms, loss: &LocalLoss| {
        let zero = || Q::from_integer(0.into());
        let mut gain = vec![zero(); edges2.len()];
        for a in &atoms.entries {
            if let Some(e) = ei2(a.x[0], a.x[1]) {
                let c = Q::from_integer(a.count.into());
                gain[e] += (loss(&a.x, &[0, 0], &a.y) - loss(&a.x, &[1, 1], &a.y)) * c;
            }
        }
        if m3.len() <= EXACT_ERM_MEMBERS {
            let score = |mask: u64| -> Q { (0..edges2.len()).filter(|&e| mask >> e & 1 == 1).map(|e| gain[e].clone()).sum() };
            let mut best = (0, score(m3[0]));
            for (i, &mask) in m3.iter().enumerate().skip(1) {
                let s = score(mask);
                if s > best.1 {
                    best = (i, s);
                }
            }
            return best.0;
        }
        let mut order: Vec<usize> = (0..edges2.len()).collect();
        order.sort_by(|&a, &b| gain[b].cmp(&gain[a]).then(a.cmp(&b)));
        let mut deg = vec![0usize; n];
        let mut mask = 0u64;
        for e in order {
            if gain[e] <= zero() {
                break;
            }
            let (u, v) = edges2[e];
            if deg[u as usize] < d && deg[v as usize] < d {
                deg[u as usize] += 1;
                deg[v as usize] += 1;
                mask |= 1 << e;
            }
        }
        m3.binary_search(&mask).expect("greedy output respects the degree bound")
    });
    let top = d.min(n - 1);
    // slice at vertex v: every neighbourhood of size ≤ d avoiding v
    let restrict: RestrictFn = Arc::new(move |_part: usize, base: &[u32]| {
        let v = base[0] as usize;
        let others: Vec<usize> = (0..n).filter(|&u| u != v).collect();
        (0u32..1 << others.len())
            .filter(|s| s.count_ones() as usize <= top)
            .map(|s| {
                let mut f = vec![0u32; n];
                for (t, &u) in others.iter().enumerate() {
                    f[u] = s >> t & 1;
                }
                f
            })
            .collect()
    });
    let (m4, ei3) = (masks.clone(), edge_index.clone());
    let membership = Arc::new(move |h: &Hypothesis| {
        let mut mask = 0u64;
        for u in 0..n as u32 {
            for v in 0..n as u32 {
                if let Some(e) = ei3(u, v) {
                    mask |= (h.eval(&[u, v, 0]) as u64) << e;
                }
                if u == v && h.eval(&[u, v, 0]) != 0 {
                    return false;
                }
            }
        }
        m4.binary_search(&mask).is_ok()
    });
    let mut class = HypothesisClass::structured(
        format!("bdeg({n},{d})"),
        2,
        Setting::NonPartite,
        graph_sizes(n),
        2,
        masks.len(),
        gen,
        Some(erm),
        Some(membership),
    );
    class.restrict = Some(restrict);
    FamilySpec {
        name: "bdeg".into(),
        truncation: format!("n={n},d={d}"),
        class,
        measure: uniform_vertices(n),
        vcn: top,
        vcn_limit: None,
        vc: None,
        rank: 1,
        partition: None,
    }
}

/// A partition of the vertex pairs of `[0..n-1]` into classes (`χ₂`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionData {
    pub n: usize,
    pub classes: usize,
    /// `class_of[u][v]` for `u ≠ v` (symmetric).
    pub class_of: Vec<Vec<u32>>,
}

impl PartitionData {
    pub fn from_fn(n: usize, f: impl Fn(u32, u32) -> u32) -> Result<Self, String> {
        let mut class_of = vec![vec![u32::MAX; n]; n];
        let mut classes = 0;
        for u in 0..n as u32 {
            for v in u + 1..n as u32 {
                let c = f(u, v);
                class_of[u as usize][v as usize] = c;
                class_of[v as usize][u as usize] = c;
                classes = classes.max(c as usize + 1);
            }
        }
        let used: std::collections::BTreeSet<u32> =
            class_of.iter().flatten().copied().filter(|&c| c != u32::MAX).collect();
        if used.len() != classes {
            return Err("class ids must be 0..C-1 with every class used".into());
        }
        Ok(PartitionData { n, classes, class_of })
    }

    /// `{"n": n, "pairs": [[u, v, class], ...]}` covering every pair exactly once.
    pub fn from_json(v: &Value) -> Result<Self, String> {
        let n = v["n"].as_u64().ok_or("partition JSON needs integer n")? as usize;
        let mut table = vec![vec![None; n]; n];
        for p in v["pairs"].as_array().ok_or("partition JSON needs a pairs array")? {
            let t: Vec<u64> = p
                .as_array()
                .ok_or("pair entries are [u, v, class]")?
                .iter()
                .map(|x| x.as_u64().ok_or("pair entries must be integers"))
                .collect::<Result<_, _>>()?;
            let [u, w, c] = t[..] else { return Err("pair entries are [u, v, class]".into()) };
            let (u, w) = (u as usize, w as usize);
            if u >= n || w >= n || u == w {
                return Err(format!("bad pair ({u},{w})"));
            }
            if table[u][w].is_some() {
                return Err(format!("pair ({u},{w}) listed twice"));
            }
            table[u][w] = Some(c as u32);
            table[w][u] = Some(c as u32);
        }
        PartitionData::from_fn(n, |u, w| table[u as usize][w as usize].unwrap_or(u32::MAX))
            .and_then(|p| {
                if p.class_of.iter().enumerate().any(|(u, r)| r.iter().enumerate().any(|(w, &c)| u != w && c == u32::MAX)) {
                    Err("partition must cover every vertex pair".into())
                } else {
                    Ok(p)
                }
            })
    }

    pub fn class(&self, u: u32, v: u32) -> Option<u32> {
        (u != v).then(|| self.class_of[u as usize][v as usize])
    }
}

/// `{G_B : B ⊆ classes}` with `G_B(x, y) = 1[x ≠ y, χ₂({x, y}) ∈ B]`.
pub fn partition_family(name: &str, part: PartitionData, vcn: usize, vcn_limit: Option<Option<usize>>) -> FamilySpec {
    assert!(part.classes <= 30, "at most 30 classes");
    let n = part.n;
    let p = Arc::new(part.clone());
    let p1 = p.clone();
    let erm = decision_erm(
        2,
        Setting::NonPartite,
        part.classes,
        move |x: &[u32]| p1.class(x[0], x[1]).map(|c| c as usize),
        |_, on| on as u32,
    );
    let p2 = p.clone();
    let gen = move |mask: usize| {
        let p = p2.clone();
        Hypothesis::new(format!("G{mask:b}"), 2, Setting::NonPartite, graph_sizes(n), 2, 1, move |x| {
            p.class(x[0], x[1]).map_or(0, |c| (mask >> c & 1) as u32)
        })
    };
    let p3 = p.clone();
    let restrict: RestrictFn = Arc::new(move |_part: usize, base: &[u32]| {
        let v = base[0];
        let mut present: Vec<u32> = (0..n as u32).filter_map(|u| p3.class(v, u)).collect();
        present.sort_unstable();
        present.dedup();
        assert!(present.len() <= 20, "slice has too many classes to enumerate");
        (0u32..1 << present.len())
            .map(|s| {
                (0..n as u32)
                    .map(|u| p3.class(v, u).map_or(0, |c| s >> present.binary_search(&c).unwrap() & 1))
                    .collect()
            })
            .collect()
    });
    let mut class = HypothesisClass::structured(
        format!("{name}({n})"),
        2,
        Setting::NonPartite,
        graph_sizes(n),
        2,
        1 << part.classes,
        gen,
        Some(erm),
        None,
    );
    class.restrict = Some(restrict);
    FamilySpec {
        name: name.into(),
        truncation: format!("n={n}"),
        class,
        measure: uniform_vertices(n),
        vcn,
        vcn_limit,
        vc: None,
        rank: 1,
        partition: Some(part),
    }
}

/// Distance graphs on `[0..n-1]`: `G_A(x, y) = 1[|x − y| ∈ A]`, classes are distances − 1.
pub fn distance_family(n: usize) -> FamilySpec {
    assert!(n >= 2);
    let part = PartitionData::from_fn(n, |u, v| u.abs_diff(v) - 1).expect("distance partition");
    // slice at x = 0 realizes every distance, shattering all of {1..n-1}
    partition_family("dist", part, n - 1, Some(None))
}

/// `G_A(x, y) = 1[max{x, y} ∈ A]` on `[0..n-1]`; classes are `max − 1`.
pub fn max_family(n: usize) -> FamilySpec {
    assert!(n >= 2);
    let part = PartitionData::from_fn(n, |u, v| u.max(v) - 1).expect("max partition");
    // slice at x = 0 separates every y ≥ 1
    partition_family("maxg", part, n - 1, Some(None))
}

/// `H_V(x) = 1[x_{2} = x_{1,2} ∈ V]` on the 2-partite template `([1], [n], [n])`.
pub fn highorder_family(n: usize) -> FamilySpec {
    assert!((1..=20).contains(&n));
    let sizes = vec![1, n, n];
    let diag = |x: &[u32]| -> Option<usize> { (x[1] == x[2]).then_some(x[1] as usize) };
    let erm = decision_erm(2, Setting::Partite, n, diag, |_, on| on as u32);
    let s2 = sizes.clone();
    let gen = move |mask: usize| {
        Hypothesis::new(format!("H{mask:b}"), 2, Setting::Partite, s2.clone(), 2, 2, move |x| {
            diag(x).map_or(0, |i| (mask >> i & 1) as u32)
        })
    };
    let class = HypothesisClass::structured(
        format!("highorder({n})"),
        2,
        Setting::Partite,
        sizes.clone(),
        2,
        1 << n,
        gen,
        Some(erm),
        None,
    );
    FamilySpec {
        name: "highorder".into(),
        truncation: format!("n={n}"),
        class,
        measure: Measure::Partite(PartiteProbTemplate::uniform(2, &sizes)),
        vcn: n,
        vcn_limit: Some(None),
        vc: None,
        rank: 2,
        partition: None,
    }
}

/// Parses a CLI family name: `matching:N`, `bdeg:N:D`, `dist:N`, `maxg:N`,
/// `partition:<file>`, `highorder:N` (bare names use small defaults).
pub fn family_by_name(spec: &str) -> Result<FamilySpec, String> {
    let parts: Vec<&str> = spec.split(':').collect();
    let num = |i: usize, default: usize| -> Result<usize, String> {
        parts.get(i).map_or(Ok(default), |s| s.parse().map_err(|_| format!("bad number in family spec {spec}")))
    };
    match parts[0] {
        "matching" => Ok(matching_family(num(1, 3)?)),
        "bdeg" => Ok(bounded_degree_family(num(1, 5)?, num(2, 2)?)),
        "dist" => Ok(distance_family(num(1, 8)?)),
        "maxg" => Ok(max_family(num(1, 8)?)),
        "highorder" => Ok(highorder_family(num(1, 8)?)),
        "partition" => {
            let path = parts.get(1).ok_or("partition:<file> needs a path")?;
            let text = std::fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?;
            let v: Value = serde_json::from_str(&text).map_err(|e| format!("{path}: {e}"))?;
            let data = PartitionData::from_json(&v)?;
            let mut spec = partition_family("partition", data, 0, None);
            spec.vcn = vcn_k(&spec.class, 6)?.value();
            Ok(spec)
        }
        other => Err(format!("unknown family {other}")),
    }
}

/// The built-in families at small truncations.
pub fn builtin_families() -> Vec<FamilySpec> {
    vec![
        matching_family(3),
        bounded_degree_family(5, 2),
        distance_family(6),
        max_family(6),
        highorder_family(5),
    ]
}
