//! Random set systems and sub-hypergraph sampling for benchmarks.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{ElementId, SetId, SetSystem};

/// Elements joining more sets than this would exceed eight incident support
/// edges.
const MAX_MEMBERSHIPS: usize = 4;

/// A connected random system with `n` elements `v0..` and `h` sets `L0..`,
/// each set of size at least 2 and no element in more than four sets.
pub fn random_set_system(n: usize, h: usize, seed: u64) -> SetSystem {
    assert!(h >= 1 && n >= 2 && n + 1 >= h, "need n >= 2 and enough elements for h sets");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut members: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); h];
    let mut count = vec![0usize; n];
    let join = |members: &mut Vec<BTreeSet<usize>>, count: &mut Vec<usize>, s: usize, e: usize| {
        if members[s].insert(e) {
            count[e] += 1;
        }
    };
    for e in 0..n {
        let s = if e < h { e } else { rng.random_range(0..h) };
        join(&mut members, &mut count, s, e);
    }
    for e in 0..n {
        if h > 1 && rng.random::<f64>() < 0.3 && count[e] < MAX_MEMBERSHIPS - 1 {
            let s = rng.random_range(0..h);
            join(&mut members, &mut count, s, e);
        }
    }
    for s in 0..h {
        while members[s].len() < 2 {
            let e = rng.random_range(0..n);
            if count[e] < MAX_MEMBERSHIPS {
                join(&mut members, &mut count, s, e);
            }
        }
    }
    loop {
        let comp = set_components(&members);
        let roots: BTreeSet<usize> = comp.iter().copied().collect();
        if roots.len() <= 1 {
            break;
        }
        // link the component of set 0 to some other component
        let other: Vec<usize> = (0..h).filter(|&s| comp[s] != comp[0]).collect();
        let target = other[rng.random_range(0..other.len())];
        let mut pool: Vec<usize> = (0..h)
            .filter(|&s| comp[s] == comp[0])
            .flat_map(|s| members[s].iter().copied())
            .filter(|&e| count[e] < MAX_MEMBERSHIPS)
            .collect();
        pool.sort_unstable();
        pool.dedup();
        let e = if pool.is_empty() {
            // every element is saturated; fall back to an arbitrary one
            *members[0].iter().next().expect("nonempty")
        } else {
            pool[rng.random_range(0..pool.len())]
        };
        join(&mut members, &mut count, target, e);
    }
    let sets: Vec<(String, Vec<String>)> = members
        .iter()
        .enumerate()
        .map(|(s, m)| (format!("L{s}"), m.iter().map(|e| format!("v{e}")).collect()))
        .collect();
    SetSystem::from_named_sets(sets).expect("generated system is valid")
}

fn set_components(members: &[BTreeSet<usize>]) -> Vec<usize> {
    let h = members.len();
    let mut comp: Vec<usize> = (0..h).collect();
    let mut changed = true;
    while changed {
        changed = false;
        for a in 0..h {
            for b in a + 1..h {
                if comp[a] != comp[b] && !members[a].is_disjoint(&members[b]) {
                    let (lo, hi) = (comp[a].min(comp[b]), comp[a].max(comp[b]));
                    for c in comp.iter_mut() {
                        if *c == hi {
                            *c = lo;
                        }
                    }
                    changed = true;
                }
            }
        }
    }
    comp
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SampleError {
    #[error("base system has {available} sets, fewer than the {requested} requested")]
    TooFewSets { available: usize, requested: usize },
    #[error("no connected selection of {0} sets exists in the base system")]
    NoConnectedSelection(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub system: SetSystem,
    /// Whether the element count hit the target.
    pub exact: bool,
}

fn is_connected_selection(base: &SetSystem, chosen: &[SetId]) -> bool {
    let members: Vec<BTreeSet<usize>> = chosen
        .iter()
        .map(|&s| base.members(s).iter().map(|e| e.0).collect())
        .collect();
    let comp = set_components(&members);
    comp.iter().all(|&c| c == 0)
}

fn union_size(base: &SetSystem, chosen: &[SetId]) -> usize {
    chosen
        .iter()
        .flat_map(|&s| base.members(s).iter().copied())
        .collect::<BTreeSet<ElementId>>()
        .len()
}

/// `count` connected sub-systems of `base` with `h` sets each: a random
/// connected selection is grown set by set, then sets are swapped for
/// unselected ones (at most `budget` attempts, default `10·h`) whenever the
/// swap keeps it connected and brings the element count closer to `n`.
pub fn subsample(
    base: &SetSystem,
    n: usize,
    h: usize,
    count: usize,
    seed: u64,
    budget: Option<usize>,
) -> Result<Vec<Sample>, SampleError> {
    let total = base.set_count();
    if h > total || h == 0 {
        return Err(SampleError::TooFewSets {
            available: total,
            requested: h,
        });
    }
    let budget = budget.unwrap_or(10 * h);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let mut starts: Vec<usize> = (0..total).collect();
        starts.shuffle(&mut rng);
        let mut chosen: Option<Vec<SetId>> = None;
        for &start in &starts {
            let mut sel = vec![SetId(start)];
            while sel.len() < h {
                let cand: Vec<SetId> = base
                    .sets()
                    .filter(|s| !sel.contains(s))
                    .filter(|&s| {
                        sel.iter()
                            .any(|&t| base.members(s).iter().any(|&e| base.contains(t, e)))
                    })
                    .collect();
                if cand.is_empty() {
                    break;
                }
                sel.push(cand[rng.random_range(0..cand.len())]);
            }
            if sel.len() == h {
                chosen = Some(sel);
                break;
            }
        }
        let mut sel = chosen.ok_or(SampleError::NoConnectedSelection(h))?;
        let mut size = union_size(base, &sel);
        for _ in 0..budget {
            if size == n || sel.len() == total {
                break;
            }
            let i = rng.random_range(0..sel.len());
            let outside: Vec<SetId> = base.sets().filter(|s| !sel.contains(s)).collect();
            let t = outside[rng.random_range(0..outside.len())];
            let mut trial = sel.clone();
            trial[i] = t;
            let trial_size = union_size(base, &trial);
            if trial_size.abs_diff(n) < size.abs_diff(n) && is_connected_selection(base, &trial) {
                sel = trial;
                size = trial_size;
            }
        }
        sel.sort_unstable();
        let sets: Vec<(String, Vec<String>)> = sel
            .iter()
            .map(|&s| {
                (
                    base.set_name(s).to_string(),
                    base.members(s).iter().map(|&e| base.element_name(e).to_string()).collect(),
                )
            })
            .collect();
        let system = SetSystem::from_named_sets(sets).expect("a connected selection of valid sets is valid");
        out.push(Sample {
            exact: size == n,
            system,
        });
    }
    Ok(out)
}
