//! Pruning: repeatedly remove a leaf of non-positive weight `w` and record
//! `t = w + 1` on its neighbour as an lc-marking (`t = 1`), nothing
//! (`t = 0`), or a klt-marking (otherwise).

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frac::Frac12;
use crate::kodaira::is_klt_marking;
use crate::tree::{CanonicalKey, PrunedTree};

/// Which eligible leaf to prune next.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum LeafPolicy {
    /// Lowest vertex id first.
    #[default]
    LowestId,
    /// All eligible leaves of the current tree, then recompute.
    Rounds,
    /// The given ids in order, then [`LeafPolicy::LowestId`] for whatever remains.
    Explicit(Vec<String>),
    /// Uniformly random eligible leaf, seeded.
    Random(u64),
}

impl FromStr for LeafPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "id" => Ok(LeafPolicy::LowestId),
            "rounds" => Ok(LeafPolicy::Rounds),
            _ => {
                if let Some(list) = s.strip_prefix("order=") {
                    Ok(LeafPolicy::Explicit(
                        list.split(',')
                            .map(str::trim)
                            .filter(|x| !x.is_empty())
                            .map(String::from)
                            .collect(),
                    ))
                } else if let Some(seed) = s.strip_prefix("random=") {
                    seed.parse()
                        .map(LeafPolicy::Random)
                        .map_err(|_| Error::InvalidOrder(format!("bad seed {seed:?}")))
                } else {
                    Err(Error::InvalidOrder(format!(
                        "unknown policy {s:?} (expected id, rounds, order=..., random=SEED)"
                    )))
                }
            }
        }
    }
}

impl fmt::Display for LeafPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LeafPolicy::LowestId => f.write_str("id"),
            LeafPolicy::Rounds => f.write_str("rounds"),
            LeafPolicy::Explicit(ids) => write!(f, "order={}", ids.join(",")),
            LeafPolicy::Random(seed) => write!(f, "random={seed}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PruneAction {
    LcMark,
    Drop,
    KltMark { value: Frac12 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PruneEvent {
    pub round: usize,
    pub removed: String,
    pub neighbor: String,
    pub leaf_weight: Frac12,
    pub t: Frac12,
    pub action: PruneAction,
    /// Canonical key of the tree after this step.
    pub snapshot: CanonicalKey,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PruneTrace {
    pub input: PrunedTree,
    pub events: Vec<PruneEvent>,
    #[serde(rename = "final")]
    pub final_tree: PrunedTree,
}

struct Step {
    removed: String,
    neighbor: String,
    leaf_weight: Frac12,
    t: Frac12,
    action: PruneAction,
}

fn eligible(tree: &PrunedTree) -> Vec<usize> {
    (0..tree.len())
        .filter(|&v| tree.is_leaf(v) && !tree.weight_at(v).is_positive())
        .collect()
}

fn is_eligible(tree: &PrunedTree, v: usize) -> bool {
    tree.is_leaf(v) && !tree.weight_at(v).is_positive()
}

fn apply(tree: &mut PrunedTree, v: usize) -> Result<Step> {
    let leaf_weight = tree.weight_at(v);
    let w = tree
        .base()
        .neighbors(v)
        .next()
        .map(|(w, _, _)| w)
        .expect("leaf has a neighbour");
    let t = leaf_weight + Frac12::ONE;
    let action = if t == Frac12::ONE {
        PruneAction::LcMark
    } else if t == Frac12::ZERO {
        PruneAction::Drop
    } else if is_klt_marking(t) {
        PruneAction::KltMark { value: t }
    } else {
        return Err(Error::MarkingOutsideTable {
            leaf: tree.id(v).to_string(),
            t,
        });
    };
    let neighbor = tree.id(w).to_string();
    let removed = tree.remove_vertex(v);
    let w = if w > v { w - 1 } else { w };
    match action {
        PruneAction::LcMark => tree.add_lc(w),
        PruneAction::Drop => {}
        PruneAction::KltMark { value } => tree.add_klt(w, value),
    }
    Ok(Step {
        removed,
        neighbor,
        leaf_weight,
        t,
        action,
    })
}

fn check_input(tree: &PrunedTree) -> Result<()> {
    let report = tree.validate();
    if !report.ok {
        return Err(Error::InvalidTree(report.summary()));
    }
    let total = tree.sum_weights();
    if !total.is_positive() {
        return Err(Error::NonPositiveTotalWeight(total));
    }
    Ok(())
}

fn run(
    tree: PrunedTree,
    policy: &LeafPolicy,
    on_step: impl FnMut(usize, Step, &PrunedTree),
) -> Result<PrunedTree> {
    check_input(&tree)?;
    run_checked(tree, policy, on_step)
}

fn run_checked(
    mut tree: PrunedTree,
    policy: &LeafPolicy,
    mut on_step: impl FnMut(usize, Step, &PrunedTree),
) -> Result<PrunedTree> {
    let mut round = 0;
    fn lowest_id(
        tree: &mut PrunedTree,
        round: &mut usize,
        on_step: &mut dyn FnMut(usize, Step, &PrunedTree),
    ) -> Result<()> {
        while let Some(&v) = eligible(tree).first() {
            *round += 1;
            let step = apply(tree, v)?;
            on_step(*round, step, tree);
        }
        Ok(())
    }
    match policy {
        LeafPolicy::LowestId => lowest_id(&mut tree, &mut round, &mut on_step)?,
        LeafPolicy::Random(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            while let Some(&v) = eligible(&tree).choose(&mut rng) {
                round += 1;
                let step = apply(&mut tree, v)?;
                on_step(round, step, &tree);
            }
        }
        LeafPolicy::Explicit(order) => {
            for id in order {
                let v = tree
                    .index_of(id)
                    .ok_or_else(|| Error::InvalidOrder(format!("{id:?} is not in the tree")))?;
                if !is_eligible(&tree, v) {
                    return Err(Error::InvalidOrder(format!(
                        "{id:?} is not a leaf of non-positive weight"
                    )));
                }
                round += 1;
                let step = apply(&mut tree, v)?;
                on_step(round, step, &tree);
            }
            lowest_id(&mut tree, &mut round, &mut on_step)?;
        }
        LeafPolicy::Rounds => loop {
            let batch: Vec<String> = eligible(&tree)
                .into_iter()
                .map(|v| tree.id(v).to_string())
                .collect();
            if batch.is_empty() {
                break;
            }
            round += 1;
            for id in batch {
                // Removing one leaf only changes its neighbour, which stays
                // eligible unless the tree is down to two vertices.
                match tree.index_of(&id) {
                    Some(v) if is_eligible(&tree, v) && tree.len() > 1 => {
                        let step = apply(&mut tree, v)?;
                        on_step(round, step, &tree);
                    }
                    _ => {}
                }
            }
        },
    }
    if let Some(v) = (0..tree.len()).find(|&v| !tree.weight_at(v).is_positive()) {
        if tree.len() == 1 {
            return Err(Error::NonPositiveTotalWeight(tree.weight_at(v)));
        }
        return Err(Error::StalledPruning(tree.id(v).to_string()));
    }
    Ok(tree)
}

/// Prunes with the default lowest-id policy.
pub fn prune(tree: impl Into<PrunedTree>) -> Result<PruneTrace> {
    prune_with_order(tree, &LeafPolicy::LowestId)
}

pub fn prune_with_order(tree: impl Into<PrunedTree>, policy: &LeafPolicy) -> Result<PruneTrace> {
    let input = tree.into();
    let mut events = Vec::new();
    let final_tree = run(input.clone(), policy, |round, s, after| {
        events.push(PruneEvent {
            round,
            removed: s.removed,
            neighbor: s.neighbor,
            leaf_weight: s.leaf_weight,
            t: s.t,
            action: s.action,
            snapshot: after.canonical_key(),
        })
    })?;
    Ok(PruneTrace {
        input,
        events,
        final_tree,
    })
}

/// Final tree only; skips building the event log.
pub fn prune_final(tree: impl Into<PrunedTree>, policy: &LeafPolicy) -> Result<PrunedTree> {
    run(tree.into(), policy, |_, _, _| {})
}

/// [`prune_final`] under each policy, checking the input once.
pub fn prune_final_each(tree: &PrunedTree, policies: &[LeafPolicy]) -> Vec<Result<PrunedTree>> {
    let checked = check_input(tree).is_ok();
    policies
        .iter()
        .map(|p| match checked {
            true => run_checked(tree.clone(), p, |_, _, _| {}),
            false => prune_final(tree.clone(), p),
        })
        .collect()
}

impl PruneTrace {
    /// Trees before the first event and after every event.
    ///
    /// Each event is re-applied to the previous tree; a mismatch in weight,
    /// marking or snapshot is reported as [`Error::InvalidOrder`].
    pub fn states(&self) -> Result<Vec<PrunedTree>> {
        let mut tree = self.input.clone();
        let mut out = vec![tree.clone()];
        for (k, e) in self.events.iter().enumerate() {
            let v = tree
                .index_of(&e.removed)
                .filter(|&v| is_eligible(&tree, v))
                .ok_or_else(|| Error::InvalidOrder(format!("event {k}: {:?} not prunable", e.removed)))?;
            let step = apply(&mut tree, v)?;
            if step.neighbor != e.neighbor
                || step.leaf_weight != e.leaf_weight
                || step.t != e.t
                || step.action != e.action
                || tree.canonical_key() != e.snapshot
            {
                return Err(Error::InvalidOrder(format!("event {k} does not replay")));
            }
            out.push(tree.clone());
        }
        Ok(out)
    }

    /// Replays the events from the input; equals `final_tree` for any
    /// trace produced by [`prune_with_order`].
    pub fn replay(&self) -> Result<PrunedTree> {
        Ok(self.states()?.pop().expect("states is never empty"))
    }

    /// Input tree followed by the tree at the end of each round.
    pub fn round_frames(&self) -> Result<Vec<PrunedTree>> {
        let states = self.states()?;
        let mut frames = vec![states[0].clone()];
        for (k, e) in self.events.iter().enumerate() {
            let last_of_round = self.events.get(k + 1).is_none_or(|n| n.round != e.round);
            if last_of_round {
                frames.push(states[k + 1].clone());
            }
        }
        Ok(frames)
    }

    pub fn rounds(&self) -> usize {
        self.events.last().map_or(0, |e| e.round)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("traces always serialize")
    }
}
