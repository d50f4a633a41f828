//! Referral payout schemes: refer-a-friend, geometric and Shapley.

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::shapley::{root_adjust, shapley_basic, Allocation};
use crate::tree::RootedTree;

#[derive(Clone, Debug, PartialEq)]
pub enum MechanismKind<S> {
    /// Shapley value of the basic game; optionally one unit less for the root.
    Shapley { root_adjust: bool },
    /// Each referral pays `referrer_share` to the parent, the rest to the invitee.
    ReferAFriend { referrer_share: S },
    /// Ancestors at distance `k` earn `ratio^k` shares; invitees earn nothing.
    Geometric { ratio: S, normalize: bool },
}

#[derive(Clone, Debug, PartialEq)]
pub struct MechanismSpec<S> {
    pub kind: MechanismKind<S>,
    /// Reward per referral.
    pub unit_value: S,
}

impl<S: Scalar> MechanismSpec<S> {
    pub fn shapley(root_adjust: bool, unit_value: S) -> Self {
        MechanismSpec { kind: MechanismKind::Shapley { root_adjust }, unit_value }
    }

    pub fn refer_a_friend(referrer_share: S, unit_value: S) -> Result<Self> {
        let spec = MechanismSpec { kind: MechanismKind::ReferAFriend { referrer_share }, unit_value };
        spec.validate()?;
        Ok(spec)
    }

    pub fn geometric(ratio: S, normalize: bool, unit_value: S) -> Result<Self> {
        let spec = MechanismSpec { kind: MechanismKind::Geometric { ratio, normalize }, unit_value };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            MechanismKind::Shapley { .. } => Ok(()),
            MechanismKind::ReferAFriend { referrer_share } => {
                if *referrer_share < S::zero() || *referrer_share > S::one() {
                    return Err(Error::InvalidMechanism("referrer share must lie in [0, 1]".into()));
                }
                Ok(())
            }
            MechanismKind::Geometric { ratio, .. } => {
                if *ratio <= S::zero() || *ratio >= S::one() {
                    return Err(Error::InvalidMechanism("geometric ratio must lie strictly between 0 and 1".into()));
                }
                Ok(())
            }
        }
    }

    pub fn label(&self) -> &'static str {
        match self.kind {
            MechanismKind::Shapley { .. } => "Shapley",
            MechanismKind::ReferAFriend { .. } => "Refer-a-friend",
            MechanismKind::Geometric { .. } => "Geometric",
        }
    }
}

impl<S: Scalar> fmt::Display for MechanismSpec<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

pub fn allocate<S: Scalar>(tree: &RootedTree, spec: &MechanismSpec<S>) -> Result<Allocation<S>> {
    spec.validate()?;
    match &spec.kind {
        MechanismKind::Shapley { root_adjust } => Ok(allocate_shapley(tree, *root_adjust, &spec.unit_value)),
        MechanismKind::ReferAFriend { referrer_share } => {
            Ok(allocate_refer_a_friend(tree, referrer_share, &spec.unit_value))
        }
        MechanismKind::Geometric { ratio, normalize } => {
            Ok(allocate_geometric(tree, ratio, *normalize, &spec.unit_value))
        }
    }
}

pub fn allocate_refer_a_friend<S: Scalar>(tree: &RootedTree, referrer_share: &S, unit: &S) -> Allocation<S> {
    let to_referrer = referrer_share.clone() * unit.clone();
    let to_invitee = (S::one() - referrer_share.clone()) * unit.clone();
    let mut out = vec![S::zero(); tree.len()];
    for v in 0..tree.len() {
        if let Some(p) = tree.parent_index(v) {
            out[v] = out[v].clone() + to_invitee.clone();
            out[p] = out[p].clone() + to_referrer.clone();
        }
    }
    Allocation::from_dense(tree, out)
}

/// Raw geometric shares: `sum over strict descendants w of ratio^(depth(w) - depth(u))`.
pub fn geometric_shares<S: Scalar>(tree: &RootedTree, ratio: &S) -> Vec<S> {
    (0..tree.len())
        .map(|v| {
            let levels = tree.subtree_level_counts(v);
            let mut power = S::one();
            let mut share = S::zero();
            for &count in &levels[1..] {
                power = power * ratio.clone();
                share = share + S::from_count(count) * power.clone();
            }
            share
        })
        .collect()
}

pub fn allocate_geometric<S: Scalar>(tree: &RootedTree, ratio: &S, normalize: bool, unit: &S) -> Allocation<S> {
    let shares = geometric_shares(tree, ratio);
    if !normalize {
        return Allocation::from_dense(tree, shares.into_iter().map(|s| s * unit.clone()).collect());
    }
    let sum: S = shares.iter().cloned().sum();
    if sum.is_zero() {
        return Allocation::zeros(tree);
    }
    let budget = unit.clone() * S::from_count(tree.len() as u64 - 1);
    Allocation::from_dense(tree, shares.into_iter().map(|s| budget.clone() * s / sum.clone()).collect())
}

pub fn allocate_shapley<S: Scalar>(tree: &RootedTree, adjust: bool, unit: &S) -> Allocation<S> {
    let sh = shapley_basic::<S>(tree).scaled(unit);
    if adjust {
        root_adjust(&sh, tree.root(), unit).expect("root is in the allocation")
    } else {
        sh
    }
}

/// The equal-shares construction: every member's arrival is worth one unit,
/// split evenly between the member and all of its ancestors.
pub fn allocate_equal_shares<S: Scalar>(tree: &RootedTree, unit: &S) -> Allocation<S> {
    let mut out = vec![S::zero(); tree.len()];
    for v in 0..tree.len() {
        let each = unit.clone() / S::from_count(tree.depth_of_index(v) as u64 + 1);
        let mut u = Some(v);
        while let Some(a) = u {
            out[a] = out[a].clone() + each.clone();
            u = tree.parent_index(a);
        }
    }
    Allocation::from_dense(tree, out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TreeSummary {
    pub nodes: usize,
    pub height: usize,
    pub referrals: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RewardReport<S> {
    pub summary: TreeSummary,
    pub rows: Vec<(MechanismSpec<S>, Allocation<S>)>,
}

/// Runs every mechanism on the same tree, in the order given.
pub fn compare<S: Scalar>(tree: &RootedTree, specs: &[MechanismSpec<S>]) -> Result<RewardReport<S>> {
    if specs.is_empty() {
        return Err(Error::InvalidArgument("no mechanisms to compare".into()));
    }
    let rows = specs.iter().map(|s| Ok((s.clone(), allocate(tree, s)?))).collect::<Result<Vec<_>>>()?;
    Ok(RewardReport {
        summary: TreeSummary { nodes: tree.len(), height: tree.height(), referrals: tree.len() - 1 },
        rows,
    })
}
