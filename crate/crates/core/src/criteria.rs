//! Exact measurement of the classic upgrade criteria and the four
//! source-alignment criteria on a concrete installation. Every encoding in
//! this crate is checked against these functions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::cudf::{
    expand_disjunction, Installation, SourceClusterIndex, SourceVersionToken, Universe,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CriterionKind {
    Removed,
    New,
    Changed,
    NotUpToDate,
    UnsatRecommends,
    UnalignedPackages,
    UnalignedPairs,
    UnalignedVersionChanges,
    UnalignedClusters,
}

impl CriterionKind {
    pub const ALL: [CriterionKind; 9] = [
        CriterionKind::Removed,
        CriterionKind::New,
        CriterionKind::Changed,
        CriterionKind::NotUpToDate,
        CriterionKind::UnsatRecommends,
        CriterionKind::UnalignedPackages,
        CriterionKind::UnalignedPairs,
        CriterionKind::UnalignedVersionChanges,
        CriterionKind::UnalignedClusters,
    ];

    pub const ALIGNMENT: [CriterionKind; 4] = [
        CriterionKind::UnalignedPackages,
        CriterionKind::UnalignedPairs,
        CriterionKind::UnalignedVersionChanges,
        CriterionKind::UnalignedClusters,
    ];

    pub fn is_alignment(self) -> bool {
        Self::ALIGNMENT.contains(&self)
    }

    /// Short name used in criteria strings and reports.
    pub fn name(self) -> &'static str {
        match self {
            CriterionKind::Removed => "removed",
            CriterionKind::New => "new",
            CriterionKind::Changed => "changed",
            CriterionKind::NotUpToDate => "notuptodate",
            CriterionKind::UnsatRecommends => "unsatrecommends",
            CriterionKind::UnalignedPackages => "packages",
            CriterionKind::UnalignedPairs => "pairs",
            CriterionKind::UnalignedVersionChanges => "version_changes",
            CriterionKind::UnalignedClusters => "clusters",
        }
    }
}

impl fmt::Display for CriterionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_alignment() {
            write!(f, "unaligned({})", self.name())
        } else {
            f.write_str(self.name())
        }
    }
}

/// Set of sources an alignment criterion is evaluated on. `None` means all.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct ClusterRestriction(Option<BTreeSet<String>>);

impl ClusterRestriction {
    pub fn all() -> Self {
        Self(None)
    }

    /// Returns `None` for an empty set.
    pub fn only<I, S>(sources: I) -> Option<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let set: BTreeSet<String> = sources.into_iter().map(Into::into).collect();
        (!set.is_empty()).then_some(Self(Some(set)))
    }

    pub fn sources(&self) -> Option<&BTreeSet<String>> {
        self.0.as_ref()
    }

    pub fn admits(&self, source: &str) -> bool {
        self.0.as_ref().is_none_or(|s| s.contains(source))
    }
}

fn names_in<'a>(u: &'a Universe, s: &Installation) -> BTreeSet<&'a str> {
    s.iter().map(|id| u.get(id).name.as_str()).collect()
}

pub fn removed(u: &Universe, initial: &Installation, s: &Installation) -> u64 {
    let after = names_in(u, s);
    names_in(u, initial)
        .iter()
        .filter(|n| !after.contains(*n))
        .count() as u64
}

pub fn new_count(u: &Universe, initial: &Installation, s: &Installation) -> u64 {
    let before = names_in(u, initial);
    names_in(u, s)
        .iter()
        .filter(|n| !before.contains(*n))
        .count() as u64
}

pub fn changed(u: &Universe, initial: &Installation, s: &Installation) -> u64 {
    u.names()
        .filter(|n| initial.versions_of(u, n) != s.versions_of(u, n))
        .count() as u64
}

/// Installed names missing the most recent version the universe offers.
pub fn notuptodate(u: &Universe, s: &Installation) -> u64 {
    u.names()
        .filter(|n| {
            let versions = u.versions_of(n);
            let newest = *versions.last().expect("indexed names have versions");
            versions.iter().any(|&id| s.contains(id)) && !s.contains(newest)
        })
        .count() as u64
}

/// One unit per recommends clause of an installed package left without an
/// installed satisfier.
pub fn unsat_recommends(u: &Universe, s: &Installation) -> u64 {
    s.iter()
        .filter_map(|id| u.get(id).recommends.as_ref())
        .flat_map(|f| f.clauses())
        .filter(|clause| !expand_disjunction(u, clause).iter().any(|&q| s.contains(q)))
        .count() as u64
}

/// Per admitted source: installed package count and distinct installed
/// source versions.
fn cluster_stats<'a>(
    s: &Installation,
    idx: &'a SourceClusterIndex,
    r: &ClusterRestriction,
) -> BTreeMap<&'a str, Vec<(&'a SourceVersionToken, usize)>> {
    idx.iter()
        .filter(|(name, _)| r.admits(name))
        .map(|(name, cluster)| {
            let per_version = cluster
                .iter()
                .map(|(v, pkgs)| (v, pkgs.iter().filter(|&&p| s.contains(p)).count()))
                .filter(|&(_, k)| k > 0)
                .collect();
            (name, per_version)
        })
        .collect()
}

pub fn unaligned_packages(
    s: &Installation,
    idx: &SourceClusterIndex,
    r: &ClusterRestriction,
) -> u64 {
    cluster_stats(s, idx, r)
        .values()
        .filter(|vs| vs.len() >= 2)
        .map(|vs| vs.iter().map(|&(_, k)| k as u64).sum::<u64>())
        .sum()
}

pub fn unaligned_pairs(s: &Installation, idx: &SourceClusterIndex, r: &ClusterRestriction) -> u64 {
    cluster_stats(s, idx, r)
        .values()
        .map(|vs| {
            let total: u64 = vs.iter().map(|&(_, k)| k as u64).sum();
            let same: u64 = vs
                .iter()
                .map(|&(_, k)| (k as u64) * (k as u64 - 1) / 2)
                .sum();
            total * total.saturating_sub(1) / 2 - same
        })
        .sum()
}

pub fn unaligned_version_changes(
    s: &Installation,
    idx: &SourceClusterIndex,
    r: &ClusterRestriction,
) -> u64 {
    cluster_stats(s, idx, r)
        .values()
        .map(|vs| vs.len().saturating_sub(1) as u64)
        .sum()
}

pub fn unaligned_clusters(
    s: &Installation,
    idx: &SourceClusterIndex,
    r: &ClusterRestriction,
) -> u64 {
    cluster_stats(s, idx, r)
        .values()
        .filter(|vs| vs.len() >= 2)
        .count() as u64
}

pub fn is_aligned(s: &Installation, idx: &SourceClusterIndex) -> bool {
    unaligned_clusters(s, idx, &ClusterRestriction::all()) == 0
}

/// Value of a single criterion. The restriction only affects alignment kinds.
pub fn measure(
    kind: CriterionKind,
    u: &Universe,
    initial: &Installation,
    s: &Installation,
    idx: &SourceClusterIndex,
    r: &ClusterRestriction,
) -> u64 {
    match kind {
        CriterionKind::Removed => removed(u, initial, s),
        CriterionKind::New => new_count(u, initial, s),
        CriterionKind::Changed => changed(u, initial, s),
        CriterionKind::NotUpToDate => notuptodate(u, s),
        CriterionKind::UnsatRecommends => unsat_recommends(u, s),
        CriterionKind::UnalignedPackages => unaligned_packages(s, idx, r),
        CriterionKind::UnalignedPairs => unaligned_pairs(s, idx, r),
        CriterionKind::UnalignedVersionChanges => unaligned_version_changes(s, idx, r),
        CriterionKind::UnalignedClusters => unaligned_clusters(s, idx, r),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasureReport {
    values: BTreeMap<CriterionKind, u64>,
}

impl MeasureReport {
    pub fn get(&self, kind: CriterionKind) -> u64 {
        self.values[&kind]
    }

    /// (packages, pairs, version changes, clusters).
    pub fn alignment(&self) -> [u64; 4] {
        CriterionKind::ALIGNMENT.map(|k| self.get(k))
    }
}

pub fn measure_all(
    u: &Universe,
    initial: &Installation,
    s: &Installation,
    idx: &SourceClusterIndex,
    r: &ClusterRestriction,
) -> MeasureReport {
    let values = CriterionKind::ALL
        .into_iter()
        .map(|k| (k, measure(k, u, initial, s, idx, r)))
        .collect();
    MeasureReport { values }
}
