//! Seeded random instances for tests and demos.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cudf::{
    DependencyFormula, PackageUnit, PackageVersion, Relation, Request, SourceVersionToken,
    Universe, VersionConstraint,
};

#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    pub max_packages: usize,
    pub max_names: usize,
    pub max_sources: usize,
    pub max_source_versions: usize,
    pub depends_prob: f64,
    pub conflicts_prob: f64,
    pub recommends_prob: f64,
    pub installed_prob: f64,
    /// Chance that each request section gets one atom.
    pub request_prob: f64,
}

impl Default for GenParams {
    fn default() -> Self {
        Self {
            max_packages: 12,
            max_names: 7,
            max_sources: 4,
            max_source_versions: 3,
            depends_prob: 0.35,
            conflicts_prob: 0.15,
            recommends_prob: 0.2,
            installed_prob: 0.4,
            request_prob: 0.4,
        }
    }
}

fn random_atom(
    rng: &mut ChaCha8Rng,
    names: &[String],
    counts: &[u64],
    pick: usize,
) -> VersionConstraint {
    let name = names[pick].clone();
    let max = counts[pick].max(1);
    match rng.gen_range(0..4) {
        0 | 1 => VersionConstraint::any(name),
        r => {
            let rel = if r == 2 {
                Relation::Ge
            } else {
                *[Relation::Eq, Relation::Lt, Relation::Neq]
                    .choose(rng)
                    .unwrap()
            };
            let bound = PackageVersion::new(rng.gen_range(1..=max)).unwrap();
            VersionConstraint::bounded(name, rel, bound)
        }
    }
}

fn other_name(rng: &mut ChaCha8Rng, k: usize, own: usize) -> Option<usize> {
    (k > 1).then(|| {
        let j = rng.gen_range(0..k - 1);
        if j >= own {
            j + 1
        } else {
            j
        }
    })
}

/// Builds a random universe and request. The same seed and parameters
/// always give the same instance.
pub fn random_instance(seed: u64, params: &GenParams) -> (Universe, Request) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=params.max_packages.max(1));
    let k = rng.gen_range(1..=params.max_names.max(1).min(n));
    let names: Vec<String> = (0..k).map(|i| format!("p{i}")).collect();

    let source_count = rng.gen_range(1..=params.max_sources.max(1));
    let source_versions: Vec<usize> = (0..source_count)
        .map(|_| rng.gen_range(1..=params.max_source_versions.max(1)))
        .collect();
    // every name belongs to at most one source
    let source_of: Vec<Option<usize>> = (0..k)
        .map(|_| rng.gen_bool(0.85).then(|| rng.gen_range(0..source_count)))
        .collect();

    let mut owner = Vec::with_capacity(n);
    let mut counts = vec![0u64; k];
    for i in 0..n {
        let j = if i < k { i } else { rng.gen_range(0..k) };
        counts[j] += 1;
        owner.push((j, counts[j]));
    }

    let mut units = Vec::with_capacity(n);
    for &(j, version) in &owner {
        let mut p = PackageUnit::new(names[j].clone(), PackageVersion::new(version).unwrap());
        if let Some(s) = source_of[j] {
            let token = format!("{}", rng.gen_range(1..=source_versions[s]));
            p = p.with_source(format!("src{s}"), SourceVersionToken::new(token).unwrap());
        }
        if rng.gen_bool(params.depends_prob) {
            if let Some(t) = other_name(&mut rng, k, j) {
                let mut clause = vec![random_atom(&mut rng, &names, &counts, t)];
                if rng.gen_bool(0.3) {
                    if let Some(t2) = other_name(&mut rng, k, j) {
                        clause.push(random_atom(&mut rng, &names, &counts, t2));
                    }
                }
                p.depends = DependencyFormula::new(vec![clause]);
            }
        }
        if rng.gen_bool(params.conflicts_prob) {
            if let Some(t) = other_name(&mut rng, k, j) {
                p.conflicts.push(random_atom(&mut rng, &names, &counts, t));
            }
        }
        if rng.gen_bool(params.recommends_prob) {
            if let Some(t) = other_name(&mut rng, k, j) {
                p.recommends = Some(DependencyFormula::new(vec![vec![VersionConstraint::any(
                    names[t].clone(),
                )]]));
            }
        }
        p.installed = rng.gen_bool(params.installed_prob);
        units.push(p);
    }

    let mut req = Request::default();
    if rng.gen_bool(params.request_prob) {
        let t = rng.gen_range(0..k);
        req.install.push(random_atom(&mut rng, &names, &counts, t));
    }
    if rng.gen_bool(params.request_prob / 2.0) {
        let t = rng.gen_range(0..k);
        req.remove.push(VersionConstraint::any(names[t].clone()));
    }
    if rng.gen_bool(params.request_prob / 3.0) {
        let t = rng.gen_range(0..k);
        req.upgrade.push(VersionConstraint::any(names[t].clone()));
    }
    let u = Universe::new(units).expect("generated versions are distinct per name");
    (u, req)
}
