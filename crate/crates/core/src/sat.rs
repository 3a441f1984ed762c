//! Weighted CNF for the unaligned-packages and unaligned-pairs criteria.
//!
//! Only the implication needed for minimization is encoded: an auxiliary
//! must be true when its package (pair) is installed and unaligned, and
//! each auxiliary costs 1 when true.

use std::collections::BTreeSet;
use std::fmt::Write;

use crate::criteria::CriterionKind;
use crate::cudf::{
    expand_constraint, expand_disjunction, PkgId, Request, SourceClusterIndex, Universe,
};
use crate::milp::{downgrades, EncodeError, LinearProgram, VarId, VarTag};

/// Signed literal over a variable handle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit {
    pub var: VarId,
    pub positive: bool,
}

impl Lit {
    pub fn pos(var: VarId) -> Self {
        Self {
            var,
            positive: true,
        }
    }

    pub fn neg(var: VarId) -> Self {
        Self {
            var,
            positive: false,
        }
    }

    pub fn dimacs(self) -> i64 {
        let h = i64::from(self.var.handle());
        if self.positive {
            h
        } else {
            -h
        }
    }

    pub fn holds(self, values: &[bool]) -> bool {
        values[self.var.index()] == self.positive
    }
}

/// Non-empty disjunction without repeated or complementary literals.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Clause(Vec<Lit>);

impl Clause {
    /// `None` for tautologies. Duplicates are merged.
    pub fn new(lits: impl IntoIterator<Item = Lit>) -> Option<Self> {
        let set: BTreeSet<Lit> = lits.into_iter().collect();
        let tautology = set.iter().any(|l| {
            set.contains(&Lit {
                var: l.var,
                positive: !l.positive,
            })
        });
        assert!(!set.is_empty(), "empty clause");
        (!tautology).then(|| Self(set.into_iter().collect()))
    }

    pub fn lits(&self) -> &[Lit] {
        &self.0
    }

    pub fn holds(&self, values: &[bool]) -> bool {
        self.0.iter().any(|l| l.holds(values))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WeightedFormula {
    pub var_count: usize,
    pub hard: Vec<Clause>,
    pub soft: Vec<(u64, Lit)>,
}

impl WeightedFormula {
    /// Weight marking hard clauses; exceeds the total soft weight.
    pub fn top(&self) -> u64 {
        self.soft.iter().map(|&(w, _)| w).sum::<u64>() + 1
    }

    /// Soft cost of `values`, or `None` if a hard clause is violated.
    pub fn cost(&self, values: &[bool]) -> Option<u64> {
        self.hard.iter().all(|c| c.holds(values)).then(|| {
            self.soft
                .iter()
                .filter(|(_, l)| !l.holds(values))
                .map(|&(w, _)| w)
                .sum()
        })
    }
}

/// Assigns handles for SAT literals. Package variables and any auxiliary
/// already present in the seed program keep their handle; new auxiliaries
/// are numbered after it.
pub struct SatVars<'a> {
    lp: &'a LinearProgram,
    extra: Vec<VarTag>,
}

impl<'a> SatVars<'a> {
    pub fn new(lp: &'a LinearProgram) -> Self {
        Self {
            lp,
            extra: Vec::new(),
        }
    }

    pub fn var(&mut self, tag: VarTag) -> VarId {
        if let Some(v) = self.lp.var(&tag) {
            return v;
        }
        let pos = match self.extra.iter().position(|t| *t == tag) {
            Some(p) => p,
            None => {
                self.extra.push(tag);
                self.extra.len() - 1
            }
        };
        VarId::from_index(self.lp.variables().len() + pos)
    }

    fn pkg(&mut self, id: PkgId) -> VarId {
        self.var(VarTag::Pkg(id))
    }

    pub fn count(&self) -> usize {
        self.lp.variables().len() + self.extra.len()
    }
}

fn push(out: &mut Vec<Clause>, seen: &mut BTreeSet<Clause>, lits: impl IntoIterator<Item = Lit>) {
    if let Some(c) = Clause::new(lits) {
        if seen.insert(c.clone()) {
            out.push(c);
        }
    }
}

/// Dependencies, conflicts and the request as clauses over package variables.
pub fn clausify_base(
    u: &Universe,
    req: &Request,
    vars: &mut SatVars<'_>,
) -> Result<Vec<Clause>, EncodeError> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for id in u.ids() {
        let p = vars.pkg(id);
        let unit = u.get(id);
        for clause in unit.depends.clauses() {
            let sat = expand_disjunction(u, clause);
            let lits: Vec<Lit> = sat
                .iter()
                .map(|&q| Lit::pos(vars.pkg(q)))
                .chain([Lit::neg(p)])
                .collect();
            push(&mut out, &mut seen, lits);
        }
        for atom in &unit.conflicts {
            for q in expand_constraint(u, atom).into_iter().filter(|&q| q != id) {
                let q = vars.pkg(q);
                push(&mut out, &mut seen, [Lit::neg(p), Lit::neg(q)]);
            }
        }
    }
    let initial = u.initial_installation();
    for atom in &req.install {
        let sat = expand_constraint(u, atom);
        if sat.is_empty() {
            return Err(EncodeError::EmptyExpansion {
                verb: "install",
                atom: atom.to_string(),
            });
        }
        let lits: Vec<Lit> = sat.iter().map(|&q| Lit::pos(vars.pkg(q))).collect();
        push(&mut out, &mut seen, lits);
    }
    for atom in &req.remove {
        for q in expand_constraint(u, atom) {
            let q = vars.pkg(q);
            push(&mut out, &mut seen, [Lit::neg(q)]);
        }
    }
    for atom in &req.upgrade {
        let sat: Vec<VarId> = expand_constraint(u, atom)
            .into_iter()
            .map(|q| vars.pkg(q))
            .collect();
        if sat.is_empty() {
            return Err(EncodeError::EmptyExpansion {
                verb: "upgrade",
                atom: atom.to_string(),
            });
        }
        push(&mut out, &mut seen, sat.iter().map(|&q| Lit::pos(q)));
        for (i, &a) in sat.iter().enumerate() {
            for &b in &sat[i + 1..] {
                push(&mut out, &mut seen, [Lit::neg(a), Lit::neg(b)]);
            }
        }
        for q in downgrades(u, &initial, atom.name()) {
            let q = vars.pkg(q);
            push(&mut out, &mut seen, [Lit::neg(q)]);
        }
    }
    Ok(out)
}

/// `¬p ∨ ¬q ∨ nu_p` for every q of the same source in another version.
pub fn clausify_unaligned_packages(
    idx: &SourceClusterIndex,
    sources: &BTreeSet<String>,
    vars: &mut SatVars<'_>,
) -> (Vec<Clause>, Vec<(u64, Lit)>) {
    let mut hard = Vec::new();
    let mut soft = Vec::new();
    for cluster in sources
        .iter()
        .filter_map(|s| idx.get(s))
        .filter(|c| c.version_count() >= 2)
    {
        for (own, pkgs) in cluster.iter() {
            let others: Vec<PkgId> = cluster
                .iter()
                .filter(|(v, _)| *v != own)
                .flat_map(|(_, ps)| ps.iter().copied())
                .collect();
            for &p in pkgs {
                let nu = vars.var(VarTag::NuPkg(p));
                let pv = vars.pkg(p);
                for &q in &others {
                    let qv = vars.pkg(q);
                    hard.extend(Clause::new([Lit::neg(pv), Lit::neg(qv), Lit::pos(nu)]));
                }
                soft.push((1, Lit::neg(nu)));
            }
        }
    }
    (hard, soft)
}

/// `¬p_i ∨ ¬p_j ∨ u_{i,j}` for every cross-version pair, i < j.
pub fn clausify_unaligned_pairs(
    idx: &SourceClusterIndex,
    sources: &BTreeSet<String>,
    vars: &mut SatVars<'_>,
) -> (Vec<Clause>, Vec<(u64, Lit)>) {
    let mut hard = Vec::new();
    let mut soft = Vec::new();
    for cluster in sources
        .iter()
        .filter_map(|s| idx.get(s))
        .filter(|c| c.version_count() >= 2)
    {
        for (a, b) in cluster.cross_version_pairs() {
            let u = vars.var(VarTag::UPair(a, b));
            let (pa, pb) = (vars.pkg(a), vars.pkg(b));
            hard.extend(Clause::new([Lit::neg(pa), Lit::neg(pb), Lit::pos(u)]));
            soft.push((1, Lit::neg(u)));
        }
    }
    (hard, soft)
}

/// Base clauses plus the block for `kind`, which must be one of the two
/// clausal criteria (or `None` for the base alone).
pub fn build_formula(
    u: &Universe,
    req: &Request,
    idx: &SourceClusterIndex,
    kind: Option<CriterionKind>,
    sources: &BTreeSet<String>,
    lp: &LinearProgram,
) -> Result<WeightedFormula, EncodeError> {
    let mut vars = SatVars::new(lp);
    let mut hard = clausify_base(u, req, &mut vars)?;
    let (extra, soft) = match kind {
        None => (Vec::new(), Vec::new()),
        Some(CriterionKind::UnalignedPackages) => {
            clausify_unaligned_packages(idx, sources, &mut vars)
        }
        Some(CriterionKind::UnalignedPairs) => clausify_unaligned_pairs(idx, sources, &mut vars),
        Some(other) => panic!("{other} has no clausal encoding"),
    };
    hard.extend(extra);
    Ok(WeightedFormula {
        var_count: vars.count(),
        hard,
        soft,
    })
}

pub fn emit_wcnf(f: &WeightedFormula) -> String {
    let top = f.top();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "p wcnf {} {} {}",
        f.var_count,
        f.hard.len() + f.soft.len(),
        top
    );
    for c in &f.hard {
        let _ = write!(out, "{top}");
        for l in c.lits() {
            let _ = write!(out, " {}", l.dimacs());
        }
        out.push_str(" 0\n");
    }
    for &(w, l) in &f.soft {
        let _ = writeln!(out, "{w} {} 0", l.dimacs());
    }
    out
}
