//! 0-1 linear programs for package upgrades: base installability
//! constraints, the classic criteria and the four alignment criteria.
//!
//! Variables are allocated from one ordered sequence so the same inputs
//! always give the same handles. Package variables come first, in universe
//! order, with handles `1..=n`.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::criteria::{ClusterRestriction, CriterionKind};
use crate::criteria_spec::{CriterionSpec, Sign};
use crate::cudf::{
    build_cluster_index, expand_constraint, expand_disjunction, reduced_sources, Installation,
    PkgId, Request, SourceClusterIndex, SourceVersionToken, Universe, VersionConstraint,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EncodeError {
    #[error("request {verb} {atom} matches no package")]
    EmptyExpansion { verb: &'static str, atom: String },
    #[error("{0} cannot be maximized")]
    UnsupportedSign(CriterionKind),
    #[error("integer variable {0} has no defining equality")]
    UndefinedInteger(String),
    #[error("lexicographic weights overflow 64-bit coefficients")]
    WeightOverflow,
}

/// 1-based variable handle, stable for a given input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(u32);

impl VarId {
    pub fn handle(self) -> u32 {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 as usize - 1
    }

    pub fn from_index(i: usize) -> Self {
        Self(u32::try_from(i + 1).expect("variable count fits in u32"))
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum VarTag {
    Pkg(PkgId),
    Installed(String, SourceVersionToken),
    NuPkg(PkgId),
    UPair(PkgId, PkgId),
    NbInst(String),
    Delta(String),
    Nc(String),
    UCluster(String),
    CritAux(CriterionKind, String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Binary,
    Integer { lo: i64, hi: i64 },
}

impl Domain {
    pub fn bounds(self) -> (i64, i64) {
        match self {
            Domain::Binary => (0, 1),
            Domain::Integer { lo, hi } => (lo, hi),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub tag: VarTag,
    pub domain: Domain,
    /// Human-readable tag, used in the sidecar name map.
    pub label: String,
    /// Value in the initial installation; only package variables can be 1.
    pub initial: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cmp {
    Le,
    Ge,
    Eq,
}

impl Cmp {
    pub fn holds(self, lhs: i64, rhs: i64) -> bool {
        match self {
            Cmp::Le => lhs <= rhs,
            Cmp::Ge => lhs >= rhs,
            Cmp::Eq => lhs == rhs,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Cmp::Le => "<=",
            Cmp::Ge => ">=",
            Cmp::Eq => "=",
        }
    }
}

/// Merges coefficients per variable, drops zeros and sorts by handle.
pub(crate) fn normalize_terms(terms: impl IntoIterator<Item = (i64, VarId)>) -> Vec<(i64, VarId)> {
    let mut merged: BTreeMap<VarId, i64> = BTreeMap::new();
    for (c, v) in terms {
        *merged.entry(v).or_default() += c;
    }
    merged
        .into_iter()
        .filter(|&(_, c)| c != 0)
        .map(|(v, c)| (c, v))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LinearConstraint {
    terms: Vec<(i64, VarId)>,
    cmp: Cmp,
    rhs: i64,
}

impl LinearConstraint {
    pub fn new(terms: impl IntoIterator<Item = (i64, VarId)>, cmp: Cmp, rhs: i64) -> Self {
        Self {
            terms: normalize_terms(terms),
            cmp,
            rhs,
        }
    }

    pub fn terms(&self) -> &[(i64, VarId)] {
        &self.terms
    }

    pub fn cmp(&self) -> Cmp {
        self.cmp
    }

    pub fn rhs(&self) -> i64 {
        self.rhs
    }

    pub fn lhs(&self, values: &[i64]) -> i64 {
        self.terms.iter().map(|&(c, v)| c * values[v.index()]).sum()
    }

    pub fn is_satisfied(&self, values: &[i64]) -> bool {
        self.cmp.holds(self.lhs(values), self.rhs)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Objective {
    pub label: CriterionKind,
    pub restriction: ClusterRestriction,
    pub sense: Sign,
    pub terms: Vec<(i64, VarId)>,
}

impl Objective {
    /// Terms of the equivalent minimization.
    pub fn minimized_terms(&self) -> Vec<(i64, VarId)> {
        match self.sense {
            Sign::Minimize => self.terms.clone(),
            Sign::Maximize => self.terms.iter().map(|&(c, v)| (-c, v)).collect(),
        }
    }

    pub fn value(&self, values: &[i64]) -> i64 {
        self.terms.iter().map(|&(c, v)| c * values[v.index()]).sum()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LinearProgram {
    vars: Vec<Variable>,
    lookup: HashMap<VarTag, VarId>,
    constraints: Vec<LinearConstraint>,
    objectives: Vec<Objective>,
}

impl LinearProgram {
    pub fn variables(&self) -> &[Variable] {
        &self.vars
    }

    pub fn variable(&self, v: VarId) -> &Variable {
        &self.vars[v.index()]
    }

    pub fn var(&self, tag: &VarTag) -> Option<VarId> {
        self.lookup.get(tag).copied()
    }

    pub fn constraints(&self) -> &[LinearConstraint] {
        &self.constraints
    }

    pub fn objectives(&self) -> &[Objective] {
        &self.objectives
    }

    pub fn ids(&self) -> impl Iterator<Item = VarId> {
        (0..self.vars.len()).map(VarId::from_index)
    }

    pub fn count_vars(&self, pred: impl Fn(&VarTag) -> bool) -> usize {
        self.vars.iter().filter(|v| pred(&v.tag)).count()
    }

    /// Adds `objective_terms <= bound` as a hard constraint.
    pub fn bound_objective(&mut self, level: usize, bound: i64) {
        let terms = self.objectives[level].minimized_terms();
        self.constraints
            .push(LinearConstraint::new(terms, Cmp::Le, bound));
    }

    /// Packages set to 1 by `values`.
    pub fn decode_installation(&self, values: &[i64]) -> Installation {
        self.vars
            .iter()
            .zip(values)
            .filter_map(|(var, &x)| match var.tag {
                VarTag::Pkg(id) if x == 1 => Some(id),
                _ => None,
            })
            .collect()
    }

    /// Values for the package variables of `s`; auxiliaries are left at 0.
    pub fn pkg_values(&self, s: &Installation) -> Vec<i64> {
        self.vars
            .iter()
            .map(|var| match var.tag {
                VarTag::Pkg(id) => i64::from(s.contains(id)),
                _ => 0,
            })
            .collect()
    }

    pub fn is_feasible(&self, values: &[i64]) -> bool {
        self.vars.iter().zip(values).all(|(var, &x)| {
            let (lo, hi) = var.domain.bounds();
            (lo..=hi).contains(&x)
        }) && self.constraints.iter().all(|c| c.is_satisfied(values))
    }

    /// Name map lines, `handle<TAB>tag`.
    pub fn name_map(&self) -> String {
        self.ids()
            .map(|v| format!("{}\t{}\n", v.handle(), self.variable(v).label))
            .collect()
    }

    /// Eliminates the bounded integer variables by substituting their
    /// defining equalities, leaving a pure 0-1 program.
    pub fn to_binary(&self) -> Result<BinaryProgram, EncodeError> {
        BinaryProgram::from_lp(self)
    }
}

/// `Σ terms + constant`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LinExpr {
    pub terms: BTreeMap<VarId, i64>,
    pub constant: i64,
}

impl LinExpr {
    fn from_terms(terms: &[(i64, VarId)]) -> Self {
        Self {
            terms: terms.iter().map(|&(c, v)| (v, c)).collect(),
            constant: 0,
        }
    }

    fn add_scaled(&mut self, other: &LinExpr, factor: i64) {
        for (&v, &c) in &other.terms {
            let e = self.terms.entry(v).or_default();
            *e += factor * c;
            if *e == 0 {
                self.terms.remove(&v);
            }
        }
        self.constant += factor * other.constant;
    }

    /// Replaces `var` by `def` wherever it occurs.
    fn substitute(&mut self, var: VarId, def: &LinExpr) {
        if let Some(c) = self.terms.remove(&var) {
            self.add_scaled(def, c);
        }
    }

    pub fn eval(&self, values: &[i64]) -> i64 {
        self.constant
            + self
                .terms
                .iter()
                .map(|(v, c)| c * values[v.index()])
                .sum::<i64>()
    }

    /// Min and max over 0-1 values of the variables.
    pub fn range(&self) -> (i64, i64) {
        let neg: i64 = self.terms.values().filter(|&&c| c < 0).sum();
        let pos: i64 = self.terms.values().filter(|&&c| c > 0).sum();
        (self.constant + neg, self.constant + pos)
    }
}

/// A linear row `expr cmp rhs` with all constants moved to the right.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryRow {
    pub terms: Vec<(i64, VarId)>,
    pub cmp: Cmp,
    pub rhs: i64,
}

impl BinaryRow {
    fn from_expr(expr: &LinExpr, cmp: Cmp, rhs: i64) -> Self {
        Self {
            terms: expr.terms.iter().map(|(&v, &c)| (c, v)).collect(),
            cmp,
            rhs: rhs - expr.constant,
        }
    }

    pub fn is_satisfied(&self, values: &[i64]) -> bool {
        self.cmp.holds(
            self.terms.iter().map(|&(c, v)| c * values[v.index()]).sum(),
            self.rhs,
        )
    }
}

/// Pure 0-1 view of a [`LinearProgram`]. Handles are unchanged; eliminated
/// integer variables keep their handle but appear in no row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryProgram {
    pub var_count: usize,
    pub binary: Vec<bool>,
    pub initial: Vec<bool>,
    pub rows: Vec<BinaryRow>,
    /// Minimization form of each objective.
    pub objectives: Vec<LinExpr>,
    /// Eliminated variables with their expression over binaries.
    pub definitions: Vec<(VarId, LinExpr)>,
}

impl BinaryProgram {
    fn from_lp(lp: &LinearProgram) -> Result<Self, EncodeError> {
        let mut rows: Vec<(LinExpr, Cmp, i64)> = lp
            .constraints
            .iter()
            .map(|c| (LinExpr::from_terms(&c.terms), c.cmp, c.rhs))
            .collect();
        let mut objectives: Vec<LinExpr> = lp
            .objectives
            .iter()
            .map(|o| LinExpr::from_terms(&o.minimized_terms()))
            .collect();
        let mut definitions: Vec<(VarId, LinExpr)> = Vec::new();
        let mut bound_rows = Vec::new();

        for g in lp
            .ids()
            .filter(|&v| lp.variable(v).domain != Domain::Binary)
        {
            let pos = rows
                .iter()
                .position(|(e, cmp, _)| *cmp == Cmp::Eq && matches!(e.terms.get(&g), Some(1 | -1)))
                .ok_or_else(|| EncodeError::UndefinedInteger(lp.variable(g).label.clone()))?;
            let (mut expr, _, rhs) = rows.remove(pos);
            // coef*g + rest = rhs  =>  g = (rhs - rest) / coef, coef = ±1
            let coef = expr.terms.remove(&g).expect("checked above");
            expr.constant -= rhs;
            let mut def = LinExpr::default();
            def.add_scaled(&expr, -coef);
            for (e, _, _) in rows.iter_mut() {
                e.substitute(g, &def);
            }
            for o in objectives.iter_mut() {
                o.substitute(g, &def);
            }
            for (_, d) in definitions.iter_mut() {
                d.substitute(g, &def);
            }
            definitions.push((g, def));
        }
        for (g, def) in &definitions {
            let (lo, hi) = lp.variable(*g).domain.bounds();
            let (min, max) = def.range();
            if min < lo {
                bound_rows.push(BinaryRow::from_expr(def, Cmp::Ge, lo));
            }
            if max > hi {
                bound_rows.push(BinaryRow::from_expr(def, Cmp::Le, hi));
            }
        }

        let mut out_rows: Vec<BinaryRow> = rows
            .iter()
            .map(|(e, cmp, rhs)| BinaryRow::from_expr(e, *cmp, *rhs))
            .collect();
        out_rows.extend(bound_rows);
        Ok(Self {
            var_count: lp.vars.len(),
            binary: lp.vars.iter().map(|v| v.domain == Domain::Binary).collect(),
            initial: lp.vars.iter().map(|v| v.initial).collect(),
            rows: out_rows,
            objectives,
            definitions,
        })
    }

    /// Fills in eliminated variables from the binary values.
    pub fn complete(&self, values: &mut [i64]) {
        for (g, def) in &self.definitions {
            values[g.index()] = def.eval(values);
        }
    }
}

/// Which part of the work an alignment block has already emitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Block {
    InstalledVersions,
    Packages,
    Pairs,
    NbInst,
    VersionChanges,
    Clusters,
    Classic(CriterionKind),
}

/// Incremental builder for a [`LinearProgram`] over one universe.
pub struct Encoder<'a> {
    u: &'a Universe,
    idx: SourceClusterIndex,
    reduced: BTreeSet<String>,
    initial: Installation,
    lp: LinearProgram,
    done: HashSet<(Block, String)>,
}

impl<'a> Encoder<'a> {
    pub fn new(u: &'a Universe) -> Self {
        let idx = build_cluster_index(u);
        let reduced = reduced_sources(&idx);
        let initial = u.initial_installation();
        let mut enc = Self {
            u,
            idx,
            reduced,
            initial,
            lp: LinearProgram::default(),
            done: HashSet::new(),
        };
        for id in u.ids() {
            enc.var(VarTag::Pkg(id));
        }
        enc
    }

    pub fn index(&self) -> &SourceClusterIndex {
        &self.idx
    }

    pub fn finish(self) -> LinearProgram {
        self.lp
    }

    fn label(&self, tag: &VarTag) -> String {
        let pkg = |id: PkgId| {
            let p = self.u.get(id);
            format!("{},{}", p.name, p.version)
        };
        match tag {
            VarTag::Pkg(id) => format!("pkg({})", pkg(*id)),
            VarTag::Installed(s, v) => format!("i({s},{v})"),
            VarTag::NuPkg(id) => format!("nu_pkg({})", pkg(*id)),
            VarTag::UPair(a, b) => format!("u_pair({};{})", pkg(*a), pkg(*b)),
            VarTag::NbInst(s) => format!("nb_inst({s})"),
            VarTag::Delta(s) => format!("delta({s})"),
            VarTag::Nc(s) => format!("nc({s})"),
            VarTag::UCluster(s) => format!("u_cluster({s})"),
            VarTag::CritAux(k, key) => format!("crit_aux({},{key})", k.name()),
        }
    }

    fn var(&mut self, tag: VarTag) -> VarId {
        self.var_with(tag, Domain::Binary)
    }

    fn var_with(&mut self, tag: VarTag, domain: Domain) -> VarId {
        if let Some(&id) = self.lp.lookup.get(&tag) {
            return id;
        }
        let id = VarId::from_index(self.lp.vars.len());
        let initial = matches!(tag, VarTag::Pkg(p) if self.initial.contains(p));
        let label = self.label(&tag);
        self.lp.vars.push(Variable {
            tag: tag.clone(),
            domain,
            label,
            initial,
        });
        self.lp.lookup.insert(tag, id);
        id
    }

    fn pkg(&self, id: PkgId) -> VarId {
        self.lp.lookup[&VarTag::Pkg(id)]
    }

    fn push(&mut self, terms: impl IntoIterator<Item = (i64, VarId)>, cmp: Cmp, rhs: i64) {
        let c = LinearConstraint::new(terms, cmp, rhs);
        debug_assert!(!c.terms.is_empty() || c.cmp.holds(0, c.rhs));
        if !c.terms.is_empty() {
            self.lp.constraints.push(c);
        }
    }

    /// Returns true the first time a block is requested for `key`.
    fn first_time(&mut self, block: Block, key: &str) -> bool {
        self.done.insert((block, key.to_owned()))
    }

    /// Reduced sources admitted by `r`.
    pub fn sources_for(&self, r: &ClusterRestriction) -> BTreeSet<String> {
        self.reduced
            .iter()
            .filter(|s| r.admits(s))
            .cloned()
            .collect()
    }

    /// Dependencies, conflicts and the request.
    pub fn encode_base(&mut self, req: &Request) -> Result<(), EncodeError> {
        let u = self.u;
        let mut conflict_pairs: BTreeSet<(PkgId, PkgId)> = BTreeSet::new();
        for id in u.ids() {
            let p = self.pkg(id);
            let unit = u.get(id);
            for clause in unit.depends.clauses() {
                let sat = expand_disjunction(u, clause);
                if sat.contains(&id) {
                    continue;
                }
                let terms: Vec<_> = sat
                    .iter()
                    .map(|&q| (1, self.pkg(q)))
                    .chain([(-1, p)])
                    .collect();
                self.push(terms, Cmp::Ge, 0);
            }
            for atom in &unit.conflicts {
                for q in expand_constraint(u, atom) {
                    if q != id {
                        conflict_pairs.insert((id.min(q), id.max(q)));
                    }
                }
            }
        }
        for (a, b) in conflict_pairs {
            let terms = [(1, self.pkg(a)), (1, self.pkg(b))];
            self.push(terms, Cmp::Le, 1);
        }

        for atom in &req.install {
            let sat = non_empty(u, atom, "install")?;
            let terms: Vec<_> = sat.iter().map(|&q| (1, self.pkg(q))).collect();
            self.push(terms, Cmp::Ge, 1);
        }
        for atom in &req.remove {
            for q in expand_constraint(u, atom) {
                let x = self.pkg(q);
                self.push([(1, x)], Cmp::Le, 0);
            }
        }
        for atom in &req.upgrade {
            let sat = non_empty(u, atom, "upgrade")?;
            let terms: Vec<_> = sat.iter().map(|&q| (1, self.pkg(q))).collect();
            self.push(terms, Cmp::Eq, 1);
            for q in downgrades(u, &self.initial, atom.name()) {
                let x = self.pkg(q);
                self.push([(1, x)], Cmp::Le, 0);
            }
        }
        Ok(())
    }

    fn reduced_among(&self, sources: &BTreeSet<String>) -> Vec<String> {
        sources
            .iter()
            .filter(|s| self.reduced.contains(*s))
            .cloned()
            .collect()
    }

    /// `i_{s,v}` is 1 exactly when some package of P(s,v) is installed.
    pub fn encode_installed_version_vars(&mut self, sources: &BTreeSet<String>) {
        for s in &self.reduced_among(sources) {
            if !self.first_time(Block::InstalledVersions, s) {
                continue;
            }
            let cluster = self.idx.get(s).expect("reduced source is indexed").clone();
            for (v, pkgs) in cluster.iter() {
                let i = self.var(VarTag::Installed(s.clone(), v.clone()));
                let members: Vec<VarId> = pkgs.iter().map(|&p| self.pkg(p)).collect();
                // i <= Σ p
                self.push(members.iter().map(|&p| (-1, p)).chain([(1, i)]), Cmp::Le, 0);
                // p <= i
                for &p in &members {
                    self.push([(1, p), (-1, i)], Cmp::Le, 0);
                }
            }
        }
    }

    fn installed_var(&self, s: &str, v: &SourceVersionToken) -> VarId {
        self.lp.lookup[&VarTag::Installed(s.to_owned(), v.clone())]
    }

    pub fn encode_unaligned_packages(&mut self, sources: &BTreeSet<String>) -> Vec<(i64, VarId)> {
        self.encode_installed_version_vars(sources);
        let mut objective = Vec::new();
        for s in &self.reduced_among(sources) {
            let first = self.first_time(Block::Packages, s);
            let cluster = self.idx.get(s).expect("reduced source is indexed").clone();
            for (own, pkgs) in cluster.iter() {
                let others: Vec<VarId> = cluster
                    .versions()
                    .filter(|v| *v != own)
                    .map(|v| self.installed_var(s, v))
                    .collect();
                for &id in pkgs {
                    let nu = self.var(VarTag::NuPkg(id));
                    objective.push((1, nu));
                    if !first {
                        continue;
                    }
                    let p = self.pkg(id);
                    self.push([(1, nu), (-1, p)], Cmp::Le, 0);
                    self.push(others.iter().map(|&i| (-1, i)).chain([(1, nu)]), Cmp::Le, 0);
                    // nu + 1 >= p + i  <=>  nu - p - i >= -1
                    for &i in &others {
                        self.push([(1, nu), (-1, p), (-1, i)], Cmp::Ge, -1);
                    }
                }
            }
        }
        objective
    }

    pub fn encode_unaligned_pairs(&mut self, sources: &BTreeSet<String>) -> Vec<(i64, VarId)> {
        let mut objective = Vec::new();
        for s in &self.reduced_among(sources) {
            let first = self.first_time(Block::Pairs, s);
            let pairs = self
                .idx
                .get(s)
                .expect("reduced source is indexed")
                .cross_version_pairs();
            for (a, b) in pairs {
                let u = self.var(VarTag::UPair(a, b));
                objective.push((1, u));
                if !first {
                    continue;
                }
                let (pa, pb) = (self.pkg(a), self.pkg(b));
                self.push([(1, u), (-1, pa)], Cmp::Le, 0);
                self.push([(1, u), (-1, pb)], Cmp::Le, 0);
                self.push([(1, u), (-1, pa), (-1, pb)], Cmp::Ge, -1);
            }
        }
        objective
    }

    /// `nb_{inst,s} = Σ_v i_{s,v}`; returns the variable and |V(s)|.
    fn nb_inst(&mut self, s: &str) -> (VarId, i64) {
        let cluster = self.idx.get(s).expect("reduced source is indexed").clone();
        let size = cluster.version_count() as i64;
        let nb = self.var_with(
            VarTag::NbInst(s.to_owned()),
            Domain::Integer { lo: 0, hi: size },
        );
        if self.first_time(Block::NbInst, s) {
            let terms: Vec<_> = cluster
                .versions()
                .map(|v| (-1, self.installed_var(s, v)))
                .chain([(1, nb)])
                .collect();
            self.push(terms, Cmp::Eq, 0);
        }
        (nb, size)
    }

    pub fn encode_version_changes(&mut self, sources: &BTreeSet<String>) -> Vec<(i64, VarId)> {
        self.encode_installed_version_vars(sources);
        let mut objective = Vec::new();
        for s in &self.reduced_among(sources) {
            let (nb, size) = self.nb_inst(s);
            let delta = self.var(VarTag::Delta(s.clone()));
            let nc = self.var_with(VarTag::Nc(s.clone()), Domain::Integer { lo: 0, hi: size });
            objective.push((1, nc));
            if !self.first_time(Block::VersionChanges, s) {
                continue;
            }
            // |V(s)|·δ >= nb
            self.push([(size, delta), (-1, nb)], Cmp::Ge, 0);
            // nb >= δ
            self.push([(1, nb), (-1, delta)], Cmp::Ge, 0);
            // nc = nb - δ
            self.push([(1, nc), (-1, nb), (1, delta)], Cmp::Eq, 0);
        }
        objective
    }

    pub fn encode_unaligned_clusters(&mut self, sources: &BTreeSet<String>) -> Vec<(i64, VarId)> {
        self.encode_installed_version_vars(sources);
        let mut objective = Vec::new();
        for s in &self.reduced_among(sources) {
            let (nb, size) = self.nb_inst(s);
            let us = self.var(VarTag::UCluster(s.clone()));
            objective.push((1, us));
            if !self.first_time(Block::Clusters, s) {
                continue;
            }
            // |V(s)|·u + 1 >= nb
            self.push([(size, us), (-1, nb)], Cmp::Ge, -1);
            // nb >= 2·u
            self.push([(1, nb), (-2, us)], Cmp::Ge, 0);
        }
        objective
    }

    /// Indicator encodings of the classic criteria, one auxiliary per
    /// counted unit, each forced to its exact value.
    pub fn encode_classic_criterion(&mut self, kind: CriterionKind) -> Vec<(i64, VarId)> {
        assert!(!kind.is_alignment(), "{kind} is not a classic criterion");
        let u = self.u;
        let first = self.first_time(Block::Classic(kind), "");
        let mut objective = Vec::new();
        let mut aux = |enc: &mut Self, key: String| {
            let a = enc.var(VarTag::CritAux(kind, key));
            objective.push((1, a));
            a
        };
        let names: Vec<String> = u.names().map(str::to_owned).collect();
        match kind {
            CriterionKind::Removed | CriterionKind::New => {
                for n in &names {
                    let was_installed =
                        u.versions_of(n).iter().any(|&id| self.initial.contains(id));
                    if was_installed != (kind == CriterionKind::Removed) {
                        continue;
                    }
                    let xs: Vec<VarId> = u.versions_of(n).iter().map(|&id| self.pkg(id)).collect();
                    let a = aux(self, n.clone());
                    if !first {
                        continue;
                    }
                    if kind == CriterionKind::Removed {
                        // a = 1 iff no version installed
                        self.push(xs.iter().map(|&x| (1, x)).chain([(1, a)]), Cmp::Ge, 1);
                        for &x in &xs {
                            self.push([(1, a), (1, x)], Cmp::Le, 1);
                        }
                    } else {
                        // a = 1 iff some version installed
                        for &x in &xs {
                            self.push([(1, a), (-1, x)], Cmp::Ge, 0);
                        }
                        self.push(xs.iter().map(|&x| (-1, x)).chain([(1, a)]), Cmp::Le, 0);
                    }
                }
            }
            CriterionKind::Changed => {
                for n in &names {
                    let versions: Vec<(VarId, bool)> = u
                        .versions_of(n)
                        .iter()
                        .map(|&id| (self.pkg(id), self.initial.contains(id)))
                        .collect();
                    let a = aux(self, n.clone());
                    if !first {
                        continue;
                    }
                    // a >= [x differs from its initial value] for each version
                    for &(x, was) in &versions {
                        if was {
                            self.push([(1, a), (1, x)], Cmp::Ge, 1);
                        } else {
                            self.push([(1, a), (-1, x)], Cmp::Ge, 0);
                        }
                    }
                    // a <= Σ_{not initial} x + Σ_{initial} (1 - x)
                    let kept = versions.iter().filter(|(_, was)| *was).count() as i64;
                    let terms = versions
                        .iter()
                        .map(|&(x, was)| (if was { 1 } else { -1 }, x))
                        .chain([(1, a)]);
                    self.push(terms, Cmp::Le, kept);
                }
            }
            CriterionKind::NotUpToDate => {
                for n in &names {
                    let ids = u.versions_of(n);
                    let Some((&newest, older)) = ids.split_last() else {
                        continue;
                    };
                    if older.is_empty() {
                        continue;
                    }
                    let top = self.pkg(newest);
                    let olds: Vec<VarId> = older.iter().map(|&id| self.pkg(id)).collect();
                    let a = aux(self, n.clone());
                    if !first {
                        continue;
                    }
                    // a = 1 iff some older version is installed and the newest is not
                    for &x in &olds {
                        self.push([(1, a), (-1, x), (1, top)], Cmp::Ge, 0);
                    }
                    self.push([(1, a), (1, top)], Cmp::Le, 1);
                    self.push(olds.iter().map(|&x| (-1, x)).chain([(1, a)]), Cmp::Le, 0);
                }
            }
            CriterionKind::UnsatRecommends => {
                for id in u.ids() {
                    let unit = u.get(id);
                    let Some(rec) = &unit.recommends else {
                        continue;
                    };
                    for (k, clause) in rec.clauses().iter().enumerate() {
                        let sat = expand_disjunction(u, clause);
                        if sat.contains(&id) {
                            continue;
                        }
                        let p = self.pkg(id);
                        let qs: Vec<VarId> = sat.iter().map(|&q| self.pkg(q)).collect();
                        let a = aux(self, format!("{}/{}/{}", unit.name, unit.version, k));
                        if !first {
                            continue;
                        }
                        // a = 1 iff p installed and no satisfier installed
                        self.push(
                            qs.iter().map(|&q| (1, q)).chain([(1, a), (-1, p)]),
                            Cmp::Ge,
                            0,
                        );
                        self.push([(1, a), (-1, p)], Cmp::Le, 0);
                        for &q in &qs {
                            self.push([(1, a), (1, q)], Cmp::Le, 1);
                        }
                    }
                }
            }
            _ => unreachable!(),
        }
        objective
    }

    /// Adds the block for `kind` and appends it to the objective stack.
    pub fn add_objective(
        &mut self,
        kind: CriterionKind,
        sense: Sign,
        restriction: ClusterRestriction,
    ) -> Result<(), EncodeError> {
        if kind.is_alignment() && sense == Sign::Maximize {
            return Err(EncodeError::UnsupportedSign(kind));
        }
        let sources = self.sources_for(&restriction);
        let terms = match kind {
            CriterionKind::UnalignedPackages => self.encode_unaligned_packages(&sources),
            CriterionKind::UnalignedPairs => self.encode_unaligned_pairs(&sources),
            CriterionKind::UnalignedVersionChanges => self.encode_version_changes(&sources),
            CriterionKind::UnalignedClusters => self.encode_unaligned_clusters(&sources),
            classic => self.encode_classic_criterion(classic),
        };
        self.lp.objectives.push(Objective {
            label: kind,
            restriction,
            sense,
            terms: normalize_terms(terms),
        });
        Ok(())
    }
}

fn non_empty(
    u: &Universe,
    atom: &VersionConstraint,
    verb: &'static str,
) -> Result<BTreeSet<PkgId>, EncodeError> {
    let sat = expand_constraint(u, atom);
    if sat.is_empty() {
        return Err(EncodeError::EmptyExpansion {
            verb,
            atom: atom.to_string(),
        });
    }
    Ok(sat)
}

/// Versions of `name` strictly older than every initially installed one.
pub fn downgrades(u: &Universe, initial: &Installation, name: &str) -> Vec<PkgId> {
    let ids = u.versions_of(name);
    let Some(oldest_installed) = ids
        .iter()
        .filter(|&&id| initial.contains(id))
        .map(|&id| u.get(id).version)
        .min()
    else {
        return Vec::new();
    };
    ids.iter()
        .copied()
        .filter(|&id| u.get(id).version < oldest_installed)
        .collect()
}

/// Base constraints only.
pub fn encode_base(u: &Universe, req: &Request) -> Result<LinearProgram, EncodeError> {
    let mut enc = Encoder::new(u);
    enc.encode_base(req)?;
    Ok(enc.finish())
}

/// Base constraints followed by one block per criterion, in stack order.
pub fn assemble(
    u: &Universe,
    req: &Request,
    spec: &CriterionSpec,
) -> Result<LinearProgram, EncodeError> {
    let mut enc = Encoder::new(u);
    enc.encode_base(req)?;
    for c in spec.items() {
        enc.add_objective(c.kind, c.sign, c.restriction.clone())?;
    }
    Ok(enc.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criteria_spec::parse_criteria;
    use crate::cudf::parse_cudf;

    fn lp_of(text: &str) -> LinearProgram {
        let (u, req) = parse_cudf(text).unwrap();
        encode_base(&u, &req).unwrap()
    }

    type Row = (Vec<(i64, u32)>, Cmp, i64);

    fn rows(lp: &LinearProgram) -> Vec<Row> {
        lp.constraints()
            .iter()
            .map(|c| {
                (
                    c.terms().iter().map(|&(k, v)| (k, v.handle())).collect(),
                    c.cmp(),
                    c.rhs(),
                )
            })
            .collect()
    }

    #[test]
    fn depends_shape() {
        let lp = lp_of("package: a\nversion: 1\ndepends: b\n\npackage: b\nversion: 1\n");
        assert_eq!(rows(&lp), vec![(vec![(-1, 1), (1, 2)], Cmp::Ge, 0)]);
    }

    #[test]
    fn self_conflict_is_excluded() {
        let lp = lp_of("package: a\nversion: 1\nconflicts: a\n\npackage: a\nversion: 2\n");
        assert_eq!(rows(&lp), vec![(vec![(1, 1), (1, 2)], Cmp::Le, 1)]);
    }

    #[test]
    fn empty_install_is_infeasible() {
        let (u, req) = parse_cudf("package: a\nversion: 1\n\nrequest: x\ninstall: z\n").unwrap();
        assert_eq!(
            encode_base(&u, &req),
            Err(EncodeError::EmptyExpansion {
                verb: "install",
                atom: "z".into()
            })
        );
        let (u, req) =
            parse_cudf("package: a\nversion: 1\n\nrequest: x\nupgrade: a > 1\n").unwrap();
        assert!(matches!(
            encode_base(&u, &req),
            Err(EncodeError::EmptyExpansion {
                verb: "upgrade",
                ..
            })
        ));
    }

    #[test]
    fn upgrade_is_exactly_one_without_downgrade() {
        let text = "package: a\nversion: 1\n\npackage: a\nversion: 2\ninstalled: true\n\npackage: a\nversion: 3\n\n\
                    request: x\nupgrade: a\n";
        let lp = lp_of(text);
        assert_eq!(
            rows(&lp),
            vec![
                (vec![(1, 1), (1, 2), (1, 3)], Cmp::Eq, 1),
                (vec![(1, 1)], Cmp::Le, 0)
            ]
        );
    }

    #[test]
    fn remove_fixes_to_zero() {
        let lp = lp_of(
            "package: a\nversion: 1\n\npackage: a\nversion: 2\n\nrequest: x\nremove: a >= 2\n",
        );
        assert_eq!(rows(&lp), vec![(vec![(1, 2)], Cmp::Le, 0)]);
    }

    fn two_version_source() -> (Universe, Request) {
        parse_cudf(
            "package: a\nversion: 1\nsource: s\nsourceversion: x\n\n\
             package: a\nversion: 2\nsource: s\nsourceversion: x\n\n\
             package: b\nversion: 1\nsource: s\nsourceversion: y\n\n\
             package: c\nversion: 1\nsource: t\nsourceversion: x\n",
        )
        .unwrap()
    }

    #[test]
    fn installed_version_var_shapes() {
        let (u, _) = two_version_source();
        let mut enc = Encoder::new(&u);
        enc.encode_installed_version_vars(&BTreeSet::from(["s".to_owned(), "t".to_owned()]));
        let lp = enc.finish();
        // handles: a1=1 a2=2 b1=3 c1=4, i(s,x)=5, i(s,y)=6; t is not reduced
        assert_eq!(lp.count_vars(|t| matches!(t, VarTag::Installed(..))), 2);
        assert_eq!(
            rows(&lp),
            vec![
                (vec![(-1, 1), (-1, 2), (1, 5)], Cmp::Le, 0),
                (vec![(1, 1), (-1, 5)], Cmp::Le, 0),
                (vec![(1, 2), (-1, 5)], Cmp::Le, 0),
                (vec![(-1, 3), (1, 6)], Cmp::Le, 0),
                (vec![(1, 3), (-1, 6)], Cmp::Le, 0),
            ]
        );
        // a1 = 1 forces i(s,x) = 1; nothing installed forces it to 0
        let ix = VarId(5).index();
        let mut vals = vec![1, 0, 0, 0, 0, 0];
        assert!(!lp.is_feasible(&vals));
        vals[ix] = 1;
        assert!(lp.is_feasible(&vals));
        let mut none = vec![0; 6];
        none[ix] = 1;
        assert!(!lp.is_feasible(&none));
    }

    #[test]
    fn version_change_and_cluster_shapes_use_plain_big_m() {
        let (u, _) = two_version_source();
        let spec = parse_criteria("-unaligned(version_changes),-unaligned(clusters)").unwrap();
        let lp = assemble(&u, &Request::default(), &spec).unwrap();
        let nb = lp.var(&VarTag::NbInst("s".into())).unwrap();
        assert_eq!(lp.variable(nb).domain, Domain::Integer { lo: 0, hi: 2 });
        let delta = lp.var(&VarTag::Delta("s".into())).unwrap();
        let us = lp.var(&VarTag::UCluster("s".into())).unwrap();
        let has = |terms: &[(i64, VarId)], cmp, rhs| {
            lp.constraints().iter().any(|c| {
                c.terms() == normalize_terms(terms.iter().copied())
                    && c.cmp() == cmp
                    && c.rhs() == rhs
            })
        };
        assert!(has(&[(2, delta), (-1, nb)], Cmp::Ge, 0));
        assert!(has(&[(2, us), (-1, nb)], Cmp::Ge, -1));
        assert!(has(&[(1, nb), (-2, us)], Cmp::Ge, 0));
        // nb defined once even though two blocks use it
        assert_eq!(
            lp.constraints()
                .iter()
                .filter(|c| c.cmp() == Cmp::Eq && c.terms().contains(&(1, nb)))
                .count(),
            1
        );
    }

    #[test]
    fn single_version_sources_add_nothing() {
        let (u, _) = parse_cudf("package: a\nversion: 1\nsource: s\nsourceversion: x\n").unwrap();
        let spec = parse_criteria("-unaligned(packages),-unaligned(pairs),-unaligned(version_changes),-unaligned(clusters)").unwrap();
        let lp = assemble(&u, &Request::default(), &spec).unwrap();
        assert_eq!(lp.variables().len(), 1);
        assert!(lp.constraints().is_empty());
        assert!(lp.objectives().iter().all(|o| o.terms.is_empty()));
    }

    #[test]
    fn maximizing_alignment_is_refused() {
        let (u, req) = two_version_source();
        let mut enc = Encoder::new(&u);
        enc.encode_base(&req).unwrap();
        assert_eq!(
            enc.add_objective(
                CriterionKind::UnalignedPairs,
                Sign::Maximize,
                ClusterRestriction::all()
            ),
            Err(EncodeError::UnsupportedSign(CriterionKind::UnalignedPairs))
        );
        assert!(enc
            .add_objective(
                CriterionKind::New,
                Sign::Maximize,
                ClusterRestriction::all()
            )
            .is_ok());
    }

    #[test]
    fn integer_elimination_yields_pure_binary_rows() {
        let (u, _) = two_version_source();
        let spec = parse_criteria("-unaligned(version_changes)").unwrap();
        let lp = assemble(&u, &Request::default(), &spec).unwrap();
        let bp = lp.to_binary().unwrap();
        let nb = lp.var(&VarTag::NbInst("s".into())).unwrap();
        let nc = lp.var(&VarTag::Nc("s".into())).unwrap();
        assert!(bp
            .rows
            .iter()
            .all(|r| r.terms.iter().all(|&(_, v)| v != nb && v != nc)));
        assert!(bp.objectives[0].terms.keys().all(|&v| bp.binary[v.index()]));
        assert_eq!(bp.definitions.len(), 2);
    }
}
