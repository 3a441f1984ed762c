//! Exact depth-first branch-and-bound over 0-1 programs, the lexicographic
//! driver on top of it, a brute-force reference solver and a solution
//! checker.
//!
//! Search works on the [`BinaryProgram`] view, so bounded integer
//! auxiliaries never get branched on. Every row is kept as `Σ a·x >= b` with
//! its slack (`max activity - b`); a row with negative slack is a conflict
//! and a row whose slack is smaller than `|a|` fixes `x`. The incumbent is
//! enforced through one extra row, `objective <= best - 1`.

use std::fmt;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::criteria::measure;
use crate::criteria_spec::{CriterionSpec, Sign};
use crate::cudf::{
    build_cluster_index, expand_constraint, expand_disjunction, Installation, PkgId, Request,
    Universe, VersionConstraint,
};
use crate::milp::{downgrades, BinaryProgram, Cmp, EncodeError, LinExpr, LinearProgram};

/// Default cap for [`brute_force`].
pub const BRUTE_FORCE_CAP: usize = 20;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error("malformed program: {0}")]
    Malformed(String),
    #[error("{packages} packages exceed the brute-force cap of {cap}")]
    TooLarge { packages: usize, cap: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveBudget {
    pub max_nodes: u64,
    pub max_time: Duration,
}

impl SolveBudget {
    pub fn new(max_nodes: u64, max_time: Duration) -> Option<Self> {
        (max_nodes > 0 && !max_time.is_zero()).then_some(Self {
            max_nodes,
            max_time,
        })
    }
}

impl Default for SolveBudget {
    fn default() -> Self {
        Self {
            max_nodes: 10_000_000,
            max_time: Duration::from_secs(60),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    BudgetExceeded,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::BudgetExceeded => "budget exceeded",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveResult {
    pub status: SolveStatus,
    /// Values of every program variable, when optimal. Unset for brute force.
    pub values: Option<Vec<i64>>,
    pub installation: Option<Installation>,
    /// One value per solved level, in the objective's own sense.
    pub objective_values: Vec<i64>,
    pub nodes: u64,
    pub elapsed: Duration,
    pub level_elapsed: Vec<Duration>,
}

impl SolveResult {
    fn without_solution(
        status: SolveStatus,
        nodes: u64,
        elapsed: Duration,
        level_elapsed: Vec<Duration>,
    ) -> Self {
        Self {
            status,
            values: None,
            installation: None,
            objective_values: Vec::new(),
            nodes,
            elapsed,
            level_elapsed,
        }
    }
}

const UNSET: i8 = -1;

struct Row {
    terms: Vec<(i64, usize)>,
    rhs: i64,
}

struct Search<'a> {
    rows: Vec<Row>,
    occurs: Vec<Vec<(usize, i64)>>,
    slack: Vec<i64>,
    value: Vec<i8>,
    trail: Vec<usize>,
    order: Vec<usize>,
    preferred: Vec<i8>,
    objective: &'a LinExpr,
    objective_row: usize,
    best: Option<(i64, Vec<i8>)>,
    nodes: u64,
    budget: SolveBudget,
    started: Instant,
    exhausted: bool,
}

impl<'a> Search<'a> {
    fn new(
        bp: &BinaryProgram,
        extra: &[(LinExpr, i64)],
        objective: &'a LinExpr,
        budget: SolveBudget,
    ) -> Self {
        let n = bp.var_count;
        let mut rows = Vec::new();
        let mut add = |terms: Vec<(i64, usize)>, cmp: Cmp, rhs: i64| {
            let neg = || {
                (
                    terms.iter().map(|&(c, v)| (-c, v)).collect::<Vec<_>>(),
                    -rhs,
                )
            };
            match cmp {
                Cmp::Ge => rows.push(Row {
                    terms: terms.clone(),
                    rhs,
                }),
                Cmp::Le => {
                    let (t, r) = neg();
                    rows.push(Row { terms: t, rhs: r });
                }
                Cmp::Eq => {
                    let (t, r) = neg();
                    rows.push(Row {
                        terms: terms.clone(),
                        rhs,
                    });
                    rows.push(Row { terms: t, rhs: r });
                }
            }
        };
        for r in &bp.rows {
            add(
                r.terms.iter().map(|&(c, v)| (c, v.index())).collect(),
                r.cmp,
                r.rhs,
            );
        }
        for (expr, bound) in extra {
            add(
                expr.terms.iter().map(|(v, &c)| (c, v.index())).collect(),
                Cmp::Le,
                bound - expr.constant,
            );
        }
        // objective <= best - 1, inactive until an incumbent exists
        let objective_row = rows.len();
        rows.push(Row {
            terms: objective
                .terms
                .iter()
                .map(|(v, &c)| (-c, v.index()))
                .collect(),
            rhs: i64::MIN / 4,
        });

        let mut occurs = vec![Vec::new(); n];
        let mut slack = Vec::with_capacity(rows.len());
        for (r, row) in rows.iter().enumerate() {
            for &(c, v) in &row.terms {
                occurs[v].push((r, c));
            }
            slack.push(row.terms.iter().map(|&(c, _)| c.max(0)).sum::<i64>() - row.rhs);
        }

        let mut order: Vec<usize> = (0..n).filter(|&i| bp.binary[i]).collect();
        order.sort_by_key(|&i| (!objective.terms.keys().any(|v| v.index() == i), i));
        let preferred = (0..n)
            .map(|i| {
                let coef = objective
                    .terms
                    .iter()
                    .find(|(v, _)| v.index() == i)
                    .map_or(0, |(_, &c)| c);
                match (bp.initial[i], coef) {
                    (true, _) => 1,
                    (false, c) if c < 0 => 1,
                    _ => 0,
                }
            })
            .collect();

        Self {
            rows,
            occurs,
            slack,
            value: vec![UNSET; n],
            trail: Vec::new(),
            order,
            preferred,
            objective,
            objective_row,
            best: None,
            nodes: 0,
            budget,
            started: Instant::now(),
            exhausted: false,
        }
    }

    fn assign(&mut self, v: usize, val: i8) {
        self.value[v] = val;
        self.trail.push(v);
        for &(r, c) in &self.occurs[v] {
            self.slack[r] += c * i64::from(val) - c.max(0);
        }
    }

    fn undo(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let v = self.trail.pop().expect("trail longer than mark");
            let val = i64::from(self.value[v]);
            for &(r, c) in &self.occurs[v] {
                self.slack[r] -= c * val - c.max(0);
            }
            self.value[v] = UNSET;
        }
    }

    /// Unit propagation from the given rows. False on conflict.
    fn propagate(&mut self, mut queue: Vec<usize>) -> bool {
        while let Some(r) = queue.pop() {
            let slack = self.slack[r];
            if slack < 0 {
                return false;
            }
            for k in 0..self.rows[r].terms.len() {
                let (c, v) = self.rows[r].terms[k];
                if self.value[v] != UNSET || c.abs() <= slack {
                    continue;
                }
                self.assign(v, i8::from(c > 0));
                queue.extend(self.occurs[v].iter().map(|&(r2, _)| r2));
            }
        }
        true
    }

    fn branch(&mut self, v: usize, val: i8) -> bool {
        self.assign(v, val);
        let rows = self.occurs[v].iter().map(|&(r, _)| r).collect();
        self.propagate(rows)
    }

    fn out_of_budget(&mut self) -> bool {
        if self.nodes >= self.budget.max_nodes
            || (self.nodes.is_multiple_of(256) && self.started.elapsed() >= self.budget.max_time)
        {
            self.exhausted = true;
        }
        self.exhausted
    }

    fn dfs(&mut self, pos: usize) {
        self.nodes += 1;
        if self.out_of_budget() || !self.propagate(vec![self.objective_row]) {
            return;
        }
        let Some(k) = (pos..self.order.len()).find(|&k| self.value[self.order[k]] == UNSET) else {
            self.record_incumbent();
            return;
        };
        let v = self.order[k];
        let first = self.preferred[v];
        for val in [first, 1 - first] {
            let mark = self.trail.len();
            if self.branch(v, val) {
                self.dfs(k + 1);
            }
            self.undo(mark);
            if self.exhausted {
                return;
            }
        }
    }

    fn record_incumbent(&mut self) {
        let value = self.objective.constant
            + self
                .objective
                .terms
                .iter()
                .map(|(v, &c)| c * i64::from(self.value[v.index()]))
                .sum::<i64>();
        let bound = value - 1 - self.objective.constant;
        // row reads -Σ c·x >= -bound
        let r = self.objective_row;
        let old = self.rows[r].rhs;
        self.rows[r].rhs = -bound;
        self.slack[r] += old - self.rows[r].rhs;
        self.best = Some((value, self.value.clone()));
    }

    fn run(mut self) -> (Option<(i64, Vec<i8>)>, bool, u64) {
        let all: Vec<usize> = (0..self.rows.len()).collect();
        if self.propagate(all) {
            self.dfs(0);
        }
        (self.best, self.exhausted, self.nodes)
    }
}

fn validate(lp: &LinearProgram) -> Result<(), SolveError> {
    let n = lp.variables().len();
    let bad = lp
        .constraints()
        .iter()
        .flat_map(|c| c.terms().iter().map(|&(_, v)| v))
        .chain(
            lp.objectives()
                .iter()
                .flat_map(|o| o.terms.iter().map(|&(_, v)| v)),
        )
        .find(|v| v.index() >= n);
    match bad {
        Some(v) => Err(SolveError::Malformed(format!("undeclared variable {v}"))),
        None => Ok(()),
    }
}

fn finish_values(bp: &BinaryProgram, raw: &[i8]) -> Vec<i64> {
    let mut values: Vec<i64> = raw.iter().map(|&x| i64::from(x.max(0))).collect();
    bp.complete(&mut values);
    values
}

/// Optimizes objective `level` alone subject to the hard constraints.
pub fn solve_single(
    lp: &LinearProgram,
    level: usize,
    budget: SolveBudget,
) -> Result<SolveResult, SolveError> {
    validate(lp)?;
    if level >= lp.objectives().len() {
        return Err(SolveError::Malformed(format!(
            "no objective at level {level}"
        )));
    }
    let started = Instant::now();
    let bp = lp.to_binary()?;
    let (best, exhausted, nodes) = Search::new(&bp, &[], &bp.objectives[level], budget).run();
    let elapsed = started.elapsed();
    Ok(match (best, exhausted) {
        (_, true) => SolveResult::without_solution(
            SolveStatus::BudgetExceeded,
            nodes,
            elapsed,
            vec![elapsed],
        ),
        (None, false) => {
            SolveResult::without_solution(SolveStatus::Infeasible, nodes, elapsed, vec![elapsed])
        }
        (Some((_, raw)), false) => {
            let values = finish_values(&bp, &raw);
            debug_assert!(lp.is_feasible(&values));
            SolveResult {
                status: SolveStatus::Optimal,
                installation: Some(lp.decode_installation(&values)),
                objective_values: vec![lp.objectives()[level].value(&values)],
                values: Some(values),
                nodes,
                elapsed,
                level_elapsed: vec![elapsed],
            }
        }
    })
}

/// Optimizes each level in turn, holding earlier levels at their optima.
pub fn solve_lex(lp: &LinearProgram, budget: SolveBudget) -> Result<SolveResult, SolveError> {
    validate(lp)?;
    if lp.objectives().is_empty() {
        return Err(SolveError::Malformed("no objectives".into()));
    }
    let started = Instant::now();
    let bp = lp.to_binary()?;
    let mut fixed: Vec<(LinExpr, i64)> = Vec::new();
    let mut nodes = 0;
    let mut level_elapsed = Vec::new();
    let mut last = None;
    for objective in &bp.objectives {
        let level_start = Instant::now();
        let (best, exhausted, n) = Search::new(&bp, &fixed, objective, budget).run();
        nodes += n;
        level_elapsed.push(level_start.elapsed());
        let status = match (&best, exhausted) {
            (_, true) => Some(SolveStatus::BudgetExceeded),
            (None, false) => Some(SolveStatus::Infeasible),
            _ => None,
        };
        if let Some(status) = status {
            return Ok(SolveResult::without_solution(
                status,
                nodes,
                started.elapsed(),
                level_elapsed,
            ));
        }
        let (value, raw) = best.expect("checked above");
        fixed.push((objective.clone(), value));
        last = Some(raw);
    }
    let values = finish_values(&bp, &last.expect("at least one level"));
    debug_assert!(lp.is_feasible(&values));
    Ok(SolveResult {
        status: SolveStatus::Optimal,
        installation: Some(lp.decode_installation(&values)),
        objective_values: lp.objectives().iter().map(|o| o.value(&values)).collect(),
        values: Some(values),
        nodes,
        elapsed: started.elapsed(),
        level_elapsed,
    })
}

/// Why an installation does not satisfy a universe and request.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    UnmetDependency {
        package: PkgId,
        clause: Vec<VersionConstraint>,
    },
    Conflict {
        package: PkgId,
        other: PkgId,
    },
    InstallUnsatisfied(VersionConstraint),
    RemoveViolated {
        atom: VersionConstraint,
        package: PkgId,
    },
    UpgradeNotExactlyOne {
        atom: VersionConstraint,
        installed: usize,
    },
    Downgrade(PkgId),
}

impl Violation {
    pub fn describe(&self, u: &Universe) -> String {
        let p = |id: &PkgId| format!("{} {}", u.get(*id).name, u.get(*id).version);
        match self {
            Violation::UnmetDependency { package, clause } => {
                let alts: Vec<String> = clause.iter().map(ToString::to_string).collect();
                format!(
                    "{} depends on {} which is not installed",
                    p(package),
                    alts.join(" | ")
                )
            }
            Violation::Conflict { package, other } => {
                format!("{} conflicts with installed {}", p(package), p(other))
            }
            Violation::InstallUnsatisfied(a) => format!("install request {a} not satisfied"),
            Violation::RemoveViolated { atom, package } => {
                format!("remove request {atom} but {} installed", p(package))
            }
            Violation::UpgradeNotExactlyOne { atom, installed } => {
                format!("upgrade request {atom} needs exactly one version, found {installed}")
            }
            Violation::Downgrade(id) => {
                format!("{} is older than the initially installed version", p(id))
            }
        }
    }
}

/// Checks dependencies, conflicts and the request against `s` and lists
/// every violation found.
pub fn verify(u: &Universe, req: &Request, s: &Installation) -> (bool, Vec<Violation>) {
    let mut out = Vec::new();
    for id in s.iter() {
        let unit = u.get(id);
        for clause in unit.depends.clauses() {
            if !expand_disjunction(u, clause).iter().any(|&q| s.contains(q)) {
                out.push(Violation::UnmetDependency {
                    package: id,
                    clause: clause.clone(),
                });
            }
        }
        for atom in &unit.conflicts {
            for q in expand_constraint(u, atom) {
                if q != id && s.contains(q) {
                    let (a, b) = (id.min(q), id.max(q));
                    let v = Violation::Conflict {
                        package: a,
                        other: b,
                    };
                    if !out.contains(&v) {
                        out.push(v);
                    }
                }
            }
        }
    }
    for atom in &req.install {
        if !expand_constraint(u, atom).iter().any(|&q| s.contains(q)) {
            out.push(Violation::InstallUnsatisfied(atom.clone()));
        }
    }
    for atom in &req.remove {
        for q in expand_constraint(u, atom)
            .into_iter()
            .filter(|&q| s.contains(q))
        {
            out.push(Violation::RemoveViolated {
                atom: atom.clone(),
                package: q,
            });
        }
    }
    let initial = u.initial_installation();
    for atom in &req.upgrade {
        let installed = expand_constraint(u, atom)
            .iter()
            .filter(|&&q| s.contains(q))
            .count();
        if installed != 1 {
            out.push(Violation::UpgradeNotExactlyOne {
                atom: atom.clone(),
                installed,
            });
        }
        for q in downgrades(u, &initial, atom.name())
            .into_iter()
            .filter(|&q| s.contains(q))
        {
            out.push(Violation::Downgrade(q));
        }
    }
    (out.is_empty(), out)
}

/// Enumerates every subset of the universe, keeps the semantically feasible
/// ones and returns the lexicographically best by measured criteria.
pub fn brute_force(
    u: &Universe,
    req: &Request,
    spec: &CriterionSpec,
    cap: usize,
) -> Result<SolveResult, SolveError> {
    let n = u.len();
    if n > cap || n >= 63 {
        return Err(SolveError::TooLarge { packages: n, cap });
    }
    let started = Instant::now();
    let idx = build_cluster_index(u);
    let initial = u.initial_installation();
    let mut best: Option<(Vec<i64>, Installation)> = None;
    for mask in 0..(1u64 << n) {
        let s = Installation::from_mask(mask, n);
        if !verify(u, req, &s).0 {
            continue;
        }
        let key: Vec<i64> = spec
            .items()
            .iter()
            .map(|c| {
                let m = measure(c.kind, u, &initial, &s, &idx, &c.restriction) as i64;
                if c.sign == Sign::Maximize {
                    -m
                } else {
                    m
                }
            })
            .collect();
        if best.as_ref().is_none_or(|(k, _)| key < *k) {
            best = Some((key, s));
        }
    }
    let elapsed = started.elapsed();
    let nodes = 1u64 << n;
    Ok(match best {
        None => SolveResult::without_solution(SolveStatus::Infeasible, nodes, elapsed, Vec::new()),
        Some((key, s)) => SolveResult {
            status: SolveStatus::Optimal,
            values: None,
            installation: Some(s),
            objective_values: key
                .into_iter()
                .zip(spec.items())
                .map(|(k, c)| if c.sign == Sign::Maximize { -k } else { k })
                .collect(),
            nodes,
            elapsed,
            level_elapsed: Vec::new(),
        },
    })
}

/// Measures every criterion of `spec` on `s`.
pub fn measure_spec(u: &Universe, spec: &CriterionSpec, s: &Installation) -> Vec<i64> {
    let idx = build_cluster_index(u);
    let initial = u.initial_installation();
    spec.items()
        .iter()
        .map(|c| measure(c.kind, u, &initial, s, &idx, &c.restriction) as i64)
        .collect()
}
