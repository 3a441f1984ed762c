//! Independent oracles shared by the integration tests. Nothing here
//! calls the library's solver or search code.

#![allow(dead_code, clippy::type_complexity, clippy::too_many_arguments)]

use std::collections::BTreeMap;

use srcalign::cudf::{Installation, Request, Universe};
use srcalign::gen::{random_instance, GenParams};
use srcalign::milp::{Cmp, Domain, LinearProgram, VarTag};
use srcalign::sat::WeightedFormula;

/// Instances with at most 12 packages, 4 sources, 3 source versions each.
pub fn small_family(seed: u64) -> (Universe, Request) {
    random_instance(seed, &GenParams::default())
}

/// Instances with at most 15 packages.
pub fn medium_family(seed: u64) -> (Universe, Request) {
    let params = GenParams {
        max_packages: 15,
        max_names: 8,
        ..GenParams::default()
    };
    random_instance(seed, &params)
}

pub fn all_installations(u: &Universe) -> impl Iterator<Item = Installation> + '_ {
    let n = u.len();
    (0..1u64 << n).map(move |m| Installation::from_mask(m, n))
}

/// Minimum of objective `level` over every completion of the auxiliary
/// variables, package variables fixed by `s`. `None` when no completion
/// satisfies the constraints. Plain depth-first enumeration with interval
/// pruning.
pub fn aux_minimum(lp: &LinearProgram, level: usize, s: &Installation) -> Option<i64> {
    let vars = lp.variables();
    let mut values = lp.pkg_values(s);
    let mut assigned: Vec<bool> = vars
        .iter()
        .map(|v| matches!(v.tag, VarTag::Pkg(_)))
        .collect();
    let free: Vec<usize> = (0..vars.len()).filter(|&i| !assigned[i]).collect();
    let mut occurs: Vec<Vec<usize>> = vec![Vec::new(); vars.len()];
    for (r, c) in lp.constraints().iter().enumerate() {
        for &(_, v) in c.terms() {
            occurs[v.index()].push(r);
        }
    }
    let bounds: Vec<(i64, i64)> = vars.iter().map(|v| v.domain.bounds()).collect();

    let possible = |r: usize, values: &[i64], assigned: &[bool]| {
        let c = &lp.constraints()[r];
        let (mut lo, mut hi) = (0i64, 0i64);
        for &(k, v) in c.terms() {
            let i = v.index();
            if assigned[i] {
                lo += k * values[i];
                hi += k * values[i];
            } else {
                let (a, b) = (k * bounds[i].0, k * bounds[i].1);
                lo += a.min(b);
                hi += a.max(b);
            }
        }
        match c.cmp() {
            Cmp::Le => lo <= c.rhs(),
            Cmp::Ge => hi >= c.rhs(),
            Cmp::Eq => lo <= c.rhs() && c.rhs() <= hi,
        }
    };
    // constraints over package variables only
    if !(0..lp.constraints().len()).all(|r| possible(r, &values, &assigned)) {
        return None;
    }

    struct Ctx<'a> {
        lp: &'a LinearProgram,
        level: usize,
        best: Option<i64>,
    }
    fn dfs(
        ctx: &mut Ctx<'_>,
        k: usize,
        free: &[usize],
        values: &mut Vec<i64>,
        assigned: &mut Vec<bool>,
        bounds: &[(i64, i64)],
        occurs: &[Vec<usize>],
        possible: &dyn Fn(usize, &[i64], &[bool]) -> bool,
    ) {
        if k == free.len() {
            let v = ctx.lp.objectives()[ctx.level].value(values);
            ctx.best = Some(ctx.best.map_or(v, |b| b.min(v)));
            return;
        }
        let i = free[k];
        assigned[i] = true;
        for x in bounds[i].0..=bounds[i].1 {
            values[i] = x;
            if occurs[i].iter().all(|&r| possible(r, values, assigned)) {
                dfs(ctx, k + 1, free, values, assigned, bounds, occurs, possible);
            }
        }
        assigned[i] = false;
        values[i] = 0;
    }
    let mut ctx = Ctx {
        lp,
        level,
        best: None,
    };
    dfs(
        &mut ctx,
        0,
        &free,
        &mut values,
        &mut assigned,
        &bounds,
        &occurs,
        &possible,
    );
    ctx.best
}

/// Minimum soft cost over models of the hard clauses with the package
/// variables (handles `1..=n`) fixed by `s`; `None` when unsatisfiable.
/// Depth-first over the remaining variables, pruned by the cost of the
/// assigned soft literals plus the soft literals already forced false.
pub fn sat_minimum(f: &WeightedFormula, n: usize, s: &Installation) -> Option<u64> {
    let m = f.var_count;
    let mut values = vec![false; m];
    for id in s.iter() {
        values[id.0] = true;
    }
    let assigned: Vec<bool> = (0..m).map(|i| i < n).collect();
    let hard: Vec<Vec<(usize, bool)>> = f
        .hard
        .iter()
        .map(|c| {
            c.lits()
                .iter()
                .map(|l| (l.var.index(), l.positive))
                .collect()
        })
        .collect();
    let mut occurs: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (k, c) in hard.iter().enumerate() {
        for &(v, _) in c {
            occurs[v].push(k);
        }
    }
    let soft: Vec<(u64, usize, bool)> = f
        .soft
        .iter()
        .map(|&(w, l)| (w, l.var.index(), l.positive))
        .collect();

    struct Search<'a> {
        hard: &'a [Vec<(usize, bool)>],
        occurs: &'a [Vec<usize>],
        soft: &'a [(u64, usize, bool)],
        values: Vec<bool>,
        assigned: Vec<bool>,
        best: Option<u64>,
    }
    impl Search<'_> {
        fn falsified(&self, c: usize) -> bool {
            self.hard[c]
                .iter()
                .all(|&(v, pos)| self.assigned[v] && self.values[v] != pos)
        }
        /// Value `v` must take, if some clause has every other literal false.
        fn forced(&self, v: usize) -> Option<bool> {
            self.occurs[v].iter().find_map(|&c| {
                let mut own = None;
                for &(w, pos) in &self.hard[c] {
                    if w == v {
                        own = Some(pos);
                    } else if !self.assigned[w] || self.values[w] == pos {
                        return None;
                    }
                }
                own
            })
        }
        fn lower_bound(&self) -> u64 {
            self.soft
                .iter()
                .filter(|&&(_, v, pos)| {
                    if self.assigned[v] {
                        self.values[v] != pos
                    } else {
                        self.forced(v) == Some(!pos)
                    }
                })
                .map(|&(w, _, _)| w)
                .sum()
        }
        fn run(&mut self, order: &[usize]) {
            let bound = self.lower_bound();
            if self.best.is_some_and(|b| bound >= b) {
                return;
            }
            let Some((&v, rest)) = order.split_first() else {
                self.best = Some(bound);
                return;
            };
            self.assigned[v] = true;
            for x in [false, true] {
                self.values[v] = x;
                if self.occurs[v].iter().all(|&c| !self.falsified(c)) {
                    self.run(rest);
                }
            }
            self.assigned[v] = false;
            self.values[v] = false;
        }
    }

    let mut search = Search {
        hard: &hard,
        occurs: &occurs,
        soft: &soft,
        values,
        assigned,
        best: None,
    };
    if (0..hard.len()).any(|c| search.falsified(c)) {
        return None;
    }
    let order: Vec<usize> = (n..m).collect();
    search.run(&order);
    search.best
}

/// Reparsed CPLEX LP text.
#[derive(Debug, Default, PartialEq)]
pub struct ParsedLp {
    pub objective: Vec<(i64, u32)>,
    pub rows: Vec<(Vec<(i64, u32)>, String, i64)>,
    pub bounds: BTreeMap<u32, (i64, i64)>,
    pub binary: Vec<u32>,
    pub general: Vec<u32>,
}

fn parse_terms(tokens: &[&str]) -> Vec<(i64, u32)> {
    tokens
        .chunks(2)
        .map(|pair| {
            let c: i64 = pair[0].parse().expect("coefficient");
            let v: u32 = pair[1]
                .strip_prefix('x')
                .expect("variable")
                .parse()
                .expect("handle");
            (c, v)
        })
        .collect()
}

pub fn parse_lp(text: &str) -> ParsedLp {
    let mut out = ParsedLp::default();
    let mut section = "";
    for line in text.lines() {
        if line.starts_with('\\') {
            continue;
        }
        match line {
            "Minimize" | "Subject To" | "Bounds" | "Binary" | "General" | "End" => {
                section = line;
                continue;
            }
            _ => {}
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match section {
            "Minimize" => out.objective = parse_terms(&tokens[1..]),
            "Subject To" => {
                let n = tokens.len();
                out.rows.push((
                    parse_terms(&tokens[1..n - 2]),
                    tokens[n - 2].to_string(),
                    tokens[n - 1].parse().unwrap(),
                ));
            }
            "Bounds" => {
                let v = tokens[2][1..].parse().unwrap();
                out.bounds
                    .insert(v, (tokens[0].parse().unwrap(), tokens[4].parse().unwrap()));
            }
            "Binary" => out.binary.push(tokens[0][1..].parse().unwrap()),
            "General" => out.general.push(tokens[0][1..].parse().unwrap()),
            _ => panic!("text outside a section: {line:?}"),
        }
    }
    out
}

/// Checks that parsed LP text describes exactly the rows and domains of `lp`.
pub fn lp_matches(parsed: &ParsedLp, lp: &LinearProgram) -> bool {
    let rows_match = parsed.rows.len() == lp.constraints().len()
        && parsed
            .rows
            .iter()
            .zip(lp.constraints())
            .all(|((terms, cmp, rhs), c)| {
                let expected: Vec<(i64, u32)> =
                    c.terms().iter().map(|&(k, v)| (k, v.handle())).collect();
                *terms == expected && cmp == c.cmp().symbol() && *rhs == c.rhs()
            });
    let domains_match = lp.ids().all(|v| match lp.variable(v).domain {
        Domain::Binary => parsed.binary.contains(&v.handle()),
        Domain::Integer { lo, hi } => {
            parsed.general.contains(&v.handle())
                && parsed.bounds.get(&v.handle()) == Some(&(lo, hi))
        }
    });
    rows_match
        && domains_match
        && parsed.binary.len() + parsed.general.len() == lp.variables().len()
}

/// Header fields and body of a WCNF document.
#[derive(Debug, PartialEq, Eq)]
pub struct ParsedWcnf {
    pub vars: usize,
    pub clauses: usize,
    pub top: u64,
    pub hard: Vec<Vec<i64>>,
    pub soft: Vec<(u64, Vec<i64>)>,
}

pub fn parse_wcnf(text: &str) -> ParsedWcnf {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().expect("header").split_whitespace().collect();
    assert_eq!(&header[..2], ["p", "wcnf"]);
    let (vars, clauses, top) = (
        header[2].parse().unwrap(),
        header[3].parse().unwrap(),
        header[4].parse().unwrap(),
    );
    let mut out = ParsedWcnf {
        vars,
        clauses,
        top,
        hard: Vec::new(),
        soft: Vec::new(),
    };
    for line in lines {
        let nums: Vec<i64> = line
            .split_whitespace()
            .map(|t| t.parse().unwrap())
            .collect();
        assert_eq!(nums.last(), Some(&0), "clause must end in 0");
        let weight = nums[0] as u64;
        let lits = nums[1..nums.len() - 1].to_vec();
        if weight == top {
            out.hard.push(lits);
        } else {
            out.soft.push((weight, lits));
        }
    }
    out
}
