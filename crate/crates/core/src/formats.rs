//! Text exports of a [`LinearProgram`] for external solvers: CPLEX LP and
//! OPB. Variables are written `x<handle>`; see [`LinearProgram::name_map`].

use std::fmt::Write;

use crate::milp::normalize_terms;
use crate::milp::{Cmp, Domain, EncodeError, LinExpr, LinearProgram, VarId};

/// How a multi-level objective stack becomes a single objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ObjectiveSelection {
    /// Only the first level.
    First,
    /// Σ_k W_k · f_k with W_k = Π_{j>k} (range_j + 1).
    #[default]
    LexMerge,
}

/// Largest spread of an objective over the variable bounds.
fn spread(lp: &LinearProgram, terms: &[(i64, VarId)]) -> i128 {
    terms
        .iter()
        .map(|&(c, v)| {
            let (lo, hi) = lp.variable(v).domain.bounds();
            i128::from(c.abs()) * i128::from(hi - lo)
        })
        .sum()
}

/// Minimization terms of the single objective selected from the stack.
pub fn merged_objective(
    lp: &LinearProgram,
    selection: ObjectiveSelection,
) -> Result<Vec<(i64, VarId)>, EncodeError> {
    let levels: Vec<Vec<(i64, VarId)>> = lp
        .objectives()
        .iter()
        .map(|o| o.minimized_terms())
        .collect();
    match selection {
        ObjectiveSelection::First => Ok(levels.into_iter().next().unwrap_or_default()),
        ObjectiveSelection::LexMerge => {
            let mut weight: i128 = 1;
            let mut merged = Vec::new();
            for terms in levels.iter().rev() {
                for &(c, v) in terms {
                    let w = i64::try_from(i128::from(c) * weight)
                        .map_err(|_| EncodeError::WeightOverflow)?;
                    merged.push((w, v));
                }
                weight = weight
                    .checked_mul(spread(lp, terms) + 1)
                    .ok_or(EncodeError::WeightOverflow)?;
                if weight > i128::from(i64::MAX) {
                    return Err(EncodeError::WeightOverflow);
                }
            }
            Ok(normalize_terms(merged))
        }
    }
}

fn write_terms(out: &mut String, terms: impl IntoIterator<Item = (i64, VarId)>) {
    for (c, v) in terms {
        let _ = write!(out, " {}{} {}", if c < 0 { '-' } else { '+' }, c.abs(), v);
    }
}

pub fn emit_lp(lp: &LinearProgram, selection: ObjectiveSelection) -> Result<String, EncodeError> {
    let objective = merged_objective(lp, selection)?;
    let mut out = String::new();
    for (k, o) in lp.objectives().iter().enumerate() {
        let _ = writeln!(out, "\\ level {}: {}", k + 1, o.label);
    }
    out.push_str("Minimize\n obj:");
    write_terms(&mut out, objective);
    out.push_str("\nSubject To\n");
    for (i, c) in lp.constraints().iter().enumerate() {
        let _ = write!(out, " c{}:", i + 1);
        write_terms(&mut out, c.terms().iter().copied());
        let _ = writeln!(out, " {} {}", c.cmp().symbol(), c.rhs());
    }
    let (binary, general): (Vec<VarId>, Vec<VarId>) = lp
        .ids()
        .partition(|&v| lp.variable(v).domain == Domain::Binary);
    out.push_str("Bounds\n");
    for &v in &general {
        let (lo, hi) = lp.variable(v).domain.bounds();
        let _ = writeln!(out, " {lo} <= {v} <= {hi}");
    }
    out.push_str("Binary\n");
    for v in binary {
        let _ = writeln!(out, " {v}");
    }
    if !general.is_empty() {
        out.push_str("General\n");
        for v in general {
            let _ = writeln!(out, " {v}");
        }
    }
    out.push_str("End\n");
    Ok(out)
}

/// OPB export. Integer variables are replaced by their defining sums and
/// every row is written as `>=` or `=`.
pub fn emit_opb(lp: &LinearProgram, selection: ObjectiveSelection) -> Result<String, EncodeError> {
    let bp = lp.to_binary()?;
    let merged = merged_objective(lp, selection)?;
    let mut objective = LinExpr::default();
    for (c, v) in merged {
        match bp.definitions.iter().find(|(g, _)| *g == v) {
            Some((_, def)) => {
                for (&w, &k) in &def.terms {
                    *objective.terms.entry(w).or_default() += c * k;
                }
                objective.constant += c * def.constant;
            }
            None => *objective.terms.entry(v).or_default() += c,
        }
    }
    objective.terms.retain(|_, c| *c != 0);

    let var_count = (0..bp.var_count)
        .rev()
        .find(|&i| bp.binary[i])
        .map_or(0, |i| i + 1);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "* #variable= {} #constraint= {}",
        var_count,
        bp.rows.len()
    );
    if objective.constant != 0 {
        let _ = writeln!(out, "* objective constant: {}", objective.constant);
    }
    out.push_str("min:");
    write_terms(&mut out, objective.terms.iter().map(|(&v, &c)| (c, v)));
    out.push_str(" ;\n");
    for row in &bp.rows {
        let (sign, cmp) = match row.cmp {
            Cmp::Le => (-1, ">="),
            Cmp::Ge => (1, ">="),
            Cmp::Eq => (1, "="),
        };
        write_terms(&mut out, row.terms.iter().map(|&(c, v)| (sign * c, v)));
        let _ = writeln!(out, " {} {} ;", cmp, sign * row.rhs);
    }
    // strip the leading space write_terms puts before the first term of a row
    Ok(out
        .lines()
        .map(|l| l.strip_prefix(' ').unwrap_or(l))
        .collect::<Vec<_>>()
        .join("\n")
        + "\n")
}
