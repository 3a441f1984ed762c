//! Ordered criteria stacks such as `-removed,-unaligned(version_changes)`.

use std::fmt;

use thiserror::Error;

use crate::criteria::{ClusterRestriction, CriterionKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Criterion {
    pub sign: Sign,
    pub kind: CriterionKind,
    pub restriction: ClusterRestriction,
}

impl Criterion {
    pub fn minimize(kind: CriterionKind) -> Self {
        Self {
            sign: Sign::Minimize,
            kind,
            restriction: ClusterRestriction::all(),
        }
    }

    pub fn restricted(kind: CriterionKind, restriction: ClusterRestriction) -> Self {
        Self {
            sign: Sign::Minimize,
            kind,
            restriction,
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = match self.sign {
            Sign::Minimize => '-',
            Sign::Maximize => '+',
        };
        match (self.kind.is_alignment(), self.restriction.sources()) {
            (true, Some(srcs)) => {
                let list: Vec<&str> = srcs.iter().map(String::as_str).collect();
                write!(
                    f,
                    "{sign}unaligned({}:{{{}}})",
                    self.kind.name(),
                    list.join(",")
                )
            }
            _ => write!(f, "{sign}{}", self.kind),
        }
    }
}

/// A non-empty lexicographic stack of criteria, most important first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CriterionSpec {
    items: Vec<Criterion>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpecError {
    #[error("empty criteria list")]
    Empty,
    #[error("position {position}: maximization (`+`) is not supported")]
    UnsupportedSign { position: usize },
    #[error("position {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("cluster restriction is only allowed on unaligned criteria, not {0}")]
    RestrictionOnClassic(CriterionKind),
}

impl CriterionSpec {
    pub fn new(items: Vec<Criterion>) -> Result<Self, SpecError> {
        if items.is_empty() {
            return Err(SpecError::Empty);
        }
        if let Some(c) = items
            .iter()
            .find(|c| !c.kind.is_alignment() && c.restriction.sources().is_some())
        {
            return Err(SpecError::RestrictionOnClassic(c.kind));
        }
        Ok(Self { items })
    }

    pub fn items(&self) -> &[Criterion] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

impl fmt::Display for CriterionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.items.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for CriterionSpec {
    type Err = SpecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_criteria(s)
    }
}

/// Parses `item (, item)*` where an item is `-NAME`, `-unaligned(VARIANT)`
/// or `-unaligned(VARIANT:{src,...})`.
pub fn parse_criteria(text: &str) -> Result<CriterionSpec, SpecError> {
    let mut p = Parser { text, pos: 0 };
    let mut items = Vec::new();
    p.skip_ws();
    if p.at_end() {
        return Err(SpecError::Empty);
    }
    loop {
        items.push(p.item()?);
        p.skip_ws();
        if p.at_end() {
            break;
        }
        p.expect(',')?;
    }
    CriterionSpec::new(items)
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn rest(&self) -> &str {
        &self.text[self.pos..]
    }

    fn at_end(&self) -> bool {
        self.pos >= self.text.len()
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.text.len() - trimmed.len();
    }

    fn error(&self, message: impl Into<String>) -> SpecError {
        SpecError::Syntax {
            position: self.pos,
            message: message.into(),
        }
    }

    fn expect(&mut self, c: char) -> Result<(), SpecError> {
        self.skip_ws();
        if self.rest().starts_with(c) {
            self.pos += c.len_utf8();
            Ok(())
        } else {
            Err(self.error(format!("expected `{c}`")))
        }
    }

    fn word(&mut self) -> &str {
        self.skip_ws();
        let len = self
            .rest()
            .find(|c: char| c.is_whitespace() || ",(){}:".contains(c))
            .unwrap_or(self.rest().len());
        let start = self.pos;
        self.pos += len;
        &self.text[start..self.pos]
    }

    fn item(&mut self) -> Result<Criterion, SpecError> {
        self.skip_ws();
        match self.rest().chars().next() {
            Some('-') => self.pos += 1,
            Some('+') => return Err(SpecError::UnsupportedSign { position: self.pos }),
            _ => return Err(self.error("expected `-`")),
        }
        let at = self.pos;
        let name = self.word().to_owned();
        let kind = match name.as_str() {
            "removed" => CriterionKind::Removed,
            "new" => CriterionKind::New,
            "changed" => CriterionKind::Changed,
            "notuptodate" => CriterionKind::NotUpToDate,
            "unsatrecommends" | "unsat_recommends" => CriterionKind::UnsatRecommends,
            "unaligned" => return self.unaligned(),
            _ => {
                return Err(SpecError::Syntax {
                    position: at,
                    message: format!("unknown criterion {name:?}"),
                })
            }
        };
        Ok(Criterion::minimize(kind))
    }

    fn unaligned(&mut self) -> Result<Criterion, SpecError> {
        self.expect('(')?;
        self.skip_ws();
        let at = self.pos;
        let variant = self.word().to_owned();
        let kind = match variant.as_str() {
            "packages" => CriterionKind::UnalignedPackages,
            "pairs" => CriterionKind::UnalignedPairs,
            "version_changes" => CriterionKind::UnalignedVersionChanges,
            "clusters" => CriterionKind::UnalignedClusters,
            _ => {
                return Err(SpecError::Syntax {
                    position: at,
                    message: format!("unknown unaligned variant {variant:?}"),
                })
            }
        };
        self.skip_ws();
        let mut restriction = ClusterRestriction::all();
        if self.rest().starts_with(':') {
            self.pos += 1;
            self.expect('{')?;
            let mut sources = Vec::new();
            loop {
                let src = self.word().to_owned();
                if src.is_empty() {
                    return Err(self.error("expected a source name"));
                }
                sources.push(src);
                self.skip_ws();
                if self.rest().starts_with(',') {
                    self.pos += 1;
                } else {
                    break;
                }
            }
            self.expect('}')?;
            restriction = ClusterRestriction::only(sources).expect("at least one source parsed");
        }
        self.expect(')')?;
        Ok(Criterion::restricted(kind, restriction))
    }
}
