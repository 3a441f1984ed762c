//! Package universe model: a reader for the CUDF subset we need, version
//! constraints, the source-cluster index and solution output.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use indexmap::IndexMap;
use thiserror::Error;

/// Line emitted in place of a solution document when no solution exists.
pub const FAIL_MARKER: &str = "FAIL";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CudfError {
    #[error("line {line} (stanza {stanza}): {message}")]
    Syntax {
        line: usize,
        stanza: usize,
        message: String,
    },
    #[error("line {line} (stanza {stanza}): duplicate package {name} version {version}")]
    Duplicate {
        line: usize,
        stanza: usize,
        name: String,
        version: u64,
    },
    #[error("line {line}: unknown package {name} version {version} in solution")]
    UnknownPackage {
        line: usize,
        name: String,
        version: u64,
    },
}

/// A CUDF package version. Always at least 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PackageVersion(u64);

impl PackageVersion {
    pub fn new(value: u64) -> Option<Self> {
        (value >= 1).then_some(Self(value))
    }

    pub fn get(self) -> u64 {
        self.0
    }
}

impl fmt::Display for PackageVersion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Opaque source version. Tokens are only ever compared for equality.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SourceVersionToken(String);

impl SourceVersionToken {
    pub fn new(token: impl Into<String>) -> Option<Self> {
        let token = token.into();
        (!token.is_empty()).then_some(Self(token))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SourceVersionToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Any,
    Eq,
    Neq,
    Lt,
    Le,
    Gt,
    Ge,
}

impl Relation {
    fn symbol(self) -> &'static str {
        match self {
            Relation::Any => "",
            Relation::Eq => "=",
            Relation::Neq => "!=",
            Relation::Lt => "<",
            Relation::Le => "<=",
            Relation::Gt => ">",
            Relation::Ge => ">=",
        }
    }
}

/// A single dependency atom such as `b`, `b >= 2` or `b != 3`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VersionConstraint {
    name: String,
    relation: Relation,
    bound: Option<PackageVersion>,
}

impl VersionConstraint {
    pub fn any(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            relation: Relation::Any,
            bound: None,
        }
    }

    /// Builds a bounded atom. `relation` must not be [`Relation::Any`].
    pub fn bounded(name: impl Into<String>, relation: Relation, bound: PackageVersion) -> Self {
        assert!(
            relation != Relation::Any,
            "bounded constraint needs a relation"
        );
        Self {
            name: name.into(),
            relation,
            bound: Some(bound),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn relation(&self) -> Relation {
        self.relation
    }

    pub fn bound(&self) -> Option<PackageVersion> {
        self.bound
    }

    pub fn matches(&self, name: &str, version: PackageVersion) -> bool {
        if name != self.name {
            return false;
        }
        let Some(bound) = self.bound else { return true };
        match self.relation {
            Relation::Any => true,
            Relation::Eq => version == bound,
            Relation::Neq => version != bound,
            Relation::Lt => version < bound,
            Relation::Le => version <= bound,
            Relation::Gt => version > bound,
            Relation::Ge => version >= bound,
        }
    }
}

impl fmt::Display for VersionConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.bound {
            None => f.write_str(&self.name),
            Some(b) => write!(f, "{} {} {}", self.name, self.relation.symbol(), b),
        }
    }
}

/// Conjunction of disjunctions of atoms. No clause is empty.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DependencyFormula {
    clauses: Vec<Vec<VersionConstraint>>,
}

impl DependencyFormula {
    pub fn new(clauses: Vec<Vec<VersionConstraint>>) -> Self {
        assert!(
            clauses.iter().all(|c| !c.is_empty()),
            "empty dependency clause"
        );
        Self { clauses }
    }

    pub fn clauses(&self) -> &[Vec<VersionConstraint>] {
        &self.clauses
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackageUnit {
    pub name: String,
    pub version: PackageVersion,
    pub depends: DependencyFormula,
    pub conflicts: Vec<VersionConstraint>,
    pub recommends: Option<DependencyFormula>,
    pub installed: bool,
    source: Option<(String, SourceVersionToken)>,
}

impl PackageUnit {
    pub fn new(name: impl Into<String>, version: PackageVersion) -> Self {
        Self {
            name: name.into(),
            version,
            depends: DependencyFormula::default(),
            conflicts: Vec::new(),
            recommends: None,
            installed: false,
            source: None,
        }
    }

    /// Sets both source properties at once; they are never present alone.
    pub fn with_source(
        mut self,
        source: impl Into<String>,
        sourceversion: SourceVersionToken,
    ) -> Self {
        self.source = Some((source.into(), sourceversion));
        self
    }

    pub fn installed(mut self, installed: bool) -> Self {
        self.installed = installed;
        self
    }

    pub fn source(&self) -> Option<&str> {
        self.source.as_ref().map(|(s, _)| s.as_str())
    }

    pub fn sourceversion(&self) -> Option<&SourceVersionToken> {
        self.source.as_ref().map(|(_, v)| v)
    }
}

/// Dense index of a package inside its [`Universe`]. Index order is
/// (name, version) order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PkgId(pub usize);

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Universe {
    packages: Vec<PackageUnit>,
    by_name: BTreeMap<String, Vec<PkgId>>,
}

impl Universe {
    /// Sorts the units by (name, version). Fails on a duplicate pair.
    pub fn new(mut packages: Vec<PackageUnit>) -> Result<Self, (String, PackageVersion)> {
        packages.sort_by(|a, b| (&a.name, a.version).cmp(&(&b.name, b.version)));
        for w in packages.windows(2) {
            if w[0].name == w[1].name && w[0].version == w[1].version {
                return Err((w[0].name.clone(), w[0].version));
            }
        }
        let mut by_name: BTreeMap<String, Vec<PkgId>> = BTreeMap::new();
        for (i, p) in packages.iter().enumerate() {
            by_name.entry(p.name.clone()).or_default().push(PkgId(i));
        }
        Ok(Self { packages, by_name })
    }

    pub fn len(&self) -> usize {
        self.packages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.packages.is_empty()
    }

    pub fn packages(&self) -> &[PackageUnit] {
        &self.packages
    }

    pub fn ids(&self) -> impl Iterator<Item = PkgId> + '_ {
        (0..self.packages.len()).map(PkgId)
    }

    pub fn get(&self, id: PkgId) -> &PackageUnit {
        &self.packages[id.0]
    }

    /// Versions of `name`, ascending.
    pub fn versions_of(&self, name: &str) -> &[PkgId] {
        self.by_name.get(name).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn names(&self) -> impl Iterator<Item = &str> + '_ {
        self.by_name.keys().map(String::as_str)
    }

    pub fn find(&self, name: &str, version: PackageVersion) -> Option<PkgId> {
        self.versions_of(name)
            .iter()
            .copied()
            .find(|&id| self.get(id).version == version)
    }

    /// Packages marked `installed: true`.
    pub fn initial_installation(&self) -> Installation {
        Installation::from_ids(self.ids().filter(|&id| self.get(id).installed))
    }
}

/// Expands an atom to the packages of `u` satisfying it. Unknown names
/// expand to nothing.
pub fn expand_constraint(u: &Universe, c: &VersionConstraint) -> BTreeSet<PkgId> {
    u.versions_of(c.name())
        .iter()
        .copied()
        .filter(|&id| c.matches(c.name(), u.get(id).version))
        .collect()
}

/// Union of the expansions of every atom in a disjunction.
pub fn expand_disjunction(u: &Universe, clause: &[VersionConstraint]) -> BTreeSet<PkgId> {
    clause
        .iter()
        .flat_map(|c| expand_constraint(u, c))
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Request {
    pub install: Vec<VersionConstraint>,
    pub remove: Vec<VersionConstraint>,
    pub upgrade: Vec<VersionConstraint>,
}

impl Request {
    pub fn is_empty(&self) -> bool {
        self.install.is_empty() && self.remove.is_empty() && self.upgrade.is_empty()
    }
}

/// A set of packages of one universe considered installed.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Installation {
    members: BTreeSet<PkgId>,
}

impl Installation {
    pub fn from_ids(ids: impl IntoIterator<Item = PkgId>) -> Self {
        Self {
            members: ids.into_iter().collect(),
        }
    }

    pub fn contains(&self, id: PkgId) -> bool {
        self.members.contains(&id)
    }

    pub fn insert(&mut self, id: PkgId) {
        self.members.insert(id);
    }

    pub fn iter(&self) -> impl Iterator<Item = PkgId> + '_ {
        self.members.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Installed versions of `name` (V_p(X, name)).
    pub fn versions_of(&self, u: &Universe, name: &str) -> BTreeSet<PackageVersion> {
        u.versions_of(name)
            .iter()
            .filter(|id| self.contains(**id))
            .map(|&id| u.get(id).version)
            .collect()
    }

    /// Installations given by the bits of `mask` over package ids.
    pub fn from_mask(mask: u64, n: usize) -> Self {
        Self::from_ids((0..n).filter(|i| mask >> i & 1 == 1).map(PkgId))
    }
}

impl FromIterator<PkgId> for Installation {
    fn from_iter<T: IntoIterator<Item = PkgId>>(iter: T) -> Self {
        Self::from_ids(iter)
    }
}

/// One source: its versions in first-seen order, each with its packages.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SourceCluster {
    versions: IndexMap<SourceVersionToken, BTreeSet<PkgId>>,
}

impl SourceCluster {
    /// V(s).
    pub fn versions(&self) -> impl Iterator<Item = &SourceVersionToken> + '_ {
        self.versions.keys()
    }

    pub fn version_count(&self) -> usize {
        self.versions.len()
    }

    /// P(s, v).
    pub fn packages(&self, v: &SourceVersionToken) -> Option<&BTreeSet<PkgId>> {
        self.versions.get(v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SourceVersionToken, &BTreeSet<PkgId>)> + '_ {
        self.versions.iter()
    }

    pub fn all_packages(&self) -> impl Iterator<Item = PkgId> + '_ {
        self.versions.values().flat_map(|s| s.iter().copied())
    }

    pub fn package_count(&self) -> usize {
        self.versions.values().map(BTreeSet::len).sum()
    }

    /// Unordered package pairs whose source versions differ.
    pub fn cross_version_pairs(&self) -> Vec<(PkgId, PkgId)> {
        let groups: Vec<&BTreeSet<PkgId>> = self.versions.values().collect();
        let mut pairs = Vec::new();
        for (i, a) in groups.iter().enumerate() {
            for b in &groups[i + 1..] {
                for &p in a.iter() {
                    for &q in b.iter() {
                        pairs.push(if p < q { (p, q) } else { (q, p) });
                    }
                }
            }
        }
        pairs.sort();
        pairs
    }
}

/// Realizes S(p), V(p), V(s) and P(s, v) for packages carrying source metadata.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SourceClusterIndex {
    sources: BTreeMap<String, SourceCluster>,
}

impl SourceClusterIndex {
    pub fn get(&self, source: &str) -> Option<&SourceCluster> {
        self.sources.get(source)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &SourceCluster)> + '_ {
        self.sources.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn source_names(&self) -> impl Iterator<Item = &str> + '_ {
        self.sources.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.sources.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sources.is_empty()
    }
}

pub fn build_cluster_index(u: &Universe) -> SourceClusterIndex {
    let mut sources: BTreeMap<String, SourceCluster> = BTreeMap::new();
    for id in u.ids() {
        let p = u.get(id);
        if let Some((s, v)) = &p.source {
            sources
                .entry(s.clone())
                .or_default()
                .versions
                .entry(v.clone())
                .or_default()
                .insert(id);
        }
    }
    SourceClusterIndex { sources }
}

/// Sources with at least two source versions; the only ones alignment
/// encodings need to look at.
pub fn reduced_sources(idx: &SourceClusterIndex) -> BTreeSet<String> {
    idx.iter()
        .filter(|(_, c)| c.version_count() >= 2)
        .map(|(s, _)| s.to_owned())
        .collect()
}

/// Writes a CUDF solution document, or the `FAIL` line when `solution` is `None`.
pub fn serialize_solution(u: &Universe, solution: Option<&Installation>) -> String {
    let Some(s) = solution else {
        return format!("{FAIL_MARKER}\n");
    };
    let mut out = String::new();
    for (i, id) in s.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let p = u.get(id);
        out.push_str(&format!(
            "package: {}\nversion: {}\ninstalled: true\n",
            p.name, p.version
        ));
    }
    out
}

fn write_formula(f: &DependencyFormula) -> String {
    let clauses: Vec<String> = f
        .clauses()
        .iter()
        .map(|c| {
            c.iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(" | ")
        })
        .collect();
    clauses.join(", ")
}

fn write_atoms(atoms: &[VersionConstraint]) -> String {
    atoms
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}

/// Writes a whole universe and request as a CUDF document that
/// [`parse_cudf`] reads back unchanged.
pub fn write_cudf(u: &Universe, req: &Request) -> String {
    let mut stanzas = Vec::new();
    for p in u.packages() {
        let mut s = format!("package: {}\nversion: {}\n", p.name, p.version);
        if !p.depends.is_empty() {
            s += &format!("depends: {}\n", write_formula(&p.depends));
        }
        if !p.conflicts.is_empty() {
            s += &format!("conflicts: {}\n", write_atoms(&p.conflicts));
        }
        if let Some(r) = p.recommends.as_ref().filter(|r| !r.is_empty()) {
            s += &format!("recommends: {}\n", write_formula(r));
        }
        if p.installed {
            s += "installed: true\n";
        }
        if let Some((src, v)) = &p.source {
            s += &format!("source: {src}\nsourceversion: {v}\n");
        }
        stanzas.push(s);
    }
    if !req.is_empty() {
        let mut s = String::from("request: generated\n");
        for (key, atoms) in [
            ("install", &req.install),
            ("remove", &req.remove),
            ("upgrade", &req.upgrade),
        ] {
            if !atoms.is_empty() {
                s += &format!("{key}: {}\n", write_atoms(atoms));
            }
        }
        stanzas.push(s);
    }
    stanzas.join("\n")
}

/// Reads back a solution document against `u`. Stanzas not marked
/// installed are skipped.
pub fn parse_solution(u: &Universe, text: &str) -> Result<Option<Installation>, CudfError> {
    if text.trim() == FAIL_MARKER {
        return Ok(None);
    }
    let doc = read_stanzas(text)?;
    let mut inst = Installation::default();
    for stanza in doc.iter().filter(|s| s.kind() == Some("package")) {
        let pkg = stanza.to_package()?;
        if !pkg.installed {
            continue;
        }
        let id = u
            .find(&pkg.name, pkg.version)
            .ok_or_else(|| CudfError::UnknownPackage {
                line: stanza.line,
                name: pkg.name.clone(),
                version: pkg.version.get(),
            })?;
        inst.insert(id);
    }
    Ok(Some(inst))
}

pub fn parse_cudf(text: &str) -> Result<(Universe, Request), CudfError> {
    let stanzas = read_stanzas(text)?;
    let mut packages = Vec::new();
    let mut origin: Vec<(usize, usize)> = Vec::new();
    let mut request: Option<Request> = None;
    for stanza in &stanzas {
        match stanza.kind() {
            Some("package") => {
                packages.push(stanza.to_package()?);
                origin.push((stanza.line, stanza.index));
            }
            Some("request") => {
                if request.is_some() {
                    return Err(stanza.error(stanza.line, "more than one request stanza"));
                }
                request = Some(stanza.to_request()?);
            }
            _ => {}
        }
    }
    let mut seen: BTreeSet<(&str, PackageVersion)> = BTreeSet::new();
    for (p, &(line, stanza)) in packages.iter().zip(&origin) {
        if !seen.insert((p.name.as_str(), p.version)) {
            return Err(CudfError::Duplicate {
                line,
                stanza,
                name: p.name.clone(),
                version: p.version.get(),
            });
        }
    }
    let universe = Universe::new(packages).expect("duplicates rejected above");
    Ok((universe, request.unwrap_or_default()))
}

struct Stanza {
    index: usize,
    line: usize,
    props: Vec<(usize, String, String)>,
}

impl Stanza {
    fn kind(&self) -> Option<&str> {
        self.props.first().map(|(_, k, _)| k.as_str())
    }

    fn error(&self, line: usize, message: impl Into<String>) -> CudfError {
        CudfError::Syntax {
            line,
            stanza: self.index,
            message: message.into(),
        }
    }

    fn to_package(&self) -> Result<PackageUnit, CudfError> {
        let (_, _, name) = &self.props[0];
        if name.is_empty() {
            return Err(self.error(self.line, "empty package name"));
        }
        let mut version = None;
        let mut unit = PackageUnit::new(name.clone(), PackageVersion(1));
        let mut source: Option<(usize, String)> = None;
        let mut sourceversion: Option<(usize, String)> = None;
        for (line, key, value) in &self.props[1..] {
            let line = *line;
            match key.as_str() {
                "version" => {
                    let v = value
                        .parse::<u64>()
                        .ok()
                        .and_then(PackageVersion::new)
                        .ok_or_else(|| {
                            self.error(
                                line,
                                format!("version must be a positive integer, got {value:?}"),
                            )
                        })?;
                    version = Some(v);
                }
                "depends" => {
                    unit.depends = parse_formula(value).map_err(|m| self.error(line, m))?
                }
                "recommends" => {
                    unit.recommends = Some(parse_formula(value).map_err(|m| self.error(line, m))?)
                }
                "conflicts" => {
                    unit.conflicts = parse_atom_list(value).map_err(|m| self.error(line, m))?
                }
                "installed" => {
                    unit.installed = match value.as_str() {
                        "true" => true,
                        "false" => false,
                        other => {
                            return Err(self.error(
                                line,
                                format!("installed must be true or false, got {other:?}"),
                            ))
                        }
                    }
                }
                "source" => source = Some((line, value.clone())),
                "sourceversion" => sourceversion = Some((line, value.clone())),
                _ => {}
            }
        }
        unit.version = version
            .ok_or_else(|| self.error(self.line, format!("package {name} has no version")))?;
        unit.source = match (source, sourceversion) {
            (None, None) => None,
            (Some((_, s)), Some((line, v))) => {
                if s.is_empty() {
                    return Err(self.error(line, "empty source"));
                }
                let token = SourceVersionToken::new(v)
                    .ok_or_else(|| self.error(line, "empty sourceversion"))?;
                Some((s, token))
            }
            (Some((line, _)), None) => return Err(self.error(line, "source without sourceversion")),
            (None, Some((line, _))) => return Err(self.error(line, "sourceversion without source")),
        };
        Ok(unit)
    }

    fn to_request(&self) -> Result<Request, CudfError> {
        let mut req = Request::default();
        for (line, key, value) in &self.props[1..] {
            let list = match key.as_str() {
                "install" => &mut req.install,
                "remove" => &mut req.remove,
                "upgrade" => &mut req.upgrade,
                _ => continue,
            };
            list.extend(parse_atom_list(value).map_err(|m| self.error(*line, m))?);
        }
        Ok(req)
    }
}

fn read_stanzas(text: &str) -> Result<Vec<Stanza>, CudfError> {
    let mut stanzas: Vec<Stanza> = Vec::new();
    let mut current: Option<Stanza> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            stanzas.extend(current.take());
            continue;
        }
        if raw.starts_with('#') {
            continue;
        }
        let stanza = current.get_or_insert_with(|| Stanza {
            index: stanzas.len() + 1,
            line,
            props: Vec::new(),
        });
        if raw.starts_with(' ') {
            // continuation of the previous property value
            match stanza.props.last_mut() {
                Some((_, _, value)) => {
                    value.push(' ');
                    value.push_str(raw.trim());
                }
                None => {
                    return Err(CudfError::Syntax {
                        line,
                        stanza: stanza.index,
                        message: "dangling continuation line".into(),
                    })
                }
            }
            continue;
        }
        let Some((key, value)) = raw.split_once(':') else {
            return Err(CudfError::Syntax {
                line,
                stanza: stanza.index,
                message: format!("expected `key: value`, got {raw:?}"),
            });
        };
        stanza
            .props
            .push((line, key.trim().to_owned(), value.trim().to_owned()));
    }
    stanzas.extend(current);
    Ok(stanzas)
}

fn parse_formula(value: &str) -> Result<DependencyFormula, String> {
    if value.is_empty() {
        return Ok(DependencyFormula::default());
    }
    let clauses = value
        .split(',')
        .map(|clause| {
            clause
                .split('|')
                .map(parse_atom)
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DependencyFormula::new(clauses))
}

fn parse_atom_list(value: &str) -> Result<Vec<VersionConstraint>, String> {
    if value.is_empty() {
        return Ok(Vec::new());
    }
    value.split(',').map(parse_atom).collect()
}

fn parse_atom(atom: &str) -> Result<VersionConstraint, String> {
    let atom = atom.trim();
    let Some(op_start) = atom.find(['=', '!', '<', '>']) else {
        if atom.is_empty() || atom.contains(char::is_whitespace) {
            return Err(format!("malformed atom {atom:?}"));
        }
        return Ok(VersionConstraint::any(atom));
    };
    let name = atom[..op_start].trim();
    let rest = &atom[op_start..];
    let (relation, len) = [
        ("!=", Relation::Neq),
        ("<=", Relation::Le),
        (">=", Relation::Ge),
        ("=", Relation::Eq),
        ("<", Relation::Lt),
        (">", Relation::Gt),
    ]
    .into_iter()
    .find(|(sym, _)| rest.starts_with(sym))
    .map(|(sym, r)| (r, sym.len()))
    .ok_or_else(|| format!("unknown relation in {atom:?}"))?;
    let bound = rest[len..].trim();
    let bound = bound
        .parse::<u64>()
        .ok()
        .and_then(PackageVersion::new)
        .ok_or_else(|| format!("bad version bound {bound:?} in {atom:?}"))?;
    if name.is_empty() || name.contains(char::is_whitespace) {
        return Err(format!("malformed atom {atom:?}"));
    }
    Ok(VersionConstraint::bounded(name, relation, bound))
}
