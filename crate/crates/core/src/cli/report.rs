//! Fixed-width run report: one row per instance, one column per criteria
//! run, each cell holding seconds and the alignment measures.

use std::fmt::Write;
use std::time::Duration;

use crate::cudf::{reduced_sources, SourceClusterIndex};

/// (#sources with more than one version, #source versions, #packages,
/// #cross-version pairs), all counted over reduced sources only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SizeTuple {
    pub sources: usize,
    pub source_versions: usize,
    pub packages: usize,
    pub pairs: usize,
}

impl SizeTuple {
    pub fn of(idx: &SourceClusterIndex) -> Self {
        let mut size = Self::default();
        for s in reduced_sources(idx) {
            let cluster = idx.get(&s).expect("reduced source is indexed");
            size.sources += 1;
            size.source_versions += cluster.version_count();
            size.packages += cluster.package_count();
            size.pairs += cluster.cross_version_pairs().len();
        }
        size
    }
}

impl std::fmt::Display for SizeTuple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "({},{},{},{})",
            self.sources, self.source_versions, self.packages, self.pairs
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportColumn {
    pub label: String,
    pub elapsed: Duration,
    /// unaligned packages, pairs, version changes, clusters
    pub measures: [u64; 4],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunReport {
    pub id: String,
    pub size: SizeTuple,
    pub columns: Vec<ReportColumn>,
}

/// Elapsed time in hundredths of a second, so printed totals are exact
/// sums of printed cells.
fn centis(d: Duration) -> u128 {
    (d.as_micros() + 5_000) / 10_000
}

fn seconds(c: u128) -> String {
    format!("{}.{:02}", c / 100, c % 100)
}

pub fn report_table(reports: &[RunReport]) -> String {
    let mut labels: Vec<&str> = Vec::new();
    for r in reports {
        for c in &r.columns {
            if !labels.contains(&c.label.as_str()) {
                labels.push(&c.label);
            }
        }
    }

    let mut cells: Vec<Vec<String>> = Vec::new();
    let mut column_totals = vec![0u128; labels.len()];
    let mut grand = 0u128;
    for r in reports {
        let mut row = vec![r.id.clone(), r.size.to_string()];
        let mut total = 0;
        for (k, label) in labels.iter().enumerate() {
            match r.columns.iter().find(|c| c.label == *label) {
                Some(c) => {
                    let t = centis(c.elapsed);
                    total += t;
                    column_totals[k] += t;
                    let [a, b, cc, d] = c.measures;
                    row.push(format!("{} ({a},{b},{cc},{d})", seconds(t)));
                }
                None => row.push("-".into()),
            }
        }
        grand += total;
        row.push(seconds(total));
        cells.push(row);
    }

    let mut header = vec!["id".to_string(), "size".to_string()];
    header.extend(labels.iter().map(|l| l.to_string()));
    header.push("total".into());
    let mut footer = vec!["Total time".to_string(), String::new()];
    footer.extend(column_totals.iter().map(|&t| seconds(t)));
    footer.push(seconds(grand));

    let mut widths: Vec<usize> = header.iter().map(String::len).collect();
    for row in &cells {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.len());
        }
    }
    // the footer label spans the id and size columns
    let span = widths[0] + 2 + widths[1];
    if footer[0].len() > span {
        widths[1] += footer[0].len() - span;
    }

    let mut out = String::new();
    let mut line = |row: &[String]| {
        let mut text = format!(
            "{:<w0$}  {:<w1$}",
            row[0],
            row[1],
            w0 = widths[0],
            w1 = widths[1]
        );
        for (c, w) in row[2..].iter().zip(&widths[2..]) {
            let _ = write!(text, "  {c:>w$}");
        }
        out.push_str(text.trim_end());
        out.push('\n');
    };
    line(&header);
    for row in &cells {
        line(row);
    }
    let span = widths[0] + 2 + widths[1];
    let mut text = format!("{:<span$}", footer[0]);
    for (c, w) in footer[2..].iter().zip(&widths[2..]) {
        let _ = write!(text, "  {c:>w$}");
    }
    out.push_str(text.trim_end());
    out.push('\n');
    out
}
