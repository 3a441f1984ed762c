//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints exactly one PASS or FAIL line.

mod common;

use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use srcalign::criteria::{measure, measure_all, ClusterRestriction, CriterionKind};
use srcalign::criteria_spec::parse_criteria;
use srcalign::cudf::{
    build_cluster_index, parse_cudf, reduced_sources, Installation, PackageUnit, PackageVersion,
    SourceVersionToken, Universe,
};
use srcalign::milp::{assemble, EncodeError};
use srcalign::sat::build_formula;
use srcalign::solver::{brute_force, solve_lex, verify, SolveBudget, SolveStatus, BRUTE_FORCE_CAP};

use common::{all_installations, aux_minimum, medium_family, sat_minimum, small_family};

const SEEDS: u64 = 200;
const DATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data");

fn variant(kind: CriterionKind) -> &'static str {
    kind.name()
}

/// Four packages of one source; package i is installed at source version
/// `config[i]`.
fn cluster_instance(config: [u64; 4]) -> (Universe, Installation) {
    let mut units = Vec::new();
    for i in 0..4 {
        for v in 1..=4 {
            let p = PackageUnit::new(format!("q{i}"), PackageVersion::new(v).unwrap())
                .with_source("s", SourceVersionToken::new(v.to_string()).unwrap());
            units.push(p);
        }
    }
    let u = Universe::new(units).unwrap();
    let s = (0..4)
        .map(|i| {
            u.find(&format!("q{i}"), PackageVersion::new(config[i]).unwrap())
                .unwrap()
        })
        .collect();
    (u, s)
}

fn table_reproduction() -> String {
    let rows: [([u64; 4], [u64; 4]); 5] = [
        ([1, 1, 1, 1], [0, 0, 0, 0]),
        ([1, 1, 2, 1], [4, 3, 1, 1]),
        ([1, 1, 2, 2], [4, 4, 1, 1]),
        ([1, 1, 2, 3], [4, 5, 2, 1]),
        ([1, 2, 3, 4], [4, 6, 3, 1]),
    ];
    let mut slowest = Duration::ZERO;
    for (config, expected) in rows {
        let (u, s) = cluster_instance(config);
        let idx = build_cluster_index(&u);
        let initial = u.initial_installation();
        // best of three, to keep scheduler noise out of the timing
        let mut best = Duration::MAX;
        for _ in 0..3 {
            let t = Instant::now();
            let got = measure_all(&u, &initial, &s, &idx, &ClusterRestriction::all()).alignment();
            best = best.min(t.elapsed());
            assert_eq!(got, expected, "cluster {config:?}");
        }
        slowest = slowest.max(best);
    }
    assert!(
        slowest < Duration::from_millis(1),
        "measure_all took {slowest:?}"
    );
    format!("5 rows exact, slowest {slowest:?}")
}

fn encoding_equivalence() -> String {
    let started = Instant::now();
    let mut checked = 0u64;
    for seed in 0..SEEDS {
        let (u, req) = small_family(seed);
        let idx = build_cluster_index(&u);
        let initial = u.initial_installation();
        for kind in CriterionKind::ALIGNMENT {
            let spec = parse_criteria(&format!("-unaligned({})", variant(kind))).unwrap();
            let lp = match assemble(&u, &req, &spec) {
                Ok(lp) => lp,
                Err(EncodeError::EmptyExpansion { .. }) => {
                    assert!(
                        all_installations(&u).all(|s| !verify(&u, &req, &s).0),
                        "seed {seed}"
                    );
                    continue;
                }
                Err(e) => panic!("seed {seed}: {e}"),
            };
            for s in all_installations(&u) {
                let expected = verify(&u, &req, &s).0.then(|| {
                    measure(kind, &u, &initial, &s, &idx, &ClusterRestriction::all()) as i64
                });
                assert_eq!(
                    aux_minimum(&lp, 0, &s),
                    expected,
                    "seed {seed}, {kind}, {s:?}"
                );
                checked += 1;
            }
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    format!(
        "{SEEDS} universes, {checked} package assignments, {:.1}s",
        elapsed.as_secs_f64()
    )
}

fn lex_oracle() -> String {
    let started = Instant::now();
    for seed in 0..SEEDS {
        let (u, req) = medium_family(seed);
        for kind in CriterionKind::ALIGNMENT {
            let spec = parse_criteria(&format!("-removed,-unaligned({})", variant(kind))).unwrap();
            let oracle = brute_force(&u, &req, &spec, BRUTE_FORCE_CAP).unwrap();
            let lp = match assemble(&u, &req, &spec) {
                Ok(lp) => lp,
                Err(EncodeError::EmptyExpansion { .. }) => {
                    assert_eq!(oracle.status, SolveStatus::Infeasible, "seed {seed}");
                    continue;
                }
                Err(e) => panic!("seed {seed}: {e}"),
            };
            let got = solve_lex(&lp, SolveBudget::default()).unwrap();
            assert_eq!(got.status, oracle.status, "seed {seed}, {kind}");
            assert_eq!(
                got.objective_values, oracle.objective_values,
                "seed {seed}, {kind}"
            );
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(300), "took {elapsed:?}");
    format!(
        "{SEEDS} instances x 4 stacks, {:.1}s",
        elapsed.as_secs_f64()
    )
}

fn sat_dominance() -> String {
    let mut models = 0u64;
    for seed in 0..SEEDS {
        let (u, req) = medium_family(seed);
        let idx = build_cluster_index(&u);
        let initial = u.initial_installation();
        let sources = reduced_sources(&idx);
        for kind in [
            CriterionKind::UnalignedPackages,
            CriterionKind::UnalignedPairs,
        ] {
            let spec = parse_criteria(&format!("-unaligned({})", variant(kind))).unwrap();
            let Ok(lp) = assemble(&u, &req, &spec) else {
                continue;
            };
            let f = build_formula(&u, &req, &idx, Some(kind), &sources, &lp).unwrap();
            let mut best: Option<u64> = None;
            for s in all_installations(&u) {
                let got = sat_minimum(&f, u.len(), &s);
                let expected = verify(&u, &req, &s)
                    .0
                    .then(|| measure(kind, &u, &initial, &s, &idx, &ClusterRestriction::all()));
                assert_eq!(got, expected, "seed {seed}, {kind}, {s:?}");
                if let Some(c) = got {
                    best = Some(best.map_or(c, |b| b.min(c)));
                    models += 1;
                }
            }
            let oracle = brute_force(&u, &req, &spec, BRUTE_FORCE_CAP).unwrap();
            assert_eq!(
                best.map(|b| vec![b as i64]),
                (oracle.status == SolveStatus::Optimal).then_some(oracle.objective_values)
            );
        }
    }
    format!("{SEEDS} instances, {models} package assignments checked")
}

fn doc_binary_mismatch() -> String {
    let (u, req) =
        parse_cudf(&fs::read_to_string(Path::new(DATA).join("doc_mismatch.cudf")).unwrap())
            .unwrap();
    let idx = build_cluster_index(&u);
    let initial = u.initial_installation();
    let all = ClusterRestriction::all();
    let removed =
        |s: &Installation| measure(CriterionKind::Removed, &u, &initial, s, &idx, &all) as i64;
    let unaligned = |s: &Installation| {
        measure(
            CriterionKind::UnalignedPackages,
            &u,
            &initial,
            s,
            &idx,
            &all,
        ) as i64
    };

    let solo = solve_lex(
        &assemble(&u, &req, &parse_criteria("-removed").unwrap()).unwrap(),
        SolveBudget::default(),
    )
    .unwrap();
    assert_eq!(solo.status, SolveStatus::Optimal);
    let opt = solo.objective_values[0];
    // a removal-optimal solution that mixes the two source versions
    let mixed = all_installations(&u)
        .find(|s| verify(&u, &req, s).0 && removed(s) == opt && unaligned(s) > 0)
        .expect("some removal-optimal solution is unaligned");

    let lp = assemble(
        &u,
        &req,
        &parse_criteria("-removed,-unaligned(packages)").unwrap(),
    )
    .unwrap();
    let lex = solve_lex(&lp, SolveBudget::default()).unwrap();
    let s = lex.installation.as_ref().unwrap();
    assert_eq!(lex.objective_values, [opt, 0]);
    assert!(verify(&u, &req, s).0);
    assert_eq!((removed(s), unaligned(s)), (opt, 0));
    format!(
        "removed alone admits unaligned={}, stacked gives removed={opt} unaligned=0",
        unaligned(&mixed)
    )
}

fn emit_determinism() -> String {
    let bin = env!("CARGO_BIN_EXE_srcalign");
    let kernel = format!("{DATA}/kernel_headers.cudf");
    let runs = [
        (
            vec!["--input", kernel.as_str()],
            "-removed,-unaligned(packages),-unaligned(pairs),-unaligned(version_changes)",
        ),
        (
            vec!["--seed", "17"],
            "-removed,-unaligned(pairs),-unaligned(clusters)",
        ),
    ];
    let mut files = 0;
    for (source, criteria) in &runs {
        let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
        for d in &dirs {
            let status = Command::new(bin)
                .args(source)
                .args([
                    "--criteria",
                    criteria,
                    "--mode",
                    "emit",
                    "--emit",
                    "lp,opb,wcnf",
                    "--out-dir",
                ])
                .arg(d.path())
                .status()
                .unwrap();
            assert!(status.success());
        }
        let listing = |d: &Path| {
            let mut names: Vec<String> = fs::read_dir(d)
                .unwrap()
                .map(|e| e.unwrap().file_name().into_string().unwrap())
                .collect();
            names.sort();
            names
        };
        let names = listing(dirs[0].path());
        assert_eq!(names, listing(dirs[1].path()));
        for ext in [".lp", ".opb", ".wcnf"] {
            assert!(
                names.iter().any(|n| n.ends_with(ext)),
                "no {ext} file in {names:?}"
            );
        }
        for n in &names {
            assert_eq!(
                fs::read(dirs[0].path().join(n)).unwrap(),
                fs::read(dirs[1].path().join(n)).unwrap(),
                "{n} differs"
            );
            files += 1;
        }
    }
    format!("{files} files byte-identical across two runs")
}

fn bundled_instances() -> String {
    let specs = [
        "-removed",
        "-removed,-unaligned(packages)",
        "-removed,-unaligned(pairs)",
        "-removed,-unaligned(version_changes)",
        "-removed,-unaligned(clusters)",
        "-removed,-new,-changed,-notuptodate,-unsat_recommends",
    ];
    let mut paths: Vec<_> = fs::read_dir(DATA)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "cudf"))
        .collect();
    paths.sort();
    let mut solved = 0;
    for path in &paths {
        let (u, req) = parse_cudf(&fs::read_to_string(path).unwrap()).unwrap();
        assert!(
            u.len() <= 15,
            "{} is larger than the desk-scale cap",
            path.display()
        );
        for spec in specs {
            let spec = parse_criteria(spec).unwrap();
            let oracle = brute_force(&u, &req, &spec, BRUTE_FORCE_CAP).unwrap();
            let r = match assemble(&u, &req, &spec) {
                Ok(lp) => solve_lex(&lp, SolveBudget::default()).unwrap(),
                Err(EncodeError::EmptyExpansion { .. }) => {
                    assert_eq!(oracle.status, SolveStatus::Infeasible);
                    continue;
                }
                Err(e) => panic!("{}: {e}", path.display()),
            };
            assert_ne!(r.status, SolveStatus::BudgetExceeded, "{}", path.display());
            assert_eq!(r.status, oracle.status, "{}", path.display());
            if let Some(s) = &r.installation {
                assert!(
                    verify(&u, &req, s).0,
                    "{}: solution fails verification",
                    path.display()
                );
                assert_eq!(r.objective_values, oracle.objective_values);
                solved += 1;
            }
        }
    }
    assert!(solved > 0);
    format!("{} instances, {solved} solutions verified", paths.len())
}

fn main() -> ExitCode {
    type Check = (&'static str, fn() -> String);
    let criteria: [Check; 7] = [
        ("alignment table reproduction", table_reproduction),
        ("encoding/measure equivalence", encoding_equivalence),
        ("lexicographic solver vs brute force", lex_oracle),
        ("weighted CNF dominance equivalence", sat_dominance),
        ("doc/binary source mismatch", doc_binary_mismatch),
        ("deterministic emit", emit_determinism),
        ("bundled instances solve and verify", bundled_instances),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match panic::catch_unwind(AssertUnwindSafe(check)) {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(e) => {
                failed += 1;
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                println!("criterion {}: FAIL  {name}: {msg}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
