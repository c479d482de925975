//! Acceptance checks, one line per criterion. Run with
//! `cargo test -p knotlattice --test acceptance`.

use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use proptest::test_runner::{Config, TestRunner};

use knotlattice::complex::{CellMap, FilteredComplex};
use knotlattice::grading::grading_shift;
use knotlattice::homology::{assoc_graded_homology, betti, genus, total_rank};
use knotlattice::plumbing::parse_graph;
use knotlattice::rational::{q, qf};
use knotlattice::reduction::{ar_line, brieskorn_star, tau_lattice_oracle, Affine, CertifiedModel, Tau};
use knotlattice::script::{parse_script, run};
use knotlattice::surgery::{alexander_table, verify_surgery, xki, KnotFamily};
use knotlattice::Q;

/// `Ok((detail, None))` passes; `Ok((detail, Some(note)))` is a deviation
/// from the stated expectation that is explained by an independent check.
type Check = std::result::Result<(String, Option<String>), String>;

fn pass(detail: impl Into<String>) -> Check {
    Ok((detail.into(), None))
}

fn ensure(cond: bool, msg: impl Into<String>) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn err(e: knotlattice::Error) -> String {
    e.to_string()
}

fn root() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../.."))
}

fn trefoil_line() -> Check {
    let (l, _) = ar_line(&[2, 3]).map_err(err)?;
    ensure((l.lo(), l.hi()) == (0, 2), "support")?;
    let heights: Vec<(Q, Q)> = (0..3).map(|i| (l.h1[i], l.h2[i])).collect();
    ensure(heights == vec![(q(0), q(-2)), (q(-2), q(-2)), (q(-2), q(0))], format!("heights {heights:?}"))?;
    ensure((l.alpha, l.gamma) == (6, -5), "alpha, gamma")?;
    ensure(l.gamma_map == Affine { sign: 1, offset: -6 }, "Gamma(n) = n - 6")?;
    ensure(l.j_map == Affine { sign: -1, offset: 2 }, "J(n) = 2 - n")?;
    pass("support [0,2], alpha 6, gamma -5, Gamma(n)=n-6, J(n)=2-n")
}

/// The published joint-extrema table.
const PUBLISHED_237: [(i64, i64, i64); 23] = [
    (0, 0, -44), (1, -2, -44), (6, 0, -32), (7, -2, -32), (12, -2, -22), (13, -4, -22),
    (14, -4, -20), (15, -6, -20), (18, -6, -14), (19, -8, -14), (20, -8, -12), (22, -12, -2),
    (24, -12, -8), (25, -14, -8), (26, -14, -6), (29, -20, -6), (30, -20, -4), (31, -22, -4),
    (32, -22, -2), (37, -32, -2), (38, -32, 0), (43, -44, -2), (44, -44, 0),
];

fn sigma237_line() -> Check {
    let (l, _) = ar_line(&[2, 3, 7]).map_err(err)?;
    ensure((l.alpha, l.gamma, l.lo(), l.hi()) == (42, 1, 0, 44), "alpha 42, gamma 1, support [0,44]")?;
    let (s, ok) = l.simplify();
    ensure(ok, "line violates joint monotonicity")?;
    let rows: Vec<(i64, i64, i64)> =
        (0..s.len()).map(|i| (s.positions[i], s.h1[i].to_integer(), s.h2[i].to_integer())).collect();
    ensure(rows.len() == PUBLISHED_237.len(), format!("{} rows", rows.len()))?;
    let mut differ = vec![];
    for (r, p) in rows.iter().zip(&PUBLISHED_237) {
        ensure(r.0 == p.0, format!("row positions differ: {r:?} vs {p:?}"))?;
        if r != p {
            differ.push((*r, *p));
        }
    }
    // A row may differ from the published table only where the published
    // value breaks the symmetry h2(n) = h1(44 - n) of the computed line.
    for ((n, _, h2), _) in &differ {
        let mirror = l.heights_at(44 - n).ok_or("mirror vertex")?.0;
        ensure(q(*h2) == mirror, format!("row {n} differs and is not forced by symmetry"))?;
    }
    ensure(differ.len() <= 1, format!("{} rows differ", differ.len()))?;
    // The published table is itself symmetric under n -> 44 - n with the
    // heights swapped, except at the rows that differ.
    for &(n, a, b) in &PUBLISHED_237 {
        let mirror = PUBLISHED_237.iter().find(|r| r.0 == 44 - n).ok_or("published mirror row")?;
        let asym = (mirror.1, mirror.2) != (b, a);
        ensure(asym == differ.iter().any(|d| d.0 .0 == n), format!("published row {n}: symmetry"))?;
    }
    let x = l.to_complex();
    ensure(genus(&x) == Some((q(22), 1)), "genus 22 with rank 1")?;
    let detail = format!("{}/23 rows match, genus 22, top rank 1", 23 - differ.len());
    let note = differ
        .iter()
        .map(|((n, a, b), (_, c, d))| {
            format!("row n={n}: published ({c},{d}), computed ({a},{b}); only this published row breaks the table's own symmetry h2(n)=h1(44-n)")
        })
        .collect::<Vec<_>>();
    Ok((detail, (!note.is_empty()).then(|| note.join("; "))))
}

fn tau_cross_validation() -> Check {
    let mut out = vec![];
    for p in [vec![2, 3], vec![2, 3, 5], vec![2, 3, 7]] {
        let tau = Tau::uncalibrated(&p).map_err(err)?;
        let a = tau.alpha;
        let oracle = tau_lattice_oracle(&brieskorn_star(&p).map_err(err)?, 0, 2 * a).map_err(err)?;
        ensure(oracle == tau.values(0, 2 * a), format!("{p:?}: closed form differs from the oracle"))?;
        ensure((0..=a).all(|n| tau.delta(n + a) == tau.delta(n) + 1), format!("{p:?}: delta periodicity"))?;
        out.push(format!("{p:?} on [0,{}]", 2 * a));
    }
    pass(out.join(", "))
}

fn surgery_verification() -> Check {
    let g = parse_graph(&std::fs::read_to_string(root().join("graphs/trefoil.txt")).map_err(|e| e.to_string())?)
        .map_err(err)?;
    let mut out = vec![];
    for n in [-7, -8, -9] {
        let r = verify_surgery(&g, n).map_err(err)?;
        ensure(r.passed, format!("n={n}: {}", r.first_discrepancy.clone().unwrap_or_default()))?;
        let cells: usize = r.classes.iter().map(|c| c.cells).sum();
        out.push(format!("n={n}: {} Spin^c, {cells} cells", r.classes.len()));
    }
    pass(out.join("; "))
}

fn iterated_example() -> Check {
    let text = std::fs::read_to_string(root().join("pipelines/iterated.toml")).map_err(|e| e.to_string())?;
    let result = run(&parse_script(&text).map_err(err)?, None).map_err(err)?;
    let [mid, last] = &result.reports[..] else { return Err("expected two reports".into()) };
    let published = [
        ("0,0", (-7, 17)),
        ("1,0", (-13, 11)),
        ("0,1", (-3, 9)),
        ("1,1", (-9, 3)),
        ("0,2", (-11, 13)),
        ("1,2", (-17, 7)),
    ];
    ensure(mid.classes.len() == 6, format!("{} Spin^c structures on the intermediate manifold", mid.classes.len()))?;
    for (label, (lo, hi)) in published {
        let c = mid.classes.iter().find(|c| c.label == label).ok_or(format!("no class {label}"))?;
        ensure(c.alexander == Some((qf(lo, 12), qf(hi, 12))), format!("[{label}] range {:?}", c.alexander))?;
    }
    ensure(result.log.iter().any(|l| l.contains("Seifert framing -1/6")), "framing conversion")?;
    ensure(last.genus().map(|g| g.0) == Some(q(6)), format!("top Alexander {:?}", last.genus()))?;
    pass(format!("6 classes, 12 endpoints match, Seifert framing -1/6, top Alexander 6 ({} cells)", last.classes[0].cells))
}

fn grading_checks() -> Check {
    ensure(grading_shift(&q(0), &q(-2)).map_err(err)? == qf(-1, 4), "grading_shift(0,-2)")?;
    ensure(grading_shift(&q(-3), &q(-3)).map_err(err)? == qf(-1, 2), "grading_shift(-3,-3)")?;
    let mut runner = TestRunner::new(Config { cases: 1000, failure_persistence: None, ..Config::default() });
    let strat = (-500i64..500, 1i64..40, -500i64..500, 1i64..40);
    runner
        .run(&strat, |(a, b, c, d)| {
            let (i, s) = (qf(a, b), qf(c, d));
            if s == q(0) {
                return Ok(());
            }
            let g = |x: Q| grading_shift(&x, &s).unwrap();
            proptest::prop_assert_eq!(g(i + s), g(i) + q(2) * i);
            proptest::prop_assert_eq!(g(i) - g(-i), -q(2) * i);
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    pass("grading_shift(0,-2)=-1/4, grading_shift(-3,-3)=-1/2, identities on 1000 random inputs")
}

fn filtered_ok(x: &FilteredComplex, what: &str) -> std::result::Result<(), String> {
    ensure(x.boundary_squares_to_zero() && x.dimensions_consistent(), format!("{what}: boundary"))?;
    ensure(x.is_monotone(), format!("{what}: monotonicity"))?;
    ensure(x.heights_in_one_coset(), format!("{what}: cosets"))
}

fn is_identity(m: &CellMap) -> bool {
    (0..m.len()).all(|c| m.get(c) == Some(c))
}

fn property_suite() -> Check {
    let mut complexes = 0;
    // Certified models: every component has unfiltered rank one.
    let trefoil = parse_graph(&std::fs::read_to_string(root().join("graphs/trefoil.txt")).unwrap()).map_err(err)?;
    let sigma = parse_graph(&std::fs::read_to_string(root().join("graphs/sigma237.txt")).unwrap()).map_err(err)?;
    for model in [CertifiedModel::knot(&trefoil).map_err(err)?, CertifiedModel::lattice(&sigma).map_err(err)?] {
        for x in &model.complexes {
            filtered_ok(&x.complex, "certified model")?;
            ensure(total_rank(&x.complex) == 1, "certified component without rank one")?;
            complexes += 1;
        }
    }
    // Lines: J strict, simplify keeps homology.
    for p in [vec![2, 3], vec![2, 3, 5], vec![2, 3, 7]] {
        let (l, _) = ar_line(&p).map_err(err)?;
        let f = KnotFamily::brieskorn(&p).map_err(err)?;
        f.check().map_err(|e| format!("{p:?}: {e}"))?;
        let j = &f.jay.as_ref().ok_or("line J is not strict")?[0];
        ensure(is_identity(&j.then(j)), "line J is not an involution")?;
        let (s, _) = l.simplify();
        let (a, b) = (l.to_complex(), s.to_complex());
        ensure(betti(&a) == betti(&b) && assoc_graded_homology(&a) == assoc_graded_homology(&b), "simplify")?;
        complexes += 2;
    }
    // Surgeries: filtered families, I strict, Gamma then I is J, slack stability.
    let x = KnotFamily::brieskorn(&[2, 3]).map_err(err)?;
    for (f, s) in [(KnotFamily::unknot(), -2), (KnotFamily::unknot(), -5), (x.clone(), -2), (x.clone(), -3)] {
        let a = xki(&f, q(s), 1).map_err(err)?;
        let b = xki(&f, q(s), 2).map_err(err)?;
        a.family.check().map_err(|e| format!("surgery {s}: {e}"))?;
        for x in &a.family.complexes {
            filtered_ok(x, "surgery")?;
            ensure(total_rank(x) == 1, "surgery class without rank one")?;
            complexes += 1;
        }
        if let (Some(i), Some(j)) = (&a.family.iota, &a.family.jay) {
            for t in 0..a.family.len() {
                ensure(is_identity(&i[t].then(&i[a.family.conj[t]])), "I_out is not an involution")?;
                ensure(a.family.gamma[t].then(&i[a.family.shift_k[t]]) == j[t], "J_out differs from I_out after Gamma_out")?;
            }
        }
        let (sa, sb) = (a.family.summaries(), b.family.summaries());
        ensure(
            sa.iter().zip(&sb).all(|(p, r)| p.d == r.d && p.ranks == r.ranks),
            format!("surgery {s}: slack changes the invariants"),
        )?;
    }
    let t = alexander_table(&KnotFamily::tensor(
        &xki(&x, q(-2), 1).map_err(err)?.family,
        &xki(&x, q(-3), 1).map_err(err)?.family,
    ));
    ensure(t.len() == 6, "tensor")?;
    pass(format!("{complexes} complexes checked; randomized cases live in the properties test"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 7] = [
        ("trefoil line model", trefoil_line),
        ("Sigma(2,3,7) regular fiber", sigma237_line),
        ("tau cross-validation", tau_cross_validation),
        ("surgery verification", surgery_verification),
        ("iterated surgery example", iterated_example),
        ("grading micro-checks", grading_checks),
        ("property suite", property_suite),
    ];
    let (mut passed, mut deviations, mut failed) = (0, 0, 0);
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let r = f();
        let secs = start.elapsed().as_secs_f64();
        match r {
            Ok((detail, None)) => {
                passed += 1;
                println!("criterion {}: PASS {name} ({secs:.2}s): {detail}", i + 1);
            }
            Ok((detail, Some(note))) => {
                deviations += 1;
                println!("criterion {}: DEVIATION {name} ({secs:.2}s): {detail}; {note}", i + 1);
            }
            Err(e) => {
                failed += 1;
                println!("criterion {}: FAIL {name} ({secs:.2}s): {e}", i + 1);
            }
        }
    }
    println!("{passed} passed, {deviations} with documented deviations, {failed} failed");
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
