use proptest::prelude::*;

use knotlattice::complex::{build_cube_complex, CellMap, CubeBox, LatticeComplex};
use knotlattice::grading::{canonical_char, grading_shift};
use knotlattice::homology::{assoc_graded_homology, betti, total_rank};
use knotlattice::plumbing::{Lattice, PlumbingGraph};
use knotlattice::rational::{q, qf};
use knotlattice::reduction::{Affine, CertifiedModel, FilteredLine};
use knotlattice::surgery::{xki, KnotFamily};
use knotlattice::Q;

fn rational() -> impl Strategy<Value = Q> {
    (-200i64..200, 1i64..30).prop_map(|(n, d)| qf(n, d))
}

fn nonzero_rational() -> impl Strategy<Value = Q> {
    rational().prop_filter("nonzero", |x| *x != q(0))
}

/// Connected weighted trees on `2..=max` vertices whose form is strictly
/// diagonally dominant, plus a vertex to attach a knot to.
fn tree(max: usize) -> impl Strategy<Value = (PlumbingGraph, usize)> {
    (2..=max)
        .prop_flat_map(|n| {
            let parents: Vec<_> = (1..n).map(|i| 0..i).collect();
            (parents, proptest::collection::vec(1i64..3, n), 0..n)
        })
        .prop_map(|(parents, extra, knot)| {
            let n = extra.len();
            let mut deg = vec![0i64; n];
            let mut edges = vec![];
            for (i, &p) in parents.iter().enumerate() {
                edges.push((p, i + 1));
                deg[p] += 1;
                deg[i + 1] += 1;
            }
            let ids: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
            let weights = (0..n).map(|i| Some(-deg[i].max(1) - extra[i])).collect();
            (PlumbingGraph::new(ids, weights, edges).unwrap(), knot)
        })
}

fn with_knot(g: &PlumbingGraph, v: usize) -> PlumbingGraph {
    let mut ids = g.ids().to_vec();
    let mut weights = g.weights().to_vec();
    let mut edges = g.edges().to_vec();
    ids.push("k".into());
    weights.push(None);
    edges.push((v, ids.len() - 1));
    PlumbingGraph::new(ids, weights, edges).unwrap()
}

fn is_identity(m: &CellMap) -> bool {
    (0..m.len()).all(|c| m.get(c) == Some(c))
}

fn boxed(lat: &Lattice, base: Vec<i64>, e: Option<&[i64]>) -> LatticeComplex {
    build_cube_complex(lat, &CubeBox::radius(base, 1), e).unwrap()
}

/// Lines whose steps all move both heights the same way.
fn line() -> impl Strategy<Value = FilteredLine> {
    let step = prop_oneof![
        Just((-2, 0)),
        Just((0, 2)),
        Just((2, 4)),
        Just((-4, -2)),
        Just((2, 2)),
        Just((0, 0)),
        Just((-2, -2))
    ];
    proptest::collection::vec(step, 0..30).prop_map(|steps| {
        let (mut a, mut b) = (0i64, -2i64);
        let mut h1 = vec![q(a)];
        let mut h2 = vec![q(b)];
        for (da, db) in &steps {
            a += da;
            b += db;
            h1.push(q(a));
            h2.push(q(b));
        }
        let id = Affine { sign: 1, offset: 0 };
        FilteredLine {
            positions: (0..h1.len() as i64).collect(),
            h1,
            h2,
            alpha: 0,
            gamma: 0,
            i_map: id.clone(),
            j_map: id.clone(),
            gamma_map: id,
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn grading_shift_moves_by_2i(i in rational(), s in nonzero_rational()) {
        prop_assert_eq!(grading_shift(&(i + s), &s).unwrap(), grading_shift(&i, &s).unwrap() + q(2) * i);
    }

    #[test]
    fn grading_shift_antisymmetry(i in rational(), s in nonzero_rational()) {
        prop_assert_eq!(grading_shift(&i, &s).unwrap() - grading_shift(&(-i), &s).unwrap(), -q(2) * i);
        prop_assert_eq!(grading_shift(&(s - i), &s).unwrap(), grading_shift(&i, &s).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cube_complexes_are_filtered((g, v) in tree(4), shift in proptest::collection::vec(-1i64..=1, 4)) {
        let kg = with_knot(&g, v);
        let lat = g.lattice().unwrap();
        let e = kg.knot_vector().unwrap();
        let k0 = canonical_char(&lat);
        let z: Vec<i64> = shift[..lat.dim()].to_vec();
        let base = knotlattice::grading::translate(&lat, &k0, &z);
        let x = boxed(&lat, base, Some(&e)).complex;
        prop_assert!(x.boundary_squares_to_zero());
        prop_assert!(x.dimensions_consistent());
        prop_assert!(x.is_monotone());
        prop_assert!(x.heights_in_one_coset());
        prop_assert_eq!(total_rank(&x), 1);
    }

    #[test]
    fn involutions_on_conjugate_boxes((g, v) in tree(4)) {
        let kg = with_knot(&g, v);
        let lat = g.lattice().unwrap();
        let e = kg.knot_vector().unwrap();
        let k = canonical_char(&lat);
        let minus_k: Vec<i64> = k.iter().map(|x| -x).collect();
        let jk: Vec<i64> = k.iter().zip(&e).map(|(x, a)| -x - 2 * a).collect();
        let x = boxed(&lat, k, Some(&e));
        let xi = boxed(&lat, minus_k, Some(&e));
        let xj = boxed(&lat, jk, Some(&e));

        let i = x.involution_i(&lat, &xi).unwrap();
        let back = xi.involution_i(&lat, &x).unwrap();
        prop_assert!(is_identity(&i.then(&back)));
        prop_assert!(i.is_chain_map(&x.complex, &xi.complex));
        prop_assert!(i.preserves(&x.complex.h1, &xi.complex.h1));

        let j = x.involution_j(&lat, &e, &xj).unwrap();
        let jback = xj.involution_j(&lat, &e, &x).unwrap();
        prop_assert!(is_identity(&j.then(&jback)));
        prop_assert!(j.is_chain_map(&x.complex, &xj.complex));
        prop_assert!(j.preserves(x.complex.h2.as_ref().unwrap(), &xj.complex.h1));
        prop_assert!(j.preserves(&x.complex.h1, xj.complex.h2.as_ref().unwrap()));

        let gamma = xj.flip_gamma(&e, &xi).unwrap();
        prop_assert_eq!(j.then(&gamma), i);
    }

    #[test]
    fn simplify_keeps_homology(l in line()) {
        let (s, ok) = l.simplify();
        prop_assert!(ok);
        let (a, b) = (l.to_complex(), s.to_complex());
        prop_assert_eq!(betti(&a), betti(&b));
        prop_assert_eq!(assoc_graded_homology(&a), assoc_graded_homology(&b));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn certified_components_have_rank_one((g, v) in tree(3)) {
        let model = CertifiedModel::knot(&with_knot(&g, v)).unwrap();
        prop_assert_eq!(model.complexes.len() as i64, model.lattice.det().abs());
        for x in &model.complexes {
            prop_assert_eq!(total_rank(&x.complex), 1);
            prop_assert!(x.complex.is_monotone() && x.complex.heights_in_one_coset());
        }
    }

    #[test]
    fn transported_involutions(s in -6i64..=-1, slack in 1i64..=2) {
        let sg = xki(&KnotFamily::unknot(), q(s), slack).unwrap();
        let out = &sg.family;
        out.check().unwrap();
        let iota = out.iota.as_ref().unwrap();
        let jay = out.jay.as_ref().unwrap();
        // B cells whose flip image falls below the target window and is
        // pushed through the truncation.
        let pushed = |t: usize, c: usize| {
            let pv = &sg.assembled[t].provenance[c];
            let cl = &sg.table.classes[t];
            let (t2, off) = sg.table.locate(cl.t0, cl.i0 + q(1)).unwrap();
            !pv.prism && sg.windows[t].0 + pv.part as i64 + off < sg.windows[t2].0
        };
        let mut strict = 0;
        for t in 0..out.len() {
            let u = out.conj[t];
            prop_assert!(is_identity(&iota[t].then(&iota[u])));
            prop_assert_eq!(&out.gamma[t].then(&iota[out.shift_k[t]]), &jay[t]);
            let w = out.conj[out.shift_k[t]];
            for c in 0..jay[t].len() {
                let Some(y) = jay[t].get(c) else { continue };
                if pushed(t, c) || pushed(w, y) {
                    continue;
                }
                strict += 1;
                prop_assert_eq!(jay[w].get(y), Some(c));
            }
        }
        prop_assert!(strict > 0);
    }

    #[test]
    fn window_slack_does_not_change_invariants(p in prop_oneof![Just(vec![2i64, 3]), Just(vec![2, 3, 5])], s in -4i64..=-1) {
        let f = KnotFamily::brieskorn(&p).unwrap();
        let a = xki(&f, q(s), 1).unwrap().family.summaries();
        let b = xki(&f, q(s), 2).unwrap().family.summaries();
        prop_assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            prop_assert_eq!(&x.label, &y.label);
            prop_assert_eq!(x.d, y.d);
            prop_assert_eq!(&x.ranks, &y.ranks);
        }
    }
}

#[test]
fn line_families_have_strict_j() {
    for p in [vec![2, 3], vec![2, 3, 5], vec![2, 3, 7]] {
        let f = KnotFamily::brieskorn(&p).unwrap();
        f.check().unwrap();
        let j = &f.jay.as_ref().unwrap()[0];
        assert!(is_identity(&j.then(j)), "{p:?}");
    }
}
