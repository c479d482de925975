//! GF(2) homology of filtered complexes: total ranks, associated-graded
//! ("hat") ranks, d-invariants and Alexander ranges.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::complex::FilteredComplex;
use crate::rational::{fmt, q, Q};
use crate::{Error, Result};

/// Symmetric difference of two sorted index lists.
fn xor_sorted(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Standard persistence column reduction. `columns[j]` lists the positions
/// of the faces of the `j`-th cell in filtration order; every face must come
/// earlier than its cell. Returns the pivot (lowest entry) of each reduced
/// column.
pub fn reduce_columns(mut columns: Vec<Vec<u32>>) -> Vec<Option<u32>> {
    let n = columns.len();
    let mut owner: Vec<Option<u32>> = vec![None; n];
    let mut lows = vec![None; n];
    for j in 0..n {
        let mut col = std::mem::take(&mut columns[j]);
        col.sort_unstable();
        while let Some(&low) = col.last() {
            match owner[low as usize] {
                Some(k) => col = xor_sorted(&col, &columns[k as usize]),
                None => break,
            }
        }
        if let Some(&low) = col.last() {
            owner[low as usize] = Some(j as u32);
            lows[j] = Some(low);
        }
        columns[j] = col;
    }
    lows
}

/// Cells (as positions) that create a class which is never killed.
fn essential_positions(lows: &[Option<u32>]) -> Vec<usize> {
    let mut killed = vec![false; lows.len()];
    for l in lows.iter().flatten() {
        killed[*l as usize] = true;
    }
    (0..lows.len()).filter(|&j| lows[j].is_none() && !killed[j]).collect()
}

/// Betti numbers of the subcomplex spanned by `cells`, where faces outside
/// `cells` are dropped from the boundary (a subquotient when `cells` is
/// convex in the face order).
fn betti_of_block(x: &FilteredComplex, cells: &[u32]) -> Vec<usize> {
    let mut order: Vec<u32> = cells.to_vec();
    order.sort_by_key(|&c| (x.dims[c as usize], c));
    let pos: HashMap<u32, u32> = order.iter().enumerate().map(|(p, &c)| (c, p as u32)).collect();
    let columns = order
        .iter()
        .map(|&c| x.bd[c as usize].iter().filter_map(|f| pos.get(f).copied()).collect())
        .collect();
    let lows = reduce_columns(columns);
    let mut betti = Vec::new();
    for p in essential_positions(&lows) {
        let d = x.dims[order[p] as usize] as usize;
        if betti.len() <= d {
            betti.resize(d + 1, 0);
        }
        betti[d] += 1;
    }
    betti
}

/// Betti numbers of the underlying unfiltered complex.
pub fn betti(x: &FilteredComplex) -> Vec<usize> {
    let all: Vec<u32> = (0..x.len() as u32).collect();
    betti_of_block(x, &all)
}

pub fn total_rank(x: &FilteredComplex) -> usize {
    betti(x).iter().sum()
}

/// Ranks of the associated graded homology, keyed by (Maslov, Alexander).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BigradedRanks {
    pub table: BTreeMap<(Q, Q), usize>,
}

#[derive(Serialize)]
struct RankRow {
    maslov: String,
    alexander: String,
    rank: usize,
}

impl BigradedRanks {
    pub fn total(&self) -> usize {
        self.table.values().sum()
    }

    /// Total rank at each Alexander grading.
    pub fn by_alexander(&self) -> BTreeMap<Q, usize> {
        let mut out = BTreeMap::new();
        for ((_, a), r) in &self.table {
            *out.entry(*a).or_insert(0) += r;
        }
        out
    }

    /// Smallest and largest Alexander grading carrying nonzero rank.
    pub fn alexander_support(&self) -> Option<(Q, Q)> {
        let by = self.by_alexander();
        Some((*by.keys().next()?, *by.keys().next_back()?))
    }

    /// Top Alexander grading and the rank there.
    pub fn top(&self) -> Option<(Q, usize)> {
        self.by_alexander().into_iter().next_back()
    }

    /// Ranks after the Alexander grading is negated and the Maslov grading
    /// shifted by `-2A`, the symmetry of knot Floer homology.
    pub fn reflected(&self) -> BigradedRanks {
        BigradedRanks { table: self.table.iter().map(|((m, a), r)| ((m - q(2) * a, -a), *r)).collect() }
    }

    pub fn to_tsv(&self) -> String {
        let mut s = String::from("maslov\talexander\trank\n");
        for ((m, a), r) in &self.table {
            s.push_str(&format!("{}\t{}\t{}\n", fmt(m), fmt(a), r));
        }
        s
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<RankRow> = self
            .table
            .iter()
            .map(|((m, a), r)| RankRow { maslov: fmt(m), alexander: fmt(a), rank: *r })
            .collect();
        serde_json::to_value(rows).expect("rank serialisation")
    }
}

/// Homology of the associated graded complex: the boundary keeps only faces
/// at exactly the same heights. A cell of dimension `d` at first height `h1`
/// sits in Maslov grading `h1 + d`; the Alexander grading is `(h1 - h2)/2`
/// (zero for singly filtered complexes).
pub fn assoc_graded_homology(x: &FilteredComplex) -> BigradedRanks {
    let mut blocks: BTreeMap<(Q, Q), Vec<u32>> = BTreeMap::new();
    for c in 0..x.len() {
        let h2 = x.h2.as_ref().map_or(q(0), |h| h[c]);
        blocks.entry((x.h1[c], h2)).or_default().push(c as u32);
    }
    let mut table = BTreeMap::new();
    for ((h1, h2), cells) in blocks {
        let a = if x.h2.is_some() { (h1 - h2) / q(2) } else { q(0) };
        for (d, r) in betti_of_block(x, &cells).into_iter().enumerate() {
            if r > 0 {
                *table.entry((h1 + q(d as i64), a)).or_insert(0) += r;
            }
        }
    }
    BigradedRanks { table }
}

/// The height at which the unique essential class of a complex with rank-one
/// homology is born, scanning heights from the top down.
pub fn d_invariant(x: &FilteredComplex) -> Result<Q> {
    let mut order: Vec<u32> = (0..x.len() as u32).collect();
    order.sort_by(|&a, &b| {
        let (a, b) = (a as usize, b as usize);
        x.h1[b].cmp(&x.h1[a]).then(x.dims[a].cmp(&x.dims[b])).then(a.cmp(&b))
    });
    let mut pos = vec![0u32; x.len()];
    for (p, &c) in order.iter().enumerate() {
        pos[c as usize] = p as u32;
    }
    let columns = order.iter().map(|&c| x.bd[c as usize].iter().map(|&f| pos[f as usize]).collect()).collect();
    let lows = reduce_columns(columns);
    let ess = essential_positions(&lows);
    if ess.len() != 1 {
        return Err(Error::Computation(format!(
            "d-invariant needs homology of rank one, found rank {}",
            ess.len()
        )));
    }
    Ok(x.h1[order[ess[0]] as usize])
}

/// Smallest and largest Alexander grading over all cells.
pub fn alexander_range(x: &FilteredComplex) -> Option<(Q, Q)> {
    let mut it = (0..x.len()).map(|c| x.alexander(c));
    let first = it.next()?;
    Some(it.fold((first, first), |(lo, hi), a| (lo.min(a), hi.max(a))))
}

/// Alexander range of the associated graded homology; unlike
/// [`alexander_range`] this does not depend on how far a model was truncated.
pub fn hat_alexander_range(x: &FilteredComplex) -> Option<(Q, Q)> {
    assoc_graded_homology(x).alexander_support()
}

/// Largest Alexander grading with nonzero associated graded homology, and the
/// rank there.
pub fn genus(x: &FilteredComplex) -> Option<(Q, usize)> {
    assoc_graded_homology(x).top()
}
