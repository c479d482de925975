//! Finite filtered cube complexes over GF(2) and cell maps between them.

use std::collections::HashMap;

use serde::Serialize;

use crate::grading::{grf_value, height_step, translate};
use crate::plumbing::Lattice;
use crate::rational::{q, same_even_coset, Q};
use crate::{Error, Result};

/// Default cap on the number of cells in a built complex.
pub const DEFAULT_MAX_CELLS: usize = 10_000_000;

/// Cell cap, overridable through `LATTICE_MAX_CELLS`.
pub fn max_cells() -> usize {
    std::env::var("LATTICE_MAX_CELLS").ok().and_then(|s| s.parse().ok()).unwrap_or(DEFAULT_MAX_CELLS)
}

/// A finite cell complex over GF(2) with one or two exact heights per cell.
/// Boundaries are stored as sorted lists of face indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FilteredComplex {
    pub dims: Vec<u8>,
    pub h1: Vec<Q>,
    pub h2: Option<Vec<Q>>,
    pub bd: Vec<Vec<u32>>,
}

impl FilteredComplex {
    pub fn new(dims: Vec<u8>, h1: Vec<Q>, h2: Option<Vec<Q>>, mut bd: Vec<Vec<u32>>) -> Self {
        for b in bd.iter_mut() {
            b.sort_unstable();
        }
        FilteredComplex { dims, h1, h2, bd }
    }

    /// JSON dump: per cell its dimension, heights and boundary.
    pub fn to_json(&self) -> serde_json::Value {
        let cells: Vec<serde_json::Value> = (0..self.len())
            .map(|c| {
                let mut v = serde_json::json!({
                    "dim": self.dims[c],
                    "h1": crate::rational::fmt(&self.h1[c]),
                    "boundary": self.bd[c],
                });
                if let Some(h2) = &self.h2 {
                    v["h2"] = crate::rational::fmt(&h2[c]).into();
                }
                v
            })
            .collect();
        serde_json::json!({ "cells": cells })
    }

    /// One 0-cell.
    pub fn point(h1: Q, h2: Option<Q>) -> Self {
        FilteredComplex { dims: vec![0], h1: vec![h1], h2: h2.map(|h| vec![h]), bd: vec![vec![]] }
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn is_doubly_filtered(&self) -> bool {
        self.h2.is_some()
    }

    pub fn h2_of(&self, c: usize) -> Q {
        self.h2.as_ref().expect("doubly filtered complex")[c]
    }

    /// Alexander grading `(h1 - h2)/2` of a cell.
    pub fn alexander(&self, c: usize) -> Q {
        (self.h1[c] - self.h2_of(c)) / q(2)
    }

    /// `∂² = 0` over GF(2).
    pub fn boundary_squares_to_zero(&self) -> bool {
        let mut acc: HashMap<u32, u8> = HashMap::new();
        self.bd.iter().all(|faces| {
            acc.clear();
            for &f in faces {
                for &g in &self.bd[f as usize] {
                    *acc.entry(g).or_insert(0) ^= 1;
                }
            }
            acc.values().all(|&v| v == 0)
        })
    }

    /// Faces have dimension one less than the cell.
    pub fn dimensions_consistent(&self) -> bool {
        self.bd.iter().enumerate().all(|(c, faces)| faces.iter().all(|&f| self.dims[f as usize] + 1 == self.dims[c]))
    }

    /// Every face sits at least as high as the cell, in every height.
    pub fn is_monotone(&self) -> bool {
        self.bd.iter().enumerate().all(|(c, faces)| {
            faces.iter().all(|&f| {
                let f = f as usize;
                self.h1[f] >= self.h1[c] && self.h2.as_ref().map_or(true, |h| h[f] >= h[c])
            })
        })
    }

    /// All heights of each kind lie in a single coset of 2Z.
    pub fn heights_in_one_coset(&self) -> bool {
        let one = |h: &[Q]| h.iter().all(|x| same_even_coset(x, &h[0]));
        self.is_empty() || (one(&self.h1) && self.h2.as_deref().map_or(true, one))
    }

    /// Forgets the second height.
    pub fn p1(&self) -> Self {
        FilteredComplex { h2: None, ..self.clone() }
    }

    /// Keeps only the second height.
    pub fn p2(&self) -> Self {
        FilteredComplex { h1: self.h2.clone().expect("doubly filtered complex"), h2: None, ..self.clone() }
    }

    /// Raises the first height by `a` (and the second, if present, by `a`).
    pub fn shift(&self, a: Q) -> Self {
        self.shift2(a, a)
    }

    pub fn shift2(&self, a: Q, b: Q) -> Self {
        FilteredComplex {
            h1: self.h1.iter().map(|x| x + a).collect(),
            h2: self.h2.as_ref().map(|h| h.iter().map(|x| x + b).collect()),
            ..self.clone()
        }
    }

    /// Swaps the two heights.
    pub fn sigma_swap(&self) -> Self {
        let h2 = self.h2.clone().expect("doubly filtered complex");
        FilteredComplex { h1: h2, h2: Some(self.h1.clone()), ..self.clone() }
    }

    /// Singly filtered complex with height `min(h1, h2 + 2i)`.
    pub fn a_star(&self, i: Q) -> Result<Self> {
        if !self.is_empty() && !(self.alexander(0) - i).is_integer() {
            return Err(Error::Invalid(format!(
                "index {} is not in the Alexander coset of the complex",
                crate::rational::fmt(&i)
            )));
        }
        let h2 = self.h2.as_ref().expect("doubly filtered complex");
        let h1 = self.h1.iter().zip(h2).map(|(a, b)| std::cmp::min(*a, b + q(2) * i)).collect();
        Ok(FilteredComplex { h1, h2: None, ..self.clone() })
    }

    /// Product complex; heights add and the boundary obeys the Leibniz rule.
    pub fn tensor(a: &Self, b: &Self) -> Self {
        let nb = b.len();
        let mut dims = Vec::with_capacity(a.len() * nb);
        let mut h1 = Vec::with_capacity(a.len() * nb);
        let doubly = a.h2.is_some() && b.h2.is_some();
        let mut h2 = Vec::new();
        let mut bd = Vec::with_capacity(a.len() * nb);
        for x in 0..a.len() {
            for y in 0..nb {
                dims.push(a.dims[x] + b.dims[y]);
                h1.push(a.h1[x] + b.h1[y]);
                if doubly {
                    h2.push(a.h2_of(x) + b.h2_of(y));
                }
                let mut faces: Vec<u32> = a.bd[x].iter().map(|&f| f * nb as u32 + y as u32).collect();
                faces.extend(b.bd[y].iter().map(|&g| (x * nb) as u32 + g));
                faces.sort_unstable();
                bd.push(faces);
            }
        }
        FilteredComplex { dims, h1, h2: doubly.then_some(h2), bd }
    }

    /// The index of the product cell `(x, y)` in `tensor(a, b)`.
    pub fn tensor_index(b_len: usize, x: usize, y: usize) -> usize {
        x * b_len + y
    }

    /// Restriction to a set of cells closed under taking faces.
    pub fn subcomplex(&self, keep: &[bool]) -> Result<(Self, Vec<Option<u32>>)> {
        let mut new_index = vec![None; self.len()];
        let mut n = 0u32;
        for c in 0..self.len() {
            if keep[c] {
                new_index[c] = Some(n);
                n += 1;
            }
        }
        let mut out = FilteredComplex { dims: vec![], h1: vec![], h2: self.h2.as_ref().map(|_| vec![]), bd: vec![] };
        for c in 0..self.len() {
            if !keep[c] {
                continue;
            }
            let mut faces = Vec::with_capacity(self.bd[c].len());
            for &f in &self.bd[c] {
                faces.push(new_index[f as usize].ok_or_else(|| Error::Computation("subcomplex is not closed under faces".into()))?);
            }
            out.dims.push(self.dims[c]);
            out.h1.push(self.h1[c]);
            if let Some(h) = out.h2.as_mut() {
                h.push(self.h2_of(c));
            }
            out.bd.push(faces);
        }
        Ok((out, new_index))
    }
}

/// A cellular map between complexes: each cell goes to one cell of the same
/// dimension, or to zero when its image is degenerate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CellMap {
    pub image: Vec<Option<u32>>,
}

impl CellMap {
    pub fn identity(n: usize) -> Self {
        CellMap { image: (0..n as u32).map(Some).collect() }
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    pub fn get(&self, c: usize) -> Option<usize> {
        self.image[c].map(|x| x as usize)
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &CellMap) -> CellMap {
        CellMap { image: self.image.iter().map(|x| x.and_then(|y| other.image[y as usize])).collect() }
    }

    pub fn is_bijection(&self, target_len: usize) -> bool {
        if self.len() != target_len {
            return false;
        }
        let mut hit = vec![false; target_len];
        for x in &self.image {
            match x {
                Some(y) if !hit[*y as usize] => hit[*y as usize] = true,
                _ => return false,
            }
        }
        true
    }

    /// Commutes with the boundary over GF(2), and preserves dimension.
    pub fn is_chain_map(&self, src: &FilteredComplex, dst: &FilteredComplex) -> bool {
        let mut lhs: HashMap<u32, u8> = HashMap::new();
        for c in 0..src.len() {
            lhs.clear();
            if let Some(y) = self.image[c] {
                if dst.dims[y as usize] != src.dims[c] {
                    return false;
                }
                for &g in &dst.bd[y as usize] {
                    *lhs.entry(g).or_insert(0) ^= 1;
                }
            }
            for &f in &src.bd[c] {
                if let Some(y) = self.image[f as usize] {
                    *lhs.entry(y).or_insert(0) ^= 1;
                }
            }
            if lhs.values().any(|&v| v != 0) {
                return false;
            }
        }
        true
    }

    /// `dst_h(f(c)) ≥ src_h(c)` for every cell with a nonzero image.
    pub fn is_filtered(&self, src_h: &[Q], dst_h: &[Q]) -> bool {
        self.image.iter().enumerate().all(|(c, y)| y.map_or(true, |y| dst_h[y as usize] >= src_h[c]))
    }

    /// Heights are carried over exactly.
    pub fn preserves(&self, src_h: &[Q], dst_h: &[Q]) -> bool {
        self.image.iter().enumerate().all(|(c, y)| y.map_or(true, |y| dst_h[y as usize] == src_h[c]))
    }
}

/// An axis-aligned region `{base + 2Mz : lo ≤ z ≤ hi}` of characteristic vectors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CubeBox {
    pub base: Vec<i64>,
    pub lo: Vec<i64>,
    pub hi: Vec<i64>,
}

impl CubeBox {
    pub fn new(base: Vec<i64>, lo: Vec<i64>, hi: Vec<i64>) -> Result<Self> {
        if base.len() != lo.len() || lo.len() != hi.len() || lo.iter().zip(&hi).any(|(a, b)| a > b) {
            return Err(Error::Invalid("empty or malformed box".into()));
        }
        Ok(CubeBox { base, lo, hi })
    }

    /// The box `base + 2M[-r, r]^n`.
    pub fn radius(base: Vec<i64>, r: i64) -> Self {
        let n = base.len();
        CubeBox { base, lo: vec![-r; n], hi: vec![r; n] }
    }

    pub fn point_count(&self) -> usize {
        self.lo.iter().zip(&self.hi).map(|(a, b)| (b - a + 1) as usize).product()
    }

    pub fn contains(&self, z: &[i64]) -> bool {
        z.iter().zip(&self.lo).zip(&self.hi).all(|((x, a), b)| a <= x && x <= b)
    }

    /// All lattice offsets in the box, in lexicographic order.
    pub fn points(&self) -> Vec<Vec<i64>> {
        let n = self.lo.len();
        let mut out = Vec::with_capacity(self.point_count());
        let mut z = self.lo.clone();
        loop {
            out.push(z.clone());
            let mut i = n;
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                if z[i] < self.hi[i] {
                    z[i] += 1;
                    for j in i + 1..n {
                        z[j] = self.lo[j];
                    }
                    break;
                }
            }
        }
    }
}

/// A cube complex built on a box, remembering which cube each cell is.
#[derive(Clone, Debug)]
pub struct LatticeComplex {
    pub complex: FilteredComplex,
    pub cube_box: CubeBox,
    /// Offset `z` of the lowest vertex of each cell.
    pub offsets: Vec<Vec<i64>>,
    /// Direction set `E` of each cell as a bitmask over vertices.
    pub masks: Vec<u32>,
    /// Absolute characteristic vector of the lowest vertex of each cell.
    pub corners: Vec<Vec<i64>>,
    index: HashMap<(Vec<i64>, u32), u32>,
}

#[derive(Serialize)]
struct CellDump<'a> {
    offset: &'a [i64],
    mask: u32,
    dim: u8,
    #[serde(serialize_with = "crate::rational::serialize")]
    h1: &'a Q,
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "ser_opt")]
    h2: Option<&'a Q>,
    boundary: &'a [u32],
}

fn ser_opt<S: serde::Serializer>(x: &Option<&Q>, s: S) -> std::result::Result<S::Ok, S::Error> {
    crate::rational::serialize(x.expect("present"), s)
}

impl LatticeComplex {
    pub fn len(&self) -> usize {
        self.complex.len()
    }

    pub fn is_empty(&self) -> bool {
        self.complex.is_empty()
    }

    /// The cell `[k, E]`, if it lies in this complex.
    pub fn locate(&self, k: &[i64], mask: u32) -> Option<u32> {
        self.index.get(&(k.to_vec(), mask)).copied()
    }

    /// JSON dump: per cell its offset, direction mask, heights and boundary.
    pub fn to_json(&self) -> serde_json::Value {
        let cells: Vec<CellDump> = (0..self.len())
            .map(|c| CellDump {
                offset: &self.offsets[c],
                mask: self.masks[c],
                dim: self.complex.dims[c],
                h1: &self.complex.h1[c],
                h2: self.complex.h2.as_ref().map(|h| &h[c]),
                boundary: &self.complex.bd[c],
            })
            .collect();
        serde_json::json!({ "box": self.cube_box, "cells": cells })
    }

    fn map_by(&self, dst: &LatticeComplex, f: impl Fn(&[i64], u32) -> Vec<i64>) -> Result<CellMap> {
        let mut image = Vec::with_capacity(self.len());
        for c in 0..self.len() {
            let k = f(&self.corners[c], self.masks[c]);
            image.push(Some(dst.locate(&k, self.masks[c]).ok_or_else(|| {
                Error::Computation("image cell lies outside the target box".into())
            })?));
        }
        Ok(CellMap { image })
    }

    /// `I[K, E] = [-K - 2M·1_E, E]`.
    pub fn involution_i(&self, lat: &Lattice, dst: &LatticeComplex) -> Result<CellMap> {
        self.map_by(dst, |k, m| {
            let ones = mask_vector(m, k.len());
            let shifted = translate(lat, k, &ones);
            shifted.iter().map(|x| -x).collect()
        })
    }

    /// `J[K, E] = [-K - 2e - 2M·1_E, E]`, the composite of the flip and `I`.
    pub fn involution_j(&self, lat: &Lattice, e: &[i64], dst: &LatticeComplex) -> Result<CellMap> {
        self.map_by(dst, |k, m| {
            let ones = mask_vector(m, k.len());
            let shifted = translate(lat, k, &ones);
            shifted.iter().zip(e).map(|(x, a)| -x - 2 * a).collect()
        })
    }

    /// `Γ[K, E] = [K + 2e, E]`.
    pub fn flip_gamma(&self, e: &[i64], dst: &LatticeComplex) -> Result<CellMap> {
        self.map_by(dst, |k, _| k.iter().zip(e).map(|(x, a)| x + 2 * a).collect())
    }
}

/// Indicator vector of a bitmask.
pub fn mask_vector(mask: u32, n: usize) -> Vec<i64> {
    (0..n).map(|v| ((mask >> v) & 1) as i64).collect()
}

/// Builds the cube complex on a box. With `knot = Some(e)` the second height
/// is `h_V(K) = h_U(K + 2e)`.
pub fn build_cube_complex(lat: &Lattice, cube_box: &CubeBox, knot: Option<&[i64]>) -> Result<LatticeComplex> {
    let n = lat.dim();
    if n > 30 {
        return Err(Error::Invalid("too many vertices for a cube complex".into()));
    }
    let cap = max_cells();
    let points = cube_box.points();
    let mut cells: Vec<(u8, usize, u32)> = Vec::new();
    for (pi, z) in points.iter().enumerate() {
        let free: Vec<usize> = (0..n).filter(|&v| z[v] < cube_box.hi[v]).collect();
        for sub in 0u32..(1u32 << free.len()) {
            let mut mask = 0u32;
            for (bit, &v) in free.iter().enumerate() {
                if sub >> bit & 1 == 1 {
                    mask |= 1 << v;
                }
            }
            cells.push((mask.count_ones() as u8, pi, mask));
            if cells.len() > cap {
                return Err(Error::TooManyCells(cells.len(), cap));
            }
        }
    }
    cells.sort_unstable();

    let base_h = grf_value(lat, &cube_box.base);
    let shifted_base: Option<Vec<i64>> = knot.map(|e| cube_box.base.iter().zip(e).map(|(a, b)| a + 2 * b).collect());
    let base_h2 = shifted_base.as_ref().map(|b| grf_value(lat, b));

    let mut offsets = Vec::with_capacity(cells.len());
    let mut masks = Vec::with_capacity(cells.len());
    let mut corners = Vec::with_capacity(cells.len());
    let mut index = HashMap::with_capacity(cells.len());
    for (c, &(_, pi, mask)) in cells.iter().enumerate() {
        let z = &points[pi];
        let k = translate(lat, &cube_box.base, z);
        index.insert((k.clone(), mask), c as u32);
        offsets.push(z.clone());
        masks.push(mask);
        corners.push(k);
    }

    let mut dims = Vec::with_capacity(cells.len());
    let mut h1: Vec<Q> = Vec::with_capacity(cells.len());
    let mut h2: Vec<Q> = Vec::new();
    let mut bd = Vec::with_capacity(cells.len());
    for (c, &(dim, pi, mask)) in cells.iter().enumerate() {
        dims.push(dim);
        let z = &points[pi];
        if dim == 0 {
            h1.push(base_h + q(height_step(lat, &cube_box.base, z)));
            if let (Some(b), Some(bh)) = (&shifted_base, &base_h2) {
                h2.push(*bh + q(height_step(lat, b, z)));
            }
            bd.push(vec![]);
            continue;
        }
        let mut faces = Vec::with_capacity(2 * dim as usize);
        for v in 0..n {
            if mask >> v & 1 == 0 {
                continue;
            }
            let sub = mask & !(1 << v);
            let k0 = &corners[c];
            let mut k1 = k0.clone();
            for (w, row) in lat.matrix().iter().enumerate() {
                k1[w] += 2 * row[v];
            }
            faces.push(index[&(k0.clone(), sub)]);
            faces.push(index[&(k1, sub)]);
        }
        let (a, b) = (faces[0] as usize, faces[1] as usize);
        h1.push(std::cmp::min(h1[a], h1[b]));
        if knot.is_some() {
            h2.push(std::cmp::min(h2[a], h2[b]));
        }
        faces.sort_unstable();
        bd.push(faces);
    }
    let complex = FilteredComplex { dims, h1, h2: knot.map(|_| h2), bd };
    Ok(LatticeComplex { complex, cube_box: cube_box.clone(), offsets, masks, corners, index })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plumbing::parse_graph;
    use crate::rational::qf;

    fn lat(text: &str) -> Lattice {
        parse_graph(text).unwrap().lattice().unwrap()
    }

    #[test]
    fn single_vertex_boxes() {
        let l = lat("vertex a -1\n");
        let x = build_cube_complex(&l, &CubeBox::radius(vec![-1], 0), None).unwrap();
        assert_eq!(x.len(), 1);
        assert_eq!(x.complex.h1, vec![q(0)]);
        let x = build_cube_complex(&l, &CubeBox::radius(vec![-1], 2), None).unwrap();
        assert_eq!(x.complex.dims.iter().filter(|&&d| d == 0).count(), 5);
        assert_eq!(x.complex.dims.iter().filter(|&&d| d == 1).count(), 4);
        // K ranges over -5, -3, -1, 1, 3 with h = (1 - K²)/4.
        let mut vert: Vec<(i64, Q)> =
            (0..x.len()).filter(|&c| x.complex.dims[c] == 0).map(|c| (x.corners[c][0], x.complex.h1[c])).collect();
        vert.sort();
        let oracle: Vec<(i64, Q)> = [-5i64, -3, -1, 1, 3].iter().map(|&k| (k, qf(1 - k * k, 4))).collect();
        assert_eq!(vert, oracle);
        assert!(x.complex.boundary_squares_to_zero());
        assert!(x.complex.is_monotone());
        assert!(x.complex.heights_in_one_coset());
    }

    #[test]
    fn trefoil_knot_heights_at_kcon() {
        let l = lat("vertex c -1\nvertex a -2\nvertex b -3\nedge c a\nedge c b\n");
        let e = [1, 0, 0];
        let b = CubeBox::new(vec![-1, 0, 1], vec![0, 0, 0], vec![2, 1, 1]).unwrap();
        let x = build_cube_complex(&l, &b, Some(&e)).unwrap();
        let c0 = x.locate(&[-1, 0, 1], 0).unwrap() as usize;
        assert_eq!(x.complex.h1[c0], q(0));
        assert_eq!(x.complex.h2_of(c0), q(-2));
        assert!(x.complex.boundary_squares_to_zero());
        assert!(x.complex.is_monotone());
        assert!(x.complex.heights_in_one_coset());
    }

    #[test]
    fn tensor_unit_and_leibniz() {
        let l = lat("vertex a -2\n");
        let x = build_cube_complex(&l, &CubeBox::radius(vec![0], 1), Some(&[1])).unwrap().complex;
        let unit = FilteredComplex::point(q(0), Some(q(0)));
        assert_eq!(FilteredComplex::tensor(&x, &unit), x);
        let y = FilteredComplex::tensor(&x, &x);
        assert!(y.boundary_squares_to_zero());
        assert!(y.is_monotone());
        assert_eq!(y.p1(), FilteredComplex::tensor(&x.p1(), &x.p1()));
        assert_eq!(y.sigma_swap(), FilteredComplex::tensor(&x.sigma_swap(), &x.sigma_swap()));
    }

    #[test]
    fn a_star_takes_cellwise_min() {
        let l = lat("vertex a -2\n");
        let x = build_cube_complex(&l, &CubeBox::radius(vec![0], 2), Some(&[1])).unwrap().complex;
        let i = x.alexander(0);
        let a = x.a_star(i).unwrap();
        for c in 0..x.len() {
            assert_eq!(a.h1[c], std::cmp::min(x.h1[c], x.h2_of(c) + q(2) * i));
        }
        assert!(x.a_star(i + qf(1, 2)).is_err());
    }

    #[test]
    fn cell_maps_on_symmetric_box() {
        // Single -2 vertex, orbit of K = 2; the box {6, 2, -2, -6} is symmetric under K ↦ -K.
        let l = lat("vertex a -2\n");
        let b = CubeBox::new(vec![2], vec![-1], vec![2]).unwrap();
        let x = build_cube_complex(&l, &b, None).unwrap();
        let i = x.involution_i(&l, &x).unwrap();
        assert!(i.then(&i) == CellMap::identity(x.len()));
        assert!(i.is_chain_map(&x.complex, &x.complex));
        assert!(i.preserves(&x.complex.h1, &x.complex.h1));
        // The edge with vertices 2 and -2 is fixed.
        let fixed = x.locate(&[2], 1).unwrap() as usize;
        assert_eq!(i.get(fixed), Some(fixed));
    }
}
