//! Spin^c structures as orbits of characteristic vectors, and the grading
//! formulas attached to them.

use num_integer::Integer;

use crate::plumbing::{Lattice, PlumbingGraph};
use crate::rational::{floor_i64, modulo, q, Q};
use crate::{Error, Result};

/// The canonical class `K(v) = -v² - 2`.
pub fn canonical_char(lat: &Lattice) -> Vec<i64> {
    (0..lat.dim()).map(|v| -lat.weight(v) - 2).collect()
}

pub fn is_characteristic(lat: &Lattice, k: &[i64]) -> bool {
    k.len() == lat.dim() && (0..lat.dim()).all(|v| (k[v] - lat.weight(v)).is_even())
}

/// `K² = k^T M^{-1} k`.
pub fn char_square(lat: &Lattice, k: &[i64]) -> Q {
    lat.dual_pair(k, k)
}

/// `h_U(K) = (K² + |V|) / 4`.
pub fn grf_value(lat: &Lattice, k: &[i64]) -> Q {
    (char_square(lat, k) + q(lat.dim() as i64)) / q(4)
}

/// Height change from `k` to `k + 2Mz`, namely `k·z + z^T M z`.
pub fn height_step(lat: &Lattice, k: &[i64], z: &[i64]) -> i64 {
    k.iter().zip(z).map(|(a, b)| a * b).sum::<i64>() + lat.pair(z, z)
}

/// `k + 2Mz`.
pub fn translate(lat: &Lattice, k: &[i64], z: &[i64]) -> Vec<i64> {
    lat.mul(z).iter().zip(k).map(|(m, a)| a + 2 * m).collect()
}

/// Descends a characteristic vector to the distinguished representative
/// `k_t` of its orbit: the unique `k + 2Mx` with `k(v) ≤ -2 - v²` for all `v`
/// and `x` coordinatewise minimal with that property. Returns `(k_t, x)`.
pub fn descend(lat: &Lattice, k0: &[i64]) -> (Vec<i64>, Vec<i64>) {
    let n = lat.dim();
    let c: Vec<i64> = (0..n).map(|v| (-2 - lat.weight(v) - k0[v]) / 2).collect();
    let mut x: Vec<i64> = lat.solve(&c).iter().map(floor_i64).collect();
    let mut mx = lat.mul(&x);
    while let Some(v) = (0..n).find(|&v| mx[v] > c[v]) {
        x[v] += 1;
        for (w, row) in lat.matrix().iter().enumerate() {
            mx[w] += row[v];
        }
    }
    (translate(lat, k0, &x), x)
}

/// Coset representatives of `Z^n / M Z^n` read off a Hermite normal form.
pub fn coset_representatives(lat: &Lattice) -> Vec<Vec<i64>> {
    let n = lat.dim();
    let mut h: Vec<Vec<i128>> = lat.matrix().iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    for col in 0..n {
        // Euclid on rows col.. to clear entries below the pivot.
        loop {
            let nz: Vec<usize> = (col..n).filter(|&r| h[r][col] != 0).collect();
            if nz.len() <= 1 {
                if let Some(&r) = nz.first() {
                    h.swap(col, r);
                }
                break;
            }
            let p = *nz.iter().min_by_key(|&&r| h[r][col].abs()).unwrap();
            h.swap(col, p);
            for r in col + 1..n {
                if h[r][col] != 0 {
                    let f = Integer::div_floor(&h[r][col], &h[col][col]);
                    for j in 0..n {
                        h[r][j] -= f * h[col][j];
                    }
                }
            }
        }
        if h[col][col] < 0 {
            for j in 0..n {
                h[col][j] = -h[col][j];
            }
        }
    }
    let diag: Vec<i64> = (0..n).map(|i| h[i][i] as i64).collect();
    let mut reps = vec![vec![]];
    for d in diag {
        let mut next = Vec::with_capacity(reps.len() * d as usize);
        for r in &reps {
            for a in 0..d {
                let mut v = r.clone();
                v.push(a);
                next.push(v);
            }
        }
        reps = next;
    }
    reps
}

/// The Spin^c structures of the boundary, each as its distinguished
/// representative `k_t`, in a deterministic order.
#[derive(Clone, Debug)]
pub struct SpinCTable {
    reps: Vec<Vec<i64>>,
}

impl SpinCTable {
    pub fn new(lat: &Lattice) -> Result<Self> {
        if !lat.is_negative_definite() {
            return Err(Error::NotNegativeDefinite);
        }
        let kcon = canonical_char(lat);
        let mut reps: Vec<Vec<i64>> = coset_representatives(lat)
            .iter()
            .map(|y| {
                let k: Vec<i64> = kcon.iter().zip(y).map(|(a, b)| a + 2 * b).collect();
                descend(lat, &k).0
            })
            .collect();
        // K_con's orbit first, the rest in lexicographic order.
        let first = descend(lat, &kcon).0;
        reps.sort_by(|a, b| (a != &first).cmp(&(b != &first)).then_with(|| b.cmp(a)));
        reps.dedup();
        debug_assert_eq!(reps.len() as i64, lat.det().abs());
        Ok(SpinCTable { reps })
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    pub fn rep(&self, t: usize) -> &[i64] {
        &self.reps[t]
    }

    pub fn reps(&self) -> &[Vec<i64>] {
        &self.reps
    }

    /// Index of the orbit containing `k`.
    pub fn locate(&self, lat: &Lattice, k: &[i64]) -> usize {
        let kt = descend(lat, k).0;
        self.reps.iter().position(|r| *r == kt).expect("every orbit has a representative")
    }

    /// Orbit of the conjugate class `-k`.
    pub fn conjugate(&self, lat: &Lattice, t: usize) -> usize {
        let neg: Vec<i64> = self.reps[t].iter().map(|x| -x).collect();
        self.locate(lat, &neg)
    }

    /// Orbit of `k_t + 2e`, the action of the knot class.
    pub fn add_knot(&self, lat: &Lattice, e: &[i64], t: usize) -> usize {
        let k: Vec<i64> = self.reps[t].iter().zip(e).map(|(a, b)| a + 2 * b).collect();
        self.locate(lat, &k)
    }
}

pub fn spinc_orbits(lat: &Lattice) -> Result<Vec<Vec<i64>>> {
    Ok(SpinCTable::new(lat)?.reps)
}

/// `grf_{Σ²}(i) = ((2i - Σ²)² + Σ²) / (4Σ²)`.
pub fn grading_shift(i: &Q, s: &Q) -> Result<Q> {
    if *s == q(0) {
        return Err(Error::Invalid("Seifert framing must be nonzero".into()));
    }
    let a = q(2) * i - s;
    Ok((a * a + s) / (q(4) * s))
}

/// Knot data of a graph with an unweighted vertex: the weighted lattice, the
/// incidence vector `e`, and the rational class `Σ₀ = M^{-1} e`.
#[derive(Clone, Debug)]
pub struct KnotData {
    pub lattice: Lattice,
    pub e: Vec<i64>,
    pub sigma0: Vec<Q>,
    pub sigma0_sq: Q,
    pub spinc: SpinCTable,
}

impl KnotData {
    pub fn new(g: &PlumbingGraph) -> Result<Self> {
        let lattice = g.lattice()?;
        let spinc = SpinCTable::new(&lattice)?;
        let e = g.knot_vector()?;
        let sigma0 = lattice.solve(&e);
        let sigma0_sq = lattice.dual_pair(&e, &e);
        Ok(KnotData { lattice, e, sigma0, sigma0_sq, spinc })
    }

    /// Seifert framing of graph framing `n`.
    pub fn sigma_sq(&self, n: i64) -> Q {
        q(n) - self.sigma0_sq
    }

    /// `Â(L) = (L(Σ) + Σ²)/2` for a characteristic vector `l` on the filled
    /// graph, given in its lattice coordinates with the knot vertex at `c`.
    pub fn a_hat(&self, l: &[i64], c: usize, n: i64) -> Q {
        let mut val = q(l[c]);
        let mut j = 0;
        for (idx, &lv) in l.iter().enumerate() {
            if idx == c {
                continue;
            }
            val -= self.sigma0[j] * q(lv);
            j += 1;
        }
        (val + self.sigma_sq(n)) / q(2)
    }

    /// Representative in `[0,1)` of the Alexander coset of `t`.
    pub fn alexander_coset(&self, t: usize) -> Q {
        let u = self.spinc.add_knot(&self.lattice, &self.e, t);
        let a = grf_value(&self.lattice, self.spinc.rep(t));
        let b = grf_value(&self.lattice, self.spinc.rep(u));
        modulo(&((a - b) / q(2)), &q(1))
    }
}

/// A Spin^c structure on the surgered manifold, `[t, i]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SurgerySpinC {
    pub t: usize,
    pub i: Q,
    pub sigma_sq: Q,
}

impl SurgerySpinC {
    /// `(t, i) ↦ (t̄, Σ² − i)`.
    pub fn conjugate(&self, conj: impl Fn(usize) -> usize) -> SurgerySpinC {
        SurgerySpinC { t: conj(self.t), i: self.sigma_sq - self.i, sigma_sq: self.sigma_sq }
    }

    /// `(t, i) ↦ (t̄ + [K], −i)`.
    pub fn translated_conjugate(
        &self,
        conj: impl Fn(usize) -> usize,
        add_knot: impl Fn(usize) -> usize,
    ) -> SurgerySpinC {
        SurgerySpinC { t: add_knot(conj(self.t)), i: -self.i, sigma_sq: self.sigma_sq }
    }

    /// `(t + [K], i + Σ²)`, the same class.
    pub fn next(&self, add_knot: impl Fn(usize) -> usize) -> SurgerySpinC {
        SurgerySpinC { t: add_knot(self.t), i: self.i + self.sigma_sq, sigma_sq: self.sigma_sq }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plumbing::parse_graph;
    use crate::rational::qf;

    fn lat(text: &str) -> Lattice {
        parse_graph(text).unwrap().lattice().unwrap()
    }

    const TREFOIL: &str = "vertex v0 unweighted\nvertex c -1\nvertex a -2\nvertex b -3\nedge v0 c\nedge c a\nedge c b\n";

    #[test]
    fn single_vertex_values() {
        let l = lat("vertex a -1\n");
        assert_eq!(canonical_char(&l), vec![-1]);
        assert_eq!(char_square(&l, &[-1]), q(-1));
        assert_eq!(grf_value(&l, &[-1]), q(0));
        assert_eq!(spinc_orbits(&l).unwrap(), vec![vec![-1]]);
        let l2 = lat("vertex a -2\n");
        assert_eq!(canonical_char(&l2), vec![0]);
        assert_eq!(grf_value(&l2, &[0]), qf(1, 4));
        let mut orbits = spinc_orbits(&l2).unwrap();
        orbits.sort();
        assert_eq!(orbits, vec![vec![-2], vec![0]]);
    }

    #[test]
    fn lens_space_orbits_match_brute_force() {
        // Characteristic vectors of a single -2 vertex are the even integers;
        // the orbits are their classes mod 4.
        let l = lat("vertex a -2\n");
        let table = SpinCTable::new(&l).unwrap();
        for k in (-6..=6).step_by(2) {
            let t = table.locate(&l, &[k]);
            let kt = table.rep(t)[0];
            assert_eq!((k - kt).rem_euclid(4), 0);
            assert!(kt <= 0);
            assert!(kt - 2 * (-2) > 0);
        }
    }

    #[test]
    fn trefoil_invariants() {
        let g = parse_graph(TREFOIL).unwrap();
        let kd = KnotData::new(&g).unwrap();
        assert_eq!(kd.spinc.len(), 1);
        assert_eq!(kd.spinc.rep(0), &[-1, 0, 1]);
        assert_eq!(grf_value(&kd.lattice, &[-1, 0, 1]), q(0));
        let hv: Vec<i64> = vec![1, 0, 1];
        assert_eq!(grf_value(&kd.lattice, &hv), q(-2));
        assert_eq!(kd.sigma0, vec![q(-6), q(-3), q(-2)]);
        assert_eq!(kd.alexander_coset(0), q(0));
    }

    #[test]
    fn grading_shift_values() {
        assert_eq!(grading_shift(&q(0), &q(-2)).unwrap(), qf(-1, 4));
        assert_eq!(grading_shift(&q(-3), &q(-3)).unwrap(), qf(-1, 2));
        assert_eq!(grading_shift(&q(0), &q(-1)).unwrap(), q(0));
        assert!(grading_shift(&q(0), &q(0)).is_err());
    }

    #[test]
    fn a_hat_is_affine() {
        let g = parse_graph(TREFOIL).unwrap();
        let kd = KnotData::new(&g).unwrap();
        let filled = g.filled(-8).unwrap().lattice().unwrap();
        let c = g.filled_knot_coordinate().unwrap();
        let l = canonical_char(&filled);
        let a = kd.a_hat(&l, c, -8);
        // Adding 2PD of the cocore (dual of the knot vertex) raises Â by one.
        let mut l2 = l.clone();
        l2[c] += 2;
        assert_eq!(kd.a_hat(&l2, c, -8), a + q(1));
        // Adding 2PD of the knot vertex itself raises Â by Σ².
        let mut z = vec![0; filled.dim()];
        z[c] = 1;
        let l3 = translate(&filled, &l, &z);
        assert_eq!(kd.a_hat(&l3, c, -8), a + q(-2));
        // Weighted vertices are orthogonal to Σ.
        for v in 0..filled.dim() {
            if v == c {
                continue;
            }
            let mut z = vec![0; filled.dim()];
            z[v] = 1;
            assert_eq!(kd.a_hat(&translate(&filled, &l, &z), c, -8), a);
        }
    }

    #[test]
    fn e8_has_one_orbit() {
        let e8 = "vertex c -2\nvertex a1 -2\nvertex b1 -2\nvertex b2 -2\nvertex d1 -2\nvertex d2 -2\nvertex d3 -2\nvertex d4 -2\n\
edge c a1\nedge c b1\nedge b1 b2\nedge c d1\nedge d1 d2\nedge d2 d3\nedge d3 d4\n";
        let l = lat(e8);
        assert_eq!(spinc_orbits(&l).unwrap(), vec![vec![0; 8]]);
        assert_eq!(char_square(&l, &[0; 8]), q(0));
    }
}
