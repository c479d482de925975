//! Truncation of the infinite lattice models to certified boxes, the
//! subcontractibility test, and the filtered-line model of Brieskorn spheres
//! and their regular fibers.

use std::collections::HashMap;

use num_integer::Integer;
use serde::Serialize;

use crate::complex::{build_cube_complex, CellMap, CubeBox, FilteredComplex, LatticeComplex};
use crate::grading::{descend, grf_value, translate, KnotData};
use crate::homology::assoc_graded_homology;
use crate::plumbing::{Lattice, PlumbingGraph};
use crate::rational::{fmt, q, Q};
use crate::{Error, Result};

/// A box together with the vertex sequences that witness its corners: from
/// each corner, adding the sequence (a loop over the minimal cycle) never
/// raises the height, in both filtrations when a knot is present.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoxCertificate {
    pub cube_box: CubeBox,
    pub cycle: Vec<i64>,
    pub up_sequence: Vec<usize>,
    pub down_sequence: Vec<usize>,
}

/// Height change of one step from `k + 2Mx` in direction `sign·v`, for `h_U`
/// and, with a knot vector, for `h_V`.
fn step_changes(lat: &Lattice, k: &[i64], mx: &[i64], v: usize, sign: i64, e: Option<&[i64]>) -> (i64, Option<i64>) {
    let du = sign * k[v] + lat.weight(v) + 2 * mx[v];
    (du, e.map(|e| du + sign * 2 * e[v]))
}

/// Searches for an ordering of the minimal cycle `z` starting at the corner
/// `k` along which every step is non-increasing in height.
fn looping_sequence(lat: &Lattice, k: &[i64], z: &[i64], sign: i64, e: Option<&[i64]>) -> Option<Vec<usize>> {
    let n = lat.dim();
    let start = vec![0i64; n];
    let mut parent: HashMap<Vec<i64>, (Vec<i64>, usize)> = HashMap::new();
    let mut stack = vec![start.clone()];
    parent.insert(start, (vec![], usize::MAX));
    while let Some(x) = stack.pop() {
        if x == z {
            let mut seq = vec![];
            let mut cur = x;
            while let Some((prev, v)) = parent.get(&cur).cloned() {
                if v == usize::MAX {
                    break;
                }
                seq.push(v);
                cur = prev;
            }
            seq.reverse();
            return Some(seq);
        }
        let mx = lat.mul(&x);
        for v in 0..n {
            if x[v] >= z[v] {
                continue;
            }
            let (du, dv) = step_changes(lat, k, &mx, v, sign, e);
            if du <= 0 && dv.map_or(true, |d| d <= 0) {
                let mut y = x.clone();
                y[v] += 1;
                if !parent.contains_key(&y) {
                    parent.insert(y.clone(), (x.clone(), v));
                    stack.push(y);
                }
            }
        }
    }
    None
}

/// Checks that a recorded sequence is non-increasing at every step.
pub fn check_sequence(lat: &Lattice, corner: &[i64], seq: &[usize], sign: i64, e: Option<&[i64]>) -> bool {
    let mut x = vec![0i64; lat.dim()];
    for &v in seq {
        let mx = lat.mul(&x);
        let (du, dv) = step_changes(lat, corner, &mx, v, sign, e);
        if du > 0 || dv.map_or(false, |d| d > 0) {
            return false;
        }
        x[v] += 1;
    }
    true
}

/// Verifies the looping sequences at both corners of
/// `{base + 2Mz : lo ≤ z ≤ hi}`.
pub fn certify_box(lat: &Lattice, cube_box: &CubeBox, e: Option<&[i64]>) -> Result<BoxCertificate> {
    let z = lat.total_minimal_cycle()?;
    let up_corner = translate(lat, &cube_box.base, &cube_box.hi);
    let down_corner = translate(lat, &cube_box.base, &cube_box.lo);
    let up = looping_sequence(lat, &up_corner, &z, 1, e)
        .ok_or_else(|| Error::Certificate("no non-increasing sequence from the upper corner".into()))?;
    let down = looping_sequence(lat, &down_corner, &z, -1, e)
        .ok_or_else(|| Error::Certificate("no non-increasing sequence from the lower corner".into()))?;
    Ok(BoxCertificate { cube_box: cube_box.clone(), cycle: z, up_sequence: up, down_sequence: down })
}

/// Re-checks a certificate step by step.
pub fn verify_certificate(lat: &Lattice, cert: &BoxCertificate, e: Option<&[i64]>) -> bool {
    let b = &cert.cube_box;
    let count = |seq: &[usize]| {
        let mut c = vec![0i64; lat.dim()];
        for &v in seq {
            c[v] += 1;
        }
        c
    };
    count(&cert.up_sequence) == cert.cycle
        && count(&cert.down_sequence) == cert.cycle
        && cert.cycle.iter().any(|&x| x > 0)
        && lat.mul(&cert.cycle).iter().all(|&p| p <= 0)
        && check_sequence(lat, &translate(lat, &b.base, &b.hi), &cert.up_sequence, 1, e)
        && check_sequence(lat, &translate(lat, &b.base, &b.lo), &cert.down_sequence, -1, e)
}

/// The box `base + 2M[-r·Z, r·Z]` with `Z` the minimal cycle.
pub fn certify_radius(lat: &Lattice, base: &[i64], e: Option<&[i64]>, r: i64) -> Result<BoxCertificate> {
    let z = lat.total_minimal_cycle()?;
    let b = CubeBox::new(base.to_vec(), z.iter().map(|x| -r * x).collect(), z.iter().map(|x| r * x).collect())?;
    certify_box(lat, &b, e)
}

/// Finds certified corners of the form `±(m·Z + b)` with small `b ≥ 0`,
/// trying smaller corners first.
pub fn auto_certify(lat: &Lattice, base: &[i64], e: Option<&[i64]>) -> Result<BoxCertificate> {
    let n = lat.dim();
    let z = lat.total_minimal_cycle()?;
    let max_b: i64 = if n > 6 { 1 } else { 3 };
    let mut corners = [None, None];
    for (slot, sign) in [(0usize, 1i64), (1, -1)] {
        'search: for total in 0..40i64 {
            for m in 0..=total {
                let rest = total - m;
                for b in small_vectors(n, rest, max_b) {
                    let y: Vec<i64> = z.iter().zip(&b).map(|(zz, bb)| sign * (m * zz + bb)).collect();
                    let corner = translate(lat, base, &y);
                    if looping_sequence(lat, &corner, &z, sign, e).is_some() {
                        corners[slot] = Some(y);
                        break 'search;
                    }
                }
            }
        }
    }
    match corners {
        [Some(hi), Some(lo)] => certify_box(lat, &CubeBox::new(base.to_vec(), lo, hi)?, e),
        _ => Err(Error::Certificate("no certified corner found within the search range".into())),
    }
}

/// Nonnegative vectors of length `n` with entries at most `cap` summing to `total`.
fn small_vectors(n: usize, total: i64, cap: i64) -> Vec<Vec<i64>> {
    fn rec(n: usize, total: i64, cap: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if cur.len() == n {
            if total == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let remaining = (n - cur.len() - 1) as i64;
        for a in 0..=cap.min(total) {
            if total - a > remaining * cap {
                continue;
            }
            cur.push(a);
            rec(n, total - a, cap, cur, out);
            cur.pop();
        }
    }
    let mut out = vec![];
    rec(n, total, cap, &mut Vec::new(), &mut out);
    out
}

/// Certified lattice or knot-lattice complexes, one per Spin^c structure.
#[derive(Clone, Debug)]
pub struct CertifiedModel {
    pub lattice: Lattice,
    pub knot: Option<Vec<i64>>,
    pub reps: Vec<Vec<i64>>,
    pub certificates: Vec<BoxCertificate>,
    pub complexes: Vec<LatticeComplex>,
}

impl CertifiedModel {
    /// Lattice model of the weighted graph (the knot vertex, if any, is ignored).
    pub fn lattice(g: &PlumbingGraph) -> Result<Self> {
        let lat = g.lattice()?;
        Self::build(lat, None)
    }

    /// Knot lattice model; requires an unweighted vertex.
    pub fn knot(g: &PlumbingGraph) -> Result<Self> {
        let kd = KnotData::new(g)?;
        Self::build(kd.lattice, Some(kd.e))
    }

    fn build(lat: Lattice, knot: Option<Vec<i64>>) -> Result<Self> {
        let reps = crate::grading::spinc_orbits(&lat)?;
        let mut certificates = vec![];
        let mut complexes = vec![];
        for k in &reps {
            let cert = auto_certify(&lat, k, knot.as_deref())?;
            complexes.push(build_cube_complex(&lat, &cert.cube_box, knot.as_deref())?);
            certificates.push(cert);
        }
        Ok(CertifiedModel { lattice: lat, knot, reps, certificates, complexes })
    }
}

/// True when every Spin^c component of the knot lattice model is filtered
/// homotopy equivalent to a doubly filtered point, i.e. its associated graded
/// homology has total rank one.
pub fn is_subcontractible_knot(g: &PlumbingGraph) -> Result<bool> {
    let model = CertifiedModel::knot(g)?;
    Ok(model.complexes.iter().all(|x| assoc_graded_homology(&x.complex).total() == 1))
}

/// `α = Πp_i` and `γ = α(m − 2 − Σ 1/p_i)`.
pub fn alpha_gamma(ps: &[i64]) -> Result<(i64, i64)> {
    check_coprime(ps)?;
    let alpha: i64 = ps.iter().product();
    let m = ps.len() as i64;
    let gamma = alpha * (m - 2) - ps.iter().map(|p| alpha / p).sum::<i64>();
    Ok((alpha, gamma))
}

fn check_coprime(ps: &[i64]) -> Result<()> {
    if ps.len() < 2 || ps.iter().any(|&p| p < 2) {
        return Err(Error::Invalid("need at least two integers, each at least 2".into()));
    }
    for i in 0..ps.len() {
        for j in i + 1..ps.len() {
            if ps[i].gcd(&ps[j]) != 1 {
                return Err(Error::Invalid(format!("{} and {} are not coprime", ps[i], ps[j])));
            }
        }
    }
    Ok(())
}

/// Solutions of `e₀α + Σ q_i α/p_i = −1` with `1 ≤ q_i ≤ p_i − 1`.
pub fn seifert_invariants(ps: &[i64]) -> Result<(i64, Vec<i64>)> {
    check_coprime(ps)?;
    let alpha: i64 = ps.iter().product();
    let mut qs = vec![];
    for &p in ps {
        let a = (alpha / p).rem_euclid(p);
        let inv = num_integer::Integer::extended_gcd(&a, &p).x.rem_euclid(p);
        qs.push((-inv).rem_euclid(p));
    }
    let s: i64 = qs.iter().zip(ps).map(|(qq, p)| qq * (alpha / p)).sum();
    let num = -1 - s;
    if num % alpha != 0 || qs.iter().any(|&x| x == 0) {
        return Err(Error::Computation("no Seifert invariants with the required normalisation".into()));
    }
    Ok((num / alpha, qs))
}

/// Continued fraction `p/q = b₁ − 1/(b₂ − …)` as leg weights `−b_j`.
pub fn leg_weights(mut p: i64, mut qq: i64) -> Vec<i64> {
    let mut out = vec![];
    while qq != 0 {
        let b = Integer::div_ceil(&p, &qq);
        out.push(-b);
        let r = b * qq - p;
        p = qq;
        qq = r;
    }
    out
}

/// Star-shaped plumbing of the Brieskorn sphere `Σ(p₁, …, p_m)` with an
/// unweighted vertex on the central node marking the regular fiber.
pub fn brieskorn_star(ps: &[i64]) -> Result<PlumbingGraph> {
    let (e0, qs) = seifert_invariants(ps)?;
    let mut ids = vec!["v0".to_string(), "c".to_string()];
    let mut weights = vec![None, Some(e0)];
    let mut edges = vec![(0, 1)];
    for (leg, (&p, &qq)) in ps.iter().zip(&qs).enumerate() {
        let mut prev = 1;
        for (j, w) in leg_weights(p, qq).into_iter().enumerate() {
            ids.push(format!("l{}_{}", leg + 1, j + 1));
            weights.push(Some(w));
            edges.push((prev, ids.len() - 1));
            prev = ids.len() - 1;
        }
    }
    PlumbingGraph::new(ids, weights, edges)
}

/// Closed-form τ function of a Brieskorn sphere:
/// `τ(0) = 0`, `τ(n+1) − τ(n) = 1 − e₀n − Σ⌈n q_i / p_i⌉`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Tau {
    pub ps: Vec<i64>,
    pub e0: i64,
    pub qs: Vec<i64>,
    pub alpha: i64,
    pub gamma: i64,
}

impl Tau {
    /// The closed form without calibration.
    pub fn uncalibrated(ps: &[i64]) -> Result<Self> {
        let (alpha, gamma) = alpha_gamma(ps)?;
        let (e0, qs) = seifert_invariants(ps)?;
        Ok(Tau { ps: ps.to_vec(), e0, qs, alpha, gamma })
    }

    /// The closed form, checked against the lattice oracle on `[0, 2α]`.
    /// Returns the calibration transcript alongside.
    pub fn calibrated(ps: &[i64]) -> Result<(Self, String)> {
        let tau = Self::uncalibrated(ps)?;
        let g = brieskorn_star(ps)?;
        let oracle = tau_lattice_oracle(&g, 0, 2 * tau.alpha)?;
        for (n, &o) in oracle.iter().enumerate() {
            let c = tau.eval(n as i64);
            if c != o {
                return Err(Error::Calibration(format!(
                    "closed form with e0={} q={:?} gives tau({n})={c}, lattice minimisation gives {o}",
                    tau.e0, tau.qs
                )));
            }
        }
        let transcript = format!(
            "p={:?} e0={} q={:?}: closed form agrees with lattice minimisation for n in [0, {}]",
            tau.ps,
            tau.e0,
            tau.qs,
            2 * tau.alpha
        );
        Ok((tau, transcript))
    }

    pub fn delta(&self, n: i64) -> i64 {
        1 - self.e0 * n - self.ps.iter().zip(&self.qs).map(|(&p, &qq)| Integer::div_ceil(&(n * qq), &p)).sum::<i64>()
    }

    pub fn eval(&self, n: i64) -> i64 {
        if n >= 0 {
            (0..n).map(|j| self.delta(j)).sum()
        } else {
            -(n..0).map(|j| self.delta(j)).sum::<i64>()
        }
    }

    /// `τ(lo), …, τ(hi)`.
    pub fn values(&self, lo: i64, hi: i64) -> Vec<i64> {
        let mut out = Vec::with_capacity((hi - lo + 1).max(0) as usize);
        let mut t = self.eval(lo);
        for n in lo..=hi {
            out.push(t);
            t += self.delta(n);
        }
        out
    }
}

/// τ(n) for `n = 0..=n_max` by direct minimisation of
/// `χ(x) = −(k_t·x + x·Mx)/2` over lattice vectors whose coefficient on the
/// knot's neighbour `center` (a lattice coordinate) equals `n`. Each
/// component of the graph minus that vertex is a convex integer quadratic,
/// minimised exactly inside its enclosing ellipsoid.
pub fn tau_lattice_oracle(g: &PlumbingGraph, center: usize, n_max: i64) -> Result<Vec<i64>> {
    let lat = g.lattice()?;
    if !lat.is_negative_definite() {
        return Err(Error::NotNegativeDefinite);
    }
    let kcon = crate::grading::canonical_char(&lat);
    let k = descend(&lat, &kcon).0;
    let comps = components_without(&lat, center);
    let m = lat.matrix();
    let mut out = vec![];
    for n in 0..=n_max {
        let mut twice = -(k[center] * n + m[center][center] * n * n);
        for comp in &comps {
            let qm: Vec<Vec<i64>> = comp.iter().map(|&i| comp.iter().map(|&j| -m[i][j]).collect()).collect();
            // 2b = k_C + 2n M_{c,C}
            let b2: Vec<i64> = comp.iter().map(|&i| k[i] + 2 * n * m[center][i]).collect();
            twice += minimise_quadratic(&qm, &b2)?;
        }
        if twice % 2 != 0 {
            return Err(Error::Computation("odd value of 2χ".into()));
        }
        out.push(twice / 2);
    }
    Ok(out)
}

fn components_without(lat: &Lattice, v: usize) -> Vec<Vec<usize>> {
    let n = lat.dim();
    let m = lat.matrix();
    let mut seen = vec![false; n];
    seen[v] = true;
    let mut out = vec![];
    for s in 0..n {
        if seen[s] {
            continue;
        }
        let mut comp = vec![];
        let mut stack = vec![s];
        seen[s] = true;
        while let Some(u) = stack.pop() {
            comp.push(u);
            for w in 0..n {
                if !seen[w] && w != u && m[u][w] != 0 {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Minimum over integer `y` of `2f(y) = y·Qy − b2·y` for positive definite `Q`.
fn minimise_quadratic(qm: &[Vec<i64>], b2: &[i64]) -> Result<i64> {
    let n = qm.len();
    let ql = Lattice::new(qm.to_vec())?;
    // f takes half-integer values; work with 2f.
    let f2 = |y: &[i64]| -> i64 { ql.pair(y, y) - b2.iter().zip(y).map(|(a, b)| a * b).sum::<i64>() };
    // Continuous minimiser y* = Q^{-1} b2 / 2.
    let ystar: Vec<Q> = ql.solve(b2).into_iter().map(|x| x / q(2)).collect();
    let rounded: Vec<i64> = ystar.iter().map(|x| x.round().to_integer()).collect();
    let fr = f2(&rounded);
    // 2f(y*) = −½ b2·y*
    let f2star: Q = -ystar.iter().zip(b2).map(|(y, b)| y * q(*b)).sum::<Q>() / q(2) * q(1);
    let slack = q(fr) - f2star; // = (y−y*)ᵀQ(y−y*) bound for any better y
    let mut ranges = vec![];
    for i in 0..n {
        let qinv = Q::new(ql.adjugate()[i][i], ql.det());
        let r2 = slack * qinv;
        let r = (*r2.numer() as f64 / *r2.denom() as f64).sqrt().ceil() as i64 + 1;
        let c = ystar[i].floor().to_integer();
        ranges.push((c - r, c + r + 1));
    }
    let mut best = fr;
    let mut y: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    loop {
        best = best.min(f2(&y));
        let mut i = 0;
        loop {
            if i == n {
                return Ok(best);
            }
            y[i] += 1;
            if y[i] <= ranges[i].1 {
                break;
            }
            y[i] = ranges[i].0;
            i += 1;
        }
    }
}

/// An affine index map `n ↦ sign·n + offset`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Affine {
    pub sign: i64,
    pub offset: i64,
}

impl Affine {
    pub fn apply(&self, n: i64) -> i64 {
        self.sign * n + self.offset
    }

    pub fn then(&self, other: &Affine) -> Affine {
        Affine { sign: self.sign * other.sign, offset: other.sign * self.offset + other.offset }
    }
}

/// A filtered line: vertices at increasing integer positions, consecutive
/// vertices joined by an edge whose heights are the minima of its ends.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FilteredLine {
    pub positions: Vec<i64>,
    #[serde(serialize_with = "crate::rational::serialize_vec")]
    pub h1: Vec<Q>,
    #[serde(serialize_with = "crate::rational::serialize_vec")]
    pub h2: Vec<Q>,
    pub alpha: i64,
    pub gamma: i64,
    pub i_map: Affine,
    pub j_map: Affine,
    pub gamma_map: Affine,
}

/// Builds the filtered line of the regular fiber of `Σ(p₁, …, p_m)` from the
/// calibrated τ function. Returns the line and the calibration transcript.
pub fn ar_line(ps: &[i64]) -> Result<(FilteredLine, String)> {
    let (tau, transcript) = Tau::calibrated(ps)?;
    let g = brieskorn_star(ps)?;
    let lat = g.lattice()?;
    let kt = descend(&lat, &crate::grading::canonical_char(&lat)).0;
    let top = grf_value(&lat, &kt);
    let (alpha, gamma) = (tau.alpha, tau.gamma);
    let hi = 1 + gamma + alpha;
    if hi < 0 {
        return Err(Error::Invalid("empty support".into()));
    }
    let h = |n: i64| top - q(2 * tau.eval(n));
    let positions: Vec<i64> = (0..=hi).collect();
    let h1 = positions.iter().map(|&n| h(n)).collect();
    let h2 = positions.iter().map(|&n| h(n - alpha)).collect();
    let line = FilteredLine {
        positions,
        h1,
        h2,
        alpha,
        gamma,
        i_map: Affine { sign: -1, offset: 1 + gamma },
        j_map: Affine { sign: -1, offset: 1 + gamma + alpha },
        gamma_map: Affine { sign: 1, offset: -alpha },
    };
    Ok((line, transcript))
}

fn jointly_monotone(a: (Q, Q), b: (Q, Q)) -> (bool, bool) {
    let d1 = b.0 - a.0;
    let d2 = b.1 - a.1;
    let up = d1 >= q(0) && d2 >= q(0);
    let down = d1 <= q(0) && d2 <= q(0);
    (up, down)
}

impl FilteredLine {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn lo(&self) -> i64 {
        self.positions[0]
    }

    pub fn hi(&self) -> i64 {
        *self.positions.last().unwrap()
    }

    pub fn heights_at(&self, n: i64) -> Option<(Q, Q)> {
        let i = self.positions.iter().position(|&p| p == n)?;
        Some((self.h1[i], self.h2[i]))
    }

    /// Steps between consecutive vertices: `(Δh1, Δh2)`.
    pub fn steps(&self) -> Vec<(Q, Q)> {
        (1..self.len()).map(|i| (self.h1[i] - self.h1[i - 1], self.h2[i] - self.h2[i - 1])).collect()
    }

    /// True when each step moves both heights in the same direction.
    pub fn satisfies_dichotomy(&self) -> bool {
        self.steps().iter().all(|&s| {
            let (up, down) = jointly_monotone((q(0), q(0)), s);
            up || down
        })
    }

    /// Chain complex: vertices first, then the edges between consecutive vertices.
    pub fn to_complex(&self) -> FilteredComplex {
        let n = self.len();
        let mut dims = vec![0u8; n];
        let mut h1 = self.h1.clone();
        let mut h2 = self.h2.clone();
        let mut bd: Vec<Vec<u32>> = vec![vec![]; n];
        for i in 1..n {
            dims.push(1);
            h1.push(self.h1[i - 1].min(self.h1[i]));
            h2.push(self.h2[i - 1].min(self.h2[i]));
            bd.push(vec![(i - 1) as u32, i as u32]);
        }
        FilteredComplex::new(dims, h1, Some(h2), bd)
    }

    /// Cell map of [`Self::to_complex`] induced by an affine index map,
    /// clamped to the support; edges whose ends land on one vertex go to zero.
    pub fn cell_map(&self, f: &Affine) -> Result<CellMap> {
        let (lo, hi) = (self.lo(), self.hi());
        if self.positions.len() as i64 != hi - lo + 1 {
            return Err(Error::Invalid("index maps need a line without gaps".into()));
        }
        let n = self.len();
        let vert = |p: i64| (f.apply(p).clamp(lo, hi) - lo) as u32;
        let mut image: Vec<Option<u32>> = self.positions.iter().map(|&p| Some(vert(p))).collect();
        for i in 1..n {
            let (a, b) = (vert(self.positions[i - 1]), vert(self.positions[i]));
            image.push(if a == b { None } else { Some(n as u32 + a.min(b)) });
        }
        Ok(CellMap { image })
    }

    /// Keeps the joint local extrema and both endpoints. Returns the line
    /// unchanged with `false` when some step moves the heights in opposite
    /// directions.
    pub fn simplify(&self) -> (FilteredLine, bool) {
        if !self.satisfies_dichotomy() {
            return (self.clone(), false);
        }
        // Collapse runs of equal heights to their first vertex.
        let mut runs: Vec<usize> = vec![];
        for i in 0..self.len() {
            match runs.last() {
                Some(&j) if self.h1[j] == self.h1[i] && self.h2[j] == self.h2[i] => {}
                _ => runs.push(i),
            }
        }
        let n = runs.len();
        let step = |a: usize, b: usize| jointly_monotone((self.h1[runs[a]], self.h2[runs[a]]), (self.h1[runs[b]], self.h2[runs[b]]));
        let mut keep = vec![runs[0]];
        for i in 1..n.saturating_sub(1) {
            let (in_up, in_down) = step(i - 1, i);
            let (out_up, out_down) = step(i, i + 1);
            if (in_up && out_down) || (in_down && out_up) {
                keep.push(runs[i]);
            }
        }
        if n > 1 {
            keep.push(runs[n - 1]);
        }
        let line = FilteredLine {
            positions: keep.iter().map(|&i| self.positions[i]).collect(),
            h1: keep.iter().map(|&i| self.h1[i]).collect(),
            h2: keep.iter().map(|&i| self.h2[i]).collect(),
            ..self.clone()
        };
        (line, true)
    }

    /// Tab-separated table of positions and heights.
    pub fn to_tsv(&self) -> String {
        let mut s = String::from("n\th1\th2\n");
        for i in 0..self.len() {
            s.push_str(&format!("{}\t{}\t{}\n", self.positions[i], fmt(&self.h1[i]), fmt(&self.h2[i])));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homology::{assoc_graded_homology, betti, genus};
    use crate::plumbing::parse_graph;

    const TREFOIL: &str = "vertex v0 unweighted\nvertex c -1\nvertex a -2\nvertex b -3\nedge v0 c\nedge c a\nedge c b\n";

    #[test]
    fn brieskorn_data() {
        assert_eq!(alpha_gamma(&[2, 3]).unwrap(), (6, -5));
        assert_eq!(alpha_gamma(&[2, 3, 7]).unwrap(), (42, 1));
        assert_eq!(alpha_gamma(&[2, 3, 5]).unwrap(), (30, -1));
        assert!(alpha_gamma(&[2, 4]).is_err());
        assert_eq!(seifert_invariants(&[2, 3]).unwrap(), (-1, vec![1, 1]));
        assert_eq!(seifert_invariants(&[2, 3, 7]).unwrap(), (-1, vec![1, 1, 1]));
        assert_eq!(seifert_invariants(&[2, 3, 5]).unwrap(), (-2, vec![1, 2, 4]));
        assert_eq!(leg_weights(5, 4), vec![-2, -2, -2, -2]);
        assert_eq!(leg_weights(7, 1), vec![-7]);
    }

    #[test]
    fn star_of_two_three_is_the_trefoil() {
        let g = brieskorn_star(&[2, 3]).unwrap();
        assert_eq!(g.form(), parse_graph(TREFOIL).unwrap().form());
    }

    #[test]
    fn closed_form_examples() {
        let t = Tau::uncalibrated(&[2, 3]).unwrap();
        assert_eq!(t.values(0, 2), vec![0, 1, 1]);
        let t = Tau::uncalibrated(&[2, 3, 7]).unwrap();
        for n in 0..100 {
            let expect = 1 + n - Integer::div_ceil(&n, &2) - Integer::div_ceil(&n, &3) - Integer::div_ceil(&n, &7);
            assert_eq!(t.delta(n), expect);
            assert_eq!(t.delta(n + 42), t.delta(n) + 1);
        }
    }

    #[test]
    fn oracle_calibrates_small_cases() {
        let (t, transcript) = Tau::calibrated(&[2, 3]).unwrap();
        assert_eq!(t.eval(2), 1);
        assert!(transcript.contains("agrees"));
        let g = brieskorn_star(&[2, 3]).unwrap();
        assert_eq!(tau_lattice_oracle(&g, 0, 2).unwrap(), vec![0, 1, 1]);
    }

    #[test]
    fn trefoil_line() {
        let (line, _) = ar_line(&[2, 3]).unwrap();
        assert_eq!(line.positions, vec![0, 1, 2]);
        assert_eq!(line.h1, vec![q(0), q(-2), q(-2)]);
        assert_eq!(line.h2, vec![q(-2), q(-2), q(0)]);
        assert_eq!(line.j_map.apply(0), 2);
        assert_eq!(line.gamma_map.apply(7), 1);
        let x = line.to_complex();
        assert!(x.boundary_squares_to_zero() && x.is_monotone());
        let gamma = line.cell_map(&line.gamma_map).unwrap();
        assert!(gamma.is_chain_map(&x, &x));
        assert!(gamma.is_filtered(x.h2.as_ref().unwrap(), &x.h1));
        assert!((0..3).all(|v| gamma.get(v) == Some(0)));
    }

    #[test]
    fn certificates() {
        let l = parse_graph("vertex a -1\n").unwrap().lattice().unwrap();
        let c = certify_radius(&l, &[-1], None, 0).unwrap();
        assert!(verify_certificate(&l, &c, None));
        let c = certify_radius(&l, &[-1], None, 1).unwrap();
        assert_eq!(c.cube_box.point_count(), 3);
        let g = parse_graph(TREFOIL).unwrap();
        let kd = KnotData::new(&g).unwrap();
        let cert = auto_certify(&kd.lattice, kd.spinc.rep(0), Some(&kd.e)).unwrap();
        assert!(verify_certificate(&kd.lattice, &cert, Some(&kd.e)));
        assert_eq!(cert.cube_box.hi, vec![2, 1, 1]);
        assert_eq!(cert.cube_box.lo, vec![0, 0, 0]);
        // Point box fails for the knot: the trefoil is not a filtered point.
        assert!(certify_radius(&kd.lattice, kd.spinc.rep(0), Some(&kd.e), 0).is_err());
    }

    #[test]
    fn certified_trefoil_knot_complex_is_the_staircase() {
        let g = parse_graph(TREFOIL).unwrap();
        let m = CertifiedModel::knot(&g).unwrap();
        let x = &m.complexes[0].complex;
        assert_eq!(betti(x), vec![1]);
        let (line, _) = ar_line(&[2, 3]).unwrap();
        assert_eq!(assoc_graded_homology(x), assoc_graded_homology(&line.to_complex()));
        assert!(!is_subcontractible_knot(&g).unwrap());
    }

    #[test]
    fn simplify_trivial_lines() {
        let mk = |h1: Vec<i64>, h2: Vec<i64>| FilteredLine {
            positions: (0..h1.len() as i64).collect(),
            h1: h1.into_iter().map(q).collect(),
            h2: h2.into_iter().map(q).collect(),
            alpha: 0,
            gamma: 0,
            i_map: Affine { sign: -1, offset: 0 },
            j_map: Affine { sign: -1, offset: 0 },
            gamma_map: Affine { sign: 1, offset: 0 },
        };
        let (s, ok) = mk(vec![0, -2, -4], vec![0, -2, -2]).simplify();
        assert!(ok);
        assert_eq!(s.positions, vec![0, 2]);
        let (s, ok) = mk(vec![0, 0, 0], vec![0, 0, 0]).simplify();
        assert!(ok);
        assert_eq!(s.positions, vec![0]);
        let (s, _) = mk(vec![0, -2, -2, 0], vec![0, -2, -2, 0]).simplify();
        assert_eq!(s.positions, vec![0, 1, 3]);
        let (_, ok) = mk(vec![0, 2], vec![0, -2]).simplify();
        assert!(!ok);
    }

    #[test]
    fn sigma_237_simplified_line() {
        let (line, _) = ar_line(&[2, 3, 7]).unwrap();
        assert_eq!((line.lo(), line.hi()), (0, 44));
        assert!(line.satisfies_dichotomy());
        let steps: std::collections::BTreeSet<(Q, Q)> = line.steps().into_iter().collect();
        let expect: std::collections::BTreeSet<(Q, Q)> =
            [(-2, 0), (2, 4), (-4, -2), (0, 2)].into_iter().map(|(a, b)| (q(a), q(b))).collect();
        assert!(steps.is_subset(&expect));
        let j = line.cell_map(&line.j_map).unwrap();
        let x = line.to_complex();
        assert!(j.preserves(&x.h1, x.h2.as_ref().unwrap()) && j.preserves(x.h2.as_ref().unwrap(), &x.h1));
        let (s, ok) = line.simplify();
        assert!(ok);
        let rows: Vec<(i64, i64, i64)> = (0..s.len())
            .map(|i| (s.positions[i], s.h1[i].to_integer(), s.h2[i].to_integer()))
            .collect();
        let table = [
            (0, 0, -44), (1, -2, -44), (6, 0, -32), (7, -2, -32), (12, -2, -22), (13, -4, -22),
            (14, -4, -20), (15, -6, -20), (18, -6, -14), (19, -8, -14), (20, -8, -12), (22, -12, -12),
            (24, -12, -8), (25, -14, -8), (26, -14, -6), (29, -20, -6), (30, -20, -4), (31, -22, -4),
            (32, -22, -2), (37, -32, -2), (38, -32, 0), (43, -44, -2), (44, -44, 0),
        ];
        assert_eq!(rows, table);
        assert_eq!(genus(&x), Some((q(22), 1)));
    }
}
