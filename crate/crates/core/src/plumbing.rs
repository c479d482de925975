//! Plumbing forests, their intersection forms, and framing conversions.

use std::collections::HashMap;

use num_rational::Ratio;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::rational::{q, Q};
use crate::{Error, Result};

/// A weighted forest with at most one unweighted vertex marking a knot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlumbingGraph {
    ids: Vec<String>,
    weights: Vec<Option<i64>>,
    edges: Vec<(usize, usize)>,
}

#[derive(Deserialize, Serialize)]
struct JsonVertex {
    id: serde_json::Value,
    weight: Option<i64>,
}

#[derive(Deserialize, Serialize)]
struct JsonGraph {
    vertices: Vec<JsonVertex>,
    edges: Vec<(serde_json::Value, serde_json::Value)>,
}

fn json_id(v: &serde_json::Value) -> Result<String> {
    match v {
        serde_json::Value::String(s) => Ok(s.clone()),
        serde_json::Value::Number(n) => Ok(n.to_string()),
        other => Err(Error::Invalid(format!("vertex id must be a string or number, got {other}"))),
    }
}

/// Parses a graph from the line-oriented text format or from JSON.
pub fn parse_graph(text: &str) -> Result<PlumbingGraph> {
    if text.trim_start().starts_with('{') {
        parse_json(text)
    } else {
        parse_text(text)
    }
}

fn parse_json(text: &str) -> Result<PlumbingGraph> {
    let raw: JsonGraph = serde_json::from_str(text).map_err(|e| Error::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let mut b = Builder::default();
    for v in &raw.vertices {
        b.vertex(json_id(&v.id)?, v.weight)?;
    }
    for (a, c) in &raw.edges {
        b.edge(&json_id(a)?, &json_id(c)?)?;
    }
    b.finish()
}

fn parse_text(text: &str) -> Result<PlumbingGraph> {
    let mut b = Builder::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        let mut toks = Vec::new();
        let mut col = 0;
        for piece in line.split_whitespace() {
            let start = line[col..].find(piece).unwrap() + col;
            toks.push((start + 1, piece));
            col = start + piece.len();
        }
        if toks.is_empty() {
            continue;
        }
        let syntax = |column: usize, message: String| Error::Syntax {
            line: lineno + 1,
            column,
            message,
        };
        match toks[0].1 {
            "vertex" => {
                if toks.len() != 3 {
                    return Err(syntax(toks[0].0, "expected `vertex <id> <weight|unweighted>`".into()));
                }
                let (wcol, wtok) = toks[2];
                let weight = if wtok == "unweighted" {
                    None
                } else {
                    let w = wtok.replace('\u{2212}', "-");
                    Some(w.parse::<i64>().map_err(|_| syntax(wcol, format!("invalid weight `{wtok}`")))?)
                };
                b.vertex(toks[1].1.to_string(), weight)?;
            }
            "edge" => {
                if toks.len() != 3 {
                    return Err(syntax(toks[0].0, "expected `edge <id> <id>`".into()));
                }
                b.edge(toks[1].1, toks[2].1)?;
            }
            other => return Err(syntax(toks[0].0, format!("unknown statement `{other}`"))),
        }
    }
    b.finish()
}

#[derive(Default)]
struct Builder {
    ids: Vec<String>,
    weights: Vec<Option<i64>>,
    index: HashMap<String, usize>,
    edges: Vec<(usize, usize)>,
}

impl Builder {
    fn vertex(&mut self, id: String, weight: Option<i64>) -> Result<()> {
        if self.index.contains_key(&id) {
            return Err(Error::DuplicateVertex(id));
        }
        if weight.is_none() {
            if let Some(prev) = self.weights.iter().position(|w| w.is_none()) {
                return Err(Error::MultipleUnweighted(self.ids[prev].clone(), id));
            }
        }
        self.index.insert(id.clone(), self.ids.len());
        self.ids.push(id);
        self.weights.push(weight);
        Ok(())
    }

    fn edge(&mut self, a: &str, b: &str) -> Result<()> {
        let ia = *self.index.get(a).ok_or_else(|| Error::UnknownVertex(a.to_string()))?;
        let ib = *self.index.get(b).ok_or_else(|| Error::UnknownVertex(b.to_string()))?;
        self.edges.push((ia.min(ib), ia.max(ib)));
        Ok(())
    }

    fn finish(self) -> Result<PlumbingGraph> {
        PlumbingGraph::new(self.ids, self.weights, self.edges)
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

impl PlumbingGraph {
    /// Builds and validates a graph. Vertex order is preserved.
    pub fn new(ids: Vec<String>, weights: Vec<Option<i64>>, edges: Vec<(usize, usize)>) -> Result<Self> {
        assert_eq!(ids.len(), weights.len());
        let mut seen = HashMap::new();
        for (i, id) in ids.iter().enumerate() {
            if seen.insert(id.clone(), i).is_some() {
                return Err(Error::DuplicateVertex(id.clone()));
            }
        }
        let unweighted: Vec<usize> = (0..ids.len()).filter(|&i| weights[i].is_none()).collect();
        if unweighted.len() > 1 {
            return Err(Error::MultipleUnweighted(ids[unweighted[0]].clone(), ids[unweighted[1]].clone()));
        }
        let mut parent: Vec<usize> = (0..ids.len()).collect();
        let mut norm = Vec::with_capacity(edges.len());
        for &(a, b) in &edges {
            if a >= ids.len() || b >= ids.len() {
                return Err(Error::Invalid(format!("edge endpoint out of range: ({a}, {b})")));
            }
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra == rb {
                return Err(Error::Cycle(ids[a].clone(), ids[b].clone()));
            }
            parent[ra] = rb;
            norm.push((a.min(b), a.max(b)));
        }
        Ok(PlumbingGraph { ids, weights, edges: norm })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn weights(&self) -> &[Option<i64>] {
        &self.weights
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }

    /// The distinguished unweighted vertex, if any.
    pub fn unweighted(&self) -> Option<usize> {
        self.weights.iter().position(|w| w.is_none())
    }

    /// File indices of the weighted vertices; lattice coordinates follow this order.
    pub fn core_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.weights[i].is_some()).collect()
    }

    /// Intersection form of the weighted part.
    pub fn form(&self) -> Vec<Vec<i64>> {
        let core = self.core_indices();
        let pos: HashMap<usize, usize> = core.iter().enumerate().map(|(a, &b)| (b, a)).collect();
        let n = core.len();
        let mut m = vec![vec![0i64; n]; n];
        for (a, &v) in core.iter().enumerate() {
            m[a][a] = self.weights[v].unwrap();
        }
        for &(a, b) in &self.edges {
            if let (Some(&x), Some(&y)) = (pos.get(&a), pos.get(&b)) {
                m[x][y] = 1;
                m[y][x] = 1;
            }
        }
        m
    }

    pub fn lattice(&self) -> Result<Lattice> {
        Lattice::new(self.form())
    }

    /// Incidence vector of the unweighted vertex over the weighted vertices.
    pub fn knot_vector(&self) -> Result<Vec<i64>> {
        let v0 = self.unweighted().ok_or(Error::NoKnot)?;
        let core = self.core_indices();
        let mut e = vec![0i64; core.len()];
        for &(a, b) in &self.edges {
            let other = if a == v0 {
                b
            } else if b == v0 {
                a
            } else {
                continue;
            };
            let p = core.iter().position(|&c| c == other).unwrap();
            e[p] += 1;
        }
        Ok(e)
    }

    /// The graph with the unweighted vertex given weight `n`.
    pub fn filled(&self, n: i64) -> Result<PlumbingGraph> {
        let v0 = self.unweighted().ok_or(Error::NoKnot)?;
        let mut g = self.clone();
        g.weights[v0] = Some(n);
        Ok(g)
    }

    /// The filled graph together with a new unweighted vertex attached to the
    /// old knot vertex, presenting the dual knot.
    pub fn filled_with_dual(&self, n: i64) -> Result<PlumbingGraph> {
        let v0 = self.unweighted().ok_or(Error::NoKnot)?;
        let mut g = self.filled(n)?;
        let mut id = String::from("u0");
        while g.index_of(&id).is_some() {
            id.push('\'');
        }
        g.ids.push(id);
        g.weights.push(None);
        g.edges.push((v0, g.ids.len() - 1));
        Ok(g)
    }

    /// Lattice coordinate of the original knot vertex inside `filled(n)`.
    pub fn filled_knot_coordinate(&self) -> Result<usize> {
        let v0 = self.unweighted().ok_or(Error::NoKnot)?;
        Ok((0..v0).filter(|&i| self.weights[i].is_some()).count())
    }

    /// Disjoint union with the two unweighted vertices identified.
    pub fn connected_sum(&self, other: &PlumbingGraph) -> Result<PlumbingGraph> {
        let a0 = self.unweighted().ok_or(Error::NoKnot)?;
        let b0 = other.unweighted().ok_or(Error::NoKnot)?;
        let mut ids: Vec<String> = self.ids.iter().map(|s| format!("1.{s}")).collect();
        ids[a0] = self.ids[a0].clone();
        let mut weights = self.weights.clone();
        let mut edges = self.edges.clone();
        let mut map = vec![0usize; other.len()];
        for i in 0..other.len() {
            if i == b0 {
                map[i] = a0;
            } else {
                map[i] = ids.len();
                ids.push(format!("2.{}", other.ids[i]));
                weights.push(other.weights[i]);
            }
        }
        for &(a, b) in &other.edges {
            edges.push((map[a], map[b]));
        }
        PlumbingGraph::new(ids, weights, edges)
    }

    /// Line-oriented text serialisation accepted by [`parse_graph`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (id, w) in self.ids.iter().zip(&self.weights) {
            match w {
                Some(w) => out.push_str(&format!("vertex {id} {w}\n")),
                None => out.push_str(&format!("vertex {id} unweighted\n")),
            }
        }
        for &(a, b) in &self.edges {
            out.push_str(&format!("edge {} {}\n", self.ids[a], self.ids[b]));
        }
        out
    }

    pub fn to_json(&self) -> String {
        let g = JsonGraph {
            vertices: self
                .ids
                .iter()
                .zip(&self.weights)
                .map(|(id, w)| JsonVertex { id: serde_json::Value::String(id.clone()), weight: *w })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|&(a, b)| {
                    (serde_json::Value::String(self.ids[a].clone()), serde_json::Value::String(self.ids[b].clone()))
                })
                .collect(),
        };
        serde_json::to_string(&g).expect("graph serialisation")
    }
}

/// Determinant by fraction-free elimination with row pivoting.
pub fn determinant(m: &[Vec<i64>]) -> i128 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    let mut a: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&r| a[r][k] != 0) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
            a[i][k] = 0;
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}

/// Leading principal minors, stopping early at the first zero.
pub fn leading_minors(m: &[Vec<i64>]) -> Vec<i128> {
    let n = m.len();
    let mut a: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut out = Vec::with_capacity(n);
    let mut prev = 1i128;
    for k in 0..n {
        out.push(a[k][k]);
        if a[k][k] == 0 {
            break;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
            a[i][k] = 0;
        }
        prev = a[k][k];
    }
    out
}

/// Negative definiteness by the signs of the leading principal minors.
pub fn form_is_negative_definite(m: &[Vec<i64>]) -> bool {
    let minors = leading_minors(m);
    minors.len() == m.len()
        && minors.iter().enumerate().all(|(k, &d)| if k % 2 == 0 { d < 0 } else { d > 0 })
}

pub fn is_negative_definite(g: &PlumbingGraph) -> bool {
    form_is_negative_definite(&g.form())
}

/// An integral symmetric form together with its determinant and adjugate,
/// so that `M^{-1} = adj / det`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lattice {
    m: Vec<Vec<i64>>,
    det: i64,
    adj: Vec<Vec<i64>>,
}

impl Lattice {
    pub fn new(m: Vec<Vec<i64>>) -> Result<Self> {
        let n = m.len();
        let det = determinant(&m);
        if det == 0 {
            return Err(Error::NotNegativeDefinite);
        }
        let det = i64::try_from(det).map_err(|_| Error::Computation("determinant overflow".into()))?;
        // Gauss-Jordan over the rationals, then scale by det.
        type R = Ratio<i128>;
        let mut a: Vec<Vec<R>> = (0..n)
            .map(|i| {
                let mut row: Vec<R> = m[i].iter().map(|&x| R::from_integer(x as i128)).collect();
                row.extend((0..n).map(|j| R::from_integer((i == j) as i128)));
                row
            })
            .collect();
        for c in 0..n {
            let p = (c..n).find(|&r| !a[r][c].is_zero()).expect("nonsingular");
            a.swap(c, p);
            let pv = a[c][c];
            for x in a[c].iter_mut() {
                *x /= pv;
            }
            for r in 0..n {
                if r != c && !a[r][c].is_zero() {
                    let f = a[r][c];
                    let pivot_row = a[c].clone();
                    for (x, y) in a[r].iter_mut().zip(pivot_row) {
                        *x -= f * y;
                    }
                }
            }
        }
        let mut adj = vec![vec![0i64; n]; n];
        for i in 0..n {
            for j in 0..n {
                let v = a[i][n + j] * R::from_integer(det as i128);
                debug_assert!(v.is_integer());
                adj[i][j] = v.to_integer() as i64;
            }
        }
        Ok(Lattice { m, det, adj })
    }

    pub fn dim(&self) -> usize {
        self.m.len()
    }

    pub fn matrix(&self) -> &[Vec<i64>] {
        &self.m
    }

    pub fn det(&self) -> i64 {
        self.det
    }

    pub fn adjugate(&self) -> &[Vec<i64>] {
        &self.adj
    }

    pub fn weight(&self, v: usize) -> i64 {
        self.m[v][v]
    }

    pub fn is_negative_definite(&self) -> bool {
        form_is_negative_definite(&self.m)
    }

    /// `M x`.
    pub fn mul(&self, x: &[i64]) -> Vec<i64> {
        self.m.iter().map(|r| r.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }

    /// `x^T M y`.
    pub fn pair(&self, x: &[i64], y: &[i64]) -> i64 {
        self.mul(x).iter().zip(y).map(|(a, b)| a * b).sum()
    }

    /// `M^{-1} k` as exact rationals.
    pub fn solve(&self, k: &[i64]) -> Vec<Q> {
        self.adj
            .iter()
            .map(|r| Q::new(r.iter().zip(k).map(|(a, b)| a * b).sum(), self.det))
            .collect()
    }

    /// `k^T M^{-1} l`.
    pub fn dual_pair(&self, k: &[i64], l: &[i64]) -> Q {
        let s: i64 = self
            .adj
            .iter()
            .zip(k)
            .map(|(r, &a)| a * r.iter().zip(l).map(|(x, y)| x * y).sum::<i64>())
            .sum();
        Q::new(s, self.det)
    }

    /// Solves `M x = k` over the integers, if possible.
    pub fn solve_integral(&self, k: &[i64]) -> Option<Vec<i64>> {
        let x = self.solve(k);
        x.iter().all(|v| v.is_integer()).then(|| x.iter().map(|v| v.to_integer()).collect())
    }

    /// Connected components of the graph underlying the form.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.dim();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
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
                    if w != u && self.m[u][w] != 0 && !seen[w] {
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

    fn laufer_from(&self, start: usize) -> Result<Vec<i64>> {
        let n = self.dim();
        let cap = (self.det.unsigned_abs() as usize).saturating_mul(n * n).max(n);
        let mut x = vec![0i64; n];
        x[start] = 1;
        let mut mx = self.mul(&x);
        let mut steps = 0usize;
        while let Some(v) = (0..n).find(|&v| mx[v] > 0) {
            x[v] += 1;
            for (w, row) in self.m.iter().enumerate() {
                mx[w] += row[v];
            }
            steps += 1;
            if steps > cap {
                return Err(Error::Computation("Laufer iteration exceeded its step cap".into()));
            }
        }
        Ok(x)
    }

    /// Minimal cycle of a connected negative-definite form.
    pub fn minimal_cycle(&self) -> Result<Vec<i64>> {
        if !self.is_negative_definite() {
            return Err(Error::NotNegativeDefinite);
        }
        if self.components().len() != 1 {
            return Err(Error::NotConnected);
        }
        self.laufer_from(0)
    }

    /// Minimal cycle of each connected component, as full-length vectors.
    pub fn minimal_cycles(&self) -> Result<Vec<Vec<i64>>> {
        if !self.is_negative_definite() {
            return Err(Error::NotNegativeDefinite);
        }
        self.components().iter().map(|c| self.laufer_from(c[0])).collect()
    }

    /// Sum of the per-component minimal cycles.
    pub fn total_minimal_cycle(&self) -> Result<Vec<i64>> {
        let mut z = vec![0i64; self.dim()];
        for c in self.minimal_cycles()? {
            for (a, b) in z.iter_mut().zip(c) {
                *a += b;
            }
        }
        Ok(z)
    }
}

/// Rational self-intersection `Σ₀²` of the class dual to the knot vertex.
pub fn knot_self_pairing(g: &PlumbingGraph) -> Result<Q> {
    let lat = g.lattice()?;
    if !lat.is_negative_definite() {
        return Err(Error::NotNegativeDefinite);
    }
    let e = g.knot_vector()?;
    Ok(lat.dual_pair(&e, &e))
}

/// Seifert framing `Σ² = n − Σ₀²` of the graph framing `n`.
pub fn seifert_framing(g: &PlumbingGraph, n: i64) -> Result<Q> {
    let s = q(n) - knot_self_pairing(g)?;
    if !is_negative_definite(&g.filled(n)?) {
        return Err(Error::NotNegativeDefinite);
    }
    Ok(s)
}

/// Self-pairing of the dual class of the knot vertex in the filled graph.
pub fn cocore_self_pairing(g: &PlumbingGraph, n: i64) -> Result<Q> {
    seifert_framing(g, n)?;
    let filled = g.filled(n)?.lattice()?;
    let c = g.filled_knot_coordinate()?;
    Ok(Q::new(filled.adjugate()[c][c], filled.det()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qf;

    pub(crate) const TREFOIL: &str = "\
# trefoil as a knot in S^3
vertex v0 unweighted
vertex c -1
vertex a -2
vertex b -3
edge v0 c
edge c a
edge c b
";

    fn single(w: i64) -> PlumbingGraph {
        parse_graph(&format!("vertex a {w}\n")).unwrap()
    }

    #[test]
    fn parses_trefoil() {
        let g = parse_graph(TREFOIL).unwrap();
        assert_eq!(g.len(), 4);
        assert_eq!(g.unweighted(), Some(0));
        assert_eq!(g.form(), vec![vec![-1, 1, 1], vec![1, -2, 0], vec![1, 0, -3]]);
        assert_eq!(g.knot_vector().unwrap(), vec![1, 0, 0]);
    }

    #[test]
    fn json_and_text_agree() {
        let g = parse_graph(TREFOIL).unwrap();
        let j = parse_graph(&g.to_json()).unwrap();
        assert_eq!(g, j);
        let raw = r#"{"vertices":[{"id":"v0","weight":null},{"id":"c","weight":-1},{"id":"a","weight":-2},{"id":"b","weight":-3}],"edges":[["v0","c"],["c","a"],["c","b"]]}"#;
        assert_eq!(parse_graph(raw).unwrap(), g);
        assert_eq!(parse_graph(&g.to_text()).unwrap(), g);
    }

    #[test]
    fn parse_errors() {
        let e = parse_graph("vertex a -1\nvertex a -2\n").unwrap_err();
        assert_eq!(e, Error::DuplicateVertex("a".into()));
        let e = parse_graph("vertex a -1\nvertex b -2\nvertex c -2\nedge a b\nedge b c\nedge c a\n").unwrap_err();
        assert!(matches!(e, Error::Cycle(..)));
        let e = parse_graph("vertex a unweighted\nvertex b unweighted\n").unwrap_err();
        assert!(matches!(e, Error::MultipleUnweighted(..)));
        match parse_graph("vertex a -1\n  vertex b x2\n").unwrap_err() {
            Error::Syntax { line, column, .. } => assert_eq!((line, column), (2, 12)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_graph("edge a b\n").unwrap_err(), Error::UnknownVertex(_)));
        assert!(matches!(parse_graph("vertex a -1\nedge a a\n").unwrap_err(), Error::Cycle(..)));
    }

    #[test]
    fn definiteness_small_cases() {
        assert!(is_negative_definite(&single(-1)));
        assert!(!is_negative_definite(&single(0)));
        assert!(!is_negative_definite(&single(1)));
        let g = parse_graph(TREFOIL).unwrap();
        assert!(is_negative_definite(&g.filled(-7).unwrap()));
        assert!(!is_negative_definite(&g.filled(-6).unwrap()));
    }

    #[test]
    fn framings_of_trefoil() {
        let g = parse_graph(TREFOIL).unwrap();
        assert_eq!(knot_self_pairing(&g).unwrap(), q(-6));
        assert_eq!(seifert_framing(&g, -7).unwrap(), q(-1));
        assert_eq!(seifert_framing(&g, -8).unwrap(), q(-2));
        assert_eq!(seifert_framing(&g, -9).unwrap(), q(-3));
        assert_eq!(cocore_self_pairing(&g, -8).unwrap(), qf(-1, 2));
        assert_eq!(cocore_self_pairing(&g, -9).unwrap(), qf(-1, 3));
        assert!(seifert_framing(&g, -6).is_err());
    }

    #[test]
    fn cocore_next_to_minus_two() {
        // v0 -- a(-2); Σ₀² = -1/2, so n = -3/2 is not integral; n = -1 gives Σ² = -1/2,
        // n = -2 gives Σ² = -3/2.
        let g = parse_graph("vertex v0 unweighted\nvertex a -2\nedge v0 a\n").unwrap();
        for n in [-1, -2, -3] {
            let s = seifert_framing(&g, n).unwrap();
            assert_eq!(cocore_self_pairing(&g, n).unwrap() * s, q(1));
        }
    }

    #[test]
    fn minimal_cycles() {
        assert_eq!(single(-2).lattice().unwrap().minimal_cycle().unwrap(), vec![1]);
        let g = parse_graph(TREFOIL).unwrap().filled(-7).unwrap();
        // Lattice order is v0, c, a, b.
        assert_eq!(g.lattice().unwrap().minimal_cycle().unwrap(), vec![1, 6, 3, 2]);
        let two = parse_graph("vertex a -2\nvertex b -3\n").unwrap().lattice().unwrap();
        assert_eq!(two.minimal_cycle().unwrap_err(), Error::NotConnected);
        assert_eq!(two.minimal_cycles().unwrap(), vec![vec![1, 0], vec![0, 1]]);
    }

    /// Smallest effective nonzero class with all pairings nonpositive,
    /// searched over a coefficient box.
    fn brute_minimal_cycle(lat: &Lattice, bound: i64) -> Vec<i64> {
        let n = lat.dim();
        let mut best: Option<Vec<i64>> = None;
        let mut z = vec![0i64; n];
        loop {
            let mut i = 0;
            while i < n && z[i] == bound {
                z[i] = 0;
                i += 1;
            }
            if i == n {
                break;
            }
            z[i] += 1;
            if lat.mul(&z).iter().all(|&p| p <= 0) {
                best = match best {
                    None => Some(z.clone()),
                    Some(b) => {
                        // Minimality: every candidate must dominate the answer.
                        Some(b.iter().zip(&z).map(|(x, y)| *x.min(y)).collect())
                    }
                };
            }
        }
        best.unwrap()
    }

    #[test]
    fn laufer_matches_brute_force() {
        let e8 = "vertex c -2\nvertex a1 -2\nvertex b1 -2\nvertex b2 -2\nvertex d1 -2\nvertex d2 -2\nvertex d3 -2\nvertex d4 -2\n\
edge c a1\nedge c b1\nedge b1 b2\nedge c d1\nedge d1 d2\nedge d2 d3\nedge d3 d4\n";
        let lat = parse_graph(e8).unwrap().lattice().unwrap();
        let z = lat.minimal_cycle().unwrap();
        // Highest root of E8: 6 at the trivalent vertex, 3 on the short leg,
        // 4, 2 on the middle leg and 5, 4, 3, 2 on the long leg.
        assert_eq!(z, vec![6, 3, 4, 2, 5, 4, 3, 2]);
        assert_eq!(brute_minimal_cycle(&lat, 6), z);
        let s237 = parse_graph(TREFOIL).unwrap().filled(-7).unwrap().lattice().unwrap();
        assert_eq!(brute_minimal_cycle(&s237, 7), s237.minimal_cycle().unwrap());
    }

    #[test]
    fn connected_sum_identifies_knot_vertices() {
        let g = parse_graph(TREFOIL).unwrap();
        let s = g.connected_sum(&g).unwrap();
        assert_eq!(s.len(), 7);
        assert_eq!(s.knot_vector().unwrap(), vec![1, 0, 0, 1, 0, 0]);
        assert_eq!(knot_self_pairing(&s).unwrap(), q(-12));
    }

    #[test]
    fn adjugate_inverts() {
        let lat = parse_graph(TREFOIL).unwrap().filled(-7).unwrap().lattice().unwrap();
        assert_eq!(lat.det().abs(), 1);
        let n = lat.dim();
        for i in 0..n {
            let mut e = vec![0; n];
            e[i] = 1;
            let col: Vec<i64> = lat.adjugate().iter().map(|r| r[i]).collect();
            let back = lat.mul(&col);
            let expect: Vec<i64> = e.iter().map(|x| x * lat.det()).collect();
            assert_eq!(back, expect);
        }
    }
}
