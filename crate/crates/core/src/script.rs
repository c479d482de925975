//! Declarative pipelines of knot-family operations, read from TOML.
//!
//! A script is a list of `[[step]]` tables. Each step has an `op` and
//! optionally a `name` under which its result is stored and an `input`
//! naming an earlier result; by default a step consumes the previous result.
//!
//! ```toml
//! [[step]]
//! op = "line"
//! p = [2, 3]
//! name = "x"
//!
//! [[step]]
//! op = "surgery"
//! seifert = "-2"
//! ```
//!
//! Ops: `unknot`, `line` (`p`), `surgery` (`framing` or `seifert`, optional
//! `slack`), `tensor` (`inputs`), `restrict` (`labels`) and `report`.

use std::collections::BTreeMap;

use serde::Deserialize;

use crate::rational::{fmt, parse, q, Q};
use crate::surgery::{xki, ClassSummary, KnotFamily};
use crate::{Error, Result};

#[derive(Clone, Debug, Deserialize, PartialEq, Eq)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum Op {
    Unknot,
    Line { p: Vec<i64> },
    Surgery { framing: Option<i64>, seifert: Option<String>, slack: Option<i64> },
    Tensor { inputs: Vec<String> },
    Restrict { labels: Vec<String> },
    Report,
}

#[derive(Clone, Debug, Deserialize, PartialEq, Eq)]
pub struct Step {
    pub name: Option<String>,
    pub input: Option<String>,
    #[serde(flatten)]
    pub op: Op,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq, Eq)]
pub struct Script {
    #[serde(default)]
    pub step: Vec<Step>,
}

/// Parses a TOML script.
pub fn parse_script(text: &str) -> Result<Script> {
    toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((0, 0), |r| line_col(text, r.start));
        Error::Syntax { line, column, message: e.message().to_string() }
    })
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

/// Invariants of a family at a `report` step.
#[derive(Clone, Debug)]
pub struct Report {
    pub step: usize,
    pub sigma0_sq: Q,
    pub classes: Vec<ClassSummary>,
}

impl Report {
    /// Largest top Alexander grading over all classes, and the total rank
    /// there.
    pub fn genus(&self) -> Option<(Q, usize)> {
        let g = self.classes.iter().filter_map(|c| c.top.map(|t| t.0)).max()?;
        let r = self.classes.iter().filter_map(|c| c.top).filter(|t| t.0 == g).map(|t| t.1).sum();
        Some((g, r))
    }

    pub fn to_text(&self) -> String {
        let n = self.classes.len();
        let mut s = format!(
            "report (step {}): {} Spin^c structure{}, Sigma0^2 = {}\n",
            self.step,
            n,
            if n == 1 { "" } else { "s" },
            fmt(&self.sigma0_sq)
        );
        s.push_str("label\tcells\td\talexander_min\talexander_max\n");
        let opt = |x: Option<&Q>| x.map_or("-".to_string(), fmt);
        for c in &self.classes {
            s.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                c.label,
                c.cells,
                opt(c.d.as_ref()),
                opt(c.alexander.as_ref().map(|a| &a.0)),
                opt(c.alexander.as_ref().map(|a| &a.1)),
            ));
        }
        if let Some((g, r)) = self.genus() {
            s.push_str(&format!("genus {}, top rank {}\n", fmt(&g), r));
        }
        s
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "step": self.step,
            "sigma0_sq": fmt(&self.sigma0_sq),
            "genus": self.genus().map(|g| fmt(&g.0)),
            "top_rank": self.genus().map(|g| g.1),
            "classes": self.classes.iter().map(ClassSummary::to_json).collect::<Vec<_>>(),
        })
    }
}

/// Outcome of a script: the last result, every report, and one log line per
/// step.
#[derive(Clone, Debug)]
pub struct Run {
    pub result: Option<KnotFamily>,
    pub reports: Vec<Report>,
    pub log: Vec<String>,
}

/// Runs a script. `input` is the result before the first step.
pub fn run(script: &Script, input: Option<KnotFamily>) -> Result<Run> {
    let mut registers: BTreeMap<String, KnotFamily> = BTreeMap::new();
    let mut current = input;
    let mut reports = vec![];
    let mut log = vec![];
    for (i, step) in script.step.iter().enumerate() {
        let idx = i + 1;
        let fetch = |name: &Option<String>, current: &Option<KnotFamily>| -> Result<KnotFamily> {
            match name {
                Some(n) => registers
                    .get(n)
                    .cloned()
                    .ok_or_else(|| Error::Invalid(format!("step {idx}: no result named `{n}`"))),
                None => current.clone().ok_or_else(|| Error::Invalid(format!("step {idx}: no input"))),
            }
        };
        let out = match &step.op {
            Op::Unknot => {
                log.push(format!("step {idx}: unknot"));
                KnotFamily::unknot()
            }
            Op::Line { p } => {
                let f = KnotFamily::brieskorn(p)?;
                log.push(format!("step {idx}: regular fiber of Sigma{:?}, Sigma0^2 = {}", p, fmt(&f.sigma0_sq)));
                f
            }
            Op::Surgery { framing, seifert, slack } => {
                let f = fetch(&step.input, &current)?;
                let s = seifert_of(&f, *framing, seifert.as_deref(), idx)?;
                let out = xki(&f, s, slack.unwrap_or(1))?;
                log.push(format!(
                    "step {idx}: surgery, Sigma0^2 = {}, Seifert framing {}, {} class{}",
                    fmt(&f.sigma0_sq),
                    fmt(&s),
                    out.family.len(),
                    if out.family.len() == 1 { "" } else { "es" }
                ));
                out.family
            }
            Op::Tensor { inputs } => {
                if inputs.is_empty() {
                    return Err(Error::Invalid(format!("step {idx}: tensor needs at least one input")));
                }
                let mut acc = fetch(&Some(inputs[0].clone()), &current)?;
                for name in &inputs[1..] {
                    acc = KnotFamily::tensor(&acc, &fetch(&Some(name.clone()), &current)?);
                }
                log.push(format!("step {idx}: tensor of {}, {} Spin^c structures", inputs.join(", "), acc.len()));
                acc
            }
            Op::Restrict { labels } => {
                let f = fetch(&step.input, &current)?.restrict(labels)?;
                log.push(format!("step {idx}: restrict to {}", labels.join(" ")));
                f
            }
            Op::Report => {
                let f = fetch(&step.input, &current)?;
                reports.push(Report { step: idx, sigma0_sq: f.sigma0_sq, classes: f.summaries() });
                log.push(format!("step {idx}: report"));
                f
            }
        };
        if let Some(n) = &step.name {
            registers.insert(n.clone(), out.clone());
        }
        current = Some(out);
    }
    Ok(Run { result: current, reports, log })
}

/// Seifert framing from either a graph framing `n` (giving `n − Σ₀²`) or an
/// explicit rational; when both are given they must agree.
fn seifert_of(f: &KnotFamily, framing: Option<i64>, seifert: Option<&str>, idx: usize) -> Result<Q> {
    let from_graph = framing.map(|n| q(n) - f.sigma0_sq);
    let explicit = seifert.map(parse).transpose()?;
    match (from_graph, explicit) {
        (Some(a), Some(b)) if a != b => Err(Error::Invalid(format!(
            "step {idx}: graph framing gives Seifert framing {}, not {}",
            fmt(&a),
            fmt(&b)
        ))),
        (Some(a), _) | (None, Some(a)) => Ok(a),
        (None, None) => Err(Error::Invalid(format!("step {idx}: surgery needs `framing` or `seifert`"))),
    }
}
