use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use knotlattice::homology::{assoc_graded_homology, betti, d_invariant};
use knotlattice::plumbing::{determinant, is_negative_definite, knot_self_pairing, parse_graph, PlumbingGraph};
use knotlattice::rational::{fmt, is_int, parse, q};
use knotlattice::reduction::{ar_line, CertifiedModel, Tau};
use knotlattice::script::{parse_script, run, Report};
use knotlattice::surgery::{graph_surgery, verify_surgery, ClassSummary, KnotFamily};
use knotlattice::{Error, Result, Q};

/// Lattice homology and knot lattice homology of negative-definite plumbings.
#[derive(Parser)]
#[command(name = "knotlattice", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Tsv,
}

#[derive(Subcommand)]
enum Cmd {
    /// Validate a graph: vertex count, negative definiteness, determinant, Spin^c count.
    Check { graph: PathBuf },
    /// Lattice homology of the weighted part of a graph, per Spin^c structure.
    Lattice {
        graph: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Write one complex dump per Spin^c structure here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Knot lattice homology of the knot given by the unweighted vertex.
    Knotlattice {
        graph: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tau function and line heights of a Brieskorn sphere, as TSV.
    Tau {
        #[arg(required = true, num_args = 2..)]
        p: Vec<i64>,
        /// Last index (default: the end of the line's support).
        #[arg(long)]
        n: Option<i64>,
    },
    /// Filtered line model of the regular fiber of a Brieskorn sphere.
    Line {
        #[arg(required = true, num_args = 2..)]
        p: Vec<i64>,
        /// Keep only joint local extrema.
        #[arg(long)]
        simplify: bool,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Negative surgery on the knot of a graph, by the chain-level surgery formula.
    Surgery {
        #[arg(long)]
        graph: PathBuf,
        /// Graph framing, the weight given to the knot vertex.
        #[arg(long, allow_hyphen_values = true)]
        framing: Option<i64>,
        /// Seifert framing `p/q`; must correspond to an integral graph framing.
        #[arg(long, allow_hyphen_values = true)]
        seifert: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also build the filled graph directly and compare.
        #[arg(long)]
        verify: bool,
        /// Skip enlarging boxes to be closed under conjugation.
        #[arg(long)]
        no_closure: bool,
    },
    /// d-invariants, Alexander ranges and genus of a knot.
    Invariants {
        /// Knot given by a graph file.
        #[arg(long, conflicts_with = "p")]
        graph: Option<PathBuf>,
        /// Regular fiber of the Brieskorn sphere with these multiplicities.
        #[arg(long, num_args = 2..)]
        p: Option<Vec<i64>>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Run a TOML pipeline of surgeries, connected sums and reports.
    Iterate {
        script: PathBuf,
        /// Initial input: regular fiber of a Brieskorn sphere.
        #[arg(long, num_args = 2..)]
        p: Option<Vec<i64>>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match dispatch(cli.cmd) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input() { 2 } else { 1 })
        }
    }
}

fn dispatch(cmd: Cmd) -> Result<String> {
    match cmd {
        Cmd::Check { graph } => check(&read_graph(&graph)?),
        Cmd::Lattice { graph, format, out } => lattice(&read_graph(&graph)?, format, out.as_deref()),
        Cmd::Knotlattice { graph, format, out } => knot_lattice(&read_graph(&graph)?, format, out.as_deref()),
        Cmd::Tau { p, n } => tau(&p, n),
        Cmd::Line { p, simplify, format } => line(&p, simplify, format),
        Cmd::Surgery { graph, framing, seifert, out, verify, no_closure } => {
            surgery(&read_graph(&graph)?, framing, seifert.as_deref(), out.as_deref(), verify, !no_closure)
        }
        Cmd::Invariants { graph, p, format } => invariants(graph.as_deref(), p.as_deref(), format),
        Cmd::Iterate { script, p, format } => iterate(&script, p.as_deref(), format),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Invalid(format!("cannot read {}: {e}", path.display())))
}

fn read_graph(path: &Path) -> Result<PlumbingGraph> {
    parse_graph(&read(path)?)
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Invalid(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Error::Invalid(format!("cannot write {}: {e}", path.display())))
}

fn json(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("json") + "\n"
}

fn vec_str(v: &[i64]) -> String {
    format!("[{}]", v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", "))
}

fn check(g: &PlumbingGraph) -> Result<String> {
    let core = g.core_indices();
    let form = g.form();
    let det = determinant(&form).abs();
    let negdef = is_negative_definite(g);
    let mut s = format!(
        "{} vertices, forest, {} (core), det(core)={}, {} Spin^c\n",
        g.len(),
        if negdef { "neg-def" } else { "not neg-def" },
        det,
        det
    );
    if !negdef {
        return Err(Error::Invalid(format!("{}intersection form is not negative definite", s)));
    }
    if !core.is_empty() {
        let zmin = g.lattice()?.total_minimal_cycle()?;
        s.push_str(&format!("Z_min = {}\n", vec_str(&zmin)));
    }
    if g.unweighted().is_some() {
        s.push_str(&format!("knot self-pairing {}\n", fmt(&knot_self_pairing(g)?)));
    }
    Ok(s)
}

fn lattice(g: &PlumbingGraph, format: Format, out: Option<&Path>) -> Result<String> {
    let model = CertifiedModel::lattice(g)?;
    let mut rows = vec![];
    for (i, x) in model.complexes.iter().enumerate() {
        let d = d_invariant(&x.complex)?;
        let b = betti(&x.complex);
        if let Some(dir) = out {
            write(dir, &format!("spinc_{i}.json"), &json(&x.to_json()))?;
        }
        rows.push((i, vec_str(&model.reps[i]), x.len(), d, b.iter().sum::<usize>()));
    }
    Ok(match format {
        Format::Json => json(&serde_json::Value::Array(
            rows.iter()
                .map(|(i, k, c, d, r)| serde_json::json!({"spinc": i, "rep": k, "cells": c, "d": fmt(d), "rank": r}))
                .collect(),
        )),
        _ => {
            let mut s = String::from("spinc\trep\tcells\td\trank\n");
            for (i, k, c, d, r) in rows {
                s.push_str(&format!("{i}\t{k}\t{c}\t{}\t{r}\n", fmt(&d)));
            }
            s
        }
    })
}

fn summaries_report(sigma0_sq: Q, classes: Vec<ClassSummary>, format: Format) -> String {
    let r = Report { step: 0, sigma0_sq, classes };
    match format {
        Format::Json => json(&r.to_json()),
        Format::Tsv => {
            let mut s = String::from("label\tmaslov\talexander\trank\n");
            for c in &r.classes {
                for ((m, a), n) in &c.ranks.table {
                    s.push_str(&format!("{}\t{}\t{}\t{}\n", c.label, fmt(m), fmt(a), n));
                }
            }
            s
        }
        Format::Text => r.to_text().split_once('\n').map_or(String::new(), |x| x.1.to_string()),
    }
}

fn knot_lattice(g: &PlumbingGraph, format: Format, out: Option<&Path>) -> Result<String> {
    let model = CertifiedModel::knot(g)?;
    let mut classes = vec![];
    for (i, x) in model.complexes.iter().enumerate() {
        let sum = ClassSummary::of(&i.to_string(), &x.complex);
        if let Some(dir) = out {
            write(dir, &format!("spinc_{i}.json"), &json(&x.to_json()))?;
            write(dir, &format!("ranks_{i}.tsv"), &sum.ranks.to_tsv())?;
        }
        classes.push(sum);
    }
    Ok(summaries_report(knot_self_pairing(g)?, classes, format))
}

fn tau(p: &[i64], n: Option<i64>) -> Result<String> {
    let (line, transcript) = ar_line(p)?;
    eprintln!("{transcript}");
    let t = Tau::uncalibrated(p)?;
    let top = line.h1[0];
    let last = n.unwrap_or_else(|| line.hi());
    if last < 0 {
        return Err(Error::Invalid("--n must be nonnegative".into()));
    }
    let mut s = String::from("n\ttau\th1\th2\n");
    for k in 0..=last {
        let h1 = top - q(2 * t.eval(k));
        let h2 = top - q(2 * t.eval(k - t.alpha));
        s.push_str(&format!("{k}\t{}\t{}\t{}\n", t.eval(k), fmt(&h1), fmt(&h2)));
    }
    Ok(s)
}

fn line(p: &[i64], simplify: bool, format: Format) -> Result<String> {
    let (mut l, transcript) = ar_line(p)?;
    if simplify {
        let (s, ok) = l.simplify();
        if !ok {
            return Err(Error::Computation("line has a step moving the heights in opposite directions".into()));
        }
        l = s;
    }
    Ok(match format {
        Format::Json => {
            let mut v = serde_json::to_value(&l).expect("line");
            v["calibration"] = transcript.into();
            json(&v)
        }
        _ => l.to_tsv(),
    })
}

fn surgery(
    g: &PlumbingGraph,
    framing: Option<i64>,
    seifert: Option<&str>,
    out: Option<&Path>,
    verify: bool,
    closed: bool,
) -> Result<String> {
    let s0 = knot_self_pairing(g)?;
    let n = match (framing, seifert.map(parse).transpose()?) {
        (Some(n), Some(s)) if q(n) - s0 != s => {
            return Err(Error::Invalid(format!(
                "graph framing {n} is Seifert framing {}, not {}",
                fmt(&(q(n) - s0)),
                fmt(&s)
            )))
        }
        (Some(n), _) => n,
        (None, Some(s)) => {
            let n = s + s0;
            if !is_int(&n) {
                return Err(Error::Invalid(format!("Seifert framing {} is not a graph framing", fmt(&s))));
            }
            *n.numer()
        }
        (None, None) => return Err(Error::Invalid("give --framing or --seifert".into())),
    };
    let gs = graph_surgery(g, n, closed)?;
    let mut s = format!("graph framing {n}, Seifert framing {}, {} Spin^c\n", fmt(&gs.sigma_sq), gs.classes.len());
    s.push_str("class\tlabel\tcells\td\n");
    let mut dtable = String::from("class\tlabel\td\n");
    for (i, cl) in gs.classes.iter().enumerate() {
        let x = &cl.assembled.complex;
        let d = d_invariant(&x.p1())?;
        s.push_str(&format!("{i}\t{}\t{}\t{}\n", cl.label, x.len(), fmt(&d)));
        dtable.push_str(&format!("{i}\t{}\t{}\n", cl.label, fmt(&d)));
        if let Some(dir) = out {
            let mut v = x.to_json();
            v["label"] = cl.label.clone().into();
            write(dir, &format!("class_{i}.json"), &json(&v))?;
            write(dir, &format!("ranks_{i}.tsv"), &assoc_graded_homology(x).to_tsv())?;
        }
    }
    if let Some(dir) = out {
        write(dir, "d.tsv", &dtable)?;
    }
    if verify {
        let report = verify_surgery(g, n)?;
        let text = report.to_text();
        if let Some(dir) = out {
            write(dir, "verify.txt", &text)?;
        }
        s.push_str(&text);
        if !report.passed {
            print!("{s}");
            return Err(Error::Computation("surgery verification failed".into()));
        }
    }
    Ok(s)
}

fn invariants(graph: Option<&Path>, p: Option<&[i64]>, format: Format) -> Result<String> {
    if let Some(path) = graph {
        return knot_lattice(&read_graph(path)?, format, None);
    }
    let p = p.ok_or_else(|| Error::Invalid("give --graph or --p".into()))?;
    let f = KnotFamily::brieskorn(p)?;
    Ok(summaries_report(f.sigma0_sq, f.summaries(), format))
}

fn iterate(path: &Path, p: Option<&[i64]>, format: Format) -> Result<String> {
    let script = parse_script(&read(path)?)?;
    let input = p.map(KnotFamily::brieskorn).transpose()?;
    let result = run(&script, input)?;
    for l in &result.log {
        log::info!("{l}");
    }
    Ok(match format {
        Format::Json => json(&serde_json::json!({
            "log": result.log,
            "reports": result.reports.iter().map(Report::to_json).collect::<Vec<_>>(),
        })),
        _ => {
            let mut s = String::new();
            for l in &result.log {
                s.push_str(l);
                s.push('\n');
            }
            for r in &result.reports {
                s.push('\n');
                s.push_str(&r.to_text());
            }
            s
        }
    })
}
