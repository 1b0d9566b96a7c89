//! Plain-text and Graphviz serialization of graphs.
//!
//! The text form is line-oriented:
//!
//! ```text
//! states <n>
//! start <s>...
//! final <s>...
//! <src> <dst> <ilabel> <olabel> <weight>
//! ```
//!
//! Label ids follow [`Label`](crate::label::Label). Weights use Rust's
//! shortest round-trip float formatting, so `parse(export(g)) == g`.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::label::{Label, Token};

pub fn to_text(g: &Graph) -> String {
    let mut out = String::new();
    writeln!(out, "states {}", g.num_states()).unwrap();
    write_state_line(&mut out, "start", g.starts());
    write_state_line(&mut out, "final", g.finals());
    for a in g.arcs() {
        writeln!(
            out,
            "{} {} {} {} {}",
            a.src,
            a.dst,
            a.ilabel.id(),
            a.olabel.id(),
            a.weight
        )
        .unwrap();
    }
    out
}

fn write_state_line(out: &mut String, key: &str, states: &[usize]) {
    out.push_str(key);
    for s in states {
        write!(out, " {s}").unwrap();
    }
    out.push('\n');
}

pub fn parse_text(text: &str) -> Result<Graph> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let err = |line: usize, message: String| Error::Parse {
        line: line + 1,
        message,
    };

    let (n, line) = lines
        .next()
        .ok_or_else(|| err(0, "missing `states` header".into()))?;
    let num_states = header(line, "states")
        .and_then(|rest| rest.trim().parse::<usize>().ok())
        .ok_or_else(|| err(n, format!("expected `states <n>`, got {line:?}")))?;

    let mut g = Graph::new();
    for _ in 0..num_states {
        g.add_state(false, false);
    }

    for key in ["start", "final"] {
        let (n, line) = lines
            .next()
            .ok_or_else(|| err(n, format!("missing `{key}` line")))?;
        let rest = header(line, key).ok_or_else(|| err(n, format!("expected `{key}` line")))?;
        for tok in rest.split_whitespace() {
            let s: usize = tok
                .parse()
                .map_err(|_| err(n, format!("bad state id {tok:?}")))?;
            if s >= num_states {
                return Err(err(n, format!("state {s} out of range")));
            }
            if key == "start" {
                g.set_start(s);
            } else {
                g.set_final(s);
            }
        }
    }

    for (n, line) in lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(err(n, format!("expected 5 arc fields, got {}", fields.len())));
        }
        let state = |s: &str| -> Result<usize> {
            let v: usize = s.parse().map_err(|_| err(n, format!("bad state id {s:?}")))?;
            if v >= num_states {
                return Err(err(n, format!("state {v} out of range")));
            }
            Ok(v)
        };
        let label = |s: &str| -> Result<Label> {
            s.parse::<i32>()
                .map(Label::from_id)
                .map_err(|_| err(n, format!("bad label {s:?}")))
        };
        let weight: f64 = fields[4]
            .parse()
            .map_err(|_| err(n, format!("bad weight {:?}", fields[4])))?;
        if !(weight.is_finite() || weight == f64::NEG_INFINITY) {
            return Err(err(n, format!("weight must be finite or -inf, got {weight}")));
        }
        g.add_arc(
            state(fields[0])?,
            state(fields[1])?,
            label(fields[2])?,
            label(fields[3])?,
            weight,
        );
    }
    Ok(g)
}

fn header<'a>(line: &'a str, key: &str) -> Option<&'a str> {
    let rest = line.strip_prefix(key)?;
    (rest.is_empty() || rest.starts_with(char::is_whitespace)).then_some(rest)
}

/// Graphviz rendering with numeric token names.
pub fn to_dot(g: &Graph) -> String {
    to_dot_with(g, &|t| t.to_string())
}

/// Graphviz rendering. Start states are bold, final states are drawn as
/// concentric circles. Acceptor arcs show `label/weight`, transducer arcs
/// `ilabel:olabel/weight`.
pub fn to_dot_with(g: &Graph, name: &dyn Fn(Token) -> String) -> String {
    let mut out = String::new();
    out.push_str("digraph WFST {\n  rankdir = LR;\n  node [shape = circle];\n");
    for s in 0..g.num_states() {
        let mut attrs = Vec::new();
        if g.is_start(s) {
            attrs.push("penwidth = 3");
        }
        if g.is_final(s) {
            attrs.push("shape = doublecircle");
        }
        if attrs.is_empty() {
            writeln!(out, "  {s};").unwrap();
        } else {
            writeln!(out, "  {s} [{}];", attrs.join(", ")).unwrap();
        }
    }
    let acceptor = g.is_acceptor();
    for a in g.arcs() {
        let text = if acceptor {
            format!("{}/{}", a.ilabel.display_with(name), a.weight)
        } else {
            format!(
                "{}:{}/{}",
                a.ilabel.display_with(name),
                a.olabel.display_with(name),
                a.weight
            )
        };
        writeln!(out, "  {} -> {} [label = \"{}\"];", a.src, a.dst, escape(&text)).unwrap();
    }
    out.push_str("}\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}
