//! Prints the CTC, selfless-CTC and STC label graphs for a label in the
//! text format and writes DOT files next to the working directory.
//!
//! Usage: cargo run --example inspect_graphs -- [label] [out_dir]

use std::fs;

use stc::label::{letter_name, parse_token};
use stc::loss::{CtcLabelGraph, StcLabelGraph};
use stc::text::{to_dot_with, to_text};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let label: Vec<u32> = args
        .get(1)
        .map_or("c a t", String::as_str)
        .split_whitespace()
        .map(|s| parse_token(s).expect("token"))
        .collect();
    let out_dir = args.get(2).cloned();

    let graphs = [
        ("ctc", CtcLabelGraph::build(&label).unwrap().into_graph()),
        ("selfless", CtcLabelGraph::build_selfless(&label).unwrap().into_graph()),
        ("stc", StcLabelGraph::build(&label, 0.5f64.ln()).unwrap().into_graph()),
    ];
    for (name, g) in &graphs {
        println!("# {name}: {} states, {} arcs\n{}", g.num_states(), g.num_arcs(), to_text(g));
        if let Some(dir) = &out_dir {
            fs::create_dir_all(dir).unwrap();
            fs::write(format!("{dir}/{name}.dot"), to_dot_with(g, &letter_name)).unwrap();
        }
    }
}
