//! Graphviz rendering of a game.

use alloc::format;
use alloc::string::String;

use core::fmt::Write;

use super::{EnvChoice, GameGraph, GameNode};

impl GameGraph {
    /// DOT text: boxes for resolver states, ellipses for environment
    /// states; edges carry weights, probabilities or option labels.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph game {\n  node [fontsize=10];\n");
        for (s, node) in self.nodes.iter().enumerate() {
            let desc = match &self.program {
                Some(p) => p.describe(s as u32),
                None => format!("s{s}"),
            };
            match node {
                GameNode::Thread(t) => {
                    let obs = &self.observations[t.obs as usize].name;
                    let _ = writeln!(out, "  s{s} [shape=box,label=\"s{s} [{obs}]\\n{desc}\"];");
                    for (a, m) in t.moves.iter().enumerate() {
                        if let Some(m) = m {
                            let name = &self.observations[t.obs as usize].actions[a].name;
                            let _ = writeln!(
                                out,
                                "  s{s} -> s{} [label=\"{name} / {}\"];",
                                m.target, m.weight
                            );
                        }
                    }
                }
                GameNode::Env(e) => {
                    let mut flags = String::new();
                    if e.bad {
                        flags.push_str(" bad");
                    }
                    if let EnvChoice::Schedule { terminal: true, .. } = e.choice {
                        flags.push_str(" terminal");
                    }
                    let _ = writeln!(
                        out,
                        "  s{s} [shape=ellipse,label=\"s{s}{flags}\\n{desc}\"];"
                    );
                    match &e.choice {
                        EnvChoice::Explicit(actions) => {
                            for (a, bs) in actions.iter().enumerate() {
                                for b in bs {
                                    let _ = writeln!(
                                        out,
                                        "  s{s} -> s{} [label=\"a{a} p={} / {}\"];",
                                        b.target, b.prob, b.weight
                                    );
                                }
                            }
                        }
                        EnvChoice::Schedule { slots, .. } => {
                            for slot in slots {
                                let name = &self.thread_names[slot.thread as usize];
                                for (input, target) in &slot.options {
                                    let _ = writeln!(
                                        out,
                                        "  s{s} -> s{target} [label=\"{name} in{input}\"];"
                                    );
                                }
                            }
                        }
                    }
                }
            }
        }
        out.push_str("}\n");
        out
    }
}
