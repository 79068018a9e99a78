//! Canonical model-file rendering. Parsing the output yields an equal model.

use std::fmt::Write;

use crate::action::fmt_encap_set;
use crate::dsl::SupervisorMode;
use crate::effect::EffectDesc;
use crate::formula::Formula;
use crate::model::Model;

pub fn print_model(m: &Model) -> String {
    let mut out = String::new();
    let mut i = 0;
    while i < m.channels.len() {
        let class = m.channels[i].class;
        let mut names = Vec::new();
        while i < m.channels.len() && m.channels[i].class == class {
            names.push(m.channels[i].name.to_string());
            i += 1;
        }
        let _ = writeln!(out, "{class} {}", names.join(", "));
    }
    if !m.data.is_empty() {
        let names: Vec<&str> = m.data.iter().map(|d| &**d).collect();
        let _ = writeln!(out, "data {}", names.join(", "));
    }
    for (g, members) in &m.groups {
        let names: Vec<&str> = members.iter().map(|s| &**s).collect();
        let _ = writeln!(out, "group {g} = {{{}}}", names.join(", "));
    }
    for (n, t) in &m.defs {
        let _ = writeln!(out, "def {n} = {t}");
    }
    for (n, t) in &m.plants {
        let _ = writeln!(out, "plant {n} = {t}");
    }
    for (n, s) in &m.supervisors {
        let mode = match s.mode {
            SupervisorMode::Event => "event",
            SupervisorMode::State => "state",
        };
        let _ = writeln!(out, "supervisor {mode} {n} = {}", s.term);
    }
    for (n, e) in &m.encapsulations {
        let _ = writeln!(out, "encap {n} = {}", fmt_encap_set(e));
    }
    for (n, r) in &m.renamings {
        if !r.map.is_empty() {
            let _ = writeln!(out, "rename {n}: {r}");
        }
    }
    for (p, d) in &m.effect.rules {
        let _ = writeln!(out, "effect {p}: {d}");
    }
    if m.effect.default != EffectDesc::Any {
        let _ = writeln!(out, "effect default: {}", m.effect.default);
    }
    if m.init != Formula::True {
        let _ = writeln!(out, "init {}", m.init);
    }
    for r in &m.requirements {
        match &r.name {
            Some(n) => {
                let _ = writeln!(out, "req {n}: {}", r.requirement);
            }
            None => {
                let _ = writeln!(out, "req: {}", r.requirement);
            }
        }
    }
    out
}
