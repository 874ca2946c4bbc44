//! DFA exchange text and DOT rendering.
//!
//! Text form: `n=<int>; sigma=<names>; accept=<bitmask>; edges=<q>,<a>-><q'> …`
//! with edges separated by spaces. Omitted transitions are self-loops.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{Alphabet, Dfa, Symbol, TaskError};

fn perr(msg: impl Into<String>) -> TaskError {
    TaskError::Parse(msg.into())
}

impl Dfa {
    pub fn to_text(&self) -> String {
        let edges: Vec<String> =
            self.edges().map(|(q, a, t)| format!("{q},{}->{t}", self.alphabet().name(a))).collect();
        format!(
            "n={}; sigma={}; accept={}; edges={}",
            self.n_states(),
            self.alphabet().names().join(","),
            self.accepting_mask(),
            edges.join(" ")
        )
    }

    /// Parses the exchange text. The numbering is kept as written.
    pub fn parse_text(text: &str) -> Result<Dfa, TaskError> {
        let mut fields: BTreeMap<&str, &str> = BTreeMap::new();
        for part in text.trim().split(';') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let (k, v) = part.split_once('=').ok_or_else(|| perr(format!("expected key=value, got `{part}`")))?;
            if fields.insert(k.trim(), v.trim()).is_some() {
                return Err(perr(format!("duplicate field `{}`", k.trim())));
            }
        }
        let get = |k: &str| fields.get(k).copied().ok_or_else(|| perr(format!("missing `{k}=`")));
        let n: usize = get("n")?.parse().map_err(|_| perr("bad state count"))?;
        let alphabet = Alphabet::new(get("sigma")?.split(',').map(str::trim))?;
        let accept: u64 = get("accept")?.parse().map_err(|_| perr("bad accepting mask"))?;
        if n < 64 && accept >> n != 0 {
            return Err(perr("accepting mask names a missing state"));
        }
        let k = alphabet.len();
        let mut delta: Vec<usize> = (0..n * k).map(|i| i / k).collect();
        let mut set = vec![false; n * k];
        for e in get("edges").unwrap_or("").split_whitespace() {
            let bad = || perr(format!("bad edge `{e}`"));
            let (lhs, to) = e.split_once("->").ok_or_else(bad)?;
            let (from, sym) = lhs.split_once(',').ok_or_else(bad)?;
            let q: usize = from.parse().map_err(|_| bad())?;
            let t: usize = to.parse().map_err(|_| bad())?;
            let a = alphabet.symbol(sym).ok_or_else(bad)? as usize;
            if q >= n || t >= n {
                return Err(bad());
            }
            if std::mem::replace(&mut set[q * k + a], true) {
                return Err(perr(format!("transition {q},{sym} given twice")));
            }
            delta[q * k + a] = t;
        }
        Dfa::new(alphabet, n, delta, accept)
    }

    /// Graphviz rendering. Accepting states are double circles, parallel
    /// edges are merged into one edge labeled by the symbol set, self-loops
    /// are left out.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph dfa {\n  rankdir=LR;\n");
        for q in 0..self.n_states() {
            let shape = if self.is_accepting(q) { "doublecircle" } else { "circle" };
            let style = if q == 0 { ", style=bold" } else { "" };
            let _ = writeln!(out, "  {q} [shape={shape}{style}];");
        }
        let mut grouped: BTreeMap<(usize, usize), Vec<Symbol>> = BTreeMap::new();
        for (q, a, t) in self.edges() {
            grouped.entry((q, t)).or_default().push(a);
        }
        for ((q, t), syms) in grouped {
            let label: Vec<&str> = syms.iter().map(|&a| self.alphabet().name(a)).collect();
            let _ = writeln!(out, "  {q} -> {t} [label=\"{}\"];", label.join(","));
        }
        out.push_str("}\n");
        out
    }
}
