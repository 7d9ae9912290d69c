//! The `.rg` graph format and the query grammar.
//!
//! ```text
//! # five nodes, node 1 a common sink of 2 and 3
//! nodes: 5
//! blocks: g1={1}; g2={2}; g3={3}; g4={4}; g5={5}
//! arrow 1 < 2
//! dashed 1 -- 2
//! full 4 - 5
//! ```
//!
//! `nodes:` takes a count `d` (labels `1..=d`) or an explicit set `{2,4,7}`.
//! Without a `blocks:` line the graph is a parent graph in label order.

use crate::error::{Error, Result};
use crate::graph::{BlockStructure, Edge, EdgeKind, NodeId, NodeSet, RegressionGraph};
use crate::independence::IndepQuery;

fn err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, column, message: message.into() }
}

/// A cursor over one line, tracking 1-based columns.
struct Cursor<'a> {
    text: &'a str,
    pos: usize,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str, line: usize, start: usize) -> Self {
        Cursor { text, pos: start, line }
    }

    fn column(&self) -> usize {
        self.text[..self.pos].chars().count() + 1
    }

    fn error(&self, message: impl Into<String>) -> Error {
        err(self.line, self.column(), message)
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.text[self.pos..].chars().next() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos == self.text.len()
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.text[self.pos..].starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<()> {
        if self.eat(token) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{token}`")))
        }
    }

    fn number(&mut self) -> Result<u32> {
        self.skip_ws();
        let digits: String = self.text[self.pos..].chars().take_while(|c| c.is_ascii_digit()).collect();
        if digits.is_empty() {
            return Err(self.error("expected a node label"));
        }
        let n = digits.parse::<u32>().map_err(|_| self.error("node label out of range"))?;
        self.pos += digits.len();
        Ok(n)
    }

    fn word(&mut self) -> String {
        self.skip_ws();
        let w: String = self.text[self.pos..].chars().take_while(|c| c.is_ascii_alphanumeric()).collect();
        self.pos += w.len();
        w
    }

    /// `{1, 2, 3}`, possibly empty.
    fn set(&mut self) -> Result<NodeSet> {
        self.expect("{")?;
        let mut out = NodeSet::new();
        if self.eat("}") {
            return Ok(out);
        }
        loop {
            let col = self.column();
            if !out.insert(NodeId(self.number()?)) {
                return Err(err(self.line, col, "node listed twice"));
            }
            if self.eat("}") {
                return Ok(out);
            }
            self.expect(",")?;
        }
    }
}

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("")
}

/// Parses a `.rg` file and validates the graph.
pub fn parse_graph(text: &str) -> Result<RegressionGraph> {
    let mut nodes: Option<NodeSet> = None;
    let mut blocks: Option<(BlockStructure, usize)> = None;
    let mut edges = Vec::new();

    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let body = strip_comment(raw);
        let mut cur = Cursor::new(body, line, 0);
        if cur.at_end() {
            continue;
        }
        let start = cur.column();
        match cur.word().as_str() {
            "nodes" => {
                if nodes.is_some() {
                    return Err(err(line, start, "second `nodes:` line"));
                }
                cur.expect(":")?;
                cur.skip_ws();
                let set = if body[cur.pos..].starts_with('{') {
                    cur.set()?
                } else {
                    (1..=cur.number()?).map(NodeId).collect()
                };
                nodes = Some(set);
            }
            "blocks" => {
                if nodes.is_none() {
                    return Err(err(line, start, "`blocks:` before `nodes:`"));
                }
                if blocks.is_some() || !edges.is_empty() {
                    return Err(err(line, start, "`blocks:` must come once, before the edges"));
                }
                cur.expect(":")?;
                let mut responses = Vec::new();
                let mut context = None;
                loop {
                    if cur.at_end() {
                        break;
                    }
                    let col = cur.column();
                    let name = cur.word();
                    cur.expect("=")?;
                    let set = cur.set()?;
                    if context.is_some() {
                        return Err(err(line, col, "the context block `v` must come last"));
                    }
                    if name == "v" {
                        context = Some(set);
                    } else if name == format!("g{}", responses.len() + 1) {
                        responses.push(set);
                    } else {
                        return Err(err(line, col, format!("expected `g{}` or `v`", responses.len() + 1)));
                    }
                    if cur.at_end() {
                        break;
                    }
                    cur.expect(";")?;
                }
                blocks = Some((BlockStructure::new(responses, context.unwrap_or_default()), line));
            }
            kw @ ("arrow" | "dashed" | "full") => {
                if nodes.is_none() {
                    return Err(err(line, start, "edge before `nodes:`"));
                }
                let i = cur.number()?;
                let (op, kind) = match kw {
                    "arrow" => ("<", EdgeKind::Arrow),
                    "dashed" => ("--", EdgeKind::Dashed),
                    _ => ("-", EdgeKind::Full),
                };
                cur.expect(op)?;
                let j = cur.number()?;
                if !cur.at_end() {
                    return Err(cur.error("unexpected text after the edge"));
                }
                let (i, j) = (NodeId(i), NodeId(j));
                edges.push(Edge { kind, i, j });
            }
            "" => return Err(err(line, start, "expected a keyword")),
            other => return Err(err(line, start, format!("unknown keyword `{other}`"))),
        }
        if !cur.at_end() {
            return Err(cur.error("unexpected text"));
        }
    }

    let nodes = nodes.ok_or_else(|| err(1, 1, "missing `nodes:` line"))?;
    let blocks = match blocks {
        Some((b, line)) => {
            if b.nodes() != nodes || b.order().len() != nodes.len() {
                return Err(err(line, 1, "blocks must partition the declared nodes"));
            }
            b
        }
        None => BlockStructure::new(nodes.iter().map(|&n| [n].into_iter().collect()).collect(), NodeSet::new()),
    };
    RegressionGraph::new(blocks, edges)
}

fn set_text(s: &NodeSet) -> String {
    let parts: Vec<String> = s.iter().map(|n| n.to_string()).collect();
    format!("{{{}}}", parts.join(","))
}

/// Canonical text: explicit blocks, edges sorted.
pub fn emit_graph(graph: &RegressionGraph) -> String {
    let nodes = graph.nodes();
    let contiguous = nodes.iter().enumerate().all(|(k, n)| n.0 == k as u32 + 1);
    let mut out = if contiguous {
        format!("nodes: {}\n", nodes.len())
    } else {
        format!("nodes: {}\n", set_text(&nodes))
    };
    let b = graph.blocks();
    let mut parts: Vec<String> = b.responses.iter().enumerate().map(|(k, s)| format!("g{}={}", k + 1, set_text(s))).collect();
    parts.push(format!("v={}", set_text(&b.context)));
    out.push_str(&format!("blocks: {}\n", parts.join("; ")));
    for e in graph.edges() {
        let line = match e.kind {
            EdgeKind::Arrow => format!("arrow {} < {}", e.i, e.j),
            EdgeKind::Dashed => format!("dashed {} -- {}", e.i, e.j),
            EdgeKind::Full => format!("full {} - {}", e.i, e.j),
        };
        out.push_str(&line);
        out.push('\n');
    }
    out
}

/// `1,2 _||_ 5 | 3,4`; the conditioning part is optional.
pub fn parse_query(text: &str) -> Result<IndepQuery> {
    let sep = "_||_";
    let at = text.find(sep).ok_or_else(|| err(1, 1, "expected `_||_`"))?;
    let list = |part: &str, offset: usize, allow_empty: bool| -> Result<NodeSet> {
        let mut out = NodeSet::new();
        if part.trim().is_empty() {
            return if allow_empty {
                Ok(out)
            } else {
                Err(err(1, text[..offset].chars().count() + 1, "expected a node list"))
            };
        }
        let mut pos = offset;
        for item in part.split(',') {
            let col = text[..pos].chars().count() + 1 + (item.len() - item.trim_start().len());
            let n = item.trim().parse::<u32>().map_err(|_| err(1, col, format!("`{}` is not a node label", item.trim())))?;
            out.insert(NodeId(n));
            pos += item.len() + 1;
        }
        Ok(out)
    };
    let alpha = list(&text[..at], 0, false)?;
    let rest_start = at + sep.len();
    let rest = &text[rest_start..];
    let (beta, c) = match rest.find('|') {
        Some(bar) => (
            list(&rest[..bar], rest_start, false)?,
            list(&rest[bar + 1..], rest_start + bar + 1, true)?,
        ),
        None => (list(rest, rest_start, false)?, NodeSet::new()),
    };
    IndepQuery::new(alpha, beta, c)
}

/// A comma-separated node list, possibly empty.
pub fn parse_node_list(text: &str) -> Result<NodeSet> {
    let mut out = NodeSet::new();
    let mut pos = 0;
    for item in text.split(',') {
        if !item.trim().is_empty() {
            let col = text[..pos].chars().count() + 1;
            let n = item.trim().parse::<u32>().map_err(|_| err(1, col, format!("`{}` is not a node label", item.trim())))?;
            out.insert(NodeId(n));
        }
        pos += item.len() + 1;
    }
    Ok(out)
}
