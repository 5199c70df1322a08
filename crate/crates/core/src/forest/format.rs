//! Line-oriented text format for trained forests.
//!
//! ```text
//! assignforest forest v1
//! params trees=<M> mtry=<m> subsample=<a> nodesize=<s> replacement=<bool> search=<mode> rule=<rule> seed=<u64> features=<p> rows=<n>
//! tree <k> nodes=<count> evaluations=<count>
//! bag <row> <row> ...
//! node <id> internal <feature> <position> <left> <right> <missing_left> <missing_right> <n_rows> <mean> <gain>
//! node <id> leaf <mean> <row> <row> ...
//! end
//! ```
//!
//! Features and rows are 0-based. Reals use the shortest text that parses
//! back to the same value; `inf` marks the observed-versus-missing cut.

use std::io::{BufRead, Write};

use super::{Forest, ForestParams, Tree, TreeNode};
use crate::error::{Error, Result};
use crate::split::Cut;
use crate::Scalar;

pub const FORMAT_HEADER: &str = "assignforest forest v1";

pub fn write_forest<T: Scalar, W: Write>(forest: &Forest<T>, mut out: W) -> Result<()> {
    let p = &forest.params;
    writeln!(out, "{FORMAT_HEADER}")?;
    writeln!(
        out,
        "params trees={} mtry={} subsample={} nodesize={} replacement={} search={} rule={} seed={} features={} rows={}",
        p.n_trees, p.mtry, p.subsample, p.nodesize, p.replacement, p.search_mode, p.split_rule, p.seed,
        forest.n_features, forest.n_train
    )?;
    for (k, tree) in forest.trees.iter().enumerate() {
        writeln!(out, "tree {k} nodes={} evaluations={}", tree.nodes.len(), tree.cart_evaluations)?;
        write!(out, "bag")?;
        for i in &tree.bag {
            write!(out, " {i}")?;
        }
        writeln!(out)?;
        for (id, node) in tree.nodes.iter().enumerate() {
            match node {
                TreeNode::Internal { cut, left, right, missing_left, missing_right, n_rows, mean, gain } => writeln!(
                    out,
                    "node {id} internal {} {} {left} {right} {missing_left} {missing_right} {n_rows} {mean} {gain}",
                    cut.feature, cut.position
                )?,
                TreeNode::Leaf { mean, rows } => {
                    write!(out, "node {id} leaf {mean}")?;
                    for i in rows {
                        write!(out, " {i}")?;
                    }
                    writeln!(out)?;
                }
            }
        }
    }
    writeln!(out, "end")?;
    out.flush()?;
    Ok(())
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    line: usize,
}

impl<R: BufRead> Lines<R> {
    fn next_line(&mut self) -> Result<String> {
        self.line += 1;
        match self.inner.next() {
            Some(l) => Ok(l?),
            None => Err(self.err("unexpected end of file")),
        }
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse { line: self.line, message: message.into() }
    }

    fn num<V: std::str::FromStr>(&self, text: &str, what: &str) -> Result<V> {
        text.parse().map_err(|_| self.err(format!("bad {what} '{text}'")))
    }

    fn field<V: std::str::FromStr>(&self, token: Option<&str>, key: &str) -> Result<V> {
        let token = token.ok_or_else(|| self.err(format!("missing '{key}='")))?;
        let value = token
            .strip_prefix(key)
            .and_then(|t| t.strip_prefix('='))
            .ok_or_else(|| self.err(format!("expected '{key}=', found '{token}'")))?;
        self.num(value, key)
    }
}

pub fn read_forest<T: Scalar, R: BufRead>(reader: R) -> Result<Forest<T>> {
    let mut lines = Lines { inner: reader.lines(), line: 0 };
    let header = lines.next_line()?;
    if header.trim() != FORMAT_HEADER {
        return Err(lines.err(format!("expected header '{FORMAT_HEADER}'")));
    }

    let params_line = lines.next_line()?;
    let mut tok = params_line.split_whitespace();
    if tok.next() != Some("params") {
        return Err(lines.err("expected 'params' line"));
    }
    let n_trees: usize = lines.field(tok.next(), "trees")?;
    let mtry = lines.field(tok.next(), "mtry")?;
    let subsample = lines.field(tok.next(), "subsample")?;
    let nodesize = lines.field(tok.next(), "nodesize")?;
    let replacement = lines.field(tok.next(), "replacement")?;
    let search_mode = lines.field(tok.next(), "search")?;
    let split_rule = lines.field(tok.next(), "rule")?;
    let seed = lines.field(tok.next(), "seed")?;
    let n_features: usize = lines.field(tok.next(), "features")?;
    let n_train: usize = lines.field(tok.next(), "rows")?;
    let params = ForestParams { n_trees, mtry, subsample, nodesize, replacement, search_mode, split_rule, seed };

    let mut trees = Vec::with_capacity(n_trees);
    for k in 0..n_trees {
        let tree_line = lines.next_line()?;
        let mut tok = tree_line.split_whitespace();
        if tok.next() != Some("tree") {
            return Err(lines.err("expected 'tree' line"));
        }
        let index: usize = lines.num(tok.next().unwrap_or(""), "tree index")?;
        if index != k {
            return Err(lines.err(format!("expected tree {k}, found {index}")));
        }
        let n_nodes: usize = lines.field(tok.next(), "nodes")?;
        let cart_evaluations = lines.field(tok.next(), "evaluations")?;
        if n_nodes == 0 {
            return Err(lines.err("a tree needs at least one node"));
        }

        let bag_line = lines.next_line()?;
        let mut tok = bag_line.split_whitespace();
        if tok.next() != Some("bag") {
            return Err(lines.err("expected 'bag' line"));
        }
        let bag = tok
            .map(|t| lines.num::<usize>(t, "row index"))
            .collect::<Result<Vec<_>>>()?;
        if bag.iter().any(|&i| i >= n_train) {
            return Err(lines.err("bag row out of range"));
        }

        let mut nodes = Vec::with_capacity(n_nodes);
        for id in 0..n_nodes {
            let node_line = lines.next_line()?;
            let t: Vec<&str> = node_line.split_whitespace().collect();
            if t.len() < 3 || t[0] != "node" {
                return Err(lines.err("expected 'node' line"));
            }
            let node_id: usize = lines.num(t[1], "node id")?;
            if node_id != id {
                return Err(lines.err(format!("expected node {id}, found {node_id}")));
            }
            let node = match t[2] {
                "internal" => {
                    if t.len() != 12 {
                        return Err(lines.err("internal node needs 9 fields"));
                    }
                    let feature: usize = lines.num(t[3], "feature")?;
                    let left: usize = lines.num(t[5], "child")?;
                    let right: usize = lines.num(t[6], "child")?;
                    if feature >= n_features {
                        return Err(lines.err("feature out of range"));
                    }
                    if left <= id || right <= id || left >= n_nodes || right >= n_nodes {
                        return Err(lines.err("child reference out of range"));
                    }
                    TreeNode::Internal {
                        cut: Cut { feature, position: lines.num(t[4], "position")? },
                        left,
                        right,
                        missing_left: lines.num(t[7], "count")?,
                        missing_right: lines.num(t[8], "count")?,
                        n_rows: lines.num(t[9], "count")?,
                        mean: lines.num(t[10], "mean")?,
                        gain: lines.num(t[11], "gain")?,
                    }
                }
                "leaf" => {
                    if t.len() < 4 {
                        return Err(lines.err("leaf needs a mean"));
                    }
                    let rows = t[4..]
                        .iter()
                        .map(|s| lines.num::<usize>(s, "row index"))
                        .collect::<Result<Vec<_>>>()?;
                    TreeNode::Leaf { mean: lines.num(t[3], "mean")?, rows }
                }
                other => return Err(lines.err(format!("unknown node kind '{other}'"))),
            };
            nodes.push(node);
        }
        trees.push(Tree { nodes, bag, cart_evaluations });
    }
    let end = lines.next_line()?;
    if end.trim() != "end" {
        return Err(lines.err("expected 'end'"));
    }
    Ok(Forest { trees, params, n_features, n_train })
}

impl<T: Scalar> Forest<T> {
    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        write_forest(self, std::io::BufWriter::new(file))
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        read_forest(std::io::BufReader::new(file))
    }
}
