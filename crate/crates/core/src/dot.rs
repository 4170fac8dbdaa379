//! Graphviz export.
//!
//! Vertices are labelled `id\njdeg`. Sliced edges carry the pair, with each
//! value also placed at its end. Klt-markings hang off their vertex as
//! dashed stubs labelled `(p/q)`, lc-markings as stubs labelled `*`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::prune::PruneTrace;
use crate::tree::PrunedTree;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

pub fn to_dot(p: &PrunedTree, name: &str) -> String {
    let b = p.base();
    let mut s = String::new();
    writeln!(s, "graph {} {{", quote(name)).unwrap();
    writeln!(s, "  node [shape=circle, fontsize=10];").unwrap();
    for v in 0..p.len() {
        writeln!(s, "  {} [label=\"{}\\n{}\"];", quote(b.id(v)), b.id(v), b.jdeg(v)).unwrap();
    }
    for e in b.edges() {
        let (u, v) = e.endpoints();
        match e.slicing() {
            None => writeln!(s, "  {} -- {};", quote(b.id(u)), quote(b.id(v))).unwrap(),
            Some((x, y)) => writeln!(
                s,
                "  {} -- {} [label=\"({x},{y})\", taillabel=\"{x}\", headlabel=\"{y}\"];",
                quote(b.id(u)),
                quote(b.id(v)),
            )
            .unwrap(),
        }
    }
    for v in 0..p.len() {
        for (k, t) in p.klt(v).iter().enumerate() {
            let stub = quote(&format!("{}#klt{k}", b.id(v)));
            writeln!(s, "  {stub} [shape=none, label=\"({t})\"];").unwrap();
            writeln!(s, "  {} -- {stub} [style=dashed];", quote(b.id(v))).unwrap();
        }
        for k in 0..p.lc(v) {
            let stub = quote(&format!("{}#lc{k}", b.id(v)));
            writeln!(s, "  {stub} [shape=none, label=\"*\"];").unwrap();
            writeln!(s, "  {} -- {stub} [style=dashed];", quote(b.id(v))).unwrap();
        }
    }
    s.push_str("}\n");
    s
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FrameStep {
    PerEvent,
    PerRound,
}

/// DOT text of the input tree followed by one frame per event or round.
pub fn trace_frames(trace: &PruneTrace, step: FrameStep) -> Result<Vec<String>> {
    let trees = match step {
        FrameStep::PerEvent => trace.states()?,
        FrameStep::PerRound => trace.round_frames()?,
    };
    Ok(trees
        .iter()
        .enumerate()
        .map(|(k, t)| to_dot(t, &format!("frame_{k:03}")))
        .collect())
}

/// Writes `frame_000.dot`, `frame_001.dot`, ... into `dir`.
pub fn write_frames(dir: &Path, frames: &[String]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut out = Vec::with_capacity(frames.len());
    for (k, f) in frames.iter().enumerate() {
        let path = dir.join(format!("frame_{k:03}.dot"));
        fs::write(&path, f)?;
        out.push(path);
    }
    Ok(out)
}

pub fn write_tree(dir: &Path, name: &str, p: &PrunedTree) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(format!("{name}.dot"));
    fs::write(&path, to_dot(p, name))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;
    use crate::prune::{prune_with_order, LeafPolicy};
    use crate::tree::SlicedTree;

    fn count(dot: &str, pat: &str) -> usize {
        dot.lines().filter(|l| l.contains(pat)).count()
    }

    #[test]
    fn height6_tree_drawing() {
        let dot = to_dot(&PrunedTree::from(examples::height6_tree()), "ex");
        assert_eq!(count(&dot, "\\n"), 6);
        assert_eq!(count(&dot, " -- "), 5);
        assert_eq!(count(&dot, "taillabel"), 3);
        assert!(dot.contains("\"b\" -- \"c\" [label=\"(1/6,5/6)\""));
        assert!(dot.contains("[label=\"d\\n0\"]"));
    }

    #[test]
    fn single_vertex() {
        let t = SlicedTree::builder().vertex("x", "3").sliced_tree().unwrap();
        let dot = to_dot(&PrunedTree::from(t), "one");
        assert_eq!(count(&dot, "[label="), 1);
        assert_eq!(count(&dot, " -- "), 0);
    }

    #[test]
    fn markings_become_stubs() {
        let dot = to_dot(&examples::height6_tree_pruned(), "p");
        assert!(dot.contains("label=\"(1/6)\""));
        assert!(dot.contains("label=\"*\""));
        assert_eq!(count(&dot, "style=dashed"), 2);
    }

    #[test]
    fn round_frames() {
        let trace = prune_with_order(examples::height4_chain(), &LeafPolicy::Rounds).unwrap();
        assert_eq!(trace_frames(&trace, FrameStep::PerRound).unwrap().len(), 4);
        assert_eq!(trace_frames(&trace, FrameStep::PerEvent).unwrap().len(), 6);
        let dir = tempfile::tempdir().unwrap();
        let frames = trace_frames(&trace, FrameStep::PerRound).unwrap();
        let paths = write_frames(dir.path(), &frames).unwrap();
        assert_eq!(paths[3].file_name().unwrap(), "frame_003.dot");
        assert_eq!(fs::read_to_string(&paths[0]).unwrap(), frames[0]);
    }
}
