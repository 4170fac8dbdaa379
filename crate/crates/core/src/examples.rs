//! Worked trees used throughout the tests, the benches and the README.

use crate::tree::{PrunedTree, SlicedTree};

/// Height-6 tree on `a, b, c, d, f, h` with three sliced edges.
pub fn height6_tree() -> SlicedTree {
    SlicedTree::builder()
        .vertex("a", "1")
        .vertex("b", "4/3")
        .vertex("c", "1/6")
        .vertex("d", "0")
        .vertex("f", "2")
        .vertex("h", "3/2")
        .edge("a", "b")
        .sliced("b", "c", "1/6", "5/6")
        .sliced("b", "d", "1/2", "1/2")
        .edge("d", "f")
        .sliced("d", "h", "1/2", "1/2")
        .sliced_tree()
        .expect("fixture is well formed")
}

/// Stable result of pruning [`height6_tree`].
pub fn height6_tree_pruned() -> PrunedTree {
    SlicedTree::builder()
        .vertex("b", "4/3")
        .vertex("d", "0")
        .vertex("f", "2")
        .vertex("h", "3/2")
        .sliced("b", "d", "1/2", "1/2")
        .edge("d", "f")
        .sliced("d", "h", "1/2", "1/2")
        .klt("b", "1/6")
        .lc("b")
        .pruned_tree()
        .expect("fixture is well formed")
}

/// Height-3 chain `c1 .. c6` whose every vertex has weight 1/6.
pub fn six_vertex_chain() -> SlicedTree {
    SlicedTree::builder()
        .vertex("c1", "7/6")
        .vertex("c2", "1/6")
        .vertex("c3", "1/6")
        .vertex("c4", "1/6")
        .vertex("c5", "1/6")
        .vertex("c6", "7/6")
        .sliced("c1", "c2", "5/6", "1/6")
        .sliced("c2", "c3", "2/3", "1/3")
        .sliced("c3", "c4", "1/2", "1/2")
        .sliced("c4", "c5", "1/3", "2/3")
        .sliced("c5", "c6", "1/6", "5/6")
        .sliced_tree()
        .expect("fixture is well formed")
}

/// Height-4 chain `v1 .. v7` that prunes in three rounds.
pub fn height4_chain() -> SlicedTree {
    SlicedTree::builder()
        .vertex("v1", "1/2")
        .vertex("v2", "1/2")
        .vertex("v3", "1")
        .vertex("v4", "3/2")
        .vertex("v5", "1/6")
        .vertex("v6", "1/6")
        .vertex("v7", "1/6")
        .sliced("v1", "v2", "1/2", "1/2")
        .edge("v2", "v3")
        .edge("v3", "v4")
        .sliced("v4", "v5", "1/2", "1/2")
        .sliced("v5", "v6", "1/3", "2/3")
        .sliced("v6", "v7", "1/6", "5/6")
        .sliced_tree()
        .expect("fixture is well formed")
}

/// Final tree of [`height4_chain`]: `v3` with one lc-marking, `v4` with klt 1/2.
pub fn height4_chain_pruned() -> PrunedTree {
    SlicedTree::builder()
        .vertex("v3", "1")
        .vertex("v4", "3/2")
        .edge("v3", "v4")
        .lc("v3")
        .klt("v4", "1/2")
        .pruned_tree()
        .expect("fixture is well formed")
}

/// Unmarked height-3 chain on eight vertices that is already stable.
///
/// Its four jdeg-1/12 vertices sit between a 1/4-type and a 1/3- or
/// 1/6-type slicing, which the lattice allows.
pub fn eight_vertex_chain() -> SlicedTree {
    SlicedTree::builder()
        .vertex("w1", "7/6")
        .vertex("w2", "1/12")
        .vertex("w3", "1/12")
        .vertex("w4", "1/6")
        .vertex("w5", "1/6")
        .vertex("w6", "1/12")
        .vertex("w7", "1/12")
        .vertex("w8", "7/6")
        .sliced("w1", "w2", "5/6", "1/6")
        .sliced("w2", "w3", "3/4", "1/4")
        .sliced("w3", "w4", "2/3", "1/3")
        .sliced("w4", "w5", "1/2", "1/2")
        .sliced("w5", "w6", "1/3", "2/3")
        .sliced("w6", "w7", "1/4", "3/4")
        .sliced("w7", "w8", "1/6", "5/6")
        .sliced_tree()
        .expect("fixture is well formed")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_validate() {
        for t in [
            height6_tree(),
            six_vertex_chain(),
            height4_chain(),
            eight_vertex_chain(),
        ] {
            assert!(t.validate().ok, "{:?}", t.validate());
            assert!(t.is_tsm_stable().unwrap());
        }
        assert!(height6_tree_pruned().validate().ok);
        assert!(height4_chain_pruned().validate().ok);
    }

    #[test]
    fn eight_vertex_chain_is_stable_at_height_three() {
        let p = PrunedTree::from(eight_vertex_chain());
        assert_eq!(p.height().to_string(), "3");
        assert!(p.is_stable());
        assert_eq!(p.len(), 8);
    }
}
