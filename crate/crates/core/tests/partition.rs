use dpl_core::dyadic::{
    cubes_up_to, haar_indices, max_j, verify_partition_properties, verify_partition_with,
};
use dpl_core::{DyadicCube, DyadicInterval, DyadicRectangle, HaarIndex, Layout, Node};
use proptest::prelude::*;

/// Inductive construction on the unit cube of dimension `n`: pair 1 splits the
/// last axis, pair `2j + c` is pair `j` of the first `n - 1` axes times the
/// `c`-half of the last axis.
type UnitPair = (Vec<(u32, u64)>, Vec<(u32, u64)>);

fn unit_pair(n: usize, j: u32) -> UnitPair {
    let full = vec![(0u32, 0u64); n];
    if j == 1 {
        let (mut lo, mut hi) = (full.clone(), full);
        lo[n - 1] = (1, 0);
        hi[n - 1] = (1, 1);
        return (lo, hi);
    }
    let (mut lo, mut hi) = unit_pair(n - 1, j >> 1);
    let side = (1, (j & 1) as u64);
    lo.push(side);
    hi.push(side);
    (lo, hi)
}

fn place(q: &DyadicCube, unit: &[(u32, u64)]) -> DyadicRectangle {
    let sides = unit
        .iter()
        .zip(q.coords())
        .map(|(&(l, i), &c)| DyadicInterval::new(q.level() + l, (c << l) + i).unwrap())
        .collect();
    DyadicRectangle::new(sides).unwrap()
}

fn oracle(idx: &HaarIndex) -> (DyadicRectangle, DyadicRectangle) {
    let (lo, hi) = unit_pair(idx.dim(), idx.j());
    (place(idx.cube(), &lo), place(idx.cube(), &hi))
}

#[test]
fn closed_form_matches_inductive_construction() {
    for n in 1..=4 {
        for q in cubes_up_to(n, 3) {
            for j in 1..=max_j(n) {
                let idx = HaarIndex::new(q.clone(), j).unwrap();
                assert_eq!(idx.pair_sets(), oracle(&idx), "n={n} {idx}");
            }
        }
    }
}

#[test]
fn properties_hold_up_to_level_three() {
    for n in 1..=4 {
        for q in cubes_up_to(n, 3) {
            let r = verify_partition_properties(&q);
            assert!(r.passed(), "n={n} {:?}", r.violations);
        }
    }
}

#[test]
fn the_oracle_itself_has_the_partition_properties() {
    for n in 1..=4 {
        let q = DyadicCube::new(1, vec![1; n]).unwrap();
        let r = verify_partition_with(&q, oracle);
        assert!(r.passed(), "{:?}", r.violations);
    }
}

#[test]
fn broken_construction_is_detected() {
    let q = DyadicCube::unit(2);
    let r = verify_partition_with(&q, |idx| {
        let (a, b) = oracle(idx);
        if idx.j() == 3 {
            (a.clone(), a)
        } else {
            (a, b)
        }
    });
    assert!(!r.passed());
}

#[test]
fn level_three_set_cover_cube_children() {
    let q = DyadicCube::new(1, vec![1, 0, 1]).unwrap();
    let mut halves: Vec<DyadicRectangle> = (4..8)
        .flat_map(|j| {
            let (a, b) = HaarIndex::new(q.clone(), j).unwrap().pair_sets();
            [a, b]
        })
        .collect();
    let mut children: Vec<DyadicRectangle> =
        q.children().iter().map(|c| c.to_rectangle()).collect();
    halves.sort();
    children.sort();
    assert_eq!(halves, children);
}

#[test]
fn tree_nodes_agree_with_pair_sets() {
    for (n, depth) in [(1, 4), (2, 3), (3, 2)] {
        let layout = Layout::new(n, depth);
        let mut seen = 0;
        for idx in haar_indices(n, depth) {
            let node = layout.node_of(&idx).unwrap();
            assert_eq!(layout.haar_index(node), idx);
            let (e1, e2) = idx.pair_sets();
            assert_eq!(layout.rectangle(node.lower()), e1);
            assert_eq!(layout.rectangle(node.upper()), e2);
            assert_eq!(layout.rectangle(node), idx.e_set());
            assert!((node.volume() - idx.e_volume()).abs() < 1e-15);
            seen += 1;
        }
        assert_eq!(seen, layout.cells() - 1);
    }
}

#[test]
fn leaves_are_the_cells() {
    let layout = Layout::new(2, 3);
    let n = layout.cells();
    let mut cells: Vec<usize> = (0..n).map(|p| layout.leaf_to_cell(p)).collect();
    for p in 0..n {
        let r = layout.rectangle(Node(n + p));
        let coords = layout.cell_coords(layout.leaf_to_cell(p));
        assert!(r.contains_cell(&coords, 3));
        assert_eq!(r.cell_count(3), 1);
    }
    cells.sort_unstable();
    assert_eq!(cells, (0..n).collect::<Vec<_>>());
}

proptest! {
    #[test]
    fn nested_or_disjoint(n in 1usize..4, depth in 1usize..4, a in 0usize..4096, b in 0usize..4096) {
        let layout = Layout::new(n, depth);
        let cells = layout.cells();
        let (ka, kb) = (1 + a % (cells - 1), 1 + b % (cells - 1));
        let (ra, rb) = (layout.rectangle(Node(ka)), layout.rectangle(Node(kb)));
        let nested = ra.contains(&rb) || rb.contains(&ra);
        prop_assert!(nested || ra.is_disjoint(&rb));
        // Containment of sets is ancestry in the tree.
        let ancestor = |x: usize, y: usize| {
            let mut y = y;
            while y > x { y >>= 1; }
            y == x
        };
        prop_assert_eq!(ra.contains(&rb), ancestor(ka, kb));
    }

    #[test]
    fn halves_have_equal_volume(n in 1usize..5, level in 0u32..3, seed in 0u64..1000, j in 1u32..16) {
        let side = 1u64 << level;
        let coords: Vec<u64> = (0..n).map(|a| (seed >> (3 * a)) % side).collect();
        let q = DyadicCube::new(level, coords).unwrap();
        let j = 1 + (j - 1) % max_j(n);
        let idx = HaarIndex::new(q, j).unwrap();
        let (e1, e2) = idx.pair_sets();
        prop_assert!((e1.volume() - e2.volume()).abs() < 1e-18);
        prop_assert!(e1.is_disjoint(&e2));
        prop_assert!(idx.cube().to_rectangle().contains(&e1));
    }
}
