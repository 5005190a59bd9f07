//! Dyadic geometry on the half-open unit cube `[0,1)^n`.
//!
//! Everything is integer-valued: an interval is a `(level, index)` pair, a
//! rectangle is one interval per axis and a cube is a rectangle whose axes
//! share a level. Axes are numbered `0..n` here; axis `n-1` is the last axis,
//! the one the pair-set recursion splits first.
//!
//! The pair sets `E^1_{j,Q}, E^2_{j,Q}` follow the closed form: write
//! `j = 2^m + sum_{i<m} c_i 2^i`. `E_{j,Q}` is `Q` with axis `n-1-i`
//! restricted to its lower (`c_i = 0`) or upper (`c_i = 1`) half for every
//! `i < m`, and the pair splits `E_{j,Q}` along axis `n-1-m`.
//!
//! Taken together the rectangles `E_{j,Q}` form a single complete binary
//! tree: the halves of `E_{j,Q}` are `E_{j+2^m,Q}` and `E_{j+2^{m+1},Q}`
//! when `m < n-1` and the two child cubes otherwise. [`Layout`] numbers that
//! tree heap-style, which is what the numerical modules iterate over.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::report::CheckReport;

/// `[index 2^-level, (index+1) 2^-level)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DyadicInterval {
    pub level: u32,
    pub index: u64,
}

impl DyadicInterval {
    pub const UNIT: DyadicInterval = DyadicInterval { level: 0, index: 0 };

    pub fn new(level: u32, index: u64) -> Result<Self> {
        if level >= 64 || index >> level != 0 {
            return Err(Error::CoordinateOutOfRange {
                coord: index,
                level,
            });
        }
        Ok(DyadicInterval { level, index })
    }

    pub fn length(&self) -> f64 {
        exp2_neg(self.level)
    }

    pub fn contains(&self, other: &DyadicInterval) -> bool {
        other.level >= self.level && other.index >> (other.level - self.level) == self.index
    }

    pub fn is_disjoint(&self, other: &DyadicInterval) -> bool {
        !self.contains(other) && !other.contains(self)
    }

    pub fn lower(&self) -> DyadicInterval {
        DyadicInterval {
            level: self.level + 1,
            index: self.index << 1,
        }
    }

    pub fn upper(&self) -> DyadicInterval {
        DyadicInterval {
            level: self.level + 1,
            index: (self.index << 1) | 1,
        }
    }

    pub fn half(&self, upper: bool) -> DyadicInterval {
        if upper {
            self.upper()
        } else {
            self.lower()
        }
    }

    /// Cell coordinates covered at grid depth `depth` (requires `level <= depth`).
    pub fn cell_range(&self, depth: u32) -> core::ops::Range<u64> {
        let shift = depth - self.level;
        (self.index << shift)..((self.index + 1) << shift)
    }

    pub fn start(&self) -> f64 {
        self.index as f64 * self.length()
    }

    pub fn end(&self) -> f64 {
        (self.index + 1) as f64 * self.length()
    }
}

/// Axis-parallel product of dyadic intervals, possibly of different levels.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DyadicRectangle {
    sides: Vec<DyadicInterval>,
}

impl DyadicRectangle {
    pub fn new(sides: Vec<DyadicInterval>) -> Result<Self> {
        if sides.is_empty() {
            return Err(Error::ZeroDimension);
        }
        Ok(DyadicRectangle { sides })
    }

    pub fn unit(dim: usize) -> Self {
        DyadicRectangle {
            sides: vec![DyadicInterval::UNIT; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.sides.len()
    }

    pub fn sides(&self) -> &[DyadicInterval] {
        &self.sides
    }

    pub fn volume(&self) -> f64 {
        exp2_neg(self.sides.iter().map(|s| s.level).sum())
    }

    pub fn contains(&self, other: &DyadicRectangle) -> bool {
        self.dim() == other.dim()
            && self
                .sides
                .iter()
                .zip(&other.sides)
                .all(|(a, b)| a.contains(b))
    }

    pub fn is_disjoint(&self, other: &DyadicRectangle) -> bool {
        self.sides
            .iter()
            .zip(&other.sides)
            .any(|(a, b)| a.is_disjoint(b))
    }

    pub fn is_cube(&self) -> bool {
        self.sides.windows(2).all(|w| w[0].level == w[1].level)
    }

    /// The rectangle with `axis` replaced by its lower or upper half.
    pub fn restrict(&self, axis: usize, upper: bool) -> DyadicRectangle {
        let mut sides = self.sides.clone();
        sides[axis] = sides[axis].half(upper);
        DyadicRectangle { sides }
    }

    pub fn split(&self, axis: usize) -> (DyadicRectangle, DyadicRectangle) {
        (self.restrict(axis, false), self.restrict(axis, true))
    }

    pub fn max_level(&self) -> u32 {
        self.sides.iter().map(|s| s.level).max().unwrap_or(0)
    }

    /// Number of depth-`depth` cells covered.
    pub fn cell_count(&self, depth: u32) -> u64 {
        self.sides
            .iter()
            .map(|s| 1u64 << (depth - s.level))
            .product()
    }

    /// Does the lexicographic cell `cell` (at depth `depth`) lie inside?
    pub fn contains_cell(&self, cell: &[u64], depth: u32) -> bool {
        self.sides
            .iter()
            .zip(cell)
            .all(|(s, &c)| c >> (depth - s.level) == s.index)
    }
}

impl fmt::Display for DyadicRectangle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("R[")?;
        for (a, s) in self.sides.iter().enumerate() {
            if a > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}:{}", s.level, s.index)?;
        }
        f.write_str("]")
    }
}

/// Dyadic cube of side `2^-level` with integer corner `coords`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DyadicCube {
    level: u32,
    coords: Vec<u64>,
}

impl DyadicCube {
    pub fn new(level: u32, coords: Vec<u64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::ZeroDimension);
        }
        for &c in &coords {
            if level >= 64 || c >> level != 0 {
                return Err(Error::CoordinateOutOfRange { coord: c, level });
            }
        }
        Ok(DyadicCube { level, coords })
    }

    pub fn unit(dim: usize) -> Self {
        DyadicCube {
            level: 0,
            coords: vec![0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn coords(&self) -> &[u64] {
        &self.coords
    }

    pub fn side_length(&self) -> f64 {
        exp2_neg(self.level)
    }

    pub fn volume(&self) -> f64 {
        exp2_neg(self.level * self.dim() as u32)
    }

    pub fn parent(&self) -> Option<DyadicCube> {
        (self.level > 0).then(|| DyadicCube {
            level: self.level - 1,
            coords: self.coords.iter().map(|c| c >> 1).collect(),
        })
    }

    /// The `2^n` children in lexicographic coordinate order (axis 0 most significant).
    pub fn children(&self) -> Vec<DyadicCube> {
        let n = self.dim();
        (0..1u64 << n)
            .map(|bits| DyadicCube {
                level: self.level + 1,
                coords: (0..n)
                    .map(|a| (self.coords[a] << 1) | ((bits >> (n - 1 - a)) & 1))
                    .collect(),
            })
            .collect()
    }

    pub fn contains(&self, other: &DyadicCube) -> bool {
        other.level >= self.level
            && self
                .coords
                .iter()
                .zip(&other.coords)
                .all(|(a, b)| b >> (other.level - self.level) == *a)
    }

    pub fn to_rectangle(&self) -> DyadicRectangle {
        DyadicRectangle {
            sides: self
                .coords
                .iter()
                .map(|&c| DyadicInterval {
                    level: self.level,
                    index: c,
                })
                .collect(),
        }
    }
}

impl fmt::Display for DyadicCube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q[{};", self.level)?;
        for (a, c) in self.coords.iter().enumerate() {
            if a > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str("]")
    }
}

/// One of the `2^n - 1` Wilson pairs of a cube.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HaarIndex {
    cube: DyadicCube,
    j: u32,
}

impl HaarIndex {
    pub fn new(cube: DyadicCube, j: u32) -> Result<Self> {
        let max = max_j(cube.dim());
        if j == 0 || j > max {
            return Err(Error::HaarIndexOutOfRange { j, max });
        }
        Ok(HaarIndex { cube, j })
    }

    pub fn cube(&self) -> &DyadicCube {
        &self.cube
    }

    pub fn j(&self) -> u32 {
        self.j
    }

    pub fn dim(&self) -> usize {
        self.cube.dim()
    }

    /// `floor(log2 j)`: how many axes `E_{j,Q}` has already halved.
    pub fn m(&self) -> u32 {
        31 - self.j.leading_zeros()
    }

    /// The axis along which the pair splits `E_{j,Q}`.
    pub fn split_axis(&self) -> usize {
        self.dim() - 1 - self.m() as usize
    }

    pub fn e_set(&self) -> DyadicRectangle {
        let n = self.dim();
        let mut rect = self.cube.to_rectangle();
        for i in 0..self.m() {
            let upper = (self.j >> i) & 1 == 1;
            rect = rect.restrict(n - 1 - i as usize, upper);
        }
        rect
    }

    pub fn pair_sets(&self) -> (DyadicRectangle, DyadicRectangle) {
        self.e_set().split(self.split_axis())
    }

    pub fn e_volume(&self) -> f64 {
        self.cube.volume() * exp2_neg(self.m())
    }
}

impl fmt::Display for HaarIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.cube, self.j)
    }
}

pub fn max_j(dim: usize) -> u32 {
    ((1u64 << dim) - 1) as u32
}

pub fn children(q: &DyadicCube) -> Vec<DyadicCube> {
    q.children()
}

pub fn pair_sets(idx: &HaarIndex) -> (DyadicRectangle, DyadicRectangle) {
    idx.pair_sets()
}

pub fn e_set(idx: &HaarIndex) -> DyadicRectangle {
    idx.e_set()
}

/// All Haar indices of cubes with level `< depth`, in heap (level-major) order.
pub fn haar_indices(dim: usize, depth: usize) -> impl Iterator<Item = HaarIndex> {
    let layout = Layout::new(dim, depth);
    (1..layout.cells()).map(move |k| layout.haar_index(Node(k)))
}

/// All cubes of level `<= max_level` under the unit cube.
pub fn cubes_up_to(dim: usize, max_level: u32) -> Vec<DyadicCube> {
    let mut out = vec![DyadicCube::unit(dim)];
    let mut frontier = out.clone();
    for _ in 0..max_level {
        frontier = frontier.iter().flat_map(|q| q.children()).collect();
        out.extend(frontier.iter().cloned());
    }
    out
}

/// Checks the pair-set properties of the closed-form construction on `q`.
pub fn verify_partition_properties(q: &DyadicCube) -> CheckReport {
    verify_partition_with(q, |idx| idx.pair_sets())
}

/// Checks the pair-set properties of an arbitrary construction on `q`.
///
/// Clauses, in order: (1) equal measure, (2) halves are unions of children,
/// (3) halves disjoint, (4) nesting trichotomy for `j != k`, then the
/// per-level partition of `Q` and the identification of the finest halves
/// with the children of `Q`.
pub fn verify_partition_with<F>(q: &DyadicCube, construction: F) -> CheckReport
where
    F: Fn(&HaarIndex) -> (DyadicRectangle, DyadicRectangle),
{
    let n = q.dim();
    let qr = q.to_rectangle();
    let mut report = CheckReport::new("partition", "closed-form", n, q.level() as usize + 1);
    let pairs: Vec<(DyadicRectangle, DyadicRectangle)> = (1..=max_j(n))
        .map(|j| construction(&HaarIndex { cube: q.clone(), j }))
        .collect();
    let is_child_union = |r: &DyadicRectangle| {
        qr.contains(r)
            && r.sides()
                .iter()
                .all(|s| s.level == q.level() || s.level == q.level() + 1)
    };

    for (idx, (e1, e2)) in pairs.iter().enumerate() {
        let j = idx + 1;
        if e1.volume() != e2.volume() {
            report.violate(format!("clause (1): |E1| != |E2| at j={j}"));
        }
        if !is_child_union(e1) || !is_child_union(e2) {
            report.violate(format!(
                "clause (2): halves of j={j} are not unions of children"
            ));
        }
        if !e1.is_disjoint(e2) {
            report.violate(format!("clause (3): halves of j={j} intersect"));
        }
    }

    let inside = |(a1, a2): &(DyadicRectangle, DyadicRectangle), b: &DyadicRectangle| {
        b.contains(a1) && b.contains(a2)
    };
    for (jx, pj) in pairs.iter().enumerate() {
        for (kx, pk) in pairs.iter().enumerate() {
            if jx >= kx {
                continue;
            }
            let a = inside(pj, &pk.0) || inside(pj, &pk.1);
            let b = inside(pk, &pj.0) || inside(pk, &pj.1);
            let c = [&pj.0, &pj.1]
                .iter()
                .all(|x| x.is_disjoint(&pk.0) && x.is_disjoint(&pk.1));
            if !(a || b || c) {
                report.violate(format!(
                    "clause (4): pairs j={} and k={} are neither nested nor disjoint",
                    jx + 1,
                    kx + 1
                ));
            }
        }
    }

    for m in 0..n {
        let range = (1usize << m)..(1usize << (m + 1));
        let mut volume = 0.0;
        for a in range.clone() {
            volume += pairs[a - 1].0.volume() + pairs[a - 1].1.volume();
            for b in range.clone().filter(|&b| b > a) {
                let (pa, pb) = (&pairs[a - 1], &pairs[b - 1]);
                let disjoint = [&pa.0, &pa.1]
                    .iter()
                    .all(|x| x.is_disjoint(&pb.0) && x.is_disjoint(&pb.1));
                if !disjoint {
                    report.violate(format!("level set m={m}: E_{a} and E_{b} overlap"));
                }
            }
        }
        if volume != qr.volume() {
            report.violate(format!(
                "level set m={m}: measures sum to {volume}, not |Q|"
            ));
        }
    }

    let mut finest: Vec<DyadicRectangle> = pairs[(1 << (n - 1)) - 1..]
        .iter()
        .flat_map(|(a, b)| [a.clone(), b.clone()])
        .collect();
    let mut kids: Vec<DyadicRectangle> = q.children().iter().map(|c| c.to_rectangle()).collect();
    finest.sort();
    kids.sort();
    if finest != kids {
        report.violate(String::from("finest halves are not the children of Q"));
    }
    report.empirical_constant = report.violations.len() as f64;
    report.cap = Some(0.0);
    report
}

/// Heap index into the binary tree of Wilson rectangles of a [`Layout`].
///
/// `Node(1)` is the unit cube; `Node(k)` has halves `Node(2k)` (`E^1`) and
/// `Node(2k+1)` (`E^2`). Indices `1..cells` are the Haar nodes, indices
/// `cells..2*cells` are the depth-`L` cells in tree order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Node(pub usize);

impl Node {
    pub const ROOT: Node = Node(1);

    pub fn tree_depth(self) -> u32 {
        usize::BITS - 1 - self.0.leading_zeros()
    }

    pub fn lower(self) -> Node {
        Node(2 * self.0)
    }

    pub fn upper(self) -> Node {
        Node(2 * self.0 + 1)
    }

    pub fn parent(self) -> Option<Node> {
        (self.0 > 1).then_some(Node(self.0 / 2))
    }

    /// Volume `|E|` of the rectangle this node stands for.
    pub fn volume(self) -> f64 {
        exp2_neg(self.tree_depth())
    }

    /// Strict ancestors from the root down, each paired with whether `self`
    /// sits in its upper half.
    pub fn ancestors(self) -> impl Iterator<Item = (Node, bool)> {
        let d = self.tree_depth();
        (0..d).map(move |t| {
            let anc = Node(self.0 >> (d - t));
            let upper = (self.0 >> (d - t - 1)) & 1 == 1;
            (anc, upper)
        })
    }
}

/// Index bookkeeping for the grid of depth `depth` on `[0,1)^dim`.
///
/// Cells are stored lexicographically (axis 0 most significant); the tree
/// visits them in a different order, and `leaf_cell` maps between the two.
#[derive(Debug, Clone)]
pub struct Layout {
    dim: usize,
    depth: usize,
    leaf_cell: Vec<usize>,
}

impl Layout {
    pub fn new(dim: usize, depth: usize) -> Self {
        assert!(dim >= 1, "dimension must be at least 1");
        let bits = dim * depth;
        let cells = 1usize << bits;
        let mut leaf_cell = Vec::with_capacity(cells);
        let mut coords = vec![0u64; dim];
        for p in 0..cells {
            Self::path_coords(p, bits, dim, &mut coords);
            leaf_cell.push(Self::lex_index(&coords, dim, depth));
        }
        Layout {
            dim,
            depth,
            leaf_cell,
        }
    }

    fn path_coords(path: usize, bits: usize, dim: usize, coords: &mut [u64]) {
        coords.iter_mut().for_each(|c| *c = 0);
        for t in 0..bits {
            let bit = ((path >> (bits - 1 - t)) & 1) as u64;
            let axis = dim - 1 - t % dim;
            coords[axis] = (coords[axis] << 1) | bit;
        }
    }

    fn lex_index(coords: &[u64], dim: usize, depth: usize) -> usize {
        coords
            .iter()
            .enumerate()
            .map(|(a, &c)| (c as usize) << (depth * (dim - 1 - a)))
            .sum()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn cells(&self) -> usize {
        self.leaf_cell.len()
    }

    /// Height of the Wilson tree, `dim * depth`.
    pub fn height(&self) -> u32 {
        (self.dim * self.depth) as u32
    }

    pub fn leaf_cells(&self) -> &[usize] {
        &self.leaf_cell
    }

    /// Lexicographic cell of the tree leaf `Node(cells + p)`.
    pub fn leaf_to_cell(&self, p: usize) -> usize {
        self.leaf_cell[p]
    }

    pub fn leaf_range(&self, node: Node) -> core::ops::Range<usize> {
        let d = node.tree_depth();
        let shift = self.height() - d;
        let start = (node.0 - (1usize << d)) << shift;
        start..start + (1usize << shift)
    }

    /// Tree nodes of whole cubes sit at depths divisible by `dim`.
    pub fn is_cube_node(&self, node: Node) -> bool {
        (node.tree_depth() as usize).is_multiple_of(self.dim)
    }

    /// The cube `Q` of the pair `(Q, j)` that `node` represents.
    pub fn cube_node(&self, node: Node) -> Node {
        let extra = node.tree_depth() % self.dim as u32;
        Node(node.0 >> extra)
    }

    pub fn cell_coords(&self, cell: usize) -> Vec<u64> {
        let mask = (1usize << self.depth) - 1;
        (0..self.dim)
            .map(|a| ((cell >> (self.depth * (self.dim - 1 - a))) & mask) as u64)
            .collect()
    }

    pub fn haar_index(&self, node: Node) -> HaarIndex {
        let n = self.dim;
        let d = node.tree_depth() as usize;
        let level = d / n;
        let m = d % n;
        let path = node.0 - (1usize << d);
        let mut coords = vec![0u64; n];
        for t in 0..level * n {
            let bit = ((path >> (d - 1 - t)) & 1) as u64;
            let axis = n - 1 - t % n;
            coords[axis] = (coords[axis] << 1) | bit;
        }
        let mut j = 1u32 << m;
        for i in 0..m {
            let bit = ((path >> (m - 1 - i)) & 1) as u32;
            j |= bit << i;
        }
        HaarIndex {
            cube: DyadicCube {
                level: level as u32,
                coords,
            },
            j,
        }
    }

    pub fn node_of(&self, idx: &HaarIndex) -> Result<Node> {
        self.check_index(idx)?;
        let n = self.dim;
        let level = idx.cube.level as usize;
        let mut k = 1usize;
        for t in 1..=level {
            for axis in (0..n).rev() {
                k = (k << 1) | ((idx.cube.coords[axis] >> (level - t)) & 1) as usize;
            }
        }
        for i in 0..idx.m() {
            k = (k << 1) | ((idx.j >> i) & 1) as usize;
        }
        Ok(Node(k))
    }

    pub fn cube_to_node(&self, q: &DyadicCube) -> Result<Node> {
        if q.level() as usize == self.depth && q.dim() == self.dim {
            let cell = Self::lex_index(q.coords(), self.dim, self.depth);
            let p = self
                .leaf_cell
                .iter()
                .position(|&c| c == cell)
                .expect("cell in layout");
            return Ok(Node(self.cells() + p));
        }
        self.node_of(&HaarIndex {
            cube: q.clone(),
            j: 1,
        })
    }

    pub fn check_index(&self, idx: &HaarIndex) -> Result<()> {
        if idx.dim() != self.dim {
            return Err(Error::CoordinateCount {
                expected: self.dim,
                found: idx.dim(),
            });
        }
        if idx.cube.level as usize >= self.depth {
            return Err(Error::DepthTooShallow {
                level: idx.cube.level,
                depth: self.depth,
            });
        }
        Ok(())
    }

    /// Rectangle of any node, including the leaves.
    pub fn rectangle(&self, node: Node) -> DyadicRectangle {
        if node.0 >= self.cells() {
            let cell = self.leaf_cell[node.0 - self.cells()];
            let coords = self.cell_coords(cell);
            return DyadicCube {
                level: self.depth as u32,
                coords,
            }
            .to_rectangle();
        }
        self.haar_index(node).e_set()
    }

    /// Bottom-up sums of per-cell values over every node (index 0 unused).
    pub fn node_sums(&self, cell_values: &[f64]) -> Vec<f64> {
        let n = self.cells();
        let mut s = vec![0.0; 2 * n];
        for p in 0..n {
            s[n + p] = cell_values[self.leaf_cell[p]];
        }
        for k in (1..n).rev() {
            s[k] = s[2 * k] + s[2 * k + 1];
        }
        s
    }

    /// Bottom-up averages over every node (index 0 unused).
    pub fn node_averages(&self, cell_values: &[f64]) -> Vec<f64> {
        let mut s = self.node_sums(cell_values);
        let n = self.cells();
        for (k, v) in s.iter_mut().enumerate().skip(1) {
            let count = n >> Node(k).tree_depth();
            *v /= count as f64;
        }
        s
    }

    /// Sums of per-node terms over every subtree (leaves contribute zero).
    pub fn subtree_sums(&self, node_terms: &[f64]) -> Vec<f64> {
        let n = self.cells();
        let mut s = vec![0.0; 2 * n];
        for k in (1..n).rev() {
            s[k] = node_terms[k] + s[2 * k] + s[2 * k + 1];
        }
        s
    }

    /// Pushes per-node values down to the leaves along every root path.
    pub fn push_down(&self, root_value: f64, node_value: impl Fn(Node, bool) -> f64) -> Vec<f64> {
        let n = self.cells();
        let mut acc = vec![0.0; 2 * n];
        acc[1] = root_value;
        for k in 1..n {
            acc[2 * k] = acc[k] + node_value(Node(k), false);
            acc[2 * k + 1] = acc[k] + node_value(Node(k), true);
        }
        let mut cells = vec![0.0; n];
        for p in 0..n {
            cells[self.leaf_cell[p]] = acc[n + p];
        }
        cells
    }
}

pub(crate) fn exp2_neg(k: u32) -> f64 {
    libm::ldexp(1.0, -(k as i32))
}
