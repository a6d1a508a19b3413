use crate::error::{Error, Result};

/// Complete binary partition tree. Node `(k, i)` has id `2^k - 1 + i`; the
/// children of node `c` are `2c + 1` and `2c + 2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionTree {
    depth: usize,
    sizes: Vec<usize>,
    starts: Vec<usize>,
}

impl PartitionTree {
    /// Tree of depth `K = ceil(log2(ceil(n / leaf_size)))`; each node splits
    /// into `ceil(m / 2)` and `floor(m / 2)`.
    pub fn build(n: usize, leaf_size: usize) -> Result<Self> {
        if n == 0 || leaf_size == 0 {
            return Err(Error::PartitionMismatch(format!("n = {n}, leaf size = {leaf_size}")));
        }
        let leaves = n.div_ceil(leaf_size);
        let depth = leaves.next_power_of_two().trailing_zeros() as usize;
        let mut level = vec![n];
        let mut levels = vec![level.clone()];
        for _ in 0..depth {
            level = level.iter().flat_map(|&m| [m.div_ceil(2), m / 2]).collect();
            levels.push(level.clone());
        }
        Self::from_levels(levels)
    }

    /// Tree from explicit per-level sizes; checks the parent/children sum.
    pub fn from_levels(levels: Vec<Vec<usize>>) -> Result<Self> {
        if levels.is_empty() || levels[0].len() != 1 {
            return Err(Error::PartitionMismatch("level 0 must hold exactly the root".into()));
        }
        for (k, lv) in levels.iter().enumerate() {
            if lv.len() != 1 << k {
                return Err(Error::PartitionMismatch(format!("level {k} has {} nodes", lv.len())));
            }
            if k > 0 {
                for (i, &m) in levels[k - 1].iter().enumerate() {
                    if lv[2 * i] + lv[2 * i + 1] != m {
                        return Err(Error::PartitionMismatch(format!(
                            "node ({}, {i}) of size {m} splits into {} + {}",
                            k - 1,
                            lv[2 * i],
                            lv[2 * i + 1]
                        )));
                    }
                }
            }
        }
        let depth = levels.len() - 1;
        let sizes: Vec<usize> = levels.into_iter().flatten().collect();
        let mut starts = vec![0; sizes.len()];
        for c in 1..sizes.len() {
            let parent = (c - 1) / 2;
            starts[c] = if c % 2 == 1 { starts[parent] } else { starts[c - 1] + sizes[c - 1] };
        }
        Ok(Self { depth, sizes, starts })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn n(&self) -> usize {
        self.sizes[0]
    }

    pub fn num_nodes(&self) -> usize {
        self.sizes.len()
    }

    pub fn num_leaves(&self) -> usize {
        1 << self.depth
    }

    pub fn id(k: usize, i: usize) -> usize {
        (1 << k) - 1 + i
    }

    pub fn level(id: usize) -> usize {
        (usize::BITS - 1 - (id + 1).leading_zeros()) as usize
    }

    pub fn parent(id: usize) -> usize {
        (id - 1) / 2
    }

    pub fn children(id: usize) -> (usize, usize) {
        (2 * id + 1, 2 * id + 2)
    }

    pub fn sibling(id: usize) -> usize {
        if id % 2 == 1 {
            id + 1
        } else {
            id - 1
        }
    }

    /// True for the first (left) child of its parent.
    pub fn is_left(id: usize) -> bool {
        id % 2 == 1
    }

    pub fn is_leaf(&self, id: usize) -> bool {
        Self::level(id) == self.depth
    }

    pub fn first_leaf(&self) -> usize {
        (1 << self.depth) - 1
    }

    /// Leaf index `0..2^K` of a leaf id.
    pub fn leaf_index(&self, id: usize) -> usize {
        id - self.first_leaf()
    }

    pub fn leaf_ids(&self) -> std::ops::Range<usize> {
        self.first_leaf()..self.num_nodes()
    }

    pub fn size(&self, id: usize) -> usize {
        self.sizes[id]
    }

    pub fn start(&self, id: usize) -> usize {
        self.starts[id]
    }

    pub fn range(&self, id: usize) -> std::ops::Range<usize> {
        self.starts[id]..self.starts[id] + self.sizes[id]
    }

    pub fn level_sizes(&self, k: usize) -> &[usize] {
        &self.sizes[(1 << k) - 1..(1 << (k + 1)) - 1]
    }

    pub fn leaf_sizes(&self) -> &[usize] {
        self.level_sizes(self.depth)
    }
}
