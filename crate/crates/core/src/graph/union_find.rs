// SPDX-License-Identifier: Apache-2.0

/// Disjoint sets over `0..n` with path compression and union by rank.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<u32>,
    rank: Vec<u8>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
            rank: vec![0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn find(&mut self, x: u32) -> u32 {
        let mut root = x;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        let mut cur = x;
        while self.parent[cur as usize] != root {
            let next = self.parent[cur as usize];
            self.parent[cur as usize] = root;
            cur = next;
        }
        root
    }

    /// Find without compression, for read-only callers.
    pub fn find_const(&self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            x = self.parent[x as usize];
        }
        x
    }

    pub fn is_root(&self, x: u32) -> bool {
        self.parent[x as usize] == x
    }

    pub fn rank(&self, x: u32) -> u8 {
        self.rank[x as usize]
    }

    /// Joins the sets of `a` and `b`. Returns `(root, absorbed)`, or `None`
    /// if they were already joined.
    pub fn union(&mut self, a: u32, b: u32) -> Option<(u32, u32)> {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra == rb {
            return None;
        }
        let (root, child) = match self.rank[ra as usize].cmp(&self.rank[rb as usize]) {
            std::cmp::Ordering::Less => (rb, ra),
            std::cmp::Ordering::Greater => (ra, rb),
            std::cmp::Ordering::Equal => {
                self.rank[ra as usize] += 1;
                (ra, rb)
            }
        };
        self.parent[child as usize] = root;
        Some((root, child))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn union_then_find_agrees() {
        let mut uf = UnionFind::new(6);
        uf.union(0, 1);
        uf.union(2, 3);
        uf.union(1, 3);
        let r = uf.find(0);
        for x in 0..4 {
            assert_eq!(uf.find(x), r);
            let r = uf.find(x);
            assert_eq!(uf.find(r), r);
        }
        assert_ne!(uf.find(4), r);
        assert!(uf.union(0, 2).is_none());
    }
}
