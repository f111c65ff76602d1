//! Exact maximum clique by branch and bound with greedy-coloring bounds.

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitSet {
    words: Vec<u64>,
}

impl BitSet {
    pub fn new(n: usize) -> Self {
        BitSet {
            words: vec![0; n.div_ceil(64)],
        }
    }

    pub fn full(n: usize) -> Self {
        let mut s = Self::new(n);
        for i in 0..n {
            s.insert(i);
        }
        s
    }

    pub fn insert(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn remove(&mut self, i: usize) {
        self.words[i / 64] &= !(1 << (i % 64));
    }

    pub fn contains(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn intersect(&self, other: &BitSet) -> BitSet {
        BitSet {
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a & b)
                .collect(),
        }
    }

    pub fn first(&self) -> Option<usize> {
        self.words
            .iter()
            .position(|w| *w != 0)
            .map(|i| i * 64 + self.words[i].trailing_zeros() as usize)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + b)
            })
        })
    }
}

/// Undirected graph as adjacency bitsets (no self-loops).
#[derive(Debug, Clone)]
pub struct Graph {
    adj: Vec<BitSet>,
}

impl Graph {
    pub fn from_fn(n: usize, mut edge: impl FnMut(usize, usize) -> bool) -> Self {
        let mut adj = vec![BitSet::new(n); n];
        for i in 0..n {
            for j in (i + 1)..n {
                if edge(i, j) {
                    adj[i].insert(j);
                    adj[j].insert(i);
                }
            }
        }
        Graph { adj }
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i].contains(j)
    }

    /// Smallest-last (degeneracy) order, reversed so dense cores come first.
    fn degeneracy_order(&self) -> Vec<usize> {
        let n = self.len();
        let mut deg: Vec<usize> = self.adj.iter().map(BitSet::len).collect();
        let mut removed = vec![false; n];
        let mut order = Vec::with_capacity(n);
        for _ in 0..n {
            let v = (0..n)
                .filter(|&v| !removed[v])
                .min_by_key(|&v| (deg[v], v))
                .unwrap();
            removed[v] = true;
            order.push(v);
            for u in self.adj[v].iter() {
                if !removed[u] {
                    deg[u] -= 1;
                }
            }
        }
        order.reverse();
        order
    }

    /// A maximum clique, or the first clique of size `target` if one is found earlier.
    pub fn max_clique(&self, target: Option<usize>) -> Vec<usize> {
        let n = self.len();
        if n == 0 {
            return vec![];
        }
        let order = self.degeneracy_order();
        let mut pos = vec![0; n];
        for (i, &v) in order.iter().enumerate() {
            pos[v] = i;
        }
        // Relabel so that bit order follows the degeneracy order.
        let relabeled = Graph {
            adj: order
                .iter()
                .map(|&v| {
                    let mut s = BitSet::new(n);
                    for u in self.adj[v].iter() {
                        s.insert(pos[u]);
                    }
                    s
                })
                .collect(),
        };
        let mut search = Search {
            g: &relabeled,
            best: vec![0],
            current: Vec::new(),
            target: target.unwrap_or(usize::MAX),
        };
        search.expand(BitSet::full(n));
        search.best.into_iter().map(|i| order[i]).collect()
    }
}

struct Search<'a> {
    g: &'a Graph,
    best: Vec<usize>,
    current: Vec<usize>,
    target: usize,
}

impl Search<'_> {
    fn done(&self) -> bool {
        self.best.len() >= self.target
    }

    /// Greedy sequential coloring; returns vertices with their color numbers
    /// in nondecreasing color order.
    fn color(&self, p: &BitSet) -> Vec<(usize, usize)> {
        let mut uncolored = p.clone();
        let mut out = Vec::with_capacity(p.len());
        let mut color = 0;
        while !uncolored.is_empty() {
            color += 1;
            let mut avail = uncolored.clone();
            while let Some(v) = avail.first() {
                avail.remove(v);
                uncolored.remove(v);
                out.push((v, color));
                for u in self.g.adj[v].iter() {
                    avail.remove(u);
                }
            }
        }
        out
    }

    fn expand(&mut self, mut p: BitSet) {
        let colored = self.color(&p);
        for &(v, c) in colored.iter().rev() {
            if self.current.len() + c <= self.best.len() || self.done() {
                return;
            }
            self.current.push(v);
            let next = p.intersect(&self.g.adj[v]);
            let leaf = next.is_empty() || self.current.len() >= self.target;
            if leaf {
                if self.current.len() > self.best.len() {
                    self.best = self.current.clone();
                }
            } else {
                self.expand(next);
            }
            self.current.pop();
            p.remove(v);
        }
    }
}
