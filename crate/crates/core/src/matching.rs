//! Maximum bipartite matching and Hall-violator extraction.
//!
//! Graphs are small (one side is the goods of a market), so augmenting
//! paths are found by depth-first search in input order. That keeps every
//! matching and witness deterministic for a given vertex ordering.

/// Bipartite graph given by the adjacency lists of its left side.
#[derive(Debug, Clone)]
pub struct Bipartite {
    right: usize,
    adj: Vec<Vec<usize>>,
}

impl Bipartite {
    pub fn new(right: usize, adj: Vec<Vec<usize>>) -> Self {
        debug_assert!(adj.iter().flatten().all(|&r| r < right));
        Bipartite { right, adj }
    }

    pub fn left(&self) -> usize {
        self.adj.len()
    }

    pub fn right(&self) -> usize {
        self.right
    }

    pub fn neighbors(&self, l: usize) -> &[usize] {
        &self.adj[l]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    pub left_to_right: Vec<Option<usize>>,
    pub right_to_left: Vec<Option<usize>>,
}

impl Matching {
    pub fn empty(left: usize, right: usize) -> Self {
        Matching { left_to_right: vec![None; left], right_to_left: vec![None; right] }
    }

    pub fn size(&self) -> usize {
        self.left_to_right.iter().flatten().count()
    }

    pub fn saturates_left(&self) -> bool {
        self.left_to_right.iter().all(Option::is_some)
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.left_to_right.iter().enumerate().filter_map(|(l, r)| r.map(|r| (l, r))).collect()
    }
}

fn augment(g: &Bipartite, l: usize, seen: &mut [bool], m: &mut Matching) -> bool {
    for &r in g.neighbors(l) {
        if seen[r] {
            continue;
        }
        seen[r] = true;
        let free = match m.right_to_left[r] {
            None => true,
            Some(other) => augment(g, other, seen, m),
        };
        if free {
            m.left_to_right[l] = Some(r);
            m.right_to_left[r] = Some(l);
            return true;
        }
    }
    false
}

/// Maximum matching by repeated augmenting-path search.
pub fn maximum_matching(g: &Bipartite) -> Matching {
    let mut m = Matching::empty(g.left(), g.right());
    let mut seen = vec![false; g.right()];
    for l in 0..g.left() {
        seen.iter_mut().for_each(|s| *s = false);
        augment(g, l, &mut seen, &mut m);
    }
    m
}

/// Given a maximum matching, returns a left set `A` with `|N(A)| < |A|`
/// together with `N(A)`, or `None` when the matching saturates the left side.
///
/// `A` is everything reachable by alternating paths from the unmatched left
/// vertices; every right vertex reached is matched (the matching is maximum)
/// and its partner is in `A`, so `|N(A)| = |A| - #unmatched`.
pub fn hall_violator(g: &Bipartite, m: &Matching) -> Option<(Vec<usize>, Vec<usize>)> {
    let mut left_seen = vec![false; g.left()];
    let mut right_seen = vec![false; g.right()];
    let mut stack: Vec<usize> = (0..g.left()).filter(|&l| m.left_to_right[l].is_none()).collect();
    if stack.is_empty() {
        return None;
    }
    for &l in &stack {
        left_seen[l] = true;
    }
    while let Some(l) = stack.pop() {
        for &r in g.neighbors(l) {
            if right_seen[r] {
                continue;
            }
            right_seen[r] = true;
            if let Some(next) = m.right_to_left[r] {
                if !left_seen[next] {
                    left_seen[next] = true;
                    stack.push(next);
                }
            }
        }
    }
    let a = (0..g.left()).filter(|&l| left_seen[l]).collect();
    let n = (0..g.right()).filter(|&r| right_seen[r]).collect();
    Some((a, n))
}
