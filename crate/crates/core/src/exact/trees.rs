//! Rooted trees up to order 12, the index set of the order conditions.

use std::sync::OnceLock;

use super::rational::Rational;

pub const MAX_TREE_ORDER: u32 = 12;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TreeError {
    #[error("tree order {0} outside the supported range 1..=12")]
    OrderOutOfRange(u32),
}

/// One isomorphism class of rooted trees.
///
/// Children are ids into the global forest, sorted ascending; a child type
/// appears once per copy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootedTree {
    id: usize,
    order: u32,
    children: Vec<usize>,
    level_sequence: Vec<u8>,
    gamma: u64,
    sigma: u64,
}

impl RootedTree {
    /// Position in the global forest; ids increase with order, then with
    /// canonical encoding.
    pub fn id(&self) -> usize {
        self.id
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn children(&self) -> &[usize] {
        &self.children
    }

    /// Canonical encoding: node depths in preorder, with subtrees visited in
    /// lexicographically decreasing order of their own encodings.
    pub fn level_sequence(&self) -> &[u8] {
        &self.level_sequence
    }

    pub fn gamma(&self) -> u64 {
        self.gamma
    }

    pub fn sigma(&self) -> u64 {
        self.sigma
    }

    pub fn gamma_rational(&self) -> Rational {
        Rational::from_integer(self.gamma.into())
    }

    pub fn sigma_rational(&self) -> Rational {
        Rational::from_integer(self.sigma.into())
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

struct Forest {
    trees: Vec<RootedTree>,
    /// `starts[q]` is the id of the first tree of order `q`; one extra entry
    /// closes the last range.
    starts: Vec<usize>,
}

fn factorial(n: u64) -> u64 {
    (1..=n).product()
}

fn build_forest() -> Forest {
    let mut trees: Vec<RootedTree> = Vec::new();
    let mut starts = vec![0, 0];
    for q in 1..=MAX_TREE_ORDER {
        let mut level: Vec<RootedTree> = Vec::new();
        let mut current = Vec::new();
        collect_children(&trees, q - 1, 0, &mut current, &mut |children| {
            level.push(make_tree(&trees, q, children.to_vec()));
        });
        level.sort_by(|a, b| a.level_sequence.cmp(&b.level_sequence));
        let base = trees.len();
        for (k, mut t) in level.into_iter().enumerate() {
            t.id = base + k;
            trees.push(t);
        }
        starts.push(trees.len());
    }
    Forest { trees, starts }
}

/// Enumerates multisets of existing trees with total order `remaining`, as
/// nondecreasing id lists starting at `min_id`.
fn collect_children(
    trees: &[RootedTree],
    remaining: u32,
    min_id: usize,
    current: &mut Vec<usize>,
    emit: &mut dyn FnMut(&[usize]),
) {
    if remaining == 0 {
        emit(current);
        return;
    }
    for id in min_id..trees.len() {
        let order = trees[id].order;
        if order > remaining {
            // Trees are stored by increasing order.
            break;
        }
        current.push(id);
        collect_children(trees, remaining - order, id, current, emit);
        current.pop();
    }
}

fn make_tree(trees: &[RootedTree], order: u32, children: Vec<usize>) -> RootedTree {
    let mut gamma = u64::from(order);
    let mut sigma = 1u64;
    let mut k = 0;
    while k < children.len() {
        let id = children[k];
        let run = children[k..].iter().take_while(|&&c| c == id).count();
        let child = &trees[id];
        gamma *= child.gamma.pow(run as u32);
        sigma *= child.sigma.pow(run as u32) * factorial(run as u64);
        k += run;
    }
    let mut subtrees: Vec<&[u8]> = children
        .iter()
        .map(|&c| trees[c].level_sequence.as_slice())
        .collect();
    subtrees.sort_by(|a, b| b.cmp(a));
    let mut level_sequence = Vec::with_capacity(order as usize);
    level_sequence.push(0);
    for s in subtrees {
        level_sequence.extend(s.iter().map(|d| d + 1));
    }
    RootedTree {
        id: 0,
        order,
        children,
        level_sequence,
        gamma,
        sigma,
    }
}

fn forest() -> &'static Forest {
    static FOREST: OnceLock<Forest> = OnceLock::new();
    FOREST.get_or_init(build_forest)
}

fn check_order(q: u32) -> Result<(), TreeError> {
    if (1..=MAX_TREE_ORDER).contains(&q) {
        Ok(())
    } else {
        Err(TreeError::OrderOutOfRange(q))
    }
}

/// All trees of order `<= q_max`, ordered by order and then by encoding.
pub fn enumerate_trees(q_max: u32) -> Result<&'static [RootedTree], TreeError> {
    check_order(q_max)?;
    let f = forest();
    Ok(&f.trees[..f.starts[q_max as usize + 1]])
}

/// Trees of order exactly `q`.
pub fn trees_of_order(q: u32) -> Result<&'static [RootedTree], TreeError> {
    check_order(q)?;
    let f = forest();
    Ok(&f.trees[f.starts[q as usize]..f.starts[q as usize + 1]])
}

pub fn tree(id: usize) -> &'static RootedTree {
    &forest().trees[id]
}
