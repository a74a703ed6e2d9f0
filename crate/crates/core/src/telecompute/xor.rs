use crate::{Error, RandomStream, Result};

/// Grouping of bit indices into a binary tree of local XORs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum XorTree {
    Leaf(usize),
    Node(Box<XorTree>, Box<XorTree>),
}

impl XorTree {
    /// Left-leaning chain over `0..n`.
    pub fn chain(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::MalformedGrouping("empty grouping".into()));
        }
        Ok((1..n).fold(XorTree::Leaf(0), |acc, i| {
            XorTree::Node(Box::new(acc), Box::new(XorTree::Leaf(i)))
        }))
    }

    /// A random binary tree whose leaves are a random permutation of `0..n`.
    pub fn random(n: usize, rng: &mut RandomStream) -> Result<Self> {
        if n == 0 {
            return Err(Error::MalformedGrouping("empty grouping".into()));
        }
        let mut idx: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            idx.swap(i, rng.below(i + 1));
        }
        Ok(Self::build(&idx, rng))
    }

    fn build(idx: &[usize], rng: &mut RandomStream) -> Self {
        if idx.len() == 1 {
            return XorTree::Leaf(idx[0]);
        }
        let split = 1 + rng.below(idx.len() - 1);
        XorTree::Node(
            Box::new(Self::build(&idx[..split], rng)),
            Box::new(Self::build(&idx[split..], rng)),
        )
    }

    fn leaves(&self, out: &mut Vec<usize>) {
        match self {
            XorTree::Leaf(i) => out.push(*i),
            XorTree::Node(l, r) => {
                l.leaves(out);
                r.leaves(out);
            }
        }
    }

    fn eval(&self, bits: &[u8]) -> u8 {
        match self {
            XorTree::Leaf(i) => bits[*i] & 1,
            XorTree::Node(l, r) => l.eval(bits) ^ r.eval(bits),
        }
    }
}

/// Parity of `bits`, combined in the order given by `grouping`.
///
/// The grouping must name every index exactly once.
pub fn xor_aggregate(bits: &[u8], grouping: &XorTree) -> Result<u8> {
    if let Some(b) = bits.iter().find(|b| **b > 1) {
        return Err(Error::MalformedGrouping(format!("non-bit value {b}")));
    }
    let mut leaves = Vec::with_capacity(bits.len());
    grouping.leaves(&mut leaves);
    let mut seen = vec![false; bits.len()];
    for &i in &leaves {
        match seen.get_mut(i) {
            None => return Err(Error::MalformedGrouping(format!("index {i} out of range"))),
            Some(true) => return Err(Error::MalformedGrouping(format!("index {i} repeated"))),
            Some(s) => *s = true,
        }
    }
    if let Some(i) = seen.iter().position(|s| !s) {
        return Err(Error::MalformedGrouping(format!("index {i} missing")));
    }
    Ok(grouping.eval(bits))
}
