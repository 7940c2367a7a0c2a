use std::fmt;

use serde::{Deserialize, Serialize};

/// A vertex label: coordinate `k` of the vertex is bit `k - 1` of the value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vertex(pub u32);

impl Vertex {
    #[inline]
    pub fn get(self) -> u32 {
        self.0
    }

    /// Coordinate `k` (1-indexed), 0 or 1.
    #[inline]
    pub fn coordinate(self, k: u32) -> u32 {
        debug_assert!((1..=32).contains(&k));
        (self.0 >> (k - 1)) & 1
    }

    #[inline]
    pub fn alpha(self, other: Vertex) -> u32 {
        alpha(self, other)
    }

    /// Whether this vertex agrees with `other` on every coordinate `>= k`.
    #[inline]
    pub fn agrees_from(self, other: Vertex, k: u32) -> bool {
        alpha(self, other) < k
    }
}

impl From<u32> for Vertex {
    fn from(v: u32) -> Self {
        Vertex(v)
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Largest coordinate in which `u` and `v` differ, or 0 when they are equal.
#[inline]
pub fn alpha(u: Vertex, v: Vertex) -> u32 {
    32 - (u.0 ^ v.0).leading_zeros()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_examples() {
        assert_eq!(alpha(Vertex(0b1010), Vertex(0b1000)), 2);
        assert_eq!(alpha(Vertex(0b0110), Vertex(0b1110)), 4);
        assert_eq!(alpha(Vertex(77), Vertex(77)), 0);
        assert_eq!(alpha(Vertex(0), Vertex(1 << 29)), 30);
    }

    #[test]
    fn coordinates() {
        let v = Vertex(0b0101);
        assert_eq!(
            (1..=4).map(|k| v.coordinate(k)).collect::<Vec<_>>(),
            vec![1, 0, 1, 0]
        );
        assert!(Vertex(0b0111).agrees_from(v, 3));
        assert!(!Vertex(0b0111).agrees_from(v, 2));
    }
}
