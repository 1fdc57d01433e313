//! Alphabets and words over involutive generators.
//!
//! Every generator handled by this crate squares to the identity, so a word
//! is just a sequence of letters, inversion is reversal, and free reduction
//! deletes adjacent equal letters.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Index of a generator inside an [`Alphabet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GeneratorId(pub u16);

impl GeneratorId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A finite generating alphabet. Letters may carry a multiindex (the k-subset
/// of {1..n} naming the generator) and always have a printable name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    names: Vec<String>,
    subsets: Option<Vec<Vec<u8>>>,
}

const LATIN: &[u8] = b"abcdefghijklmnopqrstuvwxyz";

impl Alphabet {
    /// Alphabet of `size` plain letters a, b, c, ...
    pub fn latin(size: usize) -> Self {
        assert!(size <= LATIN.len(), "latin alphabet holds at most 26 letters");
        Alphabet {
            names: (0..size).map(|i| (LATIN[i] as char).to_string()).collect(),
            subsets: None,
        }
    }

    /// Alphabet of all k-subsets of {1..n} in lexicographic order.
    ///
    /// When there are at most 26 of them they also answer to the alias
    /// letters a, b, c, ... in the same order, so e.g. for (n, k) = (4, 3)
    /// the names are a = {1,2,3}, b = {1,2,4}, c = {1,3,4}, d = {2,3,4}.
    pub fn subsets(n: usize, k: usize) -> Self {
        assert!(0 < k && k <= n && n <= 9);
        let mut subsets = Vec::new();
        let mut cur: Vec<u8> = (1..=k as u8).collect();
        loop {
            subsets.push(cur.clone());
            // next k-subset in lexicographic order
            let mut i = k;
            loop {
                if i == 0 {
                    let names = subsets
                        .iter()
                        .map(|s| {
                            let digits: String = s.iter().map(|d| d.to_string()).collect();
                            format!("a_{digits}")
                        })
                        .collect();
                    return Alphabet { names, subsets: Some(subsets) };
                }
                i -= 1;
                if cur[i] < (n - k + i + 1) as u8 {
                    cur[i] += 1;
                    for j in i + 1..k {
                        cur[j] = cur[j - 1] + 1;
                    }
                    break;
                }
            }
        }
    }

    pub fn size(&self) -> usize {
        self.names.len()
    }

    /// Canonical multiindex of a generator, if this alphabet carries them.
    pub fn subset(&self, g: GeneratorId) -> Option<&[u8]> {
        self.subsets.as_ref().map(|s| s[g.index()].as_slice())
    }

    /// Printable name: the alias letter when the alphabet is small enough,
    /// the multiindex token otherwise.
    pub fn name(&self, g: GeneratorId) -> String {
        if self.size() <= LATIN.len() {
            (LATIN[g.index()] as char).to_string()
        } else {
            self.names[g.index()].clone()
        }
    }

    /// Full multiindex-style name (`a_123`), independent of alias letters.
    pub fn long_name(&self, g: GeneratorId) -> &str {
        &self.names[g.index()]
    }

    fn letter_id(&self, ch: char) -> Result<GeneratorId, ParseError> {
        let pos = LATIN.iter().position(|&b| b as char == ch);
        match pos {
            Some(i) if i < self.size() => Ok(GeneratorId(i as u16)),
            _ => Err(ParseError::UnknownLetter(ch)),
        }
    }

    fn subset_id(&self, token: &str) -> Result<GeneratorId, ParseError> {
        let subsets = self
            .subsets
            .as_ref()
            .ok_or_else(|| ParseError::BadToken(token.to_string()))?;
        let digits = token.strip_prefix("a_").ok_or_else(|| ParseError::BadToken(token.to_string()))?;
        let mut idx: Vec<u8> = Vec::new();
        for ch in digits.chars() {
            let d = ch.to_digit(10).ok_or_else(|| ParseError::BadToken(token.to_string()))?;
            idx.push(d as u8);
        }
        idx.sort_unstable();
        let k = subsets[0].len();
        if idx.len() != k || idx.windows(2).any(|w| w[0] == w[1]) {
            return Err(ParseError::BadCardinality { token: token.to_string(), expected: k });
        }
        subsets
            .iter()
            .position(|s| *s == idx)
            .map(|i| GeneratorId(i as u16))
            .ok_or_else(|| ParseError::BadToken(token.to_string()))
    }

    /// Parse a word: either a run of alias letters (`dabcd`) or
    /// whitespace-separated multiindex tokens (`a_123 a_124`). The two
    /// notations cannot be mixed.
    pub fn parse(&self, text: &str) -> Result<Word, ParseError> {
        let text = text.trim();
        if text.is_empty() || text == "1" {
            return Ok(Word::empty());
        }
        let tokens: Vec<&str> = text.split_whitespace().collect();
        let has_multi = tokens.iter().any(|t| t.contains('_'));
        let mut letters = Vec::new();
        if has_multi {
            for t in tokens {
                if !t.contains('_') {
                    return Err(ParseError::MixedNotation(t.to_string()));
                }
                letters.push(self.subset_id(t)?);
            }
        } else {
            for t in tokens {
                for ch in t.chars() {
                    letters.push(self.letter_id(ch)?);
                }
            }
        }
        Ok(Word::from_letters(letters))
    }

    /// Inverse of [`Alphabet::parse`] on reduced words. The empty word
    /// prints as `1`.
    pub fn print(&self, w: &Word) -> String {
        if w.is_empty() {
            return "1".to_string();
        }
        if self.size() <= LATIN.len() {
            w.letters().iter().map(|&g| self.name(g)).collect()
        } else {
            w.letters().iter().map(|&g| self.name(g)).collect::<Vec<_>>().join(" ")
        }
    }

    /// Word as an array of generator names, the JSON wire form.
    pub fn names_of(&self, w: &Word) -> Vec<String> {
        w.letters().iter().map(|&g| self.name(g)).collect()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("unknown letter '{0}'")]
    UnknownLetter(char),
    #[error("cannot parse token '{0}'")]
    BadToken(String),
    #[error("token '{token}' does not name a {expected}-element multiindex")]
    BadCardinality { token: String, expected: usize },
    #[error("token '{0}' mixes letter and multiindex notation")]
    MixedNotation(String),
}

/// A word over involutive generators.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<GeneratorId>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn from_letters(letters: Vec<GeneratorId>) -> Self {
        Word(letters)
    }

    pub fn single(g: GeneratorId) -> Self {
        Word(vec![g])
    }

    pub fn letters(&self) -> &[GeneratorId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// True when no two adjacent letters are equal.
    pub fn is_reduced(&self) -> bool {
        self.0.windows(2).all(|w| w[0] != w[1])
    }

    /// Delete adjacent equal letters to a fixed point.
    pub fn free_reduce(&self) -> Word {
        let mut stack: Vec<GeneratorId> = Vec::with_capacity(self.0.len());
        for &g in &self.0 {
            if stack.last() == Some(&g) {
                stack.pop();
            } else {
                stack.push(g);
            }
        }
        Word(stack)
    }

    /// Reversal; over involutions this is the group inverse.
    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().copied().collect())
    }

    /// Concatenation without reduction.
    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// Concatenation followed by free reduction.
    pub fn mul(&self, other: &Word) -> Word {
        self.concat(other).free_reduce()
    }

    /// Number of occurrences of a letter.
    pub fn count(&self, g: GeneratorId) -> usize {
        self.0.iter().filter(|&&x| x == g).count()
    }

    pub fn rotate_left(&self, r: usize) -> Word {
        if self.0.is_empty() {
            return Word::empty();
        }
        let r = r % self.0.len();
        let mut v = self.0[r..].to_vec();
        v.extend_from_slice(&self.0[..r]);
        Word(v)
    }

    /// Peel equal first/last letters off the reduced word, returning the
    /// cyclically reduced core and the conjugator: `self` equals
    /// `conj.inverse() * core * conj` after free reduction.
    pub fn cyclic_reduce(&self) -> (CyclicWord, Word) {
        let mut core = self.free_reduce().0;
        let mut conj = Vec::new();
        while core.len() >= 2 && core.first() == core.last() {
            let g = core.pop().unwrap();
            core.remove(0);
            conj.push(g);
        }
        conj.reverse();
        (CyclicWord::from_reduced(Word(core)).expect("core is cyclically reduced"), Word(conj))
    }
}

impl fmt::Display for Word {
    /// Debug-ish display using plain latin letters; for proper printing go
    /// through [`Alphabet::print`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "1");
        }
        for &g in &self.0 {
            if g.index() < LATIN.len() {
                write!(f, "{}", LATIN[g.index()] as char)?;
            } else {
                write!(f, "[{}]", g.0)?;
            }
        }
        Ok(())
    }
}

/// A cyclically reduced word considered up to rotation, stored as its
/// lexicographically least rotation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CyclicWord(Word);

#[derive(Debug, Error, PartialEq, Eq)]
#[error("word is not cyclically reduced")]
pub struct NotCyclicallyReduced;

impl CyclicWord {
    /// Wrap a word that is already cyclically reduced (freely reduced and,
    /// unless of length <= 1, with distinct first and last letters).
    pub fn from_reduced(w: Word) -> Result<Self, NotCyclicallyReduced> {
        let ok = w.is_reduced() && (w.len() <= 1 || w.0.first() != w.0.last());
        if !ok {
            return Err(NotCyclicallyReduced);
        }
        let n = w.len();
        let least = (0..n).map(|r| w.rotate_left(r)).min().unwrap_or_else(Word::empty);
        Ok(CyclicWord(least))
    }

    /// The stored least rotation.
    pub fn representative(&self) -> &Word {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// All rotations, deduplicated (a word of period p has p of them).
    pub fn rotations(&self) -> Vec<Word> {
        if self.0.is_empty() {
            return vec![Word::empty()];
        }
        let mut out = Vec::new();
        for r in 0..self.0.len() {
            let w = self.0.rotate_left(r);
            if !out.contains(&w) {
                out.push(w);
            }
        }
        out
    }
}

/// Cyclic permutations of a cyclically reduced word.
pub fn cyclic_permutations(w: &CyclicWord) -> Vec<Word> {
    w.rotations()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(alpha: &Alphabet, s: &str) -> Word {
        alpha.parse(s).unwrap()
    }

    #[test]
    fn free_reduce_examples() {
        let a = Alphabet::latin(4);
        assert_eq!(w(&a, "aabc").free_reduce(), w(&a, "bc"));
        assert_eq!(Word::empty().free_reduce(), Word::empty());
        assert_eq!(w(&a, "abccba").free_reduce(), Word::empty());
    }

    #[test]
    fn free_reduce_is_idempotent_and_reduced() {
        let a = Alphabet::latin(3);
        for s in ["abcabc", "aabbcc", "abccbaabc", "cabbacbb"] {
            let r = w(&a, s).free_reduce();
            assert!(r.is_reduced());
            assert_eq!(r.free_reduce(), r);
            assert!(r.len() <= s.len());
        }
    }

    #[test]
    fn involutive_inverse_law() {
        let a = Alphabet::latin(4);
        let u = w(&a, "dacbbcad");
        assert_eq!(u.mul(&u.inverse()), Word::empty());
    }

    #[test]
    fn cyclic_reduce_examples() {
        let a = Alphabet::latin(4);
        let (core, conj) = w(&a, "aba").cyclic_reduce();
        assert_eq!(core.representative(), &w(&a, "b"));
        assert_eq!(conj, w(&a, "a"));

        let (core, conj) = w(&a, "abc").cyclic_reduce();
        assert_eq!(core.representative(), &w(&a, "abc"));
        assert!(conj.is_empty());

        let (core, conj) = w(&a, "cabac").cyclic_reduce();
        assert_eq!(core.representative(), &w(&a, "b"));
        assert_eq!(conj, w(&a, "ac"));
        // re-expansion
        let back = conj.inverse().mul(core.representative()).mul(&conj);
        assert_eq!(back, w(&a, "cabac").free_reduce());
    }

    #[test]
    fn cyclic_permutations_examples() {
        let a = Alphabet::latin(2);
        let cw = CyclicWord::from_reduced(w(&a, "ab")).unwrap();
        let rots = cyclic_permutations(&cw);
        assert_eq!(rots.len(), 2);
        assert!(rots.contains(&w(&a, "ab")) && rots.contains(&w(&a, "ba")));

        let empty = CyclicWord::from_reduced(Word::empty()).unwrap();
        assert_eq!(cyclic_permutations(&empty), vec![Word::empty()]);

        assert!(CyclicWord::from_reduced(w(&a, "aba")).is_err());
    }

    #[test]
    fn period_collapse() {
        let a = Alphabet::latin(2);
        let cw = CyclicWord::from_reduced(w(&a, "abab")).unwrap();
        assert_eq!(cyclic_permutations(&cw).len(), 2);
    }

    #[test]
    fn parse_and_print() {
        let g43 = Alphabet::subsets(4, 3);
        assert_eq!(g43.print(&w(&g43, "dabcd")), "dabcd");
        // Example: a_123 is the alias a, a_124 the alias b.
        let u = g43.parse("a_123 a_124").unwrap();
        assert_eq!(g43.print(&u), "ab");
        assert_eq!(g43.parse("1").unwrap(), Word::empty());
        assert_eq!(g43.print(&Word::empty()), "1");
        assert!(matches!(g43.parse("z9"), Err(ParseError::UnknownLetter('z'))));
        assert!(g43.parse("a_12").is_err());
        assert!(g43.parse("a_123 b").is_err());
    }

    #[test]
    fn subset_alphabet_order_matches_aliases() {
        let g43 = Alphabet::subsets(4, 3);
        assert_eq!(g43.size(), 4);
        assert_eq!(g43.subset(GeneratorId(0)).unwrap(), &[1, 2, 3]);
        assert_eq!(g43.subset(GeneratorId(1)).unwrap(), &[1, 2, 4]);
        assert_eq!(g43.subset(GeneratorId(2)).unwrap(), &[1, 3, 4]);
        assert_eq!(g43.subset(GeneratorId(3)).unwrap(), &[2, 3, 4]);
        let g52 = Alphabet::subsets(5, 2);
        assert_eq!(g52.size(), 10);
    }

    #[test]
    fn least_rotation_is_canonical() {
        let a = Alphabet::latin(3);
        let u = CyclicWord::from_reduced(w(&a, "cab")).unwrap();
        let v = CyclicWord::from_reduced(w(&a, "abc")).unwrap();
        assert_eq!(u, v);
        assert_eq!(u.representative(), &w(&a, "abc"));
    }
}
