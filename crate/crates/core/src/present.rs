//! Presentations of the involutive tetrahedron groups and their relatives.
//!
//! `generate_gnk(n, k)` builds the standard presentation: one involutive
//! generator per k-subset of {1..n}, a length-2(k+1) tetrahedron relator per
//! ordered (k+1)-tuple modulo reversal, and far commutativity for subsets
//! meeting in fewer than k-1 points. The module also emits the conjectured
//! presentation of the last-letter-free subgroup, checks homomorphisms
//! against an arbitrary word-problem oracle, and runs a bounded
//! breadth-first triviality search used as an independent cross-check
//! oracle elsewhere in the crate.

use std::collections::HashMap;

use itertools::Itertools;
use serde::Serialize;
use thiserror::Error;

use crate::cert::{CertStep, Certificate};
use crate::word::{Alphabet, GeneratorId, Word};

#[derive(Debug, Clone)]
pub struct Presentation {
    pub alphabet: Alphabet,
    pub relators: Vec<Word>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PresentError {
    #[error("need n > k >= 2, got n = {n}, k = {k}")]
    BadParameters { n: usize, k: usize },
    #[error("need k >= 3 for the conjectured subgroup presentation, got {k}")]
    BadSubgroupRank { k: usize },
}

impl Presentation {
    /// Relators of length 2(k+1) and above; excludes the squares.
    pub fn long_relators(&self) -> impl Iterator<Item = &Word> {
        self.relators.iter().filter(|r| r.len() > 2)
    }

    pub fn square_count(&self) -> usize {
        self.relators.iter().filter(|r| r.len() == 2).count()
    }

    /// JSON wire form: `{generators: [...], relators: [[names], ...]}`.
    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct GenEntry {
            name: String,
            #[serde(skip_serializing_if = "Option::is_none")]
            indices: Option<Vec<u8>>,
        }
        let generators: Vec<GenEntry> = (0..self.alphabet.size())
            .map(|i| {
                let g = GeneratorId(i as u16);
                GenEntry {
                    name: self.alphabet.name(g),
                    indices: self.alphabet.subset(g).map(|s| s.to_vec()),
                }
            })
            .collect();
        let relators: Vec<Vec<String>> =
            self.relators.iter().map(|r| self.alphabet.names_of(r)).collect();
        serde_json::json!({
            "generators": serde_json::to_value(generators).unwrap(),
            "relators": relators,
        })
    }
}

/// Number of tetrahedron relators the standard presentation carries.
pub fn tetrahedron_relator_count(n: usize, k: usize) -> usize {
    let fact = |m: usize| (1..=m).product::<usize>();
    let choose = |n: usize, r: usize| {
        if r > n {
            0
        } else {
            (0..r).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
        }
    };
    fact(k + 1) * choose(n, k + 1) / 2
}

/// The standard presentation of the group on k-subset generators of {1..n}.
pub fn generate_gnk(n: usize, k: usize) -> Result<Presentation, PresentError> {
    if !(2 <= k && k < n) {
        return Err(PresentError::BadParameters { n, k });
    }
    let alphabet = Alphabet::subsets(n, k);
    let id_of: HashMap<Vec<u8>, GeneratorId> = (0..alphabet.size())
        .map(|i| {
            let g = GeneratorId(i as u16);
            (alphabet.subset(g).unwrap().to_vec(), g)
        })
        .collect();

    let mut relators = Vec::new();
    for i in 0..alphabet.size() {
        let g = GeneratorId(i as u16);
        relators.push(Word::from_letters(vec![g, g]));
    }

    // Tetrahedron relators: for each (k+1)-subset U and each ordering of U
    // modulo reversal, the relation L = reverse(L) with L reading the
    // complements in order; as a relator word over involutions this is L*L.
    for u in (1..=n as u8).combinations(k + 1) {
        for perm in u.iter().copied().permutations(k + 1) {
            if perm[0] > perm[k] {
                continue; // reversal gives the same relation
            }
            let left: Vec<GeneratorId> = perm
                .iter()
                .map(|&drop| {
                    let m: Vec<u8> = u.iter().copied().filter(|&x| x != drop).collect();
                    id_of[&m]
                })
                .collect();
            let mut letters = left.clone();
            letters.extend_from_slice(&left);
            relators.push(Word::from_letters(letters));
        }
    }

    // Far commutativity, possible only when n > k + 1.
    for i in 0..alphabet.size() {
        for j in i + 1..alphabet.size() {
            let a = alphabet.subset(GeneratorId(i as u16)).unwrap();
            let b = alphabet.subset(GeneratorId(j as u16)).unwrap();
            let inter = a.iter().filter(|x| b.contains(x)).count();
            if inter < k - 1 {
                let (gi, gj) = (GeneratorId(i as u16), GeneratorId(j as u16));
                relators.push(Word::from_letters(vec![gi, gj, gi, gj]));
            }
        }
    }

    let p = Presentation { alphabet, relators };
    debug_assert!(p.relators.iter().all(|r| r.free_reduce() == *r || r.len() == 2));
    Ok(p)
}

/// The conjectured presentation of the subgroup generated by the first k
/// letters: squares plus commutators of squared pairs over all partitions
/// of four distinct indices. Proven for k = 4; for k = 3 there are no
/// commutators and the group is the free product of three involutions.
pub fn generate_hk_conjectured(k: usize) -> Result<Presentation, PresentError> {
    if k < 3 {
        return Err(PresentError::BadSubgroupRank { k });
    }
    assert!(k <= 26);
    let alphabet = Alphabet::latin(k);
    let mut relators = Vec::new();
    for i in 0..k {
        let g = GeneratorId(i as u16);
        relators.push(Word::from_letters(vec![g, g]));
    }
    for quad in (0..k as u16).combinations(4) {
        let (i, j, m, l) = (quad[0], quad[1], quad[2], quad[3]);
        for (p, q, r, s) in [(i, j, m, l), (i, m, j, l), (i, l, j, m)] {
            relators.push(commutator_of_squared_pairs(p, q, r, s));
        }
    }
    Ok(Presentation { alphabet, relators })
}

/// The word `[(g_p g_q)^2, (g_r g_s)^2]` of length 16.
fn commutator_of_squared_pairs(p: u16, q: u16, r: u16, s: u16) -> Word {
    let pair = |x: u16, y: u16| vec![GeneratorId(x), GeneratorId(y), GeneratorId(x), GeneratorId(y)];
    let mut letters = pair(p, q);
    letters.extend(pair(r, s));
    letters.extend(pair(q, p));
    letters.extend(pair(s, r));
    Word::from_letters(letters)
}

/// The reduced presentation of the (4,3) group: squares plus the three
/// tetrahedron relators (abcd)^2, (acdb)^2, (adbc)^2, which already imply
/// the full set of twelve.
pub fn g43_reduced_presentation() -> Presentation {
    let alphabet = Alphabet::subsets(4, 3);
    let mut relators = Vec::new();
    for i in 0..4 {
        let g = GeneratorId(i as u16);
        relators.push(Word::from_letters(vec![g, g]));
    }
    for s in ["abcdabcd", "acdbacdb", "adbcadbc"] {
        relators.push(alphabet.parse(s).unwrap());
    }
    Presentation { alphabet, relators }
}

/// A homomorphism candidate out of a presented group: one image word per
/// generator, evaluated through a triviality oracle for the target.
pub struct HomomorphismSpec<'a> {
    pub source: &'a Presentation,
    pub images: Vec<Word>,
    pub target_trivial: &'a dyn Fn(&Word) -> bool,
}

/// Check that every relator maps to a trivial word; on failure returns the
/// first offending relator.
pub fn verify_homomorphism(spec: &HomomorphismSpec) -> Result<(), Word> {
    assert_eq!(spec.images.len(), spec.source.alphabet.size(), "every generator needs an image");
    for r in &spec.source.relators {
        let image = apply_images(&spec.images, r);
        if !(spec.target_trivial)(&image) {
            return Err(r.clone());
        }
    }
    Ok(())
}

/// Substitute generator images into a word (no reduction).
pub fn apply_images(images: &[Word], w: &Word) -> Word {
    let mut letters = Vec::new();
    for &g in w.letters() {
        letters.extend_from_slice(images[g.index()].letters());
    }
    Word::from_letters(letters)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TrivialSearch {
    Trivial(Certificate),
    Unknown,
}

impl TrivialSearch {
    pub fn is_trivial(&self) -> bool {
        matches!(self, TrivialSearch::Trivial(_))
    }
}

/// One precomputed rewrite rule together with the step template that
/// certifies it.
struct Rule {
    lhs: Word,
    rhs: Word,
    template: CertStep,
}

fn rewrite_rules(p: &Presentation) -> Vec<Rule> {
    let mut rules = Vec::new();
    let mut seen: HashMap<(Word, Word), ()> = HashMap::new();
    for (ri, r) in p.relators.iter().enumerate() {
        if r.len() <= 2 {
            continue; // squares are the free reduction itself
        }
        for reversed in [false, true] {
            let base = if reversed { r.inverse() } else { r.clone() };
            for rotation in 0..base.len() {
                let rot = base.rotate_left(rotation);
                for split in 1..=rot.len() {
                    let lhs = Word::from_letters(rot.letters()[..split].to_vec());
                    let rhs = Word::from_letters(rot.letters()[split..].to_vec()).inverse();
                    if lhs == rhs {
                        continue;
                    }
                    if seen.insert((lhs.clone(), rhs.clone()), ()).is_none() {
                        rules.push(Rule {
                            lhs,
                            rhs,
                            template: CertStep::Rewrite { relator: ri, rotation, reversed, split, position: 0 },
                        });
                    }
                }
            }
        }
    }
    rules
}

fn expand(rules: &[Rule], w: &Word, max_len: usize) -> Vec<(Word, CertStep)> {
    let mut out = Vec::new();
    for rule in rules {
        let l = rule.lhs.len();
        if l > w.len() {
            continue;
        }
        for pos in 0..=w.len() - l {
            if &w.letters()[pos..pos + l] != rule.lhs.letters() {
                continue;
            }
            let mut letters = w.letters()[..pos].to_vec();
            letters.extend_from_slice(rule.rhs.letters());
            letters.extend_from_slice(&w.letters()[pos + l..]);
            let next = Word::from_letters(letters).free_reduce();
            if next.len() > max_len {
                continue;
            }
            let CertStep::Rewrite { relator, rotation, reversed, split, .. } = rule.template else {
                unreachable!()
            };
            out.push((next, CertStep::Rewrite { relator, rotation, reversed, split, position: pos }));
        }
    }
    out
}

/// Bounded breadth-first triviality search by relator rewriting.
///
/// Explores freely reduced words reachable from `w` by single relator
/// applications, up to `max_steps` expanded states and words of at most
/// `max_len` letters. A `Trivial` answer carries a derivation certificate;
/// exhaustion yields `Unknown`, never a non-triviality claim.
pub fn naive_trivial_search(p: &Presentation, w: &Word, max_steps: usize, max_len: usize) -> TrivialSearch {
    naive_trivial_search_seq(p, w, max_steps, max_len)
}

fn reconstruct(parents: &HashMap<Word, (Word, CertStep)>, end: &Word) -> Certificate {
    let mut steps = Vec::new();
    let mut cur = end.clone();
    while let Some((prev, step)) = parents.get(&cur) {
        steps.push(step.clone());
        cur = prev.clone();
    }
    steps.reverse();
    Certificate { steps }
}

/// Sequential implementation of [`naive_trivial_search`].
pub fn naive_trivial_search_seq(p: &Presentation, w: &Word, max_steps: usize, max_len: usize) -> TrivialSearch {
    let start = w.free_reduce();
    if start.is_empty() {
        return TrivialSearch::Trivial(Certificate::empty());
    }
    let rules = rewrite_rules(p);
    let mut parents: HashMap<Word, (Word, CertStep)> = HashMap::new();
    let mut frontier = vec![start.clone()];
    let mut expanded = 0usize;
    while !frontier.is_empty() && expanded < max_steps {
        let mut next_frontier = Vec::new();
        for cur in frontier {
            if expanded >= max_steps {
                break;
            }
            expanded += 1;
            for (next, step) in expand(&rules, &cur, max_len) {
                if next == start || parents.contains_key(&next) {
                    continue;
                }
                parents.insert(next.clone(), (cur.clone(), step));
                if next.is_empty() {
                    return TrivialSearch::Trivial(reconstruct(&parents, &next));
                }
                next_frontier.push(next);
            }
        }
        frontier = next_frontier;
    }
    TrivialSearch::Unknown
}

/// Parallel implementation of [`naive_trivial_search`]: the frontier is
/// expanded level-synchronously with a deterministic merge, so the verdict
/// and certificate match the sequential run level by level.
#[cfg(feature = "parallel")]
pub fn naive_trivial_search_par(p: &Presentation, w: &Word, max_steps: usize, max_len: usize) -> TrivialSearch {
    use rayon::prelude::*;

    let start = w.free_reduce();
    if start.is_empty() {
        return TrivialSearch::Trivial(Certificate::empty());
    }
    let rules = rewrite_rules(p);
    let mut parents: HashMap<Word, (Word, CertStep)> = HashMap::new();
    let mut frontier = vec![start.clone()];
    let mut expanded = 0usize;
    while !frontier.is_empty() && expanded < max_steps {
        let budget = max_steps - expanded;
        let level: Vec<Word> = frontier.into_iter().take(budget).collect();
        expanded += level.len();
        let batches: Vec<(Word, Vec<(Word, CertStep)>)> = level
            .par_iter()
            .map(|cur| (cur.clone(), expand(&rules, cur, max_len)))
            .collect();
        let mut next_frontier = Vec::new();
        for (cur, batch) in batches {
            for (next, step) in batch {
                if next == start || parents.contains_key(&next) {
                    continue;
                }
                parents.insert(next.clone(), (cur.clone(), step));
                if next.is_empty() {
                    return TrivialSearch::Trivial(reconstruct(&parents, &next));
                }
                next_frontier.push(next);
            }
        }
        frontier = next_frontier;
    }
    TrivialSearch::Unknown
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cert::check_trivial;

    #[test]
    fn counts_match_formula() {
        // (4,3) -> 12, (5,4) -> 60, plus the whole desk-scale range.
        assert_eq!(tetrahedron_relator_count(4, 3), 12);
        assert_eq!(tetrahedron_relator_count(5, 4), 60);
        for n in 3..=7 {
            for k in 2..n {
                let p = generate_gnk(n, k).unwrap();
                let tetra = p.relators.iter().filter(|r| r.len() == 2 * (k + 1)).count();
                let expected = tetrahedron_relator_count(n, k);
                // Far commutativity relators have length 4 = 2(k+1) only
                // when k = 1, which is out of range here.
                assert_eq!(tetra, expected, "tetrahedron count for ({n},{k})");
                assert_eq!(p.square_count(), p.alphabet.size());
            }
        }
    }

    #[test]
    fn g32_matches_small_example() {
        let p = generate_gnk(3, 2).unwrap();
        assert_eq!(p.alphabet.size(), 3);
        assert_eq!(tetrahedron_relator_count(3, 2), 3);
        // No far commutativity when n = k + 1.
        assert!(p.relators.iter().all(|r| r.len() == 2 || r.len() == 6));
    }

    #[test]
    fn g54_has_no_far_commutativity() {
        let p = generate_gnk(5, 4).unwrap();
        assert_eq!(p.alphabet.size(), 5);
        assert!(p.relators.iter().all(|r| r.len() == 2 || r.len() == 10));
        assert_eq!(p.long_relators().count(), 60);
    }

    #[test]
    fn far_commutativity_appears_for_wide_gaps() {
        let p = generate_gnk(5, 2).unwrap();
        let comm = p.relators.iter().filter(|r| r.len() == 4).count();
        // Pairs of disjoint 2-subsets of {1..5}: 15 choose pairs meeting in
        // fewer than 1 point, i.e. disjoint: 5!/(2!2!1!)/2 = 15.
        assert_eq!(comm, 15);
    }

    #[test]
    fn relators_are_reduced_words() {
        let p = generate_gnk(6, 3).unwrap();
        for r in p.long_relators() {
            assert_eq!(&r.free_reduce(), r);
        }
    }

    #[test]
    fn bad_parameters() {
        assert!(generate_gnk(3, 3).is_err());
        assert!(generate_gnk(2, 1).is_err());
        assert!(generate_hk_conjectured(2).is_err());
    }

    #[test]
    fn conjectured_subgroup_presentations() {
        let h4 = generate_hk_conjectured(4).unwrap();
        let comm: Vec<&Word> = h4.relators.iter().filter(|r| r.len() == 16).collect();
        assert_eq!(comm.len(), 3);
        assert_eq!(h4.alphabet.print(comm[0]), "ababcdcdbabadcdc");
        assert_eq!(h4.alphabet.print(comm[1]), "acacbdbdcacadbdb");
        assert_eq!(h4.alphabet.print(comm[2]), "adadbcbcdadacbcb");

        let h3 = generate_hk_conjectured(3).unwrap();
        assert_eq!(h3.relators.len(), 3); // squares only

        let h5 = generate_hk_conjectured(5).unwrap();
        assert_eq!(h5.relators.iter().filter(|r| r.len() == 16).count(), 15);
    }

    #[test]
    fn homomorphism_checks() {
        let h4 = generate_hk_conjectured(4).unwrap();

        // Retraction killing the last letter, onto the free product of
        // three involutions.
        let a3 = Alphabet::latin(3);
        let images = vec![
            a3.parse("a").unwrap(),
            a3.parse("b").unwrap(),
            a3.parse("c").unwrap(),
            Word::empty(),
        ];
        let oracle = |w: &Word| w.free_reduce().is_empty();
        let spec = HomomorphismSpec { source: &h4, images, target_trivial: &oracle };
        assert!(verify_homomorphism(&spec).is_ok());

        // Everything to the involution of a two-element group.
        let g43 = generate_gnk(4, 3).unwrap();
        let a1 = Alphabet::latin(1);
        let images = vec![a1.parse("a").unwrap(); 4];
        let parity = |w: &Word| w.len() % 2 == 0;
        let spec = HomomorphismSpec { source: &g43, images, target_trivial: &parity };
        assert!(verify_homomorphism(&spec).is_ok());

        // d -> a is not a retraction; the first commutator already fails.
        let images = vec![
            a3.parse("a").unwrap(),
            a3.parse("b").unwrap(),
            a3.parse("c").unwrap(),
            a3.parse("a").unwrap(),
        ];
        let spec = HomomorphismSpec { source: &h4, images, target_trivial: &oracle };
        let witness = verify_homomorphism(&spec).unwrap_err();
        assert_eq!(h4.alphabet.print(&witness), "ababcdcdbabadcdc");
    }

    #[test]
    fn bfs_oracle_finds_relator_words() {
        let p = generate_gnk(4, 3).unwrap();
        let w = p.alphabet.parse("abcdabcd").unwrap();
        let out = naive_trivial_search(&p, &w, 20_000, 16);
        let TrivialSearch::Trivial(cert) = out else { panic!("expected trivial") };
        check_trivial(&p, &w, &cert).unwrap();
    }

    #[test]
    fn bfs_oracle_empty_word() {
        let p = generate_gnk(4, 3).unwrap();
        let out = naive_trivial_search(&p, &Word::empty(), 10, 4);
        assert_eq!(out, TrivialSearch::Trivial(Certificate::empty()));
    }

    #[test]
    fn bfs_oracle_gives_up_on_generators() {
        let p = generate_gnk(4, 3).unwrap();
        let w = p.alphabet.parse("a").unwrap();
        assert_eq!(naive_trivial_search(&p, &w, 2_000, 10), TrivialSearch::Unknown);
    }

    #[test]
    fn reduced_g43_presentation_proves_full_relators() {
        let reduced = g43_reduced_presentation();
        let full = generate_gnk(4, 3).unwrap();
        // Spot-check a few of the twelve full tetrahedron relators inside
        // the three-relator presentation.
        for r in full.long_relators().take(4) {
            let out = naive_trivial_search(&reduced, r, 60_000, 14);
            assert!(out.is_trivial(), "relator {} not derived", full.alphabet.print(r));
        }
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn parallel_bfs_agrees() {
        let p = generate_gnk(4, 3).unwrap();
        for s in ["abcdabcd", "a", "dabcdcba"] {
            let w = p.alphabet.parse(s).unwrap();
            let a = naive_trivial_search_seq(&p, &w, 20_000, 16).is_trivial();
            let b = naive_trivial_search_par(&p, &w, 20_000, 16).is_trivial();
            assert_eq!(a, b);
        }
    }
}
