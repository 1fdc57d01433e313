//! Machine-checkable derivation certificates.
//!
//! A certificate is a list of rewrite steps over a fixed presentation. Each
//! rewrite names a relator, a rotation, an optional reversal, a split point
//! and a position; the checker reconstructs the rule from the presentation
//! itself, so a certificate can be validated without trusting the solver
//! that produced it. States are kept freely reduced between steps, which is
//! sound because every generator carries its square as a relator.
//!
//! Cyclic-shift steps rotate the current word. A rotation replaces the word
//! by a conjugate, so certificates containing shifts prove triviality only;
//! equality claims must be shift-free.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::present::Presentation;
use crate::word::Word;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CertStep {
    /// Replace `u` by `u'` at `position`, where `u` is the first `split`
    /// letters of relator number `relator` rotated left by `rotation`
    /// (reversed first when `reversed` is set) and `u'` is the reversal of
    /// the remaining letters.
    Rewrite {
        relator: usize,
        rotation: usize,
        reversed: bool,
        split: usize,
        position: usize,
    },
    /// Rotate the current word left by `offset`.
    CyclicShift { offset: usize },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub steps: Vec<CertStep>,
}

impl Certificate {
    pub fn empty() -> Self {
        Certificate { steps: Vec::new() }
    }

    pub fn push(&mut self, step: CertStep) {
        self.steps.push(step);
    }

    pub fn extend(&mut self, other: Certificate) {
        self.steps.extend(other.steps);
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn has_shifts(&self) -> bool {
        self.steps.iter().any(|s| matches!(s, CertStep::CyclicShift { .. }))
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CertError {
    #[error("step {step}: relator index {relator} out of range")]
    BadRelator { step: usize, relator: usize },
    #[error("step {step}: split {split} exceeds relator length {len}")]
    BadSplit { step: usize, split: usize, len: usize },
    #[error("step {step}: left-hand side does not match word at position {position}")]
    Mismatch { step: usize, position: usize },
    #[error("step {step}: position {position} out of range")]
    BadPosition { step: usize, position: usize },
    #[error("final word differs from claimed result")]
    WrongResult,
    #[error("certificate uses cyclic shifts, which only prove triviality")]
    ShiftInEqualityProof,
}

/// The rule encoded by a rewrite step: `(lhs, rhs)` with `lhs -> rhs`.
pub fn step_rule(p: &Presentation, step: &CertStep) -> Option<(Word, Word)> {
    match *step {
        CertStep::Rewrite { relator, rotation, reversed, split, .. } => {
            let r = p.relators.get(relator)?;
            let r = if reversed { r.inverse() } else { r.clone() };
            let r = r.rotate_left(rotation);
            if split > r.len() {
                return None;
            }
            let lhs = Word::from_letters(r.letters()[..split].to_vec());
            let rhs = Word::from_letters(r.letters()[split..].to_vec()).inverse();
            Some((lhs, rhs))
        }
        CertStep::CyclicShift { .. } => None,
    }
}

/// Apply one step to a freely reduced word, returning the next freely
/// reduced word.
pub fn apply_step(p: &Presentation, state: &Word, index: usize, step: &CertStep) -> Result<Word, CertError> {
    match *step {
        CertStep::CyclicShift { offset } => Ok(state.rotate_left(offset).free_reduce()),
        CertStep::Rewrite { relator, split, position, .. } => {
            if relator >= p.relators.len() {
                return Err(CertError::BadRelator { step: index, relator });
            }
            let (lhs, rhs) = step_rule(p, step).ok_or(CertError::BadSplit {
                step: index,
                split,
                len: p.relators[relator].len(),
            })?;
            if position + lhs.len() > state.len() {
                return Err(CertError::BadPosition { step: index, position });
            }
            if &state.letters()[position..position + lhs.len()] != lhs.letters() {
                return Err(CertError::Mismatch { step: index, position });
            }
            let mut letters = state.letters()[..position].to_vec();
            letters.extend_from_slice(rhs.letters());
            letters.extend_from_slice(&state.letters()[position + lhs.len()..]);
            Ok(Word::from_letters(letters).free_reduce())
        }
    }
}

/// Replay a certificate from `start`, returning the final reduced word.
pub fn replay(p: &Presentation, start: &Word, cert: &Certificate) -> Result<Word, CertError> {
    let mut state = start.free_reduce();
    for (i, step) in cert.steps.iter().enumerate() {
        state = apply_step(p, &state, i, step)?;
    }
    Ok(state)
}

/// Validate a proof that `from` and `to` are equal in the presented group.
pub fn check_equality(p: &Presentation, from: &Word, to: &Word, cert: &Certificate) -> Result<(), CertError> {
    if cert.has_shifts() {
        return Err(CertError::ShiftInEqualityProof);
    }
    let end = replay(p, from, cert)?;
    if end == to.free_reduce() {
        Ok(())
    } else {
        Err(CertError::WrongResult)
    }
}

/// Validate a proof that `w` is trivial in the presented group. Cyclic
/// shifts are allowed here: rotations preserve triviality.
pub fn check_trivial(p: &Presentation, w: &Word, cert: &Certificate) -> Result<(), CertError> {
    let end = replay(p, w, cert)?;
    if end.is_empty() {
        Ok(())
    } else {
        Err(CertError::WrongResult)
    }
}

/// Find a rewrite step realizing `lhs -> rhs` at `position`, i.e. a relator
/// whose rotation (possibly after reversal) equals `lhs * rhs.inverse()`.
pub fn find_rewrite(p: &Presentation, lhs: &Word, rhs: &Word, position: usize) -> Option<CertStep> {
    let composite = lhs.concat(&rhs.inverse());
    for (ri, r) in p.relators.iter().enumerate() {
        if r.len() != composite.len() {
            continue;
        }
        for reversed in [false, true] {
            let base = if reversed { r.inverse() } else { r.clone() };
            for rotation in 0..base.len().max(1) {
                if base.rotate_left(rotation) == composite {
                    return Some(CertStep::Rewrite {
                        relator: ri,
                        rotation,
                        reversed,
                        split: lhs.len(),
                        position,
                    });
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::present::generate_gnk;

    #[test]
    fn rewrite_and_replay() {
        let p = generate_gnk(4, 3).unwrap();
        let w = p.alphabet.parse("dabcd").unwrap();
        let target = p.alphabet.parse("cba").unwrap();
        // dabcd = cba comes from one tetrahedron relator application plus
        // the free cancellation of the trailing dd.
        let lhs = p.alphabet.parse("dabc").unwrap();
        let rhs = p.alphabet.parse("cbad").unwrap();
        let step = find_rewrite(&p, &lhs, &rhs, 0).expect("tetrahedron rule exists");
        let mut cert = Certificate::empty();
        cert.push(step);
        assert_eq!(replay(&p, &w, &cert).unwrap(), target);
        check_equality(&p, &w, &target, &cert).unwrap();
    }

    #[test]
    fn corrupted_step_is_rejected() {
        let p = generate_gnk(4, 3).unwrap();
        let w = p.alphabet.parse("dabcd").unwrap();
        let lhs = p.alphabet.parse("dabc").unwrap();
        let rhs = p.alphabet.parse("cbad").unwrap();
        let step = find_rewrite(&p, &lhs, &rhs, 0).unwrap();
        let CertStep::Rewrite { relator, rotation, reversed, split, position } = step else {
            unreachable!()
        };
        // Point the step at a different relator of the same length.
        let corrupted = CertStep::Rewrite {
            relator: (relator + 1) % p.relators.len(),
            rotation,
            reversed,
            split,
            position,
        };
        let cert = Certificate { steps: vec![corrupted] };
        let target = p.alphabet.parse("cba").unwrap();
        assert!(check_equality(&p, &w, &target, &cert).is_err());
    }

    #[test]
    fn shifts_prove_triviality_only() {
        let p = generate_gnk(4, 3).unwrap();
        let w = p.alphabet.parse("ab").unwrap();
        let cert = Certificate { steps: vec![CertStep::CyclicShift { offset: 1 }] };
        assert!(matches!(
            check_equality(&p, &w, &w, &cert),
            Err(CertError::ShiftInEqualityProof)
        ));
    }

    #[test]
    fn insertion_step() {
        // A split of zero inserts the reversed relator: used to spawn dd
        // pairs inside longer derivations.
        let p = generate_gnk(4, 3).unwrap();
        let dd_index = p
            .relators
            .iter()
            .position(|r| r.len() == 2 && r.letters()[0] == p.alphabet.parse("d").unwrap().letters()[0])
            .unwrap();
        let step = CertStep::Rewrite { relator: dd_index, rotation: 0, reversed: false, split: 0, position: 1 };
        let w = p.alphabet.parse("ab").unwrap();
        let out = apply_step(&p, &w, 0, &step).unwrap();
        assert_eq!(out, p.alphabet.parse("addb").unwrap());
    }
}
