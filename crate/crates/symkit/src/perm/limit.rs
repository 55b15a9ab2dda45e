//! Limits of back-and-forth sequences.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::{Arc, Mutex};

use super::{Budget, PermError, Permutation, Point};

/// One term `(g_j, Γ_j)` of a convergent sequence.
///
/// A term without a permutation is a guard: it may only be the last term and
/// records the set `Γ_j` that every later term is promised to fix relative to
/// `g_{j-1}`. It lets points of `Γ_j` be evaluated at the final available depth.
#[derive(Debug, Clone)]
pub struct SeqTerm {
    pub perm: Option<Permutation>,
    pub gamma: BTreeSet<Point>,
}

pub type TermProducer = dyn Fn(usize) -> Option<SeqTerm> + Send + Sync;

struct State {
    terms: Vec<SeqTerm>,
    exhausted: bool,
    verified: usize,
}

/// A lazily produced sequence `j ↦ (g_j, Γ_j)` whose limit is checked on demand.
///
/// Level `j ≥ 1` is verified when `ε_0..ε_{j-1}` and their preimages under
/// `g_{j-1}` lie in `Γ_j`, and `g_j` agrees with `g_{j-1}` on `Γ_j`.
pub struct ConvergentSequence {
    producer: Arc<TermProducer>,
    nested: bool,
    state: Mutex<State>,
}

impl fmt::Debug for ConvergentSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let st = self.state.lock().unwrap();
        f.debug_struct("ConvergentSequence")
            .field("nested", &self.nested)
            .field("fetched", &st.terms.len())
            .field("verified_depth", &st.verified)
            .finish()
    }
}

impl ConvergentSequence {
    /// `nested` declares `Γ_{j-1} ⊆ Γ_j`; it is checked during verification and
    /// lets any point of `Γ_j` be evaluated at level `j`.
    pub fn new(producer: Arc<TermProducer>, nested: bool) -> Self {
        ConvergentSequence {
            producer,
            nested,
            state: Mutex::new(State {
                terms: Vec::new(),
                exhausted: false,
                verified: 0,
            }),
        }
    }

    /// A sequence from a finite list of terms.
    pub fn from_terms(terms: Vec<SeqTerm>, nested: bool) -> Self {
        let terms = Arc::new(terms);
        Self::new(Arc::new(move |j| terms.get(j).cloned()), nested)
    }

    pub fn verified_depth(&self) -> usize {
        self.state.lock().unwrap().verified
    }

    fn fetch(&self, st: &mut State, j: usize) -> bool {
        while st.terms.len() <= j && !st.exhausted {
            match (self.producer)(st.terms.len()) {
                Some(t) => st.terms.push(t),
                None => st.exhausted = true,
            }
        }
        st.terms.len() > j
    }

    fn check_level(&self, st: &State, j: usize, budget: &mut Budget) -> Result<(), PermError> {
        let violated = |point, reason: String| PermError::ConvergenceViolated {
            level: j,
            point,
            reason,
        };
        let prev = &st.terms[j - 1];
        let cur = &st.terms[j];
        let g_prev = prev
            .perm
            .as_ref()
            .ok_or_else(|| violated(0, "a guard term must be the last term".into()))?;
        for i in 0..j {
            if !cur.gamma.contains(&i) {
                return Err(violated(i, format!("ε_{i} is missing from Γ_{j}")));
            }
            let y = g_prev.apply_inv_with(i, budget)?;
            if !cur.gamma.contains(&y) {
                return Err(violated(
                    y,
                    format!("preimage of ε_{i} under g_{} is missing from Γ_{j}", j - 1),
                ));
            }
        }
        if self.nested {
            if let Some(&x) = prev.gamma.iter().find(|x| !cur.gamma.contains(x)) {
                return Err(violated(x, format!("Γ_{} is not contained in Γ_{j}", j - 1)));
            }
        }
        if let Some(g) = &cur.perm {
            for &x in &cur.gamma {
                let a = g.apply_with(x, budget)?;
                let b = g_prev.apply_with(x, budget)?;
                if a != b {
                    return Err(violated(
                        x,
                        format!("g_{j} g_{}^-1 moves a point of Γ_{j}", j - 1),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Fetches and verifies levels up to `depth`; returns false when the
    /// sequence has fewer than `depth + 1` terms.
    fn ensure(&self, depth: usize, budget: &mut Budget) -> Result<bool, PermError> {
        let mut st = self.state.lock().unwrap();
        if !self.fetch(&mut st, depth) {
            return Ok(false);
        }
        while st.verified < depth {
            let j = st.verified + 1;
            self.check_level(&st, j, budget)?;
            st.verified = j;
        }
        Ok(true)
    }

    /// Verifies the convergence conditions for every level up to `depth`.
    pub fn verify_to(&self, depth: usize) -> Result<(), PermError> {
        let mut budget = Budget::default();
        if self.ensure(depth, &mut budget)? {
            Ok(())
        } else {
            let available = self.state.lock().unwrap().terms.len();
            Err(PermError::BeyondDepth {
                point: depth,
                available,
            })
        }
    }

    fn stable_at(&self, st: &State, j: usize, x: Point) -> bool {
        x < j || (self.nested && st.terms[j].gamma.contains(&x))
    }

    fn term_perm(&self, j: usize) -> Permutation {
        let st = self.state.lock().unwrap();
        st.terms[j].perm.clone().expect("verified level has a permutation")
    }

    pub(super) fn forward(&self, x: Point, budget: &mut Budget) -> Result<Point, PermError> {
        let mut j = 1;
        loop {
            budget.tick()?;
            if !self.ensure(j, budget)? {
                return Err(self.beyond(x));
            }
            let stable = {
                let st = self.state.lock().unwrap();
                self.stable_at(&st, j, x)
            };
            if stable {
                return self.term_perm(j - 1).apply_with(x, budget);
            }
            j += 1;
        }
    }

    pub(super) fn backward(&self, x: Point, budget: &mut Budget) -> Result<Point, PermError> {
        let mut j = 1;
        loop {
            budget.tick()?;
            if !self.ensure(j, budget)? {
                return Err(self.beyond(x));
            }
            let y = self.term_perm(j - 1).apply_inv_with(x, budget)?;
            let stable = {
                let st = self.state.lock().unwrap();
                self.stable_at(&st, j, y)
            };
            if stable {
                return Ok(y);
            }
            j += 1;
        }
    }

    fn beyond(&self, x: Point) -> PermError {
        PermError::BeyondDepth {
            point: x,
            available: self.state.lock().unwrap().terms.len(),
        }
    }
}

/// Verifies `seq` to `depth` and returns its limit.
pub fn limit(seq: Arc<ConvergentSequence>, depth: usize) -> Result<Permutation, PermError> {
    seq.verify_to(depth)?;
    Ok(Permutation::limit(seq))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(n: usize) -> BTreeSet<Point> {
        (0..n).collect()
    }

    #[test]
    fn constant_sequence_converges_to_its_term() {
        let p = Permutation::from_cycles(&[[0usize, 3, 1]]).unwrap();
        let q = p.clone();
        let seq = ConvergentSequence::new(
            Arc::new(move |j| {
                Some(SeqTerm {
                    perm: Some(q.clone()),
                    gamma: seg(j.max(1) + 4),
                })
            }),
            true,
        );
        let g = limit(Arc::new(seq), 6).unwrap();
        assert!(g.agrees_on(&p, 30).unwrap());
    }

    #[test]
    fn growing_cycles_violate_the_conditions() {
        let seq = ConvergentSequence::new(
            Arc::new(|j| {
                let c: Vec<Point> = (0..j + 2).collect();
                Some(SeqTerm {
                    perm: Some(Permutation::from_cycles(&[c]).unwrap()),
                    gamma: seg(j),
                })
            }),
            true,
        );
        match limit(Arc::new(seq), 3).unwrap_err() {
            PermError::ConvergenceViolated { level, point, .. } => {
                assert_eq!(level, 1);
                assert_eq!(point, 1);
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn limit_is_stable_on_later_terms() {
        // g_j = (j+1 j+2 ... ) moves only points ≥ j+1, so each g_j fixes Γ_j = {0..j}.
        let terms: Vec<SeqTerm> = (0..8)
            .map(|j| SeqTerm {
                perm: Some(Permutation::transposition(j + 20, j + 21)),
                gamma: seg(j + 1),
            })
            .collect();
        let perms: Vec<Permutation> = terms.iter().map(|t| t.perm.clone().unwrap()).collect();
        let seq = Arc::new(ConvergentSequence::from_terms(terms, true));
        let g = limit(seq.clone(), 7).unwrap();
        for i in 0..7 {
            for (j, p) in perms.iter().enumerate().skip(i + 1) {
                assert_eq!(g.apply(i).unwrap(), p.apply(i).unwrap(), "i={i} j={j}");
            }
        }
        assert_eq!(
            g.apply(30).unwrap_err(),
            PermError::BeyondDepth {
                point: 30,
                available: 8
            }
        );
    }

    #[test]
    fn guard_allows_evaluation_at_depth() {
        let p = Permutation::transposition(40, 41);
        let terms = vec![
            SeqTerm {
                perm: Some(p.clone()),
                gamma: BTreeSet::new(),
            },
            SeqTerm {
                perm: None,
                gamma: [0, 40, 41].into_iter().collect(),
            },
        ];
        let g = limit(Arc::new(ConvergentSequence::from_terms(terms, true)), 1).unwrap();
        assert_eq!(g.apply(40).unwrap(), 41);
        assert_eq!(g.apply_inv(41).unwrap(), 40);
    }
}
