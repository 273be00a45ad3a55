//! Nonlocal boxes: outcome tables, non-signaling conditions, correlations,
//! the CHSH quantity and the PR box.
//!
//! A box is the table P(ε, η | C, D) for settings C ∈ {A, A′}, D ∈ {B, B′}
//! and outcomes ε, η ∈ {+1, −1}, stored flat in the fixed lexicographic
//! order (A, A′) × (B, B′) × (+1, −1) × (+1, −1).

use serde::{Deserialize, Serialize};

use crate::composites::BipartiteTensor;
use crate::error::{Error, Result};
use crate::gpt::{Effect, StateSpace};
use crate::tol::TolerancePolicy;

/// Alice settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AliceSetting {
    A,
    APrime,
}

/// Bob settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BobSetting {
    B,
    BPrime,
}

pub const ALICE_SETTINGS: [AliceSetting; 2] = [AliceSetting::A, AliceSetting::APrime];
pub const BOB_SETTINGS: [BobSetting; 2] = [BobSetting::B, BobSetting::BPrime];

/// Outcome labels; `Plus` is +1, `Minus` is −1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Plus,
    Minus,
}

pub const OUTCOMES: [Outcome; 2] = [Outcome::Plus, Outcome::Minus];

impl Outcome {
    pub fn sign(self) -> f64 {
        match self {
            Outcome::Plus => 1.0,
            Outcome::Minus => -1.0,
        }
    }
}

/// Conditional outcome table of a two-party box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonLocalBox {
    /// 16 probabilities in the order (C, D, ε, η), the last index fastest.
    pub probs: [f64; 16],
}

fn idx(c: AliceSetting, d: BobSetting, e: Outcome, h: Outcome) -> usize {
    let ci = (c == AliceSetting::APrime) as usize;
    let di = (d == BobSetting::BPrime) as usize;
    let ei = (e == Outcome::Minus) as usize;
    let hi = (h == Outcome::Minus) as usize;
    ((ci * 2 + di) * 2 + ei) * 2 + hi
}

impl NonLocalBox {
    pub fn prob(&self, c: AliceSetting, d: BobSetting, e: Outcome, h: Outcome) -> f64 {
        self.probs[idx(c, d, e, h)]
    }

    pub fn set_prob(&mut self, c: AliceSetting, d: BobSetting, e: Outcome, h: Outcome, p: f64) {
        self.probs[idx(c, d, e, h)] = p;
    }

    /// Entries nonnegative (within eps) and each setting slice normalized.
    pub fn is_valid(&self, tol: &TolerancePolicy) -> bool {
        if self.probs.iter().any(|&p| p < -tol.eps_eq) {
            return false;
        }
        for c in ALICE_SETTINGS {
            for d in BOB_SETTINGS {
                let s: f64 = OUTCOMES
                    .iter()
                    .flat_map(|&e| OUTCOMES.iter().map(move |&h| self.prob(c, d, e, h)))
                    .sum();
                if (s - 1.0).abs() > tol.eps_eq {
                    return false;
                }
            }
        }
        true
    }

    /// Largest entrywise difference.
    pub fn max_abs_diff(&self, other: &NonLocalBox) -> f64 {
        self.probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Relabel Alice's outcomes (both settings).
    pub fn flip_alice(&self) -> NonLocalBox {
        let mut out = self.clone();
        for c in ALICE_SETTINGS {
            for d in BOB_SETTINGS {
                for h in OUTCOMES {
                    out.set_prob(c, d, Outcome::Plus, h, self.prob(c, d, Outcome::Minus, h));
                    out.set_prob(c, d, Outcome::Minus, h, self.prob(c, d, Outcome::Plus, h));
                }
            }
        }
        out
    }

    /// Relabel Bob's outcomes (both settings).
    pub fn flip_bob(&self) -> NonLocalBox {
        let mut out = self.clone();
        for c in ALICE_SETTINGS {
            for d in BOB_SETTINGS {
                for e in OUTCOMES {
                    out.set_prob(c, d, e, Outcome::Plus, self.prob(c, d, e, Outcome::Minus));
                    out.set_prob(c, d, e, Outcome::Minus, self.prob(c, d, e, Outcome::Plus));
                }
            }
        }
        out
    }
}

/// Marginal-consistency residual: the largest violation of either
/// non-signaling condition over all outcomes and settings.
pub fn nonsignaling_residual(b: &NonLocalBox) -> f64 {
    let mut worst = 0.0f64;
    // Alice marginal must not depend on Bob's setting.
    for c in ALICE_SETTINGS {
        for e in OUTCOMES {
            let m0: f64 = OUTCOMES.iter().map(|&h| b.prob(c, BobSetting::B, e, h)).sum();
            let m1: f64 = OUTCOMES
                .iter()
                .map(|&h| b.prob(c, BobSetting::BPrime, e, h))
                .sum();
            worst = worst.max((m0 - m1).abs());
        }
    }
    // Bob marginal must not depend on Alice's setting.
    for d in BOB_SETTINGS {
        for h in OUTCOMES {
            let m0: f64 = OUTCOMES.iter().map(|&e| b.prob(AliceSetting::A, d, e, h)).sum();
            let m1: f64 = OUTCOMES
                .iter()
                .map(|&e| b.prob(AliceSetting::APrime, d, e, h))
                .sum();
            worst = worst.max((m0 - m1).abs());
        }
    }
    worst
}

pub fn is_nonsignaling(b: &NonLocalBox, tol: &TolerancePolicy) -> bool {
    nonsignaling_residual(b) <= tol.eps_eq
}

/// E(C, D) = P(++) − P(+−) − P(−+) + P(−−).
pub fn correlation(b: &NonLocalBox, c: AliceSetting, d: BobSetting) -> f64 {
    let mut e = 0.0;
    for eo in OUTCOMES {
        for ho in OUTCOMES {
            e += eo.sign() * ho.sign() * b.prob(c, d, eo, ho);
        }
    }
    e
}

/// X = E(A,B) + E(A,B′) + E(A′,B) − E(A′,B′).
pub fn chsh(b: &NonLocalBox) -> f64 {
    correlation(b, AliceSetting::A, BobSetting::B)
        + correlation(b, AliceSetting::A, BobSetting::BPrime)
        + correlation(b, AliceSetting::APrime, BobSetting::B)
        - correlation(b, AliceSetting::APrime, BobSetting::BPrime)
}

/// The PR box: ½ on correlated outcomes except for the (A′, B′) setting
/// pair, which is anticorrelated; CHSH value 4.
pub fn pr_box() -> NonLocalBox {
    let mut b = NonLocalBox { probs: [0.0; 16] };
    for c in ALICE_SETTINGS {
        for d in BOB_SETTINGS {
            let anti = c == AliceSetting::APrime && d == BobSetting::BPrime;
            for e in OUTCOMES {
                for h in OUTCOMES {
                    let correlated = e.sign() * h.sign() > 0.0;
                    if correlated != anti {
                        b.set_prob(c, d, e, h, 0.5);
                    }
                }
            }
        }
    }
    b
}

/// Uniform noise: every entry ¼.
pub fn uniform_box() -> NonLocalBox {
    NonLocalBox { probs: [0.25; 16] }
}

/// The quantum box at the Tsirelson bound: uniform marginals and
/// correlations ±1/√2 in the CHSH pattern, X = 2√2.
pub fn tsirelson_box() -> NonLocalBox {
    let mut b = NonLocalBox { probs: [0.0; 16] };
    let e = 1.0 / 2f64.sqrt();
    for c in ALICE_SETTINGS {
        for d in BOB_SETTINGS {
            let corr = if c == AliceSetting::APrime && d == BobSetting::BPrime {
                -e
            } else {
                e
            };
            for eo in OUTCOMES {
                for ho in OUTCOMES {
                    b.set_prob(c, d, eo, ho, (1.0 + eo.sign() * ho.sign() * corr) / 4.0);
                }
            }
        }
    }
    b
}

/// Outcome of the maximal-violation classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoxClass {
    Pr,
    AntiPr,
    NotMaximal,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Classification {
    pub class: BoxClass,
    pub chsh: f64,
    /// Entrywise distance to the canonical table for the detected class
    /// (0 for `NotMaximal`).
    pub residual: f64,
    pub tolerance: f64,
}

/// Classify a non-signaling box by its CHSH value. At |X| = 4 the table is
/// forced: it must equal the PR box entrywise, or the PR box with one
/// party's outcomes relabeled (both single-party flips give the same
/// table). A non-signaling box with |X| = 4 that fails the entrywise check
/// is numerically inconsistent and rejected.
pub fn classify_extremal(b: &NonLocalBox, tol: &TolerancePolicy) -> Result<Classification> {
    if !is_nonsignaling(b, tol) {
        return Err(Error::InvalidInput(format!(
            "classification requires a non-signaling box (residual {:.3e})",
            nonsignaling_residual(b)
        )));
    }
    let x = chsh(b);
    if (x - 4.0).abs() <= tol.eps_eq {
        let residual = b.max_abs_diff(&pr_box());
        if residual > tol.eps_eq {
            return Err(Error::Numerics(format!(
                "CHSH = 4 but table differs from the PR box by {residual:.3e}"
            )));
        }
        return Ok(Classification {
            class: BoxClass::Pr,
            chsh: x,
            residual,
            tolerance: tol.eps_eq,
        });
    }
    if (x + 4.0).abs() <= tol.eps_eq {
        // The candidate relabelings are the single-party outcome flips.
        let candidates = [pr_box().flip_alice(), pr_box().flip_bob()];
        let residual = candidates
            .iter()
            .map(|cand| b.max_abs_diff(cand))
            .fold(f64::INFINITY, f64::min);
        if residual > tol.eps_eq {
            return Err(Error::Numerics(format!(
                "CHSH = −4 but table differs from all relabeled PR boxes by {residual:.3e}"
            )));
        }
        return Ok(Classification {
            class: BoxClass::AntiPr,
            chsh: x,
            residual,
            tolerance: tol.eps_eq,
        });
    }
    Ok(Classification {
        class: BoxClass::NotMaximal,
        chsh: x,
        residual: 0.0,
        tolerance: tol.eps_eq,
    })
}

/// Box obtained by measuring a bipartite state with the setting effects
/// (f_A, f_A′) on Alice's side and (f_B, f_B′) on Bob's:
/// P(ε, η | C, D) = (h_C ⊗ h_D)(φ) with h the effect or its complement.
pub fn box_from_state(
    space_a: &StateSpace,
    space_b: &StateSpace,
    phi: &BipartiteTensor,
    f_a: &Effect,
    f_a_prime: &Effect,
    f_b: &Effect,
    f_b_prime: &Effect,
) -> Result<NonLocalBox> {
    phi.check_spaces(space_a, space_b)?;
    let tol = TolerancePolicy::default();
    if (phi.normalization() - 1.0).abs() > tol.eps_eq {
        return Err(Error::InvalidInput(format!(
            "state is not normalized: (1⊗1)(φ) = {}",
            phi.normalization()
        )));
    }
    let mut b = NonLocalBox { probs: [0.0; 16] };
    for (c, fc) in [(AliceSetting::A, f_a), (AliceSetting::APrime, f_a_prime)] {
        for (d, fd) in [(BobSetting::B, f_b), (BobSetting::BPrime, f_b_prime)] {
            for e in OUTCOMES {
                let ha = match e {
                    Outcome::Plus => fc.clone(),
                    Outcome::Minus => fc.complement(),
                };
                for h in OUTCOMES {
                    let hb = match h {
                        Outcome::Plus => fd.clone(),
                        Outcome::Minus => fd.complement(),
                    };
                    b.set_prob(c, d, e, h, phi.pair(&ha, &hb)?);
                }
            }
        }
    }
    Ok(b)
}
