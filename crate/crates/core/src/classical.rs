//! Classical bit channels and the bipartite classical PR-channel.
//!
//! Channels on the classical bit are column-stochastic 2×2 matrices and
//! form a square state space under the correspondence
//! s ↦ (π(Φ(s₀)), π(Φ(s₁))). The bipartite PR-channel maps every input pair
//! except (s₁, s₁) to the perfectly correlated mixture and (s₁, s₁) to the
//! anticorrelated one; sampling it round by round reproduces the PR box
//! statistics exactly.

use serde::{Deserialize, Serialize};

use crate::composites::BipartiteTensor;
use crate::error::{Error, Result};
use crate::gpt::{DualVector, Effect, StateSpace};
use crate::rng::SplitMix64;
use crate::tol::TolerancePolicy;

/// Affine map of the classical bit into itself; `transition[out][in]` with
/// column-stochastic columns over the basis {s₀, s₁}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalChannel {
    pub transition: [[f64; 2]; 2],
}

impl ClassicalChannel {
    pub fn validate(&self, tol: &TolerancePolicy) -> Result<()> {
        for col in 0..2 {
            let s = self.transition[0][col] + self.transition[1][col];
            if (s - 1.0).abs() > tol.eps_eq {
                return Err(Error::InvalidInput(format!(
                    "column {col} sums to {s}, not 1"
                )));
            }
            for row in 0..2 {
                let v = self.transition[row][col];
                if !(-tol.eps_eq..=1.0 + tol.eps_eq).contains(&v) {
                    return Err(Error::InvalidInput(format!(
                        "transition entry {v} outside [0, 1]"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn identity() -> Self {
        ClassicalChannel {
            transition: [[1.0, 0.0], [0.0, 1.0]],
        }
    }

    pub fn negation() -> Self {
        ClassicalChannel {
            transition: [[0.0, 1.0], [1.0, 0.0]],
        }
    }

    /// Constant channel mapping everything to s_i.
    pub fn constant(i: usize) -> Self {
        let mut t = [[0.0; 2]; 2];
        t[i][0] = 1.0;
        t[i][1] = 1.0;
        ClassicalChannel { transition: t }
    }
}

/// The affine bijection from the square onto classical bit channels:
/// π(Φ(s₀)) = π₀(s) and π(Φ(s₁)) = π₁(s).
pub fn square_to_channel(s: &DualVector) -> Result<ClassicalChannel> {
    let square = StateSpace::square();
    if s.space != square.name {
        return Err(Error::SpaceMismatch {
            expected: square.name,
            got: s.space.clone(),
        });
    }
    let tol = TolerancePolicy::default();
    if !crate::gpt::membership(&square, s, &tol)? {
        return Err(Error::InvalidInput(
            "point lies outside the square state space".into(),
        ));
    }
    let lam = s.coords[1];
    let mu = s.coords[2];
    Ok(ClassicalChannel {
        transition: [[1.0 - lam, 1.0 - mu], [lam, mu]],
    })
}

/// Inverse of [`square_to_channel`].
pub fn channel_to_square(ch: &ClassicalChannel) -> Result<DualVector> {
    ch.validate(&TolerancePolicy::default())?;
    let square = StateSpace::square();
    Ok(square.dual(vec![1.0, ch.transition[1][0], ch.transition[1][1]]))
}

/// The measure-a-channel effect F_{t,f}(Φ) = f(Φ(t)), expressed as an
/// effect on the square (the channel state space): input the bit state `t`,
/// apply the bit effect `f` to the output.
pub fn effect_on_channels(t: &DualVector, f: &Effect) -> Result<Effect> {
    let bit = StateSpace::classical_bit();
    if t.space != bit.name || f.space != bit.name {
        return Err(Error::SpaceMismatch {
            expected: bit.name,
            got: format!("{}/{}", t.space, f.space),
        });
    }
    let tol = TolerancePolicy::default();
    if !crate::gpt::membership(&bit, t, &tol)? {
        return Err(Error::InvalidInput("input is not a bit state".into()));
    }
    if !bit.is_valid_effect(f, &tol)? {
        return Err(Error::InvalidInput("not a valid bit effect".into()));
    }
    let tau = t.coords[1];
    let (a, b) = (f.coords[0], f.coords[1]);
    // f(Φ(t)) = a + b[(1−τ)·π₀(s_Φ) + τ·π₁(s_Φ)].
    Ok(StateSpace::square().effect(vec![a, b * (1.0 - tau), b * tau]))
}

/// Bipartite channel on two bits; `transition[out][in]` over the basis
/// {s₀⊗s₀, s₀⊗s₁, s₁⊗s₀, s₁⊗s₁} (index 2i+j), column-stochastic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalBipartiteChannel {
    pub transition: [[f64; 4]; 4],
}

impl ClassicalBipartiteChannel {
    pub fn validate(&self, tol: &TolerancePolicy) -> Result<()> {
        for col in 0..4 {
            let s: f64 = (0..4).map(|row| self.transition[row][col]).sum();
            if (s - 1.0).abs() > tol.eps_eq {
                return Err(Error::InvalidInput(format!(
                    "column {col} sums to {s}, not 1"
                )));
            }
            for row in 0..4 {
                let v = self.transition[row][col];
                if !(-tol.eps_eq..=1.0 + tol.eps_eq).contains(&v) {
                    return Err(Error::InvalidInput(format!(
                        "transition entry {v} outside [0, 1]"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Largest violation of the marginal non-signaling conditions: each
    /// party's output distribution may not depend on the far input.
    pub fn nonsignaling_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        // Alice's marginal: sum over Bob's output, fix Alice input i, vary
        // Bob input j.
        for i in 0..2 {
            for k in 0..2 {
                let marg = |j: usize| -> f64 {
                    (0..2).map(|l| self.transition[2 * k + l][2 * i + j]).sum()
                };
                worst = worst.max((marg(0) - marg(1)).abs());
            }
        }
        // Bob's marginal, symmetric.
        for j in 0..2 {
            for l in 0..2 {
                let marg = |i: usize| -> f64 {
                    (0..2).map(|k| self.transition[2 * k + l][2 * i + j]).sum()
                };
                worst = worst.max((marg(0) - marg(1)).abs());
            }
        }
        worst
    }

    pub fn is_nonsignaling(&self, tol: &TolerancePolicy) -> bool {
        self.nonsignaling_residual() <= tol.eps_eq
    }

    /// Uniform-noise channel: every column is the uniform distribution.
    pub fn uniform_noise() -> Self {
        ClassicalBipartiteChannel {
            transition: [[0.25; 4]; 4],
        }
    }

    /// Product of two single-bit channels.
    pub fn product(a: &ClassicalChannel, b: &ClassicalChannel) -> Self {
        let mut t = [[0.0; 4]; 4];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        t[2 * k + l][2 * i + j] = a.transition[k][i] * b.transition[l][j];
                    }
                }
            }
        }
        ClassicalBipartiteChannel { transition: t }
    }
}

/// The bipartite classical PR-channel: inputs (s_i, s_j) with i·j = 0 map
/// to ½(s₀⊗s₀ + s₁⊗s₁); the input (s₁, s₁) maps to ½(s₀⊗s₁ + s₁⊗s₀).
pub fn pr_bipartite_channel() -> ClassicalBipartiteChannel {
    let mut t = [[0.0; 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            let col = 2 * i + j;
            if i == 1 && j == 1 {
                t[0b01][col] = 0.5;
                t[0b10][col] = 0.5;
            } else {
                t[0b00][col] = 0.5;
                t[0b11][col] = 0.5;
            }
        }
    }
    ClassicalBipartiteChannel { transition: t }
}

/// View a non-signaling bipartite channel as a bipartite element over two
/// squares (the channel state spaces): the (a, b) coefficient is the joint
/// probability that both π-readouts give 1 under the inputs selected by the
/// basis functionals, with unit entries marginalized.
pub fn to_bipartite_tensor(ch: &ClassicalBipartiteChannel) -> Result<BipartiteTensor> {
    let tol = TolerancePolicy::default();
    ch.validate(&tol)?;
    if !ch.is_nonsignaling(&tol) {
        return Err(Error::InvalidInput(format!(
            "channel is signaling (residual {:.3e})",
            ch.nonsignaling_residual()
        )));
    }
    let square = StateSpace::square();
    // p(k, l | i, j)
    let p = |k: usize, l: usize, i: usize, j: usize| ch.transition[2 * k + l][2 * i + j];
    // Alice reads 1 with input i, Bob marginalized (any fixed j by
    // non-signaling).
    let alice1 = |i: usize| -> f64 { (0..2).map(|l| p(1, l, i, 0)).sum() };
    let bob1 = |j: usize| -> f64 { (0..2).map(|k| p(k, 1, 0, j)).sum() };
    let both1 = |i: usize, j: usize| -> f64 { p(1, 1, i, j) };
    let mut coeffs = vec![vec![0.0; 3]; 3];
    coeffs[0][0] = 1.0;
    for (a, i) in [(1usize, 0usize), (2, 1)] {
        coeffs[a][0] = alice1(i);
        coeffs[0][a] = bob1(i);
    }
    for (a, i) in [(1usize, 0usize), (2, 1)] {
        for (b, j) in [(1usize, 0usize), (2, 1)] {
            coeffs[a][b] = both1(i, j);
        }
    }
    Ok(BipartiteTensor {
        space_a: square.name.clone(),
        space_b: square.name,
        coeffs,
    })
}

/// How the two input bits are chosen each round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SettingPolicy {
    /// Two independent fair bits per round.
    Uniform,
    /// Fixed inputs (i, j).
    Fixed(u8, u8),
}

/// Counts and CHSH estimate from a finite sampling run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimReport {
    pub rounds: u64,
    pub seed: u64,
    /// counts[2i+j][2k+l]: input pair (i, j), output pair (k, l).
    pub counts: [[u64; 4]; 4],
    /// Empirical correlations E(i, j); 0 when a setting pair was never
    /// sampled.
    pub correlations: [[f64; 2]; 2],
    pub chsh: f64,
}

/// Sample the channel. Per round, draws in this fixed order: one
/// generator output for the setting pair (low bit = Alice, next bit = Bob,
/// uniform policy only), then one double in [0,1) walking the output
/// column CDF in index order. Outcome labels: output s₀ reads −1, s₁
/// reads +1.
pub fn simulate(
    ch: &ClassicalBipartiteChannel,
    rounds: u64,
    seed: u64,
    policy: SettingPolicy,
) -> Result<SimReport> {
    if rounds == 0 {
        return Err(Error::InvalidInput("rounds must be at least 1".into()));
    }
    ch.validate(&TolerancePolicy::default())?;
    if let SettingPolicy::Fixed(i, j) = policy {
        if i > 1 || j > 1 {
            return Err(Error::InvalidInput("fixed inputs must be bits".into()));
        }
    }
    let mut rng = SplitMix64::new(seed);
    let mut counts = [[0u64; 4]; 4];
    for _ in 0..rounds {
        let (i, j) = match policy {
            SettingPolicy::Uniform => {
                let v = rng.next_u64();
                ((v & 1) as usize, ((v >> 1) & 1) as usize)
            }
            SettingPolicy::Fixed(i, j) => (i as usize, j as usize),
        };
        let col = 2 * i + j;
        let u = rng.next_f64();
        let mut acc = 0.0;
        let mut out = 3;
        for row in 0..4 {
            acc += ch.transition[row][col];
            if u < acc {
                out = row;
                break;
            }
        }
        counts[col][out] += 1;
    }
    let mut correlations = [[0.0f64; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let col = 2 * i + j;
            let n: u64 = counts[col].iter().sum();
            if n == 0 {
                continue;
            }
            let mut e = 0.0;
            for (out, &cnt) in counts[col].iter().enumerate() {
                let (k, l) = (out >> 1, out & 1);
                let sa = if k == 1 { 1.0 } else { -1.0 };
                let sb = if l == 1 { 1.0 } else { -1.0 };
                e += sa * sb * cnt as f64;
            }
            correlations[i][j] = e / n as f64;
        }
    }
    let chsh = correlations[0][0] + correlations[0][1] + correlations[1][0] - correlations[1][1];
    Ok(SimReport {
        rounds,
        seed,
        counts,
        correlations,
        chsh,
    })
}
