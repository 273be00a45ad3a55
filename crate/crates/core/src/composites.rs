//! Bipartite elements of A(K)*⊗A(K)*, minimal and maximal tensor products,
//! the canonical PR state on the square, embeddings along witness squares
//! and the decomposition of arbitrary PR states.

use serde::{Deserialize, Serialize};

use crate::boxes;
use crate::error::{Error, Result};
use crate::gpt::{build_iota_pi, AffineMapGpt, DualVector, Effect, StateSpace, WitnessSquare};
use crate::lp::{self, Constraint, Rel};
use crate::tol::TolerancePolicy;

/// Coefficient matrix of an element of A(K_A)*⊗A(K_B)*: the entry (i, j)
/// is the pairing with the i-th basis functional of A(K_A) and the j-th of
/// A(K_B), so (f⊗g)(φ) = fᵀ·coeffs·g in coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BipartiteTensor {
    #[serde(rename = "spaceA")]
    pub space_a: String,
    #[serde(rename = "spaceB")]
    pub space_b: String,
    pub coeffs: Vec<Vec<f64>>,
}

impl BipartiteTensor {
    pub fn zeros(space_a: &StateSpace, space_b: &StateSpace) -> Self {
        BipartiteTensor {
            space_a: space_a.name.clone(),
            space_b: space_b.name.clone(),
            coeffs: vec![vec![0.0; space_b.dim()]; space_a.dim()],
        }
    }

    pub fn dim_a(&self) -> usize {
        self.coeffs.len()
    }

    pub fn dim_b(&self) -> usize {
        self.coeffs.first().map(|r| r.len()).unwrap_or(0)
    }

    pub fn check_spaces(&self, space_a: &StateSpace, space_b: &StateSpace) -> Result<()> {
        if self.space_a != space_a.name {
            return Err(Error::SpaceMismatch {
                expected: space_a.name.clone(),
                got: self.space_a.clone(),
            });
        }
        if self.space_b != space_b.name {
            return Err(Error::SpaceMismatch {
                expected: space_b.name.clone(),
                got: self.space_b.clone(),
            });
        }
        if self.dim_a() != space_a.dim() || self.dim_b() != space_b.dim() {
            return Err(Error::DimMismatch("bipartite coefficient shape".into()));
        }
        Ok(())
    }

    /// (f⊗g)(φ).
    pub fn pair(&self, f: &Effect, g: &Effect) -> Result<f64> {
        if f.space != self.space_a {
            return Err(Error::SpaceMismatch {
                expected: self.space_a.clone(),
                got: f.space.clone(),
            });
        }
        if g.space != self.space_b {
            return Err(Error::SpaceMismatch {
                expected: self.space_b.clone(),
                got: g.space.clone(),
            });
        }
        let mut acc = 0.0;
        for (fi, row) in f.coords.iter().zip(&self.coeffs) {
            if *fi == 0.0 {
                continue;
            }
            acc += fi * row.iter().zip(&g.coords).map(|(c, gj)| c * gj).sum::<f64>();
        }
        Ok(acc)
    }

    /// (1⊗1)(φ).
    pub fn normalization(&self) -> f64 {
        self.coeffs[0][0]
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (r, ro) in out.coeffs.iter_mut().zip(&other.coeffs) {
            for (v, w) in r.iter_mut().zip(ro) {
                *v += w;
            }
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (r, ro) in out.coeffs.iter_mut().zip(&other.coeffs) {
            for (v, w) in r.iter_mut().zip(ro) {
                *v -= w;
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        for r in out.coeffs.iter_mut() {
            for v in r.iter_mut() {
                *v *= s;
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs
            .iter()
            .flatten()
            .map(|v| v.abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.sub(other).max_abs()
    }
}

/// x ⊗ y: coefficient matrix is the outer product of the dual coordinates.
pub fn product_state(x: &DualVector, y: &DualVector) -> BipartiteTensor {
    let coeffs = x
        .coords
        .iter()
        .map(|&a| y.coords.iter().map(|&b| a * b).collect())
        .collect();
    BipartiteTensor {
        space_a: x.space.clone(),
        space_b: y.space.clone(),
        coeffs,
    }
}

/// Membership in the maximal tensor product: (f⊗g)(φ) ≥ 0 for every pair of
/// effect-cone generators, plus normalization. Requires generator lists on
/// both factors.
pub fn in_max_tensor(
    space_a: &StateSpace,
    space_b: &StateSpace,
    phi: &BipartiteTensor,
    tol: &TolerancePolicy,
) -> Result<bool> {
    phi.check_spaces(space_a, space_b)?;
    if space_a.cone_generators.is_empty() || space_b.cone_generators.is_empty() {
        return Err(Error::InvalidInput(
            "maximal-tensor membership needs cone generators on both factors".into(),
        ));
    }
    if (phi.normalization() - 1.0).abs() > tol.eps_eq {
        return Ok(false);
    }
    for ga in &space_a.cone_generators {
        for gb in &space_b.cone_generators {
            let f = space_a.effect(ga.clone());
            let g = space_b.effect(gb.clone());
            if phi.pair(&f, &g)? < -tol.eps_eq {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Membership in the minimal tensor product: φ is a convex combination of
/// vertex⊗vertex products (LP feasibility).
pub fn in_min_tensor(
    space_a: &StateSpace,
    space_b: &StateSpace,
    phi: &BipartiteTensor,
    tol: &TolerancePolicy,
) -> Result<bool> {
    phi.check_spaces(space_a, space_b)?;
    if space_a.vertices.is_empty() || space_b.vertices.is_empty() {
        return Err(Error::InvalidInput(
            "minimal-tensor membership needs vertex lists on both factors".into(),
        ));
    }
    let na = space_a.vertices.len();
    let nb = space_b.vertices.len();
    let n = na * nb;
    let mut cons = Vec::new();
    cons.push(Constraint::new(vec![1.0; n], Rel::Eq, 1.0));
    for i in 0..space_a.dim() {
        for j in 0..space_b.dim() {
            let mut row = Vec::with_capacity(n);
            for va in &space_a.vertices {
                for vb in &space_b.vertices {
                    row.push(va[i] * vb[j]);
                }
            }
            let target = phi.coeffs[i][j];
            cons.push(Constraint::new(row.clone(), Rel::Le, target + tol.eps_eq));
            cons.push(Constraint::new(row, Rel::Ge, target - tol.eps_eq));
        }
    }
    Ok(lp::feasible_point(n, &cons).is_some())
}

/// The canonical PR state on the square:
/// φ = ½((s00 − s10)⊗s00 + s11⊗s10 + s10⊗s01).
pub fn pr_state() -> BipartiteTensor {
    let s = StateSpace::square();
    let s00 = s.vertex(0);
    let s10 = s.vertex(1);
    let s01 = s.vertex(2);
    let s11 = s.vertex(3);
    let t1 = product_state(&s00.sub(&s10), &s00);
    let t2 = product_state(&s11, &s10);
    let t3 = product_state(&s10, &s01);
    t1.add(&t2).add(&t3).scale(0.5)
}

/// Push the PR state through a pair of embeddings built from witness
/// squares: (ι_A⊗ι_B)(φ_S) has coefficient matrix M_A · C · M_Bᵀ.
pub fn embed(iota_a: &AffineMapGpt, iota_b: &AffineMapGpt) -> Result<BipartiteTensor> {
    apply_pair(iota_a, iota_b, &pr_state())
}

/// Which side of the tensor an effect is applied to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Alice,
    Bob,
}

/// (f⊗id)(φ) or (id⊗f)(φ): the induced functional on the other factor.
pub fn partial_apply(f: &Effect, phi: &BipartiteTensor, side: Side) -> Result<DualVector> {
    match side {
        Side::Alice => {
            if f.space != phi.space_a {
                return Err(Error::SpaceMismatch {
                    expected: phi.space_a.clone(),
                    got: f.space.clone(),
                });
            }
            if f.coords.len() != phi.dim_a() {
                return Err(Error::DimMismatch("partial application".into()));
            }
            let mut coords = vec![0.0; phi.dim_b()];
            for (fi, row) in f.coords.iter().zip(&phi.coeffs) {
                for (slot, v) in coords.iter_mut().zip(row) {
                    *slot += fi * v;
                }
            }
            Ok(DualVector {
                space: phi.space_b.clone(),
                coords,
            })
        }
        Side::Bob => {
            if f.space != phi.space_b {
                return Err(Error::SpaceMismatch {
                    expected: phi.space_b.clone(),
                    got: f.space.clone(),
                });
            }
            if f.coords.len() != phi.dim_b() {
                return Err(Error::DimMismatch("partial application".into()));
            }
            let coords = phi
                .coeffs
                .iter()
                .map(|row| row.iter().zip(&f.coords).map(|(v, fj)| v * fj).sum())
                .collect();
            Ok(DualVector {
                space: phi.space_a.clone(),
                coords,
            })
        }
    }
}

/// Result of decomposing a PR state: the two extracted witness squares,
/// the embedding/retraction maps, the orthogonal remainder and the
/// verification residuals.
#[derive(Debug, Clone)]
pub struct PrDecomposition {
    pub witness_a: WitnessSquare,
    pub witness_b: WitnessSquare,
    pub iota_a: AffineMapGpt,
    pub pi_a: AffineMapGpt,
    pub iota_b: AffineMapGpt,
    pub pi_b: AffineMapGpt,
    /// φ − (ι_A⊗ι_B)(φ_S).
    pub phi_perp: BipartiteTensor,
    /// ‖(Π_A⊗Π_B)(φ) − φ_S‖∞.
    pub projection_residual: f64,
    /// ‖(Π_A⊗id)(φ⊥)‖∞ and ‖(id⊗Π_B)(φ⊥)‖∞.
    pub kernel_residuals: (f64, f64),
}

/// Decompose a state whose box with the given effects is the PR table:
/// extract the witness squares on both sides from the conditional states
/// (x11 = 2(f_A⊗id)(φ) and so on), build the ι/Π pairs and split
/// φ = (ι_A⊗ι_B)(φ_S) + φ⊥ with φ⊥ ∈ ker(Π_A)⊗ker(Π_B).
pub fn decompose_pr_state(
    space_a: &StateSpace,
    space_b: &StateSpace,
    phi: &BipartiteTensor,
    f_a: &Effect,
    f_a_prime: &Effect,
    f_b: &Effect,
    f_b_prime: &Effect,
) -> Result<PrDecomposition> {
    let tol = TolerancePolicy::default();
    let the_box = boxes::box_from_state(space_a, space_b, phi, f_a, f_a_prime, f_b, f_b_prime)?;
    let dev = the_box.max_abs_diff(&boxes::pr_box());
    if dev > tol.eps_eq {
        return Err(Error::InvalidInput(format!(
            "decomposition requires the PR outcome table; deviation {dev:.3e}"
        )));
    }

    // Bob-side witness square from Alice's effects.
    let x00 = partial_apply(&f_a.complement(), phi, Side::Alice)?.scale(2.0);
    let x11 = partial_apply(f_a, phi, Side::Alice)?.scale(2.0);
    let x01 = partial_apply(&f_a_prime.complement(), phi, Side::Alice)?.scale(2.0);
    let x10 = partial_apply(f_a_prime, phi, Side::Alice)?.scale(2.0);
    let witness_b = WitnessSquare {
        space: space_b.name.clone(),
        points: [x00, x10, x01, x11],
    };

    // Alice-side witness square from Bob's effects, symmetrically.
    let y00 = partial_apply(&f_b.complement(), phi, Side::Bob)?.scale(2.0);
    let y11 = partial_apply(f_b, phi, Side::Bob)?.scale(2.0);
    let y01 = partial_apply(&f_b_prime.complement(), phi, Side::Bob)?.scale(2.0);
    let y10 = partial_apply(f_b_prime, phi, Side::Bob)?.scale(2.0);
    let witness_a = WitnessSquare {
        space: space_a.name.clone(),
        points: [y00, y10, y01, y11],
    };

    let (iota_b, pi_b) = build_iota_pi(space_b, &witness_b, f_b, f_b_prime)?;
    let (iota_a, pi_a) = build_iota_pi(space_a, &witness_a, f_a, f_a_prime)?;

    let embedded = embed(&iota_a, &iota_b)?;
    let phi_perp = phi.sub(&embedded);

    // (Π_A⊗Π_B)(φ) must be the canonical PR state.
    let projected = apply_pair(&pi_a, &pi_b, phi)?;
    let projection_residual = projected.max_abs_diff(&pr_state());

    // Kernel conditions on the remainder.
    let left = apply_left(&pi_a, &phi_perp)?;
    let right = apply_right(&pi_b, &phi_perp)?;
    let kernel_residuals = (left.max_abs(), right.max_abs());

    Ok(PrDecomposition {
        witness_a,
        witness_b,
        iota_a,
        pi_a,
        iota_b,
        pi_b,
        phi_perp,
        projection_residual,
        kernel_residuals,
    })
}

/// (T_A⊗T_B)(φ) on coefficient matrices: M_A · C · M_Bᵀ.
pub fn apply_pair(
    t_a: &AffineMapGpt,
    t_b: &AffineMapGpt,
    phi: &BipartiteTensor,
) -> Result<BipartiteTensor> {
    if t_a.source != phi.space_a || t_b.source != phi.space_b {
        return Err(Error::SpaceMismatch {
            expected: format!("{}⊗{}", t_a.source, t_b.source),
            got: format!("{}⊗{}", phi.space_a, phi.space_b),
        });
    }
    if t_a.in_dim() != phi.dim_a() || t_b.in_dim() != phi.dim_b() {
        return Err(Error::DimMismatch("map/tensor dimensions".into()));
    }
    let da = t_a.out_dim();
    let db = t_b.out_dim();
    let mut coeffs = vec![vec![0.0; db]; da];
    for (r, row_out) in coeffs.iter_mut().enumerate() {
        for (c, slot) in row_out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (i, row_in) in phi.coeffs.iter().enumerate() {
                let ma = t_a.matrix[r][i];
                if ma == 0.0 {
                    continue;
                }
                for (j, v) in row_in.iter().enumerate() {
                    acc += ma * v * t_b.matrix[c][j];
                }
            }
            *slot = acc;
        }
    }
    Ok(BipartiteTensor {
        space_a: t_a.target.clone(),
        space_b: t_b.target.clone(),
        coeffs,
    })
}

/// (T⊗id)(φ).
pub fn apply_left(t: &AffineMapGpt, phi: &BipartiteTensor) -> Result<BipartiteTensor> {
    if t.source != phi.space_a {
        return Err(Error::SpaceMismatch {
            expected: t.source.clone(),
            got: phi.space_a.clone(),
        });
    }
    let da = t.out_dim();
    let db = phi.dim_b();
    let mut coeffs = vec![vec![0.0; db]; da];
    for (r, row_out) in coeffs.iter_mut().enumerate() {
        for (i, row_in) in phi.coeffs.iter().enumerate() {
            let m = t.matrix[r][i];
            if m == 0.0 {
                continue;
            }
            for (slot, v) in row_out.iter_mut().zip(row_in) {
                *slot += m * v;
            }
        }
    }
    Ok(BipartiteTensor {
        space_a: t.target.clone(),
        space_b: phi.space_b.clone(),
        coeffs,
    })
}

/// (id⊗T)(φ).
pub fn apply_right(t: &AffineMapGpt, phi: &BipartiteTensor) -> Result<BipartiteTensor> {
    if t.source != phi.space_b {
        return Err(Error::SpaceMismatch {
            expected: t.source.clone(),
            got: phi.space_b.clone(),
        });
    }
    let db = t.out_dim();
    let mut coeffs = vec![vec![0.0; db]; phi.dim_a()];
    for (r, row_out) in coeffs.iter_mut().enumerate() {
        for (cidx, slot) in row_out.iter_mut().enumerate() {
            *slot = phi.coeffs[r]
                .iter()
                .enumerate()
                .map(|(j, v)| v * t.matrix[cidx][j])
                .sum();
        }
    }
    Ok(BipartiteTensor {
        space_a: phi.space_a.clone(),
        space_b: t.target.clone(),
        coeffs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boxes::{box_from_state, chsh};
    use crate::gpt::{
        degree_of_compatibility, find_witness_square, square_symmetries, symmetry_inverse,
    };
    use crate::rng::SplitMix64;

    fn sq() -> StateSpace {
        StateSpace::square()
    }

    fn pi0(s: &StateSpace) -> Effect {
        s.effect(vec![0.0, 1.0, 0.0])
    }

    fn pi1(s: &StateSpace) -> Effect {
        s.effect(vec![0.0, 0.0, 1.0])
    }

    fn random_square_point(s: &StateSpace, rng: &mut SplitMix64) -> DualVector {
        s.dual(vec![1.0, rng.next_f64(), rng.next_f64()])
    }

    #[test]
    fn pr_state_known_pairings() {
        let s = sq();
        let phi = pr_state();
        assert!((phi.pair(&pi0(&s), &pi0(&s)).unwrap() - 0.5).abs() < 1e-15);
        assert!((phi.normalization() - 1.0).abs() < 1e-15);
        // P(−,−|A′,B′) = 0.
        let m1 = pi1(&s).complement();
        assert!(phi.pair(&m1, &m1).unwrap().abs() < 1e-15);
    }

    #[test]
    fn pr_state_is_in_max_but_not_min_tensor() {
        let s = sq();
        let tol = TolerancePolicy::default();
        let phi = pr_state();
        assert!(in_max_tensor(&s, &s, &phi, &tol).unwrap());
        // The PR state reaches CHSH 4 > 2, impossible for separable states,
        // and the LP agrees.
        assert_eq!(
            chsh(&box_from_state(&s, &s, &phi, &pi0(&s), &pi1(&s), &pi0(&s), &pi1(&s)).unwrap()),
            4.0
        );
        assert!(!in_min_tensor(&s, &s, &phi, &tol).unwrap());
        // Scaling breaks normalization.
        assert!(!in_max_tensor(&s, &s, &phi.scale(2.0), &tol).unwrap());
    }

    #[test]
    fn min_tensor_members() {
        let s = sq();
        let tol = TolerancePolicy::default();
        let mix = product_state(&s.vertex(0), &s.vertex(0))
            .add(&product_state(&s.vertex(3), &s.vertex(3)))
            .scale(0.5);
        assert!(in_min_tensor(&s, &s, &mix, &tol).unwrap());
        let mut rng = SplitMix64::new(2);
        for _ in 0..10 {
            let x = random_square_point(&s, &mut rng);
            let y = random_square_point(&s, &mut rng);
            let p = product_state(&x, &y);
            assert!(in_min_tensor(&s, &s, &p, &tol).unwrap());
            assert!(in_max_tensor(&s, &s, &p, &tol).unwrap());
        }
    }

    #[test]
    fn embed_with_identity_maps_is_pr_state() {
        let s = sq();
        let ws = find_witness_square(&s, &pi0(&s), &pi1(&s)).unwrap().unwrap();
        let (iota, _) = build_iota_pi(&s, &ws, &pi0(&s), &pi1(&s)).unwrap();
        let phi = embed(&iota, &iota).unwrap();
        assert!(phi.max_abs_diff(&pr_state()) < 1e-12);
    }

    #[test]
    fn embedded_states_lie_in_max_tensor() {
        let s = sq();
        let tol = TolerancePolicy::default();
        let mut rng = SplitMix64::new(3);
        let syms = square_symmetries();
        for _ in 0..50 {
            let ga = &syms[(rng.next_u64() % 8) as usize];
            let gb = &syms[(rng.next_u64() % 8) as usize];
            let (fa, fap) = {
                let inv = symmetry_inverse(ga);
                (inv.pullback(&pi0(&s)).unwrap(), inv.pullback(&pi1(&s)).unwrap())
            };
            let (fb, fbp) = {
                let inv = symmetry_inverse(gb);
                (inv.pullback(&pi0(&s)).unwrap(), inv.pullback(&pi1(&s)).unwrap())
            };
            let wsa = find_witness_square(&s, &fa, &fap).unwrap().unwrap();
            let wsb = find_witness_square(&s, &fb, &fbp).unwrap().unwrap();
            let (iota_a, _) = build_iota_pi(&s, &wsa, &fa, &fap).unwrap();
            let (iota_b, _) = build_iota_pi(&s, &wsb, &fb, &fbp).unwrap();
            let phi = embed(&iota_a, &iota_b).unwrap();
            assert!(in_max_tensor(&s, &s, &phi, &tol).unwrap());
        }
    }

    #[test]
    fn partial_apply_basics() {
        let s = sq();
        let mut rng = SplitMix64::new(5);
        let x = random_square_point(&s, &mut rng);
        let y = random_square_point(&s, &mut rng);
        let p = product_state(&x, &y);
        // (1⊗id)(x⊗y) = y.
        let marg_b = partial_apply(&s.unit_effect(), &p, Side::Alice).unwrap();
        assert!(marg_b.max_abs_diff(&y) < 1e-15);
        let marg_a = partial_apply(&s.unit_effect(), &p, Side::Bob).unwrap();
        assert!(marg_a.max_abs_diff(&x) < 1e-15);
        // (π₀⊗id)(φ_S) = ½ s11.
        let phi = pr_state();
        let half_s11 = partial_apply(&pi0(&s), &phi, Side::Alice).unwrap();
        assert!(half_s11.max_abs_diff(&s.vertex(3).scale(0.5)) < 1e-15);
    }

    #[test]
    fn partial_apply_defining_identity() {
        let s = sq();
        let mut rng = SplitMix64::new(7);
        let phi = pr_state();
        for _ in 0..100 {
            let f = crate::gpt::tests::random_effect(&s, &mut rng);
            let g = crate::gpt::tests::random_effect(&s, &mut rng);
            let lhs = {
                let v = partial_apply(&f, &phi, Side::Alice).unwrap();
                g.eval(&v).unwrap()
            };
            let rhs = phi.pair(&f, &g).unwrap();
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn pr_state_unique_for_its_box() {
        // Fixing all sixteen product pairings pins every coefficient; an LP
        // search for a second state in the maximal tensor product with the
        // same box is infeasible in every coordinate direction.
        let s = sq();
        let phi = pr_state();
        let effects = [
            pi0(&s),
            pi0(&s).complement(),
            pi1(&s),
            pi1(&s).complement(),
        ];
        let n = 9; // coefficients, split into x⁺−x⁻ by the wrapper
        for dir in 0..n {
            for sign in [1.0, -1.0] {
                let mut prog = crate::lp::FreeVarLp::new(n, 0);
                for f in &effects {
                    for g in &effects {
                        let mut row = vec![0.0; n];
                        for i in 0..3 {
                            for j in 0..3 {
                                row[i * 3 + j] = f.coords[i] * g.coords[j];
                            }
                        }
                        let target = phi.pair(f, g).unwrap();
                        prog.constrain(&row, Rel::Eq, target);
                    }
                }
                // Maximal-tensor cone constraints.
                for ga in &s.cone_generators {
                    for gb in &s.cone_generators {
                        let mut row = vec![0.0; n];
                        for i in 0..3 {
                            for j in 0..3 {
                                row[i * 3 + j] = ga[i] * gb[j];
                            }
                        }
                        prog.constrain(&row, Rel::Ge, 0.0);
                    }
                }
                // Demand a deviation in this coordinate direction.
                let mut dev = vec![0.0; n];
                dev[dir] = sign;
                let target = phi.coeffs[dir / 3][dir % 3];
                prog.constrain(&dev, Rel::Ge, sign * target + 1e-6);
                assert!(
                    prog.feasible_point().is_none(),
                    "found a second state deviating in coordinate {dir} (sign {sign})"
                );
            }
        }
    }

    #[test]
    fn decompose_identity_embedding() {
        let s = sq();
        let phi = pr_state();
        let d = decompose_pr_state(&s, &s, &phi, &pi0(&s), &pi1(&s), &pi0(&s), &pi1(&s)).unwrap();
        assert!(d.phi_perp.max_abs() < 1e-12);
        assert!(d.projection_residual < 1e-12);
        assert!(d.kernel_residuals.0 < 1e-12 && d.kernel_residuals.1 < 1e-12);
        // Witness squares are the vertex squares.
        for (i, v) in [0, 1, 2, 3].iter().enumerate() {
            assert!(d.witness_b.points[i].max_abs_diff(&s.vertex(*v)) < 1e-12);
        }
    }

    #[test]
    fn decompose_random_embeddings_has_zero_remainder() {
        let s = sq();
        let mut rng = SplitMix64::new(11);
        let syms = square_symmetries();
        for _ in 0..25 {
            let ga = &syms[(rng.next_u64() % 8) as usize];
            let gb = &syms[(rng.next_u64() % 8) as usize];
            let inv_a = symmetry_inverse(ga);
            let inv_b = symmetry_inverse(gb);
            let (fa, fap) = (inv_a.pullback(&pi0(&s)).unwrap(), inv_a.pullback(&pi1(&s)).unwrap());
            let (fb, fbp) = (inv_b.pullback(&pi0(&s)).unwrap(), inv_b.pullback(&pi1(&s)).unwrap());
            let wsa = find_witness_square(&s, &fa, &fap).unwrap().unwrap();
            let wsb = find_witness_square(&s, &fb, &fbp).unwrap().unwrap();
            let (iota_a, _) = build_iota_pi(&s, &wsa, &fa, &fap).unwrap();
            let (iota_b, _) = build_iota_pi(&s, &wsb, &fb, &fbp).unwrap();
            let phi = embed(&iota_a, &iota_b).unwrap();
            let d = decompose_pr_state(&s, &s, &phi, &fa, &fap, &fb, &fbp).unwrap();
            assert!(d.phi_perp.max_abs() < 1e-9, "remainder {}", d.phi_perp.max_abs());
            assert!(d.projection_residual < 1e-9);
            // Reconstruction identity.
            let rebuilt = embed(&d.iota_a, &d.iota_b).unwrap().add(&d.phi_perp);
            assert!(rebuilt.max_abs_diff(&phi) < 1e-9);
        }
    }

    #[test]
    fn decompose_rejects_non_pr_input() {
        let s = sq();
        let mut rng = SplitMix64::new(13);
        let x = random_square_point(&s, &mut rng);
        let y = random_square_point(&s, &mut rng);
        let p = product_state(&x, &y);
        assert!(decompose_pr_state(&s, &s, &p, &pi0(&s), &pi1(&s), &pi0(&s), &pi1(&s)).is_err());
    }

    #[test]
    fn degcom_connection_on_pair_space() {
        // Effects acting on the first square of the composite are maximally
        // incompatible there as well.
        let k = StateSpace::nonsignaling_square_pair();
        let mut f = vec![0.0; 9];
        f[3] = 1.0;
        let mut g = vec![0.0; 9];
        g[6] = 1.0;
        let d = degree_of_compatibility(&k, &k.effect(f), &k.effect(g)).unwrap();
        assert!((d - 0.5).abs() < 1e-9);
    }

    #[test]
    fn bipartite_tensor_json_shape() {
        let phi = pr_state();
        let j = serde_json::to_string(&phi).unwrap();
        let v: serde_json::Value = serde_json::from_str(&j).unwrap();
        assert_eq!(v["spaceA"], "square");
        assert_eq!(v["spaceB"], "square");
        assert_eq!(v["coeffs"].as_array().unwrap().len(), 3);
        let back: BipartiteTensor = serde_json::from_str(&j).unwrap();
        assert_eq!(back, phi);
    }
}
