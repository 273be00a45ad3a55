//! Polytopic state spaces, effects and two-outcome measurements.
//!
//! A state space is a compact convex polytope given by its extreme points,
//! together with a basis of its affine function space (element 0 is always
//! the unit effect) and the extremal rays of the positive-function cone.
//! Dual vectors carry the values of a functional on that basis; effects
//! carry coefficients in the basis. All compatibility questions reduce to
//! small linear programs with constraints imposed at the vertices, which is
//! sufficient because affine functions attain their extrema at extreme
//! points.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{self, Constraint, FreeVarLp, LpOutcome, Rel};
use crate::tol::TolerancePolicy;

/// A compact convex polytope with the data needed for effect-side LPs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSpace {
    pub name: String,
    pub basis_labels: Vec<String>,
    /// Extreme points in dual coordinates (values on the basis functionals).
    pub vertices: Vec<Vec<f64>>,
    /// Extremal rays of the cone of nonnegative affine functions, as
    /// coefficient vectors in the basis.
    pub cone_generators: Vec<Vec<f64>>,
}

/// Element of the dual space: values of a functional on the basis of A(K).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualVector {
    pub space: String,
    pub coords: Vec<f64>,
}

/// Affine functional in basis coefficients; valid effects take values in
/// [0, 1] on every vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Effect {
    pub space: String,
    pub coords: Vec<f64>,
}

/// A two-outcome measurement, stored through its outcome-(+1) effect.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoOutcomeMeasurement {
    pub plus_effect: Effect,
    pub label: String,
}

/// Four states x00, x10, x01, x11 with x00 + x11 = x10 + x01 on which a
/// pair of effects takes the extremal 0/1 pattern. Existence certifies
/// maximal incompatibility of the pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessSquare {
    pub space: String,
    /// Order: x00, x10, x01, x11.
    pub points: [DualVector; 4],
}

/// Linear map between dual spaces (dual coordinates), affine on states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineMapGpt {
    pub source: String,
    pub target: String,
    /// target_dim × source_dim.
    pub matrix: Vec<Vec<f64>>,
}

impl StateSpace {
    pub fn dim(&self) -> usize {
        self.basis_labels.len()
    }

    /// The classical bit: two deterministic states, basis {1, π}.
    pub fn classical_bit() -> Self {
        StateSpace {
            name: "cbit".into(),
            basis_labels: vec!["1".into(), "pi".into()],
            vertices: vec![vec![1.0, 0.0], vec![1.0, 1.0]],
            cone_generators: vec![vec![0.0, 1.0], vec![1.0, -1.0]],
        }
    }

    /// The square state space: four extreme points s_ij with
    /// s00 + s11 = s10 + s01, basis {1, π₀, π₁}, π₀(s_ij) = i, π₁(s_ij) = j.
    pub fn square() -> Self {
        StateSpace {
            name: "square".into(),
            basis_labels: vec!["1".into(), "pi0".into(), "pi1".into()],
            // order: s00, s10, s01, s11
            vertices: vec![
                vec![1.0, 0.0, 0.0],
                vec![1.0, 1.0, 0.0],
                vec![1.0, 0.0, 1.0],
                vec![1.0, 1.0, 1.0],
            ],
            cone_generators: vec![
                vec![0.0, 1.0, 0.0],  // π₀
                vec![1.0, -1.0, 0.0], // 1−π₀
                vec![0.0, 0.0, 1.0],  // π₁
                vec![1.0, 0.0, -1.0], // 1−π₁
            ],
        }
    }

    /// The maximal tensor product of two squares as a polytope in its own
    /// right: 16 product vertices plus the 8 extremal nonlocal boxes, with
    /// the 16 products of square cone generators as effect-cone generators.
    /// Basis: products of {1, π₀, π₁}, index a·3+b.
    pub fn nonsignaling_square_pair() -> Self {
        let sq = Self::square();
        let mut vertices: Vec<Vec<f64>> = Vec::new();
        for x in &sq.vertices {
            for y in &sq.vertices {
                let mut v = Vec::with_capacity(9);
                for a in 0..3 {
                    for b in 0..3 {
                        v.push(x[a] * y[b]);
                    }
                }
                vertices.push(v);
            }
        }
        // Extremal nonlocal vertices: correlation sign patterns
        // (σ_AB, σ_AB', σ_A'B, σ_A'B') with product −1; all marginals ½ and
        // P(+,+|C,D) = (1+σ_CD)/4.
        for bits in 0..16u8 {
            let sig: Vec<f64> = (0..4).map(|k| if bits >> k & 1 == 0 { 1.0 } else { -1.0 }).collect();
            if sig.iter().product::<f64>() > 0.0 {
                continue;
            }
            let q = |s: f64| (1.0 + s) / 4.0;
            vertices.push(vec![
                1.0,
                0.5,
                0.5,
                0.5,
                q(sig[0]),
                q(sig[1]),
                0.5,
                q(sig[2]),
                q(sig[3]),
            ]);
        }
        let mut cone_generators = Vec::new();
        for ga in &sq.cone_generators {
            for gb in &sq.cone_generators {
                let mut g = Vec::with_capacity(9);
                for a in 0..3 {
                    for b in 0..3 {
                        g.push(ga[a] * gb[b]);
                    }
                }
                cone_generators.push(g);
            }
        }
        let mut basis_labels = Vec::with_capacity(9);
        for a in ["1", "pi0", "pi1"] {
            for b in ["1", "pi0", "pi1"] {
                if a == "1" && b == "1" {
                    basis_labels.push("1".into());
                } else {
                    basis_labels.push(format!("{a}*{b}"));
                }
            }
        }
        StateSpace {
            name: "square_pair".into(),
            basis_labels,
            vertices,
            cone_generators,
        }
    }

    /// Built-in spaces by name.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "cbit" => Ok(Self::classical_bit()),
            "square" => Ok(Self::square()),
            "square_pair" => Ok(Self::nonsignaling_square_pair()),
            other => Err(Error::UnknownBuiltin(other.into())),
        }
    }

    /// Structural invariants: the unit evaluates to 1 on every vertex, cone
    /// generators are nonnegative on every vertex, and the vertices affinely
    /// span a set of dimension dim−1.
    pub fn validate(&self, tol: &TolerancePolicy) -> Result<()> {
        let d = self.dim();
        if self.basis_labels.is_empty() || self.basis_labels[0] != "1" {
            return Err(Error::InvalidInput(
                "basis element 0 must be the unit effect \"1\"".into(),
            ));
        }
        for v in &self.vertices {
            if v.len() != d {
                return Err(Error::DimMismatch("vertex length != dim".into()));
            }
            if (v[0] - 1.0).abs() > tol.eps_eq {
                return Err(Error::InvalidInput(format!(
                    "unit effect is {} ≠ 1 on a vertex",
                    v[0]
                )));
            }
            for g in &self.cone_generators {
                let val: f64 = g.iter().zip(v).map(|(a, b)| a * b).sum();
                if val < -tol.eps_eq {
                    return Err(Error::InvalidInput(format!(
                        "cone generator takes value {val} < 0 on a vertex"
                    )));
                }
            }
        }
        // Affine span: rank of [v_i − v_0] must be dim−1.
        if let Some(v0) = self.vertices.first() {
            let diffs: Vec<Vec<f64>> = self.vertices[1..]
                .iter()
                .map(|v| v.iter().zip(v0).map(|(a, b)| a - b).collect())
                .collect();
            if real_rank(&diffs) != d - 1 {
                return Err(Error::InvalidInput(format!(
                    "vertices do not affinely span dimension {}",
                    d - 1
                )));
            }
        }
        Ok(())
    }

    pub fn unit_effect(&self) -> Effect {
        let mut coords = vec![0.0; self.dim()];
        coords[0] = 1.0;
        Effect {
            space: self.name.clone(),
            coords,
        }
    }

    pub fn zero_effect(&self) -> Effect {
        Effect {
            space: self.name.clone(),
            coords: vec![0.0; self.dim()],
        }
    }

    pub fn vertex(&self, i: usize) -> DualVector {
        DualVector {
            space: self.name.clone(),
            coords: self.vertices[i].clone(),
        }
    }

    pub fn effect(&self, coords: Vec<f64>) -> Effect {
        Effect {
            space: self.name.clone(),
            coords,
        }
    }

    pub fn dual(&self, coords: Vec<f64>) -> DualVector {
        DualVector {
            space: self.name.clone(),
            coords,
        }
    }

    fn check_effect(&self, f: &Effect) -> Result<()> {
        if f.space != self.name {
            return Err(Error::SpaceMismatch {
                expected: self.name.clone(),
                got: f.space.clone(),
            });
        }
        if f.coords.len() != self.dim() {
            return Err(Error::DimMismatch("effect coordinate length".into()));
        }
        Ok(())
    }

    fn check_dual(&self, x: &DualVector) -> Result<()> {
        if x.space != self.name {
            return Err(Error::SpaceMismatch {
                expected: self.name.clone(),
                got: x.space.clone(),
            });
        }
        if x.coords.len() != self.dim() {
            return Err(Error::DimMismatch("dual coordinate length".into()));
        }
        Ok(())
    }

    /// Is `f` a valid effect: 0 ≤ f ≤ 1 on every vertex.
    pub fn is_valid_effect(&self, f: &Effect, tol: &TolerancePolicy) -> Result<bool> {
        self.check_effect(f)?;
        Ok(self.vertices.iter().all(|v| {
            let val: f64 = f.coords.iter().zip(v).map(|(a, b)| a * b).sum();
            val >= -tol.eps_eq && val <= 1.0 + tol.eps_eq
        }))
    }
}

impl Effect {
    /// Pairing f(x) = Σ f_i x_i.
    pub fn eval(&self, x: &DualVector) -> Result<f64> {
        if self.space != x.space {
            return Err(Error::SpaceMismatch {
                expected: self.space.clone(),
                got: x.space.clone(),
            });
        }
        if self.coords.len() != x.coords.len() {
            return Err(Error::DimMismatch("effect/dual coordinate length".into()));
        }
        Ok(self.coords.iter().zip(&x.coords).map(|(a, b)| a * b).sum())
    }

    /// 1 − f.
    pub fn complement(&self) -> Effect {
        let mut coords: Vec<f64> = self.coords.iter().map(|v| -v).collect();
        coords[0] += 1.0;
        Effect {
            space: self.space.clone(),
            coords,
        }
    }
}

impl DualVector {
    pub fn add(&self, other: &DualVector) -> DualVector {
        DualVector {
            space: self.space.clone(),
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &DualVector) -> DualVector {
        DualVector {
            space: self.space.clone(),
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, s: f64) -> DualVector {
        DualVector {
            space: self.space.clone(),
            coords: self.coords.iter().map(|v| v * s).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &DualVector) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Is `x` a convex combination of the vertices of `space`? The input must be
/// normalized (unit pairing 1); feasibility is tested within `tol.eps_eq`.
pub fn membership(space: &StateSpace, x: &DualVector, tol: &TolerancePolicy) -> Result<bool> {
    space.check_dual(x)?;
    if (x.coords[0] - 1.0).abs() > tol.eps_eq {
        return Err(Error::InvalidInput(format!(
            "membership requires a normalized vector, unit pairing is {}",
            x.coords[0]
        )));
    }
    let nv = space.vertices.len();
    let mut cons = Vec::new();
    // Σ λ_k = 1
    cons.push(Constraint::new(vec![1.0; nv], Rel::Eq, 1.0));
    // Σ λ_k v_k[c] = x[c] within eps
    for cidx in 0..space.dim() {
        let row: Vec<f64> = space.vertices.iter().map(|v| v[cidx]).collect();
        cons.push(Constraint::new(row.clone(), Rel::Le, x.coords[cidx] + tol.eps_eq));
        cons.push(Constraint::new(row, Rel::Ge, x.coords[cidx] - tol.eps_eq));
    }
    Ok(lp::feasible_point(nv, &cons).is_some())
}

/// Joint measurability of the two-outcome measurements given by `f` and `g`:
/// feasibility of p ∈ E(K) with p ≤ f, p ≤ g and f + g − 1 ≤ p, imposed at
/// the vertices.
pub fn are_compatible(space: &StateSpace, f: &Effect, g: &Effect) -> Result<bool> {
    space.check_effect(f)?;
    space.check_effect(g)?;
    let d = space.dim();
    let mut prog = FreeVarLp::new(d, 0);
    for v in &space.vertices {
        let fv: f64 = f.coords.iter().zip(v).map(|(a, b)| a * b).sum();
        let gv: f64 = g.coords.iter().zip(v).map(|(a, b)| a * b).sum();
        let pv: Vec<f64> = v.clone();
        prog.constrain(&pv, Rel::Le, fv); // p(v) ≤ f(v)
        prog.constrain(&pv, Rel::Le, gv); // p(v) ≤ g(v)
        prog.constrain(&pv, Rel::Ge, fv + gv - 1.0); // f+g−1 ≤ p
        prog.constrain(&pv, Rel::Ge, 0.0); // p ≥ 0
        prog.constrain(&pv, Rel::Le, 1.0); // p ≤ 1
    }
    Ok(prog.feasible_point().is_some())
}

/// Largest λ such that mixing both measurements with trivial (coin-toss)
/// measurements at weight 1−λ makes the pair compatible. The program uses
/// the substitution m = (1−λ)μ, m′ = (1−λ)μ′ to stay linear; the optimum
/// lies in [½, 1].
pub fn degree_of_compatibility(space: &StateSpace, f: &Effect, g: &Effect) -> Result<f64> {
    space.check_effect(f)?;
    space.check_effect(g)?;
    let d = space.dim();
    // Free: p (d coords). Extra nonnegative: λ, m, m′.
    let mut prog = FreeVarLp::new(d, 3);
    let mut obj = vec![0.0; d + 3];
    obj[d] = 1.0;
    prog.set_objective(&obj);
    let mut row = vec![0.0; d + 3];
    for v in &space.vertices {
        let fv: f64 = f.coords.iter().zip(v).map(|(a, b)| a * b).sum();
        let gv: f64 = g.coords.iter().zip(v).map(|(a, b)| a * b).sum();
        // p(v) − λ f(v) − m ≤ 0
        row[..d].copy_from_slice(v);
        row[d] = -fv;
        row[d + 1] = -1.0;
        row[d + 2] = 0.0;
        prog.constrain(&row, Rel::Le, 0.0);
        // p(v) − λ g(v) − m′ ≤ 0
        row[d] = -gv;
        row[d + 1] = 0.0;
        row[d + 2] = -1.0;
        prog.constrain(&row, Rel::Le, 0.0);
        // λ(f+g)(v) + m + m′ − p(v) ≤ 1
        for (slot, vi) in row[..d].iter_mut().zip(v) {
            *slot = -vi;
        }
        row[d] = fv + gv;
        row[d + 1] = 1.0;
        row[d + 2] = 1.0;
        prog.constrain(&row, Rel::Le, 1.0);
        // 0 ≤ p(v) ≤ 1
        row[..d].copy_from_slice(v);
        row[d] = 0.0;
        row[d + 1] = 0.0;
        row[d + 2] = 0.0;
        prog.constrain(&row, Rel::Ge, 0.0);
        prog.constrain(&row, Rel::Le, 1.0);
        row.iter_mut().for_each(|x| *x = 0.0);
    }
    // m ≤ 1−λ, m′ ≤ 1−λ, λ ≤ 1
    let mut r = vec![0.0; d + 3];
    r[d] = 1.0;
    r[d + 1] = 1.0;
    prog.constrain(&r, Rel::Le, 1.0);
    r[d + 1] = 0.0;
    r[d + 2] = 1.0;
    prog.constrain(&r, Rel::Le, 1.0);
    r[d + 2] = 0.0;
    prog.constrain(&r, Rel::Le, 1.0);
    match prog.maximize() {
        LpOutcome::Optimal { value, .. } => Ok(value),
        LpOutcome::Infeasible => Err(Error::Lp("degree-of-compatibility program infeasible".into())),
        LpOutcome::Unbounded => Err(Error::Lp("degree-of-compatibility program unbounded".into())),
    }
}

/// Search for a witness square for the pair (f, g): four points, each a
/// convex combination of vertices, with the extremal value pattern and the
/// parallelogram identity. `None` when the pair is not maximally
/// incompatible. The first feasible basic solution is returned; witness
/// squares may be non-unique.
pub fn find_witness_square(
    space: &StateSpace,
    f: &Effect,
    g: &Effect,
) -> Result<Option<WitnessSquare>> {
    space.check_effect(f)?;
    space.check_effect(g)?;
    let d = space.dim();
    let nv = space.vertices.len();
    let n = 4 * nv; // λ weights for x00, x10, x01, x11
    let mut cons = Vec::new();

    let block = |m: usize, coeffs: &[f64]| -> Vec<f64> {
        let mut row = vec![0.0; n];
        row[m * nv..(m + 1) * nv].copy_from_slice(coeffs);
        row
    };

    let fv: Vec<f64> = space
        .vertices
        .iter()
        .map(|v| f.coords.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect();
    let gv: Vec<f64> = space
        .vertices
        .iter()
        .map(|v| g.coords.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect();
    let ones = vec![1.0; nv];

    for m in 0..4 {
        cons.push(Constraint::new(block(m, &ones), Rel::Eq, 1.0));
    }
    // Value pattern (point order x00, x10, x01, x11):
    //   f: 0, 1, 0, 1      g: 0, 0, 1, 1
    let f_targets = [0.0, 1.0, 0.0, 1.0];
    let g_targets = [0.0, 0.0, 1.0, 1.0];
    for m in 0..4 {
        cons.push(Constraint::new(block(m, &fv), Rel::Eq, f_targets[m]));
        cons.push(Constraint::new(block(m, &gv), Rel::Eq, g_targets[m]));
    }
    // Parallelogram x00 + x11 − x10 − x01 = 0, coordinatewise.
    for cidx in 0..d {
        let vals: Vec<f64> = space.vertices.iter().map(|v| v[cidx]).collect();
        let mut row = vec![0.0; n];
        for (k, &val) in vals.iter().enumerate() {
            row[k] += val; // x00
            row[3 * nv + k] += val; // x11
            row[nv + k] -= val; // x10
            row[2 * nv + k] -= val; // x01
        }
        cons.push(Constraint::new(row, Rel::Eq, 0.0));
    }

    let Some(sol) = lp::feasible_point(n, &cons) else {
        return Ok(None);
    };
    let mut points = Vec::with_capacity(4);
    for m in 0..4 {
        let mut coords = vec![0.0; d];
        for (k, v) in space.vertices.iter().enumerate() {
            let w = sol[m * nv + k];
            for (ci, vc) in coords.iter_mut().zip(v) {
                *ci += w * vc;
            }
        }
        points.push(DualVector {
            space: space.name.clone(),
            coords,
        });
    }
    Ok(Some(WitnessSquare {
        space: space.name.clone(),
        points: [
            points[0].clone(),
            points[1].clone(),
            points[2].clone(),
            points[3].clone(),
        ],
    }))
}

impl WitnessSquare {
    pub fn x00(&self) -> &DualVector {
        &self.points[0]
    }
    pub fn x10(&self) -> &DualVector {
        &self.points[1]
    }
    pub fn x01(&self) -> &DualVector {
        &self.points[2]
    }
    pub fn x11(&self) -> &DualVector {
        &self.points[3]
    }

    /// Full validation against a pair of effects: parallelogram identity,
    /// membership of each point, and the eight value constraints.
    pub fn validate(
        &self,
        space: &StateSpace,
        f: &Effect,
        g: &Effect,
        tol: &TolerancePolicy,
    ) -> Result<()> {
        let para = self
            .x00()
            .add(self.x11())
            .max_abs_diff(&self.x10().add(self.x01()));
        if para > tol.eps_eq {
            return Err(Error::InvalidInput(format!(
                "witness square parallelogram residual {para:.3e}"
            )));
        }
        for p in &self.points {
            if !membership(space, p, tol)? {
                return Err(Error::InvalidInput(
                    "witness square point lies outside the state space".into(),
                ));
            }
        }
        let f_targets = [0.0, 1.0, 0.0, 1.0];
        let g_targets = [0.0, 0.0, 1.0, 1.0];
        for (m, p) in self.points.iter().enumerate() {
            if (f.eval(p)? - f_targets[m]).abs() > tol.eps_eq
                || (g.eval(p)? - g_targets[m]).abs() > tol.eps_eq
            {
                return Err(Error::InvalidInput(format!(
                    "witness square value pattern violated at point {m}"
                )));
            }
        }
        Ok(())
    }
}

/// The embedding/retraction pair attached to a witness square: ι maps the
/// square into K with ι(s_ij) = x_ij; Π retracts K onto the square through
/// the two effect values, Π(x) = f(x)(s10−s00) + g(x)(s01−s00) + s00.
/// Always Π∘ι = id on the square's dual space.
pub fn build_iota_pi(
    space: &StateSpace,
    ws: &WitnessSquare,
    f: &Effect,
    g: &Effect,
) -> Result<(AffineMapGpt, AffineMapGpt)> {
    let tol = TolerancePolicy::default();
    ws.validate(space, f, g, &tol)?;
    let d = space.dim();
    // In the square's dual coordinates the basis dual to {1, π₀, π₁} is
    // {s00, s10−s00, s01−s00} = standard basis, so the columns of ι are
    // x00, x10−x00, x01−x00.
    let x00 = &ws.x00().coords;
    let col1: Vec<f64> = ws.x10().coords.iter().zip(x00).map(|(a, b)| a - b).collect();
    let col2: Vec<f64> = ws.x01().coords.iter().zip(x00).map(|(a, b)| a - b).collect();
    let mut iota = vec![vec![0.0; 3]; d];
    for r in 0..d {
        iota[r][0] = x00[r];
        iota[r][1] = col1[r];
        iota[r][2] = col2[r];
    }
    let pi = vec![
        {
            let mut unit = vec![0.0; d];
            unit[0] = 1.0;
            unit
        },
        f.coords.clone(),
        g.coords.clone(),
    ];
    let iota_map = AffineMapGpt {
        source: "square".into(),
        target: space.name.clone(),
        matrix: iota,
    };
    let pi_map = AffineMapGpt {
        source: space.name.clone(),
        target: "square".into(),
        matrix: pi,
    };
    // Π∘ι = id on A(S)*.
    let comp = pi_map.compose(&iota_map)?;
    for r in 0..3 {
        for c_ in 0..3 {
            let want = if r == c_ { 1.0 } else { 0.0 };
            if (comp.matrix[r][c_] - want).abs() > 1e-10 {
                return Err(Error::Numerics(format!(
                    "Π∘ι deviates from the identity at ({r},{c_}): {}",
                    comp.matrix[r][c_]
                )));
            }
        }
    }
    Ok((iota_map, pi_map))
}

/// The connecting map T = ι_A ∘ Π_B between two maximally incompatible
/// pairs on the same space: f_B = f_A∘T, f_B′ = f_A′∘T, ι_A = T∘ι_B and
/// Π_B = Π_A∘T.
pub fn connecting_map(iota_a: &AffineMapGpt, pi_b: &AffineMapGpt) -> Result<AffineMapGpt> {
    iota_a.compose(pi_b)
}

impl AffineMapGpt {
    pub fn identity(space: &StateSpace) -> Self {
        let d = space.dim();
        let mut m = vec![vec![0.0; d]; d];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        AffineMapGpt {
            source: space.name.clone(),
            target: space.name.clone(),
            matrix: m,
        }
    }

    pub fn out_dim(&self) -> usize {
        self.matrix.len()
    }

    pub fn in_dim(&self) -> usize {
        self.matrix.first().map(|r| r.len()).unwrap_or(0)
    }

    pub fn apply(&self, x: &DualVector) -> Result<DualVector> {
        if x.space != self.source {
            return Err(Error::SpaceMismatch {
                expected: self.source.clone(),
                got: x.space.clone(),
            });
        }
        if x.coords.len() != self.in_dim() {
            return Err(Error::DimMismatch("map/vector dimensions".into()));
        }
        Ok(DualVector {
            space: self.target.clone(),
            coords: self
                .matrix
                .iter()
                .map(|row| row.iter().zip(&x.coords).map(|(a, b)| a * b).sum())
                .collect(),
        })
    }

    /// Pull an effect on the target back to the source: f ↦ f∘T.
    pub fn pullback(&self, f: &Effect) -> Result<Effect> {
        if f.space != self.target {
            return Err(Error::SpaceMismatch {
                expected: self.target.clone(),
                got: f.space.clone(),
            });
        }
        let n = self.in_dim();
        let mut coords = vec![0.0; n];
        for (row, fr) in self.matrix.iter().zip(&f.coords) {
            for (slot, m) in coords.iter_mut().zip(row) {
                *slot += fr * m;
            }
        }
        Ok(Effect {
            space: self.source.clone(),
            coords,
        })
    }

    /// self ∘ other.
    pub fn compose(&self, other: &AffineMapGpt) -> Result<AffineMapGpt> {
        if other.target != self.source {
            return Err(Error::SpaceMismatch {
                expected: self.source.clone(),
                got: other.target.clone(),
            });
        }
        if self.in_dim() != other.out_dim() {
            return Err(Error::DimMismatch("map composition dimensions".into()));
        }
        let rows = self.out_dim();
        let cols = other.in_dim();
        let inner = self.in_dim();
        let mut m = vec![vec![0.0; cols]; rows];
        for r in 0..rows {
            for c_ in 0..cols {
                let mut acc = 0.0;
                for k in 0..inner {
                    acc += self.matrix[r][k] * other.matrix[k][c_];
                }
                m[r][c_] = acc;
            }
        }
        Ok(AffineMapGpt {
            source: other.source.clone(),
            target: self.target.clone(),
            matrix: m,
        })
    }

    pub fn max_abs_diff(&self, other: &AffineMapGpt) -> f64 {
        let mut worst = 0.0f64;
        for (r1, r2) in self.matrix.iter().zip(&other.matrix) {
            for (a, b) in r1.iter().zip(r2) {
                worst = worst.max((a - b).abs());
            }
        }
        worst
    }
}

/// The eight affine automorphisms of the square in dual coordinates
/// (dihedral group: axis swap and the coordinate flips x↦1−x, y↦1−y).
pub fn square_symmetries() -> Vec<AffineMapGpt> {
    let mut out = Vec::with_capacity(8);
    for swap in [false, true] {
        for flip_x in [false, true] {
            for flip_y in [false, true] {
                // (1, x, y) ↦ (1, X, Y)
                let mut m = vec![vec![0.0; 3]; 3];
                m[0][0] = 1.0;
                let mut set_row = |r: usize, src: usize, flip: bool| {
                    if flip {
                        m[r][0] = 1.0;
                        m[r][src] = -1.0;
                    } else {
                        m[r][src] = 1.0;
                    }
                };
                let (sx, sy) = if swap { (2, 1) } else { (1, 2) };
                set_row(1, sx, flip_x);
                set_row(2, sy, flip_y);
                out.push(AffineMapGpt {
                    source: "square".into(),
                    target: "square".into(),
                    matrix: m,
                });
            }
        }
    }
    out
}

/// Inverse of a square symmetry, found inside the group.
pub fn symmetry_inverse(g: &AffineMapGpt) -> AffineMapGpt {
    for h in square_symmetries() {
        if let Ok(comp) = h.compose(g) {
            let sq = StateSpace::square();
            if comp.max_abs_diff(&AffineMapGpt::identity(&sq)) < 1e-12 {
                return h;
            }
        }
    }
    unreachable!("group closed under inverse");
}

fn real_rank(rows: &[Vec<f64>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let mut m: Vec<Vec<f64>> = rows.to_vec();
    let ncols = m[0].len();
    let mut rank = 0;
    for col in 0..ncols {
        let Some(pivot) = (rank..m.len()).max_by(|&a, &b| {
            m[a][col]
                .abs()
                .partial_cmp(&m[b][col].abs())
                .unwrap()
        }) else {
            break;
        };
        if m[pivot][col].abs() < 1e-10 {
            continue;
        }
        m.swap(rank, pivot);
        let p = m[rank][col];
        for r in 0..m.len() {
            if r != rank {
                let factor = m[r][col] / p;
                for c_ in 0..ncols {
                    let delta = factor * m[rank][c_];
                    m[r][c_] -= delta;
                }
            }
        }
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    rank
}

#[cfg(test)]
pub(crate) mod tests;
