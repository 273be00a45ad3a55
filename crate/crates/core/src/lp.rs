//! Dense two-phase simplex.
//!
//! Small self-contained solver for the feasibility and optimization queries
//! made by the polytope modules: variables are nonnegative, constraints are
//! `≤`, `≥` or `=`, and the objective is maximized. Bland's rule is used for
//! pivot selection, so the iteration cannot cycle. Problem sizes here stay
//! below a few hundred variables, so a full tableau is fine.

const TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rel {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub rel: Rel,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(coeffs: Vec<f64>, rel: Rel, rhs: f64) -> Self {
        Constraint { coeffs, rel, rhs }
    }
}

#[derive(Debug, Clone)]
pub enum LpOutcome {
    /// Optimal solution over x ≥ 0. `x` holds the original variables only.
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

/// Maximize `objective · x` subject to the constraints and x ≥ 0.
pub fn maximize(n_vars: usize, objective: &[f64], constraints: &[Constraint]) -> LpOutcome {
    assert_eq!(objective.len(), n_vars);
    for con in constraints {
        assert_eq!(con.coeffs.len(), n_vars, "constraint arity mismatch");
    }

    let m = constraints.len();
    // Column layout: [original | slack/surplus | artificial].
    let mut n_slack = 0usize;
    for con in constraints {
        if con.rel != Rel::Eq {
            n_slack += 1;
        }
    }
    let total = n_vars + n_slack + m; // one artificial per row, some unused
    let mut tableau = vec![vec![0.0f64; total + 1]; m];
    let mut basis = vec![0usize; m];
    let mut is_artificial = vec![false; total];

    let mut slack_idx = n_vars;
    let art_base = n_vars + n_slack;
    let mut n_art = 0usize;

    for (i, con) in constraints.iter().enumerate() {
        let mut coeffs = con.coeffs.clone();
        let mut rhs = con.rhs;
        let mut rel = con.rel;
        if rhs < 0.0 {
            for v in &mut coeffs {
                *v = -*v;
            }
            rhs = -rhs;
            rel = match rel {
                Rel::Le => Rel::Ge,
                Rel::Ge => Rel::Le,
                Rel::Eq => Rel::Eq,
            };
        }
        for (j, &v) in coeffs.iter().enumerate() {
            tableau[i][j] = v;
        }
        tableau[i][total] = rhs;
        match rel {
            Rel::Le => {
                tableau[i][slack_idx] = 1.0;
                basis[i] = slack_idx;
                slack_idx += 1;
            }
            Rel::Ge => {
                tableau[i][slack_idx] = -1.0;
                slack_idx += 1;
                let a = art_base + n_art;
                tableau[i][a] = 1.0;
                is_artificial[a] = true;
                basis[i] = a;
                n_art += 1;
            }
            Rel::Eq => {
                let a = art_base + n_art;
                tableau[i][a] = 1.0;
                is_artificial[a] = true;
                basis[i] = a;
                n_art += 1;
            }
        }
    }
    let ncols = total;

    // Phase 1: maximize -(sum of artificials).
    if n_art > 0 {
        let mut obj = vec![0.0f64; ncols];
        for (j, flag) in is_artificial.iter().enumerate() {
            if *flag {
                obj[j] = -1.0;
            }
        }
        match run_simplex(&mut tableau, &mut basis, &obj, ncols, None) {
            SimplexEnd::Optimal(value) => {
                if value < -TOL {
                    return LpOutcome::Infeasible;
                }
            }
            SimplexEnd::Unbounded => unreachable!("phase-1 objective is bounded"),
        }
        // Pivot remaining artificials out of the basis where possible.
        for i in 0..m {
            if is_artificial[basis[i]] {
                let mut pivot_col = None;
                for j in 0..ncols {
                    if !is_artificial[j] && tableau[i][j].abs() > TOL {
                        pivot_col = Some(j);
                        break;
                    }
                }
                if let Some(j) = pivot_col {
                    pivot(&mut tableau, &mut basis, i, j);
                }
                // If no pivot exists the row is redundant; the artificial
                // stays basic at value 0 and is excluded from phase 2.
            }
        }
    }

    // Phase 2: the real objective over non-artificial columns.
    let mut obj = vec![0.0f64; ncols];
    obj[..n_vars].copy_from_slice(objective);
    match run_simplex(&mut tableau, &mut basis, &obj, ncols, Some(&is_artificial)) {
        SimplexEnd::Optimal(value) => {
            let mut x = vec![0.0f64; n_vars];
            for (i, &b) in basis.iter().enumerate() {
                if b < n_vars {
                    x[b] = tableau[i][ncols];
                }
            }
            LpOutcome::Optimal { x, value }
        }
        SimplexEnd::Unbounded => LpOutcome::Unbounded,
    }
}

/// Pure feasibility: a point satisfying the constraints with x ≥ 0, if any.
pub fn feasible_point(n_vars: usize, constraints: &[Constraint]) -> Option<Vec<f64>> {
    match maximize(n_vars, &vec![0.0; n_vars], constraints) {
        LpOutcome::Optimal { x, .. } => Some(x),
        LpOutcome::Infeasible => None,
        LpOutcome::Unbounded => unreachable!("zero objective cannot be unbounded"),
    }
}

enum SimplexEnd {
    Optimal(f64),
    Unbounded,
}

/// Bland-rule simplex on an existing basic feasible tableau. Maximizes
/// `obj`, skipping columns masked out by `banned` (artificials in phase 2).
fn run_simplex(
    tableau: &mut [Vec<f64>],
    basis: &mut [usize],
    obj: &[f64],
    ncols: usize,
    banned: Option<&[bool]>,
) -> SimplexEnd {
    let m = tableau.len();
    loop {
        // Reduced costs: c_j − c_B · B⁻¹A_j (tableau is already B⁻¹A).
        let mut entering = None;
        for j in 0..ncols {
            if let Some(mask) = banned {
                if mask[j] {
                    continue;
                }
            }
            if basis.contains(&j) {
                continue;
            }
            let mut red = obj[j];
            for i in 0..m {
                red -= obj[basis[i]] * tableau[i][j];
            }
            if red > TOL {
                entering = Some(j); // Bland: first improving index
                break;
            }
        }
        let Some(col) = entering else {
            let mut value = 0.0;
            for i in 0..m {
                value += obj[basis[i]] * tableau[i][ncols];
            }
            return SimplexEnd::Optimal(value);
        };

        // Ratio test; ties resolved by smallest basic variable index.
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            let a = tableau[i][col];
            if a > TOL {
                let ratio = tableau[i][ncols] / a;
                match leave {
                    None => leave = Some((i, ratio)),
                    Some((bi, br)) => {
                        if ratio < br - TOL
                            || (ratio < br + TOL && basis[i] < basis[bi])
                        {
                            leave = Some((i, ratio));
                        }
                    }
                }
            }
        }
        let Some((row, _)) = leave else {
            return SimplexEnd::Unbounded;
        };
        pivot(tableau, basis, row, col);
    }
}

fn pivot(tableau: &mut [Vec<f64>], basis: &mut [usize], row: usize, col: usize) {
    let m = tableau.len();
    let width = tableau[0].len();
    let p = tableau[row][col];
    for v in tableau[row].iter_mut() {
        *v /= p;
    }
    for i in 0..m {
        if i == row {
            continue;
        }
        let factor = tableau[i][col];
        if factor == 0.0 {
            continue;
        }
        for j in 0..width {
            let delta = factor * tableau[row][j];
            tableau[i][j] -= delta;
        }
        tableau[i][col] = 0.0;
    }
    basis[row] = col;
}

// ---------------------------------------------------------------------------

/// Helper for problems with free (sign-unconstrained) variables: each free
/// variable x is encoded as x⁺ − x⁻. Builds the column expansion and maps
/// solutions back.
pub struct FreeVarLp {
    n_free: usize,
    n_extra: usize,
    objective: Vec<f64>,
    constraints: Vec<Constraint>,
}

impl FreeVarLp {
    /// `n_free` sign-free variables followed by `n_extra` nonnegative ones.
    pub fn new(n_free: usize, n_extra: usize) -> Self {
        FreeVarLp {
            n_free,
            n_extra,
            objective: vec![0.0; 2 * n_free + n_extra],
            constraints: Vec::new(),
        }
    }

    fn expand(&self, coeffs: &[f64]) -> Vec<f64> {
        assert_eq!(coeffs.len(), self.n_free + self.n_extra);
        let mut out = Vec::with_capacity(2 * self.n_free + self.n_extra);
        for &v in &coeffs[..self.n_free] {
            out.push(v);
        }
        for &v in &coeffs[..self.n_free] {
            out.push(-v);
        }
        out.extend_from_slice(&coeffs[self.n_free..]);
        out
    }

    pub fn set_objective(&mut self, coeffs: &[f64]) {
        self.objective = self.expand(coeffs);
    }

    pub fn constrain(&mut self, coeffs: &[f64], rel: Rel, rhs: f64) {
        self.constraints
            .push(Constraint::new(self.expand(coeffs), rel, rhs));
    }

    pub fn maximize(&self) -> LpOutcome {
        let n = 2 * self.n_free + self.n_extra;
        match maximize(n, &self.objective, &self.constraints) {
            LpOutcome::Optimal { x, value } => LpOutcome::Optimal {
                x: self.collapse(&x),
                value,
            },
            other => other,
        }
    }

    pub fn feasible_point(&self) -> Option<Vec<f64>> {
        let n = 2 * self.n_free + self.n_extra;
        feasible_point(n, &self.constraints).map(|x| self.collapse(&x))
    }

    fn collapse(&self, x: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_free + self.n_extra);
        for i in 0..self.n_free {
            out.push(x[i] - x[self.n_free + i]);
        }
        out.extend_from_slice(&x[2 * self.n_free..]);
        out
    }
}
