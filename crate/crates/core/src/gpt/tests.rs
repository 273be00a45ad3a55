use super::*;
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

/// Random valid effect on a polytope: random coefficients rescaled into the
/// [0, 1] band over the vertices.
pub fn random_effect(space: &StateSpace, rng: &mut SplitMix64) -> Effect {
    loop {
        let coords: Vec<f64> = (0..space.dim()).map(|_| rng.range(-1.0, 1.0)).collect();
        let vals: Vec<f64> = space
            .vertices
            .iter()
            .map(|v| coords.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect();
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if hi - lo < 1e-6 {
            continue;
        }
        // Affinely rescale values from [lo, hi] into a random subinterval
        // of [0, 1].
        let a = rng.range(0.0, 0.45);
        let b = rng.range(0.55, 1.0);
        let scale = (b - a) / (hi - lo);
        let mut out = coords.iter().map(|v| v * scale).collect::<Vec<_>>();
        out[0] += a - lo * scale;
        return space.effect(out);
    }
}

#[test]
fn builtin_spaces_validate() {
    let tol = TolerancePolicy::default();
    StateSpace::classical_bit().validate(&tol).unwrap();
    StateSpace::square().validate(&tol).unwrap();
    StateSpace::nonsignaling_square_pair().validate(&tol).unwrap();
}

#[test]
fn eval_on_square_vertices() {
    let s = sq();
    // π₀(s10) = 1
    assert_eq!(pi0(&s).eval(&s.vertex(1)).unwrap(), 1.0);
    // unit on any vertex
    for i in 0..4 {
        assert_eq!(s.unit_effect().eval(&s.vertex(i)).unwrap(), 1.0);
    }
    // affinity: π(½ s0 + ½ s1) on the bit
    let bit = StateSpace::classical_bit();
    let mid = bit.vertex(0).scale(0.5).add(&bit.vertex(1).scale(0.5));
    let pi = bit.effect(vec![0.0, 1.0]);
    assert!((pi.eval(&mid).unwrap() - 0.5).abs() < 1e-15);
}

#[test]
fn eval_rejects_space_mismatch() {
    let s = sq();
    let bit = StateSpace::classical_bit();
    let f = bit.effect(vec![0.0, 1.0]);
    assert!(f.eval(&s.vertex(0)).is_err());
}

#[test]
fn membership_basics() {
    let s = sq();
    let tol = TolerancePolicy::default();
    for i in 0..4 {
        assert!(membership(&s, &s.vertex(i), &tol).unwrap());
    }
    let bary = (0..4)
        .map(|i| s.vertex(i).scale(0.25))
        .reduce(|a, b| a.add(&b))
        .unwrap();
    assert!(membership(&s, &bary, &tol).unwrap());
    // 2 s00 − s11 has π₀ value −1 < 0, so it lies outside the square.
    let outside = s.vertex(0).scale(2.0).sub(&s.vertex(3));
    assert!(!membership(&s, &outside, &tol).unwrap());
}

#[test]
fn membership_requires_normalization() {
    let s = sq();
    let tol = TolerancePolicy::default();
    assert!(membership(&s, &s.vertex(0).scale(2.0), &tol).is_err());
}

#[test]
fn compatibility_on_square() {
    let s = sq();
    assert!(are_compatible(&s, &pi0(&s), &pi0(&s)).unwrap());
    assert!(!are_compatible(&s, &pi0(&s), &pi1(&s)).unwrap());
}

#[test]
fn compatibility_on_classical_bit() {
    // On a simplex every pair is compatible; p = max(f+g−1, 0) works for
    // the complementary pair, and the LP must agree.
    let bit = StateSpace::classical_bit();
    let pi = bit.effect(vec![0.0, 1.0]);
    assert!(are_compatible(&bit, &pi, &pi.complement()).unwrap());
    let mut rng = SplitMix64::new(5);
    for _ in 0..200 {
        let f = random_effect(&bit, &mut rng);
        let g = random_effect(&bit, &mut rng);
        assert!(are_compatible(&bit, &f, &g).unwrap());
    }
}

#[test]
fn constant_effects_are_compatible_with_everything() {
    let s = sq();
    let mut rng = SplitMix64::new(17);
    for _ in 0..20 {
        let c = rng.next_f64();
        let mut coords = vec![0.0; 3];
        coords[0] = c;
        let constant = s.effect(coords);
        let g = random_effect(&s, &mut rng);
        assert!(are_compatible(&s, &constant, &g).unwrap());
    }
}

#[test]
fn degcom_extreme_pair_is_half() {
    let s = sq();
    let v = degree_of_compatibility(&s, &pi0(&s), &pi1(&s)).unwrap();
    assert!((v - 0.5).abs() < 1e-9, "degcom = {v}");
}

#[test]
fn degcom_identical_pair_is_one() {
    let s = sq();
    let mut rng = SplitMix64::new(23);
    for _ in 0..10 {
        let f = random_effect(&s, &mut rng);
        let v = degree_of_compatibility(&s, &f, &f).unwrap();
        assert!((v - 1.0).abs() < 1e-9, "degcom(f,f) = {v}");
    }
}

#[test]
fn degcom_never_below_half() {
    let s = sq();
    let mut rng = SplitMix64::new(29);
    for _ in 0..200 {
        let f = random_effect(&s, &mut rng);
        let g = random_effect(&s, &mut rng);
        let v = degree_of_compatibility(&s, &f, &g).unwrap();
        assert!(v >= 0.5 - 1e-9, "degcom = {v}");
        assert!(v <= 1.0 + 1e-9);
    }
}

#[test]
fn degcom_one_iff_compatible() {
    let s = sq();
    let mut rng = SplitMix64::new(31);
    for _ in 0..50 {
        let f = random_effect(&s, &mut rng);
        let g = random_effect(&s, &mut rng);
        let compatible = are_compatible(&s, &f, &g).unwrap();
        let v = degree_of_compatibility(&s, &f, &g).unwrap();
        assert_eq!(compatible, v >= 1.0 - 1e-7, "compatible={compatible}, degcom={v}");
    }
}

#[test]
fn compatibility_is_symmetric() {
    let s = sq();
    let mut rng = SplitMix64::new(37);
    for _ in 0..50 {
        let f = random_effect(&s, &mut rng);
        let g = random_effect(&s, &mut rng);
        assert_eq!(
            are_compatible(&s, &f, &g).unwrap(),
            are_compatible(&s, &g, &f).unwrap()
        );
    }
}

#[test]
fn witness_square_for_extreme_pair_is_the_vertex_set() {
    let s = sq();
    let ws = find_witness_square(&s, &pi0(&s), &pi1(&s))
        .unwrap()
        .expect("maximally incompatible pair must have a witness square");
    // On the square this witness square is unique: the four vertices.
    assert!(ws.x00().max_abs_diff(&s.vertex(0)) < 1e-9);
    assert!(ws.x10().max_abs_diff(&s.vertex(1)) < 1e-9);
    assert!(ws.x01().max_abs_diff(&s.vertex(2)) < 1e-9);
    assert!(ws.x11().max_abs_diff(&s.vertex(3)) < 1e-9);
    ws.validate(&s, &pi0(&s), &pi1(&s), &TolerancePolicy::default())
        .unwrap();
}

#[test]
fn no_witness_square_for_identical_pair() {
    let s = sq();
    let f = pi0(&s);
    assert!(find_witness_square(&s, &f, &f).unwrap().is_none());
}

#[test]
fn no_witness_square_when_value_one_unreachable() {
    // ½π₀ never attains 1 on the square, so f(x10) = 1 is infeasible.
    let s = sq();
    let half = s.effect(vec![0.0, 0.5, 0.0]);
    assert!(find_witness_square(&s, &half, &pi1(&s)).unwrap().is_none());
}

#[test]
fn witness_square_exists_iff_degcom_half() {
    let s = sq();
    let mut rng = SplitMix64::new(41);
    let mut seen_max_incompatible = 0;
    for trial in 0..60 {
        // Mix extreme pairs (maximally incompatible) with random ones.
        let (f, g) = if trial % 3 == 0 {
            let syms = square_symmetries();
            let gmap = &syms[(rng.next_u64() % 8) as usize];
            let inv = symmetry_inverse(gmap);
            (inv.pullback(&pi0(&s)).unwrap(), inv.pullback(&pi1(&s)).unwrap())
        } else {
            (random_effect(&s, &mut rng), random_effect(&s, &mut rng))
        };
        let d = degree_of_compatibility(&s, &f, &g).unwrap();
        let ws = find_witness_square(&s, &f, &g).unwrap();
        assert_eq!(
            ws.is_some(),
            (d - 0.5).abs() < 1e-7,
            "degcom={d}, witness square present: {}",
            ws.is_some()
        );
        if ws.is_some() {
            seen_max_incompatible += 1;
        }
    }
    assert!(seen_max_incompatible >= 10);
}

#[test]
fn iota_pi_identity_on_square_itself() {
    let s = sq();
    let ws = find_witness_square(&s, &pi0(&s), &pi1(&s)).unwrap().unwrap();
    let (iota, pi) = build_iota_pi(&s, &ws, &pi0(&s), &pi1(&s)).unwrap();
    let id = AffineMapGpt::identity(&s);
    assert!(iota.max_abs_diff(&id) < 1e-12);
    assert!(pi.max_abs_diff(&id) < 1e-12);
}

#[test]
fn pi_after_iota_is_identity_on_random_points() {
    let s = sq();
    let mut rng = SplitMix64::new(47);
    let syms = square_symmetries();
    for _ in 0..50 {
        let gmap = &syms[(rng.next_u64() % 8) as usize];
        let inv = symmetry_inverse(gmap);
        let f = inv.pullback(&pi0(&s)).unwrap();
        let g = inv.pullback(&pi1(&s)).unwrap();
        let ws = find_witness_square(&s, &f, &g).unwrap().unwrap();
        let (iota, pi) = build_iota_pi(&s, &ws, &f, &g).unwrap();
        // Π∘ι on a random point of the square.
        let (a, b) = (rng.next_f64(), rng.next_f64());
        let p = s.dual(vec![1.0, a, b]);
        let roundtrip = pi.apply(&iota.apply(&p).unwrap()).unwrap();
        assert!(roundtrip.max_abs_diff(&p) < 1e-10);
        // Effect pattern at the square's vertices.
        for (i, j, vertex) in [(0, 0, 0), (1, 0, 1), (0, 1, 2), (1, 1, 3)] {
            let img = iota.apply(&s.vertex(vertex)).unwrap();
            assert!((f.eval(&img).unwrap() - i as f64).abs() < 1e-10);
            assert!((g.eval(&img).unwrap() - j as f64).abs() < 1e-10);
        }
    }
}

#[test]
fn connecting_map_properties() {
    let s = sq();
    let mut rng = SplitMix64::new(53);
    let syms = square_symmetries();
    for _ in 0..20 {
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
        let (iota_a, pi_a) = build_iota_pi(&s, &wsa, &fa, &fap).unwrap();
        let (iota_b, pi_b) = build_iota_pi(&s, &wsb, &fb, &fbp).unwrap();
        let t = connecting_map(&iota_a, &pi_b).unwrap();
        // f_B = f_A ∘ T and f_B′ = f_A′ ∘ T.
        assert!(t.pullback(&fa).unwrap().coords.iter().zip(&fb.coords).all(|(x, y)| (x - y).abs() < 1e-10));
        assert!(t.pullback(&fap).unwrap().coords.iter().zip(&fbp.coords).all(|(x, y)| (x - y).abs() < 1e-10));
        // ι_A = T ∘ ι_B and Π_B = Π_A ∘ T.
        assert!(t.compose(&iota_b).unwrap().max_abs_diff(&iota_a) < 1e-10);
        assert!(pi_a.compose(&t).unwrap().max_abs_diff(&pi_b) < 1e-10);
        // Chain: f_B ∘ ι_B = π₀.
        let chained = iota_b.pullback(&fb).unwrap();
        assert!(chained.coords.iter().zip(&pi0(&s).coords).all(|(x, y)| (x - y).abs() < 1e-10));
    }
}

#[test]
fn connecting_map_for_equal_pairs_is_projection() {
    let s = sq();
    let ws = find_witness_square(&s, &pi0(&s), &pi1(&s)).unwrap().unwrap();
    let (iota, pi) = build_iota_pi(&s, &ws, &pi0(&s), &pi1(&s)).unwrap();
    let t = connecting_map(&iota, &pi).unwrap();
    let t2 = t.compose(&t).unwrap();
    assert!(t2.max_abs_diff(&t) < 1e-12);
}

#[test]
fn witness_square_on_square_pair_space() {
    // π₀⊗1 vs π₁⊗1 on the two-square composite is maximally incompatible.
    let k = StateSpace::nonsignaling_square_pair();
    let mut f = vec![0.0; 9];
    f[3] = 1.0; // π₀⊗1
    let mut g = vec![0.0; 9];
    g[6] = 1.0; // π₁⊗1
    let f = k.effect(f);
    let g = k.effect(g);
    let d = degree_of_compatibility(&k, &f, &g).unwrap();
    assert!((d - 0.5).abs() < 1e-9);
    let ws = find_witness_square(&k, &f, &g).unwrap().unwrap();
    ws.validate(&k, &f, &g, &TolerancePolicy::default()).unwrap();
    let (_iota, _pi) = build_iota_pi(&k, &ws, &f, &g).unwrap();
}

#[test]
fn square_symmetries_form_a_group_of_automorphisms() {
    let s = sq();
    let tol = TolerancePolicy::default();
    for g in square_symmetries() {
        // Each symmetry permutes the vertex set.
        for i in 0..4 {
            let img = g.apply(&s.vertex(i)).unwrap();
            assert!(membership(&s, &img, &tol).unwrap());
            assert!(
                (0..4).any(|j| img.max_abs_diff(&s.vertex(j)) < 1e-12),
                "image of a vertex must be a vertex"
            );
        }
        let inv = symmetry_inverse(&g);
        let comp = inv.compose(&g).unwrap();
        assert!(comp.max_abs_diff(&AffineMapGpt::identity(&s)) < 1e-12);
    }
}

#[test]
fn state_space_json_roundtrip() {
    let s = StateSpace::square();
    let j = serde_json::to_string(&s).unwrap();
    let back: StateSpace = serde_json::from_str(&j).unwrap();
    assert_eq!(s, back);
    let v: serde_json::Value = serde_json::from_str(&j).unwrap();
    assert!(v["name"].is_string());
    assert!(v["basis_labels"].is_array());
    assert!(v["vertices"].is_array());
    assert!(v["cone_generators"].is_array());
}
