use hfcavity::angular::{dipole_coefficients, dipole_matrix_element, wigner3j, wigner6j, HalfInt};
use proptest::prelude::*;

fn h(twice: i32) -> HalfInt {
    HalfInt::from_twice(twice)
}

fn factorial(n: i32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Closed form of `(j1 j2 j3; 0 0 0)` for integer `j`.
fn three_j_zero_projection(j1: i32, j2: i32, j3: i32) -> f64 {
    let j = j1 + j2 + j3;
    if j % 2 == 1 || j3 > j1 + j2 || j3 < (j1 - j2).abs() {
        return 0.0;
    }
    let g = j / 2;
    let sign = if g % 2 == 0 { 1.0 } else { -1.0 };
    let root = (factorial(j - 2 * j1) * factorial(j - 2 * j2) * factorial(j - 2 * j3) / factorial(j + 1)).sqrt();
    sign * root * factorial(g) / (factorial(g - j1) * factorial(g - j2) * factorial(g - j3))
}

/// Triangle-compatible `(2 j1, 2 j2, 2 j3)` with `j <= 5`.
fn triad() -> impl Strategy<Value = (i32, i32, i32)> {
    (0..=10i32, 0..=10i32).prop_flat_map(|(a, b)| {
        let lo = (a - b).abs();
        let hi = a + b;
        ((lo / 2)..=(hi / 2)).prop_map(move |k| (a, b, lo + 2 * (k - lo / 2)))
    })
}

/// `(2 j4, 2 j2)` forming a triangle with the given `2 j3`.
fn partner(c: i32) -> impl Strategy<Value = (i32, i32)> {
    (0..=10i32).prop_flat_map(move |d| {
        let lo = (d - c).abs();
        ((lo / 2)..=((d + c) / 2)).prop_map(move |k| (d, lo + 2 * (k - lo / 2)))
    })
}

proptest! {
    #[test]
    fn zero_projection_closed_form(j1 in 0..=8i32, j2 in 0..=8i32, j3 in 0..=8i32) {
        let got = wigner3j(h(2 * j1), h(2 * j2), h(2 * j3), h(0), h(0), h(0)).unwrap();
        let want = three_j_zero_projection(j1, j2, j3);
        prop_assert!((got - want).abs() < 1e-13, "{got} vs {want}");
    }

    #[test]
    fn three_j_orthogonality((a, b, c) in triad(), shift in 0..=2i32, mc_pick in 0..=10i32) {
        // sum_{m1,m2} (2 j3 + 1) (j1 j2 j3; m1 m2 m3)(j1 j2 j3'; m1 m2 m3) = delta_{j3 j3'}
        let cp = c + 2 * shift;
        let mc = -c + 2 * (mc_pick % (c + 1));
        let mut sum = 0.0;
        for ma in (-a..=a).step_by(2) {
            let mb = -mc - ma;
            if mb.abs() > b {
                continue;
            }
            let x = wigner3j(h(a), h(b), h(c), h(ma), h(mb), h(mc)).unwrap();
            let y = if mc.abs() <= cp { wigner3j(h(a), h(b), h(cp), h(ma), h(mb), h(mc)).unwrap() } else { 0.0 };
            sum += x * y;
        }
        let expected = if shift == 0 { 1.0 } else { 0.0 };
        prop_assert!(((c + 1) as f64 * sum - expected).abs() < 1e-12);
    }

    #[test]
    fn three_j_permutation_symmetry((a, b, c) in triad(), ma_pick in 0..=10i32, mb_pick in 0..=10i32) {
        let ma = -a + 2 * (ma_pick % (a + 1));
        let mb = -b + 2 * (mb_pick % (b + 1));
        let mc = -ma - mb;
        prop_assume!(mc.abs() <= c);
        let base = wigner3j(h(a), h(b), h(c), h(ma), h(mb), h(mc)).unwrap();
        let odd = if ((a + b + c) / 2) % 2 == 0 { 1.0 } else { -1.0 };
        let cyclic = wigner3j(h(b), h(c), h(a), h(mb), h(mc), h(ma)).unwrap();
        let swapped = wigner3j(h(b), h(a), h(c), h(mb), h(ma), h(mc)).unwrap();
        let flipped = wigner3j(h(a), h(b), h(c), h(-ma), h(-mb), h(-mc)).unwrap();
        prop_assert!((cyclic - base).abs() < 1e-13);
        prop_assert!((swapped - odd * base).abs() < 1e-13);
        prop_assert!((flipped - odd * base).abs() < 1e-13);
    }

    #[test]
    fn six_j_orthogonality(
        ((a, e, c), (d, b)) in triad().prop_flat_map(|(a, e, c)| (Just((a, e, c)), partner(c))),
        shift in 0..=2i32,
    ) {
        // sum_x (2x+1)(2j3+1) {j1 j2 x; j4 j5 j3}{j1 j2 x; j4 j5 j3'} = delta_{j3 j3'}
        // for triangle-compatible (j1 j5 j3) and (j4 j2 j3).
        let cp = c + 2 * shift;
        let mut sum = 0.0;
        for x in 0..=20 {
            let s = wigner6j(h(a), h(b), h(x), h(d), h(e), h(c)).unwrap();
            let t = wigner6j(h(a), h(b), h(x), h(d), h(e), h(cp)).unwrap();
            sum += f64::from(x + 1) * s * t;
        }
        let expected = if shift == 0 { 1.0 } else { 0.0 };
        prop_assert!((f64::from(c + 1) * sum - expected).abs() < 1e-12);
    }

    #[test]
    fn six_j_column_symmetry(j in proptest::array::uniform6(0..=8i32)) {
        let [a, b, c, d, e, f] = j;
        let base = wigner6j(h(a), h(b), h(c), h(d), h(e), h(f)).unwrap();
        let permuted = wigner6j(h(b), h(c), h(a), h(e), h(f), h(d)).unwrap();
        let flipped = wigner6j(h(d), h(e), h(c), h(a), h(b), h(f)).unwrap();
        prop_assert!((permuted - base).abs() < 1e-13);
        prop_assert!((flipped - base).abs() < 1e-13);
    }
}

#[test]
fn decay_channels_sum_to_one() {
    for fp in 2..=5i32 {
        for mp in -fp..=fp {
            let mut total = 0.0;
            for f in [3i32, 4] {
                for q in -1..=1 {
                    let m = mp - q;
                    if m.abs() <= f {
                        total += dipole_matrix_element(f, m, q, fp, mp).unwrap().powi(2);
                    }
                }
            }
            assert!((total - 1.0).abs() < 1e-12, "F'={fp} m'={mp}: {total}");
        }
    }
}

#[test]
fn pi_element_matches_clebsch_gordan_ratio() {
    // <F m; 1 0 | F+1 m>^2 = (F-m+1)(F+m+1) / ((2F+1)(F+1)) relative to the stretched element.
    for m in -4..=4 {
        let d = dipole_matrix_element(4, m, 0, 5, m).unwrap();
        let want = f64::from((5 - m) * (5 + m)) / 45.0;
        assert!((d * d - want).abs() < 1e-14, "m={m}");
    }
}

#[test]
fn coefficient_table_covers_every_allowed_line() {
    let table = dipole_coefficients();
    assert!(table.iter().all(|c| c.value != 0.0 && c.mp == c.m + c.q));
    assert!(!table.iter().any(|c| c.f == 4 && c.fp == 2));
    assert!(!table.iter().any(|c| c.f == 3 && c.fp == 5));
}
