//! Angular-momentum algebra for the cesium D2 line.
//!
//! Wigner 3j and 6j symbols are evaluated with the Racah sums in exact
//! rational arithmetic and rounded to `f64` only at the end. Phases follow
//! the Condon–Shortley convention throughout.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AngularError {
    #[error("negative angular momentum j = {0}")]
    NegativeMagnitude(HalfInt),
    #[error("projection m = {m} is not compatible with j = {j}")]
    InvalidProjection { j: HalfInt, m: HalfInt },
    #[error("hyperfine level out of range: F = {f}, F' = {fp}")]
    LevelOutOfRange { f: i32, fp: i32 },
    #[error("polarization index q = {0} not in {{-1, 0, 1}}")]
    InvalidPolarization(i32),
}

/// An integer or half-integer, stored as twice its value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HalfInt {
    twice: i32,
}

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt { twice: 0 };

    pub const fn from_twice(twice: i32) -> Self {
        HalfInt { twice }
    }

    pub const fn int(value: i32) -> Self {
        HalfInt { twice: 2 * value }
    }

    pub const fn twice(self) -> i32 {
        self.twice
    }

    pub const fn is_integer(self) -> bool {
        self.twice % 2 == 0
    }

    pub fn value(self) -> f64 {
        f64::from(self.twice) / 2.0
    }
}

impl From<i32> for HalfInt {
    fn from(value: i32) -> Self {
        HalfInt::int(value)
    }
}

impl std::ops::Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt { twice: -self.twice }
    }
}

impl std::ops::Add for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: HalfInt) -> HalfInt {
        HalfInt { twice: self.twice + rhs.twice }
    }
}

impl std::ops::Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, rhs: HalfInt) -> HalfInt {
        HalfInt { twice: self.twice - rhs.twice }
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

fn check_pair(j: HalfInt, m: HalfInt) -> Result<(), AngularError> {
    if j.twice < 0 {
        return Err(AngularError::NegativeMagnitude(j));
    }
    if m.twice.abs() > j.twice || (j.twice - m.twice) % 2 != 0 {
        return Err(AngularError::InvalidProjection { j, m });
    }
    Ok(())
}

fn check_magnitude(j: HalfInt) -> Result<(), AngularError> {
    if j.twice < 0 {
        Err(AngularError::NegativeMagnitude(j))
    } else {
        Ok(())
    }
}

/// Triangle rule on doubled values, including the integer-perimeter condition.
fn triangle(a: i32, b: i32, c: i32) -> bool {
    c >= (a - b).abs() && c <= a + b && (a + b + c) % 2 == 0
}

fn factorial(n: i32) -> BigInt {
    debug_assert!(n >= 0);
    (2..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

fn ratio(num: BigInt, den: BigInt) -> BigRational {
    BigRational::new(num, den)
}

/// Triangle coefficient Δ(abc) for doubled arguments.
fn delta(a: i32, b: i32, c: i32) -> BigRational {
    ratio(
        factorial((a + b - c) / 2) * factorial((a - b + c) / 2) * factorial((-a + b + c) / 2),
        factorial((a + b + c) / 2 + 1),
    )
}

fn sqrt_times(square: &BigRational, factor: &BigRational) -> f64 {
    if factor.is_zero() {
        return 0.0;
    }
    let magnitude = square.to_f64().unwrap_or(f64::NAN).sqrt() * factor.abs().to_f64().unwrap_or(f64::NAN);
    if factor.is_negative() {
        -magnitude
    } else {
        magnitude
    }
}

/// Wigner 3j symbol `(j1 j2 j3; m1 m2 m3)`.
///
/// Returns exactly zero when the triangle rule fails or `m1 + m2 + m3 != 0`.
pub fn wigner3j(
    j1: HalfInt,
    j2: HalfInt,
    j3: HalfInt,
    m1: HalfInt,
    m2: HalfInt,
    m3: HalfInt,
) -> Result<f64, AngularError> {
    check_pair(j1, m1)?;
    check_pair(j2, m2)?;
    check_pair(j3, m3)?;
    let (a, b, c) = (j1.twice, j2.twice, j3.twice);
    let (ma, mb, mc) = (m1.twice, m2.twice, m3.twice);
    if ma + mb + mc != 0 || !triangle(a, b, c) {
        return Ok(0.0);
    }

    let prefactor = delta(a, b, c)
        * ratio(
            factorial((a + ma) / 2)
                * factorial((a - ma) / 2)
                * factorial((b + mb) / 2)
                * factorial((b - mb) / 2)
                * factorial((c + mc) / 2)
                * factorial((c - mc) / 2),
            BigInt::one(),
        );

    // Summation limits keep every factorial argument non-negative.
    let k_min = 0.max((b - c - ma) / 2).max((a - c + mb) / 2);
    let k_max = ((a + b - c) / 2).min((a - ma) / 2).min((b + mb) / 2);
    let mut series = BigRational::zero();
    for k in k_min..=k_max {
        let den = factorial(k)
            * factorial((c - b + ma) / 2 + k)
            * factorial((c - a - mb) / 2 + k)
            * factorial((a + b - c) / 2 - k)
            * factorial((a - ma) / 2 - k)
            * factorial((b + mb) / 2 - k);
        let term = ratio(BigInt::one(), den);
        if k % 2 == 0 {
            series += term;
        } else {
            series -= term;
        }
    }
    // (-1)^(j1 - j2 - m3)
    if ((a - b - mc) / 2).rem_euclid(2) == 1 {
        series = -series;
    }
    Ok(sqrt_times(&prefactor, &series))
}

/// Wigner 6j symbol `{j1 j2 j3; j4 j5 j6}`.
pub fn wigner6j(
    j1: HalfInt,
    j2: HalfInt,
    j3: HalfInt,
    j4: HalfInt,
    j5: HalfInt,
    j6: HalfInt,
) -> Result<f64, AngularError> {
    for j in [j1, j2, j3, j4, j5, j6] {
        check_magnitude(j)?;
    }
    let [a, b, c, d, e, f] = [j1, j2, j3, j4, j5, j6].map(HalfInt::twice);
    if !(triangle(a, b, c) && triangle(a, e, f) && triangle(d, b, f) && triangle(d, e, c)) {
        return Ok(0.0);
    }
    let prefactor = delta(a, b, c) * delta(a, e, f) * delta(d, b, f) * delta(d, e, c);

    let alphas = [(a + b + c) / 2, (a + e + f) / 2, (d + b + f) / 2, (d + e + c) / 2];
    let betas = [(a + b + d + e) / 2, (b + c + e + f) / 2, (c + a + f + d) / 2];
    let t_min = *alphas.iter().max().expect("four triads");
    let t_max = *betas.iter().min().expect("three sums");
    let mut series = BigRational::zero();
    for t in t_min..=t_max {
        let den = alphas.iter().map(|&x| factorial(t - x)).product::<BigInt>()
            * betas.iter().map(|&x| factorial(x - t)).product::<BigInt>();
        let term = ratio(factorial(t + 1), den);
        if t % 2 == 0 {
            series += term;
        } else {
            series -= term;
        }
    }
    Ok(sqrt_times(&prefactor, &series))
}

/// Fine-structure transition `J = 1/2 -> J' = 3/2` with nuclear spin `I`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct D2Line {
    pub nuclear_spin: HalfInt,
}

const J_GROUND: HalfInt = HalfInt::from_twice(1);
const J_EXCITED: HalfInt = HalfInt::from_twice(3);

impl D2Line {
    /// ¹³³Cs, I = 7/2.
    pub const CESIUM: D2Line = D2Line { nuclear_spin: HalfInt::from_twice(7) };

    /// Ground hyperfine levels `F = I ± 1/2` as integers (I half-integer).
    pub fn ground_levels(&self) -> Vec<i32> {
        let i2 = self.nuclear_spin.twice();
        ((i2 - 1).abs() / 2..=(i2 + 1) / 2).collect()
    }

    pub fn excited_levels(&self) -> Vec<i32> {
        let i2 = self.nuclear_spin.twice();
        ((i2 - 3).abs() / 2..=(i2 + 3) / 2).collect()
    }

    /// Stretched cycling transition `(F_max, F_max) <-> (F'_max, F'_max)`.
    fn stretched(&self) -> (i32, i32) {
        let f = *self.ground_levels().last().expect("non-empty");
        let fp = *self.excited_levels().last().expect("non-empty");
        (f, fp)
    }

    /// Raw Wigner–Eckart value of `<F m| T^1_{-q} |F' m'>` with the reduced
    /// fine-structure element set to one.
    fn raw_element(&self, f: i32, m: i32, q: i32, fp: i32, mp: i32) -> Result<f64, AngularError> {
        if mp != m + q || (f - fp).abs() > 1 || m.abs() > f || mp.abs() > fp {
            return Ok(0.0);
        }
        let i = self.nuclear_spin;
        let (hf, hfp) = (HalfInt::int(f), HalfInt::int(fp));
        let three_j = wigner3j(hf, HalfInt::int(1), hfp, HalfInt::int(-m), HalfInt::int(-q), HalfInt::int(mp))?;
        let six_j = wigner6j(J_GROUND, hf, i, hfp, J_EXCITED, HalfInt::int(1))?;
        // (-1)^(F - m) * (-1)^(J + I + F' + 1), J + I integer for half-integer I.
        let phase_twice = 2 * (f - m) + J_GROUND.twice() + i.twice() + 2 * fp + 2;
        let sign = if (phase_twice / 2).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let reduced = f64::from((2 * f + 1) * (2 * fp + 1)).sqrt() * six_j;
        Ok(sign * three_j * reduced)
    }

    /// Normalized dipole element `<F, m_F| mu_q |F', m_F'>`.
    ///
    /// Scaled so the stretched cycling element with `q = +1` is exactly 1.
    pub fn dipole_matrix_element(&self, f: i32, m: i32, q: i32, fp: i32, mp: i32) -> Result<f64, AngularError> {
        if !(-1..=1).contains(&q) {
            return Err(AngularError::InvalidPolarization(q));
        }
        if !self.ground_levels().contains(&f) || !self.excited_levels().contains(&fp) {
            return Err(AngularError::LevelOutOfRange { f, fp });
        }
        let (fs, fps) = self.stretched();
        let norm = self.raw_element(fs, fs, 1, fps, fps)?;
        Ok(self.raw_element(f, m, q, fp, mp)? / norm)
    }
}

/// Cesium D2 dipole element; see [`D2Line::dipole_matrix_element`].
pub fn dipole_matrix_element(f: i32, m: i32, q: i32, fp: i32, mp: i32) -> Result<f64, AngularError> {
    D2Line::CESIUM.dipole_matrix_element(f, m, q, fp, mp)
}

/// One non-zero entry of the dipole table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DipoleCoefficient {
    pub f: i32,
    pub m: i32,
    pub q: i32,
    pub fp: i32,
    pub mp: i32,
    pub value: f64,
}

/// Every non-zero cesium D2 dipole coefficient.
pub fn dipole_coefficients() -> Vec<DipoleCoefficient> {
    let line = D2Line::CESIUM;
    let mut out = Vec::new();
    for f in line.ground_levels() {
        for fp in line.excited_levels() {
            for m in -f..=f {
                for q in -1..=1 {
                    let mp = m + q;
                    if mp.abs() > fp {
                        continue;
                    }
                    let value = line
                        .dipole_matrix_element(f, m, q, fp, mp)
                        .expect("levels enumerated from the line");
                    if value != 0.0 {
                        out.push(DipoleCoefficient { f, m, q, fp, mp, value });
                    }
                }
            }
        }
    }
    out
}
