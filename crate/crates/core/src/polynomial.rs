//! Smooth controls by reverse engineering: `y(t)` is a degree-`N` polynomial
//! in `t/T`, the boundary and area conditions fix seven coefficients, and the
//! remaining ones minimize `Γ∫y²dt`. Everything up to the final float
//! evaluation is done in exact rational arithmetic; coefficients are stored
//! in units of `π/T` and costs in units of `π²Γ/T`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{ControlSignal, Segment};

pub const MIN_DEGREE: usize = 7;
pub const MAX_DEGREE: usize = 12;

/// Coefficients `a0..a6` are pinned by the constraints; the rest are free.
pub const DEPENDENT: usize = 7;

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().expect("finite rational")
}

fn check_degree(degree: usize) -> Result<()> {
    if (MIN_DEGREE..=MAX_DEGREE).contains(&degree) {
        Ok(())
    } else {
        Err(Error::DegreeOutOfRange(degree))
    }
}

/// The seven equality constraints, both in reduced form
/// `(a3..a6) = A'·(a7..aN) + c'` and as the full system `Aᵀa = c`.
#[derive(Debug, Clone, PartialEq)]
pub struct EqualityConstraints {
    pub degree: usize,
    pub duration: f64,
    /// 4 × (N − 6), dimensionless.
    pub a_prime: Vec<Vec<BigRational>>,
    /// Units of `π/T`.
    pub c_prime: [BigRational; 4],
}

impl EqualityConstraints {
    /// Full `Aᵀ` (7 × (N+1)) and `c` (units of `π/T`).
    pub fn full_system(&self) -> (Vec<Vec<BigRational>>, Vec<BigRational>) {
        let cols = self.degree + 1;
        let mut rows = Vec::with_capacity(DEPENDENT);
        let mut rhs = Vec::with_capacity(DEPENDENT);
        for i in 0..3 {
            let mut row = vec![BigRational::zero(); cols];
            row[i] = BigRational::one();
            rows.push(row);
            rhs.push(BigRational::zero());
        }
        for (i, ap) in self.a_prime.iter().enumerate() {
            let mut row = vec![BigRational::zero(); cols];
            row[3 + i] = BigRational::one();
            for (j, v) in ap.iter().enumerate() {
                row[DEPENDENT + j] = -v.clone();
            }
            rows.push(row);
            rhs.push(self.c_prime[i].clone());
        }
        (rows, rhs)
    }

    /// `c'` evaluated for the stored duration.
    pub fn c_prime_values(&self) -> [f64; 4] {
        let unit = PI / self.duration;
        std::array::from_fn(|i| to_f64(&self.c_prime[i]) * unit)
    }

    pub fn rank(&self) -> usize {
        rank(self.full_system().0)
    }
}

/// Rows of the raw conditions on `a0..aN`, in units of `π/T` on the right:
/// `y(0) = ẏ(0) = ÿ(0) = 0`, `y(T) = ẏ(T) = ÿ(T) = 0` and `∫₀ᵀ y dt = −π`
/// (the area condition after integrating the oscillator equation).
fn raw_conditions(degree: usize) -> (Vec<Vec<BigRational>>, Vec<BigRational>) {
    let n = degree + 1;
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for i in 0..3 {
        let mut row = vec![BigRational::zero(); n];
        row[i] = BigRational::one();
        rows.push(row);
        rhs.push(BigRational::zero());
    }
    rows.push((0..n).map(|_| BigRational::one()).collect());
    rhs.push(BigRational::zero());
    rows.push((0..n).map(|k| rational(k as i64, 1)).collect());
    rhs.push(BigRational::zero());
    rows.push(
        (0..n)
            .map(|k| rational((k * k.saturating_sub(1)) as i64, 1))
            .collect(),
    );
    rhs.push(BigRational::zero());
    rows.push((0..n).map(|k| rational(1, k as i64 + 1)).collect());
    rhs.push(rational(-1, 1));
    (rows, rhs)
}

pub fn build_equality_constraints(degree: usize, duration: f64) -> Result<EqualityConstraints> {
    check_degree(degree)?;
    if !(duration.is_finite() && duration > 0.0) {
        return Err(Error::InvalidDuration(duration));
    }
    let (rows, rhs) = raw_conditions(degree);
    // With a0 = a1 = a2 = 0 the last four rows read M_dep·a_dep + M_free·a_free = r.
    let dep: Vec<Vec<BigRational>> = rows[3..].iter().map(|r| r[3..DEPENDENT].to_vec()).collect();
    let free_count = degree + 1 - DEPENDENT;
    let mut augmented: Vec<Vec<BigRational>> = rows[3..]
        .iter()
        .zip(&rhs[3..])
        .map(|(r, b)| {
            let mut out: Vec<BigRational> = r[DEPENDENT..].iter().map(|v| -v.clone()).collect();
            out.push(b.clone());
            out
        })
        .collect();
    solve_in_place(dep, &mut augmented);
    let a_prime = augmented.iter().map(|r| r[..free_count].to_vec()).collect();
    let c_prime = std::array::from_fn(|i| augmented[i][free_count].clone());
    Ok(EqualityConstraints {
        degree,
        duration,
        a_prime,
        c_prime,
    })
}

/// Solves `m·X = rhs` for every column of `rhs` (rows of `rhs` hold the
/// right-hand sides), overwriting `rhs` with `X`.
fn solve_in_place(mut m: Vec<Vec<BigRational>>, rhs: &mut [Vec<BigRational>]) {
    let n = m.len();
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !m[r][col].is_zero())
            .expect("nonsingular system");
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        let inv = BigRational::one() / m[col][col].clone();
        for v in m[col].iter_mut() {
            *v = &*v * &inv;
        }
        for v in rhs[col].iter_mut() {
            *v = &*v * &inv;
        }
        for r in 0..n {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let factor = m[r][col].clone();
            let pivot_row = m[col].clone();
            for (x, p) in m[r].iter_mut().zip(&pivot_row) {
                *x -= &factor * p;
            }
            for k in 0..rhs[r].len() {
                let sub = &factor * &rhs[col][k];
                rhs[r][k] -= sub;
            }
        }
    }
}

fn rank(mut m: Vec<Vec<BigRational>>) -> usize {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..rows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, pivot);
        for r in rank + 1..rows {
            if m[r][col].is_zero() {
                continue;
            }
            let factor = &m[r][col] / &m[rank][col];
            let pivot_row = m[rank].clone();
            for (x, p) in m[r].iter_mut().zip(&pivot_row).skip(col) {
                *x -= &factor * p;
            }
        }
        rank += 1;
    }
    rank
}

/// Hilbert-type Gram matrix `Q_nm = 1/(n+m+1)` of the monomials on `[0, 1]`.
pub fn gram_matrix(degree: usize) -> Vec<Vec<BigRational>> {
    (0..=degree)
        .map(|n| {
            (0..=degree)
                .map(|m| rational(1, (n + m + 1) as i64))
                .collect()
        })
        .collect()
}

/// KKT matrix `[[Q, A], [Aᵀ, 0]]` and right-hand side `[0, c]` for the
/// equality-constrained minimization of `aᵀQa`.
pub fn kkt_system(degree: usize) -> Result<(Vec<Vec<BigRational>>, Vec<BigRational>)> {
    let constraints = build_equality_constraints(degree, 1.0)?;
    let (at, c) = constraints.full_system();
    let n = degree + 1;
    let q = gram_matrix(degree);
    let size = n + DEPENDENT;
    let mut k = vec![vec![BigRational::zero(); size]; size];
    for i in 0..n {
        for j in 0..n {
            k[i][j] = q[i][j].clone();
        }
    }
    for (r, row) in at.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            k[n + r][j] = v.clone();
            k[j][n + r] = v.clone();
        }
    }
    let mut rhs = vec![BigRational::zero(); n];
    rhs.extend(c);
    Ok((k, rhs))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialControl {
    pub degree: usize,
    pub duration: f64,
    /// `a0..aN` in units of `π/T`.
    pub coefficients: Vec<BigRational>,
    /// `ΓT·aᵀQa` in units of `π²Γ/T`.
    pub cost: BigRational,
}

impl PolynomialControl {
    /// Coefficients of `y` in `t/T`.
    pub fn coefficient_values(&self) -> Vec<f64> {
        let unit = PI / self.duration;
        self.coefficients.iter().map(|c| to_f64(c) * unit).collect()
    }

    pub fn cost_value(&self, gamma: f64) -> f64 {
        to_f64(&self.cost) * PI * PI * gamma / self.duration
    }

    /// Exact coefficients of `y` in `s = 2t/T − 1`, in units of `π/T`.
    /// The monomial coefficients in `t/T` reach 1e7 and cancel; these stay
    /// near 1e3, which keeps float evaluation accurate.
    pub fn centered_coefficients(&self) -> Vec<BigRational> {
        let n = self.coefficients.len();
        let mut out = vec![BigRational::zero(); n];
        for (k, a) in self.coefficients.iter().enumerate() {
            // (s + 1)^k / 2^k
            let scale = a / BigRational::from_integer(BigInt::one() << k);
            let mut binom = BigInt::one();
            for (j, slot) in out.iter_mut().enumerate().take(k + 1) {
                *slot += &scale * BigRational::from_integer(binom.clone());
                binom = binom * BigInt::from(k - j) / BigInt::from(j + 1);
            }
        }
        out
    }

    /// `y(t)`.
    pub fn displacement(&self, t: f64) -> f64 {
        let unit = PI / self.duration;
        let c: Vec<f64> = self
            .centered_coefficients()
            .iter()
            .map(|c| to_f64(c) * unit)
            .collect();
        crate::model::horner(&c, 2.0 * t / self.duration - 1.0)
    }
}

#[derive(Serialize)]
struct RationalRepr {
    num: i64,
    den: i64,
}

impl From<&BigRational> for RationalRepr {
    fn from(r: &BigRational) -> Self {
        RationalRepr {
            num: r.numer().to_i64().expect("numerator fits in i64"),
            den: r.denom().to_i64().expect("denominator fits in i64"),
        }
    }
}

impl Serialize for PolynomialControl {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            degree: usize,
            coefficients: Vec<RationalRepr>,
            cost: RationalRepr,
        }
        Repr {
            degree: self.degree,
            coefficients: self.coefficients.iter().map(RationalRepr::from).collect(),
            cost: (&self.cost).into(),
        }
        .serialize(serializer)
    }
}

pub fn solve_polynomial(degree: usize, duration: f64) -> Result<PolynomialControl> {
    check_degree(degree)?;
    if !(duration.is_finite() && duration > 0.0) {
        return Err(Error::InvalidDuration(duration));
    }
    let (k, rhs) = kkt_system(degree)?;
    let mut cols: Vec<Vec<BigRational>> = rhs.into_iter().map(|v| vec![v]).collect();
    solve_in_place(k, &mut cols);
    let coefficients: Vec<BigRational> = cols[..=degree].iter().map(|c| c[0].clone()).collect();
    let q = gram_matrix(degree);
    let mut cost = BigRational::zero();
    for (n, an) in coefficients.iter().enumerate() {
        for (m, am) in coefficients.iter().enumerate() {
            cost += &q[n][m] * an * am;
        }
    }
    debug_assert!(!cost.is_negative());
    Ok(PolynomialControl {
        degree,
        duration,
        coefficients,
        cost,
    })
}

/// `u = −y/2 − Γẏ − 2ÿ` as one polynomial segment in `s = 2t/T − 1`.
pub fn polynomial_control_signal(poly: &PolynomialControl, gamma: f64) -> Result<ControlSignal> {
    let duration = poly.duration;
    let unit = PI / duration;
    let c: Vec<f64> = poly
        .centered_coefficients()
        .iter()
        .map(|c| to_f64(c) * unit)
        .collect();
    let half = 0.5 * duration;
    let n = c.len();
    let coeffs: Vec<f64> = (0..n)
        .map(|k| {
            let first = c.get(k + 1).map_or(0.0, |x| (k + 1) as f64 * x) / half;
            let second =
                c.get(k + 2).map_or(0.0, |x| ((k + 2) * (k + 1)) as f64 * x) / (half * half);
            -0.5 * c[k] - gamma * first - 2.0 * second
        })
        .collect();
    ControlSignal::new(
        duration,
        Vec::new(),
        vec![Segment::centered_polynomial(
            0.0, duration, coeffs, half, half,
        )],
    )
}
