//! Seeded random data for suites and tests: small sparse polynomials and
//! forms with rational coefficients, deliberately kept low-degree so that
//! exact arithmetic stays fast.

use rand::Rng;

use crate::chart::Chart;
use crate::form::{increasing_tuples, ScalarForm, VectorForm};
use crate::poly::{rat, Poly, Rat};

const COEFF_POOL: [(i64, i64); 10] = [
    (1, 1),
    (-1, 1),
    (2, 1),
    (-2, 1),
    (3, 1),
    (-3, 1),
    (1, 2),
    (-1, 2),
    (1, 3),
    (2, 3),
];

pub fn random_rat<R: Rng>(rng: &mut R) -> Rat {
    let (n, d) = COEFF_POOL[rng.random_range(0..COEFF_POOL.len())];
    rat(n, d)
}

/// Sparse polynomial with 1..=2 terms of total degree ≤ `max_deg`.
pub fn random_poly<R: Rng>(chart: &Chart, max_deg: u32, rng: &mut R) -> Poly {
    let n = chart.dim();
    let mut out = Poly::zero(chart);
    let terms = rng.random_range(1..=2);
    for _ in 0..terms {
        let deg = rng.random_range(0..=max_deg);
        let mut pairs = Vec::new();
        for _ in 0..deg {
            pairs.push((rng.random_range(0..n), 1u16));
        }
        let mono = Poly::monomial(chart, &pairs, random_rat(rng)).expect("indices in range");
        out = &out + &mono;
    }
    out
}

/// Random scalar form of the given degree; roughly 70% of the index tuples
/// carry a coefficient.
pub fn random_scalar_form<R: Rng>(
    chart: &Chart,
    degree: usize,
    max_deg: u32,
    rng: &mut R,
) -> ScalarForm {
    let mut out = ScalarForm::zero(chart, degree as i64);
    if degree > chart.dim() {
        return out;
    }
    for tuple in increasing_tuples(chart.dim(), degree) {
        if rng.random_range(0..10) < 7 {
            out.add_term(&tuple, random_poly(chart, max_deg, rng));
        }
    }
    out
}

/// Random tangent-valued form of the given degree.
pub fn random_vector_form<R: Rng>(
    chart: &Chart,
    degree: usize,
    max_deg: u32,
    rng: &mut R,
) -> VectorForm {
    let mut out = VectorForm::zero(chart, degree as i64);
    if degree > chart.dim() {
        return out;
    }
    for tuple in increasing_tuples(chart.dim(), degree) {
        for j in 0..chart.dim() as u8 {
            if rng.random_range(0..10) < 7 {
                out.add_term(&tuple, j, random_poly(chart, max_deg, rng));
            }
        }
    }
    out
}
