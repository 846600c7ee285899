//! Connections as validated idempotent projections of the tangent bundle.
//!
//! A connection is a degree-1 tangent-valued form φ with φ∘φ = φ. Its image
//! is the vertical bundle, its kernel the horizontal bundle, and the
//! complementary projection h = Id − φ drives the whole horizontal calculus:
//! the homomorphism h*, curvature R = φ[h·,h·] and cocurvature R̄ = h[φ·,φ·].

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::chart::Chart;
use crate::error::{Error, Result};
use crate::form::{increasing_tuples, insert, lie_bracket, ScalarForm, VectorForm};
use crate::gen::random_poly;
use crate::poly::Poly;

#[derive(Debug, PartialEq, Eq)]
struct ConnData {
    chart: Chart,
    phi: VectorForm,
    h: VectorForm,
    rank: usize,
}

/// A validated connection. Immutable and cheap to clone.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Connection(Arc<ConnData>);

/// Horizontality predicates. For scalar forms only the first two apply; for
/// tangent-valued forms `Horizontal`/`Vertical` are read as the argument-side
/// conditions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HorizMode {
    Horizontal,
    Vertical,
    HorizontalValues,
    VerticalValues,
    HorizontalArgs,
    VerticalArgs,
}

impl Connection {
    /// Validate an n×n polynomial matrix as a projection and build the
    /// connection. `rows[i][j]` is the ∂_i component of φ(∂_j).
    pub fn new(chart: &Chart, rows: &[Vec<Poly>]) -> Result<Connection> {
        let phi = VectorForm::from_matrix(chart, rows)?;
        Connection::from_phi(chart, phi)
    }

    fn from_phi(chart: &Chart, phi: VectorForm) -> Result<Connection> {
        let phi2 = phi.apply_matrix(&phi);
        if phi2 != phi {
            return Err(Error::NotIdempotent);
        }
        let mut trace = Poly::zero(chart);
        for i in 0..chart.dim() as u8 {
            trace = &trace + &phi.component(&[i], i);
        }
        // the trace of an exact polynomial idempotent is an integer constant;
        // checked anyway rather than assumed
        let rank = match trace.as_constant() {
            Some(c) if c.denom() == &num::BigInt::from(1) => {
                let n: Result<usize> =
                    usize::try_from(c.numer().clone()).map_err(|_| Error::NonConstantTrace);
                let n = n?;
                if n > chart.dim() {
                    return Err(Error::NonConstantTrace);
                }
                n
            }
            _ => return Err(Error::NonConstantTrace),
        };
        let h = &VectorForm::identity(chart) - &phi;
        debug_assert_eq!(h.apply_matrix(&h), h);
        debug_assert!(phi.apply_matrix(&h).is_zero());
        debug_assert!(h.apply_matrix(&phi).is_zero());
        Ok(Connection(Arc::new(ConnData {
            chart: chart.clone(),
            phi,
            h,
            rank,
        })))
    }

    pub fn chart(&self) -> &Chart {
        &self.0.chart
    }

    /// The projection φ onto the vertical bundle.
    pub fn phi(&self) -> &VectorForm {
        &self.0.phi
    }

    /// The horizontal projection h = Id − φ.
    pub fn h(&self) -> &VectorForm {
        &self.0.h
    }

    /// Vertical rank, equal to the (constant) trace of φ.
    pub fn rank(&self) -> usize {
        self.0.rank
    }

    /// h*ω: precompose every argument slot with h. Identity on 0-forms.
    pub fn h_star(&self, omega: &ScalarForm) -> Result<ScalarForm> {
        self.chart().expect_same(omega.chart())?;
        Ok(omega.pullback_args(self.h()))
    }

    /// h*K for tangent-valued forms: K ∘ Λh.
    pub fn h_star_vv(&self, k: &VectorForm) -> Result<VectorForm> {
        self.chart().expect_same(k.chart())?;
        Ok(k.pullback_args(self.h()))
    }

    /// Curvature R(X,Y) = φ[hX, hY]: horizontal arguments, vertical values.
    pub fn curvature(&self) -> VectorForm {
        self.bracket_two_form(self.h(), &self.0.phi)
    }

    /// Cocurvature R̄(X,Y) = h[φX, φY]: vertical arguments, horizontal values.
    pub fn cocurvature(&self) -> VectorForm {
        self.bracket_two_form(&self.0.phi, self.h())
    }

    fn bracket_two_form(&self, through: &VectorForm, project: &VectorForm) -> VectorForm {
        let chart = self.chart();
        let n = chart.dim();
        let mut out = VectorForm::zero(chart, 2);
        for tuple in increasing_tuples(n, 2) {
            let a = through.matrix_column(tuple[0] as usize);
            let b = through.matrix_column(tuple[1] as usize);
            let br = lie_bracket(&a, &b).expect("vector fields on one chart");
            let v = br.apply_matrix(project);
            for j in 0..n as u8 {
                out.add_term(&tuple, j, v.component(&[], j));
            }
        }
        out
    }

    /// h∘K = K∘Λh, the condition for i^h(K) to commute with h*.
    pub fn is_h_equivariant(&self, k: &VectorForm) -> Result<bool> {
        self.chart().expect_same(k.chart())?;
        if k.degree() < 1 {
            return Err(Error::WrongDegree {
                expected: 1,
                got: k.degree(),
            });
        }
        Ok(k.apply_matrix(self.h()) == k.pullback_args(self.h()))
    }

    /// Horizontality of a scalar form: horizontal means every vertical
    /// insertion kills it; vertical means every horizontal insertion does.
    pub fn scalar_horizontality(&self, omega: &ScalarForm, mode: HorizMode) -> Result<bool> {
        self.chart().expect_same(omega.chart())?;
        let proj = match mode {
            HorizMode::Horizontal => &self.0.phi,
            HorizMode::Vertical => &self.0.h,
            _ => {
                return Err(Error::Invalid(
                    "mode applies to tangent-valued forms".into(),
                ))
            }
        };
        for i in 0..self.chart().dim() {
            let field = proj.matrix_column(i);
            if !insert(&field, omega)?.is_zero() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Horizontality of a tangent-valued form, on the argument or value side.
    pub fn vector_horizontality(&self, k: &VectorForm, mode: HorizMode) -> Result<bool> {
        self.chart().expect_same(k.chart())?;
        Ok(match mode {
            HorizMode::HorizontalValues => k.apply_matrix(self.h()) == *k,
            HorizMode::VerticalValues => k.apply_matrix(&self.0.phi) == *k,
            HorizMode::HorizontalArgs | HorizMode::Horizontal => k.pullback_args(self.h()) == *k,
            HorizMode::VerticalArgs | HorizMode::Vertical => k.pullback_args(&self.0.phi) == *k,
        })
    }

    /// A fixed rank-1 connection on a 3-chart with one unit of curvature:
    /// vertical span(∂_2), horizontal span(∂_0, ∂_1 + x_0 ∂_2). Used as the
    /// worked example throughout reports and tests.
    pub fn curved_rank1(chart: &Chart) -> Result<Connection> {
        if chart.dim() != 3 {
            return Err(Error::Invalid("the worked example needs a 3-chart".into()));
        }
        let zero = Poly::zero(chart);
        let one = Poly::one(chart);
        let x = Poly::coord(chart, 0)?;
        let rows = vec![
            vec![zero.clone(), zero.clone(), zero.clone()],
            vec![zero.clone(), zero.clone(), zero.clone()],
            vec![zero.clone(), &Poly::zero(chart) - &x, one],
        ];
        Connection::new(chart, &rows)
    }
}

/// Deterministic random connection of prescribed rank: a constant projection
/// conjugated by a product of elementary shear matrices with sparse
/// polynomial entries. Unimodular conjugation keeps the inverse polynomial,
/// so idempotence and the trace are exact by construction (and re-validated).
pub fn random_connection(
    chart: &Chart,
    rank: usize,
    seed: u64,
    coeff_degree: u32,
) -> Result<Connection> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_connection_rng(chart, rank, coeff_degree, &mut rng)
}

pub fn random_connection_rng<R: Rng>(
    chart: &Chart,
    rank: usize,
    coeff_degree: u32,
    rng: &mut R,
) -> Result<Connection> {
    let n = chart.dim();
    if rank > n {
        return Err(Error::RankOutOfRange { rank, dim: n });
    }
    // P0 = projection onto the first `rank` coordinates
    let mut p0 = vec![vec![Poly::zero(chart); n]; n];
    for (i, row) in p0.iter_mut().enumerate().take(rank) {
        row[i] = Poly::one(chart);
    }
    if n == 1 || rank == 0 || rank == n {
        // conjugation cannot change a scalar or trivial projection
        return Connection::new(chart, &p0);
    }

    let shears = rng.random_range(2..=3);
    let mut mat = p0;
    for _ in 0..shears {
        let r = rng.random_range(0..n);
        let mut c = rng.random_range(0..n - 1);
        if c >= r {
            c += 1;
        }
        let f = random_poly(chart, coeff_degree, rng);
        mat = shear_conjugate(&mat, r, c, &f);
    }
    Connection::new(chart, &mat)
}

/// E M E^{-1} for the elementary shear E = Id + f·e_{rc}.
fn shear_conjugate(m: &[Vec<Poly>], r: usize, c: usize, f: &Poly) -> Vec<Vec<Poly>> {
    let n = m.len();
    // left-multiply: row r += f * row c
    let mut a: Vec<Vec<Poly>> = m.to_vec();
    for j in 0..n {
        a[r][j] = &a[r][j] + &(f * &m[c][j]);
    }
    // right-multiply by E^{-1} = Id − f·e_{rc}: col c −= f * col r
    let snapshot: Vec<Poly> = (0..n).map(|i| a[i][r].clone()).collect();
    for i in 0..n {
        a[i][c] = &a[i][c] - &(f * &snapshot[i]);
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::form::{fn_bracket, insert_vv};
    use crate::poly::rat_int;

    fn chart3() -> Chart {
        Chart::new(["x", "y", "z"]).unwrap()
    }

    fn p(c: &Chart, s: &str) -> Poly {
        Poly::parse(c, s).unwrap()
    }

    #[test]
    fn worked_example_validates_with_rank_one() {
        let c = chart3();
        let conn = Connection::curved_rank1(&c).unwrap();
        assert_eq!(conn.rank(), 1);
        // h sends ∂_y to ∂_y + x ∂_z
        let hy = conn.h().matrix_column(1);
        assert_eq!(hy.component(&[], 1), Poly::one(&c));
        assert_eq!(hy.component(&[], 2), p(&c, "x"));
    }

    #[test]
    fn zero_matrix_gives_rank_zero_and_h_identity() {
        let c = chart3();
        let rows = vec![vec![Poly::zero(&c); 3]; 3];
        let conn = Connection::new(&c, &rows).unwrap();
        assert_eq!(conn.rank(), 0);
        assert_eq!(*conn.h(), VectorForm::identity(&c));
        assert!(conn.curvature().is_zero());
        assert!(conn.cocurvature().is_zero());
    }

    #[test]
    fn nilpotent_matrix_is_rejected() {
        let c = Chart::new(["x", "y"]).unwrap();
        let rows = vec![
            vec![Poly::zero(&c), p(&c, "x")],
            vec![Poly::zero(&c), Poly::zero(&c)],
        ];
        assert_eq!(Connection::new(&c, &rows), Err(Error::NotIdempotent));
    }

    #[test]
    fn identity_matrix_has_zero_curvature() {
        let c = chart3();
        let conn = Connection::new(&c, &VectorForm::identity(&c).to_matrix()).unwrap();
        assert_eq!(conn.rank(), 3);
        assert!(conn.curvature().is_zero());
    }

    #[test]
    fn worked_example_curvature_and_cocurvature() {
        let c = chart3();
        let conn = Connection::curved_rank1(&c).unwrap();
        let r = conn.curvature();
        let mut expected = VectorForm::zero(&c, 2);
        expected.add_term(&[0, 1], 2, Poly::one(&c));
        assert_eq!(r, expected);
        assert!(conn.cocurvature().is_zero());
    }

    #[test]
    fn vertical_plane_example_swaps_r_and_rbar() {
        // vertical span(∂_x, ∂_y + x ∂_z), horizontal span(∂_z)
        let c = chart3();
        let rows = vec![
            vec![p(&c, "1"), p(&c, "0"), p(&c, "0")],
            vec![p(&c, "0"), p(&c, "1"), p(&c, "0")],
            vec![p(&c, "0"), p(&c, "x"), p(&c, "0")],
        ];
        let conn = Connection::new(&c, &rows).unwrap();
        assert_eq!(conn.rank(), 2);
        assert!(conn.curvature().is_zero());
        let mut expected = VectorForm::zero(&c, 2);
        expected.add_term(&[0, 1], 2, Poly::one(&c));
        assert_eq!(conn.cocurvature(), expected);
    }

    #[test]
    fn h_star_of_dz_is_x_dy() {
        let c = chart3();
        let conn = Connection::curved_rank1(&c).unwrap();
        let dz = ScalarForm::coord_diff(&c, 2).unwrap();
        let mut expected = ScalarForm::zero(&c, 1);
        expected.add_term(&[1], p(&c, "x"));
        assert_eq!(conn.h_star(&dz).unwrap(), expected);
    }

    #[test]
    fn h_star_fixes_functions_and_is_idempotent() {
        let c = chart3();
        let conn = Connection::curved_rank1(&c).unwrap();
        let f = ScalarForm::from_poly(p(&c, "x y^2 - 1/2 z"));
        assert_eq!(conn.h_star(&f).unwrap(), f);

        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for deg in 0..=3 {
            let w = crate::gen::random_scalar_form(&c, deg, 2, &mut rng);
            let hw = conn.h_star(&w).unwrap();
            assert_eq!(conn.h_star(&hw).unwrap(), hw);
        }
    }

    #[test]
    fn equivariance_examples() {
        let c = chart3();
        let conn = Connection::curved_rank1(&c).unwrap();
        assert!(conn.is_h_equivariant(conn.h()).unwrap());
        assert!(conn.is_h_equivariant(conn.phi()).unwrap());
        assert!(!conn.is_h_equivariant(&conn.curvature()).unwrap());
        let x = VectorForm::coord_field(&c, 0).unwrap();
        assert!(conn.is_h_equivariant(&x).is_err());
    }

    #[test]
    fn horizontality_examples() {
        let c = chart3();
        let conn = Connection::curved_rank1(&c).unwrap();
        let dz = ScalarForm::coord_diff(&c, 2).unwrap();
        assert!(!conn
            .scalar_horizontality(&dz, HorizMode::Horizontal)
            .unwrap());
        let mut xdy = ScalarForm::zero(&c, 1);
        xdy.add_term(&[1], p(&c, "x"));
        assert!(conn
            .scalar_horizontality(&xdy, HorizMode::Horizontal)
            .unwrap());
        // dz − x dy kills the horizontal frame
        let vert = &dz - &xdy;
        assert!(conn
            .scalar_horizontality(&vert, HorizMode::Vertical)
            .unwrap());

        let r = conn.curvature();
        assert!(conn
            .vector_horizontality(&r, HorizMode::HorizontalArgs)
            .unwrap());
        assert!(conn
            .vector_horizontality(&r, HorizMode::VerticalValues)
            .unwrap());
    }

    #[test]
    fn generator_produces_exact_projections() {
        for dim in [1usize, 2, 3, 4] {
            let names: Vec<String> = (0..dim).map(|i| format!("x{i}")).collect();
            let c = Chart::new(names).unwrap();
            for rank in 0..=dim {
                let conn = random_connection(&c, rank, 42 + rank as u64, 2).unwrap();
                assert_eq!(conn.rank(), rank);
                let phi = conn.phi();
                assert_eq!(phi.apply_matrix(phi), *phi);
                assert_eq!(conn.h().apply_matrix(conn.h()), *conn.h());
                assert!(phi.apply_matrix(conn.h()).is_zero());
                assert_eq!(&phi.clone() + conn.h(), VectorForm::identity(&c));
            }
        }
        assert!(random_connection(&chart3(), 4, 1, 2).is_err());
    }

    #[test]
    fn generator_is_deterministic_in_seed() {
        let c = chart3();
        let a = random_connection(&c, 1, 9, 2).unwrap();
        let b = random_connection(&c, 1, 9, 2).unwrap();
        assert_eq!(a.phi(), b.phi());
    }

    #[test]
    fn bianchi_identities_on_the_worked_example() {
        let c = chart3();
        let conn = Connection::curved_rank1(&c).unwrap();
        let r = conn.curvature();
        let rb = conn.cocurvature();
        let sum = &r + &rb;
        assert!(fn_bracket(&sum, conn.phi()).unwrap().is_zero());
        let lhs = fn_bracket(&r, conn.phi()).unwrap();
        let rhs = &insert_vv(&r, &rb).unwrap() + &insert_vv(&rb, &r).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn fn_bracket_of_phi_with_itself_is_twice_curvature_sum() {
        let c = chart3();
        let conn = Connection::curved_rank1(&c).unwrap();
        let two_rr = (&conn.curvature() + &conn.cocurvature()).scale(&rat_int(2));
        assert_eq!(fn_bracket(conn.phi(), conn.phi()).unwrap(), two_rr);
        assert_eq!(fn_bracket(conn.h(), conn.h()).unwrap(), two_rr);
        assert_eq!(
            fn_bracket(conn.phi(), conn.h()).unwrap(),
            two_rr.scale(&rat_int(-1))
        );

        // the degree-(1,1) closed formula lands on the same values
        use crate::form::fn_bracket_deg1_oracle;
        assert_eq!(
            fn_bracket_deg1_oracle(conn.phi(), conn.phi()).unwrap(),
            two_rr
        );
        assert_eq!(fn_bracket_deg1_oracle(conn.h(), conn.h()).unwrap(), two_rr);
    }
}
