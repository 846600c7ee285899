//! Product fiber bundles on chart products: the base and fiber charts are
//! joined (base coordinates first), the connection is determined by a table
//! of lift coefficients, and the horizontal lift χ carries base data to
//! horizontal data upstairs. The vertical distribution is the fiber-tangent
//! one, which is integrable, so the cocurvature of every induced connection
//! vanishes.

use crate::chart::Chart;
use crate::connection::Connection;
use crate::error::{Error, Result};
use crate::form::{ScalarForm, VectorForm};
use crate::poly::Poly;

/// A trivial bundle base × fiber with a polynomial lift table. `gamma` has
/// one row per fiber coordinate and one column per base coordinate, entries
/// over the total chart; the horizontal lift of ∂_i is
/// ∂_i + Σ_a gamma[a][i] ∂_{fiber a}.
#[derive(Clone, Debug)]
pub struct ProductBundle {
    base: Chart,
    fiber: Chart,
    total: Chart,
    gamma: Vec<Vec<Poly>>,
}

impl ProductBundle {
    pub fn new(base: &Chart, fiber: &Chart, gamma: Vec<Vec<Poly>>) -> Result<ProductBundle> {
        for name in fiber.names() {
            if base.index_of(name).is_some() {
                return Err(Error::BadChart(format!(
                    "coordinate `{name}` appears in both base and fiber"
                )));
            }
        }
        let total = Chart::new(base.names().iter().chain(fiber.names()).cloned())?;
        let (m, s) = (base.dim(), fiber.dim());
        if gamma.len() != s || gamma.iter().any(|row| row.len() != m) {
            return Err(Error::Invalid(format!("gamma must be {s}x{m}")));
        }
        for row in &gamma {
            for p in row {
                total.expect_same(p.chart())?;
            }
        }
        Ok(ProductBundle {
            base: base.clone(),
            fiber: fiber.clone(),
            total,
            gamma,
        })
    }

    pub fn base(&self) -> &Chart {
        &self.base
    }

    pub fn fiber(&self) -> &Chart {
        &self.fiber
    }

    pub fn total(&self) -> &Chart {
        &self.total
    }

    /// The connection with vertical bundle the fiber tangent distribution:
    /// φ(ξ, η) = (0, η − Γξ).
    pub fn induced_connection(&self) -> Connection {
        let (m, s) = (self.base.dim(), self.fiber.dim());
        let n = m + s;
        let mut rows = vec![vec![Poly::zero(&self.total); n]; n];
        for a in 0..s {
            for (j, row_j) in rows.iter_mut().enumerate().skip(m) {
                if j == m + a {
                    row_j[j] = Poly::one(&self.total);
                }
            }
            for (i, g) in self.gamma[a].iter().enumerate() {
                rows[m + a][i] = &Poly::zero(&self.total) - g;
            }
        }
        Connection::new(&self.total, &rows)
            .expect("the induced projection is idempotent by construction")
    }

    fn inject_poly(&self, p: &Poly) -> Result<Poly> {
        if p.chart() == &self.total {
            // already upstairs: require that no fiber coordinate occurs
            let m = self.base.dim();
            for (e, _) in p.terms() {
                for (i, &pow) in e.0.iter().enumerate() {
                    if i >= m && pow > 0 {
                        return Err(Error::FiberCoordPresent(self.total.name(i).to_string()));
                    }
                }
            }
            return Ok(p.clone());
        }
        self.base.expect_same(p.chart())?;
        let mut out = Poly::zero(&self.total);
        for (e, c) in p.terms() {
            let pairs: Vec<(usize, u16)> = e.0.iter().copied().enumerate().collect();
            out = &out + &Poly::monomial(&self.total, &pairs, c.clone())?;
        }
        Ok(out)
    }

    /// p*ω: reinterpret a base form over the total chart. Base indices come
    /// first in the total chart, so index tuples carry over unchanged.
    pub fn pullback_base(&self, omega: &ScalarForm) -> Result<ScalarForm> {
        let src = self.check_base_scalar(omega)?;
        let mut out = ScalarForm::zero(&self.total, src.degree());
        for (tuple, p) in src.terms() {
            out.add_term(tuple, self.inject_poly(p)?);
        }
        Ok(out)
    }

    fn check_base_scalar(&self, omega: &ScalarForm) -> Result<ScalarForm> {
        if omega.chart() == &self.base {
            return Ok(omega.clone());
        }
        self.total.expect_same(omega.chart())?;
        // must not involve fiber coordinates, in indices or coefficients
        let m = self.base.dim() as u8;
        let mut back = ScalarForm::zero(&self.total, omega.degree());
        for (tuple, p) in omega.terms() {
            if let Some(&i) = tuple.iter().find(|&&i| i >= m) {
                return Err(Error::FiberCoordPresent(
                    self.total.name(i as usize).to_string(),
                ));
            }
            back.add_term(tuple, self.inject_poly(p)?);
        }
        Ok(back)
    }

    /// Accept a vector form over the base chart, or over the total chart as
    /// long as it only involves base coordinates (indices, legs and
    /// coefficients alike).
    fn check_base_vector(&self, k: &VectorForm) -> Result<VectorForm> {
        if k.chart() == &self.base {
            return Ok(k.clone());
        }
        self.total.expect_same(k.chart())?;
        let m = self.base.dim() as u8;
        let mut out = VectorForm::zero(&self.total, k.degree());
        for ((tuple, leg), p) in k.terms() {
            if let Some(&i) = tuple.iter().find(|&&i| i >= m) {
                return Err(Error::FiberCoordPresent(
                    self.total.name(i as usize).to_string(),
                ));
            }
            if *leg >= m {
                return Err(Error::FiberCoordPresent(
                    self.total.name(*leg as usize).to_string(),
                ));
            }
            out.add_term(tuple, *leg, self.inject_poly(p)?);
        }
        Ok(out)
    }

    /// The horizontal lift of a base vector field: χX = (X, ΓX).
    pub fn chi_lift(&self, x: &VectorForm) -> Result<VectorForm> {
        if x.degree() != 0 {
            return Err(Error::WrongDegree {
                expected: 0,
                got: x.degree(),
            });
        }
        let x = self.check_base_vector(x)?;
        let (m, s) = (self.base.dim(), self.fiber.dim());
        let mut out = VectorForm::zero(&self.total, 0);
        for i in 0..m {
            let xi = if x.chart() == &self.base {
                self.inject_poly(&x.component(&[], i as u8))?
            } else {
                x.component(&[], i as u8)
            };
            if xi.is_zero() {
                continue;
            }
            out.add_term(&[], i as u8, xi.clone());
            for a in 0..s {
                out.add_term(&[], (m + a) as u8, &self.gamma[a][i] * &xi);
            }
        }
        Ok(out)
    }

    /// χ_*K: lift a base tangent-valued form to a horizontal one with
    /// horizontal values. Index tuples carry over; each output leg ∂_i is
    /// replaced by its horizontal lift.
    pub fn chi_star(&self, k: &VectorForm) -> Result<VectorForm> {
        let k = self.check_base_vector(k)?;
        let (m, s) = (self.base.dim(), self.fiber.dim());
        let mut out = VectorForm::zero(&self.total, k.degree());
        if k.degree() > (m + s) as i64 {
            return Ok(out);
        }
        for ((tuple, leg), p) in k.terms() {
            let coeff = if k.chart() == &self.base {
                self.inject_poly(p)?
            } else {
                p.clone()
            };
            out.add_term(tuple, *leg, coeff.clone());
            for a in 0..s {
                out.add_term(tuple, (m + a) as u8, &self.gamma[a][*leg as usize] * &coeff);
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connection::HorizMode;
    use crate::form::{fn_bracket, insert, insert_vv, lie_bracket, wedge};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bundle_a() -> ProductBundle {
        let base = Chart::new(["x", "y"]).unwrap();
        let fiber = Chart::new(["z"]).unwrap();
        let total = Chart::new(["x", "y", "z"]).unwrap();
        let gamma = vec![vec![Poly::zero(&total), Poly::coord(&total, 0).unwrap()]];
        ProductBundle::new(&base, &fiber, gamma).unwrap()
    }

    #[test]
    fn rejects_name_clash_and_bad_gamma() {
        let base = Chart::new(["x", "y"]).unwrap();
        let fiber = Chart::new(["x"]).unwrap();
        assert!(ProductBundle::new(&base, &fiber, vec![]).is_err());

        let fiber = Chart::new(["z"]).unwrap();
        assert!(ProductBundle::new(&base, &fiber, vec![]).is_err());
    }

    #[test]
    fn trivial_lift_has_flat_connection() {
        let base = Chart::new(["t"]).unwrap();
        let fiber = Chart::new(["s"]).unwrap();
        let total = Chart::new(["t", "s"]).unwrap();
        let pb = ProductBundle::new(&base, &fiber, vec![vec![Poly::zero(&total)]]).unwrap();
        let conn = pb.induced_connection();
        assert_eq!(conn.rank(), 1);
        assert!(conn.curvature().is_zero());
        assert!(conn.cocurvature().is_zero());
        let x = VectorForm::coord_field(&base, 0).unwrap();
        let lift = pb.chi_lift(&x).unwrap();
        assert_eq!(lift, VectorForm::coord_field(&total, 0).unwrap());
    }

    #[test]
    fn time_dependent_shift_on_the_line() {
        let base = Chart::new(["t"]).unwrap();
        let fiber = Chart::new(["s"]).unwrap();
        let total = Chart::new(["t", "s"]).unwrap();
        let pb =
            ProductBundle::new(&base, &fiber, vec![vec![Poly::coord(&total, 0).unwrap()]]).unwrap();
        let conn = pb.induced_connection();
        // h(∂_t) = ∂_t + t ∂_s
        let ht = conn.h().matrix_column(0);
        assert_eq!(ht.component(&[], 0), Poly::one(&total));
        assert_eq!(ht.component(&[], 1), Poly::coord(&total, 0).unwrap());
        assert!(conn.curvature().is_zero(), "no curvature on a 1-dim base");
    }

    #[test]
    fn recovering_the_worked_connection() {
        let pb = bundle_a();
        let conn = pb.induced_connection();
        let total = pb.total().clone();
        let reference = Connection::curved_rank1(&total).unwrap();
        assert_eq!(conn.phi(), reference.phi());
        let mut r = VectorForm::zero(&total, 2);
        r.add_term(&[0, 1], 2, Poly::one(&total));
        assert_eq!(conn.curvature(), r);
        assert!(conn.cocurvature().is_zero());
    }

    #[test]
    fn chi_lift_is_fiberwise_linear_and_horizontal() {
        let pb = bundle_a();
        let conn = pb.induced_connection();
        let base = pb.base().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = crate::gen::random_vector_form(&base, 0, 2, &mut rng);
        let f = crate::gen::random_poly(&base, 2, &mut rng);
        let fx = {
            let mut out = VectorForm::zero(&base, 0);
            for j in 0..2u8 {
                out.add_term(&[], j, &f * &x.component(&[], j));
            }
            out
        };
        let lift_fx = pb.chi_lift(&fx).unwrap();
        let lift_x = pb.chi_lift(&x).unwrap();
        let pf = pb.inject_poly(&f).unwrap();
        let mut expected = VectorForm::zero(pb.total(), 0);
        for j in 0..3u8 {
            expected.add_term(&[], j, &pf * &lift_x.component(&[], j));
        }
        assert_eq!(lift_fx, expected);

        // h ∘ χX = χX
        assert_eq!(lift_x.apply_matrix(conn.h()), lift_x);

        // pushing forward along the projection recovers X
        for j in 0..2u8 {
            assert_eq!(
                lift_x.component(&[], j),
                pb.inject_poly(&x.component(&[], j)).unwrap()
            );
        }
    }

    #[test]
    fn chi_star_on_fields_and_one_forms() {
        let pb = bundle_a();
        let base = pb.base().clone();
        let total = pb.total().clone();

        let x = VectorForm::coord_field(&base, 1).unwrap();
        assert_eq!(pb.chi_star(&x).unwrap(), pb.chi_lift(&x).unwrap());

        // χ_*(dx⊗∂_y) = dx⊗(∂_y + x ∂_z)
        let mut k = VectorForm::zero(&base, 1);
        k.add_term(&[0], 1, Poly::one(&base));
        let lifted = pb.chi_star(&k).unwrap();
        let mut expected = VectorForm::zero(&total, 1);
        expected.add_term(&[0], 1, Poly::one(&total));
        expected.add_term(&[0], 2, Poly::coord(&total, 0).unwrap());
        assert_eq!(lifted, expected);

        // horizontal with horizontal values
        let conn = pb.induced_connection();
        assert!(conn
            .vector_horizontality(&lifted, HorizMode::HorizontalArgs)
            .unwrap());
        assert!(conn
            .vector_horizontality(&lifted, HorizMode::HorizontalValues)
            .unwrap());
    }

    #[test]
    fn chi_star_is_a_module_homomorphism_over_pullback() {
        let pb = bundle_a();
        let base = pb.base().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let w = crate::gen::random_scalar_form(&base, 1, 2, &mut rng);
            let k = crate::gen::random_vector_form(&base, 1, 2, &mut rng);
            let lhs = pb
                .chi_star(&crate::form::wedge_sv(&w, &k).unwrap())
                .unwrap();
            let rhs =
                crate::form::wedge_sv(&pb.pullback_base(&w).unwrap(), &pb.chi_star(&k).unwrap())
                    .unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn pullback_base_examples() {
        let pb = bundle_a();
        let base = pb.base().clone();
        let conn = pb.induced_connection();
        let dx = ScalarForm::coord_diff(&base, 0).unwrap();
        let p_dx = pb.pullback_base(&dx).unwrap();
        assert_eq!(p_dx, ScalarForm::coord_diff(pb.total(), 0).unwrap());

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let f = crate::gen::random_poly(&base, 2, &mut rng);
        let pf = pb.pullback_base(&ScalarForm::from_poly(f)).unwrap();
        assert!(conn
            .scalar_horizontality(&pf, HorizMode::Horizontal)
            .unwrap());

        for _ in 0..5 {
            let a = crate::gen::random_scalar_form(&base, 1, 2, &mut rng);
            let b = crate::gen::random_scalar_form(&base, 1, 2, &mut rng);
            let lhs = pb.pullback_base(&wedge(&a, &b).unwrap()).unwrap();
            let rhs = wedge(
                &pb.pullback_base(&a).unwrap(),
                &pb.pullback_base(&b).unwrap(),
            )
            .unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn fiber_coordinates_are_rejected() {
        let pb = bundle_a();
        let total = pb.total().clone();
        let dz = ScalarForm::coord_diff(&total, 2).unwrap();
        assert!(matches!(
            pb.pullback_base(&dz),
            Err(Error::FiberCoordPresent(_))
        ));
        let z_field = VectorForm::coord_field(&total, 2).unwrap();
        assert!(matches!(
            pb.chi_lift(&z_field),
            Err(Error::FiberCoordPresent(_))
        ));
        let mut k = VectorForm::zero(&total, 1);
        k.add_term(&[0], 0, Poly::coord(&total, 2).unwrap());
        assert!(matches!(pb.chi_star(&k), Err(Error::FiberCoordPresent(_))));
    }

    #[test]
    fn lifted_brackets_close_horizontally() {
        // χ_*[X,Y] = h∘[χX, χY] on vector fields (degree-0 slice of the
        // lifting identities)
        let pb = bundle_a();
        let base = pb.base().clone();
        let conn = pb.induced_connection();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..5 {
            let x = crate::gen::random_vector_form(&base, 0, 2, &mut rng);
            let y = crate::gen::random_vector_form(&base, 0, 2, &mut rng);
            let lhs = pb.chi_star(&lie_bracket(&x, &y).unwrap()).unwrap();
            let rhs = lie_bracket(&pb.chi_lift(&x).unwrap(), &pb.chi_lift(&y).unwrap())
                .unwrap()
                .apply_matrix(conn.h());
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn lifting_intertwines_insertion() {
        let pb = bundle_a();
        let base = pb.base().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..5 {
            let k = crate::gen::random_vector_form(&base, 1, 2, &mut rng);
            let w = crate::gen::random_scalar_form(&base, 2, 2, &mut rng);
            let lhs = pb.pullback_base(&insert(&k, &w).unwrap()).unwrap();
            let rhs = insert(&pb.chi_star(&k).unwrap(), &pb.pullback_base(&w).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
        }
        // and the tangent-valued version
        for _ in 0..5 {
            let k1 = crate::gen::random_vector_form(&base, 1, 2, &mut rng);
            let k2 = crate::gen::random_vector_form(&base, 1, 2, &mut rng);
            let lhs = pb.chi_star(&insert_vv(&k1, &k2).unwrap()).unwrap();
            let rhs = insert_vv(&pb.chi_star(&k1).unwrap(), &pb.chi_star(&k2).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn lifting_intertwines_fn_bracket_up_to_h() {
        let pb = bundle_a();
        let base = pb.base().clone();
        let conn = pb.induced_connection();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..3 {
            let k1 = crate::gen::random_vector_form(&base, 1, 2, &mut rng);
            let k2 = crate::gen::random_vector_form(&base, 0, 2, &mut rng);
            let lhs = pb.chi_star(&fn_bracket(&k1, &k2).unwrap()).unwrap();
            let br = fn_bracket(&pb.chi_star(&k1).unwrap(), &pb.chi_star(&k2).unwrap()).unwrap();
            let rhs = br.apply_matrix(conn.h());
            assert_eq!(lhs, rhs);
            assert_eq!(lhs, rhs.pullback_args(conn.h()));
        }
    }
}
