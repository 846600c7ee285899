//! Property tests for the algebraic substrate and the structural invariants
//! of connections: polynomial ring axioms, derivative rules, horizontality
//! of curvature data, the h* homomorphism, and closure of the graded
//! commutator on derivations over h*.

use gradform::chart::Chart;
use gradform::connection::{random_connection, HorizMode};
use gradform::form::{insert_vv, wedge, VectorForm};
use gradform::gen::{random_scalar_form, random_vector_form};
use gradform::operator::{first_mismatch, graded_commutator, theta_h, OperatorExpr, TestFamily};
use gradform::poly::{rat, rat_int, Poly};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn chart3() -> Chart {
    Chart::new(["x", "y", "z"]).unwrap()
}

fn poly_strategy() -> impl Strategy<Value = Poly> {
    prop::collection::vec(((0u16..3, 0u16..3, 0u16..3), -4i64..5, 1i64..4), 0..5).prop_map(
        |terms| {
            let chart = chart3();
            let mut out = Poly::zero(&chart);
            for ((a, b, c), num, den) in terms {
                let mono =
                    Poly::monomial(&chart, &[(0, a), (1, b), (2, c)], rat(num, den)).unwrap();
                out = &out + &mono;
            }
            out
        },
    )
}

proptest! {
    #[test]
    fn ring_axioms(a in poly_strategy(), b in poly_strategy(), c in poly_strategy()) {
        // associativity and commutativity of both operations, distributivity
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
    }

    #[test]
    fn leibniz_rule(a in poly_strategy(), b in poly_strategy(), i in 0usize..3) {
        let lhs = (&a * &b).partial(i).unwrap();
        let rhs = &(&a.partial(i).unwrap() * &b) + &(&a * &b.partial(i).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn mixed_partials_commute(a in poly_strategy(), i in 0usize..3, j in 0usize..3) {
        let ij = a.partial(i).unwrap().partial(j).unwrap();
        let ji = a.partial(j).unwrap().partial(i).unwrap();
        prop_assert_eq!(ij, ji);
    }

    #[test]
    fn text_grammar_roundtrip(a in poly_strategy()) {
        let chart = chart3();
        let text = a.to_string();
        let back = Poly::parse(&chart, &text).unwrap();
        prop_assert_eq!(&back, &a);
        prop_assert_eq!(back.to_string(), text);
    }
}

#[test]
fn curvature_data_has_the_stated_horizontality() {
    for dim in [3usize, 4] {
        let chart = Chart::new(["x", "y", "z", "u"][..dim].to_vec()).unwrap();
        for seed in 0..6u64 {
            let rank = 1 + (seed as usize % (dim - 1));
            let conn = random_connection(&chart, rank, 50 + seed, 2).unwrap();
            let r = conn.curvature();
            let rb = conn.cocurvature();
            assert!(conn
                .vector_horizontality(&r, HorizMode::HorizontalArgs)
                .unwrap());
            assert!(conn
                .vector_horizontality(&r, HorizMode::VerticalValues)
                .unwrap());
            assert!(conn
                .vector_horizontality(&rb, HorizMode::VerticalArgs)
                .unwrap());
            assert!(conn
                .vector_horizontality(&rb, HorizMode::HorizontalValues)
                .unwrap());
            // the curvature kills its own values
            assert!(insert_vv(&r, &r).unwrap().is_zero());
            assert!(insert_vv(&rb, &rb).unwrap().is_zero());
        }
    }
}

#[test]
fn h_star_is_an_algebra_homomorphism() {
    let chart = chart3();
    let mut rng = ChaCha8Rng::seed_from_u64(60);
    for seed in 0..5u64 {
        let conn = random_connection(&chart, 1 + (seed as usize % 2), 70 + seed, 2).unwrap();
        for _ in 0..4 {
            let p = rng.random_range(0..=2usize);
            let q = rng.random_range(0..=2usize);
            let a = random_scalar_form(&chart, p, 2, &mut rng);
            let b = random_scalar_form(&chart, q, 2, &mut rng);
            let lhs = conn.h_star(&wedge(&a, &b).unwrap()).unwrap();
            let rhs = wedge(&conn.h_star(&a).unwrap(), &conn.h_star(&b).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
            let ha = conn.h_star(&a).unwrap();
            assert_eq!(conn.h_star(&ha).unwrap(), ha);
        }
    }
}

#[test]
fn horizontal_forms_depend_only_on_the_vertical_image() {
    // a second projection with the same image: φ' = φ + φ∘M∘h is idempotent
    // and has im φ' = im φ, but a different horizontal complement
    let chart = chart3();
    let mut rng = ChaCha8Rng::seed_from_u64(81);
    for seed in 0..4u64 {
        let conn = random_connection(&chart, 1 + (seed as usize % 2), 90 + seed, 2).unwrap();
        let m = random_vector_form(&chart, 1, 1, &mut rng);
        let twist = m.apply_matrix(conn.phi()).pullback_args(conn.h());
        let phi2 = &conn.phi().clone() + &twist;
        let conn2 = gradform::connection::Connection::new(&chart, &phi2.to_matrix()).unwrap();
        if conn2.phi() == conn.phi() {
            continue; // the twist vanished; nothing to compare
        }
        for _ in 0..6 {
            let deg = rng.random_range(0..=3usize);
            let w = random_scalar_form(&chart, deg, 2, &mut rng);
            let a = conn
                .scalar_horizontality(&w, HorizMode::Horizontal)
                .unwrap();
            let b = conn2
                .scalar_horizontality(&w, HorizMode::Horizontal)
                .unwrap();
            assert_eq!(a, b, "horizontal predicate must agree (degree {deg})");
        }
        // and h* of either connection produces forms horizontal for both
        let w = random_scalar_form(&chart, 2, 2, &mut rng);
        let hw = conn.h_star(&w).unwrap();
        assert!(conn2
            .scalar_horizontality(&hw, HorizMode::Horizontal)
            .unwrap());
    }
}

#[test]
fn commutator_of_derivations_over_h_star_is_again_one() {
    let chart = chart3();
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    for seed in 0..3u64 {
        let conn = random_connection(&chart, 1 + (seed as usize % 2), 110 + seed, 2).unwrap();
        let hs = OperatorExpr::h_star(&conn);
        let make = |rng: &mut ChaCha8Rng, kd: usize| {
            let kh = random_vector_form(&chart, kd, 2, rng).pullback_args(conn.h());
            let le = random_vector_form(&chart, kd + 1, 2, rng)
                .apply_matrix(conn.h())
                .pullback_args(conn.h());
            OperatorExpr::sum(
                &chart,
                kd as i64,
                vec![
                    (rat_int(1), theta_h(&kh, &conn).unwrap()),
                    (rat_int(1), OperatorExpr::insert_h(&le, &conn).unwrap()),
                ],
            )
            .unwrap()
        };
        let k1 = rng.random_range(0..=1usize);
        let k2 = rng.random_range(0..=1usize);
        let d1 = make(&mut rng, k1);
        let d2 = make(&mut rng, k2);
        let comm = graded_commutator(&d1, &d2).unwrap();
        let kd = comm.degree();

        // commutes with h*
        let fam = TestFamily::standard(&chart, &mut rng);
        let with_h = graded_commutator(&comm, &hs).unwrap();
        assert!(
            first_mismatch(&with_h, &OperatorExpr::zero(&chart, with_h.degree()), &fam)
                .unwrap()
                .is_none()
        );

        // Leibniz over h* on random products
        for _ in 0..4 {
            let p = rng.random_range(0..=1usize);
            let q = rng.random_range(0..=1usize);
            let a = random_scalar_form(&chart, p, 2, &mut rng);
            let b = random_scalar_form(&chart, q, 2, &mut rng);
            let lhs = comm.apply(&wedge(&a, &b).unwrap()).unwrap();
            let da_hb = wedge(&comm.apply(&a).unwrap(), &conn.h_star(&b).unwrap()).unwrap();
            let ha_db = wedge(&conn.h_star(&a).unwrap(), &comm.apply(&b).unwrap()).unwrap();
            let sign = if (kd * a.degree()) % 2 == 0 { 1 } else { -1 };
            let rhs = &da_hb + &ha_db.scale(&rat_int(sign));
            assert_eq!(lhs, rhs);
        }
    }
}

#[test]
fn identity_is_central_and_theta_identity_is_d() {
    let chart = chart3();
    let id = VectorForm::identity(&chart);
    let mut rng = ChaCha8Rng::seed_from_u64(91);
    for deg in 0..=2usize {
        let l = random_vector_form(&chart, deg, 2, &mut rng);
        assert!(gradform::form::fn_bracket(&id, &l).unwrap().is_zero());
    }
}
