//! Graded linear operators on Ω(U) as lazy expression trees.
//!
//! Ω(U) is infinite-dimensional over the rationals, so operators are never
//! materialized; they are trees of primitives evaluated on demand, and two
//! operators count as equal when they agree on a separating test family
//! (all coordinate functions, all coordinate 1-forms, and a handful of
//! random forms per degree). The family separates because a derivation
//! over h* is determined by what it does to functions and 1-forms.

use rand::Rng;

use crate::chart::Chart;
use crate::connection::Connection;
use crate::error::{Error, Result};
use crate::form::{
    ext_d, increasing_tuples, insert, insert_h, insert_vv_h, wedge, ScalarForm, VectorForm,
};
use crate::gen::random_scalar_form;
use crate::poly::{rat_int, Rat};

#[derive(Clone, Debug)]
enum OpNode {
    ExtD,
    HStar(Connection),
    InsertH(VectorForm, Connection),
    Insert(VectorForm),
    WedgeBy(ScalarForm),
    Compose(Box<OperatorExpr>, Box<OperatorExpr>),
    Sum(Vec<(Rat, OperatorExpr)>),
}

/// A composable graded operator of fixed degree k, sending Ω^p to Ω^{p+k}.
#[derive(Clone, Debug)]
pub struct OperatorExpr {
    chart: Chart,
    degree: i64,
    node: OpNode,
}

impl OperatorExpr {
    /// The exterior derivative d.
    pub fn d(chart: &Chart) -> OperatorExpr {
        OperatorExpr {
            chart: chart.clone(),
            degree: 1,
            node: OpNode::ExtD,
        }
    }

    /// The horizontal homomorphism h* of a connection.
    pub fn h_star(conn: &Connection) -> OperatorExpr {
        OperatorExpr {
            chart: conn.chart().clone(),
            degree: 0,
            node: OpNode::HStar(conn.clone()),
        }
    }

    /// The plain insertion operator i(K); degree-0 K acts by contraction.
    pub fn insert(k: &VectorForm) -> OperatorExpr {
        OperatorExpr {
            chart: k.chart().clone(),
            degree: k.degree() - 1,
            node: OpNode::Insert(k.clone()),
        }
    }

    /// The insertion i^h(K) over the connection's horizontal projection.
    pub fn insert_h(k: &VectorForm, conn: &Connection) -> Result<OperatorExpr> {
        conn.chart().expect_same(k.chart())?;
        if k.degree() < 1 && !k.is_zero() {
            return Err(Error::WrongDegree {
                expected: 1,
                got: k.degree(),
            });
        }
        Ok(OperatorExpr {
            chart: k.chart().clone(),
            degree: k.degree() - 1,
            node: OpNode::InsertH(k.clone(), conn.clone()),
        })
    }

    /// Left wedge multiplication ψ ↦ ω∧ψ.
    pub fn wedge_by(omega: &ScalarForm) -> OperatorExpr {
        OperatorExpr {
            chart: omega.chart().clone(),
            degree: omega.degree(),
            node: OpNode::WedgeBy(omega.clone()),
        }
    }

    /// outer ∘ inner.
    pub fn compose(outer: &OperatorExpr, inner: &OperatorExpr) -> Result<OperatorExpr> {
        outer.chart.expect_same(&inner.chart)?;
        Ok(OperatorExpr {
            chart: outer.chart.clone(),
            degree: outer.degree + inner.degree,
            node: OpNode::Compose(Box::new(outer.clone()), Box::new(inner.clone())),
        })
    }

    /// Weighted sum; all summands must share one degree.
    pub fn sum(
        chart: &Chart,
        degree: i64,
        terms: Vec<(Rat, OperatorExpr)>,
    ) -> Result<OperatorExpr> {
        for (_, t) in &terms {
            chart.expect_same(&t.chart)?;
            if t.degree != degree {
                return Err(Error::WrongDegree {
                    expected: degree,
                    got: t.degree,
                });
            }
        }
        Ok(OperatorExpr {
            chart: chart.clone(),
            degree,
            node: OpNode::Sum(terms),
        })
    }

    pub fn zero(chart: &Chart, degree: i64) -> OperatorExpr {
        OperatorExpr {
            chart: chart.clone(),
            degree,
            node: OpNode::Sum(Vec::new()),
        }
    }

    pub fn scaled(&self, c: &Rat) -> OperatorExpr {
        OperatorExpr {
            chart: self.chart.clone(),
            degree: self.degree,
            node: OpNode::Sum(vec![(c.clone(), self.clone())]),
        }
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn degree(&self) -> i64 {
        self.degree
    }

    /// Exact evaluation of the tree on a scalar form.
    pub fn apply(&self, w: &ScalarForm) -> Result<ScalarForm> {
        self.chart.expect_same(w.chart())?;
        Ok(match &self.node {
            OpNode::ExtD => ext_d(w),
            OpNode::HStar(conn) => conn.h_star(w)?,
            OpNode::Insert(k) => insert(k, w)?,
            OpNode::InsertH(k, conn) => {
                if k.is_zero() {
                    ScalarForm::zero(&self.chart, w.degree() + self.degree)
                } else {
                    insert_h(k, conn.h(), w)?
                }
            }
            OpNode::WedgeBy(omega) => wedge(omega, w)?,
            OpNode::Compose(outer, inner) => outer.apply(&inner.apply(w)?)?,
            OpNode::Sum(terms) => {
                let mut acc = ScalarForm::zero(&self.chart, w.degree() + self.degree);
                for (c, t) in terms {
                    acc = &acc + &t.apply(w)?.scale(c);
                }
                acc
            }
        })
    }

    /// Apply to a tangent-valued form, acting on each scalar part.
    pub fn apply_vv(&self, k: &VectorForm) -> Result<VectorForm> {
        self.chart.expect_same(k.chart())?;
        let degree = k.degree() + self.degree;
        let mut out = VectorForm::zero(&self.chart, degree);
        for j in 0..self.chart.dim() as u8 {
            let part = self.apply(&k.leg(j))?;
            for (tuple, p) in part.terms() {
                out.add_term(tuple, j, p.clone());
            }
        }
        Ok(out)
    }
}

/// [D1, D2] = D1∘D2 − (−1)^{k1·k2} D2∘D1.
pub fn graded_commutator(d1: &OperatorExpr, d2: &OperatorExpr) -> Result<OperatorExpr> {
    let ab = OperatorExpr::compose(d1, d2)?;
    let ba = OperatorExpr::compose(d2, d1)?;
    let sign = if (d1.degree * d2.degree) % 2 == 0 {
        -1
    } else {
        1
    };
    OperatorExpr::sum(
        &d1.chart,
        ab.degree,
        vec![(rat_int(1), ab), (rat_int(sign), ba)],
    )
}

/// The Lie derivation Θ(K) = [i(K), d].
pub fn theta(k: &VectorForm) -> OperatorExpr {
    let d = OperatorExpr::d(k.chart());
    graded_commutator(&OperatorExpr::insert(k), &d).expect("one chart")
}

/// Θ^h(K) = h* ∘ Θ(K) ∘ h*.
pub fn theta_h(k: &VectorForm, conn: &Connection) -> Result<OperatorExpr> {
    conn.chart().expect_same(k.chart())?;
    let hs = OperatorExpr::h_star(conn);
    OperatorExpr::compose(&hs, &OperatorExpr::compose(&theta(k), &hs)?)
}

/// The classical covariant derivative D^h = h* ∘ d.
pub fn cov_big_d(conn: &Connection) -> OperatorExpr {
    OperatorExpr::compose(&OperatorExpr::h_star(conn), &OperatorExpr::d(conn.chart()))
        .expect("one chart")
}

/// The covariant derivative d^h = h* ∘ d ∘ h* = D^h ∘ h* = Θ^h(Id).
pub fn cov_small_d(conn: &Connection) -> OperatorExpr {
    OperatorExpr::compose(&cov_big_d(conn), &OperatorExpr::h_star(conn)).expect("one chart")
}

/// The module action (ω∧D)ψ = ω∧Dψ.
pub fn module_action(omega: &ScalarForm, d: &OperatorExpr) -> Result<OperatorExpr> {
    OperatorExpr::compose(&OperatorExpr::wedge_by(omega), d)
}

/// [K,L]^{∧,h} = i^h(K)L − (−1)^{kl} i^h(L)K for h-equivariant K, L of
/// degrees k+1 and l+1. The insertion acts on each scalar part of the other
/// argument, keeping its output leg.
pub fn hat_bracket(k: &VectorForm, l: &VectorForm, conn: &Connection) -> Result<VectorForm> {
    if !conn.is_h_equivariant(k)? || !conn.is_h_equivariant(l)? {
        return Err(Error::NotEquivariant);
    }
    let kk = k.degree() - 1;
    let ll = l.degree() - 1;
    let a = insert_vv_h(k, conn.h(), l)?;
    let b = insert_vv_h(l, conn.h(), k)?;
    let sign = if (kk * ll) % 2 == 0 { -1 } else { 1 };
    Ok(&a + &b.scale(&rat_int(sign)))
}

// ---------------------------------------------------------------------------
// Operator equality protocol
// ---------------------------------------------------------------------------

/// The separating family operators are compared on: every coordinate
/// function, every coordinate 1-form, and per degree 0..=n three random
/// polynomial forms of coefficient degree ≤ 2.
pub struct TestFamily {
    pub forms: Vec<ScalarForm>,
}

impl TestFamily {
    pub fn standard<R: Rng>(chart: &Chart, rng: &mut R) -> TestFamily {
        let mut forms = Vec::new();
        for i in 0..chart.dim() {
            forms.push(ScalarForm::coord_fn(chart, i).expect("in range"));
        }
        for i in 0..chart.dim() {
            forms.push(ScalarForm::coord_diff(chart, i).expect("in range"));
        }
        for degree in 0..=chart.dim() {
            for _ in 0..3 {
                forms.push(random_scalar_form(chart, degree, 2, rng));
            }
        }
        TestFamily { forms }
    }

    /// Seedless deterministic variant used inside library routines:
    /// coordinates, coordinate 1-forms, their pairwise products, and the
    /// basis 2-forms.
    pub fn deterministic(chart: &Chart) -> TestFamily {
        let n = chart.dim();
        let mut forms = Vec::new();
        for i in 0..n {
            forms.push(ScalarForm::coord_fn(chart, i).expect("in range"));
        }
        for i in 0..n {
            forms.push(ScalarForm::coord_diff(chart, i).expect("in range"));
        }
        for i in 0..n {
            let xi = ScalarForm::coord_fn(chart, i).expect("in range");
            for j in 0..n {
                let dxj = ScalarForm::coord_diff(chart, j).expect("in range");
                forms.push(wedge(&xi, &dxj).expect("one chart"));
            }
        }
        for tuple in increasing_tuples(n, 2) {
            let a = ScalarForm::coord_diff(chart, tuple[0] as usize).expect("in range");
            let b = ScalarForm::coord_diff(chart, tuple[1] as usize).expect("in range");
            forms.push(wedge(&a, &b).expect("one chart"));
        }
        if n >= 3 {
            let x0 = ScalarForm::coord_fn(chart, 0).expect("in range");
            let d1 = ScalarForm::coord_diff(chart, 1).expect("in range");
            let d2 = ScalarForm::coord_diff(chart, 2).expect("in range");
            let w = wedge(&wedge(&x0, &d1).expect("one chart"), &d2).expect("one chart");
            forms.push(w);
        }
        TestFamily { forms }
    }
}

/// First test form where the two operators disagree, with the residual.
pub fn first_mismatch(
    a: &OperatorExpr,
    b: &OperatorExpr,
    fam: &TestFamily,
) -> Result<Option<(i64, ScalarForm)>> {
    for w in &fam.forms {
        let ra = a.apply(w)?;
        let rb = b.apply(w)?;
        let residual = &ra - &rb;
        if !residual.is_zero() {
            return Ok(Some((w.degree(), residual)));
        }
    }
    Ok(None)
}

pub fn operators_agree(a: &OperatorExpr, b: &OperatorExpr, fam: &TestFamily) -> Result<bool> {
    Ok(first_mismatch(a, b, fam)?.is_none())
}

// ---------------------------------------------------------------------------
// Decomposition of derivations over h*
// ---------------------------------------------------------------------------

fn check_derivation_over_h(d: &OperatorExpr, conn: &Connection) -> Result<()> {
    let chart = d.chart();
    let k = d.degree();
    let mut probes = Vec::new();
    for i in 0..chart.dim() {
        probes.push(ScalarForm::coord_fn(chart, i)?);
        probes.push(ScalarForm::coord_diff(chart, i)?);
    }
    for a in &probes {
        for b in &probes {
            let ab = wedge(a, b)?;
            let lhs = d.apply(&ab)?;
            let da_hb = wedge(&d.apply(a)?, &conn.h_star(b)?)?;
            let ha_db = wedge(&conn.h_star(a)?, &d.apply(b)?)?;
            let sign = if (k * a.degree()) % 2 == 0 { 1 } else { -1 };
            let rhs = &da_hb + &ha_db.scale(&rat_int(sign));
            if lhs != rhs {
                return Err(Error::DerivationCheckFailed(format!(
                    "Leibniz over h* fails on degrees ({}, {})",
                    a.degree(),
                    b.degree()
                )));
            }
        }
    }
    Ok(())
}

/// Extract the unique K ∈ Ω^k(U;TU) with Df = df∘K on functions.
fn extract_k(d: &OperatorExpr) -> Result<VectorForm> {
    let chart = d.chart().clone();
    let n = chart.dim();
    let k = d.degree();
    let mut out = VectorForm::zero(&chart, k);
    if k < 0 || k > n as i64 {
        return Ok(out);
    }
    for j in 0..n {
        let df = d.apply(&ScalarForm::coord_fn(&chart, j)?)?;
        for (tuple, p) in df.terms() {
            out.add_term(tuple, j as u8, p.clone());
        }
    }
    Ok(out)
}

/// Extract L from an algebraic derivation A = i^h(L) via A(dx^i) = dx^i ∘ L.
fn extract_l(a: &OperatorExpr) -> Result<VectorForm> {
    let chart = a.chart().clone();
    let n = chart.dim();
    let ldeg = a.degree() + 1;
    let mut out = VectorForm::zero(&chart, ldeg);
    if ldeg < 0 || ldeg > n as i64 {
        return Ok(out);
    }
    for i in 0..n {
        let adx = a.apply(&ScalarForm::coord_diff(&chart, i)?)?;
        for (tuple, p) in adx.terms() {
            out.add_term(tuple, i as u8, p.clone());
        }
    }
    Ok(out)
}

/// Split a derivation over h* as D = Θ(K)∘h* + i^h(L) with unique K, L.
pub fn decompose(d: &OperatorExpr, conn: &Connection) -> Result<(VectorForm, VectorForm)> {
    conn.chart().expect_same(d.chart())?;
    check_derivation_over_h(d, conn)?;
    let k = extract_k(d)?;
    let hs = OperatorExpr::h_star(conn);
    let theta_k_hs = OperatorExpr::compose(&theta(&k), &hs)?;
    let algebraic = OperatorExpr::sum(
        d.chart(),
        d.degree(),
        vec![(rat_int(1), d.clone()), (rat_int(-1), theta_k_hs.clone())],
    )?;
    // the remainder must vanish on functions
    let chart = d.chart().clone();
    for i in 0..chart.dim() {
        let f = ScalarForm::coord_fn(&chart, i)?;
        if !algebraic.apply(&f)?.is_zero() {
            return Err(Error::ExtractionInconsistent(format!(
                "remainder acts on the coordinate function {}",
                chart.name(i)
            )));
        }
    }
    let l = extract_l(&algebraic)?;
    let rebuilt = OperatorExpr::sum(
        &chart,
        d.degree(),
        vec![
            (rat_int(1), theta_k_hs),
            (rat_int(1), OperatorExpr::insert_h(&l, conn)?),
        ],
    )?;
    let fam = TestFamily::deterministic(&chart);
    if let Some((deg, _)) = first_mismatch(d, &rebuilt, &fam)? {
        return Err(Error::ExtractionInconsistent(format!(
            "reconstruction disagrees on a degree-{deg} test form"
        )));
    }
    Ok((k, l))
}

/// Split a derivation commuting with h* as D = Θ^h(K) + i^h(L̃) with K
/// horizontal in its arguments and L̃ h-equivariant.
pub fn decompose_h(d: &OperatorExpr, conn: &Connection) -> Result<(VectorForm, VectorForm)> {
    conn.chart().expect_same(d.chart())?;
    let chart = d.chart().clone();
    let hs = OperatorExpr::h_star(conn);
    let fam = TestFamily::deterministic(&chart);
    let comm = graded_commutator(d, &hs)?;
    for w in &fam.forms {
        if !comm.apply(w)?.is_zero() {
            return Err(Error::NotInDerH(format!(
                "[D, h*] acts on a degree-{} test form",
                w.degree()
            )));
        }
    }
    let k = extract_k(d)?;
    if k.pullback_args(conn.h()) != k {
        return Err(Error::NotInDerH("extracted K is not horizontal".into()));
    }
    let th = theta_h(&k, conn)?;
    let algebraic = OperatorExpr::sum(
        &chart,
        d.degree(),
        vec![(rat_int(1), d.clone()), (rat_int(-1), th.clone())],
    )?;
    let l = extract_l(&algebraic)?;
    if l.degree() >= 1 && !l.is_zero() && !conn.is_h_equivariant(&l)? {
        return Err(Error::NotInDerH("extracted L is not h-equivariant".into()));
    }
    let rebuilt = OperatorExpr::sum(
        &chart,
        d.degree(),
        vec![
            (rat_int(1), th),
            (rat_int(1), OperatorExpr::insert_h(&l, conn)?),
        ],
    )?;
    if let Some((deg, _)) = first_mismatch(d, &rebuilt, &fam)? {
        return Err(Error::ExtractionInconsistent(format!(
            "reconstruction disagrees on a degree-{deg} test form"
        )));
    }
    Ok((k, l))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Poly;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn chart3() -> Chart {
        Chart::new(["x", "y", "z"]).unwrap()
    }

    fn conn_a(c: &Chart) -> Connection {
        Connection::curved_rank1(c).unwrap()
    }

    fn p(c: &Chart, s: &str) -> Poly {
        Poly::parse(c, s).unwrap()
    }

    fn x_dy(c: &Chart) -> ScalarForm {
        let mut f = ScalarForm::zero(c, 1);
        f.add_term(&[1], p(c, "x"));
        f
    }

    #[test]
    fn apply_examples() {
        let c = chart3();
        let conn = conn_a(&c);
        let d = OperatorExpr::d(&c);
        let dxy = d.apply(&ScalarForm::from_poly(p(&c, "x y"))).unwrap();
        assert_eq!(dxy.component(&[0]), p(&c, "y"));
        assert_eq!(dxy.component(&[1]), p(&c, "x"));

        let hs = OperatorExpr::h_star(&conn);
        let dz = ScalarForm::coord_diff(&c, 2).unwrap();
        assert_eq!(hs.apply(&dz).unwrap(), x_dy(&c));

        let hd = OperatorExpr::compose(&hs, &d).unwrap();
        let z = ScalarForm::coord_fn(&c, 2).unwrap();
        assert_eq!(hd.apply(&z).unwrap(), x_dy(&c));
    }

    #[test]
    fn commutator_of_d_with_itself_annihilates() {
        let c = chart3();
        let d = OperatorExpr::d(&c);
        let dd = graded_commutator(&d, &d).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let fam = TestFamily::standard(&c, &mut rng);
        for w in &fam.forms {
            assert!(dd.apply(w).unwrap().is_zero());
        }
    }

    #[test]
    fn commutator_of_insert_with_d_is_theta() {
        let c = chart3();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for deg in 1..=2usize {
            let k = crate::gen::random_vector_form(&c, deg, 2, &mut rng);
            let com = graded_commutator(&OperatorExpr::insert(&k), &OperatorExpr::d(&c)).unwrap();
            let th = theta(&k);
            for fdeg in 0..=3usize {
                let w = crate::gen::random_scalar_form(&c, fdeg, 2, &mut rng);
                let a = com.apply(&w).unwrap();
                assert_eq!(a, th.apply(&w).unwrap());
                assert_eq!(a, crate::form::theta_apply(&k, &w).unwrap());
            }
        }
    }

    #[test]
    fn theta_h_of_h_closes_on_twice_theta_h_of_curvature() {
        let c = chart3();
        let conn = conn_a(&c);
        let th = theta_h(conn.h(), &conn).unwrap();
        let lhs = graded_commutator(&th, &th).unwrap();
        let rhs = theta_h(&conn.curvature(), &conn)
            .unwrap()
            .scaled(&rat_int(2));
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let fam = TestFamily::standard(&c, &mut rng);
        assert!(operators_agree(&lhs, &rhs, &fam).unwrap());
    }

    #[test]
    fn insert_h_examples() {
        let c = chart3();
        let conn = conn_a(&c);
        let dz = ScalarForm::coord_diff(&c, 2).unwrap();

        let ir = OperatorExpr::insert_h(&conn.curvature(), &conn).unwrap();
        let dxdy = wedge(
            &ScalarForm::coord_diff(&c, 0).unwrap(),
            &ScalarForm::coord_diff(&c, 1).unwrap(),
        )
        .unwrap();
        assert_eq!(ir.apply(&dz).unwrap(), dxdy);

        let iphi = OperatorExpr::insert_h(conn.phi(), &conn).unwrap();
        let expected = &dz - &x_dy(&c); // dz ∘ φ
        assert_eq!(iphi.apply(&dz).unwrap(), expected);

        let f = ScalarForm::from_poly(p(&c, "x^2 - y z"));
        assert!(iphi.apply(&f).unwrap().is_zero());
    }

    #[test]
    fn theta_on_functions_is_the_directional_derivative() {
        let c = chart3();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x = crate::gen::random_vector_form(&c, 0, 2, &mut rng);
        let f = p(&c, "x y^2 + 3 z");
        let tf = theta(&x).apply(&ScalarForm::from_poly(f.clone())).unwrap();
        let mut expected = Poly::zero(&c);
        for i in 0..3 {
            expected = &expected + &(&x.component(&[], i as u8) * &f.partial(i).unwrap());
        }
        assert_eq!(tf.as_poly().unwrap(), expected);
    }

    #[test]
    fn theta_of_identity_is_d_and_commutes_with_d() {
        let c = chart3();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let fam = TestFamily::standard(&c, &mut rng);
        let tid = theta(&VectorForm::identity(&c));
        assert!(operators_agree(&tid, &OperatorExpr::d(&c), &fam).unwrap());

        let k = crate::gen::random_vector_form(&c, 2, 2, &mut rng);
        let com = graded_commutator(&theta(&k), &OperatorExpr::d(&c)).unwrap();
        for w in &fam.forms {
            assert!(com.apply(w).unwrap().is_zero());
        }
    }

    #[test]
    fn theta_h_examples() {
        let c = chart3();
        let conn = conn_a(&c);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let fam = TestFamily::standard(&c, &mut rng);

        let t_phi = theta_h(conn.phi(), &conn).unwrap();
        for w in &fam.forms {
            assert!(t_phi.apply(w).unwrap().is_zero(), "theta_h(phi) != 0");
        }

        let t_id = theta_h(&VectorForm::identity(&c), &conn).unwrap();
        assert!(operators_agree(&t_id, &cov_small_d(&conn), &fam).unwrap());

        let t_rbar = theta_h(&conn.cocurvature(), &conn).unwrap();
        for w in &fam.forms {
            assert!(t_rbar.apply(w).unwrap().is_zero(), "theta_h(Rbar) != 0");
        }
    }

    #[test]
    fn covariant_derivative_worked_values() {
        let c = chart3();
        let conn = conn_a(&c);
        let dh = cov_big_d(&conn);
        let dsh = cov_small_d(&conn);
        let z = ScalarForm::coord_fn(&c, 2).unwrap();
        let dz = ScalarForm::coord_diff(&c, 2).unwrap();
        let dxdy = wedge(
            &ScalarForm::coord_diff(&c, 0).unwrap(),
            &ScalarForm::coord_diff(&c, 1).unwrap(),
        )
        .unwrap();

        assert_eq!(dh.apply(&z).unwrap(), x_dy(&c));
        assert_eq!(dsh.apply(&dz).unwrap(), dxdy);
        assert!(dh.apply(&dz).unwrap().is_zero());

        let diff = &dsh.apply(&dz).unwrap() - &dh.apply(&dz).unwrap();
        let ir = OperatorExpr::insert_h(&conn.curvature(), &conn).unwrap();
        assert_eq!(diff, ir.apply(&dz).unwrap());

        // horizontal forms see no difference
        let w = x_dy(&c);
        assert_eq!(dh.apply(&w).unwrap(), dsh.apply(&w).unwrap());
    }

    #[test]
    fn decompose_bracket_of_d_with_h_star() {
        let c = chart3();
        let conn = conn_a(&c);
        let com = graded_commutator(&OperatorExpr::d(&c), &OperatorExpr::h_star(&conn)).unwrap();
        let (k, l) = decompose(&com, &conn).unwrap();
        assert_eq!(k, *conn.phi());
        assert_eq!(l, &conn.curvature() + &conn.cocurvature());
    }

    #[test]
    fn decompose_algebraic_and_lie_parts_roundtrip() {
        let c = chart3();
        let conn = conn_a(&c);
        let mut rng = ChaCha8Rng::seed_from_u64(14);

        let l0 = crate::gen::random_vector_form(&c, 2, 2, &mut rng);
        let (k, l) = decompose(&OperatorExpr::insert_h(&l0, &conn).unwrap(), &conn).unwrap();
        assert!(k.is_zero());
        assert_eq!(l, l0);

        let x = crate::gen::random_vector_form(&c, 0, 2, &mut rng);
        let d = OperatorExpr::compose(&theta(&x), &OperatorExpr::h_star(&conn)).unwrap();
        let (k, l) = decompose(&d, &conn).unwrap();
        assert_eq!(k, x);
        assert!(l.is_zero());
    }

    #[test]
    fn decompose_rejects_non_derivations() {
        let c = chart3();
        let conn = conn_a(&c);
        // wedge multiplication by a 1-form is not a derivation over h*
        let w = OperatorExpr::wedge_by(&ScalarForm::coord_diff(&c, 0).unwrap());
        assert!(matches!(
            decompose(&w, &conn),
            Err(Error::DerivationCheckFailed(_))
        ));
    }

    #[test]
    fn decompose_h_of_cov_small_d_extracts_h() {
        let c = chart3();
        let conn = conn_a(&c);
        let (k, _l) = decompose_h(&cov_small_d(&conn), &conn).unwrap();
        assert_eq!(k, *conn.h());
    }

    #[test]
    fn decompose_h_roundtrip_and_zero() {
        let c = chart3();
        let conn = conn_a(&c);
        let mut rng = ChaCha8Rng::seed_from_u64(16);

        let k0 = crate::gen::random_vector_form(&c, 1, 2, &mut rng).pullback_args(conn.h());
        let l0raw = crate::gen::random_vector_form(&c, 2, 2, &mut rng);
        let l0 = l0raw.apply_matrix(conn.h()).pullback_args(conn.h());
        assert!(conn.is_h_equivariant(&l0).unwrap());
        let d = OperatorExpr::sum(
            &c,
            1,
            vec![
                (rat_int(1), theta_h(&k0, &conn).unwrap()),
                (rat_int(1), OperatorExpr::insert_h(&l0, &conn).unwrap()),
            ],
        )
        .unwrap();
        let (k, l) = decompose_h(&d, &conn).unwrap();
        assert_eq!(k, k0);
        assert_eq!(l, l0);

        let (k, l) = decompose_h(&OperatorExpr::zero(&c, 1), &conn).unwrap();
        assert!(k.is_zero());
        assert!(l.is_zero());
    }

    #[test]
    fn decompose_h_rejects_operators_outside_der_h() {
        let c = chart3();
        let conn = conn_a(&c);
        // D^h is a derivation over h* but does not commute with h*
        assert!(matches!(
            decompose_h(&cov_big_d(&conn), &conn),
            Err(Error::NotInDerH(_))
        ));
    }

    #[test]
    fn hat_bracket_examples() {
        let c = chart3();
        let conn = conn_a(&c);
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        let fam = TestFamily::standard(&c, &mut rng);

        // i^h([h,h]^{∧,h}) = [i^h(h), i^h(h)] as operators
        let hh = hat_bracket(conn.h(), conn.h(), &conn).unwrap();
        let lhs = OperatorExpr::insert_h(&hh, &conn).unwrap();
        let ih = OperatorExpr::insert_h(conn.h(), &conn).unwrap();
        let rhs = graded_commutator(&ih, &ih).unwrap();
        assert!(operators_agree(&lhs, &rhs, &fam).unwrap());

        // with the identity connection the hat bracket is the plain one
        let id_conn = Connection::new(&c, &vec![vec![Poly::zero(&c); 3]; 3]).unwrap();
        let k = crate::gen::random_vector_form(&c, 1, 2, &mut rng);
        let l = crate::gen::random_vector_form(&c, 2, 2, &mut rng);
        assert_eq!(
            hat_bracket(&k, &l, &id_conn).unwrap(),
            crate::form::alg_bracket(&k, &l).unwrap()
        );

        // equivariant inputs give an equivariant output
        let ke = k.apply_matrix(conn.h()).pullback_args(conn.h());
        let le = l.apply_matrix(conn.h()).pullback_args(conn.h());
        if !ke.is_zero() && !le.is_zero() {
            let out = hat_bracket(&ke, &le, &conn).unwrap();
            if !out.is_zero() {
                assert!(conn.is_h_equivariant(&out).unwrap());
            }
        }

        // the curvature is not h-equivariant, so it is rejected
        assert!(matches!(
            hat_bracket(&conn.curvature(), conn.h(), &conn),
            Err(Error::NotEquivariant)
        ));
    }

    #[test]
    fn module_action_unit() {
        let c = chart3();
        let conn = conn_a(&c);
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let fam = TestFamily::standard(&c, &mut rng);
        let one = ScalarForm::from_poly(Poly::one(&c));
        let d = OperatorExpr::compose(&OperatorExpr::h_star(&conn), &OperatorExpr::d(&c)).unwrap();
        let wrapped = module_action(&one, &d).unwrap();
        assert!(operators_agree(&wrapped, &d, &fam).unwrap());
    }
}
