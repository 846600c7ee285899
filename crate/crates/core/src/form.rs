//! Differential forms on a chart, scalar valued and tangent-bundle valued.
//!
//! A `ScalarForm` of degree p stores one polynomial per strictly increasing
//! p-tuple of coordinate indices. A `VectorForm` additionally carries an
//! output coordinate per entry (the `∂/∂x_j` leg). Degrees outside `0..=n`
//! are representable only as tagged zero forms; every operation clamps to
//! them instead of failing, mirroring how the calculus treats `Ω^{k}` for
//! k above the chart dimension.

use std::collections::BTreeMap;
use std::fmt;

use crate::chart::Chart;
use crate::error::{Error, Result};
use crate::poly::{rat_int, Poly, Rat};

/// Strictly increasing list of coordinate indices.
pub type IdxTuple = Vec<u8>;

/// All strictly increasing k-tuples out of `0..n`, in lexicographic order.
pub fn increasing_tuples(n: usize, k: usize) -> Vec<IdxTuple> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut cur: IdxTuple = (0..k as u8).collect();
    loop {
        out.push(cur.clone());
        // advance to the next combination
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < (n - k + i) as u8 {
                cur[i] += 1;
                for j in i + 1..k {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Sort indices ascending, returning the permutation sign; None on repeats.
pub fn sort_indices(idx: &[u8]) -> Option<(IdxTuple, i64)> {
    let mut v = idx.to_vec();
    let mut sign = 1i64;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((v, sign))
}

/// Sign of the shuffle putting S before T inside the sorted union S ∪ T.
fn shuffle_sign(s: &[u8], t: &[u8]) -> i64 {
    let mut inversions = 0usize;
    for &a in s {
        for &b in t {
            if a > b {
                inversions += 1;
            }
        }
    }
    if inversions.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

fn sign_rat(s: i64) -> Rat {
    rat_int(s)
}

// ---------------------------------------------------------------------------
// ScalarForm
// ---------------------------------------------------------------------------

/// An element of Ω^p(U): alternating form with exact polynomial coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScalarForm {
    chart: Chart,
    degree: i64,
    terms: BTreeMap<IdxTuple, Poly>,
}

impl ScalarForm {
    /// The zero form of the given nominal degree (any integer is allowed).
    pub fn zero(chart: &Chart, degree: i64) -> ScalarForm {
        ScalarForm {
            chart: chart.clone(),
            degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_poly(p: Poly) -> ScalarForm {
        let chart = p.chart().clone();
        let mut f = ScalarForm::zero(&chart, 0);
        f.add_term(&[], p);
        f
    }

    /// The coordinate function x_i as a 0-form.
    pub fn coord_fn(chart: &Chart, i: usize) -> Result<ScalarForm> {
        Ok(ScalarForm::from_poly(Poly::coord(chart, i)?))
    }

    /// The coordinate 1-form dx_i.
    pub fn coord_diff(chart: &Chart, i: usize) -> Result<ScalarForm> {
        if i >= chart.dim() {
            return Err(Error::IndexOutOfRange {
                index: i,
                dim: chart.dim(),
            });
        }
        let mut f = ScalarForm::zero(chart, 1);
        f.add_term(&[i as u8], Poly::one(chart));
        Ok(f)
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn degree(&self) -> i64 {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn degree_in_range(&self) -> bool {
        0 <= self.degree && self.degree <= self.chart.dim() as i64
    }

    /// Add `p` to the coefficient at `tuple`. Panics on malformed tuples;
    /// these are internal invariants, not user input.
    pub fn add_term(&mut self, tuple: &[u8], p: Poly) {
        if p.is_zero() {
            return;
        }
        assert!(
            self.degree_in_range(),
            "cannot add terms to a clamped zero form"
        );
        assert_eq!(
            tuple.len() as i64,
            self.degree,
            "tuple length must match degree"
        );
        assert!(
            tuple.windows(2).all(|w| w[0] < w[1]),
            "tuple must be strictly increasing"
        );
        assert!(
            tuple.iter().all(|&i| (i as usize) < self.chart.dim()),
            "index out of range"
        );
        use std::collections::btree_map::Entry;
        match self.terms.entry(tuple.to_vec()) {
            Entry::Vacant(v) => {
                v.insert(p);
            }
            Entry::Occupied(mut o) => {
                let sum = o.get() + &p;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn component(&self, tuple: &[u8]) -> Poly {
        self.terms
            .get(tuple)
            .cloned()
            .unwrap_or_else(|| Poly::zero(&self.chart))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&IdxTuple, &Poly)> {
        self.terms.iter()
    }

    /// The unique coefficient of a 0-form as a polynomial.
    pub fn as_poly(&self) -> Option<Poly> {
        if self.degree != 0 {
            return None;
        }
        Some(self.component(&[]))
    }

    pub fn scale(&self, c: &Rat) -> ScalarForm {
        let mut out = ScalarForm::zero(&self.chart, self.degree);
        for (t, p) in &self.terms {
            out.add_term(t, p.scale(c));
        }
        out
    }

    /// Multilinear alternating evaluation on degree-0 vector forms.
    pub fn eval(&self, args: &[VectorForm]) -> Result<Poly> {
        if args.len() as i64 != self.degree {
            return Err(Error::ArityMismatch {
                degree: self.degree,
                args: args.len(),
            });
        }
        for a in args {
            self.chart.expect_same(a.chart())?;
            if a.degree() != 0 {
                return Err(Error::WrongDegree {
                    expected: 0,
                    got: a.degree(),
                });
            }
        }
        let mut total = Poly::zero(&self.chart);
        for (tuple, coeff) in &self.terms {
            // det of the matrix (args[b])^{tuple[a]}
            let mat: Vec<Vec<Poly>> = tuple
                .iter()
                .map(|&i| args.iter().map(|v| v.component(&[], i)).collect())
                .collect();
            total = &total + &(coeff * &det(&self.chart, &mat));
        }
        Ok(total)
    }

    /// Precompose every argument slot with the degree-1 vector form `a`,
    /// i.e. ω ∘ Λa. With a = h this is the horizontal homomorphism h*.
    pub fn pullback_args(&self, a: &VectorForm) -> ScalarForm {
        assert_eq!(a.degree(), 1, "pullback needs a degree-1 form");
        assert_eq!(&self.chart, a.chart());
        if self.degree == 0 {
            return self.clone();
        }
        let n = self.chart.dim();
        let mut out = ScalarForm::zero(&self.chart, self.degree);
        if !self.degree_in_range() {
            return out;
        }
        for tuple in increasing_tuples(n, self.degree as usize) {
            let cols: Vec<VectorForm> =
                tuple.iter().map(|&j| a.matrix_column(j as usize)).collect();
            let v = self.eval(&cols).expect("arity matches by construction");
            out.add_term(&tuple, v);
        }
        out
    }
}

impl std::ops::Add for &ScalarForm {
    type Output = ScalarForm;
    fn add(self, rhs: &ScalarForm) -> ScalarForm {
        assert_eq!(self.chart, rhs.chart, "form charts differ");
        assert_eq!(self.degree, rhs.degree, "form degrees differ");
        let mut out = self.clone();
        for (t, p) in &rhs.terms {
            out.add_term(t, p.clone());
        }
        out
    }
}

impl std::ops::Sub for &ScalarForm {
    type Output = ScalarForm;
    fn sub(self, rhs: &ScalarForm) -> ScalarForm {
        self + &-rhs
    }
}

impl std::ops::Neg for &ScalarForm {
    type Output = ScalarForm;
    fn neg(self) -> ScalarForm {
        self.scale(&rat_int(-1))
    }
}

/// Exact determinant of a small square polynomial matrix.
fn det(chart: &Chart, m: &[Vec<Poly>]) -> Poly {
    let n = m.len();
    match n {
        0 => Poly::one(chart),
        1 => m[0][0].clone(),
        2 => &(&m[0][0] * &m[1][1]) - &(&m[0][1] * &m[1][0]),
        _ => {
            let mut acc = Poly::zero(chart);
            for c in 0..n {
                if m[0][c].is_zero() {
                    continue;
                }
                let minor: Vec<Vec<Poly>> = m[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|&(j, _)| j != c)
                            .map(|(_, p)| p.clone())
                            .collect()
                    })
                    .collect();
                let cof = &m[0][c] * &det(chart, &minor);
                if c % 2 == 0 {
                    acc = &acc + &cof;
                } else {
                    acc = &acc - &cof;
                }
            }
            acc
        }
    }
}

/// Alternating product of scalar forms.
pub fn wedge(a: &ScalarForm, b: &ScalarForm) -> Result<ScalarForm> {
    a.chart().expect_same(b.chart())?;
    let mut out = ScalarForm::zero(a.chart(), a.degree() + b.degree());
    if !out.degree_in_range() {
        return Ok(out);
    }
    for (ta, pa) in a.terms() {
        for (tb, pb) in b.terms() {
            let mut joined = ta.clone();
            joined.extend_from_slice(tb);
            if let Some((sorted, sign)) = sort_indices(&joined) {
                out.add_term(&sorted, (pa * pb).scale(&sign_rat(sign)));
            }
        }
    }
    Ok(out)
}

/// Coordinate exterior derivative.
pub fn ext_d(a: &ScalarForm) -> ScalarForm {
    let chart = a.chart().clone();
    let mut out = ScalarForm::zero(&chart, a.degree() + 1);
    if !out.degree_in_range() {
        return out;
    }
    for (tuple, p) in a.terms() {
        for i in 0..chart.dim() as u8 {
            if tuple.contains(&i) {
                continue;
            }
            let dp = p.partial(i as usize).expect("index in range");
            if dp.is_zero() {
                continue;
            }
            let mut joined = vec![i];
            joined.extend_from_slice(tuple);
            let (sorted, sign) = sort_indices(&joined).expect("no repeats by construction");
            out.add_term(&sorted, dp.scale(&sign_rat(sign)));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// VectorForm
// ---------------------------------------------------------------------------

/// An element of Ω^k(U;TU): alternating form with values in the tangent
/// bundle. Entry ((i_1..i_k), j) is the ∂/∂x_j component on (∂_{i_1},…).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorForm {
    chart: Chart,
    degree: i64,
    terms: BTreeMap<(IdxTuple, u8), Poly>,
}

impl VectorForm {
    pub fn zero(chart: &Chart, degree: i64) -> VectorForm {
        VectorForm {
            chart: chart.clone(),
            degree,
            terms: BTreeMap::new(),
        }
    }

    /// The coordinate vector field ∂/∂x_j as a degree-0 form.
    pub fn coord_field(chart: &Chart, j: usize) -> Result<VectorForm> {
        if j >= chart.dim() {
            return Err(Error::IndexOutOfRange {
                index: j,
                dim: chart.dim(),
            });
        }
        let mut f = VectorForm::zero(chart, 0);
        f.add_term(&[], j as u8, Poly::one(chart));
        Ok(f)
    }

    /// The identity Id = Σ dx_i ⊗ ∂_i, the degree-1 center element.
    pub fn identity(chart: &Chart) -> VectorForm {
        let mut f = VectorForm::zero(chart, 1);
        for i in 0..chart.dim() as u8 {
            f.add_term(&[i], i, Poly::one(chart));
        }
        f
    }

    /// Degree-1 form from an n×n matrix of polynomials; `rows[i][j]` is the
    /// ∂_i component of the image of ∂_j.
    pub fn from_matrix(chart: &Chart, rows: &[Vec<Poly>]) -> Result<VectorForm> {
        let n = chart.dim();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Invalid(format!("matrix must be {n}x{n}")));
        }
        let mut f = VectorForm::zero(chart, 1);
        for (i, row) in rows.iter().enumerate() {
            for (j, p) in row.iter().enumerate() {
                chart.expect_same(p.chart())?;
                f.add_term(&[j as u8], i as u8, p.clone());
            }
        }
        Ok(f)
    }

    /// Matrix view of a degree-1 form: `rows[i][j]` as in `from_matrix`.
    pub fn to_matrix(&self) -> Vec<Vec<Poly>> {
        assert_eq!(self.degree, 1);
        let n = self.chart.dim();
        let mut rows = vec![vec![Poly::zero(&self.chart); n]; n];
        for ((tuple, out), p) in &self.terms {
            rows[*out as usize][tuple[0] as usize] = p.clone();
        }
        rows
    }

    /// Column j of a degree-1 form: the vector field it assigns to ∂_j.
    pub fn matrix_column(&self, j: usize) -> VectorForm {
        assert_eq!(self.degree, 1);
        let mut f = VectorForm::zero(&self.chart, 0);
        for ((tuple, out), p) in &self.terms {
            if tuple[0] as usize == j {
                f.add_term(&[], *out, p.clone());
            }
        }
        f
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn degree(&self) -> i64 {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn degree_in_range(&self) -> bool {
        0 <= self.degree && self.degree <= self.chart.dim() as i64
    }

    pub fn add_term(&mut self, tuple: &[u8], out: u8, p: Poly) {
        if p.is_zero() {
            return;
        }
        assert!(
            self.degree_in_range(),
            "cannot add terms to a clamped zero form"
        );
        assert_eq!(
            tuple.len() as i64,
            self.degree,
            "tuple length must match degree"
        );
        assert!(
            tuple.windows(2).all(|w| w[0] < w[1]),
            "tuple must be strictly increasing"
        );
        assert!(
            (out as usize) < self.chart.dim(),
            "output index out of range"
        );
        use std::collections::btree_map::Entry;
        match self.terms.entry((tuple.to_vec(), out)) {
            Entry::Vacant(v) => {
                v.insert(p);
            }
            Entry::Occupied(mut o) => {
                let sum = o.get() + &p;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn component(&self, tuple: &[u8], out: u8) -> Poly {
        self.terms
            .get(&(tuple.to_vec(), out))
            .cloned()
            .unwrap_or_else(|| Poly::zero(&self.chart))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(IdxTuple, u8), &Poly)> {
        self.terms.iter()
    }

    /// The scalar form multiplying ∂_j.
    pub fn leg(&self, j: u8) -> ScalarForm {
        let mut f = ScalarForm::zero(&self.chart, self.degree);
        for ((tuple, out), p) in &self.terms {
            if *out == j {
                f.add_term(tuple, p.clone());
            }
        }
        f
    }

    /// Rebuild from per-output scalar parts.
    pub fn from_legs(chart: &Chart, degree: i64, legs: &[(u8, ScalarForm)]) -> VectorForm {
        let mut f = VectorForm::zero(chart, degree);
        for (j, s) in legs {
            for (tuple, p) in s.terms() {
                f.add_term(tuple, *j, p.clone());
            }
        }
        f
    }

    pub fn scale(&self, c: &Rat) -> VectorForm {
        let mut out = VectorForm::zero(&self.chart, self.degree);
        for ((t, j), p) in &self.terms {
            out.add_term(t, *j, p.scale(c));
        }
        out
    }

    /// Evaluate on degree-0 vector forms, producing a vector field.
    pub fn eval_fields(&self, args: &[VectorForm]) -> Result<VectorForm> {
        if args.len() as i64 != self.degree {
            return Err(Error::ArityMismatch {
                degree: self.degree,
                args: args.len(),
            });
        }
        let mut out = VectorForm::zero(&self.chart, 0);
        for j in 0..self.chart.dim() as u8 {
            let part = self.leg(j).eval(args)?;
            out.add_term(&[], j, part);
        }
        Ok(out)
    }

    /// Postcompose the output leg with a degree-1 form: a ∘ K.
    pub fn apply_matrix(&self, a: &VectorForm) -> VectorForm {
        assert_eq!(a.degree(), 1);
        assert_eq!(&self.chart, a.chart());
        let mut out = VectorForm::zero(&self.chart, self.degree);
        for ((tuple, m), p) in &self.terms {
            for i in 0..self.chart.dim() as u8 {
                let entry = a.component(&[*m], i);
                if entry.is_zero() {
                    continue;
                }
                out.add_term(tuple, i, &entry * p);
            }
        }
        out
    }

    /// Precompose every argument slot with a degree-1 form: K ∘ Λa.
    pub fn pullback_args(&self, a: &VectorForm) -> VectorForm {
        assert_eq!(a.degree(), 1);
        assert_eq!(&self.chart, a.chart());
        if self.degree == 0 {
            return self.clone();
        }
        let n = self.chart.dim();
        let mut out = VectorForm::zero(&self.chart, self.degree);
        if !self.degree_in_range() {
            return out;
        }
        for tuple in increasing_tuples(n, self.degree as usize) {
            let cols: Vec<VectorForm> =
                tuple.iter().map(|&j| a.matrix_column(j as usize)).collect();
            let v = self
                .eval_fields(&cols)
                .expect("arity matches by construction");
            for j in 0..n as u8 {
                out.add_term(&tuple, j, v.component(&[], j));
            }
        }
        out
    }
}

impl std::ops::Add for &VectorForm {
    type Output = VectorForm;
    fn add(self, rhs: &VectorForm) -> VectorForm {
        assert_eq!(self.chart, rhs.chart, "form charts differ");
        assert_eq!(self.degree, rhs.degree, "form degrees differ");
        let mut out = self.clone();
        for ((t, j), p) in &rhs.terms {
            out.add_term(t, *j, p.clone());
        }
        out
    }
}

impl std::ops::Sub for &VectorForm {
    type Output = VectorForm;
    fn sub(self, rhs: &VectorForm) -> VectorForm {
        self + &-rhs
    }
}

impl std::ops::Neg for &VectorForm {
    type Output = VectorForm;
    fn neg(self) -> VectorForm {
        self.scale(&rat_int(-1))
    }
}

/// Wedge a scalar form onto the form part of a vector form, keeping the leg.
pub fn wedge_sv(a: &ScalarForm, k: &VectorForm) -> Result<VectorForm> {
    a.chart().expect_same(k.chart())?;
    let chart = a.chart().clone();
    let degree = a.degree() + k.degree();
    let mut out = VectorForm::zero(&chart, degree);
    if degree < 0 || degree > chart.dim() as i64 {
        return Ok(out);
    }
    for j in 0..chart.dim() as u8 {
        let part = wedge(a, &k.leg(j))?;
        for (tuple, p) in part.terms() {
            out.add_term(tuple, j, p.clone());
        }
    }
    Ok(out)
}

/// Lie bracket of two vector fields (degree-0 vector forms).
pub fn lie_bracket(x: &VectorForm, y: &VectorForm) -> Result<VectorForm> {
    x.chart().expect_same(y.chart())?;
    if x.degree() != 0 {
        return Err(Error::WrongDegree {
            expected: 0,
            got: x.degree(),
        });
    }
    if y.degree() != 0 {
        return Err(Error::WrongDegree {
            expected: 0,
            got: y.degree(),
        });
    }
    let chart = x.chart().clone();
    let n = chart.dim();
    let mut out = VectorForm::zero(&chart, 0);
    for j in 0..n as u8 {
        let mut comp = Poly::zero(&chart);
        for i in 0..n {
            let xi = x.component(&[], i as u8);
            let yi = y.component(&[], i as u8);
            if !xi.is_zero() {
                comp = &comp + &(&xi * &y.component(&[], j).partial(i).expect("in range"));
            }
            if !yi.is_zero() {
                comp = &comp - &(&yi * &x.component(&[], j).partial(i).expect("in range"));
            }
        }
        out.add_term(&[], j, comp);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Insertion operators
// ---------------------------------------------------------------------------

/// Insertion i(K)ω of a vector valued form into a scalar form.
///
/// For degree-0 K this is the classical contraction; for higher degree it is
/// the alternating shuffle sum, with the identity in the projector slot.
pub fn insert(k: &VectorForm, omega: &ScalarForm) -> Result<ScalarForm> {
    insert_impl(k, None, omega)
}

/// Insertion over a projector: remaining argument slots are precomposed
/// with `h` (a degree-1 form). Requires deg K ≥ 1.
pub fn insert_h(k: &VectorForm, h: &VectorForm, omega: &ScalarForm) -> Result<ScalarForm> {
    if k.degree() < 1 {
        return Err(Error::WrongDegree {
            expected: 1,
            got: k.degree(),
        });
    }
    insert_impl(k, Some(h), omega)
}

fn insert_impl(k: &VectorForm, h: Option<&VectorForm>, omega: &ScalarForm) -> Result<ScalarForm> {
    k.chart().expect_same(omega.chart())?;
    if let Some(h) = h {
        k.chart().expect_same(h.chart())?;
        assert_eq!(h.degree(), 1, "projector must have degree 1");
    }
    let chart = k.chart().clone();
    let n = chart.dim();
    let kd = k.degree(); // form degree of K, ≥ 0
    let p = omega.degree();
    let out_degree = kd - 1 + p;
    let mut out = ScalarForm::zero(&chart, out_degree);
    if p <= 0 || out_degree < 0 || out_degree > n as i64 || omega.is_zero() || k.is_zero() {
        return Ok(out);
    }

    if kd == 0 {
        // classical contraction ω(X, ·, …)
        for tuple in increasing_tuples(n, out_degree as usize) {
            let mut args = vec![k.clone()];
            for &t in &tuple {
                args.push(VectorForm::coord_field(&chart, t as usize)?);
            }
            out.add_term(&tuple, omega.eval(&args)?);
        }
        return Ok(out);
    }

    let hcols: Option<Vec<VectorForm>> = h.map(|h| (0..n).map(|j| h.matrix_column(j)).collect());

    for tuple in increasing_tuples(n, out_degree as usize) {
        let mut total = Poly::zero(&chart);
        // split the tuple into the K block (size kd) and the rest
        for split in increasing_tuples(tuple.len(), kd as usize) {
            let s: IdxTuple = split.iter().map(|&pos| tuple[pos as usize]).collect();
            let t: IdxTuple = (0..tuple.len())
                .filter(|i| !split.contains(&(*i as u8)))
                .map(|i| tuple[i])
                .collect();
            let sign = shuffle_sign(&s, &t);
            // K evaluated on the basis fields of s: direct component lookup
            let mut v = VectorForm::zero(&chart, 0);
            for m in 0..n as u8 {
                v.add_term(&[], m, k.component(&s, m));
            }
            if v.is_zero() {
                continue;
            }
            let mut args = vec![v];
            for &tt in &t {
                match &hcols {
                    Some(cols) => args.push(cols[tt as usize].clone()),
                    None => args.push(VectorForm::coord_field(&chart, tt as usize)?),
                }
            }
            let val = omega.eval(&args)?;
            total = &total + &val.scale(&sign_rat(sign));
        }
        out.add_term(&tuple, total);
    }
    Ok(out)
}

/// i(K) applied to a vector valued form: act on each scalar part, keep legs.
pub fn insert_vv(k: &VectorForm, l: &VectorForm) -> Result<VectorForm> {
    k.chart().expect_same(l.chart())?;
    let chart = k.chart().clone();
    let degree = k.degree() - 1 + l.degree();
    let mut out = VectorForm::zero(&chart, degree);
    for j in 0..chart.dim() as u8 {
        let part = insert(k, &l.leg(j))?;
        for (tuple, p) in part.terms() {
            out.add_term(tuple, j, p.clone());
        }
    }
    Ok(out)
}

/// i^h(K) applied to a vector valued form.
pub fn insert_vv_h(k: &VectorForm, h: &VectorForm, l: &VectorForm) -> Result<VectorForm> {
    k.chart().expect_same(l.chart())?;
    let chart = k.chart().clone();
    let degree = k.degree() - 1 + l.degree();
    let mut out = VectorForm::zero(&chart, degree);
    for j in 0..chart.dim() as u8 {
        let part = insert_h(k, h, &l.leg(j))?;
        for (tuple, p) in part.terms() {
            out.add_term(tuple, j, p.clone());
        }
    }
    Ok(out)
}

/// The algebraic bracket [K,L]^∧ = i(K)L − (−1)^{kl} i(L)K for forms of
/// degree k+1 and l+1.
pub fn alg_bracket(k: &VectorForm, l: &VectorForm) -> Result<VectorForm> {
    if k.degree() < 1 {
        return Err(Error::WrongDegree {
            expected: 1,
            got: k.degree(),
        });
    }
    if l.degree() < 1 {
        return Err(Error::WrongDegree {
            expected: 1,
            got: l.degree(),
        });
    }
    let kk = k.degree() - 1;
    let ll = l.degree() - 1;
    let a = insert_vv(k, l)?;
    let b = insert_vv(l, k)?;
    let sign = if (kk * ll) % 2 == 0 { -1 } else { 1 };
    Ok(&a + &b.scale(&rat_int(sign)))
}

// ---------------------------------------------------------------------------
// Lie derivations and the Frölicher–Nijenhuis bracket
// ---------------------------------------------------------------------------

/// Θ(K)ω = [i(K), d]ω = i(K)dω + (−1)^k d i(K)ω for K of degree k.
pub fn theta_apply(k: &VectorForm, omega: &ScalarForm) -> Result<ScalarForm> {
    let kd = k.degree();
    let a = insert(k, &ext_d(omega))?;
    let b = ext_d(&insert(k, omega)?);
    let sign = if kd % 2 == 0 { 1 } else { -1 };
    Ok(&a + &b.scale(&rat_int(sign)))
}

/// The Frölicher–Nijenhuis bracket, computed by operator extraction: the
/// result M is the unique form with Θ(M) = [Θ(K), Θ(L)], read off by
/// applying the commutator to the coordinate functions.
pub fn fn_bracket(k: &VectorForm, l: &VectorForm) -> Result<VectorForm> {
    k.chart().expect_same(l.chart())?;
    let chart = k.chart().clone();
    let n = chart.dim();
    let (kd, ld) = (k.degree(), l.degree());
    let degree = kd + ld;
    let mut out = VectorForm::zero(&chart, degree);
    if degree > n as i64 {
        return Ok(out);
    }
    if kd == 0 && ld == 0 {
        return lie_bracket(k, l);
    }
    let sign = if (kd * ld) % 2 == 0 { -1 } else { 1 };
    for j in 0..n as u8 {
        let f = ScalarForm::coord_fn(&chart, j as usize)?;
        let a = theta_apply(k, &theta_apply(l, &f)?)?;
        let b = theta_apply(l, &theta_apply(k, &f)?)?;
        let comm = &a + &b.scale(&rat_int(sign));
        for (tuple, p) in comm.terms() {
            out.add_term(tuple, j, p.clone());
        }
    }
    Ok(out)
}

/// Independent oracle for the degree-(1,1) bracket: the displayed two-form
/// formula evaluated literally on coordinate fields.
pub fn fn_bracket_deg1_oracle(k: &VectorForm, l: &VectorForm) -> Result<VectorForm> {
    k.chart().expect_same(l.chart())?;
    if k.degree() != 1 {
        return Err(Error::WrongDegree {
            expected: 1,
            got: k.degree(),
        });
    }
    if l.degree() != 1 {
        return Err(Error::WrongDegree {
            expected: 1,
            got: l.degree(),
        });
    }
    let chart = k.chart().clone();
    let n = chart.dim();
    let mut out = VectorForm::zero(&chart, 2);
    if n < 2 {
        return Ok(out);
    }
    for tuple in increasing_tuples(n, 2) {
        let (a, b) = (tuple[0] as usize, tuple[1] as usize);
        let xa = VectorForm::coord_field(&chart, a)?;
        let xb = VectorForm::coord_field(&chart, b)?;
        let kxa = k.matrix_column(a);
        let kxb = k.matrix_column(b);
        let lxa = l.matrix_column(a);
        let lxb = l.matrix_column(b);

        let mut v = lie_bracket(&kxa, &lxb)?;
        v = &v - &lie_bracket(&kxb, &lxa)?;
        let lk = &lie_bracket(&kxa, &xb)? - &lie_bracket(&kxb, &xa)?;
        v = &v - &lk.apply_matrix(l);
        let ll = &lie_bracket(&lxa, &xb)? - &lie_bracket(&lxb, &xa)?;
        v = &v - &ll.apply_matrix(k);
        let base = lie_bracket(&xa, &xb)?;
        v = &v + &base.apply_matrix(k).apply_matrix(l);
        v = &v + &base.apply_matrix(l).apply_matrix(k);

        for j in 0..n as u8 {
            out.add_term(&tuple, j, v.component(&[], j));
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

fn write_tuple(f: &mut fmt::Formatter<'_>, chart: &Chart, tuple: &[u8]) -> fmt::Result {
    for (pos, &i) in tuple.iter().enumerate() {
        if pos > 0 {
            write!(f, "^")?;
        }
        write!(f, "{}", chart.name(i as usize))?;
    }
    Ok(())
}

impl fmt::Display for ScalarForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (pos, (tuple, p)) in self.terms.iter().enumerate() {
            if pos > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({p})")?;
            if !tuple.is_empty() {
                write!(f, " ")?;
                write_tuple(f, &self.chart, tuple)?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for VectorForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (pos, ((tuple, out), p)) in self.terms.iter().enumerate() {
            if pos > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({p})")?;
            if !tuple.is_empty() {
                write!(f, " ")?;
                write_tuple(f, &self.chart, tuple)?;
            }
            write!(f, " (*) d/{}", self.chart.name(*out as usize))?;
        }
        Ok(())
    }
}
