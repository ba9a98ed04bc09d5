//! Reduction of product moments ∫₀^∞ yⁿ φ^(b)(y) (d/dy)^c[φ(−ay)] dy.
//!
//! Both factors are Laplace-type integrals over u₁, u₂, so the moment equals
//! n! ⟨u₁^b (−a u₂)^c D^(−n−1)⟩ with D = a u₂ − u₁. Writing v₁ = u₁, v₂ = u₂,
//! the rewrite system acts on symbols ⟨v₂^k D^m⟩:
//!
//! * m ≥ 0: expand (a v₂ − v₁)^m and evaluate ⟨v₁^i v₂^j⟩ = φ^(i)(0) φ^(j)(0),
//!   lowering derivative orders ≥ p−1 with the ODE at y = 0.
//! * m ≤ −2: integrate by parts in y (one power of D).
//! * m = −1, k ≥ p−1: use the ODE on the second factor.
//!
//! Irreducibles are ⟨v₂^k D^(−1)⟩ with k ≤ p−2. Each rule strictly lowers
//! (−m, k) lexicographically, so every order of application terminates.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::airy::{AiryFamily, KernelMode};
use crate::error::{Error, Result};
use crate::ratfunc::RatA;
use crate::scalar::ExactScalar;
use crate::{binom, factorial, qi, Q};

/// ∫₀^∞ yⁿ φ^(b)(y) (d/dy)^c[φ(−ay)] dy. The derivative on the second factor
/// is taken with respect to y, so it carries (−a)^c.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MomentSymbol {
    pub n: u32,
    pub b: u32,
    pub c: u32,
    pub p: u32,
}

impl MomentSymbol {
    pub fn new(p: u32, n: u32, b: u32, c: u32) -> Self {
        MomentSymbol { n, b, c, p }
    }

    pub fn is_canonical(&self) -> bool {
        self.b + 2 <= self.p && self.c + 2 <= self.p
    }

    /// One ODE substitution on whichever factor carries an order ≥ p−1.
    /// Contour kernel only: the real kernel's constant would leave a
    /// single-factor moment that is not a symbol of this type.
    pub fn ode_step(&self, fam: &AiryFamily) -> Result<Option<Vec<(RatA, MomentSymbol)>>> {
        let p = self.p;
        if fam.p != p {
            return Err(Error::Usage(format!("family p = {} but symbol p = {p}", fam.p)));
        }
        if fam.mode != KernelMode::Contour {
            return Err(Error::Domain("ode_step needs the homogeneous (contour) kernel".into()));
        }
        let mut out = Vec::new();
        if let Some(rule) = crate::airy::ode_rewrite(fam, self.b) {
            for (&(k, i), c) in &rule.terms {
                out.push((RatA::constant(p, c.clone()), MomentSymbol::new(p, self.n + k, i, self.c)));
            }
            return Ok(Some(out));
        }
        if let Some(rule) = crate::airy::ode_rewrite(fam, self.c) {
            // (d/dy)^c φ(−ay) = (−a)^c φ^(c)(−ay); φ^(c)(x) = Σ x^k φ^(i)(x) with x = −ay,
            // and φ^(i)(−ay) = (−a)^(−i) (d/dy)^i φ(−ay).
            for (&(k, i), c) in &rule.terms {
                let e = self.c as i64 + k as i64 - i as i64;
                let sign = if e.rem_euclid(2) == 0 { Q::one() } else { -Q::one() };
                out.push((RatA::monomial(p, c * sign, e), MomentSymbol::new(p, self.n + k, self.b, i)));
            }
            return Ok(Some(out));
        }
        Ok(None)
    }
}

impl fmt::Display for MomentSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "M[p={}](n={}, b={}, c={})", self.p, self.n, self.b, self.c)
    }
}

/// Terms proportional to the inhomogeneous ODE constant (real kernel).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OdeTerm {
    /// Boundary term of an integration by parts in u: c₀ ∫ u^k e^(−u^p/p) du,
    /// kept formal (k may be negative).
    Edge(i64),
    /// c₀ φ^(i)(0)
    Mixed(u32),
    /// c₀²
    Square,
}

impl fmt::Display for OdeTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OdeTerm::Edge(k) => write!(f, "C*Edge({k})"),
            OdeTerm::Mixed(i) => write!(f, "C*phi{i}(0)"),
            OdeTerm::Square => write!(f, "C^2"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReductionResult {
    pub p: u32,
    /// (i, j) with i ≤ j → coefficient of φ^(i)(0) φ^(j)(0)
    pub boundary: BTreeMap<(u32, u32), RatA>,
    /// irreducible symbol (n = 0, b = 0, c = k) → coefficient
    pub irreducible: BTreeMap<MomentSymbol, RatA>,
    pub ode_constant: BTreeMap<OdeTerm, RatA>,
}

fn add_into<K: Ord + Clone>(map: &mut BTreeMap<K, RatA>, k: K, v: &RatA) {
    if v.is_zero() {
        return;
    }
    let e = map.entry(k.clone()).or_insert_with(|| RatA::zero(v.p()));
    e.add_assign(v);
    e.normalize();
    if e.is_zero() {
        map.remove(&k);
    }
}

impl ReductionResult {
    pub fn zero(p: u32) -> Self {
        ReductionResult { p, boundary: BTreeMap::new(), irreducible: BTreeMap::new(), ode_constant: BTreeMap::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.boundary.is_empty() && self.irreducible.is_empty() && self.ode_constant.is_empty()
    }

    pub fn add_boundary(&mut self, i: u32, j: u32, v: &RatA) {
        add_into(&mut self.boundary, (i.min(j), i.max(j)), v);
    }

    /// self += f · o
    pub fn add_scaled(&mut self, o: &ReductionResult, f: &RatA) {
        for (k, v) in &o.boundary {
            add_into(&mut self.boundary, *k, &v.mul(f));
        }
        for (k, v) in &o.irreducible {
            add_into(&mut self.irreducible, *k, &v.mul(f));
        }
        for (k, v) in &o.ode_constant {
            add_into(&mut self.ode_constant, *k, &v.mul(f));
        }
    }

    pub fn scaled(&self, f: &RatA) -> ReductionResult {
        let mut out = ReductionResult::zero(self.p);
        out.add_scaled(self, f);
        out
    }

    /// Exact equality of all coefficients as rational functions of a.
    pub fn equals(&self, o: &ReductionResult) -> bool {
        let mut d = self.clone();
        d.add_scaled(o, &RatA::constant(self.p, -Q::one()));
        d.is_zero()
    }

    /// Numerical value at a, given φ^(k)(0) and the irreducible integrals.
    /// Ignores ODE-constant terms (zero for the contour kernel).
    pub fn eval(&self, a: f64, phi0: &dyn Fn(u32) -> f64, irreducible: &dyn Fn(&MomentSymbol) -> f64) -> f64 {
        let mut acc = 0.0;
        for (&(i, j), c) in &self.boundary {
            acc += c.eval(a) * phi0(i) * phi0(j);
        }
        for (s, c) in &self.irreducible {
            acc += c.eval(a) * irreducible(s);
        }
        acc
    }

    /// One line per term, stable order.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for ((i, j), c) in &self.boundary {
            s.push_str(&format!("phi{i}(0)*phi{j}(0): {c}\n"));
        }
        for (m, c) in &self.irreducible {
            s.push_str(&format!("{m}: {c}\n"));
        }
        for (k, c) in &self.ode_constant {
            s.push_str(&format!("{k}: {c}\n"));
        }
        s
    }
}

impl fmt::Display for ReductionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.dump())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RuleOrder {
    /// Highest (−m, k) first.
    Canonical,
    /// Uniformly random pending symbol, seeded.
    Random(u64),
}

/// Rewrite engine for one family. Results are memoized; the memo is shared
/// across threads.
pub struct Reducer {
    fam: AiryFamily,
    order: RuleOrder,
    step_limit: usize,
    memo: Mutex<HashMap<MomentSymbol, Arc<ReductionResult>>>,
}

type Work = BTreeMap<(i64, i64), RatA>;

impl Reducer {
    pub fn new(fam: AiryFamily) -> Self {
        Self::with_order(fam, RuleOrder::Canonical)
    }

    pub fn with_order(fam: AiryFamily, order: RuleOrder) -> Self {
        Reducer { fam, order, step_limit: 5_000_000, memo: Mutex::new(HashMap::new()) }
    }

    pub fn family(&self) -> &AiryFamily {
        &self.fam
    }

    pub fn set_step_limit(&mut self, n: usize) {
        self.step_limit = n;
    }

    pub fn reduce(&self, m: &MomentSymbol) -> Result<Arc<ReductionResult>> {
        if m.p != self.fam.p {
            return Err(Error::Usage(format!("symbol p = {} but reducer p = {}", m.p, self.fam.p)));
        }
        if let Some(r) = self.memo.lock().expect("memo poisoned").get(m) {
            return Ok(r.clone());
        }
        let r = Arc::new(self.reduce_uncached(m)?);
        let mut memo = self.memo.lock().expect("memo poisoned");
        Ok(memo.entry(*m).or_insert(r).clone())
    }

    fn reduce_uncached(&self, m: &MomentSymbol) -> Result<ReductionResult> {
        let p = self.fam.p;
        let nf = Q::from(factorial(m.n as u64));
        let mut work: Work = BTreeMap::new();
        for i in 0..=m.b {
            let mut c = &nf * Q::from(binom(m.b as u64, i as u64));
            if i % 2 == 1 {
                c = -c;
            }
            let key = ((m.b - i + m.c) as i64, i as i64 - m.n as i64 - 1);
            push(&mut work, key, RatA::monomial(p, c, (m.b - i) as i64));
        }
        let mut out = self.run(work)?;
        // second-factor y-derivatives: (−a)^c
        let sign = if m.c % 2 == 0 { Q::one() } else { -Q::one() };
        out = out.scaled(&RatA::monomial(p, sign, m.c as i64));
        Ok(out)
    }

    fn run(&self, mut work: Work) -> Result<ReductionResult> {
        let p = self.fam.p as i64;
        let c0 = qi(self.fam.ode_constant());
        let mut out = ReductionResult::zero(self.fam.p);
        let mut rng = match self.order {
            RuleOrder::Random(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
            RuleOrder::Canonical => None,
        };
        let mut steps = 0usize;
        let mut trace: Vec<(i64, i64)> = Vec::new();
        while !work.is_empty() {
            steps += 1;
            let key = match rng.as_mut() {
                None => *work.keys().max_by_key(|(k, m)| (-*m, *k)).expect("nonempty"),
                Some(r) => *work.keys().nth(r.random_range(0..work.len())).expect("nonempty"),
            };
            if steps > self.step_limit {
                trace.push(key);
                return Err(Error::Internal(format!(
                    "reduction did not terminate after {} steps; last symbols {:?}",
                    self.step_limit, trace
                )));
            }
            if trace.len() == 8 {
                trace.remove(0);
            }
            trace.push(key);
            let c = work.remove(&key).expect("present");
            if c.is_zero() {
                continue;
            }
            let (k, m) = key;
            if m >= 0 {
                for i in 0..=m {
                    let mut cc = Q::from(binom(m as u64, i as u64));
                    if i % 2 == 1 {
                        cc = -cc;
                    }
                    let term = c.mul_monomial(&cc, m - i);
                    self.boundary_product(i, k + m - i, &term, &mut out);
                }
                continue;
            }
            let big = -m;
            if big >= 2 {
                let mm = big - 1;
                let inv = Q::new(1.into(), mm.into());
                for i in 0..p {
                    let mut cc = Q::from(binom((p - 1) as u64, i as u64)) * &inv;
                    if i % 2 == 1 {
                        cc = -cc;
                    }
                    push(&mut work, (k + p - 1 - i, i - mm), c.mul_monomial(&cc, p - 1 - i));
                }
                if !c0.is_zero() {
                    let cc = -(&inv * &c0);
                    add_into(&mut out.ode_constant, OdeTerm::Edge(k - mm), &c.mul_monomial(&cc, -mm));
                }
                continue;
            }
            // m = −1
            if k >= p - 1 {
                let kk = k - (p - 1);
                let den = c.div_one_plus(1);
                if kk > 0 {
                    push(&mut work, (kk - 1, -1), den.scale(&qi(kk)));
                }
                for i in 1..p {
                    let mut cc = -Q::from(binom((p - 1) as u64, i as u64));
                    if i % 2 == 1 {
                        cc = -cc;
                    }
                    push(&mut work, (kk + p - 1 - i, i - 1), den.mul_monomial(&cc, p - i));
                }
                if !c0.is_zero() && kk > 0 {
                    add_into(&mut out.ode_constant, OdeTerm::Edge(kk - 1), &den.scale(&c0));
                }
                continue;
            }
            // irreducible ⟨v₂^k D^(−1)⟩ = (−a)^(−k) M(0, 0, k)
            let sign = if k % 2 == 0 { Q::one() } else { -Q::one() };
            let sym = MomentSymbol::new(self.fam.p, 0, 0, k as u32);
            add_into(&mut out.irreducible, sym, &c.mul_monomial(&sign, -k));
        }
        Ok(out)
    }

    /// ⟨v₁^i v₂^j⟩ with derivative orders lowered at y = 0.
    fn boundary_product(&self, i: i64, j: i64, c: &RatA, out: &mut ReductionResult) {
        let l1 = self.lower(i);
        let l2 = self.lower(j);
        for (c1, x) in &l1 {
            for (c2, y) in &l2 {
                let v = c.scale(&(c1 * c2));
                match (x, y) {
                    (Some(x), Some(y)) => out.add_boundary(*x, *y, &v),
                    (Some(x), None) | (None, Some(x)) => add_into(&mut out.ode_constant, OdeTerm::Mixed(*x), &v),
                    (None, None) => add_into(&mut out.ode_constant, OdeTerm::Square, &v),
                }
            }
        }
    }

    /// φ^(i)(0) as Σ c · φ^(k)(0) with k ≤ p−2, None standing for the constant.
    fn lower(&self, i: i64) -> Vec<(Q, Option<u32>)> {
        let p = self.fam.p as i64;
        if i < p - 1 {
            return vec![(Q::one(), Some(i as u32))];
        }
        let r = i - (p - 1);
        if r == 0 {
            let c0 = qi(self.fam.ode_constant());
            return if c0.is_zero() { vec![] } else { vec![(c0, None)] };
        }
        self.lower(r - 1).into_iter().map(|(c, k)| (c * qi(r), k)).collect()
    }
}

fn push(work: &mut Work, key: (i64, i64), v: RatA) {
    if v.is_zero() {
        return;
    }
    match work.get_mut(&key) {
        Some(e) => {
            e.add_assign(&v);
            if e.is_zero() {
                work.remove(&key);
            }
        }
        None => {
            work.insert(key, v);
        }
    }
}

/// One summand of a grade: scalar × rational function of a × moment.
#[derive(Clone, Debug)]
pub struct Contribution {
    pub scalar: ExactScalar,
    pub factor: RatA,
    pub symbol: MomentSymbol,
}

/// Sum of the contributions to one total s-degree, with the boundary part
/// separated from what must cancel.
#[derive(Clone, Debug)]
pub struct GradeAssembly {
    pub p: u32,
    pub genus: u32,
    /// (i, j) → polynomial in a (lowest terms)
    pub boundary: BTreeMap<(u32, u32), RatA>,
    /// ODE-constant terms; they sit only on integer grades
    pub ode_integer: BTreeMap<OdeTerm, RatA>,
    /// largest power of (1 + a^p) left in a boundary denominator
    pub denominator_power: u32,
}

impl GradeAssembly {
    /// Powers of a ≡ 0 or ≡ 2g (mod p) put an integer exponent on s₁ or s₂.
    pub fn is_integer_residue(p: u32, genus: u32, r: i64) -> bool {
        let p = p as i64;
        let r = r.rem_euclid(p);
        r == 0 || r == (2 * genus as i64).rem_euclid(p)
    }
}

/// Reduce and sum every contribution at total s-degree 2g(p+1)/p. Every
/// irreducible coefficient must vanish identically and every ODE-constant
/// coefficient must live on integer grades; otherwise a cancellation error
/// carries the offending coefficient.
pub fn assemble_grade(reducer: &Reducer, genus: u32, contributions: &[Contribution]) -> Result<GradeAssembly> {
    let p = reducer.family().p;
    let mut total = ReductionResult::zero(p);
    for c in contributions {
        let r = c.scalar.as_rational().ok_or_else(|| {
            Error::Usage(format!("contribution scalar {} is not rational; pass it as an outer factor", c.scalar))
        })?;
        let red = reducer.reduce(&c.symbol)?;
        total.add_scaled(&red, &c.factor.scale(&r));
    }
    if let Some((sym, coef)) = total.irreducible.iter().next() {
        return Err(Error::Cancellation(format!("irreducible {sym} keeps coefficient {coef}")));
    }
    for (k, coef) in &total.ode_constant {
        for r in coef.residues_mod_p() {
            if !GradeAssembly::is_integer_residue(p, genus, r) {
                return Err(Error::Cancellation(format!(
                    "ODE constant {k} reaches a fractional grade (a-power residue {r}): {coef}"
                )));
            }
        }
    }
    let denominator_power = total.boundary.values().map(|c| c.denominator_power()).max().unwrap_or(0);
    Ok(GradeAssembly { p, genus, boundary: total.boundary, ode_integer: total.ode_constant, denominator_power })
}

/// Closed forms at p = 3 of ∫φ″(y)φ(−ay)dy and ∫φ′(y)(d/dy)φ(−ay)dy, both
/// multiples of φ(0)φ′(0).
pub fn k2_closed_form() -> (ReductionResult, ReductionResult) {
    let p = 3;
    let mut first = ReductionResult::zero(p);
    // −(1+a)/(1+a³)
    first.add_boundary(0, 1, &RatA::from_poly(p, vec![qi(-1), qi(-1)], 0).div_one_plus(1));
    let mut second = ReductionResult::zero(p);
    // (a − a³)/(1+a³)
    second.add_boundary(0, 1, &RatA::from_poly(p, vec![qi(1), qi(0), qi(-1)], 1).div_one_plus(1));
    (first, second)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::q;

    fn contour(p: u32) -> Reducer {
        Reducer::new(AiryFamily::new(p, KernelMode::Contour).unwrap())
    }

    fn s(n: u32, b: u32, c: u32) -> MomentSymbol {
        MomentSymbol::new(3, n, b, c)
    }

    fn lin(terms: &[(RatA, MomentSymbol)], r: &Reducer) -> ReductionResult {
        let mut acc = ReductionResult::zero(3);
        for (c, m) in terms {
            acc.add_scaled(&r.reduce(m).unwrap(), c);
        }
        acc
    }

    fn a_pow(c: Q, e: i64) -> RatA {
        RatA::monomial(3, c, e)
    }

    #[test]
    fn closed_forms_at_p3() {
        let r = contour(3);
        let (first, second) = k2_closed_form();
        assert!(r.reduce(&s(0, 2, 0)).unwrap().equals(&first));
        assert!(r.reduce(&s(0, 1, 1)).unwrap().equals(&second));
        // first = −φ(0)φ′(0) − second
        let mut rhs = second.scaled(&RatA::constant(3, qi(-1)));
        rhs.add_boundary(0, 1, &RatA::constant(3, qi(-1)));
        assert!(first.equals(&rhs));
        assert_eq!(second.boundary[&(0, 1)].eval(1.0), 0.0);
    }

    #[test]
    fn linear_second_moment_identity() {
        // (1+a³) ∫ y φ″(y) φ(−ay) = φ(0)² + 2 ∫ φ(y) (d/dy)φ(−ay)
        let r = contour(3);
        let lhs = r.reduce(&s(1, 2, 0)).unwrap().scaled(&RatA::one_plus_pow(3, 1));
        let mut rhs = ReductionResult::zero(3);
        rhs.add_boundary(0, 0, &RatA::constant(3, qi(1)));
        rhs.irreducible.insert(s(0, 0, 1), RatA::constant(3, qi(2)));
        assert!(lhs.equals(&rhs), "{lhs}");
    }

    #[test]
    fn ode_pre_step() {
        let fam = AiryFamily::new(3, KernelMode::Contour).unwrap();
        let step = s(1, 2, 0).ode_step(&fam).unwrap().unwrap();
        assert_eq!(step, vec![(RatA::constant(3, qi(1)), s(2, 0, 0))]);
        let r = contour(3);
        for m in [s(1, 2, 0), s(3, 3, 1), s(2, 1, 2), s(0, 0, 4)] {
            let step = m.ode_step(&fam).unwrap().unwrap();
            assert!(r.reduce(&m).unwrap().equals(&lin(&step, &r)), "{m}");
        }
        assert!(s(1, 1, 1).ode_step(&fam).unwrap().is_none());
    }

    #[test]
    fn higher_moment_relations_at_p3() {
        let r = contour(3);
        let j = |n, b, c| r.reduce(&s(n, b, c)).unwrap();
        // ∫y φ(y) φ‴-type pair: M(1,0,3) = a⁻³ ... related by a³ M(1,3,0)
        let lhs = j(1, 3, 0);
        let rhs = j(1, 0, 3).scaled(&a_pow(qi(1), -3));
        assert!(lhs.equals(&rhs));
        // M(7,0,0) = (30 M(3,2,0) + 12 M(5,0,1)) / (1+a³)
        let mut rhs = j(3, 2, 0).scaled(&RatA::constant(3, qi(30)));
        rhs.add_scaled(&j(5, 0, 1), &RatA::constant(3, qi(12)));
        let rhs = rhs.scaled(&RatA::constant(3, qi(1)).div_one_plus(1));
        assert!(j(7, 0, 0).equals(&rhs));
    }

    #[test]
    fn random_orders_agree() {
        for p in 3..6 {
            let fam = AiryFamily::new(p, KernelMode::Real).unwrap();
            let base = Reducer::new(fam);
            for seed in 0..3 {
                let alt = Reducer::with_order(fam, RuleOrder::Random(seed));
                for m in [MomentSymbol::new(p, 5, 1, 0), MomentSymbol::new(p, 3, 0, p - 2), MomentSymbol::new(p, 7, 1, 1)] {
                    assert!(base.reduce(&m).unwrap().equals(&alt.reduce(&m).unwrap()), "p={p} {m}");
                }
            }
        }
    }

    #[test]
    fn step_limit_reports_trace() {
        let mut r = contour(3);
        r.set_step_limit(3);
        match r.reduce(&s(7, 1, 1)) {
            Err(Error::Internal(msg)) => assert!(msg.contains("did not terminate")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn assemble_rejects_leftover_irreducible() {
        let r = contour(3);
        let c = Contribution { scalar: ExactScalar::one(), factor: RatA::constant(3, qi(1)), symbol: s(1, 2, 0) };
        assert!(matches!(assemble_grade(&r, 2, &[c.clone()]), Err(Error::Cancellation(_))));
        // pure boundary contribution passes through unchanged
        let k = Contribution { symbol: s(0, 2, 0), ..c };
        let g = assemble_grade(&r, 2, &[k]).unwrap();
        assert!(g.boundary[&(0, 1)].equals(&k2_closed_form().0.boundary[&(0, 1)]));
        assert_eq!(g.denominator_power, 1);
        let _ = q(1, 2);
    }
}
