//! Parameter synthesis for a homogeneous pair on the line and the constraint ledger.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};

use crate::error::{Error, Result};
use crate::fractal::{Grid1D, GridAxis};
use crate::rignum::{Dyadic, DyInterval, PowProduct, Round};

pub const BETA: u64 = 7;

/// Largest `n` or `n′` the synthesis will build.
pub const MAX_GENERATORS: u64 = 1 << 25;

/// Number of refinements `γ/7·(1 − 2^{-m})` tried below the top candidate.
pub const EPS_SEARCH_DEPTH: u32 = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckKind {
    /// One of the original constraints of the construction.
    Boxed,
    /// A member of the simplified sufficient system.
    Simplified,
    /// A consequence re-certified on the built translations.
    Derived,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintCheck {
    pub name: String,
    pub kind: CheckKind,
    pub statement: String,
    pub values: Vec<(String, DyInterval)>,
    /// Exact values, when they are rational.
    pub exact: Vec<(String, BigRational)>,
    pub holds: bool,
}

impl ConstraintCheck {
    fn new(name: &str, kind: CheckKind, statement: &str) -> Self {
        ConstraintCheck {
            name: name.into(),
            kind,
            statement: statement.into(),
            values: Vec::new(),
            exact: Vec::new(),
            holds: true,
        }
    }

    fn val(mut self, label: &str, v: &DyInterval) -> Self {
        self.values.push((label.into(), v.clone()));
        self
    }

    fn exact(mut self, label: &str, p: &PowProduct) -> Self {
        if let Some(q) = p.to_rational() {
            self.exact.push((label.into(), q));
        }
        self
    }

    fn require(mut self, ok: bool) -> Self {
        self.holds &= ok;
        self
    }

    pub fn detail(&self) -> String {
        let vals: Vec<String> = self.values.iter().map(|(k, v)| format!("{k} = {v}")).collect();
        format!("{} [{}]", self.statement, vals.join(", "))
    }
}

impl fmt::Display for ConstraintCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = if self.holds { "ok" } else { "FAILED" };
        write!(f, "{:<24} {:<6} {}", self.name, mark, self.statement)?;
        for (k, v) in &self.values {
            write!(f, "\n    {k} = {v}")?;
        }
        for (k, q) in &self.exact {
            write!(f, "\n    {k} = {q} (exact)")?;
        }
        Ok(())
    }
}

/// `x < y` certified.
fn lt(x: &DyInterval, y: &DyInterval) -> bool {
    x.hi() < y.lo()
}

/// `x ≤ y` certified.
fn le(x: &DyInterval, y: &DyInterval) -> bool {
    x.hi() <= y.lo()
}

fn q(p: i64, d: i64) -> BigRational {
    BigRational::new(p.into(), d.into())
}

fn qi(p: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(p))
}

/// Every quantity of the one-dimensional construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lemma51Params {
    pub gamma: BigRational,
    pub c: u64,
    pub eps: BigRational,
    pub eps_prime: BigRational,
    pub beta: u64,
    pub prec: u32,
    pub ell_exact: PowProduct,
    pub a_exact: PowProduct,
    pub len_i_exact: PowProduct,
    pub len_j_exact: PowProduct,
    pub n: u64,
    pub n_prime: u64,
    pub n_dprime: u64,
    pub ell: DyInterval,
    pub a: DyInterval,
    pub len_i: DyInterval,
    pub len_j: DyInterval,
    pub z0: DyInterval,
    pub w0: DyInterval,
    /// Margin parameter of the right targets; the targets sit `δ·a` inside `I`.
    pub delta: DyInterval,
    pub t: Grid1D,
    pub t_prime: Grid1D,
    pub ledger: Vec<ConstraintCheck>,
}

/// Exact ratio, sizes and fiber before any interval work.
#[derive(Clone, Debug)]
pub struct RawChoice {
    pub gamma: BigRational,
    pub c: u64,
    pub eps: BigRational,
    pub eps_prime: BigRational,
    pub ell: PowProduct,
    pub a: PowProduct,
    pub n: u64,
    pub n_prime: u64,
}

pub(crate) fn check_args(gamma: &BigRational, c: u64, eps: &BigRational) -> Result<()> {
    if !gamma.is_positive() || gamma >= &BigRational::one() {
        return Err(Error::Domain(format!("γ = {gamma} is not in (0, 1)")));
    }
    if c < 2 {
        return Err(Error::Domain(format!("c = {c} must be at least 2")));
    }
    if !eps.is_positive() {
        return Err(Error::Domain(format!("ε = {eps} must be positive")));
    }
    Ok(())
}

pub(crate) fn to_count(v: BigInt, what: &str) -> Result<u64> {
    match v.to_u64() {
        Some(x) if x <= MAX_GENERATORS => Ok(x),
        _ => Err(Error::ResourceLimit(format!("{what} = {v} exceeds the cap of {MAX_GENERATORS} generators"))),
    }
}

/// `ℓ = (3c)^{-1/(2ε′)}`, `n = ⌊ℓ^{-(γ+ε′)}⌋`, `n′ = ⌊ℓ^{-(1-γ+ε′)}⌋`, `a = √ℓ`.
pub fn raw_choice(gamma: &BigRational, c: u64, eps: &BigRational, eps_prime: &BigRational) -> Result<RawChoice> {
    let ell = PowProduct::power(&qi(3 * c), &(-(BigRational::one() / (qi(2) * eps_prime))))?;
    let inv = ell.recip();
    let n = to_count(inv.pow(&(gamma + eps_prime)).floor()?, "n")?;
    let n_prime = to_count(inv.pow(&(BigRational::one() - gamma + eps_prime)).floor()?, "n′")?;
    let a = ell.pow(&q(1, 2));
    Ok(RawChoice { gamma: gamma.clone(), c, eps: eps.clone(), eps_prime: eps_prime.clone(), ell, a, n, n_prime })
}

/// Candidates for `ε′`, largest first.
pub fn eps_candidates(gamma: &BigRational, eps: &BigRational) -> Vec<BigRational> {
    let top = if eps < &(gamma / qi(BETA)) { eps.clone() } else { gamma / qi(BETA) };
    let mut out = vec![top.clone()];
    for m in (1..=EPS_SEARCH_DEPTH).rev() {
        let f = BigRational::one() - BigRational::new(BigInt::one(), BigInt::one() << m);
        out.push(&top * f);
    }
    out
}

/// Search `ε′` until `c | n′` and every constraint certifies.
pub fn choose_parameters(gamma: &BigRational, c: u64, eps: &BigRational, prec: u32) -> Result<Lemma51Params> {
    check_args(gamma, c, eps)?;
    let mut last = None;
    for ep in eps_candidates(gamma, eps) {
        let raw = raw_choice(gamma, c, eps, &ep)?;
        if raw.n_prime % c != 0 {
            last = Some(format!("ε′ = {ep}: n′ = {} is not divisible by c = {c}", raw.n_prime));
            continue;
        }
        match Lemma51Params::from_raw(&raw, prec) {
            Ok(p) => return Ok(p),
            Err(Error::ConstraintFailure { name, detail }) => last = Some(format!("ε′ = {ep}: {name}: {detail}")),
            Err(e) => return Err(e),
        }
    }
    Err(Error::SearchExhausted(last.unwrap_or_else(|| "no candidate".into())))
}

impl Lemma51Params {
    /// Complete a raw choice: solve `z₀, w₀`, fix `δ`, fill the translations and certify
    /// every constraint. Fails on the first constraint that does not certify.
    pub fn from_raw(raw: &RawChoice, prec: u32) -> Result<Self> {
        let p = Self::solve(raw, prec)?;
        if let Some(bad) = p.ledger.iter().find(|c| !c.holds) {
            return Err(Error::constraint(bad.name.clone(), bad.detail()));
        }
        Ok(p)
    }

    /// Same as [`Lemma51Params::from_raw`] but keeps failed checks in the ledger.
    pub fn solve(raw: &RawChoice, prec: u32) -> Result<Self> {
        let c = raw.c;
        if raw.n < 1 || raw.n_prime < c || raw.n_prime % c != 0 {
            return Err(Error::constraint(
                "sizes",
                format!("n = {}, n′ = {} with c = {c} cannot carry the construction", raw.n, raw.n_prime),
            ));
        }
        let iv = |x: i64| DyInterval::from_i64(x, prec);
        let ell_x = raw.ell.clone();
        let nl = ell_x.mul(&PowProduct::from_int(raw.n as i64)?);
        let len_i_exact = nl.pow(&q(1, 2));
        let len_j_exact = nl.pow(&q(-1, 2));
        let ell = ell_x.eval(prec)?;
        let a = raw.a.eval(prec)?;
        let len_i = len_i_exact.eval(prec)?;
        let len_j = len_j_exact.eval(prec)?;
        let n = iv(raw.n as i64);
        let np = iv(raw.n_prime as i64);
        let n_dprime = raw.n_prime / c;
        let npp = iv(n_dprime as i64);
        let beta = iv(BETA as i64);
        let cc = iv(c as i64);
        let one = iv(1);
        let one_m_ell = &one - &ell;

        // admissible ranges for x = z₀ − w₀ and y = z₀ − ℓ w₀
        let lnn = &(&ell * &n) * &np;
        let x_lo = &len_i.div(&beta)? * &(&one - &cc.div(&lnn)?);
        let x_hi = &(&a * &one_m_ell).div(&ell)? - &(&(&one - &cc.div(&np)?) * &len_i).div(&(&ell * &n))?;
        let y_lo = (&(&n - &one) * &len_i).div(&n)?;
        let y_hi = one_m_ell.clone();
        let x = Dyadic::midpoint(x_lo.hi(), x_hi.lo()).round(96, Round::Down);
        let y = Dyadic::midpoint(y_lo.hi(), y_hi.lo()).round(96, Round::Down);
        let (xi, yi) = (DyInterval::point(x, prec), DyInterval::point(y, prec));
        let z0 = DyInterval::point((&yi - &(&ell * &xi)).div(&one_m_ell)?.mid().round(96, Round::Down), prec);
        let w0 = DyInterval::point((&yi - &xi).div(&one_m_ell)?.mid().round(96, Round::Down), prec);

        // δ: half of the smaller slack in the two spacing/range constraints
        let jn = len_j.div(&npp)?;
        let bc1 = &beta * &(&cc - &one);
        let slack1 = (&(&(&len_i.div(&a)? - &jn.div(&a)?) - &bc1)).div(&iv(2))?;
        let zw = &z0 - &w0;
        let two_over_beta = iv(2).div(&beta)?;
        let slack2 = (&zw - &(&len_i - &jn).div(&beta)?).div(&(&a * &(&one - &two_over_beta)))?;
        let dmax = Dyadic::min(slack1.lo(), slack2.lo());
        let delta = if dmax.signum() > 0 {
            DyInterval::point(dmax.shl(-1).round(64, Round::Down), prec)
        } else {
            DyInterval::zero(prec)
        };

        let da = &delta * &a;
        let qv = &(&len_i - &da.shl(1)) - &jn;
        let la = ell.div(&a)?;
        let t = Grid1D {
            origin: &z0 - &(&ell * &w0),
            axes: vec![GridAxis { count: raw.n, step: -len_i.div(&n)? }],
        };
        let t_prime = Grid1D {
            origin: &la * &(&(&(&z0 - &da) - &w0) - &qv.div(&beta)?),
            axes: vec![
                GridAxis { count: n_dprime, step: &la * &jn },
                GridAxis { count: c, step: &la * &qv.div(&bc1)? },
            ],
        };
        let mut p = Lemma51Params {
            gamma: raw.gamma.clone(),
            c,
            eps: raw.eps.clone(),
            eps_prime: raw.eps_prime.clone(),
            beta: BETA,
            prec,
            ell_exact: ell_x,
            a_exact: raw.a.clone(),
            len_i_exact,
            len_j_exact,
            n: raw.n,
            n_prime: raw.n_prime,
            n_dprime,
            ell,
            a,
            len_i,
            len_j,
            z0,
            w0,
            delta,
            t,
            t_prime,
            ledger: Vec::new(),
        };
        p.ledger = p.certify()?;
        Ok(p)
    }

    fn iv(&self, x: i64) -> DyInterval {
        DyInterval::from_i64(x, self.prec)
    }

    /// `t_i` for `i = 1..n`.
    pub fn t_at(&self, i: u64) -> DyInterval {
        self.t.value(i - 1)
    }

    /// `t′_j` for `j = 1..n′`.
    pub fn t_prime_at(&self, j: u64) -> DyInterval {
        self.t_prime.value(j - 1)
    }

    /// `z_i = z₀ − i|I|/n`.
    pub fn z(&self, i: u64) -> Result<DyInterval> {
        Ok(&self.z0 - &(&self.len_i * &self.iv(i as i64)).div(&self.iv(self.n as i64))?)
    }

    /// `w_k = w₀ − k|J|/n″`.
    pub fn w(&self, k: u64) -> Result<DyInterval> {
        Ok(&self.w0 - &(&self.len_j * &self.iv(k as i64)).div(&self.iv(self.n_dprime as i64))?)
    }

    /// Upper end `z̃_l` of the right target `Ĩ_l`, `l = 1..c`.
    pub fn z_tilde(&self, l: u64) -> Result<DyInterval> {
        let da = &self.delta * &self.a;
        let jn = self.len_j.div(&self.iv(self.n_dprime as i64))?;
        let qv = &(&self.len_i - &da.shl(1)) - &jn;
        let bc1 = self.iv((self.beta * (self.c - 1)) as i64);
        let frac = self.iv((self.c - l) as i64).div(&bc1)?;
        Ok(&(&self.z0 - &da) - &(&frac * &qv))
    }

    /// The interval `I = [z₀ − |I|, z₀]`.
    pub fn interval_i(&self) -> DyInterval {
        DyInterval::new(self.z0.lo() - self.len_i.hi(), self.z0.hi().clone(), self.prec)
            .expect("z₀ is a point and |I| > 0")
    }

    /// Enclosure of `J = [w₀ − |J|, w₀]` (exact up to the rounding of `|J|`).
    pub fn interval_j(&self) -> DyInterval {
        (&self.w0 - &self.len_j).hull(&self.w0)
    }

    pub fn failures(&self) -> Vec<&ConstraintCheck> {
        self.ledger.iter().filter(|c| !c.holds).collect()
    }

    fn certify(&self) -> Result<Vec<ConstraintCheck>> {
        let p = self.prec;
        let iv = |x: i64| DyInterval::from_i64(x, p);
        let one = iv(1);
        let (ell, a, li, lj) = (&self.ell, &self.a, &self.len_i, &self.len_j);
        let n = iv(self.n as i64);
        let np = iv(self.n_prime as i64);
        let npp = iv(self.n_dprime as i64);
        let beta = iv(self.beta as i64);
        let cc = iv(self.c as i64);
        let bc1 = &beta * &(&cc - &one);
        let one_m_ell = &one - ell;
        let delta = &self.delta;
        let da = delta * a;
        let jn = lj.div(&npp)?;
        let zw = &self.z0 - &self.w0;
        let zlw = &self.z0 - &(ell * &self.w0);
        let mut out = Vec::new();

        // original constraints
        let inv = self.ell_exact.recip();
        let g = &self.gamma;
        let e = &self.eps;
        let n_x = PowProduct::from_int(self.n as i64)?;
        let np_x = PowProduct::from_int(self.n_prime as i64)?;
        let cmp = |x: &PowProduct, y: &PowProduct| x.cmp_exact(y);
        let lo_n = inv.pow(g);
        let hi_n = inv.pow(&(g + e));
        let lo_np = inv.pow(&(BigRational::one() - g));
        let hi_np = inv.pow(&(BigRational::one() - g + e));
        use std::cmp::Ordering::{Greater, Less};
        let dim_ok = cmp(&n_x, &lo_n)? == Greater
            && cmp(&n_x, &hi_n)? == Less
            && cmp(&np_x, &lo_np)? == Greater
            && cmp(&np_x, &hi_np)? == Less;
        out.push(
            ConstraintCheck::new("dimension window", CheckKind::Boxed, "n ∈ (ℓ^-γ, ℓ^-(γ+ε)), n′ ∈ (ℓ^-(1-γ), ℓ^-(1-γ+ε))")
                .val("n", &n)
                .val("ℓ^-γ", &lo_n.eval(p)?)
                .val("ℓ^-(γ+ε)", &hi_n.eval(p)?)
                .val("n′", &np)
                .val("ℓ^-(1-γ)", &lo_np.eval(p)?)
                .val("ℓ^-(1-γ+ε)", &hi_np.eval(p)?)
                .require(dim_ok),
        );

        let lhs = self.ell_exact.recip().mul(&self.len_i_exact).div(&n_x);
        let len_ok = lhs.cmp_exact(&self.len_j_exact)? == std::cmp::Ordering::Equal;
        let lhs_iv = li.div(&(ell * &n))?;
        out.push(
            ConstraintCheck::new("length matching", CheckKind::Boxed, "ℓ^-1·|I|/n = |J|")
                .val("ℓ^-1·|I|/n", &lhs_iv)
                .val("|J|", lj)
                .exact("|J|", &self.len_j_exact)
                .require(len_ok && lhs_iv.overlaps(lj)),
        );

        let ip = li.div(&n)?;
        out.push(
            ConstraintCheck::new("K gaps", CheckKind::Boxed, "|I|/n > ℓ")
                .val("|I|/n", &ip)
                .val("ℓ", ell)
                .require(lt(ell, &ip)),
        );

        let y_lo = (&(&n - &one) * li).div(&n)?;
        out.push(
            ConstraintCheck::new("K range", CheckKind::Boxed, "1 − ℓ ≥ z₀ − ℓw₀ ≥ (n−1)|I|/n")
                .val("1 − ℓ", &one_m_ell)
                .val("z₀ − ℓw₀", &zlw)
                .val("(n−1)|I|/n", &y_lo)
                .require(le(&zlw, &one_m_ell) && le(&y_lo, &zlw)),
        );

        let mid = &li.div(a)? - &delta.shl(1);
        let upper = &(&jn.div(a)? * &(&beta - &one)) - &beta;
        let lower = &jn.div(a)? + &bc1;
        out.push(
            ConstraintCheck::new(
                "K′ spacing",
                CheckKind::Boxed,
                "(|J|/(a·n″))(β−1) − β > |I|/a − 2δ > |J|/(a·n″) + β(c−1)",
            )
            .val("(|J|/(a·n″))(β−1) − β", &upper)
            .val("|I|/a − 2δ", &mid)
            .val("|J|/(a·n″) + β(c−1)", &lower)
            .val("δ", delta)
            .require(lt(&mid, &upper) && lt(&lower, &mid) && delta.is_positive()),
        );

        let r_hi0 = &(a * &one_m_ell).div(ell)? - &(&(&npp - &one) * lj).div(&npp)?;
        let r_hi = &r_hi0 + &da;
        let two_b = iv(2).div(&beta)?;
        let r_lo = &(&da * &(&one - &two_b)) + &(li - &jn).div(&beta)?;
        out.push(
            ConstraintCheck::new(
                "K′ range",
                CheckKind::Boxed,
                "a(1−ℓ)/ℓ − (n″−1)|J|/n″ + δa ≥ z₀ − w₀ ≥ δa(1 − 2/β) + (|I| − |J|/n″)/β",
            )
            .val("upper", &r_hi)
            .val("z₀ − w₀", &zw)
            .val("lower", &r_lo)
            .require(le(&zw, &r_hi) && le(&r_lo, &zw)),
        );

        // simplified system
        let lnn_x = self.ell_exact.mul(&n_x).mul(&np_x);
        let lnn = &(ell * &n) * &np;
        let two_c = iv(2 * self.c as i64);
        let w_hi = (&cc * &(&beta - &one)).div(&iv(2))?;
        out.push(
            ConstraintCheck::new("ℓnn′ window", CheckKind::Simplified, "ℓnn′ ∈ [2c, c(β−1)/2]")
                .val("ℓnn′", &lnn)
                .exact("ℓnn′", &lnn_x)
                .val("2c", &two_c)
                .val("c(β−1)/2", &w_hi)
                .require(
                    lnn_x.cmp_exact(&PowProduct::from_int(2 * self.c as i64)?)? != Less
                        && lnn_x.cmp_exact(&PowProduct::from_rational(&(qi(self.c * (self.beta - 1)) / qi(2)))?)? != Greater,
                ),
        );

        let ia_x = self.len_i_exact.div(&self.a_exact);
        let ia = li.div(a)?;
        let b2 = bc1.shl(1);
        out.push(
            ConstraintCheck::new("|I|/a lower", CheckKind::Simplified, "|I|/a > 2β(c−1)")
                .val("|I|/a", &ia)
                .exact("|I|/a", &ia_x)
                .val("2β(c−1)", &b2)
                .require(ia_x.cmp_exact(&PowProduct::from_int(2 * (self.beta * (self.c - 1)) as i64)?)? == Greater),
        );
        let nh = n.div(&iv(2))?;
        out.push(
            ConstraintCheck::new("|I|/a upper", CheckKind::Simplified, "|I|/a < n/2")
                .val("|I|/a", &ia)
                .val("n/2", &nh)
                .require(lt(&ia, &nh)),
        );
        out.push(
            ConstraintCheck::new("|I| < 1", CheckKind::Simplified, "|I| < 1")
                .val("|I|", li)
                .exact("|I|", &self.len_i_exact)
                .require(lt(li, &one)),
        );
        let sq_x = n_x.pow(&q(1, 2));
        let sq = sq_x.eval(p)?;
        out.push(
            ConstraintCheck::new("√n bound", CheckKind::Simplified, "√n > 2β(c−1) and √n > 2")
                .val("√n", &sq)
                .exact("√n", &sq_x)
                .val("2β(c−1)", &b2)
                .require(
                    sq_x.cmp_exact(&PowProduct::from_int(2 * (self.beta * (self.c - 1)) as i64)?)? == Greater
                        && sq_x.cmp_exact(&PowProduct::from_int(2)?)? == Greater,
                ),
        );

        out.extend(self.certify_translations()?);
        Ok(out)
    }

    /// Gap and range conditions on the built translations and the images of steps (C), (D).
    fn certify_translations(&self) -> Result<Vec<ConstraintCheck>> {
        let p = self.prec;
        let zero = DyInterval::zero(p);
        let one_m_ell = &DyInterval::one(p) - &self.ell;
        let mut out = Vec::new();

        let t1 = self.t_at(1);
        let tn = self.t_at(self.n);
        let step = -self.t.axes[0].step.clone();
        out.push(
            ConstraintCheck::new("K translations", CheckKind::Derived, "1−ℓ ≥ t₁ > … > t_n ≥ 0, t_i − t_{i+1} > ℓ")
                .val("t₁", &t1)
                .val("t_n", &tn)
                .val("t_i − t_{i+1}", &step)
                .require(le(&t1, &one_m_ell) && le(&zero, &tn) && lt(&self.ell, &step)),
        );

        let tp1 = self.t_prime_at(1);
        let tpn = self.t_prime_at(self.n_prime);
        let inner = self.t_prime.axes[1].step.clone();
        // from t′_{ck} to t′_{ck+1}
        let wrap = &self.t_prime.axes[0].step - &(&inner * &DyInterval::from_i64(self.c as i64 - 1, p));
        out.push(
            ConstraintCheck::new("K′ translations", CheckKind::Derived, "0 ≤ t′₁ < … < t′_n′ ≤ 1−ℓ, t′_{j+1} − t′_j > ℓ")
                .val("t′₁", &tp1)
                .val("t′_n′", &tpn)
                .val("step within a block", &inner)
                .val("step between blocks", &wrap)
                .require(
                    le(&zero, &tp1)
                        && le(&tpn, &one_m_ell)
                        && lt(&self.ell, &inner)
                        && (self.n_dprime < 2 || lt(&self.ell, &wrap)),
                ),
        );

        // (C): ℓ^-1(z_i − t_i) = w₀ − |J| and ℓ^-1(z_{i−1} − t_i) = w₀
        let mut ok_c = true;
        let jlo = &self.w0 - &self.len_j;
        let mut vals = Vec::new();
        for i in [1, self.n] {
            let ti = self.t_at(i);
            let lo = (&self.z(i)? - &ti).div(&self.ell)?;
            let hi = (&self.z(i - 1)? - &ti).div(&self.ell)?;
            ok_c &= lo.overlaps(&jlo) && hi.overlaps(&self.w0);
            vals.push((format!("R_{i}⁻¹ image"), lo.hull(&hi)));
        }
        let mut chk = ConstraintCheck::new("left images", CheckKind::Derived, "R_i⁻¹({a}×I_i) = {a/ℓ}×J").require(ok_c);
        chk.values = vals;
        out.push(chk);

        // (D): R′_{c(k−1)+l}(J_k) = Ĩ_l ⊂ I_(δa)
        let s = self.a.div(&self.ell)?;
        let jn = self.len_j.div(&DyInterval::from_i64(self.n_dprime as i64, p))?;
        // z̃_l = z₀ − δa − frac_l·Q with frac_l ≥ 0 exactly, so the top holds once Q > 0
        let da = &self.delta * &self.a;
        let qv = &(&self.len_i - &da.shl(1)) - &jn;
        let floor = &(&self.z0 - &self.len_i) + &da;
        let mut ok_d = qv.is_positive();
        let mut vals = Vec::new();
        for l in 1..=self.c {
            let zt = self.z_tilde(l)?;
            let target = (&zt - &jn).hull(&zt);
            ok_d &= le(&floor, &(&zt - &jn));
            for k in [1, self.n_dprime] {
                let tp = self.t_prime_at(self.c * (k - 1) + l);
                let lo = &self.w(k)? + &(&s * &tp);
                let hi = &self.w(k - 1)? + &(&s * &tp);
                ok_d &= lo.overlaps(&(&zt - &jn)) && hi.overlaps(&zt);
            }
            vals.push((format!("Ĩ_{l}"), target));
        }
        let mut chk =
            ConstraintCheck::new("right images", CheckKind::Derived, "R′_{c(k−1)+l}(J_k) = Ĩ_l ⊂ I_(δa)").require(ok_d);
        chk.values = vals;
        out.push(chk);
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rignum::DEFAULT_PREC;

    fn worked() -> Lemma51Params {
        choose_parameters(&q(1, 2), 2, &q(1, 10), DEFAULT_PREC).unwrap()
    }

    #[test]
    fn worked_example_is_powers_of_six() {
        let p = worked();
        assert_eq!(p.eps_prime, q(1, 14));
        assert_eq!(p.ell_exact.to_rational(), Some(BigRational::new(1.into(), 6i64.pow(7).into())));
        assert_eq!((p.n, p.n_prime, p.n_dprime), (1296, 1296, 648));
        let exact = |name: &str, label: &str| {
            p.ledger.iter().find(|c| c.name == name).unwrap().exact.iter().find(|(k, _)| k == label).unwrap().1.clone()
        };
        assert_eq!(exact("ℓnn′ window", "ℓnn′"), qi(6));
        assert_eq!(exact("|I|/a lower", "|I|/a"), qi(36));
        assert_eq!(exact("√n bound", "√n"), qi(36));
        assert!(p.ledger.iter().all(|c| c.holds), "{:#?}", p.failures());
        assert_eq!(p.ledger.iter().filter(|c| c.kind == CheckKind::Boxed).count(), 6);
        assert_eq!(p.ledger.iter().filter(|c| c.kind == CheckKind::Simplified).count(), 5);
    }

    #[test]
    fn left_image_endpoints() {
        let p = worked();
        let t1 = p.t_at(1);
        let a = (&p.z(1).unwrap() - &t1).div(&p.ell).unwrap();
        let b = (&p.z0 - &t1).div(&p.ell).unwrap();
        assert!(a.overlaps(&(&p.w0 - &p.len_j)));
        assert!(b.overlaps(&p.w0));
    }

    #[test]
    fn targets_stay_in_the_deflated_interval() {
        let p = worked();
        let top = p.z_tilde(p.c).unwrap();
        assert!(top.overlaps(&(&p.z0 - &(&p.delta * &p.a))));
        assert!(p.delta.is_positive());
    }

    #[test]
    fn single_generator_fails_the_root_bound() {
        let raw = RawChoice { n: 1, ..raw_choice(&q(1, 2), 2, &q(1, 10), &q(1, 14)).unwrap() };
        let p = Lemma51Params::solve(&raw, DEFAULT_PREC).unwrap();
        assert!(p.failures().iter().any(|c| c.name == "√n bound"));
        assert!(matches!(Lemma51Params::from_raw(&raw, DEFAULT_PREC), Err(Error::ConstraintFailure { .. })));
    }

    #[test]
    fn tiny_n_fails_the_root_bound() {
        // n = 4 keeps the sizes valid but √n = 2 is far below 2β(c−1) = 14
        let raw = RawChoice { n: 4, ..raw_choice(&q(1, 2), 2, &q(1, 10), &q(1, 14)).unwrap() };
        let p = Lemma51Params::solve(&raw, DEFAULT_PREC).unwrap();
        assert!(p.failures().iter().any(|c| c.name == "√n bound"));
    }

    #[test]
    fn bad_inputs() {
        assert!(matches!(choose_parameters(&qi(2), 2, &q(1, 10), 128), Err(Error::Domain(_))));
        assert!(matches!(choose_parameters(&q(1, 2), 1, &q(1, 10), 128), Err(Error::Domain(_))));
    }

    #[test]
    fn extreme_gamma_hits_the_cap() {
        let r = choose_parameters(&q(99, 100), 2, &q(1, 1000), 128);
        assert!(matches!(r, Err(Error::ResourceLimit(_)) | Err(Error::SearchExhausted(_))), "{r:?}");
    }

    #[test]
    fn candidates_descend() {
        let c = eps_candidates(&q(1, 2), &q(1, 10));
        assert_eq!(c[0], q(1, 14));
        assert!(c.windows(2).all(|w| w[0] > w[1]));
    }
}
