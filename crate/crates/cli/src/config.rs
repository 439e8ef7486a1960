//! Line-oriented `key = value` instance files.
//!
//! ```text
//! # reference instance
//! p = 3
//! n = 1
//! s = 1
//! f_support = [2] t1; [-2] t2
//! p_support = [1] [1] 1
//! t_bar = 1, 1
//! kappa_digits = 1, ...
//! ```
//!
//! Lattice points are bracketed integer lists, support lists are `;`-separated.
//! An `f_support` coefficient is either a packed residue or `tK`, the `K`-th
//! entry of `t_bar`. A `kappa_digits` list ending in `...` repeats its last digit
//! up to `M` digits; otherwise it is padded with zeros.

use std::fmt;
use std::str::FromStr;

use unitroot_core::dwork::{default_cap, working_precision};
use unitroot_core::family::{Coeff, FTerm, LaurentFamily, PTerm};
use unitroot_core::ffield::is_prime;
use unitroot_core::geometry::{LatticePoint, Q};
use unitroot_core::padic::KappaExponent;
use unitroot_core::{Error, Result};

/// Extra digits carried by every route of `verify` beyond the certified target.
pub const GUARD_DIGITS: u32 = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Weights,
    Expsum,
    Lfunction,
    Dworkdet,
    Sympow,
    Unitroot,
    Verify,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Weights,
        Command::Expsum,
        Command::Lfunction,
        Command::Dworkdet,
        Command::Sympow,
        Command::Unitroot,
        Command::Verify,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Weights => "weights",
            Command::Expsum => "expsum",
            Command::Lfunction => "lfunction",
            Command::Dworkdet => "dworkdet",
            Command::Sympow => "sympow",
            Command::Unitroot => "unitroot",
            Command::Verify => "verify",
        }
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Command::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| format!("unknown command `{s}`"))
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `κ` as written in the config.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KappaSpec {
    pub digits: Vec<u64>,
    /// Repeat the last digit instead of padding with zeros.
    pub repeat: bool,
}

impl KappaSpec {
    pub fn int(p: u64, k: u64) -> Self {
        let mut digits = Vec::new();
        let mut t = k;
        while t > 0 {
            digits.push(t % p);
            t /= p;
        }
        if digits.is_empty() {
            digits.push(0);
        }
        KappaSpec { digits, repeat: false }
    }

    pub fn ones() -> Self {
        KappaSpec { digits: vec![1], repeat: true }
    }

    pub fn exponent(&self, p: u64, m: usize) -> Result<KappaExponent> {
        if self.digits.len() > m {
            return Err(Error::Invalid(format!("kappa has {} digits but M = {m}", self.digits.len())));
        }
        let fill = if self.repeat { *self.digits.last().unwrap_or(&0) } else { 0 };
        let mut digits = self.digits.clone();
        digits.resize(m, fill);
        KappaExponent::new(p, digits)
    }
}

impl fmt::Display for KappaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d: Vec<String> = self.digits.iter().map(|x| x.to_string()).collect();
        write!(f, "{}", d.join(", "))?;
        if self.repeat {
            write!(f, ", ...")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Caps {
    pub w_x: Q,
    pub w_gamma: Q,
    pub l_max: usize,
    pub w_sym: Q,
    pub d_t: usize,
    pub d_lambda: u32,
    /// `None` derives the fiber degree of the `L_unit` route from the Hodge gap.
    pub max_fiber_degree: Option<usize>,
}

impl Caps {
    /// Defaults for a working precision of `n` digits at `p`.
    pub fn defaults(p: u64, n: u32) -> Caps {
        Caps {
            w_x: default_cap(p, n),
            w_gamma: Q::from_integer(0),
            l_max: 3,
            w_sym: Q::from_integer(4),
            d_t: 4,
            d_lambda: (2 * n as u64 * p * p / (p - 1)) as u32,
            max_fiber_degree: None,
        }
    }

    /// `W_x`, `W_Γ` and `W_sym` raised by `step`.
    pub fn raised(&self, step: i64) -> Caps {
        let s = Q::from_integer(step);
        Caps { w_x: self.w_x + s, w_gamma: self.w_gamma + s, w_sym: self.w_sym + s, ..self.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstanceConfig {
    pub p: u64,
    pub a: usize,
    pub n: usize,
    pub s: usize,
    pub f_support: Vec<FTerm>,
    pub p_support: Vec<PTerm>,
    pub t_bar: Vec<u32>,
    pub kappa: KappaSpec,
    /// Working precision `N`; certified outputs target `N - 1` digits.
    pub precision: u32,
    /// Digits of `κ`.
    pub m: usize,
    pub caps: Caps,
    pub command: Command,
}

impl InstanceConfig {
    /// The reference instance `t1 x^2 + t2 x^-2 + λ x` over F_3 at `t̄ = (1, 1)`, `κ = 1`.
    pub fn reference() -> InstanceConfig {
        let fam = LaurentFamily::reference();
        let precision = 4;
        InstanceConfig {
            p: fam.p,
            a: fam.a,
            n: fam.n,
            s: fam.s,
            f_support: fam.f_terms,
            p_support: fam.p_terms,
            t_bar: vec![1, 1],
            kappa: KappaSpec::int(3, 1),
            precision,
            m: default_m(3, precision),
            caps: Caps::defaults(3, precision),
            command: Command::Verify,
        }
    }

    pub fn family(&self) -> LaurentFamily {
        LaurentFamily {
            p: self.p,
            a: self.a,
            n: self.n,
            s: self.s,
            f_terms: self.f_support.clone(),
            p_terms: self.p_support.clone(),
        }
    }

    pub fn kappa_exponent(&self) -> Result<KappaExponent> {
        self.kappa.exponent(self.p, self.m)
    }

    /// Digits certified by the verification routes.
    pub fn target(&self) -> u32 {
        self.precision.saturating_sub(1).max(1)
    }

    pub fn q(&self) -> u64 {
        self.p.pow(self.a as u32)
    }
}

/// Default `M`: enough digits of `κ` for the precision used by `verify`.
pub fn default_m(p: u64, precision: u32) -> usize {
    let prec = (precision.saturating_sub(1).max(1) + GUARD_DIGITS).max(working_precision(p, precision, 4));
    KappaExponent::required_m(p, prec, p as usize - 1)
}

fn err(line: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::Config { line, col, msg: msg.into() }
}

/// A piece of a line with its 1-based starting column.
#[derive(Clone, Copy)]
struct Span<'a> {
    text: &'a str,
    col: usize,
}

impl<'a> Span<'a> {
    fn trim(self) -> Span<'a> {
        let lead = self.text.len() - self.text.trim_start().len();
        Span { text: self.text.trim(), col: self.col + self.text[..lead].chars().count() }
    }

    fn split(self, sep: char) -> Vec<Span<'a>> {
        let mut out = Vec::new();
        let mut start = 0;
        for (i, c) in self.text.char_indices() {
            if c == sep {
                out.push(self.sub(start, i));
                start = i + c.len_utf8();
            }
        }
        out.push(self.sub(start, self.text.len()));
        out
    }

    fn words(self) -> Vec<Span<'a>> {
        let mut out = Vec::new();
        let mut start: Option<usize> = None;
        let mut depth = 0;
        for (i, c) in self.text.char_indices() {
            match c {
                '[' => depth += 1,
                ']' => depth -= 1,
                _ => {}
            }
            if c.is_whitespace() && depth == 0 {
                if let Some(s) = start.take() {
                    out.push(self.sub(s, i));
                }
            } else if start.is_none() {
                start = Some(i);
            }
        }
        if let Some(s) = start {
            out.push(self.sub(s, self.text.len()));
        }
        out
    }

    fn sub(self, from: usize, to: usize) -> Span<'a> {
        Span { text: &self.text[from..to], col: self.col + self.text[..from].chars().count() }
    }
}

struct Ctx {
    line: usize,
}

impl Ctx {
    fn int<T: FromStr>(&self, s: Span) -> Result<T> {
        let s = s.trim();
        s.text.parse().map_err(|_| err(self.line, s.col, format!("expected an integer, found `{}`", s.text)))
    }

    fn rational(&self, s: Span) -> Result<Q> {
        let s = s.trim();
        let bad = || err(self.line, s.col, format!("expected a rational number, found `{}`", s.text));
        match s.text.split_once('/') {
            Some((a, b)) => {
                let a: i64 = a.trim().parse().map_err(|_| bad())?;
                let b: i64 = b.trim().parse().map_err(|_| bad())?;
                if b <= 0 {
                    return Err(bad());
                }
                Ok(Q::new(a, b))
            }
            None => Ok(Q::from_integer(s.text.parse().map_err(|_| bad())?)),
        }
    }

    fn point(&self, s: Span) -> Result<LatticePoint> {
        let s = s.trim();
        let inner = s
            .text
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .ok_or_else(|| err(self.line, s.col, format!("malformed lattice point `{}`", s.text)))?;
        let body = s.sub(1, 1 + inner.len());
        if inner.trim().is_empty() {
            return Ok(LatticePoint(Vec::new()));
        }
        let mut coords = Vec::new();
        for c in body.split(',') {
            let c = c.trim();
            let v: i64 = c
                .text
                .parse()
                .map_err(|_| err(self.line, c.col, format!("malformed lattice point: `{}` is not an integer", c.text)))?;
            coords.push(v);
        }
        Ok(LatticePoint(coords))
    }
}

fn list<'a>(s: Span<'a>, sep: char) -> Vec<Span<'a>> {
    let s = s.trim();
    if s.text.is_empty() {
        return Vec::new();
    }
    s.split(sep).into_iter().map(|x| x.trim()).collect()
}

const KEYS: [&str; 18] = [
    "p",
    "a",
    "n",
    "s",
    "f_support",
    "p_support",
    "t_bar",
    "kappa_digits",
    "N",
    "M",
    "W_x",
    "W_gamma",
    "L_max",
    "W_sym",
    "d_T",
    "d_lambda",
    "max_fiber_degree",
    "command",
];

/// Raw coefficient of an `f_support` entry before `t_bar` is known.
enum RawCoeff {
    Var(usize, usize),
    Fixed(u32),
}

/// Parses and validates a config, filling defaults for absent keys.
pub fn parse_config(text: &str) -> Result<InstanceConfig> {
    let mut seen: Vec<(&str, usize, Span)> = Vec::new();
    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("");
        let span = Span { text: content, col: 1 };
        if content.trim().is_empty() {
            continue;
        }
        let Some(eq) = content.find('=') else {
            let s = span.trim();
            return Err(err(line, s.col, "expected `key = value`"));
        };
        let key = span.sub(0, eq).trim();
        let value = span.sub(eq + 1, content.len()).trim();
        let Some(&k) = KEYS.iter().find(|k| **k == key.text) else {
            return Err(err(line, key.col, format!("unknown key `{}`", key.text)));
        };
        if let Some((_, prev, _)) = seen.iter().find(|(x, _, _)| *x == k) {
            return Err(err(line, key.col, format!("duplicate key `{k}` (first on line {prev})")));
        }
        seen.push((k, line, value));
    }
    let get = |k: &str| seen.iter().find(|(x, _, _)| *x == k).map(|(_, l, v)| (*l, *v));
    let missing = |k: &str| err(last_line + 1, 1, format!("missing key `{k}`"));

    let (pl, pv) = get("p").ok_or_else(|| missing("p"))?;
    let p: u64 = Ctx { line: pl }.int(pv)?;
    if p < 2 || !is_prime(p) {
        return Err(err(pl, pv.col, format!("p = {p} is composite")));
    }
    let a: usize = match get("a") {
        Some((l, v)) => {
            let a: usize = Ctx { line: l }.int(v)?;
            if a == 0 {
                return Err(err(l, v.col, "a must be positive"));
            }
            a
        }
        None => 1,
    };
    let q = p.pow(a as u32);
    let (nl, nv) = get("n").ok_or_else(|| missing("n"))?;
    let n: usize = Ctx { line: nl }.int(nv)?;
    let s: usize = match get("s") {
        Some((l, v)) => Ctx { line: l }.int(v)?,
        None => 0,
    };
    let residue = |ctx: &Ctx, sp: Span| -> Result<u32> {
        let r: u64 = ctx.int(sp)?;
        if r == 0 {
            return Err(err(ctx.line, sp.trim().col, "zero residue"));
        }
        if r >= q {
            return Err(err(ctx.line, sp.trim().col, format!("residue {r} is outside F_{q}")));
        }
        Ok(r as u32)
    };
    let check_dim = |ctx: &Ctx, sp: Span, pt: &LatticePoint, want: usize| -> Result<()> {
        if pt.dim() != want {
            return Err(err(ctx.line, sp.col, format!("lattice point has dimension {}, expected {want}", pt.dim())));
        }
        Ok(())
    };

    let (fl, fv) = get("f_support").ok_or_else(|| missing("f_support"))?;
    let fctx = Ctx { line: fl };
    let mut f_raw = Vec::new();
    for entry in list(fv, ';') {
        let w = entry.words();
        if w.is_empty() {
            return Err(err(fl, entry.col, "empty f_support entry"));
        }
        let u = fctx.point(w[0])?;
        if w.len() != 2 {
            return Err(err(fl, entry.col, "f_support entries are `[u] coefficient`"));
        }
        check_dim(&fctx, w[0], &u, n)?;
        let c = match w[1].text.strip_prefix('t') {
            Some(idx) => {
                let k: usize = idx
                    .parse()
                    .ok()
                    .filter(|k| *k >= 1)
                    .ok_or_else(|| err(fl, w[1].col, format!("bad parameter `{}`", w[1].text)))?;
                RawCoeff::Var(k - 1, w[1].col)
            }
            None => RawCoeff::Fixed(residue(&fctx, w[1])?),
        };
        f_raw.push((u, c));
    }
    if f_raw.is_empty() {
        return Err(err(fl, fv.col, "f_support is empty"));
    }

    let mut p_support = Vec::new();
    if let Some((l, v)) = get("p_support") {
        let ctx = Ctx { line: l };
        for entry in list(v, ';') {
            let w = entry.words();
            if w.is_empty() {
                return Err(err(l, entry.col, "empty p_support entry"));
            }
            let gamma = ctx.point(w[0])?;
            if w.len() != 3 {
                return Err(err(l, entry.col, "p_support entries are `[γ] [v] coefficient`"));
            }
            check_dim(&ctx, w[0], &gamma, s)?;
            let vv = ctx.point(w[1])?;
            check_dim(&ctx, w[1], &vv, n)?;
            p_support.push(PTerm { gamma, v: vv, coeff: residue(&ctx, w[2])? });
        }
    }

    let (tl, tv) = get("t_bar").ok_or_else(|| missing("t_bar"))?;
    let tctx = Ctx { line: tl };
    let t_bar = list(tv, ',').into_iter().map(|x| residue(&tctx, x)).collect::<Result<Vec<u32>>>()?;
    let mut f_support = Vec::new();
    for (u, c) in f_raw {
        let coeff = match c {
            RawCoeff::Var(k, col) => {
                if k >= t_bar.len() {
                    return Err(err(fl, col, format!("t{} has no entry in t_bar", k + 1)));
                }
                Coeff::Var(k)
            }
            RawCoeff::Fixed(r) => Coeff::Fixed(r),
        };
        f_support.push(FTerm { u, coeff });
    }

    let precision: u32 = match get("N") {
        Some((l, v)) => {
            let x: u32 = Ctx { line: l }.int(v)?;
            if x == 0 {
                return Err(err(l, v.col, "N must be positive"));
            }
            x
        }
        None => 4,
    };
    let m: usize = match get("M") {
        Some((l, v)) => Ctx { line: l }.int(v)?,
        None => default_m(p, precision),
    };
    let kappa = match get("kappa_digits") {
        Some((l, v)) => {
            let ctx = Ctx { line: l };
            let mut items = list(v, ',');
            let repeat = items.last().is_some_and(|x| x.text == "...");
            if repeat {
                items.pop();
            }
            if items.is_empty() {
                return Err(err(l, v.col, "kappa_digits is empty"));
            }
            let mut digits = Vec::new();
            for it in items {
                let d: u64 = ctx.int(it)?;
                if d >= p {
                    return Err(err(l, it.col, format!("digit {d} is not below p = {p}")));
                }
                digits.push(d);
            }
            if digits.len() > m {
                return Err(err(l, v.col, format!("{} digits exceed M = {m}", digits.len())));
            }
            KappaSpec { digits, repeat }
        }
        None => KappaSpec::int(p, 1),
    };

    let mut caps = Caps::defaults(p, precision);
    let rat = |k: &str, slot: &mut Q| -> Result<()> {
        if let Some((l, v)) = get(k) {
            let x = Ctx { line: l }.rational(v)?;
            if x < Q::from_integer(0) {
                return Err(err(l, v.col, format!("{k} must be non-negative")));
            }
            *slot = x;
        }
        Ok(())
    };
    rat("W_x", &mut caps.w_x)?;
    rat("W_gamma", &mut caps.w_gamma)?;
    rat("W_sym", &mut caps.w_sym)?;
    if let Some((l, v)) = get("L_max") {
        caps.l_max = Ctx { line: l }.int(v)?;
    }
    if let Some((l, v)) = get("d_T") {
        caps.d_t = Ctx { line: l }.int(v)?;
        if caps.d_t == 0 {
            return Err(err(l, v.col, "d_T must be positive"));
        }
    }
    if let Some((l, v)) = get("d_lambda") {
        caps.d_lambda = Ctx { line: l }.int(v)?;
    }
    if let Some((l, v)) = get("max_fiber_degree") {
        caps.max_fiber_degree = if v.text == "auto" {
            None
        } else {
            let d: usize = Ctx { line: l }.int(v)?;
            if d == 0 {
                return Err(err(l, v.col, "max_fiber_degree must be positive"));
            }
            Some(d)
        };
    }
    let command = match get("command") {
        Some((l, v)) => v.text.parse().map_err(|e: String| err(l, v.col, e))?,
        None => Command::Verify,
    };

    let cfg = InstanceConfig { p, a, n, s, f_support, p_support, t_bar, kappa, precision, m, caps, command };
    let fam = cfg.family();
    let unused = (0..cfg.t_bar.len()).find(|k| !fam.f_terms.iter().any(|t| t.coeff == Coeff::Var(*k)));
    if let Some(k) = unused {
        return Err(err(tl, tv.col, format!("t_bar entry {} is not used by f_support", k + 1)));
    }
    let geom_f = fam.geometry_f().map_err(|e| err(fl, fv.col, e.to_string()))?;
    if s > 0 {
        let (l, col) = get("p_support").map_or((last_line + 1, 1), |(l, v)| (l, v.col));
        if cfg.p_support.is_empty() {
            return Err(err(l, col, "p_support is empty but s > 0"));
        }
        fam.geometry_gamma(&geom_f).map_err(|e| err(l, col, e.to_string()))?;
    }
    Ok(cfg)
}

fn fmt_point(u: &LatticePoint) -> String {
    let c: Vec<String> = u.0.iter().map(|x| x.to_string()).collect();
    format!("[{}]", c.join(","))
}

fn fmt_q(x: Q) -> String {
    if x.is_integer() {
        x.to_integer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Canonical text of a config; every key is written out.
pub fn emit_config(cfg: &InstanceConfig) -> String {
    let mut out = String::new();
    let mut put = |k: &str, v: String| {
        out.push_str(k);
        out.push_str(" = ");
        out.push_str(&v);
        out.push('\n');
    };
    put("p", cfg.p.to_string());
    put("a", cfg.a.to_string());
    put("n", cfg.n.to_string());
    put("s", cfg.s.to_string());
    let f: Vec<String> = cfg
        .f_support
        .iter()
        .map(|t| {
            let c = match t.coeff {
                Coeff::Var(k) => format!("t{}", k + 1),
                Coeff::Fixed(r) => r.to_string(),
            };
            format!("{} {c}", fmt_point(&t.u))
        })
        .collect();
    put("f_support", f.join("; "));
    let g: Vec<String> =
        cfg.p_support.iter().map(|t| format!("{} {} {}", fmt_point(&t.gamma), fmt_point(&t.v), t.coeff)).collect();
    put("p_support", g.join("; "));
    let t: Vec<String> = cfg.t_bar.iter().map(|x| x.to_string()).collect();
    put("t_bar", t.join(", "));
    put("kappa_digits", cfg.kappa.to_string());
    put("N", cfg.precision.to_string());
    put("M", cfg.m.to_string());
    put("W_x", fmt_q(cfg.caps.w_x));
    put("W_gamma", fmt_q(cfg.caps.w_gamma));
    put("L_max", cfg.caps.l_max.to_string());
    put("W_sym", fmt_q(cfg.caps.w_sym));
    put("d_T", cfg.caps.d_t.to_string());
    put("d_lambda", cfg.caps.d_lambda.to_string());
    put("max_fiber_degree", cfg.caps.max_fiber_degree.map_or("auto".to_string(), |d| d.to_string()));
    put("command", cfg.command.to_string());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_round_trip() {
        let cfg = InstanceConfig::reference();
        assert_eq!(parse_config(&emit_config(&cfg)).unwrap(), cfg);
    }

    #[test]
    fn columns_point_at_the_offender() {
        let e = parse_config("p = 3\nn = 1\nf_support = [2] t1; [x] t2\nt_bar = 1, 1\n").unwrap_err();
        assert_eq!(e, err(3, 22, "malformed lattice point: `x` is not an integer"));
    }
}
