//! `section.key = value` records.

use std::fmt::{Display, Write};
use std::time::{Duration, Instant};

use unitroot_core::charsum::CycRational;
use unitroot_core::padic::{PadicRing, PadicScalar};

/// Canonical digits of `x` cut to `certified` digits per coordinate, e.g.
/// `[1,2,1;0,0,0] mod 3^3`. Coordinates are separated by `;`.
pub fn format_padic(ring: &PadicRing, x: &PadicScalar, certified: u32) -> String {
    let cert = certified.min(ring.prec) as usize;
    let digits = ring.canonical_digits(x);
    let per = ring.prec as usize;
    let groups: Vec<String> = digits
        .chunks(per)
        .map(|c| c[..cert].iter().map(|d| d.to_string()).collect::<Vec<_>>().join(","))
        .collect();
    format!("[{}] mod {}^{}", groups.join(";"), ring.p, cert)
}

/// A polynomial in `T` with exact coefficients, ascending.
pub fn format_poly(coeffs: &[CycRational]) -> String {
    coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>().join("; ")
}

pub fn format_point(coords: &[i64]) -> String {
    coords.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Record {
    pub section: String,
    pub key: String,
    pub value: String,
}

/// Records of one run plus the names of failed hard checks.
#[derive(Clone, Debug, Default)]
pub struct RunReport {
    pub records: Vec<Record>,
    pub failures: Vec<String>,
    /// Wall-clock time per operation; kept out of [`RunReport::render`].
    pub timings: Vec<(String, Duration)>,
}

impl RunReport {
    pub fn push(&mut self, section: &str, key: impl Into<String>, value: impl Display) {
        self.records.push(Record { section: section.to_string(), key: key.into(), value: value.to_string() });
    }

    pub fn padic(&mut self, section: &str, key: impl Into<String>, ring: &PadicRing, x: &PadicScalar, certified: u32) {
        self.push(section, key, format_padic(ring, x, certified));
    }

    /// Records `pass`/`fail` and remembers failures.
    pub fn check(&mut self, section: &str, key: impl Into<String>, ok: bool) {
        let key = key.into();
        if !ok {
            self.failures.push(format!("{section}.{key}"));
        }
        self.push(section, key, if ok { "pass" } else { "fail" });
    }

    pub fn timed<T>(&mut self, label: &str, f: impl FnOnce(&mut Self) -> T) -> T {
        let t = Instant::now();
        let out = f(self);
        self.timings.push((label.to_string(), t.elapsed()));
        out
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.records.iter().find(|r| r.section == section && r.key == key).map(|r| r.value.as_str())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            let _ = writeln!(out, "{}.{} = {}", r.section, r.key, r.value);
        }
        out
    }

    pub fn render_timings(&self) -> String {
        let mut out = String::new();
        for (k, d) in &self.timings {
            let _ = writeln!(out, "time.{k} = {:.3}s", d.as_secs_f64());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digits_stop_at_the_certified_precision() {
        let ring = PadicRing::new(3, 1, 2, 5).unwrap();
        let x = ring.from_int(1 + 2 * 3 + 9);
        assert_eq!(format_padic(&ring, &x, 2), "[1,2;0,0] mod 3^2");
        assert_eq!(format_padic(&ring, &x, 0), "[;] mod 3^0");
    }
}
