//! Series file format.
//!
//! ```text
//! LGF d=<d> mode=<exact|mod> p=<prime|-> N=<terms>
//! <coefficient of x^0>
//! ...
//! ```
//! Exact coefficients are written `num/den`, residues as plain integers.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::field::{Field, Rationals};
use crate::modular::PrimeField;

use super::PowerSeries;

/// Parses `TAG k=v k=v …`.
pub fn header_fields(line: &str, tag: &str) -> Result<BTreeMap<String, String>> {
    let mut it = line.split_whitespace();
    if it.next() != Some(tag) {
        return Err(Error::Parse(format!("expected '{tag}' header, got '{line}'")));
    }
    it.map(|kv| {
        kv.split_once('=')
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .ok_or_else(|| Error::Parse(format!("bad header field '{kv}'")))
    })
    .collect()
}

pub fn field<T: FromStr>(fields: &BTreeMap<String, String>, key: &str) -> Result<T> {
    fields
        .get(key)
        .ok_or_else(|| Error::Parse(format!("missing header field '{key}'")))?
        .parse()
        .map_err(|_| Error::Parse(format!("bad value for '{key}'")))
}

pub fn write_series<F: Field, W: Write>(d: usize, s: &PowerSeries<F>, mut out: W) -> Result<()> {
    let p = s.modulus().map(|p| p.to_string()).unwrap_or_else(|| "-".into());
    writeln!(out, "LGF d={} mode={} p={} N={}", d, s.field.mode(), p, s.truncation())?;
    for c in &s.coeffs {
        writeln!(out, "{}", s.field.format(c))?;
    }
    Ok(())
}

pub fn series_to_string<F: Field>(d: usize, s: &PowerSeries<F>) -> String {
    let mut buf = Vec::new();
    write_series(d, s, &mut buf).expect("in-memory write");
    String::from_utf8(buf).unwrap()
}

/// Series read from a file: dimension plus either arithmetic.
pub enum SeriesFile {
    Exact(usize, PowerSeries<Rationals>),
    Mod(usize, PowerSeries<PrimeField>),
}

pub fn read_series<R: BufRead>(input: R) -> Result<SeriesFile> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty series file".into()))??;
    let h = header_fields(&header, "LGF")?;
    let d: usize = field(&h, "d")?;
    let n: usize = field(&h, "N")?;
    let mode: String = field(&h, "mode")?;
    let body: Vec<String> = lines.take(n).collect::<std::io::Result<_>>()?;
    if body.len() != n {
        return Err(Error::Parse(format!("expected {n} coefficients, found {}", body.len())));
    }
    match mode.as_str() {
        "exact" => {
            let coeffs = body.iter().map(|l| Rationals.parse(l)).collect::<Result<_>>()?;
            Ok(SeriesFile::Exact(d, PowerSeries::new(Rationals, coeffs)))
        }
        "mod" => {
            let p: u64 = field(&h, "p")?;
            let f = PrimeField::new(p)?;
            let coeffs = body
                .iter()
                .map(|l| {
                    let v: u64 = l
                        .trim()
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad residue '{l}'")))?;
                    if v >= p {
                        return Err(Error::Parse(format!("residue {v} not below {p}")));
                    }
                    Ok(v)
                })
                .collect::<Result<_>>()?;
            Ok(SeriesFile::Mod(d, PowerSeries::new(f, coeffs)))
        }
        m => Err(Error::Parse(format!("unknown mode '{m}'"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modular::nth_prime;
    use crate::series::{lgf_series_exact, lgf_series_mod};

    #[test]
    fn exact_file_is_bit_exact() {
        let s = lgf_series_exact(7, 4);
        let text = series_to_string(7, &s);
        assert_eq!(text, "LGF d=7 mode=exact p=- N=4\n1/1\n0/1\n1/84\n5/1764\n");
        match read_series(text.as_bytes()).unwrap() {
            SeriesFile::Exact(7, back) => assert_eq!(back, s),
            _ => panic!("wrong mode"),
        }
    }

    #[test]
    fn modular_roundtrip() {
        let p = nth_prime(0);
        let s = lgf_series_mod(5, 30, p).unwrap();
        let text = series_to_string(5, &s);
        assert!(text.starts_with(&format!("LGF d=5 mode=mod p={p} N=30\n")));
        match read_series(text.as_bytes()).unwrap() {
            SeriesFile::Mod(5, back) => assert_eq!(back, s),
            _ => panic!("wrong mode"),
        }
    }

    #[test]
    fn rejects_truncated_files() {
        assert!(read_series("LGF d=3 mode=exact p=- N=3\n1/1\n".as_bytes()).is_err());
        assert!(read_series("ODE d=3\n".as_bytes()).is_err());
    }
}
