//! Deterministic, diffable ledger file for a built resolution, and the
//! element-expression grammar shared with presentation `h` lines.
//!
//! ```text
//! resolution <name>
//! truncation <N>
//! generator <name> res <r> int <m> tag <E|T|M>
//! rho <gen> = <presentation generator>
//! d <gen> = <element>
//! h <gen> = <element>
//! cup1 <a> <b> = <element>
//! cup2 <a> <b> = <element>
//! ```
//!
//! Elements are `+`/`-` separated terms, each `[coeff] g1*g2*...*gk` or a
//! bare integer for the unit word.

use super::{HirschResolution, ResolutionError, RING};
use crate::algebra::{Cup1Table, Derivation, Element, GeneratorDecl, Generators, ModuleTag, Monomial};
use crate::linalg::CoefficientRing;
use crate::presentation::AlgebraPresentation;
use num_bigint::BigInt;
use num_traits::One;
use std::collections::BTreeMap;
use std::fmt::Write as _;

pub fn print_resolution(res: &HirschResolution) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "resolution {}", res.name);
    let _ = writeln!(s, "truncation {}", res.truncation);
    for g in res.gens.ids() {
        let d = res.gens.decl(g);
        let _ = writeln!(
            s,
            "generator {} res {} int {} tag {}",
            d.name, d.resolution_degree, d.internal_degree, d.module_tag
        );
    }
    for (g, pi) in &res.rho {
        let _ = writeln!(
            s,
            "rho {} = {}",
            res.gens.name(*g),
            res.pres.generators[*pi].name
        );
    }
    for g in res.gens.ids() {
        if let Some(img) = res.d.image(g) {
            if !img.is_zero() {
                let _ = writeln!(s, "d {} = {}", res.gens.name(g), img.format(&res.gens));
            }
        }
    }
    for g in res.gens.ids() {
        if let Some(img) = res.h.image(g) {
            if !img.is_zero() {
                let _ = writeln!(s, "h {} = {}", res.gens.name(g), img.format(&res.gens));
            }
        }
    }
    let mut cup1: BTreeMap<(String, String), String> = BTreeMap::new();
    for (&(a, b), v) in &res.table.pairs {
        cup1.insert(
            (res.gens.name(a).to_string(), res.gens.name(b).to_string()),
            v.format(&res.gens),
        );
    }
    for ((a, b), v) in cup1 {
        let _ = writeln!(s, "cup1 {a} {b} = {v}");
    }
    let mut cup2: BTreeMap<(String, String), String> = BTreeMap::new();
    for (&(a, b), v) in &res.table.cup2_pairs {
        cup2.insert(
            (res.gens.name(a).to_string(), res.gens.name(b).to_string()),
            v.format(&res.gens),
        );
    }
    for ((a, b), v) in cup2 {
        let _ = writeln!(s, "cup2 {a} {b} = {v}");
    }
    s
}

pub fn parse_resolution(
    text: &str,
    pres: &AlgebraPresentation,
) -> Result<HirschResolution, ResolutionError> {
    let mut name = String::new();
    let mut truncation = 0i32;
    let mut gens = Generators::new(0);
    let mut decls: Vec<GeneratorDecl> = Vec::new();
    // two passes: declarations first, then images
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let lineno = ln + 1;
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks[0] {
            "resolution" => {
                name = toks
                    .get(1)
                    .ok_or_else(|| ResolutionError::LedgerParse(lineno, "missing name".into()))?
                    .to_string();
            }
            "truncation" => {
                truncation = toks
                    .get(1)
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| ResolutionError::LedgerParse(lineno, "bad truncation".into()))?;
            }
            "generator" => {
                if toks.len() != 8 || toks[2] != "res" || toks[4] != "int" || toks[6] != "tag" {
                    return Err(ResolutionError::LedgerParse(lineno, "malformed generator line".into()));
                }
                let res_deg: i32 = toks[3]
                    .parse()
                    .map_err(|_| ResolutionError::LedgerParse(lineno, "bad res degree".into()))?;
                let int_deg: i32 = toks[5]
                    .parse()
                    .map_err(|_| ResolutionError::LedgerParse(lineno, "bad int degree".into()))?;
                let tag = match toks[7] {
                    "E" => ModuleTag::E,
                    "T" => ModuleTag::T,
                    "M" => ModuleTag::M,
                    other => {
                        return Err(ResolutionError::LedgerParse(lineno, format!("bad tag {other}")))
                    }
                };
                decls.push(GeneratorDecl {
                    name: toks[1].to_string(),
                    resolution_degree: res_deg,
                    internal_degree: int_deg,
                    module_tag: tag,
                });
            }
            _ => {}
        }
    }
    gens.truncation = truncation;
    for d in decls {
        gens.add(d);
    }
    let mut d = Derivation::new(RING);
    let mut h = Derivation::new(RING);
    for g in gens.ids() {
        d.set(g, Element::zero(RING));
        h.set(g, Element::zero(RING));
    }
    let mut table = Cup1Table::default();
    let mut rho = BTreeMap::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let lineno = ln + 1;
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks[0] {
            "resolution" | "truncation" | "generator" => {}
            "rho" => {
                if toks.len() != 4 || toks[2] != "=" {
                    return Err(ResolutionError::LedgerParse(lineno, "malformed rho line".into()));
                }
                let g = gens.lookup(toks[1]).ok_or_else(|| {
                    ResolutionError::LedgerParse(lineno, format!("unknown generator {}", toks[1]))
                })?;
                let pi = pres.gen_index(toks[3]).ok_or_else(|| {
                    ResolutionError::LedgerParse(lineno, format!("unknown target {}", toks[3]))
                })?;
                rho.insert(g, pi);
            }
            "d" | "h" => {
                let (_, rest) = line.split_once(' ').unwrap();
                let (lhs, rhs) = rest.split_once('=').ok_or_else(|| {
                    ResolutionError::LedgerParse(lineno, "missing '='".into())
                })?;
                let g = gens.lookup(lhs.trim()).ok_or_else(|| {
                    ResolutionError::LedgerParse(lineno, format!("unknown generator {}", lhs.trim()))
                })?;
                let e = parse_element(rhs.trim(), &gens, RING)
                    .map_err(|m| ResolutionError::LedgerParse(lineno, m))?;
                if toks[0] == "d" {
                    d.set(g, e);
                } else {
                    h.set(g, e);
                }
            }
            "cup1" | "cup2" => {
                if toks.len() < 5 || toks[3] != "=" {
                    return Err(ResolutionError::LedgerParse(lineno, "malformed cup line".into()));
                }
                let a = gens.lookup(toks[1]).ok_or_else(|| {
                    ResolutionError::LedgerParse(lineno, format!("unknown generator {}", toks[1]))
                })?;
                let b = gens.lookup(toks[2]).ok_or_else(|| {
                    ResolutionError::LedgerParse(lineno, format!("unknown generator {}", toks[2]))
                })?;
                let rhs = line.splitn(2, '=').nth(1).unwrap().trim();
                let e = parse_element(rhs, &gens, RING)
                    .map_err(|m| ResolutionError::LedgerParse(lineno, m))?;
                if toks[0] == "cup1" {
                    table.set(a, b, e);
                } else {
                    table.set_cup2(a, b, e);
                }
            }
            other => {
                return Err(ResolutionError::LedgerParse(lineno, format!("unknown directive {other}")));
            }
        }
    }
    Ok(HirschResolution {
        name,
        gens,
        d,
        h,
        table,
        rho,
        pres: pres.clone(),
        truncation,
    })
}

/// Parse an element expression over the ledger: `2 a*b - c + 3`.
pub fn parse_element(text: &str, gens: &Generators, ring: CoefficientRing) -> Result<Element, String> {
    let text = text.trim();
    let mut out = Element::zero(ring);
    if text == "0" {
        return Ok(out);
    }
    let mut terms: Vec<(i32, String)> = Vec::new();
    let mut current = String::new();
    let mut sign = 1i32;
    for c in text.chars() {
        match c {
            '+' => {
                if !current.trim().is_empty() {
                    terms.push((sign, current.trim().to_string()));
                }
                current = String::new();
                sign = 1;
            }
            '-' => {
                if !current.trim().is_empty() {
                    terms.push((sign, current.trim().to_string()));
                    sign = 1;
                }
                sign = -sign;
                current = String::new();
            }
            _ => current.push(c),
        }
    }
    if !current.trim().is_empty() {
        terms.push((sign, current.trim().to_string()));
    }
    if terms.is_empty() {
        return Err("empty element".to_string());
    }
    for (sgn, term) in terms {
        let mut coeff = BigInt::from(sgn);
        let mut word = Vec::new();
        let mut saw_unit = false;
        for factor in term.split(|c: char| c == '*' || c.is_whitespace()) {
            let f = factor.trim();
            if f.is_empty() {
                continue;
            }
            if f == "1" {
                saw_unit = true;
                continue;
            }
            if f.chars().all(|c| c.is_ascii_digit()) {
                coeff *= f.parse::<BigInt>().map_err(|e| e.to_string())?;
                continue;
            }
            let g = gens
                .lookup(f)
                .ok_or_else(|| format!("unknown generator {f}"))?;
            word.push(g);
        }
        let _ = saw_unit;
        out.add_term(Monomial(word), coeff);
    }
    let _ = BigInt::one();
    Ok(out)
}
