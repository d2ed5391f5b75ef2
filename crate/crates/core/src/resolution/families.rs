//! Canonical generator families: the square tower on an odd generator, the
//! paired tower on a torsion representative, the even power-relation tower,
//! and the binomial tower linking a torsion class to the cup powers of an
//! odd class. Each family satisfies d^2 = 0 identically.

use super::{HirschResolution, ResolutionError, RING};
use crate::algebra::{
    cup2_eval, sign, Cup1Table, CupContext, Derivation, Element, GenId, GeneratorDecl, Generators,
    ModuleTag, Monomial,
};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SequenceKind {
    MSymmetric,
    MSymmetric2,
    MEven,
    OneOne,
}

#[derive(Debug, Clone)]
pub struct SequenceFamily {
    pub kind: SequenceKind,
    /// tower members indexed from 0 (index 0 = the seed generator)
    pub members: Vec<GenId>,
    /// primed partners for the torsion pair tower (index 0 = the base
    /// degree-0 representative)
    pub primes: Vec<GenId>,
}

/// Square tower on an odd degree-0 generator: d x_n = sum_{i+j=n-1} e_ij x_i x_j,
/// e_ij = 2 when the square survives in the target algebra and i, j are even.
/// In that branch x_1 is the cup diagonal itself: x_1 = -(x0 cup1 x0).
pub fn family_msymmetric(
    gens: &mut Generators,
    d: &mut Derivation,
    h: &mut Derivation,
    x0: GenId,
    base_name: &str,
    truncation: i32,
    square_survives: bool,
    table: Option<&mut Cup1Table>,
) -> Result<SequenceFamily, ResolutionError> {
    let deg0 = gens.degree(x0);
    assert!(deg0.rem_euclid(2) == 1, "square tower needs an odd seed");
    let mut members = vec![x0];
    let mut n = 1usize;
    loop {
        let deg = (n as i32 + 1) * deg0 - n as i32;
        if deg > truncation {
            break;
        }
        let tag = if square_survives && n == 1 { ModuleTag::E } else { ModuleTag::M };
        let id = gens.add(GeneratorDecl {
            name: format!("{base_name}{n}"),
            resolution_degree: -(n as i32),
            internal_degree: (n as i32 + 1) * gens.decl(x0).internal_degree,
            module_tag: tag,
        });
        let mut img = Element::zero(RING);
        for i in 0..n {
            let j = n - 1 - i;
            let coeff = if square_survives && i % 2 == 0 && j % 2 == 0 {
                BigInt::from(2)
            } else {
                BigInt::one()
            };
            img.add_term(Monomial(vec![members[i], members[j]]), coeff);
        }
        d.set(id, img);
        h.set(id, Element::zero(RING));
        members.push(id);
        n += 1;
    }
    if square_survives {
        if members.len() > 1 {
            if let Some(table) = table {
                // x0 cup1 x0 = -x1
                table.set(x0, x0, Element::generator(members[1], RING).neg());
            }
        }
    }
    Ok(SequenceFamily { kind: SequenceKind::MSymmetric, members, primes: Vec::new() })
}

pub fn append_msymmetric(
    gens: &mut Generators,
    d: &mut Derivation,
    h: &mut Derivation,
    x0: GenId,
    base_name: &str,
    truncation: i32,
    square_survives: bool,
) -> Result<SequenceFamily, ResolutionError> {
    family_msymmetric(gens, d, h, x0, base_name, truncation, square_survives, None)
}

/// Paired tower on a torsion representative xt0 (d xt0 = lambda * x0'):
/// d xt_n = sum xt_i xt_j + lambda xp_n, d xp_n = -(1/lambda) d(sum xt_i xt_j).
pub fn family_msymmetric2(
    gens: &mut Generators,
    d: &mut Derivation,
    h: &mut Derivation,
    xt0: GenId,
    x0_prime: GenId,
    lambda: BigInt,
    base_name: &str,
    truncation: i32,
) -> Result<SequenceFamily, ResolutionError> {
    let deg0 = gens.degree(xt0);
    assert!(deg0.rem_euclid(2) == 1, "pair tower needs an odd torsion representative");
    let mut members = vec![xt0];
    let mut primes = vec![x0_prime];
    let int0 = gens.decl(xt0).internal_degree;
    let res0 = gens.decl(xt0).resolution_degree;
    let mut n = 1usize;
    loop {
        let deg = (n as i32 + 1) * deg0 - n as i32;
        if deg + 1 > truncation {
            break;
        }
        let xt = gens.add(GeneratorDecl {
            name: format!("{base_name}{n}t"),
            resolution_degree: (n as i32 + 1) * res0 - n as i32,
            internal_degree: (n as i32 + 1) * int0,
            module_tag: ModuleTag::M,
        });
        let xp = gens.add(GeneratorDecl {
            name: format!("{base_name}{n}p"),
            resolution_degree: (n as i32 + 1) * res0 - n as i32 + 1,
            internal_degree: (n as i32 + 1) * int0,
            module_tag: ModuleTag::M,
        });
        let mut quad = Element::zero(RING);
        for i in 0..n {
            let j = n - 1 - i;
            quad.add_term(Monomial(vec![members[i], members[j]]), BigInt::one());
        }
        // d(sum xt_i xt_j) = lambda * sum (xp_i xt_j - xt_i xp_j), so the
        // primed image is exactly minus that sum
        let mut prime_img = Element::zero(RING);
        for i in 0..n {
            let j = n - 1 - i;
            prime_img.add_term(Monomial(vec![primes[i], members[j]]), -BigInt::one());
            prime_img.add_term(Monomial(vec![members[i], primes[j]]), BigInt::one());
        }
        let mut img = quad;
        img.add_term(Monomial::single(xp), lambda.clone());
        d.set(xt, img);
        h.set(xt, Element::zero(RING));
        d.set(xp, prime_img);
        h.set(xp, Element::zero(RING));
        members.push(xt);
        primes.push(xp);
        n += 1;
    }
    // verify the divisibility that justifies the primed images
    let queue: Vec<GenId> = members.iter().skip(1).cloned().collect();
    for &xt in &queue {
        let img = d.image(xt).unwrap().clone();
        let quad = img.decomposable_part();
        let dq = d.apply(&quad, gens).map_err(ResolutionError::Algebra)?;
        for c in dq.terms.values() {
            if !(c % &lambda).is_zero() {
                return Err(ResolutionError::NonDivisibleBoundary(lambda.clone()));
            }
        }
    }
    Ok(SequenceFamily { kind: SequenceKind::MSymmetric2, members, primes })
}

pub fn append_msymmetric2(
    gens: &mut Generators,
    d: &mut Derivation,
    h: &mut Derivation,
    xt0: GenId,
    x0_prime: GenId,
    lambda: BigInt,
    base_name: &str,
    truncation: i32,
) -> Result<SequenceFamily, ResolutionError> {
    family_msymmetric2(gens, d, h, xt0, x0_prime, lambda, base_name, truncation)
}

/// Tower for an even generator with the power relation lambda * y^m = 0:
/// d y_{2k+1} = sum_{i+j=k-1} y_{2i+1} y_{2j+1}
///            - lambda * sum_{i_1+..+i_m=k} y_{2i_1} ... y_{2i_m},
/// d y_{2k}   = sum_{i+j=2k-1} (-1)^{i+1} y_i y_j.
pub fn family_m_even(
    gens: &mut Generators,
    d: &mut Derivation,
    h: &mut Derivation,
    y0: GenId,
    base_name: &str,
    m: u32,
    lambda: &BigInt,
    truncation: i32,
) -> Result<SequenceFamily, ResolutionError> {
    assert!(m >= 2);
    let deg0 = gens.degree(y0);
    assert!(deg0.rem_euclid(2) == 0, "power tower needs an even seed");
    let int0 = gens.decl(y0).internal_degree;
    let mut members = vec![y0];
    let mut degs = vec![deg0];
    let mut n = 1usize;
    loop {
        let deg = if n % 2 == 1 {
            let k = (n as i32 - 1) / 2;
            (k + 1) * (m as i32) * deg0 - n as i32
        } else {
            degs[n - 1] + deg0 - 1
        };
        if deg > truncation || deg < 1 {
            break;
        }
        let internal = if n % 2 == 1 {
            let k = (n as i32 - 1) / 2;
            (k + 1) * (m as i32) * int0
        } else {
            gens.decl(members[n - 1]).internal_degree + int0
        };
        let res = internal - deg;
        let id = gens.add(GeneratorDecl {
            name: format!("{base_name}{n}"),
            resolution_degree: -res,
            internal_degree: internal,
            module_tag: ModuleTag::M,
        });
        let mut img = Element::zero(RING);
        if n % 2 == 1 {
            let k = (n - 1) / 2;
            if k >= 1 {
                for i in 0..k {
                    let j = k - 1 - i;
                    img.add_term(
                        Monomial(vec![members[2 * i + 1], members[2 * j + 1]]),
                        BigInt::one(),
                    );
                }
            }
            // all ordered m-tuples summing to k
            let tuples = ordered_tuples(m as usize, k);
            for tup in tuples {
                let word: Vec<GenId> = tup.iter().map(|&i| members[2 * i]).collect();
                img.add_term(Monomial(word), -lambda.clone());
            }
        } else {
            let k = n / 2;
            for i in 0..=(2 * k - 1) {
                let j = 2 * k - 1 - i;
                img.add_term(
                    Monomial(vec![members[i], members[j]]),
                    sign(i as i32 + 1),
                );
            }
        }
        d.set(id, img);
        h.set(id, Element::zero(RING));
        members.push(id);
        degs.push(deg);
        n += 1;
    }
    Ok(SequenceFamily { kind: SequenceKind::MEven, members, primes: Vec::new() })
}

pub fn append_m_even(
    gens: &mut Generators,
    d: &mut Derivation,
    h: &mut Derivation,
    y0: GenId,
    base_name: &str,
    m: u32,
    lambda: &BigInt,
    truncation: i32,
) -> Result<SequenceFamily, ResolutionError> {
    family_m_even(gens, d, h, y0, base_name, m, lambda, truncation)
}

fn ordered_tuples(len: usize, total: usize) -> Vec<Vec<usize>> {
    if len == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in ordered_tuples(len - 1, total - first) {
            let mut t = vec![first];
            t.append(&mut rest);
            out.push(t);
        }
    }
    out
}

/// Binomial tower linking a torsion representative b0 (d b0 = lambda x0,
/// x0 odd) to the cup powers of x0. The coefficients are solved exactly so
/// that each level is a primitive cycle; members are appended to the ledger.
pub fn family_oneone(
    res: &mut HirschResolution,
    b0: GenId,
    x0: GenId,
    lambda: &BigInt,
    base_name: &str,
) -> Result<SequenceFamily, ResolutionError> {
    let dh = res.dh();
    let ctx = res.cup_ctx(&dh);
    // cup powers of x0 up to truncation
    let x = Element::generator(x0, RING);
    let mut powers = vec![x.clone()];
    loop {
        let next = match ctx.cup1(&x, powers.last().unwrap()) {
            Ok(v) => v,
            Err(e) => return Err(ResolutionError::Algebra(e)),
        };
        if next.is_zero() {
            break;
        }
        powers.push(next);
    }
    let mut members = vec![b0];
    let mut n = 1usize;
    loop {
        if n >= powers.len() {
            break;
        }
        // span: b_i x^{cup j} for i + j = n, j >= 1, plus x^{cup (n+1)}
        let mut span: Vec<Element> = Vec::new();
        for i in 0..n {
            let j = n - i;
            let bi = Element::generator(members[i], RING);
            let term = crate::algebra::mul_elements(&bi, &powers[j - 1], &res.gens);
            if term.is_zero() {
                break;
            }
            span.push(term);
        }
        if span.len() < n {
            break;
        }
        span.push(powers[n].clone());
        // solve for an integral cycle with nonzero top coefficient
        let deg = span[0].degree(&res.gens).unwrap();
        let words = res.words_of_total_degree(deg + 1);
        let idx: std::collections::HashMap<&Monomial, usize> =
            words.iter().enumerate().map(|(i, m)| (m, i)).collect();
        let mut mat = crate::linalg::IntMatrix::zero(words.len(), span.len());
        for (j, e) in span.iter().enumerate() {
            let img = res.d.apply(e, &res.gens).map_err(ResolutionError::Algebra)?;
            for (mm, c) in &img.terms {
                if let Some(&i) = idx.get(mm) {
                    mat.add_to(i, j, c);
                }
            }
        }
        let kernel = crate::linalg::kernel_basis(&mat);
        // deterministic choice: minimal positive top coefficient, primitive
        let mut pick: Option<Vec<BigInt>> = None;
        for v in &kernel {
            if v[span.len() - 1].is_zero() {
                continue;
            }
            let cand = if v[span.len() - 1].is_negative() {
                v.iter().map(|c| -c).collect::<Vec<_>>()
            } else {
                v.clone()
            };
            match &pick {
                None => pick = Some(cand),
                Some(p) if cand[span.len() - 1] < p[span.len() - 1] => pick = Some(cand),
                _ => {}
            }
        }
        let combo = match pick {
            Some(p) => p,
            None => break,
        };
        let mut cycle = Element::zero(RING);
        for (j, c) in combo.iter().enumerate() {
            cycle = cycle.add(&span[j].scale(c));
        }
        // lambda-linkage: the top coefficient times lambda must be divisible
        // by the content so the tower stays primitive
        let content = cycle.content();
        let cycle = if content.is_one() || content.is_zero() {
            cycle
        } else {
            cycle.divide_exact(&content)
        };
        let internal = cycle
            .terms
            .keys()
            .map(|m| m.0.iter().map(|&g| res.gens.decl(g).internal_degree).sum::<i32>())
            .max()
            .unwrap();
        let id = res.gens.add(GeneratorDecl {
            name: format!("{base_name}o{n}"),
            resolution_degree: deg - internal,
            internal_degree: internal,
            module_tag: ModuleTag::M,
        });
        res.d.set(id, cycle);
        res.h.set(id, Element::zero(RING));
        members.push(id);
        n += 1;
    }
    let _ = lambda;
    Ok(SequenceFamily { kind: SequenceKind::OneOne, members, primes: Vec::new() })
}

/// Perturbation action on a square tower from supplied transgressive data:
/// h x_n = xt_n + sum_{i_1+...+i_r+r=n+1} eps (xt_{i_1..i_{r-1}} cup1 x_{i_r}
///        - xt_{i_1..i_r}), with xt_{i_1..i_r} = (-1)^r xt_{i_1} cup2 ... cup2 xt_{i_r}.
pub fn h_action_msymmetric(
    family: &SequenceFamily,
    tilde: &[Element],
    gens: &Generators,
    table: &Cup1Table,
    dh: &Derivation,
    h: &mut Derivation,
    square_survives: bool,
) -> Result<(), ResolutionError> {
    assert_eq!(family.kind, SequenceKind::MSymmetric);
    if tilde.len() < family.members.len() {
        return Err(ResolutionError::InconsistentHData(
            "tilde data shorter than the tower".to_string(),
        ));
    }
    let ctx = CupContext { gens, table, dh };
    for n in 1..family.members.len() {
        let mut img = tilde[n].clone();
        for tuple in nondecreasing_tuples(n) {
            let r = tuple.len();
            let eps = if square_survives
                && tuple.iter().filter(|&&i| i % 2 == 0).count() >= 2
            {
                BigInt::from(2)
            } else {
                BigInt::one()
            };
            // xt_{i_1..i_k} carries (-1)^k for k >= 2, single indices none
            let prefix = fold_cup2(&tuple[..r - 1], tilde, table, gens)?;
            let full = fold_cup2(&tuple, tilde, table, gens)?;
            let prefix = if r - 1 >= 2 { prefix.scale(&sign(r as i32 - 1)) } else { prefix };
            let full = full.scale(&sign(r as i32));
            if !prefix.is_zero() {
                let cup = ctx
                    .cup1(&prefix, &Element::generator(family.members[tuple[r - 1]], RING))
                    .map_err(ResolutionError::Algebra)?;
                img = img.add(&cup.scale(&eps));
            }
            if !full.is_zero() {
                img = img.sub(&full.scale(&eps));
            }
        }
        h.set(family.members[n], img);
    }
    Ok(())
}

/// Nondecreasing index tuples (i_1 <= ... <= i_r < n) with sum + r = n + 1,
/// r >= 2.
fn nondecreasing_tuples(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for r in 2..=(n + 1) {
        if r > n + 1 {
            break;
        }
        let total = n + 1 - r;
        let mut cur = Vec::new();
        gather(r, total, 0, n, &mut cur, &mut out);
    }
    out
}

fn gather(r: usize, total: usize, min: usize, n: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if r == 0 {
        if total == 0 {
            out.push(cur.clone());
        }
        return;
    }
    for i in min..n {
        if i * r > total {
            break;
        }
        cur.push(i);
        gather(r - 1, total - i, i, n, cur, out);
        cur.pop();
    }
}

/// Iterated cup-two product of tilde values (left fold); empty = unit is not
/// meaningful here, so a single value returns itself.
fn fold_cup2(
    idxs: &[usize],
    tilde: &[Element],
    table: &Cup1Table,
    gens: &Generators,
) -> Result<Element, ResolutionError> {
    if idxs.is_empty() {
        return Ok(Element::zero(RING));
    }
    let mut acc = tilde[idxs[0]].clone();
    for &i in &idxs[1..] {
        if acc.is_zero() || tilde[i].is_zero() {
            return Ok(Element::zero(RING));
        }
        acc = cup2_eval(&acc, &tilde[i], table, gens).map_err(|e| match e {
            crate::algebra::AlgebraError::NotBasisGenerator(s) => {
                ResolutionError::InconsistentHData(format!("cup2 fold needs basis generators: {s}"))
            }
            other => ResolutionError::Algebra(other),
        })?;
    }
    Ok(acc)
}
