//! Resolution construction: degree-0 generators from the presentation,
//! canonical towers for squares, power relations and torsion pairs, the
//! cup-one layer with lazily closed table entries, and a syzygy sweep that
//! restores row exactness degree by degree.

use super::families::{append_m_even, append_msymmetric, append_msymmetric2};
use super::{HirschResolution, ResolutionError, RING};
use crate::algebra::{
    epsilon_prefix, sign, Cup1Table, Derivation, Element, GenId, GeneratorDecl, Generators,
    ModuleTag, Monomial,
};
use crate::linalg::{kernel_basis, lattice_quotient, IntMatrix, LatticeQuotient};
use crate::presentation::{AlgebraPresentation, HPolynomial};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::collections::{BinaryHeap, HashMap};

/// A request to materialize cup-one structure before the sweep runs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SeedSpec {
    /// Right-nested cup-one powers of the named generator up to truncation.
    PowerChain(String),
    /// Cup entries between the power chains of two named generators.
    MixedPair(String, String),
}

#[derive(Debug, Clone, Default)]
pub struct BuildOptions {
    pub seeds: Vec<SeedSpec>,
    /// create diagonal cup entries (and cup-two partners) for every
    /// degree-0 generator, not just seeded ones
    pub all_diagonals: bool,
}

struct Builder {
    gens: Generators,
    d: Derivation,
    h: Derivation,
    table: Cup1Table,
    rho: HashMap<GenId, usize>,
    truncation: i32,
    /// generators whose differential is still pending, keyed by degree
    pending: BinaryHeap<std::cmp::Reverse<(i32, GenId)>>,
    /// cup generator -> the pair it was created for
    origin: HashMap<GenId, (GenId, GenId)>,
}

impl Builder {
    fn add_gen(&mut self, decl: GeneratorDecl) -> GenId {
        self.gens.add(decl)
    }

    /// Create the cup generator for a pair, with the graded-commutation
    /// mirror entry for distinct pairs and the cup-two partner for even
    /// diagonals. Returns None when the result would exceed truncation.
    fn ensure_pair(&mut self, a: GenId, b: GenId) -> Option<Element> {
        if let Some(v) = self.table.get(a, b) {
            return Some(v.clone());
        }
        let deg = self.gens.degree(a) + self.gens.degree(b) - 1;
        if deg > self.truncation {
            return None;
        }
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let name = format!("c_{}_{}", self.gens.name(lo), self.gens.name(hi));
        let decl = GeneratorDecl {
            name,
            resolution_degree: self.gens.decl(lo).resolution_degree
                + self.gens.decl(hi).resolution_degree
                - 1,
            internal_degree: self.gens.decl(lo).internal_degree + self.gens.decl(hi).internal_degree,
            module_tag: ModuleTag::E,
        };
        let e = self.add_gen(decl);
        self.pending.push(std::cmp::Reverse((deg, e)));
        self.origin.insert(e, (lo, hi));
        let elem = Element::generator(e, RING);
        self.table.set(lo, hi, elem.clone());
        if lo != hi {
            // b ⌣₁ a = (-1)^{(|a|+1)(|b|+1)} a ⌣₁ b
            let s = sign((self.gens.degree(lo) + 1) * (self.gens.degree(hi) + 1));
            self.table.set(hi, lo, elem.scale(&s));
        } else if self.gens.degree(lo).rem_euclid(2) == 0 {
            // even diagonal: cup-two partner t with d t = a⌣₁a
            let tname = format!("t_{}", self.gens.name(lo));
            let tdecl = GeneratorDecl {
                name: tname,
                resolution_degree: 2 * self.gens.decl(lo).resolution_degree - 2,
                internal_degree: 2 * self.gens.decl(lo).internal_degree,
                module_tag: ModuleTag::T,
            };
            let t = self.add_gen(tdecl);
            self.d.set(t, elem.clone());
            self.h.set(t, Element::zero(RING));
            self.table.set_cup2(lo, lo, Element::generator(t, RING));
        }
        Some(self.table.get(a, b).cloned().unwrap())
    }

    /// Cup-one of words with on-demand pair creation; results above the
    /// truncation degree are dropped.
    fn cup1_create(&mut self, left: &[GenId], right: &[GenId]) -> Element {
        if left.is_empty() || right.is_empty() {
            return Element::zero(RING);
        }
        let out_deg = self.gens.word_degree(left) + self.gens.word_degree(right) - 1;
        if out_deg > self.truncation {
            return Element::zero(RING);
        }
        if right.len() >= 2 {
            let c_deg = self.gens.word_degree(left);
            let a = &right[..1];
            let b = &right[1..];
            let a_deg = self.gens.degree(right[0]);
            let ca = self.cup1_create(left, a);
            let cb = self.cup1_create(left, b);
            let mut out = crate::algebra::mul_word_right(&ca, b, &self.gens);
            out = out.add(
                &crate::algebra::mul_word_left(a, &cb, &self.gens).scale(&sign((c_deg + 1) * a_deg)),
            );
            return out;
        }
        let c = right[0];
        if left.len() == 1 {
            return match self.ensure_pair(left[0], c) {
                Some(v) => v,
                None => Element::zero(RING),
            };
        }
        let a = &left[..1];
        let b = &left[1..];
        let a_deg = self.gens.degree(left[0]);
        let b_deg = self.gens.word_degree(b);
        let c_deg = self.gens.degree(c);
        let bc = self.cup1_create(b, &[c]);
        let ac = self.cup1_create(a, &[c]);
        let mut out = crate::algebra::mul_word_left(a, &bc, &self.gens);
        out = out.add(
            &crate::algebra::mul_word_right(&ac, b, &self.gens).scale(&sign(b_deg * (c_deg + 1))),
        );
        let dh_c = {
            let dc = self.d.image(c).cloned().unwrap_or_else(|| Element::zero(RING));
            let hc = self.h.image(c).cloned().unwrap_or_else(|| Element::zero(RING));
            dc.add(&hc)
        };
        for (word, coeff) in dh_c.terms.clone() {
            let q = word.len();
            if q < 2 {
                continue;
            }
            let degs: Vec<i32> = word.0.iter().map(|&g| self.gens.degree(g)).collect();
            for i in 1..=q {
                for j in (i + 1)..=q {
                    let aci = self.cup1_create(a, &word.0[i - 1..i]);
                    if aci.is_zero() {
                        continue;
                    }
                    let bcj = self.cup1_create(b, &word.0[j - 1..j]);
                    if bcj.is_zero() {
                        continue;
                    }
                    let e2 = (a_deg + 1) * (epsilon_prefix(&degs, i - 1) + i as i32 + 1)
                        + (b_deg + 1) * (epsilon_prefix(&degs, j - 1) + j as i32 + 1);
                    let mut piece = crate::algebra::mul_word_left(&word.0[..i - 1], &aci, &self.gens);
                    piece = crate::algebra::mul_word_right(&piece, &word.0[i..j - 1], &self.gens);
                    piece = crate::algebra::mul_elements(&piece, &bcj, &self.gens);
                    piece = crate::algebra::mul_word_right(&piece, &word.0[j..], &self.gens);
                    out = out.add(&piece.scale(&(sign(e2) * &coeff)));
                }
            }
        }
        out
    }

    fn cup1_create_elements(&mut self, x: &Element, y: &Element) -> Element {
        let mut out = Element::zero(RING);
        for (mx, cx) in x.terms.clone() {
            for (my, cy) in y.terms.clone() {
                let v = self.cup1_create(&mx.0, &my.0);
                out = out.add(&v.scale(&(&cx * cy)));
            }
        }
        out
    }

    /// d_h of an element via the stored generator images.
    fn dh_apply(&self, e: &Element) -> Element {
        let dh = self.d.sum(&self.h);
        dh.apply(e, &self.gens).expect("all generator images set")
    }

    /// Compute the differential of a pending cup generator from the Hirsch
    /// identity: d(a⌣₁b) = da⌣₁b - (-1)^{|a|} a⌣₁db + (-1)^{|a|}ab - (-1)^{|a|(|b|+1)}ba.
    /// The result is split into the d part (resolution shift +1) and the h
    /// part (higher shifts).
    fn resolve_pending(&mut self) {
        while let Some(std::cmp::Reverse((_, e))) = self.pending.pop() {
            let (a, b) = match self.origin.get(&e) {
                Some(&p) => p,
                None => continue,
            };
            let da = self.dh_apply(&Element::generator(a, RING));
            let db = self.dh_apply(&Element::generator(b, RING));
            let deg_a = self.gens.degree(a);
            let deg_b = self.gens.degree(b);
            let ea = Element::generator(a, RING);
            let eb = Element::generator(b, RING);
            let mut img = self.cup1_create_elements(&da, &eb);
            img = img.add(&self.cup1_create_elements(&ea, &db).scale(&sign(deg_a + 1)));
            img = img.add(&crate::algebra::mul_elements(&ea, &eb, &self.gens).scale(&sign(deg_a)));
            img = img.sub(
                &crate::algebra::mul_elements(&eb, &ea, &self.gens).scale(&sign(deg_a * (deg_b + 1))),
            );
            // split by resolution-degree shift
            let res_e = self.gens.decl(e).resolution_degree;
            let mut d_part = Element::zero(RING);
            let mut h_part = Element::zero(RING);
            for (m, c) in img.terms {
                let res: i32 = m.0.iter().map(|&g| self.gens.decl(g).resolution_degree).sum();
                if res == res_e + 1 {
                    d_part.add_term(m, c);
                } else {
                    h_part.add_term(m, c);
                }
            }
            self.d.set(e, d_part);
            self.h.set(e, h_part);
        }
    }

    /// Materialize the right-nested power chain of a generator; returns the
    /// chain elements (power 1 = the generator itself).
    fn power_chain(&mut self, base: GenId) -> Vec<Element> {
        let mut chain = vec![Element::generator(base, RING)];
        loop {
            let prev = chain.last().unwrap().clone();
            let next = self.cup1_create_elements(&Element::generator(base, RING), &prev);
            if next.is_zero() {
                break;
            }
            chain.push(next);
        }
        chain
    }
}

/// Build the resolution of a presented algebra up to total degree
/// `truncation`, with optional cup-one seeds for the growth machinery.
pub fn build_resolution(
    pres: &AlgebraPresentation,
    truncation: i32,
    options: &BuildOptions,
) -> Result<HirschResolution, ResolutionError> {
    pres.validate()
        .map_err(|e| ResolutionError::Validation(e.to_string()))?;
    let max_rel_degree = pres
        .relations
        .iter()
        .filter_map(|r| pres.polynomial_degree(r))
        .max()
        .unwrap_or(0);
    if truncation < max_rel_degree + 2 {
        return Err(ResolutionError::TruncationTooLow(truncation, max_rel_degree + 2));
    }

    let mut b = Builder {
        gens: Generators::new(truncation),
        d: Derivation::new(RING),
        h: Derivation::new(RING),
        table: Cup1Table::default(),
        rho: HashMap::new(),
        truncation,
        pending: BinaryHeap::new(),
        origin: HashMap::new(),
    };

    // degree-0 generators, sorted by (degree, name)
    let mut order: Vec<usize> = (0..pres.generators.len()).collect();
    order.sort_by_key(|&i| (pres.generators[i].degree, pres.generators[i].name.clone()));
    let mut rep: HashMap<usize, GenId> = HashMap::new();
    for &i in &order {
        let g = &pres.generators[i];
        let id = b.add_gen(GeneratorDecl {
            name: format!("{}0", g.name),
            resolution_degree: 0,
            internal_degree: g.degree,
            module_tag: ModuleTag::M,
        });
        b.d.set(id, Element::zero(RING));
        b.h.set(id, Element::zero(RING));
        b.rho.insert(id, i);
        rep.insert(i, id);
    }

    // torsion representatives: d(rep) = order * g0
    let mut torsion_rep: HashMap<usize, GenId> = HashMap::new();
    for &i in &order {
        let g = &pres.generators[i];
        if g.order == 0 {
            continue;
        }
        let id = b.add_gen(GeneratorDecl {
            name: format!("{}0t", g.name),
            resolution_degree: -1,
            internal_degree: g.degree,
            module_tag: ModuleTag::M,
        });
        b.d.set(
            id,
            Element::term(Monomial::single(rep[&i]), BigInt::from(g.order), RING),
        );
        b.h.set(id, Element::zero(RING));
        torsion_rep.insert(i, id);
    }

    // square towers for odd generators
    for &i in &order {
        let g = &pres.generators[i];
        if g.degree % 2 != 0 {
            append_msymmetric(&mut b.gens, &mut b.d, &mut b.h, rep[&i], &g.name, truncation, false)?;
        }
    }

    // torsion pair towers for even torsion generators (odd representatives)
    for &i in &order {
        let g = &pres.generators[i];
        if g.order != 0 && g.degree % 2 == 0 {
            append_msymmetric2(
                &mut b.gens,
                &mut b.d,
                &mut b.h,
                torsion_rep[&i],
                rep[&i],
                BigInt::from(g.order),
                &g.name,
                truncation,
            )?;
        }
    }

    // relation generators: power relations get the even tower, the rest a
    // single generator with the canonical noncommutative lift
    let mut rel_index = 0usize;
    for rel in &pres.relations {
        if rel.is_zero() {
            continue;
        }
        let rd = pres
            .polynomial_degree(rel)
            .ok_or_else(|| ResolutionError::NonHomogeneousRelation(pres.format_poly(rel)))?;
        if rd + 1 > truncation {
            continue;
        }
        if let Some((gi, m, lambda)) = power_relation_shape(pres, rel) {
            if pres.generators[gi].degree % 2 == 0 {
                append_m_even(
                    &mut b.gens,
                    &mut b.d,
                    &mut b.h,
                    rep[&gi],
                    &pres.generators[gi].name,
                    m,
                    &lambda,
                    truncation,
                )?;
                continue;
            }
        }
        rel_index += 1;
        let lift = lift_polynomial(pres, rel, &rep, &b.gens);
        let id = b.add_gen(GeneratorDecl {
            name: format!("r{rel_index}"),
            resolution_degree: -1,
            internal_degree: rd,
            module_tag: ModuleTag::M,
        });
        b.d.set(id, lift);
        b.h.set(id, Element::zero(RING));
    }

    // user-supplied perturbation images
    for (name, expr) in &pres.h_images {
        let g = b
            .gens
            .lookup(name)
            .ok_or_else(|| ResolutionError::InconsistentHData(format!("unknown generator {name}")))?;
        let img = super::ledger::parse_element(expr, &b.gens, RING)
            .map_err(|e| ResolutionError::InconsistentHData(e))?;
        b.h.set(g, img);
    }

    // baseline cup layer: distinct degree-0 pairs
    let v0: Vec<GenId> = order.iter().map(|i| rep[i]).collect();
    for (ai, &a) in v0.iter().enumerate() {
        for &bb in v0.iter().skip(ai + 1) {
            b.ensure_pair(a, bb);
        }
    }
    if options.all_diagonals {
        for &a in &v0 {
            b.ensure_pair(a, a);
        }
    }

    // seeds
    for seed in &options.seeds {
        match seed {
            SeedSpec::PowerChain(name) => {
                let g = b.gens.lookup(name).ok_or_else(|| {
                    ResolutionError::Validation(format!("seed names unknown generator {name}"))
                })?;
                b.power_chain(g);
            }
            SeedSpec::MixedPair(na, nb) => {
                let ga = b.gens.lookup(na).ok_or_else(|| {
                    ResolutionError::Validation(format!("seed names unknown generator {na}"))
                })?;
                let gb = b.gens.lookup(nb).ok_or_else(|| {
                    ResolutionError::Validation(format!("seed names unknown generator {nb}"))
                })?;
                let ca = b.power_chain(ga);
                let cb = b.power_chain(gb);
                for x in &ca {
                    for y in &cb {
                        let d = x.degree(&b.gens).unwrap_or(0) + y.degree(&b.gens).unwrap_or(0) - 1;
                        if d <= truncation {
                            b.cup1_create_elements(x, y);
                        }
                    }
                }
            }
        }
    }
    b.resolve_pending();

    let mut res = HirschResolution {
        name: pres.name.clone(),
        gens: b.gens,
        d: b.d,
        h: b.h,
        table: b.table,
        rho: b.rho.into_iter().collect(),
        pres: pres.clone(),
        truncation,
    };

    syzygy_sweep(&mut res)?;
    Ok(res)
}

/// lambda * y^m with m >= 2 and a single variable.
fn power_relation_shape(pres: &AlgebraPresentation, rel: &HPolynomial) -> Option<(usize, u32, BigInt)> {
    if rel.terms.len() != 1 {
        return None;
    }
    let (mono, coeff) = rel.terms.iter().next().unwrap();
    let mut var = None;
    for (i, &e) in mono.0.iter().enumerate() {
        if e > 0 {
            if var.is_some() {
                return None;
            }
            var = Some((i, e));
        }
    }
    let (i, e) = var?;
    if e < 2 {
        return None;
    }
    let _ = pres;
    Some((i, e, coeff.clone()))
}

/// Canonical noncommutative lift of a commutative polynomial: exponent
/// vectors become sorted words in the degree-0 representatives.
pub fn lift_polynomial(
    pres: &AlgebraPresentation,
    poly: &HPolynomial,
    rep: &HashMap<usize, GenId>,
    gens: &Generators,
) -> Element {
    let _ = gens;
    let _ = pres;
    let mut out = Element::zero(RING);
    for (mono, c) in &poly.terms {
        let mut word = Vec::new();
        for (i, &e) in mono.0.iter().enumerate() {
            for _ in 0..e {
                word.push(rep[&i]);
            }
        }
        word.sort();
        out.add_term(Monomial(word), c.clone());
    }
    out
}

/// Homology of row `internal` at resolution degree -slot, with
/// representative cycles (slot 0 is taken against the augmentation).
pub fn row_homology(
    res: &HirschResolution,
    internal: i32,
    slot: i32,
) -> Result<LatticeQuotient, ResolutionError> {
    let words = res.words_of_bidegree(internal, -slot);
    let below = res.words_of_bidegree(internal, -slot - 1);
    let d_in = res
        .derivation_matrix(&res.d, &below, &words)
        .map_err(ResolutionError::Algebra)?;
    let l1: IntMatrix = if slot == 0 {
        // kernel of the augmentation into H^internal
        let monos = res.pres.monomials_of_degree(internal);
        let midx: HashMap<_, usize> = monos.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
        let mut p = IntMatrix::zero(monos.len(), words.len());
        for (j, w) in words.iter().enumerate() {
            if let Some(poly) = res.rho_word(&w.0) {
                for (m, c) in &poly.terms {
                    if let Some(&i) = midx.get(m) {
                        p.add_to(i, j, c);
                    }
                }
            }
        }
        // relation columns at this degree
        let mut rel_cols: Vec<Vec<(usize, BigInt)>> = Vec::new();
        for rel in &res.pres.relations {
            if let Some(rd) = res.pres.polynomial_degree(rel) {
                if rd > internal {
                    continue;
                }
                for m in res.pres.monomials_of_degree(internal - rd) {
                    let mut mp = HPolynomial::default();
                    mp.add_term(m, BigInt::one());
                    let prod = res.pres.poly_mul(&mp, rel);
                    let col: Vec<(usize, BigInt)> = prod
                        .terms
                        .iter()
                        .filter_map(|(mm, c)| midx.get(mm).map(|&i| (i, c.clone())))
                        .collect();
                    if !col.is_empty() {
                        rel_cols.push(col);
                    }
                }
            }
        }
        for (gi, g) in res.pres.generators.iter().enumerate() {
            if g.order == 0 {
                continue;
            }
            for (mi, m) in monos.iter().enumerate() {
                if m.0[gi] > 0 {
                    rel_cols.push(vec![(mi, BigInt::from(g.order))]);
                }
            }
        }
        let mut stacked = IntMatrix::zero(monos.len(), words.len() + rel_cols.len());
        for (&(r, c), v) in p.iter() {
            stacked.set(r, c, v.clone());
        }
        for (j, col) in rel_cols.iter().enumerate() {
            for (i, c) in col {
                stacked.set(*i, words.len() + j, -c.clone());
            }
        }
        let ker = kernel_basis(&stacked);
        let mut k = IntMatrix::zero(words.len(), ker.len());
        for (j, v) in ker.iter().enumerate() {
            for i in 0..words.len() {
                if !v[i].is_zero() {
                    k.set(i, j, v[i].clone());
                }
            }
        }
        k
    } else {
        let above = res.words_of_bidegree(internal, -slot + 1);
        let d_out = res
            .derivation_matrix(&res.d, &words, &above)
            .map_err(ResolutionError::Algebra)?;
        let ker = kernel_basis(&d_out);
        let mut k = IntMatrix::zero(words.len(), ker.len());
        for (j, v) in ker.iter().enumerate() {
            for i in 0..words.len() {
                if !v[i].is_zero() {
                    k.set(i, j, v[i].clone());
                }
            }
        }
        k
    };
    lattice_quotient(&l1, &d_in).map_err(|_| {
        ResolutionError::Validation(format!(
            "image not inside kernel at row {internal}, slot -{slot}"
        ))
    })
}

/// Kill all row homology by adding module generators, rows in ascending
/// internal degree, slots in ascending resolution depth.
fn syzygy_sweep(res: &mut HirschResolution) -> Result<(), ResolutionError> {
    let n = res.truncation;
    let mut m = 2i32;
    loop {
        let bound = max_internal_bound(res, n);
        if m > bound {
            break;
        }
        for slot in 0..m - 1 {
            let cycle_total = m - slot;
            // cycle tests are only honest where d-images are untruncated:
            // totals <= n - 1; new generators then live at totals <= n - 2
            if cycle_total > n - 1 || cycle_total < 2 {
                continue;
            }
            let words = res.words_of_bidegree(m, -slot);
            if words.is_empty() {
                continue;
            }
            let quo = row_homology(res, m, slot)?;
            if quo.group.is_zero() {
                continue;
            }
            for (k, (vec, _order)) in quo.representatives.iter().enumerate() {
                let mut cycle = Element::zero(RING);
                for (i, c) in vec.iter().enumerate() {
                    if !c.is_zero() {
                        cycle.add_term(words[i].clone(), c.clone());
                    }
                }
                // minimality: no invertible linear coefficient outside E
                for (mm, c) in &cycle.terms {
                    if mm.len() == 1
                        && res.gens.decl(mm.0[0]).module_tag != ModuleTag::E
                        && c.abs().is_one()
                    {
                        return Err(ResolutionError::NonMinimalCycle(format!(
                            "row {m} slot -{slot}: {}",
                            cycle.format(&res.gens)
                        )));
                    }
                }
                let name = format!("s{m}q{slot}n{k}");
                let id = res.gens.add(GeneratorDecl {
                    name,
                    resolution_degree: -slot - 1,
                    internal_degree: m,
                    module_tag: ModuleTag::M,
                });
                res.d.set(id, cycle);
                res.h.set(id, Element::zero(RING));
            }
        }
        m += 1;
    }
    Ok(())
}

/// Largest internal degree reachable by a word of total degree <= n.
fn max_internal_bound(res: &HirschResolution, n: i32) -> i32 {
    let cap = n + 1;
    let mut best = vec![i32::MIN; (cap + 1) as usize];
    best[0] = 0;
    let decls: Vec<(i32, i32)> = res
        .gens
        .ids()
        .map(|g| {
            let d = res.gens.decl(g);
            (d.total_degree(), d.internal_degree)
        })
        .collect();
    for t in 1..=cap {
        for &(tot, int) in &decls {
            if tot >= 1 && tot <= t && best[(t - tot) as usize] != i32::MIN {
                let cand = best[(t - tot) as usize] + int;
                if cand > best[t as usize] {
                    best[t as usize] = cand;
                }
            }
        }
    }
    best.into_iter().max().unwrap_or(0).max(0)
}
