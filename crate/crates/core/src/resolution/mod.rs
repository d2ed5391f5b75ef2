//! Degree-truncated minimal multiplicative resolutions with cup-one
//! structure: the generator ledger, differential d, perturbation h,
//! augmentation onto the presented algebra, and the derived classifications
//! (torsion representatives, the quotient by prime-to-mu torsion noise).

mod build;
mod families;
mod ledger;

pub use build::{build_resolution, BuildOptions, SeedSpec};
pub use families::{
    family_m_even, family_msymmetric, family_msymmetric2, family_oneone, h_action_msymmetric,
    SequenceFamily, SequenceKind,
};
pub use ledger::{parse_element, parse_resolution, print_resolution};

use crate::algebra::{
    AlgebraError, Cup1Table, CupContext, Derivation, Element, GenId, Generators, ModuleTag,
    Monomial,
};
use crate::linalg::{kernel_basis, solve_mod, CoefficientRing, IntMatrix};
use crate::presentation::{AlgebraPresentation, CommMonomial, HPolynomial};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::collections::{BTreeMap, HashMap};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ResolutionError {
    #[error("truncation {0} too low; need at least {1}")]
    TruncationTooLow(i32, i32),
    #[error("relation not homogeneous: {0}")]
    NonHomogeneousRelation(String),
    #[error("boundary of the pair tower is not divisible by {0}")]
    NonDivisibleBoundary(BigInt),
    #[error("family would exceed the truncation degree")]
    DegreeOverflow,
    #[error("inconsistent perturbation data: {0}")]
    InconsistentHData(String),
    #[error("syzygy cycle has an invertible linear coefficient; build is not minimal at {0}")]
    NonMinimalCycle(String),
    #[error("algebra error: {0}")]
    Algebra(#[from] AlgebraError),
    #[error("ledger parse error at line {0}: {1}")]
    LedgerParse(usize, String),
    #[error("validation failed: {0}")]
    Validation(String),
}

/// A built resolution: ledger, differential, perturbation, cup tables and
/// the augmentation onto the presented algebra.
#[derive(Debug, Clone)]
pub struct HirschResolution {
    pub name: String,
    pub gens: Generators,
    pub d: Derivation,
    pub h: Derivation,
    pub table: Cup1Table,
    /// augmentation: resolution-degree-0 generator -> presentation generator
    pub rho: BTreeMap<GenId, usize>,
    pub pres: AlgebraPresentation,
    pub truncation: i32,
}

pub const RING: CoefficientRing = CoefficientRing::Integers;

impl HirschResolution {
    pub fn dh(&self) -> Derivation {
        self.d.sum(&self.h)
    }

    pub fn cup_ctx<'a>(&'a self, dh: &'a Derivation) -> CupContext<'a> {
        CupContext { gens: &self.gens, table: &self.table, dh }
    }

    /// Augmentation of a resolution-degree-0 word into the presented algebra.
    pub fn rho_word(&self, word: &[GenId]) -> Option<HPolynomial> {
        let n = self.pres.generators.len();
        let mut poly = HPolynomial::default();
        poly.add_term(CommMonomial::unit(n), BigInt::one());
        for &g in word {
            let decl = self.gens.decl(g);
            if decl.resolution_degree != 0 {
                return None;
            }
            let pi = *self.rho.get(&g)?;
            let mut factor = HPolynomial::default();
            let mut expo = vec![0u32; n];
            expo[pi] = 1;
            factor.add_term(CommMonomial(expo), BigInt::one());
            poly = self.pres.poly_mul(&poly, &factor);
        }
        Some(poly)
    }

    /// rho on a general element: zero on words of negative resolution degree.
    pub fn rho_element(&self, e: &Element) -> HPolynomial {
        let mut out = HPolynomial::default();
        for (m, c) in &e.terms {
            let res: i32 = m.0.iter().map(|&g| self.gens.decl(g).resolution_degree).sum();
            if res != 0 {
                continue;
            }
            if let Some(p) = self.rho_word(&m.0) {
                for (mm, cc) in &p.terms {
                    out.add_term(mm.clone(), cc * c);
                }
            }
        }
        out
    }

    /// Words of the given total degree over the ledger, deterministic order.
    pub fn words_of_total_degree(&self, degree: i32) -> Vec<Monomial> {
        let mut out = Vec::new();
        let mut cur = Vec::new();
        self.enumerate_words(degree, 0, &mut cur, &mut out);
        out
    }

    fn enumerate_words(&self, remaining: i32, min_id: GenId, cur: &mut Vec<GenId>, out: &mut Vec<Monomial>) {
        let _ = min_id;
        if remaining == 0 {
            out.push(Monomial(cur.clone()));
            return;
        }
        if remaining < 0 {
            return;
        }
        for g in self.gens.ids() {
            let d = self.gens.degree(g);
            if d <= 0 || d > remaining {
                continue;
            }
            cur.push(g);
            self.enumerate_words(remaining - d, 0, cur, out);
            cur.pop();
        }
    }

    /// Words of the given (internal, resolution) bidegree.
    pub fn words_of_bidegree(&self, internal: i32, res: i32) -> Vec<Monomial> {
        let mut out = Vec::new();
        let mut cur = Vec::new();
        self.enumerate_bigraded(internal, res, &mut cur, &mut out);
        out
    }

    fn enumerate_bigraded(&self, internal: i32, res: i32, cur: &mut Vec<GenId>, out: &mut Vec<Monomial>) {
        if internal == 0 && res == 0 {
            out.push(Monomial(cur.clone()));
            return;
        }
        if internal < 0 || res > 0 {
            return;
        }
        for g in self.gens.ids() {
            let decl = self.gens.decl(g);
            if decl.internal_degree > internal || decl.resolution_degree < res {
                continue;
            }
            if decl.internal_degree == 0 {
                continue;
            }
            cur.push(g);
            self.enumerate_bigraded(
                internal - decl.internal_degree,
                res - decl.resolution_degree,
                cur,
                out,
            );
            cur.pop();
        }
    }

    /// Matrix of a derivation between word bases.
    pub fn derivation_matrix(
        &self,
        der: &Derivation,
        source: &[Monomial],
        target: &[Monomial],
    ) -> Result<IntMatrix, AlgebraError> {
        let index: HashMap<&Monomial, usize> = target.iter().enumerate().map(|(i, m)| (m, i)).collect();
        let mut mat = IntMatrix::zero(target.len(), source.len());
        for (j, w) in source.iter().enumerate() {
            let img = der.apply_word(&w.0, &self.gens)?;
            for (m, c) in &img.terms {
                if let Some(&i) = index.get(m) {
                    mat.add_to(i, j, c);
                }
            }
        }
        Ok(mat)
    }

    /// Torsion representatives: generators a in V^{-1,*} with d a = lambda b,
    /// b a single resolution-degree-0 generator, mu | lambda.
    pub fn k_mu_members(&self, mu: u64) -> Vec<GenId> {
        if mu == 0 {
            return Vec::new();
        }
        let mut out = Vec::new();
        for g in self.gens.ids() {
            let decl = self.gens.decl(g);
            if decl.resolution_degree != -1 {
                continue;
            }
            if let Some(img) = self.d.image(g) {
                if img.terms.len() == 1 {
                    let (m, c) = img.terms.iter().next().unwrap();
                    if m.len() == 1
                        && self.gens.decl(m.0[0]).resolution_degree == 0
                        && (c % BigInt::from(mu)).is_zero()
                        && !c.is_zero()
                    {
                        out.push(g);
                    }
                }
            }
        }
        out
    }

    /// Xi_mu = K_mu plus the resolution-degree-0 generator basis.
    pub fn xi_mu_members(&self, mu: u64) -> Vec<GenId> {
        let mut out: Vec<GenId> = self
            .gens
            .ids()
            .filter(|&g| self.gens.decl(g).resolution_degree == 0)
            .collect();
        out.extend(self.k_mu_members(mu));
        out.sort();
        out
    }

    /// O_k: degree-0 generators b with d a = theta b for some a in V^{-1},
    /// theta prime to mu.
    pub fn o_k_members(&self, mu: u64) -> Vec<GenId> {
        if mu == 0 {
            return Vec::new();
        }
        let mut out = Vec::new();
        for g in self.gens.ids() {
            if self.gens.decl(g).resolution_degree != -1 {
                continue;
            }
            if let Some(img) = self.d.image(g) {
                if img.terms.len() == 1 {
                    let (m, c) = img.terms.iter().next().unwrap();
                    if m.len() == 1 && self.gens.decl(m.0[0]).resolution_degree == 0 {
                        let theta = c.abs();
                        if num_integer::Integer::gcd(&theta, &BigInt::from(mu)).is_one() {
                            out.push(m.0[0]);
                        }
                    }
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }

    /// Quotient by the ideal generated by O_k members (all must be single
    /// generators). Identity when mu = 0.
    pub fn quotient_o(&self, ring: CoefficientRing) -> HirschResolution {
        let mu = ring.mu();
        let killed = self.o_k_members(mu);
        if killed.is_empty() {
            return self.clone();
        }
        self.kill_generators(&killed)
    }

    /// Quotient by the Hirsch ideal of cup-two classes for distinct pairs:
    /// removes T-generators recorded as cup2 values of distinct pairs.
    pub fn quotient_tau(&self) -> HirschResolution {
        let mut killed = Vec::new();
        for (&(a, b), v) in &self.table.cup2_pairs {
            if a == b {
                continue;
            }
            for m in v.terms.keys() {
                if m.len() == 1 {
                    killed.push(m.0[0]);
                }
            }
        }
        killed.sort();
        killed.dedup();
        if killed.is_empty() {
            return self.clone();
        }
        self.kill_generators(&killed)
    }

    /// Set the listed generators to zero everywhere and drop them.
    fn kill_generators(&self, killed: &[GenId]) -> HirschResolution {
        let keep: Vec<GenId> = self.gens.ids().filter(|g| !killed.contains(g)).collect();
        let mut gens = Generators::new(self.gens.truncation);
        let mut remap: HashMap<GenId, GenId> = HashMap::new();
        for &g in &keep {
            let id = gens.add(self.gens.decl(g).clone());
            remap.insert(g, id);
        }
        let map_elem = |e: &Element| -> Element {
            let mut out = Element::zero(e.ring);
            'terms: for (m, c) in &e.terms {
                let mut w = Vec::with_capacity(m.len());
                for &g in &m.0 {
                    match remap.get(&g) {
                        Some(&ng) => w.push(ng),
                        None => continue 'terms,
                    }
                }
                out.add_term(Monomial(w), c.clone());
            }
            out
        };
        let mut d = Derivation::new(RING);
        let mut h = Derivation::new(RING);
        for &g in &keep {
            let ng = remap[&g];
            if let Some(img) = self.d.image(g) {
                d.set(ng, map_elem(img));
            }
            if let Some(img) = self.h.image(g) {
                h.set(ng, map_elem(img));
            }
        }
        let mut table = Cup1Table::default();
        for (&(a, b), v) in &self.table.pairs {
            if let (Some(&na), Some(&nb)) = (remap.get(&a), remap.get(&b)) {
                table.set(na, nb, map_elem(v));
            }
        }
        for (&(a, b), v) in &self.table.cup2_pairs {
            if let (Some(&na), Some(&nb)) = (remap.get(&a), remap.get(&b)) {
                table.set_cup2(na, nb, map_elem(v));
            }
        }
        let rho = self
            .rho
            .iter()
            .filter_map(|(g, pi)| remap.get(g).map(|&ng| (ng, *pi)))
            .collect();
        HirschResolution {
            name: self.name.clone(),
            gens,
            d,
            h,
            table,
            rho,
            pres: self.pres.clone(),
            truncation: self.truncation,
        }
    }

    /// Search for u, c, v with d_h u = x + c + lambda v (c decomposable).
    /// `lambda` comes from the linear content of d_h x.
    pub fn is_lambda_homologous_zero(&self, x: GenId) -> HomologousVerdict {
        let dh = self.dh();
        let deg = self.gens.degree(x);
        let candidates: Vec<GenId> = self
            .gens
            .ids()
            .filter(|&g| self.gens.degree(g) == deg - 1)
            .collect();
        if candidates.is_empty() {
            return HomologousVerdict::NotHomologous;
        }
        // linear coordinates of d_h on candidate generators
        let targets: Vec<GenId> = self
            .gens
            .ids()
            .filter(|&g| self.gens.degree(g) == deg)
            .collect();
        let idx: HashMap<GenId, usize> = targets.iter().enumerate().map(|(i, &g)| (g, i)).collect();
        let mut lin = IntMatrix::zero(targets.len(), candidates.len());
        for (j, &u) in candidates.iter().enumerate() {
            if let Some(img) = dh.image(u) {
                for (m, c) in &img.terms {
                    if m.len() == 1 {
                        if let Some(&i) = idx.get(&m.0[0]) {
                            lin.add_to(i, j, c);
                        }
                    }
                }
            }
        }
        let mut rhs = vec![BigInt::zero(); targets.len()];
        rhs[idx[&x]] = BigInt::one();
        if crate::linalg::solve_integer(&lin, &rhs).is_some() {
            return HomologousVerdict::Weakly;
        }
        // lambda from the linear content of d_h x
        let lambda = self
            .dh()
            .image(x)
            .map(|img| {
                let lin_part = img.length_part(1);
                lin_part.content()
            })
            .unwrap_or_else(BigInt::zero);
        if lambda.is_zero() || lambda.is_one() {
            return HomologousVerdict::NotHomologous;
        }
        let lam64: u64 = match (&lambda).try_into() {
            Ok(v) => v,
            Err(_) => return HomologousVerdict::NotHomologous,
        };
        if solve_mod(&lin, &rhs, lam64).is_some() {
            return HomologousVerdict::Lambda(lambda);
        }
        HomologousVerdict::NotHomologous
    }

    /// Structural validation: d^2 = 0, d_h^2 = 0, rho.d = 0, minimality,
    /// the Hirsch identity on table pairs, and h^{tr} constraints.
    pub fn validate(&self) -> Result<(), ResolutionError> {
        let dh = self.dh();
        let ctx = self.cup_ctx(&dh);
        for g in self.gens.ids() {
            let decl = self.gens.decl(g);
            if decl.total_degree() + 2 <= self.truncation {
                let e = Element::generator(g, RING);
                let dd = self.d.apply(&self.d.apply(&e, &self.gens)?, &self.gens)?;
                if !dd.is_zero() {
                    return Err(ResolutionError::Validation(format!(
                        "d^2({}) = {}",
                        decl.name,
                        dd.format(&self.gens)
                    )));
                }
                let dhh = dh.apply(&dh.apply(&e, &self.gens)?, &self.gens)?;
                if !dhh.is_zero() {
                    return Err(ResolutionError::Validation(format!(
                        "d_h^2({}) = {}",
                        decl.name,
                        dhh.format(&self.gens)
                    )));
                }
            }
            // rho . d = 0 on resolution degree -1
            if decl.resolution_degree == -1 {
                if let Some(img) = self.d.image(g) {
                    let p = self.rho_element(img);
                    let pd = self.pres.polynomial_degree(&p);
                    if let Some(pd) = pd {
                        let hm = crate::presentation::HModule::new(&self.pres, pd);
                        if !hm.is_zero_class(&p, pd) {
                            return Err(ResolutionError::Validation(format!(
                                "rho(d {}) != 0",
                                decl.name
                            )));
                        }
                    } else if !p.is_zero() {
                        return Err(ResolutionError::Validation(format!(
                            "rho(d {}) inhomogeneous",
                            decl.name
                        )));
                    }
                }
            }
            // minimality: d(u) in E + D + kappa V for u in T + M below degree 0
            if decl.module_tag != ModuleTag::E && decl.resolution_degree < 0 {
                if let Some(img) = self.d.image(g) {
                    for (m, c) in &img.terms {
                        if m.len() == 1 && self.gens.decl(m.0[0]).module_tag != ModuleTag::E {
                            if c.abs().is_one() {
                                return Err(ResolutionError::Validation(format!(
                                    "minimality: d({}) has unit linear term {}",
                                    decl.name,
                                    self.gens.name(m.0[0])
                                )));
                            }
                        }
                    }
                }
            }
        }
        // Hirsch identity on all table pairs
        for (&(a, b), _) in &self.table.pairs {
            let ea = Element::generator(a, RING);
            let eb = Element::generator(b, RING);
            if !ctx.check_hirsch_identity(&ea, &eb)? {
                return Err(ResolutionError::Validation(format!(
                    "Hirsch identity fails on ({}, {})",
                    self.gens.name(a),
                    self.gens.name(b)
                )));
            }
        }
        // transgressive constraints: h^{tr}(E) = 0 and h^{tr}(cup2 of distinct pairs) = 0
        for g in self.gens.ids() {
            let decl = self.gens.decl(g);
            if decl.module_tag == ModuleTag::E {
                if let Some(img) = self.h.image(g) {
                    let tr = resolution_zero_part(img, &self.gens).length_part(1);
                    if !tr.is_zero() {
                        return Err(ResolutionError::Validation(format!(
                            "h^tr on E-generator {} is nonzero",
                            decl.name
                        )));
                    }
                }
            }
        }
        for (&(a, b), v) in &self.table.cup2_pairs {
            if a == b {
                continue;
            }
            for m in v.terms.keys() {
                if m.len() == 1 {
                    if let Some(img) = self.h.image(m.0[0]) {
                        let tr = resolution_zero_part(img, &self.gens);
                        if !tr.is_zero() {
                            return Err(ResolutionError::Validation(format!(
                                "h^tr(cup2 {} {}) nonzero",
                                self.gens.name(a),
                                self.gens.name(b)
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Row exactness at every bidegree with word total degree <= bound.
    pub fn check_row_exactness(&self, bound: i32) -> Result<(), ResolutionError> {
        for m in 2..=(3 * self.truncation) {
            for s in 0..m {
                let total = m - s;
                if total > bound || total < 1 {
                    continue;
                }
                let words = self.words_of_bidegree(m, -s);
                if words.is_empty() {
                    continue;
                }
                let h = build::row_homology(self, m, s)?;
                if !h.group.is_zero() {
                    return Err(ResolutionError::Validation(format!(
                        "row {m} not exact at resolution degree -{s}: {}",
                        h.group
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HomologousVerdict {
    NotHomologous,
    Weakly,
    Lambda(BigInt),
}

/// Component of an element lying in resolution degree 0.
pub fn resolution_zero_part(e: &Element, gens: &Generators) -> Element {
    let mut out = Element::zero(e.ring);
    for (m, c) in &e.terms {
        let res: i32 = m.0.iter().map(|&g| gens.decl(g).resolution_degree).sum();
        if res == 0 {
            out.add_term(m.clone(), c.clone());
        }
    }
    out
}

/// Linear solve for a preimage: find x with d(x) = target, where x ranges
/// over generator combinations of the target degree minus one.
pub fn solve_d_preimage(
    res: &HirschResolution,
    der: &Derivation,
    target: &Element,
    modulus: u64,
) -> Option<Vec<(GenId, BigInt)>> {
    let deg = target.degree(&res.gens)?;
    let sources: Vec<GenId> = res
        .gens
        .ids()
        .filter(|&g| res.gens.degree(g) == deg - 1)
        .collect();
    let words = res.words_of_total_degree(deg);
    let idx: HashMap<&Monomial, usize> = words.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let mut mat = IntMatrix::zero(words.len(), sources.len());
    for (j, &g) in sources.iter().enumerate() {
        if let Some(img) = der.image(g) {
            for (m, c) in &img.terms {
                if let Some(&i) = idx.get(m) {
                    mat.add_to(i, j, c);
                }
            }
        }
    }
    let mut rhs = vec![BigInt::zero(); words.len()];
    for (m, c) in &target.terms {
        rhs[*idx.get(m)?] = c.clone();
    }
    let sol = solve_mod(&mat, &rhs, modulus)?;
    Some(
        sources
            .into_iter()
            .zip(sol)
            .filter(|(_, c)| !c.is_zero())
            .collect(),
    )
}

/// Kernel of the linear part of a derivation in a fixed degree, as elements.
pub fn linear_kernel_elements(res: &HirschResolution, der: &Derivation, degree: i32) -> Vec<Element> {
    let sources: Vec<GenId> = res
        .gens
        .ids()
        .filter(|&g| res.gens.degree(g) == degree)
        .collect();
    let words = res.words_of_total_degree(degree + 1);
    let idx: HashMap<&Monomial, usize> = words.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let mut mat = IntMatrix::zero(words.len(), sources.len());
    for (j, &g) in sources.iter().enumerate() {
        if let Some(img) = der.image(g) {
            for (m, c) in &img.terms {
                if let Some(&i) = idx.get(m) {
                    mat.add_to(i, j, c);
                }
            }
        }
    }
    kernel_basis(&mat)
        .into_iter()
        .map(|v| {
            let mut e = Element::zero(RING);
            for (i, c) in v.into_iter().enumerate() {
                e.add_term(Monomial::single(sources[i]), c);
            }
            e
        })
        .filter(|e| !e.is_zero())
        .collect()
}

/// Koszul sign of sorting a word of degree-0 generators into commutative
/// canonical order (used by the augmentation); pairs of equal odd letters
/// return None.
pub fn commutative_sort_sign(word: &[GenId], gens: &Generators) -> Option<(Vec<GenId>, i32)> {
    let mut w: Vec<GenId> = word.to_vec();
    let mut sign_exp = 0i32;
    // bubble sort, counting odd-odd transpositions
    let n = w.len();
    for i in 0..n {
        for j in 0..n.saturating_sub(i + 1) {
            if w[j] > w[j + 1] {
                let odd_a = gens.degree(w[j]).rem_euclid(2) == 1;
                let odd_b = gens.degree(w[j + 1]).rem_euclid(2) == 1;
                if odd_a && odd_b {
                    sign_exp += 1;
                }
                w.swap(j, j + 1);
            }
        }
    }
    for k in 1..n {
        if w[k] == w[k - 1] && gens.degree(w[k]).rem_euclid(2) == 1 {
            return None;
        }
    }
    Some((w, sign_exp.rem_euclid(2)))
}

pub use build::row_homology;

#[cfg(test)]
mod tests;
