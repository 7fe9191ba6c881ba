//! Explicit inequality families for the small communication scenarios,
//! the signed-permutation orbits generating the three-setting
//! correlation facets, and classification of computed facet sets
//! against these catalogs.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::model::{FacetList, LinearInequality, ModelError, Picture, Scenario};
use crate::polytope::reduce_mod_equations;
use crate::rational::Rat;

/// Named inequality families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum FamilyName {
    /// `p(a,b|i,j) >= 0` for the two-setting scenario: 16 members.
    Positivity22,
    /// One deterministic-output term per context, bounded by 2: 16 members.
    PatternSum22,
    /// Marginal-minus-joint form, nonnegative: 16 members.
    MarginalJoint22,
    /// `-1 <= c(i,j) <= 1` for three settings: 18 members.
    TrivialCorr3,
    /// Signed-permutation orbit of the first seed matrix.
    OrbitM1,
    /// Signed-permutation orbit of the second seed matrix.
    OrbitM2,
    /// `-1 <= c(i,j) <= 1` for two settings: 8 members.
    TrivialCorr2,
    /// Sign-weighted correlation sums bounded by 2 (two settings, no
    /// communication), in probability coordinates: 8 members.
    Chsh22Prob,
    /// The same 8 inequalities over correlation coordinates.
    Chsh22Corr,
}

impl FamilyName {
    pub fn as_str(&self) -> &'static str {
        match self {
            FamilyName::Positivity22 => "Positivity22",
            FamilyName::PatternSum22 => "PatternSum22",
            FamilyName::MarginalJoint22 => "MarginalJoint22",
            FamilyName::TrivialCorr3 => "TrivialCorr3",
            FamilyName::OrbitM1 => "OrbitM1",
            FamilyName::OrbitM2 => "OrbitM2",
            FamilyName::TrivialCorr2 => "TrivialCorr2",
            FamilyName::Chsh22Prob => "Chsh22Prob",
            FamilyName::Chsh22Corr => "Chsh22Corr",
        }
    }
}

/// One named family with its full member list.
#[derive(Debug, Clone, Serialize)]
pub struct CatalogFamily {
    pub name: FamilyName,
    pub members: FacetList,
}

fn scenario22() -> Scenario {
    Scenario::new(2, 2, 1).expect("2,2,1 is a valid scenario")
}

/// Builds a probability-picture inequality from coefficients on the full
/// table entries, `sum coeff(a,b,i,j) p(a,b|i,j) <= bound`, rewriting the
/// dropped coordinate of each context through normalization.
pub fn from_table_coeffs(
    s: Scenario,
    coeff: impl Fn(usize, usize, usize, usize) -> Rat,
    bound: Rat,
) -> LinearInequality {
    let k = s.k();
    let mut coords = vec![Rat::zero(); s.prob_dim()];
    let mut bound = bound;
    let per_context = k * k - 1;
    for (i, j) in s.contexts() {
        let ctx = i * s.m() + j;
        let dropped = coeff(k - 1, k - 1, i, j);
        for (a, b) in s.outcome_pairs() {
            if a == k - 1 && b == k - 1 {
                continue;
            }
            coords[ctx * per_context + a * k + b] = coeff(a, b, i, j) - &dropped;
        }
        bound -= dropped;
    }
    LinearInequality::new(Picture::Probability, coords, bound).canonicalized()
}

/// The four output patterns per party entering the two-setting
/// communication facets: `(a1 a2 a3 a4)` lists one outcome per context in
/// the order `(0,0), (0,1), (1,0), (1,1)`.
pub const A_PATTERNS: [[usize; 4]; 4] = [[0, 1, 0, 1], [1, 0, 1, 0], [0, 1, 1, 0], [1, 0, 0, 1]];
pub const B_PATTERNS: [[usize; 4]; 4] = [[0, 0, 1, 1], [1, 1, 0, 0], [0, 1, 1, 0], [1, 0, 0, 1]];

const CONTEXTS22: [(usize, usize); 4] = [(0, 0), (0, 1), (1, 0), (1, 1)];

/// Raw left-hand side of one pattern-pair inequality on a table:
/// `sum_k p(a_k, b_k | ctx_k)`, bounded by 2.
pub fn pattern_sum_value(
    table: &crate::model::ProbTable,
    a_pattern: &[usize; 4],
    b_pattern: &[usize; 4],
) -> Rat {
    CONTEXTS22
        .iter()
        .enumerate()
        .map(|(pos, &(i, j))| table.entry(a_pattern[pos], b_pattern[pos], i, j).clone())
        .sum()
}

fn positivity22() -> Vec<LinearInequality> {
    let s = scenario22();
    let mut members = Vec::new();
    for (i, j) in s.contexts() {
        for (a, b) in s.outcome_pairs() {
            members.push(from_table_coeffs(
                s,
                |aa, bb, ii, jj| {
                    if (aa, bb, ii, jj) == (a, b, i, j) {
                        Rat::int(-1)
                    } else {
                        Rat::zero()
                    }
                },
                Rat::zero(),
            ));
        }
    }
    members
}

fn pattern_sum22() -> Vec<LinearInequality> {
    let s = scenario22();
    let mut members = Vec::new();
    for ap in &A_PATTERNS {
        for bp in &B_PATTERNS {
            members.push(from_table_coeffs(
                s,
                |a, b, i, j| {
                    let pos = CONTEXTS22.iter().position(|c| *c == (i, j)).unwrap();
                    if ap[pos] == a && bp[pos] == b {
                        Rat::one()
                    } else {
                        Rat::zero()
                    }
                },
                Rat::int(2),
            ));
        }
    }
    members
}

fn marginal_joint22() -> Vec<LinearInequality> {
    // p(a,.|i,j) + p(.,b|i',j') - p(a,b|i,j') >= 0 with primed settings
    // flipped; stored in <= orientation.
    let s = scenario22();
    let mut members = Vec::new();
    for i in 0..2 {
        for j in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    let (ib, jb) = (1 - i, 1 - j);
                    members.push(from_table_coeffs(
                        s,
                        |aa, bb, ii, jj| {
                            let mut c = Rat::zero();
                            if aa == a && (ii, jj) == (i, j) {
                                c -= Rat::one();
                            }
                            if bb == b && (ii, jj) == (ib, jb) {
                                c -= Rat::one();
                            }
                            if (aa, bb, ii, jj) == (a, b, i, jb) {
                                c += Rat::one();
                            }
                            c
                        },
                        Rat::zero(),
                    ));
                }
            }
        }
    }
    members
}

fn trivial_corr(m: u32) -> Vec<LinearInequality> {
    let dim = (m * m) as usize;
    let mut members = Vec::new();
    for idx in 0..dim {
        for sign in [1i64, -1] {
            let mut coeffs = vec![Rat::zero(); dim];
            coeffs[idx] = Rat::int(sign);
            members.push(LinearInequality::new(Picture::Correlation, coeffs, Rat::one()).canonicalized());
        }
    }
    members
}

/// A 3x3 rational matrix stored row-major.
pub type Mat3 = Vec<Vec<Rat>>;

/// First seed matrix of the three-setting correlation facets.
pub fn matrix_m1() -> Mat3 {
    let e = |n: i64| Rat::new(n, 6);
    vec![
        vec![e(0), e(-1), e(1)],
        vec![e(-1), e(1), e(1)],
        vec![e(1), e(1), e(1)],
    ]
}

/// Second seed matrix of the three-setting correlation facets.
pub fn matrix_m2() -> Mat3 {
    let e = |n: i64| Rat::new(n, 11);
    vec![
        vec![e(1), e(2), e(-2)],
        vec![e(2), e(1), e(2)],
        vec![e(-2), e(2), e(1)],
    ]
}

/// Row/column permutations combined with row/column sign flips acting on
/// 3x3 matrices. The simultaneous flip of all rows and all columns acts
/// trivially, so the 2304 elements cover each image at least twice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignedPerm {
    pub row_perm: [usize; 3],
    pub col_perm: [usize; 3],
    pub row_signs: [i8; 3],
    pub col_signs: [i8; 3],
}

const PERMS3: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

fn signs3(bits: usize) -> [i8; 3] {
    [
        if bits & 1 == 0 { 1 } else { -1 },
        if bits & 2 == 0 { 1 } else { -1 },
        if bits & 4 == 0 { 1 } else { -1 },
    ]
}

impl SignedPerm {
    /// `(g . M)(i, j) = rs_i * cs_j * M(rp^-1(i), cp^-1(j))`.
    pub fn apply(&self, m: &Mat3) -> Mat3 {
        let mut inv_row = [0usize; 3];
        let mut inv_col = [0usize; 3];
        for k in 0..3 {
            inv_row[self.row_perm[k]] = k;
            inv_col[self.col_perm[k]] = k;
        }
        (0..3)
            .map(|i| {
                (0..3)
                    .map(|j| {
                        let v = &m[inv_row[i]][inv_col[j]];
                        match self.row_signs[i] * self.col_signs[j] {
                            1 => v.clone(),
                            _ => -v,
                        }
                    })
                    .collect()
            })
            .collect()
    }

    /// All 6 * 6 * 8 * 8 = 2304 signed permutations.
    pub fn all() -> Vec<SignedPerm> {
        let mut out = Vec::with_capacity(2304);
        for rp in &PERMS3 {
            for cp in &PERMS3 {
                for rs in 0..8 {
                    for cs in 0..8 {
                        out.push(SignedPerm {
                            row_perm: *rp,
                            col_perm: *cp,
                            row_signs: signs3(rs),
                            col_signs: signs3(cs),
                        });
                    }
                }
            }
        }
        out
    }
}

/// Closure of a seed matrix under the signed-permutation group,
/// deduplicated and deterministically ordered.
pub fn orbit(seed: &Mat3) -> BTreeSet<Vec<Rat>> {
    SignedPerm::all()
        .iter()
        .map(|g| g.apply(seed).into_iter().flatten().collect())
        .collect()
}

fn matrix_inequality(flat: Vec<Rat>) -> LinearInequality {
    LinearInequality::new(Picture::Correlation, flat, Rat::one()).canonicalized()
}

fn orbit_family(seed: &Mat3) -> Vec<LinearInequality> {
    orbit(seed).into_iter().map(matrix_inequality).collect()
}

/// Constructs a named family with its exact member list.
pub fn family(name: FamilyName) -> CatalogFamily {
    let (picture, members) = match name {
        FamilyName::Positivity22 => (Picture::Probability, positivity22()),
        FamilyName::PatternSum22 => (Picture::Probability, pattern_sum22()),
        FamilyName::MarginalJoint22 => (Picture::Probability, marginal_joint22()),
        FamilyName::TrivialCorr3 => (Picture::Correlation, trivial_corr(3)),
        FamilyName::OrbitM1 => (Picture::Correlation, orbit_family(&matrix_m1())),
        FamilyName::OrbitM2 => (Picture::Correlation, orbit_family(&matrix_m2())),
        FamilyName::TrivialCorr2 => (Picture::Correlation, trivial_corr(2)),
        FamilyName::Chsh22Prob => (Picture::Probability, chsh22_probability()),
        FamilyName::Chsh22Corr => (Picture::Correlation, chsh22_correlation()),
    };
    CatalogFamily {
        name,
        members: FacetList::new(picture, members),
    }
}

/// Sign patterns with an odd number of minus signs, row-major over the
/// four contexts: the coefficient patterns of the two-setting
/// correlation facets without communication.
fn chsh_sign_patterns() -> Vec<[i64; 4]> {
    let mut out = Vec::new();
    for bits in 0..16usize {
        let signs: Vec<i64> = (0..4).map(|k| if bits & (1 << k) == 0 { 1 } else { -1 }).collect();
        if signs.iter().product::<i64>() == -1 {
            out.push([signs[0], signs[1], signs[2], signs[3]]);
        }
    }
    out
}

fn chsh22_correlation() -> Vec<LinearInequality> {
    chsh_sign_patterns()
        .into_iter()
        .map(|signs| {
            let coeffs = signs.iter().map(|&s| Rat::int(s)).collect();
            LinearInequality::new(Picture::Correlation, coeffs, Rat::int(2)).canonicalized()
        })
        .collect()
}

fn chsh22_probability() -> Vec<LinearInequality> {
    // substitute c(i,j) = sum_ab v(a) v(b) p(a,b|i,j)
    let s = scenario22();
    chsh_sign_patterns()
        .into_iter()
        .map(|signs| {
            from_table_coeffs(
                s,
                |a, b, i, j| {
                    let sign = signs[i * 2 + j]
                        * crate::model::outcome_sign(a)
                        * crate::model::outcome_sign(b);
                    Rat::int(sign)
                },
                Rat::int(2),
            )
        })
        .collect()
}

/// The complete three-setting correlation catalog: 18 trivial plus the
/// two seed orbits, 498 inequalities in all.
pub fn corr_catalog_m3() -> FacetList {
    let mut members = trivial_corr(3);
    members.extend(orbit_family(&matrix_m1()));
    members.extend(orbit_family(&matrix_m2()));
    FacetList::new(Picture::Correlation, members)
}

/// The complete two-setting probability catalog at one bit: positivity
/// plus both pattern families, 48 inequalities.
pub fn prob_catalog_m2() -> FacetList {
    let mut members = positivity22();
    members.extend(pattern_sum22());
    members.extend(marginal_joint22());
    FacetList::new(Picture::Probability, members)
}

/// Per-family outcome of a classification run.
#[derive(Debug, Clone, Serialize)]
pub struct FamilyMatch {
    pub name: FamilyName,
    pub family_size: usize,
    pub matched: usize,
}

/// Result of matching a computed facet list against catalog families
/// under canonical form (reduced modulo hull equations when given).
#[derive(Debug, Clone, Serialize)]
pub struct ClassificationReport {
    pub families: Vec<FamilyMatch>,
    pub unmatched_computed: Vec<LinearInequality>,
    pub unmatched_catalog: Vec<LinearInequality>,
    /// Every computed facet matched exactly one catalog member and vice
    /// versa.
    pub perfect: bool,
}

/// Matches computed facets against catalog members one-to-one.
pub fn classify(
    computed: &FacetList,
    equations: &[LinearInequality],
    families: &[CatalogFamily],
) -> Result<ClassificationReport, ModelError> {
    for fam in families {
        if fam.members.picture != computed.picture {
            return Err(ModelError::InvalidScenario(format!(
                "family {} is in the {} picture, computed facets in {}",
                fam.name.as_str(),
                fam.members.picture,
                computed.picture
            )));
        }
    }
    let canon = |ineq: &LinearInequality| {
        let reduced = reduce_mod_equations(ineq, equations);
        (reduced.coeffs, reduced.bound)
    };
    let mut catalog_index: BTreeMap<(Vec<Rat>, Rat), (usize, bool)> = BTreeMap::new();
    for (fi, fam) in families.iter().enumerate() {
        for member in &fam.members.facets {
            catalog_index.insert(canon(member), (fi, false));
        }
    }
    let mut matched = vec![0usize; families.len()];
    let mut unmatched_computed = Vec::new();
    for facet in &computed.facets {
        match catalog_index.get_mut(&canon(facet)) {
            Some((fi, used)) if !*used => {
                matched[*fi] += 1;
                *used = true;
            }
            _ => unmatched_computed.push(facet.clone()),
        }
    }
    let mut unmatched_catalog = Vec::new();
    for ((coeffs, bound), (fi, used)) in &catalog_index {
        if !*used {
            unmatched_catalog.push(LinearInequality::new(
                families[*fi].members.picture,
                coeffs.clone(),
                bound.clone(),
            ));
        }
    }
    let families_out = families
        .iter()
        .enumerate()
        .map(|(fi, fam)| FamilyMatch {
            name: fam.name,
            family_size: fam.members.len(),
            matched: matched[fi],
        })
        .collect();
    let perfect = unmatched_computed.is_empty() && unmatched_catalog.is_empty();
    Ok(ClassificationReport {
        families: families_out,
        unmatched_computed,
        unmatched_catalog,
        perfect,
    })
}

/// The member with the largest violation margin at a point; a margin
/// `<= 0` means every member is satisfied.
pub fn max_violation(point: &[Rat], facets: &FacetList) -> Option<(usize, Rat)> {
    facets
        .facets
        .iter()
        .enumerate()
        .map(|(idx, f)| (idx, f.margin(point)))
        .max_by(|(_, a), (_, b)| a.cmp(b))
}
