//! Exact exponent data for the paraboloid: necessary conditions, the critical
//! corner points, conjectured endpoints and the best known results.

use std::fmt;

use num_rational::Rational64;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponent::Exponent;
use crate::field::FieldContext;

fn rat(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

/// The two necessary conditions for R*(p -> r) to stay bounded when P
/// contains a subspace of size q^k:
/// r >= 2d/(d-1) and r >= p(d-k)/((p-1)(d-1-k)).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NecessaryConditions {
    pub d: usize,
    pub k: usize,
}

impl NecessaryConditions {
    /// 2d/(d-1).
    pub fn uniform_floor(&self) -> Exponent {
        let d = self.d as i64;
        Exponent::ratio(2 * d, d - 1).expect("2d/(d-1) >= 1")
    }

    /// p(d-k)/((p-1)(d-1-k)), infinite at p = 1.
    pub fn subspace_floor(&self, p: Exponent) -> Exponent {
        let (d, k) = (self.d as i64, self.k as i64);
        let inv = (Rational64::one() - p.reciprocal()) * rat(d - 1 - k, d - k);
        Exponent::from_reciprocal(inv).expect("the reciprocal lies in [0, 1]")
    }

    /// The least admissible r for a given p.
    pub fn min_r(&self, p: Exponent) -> Exponent {
        self.uniform_floor().max(self.subspace_floor(p))
    }

    pub fn admits(&self, p: Exponent, r: Exponent) -> bool {
        r >= self.min_r(p)
    }

    /// Human-readable forms of both constraints.
    pub fn describe(&self) -> [String; 2] {
        let (d, k) = (self.d, self.k);
        [format!("r >= 2d/(d-1) = {}", self.uniform_floor()), format!("r >= p({})/((p-1)({}))", d - k, d - 1 - k)]
    }
}

/// The necessary conditions for dimension d and subspace exponent k.
pub fn necessary_exponents(d: usize, k: usize) -> Result<NecessaryConditions> {
    if d < 2 {
        return Err(Error::Domain(format!("need d >= 2, got {d}")));
    }
    if k + 1 >= d {
        return Err(Error::Domain(format!("k must be at most d - 2 = {}, got {k}", d - 2)));
    }
    Ok(NecessaryConditions { d, k })
}

/// The case split for the paraboloid by dimension and the squareness of -1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldClass {
    /// d even.
    EvenD,
    /// d = 3 mod 4 and -1 not a square.
    D3Mod4MinusNonSquare,
    /// d = 1 mod 4.
    D1Mod4,
    /// d = 3 mod 4 and -1 a square.
    OddDMinusSquare,
}

impl FieldClass {
    pub fn classify(d: usize, minus_one_square: bool) -> Self {
        match d % 4 {
            0 | 2 => FieldClass::EvenD,
            1 => FieldClass::D1Mod4,
            _ if minus_one_square => FieldClass::OddDMinusSquare,
            _ => FieldClass::D3Mod4MinusNonSquare,
        }
    }

    /// log_q |Omega| for the subspace Omega inside P.
    pub fn subspace_exponent(&self, d: usize) -> usize {
        match self {
            FieldClass::EvenD => (d - 2) / 2,
            FieldClass::D3Mod4MinusNonSquare => (d - 3) / 2,
            FieldClass::D1Mod4 | FieldClass::OddDMinusSquare => (d - 1) / 2,
        }
    }
}

impl fmt::Display for FieldClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FieldClass::EvenD => "even-d",
            FieldClass::D3Mod4MinusNonSquare => "d3mod4-minus-nonsquare",
            FieldClass::D1Mod4 => "d1mod4",
            FieldClass::OddDMinusSquare => "odd-d-minus-square",
        })
    }
}

/// How a table value is attained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntryKind {
    /// The endpoint itself.
    Exact,
    /// Every value strictly beyond it (an open endpoint).
    Above,
    /// Some value strictly below it.
    MinusEps,
}

/// Best known r at p = 2.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BestKnown {
    pub r: Rational64,
    pub kind: EntryKind,
    pub source: &'static str,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExponentProfile {
    pub d: usize,
    pub field_class: FieldClass,
    pub minus_one_square: bool,
    pub prime_q: bool,
    /// log_q |Omega|.
    pub k: usize,
    /// Critical corner (1/p, 1/r) of the necessary region.
    pub corner: (Rational64, Rational64),
    /// The corner as (p, r).
    pub corner_exponents: (Exponent, Exponent),
    /// Conjectured critical r at p = 2.
    pub conjectured_r: Exponent,
    /// (2d+2)/(d-1).
    pub stein_tomas_r: Exponent,
    pub best_known: BestKnown,
    /// The conjectured endpoint at p = 2 is already the Stein-Tomas exponent.
    pub solved_sharp: bool,
}

/// All exponent constants for dimension d over the given field.
pub fn exponent_profile(ctx: &FieldContext, d: usize) -> Result<ExponentProfile> {
    profile_for(d, ctx.is_minus_one_square(), ctx.is_prime_field())
}

/// [`exponent_profile`] from the two field facts it depends on.
pub fn profile_for(d: usize, minus_one_square: bool, prime_q: bool) -> Result<ExponentProfile> {
    if d < 2 {
        return Err(Error::Domain(format!("need d >= 2, got {d}")));
    }
    let di = d as i64;
    let class = FieldClass::classify(d, minus_one_square);
    let k = class.subspace_exponent(d);
    let corner_r = rat(di - 1, 2 * di);
    let corner_p = match class {
        FieldClass::EvenD => rat(di * di - di + 2, 2 * di * di),
        FieldClass::D3Mod4MinusNonSquare => rat(di * di + 3, 2 * di * di + 2 * di),
        FieldClass::D1Mod4 | FieldClass::OddDMinusSquare => rat(di - 1, 2 * di),
    };
    let conjectured_r = match class {
        FieldClass::EvenD => Exponent::ratio(2 * di + 4, di)?,
        FieldClass::D3Mod4MinusNonSquare => Exponent::ratio(2 * di + 6, di + 1)?,
        FieldClass::D1Mod4 | FieldClass::OddDMinusSquare => Exponent::ratio(2 * di + 2, di - 1)?,
    };
    let st = rat(2 * di + 2, di - 1);
    let best_known = match class {
        FieldClass::EvenD if d == 2 => BestKnown { r: rat(4, 1), kind: EntryKind::Exact, source: "MT04" },
        FieldClass::EvenD if d == 4 => BestKnown { r: lewko_exponent(di), kind: EntryKind::Exact, source: "LL10" },
        FieldClass::EvenD => {
            BestKnown { r: rat(6 * di + 8, 3 * di - 2), kind: EntryKind::Above, source: "improved-even" }
        }
        FieldClass::D3Mod4MinusNonSquare if d == 3 && prime_q => {
            BestKnown { r: rat(18, 5) - rat(1, 1035), kind: EntryKind::Above, source: "LL13" }
        }
        FieldClass::D3Mod4MinusNonSquare if d == 3 => {
            BestKnown { r: rat(18, 5), kind: EntryKind::MinusEps, source: "LL13" }
        }
        FieldClass::D3Mod4MinusNonSquare => {
            BestKnown { r: rat(6 * di + 10, 3 * di - 1), kind: EntryKind::Above, source: "improved-4l+3" }
        }
        FieldClass::D1Mod4 | FieldClass::OddDMinusSquare => BestKnown { r: st, kind: EntryKind::Exact, source: "MT04" },
    };
    Ok(ExponentProfile {
        d,
        field_class: class,
        minus_one_square,
        prime_q,
        k,
        corner: (corner_p, corner_r),
        corner_exponents: (Exponent::from_reciprocal(corner_p)?, Exponent::from_reciprocal(corner_r)?),
        solved_sharp: conjectured_r == Exponent::Finite(st),
        conjectured_r,
        stein_tomas_r: Exponent::Finite(st),
        best_known,
    })
}

/// 2d^2/(d^2-2d+2).
pub fn lewko_exponent(d: i64) -> Rational64 {
    rat(2 * d * d, d * d - 2 * d + 2)
}

/// A p or r entry of the progress tables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum TableEntry {
    Exact(Rational64),
    Above(Rational64),
    MinusEps(Rational64),
    Symbolic(&'static str),
}

impl fmt::Display for TableEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TableEntry::Exact(v) => write!(f, "{v}"),
            TableEntry::Above(v) => write!(f, "> {v}"),
            TableEntry::MinusEps(v) => write!(f, "{v} - eps"),
            TableEntry::Symbolic(s) => f.write_str(s),
        }
    }
}

/// One known or conjectured bounded pair (p, r).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TableRow {
    pub p: TableEntry,
    pub r: TableEntry,
    pub source: &'static str,
    pub note: &'static str,
}

fn row(p: TableEntry, r: TableEntry, source: &'static str, note: &'static str) -> TableRow {
    TableRow { p, r, source, note }
}

/// The progress-table rows for dimension d. `prime_q` only matters for d = 3.
pub fn table_rows(d: usize, minus_one_square: bool, prime_q: bool) -> Result<Vec<TableRow>> {
    use TableEntry::{Above, Exact, MinusEps, Symbolic};
    if d < 2 {
        return Err(Error::Domain(format!("need d >= 2, got {d}")));
    }
    let di = d as i64;
    let two = Exact(rat(2, 1));
    let st = rat(2 * di + 2, di - 1);
    let diag = rat(2 * di, di - 1);
    let lewko = lewko_exponent(di);
    let four_d = rat(4 * di, 3 * di - 2);
    let rows = match (d, minus_one_square) {
        (2, _) => vec![row(two, Exact(rat(4, 1)), "MT04", "S-T, solution")],
        (3, true) => vec![
            row(two, Exact(rat(4, 1)), "MT04", "S-T, sharp"),
            row(Exact(rat(9, 4)), Exact(rat(18, 5)), "Le14", "sharp"),
            row(Symbolic("(18-5eps)/(8-5eps)"), MinusEps(rat(18, 5)), "Le14", "sharp"),
            row(Exact(rat(3, 1)), Exact(rat(3, 1)), "", "conjectured"),
        ],
        (3, false) if prime_q => vec![
            row(two.clone(), Above(rat(18, 5)), "MT04", ""),
            row(Above(rat(8, 5)), Exact(rat(4, 1)), "MT04", ""),
            row(two.clone(), Exact(rat(18, 5)), "LL10", ""),
            row(Exact(rat(8, 5)), Exact(rat(4, 1)), "LL10", "sharp"),
            row(two.clone(), Above(rat(18, 5) - rat(1, 1035)), "LL13", ""),
            row(two, Exact(rat(3, 1)), "", "conjectured"),
        ],
        (3, false) => {
            vec![row(two.clone(), MinusEps(rat(18, 5)), "LL13", ""), row(two, Exact(rat(3, 1)), "", "conjectured")]
        }
        (_, _) if d.is_multiple_of(2) => {
            let mut rows = vec![
                row(two.clone(), Exact(st), "MT04", "S-T"),
                row(two.clone(), Above(lewko), "IK09", ""),
                row(Above(four_d), Exact(rat(4, 1)), "IK09", ""),
                row(two.clone(), Exact(lewko), "LL10", ""),
                row(Exact(four_d), Exact(rat(4, 1)), "LL10", "sharp"),
            ];
            if d >= 6 {
                rows.push(row(two.clone(), Above(rat(6 * di + 8, 3 * di - 2)), "improved-even", ""));
            }
            rows.push(row(Exact(rat(2 * di * di, di * di - di + 2)), Exact(diag), "", "conjectured"));
            rows.push(row(two, Exact(rat(2 * di + 4, di)), "", "conjectured best r for p = 2"));
            rows
        }
        (_, true) => vec![
            row(two, Exact(st), "MT04", "S-T, sharp"),
            row(Exact(st), MinusEps(st), "Le14", ""),
            row(Exact(diag), Exact(diag), "", "conjectured"),
        ],
        (_, false) if d % 4 == 1 => {
            vec![row(two, Exact(st), "MT04", "S-T, sharp"), row(Exact(diag), Exact(diag), "", "conjectured")]
        }
        (_, false) => vec![
            row(two.clone(), Exact(st), "MT04", "S-T"),
            row(two.clone(), Above(lewko), "IK09", ""),
            row(Above(four_d), Exact(rat(4, 1)), "IK09", ""),
            row(two.clone(), Exact(lewko), "LL10", ""),
            row(Exact(four_d), Exact(rat(4, 1)), "LL10", ""),
            row(two.clone(), Above(rat(6 * di + 10, 3 * di - 1)), "improved-4l+3", ""),
            row(Exact(rat(2 * di * di + 2 * di, di * di + 3)), Exact(diag), "", "conjectured"),
            row(two, Exact(rat(2 * di + 6, di + 1)), "", "conjectured best r for p = 2"),
        ],
    };
    Ok(rows)
}

impl ExponentProfile {
    /// conjectured r <= best known r <= Stein-Tomas r.
    pub fn ordering_holds(&self) -> bool {
        let conj = self.conjectured_r.reciprocal();
        let best = self.best_known.r.recip();
        let st = self.stein_tomas_r.reciprocal();
        conj >= best && best >= st && !best.is_zero()
    }
}
