//! JSON front door for sheaf specifications.
//!
//! The primary schema is a list of shifted indicator summands:
//!
//! ```json
//! {"indicators":[{"constraints":[{"a":"0","b":"1","c":"0","rel":">="}],
//!                 "shift":0,"mult":1}]}
//! ```
//!
//! Each constraint is `a·x + b·y  REL  c` with rationals as strings and
//! `rel` one of `"<" "<=" "=" ">=" ">"`; an indicator with no constraints
//! is the whole plane.  An explicit cell-sheaf escape hatch is accepted
//! under `"explicit"` (cells keyed by sign vectors over the given lines,
//! one character per line: `-`, `0`, `+`):
//!
//! ```json
//! {"explicit":{
//!    "lines":[{"a":"0","b":"1","c":"0"}],
//!    "stalks":[{"signs":"+","dims":{"0":1}},
//!              {"signs":"0","dims":{"0":1}}],
//!    "gens":[{"from":"0","to":"+","mats":{"0":[["1"]]}}]}}
//! ```
//!
//! Unlisted cells carry the zero stalk; `diffs` (internal differentials)
//! and `mats` are degree-keyed matrices of rational strings.  All data is
//! validated: shapes, `d∘d = 0`, chain-map and functoriality constraints.
//!
//! On the line the schema uses interval ends instead of constraints, with
//! `null` for an infinite end and `[t, closed]` otherwise:
//!
//! ```json
//! {"indicators":[{"lo":["0",true],"hi":["1",false],"shift":0,"mult":1}]}
//! ```

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Deserialize;

use super::line::{Interval1D, SheafSpec1D};
use super::{CellSheaf, CsError, GradedMat, IndicatorSpec, SheafSpec};
use crate::exactlin::{ChainComplex, GradedDims, Mat};
use crate::plgeom::{Arrangement2D, Constraint, LCSet, Line, Rel};
use crate::ratio::parse_rat;
use crate::{QMat, Rat};

#[derive(Deserialize)]
pub(crate) struct ConstraintRepr {
    a: String,
    b: String,
    c: String,
    rel: Rel,
}

impl ConstraintRepr {
    pub(crate) fn build(&self) -> Result<Constraint, CsError> {
        Constraint::new(rat_of(&self.a)?, rat_of(&self.b)?, rat_of(&self.c)?, self.rel)
            .map_err(CsError::Geometry)
    }
}

#[derive(Deserialize)]
struct IndicatorRepr {
    #[serde(default)]
    constraints: Vec<ConstraintRepr>,
    #[serde(default)]
    shift: i32,
    #[serde(default = "one")]
    mult: usize,
}

fn one() -> usize {
    1
}

#[derive(Deserialize)]
struct StalkRepr {
    signs: String,
    #[serde(default)]
    dims: GradedDims,
    #[serde(default)]
    diffs: BTreeMap<String, Vec<Vec<String>>>,
}

#[derive(Deserialize)]
struct GenRepr {
    from: String,
    to: String,
    #[serde(default)]
    mats: BTreeMap<String, Vec<Vec<String>>>,
}

#[derive(Deserialize)]
struct ExplicitRepr {
    lines: Vec<Line>,
    #[serde(default)]
    stalks: Vec<StalkRepr>,
    #[serde(default)]
    gens: Vec<GenRepr>,
}

#[derive(Deserialize)]
struct SheafRepr {
    #[serde(default)]
    indicators: Vec<IndicatorRepr>,
    #[serde(default)]
    explicit: Option<ExplicitRepr>,
}

fn rat_of(s: &str) -> Result<Rat, CsError> {
    parse_rat(s).map_err(|e| CsError::BadData(e.to_string()))
}

fn mat_of(rows: &[Vec<String>]) -> Result<QMat, CsError> {
    let parsed: Result<Vec<Vec<Rat>>, CsError> = rows
        .iter()
        .map(|r| r.iter().map(|s| rat_of(s)).collect())
        .collect();
    Ok(Mat::from_rows(parsed?))
}

fn degree_keyed_mats(
    raw: &BTreeMap<String, Vec<Vec<String>>>,
) -> Result<BTreeMap<i32, QMat>, CsError> {
    let mut out = BTreeMap::new();
    for (k, rows) in raw {
        let deg: i32 = k
            .parse()
            .map_err(|_| CsError::BadData(format!("bad degree key {k:?}")))?;
        out.insert(deg, mat_of(rows)?);
    }
    Ok(out)
}

/// Parse the indicator part of the schema into a [`SheafSpec`].
pub fn spec_from_json(json: &str) -> Result<SheafSpec, CsError> {
    let repr: SheafRepr = serde_json::from_str(json)?;
    if repr.explicit.is_some() {
        return Err(CsError::BadData(
            "explicit sheaf given; use sheaf_from_json".into(),
        ));
    }
    spec_of(&repr.indicators)
}

fn spec_of(indicators: &[IndicatorRepr]) -> Result<SheafSpec, CsError> {
    let mut out = SheafSpec::default();
    for ind in indicators {
        let constraints: Vec<Constraint> =
            ind.constraints.iter().map(|c| c.build()).collect::<Result<_, _>>()?;
        out.indicators.push(IndicatorSpec {
            support: LCSet::new(constraints),
            shift: ind.shift,
            mult: ind.mult,
        });
    }
    Ok(out)
}

fn signs_of(s: &str, nlines: usize) -> Result<Vec<i8>, CsError> {
    let signs: Result<Vec<i8>, CsError> = s
        .chars()
        .map(|ch| match ch {
            '-' => Ok(-1),
            '0' => Ok(0),
            '+' => Ok(1),
            other => Err(CsError::BadData(format!("bad sign character {other:?}"))),
        })
        .collect();
    let signs = signs?;
    if signs.len() != nlines {
        return Err(CsError::BadData(format!(
            "sign vector {s:?} has {} entries for {} lines",
            signs.len(),
            nlines
        )));
    }
    Ok(signs)
}

fn explicit_sheaf(repr: &ExplicitRepr) -> Result<CellSheaf, CsError> {
    let arr = Arc::new(Arrangement2D::build(&repr.lines));
    if arr.lines().len() != repr.lines.len() {
        return Err(CsError::BadData("duplicate lines in explicit sheaf".into()));
    }
    // The arrangement may reorder lines; sign strings are in input order.
    let perm: Vec<usize> = repr
        .lines
        .iter()
        .map(|l| arr.lines().iter().position(|m| m == l).unwrap())
        .collect();
    let find_cell = |s: &str| -> Result<usize, CsError> {
        let user_signs = signs_of(s, repr.lines.len())?;
        let mut signs = vec![0i8; repr.lines.len()];
        for (i, &sg) in user_signs.iter().enumerate() {
            signs[perm[i]] = sg;
        }
        (0..arr.cells().len())
            .find(|&c| arr.cell(c).signs == signs)
            .ok_or_else(|| CsError::BadData(format!("no cell with sign vector {s:?}")))
    };
    let mut stalks = vec![ChainComplex::zero(); arr.cells().len()];
    for st in &repr.stalks {
        let c = find_cell(&st.signs)?;
        let dims: BTreeMap<i32, usize> = st.dims.iter().collect();
        let diffs = degree_keyed_mats(&st.diffs)?;
        stalks[c] = ChainComplex::new(dims, diffs)?;
    }
    let mut gens = BTreeMap::new();
    for g in &repr.gens {
        let lo = find_cell(&g.from)?;
        let hi = find_cell(&g.to)?;
        gens.insert((lo, hi), GradedMat::from_comps(degree_keyed_mats(&g.mats)?));
    }
    CellSheaf::from_parts(arr, stalks, gens)
}

/// Parse and compile a sheaf from either schema.
pub fn sheaf_from_json(json: &str) -> Result<CellSheaf, CsError> {
    let repr: SheafRepr = serde_json::from_str(json)?;
    if let Some(explicit) = &repr.explicit {
        if !repr.indicators.is_empty() {
            return Err(CsError::BadData(
                "a sheaf is either indicators or explicit, not both".into(),
            ));
        }
        return explicit_sheaf(explicit);
    }
    CellSheaf::compile(&spec_of(&repr.indicators)?)
}

#[derive(Deserialize)]
struct Indicator1DRepr {
    #[serde(default)]
    lo: Option<(String, bool)>,
    #[serde(default)]
    hi: Option<(String, bool)>,
    #[serde(default)]
    shift: i32,
    #[serde(default = "one")]
    mult: usize,
}

#[derive(Deserialize)]
struct Sheaf1DRepr {
    #[serde(default)]
    indicators: Vec<Indicator1DRepr>,
}

/// Parse a 1D sheaf specification.
pub fn spec1d_from_json(json: &str) -> Result<SheafSpec1D, CsError> {
    let repr: Sheaf1DRepr = serde_json::from_str(json)?;
    let mut out = SheafSpec1D::default();
    for ind in &repr.indicators {
        let end = |e: &Option<(String, bool)>| -> Result<Option<(Rat, bool)>, CsError> {
            e.as_ref()
                .map(|(t, closed)| Ok((rat_of(t)?, *closed)))
                .transpose()
        };
        out.indicators.push(super::line::IndicatorSpec1D {
            support: Interval1D {
                lo: end(&ind.lo)?,
                hi: end(&ind.hi)?,
            },
            shift: ind.shift,
            mult: ind.mult,
        });
    }
    Ok(out)
}
