//! Scenario files: a versioned TOML description of the objects the CLI
//! operates on.
//!
//! A scenario file names a chart, an optional sampling domain, and exactly
//! one *payload* describing a geometric object:
//!
//! ```toml
//! version = 1
//!
//! [chart]
//! coords = ["t", "x1", "x2"]
//!
//! [covariant]
//! omega = ["1", "-x2", "0"]
//! Omega = [["0", "1", "0"], ["0", "0"], ["0"]]
//! ```
//!
//! The five payload kinds mirror the ways a structure can be given:
//!
//! * `[covariant]` — a one-form `omega` (coefficient list in coordinate
//!   order) and a two-form `Omega` (matrix of coefficients);
//! * `[contravariant]` — a vector field `E`, a bivector `Lambda`, and
//!   optionally a one-form `omega` for the triple conditions;
//! * `[darboux]` — a normal-form family member `(n, s, omega_funcs)` on
//!   the canonical chart `(t, x1, …, x2n)`;
//! * `[galilei]` — a spatial 3×3 metric `g`, an optional antisymmetric 4×4
//!   force matrix `phi`, and scales `m`, `hbar`, `c` (defaults 1) on the
//!   fixed seven-coordinate phase chart;
//! * `[einstein]` — a Lorentzian 4×4 metric `g` and the same scales.
//!
//! **Matrix convention.** Antisymmetric matrices (`Omega`, `Lambda`,
//! `phi`) are given by their strict upper triangle; symmetric matrices
//! (`g`) by their upper triangle including the diagonal.  Rows may be
//! written ragged (each row starting at its first authoritative column) or
//! as full square rows, in which case the entries below the authoritative
//! triangle are *ignored* and rederived — the upper triangle is the single
//! source of truth, so a file can never smuggle in an asymmetric matrix.
//!
//! Coefficient strings use the expression grammar of [`crate::expr`]
//! (coordinates, declared constants, `+ - * / ^ sqrt`), and parse errors
//! carry the byte offset within the offending string plus the field path.
//!
//! Parsing ([`parse_scenario`]) is pure and cheap; [`ScenarioFile::realize`]
//! builds the chart, the seeded sampler (Einstein payloads automatically
//! add the timelike admissibility constraint), and the geometric objects.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::darboux::{darboux_chart, DarbouxError, DarbouxSpec};
use crate::expr::{
    parse_expr, Chart, ChartError, ParseError, Sampler, SamplerError, ScalarField,
};
use crate::exterior::{ExteriorError, KForm, KVector};
use crate::spacetime::{
    phase_space, EinsteinInput, GalileiInput, PhaseChart, PhaseSpace, SpacetimeError,
    SpacetimeInput,
};
use crate::structures::{ContravariantPair, CovariantPair, StructureError};

/// The one file-format version this build reads and writes.
pub const SCENARIO_VERSION: u32 = 1;

/// Errors from reading, validating or realizing a scenario file.
#[derive(Debug, Error)]
pub enum ScenarioError {
    /// Reading the file failed.
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    /// The TOML syntax or schema is invalid.
    #[error("invalid scenario file: {0}")]
    Toml(#[from] toml::de::Error),
    /// Serializing a scenario back to TOML failed.
    #[error("cannot serialize scenario: {0}")]
    TomlOut(#[from] toml::ser::Error),
    /// The file declares a version this build does not understand.
    #[error("unsupported scenario version {found} (this build reads version {SCENARIO_VERSION})")]
    UnsupportedVersion { found: u32 },
    /// No payload section present.
    #[error("scenario has no payload; exactly one of [covariant], [contravariant], [darboux], [galilei], [einstein] is required")]
    NoPayload,
    /// More than one payload section present.
    #[error("scenario has multiple payloads ({}); exactly one is allowed", .found.join(", "))]
    MultiplePayloads { found: Vec<&'static str> },
    /// An expression string failed to parse; `field` is its path in the
    /// file and the source error carries the byte offset within the string.
    #[error("in {field}: {source}")]
    Expr { field: String, source: ParseError },
    /// A list or matrix has the wrong shape.
    #[error("{field}: {detail}")]
    Shape { field: String, detail: String },
    /// The `[chart]` section conflicts with a payload that fixes its own
    /// chart.
    #[error("[chart] coords {found:?} conflict with the {payload} chart {expected:?}")]
    ChartConflict {
        payload: &'static str,
        expected: Vec<String>,
        found: Vec<String>,
    },
    /// A payload that needs an explicit chart is missing one.
    #[error("[{payload}] requires a [chart] section with coords")]
    MissingChart { payload: &'static str },
    /// Chart construction failed.
    #[error(transparent)]
    Chart(#[from] ChartError),
    /// Sampler construction failed.
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    /// Exterior-algebra construction failed.
    #[error(transparent)]
    Exterior(#[from] ExteriorError),
    /// Normal-form construction failed.
    #[error(transparent)]
    Darboux(#[from] DarbouxError),
    /// Spacetime input validation failed.
    #[error(transparent)]
    Spacetime(#[from] SpacetimeError),
    /// Pair validation failed.
    #[error(transparent)]
    Structure(#[from] StructureError),
    /// The payload has no covariant pair to offer.
    #[error("this scenario has no covariant pair (payload is contravariant-only)")]
    NoCovariant,
    /// The payload has no contravariant pair to offer.
    #[error("this scenario has no contravariant pair (payload is covariant-only)")]
    NoContravariant,
}

fn default_scale() -> f64 {
    1.0
}

/// `[chart]` section: coordinate names and named constants.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartSection {
    /// Coordinate names, in order.  May be omitted for payloads that fix
    /// their own chart (darboux, galilei, einstein).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub coords: Vec<String>,
    /// Named constants usable in expression strings.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub constants: BTreeMap<String, f64>,
}

/// `[domain]` section: the sampling box and an optional admissibility
/// constraint (`admissible ⇔ constraint < 0` at the point).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSection {
    /// One `[lo, hi]` pair per coordinate; defaults to `[-1, 1]` each.
    #[serde(default, rename = "box", skip_serializing_if = "Option::is_none")]
    pub bounds: Option<Vec<[f64; 2]>>,
    /// Expression that must be strictly negative at admissible points.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraint: Option<String>,
}

/// `[covariant]` payload: a one-form and a two-form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CovariantSection {
    /// Coefficients of the one-form in coordinate order.
    pub omega: Vec<String>,
    /// Strict-upper-triangle coefficients of the two-form.
    #[serde(rename = "Omega")]
    pub big_omega: Vec<Vec<String>>,
}

/// `[contravariant]` payload: a vector field, a bivector, and optionally
/// the one-form completing a triple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContravariantSection {
    /// Components of the vector field in coordinate order.
    #[serde(rename = "E")]
    pub e: Vec<String>,
    /// Strict-upper-triangle components of the bivector.
    #[serde(rename = "Lambda")]
    pub lambda: Vec<Vec<String>>,
    /// Optional one-form for the triple conditions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<Vec<String>>,
}

/// `[darboux]` payload: a normal-form family member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DarbouxSection {
    /// Half-dimension: the chart is `(t, x1, …, x2n)`.
    pub n: usize,
    /// Contravariant half-rank, `1 ≤ s ≤ n`.
    pub s: usize,
    /// The 2n coefficient functions `ω¹ … ω²ⁿ` as expression strings.
    pub omega_funcs: Vec<String>,
}

/// `[galilei]` payload: spatial metric, force matrix, scales.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GalileiSection {
    /// Upper triangle (with diagonal) of the 3×3 spatial metric `g_ij`.
    pub g: Vec<Vec<String>>,
    /// Strict upper triangle of the antisymmetric 4×4 force matrix
    /// `phi_{λμ}`; omitted means zero.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<Vec<Vec<String>>>,
    /// Mass scale (default 1).
    #[serde(default = "default_scale")]
    pub m: f64,
    /// Action scale (default 1).
    #[serde(default = "default_scale")]
    pub hbar: f64,
    /// Speed scale (default 1).
    #[serde(default = "default_scale")]
    pub c: f64,
}

/// `[einstein]` payload: Lorentzian metric and scales.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EinsteinSection {
    /// Upper triangle (with diagonal) of the 4×4 metric `g_{λμ}`,
    /// signature `(-+++)`.
    pub g: Vec<Vec<String>>,
    /// Mass scale (default 1).
    #[serde(default = "default_scale")]
    pub m: f64,
    /// Action scale (default 1).
    #[serde(default = "default_scale")]
    pub hbar: f64,
    /// Speed scale (default 1).
    #[serde(default = "default_scale")]
    pub c: f64,
}

/// A parsed scenario file.  Construct with [`parse_scenario`] /
/// [`load_scenario`] or build programmatically and serialize with
/// [`ScenarioFile::to_toml_string`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    /// File-format version; this build reads [`SCENARIO_VERSION`].
    pub version: u32,
    /// Chart description (required for covariant/contravariant payloads).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chart: Option<ChartSection>,
    /// Sampling domain.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainSection>,
    /// Covariant payload.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub covariant: Option<CovariantSection>,
    /// Contravariant payload.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contravariant: Option<ContravariantSection>,
    /// Normal-form payload.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub darboux: Option<DarbouxSection>,
    /// Galilei payload.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub galilei: Option<GalileiSection>,
    /// Einstein payload.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub einstein: Option<EinsteinSection>,
}

/// Parse scenario TOML text and check the schema invariants (version,
/// exactly one payload).
pub fn parse_scenario(text: &str) -> Result<ScenarioFile, ScenarioError> {
    let file: ScenarioFile = toml::from_str(text)?;
    file.validate()?;
    Ok(file)
}

/// Read and parse a scenario file from disk.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<ScenarioFile, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_scenario(&text)
}

impl ScenarioFile {
    fn validate(&self) -> Result<(), ScenarioError> {
        if self.version != SCENARIO_VERSION {
            return Err(ScenarioError::UnsupportedVersion {
                found: self.version,
            });
        }
        let mut present: Vec<&'static str> = Vec::new();
        if self.covariant.is_some() {
            present.push("covariant");
        }
        if self.contravariant.is_some() {
            present.push("contravariant");
        }
        if self.darboux.is_some() {
            present.push("darboux");
        }
        if self.galilei.is_some() {
            present.push("galilei");
        }
        if self.einstein.is_some() {
            present.push("einstein");
        }
        match present.len() {
            0 => Err(ScenarioError::NoPayload),
            1 => Ok(()),
            _ => Err(ScenarioError::MultiplePayloads { found: present }),
        }
    }

    /// The built-in free flat Galilei scenario (`g = δ`, `phi = 0`,
    /// `m = hbar = c = 1`).
    pub fn galilei_flat() -> Self {
        let row = |entries: &[&str]| entries.iter().map(|s| s.to_string()).collect();
        ScenarioFile {
            version: SCENARIO_VERSION,
            chart: None,
            domain: None,
            covariant: None,
            contravariant: None,
            darboux: None,
            galilei: Some(GalileiSection {
                g: vec![row(&["1", "0", "0"]), row(&["1", "0"]), row(&["1"])],
                phi: None,
                m: 1.0,
                hbar: 1.0,
                c: 1.0,
            }),
            einstein: None,
        }
    }

    /// The built-in flat Einstein scenario (`g = diag(-1, 1, 1, 1)`,
    /// `m = hbar = c = 1`).
    pub fn einstein_flat() -> Self {
        let row = |entries: &[&str]| entries.iter().map(|s| s.to_string()).collect();
        ScenarioFile {
            version: SCENARIO_VERSION,
            chart: None,
            domain: None,
            covariant: None,
            contravariant: None,
            darboux: None,
            galilei: None,
            einstein: Some(EinsteinSection {
                g: vec![
                    row(&["-1", "0", "0", "0"]),
                    row(&["1", "0", "0"]),
                    row(&["1", "0"]),
                    row(&["1"]),
                ],
                m: 1.0,
                hbar: 1.0,
                c: 1.0,
            }),
        }
    }

    /// The name of the payload section.
    pub fn payload_name(&self) -> &'static str {
        if self.covariant.is_some() {
            "covariant"
        } else if self.contravariant.is_some() {
            "contravariant"
        } else if self.darboux.is_some() {
            "darboux"
        } else if self.galilei.is_some() {
            "galilei"
        } else {
            "einstein"
        }
    }

    /// Serialize back to TOML (deterministic field order).
    pub fn to_toml_string(&self) -> Result<String, ScenarioError> {
        Ok(toml::to_string(self)?)
    }

    /// Build the chart, the seeded sampler and the geometric objects.
    ///
    /// `seed`/`count` parameterize the sampler; Einstein payloads add the
    /// timelike admissibility constraint to any constraint from the file.
    pub fn realize(&self, seed: u64, count: usize) -> Result<Realized, ScenarioError> {
        self.validate()?;
        let constants = self
            .chart
            .as_ref()
            .map(|c| c.constants.clone())
            .unwrap_or_default();
        let constant_refs: Vec<(&str, f64)> =
            constants.iter().map(|(k, &v)| (k.as_str(), v)).collect();

        if let Some(sec) = &self.covariant {
            let chart = self.explicit_chart(&constant_refs, "covariant")?;
            let omega = parse_one_form(&chart, "covariant.omega", &sec.omega)?;
            let big_omega =
                parse_antisymmetric_2(&chart, "covariant.Omega", &sec.big_omega, Degree2::Form)?;
            let sampler = self.build_sampler(&chart, seed, count, &[])?;
            return Ok(Realized {
                chart,
                sampler,
                object: RealizedObject::Covariant {
                    omega,
                    big_omega: match big_omega {
                        Parsed2::Form(f) => f,
                        Parsed2::Vector(_) => unreachable!("requested a form"),
                    },
                },
            });
        }

        if let Some(sec) = &self.contravariant {
            let chart = self.explicit_chart(&constant_refs, "contravariant")?;
            let e = parse_vector_field(&chart, "contravariant.E", &sec.e)?;
            let lambda = parse_antisymmetric_2(
                &chart,
                "contravariant.Lambda",
                &sec.lambda,
                Degree2::Vector,
            )?;
            let omega = sec
                .omega
                .as_ref()
                .map(|rows| parse_one_form(&chart, "contravariant.omega", rows))
                .transpose()?;
            let sampler = self.build_sampler(&chart, seed, count, &[])?;
            return Ok(Realized {
                chart,
                sampler,
                object: RealizedObject::Contravariant {
                    e,
                    lambda: match lambda {
                        Parsed2::Vector(v) => v,
                        Parsed2::Form(_) => unreachable!("requested a vector"),
                    },
                    omega,
                },
            });
        }

        if let Some(sec) = &self.darboux {
            let base = darboux_chart(sec.n)?;
            let names: Vec<String> =
                (0..base.dim()).map(|i| base.coord_name(i).to_owned()).collect();
            self.check_fixed_chart("darboux", &names)?;
            let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
            let chart = Chart::new(&refs, &constant_refs)?;
            if sec.omega_funcs.len() != 2 * sec.n {
                return Err(ScenarioError::Shape {
                    field: "darboux.omega_funcs".to_owned(),
                    detail: format!(
                        "expected {} coefficient functions, got {}",
                        2 * sec.n,
                        sec.omega_funcs.len()
                    ),
                });
            }
            let funcs = sec
                .omega_funcs
                .iter()
                .enumerate()
                .map(|(i, text)| {
                    parse_expr(text, &chart).map_err(|source| ScenarioError::Expr {
                        field: format!("darboux.omega_funcs[{i}]"),
                        source,
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            let spec = DarbouxSpec::from_functions(&chart, sec.s, funcs)?;
            let sampler = self.build_sampler(&chart, seed, count, &[])?;
            return Ok(Realized {
                chart,
                sampler,
                object: RealizedObject::Darboux(spec),
            });
        }

        if let Some(sec) = &self.galilei {
            let phase = PhaseChart::with_constants(sec.m, sec.hbar, sec.c, &constant_refs)?;
            let names: Vec<String> = (0..phase.chart().dim())
                .map(|i| phase.chart().coord_name(i).to_owned())
                .collect();
            self.check_fixed_chart("galilei", &names)?;
            let chart = phase.chart().clone();
            let g = parse_symmetric(&chart, "galilei.g", &sec.g, 3)?;
            let phi = match &sec.phi {
                Some(rows) => parse_antisymmetric_matrix(&chart, "galilei.phi", rows, 4)?,
                None => vec![vec![ScalarField::zero(&chart); 4]; 4],
            };
            let sampler = self.build_sampler(&chart, seed, count, &[])?;
            let input = GalileiInput::new(&phase, g, phi, &sampler)?;
            let input = SpacetimeInput::Galilei(input);
            let space = Box::new(phase_space(&input)?);
            return Ok(Realized {
                chart,
                sampler,
                object: RealizedObject::Spacetime { input, space },
            });
        }

        let sec = self.einstein.as_ref().expect("validate guarantees a payload");
        let phase = PhaseChart::with_constants(sec.m, sec.hbar, sec.c, &constant_refs)?;
        let names: Vec<String> = (0..phase.chart().dim())
            .map(|i| phase.chart().coord_name(i).to_owned())
            .collect();
        self.check_fixed_chart("einstein", &names)?;
        let chart = phase.chart().clone();
        let g = parse_symmetric(&chart, "einstein.g", &sec.g, 4)?;
        // Validate the metric on the plain box first; the verification
        // sampler then adds the timelike admissibility constraint.
        let box_sampler = self.build_sampler(&chart, seed, count, &[])?;
        let input = EinsteinInput::new(&phase, g, &box_sampler)?;
        let sampler =
            self.build_sampler(&chart, seed, count, &[input.timelike_constraint()])?;
        let input = SpacetimeInput::Einstein(input);
        let space = Box::new(phase_space(&input)?);
        Ok(Realized {
            chart,
            sampler,
            object: RealizedObject::Spacetime { input, space },
        })
    }

    /// Chart for payloads that require explicit coordinates.
    fn explicit_chart(
        &self,
        constants: &[(&str, f64)],
        payload: &'static str,
    ) -> Result<Chart, ScenarioError> {
        let coords = self
            .chart
            .as_ref()
            .filter(|c| !c.coords.is_empty())
            .ok_or(ScenarioError::MissingChart { payload })?
            .coords
            .clone();
        let refs: Vec<&str> = coords.iter().map(|s| s.as_str()).collect();
        Ok(Chart::new(&refs, constants)?)
    }

    /// For payloads with a fixed chart, a `[chart]` coords list is allowed
    /// only if it matches exactly.
    fn check_fixed_chart(
        &self,
        payload: &'static str,
        expected: &[String],
    ) -> Result<(), ScenarioError> {
        if let Some(sec) = &self.chart {
            if !sec.coords.is_empty() && sec.coords != expected {
                return Err(ScenarioError::ChartConflict {
                    payload,
                    expected: expected.to_vec(),
                    found: sec.coords.clone(),
                });
            }
        }
        Ok(())
    }

    fn build_sampler(
        &self,
        chart: &Chart,
        seed: u64,
        count: usize,
        extra_constraints: &[ScalarField],
    ) -> Result<Sampler, ScenarioError> {
        let mut builder = Sampler::builder(chart).seed(seed).count(count);
        if let Some(domain) = &self.domain {
            if let Some(bounds) = &domain.bounds {
                if bounds.len() != chart.dim() {
                    return Err(ScenarioError::Shape {
                        field: "domain.box".to_owned(),
                        detail: format!(
                            "expected {} intervals, got {}",
                            chart.dim(),
                            bounds.len()
                        ),
                    });
                }
                let pairs: Vec<(f64, f64)> = bounds.iter().map(|b| (b[0], b[1])).collect();
                builder = builder.bounding_box(&pairs);
            }
            if let Some(text) = &domain.constraint {
                let field = parse_expr(text, chart).map_err(|source| ScenarioError::Expr {
                    field: "domain.constraint".to_owned(),
                    source,
                })?;
                builder = builder.constraint(field);
            }
        }
        for c in extra_constraints {
            builder = builder.constraint(c.clone());
        }
        Ok(builder.build()?)
    }
}

// ---------------------------------------------------------------------------
// Expression-matrix parsing helpers
// ---------------------------------------------------------------------------

fn parse_components(
    chart: &Chart,
    field: &str,
    rows: &[String],
) -> Result<Vec<ScalarField>, ScenarioError> {
    if rows.len() != chart.dim() {
        return Err(ScenarioError::Shape {
            field: field.to_owned(),
            detail: format!("expected {} components, got {}", chart.dim(), rows.len()),
        });
    }
    rows.iter()
        .enumerate()
        .map(|(i, text)| {
            parse_expr(text, chart).map_err(|source| ScenarioError::Expr {
                field: format!("{field}[{i}]"),
                source,
            })
        })
        .collect()
}

fn parse_one_form(
    chart: &Chart,
    field: &str,
    rows: &[String],
) -> Result<KForm, ScenarioError> {
    let comps = parse_components(chart, field, rows)?;
    let entries = comps
        .into_iter()
        .enumerate()
        .filter(|(_, f)| !f.is_literal_zero())
        .map(|(i, f)| (vec![i], f))
        .collect();
    Ok(KForm::from_coeffs(chart, 1, entries)?)
}

fn parse_vector_field(
    chart: &Chart,
    field: &str,
    rows: &[String],
) -> Result<KVector, ScenarioError> {
    let comps = parse_components(chart, field, rows)?;
    let entries = comps
        .into_iter()
        .enumerate()
        .filter(|(_, f)| !f.is_literal_zero())
        .map(|(i, f)| (vec![i], f))
        .collect();
    Ok(KVector::from_coeffs(chart, 1, entries)?)
}

/// Extract the authoritative entries of row `r` of an upper-triangular
/// matrix given either ragged (starting at column `first`) or as a full
/// row of length `dim` (entries before `first` ignored).
fn triangular_row<'a>(
    row: &'a [String],
    r: usize,
    first: usize,
    dim: usize,
    field: &str,
) -> Result<&'a [String], ScenarioError> {
    if row.len() == dim {
        Ok(&row[first..])
    } else if row.len() == dim - first {
        Ok(row)
    } else {
        Err(ScenarioError::Shape {
            field: format!("{field}[{r}]"),
            detail: format!(
                "row must have {} entries (full) or {} (upper triangle from column {}), got {}",
                dim,
                dim - first,
                first,
                row.len()
            ),
        })
    }
}

enum Degree2 {
    Form,
    Vector,
}

enum Parsed2 {
    Form(KForm),
    Vector(KVector),
}

/// Parse an antisymmetric degree-2 object from its strict upper triangle.
fn parse_antisymmetric_2(
    chart: &Chart,
    field: &str,
    rows: &[Vec<String>],
    kind: Degree2,
) -> Result<Parsed2, ScenarioError> {
    let dim = chart.dim();
    if rows.len() != dim && rows.len() != dim - 1 {
        return Err(ScenarioError::Shape {
            field: field.to_owned(),
            detail: format!(
                "expected {dim} rows (or {} without the empty last row), got {}",
                dim - 1,
                rows.len()
            ),
        });
    }
    let mut entries = Vec::new();
    for (r, row) in rows.iter().enumerate() {
        let upper = triangular_row(row, r, r + 1, dim, field)?;
        for (k, text) in upper.iter().enumerate() {
            let c = r + 1 + k;
            let f = parse_expr(text, chart).map_err(|source| ScenarioError::Expr {
                field: format!("{field}[{r}][{c}]"),
                source,
            })?;
            if !f.is_literal_zero() {
                entries.push((vec![r, c], f));
            }
        }
    }
    Ok(match kind {
        Degree2::Form => Parsed2::Form(KForm::from_coeffs(chart, 2, entries)?),
        Degree2::Vector => Parsed2::Vector(KVector::from_coeffs(chart, 2, entries)?),
    })
}

/// Parse a symmetric matrix of fields from its upper triangle (with
/// diagonal); the lower triangle is mirrored.
fn parse_symmetric(
    chart: &Chart,
    field: &str,
    rows: &[Vec<String>],
    dim: usize,
) -> Result<Vec<Vec<ScalarField>>, ScenarioError> {
    if rows.len() != dim {
        return Err(ScenarioError::Shape {
            field: field.to_owned(),
            detail: format!("expected {dim} rows, got {}", rows.len()),
        });
    }
    let mut out = vec![vec![ScalarField::zero(chart); dim]; dim];
    for (r, row) in rows.iter().enumerate() {
        let upper = triangular_row(row, r, r, dim, field)?;
        for (k, text) in upper.iter().enumerate() {
            let c = r + k;
            let f = parse_expr(text, chart).map_err(|source| ScenarioError::Expr {
                field: format!("{field}[{r}][{c}]"),
                source,
            })?;
            out[r][c] = f.clone();
            out[c][r] = f;
        }
    }
    Ok(out)
}

/// Parse an antisymmetric plain matrix of fields from its strict upper
/// triangle; the lower triangle is negated, the diagonal is zero.
fn parse_antisymmetric_matrix(
    chart: &Chart,
    field: &str,
    rows: &[Vec<String>],
    dim: usize,
) -> Result<Vec<Vec<ScalarField>>, ScenarioError> {
    if rows.len() != dim && rows.len() != dim - 1 {
        return Err(ScenarioError::Shape {
            field: field.to_owned(),
            detail: format!(
                "expected {dim} rows (or {} without the empty last row), got {}",
                dim - 1,
                rows.len()
            ),
        });
    }
    let mut out = vec![vec![ScalarField::zero(chart); dim]; dim];
    for (r, row) in rows.iter().enumerate() {
        let upper = triangular_row(row, r, r + 1, dim, field)?;
        for (k, text) in upper.iter().enumerate() {
            let c = r + 1 + k;
            let f = parse_expr(text, chart).map_err(|source| ScenarioError::Expr {
                field: format!("{field}[{r}][{c}]"),
                source,
            })?;
            out[r][c] = f.clone();
            out[c][r] = -&f;
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Realized scenarios
// ---------------------------------------------------------------------------

/// The geometric object a scenario describes, ready for the engine.
#[derive(Debug, Clone)]
pub enum RealizedObject {
    /// An explicit covariant pair.
    Covariant {
        /// The one-form.
        omega: KForm,
        /// The two-form.
        big_omega: KForm,
    },
    /// An explicit contravariant pair, optionally with a one-form.
    Contravariant {
        /// The vector field.
        e: KVector,
        /// The bivector.
        lambda: KVector,
        /// Optional one-form for triple conditions.
        omega: Option<KForm>,
    },
    /// A normal-form family member (offers both pairs).
    Darboux(DarbouxSpec),
    /// A spacetime model with its fully built phase space.
    Spacetime {
        /// The validated background.
        input: SpacetimeInput,
        /// The induced connection, contact objects and phase structures.
        space: Box<PhaseSpace>,
    },
}

/// A realized scenario: chart, seeded sampler, and the object.
#[derive(Debug, Clone)]
pub struct Realized {
    /// The chart all fields live on.
    pub chart: Chart,
    /// The verification sampler (timelike-constrained for Einstein).
    pub sampler: Sampler,
    /// The geometric object.
    pub object: RealizedObject,
}

impl Realized {
    /// The covariant pair of the scenario, if the payload has one
    /// (covariant, darboux and spacetime payloads do; for spacetime it is
    /// the unscaled pair).
    pub fn covariant_pair(&self, tol: f64) -> Result<CovariantPair, ScenarioError> {
        match &self.object {
            RealizedObject::Covariant { omega, big_omega } => Ok(CovariantPair::new(
                omega.clone(),
                big_omega.clone(),
                &self.sampler,
                tol,
            )?),
            RealizedObject::Contravariant { .. } => Err(ScenarioError::NoCovariant),
            RealizedObject::Darboux(spec) => Ok(spec.covariant_pair(&self.sampler, tol)?),
            RealizedObject::Spacetime { space, .. } => {
                Ok(space.covariant_pair(&self.sampler, tol)?)
            }
        }
    }

    /// The contravariant pair of the scenario, if the payload has one
    /// (contravariant, darboux and spacetime payloads do; for spacetime it
    /// is the unscaled pair).
    pub fn contravariant_pair(&self, tol: f64) -> Result<ContravariantPair, ScenarioError> {
        match &self.object {
            RealizedObject::Covariant { .. } => Err(ScenarioError::NoContravariant),
            RealizedObject::Contravariant { e, lambda, .. } => Ok(ContravariantPair::new(
                e.clone(),
                lambda.clone(),
                &self.sampler,
                tol,
            )?),
            RealizedObject::Darboux(spec) => Ok(spec.contravariant_pair(&self.sampler, tol)?),
            RealizedObject::Spacetime { space, .. } => {
                Ok(space.contravariant_pair(&self.sampler, tol)?)
            }
        }
    }

    /// The one-form accompanying the contravariant data, when available:
    /// the covariant `omega`, the optional `[contravariant] omega`, the
    /// normal-form `ω = dt + ω_k dx^k`, or the unscaled spacetime one-form.
    pub fn one_form(&self) -> Option<KForm> {
        match &self.object {
            RealizedObject::Covariant { omega, .. } => Some(omega.clone()),
            RealizedObject::Contravariant { omega, .. } => omega.clone(),
            RealizedObject::Darboux(spec) => Some(spec.one_form()),
            RealizedObject::Spacetime { space, .. } => Some(space.one_form().clone()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::{classify_contravariant, classify_covariant, StructureKind};

    const TOL: f64 = 1e-9;

    #[test]
    fn covariant_contact_roundtrip() {
        let text = r#"
version = 1

[chart]
coords = ["t", "x1", "x2"]

[covariant]
omega = ["1", "-x2", "0"]
Omega = [["0", "0", "0"], ["1"], []]
"#;
        let file = parse_scenario(text).unwrap();
        assert_eq!(file.payload_name(), "covariant");
        let realized = file.realize(42, 16).unwrap();
        let pair = realized.covariant_pair(TOL).unwrap();
        let report = classify_covariant(&pair, &realized.sampler, TOL).unwrap();
        assert!(report.has_label(StructureKind::Contact));

        // Serialize → parse → identical structure.
        let out = file.to_toml_string().unwrap();
        let reparsed = parse_scenario(&out).unwrap();
        assert_eq!(file, reparsed);
    }

    #[test]
    fn upper_triangle_is_authoritative() {
        // Full square matrix with deliberately wrong lower triangle: the
        // realized two-form must come from the upper triangle alone.
        let full = r#"
version = 1
[chart]
coords = ["t", "x1", "x2"]
[covariant]
omega = ["1", "0", "0"]
Omega = [["0", "1", "x1"], ["99", "0", "t"], ["99", "99", "0"]]
"#;
        let ragged = r#"
version = 1
[chart]
coords = ["t", "x1", "x2"]
[covariant]
omega = ["1", "0", "0"]
Omega = [["1", "x1"], ["t"], []]
"#;
        let a = parse_scenario(full).unwrap().realize(7, 8).unwrap();
        let b = parse_scenario(ragged).unwrap().realize(7, 8).unwrap();
        let (oa, ob) = match (&a.object, &b.object) {
            (
                RealizedObject::Covariant { big_omega: x, .. },
                RealizedObject::Covariant { big_omega: y, .. },
            ) => (x.clone(), y.clone()),
            _ => unreachable!(),
        };
        assert!(oa.residual(&ob, &a.sampler).unwrap() <= 1e-15);
        // And the component below the diagonal is the negated upper entry,
        // not the "99" the file claimed.
        let p = a.sampler.points()[0].clone();
        let upper = oa.component(&[0, 1]).eval(&p).unwrap();
        let lower = oa.component(&[1, 0]).eval(&p).unwrap();
        assert_eq!(upper, 1.0);
        assert_eq!(lower, -1.0);
    }

    #[test]
    fn contravariant_with_constants_and_domain() {
        let text = r#"
version = 1

[chart]
coords = ["t", "x1", "x2"]

[chart.constants]
a = 0.5

[domain]
box = [[-2.0, 2.0], [-1.0, 1.0], [-1.0, 1.0]]
constraint = "x1 * x1 - 0.9"

[contravariant]
E = ["1", "0", "0"]
Lambda = [["0", "0"], ["a * 2"], []]
omega = ["1", "0", "0"]
"#;
        let file = parse_scenario(text).unwrap();
        let realized = file.realize(11, 12).unwrap();
        for p in realized.sampler.points() {
            assert!(p.value(0).abs() <= 2.0);
            assert!(p.value(1) * p.value(1) < 0.9);
        }
        let pair = realized.contravariant_pair(TOL).unwrap();
        let omega = realized.one_form().unwrap();
        let report =
            classify_contravariant(&pair, Some(&omega), &realized.sampler, TOL).unwrap();
        // E = ∂t, Λ = ∂1∧∂2 (coefficient 1 from a·2): the coPoisson normal
        // form up to orientation.
        assert!(report.has_label(StructureKind::CoPoisson));
        assert!(realized.covariant_pair(TOL).is_err());
    }

    #[test]
    fn darboux_payload_realizes_both_pairs() {
        let text = r#"
version = 1

[darboux]
n = 1
s = 1
omega_funcs = ["-x2", "0"]
"#;
        let file = parse_scenario(text).unwrap();
        let realized = file.realize(42, 16).unwrap();
        assert_eq!(realized.chart.dim(), 3);
        let cov = realized.covariant_pair(TOL).unwrap();
        let report = classify_covariant(&cov, &realized.sampler, TOL).unwrap();
        assert!(report.has_label(StructureKind::Contact));
        let contra = realized.contravariant_pair(TOL).unwrap();
        let omega = realized.one_form().unwrap();
        let report =
            classify_contravariant(&contra, Some(&omega), &realized.sampler, TOL).unwrap();
        assert!(report.has_label(StructureKind::Jacobi));
    }

    #[test]
    fn galilei_flat_builtin_realizes() {
        let file = ScenarioFile::galilei_flat();
        let realized = file.realize(42, 12).unwrap();
        assert_eq!(realized.chart.dim(), 7);
        let cov = realized.covariant_pair(1e-8).unwrap();
        let report = classify_covariant(&cov, &realized.sampler, 1e-8).unwrap();
        assert!(report.has_label(StructureKind::Cosymplectic));

        // The builtin serializes and parses back.
        let text = file.to_toml_string().unwrap();
        assert_eq!(parse_scenario(&text).unwrap(), file);
    }

    #[test]
    fn einstein_flat_builtin_is_timelike_sampled() {
        let file = ScenarioFile::einstein_flat();
        let realized = file.realize(42, 12).unwrap();
        let (input, space) = match &realized.object {
            RealizedObject::Spacetime { input, space } => (input, space),
            _ => unreachable!(),
        };
        assert_eq!(input.model_name(), "einstein");
        // Every sample point is strictly timelike with the margin.
        if let SpacetimeInput::Einstein(ei) = input {
            let q = ei.quadratic_form();
            for p in realized.sampler.points() {
                assert!(q.eval(p).unwrap() < -0.05);
            }
        }
        let cov = realized.covariant_pair(1e-8).unwrap();
        let report = classify_covariant(&cov, &realized.sampler, 1e-8).unwrap();
        assert!(report.has_label(StructureKind::Contact));
        let _ = space;
    }

    #[test]
    fn einstein_rejects_euclidean_signature() {
        let text = r#"
version = 1
[einstein]
g = [["1", "0", "0", "0"], ["1", "0", "0"], ["1", "0"], ["1"]]
"#;
        let file = parse_scenario(text).unwrap();
        let err = file.realize(42, 8).unwrap_err();
        assert!(
            matches!(
                err,
                ScenarioError::Spacetime(SpacetimeError::WrongSignature { .. })
            ),
            "{err}"
        );
    }

    #[test]
    fn schema_violations_are_rejected() {
        // Wrong version.
        let err = parse_scenario("version = 2\n[darboux]\nn = 1\ns = 1\nomega_funcs = []\n")
            .unwrap_err();
        assert!(matches!(err, ScenarioError::UnsupportedVersion { found: 2 }), "{err}");

        // No payload.
        let err = parse_scenario("version = 1\n").unwrap_err();
        assert!(matches!(err, ScenarioError::NoPayload), "{err}");

        // Two payloads.
        let err = parse_scenario(
            "version = 1\n[darboux]\nn = 1\ns = 1\nomega_funcs = [\"0\", \"0\"]\n\n[galilei]\ng = [[\"1\",\"0\",\"0\"],[\"1\",\"0\"],[\"1\"]]\n",
        )
        .unwrap_err();
        assert!(matches!(err, ScenarioError::MultiplePayloads { .. }), "{err}");

        // Unknown key.
        let err = parse_scenario("version = 1\nbogus = 3\n").unwrap_err();
        assert!(matches!(err, ScenarioError::Toml(_)), "{err}");

        // Covariant without a chart.
        let err = parse_scenario(
            "version = 1\n[covariant]\nomega = [\"1\"]\nOmega = [[]]\n",
        )
        .unwrap()
        .realize(1, 4)
        .unwrap_err();
        assert!(matches!(err, ScenarioError::MissingChart { .. }), "{err}");
    }

    #[test]
    fn expression_errors_carry_field_and_offset() {
        let text = r#"
version = 1
[chart]
coords = ["t", "x1", "x2"]
[covariant]
omega = ["1", "x1 + ", "0"]
Omega = [["1", "0"], ["0"], []]
"#;
        let err = parse_scenario(text).unwrap().realize(1, 4).unwrap_err();
        match &err {
            ScenarioError::Expr { field, source } => {
                assert_eq!(field, "covariant.omega[1]");
                assert_eq!(source.offset, 5);
            }
            other => panic!("expected Expr error, got {other}"),
        }
        // The rendered message names both the field and the offset.
        let msg = err.to_string();
        assert!(msg.contains("covariant.omega[1]"), "{msg}");
        assert!(msg.contains("offset 5"), "{msg}");
    }

    #[test]
    fn bad_shapes_are_rejected() {
        // One-form with too few components.
        let err = parse_scenario(
            "version = 1\n[chart]\ncoords = [\"t\", \"x1\", \"x2\"]\n[covariant]\nomega = [\"1\"]\nOmega = [[\"0\", \"0\"], [\"0\"], []]\n",
        )
        .unwrap()
        .realize(1, 4)
        .unwrap_err();
        assert!(matches!(err, ScenarioError::Shape { .. }), "{err}");

        // Triangular row with an impossible length.
        let err = parse_scenario(
            "version = 1\n[chart]\ncoords = [\"t\", \"x1\", \"x2\"]\n[covariant]\nomega = [\"1\", \"0\", \"0\"]\nOmega = [[\"0\"], [\"0\"], []]\n",
        )
        .unwrap()
        .realize(1, 4)
        .unwrap_err();
        assert!(matches!(err, ScenarioError::Shape { .. }), "{err}");

        // Domain box with the wrong dimension.
        let err = parse_scenario(
            "version = 1\n[chart]\ncoords = [\"t\", \"x1\", \"x2\"]\n[domain]\nbox = [[-1.0, 1.0]]\n[covariant]\nomega = [\"1\", \"0\", \"0\"]\nOmega = [[\"0\", \"0\"], [\"0\"], []]\n",
        )
        .unwrap()
        .realize(1, 4)
        .unwrap_err();
        assert!(matches!(err, ScenarioError::Shape { .. }), "{err}");
    }

    #[test]
    fn chart_conflict_is_rejected() {
        let text = r#"
version = 1
[chart]
coords = ["a", "b", "c"]
[darboux]
n = 1
s = 1
omega_funcs = ["0", "0"]
"#;
        let err = parse_scenario(text).unwrap().realize(1, 4).unwrap_err();
        assert!(matches!(err, ScenarioError::ChartConflict { .. }), "{err}");
    }
}
