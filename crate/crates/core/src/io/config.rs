//! Versioned TOML experiment configuration.
//!
//! Parsing happens in two passes. A schema walk over the raw TOML tree collects
//! every unknown key, missing key and type mismatch; only a structurally clean
//! tree is handed to serde. Semantic checks then run and also collect all errors.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use toml::Value;

use crate::error::{KacError, Result};
use crate::fock::DEFAULT_DIMENSION_CAP;
use crate::game::OptimizerSpec;
use crate::lattice::{Boundary, HoppingKernel, KacImages, MeanFieldParams, ModelParams};
use crate::potential::{Family, GaussianTerm, PairPotential, RadialSpline, Role};
use crate::quasifree::QuadratureSpec;
use crate::sweep::{SweepOrder, SweepPlan};

pub const SCHEMA_VERSION: i64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoleDecl {
    Plus,
    Minus,
}

impl RoleDecl {
    pub fn role(&self) -> Role {
        match self {
            RoleDecl::Plus => Role::Repulsive,
            RoleDecl::Minus => Role::Attractive,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyName {
    Yukawa,
    PlainGaussian,
    GaussianMixture,
    Table,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermDecl {
    pub weight: f64,
    pub scales: Vec<f64>,
}

/// A named pair potential. Only the parameters of its family may be present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialDecl {
    pub name: String,
    pub role: RoleDecl,
    pub family: FamilyName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms: Option<Vec<TermDecl>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoppingEntry {
    pub offset: Vec<i64>,
    pub value: f64,
}

/// Either a named preset or explicit entries, plus an optional on-site shift.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoppingDecl {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entries: Option<Vec<HoppingEntry>>,
    #[serde(default)]
    pub shift: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ModelRefs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_plus: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_minus: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EtaOverride {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plus: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minus: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameDecl {
    /// Game points `[c₋, c₊]` evaluated by `pressure-mf`.
    #[serde(default = "default_points")]
    pub points: Vec<[f64; 2]>,
    /// Resolution of the dumped payoff surface.
    #[serde(default = "default_grid")]
    pub grid: [usize; 2],
    #[serde(default = "default_damping")]
    pub damping: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<[f64; 2]>,
}

fn default_points() -> Vec<[f64; 2]> {
    vec![[0.0, 0.0]]
}

fn default_grid() -> [usize; 2] {
    [41, 41]
}

fn default_damping() -> f64 {
    0.5
}

impl Default for GameDecl {
    fn default() -> Self {
        GameDecl {
            points: default_points(),
            grid: default_grid(),
            damping: default_damping(),
            start: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub schema_version: i64,
    pub dimension: usize,
    pub betas: Vec<f64>,
    pub boundary: Boundary,
    #[serde(rename = "L")]
    pub l_list: Vec<usize>,
    pub gamma_minus_schedule: Vec<f64>,
    pub gamma_plus_schedule: Vec<f64>,
    #[serde(default = "default_orders")]
    pub orders: Vec<SweepOrder>,
    #[serde(default)]
    pub include_onsite_correction: bool,
    #[serde(default)]
    pub kac_images: KacImages,
    #[serde(default = "default_cap")]
    pub dimension_cap: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    pub hopping: HoppingDecl,
    #[serde(default)]
    pub potentials: Vec<PotentialDecl>,
    #[serde(default)]
    pub model: ModelRefs,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<EtaOverride>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<QuadratureSpec>,
    #[serde(default)]
    pub optimizer: OptimizerSpec,
    #[serde(default)]
    pub game: GameDecl,
}

fn default_orders() -> Vec<SweepOrder> {
    vec![SweepOrder::MinusFirst, SweepOrder::PlusFirst]
}

fn default_cap() -> usize {
    DEFAULT_DIMENSION_CAP
}

#[derive(Clone, Copy)]
enum Kind {
    Int,
    SignedInt,
    Float,
    Bool,
    Str,
    Choice(&'static [&'static str]),
    Ints,
    Offset,
    Floats,
    FloatPair,
    FloatPairs,
    IntPair,
    Choices(&'static [&'static str]),
    Table(&'static [Field]),
    Tables(&'static [Field]),
}

struct Field {
    key: &'static str,
    kind: Kind,
    required: bool,
}

const fn req(key: &'static str, kind: Kind) -> Field {
    Field { key, kind, required: true }
}

const fn opt(key: &'static str, kind: Kind) -> Field {
    Field { key, kind, required: false }
}

const TERM: &[Field] = &[req("weight", Kind::Float), req("scales", Kind::Floats)];
const POTENTIAL: &[Field] = &[
    req("name", Kind::Str),
    req("role", Kind::Choice(&["plus", "minus"])),
    req(
        "family",
        Kind::Choice(&["yukawa", "plain_gaussian", "gaussian_mixture", "table"]),
    ),
    opt("c0", Kind::Float),
    opt("c1", Kind::Float),
    opt("c2", Kind::Float),
    opt("width", Kind::Float),
    opt("terms", Kind::Tables(TERM)),
    opt("radii", Kind::Floats),
    opt("values", Kind::Floats),
];
const HOPPING_ENTRY: &[Field] = &[req("offset", Kind::Offset), req("value", Kind::Float)];
const HOPPING: &[Field] = &[
    opt("preset", Kind::Choice(&["laplacian", "zero"])),
    opt("entries", Kind::Tables(HOPPING_ENTRY)),
    opt("shift", Kind::Float),
];
const MODEL: &[Field] = &[opt("f_plus", Kind::Str), opt("f_minus", Kind::Str)];
const ETA: &[Field] = &[opt("plus", Kind::Float), opt("minus", Kind::Float)];
const QUADRATURE: &[Field] = &[
    req("scheme", Kind::Choice(&["midpoint_tensor", "gauss_legendre_tensor"])),
    req("points_per_axis", Kind::Int),
    req("refinement_check", Kind::Bool),
    req("tolerance", Kind::Float),
];
const OPTIMIZER: &[Field] = &[
    opt("grid_points", Kind::Int),
    opt("x_tol", Kind::Float),
    opt("max_iter", Kind::Int),
    opt("degeneracy_window", Kind::Float),
    opt("tol_gap", Kind::Float),
];
const GAME: &[Field] = &[
    opt("points", Kind::FloatPairs),
    opt("grid", Kind::IntPair),
    opt("damping", Kind::Float),
    opt("start", Kind::FloatPair),
];
const ORDERS: &[&str] = &["minus_first", "plus_first", "diagonal"];
const ROOT: &[Field] = &[
    req("schema_version", Kind::Int),
    req("dimension", Kind::Int),
    req("betas", Kind::Floats),
    req("boundary", Kind::Choice(&["open", "periodic"])),
    req("L", Kind::Ints),
    req("gamma_minus_schedule", Kind::Floats),
    req("gamma_plus_schedule", Kind::Floats),
    opt("orders", Kind::Choices(ORDERS)),
    opt("include_onsite_correction", Kind::Bool),
    opt("kac_images", Kind::Choice(&["minimum_image", "full"])),
    opt("dimension_cap", Kind::Int),
    opt("seed", Kind::Int),
    opt("output_dir", Kind::Str),
    req("hopping", Kind::Table(HOPPING)),
    opt("potentials", Kind::Tables(POTENTIAL)),
    opt("model", Kind::Table(MODEL)),
    opt("eta", Kind::Table(ETA)),
    opt("quadrature", Kind::Table(QUADRATURE)),
    opt("optimizer", Kind::Table(OPTIMIZER)),
    opt("game", Kind::Table(GAME)),
];

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

/// Checks `v` against `kind`, widening integers to floats where floats are expected.
fn check(v: &mut Value, kind: Kind, path: &str, errors: &mut Vec<String>) {
    let mut bad = |expected: &str| errors.push(format!("`{path}` must be {expected}"));
    match kind {
        Kind::Int => {
            if !matches!(v, Value::Integer(i) if *i >= 0) {
                bad("a nonnegative integer");
            }
        }
        Kind::SignedInt => {
            if !v.is_integer() {
                bad("an integer");
            }
        }
        Kind::Float => match v {
            Value::Integer(i) => *v = Value::Float(*i as f64),
            Value::Float(_) => {}
            _ => bad("a number"),
        },
        Kind::Bool => {
            if !v.is_bool() {
                bad("a boolean");
            }
        }
        Kind::Str => {
            if !v.is_str() {
                bad("a string");
            }
        }
        Kind::Choice(options) => match v.as_str() {
            Some(s) if options.contains(&s) => {}
            _ => bad(&format!("one of {}", options.join(", "))),
        },
        Kind::Ints | Kind::Offset | Kind::Floats | Kind::Choices(_) | Kind::FloatPairs => {
            let inner = match kind {
                Kind::Ints => Kind::Int,
                Kind::Offset => Kind::SignedInt,
                Kind::Floats => Kind::Float,
                Kind::Choices(o) => Kind::Choice(o),
                _ => Kind::FloatPair,
            };
            match v.as_array_mut() {
                Some(items) => {
                    for (i, item) in items.iter_mut().enumerate() {
                        check(item, inner, &format!("{path}[{i}]"), errors);
                    }
                }
                None => bad("an array"),
            }
        }
        Kind::FloatPair | Kind::IntPair => {
            let inner = if matches!(kind, Kind::FloatPair) {
                Kind::Float
            } else {
                Kind::Int
            };
            match v.as_array_mut() {
                Some(items) if items.len() == 2 => {
                    for (i, item) in items.iter_mut().enumerate() {
                        check(item, inner, &format!("{path}[{i}]"), errors);
                    }
                }
                _ => bad("an array of two numbers"),
            }
        }
        Kind::Table(fields) => match v.as_table_mut() {
            Some(t) => walk(t, fields, path, errors),
            None => bad("a table"),
        },
        Kind::Tables(fields) => match v.as_array_mut() {
            Some(items) => {
                for (i, item) in items.iter_mut().enumerate() {
                    let p = format!("{path}[{i}]");
                    match item.as_table_mut() {
                        Some(t) => walk(t, fields, &p, errors),
                        None => errors.push(format!("`{p}` must be a table")),
                    }
                }
            }
            None => bad("an array of tables"),
        },
    }
}

fn walk(table: &mut toml::Table, fields: &[Field], path: &str, errors: &mut Vec<String>) {
    for key in table.keys() {
        if !fields.iter().any(|f| f.key == key) {
            errors.push(format!("unknown key `{}`", join(path, key)));
        }
    }
    for f in fields {
        match table.get_mut(f.key) {
            Some(v) => check(v, f.kind, &join(path, f.key), errors),
            None if f.required => errors.push(format!("missing key `{}`", join(path, f.key))),
            None => {}
        }
    }
}

fn strictly_decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

impl PotentialDecl {
    fn allowed_keys(&self) -> &'static [&'static str] {
        match self.family {
            FamilyName::Yukawa => &["c0", "c1", "c2"],
            FamilyName::PlainGaussian => &["width"],
            FamilyName::GaussianMixture => &["terms"],
            FamilyName::Table => &["radii", "values"],
        }
    }

    fn present_keys(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        for (k, present) in [
            ("c0", self.c0.is_some()),
            ("c1", self.c1.is_some()),
            ("c2", self.c2.is_some()),
            ("width", self.width.is_some()),
            ("terms", self.terms.is_some()),
            ("radii", self.radii.is_some()),
            ("values", self.values.is_some()),
        ] {
            if present {
                out.push(k);
            }
        }
        out
    }

    /// Builds the potential in dimension `dim`.
    pub fn build(&self, dim: usize) -> Result<PairPotential<f64>> {
        let role = self.role.role();
        let need = |v: Option<f64>, key: &str| {
            v.ok_or_else(|| KacError::config(format!("potential `{}` needs `{key}`", self.name)))
        };
        let family = match self.family {
            FamilyName::Yukawa => Family::Yukawa {
                c0: need(self.c0, "c0")?,
                c1: need(self.c1, "c1")?,
                c2: need(self.c2, "c2")?,
            },
            FamilyName::PlainGaussian => Family::PlainGaussian {
                width: need(self.width, "width")?,
            },
            FamilyName::GaussianMixture => {
                let terms = self.terms.as_ref().ok_or_else(|| {
                    KacError::config(format!("potential `{}` needs `terms`", self.name))
                })?;
                Family::GaussianMixture(
                    terms
                        .iter()
                        .map(|t| GaussianTerm {
                            weight: t.weight,
                            scales: t.scales.clone(),
                        })
                        .collect(),
                )
            }
            FamilyName::Table => {
                let (Some(r), Some(v)) = (&self.radii, &self.values) else {
                    return Err(KacError::config(format!(
                        "potential `{}` needs `radii` and `values`",
                        self.name
                    )));
                };
                Family::TableSpline(RadialSpline::new(r.clone(), v.clone())?)
            }
        };
        PairPotential::new(family, dim, role)
    }
}

impl ExperimentConfig {
    /// Smallest valid configuration: d = 1, Laplacian hopping, Yukawa repulsion, β = 1.
    pub fn minimal() -> Self {
        ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            dimension: 1,
            betas: vec![1.0],
            boundary: Boundary::Periodic,
            l_list: vec![0, 1],
            gamma_minus_schedule: vec![0.4, 0.2, 0.1],
            gamma_plus_schedule: vec![0.4, 0.2, 0.1],
            orders: default_orders(),
            include_onsite_correction: false,
            kac_images: KacImages::Full,
            dimension_cap: DEFAULT_DIMENSION_CAP,
            seed: 0,
            output_dir: None,
            hopping: HoppingDecl {
                preset: Some("laplacian".into()),
                entries: None,
                shift: 0.0,
            },
            potentials: vec![PotentialDecl {
                name: "repulsion".into(),
                role: RoleDecl::Plus,
                family: FamilyName::Yukawa,
                c0: Some(1.0),
                c1: Some(1.0),
                c2: Some(1.0),
                width: None,
                terms: None,
                radii: None,
                values: None,
            }],
            model: ModelRefs {
                f_plus: Some("repulsion".into()),
                f_minus: None,
            },
            eta: None,
            quadrature: None,
            optimizer: OptimizerSpec::default(),
            game: GameDecl::default(),
        }
    }

    /// Parses TOML text, reporting every problem found.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let mut root: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| KacError::config(format!("TOML syntax: {}", e.message())))?;
        let mut errors = Vec::new();
        walk(&mut root, ROOT, "", &mut errors);
        // typed decoding still works around unknown keys, so semantic errors can join the list
        let decoded: std::result::Result<ExperimentConfig, _> = Value::Table(root).try_into();
        match decoded {
            Ok(cfg) => {
                if let Err(KacError::Config(more)) = cfg.validate() {
                    errors.extend(more);
                }
                if errors.is_empty() {
                    Ok(cfg)
                } else {
                    Err(KacError::Config(errors))
                }
            }
            Err(e) if errors.is_empty() => Err(KacError::config(e.message().to_string())),
            Err(_) => Err(KacError::Config(errors)),
        }
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| KacError::config(format!("cannot serialize: {e}")))
    }

    /// Semantic checks; all failures are collected.
    pub fn validate(&self) -> Result<()> {
        let mut errors = Vec::new();
        if self.schema_version != SCHEMA_VERSION {
            errors.push(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        if self.dimension == 0 {
            errors.push("dimension must be positive".into());
        }
        if self.betas.is_empty() {
            errors.push("betas is empty".into());
        }
        if self.betas.iter().any(|b| !(b.is_finite() && *b > 0.0)) {
            errors.push("betas must be finite and positive".into());
        }
        if self.l_list.is_empty() {
            errors.push("L is empty".into());
        }
        for (name, s) in [
            ("gamma_minus_schedule", &self.gamma_minus_schedule),
            ("gamma_plus_schedule", &self.gamma_plus_schedule),
        ] {
            if s.is_empty() {
                errors.push(format!("{name} is empty"));
            }
            for g in s {
                if !(*g > 0.0 && *g < 1.0) {
                    errors.push(format!(
                        "{name}: gamma = {g} must lie in the open interval (0, 1)"
                    ));
                }
            }
            if !strictly_decreasing(s) {
                errors.push(format!("{name} must be strictly decreasing"));
            }
        }
        if self.orders.contains(&SweepOrder::Diagonal)
            && self.gamma_minus_schedule.len() != self.gamma_plus_schedule.len()
        {
            errors.push("diagonal order needs schedules of equal length".into());
        }
        match (&self.hopping.preset, &self.hopping.entries) {
            (Some(_), Some(_)) => errors.push("hopping: give either `preset` or `entries`".into()),
            (None, None) => errors.push("hopping: one of `preset` or `entries` is required".into()),
            _ => {
                if let Err(e) = self.hopping_kernel() {
                    errors.push(format!("hopping: {}", message(&e)));
                }
            }
        }
        let mut names: Vec<&str> = Vec::new();
        for p in &self.potentials {
            if names.contains(&p.name.as_str()) {
                errors.push(format!("potential `{}` declared twice", p.name));
            }
            names.push(&p.name);
            let allowed = p.allowed_keys();
            for k in p.present_keys() {
                if !allowed.contains(&k) {
                    errors.push(format!(
                        "potential `{}`: `{k}` does not belong to its family",
                        p.name
                    ));
                }
            }
            if let Err(e) = p.build(self.dimension.max(1)) {
                errors.push(format!("potential `{}`: {}", p.name, message(&e)));
            }
        }
        for (slot, name, role) in [
            ("f_plus", &self.model.f_plus, RoleDecl::Plus),
            ("f_minus", &self.model.f_minus, RoleDecl::Minus),
        ] {
            if let Some(n) = name {
                match self.potentials.iter().find(|p| &p.name == n) {
                    None => errors.push(format!("model.{slot} refers to undeclared potential `{n}`")),
                    Some(p) if p.role != role => errors.push(format!(
                        "model.{slot} refers to `{n}` whose role is not {}",
                        if role == RoleDecl::Plus { "plus" } else { "minus" }
                    )),
                    _ => {}
                }
            }
        }
        if let Some(eta) = &self.eta {
            for (k, v) in [("plus", eta.plus), ("minus", eta.minus)] {
                if let Some(v) = v {
                    if !(v.is_finite() && v >= 0.0) {
                        errors.push(format!("eta.{k} must be finite and nonnegative"));
                    }
                }
            }
        }
        if let Some(q) = &self.quadrature {
            if let Err(e) = q.validate() {
                errors.push(message(&e));
            }
        }
        if let Err(e) = self.optimizer.validate() {
            errors.push(message(&e));
        }
        if self.game.grid.iter().any(|n| *n < 2) {
            errors.push("game.grid needs at least 2 points per axis".into());
        }
        if !(self.game.damping > 0.0 && self.game.damping <= 1.0) {
            errors.push("game.damping must lie in (0, 1]".into());
        }
        if self.game.points.iter().flatten().any(|c| !(c.is_finite() && *c >= 0.0)) {
            errors.push("game.points must be finite and nonnegative".into());
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(KacError::Config(errors))
        }
    }

    pub fn hopping_kernel(&self) -> Result<HoppingKernel<f64>> {
        let d = self.dimension;
        let base = match (&self.hopping.preset, &self.hopping.entries) {
            (Some(p), None) if p == "laplacian" => HoppingKernel::laplacian(d),
            (Some(p), None) if p == "zero" => HoppingKernel::zero(d),
            (Some(p), None) => return Err(KacError::config(format!("unknown hopping preset `{p}`"))),
            (None, Some(entries)) => {
                HoppingKernel::new(d, entries.iter().map(|e| (e.offset.clone(), e.value)))?
            }
            _ => return Err(KacError::config("hopping: give exactly one of `preset` or `entries`")),
        };
        Ok(if self.hopping.shift != 0.0 {
            base.shifted(self.hopping.shift)
        } else {
            base
        })
    }

    fn potential_or_zero(&self, name: &Option<String>, role: Role) -> Result<PairPotential<f64>> {
        match name {
            None => Ok(PairPotential::zero(self.dimension, role)),
            Some(n) => self
                .potentials
                .iter()
                .find(|p| &p.name == n)
                .ok_or_else(|| KacError::config(format!("undeclared potential `{n}`")))?
                .build(self.dimension),
        }
    }

    pub fn f_plus(&self) -> Result<PairPotential<f64>> {
        self.potential_or_zero(&self.model.f_plus, Role::Repulsive)
    }

    pub fn f_minus(&self) -> Result<PairPotential<f64>> {
        self.potential_or_zero(&self.model.f_minus, Role::Attractive)
    }

    pub fn quadrature_spec(&self) -> QuadratureSpec {
        self.quadrature
            .unwrap_or_else(|| QuadratureSpec::default_for(self.dimension))
    }

    /// Kac model at inverse temperature `beta` and the given γ pair.
    pub fn model_params(&self, beta: f64, gamma_minus: f64, gamma_plus: f64) -> Result<ModelParams<f64>> {
        let mp = ModelParams {
            beta,
            hopping: self.hopping_kernel()?,
            f_plus: self.f_plus()?,
            f_minus: self.f_minus()?,
            gamma_plus,
            gamma_minus,
            include_onsite_correction: self.include_onsite_correction,
            kac_images: self.kac_images,
        };
        mp.validate()?;
        Ok(mp)
    }

    /// Mean-field couplings: overrides if given, otherwise `f̂±(0)`.
    pub fn mean_field(&self, beta: f64) -> Result<MeanFieldParams<f64>> {
        let eta = self.eta.unwrap_or_default();
        let plus = match eta.plus {
            Some(v) => v,
            None => self.f_plus()?.born_zero()?,
        };
        let minus = match eta.minus {
            Some(v) => v,
            None => self.f_minus()?.born_zero()?,
        };
        MeanFieldParams::new(beta, self.hopping_kernel()?, plus, minus)
    }

    pub fn sweep_plan(&self, beta: f64) -> Result<SweepPlan<f64>> {
        let plan = SweepPlan {
            model: self.model_params(
                beta,
                self.gamma_minus_schedule[0],
                self.gamma_plus_schedule[0],
            )?,
            dim: self.dimension,
            l_list: self.l_list.clone(),
            gamma_minus_schedule: self.gamma_minus_schedule.clone(),
            gamma_plus_schedule: self.gamma_plus_schedule.clone(),
            orders: self.orders.clone(),
            beta,
            boundary: self.boundary,
            dimension_cap: self.dimension_cap,
        };
        plan.validate()?;
        Ok(plan)
    }

    /// SHA-256 of the canonical JSON form, ignoring where outputs are written.
    pub fn config_hash(&self) -> String {
        let canonical = ExperimentConfig {
            output_dir: None,
            ..self.clone()
        };
        let json = serde_json::to_vec(&canonical).expect("config is always serializable");
        hex::encode(Sha256::digest(&json))
    }
}

fn message(e: &KacError) -> String {
    match e {
        KacError::Config(v) => v.join("; "),
        KacError::Domain(m) | KacError::Unsupported(m) => m.clone(),
        other => other.to_string(),
    }
}

pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| KacError::config(format!("cannot read {}: {e}", path.display())))?;
    ExperimentConfig::from_toml_str(&text)
}

/// Applies `key=value` pairs separated by commas to the tolerance knobs.
pub fn apply_tolerance_overrides(cfg: &mut ExperimentConfig, spec: &str) -> Result<()> {
    let mut errors = Vec::new();
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let Some((key, value)) = item.split_once('=') else {
            errors.push(format!("override `{item}` is not key=value"));
            continue;
        };
        let Ok(v) = value.trim().parse::<f64>() else {
            errors.push(format!("override `{item}` has a non-numeric value"));
            continue;
        };
        if !(v.is_finite() && v > 0.0) {
            errors.push(format!("override `{item}` must be positive"));
            continue;
        }
        match key.trim() {
            "quadrature" => {
                let mut q = cfg.quadrature_spec();
                q.tolerance = v;
                cfg.quadrature = Some(q);
            }
            "x_tol" => cfg.optimizer.x_tol = v,
            "tol_gap" => cfg.optimizer.tol_gap = v,
            "degeneracy_window" => cfg.optimizer.degeneracy_window = v,
            other => errors.push(format!(
                "unknown tolerance `{other}` (known: quadrature, x_tol, tol_gap, degeneracy_window)"
            )),
        }
    }
    if errors.is_empty() {
        cfg.validate()
    } else {
        Err(KacError::Config(errors))
    }
}
