//! Run configuration from command-line flags and `key=value` files.
//!
//! Both sources produce `(key, value)` entries tagged with where they came
//! from. Entries are merged (flags win), then validated together so that a
//! single error lists every problem.

use std::collections::BTreeMap;
use std::fmt;

use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};

use crate::curve::Curve;
use crate::landau;
use crate::ns_solver::Mode;
use crate::pm_norms::Lemma;

/// Where a configuration value came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Locus {
    Flag(String),
    Line(usize),
    /// A required key that no source provided.
    Missing(String),
    Argv,
}

impl fmt::Display for Locus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Locus::Flag(k) => write!(f, "flag --{k}"),
            Locus::Line(n) => write!(f, "line {n}"),
            Locus::Missing(k) => write!(f, "missing key '{k}'"),
            Locus::Argv => write!(f, "command line"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub locus: Locus,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub violations: Vec<Violation>,
}

impl ConfigError {
    fn single(locus: Locus, message: impl Into<String>) -> Self {
        Self {
            violations: vec![Violation {
                locus,
                message: message.into(),
            }],
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "invalid configuration ({} problem(s)):",
            self.violations.len()
        )?;
        for v in &self.violations {
            writeln!(f, "  {}: {}", v.locus, v.message)?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CommandName {
    Landau,
    Certify,
    Heat,
    Solve,
}

impl CommandName {
    pub fn as_str(&self) -> &'static str {
        match self {
            CommandName::Landau => "landau",
            CommandName::Certify => "certify",
            CommandName::Heat => "heat",
            CommandName::Solve => "solve",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "landau" => Some(CommandName::Landau),
            "certify" => Some(CommandName::Certify),
            "heat" => Some(CommandName::Heat),
            "solve" => Some(CommandName::Solve),
            _ => None,
        }
    }

    fn keys(&self) -> &'static [&'static str] {
        match self {
            CommandName::Landau => &[
                "seed",
                "c",
                "eval",
                "kappa",
                "residual-sweep",
                "pairing",
                "points",
                "out",
            ],
            CommandName::Certify => &["seed", "lemma", "trials", "N", "L", "out"],
            CommandName::Heat => &[
                "seed",
                "curve",
                "alpha",
                "direction",
                "t",
                "q",
                "fit-decay",
                "N",
                "L",
                "dump-fields",
                "out",
            ],
            CommandName::Solve => &[
                "seed",
                "mode",
                "c",
                "kappa",
                "curve",
                "alpha",
                "direction",
                "N",
                "L",
                "T",
                "steps",
                "tol",
                "max-iter",
                "a",
                "override-smallness",
                "report",
                "dump-fields",
            ],
        }
    }
}

/// Keys naming output locations; they do not enter the provenance hash.
const OUTPUT_KEYS: [&str; 3] = ["out", "report", "dump-fields"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveChoice {
    Const,
    Linear,
    Power,
}

impl CurveChoice {
    fn as_str(&self) -> &'static str {
        match self {
            CurveChoice::Const => "const",
            CurveChoice::Linear => "linear",
            CurveChoice::Power => "power",
        }
    }
}

/// `γ ≡ 0`, `γ(t) = t·d` or `γ(t) = t^α·d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveSpec {
    pub kind: CurveChoice,
    pub alpha: f64,
    pub direction: [f64; 3],
}

impl CurveSpec {
    pub fn build(&self) -> Curve {
        match self.kind {
            CurveChoice::Const => Curve::origin(),
            CurveChoice::Linear => Curve::linear([0.0; 3], self.direction).expect("validated"),
            CurveChoice::Power => Curve::power(self.direction, self.alpha).expect("validated"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LandauAction {
    Eval([f64; 3]),
    Kappa,
    ResidualSweep,
    Pairing,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LandauArgs {
    pub c: f64,
    pub action: LandauAction,
    /// Random points in the residual sweep.
    pub points: usize,
    pub out: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertifyArgs {
    pub lemma: Lemma,
    pub trials: usize,
    pub n: usize,
    pub l: f64,
    pub out: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatArgs {
    pub curve: CurveSpec,
    pub times: Vec<f64>,
    pub q: f64,
    pub fit_decay: bool,
    pub n: usize,
    pub l: f64,
    pub dump_fields: Option<String>,
    pub out: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveArgs {
    pub mode: Mode,
    pub c: Option<f64>,
    /// Explicit `κ`; absent means `κ(c)`.
    pub kappa: Option<f64>,
    pub curve: CurveSpec,
    pub n: usize,
    pub l: f64,
    pub horizon: f64,
    pub steps: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub a: f64,
    pub override_smallness: bool,
    pub report: Option<String>,
    pub dump_fields: Option<String>,
}

impl SolveArgs {
    pub fn effective_kappa(&self) -> f64 {
        match (self.kappa, self.c) {
            (Some(k), _) => k,
            (None, Some(c)) => landau::kappa(c).expect("validated"),
            (None, None) => unreachable!("validated"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Landau(LandauArgs),
    Certify(CertifyArgs),
    Heat(HeatArgs),
    Solve(SolveArgs),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub command: Command,
}

/// One raw `key=value` setting.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub locus: Locus,
}

fn fmt_vec(v: &[f64]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

impl RunConfig {
    pub fn name(&self) -> CommandName {
        match &self.command {
            Command::Landau(_) => CommandName::Landau,
            Command::Certify(_) => CommandName::Certify,
            Command::Heat(_) => CommandName::Heat,
            Command::Solve(_) => CommandName::Solve,
        }
    }

    /// Every effective setting, defaults included, as sorted `key=value` pairs.
    pub fn settings(&self) -> BTreeMap<&'static str, String> {
        let mut m = BTreeMap::new();
        m.insert("seed", self.seed.to_string());
        let curve = |m: &mut BTreeMap<&'static str, String>, c: &CurveSpec| {
            m.insert("curve", c.kind.as_str().to_string());
            if c.kind == CurveChoice::Power {
                m.insert("alpha", c.alpha.to_string());
            }
            if c.kind != CurveChoice::Const {
                m.insert("direction", fmt_vec(&c.direction));
            }
        };
        match &self.command {
            Command::Landau(a) => {
                m.insert("c", a.c.to_string());
                match &a.action {
                    LandauAction::Eval(x) => {
                        m.insert("eval", fmt_vec(x));
                    }
                    LandauAction::Kappa => {
                        m.insert("kappa", "true".into());
                    }
                    LandauAction::ResidualSweep => {
                        m.insert("residual-sweep", "true".into());
                        m.insert("points", a.points.to_string());
                    }
                    LandauAction::Pairing => {
                        m.insert("pairing", "true".into());
                    }
                }
                if let Some(o) = &a.out {
                    m.insert("out", o.clone());
                }
            }
            Command::Certify(a) => {
                m.insert("lemma", a.lemma.name().into());
                m.insert("trials", a.trials.to_string());
                m.insert("N", a.n.to_string());
                m.insert("L", a.l.to_string());
                if let Some(o) = &a.out {
                    m.insert("out", o.clone());
                }
            }
            Command::Heat(a) => {
                curve(&mut m, &a.curve);
                if a.fit_decay {
                    m.insert("fit-decay", "true".into());
                } else {
                    m.insert("t", fmt_vec(&a.times));
                }
                m.insert("q", a.q.to_string());
                m.insert("N", a.n.to_string());
                m.insert("L", a.l.to_string());
                if let Some(o) = &a.dump_fields {
                    m.insert("dump-fields", o.clone());
                }
                if let Some(o) = &a.out {
                    m.insert("out", o.clone());
                }
            }
            Command::Solve(a) => {
                m.insert(
                    "mode",
                    match a.mode {
                        Mode::FullU => "u",
                        Mode::RemainderOmega => "omega",
                    }
                    .into(),
                );
                if let Some(c) = a.c {
                    m.insert("c", c.to_string());
                }
                if let Some(k) = a.kappa {
                    m.insert("kappa", k.to_string());
                }
                curve(&mut m, &a.curve);
                m.insert("N", a.n.to_string());
                m.insert("L", a.l.to_string());
                m.insert("T", a.horizon.to_string());
                m.insert("steps", a.steps.to_string());
                m.insert("tol", a.tol.to_string());
                m.insert("max-iter", a.max_iter.to_string());
                m.insert("a", a.a.to_string());
                if a.override_smallness {
                    m.insert("override-smallness", "true".into());
                }
                if let Some(o) = &a.report {
                    m.insert("report", o.clone());
                }
                if let Some(o) = &a.dump_fields {
                    m.insert("dump-fields", o.clone());
                }
            }
        }
        m
    }

    /// Canonical text: `command=<name>` followed by every setting in key order.
    ///
    /// [`parse_config_text`] maps this text back to an identical configuration.
    pub fn canonical_text(&self) -> String {
        let mut s = format!("command={}\n", self.name().as_str());
        for (k, v) in self.settings() {
            s.push_str(&format!("{k}={v}\n"));
        }
        s
    }

    /// Hex SHA-256 of the canonical text without output locations.
    pub fn provenance_hash(&self) -> String {
        let mut s = format!("command={}\n", self.name().as_str());
        for (k, v) in self.settings() {
            if !OUTPUT_KEYS.contains(&k) {
                s.push_str(&format!("{k}={v}\n"));
            }
        }
        let digest = Sha256::digest(s.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Splits `key=value` lines. Blank lines and lines starting with `#` are skipped.
pub fn parse_entries(text: &str) -> Result<Vec<Entry>, ConfigError> {
    let mut out = Vec::new();
    let mut errors = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let locus = Locus::Line(i + 1);
        match line.split_once('=') {
            Some((k, v)) if !k.trim().is_empty() => out.push(Entry {
                key: k.trim().to_string(),
                value: v.trim().to_string(),
                locus,
            }),
            _ => errors.push(Violation {
                locus,
                message: format!("expected key=value, found '{line}'"),
            }),
        }
    }
    if errors.is_empty() {
        Ok(out)
    } else {
        Err(ConfigError { violations: errors })
    }
}

/// Parses a complete configuration file; it must contain a `command` key.
pub fn parse_config_text(text: &str) -> Result<RunConfig, ConfigError> {
    let entries = parse_entries(text)?;
    let (command, rest) = split_command(entries)?;
    let command = command
        .ok_or_else(|| ConfigError::single(Locus::Missing("command".into()), "no command given"))?;
    from_entries(command, rest)
}

fn split_command(entries: Vec<Entry>) -> Result<(Option<CommandName>, Vec<Entry>), ConfigError> {
    let mut command = None;
    let mut rest = Vec::new();
    let mut errors = Vec::new();
    for e in entries {
        if e.key == "command" {
            match CommandName::parse(&e.value) {
                Some(c) if command.is_none() => command = Some(c),
                Some(_) => errors.push(Violation {
                    locus: e.locus,
                    message: "command given twice".into(),
                }),
                None => errors.push(Violation {
                    locus: e.locus,
                    message: format!("unknown command '{}'", e.value),
                }),
            }
        } else {
            rest.push(e);
        }
    }
    if errors.is_empty() {
        Ok((command, rest))
    } else {
        Err(ConfigError { violations: errors })
    }
}

struct Validator {
    values: BTreeMap<String, (String, Locus)>,
    errors: Vec<Violation>,
}

impl Validator {
    fn new(command: CommandName, entries: Vec<Entry>) -> Self {
        let mut v = Validator {
            values: BTreeMap::new(),
            errors: Vec::new(),
        };
        for e in entries {
            if !command.keys().contains(&e.key.as_str()) {
                v.errors.push(Violation {
                    locus: e.locus,
                    message: format!("unknown key '{}' for {}", e.key, command.as_str()),
                });
                continue;
            }
            if let Some((_, prev)) = v.values.get(&e.key) {
                if prev == &e.locus || !matches!(e.locus, Locus::Flag(_)) {
                    v.errors.push(Violation {
                        locus: e.locus,
                        message: format!("key '{}' given twice", e.key),
                    });
                    continue;
                }
            }
            v.values.insert(e.key, (e.value, e.locus));
        }
        v
    }

    fn fail(&mut self, key: &str, message: impl Into<String>) {
        let locus = self
            .values
            .get(key)
            .map(|(_, l)| l.clone())
            .unwrap_or_else(|| Locus::Missing(key.into()));
        self.errors.push(Violation {
            locus,
            message: message.into(),
        });
    }

    fn has(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    fn raw(&self, key: &str) -> Option<String> {
        self.values.get(key).map(|(v, _)| v.clone())
    }

    fn float(&mut self, key: &str) -> Option<f64> {
        let raw = self.raw(key)?;
        match raw.parse::<f64>() {
            Ok(x) if x.is_finite() => Some(x),
            _ => {
                self.fail(key, format!("'{raw}' is not a finite number"));
                None
            }
        }
    }

    fn float_where(
        &mut self,
        key: &str,
        default: Option<f64>,
        ok: impl Fn(f64) -> bool,
        what: &str,
    ) -> Option<f64> {
        if !self.has(key) {
            if default.is_none() {
                self.fail(key, format!("required: {what}"));
            }
            return default;
        }
        let x = self.float(key)?;
        if ok(x) {
            Some(x)
        } else {
            self.fail(key, format!("{x} is out of range: {what}"));
            None
        }
    }

    fn uint_where(
        &mut self,
        key: &str,
        default: usize,
        ok: impl Fn(usize) -> bool,
        what: &str,
    ) -> usize {
        let Some(raw) = self.raw(key) else {
            return default;
        };
        match raw.parse::<usize>() {
            Ok(x) if ok(x) => x,
            Ok(x) => {
                self.fail(key, format!("{x} is out of range: {what}"));
                default
            }
            Err(_) => {
                self.fail(key, format!("'{raw}' is not a non-negative integer"));
                default
            }
        }
    }

    fn flag(&mut self, key: &str) -> bool {
        match self.raw(key).as_deref() {
            None | Some("false") => false,
            Some("true") | Some("") => true,
            Some(other) => {
                self.fail(key, format!("'{other}' is not true or false"));
                false
            }
        }
    }

    fn list(&mut self, key: &str) -> Option<Vec<f64>> {
        let raw = self.raw(key)?;
        let parsed: Result<Vec<f64>, _> = raw.split(',').map(|s| s.trim().parse::<f64>()).collect();
        match parsed {
            Ok(v) if v.iter().all(|x| x.is_finite()) && !v.is_empty() => Some(v),
            _ => {
                self.fail(
                    key,
                    format!("'{raw}' is not a comma-separated list of finite numbers"),
                );
                None
            }
        }
    }

    fn vec3(&mut self, key: &str) -> Option<[f64; 3]> {
        let v = self.list(key)?;
        if v.len() == 3 {
            Some([v[0], v[1], v[2]])
        } else {
            self.fail(key, format!("expected three components, found {}", v.len()));
            None
        }
    }

    fn out(&mut self, key: &str) -> Option<String> {
        let raw = self.raw(key)?;
        if raw.is_empty() {
            self.fail(key, "empty path");
            None
        } else {
            Some(raw)
        }
    }

    fn seed(&mut self) -> u64 {
        let Some(raw) = self.raw("seed") else {
            return 0;
        };
        raw.parse::<u64>().unwrap_or_else(|_| {
            self.fail("seed", format!("'{raw}' is not an unsigned 64-bit integer"));
            0
        })
    }

    fn lattice(&mut self, n_default: usize, l_default: f64) -> (usize, f64) {
        let n = self.uint_where(
            "N",
            n_default,
            |n| n >= 4 && n <= 512 && n % 2 == 0,
            "even, between 4 and 512",
        );
        let l = self
            .float_where(
                "L",
                Some(l_default),
                |l| l > 0.0,
                "box length must be positive",
            )
            .unwrap_or(l_default);
        (n, l)
    }

    fn c_param(&mut self, required: bool) -> Option<f64> {
        if !self.has("c") {
            if required {
                self.fail("c", "required: Landau parameter with |c| > 1");
            }
            return None;
        }
        let c = self.float("c")?;
        if c.abs() > 1.0 {
            Some(c)
        } else {
            self.fail("c", format!("{c} is out of range: |c| > 1 required"));
            None
        }
    }

    fn curve(&mut self) -> CurveSpec {
        let kind = match self.raw("curve").as_deref() {
            None | Some("power") => CurveChoice::Power,
            Some("const") => CurveChoice::Const,
            Some("linear") => CurveChoice::Linear,
            Some(other) => {
                self.fail(
                    "curve",
                    format!("'{other}' is not one of const, linear, power"),
                );
                CurveChoice::Power
            }
        };
        let alpha = if kind == CurveChoice::Power {
            self.float_where(
                "alpha",
                Some(0.8),
                |a| a > 0.5 && a <= 1.0,
                "Hölder exponent must lie in (1/2, 1]",
            )
            .unwrap_or(0.8)
        } else {
            if self.has("alpha") {
                self.fail("alpha", "alpha applies to power curves only");
            }
            1.0
        };
        let direction = if kind == CurveChoice::Const {
            if self.has("direction") {
                self.fail("direction", "a constant curve stays at the origin");
            }
            [0.0; 3]
        } else if self.has("direction") {
            self.vec3("direction").unwrap_or([1.0, 0.0, 0.0])
        } else {
            [1.0, 0.0, 0.0]
        };
        CurveSpec {
            kind,
            alpha,
            direction,
        }
    }

    fn finish(self, config: RunConfig) -> Result<RunConfig, ConfigError> {
        if self.errors.is_empty() {
            Ok(config)
        } else {
            Err(ConfigError {
                violations: self.errors,
            })
        }
    }
}

/// Validates merged entries for `command`.
pub fn from_entries(command: CommandName, entries: Vec<Entry>) -> Result<RunConfig, ConfigError> {
    let mut v = Validator::new(command, entries);
    let seed = v.seed();
    let cmd = match command {
        CommandName::Landau => {
            let c = v.c_param(true);
            let mut actions = Vec::new();
            if v.has("eval") {
                actions.push("eval");
            }
            for f in ["kappa", "residual-sweep", "pairing"] {
                if v.flag(f) {
                    actions.push(f);
                }
            }
            let action = match actions.as_slice() {
                [] => {
                    v.fail(
                        "eval",
                        "choose one of --eval, --kappa, --residual-sweep, --pairing",
                    );
                    LandauAction::Kappa
                }
                [one] => match *one {
                    "eval" => {
                        let x = v.vec3("eval").unwrap_or([1.0, 0.0, 0.0]);
                        if x == [0.0; 3] {
                            v.fail("eval", "the field is singular at the origin");
                        }
                        LandauAction::Eval(x)
                    }
                    "kappa" => LandauAction::Kappa,
                    "residual-sweep" => LandauAction::ResidualSweep,
                    _ => LandauAction::Pairing,
                },
                many => {
                    let list = many.join(", ");
                    v.fail(
                        many[1],
                        format!("actions are mutually exclusive, got {list}"),
                    );
                    LandauAction::Kappa
                }
            };
            let points = v.uint_where(
                "points",
                20,
                |p| (1..=100_000).contains(&p),
                "between 1 and 100000",
            );
            if v.has("points") && action != LandauAction::ResidualSweep {
                v.fail("points", "points applies to --residual-sweep only");
            }
            let out = v.out("out");
            Command::Landau(LandauArgs {
                c: c.unwrap_or(2.0),
                action,
                points,
                out,
            })
        }
        CommandName::Certify => {
            let lemma = match v.raw("lemma") {
                None => {
                    v.fail(
                        "lemma",
                        "required: one of product, interpolation, gradient, weak-l3, tensor",
                    );
                    Lemma::Product
                }
                Some(s) => Lemma::from_name(&s).unwrap_or_else(|| {
                    v.fail(
                        "lemma",
                        format!(
                            "'{s}' is not one of product, interpolation, gradient, weak-l3, tensor"
                        ),
                    );
                    Lemma::Product
                }),
            };
            let trials = v.uint_where(
                "trials",
                100,
                |t| (1..=100_000).contains(&t),
                "between 1 and 100000",
            );
            let (n, l) = v.lattice(32, 16.0);
            let out = v.out("out");
            Command::Certify(CertifyArgs {
                lemma,
                trials,
                n,
                l,
                out,
            })
        }
        CommandName::Heat => {
            let curve = v.curve();
            let fit_decay = v.flag("fit-decay");
            let times = if fit_decay {
                if v.has("t") {
                    v.fail("t", "--fit-decay chooses its own sample times");
                }
                Vec::new()
            } else if v.has("t") {
                let t = v.list("t").unwrap_or_default();
                if t.iter().any(|&x| x <= 0.0) {
                    v.fail("t", "times must be positive");
                }
                t
            } else {
                vec![0.5]
            };
            let (lo, hi) = crate::heat::admissible_q_range(curve.alpha);
            let q = v
                .float_where(
                    "q",
                    Some(4.0),
                    |q| q > lo && q < hi,
                    &format!("q must lie in ({lo}, {hi})"),
                )
                .unwrap_or(4.0);
            let (n, l) = v.lattice(32, 16.0);
            let dump_fields = v.out("dump-fields");
            let out = v.out("out");
            Command::Heat(HeatArgs {
                curve,
                times,
                q,
                fit_decay,
                n,
                l,
                dump_fields,
                out,
            })
        }
        CommandName::Solve => {
            let mode = match v.raw("mode").as_deref() {
                None | Some("u") => Mode::FullU,
                Some("omega") => Mode::RemainderOmega,
                Some(other) => {
                    v.fail("mode", format!("'{other}' is not one of u, omega"));
                    Mode::FullU
                }
            };
            let c = v.c_param(mode == Mode::RemainderOmega);
            let kappa = if v.has("kappa") {
                if mode == Mode::RemainderOmega {
                    v.fail("kappa", "omega mode uses kappa = kappa(c); drop --kappa");
                    None
                } else {
                    v.float("kappa")
                }
            } else {
                if mode == Mode::FullU && !v.has("c") {
                    v.fail("kappa", "required in u mode: give --kappa or --c");
                }
                None
            };
            let curve = v.curve();
            let (n, l) = v.lattice(64, 32.0);
            let horizon = v
                .float_where("T", Some(0.5), |t| t > 0.0, "horizon must be positive")
                .unwrap_or(0.5);
            let steps = v.uint_where(
                "steps",
                64,
                |s| (2..=100_000).contains(&s),
                "between 2 and 100000",
            );
            let tol = v
                .float_where(
                    "tol",
                    Some(1e-10),
                    |t| t > 0.0,
                    "tolerance must be positive",
                )
                .unwrap_or(1e-10);
            let max_iter = v.uint_where(
                "max-iter",
                30,
                |m| (1..=10_000).contains(&m),
                "between 1 and 10000",
            );
            let a_default = 2.5f64.min(1.0 + 2.0 * curve.alpha);
            let a = v
                .float_where(
                    "a",
                    Some(a_default),
                    |a| (2.0..3.0).contains(&a),
                    "report exponent must lie in [2, 3)",
                )
                .unwrap_or(a_default);
            let override_smallness = v.flag("override-smallness");
            let report = v.out("report");
            let dump_fields = v.out("dump-fields");
            Command::Solve(SolveArgs {
                mode,
                c,
                kappa,
                curve,
                n,
                l,
                horizon,
                steps,
                tol,
                max_iter,
                a,
                override_smallness,
                report,
                dump_fields,
            })
        }
    };
    v.finish(RunConfig { seed, command: cmd })
}

#[derive(Parser, Debug)]
#[command(
    name = "sns",
    version,
    about = "Fourier-space experiments with singular Navier-Stokes and heat solutions"
)]
struct Cli {
    #[command(subcommand)]
    command: CliCommand,
}

#[derive(Args, Debug, Default)]
struct Common {
    /// Seed of every random draw.
    #[arg(long)]
    seed: Option<String>,
    /// key=value file; flags override its entries.
    #[arg(long)]
    config: Option<String>,
}

#[derive(Args, Debug, Default)]
struct CurveFlags {
    /// Curve carrying the singularity: const, linear or power.
    #[arg(long)]
    curve: Option<String>,
    /// Hölder exponent of a power curve, in (1/2, 1].
    #[arg(long)]
    alpha: Option<String>,
    /// Direction (or velocity) of the curve, as x,y,z.
    #[arg(long, allow_hyphen_values = true)]
    direction: Option<String>,
}

#[derive(Subcommand, Debug)]
enum CliCommand {
    /// Evaluate the stationary Landau solutions.
    Landau {
        #[command(flatten)]
        common: Common,
        /// Parameter c, with |c| > 1.
        #[arg(long, allow_hyphen_values = true)]
        c: Option<String>,
        /// Velocity and pressure at x1,x2,x3.
        #[arg(long, allow_hyphen_values = true)]
        eval: Option<String>,
        /// Flux constant of the Dirac force.
        #[arg(long)]
        kappa: bool,
        /// Finite-difference residuals at random points.
        #[arg(long = "residual-sweep")]
        residual_sweep: bool,
        /// Distributional pairing against a bump.
        #[arg(long)]
        pairing: bool,
        /// Number of points in the residual sweep.
        #[arg(long)]
        points: Option<String>,
        /// Write the table here instead of stdout.
        #[arg(long)]
        out: Option<String>,
    },
    /// Test inequalities between Fourier and Lebesgue norms on random fields.
    Certify {
        #[command(flatten)]
        common: Common,
        /// product, interpolation, gradient, weak-l3 or tensor.
        #[arg(long)]
        lemma: Option<String>,
        /// Number of random fields.
        #[arg(long)]
        trials: Option<String>,
        /// Lattice points per axis, even.
        #[arg(long = "N")]
        n: Option<String>,
        /// Side of the periodic box.
        #[arg(long = "L")]
        l: Option<String>,
        /// Write the table here instead of stdout.
        #[arg(long)]
        out: Option<String>,
    },
    /// Heat equation with a moving point source.
    Heat {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        curve: CurveFlags,
        /// Output times, comma separated.
        #[arg(long)]
        t: Option<String>,
        /// Lebesgue exponent of the decay fit.
        #[arg(long)]
        q: Option<String>,
        /// Fit the decay exponent of the L^q norm of the remainder.
        #[arg(long = "fit-decay")]
        fit_decay: bool,
        /// Lattice points per axis, even.
        #[arg(long = "N")]
        n: Option<String>,
        /// Side of the periodic box.
        #[arg(long = "L")]
        l: Option<String>,
        /// Directory for binary spectral field dumps.
        #[arg(long = "dump-fields")]
        dump_fields: Option<String>,
        /// Write the table here instead of stdout.
        #[arg(long)]
        out: Option<String>,
    },
    /// Picard iteration for the forced Navier-Stokes system.
    Solve {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        curve: CurveFlags,
        /// Unknown of the iteration: u (full velocity) or omega (remainder).
        #[arg(long)]
        mode: Option<String>,
        /// Landau parameter; sets κ = κ(c).
        #[arg(long, allow_hyphen_values = true)]
        c: Option<String>,
        /// Strength of the point force.
        #[arg(long, allow_hyphen_values = true)]
        kappa: Option<String>,
        /// Lattice points per axis, even.
        #[arg(long = "N")]
        n: Option<String>,
        /// Side of the periodic box.
        #[arg(long = "L")]
        l: Option<String>,
        /// Time horizon.
        #[arg(long = "T")]
        horizon: Option<String>,
        /// Uniform time steps on [0, T].
        #[arg(long)]
        steps: Option<String>,
        /// Stop when the increment falls below this.
        #[arg(long)]
        tol: Option<String>,
        /// Iteration budget.
        #[arg(long = "max-iter")]
        max_iter: Option<String>,
        /// Exponent of the secondary norm in the report, in [2, 3).
        #[arg(long)]
        a: Option<String>,
        /// Run even when the measured smallness conditions fail.
        #[arg(long = "override-smallness")]
        override_smallness: bool,
        /// Write the iteration report here instead of stdout.
        #[arg(long)]
        report: Option<String>,
        /// Directory for binary spectral field dumps.
        #[arg(long = "dump-fields")]
        dump_fields: Option<String>,
    },
}

/// Outcome of argv parsing that is not a configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ArgsError {
    /// `--help` or `--version` output.
    Display(String),
    Config(ConfigError),
}

impl From<ConfigError> for ArgsError {
    fn from(e: ConfigError) -> Self {
        ArgsError::Config(e)
    }
}

/// Flags given on the command line plus the config file they name, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct ArgvEntries {
    pub command: CommandName,
    pub config_path: Option<String>,
    pub entries: Vec<Entry>,
}

/// Parses argv (without the program name) into raw entries.
pub fn parse_argv<I, S>(args: I) -> Result<ArgvEntries, ArgsError>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv = std::iter::once("sns".to_string()).chain(args.into_iter().map(Into::into));
    let cli = Cli::try_parse_from(argv).map_err(|e| match e.kind() {
        clap::error::ErrorKind::DisplayHelp
        | clap::error::ErrorKind::DisplayVersion
        | clap::error::ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
            ArgsError::Display(e.to_string())
        }
        _ => ArgsError::Config(ConfigError::single(
            Locus::Argv,
            e.to_string().trim_end().to_string(),
        )),
    })?;
    let mut entries = Vec::new();
    let mut push = |k: &str, v: Option<String>| {
        if let Some(v) = v {
            entries.push(Entry {
                key: k.to_string(),
                value: v,
                locus: Locus::Flag(k.to_string()),
            });
        }
    };
    let flag = |b: bool| if b { Some("true".to_string()) } else { None };
    let (command, common) = match cli.command {
        CliCommand::Landau {
            common,
            c,
            eval,
            kappa,
            residual_sweep,
            pairing,
            points,
            out,
        } => {
            push("c", c);
            push("eval", eval);
            push("kappa", flag(kappa));
            push("residual-sweep", flag(residual_sweep));
            push("pairing", flag(pairing));
            push("points", points);
            push("out", out);
            (CommandName::Landau, common)
        }
        CliCommand::Certify {
            common,
            lemma,
            trials,
            n,
            l,
            out,
        } => {
            push("lemma", lemma);
            push("trials", trials);
            push("N", n);
            push("L", l);
            push("out", out);
            (CommandName::Certify, common)
        }
        CliCommand::Heat {
            common,
            curve,
            t,
            q,
            fit_decay,
            n,
            l,
            dump_fields,
            out,
        } => {
            push("curve", curve.curve);
            push("alpha", curve.alpha);
            push("direction", curve.direction);
            push("t", t);
            push("q", q);
            push("fit-decay", flag(fit_decay));
            push("N", n);
            push("L", l);
            push("dump-fields", dump_fields);
            push("out", out);
            (CommandName::Heat, common)
        }
        CliCommand::Solve {
            common,
            curve,
            mode,
            c,
            kappa,
            n,
            l,
            horizon,
            steps,
            tol,
            max_iter,
            a,
            override_smallness,
            report,
            dump_fields,
        } => {
            push("mode", mode);
            push("c", c);
            push("kappa", kappa);
            push("curve", curve.curve);
            push("alpha", curve.alpha);
            push("direction", curve.direction);
            push("N", n);
            push("L", l);
            push("T", horizon);
            push("steps", steps);
            push("tol", tol);
            push("max-iter", max_iter);
            push("a", a);
            push("override-smallness", flag(override_smallness));
            push("report", report);
            push("dump-fields", dump_fields);
            (CommandName::Solve, common)
        }
    };
    push("seed", common.seed);
    Ok(ArgvEntries {
        command,
        config_path: common.config,
        entries,
    })
}

/// Merges file entries under argv entries (flags win) and validates.
pub fn merge(argv: ArgvEntries, file_text: Option<&str>) -> Result<RunConfig, ConfigError> {
    let mut entries = Vec::new();
    if let Some(text) = file_text {
        let (command, file_entries) = split_command(parse_entries(text)?)?;
        if let Some(c) = command {
            if c != argv.command {
                return Err(ConfigError::single(
                    Locus::Argv,
                    format!(
                        "config file is for '{}' but the subcommand is '{}'",
                        c.as_str(),
                        argv.command.as_str()
                    ),
                ));
            }
        }
        let flagged: Vec<&str> = argv.entries.iter().map(|e| e.key.as_str()).collect();
        entries.extend(
            file_entries
                .into_iter()
                .filter(|e| !flagged.contains(&e.key.as_str())),
        );
    }
    entries.extend(argv.entries);
    from_entries(argv.command, entries)
}

/// Parses argv and reads the config file it names.
pub fn parse_args<I, S>(args: I) -> Result<RunConfig, ArgsError>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv = parse_argv(args)?;
    let text = match &argv.config_path {
        Some(p) => Some(std::fs::read_to_string(p).map_err(|e| {
            ConfigError::single(
                Locus::Flag("config".into()),
                format!("cannot read {p}: {e}"),
            )
        })?),
        None => None,
    };
    Ok(merge(argv, text.as_deref())?)
}
