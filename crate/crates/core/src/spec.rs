//! Kernel configuration: names, parameters, defaults and validation.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::kernels::{
    EdgeHistogram, Explicit, GraphletKernel, GraphletMode, Kernel, RandomWalk, ShortestPath,
    VertexHistogram, WalkParams,
};
use crate::wl::WeisfeilerLehman;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum KernelName {
    VertexHistogram,
    EdgeHistogram,
    ShortestPath,
    GraphletSampling,
    RandomWalk,
    WeisfeilerLehman,
}

impl KernelName {
    pub const ALL: [KernelName; 6] = [
        KernelName::VertexHistogram,
        KernelName::EdgeHistogram,
        KernelName::ShortestPath,
        KernelName::GraphletSampling,
        KernelName::RandomWalk,
        KernelName::WeisfeilerLehman,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            KernelName::VertexHistogram => "vertex_histogram",
            KernelName::EdgeHistogram => "edge_histogram",
            KernelName::ShortestPath => "shortest_path",
            KernelName::GraphletSampling => "graphlet_sampling",
            KernelName::RandomWalk => "random_walk",
            KernelName::WeisfeilerLehman => "weisfeiler_lehman",
        }
    }

    fn own_params(&self) -> &'static [&'static str] {
        match self {
            KernelName::VertexHistogram | KernelName::EdgeHistogram => &[],
            KernelName::ShortestPath => &["with_labels"],
            KernelName::GraphletSampling => &["k", "n_samples", "exhaustive"],
            KernelName::RandomWalk => &["lambda", "match_labels", "spectral_margin"],
            KernelName::WeisfeilerLehman => &["h", "base"],
        }
    }
}

impl fmt::Display for KernelName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for KernelName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        KernelName::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                Error::spec(
                    "kernel",
                    format!(
                        "unknown kernel {s:?}; expected one of {}",
                        KernelName::ALL.map(|k| k.as_str()).join(", ")
                    ),
                )
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParamValue {
    Number(f64),
    Flag(bool),
    Name(String),
}

impl ParamValue {
    /// `true`/`false` become flags, numbers become numbers, anything else a name.
    pub fn parse(raw: &str) -> Self {
        let raw = raw.trim();
        match raw {
            "true" => ParamValue::Flag(true),
            "false" => ParamValue::Flag(false),
            _ => raw
                .parse::<f64>()
                .map(ParamValue::Number)
                .unwrap_or_else(|_| ParamValue::Name(raw.to_string())),
        }
    }
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Number(x) => write!(f, "{x}"),
            ParamValue::Flag(b) => write!(f, "{b}"),
            ParamValue::Name(s) => f.write_str(s),
        }
    }
}

impl From<f64> for ParamValue {
    fn from(x: f64) -> Self {
        ParamValue::Number(x)
    }
}

impl From<usize> for ParamValue {
    fn from(x: usize) -> Self {
        ParamValue::Number(x as f64)
    }
}

impl From<bool> for ParamValue {
    fn from(b: bool) -> Self {
        ParamValue::Flag(b)
    }
}

impl From<&str> for ParamValue {
    fn from(s: &str) -> Self {
        ParamValue::parse(s)
    }
}

impl From<KernelName> for ParamValue {
    fn from(k: KernelName) -> Self {
        ParamValue::Name(k.as_str().to_string())
    }
}

/// Configuration of a [`crate::GraphKernel`].
///
/// Weisfeiler-Lehman takes `h` and `base`; every other parameter is passed
/// to the base kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    pub kernel: KernelName,
    pub params: BTreeMap<String, ParamValue>,
    pub normalize: bool,
    pub nystrom_components: Option<usize>,
    pub seed: u64,
}

impl KernelSpec {
    pub fn new(kernel: KernelName) -> Self {
        KernelSpec {
            kernel,
            params: BTreeMap::new(),
            normalize: false,
            nystrom_components: None,
            seed: 0,
        }
    }

    pub fn named(name: &str) -> Result<Self> {
        Ok(Self::new(name.parse()?))
    }

    pub fn with(mut self, name: &str, value: impl Into<ParamValue>) -> Self {
        self.params.insert(name.to_string(), value.into());
        self
    }

    pub fn normalized(mut self, normalize: bool) -> Self {
        self.normalize = normalize;
        self
    }

    pub fn nystrom(mut self, components: usize) -> Self {
        self.nystrom_components = Some(components);
        self
    }

    pub fn seeded(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Parses a `name=value` assignment.
    pub fn set_param(&mut self, assignment: &str) -> Result<()> {
        let (name, value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::spec(assignment, "expected name=value"))?;
        let name = name.trim();
        if name.is_empty() {
            return Err(Error::spec(assignment, "empty parameter name"));
        }
        self.params
            .insert(name.to_string(), ParamValue::parse(value));
        Ok(())
    }

    /// `key=value` lines describing the spec.
    pub fn metadata(&self) -> Vec<(String, String)> {
        let mut out = vec![("kernel".to_string(), self.kernel.to_string())];
        for (k, v) in &self.params {
            out.push((format!("param.{k}"), v.to_string()));
        }
        out.push(("normalize".into(), self.normalize.to_string()));
        out.push((
            "nystrom_components".into(),
            self.nystrom_components
                .map_or("none".into(), |q| q.to_string()),
        ));
        out.push(("seed".into(), self.seed.to_string()));
        out
    }
}

struct Params<'a> {
    values: &'a BTreeMap<String, ParamValue>,
}

impl Params<'_> {
    fn number(&self, name: &str, default: f64) -> Result<f64> {
        match self.values.get(name) {
            None => Ok(default),
            Some(ParamValue::Number(x)) if x.is_finite() => Ok(*x),
            Some(other) => Err(Error::spec(name, format!("expected a number, got {other}"))),
        }
    }

    fn count(&self, name: &str, default: usize) -> Result<usize> {
        match self.values.get(name) {
            None => Ok(default),
            Some(ParamValue::Number(x)) if *x >= 0.0 && x.fract() == 0.0 && x.is_finite() => {
                Ok(*x as usize)
            }
            Some(other) => Err(Error::spec(
                name,
                format!("expected a non-negative integer, got {other}"),
            )),
        }
    }

    fn flag(&self, name: &str) -> Result<Option<bool>> {
        match self.values.get(name) {
            None => Ok(None),
            Some(ParamValue::Flag(b)) => Ok(Some(*b)),
            Some(ParamValue::Number(x)) if *x == 0.0 || *x == 1.0 => Ok(Some(*x == 1.0)),
            Some(other) => Err(Error::spec(
                name,
                format!("expected true or false, got {other}"),
            )),
        }
    }
}

/// Builds the kernel named by `spec`, validating every parameter.
pub fn make_kernel(spec: &KernelSpec) -> Result<Box<dyn Kernel>> {
    if spec.nystrom_components == Some(0) {
        return Err(Error::spec("nystrom_components", "must be positive"));
    }
    let params = Params {
        values: &spec.params,
    };
    if spec.kernel == KernelName::WeisfeilerLehman {
        let h = params.count("h", 5)?;
        let base = match spec.params.get("base") {
            None => KernelName::VertexHistogram,
            Some(ParamValue::Name(name)) => name
                .parse()
                .map_err(|_| Error::spec("base", format!("unknown base kernel {name:?}")))?,
            Some(other) => {
                return Err(Error::spec(
                    "base",
                    format!("expected a kernel name, got {other}"),
                ))
            }
        };
        if base == KernelName::WeisfeilerLehman {
            return Err(Error::spec(
                "base",
                "weisfeiler_lehman cannot be its own base",
            ));
        }
        let base_params: BTreeMap<String, ParamValue> = spec
            .params
            .iter()
            .filter(|(k, _)| {
                !KernelName::WeisfeilerLehman
                    .own_params()
                    .contains(&k.as_str())
            })
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        let base_kernel = build_base(base, &base_params, spec.seed)?;
        return Ok(Box::new(WeisfeilerLehman::new(h, base_kernel)));
    }
    build_base(spec.kernel, &spec.params, spec.seed)
}

fn build_base(
    name: KernelName,
    values: &BTreeMap<String, ParamValue>,
    seed: u64,
) -> Result<Box<dyn Kernel>> {
    if let Some(unknown) = values
        .keys()
        .find(|k| !name.own_params().contains(&k.as_str()))
    {
        return Err(Error::spec(
            unknown.as_str(),
            format!("unknown parameter for {name}"),
        ));
    }
    let params = Params { values };
    Ok(match name {
        KernelName::VertexHistogram => Box::new(Explicit(VertexHistogram)),
        KernelName::EdgeHistogram => Box::new(Explicit(EdgeHistogram)),
        KernelName::ShortestPath => Box::new(Explicit(ShortestPath {
            with_labels: params.flag("with_labels")?.unwrap_or(true),
        })),
        KernelName::GraphletSampling => {
            let k = params.count("k", 5)?;
            let samples = params.count("n_samples", 5000)?;
            let mode = match params.flag("exhaustive")? {
                None => GraphletMode::Auto,
                Some(true) => GraphletMode::Exhaustive,
                Some(false) => GraphletMode::Sampled,
            };
            Box::new(Explicit(GraphletKernel::new(k, samples, mode, seed)?))
        }
        KernelName::RandomWalk => {
            let defaults = WalkParams::default();
            Box::new(RandomWalk::new(WalkParams {
                lambda: params.number("lambda", defaults.lambda)?,
                match_labels: params
                    .flag("match_labels")?
                    .unwrap_or(defaults.match_labels),
                spectral_margin: params.number("spectral_margin", defaults.spectral_margin)?,
            })?)
        }
        KernelName::WeisfeilerLehman => unreachable!("handled by make_kernel"),
    })
}
