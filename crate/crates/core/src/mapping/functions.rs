//! User-defined functions callable from function term maps.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

use crate::rdf::vocab::xsd;
use crate::tabular::normalize_date;

/// Function arguments arrive as one value list per argument term map.
pub type UdfFn = dyn Fn(&[Vec<String>]) -> Result<Vec<String>, String> + Send + Sync;

/// Picks a literal datatype for one output value.
pub type DatatypeFn = fn(&str) -> Option<&'static str>;

#[derive(Clone)]
pub struct Udf {
    call: Arc<UdfFn>,
    datatype: Option<DatatypeFn>,
}

impl Udf {
    pub fn new<F>(f: F) -> Self
    where
        F: Fn(&[Vec<String>]) -> Result<Vec<String>, String> + Send + Sync + 'static,
    {
        Udf {
            call: Arc::new(f),
            datatype: None,
        }
    }

    /// Literal datatype to use for outputs when the term map declares none.
    pub fn with_datatype(mut self, datatype: DatatypeFn) -> Self {
        self.datatype = Some(datatype);
        self
    }

    pub fn call(&self, args: &[Vec<String>]) -> Result<Vec<String>, String> {
        (self.call)(args)
    }

    pub fn datatype_for(&self, value: &str) -> Option<&'static str> {
        self.datatype.and_then(|f| f(value))
    }
}

impl fmt::Debug for Udf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Udf").finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("function {0:?} is already registered")]
pub struct DuplicateFunction(pub String);

/// Named functions available to a materialization run. Read-only once
/// materialization starts.
#[derive(Debug, Clone, Default)]
pub struct FunctionRegistry {
    functions: BTreeMap<String, Udf>,
}

impl FunctionRegistry {
    /// An empty registry.
    pub fn new() -> Self {
        Self::default()
    }

    /// A registry holding `identity`, `to_iso_date`, `lowercase` and `concat`.
    pub fn with_builtins() -> Self {
        let mut r = Self::new();
        for (name, udf) in builtins::all() {
            r.register(name, udf).expect("builtin names are distinct");
        }
        r
    }

    pub fn register(&mut self, name: impl Into<String>, udf: Udf) -> Result<(), DuplicateFunction> {
        let name = name.into();
        if self.functions.contains_key(&name) {
            return Err(DuplicateFunction(name));
        }
        self.functions.insert(name, udf);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&Udf> {
        self.functions.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.functions.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.functions.keys().map(String::as_str)
    }
}

/// Registers `udf` under `name`, returning the extended registry.
pub fn register_function(
    mut registry: FunctionRegistry,
    name: &str,
    udf: Udf,
) -> Result<FunctionRegistry, DuplicateFunction> {
    registry.register(name, udf)?;
    Ok(registry)
}

pub mod builtins {
    use super::*;

    pub fn all() -> Vec<(&'static str, Udf)> {
        vec![
            ("identity", identity()),
            ("to_iso_date", to_iso_date()),
            ("lowercase", lowercase()),
            ("concat", concat()),
        ]
    }

    /// All argument values, flattened.
    pub fn identity() -> Udf {
        Udf::new(|args| Ok(args.concat()))
    }

    /// Each value through the catalog date normalizer; typed `xsd:date`, or
    /// `xsd:gYear` for bare years.
    pub fn to_iso_date() -> Udf {
        Udf::new(|args| {
            args.iter()
                .flatten()
                .map(|v| normalize_date(v).map_err(|e| e.to_string()))
                .collect()
        })
        .with_datatype(|v| Some(if v.len() == 4 { xsd::G_YEAR } else { xsd::DATE }))
    }

    pub fn lowercase() -> Udf {
        Udf::new(|args| Ok(args.iter().flatten().map(|v| v.to_lowercase()).collect()))
    }

    /// `concat(separator, values...)`: the first argument must be a single
    /// separator; every value of the remaining arguments is joined with it.
    pub fn concat() -> Udf {
        Udf::new(|args| {
            let (sep, rest) = args.split_first().ok_or("concat needs a separator argument")?;
            let [sep] = sep.as_slice() else {
                return Err(format!("concat separator must be a single value, got {}", sep.len()));
            };
            Ok(vec![rest.concat().join(sep)])
        })
    }
}
