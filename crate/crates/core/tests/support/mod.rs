//! Generators and reference implementations shared by the integration tests
//! (and by the acceptance suite of the CLI crate).
#![allow(dead_code)]

pub mod gen;
pub mod sparql_oracle;
