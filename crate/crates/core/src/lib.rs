//! Thermodynamic binding networks: model, text format, CNF encoding, an
//! embedded CDCL solver, the stable-configuration queries built on them, an
//! enumeration oracle, and instance generators.

pub mod encoder;
pub mod error;
pub mod model;
pub mod oracle;
pub mod par;
pub mod parser;
pub mod queries;
pub mod reductions;
pub mod sat;
mod union_find;

pub use error::{
    EncodeError, ModelError, OracleError, ParseError, QueryError, ReductionError, SatError,
};
pub use model::{Configuration, Monomer, PolymerPartition, SiteId, SiteRef, SiteType, Tbn};
pub use parser::{parse_tbn, serialize_tbn};
pub use queries::{
    can_be_free, saturated_config_exists, stable_polymer_count, stably_free, stably_free_batch,
    stably_free_direct, QueryOptions, QueryResult,
};
