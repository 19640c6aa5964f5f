//! Dataset descriptors (DCAT-AP plus health extension fields), the Turtle
//! subset they are exchanged in, and a FAIR Data Point harvesting client.

mod descriptor;
mod harvest;
pub mod turtle;

pub use descriptor::{
    descriptor_from_triples, descriptor_to_triples, descriptors_to_turtle, validate_descriptor,
    DatasetDescriptor, DescriptorError, DescriptorSet, DescriptorViolation, Distribution,
    Publisher, HEALTH_NS, RECOGNIZED_HEALTH_KEYS,
};
pub use harvest::{harvest, HarvestError, HarvestOptions, HarvestResult, HarvestedDescriptor};
pub use turtle::{emit_turtle, parse_turtle, RdfLiteral, Term, Triple, TurtleDoc, TurtleError};
