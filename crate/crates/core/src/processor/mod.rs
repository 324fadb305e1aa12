//! Instruction set, object store, functional executor and cost model.

pub mod cost;
pub mod exec;
pub mod isa;
pub mod store;

pub use cost::{
    batch_schedule, dfr_normalize, external_bandwidth, internal_bandwidth, ks_throughput, pbs_cycle_model,
    pbs_latency_model, report, CostReport, ExecConfig,
};
pub use exec::execute;
pub use isa::{decode_instruction, decode_program, encode_instruction, encode_program, Instruction, Opcode};
pub use store::{ObjectStore, StoredObject};
