//! Problem representation, instance generators and file formats.

mod io;
mod msvm;
mod pcp;
mod problem;
mod qp;

pub use io::{load_problem, read_raw_matrix, save_problem, write_raw_matrix};
pub use msvm::{gen_msvm, MsvmInstance};
pub use pcp::{build_pcp, gen_pcp, PcpInstance, PcpParams, YNorm};
pub use problem::{BlockProblem, Blocks, InstanceMeta};
pub use qp::{gen_planted_qp, gen_qp, PlantedQp};
