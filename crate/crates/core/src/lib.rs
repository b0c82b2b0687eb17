pub mod entail;
pub mod interp;
pub mod lang;
pub mod potential;
pub mod programs;
pub mod ratlp;
pub mod typing;
pub mod validate;

/// Whether function applications are charged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Costed,
    CostFree,
}
