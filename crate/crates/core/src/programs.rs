//! Example programs shipped with the library.

pub const SPLAY: &str = include_str!("../programs/splay.lam");
pub const INSERT: &str = include_str!("../programs/insert.lam");
pub const DELETE: &str = include_str!("../programs/delete.lam");
pub const ID: &str = include_str!("../programs/id.lam");
pub const CONSTANT: &str = include_str!("../programs/constant.lam");
pub const LOOP: &str = include_str!("../programs/loop.lam");

/// `splay` together with the functions that call it.
pub fn splay_family() -> String {
    format!("{SPLAY}\n{INSERT}\n{DELETE}")
}

/// Every shipped program, keyed by file stem. `insert` and `delete` come
/// with the `splay` definition they depend on.
pub fn all() -> Vec<(&'static str, String)> {
    vec![
        ("splay", SPLAY.to_string()),
        ("insert", format!("{SPLAY}\n{INSERT}")),
        ("delete", format!("{SPLAY}\n{DELETE}")),
        ("id", ID.to_string()),
        ("constant", CONSTANT.to_string()),
        ("loop", LOOP.to_string()),
    ]
}
