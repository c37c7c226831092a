pub mod cli;
pub mod conventions;
pub mod error;
pub mod futaki;
pub mod interp;
pub mod job;
pub mod linalg;
pub mod mabuchi;
pub mod pick;
pub mod poly;
pub mod rational;
pub mod report;
pub mod rootsystem;
pub mod pl;
pub mod polytope;
pub mod quadrature;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/root-systems.md")]
    mod root_systems {}
    #[doc = include_str!("../../../book/src/polytopes.md")]
    mod polytopes {}
    #[doc = include_str!("../../../book/src/integration.md")]
    mod integration {}
    #[doc = include_str!("../../../book/src/futaki.md")]
    mod futaki {}
    #[doc = include_str!("../../../book/src/pick.md")]
    mod pick {}
    #[doc = include_str!("../../../book/src/mabuchi.md")]
    mod mabuchi {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
