pub mod classify;
pub mod hopf;
pub mod prelie;
pub mod rational;
pub mod sdse;
pub mod series;
pub mod trees;
