//! Benchmark classifiers and feature selectors.

pub mod cart;
pub mod logistic;
pub mod naive_bayes;
pub mod selectors;

pub use cart::{cart_fit, cart_predict, CartConfig, CartModel};
pub use logistic::{lr_fit, lr_predict, LrConfig, LrModel};
pub use naive_bayes::{nb_fit, nb_predict, NbModel};
pub use selectors::{SelectorKind, SelectorResult};
