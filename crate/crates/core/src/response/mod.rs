//! Linear response around a steady state: the interaction potential, the
//! response symbol m_f(τ, k) and the invertibility criteria for 1 - L.

mod criteria;
mod potential;
mod symbol;

pub use criteria::{a_theta, check_cor_3d, check_cs, check_sc, log_term_3d, symbol_gap, CriterionName, CriterionReport};
pub use potential::{Potential, PotentialKind};
pub use symbol::{m_f_quadrature, ProfileSource, ResponseEngine, ResponseSymbol, SymbolConfig, SymbolMeta, SymbolValue, TransformValue};
