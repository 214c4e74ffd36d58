//! Finite element spaces: BDM_r for the vector unknowns and discontinuous
//! P_l for the pressure.

mod quadrature;
mod reference;
mod space;

pub use quadrature::{EdgeRule, TriangleRule};
pub use reference::{
    reference_edge, reference_edge_normal, reference_element, Family, ReferenceElement, ScalarValue,
    VectorValue,
};
pub use space::{build_space, piola_map, BoundaryCondition, FunctionSpace};
