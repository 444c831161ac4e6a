"""Small-sphere limit of quasi-local energy from pointwise curvature data."""

from .tensor import (
    BelRobinsonTensor,
    CausalVector,
    CurvatureAtPoint,
    CurvatureError,
    ElectricMagneticParts,
    Observer,
    bel_robinson,
    electric_magnetic_from_weyl,
    q_contract,
    random_vacuum,
    v_vector,
    validate_riemann,
    weyl_from_electric_magnetic,
)

__version__ = "0.1.0"
