"""mjforms: lattices, indefinite theta series, mu-functions, and
covariant differential operators for Jacobi forms, with numerical
verification of the identities connecting them."""

__version__ = "0.1.0"

from .lattice import (  # noqa: F401
    CompatiblePair,
    DiscElement,
    DiscGroup,
    Frame,
    Lattice,
    analyze_lattice,
    discriminant_group,
    evaluate_form,
    find_replacement_vector,
    frame,
    lattice,
    normalize_frames,
    validate_compatible_pair,
    weil_representation,
)
