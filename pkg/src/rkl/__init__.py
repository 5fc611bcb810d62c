"""Resolvent kernel lab: Bessel-kernel evaluators, discrete operator checks,
weighted-norm sweeps and a verification registry, with a CLI front end."""

from .errors import (ConvergenceFailure, DomainError,
                     OscillatoryQuadratureError, RklError)
from .scaled import EvalResult, ScaledValue

__version__ = "0.1.0"

__all__ = [
    "ConvergenceFailure",
    "DomainError",
    "EvalResult",
    "OscillatoryQuadratureError",
    "RklError",
    "ScaledValue",
    "__version__",
    # re-exported lazily below
    "bessel_i_scaled",
    "bessel_j",
    "bessel_k_scaled",
    "product_ik",
    "KernelFamily",
    "resolvent_kernel",
    "integrated_kernel",
    "kernel_at_xi",
    "split_k1_k2",
    "Grid",
    "DiscreteOperator",
    "build_h",
    "weighted_norm",
    "Weight",
    "a2_characteristic",
    "registered_family",
    "registry",
    "run_all",
    "operator_checks",
    "mihlin_sweep",
]

_LAZY = {
    "bessel_i_scaled": "bessel", "bessel_j": "bessel",
    "bessel_k_scaled": "bessel", "product_ik": "bessel",
    "KernelFamily": "kernels", "resolvent_kernel": "kernels",
    "integrated_kernel": "kernels", "kernel_at_xi": "kernels",
    "split_k1_k2": "kernels",
    "Grid": "schrodinger", "DiscreteOperator": "schrodinger",
    "build_h": "schrodinger", "weighted_norm": "schrodinger",
    "Weight": "weights", "a2_characteristic": "weights",
    "registered_family": "weights",
    "registry": "verify", "run_all": "verify",
    "operator_checks": "verify", "mihlin_sweep": "verify",
}


def __getattr__(name: str):
    mod = _LAZY.get(name)
    if mod is None:
        raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
    import importlib
    value = getattr(importlib.import_module(f".{mod}", __name__), name)
    globals()[name] = value
    return value
