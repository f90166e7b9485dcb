"""robustcrt: robust Chinese remaindering for multiple numbers from unordered noisy residues."""

from __future__ import annotations

import importlib
from typing import Any, Dict

__version__ = "0.3.0"

# Lazy attribute map so `import robustcrt` does not pull in scipy
_LAZY_MODULES: Dict[str, str] = {
    "arith": "robustcrt.arith",
    "model": "robustcrt.model",
    "algo1": "robustcrt.algo1",
    "algo2": "robustcrt.algo2",
    "reconstruct": "robustcrt.reconstruct",
    "ensemble": "robustcrt.ensemble",
    "analytics": "robustcrt.analytics",
    "pipeline": "robustcrt.pipeline",
    "harness": "robustcrt.harness",
    "oracles": "robustcrt.oracles",
    "export": "robustcrt.export",
    "ModuliSet": "robustcrt.model",
    "NoiseSpec": "robustcrt.model",
    "build_moduli": "robustcrt.model",
    "sample_instance": "robustcrt.model",
    "observe": "robustcrt.model",
    "load_observations": "robustcrt.model",
    "save_observations": "robustcrt.model",
    "algo1_cluster": "robustcrt.algo1",
    "algo2_iterate": "robustcrt.algo2",
    "single_rcrt": "robustcrt.reconstruct",
    "EnsembleConfig": "robustcrt.ensemble",
    "estimate": "robustcrt.pipeline",
    "ExperimentConfig": "robustcrt.harness",
    "run_experiment": "robustcrt.harness",
    "run_trial": "robustcrt.harness",
    "bound_span_prob": "robustcrt.analytics",
    "exact_span_prob": "robustcrt.analytics",
    "chernoff_success": "robustcrt.analytics",
}


def __getattr__(name: str) -> Any:
    """Lazy-load modules and functions on first access.

    Raises:
        AttributeError: If the attribute does not exist in _LAZY_MODULES.

    Example:
        >>> from robustcrt import estimate  # triggers __getattr__
    """
    if name in _LAZY_MODULES:
        module = importlib.import_module(_LAZY_MODULES[name])
        attr = getattr(module, name) if hasattr(module, name) else module
        globals()[name] = attr
        return attr
    raise AttributeError(f"module 'robustcrt' has no attribute '{name}'")


def __dir__() -> list[str]:
    return sorted(list(globals().keys()) + list(_LAZY_MODULES.keys()))


__all__ = list(_LAZY_MODULES.keys()) + ["__version__"]
