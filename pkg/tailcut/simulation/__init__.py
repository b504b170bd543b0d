from tailcut.simulation.distributions import DEFAULT_SEED, DistributionSpec, SeedSpec, lookup
from tailcut.simulation.harness import EffReport, KoptProtocol, StudyConfig, run_table
from tailcut.simulation.registry import REGISTRY, register_selector

__all__ = [
    "DEFAULT_SEED",
    "DistributionSpec",
    "EffReport",
    "KoptProtocol",
    "REGISTRY",
    "SeedSpec",
    "StudyConfig",
    "lookup",
    "register_selector",
    "run_table",
]
