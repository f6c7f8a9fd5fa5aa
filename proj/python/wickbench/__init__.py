"""Python access to the wickbench core: exact polynomial identities, special
functions, and the config-driven experiments."""

from pathlib import Path

from ._wickbench import (
    ConfigError,
    bessel_k,
    bessel_potential,
    experiment_names,
    hermite_q,
    hitting_cdf,
    identity_tags,
    laguerre_lambda,
    mass_change_check,
    massive_green,
    run_config,
    selfcheck,
    series_p_hit,
    verify_identity,
)


def run_file(path, workers=1):
    """Run the experiment described by a TOML file."""
    return run_config(Path(path).read_text(), workers)


__all__ = [
    "ConfigError",
    "bessel_k",
    "bessel_potential",
    "experiment_names",
    "hermite_q",
    "hitting_cdf",
    "identity_tags",
    "laguerre_lambda",
    "mass_change_check",
    "massive_green",
    "run_config",
    "run_file",
    "selfcheck",
    "series_p_hit",
    "verify_identity",
]
