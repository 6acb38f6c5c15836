"""Numerical tolerances and step-size defaults.

Every knob that the command line exposes through ``--set key=value`` lives
on :class:`Settings`; unknown keys are rejected.
"""

from dataclasses import dataclass, fields, replace

from .errors import ConfigError


@dataclass(frozen=True)
class Settings:
    # |beta_i| below this is treated as an exact zero
    zero_tol: float = 1e-10
    # eigenvalues below degeneracy_tol * (1 + ||K||) count as zero
    degeneracy_tol: float = 1e-9
    # spread allowed between per-index implied lambdas
    lambda_tol: float = 1e-7
    # gradient / lambda threshold for breakpoint tests
    breakpoint_tol: float = 1e-8
    # relative criticality residual accepted by classifiers
    critical_tol: float = 1e-6
    newton_tol: float = 1e-12
    newton_maxiter: int = 25
    corrector_retries: int = 30
    step_init: float = 1e-3
    step_min: float = 1e-9
    step_max: float = 1e-2
    event_tol: float = 1e-12
    max_steps: int = 200000
    # geometric approach points emitted next to each breakpoint
    approach_levels: int = 6
    probe_step: float = 1e-4
    tangency_tol: float = 1e-3
    coincidence_tol: float = 1e-6
    grid_points: int = 401
    grid_refine: int = 2
    grid_max_total: int = 4_000_000
    tie_tol: float = 1e-9

    def with_overrides(self, overrides):
        """Return a copy with ``overrides`` (mapping of name -> value) applied.

        String values are coerced to the field's type.
        """
        known = {f.name: f for f in fields(self)}
        changes = {}
        for key, value in overrides.items():
            if key not in known:
                raise ConfigError(f"unknown setting {key!r}; known: {sorted(known)}")
            kind = type(getattr(self, key))
            try:
                changes[key] = kind(float(value)) if kind is int else kind(value)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad value for {key!r}: {value!r}") from exc
        return replace(self, **changes)


DEFAULT = Settings()


def parse_overrides(items):
    """Parse ``["key=value", ...]`` into a dict, rejecting malformed items."""
    out = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"expected key=value, got {item!r}")
        out[key.strip()] = value.strip()
    return out
