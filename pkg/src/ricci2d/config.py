"""Experiment configuration: a flat ``key = value`` text file with ``#`` comments."""
import dataclasses
import re
from dataclasses import dataclass

from .expr import ExpressionError, evaluate
from .inequalities import SIGMA_GRID
from .surface import SPHERE, TORUS, base_for

SUITES = ("flow", "spectral", "logsobolevA", "logsobolevB", "sobolevC",
          "noncollapseD", "extinctionE", "conjugate37", "static3")
# suites that need the flowed trajectory
FLOW_SUITES = frozenset({"flow", "spectral", "logsobolevA", "logsobolevB", "sobolevC",
                         "noncollapseD", "extinctionE", "conjugate37"})

PRESETS = {
    TORUS: {"zero": "0", "flat": "0", "perturbed": "0.05*sin(x)*sin(y)", "wave": "0.2*sin(x)"},
    SPHERE: {"zero": "0", "round": "0", "perturbed": "0.1*z*z", "tilted": "0.1*x*z"},
}


class ConfigError(ValueError):
    """Invalid configuration; ``field`` names the offending key."""

    def __init__(self, field_name, message):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass(frozen=True)
class ExperimentConfig:
    surface: str
    resolution: int
    suites: tuple
    phi0: str = "zero"
    t_end: float = 0.4
    snapshot_every: float = 0.05
    p_values: tuple = (4.0,)
    sigma_grid: tuple = SIGMA_GRID
    c_ni_mode: str = "analytic"
    seed: int = 0
    output_dir: str = "rf2d-out"
    check_times: tuple = ()          # empty: first, middle and last snapshot
    safety_factor: float = 0.1
    dt_max: float = 1e-2
    adversarial: bool = True
    adversarial_starts: int = 8
    static_metrics: int = 10
    kappa_floor: float = 0.0
    kappa_r_max: float = 0.0         # 0: no cap beyond half the diameter

    def __post_init__(self):
        if self.surface not in (TORUS, SPHERE):
            raise ConfigError("surface", f"unknown kind {self.surface!r}")
        if self.resolution < (4 if self.surface == TORUS else 0):
            raise ConfigError("surface", "resolution too small")
        if not self.suites:
            raise ConfigError("suites", "at least one suite is required")
        for s in self.suites:
            if s not in SUITES:
                raise ConfigError("suites", f"unknown suite {s!r}")
        if any(p <= 2 for p in self.p_values):
            raise ConfigError("p_values", "every p must exceed 2")
        if not self.sigma_grid or any(s <= 0 for s in self.sigma_grid):
            raise ConfigError("sigma_grid", "sigmas must be positive")
        if self.t_end <= 0:
            raise ConfigError("t_end", "must be positive")
        if self.snapshot_every <= 0:
            raise ConfigError("snapshot_every", "must be positive")
        if any(t < 0 for t in self.check_times):
            raise ConfigError("check_times", "times must be nonnegative")
        if not 0 < self.safety_factor < 1:
            raise ConfigError("safety_factor", "must lie in (0, 1)")
        self.c_ni_value  # validates the mode

    @property
    def base(self):
        return base_for(self.surface, self.resolution)

    @property
    def c_ni_value(self):
        """The fixed value for ``value(x)`` mode, else None."""
        mode = self.c_ni_mode
        if mode in ("analytic", "estimate"):
            return None
        m = re.fullmatch(r"value\(\s*([^)]+?)\s*\)", mode)
        if not m:
            raise ConfigError("c_ni_mode", f"expected analytic, estimate or value(x), got {mode!r}")
        try:
            v = float(m.group(1))
        except ValueError:
            raise ConfigError("c_ni_mode", f"bad number {m.group(1)!r}") from None
        if v <= 0:
            raise ConfigError("c_ni_mode", "value must be positive")
        return v

    def phi0_values(self):
        text = PRESETS[self.surface].get(self.phi0, self.phi0)
        try:
            return evaluate(text, self.base)
        except ExpressionError as exc:
            raise ConfigError("phi0", str(exc)) from None

    def as_dict(self):
        d = dataclasses.asdict(self)
        d["suites"] = list(self.suites)
        d["p_values"] = list(self.p_values)
        d["sigma_grid"] = list(self.sigma_grid)
        d["check_times"] = list(self.check_times)
        return d


def _floats(key, text):
    try:
        return tuple(float(v) for v in text.replace(",", " ").split())
    except ValueError:
        raise ConfigError(key, f"expected numbers, got {text!r}") from None


def _bool(key, text):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(key, f"expected a boolean, got {text!r}")


def _scalar(kind):
    def conv(key, text):
        try:
            return kind(text)
        except ValueError:
            raise ConfigError(key, f"expected {kind.__name__}, got {text!r}") from None
    return conv


_CONVERTERS = {
    "phi0": lambda k, v: v,
    "t_end": _scalar(float),
    "snapshot_every": _scalar(float),
    "suites": lambda k, v: tuple(s for s in v.replace(",", " ").split()),
    "p_values": _floats,
    "sigma_grid": _floats,
    "c_ni_mode": lambda k, v: v.replace(" ", ""),
    "seed": _scalar(int),
    "output_dir": lambda k, v: v,
    "check_times": _floats,
    "safety_factor": _scalar(float),
    "dt_max": _scalar(float),
    "adversarial": _bool,
    "adversarial_starts": _scalar(int),
    "static_metrics": _scalar(int),
    "kappa_floor": _scalar(float),
    "kappa_r_max": _scalar(float),
}


def parse_pairs(text):
    """``key = value`` lines to a dict; later keys win."""
    out = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}", f"expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key] = value
    return out


def parse_override(text):
    if "=" not in text:
        raise ConfigError("--override", f"expected key=value, got {text!r}")
    key, value = (part.strip() for part in text.split("=", 1))
    return key, value


def from_pairs(pairs):
    pairs = dict(pairs)
    if "surface" not in pairs:
        raise ConfigError("surface", "missing")
    parts = pairs.pop("surface").split()
    if len(parts) != 2:
        raise ConfigError("surface", "expected 'torus N' or 'sphere LEVEL'")
    kind, res = parts[0].lower(), parts[1]
    try:
        res = int(res)
    except ValueError:
        raise ConfigError("surface", f"bad resolution {res!r}") from None
    kwargs = {}
    for key, value in pairs.items():
        if key not in _CONVERTERS:
            raise ConfigError(key, "unknown key")
        kwargs[key] = _CONVERTERS[key](key, value)
    if "suites" not in kwargs:
        raise ConfigError("suites", "missing")
    return ExperimentConfig(surface=kind, resolution=res, **kwargs)


def load_config(text, overrides=()):
    pairs = parse_pairs(text)
    for item in overrides:
        key, value = parse_override(item)
        pairs[key] = value
    return from_pairs(pairs)
