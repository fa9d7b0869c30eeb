"""Line-oriented suite configuration: ``key = value`` with [algorithm] sections.

Grammar: blank lines and ``#`` comments are ignored; global keys come first;
each ``[algorithm <name>]`` section opens one experiment entry whose keys set
algorithm-specific parameters.  Unknown keys are a hard error (there are no
silent typos) and every error carries its line number.  Numbers are parsed in
C-locale decimal.
"""

from __future__ import annotations

from .regret import RegretConfig
from .optimizers import ESConfig, FabianConfig, ResamplingSchedule, ShamirConfig
from .harness import ExperimentSpec

__all__ = ["ConfigError", "parse_config", "serialize_config"]

_GLOBAL_KEYS = {
    "dim": int,
    "noise_std": float,
    "budget": int,
    "replicates": int,
    "seed": int,
    "checkpoints_per_decade": int,
    "g_exponent": float,
    "quantile": float,
}
_GLOBAL_REQUIRED = ("dim", "budget", "replicates")
_GLOBAL_DEFAULTS = {
    "noise_std": 0.3,
    "checkpoints_per_decade": 20,
    "g_exponent": 2.0,
    "quantile": 1.0,
}

_ALGO_KEYS = {
    "rs": {"probe_period": int},
    "es": {
        "sigma0": float,
        "resample_kind": str,
        "resample_R": float,
        "resample_zeta": float,
        "fake_offspring": bool,
        "probe_period": int,
    },
    "shamir": {
        "epsilon": float,
        "lambda_step": float,
        "ball_radius": float,
        "probe_period": int,
    },
    "fabian": {
        "s": int,
        "a": float,
        "c": float,
        "gamma": float,
        "probe_period": int,
    },
}


class ConfigError(ValueError):
    """Carries a list of (line_number, message) pairs."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(f"line {ln}: {msg}" for ln, msg in self.errors))


def _parse_value(raw: str, typ, key: str, line_no: int, errors):
    raw = raw.strip()
    try:
        if typ is bool:
            if raw in ("true", "false"):
                return raw == "true"
            raise ValueError
        if typ is int:
            return int(raw)
        if typ is float:
            return float(raw)
        return raw
    except ValueError:
        errors.append((line_no, f"malformed {typ.__name__} for key {key!r}: {raw!r}"))
        return None


def _build_schedule(params: dict, line_no: int, errors):
    kind = params.get("resample_kind", "none")
    if kind not in ("none", "constant", "exponential"):
        errors.append((line_no, f"resample_kind must be none|constant|exponential, got {kind!r}"))
        return None
    if kind == "constant":
        # resample_R doubles as the constant evaluation count
        return ResamplingSchedule(kind="constant", count=int(params.get("resample_R", 1)))
    if kind == "exponential":
        return ResamplingSchedule(
            kind="exponential",
            base=params.get("resample_R", 1.0),
            growth=params.get("resample_zeta", 2.0),
        )
    return ResamplingSchedule()


def _attribute_line(message: str, key_lines: dict, fallback: int) -> int:
    """Point an error at the line of the parameter it names, if recognizable."""
    for key, line in key_lines.items():
        if key in message:
            return line
    return fallback


def _build_algo_config(name: str, params: dict, line_no: int, key_lines: dict, errors):
    """Returns (ok, config); on failure appends to ``errors`` and ok is False."""
    before = len(errors)
    try:
        if name == "rs":
            return True, None
        if name == "es":
            schedule = _build_schedule(params, line_no, errors)
            if len(errors) > before:
                return False, None
            kwargs = {}
            if "sigma0" in params:
                kwargs["sigma0"] = params["sigma0"]
            if "fake_offspring" in params:
                kwargs["fake_offspring"] = params["fake_offspring"]
            return True, ESConfig(schedule=schedule, **kwargs)
        if name == "shamir":
            kwargs = {k: params[k] for k in ("epsilon", "lambda_step", "ball_radius") if k in params}
            return True, ShamirConfig(**kwargs)
        if name == "fabian":
            kwargs = {k: params[k] for k in ("s", "a", "c", "gamma") if k in params}
            return True, FabianConfig(**kwargs)
    except ValueError as exc:
        errors.append((_attribute_line(str(exc), key_lines, line_no), str(exc)))
        return False, None
    raise AssertionError(f"unhandled algorithm {name}")


def parse_config(text: str, default_seed: int | None = None, suite_id: str = "config"):
    """Parse a suite configuration into validated experiment specs.

    Raises :class:`ConfigError` listing every line-numbered problem found.
    ``default_seed`` backs the ``seed`` key (command line or environment).
    """
    errors: list = []
    globals_: dict = {}
    sections: list = []  # (line_no, name, params: dict, key_lines: dict)
    current = None
    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not (line.endswith("]") and line[1:-1].strip().startswith("algorithm")):
                errors.append((line_no, f"bad section header {line!r}; expected [algorithm <name>]"))
                current = None
                continue
            name = line[1:-1].strip()[len("algorithm"):].strip()
            if name not in _ALGO_KEYS:
                errors.append(
                    (line_no, f"unknown algorithm {name!r}; expected one of {sorted(_ALGO_KEYS)}")
                )
                current = None
                continue
            current = (line_no, name, {}, {})
            sections.append(current)
            continue
        if "=" not in line:
            errors.append((line_no, f"expected key = value, got {line!r}"))
            continue
        key, _, raw_val = line.partition("=")
        key = key.strip()
        if current is None:
            if key not in _GLOBAL_KEYS:
                errors.append((line_no, f"unknown global key {key!r}"))
                continue
            val = _parse_value(raw_val, _GLOBAL_KEYS[key], key, line_no, errors)
            if val is not None:
                globals_[key] = val
        else:
            _, name, params, key_lines = current
            allowed = _ALGO_KEYS[name]
            if key not in allowed:
                errors.append((line_no, f"unknown key {key!r} for algorithm {name!r}"))
                continue
            val = _parse_value(raw_val, allowed[key], key, line_no, errors)
            if val is not None:
                params[key] = val
                key_lines[key] = line_no

    for key in _GLOBAL_REQUIRED:
        if key not in globals_:
            errors.append((0, f"missing required key {key!r}"))
    seed = globals_.get("seed", default_seed)
    if seed is None:
        errors.append((0, "missing required key 'seed' (set it, pass --seed, or export REGRETLAB_SEED)"))
    if errors:
        raise ConfigError(sorted(errors))

    merged = dict(_GLOBAL_DEFAULTS)
    merged.update(globals_)
    regret = RegretConfig(g_exponent=merged["g_exponent"], quantile=merged["quantile"])

    specs = []
    name_counts: dict = {}
    for line_no, name, params, key_lines in sections:
        ok, algo_config = _build_algo_config(name, params, line_no, key_lines, errors)
        if not ok:
            continue
        name_counts[name] = name_counts.get(name, 0) + 1
        spec_id = name if name_counts[name] == 1 else f"{name}#{name_counts[name]}"
        try:
            specs.append(
                ExperimentSpec(
                    spec_id=spec_id,
                    algorithm=name,
                    dim=merged["dim"],
                    noise_std=merged["noise_std"],
                    budget=merged["budget"],
                    replicates=merged["replicates"],
                    master_seed=seed,
                    checkpoints_per_decade=merged["checkpoints_per_decade"],
                    regret=regret,
                    probe_period=params.get("probe_period"),
                    algo_config=algo_config,
                    suite_id=suite_id,
                )
            )
        except ValueError as exc:
            errors.append((_attribute_line(str(exc), key_lines, line_no), str(exc)))
    if errors:
        raise ConfigError(sorted(errors))
    return specs


def serialize_config(specs) -> str:
    """Render specs back to config text; parse(serialize(parse(t))) == parse(t).

    All specs must share their global settings (which is what parsing a single
    file guarantees).
    """
    if not specs:
        raise ValueError("cannot serialize an empty spec list")
    first = specs[0]
    for s in specs[1:]:
        shared = (
            s.dim == first.dim
            and s.noise_std == first.noise_std
            and s.budget == first.budget
            and s.replicates == first.replicates
            and s.master_seed == first.master_seed
            and s.checkpoints_per_decade == first.checkpoints_per_decade
            and s.regret == first.regret
        )
        if not shared:
            raise ValueError("specs do not share global settings")
    lines = [
        f"dim = {first.dim}",
        f"noise_std = {first.noise_std!r}",
        f"budget = {first.budget}",
        f"replicates = {first.replicates}",
        f"seed = {first.master_seed}",
        f"checkpoints_per_decade = {first.checkpoints_per_decade}",
        f"g_exponent = {first.regret.g_exponent!r}",
        f"quantile = {first.regret.quantile!r}",
    ]
    for s in specs:
        lines.append("")
        lines.append(f"[algorithm {s.algorithm}]")
        cfg = s.algo_config
        if s.algorithm == "es" and cfg is not None:
            lines.append(f"sigma0 = {cfg.sigma0!r}")
            if cfg.schedule.kind != "none":
                lines.append(f"resample_kind = {cfg.schedule.kind}")
                if cfg.schedule.kind == "constant":
                    lines.append(f"resample_R = {float(cfg.schedule.count)!r}")
                else:
                    lines.append(f"resample_R = {cfg.schedule.base!r}")
                    lines.append(f"resample_zeta = {cfg.schedule.growth!r}")
            if cfg.fake_offspring:
                lines.append("fake_offspring = true")
        elif s.algorithm == "shamir" and cfg is not None:
            lines.append(f"epsilon = {cfg.epsilon!r}")
            lines.append(f"lambda_step = {cfg.lambda_step!r}")
            lines.append(f"ball_radius = {cfg.ball_radius!r}")
        elif s.algorithm == "fabian" and cfg is not None:
            lines.append(f"s = {cfg.s}")
            lines.append(f"a = {cfg.a!r}")
            lines.append(f"c = {cfg.c!r}")
            lines.append(f"gamma = {cfg.gamma!r}")
        if s.probe_period is not None:
            lines.append(f"probe_period = {s.probe_period}")
    return "\n".join(lines) + "\n"
