"""Experiment configuration files.

A config is flat UTF-8 ``key = value`` text with bracketed sections::

    [experiment]
    kind = analyze
    name = demo
    seed = 7
    output_dir = out
    kappa_max = 1e8

    [inputs]
    a = diag:0.5
    b = model:foguel N=9

    [times]
    values = 0.5, 1
    range = 0, 2, 5
    dyadic = 6

    [tolerances]
    tol_rel = 1e-8

Input values take one of the forms

* ``matrix:<path>``: a file in the shared matrix text format (relative
  paths resolve against the config file's directory),
* ``inline:<rows>``: rows separated by ``;``, entries by ``,`` (Python
  complex literals such as ``1+2j`` are accepted),
* ``diag:<entries>``: a diagonal matrix,
* ``model:<name> key=value ...``: a gallery model (``@path`` values are
  read as matrices),
* ``random:dim=<n> radius=<r>``: a complex Gaussian matrix scaled to the
  given spectral radius, drawn from the experiment seed.

Times from ``values``, ``range`` (start, stop, count, inclusive) and
``dyadic`` (``2^-k`` for ``k = K, ..., 0``) are merged and sorted.
"""
import configparser
import hashlib
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import BadParams, ConfigError, ParseError
from ..gallery import ModelSpec, build_model
from ..numkit.core import DEFAULT_TOL, TolerancePolicy, as_operator, spectral_radius
from ..numkit.matrixio import read_matrix

KINDS = ("analyze", "split", "interpolate", "gallery", "crsim")
_EXPERIMENT_KEYS = {"kind", "name", "seed", "output_dir", "kappa_max", "M", "workers"}
_TOL_KEYS = {"tol_herm", "tol_psd", "tol_rel", "max_iter"}
_TIME_KEYS = {"values", "range", "dyadic"}


@dataclass(frozen=True)
class Input:
    """One resolved experiment input: a fixed matrix or a gallery model."""

    label: str
    source: str
    matrix: np.ndarray = None
    model: object = None

    @property
    def is_model(self):
        return self.model is not None


@dataclass(frozen=True)
class ExperimentConfig:
    """A validated experiment description.

    ``text`` is the canonical source the config hash is computed from.
    """

    kind: str
    name: str
    inputs: tuple
    times: tuple = ()
    kappa_max: float = 1e8
    tol: TolerancePolicy = DEFAULT_TOL
    seed: int = 0
    output_dir: Path = Path(".")
    grid_size: int = 16
    workers: int = 1
    text: str = field(default="", repr=False)

    @property
    def config_hash(self):
        return hashlib.sha256(self.text.encode("utf-8")).hexdigest()


def _line_index(text):
    """Map ``(section, key)`` to the 1-based line it appears on."""
    where = {}
    section = None
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        m = re.match(r"^\[(.+)\]$", line)
        if m:
            section = m.group(1).strip()
            where[(section, None)] = no
            continue
        key = re.split(r"[=:]", line, maxsplit=1)[0].strip()
        where[(section, key)] = no
    return where


def _number(value, typ, section, key, lines):
    try:
        return typ(value)
    except ValueError:
        raise ConfigError(f"expected {typ.__name__}, got {value!r}",
                          line=lines.get((section, key)), field=key) from None


def _parse_inline(body):
    rows = [r for r in body.split(";")]
    try:
        data = [[complex(x.strip().replace(" ", "")) for x in r.split(",")] for r in rows]
    except ValueError as exc:
        raise ParseError(f"bad matrix entry: {exc}") from None
    if len({len(r) for r in data}) != 1:
        raise ParseError("rows have different lengths")
    return as_operator(data, square=True)


def _model_value(v, base):
    if v.startswith("@"):
        return read_matrix(base / v[1:])
    for typ in (int, float):
        try:
            return typ(v)
        except ValueError:
            pass
    return v


def _random_matrix(args, rng):
    dim = int(args.get("dim", 3))
    radius = float(args.get("radius", 0.9))
    if dim < 1 or radius < 0:
        raise ParseError("random input needs dim >= 1 and radius >= 0")
    G = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    r = spectral_radius(G)
    return G * (radius / r) if r > 0 else G


def _keyvals(tokens):
    out = {}
    for tok in tokens:
        if "=" not in tok:
            raise ParseError(f"expected key=value, got {tok!r}")
        k, v = tok.split("=", 1)
        out[k] = v
    return out


def resolve_input(label, value, base=Path("."), rng=None):
    """Turn one ``[inputs]`` value into an :class:`Input`.

    Raises
    ------
    ParseError
        For an unknown prefix or a malformed body.
    BadParams
        For invalid model parameters.
    """
    if ":" not in value:
        raise ParseError(f"input {label!r} needs a prefix such as matrix:, inline:, model:")
    prefix, body = value.split(":", 1)
    prefix, body = prefix.strip(), body.strip()
    try:
        return _resolve(label, value, prefix, body, base, rng)
    except (ValueError, ArithmeticError) as exc:
        if isinstance(exc, (ParseError, BadParams)):
            raise
        raise ParseError(f"input {label!r}: {exc}") from None


def _resolve(label, value, prefix, body, base, rng):
    if prefix == "matrix":
        return Input(label, value, matrix=as_operator(read_matrix(base / body), square=True))
    if prefix == "inline":
        return Input(label, value, matrix=_parse_inline(body))
    if prefix == "diag":
        entries = [complex(x.strip()) for x in body.split(",")]
        return Input(label, value, matrix=np.diag(np.array(entries, dtype=complex)))
    if prefix == "model":
        parts = body.split()
        if not parts:
            raise ParseError("model input needs a model name")
        params = {k: _model_value(v, base) for k, v in _keyvals(parts[1:]).items()}
        return Input(label, value, model=build_model(ModelSpec(parts[0], params)))
    if prefix == "random":
        rng = rng if rng is not None else np.random.default_rng(0)
        return Input(label, value, matrix=_random_matrix(_keyvals(body.split()), rng))
    raise ParseError(f"unknown input prefix {prefix!r}")


def _parse_times(section, lines):
    times = []
    for key, value in section.items():
        if key not in _TIME_KEYS:
            raise ConfigError("unknown key", line=lines.get(("times", key)), field=key)
        parts = [p.strip() for p in value.split(",") if p.strip()]
        if key == "values":
            times += [_number(p, float, "times", key, lines) for p in parts]
        elif key == "range":
            if len(parts) != 3:
                raise ConfigError("range needs start, stop, count",
                                  line=lines.get(("times", key)), field=key)
            a, b = (_number(p, float, "times", key, lines) for p in parts[:2])
            n = _number(parts[2], int, "times", key, lines)
            if n < 1:
                raise ConfigError("count must be positive", line=lines.get(("times", key)),
                                  field=key)
            times += list(np.linspace(a, b, n)) if n > 1 else [a]
        else:
            K = _number(value.strip(), int, "times", key, lines)
            times += [2.0 ** -k for k in range(K, -1, -1)]
    times = sorted(set(float(t) for t in times))
    if times and times[0] < 0:
        raise ConfigError("times must be nonnegative", line=lines.get(("times", None)),
                          field="times")
    return tuple(times)


def loads_config(text, base=Path("."), overrides=None):
    """Parse and validate config text.

    ``overrides`` may set ``kind``, ``seed``, ``output_dir``, ``kappa_max``,
    ``tol`` (relative tolerance) and ``inputs`` (a list of input values).

    Raises
    ------
    ConfigError
        With the line and field of the first problem found.
    """
    overrides = dict(overrides or {})
    lines = _line_index(text)
    cp = configparser.ConfigParser(interpolation=None, delimiters=("=",),
                                   inline_comment_prefixes=(";", "#"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.ParsingError as exc:
        lineno = exc.errors[0][0] if exc.errors else None
        raise ConfigError("malformed line", line=lineno) from None
    except configparser.Error as exc:
        raise ConfigError(str(exc).splitlines()[0], line=getattr(exc, "lineno", None)) from None
    for sec in cp.sections():
        if sec not in ("experiment", "inputs", "times", "tolerances"):
            raise ConfigError("unknown section", line=lines.get((sec, None)), field=sec)
    exp = cp["experiment"] if cp.has_section("experiment") else {}
    for key in exp:
        if key not in _EXPERIMENT_KEYS:
            raise ConfigError("unknown key", line=lines.get(("experiment", key)), field=key)

    kind = overrides.get("kind") or exp.get("kind")
    if exp.get("kind") and overrides.get("kind") and exp["kind"] != overrides["kind"]:
        raise ConfigError(f"config is for {exp['kind']!r}, not {overrides['kind']!r}",
                          line=lines.get(("experiment", "kind")), field="kind")
    if kind not in KINDS:
        raise ConfigError(f"kind must be one of {', '.join(KINDS)}, got {kind!r}",
                          line=lines.get(("experiment", "kind")), field="kind")
    name = exp.get("name", kind)
    if not re.fullmatch(r"[A-Za-z0-9_.-]+", name):
        raise ConfigError("name may contain letters, digits, '.', '_' and '-' only",
                          line=lines.get(("experiment", "name")), field="name")

    if overrides.get("seed") is not None:
        seed = int(overrides["seed"])
    elif "seed" in exp:
        seed = _number(exp["seed"], int, "experiment", "seed", lines)
    else:
        raise ConfigError("a seed is required for reproducible runs", field="seed")
    if not 0 <= seed < 2 ** 64:
        raise ConfigError("seed must be an unsigned 64-bit integer",
                          line=lines.get(("experiment", "seed")), field="seed")

    kappa_max = overrides.get("kappa_max")
    if kappa_max is None:
        kappa_max = _number(exp.get("kappa_max", "1e8"), float, "experiment", "kappa_max", lines)
    if not kappa_max > 1:
        raise ConfigError("kappa_max must exceed 1", line=lines.get(("experiment", "kappa_max")),
                          field="kappa_max")
    grid = _number(exp.get("M", "16"), int, "experiment", "M", lines)
    workers = _number(exp.get("workers", "1"), int, "experiment", "workers", lines)
    if grid < 1 or workers < 1:
        raise ConfigError("M and workers must be positive", field="M" if grid < 1 else "workers")

    tol_args = {}
    if cp.has_section("tolerances"):
        for key, value in cp["tolerances"].items():
            if key not in _TOL_KEYS:
                raise ConfigError("unknown key", line=lines.get(("tolerances", key)), field=key)
            tol_args[key] = _number(value, int if key == "max_iter" else float,
                                    "tolerances", key, lines)
    if overrides.get("tol") is not None:
        tol_args["tol_rel"] = float(overrides["tol"])
    try:
        tol = DEFAULT_TOL.with_overrides(**tol_args)
    except ValueError as exc:
        raise ConfigError(str(exc), field="tolerances") from None

    times = _parse_times(cp["times"], lines) if cp.has_section("times") else ()

    rng = np.random.default_rng(seed)
    raw_inputs = list(cp["inputs"].items()) if cp.has_section("inputs") else []
    if overrides.get("inputs"):
        raw_inputs = [(f"in{k + 1}", v) for k, v in enumerate(overrides["inputs"])]
    if not raw_inputs:
        raise ConfigError("at least one input is required", field="inputs")
    inputs = []
    for label, value in raw_inputs:
        try:
            inputs.append(resolve_input(label, value, base, rng))
        except (ParseError, BadParams, OSError) as exc:
            raise ConfigError(str(exc), line=lines.get(("inputs", label)), field=label) from None

    out = overrides.get("output_dir") or exp.get("output_dir", ".")
    out = Path(out)
    if not out.is_absolute() and not overrides.get("output_dir"):
        out = base / out
    canonical = text if text.endswith("\n") else text + "\n"
    extra = {k: v for k, v in overrides.items() if v is not None and k != "output_dir"}
    if extra:
        canonical += "# overrides " + " ".join(f"{k}={extra[k]}" for k in sorted(extra)) + "\n"
    return ExperimentConfig(kind, name, tuple(inputs), times, float(kappa_max), tol, seed, out,
                            grid, workers, canonical)


def load_config(path, overrides=None):
    """Read and validate a config file (see :func:`loads_config`)."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    except UnicodeDecodeError:
        raise ConfigError(f"{path} is not valid UTF-8") from None
    return loads_config(text, path.parent, overrides)
