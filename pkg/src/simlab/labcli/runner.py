"""Experiment dispatch and report persistence.

CSV schema (version 1).  Every file starts with ``#`` header lines
(``schema``, ``tool``, ``experiment``, ``kind``, ``config_sha256``,
``seed``), then one column line and one row per grid point.  Floats carry
17 significant digits.  Columns per kind:

* analyze: ``input, t, dim, radius, norm, C, C_lower, C_upper, verdict``
* split: ``factor, scaling, kappa, residual, verdict`` plus a ``tensor`` row
* interpolate: ``input, t, norm, floor_t, frac_t, law_residual, verdict``
* gallery: ``input, t, dim, norm, radius, verdict``
* crsim: ``input, t, C, C_lower, C_upper, verdict`` plus a ``semigroup`` row
"""
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .. import __version__
from ..bhatskeide import (CircleGrid, InterpolatedSemigroup, bs_check_interpolation,
                          bs_semigroup_residual, norm_series)
from ..errors import ConfigError, IoError, NotGridAligned
from ..gallery import sample
from ..numkit.core import op_norm, spectral_radius
from ..simcert import crsim_profile, similarity_constant
from ..tensorsplit import split_scaling_discrete

SCHEMA_VERSION = 1


def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return "%.17g" % x
    return str(x)


@dataclass
class Report:
    """Rows of one experiment run.

    ``verdicts`` holds one entry per row; :attr:`passed` is true when every
    row passed.
    """

    header: dict
    columns: list
    rows: list = field(default_factory=list)
    verdicts: list = field(default_factory=list)

    def add(self, row, ok):
        self.rows.append(tuple(row))
        self.verdicts.append(bool(ok))

    @property
    def passed(self):
        return all(self.verdicts)

    def to_csv(self):
        buf = io.StringIO()
        for key in ("schema", "tool", "experiment", "kind", "config_sha256", "seed"):
            buf.write(f"# {key}={self.header[key]}\n")
        buf.write(",".join(self.columns) + "\n")
        for row in self.rows:
            buf.write(",".join(_fmt(x) for x in row) + "\n")
        return buf.getvalue()

    def summary(self):
        return {
            "header": self.header,
            "rows": len(self.rows),
            "passed": sum(self.verdicts),
            "failed": len(self.verdicts) - sum(self.verdicts),
            "verdict": "pass" if self.passed else "fail",
        }


def _operator_at(inp, t):
    if inp.is_model:
        return sample(inp.model, t)
    return inp.matrix


def _times_for(inp, cfg, default=(1.0,)):
    if inp.is_model:
        return cfg.times or default
    return (None,)


def _map(cfg, fn, jobs):
    # results come back in job order whatever the scheduling
    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            return list(pool.map(fn, jobs))
    return [fn(j) for j in jobs]


def _run_analyze(cfg, rep):
    jobs = [(inp, t) for inp in cfg.inputs for t in _times_for(inp, cfg)]

    def one(job):
        inp, t = job
        T = _operator_at(inp, 1.0 if t is None else t)
        res = similarity_constant(T, cfg.kappa_max, cfg.tol)
        return (inp.label, "" if t is None else float(t), T.shape[0], spectral_radius(T),
                op_norm(T), res.constant, float(res.lower_bound), float(res.upper_bound),
                str(res.verdict)), res.similar

    for row, ok in _map(cfg, one, jobs):
        rep.add(row, ok)


def _run_split(cfg, rep):
    factors = [_operator_at(inp, 1.0) for inp in cfg.inputs]
    res = split_scaling_discrete(factors, cfg.kappa_max, cfg.tol)
    for inp, s, c in zip(cfg.inputs, res.scalings, res.factor_certificates):
        kappa = c.kappa if c is not None else float("inf")
        resid = c.residual if c is not None else float("nan")
        rep.add((inp.label, float(s), float(kappa), float(resid),
                 "certified" if c is not None else "uncertified"), c is not None)
    t = res.tensor_certificate
    rep.add(("tensor", float(np.prod(res.scalings)),
             float(t.kappa) if t is not None else float("inf"),
             float(t.residual) if t is not None else float("nan"), str(res.verdict)), res.similar)


def _run_interpolate(cfg, rep):
    grid = CircleGrid(cfg.grid_size)
    times = cfg.times or tuple(grid.times(2.0))
    for inp in cfg.inputs:
        S = InterpolatedSemigroup(_operator_at(inp, 1.0), grid)
        try:
            fracs = [Fraction(round(t * grid.M), grid.M) for t in times]
            for t, fr in zip(times, fracs):
                if abs(float(fr) - t) > 1e-9 * max(1.0, t):
                    raise NotGridAligned(f"t = {t} is not a multiple of 1/{grid.M}")
        except NotGridAligned as exc:
            raise ConfigError(str(exc), field="times") from None
        rows = norm_series(S, fracs)
        for (t, nrm, fl, fr), tf in zip(rows, fracs):
            law = max(bs_semigroup_residual(S, tf, u) for u in fracs[:4])
            if tf.denominator == 1:
                law = max(law, bs_check_interpolation(S, int(tf)))
            rep.add((inp.label, float(t), float(nrm), fl, float(fr), float(law),
                     "exact" if law == 0.0 else "inexact"), law == 0.0)


def _run_gallery(cfg, rep):
    jobs = [(inp, t) for inp in cfg.inputs for t in _times_for(inp, cfg)]

    def one(job):
        inp, t = job
        T = _operator_at(inp, 1.0 if t is None else t)
        return (inp.label, "" if t is None else float(t), T.shape[0], op_norm(T),
                spectral_radius(T), "ok"), True

    for row, ok in _map(cfg, one, jobs):
        rep.add(row, ok)


def _run_crsim(cfg, rep):
    times = [t for t in cfg.times if t > 0] or [2.0 ** -k for k in range(6, -1, -1)]
    for inp in cfg.inputs:
        if inp.is_model:
            if not inp.model.has_generator:
                raise ConfigError(f"model {inp.model.name} has no bounded generator",
                                  field=inp.label)
            A = inp.model.generator
        else:
            A = inp.matrix
        prof = crsim_profile(A, times, cfg.kappa_max, cfg.tol)
        bad = {t for t, _ in prof.violations}
        for t, res in zip(prof.times, prof.results):
            rep.add((inp.label, t, res.constant, float(res.lower_bound), float(res.upper_bound),
                     "Inconsistent" if t in bad else "Consistent"), t not in bad)
        semi = prof.semigroup
        rep.add((inp.label, "semigroup", semi.constant, float(semi.lower_bound),
                 float(semi.upper_bound), prof.verdict), prof.verdict == "Consistent")


_KINDS = {
    "analyze": (_run_analyze, ["input", "t", "dim", "radius", "norm", "C", "C_lower",
                               "C_upper", "verdict"]),
    "split": (_run_split, ["factor", "scaling", "kappa", "residual", "verdict"]),
    "interpolate": (_run_interpolate, ["input", "t", "norm", "floor_t", "frac_t",
                                       "law_residual", "verdict"]),
    "gallery": (_run_gallery, ["input", "t", "dim", "norm", "radius", "verdict"]),
    "crsim": (_run_crsim, ["input", "t", "C", "C_lower", "C_upper", "verdict"]),
}


def run_experiment(cfg, write=True, force=False):
    """Run the experiment described by ``cfg`` and return its :class:`Report`.

    With ``write`` the CSV and a JSON summary land in ``cfg.output_dir`` as
    ``<name>.csv`` and ``<name>.json``.

    Raises
    ------
    IoError
        If an output file exists and ``force`` is false, or cannot be written.
    """
    fn, columns = _KINDS[cfg.kind]
    header = {"schema": SCHEMA_VERSION, "tool": f"simlab {__version__}", "experiment": cfg.name,
              "kind": cfg.kind, "config_sha256": cfg.config_hash, "seed": cfg.seed}
    csv_path = cfg.output_dir / f"{cfg.name}.csv"
    json_path = cfg.output_dir / f"{cfg.name}.json"
    if write and not force:
        for p in (csv_path, json_path):
            if p.exists():
                raise IoError(f"{p} exists; pass --force to overwrite")
    rep = Report(header, columns)
    fn(cfg, rep)
    if write:
        try:
            cfg.output_dir.mkdir(parents=True, exist_ok=True)
            csv_path.write_text(rep.to_csv(), encoding="utf-8", newline="\n")
            json_path.write_text(json.dumps(rep.summary(), indent=2, sort_keys=True) + "\n",
                                 encoding="utf-8", newline="\n")
        except OSError as exc:
            raise IoError(f"cannot write report: {exc}") from None
    return rep
