"""Command-line front end.

Every subcommand reads JSON domain and automorphism specifications (inline
or from a file), runs one experiment and writes JSON or CSV to ``--out`` or
standard output. Floats are written with 17 significant digits and the seed
is always part of the output, so identical inputs give identical bytes.

Exit codes: 0 success, 1 input error, 2 undetermined result or failed
search, 3 numerical failure. Messages go to standard error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np

from . import automorphisms as au
from . import dynamics, liegroup
from .domains import Ellipse, domain_from_json
from .errors import KobalabError, NumericError, PreconditionError, SearchFailure
from .kobayashi import geodesic_path, infinitesimal_metric, kobayashi_distance, visibility_probe

COMMANDS = ("metric", "distance", "geodesic", "classify", "orbit", "limit-set", "pingpong", "decompose",
            "visibility", "equivariance")

EXIT_OK, EXIT_INPUT, EXIT_UNDETERMINED, EXIT_NUMERIC = 0, 1, 2, 3


# ---------------------------------------------------------------------------
# serialization


def fmt_float(x) -> str:
    x = float(x)
    if not math.isfinite(x):
        return "null"
    s = format(x, ".17g")
    return "0" if s == "-0" else s


def dumps(obj) -> str:
    """Compact deterministic JSON with 17-significant-digit floats."""
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt_float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return "[" + fmt_float(obj.real) + "," + fmt_float(obj.imag) + "]"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ",".join(json.dumps(str(k)) + ":" + dumps(v) for k, v in obj.items()) + "}"
    if isinstance(obj, np.ndarray):
        return dumps(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(dumps(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def point_json(z):
    """Interleaved ``[Re z_1, Im z_1, Re z_2, ...]``."""
    if z is None:
        return None
    return [float(c) for x in np.atleast_1d(z) for c in (x.real, x.imag)]


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt_float(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# configuration


@dataclass
class RunConfig:
    command: str
    domain: str | None = None
    aut: str | None = None
    aut2: str | None = None
    point: list = field(default_factory=list)
    vector: str | None = None
    seed: int = 0
    degree: int | None = None
    samples: int | None = None
    n_max: int | None = None
    levels: int = 6
    word_len: int = 6
    jordan: bool = False
    kak: bool = False
    out: str | None = None
    format: str | None = None

    @classmethod
    def from_json(cls, obj):
        if not isinstance(obj, dict):
            raise PreconditionError("config must be a JSON object")
        known = {f.name for f in fields(cls)}
        extra = set(obj) - known
        if extra:
            raise PreconditionError(f"unknown config fields {sorted(extra)}")
        if "command" not in obj:
            raise PreconditionError("config needs a 'command'")
        return cls(**obj)


def _load_json(text, what):
    if text is None:
        raise PreconditionError(f"--{what} is required")
    if not isinstance(text, str):
        return text  # already parsed (config files may inline objects)
    src = text
    if not text.lstrip().startswith(("{", "[")):
        try:
            with open(text, encoding="utf-8") as fh:
                src = fh.read()
        except OSError as exc:
            raise PreconditionError(f"cannot read {what} file {text!r}: {exc}") from exc
    try:
        return json.loads(src)
    except json.JSONDecodeError as exc:
        raise PreconditionError(f"malformed {what} JSON: {exc}") from exc


def parse_point(text, dim=None):
    """Points as JSON: real numbers, ``[re, im]`` pairs, or strings accepted by ``complex()``."""
    obj = _load_json(text, "point")
    if not isinstance(obj, list) or not obj:
        raise PreconditionError("a point must be a nonempty JSON list")
    out = []
    try:
        for c in obj:
            if isinstance(c, list):
                if len(c) != 2:
                    raise PreconditionError("complex coordinates are [re, im] pairs")
                out.append(complex(float(c[0]), float(c[1])))
            elif isinstance(c, str):
                out.append(complex(c.replace(" ", "")))
            elif isinstance(c, (int, float)) and not isinstance(c, bool):
                out.append(complex(c))
            else:
                raise PreconditionError(f"bad coordinate {c!r}")
    except ValueError as exc:
        raise PreconditionError(f"bad coordinate: {exc}") from exc
    z = np.array(out, dtype=complex)
    if dim is not None and z.size != dim:
        raise PreconditionError(f"point has {z.size} coordinates, domain has dimension {dim}")
    return z


def _domain(cfg):
    return domain_from_json(_load_json(cfg.domain, "domain"))


def _aut(cfg, domain, which="aut"):
    return au.automorphism_from_json(_load_json(getattr(cfg, which), which.replace("_", "-")), domain)


def _points(cfg, domain, n):
    if len(cfg.point) < n:
        raise PreconditionError(f"{cfg.command} needs {n} --point value(s)")
    return [parse_point(p, domain.dim) for p in cfg.point[:n]]


def _threads():
    raw = os.environ.get("KOBA_THREADS", "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise PreconditionError(f"KOBA_THREADS must be a positive integer, got {raw!r}") from exc
    if n < 1:
        raise PreconditionError("KOBA_THREADS must be positive")
    return n


def _metric_params(cfg):
    return {k: v for k, v in (("degree", cfg.degree), ("samples", cfg.samples), ("seed", cfg.seed)) if v is not None}


def _bracket_json(b):
    return {"estimate": b.estimate, "lower": b.lower, "upper": b.upper}


# ---------------------------------------------------------------------------
# subcommands; each returns (payload, format, exit code)


def cmd_metric(cfg):
    D = _domain(cfg)
    (z,) = _points(cfg, D, 1)
    v = parse_point(cfg.vector, D.dim) if cfg.vector is not None else None
    if v is None:
        raise PreconditionError("metric needs --vector")
    b = infinitesimal_metric(D, z, v, **_metric_params(cfg))
    return {"command": "metric", "seed": cfg.seed, "domain": D.to_json(), "point": point_json(z),
            "vector": point_json(v), **_bracket_json(b), "method": b.info.get("method")}, EXIT_OK


def cmd_distance(cfg):
    D = _domain(cfg)
    z, w = _points(cfg, D, 2)
    b = kobayashi_distance(D, z, w, **_metric_params(cfg))
    return {"command": "distance", "seed": cfg.seed, "domain": D.to_json(), "z": point_json(z), "w": point_json(w),
            **_bracket_json(b)}, EXIT_OK


def cmd_geodesic(cfg):
    D = _domain(cfg)
    z, w = _points(cfg, D, 2)
    path, cert, b = geodesic_path(D, z, w, n=cfg.samples or 64, distance_params=_metric_params(cfg))
    if cfg.format == "json":
        return {"command": "geodesic", "seed": cfg.seed, "domain": D.to_json(), "certificate": list(cert),
                "distance": _bracket_json(b), "times": path.times,
                "points": [point_json(p) for p in path.points]}, EXIT_OK
    header = ["seed", "t"] + [f"{p}_z{j + 1}" for j in range(D.dim) for p in ("re", "im")]
    rows = [[cfg.seed, float(t)] + point_json(p) for t, p in zip(path.times, path.points)]
    return (header, rows), EXIT_OK


def _z0(cfg, D):
    return parse_point(cfg.point[0], D.dim) if cfg.point else None


def cmd_classify(cfg):
    D = _domain(cfg)
    g = _aut(cfg, D)
    params = {"n_max": cfg.n_max} if cfg.n_max else None
    rep = dynamics.classify(D, g, _z0(cfg, D), params)
    if rep.classification == "hyperbolic" and rep.translation_length is None:
        try:
            rep.translation_length = dynamics.translation_length(D, g, _z0(cfg, D), params=params).estimate
        except SearchFailure:
            pass
    out = {"classification": rep.classification, "ell_plus": point_json(rep.ell_plus),
           "ell_minus": point_json(rep.ell_minus), "translation_length": rep.translation_length,
           "iterations_used": int(rep.iterations_used), "seed": cfg.seed,
           "evidence": dynamics._jsonable(rep.evidence)}
    code = EXIT_UNDETERMINED if rep.classification == "undetermined" else EXIT_OK
    return out, code


def cmd_orbit(cfg):
    D = _domain(cfg)
    g = _aut(cfg, D)
    rows = dynamics.orbit_table(D, g, _z0(cfg, D), n=cfg.n_max or 100)
    header = ["seed", "n"] + [f"{p}_z{j + 1}" for j in range(D.dim) for p in ("re", "im")] + ["boundary_distance"]
    return (header, [[cfg.seed, r[0]] + [float(x) for x in r[1:]] for r in rows]), EXIT_OK


def cmd_limit_set(cfg):
    D = _domain(cfg)
    gens = [_aut(cfg, D)] + ([_aut(cfg, D, "aut2")] if cfg.aut2 else [])
    pts, info = dynamics.limit_set_sample(D, gens, n_samples=cfg.samples or 1000, seed=cfg.seed, z0=_z0(cfg, D),
                                          max_steps=cfg.n_max or 10_000)
    if cfg.format == "json":
        return {"command": "limit-set", "seed": cfg.seed, "dropped": info["dropped"],
                "points": [point_json(p) for p in pts]}, EXIT_OK
    header = ["seed", "index"] + [f"{p}_z{j + 1}" for j in range(D.dim) for p in ("re", "im")]
    return (header, [[cfg.seed, i] + point_json(p) for i, p in enumerate(pts)]), EXIT_OK


def cmd_pingpong(cfg):
    D = _domain(cfg)
    h1, h2 = _aut(cfg, D), _aut(cfg, D, "aut2")
    cert = dynamics.pingpong_witness(D, h1, h2, max_word_len=cfg.word_len, z0=_z0(cfg, D),
                                     samples=cfg.samples or 256, seed=cfg.seed)
    return {"command": "pingpong", "seed": cfg.seed, **cert.to_json()}, EXIT_OK


def cmd_decompose(cfg):
    if cfg.jordan == cfg.kak:
        raise PreconditionError("decompose needs exactly one of --jordan and --kak")
    g = au.automorphism_from_json(_load_json(cfg.aut, "aut"))
    if not isinstance(g, au.BallMoebius):
        raise PreconditionError("decompose needs a Moebius automorphism")
    el = liegroup.SU1kElement.from_moebius(g)
    out = {"command": "decompose", "seed": cfg.seed, "matrix": au.matrix_to_json(el.matrix)}
    if cfg.jordan:
        jd = liegroup.jordan_decomposition(el)
        out.update({"kind": "jordan", "g_e": au.matrix_to_json(jd.g_e), "g_h": au.matrix_to_json(jd.g_h),
                    "g_u": au.matrix_to_json(jd.g_u), "label": liegroup.classify_lie(el).label,
                    "residuals": {k: float(v) for k, v in jd.residuals.items()}})
    else:
        kd = liegroup.kak_decomposition(el)
        out.update({"kind": "kak", "k1": au.matrix_to_json(kd.k1), "a": au.matrix_to_json(kd.a),
                    "k2": au.matrix_to_json(kd.k2), "t": kd.t,
                    "residuals": {k: float(v) for k, v in kd.residuals.items()}})
    return out, EXIT_OK


def cmd_visibility(cfg):
    D = _domain(cfg)
    x, y = _points(cfg, D, 2)
    z0 = parse_point(cfg.point[2], D.dim) if len(cfg.point) > 2 else None
    res = visibility_probe(D, x, y, n_levels=cfg.levels, z0=z0, distance_params=_metric_params(cfg))
    rows = []
    for lv in res["levels"]:
        cert = lv.certificate
        rows.append([cfg.seed, lv.level, float(lv.depth), float(lv.statistic.estimate), float(lv.statistic.lower),
                     float(lv.statistic.upper), float(cert[1]) if cert else float("nan"),
                     "PASS" if res["pass"] else "FAIL"])
    header = ["seed", "level", "depth", "estimate", "lower", "upper", "kappa", "probe"]
    return (header, rows), EXIT_OK if res["pass"] else EXIT_UNDETERMINED


def cmd_equivariance(cfg):
    D = _domain(cfg)
    if not isinstance(D, Ellipse):
        raise PreconditionError("equivariance needs an ellipse domain")
    g = _aut(cfg, D)
    if cfg.point:
        xs = [parse_point(p, D.dim) for p in cfg.point]
    else:
        rng = np.random.default_rng(cfg.seed)
        xs = []
        for _ in range(cfg.samples or 1000):
            v = rng.normal(size=D.k) + 1j * rng.normal(size=D.k)
            xs.append(np.concatenate([v / np.linalg.norm(v), np.zeros(D.dim - D.k)]))
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        res = list(pool.map(lambda x: liegroup.equivariance_residual(D, x, g), xs))
    return {"command": "equivariance", "seed": cfg.seed, "samples": len(xs), "max_residual": max(res),
            "mean_residual": float(np.mean(res))}, EXIT_OK


HANDLERS = {
    "metric": cmd_metric, "distance": cmd_distance, "geodesic": cmd_geodesic, "classify": cmd_classify,
    "orbit": cmd_orbit, "limit-set": cmd_limit_set, "pingpong": cmd_pingpong, "decompose": cmd_decompose,
    "visibility": cmd_visibility, "equivariance": cmd_equivariance,
}
CSV_DEFAULT = {"geodesic", "orbit", "limit-set", "visibility"}


def run(cfg: RunConfig, stdout=None, stderr=None) -> int:
    """Execute one configuration; returns the exit code."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        if cfg.command not in HANDLERS:
            raise PreconditionError(f"unknown command {cfg.command!r}")
        if cfg.format not in (None, "json", "csv"):
            raise PreconditionError("--format must be json or csv")
        _threads()
        payload, code = HANDLERS[cfg.command](cfg)
    except PreconditionError as exc:
        print(f"kobalab: input error: {exc}", file=stderr)
        return EXIT_INPUT
    except SearchFailure as exc:
        print(f"kobalab: search failed: {exc}", file=stderr)
        return EXIT_UNDETERMINED
    except (NumericError, FloatingPointError, OverflowError, np.linalg.LinAlgError) as exc:
        print(f"kobalab: numeric failure: {exc}", file=stderr)
        return EXIT_NUMERIC
    except KobalabError as exc:
        print(f"kobalab: {exc}", file=stderr)
        return EXIT_NUMERIC
    if isinstance(payload, tuple):
        text = csv_text(*payload)
    else:
        text = dumps(payload) + "\n"
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    if code == EXIT_UNDETERMINED:
        print(f"kobalab: {cfg.command}: result undetermined", file=stderr)
    return code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: input error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INPUT)


def build_parser():
    p = _Parser(prog="kobalab", description="Kobayashi metric laboratory")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="RunConfig JSON file; explicit flags override it")
    p.add_argument("--domain", help="domain JSON (inline or file)")
    p.add_argument("--aut", help="automorphism JSON (inline or file)")
    p.add_argument("--aut2", help="second automorphism JSON")
    p.add_argument("--point", action="append", help="point as a JSON list; repeat for several points")
    p.add_argument("--vector", help="tangent vector as a JSON list")
    p.add_argument("--seed", type=int)
    p.add_argument("--degree", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--n-max", type=int, dest="n_max")
    p.add_argument("--levels", type=int)
    p.add_argument("--word-len", type=int, dest="word_len")
    p.add_argument("--jordan", action="store_true", default=None)
    p.add_argument("--kak", action="store_true", default=None)
    p.add_argument("--out")
    p.add_argument("--format", choices=("json", "csv"))
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        base = {}
        if args.config:
            base = _load_json(args.config, "config")
            if not isinstance(base, dict):
                raise PreconditionError("config must be a JSON object")
        base = dict(base, command=args.command)
        for key, val in vars(args).items():
            if key not in ("config", "command") and val is not None:
                base[key] = val
        cfg = RunConfig.from_json(base)
    except (PreconditionError, TypeError) as exc:
        print(f"kobalab: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if isinstance(cfg.point, str):
        cfg.point = [cfg.point]
    cfg.point = [p if isinstance(p, str) else json.dumps(p) for p in cfg.point]
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
