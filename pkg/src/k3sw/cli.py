"""Command-line front end.

Every subcommand builds a :class:`RunConfig` from defaults, an optional INI
file (section ``[run]``) and command-line flags, in that order of
precedence.  The result document embeds the config and a version stamp and
is written byte-for-byte deterministically (sorted keys, no timestamps).

Exit codes: 0 success with the expected pattern, 1 input error, 2 resource
error, 3 computational inconsistency or failed pattern.
"""

from __future__ import annotations

import argparse
import configparser
import dataclasses
import io
import json
import sys

import numpy as np

from . import sw
from ._accel import backend_name
from ._version import __version__
from .degree import antipodal_map, constant_map, degree, identity_map
from .errors import InputError, K3SWError, ResourceError
from .family import dual_frame_at, frame_at, wall_section
from .lattice import BLOCKS, DEFAULT_VECTOR_CAP, K3, enumerate_roots, pick_block_roots, split_roots
from .period import DEFAULT_TOLERANCE, construct_base_point
from .sphere_grid import fibonacci_sphere

FORMATS = ("json", "csv")


@dataclasses.dataclass
class RunConfig:
    enumeration_bound: float = 1.5
    epsilon: float = 0.1
    grid_level_start: int = 4
    grid_level_cap: int = 8
    tolerance: float = DEFAULT_TOLERANCE
    seed: int = 0
    output_path: str = ""
    format: str = "json"
    blocks: str = ",".join(BLOCKS)
    vector_cap: int = DEFAULT_VECTOR_CAP

    def validate(self):
        # a bound of 0 is allowed: it is the empty enumeration
        if not self.enumeration_bound >= 0:
            raise InputError("enumeration_bound must be non-negative")
        if not 0 < self.epsilon < 2**0.5:
            raise InputError("epsilon must lie in (0, sqrt 2)")
        if not 0 < self.grid_level_start <= self.grid_level_cap:
            raise InputError("need 0 < grid_level_start <= grid_level_cap")
        if self.grid_level_cap > 10:
            raise ResourceError("grid_level_cap above 10 is not supported")
        if not self.tolerance > 0:
            raise InputError("tolerance must be positive")
        if self.seed < 0:
            raise InputError("seed must be non-negative")
        if self.format not in FORMATS:
            raise InputError(f"format must be one of {FORMATS}")
        if self.vector_cap <= 0:
            raise InputError("vector_cap must be positive")
        names = self.block_names
        if not names or any(n not in BLOCKS for n in names):
            raise InputError(f"blocks must be a comma-separated subset of {', '.join(BLOCKS)}")
        return self

    @property
    def block_names(self):
        return tuple(s.strip() for s in self.blocks.split(",") if s.strip())

    def to_dict(self):
        return dataclasses.asdict(self)


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(RunConfig)}
_CASTS = {"float": float, "int": int, "str": str}


def _cast(name, value):
    try:
        return _CASTS[_FIELD_TYPES[name]](value)
    except (TypeError, ValueError) as exc:
        raise InputError(f"bad value for {name}: {value!r}") from exc


def load_config(path):
    """Read ``[run]`` key = value pairs from an INI file."""
    parser = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise InputError(f"malformed config {path}: {exc}") from exc
    extra = [s for s in parser.sections() if s != "run"]
    if extra:
        raise InputError(f"unknown config sections: {extra}")
    if not parser.has_section("run"):
        return {}
    out = {}
    for key, value in parser.items("run"):
        if key not in _FIELD_TYPES:
            raise InputError(f"unknown config key {key!r}")
        out[key] = _cast(key, value)
    return out


def build_config(args):
    values = {}
    if getattr(args, "config", None):
        values.update(load_config(args.config))
    for name in _FIELD_TYPES:
        v = getattr(args, name, None)
        if v is not None:
            values[name] = _cast(name, v)
    return RunConfig(**values).validate()


# --------------------------------------------------------------------------
# output


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def stamp():
    return {"k3sw": __version__, "numpy": np.__version__, "backend": backend_name()}


def render(command, config, result, csv_body=None):
    if config.format == "csv":
        buf = io.StringIO()
        buf.write(f"# command: {command}\n")
        for k, v in sorted(stamp().items()):
            buf.write(f"# version.{k}: {v}\n")
        for k, v in sorted(config.to_dict().items()):
            buf.write(f"# config.{k}: {v}\n")
        buf.write(csv_body if csv_body is not None else _flat_csv(result))
        return buf.getvalue()
    doc = {"command": command, "config": config.to_dict(), "version": stamp(), "result": result}
    return json.dumps(doc, sort_keys=True, indent=2, default=_jsonable) + "\n"


def _flat_csv(result):
    buf = io.StringIO()
    buf.write("key,value\n")
    for k, v in sorted(result.items()):
        if not isinstance(v, (dict, list)):
            buf.write(f"{k},{v}\n")
    return buf.getvalue()


def emit(config, text, summary):
    if config.output_path:
        try:
            with open(config.output_path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        except OSError as exc:
            raise InputError(f"cannot write {config.output_path}: {exc}") from exc
        print(summary)
    else:
        sys.stdout.write(text)
        print(summary, file=sys.stderr)


# --------------------------------------------------------------------------
# shared pipeline pieces


def _roots(config):
    rs = enumerate_roots(config.enumeration_bound, blocks=config.block_names, cap=config.vector_cap)
    return split_roots(rs)


def _vector(text):
    return K3.parse_vector(text)


def _vector_list(text):
    return [_vector(s) for s in text.split(";") if s.strip()]


def _require_root(vec, roots, what="delta"):
    if K3.norm2(vec) != -2:
        raise InputError(f"{what} {K3.format_vector(vec)} is not a root (square {K3.norm2(vec)})")
    if vec not in roots:
        raise InputError(f"{what} {K3.format_vector(vec)} is outside the enumeration (bound {roots.bound})")
    return vec


def _default_delta(roots):
    picks = pick_block_roots(roots, count=1)
    if not picks:
        raise InputError("no block root inside the enumeration; raise the bound or pass --delta")
    return picks[0]


def _delta_arg(args, roots):
    if args.delta in (None, "auto"):
        return _default_delta(roots)
    return _require_root(_vector(args.delta), roots)


def _family(config, roots, delta):
    return sw.build_family(delta, roots, seed=config.seed, epsilon=config.epsilon)


def _deltas_alphas(args, roots):
    if args.deltas.startswith("auto"):
        _, _, n = args.deltas.partition(":")
        if n and not n.isdigit():
            raise InputError(f"bad count in --deltas {args.deltas!r}")
        deltas = pick_block_roots(roots, count=int(n) if n else 10)
    else:
        deltas = _vector_list(args.deltas)
    mode = args.alphas
    if mode == "same":
        alphas = list(deltas)
    elif mode == "mirror":
        alphas = list(deltas) + [-d for d in deltas]
    else:
        alphas = _vector_list(mode)
    for d in deltas:
        _require_root(d, roots)
        if not roots.is_positive(d):
            raise InputError(f"delta {K3.format_vector(d)} is not in Delta+")
    for a in alphas:
        _require_root(a, roots, "alpha")
    return deltas, alphas


# --------------------------------------------------------------------------
# subcommands


def cmd_roots(config, args):
    roots = _roots(config)
    n_plus = int(roots.positive.sum())
    result = dict(roots.to_dict(), count=len(roots), delta_plus_count=n_plus,
                  labels=[K3.format_vector(r) for r in roots.roots])
    csv = "index,positive,root\n" + "".join(
        f'{i},{int(p)},"{K3.format_vector(r)}"\n' for i, (r, p) in enumerate(zip(roots.roots, roots.positive)))
    return result, csv, f"{len(roots)} roots within bound {config.enumeration_bound}; |Delta+| = {n_plus}", True


def cmd_base_point(config, args):
    roots = _roots(config)
    delta = _delta_arg(args, roots)
    base = construct_base_point(delta, roots, seed=config.seed, tolerance=config.tolerance)
    result = base.to_dict()
    summary = (f"base point for {K3.format_vector(delta)}: residual {base.frame.residual:.2e}, "
               f"genericity margin {base.genericity_margin:.3g}")
    return result, None, summary, True


def cmd_family_check(config, args):
    roots = _roots(config)
    delta = _delta_arg(args, roots)
    fam = _family(config, roots, delta)
    pts = fibonacci_sphere(args.points)
    om, star = frame_at(fam, pts), dual_frame_at(fam, pts)
    g = K3.gram.astype(np.float64)
    duality = np.einsum("nik,kl,njl->nij", om, g, star) - np.eye(3)
    gram = np.einsum("nik,kl,njl->nij", om, g, om)
    law = np.eye(3) - 0.5 * fam.epsilon**2 * pts[:, :, None] * pts[:, None, :]
    result = {
        "delta": delta.tolist(),
        "epsilon": fam.epsilon,
        "points": int(args.points),
        "duality_residual": float(np.abs(duality).max()),
        "gram_residual": float(np.abs(gram - law).max()),
        "wall_avoidance": fam.avoidance.to_dict(),
        "base_point": fam.base.to_dict(),
    }
    ok = result["duality_residual"] < 1e-10 and result["gram_residual"] < 1e-12
    summary = (f"family over {K3.format_vector(delta)} at epsilon {fam.epsilon:g}: duality "
               f"{result['duality_residual']:.1e}, gram {result['gram_residual']:.1e}, "
               f"{fam.avoidance.roots_checked} walls avoided")
    return result, None, summary, ok


def _named_map(text):
    if text == "identity":
        return identity_map()
    if text == "antipodal":
        return antipodal_map()
    if text.startswith("constant"):
        _, _, vec = text.partition(":")
        try:
            c = [float(t) for t in vec.split(",")] if vec else [0.0, 0.0, 1.0]
        except ValueError as exc:
            raise InputError(f"bad constant {vec!r}") from exc
        if len(c) != 3:
            raise InputError("constant map needs three components")
        return constant_map(c)
    return None


def cmd_degree(config, args):
    smap = _named_map(args.map)
    extra = {}
    if smap is None:
        if not args.map.startswith("wall:"):
            raise InputError("map must be identity, antipodal, constant[:x,y,z] or wall:<alpha>")
        roots = _roots(config)
        delta = _delta_arg(args, roots)
        alpha = _vector(args.map[5:])
        fam = _family(config, roots, delta)
        smap = wall_section(fam, alpha).as_sphere_map()
        extra = {"delta": delta.tolist(), "alpha": alpha.tolist()}
    cert = degree(smap, level=config.grid_level_start, cap=config.grid_level_cap, seed=config.seed)
    result = dict(extra, map=args.map, certificate=cert.to_dict())
    return result, None, f"degree {cert.degree} (residual {cert.residual:.2e}, level {cert.refinement_level})", True


def cmd_sw_matrix(config, args):
    roots = _roots(config)
    deltas, alphas = _deltas_alphas(args, roots)
    m = sw.sw_matrix(deltas, alphas, roots, seed=config.seed, epsilon=config.epsilon,
                     level=config.grid_level_start, cap=config.grid_level_cap)
    ok = m.pattern_holds()
    summary = (f"sw matrix {m.shape[0]}x{m.shape[1]}: holes {len(m.holes())}, mismatches {len(m.mismatches())}, "
               f"pattern {'holds' if ok else 'FAILS'}")
    return m.to_dict(), m.to_csv(), summary, ok


def cmd_scan(config, args):
    roots = _roots(config)
    if args.delta in (None, "auto"):
        delta = _default_delta(roots)
    else:
        delta = _vector(args.delta)
        if K3.norm2(delta) != -2:
            raise InputError(f"{K3.format_vector(delta)} is not a root")
    family_roots = roots
    if delta not in roots:
        # the family still needs delta's wall: build it from an enumeration that reaches delta
        reach = float(np.sqrt(delta @ K3.euclidean_form @ delta))
        family_roots = split_roots(enumerate_roots(max(reach, config.enumeration_bound), cap=config.vector_cap))
    fam = _family(config, family_roots, delta)
    res = sw.finiteness_scan(fam, roots, side=args.side, level=config.grid_level_start,
                             cap=config.grid_level_cap, seed=config.seed)
    for w in res.warnings:
        print(f"warning: {w}", file=sys.stderr)
    summary = (f"scanned {res.scanned} roots on the {args.side} side: nonzero "
               + (", ".join(f"({K3.format_vector(r)}, {d})" for r, d in res.nonzero) or "none"))
    return res.to_dict(K3), res.to_csv(K3), summary, res.pattern_holds()


def cmd_kappa_check(config, args):
    roots = _roots(config)
    delta = _delta_arg(args, roots)
    fam = _family(config, roots, delta)
    c = 2 * delta if args.c is None else _vector(args.c)
    try:
        refl = np.diag([float(t) for t in args.reflection.split(",")])
    except ValueError as exc:
        raise InputError(f"bad reflection {args.reflection!r}") from exc
    v = sw.kappa_flip_check(fam, c, reflection=refl, level=config.grid_level_start,
                            cap=config.grid_level_cap, seed=config.seed)
    summary = f"kappa flip for c = {K3.format_vector(c)}: {v.original.degree} -> {v.reflected.degree}"
    return v.to_dict(), None, summary, v.passed


ISOMETRIES = ("identity", "swap:U1,U2", "negate:U1")


def _isometry(text):
    if text == "identity":
        return np.eye(K3.rank, dtype=np.int64)
    kind, _, names = text.partition(":")
    parts = [s.strip() for s in names.split(",") if s.strip()]
    if any(p not in BLOCKS for p in parts):
        raise InputError(f"unknown block in {text!r}")
    if kind == "swap" and len(parts) == 2:
        return sw.block_swap_isometry(*parts)
    if kind == "negate" and len(parts) == 1:
        return sw.block_negation_isometry(parts[0])
    if kind == "matrix":
        try:
            m = np.array(json.loads(names), dtype=np.int64)
        except (ValueError, TypeError) as exc:
            raise InputError("matrix isometry must be a JSON 22x22 integer array") from exc
        return m
    raise InputError(f"isometry must be identity, swap:A,B, negate:A or matrix:<json>; got {text!r}")


def cmd_equivariance_check(config, args):
    roots = _roots(config)
    deltas, alphas = _deltas_alphas(args, roots)
    iso = _isometry(args.iso)
    kw = dict(seed=config.seed, epsilon=config.epsilon, level=config.grid_level_start, cap=config.grid_level_cap)
    m = sw.sw_matrix(deltas, alphas, roots, **kw)
    if not m.pattern_holds():
        return {"matrix": m.to_dict()}, m.to_csv(), "original matrix fails its pattern", False
    v = sw.isometry_equivariance_check(iso, m, roots, **kw)
    result = {"iso": args.iso, "matrix": m.to_dict(), "verdict": v.to_dict()}
    summary = f"equivariance under {args.iso}: {'holds' if v.passed else 'FAILS'} ({len(v.mismatches)} mismatches)"
    return result, None, summary, v.passed


COMMANDS = {
    "roots": cmd_roots,
    "base-point": cmd_base_point,
    "family-check": cmd_family_check,
    "degree": cmd_degree,
    "sw-matrix": cmd_sw_matrix,
    "scan": cmd_scan,
    "kappa-check": cmd_kappa_check,
    "equivariance-check": cmd_equivariance_check,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--config", help="INI file with a [run] section")
    common.add_argument("--bound", dest="enumeration_bound", type=float)
    common.add_argument("--epsilon", type=float)
    common.add_argument("--grid-level-start", dest="grid_level_start", type=int)
    common.add_argument("--grid-level-cap", dest="grid_level_cap", type=int)
    common.add_argument("--tolerance", type=float)
    common.add_argument("--seed", type=int)
    common.add_argument("-o", "--output", dest="output_path")
    common.add_argument("--format", choices=FORMATS)
    common.add_argument("--blocks", help="comma-separated blocks to enumerate in, e.g. U1,U2,U3")
    common.add_argument("--vector-cap", dest="vector_cap", type=int)

    parser = _Parser(prog="k3sw", description="Families Seiberg-Witten invariants of K3 wall families.")
    parser.add_argument("--version", action="version", version=f"k3sw {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("roots", parents=[common], help="enumerate and split the roots")
    for name, helptext in [("base-point", "generic base point on a wall"),
                           ("family-check", "frame identities and wall avoidance of a family")]:
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--delta", default="auto")
        if name == "family-check":
            p.add_argument("--points", type=int, default=10_000)
    p = sub.add_parser("degree", parents=[common], help="degree of a test map or wall section")
    p.add_argument("--map", default="identity", help="identity, antipodal, constant[:x,y,z] or wall:<alpha>")
    p.add_argument("--delta", default="auto")
    for name in ("sw-matrix", "equivariance-check"):
        p = sub.add_parser(name, parents=[common], help="sw matrix" if name == "sw-matrix" else
                           "transport an sw matrix by a lattice isometry")
        p.add_argument("--deltas", default="auto", help="'auto', 'auto:N' or ';'-separated roots")
        p.add_argument("--alphas", default="same", help="'same', 'mirror' or ';'-separated roots")
        if name == "equivariance-check":
            p.add_argument("--iso", default="swap:U1,U2", help=", ".join(ISOMETRIES) + " or matrix:<json>")
    p = sub.add_parser("scan", parents=[common], help="finiteness scan over Delta+ or Delta-")
    p.add_argument("--delta", default="auto")
    p.add_argument("--side", choices=("plus", "minus"), default="plus")
    p = sub.add_parser("kappa-check", parents=[common], help="reflection flips the degree")
    p.add_argument("--delta", default="auto")
    p.add_argument("--c", default=None, help="class with c^2 = -8 (default 2*delta)")
    p.add_argument("--reflection", default="1,1,-1", help="diagonal of the reflection")
    return parser


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        config = build_config(args)
        result, csv_body, summary, ok = COMMANDS[args.command](config, args)
        emit(config, render(args.command, config, result, csv_body), summary)
    except K3SWError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except MemoryError:
        print("error: out of memory", file=sys.stderr)
        return ResourceError.exit_code
    if not ok:
        print("pattern check failed", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
