"""Command-line front end.

Input is a TOML file::

    [configuration]
    points = [["0", "0"], ["2", "0"], ["1", "2"], ["3", "1"]]
    weights = [["1", "0"], ["1", "0"], ["1", "0"], ["2", "0"]]

    [group]
    kind = "rigid"
    rotation_units = [["3/5", "4/5"]]
    quarter_turns = true

    [window]
    denominator = 1
    x = [-8, 8]
    y = [-8, 8]

    [options]
    target = ["0", "0"]
    triangle = [["0", "0"], ["4", "0"], ["3", "2"]]
    alpha = 23.0

Results are printed as JSON and, with ``--out``, written to files.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations
from typing import Any

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import geometry, gridlab, spectral, zeilberger
from .configuration import KINDS, Configuration, MotionGroup, Window, commensurability_check, rational_sqrt
from .errors import (BranchCapExceeded, ParseError, PompeiuError, PositionError,
                     ValidationError)
from .exact import GaussRational

EXIT_OK, EXIT_INVALID, EXIT_CAP = 0, 2, 3

SCHEMA = {
    "configuration": {"points", "weights"},
    "group": {"kind", "rotation_units", "scale_set", "quarter_turns"},
    "window": {"denominator", "x", "y"},
    "options": {"alpha", "tol", "branch_cap", "target", "triangle"},
}


@dataclass
class RunConfig:
    configuration: Configuration | None = None
    group: MotionGroup = field(default_factory=MotionGroup)
    window: Window | None = None
    alpha: float | None = None
    tol: float | None = None
    branch_cap: int | None = None
    target: GaussRational | None = None
    triangle: tuple[GaussRational, GaussRational, GaussRational] | None = None


# ---------------------------------------------------------------------------
# parsing


def _locate(text: str, needle: str) -> tuple[int | None, int | None]:
    pos = text.find(needle)
    if pos < 0:
        return None, None
    line = text.count("\n", 0, pos) + 1
    return line, pos - (text.rfind("\n", 0, pos) + 1) + 1


class _Parser:
    def __init__(self, text: str):
        self.text = text

    def fail(self, message: str, key: str, literal: Any = None) -> ParseError:
        line = col = None
        if literal is not None:
            line, col = _locate(self.text, json.dumps(literal) if isinstance(literal, str) else str(literal))
        if line is None:
            line, col = _locate(self.text, key.rsplit(".", 1)[-1])
        return ParseError(message, line, col, key)

    def rational(self, value, key: str) -> Fraction:
        if isinstance(value, bool) or not isinstance(value, (int, str)):
            raise self.fail(f"{key}: rationals are integers or 'p/q' strings", key, value)
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError):
            raise self.fail(f"{key}: malformed rational {value!r}", key, value) from None

    def gauss(self, value, key: str) -> GaussRational:
        if isinstance(value, (int, str)) and not isinstance(value, bool):
            return GaussRational(self.rational(value, key))
        if not isinstance(value, list) or len(value) != 2:
            raise self.fail(f"{key}: expected a [re, im] pair", key)
        return GaussRational(self.rational(value[0], key), self.rational(value[1], key))

    def gauss_list(self, value, key: str) -> list[GaussRational]:
        if not isinstance(value, list):
            raise self.fail(f"{key}: expected an array", key)
        return [self.gauss(v, f"{key}[{i}]") for i, v in enumerate(value)]

    def int_pair(self, value, key: str) -> tuple[int, int]:
        if (not isinstance(value, list) or len(value) != 2
                or not all(isinstance(v, int) and not isinstance(v, bool) for v in value)):
            raise self.fail(f"{key}: expected [lo, hi] integers", key)
        return int(value[0]), int(value[1])


def parse_config(text: str) -> RunConfig:
    """Parse and validate a TOML run configuration."""
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ParseError(str(exc), getattr(exc, "lineno", None), getattr(exc, "colno", None)) from None
    p = _Parser(text)
    for section, body in data.items():
        if section not in SCHEMA:
            raise p.fail(f"unknown section [{section}]", section)
        if not isinstance(body, dict):
            raise p.fail(f"{section} must be a table", section)
        for key in body:
            if key not in SCHEMA[section]:
                raise p.fail(f"unknown key {section}.{key}", f"{section}.{key}")
    cfg = RunConfig()
    conf = data.get("configuration")
    if conf is not None:
        if "points" not in conf:
            raise ValidationError("points_required", "configuration.points is required")
        pts = p.gauss_list(conf["points"], "configuration.points")
        ws = p.gauss_list(conf["weights"], "configuration.weights") if "weights" in conf else []
        try:
            cfg.configuration = Configuration(pts, ws)
        except ValueError as exc:
            raise ValidationError("configuration", str(exc)) from None
    grp = data.get("group", {})
    kind = grp.get("kind", "translations")
    if kind not in KINDS:
        raise p.fail(f"group.kind must be one of {', '.join(KINDS)}", "group.kind", kind)
    quarter = grp.get("quarter_turns", False)
    if not isinstance(quarter, bool):
        raise p.fail("group.quarter_turns must be a boolean", "group.quarter_turns")
    units = p.gauss_list(grp.get("rotation_units", []), "group.rotation_units")
    scales = [p.rational(s, "group.scale_set") for s in grp.get("scale_set", [])]
    try:
        cfg.group = MotionGroup(kind, tuple(units), tuple(scales), quarter)
    except ValueError as exc:
        raise ValidationError("group", str(exc)) from None
    win = data.get("window")
    if win is not None:
        den = win.get("denominator", 1)
        if not isinstance(den, int) or isinstance(den, bool):
            raise p.fail("window.denominator must be an integer", "window.denominator")
        try:
            cfg.window = Window(den, p.int_pair(win.get("x", [0, 0]), "window.x"),
                                p.int_pair(win.get("y", [0, 0]), "window.y"))
        except ValueError as exc:
            raise ValidationError("window", str(exc)) from None
    opts = data.get("options", {})
    for name in ("alpha", "tol"):
        if name in opts:
            val = opts[name]
            if isinstance(val, bool) or not isinstance(val, (int, float)):
                raise p.fail(f"options.{name} must be a number", f"options.{name}")
            setattr(cfg, name, float(val))
    if "branch_cap" in opts:
        cap = opts["branch_cap"]
        if isinstance(cap, bool) or not isinstance(cap, int) or cap < 1:
            raise p.fail("options.branch_cap must be a positive integer", "options.branch_cap")
        cfg.branch_cap = cap
    if "target" in opts:
        cfg.target = p.gauss(opts["target"], "options.target")
    if "triangle" in opts:
        tri = p.gauss_list(opts["triangle"], "options.triangle")
        if len(tri) != 3:
            raise ValidationError("triangle", "options.triangle needs three points")
        cfg.triangle = tuple(tri)
    return cfg


def _pair(z: GaussRational) -> str:
    return f'["{z.re}", "{z.im}"]'


def dump_config(cfg: RunConfig) -> str:
    """Serialize to TOML; parse_config(dump_config(cfg)) reproduces cfg."""
    out = []
    if cfg.configuration is not None:
        c = cfg.configuration
        out.append("[configuration]")
        out.append("points = [" + ", ".join(_pair(z) for z in c.points) + "]")
        out.append("weights = [" + ", ".join(_pair(z) for z in c.weights) + "]")
        out.append("")
    g = cfg.group
    out.append("[group]")
    out.append(f'kind = "{g.kind}"')
    out.append("rotation_units = [" + ", ".join(_pair(u) for u in g.rotation_units) + "]")
    out.append("scale_set = [" + ", ".join(f'"{s}"' for s in g.scale_set) + "]")
    out.append(f"quarter_turns = {'true' if g.quarter_turns else 'false'}")
    out.append("")
    if cfg.window is not None:
        w = cfg.window
        out.append("[window]")
        out.append(f"denominator = {w.denominator}")
        out.append(f"x = [{w.x_range[0]}, {w.x_range[1]}]")
        out.append(f"y = [{w.y_range[0]}, {w.y_range[1]}]")
        out.append("")
    opts = []
    if cfg.alpha is not None:
        opts.append(f"alpha = {cfg.alpha!r}")
    if cfg.tol is not None:
        opts.append(f"tol = {cfg.tol!r}")
    if cfg.branch_cap is not None:
        opts.append(f"branch_cap = {cfg.branch_cap}")
    if cfg.target is not None:
        opts.append(f"target = {_pair(cfg.target)}")
    if cfg.triangle is not None:
        opts.append("triangle = [" + ", ".join(_pair(z) for z in cfg.triangle) + "]")
    if opts:
        out.append("[options]")
        out.extend(opts)
        out.append("")
    return "\n".join(out)


# ---------------------------------------------------------------------------
# commands


class Outputs:
    """Collects artifacts; writes them atomically under ``out`` if given."""

    def __init__(self, out: str | None):
        self.out = out
        self.files: dict[str, str] = {}

    def add(self, name: str, text: str) -> None:
        self.files[name] = text

    def flush(self) -> None:
        if self.out is None:
            return
        import os

        os.makedirs(self.out, exist_ok=True)
        for name, text in sorted(self.files.items()):
            geometry.atomic_write(os.path.join(self.out, name), text)


def to_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _need_config(cfg: RunConfig) -> Configuration:
    if cfg.configuration is None:
        raise ValidationError("configuration_required", "a [configuration] section is required")
    return cfg.configuration


def _need_window(cfg: RunConfig) -> Window:
    if cfg.window is None:
        raise ValidationError("window_required", "a [window] section is required")
    return cfg.window


def _need_weight_sum(c: Configuration) -> None:
    if not c.weight_sum_nonzero:
        raise ValidationError("weight_sum_zero", "the weights must have a nonzero sum")


def _linear_set(c: Configuration) -> zeilberger.LinearSet:
    line = commensurability_check(c.points)
    if line is None:
        raise ValidationError("collinear", "the points are not collinear")
    return zeilberger.LinearSet.normalized(line.positions)


def cmd_check_linear(cfg: RunConfig, args, out: Outputs) -> dict:
    s = _linear_set(_need_config(cfg))
    res = zeilberger.linear_pompeiu_check(s).to_dict()
    res["positions"] = list(s.positions)
    return res


def cmd_witness(cfg: RunConfig, args, out: Outputs) -> dict:
    c = _need_config(cfg)
    if any(p.re.denominator != 1 or p.im.denominator != 1 for p in c.points):
        raise ValidationError("integer_points", "witness points must have integer coordinates")
    planar = any(not p.is_real() for p in c.points)
    pts = [(int(p.re), int(p.im)) if planar else (int(p.re),) for p in c.points]
    w = zeilberger.translation_witness(pts)
    return {"witness": w.to_dict(), "verified": w.verify()}


def _grid(cfg: RunConfig, args, out: Outputs):
    c, w = _need_config(cfg), _need_window(cfg)
    cs = gridlab.assemble_constraints(c, cfg.group, w)
    rep = gridlab.exact_nullspace(cs)
    return c, w, cs, rep


def cmd_grid_rank(cfg: RunConfig, args, out: Outputs) -> dict:
    c, w, cs, rep = _grid(cfg, args, out)
    res = {"rows": cs.n_rows, "columns": len(w), "nullspace": rep.to_dict(w)}
    if cs.n_rows == 0:
        res["warning"] = "no placement fits inside the window; the system is empty"
    for k, vec in enumerate(rep.basis):
        out.add(f"kernel_{k}.csv", gridlab.kernel_csv(vec, w))
    return res


def cmd_delta_cert(cfg: RunConfig, args, out: Outputs) -> dict:
    c, w = _need_config(cfg), _need_window(cfg)
    cs = gridlab.assemble_constraints(c, cfg.group, w)
    target = cfg.target if cfg.target is not None else w.point(0)
    if w.index(target) is None:
        raise ValidationError("target_in_window", "options.target is not a window point")
    cert = gridlab.delta_certificate(cs, target)
    if cert is None:
        return {"target": target.to_strings(), "certificate": None,
                "reason": "the point evaluation is not a combination of the rows"}
    return {"target": target.to_strings(), "certificate": cert.to_dict(), "verified": cert.verify(cs)}


def cmd_degree_test(cfg: RunConfig, args, out: Outputs) -> dict:
    c, w, cs, rep = _grid(cfg, args, out)
    units = cfg.group.rotations()
    tol = args.tol if args.tol is not None else cfg.tol
    results = [gridlab.difference_degree_test(v, c, w, units, tol) for v in rep.basis]
    return {"nullity": rep.nullity, "difference_order": len(c.points) - 1,
            "passed": results, "all_passed": all(results)}


def _branch_cap(cfg: RunConfig, args) -> int:
    if args.branch_cap is not None:
        return args.branch_cap
    return cfg.branch_cap if cfg.branch_cap is not None else spectral.DEFAULT_BRANCH_CAP


def _snf(c: Configuration, cfg: RunConfig, args) -> dict:
    gadget = spectral.direction_gadget(c)
    lattice, disj = spectral.gadget_branches(gadget)
    cert = spectral.snf_triviality_certificate(lattice, disj, _branch_cap(cfg, args))
    res = cert.to_dict()
    res["gadget"] = gadget.to_dict()
    res["gadget_ok"] = gadget.check()
    res["sound"] = cert.verify()
    return res


def cmd_snf_certificate(cfg: RunConfig, args, out: Outputs) -> dict:
    c = _need_config(cfg)
    _need_weight_sum(c)
    return _snf(c, cfg, args)


def _reduction(c: Configuration, out: Outputs) -> tuple[geometry.ReductionChain, dict]:
    chain = geometry.quadrangle_reduction(c)
    res = chain.to_dict()
    res["verified"] = chain.verify()
    out.add("reduction.svg", geometry.scene_svg(geometry.reduction_scene(chain)))
    return chain, res


def cmd_reduce_quadrangle(cfg: RunConfig, args, out: Outputs) -> dict:
    c = _need_config(cfg)
    _need_weight_sum(c)
    return _reduction(c, out)[1]


def cmd_construct_halpha(cfg: RunConfig, args, out: Outputs) -> dict:
    tri = cfg.triangle or (GaussRational(0), GaussRational(4), GaussRational(3, 2))
    alpha = args.alpha if args.alpha is not None else (cfg.alpha if cfg.alpha is not None else 23.0)
    tol = args.tol if args.tol is not None else (cfg.tol if cfg.tol is not None else 1e-9)
    scene = geometry.construct_h_alpha(*(complex(z) for z in tri), alpha)
    report = geometry.verify_h_alpha(scene, tol)
    out.add("halpha.svg", geometry.scene_svg(scene))
    return {"alpha": alpha, "scene": scene.to_dict(), "report": report.to_dict()}


def _hull_ordering(c: Configuration) -> Configuration | None:
    """Reorder so that the reduction preconditions hold, if possible."""
    for perm in permutations(range(4)):
        cand = Configuration([c.points[i] for i in perm], [c.weights[i] for i in perm])
        try:
            geometry.quadrangle_reduction(cand)
        except PositionError as exc:
            if exc.which == "general_position":
                return None
            continue
        return cand
    return None


def cmd_analyze(cfg: RunConfig, args, out: Outputs) -> dict:
    c = _need_config(cfg)
    _need_weight_sum(c)
    if len(c.points) >= 2 and commensurability_check(c.points) is not None:
        res = cmd_check_linear(cfg, args, out)
        return {"pipeline": "collinear-commensurable", "result": res}
    fac = spectral.branch_factorization(c)
    if fac is not None and fac.kind == "parallelogram":
        res = {"a": fac.a.to_strings(), "b": fac.b.to_strings(),
               "expanded": {f"{i},{j}": v for (i, j), v in sorted(fac.expanded().items())},
               "identity_holds": spectral.factorization_identity_holds(c, fac),
               "branches": [{"generator": w.to_strings(), "forced_value": v}
                            for w, v in fac.disjunction()]}
        return {"pipeline": "parallelogram", "result": res}
    if len(c.points) == 4:
        ordered = _hull_ordering(c)
        if ordered is not None:
            chain, red = _reduction(ordered, out)
            res = {"ordered_points": [p.to_strings() for p in ordered.points], "reduction": red}
            if chain.collinear:
                line = chain.step("collinear_case").data["line"]
                res["collinear_positions"] = list(line.positions)
            else:
                square = chain.square_configuration()
                fac = spectral.branch_factorization(square)
                side = rational_sqrt(fac.a.norm2())
                scaled = ordered
                if side is not None:  # unit square relation after rescaling
                    scaled = Configuration([p / side for p in ordered.points], ordered.weights)
                res["square_factorization"] = {"kind": fac.kind, "side": fac.a.to_strings() if side is None
                                               else str(side)}
                res["certificate"] = _snf(scaled, cfg, args)
            return {"pipeline": "rational-quadrangle", "result": res}
    return {"pipeline": "grid", "result": cmd_grid_rank(cfg, args, out)}


COMMANDS = {
    "check-linear": (cmd_check_linear, "decide the linear criterion for a collinear set"),
    "witness": (cmd_witness, "character annihilating all translates of the points"),
    "grid-rank": (cmd_grid_rank, "exact kernel of the placement system on a window"),
    "delta-cert": (cmd_delta_cert, "row combination equal to a point evaluation"),
    "degree-test": (cmd_degree_test, "iterated difference test on kernel vectors"),
    "snf-certificate": (cmd_snf_certificate, "character triviality certificate via Smith form"),
    "reduce-quadrangle": (cmd_reduce_quadrangle, "reflection chain to the square relation"),
    "construct-halpha": (cmd_construct_halpha, "build and check the H_alpha quadrangle"),
    "analyze": (cmd_analyze, "route a configuration to the matching pipeline"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pompeiu", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_fn, help_text) in COMMANDS.items():
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("config", nargs="?" if name == "construct-halpha" else None,
                        help="TOML run configuration")
        sp.add_argument("--out", help="directory for JSON, CSV and SVG artifacts")
        sp.add_argument("--tol", type=float, help="float tolerance")
        sp.add_argument("--branch-cap", type=int, help="maximum number of branch combinations")
        sp.add_argument("--alpha", type=float, help="H_alpha angle in degrees")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    fn = COMMANDS[args.command][0]
    try:
        if args.config:
            with open(args.config, encoding="utf-8") as fh:
                cfg = parse_config(fh.read())
        else:
            cfg = RunConfig()
        out = Outputs(args.out)
        result = fn(cfg, args, out)
        text = to_json({"command": args.command, **result})
        out.add(f"{args.command}.json", text)
        out.flush()
    except BranchCapExceeded as exc:
        sys.stderr.write(to_json(exc.to_dict()))
        return EXIT_CAP
    except PompeiuError as exc:
        sys.stderr.write(to_json(exc.to_dict()))
        return EXIT_INVALID
    except (OSError, ValueError) as exc:
        sys.stderr.write(to_json({"error": type(exc).__name__, "message": str(exc)}))
        return EXIT_INVALID
    sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
