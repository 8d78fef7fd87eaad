"""Command-line front end.

Every command reads JSON specs, writes CSV tables and a JSON report into
``--out`` and prints the report. Reports embed the resolved configuration;
the only run-dependent field is ``metadata.timestamp``. CSV files start
with a ``# config=`` comment line and are byte-identical across runs.

Exit codes: 0 ok, 2 bad input, 3 numerical failure, 4 budget exceeded.
"""

from __future__ import annotations

import argparse
import datetime
import json
import math
import os
import sys
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from . import __version__
from .distribution import DistributionRep, coeff_sweep, regularity_report
from .dyadic import Rectangle
from .funcrep import from_json
from .geometry import (DomainSpec, besov_criterion, box_counts, box_dimension_estimate,
                       build_grid, target_from_json)
from .pairing import integrate_over_domain
from .sewing import (BudgetExceeded, ExponentWarning, NoConvergence, SewingConfig, SewingError,
                     germ_sum, zust_integral)
from .wavelets import build_basis

EXIT_OK, EXIT_INPUT, EXIT_NUMERICAL, EXIT_BUDGET = 0, 2, 3, 4


class InputError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    spec: str | None
    domain: str | None
    out: str
    sewing: SewingConfig
    basis_order: int
    levels: tuple[int, int] | None
    tolerance: float | None
    beta: float | None
    seed: int
    threads: int
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"command": self.command, "spec": self.spec, "domain": self.domain,
                "out": self.out, "sewing": self.sewing.to_json(),
                "basis_order": self.basis_order,
                "levels": list(self.levels) if self.levels else None,
                "tolerance": self.tolerance, "beta": self.beta, "seed": self.seed,
                "threads": self.threads, **self.extra}


def _levels(text: str) -> tuple[int, int]:
    try:
        a, b = (int(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError("levels must read j_min:j_max") from None
    if a < 0 or b < a:
        raise argparse.ArgumentTypeError("levels need 0 <= j_min <= j_max")
    return a, b


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="zustint", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, spec=False, domain=False):
        if spec:
            sp.add_argument("--spec", required=True, help="function spec JSON")
        if domain:
            sp.add_argument("--domain", required=True, help="domain or target JSON")
        sp.add_argument("--out", default=".", help="output directory")
        sp.add_argument("--levels", type=_levels, default=None, help="j_min:j_max")
        sp.add_argument("--basis-order", type=int, default=4)
        sp.add_argument("--tol", type=float, default=None)
        sp.add_argument("--max-level", type=int, default=None)
        sp.add_argument("--threads", type=int, default=1)
        sp.add_argument("--seed", type=int, default=0)
        return sp

    common(sub.add_parser("integrate-rect", help="sewing integral over the rectangle given in --spec"), spec=True)
    common(sub.add_parser("boxdim", help="box counts and dimension slope"), domain=True)
    bc = common(sub.add_parser("besov-check", help="boundary series criterion"), domain=True)
    bc.add_argument("--beta", type=float, required=True)
    common(sub.add_parser("coeffs", help="wavelet coefficients of f dg"), spec=True)
    common(sub.add_parser("integrate-domain", help="pairing integral over a domain"),
           spec=True, domain=True)
    common(sub.add_parser("convergence-study", help="germ sums and gaps per level"), spec=True)
    return p


# ---------------------------------------------------------------------------
# spec loading
# ---------------------------------------------------------------------------

def _read_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None


def load_function_spec(path: str) -> tuple:
    """``(f, [g], rectangle, raw)`` from a spec file.

    The file holds ``{"d": d, "f": {...}, "g": [{...}, ...], "rect": {"a": [...], "b": [...]}}``;
    ``rect`` defaults to the unit cube.
    """
    raw = _read_json(path)
    try:
        d = int(raw["d"])
        f = from_json(raw["f"], d)
        g = [from_json(gi, d) for gi in raw["g"]]
        if len(g) != d:
            raise ValueError(f"need {d} integrators, got {len(g)}")
        rect = raw.get("rect")
        R = Rectangle.unit(d) if rect is None else Rectangle(tuple(rect["a"]), tuple(rect["b"]))
        if R.d != d:
            raise ValueError("rectangle dimension differs from d")
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{path}: {exc}") from None
    return f, g, R, raw


def load_target(path: str):
    raw = _read_json(path)
    try:
        return target_from_json(raw, os.path.dirname(os.path.abspath(path))), raw
    except (KeyError, TypeError, ValueError, OSError) as exc:
        raise InputError(f"{path}: {exc}") from None


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _write_report(cfg: RunConfig, name: str, result: dict) -> dict:
    report = {"config": _clean(cfg.to_json()), "result": _clean(result),
              "metadata": {"timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
                           "version": __version__}}
    os.makedirs(cfg.out, exist_ok=True)
    with open(os.path.join(cfg.out, name), "w") as fh:
        json.dump(report, fh, sort_keys=True, indent=2)
        fh.write("\n")
    return report


def _write_csv(cfg: RunConfig, name: str, body: str) -> None:
    os.makedirs(cfg.out, exist_ok=True)
    header = "# config=" + json.dumps(_clean(cfg.to_json()), sort_keys=True) + "\n"
    with open(os.path.join(cfg.out, name), "w") as fh:
        fh.write(header + body)


def _table(header: list, rows: list) -> str:
    lines = [",".join(header)]
    for r in rows:
        lines.append(",".join(repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)
                              for v in r))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_integrate_rect(cfg: RunConfig) -> tuple[int, dict]:
    f, g, R, _ = load_function_spec(cfg.spec)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ExponentWarning)
        try:
            res = zust_integral(f, g, R, cfg.sewing)
        except NoConvergence as exc:
            out = {"error": "no-convergence", "message": str(exc)}
            if exc.result is not None:
                out["partial"] = exc.result.to_json()
            return EXIT_NUMERICAL, _write_report(cfg, "integral.json", out)
    out = res.to_json()
    out["warnings"] = sorted(set(out["warnings"]) | {str(w.message) for w in caught})
    return EXIT_OK, _write_report(cfg, "integral.json", out)


def _counts_for(target, levels: range):
    """Exact counts for analytic targets, grid Lebesgue-boundary counts otherwise."""
    if isinstance(target, DomainSpec) and target.boundary_target() is None:
        return box_counts(build_grid(target, levels[-1]), levels)
    return box_counts(target, levels)


def cmd_boxdim(cfg: RunConfig) -> tuple[int, dict]:
    target, _ = load_target(cfg.domain)
    j0, j1 = cfg.levels or (1, 8)
    counts = _counts_for(target, range(j0, j1 + 1))
    _write_csv(cfg, "boxcounts.csv", counts.to_csv())
    try:
        slope = box_dimension_estimate(counts, j0, j1)
    except ValueError as exc:
        return EXIT_NUMERICAL, _write_report(cfg, "boxdim.json",
                                             {"error": "insufficient-levels", "message": str(exc),
                                              **counts.to_json()})
    return EXIT_OK, _write_report(cfg, "boxdim.json", {"dimension": slope, **counts.to_json()})


def cmd_besov_check(cfg: RunConfig) -> tuple[int, dict]:
    target, _ = load_target(cfg.domain)
    j0, j1 = cfg.levels or (1, 8)
    counts = _counts_for(target, range(j0, j1 + 1))
    chk = besov_criterion(counts, cfg.beta, j1)
    rows = [(j, counts.table[j], t, s) for j, t, s in zip(counts.levels, chk.terms, chk.partial_sums)]
    _write_csv(cfg, "besov.csv", _table(["j", "N_j", "term", "partial_sum"], rows))
    return EXIT_OK, _write_report(cfg, "besov.json", {**chk.to_json(), **counts.to_json()})


def _distribution(cfg: RunConfig) -> tuple[DistributionRep, Rectangle]:
    f, g, R, _ = load_function_spec(cfg.spec)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ExponentWarning)
        D = DistributionRep(f, g, build_basis(cfg.basis_order), cfg.sewing,
                            **({"tolerance": cfg.tolerance} if cfg.tolerance else {}))
    return D, R


def cmd_coeffs(cfg: RunConfig) -> tuple[int, dict]:
    D, R = _distribution(cfg)
    j0, j1 = cfg.levels or (0, 4)
    C = coeff_sweep(D, j1, R)
    _write_csv(cfg, "coeffs.csv", C.to_csv())
    out = {"header": C.header(), "gaps": C.meta.get("gaps"),
           "lattice_level": C.meta.get("lattice_level"), "warnings": list(D.warnings)}
    if j1 - max(j0, 0) >= 2 and not all(C.max_abs(j) == 0 for j in range(j0, j1 + 1)):
        try:
            out["regularity"] = regularity_report(C, j0, j1)
        except ValueError as exc:
            out["regularity"] = {"error": str(exc)}
    code = EXIT_OK if C.complete else EXIT_BUDGET
    return code, _write_report(cfg, "coeffs.json", out)


def cmd_integrate_domain(cfg: RunConfig) -> tuple[int, dict]:
    D, _ = _distribution(cfg)
    target, _ = load_target(cfg.domain)
    if not isinstance(target, DomainSpec):
        raise InputError("integrate-domain needs a domain, not a bare target")
    J = (cfg.levels or (0, 5))[1]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = integrate_over_domain(D, target, J)
    out = res.to_json()
    out["besov"] = res.meta.get("besov")
    return EXIT_OK, _write_report(cfg, "pairing.json", out)


def cmd_convergence_study(cfg: RunConfig) -> tuple[int, dict]:
    f, g, R, _ = load_function_spec(cfg.spec)
    j0, j1 = cfg.levels or (1, 8)
    rows, prev = [], None
    for J in range(j0, j1 + 1):
        cells = 2 ** (J * R.d)
        if cells > cfg.sewing.memo_capacity:
            _write_csv(cfg, "convergence.csv", _table(["J", "value", "gap"], rows))
            return EXIT_BUDGET, _write_report(cfg, "convergence.json",
                                              {"error": "budget-exceeded", "rows": rows})
        v = germ_sum(f, g, R, J, cfg.sewing.face_level_offset)
        rows.append((J, v, "" if prev is None else abs(v - prev)))
        prev = v
    _write_csv(cfg, "convergence.csv", _table(["J", "value", "gap"], rows))
    gaps = [(J, gp) for J, _, gp in rows if gp != "" and gp > 0]
    out = {"rows": [{"J": J, "value": v, "gap": gp if gp != "" else None} for J, v, gp in rows]}
    if len(gaps) >= 2:
        js, gs = zip(*gaps)
        out["gap_slope"] = float(np.polyfit(js, np.log2(gs), 1)[0])
    return EXIT_OK, _write_report(cfg, "convergence.json", out)


COMMANDS = {"integrate-rect": cmd_integrate_rect, "boxdim": cmd_boxdim,
            "besov-check": cmd_besov_check, "coeffs": cmd_coeffs,
            "integrate-domain": cmd_integrate_domain,
            "convergence-study": cmd_convergence_study}


def resolve_config(args: argparse.Namespace) -> RunConfig:
    overrides = {"max_level": args.max_level, "tolerance": args.tol}
    sewing = replace(SewingConfig(), **{k: v for k, v in overrides.items() if v is not None})

    def absolute(p):
        return None if p is None else os.path.abspath(p)

    return RunConfig(args.command, absolute(getattr(args, "spec", None)),
                     absolute(getattr(args, "domain", None)), os.path.abspath(args.out), sewing,
                     args.basis_order, args.levels, args.tol, getattr(args, "beta", None),
                     args.seed, args.threads)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    cfg = resolve_config(args)
    np.random.seed(cfg.seed)
    try:
        code, report = COMMANDS[cfg.command](cfg)
    except InputError as exc:
        print(json.dumps({"error": "bad-input", "message": str(exc)}), file=sys.stderr)
        return EXIT_INPUT
    except BudgetExceeded as exc:
        print(json.dumps({"error": "budget-exceeded", "message": str(exc)}), file=sys.stderr)
        return EXIT_BUDGET
    except SewingError as exc:
        print(json.dumps({"error": "numerical", "message": str(exc)}), file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, KeyError) as exc:
        print(json.dumps({"error": "bad-input", "message": str(exc)}), file=sys.stderr)
        return EXIT_INPUT
    print(json.dumps(report["result"], sort_keys=True, indent=2))
    return code


if __name__ == "__main__":
    sys.exit(main())
