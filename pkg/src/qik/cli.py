"""Command-line front end.

Three subcommands: ``classify`` (stratum labels for solved configurations),
``solve`` (flow to the real moment equations), ``nahm`` (integrate a matrix
flow, fit its tail, optionally plot).  Inputs and outputs are JSON (complex
numbers as [re, im] pairs); ``--format csv`` emits flat report rows instead.

Exit codes: 0 success, 1 malformed input, 2 precondition rejection
(residual gate), 3 inconclusive or diverging.  Identical inputs, flags and
seeds produce byte-identical JSON/CSV output.  ``QIK_LOG`` sets the log
level.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .errors import QikError, RegularityError
from .nahm import (NahmSolution, bielawski_norm, fit_asymptotics, integrate,
                   nahm_from_json, nahm_residual, nahm_to_json)
from .quiver import Quiver, moment_value, quiver_from_json, quiver_to_json
from .solver import flow_report_to_json, kempf_ness_flow
from .strata import classify, label_to_json

log = logging.getLogger("qik")

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_PRECONDITION = 2
EXIT_INCONCLUSIVE = 3


def _setup_logging():
    level = os.environ.get("QIK_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _load_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _dump(obj, path, fmt, csv_rows=None):
    if fmt == "csv":
        lines = [",".join(str(x) for x in row) for row in csv_rows]
        text = "\n".join(lines) + "\n"
    else:
        text = json.dumps(obj, sort_keys=True, indent=2) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _quiver_items(payload):
    """A payload is either one quiver object or an array of them."""
    if isinstance(payload, list):
        return [quiver_from_json(item) for item in payload], True
    return [quiver_from_json(payload)], False


def _pool_map(fn, items):
    if len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(8, len(items))) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# classify


def cmd_classify(args) -> int:
    try:
        payload = _load_json(args.input)
        quivers, is_array = _quiver_items(payload)
    except (OSError, ValueError, KeyError, QikError) as exc:
        log.error("bad input: %s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    def one(q):
        try:
            res = classify(q, tol=args.tol, seed=args.seed)
            out = {
                "status": "ok",
                "label": label_to_json(res.label),
                "levelMargin": res.level_margin,
                "eigenMargin": res.eigen_margin,
                "residual": res.residual,
                "rotation": [res.rotation.a.real, res.rotation.a.imag,
                             res.rotation.b.real, res.rotation.b.imag],
                "jordanCrosscheck": res.jordan_crosscheck,
            }
            return out, EXIT_OK
        except RegularityError as exc:
            return {"status": "rejected", "reason": str(exc)}, EXIT_PRECONDITION
        except QikError as exc:
            return {"status": "inconclusive", "reason": str(exc)}, \
                EXIT_INCONCLUSIVE

    results = _pool_map(one, quivers)
    outs = [r[0] for r in results]
    code = max(r[1] for r in results)
    rows = [["index", "status", "sim", "S", "delta", "m", "ell"]]
    for i, o in enumerate(outs):
        if o["status"] == "ok":
            lab = o["label"]
            rows.append([i, o["status"],
                         ";".join("".join(map(str, c)) for c in lab["sim"]),
                         ";".join(f"{p[0]}-{p[1]}" for p in lab["S"]),
                         ";".join(map(str, lab["delta"])),
                         ";".join(map(str, lab["m"])), lab["ell"]])
        else:
            rows.append([i, o["status"], "", "", "", "", ""])
    _dump(outs if is_array else outs[0], args.output, args.format, rows)
    return code


# ---------------------------------------------------------------------------
# solve


def cmd_solve(args) -> int:
    try:
        payload = _load_json(args.input)
        quivers, is_array = _quiver_items(payload)
    except (OSError, ValueError, KeyError, QikError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    def one(q):
        try:
            q_out, report = kempf_ness_flow(q, target=None, tol=args.tol,
                                            max_iter=args.max_iter)
            code = EXIT_OK if report.verdict == "converged" \
                else EXIT_INCONCLUSIVE
            return {
                "status": report.verdict,
                "quiver": quiver_to_json(q_out),
                "report": flow_report_to_json(report),
            }, code
        except QikError as exc:
            return {"status": "rejected", "reason": str(exc)}, \
                EXIT_PRECONDITION

    results = _pool_map(one, quivers)
    outs = [r[0] for r in results]
    code = max(r[1] for r in results)
    rows = [["index", "status", "iterations", "finalResidual"]]
    for i, o in enumerate(outs):
        rep = o.get("report", {})
        rows.append([i, o["status"], rep.get("iterations", ""),
                     rep.get("finalResidual", "")])
    _dump(outs if is_array else outs[0], args.output, args.format, rows)
    return code


# ---------------------------------------------------------------------------
# nahm


def _initial_from_json(obj):
    mats = []
    for key in ("t0", "t1", "t2", "t3"):
        rows = obj[key]
        mats.append(np.array([[complex(x[0], x[1]) for x in row]
                              for row in rows], dtype=complex))
    return np.stack(mats)


def cmd_nahm(args) -> int:
    try:
        payload = _load_json(args.input)
        init = _initial_from_json(payload)
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        sol = integrate(init, interval=(0.0, args.tmax), step=args.step)
        out = {
            "solution": nahm_to_json(sol),
            "residual": nahm_residual(sol),
            "truncated": sol.truncated,
        }
        code = EXIT_OK
        if sol.truncated:
            code = EXIT_INCONCLUSIVE
        else:
            fit = fit_asymptotics(sol)
            out["asymptotics"] = {
                "tau": _mats_json(fit.tau),
                "sigma": _mats_json(fit.sigma),
                "fitResidual": fit.fit_residual,
                "commutingResidual": fit.commuting_residual,
                "su2Residual": fit.su2_residual,
                "mixedResidual": fit.mixed_residual,
            }
            if args.tangent:
                tangent = nahm_from_json(_load_json(args.tangent))
                value, convergent, slope = bielawski_norm(sol, tangent,
                                                          c=args.c)
                out["bielawski"] = {"value": value, "convergent": convergent,
                                    "tailSlope": slope}
        if args.plot:
            _plot_traces(sol, args.plot)
        rows = [["t"] + [f"normT{i}" for i in range(4)]]
        for m, t in enumerate(sol.ts):
            if m % max(1, len(sol.ts) // 500) == 0:
                rows.append([t] + [float(np.linalg.norm(sol.values[m, i]))
                                   for i in range(4)])
        _dump(out, args.output, args.format, rows)
        return code
    except QikError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION


def _mats_json(mats):
    return [[[[float(x.real), float(x.imag)] for x in row] for row in m]
            for m in mats]


def _plot_traces(sol: NahmSolution, path: str) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 4))
    for i in range(4):
        norms = [float(np.linalg.norm(sol.values[m, i]))
                 for m in range(len(sol.ts))]
        ax.plot(sol.ts, norms, label=f"|T{i}|")
    ax.set_xlabel("t")
    ax.set_ylabel("Frobenius norm")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="qik",
        description="quiver toolkit: moment maps, stratum labels, matrix "
                    "flows")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--input", "-i", required=True)
        sp.add_argument("--output", "-o", default="-")
        sp.add_argument("--tol", type=float, default=1e-7)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--format", choices=("json", "csv"), default="json")

    sp = sub.add_parser("classify", help="stratum label of solved "
                                         "configurations")
    common(sp)
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("solve", help="flow to the real moment equations")
    common(sp)
    sp.add_argument("--max-iter", type=int, default=5000)
    sp.set_defaults(func=cmd_solve, tol=1e-8)

    sp = sub.add_parser("nahm", help="integrate a matrix flow and fit its "
                                     "tail")
    common(sp)
    sp.add_argument("--tmax", type=float, default=50.0)
    sp.add_argument("--step", type=float, default=1e-3)
    sp.add_argument("--c", type=float, default=1.0,
                    help="boundary weight of the regularised pairing")
    sp.add_argument("--samples", type=int, default=32,
                    help="stability sampling count (reserved)")
    sp.add_argument("--tangent", default=None,
                    help="tangent-field JSON for the regularised pairing")
    sp.add_argument("--plot", default=None,
                    help="write a PNG/SVG of the component norms")
    sp.set_defaults(func=cmd_nahm)
    return p


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
