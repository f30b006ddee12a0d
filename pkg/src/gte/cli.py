"""Command-line entry point.

Subcommands: ``sample`` (ensemble draws as newline-delimited tensor JSON),
``act`` (apply a group element to tensors), ``invariant`` (evaluate trace
invariants, CSV for batches), ``graphs`` (emit or check trace graphs),
``identity`` (the identity tensor), and ``verify`` (the statistical suites).

Exit codes: 0 success or verification pass, 1 verification/computation
failure, 2 usage or input errors.  Every randomized subcommand takes an
explicit ``--seed``, and identical argv produce byte-identical output.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import __version__, FORMAT_VERSION
from .ensembles import EnsembleSpec, sample_batch
from .groups import act, flavor_for_class, haar_sample
from .harness import (
    derivative_identity_test,
    gaussianity_independence_test,
    invariance_test,
    isotropy_test,
    report_to_dict,
)
from .invariants import (
    TraceGraph,
    bouquet_graph,
    enumerate_rank2,
    evaluate,
    melon_graph,
    validate,
)
from .serialize import (
    dumps_graph,
    dumps_tensor,
    load_graph,
    load_matrix,
    loads_graph,
    loads_tensor,
    save_tensor,
)
from .tensor import ClassViolationError, identity_tensor

#: melon/bouquet matching convention per tensor class
_CONVENTION = {"sym": "real", "antisym": "real",
               "herm": "hermitian", "selfdual": "selfdual"}


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="gte",
        description="Gaussian tensor ensembles, group actions, trace invariants.",
    )
    top.add_argument("--version", action="version",
                     version=f"gte {__version__} (format {FORMAT_VERSION})")
    sub = top.add_subparsers(dest="cmd", required=True)

    def add_threads(p):
        p.add_argument("--threads", type=int, default=0, metavar="INT",
                       help="worker cap; 1 forces serial (output is identical "
                            "either way)")

    p = sub.add_parser("sample", help="draw ensemble tensors (NDJSON)")
    p.add_argument("--kind", required=True, choices=["gote", "gute", "gste"])
    p.add_argument("--p", required=True, type=int)
    p.add_argument("--dim", required=True, type=int, metavar="N")
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", required=True, type=int)
    p.add_argument("--out", metavar="PATH")
    add_threads(p)

    p = sub.add_parser("act", help="apply a group element to tensors")
    p.add_argument("--tensor", required=True, metavar="PATH")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--matrix", metavar="PATH")
    src.add_argument("--haar", action="store_true",
                     help="draw a fresh Haar element per input tensor")
    p.add_argument("--seed", type=int, help="required with --haar")
    p.add_argument("--out", metavar="PATH")
    add_threads(p)

    p = sub.add_parser("invariant", help="evaluate trace invariants")
    which = p.add_mutually_exclusive_group(required=True)
    which.add_argument("--graph", metavar="PATH")
    which.add_argument("--melon", action="store_true")
    which.add_argument("--bouquet", action="store_true")
    which.add_argument("--rank2", action="store_true",
                       help="the whole two-vertex family")
    p.add_argument("--tensor", required=True, metavar="PATH")
    p.add_argument("--out", metavar="PATH")
    add_threads(p)

    p = sub.add_parser("graphs", help="emit or check trace graphs")
    p.add_argument("--p", type=int)
    p.add_argument("--flavor", choices=["real", "parity"], default="real")
    which = p.add_mutually_exclusive_group(required=True)
    which.add_argument("--melon", action="store_true")
    which.add_argument("--bouquet", action="store_true")
    which.add_argument("--rank2", action="store_true")
    which.add_argument("--check", metavar="PATH",
                       help="validate a graph file instead of emitting")
    p.add_argument("--out", metavar="PATH")
    add_threads(p)

    p = sub.add_parser("identity", help="write the identity tensor")
    p.add_argument("--p", required=True, type=int)
    p.add_argument("--dim", required=True, type=int, metavar="N")
    p.add_argument("--out", metavar="PATH")
    add_threads(p)

    p = sub.add_parser("verify", help="run a statistical verification suite")
    p.add_argument("--suite", required=True,
                   choices=["invariance", "gaussianity", "derivative", "isotropy"])
    p.add_argument("--kind", choices=["gote", "gute", "gste"], default="gote")
    p.add_argument("--p", type=int, default=2)
    p.add_argument("--dim", type=int, default=2, metavar="N")
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--samples", type=int, default=None,
                   help="sample count (default 5000; 100 trials for derivative)")
    p.add_argument("--seed", required=True, type=int)
    p.add_argument("--json", action="store_true", dest="as_json")
    p.add_argument("--centered", action="store_true",
                   help="isotropy only: subtract the fitted identity component "
                        "first (exploratory; always exits 0)")
    add_threads(p)
    return top


def _write(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _read_tensors(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            lines = [ln for ln in fh.read().splitlines() if ln.strip()]
        return [loads_tensor(ln) for ln in lines]
    except OSError as e:
        raise _InputError(f"cannot read tensor file {path}: {e.strerror}")
    except (ValueError, KeyError, TypeError) as e:
        raise _InputError(f"bad tensor file {path}: {e}")


class _InputError(Exception):
    pass


def _fmt(x) -> str:
    """Full double-precision decimal."""
    return repr(float(x))


def _cmd_sample(args) -> int:
    spec = EnsembleSpec(args.kind, args.p, args.dim, beta=args.beta,
                        gamma=args.gamma, seed=args.seed)
    lines = [dumps_tensor(t) for t in sample_batch(spec, args.count)]
    _write("".join(ln + "\n" for ln in lines), args.out)
    return 0


def _cmd_act(args) -> int:
    tensors = _read_tensors(args.tensor)
    if args.haar and args.seed is None:
        raise _UsageError("--haar requires --seed")
    g_fixed = None
    if args.matrix:
        try:
            g_fixed = load_matrix(args.matrix)
        except OSError as e:
            raise _InputError(f"cannot read matrix file {args.matrix}: {e.strerror}")
        except (ValueError, KeyError, TypeError) as e:
            raise _InputError(f"bad matrix file {args.matrix}: {e}")
    out_lines = []
    for i, t in enumerate(tensors):
        if g_fixed is not None:
            g = g_fixed
        else:
            rng = np.random.default_rng(np.random.SeedSequence((args.seed, i)))
            g = haar_sample(flavor_for_class(t.class_tag), t.N, rng)
        out_lines.append(dumps_tensor(act(g, t)))
    _write("".join(ln + "\n" for ln in out_lines), args.out)
    return 0


def _graphs_for(args, t) -> list[tuple[str, TraceGraph]]:
    conv = _CONVENTION[t.class_tag]
    flavor = "real" if conv == "real" else "parity"
    if args.graph:
        try:
            g = load_graph(args.graph)
        except OSError as e:
            raise _InputError(f"cannot read graph file {args.graph}: {e.strerror}")
        except (ValueError, KeyError, TypeError) as e:
            raise _InputError(f"bad graph file {args.graph}: {e}")
        return [("graph", g)]
    if args.melon:
        return [("melon", melon_graph(t.p, conv))]
    if args.bouquet:
        return [("bouquet", bouquet_graph(t.p, flavor))]
    fam = enumerate_rank2(t.p, flavor)
    return [(f"rank2[r={_cross_edges(g)}]", g) for g in fam]


def _cross_edges(g: TraceGraph) -> int:
    return sum(1 for (a, b) in g.edges if a[0] != b[0])


def _cmd_invariant(args) -> int:
    tensors = _read_tensors(args.tensor)
    if not tensors:
        raise _InputError(f"bad tensor file {args.tensor}: no tensors")
    graphs = _graphs_for(args, tensors[0])
    table = [[evaluate(g, t) for _, g in graphs] for t in tensors]
    if len(tensors) == 1 and len(graphs) == 1:
        v = table[0][0]
        text = _fmt(v) if not isinstance(v, complex) \
            else f"{_fmt(v.real)} {_fmt(v.imag)}"
        _write(text + "\n", args.out)
        return 0
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    complex_any = any(isinstance(v, complex) for row in table for v in row)
    header = ["index"]
    for name, _ in graphs:
        header += [f"{name}.re", f"{name}.im"] if complex_any else [name]
    writer.writerow(header)
    for i, row in enumerate(table):
        cells = [str(i)]
        for v in row:
            if complex_any:
                c = complex(v)
                cells += [_fmt(c.real), _fmt(c.imag)]
            else:
                cells.append(_fmt(v))
        writer.writerow(cells)
    _write(buf.getvalue(), args.out)
    return 0


def _cmd_graphs(args) -> int:
    if args.check:
        # the emit side writes one graph per line; check every line
        try:
            with open(args.check, encoding="utf-8") as fh:
                lines = [ln for ln in fh.read().splitlines() if ln.strip()]
        except OSError as e:
            raise _InputError(f"cannot read graph file {args.check}: {e.strerror}")
        if not lines:
            raise _InputError(f"bad graph file {args.check}: no graphs")
        problems = []
        for i, ln in enumerate(lines, start=1):
            try:
                gs = loads_graph(ln)
            except (ValueError, KeyError, TypeError) as e:
                raise _InputError(f"bad graph file {args.check}: line {i}: {e}")
            prefix = f"line {i}: " if len(lines) > 1 else ""
            problems += [prefix + p for p in validate(gs)]
        if problems:
            _write("".join(p + "\n" for p in problems), args.out)
            return 1
        _write("ok\n", args.out)
        return 0
    if args.p is None:
        raise _UsageError("--p is required unless --check is given")
    conv = {"real": "real", "parity": "hermitian"}[args.flavor]
    if args.melon:
        gs = [melon_graph(args.p, conv)]
    elif args.bouquet:
        gs = [bouquet_graph(args.p, args.flavor)]
    else:
        gs = enumerate_rank2(args.p, args.flavor)
    _write("".join(dumps_graph(g) + "\n" for g in gs), args.out)
    return 0


def _cmd_identity(args) -> int:
    t = identity_tensor(args.p, args.dim)
    if args.out:
        save_tensor(t, args.out)
    else:
        sys.stdout.write(dumps_tensor(t) + "\n")
    return 0


def _cmd_verify(args) -> int:
    n = args.samples
    if args.suite == "derivative":
        report = derivative_identity_test(n_trials=n if n is not None else 100,
                                          seed=args.seed)
    else:
        spec = EnsembleSpec(args.kind, args.p, args.dim, beta=args.beta,
                            gamma=args.gamma, seed=args.seed)
        n = n if n is not None else 5000
        if args.suite == "invariance":
            report = invariance_test(spec, n_samples=n, seed=args.seed)
        elif args.suite == "gaussianity":
            report = gaussianity_independence_test(spec, n_samples=n,
                                                   seed=args.seed)
        else:
            report = isotropy_test(spec, n_samples=n, seed=args.seed,
                                   center=args.centered)
    if args.as_json:
        sys.stdout.write(json.dumps(report_to_dict(report),
                                    separators=(", ", ": ")) + "\n")
    else:
        head = (f"{report.test}: {'PASS' if report.passed else 'FAIL'} "
                f"statistic={_fmt(report.statistic)} "
                f"threshold={_fmt(report.threshold)} "
                f"n={report.n_samples} seed={report.seed}")
        if report.p_value is not None:
            head += f" min_p={_fmt(report.p_value)}"
        lines = [head]
        lines += [f"  failed: {s.name} statistic={_fmt(s.statistic)}"
                  for s in report.subtests if not s.passed]
        sys.stdout.write("".join(ln + "\n" for ln in lines))
    if args.suite == "isotropy" and args.centered:
        return 0  # exploratory: reported without pass/fail semantics
    return 0 if report.passed else 1


class _UsageError(Exception):
    pass


def run(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.threads < 0:
        parser.error("--threads must be nonnegative")
    handler = {
        "sample": _cmd_sample,
        "act": _cmd_act,
        "invariant": _cmd_invariant,
        "graphs": _cmd_graphs,
        "identity": _cmd_identity,
        "verify": _cmd_verify,
    }[args.cmd]
    try:
        return handler(args)
    except _UsageError as e:
        parser.error(str(e))  # exits 2
    except _InputError as e:
        print(f"gte: {e}", file=sys.stderr)
        return 2
    except ClassViolationError as e:
        print(f"gte: {e}", file=sys.stderr)
        return 1
    except (ValueError, KeyError) as e:
        print(f"gte: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        path = getattr(e, "filename", None)
        print(f"gte: cannot write {path}: {e.strerror}" if path
              else f"gte: {e}", file=sys.stderr)
        return 2


def main(argv=None) -> int:
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
