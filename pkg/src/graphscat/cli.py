"""Command-line entry point: ``graphscat <subcommand> ...``.

Subcommands
-----------
features     scattering coefficients of one signal
frame-check  frame bounds and partition-of-unity diagnostics, optional dump
stability    alignment metrics and stability bounds for two graphs
verify       randomized verification suite, writes a certificate
spectra      eigenvalues of N and T and the spectral gap

Usage errors (bad options, unreadable inputs) exit with status 2; ``verify``
exits with 1 when any check fails.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import GraphScatError, UsageError
from .graph_core import SpectralFunction, WeightMatrix, diffusion_system, weighted_norm
from .harness import TrialSpec, run_suite
from .io import dumps_csv, dumps_json, read_edge_list, read_g_table, read_matrix, read_signal, write_output
from .scattering import DEFAULT_J, DEFAULT_LAYERS, ScatteringConfig, scatter
from .stability import GraphPair, stability_report
from .wavelets import KINDS, FilterBank, apply_frame, build_frame, frame_bounds, lower_bound_constant

M_ALIASES = {"identity": "identity", "dsqrt": "d_sqrt", "dinvsqrt": "d_inv_sqrt"}


@dataclass
class CliConfig:
    subcommand: str
    inputs: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _layers(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(v) for v in text.split(":"))
    except ValueError:
        raise UsageError(f"--layers expects 'l:L' with integers, got {text!r}") from None
    if not 0 <= lo <= hi:
        raise UsageError(f"--layers {text}: need 0 <= l <= L")
    return lo, hi


def _file_option(value: str, prefix: str) -> Optional[str]:
    return value[len(prefix):] if value.startswith(prefix) else None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="graphscat", description="Asymmetric graph wavelets and scattering transforms.")
    sub = p.add_subparsers(dest="subcommand", parser_class=_Parser)
    sub.required = True

    def graph_opts(sp, name="--graph"):
        sp.add_argument(name, required=True, help="edge list 'u v [w]' per line")
        sp.add_argument("--one-based", action="store_true", help="vertex ids start at 1")

    def operator_opts(sp):
        sp.add_argument("--M", default="identity", help="identity|dsqrt|dinvsqrt|file:PATH")
        sp.add_argument("--g", default="gstar", help="gstar|table:PATH|expr:EXPRESSION")
        sp.add_argument("--J", type=int, default=DEFAULT_J)
        sp.add_argument("--kind", choices=KINDS, default="poly")

    f = sub.add_parser("features", help="scattering coefficients of a signal")
    graph_opts(f)
    operator_opts(f)
    f.add_argument("--signal", required=True)
    f.add_argument("--layers", default=f"{DEFAULT_LAYERS[0]}:{DEFAULT_LAYERS[1]}")
    f.add_argument("--mu", default="u0", help="u0|ones|file:PATH")
    f.add_argument("--budget", type=int, default=200_000, help="maximum number of paths")
    f.add_argument("--out")
    f.add_argument("--format", choices=("json", "csv"), default="json")
    f.add_argument("--csv-part", choices=("nonwindowed", "windowed"), default="nonwindowed")

    fc = sub.add_parser("frame-check", help="frame bounds of W on a graph")
    graph_opts(fc)
    operator_opts(fc)
    fc.add_argument("--dump", help="write the filter matrices here")
    fc.add_argument("--format", choices=("json", "csv"), default="json")
    fc.add_argument("--seed", type=int, default=0)

    s = sub.add_parser("stability", help="stability bounds between two graphs")
    s.add_argument("--graph-a", required=True)
    s.add_argument("--graph-b", required=True)
    s.add_argument("--one-based", action="store_true")
    operator_opts(s)
    s.add_argument("--M-b", help="weight matrix of the second graph (defaults to --M)")
    s.add_argument("--layers", default=f"{DEFAULT_LAYERS[0]}:{DEFAULT_LAYERS[1]}")
    s.add_argument("--signal")
    s.add_argument("--mu", default="u0", choices=("u0", "ones"))
    s.add_argument("--perm", default="identity", help="identity|search|file:PATH")
    s.add_argument("--seed", type=int, default=0, help="seed for the default random signal")
    s.add_argument("--out")
    s.add_argument("--format", choices=("json", "csv"), default="json")

    v = sub.add_parser("verify", help="run the randomized verification suite")
    v.add_argument("--seed", type=int, default=1)
    v.add_argument("--trials", type=int, default=100)
    v.add_argument("--out")
    v.add_argument("--format", choices=("json", "csv"), default="json")

    sp = sub.add_parser("spectra", help="eigenvalues of N and T")
    graph_opts(sp)
    sp.add_argument("--g", default="gstar")
    return p


def _check_readable(*paths: Optional[str]) -> None:
    for path in paths:
        if path is not None and not Path(path).is_file():
            raise UsageError(f"cannot read input file: {path}")


def parse_cli(argv: Sequence[str]) -> CliConfig:
    """Validate the command line; every input file must exist before any work starts."""
    args = build_parser().parse_args(list(argv))
    opts = vars(args).copy()
    cmd = opts.pop("subcommand")
    inputs = {}
    for key in ("graph", "graph_a", "graph_b", "signal"):
        if opts.get(key) is not None:
            inputs[key] = opts.pop(key)
    for key, prefix in (("M", "file:"), ("M_b", "file:"), ("g", "table:"), ("mu", "file:"), ("perm", "file:")):
        value = opts.get(key)
        if isinstance(value, str):
            path = _file_option(value, prefix)
            if path is not None:
                inputs[key] = path
            elif key in ("M", "M_b") and value not in M_ALIASES:
                raise UsageError(f"--{key.replace('_', '-')} must be identity, dsqrt, dinvsqrt or file:PATH, got {value!r}")
            elif key == "g" and value != "gstar" and not value.startswith("expr:"):
                raise UsageError(f"--g must be gstar, table:PATH or expr:EXPRESSION, got {value!r}")
            elif key == "mu" and value not in ("u0", "ones"):
                raise UsageError(f"--mu must be u0, ones or file:PATH, got {value!r}")
            elif key == "perm" and value not in ("identity", "search"):
                raise UsageError(f"--perm must be identity, search or file:PATH, got {value!r}")
    if "layers" in opts:
        opts["layers"] = _layers(opts["layers"])
    if "J" in opts and opts["J"] < 0:
        raise UsageError("--J must be >= 0")
    if cmd == "verify" and opts["trials"] < 0:
        raise UsageError("--trials must be >= 0")
    _check_readable(*inputs.values())
    return CliConfig(cmd, inputs, opts)


# ---------------------------------------------------------------------------
# helpers turning options into objects
# ---------------------------------------------------------------------------


def _spectral_function(cfg: CliConfig) -> SpectralFunction:
    if "g" in cfg.inputs:
        return read_g_table(cfg.inputs["g"])
    g = cfg.options.get("g", "gstar")
    if g.startswith("expr:"):
        return SpectralFunction.from_expression(g[len("expr:"):])
    return SpectralFunction.g_star()


def _weight(cfg: CliConfig, graph, key: str = "M") -> WeightMatrix:
    if key in cfg.inputs:
        M = read_matrix(cfg.inputs[key])
        if M.shape != (graph.n, graph.n):
            raise UsageError(f"{cfg.inputs[key]}: weight matrix is {M.shape}, graph has {graph.n} vertices")
        return WeightMatrix.custom(M)
    return WeightMatrix.of_kind(M_ALIASES[cfg.options[key]], graph)


def _system(cfg: CliConfig, graph_key: str = "graph", M_key: str = "M"):
    graph = read_edge_list(cfg.inputs[graph_key], one_based=cfg.options.get("one_based", False))
    return diffusion_system(graph, _weight(cfg, graph, M_key), _spectral_function(cfg))


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_features(cfg: CliConfig) -> int:
    o = cfg.options
    sys_ = _system(cfg)
    x = read_signal(cfg.inputs["signal"], sys_.n)
    mu = read_signal(cfg.inputs["mu"], sys_.n) if "mu" in cfg.inputs else o["mu"]
    frame = build_frame(sys_, o["J"], o["kind"])
    lo, hi = o["layers"]
    out = scatter(ScatteringConfig(frame, lo, hi, mu=mu, budget=o["budget"]), x)
    out.metadata["g"] = sys_.g.tag
    text = dumps_json(out) if o["format"] == "json" else dumps_csv(out, o["csv_part"])
    _emit(text, o.get("out"))
    return 0


def cmd_frame_check(cfg: CliConfig) -> int:
    o = cfg.options
    sys_ = _system(cfg)
    frame = build_frame(sys_, o["J"], o["kind"])
    A, B = frame_bounds(frame)
    grid = np.linspace(0.0, 1.0, 10_001)
    bank = FilterBank(o["J"], o["kind"])
    if o["kind"] == "poly":
        pou = float(np.max(np.abs(sum(f(grid) for f in bank.filters) - 1.0)))
    else:
        pou = float(np.max(np.abs(bank.energy(grid) - 1.0)))
    x = np.random.default_rng(o["seed"]).standard_normal(sys_.n)
    energy = sum(weighted_norm(y, sys_.M) ** 2 for y in apply_frame(frame, x)) / weighted_norm(x, sys_.M) ** 2
    report = {
        "n": sys_.n,
        "J": o["J"],
        "kind": o["kind"],
        "M": sys_.M.kind,
        "frame_bounds": [A, B],
        "lower_bound_constant": lower_bound_constant(o["J"]),
        "partition_of_unity_deviation": pou,
        "random_signal_energy_ratio": energy,
    }
    for k, v in report.items():
        print(f"{k}: {v}")
    if o.get("dump"):
        mats = {f"Psi_{j}": P for j, P in enumerate(frame.psi)}
        mats["Phi"] = frame.phi
        if o["format"] == "json":
            text = json.dumps({k: v.tolist() for k, v in mats.items()}, indent=1) + "\n"
        else:
            lines = ["filter,row," + ",".join(f"c{i}" for i in range(sys_.n))]
            for name, Mx in mats.items():
                for r, row in enumerate(Mx):
                    lines.append(f"{name},{r}," + ",".join(format(float(v), ".17g") for v in row))
            text = "\n".join(lines) + "\n"
        Path(o["dump"]).write_text(text)
    return 0


def cmd_stability(cfg: CliConfig) -> int:
    o = cfg.options
    A = _system(cfg, "graph_a", "M")
    M_b_key = "M_b" if (o.get("M_b") or "M_b" in cfg.inputs) else "M"
    B = _system(cfg, "graph_b", M_b_key)
    if A.n != B.n:
        raise UsageError(f"graphs have {A.n} and {B.n} vertices; both must have the same vertex set")
    x = read_signal(cfg.inputs["signal"], A.n) if "signal" in cfg.inputs else np.random.default_rng(o["seed"]).standard_normal(A.n)
    if "perm" in cfg.inputs:
        perm = read_signal(cfg.inputs["perm"], A.n).astype(int)
        if sorted(perm.tolist()) != list(range(A.n)):
            raise UsageError(f"{cfg.inputs['perm']}: not a permutation of 0..{A.n - 1}")
    else:
        perm = o["perm"]
    report = stability_report(GraphPair(A, B), o["J"], o["kind"], x, o["layers"], o["mu"], perm=perm)
    _emit(dumps_json(report) if o["format"] == "json" else dumps_csv(report), o.get("out"))
    if o.get("out"):
        for r in report.records:
            print(f"{'PASS' if r.passed else 'FAIL'} {r.name}: lhs={r.lhs:.6g} rhs={r.rhs:.6g}")
    return 0


def cmd_verify(cfg: CliConfig) -> int:
    o = cfg.options
    cert = run_suite(TrialSpec(seed=o["seed"], n_trials=o["trials"]))
    if o.get("out"):
        write_output(cert, o["out"], o["format"])
    for cid, ok in cert.criteria().items():
        print(f"{'PASS' if ok else 'FAIL'} {cid}")
    print("all checks passed" if cert.passed else "some checks FAILED")
    return 0 if cert.passed else 1


def cmd_spectra(cfg: CliConfig) -> int:
    graph = read_edge_list(cfg.inputs["graph"], one_based=cfg.options.get("one_based", False))
    sys_ = diffusion_system(graph, "identity", _spectral_function(cfg))
    print("i omega lambda")
    for i, (w, lam) in enumerate(zip(sys_.spectral.omegas, sys_.lambdas)):
        print(f"{i} {float(w)!r} {float(lam)!r}")
    print(f"spectral gap omega_1 = {float(sys_.spectral.gap)!r}")
    print(f"lambda_1 = {float(sys_.lambda1)!r}")
    return 0


COMMANDS = {
    "features": cmd_features,
    "frame-check": cmd_frame_check,
    "stability": cmd_stability,
    "verify": cmd_verify,
    "spectra": cmd_spectra,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_cli(argv)
        return COMMANDS[cfg.subcommand](cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except GraphScatError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
