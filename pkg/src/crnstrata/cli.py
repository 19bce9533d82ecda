"""``crnstrata`` command line: analyze, siphons, strata, certify, simulate.

Exit codes: 0 success / globally stable, 1 inconclusive, 2 bad input,
3 enumeration cap exceeded, 4 not complex balanced, 5 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .certify import (
    GLOBALLY_STABLE,
    INCONCLUSIVE,
    TWO_DIMENSIONAL,
    certify_global_stability,
)
from .equilibrium import (
    ConvergenceError,
    NoPositiveKernel,
    NotComplexBalanced,
    find_equilibrium,
    project_to_class,
)
from .geometry import (
    MAX_COMPLEXES,
    MAX_SPECIES,
    ScaleError,
    enumerate_adjacent_orderings,
    enumerate_siphons,
)
from .graph import deficiency, is_weakly_reversible, linkage_classes
from .network import ParseError, ReactionNetwork, load_network, stoichiometric_subspace
from .ratlp import format_rational
from .simulate import StiffnessError, integrate, monitor, trajectory_csv

EXIT_OK = 0
EXIT_INCONCLUSIVE = 1
EXIT_INPUT = 2
EXIT_SCALE = 3
EXIT_NOT_BALANCED = 4
EXIT_NUMERICAL = 5

COMMANDS = ("analyze", "siphons", "strata", "certify", "simulate")


class InputError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    input: Path
    format: str = "text"
    t_end: float = 100.0
    tol: float = 1e-8
    x0: tuple[float, ...] | None = None
    seed: int = 0
    max_complexes: int = MAX_COMPLEXES
    max_species: int = MAX_SPECIES
    exhaustive_decomposition: bool = False
    output: Path | None = None
    samples: int = 1000

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise InputError(f"unknown command {self.command!r}")
        if self.format not in ("text", "json"):
            raise InputError("--format must be text or json")
        if not self.t_end > 0:
            raise InputError("--t-end must be positive")
        if not 0 < self.tol <= 1e-2:
            raise InputError("--tol must lie in (0, 1e-2]")
        if self.max_complexes < 1 or self.max_species < 1:
            raise InputError("caps must be positive")
        if self.samples < 2:
            raise InputError("--samples must be at least 2")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise InputError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="crnstrata", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--input", required=True, type=Path, help="network file")
    parser.add_argument("--format", choices=("text", "json"), default="text")
    parser.add_argument("--t-end", type=float, default=100.0)
    parser.add_argument("--tol", type=float, default=1e-8)
    parser.add_argument("--x0", help='initial state "v1,v2,..."; random when omitted')
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--max-complexes", type=int, default=MAX_COMPLEXES)
    parser.add_argument("--max-species", type=int, default=MAX_SPECIES)
    parser.add_argument("--exhaustive-decomposition", action="store_true")
    parser.add_argument(
        "--output", type=Path, help="simulate: write PREFIX.csv and PREFIX.monitor.json"
    )
    parser.add_argument("--samples", type=int, default=1000, help="monitor sample count")
    return parser


def parse_config(argv: Sequence[str]) -> RunConfig:
    ns = build_parser().parse_args(argv)
    x0 = None
    if ns.x0 is not None:
        try:
            x0 = tuple(float(v) for v in ns.x0.split(","))
        except ValueError:
            raise InputError(f"cannot parse --x0 {ns.x0!r}") from None
    cfg = RunConfig(
        command=ns.command,
        input=ns.input,
        format=ns.format,
        t_end=ns.t_end,
        tol=ns.tol,
        x0=x0,
        seed=ns.seed,
        max_complexes=ns.max_complexes,
        max_species=ns.max_species,
        exhaustive_decomposition=ns.exhaustive_decomposition,
        output=ns.output,
        samples=ns.samples,
    )
    cfg.validate()
    return cfg


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def _fmt_vec(vec) -> str:
    return "(" + ", ".join(format_rational(v) if not isinstance(v, float) else f"{v:.6g}" for v in vec) + ")"


def _fmt_set(indices) -> str:
    return "{" + ",".join(str(i + 1) for i in indices) + "}"


# --------------------------------------------------------------------------
# commands; each returns (exit code, stdout text)


def cmd_analyze(cfg: RunConfig, net: ReactionNetwork) -> tuple[int, str]:
    report = {
        "network_hash": net.digest(),
        "species": list(net.species),
        "m": net.m,
        "n": net.n,
        "r": net.r,
        "s": stoichiometric_subspace(net).s,
        "linkage_classes": len(linkage_classes(net)),
        "deficiency": deficiency(net),
        "weakly_reversible": is_weakly_reversible(net),
        "complex_balanced": False,
        "detailed_balanced": False,
        "equilibrium": None,
        "reason": "",
    }
    try:
        eq = find_equilibrium(net)
    except (NoPositiveKernel, NotComplexBalanced) as exc:
        report["reason"] = str(exc)
    else:
        report["complex_balanced"] = True
        report["detailed_balanced"] = bool(eq.detailed_balanced)
        report["equilibrium"] = [float(v) for v in eq.x_star]
    if cfg.format == "json":
        return EXIT_OK, _dump(report)
    lines = [
        f"species            {' '.join(net.species)}",
        f"m, n, r            {net.m}, {net.n}, {net.r}",
        f"rank s             {report['s']}",
        f"linkage classes    {report['linkage_classes']}",
        f"deficiency         {report['deficiency']}",
        f"weakly reversible  {str(report['weakly_reversible']).lower()}",
        f"complex balanced   {str(report['complex_balanced']).lower()}",
        f"detailed balanced  {str(report['detailed_balanced']).lower()}",
    ]
    if report["equilibrium"] is not None:
        lines.append(f"equilibrium        {_fmt_vec(report['equilibrium'])}")
    else:
        lines.append(f"reason             {report['reason']}")
    return EXIT_OK, "\n".join(lines)


def cmd_siphons(cfg: RunConfig, net: ReactionNetwork) -> tuple[int, str]:
    siphons = enumerate_siphons(net, cfg.max_species)
    if cfg.format == "json":
        data = {
            "network_hash": net.digest(),
            "siphons": [
                {
                    "indices": list(s.one_based()),
                    "species": [net.species[i] for i in s.indices],
                    "minimal": s.minimal,
                }
                for s in siphons
            ],
        }
        return EXIT_OK, _dump(data)
    if not siphons:
        return EXIT_OK, "no siphons"
    lines = [f"{'siphon':<16}{'species':<24}minimal"]
    for s in siphons:
        names = " ".join(net.species[i] for i in s.indices)
        lines.append(f"{_fmt_set(s.indices):<16}{names:<24}{'yes' if s.minimal else 'no'}")
    return EXIT_OK, "\n".join(lines)


def cmd_strata(cfg: RunConfig, net: ReactionNetwork) -> tuple[int, str]:
    siphons = [s for s in enumerate_siphons(net, cfg.max_species) if len(s) < net.m]
    faces = []
    for s in siphons:
        orderings = enumerate_adjacent_orderings(net, s, cfg.max_complexes)
        faces.append((s, orderings))
    if cfg.format == "json":
        data = {
            "network_hash": net.digest(),
            "faces": [
                {"siphon": list(s.one_based()), "orderings": [[i + 1 for i in mu] for mu in mus]}
                for s, mus in faces
            ],
        }
        return EXIT_OK, _dump(data)
    lines = []
    for s, mus in faces:
        lines.append(f"siphon {_fmt_set(s.indices)}: {len(mus)} adjacent orderings")
        for mu in mus:
            lines.append("  " + " > ".join(str(i + 1) for i in mu))
    return EXIT_OK, "\n".join(lines) if lines else "no proper siphons"


def _certificate(cfg: RunConfig, net: ReactionNetwork, equilibrium=None):
    return certify_global_stability(
        net,
        equilibrium=equilibrium,
        exhaustive=cfg.exhaustive_decomposition,
        max_species=cfg.max_species,
        max_complexes=cfg.max_complexes,
    )


def render_certificate(cert) -> str:
    if cert.verdict == GLOBALLY_STABLE:
        if any(e.condition == TWO_DIMENSIONAL for e in cert.entries):
            head = "GLOBALLY STABLE (two-dimensional stoichiometric subspace)"
        else:
            head = "GLOBALLY STABLE"
    elif cert.verdict == INCONCLUSIVE:
        head = "INCONCLUSIVE"
    else:
        return f"NOT COMPLEX BALANCED: {cert.reason}"
    lines = [head]
    rows = [e for e in cert.entries if e.condition != TWO_DIMENSIONAL]
    if rows:
        lines.append("")
        lines.append(f"{'siphon':<12}{'|M_I|':>6}{'|P|':>6}  {'condition':<16}alpha")
        for e in rows:
            size_p = "-" if e.partial_sums is None else str(len(e.partial_sums))
            cond = e.condition or "none"
            alpha = _fmt_vec(e.alpha) if e.alpha is not None else "-"
            lines.append(
                f"{_fmt_set(e.siphon.indices):<12}{len(e.orderings):>6}{size_p:>6}  {cond:<16}{alpha}"
            )
        for e in cert.failing():
            if e.farkas_witness is not None:
                lines.append(f"Farkas multipliers for {_fmt_set(e.siphon.indices)}: {_fmt_vec(e.farkas_witness)}")
    if cert.decompositions:
        cycles = " ".join(
            "{" + ",".join(map(str, c.one_based())) + "}" for c, _ in cert.decompositions[0].cycles
        )
        lines.append(f"cycles: {cycles}")
    return "\n".join(lines)


def cmd_certify(cfg: RunConfig, net: ReactionNetwork) -> tuple[int, str]:
    cert = _certificate(cfg, net)
    out = cert.to_json() if cfg.format == "json" else render_certificate(cert)
    if cert.verdict == GLOBALLY_STABLE:
        return EXIT_OK, out
    if cert.verdict == INCONCLUSIVE:
        return EXIT_INCONCLUSIVE, out
    return EXIT_NOT_BALANCED, out


def initial_state(cfg: RunConfig, m: int) -> np.ndarray:
    """``--x0`` if given, else log-uniform in [0.1, 10] from the seed."""
    if cfg.x0 is not None:
        x0 = np.array(cfg.x0, dtype=float)
        if x0.shape != (m,):
            raise InputError(f"--x0 has {len(x0)} entries, network has {m} species")
        if np.any(~np.isfinite(x0)) or np.any(x0 <= 0):
            raise InputError("--x0 entries must be positive")
        return x0
    rng = np.random.default_rng(cfg.seed)
    return np.exp(rng.uniform(np.log(0.1), np.log(10.0), size=m))


def cmd_simulate(cfg: RunConfig, net: ReactionNetwork) -> tuple[int, str]:
    x0 = initial_state(cfg, net.m)
    eq = find_equilibrium(net)
    x_star = project_to_class(net, eq.x_star, x0)
    try:
        cert = _certificate(cfg, net, eq)
    except ScaleError:
        cert = None
    code = EXIT_OK
    error = None
    try:
        traj = integrate(net, x0, cfg.t_end, cfg.tol)
    except StiffnessError as exc:
        traj, code, error = exc.partial, EXIT_NUMERICAL, str(exc)
    report = monitor(traj, x_star, cert, samples=cfg.samples)
    data = report.to_dict()
    data.update(
        {
            "network_hash": net.digest(),
            "x0": [float(v) for v in x0],
            "x_star": [float(v) for v in x_star],
            "final_state": [float(v) for v in traj.final],
            "accepted_steps": traj.accepted,
            "rejected_steps": traj.rejected,
            "verdict": None if cert is None else cert.verdict,
            "error": error,
        }
    )
    if cfg.output is not None:
        prefix = str(cfg.output)
        Path(prefix + ".csv").write_text(trajectory_csv(traj, x_star))
        Path(prefix + ".monitor.json").write_text(_dump(data) + "\n")
    if cfg.format == "json":
        return code, _dump(data)
    summary = (
        f"t = {traj.times[-1]:.6g}  final {_fmt_vec(traj.final)}  x* {_fmt_vec(x_star)}\n"
        f"L: {data['lyapunov_initial']:.6g} -> {data['lyapunov_final']:.6g}"
        f" (max increase {data['max_lyapunov_increase']:.3g})\n"
        f"H checks {data['H_checks']}, violations {len(data['H_violations'])},"
        f" inter-stratum increases {data['H_inter_stratum_increases']}"
    )
    if error:
        summary += f"\nstopped early: {error}"
    return code, summary


HANDLERS = {
    "analyze": cmd_analyze,
    "siphons": cmd_siphons,
    "strata": cmd_strata,
    "certify": cmd_certify,
    "simulate": cmd_simulate,
}


def run(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        cfg = parse_config(sys.argv[1:] if argv is None else list(argv))
        net = load_network(cfg.input)
        code, text = HANDLERS[cfg.command](cfg, net)
    except (InputError, ParseError, OSError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_INPUT
    except ScaleError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_SCALE
    except (NoPositiveKernel, NotComplexBalanced) as exc:
        print(f"error: not complex balanced: {exc}", file=stderr)
        return EXIT_NOT_BALANCED
    except (ConvergenceError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"error: numerical failure: {exc}", file=stderr)
        return EXIT_NUMERICAL
    print(text, file=stdout)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
