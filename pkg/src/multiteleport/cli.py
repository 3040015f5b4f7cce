"""Command-line front end.

    multiteleport simulate --protocol gmtp --n 1 --alpha2 0.3 --trials 100000
    multiteleport analytic --n 10 --concurrence 0.96
    multiteleport verify
    multiteleport sweep --kind ratio --out fig2.csv
    multiteleport hetero --alphas2 0.2,0.4 --trials 100000
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field

from . import analytics, verification
from .channels import Channel, channel_from_concurrence, concurrence
from .protocols import ChainConfig, Protocol

PROB_GRID = (0.50, 0.005, 1.00)
RATIO_GRID = (0.90, 0.001, 1.00)
SWEEP_NS = (1, 5, 10)
SWEEP_HEADER = ("concurrence", "N", "p_smtp", "p_gmtp", "ratio")


@dataclass
class RunSpec:
    command: str
    protocol: Protocol = Protocol.GMTP
    hops: int | None = None
    ns: list[int] = field(default_factory=list)
    alpha2: float | None = None
    concurrence: float | None = None
    alphas2: list[float] | None = None
    trials: int = 100_000
    seed: int = 0
    engine: str = "batch"
    pauli_frame: bool = False
    input: tuple[complex, complex] | None = None
    transcripts: bool = False
    kind: str = "prob"
    grid: tuple[float, float, float] | None = None
    format: str = "csv"
    out: str | None = None

    def channel(self) -> Channel:
        if self.concurrence is not None:
            return channel_from_concurrence(self.concurrence)
        if self.alpha2 is None:
            raise ValueError("one of --alpha2 or --concurrence is required")
        return Channel.from_alpha2(self.alpha2)

    def chain(self) -> ChainConfig:
        if self.alphas2:
            channels = tuple(Channel.from_alpha2(a) for a in self.alphas2)
        else:
            hops = self.hops if self.hops is not None else 2 * (self.ns[0] if self.ns else 1)
            channels = (self.channel(),) * hops
        kwargs = {"pauli_frame": self.pauli_frame}
        if self.input is not None:
            kwargs["input"] = self.input
        return ChainConfig(self.protocol, channels, **kwargs)


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".17g")
    if value is None:
        return ""
    if isinstance(value, (list, tuple)):
        return ";".join(_fmt(v) for v in value)
    return str(value)


def render(records: list[dict], fmt: str) -> str:
    if fmt == "json":
        return "".join(json.dumps(r) + "\n" for r in records)
    if not records:
        return ""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(records[0].keys())
    for r in records:
        writer.writerow(_fmt(v) for v in r.values())
    return buf.getvalue()


def closed_form(config: ChainConfig) -> float | None:
    """Matching closed-form success probability, when one exists."""
    alphas = [ch.alpha for ch in config.channels]
    if config.hops == 1:
        return analytics.p_single(alphas[0])
    if config.is_homogeneous and config.hops % 2 == 0:
        formula = analytics.p_smtp if config.kind is Protocol.SMTP else analytics.p_gmtp
        return formula(config.hops // 2, alphas[0])
    if config.kind is Protocol.GMTP and config.hops == 2:
        return analytics.p_hetero(*alphas)
    return None


def cmd_simulate(spec: RunSpec) -> list[dict]:
    config = spec.chain()
    if spec.transcripts:
        return [
            {"trial": t, **tr.to_record()}
            for t, tr in enumerate(verification.iter_transcripts(config, spec.trials, spec.seed))
        ]
    mc = verification.monte_carlo(config, spec.trials, spec.seed, engine=spec.engine)
    return [
        {
            "protocol": config.kind.value,
            "hops": config.hops,
            "alpha2": [ch.alpha2 for ch in config.channels] if spec.alphas2 else config.channels[0].alpha2,
            "pauli_frame": config.pauli_frame,
            "trials": mc.trials,
            "successes": mc.successes,
            "estimate": mc.estimate,
            "std_error": mc.std_error,
            "closed_form": closed_form(config),
        }
    ]


def cmd_analytic(spec: RunSpec) -> list[dict]:
    ch = spec.channel()
    rows = []
    for n in spec.ns or [1]:
        row = {
            "N": n,
            "alpha2": ch.alpha2,
            "concurrence": concurrence(ch),
            "p_single": analytics.p_single(ch.alpha),
            "p_smtp": analytics.p_smtp(n, ch.alpha),
            "p_gmtp": analytics.p_gmtp(n, ch.alpha),
            "ratio": analytics.ratio_gmtp_smtp(n, ch.alpha),
        }
        if spec.alphas2:
            if len(spec.alphas2) != 2:
                raise ValueError("--alphas2 needs exactly two values for p_hetero")
            a1, a2 = (Channel.from_alpha2(a).alpha for a in spec.alphas2)
            row["p_hetero"] = analytics.p_hetero(a1, a2)
        rows.append(row)
    return rows


def cmd_verify(spec: RunSpec) -> list[dict]:
    return [c._asdict() for c in verification.standard_checks(trials=spec.trials, seed=spec.seed)]


def cmd_sweep(spec: RunSpec) -> list[dict]:
    start, step, stop = spec.grid or (RATIO_GRID if spec.kind == "ratio" else PROB_GRID)
    grid = analytics.concurrence_grid(start, step, stop)
    rows = []
    for n in spec.ns or SWEEP_NS:
        for pt in analytics.sweep(n, grid):
            rows.append(dict(zip(SWEEP_HEADER, (pt.concurrence, pt.n, pt.p_smtp, pt.p_gmtp, pt.ratio))))
    return rows


def cmd_hetero(spec: RunSpec) -> list[dict]:
    if not spec.alphas2:
        raise ValueError("hetero needs --alphas2")
    config = ChainConfig(Protocol.GMTP, tuple(Channel.from_alpha2(a) for a in spec.alphas2))
    exact = verification.enumerate(config) if config.hops <= 6 else None
    row = {
        "alphas2": [ch.alpha2 for ch in config.channels],
        "p_hetero": closed_form(config) if config.hops == 2 else None,
        "exact": exact.success_probability if exact else None,
        "mc_trials": spec.trials,
        "mc_estimate": None,
        "mc_std_error": None,
        "mc_pass": None,
    }
    if spec.trials > 0:
        mc = verification.monte_carlo(config, spec.trials, spec.seed, engine=spec.engine)
        row.update(mc_estimate=mc.estimate, mc_std_error=mc.std_error)
        if exact:
            row["mc_pass"] = verification.compare(exact, mc).passed
    return [row]


COMMANDS = {
    "simulate": cmd_simulate,
    "analytic": cmd_analytic,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
    "hetero": cmd_hetero,
}


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _grid(text: str) -> tuple[float, float, float]:
    parts = [float(x) for x in text.split(":")]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("grid must be start:step:stop")
    return tuple(parts)


def _input(text: str) -> tuple[complex, complex]:
    a, b = (complex(x.replace(" ", "")) for x in text.split(","))
    return a, b


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="multiteleport",
        description="Multi-hop teleportation over partially entangled channels.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", help="output path (default: standard output)")
    common.add_argument("--seed", type=int, default=0)

    def channel_args(p, required=False):
        g = p.add_mutually_exclusive_group(required=required)
        g.add_argument("--alpha2", type=float, help="squared smaller Schmidt coefficient")
        g.add_argument("--concurrence", type=float)

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo run of one chain")
    p.add_argument("--protocol", choices=[k.value for k in Protocol], default="gmtp")
    hops = p.add_mutually_exclusive_group()
    hops.add_argument("--n", type=int, help="hop pairs; the chain has 2n hops")
    hops.add_argument("--hops", type=int)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--alpha2", type=float, help="squared smaller Schmidt coefficient")
    g.add_argument("--concurrence", type=float)
    g.add_argument("--alphas2", type=_floats, help="one alpha^2 per hop, comma separated")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--engine", choices=("batch", "transcript"), default="batch")
    p.add_argument("--pauli-frame", action="store_true", help="GMTP: defer Pauli corrections to the receiver")
    p.add_argument("--input", type=_input, help="payload amplitudes 'a,b', e.g. '0.6,0.8j'")
    p.add_argument("--transcripts", action="store_true", help="emit one record per trial")

    p = sub.add_parser("analytic", parents=[common], help="closed-form success probabilities")
    p.add_argument("--n", type=_ints, default=[1], help="comma-separated N values")
    channel_args(p, required=True)
    p.add_argument("--alphas2", type=_floats, help="two alpha^2 values for p_hetero")

    p = sub.add_parser("verify", parents=[common], help="oracle vs closed forms and Monte Carlo vs oracle")
    p.add_argument("--trials", type=int, default=20_000)
    p.set_defaults(seed=2026)

    p = sub.add_parser("sweep", parents=[common], help="figure data versus concurrence")
    p.add_argument("--n", type=_ints, default=list(SWEEP_NS), help="comma-separated N values")
    p.add_argument("--kind", choices=("prob", "ratio"), default="prob")
    p.add_argument("--grid", type=_grid, help="concurrence grid start:step:stop")

    p = sub.add_parser("hetero", parents=[common], help="GMTP over channels of different strength")
    p.add_argument("--alphas2", type=_floats, required=True)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--engine", choices=("batch", "transcript"), default="batch")
    return parser


def spec_from_args(args: argparse.Namespace) -> RunSpec:
    spec = RunSpec(command=args.command, format=args.format, out=args.out, seed=args.seed)
    for name in ("alpha2", "concurrence", "alphas2", "trials", "engine", "pauli_frame",
                 "input", "transcripts", "kind", "grid", "hops"):
        if hasattr(args, name):
            setattr(spec, name, getattr(args, name))
    if hasattr(args, "protocol"):
        spec.protocol = Protocol(args.protocol)
    n = getattr(args, "n", None)
    if n is not None:
        spec.ns = n if isinstance(n, list) else [n]
    if spec.command == "simulate" and spec.trials < 1:
        raise ValueError("--trials must be >= 1")
    return spec


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        spec = spec_from_args(args)
        records = COMMANDS[spec.command](spec)
    except ValueError as exc:
        parser.error(str(exc))
    text = render(records, spec.format)
    if spec.out:
        with open(spec.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if spec.command == "verify":
        failed = [r for r in records if not r["passed"]]
        if failed:
            print(f"{len(failed)} of {len(records)} checks failed", file=sys.stderr)
            return 1
    return 0
