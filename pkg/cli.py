#!/usr/bin/env python3
"""
Command-line front end for the boundary Ising solver

Results go to stdout (or --output) as JSON or CSV; tables, logs and metrics
go to stderr.
"""
import argparse
import csv
import io
import json
import sys
import time
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from pydantic import BaseModel, Field, ValidationError
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from boundary_ising import __version__
from boundary_ising.checks import REGISTRY, run_checks
from boundary_ising.config import DEFAULT_SEED, DEFAULT_THREADS, RunConfig, load_run_config
from boundary_ising.correlations import BoundaryCorrelator, CorrelationResult, pfaffian_factorization_residual
from boundary_ising.errors import (
    ConfigError,
    InvalidPair,
    InvalidSpec,
    InvalidTuple,
    IsingError,
    MissingInput,
    OutputError,
)
from boundary_ising.kasteleyn import partition_function, prefactor
from boundary_ising.lattice import (
    AuxPair,
    BoundaryCondition,
    BoundarySite,
    BoundaryTuple,
    LatticeSpec,
    build_decorated_graph,
    verify_clockwise_odd,
)
from boundary_ising.logger import get_logger, log_computation, log_error
from boundary_ising.metrics import ComputationMetrics
from boundary_ising.oracle import InteractionSpec, brute_correlation, brute_partition, transfer_matrix_partition
from boundary_ising.perturbation import FirstOrderReport, zspin_first_order
from boundary_ising.propagators import PropagatorKind, QuadratureGrid, evaluate_batch, propagator
from boundary_ising.scaling import DecayFit, UniversalityTable, two_point_decay, universality_probe

console = Console(stderr=True)
logger = get_logger("cli")
metrics = ComputationMetrics()

# Errors raised by bad flag or input-file values exit 2, like argparse errors
ARGUMENT_ERRORS = (InvalidSpec, InvalidPair, InvalidTuple, MissingInput, ConfigError)

COMPONENTS = ("++", "+-", "-+", "--")


class PartitionPayload(BaseModel):
    L: int
    M: int
    t1: float
    t2: float
    tau: str
    sign: int
    log_Z: Optional[float] = Field(..., description="log|Z|, null when Z = 0")
    prefactor_log: float = Field(..., description="log C in Z = C Pf, auxiliary cosh factors included")
    aux: List[str] = Field(default_factory=list)


class OraclePayload(BaseModel):
    L: int
    M: int
    mode: str = Field(..., description="enum or transfer")
    interaction: str
    lam: float = Field(..., serialization_alias="lambda")
    beta: float
    sign: int
    log_Z: Optional[float]
    correlation: Optional[float] = None
    sites: List[str] = Field(default_factory=list)


class PropagatorPayload(BaseModel):
    z: List[int]
    zp: List[int]
    kind: str
    h: Optional[int]
    eta: Optional[float]
    components: Dict[str, Dict[str, float]]
    meta: Dict[str, int]


class CorrelationBatch(BaseModel):
    """One correlation per line of a sites file"""
    L: int
    M: int
    results: List[CorrelationResult]


class PropagatorBatch(BaseModel):
    """One sample per row of a request CSV, in file order"""
    samples: List[PropagatorPayload]


class CheckEntry(BaseModel):
    name: str
    passed: bool
    value: Optional[float]
    threshold: Optional[float]
    detail: Dict[str, Any] = Field(default_factory=dict)


class CheckPayload(BaseModel):
    passed: bool
    seed: int
    results: List[CheckEntry]


PAYLOAD_MODELS = {
    "partition": PartitionPayload,
    "correlate": CorrelationResult,
    "correlate-batch": CorrelationBatch,
    "oracle": OraclePayload,
    "propagator": PropagatorPayload,
    "propagator-batch": PropagatorBatch,
    "zspin": FirstOrderReport,
    "scaling-fit": DecayFit,
    "universality": UniversalityTable,
    "check": CheckPayload,
}


def parse_point(text: str) -> tuple:
    """`x,y` -> (x, y)"""
    try:
        x, y = (int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected x,y, got {text!r}")
    return x, y


def parse_range(text: str) -> List[int]:
    """`8:32` -> powers-of-two-ish ladder 8, 12, 16, 24, 32; `4,6,8` -> explicit list"""
    if ":" not in text:
        return [int(v) for v in text.split(",") if v.strip()]
    lo, hi = (int(v) for v in text.split(":"))
    values, x = [], lo
    while x <= hi:
        values.append(x)
        values.append(x + x // 2)
        x *= 2
    return sorted(v for v in set(values) if lo <= v <= hi)


def parse_aux(text: str) -> AuxPair:
    """`l:0-l:2=0.3` -> AuxPair"""
    try:
        sites, weight = text.split("=")
        first, second = sites.split("-")
        return AuxPair(BoundarySite.parse(first), BoundarySite.parse(second), float(weight))
    except ValueError:
        raise InvalidPair(f"cannot parse auxiliary pair {text!r}; expected l:0-l:2=0.3", {"aux": text})


def lattice_spec(args) -> LatticeSpec:
    return LatticeSpec.checked(L=args.L, M=args.M, t1=args.t1, t2=args.t2, tau=BoundaryCondition(args.tau))


def quadrature_grid(args) -> QuadratureGrid:
    return QuadratureGrid(n_k=args.grid_n, k2_nodes=args.k2_nodes)


def show_table(title: str, rows: Sequence[tuple], args) -> None:
    if args.quiet:
        return
    table = Table(title=title, show_header=True)
    table.add_column("Quantity", style="cyan")
    table.add_column("Value", style="green")
    for name, value in rows:
        table.add_row(str(name), f"{value:.12g}" if isinstance(value, float) else str(value))
    console.print(table)


def cmd_partition(args) -> BaseModel:
    """Spin partition function from the Pfaffian formula"""
    spec = lattice_spec(args)
    pairs = [parse_aux(a) for a in args.aux or []]
    value = partition_function(spec, pairs, workers=args.threads)
    log_c = prefactor(spec, pairs).log_value
    payload = PartitionPayload(
        L=spec.L, M=spec.M, t1=spec.t1, t2=spec.t2, tau=spec.tau.value,
        sign=value.sign, log_Z=None if value.is_zero else value.log_abs,
        prefactor_log=log_c, aux=list(args.aux or []),
    )
    show_table("Partition function", [("sign", value.sign), ("log Z", value.log_abs), ("log C", log_c)], args)
    return payload


def read_lines(path: str) -> List[str]:
    """Non-blank lines of an input file, `#` comments dropped"""
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise MissingInput(f"cannot read {path}: {e}", {"path": path})
    lines = [line.split("#", 1)[0].strip() for line in text.splitlines()]
    return [line for line in lines if line]


def read_propagator_requests(path: str, default_kind: str) -> List[dict]:
    """
    Request rows of a CSV with header x,y,xp,yp and optional kind,h,eta

    Raises:
        MissingInput: unreadable file
        InvalidSpec: missing columns or malformed values, with the row number
    """
    lines = read_lines(path)
    if not lines:
        raise MissingInput(f"no propagator requests in {path}", {"path": path})
    reader = csv.DictReader(lines)
    missing = {"x", "y", "xp", "yp"} - set(reader.fieldnames or [])
    if missing:
        raise InvalidSpec(f"request file lacks columns {sorted(missing)}", {"path": path})
    requests = []
    for number, row in enumerate(reader, start=2):
        try:
            requests.append({
                "kind": (row.get("kind") or default_kind).strip(),
                "z": (int(row["x"]), int(row["y"])),
                "zp": (int(row["xp"]), int(row["yp"])),
                "h": int(row["h"]) if (row.get("h") or "").strip() else None,
                "eta": float(row["eta"]) if (row.get("eta") or "").strip() else None,
            })
        except (TypeError, ValueError) as e:
            raise InvalidSpec(f"bad request on row {number} of {path}: {e}", {"path": path, "row": number})
        if requests[-1]["kind"] not in {k.value for k in PropagatorKind}:
            raise InvalidSpec(f"unknown propagator kind on row {number}", {"kind": requests[-1]["kind"]})
    return requests


def cmd_correlate(args) -> BaseModel:
    """Boundary spin correlation from Pfaffian minors, or one per line of --batch"""
    spec = lattice_spec(args)
    correlator = BoundaryCorrelator(spec, workers=args.threads)

    def one(text: str) -> CorrelationResult:
        sites = BoundaryTuple.parse(text)
        result = correlator.correlation(sites)
        if args.residual:
            result.residual = pfaffian_factorization_residual(spec, sites, correlator)
        return result

    if args.batch:
        batch = CorrelationBatch(L=spec.L, M=spec.M, results=[one(line) for line in read_lines(args.batch)])
        show_table("Boundary correlations", [(",".join(r.sites), r.value) for r in batch.results], args)
        return batch

    result = one(args.sites)
    rows = [("sites", ",".join(result.sites)), ("value", result.value)]
    if result.residual is not None:
        rows.append(("factorization residual", result.residual))
    show_table("Boundary correlation", rows, args)
    return result


def interaction_spec(args) -> InteractionSpec:
    """The interaction named by --interaction at strength --lambda"""
    if args.interaction == "none" or args.lam == 0.0:
        return InteractionSpec.none()
    return InteractionSpec.vertical_next_nearest(args.lam)


def cmd_oracle(args) -> BaseModel:
    """Exhaustive enumeration or transfer matrix reference"""
    spec = lattice_spec(args)
    inter = interaction_spec(args)
    beta = spec.beta if args.beta is None else args.beta
    if args.mode == "transfer":
        value = transfer_matrix_partition(spec, inter, beta)
    else:
        value = brute_partition(spec, inter, beta, workers=args.threads)
    correlation, labels = None, []
    if args.sites:
        sites = BoundaryTuple.parse(args.sites)
        correlation = brute_correlation(spec, sites, inter, beta, workers=args.threads)
        labels = [str(s) for s in sites.sites]
    payload = OraclePayload(
        L=spec.L, M=spec.M, mode=args.mode, interaction=args.interaction, lam=args.lam, beta=beta,
        sign=value.sign, log_Z=None if value.is_zero else value.log_abs,
        correlation=correlation, sites=labels,
    )
    rows = [("mode", args.mode), ("beta", beta), ("log Z", value.log_abs)]
    if correlation is not None:
        rows.append(("correlation", correlation))
    show_table("Oracle", rows, args)
    return payload


def cmd_propagator(args) -> BaseModel:
    """One propagator sample, or one per row of --batch"""
    grid = quadrature_grid(args)
    if args.batch:
        requests = read_propagator_requests(args.batch, args.kind)
        samples = evaluate_batch(requests, args.t1s, grid, workers=args.threads)
        batch = PropagatorBatch(samples=[PropagatorPayload.model_validate(s.to_dict()) for s in samples])
        show_table(
            "Propagator batch",
            [(f"{s.kind} {tuple(s.z)} {tuple(s.zp)}", s.components["+-"]["re"]) for s in batch.samples],
            args,
        )
        return batch
    sample = propagator(
        PropagatorKind(args.kind), args.z, args.zp, args.h, args.eta, args.t1s, grid
    )
    payload = PropagatorPayload.model_validate(sample.to_dict())
    rows = [(k, complex(v["re"], v["im"])) for k, v in payload.components.items()]
    show_table(f"Propagator {args.kind}", rows, args)
    return payload


def cmd_zspin(args) -> BaseModel:
    """First-order boundary spin renormalization"""
    report = zspin_first_order(quadrature_grid(args), workers=args.threads)
    rows = [(name, getattr(report, name)) for name in ("nu1", "zeta1", "eta1", "Z1", "beta1", "tau1", "Bspin1", "Zspin1")]
    show_table("First-order coefficients", rows, args)
    if not args.quiet:
        worst = max(report.residuals.values())
        console.print(Panel(f"largest residual against closed forms: {worst:.3e}", title="Residuals"))
    return report


def cmd_scaling_fit(args) -> BaseModel:
    """Boundary two-point decay on a critical cylinder"""
    M = args.M or args.Lmax
    fit = two_point_decay(args.Lmax, M, parse_range(args.seps), t1=args.t1, workers=args.threads)
    if args.plot:
        emit_plot_data(fit, args.plot)
    show_table(
        "Two-point decay",
        [("exponent", fit.exponent), ("amplitude", fit.amplitude),
         ("reference amplitude", fit.reference_amplitude), ("r^2", fit.r_squared)],
        args,
    )
    return fit


def cmd_universality(args) -> BaseModel:
    """Ratio table at beta_c(lambda) on an enumerable lattice"""
    lam = abs(args.lam)
    values = (-lam, -0.4 * lam, 0.0, 0.4 * lam, lam)
    table = universality_probe(lambda_values=values, L=args.L, M=args.M, workers=args.threads)
    if not args.quiet:
        view = Table(title="Universality probe", show_header=True)
        for column in ("lambda", "beta", "ratio", "1 + 2 Zspin1 lambda"):
            view.add_column(column, style="cyan")
        for row in table.rows:
            view.add_row(f"{row.lam:+.4f}", f"{row.beta:.9f}", f"{row.ratio:.9f}", f"{row.predicted:.9f}")
        console.print(view)
    return table


def cmd_check(args) -> BaseModel:
    """Run the verification suite"""
    if args.dump_graph:
        dump_graph(args)
    results = run_checks(args.names, seed=args.seed, workers=args.threads)
    payload = CheckPayload(
        passed=all(r.passed for r in results),
        seed=args.seed,
        results=[CheckEntry(**_finite(r.to_dict())) for r in results],
    )
    if not args.quiet:
        table = Table(title="Checks", show_header=True)
        table.add_column("Check", style="cyan")
        table.add_column("Result", style="bold")
        table.add_column("Value", style="green")
        table.add_column("Threshold", style="yellow")
        for r in results:
            verdict = "[green]pass[/green]" if r.passed else "[red]FAIL[/red]"
            table.add_row(r.name, verdict, f"{r.value:.3e}", f"{r.threshold:.1e}")
        console.print(table)
    return payload


def dump_graph(args) -> None:
    """Write the decorated graph of --L, --M, --tau with its orientation violations"""
    graph = build_decorated_graph(lattice_spec(args))
    dump = graph.to_json()
    dump["violations"] = [list(face) for face in verify_clockwise_odd(graph)]
    try:
        Path(args.dump_graph).write_text(json.dumps(dump, sort_keys=True) + "\n")
    except OSError as e:
        raise OutputError(f"cannot write graph dump: {e}", {"path": args.dump_graph})


def _finite(entry: dict) -> dict:
    """NaN placeholders from failed checks become nulls"""
    for key in ("value", "threshold"):
        if entry[key] != entry[key]:
            entry[key] = None
    return entry


def cmd_schema(args) -> Optional[BaseModel]:
    """Write the JSON schema of every subcommand payload"""
    directory = Path(args.dir)
    try:
        directory.mkdir(parents=True, exist_ok=True)
        for name, model in PAYLOAD_MODELS.items():
            path = directory / f"{name}.schema.json"
            schema = model.model_json_schema(by_alias=True, mode="serialization")
            path.write_text(json.dumps(schema, indent=2, sort_keys=True) + "\n")
    except OSError as e:
        raise OutputError(f"cannot write schemas: {e}", {"path": str(directory)})
    if not args.quiet:
        console.print(f"Wrote {len(PAYLOAD_MODELS)} schemas to {directory}")
    return None


def emit_plot_data(fit: DecayFit, path: str) -> Path:
    """
    Write the fit as CSV plus a gnuplot script that reads only the CSV

    Raises:
        OutputError: no data points, or the files cannot be written
    """
    if not fit.separations:
        raise OutputError("decay fit has no data points", {"path": str(path)})
    csv_path = Path(path)
    lines = [
        f"# exponent={fit.exponent:.12g}, amplitude={fit.amplitude:.12g}, r_squared={fit.r_squared:.12g}",
        "separation,value,fit_value",
    ]
    for x, value, fitted in zip(fit.separations, fit.values, fit.fit_values()):
        lines.append(f"{x},{value:.15g},{fitted:.15g}")
    script = "\n".join([
        "set datafile separator ','",
        "set key autotitle columnheader",
        "set logscale xy",
        "set xlabel 'separation'",
        "set ylabel 'boundary two-point function'",
        f"plot '{csv_path.name}' using 1:2 with points, '' using 1:3 with lines",
        "",
    ])
    try:
        csv_path.write_text("\n".join(lines) + "\n")
        csv_path.with_suffix(".gp").write_text(script)
    except OSError as e:
        raise OutputError(f"cannot write plot data: {e}", {"path": str(csv_path)})
    return csv_path


def batch_csv(payload: BaseModel) -> str:
    """
    One CSV row per batch entry

    Raises:
        OutputError: the payload is not a batch
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    if isinstance(payload, CorrelationBatch):
        writer.writerow(["sites", "value", "method", "residual"])
        for r in payload.results:
            writer.writerow([
                ",".join(r.sites), repr(r.value), r.method.value, "" if r.residual is None else repr(r.residual)
            ])
    elif isinstance(payload, PropagatorBatch):
        writer.writerow(
            ["kind", "x", "y", "xp", "yp", "h", "eta"]
            + [f"{c}_{part}" for c in COMPONENTS for part in ("re", "im")]
        )
        for s in payload.samples:
            writer.writerow(
                [s.kind, *s.z, *s.zp, "" if s.h is None else s.h, "" if s.eta is None else s.eta]
                + [repr(s.components[c][part]) for c in COMPONENTS for part in ("re", "im")]
            )
    else:
        raise OutputError(f"csv output is not available for {type(payload).__name__}")
    return buffer.getvalue()


def write_result(payload: BaseModel, args) -> None:
    """JSON (sorted keys), or CSV for decay fits and batches, to stdout or --output"""
    if args.format == "csv" and isinstance(payload, DecayFit):
        if not args.output:
            raise OutputError("csv output needs --output")
        emit_plot_data(payload, args.output)
        return
    if args.format == "csv":
        text = batch_csv(payload)
    else:
        text = json.dumps(payload.model_dump(mode="json", by_alias=True), indent=2, sort_keys=True) + "\n"
    if args.output:
        try:
            Path(args.output).write_text(text)
        except OSError as e:
            raise OutputError(f"cannot write {args.output}: {e}", {"path": args.output})
    else:
        sys.stdout.write(text)


def build_parser(suppress: bool = False) -> argparse.ArgumentParser:
    """
    Argument parser; with suppress=True every default is dropped so the parse
    shows which flags were given explicitly
    """
    def d(value):
        return argparse.SUPPRESS if suppress else value

    parser = argparse.ArgumentParser(
        description="Exact boundary Ising solver",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        argument_default=argparse.SUPPRESS if suppress else None,
    )
    parser.add_argument('--version', action='version', version=f"%(prog)s {__version__}")
    parser.add_argument('--config', default=d(None), help='JSON run configuration')
    parser.add_argument('--output', default=d(None), help='Write results to this file')
    parser.add_argument('--format', choices=['json', 'csv'], default=d('json'), help='Result encoding')
    parser.add_argument('--threads', type=int, default=d(DEFAULT_THREADS), help='Worker budget')
    parser.add_argument('--seed', type=int, default=d(DEFAULT_SEED), help='Seed for randomised checks')
    parser.add_argument('--metrics', action='store_true', default=d(False), help='Report timings on stderr')
    parser.add_argument('-q', '--quiet', action='store_true', default=d(False), help='No tables on stderr')

    subparsers = parser.add_subparsers(dest='command', help='Commands')

    def lattice_flags(sub, t1=0.4, t2=0.4):
        sub.add_argument('--L', type=int, default=d(4), help='Circumference')
        sub.add_argument('--M', type=int, default=d(3), help='Rows')
        sub.add_argument('--t1', type=float, default=d(t1), help='tanh(beta J1)')
        sub.add_argument('--t2', type=float, default=d(t2), help='tanh(beta J2)')
        sub.add_argument('--tau', choices=['p', 'a'], default=d('p'), help='Horizontal spin boundary condition')

    def grid_flags(sub):
        sub.add_argument('--grid-n', type=int, default=d(512), help='Momentum nodes per axis')
        sub.add_argument('--k2-nodes', type=int, default=d(128), help='Gauss-Legendre nodes on (0, pi)')

    partition_parser = subparsers.add_parser('partition', help='Partition function')
    lattice_flags(partition_parser)
    partition_parser.add_argument('--aux', action='append', default=d(None), help='Auxiliary pair l:0-l:2=0.3')

    correlate_parser = subparsers.add_parser('correlate', help='Boundary correlation')
    lattice_flags(correlate_parser)
    correlate_parser.add_argument('--sites', default=d('l:0,l:1'), help='Sites such as l:0,l:3,u:1')
    correlate_parser.add_argument('--residual', action='store_true', default=d(False), help='Factorization residual')
    correlate_parser.add_argument('--batch', default=d(None), help='Sites file, one tuple per line')

    oracle_parser = subparsers.add_parser('oracle', help='Enumeration or transfer matrix reference')
    lattice_flags(oracle_parser)
    oracle_parser.add_argument('--mode', choices=['enum', 'transfer'], default=d('enum'))
    oracle_parser.add_argument('--beta', type=float, default=d(None), help='Inverse temperature with J1 = 1 (default from t1)')
    oracle_parser.add_argument('--lambda', dest='lam', type=float, default=d(0.0), help='Interaction strength')
    oracle_parser.add_argument(
        '--interaction', choices=['appB', 'none'], default=d('appB'),
        help='appB: V(X) = 1 on the vertical pairs {z - e2, z + e2}',
    )
    oracle_parser.add_argument('--sites', default=d(None), help='Optional correlation sites')

    propagator_parser = subparsers.add_parser('propagator', help='Propagator sample')
    propagator_parser.add_argument('--kind', choices=[k.value for k in PropagatorKind], default=d('full'))
    propagator_parser.add_argument('--z', type=parse_point, default=d((0, 1)), help='x,y')
    propagator_parser.add_argument('--zp', type=parse_point, default=d((0, 1)), help='x,y')
    propagator_parser.add_argument('--h', type=int, default=d(None), help='Scale label <= 0')
    propagator_parser.add_argument('--eta', type=float, default=d(None), help='Cutoff eta')
    propagator_parser.add_argument('--t1s', type=float, default=d(2 ** 0.5 - 1), help='Critical weight')
    propagator_parser.add_argument('--batch', default=d(None), help='Request CSV: x,y,xp,yp[,kind,h,eta]')
    grid_flags(propagator_parser)

    zspin_parser = subparsers.add_parser('zspin', help='First-order Zspin report')
    grid_flags(zspin_parser)

    scaling_parser = subparsers.add_parser('scaling-fit', help='Two-point decay fit')
    scaling_parser.add_argument('--Lmax', type=int, default=d(128), help='Circumference')
    scaling_parser.add_argument('--M', type=int, default=d(None), help='Rows (default Lmax)')
    scaling_parser.add_argument('--seps', default=d('8:32'), help='Range lo:hi or list a,b,c')
    scaling_parser.add_argument('--t1', type=float, default=d(2 ** 0.5 - 1), help='Critical horizontal weight')
    scaling_parser.add_argument('--plot', default=d(None), help='Also write CSV and gnuplot script here')

    universality_parser = subparsers.add_parser('universality', help='Small-lambda ratio table')
    universality_parser.add_argument('--lambda', dest='lam', type=float, default=d(0.05))
    universality_parser.add_argument('--L', type=int, default=d(4))
    universality_parser.add_argument('--M', type=int, default=d(5))

    check_parser = subparsers.add_parser('check', help='Verification suite')
    check_parser.add_argument('names', nargs='*', default=d(['all']), help=f"all or any of {', '.join(REGISTRY)}")
    lattice_flags(check_parser)
    check_parser.add_argument('--dump-graph', default=d(None), help='Write the decorated graph JSON here')

    schema_parser = subparsers.add_parser('schema', help='Write payload JSON schemas')
    schema_parser.add_argument('--dir', default=d('schemas'), help='Target directory')

    return parser


def apply_config(args, argv: Sequence[str]) -> None:
    """
    Merge a --config file into args; explicit flags win

    Raises:
        ConfigError: command mismatch or unknown flag names
    """
    config: RunConfig = load_run_config(args.config)
    if config.command and config.command != args.command:
        raise ConfigError(
            f"config is for {config.command!r}, not {args.command!r}",
            {"config_command": config.command},
        )
    explicit = vars(build_parser(suppress=True).parse_args(argv))
    for key in ("output", "format", "threads", "seed"):
        if key not in explicit:
            setattr(args, key, getattr(config, key))
    for name, value in config.params.items():
        key = name.lstrip('-').replace('-', '_')
        key = 'lam' if key == 'lambda' else key
        if not hasattr(args, key) or key in ("command", "config"):
            raise ConfigError(f"unknown flag in config: {name}", {"flag": name})
        if key not in explicit:
            setattr(args, key, value)


COMMANDS = {
    'partition': cmd_partition,
    'correlate': cmd_correlate,
    'oracle': cmd_oracle,
    'propagator': cmd_propagator,
    'zspin': cmd_zspin,
    'scaling-fit': cmd_scaling_fit,
    'universality': cmd_universality,
    'check': cmd_check,
    'schema': cmd_schema,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    if not args.command:
        parser.print_help(sys.stderr)
        return 2

    start = time.perf_counter()
    try:
        if args.config:
            apply_config(args, argv)
        with metrics.timed(args.command):
            payload = COMMANDS[args.command](args)
        if payload is not None:
            write_result(payload, args)
        log_computation(args.command, _loggable(args), _headline(payload), (time.perf_counter() - start) * 1000, True)
    except ValidationError as e:
        console.print(f"[red]Error: {e.error_count()} invalid value(s)[/red]")
        sys.stdout.write(json.dumps({"error": {"code": "validation_error", "message": str(e)}}, sort_keys=True) + "\n")
        return 2
    except IsingError as e:
        console.print(f"[red]Error: {e.message}[/red]")
        log_computation(args.command, _loggable(args), None, (time.perf_counter() - start) * 1000, False, e.message)
        log_error(args.command, e.to_dict())
        sys.stdout.write(json.dumps({"error": e.to_dict()}, sort_keys=True, default=str) + "\n")
        return 2 if isinstance(e, ARGUMENT_ERRORS) else 1
    finally:
        if getattr(args, "metrics", False):
            console.print_json(data=metrics.get_stats())

    if args.command == 'check' and not payload.passed:
        return 1
    return 0


def _loggable(args) -> dict:
    return {k: v for k, v in vars(args).items() if isinstance(v, (int, float, str, list, tuple, type(None)))}


def _headline(payload: Optional[BaseModel]) -> Any:
    return None if payload is None else payload.model_dump(mode="json")


if __name__ == '__main__':
    sys.exit(main())
