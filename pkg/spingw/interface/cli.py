import csv
import functools
import importlib.metadata
import io
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Optional, Union

import typer

import spingw.core.config as config
from spingw import APP_NAME
from spingw.core.algebra import SymbolicCombo, format_rational
from spingw.core.closed_forms import (
    Count,
    InvariantKey,
    Parity,
    SpinKey,
    dimension_chi,
    evaluate_dim0,
    f0_relative,
    gt_dim0,
    gw_dim0,
    local_key,
    mp_descendant,
    spin_keys,
)
from spingw.core.closed_forms import label_of as key_label
from spingw.core.errors import BaseError, InvalidInput, VerificationFailed
from spingw.core.models.input import OutputFormat, RunConfig, Suite, parse_user_input
from spingw.core.models.output import TableRow
from spingw.core.partitions import Partition
from spingw.core.registry import Registry
from spingw.core.sum_engine import (
    ReductionTrace,
    genus_zero_symbol,
    reduce_genus_zero,
    theorem_a_combo,
    theorem_a_rhs,
    theorem_b_descent,
    theorem_b_split,
)
from spingw.core.trr_engine import (
    STRATEGIES,
    ExprFlavor,
    MixedExpr,
    Strategy,
    base_absolute,
    base_relative,
    reduce_padded,
    trace_reduction,
    verify_ap,
    verify_dec_rel,
)
from spingw.core.trr_engine import label_of as expr_label
from spingw.core.verification import Sweep, run_verification
from spingw.interface.logging import LogLevel, setup_logging

app = typer.Typer(no_args_is_help=True, pretty_exceptions_show_locals=False)
compute_app = typer.Typer(
    no_args_is_help=True, help="Compute a single invariant, relation or reduction."
)
app.add_typer(compute_app, name="compute")
log = logging.getLogger(__name__)

REGISTRY_ENVVAR = f"{APP_NAME.upper()}_REGISTRY"

VERIFY_HELP = f"""\
    Check the identities of one suite (or all of them) exactly.

    \b
    # the genus reduction for every spin curve up to genus 16
    {APP_NAME} verify --suite reduction --hmax 16

    \b
    # relative versus absolute descendants, degree <= 4, weight <= 5
    {APP_NAME} verify --suite trr --dmax 4 --wmax 5

    \b
    # everything, including registry entries that have a closed form
    {APP_NAME} verify --suite all --registry values.json
    """

DEGREE_OPTION = typer.Option(..., "--d", min=1, help="Degree d of the counted class.")
GENUS_OPTION = typer.Option(..., "--h", min=0, help="Genus h of the spin curve.")
PARITY_OPTION = typer.Option(..., "--parity", help="Parity of the spin curve, + or -.")
DESCENDANTS_OPTION = typer.Option(
    "", "--k", help="Comma separated descendant exponents, e.g. 0,1,1."
)
TRACE_OPTION = typer.Option(False, "--trace", help="Also print every rewrite step.")
FORMAT_OPTION = typer.Option(OutputFormat.text, "--format", help="Output format.")
REGISTRY_OPTION = typer.Option(
    None,
    "--registry",
    envvar=REGISTRY_ENVVAR,
    dir_okay=False,
    help="JSON file with values of invariants that have no closed form.",
)
H_MAX_OPTION = typer.Option(None, "--hmax", help="Largest genus to sweep over.")


def _bail_out_with_error(e: BaseError) -> None:
    """Report and error and set correct exit code."""
    log.error("%s: %s", type(e).__name__, str(e).replace("\n", r"\n"))
    print(f"Error: {type(e).__name__}: {e.friendly_msg()}", file=sys.stderr)
    raise typer.Exit(2 if e.is_invalid_usage else 1)


def handle_errors(cmd: Callable[..., None]) -> Callable[..., None]:
    """Decorate a CLI command function with an error handler.

    All errors will be logged at ERROR level before exiting.
    Expected errors will be printed in a friendlier format rather than showing the whole traceback.
    Errors that we consider invalid usage will result in exit code 2.
    """

    def log_error(error: Exception) -> None:
        log.error("%s: %s", type(error).__name__, str(error).replace("\n", r"\n"))

    @functools.wraps(cmd)
    def cmd_with_error_handling(*args: tuple[Any, ...], **kwargs: dict[str, Any]) -> None:
        try:
            cmd(*args, **kwargs)
        except BaseError as e:
            _bail_out_with_error(e)
        except Exception as e:
            log_error(e)
            raise

    return cmd_with_error_handling


def version_callback(value: bool) -> None:
    """If --version was used, print our version and exit."""
    if not value:
        return

    print(f"{APP_NAME}", importlib.metadata.version("spingw"))
    print("Verification suites:", ", ".join(suite.value for suite in Suite))
    raise typer.Exit()


@app.callback()
@handle_errors
def main(  # noqa: D103; docstring becomes part of --help message
    version: bool = typer.Option(
        False,
        "--version",
        callback=version_callback,
        is_eager=True,
        help="Show version and exit.",
    ),
    config_file: Path = typer.Option(
        None,
        "--config-file",
        help="Read configuration from this file.",
        dir_okay=False,
        exists=True,
        resolve_path=True,
        readable=True,
    ),
    log_level: LogLevel = typer.Option(
        LogLevel.WARNING.value,
        "--log-level",
        case_sensitive=False,
        help="Set log level.",
    ),
) -> None:
    setup_logging(log_level)
    if config_file:
        config.set_config(config_file)


# ------------------------------------------------------------------------------------------------
# Parsing and rendering
# ------------------------------------------------------------------------------------------------


def _parse_ints(raw: str, what: str) -> list[int]:
    items = [item.strip() for item in raw.split(",") if item.strip()]
    try:
        values = [int(item) for item in items]
    except ValueError:
        raise InvalidInput(f"{what} must be comma separated integers, got {raw!r}")
    if any(value < 0 for value in values):
        raise InvalidInput(f"{what} must be nonnegative, got {raw!r}")
    return values


def _parse_insertions(raw: str) -> list[tuple[int, int]]:
    """Parse "s,t;s,t;..." into (τ-power, φ-power) pairs."""
    insertions = []
    for chunk in filter(None, (chunk.strip() for chunk in raw.split(";"))):
        pair = _parse_ints(chunk, "--ins")
        if len(pair) != 2:
            raise InvalidInput(f"--ins takes pairs 's,t' separated by ';', got {chunk!r}")
        insertions.append((pair[0], pair[1]))
    return insertions


def _optional_partition(raw: Optional[str]) -> Optional[Partition]:
    return Partition.parse(raw) if raw else None


def _label(symbol: str) -> str:
    if symbol.startswith(("GW|abs|", "GW|rel|")):
        return expr_label(symbol)
    return key_label(symbol)


def _load_registry(path: Optional[Path]) -> Registry:
    return Registry.load(path) if path else Registry.empty()


def _emit(
    value: Union[Fraction, int, SymbolicCombo],
    fmt: OutputFormat = OutputFormat.text,
    trace: Optional[ReductionTrace] = None,
) -> None:
    """Print a value (and a trace) as text or JSON; rationals are always "p/q" strings."""
    if fmt is OutputFormat.json:
        payload: dict[str, Any] = {}
        if isinstance(value, SymbolicCombo):
            payload["value"] = value.to_json()
        elif isinstance(value, Fraction):
            payload["value"] = format_rational(value)
        else:
            payload["value"] = str(value)
        if trace is not None:
            payload["trace"] = trace.to_model().model_dump(mode="json")
        print(json.dumps(payload, indent=2))
        return

    if isinstance(value, SymbolicCombo):
        print(value.render(_label))
    elif isinstance(value, Fraction):
        print(format_rational(value))
    else:
        print(value)
    if trace is not None and len(trace):
        print(trace.render(_label))


# ------------------------------------------------------------------------------------------------
# compute
# ------------------------------------------------------------------------------------------------


@compute_app.command("dim0")
@handle_errors
def compute_dim0(
    d: int = DEGREE_OPTION,
    h: int = GENUS_OPTION,
    parity: Parity = PARITY_OPTION,
    connected: bool = typer.Option(False, "--connected", help="Connected domains only (GW)."),
    fmt: OutputFormat = FORMAT_OPTION,
) -> None:
    """Dimension-zero local invariant of degree 1 or 2."""
    s = SpinKey(h, parity)
    _emit(gw_dim0(d, s) if connected else gt_dim0(d, s), fmt)


@compute_app.command("mp")
@handle_errors
def compute_mp(
    d: int = DEGREE_OPTION,
    h: int = GENUS_OPTION,
    parity: Parity = PARITY_OPTION,
    k: str = DESCENDANTS_OPTION,
    fmt: OutputFormat = FORMAT_OPTION,
) -> None:
    """Local descendant invariant GT_d(∏ τ_k(F*)) of degree 1 or 2."""
    _emit(mp_descendant(d, SpinKey(h, parity), _parse_ints(k, "--k")), fmt)


@compute_app.command("f0")
@handle_errors
def compute_f0(
    d: int = DEGREE_OPTION,
    two_sided: bool = typer.Option(
        False, "--two-sided", help="Transverse contact along both fibers."
    ),
    fmt: OutputFormat = FORMAT_OPTION,
) -> None:
    """Relative invariant of F0 with transverse contact."""
    _emit(f0_relative(d, two_sided), fmt)


@compute_app.command("relative")
@handle_errors
def compute_relative(
    d: int = DEGREE_OPTION,
    h: int = GENUS_OPTION,
    parity: Parity = PARITY_OPTION,
    m1: str = typer.Option(..., "--m1", help="Contact partition along the first fiber."),
    m2: Optional[str] = typer.Option(None, "--m2", help="Contact partition along the second."),
    fmt: OutputFormat = FORMAT_OPTION,
) -> None:
    """Dimension-zero relative local invariant, reduced to transverse-free form."""
    key = local_key(d, SpinKey(h, parity), m1=Partition.parse(m1), m2=_optional_partition(m2))
    _emit(evaluate_dim0(key), fmt)


@compute_app.command("chi")
@handle_errors
def compute_chi(
    d: int = DEGREE_OPTION,
    h: int = GENUS_OPTION,
    parity: Parity = PARITY_OPTION,
    k: str = DESCENDANTS_OPTION,
    m1: Optional[str] = typer.Option(None, "--m1", help="Contact partition along a fiber."),
    m2: Optional[str] = typer.Option(None, "--m2", help="Contact partition along a second."),
    fmt: OutputFormat = FORMAT_OPTION,
) -> None:
    """Euler characteristic of the domain forced by the dimension constraint."""
    key = local_key(
        d,
        SpinKey(h, parity),
        m1=_optional_partition(m1),
        m2=_optional_partition(m2),
        ks=_parse_ints(k, "--k"),
    )
    _emit(dimension_chi(key), fmt)


@compute_app.command("base")
@handle_errors
def compute_base(
    k: int = typer.Option(..., "--k", min=1, help="Degree of the base case."),
    relative: bool = typer.Option(False, "--relative", help="Relative base case."),
    fmt: OutputFormat = FORMAT_OPTION,
) -> None:
    """Genus zero base case of the recursion, computed by recurrence."""
    _emit(base_relative(k) if relative else base_absolute(k), fmt)


@compute_app.command("reduce")
@handle_errors
def compute_reduce(
    h: int = GENUS_OPTION,
    parity: Parity = PARITY_OPTION,
    trace: bool = TRACE_OPTION,
    fmt: OutputFormat = FORMAT_OPTION,
) -> None:
    """Express GT_(2)^{loc,h,p} through the genus zero invariant GT_(2)^{loc,0,+}."""
    coefficient, reduction = reduce_genus_zero(SpinKey(h, parity))
    _emit(genus_zero_symbol() * coefficient, fmt, reduction if trace else None)


@compute_app.command("split")
@handle_errors
def compute_split(
    h1: int = typer.Option(..., "--h1", min=0, help="Genus of the first curve."),
    p1: Parity = typer.Option(..., "--p1", help="Parity of the first curve."),
    h2: int = typer.Option(..., "--h2", min=0, help="Genus of the second curve."),
    p2: Parity = typer.Option(..., "--p2", help="Parity of the second curve."),
    fmt: OutputFormat = FORMAT_OPTION,
) -> None:
    """GT_(2) of the curve joined from two spin curves."""
    _emit(theorem_b_split(SpinKey(h1, p1), SpinKey(h2, p2)), fmt)


@compute_app.command("descent")
@handle_errors
def compute_descent(
    h: int = GENUS_OPTION,
    parity: Parity = PARITY_OPTION,
    fmt: OutputFormat = FORMAT_OPTION,
) -> None:
    """GT_(2) in terms of the invariant of one genus lower."""
    _emit(theorem_b_descent(SpinKey(h, parity)), fmt)


@compute_app.command("theorem-a")
@handle_errors
def compute_theorem_a(
    d: int = DEGREE_OPTION,
    h: int = GENUS_OPTION,
    parity: Parity = PARITY_OPTION,
    k: str = DESCENDANTS_OPTION,
    n1: int = typer.Option(0, "--n1", min=0, help="Descendants kept on the local side."),
    symbolic: bool = typer.Option(False, "--symbolic", help="Print the unevaluated sum."),
    registry: Optional[Path] = REGISTRY_OPTION,
    fmt: OutputFormat = FORMAT_OPTION,
) -> None:
    """Local invariant as a sum over contact partitions of a degeneration against F0."""
    run = parse_user_input(
        RunConfig.model_validate,
        {"command": "compute", "registry_path": registry, "output_format": fmt},
    )
    s = SpinKey(h, parity)
    ks = _parse_ints(k, "--k")
    split = (n1, len(ks) - n1)
    if symbolic:
        _emit(theorem_a_combo(d, s, ks, split), fmt)
    else:
        _emit(theorem_a_rhs(d, s, ks, split, _load_registry(run.registry_path)), fmt)


@compute_app.command("trr")
@handle_errors
def compute_trr(
    d: int = DEGREE_OPTION,
    g: int = typer.Option(0, "--g", min=0, help="Genus of the domain."),
    ins: str = typer.Option(..., "--ins", help="Insertions 's,t;s,t;...' as τ_s φ^t(F*)."),
    relative: bool = typer.Option(False, "--relative", help="Transverse contact on two fibers."),
    strategy: str = typer.Option(
        "leftmost", "--strategy", help=f"Insertion rewritten first: {', '.join(STRATEGIES)}."
    ),
    trace: bool = TRACE_OPTION,
    fmt: OutputFormat = FORMAT_OPTION,
) -> None:
    """Reduce a descendant invariant to invariants with φ-powers only."""
    if strategy not in STRATEGIES:
        raise InvalidInput(f"Unknown strategy {strategy!r}, use one of {', '.join(STRATEGIES)}")
    chosen: Strategy = "leftmost" if strategy == "leftmost" else "rightmost"
    flavor = ExprFlavor.relative_full if relative else ExprFlavor.absolute
    e = MixedExpr.of(d, g, _parse_insertions(ins), flavor)

    if e.n >= 3:
        combo, reduction = trace_reduction(e, chosen)
        _emit(combo, fmt, reduction if trace else None)
    else:
        _emit(reduce_padded(e, chosen), fmt)


@compute_app.command("ap")
@handle_errors
def compute_ap(
    d: int = DEGREE_OPTION,
    g: int = typer.Option(0, "--g", min=0, help="Genus of the domain."),
    ins: str = typer.Option(..., "--ins", help="Insertions 's,t;s,t;...' as τ_s φ^t(F*)."),
    trace: bool = TRACE_OPTION,
) -> None:
    """Compare the relative and absolute invariant after full reduction."""
    insertions = _parse_insertions(ins)
    if len(insertions) >= 3:
        result = verify_ap(d, g, insertions)
        print(f"absolute: {result.absolute.render(_label)}")
        print(f"relative: {result.relative.render(_label)}")
        if trace:
            print(result.trace.render(_label))
        holds = result.holds
    else:
        holds = verify_dec_rel(d, g, insertions)

    if not holds:
        raise VerificationFailed(
            f"Relative invariant is not (d!)^2 times the absolute one for d={d}"
        )
    print("PASS")


# ------------------------------------------------------------------------------------------------
# verify, table
# ------------------------------------------------------------------------------------------------


@app.command(help=VERIFY_HELP)
@handle_errors
def verify(  # noqa: D103; docstring becomes part of --help message
    suite: Suite = typer.Option(Suite.all, "--suite", help="Identities to check."),
    h_max: Optional[int] = H_MAX_OPTION,
    d_max: Optional[int] = typer.Option(None, "--dmax", help="Largest degree to sweep over."),
    weight_max: Optional[int] = typer.Option(
        None, "--wmax", help="Largest total descendant weight to sweep over."
    ),
    registry: Optional[Path] = REGISTRY_OPTION,
    fmt: OutputFormat = FORMAT_OPTION,
) -> None:
    defaults = config.get_config()
    run = parse_user_input(
        RunConfig.model_validate,
        {
            "command": "verify",
            "registry_path": registry,
            "output_format": fmt,
            "h_max": defaults.h_max if h_max is None else h_max,
            "d_max": defaults.d_max if d_max is None else d_max,
            "weight_max": defaults.weight_max if weight_max is None else weight_max,
        },
    )
    sweep = Sweep(run.h_max, run.d_max, run.weight_max, _load_registry(run.registry_path))
    report = run_verification(suite, sweep)

    if run.output_format is OutputFormat.json:
        print(report.model_dump_json(indent=2))
    elif run.output_format is OutputFormat.csv:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["identity", "instance", "holds", "detail"])
        for check in report.checks:
            writer.writerow([check.identity, check.instance, check.holds, check.detail or ""])
        print(buffer.getvalue(), end="")
    else:
        print(report.render_text())

    if not report.passed:
        first = report.failures[0]
        raise VerificationFailed(
            f"{len(report.failures)} of {len(report.checks)} identities failed, "
            f"first: {first.identity} at {first.instance}"
        )


@app.command()
@handle_errors
def table(
    h_max: Optional[int] = H_MAX_OPTION,
    k: str = DESCENDANTS_OPTION,
    connected: bool = typer.Option(False, "--connected", help="Connected domains only (GW)."),
    fmt: OutputFormat = FORMAT_OPTION,
    out: Optional[Path] = typer.Option(
        None, "--out", dir_okay=False, help="Write to this file instead of standard output."
    ),
) -> None:
    """Tabulate dimension-zero or descendant invariants of degree 1 and 2 over the sweep."""
    run = parse_user_input(
        RunConfig.model_validate,
        {
            "command": "table",
            "output_format": fmt,
            "h_max": config.get_config().h_max if h_max is None else h_max,
        },
    )
    ks = _parse_ints(k, "--k")
    if connected and ks:
        raise InvalidInput("Descendant values are only known for disconnected invariants")

    registry = Registry.empty()
    rows = []
    for s in spin_keys(run.h_max):
        for d in (1, 2):
            if ks:
                value = mp_descendant(d, s, ks)
            else:
                value = gw_dim0(d, s) if connected else gt_dim0(d, s)
            rows.append(TableRow(h=s.genus, p=s.parity.value, d=d, value=format_rational(value)))
            key = local_key(d, s, ks=ks)
            if connected:
                key = InvariantKey(degree=d, spin=s, count=Count.GW)
            registry = registry.with_entry(key, value)

    if run.output_format is OutputFormat.json:
        content = registry.dump()
    elif run.output_format is OutputFormat.csv:
        content = "h,p,d,value\n" + "".join(f"{row.csv_line()}\n" for row in rows)
    else:
        content = "".join(f"{row.h:>3} {row.p} {row.d} {row.value}\n" for row in rows)

    if out is None:
        print(content, end="")
        return
    try:
        out.write_text(content)
    except OSError as e:
        raise InvalidInput(f"Cannot write {out}: {e.strerror}") from e
    log.info("Wrote %d rows to %s", len(rows), out)
