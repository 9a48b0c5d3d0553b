"""Thin command-line client for the ground-state preparation service.

Every subcommand builds a request, sends it to the service — in-process
by default, over HTTP when ``--server`` is given — and renders the JSON
response as text, JSON, or CSV.  All computation happens behind the
service API, so a command line and a remote deployment produce
byte-identical result files.

Exit codes: 0 on success, 1 on configuration or transport errors (before
any compute), 2 when a multi-cell run completed with failed cells.
"""

from __future__ import annotations

import asyncio
import json
import os
import sys
from pathlib import Path

import click
import httpx

CONTEXT_SETTINGS = {"help_option_names": ["-h", "--help"]}


# ------------------------------------------------------------- service calls


async def _request_async(server: str | None, method: str, path: str, payload):
    if server:
        async with httpx.AsyncClient(base_url=server, timeout=None) as client:
            response = await client.request(method, path, json=payload)
            return response.status_code, response.json()
    from .service import create_app

    transport = httpx.ASGITransport(app=create_app())
    async with httpx.AsyncClient(
        transport=transport, base_url="http://service", timeout=None
    ) as client:
        response = await client.request(method, path, json=payload)
        return response.status_code, response.json()


def call_service(ctx: click.Context, path: str, payload=None, method: str = "POST"):
    server = ctx.obj["server"]
    try:
        status, body = asyncio.run(_request_async(server, method, path, payload))
    except httpx.HTTPError as exc:
        raise click.ClickException(f"cannot reach service at {server}: {exc}")
    if status >= 400:
        detail = body.get("detail", body) if isinstance(body, dict) else body
        raise click.ClickException(f"{path} rejected: {detail}")
    return body


# ------------------------------------------------------------ config plumbing


def _parse_key_values(path: str) -> dict:
    """KEY=VALUE lines, '#' comments; repeated keys accumulate into lists."""
    values: dict = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise click.ClickException(f"{path}:{lineno}: expected KEY=VALUE")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        value = value.strip()
        if key in values:
            previous = values[key]
            if not isinstance(previous, list):
                previous = [previous]
            values[key] = previous + [value]
        else:
            values[key] = value
    return values


def _normalize_for(command: click.Command, values: dict) -> dict:
    """Adapt flat config values to the command's parameters.

    Keys may use either the parameter name or the flag spelling.  Multi-value
    options take lists; single strings are split on commas so
    ``ansatz=aga,uccsd`` works in a config file.
    """
    aliases = {}
    for param in command.params:
        for opt in getattr(param, "opts", ()):
            if opt.startswith("--"):
                aliases[opt[2:].replace("-", "_")] = param.name
    out = {aliases.get(key, key): value for key, value in values.items()}
    for param in command.params:
        if param.name in out and getattr(param, "multiple", False):
            value = out[param.name]
            if not isinstance(value, list):
                value = [value]
            out[param.name] = tuple(
                piece for item in value for piece in str(item).split(",") if piece
            )
    return out


def _int_list(text: str) -> list[int]:
    return [int(p) for p in text.split(",") if p.strip()] if text else []


def _float_list(text: str) -> list[float]:
    return [float(p) for p in text.split(",") if p.strip()]


# ------------------------------------------------------------ output plumbing


def emit(ctx: click.Context, text: str, output: str | None) -> None:
    if output is None:
        click.echo(text, nl=False)
        return
    path = Path(output)
    if not path.is_absolute():
        path = Path(ctx.obj["output_dir"]) / path
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    click.echo(f"wrote {path}")


def as_json(body: dict) -> str:
    return json.dumps(body, sort_keys=True, indent=2) + "\n"


def _compact(value) -> str:
    return json.dumps(value, sort_keys=True, separators=(",", ":"))


def _echo_safe(config: dict) -> dict:
    """Swap inline file bodies for checksums in comment-line echoes."""
    import hashlib

    out = dict(config)
    text = out.get("fcidump")
    if isinstance(text, str):
        out["fcidump"] = {
            "sha256": hashlib.sha256(text.encode()).hexdigest(),
            "chars": len(text),
        }
    points = out.get("points")
    if isinstance(points, list):
        out["points"] = [
            {
                "bond_distance": p.get("bond_distance"),
                "sha256": hashlib.sha256(p["text"].encode()).hexdigest(),
            }
            for p in points
        ]
    return out


def config_echo(config: dict) -> str:
    pairs = " ".join(f"{k}={_compact(v)}" for k, v in sorted(_echo_safe(config).items()))
    return f"# config {pairs}"


def csv_with_config(csv_text: str, config: dict) -> str:
    lines = csv_text.splitlines()
    return "\n".join([lines[0], config_echo(config)] + lines[1:]) + "\n"


def _fmt(value, spec: str) -> str:
    return "" if value is None else format(value, spec)


# ------------------------------------------------------------ shared options


def molecule_options(f):
    f = click.option(
        "--fixture", default=None, help="Bundled molecule name (see `fixtures`)."
    )(f)
    f = click.option(
        "--fcidump",
        type=click.Path(exists=True, dir_okay=False),
        default=None,
        help="Path to an FCIDUMP file (sent inline).",
    )(f)
    f = click.option(
        "--bond-distance",
        type=float,
        default=None,
        help="Bond distance metadata for --fcidump input.",
    )(f)
    f = click.option(
        "--mapping", type=click.Choice(["jw", "bk"]), default="bk", show_default=True
    )(f)
    f = click.option(
        "--freeze",
        default="",
        help="Comma-separated occupied spatial orbitals folded into the core.",
    )(f)
    f = click.option(
        "--discard",
        default="",
        help="Comma-separated virtual spatial orbitals dropped from the space.",
    )(f)
    return f


def molecule_payload(fixture, fcidump, bond_distance, mapping, freeze, discard) -> dict:
    if (fixture is None) == (fcidump is None):
        raise click.ClickException("provide exactly one of --fixture or --fcidump")
    payload = {
        "mapping": mapping,
        "freeze": _int_list(freeze),
        "discard": _int_list(discard),
    }
    if fixture is not None:
        payload["fixture"] = fixture
    else:
        payload["fcidump"] = Path(fcidump).read_text()
        payload["bond_distance"] = bond_distance
    return payload


def optimizer_options(f):
    f = click.option("--seed", type=int, default=0, show_default=True)(f)
    f = click.option("--max-iterations", type=int, default=2000, show_default=True)(f)
    f = click.option(
        "--gradient-tolerance", type=float, default=1e-8, show_default=True
    )(f)
    return f


def output_options(default_format: str, choices: tuple[str, ...]):
    def wrap(f):
        f = click.option(
            "--format",
            "fmt",
            type=click.Choice(choices),
            default=default_format,
            show_default=True,
        )(f)
        f = click.option(
            "-o",
            "--output",
            default=None,
            help="Write to this file (relative paths land in the output directory).",
        )(f)
        return f

    return wrap


# -------------------------------------------------------------------- group


@click.group(context_settings=CONTEXT_SETTINGS)
@click.option(
    "--server",
    default=None,
    help="Base URL of a running service; default runs the service in-process.",
)
@click.option(
    "--config",
    "config_path",
    type=click.Path(exists=True, dir_okay=False),
    default=None,
    help="KEY=VALUE file supplying defaults; explicit flags win.",
)
@click.option(
    "--output-dir",
    envvar="CDPREP_OUTPUT_DIR",
    default=".",
    show_default=True,
    help="Directory for relative --output paths (env CDPREP_OUTPUT_DIR).",
)
@click.option(
    "--threads",
    type=click.IntRange(min=1),
    default=None,
    help="Cap the linear-algebra thread pool for in-process runs.",
)
@click.pass_context
def cli(ctx, server, config_path, output_dir, threads):
    """Molecular ground-state preparation toolkit."""
    if threads is not None:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ[var] = str(threads)
    ctx.obj = {"server": server, "output_dir": output_dir}
    if config_path and ctx.invoked_subcommand:
        command = cli.commands.get(ctx.invoked_subcommand)
        if command is not None:
            values = _normalize_for(command, _parse_key_values(config_path))
            ctx.default_map = {ctx.invoked_subcommand: values}


# ----------------------------------------------------------------- commands


@cli.command()
@click.pass_context
def fixtures(ctx):
    """List the bundled molecules."""
    from .fixtures import list_fixtures, load_fixture

    for name in list_fixtures():
        integrals = load_fixture(name)
        click.echo(
            f"{name}: {integrals.n_electrons} electrons in "
            f"{integrals.n_spatial_orbitals} spatial orbitals"
            + (
                f", {integrals.bond_distance} angstrom"
                if integrals.bond_distance is not None
                else ""
            )
        )


@cli.command("map")
@molecule_options
@click.option("--verify", is_flag=True, help="Cross-check both encodings' spectra.")
@output_options("text", ("text", "json"))
@click.pass_context
def map_cmd(
    ctx, fixture, fcidump, bond_distance, mapping, freeze, discard, verify, fmt, output
):
    """Encode a molecule as a qubit operator and dump it."""
    payload = molecule_payload(fixture, fcidump, bond_distance, mapping, freeze, discard)
    payload["verify"] = verify
    body = call_service(ctx, "/api/map", payload)
    if fmt == "json":
        emit(ctx, as_json(body), output)
        return 0
    histogram = " ".join(
        f"{w}:{c}" for w, c in sorted(body["weight_histogram"].items(), key=lambda kv: int(kv[0]))
    )
    lines = [
        config_echo(body["config"]),
        f"n_qubits={body['n_qubits']} n_terms={body['n_terms']} "
        f"max_weight={body['max_weight']}",
        f"weights: {histogram}",
    ]
    if verify:
        lines.append(
            f"isospectral={str(body['isospectral']).lower()} "
            f"max_deviation={body['spectral_deviation']:.3e}"
        )
    text = "\n".join(lines) + "\n" + body["dump"]
    emit(ctx, text, output)
    return 0


@cli.command("ground-state")
@molecule_options
@output_options("json", ("json", "text"))
@click.pass_context
def ground_state_cmd(
    ctx, fixture, fcidump, bond_distance, mapping, freeze, discard, fmt, output
):
    """Lowest eigenpair of the encoded molecular Hamiltonian."""
    payload = molecule_payload(fixture, fcidump, bond_distance, mapping, freeze, discard)
    body = call_service(ctx, "/api/ground-state", payload)
    if fmt == "json":
        emit(ctx, as_json(body), output)
        return 0
    text = (
        config_echo(body["config"])
        + "\n"
        + f"energy={body['energy']:.12e}\n"
        + f"hf_energy={body['hf_energy']:.12e}\n"
        + f"gap={body['gap']:.6e} iterations={body['iterations']} "
        + f"residual={body['residual_norm']:.3e} "
        + f"degenerate={str(body['degenerate']).lower()}\n"
    )
    emit(ctx, text, output)
    return 0


@cli.command()
@molecule_options
@click.option("--n-steps", type=int, default=100, show_default=True)
@click.option("--step-size", type=float, default=0.1, show_default=True)
@click.option(
    "--cd-order",
    type=int,
    default=0,
    show_default=True,
    help="Gauge-drive expansion order; 0 evolves without the drive term.",
)
@click.option(
    "--term-order",
    type=click.Choice(["lexicographic", "magnitude-descending"]),
    default="lexicographic",
    show_default=True,
)
@click.option("--cd-separate-layer", is_flag=True)
@click.option("--record-trajectory", is_flag=True)
@output_options("json", ("json", "csv"))
@click.pass_context
def evolve(
    ctx,
    fixture,
    fcidump,
    bond_distance,
    mapping,
    freeze,
    discard,
    n_steps,
    step_size,
    cd_order,
    term_order,
    cd_separate_layer,
    record_trajectory,
    fmt,
    output,
):
    """Digitized interpolation from the mean-field to the full Hamiltonian."""
    payload = molecule_payload(fixture, fcidump, bond_distance, mapping, freeze, discard)
    payload.update(
        n_steps=n_steps,
        step_size=step_size,
        cd_order=cd_order or None,
        term_order=term_order,
        cd_separate_layer=cd_separate_layer,
        record_trajectory=record_trajectory,
    )
    body = call_service(ctx, "/api/evolve", payload)
    if fmt == "json":
        emit(ctx, as_json(body), output)
        return 0
    cfg = body["config"]
    lines = [
        "# schema=1",
        config_echo(cfg),
        "n_steps,step_size,total_time,cd_order,e0,energy,epsilon",
        ",".join(
            [
                str(cfg["n_steps"]),
                _fmt(cfg["step_size"], ".6g"),
                _fmt(body["total_time"], ".6g"),
                "" if cfg["cd_order"] is None else str(cfg["cd_order"]),
                _fmt(body["e0"], ".12e"),
                _fmt(body["energy"], ".12e"),
                _fmt(body["epsilon"], ".12e"),
            ]
        ),
    ]
    emit(ctx, "\n".join(lines) + "\n", output)
    return 0


@cli.command()
@molecule_options
@click.option("--dt-grid", default="0.05,0.1,0.2,0.4", show_default=True)
@click.option("--n-grid", default="10,25,50,100", show_default=True)
@click.option(
    "--cd-order",
    type=int,
    default=1,
    show_default=True,
    help="Gauge-drive expansion order; 0 sweeps the bare evolution only.",
)
@output_options("csv", ("csv", "json"))
@click.pass_context
def sweep(
    ctx,
    fixture,
    fcidump,
    bond_distance,
    mapping,
    freeze,
    discard,
    dt_grid,
    n_grid,
    cd_order,
    fmt,
    output,
):
    """Convergence map over a (step size x step count) grid."""
    payload = molecule_payload(fixture, fcidump, bond_distance, mapping, freeze, discard)
    payload.update(
        dt_grid=_float_list(dt_grid),
        n_grid=_int_list(n_grid),
        cd_order=cd_order or None,
    )
    body = call_service(ctx, "/api/sweep", payload)
    if fmt == "json":
        emit(ctx, as_json(body), output)
    else:
        emit(ctx, csv_with_config(body["csv"], body["config"]), output)
    failed = [r for r in body["rows"] if r["error"]]
    for r in failed:
        click.echo(
            f"warning: cell dt={r['step_size']} N={r['n_steps']} failed: {r['error']}",
            err=True,
        )
    return 2 if failed else 0


def _vqe_row_csv(body: dict) -> str:
    lines = [
        "# schema=1",
        config_echo(body["config"]),
        "label,n_parameters,n_pauli_terms,energy,e0,epsilon,chemical_accuracy",
        ",".join(
            [
                body["label"],
                str(body["n_parameters"]),
                str(body["n_pauli_terms"]),
                _fmt(body["energy"], ".12e"),
                _fmt(body["e0"], ".12e"),
                _fmt(body["epsilon"], ".12e"),
                str(body["chemical_accuracy"]).lower(),
            ]
        ),
    ]
    return "\n".join(lines) + "\n"


@cli.command()
@molecule_options
@click.option(
    "--ansatz",
    type=click.Choice(["aga", "agar", "uccsd", "kupccgsd"]),
    default="aga",
    show_default=True,
)
@click.option("--k", type=int, default=1, show_default=True, help="Blocks for kupccgsd.")
@click.option(
    "--uccsd-mode",
    type=click.Choice(["index-ordered", "spin-orbital", "singlet"]),
    default="index-ordered",
    show_default=True,
)
@click.option(
    "--pool-order", type=int, default=1, show_default=True, help="Gauge pool order."
)
@click.option(
    "--agp-reference-lambda",
    type=float,
    default=0.5,
    show_default=True,
    help="Interpolation point where the gauge pool is assembled.",
)
@optimizer_options
@output_options("json", ("json", "csv"))
@click.pass_context
def vqe(
    ctx,
    fixture,
    fcidump,
    bond_distance,
    mapping,
    freeze,
    discard,
    ansatz,
    k,
    uccsd_mode,
    pool_order,
    agp_reference_lambda,
    seed,
    max_iterations,
    gradient_tolerance,
    fmt,
    output,
):
    """Variational ground-state search with a named ansatz."""
    payload = molecule_payload(fixture, fcidump, bond_distance, mapping, freeze, discard)
    payload.update(
        ansatz=ansatz,
        k=k,
        uccsd_mode=uccsd_mode,
        pool_order=pool_order,
        reference_lambda=agp_reference_lambda,
        seed=seed,
        max_iterations=max_iterations,
        gradient_tolerance=gradient_tolerance,
    )
    body = call_service(ctx, "/api/vqe", payload)
    emit(ctx, as_json(body) if fmt == "json" else _vqe_row_csv(body), output)
    return 0


@cli.command()
@molecule_options
@click.option("--threshold", type=float, default=1e-3, show_default=True)
@click.option("--max-ops", type=int, default=30, show_default=True)
@optimizer_options
@output_options("json", ("json", "csv"))
@click.pass_context
def adapt(
    ctx,
    fixture,
    fcidump,
    bond_distance,
    mapping,
    freeze,
    discard,
    threshold,
    max_ops,
    seed,
    max_iterations,
    gradient_tolerance,
    fmt,
    output,
):
    """Adaptive ansatz growth by largest selection gradient."""
    payload = molecule_payload(fixture, fcidump, bond_distance, mapping, freeze, discard)
    payload.update(
        threshold=threshold,
        max_ops=max_ops,
        seed=seed,
        max_iterations=max_iterations,
        gradient_tolerance=gradient_tolerance,
    )
    body = call_service(ctx, "/api/adapt", payload)
    emit(ctx, as_json(body) if fmt == "json" else _vqe_row_csv(body), output)
    return 0


def _read_manifest(path: str) -> dict:
    values = _parse_key_values(path)
    manifest = {}
    for key in ("molecule", "mapping", "freeze", "discard"):
        if key in values:
            if isinstance(values[key], list):
                raise click.ClickException(f"manifest key {key} given more than once")
            manifest[key] = values[key]
    for key in ("fixture", "point", "ansatz"):
        if key in values:
            items = values[key] if isinstance(values[key], list) else [values[key]]
            manifest[key] = [p for item in items for p in item.split(",") if p]
    return manifest


@cli.command()
@click.option("--manifest", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--molecule", default=None, help="Label recorded alongside the results.")
@click.option("--fixture", "fixture_names", multiple=True)
@click.option(
    "--point",
    "points",
    multiple=True,
    help="DISTANCE:PATH pair adding one FCIDUMP file to the scan.",
)
@click.option("--ansatz", "ansatzes", multiple=True, help="May repeat; e.g. aga, uccsd.")
@click.option("--mapping", type=click.Choice(["jw", "bk"]), default="bk", show_default=True)
@click.option("--freeze", default="")
@click.option("--discard", default="")
@click.option("--pool-order", type=int, default=1, show_default=True)
@click.option("--adapt-threshold", type=float, default=1e-3, show_default=True)
@click.option("--adapt-max-ops", type=int, default=30, show_default=True)
@optimizer_options
@output_options("csv", ("csv", "json"))
@click.pass_context
def scan(
    ctx,
    manifest,
    molecule,
    fixture_names,
    points,
    ansatzes,
    mapping,
    freeze,
    discard,
    pool_order,
    adapt_threshold,
    adapt_max_ops,
    seed,
    max_iterations,
    gradient_tolerance,
    fmt,
    output,
):
    """Variational runs across bond-distance points and ansatz choices."""
    if manifest:
        data = _read_manifest(manifest)
        molecule = molecule or data.get("molecule")
        if ctx.get_parameter_source("mapping").name == "DEFAULT" and "mapping" in data:
            mapping = data["mapping"]
        if not freeze:
            freeze = data.get("freeze", "")
        if not discard:
            discard = data.get("discard", "")
        fixture_names = fixture_names or tuple(data.get("fixture", ()))
        points = points or tuple(data.get("point", ()))
        ansatzes = ansatzes or tuple(data.get("ansatz", ()))
    if not ansatzes:
        ansatzes = ("aga",)
    point_payloads = []
    for item in points:
        distance, sep, path = item.partition(":")
        if not sep:
            raise click.ClickException(f"--point needs DISTANCE:PATH, got {item!r}")
        file = Path(path)
        if not file.is_file():
            raise click.ClickException(f"scan point file not found: {path}")
        point_payloads.append(
            {"text": file.read_text(), "bond_distance": float(distance)}
        )
    payload = {
        "molecule": molecule,
        "fixtures": list(fixture_names),
        "points": point_payloads,
        "mapping": mapping,
        "freeze": _int_list(freeze),
        "discard": _int_list(discard),
        "ansatzes": list(ansatzes),
        "pool_order": pool_order,
        "adapt_threshold": adapt_threshold,
        "adapt_max_ops": adapt_max_ops,
        "seed": seed,
        "max_iterations": max_iterations,
        "gradient_tolerance": gradient_tolerance,
    }
    body = call_service(ctx, "/api/scan", payload)
    if fmt == "json":
        emit(ctx, as_json(body), output)
    else:
        emit(ctx, csv_with_config(body["csv"], body["config"]), output)
    failed = [r for r in body["rows"] if r["error"]]
    for r in failed:
        click.echo(
            f"warning: cell {r['ansatz']} at {r['bond_distance']} failed: {r['error']}",
            err=True,
        )
    return 2 if failed else 0


@cli.command("agp-check")
@click.option("--fixture", default="h2_0.7414", show_default=True)
@click.option("--mapping", type=click.Choice(["jw", "bk"]), default="bk", show_default=True)
@output_options("text", ("text", "json"))
@click.pass_context
def agp_check(ctx, fixture, mapping, fmt, output):
    """Closed-form and dense-oracle validation of the gauge-potential solver."""
    body = call_service(ctx, "/api/agp-check", {"fixture": fixture, "mapping": mapping})
    emit(ctx, as_json(body) if fmt == "json" else body["text"], output)
    if not body["passed"]:
        raise click.ClickException("gauge checks failed")
    return 0


@cli.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=host, port=port)


def main(argv=None) -> int:
    """Console entry point with the documented exit-code mapping."""
    try:
        result = cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.ClickException as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        return 1
    except click.Abort:
        click.echo("aborted", err=True)
        return 1
    return int(result) if isinstance(result, int) else 0


if __name__ == "__main__":
    sys.exit(main())
