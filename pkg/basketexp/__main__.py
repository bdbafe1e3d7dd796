"""
Command line interface implementation.

Results are CSV on stdout or in --out, diagnostics go to the log on stderr.
"""
import csv
import logging
import sys
import textwrap
from pathlib import Path
import click
from . import exceptions
from .config import (
    MC_METHOD, create_sample_config, instrument_from_dict, read_config,
)
from .expansion import price_basket
from .montecarlo import McConfig, SAMPLERS, price_mc
from .reductions import to_basket
from .tables import (
    SWEEPS, TABLES, evaluate_sweep, evaluate_table, get_sweep, get_table,
)

PRICE_FIELDS = [
    "method", "price", "std_error", "A", "Kstar", "nu2", "alpha", "paths",
    "error",
]


@click.group(context_settings={"help_option_names": ['-h', '--help']})
@click.version_option()  # Auto detect version from package metadata
@click.option(
    "--verbose", "-v", is_flag=True, default=False,
    help="Log progress to stderr",
)
@click.option(
    "--threads", type=click.IntRange(1, None), default=None,
    envvar="BASKETEXP_THREADS", show_envvar=True,
    help="Monte Carlo worker threads",
)
@click.pass_context
def main(ctx, verbose, threads):
    """
    Price basket, Asian and cash dividend options with stochastic expansions.

    Use "basketexp price --sample" to create a sample configuration.
    """
    logging.basicConfig(
        level=logging.INFO if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    ctx.obj = {"threads": threads}


def with_threads(mc_config, threads):
    """Return mc_config using threads workers, unchanged if threads is None."""
    if threads is None:
        return mc_config
    return mc_config._replace(workers=threads)


def write_csv(header, rows, out_path=None):
    """Write rows of dictionaries as CSV to out_path, stdout if None."""
    if out_path is None:
        writer = csv.DictWriter(sys.stdout, header, restval="",
                                extrasaction="ignore", lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        return
    with Path(out_path).open("w", newline="", encoding="utf-8") as out_file:
        writer = csv.DictWriter(out_file, header, restval="",
                                extrasaction="ignore", lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)


def price_row(basket, method, mc_config, sanity_bound):
    """Return the CSV row of one method, with the error text on failure."""
    row = {"method": method}
    try:
        if method == MC_METHOD:
            result = price_mc(basket, mc_config)
        else:
            result = price_basket(basket, method, sanity_bound)
    except exceptions.BasketexpError as err:
        row["error"] = str(err)
        return row
    row["price"] = result.price
    row["std_error"] = "" if result.std_error is None else result.std_error
    for key in ("A", "Kstar", "nu2", "alpha", "paths"):
        if key in result.diagnostics:
            row[key] = result.diagnostics[key]
    return row


@main.command()
@click.option(
    "--config", "config_path",
    default="basketexp.conf",
    type=click.Path(),
    help="run configuration (basketexp.conf)",
)
@click.option(
    "--sample", is_flag=True, default=False,
    help="Create a sample run configuration",
)
@click.option(
    "--out", "out_path", type=click.Path(), default=None,
    help="CSV output file, default stdout or [pricing] output",
)
@click.pass_obj
def price(obj, config_path, sample, out_path):
    """Price the instrument of a configuration with each method."""
    config_path = Path(config_path)
    if sample:
        try:
            create_sample_config(config_path)
        except exceptions.ConfigError as err:
            sys.exit(f"Error: {err}")
        print(textwrap.dedent(f"""\
            Created sample config file "{config_path}"

            Edit this file, then run basketexp price again.\
        """))
        return
    if not config_path.exists():
        raise click.UsageError(textwrap.dedent(f"""\
            can't find config "{config_path}".

            Create a sample (--sample) or specify a file (--config).\
        """))
    try:
        run_config = read_config(config_path)
    except exceptions.ConfigError as err:
        raise click.UsageError(str(err)) from err

    try:
        basket = to_basket(run_config.instrument)
    except exceptions.BasketexpError as err:
        sys.exit(f"Error: {config_path}: {err}")
    mc_config = with_threads(run_config.mc, obj["threads"])
    rows = [
        price_row(basket, method, mc_config, run_config.sanity_bound)
        for method in run_config.methods
    ]
    write_csv(PRICE_FIELDS, rows, out_path or run_config.output)

    failed = [row["method"] for row in rows if "error" in row]
    if failed:
        sys.exit(f"Error: {', '.join(failed)} failed")


def table_footer(header, footer):
    """Return footer rows labelled in the first column."""
    rows = []
    for label, values in footer:
        row = {header[0]: label}
        row.update(values)
        rows.append(row)
    return rows


@main.command()
@click.option(
    "--id", "table_id", required=True,
    type=click.Choice(sorted(TABLES)),
    help="built-in table",
)
@click.option(
    "--paths", default=None, type=click.IntRange(0, None),
    help="Monte Carlo paths, 0 to skip the MC column (table default)",
)
@click.option("--seed", default=0, type=click.IntRange(0, None),
              help="Monte Carlo seed (0)")
@click.option(
    "--sampler", default=None, type=click.Choice(SAMPLERS),
    help="Monte Carlo sampler (table default)",
)
@click.option("--antithetic", is_flag=True, default=False,
              help="Use antithetic draws")
@click.option("--out", "out_path", type=click.Path(), default=None,
              help="CSV output file, default stdout")
@click.pass_obj
def table(obj, table_id, paths, seed, sampler, antithetic, out_path):
    """Regenerate a published table with RMSE and MAE against MC."""
    # One argument per command line option
    # pylint: disable=too-many-arguments
    definition = get_table(table_id)
    if paths is None:
        paths = definition.paths
    mc_config = None
    if paths:
        mc_config = with_threads(
            McConfig(paths=paths, seed=seed,
                     sampler=sampler or definition.sampler,
                     antithetic=antithetic),
            obj["threads"],
        )
    try:
        result = evaluate_table(definition, mc_config)
    except exceptions.BasketexpError as err:
        sys.exit(f"Error: table {table_id}: {err}")
    write_csv(result.header,
              result.rows + table_footer(result.header, result.footer),
              out_path)


@main.command()
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="run configuration with a [sweep] section")
@click.option("--id", "sweep_id", type=click.Choice(sorted(SWEEPS)),
              default=None, help="built-in sweep")
@click.option("--paths", default=None, type=click.IntRange(2, None),
              help="Monte Carlo paths, overrides the configuration")
@click.option("--seed", default=None, type=click.IntRange(0, None),
              help="Monte Carlo seed, overrides the configuration")
@click.option("--sampler", default=None, type=click.Choice(SAMPLERS),
              help="Monte Carlo sampler, overrides the configuration")
@click.option("--antithetic", is_flag=True, default=False,
              help="Use antithetic draws, overrides the configuration")
@click.option("--out", "out_path", type=click.Path(), default=None,
              help="CSV output file, default stdout")
@click.pass_obj
def sweep(obj, config_path, sweep_id, paths, seed, sampler, antithetic,
          out_path):
    """Report expansion errors in bp of notional against MC over strikes."""
    # One argument per command line option
    # pylint: disable=too-many-arguments,too-many-locals
    if (config_path is None) == (sweep_id is None):
        raise click.UsageError("give exactly one of --config or --id")
    if sweep_id is not None:
        definition = get_sweep(sweep_id)
        instrument = instrument_from_dict(definition.instrument)
        grid = definition.sweep
        methods = definition.methods
        mc_config = McConfig(paths=definition.paths, seed=0,
                             sampler=definition.sampler)
    else:
        try:
            run_config = read_config(config_path)
        except exceptions.ConfigError as err:
            raise click.UsageError(str(err)) from err
        if run_config.sweep is None:
            raise click.UsageError(f"{config_path}: missing [sweep] section")
        instrument = run_config.instrument
        grid = run_config.sweep
        methods = run_config.methods
        mc_config = run_config.mc
    if paths is not None:
        mc_config = mc_config._replace(paths=paths)
    if seed is not None:
        mc_config = mc_config._replace(seed=seed)
    if sampler is not None:
        mc_config = mc_config._replace(sampler=sampler)
    if antithetic:
        mc_config = mc_config._replace(antithetic=True)
    mc_config = with_threads(mc_config, obj["threads"])
    try:
        header, rows = evaluate_sweep(instrument, grid, methods, mc_config)
    except exceptions.BasketexpError as err:
        sys.exit(f"Error: {err}")
    write_csv(header, rows, out_path)


if __name__ == "__main__":
    main()  # pylint: disable=no-value-for-parameter
