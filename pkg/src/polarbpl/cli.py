"""Command-line interface.

Exit codes: 0 on success, 1 for configuration/usage errors, 2 for
runtime failures (including a failing self-test).
"""
from __future__ import annotations

import dataclasses
import json
import sys

import click
import numpy as np

from .harness import (CodeBlock, ConfigError, ExperimentConfig, perm_selftest,
                      run_bler, run_latency_census, run_sg, write_bler_csv,
                      write_census_csv)
from .polar import encode as polar_encode

__all__ = ["cli", "main"]


def _parse_snrs(text):
    try:
        return tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise ConfigError(f"--snr: cannot parse {text!r}") from None


def _load_config(path, snr, seed, workers) -> ExperimentConfig:
    config = ExperimentConfig.from_yaml(path)
    if snr is not None:
        config = dataclasses.replace(
            config, channel=dataclasses.replace(
                config.channel, snrs_db=_parse_snrs(snr)))
    if seed is not None:
        config = dataclasses.replace(
            config, channel=dataclasses.replace(config.channel, seed=seed))
    if workers is not None:
        config = dataclasses.replace(
            config, run=dataclasses.replace(config.run, workers=workers))
    return config


@click.group()
def cli():
    """Polar-code BP/BPL decoding experiments."""


@cli.command()
@click.option("--config", "config_path", required=True,
              help="YAML experiment description.")
@click.option("--snr", default=None, help="Comma list overriding the sweep.")
@click.option("--seed", type=int, default=None, help="Override channel seed.")
@click.option("--workers", type=int, default=None, help="Override worker count.")
@click.option("--out", "out_path", default=None,
              help="Output file (stdout when omitted).")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]),
              default="csv", show_default=True)
def bler(config_path, snr, seed, workers, out_path, fmt):
    """Monte-Carlo BLER / iteration-count sweep."""
    config = _load_config(config_path, snr, seed, workers)
    points = run_bler(config)
    if fmt == "json":
        doc = {"config": config.to_dict(),
               "points": [dataclasses.asdict(p) for p in points]}
        _emit(out_path, json.dumps(doc, indent=2) + "\n")
    else:
        write_bler_csv(points, out_path if out_path else sys.stdout)
        if out_path:
            sidecar = str(out_path) + ".config.json"
            with open(sidecar, "w") as f:
                json.dump(config.to_dict(), f, indent=2)
                f.write("\n")


@cli.command()
@click.option("--n", type=int, required=True, help="Number of stages.")
@click.option("--p", type=int, default=0, show_default=True,
              help="Leading stages pinned in place.")
@click.option("--out", "out_path", default=None)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]),
              default="csv", show_default=True)
def census(n, p, out_path, fmt):
    """Exact shuffling-latency census over all stage orders."""
    result = run_latency_census(n, p)
    if fmt == "json":
        doc = dataclasses.asdict(result)
        doc["pgu_hist"] = {str(k): v for k, v in sorted(result.pgu_hist.items())}
        doc["fraction_below_80"] = result.fraction_below(80)
        _emit(out_path, json.dumps(doc, indent=2) + "\n")
    else:
        write_census_csv(result, out_path if out_path else sys.stdout)


@cli.command()
@click.option("--config", "config_path", required=True,
              help="YAML experiment description (pfg block drives selection).")
@click.option("--seed", type=int, default=None, help="Override channel seed.")
@click.option("--out", "out_path", required=True,
              help="Where to write the selected graph list.")
def select(config_path, seed, out_path):
    """Greedy graph-list selection from a fresh failure dataset."""
    config = _load_config(config_path, None, seed, None)
    _, report = run_sg(config, out_path)
    click.echo(json.dumps(report, indent=2))


@cli.command()
@click.option("--n-max", type=int, default=6, show_default=True)
@click.option("--random-count", type=int, default=1000, show_default=True)
@click.option("--fault", default=None, hidden=True,
              help="Negate one property to exercise the failure path.")
@click.option("--out", "out_path", default=None)
def selftest(n_max, random_count, fault, out_path):
    """Property self-test of the permutation engine (JSON report)."""
    report = perm_selftest(n_max=n_max, random_count=random_count, fault=fault)
    _emit(out_path, json.dumps(report, indent=2) + "\n")
    return 0 if report["ok"] else 2


@cli.command()
@click.option("--n", type=int, required=True)
@click.option("--k", "K", type=int, required=True, help="Message bits.")
@click.option("--p", "P", type=int, default=11, show_default=True,
              help="CRC bits (0 disables the CRC).")
@click.option("--sequence", default="ga", show_default=True,
              help="'ga', 'nr1024', or a reliability-file path.")
@click.option("--design-snr", type=float, default=2.0, show_default=True)
@click.option("--msg", "msg_bits", default=None,
              help="Bit string of length K; random when omitted.")
@click.option("--seed", type=int, default=1, show_default=True)
def encode(n, K, P, sequence, design_snr, msg_bits, seed):
    """Encode one message and print the codeword bits (debug aid)."""
    code = CodeBlock(n=n, K=K, P=P, sequence=sequence,
                     design_snr_db=design_snr).build()
    if msg_bits is None:
        msg = np.random.default_rng(seed).integers(0, 2, K, dtype=np.uint8)
    else:
        if len(msg_bits) != K or set(msg_bits) - {"0", "1"}:
            raise ConfigError(f"--msg must be a bit string of length {K}")
        msg = np.frombuffer(msg_bits.encode(), dtype=np.uint8) - ord("0")
    click.echo("msg      " + "".join(map(str, msg.tolist())))
    click.echo("codeword " + "".join(map(str, polar_encode(code, msg).tolist())))


def _emit(out_path, text) -> None:
    if out_path:
        with open(out_path, "w") as f:
            f.write(text)
    else:
        click.echo(text, nl=False)


def main(argv=None) -> int:
    """Console entry point mapping errors onto documented exit codes."""
    try:
        rv = cli.main(args=argv, standalone_mode=False)
    except click.ClickException as e:
        e.show()
        return 1
    except click.Abort:
        return 1
    except (ConfigError, ValueError) as e:
        click.echo(f"error: {e}", err=True)
        return 1
    except Exception as e:  # noqa: BLE001 — boundary of the process
        click.echo(f"error: {type(e).__name__}: {e}", err=True)
        return 2
    return int(rv) if isinstance(rv, int) else 0


if __name__ == "__main__":
    sys.exit(main())
