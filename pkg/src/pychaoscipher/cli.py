"""
Command-line interface.

Exit codes: 0 success or all tests passed, 1 statistical failure, 2 usage or
malformed input, 3 I/O error, 4 authentication failure, 5 random source
failure (entropy source unavailable or sampler rejection limit reached).
"""
from __future__ import annotations
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from collections.abc import Sequence

import argparse
import json
import logging
import os
import sys

from rich.console import Console
from rich.logging import RichHandler

from .config import CliConfig
from .crypto.aead import IV_SIZE, KeyMaterial, decrypt, encrypt
from .crypto.chaotic import keystream
from .crypto.primitives import secure_bytes
from .exceptions import (
    AuthenticationFailedError,
    EntropySourceError,
    MalformedMessageError,
    RejectionLimitError,
)
from .julia import (
    DEFAULT_MAX_ITER,
    DEFAULT_WINDOW,
    STABILITY_MAX_ITER,
    Family,
    OmegaSpec,
    render,
    stability_probe,
)
from .statistics.bits import BitSequence
from .statistics.ent import ent_report
from .statistics.nist import run_battery
from .statistics.report import (
    ent_table,
    figure_data,
    results_table,
    results_to_json,
    write_report_csv,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_TEST_FAILURE = 1
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_AUTHENTICATION = 4
EXIT_RANDOM_SOURCE = 5

KEY_SIZE = 32
DEFAULT_TEST_LENGTH = 810

stdout_console = Console()
stderr_console = Console(stderr=True)


def parse_hex(value: str | None, name: str, length: int | None = None) -> bytes:
    if value is None:
        raise ValueError(f"{name} is required")
    try:
        data = bytes.fromhex(value)
    except ValueError as e:
        raise ValueError(f"{name} is not valid hex") from e
    if length is not None and len(data) != length:
        raise ValueError(f"{name} must be {length} bytes ({2 * length} hex chars), got {len(data)}")
    return data


def parse_resolution(value: str) -> tuple[int, int]:
    width, _, height = value.lower().partition("x")
    try:
        return int(width), int(height)
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"resolution must be WxH (got {value!r})") from e


def _config(args: argparse.Namespace) -> CliConfig:
    return CliConfig.resolve(
        {
            "profile": getattr(args, "profile", None),
            "delta": getattr(args, "delta", None),
            "warm_up": getattr(args, "warm_up", None),
            "extraction": getattr(args, "extraction", None),
            "alpha": getattr(args, "alpha", None),
            "output_format": getattr(args, "format", None),
        },
        config_file=getattr(args, "config", None),
    )


def _read_file(path: str) -> bytes:
    with open(path, "rb") as fp:
        return fp.read()


def _write_file(path: str, data: bytes, mode: int = 0o644) -> None:
    fd = os.open(path, os.O_WRONLY | os.O_CREAT | os.O_TRUNC, mode)
    with os.fdopen(fd, "wb") as fp:
        fp.write(data)


def cmd_keygen(args: argparse.Namespace) -> int:
    key_hex = secure_bytes(KEY_SIZE).hex() + "\n"
    if args.out:
        _write_file(args.out, key_hex.encode("ascii"), mode=0o600)
        # O_CREAT only applies the mode to new files
        os.chmod(args.out, 0o600)
    else:
        sys.stdout.write(key_hex)
    return EXIT_OK


def cmd_encrypt(args: argparse.Namespace) -> int:
    config = _config(args)
    key = parse_hex(args.key, "--key")
    ad = parse_hex(args.ad, "--ad")
    iv = parse_hex(args.iv, "--iv", IV_SIZE) if args.iv else None

    plaintext = _read_file(args.input)
    sealed = encrypt(plaintext, key, ad, iv, config.disc, config.extraction, config.warm_up)
    _write_file(args.out, sealed)

    logger.info("Encrypted %d bytes into %s", len(plaintext), args.out)
    return EXIT_OK


def cmd_decrypt(args: argparse.Namespace) -> int:
    config = _config(args)
    key = parse_hex(args.key, "--key")
    ad = parse_hex(args.ad, "--ad")

    sealed = _read_file(args.input)
    plaintext = decrypt(sealed, key, ad, config.disc, config.extraction, config.warm_up)
    _write_file(args.out, plaintext)

    logger.info("Decrypted %d bytes into %s", len(plaintext), args.out)
    return EXIT_OK


def _keystream_from_args(args: argparse.Namespace, config: CliConfig) -> bytes:
    if args.len < 0:
        raise ValueError(f"--len must be non-negative (got {args.len})")

    key = parse_hex(args.key, "--key")
    iv = parse_hex(args.iv, "--iv", IV_SIZE)
    ad = parse_hex(args.ad, "--ad")
    keys = KeyMaterial.derive(key, iv, ad)

    return keystream(keys.stream_key, iv, ad, args.len, config.disc, config.extraction, config.warm_up)


def cmd_keystream(args: argparse.Namespace) -> int:
    """Writes the keystream that ``encrypt`` would use for (key, iv, ad)."""
    data = _keystream_from_args(args, _config(args))
    if args.out:
        _write_file(args.out, data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()
    return EXIT_OK


def cmd_test(args: argparse.Namespace) -> int:
    config = _config(args)

    if args.from_keystream:
        data = _keystream_from_args(args, config)
    elif args.input:
        data = _read_file(args.input)
    else:
        raise ValueError("either --in or --from-keystream is required")
    if len(data) == 0:
        raise ValueError("input is empty")

    if args.suite == "nist":
        results = run_battery(BitSequence.from_bytes(data), config.alpha, args.jobs, args.strict)
        passed = all(r.passed for r in results if r.applicable)

        if args.csv:
            write_report_csv(results, args.csv, {"n_bits": str(8 * len(data)), "alpha": str(config.alpha)})
        if args.figures:
            with open(args.figures, "w") as fp:
                json.dump(figure_data(results), fp, indent=2)
        if args.plot:
            from .plotting import plot_battery_histograms

            plot_battery_histograms(results).savefig(args.plot)

        if config.output_format == "json":
            sys.stdout.write(results_to_json(results) + "\n")
        else:
            stdout_console.print(results_table(results))
    else:
        report = ent_report(data)
        passed = report.passed(config.alpha)

        if config.output_format == "json":
            sys.stdout.write(json.dumps(report.to_dict(config.alpha), indent=2) + "\n")
        else:
            stdout_console.print(ent_table(report, config.alpha))

    return EXIT_OK if passed else EXIT_TEST_FAILURE


def cmd_julia(args: argparse.Namespace) -> int:
    max_iter = args.max_iter or DEFAULT_MAX_ITER
    spec = OmegaSpec(parse_hex(args.seed, "--seed"), args.delta, max_iter)
    julia = render(spec, tuple(args.window), args.res, max_iter, Family(args.family), n_jobs=args.jobs)

    julia.to_pgm(args.out)
    if args.grid:
        julia.to_json(args.grid)
    if args.plot:
        from .plotting import plot_julia

        plot_julia(julia, show_boundary=True).figure.savefig(args.plot)

    logger.info("%s written to %s", julia, args.out)
    return EXIT_OK


def cmd_stability(args: argparse.Namespace) -> int:
    result = stability_probe(
        args.delta,
        args.trials,
        tuple(args.window),
        args.res,
        args.max_iter or STABILITY_MAX_ITER,
        Family(args.family),
        base_seed=parse_hex(args.seed, "--seed"),
        n_jobs=args.jobs,
        show_progress=args.progress,
    )
    sys.stdout.write(json.dumps(result, indent=2) + "\n")
    return EXIT_OK


def _positive_int(value: str) -> int:
    number = int(value)
    if number < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer (got {value})")
    return number


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chaoscipher", description="Chaotic stream cipher toolkit.")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="increase log verbosity")
    subparsers = parser.add_subparsers(dest="command", required=True)

    cipher_options = argparse.ArgumentParser(add_help=False)
    cipher_options.add_argument("--profile", choices=["stable", "chaotic", "custom"])
    cipher_options.add_argument("--delta", type=float, help="disc radius (custom profile only)")
    cipher_options.add_argument("--warm-up", dest="warm_up", type=int)
    cipher_options.add_argument("--extraction", help="per3, accumulate:K or running")
    cipher_options.add_argument("--config", help="INI file with a [chaoscipher] section")

    key_options = argparse.ArgumentParser(add_help=False)
    key_options.add_argument("--key", help="master key (hex)")
    key_options.add_argument("--ad", default="", help="associated data (hex)")

    geometry_options = argparse.ArgumentParser(add_help=False)
    geometry_options.add_argument("--delta", type=float, required=True)
    geometry_options.add_argument(
        "--window", nargs=4, type=float, default=DEFAULT_WINDOW, metavar=("X0", "Y0", "X1", "Y1")
    )
    geometry_options.add_argument("--family", choices=[f.value for f in Family], default="cubic")
    geometry_options.add_argument(
        "--max-iter", dest="max_iter", type=_positive_int,
        help=f"escape budget (default {DEFAULT_MAX_ITER} for julia, {STABILITY_MAX_ITER} for stability)",
    )
    geometry_options.add_argument("--jobs", type=_positive_int, default=1)

    p = subparsers.add_parser("keygen", help="generate a 32-byte key")
    p.add_argument("--out")
    p.set_defaults(func=cmd_keygen)

    p = subparsers.add_parser("encrypt", parents=[cipher_options, key_options], help="encrypt a file")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--iv", help="16-byte IV (hex), random by default")
    p.set_defaults(func=cmd_encrypt)

    p = subparsers.add_parser(
        "decrypt",
        parents=[cipher_options, key_options],
        help="decrypt a file",
        description="Cipher options must match the ones used to encrypt, they are not authenticated: "
        "a mismatch decrypts to garbage without error.",
    )
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_decrypt)

    p = subparsers.add_parser("keystream", parents=[cipher_options, key_options], help="dump raw keystream bytes")
    p.add_argument("--iv", required=True)
    p.add_argument("--len", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_keystream)

    p = subparsers.add_parser("test", parents=[cipher_options, key_options], help="run a test battery")
    p.add_argument("suite", choices=["nist", "ent"])
    p.add_argument("--in", dest="input")
    p.add_argument("--from-keystream", action="store_true", help="test the keystream of --key/--iv/--ad")
    p.add_argument("--iv")
    p.add_argument("--len", type=int, default=DEFAULT_TEST_LENGTH)
    p.add_argument("--alpha", type=float)
    p.add_argument("--format", choices=["text", "json"])
    p.add_argument("--json", dest="format", action="store_const", const="json")
    p.add_argument("--strict", action="store_true", help="enforce the standard applicability gates")
    p.add_argument("--jobs", type=_positive_int, default=1)
    p.add_argument("--csv", help="also write the NIST report as CSV")
    p.add_argument("--figures", help="write NIST histogram data as JSON")
    p.add_argument("--plot", help="save NIST histograms as an image")
    p.set_defaults(func=cmd_test)

    p = subparsers.add_parser("julia", parents=[geometry_options], help="render a random Julia set")
    p.add_argument("--seed", default="00")
    p.add_argument("--res", type=parse_resolution, default=(256, 256))
    p.add_argument("--out", required=True, help="PGM image")
    p.add_argument("--grid", help="JSON dump of the escape iterations")
    p.add_argument("--plot", help="also save a color rendering")
    p.set_defaults(func=cmd_julia)

    p = subparsers.add_parser("stability", parents=[geometry_options], help="probe Julia set stability")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", default="737461626c65", help="base seed of the trial pairs (hex)")
    p.add_argument("--res", type=parse_resolution, default=(128, 128))
    p.add_argument("--progress", action="store_true")
    p.set_defaults(func=cmd_stability)

    return parser


def _setup_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity == 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(
        level=level,
        format="%(message)s",
        handlers=[RichHandler(console=stderr_console, show_path=False)],
        force=True,
    )


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else EXIT_OK

    _setup_logging(args.verbose)

    try:
        return args.func(args)
    except AuthenticationFailedError as e:
        stderr_console.print(str(e), markup=False)
        return EXIT_AUTHENTICATION
    except MalformedMessageError as e:
        stderr_console.print(str(e), markup=False)
        return EXIT_USAGE
    except ValueError as e:
        stderr_console.print(f"error: {e}", markup=False)
        return EXIT_USAGE
    except OSError as e:
        stderr_console.print(f"I/O error: {e}", markup=False)
        return EXIT_IO
    except (EntropySourceError, RejectionLimitError) as e:
        stderr_console.print(f"random source failure: {e}", markup=False)
        return EXIT_RANDOM_SOURCE


if __name__ == "__main__":
    sys.exit(main())
