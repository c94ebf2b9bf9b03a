from __future__ import annotations
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from typing import Any

import warnings

from .._typing import FilePath


def read_csv_metadata(filename: FilePath, prefix_char: str = "#") -> dict[str, str]:
    """Reads the ``# key: value`` header lines at the top of a CSV file.

    Parameters
    ----------
    filename : str
        CSV file to process.
    prefix_char : str (length 1), default="#"
        Prefix character of the metadata lines.

    Returns
    -------
    dict[str, str]
        Metadata keys mapped to their values. Keys without a value map to ``"true"``.
    """
    if len(prefix_char) != 1:
        raise ValueError(f"Metadata prefix must be a single character (got {prefix_char!r})")

    metadata = {}

    with open(filename, errors="ignore") as fp:
        for row in fp:
            row = row.strip()
            if not row.startswith(prefix_char):
                break

            row = row[1:].strip().rstrip(";")
            key, sep, value = row.partition(":")
            metadata[key.strip()] = value.strip() if sep else "true"

    return metadata


def write_csv_metadata(
    filename: FilePath, metadata: dict[str, str], prefix_char: str = "#"
) -> None:
    """Creates ``filename`` with a metadata header, the table is appended afterwards."""
    if len(prefix_char) != 1:
        raise ValueError(f"Metadata prefix must be a single character (got {prefix_char!r})")

    with open(filename, "w") as fp:
        for key, value in metadata.items():
            fp.write(f"{prefix_char} {key}: {value}\n")


def dispatch_to_appropriate_loader(filename: FilePath, scope: object) -> Any:
    """Loads a CSV file with the loader matching its ``format_version``.

    The loader is the ``_load_v<major>_<minor>`` attribute of ``scope``. If the
    file has no version or its loader fails, every available loader is tried.

    Warns
    -----
    RuntimeWarning
        If a format version is given but no loader exists for it.

    Raises
    ------
    RuntimeError
        If no loader can read the file.
    """
    format_version = read_csv_metadata(filename).get("format_version", None)

    if format_version:
        func = getattr(scope, "_load_v" + format_version.replace(".", "_"), None)
        if func:
            return func(filename)

        warnings.warn(
            f"No loader for format version {format_version}, trying available loaders "
            f"(filename: {filename})",
            RuntimeWarning,
        )

    for func_name in sorted(name for name in dir(scope) if name.startswith("_load_v")):
        try:
            return getattr(scope, func_name)(filename)
        except Exception:
            pass

    raise RuntimeError(
        f"Can not find a working loader for file "
        f"(filename: {filename}, format version: {format_version})"
    )
