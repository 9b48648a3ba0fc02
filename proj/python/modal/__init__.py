"""Mode checker for a small HAL subset."""

from ._modal import CheckReport, Diagnostic, DumpReport, OracleReport, check, dump_ti, run_oracle


def check_file(path, **options):
    with open(path, encoding="utf-8") as f:
        return check(f.read(), **options)


__all__ = [
    "CheckReport",
    "Diagnostic",
    "DumpReport",
    "OracleReport",
    "check",
    "check_file",
    "dump_ti",
    "run_oracle",
]
