"""
Command-line entry point: ``python -m workbench <subcommand> [flags]``.

Exit codes: 0 success, 1 usage error, 2 numerical failure or failed
verification, 3 output failure.
"""

from __future__ import annotations

import logging
import os
import sys

import django
from django.core.management import call_command
from django.core.management.base import CommandError

from superrmt.errors import WorkbenchError
from .config import SUBCOMMANDS

logger = logging.getLogger(__name__)

USAGE = f"usage: workbench {{{','.join(SUBCOMMANDS)}}} [options]; '<subcommand> --help' lists the options\n"


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    os.environ.setdefault("DJANGO_SETTINGS_MODULE", "superrmt.settings")
    django.setup()
    if not argv:
        sys.stderr.write(USAGE)
        return 1
    if argv[0] in ("-h", "--help"):
        sys.stdout.write(USAGE)
        return 0
    name, rest = argv[0], argv[1:]
    logger.debug("workbench %s %s", name, rest)
    if name not in SUBCOMMANDS:
        sys.stderr.write(f"unknown subcommand {name!r}\n{USAGE}")
        return 1
    try:
        call_command(name, *rest)
    except CommandError as exc:
        sys.stderr.write(f"{name}: {exc}\n")
        return exc.returncode
    except WorkbenchError as exc:
        sys.stderr.write(f"{name}: {exc}\n")
        return exc.exit_code
    except SystemExit as exc:
        # --help exits from inside the parser
        return exc.code if isinstance(exc.code, int) else 0
    return 0
