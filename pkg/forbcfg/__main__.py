"""Run the command-line interface."""

from __future__ import annotations

from sys import exit as sys_exit

from forbcfg.cli import main

if __name__ == "__main__":
    sys_exit(main())
