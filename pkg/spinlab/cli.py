"""Shared plumbing for the management commands.

Every command subclasses :class:`SpinLabCommand`, which adds the common
flags, merges a ``--config`` document, runs the command body, and emits a
:class:`~spinlab.reports.RunReport`. Library errors become
``CommandError`` with the error's exit code.
"""
from __future__ import annotations

import os
import time
from pathlib import Path
from typing import Any, Sequence

from django.core.management import execute_from_command_line
from django.core.management.base import BaseCommand, CommandError

from spinlab.exceptions import SpinLabError, UsageError
from spinlab.graphs import Graph, read_graph
from spinlab.reports import FORMATS, RunReport, read_model_config, write_output
from spinlab.systems import MODELS, SpinSystem, build_system

# options every Django command carries; not echoed into reports
DJANGO_OPTIONS = frozenset(
    {"verbosity", "settings", "pythonpath", "traceback", "no_color", "force_color", "skip_checks", "args"}
)
OUTPUT_OPTIONS = frozenset({"out", "format", "save", "config"})

# config-document keys -> option names
CONFIG_OPTIONS = {"lambda": "lam"}


class SpinLabCommand(BaseCommand):
    #: fallbacks for common options left unset on the command line and in --config
    defaults: dict[str, Any] = {
        "model": "hardcore",
        "lam": 1.0,
        "seed": 0,
        "steps": 10_000,
        "burnin": 1_000,
        "chains": 4,
    }

    def add_arguments(self, parser):
        common = parser.add_argument_group("common options")
        common.add_argument("--graph", type=Path, help="edge-list file")
        common.add_argument("--model", choices=MODELS, help="spin model")
        common.add_argument("--lambda", dest="lam", type=float, help="fugacity")
        common.add_argument("--k", type=int, help="number of colours")
        common.add_argument("--seed", type=int, help="random seed")
        common.add_argument("--steps", type=int, help="Markov chain steps")
        common.add_argument("--burnin", type=int, help="steps discarded before averaging")
        common.add_argument("--chains", type=int, help="independent chains")
        common.add_argument("--out", type=Path, help="write the report to this file")
        common.add_argument("--format", choices=FORMATS, default="json", help="report format")
        common.add_argument("--cap", type=int, help="enumeration cap for this run")
        common.add_argument("--config", type=Path, help="model-config document")
        common.add_argument("--save", action="store_true", help="store the report in the database")
        self.add_command_arguments(parser)

    def add_command_arguments(self, parser) -> None:
        """Hook for command-specific flags."""

    @property
    def command_name(self) -> str:
        return self.__module__.rsplit(".", 1)[-1]

    def resolve(self, options: dict[str, Any]) -> dict[str, Any]:
        """Fill unset options from the config document, then from :attr:`defaults`."""
        resolved = dict(options)
        if options.get("config"):
            for key, value in read_model_config(options["config"]).items():
                name = CONFIG_OPTIONS.get(key, key)
                if resolved.get(name) is None:
                    resolved[name] = Path(value) if name == "graph" else value
        for name, value in self.defaults.items():
            if resolved.get(name) is None:
                resolved[name] = value
        return resolved

    def inputs(self, options: dict[str, Any]) -> dict[str, Any]:
        return {
            key: (str(value) if isinstance(value, Path) else value)
            for key, value in sorted(options.items())
            if key not in DJANGO_OPTIONS | OUTPUT_OPTIONS
        }

    def graph(self, options: dict[str, Any]) -> Graph:
        if options.get("graph") is None:
            raise UsageError("--graph is required")
        return read_graph(options["graph"])

    def system(self, options: dict[str, Any], graph: Graph | None = None):
        """Build the configured model; returns the system and the matching edge map."""
        graph = self.graph(options) if graph is None else graph
        return build_system(graph, options["model"], options["lam"], options["k"])

    def info(self, message: str, options: dict[str, Any]) -> None:
        if options.get("verbosity", 1) >= 2:
            self.stderr.write(message)

    def warn(self, message: str) -> None:
        self.stderr.write(self.style.WARNING(message))

    #: commands that write their own artifact (gen) skip the report on stdout
    emits_report = True

    def run(self, options: dict[str, Any]) -> dict[str, Any]:
        raise NotImplementedError

    def handle(self, *args, **options):
        started = time.perf_counter()
        try:
            options = self.resolve(options)
            results = self.run(options)
            table = results.pop("table", [])
            report = RunReport(
                command=self.command_name,
                inputs=self.inputs(options),
                seed=options.get("seed"),
                results=results,
                table=table,
            )
            report.wall_time = time.perf_counter() - started
            if self.emits_report:
                write_output(report.render(options["format"]), options.get("out"), self.stdout)
            if options.get("save"):
                saved = report.save()
                self.info(f"saved report #{saved.pk}", options)
        except SpinLabError as exc:
            raise CommandError(str(exc), returncode=exc.exit_code) from exc
        if options.get("out") and self.emits_report:
            self.info(self.style.SUCCESS(f"report written to {options['out']}"), options)


def model_system(system: SpinSystem) -> dict[str, Any]:
    """Echo of the model actually built."""
    return {"model": system.name, "n": system.n, "q": system.q, "edges": system.graph.m}


def dispatch(argv: Sequence[str]) -> int:
    """Run one command line and return its exit code instead of exiting."""
    os.environ.setdefault("DJANGO_SETTINGS_MODULE", "glauber_project.settings")
    try:
        execute_from_command_line(["manage.py", *argv])
    except SystemExit as exc:
        if exc.code is None:
            return 0
        return exc.code if isinstance(exc.code, int) else 1
    return 0
