# -*- coding: UTF-8 -*-
# SPDX-License-Identifier: 0BSD

"""Compare CLI Program Main Functionality"""

import logging
import os

from eljef.core import (applog, cli, fops)
from eljef.workflow.__version__ import VERSION
from eljef.workflow.cli.__compare_args__ import CMD_LINE_ARGS
from eljef.workflow.cli.__compare_vars__ import (DESCRIPTION, NAME)
from eljef.workflow.lib.cli import exit_with_error
from eljef.workflow.lib.errors import WorkflowError
from eljef.workflow.lib.harness import (StrategyMetrics, compare_and_report)

LOGGER = logging.getLogger()


def _read_metrics(path: str) -> list:
    """Reads metrics from a single strategy file or from a comparison report.

    Args:
        path: file written by ej-wg-run

    Returns:
        A list of StrategyMetrics
    """
    data = fops.file_read_convert(path, fops.JSON, default=True)
    if isinstance(data, dict) and 'strategies' in data:
        return [StrategyMetrics.from_json(item) for item in data['strategies'].values()]
    if isinstance(data, dict) and 'strategy' in data:
        return [StrategyMetrics.from_json(data)]

    exit_with_error(f"Not a metrics or report file: {path}")
    return []


def main(**kwargs) -> None:
    """Main functionality for comparisons.

    Keyword Args:
        out (str): File to write the report to.
        reports (list): Metrics files to compare.
    """
    metrics = []
    for path in kwargs.get('reports'):
        metrics.extend(_read_metrics(path))

    try:
        report = compare_and_report(metrics, kwargs.get('out'))
    except WorkflowError as err:
        exit_with_error(str(err))

    for name, value in report['token_reduction_pct'].items():
        LOGGER.info("Token reduction vs %s: %.1f%%", name, value)

    if not report['accepted']:
        exit_with_error("Acceptance thresholds not met, see " + kwargs.get('out'))


def cli_main() -> None:
    """Main functionality when run from CLI."""
    args = cli.args_simple(NAME, DESCRIPTION, CMD_LINE_ARGS)

    if args.version_out:
        cli.print_version(NAME, VERSION)

    applog.setup_app_logging(args.debug_log, args.log_file)

    for path in args.reports:
        if not os.path.isfile(path):
            exit_with_error(f"Metrics file does not exist: {path}")

    main(out=args.out, reports=args.reports)


if __name__ == '__main__':
    cli_main()
