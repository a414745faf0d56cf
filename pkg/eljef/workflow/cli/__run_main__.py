# -*- coding: UTF-8 -*-
# SPDX-License-Identifier: 0BSD

"""Benchmark Run CLI Program Main Functionality"""

import logging
import os

from eljef.core import (applog, cli, fops)
from eljef.workflow.__version__ import VERSION
from eljef.workflow.cli.__common_engine__ import open_engine
from eljef.workflow.cli.__run_args__ import (CMD_LINE_ARGS, STRATEGY_ALL)
from eljef.workflow.cli.__run_vars__ import (DESCRIPTION, NAME)
from eljef.workflow.lib.cli import (check_store_dir, exit_with_error)
from eljef.workflow.lib.config import (build_backend, load_workload_config)
from eljef.workflow.lib.errors import WorkflowError
from eljef.workflow.lib.harness import (Strategy, compare_and_report, run_strategy)
from eljef.workflow.lib.store import ExperienceStore
from eljef.workflow.lib.workload import generate_workload

LOGGER = logging.getLogger()


def _fresh_store(path: str, engine) -> ExperienceStore:
    store = ExperienceStore(path, engine.config.embedding)
    if len(store) > 0 or store.experiences():
        exit_with_error(f"Store is not fresh: {path}")
    return store


def main(**kwargs) -> None:
    """Main functionality for benchmark runs.

    Keyword Args:
        config (str): Engine configuration file.
        out (str): File to write results to.
        seed (int): Seed overriding the workload seed, negative keeps it.
        store (str): Store directory.
        strategies (list): Strategy values to run.
        workload (str): Workload configuration file.
    """
    engine = open_engine(kwargs.get('config'), seed=max(kwargs.get('seed'), 0))

    try:
        workload_cfg = load_workload_config(kwargs.get('workload'))
        if kwargs.get('seed') >= 0:
            workload_cfg = workload_cfg._replace(seed=kwargs.get('seed'))
        queries = generate_workload(workload_cfg, engine.config.embedding, engine.config.routing)
    except WorkflowError as err:
        exit_with_error(str(err))

    strategies = kwargs.get('strategies')
    metrics = []
    for strategy in strategies:
        path = kwargs.get('store') if len(strategies) == 1 else os.path.join(kwargs.get('store'), strategy.value)
        LOGGER.info("Running %s into %s", strategy.value, path)
        store = _fresh_store(path, engine)
        backend = build_backend(engine.config.generator)
        metrics.append(run_strategy(strategy, queries, engine.env, backend, store, engine.config.routing,
                                    workload_cfg.faults))

    if len(metrics) == 1:
        fops.file_write_convert(kwargs.get('out'), fops.JSON, metrics[0].to_json())
        LOGGER.info("Metrics written: %s", kwargs.get('out'))
        return

    try:
        report = compare_and_report(metrics, kwargs.get('out'))
    except WorkflowError as err:
        exit_with_error(str(err))

    if not report['accepted']:
        exit_with_error("Acceptance thresholds not met, see " + kwargs.get('out'))


def cli_main() -> None:
    """Main functionality when run from CLI."""
    args = cli.args_simple(NAME, DESCRIPTION, CMD_LINE_ARGS)

    if args.version_out:
        cli.print_version(NAME, VERSION)

    applog.setup_app_logging(args.debug_log, args.log_file)

    if args.strategy == STRATEGY_ALL:
        strategies = list(Strategy)
    else:
        try:
            strategies = [Strategy(args.strategy)]
        except ValueError:
            exit_with_error(f"Unknown strategy: {args.strategy}")

    if not os.path.isfile(args.workload):
        exit_with_error(f"Workload file does not exist: {args.workload}")

    main(config=args.config or None, out=args.out, seed=args.seed,
         store=check_store_dir(args.store, must_exist=False), strategies=strategies, workload=args.workload)


if __name__ == '__main__':
    cli_main()
