# -*- coding: UTF-8 -*-
# SPDX-License-Identifier: 0BSD

"""Replay CLI Program Main Functionality"""

import json
import logging
import os

from eljef.core import (applog, cli)
from eljef.workflow.__version__ import VERSION
from eljef.workflow.cli.__common_engine__ import open_engine
from eljef.workflow.cli.__replay_args__ import CMD_LINE_ARGS
from eljef.workflow.cli.__replay_vars__ import (DESCRIPTION, NAME)
from eljef.workflow.lib.cli import (check_store_dir, exit_with_error)
from eljef.workflow.lib.errors import WorkflowError
from eljef.workflow.lib.execution import (read_logs, write_logs)

LOGGER = logging.getLogger()


def main(**kwargs) -> None:
    """Main functionality for replaying a stored trajectory.

    The store is only read; the new execution log is printed.

    Keyword Args:
        config (str): Engine configuration file.
        out (str): JSON lines file the log is appended to.
        seed (int): Execution environment seed.
        store (str): Store directory.
        trajectory_id (str): Trajectory to replay.
    """
    engine = open_engine(kwargs.get('config'), kwargs.get('store'), kwargs.get('seed'))

    try:
        trajectory = engine.store.get_trajectory(kwargs.get('trajectory_id'))
        log = engine.env.execute(trajectory)
    except WorkflowError as err:
        exit_with_error(str(err))

    LOGGER.info("Replayed %s: %s (recorded %s)", trajectory.trajectory_id, log.outcome.value,
                trajectory.metadata.outcome.value)
    print(json.dumps(log.to_json(), indent=4, sort_keys=True))

    out = kwargs.get('out')
    if out:
        logs = read_logs(out) if os.path.isfile(out) else []
        write_logs(out, logs + [log])
        LOGGER.info("Log appended to %s", out)


def cli_main() -> None:
    """Main functionality when run from CLI."""
    args = cli.args_simple(NAME, DESCRIPTION, CMD_LINE_ARGS)

    if args.version_out:
        cli.print_version(NAME, VERSION)

    applog.setup_app_logging(args.debug_log, args.log_file)

    main(config=args.config or None, out=args.out or None, seed=args.seed, store=check_store_dir(args.store),
         trajectory_id=args.trajectory_id)


if __name__ == '__main__':
    cli_main()
