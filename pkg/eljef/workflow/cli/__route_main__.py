# -*- coding: UTF-8 -*-
# SPDX-License-Identifier: 0BSD

"""Route CLI Program Main Functionality"""

import json
import logging

from eljef.core import (applog, cli)
from eljef.workflow.__version__ import VERSION
from eljef.workflow.cli.__common_engine__ import open_engine
from eljef.workflow.cli.__route_args__ import CMD_LINE_ARGS
from eljef.workflow.cli.__route_vars__ import (DESCRIPTION, NAME)
from eljef.workflow.lib.cli import (check_store_dir, exit_with_error)
from eljef.workflow.lib.errors import WorkflowError
from eljef.workflow.lib.model import Query
from eljef.workflow.lib.routing import (Verdict, execute_with_fallback, record_feedback, route)

LOGGER = logging.getLogger()

_VERDICTS = {'ok': Verdict.USER_OK, 'error': Verdict.USER_ERROR}


def main(**kwargs) -> None:
    """Main functionality for routing a query.

    Keyword Args:
        config (str): Engine configuration file.
        execute (bool): Serve the query instead of only routing it.
        feedback (str): ``ok`` or ``error`` feedback for the served query.
        query (str): Query text.
        query_id (str): Query id.
        seed (int): Execution environment seed.
        store (str): Store directory.
    """
    engine = open_engine(kwargs.get('config'), kwargs.get('store'), kwargs.get('seed'))
    query = Query(kwargs.get('query'), kwargs.get('query_id'))

    try:
        if not kwargs.get('execute'):
            print(json.dumps(route(query, engine.store, engine.config.routing).to_json(), indent=4, sort_keys=True))
            return

        report = execute_with_fallback(query, engine.store, engine.backend, engine.env, engine.config.routing)
        print(json.dumps(report.to_json(), indent=4, sort_keys=True))
        if kwargs.get('feedback'):
            trajectory = record_feedback(report, _VERDICTS[kwargs.get('feedback')], engine.store)
            LOGGER.info("Feedback recorded on %s: %s", trajectory.trajectory_id, trajectory.metadata.outcome.value)
    except WorkflowError as err:
        exit_with_error(str(err))


def cli_main() -> None:
    """Main functionality when run from CLI."""
    args = cli.args_simple(NAME, DESCRIPTION, CMD_LINE_ARGS)

    if args.version_out:
        cli.print_version(NAME, VERSION)

    applog.setup_app_logging(args.debug_log, args.log_file)

    if not args.query.strip():
        exit_with_error("Query text must not be empty")
    if args.feedback and not args.execute:
        exit_with_error("--feedback requires --execute")

    main(config=args.config or None, execute=args.execute, feedback=args.feedback, query=args.query,
         query_id=args.query_id, seed=args.seed, store=check_store_dir(args.store))


if __name__ == '__main__':
    cli_main()
