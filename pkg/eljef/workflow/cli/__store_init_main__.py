# -*- coding: UTF-8 -*-
# SPDX-License-Identifier: 0BSD

"""Store Init CLI Program Main Functionality"""

import logging
import os

from eljef.core import (applog, cli)
from eljef.workflow.__version__ import VERSION
from eljef.workflow.cli.__common_engine__ import (REGISTRY_FILE, open_engine)
from eljef.workflow.cli.__store_init_args__ import CMD_LINE_ARGS
from eljef.workflow.cli.__store_init_vars__ import (DESCRIPTION, NAME)
from eljef.workflow.lib.cli import (check_store_dir, exit_with_error)

LOGGER = logging.getLogger()


def main(**kwargs) -> None:
    """Main functionality for store creation.

    Keyword Args:
        config (str): Engine configuration file.
        store_dir (str): Directory to create the store in.
        write_registry (bool): Write the tool registry next to the store files.
    """
    engine = open_engine(kwargs.get('config'), kwargs.get('store_dir'))
    LOGGER.info("Store ready: %s (%d trajectories, dimension %d)", engine.store.path, len(engine.store),
                engine.store.dimension)

    if kwargs.get('write_registry'):
        path = os.path.join(engine.store.path, REGISTRY_FILE)
        engine.env.registry.save(path)
        LOGGER.info("Registry written: %s", path)


def cli_main() -> None:
    """Main functionality when run from CLI."""
    args = cli.args_simple(NAME, DESCRIPTION, CMD_LINE_ARGS)

    if args.version_out:
        cli.print_version(NAME, VERSION)

    applog.setup_app_logging(args.debug_log, args.log_file)

    if not args.store_dir:
        exit_with_error("A store directory is required, pass one or set WG_STORE")

    main(config=args.config or None, store_dir=check_store_dir(args.store_dir, must_exist=False),
         write_registry=args.write_registry)


if __name__ == '__main__':
    cli_main()
