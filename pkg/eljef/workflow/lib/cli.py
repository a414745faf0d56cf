# -*- coding: UTF-8 -*-
# SPDX-License-Identifier: 0BSD

"""Common ElJef Workflow CLI Functionality"""

import logging
import os

LOGGER = logging.getLogger()

ENV_PREFIX = 'WG_'
"""ENV_PREFIX: prefix of the environment twin of every command line flag"""


def env_default(name: str, default=None, cast=None) -> dict:
    """Argument settings that take their default from the flag's environment twin.

    Args:
        name: flag name without the prefix, ``store`` reads ``WG_STORE``
        default: value when the twin is unset, None makes the flag required
        cast: converts the environment string

    Returns:
        dict with ``default`` and ``required`` set, to merge into a cli.Arg dict
    """
    value = os.environ.get(ENV_PREFIX + name.upper().replace('-', '_'))
    if value is not None and cast is not None:
        try:
            value = cast(value)
        except ValueError:
            exit_with_error(f"Invalid value in {ENV_PREFIX}{name.upper()}: {value}")
    if value is None:
        value = default

    return {'default': value, 'required': value is None}


def exit_with_error(error_str: str) -> None:
    """Exits a program with the specified error string

    Args:
        error_str: Error string to print before exiting.

    Raises:
        SystemExit: Always
    """
    LOGGER.error(error_str)
    raise SystemExit(1)


def check_store_dir(path: str, must_exist: bool = True) -> str:
    """Checks a store directory.

    Args:
        path: path to check
        must_exist: exit when the directory does not exist yet

    Returns:
        A normalized path to use for processing
    """
    if must_exist and not os.path.exists(path):
        exit_with_error(f"Specified store does not exist: {path}")

    store_dir = os.path.abspath(path)
    if os.path.islink(store_dir):
        store_dir = os.readlink(store_dir)

    if os.path.exists(store_dir) and not os.path.isdir(store_dir):
        exit_with_error(f"Specified store path is not a directory or link to a directory: {path}")

    return store_dir
