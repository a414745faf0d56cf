# -*- coding: UTF-8 -*-
# SPDX-License-Identifier: 0BSD

"""Replay CLI Program Args"""

from eljef.core import cli
from eljef.workflow.lib.cli import env_default

CMD_LINE_ARGS = [
    cli.Arg(['-v', '--version'], {'dest': 'version_out', 'action': 'store_true', 'help': 'Print version and exit.'}),
    cli.Arg(['--debug'], {'dest': 'debug_log', 'action': 'store_true', 'help': 'Enable debug output.'}),
    cli.Arg(['-c', '--config'], {'dest': 'config', 'metavar': 'engine.json', **env_default('config', ''),
                                 'help': 'Engine configuration file.'}),
    cli.Arg(['-l', '--log-file'], {'dest': 'log_file', 'metavar': 'file.log',
                                   'help': 'Log file to use for storing logging statements.'}),
    cli.Arg(['-n', '--seed'], {'dest': 'seed', 'type': int, 'metavar': '0', **env_default('seed', 0, int),
                               'help': 'Execution environment seed.'}),
    cli.Arg(['-o', '--out'], {'dest': 'out', 'metavar': 'logs.jsonl', **env_default('out', ''),
                              'help': 'Also append the execution log to this JSON lines file.'}),
    cli.Arg(['-s', '--store'], {'dest': 'store', 'metavar': 'path/to/store', **env_default('store'),
                                'help': 'Experience store directory.'}),
    cli.Arg(['-t', '--trajectory-id'], {'dest': 'trajectory_id', 'metavar': 'q0001-c1',
                                        **env_default('trajectory_id'), 'help': 'Stored trajectory to re-execute.'})
]
