# -*- coding: UTF-8 -*-
# SPDX-License-Identifier: 0BSD

"""Route CLI Program Args"""

from eljef.core import cli
from eljef.workflow.lib.cli import env_default

CMD_LINE_ARGS = [
    cli.Arg(['-v', '--version'], {'dest': 'version_out', 'action': 'store_true', 'help': 'Print version and exit.'}),
    cli.Arg(['--debug'], {'dest': 'debug_log', 'action': 'store_true', 'help': 'Enable debug output.'}),
    cli.Arg(['-c', '--config'], {'dest': 'config', 'metavar': 'engine.json', **env_default('config', ''),
                                 'help': 'Engine configuration file.'}),
    cli.Arg(['-f', '--feedback'], {'dest': 'feedback', 'choices': ['ok', 'error'],
                                   'help': 'Record user feedback on the served query, requires --execute.'}),
    cli.Arg(['-i', '--query-id'], {'dest': 'query_id', 'metavar': 'q0001', **env_default('query_id', 'cli'),
                                   'help': 'Id given to the query.'}),
    cli.Arg(['-l', '--log-file'], {'dest': 'log_file', 'metavar': 'file.log',
                                   'help': 'Log file to use for storing logging statements.'}),
    cli.Arg(['-n', '--seed'], {'dest': 'seed', 'type': int, 'metavar': '0', **env_default('seed', 0, int),
                               'help': 'Execution environment seed.'}),
    cli.Arg(['-q', '--query'], {'dest': 'query', 'metavar': 'text', **env_default('query'),
                                'help': 'Query text to route.'}),
    cli.Arg(['-s', '--store'], {'dest': 'store', 'metavar': 'path/to/store', **env_default('store'),
                                'help': 'Experience store directory.'}),
    cli.Arg(['-x', '--execute'], {'dest': 'execute', 'action': 'store_true',
                                  'help': 'Serve the query with fallback instead of only printing the route.'})
]
