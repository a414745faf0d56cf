# -*- coding: UTF-8 -*-
# SPDX-License-Identifier: 0BSD

"""Store Init CLI Program Args"""

from eljef.core import cli
from eljef.workflow.lib.cli import env_default

CMD_LINE_ARGS = [
    cli.Arg(['-v', '--version'], {'dest': 'version_out', 'action': 'store_true', 'help': 'Print version and exit.'}),
    cli.Arg(['--debug'], {'dest': 'debug_log', 'action': 'store_true', 'help': 'Enable debug output.'}),
    cli.Arg(['-c', '--config'], {'dest': 'config', 'metavar': 'engine.json', **env_default('config', ''),
                                 'help': 'Engine configuration file.'}),
    cli.Arg(['-l', '--log-file'], {'dest': 'log_file', 'metavar': 'file.log',
                                   'help': 'Log file to use for storing logging statements.'}),
    cli.Arg(['-r', '--write-registry'], {'dest': 'write_registry', 'action': 'store_true',
                                         'help': 'Write the configured tool registry into the store as registry.json.'}),
    cli.Arg(['store_dir'], {'metavar': 'store-dir', 'nargs': '?', 'default': env_default('store')['default'],
                            'help': 'Directory to create the experience store in.'})
]
