# -*- coding: UTF-8 -*-
# SPDX-License-Identifier: 0BSD

"""Benchmark Run CLI Program Args"""

from eljef.core import cli
from eljef.workflow.lib.cli import env_default

STRATEGY_ALL = 'all'
"""STRATEGY_ALL: run every strategy and write the comparison report"""

CMD_LINE_ARGS = [
    cli.Arg(['-v', '--version'], {'dest': 'version_out', 'action': 'store_true', 'help': 'Print version and exit.'}),
    cli.Arg(['--debug'], {'dest': 'debug_log', 'action': 'store_true', 'help': 'Enable debug output.'}),
    cli.Arg(['-c', '--config'], {'dest': 'config', 'metavar': 'engine.json', **env_default('config', ''),
                                 'help': 'Engine configuration file.'}),
    cli.Arg(['-l', '--log-file'], {'dest': 'log_file', 'metavar': 'file.log',
                                   'help': 'Log file to use for storing logging statements.'}),
    cli.Arg(['-o', '--out'], {'dest': 'out', 'metavar': 'report.json', **env_default('out'),
                              'help': 'File to write metrics, or the comparison report with all strategies.'}),
    cli.Arg(['-n', '--seed'], {'dest': 'seed', 'type': int, 'metavar': '42', **env_default('seed', -1, int),
                               'help': 'Seed overriding the workload seed.'}),
    cli.Arg(['-s', '--store'], {'dest': 'store', 'metavar': 'path/to/store', **env_default('store'),
                                'help': 'Fresh store directory, a parent of one store per strategy with all.'}),
    cli.Arg(['-t', '--strategy'], {'dest': 'strategy', 'metavar': 'WorkflowGen', **env_default('strategy', 'all'),
                                   'help': 'Strategy to run: WorkflowGen, RealTimePlanning, StaticSingleTrajectory, '
                                           'BasicICL or all.'}),
    cli.Arg(['-w', '--workload'], {'dest': 'workload', 'metavar': 'workload.json', **env_default('workload'),
                                   'help': 'Workload configuration file.'})
]
