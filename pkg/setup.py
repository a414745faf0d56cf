# -*- coding: UTF-8 -*-
"""Setup script"""

from setuptools import setup

setup(
    author='Jef Oliver',
    author_email='jef@eljef.me',
    description='Experience driven workflow generation engine and benchmark harness',
    install_requires=['eljef-core>=2023.06.1', 'numpy', 'requests'],
    license='0BSD',
    name='eljef-workflow',
    packages=['eljef.workflow', 'eljef.workflow.cli', 'eljef.workflow.lib'],
    python_requires='>=3.8',
    url='https://eljef.dev/python/eljef_workflow',
    version='2026.10.1',
    entry_points={
        'console_scripts': [
            'ej-wg-compare = eljef.workflow.cli.__compare_main__:cli_main',
            'ej-wg-init = eljef.workflow.cli.__store_init_main__:cli_main',
            'ej-wg-replay = eljef.workflow.cli.__replay_main__:cli_main',
            'ej-wg-route = eljef.workflow.cli.__route_main__:cli_main',
            'ej-wg-run = eljef.workflow.cli.__run_main__:cli_main'
        ]
    },
    classifiers=[
        'Development Status :: 4 - Beta',
        'Intended Audience :: Developers',
        'License :: OSI Approved :: BSD License',
        'Operating System :: POSIX :: Linux',
        'Programming Language :: Python',
        'Programming Language :: Python :: 3',
        'Programming Language :: Python :: 3.8',
        'Programming Language :: Python :: 3.10',
        'Programming Language :: Python :: 3.12',
    ]
)
