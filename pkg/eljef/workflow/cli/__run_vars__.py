# -*- coding: UTF-8 -*-
# SPDX-License-Identifier: 0BSD

"""Benchmark Run CLI Program Variables"""

DESCRIPTION = 'ElJef Workflow Benchmark Run'
NAME = 'ej-wg-run'
