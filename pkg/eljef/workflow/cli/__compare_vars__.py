# -*- coding: UTF-8 -*-
# SPDX-License-Identifier: 0BSD

"""Compare CLI Program Variables"""

DESCRIPTION = 'ElJef Workflow Strategy Comparison'
NAME = 'ej-wg-compare'
