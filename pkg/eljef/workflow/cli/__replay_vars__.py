# -*- coding: UTF-8 -*-
# SPDX-License-Identifier: 0BSD

"""Replay CLI Program Variables"""

DESCRIPTION = 'ElJef Workflow Trajectory Replay'
NAME = 'ej-wg-replay'
