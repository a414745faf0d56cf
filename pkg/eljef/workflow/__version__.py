# -*- coding: UTF-8 -*-
# SPDX-License-Identifier: 0BSD

"""ElJef Workflow Version"""
VERSION = '2026.10.1'
