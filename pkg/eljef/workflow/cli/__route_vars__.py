# -*- coding: UTF-8 -*-
# SPDX-License-Identifier: 0BSD

"""Route CLI Program Variables"""

DESCRIPTION = 'ElJef Workflow Query Routing'
NAME = 'ej-wg-route'
