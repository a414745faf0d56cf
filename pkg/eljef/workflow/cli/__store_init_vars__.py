# -*- coding: UTF-8 -*-
# SPDX-License-Identifier: 0BSD

"""Store Init CLI Program Variables"""

DESCRIPTION = 'ElJef Workflow Experience Store Creation'
NAME = 'ej-wg-init'
