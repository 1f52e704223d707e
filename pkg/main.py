# -*- coding: utf-8 -*-
# SPDX-License-Identifier: Apache-2.0
# Copyright (c) 2025 Semantic R&D Group

import sys

from src.leakcount.cli import main

if __name__ == '__main__':

    # e.g. python main.py capacity corpus/sanitize.gcl --bound 1
    sys.exit(main())
