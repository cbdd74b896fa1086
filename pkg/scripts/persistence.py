#!/usr/bin/env python
"""persistence コマンドのスクリプト版（インストールせずに実行する場合）"""
from __future__ import annotations

import sys

from src.cli.app import main

if __name__ == "__main__":
    sys.exit(main())
