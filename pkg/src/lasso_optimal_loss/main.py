"""
Main entry point - 命令行入口
"""

import sys
from typing import Optional, Sequence


def main(argv: Optional[Sequence[str]] = None) -> int:
    """命令行主入口，返回退出码"""
    from .cli import run
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
