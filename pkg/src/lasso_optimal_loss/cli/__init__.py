"""
CLI module - 命令行界面模块

提供 theory、simulate、bounds、analyze 四个子命令。
"""

from .commands import build_parser, run

__all__ = ["build_parser", "run"]
