import os
import sys

from fracsym.core import logger

# add parent path to sys.path
sys.path.append(os.path.dirname(os.path.abspath(__file__)))


def check_env():
    if not (sys.version_info.major == 3 and sys.version_info.minor >= 10):
        logger.error("请使用 Python3.10+ 运行本项目。")
        exit()


if __name__ == "__main__":
    check_env()

    from fracsym.cli.__main__ import cli

    cli()
