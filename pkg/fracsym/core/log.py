"""
日志系统, 为数值内核和 CLI 提供统一的彩色日志输出, 并支持按次运行收集日志

const:
    CACHED_SIZE: 单次运行日志缓存的最大条数
    log_color_config: 日志颜色配置, 定义了不同日志级别的颜色

class:
    RunLogBuffer: 运行日志缓冲区, 保存一次实验运行期间的日志, 用于写出 run.log
    RunLogHandler: 日志处理器, 用于将日志消息写入 RunLogBuffer
    LogManager: 日志管理器, 用于创建和配置日志记录器

function:
    is_cli_path: 检查文件路径是否来自 CLI 目录
    get_short_level_name: 将日志级别名称转换为四个字母的缩写
"""

import logging
import os
import sys
from collections import deque
from typing import List

import colorlog

# 日志缓存大小
CACHED_SIZE = 2000
# 日志颜色配置
log_color_config = {
    "DEBUG": "green",
    "INFO": "bold_cyan",
    "WARNING": "bold_yellow",
    "ERROR": "red",
    "CRITICAL": "bold_red",
    "RESET": "reset",
    "asctime": "green",
}


def is_cli_path(pathname):
    """检查文件路径是否来自 CLI 目录

    Args:
        pathname (str): 文件路径

    Returns:
        bool: 如果路径来自 fracsym/cli，则返回 True，否则返回 False
    """
    if not pathname:
        return False

    norm_path = os.path.normpath(pathname).replace("\\", "/")
    return "fracsym/cli" in norm_path


def get_short_level_name(level_name):
    """将日志级别名称转换为四个字母的缩写

    Args:
        level_name (str): 日志级别名称, 如 "DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"

    Returns:
        str: 四个字母的日志级别缩写
    """
    level_map = {
        "DEBUG": "DBUG",
        "INFO": "INFO",
        "WARNING": "WARN",
        "ERROR": "ERRO",
        "CRITICAL": "CRIT",
    }
    return level_map.get(level_name, level_name[:4].upper())


class RunLogBuffer:
    """运行日志缓冲区, 环形缓冲, 只保留最近 CACHED_SIZE 条日志"""

    def __init__(self):
        self.log_cache = deque(maxlen=CACHED_SIZE)

    def publish(self, log_entry: dict):
        """追加一条日志

        Args:
            log_entry (dict): 日志消息, 包含日志级别和日志内容.
                example: {"level": "INFO", "data": "求解收敛", "time": "12:00:00"}
        """
        self.log_cache.append(log_entry)

    def lines(self) -> List[str]:
        return [entry["data"] for entry in self.log_cache]

    def clear(self):
        self.log_cache.clear()


class RunLogHandler(logging.Handler):
    """日志处理器, 用于将日志消息发送到 RunLogBuffer"""

    def __init__(self, buffer: RunLogBuffer):
        super().__init__()
        self.buffer = buffer

    def emit(self, record):
        log_entry = self.format(record)
        self.buffer.publish(
            {
                "level": record.levelname,
                "time": getattr(record, "asctime", ""),
                "data": log_entry,
            }
        )


class LogManager:
    """日志管理器, 用于创建和配置日志记录器"""

    @classmethod
    def GetLogger(cls, log_name: str = "fracsym"):
        """获取指定名称的日志记录器logger

        Args:
            log_name (str): 日志记录器的名称, 默认为 "fracsym"

        Returns:
            logging.Logger: 返回配置好的日志记录器
        """
        logger = logging.getLogger(log_name)
        # 已经配置过处理器则直接返回, 避免重复输出
        if logger.handlers:
            return logger
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setLevel(logging.DEBUG)

        # 输出日志格式为: [时间] [来源标签] [日志级别] [文件名:行号]: 日志消息
        console_formatter = colorlog.ColoredFormatter(
            fmt="%(log_color)s [%(asctime)s] %(origin_tag)s [%(short_levelname)-4s] [%(filename)s:%(lineno)d]: %(message)s %(reset)s",
            datefmt="%H:%M:%S",
            log_colors=log_color_config,
        )

        class OriginFilter(logging.Filter):
            """来源过滤器类, 用于标记日志来自 CLI 还是数值内核"""

            def filter(self, record):
                record.origin_tag = "[CLI ]" if is_cli_path(record.pathname) else "[Core]"
                return True

        class FileNameFilter(logging.Filter):
            """文件名过滤器类, 将文件路径 /path/to/file.py 转换为 to.file 格式"""

            def filter(self, record):
                dirname = os.path.dirname(record.pathname)
                record.filename = (
                    os.path.basename(dirname)
                    + "."
                    + os.path.basename(record.pathname).replace(".py", "")
                )
                return True

        class LevelNameFilter(logging.Filter):
            """短日志级别名称过滤器类"""

            def filter(self, record):
                record.short_levelname = get_short_level_name(record.levelname)
                return True

        console_handler.setFormatter(console_formatter)
        logger.addFilter(OriginFilter())
        logger.addFilter(FileNameFilter())
        logger.addFilter(LevelNameFilter())
        logger.setLevel(logging.INFO)
        logger.addHandler(console_handler)

        return logger

    @classmethod
    def set_level(cls, logger: logging.Logger, level: str):
        """设置日志级别, level 为 DEBUG/INFO/WARNING/ERROR/CRITICAL 之一"""
        logger.setLevel(getattr(logging, level.upper()))

    @classmethod
    def attach_run_buffer(
        cls, logger: logging.Logger, buffer: RunLogBuffer
    ) -> RunLogHandler:
        """挂载运行日志处理器, 运行结束后应调用 detach_run_buffer 移除

        Args:
            logger (logging.Logger): 日志记录器
            buffer (RunLogBuffer): 运行日志缓冲区
        """
        handler = RunLogHandler(buffer)
        handler.setLevel(logging.DEBUG)
        # 写入文件的日志不带颜色
        handler.setFormatter(
            logging.Formatter(
                "[%(asctime)s] [%(short_levelname)s] %(origin_tag)s [%(filename)s:%(lineno)d]: %(message)s",
                datefmt="%H:%M:%S",
            )
        )
        logger.addHandler(handler)
        return handler

    @classmethod
    def detach_run_buffer(cls, logger: logging.Logger, handler: RunLogHandler):
        logger.removeHandler(handler)
