from .log import LogManager, RunLogBuffer  # noqa

logger = LogManager.GetLogger(log_name="fracsym")
