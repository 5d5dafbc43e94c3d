"""
Utilities for logging

Loggers are set up once per module with `setup_logger(__name__)`. Console
output goes to stderr through a colorlog formatter so that anything written
to stdout (reports) stays clean.
"""
import os
import sys
import logging

import colorlog

FORMATTER_STR = (
    "%(asctime)s.%(msecs)03d [%(levelname)s] %(filename)s:%(lineno)d "
    "%(name)s.%(funcName)s(): %(message)s")
TIME_FORMAT_STR = "%Y-%m-%d %H:%M:%S"


def setup_logger(
    logger_name,
    file_name=None,
    log_to_stderr=True,
    log_level=logging.INFO,
    base_dir="./logs",
):
    """Set up a logger which optionally also logs to file.

    Calling this again with a previously used name re-levels the existing
    logger but never stacks a second handler of the same kind on it.

    Args:
        logger_name (str): name of logger (normally the module `__name__`)
        file_name (str): name of logging file. If nothing provided, will not
            log to file (default: None)
        log_to_stderr (bool): whether the log should be output to stderr
            (default: True)
        log_level (int): log level from the logging library
            (default: logging.INFO)
        base_dir (str): directory of where to put the log file
            (default: "./logs")
    """
    assert file_name or log_to_stderr, "logger without output is useless!"

    logger = logging.getLogger(logger_name)
    # handlers are attached per module; do not duplicate through the root
    logger.propagate = False

    if file_name:
        log_path = os.path.join(base_dir, file_name)
        log_dir = os.path.dirname(log_path)
        if log_dir and not os.path.exists(log_dir):
            os.makedirs(log_dir)
        has_file_handler = any(
            isinstance(handler, logging.FileHandler)
            for handler in logger.handlers)
        if not has_file_handler:
            file_handler = logging.FileHandler(log_path, mode="a")
            file_handler.setLevel(logging.DEBUG)
            file_handler.setFormatter(
                logging.Formatter(FORMATTER_STR, TIME_FORMAT_STR))
            logger.addHandler(file_handler)
    if log_to_stderr:
        has_stream_handler = any(
            type(handler) is logging.StreamHandler  # pylint: disable=unidiomatic-typecheck
            for handler in logger.handlers)
        if not has_stream_handler:
            console_handler = logging.StreamHandler(sys.stderr)
            console_handler.setLevel(logging.DEBUG)
            console_handler.setFormatter(colorlog.ColoredFormatter(
                "%(log_color)s" + FORMATTER_STR,
                TIME_FORMAT_STR,
            ))
            logger.addHandler(console_handler)

    logger.setLevel(log_level)

    return logger


def set_log_level(prefix, log_level):
    """Set the level of every existing logger whose name starts with `prefix`.

    Args:
        prefix (str): logger name prefix, e.g. "fracbvp"
        log_level (int or str): level understood by `logging`, e.g. "DEBUG"

    Returns:
        (List[str]) names of the loggers that were re-levelled.
    """
    if isinstance(log_level, str):
        log_level = logging.getLevelName(log_level.upper())
        if not isinstance(log_level, int):
            raise ValueError("unknown log level: '{}'".format(log_level))
    # placeholders stand for parents that were never set up
    names = sorted(
        name for name, logger in logging.root.manager.loggerDict.items()
        if isinstance(logger, logging.Logger)
        and (name == prefix or name.startswith(prefix + ".")))
    for name in names:
        logging.getLogger(name).setLevel(log_level)
    return names
