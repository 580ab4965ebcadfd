# -*- coding: utf-8 -*-

# Copyright © 2023-2024 the attnfuse authors.

# Permission is hereby granted, free of charge, to any
# person obtaining a copy of this software and associated
# documentation files (the "Software"), to deal in the
# Software without restriction, including without limitation
# the rights to use, copy, modify, merge, publish,
# distribute, sublicense, and/or sell copies of the
# Software, and to permit persons to whom the Software is
# furnished to do so, subject to the following conditions:
#
# The above copyright notice and this permission notice
# shall be included in all copies or substantial portions of
# the Software.
#
# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY
# KIND, EXPRESS OR IMPLIED, INCLUDING BUT NOT LIMITED TO THE
# WARRANTIES OF MERCHANTABILITY, FITNESS FOR A PARTICULAR
# PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE AUTHORS
# OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR
# OTHER LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR
# OTHERWISE, ARISING FROM, OUT OF OR IN CONNECTION WITH THE
# SOFTWARE OR THE USE OR OTHER DEALINGS IN THE SOFTWARE.

"""Logging support."""

import enum
import logging
import warnings

from blinker import signal

from attnfuse import DEBUG

__all__ = (
    "get_logger",
    "stage_logger",
    "connect_progress_logging",
    "LOGGER",
)


class ApplicationWarning(Exception):
    """A pipeline warning, raised in strict mode."""

    pass


class StrictModeExceptionHandler(logging.StreamHandler):
    """A logging handler that turns warnings into exceptions."""

    def emit(self, record: logging.LogRecord) -> None:
        """Raise on records at WARNING or above."""
        if record.levelno >= logging.WARNING:
            raise ApplicationWarning(self.format(record))


class ColorfulFormatter(logging.Formatter):
    """Formatter that colors messages by level on terminals."""

    _colorful = False

    # lowest level first
    COLOURS = (
        (logging.NOTSET, "\033[37m"),
        (logging.INFO, "\033[1m"),
        (logging.WARNING, "\033[1;33m"),
        (logging.ERROR, "\033[1;31m"),
    )

    def format(self, record: logging.LogRecord) -> str:
        """Format a message, coloured when writing to a terminal."""
        message = super().format(record)
        if not self._colorful:
            return message
        colour = [code for level, code in self.COLOURS if record.levelno >= level][-1]
        return "{0}{1}\033[0m".format(colour, message)


class LoggingMode(enum.Enum):
    """Logging mode options."""

    NORMAL = 0
    STRICT = 1
    QUIET = 2


def configure_logging(logging_mode: LoggingMode = LoggingMode.NORMAL) -> None:
    """Configure the root logger.

    Safe to call repeatedly; each call replaces the previous handlers.
    """
    logging.root.level = logging.DEBUG if DEBUG else logging.INFO

    if logging_mode == LoggingMode.QUIET:
        logging.root.handlers = []
        return

    handler = logging.StreamHandler()
    handler.setFormatter(
        ColorfulFormatter(
            fmt="[%(asctime)s] %(levelname)s: %(name)s: %(message)s",
            datefmt="%Y-%m-%d %H:%M:%S",
        )
    )

    handlers = [handler]
    if logging_mode == LoggingMode.STRICT:
        handlers.append(StrictModeExceptionHandler())

    logging.root.handlers = handlers


configure_logging()


def get_logger(name: str) -> logging.Logger:
    """Get a logger; records propagate to the root handlers set by configure_logging."""
    return logging.getLogger(name)


class _StageAdapter(logging.LoggerAdapter):
    """Prefix every message with the pipeline stage name."""

    def process(self, msg, kwargs):
        return "[{0}] {1}".format(self.extra["stage"], msg), kwargs


def stage_logger(stage: str) -> logging.LoggerAdapter:
    """Return a logger whose messages name the pipeline stage."""
    return _StageAdapter(get_logger("attnfuse." + stage), {"stage": stage})


LOGGER = get_logger("attnfuse")

_progress_receivers = []


def connect_progress_logging(logger: logging.Logger = LOGGER) -> None:
    """Log fold and session progress broadcast by the pipeline signals."""
    def on_fold(sender, **kw):
        logger.info("fold {0}: {1} windows, accuracy {2:.4f}".format(
            kw["user_id"], kw["n_windows"], kw["accuracy"]))

    def on_fold_skipped(sender, **kw):
        logger.warning("fold {0} skipped: {1}".format(kw["user_id"], kw["reason"]))

    def on_session(sender, **kw):
        logger.debug("loaded session {0}/{1} ({2} s)".format(
            kw["user_id"], kw["session_id"], kw["seconds"]))

    # blinker holds weak references; keep the closures alive.
    _progress_receivers[:] = [on_fold, on_fold_skipped, on_session]
    signal("fold_evaluated").connect(on_fold)
    signal("fold_skipped").connect(on_fold_skipped)
    signal("session_loaded").connect(on_session)


def showwarning(message, category, filename, lineno, file=None, line=None):
    """Route ``warnings`` (numpy's overflow warnings among them) into logging."""
    name = getattr(category, "__name__", str(category))
    get_logger("attnfuse.warnings").warning("{0}: {1} ({2}:{3})".format(name, message, filename, lineno))


warnings.showwarning = showwarning
