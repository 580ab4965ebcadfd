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

"""Exceptions raised by attnfuse stages.

Every error carries the exit code the command line reports for it:
1 for configuration problems, 2 for data problems and 3 when training
diverges.
"""

__all__ = (
    'AttnfuseError',
    'ConfigError',
    'DataError',
    'TrainingError',
    'MalformedRow',
    'DimensionMismatch',
    'NonMonotonicTimestamp',
    'OutOfRange',
    'EmptyStream',
    'InvalidFrame',
    'DegenerateEye',
    'EmptySession',
    'DegenerateDistribution',
    'WindowLongerThanSession',
    'SessionSpanMismatch',
    'TooShort',
    'SingleClassInput',
    'NonFiniteFeature',
    'MissingCategory',
    'WrongArity',
    'InsufficientUsers',
    'InvalidSpec',
    'LeakageError',
    'DivergedLoss',
)


class AttnfuseError(Exception):
    """Base class for all attnfuse errors."""

    exit_code = 1

    def __init__(self, message, stage=None, record=None):
        """Initialize the error with optional stage and record context."""
        super().__init__(message)
        self.message = message
        self.stage = stage
        self.record = record

    def describe(self):
        """Return a one-line description naming stage and record."""
        text = self.message
        if self.stage:
            text = '[{0}] {1}'.format(self.stage, text)
        if self.record is not None:
            text = '{0} ({1})'.format(text, self.record)
        return text


class ConfigError(AttnfuseError):
    """Invalid configuration, flags or protocol settings."""

    exit_code = 1


class LeakageError(ConfigError):
    """Held-out data reached a training computation in strict mode."""


class DataError(AttnfuseError):
    """Input data that cannot be processed."""

    exit_code = 2


class MalformedRow(DataError):
    """A CSV row that does not follow its schema."""

    def __init__(self, message, path=None, line=None, stage='ingest'):
        """Remember the offending file and line number."""
        record = None
        if path is not None:
            record = '{0}:{1}'.format(path, line) if line is not None else str(path)
        super().__init__(message, stage=stage, record=record)
        self.path = path
        self.line = line


class DimensionMismatch(MalformedRow):
    """A record whose value count does not match its category."""


class NonMonotonicTimestamp(MalformedRow):
    """Timestamps that do not strictly increase within a stream."""


class OutOfRange(MalformedRow):
    """A value outside its allowed range."""


class EmptyStream(DataError):
    """An input file without any data."""


class InvalidFrame(DataError):
    """A landmark frame flagged invalid was used for a computation."""


class DegenerateEye(DataError):
    """An eye with zero horizontal extent."""


class EmptySession(DataError):
    """A session without any valid frames for a category."""


class DegenerateDistribution(DataError):
    """Low and high attention thresholds coincide."""


class WindowLongerThanSession(DataError):
    """The window length exceeds the session duration."""


class SessionSpanMismatch(DataError):
    """Per-second series of one session cover different spans."""


class TooShort(DataError):
    """A sequence too short for the requested derivatives."""


class SingleClassInput(DataError):
    """Training or evaluation data with only one label."""


class NonFiniteFeature(DataError):
    """A feature matrix containing NaN or infinity."""


class MissingCategory(DataError):
    """A required facial feature category is absent."""


class WrongArity(DataError):
    """A score vector of the wrong length."""


class InsufficientUsers(DataError):
    """Too few users for leave-one-user-out evaluation."""


class InvalidSpec(DataError):
    """Invalid synthetic data settings."""


class TrainingError(AttnfuseError):
    """Training that failed to produce a usable model."""

    exit_code = 3


class DivergedLoss(TrainingError):
    """The training loss became non-finite."""
