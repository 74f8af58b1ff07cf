# Copyright (c) 2025 SAGE contributors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#   http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Typed errors raised across the toolkit.

Every error carries an ``exit_code``; ``sage.bin.sage_main`` returns it to
the shell so each failure path has its own documented code.
"""


class SageError(Exception):
    exit_code = 1


class MissingInput(SageError):
    exit_code = 2


class ConfigError(SageError):
    exit_code = 3


# ingestion
class IngestError(SageError):
    exit_code = 10


class MissingColumn(IngestError):
    exit_code = 11


class ParseError(IngestError):
    exit_code = 12

    def __init__(self, message, row=None):
        if row is not None:
            message = '{} (row {})'.format(message, row)
        super().__init__(message)
        self.row = row


class EmptyFile(IngestError):
    exit_code = 13


class DegenerateSplit(IngestError):
    exit_code = 14


# tools
class ToolError(SageError):
    exit_code = 20


class TooShort(ToolError):
    exit_code = 21

    def __init__(self, tool, length, minimum):
        super().__init__('{} needs at least {} points, got {}'.format(tool, minimum, length))
        self.tool = tool
        self.length = length
        self.minimum = minimum


class PeriodTooLarge(ToolError):
    exit_code = 22


class NoPeriodFound(ToolError):
    exit_code = 23


class SegmentTooShort(ToolError):
    exit_code = 24


class PrefixTooShort(ToolError):
    exit_code = 25


class NoSeasonality(ToolError):
    exit_code = 26


# injection
class InjectError(SageError):
    exit_code = 30


class DegenerateSigma(InjectError):
    exit_code = 31


class NoPeriod(InjectError):
    exit_code = 32


# in-context reference database
class IclError(SageError):
    exit_code = 40


class NoNormalSegments(IclError):
    exit_code = 41


class EmptyDb(IclError):
    exit_code = 42


class BandTooNarrow(IclError):
    exit_code = 43


class LengthMismatch(SageError):
    exit_code = 44


# evaluation
class NoGroundTruthEvents(SageError):
    exit_code = 50


# completion backends
class BackendError(SageError):
    exit_code = 60


class BackendUnavailable(BackendError):
    exit_code = 61


class UnparseableResponse(BackendError):
    exit_code = 62


def all_error_classes():
    """Return every error class defined here, root first."""
    found = [SageError]
    stack = [SageError]
    while stack:
        cls = stack.pop()
        for sub in cls.__subclasses__():
            found.append(sub)
            stack.append(sub)
    return found
