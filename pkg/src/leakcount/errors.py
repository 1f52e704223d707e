# -*- coding: utf-8 -*-
# SPDX-License-Identifier: Apache-2.0
# Copyright (c) 2025 Semantic R&D Group

from typing import Optional


class LeakcountError(Exception):
    """Base class of every error raised by the toolkit."""


class SourceSyntaxError(LeakcountError):
    """
    Syntax or declaration error in a `.gcl` or `.smt2` source.

    Printed as `file:line:col: message` by the command-line front end.
    """

    def __init__(self, message: str, line: int = 0, col: int = 0, file: Optional[str] = None):
        self.message = message
        self.line = line
        self.col = col
        self.file = file
        super().__init__(self.diagnostic())

    def diagnostic(self) -> str:
        where = self.file or "<input>"
        return f"{where}:{self.line}:{self.col}: {self.message}"


class WidthError(SourceSyntaxError):
    """Literal overflow or mixed-width operands without an explicit cast."""


class BoundError(LeakcountError):
    """Unwinding or branch bound below 1."""


class UnknownVariable(LeakcountError):
    """A variable named by the caller does not occur in the formula."""


class UnsupportedFeature(LeakcountError):
    """Input uses a construct outside the supported subset."""


class UnsupportedSort(LeakcountError):
    """A term of the wrong sort was handed to the engine."""


class NoModel(LeakcountError):
    """Model requested while the last check was not SAT."""


class StackUnderflow(LeakcountError):
    """pop() asked for more levels than were pushed."""


class LimitReached(LeakcountError):
    """Enumeration stopped at the caller's limit."""


class DomainTooLarge(LeakcountError):
    """Input counting exceeded the configured enumeration cap."""


class MissingExpectation(LeakcountError):
    """Corpus program without a usable `.expect` sidecar."""


class InternalError(LeakcountError):
    """Unexpected failure inside a worker; carries the batch id when known."""

    def __init__(self, message: str, batch_id: Optional[int] = None):
        self.batch_id = batch_id
        if batch_id is not None:
            message = f"batch {batch_id}: {message}"
        super().__init__(message)
