"""Adapter error taxonomy."""


class AdapterError(Exception):
    """Base class for adapter failures."""


class ManifestError(AdapterError):
    """The jobs manifest is malformed (usage-level problem, exit 2)."""


class JobError(AdapterError):
    """One job could not be completed (logged, exit 1 if any remain failed)."""
