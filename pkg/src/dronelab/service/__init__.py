"""Live experiment service: session lifecycle, durable event log, HTTP API."""

from .core import ExperimentService, ServiceError
from .http import serve_forever, make_http_server

__all__ = ["ExperimentService", "ServiceError", "make_http_server", "serve_forever"]
