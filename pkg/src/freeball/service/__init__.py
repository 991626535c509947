"""HTTP front end: pydantic models, handlers, and the FastAPI app factory."""

from .app import create_app
from .handlers import OPERATIONS

__all__ = ["OPERATIONS", "create_app"]
