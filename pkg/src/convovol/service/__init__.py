"""HTTP/JSON facade over a corpus: register, upload transcript, read metrics."""

from .app import MAX_UPLOAD_BYTES, app_from_env, create_app

__all__ = ["MAX_UPLOAD_BYTES", "app_from_env", "create_app"]
