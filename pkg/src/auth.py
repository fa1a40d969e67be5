"""
API authentication for the HTTP front end.
"""

from flask import Request
from src.config import Config


def validate_api_key(request: Request) -> bool:
    """
    Validates the x-api-key header against Config.API_SECRET_KEY.

    An empty API_SECRET_KEY disables authentication (local use).

    Example:
        if not validate_api_key(request):
            return {"status": "error", "message": "Unauthorized"}, 401
    """
    if not Config.API_SECRET_KEY:
        return True

    provided_key = get_api_key_from_request(request)
    if not provided_key:
        return False

    return provided_key == Config.API_SECRET_KEY


def get_api_key_from_request(request: Request) -> str:
    return request.headers.get("x-api-key", "")
