from .app import CaptureChannel, ConsoleChannel, EchoChannel, create_keyserver_app
from .store import KeyServerStore

__all__ = [
    "CaptureChannel",
    "ConsoleChannel",
    "EchoChannel",
    "create_keyserver_app",
    "KeyServerStore",
]
