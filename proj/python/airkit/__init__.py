"""Achievable information rate estimation for PM-QAM symbol streams."""

try:
    from airkit._airkit import *  # noqa: F401,F403  (installed layout)
except ImportError:  # pragma: no cover - build-tree layout
    from _airkit import *  # noqa: F401,F403

__version__ = "0.1.0"
