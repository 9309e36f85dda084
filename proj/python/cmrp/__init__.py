from ._cmrp import *  # noqa: F401,F403
