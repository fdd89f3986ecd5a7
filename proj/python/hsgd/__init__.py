from ._hsgd import *  # noqa: F401,F403
from ._hsgd import __doc__  # noqa: F401
