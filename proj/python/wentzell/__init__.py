from ._wentzell import *  # noqa: F401,F403
from ._wentzell import __doc__  # noqa: F401
