""".. include:: ../docs/homepage.md"""  # noqa: D415

# The api subpackage defines __all__ with the names available directly from
# the package, so they are star imported here.
from toricond import api
from toricond.api import *  # noqa: F401,F403


__all__ = api.__all__
__pdoc__ = {
    # The run subpackage is argument parsing, documented in the guides
    "run": False,
    # Filter out attributes that would be documented because of the star import
    **{n: False for n in api.__all__},
}
