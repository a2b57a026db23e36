"""Sequential review mechanisms for conferences with many submissions per author.

The heavy lifting happens in the compiled ``_seqreview`` extension; this
package re-exports it and adds a thin command-line wrapper.
"""

from ._seqreview import *  # noqa: F401,F403
from ._seqreview import run_cli

__all__ = [name for name in dir() if not name.startswith("_")]


def cli(*args):
    """Runs a seqreview command line and returns its standard output.

    Raises RuntimeError with the diagnostic line when the command fails.
    """
    code, out, err = run_cli([str(a) for a in args])
    if code != 0:
        raise RuntimeError(err.strip())
    return out
