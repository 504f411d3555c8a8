"""Solvers for linear ill-posed inverse problems on 1-D grids.

The heavy lifting lives in the compiled extension `_adplab`; this package
re-exports its public surface.
"""

from ._adplab import *  # noqa: F401,F403
from ._adplab import __doc__ as _core_doc

__doc__ = (__doc__ or "") + "\n\n" + (_core_doc or "")
