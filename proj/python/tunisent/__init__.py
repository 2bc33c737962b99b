"""Sentiment analysis toolkit for Romanized Tunisian (TUNIZI) comments.

Thin package wrapper around the compiled extension; everything lives in
``tunisent._tunisent``.
"""

from tunisent._tunisent import *  # noqa: F401,F403
from tunisent._tunisent import __doc__ as _ext_doc

__all__ = [name for name in dir() if not name.startswith("_")]
__doc__ = _ext_doc or __doc__
