"""Digamma and trigamma.

Both use the recurrence ``f(x) = f(x + 1) - 1/x`` (``+ 1/x**2`` for
trigamma) to shift the argument to ``x >= 6`` and then an asymptotic
Bernoulli series. Digamma is accurate to about 1e-10 absolute on
``[1e-6, 1e6]``; trigamma to about 1e-10 relative.
"""
from ._backend import digamma, trigamma

__all__ = ["digamma", "trigamma"]
