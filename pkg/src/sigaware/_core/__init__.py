"""Hot kernel implementations.

Modules here are plain Python but are additionally compiled to extension
modules when Cython is available at build time (see setup.py).  They must
not define classes that other modules isinstance-check against; shared
types live in sigaware.tokens / sigaware.astnodes / sigaware.bugs.
"""
