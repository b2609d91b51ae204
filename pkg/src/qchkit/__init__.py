"""Numerical workbench for curvature identities of Kähler surfaces.

Submodules
----------
algebra    pointwise tensors, frames, derivation actions, 2-forms
qch        model tensors Pi, Phi, Psi, K; Gray conditions; Weyl blocks
dsl        metric expression language and jet evaluation
chart      chart specifications loaded from JSON
geometry   connection, curvature and Lee form of a chart at a point
catalog    built-in fixtures with expectation lists
cli        command-line front end
"""

__version__ = "0.1.0"
