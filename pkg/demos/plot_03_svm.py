"""
A small RBF support vector machine
==================================

The classifier is a one-vs-rest stack of binary soft-margin machines, each
solved with sequential minimal optimisation.
"""
import numpy as np

from tagsem.classifier import rbf_matrix, smo, train

##############################################################################
# XOR is the classic case a linear boundary cannot handle.

X = np.array([[0, 0], [1, 1], [0, 1], [1, 0]], dtype=float)
y = ["same", "same", "diff", "diff"]
model = train(X, y, C=50.0, gamma=1.0)
print(model.predict(X))

##############################################################################
# Looking inside the solver
# -------------------------
# With ``trace=True`` the dual objective is recorded after every step; it
# never goes down.

K = rbf_matrix(X, X, 1.0)
res = smo(K, np.array([1.0, 1.0, -1.0, -1.0]), 50.0, trace=True)
print(res.n_iter, res.converged, res.alpha, res.bias)
print(np.diff(res.objective).min() >= 0)

##############################################################################
# Three classes at once.

rng = np.random.default_rng(1)
centers = np.array([[0, 0], [5, 0], [0, 5]])
X3 = np.vstack([c + rng.standard_normal((20, 2)) for c in centers])
y3 = [k for k in "abc" for _ in range(20)]
model3 = train(X3, y3, C=10.0, gamma=0.5)
print(np.mean(np.array(model3.predict(X3)) == np.array(y3)))
